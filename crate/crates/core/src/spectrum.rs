use std::ops::Range;

use serde::{Deserialize, Serialize};

/// Separation-of-variables label: angular degree `k` and radial index `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModeLabel {
    pub degree: usize,
    pub radial: usize,
}

/// Sorted eigenvalues `λ_0 <= λ_1 <= ...` with their multiplicity clusters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub labels: Vec<ModeLabel>,
    pub clusters: Vec<Range<usize>>,
}

impl Spectrum {
    /// Expands `(value, label, multiplicity)` triples, sorts them and keeps the
    /// first `count`.
    pub fn from_modes(
        modes: impl IntoIterator<Item = (f64, ModeLabel, usize)>,
        count: usize,
        cluster_gap: f64,
    ) -> Self {
        let mut expanded: Vec<(f64, ModeLabel)> = modes
            .into_iter()
            .flat_map(|(v, l, m)| std::iter::repeat_n((v, l), m))
            .collect();
        expanded.sort_by(|a, b| {
            a.0.total_cmp(&b.0)
                .then(a.1.degree.cmp(&b.1.degree))
                .then(a.1.radial.cmp(&b.1.radial))
        });
        expanded.truncate(count);
        let (eigenvalues, labels): (Vec<_>, Vec<_>) = expanded.into_iter().unzip();
        let clusters = cluster_ranges(&eigenvalues, cluster_gap);
        Self {
            eigenvalues,
            labels,
            clusters,
        }
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Cluster containing index `j`.
    pub fn cluster_of(&self, j: usize) -> Option<Range<usize>> {
        self.clusters.iter().find(|c| c.contains(&j)).cloned()
    }
}

/// `|a - b| / max(|a|, |b|)`, and 0 when both vanish.
pub fn relative_gap(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Groups consecutive sorted values whose relative gap is below `gap`.
pub fn cluster_ranges(values: &[f64], gap: f64) -> Vec<Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        if i == values.len() || relative_gap(values[i - 1], values[i]) >= gap {
            if i > start {
                out.push(start..i);
            }
            start = i;
        }
    }
    out
}

/// Observed orders `log(e_i / e_{i+1}) / log(h_i / h_{i+1})` between
/// consecutive entries of a refinement study.
pub fn convergence_orders(steps: &[f64], errors: &[f64]) -> Vec<f64> {
    steps
        .windows(2)
        .zip(errors.windows(2))
        .map(|(h, e)| (e[0] / e[1]).ln() / (h[0] / h[1]).ln())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clusters_by_relative_gap() {
        let v = [0.0, 1.0, 1.0 + 1e-9, 2.0, 2.0, 2.0, 3.0];
        assert_eq!(cluster_ranges(&v, 1e-6), vec![0..1, 1..3, 3..6, 6..7]);
        assert!(cluster_ranges(&[], 1e-6).is_empty());
    }

    #[test]
    fn orders_of_a_power_law() {
        let h = [0.4, 0.2, 0.1];
        let e: Vec<f64> = h.iter().map(|x| 3.0 * x * x).collect();
        for p in convergence_orders(&h, &e) {
            assert!((p - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn from_modes_expands_multiplicity() {
        let l = |k| ModeLabel {
            degree: k,
            radial: 0,
        };
        let s = Spectrum::from_modes([(2.0, l(2), 2), (0.0, l(0), 1), (1.0, l(1), 2)], 4, 1e-6);
        assert_eq!(s.eigenvalues, vec![0.0, 1.0, 1.0, 2.0]);
        assert_eq!(s.labels[3].degree, 2);
        assert_eq!(s.cluster_of(2), Some(1..3));
    }
}
