//! Triangulated planar domains with an explicit oriented boundary.
//!
//! Plain-text format, one record per line, indices 0-based:
//!
//! ```text
//! v x y        vertex
//! t i j k      triangle, counter-clockwise
//! b i j        boundary edge, traversed with the domain on the left
//! ```
//!
//! Blank lines and lines starting with `#` are ignored.

use std::collections::HashMap;
use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    vertices: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    boundary_edges: Vec<[usize; 2]>,
    /// Start vertex of each boundary edge; position `e` belongs to edge `e`.
    boundary_vertices: Vec<usize>,
    boundary_position: Vec<Option<usize>>,
}

fn signed_area(p: [f64; 2], q: [f64; 2], r: [f64; 2]) -> f64 {
    0.5 * ((q[0] - p[0]) * (r[1] - p[1]) - (r[0] - p[0]) * (q[1] - p[1]))
}

impl Mesh {
    /// Builds a mesh and checks it: positive triangle areas, every vertex used,
    /// a manifold edge structure, boundary edges matching exactly the edges
    /// owned by one triangle (with the triangle's orientation), and closed
    /// boundary loops.
    pub fn new(
        vertices: Vec<[f64; 2]>,
        triangles: Vec<[usize; 3]>,
        boundary_edges: Vec<[usize; 2]>,
    ) -> Result<Self> {
        let nv = vertices.len();
        if triangles.is_empty() {
            return Err(Error::Mesh("no triangles".into()));
        }
        if vertices.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::Mesh("non-finite vertex coordinate".into()));
        }
        let mut used = vec![false; nv];
        let mut edge_owners: HashMap<(usize, usize), Vec<(usize, usize)>> = HashMap::new();
        for (t, tri) in triangles.iter().enumerate() {
            if tri.iter().any(|&i| i >= nv) {
                return Err(Error::Mesh(format!(
                    "triangle {t} references a missing vertex"
                )));
            }
            let area = signed_area(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
            if !(area > 0.0) {
                return Err(Error::Mesh(format!(
                    "triangle {t} is degenerate or clockwise (signed area {area:e})"
                )));
            }
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                used[a] = true;
                edge_owners
                    .entry((a.min(b), a.max(b)))
                    .or_default()
                    .push((a, b));
            }
        }
        if let Some(v) = used.iter().position(|u| !u) {
            return Err(Error::Mesh(format!(
                "vertex {v} is not used by any triangle"
            )));
        }
        let mut free_edges: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
        for (key, owners) in &edge_owners {
            match owners.len() {
                1 => {
                    free_edges.insert(*key, owners[0]);
                }
                2 => {}
                n => {
                    return Err(Error::Mesh(format!(
                        "edge {key:?} is shared by {n} triangles"
                    )))
                }
            }
        }
        if free_edges.len() != boundary_edges.len() {
            return Err(Error::Mesh(format!(
                "{} edges belong to a single triangle but {} boundary edges were given",
                free_edges.len(),
                boundary_edges.len()
            )));
        }
        let mut boundary_position = vec![None; nv];
        let mut ends = vec![0usize; nv];
        for (e, &[a, b]) in boundary_edges.iter().enumerate() {
            match free_edges.get(&(a.min(b), a.max(b))) {
                Some(&(ta, tb)) if (ta, tb) == (a, b) => {}
                Some(_) => {
                    return Err(Error::Mesh(format!(
                        "boundary edge {e} ({a}, {b}) is oriented against its triangle"
                    )))
                }
                None => {
                    return Err(Error::Mesh(format!(
                        "boundary edge {e} ({a}, {b}) does not bound exactly one triangle"
                    )))
                }
            }
            if boundary_position[a].replace(e).is_some() {
                return Err(Error::Mesh(format!("vertex {a} starts two boundary edges")));
            }
            ends[b] += 1;
        }
        for (v, pos) in boundary_position.iter().enumerate() {
            if pos.is_some() != (ends[v] == 1) || ends[v] > 1 {
                return Err(Error::Mesh(format!("boundary loop is open at vertex {v}")));
            }
        }
        let boundary_vertices = boundary_edges.iter().map(|e| e[0]).collect();
        Ok(Self {
            vertices,
            triangles,
            boundary_edges,
            boundary_vertices,
            boundary_position,
        })
    }

    /// Skips validation; only for exercising downstream error paths.
    #[cfg(test)]
    pub(crate) fn from_raw_parts(
        vertices: Vec<[f64; 2]>,
        triangles: Vec<[usize; 3]>,
        boundary_edges: Vec<[usize; 2]>,
    ) -> Self {
        let mut boundary_position = vec![None; vertices.len()];
        for (e, b) in boundary_edges.iter().enumerate() {
            boundary_position[b[0]] = Some(e);
        }
        Self {
            boundary_vertices: boundary_edges.iter().map(|e| e[0]).collect(),
            vertices,
            triangles,
            boundary_edges,
            boundary_position,
        }
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_edges(&self) -> &[[usize; 2]] {
        &self.boundary_edges
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    /// Boundary vertices in boundary-edge order (vertex `i` starts edge `i`).
    pub fn boundary_vertices(&self) -> &[usize] {
        &self.boundary_vertices
    }

    /// Position of `vertex` in [`Mesh::boundary_vertices`].
    pub fn boundary_position(&self, vertex: usize) -> Option<usize> {
        self.boundary_position.get(vertex).copied().flatten()
    }

    pub fn is_boundary(&self, vertex: usize) -> bool {
        self.boundary_position(vertex).is_some()
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        signed_area(self.vertices[a], self.vertices[b], self.vertices[c])
    }

    pub fn centroid(&self, t: usize) -> [f64; 2] {
        let [a, b, c] = self.triangles[t].map(|i| self.vertices[i]);
        [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0]
    }

    pub fn area(&self) -> f64 {
        (0..self.triangles.len())
            .map(|t| self.triangle_area(t))
            .sum()
    }

    pub fn edge_length(&self, e: usize) -> f64 {
        let [a, b] = self.boundary_edges[e].map(|i| self.vertices[i]);
        (b[0] - a[0]).hypot(b[1] - a[1])
    }

    pub fn boundary_length(&self) -> f64 {
        (0..self.boundary_edges.len())
            .map(|e| self.edge_length(e))
            .sum()
    }

    /// Polar angle of each boundary vertex, in boundary order.
    pub fn boundary_angles(&self) -> Vec<f64> {
        self.boundary_vertices
            .iter()
            .map(|&v| self.vertices[v][1].atan2(self.vertices[v][0]))
            .collect()
    }

    /// Same geometry with vertex `v` renamed `perm[v]`.
    pub fn relabeled(&self, perm: &[usize]) -> Result<Self> {
        let n = self.vertices.len();
        let mut seen = vec![false; n];
        if perm.len() != n
            || perm
                .iter()
                .any(|&p| p >= n || std::mem::replace(&mut seen[p], true))
        {
            return Err(Error::InvalidInput(
                "relabeling is not a permutation".into(),
            ));
        }
        let mut vertices = vec![[0.0; 2]; n];
        for (v, &p) in perm.iter().enumerate() {
            vertices[p] = self.vertices[v];
        }
        let triangles = self.triangles.iter().map(|t| t.map(|i| perm[i])).collect();
        let edges = self
            .boundary_edges
            .iter()
            .map(|e| e.map(|i| perm[i]))
            .collect();
        Self::new(vertices, triangles, edges)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for [x, y] in &self.vertices {
            let _ = writeln!(out, "v {x:?} {y:?}");
        }
        for [a, b, c] in &self.triangles {
            let _ = writeln!(out, "t {a} {b} {c}");
        }
        for [a, b] in &self.boundary_edges {
            let _ = writeln!(out, "b {a} {b}");
        }
        out
    }

    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        w.write_all(self.to_text().as_bytes())?;
        Ok(())
    }

    pub fn read_from(r: impl BufRead) -> Result<Self> {
        let mut vertices = Vec::new();
        let mut triangles = Vec::new();
        let mut edges = Vec::new();
        for (n, line) in r.lines().enumerate() {
            let line = line?;
            let line_no = n + 1;
            let mut parts = line.split_whitespace();
            let Some(tag) = parts.next() else { continue };
            if tag.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = parts.collect();
            let bad = |msg: &str| Error::Parse {
                line: line_no,
                msg: msg.to_string(),
            };
            let want = match tag {
                "v" => 2,
                "t" => 3,
                "b" => 2,
                other => return Err(bad(&format!("unknown record '{other}'"))),
            };
            if fields.len() != want {
                return Err(bad(&format!(
                    "'{tag}' expects {want} fields, got {}",
                    fields.len()
                )));
            }
            if tag == "v" {
                let c: Vec<f64> = fields
                    .iter()
                    .map(|s| s.parse().map_err(|_| bad(&format!("bad coordinate '{s}'"))))
                    .collect::<Result<_>>()?;
                vertices.push([c[0], c[1]]);
            } else {
                let i: Vec<usize> = fields
                    .iter()
                    .map(|s| s.parse().map_err(|_| bad(&format!("bad index '{s}'"))))
                    .collect::<Result<_>>()?;
                if tag == "t" {
                    triangles.push([i[0], i[1], i[2]]);
                } else {
                    edges.push([i[0], i[1]]);
                }
            }
        }
        Self::new(vertices, triangles, edges)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::read_from(std::io::BufReader::new(file))
    }
}

/// Structured polar triangulation of the unit disk.
///
/// Ring `i` (`i = 1..=rings`) carries `6i` equally spaced vertices; the
/// triangles between consecutive rings follow the six sectors of a hexagon,
/// giving `6 rings²` triangles. Doubling `rings` keeps every old vertex, so
/// the meshes of [`generate_disk_mesh`] are nested.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskMeshBuilder {
    pub rings: usize,
    /// Place one ring exactly at this radius (for resolving the interface of
    /// a two-valued radial density). At least two rings stay outside it.
    pub align_radius: Option<f64>,
}

impl DiskMeshBuilder {
    pub fn new(rings: usize) -> Self {
        Self {
            rings,
            align_radius: None,
        }
    }

    pub fn align(mut self, radius: f64) -> Self {
        self.align_radius = Some(radius);
        self
    }

    fn ring_radii(&self) -> Result<Vec<f64>> {
        let n = self.rings;
        match self.align_radius {
            None => Ok((0..=n).map(|i| i as f64 / n as f64).collect()),
            Some(r) => {
                if !(r > 0.0 && r < 1.0) {
                    return Err(Error::InvalidInput(format!(
                        "aligned radius must lie in (0, 1), got {r}"
                    )));
                }
                if n < 3 {
                    return Err(Error::InvalidInput(
                        "aligning a ring needs at least 3 rings".into(),
                    ));
                }
                let m = ((n as f64 * r).round() as usize).clamp(1, n - 2);
                Ok((0..=n)
                    .map(|i| {
                        if i <= m {
                            r * i as f64 / m as f64
                        } else {
                            r + (1.0 - r) * (i - m) as f64 / (n - m) as f64
                        }
                    })
                    .collect())
            }
        }
    }

    pub fn build(&self) -> Result<Mesh> {
        let n = self.rings;
        if n == 0 {
            return Err(Error::InvalidInput(
                "disk mesh needs at least one ring".into(),
            ));
        }
        let radii = self.ring_radii()?;
        let mut vertices = vec![[0.0, 0.0]];
        let mut ring_start = vec![0usize];
        for (i, &r) in radii.iter().enumerate().skip(1) {
            ring_start.push(vertices.len());
            let count = 6 * i;
            for m in 0..count {
                // m / (6i) is the same double for every refinement level.
                let theta = TAU * (m as f64 / count as f64);
                vertices.push([r * theta.cos(), r * theta.sin()]);
            }
        }
        let outer_ring = |i: usize, m: usize| ring_start[i] + m % (6 * i);
        let inner_ring = |i: usize, m: usize| {
            if i == 0 {
                0
            } else {
                ring_start[i] + m % (6 * i)
            }
        };
        let mut triangles = Vec::with_capacity(6 * n * n);
        for i in 1..=n {
            for s in 0..6 {
                for m in 0..i {
                    let inner = inner_ring(i - 1, s * (i - 1) + m);
                    triangles.push([
                        inner,
                        outer_ring(i, s * i + m),
                        outer_ring(i, s * i + m + 1),
                    ]);
                    if m + 1 < i {
                        triangles.push([
                            inner,
                            outer_ring(i, s * i + m + 1),
                            inner_ring(i - 1, s * (i - 1) + m + 1),
                        ]);
                    }
                }
            }
        }
        let boundary_edges = (0..6 * n)
            .map(|m| [outer_ring(n, m), outer_ring(n, m + 1)])
            .collect();
        Mesh::new(vertices, triangles, boundary_edges)
    }
}

/// Rings used at a refinement level: `2^(r-1)`.
pub fn rings_for_refinement(refinement: u32) -> Result<usize> {
    if refinement == 0 || refinement > 12 {
        return Err(Error::InvalidInput(format!(
            "refinement must lie in 1..=12, got {refinement}"
        )));
    }
    Ok(1 << (refinement - 1))
}

/// Unit-disk mesh with `2^(r-1)` rings, `6·4^(r-1)` triangles.
pub fn generate_disk_mesh(refinement: u32) -> Result<Mesh> {
    DiskMeshBuilder::new(rings_for_refinement(refinement)?).build()
}

/// As [`generate_disk_mesh`], with a ring moved onto `radius`.
pub fn generate_disk_mesh_aligned(refinement: u32, radius: f64) -> Result<Mesh> {
    DiskMeshBuilder::new(rings_for_refinement(refinement)?)
        .align(radius)
        .build()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn unit_square() -> (Vec<[f64; 2]>, Vec<[usize; 3]>, Vec<[usize; 2]>) {
        (
            vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
            vec![[0, 1, 2], [0, 2, 3]],
            vec![[0, 1], [1, 2], [2, 3], [3, 0]],
        )
    }

    #[test]
    fn accepts_square() {
        let (v, t, b) = unit_square();
        let m = Mesh::new(v, t, b).unwrap();
        assert_eq!(m.area(), 1.0);
        assert_eq!(m.boundary_length(), 4.0);
        assert_eq!(m.boundary_vertices(), &[0, 1, 2, 3]);
        assert_eq!(m.boundary_position(2), Some(2));
    }

    #[test]
    fn rejects_bad_meshes() {
        let (v, t, b) = unit_square();
        // clockwise triangle
        assert!(Mesh::new(v.clone(), vec![[0, 2, 1], [0, 2, 3]], b.clone()).is_err());
        // boundary traversed the wrong way
        let reversed: Vec<_> = b.iter().rev().map(|e| [e[1], e[0]]).collect();
        assert!(Mesh::new(v.clone(), t.clone(), reversed).is_err());
        // missing boundary edge
        assert!(Mesh::new(v.clone(), t.clone(), b[..3].to_vec()).is_err());
        // interior edge listed as boundary
        let mut extra = b.clone();
        extra.push([0, 2]);
        assert!(Mesh::new(v.clone(), t.clone(), extra).is_err());
        // unused vertex
        let mut more = v.clone();
        more.push([5.0, 5.0]);
        assert!(Mesh::new(more, t.clone(), b.clone()).is_err());
        // degenerate triangle
        let flat = vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]];
        assert!(Mesh::new(flat, vec![[0, 1, 2]], vec![[0, 1], [1, 2], [2, 0]]).is_err());
    }

    #[test]
    fn coarse_disk() {
        let m = generate_disk_mesh(1).unwrap();
        assert_eq!(m.triangles().len(), 6);
        assert_eq!(m.num_vertices(), 7);
        assert!((0..6).all(|t| m.triangle_area(t) > 0.0));
    }

    #[test]
    fn disk_is_an_inscribed_polygon() {
        let mut defects = Vec::new();
        for r in 1..=6 {
            let m = generate_disk_mesh(r).unwrap();
            let sides = m.boundary_edges().len() as f64;
            let polygon = 0.5 * sides * (TAU / sides).sin();
            assert!((m.area() - polygon).abs() < 1e-12);
            for &v in m.boundary_vertices() {
                let [x, y] = m.vertices()[v];
                assert!((x.hypot(y) - 1.0).abs() < 1e-15);
            }
            defects.push(PI - m.area());
        }
        for w in defects.windows(2).skip(1) {
            let ratio = w[0] / w[1];
            assert!((ratio - 4.0).abs() < 0.1, "ratio {ratio}");
        }
    }

    #[test]
    fn refinement_levels_are_nested() {
        for r in 1..5 {
            let coarse = generate_disk_mesh(r).unwrap();
            let fine = generate_disk_mesh(r + 1).unwrap();
            let fine_set: std::collections::HashSet<[u64; 2]> = fine
                .vertices()
                .iter()
                .map(|p| p.map(f64::to_bits))
                .collect();
            assert!(coarse
                .vertices()
                .iter()
                .all(|p| fine_set.contains(&p.map(f64::to_bits))));
        }
    }

    #[test]
    fn aligned_ring_sits_on_radius() {
        let m = generate_disk_mesh_aligned(4, 0.9).unwrap();
        let on_ring = m
            .vertices()
            .iter()
            .filter(|p| (p[0].hypot(p[1]) - 0.9).abs() < 1e-14)
            .count();
        assert!(on_ring > 0);
        let rings_outside = DiskMeshBuilder::new(8).align(0.95).ring_radii().unwrap();
        assert_eq!(
            rings_outside.iter().filter(|&&r| r > 0.95 + 1e-12).count(),
            2
        );
        assert!(DiskMeshBuilder::new(2).align(0.5).build().is_err());
    }

    #[test]
    fn text_round_trip() {
        let m = generate_disk_mesh(3).unwrap();
        let back = Mesh::read_from(m.to_text().as_bytes()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let text = "v 0 0\nv 1 0\n\nv 0 x\n";
        match Mesh::read_from(text.as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
        assert!(Mesh::read_from("q 1 2\n".as_bytes()).is_err());
        assert!(Mesh::read_from("t 0 1\n".as_bytes()).is_err());
    }

    #[test]
    fn relabel_checks_permutation() {
        let m = generate_disk_mesh(2).unwrap();
        let n = m.num_vertices();
        let perm: Vec<usize> = (0..n).rev().collect();
        let r = m.relabeled(&perm).unwrap();
        assert_eq!(r.vertices()[n - 1], m.vertices()[0]);
        assert!(m.relabeled(&vec![0; n]).is_err());
    }
}
