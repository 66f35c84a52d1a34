//! One function per subcommand; each turns a configuration into a
//! [`ResultRecord`].

use rayon::prelude::*;
use steklov_core::ball::{
    derivative_formula, derivative_numeric, disk_neumann_lambda1, neumann_ball_spectrum,
    niwa_annulus_lambda1, steklov_ball_spectrum, validate_eps_grid, DEFAULT_EPS_MAX,
};
use steklov_core::fem::{
    generate_disk_mesh, generate_disk_mesh_aligned, neumann_fem, sample_concentrated, Mesh,
    SolverOptions,
};
use steklov_core::perturb::{
    bandle_hersch_check, criticality_residual_neumann, criticality_residual_steklov,
    discretization_tolerance, steklov_at, BoundaryFunction, ClusterPartition,
    CRITICALITY_THRESHOLD,
};
use steklov_core::spectrum::convergence_orders;
use steklov_core::{BallProblem, ConcentratedDensity};

use crate::config::{ExperimentConfig, Order};
use crate::error::{CliError, CliResult};
use crate::record::{Cell, Check, Column, Plot, ResultRecord, Source};

pub const CONVERGENCE_GRID: [f64; 4] = [0.1, 0.05, 0.025, 0.0125];
pub const DERIVATIVE_GRID: [f64; 4] = [0.08, 0.04, 0.02, 0.01];
pub const NIWA_GRID: [f64; 10] = [0.5, 0.45, 0.4, 0.35, 0.3, 0.25, 0.2, 0.15, 0.1, 0.05];
/// Largest relative FEM error accepted against the exact disk spectrum.
pub const FEM_REL_TOL: f64 = 1e-2;
/// Largest relative mismatch between numerical and closed-form slopes.
pub const SLOPE_REL_TOL: f64 = 1e-2;
/// Safety factor on the measured refinement difference in FEM cross-checks.
pub const REFINEMENT_FACTOR: f64 = 3.0;

/// Runs the named subcommand and times it.
pub fn run(command: &str, cfg: &ExperimentConfig) -> CliResult<ResultRecord> {
    let start = std::time::Instant::now();
    let mut record = match command {
        "steklov" => steklov(cfg),
        "convergence" => convergence(cfg),
        "derivative" => derivative(cfg),
        "criticality" => criticality(cfg),
        "bandle-hersch" => bandle_hersch(cfg),
        "niwa" => niwa(cfg),
        _ => Err(CliError::Config(format!("unknown command {command:?}"))),
    }?;
    record.wall_clock = start.elapsed();
    Ok(record)
}

fn problem(cfg: &ExperimentConfig) -> CliResult<BallProblem> {
    let dim = cfg.dimension.unwrap_or(2);
    let surface = BallProblem::new(dim, 1.0)?.surface();
    Ok(BallProblem::new(dim, cfg.mass.unwrap_or(surface))?)
}

fn disk_problem(cfg: &ExperimentConfig, command: &str) -> CliResult<BallProblem> {
    let p = problem(cfg)?;
    if p.dimension() != 2 {
        return Err(CliError::Config(format!(
            "{command} runs on planar meshes only (dimension = 2)"
        )));
    }
    Ok(p)
}

fn mesh_for(cfg: &ExperimentConfig, refinement: u32) -> CliResult<Mesh> {
    Ok(match &cfg.mesh {
        Some(path) => Mesh::load(path)?,
        None => generate_disk_mesh(refinement)?,
    })
}

fn joined(indices: &[usize]) -> String {
    indices
        .iter()
        .map(usize::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

fn plot(x: Column, y: Column, points: Vec<[f64; 2]>) -> Option<Plot> {
    Some(Plot { x, y, points })
}

/// Exact ball spectrum, and for the disk the P1 FEM spectrum beside it.
pub fn steklov(cfg: &ExperimentConfig) -> CliResult<ResultRecord> {
    let problem = problem(cfg)?;
    let count = cfg.count.unwrap_or(8);
    let exact = steklov_ball_spectrum(&problem, count)?;
    let fem = if problem.dimension() == 2 {
        let mesh = mesh_for(cfg, cfg.refinement.unwrap_or(5))?;
        let rho = BoundaryFunction::constant(&mesh, problem.steklov_density());
        Some(steklov_at(&mesh, &rho, count, &SolverOptions::default())?.eigenvalues)
    } else {
        None
    };
    let mut r = ResultRecord::new(
        "steklov",
        cfg.echo(),
        vec![
            Column::new("j", "index", Source::Input),
            Column::new("degree", "k", Source::BallExact),
            Column::new("lambda", "1", Source::BallExact),
            Column::new("lambda_fem", "1", Source::Fem2d),
            Column::new("abs_error", "1", Source::Derived),
        ],
    );
    let mut worst: f64 = 0.0;
    for (j, (&l, label)) in exact.eigenvalues.iter().zip(&exact.labels).enumerate() {
        let f = fem.as_ref().map(|f| f[j]);
        let err = f.map(|f| (f - l).abs());
        if let Some(e) = err {
            worst = worst.max(e / l.max(1.0));
        }
        r.push(vec![
            j.into(),
            label.degree.into(),
            l.into(),
            f.into(),
            err.into(),
        ]);
    }
    if fem.is_some() {
        r.checks
            .push(Check::at_most("fem relative error", worst, FEM_REL_TOL));
    }
    r.plot = plot(
        Column::new("j", "index", Source::Input),
        Column::new("lambda", "1", Source::BallExact),
        exact
            .eigenvalues
            .iter()
            .enumerate()
            .map(|(j, &l)| [j as f64, l])
            .collect(),
    );
    Ok(r)
}

/// Neumann eigenvalues of the concentrated densities approaching the Steklov
/// limit, with observed rates and an optional FEM cross-check on the disk.
pub fn convergence(cfg: &ExperimentConfig) -> CliResult<ResultRecord> {
    let problem = problem(cfg)?;
    let count = cfg.count.unwrap_or(6);
    let grid = cfg.eps_grid.clone().unwrap_or(CONVERGENCE_GRID.to_vec());
    validate_eps_grid(&grid, DEFAULT_EPS_MAX)?;
    let limit = steklov_ball_spectrum(&problem, count)?;
    let sweep = grid
        .par_iter()
        .map(|&eps| {
            let density = ConcentratedDensity::new(&problem, eps)?;
            neumann_ball_spectrum(&density, &problem, count)
        })
        .collect::<steklov_core::Result<Vec<_>>>()?;

    // the coarse aligned mesh needs at least three rings
    let refinement = cfg.refinement.unwrap_or(5);
    let fem = if problem.dimension() == 2 && refinement >= 4 {
        let solve = |eps: f64, r: u32| -> CliResult<Vec<f64>> {
            let density = ConcentratedDensity::new(&problem, eps)?;
            let mesh = generate_disk_mesh_aligned(r, density.interface_radius())?;
            let rho = sample_concentrated(&mesh, &density);
            Ok(neumann_fem(&mesh, &rho, count, &SolverOptions::default())?.eigenvalues)
        };
        Some(
            grid.par_iter()
                .map(|&eps| Ok((solve(eps, refinement - 1)?, solve(eps, refinement)?)))
                .collect::<CliResult<Vec<_>>>()?,
        )
    } else {
        None
    };

    let mut r = ResultRecord::new(
        "convergence",
        cfg.echo(),
        vec![
            Column::new("eps", "1", Source::Input),
            Column::new("j", "index", Source::Input),
            Column::new("degree", "k", Source::BallExact),
            Column::new("lambda_eps", "1", Source::BallExact),
            Column::new("lambda_limit", "1", Source::BallExact),
            Column::new("gap", "1", Source::Derived),
            Column::new("order", "1", Source::Derived),
            Column::new("lambda_fem", "1", Source::Fem2d),
            Column::new("fem_refinement_diff", "1", Source::Fem2d),
        ],
    );
    let gaps: Vec<Vec<f64>> = (0..count)
        .map(|j| {
            sweep
                .iter()
                .map(|s| (s.eigenvalues[j] - limit.eigenvalues[j]).abs())
                .collect()
        })
        .collect();
    let orders: Vec<Vec<f64>> = gaps.iter().map(|g| convergence_orders(&grid, g)).collect();
    let mut fem_ok = true;
    for (i, &eps) in grid.iter().enumerate() {
        for j in 0..count {
            let l = sweep[i].eigenvalues[j];
            let order = if i > 0 {
                Some(orders[j][i - 1]).filter(|o| o.is_finite())
            } else {
                None
            };
            let (f, diff) = match &fem {
                Some(f) => {
                    let (coarse, fine) = (&f[i].0, &f[i].1);
                    let diff = (fine[j] - coarse[j]).abs();
                    if j > 0 {
                        fem_ok &= (fine[j] - l).abs() <= REFINEMENT_FACTOR * diff;
                    }
                    (Some(fine[j]), Some(diff))
                }
                None => (None, None),
            };
            r.push(vec![
                eps.into(),
                j.into(),
                sweep[i].labels[j].degree.into(),
                l.into(),
                limit.eigenvalues[j].into(),
                gaps[j][i].into(),
                order.into(),
                f.into(),
                diff.into(),
            ]);
        }
    }
    let lambda0 = sweep
        .iter()
        .map(|s| s.eigenvalues[0].abs())
        .fold(0.0, f64::max);
    r.checks
        .push(Check::at_most("lambda_0 vanishes", lambda0, 1e-12));
    for (j, gap) in gaps.iter().enumerate().skip(1) {
        let decreasing = gap.windows(2).all(|w| w[1] < w[0]);
        r.checks.push(Check::holds(
            format!("gap j={j} decreases with eps"),
            decreasing,
        ));
    }
    if fem.is_some() {
        r.checks
            .push(Check::holds("fem within 3x refinement difference", fem_ok));
    }
    if count > 1 {
        r.plot = plot(
            Column::new("eps", "1", Source::Input),
            Column::new("gap_j1", "1", Source::Derived),
            grid.iter().zip(&gaps[1]).map(|(&e, &g)| [e, g]).collect(),
        );
    }
    Ok(r)
}

/// One-sided `ε`-derivatives of the concentrated eigenvalues against the
/// closed-form slope.
pub fn derivative(cfg: &ExperimentConfig) -> CliResult<ResultRecord> {
    let problem = problem(cfg)?;
    let indices = cfg.indices.clone().unwrap_or(vec![1, 2, 3]);
    let grid = cfg.eps_grid.clone().unwrap_or(DERIVATIVE_GRID.to_vec());
    validate_eps_grid(&grid, DEFAULT_EPS_MAX)?;
    let estimates = indices
        .iter()
        .map(|&j| derivative_numeric(&problem, j, &grid))
        .collect::<steklov_core::Result<Vec<_>>>()?;
    let mut r = ResultRecord::new(
        "derivative",
        cfg.echo(),
        vec![
            Column::new("j", "index", Source::Input),
            Column::new("lambda_limit", "1", Source::BallExact),
            Column::new("slope_numeric", "1", Source::BallExact),
            Column::new("slope_formula", "1", Source::Derived),
            Column::new("rel_diff", "1", Source::Derived),
        ],
    );
    for e in &estimates {
        let formula = derivative_formula(&problem, e.lambda0);
        let diff = (e.slope - formula).abs();
        if formula == 0.0 {
            r.checks.push(Check::at_most(
                format!("slope j={} vanishes", e.index),
                diff,
                1e-8,
            ));
            r.push(vec![
                e.index.into(),
                e.lambda0.into(),
                e.slope.into(),
                formula.into(),
                Cell::Empty,
            ]);
        } else {
            let rel = diff / formula.abs();
            r.checks.push(Check::at_most(
                format!("slope j={} matches formula", e.index),
                rel,
                SLOPE_REL_TOL,
            ));
            r.push(vec![
                e.index.into(),
                e.lambda0.into(),
                e.slope.into(),
                formula.into(),
                rel.into(),
            ]);
        }
    }
    r.plot = plot(
        Column::new("lambda_limit", "1", Source::BallExact),
        Column::new("slope_numeric", "1", Source::BallExact),
        estimates.iter().map(|e| [e.lambda0, e.slope]).collect(),
    );
    Ok(r)
}

#[derive(Clone, Copy)]
struct Case {
    problem: &'static str,
    density: &'static str,
}

/// One `(cluster, h)` evaluation; `result` holds the certification error when
/// the cluster cannot be separated from its neighbours.
struct Entry {
    cluster: String,
    h: Option<usize>,
    result: Result<f64, String>,
    profile: Option<(Vec<f64>, Vec<f64>)>,
}

/// Criticality deviations of `Λ_{F,h}` for the constant and a perturbed
/// boundary density and for the constant interior density.
pub fn criticality(cfg: &ExperimentConfig) -> CliResult<ResultRecord> {
    let problem = disk_problem(cfg, "criticality")?;
    let refinement = cfg.refinement.unwrap_or(5);
    let clusters = cfg.clusters.clone().unwrap_or(vec![vec![1, 2]]);
    let amplitude = cfg.amplitude.unwrap_or(0.3);
    let count = clusters.iter().flatten().max().copied().unwrap_or(0) + 2;
    let order = cfg.order.unwrap_or(Order::All);
    for f in &clusters {
        if let Order::Single(h) = order {
            if h > f.len() {
                return Err(CliError::Config(format!(
                    "order {h} exceeds cluster size {}",
                    f.len()
                )));
            }
        }
    }
    let orders = |size: usize| match order {
        Order::All => (1..=size).collect(),
        Order::Single(h) => vec![h],
    };
    let cases = [
        Case {
            problem: "steklov",
            density: "constant",
        },
        Case {
            problem: "steklov",
            density: "perturbed",
        },
        Case {
            problem: "neumann",
            density: "constant",
        },
    ];
    let opts = SolverOptions::default();
    let rho0 = problem.steklov_density();
    let interior0 = problem.total_mass() / problem.volume();

    let evaluate = |mesh: &Mesh, case: Case| -> CliResult<Vec<Entry>> {
        let mut out = Vec::new();
        let boundary = match (case.problem, case.density) {
            ("steklov", "constant") => Some(BoundaryFunction::constant(mesh, rho0)),
            ("steklov", _) => Some(BoundaryFunction::from_angle(mesh, |t| {
                rho0 * (1.0 + amplitude * t.cos())
            })),
            _ => None,
        };
        let interior = vec![interior0; mesh.triangles().len()];
        let s = match &boundary {
            Some(rho) => steklov_at(mesh, rho, count, &opts)?,
            None => neumann_fem(mesh, &interior, count, &opts)?,
        };
        for f in &clusters {
            let cluster = joined(f);
            let p = match ClusterPartition::certify(&s.eigenvalues, f) {
                Ok(p) => p,
                Err(e @ steklov_core::Error::Partition(_)) => {
                    out.push(Entry {
                        cluster,
                        h: None,
                        result: Err(e.to_string()),
                        profile: None,
                    });
                    continue;
                }
                Err(e) => return Err(e.into()),
            };
            for h in orders(p.size()) {
                let (dev, profile) = match &boundary {
                    Some(rho) => {
                        let (prof, dev) = criticality_residual_steklov(mesh, rho, &s, &p, h)?;
                        (dev, Some((mesh.boundary_angles(), prof.values().to_vec())))
                    }
                    None => (
                        criticality_residual_neumann(mesh, &interior, &s, &p, h)?.1,
                        None,
                    ),
                };
                out.push(Entry {
                    cluster: cluster.clone(),
                    h: Some(h),
                    result: Ok(dev),
                    profile,
                });
            }
        }
        Ok(out)
    };
    let fine_mesh = mesh_for(cfg, refinement)?;
    let coarse_mesh = match (&cfg.mesh, refinement) {
        (None, r) if r >= 2 => Some(generate_disk_mesh(r - 1)?),
        _ => None,
    };

    let mut r = ResultRecord::new(
        "criticality",
        cfg.echo(),
        vec![
            Column::new("problem", "-", Source::Input),
            Column::new("density", "-", Source::Input),
            Column::new("cluster", "indices", Source::Input),
            Column::new("h", "order", Source::Input),
            Column::new("deviation", "1", Source::Perturb),
            Column::new("deviation_coarse", "1", Source::Perturb),
            Column::new("critical", "flag", Source::Derived),
            Column::new("note", "-", Source::Perturb),
        ],
    );
    for (c, &case) in cases.iter().enumerate() {
        let fine = evaluate(&fine_mesh, case)?;
        let coarse = match &coarse_mesh {
            Some(m) => evaluate(m, case)?,
            None => Vec::new(),
        };
        for e in &fine {
            let coarse_dev = coarse
                .iter()
                .find(|x| x.cluster == e.cluster && x.h == e.h)
                .and_then(|x| x.result.clone().ok());
            let dev = e.result.clone().ok();
            let note = e.result.clone().err();
            let critical = dev.map(|d| d <= CRITICALITY_THRESHOLD);
            r.push(vec![
                case.problem.into(),
                case.density.into(),
                e.cluster.clone().into(),
                e.h.into(),
                dev.into(),
                coarse_dev.into(),
                critical.into(),
                note.into(),
            ]);
            if c == 0 {
                let label = match e.h {
                    Some(h) => format!(
                        "constant boundary density critical F={{{}}} h={h}",
                        e.cluster
                    ),
                    None => format!("constant boundary density certifies F={{{}}}", e.cluster),
                };
                r.checks.push(match dev {
                    Some(d) => Check::at_most(label, d, CRITICALITY_THRESHOLD),
                    None => Check::holds(label, false),
                });
            }
            let shown = if amplitude != 0.0 { 1 } else { 0 };
            if c == shown && r.plot.is_none() {
                if let Some((angles, values)) = &e.profile {
                    r.plot = plot(
                        Column::new("theta", "rad", Source::Fem2d),
                        Column::new("stationarity_profile", "1", Source::Perturb),
                        angles.iter().zip(values).map(|(&t, &v)| [t, v]).collect(),
                    );
                }
            }
        }
    }
    Ok(r)
}

/// Random `n`-fold symmetric boundary densities against the constant one.
pub fn bandle_hersch(cfg: &ExperimentConfig) -> CliResult<ResultRecord> {
    let problem = disk_problem(cfg, "bandle-hersch")?;
    let seed = cfg
        .seed
        .ok_or_else(|| CliError::Config("bandle-hersch needs an explicit seed".into()))?;
    let n = cfg.symmetry.unwrap_or(3);
    let trials = cfg.trials.unwrap_or(20);
    let mesh = mesh_for(cfg, cfg.refinement.unwrap_or(6))?;
    let opts = SolverOptions::default();
    let m = problem.total_mass();
    let tolerance = discretization_tolerance(&mesh, m, n + 1, &opts)?;
    let report = bandle_hersch_check(&mesh, n, m, trials, seed, tolerance, &opts)?;

    let mut columns = vec![
        Column::new("trial", "index", Source::Input),
        Column::new("density", "-", Source::Input),
        Column::new("density_min", "1", Source::Input),
        Column::new("density_max", "1", Source::Input),
    ];
    for j in 0..=n {
        columns.push(Column::new(&format!("lambda_{j}"), "1", Source::Fem2d));
    }
    columns.push(Column::new("max_excess", "1", Source::Derived));
    columns.push(Column::new("violation", "flag", Source::Derived));
    let mut r = ResultRecord::new("bandle-hersch", cfg.echo(), columns);

    let c = m / mesh.boundary_length();
    let mut row: Vec<Cell> = vec![Cell::Empty, "constant".into(), c.into(), c.into()];
    row.extend(report.constant.iter().map(|&l| Cell::from(l)));
    row.extend([0.0.into(), false.into()]);
    r.push(row);
    for t in &report.trials {
        let mut row: Vec<Cell> = vec![
            t.trial.into(),
            "sampled".into(),
            t.density_min.into(),
            t.density_max.into(),
        ];
        row.extend(t.eigenvalues.iter().map(|&l| Cell::from(l)));
        let violated = report.violations.iter().any(|v| v.trial == t.trial);
        row.extend([t.max_excess.into(), violated.into()]);
        r.push(row);
    }
    for j in 0..=n {
        let count = report.violations.iter().filter(|v| v.index == j).count();
        r.checks.push(Check::at_most(
            format!("lambda_{j} never exceeds the constant density by more than {tolerance:.3e}"),
            count as f64,
            0.0,
        ));
    }
    r.plot = plot(
        Column::new("trial", "index", Source::Input),
        Column::new("max_excess", "1", Source::Derived),
        report
            .trials
            .iter()
            .map(|t| [t.trial as f64, t.max_excess])
            .collect(),
    );
    Ok(r)
}

/// First Neumann eigenvalue of thin planar annuli, and its disk limit.
pub fn niwa(cfg: &ExperimentConfig) -> CliResult<ResultRecord> {
    let grid = cfg.eps_grid.clone().unwrap_or(NIWA_GRID.to_vec());
    if let Some(&e) = grid.iter().find(|&&e| !(e > 0.0 && e < 1.0)) {
        return Err(CliError::Config(format!(
            "annulus width {e} must lie in (0, 1)"
        )));
    }
    let values = grid
        .par_iter()
        .map(|&e| niwa_annulus_lambda1(e))
        .collect::<steklov_core::Result<Vec<_>>>()?;
    let limit = disk_neumann_lambda1()?;
    let mut r = ResultRecord::new(
        "niwa",
        cfg.echo(),
        vec![
            Column::new("eps", "1", Source::Input),
            Column::new("lambda_1", "1", Source::BallExact),
            Column::new("disk_limit", "1", Source::BallExact),
            Column::new("gap_to_limit", "1", Source::Derived),
        ],
    );
    for (&e, &l) in grid.iter().zip(&values) {
        r.push(vec![e.into(), l.into(), limit.into(), (limit - l).into()]);
    }
    // the grid decreases, so increasing in ε means decreasing along rows
    r.checks.push(Check::holds(
        "lambda_1 increases with eps",
        values.windows(2).all(|w| w[1] < w[0]),
    ));
    r.checks.push(Check::holds(
        "lambda_1 stays below the disk value",
        values.iter().all(|&l| l < limit),
    ));
    if grid[0] >= 0.99 {
        r.checks.push(Check::at_most(
            "widest annulus near the disk",
            (limit - values[0]) / limit,
            1e-2,
        ));
    }
    r.plot = plot(
        Column::new("eps", "1", Source::Input),
        Column::new("lambda_1", "1", Source::BallExact),
        grid.iter()
            .zip(&values)
            .rev()
            .map(|(&e, &l)| [e, l])
            .collect(),
    );
    Ok(r)
}
