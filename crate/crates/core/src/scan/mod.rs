//! The parameter sweep: every orient, every base point, every level, with
//! the level-stability filter, deduplication and output writers.

pub mod config;
mod io;
mod verify;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{distance, dot, unit_sphere_grid};
use crate::oracle::{dedup, BoundaryCloud, BoundaryPoint};
use crate::problems::{load_problem, Problem};
use crate::reduction::{
    component_bounds_with_margin, parameter_range, parameter_range_intersection, sample_param_grid,
    ComponentBounds, ParamBox,
};
use crate::scalarization::{levels_agree, value_with, ScalarizationParams, ValueMode, ValueOptions, Witness};
use crate::solver::SolverConfig;

pub use config::{
    BaseStrategy, BoundsChoice, ConeSection, KMax, OrientSection, OutputSection, Resolved, Scalar,
    ScanConfig, SweepSection, ToleranceSection, Truncation,
};
pub use io::{csv_string, read_csv, write_csv, write_outputs, ScanDocument};
pub use verify::{compare, oracle_boundary, verify, verify_cloud, Offender, OracleParams, VerifyReport};

/// Diagnostics for one level of one `(a, b)` pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelDiagnostic {
    pub k: u32,
    /// `−∞` (serialized as `null`) when nothing is reachable.
    pub value: f64,
    pub clipped: bool,
    pub h_raw: f64,
    /// Whether `V^(k+1) = V^(k)` held (always true for `r = ∞`).
    pub stable: bool,
    pub witnesses: usize,
}

/// Diagnostics for one `(a, b)` pair of the sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellDiagnostic {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    /// Highest level tested; 1 for the untruncated cone.
    pub k_max: u32,
    pub levels: Vec<LevelDiagnostic>,
    pub evaluations: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScanStats {
    pub orients: usize,
    /// Orients for which a multi-pivot reduction was infeasible.
    pub skipped_orients: usize,
    pub pairs: usize,
    pub solves: usize,
    pub evaluations: usize,
    pub failed_pairs: usize,
    /// Witnesses before deduplication.
    pub raw_points: usize,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanOutcome {
    pub cloud: BoundaryCloud,
    pub cells: Vec<CellDiagnostic>,
    pub stats: ScanStats,
}

/// Loads the configured problem and runs the sweep.
pub fn scan(cfg: &ScanConfig) -> Result<ScanOutcome> {
    let problem = load_problem(&cfg.problem)?;
    scan_problem(&problem, cfg)
}

/// Runs the sweep of `cfg` on an already constructed problem; the
/// `problem` section of `cfg` is only used for the digest.
pub fn scan_problem(problem: &Problem, cfg: &ScanConfig) -> Result<ScanOutcome> {
    let resolved = cfg.validate()?;
    let m = problem.dim_image();
    let orients = unit_sphere_grid(m, cfg.sweep.orients.count, cfg.sweep.orients.seed)?;
    let plan = BasePlan::new(problem, cfg)?;

    let mut skipped_orients = 0;
    let mut units: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();
    for b in &orients {
        let bases = plan.bases(b)?;
        if bases.is_empty() {
            skipped_orients += 1;
        }
        units.extend(bases.into_iter().map(|a| (a, b.clone())));
    }

    let shape = if resolved.r.is_finite() {
        Some(ImageShape::estimate(
            problem,
            cfg.sweep.bounds_samples,
            cfg.sweep.bounds_margin,
            cfg.solver.seed,
        )?)
    } else {
        None
    };
    let ctx = PairContext {
        problem,
        eta: resolved.eta,
        r: resolved.r,
        k_max: resolved.k_max,
        shape,
        solver: &cfg.solver,
        opts: ValueOptions {
            mode: cfg.cone.truncation.into(),
            tol_value: cfg.tolerances.tol_value,
            tol_level: cfg.tolerances.tol_level,
        },
        dedup_eps: cfg.tolerances.dedup_eps(),
    };

    let results: Vec<(CellDiagnostic, Vec<BoundaryPoint>)> =
        units.par_iter().map(|(a, b)| ctx.run(a, b)).collect();

    let mut stats = ScanStats {
        orients: orients.len(),
        skipped_orients,
        pairs: results.len(),
        ..ScanStats::default()
    };
    let mut cells = Vec::with_capacity(results.len());
    let mut raw = Vec::new();
    for (cell, points) in results {
        stats.solves += cell.levels.len();
        stats.evaluations += cell.evaluations;
        if let Some(e) = &cell.error {
            stats.failed_pairs += 1;
            log::warn!("cell a={:?} b={:?} failed: {e}", cell.a, cell.b);
        }
        cells.push(cell);
        raw.extend(points);
    }
    stats.raw_points = raw.len();
    let eps = cfg.tolerances.dedup_eps();
    let points = dedup(raw, eps);
    stats.points = points.len();
    Ok(ScanOutcome {
        cloud: BoundaryCloud {
            problem_name: problem.name().to_string(),
            config_digest: cfg.digest(),
            dedup_eps: eps,
            points,
        },
        cells,
        stats,
    })
}

/// Component bounds according to `choice`.
pub fn select_bounds(
    problem: &Problem,
    choice: BoundsChoice,
    samples: usize,
    margin: f64,
    seed: u64,
) -> Result<ComponentBounds> {
    match (choice, problem.analytic_bounds()) {
        (BoundsChoice::Analytic | BoundsChoice::Auto, Some(b)) => Ok(b.clone()),
        (BoundsChoice::Analytic, None) => Err(Error::Config(format!(
            "problem `{}` has no analytic bounds",
            problem.name()
        ))),
        _ => component_bounds_with_margin(problem, samples, seed, margin),
    }
}

/// Base points per orient, as prescribed by the sweep's base strategy.
struct BasePlan {
    m: usize,
    kind: PlanKind,
}

enum PlanKind {
    Reduced {
        bounds: ComponentBounds,
        pivot: usize,
        counts: Vec<usize>,
        fixed_ranges: Option<Vec<[f64; 2]>>,
    },
    Multi {
        bounds: ComponentBounds,
        pivots: Vec<usize>,
        counts: Vec<usize>,
    },
    Fixed(Vec<Vec<f64>>),
}

impl BasePlan {
    fn new(problem: &Problem, cfg: &ScanConfig) -> Result<Self> {
        let m = problem.dim_image();
        let sw = &cfg.sweep;
        let bounds = |choice| select_bounds(problem, choice, sw.bounds_samples, sw.bounds_margin, cfg.solver.seed);
        let count_check = |counts: &[usize], want: usize| {
            if counts.len() == want {
                Ok(())
            } else {
                Err(Error::Config(format!(
                    "sweep.bases.counts needs {want} entries, got {}",
                    counts.len()
                )))
            }
        };
        let pivot_check = |p: usize| {
            if p >= 1 && p <= m {
                Ok(p - 1)
            } else {
                Err(Error::Config(format!("pivot {p} out of range 1..={m}")))
            }
        };
        let kind = match &sw.bases {
            BaseStrategy::Reduced {
                pivot,
                counts,
                bounds: choice,
                free_ranges,
            } => {
                if m < 2 {
                    return Err(Error::Config("reduced bases need m >= 2".into()));
                }
                count_check(counts, m - 1)?;
                let bounds = bounds(*choice)?;
                let pivot = match pivot {
                    Some(p) => pivot_check(*p)?,
                    None => bounds.narrowest(),
                };
                let fixed_ranges = match free_ranges {
                    Some(rs) => Some(
                        rs.iter()
                            .map(|[lo, hi]| Ok([lo.resolve("free_ranges")?, hi.resolve("free_ranges")?]))
                            .collect::<Result<Vec<_>>>()?,
                    ),
                    None => None,
                };
                PlanKind::Reduced {
                    bounds,
                    pivot,
                    counts: counts.clone(),
                    fixed_ranges,
                }
            }
            BaseStrategy::ReducedMulti {
                pivots,
                counts,
                bounds: choice,
            } => {
                let mut ps = pivots.iter().map(|&p| pivot_check(p)).collect::<Result<Vec<_>>>()?;
                ps.sort_unstable();
                ps.dedup();
                if ps.len() < 2 {
                    return Err(Error::Config("sweep.bases.pivots must be distinct".into()));
                }
                count_check(counts, m - ps.len())?;
                PlanKind::Multi {
                    bounds: bounds(*choice)?,
                    pivots: ps,
                    counts: counts.clone(),
                }
            }
            BaseStrategy::Explicit { points } => {
                if let Some(p) = points.iter().find(|p| p.len() != m) {
                    return Err(Error::Config(format!(
                        "explicit base {p:?} has dimension {}, problem has {m}",
                        p.len()
                    )));
                }
                PlanKind::Fixed(points.clone())
            }
            BaseStrategy::Box {
                counts,
                lower,
                upper,
                pad,
                bounds: choice,
            } => {
                count_check(counts, m)?;
                let (lo, hi) = match (lower, upper) {
                    (Some(l), Some(u)) => (l.clone(), u.clone()),
                    _ => {
                        let padded = bounds(*choice)?.widened(*pad);
                        (padded.lower().to_vec(), padded.upper().to_vec())
                    }
                };
                if lo.len() != m || hi.len() != m || lo.iter().zip(&hi).any(|(l, u)| !(l <= u)) {
                    return Err(Error::Config("sweep.bases box must satisfy lower <= upper in every coordinate".into()));
                }
                let grid = ParamBox {
                    fixed: Vec::new(),
                    ranges: lo.into_iter().zip(hi).map(|(l, u)| [l, u]).enumerate().collect(),
                };
                PlanKind::Fixed(sample_param_grid(&grid, counts)?)
            }
        };
        Ok(Self { m, kind })
    }

    fn bases(&self, b: &[f64]) -> Result<Vec<Vec<f64>>> {
        debug_assert_eq!(b.len(), self.m);
        match &self.kind {
            PlanKind::Reduced {
                bounds,
                pivot,
                counts,
                fixed_ranges,
            } => {
                let mut pb = parameter_range(bounds, b, *pivot)?;
                if let Some(rs) = fixed_ranges {
                    for ((_, range), r) in pb.ranges.iter_mut().zip(rs) {
                        *range = *r;
                    }
                }
                sample_param_grid(&pb, counts)
            }
            PlanKind::Multi { bounds, pivots, counts } => match parameter_range_intersection(bounds, b, pivots)? {
                Ok(pb) => sample_param_grid(&pb, counts),
                Err(why) => {
                    log::debug!("orient {b:?} skipped: {why:?}");
                    Ok(Vec::new())
                }
            },
            PlanKind::Fixed(points) => Ok(points.clone()),
        }
    }
}

/// Rough size of the image set, used to bound the levels worth solving.
#[derive(Debug, Clone, PartialEq)]
struct ImageShape {
    centroid: Vec<f64>,
    /// Bounding-box diagonal of the sampled images, an upper bound on
    /// their diameter.
    diam: f64,
    images: Vec<Vec<f64>>,
    /// Added to sampled support values to absorb sampling error.
    slack: f64,
}

impl ImageShape {
    fn estimate(problem: &Problem, samples: usize, margin: f64, seed: u64) -> Result<Self> {
        let m = problem.dim_image();
        let mut lo = vec![f64::INFINITY; m];
        let mut hi = vec![f64::NEG_INFINITY; m];
        let mut sum = vec![0.0; m];
        let mut images = Vec::new();
        let mut f = vec![0.0; m];
        for x in problem.sample(samples, seed) {
            if !problem.is_feasible(&x) {
                continue;
            }
            problem.evaluate_into(&x, &mut f);
            if !f.iter().all(|v| v.is_finite()) {
                continue;
            }
            for i in 0..m {
                lo[i] = lo[i].min(f[i]);
                hi[i] = hi[i].max(f[i]);
                sum[i] += f[i];
            }
            images.push(f.clone());
        }
        if images.is_empty() {
            return Err(Error::EmptyInput("no feasible finite image sample"));
        }
        let diam = distance(&lo, &hi);
        Ok(Self {
            centroid: sum.iter().map(|s| s / images.len() as f64).collect(),
            diam,
            images,
            slack: margin * diam,
        })
    }

    /// Upper estimate of `sup_f ⟨f − a, b⟩`, which bounds `H`.
    fn shift_bound(&self, a: &[f64], b: &[f64]) -> f64 {
        let support = self.images.iter().map(|f| dot(f, b)).fold(f64::NEG_INFINITY, f64::max);
        support - dot(a, b) + self.slack
    }

    /// `⌈3 (diam + ‖a − centroid‖) / r⌉`: beyond this level `kε` exceeds
    /// every attainable shift.
    fn k_max(&self, a: &[f64], r: f64) -> u32 {
        let k = (3.0 * (self.diam + distance(a, &self.centroid)) / r).ceil();
        k.clamp(1.0, u32::MAX as f64 - 1.0) as u32
    }
}

struct PairContext<'a> {
    problem: &'a Problem,
    eta: f64,
    r: f64,
    k_max: Option<u32>,
    shape: Option<ImageShape>,
    solver: &'a SolverConfig,
    opts: ValueOptions,
    dedup_eps: f64,
}

impl PairContext<'_> {
    /// All levels of one `(a, b)` pair. Each `V^(k)` is solved once and
    /// compared with its successor.
    fn run(&self, a: &[f64], b: &[f64]) -> (CellDiagnostic, Vec<BoundaryPoint>) {
        let (k_max, shift_bound) = match (&self.shape, self.k_max) {
            _ if self.r.is_infinite() => (1, f64::INFINITY),
            (Some(s), Some(k)) => (k, s.shift_bound(a, b)),
            (Some(s), None) => (s.k_max(a, self.r), s.shift_bound(a, b)),
            (None, _) => unreachable!("image shape is estimated whenever r is finite"),
        };
        let mut cell = CellDiagnostic {
            a: a.to_vec(),
            b: b.to_vec(),
            k_max,
            levels: Vec::new(),
            evaluations: 0,
            error: None,
        };
        let mut points = Vec::new();
        if let Err(e) = self.levels(a, b, k_max, shift_bound, &mut cell, &mut points) {
            cell.error = Some(e.to_string());
        }
        (cell, points)
    }

    fn levels(
        &self,
        a: &[f64],
        b: &[f64],
        k_max: u32,
        shift_bound: f64,
        cell: &mut CellDiagnostic,
        points: &mut Vec<BoundaryPoint>,
    ) -> Result<()> {
        let base = ScalarizationParams::new(a.to_vec(), b.to_vec(), self.eta, self.r, 1)?;
        let solve = |k: u32, cell: &mut CellDiagnostic| {
            let rep = value_with(self.problem, &base.with_level(k)?, self.solver, &self.opts)?;
            cell.evaluations += rep.evaluations;
            Ok::<_, Error>(rep)
        };
        let emit = |k: u32, rep: &crate::scalarization::ScalarValueReport, points: &mut Vec<BoundaryPoint>| {
            let kept = best_of_clusters(&rep.argmax_set, self.dedup_eps);
            points.extend(kept.iter().map(|w| BoundaryPoint {
                f: w.f.clone(),
                x: w.x.clone(),
                a: a.to_vec(),
                b: b.to_vec(),
                k,
                value: rep.value,
            }));
            kept.len()
        };

        if self.r.is_infinite() {
            let rep = solve(1, cell)?;
            let stable = rep.value > f64::NEG_INFINITY;
            let witnesses = if stable { emit(1, &rep, points) } else { 0 };
            cell.levels.push(LevelDiagnostic {
                k: 1,
                value: rep.value,
                clipped: rep.clipped,
                h_raw: rep.h_raw,
                stable,
                witnesses,
            });
            return Ok(());
        }

        let mut current = solve(1, cell)?;
        for k in 1..=k_max {
            let next = solve(k + 1, cell)?;
            let cap = base.eps() * k as f64;
            let stable = levels_agree(current.value, next.value, self.opts.tol_level(cap));
            let witnesses = if stable { emit(k, &current, points) } else { 0 };
            cell.levels.push(LevelDiagnostic {
                k,
                value: current.value,
                clipped: current.clipped,
                h_raw: current.h_raw,
                stable,
                witnesses,
            });
            // Closed-form values only change through the clip, and once kε
            // exceeds every attainable shift neither the clip nor the
            // reachable set depends on k: later levels repeat this one,
            // including an empty one.
            let settled = match self.opts.mode {
                ValueMode::ClosedForm => !current.clipped,
                ValueMode::Truncated => cap >= shift_bound,
            };
            let empty = current.value == f64::NEG_INFINITY && next.value == f64::NEG_INFINITY;
            if (stable || empty) && settled {
                break;
            }
            current = next;
        }
        Ok(())
    }
}

/// Witnesses with `H ≥ 0`, keeping only the best (highest `φ`, then
/// lowest control) of every group closer than `eps` in the image.
fn best_of_clusters(witnesses: &[Witness], eps: f64) -> Vec<&Witness> {
    let mut order: Vec<&Witness> = witnesses.iter().filter(|w| w.h >= 0.0).collect();
    // argmax sets come sorted by control, so a stable sort keeps ties in
    // that order
    order.sort_by(|u, w| w.phi.total_cmp(&u.phi));
    let mut kept: Vec<&Witness> = Vec::new();
    for w in order {
        if kept.iter().all(|k| {
            let d = distance(&k.f, &w.f);
            d > eps && d > 0.0
        }) {
            kept.push(w);
        }
    }
    kept
}
