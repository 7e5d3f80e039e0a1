//! Spherical-cone scalarization: the shift value `H`, the leveled
//! scalarization functions `φ^(k)`, value functions `V^(k)` and the
//! level-stability test that certifies boundary points.

mod functional;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{check_dim, check_finite, check_unit};
use crate::problems::Problem;
use crate::solver::{maximize, two_stage_value, SolverConfig, SolverMethod};

pub use functional::{
    cb_h_value, cb_h_value_report, cb_residual, cb_scaling_factor, l2_h_value, total_variation,
    CbRootReport, GridFunction,
};

/// `θ(η) = (1 − η) / √(η(2 − η))`, the slope of the cone boundary relative
/// to its axis.
pub fn theta(eta: f64) -> Result<f64> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(invalid("eta", format!("{eta} not in (0, 1]")));
    }
    Ok((1.0 - eta) / (eta * (2.0 - eta)).sqrt())
}

/// Parameters `(a, b, η, r, k)` of one scalarization problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarizationParams {
    base: Vec<f64>,
    orient: Vec<f64>,
    sharpness: f64,
    radius: f64,
    level: u32,
}

impl ScalarizationParams {
    /// `radius = f64::INFINITY` selects the untruncated cone.
    pub fn new(base: Vec<f64>, orient: Vec<f64>, sharpness: f64, radius: f64, level: u32) -> Result<Self> {
        check_dim(base.len(), orient.len())?;
        check_finite("base", &base)?;
        check_finite("orient", &orient)?;
        check_unit(&orient)?;
        theta(sharpness)?;
        if !(radius > 0.0) {
            return Err(invalid("radius", format!("{radius} must be positive")));
        }
        if level == 0 {
            return Err(invalid("level", "k must be at least 1"));
        }
        Ok(Self {
            base,
            orient,
            sharpness,
            radius,
            level,
        })
    }

    pub fn base(&self) -> &[f64] {
        &self.base
    }

    pub fn orient(&self) -> &[f64] {
        &self.orient
    }

    pub fn sharpness(&self) -> f64 {
        self.sharpness
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    /// `ε = r/3`, infinite for the untruncated cone.
    pub fn eps(&self) -> f64 {
        self.radius / 3.0
    }

    /// `kε`, the level cap.
    pub fn cap(&self) -> f64 {
        if self.radius.is_infinite() {
            f64::INFINITY
        } else {
            self.level as f64 * self.eps()
        }
    }

    pub fn with_level(&self, level: u32) -> Result<Self> {
        if level == 0 {
            return Err(invalid("level", "k must be at least 1"));
        }
        Ok(Self {
            level,
            ..self.clone()
        })
    }

    pub fn dim(&self) -> usize {
        self.base.len()
    }
}

/// `(⟨u,b⟩, √(‖u‖² − ⟨u,b⟩²))` for `u = f − a`, radicand clipped at zero.
#[inline]
fn split(f: &[f64], a: &[f64], b: &[f64]) -> (f64, f64) {
    let (mut p, mut uu) = (0.0, 0.0);
    for ((fi, ai), bi) in f.iter().zip(a).zip(b) {
        let u = fi - ai;
        p += u * bi;
        uu += u * u;
    }
    (p, (uu - p * p).max(0.0).sqrt())
}

#[inline]
pub(crate) fn h_core(f: &[f64], a: &[f64], b: &[f64], th: f64) -> f64 {
    let (p, q) = split(f, a, b);
    p - th * q
}

/// Largest shift `y` with `f − a − y b` in the closed circular cone:
/// `⟨f−a, b⟩ − θ(η) √(‖f−a‖² − ⟨f−a,b⟩²)`.
pub fn h_value(f: &[f64], p: &ScalarizationParams) -> Result<f64> {
    check_dim(p.dim(), f.len())?;
    Ok(h_core(f, &p.base, &p.orient, theta(p.sharpness)?))
}

/// The closed form `min{H⁺, kε}` of the leveled scalarization function.
pub fn phi(f: &[f64], p: &ScalarizationParams) -> Result<f64> {
    Ok(h_value(f, p)?.max(0.0).min(p.cap()))
}

/// Scalarization function with the ε-ball truncation kept: the largest
/// `y ∈ [0, kε]` such that `f − a − y b` lies in the cone and within
/// distance `ε` of the origin, or `None` when no such `y` exists.
///
/// Whenever it exists it equals `min{H, kε}`; unlike [`phi`], points far
/// from the ray `a + R₊b` have no value at all.
pub fn phi_truncated(f: &[f64], p: &ScalarizationParams) -> Result<Option<f64>> {
    check_dim(p.dim(), f.len())?;
    let th = theta(p.sharpness)?;
    let t = truncated_core(f, &p.base, &p.orient, th, p.eps(), p.cap());
    Ok((t >= 0.0).then_some(t))
}

/// Truncated value when reachable (always `≥ 0`), otherwise minus the
/// distance-like violation of reachability (strictly negative).
#[inline]
pub(crate) fn truncated_core(f: &[f64], a: &[f64], b: &[f64], th: f64, eps: f64, cap: f64) -> f64 {
    let (p, q) = split(f, a, b);
    let h = p - th * q;
    let top = h.min(cap).max(0.0);
    let y = p.clamp(0.0, top);
    let dist = ((p - y) * (p - y) + q * q).sqrt();
    let miss = (-h).max(0.0) + (dist - eps).max(0.0);
    if miss > 0.0 {
        -miss
    } else {
        h.min(cap)
    }
}

/// How `V^(k)` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ValueMode {
    /// `V = min{(sup H)⁺, kε}`.
    #[default]
    ClosedForm,
    /// `V = sup φ` with the ε-ball truncation enforced ([`phi_truncated`]);
    /// `−∞` when no image point is reachable.
    Truncated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct ValueOptions {
    pub mode: ValueMode,
    /// Defaults to `1e-6 (1 + |V|)`.
    pub tol_value: Option<f64>,
    /// Defaults to `1e-7 (1 + kε)`.
    pub tol_level: Option<f64>,
}

impl ValueOptions {
    pub fn tol_value(&self, v: f64) -> f64 {
        self.tol_value.unwrap_or(1e-6 * (1.0 + v.abs()))
    }

    pub fn tol_level(&self, cap: f64) -> f64 {
        self.tol_level.unwrap_or(1e-7 * (1.0 + cap))
    }
}

/// A control and its image attaining (up to tolerance) the value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub x: Vec<f64>,
    pub f: Vec<f64>,
    /// Unclipped `H` at `f`.
    pub h: f64,
    /// Scalarization function value at `f` under the active mode.
    pub phi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarValueReport {
    pub value: f64,
    /// Discovered controls whose scalarization value is within `tol_value`
    /// of `value`, sorted lexicographically by control.
    pub argmax_set: Vec<Witness>,
    pub clipped: bool,
    /// Supremum of `H` found before clipping.
    pub h_raw: f64,
    pub evaluations: usize,
}

/// `V^(k)` with the closed-form scalarization and default tolerances.
pub fn value(problem: &Problem, p: &ScalarizationParams, solver: &SolverConfig) -> Result<ScalarValueReport> {
    value_with(problem, p, solver, &ValueOptions::default())
}

pub fn value_with(
    problem: &Problem,
    p: &ScalarizationParams,
    solver: &SolverConfig,
    opts: &ValueOptions,
) -> Result<ScalarValueReport> {
    check_dim(problem.dim_image(), p.dim())?;
    let th = theta(p.sharpness)?;
    let (a, b) = (p.base(), p.orient());
    let (eps, cap) = (p.eps(), p.cap());
    let m = problem.dim_image();
    let image = |x: &[f64]| {
        let mut f = vec![0.0; m];
        problem.evaluate_into(x, &mut f);
        f
    };

    let (candidates, evaluations): (Vec<Vec<f64>>, usize) = match (opts.mode, solver.method) {
        (ValueMode::ClosedForm, SolverMethod::TwoStage) => {
            let r = two_stage_value(problem, a, b, p.sharpness, solver)?;
            (vec![r.x], r.evaluations)
        }
        (ValueMode::Truncated, SolverMethod::TwoStage) => {
            return Err(invalid(
                "method",
                "the two-stage solver only applies to the closed-form value",
            ))
        }
        (ValueMode::ClosedForm, SolverMethod::DirectMultistart) => {
            let r = maximize(|x: &[f64]| h_core(&image(x), a, b, th), problem, solver)?;
            (r.all_local_optima.into_iter().map(|o| o.0).collect(), r.evaluations)
        }
        (ValueMode::Truncated, SolverMethod::DirectMultistart) => {
            let r = maximize(|x: &[f64]| truncated_core(&image(x), a, b, th, eps, cap), problem, solver)?;
            (r.all_local_optima.into_iter().map(|o| o.0).collect(), r.evaluations)
        }
    };

    let mut scored: Vec<Witness> = candidates
        .into_iter()
        .filter(|x| !x.is_empty())
        .map(|x| {
            let f = image(&x);
            let h = h_core(&f, a, b, th);
            let phi = match opts.mode {
                ValueMode::ClosedForm => h.max(0.0).min(cap),
                ValueMode::Truncated => {
                    let t = truncated_core(&f, a, b, th, eps, cap);
                    if t >= 0.0 {
                        t
                    } else {
                        f64::NEG_INFINITY
                    }
                }
            };
            Witness { x, f, h, phi }
        })
        .collect();
    if scored.is_empty() {
        return Err(Error::NoFeasibleEvaluation {
            budget: solver.budget,
        });
    }
    let h_raw = scored.iter().map(|w| w.h).fold(f64::NEG_INFINITY, f64::max);
    let v = scored.iter().map(|w| w.phi).fold(f64::NEG_INFINITY, f64::max);
    let (value, clipped) = match opts.mode {
        ValueMode::ClosedForm => (h_raw.max(0.0).min(cap), h_raw.max(0.0) > cap),
        ValueMode::Truncated => {
            let reach_h = scored
                .iter()
                .filter(|w| w.phi > f64::NEG_INFINITY)
                .map(|w| w.h)
                .fold(f64::NEG_INFINITY, f64::max);
            (v, reach_h > cap)
        }
    };
    if value > f64::NEG_INFINITY {
        let tol = opts.tol_value(value);
        scored.retain(|w| w.phi >= value - tol);
    } else {
        scored.clear();
    }
    scored.sort_by(|u, w| {
        u.x.iter()
            .zip(&w.x)
            .map(|(s, t)| s.total_cmp(t))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    scored.dedup_by(|u, w| u.x == w.x);
    Ok(ScalarValueReport {
        value,
        argmax_set: scored,
        clipped,
        h_raw,
        evaluations,
    })
}

/// Level-stability test `V^(k+1) = V^(k)` with default options.
///
/// For the untruncated cone there is no level and the single report is
/// returned with `true`.
pub fn is_boundary_witness(
    problem: &Problem,
    p: &ScalarizationParams,
    solver: &SolverConfig,
) -> Result<(bool, ScalarValueReport, Option<ScalarValueReport>)> {
    is_boundary_witness_with(problem, p, solver, &ValueOptions::default())
}

pub fn is_boundary_witness_with(
    problem: &Problem,
    p: &ScalarizationParams,
    solver: &SolverConfig,
    opts: &ValueOptions,
) -> Result<(bool, ScalarValueReport, Option<ScalarValueReport>)> {
    let rk = value_with(problem, p, solver, opts)?;
    if p.radius().is_infinite() {
        let ok = rk.value > f64::NEG_INFINITY;
        return Ok((ok, rk, None));
    }
    let next = value_with(problem, &p.with_level(p.level() + 1)?, solver, opts)?;
    let ok = levels_agree(rk.value, next.value, opts.tol_level(p.cap()));
    Ok((ok, rk, Some(next)))
}

/// `|V^(k+1) − V^(k)| ≤ tol` with both values defined.
pub fn levels_agree(vk: f64, vk1: f64, tol: f64) -> bool {
    vk.is_finite() && vk1.is_finite() && (vk1 - vk).abs() <= tol
}
