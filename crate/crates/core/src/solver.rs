//! Derivative-free global maximization over the admissibility set.
//!
//! [`maximize`] runs Nelder–Mead from a deterministic low-discrepancy set of
//! starts; infeasible trial points score `−∞` rather than being projected,
//! which keeps nonconvex control sets intact. [`two_stage_maximize`] solves
//! the same scalarized problem through an inner, linearly constrained
//! maximization and an outer search over the constraint levels.

use std::sync::Mutex;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{check_dim, check_unit, dot, norm, orthonormal_complement};
use crate::problems::Problem;
use crate::scalarization::theta;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SolverMethod {
    #[default]
    DirectMultistart,
    TwoStage,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub n_starts: usize,
    /// Total objective evaluations, split evenly across starts.
    pub budget: usize,
    /// Simplex diameter (relative to the control set's extent) at which a
    /// local search stops.
    pub local_tol: f64,
    pub seed: u64,
    pub method: SolverMethod,
    /// Residual allowed on the inner constraints of the two-stage method.
    pub tol_constraint: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            n_starts: 16,
            budget: 16 * 400,
            local_tol: 1e-9,
            seed: 0,
            method: SolverMethod::DirectMultistart,
            tol_constraint: 1e-7,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_starts == 0 {
            return Err(invalid("n_starts", "must be at least 1"));
        }
        if self.budget < self.n_starts {
            return Err(invalid("budget", "must be at least n_starts"));
        }
        if !(self.local_tol > 0.0 && self.local_tol.is_finite()) {
            return Err(invalid("local_tol", "must be positive"));
        }
        if !(self.tol_constraint > 0.0 && self.tol_constraint.is_finite()) {
            return Err(invalid("tol_constraint", "must be positive"));
        }
        Ok(())
    }

    fn per_start(&self) -> usize {
        (self.budget / self.n_starts).max(1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaximizeResult {
    pub best_x: Vec<f64>,
    pub best_value: f64,
    pub evaluations: usize,
    /// Final point and value of each start that found a feasible point, in
    /// start order.
    pub all_local_optima: Vec<(Vec<f64>, f64)>,
}

const PRIMES: [u32; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let (mut f, mut out) = (inv, 0.0);
    while i > 0 {
        out += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    out
}

/// Point `i` (0-based) of a Cranley–Patterson shifted Halton sequence.
/// Dimensions beyond the tabulated primes fall back to seeded uniforms.
pub fn halton_point(i: usize, dim: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_ca11);
    let shift: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>()).collect();
    let mut extra = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64).wrapping_mul(0x9e37_79b9));
    (0..dim)
        .map(|k| {
            let base = if k < PRIMES.len() {
                radical_inverse(i as u64 + 1, PRIMES[k] as u64)
            } else {
                extra.gen::<f64>()
            };
            (base + shift[k]).fract()
        })
        .collect()
}

fn score(v: f64) -> f64 {
    if v.is_nan() {
        f64::NEG_INFINITY
    } else {
        v
    }
}

/// Budgeted evaluation of a scalar objective with feasibility rejection.
struct Counted<'a, F> {
    f: &'a F,
    problem: &'a Problem,
    used: usize,
    cap: usize,
    /// Interior point of the control set.
    anchor: Vec<f64>,
}

impl<F: Fn(&[f64]) -> f64> Counted<'_, F> {
    fn eval(&mut self, x: &[f64]) -> Option<f64> {
        if self.used >= self.cap {
            return None;
        }
        self.used += 1;
        Some(if self.problem.is_feasible(x) {
            score((self.f)(x))
        } else {
            f64::NEG_INFINITY
        })
    }

    /// Largest `t ∈ (0, t_max]` with `base + t·dir` feasible, found by
    /// bisection on the feasibility test alone; `None` if `base` itself is
    /// infeasible. Lets the simplex slide along walls of the control set
    /// instead of collapsing against them.
    fn reach(&self, base: &[f64], dir: &[f64], t_max: f64) -> Option<f64> {
        let at = |t: f64| -> Vec<f64> { base.iter().zip(dir).map(|(b, d)| b + t * d).collect() };
        if self.problem.is_feasible(&at(t_max)) {
            return Some(t_max);
        }
        if !self.problem.is_feasible(base) {
            return None;
        }
        let (mut lo, mut hi) = (0.0, t_max);
        for _ in 0..40 {
            let mid = 0.5 * (lo + hi);
            if self.problem.is_feasible(&at(mid)) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        (lo > 0.0).then_some(lo)
    }
}

/// Nelder–Mead maximization from `x0`; returns the best vertex and value.
fn nelder_mead<F: Fn(&[f64]) -> f64>(
    eval: &mut Counted<'_, F>,
    x0: Vec<f64>,
    f0: f64,
    steps: &[f64],
    tol: f64,
    scale: &[f64],
) -> (Vec<f64>, f64) {
    let d = x0.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(d + 1);
    simplex.push((x0.clone(), f0));
    for k in 0..d {
        // prefer a feasible vertex: try +step, -step, then shorter steps
        let mut best: Option<(Vec<f64>, f64)> = None;
        'search: for shrink in [1.0, 0.25, 0.0625] {
            for sign in [1.0, -1.0] {
                let mut x = x0.clone();
                x[k] += sign * shrink * steps[k];
                let Some(v) = eval.eval(&x) else { break 'search };
                let keep = best.as_ref().map_or(true, |b| v > b.1);
                if keep {
                    best = Some((x, v));
                }
                if v > f64::NEG_INFINITY {
                    break 'search;
                }
            }
        }
        // at a corner of the control set both coordinate steps can leave it;
        // pull the step back toward the anchor until it is feasible again
        if best.as_ref().is_some_and(|b| b.1 == f64::NEG_INFINITY) {
            for sign in [1.0, -1.0] {
                let mut x = x0.clone();
                x[k] += sign * steps[k];
                let dir: Vec<f64> = x.iter().zip(&eval.anchor).map(|(x, a)| x - a).collect();
                let Some(t) = eval.reach(&eval.anchor, &dir, 1.0) else { break };
                let x: Vec<f64> = eval.anchor.iter().zip(&dir).map(|(a, d)| a + t * d).collect();
                let Some(v) = eval.eval(&x) else { break };
                if v > f64::NEG_INFINITY {
                    best = Some((x, v));
                    break;
                }
            }
        }
        match best {
            Some(v) => simplex.push(v),
            None => return (x0, f0),
        }
    }
    let by_value = |a: &(Vec<f64>, f64), b: &(Vec<f64>, f64)| b.1.total_cmp(&a.1);
    loop {
        simplex.sort_by(by_value);
        let diam = simplex[1..]
            .iter()
            .map(|(x, _)| {
                x.iter()
                    .zip(&simplex[0].0)
                    .zip(scale)
                    .map(|((a, b), s)| ((a - b) / s).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if diam <= tol {
            break;
        }
        let worst = simplex[d].clone();
        let mut centroid = vec![0.0; d];
        for (x, _) in &simplex[..d] {
            centroid.iter_mut().zip(x).for_each(|(c, v)| *c += v / d as f64);
        }
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&worst.0)
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };
        let dir: Vec<f64> = centroid.iter().zip(&worst.0).map(|(c, w)| c - w).collect();
        let tr = eval.reach(&centroid, &dir, 1.0).unwrap_or(1.0);
        let xr = along(tr);
        let Some(fr) = eval.eval(&xr) else { break };
        if fr > simplex[0].1 {
            let xe = along(eval.reach(&centroid, &dir, 2.0 * tr).unwrap_or(2.0 * tr));
            let Some(fe) = eval.eval(&xe) else {
                simplex[d] = (xr, fr);
                break;
            };
            simplex[d] = if fe > fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr > simplex[d - 1].1 {
            simplex[d] = (xr, fr);
            continue;
        }
        // outside contraction when the reflection beat the worst vertex
        let (t, threshold) = if fr > worst.1 { (0.5 * tr, fr) } else { (-0.5, worst.1) };
        let xc = along(t);
        let Some(fc) = eval.eval(&xc) else { break };
        if fc > threshold || (t > 0.0 && fc == threshold && fc > f64::NEG_INFINITY) {
            simplex[d] = (xc, fc);
            continue;
        }
        // shrink toward the best vertex
        let best = simplex[0].0.clone();
        for v in simplex.iter_mut().skip(1) {
            let x: Vec<f64> = best.iter().zip(&v.0).map(|(b, x)| b + 0.5 * (x - b)).collect();
            match eval.eval(&x) {
                Some(fx) => *v = (x, fx),
                None => break,
            }
        }
    }
    simplex.sort_by(by_value);
    simplex.swap_remove(0)
}

/// One restarted local search from `x0`.
fn local_search<F: Fn(&[f64]) -> f64>(
    f: &F,
    problem: &Problem,
    x0: Vec<f64>,
    cap: usize,
    tol: f64,
) -> (Vec<f64>, f64, usize) {
    let scale = problem.control_set().extent();
    let mut eval = Counted {
        f,
        problem,
        used: 0,
        cap,
        anchor: problem.from_unit(&vec![0.5; problem.dim_control()]),
    };
    let Some(f0) = eval.eval(&x0) else {
        return (x0, f64::NEG_INFINITY, 0);
    };
    let mut best = (x0, f0);
    let mut step_frac = 0.1;
    // restarts with a fresh simplex guard against premature collapse
    for _ in 0..4 {
        let steps: Vec<f64> = scale.iter().map(|s| s * step_frac).collect();
        let before = best.1;
        let (x, v) = nelder_mead(&mut eval, best.0.clone(), best.1, &steps, tol, &scale);
        if v > best.1 {
            best = (x, v);
        }
        if eval.used >= cap || best.1 == f64::NEG_INFINITY {
            break;
        }
        if before > f64::NEG_INFINITY && best.1 - before <= tol * (1.0 + best.1.abs()) {
            break;
        }
        step_frac *= 0.1;
    }
    let used = eval.used;
    (best.0, best.1, used)
}

/// Maximizes `objective` over the problem's control set.
///
/// Starts are the first `n_starts` points of a shifted Halton sequence mapped
/// onto the control set, so a run with more starts extends one with fewer.
/// Ties between starts resolve to the lowest start index.
pub fn maximize<F>(objective: F, problem: &Problem, cfg: &SolverConfig) -> Result<MaximizeResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    cfg.validate()?;
    let d = problem.dim_control();
    let cap = cfg.per_start();
    let runs: Vec<(Vec<f64>, f64, usize)> = (0..cfg.n_starts)
        .into_par_iter()
        .map(|i| {
            let u = halton_point(i, d, cfg.seed);
            let x0 = problem.from_unit(&u);
            local_search(&objective, problem, x0, cap, cfg.local_tol)
        })
        .collect();
    collect_runs(runs, cfg.budget)
}

fn collect_runs(runs: Vec<(Vec<f64>, f64, usize)>, budget: usize) -> Result<MaximizeResult> {
    let evaluations = runs.iter().map(|r| r.2).sum();
    let all_local_optima: Vec<(Vec<f64>, f64)> = runs
        .into_iter()
        .filter(|r| r.1 > f64::NEG_INFINITY)
        .map(|r| (r.0, r.1))
        .collect();
    let mut best: Option<&(Vec<f64>, f64)> = None;
    for r in &all_local_optima {
        if best.map_or(true, |b| r.1 > b.1) {
            best = Some(r);
        }
    }
    let (best_x, best_value) = best.cloned().ok_or(Error::NoFeasibleEvaluation { budget })?;
    Ok(MaximizeResult {
        best_x,
        best_value,
        evaluations,
        all_local_optima,
    })
}

/// Outcome of the two-stage solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoStageResult {
    /// `F_{a,b} = sup_l [G(l) − ⟨a,b⟩ − θ‖l‖]`.
    pub value: f64,
    /// Maximizing constraint levels.
    pub levels: Vec<f64>,
    /// Control attaining `G` at the maximizing levels.
    pub x: Vec<f64>,
    pub evaluations: usize,
}

struct Inner<'a> {
    problem: &'a Problem,
    a: &'a [f64],
    b: &'a [f64],
    basis: &'a [Vec<f64>],
    cfg: &'a SolverConfig,
    starts: Vec<Vec<f64>>,
    theta: f64,
    /// Best `(value, levels, x)` over every inner iterate; ties resolve
    /// lexicographically so the result is independent of thread order.
    certified: Mutex<Option<(f64, Vec<f64>, Vec<f64>)>>,
}

fn cmp_lex(p: &[f64], q: &[f64]) -> std::cmp::Ordering {
    p.iter()
        .zip(q)
        .map(|(a, b)| a.total_cmp(b))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
}

impl Inner<'_> {
    fn residuals(&self, f: &[f64], l: &[f64], out: &mut [f64]) {
        for (j, q) in self.basis.iter().enumerate() {
            let proj: f64 = f.iter().zip(self.a).zip(q).map(|((fi, ai), qi)| (fi - ai) * qi).sum();
            out[j] = proj - l[j];
        }
    }

    /// Records `x` as a candidate at its own levels `l(x)`, where
    /// `G(l(x)) ≥ ⟨f(x), b⟩` holds whether or not `x` met the target levels.
    fn certify(&self, x: &[f64], fx: &[f64]) {
        let mut lx = vec![0.0; self.basis.len()];
        let zero = vec![0.0; self.basis.len()];
        self.residuals(fx, &zero, &mut lx);
        let v = dot(fx, self.b) - dot(self.a, self.b) - self.theta * norm(&lx);
        let mut best = self.certified.lock().unwrap_or_else(|e| e.into_inner());
        let better = match &*best {
            None => true,
            Some((bv, bl, bx)) => v
                .total_cmp(bv)
                .then_with(|| cmp_lex(bl, &lx))
                .then_with(|| cmp_lex(bx, x))
                .is_gt(),
        };
        if better {
            *best = Some((v, lx, x.to_vec()));
        }
    }

    /// `G(l)` by an augmented-Lagrangian continuation; `None` when the
    /// constraints cannot be met (the `−∞` convention).
    fn g(&self, l: &[f64]) -> (Option<(f64, Vec<f64>)>, usize) {
        let m = self.b.len();
        let nc = self.basis.len();
        let cap = self.cfg.per_start();
        let mut used = 0;
        let mut best: Option<(f64, Vec<f64>)> = None;
        for x0 in &self.starts {
            let mut x = x0.clone();
            let mut lambda = vec![0.0; nc];
            let mut mu = 10.0;
            let mut fx = vec![0.0; m];
            let mut c = vec![0.0; nc];
            for _ in 0..12 {
                let lam = lambda.clone();
                let obj = |z: &[f64]| {
                    let mut fz = vec![0.0; m];
                    self.problem.evaluate_into(z, &mut fz);
                    let mut cz = vec![0.0; nc];
                    self.residuals(&fz, l, &mut cz);
                    dot(&fz, self.b) - dot(&lam, &cz) - 0.5 * mu * dot(&cz, &cz)
                };
                let (xn, _, u) = local_search(&obj, self.problem, x.clone(), cap, self.cfg.local_tol);
                used += u;
                x = xn;
                self.problem.evaluate_into(&x, &mut fx);
                self.residuals(&fx, l, &mut c);
                let res = norm(&c);
                if res <= self.cfg.tol_constraint {
                    break;
                }
                lambda.iter_mut().zip(&c).for_each(|(lj, cj)| *lj += mu * cj);
                mu *= 10.0;
            }
            self.certify(&x, &fx);
            if norm(&c) <= self.cfg.tol_constraint {
                let v = dot(&fx, self.b);
                if best.as_ref().map_or(true, |(bv, _)| v > *bv) {
                    best = Some((v, x));
                }
            }
        }
        (best, used)
    }
}

/// Solves `sup_x H(f(x))` in two stages: for constraint levels `l` the inner
/// stage computes `G(l) = sup ⟨f(x), b⟩` subject to `⟨f(x) − a, q_j⟩ = l_j`
/// for the complement basis `q_j`, and the outer stage maximizes
/// `G(l) − ⟨a,b⟩ − θ(η)‖l‖`.
///
/// For two criteria the outer search is a grid over the observed level range
/// (plus `l = 0`) refined by golden-section search around the best grid
/// points; higher dimensions refine with Nelder–Mead in `l`.
pub fn two_stage_maximize(
    problem: &Problem,
    a: &[f64],
    b: &[f64],
    eta: f64,
    basis: &[Vec<f64>],
    cfg: &SolverConfig,
) -> Result<TwoStageResult> {
    cfg.validate()?;
    let m = problem.dim_image();
    check_dim(m, a.len())?;
    check_dim(m, b.len())?;
    check_unit(b)?;
    let th = theta(eta)?;
    if basis.len() + 1 != m {
        return Err(invalid("basis", format!("need {} complement vectors", m - 1)));
    }
    for (i, q) in basis.iter().enumerate() {
        check_dim(m, q.len())?;
        let ok = (norm(q) - 1.0).abs() <= 1e-9
            && dot(q, b).abs() <= 1e-9
            && basis[..i].iter().all(|p| dot(p, q).abs() <= 1e-9);
        if !ok {
            return Err(invalid("basis", "must be orthonormal and orthogonal to b"));
        }
    }
    let nc = m - 1;
    let d = problem.dim_control();

    // observed range of each level from a deterministic image sample
    let mut lo = vec![f64::INFINITY; nc];
    let mut hi = vec![f64::NEG_INFINITY; nc];
    let mut f = vec![0.0; m];
    let sample_n = 4096;
    for i in 0..sample_n {
        let x = problem.from_unit(&halton_point(i, d, cfg.seed ^ 0xa11));
        problem.evaluate_into(&x, &mut f);
        for (j, q) in basis.iter().enumerate() {
            let v: f64 = f.iter().zip(a).zip(q).map(|((fi, ai), qi)| (fi - ai) * qi).sum();
            lo[j] = lo[j].min(v);
            hi[j] = hi[j].max(v);
        }
    }
    for j in 0..nc {
        let pad = 0.02 * (hi[j] - lo[j]) + 1e-9;
        lo[j] -= pad;
        hi[j] += pad;
    }
    let inner = Inner {
        problem,
        a,
        b,
        basis,
        cfg,
        starts: (0..cfg.n_starts)
            .map(|i| problem.from_unit(&halton_point(i, d, cfg.seed)))
            .collect(),
        theta: th,
        certified: Mutex::new(None),
    };
    let ab = dot(a, b);
    let outer = |l: &[f64]| -> (f64, Option<Vec<f64>>, usize) {
        let (g, used) = inner.g(l);
        match g {
            Some((gv, x)) => (gv - ab - th * norm(l), Some(x), used),
            None => (f64::NEG_INFINITY, None, used),
        }
    };

    // G has kinks at the levels of corner images, where a narrow peak of the
    // outer objective can fall between grid points; seed those levels and
    // certify the corners themselves
    let mut candidates: Vec<Vec<f64>> = vec![vec![0.0; nc]];
    for x in problem.control_set().corners() {
        problem.evaluate_into(&x, &mut f);
        inner.certify(&x, &f);
        let mut l = vec![0.0; nc];
        inner.residuals(&f, &vec![0.0; nc], &mut l);
        candidates.push(l);
    }
    let per_axis: usize = if nc == 1 { 41 } else { 9 };
    let total = per_axis.pow(nc as u32);
    for idx in 0..total {
        let mut rem = idx;
        let l: Vec<f64> = (0..nc)
            .map(|j| {
                let k = rem % per_axis;
                rem /= per_axis;
                lo[j] + (hi[j] - lo[j]) * k as f64 / (per_axis - 1) as f64
            })
            .collect();
        candidates.push(l);
    }
    let scored: Vec<(Vec<f64>, f64, Option<Vec<f64>>, usize)> = candidates
        .into_par_iter()
        .map(|l| {
            let (v, x, u) = outer(&l);
            (l, v, x, u)
        })
        .collect();
    let mut evaluations: usize = scored.iter().map(|s| s.3).sum();
    let mut order: Vec<usize> = (0..scored.len()).collect();
    order.sort_by(|&i, &j| scored[j].1.total_cmp(&scored[i].1).then(i.cmp(&j)));
    if scored[order[0]].1 == f64::NEG_INFINITY {
        return Err(Error::NoFeasibleEvaluation { budget: cfg.budget });
    }
    let mut best = (scored[order[0]].0.clone(), scored[order[0]].1, scored[order[0]].2.clone());

    let spacing: Vec<f64> = (0..nc).map(|j| (hi[j] - lo[j]) / (per_axis - 1) as f64).collect();
    let refine_from: Vec<Vec<f64>> = order
        .iter()
        .take(3)
        .filter(|&&i| scored[i].1 > f64::NEG_INFINITY)
        .map(|&i| scored[i].0.clone())
        .collect();
    let refined: Vec<(Vec<f64>, f64, Option<Vec<f64>>, usize)> = refine_from
        .into_par_iter()
        .map(|l0| {
            if nc == 1 {
                golden_refine(&outer, l0[0], spacing[0], cfg.local_tol)
            } else {
                nm_refine(&outer, l0, &spacing, cfg.local_tol)
            }
        })
        .collect();
    for (l, v, x, u) in refined {
        evaluations += u;
        if v > best.1 {
            best = (l, v, x);
        }
    }
    // the outer value can drop off a cliff where the levels leave the
    // image; an iterate certified at its own levels may then beat it
    if let Some((v, l, x)) = inner.certified.into_inner().unwrap_or_else(|e| e.into_inner()) {
        if v > best.1 {
            best = (l, v, Some(x));
        }
    }
    Ok(TwoStageResult {
        value: best.1,
        levels: best.0,
        x: best.2.unwrap_or_default(),
        evaluations,
    })
}

type OuterEval<'a> = dyn Fn(&[f64]) -> (f64, Option<Vec<f64>>, usize) + Sync + 'a;

fn golden_refine(
    outer: &OuterEval<'_>,
    center: f64,
    h: f64,
    tol: f64,
) -> (Vec<f64>, f64, Option<Vec<f64>>, usize) {
    let gr = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (center - h, center + h);
    let mut used = 0;
    let mut best = {
        let (v, x, u) = outer(&[center]);
        used += u;
        (vec![center], v, x)
    };
    let probe = |l: f64, best: &mut (Vec<f64>, f64, Option<Vec<f64>>), used: &mut usize| {
        let (v, x, u) = outer(&[l]);
        *used += u;
        if v > best.1 {
            *best = (vec![l], v, x);
        }
        v
    };
    let mut c = hi - gr * (hi - lo);
    let mut e = lo + gr * (hi - lo);
    let mut fc = probe(c, &mut best, &mut used);
    let mut fe = probe(e, &mut best, &mut used);
    let mut iters = 0;
    while (hi - lo) > tol.max(1e-12) * (1.0 + center.abs()) && iters < 60 {
        iters += 1;
        if fc >= fe {
            hi = e;
            e = c;
            fe = fc;
            c = hi - gr * (hi - lo);
            fc = probe(c, &mut best, &mut used);
        } else {
            lo = c;
            c = e;
            fc = fe;
            e = lo + gr * (hi - lo);
            fe = probe(e, &mut best, &mut used);
        }
    }
    (best.0, best.1, best.2, used)
}

fn nm_refine(
    outer: &OuterEval<'_>,
    l0: Vec<f64>,
    spacing: &[f64],
    tol: f64,
) -> (Vec<f64>, f64, Option<Vec<f64>>, usize) {
    let n = l0.len();
    let mut used = 0;
    let mut pts: Vec<(Vec<f64>, f64, Option<Vec<f64>>)> = Vec::new();
    for k in 0..=n {
        let mut l = l0.clone();
        if k > 0 {
            l[k - 1] += 0.5 * spacing[k - 1];
        }
        let (v, x, u) = outer(&l);
        used += u;
        pts.push((l, v, x));
    }
    for _ in 0..200 {
        pts.sort_by(|a, b| b.1.total_cmp(&a.1));
        let diam = pts[1..]
            .iter()
            .map(|p| p.0.iter().zip(&pts[0].0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if diam <= tol {
            break;
        }
        let mut cen = vec![0.0; n];
        for p in &pts[..n] {
            cen.iter_mut().zip(&p.0).for_each(|(c, v)| *c += v / n as f64);
        }
        let worst = pts[n].0.clone();
        let at = |t: f64| -> Vec<f64> { cen.iter().zip(&worst).map(|(c, w)| c + t * (c - w)).collect() };
        let mut tried = false;
        for t in [1.0, 0.5, -0.5] {
            let l = at(t);
            let (v, x, u) = outer(&l);
            used += u;
            if v > pts[n].1 {
                pts[n] = (l, v, x);
                tried = true;
                break;
            }
        }
        if !tried {
            let b = pts[0].0.clone();
            for p in pts.iter_mut().skip(1) {
                let l: Vec<f64> = b.iter().zip(&p.0).map(|(b, x)| b + 0.5 * (x - b)).collect();
                let (v, x, u) = outer(&l);
                used += u;
                *p = (l, v, x);
            }
        }
    }
    pts.sort_by(|a, b| b.1.total_cmp(&a.1));
    let (l, v, x) = pts.swap_remove(0);
    (l, v, x, used)
}

/// Convenience wrapper computing the complement basis itself.
pub fn two_stage_value(
    problem: &Problem,
    a: &[f64],
    b: &[f64],
    eta: f64,
    cfg: &SolverConfig,
) -> Result<TwoStageResult> {
    let basis = orthonormal_complement(b)?;
    two_stage_maximize(problem, a, b, eta, &basis, cfg)
}
