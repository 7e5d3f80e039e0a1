//! Reduced base-point boxes `P_b(ι)` for bounded image sets.
//!
//! Fixing one base coordinate at a component bound (the pivot) and letting
//! the others range over a box derived from the component bounds of the
//! image is enough to recover the whole boundary. Coordinates in this
//! module's API are 0-based.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::check_unit;
use crate::problems::Problem;

/// Default relative widening applied to sampled component bounds.
pub const DEFAULT_BOUNDS_MARGIN: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundsSource {
    Analytic,
    Sampled(usize),
}

/// Componentwise infimum and supremum of the image set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentBounds {
    lower: Vec<f64>,
    upper: Vec<f64>,
    source: BoundsSource,
}

impl ComponentBounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, source: BoundsSource) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                got: upper.len(),
            });
        }
        if lower.is_empty() {
            return Err(Error::EmptyInput("component bounds"));
        }
        for (l, u) in lower.iter().zip(&upper) {
            if !(l.is_finite() && u.is_finite() && l <= u) {
                return Err(invalid("bounds", format!("invalid interval [{l}, {u}]")));
            }
        }
        Ok(Self {
            lower,
            upper,
            source,
        })
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn source(&self) -> BoundsSource {
        self.source
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    /// Index of the coordinate with the smallest range (first on ties).
    pub fn narrowest(&self) -> usize {
        (0..self.dim())
            .min_by(|&i, &j| {
                let ri = self.upper[i] - self.lower[i];
                let rj = self.upper[j] - self.lower[j];
                ri.total_cmp(&rj).then(i.cmp(&j))
            })
            .unwrap_or(0)
    }

    /// Each interval widened by `margin` times its length on both sides.
    pub fn widened(&self, margin: f64) -> Self {
        let (lower, upper) = self
            .lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| {
                let pad = margin * (u - l);
                (l - pad, u + pad)
            })
            .unzip();
        Self {
            lower,
            upper,
            source: self.source,
        }
    }
}

/// Sampled component bounds, widened by [`DEFAULT_BOUNDS_MARGIN`].
pub fn component_bounds(problem: &Problem, n_samples: usize, seed: u64) -> Result<ComponentBounds> {
    component_bounds_with_margin(problem, n_samples, seed, DEFAULT_BOUNDS_MARGIN)
}

pub fn component_bounds_with_margin(
    problem: &Problem,
    n_samples: usize,
    seed: u64,
    margin: f64,
) -> Result<ComponentBounds> {
    if n_samples == 0 {
        return Err(invalid("n_samples", "must be at least 1"));
    }
    if !(margin >= 0.0 && margin.is_finite()) {
        return Err(invalid("margin", "must be finite and nonnegative"));
    }
    let m = problem.dim_image();
    let mut lower = vec![f64::INFINITY; m];
    let mut upper = vec![f64::NEG_INFINITY; m];
    let mut f = vec![0.0; m];
    let mut seen = 0usize;
    for x in problem.sample(n_samples, seed) {
        if !problem.is_feasible(&x) {
            continue;
        }
        problem.evaluate_into(&x, &mut f);
        if !f.iter().all(|v| v.is_finite()) {
            continue;
        }
        seen += 1;
        for i in 0..m {
            lower[i] = lower[i].min(f[i]);
            upper[i] = upper[i].max(f[i]);
        }
    }
    if seen == 0 {
        return Err(Error::EmptyInput("no feasible finite image sample"));
    }
    Ok(ComponentBounds::new(lower, upper, BoundsSource::Sampled(n_samples))?.widened(margin))
}

/// A box of base points: some coordinates fixed, the rest ranging over
/// closed intervals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamBox {
    /// `(coordinate, value)` pairs, sorted by coordinate.
    pub fixed: Vec<(usize, f64)>,
    /// `(coordinate, [lo, hi])` pairs, sorted by coordinate.
    pub ranges: Vec<(usize, [f64; 2])>,
}

impl ParamBox {
    pub fn dim(&self) -> usize {
        self.fixed.len() + self.ranges.len()
    }

    pub fn contains(&self, a: &[f64], tol: f64) -> bool {
        a.len() == self.dim()
            && self.fixed.iter().all(|(i, v)| (a[*i] - v).abs() <= tol)
            && self
                .ranges
                .iter()
                .all(|(i, [lo, hi])| a[*i] >= lo - tol && a[*i] <= hi + tol)
    }
}

/// Which feasibility condition of a multi-pivot reduction failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Infeasibility {
    /// A bound of pivot `pivot` falls outside the interval pivot `other`
    /// would assign to it.
    PivotOutsideInterval { pivot: usize, other: usize },
    /// The intervals assigned to free coordinate `coord` do not intersect.
    EmptyIntersection { coord: usize },
}

fn pivot_value(bounds: &ComponentBounds, b: &[f64], iota: usize) -> f64 {
    if b[iota] >= 0.0 {
        bounds.lower[iota]
    } else {
        bounds.upper[iota]
    }
}

/// Range of `|f_ι|` over `[f̲_ι, f̄_ι]`: the endpoints' absolute values,
/// with the lower end dropping to zero when the interval straddles zero.
fn abs_range(bounds: &ComponentBounds, iota: usize) -> (f64, f64) {
    let (l, u) = (bounds.lower[iota], bounds.upper[iota]);
    let hi = l.abs().max(u.abs());
    let lo = if l <= 0.0 && u >= 0.0 { 0.0 } else { l.abs().min(u.abs()) };
    (lo, hi)
}

/// Interval for free coordinate `i` when `iota` is the pivot: every
/// `a_i = f_i − |f_ι| b_i` with `f` in the bounding box.
fn free_interval(bounds: &ComponentBounds, b: &[f64], iota: usize, i: usize) -> [f64; 2] {
    let (lo, hi) = abs_range(bounds, iota);
    let (s, t) = (lo * b[i], hi * b[i]);
    [bounds.lower[i] - s.max(t), bounds.upper[i] - s.min(t)]
}

fn check_inputs(bounds: &ComponentBounds, b: &[f64]) -> Result<()> {
    let m = bounds.dim();
    if m < 2 {
        return Err(invalid("m", "reduction needs image dimension at least 2"));
    }
    if b.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: b.len(),
        });
    }
    check_unit(b)
}

/// The single-pivot box `P_b(ι)`.
pub fn parameter_range(bounds: &ComponentBounds, b: &[f64], iota: usize) -> Result<ParamBox> {
    check_inputs(bounds, b)?;
    let m = bounds.dim();
    if iota >= m {
        return Err(invalid("iota", format!("pivot {iota} out of range for m = {m}")));
    }
    let ranges = (0..m)
        .filter(|&i| i != iota)
        .map(|i| (i, free_interval(bounds, b, iota, i)))
        .collect();
    Ok(ParamBox {
        fixed: vec![(iota, pivot_value(bounds, b, iota))],
        ranges,
    })
}

/// Intersection of the single-pivot boxes over a pivot set `pivots`.
///
/// The feasibility test uses the same per-pivot intervals as the
/// single-pivot box.
pub fn parameter_range_intersection(
    bounds: &ComponentBounds,
    b: &[f64],
    pivots: &[usize],
) -> Result<std::result::Result<ParamBox, Infeasibility>> {
    check_inputs(bounds, b)?;
    let m = bounds.dim();
    let mut set: Vec<usize> = pivots.to_vec();
    set.sort_unstable();
    set.dedup();
    if set.len() < 2 {
        return Err(invalid("pivots", "need at least two distinct pivots"));
    }
    if let Some(&bad) = set.iter().find(|&&i| i >= m) {
        return Err(invalid("pivots", format!("pivot {bad} out of range for m = {m}")));
    }
    for &p in &set {
        for &q in &set {
            if p == q {
                continue;
            }
            let [lo, hi] = free_interval(bounds, b, p, q);
            let inside = |v: f64| v >= lo && v <= hi;
            if !(inside(bounds.lower[p]) && inside(bounds.upper[p])) {
                return Ok(Err(Infeasibility::PivotOutsideInterval { pivot: p, other: q }));
            }
        }
    }
    let mut ranges = Vec::new();
    for i in (0..m).filter(|i| !set.contains(i)) {
        let mut acc = [f64::NEG_INFINITY, f64::INFINITY];
        for &p in &set {
            let [lo, hi] = free_interval(bounds, b, p, i);
            acc = [acc[0].max(lo), acc[1].min(hi)];
        }
        if acc[0] > acc[1] {
            return Ok(Err(Infeasibility::EmptyIntersection { coord: i }));
        }
        ranges.push((i, acc));
    }
    let fixed = set.iter().map(|&p| (p, pivot_value(bounds, b, p))).collect();
    Ok(Ok(ParamBox { fixed, ranges }))
}

fn spaced(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![0.5 * (lo + hi)],
        n => (0..n)
            .map(|j| {
                if j == n - 1 {
                    hi
                } else {
                    lo + (hi - lo) * j as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

/// Uniform grid over the free coordinates of `param_box`, endpoints included
/// (a count of one picks the midpoint). Points are listed in odometer order,
/// last free coordinate fastest.
pub fn sample_param_grid(param_box: &ParamBox, counts: &[usize]) -> Result<Vec<Vec<f64>>> {
    if counts.len() != param_box.ranges.len() {
        return Err(Error::DimensionMismatch {
            expected: param_box.ranges.len(),
            got: counts.len(),
        });
    }
    if counts.iter().any(|&c| c == 0) {
        return Err(invalid("counts", "every count must be at least 1"));
    }
    let axes: Vec<Vec<f64>> = param_box
        .ranges
        .iter()
        .zip(counts)
        .map(|((_, [lo, hi]), &c)| spaced(*lo, *hi, c))
        .collect();
    let mut template = vec![0.0; param_box.dim()];
    for (i, v) in &param_box.fixed {
        template[*i] = *v;
    }
    let total: usize = counts.iter().product();
    let mut out = Vec::with_capacity(total);
    let mut digits = vec![0usize; axes.len()];
    for _ in 0..total {
        let mut a = template.clone();
        for (k, (i, _)) in param_box.ranges.iter().enumerate() {
            a[*i] = axes[k][digits[k]];
        }
        out.push(a);
        for k in (0..digits.len()).rev() {
            digits[k] += 1;
            if digits[k] < counts[k] {
                break;
            }
            digits[k] = 0;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{disk, paper_2d};
    use proptest::prelude::*;

    fn cb(lower: &[f64], upper: &[f64]) -> ComponentBounds {
        ComponentBounds::new(lower.to_vec(), upper.to_vec(), BoundsSource::Analytic).unwrap()
    }

    #[test]
    fn paper_2d_first_component_bounds() {
        let raw = component_bounds_with_margin(&paper_2d(), 1_000_000, 0, 0.0).unwrap();
        assert!(raw.lower()[0] >= 0.0 && raw.lower()[0] < 2e-3);
        assert!((raw.upper()[0] - 2f64.sqrt()).abs() < 2e-3);
        let wide = component_bounds(&paper_2d(), 1_000_000, 0).unwrap();
        assert!(wide.lower()[0] < raw.lower()[0] && wide.upper()[0] > raw.upper()[0]);
    }

    #[test]
    fn disk_bounds_within_margin() {
        let b = component_bounds(&disk(1.0).unwrap(), 200_000, 1).unwrap();
        for i in 0..2 {
            assert!((b.lower()[i] + 1.0).abs() < 0.03);
            assert!((b.upper()[i] - 1.0).abs() < 0.03);
        }
        assert_eq!(b.source(), BoundsSource::Sampled(200_000));
    }

    #[test]
    fn constant_map_bounds_collapse() {
        use crate::problems::{ControlSet, Problem};
        use std::sync::Arc;
        let p = Problem::new(
            "const",
            ControlSet::boxed(vec![0.0], vec![1.0]).unwrap(),
            2,
            Arc::new(|_x: &[f64], out: &mut [f64]| out.copy_from_slice(&[0.5, -2.0])),
        )
        .unwrap();
        let b = component_bounds(&p, 50, 0).unwrap();
        assert_eq!(b.lower(), &[0.5, -2.0]);
        assert_eq!(b.upper(), &[0.5, -2.0]);
    }

    #[test]
    fn paper_2d_boxes_lie_in_expected_range() {
        let bounds = paper_2d().analytic_bounds().unwrap().clone();
        let s2 = 2f64.sqrt();
        for b in crate::geometry::unit_sphere_grid(2, 100, 0).unwrap() {
            let bx = parameter_range(&bounds, &b, 1).unwrap();
            let (i, a2) = bx.fixed[0];
            assert_eq!(i, 1);
            assert!(a2 == -7.0 / 3.0 || a2 == 4.0 / 3.0);
            let [lo, hi] = bx.ranges[0].1;
            assert!(lo >= -7.0 / 3.0 - 1e-12 && hi <= s2 + 7.0 / 3.0 + 1e-12);
        }
    }

    #[test]
    fn zero_cross_terms() {
        let bx = parameter_range(&cb(&[0.0, 0.0], &[1.0, 1.0]), &[0.0, 1.0], 1).unwrap();
        assert_eq!(bx.fixed, vec![(1, 0.0)]);
        assert_eq!(bx.ranges, vec![(0, [0.0, 1.0])]);
        let bx = parameter_range(&cb(&[-1.0, -1.0], &[1.0, 1.0]), &[1.0, 0.0], 0).unwrap();
        assert_eq!(bx.fixed, vec![(0, -1.0)]);
        assert_eq!(bx.ranges, vec![(1, [-1.0, 1.0])]);
        let neg = parameter_range(&cb(&[-1.0, -1.0], &[1.0, 3.0]), &[0.0, -1.0], 1).unwrap();
        assert_eq!(neg.fixed, vec![(1, 3.0)]);
    }

    #[test]
    fn precondition_errors() {
        let b = cb(&[0.0, 0.0], &[1.0, 1.0]);
        assert!(parameter_range(&b, &[1.0, 0.0], 2).is_err());
        assert!(parameter_range(&b, &[2.0, 0.0], 0).is_err());
        assert!(parameter_range(&cb(&[0.0], &[1.0]), &[1.0], 0).is_err());
        assert!(parameter_range_intersection(&b, &[1.0, 0.0], &[0]).is_err());
        assert!(parameter_range_intersection(&b, &[1.0, 0.0], &[0, 0]).is_err());
    }

    // independent interval arithmetic: scan |v| b_i over a fine grid of the
    // pivot interval
    fn interval(lo_p: f64, hi_p: f64, lo_i: f64, hi_i: f64, bi: f64) -> (f64, f64) {
        let n = 100_000;
        let (mut mx, mut mn) = (f64::NEG_INFINITY, f64::INFINITY);
        for j in 0..=n {
            let v = lo_p + (hi_p - lo_p) * j as f64 / n as f64;
            mx = mx.max(v.abs() * bi);
            mn = mn.min(v.abs() * bi);
        }
        (lo_i - mx, hi_i - mn)
    }

    #[test]
    fn straddling_pivot_covers_zero() {
        // f = (0, 1) lies in the box; its base a_1 = f_1 − |f_2| b_1 = 1 must
        // be admissible
        let bx = parameter_range(&cb(&[-1.0, -1.0], &[1.0, 1.0]), &[0.6, 0.8], 0).unwrap();
        let [lo, hi] = bx.ranges[0].1;
        assert!(lo <= 1.0 - 0.0 * 0.8 && 1.0 <= hi);
        let (elo, ehi) = interval(-1.0, 1.0, -1.0, 1.0, 0.8);
        assert!((lo - elo).abs() < 1e-12 && (hi - ehi).abs() < 1e-12);
    }

    #[test]
    fn symmetric_cube_two_pivots() {
        let bounds = cb(&[-1.0; 3], &[1.0; 3]);
        let bx = parameter_range_intersection(&bounds, &[0.0, 0.0, 1.0], &[0, 1])
            .unwrap()
            .unwrap();
        assert_eq!(bx.fixed, vec![(0, -1.0), (1, -1.0)]);
        let (lo, hi) = interval(-1.0, 1.0, -1.0, 1.0, 1.0);
        assert_eq!((lo, hi), (-2.0, 1.0));
        assert_eq!(bx.ranges, vec![(2, [lo, hi])]);
    }

    #[test]
    fn infeasible_pivot_pair() {
        let bounds = cb(&[-10.0, 0.0], &[10.0, 1.0]);
        let r = parameter_range_intersection(&bounds, &[1.0, 0.0], &[0, 1]).unwrap();
        assert_eq!(r, Err(Infeasibility::PivotOutsideInterval { pivot: 0, other: 1 }));
        // direct check: with pivot 1 the interval for coordinate 2 is
        // [0, 1], which misses both bounds of coordinate 1
        let (lo, hi) = interval(-10.0, 10.0, 0.0, 1.0, 0.0);
        assert!(!(lo..=hi).contains(&-10.0) && !(lo..=hi).contains(&10.0));
    }

    #[test]
    fn grid_examples() {
        let bx = ParamBox {
            fixed: vec![],
            ranges: vec![(0, [0.0, 2.0])],
        };
        assert_eq!(sample_param_grid(&bx, &[1]).unwrap(), vec![vec![1.0]]);
        let bx = ParamBox {
            fixed: vec![(1, 5.0)],
            ranges: vec![(0, [0.0, 1.0]), (2, [10.0, 20.0])],
        };
        let g = sample_param_grid(&bx, &[2, 2]).unwrap();
        assert_eq!(
            g,
            vec![
                vec![0.0, 5.0, 10.0],
                vec![0.0, 5.0, 20.0],
                vec![1.0, 5.0, 10.0],
                vec![1.0, 5.0, 20.0],
            ]
        );
        assert!(sample_param_grid(&bx, &[2]).is_err());
        assert!(sample_param_grid(&bx, &[0, 1]).is_err());
    }

    #[test]
    fn paper_2d_nine_bases() {
        let bounds = paper_2d().analytic_bounds().unwrap().clone();
        let b = [0.6, 0.8];
        let bx = parameter_range(&bounds, &b, 1).unwrap();
        let pts = sample_param_grid(&bx, &[9]).unwrap();
        assert_eq!(pts.len(), 9);
        assert!(pts.iter().all(|a| a[1] == -7.0 / 3.0));
        let [lo, hi] = bx.ranges[0].1;
        assert_eq!(pts[0][0], lo);
        assert_eq!(pts[8][0], hi);
        for w in pts.windows(2) {
            assert!((w[1][0] - w[0][0] - (hi - lo) / 8.0).abs() < 1e-12);
        }
    }

    fn unit(theta: f64, phi: f64) -> Vec<f64> {
        vec![phi.sin() * theta.cos(), phi.sin() * theta.sin(), phi.cos()]
    }

    proptest! {
        #[test]
        fn range_monotone_in_bounds(
            lo in prop::collection::vec(-5.0..0.0f64, 3),
            span in prop::collection::vec(0.0..5.0f64, 3),
            grow in prop::collection::vec(0.0..2.0f64, 6),
            th in 0.0..6.28f64, ph in 0.0..3.14f64, iota in 0usize..3,
        ) {
            let b = unit(th, ph);
            let hi: Vec<f64> = lo.iter().zip(&span).map(|(l, s)| l + s).collect();
            let small = cb(&lo, &hi);
            let big_lo: Vec<f64> = lo.iter().zip(&grow).map(|(l, g)| l - g).collect();
            let big_hi: Vec<f64> = hi.iter().zip(&grow[3..]).map(|(h, g)| h + g).collect();
            let big = cb(&big_lo, &big_hi);
            let s = parameter_range(&small, &b, iota).unwrap();
            let l = parameter_range(&big, &b, iota).unwrap();
            for ((_, a), (_, c)) in s.ranges.iter().zip(&l.ranges) {
                prop_assert!(c[0] <= a[0] + 1e-12 && c[1] >= a[1] - 1e-12);
            }
        }

        #[test]
        fn intersection_inside_each_single_box(
            lo in prop::collection::vec(-2.0..0.0f64, 3),
            span in prop::collection::vec(0.1..4.0f64, 3),
            th in 0.0..6.28f64, ph in 0.0..3.14f64,
        ) {
            let b = unit(th, ph);
            let hi: Vec<f64> = lo.iter().zip(&span).map(|(l, s)| l + s).collect();
            let bounds = cb(&lo, &hi);
            if let Ok(bx) = parameter_range_intersection(&bounds, &b, &[0, 1]).unwrap() {
                for p in [0usize, 1] {
                    let single = parameter_range(&bounds, &b, p).unwrap();
                    let (_, [slo, shi]) = single.ranges.iter().find(|(i, _)| *i == 2).unwrap();
                    let [lo2, hi2] = bx.ranges[0].1;
                    prop_assert!(lo2 >= *slo - 1e-12 && hi2 <= *shi + 1e-12);
                }
            }
        }
    }
}
