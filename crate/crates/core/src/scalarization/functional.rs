//! Scalarization in function spaces: coefficient vectors of an orthonormal
//! basis (the `L²` case) and grid-discretized bounded continuous functions
//! (the `C_b` case, where the orient is a measure with density `c·b`).

use serde::{Deserialize, Serialize};

use super::{h_core, theta};
use crate::error::{invalid, Error, Result};
use crate::geometry::{check_dim, check_finite, check_unit};

/// Nodal values of a function on a quadrature grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(nodes: Vec<f64>, weights: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::EmptyInput("grid"));
        }
        check_dim(nodes.len(), weights.len())?;
        check_dim(nodes.len(), values.len())?;
        check_finite("nodes", &nodes)?;
        check_finite("values", &values)?;
        if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(invalid("weights", "must be positive and finite"));
        }
        Ok(Self {
            nodes,
            weights,
            values,
        })
    }

    /// `n` equispaced nodes on `[lo, hi]` with trapezoidal weights (a single
    /// node gets weight `hi − lo`, or 1 for a degenerate interval).
    pub fn trapezoid(lo: f64, hi: f64, n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        if n == 0 {
            return Err(invalid("n", "need at least one node"));
        }
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(invalid("interval", format!("[{lo}, {hi}]")));
        }
        let (nodes, weights) = if n == 1 {
            let w = if hi > lo { hi - lo } else { 1.0 };
            (vec![0.5 * (lo + hi)], vec![w])
        } else {
            let h = (hi - lo) / (n - 1) as f64;
            let nodes = (0..n).map(|i| lo + h * i as f64).collect();
            let weights = (0..n)
                .map(|i| if i == 0 || i == n - 1 { h / 2.0 } else { h })
                .collect();
            (nodes, weights)
        };
        let values = nodes_map(&nodes, f);
        Self::new(nodes, weights, values)
    }

    /// A function on the same grid with new nodal values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(self.nodes.clone(), self.weights.clone(), values)
    }

    /// A function on the same grid sampled from `f`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        self.with_values(nodes_map(&self.nodes, f))
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Quadrature of the function.
    pub fn integral(&self) -> f64 {
        self.weights.iter().zip(&self.values).map(|(w, v)| w * v).sum()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    fn same_grid(&self, other: &Self) -> bool {
        self.nodes == other.nodes && self.weights == other.weights
    }
}

fn nodes_map(nodes: &[f64], f: impl Fn(f64) -> f64) -> Vec<f64> {
    nodes.iter().map(|&t| f(t)).collect()
}

/// The finite-dimensional shift value applied to basis coefficients.
pub fn l2_h_value(f: &[f64], a: &[f64], b: &[f64], eta: f64) -> Result<f64> {
    check_dim(f.len(), a.len())?;
    check_dim(f.len(), b.len())?;
    check_unit(b)?;
    Ok(h_core(f, a, b, theta(eta)?))
}

fn check_orient_density(b: &GridFunction) -> Result<()> {
    let sup = b.sup_norm();
    if (sup - 1.0).abs() > 1e-9 {
        return Err(invalid("b", format!("sup norm must be 1, got {sup}")));
    }
    Ok(())
}

/// `c = 1 / ∫ b²`, scaling the orient `b` into the density of a measure
/// whose pairing with `b` is one.
pub fn cb_scaling_factor(b: &GridFunction) -> Result<f64> {
    check_orient_density(b)?;
    let sq: f64 = b.weights.iter().zip(&b.values).map(|(w, v)| w * v * v).sum();
    if !(sq > 0.0) {
        return Err(invalid("b", "must not vanish identically"));
    }
    Ok(1.0 / sq)
}

/// Total variation `c ∫ |b|` of the measure induced by `b`.
pub fn total_variation(b: &GridFunction) -> Result<f64> {
    let c = cb_scaling_factor(b)?;
    Ok(c * b.weights.iter().zip(&b.values).map(|(w, v)| w * v.abs()).sum::<f64>())
}

/// `g(y) = c ∫ (f − a − y b) b − (1 − η) sup |f − a − y b|`.
pub fn cb_residual(f: &GridFunction, a: &GridFunction, b: &GridFunction, eta: f64, y: f64) -> Result<f64> {
    let g = CbEquation::new(f, a, b, eta)?;
    Ok(g.eval(y))
}

struct CbEquation<'a> {
    u: Vec<f64>,
    b: &'a GridFunction,
    c: f64,
    eta: f64,
}

impl<'a> CbEquation<'a> {
    fn new(f: &GridFunction, a: &GridFunction, b: &'a GridFunction, eta: f64) -> Result<Self> {
        if !(f.same_grid(a) && f.same_grid(b)) {
            return Err(invalid("grid", "f, a and b must share one grid"));
        }
        theta(eta)?;
        let c = cb_scaling_factor(b)?;
        let u = f.values.iter().zip(&a.values).map(|(x, y)| x - y).collect();
        Ok(Self { u, b, c, eta })
    }

    fn eval(&self, y: f64) -> f64 {
        let mut pair = 0.0;
        let mut sup = 0.0f64;
        for ((u, w), bv) in self.u.iter().zip(&self.b.weights).zip(&self.b.values) {
            let r = u - y * bv;
            pair += w * r * bv;
            sup = sup.max(r.abs());
        }
        self.c * pair - (1.0 - self.eta) * sup
    }

    /// Bound on the rounding error of [`Self::eval`] near `y`.
    fn noise(&self, y: f64) -> f64 {
        let mut pair = 0.0;
        let mut sup = 0.0f64;
        for ((u, w), bv) in self.u.iter().zip(&self.b.weights).zip(&self.b.values) {
            let r = u - y * bv;
            pair += (w * r * bv).abs();
            sup = sup.max(r.abs());
        }
        (self.u.len() + 2) as f64 * f64::EPSILON * (self.c * pair + sup + y.abs())
    }

    /// Root of the `η = 1` (linear) equation, used as the bracket centre.
    fn linear_root(&self) -> f64 {
        self.c
            * self
                .u
                .iter()
                .zip(&self.b.weights)
                .zip(&self.b.values)
                .map(|((u, w), bv)| w * u * bv)
                .sum::<f64>()
    }
}

/// Root found by [`cb_h_value_report`] with its probe trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CbRootReport {
    pub y: f64,
    pub residual: f64,
    /// Every `(y, g(y))` evaluated while bracketing and bisecting.
    pub probes: Vec<(f64, f64)>,
}

const MAX_EXPANSIONS: usize = 64;
const MAX_BISECTIONS: usize = 200;

/// The shift value in `C_b`: the unique root of the strictly decreasing
/// `g` from [`cb_residual`].
pub fn cb_h_value(f: &GridFunction, a: &GridFunction, b: &GridFunction, eta: f64) -> Result<f64> {
    Ok(cb_h_value_report(f, a, b, eta)?.y)
}

/// Like [`cb_h_value`], also returning the residual and every probe.
///
/// The bracket `[y₀ − 1, y₀ + 1]` around the linear root `y₀` is stepped
/// outward with doubling steps until `g` changes sign, then bisected until either the
/// bracket reaches adjacent floats or `g` can no longer tell its midpoint
/// from the ends. The slope of `g` is at most `−η`, so the second rule keeps
/// every probe on the strictly decreasing side of rounding noise.
pub fn cb_h_value_report(f: &GridFunction, a: &GridFunction, b: &GridFunction, eta: f64) -> Result<CbRootReport> {
    let eq = CbEquation::new(f, a, b, eta)?;
    let mut probes = Vec::new();
    let mut g = |y: f64| {
        let v = eq.eval(y);
        probes.push((y, v));
        v
    };
    let y0 = eq.linear_root();
    let mut delta = 1.0;
    let (mut lo, mut hi) = (y0 - delta, y0 + delta);
    let (mut glo, mut ghi) = (g(lo), g(hi));
    let mut expansions = 0;
    // step the bracket outward past the side that misses the sign change,
    // so no earlier probe lies strictly inside the final bracket
    while !(glo >= 0.0 && ghi <= 0.0) {
        expansions += 1;
        if expansions > MAX_EXPANSIONS || !glo.is_finite() || !ghi.is_finite() {
            return Err(Error::RootNotFound {
                iterations: expansions,
            });
        }
        delta *= 2.0;
        if glo < 0.0 {
            (hi, ghi) = (lo, glo);
            lo = hi - delta;
            glo = g(lo);
        } else {
            (lo, glo) = (hi, ghi);
            hi = lo + delta;
            ghi = g(hi);
        }
    }
    let mut iterations = 0;
    while iterations < MAX_BISECTIONS {
        if glo == 0.0 {
            hi = lo;
            ghi = glo;
            break;
        }
        if ghi == 0.0 {
            lo = hi;
            glo = ghi;
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || 0.25 * eta * (hi - lo) <= eq.noise(mid) {
            break;
        }
        let gm = g(mid);
        if gm > 0.0 {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
            ghi = gm;
        }
        iterations += 1;
    }
    let (y, residual) = if glo.abs() <= ghi.abs() { (lo, glo) } else { (hi, ghi) };
    if residual.abs() > 1e-9 * (1.0 + y.abs()) {
        return Err(Error::RootNotFound {
            iterations: expansions + iterations,
        });
    }
    Ok(CbRootReport { y, residual, probes })
}
