//! Circular and spherical cones, membership tests, and orient grids.
//!
//! A circular cone with orient `ν` and sharpness `η ∈ (0, 1]` is the set
//! `{β : (1 − η)‖β‖ ≤ ⟨β, ν⟩}`; its half-angle is `arccos(1 − η)`. Intersecting
//! it with the closed ball of radius `r` gives the spherical cone. The
//! partially open variant keeps the ball closed but uses the open cone
//! interior, which is what the exterior cone condition is phrased with.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{invalid, Error, Result};

/// Absolute tolerance applied to every cone inequality.
pub const TOL_GEOM: f64 = 1e-12;

/// Tolerance on `‖orient‖ = 1`.
pub const TOL_UNIT: f64 = 1e-12;

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

#[inline]
pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

/// Rejects orients that are not unit vectors. Orients are never normalized
/// on the caller's behalf.
pub fn check_unit(v: &[f64]) -> Result<()> {
    let n = norm(v);
    if (n - 1.0).abs() <= TOL_UNIT {
        Ok(())
    } else {
        Err(Error::NonUnitOrient { norm: n })
    }
}

pub(crate) fn check_finite(name: &'static str, v: &[f64]) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(invalid(name, "entries must be finite"))
    }
}

/// Whether the cone interior is taken open (`PartiallyOpen`) or closed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InteriorMode {
    Closed,
    /// Closed ball, open cone interior.
    PartiallyOpen,
}

/// A circular cone, optionally truncated to a closed ball.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeSpec {
    orient: Vec<f64>,
    sharpness: f64,
    radius: f64,
    mode: InteriorMode,
}

impl ConeSpec {
    /// `radius = f64::INFINITY` gives the untruncated cone.
    pub fn new(orient: Vec<f64>, sharpness: f64, radius: f64, mode: InteriorMode) -> Result<Self> {
        check_finite("orient", &orient)?;
        check_unit(&orient)?;
        if !(sharpness > 0.0 && sharpness <= 1.0) {
            return Err(invalid("sharpness", format!("{sharpness} not in (0, 1]")));
        }
        if !(radius > 0.0) {
            return Err(invalid("radius", format!("{radius} must be positive")));
        }
        Ok(Self {
            orient,
            sharpness,
            radius,
            mode,
        })
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

    pub fn mode(&self) -> InteriorMode {
        self.mode
    }

    pub fn dim(&self) -> usize {
        self.orient.len()
    }

    pub fn contains(&self, beta: &[f64]) -> Result<bool> {
        check_dim(self.dim(), beta.len())?;
        Ok(self.contains_unchecked(beta))
    }

    #[inline]
    pub(crate) fn contains_unchecked(&self, beta: &[f64]) -> bool {
        let len = norm(beta);
        if len > self.radius + TOL_GEOM {
            return false;
        }
        let lhs = (1.0 - self.sharpness) * len;
        let rhs = dot(beta, &self.orient);
        match self.mode {
            InteriorMode::Closed => lhs <= rhs + TOL_GEOM,
            InteriorMode::PartiallyOpen => lhs < rhs - TOL_GEOM,
        }
    }
}

/// Membership of `beta` in `cone`.
pub fn cone_contains(cone: &ConeSpec, beta: &[f64]) -> Result<bool> {
    cone.contains(beta)
}

/// Sample-based check that the shifted cone `f + cone` misses every sampled
/// image point. A `false` answer falsifies the exterior cone condition at
/// `f`; `true` is only evidence.
pub fn exterior_cone_holds(image_sample: &[Vec<f64>], f: &[f64], cone: &ConeSpec) -> Result<bool> {
    if image_sample.is_empty() {
        return Err(Error::EmptyInput("image sample"));
    }
    if cone.mode() != InteriorMode::PartiallyOpen {
        return Err(invalid(
            "cone",
            "the exterior cone check needs a partially open cone",
        ));
    }
    check_dim(cone.dim(), f.len())?;
    check_finite("f", f)?;
    let mut shifted = vec![0.0; f.len()];
    for g in image_sample {
        check_dim(f.len(), g.len())?;
        for ((s, gi), fi) in shifted.iter_mut().zip(g).zip(f) {
            *s = gi - fi;
        }
        if cone.contains_unchecked(&shifted) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Deterministic set of `n` unit vectors in `R^m`.
///
/// For `m = 2` these are the evenly spaced directions
/// `(cos(2πi/n), sin(2πi/n))`, `i = 1..=n`, and `seed` is unused. For `m = 3`
/// a spherical Fibonacci lattice rotated about the pole by a seed-derived
/// angle is returned. Higher dimensions use a Kronecker (generalized golden
/// ratio) sequence pushed through the Gaussian quantile and normalized.
pub fn unit_sphere_grid(m: usize, n: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if m < 2 {
        return Err(invalid("m", "orient grids need dimension at least 2"));
    }
    if n == 0 {
        return Err(invalid("n", "at least one orient is required"));
    }
    let grid = match m {
        2 => (1..=n)
            .map(|i| {
                let t = std::f64::consts::TAU * i as f64 / n as f64;
                vec![t.cos(), t.sin()]
            })
            .collect(),
        3 => fibonacci_sphere(n, seed),
        _ => kronecker_sphere(m, n, seed),
    };
    Ok(grid)
}

fn fibonacci_sphere(n: usize, seed: u64) -> Vec<Vec<f64>> {
    let golden = (1.0 + 5f64.sqrt()) / 2.0;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let twist: f64 = rng.gen::<f64>() * std::f64::consts::TAU;
    (0..n)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
            let rho = (1.0 - z * z).max(0.0).sqrt();
            let lon = std::f64::consts::TAU * i as f64 / golden + twist;
            normalized(vec![rho * lon.cos(), rho * lon.sin(), z])
        })
        .collect()
}

fn kronecker_sphere(m: usize, n: usize, seed: u64) -> Vec<Vec<f64>> {
    // phi_m solves x^(m+1) = x + 1
    let mut phi = 2.0f64;
    for _ in 0..64 {
        phi = (1.0 + phi).powf(1.0 / (m as f64 + 1.0));
    }
    let alpha: Vec<f64> = (1..=m).map(|j| phi.powi(-(j as i32)).fract()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift: Vec<f64> = (0..m).map(|_| rng.gen::<f64>()).collect();
    let gauss = Normal::new(0.0, 1.0).expect("standard normal");
    (0..n)
        .map(|i| {
            let v: Vec<f64> = alpha
                .iter()
                .zip(&shift)
                .map(|(a, s)| {
                    let u = (s + (i as f64 + 1.0) * a).fract().clamp(1e-12, 1.0 - 1e-12);
                    gauss.inverse_cdf(u)
                })
                .collect();
            normalized(v)
        })
        .collect()
}

fn normalized(mut v: Vec<f64>) -> Vec<f64> {
    let n = norm(&v);
    if n == 0.0 {
        v.iter_mut().for_each(|x| *x = 0.0);
        v[0] = 1.0;
        return v;
    }
    v.iter_mut().for_each(|x| *x /= n);
    // one refinement pass keeps ‖v‖ within a couple of ulps of 1
    let n = norm(&v);
    v.iter_mut().for_each(|x| *x /= n);
    v
}

/// Orthonormal basis of the complement of unit vector `b`, built by
/// Gram–Schmidt from the coordinate axes in index order, skipping the axis
/// most aligned with `b`.
pub fn orthonormal_complement(b: &[f64]) -> Result<Vec<Vec<f64>>> {
    check_unit(b)?;
    let m = b.len();
    let skip = (0..m)
        .max_by(|&i, &j| b[i].abs().total_cmp(&b[j].abs()))
        .unwrap_or(0);
    let mut basis: Vec<Vec<f64>> = vec![b.to_vec()];
    for axis in (0..m).filter(|&i| i != skip) {
        let mut v = vec![0.0; m];
        v[axis] = 1.0;
        // two passes of modified Gram–Schmidt
        for _ in 0..2 {
            for q in &basis {
                let c = dot(&v, q);
                v.iter_mut().zip(q).for_each(|(vi, qi)| *vi -= c * qi);
            }
        }
        let n = norm(&v);
        v.iter_mut().for_each(|x| *x /= n);
        basis.push(v);
    }
    basis.remove(0);
    Ok(basis)
}
