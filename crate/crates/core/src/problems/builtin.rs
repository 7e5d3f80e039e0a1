use std::f64::consts::{FRAC_PI_8, TAU};
use std::sync::Arc;

use super::{AnalyticBoundary, ControlSet, PolygonSet, Problem};
use crate::error::{invalid, Result};

/// The nonconvex two-criteria map on the unit simplex:
/// `f₁ = √(x₁² + 2x₂²)`, `f₂ = cos(2x₁ + x₂²) − exp(−x₂²) + sin(3x₁x₂)/3`.
///
/// The declared component bounds `[0, √2] × [−7/3, 4/3]` are deliberately
/// loose in the second coordinate (any enclosing values work for the
/// reduction).
pub fn paper_2d() -> Problem {
    let objective = Arc::new(|x: &[f64], out: &mut [f64]| {
        let (x1, x2) = (x[0], x[1]);
        out[0] = (x1 * x1 + 2.0 * x2 * x2).sqrt();
        out[1] = (2.0 * x1 + x2 * x2).cos() - (-x2 * x2).exp() + (3.0 * x1 * x2).sin() / 3.0;
    });
    Problem::new("paper_2d", ControlSet::Simplex { dim: 2 }, 2, objective)
        .and_then(|p| p.with_recommended(1.0 - FRAC_PI_8.cos(), f64::INFINITY))
        .and_then(|p| p.with_analytic_bounds(vec![0.0, -7.0 / 3.0], vec![2f64.sqrt(), 4.0 / 3.0]))
        .expect("paper_2d construction is infallible")
}

fn polar(name: &str, r_lo: f64, r_hi: f64) -> Result<Problem> {
    let control = ControlSet::boxed_with_warp(vec![r_lo, 0.0], vec![r_hi, TAU], vec![true, false])?;
    let objective = Arc::new(|x: &[f64], out: &mut [f64]| {
        let (s, c) = x[1].sin_cos();
        out[0] = x[0] * c;
        out[1] = x[0] * s;
    });
    Problem::new(name, control, 2, objective)?
        .with_analytic_bounds(vec![-r_hi, -r_hi], vec![r_hi, r_hi])
}

/// Disk of radius `radius` centred at the origin, via controls `(ρ, t)`.
pub fn disk(radius: f64) -> Result<Problem> {
    if !(radius.is_finite() && radius > 0.0) {
        return Err(invalid("radius", format!("must be positive and finite, got {radius}")));
    }
    Ok(polar("disk", 0.0, radius)?
        .with_recommended(1.0, f64::INFINITY)?
        .with_boundary(AnalyticBoundary::Circles(vec![([0.0, 0.0], radius)])))
}

/// Closed annulus `r_in ≤ ‖f‖ ≤ r_out`, via controls `(ρ, t)`.
pub fn annulus(r_in: f64, r_out: f64) -> Result<Problem> {
    if !(r_in.is_finite() && r_out.is_finite() && 0.0 < r_in && r_in < r_out) {
        return Err(invalid("r_in/r_out", format!("need 0 < r_in < r_out, got {r_in}, {r_out}")));
    }
    Ok(polar("annulus", r_in, r_out)?
        .with_recommended(0.3, 0.6 * (r_out - r_in))?
        .with_boundary(AnalyticBoundary::Circles(vec![
            ([0.0, 0.0], r_in),
            ([0.0, 0.0], r_out),
        ])))
}

/// Boundary radius of the bean: `R(t) = 1 + 0.3 cos 2t + 0.3 sin t`.
///
/// The curve is smooth and star-shaped about the origin with a single
/// concave inlet around `t = −π/2`.
pub fn bean_radius(t: f64) -> f64 {
    1.0 + 0.3 * (2.0 * t).cos() + 0.3 * t.sin()
}

/// Interior of the bean curve, `f = ρ R(t) (cos t, sin t)` with `ρ ∈ [0,1]`.
pub fn bean() -> Problem {
    let control = ControlSet::boxed_with_warp(vec![0.0, 0.0], vec![1.0, TAU], vec![true, false])
        .expect("static bounds");
    let objective = Arc::new(|x: &[f64], out: &mut [f64]| {
        let (s, c) = x[1].sin_cos();
        let r = x[0] * bean_radius(x[1]);
        out[0] = r * c;
        out[1] = r * s;
    });
    Problem::new("bean", control, 2, objective)
        .and_then(|p| p.with_recommended(0.3, f64::INFINITY))
        .and_then(|p| p.with_analytic_bounds(vec![-1.6, -1.6], vec![1.6, 1.6]))
        .expect("bean construction is infallible")
        .with_boundary(AnalyticBoundary::PolarCurve(bean_radius))
}

/// Simple polygon with the identity objective; controls are points of the polygon.
pub fn polygon(vertices: Vec<[f64; 2]>) -> Result<Problem> {
    let set = PolygonSet::new(vertices)?;
    let verts = set.vertices().to_vec();
    let (mut lo, mut hi) = (vec![f64::INFINITY; 2], vec![f64::NEG_INFINITY; 2]);
    for v in &verts {
        for k in 0..2 {
            lo[k] = lo[k].min(v[k]);
            hi[k] = hi[k].max(v[k]);
        }
    }
    let diam = (hi[0] - lo[0]).hypot(hi[1] - lo[1]);
    let objective = Arc::new(|x: &[f64], out: &mut [f64]| out.copy_from_slice(&x[..2]));
    Ok(Problem::new("polygon", ControlSet::Polygon(set), 2, objective)?
        .with_recommended(0.3, 0.2 * diam)?
        .with_analytic_bounds(lo, hi)?
        .with_boundary(AnalyticBoundary::Polygon(verts)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paper_2d_spot_values() {
        let p = paper_2d();
        assert_eq!(p.evaluate(&[0.0, 0.0]), vec![0.0, 0.0]);
        let f = p.evaluate(&[0.0, 1.0]);
        assert!((f[0] - 2f64.sqrt()).abs() < 1e-15);
        assert!((f[1] - 0.17243).abs() < 1e-5);
        let f = p.evaluate(&[1.0, 0.0]);
        assert_eq!(f[0], 1.0);
        assert!((f[1] - (-1.41615)).abs() < 1e-5);
        assert!(!p.is_feasible(&[0.6, 0.6]));
        assert!(p.is_feasible(&[0.5, 0.5]));
    }

    #[test]
    fn samplers_are_feasible_and_bounded() {
        let probs = vec![
            paper_2d(),
            disk(1.0).unwrap(),
            annulus(1.0, 2.0).unwrap(),
            bean(),
            polygon(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap(),
        ];
        for p in probs {
            let b = p.analytic_bounds().unwrap().clone();
            for x in p.sample(100_000, 11) {
                assert!(p.is_feasible(&x), "{}: {x:?}", p.name());
                let f = p.evaluate(&x);
                for i in 0..2 {
                    assert!(f[i] >= b.lower()[i] - 1e-12 && f[i] <= b.upper()[i] + 1e-12);
                }
            }
        }
    }

    #[test]
    fn paper_2d_first_component_range() {
        let p = paper_2d();
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for x in p.sample(200_000, 3) {
            let f = p.evaluate(&x);
            lo = lo.min(f[0]);
            hi = hi.max(f[0]);
        }
        assert!(lo < 1e-2 && lo >= 0.0);
        assert!((hi - 2f64.sqrt()).abs() < 1e-2);
    }

    #[test]
    fn annulus_images_lie_in_annulus() {
        let p = annulus(1.0, 2.0).unwrap();
        for x in p.sample(10_000, 4) {
            let f = p.evaluate(&x);
            let r = f[0].hypot(f[1]);
            assert!((1.0 - 1e-12..=2.0 + 1e-12).contains(&r));
        }
    }

    #[test]
    fn bean_has_a_concave_inlet() {
        // the curve's polar radius dips at the bottom
        let bottom = bean_radius(-std::f64::consts::FRAC_PI_2);
        let side = bean_radius(-std::f64::consts::FRAC_PI_2 + 0.6);
        assert!(bottom < side);
        let b = bean().boundary().unwrap().clone();
        assert!(b.distance(&[0.0, -bottom]) < 1e-3);
    }

    #[test]
    fn shape_validation() {
        assert!(disk(0.0).is_err());
        assert!(annulus(2.0, 1.0).is_err());
        assert!(annulus(0.0, 1.0).is_err());
    }

    #[test]
    fn analytic_boundaries() {
        let sq = polygon(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap();
        let b = sq.boundary().unwrap();
        assert!((b.distance(&[0.5, 0.5]) - 0.5).abs() < 1e-15);
        for p in b.sample(100) {
            assert!(b.distance(&p) < 1e-12);
        }
        let ann = annulus(1.0, 2.0).unwrap();
        let pts = ann.boundary().unwrap().sample(300);
        assert!(pts.iter().all(|p| {
            let r = p[0].hypot(p[1]);
            (r - 1.0).abs() < 1e-12 || (r - 2.0).abs() < 1e-12
        }));
    }
}
