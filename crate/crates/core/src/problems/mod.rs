//! Problems: an objective map over an admissibility set, plus built-ins.
//!
//! The image set of a problem is `D = cl{f(x) : x ∈ A}`. Besides the
//! objective, a problem knows how to test membership in `A` and how to map
//! the unit cube onto `A`, which gives both uniform sampling and
//! deterministic low-discrepancy start points for the solver.

mod builtin;
pub mod expr;

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::reduction::{BoundsSource, ComponentBounds};

pub use builtin::{annulus, bean, bean_radius, disk, paper_2d, polygon};
pub use expr::Expr;

/// Writes `f(x)` into the output slice.
pub type ObjectiveFn = Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;

/// The admissibility set `A`, together with a map from `[0,1]^d` onto it.
#[derive(Debug, Clone, PartialEq)]
pub enum ControlSet {
    /// Axis-aligned box. Coordinates flagged `radial` are sampled with the
    /// area-uniform warp `sqrt(lo² + (hi² − lo²)u)`.
    Box {
        lower: Vec<f64>,
        upper: Vec<f64>,
        radial: Vec<bool>,
    },
    /// `{x ≥ 0 : Σx ≤ 1}` in `dim` dimensions.
    Simplex { dim: usize },
    /// Closed simple polygon in the plane; controls are the points themselves.
    Polygon(PolygonSet),
}

impl ControlSet {
    pub fn boxed(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let radial = vec![false; lower.len()];
        Self::boxed_with_warp(lower, upper, radial)
    }

    pub fn boxed_with_warp(lower: Vec<f64>, upper: Vec<f64>, radial: Vec<bool>) -> Result<Self> {
        if lower.is_empty() || lower.len() != upper.len() || radial.len() != lower.len() {
            return Err(invalid("bounds", "lower/upper must be nonempty and equal length"));
        }
        for (l, u) in lower.iter().zip(&upper) {
            if !(l.is_finite() && u.is_finite() && l <= u) {
                return Err(invalid("bounds", format!("invalid interval [{l}, {u}]")));
            }
        }
        for (i, r) in radial.iter().enumerate() {
            if *r && lower[i] < 0.0 {
                return Err(invalid("bounds", "radial coordinates must be nonnegative"));
            }
        }
        Ok(ControlSet::Box {
            lower,
            upper,
            radial,
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            ControlSet::Box { lower, .. } => lower.len(),
            ControlSet::Simplex { dim } => *dim,
            ControlSet::Polygon(_) => 2,
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        if x.len() != self.dim() || !x.iter().all(|v| v.is_finite()) {
            return false;
        }
        match self {
            ControlSet::Box { lower, upper, .. } => x
                .iter()
                .zip(lower.iter().zip(upper))
                .all(|(v, (l, u))| *l <= *v && *v <= *u),
            ControlSet::Simplex { .. } => x.iter().all(|v| *v >= 0.0) && x.iter().sum::<f64>() <= 1.0,
            ControlSet::Polygon(p) => p.contains(x),
        }
    }

    /// Maps a point of the unit cube onto the set. Uniform inputs give
    /// uniform (by volume, or by image area for radial warps) outputs.
    pub fn from_unit(&self, u: &[f64]) -> Vec<f64> {
        match self {
            ControlSet::Box {
                lower,
                upper,
                radial,
            } => u
                .iter()
                .zip(lower.iter().zip(upper).zip(radial))
                .map(|(t, ((l, h), r))| {
                    let t = t.clamp(0.0, 1.0);
                    if *r {
                        (l * l + (h * h - l * l) * t).sqrt().clamp(*l, *h)
                    } else {
                        (l + (h - l) * t).clamp(*l, *h)
                    }
                })
                .collect(),
            ControlSet::Simplex { dim } => {
                let mut s: Vec<f64> = u.iter().map(|t| t.clamp(0.0, 1.0)).collect();
                s.sort_by(f64::total_cmp);
                let mut prev = 0.0;
                let mut x = Vec::with_capacity(*dim);
                for v in s {
                    x.push(v - prev);
                    prev = v;
                }
                x
            }
            ControlSet::Polygon(p) => p.from_unit(u),
        }
    }

    /// Characteristic length per coordinate, used to size initial simplices.
    pub fn extent(&self) -> Vec<f64> {
        match self {
            ControlSet::Box { lower, upper, .. } => lower
                .iter()
                .zip(upper)
                .map(|(l, u)| (u - l).max(1e-12))
                .collect(),
            ControlSet::Simplex { dim } => vec![1.0; *dim],
            ControlSet::Polygon(p) => vec![(p.hi[0] - p.lo[0]).max(1e-12), (p.hi[1] - p.lo[1]).max(1e-12)],
        }
    }

    /// Extreme points of the set (box corners only up to 6 dimensions).
    pub fn corners(&self) -> Vec<Vec<f64>> {
        match self {
            ControlSet::Box { lower, upper, .. } if lower.len() <= 6 => (0..1usize << lower.len())
                .map(|mask| {
                    (0..lower.len())
                        .map(|i| if mask >> i & 1 == 1 { upper[i] } else { lower[i] })
                        .collect()
                })
                .collect(),
            ControlSet::Box { .. } => Vec::new(),
            ControlSet::Simplex { dim } => (0..=*dim)
                .map(|k| (0..*dim).map(|i| if i + 1 == k { 1.0 } else { 0.0 }).collect())
                .collect(),
            ControlSet::Polygon(p) => p.vertices.iter().map(|v| v.to_vec()).collect(),
        }
    }
}

/// Simple polygon with an ear-clipping triangulation for area-uniform sampling.
#[derive(Debug, Clone, PartialEq)]
pub struct PolygonSet {
    vertices: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    cdf: Vec<f64>,
    lo: [f64; 2],
    hi: [f64; 2],
}

impl PolygonSet {
    pub fn new(vertices: Vec<[f64; 2]>) -> Result<Self> {
        let mut vertices = vertices;
        if vertices.len() > 3 && vertices.first() == vertices.last() {
            vertices.pop();
        }
        if vertices.len() < 3 {
            return Err(invalid("vertices", "a polygon needs at least three vertices"));
        }
        if vertices.iter().any(|v| !(v[0].is_finite() && v[1].is_finite())) {
            return Err(invalid("vertices", "coordinates must be finite"));
        }
        let area = signed_area(&vertices);
        if area.abs() < 1e-14 {
            return Err(invalid("vertices", "polygon has zero area"));
        }
        if area < 0.0 {
            vertices.reverse();
        }
        if self_intersects(&vertices) {
            return Err(invalid("vertices", "polygon is not simple"));
        }
        let triangles = ear_clip(&vertices)?;
        let mut cdf = Vec::with_capacity(triangles.len());
        let mut acc = 0.0;
        for t in &triangles {
            acc += tri_area(vertices[t[0]], vertices[t[1]], vertices[t[2]]);
            cdf.push(acc);
        }
        cdf.iter_mut().for_each(|c| *c /= acc);
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for v in &vertices {
            for k in 0..2 {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
        }
        Ok(Self {
            vertices,
            triangles,
            cdf,
            lo,
            hi,
        })
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        let (px, py) = (x[0], x[1]);
        if px < self.lo[0] || px > self.hi[0] || py < self.lo[1] || py > self.hi[1] {
            return false;
        }
        let n = self.vertices.len();
        let mut inside = false;
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            if segment_distance([px, py], a, b) <= 1e-12 {
                return true;
            }
            if (a[1] > py) != (b[1] > py) {
                let xc = a[0] + (py - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
                if px < xc {
                    inside = !inside;
                }
            }
        }
        inside
    }

    fn from_unit(&self, u: &[f64]) -> Vec<f64> {
        let u0 = u[0].clamp(0.0, 1.0);
        let idx = self
            .cdf
            .partition_point(|c| *c < u0)
            .min(self.triangles.len() - 1);
        let lo = if idx == 0 { 0.0 } else { self.cdf[idx - 1] };
        let width = (self.cdf[idx] - lo).max(f64::MIN_POSITIVE);
        let mut s = ((u0 - lo) / width).clamp(0.0, 1.0);
        let mut t = u[1].clamp(0.0, 1.0);
        if s + t > 1.0 {
            s = 1.0 - s;
            t = 1.0 - t;
        }
        let [i, j, k] = self.triangles[idx];
        let (a, b, c) = (self.vertices[i], self.vertices[j], self.vertices[k]);
        vec![
            a[0] + s * (b[0] - a[0]) + t * (c[0] - a[0]),
            a[1] + s * (b[1] - a[1]) + t * (c[1] - a[1]),
        ]
    }

    /// Euclidean distance from `p` to the polygon's perimeter.
    pub fn perimeter_distance(&self, p: [f64; 2]) -> f64 {
        let n = self.vertices.len();
        (0..n)
            .map(|i| segment_distance(p, self.vertices[i], self.vertices[(i + 1) % n]))
            .fold(f64::INFINITY, f64::min)
    }
}

fn signed_area(v: &[[f64; 2]]) -> f64 {
    let n = v.len();
    (0..n)
        .map(|i| {
            let (a, b) = (v[i], v[(i + 1) % n]);
            a[0] * b[1] - b[0] * a[1]
        })
        .sum::<f64>()
        / 2.0
}

fn tri_area(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1])) / 2.0
}

fn segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2).clamp(0.0, 1.0)
    };
    let (cx, cy) = (a[0] + t * dx - p[0], a[1] + t * dy - p[1]);
    (cx * cx + cy * cy).sqrt()
}

fn segments_cross(p1: [f64; 2], p2: [f64; 2], q1: [f64; 2], q2: [f64; 2]) -> bool {
    let d1 = tri_area(q1, q2, p1);
    let d2 = tri_area(q1, q2, p2);
    let d3 = tri_area(p1, p2, q1);
    let d4 = tri_area(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    // touching or collinear overlap
    (d1 == 0.0 && segment_distance(p1, q1, q2) == 0.0)
        || (d2 == 0.0 && segment_distance(p2, q1, q2) == 0.0)
        || (d3 == 0.0 && segment_distance(q1, p1, p2) == 0.0)
        || (d4 == 0.0 && segment_distance(q2, p1, p2) == 0.0)
}

fn self_intersects(v: &[[f64; 2]]) -> bool {
    let n = v.len();
    for i in 0..n {
        for j in i + 1..n {
            // adjacent edges share a vertex
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            if segments_cross(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n]) {
                return true;
            }
        }
    }
    false
}

fn ear_clip(v: &[[f64; 2]]) -> Result<Vec<[usize; 3]>> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    let mut tris = Vec::with_capacity(v.len() - 2);
    while idx.len() > 3 {
        let n = idx.len();
        let ear = (0..n).find(|&i| {
            let (a, b, c) = (idx[(i + n - 1) % n], idx[i], idx[(i + 1) % n]);
            if tri_area(v[a], v[b], v[c]) <= 0.0 {
                return false;
            }
            idx.iter().all(|&p| {
                if p == a || p == b || p == c {
                    return true;
                }
                let q = v[p];
                !(tri_area(v[a], v[b], q) >= 0.0
                    && tri_area(v[b], v[c], q) >= 0.0
                    && tri_area(v[c], v[a], q) >= 0.0)
            })
        });
        let Some(i) = ear else {
            return Err(invalid("vertices", "triangulation failed"));
        };
        tris.push([idx[(i + n - 1) % n], idx[i], idx[(i + 1) % n]]);
        idx.remove(i);
    }
    tris.push([idx[0], idx[1], idx[2]]);
    Ok(tris)
}

/// Ground-truth boundary of a built-in image set.
#[derive(Debug, Clone)]
pub enum AnalyticBoundary {
    /// Union of circles `(center, radius)`.
    Circles(Vec<([f64; 2], f64)>),
    /// Star-shaped closed curve `t ↦ R(t)(cos t, sin t)`.
    PolarCurve(fn(f64) -> f64),
    Polygon(Vec<[f64; 2]>),
}

impl AnalyticBoundary {
    /// `n` points spread along the boundary.
    pub fn sample(&self, n: usize) -> Vec<Vec<f64>> {
        use std::f64::consts::TAU;
        match self {
            AnalyticBoundary::Circles(circles) => {
                let total: f64 = circles.iter().map(|(_, r)| r).sum();
                circles
                    .iter()
                    .flat_map(|(c, r)| {
                        let k = ((n as f64) * r / total).ceil().max(1.0) as usize;
                        (0..k).map(move |i| {
                            let t = TAU * i as f64 / k as f64;
                            vec![c[0] + r * t.cos(), c[1] + r * t.sin()]
                        })
                    })
                    .collect()
            }
            AnalyticBoundary::PolarCurve(radius) => (0..n)
                .map(|i| {
                    let t = TAU * i as f64 / n as f64;
                    let r = radius(t);
                    vec![r * t.cos(), r * t.sin()]
                })
                .collect(),
            AnalyticBoundary::Polygon(v) => {
                let k = v.len();
                let lens: Vec<f64> = (0..k)
                    .map(|i| (v[(i + 1) % k][0] - v[i][0]).hypot(v[(i + 1) % k][1] - v[i][1]))
                    .collect();
                let total: f64 = lens.iter().sum();
                (0..k)
                    .flat_map(|i| {
                        let cnt = ((n as f64) * lens[i] / total).ceil().max(1.0) as usize;
                        let (a, b) = (v[i], v[(i + 1) % k]);
                        (0..cnt).map(move |j| {
                            let t = j as f64 / cnt as f64;
                            vec![a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
                        })
                    })
                    .collect()
            }
        }
    }

    /// Distance from `p` to the boundary (approximate for polar curves,
    /// which are densely sampled).
    pub fn distance(&self, p: &[f64]) -> f64 {
        match self {
            AnalyticBoundary::Circles(circles) => circles
                .iter()
                .map(|(c, r)| ((p[0] - c[0]).hypot(p[1] - c[1]) - r).abs())
                .fold(f64::INFINITY, f64::min),
            AnalyticBoundary::Polygon(v) => {
                let k = v.len();
                (0..k)
                    .map(|i| segment_distance([p[0], p[1]], v[i], v[(i + 1) % k]))
                    .fold(f64::INFINITY, f64::min)
            }
            AnalyticBoundary::PolarCurve(_) => self
                .sample(20_000)
                .iter()
                .map(|q| (p[0] - q[0]).hypot(p[1] - q[1]))
                .fold(f64::INFINITY, f64::min),
        }
    }
}

/// An objective map `f: A → R^m` with its admissibility set.
#[derive(Clone)]
pub struct Problem {
    name: String,
    control: ControlSet,
    dim_image: usize,
    objective: ObjectiveFn,
    recommended_eta: f64,
    recommended_radius: f64,
    analytic_bounds: Option<ComponentBounds>,
    boundary: Option<AnalyticBoundary>,
}

impl fmt::Debug for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem")
            .field("name", &self.name)
            .field("dim_control", &self.dim_control())
            .field("dim_image", &self.dim_image)
            .field("recommended_eta", &self.recommended_eta)
            .field("recommended_radius", &self.recommended_radius)
            .finish_non_exhaustive()
    }
}

impl Problem {
    pub fn new(
        name: impl Into<String>,
        control: ControlSet,
        dim_image: usize,
        objective: ObjectiveFn,
    ) -> Result<Self> {
        if dim_image == 0 {
            return Err(invalid("dim_image", "image dimension must be positive"));
        }
        Ok(Self {
            name: name.into(),
            control,
            dim_image,
            objective,
            recommended_eta: 1.0,
            recommended_radius: f64::INFINITY,
            analytic_bounds: None,
            boundary: None,
        })
    }

    pub fn with_recommended(mut self, eta: f64, radius: f64) -> Result<Self> {
        if !(eta > 0.0 && eta <= 1.0) || !(radius > 0.0) {
            return Err(invalid("recommended", "need eta in (0,1] and r > 0"));
        }
        self.recommended_eta = eta;
        self.recommended_radius = radius;
        Ok(self)
    }

    pub fn with_analytic_bounds(mut self, lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != self.dim_image {
            return Err(Error::DimensionMismatch {
                expected: self.dim_image,
                got: lower.len(),
            });
        }
        self.analytic_bounds = Some(ComponentBounds::new(lower, upper, BoundsSource::Analytic)?);
        Ok(self)
    }

    pub fn with_boundary(mut self, boundary: AnalyticBoundary) -> Self {
        self.boundary = Some(boundary);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim_control(&self) -> usize {
        self.control.dim()
    }

    pub fn dim_image(&self) -> usize {
        self.dim_image
    }

    pub fn control_set(&self) -> &ControlSet {
        &self.control
    }

    pub fn recommended_eta(&self) -> f64 {
        self.recommended_eta
    }

    pub fn recommended_radius(&self) -> f64 {
        self.recommended_radius
    }

    pub fn analytic_bounds(&self) -> Option<&ComponentBounds> {
        self.analytic_bounds.as_ref()
    }

    pub fn boundary(&self) -> Option<&AnalyticBoundary> {
        self.boundary.as_ref()
    }

    pub fn is_feasible(&self, x: &[f64]) -> bool {
        self.control.contains(x)
    }

    #[inline]
    pub fn evaluate_into(&self, x: &[f64], out: &mut [f64]) {
        (self.objective)(x, out)
    }

    pub fn evaluate(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim_image];
        (self.objective)(x, &mut out);
        out
    }

    pub fn from_unit(&self, u: &[f64]) -> Vec<f64> {
        self.control.from_unit(u)
    }

    /// `count` uniformly distributed feasible controls, deterministic in `seed`.
    pub fn sample(&self, count: usize, seed: u64) -> Vec<Vec<f64>> {
        let d = self.dim_control();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut u = vec![0.0; d];
        (0..count)
            .map(|_| {
                u.iter_mut().for_each(|v| *v = rng.gen::<f64>());
                self.control.from_unit(&u)
            })
            .collect()
    }
}

/// Problem section of a scan configuration.
///
/// Either names a built-in (`"builtin": "annulus", "r_in": 1, "r_out": 2`)
/// or defines a box-constrained expression problem
/// (`"objectives": ["x1", "x2^2"], "bounds": [[0, 1], [0, 1]]`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builtin: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_in: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_out: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertices: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objectives: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<Vec<[f64; 2]>>,
}

impl ProblemSpec {
    pub fn builtin(name: &str) -> Self {
        Self {
            builtin: Some(name.to_string()),
            ..Self::default()
        }
    }
}

/// Names and one-line descriptions of the built-in problems.
pub const BUILTINS: &[(&str, &str)] = &[
    ("paper_2d", "nonconvex 2-D test map on the unit simplex (params: none)"),
    ("disk", "disk of the given radius via polar controls (params: radius = 1)"),
    ("annulus", "annulus r_in <= |f| <= r_out (params: r_in = 1, r_out = 2)"),
    ("bean", "smooth star-shaped set with one concave inlet (params: none)"),
    ("polygon", "simple polygon, identity objective (params: vertices)"),
];

/// Builds a problem from its configuration section.
pub fn load_problem(spec: &ProblemSpec) -> Result<Problem> {
    let shape_params = spec.radius.is_some()
        || spec.r_in.is_some()
        || spec.r_out.is_some()
        || spec.vertices.is_some();
    match (&spec.builtin, &spec.objectives) {
        (Some(_), Some(_)) => Err(Error::Config(
            "problem: `builtin` and `objectives` are mutually exclusive".into(),
        )),
        (None, None) => Err(Error::Config(
            "problem: one of `builtin` or `objectives` is required".into(),
        )),
        (Some(name), None) => {
            if spec.bounds.is_some() {
                return Err(Error::Config("problem: `bounds` only applies to expression problems".into()));
            }
            let unexpected = |field: &str| {
                Err(Error::Config(format!(
                    "problem: `{field}` is not a parameter of `{name}`"
                )))
            };
            match name.as_str() {
                "paper_2d" | "bean" => {
                    if shape_params {
                        return unexpected("shape parameter");
                    }
                    Ok(if name == "bean" { bean() } else { paper_2d() })
                }
                "disk" => {
                    if spec.r_in.is_some() || spec.r_out.is_some() || spec.vertices.is_some() {
                        return unexpected("r_in/r_out/vertices");
                    }
                    disk(spec.radius.unwrap_or(1.0))
                }
                "annulus" => {
                    if spec.radius.is_some() || spec.vertices.is_some() {
                        return unexpected("radius/vertices");
                    }
                    annulus(spec.r_in.unwrap_or(1.0), spec.r_out.unwrap_or(2.0))
                }
                "polygon" => {
                    if spec.radius.is_some() || spec.r_in.is_some() || spec.r_out.is_some() {
                        return unexpected("radius/r_in/r_out");
                    }
                    let v = spec
                        .vertices
                        .clone()
                        .ok_or_else(|| Error::Config("problem: polygon needs `vertices`".into()))?;
                    polygon(v)
                }
                other => Err(Error::UnknownProblem(other.to_string())),
            }
        }
        (None, Some(objectives)) => {
            if shape_params {
                return Err(Error::Config(
                    "problem: shape parameters only apply to built-ins".into(),
                ));
            }
            let bounds = spec
                .bounds
                .as_ref()
                .ok_or_else(|| Error::Config("problem: expression problems need `bounds`".into()))?;
            expression_problem(
                spec.name.as_deref().unwrap_or("expression"),
                objectives,
                bounds,
            )
        }
    }
}

/// Box-constrained problem whose objective components are expressions in
/// `x1..xd`, `d = bounds.len()`.
pub fn expression_problem(name: &str, objectives: &[String], bounds: &[[f64; 2]]) -> Result<Problem> {
    if objectives.is_empty() {
        return Err(Error::Config("problem: `objectives` is empty".into()));
    }
    let d = bounds.len();
    let exprs = objectives
        .iter()
        .enumerate()
        .map(|(i, src)| {
            let e = Expr::parse(src).map_err(|err| match err {
                Error::Expression { position, message } => Error::Expression {
                    position,
                    message: format!("objective {}: {message}", i + 1),
                },
                other => other,
            })?;
            if e.max_var() > d {
                return Err(Error::Config(format!(
                    "problem: objective {} references x{} but only {d} bounds are given",
                    i + 1,
                    e.max_var()
                )));
            }
            Ok(e)
        })
        .collect::<Result<Vec<_>>>()?;
    let control = ControlSet::boxed(
        bounds.iter().map(|b| b[0]).collect(),
        bounds.iter().map(|b| b[1]).collect(),
    )?;
    let m = exprs.len();
    let objective: ObjectiveFn = Arc::new(move |x: &[f64], out: &mut [f64]| {
        for (o, e) in out.iter_mut().zip(&exprs) {
            *o = e.eval(x);
        }
    });
    Problem::new(name, control, m, objective)
}
