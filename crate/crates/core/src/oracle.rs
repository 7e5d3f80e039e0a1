//! Brute-force geometric ground truth: dense image clouds, an occupancy
//! grid boundary, and Hausdorff distances between finite point sets.

use std::cmp::Ordering;
use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::distance;
use crate::problems::Problem;

/// `f` applied to `n` sampled feasible controls.
pub fn image_cloud(problem: &Problem, n: usize, seed: u64) -> Vec<Vec<f64>> {
    problem
        .sample(n, seed)
        .into_par_iter()
        .map(|x| problem.evaluate(&x))
        .collect()
}

/// Uniform grid of cubical cells with an occupancy flag per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyGrid {
    origin: Vec<f64>,
    cell: f64,
    dims: Vec<usize>,
    occupied: Vec<bool>,
}

/// Refuse grids beyond this many cells.
const MAX_CELLS: usize = 1 << 30;

impl OccupancyGrid {
    /// Rasterizes `cloud`; the grid is padded by one empty cell on each side.
    pub fn from_cloud(cloud: &[Vec<f64>], cell: f64) -> Result<Self> {
        if !(cell > 0.0 && cell.is_finite()) {
            return Err(invalid("h", "cell size must be positive"));
        }
        let first = cloud.first().ok_or(Error::EmptyInput("point cloud"))?;
        let m = first.len();
        let mut lo = vec![f64::INFINITY; m];
        let mut hi = vec![f64::NEG_INFINITY; m];
        for p in cloud {
            if p.len() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    got: p.len(),
                });
            }
            for k in 0..m {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        if lo.iter().chain(&hi).any(|v| !v.is_finite()) {
            return Err(invalid("cloud", "points must be finite"));
        }
        let origin: Vec<f64> = lo.iter().map(|l| l - cell).collect();
        let dims: Vec<usize> = lo
            .iter()
            .zip(&hi)
            .map(|(l, h)| ((h - l) / cell).floor() as usize + 3)
            .collect();
        let total = dims
            .iter()
            .try_fold(1usize, |acc, d| acc.checked_mul(*d))
            .filter(|t| *t <= MAX_CELLS)
            .ok_or_else(|| invalid("h", "grid too large; use a coarser cell or fewer dimensions"))?;
        let mut grid = Self {
            origin,
            cell,
            dims,
            occupied: vec![false; total],
        };
        let idx: Vec<usize> = cloud.par_iter().map(|p| grid.index_of(p)).collect();
        for i in idx {
            grid.occupied[i] = true;
        }
        Ok(grid)
    }

    fn coords_of(&self, p: &[f64]) -> Vec<usize> {
        p.iter()
            .zip(&self.origin)
            .zip(&self.dims)
            .map(|((v, o), d)| (((v - o) / self.cell).floor().max(0.0) as usize).min(d - 1))
            .collect()
    }

    fn index_of(&self, p: &[f64]) -> usize {
        self.flat(&self.coords_of(p))
    }

    fn flat(&self, c: &[usize]) -> usize {
        c.iter().zip(&self.dims).fold(0, |acc, (ci, d)| acc * d + ci)
    }

    fn unflat(&self, mut i: usize) -> Vec<usize> {
        let mut c = vec![0; self.dims.len()];
        for k in (0..self.dims.len()).rev() {
            c[k] = i % self.dims[k];
            i /= self.dims[k];
        }
        c
    }

    pub fn cell(&self) -> f64 {
        self.cell
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    pub fn occupied_count(&self) -> usize {
        self.occupied.iter().filter(|o| **o).count()
    }

    pub fn is_occupied_at(&self, p: &[f64]) -> bool {
        p.len() == self.dims.len() && self.occupied[self.index_of(p)]
    }

    fn center(&self, c: &[usize]) -> Vec<f64> {
        c.iter()
            .zip(&self.origin)
            .map(|(ci, o)| o + (*ci as f64 + 0.5) * self.cell)
            .collect()
    }

    /// Centres of occupied cells with at least one unoccupied face neighbour.
    pub fn boundary_cells(&self) -> Vec<Vec<f64>> {
        let m = self.dims.len();
        (0..self.occupied.len())
            .into_par_iter()
            .filter(|&i| self.occupied[i])
            .filter_map(|i| {
                let c = self.unflat(i);
                let mut nb = c.clone();
                let exposed = (0..m).any(|k| {
                    [-1i64, 1].iter().any(|s| {
                        let v = c[k] as i64 + s;
                        if v < 0 || v >= self.dims[k] as i64 {
                            return true;
                        }
                        nb[k] = v as usize;
                        let open = !self.occupied[self.flat(&nb)];
                        nb[k] = c[k];
                        open
                    })
                });
                exposed.then(|| self.center(&c))
            })
            .collect()
    }
}

/// Discrete boundary of the set sampled by `cloud` at resolution `h`.
pub fn occupancy_boundary(cloud: &[Vec<f64>], h: f64) -> Result<Vec<Vec<f64>>> {
    Ok(OccupancyGrid::from_cloud(cloud, h)?.boundary_cells())
}

/// Directed and symmetric Hausdorff distances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hausdorff {
    /// `max_{p∈A} min_{q∈B} ‖p − q‖`.
    pub d_ab: f64,
    pub d_ba: f64,
    pub sym: f64,
}

/// Distance from each point of `from` to its nearest neighbour in `to`
/// (`+∞` when `to` is empty).
pub fn nearest_distances(from: &[Vec<f64>], to: &[Vec<f64>]) -> Vec<f64> {
    if to.is_empty() {
        return vec![f64::INFINITY; from.len()];
    }
    let index = SpatialHash::new(to);
    from.par_iter().map(|p| index.nearest(p)).collect()
}

/// Exact Hausdorff distances between two finite, nonempty point sets.
pub fn hausdorff(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<Hausdorff> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyInput("hausdorff point set"));
    }
    let d_ab = directed(a, b);
    let d_ba = directed(b, a);
    Ok(Hausdorff {
        d_ab,
        d_ba,
        sym: d_ab.max(d_ba),
    })
}

/// Directed Hausdorff distance; `+∞` when `to` is empty, 0 when `from` is.
pub fn directed(from: &[Vec<f64>], to: &[Vec<f64>]) -> f64 {
    nearest_distances(from, to).into_iter().fold(0.0, f64::max)
}

/// Bucketed point set for exact nearest-neighbour queries by expanding
/// shells of cells.
struct SpatialHash<'a> {
    points: &'a [Vec<f64>],
    cell: f64,
    lo: Vec<f64>,
    buckets: HashMap<Vec<i64>, Vec<usize>>,
    max_ring: i64,
}

impl<'a> SpatialHash<'a> {
    fn new(points: &'a [Vec<f64>]) -> Self {
        let m = points[0].len();
        let mut lo = vec![f64::INFINITY; m];
        let mut hi = vec![f64::NEG_INFINITY; m];
        for p in points {
            for k in 0..m {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        let extent = lo.iter().zip(&hi).map(|(l, h)| h - l).fold(0.0, f64::max);
        // a few points per cell for volume-filling sets
        let per_axis = (points.len() as f64).powf(1.0 / m as f64).max(1.0);
        let cell = if extent > 0.0 && extent.is_finite() {
            (extent / per_axis).max(extent * 1e-9)
        } else {
            1.0
        };
        let mut buckets: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            let key = Self::key(p, &lo, cell);
            buckets.entry(key).or_default().push(i);
        }
        let max_ring = (extent / cell).ceil() as i64 + 1;
        Self {
            points,
            cell,
            lo,
            buckets,
            max_ring,
        }
    }

    fn key(p: &[f64], lo: &[f64], cell: f64) -> Vec<i64> {
        p.iter()
            .zip(lo)
            .map(|(v, l)| ((v - l) / cell).floor() as i64)
            .collect()
    }

    fn nearest(&self, p: &[f64]) -> f64 {
        if self.buckets.len() < 8 || p.len() > 3 {
            return self.points.iter().map(|q| distance(p, q)).fold(f64::INFINITY, f64::min);
        }
        let center = Self::key(p, &self.lo, self.cell);
        // p may sit far outside the indexed box; start at the first shell
        // that can contain points
        let outside: f64 = p
            .iter()
            .zip(&self.lo)
            .map(|(v, l)| {
                let hi = l + self.cell * self.max_ring as f64;
                if v < l {
                    l - v
                } else if *v > hi {
                    v - hi
                } else {
                    0.0
                }
            })
            .fold(0.0, f64::max);
        let mut ring = ((outside / self.cell).floor() as i64 - 1).max(0);
        let mut best = f64::INFINITY;
        let limit = self.max_ring + (outside / self.cell).ceil() as i64 + 2;
        while ring <= limit {
            self.visit_shell(&center, ring, &mut |i| {
                best = best.min(distance(p, &self.points[i]));
            });
            // every unvisited point is at least `ring * cell` away
            if best <= ring as f64 * self.cell {
                break;
            }
            ring += 1;
        }
        if best.is_infinite() {
            return self.points.iter().map(|q| distance(p, q)).fold(f64::INFINITY, f64::min);
        }
        best
    }

    fn visit_shell(&self, center: &[i64], ring: i64, visit: &mut impl FnMut(usize)) {
        let m = center.len();
        let mut offset = vec![-ring; m];
        loop {
            if offset.iter().any(|o| o.abs() == ring) {
                let key: Vec<i64> = center.iter().zip(&offset).map(|(c, o)| c + o).collect();
                if let Some(ids) = self.buckets.get(&key) {
                    ids.iter().for_each(|&i| visit(i));
                }
            }
            let mut k = 0;
            loop {
                if k == m {
                    return;
                }
                offset[k] += 1;
                if offset[k] <= ring {
                    break;
                }
                offset[k] = -ring;
                k += 1;
            }
        }
    }
}

/// A certified boundary point and the parameters that witnessed it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint {
    pub f: Vec<f64>,
    pub x: Vec<f64>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub k: u32,
    pub value: f64,
}

fn lex(u: &[f64], v: &[f64]) -> Ordering {
    u.iter()
        .zip(v)
        .map(|(s, t)| s.total_cmp(t))
        .find(|o| o.is_ne())
        .unwrap_or_else(|| u.len().cmp(&v.len()))
}

impl BoundaryPoint {
    /// Output order: by image point, then base, then orient, then level and
    /// control.
    pub fn output_cmp(&self, other: &Self) -> Ordering {
        lex(&self.f, &other.f)
            .then_with(|| lex(&self.a, &other.a))
            .then_with(|| lex(&self.b, &other.b))
            .then_with(|| self.k.cmp(&other.k))
            .then_with(|| lex(&self.x, &other.x))
            .then_with(|| self.value.total_cmp(&other.value))
    }
}

/// Deduplicated boundary points of one sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCloud {
    pub problem_name: String,
    pub config_digest: String,
    pub dedup_eps: f64,
    pub points: Vec<BoundaryPoint>,
}

impl BoundaryCloud {
    pub fn images(&self) -> Vec<Vec<f64>> {
        self.points.iter().map(|p| p.f.clone()).collect()
    }
}

/// Sorts `points` into output order and drops every point whose image lies
/// within `eps` of an image already kept. `eps = 0` removes only exact
/// duplicates.
pub fn dedup(mut points: Vec<BoundaryPoint>, eps: f64) -> Vec<BoundaryPoint> {
    points.sort_by(BoundaryPoint::output_cmp);
    if points.is_empty() {
        return points;
    }
    let cell = if eps > 0.0 { eps } else { 1.0 };
    let key = |f: &[f64]| -> Vec<i64> { f.iter().map(|v| (v / cell).floor() as i64).collect() };
    let mut kept: Vec<BoundaryPoint> = Vec::new();
    let mut buckets: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
    for p in points {
        let k = key(&p.f);
        let m = k.len();
        let mut clash = false;
        let mut offset = vec![-1i64; m];
        'scan: loop {
            let nk: Vec<i64> = k.iter().zip(&offset).map(|(a, b)| a + b).collect();
            if let Some(ids) = buckets.get(&nk) {
                for &i in ids {
                    let d = distance(&kept[i].f, &p.f);
                    if (eps > 0.0 && d <= eps) || d == 0.0 {
                        clash = true;
                        break 'scan;
                    }
                }
            }
            let mut j = 0;
            loop {
                if j == m {
                    break 'scan;
                }
                offset[j] += 1;
                if offset[j] <= 1 {
                    break;
                }
                offset[j] = -1;
                j += 1;
            }
        }
        if !clash {
            buckets.entry(k).or_default().push(kept.len());
            kept.push(p);
        }
    }
    kept
}
