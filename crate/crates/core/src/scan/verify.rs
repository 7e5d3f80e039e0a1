//! Comparison of a boundary cloud with the occupancy-grid oracle.

use serde::{Deserialize, Serialize};

use super::ScanConfig;
use crate::error::{invalid, Result};
use crate::oracle::{image_cloud, nearest_distances, occupancy_boundary};
use crate::problems::Problem;

/// Report at most this many uncovered oracle cells by name.
const MAX_LISTED: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleParams {
    pub n: usize,
    pub h: f64,
    pub seed: u64,
    pub delta_sound: f64,
    pub delta_cover: f64,
}

impl OracleParams {
    pub fn from_config(cfg: &ScanConfig) -> Self {
        let t = &cfg.tolerances;
        Self {
            n: t.oracle_n,
            h: t.oracle_h,
            seed: cfg.solver.seed,
            delta_sound: t.delta_sound,
            delta_cover: t.delta_cover,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(invalid("n", "oracle needs at least one sample"));
        }
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(invalid("h", "cell size must be positive"));
        }
        if !(self.delta_sound >= 0.0 && self.delta_cover >= 0.0) {
            return Err(invalid("delta", "thresholds must be nonnegative"));
        }
        Ok(())
    }
}

/// A point farther than its threshold from the other set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Offender {
    /// Position in the input list.
    pub index: usize,
    pub point: Vec<f64>,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub params: OracleParams,
    pub cloud_points: usize,
    pub oracle_points: usize,
    /// Directed distance cloud → oracle boundary.
    pub soundness: f64,
    /// Directed distance oracle boundary → cloud (`+∞`, serialized as
    /// `null`, for an empty cloud).
    pub coverage: f64,
    pub symmetric: f64,
    pub sound_pass: bool,
    pub cover_pass: bool,
    pub pass: bool,
    /// Nearest oracle distance of every cloud point, in cloud order.
    pub cloud_distances: Vec<f64>,
    /// Cloud points beyond `delta_sound`.
    pub unsound: Vec<Offender>,
    pub uncovered_count: usize,
    /// The worst uncovered oracle cells, at most 50.
    pub uncovered: Vec<Offender>,
}

/// Boundary cells of a dense image sample.
pub fn oracle_boundary(problem: &Problem, params: &OracleParams) -> Result<Vec<Vec<f64>>> {
    params.validate()?;
    let cloud = image_cloud(problem, params.n, params.seed);
    occupancy_boundary(&cloud, params.h)
}

/// Distances of `cloud` against a precomputed oracle boundary.
pub fn compare(cloud: &[Vec<f64>], oracle: &[Vec<f64>], params: &OracleParams) -> VerifyReport {
    let to_oracle = nearest_distances(cloud, oracle);
    let to_cloud = nearest_distances(oracle, cloud);
    let max = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
    let (soundness, coverage) = (max(&to_oracle), max(&to_cloud));
    let offenders = |pts: &[Vec<f64>], d: &[f64], limit: f64| -> Vec<Offender> {
        pts.iter()
            .zip(d)
            .enumerate()
            .filter(|(_, (_, &d))| d > limit)
            .map(|(index, (p, &distance))| Offender {
                index,
                point: p.clone(),
                distance,
            })
            .collect()
    };
    let unsound = offenders(cloud, &to_oracle, params.delta_sound);
    let mut uncovered = offenders(oracle, &to_cloud, params.delta_cover);
    let uncovered_count = uncovered.len();
    uncovered.sort_by(|a, b| b.distance.total_cmp(&a.distance).then(a.index.cmp(&b.index)));
    uncovered.truncate(MAX_LISTED);
    let sound_pass = soundness <= params.delta_sound;
    let cover_pass = coverage <= params.delta_cover;
    VerifyReport {
        params: params.clone(),
        cloud_points: cloud.len(),
        oracle_points: oracle.len(),
        soundness,
        coverage,
        symmetric: soundness.max(coverage),
        sound_pass,
        cover_pass,
        pass: sound_pass && cover_pass,
        cloud_distances: to_oracle,
        unsound,
        uncovered_count,
        uncovered,
    }
}

/// Builds the oracle for `problem` and compares `cloud` against it.
pub fn verify_cloud(problem: &Problem, cloud: &[Vec<f64>], params: &OracleParams) -> Result<VerifyReport> {
    let oracle = oracle_boundary(problem, params)?;
    Ok(compare(cloud, &oracle, params))
}

/// Runs the configured scan and verifies its cloud.
pub fn verify(cfg: &ScanConfig, params: &OracleParams) -> Result<VerifyReport> {
    let problem = crate::problems::load_problem(&cfg.problem)?;
    let outcome = super::scan_problem(&problem, cfg)?;
    verify_cloud(&problem, &outcome.cloud.images(), params)
}
