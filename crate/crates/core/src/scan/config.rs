//! Sweep configuration: a JSON document with sections `problem`, `cone`,
//! `sweep`, `solver`, `tolerances` and `output`. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::problems::{expr::eval_constant, ProblemSpec};
use crate::scalarization::ValueMode;
use crate::solver::SolverConfig;

/// A number, or a string holding a constant expression such as
/// `"1 - cos(pi/8)"` or `"inf"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Number(f64),
    Text(String),
}

impl Scalar {
    pub fn resolve(&self, what: &str) -> Result<f64> {
        match self {
            Scalar::Number(v) => Ok(*v),
            Scalar::Text(s) => match s.trim() {
                "inf" | "infinity" | "+inf" => Ok(f64::INFINITY),
                t => eval_constant(t).map_err(|e| Error::Config(format!("{what}: {e}"))),
            },
        }
    }
}

impl From<f64> for Scalar {
    fn from(v: f64) -> Self {
        Scalar::Number(v)
    }
}

/// How the scalarization function treats the ε-ball of the spherical cone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Truncation {
    /// Keep the ball constraint (exact set definition).
    #[default]
    Exact,
    /// Use `min{H⁺, kε}` everywhere.
    ClosedForm,
}

impl From<Truncation> for ValueMode {
    fn from(t: Truncation) -> Self {
        match t {
            Truncation::Exact => ValueMode::Truncated,
            Truncation::ClosedForm => ValueMode::ClosedForm,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConeSection {
    pub eta: Scalar,
    /// Cone radius; `"inf"` for the untruncated cone.
    #[serde(default = "infinite")]
    pub r: Scalar,
    #[serde(default)]
    pub truncation: Truncation,
}

fn infinite() -> Scalar {
    Scalar::Text("inf".into())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrientSection {
    pub count: usize,
    /// Only used for `m ≥ 3`.
    #[serde(default)]
    pub seed: u64,
}

/// Where the component bounds for reduced and box strategies come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BoundsChoice {
    /// Analytic when the problem declares them, sampled otherwise.
    #[default]
    Auto,
    Analytic,
    Sampled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "strategy", rename_all = "snake_case", deny_unknown_fields)]
pub enum BaseStrategy {
    /// One pivot coordinate (1-based; default: narrowest component range).
    /// `free_ranges` replaces the orient-dependent intervals of the free
    /// coordinates with fixed ones.
    Reduced {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        pivot: Option<usize>,
        counts: Vec<usize>,
        #[serde(default)]
        bounds: BoundsChoice,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        free_ranges: Option<Vec<[Scalar; 2]>>,
    },
    /// Several pivots (1-based) with intersected free ranges.
    ReducedMulti {
        pivots: Vec<usize>,
        counts: Vec<usize>,
        #[serde(default)]
        bounds: BoundsChoice,
    },
    Explicit { points: Vec<Vec<f64>> },
    /// Full grid over a box, by default the component bounds padded by
    /// `pad` times their range on each side.
    Box {
        counts: Vec<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lower: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        upper: Option<Vec<f64>>,
        #[serde(default = "default_pad")]
        pad: f64,
        #[serde(default)]
        bounds: BoundsChoice,
    },
}

fn default_pad() -> f64 {
    0.5
}

/// `k_max`: a positive integer or `"auto"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum KMax {
    Fixed(u32),
    Word(String),
}

impl Default for KMax {
    fn default() -> Self {
        KMax::Word("auto".into())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub orients: OrientSection,
    pub bases: BaseStrategy,
    #[serde(default)]
    pub k_max: KMax,
    /// Image samples used for sampled bounds, the diameter estimate and
    /// the centroid.
    #[serde(default = "default_bounds_samples")]
    pub bounds_samples: usize,
    #[serde(default = "default_bounds_margin")]
    pub bounds_margin: f64,
}

fn default_bounds_samples() -> usize {
    100_000
}

fn default_bounds_margin() -> f64 {
    crate::reduction::DEFAULT_BOUNDS_MARGIN
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToleranceSection {
    pub tol_level: Option<f64>,
    pub tol_value: Option<f64>,
    /// Defaults to `oracle_h`.
    pub dedup_eps: Option<f64>,
    pub oracle_n: usize,
    pub oracle_h: f64,
    pub delta_sound: f64,
    pub delta_cover: f64,
}

impl Default for ToleranceSection {
    fn default() -> Self {
        Self {
            tol_level: None,
            tol_value: None,
            dedup_eps: None,
            oracle_n: 1_000_000,
            oracle_h: 0.02,
            delta_sound: 0.05,
            delta_cover: 0.15,
        }
    }
}

impl ToleranceSection {
    pub fn dedup_eps(&self) -> f64 {
        self.dedup_eps.unwrap_or(self.oracle_h)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    /// Directory for relative paths below (default: the current directory).
    pub dir: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    pub json: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: None,
            csv: Some("boundary.csv".into()),
            json: Some("boundary.json".into()),
            report: Some("verify.json".into()),
        }
    }
}

impl OutputSection {
    fn resolve(&self, p: &Option<PathBuf>) -> Option<PathBuf> {
        p.as_ref().map(|p| match &self.dir {
            Some(d) if p.is_relative() => d.join(p),
            _ => p.clone(),
        })
    }

    pub fn csv_path(&self) -> Option<PathBuf> {
        self.resolve(&self.csv)
    }

    pub fn json_path(&self) -> Option<PathBuf> {
        self.resolve(&self.json)
    }

    pub fn report_path(&self) -> Option<PathBuf> {
        self.resolve(&self.report)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    pub problem: ProblemSpec,
    pub cone: ConeSection,
    pub sweep: SweepSection,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub tolerances: ToleranceSection,
    #[serde(default)]
    pub output: OutputSection,
}

/// Values of a configuration after parsing and validation.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub eta: f64,
    pub r: f64,
    pub k_max: Option<u32>,
}

impl ScanConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Hex SHA-256 of the compact JSON form of the configuration.
    pub fn digest(&self) -> String {
        let text = serde_json::to_string(self).expect("config serializes");
        Sha256::digest(text.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    /// Checks every value-level invariant and resolves expressions.
    pub fn validate(&self) -> Result<Resolved> {
        let bad = |msg: String| Err(Error::Config(msg));
        let eta = self.cone.eta.resolve("cone.eta")?;
        if !(eta > 0.0 && eta <= 1.0) {
            return bad(format!("cone.eta must lie in (0, 1], got {eta}"));
        }
        let r = self.cone.r.resolve("cone.r")?;
        if !(r > 0.0) {
            return bad(format!("cone.r must be positive, got {r}"));
        }
        if self.sweep.orients.count == 0 {
            return bad("sweep.orients.count must be at least 1".into());
        }
        if self.sweep.bounds_samples == 0 {
            return bad("sweep.bounds_samples must be at least 1".into());
        }
        if !(self.sweep.bounds_margin >= 0.0 && self.sweep.bounds_margin.is_finite()) {
            return bad("sweep.bounds_margin must be finite and nonnegative".into());
        }
        let k_max = match &self.sweep.k_max {
            KMax::Fixed(0) => return bad("sweep.k_max must be at least 1".into()),
            KMax::Fixed(k) => Some(*k),
            KMax::Word(w) if w == "auto" => None,
            KMax::Word(w) => return bad(format!("sweep.k_max must be an integer or \"auto\", got {w:?}")),
        };
        match &self.sweep.bases {
            BaseStrategy::Reduced {
                counts,
                pivot,
                free_ranges,
                ..
            } => {
                if counts.is_empty() || counts.contains(&0) {
                    return bad("sweep.bases.counts entries must be at least 1".into());
                }
                if *pivot == Some(0) {
                    return bad("sweep.bases.pivot is 1-based".into());
                }
                if let Some(ranges) = free_ranges {
                    if ranges.len() != counts.len() {
                        return bad("sweep.bases.free_ranges needs one range per count".into());
                    }
                    for [lo, hi] in ranges {
                        let (lo, hi) = (lo.resolve("free_ranges")?, hi.resolve("free_ranges")?);
                        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                            return bad(format!("sweep.bases.free_ranges: bad interval [{lo}, {hi}]"));
                        }
                    }
                }
            }
            BaseStrategy::ReducedMulti { pivots, counts, .. } => {
                if pivots.len() < 2 || pivots.contains(&0) {
                    return bad("sweep.bases.pivots needs at least two 1-based pivots".into());
                }
                if counts.contains(&0) {
                    return bad("sweep.bases.counts entries must be at least 1".into());
                }
            }
            BaseStrategy::Explicit { points } => {
                if points.is_empty() {
                    return bad("sweep.bases.points is empty".into());
                }
                if points.iter().flatten().any(|v| !v.is_finite()) {
                    return bad("sweep.bases.points must be finite".into());
                }
            }
            BaseStrategy::Box {
                counts,
                lower,
                upper,
                pad,
                ..
            } => {
                if counts.is_empty() || counts.contains(&0) {
                    return bad("sweep.bases.counts entries must be at least 1".into());
                }
                if lower.is_some() != upper.is_some() {
                    return bad("sweep.bases needs both lower and upper, or neither".into());
                }
                if !(*pad >= 0.0 && pad.is_finite()) {
                    return bad("sweep.bases.pad must be finite and nonnegative".into());
                }
            }
        }
        if let Err(e) = self.solver.validate() {
            return bad(format!("solver: {e}"));
        }
        let t = &self.tolerances;
        for (name, v) in [("tol_level", t.tol_level), ("tol_value", t.tol_value), ("dedup_eps", t.dedup_eps)] {
            if let Some(v) = v {
                if !(v >= 0.0 && v.is_finite()) {
                    return bad(format!("tolerances.{name} must be finite and nonnegative"));
                }
            }
        }
        if !(t.oracle_h > 0.0) || t.oracle_n == 0 {
            return bad("tolerances.oracle_h and oracle_n must be positive".into());
        }
        if self.cone.truncation == Truncation::Exact
            && self.solver.method == crate::solver::SolverMethod::TwoStage
            && r.is_finite()
        {
            return bad("the two-stage solver needs cone.truncation = \"closed_form\"".into());
        }
        Ok(Resolved { eta, r, k_max })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SWEEP: &str = r#"{
        "problem": {"builtin": "paper_2d"},
        "cone": {"eta": "1 - cos(pi/8)", "r": "inf"},
        "sweep": {
            "orients": {"count": 100},
            "bases": {"strategy": "reduced", "pivot": 2, "counts": [9]}
        }
    }"#;

    #[test]
    fn parses_reference_sweep() {
        let cfg = ScanConfig::from_json(SWEEP).unwrap();
        let r = cfg.validate().unwrap();
        assert!((r.eta - (1.0 - (std::f64::consts::PI / 8.0).cos())).abs() < 1e-15);
        assert!(r.r.is_infinite());
        assert_eq!(r.k_max, None);
        assert_eq!(cfg.tolerances.dedup_eps(), 0.02);
    }

    #[test]
    fn unknown_keys_rejected() {
        let bad = SWEEP.replace("\"count\": 100", "\"count\": 100, \"spin\": 1");
        assert!(matches!(ScanConfig::from_json(&bad), Err(Error::Config(_))));
        let bad = SWEEP.replace("\"problem\"", "\"extra\": 1, \"problem\"");
        assert!(ScanConfig::from_json(&bad).is_err());
    }

    #[test]
    fn invalid_values_rejected() {
        let zero = ScanConfig::from_json(&SWEEP.replace("\"count\": 100", "\"count\": 0")).unwrap();
        assert!(zero.validate().is_err());
        let eta = ScanConfig::from_json(&SWEEP.replace("1 - cos(pi/8)", "1.5")).unwrap();
        assert!(eta.validate().is_err());
        let expr = ScanConfig::from_json(&SWEEP.replace("1 - cos(pi/8)", "1 - cos(")).unwrap();
        assert!(expr.validate().is_err());
        let k = ScanConfig::from_json(&SWEEP.replace("\"r\": \"inf\"", "\"r\": 1, \"k_max_\": 1"));
        assert!(k.is_err());
        let word = ScanConfig::from_json(&SWEEP.replace("\"counts\": [9]}", "\"counts\": [9]}, \"k_max\": \"many\""))
            .unwrap();
        assert!(word.validate().is_err());
    }

    #[test]
    fn digest_is_stable_and_sensitive() {
        let a = ScanConfig::from_json(SWEEP).unwrap();
        let b = ScanConfig::from_json(SWEEP).unwrap();
        assert_eq!(a.digest(), b.digest());
        assert_eq!(a.digest().len(), 64);
        let mut c = b.clone();
        c.solver.seed = 1;
        assert_ne!(a.digest(), c.digest());
    }

    #[test]
    fn output_paths_join_dir() {
        let out = OutputSection {
            dir: Some("/tmp/run".into()),
            ..Default::default()
        };
        assert_eq!(out.csv_path().unwrap(), PathBuf::from("/tmp/run/boundary.csv"));
    }
}
