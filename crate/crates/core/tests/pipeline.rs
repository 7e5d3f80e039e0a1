use conescan::geometry::{dot, norm, orthonormal_complement};
use conescan::problems::{load_problem, paper_2d};
use conescan::scalarization::{h_value, theta, ScalarizationParams};
use conescan::scan::{csv_string, scan_problem, verify_cloud, OracleParams, ScanConfig};
use conescan::solver::{maximize, two_stage_value, SolverConfig, SolverMethod};
use proptest::prelude::*;

const BEAN: &str = r#"{
  "problem": { "builtin": "bean" },
  "cone": { "eta": 0.5, "r": "inf" },
  "sweep": {
    "orients": { "count": 48 },
    "bases": { "strategy": "box", "counts": [3, 3] }
  },
  "solver": { "n_starts": 8, "budget": 1600 }
}"#;

#[test]
fn sweep_is_sound_against_the_oracle() {
    let cfg = ScanConfig::from_json(BEAN).unwrap();
    let problem = load_problem(&cfg.problem).unwrap();
    let out = scan_problem(&problem, &cfg).unwrap();
    assert!(out.stats.points > 20);
    let params = OracleParams {
        n: 200_000,
        ..OracleParams::from_config(&cfg)
    };
    let rep = verify_cloud(&problem, &out.cloud.images(), &params).unwrap();
    assert!(rep.sound_pass, "soundness {}", rep.soundness);
}

#[test]
fn sweep_output_is_reproducible() {
    let cfg = ScanConfig::from_json(BEAN).unwrap();
    let problem = load_problem(&cfg.problem).unwrap();
    let a = scan_problem(&problem, &cfg).unwrap();
    let b = scan_problem(&problem, &cfg).unwrap();
    assert_eq!(csv_string(&a.cloud, 2, 2).unwrap(), csv_string(&b.cloud, 2, 2).unwrap());
    assert_eq!(a.cloud.config_digest, cfg.digest());
}

#[test]
fn staged_value_never_exceeds_direct_by_much() {
    let problem = paper_2d();
    let eta = 0.4;
    let direct = SolverConfig {
        n_starts: 32,
        budget: 32 * 1500,
        ..SolverConfig::default()
    };
    let staged = SolverConfig {
        method: SolverMethod::TwoStage,
        ..SolverConfig::default()
    };
    for (a, t) in [([0.0, -3.0], 1.2f64), ([2.0, 0.5], 2.9), ([-1.0, 1.0], -0.4)] {
        let b = [t.cos(), t.sin()];
        let p = ScalarizationParams::new(a.to_vec(), b.to_vec(), eta, f64::INFINITY, 1).unwrap();
        let d = maximize(|x| h_value(&problem.evaluate(x), &p).unwrap(), &problem, &direct).unwrap();
        let s = two_stage_value(&problem, &a, &b, eta, &staged).unwrap();
        assert!((s.value - d.best_value).abs() <= 1e-4 * (1.0 + d.best_value.abs()));
        // the staged witness attains its value
        let hs = h_value(&problem.evaluate(&s.x), &p).unwrap();
        assert!((hs - s.value).abs() <= 1e-6 * (1.0 + s.value.abs()));
    }
}

proptest! {
    // the shift value is invariant under translating image point and base together
    #[test]
    fn h_is_translation_invariant(
        f in prop::array::uniform2(-5.0..5.0f64),
        a in prop::array::uniform2(-5.0..5.0f64),
        s in prop::array::uniform2(-5.0..5.0f64),
        t in 0.0..std::f64::consts::TAU,
        eta in 0.05..1.0f64,
    ) {
        let b = vec![t.cos(), t.sin()];
        let p = ScalarizationParams::new(a.to_vec(), b.clone(), eta, f64::INFINITY, 1).unwrap();
        let q = ScalarizationParams::new(vec![a[0] + s[0], a[1] + s[1]], b, eta, f64::INFINITY, 1).unwrap();
        let h0 = h_value(&f, &p).unwrap();
        let h1 = h_value(&[f[0] + s[0], f[1] + s[1]], &q).unwrap();
        prop_assert!((h0 - h1).abs() <= 1e-9 * (1.0 + h0.abs()));
    }

    // H splits into the b-component minus θ times the complement norm
    #[test]
    fn h_matches_projection_split(
        f in prop::array::uniform3(-5.0..5.0f64),
        a in prop::array::uniform3(-5.0..5.0f64),
        raw in prop::array::uniform3(-1.0..1.0f64),
        eta in 0.05..1.0f64,
    ) {
        let n = norm(&raw);
        prop_assume!(n > 1e-3);
        let b: Vec<f64> = raw.iter().map(|v| v / n).collect();
        let u: Vec<f64> = f.iter().zip(&a).map(|(x, y)| x - y).collect();
        let q: f64 = orthonormal_complement(&b).unwrap().iter().map(|c| dot(&u, c).powi(2)).sum::<f64>().sqrt();
        let expect = dot(&u, &b) - theta(eta).unwrap() * q;
        let p = ScalarizationParams::new(a.to_vec(), b, eta, f64::INFINITY, 1).unwrap();
        prop_assert!((h_value(&f, &p).unwrap() - expect).abs() <= 1e-9 * (1.0 + expect.abs()));
    }
}
