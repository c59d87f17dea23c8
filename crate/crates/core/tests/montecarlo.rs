use probecap::model::{build_example1, roles};
use probecap::montecarlo::{empirical_cmi, rate_split_codec, sample_joint, CodecConfig};
use probecap::prob::{Alphabet, Axis};
use probecap::solver::{solve_thm1, thm1_joint, Argmax, SolveOptions};
use probecap::JointTable;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn example1_parts(gamma: f64) -> (Vec<f64>, Vec<Vec<f64>>, f64) {
    let m = build_example1().unwrap();
    let r = solve_thm1(&m, gamma, &SolveOptions::default()).unwrap();
    let Argmax::Thm1 { pa, px } = r.argmax else {
        panic!("full-CSI parts expected")
    };
    (pa, px, r.value)
}

#[test]
fn cell_frequencies_concentrate() {
    let m = build_example1().unwrap();
    let (pa, px, _) = example1_parts(1.0);
    let j = thm1_joint(&m, &pa, &px).unwrap();
    let n = 1_000_000;
    let b = sample_joint(&j, n, 2024).unwrap();
    let emp = b.empirical().unwrap();
    for (p, q) in j.mass().iter().zip(emp.mass()) {
        let sigma = (p * (1.0 - p) / n as f64).sqrt();
        assert!((p - q).abs() <= 5.0 * sigma + 1e-12, "{p} vs {q}");
    }
}

#[test]
fn random_joints_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let axes = vec![
        Axis::new("X", Alphabet::binary("X")),
        Axis::new("Y", Alphabet::range("Y", 3).unwrap()),
        Axis::new("Z", Alphabet::binary("Z")),
    ];
    for k in 0..10 {
        let mut mass: Vec<f64> = (0..12).map(|_| rng.random_range(0.01..1.0)).collect();
        let t: f64 = mass.iter().sum();
        mass.iter_mut().for_each(|v| *v /= t);
        let j = JointTable::new(axes.clone(), mass).unwrap();
        let truth = j.conditional_mutual_information(&["X"], &["Y"], &["Z"]).unwrap();
        let n = 100_000;
        let b = sample_joint(&j, n, k).unwrap();
        let e = empirical_cmi(&b, &["X"], &["Y"], &["Z"]).unwrap();
        let bias = 12.0 / (2.0 * n as f64 * std::f64::consts::LN_2);
        assert!((e.estimate - truth).abs() <= 3.0 * e.stderr + bias, "{k}: {e:?} vs {truth}");
    }
}

#[test]
fn action_rate_above_its_limit_hurts() {
    let m = build_example1().unwrap();
    let (pa, px, _) = example1_parts(0.5);
    let j = thm1_joint(&m, &pa, &px).unwrap();
    let limit = j
        .conditional_mutual_information(&[roles::A], &[roles::Y], &[roles::S])
        .unwrap();
    let run = |r1: f64| {
        let cfg = CodecConfig {
            r1,
            n: 16,
            trials: 1000,
            ..Default::default()
        };
        rate_split_codec(&m, &pa, &px, &cfg, 8).unwrap().action_errors
    };
    assert!(run(limit + 0.2) > run(0.5 * limit));
}

#[test]
fn codec_is_deterministic() {
    let m = build_example1().unwrap();
    let (pa, px, c) = example1_parts(1.0);
    let cfg = CodecConfig {
        r2: 0.6 * c,
        n: 12,
        trials: 300,
        ..Default::default()
    };
    let a = serde_json::to_string(&rate_split_codec(&m, &pa, &px, &cfg, 3).unwrap()).unwrap();
    let b = serde_json::to_string(&rate_split_codec(&m, &pa, &px, &cfg, 3).unwrap()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn codec_rejects_bad_config() {
    let m = build_example1().unwrap();
    let (pa, px, _) = example1_parts(1.0);
    for cfg in [
        CodecConfig { n: 17, ..Default::default() },
        CodecConfig { n: 0, ..Default::default() },
        CodecConfig { epsilon: 0.0, ..Default::default() },
        CodecConfig { r1: -0.1, ..Default::default() },
    ] {
        assert!(rate_split_codec(&m, &pa, &px, &cfg, 0).is_err());
    }
}
