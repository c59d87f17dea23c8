use probecap::continuous::{
    awgn_capacity, dirty_paper_lower, fading_lower, gaussian_entropy, mixture_differential_entropy,
    DirtyPaperParams, FadingParams, GaussianMixture, ENTROPY_TOL,
};
use probecap::solver::{linear_grid, sweep_with, time_sharing_baseline};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn mixture_entropy_bounds(w in 0.01f64..0.99, v1 in 0.05f64..10.0, v2 in 0.05f64..10.0) {
        let gm = GaussianMixture::new(vec![w, 1.0 - w], vec![v1, v2]).unwrap();
        let h = mixture_differential_entropy(&gm, ENTROPY_TOL).unwrap();
        let lower = w * gaussian_entropy(v1) + (1.0 - w) * gaussian_entropy(v2);
        prop_assert!(h >= lower - 1e-6);
        prop_assert!(h <= gaussian_entropy(gm.variance()) + 1e-6);
    }
}

#[test]
fn dirty_paper_curve_shape() {
    let g = linear_grid(0.0, 1.0, 11);
    let c = sweep_with(&g, |gamma| {
        dirty_paper_lower(&DirtyPaperParams { p: 1.0, q: 1.0, n: 1.0, gamma }, 101)
    })
    .unwrap();
    let top = awgn_capacity(1.0).unwrap();
    assert!(c.monotone && c.concave);
    assert!(c.values.iter().all(|&v| v <= top + 1e-4));
    let base = time_sharing_baseline(awgn_capacity(0.5).unwrap(), top, &g);
    assert!(c.dominates(&base, 1e-6));
}

#[test]
fn fading_curve_shape() {
    let g = linear_grid(0.0, 1.0, 6);
    let params = |gamma| FadingParams { p: 1.0, n: 1.0, b: 1.0, g1: 0.01, g2: 1.0, gamma };
    let c = sweep_with(&g, |gamma| fading_lower(&params(gamma), 51)).unwrap();
    let p = params(0.0);
    assert!(c.monotone && c.concave);
    assert!(c.values.iter().all(|&v| v <= p.fully_probed() + 1e-4));
    let base = time_sharing_baseline(p.unprobed(), p.fully_probed(), &g);
    assert!(c.dominates(&base, 1e-6));
}

#[test]
fn dirty_paper_rejects_bad_params() {
    let bad = DirtyPaperParams { p: 1.0, q: 1.0, n: 1.0, gamma: 1.5 };
    assert!(dirty_paper_lower(&bad, 11).is_err());
    let bad = DirtyPaperParams { p: -1.0, q: 1.0, n: 1.0, gamma: 0.5 };
    assert!(dirty_paper_lower(&bad, 11).is_err());
}
