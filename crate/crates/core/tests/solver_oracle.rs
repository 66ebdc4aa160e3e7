mod common;

use common::{dense_data, enumerate_oracle, fd_gradient, naive_objective, small_instance};
use srgm::model::nll_grad;
use srgm::solver::{fit, fit_rescaled, kkt_check, FitConfig};

#[test]
fn fits_match_face_enumeration() {
    for seed in 0..8 {
        let (g, z, lambda, _) = small_instance(seed);
        let f = fit(&g, &z, &FitConfig::with_lambda(lambda), None).unwrap();
        assert!(f.converged, "seed {seed}");
        let (best, _) = enumerate_oracle(&g, &z, lambda).expect("oracle minimum");
        let data = dense_data(&g, &z);
        let ours = naive_objective(&f.theta_hat.to_vec(), &data, z.n(), lambda);
        assert!((ours - best).abs() < 1e-6, "seed {seed}: {ours} vs {best}");
        assert!((f.objective - ours).abs() < 1e-12);
        assert!(kkt_check(&f, &g, &z).unwrap() <= 1e-6);
    }
}

#[test]
fn gradient_matches_finite_differences() {
    for seed in 0..5 {
        let (g, z, _, _) = small_instance(100 + seed);
        let f = fit(&g, &z, &FitConfig::with_lambda(0.05), None).unwrap();
        let x = f.theta_hat.to_vec();
        let analytic = nll_grad(&f.theta_hat, &g, &z).unwrap();
        let fd = fd_gradient(&x, &dense_data(&g, &z), 1e-5);
        for (a, b) in analytic.iter().zip(&fd) {
            assert!((a - b).abs() / a.abs().max(1.0) < 1e-6);
        }
    }
}

#[test]
fn rescaled_route_agrees() {
    for seed in 0..5 {
        let (g, z, lambda, _) = small_instance(200 + seed);
        let cfg = FitConfig::with_lambda(lambda);
        let a = fit(&g, &z, &cfg, None).unwrap();
        let b = fit_rescaled(&g, &z, lambda * (z.n() as f64).sqrt(), &cfg).unwrap();
        assert_eq!(a.support, b.support);
        assert!((a.objective - b.objective).abs() < 1e-8);
    }
}
