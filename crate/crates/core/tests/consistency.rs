//! Cross-module agreement through the public API: the three samplers, the
//! exact two-orientation count law, the moment engine, and the covariance
//! limits must all tell the same story about the d=2 model.

use facets_core::asymptotics::{covariance_limit, rho_estimate_mc};
use facets_core::geometry::{Facet, ModelParams};
use facets_core::harness::ks_two_sample;
use facets_core::moments::{centered_moment_assembly, poisson_mixed_moment, MomentRequest};
use facets_core::reference::TwoOrientationLaw;
use facets_core::samplers::{
    mcmc_thinned_samples, sample_gibbs_rejection, sample_poisson, SamplerMethod, SamplerOptions,
};
use facets_core::ustats::g_stat;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const SE_FACTOR: f64 = 3.5;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[test]
fn poisson_sampler_matches_the_exact_law() {
    let params = ModelParams::poisson(2, 1.0, 6.0);
    let law = TwoOrientationLaw::new(6.0, 0.0).unwrap();
    let mut r = rng(1);
    let mut counts = Vec::new();
    let mut g2 = Vec::new();
    for _ in 0..4000 {
        let cfg = sample_poisson(&params, &mut r).unwrap();
        counts.push(cfg.len() as f64);
        g2.push(g_stat(&cfg, 2, &params).unwrap());
    }
    let (mean_n, se_n) = mean_and_se(&counts);
    assert!((mean_n - law.mean_count()).abs() <= SE_FACTOR * se_n, "N mean {mean_n}");
    let (mean_g2, se_g2) = mean_and_se(&g2);
    assert!(
        (mean_g2 - law.mean_g(2).unwrap()).abs() <= SE_FACTOR * se_g2,
        "G_2 mean {mean_g2} vs {}",
        law.mean_g(2).unwrap()
    );
}

#[test]
fn gibbs_samplers_agree_with_each_other_and_the_law() {
    let params = ModelParams::submodel(2, 1.0, 3.0, 2, -0.5);
    let law = TwoOrientationLaw::new(3.0, -0.5).unwrap();
    let opts = SamplerOptions::new(SamplerMethod::Rejection);
    let mut r = rng(2);
    let n_samples = 3000;

    let mut rej_n = Vec::new();
    let mut attempts = 0u64;
    for _ in 0..n_samples {
        let out = sample_gibbs_rejection(&params, &opts, &mut r).unwrap();
        attempts += out.attempts;
        rej_n.push(out.config.len() as f64);
    }
    // Attempts per accepted sample estimate 1/Z.
    let z_hat = n_samples as f64 / attempts as f64;
    let z = law.acceptance_probability();
    let z_se = (z * (1.0 - z) / attempts as f64).sqrt();
    assert!((z_hat - z).abs() <= SE_FACTOR * z_se, "Z_hat {z_hat} vs {z}");
    let (mean_rej, se_rej) = mean_and_se(&rej_n);
    assert!(
        (mean_rej - law.mean_count()).abs() <= SE_FACTOR * se_rej,
        "rejection N mean {mean_rej} vs {}",
        law.mean_count()
    );

    let mcmc_opts = SamplerOptions {
        burn_in: Some(500),
        sweeps: Some(60),
        ..SamplerOptions::new(SamplerMethod::Mcmc)
    };
    let (samples, _) = mcmc_thinned_samples(&params, &mcmc_opts, n_samples, &mut r).unwrap();
    let mcmc_n: Vec<f64> = samples.iter().map(|c| c.len() as f64).collect();
    // Thinned-chain mean has autocorrelation; the iid se is a floor, so test
    // against an inflated allowance instead of pretending independence.
    let (mean_mcmc, se_mcmc) = mean_and_se(&mcmc_n);
    assert!(
        (mean_mcmc - law.mean_count()).abs() <= 2.0 * SE_FACTOR * se_mcmc,
        "mcmc N mean {mean_mcmc} vs {}",
        law.mean_count()
    );

    let ks = ks_two_sample(&rej_n, &mcmc_n).unwrap();
    assert!(ks.p_value > 0.005, "samplers disagree on N: D {} p {}", ks.statistic, ks.p_value);
}

#[test]
fn moment_engine_agrees_with_the_law_and_the_covariance_limit() {
    let a = 5.0;
    let params = ModelParams::poisson(2, 1.0, a);
    let mut r = rng(3);
    // Order-1 requests have constant integrands: the engine is exact.
    let m1 = poisson_mixed_moment(&MomentRequest::new(vec![1]), &params, 10, &mut r).unwrap();
    assert_eq!(m1.stderr, 0.0);
    assert!((m1.value - 2.0 * a).abs() < 1e-10);
    let m2 = poisson_mixed_moment(&MomentRequest::new(vec![2]), &params, 10, &mut r).unwrap();
    assert!((m2.value - (4.0 * a * a + 4.0 * a)).abs() < 1e-9);

    // Submodel variance: the restricted assembly gives exactly 2 for m=(2),
    // which is theta_11 from the covariance formula, which is the a -> inf
    // limit of the exact law's standardized variance.
    let sub = ModelParams::submodel(2, 1.0, 200.0, 2, -0.1);
    let assembled =
        centered_moment_assembly(&MomentRequest::new(vec![2]), &sub, 10, &mut r).unwrap();
    assert!((assembled.value - 2.0).abs() < 1e-12, "assembly {}", assembled.value);
    let sigma = covariance_limit(&sub, 10, &mut r).unwrap();
    assert!((sigma.entry(1, 1) - 2.0).abs() < 1e-12);
    let law_far = TwoOrientationLaw::new(320.0, -0.1).unwrap();
    assert!(
        (law_far.var_g1_standardized() - sigma.entry(1, 1)).abs() < 2e-4,
        "law variance at a=320: {}",
        law_far.var_g1_standardized()
    );
}

#[test]
fn rho_estimator_matches_the_exact_correlation() {
    let params = ModelParams::submodel(2, 1.0, 8.0, 2, -0.2);
    let law = TwoOrientationLaw::new(8.0, -0.2).unwrap();
    let mut r = rng(4);
    let probe = vec![Facet::new(vec![0.5, 0.5], 1)];
    let est = rho_estimate_mc(&params, &probe, 120_000, &mut r).unwrap();
    assert!(
        (est.value - law.rho_one()).abs() <= SE_FACTOR * est.stderr,
        "rho_hat {} +- {} vs exact {}",
        est.value,
        est.stderr,
        law.rho_one()
    );

    let pair = vec![Facet::new(vec![0.5, 0.5], 1), Facet::new(vec![0.25, 0.25], 2)];
    let est2 = rho_estimate_mc(&params, &pair, 120_000, &mut r).unwrap();
    assert!(
        (est2.value - law.rho_two_diff()).abs() <= SE_FACTOR * est2.stderr,
        "rho2_hat {} +- {} vs exact {}",
        est2.value,
        est2.stderr,
        law.rho_two_diff()
    );
}
