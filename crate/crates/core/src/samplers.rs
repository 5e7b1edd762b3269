//! Samplers for the reference Poisson process and the Gibbs facet process:
//! direct Poisson draws, exact rejection, and a birth-death-move chain.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Facet, ModelParams};
use crate::ustats::{delta_sum, g_sum, Configuration};

/// Attempt cap for the rejection sampler before it reports starvation.
pub const DEFAULT_MAX_ATTEMPTS: u64 = 10_000;

/// Default burn-in is `10 * aT` steps: the chain turns the population over in
/// roughly `aT` accepted birth/death moves, and ten turnovers flatten even the
/// overdispersed Poisson start used for stiff interactions.
pub const DEFAULT_BURN_IN_FACTOR: f64 = 10.0;

/// Default spacing between retained states is `50 * aT` steps, a few times the
/// empirical autocorrelation length of `N` and `G_2` at the interaction
/// strengths exercised here.
pub const DEFAULT_SWEEP_FACTOR: f64 = 50.0;

/// The incremental energies are recomputed from scratch this often under
/// debug assertions.
const RECHECK_INTERVAL: u64 = 1000;

/// Drift allowance for the incremental `G_i` bookkeeping. Each step adds one
/// rounding error of size ~1e-16 * G; 1e-7 relative leaves seven orders of
/// headroom over the recheck interval while still catching logic errors.
const RECHECK_TOL: f64 = 1e-7;

/// Proposal probabilities must sum to one up to accumulated parse rounding.
const PROB_SUM_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplerMethod {
    Poisson,
    Rejection,
    Mcmc,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerOptions {
    pub method: SamplerMethod,
    #[serde(default = "default_max_attempts")]
    pub max_attempts: u64,
    /// Steps discarded before the first retained state; `None` means
    /// `ceil(DEFAULT_BURN_IN_FACTOR * aT)`.
    #[serde(default)]
    pub burn_in: Option<u64>,
    /// Steps between retained states; `None` means
    /// `ceil(DEFAULT_SWEEP_FACTOR * aT)`.
    #[serde(default)]
    pub sweeps: Option<u64>,
    /// `[birth, death, move]` proposal probabilities.
    #[serde(default = "default_proposal_probs")]
    pub proposal_probs: [f64; 3],
}

fn default_max_attempts() -> u64 {
    DEFAULT_MAX_ATTEMPTS
}

fn default_proposal_probs() -> [f64; 3] {
    [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]
}

impl SamplerOptions {
    pub fn new(method: SamplerMethod) -> Self {
        SamplerOptions {
            method,
            max_attempts: default_max_attempts(),
            burn_in: None,
            sweeps: None,
            proposal_probs: default_proposal_probs(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_attempts == 0 {
            return Err(Error::Validation("sampler.max_attempts must be positive".into()));
        }
        let sum: f64 = self.proposal_probs.iter().sum();
        if self.proposal_probs.iter().any(|p| !p.is_finite() || *p < 0.0)
            || (sum - 1.0).abs() > PROB_SUM_TOL
        {
            return Err(Error::Validation(format!(
                "sampler.proposal_probs must be nonnegative and sum to 1, got {:?}",
                self.proposal_probs
            )));
        }
        Ok(())
    }

    /// `(burn_in, sweeps)` with defaults resolved against the model's `aT`.
    pub fn schedule(&self, params: &ModelParams) -> (u64, u64) {
        let a_t = params.a * params.total_mass();
        let burn = self.burn_in.unwrap_or((DEFAULT_BURN_IN_FACTOR * a_t).ceil() as u64);
        let sweeps = self
            .sweeps
            .unwrap_or((DEFAULT_SWEEP_FACTOR * a_t).ceil() as u64)
            .max(1);
        (burn, sweeps)
    }
}

/// One exact draw from the reference process `eta_a` (with any `nu_1` folded
/// into the intensity, since a first-order energy only rescales `a`).
pub fn sample_poisson<R: Rng + ?Sized>(params: &ModelParams, rng: &mut R) -> Result<Configuration> {
    params.validate()?;
    Ok(poisson_draw(params, rng))
}

pub(crate) fn poisson_draw<R: Rng + ?Sized>(params: &ModelParams, rng: &mut R) -> Configuration {
    let mean = params.a_effective() * params.total_mass();
    let n = Poisson::new(mean).expect("validated params give a positive mean").sample(rng) as usize;
    let mut cfg = Configuration::empty(params);
    for _ in 0..n {
        cfg.push(random_facet(params, rng));
    }
    cfg
}

fn random_facet<R: Rng + ?Sized>(params: &ModelParams, rng: &mut R) -> Facet {
    let orientation = rng.gen_range(1..=params.d);
    let center = params.chi.sample_center(params.b, params.d, rng);
    Facet { center, orientation }
}

#[derive(Clone, Debug)]
pub struct RejectionOutcome {
    pub config: Configuration,
    /// Poisson proposals consumed, including the accepted one.
    pub attempts: u64,
}

/// Exact sampler: propose from `eta_a` and accept with probability
/// `exp(sum_{i>=2} nu_i G_i)`, which lies in (0, 1] whenever the model is
/// valid. Fails with `AcceptanceStarvation` after `max_attempts` proposals.
pub fn sample_gibbs_rejection<R: Rng + ?Sized>(
    params: &ModelParams,
    opts: &SamplerOptions,
    rng: &mut R,
) -> Result<RejectionOutcome> {
    params.validate()?;
    opts.validate()?;
    for attempt in 1..=opts.max_attempts {
        let cfg = poisson_draw(params, rng);
        let mut energy = 0.0;
        for (idx, &nu) in params.nu.iter().enumerate().skip(1) {
            if nu != 0.0 {
                energy += nu * g_sum(&cfg, idx + 1, params.b);
            }
        }
        if rng.gen::<f64>() < energy.exp() {
            return Ok(RejectionOutcome { config: cfg, attempts: attempt });
        }
    }
    Err(Error::AcceptanceStarvation {
        attempts: opts.max_attempts,
        rate: 1.0 / opts.max_attempts as f64,
    })
}

/// Proposal/acceptance counters in `[birth, death, move]` order.
#[derive(Clone, Copy, Debug, Default)]
pub struct ChainStats {
    pub steps: u64,
    pub proposed: [u64; 3],
    pub accepted: [u64; 3],
}

impl ChainStats {
    /// Acceptance rates; a kind that was never proposed reports 0.
    pub fn acceptance_rates(&self) -> [f64; 3] {
        let mut rates = [0.0; 3];
        for k in 0..3 {
            if self.proposed[k] > 0 {
                rates[k] = self.accepted[k] as f64 / self.proposed[k] as f64;
            }
        }
        rates
    }
}

/// Metropolis-Hastings birth-death-move chain targeting the Gibbs process.
/// Centres are proposed from `chi / T`, so `chi` cancels from every ratio:
/// birth accepts with `min(1, aT/(n+1) * e^dE)`, death with
/// `min(1, n/(aT) * e^dE)`, move with `min(1, e^dE)`, where `dE` is the full
/// energy change including the `nu_1` term.
pub struct McmcChain<'a> {
    params: &'a ModelParams,
    probs: [f64; 3],
    a_t: f64,
    /// `(order, nu_order)` for every nonzero interaction coefficient.
    active: Vec<(usize, f64)>,
    /// Running `G_order` values, index-aligned with `active`.
    g: Vec<f64>,
    cfg: Configuration,
    stats: ChainStats,
}

impl<'a> McmcChain<'a> {
    /// Starts from a fresh Poisson draw, which overdisperses relative to the
    /// repulsive target and lets replicate chains start spread out.
    pub fn new<R: Rng + ?Sized>(
        params: &'a ModelParams,
        opts: &SamplerOptions,
        rng: &mut R,
    ) -> Result<Self> {
        params.validate()?;
        opts.validate()?;
        let cfg = {
            // The chain handles nu_1 in its own ratios; start from the plain
            // reference intensity so the start stays overdispersed.
            let mut start_params = params.clone();
            start_params.nu = vec![0.0; params.d];
            poisson_draw(&start_params, rng)
        };
        let active: Vec<(usize, f64)> = params
            .nu
            .iter()
            .enumerate()
            .filter(|(_, nu)| **nu != 0.0)
            .map(|(idx, &nu)| (idx + 1, nu))
            .collect();
        let g = active.iter().map(|&(order, _)| g_sum(&cfg, order, params.b)).collect();
        Ok(McmcChain {
            params,
            probs: opts.proposal_probs,
            a_t: params.a * params.total_mass(),
            active,
            g,
            cfg,
            stats: ChainStats::default(),
        })
    }

    pub fn config(&self) -> &Configuration {
        &self.cfg
    }

    pub fn stats(&self) -> &ChainStats {
        &self.stats
    }

    pub fn into_parts(self) -> (Configuration, ChainStats) {
        (self.cfg, self.stats)
    }

    pub fn run<R: Rng + ?Sized>(&mut self, steps: u64, rng: &mut R) {
        for _ in 0..steps {
            self.step(rng);
        }
    }

    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        self.stats.steps += 1;
        let u = rng.gen::<f64>();
        if u < self.probs[0] {
            self.birth(rng);
        } else if u < self.probs[0] + self.probs[1] {
            self.death(rng);
        } else {
            self.shift(rng);
        }
        #[cfg(debug_assertions)]
        if self.stats.steps % RECHECK_INTERVAL == 0 {
            let drift = self.energy_drift();
            debug_assert!(
                drift <= RECHECK_TOL,
                "incremental G bookkeeping drifted by {drift:.3e} after {} steps",
                self.stats.steps
            );
        }
    }

    fn birth<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        self.stats.proposed[0] += 1;
        let u = random_facet(self.params, rng);
        let deltas = self.deltas(&u);
        let de: f64 = self.active.iter().zip(&deltas).map(|(&(_, nu), d)| nu * d).sum();
        let n = self.cfg.len() as f64;
        let ratio = self.a_t / (n + 1.0) * de.exp();
        if rng.gen::<f64>() < ratio {
            self.stats.accepted[0] += 1;
            self.cfg.push(u);
            for (g, d) in self.g.iter_mut().zip(&deltas) {
                *g += d;
            }
        }
    }

    fn death<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        self.stats.proposed[1] += 1;
        let n = self.cfg.len();
        if n == 0 {
            return;
        }
        let idx = rng.gen_range(0..n);
        // delta_sum skips the probe's own orientation bucket, so the deltas
        // are exact even while the facet is still in the configuration.
        let victim = self.cfg.facets()[idx].clone();
        let deltas = self.deltas(&victim);
        let de: f64 = self.active.iter().zip(&deltas).map(|(&(_, nu), d)| -nu * d).sum();
        let ratio = n as f64 / self.a_t * de.exp();
        if rng.gen::<f64>() < ratio {
            self.stats.accepted[1] += 1;
            self.cfg.swap_remove(idx);
            for (g, d) in self.g.iter_mut().zip(&deltas) {
                *g -= d;
            }
        }
    }

    fn shift<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let n = self.cfg.len();
        // An empty configuration offers nothing to move: null event, not a
        // rejection, so acc_move stays meaningful at small intensities.
        if n == 0 {
            return;
        }
        self.stats.proposed[2] += 1;
        let idx = rng.gen_range(0..n);
        let old = self.cfg.facets()[idx].clone();
        let moved = Facet {
            center: self.params.chi.sample_center(self.params.b, self.params.d, rng),
            orientation: old.orientation,
        };
        // Same orientation, so the old facet is invisible to both delta
        // enumerations and removal/insertion deltas can share one pass.
        let old_deltas = self.deltas(&old);
        let new_deltas = self.deltas(&moved);
        let de: f64 = self
            .active
            .iter()
            .zip(old_deltas.iter().zip(&new_deltas))
            .map(|(&(_, nu), (od, nd))| nu * (nd - od))
            .sum();
        if rng.gen::<f64>() < de.exp() {
            self.stats.accepted[2] += 1;
            self.cfg.replace_center(idx, moved.center);
            for (g, (od, nd)) in self.g.iter_mut().zip(old_deltas.iter().zip(&new_deltas)) {
                *g += nd - od;
            }
        }
    }

    fn deltas(&self, u: &Facet) -> Vec<f64> {
        self.active
            .iter()
            .map(|&(order, _)| delta_sum(&self.cfg, u, order, self.params.b))
            .collect()
    }

    /// Largest relative deviation between the running `G_i` and a fresh
    /// recomputation.
    pub fn energy_drift(&self) -> f64 {
        self.active
            .iter()
            .zip(&self.g)
            .map(|(&(order, _), &g)| {
                let truth = g_sum(&self.cfg, order, self.params.b);
                (g - truth).abs() / (1.0 + truth.abs())
            })
            .fold(0.0, f64::max)
    }
}

/// One equilibrium draw: burn in, then advance one sweep interval.
pub fn sample_gibbs_mcmc<R: Rng + ?Sized>(
    params: &ModelParams,
    opts: &SamplerOptions,
    rng: &mut R,
) -> Result<(Configuration, ChainStats)> {
    let (burn, sweeps) = opts.schedule(params);
    let mut chain = McmcChain::new(params, opts, rng)?;
    chain.run(burn + sweeps, rng);
    Ok(chain.into_parts())
}

/// One chain, `count` retained states spaced one sweep interval apart.
pub fn mcmc_thinned_samples<R: Rng + ?Sized>(
    params: &ModelParams,
    opts: &SamplerOptions,
    count: usize,
    rng: &mut R,
) -> Result<(Vec<Configuration>, ChainStats)> {
    let (burn, sweeps) = opts.schedule(params);
    let mut chain = McmcChain::new(params, opts, rng)?;
    chain.run(burn, rng);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        chain.run(sweeps, rng);
        out.push(chain.config().clone());
    }
    let (_, stats) = chain.into_parts();
    Ok((out, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{AxisPwc, ChiProfile};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use statrs::distribution::{ChiSquared, ContinuousCDF};

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn mean_and_se_of_var(xs: &[f64]) -> (f64, f64, f64) {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let m4 = xs.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n;
        let se_var = ((m4 - var * var).max(0.0) / n).sqrt();
        (mean, var, se_var)
    }

    #[test]
    fn poisson_counts_match_the_intensity() {
        let params = ModelParams::poisson(2, 1.0, 12.0);
        let mut r = rng(101);
        let counts: Vec<f64> =
            (0..20_000).map(|_| poisson_draw(&params, &mut r).len() as f64).collect();
        let (mean, var, se_var) = mean_and_se_of_var(&counts);
        let lambda = 12.0;
        let se_mean = (lambda / counts.len() as f64).sqrt();
        assert!((mean - lambda).abs() <= 3.0 * se_mean, "mean {mean} vs {lambda}");
        assert!((var - lambda).abs() <= 3.0 * se_var, "var {var} vs {lambda}");
    }

    #[test]
    fn poisson_orientations_are_uniform() {
        let params = ModelParams::poisson(3, 1.0, 9.0);
        let mut r = rng(102);
        let mut counts = [0.0f64; 3];
        for _ in 0..4000 {
            for f in poisson_draw(&params, &mut r).facets() {
                counts[f.axis()] += 1.0;
            }
        }
        let total: f64 = counts.iter().sum();
        let expected = total / 3.0;
        let stat: f64 = counts.iter().map(|c| (c - expected).powi(2) / expected).sum();
        let cutoff = ChiSquared::new(2.0).unwrap().inverse_cdf(0.999);
        assert!(stat < cutoff, "chi-square {stat} vs cutoff {cutoff}");
    }

    #[test]
    fn poisson_centers_follow_the_chi_profile() {
        let chi = ChiProfile::ProductPwc {
            axes: vec![
                AxisPwc { breakpoints: vec![0.5], values: vec![1.0, 3.0] },
                AxisPwc { breakpoints: vec![], values: vec![1.0] },
            ],
        };
        let params = ModelParams { d: 2, b: 1.0, a: 6.0, nu: vec![0.0, 0.0], c: None, chi };
        params.validate().unwrap();
        assert!((params.total_mass() - 2.0).abs() < 1e-12);
        let mut r = rng(103);
        let mut low = 0u64;
        let mut total = 0u64;
        for _ in 0..3000 {
            for f in poisson_draw(&params, &mut r).facets() {
                total += 1;
                if f.center[0] < 0.5 {
                    low += 1;
                }
            }
        }
        // Mass left of 0.5 on axis 1 is 0.5 / 2.0 = 1/4.
        let frac = low as f64 / total as f64;
        let se = (0.25 * 0.75 / total as f64).sqrt();
        assert!((frac - 0.25).abs() <= 3.0 * se, "left fraction {frac}");
    }

    #[test]
    fn nu1_rescales_the_poisson_intensity() {
        let mut params = ModelParams::poisson(2, 1.0, 5.0);
        params.nu[0] = -0.3;
        let lambda = 5.0 * (-0.3f64 * 2.0).exp();
        let mut r = rng(104);
        let counts: Vec<f64> =
            (0..20_000).map(|_| sample_poisson(&params, &mut r).unwrap().len() as f64).collect();
        let (mean, _, _) = mean_and_se_of_var(&counts);
        let se = (lambda / counts.len() as f64).sqrt();
        assert!((mean - lambda).abs() <= 3.0 * se, "mean {mean} vs {lambda}");
    }

    #[test]
    fn rejection_attempts_match_the_poisson_energy() {
        let params = ModelParams::submodel(2, 1.0, 10.0, 2, -0.05);
        let mut r = rng(105);
        // Direct estimate of the acceptance probability E[exp(nu_2 G_2)].
        let m = 20_000;
        let mut p_hat = 0.0;
        for _ in 0..m {
            let cfg = poisson_draw(&params, &mut r);
            p_hat += (-0.05 * g_sum(&cfg, 2, 1.0)).exp();
        }
        p_hat /= m as f64;
        let opts = SamplerOptions::new(SamplerMethod::Rejection);
        let k = 2000;
        let attempts: Vec<f64> = (0..k)
            .map(|_| sample_gibbs_rejection(&params, &opts, &mut r).unwrap().attempts as f64)
            .collect();
        let mean_attempts = attempts.iter().sum::<f64>() / k as f64;
        let geo_se = ((1.0 - p_hat) / (p_hat * p_hat * k as f64)).sqrt();
        assert!(
            (mean_attempts - 1.0 / p_hat).abs() <= 4.0 * geo_se,
            "attempts {mean_attempts} vs 1/p {}",
            1.0 / p_hat
        );
    }

    #[test]
    fn rejection_reports_starvation() {
        let params = ModelParams::submodel(2, 1.0, 20.0, 2, -5.0);
        let opts = SamplerOptions {
            max_attempts: 40,
            ..SamplerOptions::new(SamplerMethod::Rejection)
        };
        let mut r = rng(106);
        match sample_gibbs_rejection(&params, &opts, &mut r) {
            Err(Error::AcceptanceStarvation { attempts, .. }) => assert_eq!(attempts, 40),
            other => panic!("expected starvation, got {other:?}"),
        }
        let msg = Error::AcceptanceStarvation { attempts: 40, rate: 0.025 }.to_string();
        assert!(msg.contains("switch to the mcmc sampler"));
    }

    #[test]
    fn mcmc_matches_poisson_when_nu_is_zero() {
        let params = ModelParams::poisson(2, 1.0, 4.0);
        let opts = SamplerOptions {
            burn_in: Some(400),
            sweeps: Some(80),
            ..SamplerOptions::new(SamplerMethod::Mcmc)
        };
        let mut r = rng(107);
        let (samples, stats) = mcmc_thinned_samples(&params, &opts, 5000, &mut r).unwrap();
        // Bin counts 0..=10 with an aggregated tail, chi-square against the
        // Poisson(4) pmf at the 0.1% level.
        let mut observed = [0.0f64; 12];
        for cfg in &samples {
            observed[cfg.len().min(11)] += 1.0;
        }
        let n = samples.len() as f64;
        let lambda = 4.0f64;
        let mut pmf = [0.0f64; 12];
        let mut acc = (-lambda).exp();
        let mut head = 0.0;
        for (k, slot) in pmf.iter_mut().enumerate().take(11) {
            *slot = acc;
            head += acc;
            acc *= lambda / (k + 1) as f64;
        }
        pmf[11] = 1.0 - head;
        let stat: f64 = observed
            .iter()
            .zip(&pmf)
            .map(|(o, p)| (o - n * p).powi(2) / (n * p))
            .sum();
        let cutoff = ChiSquared::new(11.0).unwrap().inverse_cdf(0.999);
        assert!(stat < cutoff, "chi-square {stat} vs cutoff {cutoff}");
        let rates = stats.acceptance_rates();
        assert!(rates[2] > 0.99, "moves are always accepted when nu = 0, got {rates:?}");
    }

    #[test]
    fn move_only_chain_preserves_the_count() {
        let params = ModelParams::submodel(2, 1.0, 6.0, 2, -0.4);
        let opts = SamplerOptions {
            proposal_probs: [0.0, 0.0, 1.0],
            ..SamplerOptions::new(SamplerMethod::Mcmc)
        };
        let mut r = rng(108);
        let mut chain = McmcChain::new(&params, &opts, &mut r).unwrap();
        let n0 = chain.config().len();
        chain.run(5000, &mut r);
        assert_eq!(chain.config().len(), n0);
        assert!(chain.energy_drift() <= RECHECK_TOL);
    }

    #[test]
    fn same_seed_reproduces_the_chain() {
        let params = ModelParams::submodel(3, 1.0, 5.0, 2, -0.2);
        let opts = SamplerOptions::new(SamplerMethod::Mcmc);
        let draw = |seed| {
            let mut r = rng(seed);
            let (cfg, stats) = sample_gibbs_mcmc(&params, &opts, &mut r).unwrap();
            (cfg, stats)
        };
        let (c1, s1) = draw(109);
        let (c2, s2) = draw(109);
        assert_eq!(c1.len(), c2.len());
        for (f1, f2) in c1.facets().iter().zip(c2.facets()) {
            assert_eq!(f1.orientation, f2.orientation);
            assert_eq!(f1.center, f2.center);
        }
        assert_eq!(s1.accepted, s2.accepted);
        let (c3, _) = draw(110);
        let same = c1.len() == c3.len()
            && c1.facets().iter().zip(c3.facets()).all(|(a, b)| a.center == b.center);
        assert!(!same, "different seeds should differ");
    }

    #[test]
    fn incremental_energies_stay_consistent() {
        let params = ModelParams::submodel(3, 1.0, 8.0, 3, -0.7);
        let opts = SamplerOptions::new(SamplerMethod::Mcmc);
        let mut r = rng(111);
        let mut chain = McmcChain::new(&params, &opts, &mut r).unwrap();
        chain.run(4000, &mut r);
        assert!(chain.energy_drift() <= RECHECK_TOL, "drift {}", chain.energy_drift());
    }

    #[test]
    fn schedule_resolves_defaults_from_a_t() {
        let params = ModelParams::poisson(2, 1.0, 7.0);
        let opts = SamplerOptions::new(SamplerMethod::Mcmc);
        assert_eq!(opts.schedule(&params), (70, 350));
        let explicit = SamplerOptions {
            burn_in: Some(5),
            sweeps: Some(9),
            ..SamplerOptions::new(SamplerMethod::Mcmc)
        };
        assert_eq!(explicit.schedule(&params), (5, 9));
    }

    #[test]
    fn options_validation_rejects_bad_probabilities() {
        let mut opts = SamplerOptions::new(SamplerMethod::Mcmc);
        opts.proposal_probs = [0.5, 0.6, 0.1];
        assert!(opts.validate().is_err());
        opts.proposal_probs = [0.5, -0.1, 0.6];
        assert!(opts.validate().is_err());
        opts.proposal_probs = [0.25, 0.25, 0.5];
        assert!(opts.validate().is_ok());
    }
}
