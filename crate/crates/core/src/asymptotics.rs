//! Asymptotic quantities of the facet process: correlation-function limits,
//! the R-count polynomials, the truncated Poisson-type series with certified
//! tails, the moment integrals I_j and I_kl, the limit covariance matrix, and
//! Wick joint moments.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{measure_of, Facet, ModelParams};
use crate::numeric::{binomial, falling_ratio, ln_factorial, symmetric_eigenvalues, RunningMoments};
use crate::ustats::{delta_sum, g_sum};
use crate::{combinatorics, samplers};

/// Series cost grows as N^d; above four dimensions a certified truncation is
/// out of reach on a desktop.
pub const MAX_SERIES_DIM: usize = 4;

/// Hard cap on the number of series terms regardless of dimension.
const MAX_SERIES_TERMS: f64 = 6e8;

/// Default certified tail mass for [`i_series`].
pub const DEFAULT_TAIL_TOLERANCE: f64 = 1e-9;

/// MC dimension guard shared with the moment integrals.
pub(crate) const MAX_MC_DIMENSION: usize = 40;

/// A Monte Carlo estimate with its standard error.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct McEstimate {
    pub value: f64,
    pub stderr: f64,
}

/// MC integral plus the closed form available when `chi` is constant.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct IntegralEstimate {
    pub value: f64,
    pub stderr: f64,
    pub closed_form: Option<f64>,
}

/// Limit of the p-point correlation function when the p facets carry `k`
/// distinct orientations: `((d-k)!/(c-1-k)!) / (d!/(c-1)!)`, and 0 once
/// `k >= c` (a c-th distinct orientation forces an interaction, which the
/// limit process cannot afford).
pub fn rho_limit(k: usize, c: usize, d: usize) -> Result<f64> {
    if !(2..=d).contains(&c) {
        return Err(Error::InvalidArgument(format!("need 2 <= c <= d, got c={c}, d={d}")));
    }
    if k > d {
        return Err(Error::InvalidArgument(format!("need k <= d, got k={k}, d={d}")));
    }
    if k >= c {
        return Ok(0.0);
    }
    Ok(falling_ratio(d - k, c - 1 - k) as f64 / falling_ratio(d, c - 1) as f64)
}

/// Limit of the series [`i_series`]: the number of unordered ways to zero out
/// `d-c+1` of the free variables, `C(d-p, c-1-p)` (0 when `p = c`).
///
/// The source recursion counts ordered selections, which inflates this by
/// `(d-c+1)!`; the inflation cancels in every correlation-function ratio and
/// only shows up when the series is examined on its own (first at d=3, c=2,
/// where the series demonstrably converges to 3, not 6).
pub fn series_limit(c: usize, p: usize, d: usize) -> Result<f64> {
    if c < 2 || p > c || d + 1 < c {
        return Err(Error::InvalidArgument(format!(
            "need c >= 2, p <= c, d >= c-1, got c={c}, p={p}, d={d}"
        )));
    }
    if p >= c {
        return Ok(0.0);
    }
    Ok(binomial(d.saturating_sub(p), c - 1 - p) as f64)
}

/// `R^{c,p}(q,d,n)`: sum over orientation subsets `F` of `[d]` with
/// `c-p <= |F| <= c` and `|F u [q]| + p - q >= c` of `prod_{j in F} n_j`.
/// For `p <= 1` this equals the number of distinct-orientation c-subsets of a
/// configuration with counts `n` plus `p` extra facets oriented `e_1..e_p`;
/// for larger `p` it undercounts multiplicities and serves as a bound.
pub fn r_count(c: usize, p: usize, q: usize, d: usize, n: &[u64]) -> Result<u128> {
    if !(q <= p && p <= c && c <= d) {
        return Err(Error::InvalidArgument(format!(
            "need q <= p <= c <= d, got q={q}, p={p}, c={c}, d={d}"
        )));
    }
    if n.len() != d {
        return Err(Error::InvalidArgument(format!(
            "n must have d={d} entries, got {}",
            n.len()
        )));
    }
    Ok(r_count_raw(c, p, q, d, n))
}

/// The same subset sum without the `c <= d` requirement, which the series of
/// Lemma 2 violates on purpose (its recursion passes `s < c`).
fn r_count_raw(c: usize, p: usize, q: usize, d: usize, n: &[u64]) -> u128 {
    let mut total: u128 = 0;
    for mask in 0u32..(1 << d) {
        let size = mask.count_ones() as usize;
        if size + p < c || size > c {
            continue;
        }
        // |F u [q]| = |F| + q - |F in [q]|
        let in_q = (mask & ((1 << q) - 1)).count_ones() as usize;
        if size + q - in_q + p - q < c {
            continue;
        }
        let mut prod: u128 = 1;
        for j in 0..d {
            if mask >> j & 1 == 1 {
                prod *= n[j] as u128;
                if prod == 0 {
                    break;
                }
            }
        }
        total += prod;
    }
    total
}

/// Parameters of the truncated series `I(a,c,p,d)` of the correlation-limit
/// machinery. `d` here is the series dimension `s`, which the recursion
/// drives below `c`, hence only `d >= c-1` is required.
#[derive(Clone, Copy, Debug)]
pub struct SeriesRequest {
    pub a: f64,
    pub nu: f64,
    pub c: usize,
    pub p: usize,
    pub d: usize,
    pub tail_tolerance: f64,
}

impl SeriesRequest {
    pub fn new(a: f64, nu: f64, c: usize, p: usize, d: usize) -> Self {
        SeriesRequest { a, nu, c, p, d, tail_tolerance: DEFAULT_TAIL_TOLERANCE }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a >= 0.0) || !self.a.is_finite() {
            return Err(Error::InvalidArgument(format!("a must be >= 0, got {}", self.a)));
        }
        if !(self.nu < 0.0) {
            return Err(Error::InvalidArgument(format!("nu must be < 0, got {}", self.nu)));
        }
        if self.c < 2 || self.p > self.c || self.d + 1 < self.c {
            return Err(Error::InvalidArgument(format!(
                "need c >= 2, p <= c, d >= c-1, got c={}, p={}, d={}",
                self.c, self.p, self.d
            )));
        }
        if !(self.tail_tolerance > 0.0) {
            return Err(Error::InvalidArgument("tail_tolerance must be positive".into()));
        }
        Ok(())
    }
}

/// Evaluates `I(a,c,p,d) = sum_n a^|n|/n! exp(nu R^{c,p}(p,d,n) - a(c-1))`
/// truncated at `n_i <= N`, with `N` chosen so a Chernoff-type bound on the
/// discarded mass certifies it below `tail_tolerance`. Returns
/// `(value, certified_tail_bound)`.
pub fn i_series(req: &SeriesRequest) -> Result<(f64, f64)> {
    req.validate()?;
    if req.d > MAX_SERIES_DIM {
        return Err(Error::ResourceLimit(format!(
            "series dimension {} exceeds {MAX_SERIES_DIM}; cost grows as N^d",
            req.d
        )));
    }
    let (a, s, c) = (req.a, req.d, req.c);
    if a == 0.0 {
        // Only n = 0 survives.
        let r0 = r_count_raw(c, req.p, req.p, s, &vec![0; s]) as f64;
        return Ok(((req.nu * r0).exp(), 0.0));
    }

    // Discarded mass (some n_i > N), bounded term by term with exp(nu R) <= 1:
    //   <= s * e^{a(s-c)} * sum_{n>N} a^n/n!
    //   <= s * e^{a(s-c)} * a^{N+1}/(N+1)! * 1/(1 - a/(N+2)),
    // and Stirling (n! >= (n/e)^n) turns the middle factor into
    // exp((N+1)(1 + ln a - ln(N+1))).
    let ln_tail_bound = |n_cap: f64| {
        (s as f64).ln() + a * (s as f64 - c as f64)
            + (n_cap + 1.0) * (1.0 + a.ln() - (n_cap + 1.0).ln())
            - (1.0 - a / (n_cap + 2.0)).ln()
    };
    let mut n_cap = a.ceil().max(1.0);
    let ln_tol = req.tail_tolerance.ln();
    while ln_tail_bound(n_cap) > ln_tol {
        n_cap += (n_cap * 0.05).max(1.0).floor();
        if ((n_cap + 1.0).powi(s as i32)) > MAX_SERIES_TERMS {
            return Err(Error::ResourceLimit(format!(
                "series truncation needs more than {MAX_SERIES_TERMS:.0} terms at d={s}; \
                 loosen tail_tolerance"
            )));
        }
    }
    let tail_bound = ln_tail_bound(n_cap).exp();
    let n_cap = n_cap as u64;

    let ln_a = a.ln();
    let ln_fact: Vec<f64> = (0..=n_cap).map(ln_factorial).collect();
    let qualifying: Vec<Vec<usize>> = (0u32..(1 << s))
        .filter(|mask| {
            let size = mask.count_ones() as usize;
            let in_q = (mask & ((1 << req.p) - 1)).count_ones() as usize;
            size + req.p >= c && size <= c && size + req.p - in_q >= c
        })
        .map(|mask| (0..s).filter(|j| mask >> j & 1 == 1).collect())
        .collect();

    let mut n = vec![0u64; s];
    let mut ln_prefix = vec![0.0f64; s + 1];
    let offset = -a * (c as f64 - 1.0);
    let mut total = 0.0f64;
    loop {
        for i in 0..s {
            ln_prefix[i + 1] = ln_prefix[i] + n[i] as f64 * ln_a - ln_fact[n[i] as usize];
        }
        let mut r = 0.0f64;
        for f_set in &qualifying {
            let mut prod = 1.0f64;
            for &j in f_set {
                prod *= n[j] as f64;
                if prod == 0.0 {
                    break;
                }
            }
            r += prod;
        }
        total += (ln_prefix[s] + req.nu * r + offset).exp();

        // Odometer increment over {0..n_cap}^s.
        let mut level = s;
        loop {
            if level == 0 {
                return Ok((total, tail_bound));
            }
            level -= 1;
            if n[level] < n_cap {
                n[level] += 1;
                break;
            }
            n[level] = 0;
        }
    }
}

/// CRN ratio estimate of the p-point correlation function
/// `rho_p = E exp(E(eta u {x})) / E exp(E(eta))` of the Gibbs process, with
/// interaction energy over orders `i >= 2` (a first-order term is absorbed
/// into the reference intensity and cancels). Both expectations share the
/// same Poisson draws and the stderr comes from the delta method.
pub fn rho_estimate_mc<R: Rng + ?Sized>(
    params: &ModelParams,
    points: &[Facet],
    n_samples: usize,
    rng: &mut R,
) -> Result<McEstimate> {
    params.validate()?;
    if points.is_empty() {
        return Err(Error::InvalidArgument("rho needs at least one probe facet".into()));
    }
    for x in points {
        if x.center.len() != params.d || x.orientation < 1 || x.orientation > params.d {
            return Err(Error::InvalidArgument("probe facet does not match the model".into()));
        }
        if x.center.iter().any(|&z| !(0.0..=params.b).contains(&z)) {
            return Err(Error::InvalidArgument("probe centres must lie in the window".into()));
        }
    }
    if n_samples < 2 {
        return Err(Error::InvalidArgument("need at least 2 MC samples".into()));
    }
    let active: Vec<(usize, f64)> = params
        .nu
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(_, nu)| **nu != 0.0)
        .map(|(idx, &nu)| (idx + 1, nu))
        .collect();
    if active.is_empty() {
        return Ok(McEstimate { value: 1.0, stderr: 0.0 });
    }

    let mut den_exp = Vec::with_capacity(n_samples);
    let mut num_exp = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        let mut cfg = samplers::poisson_draw(params, rng);
        let mut e0 = 0.0;
        for &(order, nu) in &active {
            e0 += nu * g_sum(&cfg, order, params.b);
        }
        let mut extra = 0.0;
        for x in points {
            for &(order, nu) in &active {
                extra += nu * delta_sum(&cfg, x, order, params.b);
            }
            cfg.push(x.clone());
        }
        den_exp.push(e0);
        num_exp.push(e0 + extra);
    }

    let shift = |xs: &[f64]| xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let (s_num, s_den) = (shift(&num_exp), shift(&den_exp));
    let u: Vec<f64> = num_exp.iter().map(|e| (e - s_num).exp()).collect();
    let v: Vec<f64> = den_exp.iter().map(|e| (e - s_den).exp()).collect();
    let n = n_samples as f64;
    let (u_bar, v_bar) = (u.iter().sum::<f64>() / n, v.iter().sum::<f64>() / n);
    if !(v_bar > 0.0) {
        return Err(Error::DegenerateEstimate(format!(
            "denominator underflowed: max log-weights num={s_num:.3}, den={s_den:.3}"
        )));
    }
    let ratio = (s_num - s_den).exp() * u_bar / v_bar;
    let mut var_u = 0.0;
    let mut var_v = 0.0;
    let mut cov = 0.0;
    for (ui, vi) in u.iter().zip(&v) {
        var_u += (ui - u_bar) * (ui - u_bar);
        var_v += (vi - v_bar) * (vi - v_bar);
        cov += (ui - u_bar) * (vi - v_bar);
    }
    let scale = 1.0 / (n * (n - 1.0));
    let rel_var = (var_u / (u_bar * u_bar) + var_v / (v_bar * v_bar)
        - 2.0 * cov / (u_bar * v_bar))
        * scale;
    let stderr = ratio * rel_var.max(0.0).sqrt();
    if !ratio.is_finite() {
        return Err(Error::DegenerateEstimate(format!(
            "ratio not finite: max log-weights num={s_num:.3}, den={s_den:.3}"
        )));
    }
    Ok(McEstimate { value: ratio, stderr })
}

/// Closed form of `I_j` for constant `chi = v`:
/// `v^j b^{j^2} (b^{j+1}(j+3)/(j+1))^{d-j}`. The `b^{j^2}` collects the fixed
/// axes (feasibility always holds in-window); each free axis contributes the
/// mean extent overlap `2b - E range` of `j` uniform centres.
pub fn i_j_closed_form(j: usize, d: usize, b: f64, v: f64) -> f64 {
    let free = b.powi(j as i32 + 1) * (j as f64 + 3.0) / (j as f64 + 1.0);
    v.powi(j as i32) * b.powi((j * j) as i32) * free.powi((d - j) as i32)
}

/// `int_0^1 f_k(u) f_l(u) du` with the overlap profile
/// `f_n(u) = 2 - (n-2 + u^n + (1-u)^n)/n`, the mean of
/// `2 - range({u} u (n-1) uniforms)`, evaluated exactly.
fn coupled_axis_factor(k: usize, l: usize) -> f64 {
    let (kf, lf) = (k as f64, l as f64);
    let r = |n: f64| (n - 1.0) / (n + 1.0);
    // int f_k f_l with f_n(u) = (n-2 + u^n + (1-u)^n)/n; the cross terms are
    // Beta integrals.
    let beta = (ln_factorial(k as u64) + ln_factorial(l as u64)
        - ln_factorial((k + l + 1) as u64))
        .exp();
    let ff = ((kf - 2.0) * (lf - 2.0)
        + 2.0 * (kf - 2.0) / (lf + 1.0)
        + 2.0 * (lf - 2.0) / (kf + 1.0)
        + 2.0 / (kf + lf + 1.0)
        + 2.0 * beta)
        / (kf * lf);
    4.0 - 2.0 * r(kf) - 2.0 * r(lf) + ff
}

/// Closed form of `I_kl` for constant `chi = v`. Axes factorize: the first
/// `min(k,l)` are fixed by both factors, the middle band is free in one
/// factor only, and the remaining axes couple the two factors through the
/// shared centre `s_1`.
pub fn i_kl_closed_form(k: usize, l: usize, d: usize, b: f64, v: f64) -> f64 {
    let (mn, mx) = (k.min(l), k.max(l));
    let coords = (k + l - 1) as i32;
    let g = (mn as f64 + 3.0) / (mn as f64 + 1.0);
    let j = coupled_axis_factor(k, l);
    v.powi(coords)
        * b.powi(coords * d as i32 + (mx - mn) as i32 + 2 * (d - mx) as i32)
        * g.powi((mx - mn) as i32)
        * j.powi((d - mx) as i32)
}

fn check_order(j: usize, d: usize) -> Result<()> {
    if j < 1 || j > d {
        return Err(Error::InvalidArgument(format!("order must lie in 1..=d={d}, got {j}")));
    }
    Ok(())
}

/// MC estimate of `I_j` (orientations fixed to `e_1..e_j`, centres weighted
/// by `chi`), with the closed form attached when `chi` is constant.
pub fn i_j_integral<R: Rng + ?Sized>(
    j: usize,
    params: &ModelParams,
    n_samples: usize,
    rng: &mut R,
) -> Result<IntegralEstimate> {
    params.validate()?;
    check_order(j, params.d)?;
    if n_samples < 2 {
        return Err(Error::InvalidArgument("need at least 2 MC samples".into()));
    }
    let mass = params.total_mass().powi(j as i32);
    let mut acc = RunningMoments::new();
    let mut facets: Vec<Facet> = Vec::with_capacity(j);
    for _ in 0..n_samples {
        facets.clear();
        for i in 0..j {
            facets.push(Facet {
                center: params.chi.sample_center(params.b, params.d, rng),
                orientation: i + 1,
            });
        }
        let refs: Vec<&Facet> = facets.iter().collect();
        acc.push(measure_of(&refs, params.d, params.b));
    }
    Ok(IntegralEstimate {
        value: acc.mean() * mass,
        stderr: acc.stderr() * mass,
        closed_form: params
            .chi
            .constant_value()
            .map(|v| i_j_closed_form(j, params.d, params.b, v)),
    })
}

/// MC estimate of `I_kl` over `k+l-1` centres: the first factor uses facets
/// `(s_1,e_1)..(s_k,e_k)`, the second reuses `s_1` with `e_1` plus
/// `(s_{k+1},e_2)..(s_{k+l-1},e_l)`, exactly as displayed in the theorem.
pub fn i_kl_integral<R: Rng + ?Sized>(
    k: usize,
    l: usize,
    params: &ModelParams,
    n_samples: usize,
    rng: &mut R,
) -> Result<IntegralEstimate> {
    params.validate()?;
    check_order(k, params.d)?;
    check_order(l, params.d)?;
    if n_samples < 2 {
        return Err(Error::InvalidArgument("need at least 2 MC samples".into()));
    }
    let coords = k + l - 1;
    let mass = params.total_mass().powi(coords as i32);
    let mut acc = RunningMoments::new();
    for _ in 0..n_samples {
        let centers: Vec<Vec<f64>> =
            (0..coords).map(|_| params.chi.sample_center(params.b, params.d, rng)).collect();
        let first: Vec<Facet> = (0..k)
            .map(|i| Facet { center: centers[i].clone(), orientation: i + 1 })
            .collect();
        let mut second: Vec<Facet> =
            vec![Facet { center: centers[0].clone(), orientation: 1 }];
        for i in 1..l {
            second.push(Facet { center: centers[k + i - 1].clone(), orientation: i + 1 });
        }
        let first_refs: Vec<&Facet> = first.iter().collect();
        let second_refs: Vec<&Facet> = second.iter().collect();
        acc.push(
            measure_of(&first_refs, params.d, params.b)
                * measure_of(&second_refs, params.d, params.b),
        );
    }
    Ok(IntegralEstimate {
        value: acc.mean() * mass,
        stderr: acc.stderr() * mass,
        closed_form: params
            .chi
            .constant_value()
            .map(|v| i_kl_closed_form(k, l, params.d, params.b, v)),
    })
}

/// Limit covariance of the standardized statistics, the `theta` matrix.
#[derive(Clone, Debug, Serialize)]
pub struct CovarianceMatrix {
    pub dim: usize,
    /// `theta[k-1][l-1]`, full `d x d`.
    pub theta: Vec<Vec<f64>>,
    /// Per-entry stderr when the integrals were MC-estimated.
    pub stderr: Option<Vec<Vec<f64>>>,
    /// Rows/columns with 1-based index `>= zero_from` vanish (`c` for the
    /// Gibbs limit, `d+1` for the Poisson reference).
    pub zero_from: usize,
}

impl CovarianceMatrix {
    /// 1-based lookup.
    pub fn entry(&self, k: usize, l: usize) -> f64 {
        self.theta[k - 1][l - 1]
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for k in 0..self.dim {
            for l in 0..k {
                worst = worst.max((self.theta[k][l] - self.theta[l][k]).abs());
            }
        }
        worst
    }

    /// Eigenvalues of the non-vanishing leading block.
    pub fn leading_eigenvalues(&self) -> Vec<f64> {
        let m = (self.zero_from - 1).min(self.dim);
        if m == 0 {
            return Vec::new();
        }
        let block: Vec<Vec<f64>> =
            (0..m).map(|k| (0..m).map(|l| self.theta[k][l]).collect()).collect();
        symmetric_eigenvalues(&block)
    }
}

fn fill_covariance<R: Rng + ?Sized>(
    params: &ModelParams,
    active: usize,
    coefficient: impl Fn(usize, usize) -> f64,
    n_samples: usize,
    rng: &mut R,
) -> Result<CovarianceMatrix> {
    let d = params.d;
    let mut theta = vec![vec![0.0; d]; d];
    let analytic = params.chi.constant_value();
    let mut stderr = if analytic.is_some() { None } else { Some(vec![vec![0.0; d]; d]) };
    for k in 1..=active.min(d) {
        for l in k..=active.min(d) {
            let coef = coefficient(k, l);
            let (i_kl, se) = match analytic {
                Some(v) => (i_kl_closed_form(k, l, d, params.b, v), 0.0),
                None => {
                    let est = i_kl_integral(k, l, params, n_samples, rng)?;
                    (est.value, est.stderr)
                }
            };
            theta[k - 1][l - 1] = coef * i_kl;
            theta[l - 1][k - 1] = coef * i_kl;
            if let Some(err) = stderr.as_mut() {
                err[k - 1][l - 1] = coef.abs() * se;
                err[l - 1][k - 1] = coef.abs() * se;
            }
        }
    }
    Ok(CovarianceMatrix { dim: d, theta, stderr, zero_from: active + 1 })
}

/// Theorem covariance for the interacting submodel:
/// `theta_kl = (c-1)/d^{k+l-1} C(c-2,k-1) C(c-2,l-1) I_kl`, vanishing for
/// `k >= c` or `l >= c`.
pub fn covariance_limit<R: Rng + ?Sized>(
    params: &ModelParams,
    n_samples: usize,
    rng: &mut R,
) -> Result<CovarianceMatrix> {
    params.validate()?;
    let c = params.effective_c().ok_or_else(|| {
        Error::Validation(
            "covariance_limit needs an interacting submodel (some nu_i < 0, i >= 2); \
             use covariance_limit_poisson for the reference process"
            .into(),
        )
    })?;
    let d = params.d;
    let coef = move |k: usize, l: usize| {
        (c as f64 - 1.0) / (d as f64).powi((k + l - 1) as i32)
            * combinatorics::binomial_f64(c - 2, k - 1)
            * combinatorics::binomial_f64(c - 2, l - 1)
    };
    fill_covariance(params, c - 1, coef, n_samples, rng)
}

/// Reference-process covariance:
/// `theta_kl = d/d^{k+l-1} C(d-1,k-1) C(d-1,l-1) I_kl` on the full matrix.
pub fn covariance_limit_poisson<R: Rng + ?Sized>(
    params: &ModelParams,
    n_samples: usize,
    rng: &mut R,
) -> Result<CovarianceMatrix> {
    params.validate()?;
    let d = params.d;
    let coef = move |k: usize, l: usize| {
        d as f64 / (d as f64).powi((k + l - 1) as i32)
            * combinatorics::binomial_f64(d - 1, k - 1)
            * combinatorics::binomial_f64(d - 1, l - 1)
    };
    fill_covariance(params, d, coef, n_samples, rng)
}

/// L2 limit of `G_j / a^j` for the submodel: `I_j C(c-1,j) / d^j`, exactly 0
/// once `j >= c`.
pub fn asymptotic_mean<R: Rng + ?Sized>(
    j: usize,
    params: &ModelParams,
    n_samples: usize,
    rng: &mut R,
) -> Result<McEstimate> {
    params.validate()?;
    check_order(j, params.d)?;
    let c = params.effective_c().ok_or_else(|| {
        Error::Validation(
            "asymptotic_mean needs an interacting submodel; \
             use poisson_mean_scaled for the reference process"
            .into(),
        )
    })?;
    if j >= c {
        return Ok(McEstimate { value: 0.0, stderr: 0.0 });
    }
    scaled_mean(j, params, combinatorics::binomial_f64(c - 1, j), n_samples, rng)
}

/// Exact-in-`a` Poisson mean `E G_j(eta_a) / a^j = I_j C(d,j) / d^j`.
pub fn poisson_mean_scaled<R: Rng + ?Sized>(
    j: usize,
    params: &ModelParams,
    n_samples: usize,
    rng: &mut R,
) -> Result<McEstimate> {
    params.validate()?;
    check_order(j, params.d)?;
    scaled_mean(j, params, combinatorics::binomial_f64(params.d, j), n_samples, rng)
}

fn scaled_mean<R: Rng + ?Sized>(
    j: usize,
    params: &ModelParams,
    count: f64,
    n_samples: usize,
    rng: &mut R,
) -> Result<McEstimate> {
    let scale = count / (params.d as f64).powi(j as i32);
    match params.chi.constant_value() {
        Some(v) => Ok(McEstimate {
            value: i_j_closed_form(j, params.d, params.b, v) * scale,
            stderr: 0.0,
        }),
        None => {
            let est = i_j_integral(j, params, n_samples, rng)?;
            Ok(McEstimate { value: est.value * scale, stderr: est.stderr * scale })
        }
    }
}

/// Joint moment of centered Gaussian coordinates via Isserlis: sum over
/// perfect matchings of the order multiset of the product of `theta` entries.
/// Odd multisets give 0.
pub fn wick_joint_moment(orders: &[usize], sigma: &CovarianceMatrix) -> Result<f64> {
    for &o in orders {
        check_order(o, sigma.dim)?;
    }
    if orders.len() % 2 == 1 {
        return Ok(0.0);
    }
    let pairings = combinatorics::enumerate_pairings(orders.len())?;
    let mut total = 0.0;
    for pairing in &pairings {
        let mut prod = 1.0;
        for &(i, j) in pairing {
            prod *= sigma.entry(orders[i], orders[j]);
        }
        total += prod;
    }
    Ok(total)
}
