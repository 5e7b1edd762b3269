//! Mixed moments of the U-statistic vector through the partition expansion:
//! raw Poisson moments, the centered no-singleton-row assembly at finite
//! intensity, the Gaussian (Wick) limit, and first-moment closed forms.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{
    asymptotic_mean, covariance_limit, poisson_mean_scaled, wick_joint_moment, McEstimate,
    MAX_MC_DIMENSION,
};
use crate::combinatorics::{enumerate_row_partitions, RowPartition, RowShape};
use crate::error::{Error, Result};
use crate::geometry::{measure_of, Facet, ModelParams};
use crate::numeric::{factorial, RunningMoments};

/// Guard: the number of statistic factors in one moment request. The
/// partition count over the slots explodes well before this.
pub const MAX_MOMENT_ROWS: usize = 8;

/// Exponent vector of a mixed moment: `m[j-1]` copies of the order-`j`
/// statistic, e.g. `m = [2, 1]` asks for `E G_1^2 G_2`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MomentRequest {
    pub m: Vec<usize>,
}

impl MomentRequest {
    pub fn new(m: Vec<usize>) -> Self {
        MomentRequest { m }
    }

    /// One entry per factor: `[1, 1, 2]` for `m = [2, 1]`.
    pub fn orders(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for (idx, &count) in self.m.iter().enumerate() {
            out.extend(std::iter::repeat(idx + 1).take(count));
        }
        out
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        if self.m.is_empty() || self.m.len() > d {
            return Err(Error::InvalidArgument(format!(
                "moment exponents must cover orders 1..=j for some j <= d={d}"
            )));
        }
        let rows: usize = self.m.iter().sum();
        if rows == 0 {
            return Err(Error::InvalidArgument("moment request has no factors".into()));
        }
        if rows > MAX_MOMENT_ROWS {
            return Err(Error::ResourceLimit(format!(
                "{rows} statistic factors exceed the K<={MAX_MOMENT_ROWS} guard"
            )));
        }
        Ok(())
    }
}

/// `prod_t 1/j_t!` over the factor orders.
fn factorial_prefactor(orders: &[usize]) -> f64 {
    orders.iter().map(|&j| 1.0 / factorial(j) as f64).product()
}

fn allowed_orientations(params: &ModelParams, restricted: bool) -> Result<Vec<usize>> {
    if restricted {
        let c = params.effective_c().ok_or_else(|| {
            Error::Validation(
                "restricted integrals need an interacting submodel (some nu_i < 0, i >= 2)"
                    .into(),
            )
        })?;
        Ok((1..c).collect())
    } else {
        Ok((1..=params.d).collect())
    }
}

/// Per-row block indices: row `t` reads its facets from these pool slots.
fn row_block_map(partition: &RowPartition) -> Vec<Vec<usize>> {
    let block_of = partition.block_of_slot();
    (0..partition.shape.num_rows())
        .map(|t| partition.shape.slots_of_row(t).map(|s| block_of[s]).collect())
        .collect()
}

/// `prod_rows H^{d-j_t}` evaluated on the pooled block facets.
fn partition_integrand(
    row_blocks: &[Vec<usize>],
    pool: &[Facet],
    d: usize,
    b: f64,
) -> f64 {
    let mut prod = 1.0;
    for blocks in row_blocks {
        let refs: Vec<&Facet> = blocks.iter().map(|&bi| &pool[bi]).collect();
        prod *= measure_of(&refs, d, b);
        if prod == 0.0 {
            return 0.0;
        }
    }
    prod
}

fn draw_pool<R: Rng + ?Sized>(
    pool: &mut Vec<Facet>,
    count: usize,
    params: &ModelParams,
    allowed: &[usize],
    rng: &mut R,
) {
    pool.clear();
    for _ in 0..count {
        let orientation = allowed[rng.gen_range(0..allowed.len())];
        pool.push(Facet {
            center: params.chi.sample_center(params.b, params.d, rng),
            orientation,
        });
    }
}

fn check_mc_budget(blocks: usize, d: usize, n_samples: usize) -> Result<()> {
    if blocks * d > MAX_MC_DIMENSION {
        return Err(Error::ResourceLimit(format!(
            "partition integral spans {blocks} x {d} = {} MC dimensions, above {MAX_MC_DIMENSION}",
            blocks * d
        )));
    }
    if n_samples < 2 {
        return Err(Error::InvalidArgument("need at least 2 MC samples".into()));
    }
    Ok(())
}

pub(crate) fn partition_integral_over<R: Rng + ?Sized>(
    partition: &RowPartition,
    orders: &[usize],
    params: &ModelParams,
    allowed: &[usize],
    n_samples: usize,
    rng: &mut R,
) -> Result<McEstimate> {
    partition.validate()?;
    if partition.shape.rows() != orders {
        return Err(Error::InvalidArgument(format!(
            "partition shape {:?} does not match the factor orders {orders:?}",
            partition.shape.rows()
        )));
    }
    for &j in orders {
        if j < 1 || j > params.d {
            return Err(Error::InvalidArgument(format!(
                "order must lie in 1..=d={}, got {j}",
                params.d
            )));
        }
    }
    let blocks = partition.num_blocks();
    check_mc_budget(blocks, params.d, n_samples)?;
    // Each block integrates against chi(z) dz x (1/d) sum_{allowed} delta_e;
    // the orientation weight 1/d is kept even when the sum is restricted.
    let weight =
        (params.total_mass() * allowed.len() as f64 / params.d as f64).powi(blocks as i32);
    let row_blocks = row_block_map(partition);
    let mut pool = Vec::with_capacity(blocks);
    let mut acc = RunningMoments::new();
    for _ in 0..n_samples {
        draw_pool(&mut pool, blocks, params, allowed, rng);
        acc.push(partition_integrand(&row_blocks, &pool, params.d, params.b));
    }
    Ok(McEstimate { value: acc.mean() * weight, stderr: acc.stderr() * weight })
}

/// MC estimate of one partition integral `PI(sigma)`: every block becomes an
/// independent reference facet and the integrand multiplies the per-row
/// intersection measures. `restricted` limits orientations to the `c-1`
/// surviving ones of the submodel limit.
pub fn partition_integral<R: Rng + ?Sized>(
    partition: &RowPartition,
    orders: &[usize],
    params: &ModelParams,
    restricted: bool,
    n_samples: usize,
    rng: &mut R,
) -> Result<McEstimate> {
    params.validate()?;
    let allowed = allowed_orientations(params, restricted)?;
    partition_integral_over(partition, orders, params, &allowed, n_samples, rng)
}

/// Shared-pool evaluation of `sum_sigma (a T n_o/d)^{|sigma|} PI(sigma)` over
/// a partition family, one CRN pool per MC sample.
fn partition_sum<R: Rng + ?Sized>(
    partitions: &[RowPartition],
    orders: &[usize],
    params: &ModelParams,
    allowed: &[usize],
    n_samples: usize,
    rng: &mut R,
) -> Result<McEstimate> {
    let shape = RowShape::new(orders.to_vec())?;
    let pool_size = shape.k();
    check_mc_budget(pool_size, params.d, n_samples)?;
    let per_block = params.a * params.total_mass() * allowed.len() as f64 / params.d as f64;
    let terms: Vec<(f64, Vec<Vec<usize>>)> = partitions
        .iter()
        .map(|p| (per_block.powi(p.num_blocks() as i32), row_block_map(p)))
        .collect();
    let mut pool = Vec::with_capacity(pool_size);
    let mut acc = RunningMoments::new();
    for _ in 0..n_samples {
        draw_pool(&mut pool, pool_size, params, allowed, rng);
        let mut s = 0.0;
        for (weight, row_blocks) in &terms {
            s += weight * partition_integrand(row_blocks, &pool, params.d, params.b);
        }
        acc.push(s);
    }
    Ok(McEstimate { value: acc.mean(), stderr: acc.stderr() })
}

/// `E prod_j G_j^{m_j}` under the Poisson reference, via
/// `prod_j (1/j!)^{m_j} sum_sigma a^{|sigma|} PI(sigma)` over row-admissible
/// partitions. Factors of order 1 have constant integrands, so requests built
/// from them alone come back with zero stderr.
pub fn poisson_mixed_moment<R: Rng + ?Sized>(
    req: &MomentRequest,
    params: &ModelParams,
    n_samples: usize,
    rng: &mut R,
) -> Result<McEstimate> {
    params.validate()?;
    req.validate(params.d)?;
    let orders = req.orders();
    let shape = RowShape::new(orders.clone())?;
    let partitions = enumerate_row_partitions(&shape)?;
    let allowed = allowed_orientations(params, false)?;
    let est = partition_sum(&partitions, &orders, params, &allowed, n_samples, rng)?;
    let coef = factorial_prefactor(&orders);
    Ok(McEstimate { value: coef * est.value, stderr: coef * est.stderr })
}

/// Finite-intensity centered moment `E prod_j (G_j - E G_j)^{m_j}` scaled by
/// `a^{-sum (j-1/2) m_j}`. Centering removes every partition with a pure
/// singleton row; the submodel additionally restricts orientations to the
/// surviving `c-1`, which is the finite-`a` shadow of the Wick limit.
pub fn centered_moment_assembly<R: Rng + ?Sized>(
    req: &MomentRequest,
    params: &ModelParams,
    n_samples: usize,
    rng: &mut R,
) -> Result<McEstimate> {
    params.validate()?;
    req.validate(params.d)?;
    let orders = req.orders();
    if let Some(c) = params.effective_c() {
        if orders.iter().any(|&j| j >= c) {
            return Err(Error::InvalidArgument(format!(
                "orders must stay below c={c}: statistics of order >= c degenerate \
                 faster than a^{{j-1/2}}"
            )));
        }
    }
    let shape = RowShape::new(orders.clone())?;
    let partitions: Vec<RowPartition> = enumerate_row_partitions(&shape)?
        .into_iter()
        .filter(|p| (0..p.shape.num_rows()).all(|t| !p.row_is_pure_singleton(t)))
        .collect();
    let allowed = allowed_orientations(params, params.effective_c().is_some())?;
    let est = partition_sum(&partitions, &orders, params, &allowed, n_samples, rng)?;
    let m_scale: f64 = orders.iter().map(|&j| j as f64 - 0.5).sum();
    let scale = factorial_prefactor(&orders) * params.a.powf(-m_scale);
    Ok(McEstimate { value: scale * est.value, stderr: scale * est.stderr })
}

/// Limit of the centered moment as `a -> infinity`: the Wick/Isserlis value
/// under the theorem covariance. Odd total order vanishes identically.
pub fn centered_moment_leading<R: Rng + ?Sized>(
    req: &MomentRequest,
    params: &ModelParams,
    n_samples: usize,
    rng: &mut R,
) -> Result<f64> {
    params.validate()?;
    req.validate(params.d)?;
    let c = params.effective_c().ok_or_else(|| {
        Error::Validation(
            "centered_moment_leading needs an interacting submodel; the reference process \
             has its own covariance via covariance_limit_poisson"
                .into(),
        )
    })?;
    let orders = req.orders();
    if orders.iter().any(|&j| j >= c) {
        return Err(Error::InvalidArgument(format!(
            "orders must stay below c={c}: statistics of order >= c degenerate \
             faster than a^{{j-1/2}}"
        )));
    }
    if orders.len() % 2 == 1 {
        return Ok(0.0);
    }
    let sigma = covariance_limit(params, n_samples, rng)?;
    wick_joint_moment(&orders, &sigma)
}

/// Which expectation [`expected_g`] reports.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GExpectationMode {
    /// `E G_j(eta_a)`, exact in `a`.
    PoissonExact,
    /// Leading submodel behaviour `a^j I_j C(c-1,j)/d^j`.
    GibbsLimit,
}

/// First moment of `G_j`, either exactly under the reference process or to
/// leading order under the submodel.
pub fn expected_g<R: Rng + ?Sized>(
    j: usize,
    params: &ModelParams,
    mode: GExpectationMode,
    n_samples: usize,
    rng: &mut R,
) -> Result<McEstimate> {
    let scaled = match mode {
        GExpectationMode::PoissonExact => poisson_mean_scaled(j, params, n_samples, rng)?,
        GExpectationMode::GibbsLimit => asymptotic_mean(j, params, n_samples, rng)?,
    };
    let a_j = params.a.powi(j as i32);
    Ok(McEstimate { value: a_j * scaled.value, stderr: a_j * scaled.stderr })
}
