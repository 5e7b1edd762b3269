//! U-statistics `G_j` of facet configurations and incremental updates.
//!
//! `G_j(x) = sum over unordered j-subsets of x of H^(d-j)(common intersection)`.
//! The unordered-subset form equals the paper-style ordered sum with its
//! `1/j!` factor and avoids factorial cancellation in floating point. Only
//! subsets with pairwise distinct orientations can contribute, so iteration
//! walks the orientation buckets.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{measure_of, Facet, ModelParams};

/// A finite facet configuration: one sample of the process.
///
/// Storage order carries no meaning. The per-orientation index buckets are
/// maintained on every mutation and always partition `0..len`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Configuration {
    facets: Vec<Facet>,
    buckets: Vec<Vec<usize>>,
    d: usize,
}

impl Configuration {
    pub fn new(facets: Vec<Facet>, params: &ModelParams) -> Result<Self> {
        let mut cfg = Configuration::empty(params);
        for f in facets {
            cfg.try_push(f)?;
        }
        Ok(cfg)
    }

    pub fn empty(params: &ModelParams) -> Self {
        Configuration { facets: Vec::new(), buckets: vec![Vec::new(); params.d], d: params.d }
    }

    pub fn len(&self) -> usize {
        self.facets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facets.is_empty()
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn dimension(&self) -> usize {
        self.d
    }

    /// Member indices per orientation (0-based axis order).
    pub fn orientation_buckets(&self) -> &[Vec<usize>] {
        &self.buckets
    }

    pub fn orientation_counts(&self) -> Vec<usize> {
        self.buckets.iter().map(|b| b.len()).collect()
    }

    pub fn distinct_orientations(&self) -> usize {
        self.buckets.iter().filter(|b| !b.is_empty()).count()
    }

    fn try_push(&mut self, f: Facet) -> Result<()> {
        if f.center.len() != self.d {
            return Err(Error::InvalidArgument(format!(
                "facet centre has {} coordinates, configuration has d={}",
                f.center.len(),
                self.d
            )));
        }
        if f.orientation < 1 || f.orientation > self.d {
            return Err(Error::InvalidArgument(format!(
                "facet orientation {} outside 1..={}",
                f.orientation, self.d
            )));
        }
        self.push(f);
        Ok(())
    }

    /// Adds a facet assumed to satisfy the invariants (sampler hot path).
    pub fn push(&mut self, f: Facet) {
        debug_assert_eq!(f.center.len(), self.d);
        let axis = f.axis();
        self.buckets[axis].push(self.facets.len());
        self.facets.push(f);
    }

    /// Removes and returns the facet at `idx` in O(n) bucket fixup.
    pub fn swap_remove(&mut self, idx: usize) -> Facet {
        let removed_axis = self.facets[idx].axis();
        let last = self.facets.len() - 1;
        let bucket = &mut self.buckets[removed_axis];
        bucket.swap_remove(bucket.iter().position(|&i| i == idx).unwrap());
        if idx != last {
            let moved_axis = self.facets[last].axis();
            let bucket = &mut self.buckets[moved_axis];
            let pos = bucket.iter().position(|&i| i == last).unwrap();
            bucket[pos] = idx;
        }
        self.facets.swap_remove(idx)
    }

    /// Re-centres the facet at `idx`; its orientation (and bucket) stay put.
    pub fn replace_center(&mut self, idx: usize, center: Vec<f64>) {
        debug_assert_eq!(center.len(), self.d);
        self.facets[idx].center = center;
    }
}

/// `G_j` of the configuration: sum of `H^(d-j)` over unordered j-subsets.
pub fn g_stat(config: &Configuration, j: usize, params: &ModelParams) -> Result<f64> {
    check_order(j, params)?;
    Ok(g_sum(config, j, params.b))
}

/// `[G_1, ..., G_j_max]` in one call.
pub fn g_stat_all(config: &Configuration, j_max: usize, params: &ModelParams) -> Result<Vec<f64>> {
    check_order(j_max, params)?;
    Ok((1..=j_max).map(|j| g_sum(config, j, params.b)).collect())
}

/// Sum of `H^(d-j)(S + u)` over all `(j-1)`-subsets `S` of the configuration,
/// i.e. `G_j(config + u) - G_j(config)`. `u` need not be a member.
pub fn delta_g(config: &Configuration, u: &Facet, j: usize, params: &ModelParams) -> Result<f64> {
    check_order(j, params)?;
    if u.center.len() != params.d || u.orientation < 1 || u.orientation > params.d {
        return Err(Error::InvalidArgument("probe facet does not match the model".into()));
    }
    Ok(delta_sum(config, u, j, params.b))
}

/// Unnormalized log-density `sum_i nu_i G_i` (the normalizer is never needed).
pub fn energy(config: &Configuration, params: &ModelParams) -> Result<f64> {
    let mut total = 0.0;
    for (i, &nu) in params.nu.iter().enumerate() {
        if nu != 0.0 {
            total += nu * g_stat(config, i + 1, params)?;
        }
    }
    Ok(total)
}

fn check_order(j: usize, params: &ModelParams) -> Result<()> {
    if j < 1 || j > params.d {
        return Err(Error::InvalidArgument(format!(
            "statistic order must lie in 1..=d={}, got {}",
            params.d, j
        )));
    }
    Ok(())
}

pub(crate) fn g_sum(config: &Configuration, j: usize, b: f64) -> f64 {
    let mut total = 0.0;
    let mut stack: Vec<&Facet> = Vec::with_capacity(j);
    tuples_over_buckets(config, 0, j, &mut stack, &mut |facets| {
        total += measure_of(facets, config.d, b);
    });
    total
}

pub(crate) fn delta_sum(config: &Configuration, u: &Facet, j: usize, b: f64) -> f64 {
    let mut total = 0.0;
    let mut stack: Vec<&Facet> = Vec::with_capacity(j);
    stack.push(u);
    tuples_excluding_axis(config, u.axis(), 0, j - 1, &mut stack, &mut |facets| {
        total += measure_of(facets, config.d, b);
    });
    total
}

/// Visits every facet tuple with strictly increasing orientation, one member
/// drawn per chosen bucket. Equivalent to all distinct-orientation subsets.
fn tuples_over_buckets<'a>(
    config: &'a Configuration,
    next_axis: usize,
    remaining: usize,
    stack: &mut Vec<&'a Facet>,
    visit: &mut impl FnMut(&[&'a Facet]),
) {
    if remaining == 0 {
        visit(stack);
        return;
    }
    if next_axis + remaining > config.d {
        return;
    }
    for axis in next_axis..=(config.d - remaining) {
        for &idx in &config.buckets[axis] {
            stack.push(&config.facets[idx]);
            tuples_over_buckets(config, axis + 1, remaining - 1, stack, visit);
            stack.pop();
        }
    }
}

fn tuples_excluding_axis<'a>(
    config: &'a Configuration,
    excluded: usize,
    next_axis: usize,
    remaining: usize,
    stack: &mut Vec<&'a Facet>,
    visit: &mut impl FnMut(&[&'a Facet]),
) {
    if remaining == 0 {
        visit(stack);
        return;
    }
    for axis in next_axis..config.d {
        if axis == excluded {
            continue;
        }
        for &idx in &config.buckets[axis] {
            stack.push(&config.facets[idx]);
            tuples_excluding_axis(config, excluded, axis + 1, remaining - 1, stack, visit);
            stack.pop();
        }
    }
}
