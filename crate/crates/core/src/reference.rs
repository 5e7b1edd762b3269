//! Exact law of the two-orientation planar process (d=2, b=1). Facets span
//! the whole window, so both statistics are functions of the orientation
//! counts alone: G_1 = 2N and G_2 = n_1 n_2. The Gibbs density then reduces
//! to a weighted bivariate Poisson law,
//! `pmf(n_1, n_2) ∝ m^{n_1+n_2}/(n_1! n_2!) e^{nu n_1 n_2}`, `m = a/2`,
//! which this module sums directly. The test suite uses it as an oracle that
//! shares no code with the samplers or the moment machinery.

use crate::error::{Error, Result};
use crate::numeric::ln_factorial;

pub struct TwoOrientationLaw {
    pub a: f64,
    pub nu: f64,
    max_n: usize,
    /// Unnormalized weights `[n_1][n_2]`.
    weights: Vec<Vec<f64>>,
    z: f64,
}

impl TwoOrientationLaw {
    pub fn new(a: f64, nu: f64) -> Result<Self> {
        if !(a >= 1.0) || !a.is_finite() {
            return Err(Error::InvalidArgument(format!("a must be >= 1, got {a}")));
        }
        if nu > 0.0 || !nu.is_finite() {
            return Err(Error::InvalidArgument(format!("nu must be <= 0, got {nu}")));
        }
        let m = a / 2.0;
        // Poisson(m) mass beyond m + 14 sqrt(m) + 60 is far below f64
        // resolution, and the interaction weight only shrinks terms.
        let max_n = (m + 14.0 * m.sqrt() + 60.0).ceil() as usize;
        let ln_m = m.ln();
        let lp: Vec<f64> =
            (0..=max_n).map(|n| -m + n as f64 * ln_m - ln_factorial(n as u64)).collect();
        let weights: Vec<Vec<f64>> = (0..=max_n)
            .map(|n1| {
                (0..=max_n)
                    .map(|n2| (lp[n1] + lp[n2] + nu * (n1 * n2) as f64).exp())
                    .collect()
            })
            .collect();
        let z: f64 = weights.iter().map(|row| row.iter().sum::<f64>()).sum();
        Ok(TwoOrientationLaw { a, nu, max_n, weights, z })
    }

    fn expect(&self, f: impl Fn(usize, usize) -> f64) -> f64 {
        let mut total = 0.0;
        for (n1, row) in self.weights.iter().enumerate() {
            for (n2, w) in row.iter().enumerate() {
                total += w * f(n1, n2);
            }
        }
        total / self.z
    }

    /// `E exp(nu G_2)` under the Poisson reference: the partition function,
    /// which is also the expected acceptance rate of rejection sampling.
    pub fn acceptance_probability(&self) -> f64 {
        self.z
    }

    pub fn joint_pmf(&self, n1: usize, n2: usize) -> f64 {
        if n1 > self.max_n || n2 > self.max_n {
            return 0.0;
        }
        self.weights[n1][n2] / self.z
    }

    /// Law of the total count `N = n_1 + n_2`, truncated at `len`.
    pub fn count_pmf(&self, len: usize) -> Vec<f64> {
        let mut pmf = vec![0.0; len];
        for (n1, row) in self.weights.iter().enumerate() {
            for (n2, w) in row.iter().enumerate() {
                if n1 + n2 < len {
                    pmf[n1 + n2] += w / self.z;
                }
            }
        }
        pmf
    }

    pub fn mean_count(&self) -> f64 {
        self.expect(|n1, n2| (n1 + n2) as f64)
    }

    pub fn var_count(&self) -> f64 {
        let mean = self.mean_count();
        self.expect(|n1, n2| ((n1 + n2) as f64 - mean).powi(2))
    }

    /// `E G_j` for j = 1 (2N) or j = 2 (n_1 n_2).
    pub fn mean_g(&self, j: usize) -> Result<f64> {
        match j {
            1 => Ok(2.0 * self.mean_count()),
            2 => Ok(self.expect(|n1, n2| (n1 * n2) as f64)),
            _ => Err(Error::InvalidArgument(format!("the law covers d=2; got order {j}"))),
        }
    }

    /// Central moment of the standardized `G~_1 = (G_1 - E G_1)/sqrt(a)`.
    pub fn standardized_central_moment_g1(&self, k: u32) -> f64 {
        let mean = 2.0 * self.mean_count();
        self.expect(|n1, n2| (2.0 * (n1 + n2) as f64 - mean).powi(k as i32))
            / self.a.powf(k as f64 / 2.0)
    }

    pub fn var_g1_standardized(&self) -> f64 {
        self.standardized_central_moment_g1(2)
    }

    /// One extra facet: crosses the `n_2` perpendicular ones.
    pub fn rho_one(&self) -> f64 {
        self.expect(|_, n2| (self.nu * n2 as f64).exp())
    }

    /// Two parallel extras: each crosses the `n_2` others, none each other.
    pub fn rho_two_same(&self) -> f64 {
        self.expect(|_, n2| (2.0 * self.nu * n2 as f64).exp())
    }

    /// Two perpendicular extras: `n_2 + n_1` crossings plus their own.
    pub fn rho_two_diff(&self) -> f64 {
        self.expect(|n1, n2| (self.nu * (n1 + n2 + 1) as f64).exp())
    }
}
