//! Small numeric helpers shared across modules. Counting stays in exact
//! integer arithmetic until the final conversion to `f64`.

/// `n!` as `u128`; fine for the `n <= 34` range the guards allow.
pub(crate) fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

/// Binomial coefficient with the convention `C(n,k) = 0` for `k > n`.
pub(crate) fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut num: u128 = 1;
    for i in 0..k {
        num = num * (n - i) as u128 / (i + 1) as u128;
    }
    num
}

/// Falling product `hi * (hi-1) * ... * (lo+1)`, i.e. `hi! / lo!`.
pub(crate) fn falling_ratio(hi: usize, lo: usize) -> u128 {
    debug_assert!(lo <= hi);
    ((lo + 1)..=hi).map(|t| t as u128).product()
}

pub(crate) fn ln_factorial(n: u64) -> f64 {
    statrs::function::gamma::ln_gamma(n as f64 + 1.0)
}

/// Sample mean and unbiased variance; test-only oracle, production paths use
/// the streaming accumulator below.
#[cfg(test)]
pub(crate) fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// Welford accumulator. A constant stream yields mean equal to the constant
/// and variance exactly 0, which downstream code relies on to report exact
/// results (zero stderr) for degenerate MC integrands.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct RunningMoments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl RunningMoments {
    pub(crate) fn new() -> Self {
        Self::default()
    }

    pub(crate) fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub(crate) fn mean(&self) -> f64 {
        self.mean
    }

    /// Standard error of the mean (unbiased variance over n).
    pub(crate) fn stderr(&self) -> f64 {
        if self.n < 2 {
            return f64::NAN;
        }
        (self.m2 / (self.n - 1) as f64 / self.n as f64).max(0.0).sqrt()
    }
}

/// Eigenvalues of a small symmetric matrix by cyclic Jacobi rotations.
/// Plenty for the `d <= 20` covariance blocks handled here.
pub(crate) fn symmetric_eigenvalues(matrix: &[Vec<f64>]) -> Vec<f64> {
    let n = matrix.len();
    let mut a: Vec<Vec<f64>> = matrix.to_vec();
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[p][q] * a[p][q];
            }
        }
        if off < 1e-24 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[p][q].abs() < 1e-30 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i][i]).collect()
}
