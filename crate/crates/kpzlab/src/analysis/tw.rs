//! Reference distribution for the GUE Tracy-Widom law, generated from the
//! tridiagonal `beta = 2` Hermite ensemble.
//!
//! The matrix has independent diagonal entries `N(0, 1)` and off-diagonal
//! entries `e_i` with `e_i^2 ~ Gamma(n - i, 1)` (that is `chi^2_{2(n-i)} / 2`),
//! `i = 1..n-1`. Its spectrum is that of the GUE with `E|H_ij|^2 = 1`, whose
//! largest eigenvalue satisfies `n^{1/6} (lambda_max - 2 sqrt(n)) -> TW_2`.
//! The largest eigenvalue is located by Sturm-sequence bisection.

use std::sync::OnceLock;

use rand::Rng;
use rand_distr::{Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::harness::run_replicas;

/// Number of eigenvalues of the tridiagonal matrix below `x`.
fn sturm_count(diag: &[f64], off2: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = diag[0] - x;
    if q < 0.0 {
        count += 1;
    }
    for i in 1..diag.len() {
        let prev = if q == 0.0 { f64::EPSILON } else { q };
        q = diag[i] - x - off2[i - 1] / prev;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Largest eigenvalue of the symmetric tridiagonal matrix with diagonal
/// `diag` and squared off-diagonal `off2`, to absolute accuracy `tol`.
pub fn largest_eigenvalue(diag: &[f64], off2: &[f64], tol: f64) -> f64 {
    let n = diag.len();
    let radius = (0..n)
        .map(|i| {
            let l = if i > 0 { off2[i - 1].sqrt() } else { 0.0 };
            let r = if i + 1 < n { off2[i].sqrt() } else { 0.0 };
            diag[i].abs() + l + r
        })
        .fold(0.0, f64::max);
    let (mut lo, mut hi) = (-radius - 1.0, radius + 1.0);
    let guess = 2.0 * (n as f64).sqrt();
    let width = 12.0 * (n as f64).powf(-1.0 / 6.0);
    if sturm_count(diag, off2, guess - width) < n {
        lo = guess - width;
    }
    if sturm_count(diag, off2, guess + width) == n {
        hi = guess + width;
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if sturm_count(diag, off2, mid) == n {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// One rescaled draw `n^{1/6} (lambda_max - 2 sqrt(n))`.
pub fn tw_draw<R: Rng + ?Sized>(rng: &mut R, n: usize) -> f64 {
    let diag: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    let off2: Vec<f64> = (1..n)
        .map(|i| rng.sample(Gamma::new((n - i) as f64, 1.0).expect("positive shape")))
        .collect();
    let scale = (n as f64).powf(1.0 / 6.0);
    let lam = largest_eigenvalue(&diag, &off2, 1e-7 / scale);
    scale * (lam - 2.0 * (n as f64).sqrt())
}

/// Tabulated reference CDF with Monte-Carlo standard errors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwReference {
    pub matrix_size: usize,
    pub replicas: usize,
    pub seed: u64,
    pub xs: Vec<f64>,
    pub cdf: Vec<f64>,
    pub stderr: Vec<f64>,
}

/// Grid of the reference table.
pub const TW_GRID: (f64, f64, f64) = (-9.0, 6.0, 0.01);

impl TwReference {
    /// Builds the table from `replicas` draws at matrix size `n`.
    pub fn build(n: usize, replicas: usize, seed: u64, workers: usize) -> Result<Self> {
        if n < 2 || replicas < 2 {
            return Err(invalid("need matrix size >= 2 and at least two replicas"));
        }
        let mut draws = run_replicas(seed, replicas, workers, |_, rng| tw_draw(rng, n));
        draws.sort_by(f64::total_cmp);
        let (lo, hi, step) = TW_GRID;
        let points = ((hi - lo) / step).round() as usize + 1;
        let r = replicas as f64;
        let xs: Vec<f64> = (0..points).map(|i| lo + i as f64 * step).collect();
        let cdf: Vec<f64> = xs.iter().map(|&x| draws.partition_point(|&v| v <= x) as f64 / r).collect();
        let stderr = cdf.iter().map(|&f| (f * (1.0 - f) / r).sqrt()).collect();
        Ok(Self { matrix_size: n, replicas, seed, xs, cdf, stderr })
    }

    /// Piecewise-linear interpolation of the table, 0 and 1 outside it.
    pub fn eval(&self, x: f64) -> f64 {
        let (lo, _, step) = TW_GRID;
        if x <= self.xs[0] {
            return self.cdf[0] * 0.0_f64.max(1.0 - (self.xs[0] - x));
        }
        let last = self.xs.len() - 1;
        if x >= self.xs[last] {
            return 1.0 - (1.0 - self.cdf[last]) * 0.0_f64.max(1.0 - (x - self.xs[last]));
        }
        let h = (x - lo) / step;
        let i = (h.floor() as usize).min(last - 1);
        let f = h - i as f64;
        self.cdf[i] + f * (self.cdf[i + 1] - self.cdf[i])
    }

    /// Inverse of [`eval`](Self::eval) by bisection.
    pub fn quantile(&self, q: f64) -> f64 {
        let (mut a, mut b) = (self.xs[0] - 1.0, self.xs[self.xs.len() - 1] + 1.0);
        for _ in 0..100 {
            let m = 0.5 * (a + b);
            if self.eval(m) < q {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    }

    pub fn median(&self) -> f64 {
        self.quantile(0.5)
    }

    /// CSV `x,F,stderr`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,F,stderr\n");
        for ((x, f), e) in self.xs.iter().zip(&self.cdf).zip(&self.stderr) {
            s.push_str(&format!("{x:.2},{f},{e}\n"));
        }
        s
    }
}

/// Matrix size of the default reference.
pub const TW_DEFAULT_N: usize = 1000;
/// Replica count of the default reference.
pub const TW_DEFAULT_REPLICAS: usize = 100_000;
/// Seed of the default reference.
pub const TW_DEFAULT_SEED: u64 = 0x5457_5245_4632;

/// The default reference, built once per process.
pub fn tw_reference_default() -> &'static TwReference {
    static CELL: OnceLock<TwReference> = OnceLock::new();
    CELL.get_or_init(|| {
        let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
        TwReference::build(TW_DEFAULT_N, TW_DEFAULT_REPLICAS, TW_DEFAULT_SEED, workers)
            .expect("valid default parameters")
    })
}
