//! Empirical distributions and goodness-of-fit statistics.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{invalid, Result};

/// Sorted samples with moments.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalSummary {
    sorted: Vec<f64>,
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
}

impl EmpiricalSummary {
    /// Requires at least two finite samples.
    pub fn new(mut samples: Vec<f64>) -> Result<Self> {
        if samples.len() < 2 || samples.iter().any(|x| !x.is_finite()) {
            return Err(invalid("need at least two finite samples"));
        }
        samples.sort_by(f64::total_cmp);
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let m = |k: i32| samples.iter().map(|x| (x - mean).powi(k)).sum::<f64>() / n;
        let (m2, m3, m4) = (m(2), m(3), m(4));
        Ok(Self {
            mean,
            variance: m2 * n / (n - 1.0),
            skewness: if m2 > 0.0 { m3 / m2.powf(1.5) } else { 0.0 },
            excess_kurtosis: if m2 > 0.0 { m4 / (m2 * m2) - 3.0 } else { 0.0 },
            sorted: samples,
        })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    /// Right-continuous ECDF `#{x_i <= x} / n`.
    pub fn ecdf(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&v| v <= x) as f64 / self.sorted.len() as f64
    }

    /// Interpolated empirical quantile.
    pub fn quantile(&self, q: f64) -> f64 {
        let h = q.clamp(0.0, 1.0) * (self.sorted.len() - 1) as f64;
        let lo = h.floor() as usize;
        let hi = h.ceil() as usize;
        self.sorted[lo] + (h - lo as f64) * (self.sorted[hi] - self.sorted[lo])
    }

    /// `sup_x |F_n(x) - F(x)|` for a continuous reference `F`.
    pub fn ks_distance(&self, cdf: impl Fn(f64) -> f64) -> f64 {
        let n = self.sorted.len() as f64;
        let mut d = 0.0f64;
        let mut i = 0;
        while i < self.sorted.len() {
            let x = self.sorted[i];
            let mut j = i;
            while j < self.sorted.len() && self.sorted[j] == x {
                j += 1;
            }
            let f = cdf(x);
            d = d.max((j as f64 / n - f).abs()).max((f - i as f64 / n).abs());
            i = j;
        }
        d
    }

    /// Sup distance between this ECDF and a step-function reference `F`
    /// that can jump only at points of `atoms`.
    pub fn ks_distance_discrete(&self, atoms: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
        atoms.iter().map(|&a| (self.ecdf(a) - cdf(a)).abs()).fold(0.0, f64::max)
    }
}

/// `sup |F_n - G_m|` between two samples.
pub fn ks_two_sample(a: &EmpiricalSummary, b: &EmpiricalSummary) -> f64 {
    a.sorted
        .iter()
        .chain(&b.sorted)
        .map(|&x| (a.ecdf(x) - b.ecdf(x)).abs())
        .fold(0.0, f64::max)
}

/// `P(K > lambda)` for the Kolmogorov distribution.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.0 {
        let c = std::f64::consts::PI * std::f64::consts::PI / (8.0 * lambda * lambda);
        let s: f64 = (1..=20).map(|k| (-((2 * k - 1) as f64).powi(2) * c).exp()).sum();
        return (1.0 - (2.0 * std::f64::consts::PI).sqrt() / lambda * s).clamp(0.0, 1.0);
    }
    let s: f64 = (1..=100)
        .map(|k| {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            sign * (-2.0 * (k * k) as f64 * lambda * lambda).exp()
        })
        .sum();
    (2.0 * s).clamp(0.0, 1.0)
}

/// Asymptotic p-value of a one-sample KS distance `d` with `n` samples,
/// using the effective argument `(sqrt(n) + 0.12 + 0.11/sqrt(n)) d`.
pub fn ks_pvalue(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    kolmogorov_survival((sn + 0.12 + 0.11 / sn) * d)
}

/// Outcome of a chi-square test.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    /// Bins remaining after merging.
    pub bins: usize,
}

fn chi_pvalue(stat: f64, dof: usize) -> f64 {
    if dof == 0 {
        return 1.0;
    }
    ChiSquared::new(dof as f64).map(|d| d.sf(stat)).unwrap_or(f64::NAN)
}

/// Minimum expected count per bin after merging.
pub const CHI_MIN_EXPECTED: f64 = 5.0;

/// Goodness of fit of `observed` counts against probabilities `expected`
/// (which should sum to one over the listed bins). Adjacent bins are merged
/// left to right until each expected count reaches [`CHI_MIN_EXPECTED`].
pub fn chi_square_gof(observed: &[u64], expected: &[f64]) -> Result<ChiSquare> {
    if observed.len() != expected.len() || observed.is_empty() {
        return Err(invalid("observed and expected must have equal nonzero length"));
    }
    let n: u64 = observed.iter().sum();
    let nf = n as f64;
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let (mut o, mut e) = (0.0, 0.0);
    for (&ob, &ex) in observed.iter().zip(expected) {
        o += ob as f64;
        e += ex * nf;
        if e >= CHI_MIN_EXPECTED {
            bins.push((o, e));
            o = 0.0;
            e = 0.0;
        }
    }
    if o > 0.0 || e > 0.0 {
        match bins.last_mut() {
            Some(last) => {
                last.0 += o;
                last.1 += e;
            }
            None => bins.push((o, e)),
        }
    }
    let statistic: f64 = bins.iter().map(|&(o, e)| if e > 0.0 { (o - e).powi(2) / e } else if o > 0.0 { f64::INFINITY } else { 0.0 }).sum();
    let dof = bins.len().saturating_sub(1);
    Ok(ChiSquare { statistic, dof, p_value: chi_pvalue(statistic, dof), bins: bins.len() })
}

/// Two-sample chi-square homogeneity test on paired category counts.
/// Categories with fewer than `2 * CHI_MIN_EXPECTED` pooled observations are
/// pooled into one bin.
pub fn chi_square_two_sample(a: &[u64], b: &[u64]) -> Result<ChiSquare> {
    if a.len() != b.len() || a.is_empty() {
        return Err(invalid("count vectors must have equal nonzero length"));
    }
    let na: u64 = a.iter().sum();
    let nb: u64 = b.iter().sum();
    if na == 0 || nb == 0 {
        return Err(invalid("both samples must be nonempty"));
    }
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let mut rest = (0.0, 0.0);
    for (&x, &y) in a.iter().zip(b) {
        if ((x + y) as f64) < 2.0 * CHI_MIN_EXPECTED {
            rest.0 += x as f64;
            rest.1 += y as f64;
        } else {
            bins.push((x as f64, y as f64));
        }
    }
    if rest.0 + rest.1 > 0.0 {
        bins.push(rest);
    }
    let k1 = (nb as f64 / na as f64).sqrt();
    let k2 = (na as f64 / nb as f64).sqrt();
    let statistic: f64 = bins.iter().map(|&(x, y)| (k1 * x - k2 * y).powi(2) / (x + y)).sum();
    let dof = bins.len().saturating_sub(1);
    Ok(ChiSquare { statistic, dof, p_value: chi_pvalue(statistic, dof), bins: bins.len() })
}

/// `(1/2) sum |p_i - q_i|`.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    let n = p.len().max(q.len());
    (0..n)
        .map(|i| (p.get(i).copied().unwrap_or(0.0) - q.get(i).copied().unwrap_or(0.0)).abs())
        .sum::<f64>()
        / 2.0
}

/// Sample mean and variance with the standard error of the variance
/// `sqrt((m4 - s^4) / n)`.
pub fn variance_with_stderr(x: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let m2 = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let m4 = x.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / n;
    let var = m2 * n / (n - 1.0);
    (mean, var, ((m4 - m2 * m2).max(0.0) / n).sqrt())
}
