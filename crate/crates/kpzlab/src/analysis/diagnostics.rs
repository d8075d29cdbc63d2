//! Brownian-increment, transversal-exponent and acceptance-probability
//! diagnostics.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::scaling::{Profile, ScaledCurve, ScalingSpec};
use super::stats::variance_with_stderr;
use crate::error::{invalid, Result};
use crate::gibbs::{acceptance_z_exact, acceptance_z_mc, Boundary, GibbsContext};
use crate::paths::UpRightPath;

/// Pinned increment `G(g)(xi) = g(2 r xi - r) - g(-r) - xi (g(r) - g(-r))`.
pub fn pinned_increment(curve: &ScaledCurve, xi: f64) -> Result<f64> {
    let r = curve.r;
    let left = curve.eval(-r)?;
    let right = curve.eval(r)?;
    Ok(curve.eval(2.0 * r * xi - r)? - left - xi * (right - left))
}

/// Variance of the pinned increment at one `xi`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IncrementRow {
    pub xi: f64,
    pub variance: f64,
    pub stderr: f64,
    /// `sigma^2 xi (1 - xi)`.
    pub target: f64,
    pub ratio: f64,
    /// `(variance - target) / stderr`.
    pub z_score: f64,
}

/// Increment-variance report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IncrementReport {
    pub curves: usize,
    pub r: f64,
    pub p: f64,
    pub sigma2: f64,
    pub rows: Vec<IncrementRow>,
}

/// Empirical variance of `G(g)(xi)` against `2 r p (1 - p) xi (1 - xi)`.
pub fn increment_variance_diag(curves: &[ScaledCurve], r: f64, p: f64, xis: &[f64]) -> Result<IncrementReport> {
    if curves.len() < 2 {
        return Err(invalid("need at least two curves"));
    }
    let sigma2 = 2.0 * r * p * (1.0 - p);
    let rows = xis
        .iter()
        .map(|&xi| {
            let values: Vec<f64> = curves.iter().map(|c| pinned_increment(c, xi)).collect::<Result<_>>()?;
            let (_, variance, stderr) = variance_with_stderr(&values);
            let target = sigma2 * xi * (1.0 - xi);
            Ok(IncrementRow {
                xi,
                variance,
                stderr,
                target,
                ratio: variance / target,
                z_score: if stderr > 0.0 { (variance - target) / stderr } else { f64::INFINITY },
            })
        })
        .collect::<Result<_>>()?;
    Ok(IncrementReport { curves: curves.len(), r, p, sigma2, rows })
}

/// Curve `N^{-alpha/2} (L(x N^alpha) - p x N^alpha)` of a path whose time
/// origin is the centre of the window, on a grid of `[-r, r]`.
pub fn good_curve(path: &UpRightPath, n: f64, alpha: f64, p: f64, r: f64, points: usize) -> Result<ScaledCurve> {
    let xs = super::scaling::grid(r, points);
    let scale = n.powf(alpha);
    let values = xs
        .iter()
        .map(|&x| path.eval(x * scale).map(|v| (v - p * x * scale) / scale.sqrt()))
        .collect::<Result<_>>()?;
    Ok(ScaledCurve { r, xs, values })
}

/// Variance of `f_N(s) - f_N(0)` at one `N` and spatial exponent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransversalRow {
    pub exponent: f64,
    pub n: usize,
    pub variance: f64,
    pub stderr: f64,
}

/// Transversal report across `N` and exponents.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransversalReport {
    pub s: f64,
    pub rows: Vec<TransversalRow>,
    /// `max / min` variance across `N` at each exponent, in exponent order.
    pub ratios: Vec<(f64, f64)>,
    /// Whether the variance is strictly increasing (`+1`), strictly
    /// decreasing (`-1`) or neither (`0`) in `N`, per exponent.
    pub trends: Vec<(f64, i8)>,
}

/// `sigma^{-1} N^{-1/3} (R(x(s)) - R(x(0)))` where `x(s) = x_N(0) + s N^gamma`.
/// Deterministic centering does not change the variance and is omitted.
pub fn transversal_increment(spec: &ScalingSpec, n: usize, s: f64, gamma: f64, profile: &Profile) -> Result<f64> {
    let nf = n as f64;
    let x0 = spec.position(nf, 0.0);
    let x1 = x0 + s * nf.powf(gamma);
    Ok((profile.eval(x1)? - profile.eval(x0)?) / (spec.sigma() * nf.powf(1.0 / 3.0)))
}

/// Builds the report from increments grouped as `(gamma, N, increments)`,
/// with `N` increasing within each exponent.
pub fn transversal_report(s: f64, groups: &[(f64, usize, Vec<f64>)]) -> Result<TransversalReport> {
    if !(s > 0.0) {
        return Err(invalid("s must be positive"));
    }
    let mut rows = Vec::new();
    let mut exponents: Vec<f64> = Vec::new();
    for (gamma, n, incs) in groups {
        if incs.len() < 2 {
            return Err(invalid("need at least two increments per group"));
        }
        let (_, variance, stderr) = variance_with_stderr(incs);
        rows.push(TransversalRow { exponent: *gamma, n: *n, variance, stderr });
        if !exponents.contains(gamma) {
            exponents.push(*gamma);
        }
    }
    let mut ratios = Vec::new();
    let mut trends = Vec::new();
    for gamma in exponents {
        let vars: Vec<f64> = rows.iter().filter(|r| r.exponent == gamma).map(|r| r.variance).collect();
        let max = vars.iter().copied().fold(f64::MIN, f64::max);
        let min = vars.iter().copied().fold(f64::MAX, f64::min);
        ratios.push((gamma, max / min));
        let inc = vars.windows(2).all(|w| w[1] > w[0]);
        let dec = vars.windows(2).all(|w| w[1] < w[0]);
        trends.push((gamma, if inc { 1 } else if dec { -1 } else { 0 }));
    }
    Ok(TransversalReport { s, rows, ratios, trends })
}

/// The transversal report computed from stored profiles, `data` holding
/// `(N, profiles)` with `N` increasing.
pub fn transversal_exponent_diag(
    spec: &ScalingSpec,
    data: &[(usize, Vec<Profile>)],
    s: f64,
    exponents: &[f64],
) -> Result<TransversalReport> {
    let mut groups = Vec::new();
    for &gamma in exponents {
        for (n, profiles) in data {
            let incs = profiles.iter().map(|p| transversal_increment(spec, *n, s, gamma, p)).collect::<Result<_>>()?;
            groups.push((gamma, *n, incs));
        }
    }
    transversal_report(s, &groups)
}

/// Largest state space enumerated exactly by the acceptance experiment.
pub const ACCEPTANCE_EXACT_LIMIT: u128 = 200_000;

/// Empirical law of the acceptance probability.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AcceptanceReport {
    pub s1: i64,
    pub t: f64,
    pub z_values: Vec<f64>,
    /// Whether each value is exact (enumeration) or a Monte-Carlo estimate.
    pub exact: Vec<bool>,
    /// `(delta, fraction of samples with Z < delta)`.
    pub below: Vec<(f64, f64)>,
}

/// `Z_t(-s1, s1, L1(-s1), L1(s1), L2; [-s1+1, s1])` for one pair of
/// curves, with the infinite curve above `L1`. Exact when the bridge space
/// has at most [`ACCEPTANCE_EXACT_LIMIT`] paths, otherwise estimated from
/// `mc_samples` uniform bridges.
pub fn acceptance_for_pair<R: Rng + ?Sized>(
    rng: &mut R,
    top: &UpRightPath,
    second: &UpRightPath,
    s1: i64,
    t: f64,
    mc_samples: usize,
) -> Result<(f64, bool)> {
    let ctx = GibbsContext::full(t, -s1, s1, Boundary::Infinite, Boundary::Path(second.clone()))?;
    let (a, b) = (top.at(-s1), top.at(s1));
    let spec = ctx.bridge(a, b)?;
    if spec.count() <= ACCEPTANCE_EXACT_LIMIT {
        Ok((acceptance_z_exact(&ctx, a, b)?, true))
    } else {
        Ok((acceptance_z_mc(rng, &ctx, a, b, mc_samples)?.0, false))
    }
}

/// Acceptance probabilities over a sample of top-two-curve pairs, with the
/// fractions below each `delta`.
pub fn acceptance_probability_experiment<R: Rng + ?Sized>(
    rng: &mut R,
    pairs: &[(UpRightPath, UpRightPath)],
    s1: i64,
    t: f64,
    mc_samples: usize,
    deltas: &[f64],
) -> Result<AcceptanceReport> {
    let mut z_values = Vec::with_capacity(pairs.len());
    let mut exact = Vec::with_capacity(pairs.len());
    for (l1, l2) in pairs {
        let (z, e) = acceptance_for_pair(rng, l1, l2, s1, t, mc_samples)?;
        z_values.push(z);
        exact.push(e);
    }
    let n = z_values.len().max(1) as f64;
    let below = deltas
        .iter()
        .map(|&d| (d, z_values.iter().filter(|&&z| z < d).count() as f64 / n))
        .collect();
    Ok(AcceptanceReport { s1, t, z_values, exact, below })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::rng_from_seed;
    use crate::paths::{sample_uniform_bridge, BridgeSpec};

    #[test]
    fn deterministic_curves_have_zero_variance() {
        let c = ScaledCurve { r: 1.0, xs: vec![-1.0, 0.0, 1.0], values: vec![0.0, 2.0, 1.0] };
        let rep = increment_variance_diag(&[c.clone(), c], 1.0, 0.5, &[0.5]).unwrap();
        assert_eq!(rep.rows[0].variance, 0.0);
    }

    #[test]
    fn bernoulli_bridges_match_brownian_variance() {
        let mut rng = rng_from_seed(11);
        let (n, alpha, p, r) = (256.0f64, 1.0, 0.5, 1.0);
        let half = (r * n.powf(alpha)) as i64;
        let spec = BridgeSpec::new(-half, half, 0, half).unwrap();
        let curves: Vec<ScaledCurve> = (0..4000)
            .map(|_| {
                let path = sample_uniform_bridge(&mut rng, &spec).shifted(0, -half / 2);
                good_curve(&path, n, alpha, p, r, 8).unwrap()
            })
            .collect();
        let rep = increment_variance_diag(&curves, r, p, &[0.25, 0.5, 0.75]).unwrap();
        for row in &rep.rows {
            assert!(row.z_score.abs() < 4.0, "{row:?}");
        }
    }

    #[test]
    fn separated_pair_accepts_with_probability_one() {
        let mut rng = rng_from_seed(12);
        let top = UpRightPath::new(-3, vec![10, 10, 11, 12, 12, 13, 14]).unwrap();
        let low = UpRightPath::new(-3, vec![-50; 7]).unwrap();
        let (z, exact) = acceptance_for_pair(&mut rng, &top, &low, 3, 0.5, 100).unwrap();
        assert!(exact);
        assert!((z - 1.0).abs() < 1e-6);
    }
}
