//! Exact and statistical verification kernels.

use rand::Rng;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use super::seed::{rng_from_seed, run_replicas};
use crate::analysis::{chi_square_gof, increment_variance_diag, good_curve, ChiSquare, IncrementReport};
use crate::coupling::{conditional_midpoint_pmf, kmt_couple, least_squares, DeltaGrowth};
use crate::error::{invalid, Result};
use crate::gibbs::{
    acceptance_z_exact, conditional_law_exact, gibbs_invariance_tv, gibbs_resample, Boundary, GibbsContext,
};
use crate::hallittlewood::{
    enumerate_hahp, enumerate_plane_partitions, plane_partition_weight, stationary_vector, Cap, HahpParams,
    HahpSampler, PlanePartition, PlanePartitionChain,
};
use crate::paths::{sample_uniform_bridge, BridgeSpec, UpRightPath};

/// Resampling invariance of one capped Hall-Littlewood instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GibbsInvarianceRow {
    pub m: usize,
    pub n: usize,
    pub t: f64,
    pub zeta: f64,
    pub states: usize,
    /// `(line, total variation)` for each resampled line.
    pub tv: Vec<(usize, f64)>,
    /// Total variation when resampling with a wrong `t`, as a control.
    pub control_tv: f64,
}

/// Offset added to `t` in the control resampling.
pub const GIBBS_CONTROL_SHIFT: f64 = 0.2;

/// Resamples each line `1..=N` of the conjugate-line ensemble
/// `(lambda'_1, ..., lambda'_{N+1})` on `[0, M]` with `S = [1, M]`.
pub fn hahp_gibbs_invariance(params: &HahpParams, cap: Cap) -> Result<GibbsInvarianceRow> {
    let e = enumerate_hahp(params, cap)?;
    let law = e.line_law(params.n + 1);
    let s: Vec<i64> = (1..=params.m as i64).collect();
    let tv = (1..=params.n)
        .map(|i| Ok((i, gibbs_invariance_tv(&law, i, params.t, &s)?)))
        .collect::<Result<_>>()?;
    let wrong = (params.t + GIBBS_CONTROL_SHIFT).min(0.95);
    Ok(GibbsInvarianceRow {
        m: params.m,
        n: params.n,
        t: params.t,
        zeta: params.zeta,
        states: e.entries.len(),
        tv,
        control_tv: gibbs_invariance_tv(&law, 1, wrong, &s)?,
    })
}

/// A resampling problem: context plus endpoints.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GibbsInstance {
    pub ctx: GibbsContext,
    pub a: i64,
    pub b: i64,
}

fn random_path<R: Rng + ?Sized>(rng: &mut R, t0: i64, len: i64, z0: i64) -> UpRightPath {
    let steps: Vec<bool> = (0..len).map(|_| rng.random_bool(0.5)).collect();
    UpRightPath::from_steps(t0, z0, &steps)
}

/// Draws an enumerable instance on `[0, L]`, `3 <= L <= 8`, with a random
/// bottom path, an optional top path and a random nonempty `S`, redrawing
/// until `Z_t >= min_z`.
pub fn random_gibbs_instance<R: Rng + ?Sized>(rng: &mut R, min_z: f64) -> Result<GibbsInstance> {
    loop {
        let len: i64 = rng.random_range(3..=8);
        let t: f64 = rng.random_range(0.1..0.9);
        let a = 0;
        let b = rng.random_range(0..=len);
        let z0 = -rng.random_range(0..=2);
        let bottom = random_path(rng, 0, len, z0);
        let top = if rng.random_bool(0.5) {
            let z0 = rng.random_range(0..=2);
            Boundary::Path(random_path(rng, 0, len, z0))
        } else {
            Boundary::Infinite
        };
        let s: Vec<i64> = (1..=len).filter(|_| rng.random_bool(0.7)).collect();
        if s.is_empty() {
            continue;
        }
        let ctx = GibbsContext::new(t, 0, len, s, top, Boundary::Path(bottom))?;
        if acceptance_z_exact(&ctx, a, b)? >= min_z {
            return Ok(GibbsInstance { ctx, a, b });
        }
    }
}

/// Comparison of the rejection sampler with the exact conditional law.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RejectionCheck {
    pub paths: usize,
    pub draws: usize,
    pub chi: ChiSquare,
    pub z_exact: f64,
    pub mean_trials: f64,
    pub trials_stderr: f64,
    /// `(E[trials] Z - 1) / (Z stderr)`.
    pub trials_z_score: f64,
}

/// Draws `draws` resamplings and tests them against the exact law.
pub fn rejection_check<R: Rng + ?Sized>(rng: &mut R, inst: &GibbsInstance, draws: usize) -> Result<RejectionCheck> {
    let law = conditional_law_exact(&inst.ctx, inst.a, inst.b)?;
    let index: FxHashMap<&UpRightPath, usize> = law.iter().enumerate().map(|(i, (p, _))| (p, i)).collect();
    let mut counts = vec![0u64; law.len()];
    let (mut sum, mut sum2) = (0.0, 0.0);
    for _ in 0..draws {
        let r = gibbs_resample(rng, &inst.ctx, inst.a, inst.b, u64::MAX)?;
        counts[index[&r.accepted_path]] += 1;
        let q = r.trials as f64;
        sum += q;
        sum2 += q * q;
    }
    let probs: Vec<f64> = law.iter().map(|(_, p)| *p).collect();
    let n = draws as f64;
    let mean = sum / n;
    let se = (((sum2 - n * mean * mean) / (n - 1.0)).max(0.0) / n).sqrt();
    let z_exact = acceptance_z_exact(&inst.ctx, inst.a, inst.b)?;
    Ok(RejectionCheck {
        paths: law.len(),
        draws,
        chi: chi_square_gof(&counts, &probs)?,
        z_exact,
        mean_trials: mean,
        trials_stderr: se,
        trials_z_score: if se > 0.0 { (mean * z_exact - 1.0) / (se * z_exact) } else { 0.0 },
    })
}

/// Capped partition-function sums against the closed form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalizationRow {
    pub m: usize,
    pub n: usize,
    pub t: f64,
    pub zeta: f64,
    pub cap: u32,
    /// Capped sum divided by `((1 - t zeta)/(1 - zeta))^{NM}`.
    pub ratio: f64,
    /// Chernoff bound on the mass beyond the cap.
    pub tail_bound: f64,
    /// Exact mass beyond the cap.
    pub exact_tail: f64,
    /// Capped sum from explicit enumeration, when listed.
    pub enumerated_ratio: Option<f64>,
}

impl NormalizationRow {
    /// `0 <= 1 - ratio <= tail_bound` up to `tol`.
    pub fn within_bound(&self, tol: f64) -> bool {
        let gap = 1.0 - self.ratio;
        gap >= -tol && gap <= self.tail_bound + tol
    }
}

/// Sums `prod P * Q` over `|lambda(M)| <= K` for each cap `K`, by dynamic
/// programming and, for caps up to `enumerate_up_to`, by explicit listing.
pub fn normalization_rows(params: &HahpParams, caps: &[u32], enumerate_up_to: u32) -> Result<Vec<NormalizationRow>> {
    caps.iter()
        .map(|&k| {
            let cap = Cap::Weight(k);
            let sampler = HahpSampler::new(*params, cap)?;
            let enumerated_ratio = if k <= enumerate_up_to {
                Some(enumerate_hahp(params, cap)?.listed_mass())
            } else {
                None
            };
            Ok(NormalizationRow {
                m: params.m,
                n: params.n,
                t: params.t,
                zeta: params.zeta,
                cap: k,
                ratio: sampler.listed_mass(),
                tail_bound: params.weight_tail_geometric_bound(k as usize),
                exact_tail: params.weight_tail(k as usize),
                enumerated_ratio,
            })
        })
        .collect()
}

/// Exact and long-run checks of the plane-partition chain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StationarityCheck {
    pub states: usize,
    /// `max |pi_i - w_i / sum w|` over states.
    pub max_abs_diff: f64,
    pub samples: usize,
    pub thin: u64,
    pub chi: ChiSquare,
    pub acceptance_rate: f64,
}

/// Compares the stationary vector of the exact kernel with the normalized
/// weights, then runs one chain and tests its thinned histogram.
#[allow(clippy::too_many_arguments)]
pub fn mcmc_stationarity(
    m: usize,
    n: usize,
    h: u32,
    t: f64,
    zeta: f64,
    samples: usize,
    thin: u64,
    seed: u64,
) -> Result<StationarityCheck> {
    let states = enumerate_plane_partitions(m, n, h);
    let kernel = PlanePartitionChain::exact_kernel(&states, h, t, zeta)?;
    let pi = stationary_vector(&kernel)?;
    let w: Vec<f64> = states.iter().map(|s| plane_partition_weight(s, t, zeta)).collect();
    let total: f64 = w.iter().sum();
    let max_abs_diff = w.iter().zip(pi.iter()).map(|(wi, p)| (wi / total - p).abs()).fold(0.0, f64::max);
    let index: FxHashMap<&PlanePartition, usize> = states.iter().enumerate().map(|(i, s)| (s, i)).collect();
    let mut rng = rng_from_seed(seed);
    let mut chain = PlanePartitionChain::new(PlanePartition::zero(m, n), h, t, zeta)?;
    chain.run(&mut rng, thin * 10);
    let mut counts = vec![0u64; states.len()];
    for _ in 0..samples {
        chain.run(&mut rng, thin);
        counts[index[chain.state()]] += 1;
    }
    let probs: Vec<f64> = w.iter().map(|x| x / total).collect();
    Ok(StationarityCheck {
        states: states.len(),
        max_abs_diff,
        samples,
        thin,
        chi: chi_square_gof(&counts, &probs)?,
        acceptance_rate: chain.acceptance_rate(),
    })
}

/// Chi-square of the coupled walk's marginal at each time against the
/// hypergeometric law.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KmtMarginalRow {
    pub z: usize,
    pub time: usize,
    pub chi: ChiSquare,
}

/// Coupled walks at `(n, z)` for every `z`, with their marginals tested at
/// every interior time. Bridge values are returned for the covariance test.
pub fn kmt_marginals(n: usize, p: f64, draws: usize, seed: u64, workers: usize) -> Result<Vec<KmtMarginalRow>> {
    let mut rows = Vec::new();
    for z in 0..=n {
        let walks: Vec<Vec<i64>> = run_replicas(seed.wrapping_add(z as u64), draws, workers, |_, rng| {
            kmt_couple(rng, n, z, p).map(|s| s.walk.values().to_vec())
        })
        .into_iter()
        .collect::<Result<_>>()?;
        for time in 1..n {
            let pmf = conditional_midpoint_pmf(n, time, z)?;
            let lo = pmf[0].0;
            let mut counts = vec![0u64; pmf.len()];
            for w in &walks {
                let v = w[time] as usize;
                if v < lo || v - lo >= counts.len() {
                    return Err(invalid(format!("walk value {v} outside the support at time {time}")));
                }
                counts[v - lo] += 1;
            }
            let probs: Vec<f64> = pmf.iter().map(|e| e.1).collect();
            rows.push(KmtMarginalRow { z, time, chi: chi_square_gof(&counts, &probs)? });
        }
    }
    Ok(rows)
}

/// Empirical covariance of the bridge at two grid times.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CovarianceRow {
    pub s: f64,
    pub u: f64,
    pub empirical: f64,
    pub stderr: f64,
    /// `p (1 - p) (min(s, u) - s u)`.
    pub target: f64,
}

impl CovarianceRow {
    pub fn z_score(&self) -> f64 {
        (self.empirical - self.target) / self.stderr
    }
}

/// Covariances of the coupled bridge on the grid `j/n`, `1 <= j <= k < n`.
pub fn kmt_covariance(n: usize, z: usize, p: f64, draws: usize, seed: u64, workers: usize) -> Result<Vec<CovarianceRow>> {
    let bridges: Vec<Vec<f64>> = run_replicas(seed, draws, workers, |_, rng| kmt_couple(rng, n, z, p).map(|s| s.bridge))
        .into_iter()
        .collect::<Result<_>>()?;
    let d = draws as f64;
    let mean: Vec<f64> = (0..=n).map(|j| bridges.iter().map(|b| b[j]).sum::<f64>() / d).collect();
    let mut rows = Vec::new();
    for j in 1..n {
        for k in j..n {
            let prods: Vec<f64> = bridges.iter().map(|b| (b[j] - mean[j]) * (b[k] - mean[k])).collect();
            let c = prods.iter().sum::<f64>() / (d - 1.0);
            let var = prods.iter().map(|x| (x - c).powi(2)).sum::<f64>() / (d - 1.0);
            let (s, u) = (j as f64 / n as f64, k as f64 / n as f64);
            rows.push(CovarianceRow {
                s,
                u,
                empirical: c,
                stderr: (var / d).sqrt(),
                target: p * (1.0 - p) * (s.min(u) - s * u),
            });
        }
    }
    Ok(rows)
}

/// Residual check of the median `Delta` against an affine fit in `(log n)^2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthGate {
    pub fit_max_n: usize,
    pub intercept: f64,
    pub slope: f64,
    /// `(n, median, prediction, median stderr, pass)` for `n > fit_max_n`.
    pub checks: Vec<(usize, f64, f64, f64, bool)>,
}

impl GrowthGate {
    pub fn all_pass(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.4)
    }
}

/// Fits `median = a + b (log n)^2` on rows with `n <= fit_max_n` and requires
/// every larger `n` to satisfy `median <= fit + k_se * stderr`.
pub fn delta_growth_gate(growth: &DeltaGrowth, fit_max_n: usize, k_se: f64) -> Result<GrowthGate> {
    let fit: Vec<_> = growth.rows.iter().filter(|r| r.n <= fit_max_n).collect();
    if fit.len() < 2 {
        return Err(invalid("need at least two rows to fit"));
    }
    let x: Vec<f64> = fit.iter().map(|r| (r.n as f64).ln().powi(2)).collect();
    let y: Vec<f64> = fit.iter().map(|r| r.median_delta).collect();
    let (intercept, slope) = least_squares(&x, &y);
    let checks = growth
        .rows
        .iter()
        .filter(|r| r.n > fit_max_n)
        .map(|r| {
            let pred = intercept + slope * (r.n as f64).ln().powi(2);
            (r.n, r.median_delta, pred, r.median_se, r.median_delta <= pred + k_se * r.median_se)
        })
        .collect();
    Ok(GrowthGate { fit_max_n, intercept, slope, checks })
}

/// Pinned-increment report for uniform Bernoulli bridges with `2 r N^alpha`
/// steps and slope `p`, centered at the middle of the window.
#[allow(clippy::too_many_arguments)]
pub fn bernoulli_increment_report(
    n: f64,
    alpha: f64,
    p: f64,
    r: f64,
    replicas: usize,
    seed: u64,
    workers: usize,
    xis: &[f64],
) -> Result<IncrementReport> {
    let half = (r * n.powf(alpha)).round() as i64;
    let ups = p * (2 * half) as f64;
    if ups.fract() != 0.0 {
        return Err(invalid(format!("p * {} must be an integer", 2 * half)));
    }
    let spec = BridgeSpec::new(-half, half, 0, ups as i64)?;
    let shift = (p * half as f64).round() as i64;
    if shift as f64 != p * half as f64 {
        return Err(invalid(format!("p * {half} must be an integer")));
    }
    let points = (2 * half) as usize;
    let curves = run_replicas(seed, replicas, workers, |_, rng| {
        let path = sample_uniform_bridge(rng, &spec).shifted(0, -shift);
        good_curve(&path, n, alpha, p, r, points)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    increment_variance_diag(&curves, r, p, xis)
}
