//! Experiment kernels shared by the command-line driver and the test suites.

use rand::RngCore;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use super::seed::run_replicas;
use crate::analysis::{
    chi_square_two_sample, increment_variance_diag, ks_pvalue, scale_curve, total_variation, transversal_increment,
    transversal_report,
    ChiSquare, EmpiricalSummary, IncrementReport, Profile, ScaledCurve, ScalingSpec, TransversalReport, TwReference,
};
use crate::asep::{event_identity_holds, reliable_window_start, simulate_asep, TruncationPolicy};
use crate::error::{invalid, Result};
use crate::hallittlewood::{Cap, HahpParams, HahpSampler};
use crate::sixvertex::{top_row_heights, S6VParams};

/// Six-vertex one-point setup: spin `q`, spectral `zeta` and slope `mu`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvSetup {
    pub q: f64,
    pub zeta: f64,
    pub mu: f64,
}

impl SvSetup {
    pub fn spec(&self) -> Result<ScalingSpec> {
        ScalingSpec::sv(self.mu, self.zeta)
    }

    pub fn params(&self) -> Result<S6VParams> {
        S6VParams::from_zeta(self.q, self.zeta)
    }
}

/// Applies `f` to the top-row profile `x -> h(x, N)` on `1..=width + 1` of
/// each replica, in replica order.
pub fn sv_map_profiles<T, F>(
    setup: &SvSetup,
    n: usize,
    width: usize,
    replicas: usize,
    seed: u64,
    workers: usize,
    f: F,
) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&Profile) -> Result<T> + Sync + Send,
{
    let params = setup.params()?;
    run_replicas(seed, replicas, workers, |_, rng| {
        let h = top_row_heights(rng.next_u64(), &params, width, n)?;
        f(&Profile::from_ints(1, &h))
    })
    .into_iter()
    .collect()
}

/// Top-row profiles, one per replica.
pub fn sv_profiles(setup: &SvSetup, n: usize, width: usize, replicas: usize, seed: u64, workers: usize) -> Result<Vec<Profile>> {
    sv_map_profiles(setup, n, width, replicas, seed, workers, |p| Ok(p.clone()))
}

/// Per-replica `f_N(0)` and transversal increments at each exponent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvScan {
    pub n: usize,
    pub onepoint: Vec<f64>,
    /// `increments[k][i]`: exponent `k`, replica `i`.
    pub increments: Vec<Vec<f64>>,
}

/// Samples `replicas` top rows at size `N` and extracts the one-point value
/// and the increments over `s N^gamma` for every `gamma` in `exponents`.
pub fn sv_scan(
    setup: &SvSetup,
    n: usize,
    s: f64,
    exponents: &[f64],
    replicas: usize,
    seed: u64,
    workers: usize,
) -> Result<SvScan> {
    let spec = setup.spec()?;
    let reach = exponents.iter().map(|&g| s * (n as f64).powf(g)).fold(0.0, f64::max);
    let width = sv_width(setup, n, reach);
    let nf = n as f64;
    let per = sv_map_profiles(setup, n, width, replicas, seed, workers, |p| {
        let one = spec.scale(nf, 0.0, p.eval(spec.position(nf, 0.0))?);
        let incs = exponents.iter().map(|&g| transversal_increment(&spec, n, s, g, p)).collect::<Result<Vec<_>>>()?;
        Ok((one, incs))
    })?;
    let mut increments = vec![Vec::with_capacity(replicas); exponents.len()];
    let mut onepoint = Vec::with_capacity(replicas);
    for (one, incs) in per {
        onepoint.push(one);
        for (k, v) in incs.into_iter().enumerate() {
            increments[k].push(v);
        }
    }
    Ok(SvScan { n, onepoint, increments })
}

/// Transversal report from scans ordered by increasing `N`.
pub fn sv_scan_transversal(scans: &[SvScan], s: f64, exponents: &[f64]) -> Result<TransversalReport> {
    let mut groups = Vec::new();
    for (k, &g) in exponents.iter().enumerate() {
        for scan in scans {
            groups.push((g, scan.n, scan.increments[k].clone()));
        }
    }
    transversal_report(s, &groups)
}

/// Columns needed to read every profile position up to `s_max N^gamma` past
/// the base point.
pub fn sv_width(setup: &SvSetup, n: usize, reach: f64) -> usize {
    (setup.mu * n as f64 + reach).ceil() as usize + 2
}

/// One-point fluctuation statistics against the Tracy-Widom reference.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OnePointReport {
    pub n: usize,
    pub replicas: usize,
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
    pub median: f64,
    pub ks: f64,
    /// Kolmogorov p-value treating the reference as exact and the sample as
    /// continuous. Informational only.
    pub ks_pvalue: f64,
}

impl OnePointReport {
    pub fn new(n: usize, samples: Vec<f64>, tw: &TwReference) -> Result<Self> {
        let s = EmpiricalSummary::new(samples)?;
        let ks = s.ks_distance(|x| tw.eval(x));
        Ok(Self {
            n,
            replicas: s.len(),
            mean: s.mean,
            variance: s.variance,
            skewness: s.skewness,
            excess_kurtosis: s.excess_kurtosis,
            median: s.quantile(0.5),
            ks,
            ks_pvalue: ks_pvalue(ks, s.len()),
        })
    }
}

/// `f_N(0)` for each profile.
pub fn onepoint_values(spec: &ScalingSpec, n: usize, profiles: &[Profile]) -> Result<Vec<f64>> {
    let nf = n as f64;
    profiles.iter().map(|p| Ok(spec.scale(nf, 0.0, p.eval(spec.position(nf, 0.0))?))).collect()
}

/// Exclusion-process one-point setup: left rate `t` and location `alpha`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsepSetup {
    pub t: f64,
    pub alpha: f64,
}

/// One replica of the exclusion process at time `N / (1 - t)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsepReplica {
    pub raw_height: f64,
    pub scaled: f64,
    pub identity_holds: bool,
    pub events: u64,
}

/// Runs the exclusion process and reads the height at `alpha N`. The event
/// identity is checked at every site of the reliable window up to the
/// rightmost particle.
pub fn asep_onepoint(setup: &AsepSetup, n: usize, replicas: usize, seed: u64, workers: usize) -> Result<Vec<AsepReplica>> {
    let spec = ScalingSpec::asep(setup.alpha)?;
    if !(0.0..1.0).contains(&setup.t) {
        return Err(invalid("left rate must lie in [0,1)"));
    }
    let nf = n as f64;
    let time = nf / (1.0 - setup.t);
    run_replicas(seed, replicas, workers, |_, rng| {
        let state = simulate_asep(rng, setup.t, time, TruncationPolicy::for_time(time))?;
        let x = spec.position(nf, 0.0);
        let raw_height = state.height(x)?;
        let start = reliable_window_start(time);
        let end = state.positions[0] + 1;
        let ordered = state.positions.windows(2).all(|w| w[0] > w[1]);
        Ok(AsepReplica {
            raw_height,
            scaled: spec.scale(nf, 0.0, raw_height),
            identity_holds: ordered && event_identity_holds(&state, start..=end),
            events: state.events,
        })
    })
    .into_iter()
    .collect()
}

/// Agreement between the Hall-Littlewood and six-vertex height vectors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub m: usize,
    pub n: usize,
    pub t: f64,
    pub zeta: f64,
    pub replicas: usize,
    /// Total variation of each coordinate's marginal, `x = 0..=M`.
    pub marginal_tv: Vec<f64>,
    pub joint: ChiSquare,
    pub distinct_vectors: usize,
    pub cap: Cap,
    pub cap_tail_bound: f64,
}

/// Height vectors `(N - lambda'_1(x))_{x=0..M}` from the exact sampler.
pub fn hl_height_vectors(params: &HahpParams, cap: Cap, replicas: usize, seed: u64, workers: usize) -> Result<Vec<Vec<i64>>> {
    let sampler = HahpSampler::new(*params, cap)?;
    let n = params.n as i64;
    Ok(run_replicas(seed, replicas, workers, |_, rng| {
        sampler.sample(rng).conjugate_line(1).into_iter().map(|l| n - l).collect()
    }))
}

/// Height vectors `(h(x + 1, N))_{x=0..M}` from the six-vertex sampler.
pub fn sv_height_vectors(
    params: &S6VParams,
    m: usize,
    n: usize,
    replicas: usize,
    seed: u64,
    workers: usize,
) -> Result<Vec<Vec<i64>>> {
    run_replicas(seed, replicas, workers, |_, rng| top_row_heights(rng.next_u64(), params, m, n))
        .into_iter()
        .collect()
}

fn empirical_pmfs(vectors: &[Vec<i64>], len: usize, n: usize) -> Vec<Vec<f64>> {
    let mut counts = vec![vec![0u64; n + 1]; len];
    for v in vectors {
        for (x, &h) in v.iter().enumerate() {
            counts[x][h.clamp(0, n as i64) as usize] += 1;
        }
    }
    let total = vectors.len() as f64;
    counts.into_iter().map(|c| c.into_iter().map(|k| k as f64 / total).collect()).collect()
}

/// Compares the two ensembles coordinatewise and jointly.
pub fn identity_report(
    params: &HahpParams,
    cap: Cap,
    hl: &[Vec<i64>],
    sv: &[Vec<i64>],
) -> Result<IdentityReport> {
    let len = params.m + 1;
    if hl.iter().chain(sv).any(|v| v.len() != len) {
        return Err(invalid("height vectors must have length M + 1"));
    }
    let ph = empirical_pmfs(hl, len, params.n);
    let ps = empirical_pmfs(sv, len, params.n);
    let marginal_tv = (0..len).map(|x| total_variation(&ph[x], &ps[x])).collect();
    let mut index: FxHashMap<&[i64], usize> = FxHashMap::default();
    for v in hl.iter().chain(sv) {
        let k = index.len();
        index.entry(v.as_slice()).or_insert(k);
    }
    let mut a = vec![0u64; index.len()];
    let mut b = vec![0u64; index.len()];
    for v in hl {
        a[index[v.as_slice()]] += 1;
    }
    for v in sv {
        b[index[v.as_slice()]] += 1;
    }
    Ok(IdentityReport {
        m: params.m,
        n: params.n,
        t: params.t,
        zeta: params.zeta,
        replicas: hl.len().min(sv.len()),
        marginal_tv,
        joint: chi_square_two_sample(&a, &b)?,
        distinct_vectors: index.len(),
        cap,
        cap_tail_bound: cap.tail_bound(params),
    })
}

/// Pinned-increment variances of scaled six-vertex top rows on `[-r, r]`.
pub fn sv_increment_report(
    setup: &SvSetup,
    n: usize,
    profiles: &[Profile],
    r: f64,
    points: usize,
    xis: &[f64],
) -> Result<IncrementReport> {
    let spec = setup.spec()?;
    let curves: Vec<ScaledCurve> = profiles
        .iter()
        .map(|p| crate::analysis::bridge_curve(&spec, n as f64, r, points, p))
        .collect::<Result<_>>()?;
    increment_variance_diag(&curves, r, spec.good_slope(), xis)
}

/// Scaled six-vertex curves `f_N` on `[-r, r]`.
pub fn sv_scaled_curves(setup: &SvSetup, n: usize, profiles: &[Profile], r: f64, points: usize) -> Result<Vec<ScaledCurve>> {
    let spec = setup.spec()?;
    profiles.iter().map(|p| scale_curve(&spec, n as f64, r, points, p)).collect()
}
