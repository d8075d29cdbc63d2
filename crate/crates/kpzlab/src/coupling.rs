//! Dyadic coupling of conditioned Bernoulli walks with a Brownian bridge.
//!
//! For `n = 2k` the construction draws one standard normal `N`, sets the
//! bridge midpoint from `N`, quantile-couples the walk midpoint
//! `S_k ~ S_k | S_n = z` with `Z = z/2 + sqrt(p(1-p) n / 4) N`, and builds the
//! two halves from independent `k`-couplings:
//!
//! ```text
//! B_t = 2^{-1/2} B^1_{2t}       + t sqrt(p(1-p)) N        0 <= t <= 1/2
//! B_t = 2^{-1/2} B^2_{2t-1}     + (1-t) sqrt(p(1-p)) N    1/2 <= t <= 1
//! S_m = S^1_m (k, W)            for m <= k,
//! S_m = W + S^2_{m-k} (k, z-W)  for m >= k.
//! ```
//!
//! Random draws are consumed in a fixed depth-first order that does not
//! depend on `z`, so one seed yields one bridge coupled with every `z`.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;
use statrs::function::gamma::ln_gamma;

use crate::error::{invalid, Result};
use crate::harness::run_replicas;
use crate::paths::UpRightPath;

/// `ln k!` for `k = 0..=n`.
struct LnFactorial(Vec<f64>);

impl LnFactorial {
    fn new(n: usize) -> Self {
        Self((0..=n).map(|k| ln_gamma(k as f64 + 1.0)).collect())
    }

    #[inline]
    fn binom(&self, n: usize, k: usize) -> f64 {
        self.0[n] - self.0[k] - self.0[n - k]
    }
}

/// Support `[lo, hi]` of `S_m` given `S_n = z`.
fn midpoint_support(n: usize, m: usize, z: usize) -> (usize, usize) {
    (z.saturating_sub(n - m), m.min(z))
}

fn midpoint_pmf_with(lf: &LnFactorial, n: usize, m: usize, z: usize) -> (usize, Vec<f64>) {
    let (lo, hi) = midpoint_support(n, m, z);
    let total = lf.binom(n, z);
    let mut pmf: Vec<f64> = (lo..=hi)
        .map(|w| (lf.binom(m, w) + lf.binom(n - m, z - w) - total).exp())
        .collect();
    let s: f64 = pmf.iter().sum();
    pmf.iter_mut().for_each(|v| *v /= s);
    (lo, pmf)
}

/// Law of `S_m` given `S_n = z` for a Bernoulli walk: `C(m,w) C(n-m,z-w) / C(n,z)`.
/// Returns `(w, probability)` over the support.
pub fn conditional_midpoint_pmf(n: usize, m: usize, z: usize) -> Result<Vec<(usize, f64)>> {
    if z > n || m > n {
        return Err(invalid(format!("need 0 <= z, m <= n, got n={n} m={m} z={z}")));
    }
    let (lo, pmf) = midpoint_pmf_with(&LnFactorial::new(n), n, m, z);
    Ok(pmf.into_iter().enumerate().map(|(i, p)| (lo + i, p)).collect())
}

/// Standard normal lower and upper tails `(Phi(x), 1 - Phi(x))`.
fn normal_tails(x: f64) -> (f64, f64) {
    let lower = 0.5 * erfc(-x / std::f64::consts::SQRT_2);
    let upper = 0.5 * erfc(x / std::f64::consts::SQRT_2);
    (lower, upper)
}

/// Quantile map `W = G^{-1}(Phi(N))` over a pmf starting at `lo`. The lower
/// tail is used for `N <= 0` and the upper tail otherwise, so extreme draws
/// keep full precision.
fn quantile_index(normal: f64, pmf: &[f64]) -> usize {
    let (lower, upper) = normal_tails(normal);
    if normal <= 0.0 {
        let mut acc = 0.0;
        for (i, &p) in pmf.iter().enumerate() {
            acc += p;
            if lower <= acc {
                return i;
            }
        }
        pmf.len() - 1
    } else {
        let mut acc = 0.0;
        for (i, &p) in pmf.iter().enumerate().rev() {
            let above = acc;
            acc += p;
            if above <= upper && upper < acc {
                return i;
            }
        }
        0
    }
}

/// `(Z, W)` with `Z = (m/n) z + sqrt(p(1-p) m (1 - m/n)) N` and `W` the
/// quantile-coupled value of `S_m` given `S_n = z`.
pub fn quantile_couple_midpoint(normal: f64, n: usize, m: usize, z: usize, p: f64) -> Result<(f64, usize)> {
    if !(p > 0.0 && p < 1.0) {
        return Err(invalid(format!("p={p} must lie in (0,1)")));
    }
    if z > n || m > n || n == 0 {
        return Err(invalid(format!("need 0 <= z, m <= n and n >= 1, got n={n} m={m} z={z}")));
    }
    let (lo, pmf) = midpoint_pmf_with(&LnFactorial::new(n), n, m, z);
    let mf = m as f64;
    let nf = n as f64;
    let zz = mf / nf * z as f64 + (p * (1.0 - p) * mf * (1.0 - mf / nf)).sqrt() * normal;
    Ok((zz, lo + quantile_index(normal, &pmf)))
}

/// Bridge values on the grid `j/n`, the coupled walk and `Delta(n, z)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingSample {
    pub n: usize,
    pub z: usize,
    pub p: f64,
    /// `B(j/n)` for `j = 0..=n`.
    pub bridge: Vec<f64>,
    pub walk: UpRightPath,
    pub delta: f64,
}

/// `max_j |sqrt(n) B(j/n) + (j/n) z - S_j|`.
pub fn delta_statistic(bridge: &[f64], walk: &[i64], z: usize) -> f64 {
    let n = walk.len() - 1;
    let sn = (n as f64).sqrt();
    bridge
        .iter()
        .zip(walk)
        .enumerate()
        .map(|(j, (&b, &s))| (sn * b + j as f64 / n as f64 * z as f64 - s as f64).abs())
        .fold(0.0, f64::max)
}

struct Coupler<'a, R: Rng + ?Sized> {
    rng: &'a mut R,
    lf: LnFactorial,
    sigma: f64,
}

impl<R: Rng + ?Sized> Coupler<'_, R> {
    /// Fills `bridge[0..=n]` and `walk[0..=n]` for an `n`-coupling at `z`.
    fn build(&mut self, n: usize, z: usize, bridge: &mut [f64], walk: &mut [i64]) {
        bridge[0] = 0.0;
        bridge[n] = 0.0;
        walk[0] = 0;
        walk[n] = z as i64;
        if n == 1 {
            return;
        }
        let normal: f64 = self.rng.sample(StandardNormal);
        let k = n / 2;
        if n == 2 {
            bridge[1] = 0.5 * self.sigma * normal;
            let (lo, pmf) = midpoint_pmf_with(&self.lf, 2, 1, z);
            let u: f64 = self.rng.random();
            let mut acc = 0.0;
            let mut w = lo + pmf.len() - 1;
            for (i, &p) in pmf.iter().enumerate() {
                acc += p;
                if u < acc {
                    w = lo + i;
                    break;
                }
            }
            walk[1] = w as i64;
            return;
        }
        let (lo, pmf) = midpoint_pmf_with(&self.lf, n, k, z);
        let w = lo + quantile_index(normal, &pmf);
        let (b_left, b_right) = bridge.split_at_mut(k);
        let (s_left, s_right) = walk.split_at_mut(k);
        let mut left_b = vec![0.0; k + 1];
        let mut left_s = vec![0i64; k + 1];
        self.build(k, w, &mut left_b, &mut left_s);
        self.build(k, z - w, &mut b_right[..=k], &mut s_right[..=k]);
        let scale = std::f64::consts::FRAC_1_SQRT_2;
        let nf = n as f64;
        for j in 0..k {
            b_left[j] = scale * left_b[j] + j as f64 / nf * self.sigma * normal;
            s_left[j] = left_s[j];
        }
        for j in 0..=k {
            let t = (k + j) as f64 / nf;
            b_right[j] = scale * b_right[j] + (1.0 - t) * self.sigma * normal;
            s_right[j] += w as i64;
        }
    }
}

/// One draw of the coupling for `n` a power of two and `0 <= z <= n`.
pub fn kmt_couple<R: Rng + ?Sized>(rng: &mut R, n: usize, z: usize, p: f64) -> Result<CouplingSample> {
    if !n.is_power_of_two() {
        return Err(invalid(format!("n={n} must be a power of two")));
    }
    if z > n {
        return Err(invalid(format!("z={z} exceeds n={n}")));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(invalid(format!("p={p} must lie in (0,1)")));
    }
    let mut bridge = vec![0.0; n + 1];
    let mut walk = vec![0i64; n + 1];
    let mut c = Coupler { rng, lf: LnFactorial::new(n), sigma: (p * (1.0 - p)).sqrt() };
    c.build(n, z, &mut bridge, &mut walk);
    let delta = delta_statistic(&bridge, &walk, z);
    let walk = UpRightPath::new(0, walk)?;
    Ok(CouplingSample { n, z, p, bridge, walk, delta })
}

/// Summary of `Delta(n, z)` over replicas.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaRow {
    pub n: usize,
    pub z: usize,
    pub median_delta: f64,
    pub q99_delta: f64,
    pub mean_delta: f64,
    /// Standard error of the median from the order-statistic interval
    /// `(x_{(n/2 + sqrt(n))} - x_{(n/2 - sqrt(n))}) / 2`.
    pub median_se: f64,
}

/// Per-`n` table plus the least-squares fit of the median against `(log n)^2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaGrowth {
    pub p: f64,
    pub rows: Vec<DeltaRow>,
    pub slope: f64,
    pub intercept: f64,
}

/// Empirical quantile with linear interpolation on sorted data.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = q * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Summarizes replicas of `Delta(n, z)`.
pub fn delta_row(n: usize, z: usize, mut deltas: Vec<f64>) -> DeltaRow {
    deltas.sort_by(f64::total_cmp);
    let r = deltas.len();
    let half = (r as f64).sqrt();
    let lo = ((r as f64 / 2.0 - half).floor().max(0.0)) as usize;
    let hi = ((r as f64 / 2.0 + half).ceil() as usize).min(r - 1);
    DeltaRow {
        n,
        z,
        median_delta: quantile_sorted(&deltas, 0.5),
        q99_delta: quantile_sorted(&deltas, 0.99),
        mean_delta: deltas.iter().sum::<f64>() / r as f64,
        median_se: (deltas[hi] - deltas[lo]) / 2.0,
    }
}

/// Ordinary least squares `y = a + b x`; returns `(a, b)`.
pub fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let b = sxy / sxx;
    (my - b * mx, b)
}

/// `Delta(n, floor(p n))` over replicas for each `n`.
pub fn delta_growth_experiment(p: f64, n_list: &[usize], replicas: usize, seed: u64, workers: usize) -> Result<DeltaGrowth> {
    let mut rows = Vec::with_capacity(n_list.len());
    for (i, &n) in n_list.iter().enumerate() {
        let z = (p * n as f64).floor() as usize;
        let master = seed.wrapping_add(i as u64);
        let deltas: Result<Vec<f64>> =
            run_replicas(master, replicas, workers, |_, rng| kmt_couple(rng, n, z, p).map(|s| s.delta))
                .into_iter()
                .collect();
        rows.push(delta_row(n, z, deltas?));
    }
    let x: Vec<f64> = rows.iter().map(|r| (r.n as f64).ln().powi(2)).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.median_delta).collect();
    let (intercept, slope) = if rows.len() >= 2 { least_squares(&x, &y) } else { (f64::NAN, f64::NAN) };
    Ok(DeltaGrowth { p, rows, slope, intercept })
}

/// Result of comparing the exact conditional pmf with the Gaussian formula.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalClt {
    pub n: usize,
    pub z: usize,
    pub m: usize,
    pub sigma2: f64,
    pub max_rel_error: f64,
    /// Centered value `w` attaining the maximum.
    pub argmax_w: f64,
    pub points: usize,
}

/// Maximum over `|w| <= w_max` of
/// `|P(S_m = w + (m/n) z | S_n = z) / g(w) - 1|` with `m = floor(n/2)`,
/// `g(w) = (2 pi s^2)^{-1/2} exp(-w^2 / 2 s^2)` and `s^2 = (n/4)(z/n)(1 - z/n)`.
pub fn local_clt_check(n: usize, z: usize, w_max: f64) -> Result<LocalClt> {
    if n < 2 || z == 0 || z >= n {
        return Err(invalid(format!("need n >= 2 and 0 < z < n, got n={n} z={z}")));
    }
    let m = n / 2;
    let nf = n as f64;
    let zf = z as f64;
    let sigma2 = nf / 4.0 * (zf / nf) * (1.0 - zf / nf);
    let center = m as f64 / nf * zf;
    let (lo, pmf) = midpoint_pmf_with(&LnFactorial::new(n), n, m, z);
    let mut best = (0.0f64, 0.0f64);
    let mut points = 0;
    for (i, &prob) in pmf.iter().enumerate() {
        let w = (lo + i) as f64 - center;
        if w.abs() > w_max {
            continue;
        }
        points += 1;
        let g = (-w * w / (2.0 * sigma2)).exp() / (2.0 * std::f64::consts::PI * sigma2).sqrt();
        let rel = (prob / g - 1.0).abs();
        if rel > best.0 {
            best = (rel, w);
        }
    }
    Ok(LocalClt { n, z, m, sigma2, max_rel_error: best.0, argmax_w: best.1, points })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::rng_from_seed;

    #[test]
    fn midpoint_pmf_examples() {
        let pmf = conditional_midpoint_pmf(4, 2, 2).unwrap();
        assert_eq!(pmf.iter().map(|e| e.0).collect::<Vec<_>>(), vec![0, 1, 2]);
        assert!((pmf[1].1 - 2.0 / 3.0).abs() < 1e-14);
        assert!((pmf[0].1 - 1.0 / 6.0).abs() < 1e-14 && (pmf[2].1 - 1.0 / 6.0).abs() < 1e-14);
        assert_eq!(conditional_midpoint_pmf(10, 5, 0).unwrap(), vec![(0, 1.0)]);
        let sym = conditional_midpoint_pmf(20, 10, 7).unwrap();
        for (a, b) in sym.iter().zip(sym.iter().rev()) {
            assert!((a.1 - b.1).abs() < 1e-14);
        }
    }

    #[test]
    fn quantile_map_is_monotone_and_pinned() {
        let mut prev = 0;
        for i in -400..=400 {
            let x = i as f64 / 50.0;
            let (_, w) = quantile_couple_midpoint(x, 16, 8, 8, 0.5).unwrap();
            assert!(w >= prev);
            prev = w;
            assert_eq!(quantile_couple_midpoint(x, 16, 8, 0, 0.5).unwrap().1, 0);
        }
        assert_eq!(quantile_couple_midpoint(-40.0, 16, 8, 8, 0.5).unwrap().1, 0);
        assert_eq!(quantile_couple_midpoint(40.0, 16, 8, 8, 0.5).unwrap().1, 8);
    }

    #[test]
    fn coupling_shapes_and_bounds() {
        let mut rng = rng_from_seed(4);
        for n in [1usize, 2, 4, 64] {
            for z in [0, n / 2, n] {
                let s = kmt_couple(&mut rng, n, z, 0.5).unwrap();
                assert_eq!(s.walk.values().len(), n + 1);
                assert_eq!(s.walk.at(n as i64), z as i64);
                assert_eq!(s.bridge[0], 0.0);
                assert_eq!(s.bridge[n], 0.0);
                let sup = s.bridge.iter().map(|b| b.abs()).fold(0.0, f64::max) * (n as f64).sqrt();
                assert!(s.delta <= 2.0 * n as f64 + sup);
            }
        }
        assert!(kmt_couple(&mut rng, 6, 3, 0.5).is_err());
    }

    #[test]
    fn bridge_does_not_depend_on_z() {
        let a = kmt_couple(&mut rng_from_seed(9), 32, 3, 0.3).unwrap();
        let b = kmt_couple(&mut rng_from_seed(9), 32, 20, 0.3).unwrap();
        assert_eq!(a.bridge, b.bridge);
    }

    #[test]
    fn local_clt_improves() {
        let e: Vec<f64> = [100usize, 1000, 10000]
            .iter()
            .map(|&n| local_clt_check(n, n / 2, (n as f64).powf(0.6)).unwrap().max_rel_error)
            .collect();
        assert!(e[0] > e[1] && e[1] > e[2]);
        assert!(e[2] <= 0.1);
    }
}
