//! The Hall-Littlewood Gibbs weight `W_t`, its acceptance probability, the
//! rejection resampling kernel, exact conditional laws and exhaustive
//! verifiers of the weak monotonicity inequalities.

use rand::Rng;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::paths::{enumerate_bridges, sample_uniform_bridge, BridgeSpec, UpRightPath};

/// Absolute tolerance for every exact inequality check.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// A neighbouring curve: either a finite path or the infinite sentinel
/// (`+inf` above, `-inf` below).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Boundary {
    Infinite,
    Path(UpRightPath),
}

impl Boundary {
    pub fn path(&self) -> Option<&UpRightPath> {
        match self {
            Boundary::Infinite => None,
            Boundary::Path(p) => Some(p),
        }
    }
}

/// Everything the weight of a single curve depends on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GibbsContext {
    t: f64,
    t0: i64,
    t1: i64,
    s: Vec<i64>,
    top: Boundary,
    bottom: Boundary,
}

impl GibbsContext {
    /// Validates `t in (0, 1)`, `S` inside `[t0 + 1, t1]` and neighbour domains.
    pub fn new(
        t: f64,
        t0: i64,
        t1: i64,
        s: impl IntoIterator<Item = i64>,
        top: Boundary,
        bottom: Boundary,
    ) -> Result<Self> {
        if !(t > 0.0 && t < 1.0) {
            return Err(invalid(format!("t must lie in (0,1), got {t}")));
        }
        if t0 >= t1 {
            return Err(invalid(format!("interval [{t0}, {t1}] is empty")));
        }
        let mut s: Vec<i64> = s.into_iter().collect();
        s.sort_unstable();
        s.dedup();
        if s.iter().any(|&i| i <= t0 || i > t1) {
            return Err(invalid(format!("S must lie in [{}, {t1}]", t0 + 1)));
        }
        for b in [&top, &bottom] {
            if let Some(p) = b.path() {
                if p.t0() > t0 || p.t1() < t1 {
                    return Err(invalid("neighbour path does not cover the interval"));
                }
            }
        }
        Ok(Self { t, t0, t1, s, top, bottom })
    }

    /// Context with `S = [t0 + 1, t1]`.
    pub fn full(t: f64, t0: i64, t1: i64, top: Boundary, bottom: Boundary) -> Result<Self> {
        Self::new(t, t0, t1, t0 + 1..=t1, top, bottom)
    }

    pub fn t(&self) -> f64 {
        self.t
    }
    pub fn interval(&self) -> (i64, i64) {
        (self.t0, self.t1)
    }
    pub fn s(&self) -> &[i64] {
        &self.s
    }
    pub fn top(&self) -> &Boundary {
        &self.top
    }
    pub fn bottom(&self) -> &Boundary {
        &self.bottom
    }

    /// The bridge spec for endpoints `a`, `b` on this interval.
    pub fn bridge(&self, a: i64, b: i64) -> Result<BridgeSpec> {
        BridgeSpec::new(self.t0, self.t1, a, b)
    }
}

/// `t^d` for a nonnegative integer exponent.
#[inline]
pub fn tpow(t: f64, d: i64) -> f64 {
    if d <= 64 {
        t.powi(d as i32)
    } else {
        (d as f64 * t.ln()).exp()
    }
}

/// Running product that continues in log space once it becomes tiny.
struct Product {
    value: f64,
    log: f64,
    log_comp: f64,
    in_log: bool,
}

impl Product {
    fn new() -> Self {
        Self { value: 1.0, log: 0.0, log_comp: 0.0, in_log: false }
    }

    fn mul(&mut self, f: f64) {
        if !self.in_log {
            let v = self.value * f;
            if v >= 1e-300 {
                self.value = v;
                return;
            }
            self.in_log = true;
            self.log = self.value.ln();
        }
        // Kahan-compensated accumulation of logarithms.
        let y = f.ln() - self.log_comp;
        let s = self.log + y;
        self.log_comp = (s - self.log) - y;
        self.log = s;
    }

    fn finish(self) -> f64 {
        if self.in_log {
            self.log.exp()
        } else {
            self.value
        }
    }
}

/// The weight `W_t(T0, T1, ell, top, bottom; S)`.
///
/// For each `i` in `S` it multiplies `1 - t^{D(i-1)}` whenever the gap
/// `D = top - ell` (respectively `ell - bottom`) shrinks by one from `i - 1`
/// to `i`; it returns 0 if `ell` leaves `[bottom, top]` at a point of `S`.
pub fn weight_w(ctx: &GibbsContext, ell: &UpRightPath) -> f64 {
    let mut prod = Product::new();
    for &i in &ctx.s {
        let (l_prev, l_cur) = (ell.at(i - 1), ell.at(i));
        if let Some(top) = ctx.top.path() {
            let (d_prev, d_cur) = (top.at(i - 1) - l_prev, top.at(i) - l_cur);
            if d_cur < 0 {
                return 0.0;
            }
            if d_prev - d_cur == 1 {
                prod.mul(1.0 - tpow(ctx.t, d_prev));
            }
        }
        if let Some(bot) = ctx.bottom.path() {
            let (d_prev, d_cur) = (l_prev - bot.at(i - 1), l_cur - bot.at(i));
            if d_cur < 0 {
                return 0.0;
            }
            if d_prev - d_cur == 1 {
                prod.mul(1.0 - tpow(ctx.t, d_prev));
            }
        }
    }
    prod.finish()
}

/// `Z_t = E_free[W_t]` by enumeration of `Omega(T0, T1; a, b)`.
pub fn acceptance_z_exact(ctx: &GibbsContext, a: i64, b: i64) -> Result<f64> {
    let paths = enumerate_bridges(&ctx.bridge(a, b)?)?;
    let total: f64 = paths.iter().map(|p| weight_w(ctx, p)).sum();
    Ok(total / paths.len() as f64)
}

/// Monte-Carlo estimate of `Z_t` with its standard error.
pub fn acceptance_z_mc<R: Rng + ?Sized>(
    rng: &mut R,
    ctx: &GibbsContext,
    a: i64,
    b: i64,
    n_samples: usize,
) -> Result<(f64, f64)> {
    if n_samples == 0 {
        return Err(invalid("n_samples must be positive"));
    }
    let spec = ctx.bridge(a, b)?;
    let (mut sum, mut sum2) = (0.0, 0.0);
    for _ in 0..n_samples {
        let w = weight_w(ctx, &sample_uniform_bridge(rng, &spec));
        sum += w;
        sum2 += w * w;
    }
    let n = n_samples as f64;
    let mean = sum / n;
    let var = if n_samples > 1 { ((sum2 - n * mean * mean) / (n - 1.0)).max(0.0) } else { 0.0 };
    Ok((mean, (var / n).sqrt()))
}

/// Outcome of one rejection resampling.
#[derive(Clone, Debug, PartialEq)]
pub struct ResampleReport {
    pub accepted_path: UpRightPath,
    /// Number of proposals drawn, including the accepted one.
    pub trials: u64,
    /// Mean weight of the proposals drawn, a running estimate of `Z_t`.
    pub acceptance_estimate: f64,
}

/// Draws uniform bridges and one uniform `U` per trial, accepting the first
/// proposal with `W_t > U`.
pub fn gibbs_resample<R: Rng + ?Sized>(
    rng: &mut R,
    ctx: &GibbsContext,
    a: i64,
    b: i64,
    max_trials: u64,
) -> Result<ResampleReport> {
    let spec = ctx.bridge(a, b)?;
    let mut weight_sum = 0.0;
    for trial in 1..=max_trials {
        let proposal = sample_uniform_bridge(rng, &spec);
        let w = weight_w(ctx, &proposal);
        weight_sum += w;
        let u: f64 = rng.random();
        if w > u {
            return Ok(ResampleReport {
                accepted_path: proposal,
                trials: trial,
                acceptance_estimate: weight_sum / trial as f64,
            });
        }
    }
    Err(Error::MaxTrials {
        trials: max_trials,
        estimate: weight_sum / max_trials.max(1) as f64,
    })
}

/// The normalized law `W_t / (|Omega| Z_t)` over `Omega(T0, T1; a, b)`, in
/// enumeration order.
pub fn conditional_law_exact(ctx: &GibbsContext, a: i64, b: i64) -> Result<Vec<(UpRightPath, f64)>> {
    let paths = enumerate_bridges(&ctx.bridge(a, b)?)?;
    let weights: Vec<f64> = paths.iter().map(|p| weight_w(ctx, p)).collect();
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(Error::ZeroAcceptance);
    }
    Ok(paths.into_iter().zip(weights).map(|(p, w)| (p, w / total)).collect())
}

/// Exact output law of [`gibbs_resample`] with no trial limit, derived from
/// the trial structure: a trial proposes `ell` with probability `1/|Omega|`
/// and accepts it with probability `W(ell)`, so the output is `ell` with
/// probability `sum_k (1 - Z)^(k-1) W(ell)/|Omega|`.
pub fn resample_kernel_exact(ctx: &GibbsContext, a: i64, b: i64) -> Result<Vec<(UpRightPath, f64)>> {
    let paths = enumerate_bridges(&ctx.bridge(a, b)?)?;
    let omega = paths.len() as f64;
    let per_trial: Vec<f64> = paths.iter().map(|p| weight_w(ctx, p) / omega).collect();
    let z: f64 = per_trial.iter().sum();
    if z <= 0.0 {
        return Err(Error::ZeroAcceptance);
    }
    let geometric = 1.0 / (1.0 - (1.0 - z));
    Ok(paths.into_iter().zip(per_trial).map(|(p, q)| (p, q * geometric)).collect())
}

/// `c(t) = prod_{i>=1} (1 - t^i)`, truncated once the multiplicative tail
/// bound `t^(K+1) / (1 - t)` drops below `tol`.
pub fn euler_c(t: f64, tol: f64) -> Result<f64> {
    if !(t > 0.0 && t < 1.0) {
        return Err(invalid(format!("t must lie in (0,1), got {t}")));
    }
    if !(tol > 0.0) {
        return Err(invalid("tol must be positive"));
    }
    let mut c = 1.0;
    let mut tk = 1.0;
    loop {
        tk *= t;
        c *= 1.0 - tk;
        if tk * t / (1.0 - t) < tol {
            return Ok(c);
        }
    }
}

/// Tolerance used when evaluating `c(t)` for the verifiers.
pub const EULER_TOL: f64 = 1e-15;

/// A line ensemble `L_1 >= L_2 >= ... ` on a common interval.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineEnsemble {
    curves: Vec<UpRightPath>,
}

impl LineEnsemble {
    /// Validates common domains and the weak ordering at every integer time.
    pub fn new(curves: Vec<UpRightPath>) -> Result<Self> {
        if let Some(first) = curves.first() {
            let dom = (first.t0(), first.t1());
            if curves.iter().any(|c| (c.t0(), c.t1()) != dom) {
                return Err(invalid("curves must share their domain"));
            }
            for w in curves.windows(2) {
                if w[0].values().iter().zip(w[1].values()).any(|(a, b)| a < b) {
                    return Err(invalid("curves are not weakly ordered"));
                }
            }
        }
        Ok(Self { curves })
    }

    pub fn curves(&self) -> &[UpRightPath] {
        &self.curves
    }

    pub fn len(&self) -> usize {
        self.curves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.curves.is_empty()
    }

    /// Context for resampling curve `i` (1-based) with the given `S`; the
    /// curve above curve 1 is `+inf` and the curve below the last is `-inf`.
    pub fn context(&self, i: usize, t: f64, s: impl IntoIterator<Item = i64>) -> Result<GibbsContext> {
        if i == 0 || i > self.curves.len() {
            return Err(invalid(format!("curve index {i} out of range")));
        }
        let c = &self.curves[i - 1];
        let top = if i == 1 { Boundary::Infinite } else { Boundary::Path(self.curves[i - 2].clone()) };
        let bottom = self
            .curves
            .get(i)
            .map_or(Boundary::Infinite, |p| Boundary::Path(p.clone()));
        GibbsContext::new(t, c.t0(), c.t1(), s, top, bottom)
    }
}

/// Exact test of the resampling invariance of a finite law on line
/// ensembles. Curve `i` (1-based) of every ensemble is resampled on its full
/// interval with the given `S`, conditionally on the other curves and its
/// endpoints, and the total variation between the input law and the output
/// law is returned. Probabilities need not be normalized.
pub fn gibbs_invariance_tv(law: &[(Vec<UpRightPath>, f64)], i: usize, t: f64, s: &[i64]) -> Result<f64> {
    type Key = (Vec<UpRightPath>, i64, i64);
    let total: f64 = law.iter().map(|(_, p)| p).sum();
    if !(total > 0.0) {
        return Err(invalid("law has no mass"));
    }
    let mut groups: FxHashMap<Key, f64> = FxHashMap::default();
    let mut input: FxHashMap<Vec<UpRightPath>, f64> = FxHashMap::default();
    for (curves, p) in law {
        if i == 0 || i > curves.len() {
            return Err(invalid(format!("curve index {i} out of range")));
        }
        let c = &curves[i - 1];
        let mut rest = curves.clone();
        rest.remove(i - 1);
        *groups.entry((rest, c.at(c.t0()), c.at(c.t1()))).or_default() += p / total;
        *input.entry(curves.clone()).or_default() += p / total;
    }
    let mut output: FxHashMap<Vec<UpRightPath>, f64> = FxHashMap::default();
    for ((rest, a, b), mass) in groups {
        let (t0, t1) = law
            .first()
            .map(|(c, _)| (c[i - 1].t0(), c[i - 1].t1()))
            .expect("nonempty law");
        let top = if i == 1 { Boundary::Infinite } else { Boundary::Path(rest[i - 2].clone()) };
        let bottom = rest.get(i - 1).map_or(Boundary::Infinite, |p| Boundary::Path(p.clone()));
        let ctx = GibbsContext::new(t, t0, t1, s.iter().copied(), top, bottom)?;
        for (path, q) in resample_kernel_exact(&ctx, a, b)? {
            let mut curves = rest.clone();
            curves.insert(i - 1, path);
            *output.entry(curves).or_default() += mass * q;
        }
    }
    let mut tv = 0.0;
    for (k, p) in &input {
        tv += (p - output.get(k).copied().unwrap_or(0.0)).abs();
    }
    for (k, q) in &output {
        if !input.contains_key(k) {
            tv += q;
        }
    }
    Ok(tv / 2.0)
}

/// One `(T, k1, k2)` comparison of the conditioned expectations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonotoneRow {
    #[serde(rename = "T")]
    pub time: i64,
    pub k1: i64,
    pub k2: i64,
    /// `c(t) E_free[W | ell(T) = k1]`.
    pub lhs: f64,
    /// `E_free[W | ell(T) = k2]`.
    pub rhs: f64,
    pub pass: bool,
}

/// Result of [`verify_monotone_lemma`].
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct MonotoneReport {
    pub rows: Vec<MonotoneRow>,
    /// Ordered set pairs `(A, B)` with `min A >= max B` that were checked.
    pub set_pairs_checked: usize,
    pub set_pair_failures: usize,
    /// Thresholds `alpha` checked for the tail inequality.
    pub tail_checks: usize,
    pub tail_failures: usize,
    /// Some pair of paths with `ell' <= ell''` pointwise had `W(ell') > W(ell'')`.
    pub pointwise_order_violated: bool,
}

impl MonotoneReport {
    pub fn pair_failures(&self) -> usize {
        self.rows.iter().filter(|r| !r.pass).count()
    }

    pub fn all_pass(&self) -> bool {
        self.pair_failures() == 0 && self.set_pair_failures == 0 && self.tail_failures == 0
    }

    pub fn merge(&mut self, other: MonotoneReport) {
        self.rows.extend(other.rows);
        self.set_pairs_checked += other.set_pairs_checked;
        self.set_pair_failures += other.set_pair_failures;
        self.tail_checks += other.tail_checks;
        self.tail_failures += other.tail_failures;
        self.pointwise_order_violated |= other.pointwise_order_violated;
    }

    /// CSV `T,k1,k2,lhs,rhs,pass`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("T,k1,k2,lhs,rhs,pass\n");
        for r in &self.rows {
            s.push_str(&format!("{},{},{},{:e},{:e},{}\n", r.time, r.k1, r.k2, r.lhs, r.rhs, r.pass));
        }
        s
    }
}

/// Exhaustive check of the weak monotonicity of the acceptance weight for a
/// curve with top `+inf` and the given bottom path on `spec`'s interval:
///
/// * `c(t) E[W | ell(T) = k1] <= E[W | ell(T) = k2]` for all interior `T`
///   and `k1 <= k2` in the attainable range;
/// * the same with conditioning sets `B` below `A`, `|A|, |B| <= 3`;
/// * `P_W(ell(T) >= alpha) >= c(t) P_free(ell(T) >= alpha)` for every `alpha`.
///
/// It also records whether pointwise domination of paths fails to order
/// their weights somewhere.
pub fn verify_monotone_lemma(
    t: f64,
    spec: &BridgeSpec,
    bottom: &UpRightPath,
    s: &[i64],
) -> Result<MonotoneReport> {
    let ctx = GibbsContext::new(
        t,
        spec.t0,
        spec.t1,
        s.iter().copied(),
        Boundary::Infinite,
        Boundary::Path(bottom.clone()),
    )?;
    let c = euler_c(t, EULER_TOL)?;
    let paths = enumerate_bridges(spec)?;
    let weights: Vec<f64> = paths.iter().map(|p| weight_w(&ctx, p)).collect();
    let total_w: f64 = weights.iter().sum();
    let mut report = MonotoneReport::default();

    for time in spec.t0 + 1..spec.t1 {
        let (lo, hi) = (spec.min_at(time), spec.max_at(time));
        let width = (hi - lo + 1) as usize;
        let mut wsum = vec![0.0; width];
        let mut count = vec![0usize; width];
        for (p, &w) in paths.iter().zip(&weights) {
            let k = (p.at(time) - lo) as usize;
            wsum[k] += w;
            count[k] += 1;
        }
        let mean = |k: usize| wsum[k] / count[k] as f64;
        for k1 in 0..width {
            for k2 in k1..width {
                let (lhs, rhs) = (c * mean(k1), mean(k2));
                report.rows.push(MonotoneRow {
                    time,
                    k1: lo + k1 as i64,
                    k2: lo + k2 as i64,
                    lhs,
                    rhs,
                    pass: lhs <= rhs + TIE_TOLERANCE,
                });
            }
        }
        let subsets = small_subsets(width, 3);
        for a in &subsets {
            for b in &subsets {
                if a[0] < *b.last().expect("nonempty") {
                    continue;
                }
                let cond = |set: &[usize]| {
                    let (w, n) = set.iter().fold((0.0, 0usize), |(w, n), &k| (w + wsum[k], n + count[k]));
                    w / n as f64
                };
                report.set_pairs_checked += 1;
                if c * cond(b) > cond(a) + TIE_TOLERANCE {
                    report.set_pair_failures += 1;
                }
            }
        }
        if total_w > 0.0 {
            let n_paths = paths.len() as f64;
            for alpha in lo..=hi {
                let k0 = (alpha - lo) as usize;
                let pw: f64 = wsum[k0..].iter().sum::<f64>() / total_w;
                let pf = count[k0..].iter().sum::<usize>() as f64 / n_paths;
                report.tail_checks += 1;
                if pw + TIE_TOLERANCE < c * pf {
                    report.tail_failures += 1;
                }
            }
        }
    }

    'outer: for (i, p) in paths.iter().enumerate() {
        for (j, q) in paths.iter().enumerate() {
            if i != j
                && weights[i] > weights[j] + TIE_TOLERANCE
                && p.values().iter().zip(q.values()).all(|(x, y)| x <= y)
            {
                report.pointwise_order_violated = true;
                break 'outer;
            }
        }
    }
    Ok(report)
}

/// Aggregate of [`verify_monotone_suite`].
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MonotoneSuite {
    pub t: f64,
    pub instances: u64,
    pub pair_checks: u64,
    pub pair_failures: u64,
    pub set_pairs_checked: u64,
    pub set_pair_failures: u64,
    pub tail_checks: u64,
    pub tail_failures: u64,
    /// Largest `lhs - rhs` over the pointwise comparisons.
    pub max_excess: f64,
}

impl MonotoneSuite {
    pub fn all_pass(&self) -> bool {
        self.pair_failures == 0 && self.set_pair_failures == 0 && self.tail_failures == 0
    }
}

/// Runs [`verify_monotone_lemma`] on every bridge `[0, L] -> [a, b]` with
/// `2 <= L <= max_len` and `0 <= a <= b <= box_height`, every bottom path on
/// `[0, L]` with values in `[0, box_height]` ending below the bridge
/// endpoints, and every `S` in `[1, L]`.
pub fn verify_monotone_suite(t: f64, max_len: i64, box_height: i64) -> Result<MonotoneSuite> {
    let mut suite = MonotoneSuite { t, max_excess: f64::NEG_INFINITY, ..Default::default() };
    for len in 2..=max_len {
        let mut bottoms = Vec::new();
        for z1 in 0..=box_height {
            for z2 in z1..=(z1 + len).min(box_height) {
                bottoms.extend(enumerate_bridges(&BridgeSpec::new(0, len, z1, z2)?)?);
            }
        }
        let s_sets: Vec<Vec<i64>> = (0u32..1 << len)
            .map(|mask| (1..=len).filter(|j| mask & (1 << (j - 1)) != 0).collect())
            .collect();
        for a in 0..=box_height {
            for b in a..=(a + len).min(box_height) {
                let spec = BridgeSpec::new(0, len, a, b)?;
                for bottom in bottoms.iter().filter(|p| p.at(0) <= a && p.at(len) <= b) {
                    for s in &s_sets {
                        let r = verify_monotone_lemma(t, &spec, bottom, s)?;
                        suite.instances += 1;
                        suite.pair_checks += r.rows.len() as u64;
                        suite.pair_failures += r.pair_failures() as u64;
                        suite.set_pairs_checked += r.set_pairs_checked as u64;
                        suite.set_pair_failures += r.set_pair_failures as u64;
                        suite.tail_checks += r.tail_checks as u64;
                        suite.tail_failures += r.tail_failures as u64;
                        for row in &r.rows {
                            suite.max_excess = suite.max_excess.max(row.lhs - row.rhs);
                        }
                    }
                }
            }
        }
    }
    Ok(suite)
}

/// Nonempty subsets of `0..n` with at most `max_size` elements, each sorted.
fn small_subsets(n: usize, max_size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(start: usize, n: usize, max_size: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if !cur.is_empty() {
            out.push(cur.clone());
        }
        if cur.len() == max_size {
            return;
        }
        for k in start..n {
            cur.push(k);
            rec(k + 1, n, max_size, cur, out);
            cur.pop();
        }
    }
    rec(0, n, max_size, &mut cur, &mut out);
    out
}

/// The counterexample pair on `[0, 2n]`: the bottom `ell'` is flat on
/// `[0, n]` then rises, `ell''` rises on `[0, n]` then is flat. Returns
/// `(context with bottom = ell', ell', ell'')` for endpoints `a = 0`, `b = n`.
pub fn slope_counterexample(n: i64, t: f64) -> Result<(GibbsContext, UpRightPath, UpRightPath)> {
    if n < 1 {
        return Err(invalid("n must be positive"));
    }
    let low: Vec<i64> = (0..=2 * n).map(|i| (i - n).max(0)).collect();
    let high: Vec<i64> = (0..=2 * n).map(|i| i.min(n)).collect();
    let low = UpRightPath::new(0, low)?;
    let high = UpRightPath::new(0, high)?;
    let ctx = GibbsContext::full(t, 0, 2 * n, Boundary::Infinite, Boundary::Path(low.clone()))?;
    Ok((ctx, low, high))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::rng_from_seed;

    fn path(t0: i64, v: &[i64]) -> UpRightPath {
        UpRightPath::new(t0, v.to_vec()).unwrap()
    }

    #[test]
    fn counterexample_weights() {
        for n in 1..=4 {
            for &t in &[0.3, 0.5, 0.7] {
                let (ctx, low, high) = slope_counterexample(n, t).unwrap();
                assert_eq!(weight_w(&ctx, &low), 1.0);
                let expected: f64 = (1..=n).map(|i| 1.0 - t.powi(i as i32)).product();
                assert!((weight_w(&ctx, &high) - expected).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn ordering_violation_gives_zero() {
        let top = path(0, &[1, 1, 1]);
        let ctx = GibbsContext::full(0.5, 0, 2, Boundary::Path(top), Boundary::Infinite).unwrap();
        assert_eq!(weight_w(&ctx, &path(0, &[1, 1, 2])), 0.0);
        assert!(weight_w(&ctx, &path(0, &[0, 1, 1])) > 0.0);
    }

    #[test]
    fn far_bottom_is_nearly_free() {
        let far = path(0, &[-1_000_000; 5]);
        let ell = path(0, &[0, 1, 1, 2, 2]);
        let ctx = GibbsContext::full(0.5, 0, 4, Boundary::Infinite, Boundary::Path(far)).unwrap();
        let w = weight_w(&ctx, &ell);
        assert_eq!(w, 1.0);
        let free = GibbsContext::full(0.5, 0, 4, Boundary::Infinite, Boundary::Infinite).unwrap();
        assert_eq!(weight_w(&free, &ell), 1.0);
    }

    #[test]
    fn large_gaps_use_log_powers() {
        assert!((tpow(0.9, 100) - 0.9f64.powi(100)).abs() < 1e-15);
        assert_eq!(tpow(0.5, 0), 1.0);
    }

    #[test]
    fn acceptance_examples() {
        let free = GibbsContext::full(0.4, 0, 4, Boundary::Infinite, Boundary::Infinite).unwrap();
        assert_eq!(acceptance_z_exact(&free, 0, 2).unwrap(), 1.0);
        let mut rng = rng_from_seed(9);
        assert_eq!(acceptance_z_mc(&mut rng, &free, 0, 2, 100).unwrap(), (1.0, 0.0));

        let (ctx, _, _) = slope_counterexample(2, 0.5).unwrap();
        let paths = enumerate_bridges(&ctx.bridge(0, 2).unwrap()).unwrap();
        assert_eq!(paths.len(), 6);
        let direct: f64 = paths.iter().map(|p| weight_w(&ctx, p)).sum::<f64>() / 6.0;
        assert_eq!(acceptance_z_exact(&ctx, 0, 2).unwrap(), direct);

        let high = path(0, &[5, 5, 5, 5, 5]);
        let blocked = GibbsContext::full(0.5, 0, 4, Boundary::Infinite, Boundary::Path(high)).unwrap();
        assert_eq!(acceptance_z_exact(&blocked, 0, 2).unwrap(), 0.0);
        assert_eq!(acceptance_z_mc(&mut rng, &blocked, 0, 2, 50).unwrap().0, 0.0);
        assert!(matches!(conditional_law_exact(&blocked, 0, 2), Err(Error::ZeroAcceptance)));
        assert!(matches!(
            gibbs_resample(&mut rng, &blocked, 0, 2, 100),
            Err(Error::MaxTrials { trials: 100, .. })
        ));
    }

    #[test]
    fn mc_matches_exact() {
        let (ctx, _, _) = slope_counterexample(3, 0.6).unwrap();
        let exact = acceptance_z_exact(&ctx, 0, 3).unwrap();
        let mut rng = rng_from_seed(10);
        let (est, se) = acceptance_z_mc(&mut rng, &ctx, 0, 3, 50_000).unwrap();
        assert!((est - exact).abs() < 4.0 * se, "{est} {exact} {se}");
    }

    #[test]
    fn free_resampling_is_uniform_with_one_trial() {
        let free = GibbsContext::full(0.4, 0, 4, Boundary::Infinite, Boundary::Infinite).unwrap();
        let mut rng = rng_from_seed(11);
        for _ in 0..100 {
            assert_eq!(gibbs_resample(&mut rng, &free, 0, 2, 1).unwrap().trials, 1);
        }
        let law = conditional_law_exact(&free, 0, 2).unwrap();
        assert!(law.iter().all(|(_, p)| (p - 1.0 / 6.0).abs() < 1e-15));
    }

    #[test]
    fn single_path_state_space() {
        let ctx = GibbsContext::full(0.4, 0, 3, Boundary::Infinite, Boundary::Infinite).unwrap();
        let law = conditional_law_exact(&ctx, 0, 3).unwrap();
        assert_eq!(law.len(), 1);
        assert_eq!(law[0].1, 1.0);
    }

    #[test]
    fn kernel_equals_conditional_law() {
        let (ctx, _, _) = slope_counterexample(3, 0.5).unwrap();
        let law = conditional_law_exact(&ctx, 0, 3).unwrap();
        let kernel = resample_kernel_exact(&ctx, 0, 3).unwrap();
        let tv: f64 = law.iter().zip(&kernel).map(|(a, b)| (a.1 - b.1).abs()).sum::<f64>() / 2.0;
        assert!(tv < 1e-15);
    }

    #[test]
    fn counterexample_table_and_resampling() {
        let (ctx, _, _) = slope_counterexample(2, 0.5).unwrap();
        let law = conditional_law_exact(&ctx, 0, 2).unwrap();
        let weights: Vec<f64> = law.iter().map(|(p, _)| weight_w(&ctx, p)).collect();
        let z: f64 = weights.iter().sum();
        for ((_, p), w) in law.iter().zip(&weights) {
            assert!((p - w / z).abs() < 1e-15);
        }
        let mut rng = rng_from_seed(12);
        let n = 100_000;
        let mut counts = vec![0usize; law.len()];
        for _ in 0..n {
            let r = gibbs_resample(&mut rng, &ctx, 0, 2, 10_000).unwrap();
            let idx = law.iter().position(|(p, _)| *p == r.accepted_path).unwrap();
            counts[idx] += 1;
        }
        for ((_, p), c) in law.iter().zip(&counts) {
            let se = (p * (1.0 - p) / n as f64).sqrt();
            assert!((*c as f64 / n as f64 - p).abs() < 4.0 * se + 1e-12);
        }
    }

    #[test]
    fn euler_c_examples() {
        let c = euler_c(0.5, 1e-15).unwrap();
        assert!((c - 0.288_788_095_086_602_4).abs() < 1e-14);
        assert!((euler_c(1e-9, 1e-15).unwrap() - 1.0).abs() < 2e-9);
        let grid: Vec<f64> = (1..20).map(|i| euler_c(i as f64 / 20.0, 1e-14).unwrap()).collect();
        assert!(grid.windows(2).all(|w| w[0] > w[1]));
        assert!(euler_c(1.0, 1e-9).is_err());
    }

    #[test]
    fn counterexample_report_shows_both_facts() {
        for n in 1..=3 {
            let (ctx, low, _) = slope_counterexample(n, 0.5).unwrap();
            let spec = ctx.bridge(0, n).unwrap();
            let report = verify_monotone_lemma(0.5, &spec, &low, ctx.s()).unwrap();
            assert!(report.all_pass());
            assert!(report.pointwise_order_violated);
            assert!(!report.rows.is_empty());
        }
    }

    #[test]
    fn near_zero_t_saturates() {
        let (ctx, low, _) = slope_counterexample(3, 1e-6).unwrap();
        let spec = ctx.bridge(0, 3).unwrap();
        let report = verify_monotone_lemma(1e-6, &spec, &low, ctx.s()).unwrap();
        assert!(report.all_pass());
        assert!(report.rows.iter().all(|r| r.lhs <= r.rhs + 1e-5));
    }

    #[test]
    fn ensemble_contexts() {
        let e = LineEnsemble::new(vec![path(0, &[2, 3, 3]), path(0, &[1, 1, 2])]).unwrap();
        let c1 = e.context(1, 0.5, 1..=2).unwrap();
        assert_eq!(c1.top(), &Boundary::Infinite);
        assert!(matches!(c1.bottom(), Boundary::Path(_)));
        let c2 = e.context(2, 0.5, 1..=2).unwrap();
        assert_eq!(c2.bottom(), &Boundary::Infinite);
        assert!(LineEnsemble::new(vec![path(0, &[0, 0, 0]), path(0, &[0, 1, 1])]).is_err());
    }

    #[test]
    fn monotone_csv_header() {
        let (ctx, low, _) = slope_counterexample(2, 0.5).unwrap();
        let spec = ctx.bridge(0, 2).unwrap();
        let csv = verify_monotone_lemma(0.5, &spec, &low, ctx.s()).unwrap().to_csv();
        assert!(csv.starts_with("T,k1,k2,lhs,rhs,pass\n"));
    }
}
