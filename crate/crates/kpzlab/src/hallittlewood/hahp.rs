//! The homogeneous ascending Hall-Littlewood process: exact probabilities,
//! exhaustive listing and an exact sampler built from branching tables.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{
    for_each_interlaced_below, phi_rows, principal_q, psi, psi_rows, InterlacingSequence, Partition,
};
use crate::error::{invalid, Error, Result};
use crate::paths::UpRightPath;

/// Parameters `(M, N, t, zeta)` of the process.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HahpParams {
    pub m: usize,
    pub n: usize,
    pub t: f64,
    pub zeta: f64,
}

impl HahpParams {
    pub fn new(m: usize, n: usize, t: f64, zeta: f64) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(invalid("M and N must be positive"));
        }
        for (name, v) in [("t", t), ("zeta", zeta)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(invalid(format!("{name} must lie in (0,1), got {v}")));
            }
        }
        Ok(Self { m, n, t, zeta })
    }

    /// `((1 - zeta) / (1 - t zeta))^{NM}`.
    pub fn normalization(&self) -> f64 {
        ((1.0 - self.zeta) / (1.0 - self.t * self.zeta)).powi((self.n * self.m) as i32)
    }

    /// `((1 - t zeta) / (1 - zeta))^{NM}`, the Cauchy sum `sum_l P_l(1^M) Q_l(zeta^N)`.
    pub fn partition_function(&self) -> f64 {
        1.0 / self.normalization()
    }

    /// Law of `|lambda(M)|` on `0..=k_max`. By the graded Cauchy identity it is
    /// the `NM`-fold convolution of `p(0) = c`, `p(k) = c (1 - t) zeta^k`
    /// with `c = (1 - zeta)/(1 - t zeta)`.
    pub fn weight_pmf(&self, k_max: usize) -> Vec<f64> {
        let c = (1.0 - self.zeta) / (1.0 - self.t * self.zeta);
        let single: Vec<f64> = (0..=k_max)
            .map(|k| if k == 0 { c } else { c * (1.0 - self.t) * self.zeta.powi(k as i32) })
            .collect();
        let mut acc = vec![0.0; k_max + 1];
        acc[0] = 1.0;
        for _ in 0..self.n * self.m {
            let mut next = vec![0.0; k_max + 1];
            for (i, &a) in acc.iter().enumerate().filter(|(_, &a)| a != 0.0) {
                for (j, &s) in single.iter().enumerate().take(k_max + 1 - i) {
                    next[i + j] += a * s;
                }
            }
            acc = next;
        }
        acc
    }

    /// Exact `P(|lambda(M)| > k)`.
    pub fn weight_tail(&self, k: usize) -> f64 {
        (1.0 - self.weight_pmf(k).iter().sum::<f64>()).max(0.0)
    }

    /// Chernoff bound on `P(|lambda(M)| > k)`, optimized over a grid of
    /// exponential tilts `u in (1, 1/zeta)`.
    pub fn weight_tail_geometric_bound(&self, k: usize) -> f64 {
        let nm = (self.n * self.m) as f64;
        let (z, t) = (self.zeta, self.t);
        (1..1000)
            .map(|i| {
                let u = 1.0 + (1.0 / z - 1.0) * i as f64 / 1000.0;
                let mgf = ((1.0 - z) * (1.0 - t * z * u) / ((1.0 - t * z) * (1.0 - z * u))).powf(nm);
                mgf * u.powf(-(k as f64 + 1.0))
            })
            .fold(1.0, f64::min)
    }

    /// Smallest weight cap whose exact tail is below `target`.
    pub fn weight_cap_for_tail(&self, target: f64) -> usize {
        let mut k = 8;
        while self.weight_tail(k) >= target {
            k += 8;
        }
        while k > 0 && self.weight_tail(k - 1) < target {
            k -= 1;
        }
        k
    }
}

/// Probability of a sequence under the process:
/// `norm * prod_i psi_{lambda(i)/lambda(i-1)} * Q_{lambda(M)}(zeta^N)`.
pub fn hahp_prob(seq: &InterlacingSequence, params: &HahpParams) -> f64 {
    if seq.len() != params.m {
        return 0.0;
    }
    let mut prod = params.normalization();
    for i in 1..=params.m {
        prod *= psi(&seq.at(i), &seq.at(i - 1), params.t);
        if prod == 0.0 {
            return 0.0;
        }
    }
    prod * principal_q(&seq.at(params.m), params.zeta, params.n, params.t)
}

/// Truncation of the unbounded support.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Cap {
    /// Keep `lambda(M)_1 <= H`.
    Height(u32),
    /// Keep `|lambda(M)| <= K`.
    Weight(u32),
}

impl Cap {
    fn admits(&self, parts: &[u32]) -> bool {
        match *self {
            Cap::Height(h) => parts.first().is_none_or(|&p| p <= h),
            Cap::Weight(k) => parts.iter().map(|&p| u64::from(p)).sum::<u64>() <= u64::from(k),
        }
    }

    /// Upper bound on the mass this cap removes. The exact tail of
    /// `|lambda(M)|` bounds both kinds since `lambda_1 <= |lambda|`.
    pub fn tail_bound(&self, params: &HahpParams) -> f64 {
        match *self {
            Cap::Height(h) => params.weight_tail(h as usize),
            Cap::Weight(k) => params.weight_tail(k as usize),
        }
    }
}

/// Default bound on the number of listed sequences.
pub const HAHP_LIST_GUARD: u128 = 5_000_000;

/// All sequences with `lambda(M)` inside the cap, with their probabilities.
#[derive(Clone, Debug)]
pub struct HahpEnumeration {
    pub params: HahpParams,
    pub cap: Cap,
    pub entries: Vec<(InterlacingSequence, f64)>,
    /// Upper bound on the probability of the sequences not listed.
    pub tail_bound: f64,
}

impl HahpEnumeration {
    pub fn listed_mass(&self) -> f64 {
        self.entries.iter().map(|(_, p)| p).sum()
    }

    /// Law of the first `lines` conjugate lines `lambda'_j` on `[0, M]`.
    pub fn line_law(&self, lines: usize) -> Vec<(Vec<UpRightPath>, f64)> {
        self.entries
            .iter()
            .map(|(seq, p)| (super::line_ensemble_from_sequence(seq, lines).curves().to_vec(), *p))
            .collect()
    }
}

/// Lists every sequence with `lambda(M)` inside `cap`.
pub fn enumerate_hahp(params: &HahpParams, cap: Cap) -> Result<HahpEnumeration> {
    let len = params.m.min(params.n);
    let tops = partitions_in_cap(len, cap);
    let mut entries = Vec::new();
    for top in tops {
        let q = principal_q(&top, params.zeta, params.n, params.t);
        if q == 0.0 {
            continue;
        }
        let mut chain = vec![Partition::empty(); params.m];
        chain[params.m - 1] = top.clone();
        let base = params.normalization() * q;
        descend(params, params.m, base, &mut chain, &mut entries)?;
    }
    Ok(HahpEnumeration {
        params: *params,
        cap,
        entries,
        tail_bound: cap.tail_bound(params),
    })
}

fn descend(
    params: &HahpParams,
    level: usize,
    weight: f64,
    chain: &mut Vec<Partition>,
    out: &mut Vec<(InterlacingSequence, f64)>,
) -> Result<()> {
    if level == 1 {
        let w = weight * psi(&chain[0], &Partition::empty(), params.t);
        if w > 0.0 {
            if out.len() as u128 >= HAHP_LIST_GUARD {
                return Err(Error::GuardExceeded {
                    what: "HAHP listing",
                    needed: out.len() as u128 + 1,
                    guard: HAHP_LIST_GUARD,
                });
            }
            out.push((InterlacingSequence::from_trusted(chain.clone()), w));
        }
        return Ok(());
    }
    let lam = chain[level - 1].clone();
    let mut subs = Vec::new();
    for_each_interlaced_below(&lam, level - 1, |mu| subs.push(mu.clone()));
    for mu in subs {
        let f = psi(&lam, &mu, params.t);
        if f > 0.0 {
            chain[level - 2] = mu;
            descend(params, level - 1, weight * f, chain, out)?;
        }
    }
    Ok(())
}

/// Partitions with at most `len` parts inside the cap.
pub fn partitions_in_cap(len: usize, cap: Cap) -> Vec<Partition> {
    let trie = PartitionTrie::new(len, cap);
    (0..trie.count()).map(|i| Partition::from_sorted(trie.parts(i).iter().copied())).collect()
}

/// Dense index of all partitions with at most `len` parts inside a cap.
/// Children of a prefix are stored contiguously by next part value, so a
/// lookup is `len` array reads.
#[derive(Clone, Debug)]
pub struct PartitionTrie {
    len: usize,
    first_child: Vec<u32>,
    first_leaf: u32,
    parts: Vec<u32>,
}

impl PartitionTrie {
    pub fn new(len: usize, cap: Cap) -> Self {
        assert!(len >= 1, "partition tries need at least one row");
        let (limit, weight_limit) = match cap {
            Cap::Height(h) => (h, u32::MAX),
            Cap::Weight(k) => (k, k),
        };
        // Breadth-first allocation; a frontier entry is (last part, weight so far, prefix).
        let mut first_child: Vec<u32> = Vec::new();
        let mut frontier: Vec<(u32, u32, Vec<u32>)> = vec![(limit, 0, Vec::new())];
        let mut next_id: u32 = 1;
        for _ in 0..len {
            let mut next = Vec::new();
            for (last, used, prefix) in &frontier {
                first_child.push(next_id);
                let hi = (*last).min(weight_limit.saturating_sub(*used));
                for v in 0..=hi {
                    let mut p = prefix.clone();
                    p.push(v);
                    next.push((v, used + v, p));
                    next_id += 1;
                }
            }
            frontier = next;
        }
        let first_leaf = first_child.len() as u32;
        let parts = frontier.into_iter().flat_map(|(_, _, p)| p).collect();
        Self { len, first_child, first_leaf, parts }
    }

    /// Number of stored partitions.
    pub fn count(&self) -> usize {
        self.parts.len() / self.len
    }

    /// Padded parts of partition `id`.
    pub fn parts(&self, id: usize) -> &[u32] {
        &self.parts[id * self.len..(id + 1) * self.len]
    }

    /// Index of a padded partition known to lie inside the cap.
    #[inline]
    pub fn index(&self, parts: &[u32]) -> usize {
        let mut node = 0u32;
        for &v in parts {
            node = self.first_child[node as usize] + v;
        }
        (node - self.first_leaf) as usize
    }

    /// Calls `f(id, mu)` for every stored `mu ≺ lambda` (padded).
    pub fn for_each_below(&self, lambda: &[u32], mut f: impl FnMut(usize, &[u32])) {
        let len = self.len;
        let mut mu = vec![0u32; len];
        let lo = |d: usize| lambda.get(d + 1).copied().unwrap_or(0);
        mu.iter_mut().enumerate().for_each(|(d, m)| *m = lo(d));
        loop {
            f(self.index(&mu), &mu);
            // Odometer increment from the last digit.
            let mut d = len;
            loop {
                if d == 0 {
                    return;
                }
                d -= 1;
                if mu[d] < lambda[d] {
                    mu[d] += 1;
                    break;
                }
                mu[d] = lo(d);
            }
        }
    }
}

/// Exact sampler of the process restricted to `lambda(M)` inside a cap.
///
/// Tables `P_k(lambda) = P_lambda(1^k)` come from forward branching with
/// `psi`, and `Q(lambda) = Q_lambda(zeta^N)` from branching with `phi`. The
/// top partition is drawn from its exact marginal
/// `norm * P_lambda(1^M) Q_lambda(zeta^N)` and lower levels from the exact
/// conditionals `psi_{lambda(k)/mu} P_mu(1^{k-1}) / P_{lambda(k)}(1^k)`.
#[derive(Clone, Debug)]
pub struct HahpSampler {
    params: HahpParams,
    cap: Cap,
    trie: PartitionTrie,
    p_tables: Vec<Vec<f64>>,
    q_table: Vec<f64>,
    top_cdf: Vec<f64>,
    listed_mass: f64,
    tail_bound: f64,
    b_route_discrepancy: f64,
}

impl HahpSampler {
    pub fn new(params: HahpParams, cap: Cap) -> Result<Self> {
        let len = params.m.min(params.n);
        let trie = PartitionTrie::new(len, cap);
        let count = trie.count();
        if count as u128 > 20_000_000 {
            return Err(Error::GuardExceeded { what: "HAHP tables", needed: count as u128, guard: 20_000_000 });
        }
        let levels = params.m.max(params.n);
        let mut p_tables = Vec::with_capacity(levels + 1);
        let mut base = vec![0.0; count];
        base[trie.index(&vec![0; len])] = 1.0;
        p_tables.push(base.clone());
        for k in 1..=levels {
            let next = branch_pass(&trie, &p_tables[k - 1], |l, m| psi_rows(l, m, params.t));
            p_tables.push(next);
        }
        let mut q_unscaled = base;
        for _ in 1..=params.n {
            q_unscaled = branch_pass(&trie, &q_unscaled, |l, m| phi_rows(l, m, params.t));
        }
        let q_table: Vec<f64> = (0..count)
            .map(|i| q_unscaled[i] * params.zeta.powi(trie.parts(i).iter().sum::<u32>() as i32))
            .collect();

        // Second route: Q_lambda = b_lambda(t) P_lambda.
        let mut disc: f64 = 0.0;
        for i in 0..count {
            let lam = Partition::from_sorted(trie.parts(i).iter().copied());
            let alt = super::b_lambda(&lam, params.t) * p_tables[params.n][i];
            let scale = q_unscaled[i].abs().max(alt.abs());
            if scale > 0.0 {
                disc = disc.max((q_unscaled[i] - alt).abs() / scale);
            }
        }

        let norm = params.normalization();
        let mut top_cdf = Vec::with_capacity(count);
        let mut acc = 0.0;
        for i in 0..count {
            acc += norm * p_tables[params.m][i] * q_table[i];
            top_cdf.push(acc);
        }
        Ok(Self {
            params,
            cap,
            listed_mass: acc,
            tail_bound: cap.tail_bound(&params),
            trie,
            p_tables,
            q_table,
            top_cdf,
            b_route_discrepancy: disc,
        })
    }

    pub fn params(&self) -> &HahpParams {
        &self.params
    }

    pub fn cap(&self) -> Cap {
        self.cap
    }

    /// Probability mass of the capped support.
    pub fn listed_mass(&self) -> f64 {
        self.listed_mass
    }

    /// Upper bound on the mass outside the cap.
    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    /// Largest relative gap between the `phi` route and the `b_lambda P_lambda`
    /// route for `Q_lambda(zeta^N)`.
    pub fn q_route_discrepancy(&self) -> f64 {
        self.b_route_discrepancy
    }

    /// Number of partitions in the table universe.
    pub fn universe_size(&self) -> usize {
        self.trie.count()
    }

    /// `P_lambda(1^k)` from the tables.
    pub fn principal_p(&self, lambda: &Partition, k: usize) -> Option<f64> {
        self.lookup(lambda).map(|i| self.p_tables[k][i])
    }

    /// `Q_lambda(zeta^N)` from the tables.
    pub fn principal_q(&self, lambda: &Partition) -> Option<f64> {
        self.lookup(lambda).map(|i| self.q_table[i])
    }

    /// Exact probability of `lambda(M) = lambda`.
    pub fn top_marginal(&self, lambda: &Partition) -> Option<f64> {
        self.lookup(lambda)
            .map(|i| self.params.normalization() * self.p_tables[self.params.m][i] * self.q_table[i])
    }

    fn lookup(&self, lambda: &Partition) -> Option<usize> {
        let len = self.trie.len;
        if lambda.length() > len || !self.cap.admits(lambda.parts()) {
            return None;
        }
        let mut padded = lambda.parts().to_vec();
        padded.resize(len, 0);
        Some(self.trie.index(&padded))
    }

    /// Draws a sequence. Draws landing in the removed tail are redrawn; the
    /// second component counts those redraws.
    pub fn sample_counting<R: Rng + ?Sized>(&self, rng: &mut R) -> (InterlacingSequence, u64) {
        let mut redraws = 0;
        let top = loop {
            let u: f64 = rng.random();
            if u < self.listed_mass {
                let i = self.top_cdf.partition_point(|&c| c <= u).min(self.top_cdf.len() - 1);
                break i;
            }
            redraws += 1;
        };
        let m = self.params.m;
        let mut seq = vec![Partition::empty(); m];
        let mut cur = self.trie.parts(top).to_vec();
        for k in (1..=m).rev() {
            seq[k - 1] = Partition::from_sorted(cur.iter().copied());
            if k == 1 {
                break;
            }
            let cur_id = self.trie.index(&cur);
            let target = rng.random::<f64>() * self.p_tables[k][cur_id];
            let prev = &self.p_tables[k - 1];
            let mut acc = 0.0;
            let mut chosen: Option<Vec<u32>> = None;
            let mut last_positive: Option<Vec<u32>> = None;
            self.trie.for_each_below(&cur, |id, mu| {
                if chosen.is_some() || prev[id] == 0.0 {
                    return;
                }
                let w = psi_rows(&cur, mu, self.params.t) * prev[id];
                if w > 0.0 {
                    acc += w;
                    last_positive = Some(mu.to_vec());
                    if acc > target {
                        chosen = Some(mu.to_vec());
                    }
                }
            });
            cur = chosen.or(last_positive).expect("positive conditional mass");
        }
        (InterlacingSequence::from_trusted(seq), redraws)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> InterlacingSequence {
        self.sample_counting(rng).0
    }
}

/// `out[lambda] = sum_{mu ≺ lambda} coef(lambda, mu) prev[mu]`.
fn branch_pass(trie: &PartitionTrie, prev: &[f64], coef: impl Fn(&[u32], &[u32]) -> f64) -> Vec<f64> {
    (0..trie.count())
        .map(|id| {
            let lam = trie.parts(id);
            let mut acc = 0.0;
            trie.for_each_below(lam, |mid, mu| {
                let p = prev[mid];
                if p != 0.0 {
                    acc += coef(lam, mu) * p;
                }
            });
            acc
        })
        .collect()
}

/// Draws one sequence exactly (up to the cap's tail, which is redrawn).
pub fn sample_hahp_exact<R: Rng + ?Sized>(
    rng: &mut R,
    params: &HahpParams,
    cap: Cap,
) -> Result<InterlacingSequence> {
    Ok(HahpSampler::new(*params, cap)?.sample(rng))
}
