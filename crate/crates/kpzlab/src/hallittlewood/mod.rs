//! Partitions, one-variable skew Hall-Littlewood coefficients, principal
//! specializations, the ascending Hall-Littlewood process, plane partitions
//! and the conjugate-line ensemble.

mod hahp;
mod plane;

pub use hahp::*;
pub use plane::*;

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::gibbs::{tpow, LineEnsemble};
use crate::paths::UpRightPath;

/// A partition `lambda_1 >= lambda_2 >= ... > 0` (trailing zeros dropped).
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Partition(Vec<u32>);

impl Partition {
    /// Validates that `parts` is weakly decreasing and drops zeros.
    pub fn new(mut parts: Vec<u32>) -> Result<Self> {
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(invalid(format!("parts {parts:?} are not weakly decreasing")));
        }
        while parts.last() == Some(&0) {
            parts.pop();
        }
        Ok(Self(parts))
    }

    /// The empty partition.
    pub fn empty() -> Self {
        Self(Vec::new())
    }

    /// Builds from parts that are known to be weakly decreasing.
    pub(crate) fn from_sorted(parts: impl IntoIterator<Item = u32>) -> Self {
        let mut v: Vec<u32> = parts.into_iter().collect();
        debug_assert!(v.windows(2).all(|w| w[0] >= w[1]));
        while v.last() == Some(&0) {
            v.pop();
        }
        Self(v)
    }

    pub fn parts(&self) -> &[u32] {
        &self.0
    }

    /// `lambda_i` for 1-based `i`, zero beyond the length.
    pub fn part(&self, i: usize) -> u32 {
        if i == 0 {
            return u32::MAX;
        }
        self.0.get(i - 1).copied().unwrap_or(0)
    }

    /// Number of nonzero parts.
    pub fn length(&self) -> usize {
        self.0.len()
    }

    /// `|lambda|`.
    pub fn weight(&self) -> u64 {
        self.0.iter().map(|&p| u64::from(p)).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The transpose: `lambda'_i = #{j : lambda_j >= i}`.
    pub fn conjugate(&self) -> Partition {
        let first = self.part(1) as usize;
        let mut conj = vec![0u32; first];
        for &p in &self.0 {
            for c in conj.iter_mut().take(p as usize) {
                *c += 1;
            }
        }
        Partition(conj)
    }

    /// `m_i(lambda)`, the number of parts equal to `i >= 1`.
    pub fn multiplicity(&self, i: u32) -> usize {
        self.0.iter().filter(|&&p| p == i).count()
    }

    /// Whether `self / mu` is a horizontal strip, i.e. `self ≻ mu`.
    pub fn interlaces(&self, mu: &Partition) -> bool {
        if mu.length() > self.length() || self.length() > mu.length() + 1 {
            return false;
        }
        (1..=self.length()).all(|i| self.part(i) >= mu.part(i) && mu.part(i) >= self.part(i + 1))
    }
}

/// Padded conjugate `lambda'_1, ..., lambda'_len`.
fn conjugate_padded(p: &Partition, len: usize) -> Vec<u32> {
    let mut c = p.conjugate().0;
    c.resize(len, 0);
    c
}

/// `psi_{lambda/mu}(t) = 1{lambda ≻ mu} prod_{j in J} (1 - t^{m_j(mu)})` with
/// `J = {j >= 1 : lambda'_{j+1} > mu'_{j+1}, lambda'_j = mu'_j}`.
pub fn psi(lambda: &Partition, mu: &Partition, t: f64) -> f64 {
    if !lambda.interlaces(mu) {
        return 0.0;
    }
    let len = lambda.part(1) as usize + 2;
    let (lc, mc) = (conjugate_padded(lambda, len), conjugate_padded(mu, len));
    let mut prod = 1.0;
    for j in 1..len {
        if lc[j] > mc[j] && lc[j - 1] == mc[j - 1] {
            prod *= 1.0 - tpow(t, i64::from(mc[j - 1] - mc[j]));
        }
    }
    prod
}

/// `phi_{lambda/mu}(t) = 1{lambda ≻ mu} prod_{i in I} (1 - t^{m_i(lambda)})`
/// with `I = {i >= 1 : lambda'_{i+1} = mu'_{i+1}, lambda'_i > mu'_i}`.
pub fn phi(lambda: &Partition, mu: &Partition, t: f64) -> f64 {
    if !lambda.interlaces(mu) {
        return 0.0;
    }
    let len = lambda.part(1) as usize + 2;
    let (lc, mc) = (conjugate_padded(lambda, len), conjugate_padded(mu, len));
    let mut prod = 1.0;
    for i in 1..len {
        if lc[i] == mc[i] && lc[i - 1] > mc[i - 1] {
            prod *= 1.0 - tpow(t, i64::from(lc[i - 1] - lc[i]));
        }
    }
    prod
}

/// [`psi`] from row lengths, for `lambda ≻ mu` given as equal-length slices
/// padded with zeros (`mu` may be shorter by one row in its support).
///
/// For each maximal block of rows `r1..=r2` where `mu` equals some `v >= 1`,
/// the factor `1 - t^(r2 - r1 + 1)` appears exactly when `lambda_{r1} > v`
/// and `lambda_{r2+1} < v`.
pub fn psi_rows(lambda: &[u32], mu: &[u32], t: f64) -> f64 {
    let n = mu.len();
    let lam = |i: usize| lambda.get(i).copied().unwrap_or(0);
    let mut prod = 1.0;
    let mut r1 = 0;
    while r1 < n && mu[r1] > 0 {
        let v = mu[r1];
        let mut r2 = r1;
        while r2 + 1 < n && mu[r2 + 1] == v {
            r2 += 1;
        }
        if lam(r1) > v && lam(r2 + 1) < v {
            prod *= 1.0 - tpow(t, (r2 - r1 + 1) as i64);
        }
        r1 = r2 + 1;
    }
    prod
}

/// [`phi`] from row lengths, same conventions as [`psi_rows`].
///
/// For each maximal block of rows `s1..=s2` where `lambda` equals `i >= 1`,
/// the factor `1 - t^(s2 - s1 + 1)` appears exactly when `mu_{s2} < i` and
/// either `s1` is the first row or `mu_{s1-1} > i`.
pub fn phi_rows(lambda: &[u32], mu: &[u32], t: f64) -> f64 {
    let n = lambda.len();
    let m = |i: usize| mu.get(i).copied().unwrap_or(0);
    let mut prod = 1.0;
    let mut s1 = 0;
    while s1 < n && lambda[s1] > 0 {
        let v = lambda[s1];
        let mut s2 = s1;
        while s2 + 1 < n && lambda[s2 + 1] == v {
            s2 += 1;
        }
        if m(s2) < v && (s1 == 0 || m(s1 - 1) > v) {
            prod *= 1.0 - tpow(t, (s2 - s1 + 1) as i64);
        }
        s1 = s2 + 1;
    }
    prod
}

/// Calls `f` for every `mu ≺ lambda` with at most `max_len` parts.
pub fn for_each_interlaced_below(lambda: &Partition, max_len: usize, mut f: impl FnMut(&Partition)) {
    let n = lambda.length();
    let mut mu = vec![0u32; n];
    fn rec(d: usize, lam: &[u32], max_len: usize, mu: &mut Vec<u32>, f: &mut impl FnMut(&Partition)) {
        if d == lam.len() {
            f(&Partition::from_sorted(mu.iter().copied()));
            return;
        }
        let lo = lam.get(d + 1).copied().unwrap_or(0);
        let hi = if d >= max_len { 0 } else { lam[d] };
        for v in lo..=hi {
            mu[d] = v;
            rec(d + 1, lam, max_len, mu, f);
        }
        mu[d] = 0;
    }
    if n > max_len + 1 {
        return;
    }
    rec(0, lambda.parts(), max_len, &mut mu, &mut f);
}

/// `phi_r(t) = (1 - t)(1 - t^2)...(1 - t^r)`.
pub fn phi_r(r: usize, t: f64) -> f64 {
    (1..=r).map(|i| 1.0 - tpow(t, i as i64)).product()
}

/// `b_lambda(t) = prod_i phi_{m_i(lambda)}(t)`, so that `Q_lambda = b_lambda P_lambda`.
pub fn b_lambda(lambda: &Partition, t: f64) -> f64 {
    let mut prod = 1.0;
    let parts = lambda.parts();
    let mut i = 0;
    while i < parts.len() {
        let mut j = i;
        while j + 1 < parts.len() && parts[j + 1] == parts[i] {
            j += 1;
        }
        prod *= phi_r(j - i + 1, t);
        i = j + 1;
    }
    prod
}

/// `P_lambda(1^k)` by `k`-fold branching with [`psi`].
pub fn principal_p(lambda: &Partition, k: usize, t: f64) -> f64 {
    let mut memo = FxHashMap::default();
    branch(lambda, k, t, psi, &mut memo)
}

/// `Q_lambda(zeta^N)` by `N`-fold branching with [`phi`]; zero when
/// `l(lambda) > N`.
pub fn principal_q(lambda: &Partition, zeta: f64, n: usize, t: f64) -> f64 {
    let mut memo = FxHashMap::default();
    branch(lambda, n, t, phi, &mut memo) * zeta.powi(lambda.weight() as i32)
}

fn branch(
    lambda: &Partition,
    k: usize,
    t: f64,
    coef: fn(&Partition, &Partition, f64) -> f64,
    memo: &mut FxHashMap<(Partition, usize), f64>,
) -> f64 {
    if lambda.length() > k {
        return 0.0;
    }
    if k == 0 || lambda.is_empty() {
        return 1.0;
    }
    if let Some(&v) = memo.get(&(lambda.clone(), k)) {
        return v;
    }
    let mut subs = Vec::new();
    for_each_interlaced_below(lambda, k - 1, |mu| subs.push(mu.clone()));
    let total = subs
        .iter()
        .map(|mu| coef(lambda, mu, t) * branch(mu, k - 1, t, coef, memo))
        .sum();
    memo.insert((lambda.clone(), k), total);
    total
}

/// A sequence `∅ = lambda(0) ≺ lambda(1) ≺ ... ≺ lambda(M)`; stores
/// `lambda(1..=M)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct InterlacingSequence(Vec<Partition>);

impl InterlacingSequence {
    /// Validates interlacing and `l(lambda(i)) <= i`.
    pub fn new(seq: Vec<Partition>) -> Result<Self> {
        let mut prev = Partition::empty();
        for (i, p) in seq.iter().enumerate() {
            if !p.interlaces(&prev) {
                return Err(invalid(format!("lambda({}) does not interlace lambda({i})", i + 1)));
            }
            if p.length() > i + 1 {
                return Err(invalid(format!("lambda({}) has too many parts", i + 1)));
            }
            prev = p.clone();
        }
        Ok(Self(seq))
    }

    pub(crate) fn from_trusted(seq: Vec<Partition>) -> Self {
        Self(seq)
    }

    /// `M`.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `lambda(i)` for `0 <= i <= M`.
    pub fn at(&self, i: usize) -> Partition {
        if i == 0 {
            Partition::empty()
        } else {
            self.0[i - 1].clone()
        }
    }

    pub fn partitions(&self) -> &[Partition] {
        &self.0
    }

    /// JSON list of part lists.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("sequence serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: Vec<Vec<u32>> = serde_json::from_str(s)?;
        Self::new(raw.into_iter().map(Partition::new).collect::<Result<_>>()?)
    }

    /// `lambda'_j(i)` for `0 <= i <= M`.
    pub fn conjugate_line(&self, j: usize) -> Vec<i64> {
        (0..=self.len())
            .map(|i| self.at(i).parts().iter().filter(|&&p| p as usize >= j).count() as i64)
            .collect()
    }
}

/// The curves `L_j(i) = lambda'_j(i)` on `[0, M]` for `j = 1..=n_lines`.
pub fn line_ensemble_from_sequence(seq: &InterlacingSequence, n_lines: usize) -> LineEnsemble {
    let curves = (1..=n_lines)
        .map(|j| UpRightPath::new(0, seq.conjugate_line(j)).expect("horizontal strips give up-right paths"))
        .collect();
    LineEnsemble::new(curves).expect("conjugate lines are ordered")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(v: &[u32]) -> Partition {
        Partition::new(v.to_vec()).unwrap()
    }

    #[test]
    fn conjugate_examples() {
        assert_eq!(p(&[5, 3, 3, 2, 2]).conjugate(), p(&[5, 5, 3, 1, 1]));
        assert_eq!(Partition::empty().conjugate(), Partition::empty());
        assert!(Partition::new(vec![1, 2]).is_err());
        assert_eq!(p(&[3, 0, 0]).parts(), &[3]);
    }

    #[test]
    fn single_box_coefficients() {
        for &t in &[0.2, 0.5, 0.9] {
            assert_eq!(psi(&p(&[1]), &Partition::empty(), t), 1.0);
            assert!((phi(&p(&[1]), &Partition::empty(), t) - (1.0 - t)).abs() < 1e-15);
            let l = p(&[3, 1]);
            assert_eq!(psi(&l, &l, t), 1.0);
            assert_eq!(phi(&l, &l, t), 1.0);
        }
        assert_eq!(psi(&p(&[2]), &p(&[1, 1]), 0.5), 0.0);
    }

    #[test]
    fn interlacing() {
        assert!(p(&[4, 2]).interlaces(&p(&[2, 1])));
        assert!(!p(&[4, 2]).interlaces(&p(&[1, 1])));
        assert!(!p(&[2, 1, 1]).interlaces(&p(&[1])));
        assert!(p(&[2, 1]).interlaces(&p(&[1, 1])));
    }

    #[test]
    fn principal_small_cases() {
        let t = 0.4;
        let z = 0.3;
        assert_eq!(principal_q(&Partition::empty(), z, 5, t), 1.0);
        assert!((principal_q(&p(&[1]), z, 1, t) - (1.0 - t) * z).abs() < 1e-15);
        assert_eq!(principal_q(&p(&[1, 1]), z, 1, t), 0.0);
        assert_eq!(principal_p(&p(&[4]), 1, t), 1.0);
    }

    #[test]
    fn sequence_line_example() {
        let seq: Vec<Partition> = [
            vec![1],
            vec![2],
            vec![2],
            vec![4],
            vec![4, 2],
            vec![5, 2, 2],
            vec![5, 3, 2],
            vec![8, 5, 2, 1],
        ]
        .into_iter()
        .map(|v| Partition::new(v).unwrap())
        .collect();
        let seq = InterlacingSequence::new(seq).unwrap();
        assert_eq!(seq.conjugate_line(1), vec![0, 1, 1, 1, 1, 2, 3, 3, 4]);
        let e = line_ensemble_from_sequence(&seq, 3);
        assert_eq!(e.len(), 3);
        let back = InterlacingSequence::from_json(&seq.to_json()).unwrap();
        assert_eq!(back, seq);
        assert_eq!(seq.to_json(), "[[1],[2],[2],[4],[4,2],[5,2,2],[5,3,2],[8,5,2,1]]");
    }

    #[test]
    fn empty_sequence_gives_zero_lines() {
        let seq = InterlacingSequence::new(vec![Partition::empty(); 4]).unwrap();
        let e = line_ensemble_from_sequence(&seq, 2);
        assert!(e.curves().iter().all(|c| c.values().iter().all(|&v| v == 0)));
    }

    #[test]
    fn sequence_validation() {
        assert!(InterlacingSequence::new(vec![p(&[1, 1])]).is_err());
        assert!(InterlacingSequence::new(vec![p(&[2]), p(&[1])]).is_err());
    }
}
