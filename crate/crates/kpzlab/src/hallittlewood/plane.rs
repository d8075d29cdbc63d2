//! Boxed plane partitions, the weight `A_pi(t) zeta^{diag(pi)}` and a
//! single-cell Metropolis chain targeting it under a height cap.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use super::{phi, psi, InterlacingSequence, Partition};
use crate::error::{invalid, Result};

/// A plane partition in an `M x N` box, stored row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PlanePartition {
    m: usize,
    n: usize,
    entries: Vec<u32>,
}

impl PlanePartition {
    /// Validates that rows and columns are weakly decreasing.
    pub fn new(m: usize, n: usize, rows: Vec<Vec<u32>>) -> Result<Self> {
        if m == 0 || n == 0 || rows.len() != m || rows.iter().any(|r| r.len() != n) {
            return Err(invalid(format!("expected a {m}x{n} matrix")));
        }
        let pp = Self { m, n, entries: rows.into_iter().flatten().collect() };
        for i in 0..m {
            for j in 0..n {
                let v = pp.get(i, j);
                if (i + 1 < m && pp.get(i + 1, j) > v) || (j + 1 < n && pp.get(i, j + 1) > v) {
                    return Err(invalid(format!("entry ({i},{j}) breaks monotonicity")));
                }
            }
        }
        Ok(pp)
    }

    /// The all-zero plane partition.
    pub fn zero(m: usize, n: usize) -> Self {
        Self { m, n, entries: vec![0; m * n] }
    }

    pub fn rows(&self) -> usize {
        self.m
    }

    pub fn cols(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.entries[i * self.n + j]
    }

    /// `|pi|`.
    pub fn size(&self) -> u64 {
        self.entries.iter().map(|&v| u64::from(v)).sum()
    }

    /// Sum of the main-diagonal entries.
    pub fn diag(&self) -> u64 {
        (0..self.m.min(self.n)).map(|i| u64::from(self.get(i, i))).sum()
    }

    /// Diagonal slice `lambda^s = (pi_{i, i+s})` for `-(M-1) <= s <= N-1`,
    /// and the empty partition outside that range.
    pub fn slice(&self, s: i64) -> Partition {
        let start = (-s).max(0) as usize;
        let parts = (start..self.m)
            .map_while(|i| {
                let j = i as i64 + s;
                (j >= 0 && (j as usize) < self.n).then(|| self.get(i, j as usize))
            });
        Partition::from_sorted(parts)
    }

    /// All slices from `-(M-1)` to `N-1`.
    pub fn slices(&self) -> Vec<Partition> {
        (-(self.m as i64 - 1)..self.n as i64).map(|s| self.slice(s)).collect()
    }

    /// Rebuilds the matrix from its slices `lambda^{-(M-1)}, ..., lambda^{N-1}`.
    pub fn from_slices(m: usize, n: usize, slices: &[Partition]) -> Result<Self> {
        if slices.len() != m + n - 1 {
            return Err(invalid("wrong number of slices"));
        }
        let mut rows = vec![vec![0u32; n]; m];
        for (k, lam) in slices.iter().enumerate() {
            let s = k as i64 - (m as i64 - 1);
            let start = (-s).max(0) as usize;
            for (r, &v) in lam.parts().iter().enumerate() {
                let (i, j) = (start + r, (start + r) as i64 + s);
                if i >= m || j < 0 || j as usize >= n {
                    return Err(invalid(format!("slice {s} does not fit the box")));
                }
                rows[i][j as usize] = v;
            }
        }
        Self::new(m, n, rows)
    }

    /// `pi^T`, an `N x M` plane partition.
    pub fn transpose(&self) -> Self {
        let mut rows = vec![vec![0u32; self.m]; self.n];
        for (j, row) in rows.iter_mut().enumerate() {
            for (i, v) in row.iter_mut().enumerate() {
                *v = self.get(i, j);
            }
        }
        Self { m: self.n, n: self.m, entries: rows.into_iter().flatten().collect() }
    }

    /// The ascending half `lambda(i) = lambda^{i-M}`, `i = 1..=M`.
    pub fn ascending_sequence(&self) -> InterlacingSequence {
        let seq = (1..=self.m).map(|i| self.slice(i as i64 - self.m as i64)).collect();
        InterlacingSequence::from_trusted(seq)
    }

    /// Dense CSV matrix, one row per line.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for i in 0..self.m {
            let row: Vec<String> = (0..self.n).map(|j| self.get(i, j).to_string()).collect();
            s.push_str(&row.join(","));
            s.push('\n');
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let rows: Vec<Vec<u32>> = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| {
                l.split(',')
                    .map(|x| x.trim().parse::<u32>().map_err(|e| invalid(format!("bad entry {x:?}: {e}"))))
                    .collect()
            })
            .collect::<Result<_>>()?;
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        Self::new(m, n, rows)
    }

    fn set(&mut self, i: usize, j: usize, v: u32) {
        self.entries[i * self.n + j] = v;
    }
}

/// The factor of the slice product attached to index `k`:
/// `psi_{lambda^k / lambda^{k-1}}` for `k <= 0` and `phi_{lambda^{k-1} / lambda^k}`
/// for `k >= 1`.
fn slice_factor(pp: &PlanePartition, k: i64, t: f64) -> f64 {
    if k <= 0 {
        psi(&pp.slice(k), &pp.slice(k - 1), t)
    } else {
        phi(&pp.slice(k - 1), &pp.slice(k), t)
    }
}

/// `A_pi(t)` as the slice product
/// `prod_{k=-M+1}^{0} psi_{lambda^k/lambda^{k-1}} prod_{k=1}^{N} phi_{lambda^{k-1}/lambda^k}`.
pub fn a_pi(pp: &PlanePartition, t: f64) -> f64 {
    (-(pp.m as i64) + 1..=pp.n as i64).map(|k| slice_factor(pp, k, t)).product()
}

/// `W(pi) = A_pi(t) zeta^{diag(pi)}`.
pub fn plane_partition_weight(pp: &PlanePartition, t: f64, zeta: f64) -> f64 {
    a_pi(pp, t) * zeta.powi(pp.diag() as i32)
}

/// Every plane partition in the box with entries at most `h`, in
/// lexicographic order of the row-major entries.
pub fn enumerate_plane_partitions(m: usize, n: usize, h: u32) -> Vec<PlanePartition> {
    let mut out = Vec::new();
    let mut pp = PlanePartition::zero(m, n);
    fn rec(idx: usize, pp: &mut PlanePartition, h: u32, out: &mut Vec<PlanePartition>) {
        if idx == pp.m * pp.n {
            out.push(pp.clone());
            return;
        }
        let (i, j) = (idx / pp.n, idx % pp.n);
        let mut hi = h;
        if i > 0 {
            hi = hi.min(pp.get(i - 1, j));
        }
        if j > 0 {
            hi = hi.min(pp.get(i, j - 1));
        }
        for v in 0..=hi {
            pp.set(i, j, v);
            rec(idx + 1, pp, h, out);
        }
        pp.set(i, j, 0);
    }
    rec(0, &mut pp, h, &mut out);
    out
}

/// Single-cell Metropolis chain on plane partitions with entries `<= h`.
///
/// A step picks a cell and a sign uniformly, rejects moves that break
/// monotonicity or the cap, and accepts with `min(1, W(pi') / W(pi))`.
#[derive(Clone, Debug)]
pub struct PlanePartitionChain {
    state: PlanePartition,
    h: u32,
    t: f64,
    zeta: f64,
    accepted: u64,
    steps: u64,
}

impl PlanePartitionChain {
    pub fn new(start: PlanePartition, h: u32, t: f64, zeta: f64) -> Result<Self> {
        if h < 1 {
            return Err(invalid("height cap must be at least 1"));
        }
        if !(t > 0.0 && t < 1.0) || !(zeta > 0.0 && zeta < 1.0) {
            return Err(invalid("t and zeta must lie in (0,1)"));
        }
        if start.entries.iter().any(|&v| v > h) {
            return Err(invalid("start exceeds the height cap"));
        }
        Ok(Self { state: start, h, t, zeta, accepted: 0, steps: 0 })
    }

    pub fn state(&self) -> &PlanePartition {
        &self.state
    }

    /// Fraction of proposals accepted so far.
    pub fn acceptance_rate(&self) -> f64 {
        if self.steps == 0 {
            0.0
        } else {
            self.accepted as f64 / self.steps as f64
        }
    }

    /// The proposal `pi -> pi'` for cell `(i, j)` and sign, if admissible.
    fn proposal(&self, i: usize, j: usize, up: bool) -> Option<u32> {
        let pp = &self.state;
        let v = pp.get(i, j);
        if up {
            let mut hi = self.h;
            if i > 0 {
                hi = hi.min(pp.get(i - 1, j));
            }
            if j > 0 {
                hi = hi.min(pp.get(i, j - 1));
            }
            (v < hi).then_some(v + 1)
        } else {
            let mut lo = 0;
            if i + 1 < pp.m {
                lo = lo.max(pp.get(i + 1, j));
            }
            if j + 1 < pp.n {
                lo = lo.max(pp.get(i, j + 1));
            }
            (v > lo).then(|| v - 1)
        }
    }

    /// `W(pi') / W(pi)` when only cell `(i, j)` changes to `new`. Only the two
    /// slice factors touching slice `j - i` and the diagonal power change.
    fn ratio(&mut self, i: usize, j: usize, new: u32) -> f64 {
        let k = j as i64 - i as i64;
        let old_val = self.state.get(i, j);
        let before = slice_factor(&self.state, k, self.t) * slice_factor(&self.state, k + 1, self.t);
        self.state.set(i, j, new);
        let after = slice_factor(&self.state, k, self.t) * slice_factor(&self.state, k + 1, self.t);
        self.state.set(i, j, old_val);
        let mut r = after / before;
        if i == j {
            r *= if new > old_val { self.zeta } else { 1.0 / self.zeta };
        }
        r
    }

    /// One Metropolis step; returns whether the move was accepted.
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> bool {
        self.steps += 1;
        let cell = rng.random_range(0..self.state.m * self.state.n);
        let up = rng.random::<bool>();
        let u: f64 = rng.random();
        let (i, j) = (cell / self.state.n, cell % self.state.n);
        let Some(new) = self.proposal(i, j, up) else {
            return false;
        };
        let r = self.ratio(i, j, new);
        if r >= 1.0 || u < r {
            self.state.set(i, j, new);
            self.accepted += 1;
            true
        } else {
            false
        }
    }

    /// Runs `steps` steps.
    pub fn run<R: Rng + ?Sized>(&mut self, rng: &mut R, steps: u64) {
        for _ in 0..steps {
            self.step(rng);
        }
    }

    /// Transition matrix of the chain over `states` (which must be every
    /// plane partition in the box under the cap), computed from the
    /// proposal and acceptance rules.
    pub fn exact_kernel(states: &[PlanePartition], h: u32, t: f64, zeta: f64) -> Result<DMatrix<f64>> {
        let size = states.len();
        let index: std::collections::HashMap<&PlanePartition, usize> =
            states.iter().enumerate().map(|(k, s)| (s, k)).collect();
        let mut p = DMatrix::<f64>::zeros(size, size);
        for (a, s) in states.iter().enumerate() {
            let mut chain = Self::new(s.clone(), h, t, zeta)?;
            let cells = s.m * s.n;
            let move_prob = 1.0 / (2.0 * cells as f64);
            let mut stay = 1.0;
            for cell in 0..cells {
                let (i, j) = (cell / s.n, cell % s.n);
                for up in [false, true] {
                    if let Some(new) = chain.proposal(i, j, up) {
                        let acc = chain.ratio(i, j, new).min(1.0);
                        let mut target = s.clone();
                        target.set(i, j, new);
                        let b = *index.get(&target).ok_or_else(|| invalid("state list is incomplete"))?;
                        p[(a, b)] += move_prob * acc;
                        stay -= move_prob * acc;
                    }
                }
            }
            p[(a, a)] += stay;
        }
        Ok(p)
    }
}

/// Stationary vector of a row-stochastic matrix, from `pi P = pi`,
/// `sum pi = 1`.
pub fn stationary_vector(p: &DMatrix<f64>) -> Result<DVector<f64>> {
    let n = p.nrows();
    let mut a = p.transpose() - DMatrix::<f64>::identity(n, n);
    let mut rhs = DVector::<f64>::zeros(n);
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    rhs[n - 1] = 1.0;
    a.lu().solve(&rhs).ok_or_else(|| invalid("singular stationary system"))
}

/// Draws `samples` states, `thin` steps apart after `burn_in` steps.
#[allow(clippy::too_many_arguments)]
pub fn mcmc_plane_partition<R: Rng + ?Sized>(
    rng: &mut R,
    m: usize,
    n: usize,
    h: u32,
    t: f64,
    zeta: f64,
    burn_in: u64,
    thin: u64,
    samples: usize,
) -> Result<Vec<PlanePartition>> {
    let mut chain = PlanePartitionChain::new(PlanePartition::zero(m, n), h, t, zeta)?;
    chain.run(rng, burn_in);
    let mut out = Vec::with_capacity(samples);
    for _ in 0..samples {
        chain.run(rng, thin.max(1));
        out.push(chain.state().clone());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::rng_from_seed;

    #[test]
    fn weight_examples() {
        let (t, z) = (0.4, 0.3);
        assert_eq!(plane_partition_weight(&PlanePartition::zero(2, 3), t, z), 1.0);
        let one = PlanePartition::new(2, 2, vec![vec![1, 0], vec![0, 0]]).unwrap();
        assert!((plane_partition_weight(&one, t, z) - (1.0 - t) * z).abs() < 1e-15);
    }

    #[test]
    fn slices_round_trip() {
        let pp = PlanePartition::new(3, 4, vec![vec![5, 3, 2, 1], vec![4, 3, 1, 0], vec![2, 1, 1, 0]]).unwrap();
        assert_eq!(pp.slice(0).parts(), &[5, 3, 1]);
        assert_eq!(pp.slice(-2).parts(), &[2]);
        assert_eq!(pp.slice(3).parts(), &[1]);
        assert_eq!(pp.diag(), 9);
        let back = PlanePartition::from_slices(3, 4, &pp.slices()).unwrap();
        assert_eq!(back, pp);
        assert_eq!(PlanePartition::from_csv(&pp.to_csv()).unwrap(), pp);
        assert!(PlanePartition::new(2, 2, vec![vec![1, 2], vec![0, 0]]).is_err());
    }

    #[test]
    fn transpose_preserves_weight() {
        for pp in enumerate_plane_partitions(2, 3, 2) {
            let a = plane_partition_weight(&pp, 0.35, 0.6);
            let b = plane_partition_weight(&pp.transpose(), 0.35, 0.6);
            assert!((a - b).abs() < 1e-14, "{pp:?}");
        }
    }

    #[test]
    fn local_ratio_matches_full_weight() {
        let states = enumerate_plane_partitions(2, 3, 2);
        let mut rng = rng_from_seed(5);
        let mut chain = PlanePartitionChain::new(PlanePartition::zero(2, 3), 2, 0.3, 0.7).unwrap();
        for _ in 0..2000 {
            let before = plane_partition_weight(chain.state(), 0.3, 0.7);
            let cell = rng.random_range(0..6);
            let (i, j) = (cell / 3, cell % 3);
            if let Some(new) = chain.proposal(i, j, rng.random()) {
                let r = chain.ratio(i, j, new);
                let mut next = chain.state().clone();
                next.set(i, j, new);
                let after = plane_partition_weight(&next, 0.3, 0.7);
                assert!((r - after / before).abs() < 1e-12);
            }
            chain.step(&mut rng);
            assert!(states.contains(chain.state()));
        }
    }

    #[test]
    fn small_zeta_concentrates_on_empty() {
        let mut rng = rng_from_seed(6);
        let draws = mcmc_plane_partition(&mut rng, 2, 2, 3, 0.5, 1e-6, 1000, 10, 200).unwrap();
        assert!(draws.iter().all(|p| p.size() == 0));
    }

    #[test]
    fn kernel_is_stochastic_and_balanced() {
        let states = enumerate_plane_partitions(2, 2, 2);
        assert_eq!(states.len(), 20);
        let p = PlanePartitionChain::exact_kernel(&states, 2, 0.4, 0.5).unwrap();
        let w: Vec<f64> = states.iter().map(|s| plane_partition_weight(s, 0.4, 0.5)).collect();
        for a in 0..states.len() {
            assert!((p.row(a).sum() - 1.0).abs() < 1e-14);
            for b in 0..states.len() {
                assert!((w[a] * p[(a, b)] - w[b] * p[(b, a)]).abs() < 1e-15);
            }
        }
    }
}
