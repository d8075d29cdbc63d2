//! Up-right lattice paths, uniform bridge measures and path analytics.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Default bound on the number of paths any exact enumeration may produce.
pub const ENUMERATION_GUARD: u128 = 2_000_000;

/// An integer path `L(t0), ..., L(t1)` with increments in `{0, 1}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct UpRightPath {
    t0: i64,
    values: Vec<i64>,
}

impl UpRightPath {
    /// Validates the increments and builds the path.
    pub fn new(t0: i64, values: Vec<i64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidPath("no values".into()));
        }
        if let Some(i) = values.windows(2).position(|w| !(0..=1).contains(&(w[1] - w[0]))) {
            return Err(Error::InvalidPath(format!(
                "increment {} at t={}",
                values[i + 1] - values[i],
                t0 + i as i64
            )));
        }
        Ok(Self { t0, values })
    }

    /// Builds a path from its starting height and increments (`true` = up).
    pub fn from_steps(t0: i64, z0: i64, steps: &[bool]) -> Self {
        let mut values = Vec::with_capacity(steps.len() + 1);
        let mut z = z0;
        values.push(z);
        for &s in steps {
            z += i64::from(s);
            values.push(z);
        }
        Self { t0, values }
    }

    pub fn t0(&self) -> i64 {
        self.t0
    }

    pub fn t1(&self) -> i64 {
        self.t0 + self.values.len() as i64 - 1
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }

    /// Value at the integer time `t`. Panics outside `[t0, t1]`.
    #[inline]
    pub fn at(&self, t: i64) -> i64 {
        self.values[(t - self.t0) as usize]
    }

    /// Value at integer time `t`, or `None` outside the domain.
    pub fn get(&self, t: i64) -> Option<i64> {
        if t < self.t0 {
            return None;
        }
        self.values.get((t - self.t0) as usize).copied()
    }

    /// Linear interpolation at a real time in `[t0, t1]`.
    pub fn eval(&self, s: f64) -> Result<f64> {
        let (a, b) = (self.t0 as f64, self.t1() as f64);
        if !(a..=b).contains(&s) {
            return Err(Error::OutOfWindow(format!("s={s} outside [{a}, {b}]")));
        }
        Ok(interpolate(&self.values, s - a))
    }

    /// Increments as a sign sequence.
    pub fn signs(&self) -> SignSequence {
        SignSequence {
            signs: self.values.windows(2).map(|w| w[1] > w[0]).collect(),
        }
    }

    /// The same path moved by `dt` in time and `dz` in height.
    pub fn shifted(&self, dt: i64, dz: i64) -> Self {
        Self {
            t0: self.t0 + dt,
            values: self.values.iter().map(|v| v + dz).collect(),
        }
    }

    /// CSV rows `t,value` with a header line.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,value\n");
        for (i, v) in self.values.iter().enumerate() {
            s.push_str(&format!("{},{}\n", self.t0 + i as i64, v));
        }
        s
    }

    /// Compact JSON form `{"t0":..,"values":[..]}`.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("path serializes")
    }

    /// Parses and validates the JSON form.
    pub fn from_json(s: &str) -> Result<Self> {
        let raw: UpRightPath = serde_json::from_str(s)?;
        Self::new(raw.t0, raw.values)
    }
}

/// Linear interpolation of equally spaced samples at offset `x` from the first.
pub(crate) fn interpolate(values: &[i64], x: f64) -> f64 {
    let last = values.len() - 1;
    let i = (x.floor() as usize).min(last);
    if i == last {
        return values[last] as f64;
    }
    let frac = x - i as f64;
    let (lo, hi) = (values[i] as f64, values[i + 1] as f64);
    lo + frac * (hi - lo)
}

/// Endpoints of a bridge from `(t0, z0)` to `(t1, z1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BridgeSpec {
    pub t0: i64,
    pub t1: i64,
    pub z0: i64,
    pub z1: i64,
}

impl BridgeSpec {
    /// Validates `t0 < t1` and `0 <= z1 - z0 <= t1 - t0`.
    pub fn new(t0: i64, t1: i64, z0: i64, z1: i64) -> Result<Self> {
        if t0 >= t1 {
            return Err(invalid(format!("bridge needs t0 < t1, got {t0} >= {t1}")));
        }
        let spec = Self { t0, t1, z0, z1 };
        if !(0..=spec.len()).contains(&spec.ups()) {
            return Err(Error::EmptyStateSpace(format!(
                "rise {} over length {}",
                z1 - z0,
                t1 - t0
            )));
        }
        Ok(spec)
    }

    /// Number of steps `t1 - t0`.
    pub fn len(&self) -> i64 {
        self.t1 - self.t0
    }

    /// True when the bridge has no steps.
    pub fn is_empty(&self) -> bool {
        self.t1 == self.t0
    }

    /// Number of up steps `z1 - z0`.
    pub fn ups(&self) -> i64 {
        self.z1 - self.z0
    }

    /// `|Omega|`, the binomial coefficient `C(t1 - t0, z1 - z0)`.
    pub fn count(&self) -> u128 {
        binomial_u128(self.len() as u64, self.ups() as u64)
    }

    /// Smallest value a bridge can take at time `t`.
    pub fn min_at(&self, t: i64) -> i64 {
        self.z0.max(self.z1 - (self.t1 - t))
    }

    /// Largest value a bridge can take at time `t`.
    pub fn max_at(&self, t: i64) -> i64 {
        self.z1.min(self.z0 + (t - self.t0))
    }
}

/// Exact binomial coefficient; saturates at `u128::MAX`.
pub fn binomial_u128(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k {
        c = match c.checked_mul(u128::from(n - i)) {
            Some(v) => v / u128::from(i + 1),
            None => return u128::MAX,
        };
    }
    c
}

/// A path's increments, `true` for an up step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignSequence {
    pub signs: Vec<bool>,
}

impl SignSequence {
    pub fn ups(&self) -> usize {
        self.signs.iter().filter(|&&s| s).count()
    }

    pub fn to_path(&self, t0: i64, z0: i64) -> UpRightPath {
        UpRightPath::from_steps(t0, z0, &self.signs)
    }
}

/// All paths of `Omega(t0, t1; z0, z1)` in lexicographic order of their
/// values. Fails above [`ENUMERATION_GUARD`].
pub fn enumerate_bridges(spec: &BridgeSpec) -> Result<Vec<UpRightPath>> {
    enumerate_bridges_guarded(spec, ENUMERATION_GUARD)
}

/// As [`enumerate_bridges`] with an explicit guard.
pub fn enumerate_bridges_guarded(spec: &BridgeSpec, guard: u128) -> Result<Vec<UpRightPath>> {
    let spec = BridgeSpec::new(spec.t0, spec.t1, spec.z0, spec.z1)?;
    let count = spec.count();
    if count > guard {
        return Err(Error::GuardExceeded {
            what: "bridge enumeration",
            needed: count,
            guard,
        });
    }
    let n = spec.len() as usize;
    let k = spec.ups() as usize;
    let mut out = Vec::with_capacity(count as usize);
    let mut steps = vec![false; n];
    fill_steps(&mut steps, 0, k, &mut |s| {
        out.push(UpRightPath::from_steps(spec.t0, spec.z0, s))
    });
    Ok(out)
}

fn fill_steps(steps: &mut [bool], pos: usize, ups_left: usize, emit: &mut impl FnMut(&[bool])) {
    let n = steps.len();
    if pos == n {
        emit(steps);
        return;
    }
    let slots = n - pos;
    if ups_left < slots {
        steps[pos] = false;
        fill_steps(steps, pos + 1, ups_left, emit);
    }
    if ups_left > 0 {
        steps[pos] = true;
        fill_steps(steps, pos + 1, ups_left - 1, emit);
        steps[pos] = false;
    }
}

/// A uniform draw from `Omega(t0, t1; z0, z1)` by shuffling the sign multiset.
pub fn sample_uniform_bridge<R: Rng + ?Sized>(rng: &mut R, spec: &BridgeSpec) -> UpRightPath {
    let mut steps = vec![false; spec.len() as usize];
    sample_steps_into(rng, spec.ups() as usize, &mut steps);
    UpRightPath::from_steps(spec.t0, spec.z0, &steps)
}

/// Fills `steps` with a uniform arrangement of `ups` up steps.
pub fn sample_steps_into<R: Rng + ?Sized>(rng: &mut R, ups: usize, steps: &mut [bool]) {
    for (i, s) in steps.iter_mut().enumerate() {
        *s = i < ups;
    }
    steps.shuffle(rng);
}

/// A uniform bridge conditioned on `L(t) = k`, built from two independent
/// uniform halves.
pub fn sample_bridge_through<R: Rng + ?Sized>(
    rng: &mut R,
    spec: &BridgeSpec,
    t: i64,
    k: i64,
) -> Result<UpRightPath> {
    if t < spec.t0 || t > spec.t1 {
        return Err(invalid(format!("time {t} outside [{}, {}]", spec.t0, spec.t1)));
    }
    if k < spec.min_at(t) || k > spec.max_at(t) {
        return Err(invalid(format!(
            "value {k} at time {t} outside [{}, {}]",
            spec.min_at(t),
            spec.max_at(t)
        )));
    }
    let n = spec.len() as usize;
    let left = (t - spec.t0) as usize;
    let mut steps = vec![false; n];
    sample_steps_into(rng, (k - spec.z0) as usize, &mut steps[..left]);
    sample_steps_into(rng, (spec.z1 - k) as usize, &mut steps[left..]);
    Ok(UpRightPath::from_steps(spec.t0, spec.z0, &steps))
}

/// Modulus of continuity of a function sampled on a uniform grid of `[a, b]`:
/// the largest `|f(x) - f(y)|` over grid pairs with `|x - y| <= delta`.
pub fn modulus_of_continuity(values: &[f64], a: f64, b: f64, delta: f64) -> Result<f64> {
    if delta.is_nan() || delta <= 0.0 {
        return Err(invalid(format!("delta must be positive, got {delta}")));
    }
    if values.len() < 2 {
        return Ok(0.0);
    }
    let h = (b - a) / (values.len() - 1) as f64;
    if h > delta * (1.0 + 1e-12) {
        return Err(invalid(format!("grid spacing {h} exceeds delta {delta}")));
    }
    let reach = ((delta / h) * (1.0 + 1e-12)).floor() as usize;
    let mut best = 0.0f64;
    for i in 0..values.len() {
        for j in i + 1..values.len().min(i + reach + 1) {
            best = best.max((values[i] - values[j]).abs());
        }
    }
    Ok(best)
}

/// Exact modulus of continuity of the interpolated path. The sup is attained
/// with one endpoint on an integer breakpoint, so it suffices to scan the
/// breakpoints, their `delta` translates and the interval ends.
pub fn path_modulus(path: &UpRightPath, delta: f64) -> Result<f64> {
    if delta.is_nan() || delta <= 0.0 {
        return Err(invalid(format!("delta must be positive, got {delta}")));
    }
    let (a, b) = (path.t0() as f64, path.t1() as f64);
    let mut pts: Vec<f64> = Vec::new();
    for t in path.t0()..=path.t1() {
        let x = t as f64;
        for c in [x, x - delta, x + delta] {
            if (a..=b).contains(&c) {
                pts.push(c);
            }
        }
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let vals: Vec<f64> = pts.iter().map(|&x| path.eval(x).expect("in domain")).collect();
    let mut best = 0.0f64;
    let mut hi = 0;
    for i in 0..pts.len() {
        while hi + 1 < pts.len() && pts[hi + 1] - pts[i] <= delta * (1.0 + 1e-12) {
            hi += 1;
        }
        for j in i + 1..=hi.max(i) {
            best = best.max((vals[i] - vals[j]).abs());
        }
    }
    Ok(best)
}
