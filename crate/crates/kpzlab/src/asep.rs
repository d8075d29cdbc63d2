//! Continuous-time asymmetric simple exclusion with step initial data.
//!
//! Particles jump right at rate `R = 1` and left at rate `L = t`, and a jump
//! onto an occupied site is suppressed. The infinite system is truncated to
//! its `M0` rightmost particles, `x_1 > x_2 > ... > x_{M0}`, started at
//! `x_m(0) = -(m - 1)`. Removing the deeper particles only unblocks left
//! jumps of particle `M0`; the simulator records the largest position that
//! particle ever reaches, and heights are reported only when it stayed left
//! of the reliable window `[-T/2, inf)`.

use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Number of simulated particles and how it was chosen.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationPolicy {
    pub particles: usize,
    /// Whether `particles` meets the bound `ceil(2T) + ceil(10 sqrt T) + 10`.
    pub meets_bound: bool,
    pub log: Vec<String>,
}

impl TruncationPolicy {
    /// `M0 = ceil(2T) + ceil(10 sqrt T) + 10`.
    pub fn for_time(time: f64) -> Self {
        let m0 = Self::bound(time);
        Self {
            particles: m0,
            meets_bound: true,
            log: vec![
                format!("T = {time}"),
                format!("M0 = ceil(2T) + ceil(10 sqrt(T)) + 10 = {m0}"),
                format!("particle M0 starts at {} <= -2T", -(m0 as i64 - 1)),
                format!("reliable window is [{}, inf)", reliable_window_start(time)),
            ],
        }
    }

    /// An explicit particle count, which may violate the bound.
    pub fn fixed(particles: usize, time: f64) -> Result<Self> {
        if particles == 0 {
            return Err(invalid("at least one particle is required"));
        }
        let bound = Self::bound(time);
        Ok(Self {
            particles,
            meets_bound: particles >= bound,
            log: vec![format!("fixed M0 = {particles}; bound for T = {time} is {bound}")],
        })
    }

    pub fn bound(time: f64) -> usize {
        (2.0 * time).ceil() as usize + (10.0 * time.sqrt()).ceil() as usize + 10
    }
}

/// Leftmost integer site of the reliable window at time `T`.
pub fn reliable_window_start(time: f64) -> i64 {
    (-time / 2.0).ceil() as i64
}

/// Configuration after a simulation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsepState {
    /// Positions, rightmost first.
    pub positions: Vec<i64>,
    pub time: f64,
    /// Left jump rate.
    pub t: f64,
    pub policy: TruncationPolicy,
    /// Largest position particle `M0` occupied during the run.
    pub last_particle_max: i64,
    pub events: u64,
}

impl AsepState {
    /// Step initial data with `policy.particles` particles.
    pub fn step(t: f64, policy: TruncationPolicy) -> Self {
        let positions: Vec<i64> = (0..policy.particles as i64).map(|m| -m).collect();
        let last_particle_max = *positions.last().expect("at least one particle");
        Self { positions, time: 0.0, t, policy, last_particle_max, events: 0 }
    }

    /// Whether particle `M0` stayed left of the reliable window.
    pub fn truncation_safe(&self) -> bool {
        self.last_particle_max < reliable_window_start(self.time)
    }

    /// `x_m`, with `m` starting at 1.
    pub fn x(&self, m: usize) -> i64 {
        self.positions[m - 1]
    }

    /// `#{m : x_m >= x}` at integer `x`.
    pub fn height_int(&self, x: i64) -> Result<i64> {
        let start = reliable_window_start(self.time);
        if x < start {
            return Err(Error::OutOfWindow(format!(
                "x={x} is left of the reliable window [{start}, inf) for {} particles",
                self.policy.particles
            )));
        }
        if !self.truncation_safe() {
            return Err(Error::OutOfWindow(format!(
                "particle M0={} reached {} inside the reliable window",
                self.policy.particles, self.last_particle_max
            )));
        }
        Ok(self.positions.partition_point(|&p| p >= x) as i64)
    }

    /// Height at real `x`, interpolated linearly.
    pub fn height(&self, x: f64) -> Result<f64> {
        let lo = x.floor() as i64;
        let a = self.height_int(lo)? as f64;
        if lo as f64 == x {
            return Ok(a);
        }
        let b = self.height_int(lo + 1)? as f64;
        Ok(a + (x - lo as f64) * (b - a))
    }
}

/// Whether `{h(n) >= m} = {x_m >= n}` for every `m` and every `n` in
/// `ns`, with `h` counted directly from the occupation.
pub fn event_identity_holds(state: &AsepState, ns: impl IntoIterator<Item = i64>) -> bool {
    ns.into_iter().all(|n| {
        let h = state.positions.iter().filter(|&&p| p >= n).count();
        (1..=state.positions.len()).all(|m| (h >= m) == (state.x(m) >= n))
    })
}

/// Index set with O(1) insert and remove.
struct EnabledSet {
    items: Vec<u32>,
    slot: Vec<u32>,
}

const ABSENT: u32 = u32::MAX;

impl EnabledSet {
    fn new(n: usize) -> Self {
        Self { items: Vec::with_capacity(n), slot: vec![ABSENT; n] }
    }

    fn set(&mut self, i: usize, on: bool) {
        let present = self.slot[i] != ABSENT;
        if on && !present {
            self.slot[i] = self.items.len() as u32;
            self.items.push(i as u32);
        } else if !on && present {
            let k = self.slot[i] as usize;
            let last = self.items.pop().expect("nonempty");
            if last as usize != i {
                self.items[k] = last;
                self.slot[last as usize] = k as u32;
            }
            self.slot[i] = ABSENT;
        }
    }

    fn len(&self) -> usize {
        self.items.len()
    }
}

/// Runs the dynamics from step initial data up to time `T`.
///
/// Each event advances time by an exponential of the total enabled rate
/// and performs an enabled jump chosen proportionally to its rate.
pub fn simulate_asep<R: Rng + ?Sized>(rng: &mut R, t: f64, time: f64, policy: TruncationPolicy) -> Result<AsepState> {
    if !(0.0..1.0).contains(&t) {
        return Err(invalid(format!("left rate t={t} must lie in [0,1)")));
    }
    if !(time >= 0.0) || !time.is_finite() {
        return Err(invalid(format!("time T={time} must be finite and nonnegative")));
    }
    let mut state = AsepState::step(t, policy);
    let n = state.positions.len();
    let x = &mut state.positions;
    let can_right = |x: &[i64], m: usize| m == 0 || x[m - 1] > x[m] + 1;
    let can_left = |x: &[i64], m: usize| m + 1 == x.len() || x[m + 1] < x[m] - 1;
    let mut right = EnabledSet::new(n);
    let mut left = EnabledSet::new(n);
    for m in 0..n {
        right.set(m, can_right(x, m));
        left.set(m, t > 0.0 && can_left(x, m));
    }
    let mut now = 0.0;
    loop {
        let rate_r = right.len() as f64;
        let rate_l = t * left.len() as f64;
        let total = rate_r + rate_l;
        let e: f64 = rng.sample(Exp1);
        now += e / total;
        if now > time {
            break;
        }
        let pick = rng.random::<f64>() * total;
        let m = if pick < rate_r {
            let m = right.items[rng.random_range(0..right.len())] as usize;
            x[m] += 1;
            m
        } else {
            let m = left.items[rng.random_range(0..left.len())] as usize;
            x[m] -= 1;
            m
        };
        state.events += 1;
        for k in m.saturating_sub(1)..(m + 2).min(n) {
            right.set(k, can_right(x, k));
            left.set(k, t > 0.0 && can_left(x, k));
        }
        if m + 1 == n {
            state.last_particle_max = state.last_particle_max.max(x[m]);
        }
    }
    state.time = time;
    Ok(state)
}

/// Centering and scaling `(c1, c2)` for `x_m` with `m = sigma T`:
/// `c1 = 1 - 2 sqrt(sigma)`, `c2 = sigma^{-1/6} (1 - sqrt(sigma))^{2/3}`.
pub fn tw_centering(sigma: f64) -> Result<(f64, f64)> {
    if !(sigma > 0.0 && sigma < 1.0) {
        return Err(invalid(format!("sigma={sigma} must lie in (0,1)")));
    }
    let s = sigma.sqrt();
    Ok((1.0 - 2.0 * s, sigma.powf(-1.0 / 6.0) * (1.0 - s).powf(2.0 / 3.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::rng_from_seed;

    #[test]
    fn initial_heights() {
        let s = AsepState::step(0.3, TruncationPolicy::for_time(0.0));
        assert_eq!(s.height_int(1).unwrap(), 0);
        assert_eq!(s.height_int(0).unwrap(), 1);
        assert!(s.height_int(-1).is_err());
        let mut rng = rng_from_seed(1);
        let s = simulate_asep(&mut rng, 0.3, 0.0, TruncationPolicy::for_time(0.0)).unwrap();
        assert_eq!(s.positions, (0..s.positions.len() as i64).map(|m| -m).collect::<Vec<_>>());
    }

    #[test]
    fn exclusion_and_identity() {
        let mut rng = rng_from_seed(2);
        let pol = TruncationPolicy::for_time(30.0);
        let m0 = pol.particles;
        let s = simulate_asep(&mut rng, 0.4, 30.0, pol).unwrap();
        assert_eq!(s.positions.len(), m0);
        assert!(s.positions.windows(2).all(|w| w[0] > w[1]));
        assert!(s.truncation_safe());
        assert!(event_identity_holds(&s, -15..40));
        let start = reliable_window_start(30.0);
        for x in start..40 {
            let d = s.height_int(x).unwrap() - s.height_int(x + 1).unwrap();
            assert!(d == 0 || d == 1);
        }
        assert!(s.height_int(start - 1).is_err());
    }

    #[test]
    fn centering_constants() {
        let (c1, c2) = tw_centering(0.25).unwrap();
        assert!(c1.abs() < 1e-15);
        assert!((c2 - 2f64.powf(-1.0 / 3.0)).abs() < 1e-15);
        let (c1, c2) = tw_centering(1.0 - 1e-12).unwrap();
        assert!((c1 + 1.0).abs() < 1e-5 && c2 < 1e-5);
        assert!(tw_centering(1.0).is_err());
    }
}
