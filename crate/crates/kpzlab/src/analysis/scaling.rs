//! KPZ scaling maps for the Hall-Littlewood, six-vertex and exclusion
//! height profiles.
//!
//! A raw profile `R` is centered and scaled as
//!
//! ```text
//! f_N(s) = sign * (R(x_N(s)) - f N - f' s N^{2/3} - (1/2) f'' s^2 N^{1/3}) / (sigma N^{1/3})
//! ```
//!
//! where for the Hall-Littlewood line `R = lambda'_1`, `x_N(s) = mu N + s N^{2/3}`,
//! `f = f_1`, `sign = +1`; for the six-vertex top row `R = h(., N)`,
//! `x_N(s) = 1 + mu N + s N^{2/3}`, `f = f_2`, `sign = -1`; and for the
//! exclusion process `R = h_T`, `x_N(s) = alpha N + s N^{2/3}`, `f = f_3`,
//! `sign = -1`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Which model a scaling refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Model {
    Hl,
    Sv,
    Asep,
}

/// Model tag with its parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingSpec {
    pub model: Model,
    /// `mu` for the Hall-Littlewood and six-vertex models, `alpha` for the
    /// exclusion process.
    pub location: f64,
    /// `zeta`; unused for the exclusion process.
    pub zeta: f64,
}

impl ScalingSpec {
    fn check_mu(mu: f64, zeta: f64) -> Result<()> {
        if !(zeta > 0.0 && zeta < 1.0) {
            return Err(invalid(format!("zeta={zeta} must lie in (0,1)")));
        }
        if !(mu > zeta && mu < 1.0 / zeta) {
            return Err(invalid(format!("mu={mu} must lie in (zeta, 1/zeta)")));
        }
        Ok(())
    }

    pub fn hl(mu: f64, zeta: f64) -> Result<Self> {
        Self::check_mu(mu, zeta)?;
        Ok(Self { model: Model::Hl, location: mu, zeta })
    }

    pub fn sv(mu: f64, zeta: f64) -> Result<Self> {
        Self::check_mu(mu, zeta)?;
        Ok(Self { model: Model::Sv, location: mu, zeta })
    }

    pub fn asep(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(invalid(format!("alpha={alpha} must lie in (0,1)")));
        }
        Ok(Self { model: Model::Asep, location: alpha, zeta: f64::NAN })
    }

    /// `sigma_mu` or `sigma_alpha`.
    pub fn sigma(&self) -> f64 {
        match self.model {
            Model::Hl | Model::Sv => {
                let (mu, z) = (self.location, self.zeta);
                (z * mu).powf(1.0 / 6.0)
                    * (1.0 - (z * mu).sqrt()).powf(2.0 / 3.0)
                    * (1.0 - (z / mu).sqrt()).powf(2.0 / 3.0)
                    / (1.0 - z)
            }
            Model::Asep => {
                let a = self.location;
                2f64.powf(-4.0 / 3.0) * (1.0 - a * a).powf(2.0 / 3.0)
            }
        }
    }

    /// `(f, f', f'')` at the location.
    pub fn f(&self) -> (f64, f64, f64) {
        let (mu, z) = (self.location, self.zeta);
        let hl = || {
            let r = (z * mu).sqrt();
            (
                1.0 - (1.0 - r).powi(2) / (1.0 - z),
                z.sqrt() * (1.0 - r) / (mu.sqrt() * (1.0 - z)),
                -z.sqrt() / (2.0 * mu.powf(1.5) * (1.0 - z)),
            )
        };
        match self.model {
            Model::Hl => hl(),
            Model::Sv => {
                let (f1, d1, dd1) = hl();
                (1.0 - f1, -d1, -dd1)
            }
            Model::Asep => {
                let a = self.location;
                ((1.0 - a).powi(2) / 4.0, -(1.0 - a) / 2.0, 0.5)
            }
        }
    }

    fn sign(&self) -> f64 {
        match self.model {
            Model::Hl => 1.0,
            Model::Sv | Model::Asep => -1.0,
        }
    }

    /// Point `x_N(s)` at which the raw profile is read.
    pub fn position(&self, n: f64, s: f64) -> f64 {
        let base = self.location * n + s * n.powf(2.0 / 3.0);
        match self.model {
            Model::Sv => 1.0 + base,
            Model::Hl | Model::Asep => base,
        }
    }

    /// `f_N(s)` from the raw value `R(x_N(s))`.
    pub fn scale(&self, n: f64, s: f64, raw: f64) -> f64 {
        let (f, d, dd) = self.f();
        let centered = raw - f * n - d * s * n.powf(2.0 / 3.0) - 0.5 * dd * s * s * n.powf(1.0 / 3.0);
        self.sign() * centered / (self.sigma() * n.powf(1.0 / 3.0))
    }

    /// The parabola-free curve `N^{-1/3} sign (R - f N - f' s N^{2/3})`,
    /// equal to `sigma f_N(s) + sign f'' s^2 / 2`.
    pub fn bridge_scale(&self, n: f64, s: f64, raw: f64) -> f64 {
        let (f, d, _) = self.f();
        self.sign() * (raw - f * n - d * s * n.powf(2.0 / 3.0)) / n.powf(1.0 / 3.0)
    }

    /// Slope `p` of the good sequence: `f_1'(mu)` for the Hall-Littlewood
    /// and six-vertex models and `-f_3'(alpha)` for the exclusion process.
    pub fn good_slope(&self) -> f64 {
        let (_, d, _) = self.f();
        match self.model {
            Model::Hl => d,
            Model::Sv | Model::Asep => -d,
        }
    }

    /// `2 r p (1 - p)`.
    pub fn bridge_variance(&self, r: f64) -> f64 {
        let p = self.good_slope();
        2.0 * r * p * (1.0 - p)
    }
}

/// A raw integer-lattice profile with linear interpolation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    /// Coordinate of `values[0]`.
    pub origin: i64,
    pub values: Vec<f64>,
}

impl Profile {
    pub fn new(origin: i64, values: Vec<f64>) -> Self {
        Self { origin, values }
    }

    pub fn from_ints(origin: i64, values: &[i64]) -> Self {
        Self { origin, values: values.iter().map(|&v| v as f64).collect() }
    }

    /// Last coordinate covered.
    pub fn end(&self) -> i64 {
        self.origin + self.values.len() as i64 - 1
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        let rel = x - self.origin as f64;
        let last = (self.values.len() - 1) as f64;
        if !(0.0..=last).contains(&rel) {
            return Err(Error::OutOfWindow(format!("x={x} outside [{}, {}]", self.origin, self.end())));
        }
        let i = rel.floor() as usize;
        if i as f64 == rel {
            return Ok(self.values[i]);
        }
        let f = rel - i as f64;
        Ok(self.values[i] + f * (self.values[i + 1] - self.values[i]))
    }
}

/// A scaled curve sampled on a uniform grid of `[-r, r]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaledCurve {
    pub r: f64,
    pub xs: Vec<f64>,
    pub values: Vec<f64>,
}

impl ScaledCurve {
    /// Linear interpolation on the grid.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if !(x >= -self.r && x <= self.r) {
            return Err(Error::OutOfWindow(format!("x={x} outside [-{0}, {0}]", self.r)));
        }
        let k = self.xs.len() - 1;
        let h = (x + self.r) / (2.0 * self.r) * k as f64;
        let i = (h.floor() as usize).min(k.saturating_sub(1));
        let f = h - i as f64;
        if k == 0 {
            return Ok(self.values[0]);
        }
        Ok(self.values[i] + f * (self.values[i + 1] - self.values[i]))
    }
}

/// Grid `-r + 2 r j / points` for `j = 0..=points`.
pub fn grid(r: f64, points: usize) -> Vec<f64> {
    (0..=points).map(|j| -r + 2.0 * r * j as f64 / points as f64).collect()
}

/// `f_N` on a uniform grid of `[-r, r]` with `points` intervals. The grid
/// should include the profile breakpoints for sup statistics to be exact.
pub fn scale_curve(spec: &ScalingSpec, n: f64, r: f64, points: usize, profile: &Profile) -> Result<ScaledCurve> {
    let xs = grid(r, points);
    let values = xs
        .iter()
        .map(|&s| profile.eval(spec.position(n, s)).map(|raw| spec.scale(n, s, raw)))
        .collect::<Result<_>>()?;
    Ok(ScaledCurve { r, xs, values })
}

/// The parabola-free curve of [`ScalingSpec::bridge_scale`] on a grid.
pub fn bridge_curve(spec: &ScalingSpec, n: f64, r: f64, points: usize, profile: &Profile) -> Result<ScaledCurve> {
    let xs = grid(r, points);
    let values = xs
        .iter()
        .map(|&s| profile.eval(spec.position(n, s)).map(|raw| spec.bridge_scale(n, s, raw)))
        .collect::<Result<_>>()?;
    Ok(ScaledCurve { r, xs, values })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn asep_constants() {
        let s = ScalingSpec::asep(0.5).unwrap();
        let (f, d, dd) = s.f();
        assert!((f - 1.0 / 16.0).abs() < 1e-15 && (d + 0.25).abs() < 1e-15 && dd == 0.5);
        assert!((s.sigma() - 2f64.powf(-4.0 / 3.0) * 0.75f64.powf(2.0 / 3.0)).abs() < 1e-15);
        let p = s.good_slope();
        let (_, d, _) = s.f();
        assert!((s.bridge_variance(1.5) - (-2.0 * 1.5 * d * (1.0 + d))).abs() < 1e-15);
        assert!((p - 0.25).abs() < 1e-15);
    }

    #[test]
    fn hl_sv_duality_of_constants() {
        for k in 1..20 {
            let zeta = 0.4;
            let mu = zeta + (1.0 / zeta - zeta) * k as f64 / 20.0;
            let h = ScalingSpec::hl(mu, zeta).unwrap();
            let v = ScalingSpec::sv(mu, zeta).unwrap();
            let (a, b) = (h.f(), v.f());
            assert!((a.0 + b.0 - 1.0).abs() < 1e-12);
            assert!((a.1 + b.1).abs() < 1e-12 && (a.2 + b.2).abs() < 1e-12);
            assert_eq!(h.sigma(), v.sigma());
            assert!((h.good_slope() - v.good_slope()).abs() < 1e-15);
        }
        assert!(ScalingSpec::hl(0.3, 0.4).is_err());
    }

    #[test]
    fn hl_sv_scaled_values_agree_under_identity() {
        let (mu, zeta, n) = (1.0, 0.5, 64.0);
        let h = ScalingSpec::hl(mu, zeta).unwrap();
        let v = ScalingSpec::sv(mu, zeta).unwrap();
        for s in [-1.0, 0.0, 0.5] {
            let lam = 20.0;
            let a = h.scale(n, s, lam);
            let b = v.scale(n, s, n - lam);
            assert!((a - b).abs() < 1e-12);
            assert_eq!(h.position(n, s) + 1.0, v.position(n, s));
        }
    }

    #[test]
    fn staircase_fixture() {
        let (mu, zeta, n) = (0.6, 0.3, 64.0);
        let spec = ScalingSpec::sv(mu, zeta).unwrap();
        let x_max = 200;
        let profile = Profile::new(1, (1..=x_max).map(|x| (n - x as f64 + 1.0).max(0.0)).collect());
        let c = scale_curve(&spec, n, 1.0, 8, &profile).unwrap();
        let (f, d, dd) = spec.f();
        for (&s, &val) in c.xs.iter().zip(&c.values) {
            let x = spec.position(n, s);
            let h = n - x + 1.0;
            let expect = (f * n + d * s * n.powf(2.0 / 3.0) + 0.5 * s * s * dd * n.powf(1.0 / 3.0) - h)
                / (spec.sigma() * n.powf(1.0 / 3.0));
            assert!((val - expect).abs() < 1e-12);
        }
        assert!(scale_curve(&spec, 1e6, 1.0, 8, &profile).is_err());
    }
}
