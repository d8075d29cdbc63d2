//! Stochastic six-vertex model in the quadrant with step boundary.
//!
//! Vertices are `(x, y)` with `x, y >= 1`. A path enters every vertex
//! `(1, y)` from the left and none enters `(x, 1)` from below. A vertex with
//! a single incoming arrow is completed as follows:
//!
//! * input from below: out up with probability `b1`, otherwise out right;
//! * input from the left: out right with probability `b2`, otherwise out up.
//!
//! Zero inputs give zero outputs and two inputs give both outputs. The
//! height `h(x, y)` counts paths meeting the horizontal line through `y` at
//! a column `>= x`, that is `y` minus the number of paths leaving row `y`
//! upward at columns `< x`.
//!
//! The completion at `(x, y)` uses the uniform
//! `mix64(field_seed + key(x, y) * GOLDEN_GAMMA)`, so a field sampled on a
//! window restricts exactly to the field sampled on any smaller window with
//! the same `field_seed`. Rows are swept left to right, bottom to top; each
//! completion depends only on its left and lower neighbours, so the sweep
//! order does not change the law.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::harness::{mix64, GOLDEN_GAMMA};

/// Vertex weights of the model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum S6VParams {
    /// Spectral parameters `q`, `xi_x`, `u_y`. A length-one vector is
    /// constant in its coordinate.
    Spectral { q: f64, xi: Vec<f64>, u: Vec<f64> },
    /// Completion probabilities given directly, allowing the degenerate
    /// values `0` and `1`.
    Raw { b1: f64, b2: f64 },
}

/// `(b1, b2)` as functions of `q` and the product `xi * u`.
fn spectral_probs(q: f64, xu: f64) -> (f64, f64) {
    let sq = q.sqrt();
    let den = 1.0 - xu / sq;
    ((1.0 - sq * xu) / den, (1.0 / q - xu / sq) / den)
}

impl S6VParams {
    /// Homogeneous parameters, validated against `xi u > q^{-1/2}`.
    pub fn homogeneous(q: f64, xi: f64, u: f64) -> Result<Self> {
        Self::inhomogeneous(q, vec![xi], vec![u])
    }

    /// Column parameters `xi_1, xi_2, ...` and row parameters `u_1, ...`.
    pub fn inhomogeneous(q: f64, xi: Vec<f64>, u: Vec<f64>) -> Result<Self> {
        if !(q > 0.0 && q < 1.0) {
            return Err(invalid(format!("q={q} must lie in (0,1)")));
        }
        if xi.is_empty() || u.is_empty() || xi.iter().chain(&u).any(|&v| !(v > 0.0)) {
            return Err(invalid("xi and u must be nonempty and positive"));
        }
        let min_xi = xi.iter().copied().fold(f64::INFINITY, f64::min);
        let min_u = u.iter().copied().fold(f64::INFINITY, f64::min);
        if !(min_xi * min_u > 1.0 / q.sqrt()) {
            return Err(invalid("every product xi_x u_y must exceed q^(-1/2)"));
        }
        Ok(Self::Spectral { q, xi, u })
    }

    /// Homogeneous parameters with `zeta = 1 / (xi u sqrt(q))`, taking `u = 1`.
    pub fn from_zeta(q: f64, zeta: f64) -> Result<Self> {
        if !(zeta > 0.0 && zeta < 1.0) {
            return Err(invalid(format!("zeta={zeta} must lie in (0,1)")));
        }
        Self::homogeneous(q, 1.0 / (zeta * q.sqrt()), 1.0)
    }

    /// Direct completion probabilities in `[0, 1]`.
    pub fn raw(b1: f64, b2: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&b1) || !(0.0..=1.0).contains(&b2) {
            return Err(invalid("raw probabilities must lie in [0,1]"));
        }
        Ok(Self::Raw { b1, b2 })
    }

    /// `zeta = 1 / (xi u sqrt(q))` for homogeneous spectral parameters.
    pub fn zeta(&self) -> Option<f64> {
        match self {
            Self::Spectral { q, xi, u } if xi.len() == 1 && u.len() == 1 => Some(1.0 / (xi[0] * u[0] * q.sqrt())),
            _ => None,
        }
    }

    fn is_constant(&self) -> bool {
        match self {
            Self::Spectral { xi, u, .. } => xi.len() == 1 && u.len() == 1,
            Self::Raw { .. } => true,
        }
    }
}

/// `(b1(x, y), b2(x, y))`.
pub fn vertex_probs(params: &S6VParams, x: usize, y: usize) -> Result<(f64, f64)> {
    if x == 0 || y == 0 {
        return Err(Error::OutOfWindow(format!("vertex ({x},{y}) is outside the quadrant")));
    }
    match params {
        S6VParams::Raw { b1, b2 } => Ok((*b1, *b2)),
        S6VParams::Spectral { q, xi, u } => {
            let pick = |v: &[f64], i: usize, name: &str| -> Result<f64> {
                if v.len() == 1 {
                    Ok(v[0])
                } else {
                    v.get(i - 1)
                        .copied()
                        .ok_or_else(|| Error::OutOfWindow(format!("{name} has no entry {i}")))
                }
            };
            Ok(spectral_probs(*q, pick(xi, x, "xi")? * pick(u, y, "u")?))
        }
    }
}

/// Homogeneous parameters with `b2 = 1/N` and `b1 = q/N` exactly.
pub fn asep_limit_params(n: f64, q: f64) -> Result<S6VParams> {
    if !(q > 0.0 && q < 1.0) {
        return Err(invalid(format!("q={q} must lie in (0,1)")));
    }
    if !(n > 1.0) {
        return Err(invalid(format!("N={n} must exceed 1 for b2 = 1/N to be attainable")));
    }
    S6VParams::from_zeta(q, (n - 1.0) / (n - q))
}

/// The uniform used to complete vertex `(x, y)` of the field `field_seed`.
#[inline]
pub fn vertex_uniform(field_seed: u64, x: usize, y: usize) -> f64 {
    let key = ((x as u64) << 32) | (y as u64 & 0xFFFF_FFFF);
    let bits = mix64(field_seed.wrapping_add(key.wrapping_mul(GOLDEN_GAMMA)));
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Completion of one vertex: `(up_out, right_out)`.
#[inline]
fn complete(from_below: bool, from_left: bool, b1: f64, b2: f64, u: impl FnOnce() -> f64) -> (bool, bool) {
    match (from_below, from_left) {
        (false, false) => (false, false),
        (true, true) => (true, true),
        (true, false) => {
            let up = u() < b1;
            (up, !up)
        }
        (false, true) => {
            let right = u() < b2;
            (!right, right)
        }
    }
}

/// Per-row probability source.
struct Probs<'a> {
    params: &'a S6VParams,
    constant: Option<(f64, f64)>,
}

impl<'a> Probs<'a> {
    fn new(params: &'a S6VParams) -> Result<Self> {
        let constant = if params.is_constant() { Some(vertex_probs(params, 1, 1)?) } else { None };
        Ok(Self { params, constant })
    }

    #[inline]
    fn at(&self, x: usize, y: usize) -> Result<(f64, f64)> {
        match self.constant {
            Some(c) => Ok(c),
            None => vertex_probs(self.params, x, y),
        }
    }
}

/// Arrow configuration on the window `[1, X] x [1, Y]`.
///
/// Two bitplanes hold the outgoing arrows of every vertex, up and right;
/// incoming arrows are the outgoing arrows of the left and lower neighbours
/// together with the step boundary.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeightField {
    x: usize,
    y: usize,
    words: usize,
    up: Vec<u64>,
    right: Vec<u64>,
}

const BITPLANE_MAGIC: &[u8; 4] = b"S6V1";
/// Header flag: the planes hold outgoing (up, right) arrows.
pub const BITPLANE_OUT_EDGES: u32 = 1;

impl HeightField {
    fn empty(x: usize, y: usize) -> Self {
        let words = x.div_ceil(64);
        Self { x, y, words, up: vec![0; words * y], right: vec![0; words * y] }
    }

    pub fn width(&self) -> usize {
        self.x
    }

    pub fn rows(&self) -> usize {
        self.y
    }

    #[inline]
    fn bit(plane: &[u64], words: usize, x: usize, y: usize) -> bool {
        let i = x - 1;
        plane[(y - 1) * words + i / 64] >> (i % 64) & 1 == 1
    }

    #[inline]
    fn set(plane: &mut [u64], words: usize, x: usize, y: usize) {
        let i = x - 1;
        plane[(y - 1) * words + i / 64] |= 1 << (i % 64);
    }

    /// Whether a path leaves `(x, y)` upward.
    pub fn up_out(&self, x: usize, y: usize) -> bool {
        Self::bit(&self.up, self.words, x, y)
    }

    /// Whether a path leaves `(x, y)` to the right.
    pub fn right_out(&self, x: usize, y: usize) -> bool {
        Self::bit(&self.right, self.words, x, y)
    }

    /// Whether a path enters `(x, y)` from below.
    pub fn up_in(&self, x: usize, y: usize) -> bool {
        y > 1 && self.up_out(x, y - 1)
    }

    /// Whether a path enters `(x, y)` from the left.
    pub fn right_in(&self, x: usize, y: usize) -> bool {
        x == 1 || self.right_out(x - 1, y)
    }

    /// `h(x, y)` for `1 <= x <= X + 1`, `1 <= y <= Y`.
    pub fn height(&self, x: usize, y: usize) -> Result<i64> {
        if x == 0 || x > self.x + 1 || y == 0 || y > self.y {
            return Err(Error::OutOfWindow(format!("({x},{y}) outside [1,{}]x[1,{}]", self.x + 1, self.y)));
        }
        let row = &self.up[(y - 1) * self.words..y * self.words];
        let cols = x - 1;
        let mut exits = 0u32;
        for (k, w) in row.iter().enumerate() {
            let lo = k * 64;
            if lo >= cols {
                break;
            }
            let take = (cols - lo).min(64);
            let mask = if take == 64 { u64::MAX } else { (1u64 << take) - 1 };
            exits += (w & mask).count_ones();
        }
        Ok(y as i64 - i64::from(exits))
    }

    /// `h(x, y)` for `x = 1..=X+1`.
    pub fn height_row(&self, y: usize) -> Result<Vec<i64>> {
        if y == 0 || y > self.y {
            return Err(Error::OutOfWindow(format!("row {y} outside [1,{}]", self.y)));
        }
        let mut out = Vec::with_capacity(self.x + 1);
        let mut h = y as i64;
        out.push(h);
        for x in 1..=self.x {
            h -= i64::from(self.up_out(x, y));
            out.push(h);
        }
        Ok(out)
    }

    /// Linear interpolation of `h(., y)` at real `x` in `[1, X + 1]`.
    pub fn height_interp(&self, x: f64, y: usize) -> Result<f64> {
        if !(x >= 1.0 && x <= (self.x + 1) as f64) {
            return Err(Error::OutOfWindow(format!("x={x} outside [1,{}]", self.x + 1)));
        }
        let lo = x.floor() as usize;
        let a = self.height(lo, y)? as f64;
        if lo as f64 == x {
            return Ok(a);
        }
        let b = self.height(lo + 1, y)? as f64;
        Ok(a + (x - lo as f64) * (b - a))
    }

    /// CSV `x,h` of row `y`.
    pub fn row_csv(&self, y: usize) -> Result<String> {
        let mut s = String::from("x,h\n");
        for (k, h) in self.height_row(y)?.iter().enumerate() {
            s.push_str(&format!("{},{h}\n", k + 1));
        }
        Ok(s)
    }

    /// Binary dump: a 16-byte header `S6V1 | X | Y | flags` (little-endian
    /// `u32`), then the up plane and the right plane, each `Y` rows of
    /// `ceil(X / 64)` little-endian `u64` words.
    pub fn to_bitplanes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(16 + 16 * self.up.len());
        out.extend_from_slice(BITPLANE_MAGIC);
        out.extend_from_slice(&(self.x as u32).to_le_bytes());
        out.extend_from_slice(&(self.y as u32).to_le_bytes());
        out.extend_from_slice(&BITPLANE_OUT_EDGES.to_le_bytes());
        for w in self.up.iter().chain(&self.right) {
            out.extend_from_slice(&w.to_le_bytes());
        }
        out
    }

    pub fn from_bitplanes(bytes: &[u8]) -> Result<Self> {
        let u32_at = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().expect("4 bytes"));
        if bytes.len() < 16 || &bytes[..4] != BITPLANE_MAGIC {
            return Err(invalid("not an S6V1 bitplane dump"));
        }
        let (x, y, flags) = (u32_at(4) as usize, u32_at(8) as usize, u32_at(12));
        if flags != BITPLANE_OUT_EDGES {
            return Err(invalid(format!("unsupported flags {flags}")));
        }
        let mut f = Self::empty(x, y);
        let n = f.up.len();
        if bytes.len() != 16 + 16 * n {
            return Err(invalid("truncated bitplane dump"));
        }
        let word = |k: usize| u64::from_le_bytes(bytes[16 + 8 * k..24 + 8 * k].try_into().expect("8 bytes"));
        for k in 0..n {
            f.up[k] = word(k);
            f.right[k] = word(n + k);
        }
        Ok(f)
    }
}

/// Samples the field on `[1, X] x [1, Y]` with a fresh field seed.
pub fn sample_s6v<R: Rng + ?Sized>(rng: &mut R, params: &S6VParams, x: usize, y: usize) -> Result<HeightField> {
    sample_s6v_seeded(rng.next_u64(), params, x, y)
}

/// Samples the field on `[1, X] x [1, Y]` from an explicit field seed.
pub fn sample_s6v_seeded(field_seed: u64, params: &S6VParams, x: usize, y: usize) -> Result<HeightField> {
    if x == 0 || y == 0 {
        return Err(invalid("window must be at least 1x1"));
    }
    let probs = Probs::new(params)?;
    let mut f = HeightField::empty(x, y);
    let words = f.words;
    for row in 1..=y {
        let mut from_left = true;
        for col in 1..=x {
            let from_below = row > 1 && HeightField::bit(&f.up, words, col, row - 1);
            let (b1, b2) = probs.at(col, row)?;
            let (up, right) = complete(from_below, from_left, b1, b2, || vertex_uniform(field_seed, col, row));
            if up {
                HeightField::set(&mut f.up, words, col, row);
            }
            if right {
                HeightField::set(&mut f.right, words, col, row);
            }
            from_left = right;
        }
    }
    Ok(f)
}

/// `h(x, Y)` for `x = 1..=X+1` without storing the field. Equal to
/// `sample_s6v_seeded(field_seed, ..).height_row(Y)`.
pub fn top_row_heights(field_seed: u64, params: &S6VParams, x: usize, y: usize) -> Result<Vec<i64>> {
    if x == 0 || y == 0 {
        return Err(invalid("window must be at least 1x1"));
    }
    let probs = Probs::new(params)?;
    let mut below = vec![false; x + 1];
    for row in 1..=y {
        let mut from_left = true;
        for (col, cell) in below.iter_mut().enumerate().skip(1) {
            let (b1, b2) = probs.at(col, row)?;
            let (up, right) = complete(*cell, from_left, b1, b2, || vertex_uniform(field_seed, col, row));
            *cell = up;
            from_left = right;
        }
    }
    let mut out = Vec::with_capacity(x + 1);
    let mut h = y as i64;
    out.push(h);
    for &up in &below[1..] {
        h -= i64::from(up);
        out.push(h);
    }
    Ok(out)
}
