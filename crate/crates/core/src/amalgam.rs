//! Wiener amalgam norms `W(L^p, ℓ^q)` on the grid: local `L^p` norms over the
//! unit cubes `k + [0,1)^d`, aggregated in `ℓ^q` over `k`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{GaborError, Result};
use crate::grid::{inner_product, GridFunction, IndexBox, Steps, MAX_DIM};
use crate::sum::pairwise_sum;

/// An exponent in `[1, ∞]`; infinity is kept symbolic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl Exponent {
    pub fn finite(p: f64) -> Result<Exponent> {
        if p.is_finite() && p >= 1.0 {
            Ok(Exponent::Finite(p))
        } else if p == f64::INFINITY {
            Ok(Exponent::Infinity)
        } else {
            Err(GaborError::InvalidParameter(format!("exponent {p} must lie in [1, inf]")))
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Exponent::Infinity)
    }

    /// `1/p`, with `1/∞ = 0`.
    pub fn reciprocal(&self) -> f64 {
        match self {
            Exponent::Finite(p) => 1.0 / p,
            Exponent::Infinity => 0.0,
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(p) => write!(f, "{p}"),
            Exponent::Infinity => write!(f, "inf"),
        }
    }
}

impl FromStr for Exponent {
    type Err = GaborError;

    fn from_str(s: &str) -> Result<Exponent> {
        match s.trim() {
            "inf" | "Inf" | "infinity" | "∞" => Ok(Exponent::Infinity),
            other => {
                let p: f64 = other
                    .parse()
                    .map_err(|_| GaborError::InvalidParameter(format!("cannot parse exponent `{other}`")))?;
                Exponent::finite(p)
            }
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Exponent::Finite(p) => s.serialize_f64(*p),
            Exponent::Infinity => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Exponent, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        let parsed = match Raw::deserialize(d)? {
            Raw::Num(p) => Exponent::finite(p),
            Raw::Text(s) => s.parse(),
        };
        parsed.map_err(serde::de::Error::custom)
    }
}

/// The index pair `(p, q)` of `W(L^p, ℓ^q)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentPair {
    pub p: Exponent,
    pub q: Exponent,
}

impl ExponentPair {
    pub fn new(p: Exponent, q: Exponent) -> ExponentPair {
        ExponentPair { p, q }
    }

    /// Convenience constructor; `f64::INFINITY` maps to the symbolic infinity.
    pub fn from_f64(p: f64, q: f64) -> Result<ExponentPair> {
        Ok(ExponentPair { p: Exponent::finite(p)?, q: Exponent::finite(q)? })
    }

    pub fn conjugate(&self) -> ExponentPair {
        ExponentPair { p: conjugate_exponent(self.p), q: conjugate_exponent(self.q) }
    }
}

impl fmt::Display for ExponentPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.p, self.q)
    }
}

/// `p'` with `1/p + 1/p' = 1`.
pub fn conjugate_exponent(p: Exponent) -> Exponent {
    match p {
        Exponent::Infinity => Exponent::Finite(1.0),
        Exponent::Finite(1.0) => Exponent::Infinity,
        Exponent::Finite(v) => Exponent::Finite(v / (v - 1.0)),
    }
}

/// `ℓ^r` norm of nonnegative weights `w_i · v_i^r` style sums: `(weight Σ v^r)^{1/r}`,
/// or `max v` for `r = ∞`. Values are rescaled by their maximum to avoid overflow.
fn weighted_lr(values: &[f64], weight: f64, r: Exponent) -> f64 {
    let max = values.iter().copied().fold(0.0, f64::max);
    match r {
        Exponent::Infinity => max,
        Exponent::Finite(_) if max == 0.0 => 0.0,
        Exponent::Finite(1.0) => weight * pairwise_sum(values),
        Exponent::Finite(r) => {
            let scaled: Vec<f64> = values.iter().map(|v| (v / max).powf(r)).collect();
            max * (weight * pairwise_sum(&scaled)).powf(1.0 / r)
        }
    }
}

/// Box of integer cube indices `k` whose cubes meet the grid.
pub fn cube_range(f: &GridFunction) -> IndexBox {
    let grid = f.grid();
    let m = grid.steps_per_unit() as i64;
    let (lo, hi) = grid.step_bounds();
    IndexBox::uniform(grid.dim(), lo.div_euclid(m), hi.div_euclid(m))
}

/// Grid positions inside the cube `k + [0,1)^d`.
fn cube_points(f: &GridFunction, k: &Steps) -> IndexBox {
    let grid = f.grid();
    let m = grid.steps_per_unit() as i64;
    let mut lo = [0; MAX_DIM];
    let mut hi = [0; MAX_DIM];
    for a in 0..grid.dim() {
        lo[a] = k[a] * m;
        hi[a] = (k[a] + 1) * m - 1;
    }
    IndexBox::new(grid.dim(), lo, hi).intersect(&grid.index_box())
}

/// `‖f · T_k χ_Q‖_p`: the discrete `L^p` norm of `f` on the cube `k + [0,1)^d`.
pub fn lp_norm_on_cube(f: &GridFunction, k: &[i64], p: Exponent) -> f64 {
    let grid = f.grid();
    let mut kk = [0i64; MAX_DIM];
    for (a, &v) in k.iter().take(grid.dim()).enumerate() {
        kk[a] = v;
    }
    cube_norm(f, &kk, p)
}

fn cube_norm(f: &GridFunction, k: &Steps, p: Exponent) -> f64 {
    let pts = cube_points(f, k);
    if pts.is_empty() {
        return 0.0;
    }
    let grid = f.grid();
    let mods: Vec<f64> = pts
        .iter()
        .map(|s| f.values()[grid.index_of(&s).expect("cube clipped to grid")].norm())
        .collect();
    weighted_lr(&mods, grid.cell_measure(), p)
}

/// Local `L^p` norms of every cube meeting the grid, in row-major cube order.
pub fn cube_norms(f: &GridFunction, p: Exponent) -> Vec<f64> {
    cube_range(f).iter().map(|k| cube_norm(f, &k, p)).collect()
}

/// `‖f‖_{W(L^p,ℓ^q)} = (Σ_k ‖f·T_kχ_Q‖_p^q)^{1/q}`.
pub fn amalgam_norm(f: &GridFunction, pq: ExponentPair) -> f64 {
    weighted_lr(&cube_norms(f, pq.p), 1.0, pq.q)
}

/// Wiener space norm `Σ_k ‖g·T_kχ_Q‖_∞`, i.e. `W(L^∞, ℓ^1)`.
pub fn wiener_norm(g: &GridFunction) -> f64 {
    amalgam_norm(g, ExponentPair { p: Exponent::Infinity, q: Exponent::Finite(1.0) })
}

/// Global discrete `L^p` norm `(h^d Σ |f|^p)^{1/p}`.
pub fn lp_norm(f: &GridFunction, p: Exponent) -> f64 {
    let mods: Vec<f64> = f.values().iter().map(|v| v.norm()).collect();
    weighted_lr(&mods, f.grid().cell_measure(), p)
}

/// The pairing `∫ f conj(g)`, identical to the grid inner product.
pub fn pairing(f: &GridFunction, g: &GridFunction) -> Result<Complex64> {
    inner_product(f, g)
}

/// Outcome of the Hölder-type bound `|⟨f,g⟩| ≤ ‖f‖_{W(L^p,ℓ^q)} ‖g‖_{W(L^{p'},ℓ^{q'})}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolderDiagnostic {
    pub pairing_abs: f64,
    pub bound: f64,
    pub holds: bool,
}

pub fn holder_check(f: &GridFunction, g: &GridFunction, pq: ExponentPair) -> Result<HolderDiagnostic> {
    let pairing_abs = pairing(f, g)?.norm();
    let bound = amalgam_norm(f, pq) * amalgam_norm(g, pq.conjugate());
    let holds = pairing_abs <= bound * (1.0 + 1e-12) + 1e-300;
    Ok(HolderDiagnostic { pairing_abs, bound, holds })
}
