//! Window library: cube indicators, cardinal B-splines, truncated Gaussians
//! and Smith–Volterra–Cantor (fat Cantor) indicators.

use serde::{Deserialize, Serialize};

use crate::error::{GaborError, Result};
use crate::grid::{Grid, GridFunction};

/// A window family with its parameters.
///
/// Serialized as a tagged JSON object, e.g.
/// `{"family": "gaussian", "sigma": 1.0, "radius": 6.0}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum WindowSpec {
    /// `χ_{[0,s)^d}`.
    IndicatorCube { side: f64 },
    /// Tensor product of the cardinal B-spline `B_m` supported on `[0,m)`.
    Bspline { order: u32 },
    /// `Π exp(-π x_j²/σ²)`, cut to zero where `max |x_j| > radius`.
    Gaussian { sigma: f64, radius: f64 },
    /// Indicator of the depth-`k` Smith–Volterra–Cantor set in `[0,1)`. One-dimensional only.
    FatCantor { depth: u32 },
}

impl WindowSpec {
    pub fn family_name(&self) -> &'static str {
        match self {
            WindowSpec::IndicatorCube { .. } => "indicator_cube",
            WindowSpec::Bspline { .. } => "bspline",
            WindowSpec::Gaussian { .. } => "gaussian",
            WindowSpec::FatCantor { .. } => "fat_cantor",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            WindowSpec::IndicatorCube { side } => side > 0.0 && side.is_finite(),
            WindowSpec::Bspline { order } => order >= 1,
            WindowSpec::Gaussian { sigma, radius } => {
                sigma > 0.0 && radius > 0.0 && sigma.is_finite() && radius.is_finite()
            }
            WindowSpec::FatCantor { depth } => (1..=24).contains(&depth),
        };
        if ok {
            Ok(())
        } else {
            Err(GaborError::InvalidParameter(format!("invalid window parameters: {self:?}")))
        }
    }

    /// Per-axis interval outside of which the window vanishes.
    pub fn support(&self) -> (f64, f64) {
        match *self {
            WindowSpec::IndicatorCube { side } => (0.0, side),
            WindowSpec::Bspline { order } => (0.0, order as f64),
            WindowSpec::Gaussian { radius, .. } => (-radius, radius),
            WindowSpec::FatCantor { .. } => (0.0, 1.0),
        }
    }

    /// Whether `conj(g)·g` is locally Riemann integrable for the continuous-limit window.
    pub fn is_riemann_integrable(&self) -> bool {
        !matches!(self, WindowSpec::FatCantor { .. })
    }
}

/// Samples a window on a grid.
pub fn sample_window(spec: &WindowSpec, grid: &Grid) -> Result<GridFunction> {
    spec.validate()?;
    let out = match *spec {
        WindowSpec::IndicatorCube { side } => GridFunction::from_real_fn(*grid, |x| {
            if x.iter().all(|&c| c >= 0.0 && c < side) {
                1.0
            } else {
                0.0
            }
        }),
        WindowSpec::Bspline { order } => {
            GridFunction::from_real_fn(*grid, |x| x.iter().map(|&c| cardinal_bspline(order, c)).product())
        }
        WindowSpec::Gaussian { sigma, radius } => GridFunction::from_real_fn(*grid, |x| {
            if x.iter().any(|c| c.abs() > radius) {
                0.0
            } else {
                x.iter().map(|c| (-std::f64::consts::PI * (c / sigma).powi(2)).exp()).product()
            }
        }),
        WindowSpec::FatCantor { depth } => {
            if grid.dim() != 1 {
                return Err(GaborError::UnsupportedDimension { family: "fat_cantor", dim: grid.dim() });
            }
            let set = FatCantor::new(depth);
            GridFunction::from_real_fn(*grid, |x| if set.contains(x[0]) { 1.0 } else { 0.0 })
        }
    };
    Ok(out)
}

/// Cardinal B-spline of order `m` (the `m`-fold convolution of `χ_{[0,1)}`).
pub fn cardinal_bspline(order: u32, x: f64) -> f64 {
    if order == 0 || x < 0.0 || x >= order as f64 {
        return 0.0;
    }
    if order == 1 {
        return 1.0;
    }
    let m = order as f64;
    (x * cardinal_bspline(order - 1, x) + (m - x) * cardinal_bspline(order - 1, x - 1.0)) / (m - 1.0)
}

/// Depth-`k` Smith–Volterra–Cantor set `E_k ⊂ [0,1)`.
///
/// Step `j` removes a middle interval of length `4^{-j}` from each of the
/// `2^{j-1}` remaining pieces. Pieces and gaps are kept half-open, `[s, e)`,
/// so sampling at left cell endpoints reproduces the measure exactly on any
/// grid that resolves the endpoints (all endpoints are dyadic).
#[derive(Debug, Clone, PartialEq)]
pub struct FatCantor {
    depth: u32,
    pieces: Vec<(f64, f64)>,
}

impl FatCantor {
    pub fn new(depth: u32) -> FatCantor {
        let mut pieces = vec![(0.0f64, 1.0f64)];
        for j in 1..=depth {
            let gap = 0.25f64.powi(j as i32);
            pieces = pieces
                .into_iter()
                .flat_map(|(s, e)| {
                    let keep = (e - s - gap) / 2.0;
                    [(s, s + keep), (e - keep, e)]
                })
                .collect();
        }
        FatCantor { depth, pieces }
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// Retained half-open pieces, sorted.
    pub fn pieces(&self) -> &[(f64, f64)] {
        &self.pieces
    }

    /// Removed half-open gaps, sorted.
    pub fn gaps(&self) -> Vec<(f64, f64)> {
        self.pieces.windows(2).map(|w| (w[0].1, w[1].0)).collect()
    }

    pub fn contains(&self, x: f64) -> bool {
        let i = self.pieces.partition_point(|&(s, _)| s <= x);
        i > 0 && x < self.pieces[i - 1].1
    }

    /// Lebesgue measure, summed from the pieces.
    pub fn measure(&self) -> f64 {
        self.pieces.iter().map(|(s, e)| e - s).sum()
    }

    /// Smallest gap length, `4^{-k}`.
    pub fn smallest_gap(&self) -> f64 {
        0.25f64.powi(self.depth as i32)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::inner_product;

    #[test]
    fn indicator_cube_sampling() {
        let grid = Grid::new(1, 1.0 / 8.0, 2.0).unwrap();
        let w = sample_window(&WindowSpec::IndicatorCube { side: 1.0 }, &grid).unwrap();
        let nz: Vec<_> = (0..grid.len()).filter(|&i| w.values()[i].re != 0.0).collect();
        assert_eq!(nz.len(), 8);
        for i in nz {
            let x = grid.coords(&grid.steps_at(i))[0];
            assert!((0.0..1.0).contains(&x));
            assert_eq!(w.values()[i].re, 1.0);
        }
    }

    #[test]
    fn bspline_values() {
        assert_eq!(cardinal_bspline(2, 1.0), 1.0);
        assert_eq!(cardinal_bspline(2, 0.5), 0.5);
        assert_eq!(cardinal_bspline(2, 2.0), 0.0);
        assert!((cardinal_bspline(3, 1.5) - 0.75).abs() < 1e-15);
        // partition of unity
        for x in [0.1, 0.37, 0.9] {
            let s: f64 = (0..4).map(|k| cardinal_bspline(4, x + k as f64)).sum();
            assert!((s - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn gaussian_is_truncated() {
        let grid = Grid::new(1, 0.25, 4.0).unwrap();
        let w = sample_window(&WindowSpec::Gaussian { sigma: 1.0, radius: 1.0 }, &grid).unwrap();
        assert_eq!(w.at_steps(&[0, 0, 0]).re, 1.0);
        assert!(w.at_steps(&[4, 0, 0]).re > 0.0);
        assert_eq!(w.at_steps(&[5, 0, 0]).re, 0.0);
    }

    #[test]
    fn fat_cantor_depth_one() {
        let e = FatCantor::new(1);
        assert_eq!(e.pieces(), &[(0.0, 0.375), (0.625, 1.0)]);
        assert_eq!(e.measure(), 0.75);
        assert!(e.contains(0.0) && !e.contains(0.5) && e.contains(0.625) && !e.contains(1.0));
    }

    #[test]
    fn fat_cantor_measure_closed_form() {
        for k in 1..=12u32 {
            let expected = 1.0 - 0.5 * (1.0 - 0.5f64.powi(k as i32));
            assert!((FatCantor::new(k).measure() - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn fat_cantor_sampled_measure_within_one_cell() {
        for k in 1..=4u32 {
            let h = 0.25f64.powi(k as i32) / 8.0;
            let grid = Grid::new(1, h, 2.0).unwrap();
            let w = sample_window(&WindowSpec::FatCantor { depth: k }, &grid).unwrap();
            let measure = inner_product(&w, &w).unwrap().re;
            let expected = 1.0 - 0.5 * (1.0 - 0.5f64.powi(k as i32));
            assert!((measure - expected).abs() <= h, "k={k}: {measure} vs {expected}");
        }
    }

    #[test]
    fn fat_cantor_needs_one_dimension() {
        let grid = Grid::new(2, 0.25, 2.0).unwrap();
        assert!(matches!(
            sample_window(&WindowSpec::FatCantor { depth: 1 }, &grid),
            Err(GaborError::UnsupportedDimension { .. })
        ));
    }

    #[test]
    fn invalid_parameters_rejected() {
        let grid = Grid::new(1, 0.25, 2.0).unwrap();
        for spec in [
            WindowSpec::IndicatorCube { side: 0.0 },
            WindowSpec::Bspline { order: 0 },
            WindowSpec::Gaussian { sigma: -1.0, radius: 2.0 },
            WindowSpec::FatCantor { depth: 0 },
        ] {
            assert!(sample_window(&spec, &grid).is_err());
        }
    }

    #[test]
    fn json_shape() {
        let spec: WindowSpec =
            serde_json::from_str(r#"{"family": "gaussian", "sigma": 1.0, "radius": 6.0}"#).unwrap();
        assert_eq!(spec, WindowSpec::Gaussian { sigma: 1.0, radius: 6.0 });
        let s = serde_json::to_string(&WindowSpec::FatCantor { depth: 3 }).unwrap();
        assert_eq!(s, r#"{"family":"fat_cantor","depth":3}"#);
        let back: WindowSpec = serde_json::from_str(&s).unwrap();
        assert_eq!(back, WindowSpec::FatCantor { depth: 3 });
    }
}
