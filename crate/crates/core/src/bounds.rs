//! Compatibility refutation and bounds on Fréchet classes.
//!
//! For 2-copulas `C12`, `C23` every `C13` compatible with them satisfies
//! `C12 *_W C23 ⪯ C13 ⪯ C12 *_M C23`, so a grid point outside that band
//! refutes compatibility. Inside the band nothing is proven: the check is
//! a necessary condition on a finite grid.
//!
//! For a compatible triple the Fréchet class is bracketed by `C_L ≤ C̃ ≤ C_U`,
//! built from liftings over the three index rotations `(1,2,3)`, `(1,3,2)`
//! and `(2,1,3)`, which improve on the classical closed-form bounds
//! `F_L`, `F_U`.

use alloc::vec::Vec;
use core::fmt;

use crate::copula2::CopulaSpec2;
use crate::copula3::{min_box_volume_tabulated, Box3};
pub use crate::copula3::Marginal;
use crate::error::{Error, Result};
use crate::family::FamilyPath;
use crate::grid::GridSpec;
use crate::product::{c_lift_with, c_product};
use crate::quadrature::QuadratureConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum CompatStatus {
    Refuted,
    NotRefuted,
}

/// A grid point where the tested marginal left its product band.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Witness {
    /// Which member of the triple was tested against the other two.
    pub tested: Marginal,
    /// Arguments of the tested marginal.
    pub point: [f64; 2],
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
}

impl Witness {
    /// Distance of `value` outside `[lower, upper]` (negative when inside).
    pub fn excess(&self) -> f64 {
        (self.lower - self.value).max(self.value - self.upper)
    }
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}({}, {}) = {} outside [{}, {}]",
            self.tested, self.point[0], self.point[1], self.value, self.lower, self.upper
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompatVerdict {
    pub status: CompatStatus,
    /// Worst violation; present exactly when refuted.
    pub witness: Option<Witness>,
    pub grid: GridSpec,
    pub tol: f64,
}

impl CompatVerdict {
    pub fn is_refuted(&self) -> bool {
        self.status == CompatStatus::Refuted
    }
}

fn constant_w() -> FamilyPath {
    FamilyPath::constant(CopulaSpec2::W)
}

fn constant_m() -> FamilyPath {
    FamilyPath::constant(CopulaSpec2::M)
}

fn any_indicator(specs: &[&CopulaSpec2]) -> bool {
    specs.iter().any(|c| c.has_indicator_partials())
}

/// `((C12 *_W C23)(u1,u3), (C12 *_M C23)(u1,u3))`.
pub fn product_bounds(
    c12: &CopulaSpec2,
    c23: &CopulaSpec2,
    u1: f64,
    u3: f64,
    quad: &QuadratureConfig,
) -> Result<(f64, f64)> {
    let lo = c_product(c12, c23, &constant_w(), u1, u3, quad)?;
    let hi = c_product(c12, c23, &constant_m(), u1, u3, quad)?;
    Ok((lo, hi))
}

/// Scans the grid for a point where `C13` leaves the product band of
/// `(C12, C23)`.
pub fn check_pair_compat(
    c12: &CopulaSpec2,
    c23: &CopulaSpec2,
    c13: &CopulaSpec2,
    grid: GridSpec,
    quad: &QuadratureConfig,
) -> Result<CompatVerdict> {
    let tol = quad.check_tol(any_indicator(&[c12, c23]));
    let witness = worst_band_violation(c12, c23, c13, Marginal::M13, grid, quad, tol)?;
    Ok(verdict(witness, grid, tol))
}

fn verdict(witness: Option<Witness>, grid: GridSpec, tol: f64) -> CompatVerdict {
    CompatVerdict {
        status: if witness.is_some() {
            CompatStatus::Refuted
        } else {
            CompatStatus::NotRefuted
        },
        witness,
        grid,
        tol,
    }
}

fn worst_band_violation(
    a: &CopulaSpec2,
    b: &CopulaSpec2,
    tested: &CopulaSpec2,
    label: Marginal,
    grid: GridSpec,
    quad: &QuadratureConfig,
    tol: f64,
) -> Result<Option<Witness>> {
    let mut worst: Option<Witness> = None;
    for [u, v] in grid.points2() {
        let value = tested.eval2(u, v);
        let (lower, upper) = product_bounds(a, b, u, v, quad)?;
        let w = Witness {
            tested: label,
            point: [u, v],
            value,
            lower,
            upper,
        };
        if w.excess() > tol && worst.map_or(true, |cur| w.excess() > cur.excess()) {
            worst = Some(w);
        }
    }
    Ok(worst)
}

/// Runs the band check for each member of the triple against the other two:
/// `C13` against `(C12, C23)`, `C12` against `(C13, C32)` and `C23` against
/// `(C21, C13)`, with `C_ji = C_ij^t`.
pub fn check_triple_compat(
    c12: &CopulaSpec2,
    c13: &CopulaSpec2,
    c23: &CopulaSpec2,
    grid: GridSpec,
    quad: &QuadratureConfig,
) -> Result<CompatVerdict> {
    let c21 = c12.transposed();
    let c32 = c23.transposed();
    let tol = quad.check_tol(any_indicator(&[c12, c13, c23]));
    let rotations = [
        (c12, c23, c13, Marginal::M13),
        (c13, &c32, c12, Marginal::M12),
        (&c21, c13, c23, Marginal::M23),
    ];
    let mut worst: Option<Witness> = None;
    for (a, b, tested, label) in rotations {
        if let Some(w) = worst_band_violation(a, b, tested, label, grid, quad, tol)? {
            if worst.map_or(true, |cur| w.excess() > cur.excess()) {
                worst = Some(w);
            }
        }
    }
    Ok(verdict(worst, grid, tol))
}

/// `((C12 ⋆_W C23)(u), (C12 ⋆_M C23)(u))`, the sharp bounds on the class of
/// 3-copulas with 12-marginal `C12` and 23-marginal `C23`.
pub fn lift_bounds(
    c12: &CopulaSpec2,
    c23: &CopulaSpec2,
    u: [f64; 3],
    quad: &QuadratureConfig,
) -> Result<(f64, f64)> {
    let [u1, u2, u3] = u;
    let lo = c_lift_with(c12, c23, &constant_w(), u1, u2, u3, quad)?;
    let hi = c_lift_with(c12, c23, &constant_m(), u1, u2, u3, quad)?;
    Ok((lo, hi))
}

/// Lower and upper bounds contributed by one rotation `(i, j, k)`.
fn rotation_bounds(
    c_ij: &CopulaSpec2,
    c_jk: &CopulaSpec2,
    c_ik: &CopulaSpec2,
    [ui, uj, uk]: [f64; 3],
    quad: &QuadratureConfig,
) -> Result<(f64, f64)> {
    let (w, m) = (constant_w(), constant_m());
    let lift_w = c_lift_with(c_ij, c_jk, &w, ui, uj, uk, quad)?;
    let lift_m = c_lift_with(c_ij, c_jk, &m, ui, uj, uk, quad)?;
    let prod_w = c_product(c_ij, c_jk, &w, ui, uk, quad)?;
    let prod_m = c_product(c_ij, c_jk, &m, ui, uk, quad)?;
    let marginal = c_ik.eval2(ui, uk);
    let lower = lift_w.max(lift_m + marginal - prod_m);
    let upper = lift_m.min(lift_w + marginal - prod_w);
    Ok((lower, upper))
}

/// `(C_L(u), C_U(u))` for the triple `(C12, C13, C23)`. No clamping is
/// applied, so for an incompatible triple `C_L` may exceed `C_U`.
pub fn cl_cu(
    c12: &CopulaSpec2,
    c13: &CopulaSpec2,
    c23: &CopulaSpec2,
    u: [f64; 3],
    quad: &QuadratureConfig,
) -> Result<(f64, f64)> {
    let [u1, u2, u3] = u;
    let c21 = c12.transposed();
    let c32 = c23.transposed();
    let rotations = [
        (c12, c23, c13, [u1, u2, u3]),
        (c13, &c32, c12, [u1, u3, u2]),
        (&c21, c13, c23, [u2, u1, u3]),
    ];
    let mut lower = f64::NEG_INFINITY;
    let mut upper = f64::INFINITY;
    for (c_ij, c_jk, c_ik, coords) in rotations {
        let (lo, hi) = rotation_bounds(c_ij, c_jk, c_ik, coords, quad)?;
        lower = lower.max(lo);
        upper = upper.min(hi);
    }
    Ok((lower, upper))
}

/// Closed-form bounds `(F_L(u), F_U(u))` built from the three marginals.
pub fn joe_bounds(c12: &CopulaSpec2, c13: &CopulaSpec2, c23: &CopulaSpec2, u: [f64; 3]) -> (f64, f64) {
    let [u1, u2, u3] = u;
    let a = c12.eval2(u1, u2);
    let b = c13.eval2(u1, u3);
    let c = c23.eval2(u2, u3);
    let upper = a.min(b).min(c).min(1.0 - u1 - u2 - u3 + a + b + c);
    let lower = 0.0f64.max(a + b - u1).max(a + c - u2).max(b + c - u3);
    (lower, upper)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundsRecord {
    pub u: [f64; 3],
    pub fl: f64,
    pub cl: f64,
    pub cu: f64,
    pub fu: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ViolationKind {
    /// `C_L < F_L`.
    LowerBelowClassical,
    /// `C_U > F_U`.
    UpperAboveClassical,
    /// `C_L > C_U`.
    Crossed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundsViolation {
    /// Index of the record in row-major grid order.
    pub index: usize,
    pub kind: ViolationKind,
    pub amount: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundsReport {
    pub records: Vec<BoundsRecord>,
    /// `max (C_L - F_L)` over the grid.
    pub max_gap_lower: f64,
    /// `max (F_U - C_U)` over the grid.
    pub max_gap_upper: f64,
    /// Sorted by grid index.
    pub violations: Vec<BoundsViolation>,
    pub tol: f64,
    /// Smallest grid-box volume of `C_L` and of `C_U`; negative values show
    /// that the bound is not itself a copula.
    pub min_volume_lower: f64,
    pub min_volume_upper: f64,
    pub grid: GridSpec,
}

/// Tabulates `F_L ≤ C_L` and `C_U ≤ F_U` over the grid for a triple that
/// survives [`check_triple_compat`] on the same number of points per axis.
pub fn improvement_report(
    c12: &CopulaSpec2,
    c13: &CopulaSpec2,
    c23: &CopulaSpec2,
    grid: GridSpec,
    quad: &QuadratureConfig,
) -> Result<BoundsReport> {
    let compat = check_triple_compat(c12, c13, c23, grid, quad)?;
    if let Some(w) = compat.witness {
        return Err(Error::Incompatible(w));
    }
    let tol = compat.tol;
    let mut records = Vec::with_capacity(grid.points_per_axis().pow(3));
    let mut violations = Vec::new();
    let (mut max_gap_lower, mut max_gap_upper) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for (index, u) in grid.points3().enumerate() {
        let (cl, cu) = cl_cu(c12, c13, c23, u, quad)?;
        let (fl, fu) = joe_bounds(c12, c13, c23, u);
        max_gap_lower = max_gap_lower.max(cl - fl);
        max_gap_upper = max_gap_upper.max(fu - cu);
        let checks = [
            (ViolationKind::LowerBelowClassical, fl - cl),
            (ViolationKind::UpperAboveClassical, cu - fu),
            (ViolationKind::Crossed, cl - cu),
        ];
        for (kind, amount) in checks {
            if amount > tol {
                violations.push(BoundsViolation { index, kind, amount });
            }
        }
        records.push(BoundsRecord { u, fl, cl, cu, fu });
    }
    let axis = grid.axis();
    let lows: Vec<f64> = records.iter().map(|r| r.cl).collect();
    let highs: Vec<f64> = records.iter().map(|r| r.cu).collect();
    let (min_volume_lower, _) = min_box_volume_tabulated(&lows, &axis);
    let (min_volume_upper, _): (f64, Option<Box3>) = min_box_volume_tabulated(&highs, &axis);
    Ok(BoundsReport {
        records,
        max_gap_lower,
        max_gap_upper,
        violations,
        tol,
        min_volume_lower,
        min_volume_upper,
        grid,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    #[test]
    fn example_upper_product_bound() {
        let c12 = CopulaSpec2::fgm(1.0).unwrap();
        let (_, hi) = product_bounds(&c12, &CopulaSpec2::Pi, 0.5, 0.5, &q()).unwrap();
        assert!((hi - 7.0 / 16.0).abs() < 1e-12);
    }

    #[test]
    fn comonotone_band_collapses() {
        for (u, v) in [(0.2, 0.9), (0.5, 0.5), (0.8, 0.1)] {
            let (lo, hi) = product_bounds(&CopulaSpec2::M, &CopulaSpec2::M, u, v, &q()).unwrap();
            assert!((lo - u.min(v)).abs() < 1e-12);
            assert!((hi - u.min(v)).abs() < 1e-12);
        }
        let (lo, hi) = product_bounds(&CopulaSpec2::W, &CopulaSpec2::W, 0.5, 0.5, &q()).unwrap();
        assert!((lo - 0.5).abs() < 1e-12 && (hi - 0.5).abs() < 1e-12);
    }

    #[test]
    fn pair_and_triple_verdicts() {
        let g = GridSpec::new(21).unwrap();
        let pi = CopulaSpec2::Pi;
        let v = check_pair_compat(&pi, &pi, &pi, g, &q()).unwrap();
        assert_eq!(v.status, CompatStatus::NotRefuted);
        assert!(v.witness.is_none());

        let w = CopulaSpec2::W;
        let v = check_pair_compat(&w, &w, &w, g, &q()).unwrap();
        assert!(v.is_refuted());
        let wit = v.witness.unwrap();
        assert!(wit.value < wit.lower - v.tol);

        let m = CopulaSpec2::M;
        let v = check_triple_compat(&m, &m, &m, g, &q()).unwrap();
        assert!(!v.is_refuted());
        assert!(check_triple_compat(&w, &w, &w, g, &q()).unwrap().is_refuted());
    }

    #[test]
    fn joe_bounds_examples() {
        let pi = CopulaSpec2::Pi;
        let (fl, fu) = joe_bounds(&pi, &pi, &pi, [0.5, 0.5, 0.5]);
        assert_eq!(fl, 0.0);
        assert_eq!(fu, 0.25);
        let fgm = CopulaSpec2::fgm(1.0).unwrap();
        for u in [[0.0, 0.3, 0.8], [0.0, 1.0, 1.0]] {
            assert_eq!(joe_bounds(&fgm, &pi, &pi, u), (0.0, 0.0));
        }
    }

    #[test]
    fn example_cl_cu_for_independence() {
        let pi = CopulaSpec2::Pi;
        let (cl, cu) = cl_cu(&pi, &pi, &pi, [0.5, 0.5, 0.5], &q()).unwrap();
        assert!(cl.abs() < 1e-12);
        assert!((cu - 0.25).abs() < 1e-12);
        let (cl, cu) = cl_cu(&pi, &pi, &pi, [1.0, 1.0, 0.37], &q()).unwrap();
        assert!((cl - 0.37).abs() < 1e-12 && (cu - 0.37).abs() < 1e-12);
        let m = CopulaSpec2::M;
        let (cl, cu) = cl_cu(&m, &m, &m, [0.3, 0.7, 0.5], &q()).unwrap();
        assert!((cl - 0.3).abs() < 1e-12 && (cu - 0.3).abs() < 1e-12);
    }

    #[test]
    fn lift_bounds_edges() {
        let pi = CopulaSpec2::Pi;
        let (_, hi) = lift_bounds(&pi, &pi, [0.5, 0.5, 0.5], &q()).unwrap();
        assert!((hi - 0.25).abs() < 1e-14);
        let fgm = CopulaSpec2::fgm(0.5).unwrap();
        let clay = CopulaSpec2::clayton(1.0).unwrap();
        assert_eq!(lift_bounds(&fgm, &clay, [0.4, 0.0, 0.7], &q()).unwrap(), (0.0, 0.0));
        let at_one = lift_bounds(&fgm, &clay, [0.4, 1.0, 0.7], &q()).unwrap();
        let band = product_bounds(&fgm, &clay, 0.4, 0.7, &q()).unwrap();
        assert!((at_one.0 - band.0).abs() < 1e-12 && (at_one.1 - band.1).abs() < 1e-12);
    }

    #[test]
    fn improvement_refuses_incompatible_triples() {
        let w = CopulaSpec2::W;
        let err = improvement_report(&w, &w, &w, GridSpec::new(5).unwrap(), &q()).unwrap_err();
        assert!(matches!(err, Error::Incompatible(_)));
    }

    #[test]
    fn witness_display_names_the_marginal() {
        let w = Witness {
            tested: Marginal::M13,
            point: [0.5, 0.5],
            value: 0.48,
            lower: 0.1,
            upper: 0.4375,
        };
        let s = alloc::format!("{w}");
        assert!(s.starts_with("C13(0.5, 0.5)"));
        assert!((w.excess() - 0.0425).abs() < 1e-15);
    }
}
