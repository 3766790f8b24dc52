//! The C-product and the C-lifting.
//!
//! For bivariate copulas `A`, `B` and a family `{C_t}`:
//!
//! ```text
//! (A *_C B)(u1, u3)     = ∫_0^1  C_t(∂_t A(u1, t), ∂_t B(t, u3)) dt
//! (A ⋆_C B)(u1, u2, u3) = ∫_0^u2 C_t(∂_t A(u1, t), ∂_t B(t, u3)) dt
//! ```
//!
//! The lifting is a 3-copula with marginals `A`, `A *_C B` and `B`.
//!
//! Integration splits `[0, u2]` at the family breakpoints, at the jumps of
//! the two conditional distribution functions, and at the creases of each
//! family piece (e.g. where `∂_t A = ∂_t B` for a piece equal to `M`), which
//! are located numerically per call.

use alloc::vec::Vec;

use crate::copula2::CopulaSpec2;
use crate::copula3::{Marginal, MarginalView, Trivariate};
use crate::error::{Error, Result};
use crate::family::FamilyPath;
use crate::grid::{clamp_unit, GridSpec};
use crate::order::{concordance_leq2, concordance_leq3, OrderReport};
use crate::quadrature::{breakpoints, integrate_pieces, locate_crossings, GaussLegendre, QuadratureConfig};

/// Samples per piece used to bracket creases of the family copula.
const CREASE_SAMPLES: usize = 64;

/// `(A *_fam B)(u1, u3)`.
pub fn c_product(
    a: &CopulaSpec2,
    b: &CopulaSpec2,
    fam: &FamilyPath,
    u1: f64,
    u3: f64,
    quad: &QuadratureConfig,
) -> Result<f64> {
    mixture_integral(a, b, fam, u1, u3, 1.0, quad)
}

/// `(A ⋆_fam B)(u1, u2, u3)`.
pub fn c_lift(l: &LiftedCopula3, u1: f64, u2: f64, u3: f64) -> Result<f64> {
    mixture_integral(&l.a, &l.b, &l.fam, u1, u3, u2, &l.quad)
}

/// [`c_lift`] from borrowed parts.
pub fn c_lift_with(
    a: &CopulaSpec2,
    b: &CopulaSpec2,
    fam: &FamilyPath,
    u1: f64,
    u2: f64,
    u3: f64,
    quad: &QuadratureConfig,
) -> Result<f64> {
    mixture_integral(a, b, fam, u1, u3, u2, quad)
}

/// The integrand `t ↦ C_t(∂_t A(u1,t), ∂_t B(t,u3))`.
pub fn integrand(a: &CopulaSpec2, b: &CopulaSpec2, fam: &FamilyPath, u1: f64, u3: f64, t: f64) -> f64 {
    fam.at(t).eval2(a.partial_u2(u1, t), b.partial_u1(t, u3))
}

fn mixture_integral(
    a: &CopulaSpec2,
    b: &CopulaSpec2,
    fam: &FamilyPath,
    u1: f64,
    u3: f64,
    upper: f64,
    quad: &QuadratureConfig,
) -> Result<f64> {
    quad.validate()?;
    let (u1, u3, upper) = (clamp_unit(u1), clamp_unit(u3), clamp_unit(upper));
    if u1 <= 0.0 || u3 <= 0.0 || upper <= 0.0 {
        return Ok(0.0);
    }

    let mut hard = Vec::new();
    hard.extend_from_slice(fam.interior_breakpoints());
    a.t_kinks(u1, &mut hard);
    b.t_kinks(u3, &mut hard);
    hard.extend_from_slice(&quad.kinks);
    let hard = breakpoints(0.0, upper, hard);

    // creases of the family copula along the path (a(t), b(t))
    let mut all = hard.clone();
    let mut values = Vec::new();
    for w in hard.windows(2) {
        let piece = fam.at(0.5 * (w[0] + w[1]));
        values.clear();
        piece.creases(0.5, 0.5, &mut values);
        if values.is_empty() {
            continue;
        }
        // endpoints are evaluated slightly inside so one-sided limits are used
        let span = w[1] - w[0];
        let (lo, hi) = (w[0] + 1e-12 * span, w[1] - 1e-12 * span);
        let mut g = |t: f64, out: &mut Vec<f64>| piece.creases(a.partial_u2(u1, t), b.partial_u1(t, u3), out);
        locate_crossings(&mut g, lo, hi, CREASE_SAMPLES, &mut all);
    }
    let pts = breakpoints(0.0, upper, all);

    let rule = GaussLegendre::new(quad.nodes);
    let tol = quad.effective_tol(a.has_indicator_partials() || b.has_indicator_partials());
    let mut f = |t: f64| integrand(a, b, fam, u1, u3, t);
    let value = integrate_pieces(&rule, &mut f, &pts, quad.panels, tol)?;
    Ok(value.clamp(0.0, 1.0))
}

/// The trivariate copula `A ⋆_fam B`, evaluated by quadrature.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LiftedCopula3 {
    pub a: CopulaSpec2,
    pub b: CopulaSpec2,
    pub fam: FamilyPath,
    #[cfg_attr(feature = "serde", serde(default))]
    pub quad: QuadratureConfig,
}

impl LiftedCopula3 {
    pub fn new(a: CopulaSpec2, b: CopulaSpec2, fam: FamilyPath, quad: QuadratureConfig) -> Result<Self> {
        let lift = Self { a, b, fam, quad };
        lift.validate()?;
        Ok(lift)
    }

    /// Lifting with a constant family and default quadrature.
    pub fn constant(a: CopulaSpec2, b: CopulaSpec2, c: CopulaSpec2) -> Result<Self> {
        Self::new(a, b, FamilyPath::constant(c), QuadratureConfig::default())
    }

    pub fn validate(&self) -> Result<()> {
        self.a.validate()?;
        self.b.validate()?;
        for p in self.fam.pieces() {
            p.validate()?;
        }
        self.quad.validate()
    }

    pub fn eval(&self, u1: f64, u2: f64, u3: f64) -> Result<f64> {
        c_lift(self, u1, u2, u3)
    }

    /// `(A *_fam B)(u1, u3)`, the 13-marginal.
    pub fn product(&self, u1: f64, u3: f64) -> Result<f64> {
        c_product(&self.a, &self.b, &self.fam, u1, u3, &self.quad)
    }

    pub fn has_indicator_partials(&self) -> bool {
        self.a.has_indicator_partials() || self.b.has_indicator_partials()
    }

    /// Tolerance for grid comparisons involving this lifting.
    pub fn check_tol(&self) -> f64 {
        self.quad.check_tol(self.has_indicator_partials())
    }
}

impl Trivariate for LiftedCopula3 {
    fn cdf3(&self, u: [f64; 3]) -> Result<f64> {
        c_lift(self, u[0], u[1], u[2])
    }
}

/// The 12-, 13- and 23-marginals of a lifting, each evaluated through the
/// trivariate quadrature.
pub fn marginals_of_lift(
    l: &LiftedCopula3,
) -> [MarginalView<&LiftedCopula3>; 3] {
    [Marginal::M12, Marginal::M13, Marginal::M23].map(|which| MarginalView { inner: l, which })
}

/// Outcome of comparing two liftings that differ only in their family.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftComparison {
    /// Whether `C_t ⪯ C'_t` held on the grid for every `t`.
    pub families_ordered: bool,
    /// First interval of `t` on which the families were found out of order.
    pub family_witness: Option<(f64, f64, OrderReport)>,
    /// Trivariate concordance scan of the two liftings.
    pub lift_order: OrderReport,
}

impl LiftComparison {
    pub fn holds(&self) -> bool {
        self.families_ordered && self.lift_order.holds()
    }
}

/// Checks `L ⪯ L'` in the trivariate concordance order on `grid`, after
/// verifying that the families are ordered piece by piece.
pub fn lift_concordance_compare(
    lower: &LiftedCopula3,
    upper: &LiftedCopula3,
    grid: GridSpec,
) -> Result<LiftComparison> {
    if lower.a != upper.a || lower.b != upper.b {
        return Err(Error::InvalidSpec(
            "liftings must share the same A and B to be compared".into(),
        ));
    }
    let mut families_ordered = true;
    let mut family_witness = None;
    let grid2 = GridSpec::new(grid.points_per_axis().max(21))?;
    for (t0, t1, c, c_prime) in lower.fam.overlay(&upper.fam) {
        let r = concordance_leq2(c, c_prime, grid2, 1e-12)?;
        if !r.holds() {
            families_ordered = false;
            family_witness = Some((t0, t1, r));
            break;
        }
    }
    let tol = lower.check_tol().max(upper.check_tol());
    let lift_order = concordance_leq3(lower, upper, grid, tol)?;
    Ok(LiftComparison {
        families_ordered,
        family_witness,
        lift_order,
    })
}
