//! Bivariate copula families.
//!
//! A [`CopulaSpec2`] is a symbolic description of a 2-copula: a family tag
//! with parameters, plus the `Transpose` combinator. Evaluation is closed
//! form for every family, including the conditional distribution functions
//! `t ↦ ∂C(u,t)/∂t` and `t ↦ ∂C(t,v)/∂t` that drive the C-product.
//!
//! Partials of `M`, `W` and checkerboard copulas are step functions in `t`.
//! At a jump they take the left limit in `t`.

use alloc::boxed::Box;
use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::{clamp_unit, Rect2};

/// Anything that can be evaluated as a bivariate distribution function on `[0,1]²`.
pub trait Bivariate {
    fn cdf(&self, u: f64, v: f64) -> Result<f64>;
}

impl<T: Bivariate + ?Sized> Bivariate for &T {
    fn cdf(&self, u: f64, v: f64) -> Result<f64> {
        (**self).cdf(u, v)
    }
}

/// Symbolic bivariate copula.
///
/// The serialized form is internally tagged by `family`, e.g.
/// `{"family":"clayton","alpha":2.0}` or `{"family":"transpose","inner":{"family":"m"}}`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(try_from = "SpecRepr", into = "SpecRepr")
)]
pub enum CopulaSpec2 {
    /// Independence copula `uv`.
    Pi,
    /// Upper Fréchet–Hoeffding bound `min(u,v)`.
    M,
    /// Lower Fréchet–Hoeffding bound `max(u+v-1, 0)`.
    W,
    /// Farlie–Gumbel–Morgenstern, `uv + θ uv(1-u)(1-v)` with `θ ∈ [-1,1]`.
    Fgm { theta: f64 },
    /// Clayton, `(u^-α + v^-α - 1)^(-1/α)` with `α > 0`.
    Clayton { alpha: f64 },
    /// Piecewise bilinear copula spreading mass uniformly over grid cells.
    Checkerboard(Checkerboard),
    /// `C^t(u,v) = C(v,u)`.
    Transpose { inner: Box<CopulaSpec2> },
}

// same shape, but parameters are range-checked on the way in
#[cfg(feature = "serde")]
#[derive(serde::Serialize, serde::Deserialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
enum SpecRepr {
    Pi,
    M,
    W,
    Fgm { theta: f64 },
    Clayton { alpha: f64 },
    Checkerboard(Checkerboard),
    Transpose { inner: Box<CopulaSpec2> },
}

#[cfg(feature = "serde")]
impl TryFrom<SpecRepr> for CopulaSpec2 {
    type Error = Error;

    fn try_from(repr: SpecRepr) -> Result<Self> {
        let spec = match repr {
            SpecRepr::Pi => Self::Pi,
            SpecRepr::M => Self::M,
            SpecRepr::W => Self::W,
            SpecRepr::Fgm { theta } => Self::Fgm { theta },
            SpecRepr::Clayton { alpha } => Self::Clayton { alpha },
            SpecRepr::Checkerboard(cb) => Self::Checkerboard(cb),
            SpecRepr::Transpose { inner } => Self::Transpose { inner },
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[cfg(feature = "serde")]
impl From<CopulaSpec2> for SpecRepr {
    fn from(spec: CopulaSpec2) -> Self {
        match spec {
            CopulaSpec2::Pi => Self::Pi,
            CopulaSpec2::M => Self::M,
            CopulaSpec2::W => Self::W,
            CopulaSpec2::Fgm { theta } => Self::Fgm { theta },
            CopulaSpec2::Clayton { alpha } => Self::Clayton { alpha },
            CopulaSpec2::Checkerboard(cb) => Self::Checkerboard(cb),
            CopulaSpec2::Transpose { inner } => Self::Transpose { inner },
        }
    }
}

impl CopulaSpec2 {
    pub fn fgm(theta: f64) -> Result<Self> {
        let spec = Self::Fgm { theta };
        spec.validate()?;
        Ok(spec)
    }

    pub fn clayton(alpha: f64) -> Result<Self> {
        let spec = Self::Clayton { alpha };
        spec.validate()?;
        Ok(spec)
    }

    pub fn checkerboard(weights: Vec<Vec<f64>>) -> Result<Self> {
        Checkerboard::new(weights).map(Self::Checkerboard)
    }

    /// The transpose, built with the `Transpose` combinator. Transposing a
    /// transpose unwraps it.
    pub fn transposed(&self) -> Self {
        match self {
            Self::Transpose { inner } => (**inner).clone(),
            other => Self::Transpose {
                inner: Box::new(other.clone()),
            },
        }
    }

    /// Checks parameter ranges recursively.
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Pi | Self::M | Self::W => Ok(()),
            Self::Fgm { theta } => {
                if (-1.0..=1.0).contains(theta) {
                    Ok(())
                } else {
                    Err(Error::InvalidSpec(format!(
                        "fgm theta must lie in [-1, 1], got {theta}"
                    )))
                }
            }
            Self::Clayton { alpha } => {
                if *alpha > 0.0 && alpha.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidSpec(format!(
                        "clayton alpha must be positive and finite, got {alpha}"
                    )))
                }
            }
            Self::Checkerboard(cb) => Checkerboard::check(cb.size, &cb.mass),
            Self::Transpose { inner } => inner.validate(),
        }
    }

    /// `C(u,v)`. Arguments are clamped to `[0,1]`; groundedness and uniform
    /// margins hold exactly.
    pub fn eval2(&self, u: f64, v: f64) -> f64 {
        let (u, v) = (clamp_unit(u), clamp_unit(v));
        if u <= 0.0 || v <= 0.0 {
            0.0
        } else if u >= 1.0 {
            v
        } else if v >= 1.0 {
            u
        } else {
            self.eval_interior(u, v)
        }
    }

    fn eval_interior(&self, u: f64, v: f64) -> f64 {
        match self {
            Self::Pi => u * v,
            Self::M => u.min(v),
            Self::W => (u + v - 1.0).max(0.0),
            Self::Fgm { theta } => u * v * (1.0 + theta * (1.0 - u) * (1.0 - v)),
            Self::Clayton { alpha } => {
                // factor out the smaller argument so nothing overflows
                let (s, l) = if u <= v { (u, v) } else { (v, u) };
                let inner = 1.0 + libm::pow(s / l, *alpha) - libm::pow(s, *alpha);
                s * libm::pow(inner, -1.0 / alpha)
            }
            Self::Checkerboard(cb) => cb.cdf(u, v),
            Self::Transpose { inner } => inner.eval_interior(v, u),
        }
    }

    /// `∂C(u,t)/∂t`, the conditional distribution function of the first
    /// coordinate given that the second equals `t`.
    pub fn partial_u2(&self, u: f64, t: f64) -> f64 {
        let (u, t) = (clamp_unit(u), clamp_unit(t));
        match self {
            Self::Pi => u,
            Self::M => {
                if t <= u {
                    1.0
                } else {
                    0.0
                }
            }
            Self::W => {
                if t > 1.0 - u {
                    1.0
                } else {
                    0.0
                }
            }
            Self::Fgm { theta } => u + theta * u * (1.0 - u) * (1.0 - 2.0 * t),
            Self::Clayton { alpha } => clayton_conditional(*alpha, u, t),
            Self::Checkerboard(cb) => cb.partial_second(u, t),
            Self::Transpose { inner } => inner.partial_u1(t, u),
        }
    }

    /// `∂C(t,v)/∂t`, the conditional distribution function of the second
    /// coordinate given that the first equals `t`.
    pub fn partial_u1(&self, t: f64, v: f64) -> f64 {
        let (t, v) = (clamp_unit(t), clamp_unit(v));
        match self {
            Self::Pi => v,
            Self::M => {
                if t <= v {
                    1.0
                } else {
                    0.0
                }
            }
            Self::W => {
                if t > 1.0 - v {
                    1.0
                } else {
                    0.0
                }
            }
            Self::Fgm { theta } => v + theta * v * (1.0 - v) * (1.0 - 2.0 * t),
            Self::Clayton { alpha } => clayton_conditional(*alpha, v, t),
            Self::Checkerboard(cb) => cb.partial_first(t, v),
            Self::Transpose { inner } => inner.partial_u2(v, t),
        }
    }

    /// Central finite-difference approximation of [`partial_u2`](Self::partial_u2)
    /// with step `1e-6`, one-sided near the boundary.
    pub fn partial_u2_fd(&self, u: f64, t: f64) -> f64 {
        finite_difference(|s| self.eval2(u, s), t)
    }

    /// Finite-difference counterpart of [`partial_u1`](Self::partial_u1).
    pub fn partial_u1_fd(&self, t: f64, v: f64) -> f64 {
        finite_difference(|s| self.eval2(s, v), t)
    }

    /// True when the conditional partials are step functions in `t`.
    pub fn has_indicator_partials(&self) -> bool {
        match self {
            Self::M | Self::W | Self::Checkerboard(_) => true,
            Self::Pi | Self::Fgm { .. } | Self::Clayton { .. } => false,
            Self::Transpose { inner } => inner.has_indicator_partials(),
        }
    }

    /// Abscissae in `(0,1)` where `t ↦ partial_u2(x, t)` (equivalently
    /// `t ↦ partial_u1(t, x)`) jumps or bends sharply.
    pub fn t_kinks(&self, x: f64, out: &mut Vec<f64>) {
        let x = clamp_unit(x);
        match self {
            Self::Pi | Self::Fgm { .. } => {}
            Self::M | Self::Clayton { .. } => out.push(x),
            Self::W => out.push(1.0 - x),
            Self::Checkerboard(cb) => {
                let d = cb.size as f64;
                out.extend((1..cb.size).map(|k| k as f64 / d));
            }
            Self::Transpose { inner } => inner.t_kinks(x, out),
        }
    }

    /// Signed functions of `(p, q)` whose zero sets are where `C` fails to be
    /// smooth in the interior of the square.
    pub fn creases(&self, p: f64, q: f64, out: &mut Vec<f64>) {
        match self {
            Self::Pi | Self::Fgm { .. } | Self::Clayton { .. } => {}
            Self::M => out.push(p - q),
            Self::W => out.push(p + q - 1.0),
            Self::Checkerboard(cb) => {
                let d = cb.size as f64;
                for k in 1..cb.size {
                    let level = k as f64 / d;
                    out.push(p - level);
                    out.push(q - level);
                }
            }
            Self::Transpose { inner } => inner.creases(q, p, out),
        }
    }

    /// True when `C(p,q) = C(q,p)` for all arguments.
    pub fn is_symmetric(&self) -> bool {
        match self {
            Self::Pi | Self::M | Self::W | Self::Fgm { .. } | Self::Clayton { .. } => true,
            Self::Checkerboard(cb) => cb.is_symmetric(),
            Self::Transpose { inner } => inner.is_symmetric(),
        }
    }
}

impl Bivariate for CopulaSpec2 {
    fn cdf(&self, u: f64, v: f64) -> Result<f64> {
        Ok(self.eval2(u, v))
    }
}

/// `∂C(u,t)/∂t` for Clayton, written as `(1 + (t/u)^α - t^α)^(-(1+α)/α)`.
fn clayton_conditional(alpha: f64, u: f64, t: f64) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    if u >= 1.0 || t <= 0.0 {
        return 1.0;
    }
    let base = 1.0 + libm::pow(t / u, alpha) - libm::pow(t, alpha);
    libm::pow(base, -(1.0 + alpha) / alpha)
}

const FD_STEP: f64 = 1e-6;

fn finite_difference(f: impl Fn(f64) -> f64, t: f64) -> f64 {
    let t = clamp_unit(t);
    if t < FD_STEP {
        (f(t + FD_STEP) - f(t)) / FD_STEP
    } else if t > 1.0 - FD_STEP {
        (f(t) - f(t - FD_STEP)) / FD_STEP
    } else {
        (f(t + FD_STEP) - f(t - FD_STEP)) / (2.0 * FD_STEP)
    }
}

/// Rectangle volume `C(b1,b2) - C(a1,b2) - C(b1,a2) + C(a1,a2)`.
pub fn volume2<C: Bivariate + ?Sized>(c: &C, r: Rect2) -> Result<f64> {
    let [a1, a2] = r.lower;
    let [b1, b2] = r.upper;
    Ok(c.cdf(b1, b2)? - c.cdf(a1, b2)? - c.cdf(b1, a2)? + c.cdf(a1, a2)?)
}

const WEIGHT_TOL: f64 = 1e-9;

/// Checkerboard copula on a `d × d` partition of the unit square.
///
/// Cell `(i, j)` covers `[i/d, (i+1)/d] × [j/d, (j+1)/d]` and carries mass
/// `weights[i][j]`, spread uniformly. Every row and column of the weight
/// matrix must sum to `1/d`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(try_from = "CheckerboardRepr", into = "CheckerboardRepr")
)]
pub struct Checkerboard {
    size: usize,
    /// row-major cell masses
    mass: Vec<f64>,
}

#[cfg(feature = "serde")]
#[derive(serde::Serialize, serde::Deserialize)]
struct CheckerboardRepr {
    weights: Vec<Vec<f64>>,
}

#[cfg(feature = "serde")]
impl TryFrom<CheckerboardRepr> for Checkerboard {
    type Error = Error;

    fn try_from(repr: CheckerboardRepr) -> Result<Self> {
        Self::new(repr.weights)
    }
}

#[cfg(feature = "serde")]
impl From<Checkerboard> for CheckerboardRepr {
    fn from(cb: Checkerboard) -> Self {
        Self {
            weights: cb.weights(),
        }
    }
}

impl Checkerboard {
    pub fn new(weights: Vec<Vec<f64>>) -> Result<Self> {
        let size = weights.len();
        if weights.iter().any(|row| row.len() != size) {
            return Err(Error::InvalidSpec(format!(
                "checkerboard weights must be a square matrix ({size} rows)"
            )));
        }
        let mass: Vec<f64> = weights.into_iter().flatten().collect();
        Self::check(size, &mass)?;
        Ok(Self { size, mass })
    }

    /// The `d × d` checkerboard approximation of `c`: cell masses are the
    /// `c`-volumes of the cells.
    pub fn approximating(c: &CopulaSpec2, size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidSpec("checkerboard size must be positive".into()));
        }
        let d = size as f64;
        let mut mass = Vec::with_capacity(size * size);
        for i in 0..size {
            for j in 0..size {
                let r = Rect2::new(
                    [i as f64 / d, j as f64 / d],
                    [(i + 1) as f64 / d, (j + 1) as f64 / d],
                )?;
                mass.push(volume2(c, r)?.max(0.0));
            }
        }
        // re-balance rounding so margins stay exactly admissible
        let total: f64 = mass.iter().sum();
        mass.iter_mut().for_each(|m| *m /= total);
        Self::check(size, &mass)?;
        Ok(Self { size, mass })
    }

    fn check(size: usize, mass: &[f64]) -> Result<()> {
        if size == 0 || mass.len() != size * size {
            return Err(Error::InvalidSpec("checkerboard needs a non-empty square matrix".into()));
        }
        if mass.iter().any(|m| !m.is_finite() || *m < 0.0) {
            return Err(Error::InvalidSpec(
                "checkerboard weights must be finite and nonnegative".into(),
            ));
        }
        let target = 1.0 / size as f64;
        for k in 0..size {
            let row: f64 = mass[k * size..(k + 1) * size].iter().sum();
            let col: f64 = (0..size).map(|i| mass[i * size + k]).sum();
            if (row - target).abs() > WEIGHT_TOL || (col - target).abs() > WEIGHT_TOL {
                return Err(Error::InvalidSpec(format!(
                    "checkerboard row/column {k} sums to ({row}, {col}), expected {target}"
                )));
            }
        }
        Ok(())
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn weights(&self) -> Vec<Vec<f64>> {
        self.mass.chunks(self.size).map(|r| r.to_vec()).collect()
    }

    fn is_symmetric(&self) -> bool {
        let d = self.size;
        (0..d).all(|i| (0..d).all(|j| self.mass[i * d + j] == self.mass[j * d + i]))
    }

    /// Fraction of cell `k` lying below `x`.
    fn fill(&self, x: f64, k: usize) -> f64 {
        (self.size as f64 * x - k as f64).clamp(0.0, 1.0)
    }

    /// Cell index containing `t`, taking the left cell at interior grid lines.
    fn cell_left(&self, t: f64) -> usize {
        if t <= 0.0 {
            0
        } else {
            let c = libm::ceil(t * self.size as f64) as usize;
            c.saturating_sub(1).min(self.size - 1)
        }
    }

    fn cdf(&self, u: f64, v: f64) -> f64 {
        let d = self.size;
        let mut total = 0.0;
        for i in 0..d {
            let fu = self.fill(u, i);
            if fu == 0.0 {
                break;
            }
            let row: f64 = (0..d)
                .map(|j| self.mass[i * d + j] * self.fill(v, j))
                .sum();
            total += fu * row;
        }
        total
    }

    fn partial_second(&self, u: f64, t: f64) -> f64 {
        let d = self.size;
        let j = self.cell_left(t);
        let s: f64 = (0..d).map(|i| self.mass[i * d + j] * self.fill(u, i)).sum();
        (d as f64 * s).clamp(0.0, 1.0)
    }

    fn partial_first(&self, t: f64, v: f64) -> f64 {
        let d = self.size;
        let i = self.cell_left(t);
        let s: f64 = (0..d).map(|j| self.mass[i * d + j] * self.fill(v, j)).sum();
        (d as f64 * s).clamp(0.0, 1.0)
    }
}
