//! Composite Gauss–Legendre quadrature over caller-supplied breakpoints.
//!
//! The integrands of the C-product are piecewise smooth with jumps or creases
//! at known (or locatable) abscissae. Panels are laid out between
//! breakpoints so that no panel straddles one; accuracy is then checked by
//! doubling the panel count until two successive estimates agree.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Tolerance used whenever an integrand contains indicator partials.
pub const INDICATOR_TOL: f64 = 1e-6;

/// Number of panel doublings attempted before giving up.
pub const MAX_DOUBLINGS: usize = 6;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(default, deny_unknown_fields)
)]
pub struct QuadratureConfig {
    /// Gauss–Legendre nodes per panel.
    pub nodes: usize,
    /// Panels per smooth piece.
    pub panels: usize,
    /// Absolute tolerance for smooth integrands.
    pub tol: f64,
    /// Extra breakpoints in `(0,1)` added to every integration.
    pub kinks: Vec<f64>,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            nodes: 16,
            panels: 32,
            tol: 1e-8,
            kinks: Vec::new(),
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.nodes < 2 {
            return Err(Error::InvalidQuadrature(format!(
                "need at least 2 nodes per panel, got {}",
                self.nodes
            )));
        }
        if self.panels < 1 {
            return Err(Error::InvalidQuadrature("need at least 1 panel".into()));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidQuadrature(format!(
                "tolerance must be positive, got {}",
                self.tol
            )));
        }
        if self.kinks.iter().any(|k| !k.is_finite()) {
            return Err(Error::InvalidQuadrature("kinks must be finite".into()));
        }
        Ok(())
    }

    /// `tol`, relaxed to [`INDICATOR_TOL`] when step integrands are involved.
    pub fn effective_tol(&self, indicator: bool) -> f64 {
        if indicator {
            self.tol.max(INDICATOR_TOL)
        } else {
            self.tol
        }
    }

    /// Tolerance for grid comparisons of quadrature output: ten times the
    /// effective quadrature tolerance.
    pub fn check_tol(&self, indicator: bool) -> f64 {
        10.0 * self.effective_tol(indicator)
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        let nf = n as f64;
        for i in 0..n {
            let mut x = libm::cos(core::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5));
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let step = p / d;
                x -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            nodes.push(x);
            weights.push(2.0 / ((1.0 - x * x) * dp * dp));
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `∫_a^b f` with this rule on a single panel.
    pub fn panel(&self, f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }

    /// `∫_a^b f` with `panels` equal panels.
    pub fn composite(&self, f: &mut impl FnMut(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
        let h = (b - a) / panels as f64;
        (0..panels)
            .map(|k| {
                let lo = a + k as f64 * h;
                let hi = if k + 1 == panels { b } else { lo + h };
                self.panel(f, lo, hi)
            })
            .sum()
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Sorted, deduplicated breakpoints: `a`, `b` and every candidate strictly between them.
pub fn breakpoints(a: f64, b: f64, candidates: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let span = b - a;
    let eps = 1e-14 * span.abs().max(1.0);
    let mut pts: Vec<f64> = candidates
        .into_iter()
        .filter(|x| x.is_finite() && *x > a + eps && *x < b - eps)
        .collect();
    pts.push(a);
    pts.push(b);
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|x, y| (*x - *y).abs() <= eps);
    pts
}

/// Integrates `f` over `[pts[0], pts[last]]`, using `panels` panels on each
/// piece, doubling until successive estimates differ by at most `tol`.
pub fn integrate_pieces(
    rule: &GaussLegendre,
    f: &mut impl FnMut(f64) -> f64,
    pts: &[f64],
    panels: usize,
    tol: f64,
) -> Result<f64> {
    if pts.len() < 2 {
        return Ok(0.0);
    }
    let mut panels = panels;
    let mut coarse = estimate(rule, f, pts, panels);
    let mut change = f64::INFINITY;
    for _ in 0..MAX_DOUBLINGS {
        panels *= 2;
        let fine = estimate(rule, f, pts, panels);
        change = (fine - coarse).abs();
        if change <= tol {
            return Ok(fine);
        }
        coarse = fine;
    }
    Err(Error::Quadrature {
        lower: pts[0],
        upper: pts[pts.len() - 1],
        estimate: coarse,
        change,
        panels,
    })
}

fn estimate(
    rule: &GaussLegendre,
    f: &mut impl FnMut(f64) -> f64,
    pts: &[f64],
    panels: usize,
) -> f64 {
    pts.windows(2)
        .map(|w| rule.composite(f, w[0], w[1], panels))
        .sum()
}

/// Locates sign changes of the vector function `g` on `[a, b]`.
///
/// `g(t, out)` pushes a fixed number of signed values. Each component is
/// sampled at `samples + 1` equispaced points and every bracketed sign change
/// is refined by bisection.
pub fn locate_crossings(
    g: &mut impl FnMut(f64, &mut Vec<f64>),
    a: f64,
    b: f64,
    samples: usize,
    out: &mut Vec<f64>,
) {
    let mut cur = Vec::new();
    g(a, &mut cur);
    if cur.is_empty() {
        return;
    }
    // last nonzero sample of each component; exact zeros never open a bracket
    let mut last: Vec<Option<(f64, f64)>> = cur
        .iter()
        .map(|&v| (v != 0.0).then_some((a, v)))
        .collect();
    let mut probe = Vec::new();
    let h = (b - a) / samples as f64;
    for k in 1..=samples {
        let t = if k == samples { b } else { a + k as f64 * h };
        cur.clear();
        g(t, &mut cur);
        for (idx, &value) in cur.iter().enumerate() {
            if value == 0.0 {
                continue;
            }
            if let Some((t0, v0)) = last[idx] {
                if (v0 < 0.0) != (value < 0.0) {
                    out.push(bisect_component(g, idx, t0, v0, t, &mut probe));
                }
            }
            last[idx] = Some((t, value));
        }
    }
}

fn bisect_component(
    g: &mut impl FnMut(f64, &mut Vec<f64>),
    idx: usize,
    mut x0: f64,
    mut g0: f64,
    mut x1: f64,
    probe: &mut Vec<f64>,
) -> f64 {
    for _ in 0..64 {
        let mid = 0.5 * (x0 + x1);
        if mid <= x0 || mid >= x1 {
            break;
        }
        probe.clear();
        g(mid, probe);
        let gm = probe[idx];
        if gm == 0.0 {
            return mid;
        }
        if (gm < 0.0) == (g0 < 0.0) {
            x0 = mid;
            g0 = gm;
        } else {
            x1 = mid;
        }
    }
    0.5 * (x0 + x1)
}
