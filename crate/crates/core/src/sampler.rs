//! Sampling from C-liftings by the conditional-distribution method, and
//! empirical copulas for checking the samples against analytic values.
//!
//! A draw from `A ⋆_fam B` takes `u2 = t` uniform, a pair `(p, q)` from
//! `C_t`, and inverts the conditional distribution functions of `A` and `B`
//! at `t`. Draws are generated in fixed-size chunks, each from its own
//! generator stream, so any chunk can be produced independently and the
//! merged batch does not depend on how chunks are scheduled.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::copula2::CopulaSpec2;
use crate::copula3::Trivariate;
use crate::error::Result;
use crate::grid::{clamp_unit, GridSpec};
use crate::product::LiftedCopula3;

/// Absolute tolerance of the bisection fallback.
pub const BISECT_TOL: f64 = 1e-10;

/// Draws per generator stream.
pub const CHUNK_LEN: usize = 1024;

/// Smallest `u` with `∂A(u,t)/∂t ≥ p`.
///
/// Step conditionals (`M`, `W`) return the infimum of the superlevel set;
/// for `W` that infimum `1 - t` is itself not in the set.
pub fn inverse_conditional(a: &CopulaSpec2, t: f64, p: f64) -> f64 {
    let (t, p) = (clamp_unit(t), clamp_unit(p));
    if p <= 0.0 {
        return 0.0;
    }
    match a {
        CopulaSpec2::Pi => p,
        CopulaSpec2::M => t,
        CopulaSpec2::W => 1.0 - t,
        CopulaSpec2::Fgm { theta } => {
            // b u² − (1 + b) u + p = 0, root in [0,1]
            let b = theta * (1.0 - 2.0 * t);
            let disc = ((1.0 + b) * (1.0 + b) - 4.0 * b * p).max(0.0);
            clamp_unit(2.0 * p / ((1.0 + b) + libm::sqrt(disc)))
        }
        CopulaSpec2::Clayton { alpha } => {
            if t <= 0.0 {
                return 0.0;
            }
            let s = libm::pow(p, -alpha / (1.0 + alpha)) - 1.0 + libm::pow(t, *alpha);
            clamp_unit(t * libm::pow(s, -1.0 / alpha))
        }
        CopulaSpec2::Transpose { inner } => inverse_conditional_first(inner, t, p),
        CopulaSpec2::Checkerboard(_) => inverse_conditional_bisect(a, t, p),
    }
}

/// [`inverse_conditional`] by bisection only.
pub fn inverse_conditional_bisect(a: &CopulaSpec2, t: f64, p: f64) -> f64 {
    bisect_superlevel(|u| a.partial_u2(u, t), clamp_unit(p))
}

/// Smallest `v` with `∂B(t,v)/∂t ≥ q`.
pub fn inverse_conditional_first(b: &CopulaSpec2, t: f64, q: f64) -> f64 {
    match b {
        CopulaSpec2::Transpose { inner } => inverse_conditional(inner, t, q),
        CopulaSpec2::Checkerboard(_) => bisect_superlevel(|v| b.partial_u1(t, v), clamp_unit(q)),
        // the remaining families are exchangeable
        _ => inverse_conditional(b, t, q),
    }
}

fn bisect_superlevel(f: impl Fn(f64) -> f64, p: f64) -> f64 {
    if p <= 0.0 {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    while hi - lo > BISECT_TOL {
        let mid = 0.5 * (lo + hi);
        if f(mid) >= p {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// One pair `(p, q)` with joint distribution `c`.
pub fn sample_family_pair<R: Rng + ?Sized>(c: &CopulaSpec2, rng: &mut R) -> (f64, f64) {
    let p: f64 = rng.gen();
    let w: f64 = rng.gen();
    let q = match c {
        CopulaSpec2::Pi => w,
        CopulaSpec2::M => p,
        CopulaSpec2::W => 1.0 - p,
        _ => inverse_conditional_first(c, p, w),
    };
    (p, q)
}

/// Draws from a lifting, in index order.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    pub points: Vec<[f64; 3]>,
    pub seed: u64,
    pub lift: LiftedCopula3,
}

impl SampleBatch {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn empirical(&self) -> EmpiricalCopula3 {
        EmpiricalCopula3::new(&self.points)
    }
}

fn draw(l: &LiftedCopula3, rng: &mut ChaCha8Rng) -> [f64; 3] {
    let t: f64 = rng.gen();
    let (p, q) = sample_family_pair(l.fam.at(t), rng);
    [
        inverse_conditional(&l.a, t, p),
        t,
        inverse_conditional_first(&l.b, t, q),
    ]
}

/// Number of chunks needed for `n` draws.
pub fn chunk_count(n: usize) -> usize {
    n.div_ceil(CHUNK_LEN)
}

/// Draws `index * CHUNK_LEN ..` up to `n` of the batch for `seed`.
pub fn sample_chunk(l: &LiftedCopula3, n: usize, seed: u64, index: usize) -> Vec<[f64; 3]> {
    let start = (index * CHUNK_LEN).min(n);
    let end = (start + CHUNK_LEN).min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    (start..end).map(|_| draw(l, &mut rng)).collect()
}

/// `n` draws from `l`, reproducible from `seed`.
pub fn sample_lift(l: &LiftedCopula3, n: usize, seed: u64) -> Result<SampleBatch> {
    l.validate()?;
    let mut points = Vec::with_capacity(n);
    for index in 0..chunk_count(n) {
        points.extend(sample_chunk(l, n, seed, index));
    }
    Ok(SampleBatch {
        points,
        seed,
        lift: l.clone(),
    })
}

/// Rank-based empirical copula of a sample in `[0,1]³`:
/// `C_n(u) = #{i : R_ik ≤ ⌊n u_k⌋ for k = 1,2,3} / n`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCopula3 {
    sorted: [Vec<f64>; 3],
    ranks: Vec<[u32; 3]>,
}

impl EmpiricalCopula3 {
    pub fn new(points: &[[f64; 3]]) -> Self {
        let n = points.len();
        let mut ranks = alloc::vec![[0u32; 3]; n];
        let mut sorted: [Vec<f64>; 3] = Default::default();
        for k in 0..3 {
            let mut order: Vec<usize> = (0..n).collect();
            // ties broken by index so ranks are a permutation
            order.sort_by(|&i, &j| points[i][k].total_cmp(&points[j][k]).then(i.cmp(&j)));
            for (r, &i) in order.iter().enumerate() {
                ranks[i][k] = r as u32 + 1;
            }
            sorted[k] = order.iter().map(|&i| points[i][k]).collect();
        }
        Self { sorted, ranks }
    }

    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }

    /// Sorted sample of coordinate `k` (0-based).
    pub fn sorted(&self, k: usize) -> &[f64] {
        &self.sorted[k]
    }

    pub fn eval(&self, u: [f64; 3]) -> f64 {
        let n = self.len();
        if n == 0 {
            return 0.0;
        }
        let cut = u.map(|x| libm::floor(n as f64 * clamp_unit(x)) as u32);
        let hits = self
            .ranks
            .iter()
            .filter(|r| r[0] <= cut[0] && r[1] <= cut[1] && r[2] <= cut[2])
            .count();
        hits as f64 / n as f64
    }
}

impl Trivariate for EmpiricalCopula3 {
    fn cdf3(&self, u: [f64; 3]) -> Result<f64> {
        Ok(self.eval(u))
    }
}

/// Largest deviation between two trivariate functions over a grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupDistance {
    pub sup: f64,
    pub at: [f64; 3],
    pub points_checked: usize,
}

/// `max |empirical − analytic|` over the grid.
pub fn empirical_vs_analytic<A, E>(analytic: &A, empirical: &E, grid: GridSpec) -> Result<SupDistance>
where
    A: Trivariate + ?Sized,
    E: Trivariate + ?Sized,
{
    let mut out = SupDistance {
        sup: 0.0,
        at: [0.0; 3],
        points_checked: 0,
    };
    for u in grid.points3() {
        let d = (empirical.cdf3(u)? - analytic.cdf3(u)?).abs();
        out.points_checked += 1;
        if d > out.sup {
            out.sup = d;
            out.at = u;
        }
    }
    Ok(out)
}

/// Kolmogorov distance between the empirical df of `sorted` (ascending) and
/// the uniform df on `[0,1]`.
pub fn ks_uniform(sorted: &[f64]) -> f64 {
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let x = clamp_unit(x);
            ((i + 1) as f64 / n - x).max(x - i as f64 / n)
        })
        .fold(0.0, f64::max)
}
