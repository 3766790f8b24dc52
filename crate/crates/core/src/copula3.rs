//! Trivariate evaluation: box volumes, the survival transform and argument
//! permutations.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::clamp_unit;

/// Anything that can be evaluated as a trivariate distribution function on `[0,1]³`.
pub trait Trivariate {
    fn cdf3(&self, u: [f64; 3]) -> Result<f64>;
}

impl<T: Trivariate + ?Sized> Trivariate for &T {
    fn cdf3(&self, u: [f64; 3]) -> Result<f64> {
        (**self).cdf3(u)
    }
}

/// Independence copula `u1 u2 u3`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Pi3;

impl Trivariate for Pi3 {
    fn cdf3(&self, u: [f64; 3]) -> Result<f64> {
        Ok(u.iter().map(|&x| clamp_unit(x)).product())
    }
}

/// Comonotone copula `min(u1, u2, u3)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct M3;

impl Trivariate for M3 {
    fn cdf3(&self, u: [f64; 3]) -> Result<f64> {
        Ok(u.iter().map(|&x| clamp_unit(x)).fold(1.0, f64::min))
    }
}

/// A permutation `σ` of `(1,2,3)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Perm3([usize; 3]);

impl Perm3 {
    pub const IDENTITY: Perm3 = Perm3([0, 1, 2]);

    /// Builds `σ` from one-based images, e.g. `[1, 3, 2]`.
    pub fn new(sigma: [usize; 3]) -> Result<Self> {
        let mut seen = [false; 3];
        for &s in &sigma {
            if !(1..=3).contains(&s) || seen[s - 1] {
                return Err(Error::InvalidPermutation(sigma));
            }
            seen[s - 1] = true;
        }
        Ok(Self(sigma.map(|s| s - 1)))
    }

    /// One-based images.
    pub fn images(&self) -> [usize; 3] {
        self.0.map(|s| s + 1)
    }

    /// `(u_{σ1}, u_{σ2}, u_{σ3})`.
    pub fn apply(&self, u: [f64; 3]) -> [f64; 3] {
        [u[self.0[0]], u[self.0[1]], u[self.0[2]]]
    }

    pub fn inverse(&self) -> Self {
        let mut inv = [0; 3];
        for (i, &s) in self.0.iter().enumerate() {
            inv[s] = i;
        }
        Self(inv)
    }
}

/// `D^σ(u1,u2,u3) = D(u_{σ1}, u_{σ2}, u_{σ3})`.
#[derive(Debug, Clone)]
pub struct Permuted<D> {
    pub inner: D,
    pub sigma: Perm3,
}

impl<D: Trivariate> Trivariate for Permuted<D> {
    fn cdf3(&self, u: [f64; 3]) -> Result<f64> {
        self.inner.cdf3(self.sigma.apply(u))
    }
}

pub fn permute3<D: Trivariate>(inner: D, sigma: Perm3) -> Permuted<D> {
    Permuted { inner, sigma }
}

/// One of the three bivariate marginals of a trivariate copula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Marginal {
    #[cfg_attr(feature = "serde", serde(rename = "12"))]
    M12,
    #[cfg_attr(feature = "serde", serde(rename = "13"))]
    M13,
    #[cfg_attr(feature = "serde", serde(rename = "23"))]
    M23,
}

impl Marginal {
    /// Places `(u, v)` into the cube with the remaining coordinate at 1.
    pub fn embed(self, u: f64, v: f64) -> [f64; 3] {
        match self {
            Marginal::M12 => [u, v, 1.0],
            Marginal::M13 => [u, 1.0, v],
            Marginal::M23 => [1.0, u, v],
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Marginal::M12 => "12",
            Marginal::M13 => "13",
            Marginal::M23 => "23",
        }
    }
}

impl core::fmt::Display for Marginal {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "C{}", self.label())
    }
}

/// Bivariate marginal of a trivariate distribution function.
#[derive(Debug, Clone, Copy)]
pub struct MarginalView<D> {
    pub inner: D,
    pub which: Marginal,
}

impl<D: Trivariate> crate::copula2::Bivariate for MarginalView<D> {
    fn cdf(&self, u: f64, v: f64) -> Result<f64> {
        self.inner.cdf3(self.which.embed(u, v))
    }
}

/// Closed box `[lower, upper]` inside `[0,1]³`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Box3 {
    pub lower: [f64; 3],
    pub upper: [f64; 3],
}

impl Box3 {
    /// Builds a box with coordinates clamped to `[0,1]`.
    pub fn new(lower: [f64; 3], upper: [f64; 3]) -> Result<Self> {
        let lower = lower.map(clamp_unit);
        let upper = upper.map(clamp_unit);
        if (0..3).any(|k| lower[k] > upper[k]) {
            return Err(Error::InvalidGrid(alloc::format!(
                "box corners out of order: {lower:?} > {upper:?}"
            )));
        }
        Ok(Self { lower, upper })
    }
}

/// Alternating corner sum `Σ (-1)^N(z) D(z)`, `N(z)` counting the lower
/// coordinates of corner `z`.
pub fn volume3<D: Trivariate + ?Sized>(d: &D, b: Box3) -> Result<f64> {
    let mut total = 0.0;
    for mask in 0..8u8 {
        let mut z = [0.0; 3];
        let mut lows = 0;
        for (k, zk) in z.iter_mut().enumerate() {
            if mask & (1 << k) == 0 {
                *zk = b.lower[k];
                lows += 1;
            } else {
                *zk = b.upper[k];
            }
        }
        let value = d.cdf3(z)?;
        if lows % 2 == 0 {
            total += value;
        } else {
            total -= value;
        }
    }
    Ok(total)
}

/// Survival transform
/// `1 - u1 - u2 - u3 + D(u1,u2,1) + D(u1,1,u3) + D(1,u2,u3) - D(u1,u2,u3)`.
pub fn survival3<D: Trivariate + ?Sized>(d: &D, u: [f64; 3]) -> Result<f64> {
    let [u1, u2, u3] = u;
    Ok(1.0 - u1 - u2 - u3
        + d.cdf3([u1, u2, 1.0])?
        + d.cdf3([u1, 1.0, u3])?
        + d.cdf3([1.0, u2, u3])?
        - d.cdf3(u)?)
}

/// Smallest volume over every box whose corners lie on the grid `axis³`,
/// together with the box attaining it.
pub fn min_box_volume3<D: Trivariate + ?Sized>(d: &D, axis: &[f64]) -> Result<(f64, Option<Box3>)> {
    let mut values = Vec::with_capacity(axis.len().pow(3));
    for &a in axis {
        for &b in axis {
            for &c in axis {
                values.push(d.cdf3([a, b, c])?);
            }
        }
    }
    Ok(min_box_volume_tabulated(&values, axis))
}

/// [`min_box_volume3`] for values already tabulated row-major on `axis³`.
pub fn min_box_volume_tabulated(values: &[f64], axis: &[f64]) -> (f64, Option<Box3>) {
    let m = axis.len();
    assert_eq!(values.len(), m * m * m, "table does not match the grid");
    let at = |i: usize, j: usize, k: usize| values[(i * m + j) * m + k];
    let pairs: Vec<(usize, usize)> = (0..m)
        .flat_map(|lo| (lo + 1..m).map(move |hi| (lo, hi)))
        .collect();
    let mut worst = (f64::INFINITY, None);
    for &(i0, i1) in &pairs {
        for &(j0, j1) in &pairs {
            for &(k0, k1) in &pairs {
                let vol = at(i1, j1, k1) - at(i0, j1, k1) - at(i1, j0, k1) - at(i1, j1, k0)
                    + at(i0, j0, k1)
                    + at(i0, j1, k0)
                    + at(i1, j0, k0)
                    - at(i0, j0, k0);
                if vol < worst.0 {
                    let b = Box3 {
                        lower: [axis[i0], axis[j0], axis[k0]],
                        upper: [axis[i1], axis[j1], axis[k1]],
                    };
                    worst = (vol, Some(b));
                }
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn survival_examples() {
        assert_eq!(survival3(&Pi3, [0.0, 0.0, 0.0]).unwrap(), 1.0);
        assert_eq!(survival3(&Pi3, [1.0, 1.0, 1.0]).unwrap(), 0.0);
        assert_eq!(survival3(&M3, [1.0, 1.0, 1.0]).unwrap(), 0.0);
        assert!((survival3(&Pi3, [0.5, 0.5, 0.5]).unwrap() - 0.125).abs() < 1e-15);
    }

    #[test]
    fn perm_validation_and_inverse() {
        assert!(Perm3::new([1, 1, 2]).is_err());
        assert!(Perm3::new([0, 1, 2]).is_err());
        let p = Perm3::new([2, 3, 1]).unwrap();
        assert_eq!(p.images(), [2, 3, 1]);
        let u = [0.1, 0.2, 0.3];
        assert_eq!(p.inverse().apply(p.apply(u)), u);
        assert_eq!(p.apply(u), [0.2, 0.3, 0.1]);
    }

    #[test]
    fn permutation_reorders_arguments() {
        struct Skew;
        impl Trivariate for Skew {
            fn cdf3(&self, u: [f64; 3]) -> Result<f64> {
                Ok(u[0] * u[1] * u[1] * u[2] * u[2] * u[2])
            }
        }
        let p = permute3(Skew, Perm3::new([1, 3, 2]).unwrap());
        let (a, b, c) = (0.2, 0.4, 0.8);
        assert_eq!(p.cdf3([a, b, c]).unwrap(), Skew.cdf3([a, c, b]).unwrap());
        let id = permute3(Skew, Perm3::IDENTITY);
        assert_eq!(id.cdf3([a, b, c]).unwrap(), Skew.cdf3([a, b, c]).unwrap());
    }

    #[test]
    fn volumes_of_closed_forms() {
        let unit = Box3::new([0.0; 3], [1.0; 3]).unwrap();
        assert!((volume3(&Pi3, unit).unwrap() - 1.0).abs() < 1e-15);
        let b = Box3::new([0.1, 0.2, 0.3], [0.5, 0.6, 0.9]).unwrap();
        assert!((volume3(&Pi3, b).unwrap() - 0.4 * 0.4 * 0.6).abs() < 1e-15);
        // M3 puts mass on the diagonal only
        let off = Box3::new([0.0, 0.5, 0.0], [0.4, 1.0, 1.0]).unwrap();
        assert_eq!(volume3(&M3, off).unwrap(), 0.0);
        let axis: Vec<f64> = (0..=10).map(|k| k as f64 / 10.0).collect();
        let (worst, _) = min_box_volume3(&M3, &axis).unwrap();
        assert!(worst >= -1e-15);
    }

    #[test]
    fn box_rejects_reversed_corners() {
        assert!(Box3::new([0.5, 0.0, 0.0], [0.4, 1.0, 1.0]).is_err());
    }
}
