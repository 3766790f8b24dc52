#![no_std]
#![warn(missing_debug_implementations)]

//! Trivariate copulas with prescribed bivariate marginals.
//!
//! The crate evaluates a small catalogue of bivariate copulas together with
//! their conditional distribution functions, builds the C-product `A *_C B`
//! and the C-lifting `A ⋆_C B` by composite Gauss–Legendre quadrature, and
//! uses them to refute compatibility of copula triples and to bound the
//! Fréchet class of a compatible triple.
//!
//! Everything here is pure computation over immutable values and needs only
//! `alloc`. File formats and the command-line front end live in the
//! `frechet3` crate.
//!
//! # Modules
//! - [`copula2`]: bivariate families, conditional partials, volumes.
//! - [`copula3`]: trivariate evaluation, survival transform, permutations.
//! - [`envelope`]: Fréchet–Hoeffding envelope scans.
//! - [`quadrature`], [`family`], [`product`]: the C-product and C-lifting.
//! - [`order`], [`bounds`]: concordance order, compatibility and class bounds.
//! - [`sampler`]: conditional-distribution sampling and empirical copulas.

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bounds;
pub mod copula2;
pub mod copula3;
pub mod envelope;
mod error;
pub mod family;
pub mod grid;
pub mod order;
pub mod product;
pub mod quadrature;
pub mod sampler;

pub use crate::bounds::{
    check_pair_compat, check_triple_compat, cl_cu, improvement_report, joe_bounds, lift_bounds,
    product_bounds, BoundsRecord, BoundsReport, CompatStatus, CompatVerdict, Marginal, Witness,
};
pub use crate::copula2::{volume2, Bivariate, Checkerboard, CopulaSpec2};
pub use crate::copula3::{permute3, survival3, volume3, Box3, Perm3, Permuted, Pi3, Trivariate, M3};
pub use crate::error::{Error, Result};
pub use crate::family::FamilyPath;
pub use crate::grid::{GridSpec, Rect2};
pub use crate::product::{c_lift, c_product, LiftedCopula3};
pub use crate::quadrature::QuadratureConfig;
