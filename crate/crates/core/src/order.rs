//! Concordance order, checked on grids.
//!
//! `C ⪯ C'` for 2-copulas means `C ≤ C'` pointwise. For 3-copulas both the
//! copulas and their survival transforms must be ordered.

use alloc::vec::Vec;

use crate::copula2::Bivariate;
use crate::copula3::Trivariate;
use crate::error::Result;
use crate::grid::GridSpec;

#[derive(Debug, Clone, PartialEq)]
pub struct OrderViolation {
    pub point: Vec<f64>,
    pub lhs: f64,
    pub rhs: f64,
    /// True when the survival transforms were out of order.
    pub survival: bool,
}

impl OrderViolation {
    pub fn excess(&self) -> f64 {
        self.lhs - self.rhs
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderReport {
    pub points_checked: usize,
    pub violations: usize,
    pub worst: Option<OrderViolation>,
    pub tolerance: f64,
}

impl OrderReport {
    pub fn holds(&self) -> bool {
        self.violations == 0
    }

    fn new(tolerance: f64) -> Self {
        Self {
            points_checked: 0,
            violations: 0,
            worst: None,
            tolerance,
        }
    }

    fn visit(&mut self, point: &[f64], lhs: f64, rhs: f64, survival: bool) {
        if lhs - rhs > self.tolerance {
            self.violations += 1;
            if self.worst.as_ref().map_or(true, |w| lhs - rhs > w.excess()) {
                self.worst = Some(OrderViolation {
                    point: point.to_vec(),
                    lhs,
                    rhs,
                    survival,
                });
            }
        }
    }
}

/// `C ⪯ C'` on the grid, up to `tol`.
pub fn concordance_leq2<A, B>(c: &A, c_prime: &B, grid: GridSpec, tol: f64) -> Result<OrderReport>
where
    A: Bivariate + ?Sized,
    B: Bivariate + ?Sized,
{
    let mut report = OrderReport::new(tol);
    for [u, v] in grid.points2() {
        report.points_checked += 1;
        report.visit(&[u, v], c.cdf(u, v)?, c_prime.cdf(u, v)?, false);
    }
    Ok(report)
}

/// `D ⪯ D'` on the grid: `D ≤ D'` and `D̄ ≤ D̄'` at every point, up to `tol`.
pub fn concordance_leq3<A, B>(d: &A, d_prime: &B, grid: GridSpec, tol: f64) -> Result<OrderReport>
where
    A: Trivariate + ?Sized,
    B: Trivariate + ?Sized,
{
    // every face value the survival transform needs is itself a grid value
    let lhs = tabulate(d, grid)?;
    let rhs = tabulate(d_prime, grid)?;
    let m = grid.points_per_axis();
    let last = m - 1;
    let idx = |i: usize, j: usize, k: usize| (i * m + j) * m + k;
    let survival = |t: &[f64], i: usize, j: usize, k: usize| {
        1.0 - grid.coord(i) - grid.coord(j) - grid.coord(k)
            + t[idx(i, j, last)]
            + t[idx(i, last, k)]
            + t[idx(last, j, k)]
            - t[idx(i, j, k)]
    };
    let mut report = OrderReport::new(tol);
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                let point = [grid.coord(i), grid.coord(j), grid.coord(k)];
                report.points_checked += 1;
                report.visit(&point, lhs[idx(i, j, k)], rhs[idx(i, j, k)], false);
                report.visit(&point, survival(&lhs, i, j, k), survival(&rhs, i, j, k), true);
            }
        }
    }
    Ok(report)
}

/// Row-major table of `d` over the grid.
pub fn tabulate<D: Trivariate + ?Sized>(d: &D, grid: GridSpec) -> Result<Vec<f64>> {
    grid.points3().map(|u| d.cdf3(u)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::copula2::CopulaSpec2;
    use crate::copula3::{survival3, Pi3, M3};

    #[test]
    fn frechet_chain_is_ordered() {
        let g = GridSpec::new(21).unwrap();
        assert!(concordance_leq2(&CopulaSpec2::W, &CopulaSpec2::Pi, g, 0.0).unwrap().holds());
        assert!(concordance_leq2(&CopulaSpec2::Pi, &CopulaSpec2::M, g, 0.0).unwrap().holds());
        let back = concordance_leq2(&CopulaSpec2::M, &CopulaSpec2::W, g, 0.0).unwrap();
        assert!(!back.holds());
        let w = back.worst.unwrap();
        assert_eq!(w.point, [0.5, 0.5]);
        assert_eq!(w.excess(), 0.5);
    }

    #[test]
    fn clayton_increases_with_alpha() {
        let g = GridSpec::new(21).unwrap();
        let c1 = CopulaSpec2::clayton(1.0).unwrap();
        let c3 = CopulaSpec2::clayton(3.0).unwrap();
        assert!(concordance_leq2(&c1, &c3, g, 1e-15).unwrap().holds());
        assert!(!concordance_leq2(&c3, &c1, g, 1e-15).unwrap().holds());
    }

    #[test]
    fn trivariate_order_uses_survival() {
        let g = GridSpec::new(11).unwrap();
        assert!(concordance_leq3(&Pi3, &M3, g, 1e-15).unwrap().holds());
        // survival values from the table agree with the direct formula
        let table = tabulate(&Pi3, g).unwrap();
        assert_eq!(table.len(), 1331);
        let direct = survival3(&Pi3, [0.3, 0.6, 0.9]).unwrap();
        assert!((direct - 0.7 * 0.4 * 0.1).abs() < 1e-15);
    }
}
