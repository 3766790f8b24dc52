//! Grid scans against the Fréchet–Hoeffding envelope
//! `max(Σ u_i - n + 1, 0) ≤ C(u) ≤ min(u_i)`.

use alloc::vec::Vec;

use crate::copula2::Bivariate;
use crate::copula3::Trivariate;
use crate::error::Result;
use crate::grid::GridSpec;

/// Worst envelope violation found by a scan.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeViolation {
    pub point: Vec<f64>,
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    /// Distance outside `[lower, upper]`.
    pub excess: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeReport {
    pub points_checked: usize,
    pub violations: usize,
    pub worst: Option<EnvelopeViolation>,
    /// `max (upper - value)` over the grid; zero when the upper bound is attained everywhere.
    pub max_upper_slack: f64,
    /// `max (value - lower)` over the grid.
    pub max_lower_slack: f64,
    pub tolerance: f64,
}

impl EnvelopeReport {
    pub fn is_clean(&self) -> bool {
        self.violations == 0
    }
}

struct Scan {
    report: EnvelopeReport,
}

impl Scan {
    fn new(tolerance: f64) -> Self {
        Self {
            report: EnvelopeReport {
                points_checked: 0,
                violations: 0,
                worst: None,
                max_upper_slack: 0.0,
                max_lower_slack: 0.0,
                tolerance,
            },
        }
    }

    fn visit(&mut self, point: &[f64], value: f64) {
        let n = point.len() as f64;
        let lower = (point.iter().sum::<f64>() - n + 1.0).max(0.0);
        let upper = point.iter().copied().fold(1.0, f64::min);
        let r = &mut self.report;
        r.points_checked += 1;
        r.max_upper_slack = r.max_upper_slack.max(upper - value);
        r.max_lower_slack = r.max_lower_slack.max(value - lower);
        let excess = (lower - value).max(value - upper);
        if excess > r.tolerance {
            r.violations += 1;
            if r.worst.as_ref().map_or(true, |w| excess > w.excess) {
                r.worst = Some(EnvelopeViolation {
                    point: point.to_vec(),
                    value,
                    lower,
                    upper,
                    excess,
                });
            }
        }
    }
}

pub fn frechet_envelope_check2<C: Bivariate + ?Sized>(
    c: &C,
    grid: GridSpec,
    tolerance: f64,
) -> Result<EnvelopeReport> {
    let mut scan = Scan::new(tolerance);
    for [u, v] in grid.points2() {
        scan.visit(&[u, v], c.cdf(u, v)?);
    }
    Ok(scan.report)
}

pub fn frechet_envelope_check3<D: Trivariate + ?Sized>(
    d: &D,
    grid: GridSpec,
    tolerance: f64,
) -> Result<EnvelopeReport> {
    let mut scan = Scan::new(tolerance);
    for u in grid.points3() {
        scan.visit(&u, d.cdf3(u)?);
    }
    Ok(scan.report)
}
