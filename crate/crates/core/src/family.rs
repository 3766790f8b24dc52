//! Piecewise-constant families `{C_t}` indexed by `t ∈ [0,1]`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::copula2::CopulaSpec2;
use crate::error::{Error, Result};

/// `C_t = pieces[i]` for `t ∈ [breakpoints[i], breakpoints[i+1])`, with the
/// last piece also covering `t = 1`.
///
/// Serialized as `{"breakpoints":[0.0,1.0],"pieces":[{"family":"m"}]}`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(try_from = "FamilyPathRepr", into = "FamilyPathRepr")
)]
pub struct FamilyPath {
    breakpoints: Vec<f64>,
    pieces: Vec<CopulaSpec2>,
}

#[cfg(feature = "serde")]
#[derive(serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct FamilyPathRepr {
    breakpoints: Vec<f64>,
    pieces: Vec<CopulaSpec2>,
}

#[cfg(feature = "serde")]
impl TryFrom<FamilyPathRepr> for FamilyPath {
    type Error = Error;

    fn try_from(repr: FamilyPathRepr) -> Result<Self> {
        Self::new(repr.breakpoints, repr.pieces)
    }
}

#[cfg(feature = "serde")]
impl From<FamilyPath> for FamilyPathRepr {
    fn from(f: FamilyPath) -> Self {
        Self {
            breakpoints: f.breakpoints,
            pieces: f.pieces,
        }
    }
}

impl FamilyPath {
    pub fn new(breakpoints: Vec<f64>, pieces: Vec<CopulaSpec2>) -> Result<Self> {
        if breakpoints.len() != pieces.len() + 1 || pieces.is_empty() {
            return Err(Error::InvalidFamily(format!(
                "{} breakpoints cannot delimit {} pieces",
                breakpoints.len(),
                pieces.len()
            )));
        }
        if breakpoints[0] != 0.0 || breakpoints[breakpoints.len() - 1] != 1.0 {
            return Err(Error::InvalidFamily(
                "breakpoints must start at 0 and end at 1".into(),
            ));
        }
        if breakpoints.windows(2).any(|w| w[0].partial_cmp(&w[1]) != Some(core::cmp::Ordering::Less)) {
            return Err(Error::InvalidFamily(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        for p in &pieces {
            p.validate()?;
        }
        Ok(Self {
            breakpoints,
            pieces,
        })
    }

    /// `C_t = c` for every `t`.
    pub fn constant(c: CopulaSpec2) -> Self {
        Self {
            breakpoints: vec![0.0, 1.0],
            pieces: vec![c],
        }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn pieces(&self) -> &[CopulaSpec2] {
        &self.pieces
    }

    /// Breakpoints strictly inside `(0,1)`.
    pub fn interior_breakpoints(&self) -> &[f64] {
        &self.breakpoints[1..self.breakpoints.len() - 1]
    }

    pub fn piece_index(&self, t: f64) -> usize {
        let interior = self.interior_breakpoints();
        interior.partition_point(|&b| b <= t)
    }

    pub fn at(&self, t: f64) -> &CopulaSpec2 {
        &self.pieces[self.piece_index(t)]
    }

    pub fn is_constant(&self) -> bool {
        self.pieces.len() == 1
    }

    /// Breakpoints of both families merged, each interval paired with the two
    /// pieces active on it.
    pub fn overlay<'a>(
        &'a self,
        other: &'a FamilyPath,
    ) -> Vec<(f64, f64, &'a CopulaSpec2, &'a CopulaSpec2)> {
        let mut cuts: Vec<f64> = self
            .breakpoints
            .iter()
            .chain(&other.breakpoints)
            .copied()
            .collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        cuts.windows(2)
            .map(|w| {
                let mid = 0.5 * (w[0] + w[1]);
                (w[0], w[1], self.at(mid), other.at(mid))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn piece_lookup() {
        let f = FamilyPath::new(
            vec![0.0, 0.25, 0.75, 1.0],
            vec![CopulaSpec2::W, CopulaSpec2::Pi, CopulaSpec2::M],
        )
        .unwrap();
        assert_eq!(f.at(0.0), &CopulaSpec2::W);
        assert_eq!(f.at(0.2), &CopulaSpec2::W);
        assert_eq!(f.at(0.25), &CopulaSpec2::Pi);
        assert_eq!(f.at(0.75), &CopulaSpec2::M);
        assert_eq!(f.at(1.0), &CopulaSpec2::M);
        assert_eq!(f.interior_breakpoints(), [0.25, 0.75]);
    }

    #[test]
    fn rejects_malformed_paths() {
        let pi = || CopulaSpec2::Pi;
        assert!(FamilyPath::new(vec![0.0, 1.0], vec![]).is_err());
        assert!(FamilyPath::new(vec![0.0, 0.5], vec![pi()]).is_err());
        assert!(FamilyPath::new(vec![0.0, 0.6, 0.6, 1.0], vec![pi(), pi(), pi()]).is_err());
        assert!(FamilyPath::new(vec![0.0, 0.5, 1.0], vec![pi()]).is_err());
        assert!(FamilyPath::new(vec![0.0, 1.0], vec![CopulaSpec2::Fgm { theta: 3.0 }]).is_err());
    }

    #[test]
    fn overlay_merges_breakpoints() {
        let a = FamilyPath::new(vec![0.0, 0.5, 1.0], vec![CopulaSpec2::W, CopulaSpec2::Pi]).unwrap();
        let b = FamilyPath::new(vec![0.0, 0.3, 1.0], vec![CopulaSpec2::Pi, CopulaSpec2::M]).unwrap();
        let o = a.overlay(&b);
        assert_eq!(o.len(), 3);
        assert_eq!((o[0].0, o[0].1), (0.0, 0.3));
        assert_eq!((o[1].2, o[1].3), (&CopulaSpec2::W, &CopulaSpec2::M));
        assert_eq!((o[2].2, o[2].3), (&CopulaSpec2::Pi, &CopulaSpec2::M));
    }
}
