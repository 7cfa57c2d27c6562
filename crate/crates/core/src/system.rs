use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{abs, fold};

/// Point charges in an orthorhombic periodic box `[0, L_x) x [0, L_y) x [0, L_z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleSystem {
    positions: Vec<[f64; 3]>,
    charges: Vec<f64>,
    box_lengths: [f64; 3],
}

impl ParticleSystem {
    /// Positions are folded into the box on ingestion.
    pub fn new(positions: Vec<[f64; 3]>, charges: Vec<f64>, box_lengths: [f64; 3]) -> Result<Self> {
        if positions.len() != charges.len() {
            return Err(Error::LengthMismatch(positions.len(), charges.len()));
        }
        if box_lengths.iter().any(|&l| !(l > 0.0) || !l.is_finite()) {
            return Err(Error::InvalidParameter("box lengths must be positive"));
        }
        if positions.iter().flatten().chain(&charges).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("positions and charges must be finite"));
        }
        let positions = positions
            .into_iter()
            .map(|p| {
                [
                    fold(p[0], box_lengths[0]),
                    fold(p[1], box_lengths[1]),
                    fold(p[2], box_lengths[2]),
                ]
            })
            .collect();
        Ok(Self {
            positions,
            charges,
            box_lengths,
        })
    }

    pub fn len(&self) -> usize {
        self.charges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.charges.is_empty()
    }

    pub fn positions(&self) -> &[[f64; 3]] {
        &self.positions
    }

    pub fn charges(&self) -> &[f64] {
        &self.charges
    }

    pub fn box_lengths(&self) -> [f64; 3] {
        self.box_lengths
    }

    pub fn volume(&self) -> f64 {
        self.box_lengths.iter().product()
    }

    pub fn net_charge(&self) -> f64 {
        self.charges.iter().sum()
    }

    /// `|sum q| <= 1e-12 sum |q|`.
    pub fn is_neutral(&self) -> bool {
        let total: f64 = self.charges.iter().map(|q| abs(*q)).sum();
        abs(self.net_charge()) <= 1e-12 * total
    }

    pub(crate) fn require_neutral(&self) -> Result<()> {
        if self.is_neutral() {
            Ok(())
        } else {
            Err(Error::NonNeutral(self.net_charge()))
        }
    }

    /// Copy with every charge multiplied by `s`.
    pub fn scaled_charges(&self, s: f64) -> Self {
        Self {
            positions: self.positions.clone(),
            charges: self.charges.iter().map(|q| q * s).collect(),
            box_lengths: self.box_lengths,
        }
    }

    /// Copy rigidly translated by `shift` (and refolded).
    pub fn translated(&self, shift: [f64; 3]) -> Self {
        let positions = self
            .positions
            .iter()
            .map(|p| {
                [
                    fold(p[0] + shift[0], self.box_lengths[0]),
                    fold(p[1] + shift[1], self.box_lengths[1]),
                    fold(p[2] + shift[2], self.box_lengths[2]),
                ]
            })
            .collect();
        Self {
            positions,
            charges: self.charges.clone(),
            box_lengths: self.box_lengths,
        }
    }

    /// Copy with particle `i` moved to `position` (refolded).
    pub fn with_position(&self, i: usize, position: [f64; 3]) -> Self {
        let mut out = self.clone();
        for d in 0..3 {
            out.positions[i][d] = fold(position[d], self.box_lengths[d]);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn folds_positions_and_checks_neutrality() {
        let s = ParticleSystem::new(
            alloc::vec![[-0.5, 10.5, 3.0], [1.0, 1.0, 1.0]],
            alloc::vec![1.0, -1.0],
            [10.0, 10.0, 10.0],
        )
        .unwrap();
        assert_eq!(s.positions()[0], [9.5, 0.5, 3.0]);
        assert!(s.is_neutral());
        let t = ParticleSystem::new(alloc::vec![[0.0; 3]], alloc::vec![1.0], [1.0; 3]).unwrap();
        assert!(t.require_neutral().is_err());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(ParticleSystem::new(alloc::vec![[0.0; 3]], alloc::vec![], [1.0; 3]).is_err());
        assert!(ParticleSystem::new(alloc::vec![], alloc::vec![], [1.0, 0.0, 1.0]).is_err());
        assert!(ParticleSystem::new(alloc::vec![[f64::NAN, 0.0, 0.0]], alloc::vec![0.0], [1.0; 3]).is_err());
    }
}
