//! Cell lists for the short-range pair sum.

use alloc::vec;
use alloc::vec::Vec;

use crate::math::{floor, round};

/// Particles binned into cells of edge at least `cutoff`. With fewer than
/// three cells along any axis every pair is visited instead.
pub(crate) struct CellList {
    box_lengths: [f64; 3],
    ncell: [usize; 3],
    heads: Vec<usize>,
    members: Vec<usize>,
    brute_force: bool,
}

impl CellList {
    pub(crate) fn new(positions: &[[f64; 3]], box_lengths: [f64; 3], cutoff: f64) -> Self {
        let ncell = [0, 1, 2].map(|d| (floor(box_lengths[d] / cutoff) as usize).max(1));
        let brute_force = ncell.iter().any(|&n| n < 3);
        let total = if brute_force {
            1
        } else {
            ncell[0] * ncell[1] * ncell[2]
        };
        let cell_of = |p: &[f64; 3]| -> usize {
            if brute_force {
                return 0;
            }
            let idx = [0, 1, 2].map(|d| {
                let c = (p[d] / box_lengths[d] * ncell[d] as f64) as usize;
                c.min(ncell[d] - 1)
            });
            (idx[0] * ncell[1] + idx[1]) * ncell[2] + idx[2]
        };
        // counting sort by cell, stable in particle index
        let mut counts = vec![0usize; total + 1];
        let cells: Vec<usize> = positions.iter().map(cell_of).collect();
        for &c in &cells {
            counts[c + 1] += 1;
        }
        for i in 0..total {
            counts[i + 1] += counts[i];
        }
        let heads = counts.clone();
        let mut fill = counts;
        let mut members = vec![0; positions.len()];
        for (i, &c) in cells.iter().enumerate() {
            members[fill[c]] = i;
            fill[c] += 1;
        }
        Self {
            box_lengths,
            ncell,
            heads,
            members,
            brute_force,
        }
    }

    /// Minimum-image displacement `a - b`.
    #[inline]
    pub(crate) fn displacement(&self, a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
        let mut d = [0.0; 3];
        for k in 0..3 {
            let x = a[k] - b[k];
            d[k] = x - self.box_lengths[k] * round(x / self.box_lengths[k]);
        }
        d
    }

    /// Visit every candidate partner `j != i` of particle `i`, in a fixed order.
    #[inline]
    pub(crate) fn for_each_candidate(&self, i: usize, position: &[f64; 3], mut f: impl FnMut(usize)) {
        if self.brute_force {
            for &j in &self.members {
                if j != i {
                    f(j);
                }
            }
            return;
        }
        let n = self.ncell;
        let c = [0, 1, 2].map(|d| {
            let c = (position[d] / self.box_lengths[d] * n[d] as f64) as usize;
            c.min(n[d] - 1)
        });
        for dx in [n[0] - 1, 0, 1] {
            let x = (c[0] + dx) % n[0];
            for dy in [n[1] - 1, 0, 1] {
                let y = (c[1] + dy) % n[1];
                for dz in [n[2] - 1, 0, 1] {
                    let z = (c[2] + dz) % n[2];
                    let cell = (x * n[1] + y) * n[2] + z;
                    for &j in &self.members[self.heads[cell]..self.heads[cell + 1]] {
                        if j != i {
                            f(j);
                        }
                    }
                }
            }
        }
    }
}
