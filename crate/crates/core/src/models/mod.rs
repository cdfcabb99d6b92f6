//! Hamiltonians, constants of motion and their invariant blocks.

pub mod levels;
pub mod three_level;
pub mod two_level;

use std::collections::BTreeMap;

use serde::Serialize;

use crate::algebra::{commutator, Operator};
use crate::error::{Error, Result};

pub use levels::{gauge_decompose, level_basis, Gauge, LevelBasis};
pub use three_level::{build_three_level, Level3, ThreeLevelModel, ThreeLevelParams, ThreeLevelState};
pub use two_level::{build_two_level, build_two_level_with, Level2, SpinNorm, TwoLevelModel, TwoLevelParams, TwoLevelState};

/// Relative commutator residual above which an operator is not treated as
/// conserved.
pub const CONSERVATION_TOL: f64 = 1e-12;

/// Largest coupling allowed between different conserved sectors, relative to
/// `max(‖H‖_F, 1)`.
pub const LEAK_TOL: f64 = 1e-12;

/// Restriction of a Hamiltonian to one joint eigenspace of its constants of
/// motion.
#[derive(Clone, Debug, Serialize)]
pub struct InvariantBlock {
    /// Computational-basis indices, ascending.
    pub basis_states: Vec<usize>,
    /// Eigenvalue of each conserved operator on this block.
    pub conserved_values: Vec<f64>,
    #[serde(skip)]
    pub matrix: Operator,
    pub eigenvalues: Vec<f64>,
    /// Eigenvalue gap for 2×2 blocks.
    pub splitting: Option<f64>,
}

impl InvariantBlock {
    pub fn contains(&self, index: usize) -> bool {
        self.basis_states.binary_search(&index).is_ok()
    }
}

// Conserved eigenvalues here are integers or half-integers; a fine grid key
// groups them without tolerance chains.
fn sector_key(v: f64) -> i64 {
    (v * 1048576.0).round() as i64
}

/// Group basis states by the joint eigenvalues of diagonal conserved
/// operators and return each block's restricted Hamiltonian. Blocks are
/// ordered by their lowest basis index.
pub fn block_decompose(h: &Operator, conserved: &[&Operator]) -> Result<Vec<InvariantBlock>> {
    let dim = h.dim();
    let h_norm = h.frobenius_norm().max(1.0);
    for (index, c) in conserved.iter().enumerate() {
        if c.dim() != dim {
            return Err(Error::DimensionMismatch { left: dim, right: c.dim() });
        }
        let scale = c.frobenius_norm().max(1.0);
        let off_diag = (0..dim)
            .flat_map(|i| (0..dim).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| c.get(i, j).norm())
            .fold(0.0, f64::max);
        if off_diag > 1e-12 * scale {
            return Err(Error::NotDiagonal { index });
        }
        let residual = commutator(c, h)?.frobenius_norm() / (h_norm * scale);
        if residual > CONSERVATION_TOL {
            return Err(Error::NotConserved { index, residual });
        }
    }

    let mut sectors: BTreeMap<Vec<i64>, Vec<usize>> = BTreeMap::new();
    for i in 0..dim {
        let key = conserved.iter().map(|c| sector_key(c.get(i, i).re)).collect();
        sectors.entry(key).or_default().push(i);
    }
    let mut groups: Vec<Vec<usize>> = sectors.into_values().collect();
    groups.sort_by_key(|g| g[0]);

    let mut sector_of = vec![0usize; dim];
    for (s, g) in groups.iter().enumerate() {
        for &i in g {
            sector_of[i] = s;
        }
    }
    let leak = (0..dim)
        .flat_map(|i| (0..dim).map(move |j| (i, j)))
        .filter(|&(i, j)| sector_of[i] != sector_of[j])
        .map(|(i, j)| h.get(i, j).norm())
        .fold(0.0, f64::max);
    if leak > LEAK_TOL * h_norm {
        return Err(Error::SectorLeak { residual: leak });
    }

    groups
        .into_iter()
        .map(|states| {
            let matrix = h.restrict(&states);
            let eigenvalues = matrix.eig_hermitian()?.values;
            let splitting = (states.len() == 2).then(|| two_by_two_splitting(&matrix));
            let conserved_values = conserved.iter().map(|c| c.get(states[0], states[0]).re).collect();
            Ok(InvariantBlock { basis_states: states, conserved_values, matrix, eigenvalues, splitting })
        })
        .collect()
}

/// `√((h₀₀ − h₁₁)² + 4|h₀₁|²)` for a Hermitian 2×2 matrix.
pub fn two_by_two_splitting(m: &Operator) -> f64 {
    assert_eq!(m.dim(), 2);
    let gap = m.get(0, 0).re - m.get(1, 1).re;
    (gap * gap + 4.0 * m.get(0, 1).norm_sqr()).sqrt()
}

/// The block containing a basis state.
pub fn block_of(blocks: &[InvariantBlock], index: usize) -> Option<&InvariantBlock> {
    blocks.iter().find(|b| b.contains(index))
}
