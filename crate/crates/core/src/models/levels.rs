//! Three-level generators, their structure constants and the energy gauge.
//!
//! Levels are ordered (top, middle, bottom), so `S = diag(1, 0, −1)`.
//! Generator `k` (1..=9) is the matrix unit `E_rc = |r⟩⟨c|` with
//!
//! | k | 1    | 2    | 3    | 4    | 5    | 6    | 7    | 8    | 9    |
//! |---|------|------|------|------|------|------|------|------|------|
//! |   | E_11 | E_12 | E_13 | E_21 | E_22 | E_23 | E_31 | E_32 | E_33 |
//!
//! where 1 = top, 2 = middle, 3 = bottom. The direct top↔bottom transition
//! operators are `E_13` (raising, bottom → top) and `E_31` (lowering).

use serde::Serialize;

use crate::algebra::{commutator, Operator, C64, ONE, ZERO};

pub const LEVELS: usize = 3;
pub const GENERATORS: usize = 9;

pub const TOP: usize = 0;
pub const MIDDLE: usize = 1;
pub const BOTTOM: usize = 2;

/// Matrix unit `|row⟩⟨col|` with 1-based level labels.
pub fn matrix_unit(row: usize, col: usize) -> Operator {
    assert!((1..=LEVELS).contains(&row) && (1..=LEVELS).contains(&col));
    Operator::from_fn(&[LEVELS], |i, j| if i == row - 1 && j == col - 1 { ONE } else { ZERO })
}

/// Level pair `(row, col)` of generator `k` (1-based).
pub fn generator_levels(k: usize) -> (usize, usize) {
    assert!((1..=GENERATORS).contains(&k), "generator index is 1..=9");
    ((k - 1) / LEVELS + 1, (k - 1) % LEVELS + 1)
}

pub fn level_s() -> Operator {
    Operator::from_real_diagonal(&[LEVELS], [1.0, 0.0, -1.0])
}

pub fn level_s5() -> Operator {
    Operator::from_real_diagonal(&[LEVELS], [0.0, 1.0, 0.0])
}

pub fn raising() -> Operator {
    matrix_unit(1, 3)
}

pub fn lowering() -> Operator {
    matrix_unit(3, 1)
}

#[derive(Clone, Debug)]
pub struct LevelBasis {
    pub s: Operator,
    pub s5: Operator,
    pub generators: Vec<Operator>,
    structure: Vec<C64>,
}

impl LevelBasis {
    /// `C^k_ij` with 1-based indices, `[g_i, g_j] = Σ_k C^k_ij g_k`.
    pub fn structure_constant(&self, i: usize, j: usize, k: usize) -> C64 {
        assert!([i, j, k].iter().all(|x| (1..=GENERATORS).contains(x)));
        self.structure[((i - 1) * GENERATORS + (j - 1)) * GENERATORS + (k - 1)]
    }

    pub fn generator(&self, k: usize) -> &Operator {
        &self.generators[k - 1]
    }

    /// `‖[g_i, g_j] − Σ_k C^k_ij g_k‖_F`.
    pub fn closure_residual(&self, i: usize, j: usize) -> f64 {
        let lhs = commutator(self.generator(i), self.generator(j)).expect("3x3 generators");
        let rhs = (1..=GENERATORS).fold(Operator::zeros(&[LEVELS]), |acc, k| {
            &acc + &self.generator(k).scale(self.structure_constant(i, j, k))
        });
        (&lhs - &rhs).frobenius_norm()
    }

    /// Non-zero structure constants as `(i, j, k, C)` in index order.
    pub fn nonzero_structure_constants(&self) -> Vec<(usize, usize, usize, C64)> {
        let mut out = Vec::new();
        for i in 1..=GENERATORS {
            for j in 1..=GENERATORS {
                for k in 1..=GENERATORS {
                    let c = self.structure_constant(i, j, k);
                    if c != ZERO {
                        out.push((i, j, k, c));
                    }
                }
            }
        }
        out
    }
}

/// Matrix-unit basis of the three-level space with brute-force structure
/// constants: each commutator is projected onto the basis with the
/// Frobenius inner product `Tr(g_k† X)`.
pub fn level_basis() -> LevelBasis {
    let generators: Vec<Operator> = (1..=GENERATORS)
        .map(|k| {
            let (r, c) = generator_levels(k);
            matrix_unit(r, c)
        })
        .collect();
    let mut structure = vec![ZERO; GENERATORS.pow(3)];
    for i in 0..GENERATORS {
        for j in 0..GENERATORS {
            let comm = commutator(&generators[i], &generators[j]).expect("3x3 generators");
            for (k, g) in generators.iter().enumerate() {
                let overlap: C64 = g.as_slice().iter().zip(comm.as_slice()).map(|(a, b)| a.conj() * b).sum();
                structure[(i * GENERATORS + j) * GENERATORS + k] = overlap;
            }
        }
    }
    LevelBasis { s: level_s(), s5: level_s5(), generators, structure }
}

/// Level energies rewritten as transition frequencies plus an overall shift.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Gauge {
    /// `E₂ − E₁`
    pub omega0: f64,
    /// `E₃ − E₂`
    pub omega1: f64,
    /// `E₂`, the energy origin that is dropped from the Hamiltonian.
    pub shift: f64,
}

pub fn gauge_decompose(e1: f64, e2: f64, e3: f64) -> Gauge {
    Gauge { omega0: e2 - e1, omega1: e3 - e2, shift: e2 }
}

impl Gauge {
    /// `½(ω₀+ω₁)S − ½(ω₀−ω₁)S²`, the level Hamiltonian with the middle level
    /// at zero.
    pub fn level_hamiltonian(&self) -> Operator {
        let s = level_s();
        let s2 = &s * &s;
        &s.scale_real(0.5 * (self.omega0 + self.omega1)) - &s2.scale_real(0.5 * (self.omega0 - self.omega1))
    }

    /// Level Hamiltonian plus `shift·I`, i.e. `diag(E₃, E₂, E₁)`.
    pub fn reconstruct(&self) -> Operator {
        &self.level_hamiltonian() + &Operator::identity(&[LEVELS]).scale_real(self.shift)
    }
}
