//! States of the working substance: Hamiltonians, Gibbs states, energy and entropy.
//!
//! Units are natural: ħ = 1 and the bare transition frequency ω₀ = 1, so
//! energies are in units of ħω₀ and temperature enters only through the
//! dimensionless `b = βħω₀`. Entropies are in nats.

use thiserror::Error;

use crate::qlinalg::{self, LinalgError, SquareMatrix, C64};
use crate::tol;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StateError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("trace is {trace}, expected 1")]
    NotNormalized { trace: f64 },
    #[error("state has negative eigenvalue {min_eigenvalue:e}")]
    NotPositive { min_eigenvalue: f64 },
    #[error("energy levels must be finite and sorted ascending")]
    BadLevels,
    #[error("inverse temperature b must be finite and > 0, got {0}")]
    BadTemperature(f64),
    #[error("frequency must be finite and > 0, got {0}")]
    BadFrequency(f64),
    #[error("Tr(Hρ) has imaginary part {0:e}")]
    ComplexEnergy(f64),
}

/// Diagonal Hamiltonian given by its energy levels (units of ħω₀).
#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    levels: Vec<f64>,
}

impl Hamiltonian {
    pub fn from_levels(levels: Vec<f64>) -> Result<Self, StateError> {
        if levels.is_empty() || levels.iter().any(|e| !e.is_finite()) || levels.windows(2).any(|w| w[0] > w[1]) {
            return Err(StateError::BadLevels);
        }
        Ok(Self { levels })
    }

    /// `(f/2)σ_z` written with the ground state |0⟩ at `-f/2`, where `f` is the
    /// transition frequency in units of ω₀.
    pub fn qubit(frequency: f64) -> Result<Self, StateError> {
        if !(frequency.is_finite() && frequency > 0.0) {
            return Err(StateError::BadFrequency(frequency));
        }
        Ok(Self {
            levels: vec![-0.5 * frequency, 0.5 * frequency],
        })
    }

    pub fn dim(&self) -> usize {
        self.levels.len()
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    /// Level spacing of a two-level Hamiltonian; `None` otherwise.
    pub fn frequency(&self) -> Option<f64> {
        match self.levels.as_slice() {
            [g, e] => Some(e - g),
            _ => None,
        }
    }

    pub fn matrix(&self) -> SquareMatrix {
        SquareMatrix::from_diagonal_real(&self.levels)
    }
}

/// Dimensionless inverse temperature `b = βħω₀`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalParams(f64);

impl ThermalParams {
    pub fn new(b: f64) -> Result<Self, StateError> {
        if b.is_finite() && b > 0.0 {
            Ok(Self(b))
        } else {
            Err(StateError::BadTemperature(b))
        }
    }

    pub fn b(self) -> f64 {
        self.0
    }
}

/// Hermitian, unit-trace, positive-semidefinite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: SquareMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(mat: SquareMatrix) -> Result<Self, StateError> {
        let eigs = qlinalg::eig_hermitian(&mat)?;
        let tr = qlinalg::trace(&mat).re;
        if (tr - 1.0).abs() > tol::UNIT_TRACE {
            return Err(StateError::NotNormalized { trace: tr });
        }
        if eigs[0] < -tol::PSD_SLACK {
            return Err(StateError::NotPositive {
                min_eigenvalue: eigs[0],
            });
        }
        Ok(Self { mat })
    }

    /// Diagonal state with the given populations.
    pub fn from_populations(populations: &[f64]) -> Result<Self, StateError> {
        Self::new(SquareMatrix::from_diagonal_real(populations))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            mat: SquareMatrix::identity(dim).scale_real(1.0 / dim as f64),
        }
    }

    /// Computational basis state `|k⟩⟨k|`.
    pub fn basis(dim: usize, k: usize) -> Self {
        Self {
            mat: SquareMatrix::ket_bra(dim, k, k, 1.0),
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.dim()
    }

    pub fn matrix(&self) -> &SquareMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> SquareMatrix {
        self.mat
    }

    /// Diagonal entries `⟨k|ρ|k⟩`.
    pub fn populations(&self) -> Vec<f64> {
        self.mat.diagonal().iter().map(|z| z.re).collect()
    }

    /// Largest off-diagonal modulus.
    pub fn max_coherence(&self) -> f64 {
        self.mat.max_off_diagonal()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        qlinalg::eig_hermitian(&self.mat).expect("density matrix is Hermitian by construction")
    }
}

/// `e^{-bH}/Z` for a Hamiltonian diagonal in the computational basis.
pub fn gibbs_state(h: &Hamiltonian, t: ThermalParams) -> DensityMatrix {
    let b = t.b();
    let ground = h.levels[0];
    // shifting by the ground energy keeps every weight in (0, 1]
    let weights: Vec<f64> = h.levels.iter().map(|e| (-b * (e - ground)).exp()).collect();
    let z: f64 = weights.iter().sum();
    let pops: Vec<f64> = weights.iter().map(|w| w / z).collect();
    DensityMatrix {
        mat: SquareMatrix::from_diagonal_real(&pops),
    }
}

/// `Tr(Hρ)` in units of ħω₀.
pub fn mean_energy(rho: &DensityMatrix, h: &Hamiltonian) -> Result<f64, StateError> {
    let e = qlinalg::trace(&qlinalg::matmul(&h.matrix(), rho.matrix())?);
    if e.im.abs() > tol::ENERGY_IMAGINARY {
        return Err(StateError::ComplexEnergy(e.im));
    }
    Ok(e.re)
}

/// `-Σ λ ln λ` over the eigenvalues of `rho`, in nats.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    rho.eigenvalues()
        .into_iter()
        .map(|l| if l < 0.0 { 0.0 } else { l })
        .filter(|&l| l >= tol::ENTROPY_CUTOFF)
        .map(|l| -l * l.ln())
        .sum()
}

/// `(1/2) Σ |λ_k(a - b)|`.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64, StateError> {
    let diff = qlinalg::try_sub(a.matrix(), b.matrix())?;
    let eigs = qlinalg::eig_hermitian(&diff)?;
    Ok(0.5 * eigs.iter().map(|l| l.abs()).sum::<f64>())
}

/// Builds a density matrix from a matrix the caller already knows is valid
/// up to rounding; used for channel outputs, which are re-validated in tests.
pub(crate) fn density_unchecked(mat: SquareMatrix) -> DensityMatrix {
    DensityMatrix { mat }
}

/// `Tr(ρ)` real part; convenience for normalization.
pub(crate) fn real_trace(m: &SquareMatrix) -> f64 {
    let t: C64 = qlinalg::trace(m);
    t.re
}
