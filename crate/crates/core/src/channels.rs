//! General measurements in Kraus form.
//!
//! A [`KrausSet`] is an ordered list of operators `A_n`. It describes a
//! measurement when `Σ A_n†A_n = I`; construction only checks shapes so an
//! incomplete set can still be inspected with [`validate_completeness`],
//! while every application routine refuses one.
//!
//! The two engine channels act in the computational basis with |0⟩ the
//! ground state:
//!
//! * [`first_channel`]: `M₁ = √(1-P)|0⟩⟨0| + |1⟩⟨1|`, `M₂ = √P|1⟩⟨0|`, which
//!   pumps ground population into the excited level.
//! * [`second_channel`]: `N₁ = |0⟩⟨0| + √(1-q)|1⟩⟨1|`, `N₂ = √q|0⟩⟨1|`, which
//!   moves excited population back down.

use thiserror::Error;

use crate::qlinalg::{self, LinalgError, SquareMatrix};
use crate::qstate::{self, DensityMatrix};
use crate::tol;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChannelError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("Kraus set is empty")]
    Empty,
    #[error("Kraus operators have mixed dimensions")]
    MixedDimensions,
    #[error("Kraus set '{label}' is incomplete: max |Σ A†A - I| = {deviation:e}")]
    Incomplete { label: String, deviation: f64 },
    #[error("state dimension {state} does not match Kraus dimension {kraus}")]
    DimensionMismatch { state: usize, kraus: usize },
    #[error("measurement strength {name} = {value} is outside [0, 1]")]
    StrengthOutOfRange { name: &'static str, value: f64 },
    #[error("no isentropic partner strength: P = {p} is below the threshold (1 - e^-b)/2 = {threshold}")]
    NoIsentropicPartner { p: f64, threshold: f64 },
}

/// Ordered measurement operators sharing one dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausSet {
    dim: usize,
    ops: Vec<SquareMatrix>,
    label: String,
}

impl KrausSet {
    pub fn new(label: impl Into<String>, ops: Vec<SquareMatrix>) -> Result<Self, ChannelError> {
        let dim = ops.first().ok_or(ChannelError::Empty)?.dim();
        if ops.iter().any(|op| op.dim() != dim) {
            return Err(ChannelError::MixedDimensions);
        }
        Ok(Self {
            dim,
            ops,
            label: label.into(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ops(&self) -> &[SquareMatrix] {
        &self.ops
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn outcomes(&self) -> usize {
        self.ops.len()
    }

    fn ensure_applicable(&self, rho: &DensityMatrix) -> Result<(), ChannelError> {
        if rho.dim() != self.dim {
            return Err(ChannelError::DimensionMismatch {
                state: rho.dim(),
                kraus: self.dim,
            });
        }
        let report = validate_completeness(self);
        if !report.passed {
            return Err(ChannelError::Incomplete {
                label: self.label.clone(),
                deviation: report.deviation,
            });
        }
        Ok(())
    }
}

/// Outcome of [`validate_completeness`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompletenessReport {
    pub passed: bool,
    /// Max entrywise `|Σ A†A - I|`.
    pub deviation: f64,
}

/// One branch of a selective measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementOutcome {
    pub probability: f64,
    /// Normalized post-measurement state, or `None` when the outcome's
    /// probability is below [`tol::NEGLIGIBLE_PROBABILITY`] and normalizing
    /// would divide 0 by 0.
    pub post_state: Option<DensityMatrix>,
}

pub fn povm_elements(k: &KrausSet) -> Vec<SquareMatrix> {
    k.ops.iter().map(|a| &qlinalg::adjoint(a) * a).collect()
}

pub fn validate_completeness(k: &KrausSet) -> CompletenessReport {
    let sum = povm_elements(k)
        .iter()
        .fold(SquareMatrix::zeros(k.dim), |acc, e| &acc + e);
    let deviation = sum
        .max_abs_diff(&SquareMatrix::identity(k.dim))
        .expect("povm elements share the set dimension");
    CompletenessReport {
        passed: deviation <= tol::COMPLETENESS,
        deviation,
    }
}

/// Outcome-averaged evolution `ρ ↦ Σ A_n ρ A_n†`.
pub fn apply_unselective(k: &KrausSet, rho: &DensityMatrix) -> Result<DensityMatrix, ChannelError> {
    k.ensure_applicable(rho)?;
    let mut out = SquareMatrix::zeros(k.dim);
    for a in &k.ops {
        out = &out + &qlinalg::sandwich(a, rho.matrix())?;
    }
    Ok(qstate::density_unchecked(out))
}

/// Born-rule probabilities `Tr(A_n†A_n ρ)` and normalized branch states, in Kraus order.
pub fn measure_selective(k: &KrausSet, rho: &DensityMatrix) -> Result<Vec<MeasurementOutcome>, ChannelError> {
    k.ensure_applicable(rho)?;
    k.ops
        .iter()
        .map(|a| {
            let branch = qlinalg::sandwich(a, rho.matrix())?;
            let probability = qstate::real_trace(&branch).max(0.0);
            let post_state = (probability >= tol::NEGLIGIBLE_PROBABILITY)
                .then(|| qstate::density_unchecked(branch.scale_real(1.0 / probability)));
            Ok(MeasurementOutcome {
                probability,
                post_state,
            })
        })
        .collect()
}

fn check_strength(name: &'static str, value: f64) -> Result<(), ChannelError> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(ChannelError::StrengthOutOfRange { name, value })
    }
}

/// Energy-importing measurement with strength `P`.
pub fn first_channel(p: f64) -> Result<KrausSet, ChannelError> {
    check_strength("P", p)?;
    let m1 = SquareMatrix::from_diagonal_real(&[(1.0 - p).sqrt(), 1.0]);
    let m2 = SquareMatrix::ket_bra(2, 1, 0, p.sqrt());
    KrausSet::new(format!("first(P={p})"), vec![m1, m2])
}

/// Work-extracting measurement with strength `q`.
pub fn second_channel(q: f64) -> Result<KrausSet, ChannelError> {
    check_strength("q", q)?;
    let n1 = SquareMatrix::from_diagonal_real(&[1.0, (1.0 - q).sqrt()]);
    let n2 = SquareMatrix::ket_bra(2, 0, 1, q.sqrt());
    KrausSet::new(format!("second(q={q})"), vec![n1, n2])
}

/// Smallest first-channel strength with an isentropic partner, `(1 - e^{-b})/2`.
pub fn isentropic_threshold(b: f64) -> f64 {
    -0.5 * (-b).exp_m1()
}

/// Second-channel strength that swaps the populations left by
/// `first_channel(p)` acting on the Gibbs state at inverse temperature `b`.
///
/// `q = (2P e^{b/2} - 2 sinh(b/2)) / (e^{-b/2} + P e^{b/2})`, evaluated after
/// dividing through by `e^{b/2}` as `(2P - 1 + e^{-b}) / (e^{-b} + P)`.
pub fn isentropic_strength(p: f64, b: f64) -> Result<f64, ChannelError> {
    check_strength("P", p)?;
    let threshold = isentropic_threshold(b);
    if p < threshold - tol::STRENGTH_THRESHOLD {
        return Err(ChannelError::NoIsentropicPartner { p, threshold });
    }
    let boltzmann = (-b).exp();
    let q = (2.0 * (p - threshold)) / (boltzmann + p);
    Ok(q.clamp(0.0, 1.0))
}
