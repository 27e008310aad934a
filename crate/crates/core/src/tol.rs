//! Numeric tolerances shared by the library, the verify suite and the tests.

/// Maximum entrywise deviation `|A - A†|` for a matrix to count as Hermitian.
pub const HERMITIAN: f64 = 1e-12;

/// Off-diagonal residual at which the Jacobi eigenvalue sweep stops.
pub const EIG_RESIDUAL: f64 = 1e-13;

/// Allowed deviation of a density-matrix trace from one.
pub const UNIT_TRACE: f64 = 1e-12;

/// Eigenvalues down to `-PSD_SLACK` are accepted as zero.
pub const PSD_SLACK: f64 = 1e-12;

/// Maximum deviation of `Σ A†A` from the identity.
pub const COMPLETENESS: f64 = 1e-12;

/// Eigenvalues below this contribute nothing to the von Neumann entropy.
pub const ENTROPY_CUTOFF: f64 = 1e-15;

/// Selective outcomes below this probability are not normalized.
pub const NEGLIGIBLE_PROBABILITY: f64 = 1e-15;

/// Largest imaginary part of `Tr(Hρ)` tolerated before it is treated as an error.
pub const ENERGY_IMAGINARY: f64 = 1e-10;

/// Agreement between numerically evolved and closed-form ledgers.
pub const ORACLE: f64 = 1e-10;

/// Bookkeeping identities (first law, entropy equality, population swap).
pub const IDENTITY: f64 = 1e-12;

/// Coherences that must stay exactly unpopulated.
pub const COHERENCE: f64 = 1e-14;

/// Slack on the lower strength threshold of the isentropic second channel.
pub const STRENGTH_THRESHOLD: f64 = 1e-12;
