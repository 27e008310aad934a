//! Engine cycles driven by the two measurement channels.
//!
//! Three-stroke cycle: thermalize (TP), import energy with the first channel
//! (QMI), extract work isentropically with the second channel (QMII), and
//! thermalize again.
//!
//! Five-stroke cycle: TP, then an adiabat raising the level spacing from 1 to
//! `r` (API), QMI and QMII at spacing `r`, an adiabat back to spacing 1
//! (APII), and TP.
//!
//! Every cycle can be evaluated two ways. The numeric route evolves density
//! matrices through the Kraus channels and reads energies off `Tr(Hρ)`; the
//! analytic route evaluates closed-form expressions for the same quantities.
//! The two share nothing but the strength `P = γ(1 - e^{-b})`, which is what
//! makes them usable as oracles for each other.
//!
//! Sign conventions follow the ledger definitions literally:
//!
//! | field    | three-stroke      | five-stroke          |
//! |----------|-------------------|----------------------|
//! | `q_in`   | `E^QMI - E^TP`    | `E^QMI - E^API`      |
//! | `q_out`  | `E^TP - E^QMII`   | `E^TP - E^APII`      |
//! | `w_api`  | 0                 | `E^TP - E^API`       |
//! | `w_apii` | 0                 | `E^QMII - E^APII`    |
//! | `delta`  | `E^QMI - E^QMII`  | `E^QMI - E^QMII`     |
//! | `w_ext`  | `q_in + q_out`    | `q_in + q_out`       |

use std::fmt;

use thiserror::Error;

use crate::channels::{self, ChannelError};
use crate::qstate::{self, DensityMatrix, Hamiltonian, StateError, ThermalParams};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error("invalid cycle parameters: {0}")]
    InvalidParams(String),
    #[error("invalid cycle: gamma = {gamma} violates {gamma_min} <= gamma <= {gamma_max} ({mode} cycle)")]
    BoundViolation {
        mode: CycleMode,
        gamma: f64,
        gamma_min: f64,
        gamma_max: f64,
    },
    #[error("isentropic channel unrealizable: gamma = {gamma} < 1/2 gives a negative second-channel strength")]
    Unrealizable { gamma: f64 },
    #[error("operation requires a {expected} ledger")]
    WrongMode { expected: CycleMode },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CycleMode {
    ThreeStroke,
    FiveStroke,
}

impl CycleMode {
    /// Short name used on the command line and in CSV output.
    pub fn short_name(self) -> &'static str {
        match self {
            CycleMode::ThreeStroke => "three",
            CycleMode::FiveStroke => "five",
        }
    }
}

impl fmt::Display for CycleMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CycleMode::ThreeStroke => "three-stroke",
            CycleMode::FiveStroke => "five-stroke",
        })
    }
}

impl std::str::FromStr for CycleMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "three" | "3" | "three-stroke" => Ok(CycleMode::ThreeStroke),
            "five" | "5" | "five-stroke" => Ok(CycleMode::FiveStroke),
            other => Err(format!("unknown cycle mode '{other}' (expected 'three' or 'five')")),
        }
    }
}

/// Inverse temperature `b`, strength fraction `γ`, frequency ratio `r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleParams {
    b: f64,
    gamma: f64,
    r: f64,
    mode: CycleMode,
}

impl CycleParams {
    pub fn new(mode: CycleMode, b: f64, gamma: f64, r: f64) -> Result<Self, EngineError> {
        ThermalParams::new(b)?;
        if !(0.0..=1.0).contains(&gamma) {
            return Err(EngineError::InvalidParams(format!(
                "gamma = {gamma} must lie in [0, 1]"
            )));
        }
        if !(r.is_finite() && r >= 1.0) {
            return Err(EngineError::InvalidParams(format!("r = {r} must be finite and >= 1")));
        }
        if mode == CycleMode::ThreeStroke && r != 1.0 {
            return Err(EngineError::InvalidParams(format!(
                "three-stroke cycle has no adiabats, r must be 1 (got {r})"
            )));
        }
        Ok(Self { b, gamma, r, mode })
    }

    pub fn three_stroke(b: f64, gamma: f64) -> Result<Self, EngineError> {
        Self::new(CycleMode::ThreeStroke, b, gamma, 1.0)
    }

    pub fn five_stroke(b: f64, gamma: f64, r: f64) -> Result<Self, EngineError> {
        Self::new(CycleMode::FiveStroke, b, gamma, r)
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn mode(&self) -> CycleMode {
        self.mode
    }

    /// First-channel strength `P = γ(1 - e^{-b})`.
    pub fn strength(&self) -> f64 {
        -self.gamma * (-self.b).exp_m1()
    }

    fn thermal(&self) -> ThermalParams {
        ThermalParams::new(self.b).expect("validated at construction")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StrokeName {
    /// Thermalization.
    Tp,
    /// Adiabat raising the spacing to `r`.
    Api,
    /// First measurement channel.
    Qmi,
    /// Second, isentropic measurement channel.
    Qmii,
    /// Adiabat returning the spacing to 1.
    Apii,
}

impl fmt::Display for StrokeName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StrokeName::Tp => "TP",
            StrokeName::Api => "API",
            StrokeName::Qmi => "QMI",
            StrokeName::Qmii => "QMII",
            StrokeName::Apii => "APII",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrokeRecord {
    pub name: StrokeName,
    pub state_after: DensityMatrix,
    pub hamiltonian_after: Hamiltonian,
    /// Units of ħω₀.
    pub energy_after: f64,
    /// Nats.
    pub entropy_after: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LedgerSource {
    Numeric,
    Analytic,
}

impl fmt::Display for LedgerSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LedgerSource::Numeric => "numeric",
            LedgerSource::Analytic => "analytic",
        })
    }
}

/// Where a parameter point sits relative to the engine's operating range.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Validity {
    /// Inside the γ bounds and realizable by both channels.
    Valid,
    /// Inside the five-stroke γ bounds but below 1/2, where the second
    /// channel would need a negative strength. Only the closed forms exist.
    FormulaOnly,
    /// Outside the γ bounds of the mode.
    OutOfRange,
}

impl Validity {
    pub fn within_bounds(self) -> bool {
        !matches!(self, Validity::OutOfRange)
    }
}

/// Per-stroke states and energies plus the heat/work balance of one cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyLedger {
    pub params: CycleParams,
    pub source: LedgerSource,
    pub validity: Validity,
    pub strokes: Vec<StrokeRecord>,
    pub q_in: f64,
    pub q_out: f64,
    pub w_api: f64,
    pub w_apii: f64,
    pub delta: f64,
    pub w_ext: f64,
    pub eta: f64,
    /// Set when `q_in == 0` and `eta` was defined as 0.
    pub eta_undefined: bool,
    /// Strength of the second channel; `None` where it does not exist.
    pub q_used: Option<f64>,
}

impl EnergyLedger {
    pub fn stroke(&self, name: StrokeName) -> Option<&StrokeRecord> {
        self.strokes.iter().find(|s| s.name == name)
    }

    /// `q_out + q_in - w_api - delta - w_apii`, without a mode check.
    pub fn balance_residual(&self) -> f64 {
        self.q_out + self.q_in - self.w_api - self.delta - self.w_apii
    }

    /// Named scalar entries, in a fixed order, for entry-by-entry comparison.
    pub fn scalar_entries(&self) -> Vec<(&'static str, f64)> {
        let mut v = vec![
            ("q_in", self.q_in),
            ("q_out", self.q_out),
            ("w_api", self.w_api),
            ("w_apii", self.w_apii),
            ("delta", self.delta),
            ("w_ext", self.w_ext),
            ("eta", self.eta),
        ];
        if let Some(q) = self.q_used {
            v.push(("q_used", q));
        }
        for name in [StrokeName::Qmi, StrokeName::Qmii] {
            if let Some(s) = self.stroke(name) {
                let (e, h) = match name {
                    StrokeName::Qmi => ("E_QMI", "S_QMI"),
                    _ => ("E_QMII", "S_QMII"),
                };
                v.push((e, s.energy_after));
                v.push((h, s.entropy_after));
            }
        }
        v
    }
}

/// Engine-valid γ range: `[1/2, 1]` for three strokes, `[1/(1+r), 1]` for five.
pub fn gamma_bounds(mode: CycleMode, r: f64) -> Result<(f64, f64), EngineError> {
    if !(r.is_finite() && r >= 1.0) {
        return Err(EngineError::InvalidParams(format!("r = {r} must be finite and >= 1")));
    }
    Ok(match mode {
        CycleMode::ThreeStroke => (0.5, 1.0),
        CycleMode::FiveStroke => (1.0 / (1.0 + r), 1.0),
    })
}

fn classify(p: &CycleParams) -> Validity {
    let (lo, hi) = gamma_bounds(p.mode, p.r).expect("validated at construction");
    if p.gamma < lo || p.gamma > hi {
        Validity::OutOfRange
    } else if p.gamma < 0.5 {
        Validity::FormulaOnly
    } else {
        Validity::Valid
    }
}

fn require_mode(p: &CycleParams, expected: CycleMode) -> Result<(), EngineError> {
    if p.mode == expected {
        Ok(())
    } else {
        Err(EngineError::WrongMode { expected })
    }
}

fn require_realizable(p: &CycleParams) -> Result<(), EngineError> {
    let (gamma_min, gamma_max) = gamma_bounds(p.mode, p.r)?;
    if p.gamma < gamma_min || p.gamma > gamma_max {
        return Err(EngineError::BoundViolation {
            mode: p.mode,
            gamma: p.gamma,
            gamma_min,
            gamma_max,
        });
    }
    if p.gamma < 0.5 {
        return Err(EngineError::Unrealizable { gamma: p.gamma });
    }
    Ok(())
}

fn efficiency(w_ext: f64, q_in: f64) -> (f64, bool) {
    if q_in == 0.0 {
        (0.0, true)
    } else {
        (w_ext / q_in, false)
    }
}

fn record(name: StrokeName, state: DensityMatrix, h: &Hamiltonian) -> Result<StrokeRecord, EngineError> {
    let energy_after = qstate::mean_energy(&state, h)?;
    let entropy_after = qstate::von_neumann_entropy(&state);
    Ok(StrokeRecord {
        name,
        state_after: state,
        hamiltonian_after: h.clone(),
        energy_after,
        entropy_after,
    })
}

/// States after TP, QMI and QMII, obtained by Kraus evolution.
struct NumericStates {
    thermal: DensityMatrix,
    measured: DensityMatrix,
    extracted: DensityMatrix,
    q: f64,
}

fn evolve(p: &CycleParams) -> Result<NumericStates, EngineError> {
    let bare = Hamiltonian::qubit(1.0)?;
    let thermal = qstate::gibbs_state(&bare, p.thermal());
    let strength = p.strength();
    let measured = channels::apply_unselective(&channels::first_channel(strength)?, &thermal)?;
    // populations still carry the thermal occupations at b, whatever the spacing
    let q = channels::isentropic_strength(strength, p.b)?;
    let extracted = channels::apply_unselective(&channels::second_channel(q)?, &measured)?;
    Ok(NumericStates {
        thermal,
        measured,
        extracted,
        q,
    })
}

/// Three-stroke cycle by density-matrix evolution.
pub fn run_three_stroke_numeric(p: &CycleParams) -> Result<EnergyLedger, EngineError> {
    require_mode(p, CycleMode::ThreeStroke)?;
    require_realizable(p)?;
    let h = Hamiltonian::qubit(1.0)?;
    let s = evolve(p)?;
    let strokes = vec![
        record(StrokeName::Tp, s.thermal, &h)?,
        record(StrokeName::Qmi, s.measured, &h)?,
        record(StrokeName::Qmii, s.extracted, &h)?,
    ];
    let e_th = strokes[0].energy_after;
    let e_m = strokes[1].energy_after;
    let e_n = strokes[2].energy_after;

    let q_in = e_m - e_th;
    let q_out = e_th - e_n;
    let w_ext = q_in + q_out;
    let (eta, eta_undefined) = efficiency(w_ext, q_in);
    Ok(EnergyLedger {
        params: *p,
        source: LedgerSource::Numeric,
        validity: Validity::Valid,
        strokes,
        q_in,
        q_out,
        w_api: 0.0,
        w_apii: 0.0,
        delta: e_m - e_n,
        w_ext,
        eta,
        eta_undefined,
        q_used: Some(s.q),
    })
}

/// Five-stroke cycle by density-matrix evolution. Adiabats relabel the
/// Hamiltonian and leave populations untouched.
pub fn run_five_stroke_numeric(p: &CycleParams) -> Result<EnergyLedger, EngineError> {
    require_mode(p, CycleMode::FiveStroke)?;
    require_realizable(p)?;
    let bare = Hamiltonian::qubit(1.0)?;
    let raised = Hamiltonian::qubit(p.r)?;
    let s = evolve(p)?;
    let strokes = vec![
        record(StrokeName::Tp, s.thermal.clone(), &bare)?,
        record(StrokeName::Api, s.thermal, &raised)?,
        record(StrokeName::Qmi, s.measured, &raised)?,
        record(StrokeName::Qmii, s.extracted.clone(), &raised)?,
        record(StrokeName::Apii, s.extracted, &bare)?,
    ];
    let [e_th, e_api, e_qmi, e_qmii, e_apii] = [0, 1, 2, 3, 4].map(|k| strokes[k].energy_after);

    let q_in = e_qmi - e_api;
    let q_out = e_th - e_apii;
    let w_ext = q_in + q_out;
    let (eta, eta_undefined) = efficiency(w_ext, q_in);
    Ok(EnergyLedger {
        params: *p,
        source: LedgerSource::Numeric,
        validity: Validity::Valid,
        strokes,
        q_in,
        q_out,
        w_api: e_th - e_api,
        w_apii: e_qmii - e_apii,
        delta: e_qmi - e_qmii,
        w_ext,
        eta,
        eta_undefined,
        q_used: Some(s.q),
    })
}

pub fn run_numeric(p: &CycleParams) -> Result<EnergyLedger, EngineError> {
    match p.mode {
        CycleMode::ThreeStroke => run_three_stroke_numeric(p),
        CycleMode::FiveStroke => run_five_stroke_numeric(p),
    }
}

/// Closed-form quantities shared by both analytic cycles.
struct ClosedForm {
    /// `tanh(b/2)`
    tanh_half: f64,
    /// `P e^{b/2} / Z`, the population moved by the first channel.
    pumped: f64,
    /// Thermal ground population `e^{b/2}/Z`.
    ground: f64,
    p: f64,
}

impl ClosedForm {
    fn new(params: &CycleParams) -> Self {
        let b = params.b;
        let z = 2.0 * (0.5 * b).cosh();
        let ground = (0.5 * b).exp() / z;
        let p = params.strength();
        Self {
            tanh_half: (0.5 * b).tanh(),
            pumped: p * ground,
            ground,
            p,
        }
    }

    fn thermal_populations(&self) -> [f64; 2] {
        [self.ground, 1.0 - self.ground]
    }

    /// State after the first channel acting on the thermal state.
    fn measured_populations(&self) -> [f64; 2] {
        [(1.0 - self.p) * self.ground, (1.0 - self.ground) + self.pumped]
    }

    /// State after the isentropic second channel: the measured populations swapped.
    fn extracted_populations(&self) -> [f64; 2] {
        let [g, e] = self.measured_populations();
        [e, g]
    }

    /// Second-channel strength as the literal ratio
    /// `(2P e^{b/2} - 2 sinh(b/2)) / (e^{-b/2} + P e^{b/2})`.
    fn second_strength(&self, b: f64) -> f64 {
        let h = 0.5 * b;
        (2.0 * self.p * h.exp() - 2.0 * h.sinh()) / ((-h).exp() + self.p * h.exp())
    }
}

fn binary_entropy(pops: [f64; 2]) -> f64 {
    pops.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.ln()).sum()
}

fn analytic_record(
    name: StrokeName,
    pops: [f64; 2],
    frequency: f64,
    energy_after: f64,
) -> Result<StrokeRecord, EngineError> {
    Ok(StrokeRecord {
        name,
        state_after: DensityMatrix::from_populations(&pops)?,
        hamiltonian_after: Hamiltonian::qubit(frequency)?,
        energy_after,
        entropy_after: binary_entropy(pops),
    })
}

fn analytic_q(cf: &ClosedForm, p: &CycleParams, validity: Validity) -> Option<f64> {
    (validity == Validity::Valid).then(|| cf.second_strength(p.b).clamp(0.0, 1.0))
}

/// Three-stroke cycle from closed-form expressions. Evaluated for every
/// `γ ∈ [0, 1]`; `validity` marks points outside the engine range.
pub fn analytic_three_stroke(p: &CycleParams) -> Result<EnergyLedger, EngineError> {
    require_mode(p, CycleMode::ThreeStroke)?;
    let cf = ClosedForm::new(p);
    let validity = classify(p);
    let t = cf.tanh_half;

    let e_th = -0.5 * t;
    let e_m = -0.5 * t + cf.pumped;
    let e_n = 0.5 * t - cf.pumped;
    let q_in = cf.pumped;
    let delta = 2.0 * cf.pumped - t;
    let q_out = cf.pumped - t;
    let (eta, eta_undefined) = if p.gamma > 0.0 {
        (2.0 - 1.0 / p.gamma, false)
    } else {
        (0.0, true)
    };

    let strokes = vec![
        analytic_record(StrokeName::Tp, cf.thermal_populations(), 1.0, e_th)?,
        analytic_record(StrokeName::Qmi, cf.measured_populations(), 1.0, e_m)?,
        analytic_record(StrokeName::Qmii, cf.extracted_populations(), 1.0, e_n)?,
    ];
    Ok(EnergyLedger {
        params: *p,
        source: LedgerSource::Analytic,
        validity,
        strokes,
        q_in,
        q_out,
        w_api: 0.0,
        w_apii: 0.0,
        delta,
        w_ext: delta,
        eta,
        eta_undefined,
        q_used: analytic_q(&cf, p, validity),
    })
}

/// Five-stroke cycle from closed-form expressions.
pub fn analytic_five_stroke(p: &CycleParams) -> Result<EnergyLedger, EngineError> {
    require_mode(p, CycleMode::FiveStroke)?;
    let cf = ClosedForm::new(p);
    let validity = classify(p);
    let t = cf.tanh_half;
    let r = p.r;
    let x = cf.pumped;

    let e_th = -0.5 * t;
    let e_api = -0.5 * r * t;
    let e_qmi = -0.5 * r * t + x * r;
    let e_qmii = 0.5 * r * t - x * r;
    let e_apii = 0.5 * t - x;

    let w_api = 0.5 * (r - 1.0) * t;
    let q_in = x * r;
    let delta = 2.0 * x * r - r * t;
    let w_apii = 0.5 * (r - 1.0) * t - x * (r - 1.0);
    let q_out = x - t;
    let w_ext = x * (1.0 + r) - t;
    let (eta, eta_undefined) = if p.gamma > 0.0 {
        // 1 + (γ-1)/(rγ) over a common denominator, which vanishes exactly
        // at γ = 1/(1+r) for small integer r
        (((1.0 + r) * p.gamma - 1.0) / (r * p.gamma), false)
    } else {
        (0.0, true)
    };

    let strokes = vec![
        analytic_record(StrokeName::Tp, cf.thermal_populations(), 1.0, e_th)?,
        analytic_record(StrokeName::Api, cf.thermal_populations(), r, e_api)?,
        analytic_record(StrokeName::Qmi, cf.measured_populations(), r, e_qmi)?,
        analytic_record(StrokeName::Qmii, cf.extracted_populations(), r, e_qmii)?,
        analytic_record(StrokeName::Apii, cf.extracted_populations(), 1.0, e_apii)?,
    ];
    Ok(EnergyLedger {
        params: *p,
        source: LedgerSource::Analytic,
        validity,
        strokes,
        q_in,
        q_out,
        w_api,
        w_apii,
        delta,
        w_ext,
        eta,
        eta_undefined,
        q_used: analytic_q(&cf, p, validity),
    })
}

pub fn run_analytic(p: &CycleParams) -> Result<EnergyLedger, EngineError> {
    match p.mode {
        CycleMode::ThreeStroke => analytic_three_stroke(p),
        CycleMode::FiveStroke => analytic_five_stroke(p),
    }
}

/// `Q^th + Q^QMI - W^API - Δ - W^APII` of a five-stroke ledger.
pub fn first_law_residual(ledger: &EnergyLedger) -> Result<f64, EngineError> {
    require_mode(&ledger.params, CycleMode::FiveStroke)?;
    Ok(ledger.balance_residual())
}
