//! Numeric-vs-closed-form verification suite behind `qmengine verify`.
//!
//! Every check compares an observed value against an expected one at a fixed
//! tolerance from [`crate::tol`]. Failures are collected, never thrown.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use crate::channels::{self, KrausSet};
use crate::engine::{self, CycleMode, CycleParams, EnergyLedger, EngineError, StrokeName};
use crate::qlinalg::SquareMatrix;
use crate::qstate::{self, DensityMatrix, Hamiltonian, ThermalParams};
use crate::tol;

/// Grid swept by the suite.
#[derive(Debug, Clone, PartialEq)]
pub struct VerifyGrid {
    pub b: Vec<f64>,
    pub gamma: Vec<f64>,
    pub r: Vec<f64>,
}

impl Default for VerifyGrid {
    fn default() -> Self {
        Self {
            b: vec![0.1, std::f64::consts::LN_2, 1.0, 5.0],
            gamma: vec![0.5, 0.6, 0.75, 0.9, 1.0],
            r: vec![1.0, 2.0, 5.0],
        }
    }
}

/// Fault injected into every numeric ledger before checking, to prove the
/// suite can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Perturbation {
    QIn,
    QOut,
    WApi,
    WApii,
    Delta,
    WExt,
    Eta,
}

impl Perturbation {
    pub const SHIFT: f64 = 0.1;

    pub fn apply(self, ledger: &mut EnergyLedger) {
        let field = match self {
            Perturbation::QIn => &mut ledger.q_in,
            Perturbation::QOut => &mut ledger.q_out,
            Perturbation::WApi => &mut ledger.w_api,
            Perturbation::WApii => &mut ledger.w_apii,
            Perturbation::Delta => &mut ledger.delta,
            Perturbation::WExt => &mut ledger.w_ext,
            Perturbation::Eta => &mut ledger.eta,
        };
        *field += Self::SHIFT;
    }
}

impl FromStr for Perturbation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.to_ascii_lowercase().replace('_', "").as_str() {
            "qin" => Perturbation::QIn,
            "qout" => Perturbation::QOut,
            "wapi" => Perturbation::WApi,
            "wapii" => Perturbation::WApii,
            "delta" => Perturbation::Delta,
            "wext" => Perturbation::WExt,
            "eta" => Perturbation::Eta,
            other => {
                return Err(format!(
                    "unknown perturbation '{other}' (qin, qout, wapi, wapii, delta, wext, eta)"
                ))
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckFailure {
    pub check: String,
    pub params: String,
    pub observed: f64,
    pub expected: f64,
    pub tolerance: f64,
}

impl fmt::Display for CheckFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} [{}]: observed {:.15e}, expected {:.15e}, tolerance {:e}",
            self.check, self.params, self.observed, self.expected, self.tolerance
        )
    }
}

#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub checks_run: usize,
    pub failures: Vec<CheckFailure>,
    pub elapsed: Duration,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Default)]
struct Checker {
    checks_run: usize,
    failures: Vec<CheckFailure>,
}

impl Checker {
    fn close(&mut self, check: &str, params: &str, observed: f64, expected: f64, tolerance: f64) {
        self.checks_run += 1;
        let ok = (observed - expected).abs() <= tolerance;
        if !ok {
            self.fail(check, params, observed, expected, tolerance);
        }
    }

    /// Passes when `observed <= bound`.
    fn at_most(&mut self, check: &str, params: &str, observed: f64, bound: f64) {
        self.checks_run += 1;
        if observed.is_nan() || observed > bound {
            self.fail(check, params, observed, bound, 0.0);
        }
    }

    fn holds(&mut self, check: &str, params: &str, ok: bool) {
        self.checks_run += 1;
        if !ok {
            self.fail(check, params, f64::NAN, f64::NAN, 0.0);
        }
    }

    fn fail(&mut self, check: &str, params: &str, observed: f64, expected: f64, tolerance: f64) {
        self.failures.push(CheckFailure {
            check: check.to_string(),
            params: params.to_string(),
            observed,
            expected,
            tolerance,
        });
    }

    fn ledger<T>(&mut self, check: &str, params: &str, r: Result<T, EngineError>) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                self.checks_run += 1;
                self.fail(&format!("{check}: {e}"), params, f64::NAN, f64::NAN, 0.0);
                None
            }
        }
    }
}

fn label(mode: CycleMode, b: f64, gamma: f64, r: f64) -> String {
    format!("mode={} b={b} gamma={gamma} r={r}", mode.short_name())
}

fn stroke(l: &EnergyLedger, name: StrokeName) -> &engine::StrokeRecord {
    l.stroke(name).expect("stroke recorded by every cycle of this mode")
}

/// Runs every check on `grid`, optionally with a fault injected.
pub fn run_verify(grid: &VerifyGrid, perturb: Option<Perturbation>) -> VerifyReport {
    let start = Instant::now();
    let mut c = Checker::default();
    let numeric = |p: &CycleParams| -> Result<EnergyLedger, EngineError> {
        let mut l = engine::run_numeric(p)?;
        if let Some(f) = perturb {
            f.apply(&mut l);
        }
        Ok(l)
    };

    for &b in &grid.b {
        check_special_points(&mut c, b, &numeric);
        for &gamma in &grid.gamma {
            check_three_stroke(&mut c, b, gamma, &numeric);
            for &r in &grid.r {
                check_five_stroke(&mut c, b, gamma, r, &numeric);
            }
        }
        check_monotone_efficiency(&mut c, b, grid, &numeric);
    }

    VerifyReport {
        checks_run: c.checks_run,
        failures: c.failures,
        elapsed: start.elapsed(),
    }
}

fn check_kraus(c: &mut Checker, params: &str, k: &KrausSet) {
    let report = channels::validate_completeness(k);
    c.at_most(
        &format!("completeness {}", k.label()),
        params,
        report.deviation,
        tol::COMPLETENESS,
    );
}

fn check_state(c: &mut Checker, params: &str, s: &engine::StrokeRecord) {
    let tag = format!("{}", s.name);
    let valid = DensityMatrix::new(s.state_after.matrix().clone()).is_ok();
    c.holds(&format!("density matrix valid after {tag}"), params, valid);
    c.at_most(
        &format!("no coherence after {tag}"),
        params,
        s.state_after.max_coherence(),
        tol::COHERENCE,
    );
    match qstate::mean_energy(&s.state_after, &s.hamiltonian_after) {
        Ok(e) => c.close(
            &format!("energy record after {tag}"),
            params,
            s.energy_after,
            e,
            tol::IDENTITY,
        ),
        Err(_) => c.holds(&format!("energy defined after {tag}"), params, false),
    }
}

fn compare_ledgers(c: &mut Checker, check: &str, params: &str, a: &EnergyLedger, b: &EnergyLedger, tolerance: f64) {
    let expected = b.scalar_entries();
    let observed = a.scalar_entries();
    c.holds(
        &format!("{check}: same entries"),
        params,
        expected.len() == observed.len(),
    );
    for ((name, x), (_, y)) in observed.iter().zip(&expected) {
        c.close(&format!("{check}: {name}"), params, *x, *y, tolerance);
    }
}

/// Shared per-ledger checks for realizable numeric cycles.
fn check_numeric_ledger(c: &mut Checker, params: &str, l: &EnergyLedger) {
    for s in &l.strokes {
        check_state(c, params, s);
    }
    c.close(
        "bookkeeping w_ext = q_in + q_out",
        params,
        l.w_ext,
        l.q_in + l.q_out,
        tol::IDENTITY,
    );
    let qmi = stroke(l, StrokeName::Qmi);
    let qmii = stroke(l, StrokeName::Qmii);
    c.close(
        "entropy QMI = QMII",
        params,
        qmii.entropy_after,
        qmi.entropy_after,
        tol::IDENTITY,
    );
    let before = qmi.state_after.populations();
    let after = qmii.state_after.populations();
    c.close("population swap |0>", params, after[0], before[1], tol::IDENTITY);
    c.close("population swap |1>", params, after[1], before[0], tol::IDENTITY);
    c.at_most("q_in >= 0", params, -l.q_in, tol::IDENTITY);
    c.at_most("q_out <= 0 (dissipation)", params, l.q_out, tol::IDENTITY);
    c.at_most("w_ext >= 0", params, -l.w_ext, tol::IDENTITY);
    c.at_most("eta <= 1", params, l.eta - 1.0, tol::IDENTITY);
    c.at_most("eta >= 0", params, -l.eta, tol::IDENTITY);
    if let Some(q) = l.q_used {
        match channels::second_channel(q) {
            Ok(k) => check_kraus(c, params, &k),
            Err(_) => c.holds("second channel strength in [0, 1]", params, false),
        }
    }
}

fn check_special_points(c: &mut Checker, b: f64, numeric: &dyn Fn(&CycleParams) -> Result<EnergyLedger, EngineError>) {
    // γ = 1/2: the first channel leaves the maximally mixed state
    let params = label(CycleMode::ThreeStroke, b, 0.5, 1.0);
    let run = CycleParams::three_stroke(b, 0.5).and_then(|p| numeric(&p));
    if let Some(l) = c.ledger("three-stroke gamma=1/2", &params, run) {
        let qmi = stroke(&l, StrokeName::Qmi);
        let d = qstate::trace_distance(&qmi.state_after, &DensityMatrix::maximally_mixed(2)).unwrap_or(f64::NAN);
        c.at_most("maximally mixed after QMI at gamma=1/2", &params, d, tol::IDENTITY);
        c.close("E^QMI = 0 at gamma=1/2", &params, qmi.energy_after, 0.0, tol::IDENTITY);
        c.close("eta = 0 at gamma=1/2", &params, l.eta, 0.0, tol::ORACLE);
    }

    // γ = 1, i.e. P = 1 - e^{-b}: entropy back to thermal, Q_in = tanh(b/2)
    let params = label(CycleMode::ThreeStroke, b, 1.0, 1.0);
    let run = CycleParams::three_stroke(b, 1.0).and_then(|p| numeric(&p));
    if let Some(l) = c.ledger("three-stroke gamma=1", &params, run) {
        let s_th = stroke(&l, StrokeName::Tp).entropy_after;
        let s_m = stroke(&l, StrokeName::Qmi).entropy_after;
        c.close("S(QMI) = S(thermal) at P = 1 - e^-b", &params, s_m, s_th, tol::IDENTITY);
        c.close(
            "Q_in = tanh(b/2) at P = 1 - e^-b",
            &params,
            l.q_in,
            (0.5 * b).tanh(),
            tol::IDENTITY,
        );
        c.close("eta = 1 at gamma=1", &params, l.eta, 1.0, tol::ORACLE);
        c.close("q_out = 0 at gamma=1", &params, l.q_out, 0.0, tol::IDENTITY);
    }
}

fn check_three_stroke(
    c: &mut Checker,
    b: f64,
    gamma: f64,
    numeric: &dyn Fn(&CycleParams) -> Result<EnergyLedger, EngineError>,
) {
    let params = label(CycleMode::ThreeStroke, b, gamma, 1.0);
    let Some(p) = c.ledger("three-stroke parameters", &params, CycleParams::three_stroke(b, gamma)) else {
        return;
    };
    match channels::first_channel(p.strength()) {
        Ok(k) => {
            check_kraus(c, &params, &k);
            check_selective_sum(c, &params, &k, b);
        }
        Err(_) => c.holds("first channel strength in [0, 1]", &params, false),
    }
    let Some(analytic) = c.ledger("analytic three-stroke", &params, engine::analytic_three_stroke(&p)) else {
        return;
    };
    if gamma > 0.0 {
        c.close(
            "analytic eta = 2 - 1/gamma",
            &params,
            analytic.eta,
            2.0 - 1.0 / gamma,
            tol::ORACLE,
        );
    }
    if !(0.5..=1.0).contains(&gamma) {
        c.holds(
            "analytic flagged out of range",
            &params,
            !analytic.validity.within_bounds(),
        );
        c.holds(
            "numeric refuses gamma outside [1/2, 1]",
            &params,
            matches!(engine::run_numeric(&p), Err(EngineError::BoundViolation { .. })),
        );
        return;
    }
    let Some(l) = c.ledger("numeric three-stroke", &params, numeric(&p)) else {
        return;
    };
    check_numeric_ledger(c, &params, &l);
    c.close(
        "numeric eta = 2 - 1/gamma",
        &params,
        l.eta,
        2.0 - 1.0 / gamma,
        tol::ORACLE,
    );
    compare_ledgers(c, "numeric vs analytic", &params, &l, &analytic, tol::ORACLE);
}

/// Outcome-weighted selective states must rebuild the unselective state.
fn check_selective_sum(c: &mut Checker, params: &str, k: &KrausSet, b: f64) {
    let h = Hamiltonian::qubit(1.0).expect("unit spacing");
    let Ok(t) = ThermalParams::new(b) else { return };
    let rho = qstate::gibbs_state(&h, t);
    let (Ok(outcomes), Ok(avg)) = (
        channels::measure_selective(k, &rho),
        channels::apply_unselective(k, &rho),
    ) else {
        c.holds("selective measurement applies", params, false);
        return;
    };
    let total: f64 = outcomes.iter().map(|o| o.probability).sum();
    c.close("selective probabilities sum to 1", params, total, 1.0, tol::IDENTITY);
    let mut rebuilt = SquareMatrix::zeros(k.dim());
    for o in &outcomes {
        if let Some(s) = &o.post_state {
            rebuilt = &rebuilt + &s.matrix().scale_real(o.probability);
        }
    }
    let dev = rebuilt.max_abs_diff(avg.matrix()).unwrap_or(f64::NAN);
    c.at_most("selective outcomes average to unselective state", params, dev, 1e-13);
}

fn check_five_stroke(
    c: &mut Checker,
    b: f64,
    gamma: f64,
    r: f64,
    numeric: &dyn Fn(&CycleParams) -> Result<EnergyLedger, EngineError>,
) {
    let params = label(CycleMode::FiveStroke, b, gamma, r);
    let Some(p) = c.ledger("five-stroke parameters", &params, CycleParams::five_stroke(b, gamma, r)) else {
        return;
    };
    let Some(analytic) = c.ledger("analytic five-stroke", &params, engine::analytic_five_stroke(&p)) else {
        return;
    };
    let expected_eta = 1.0 + (gamma - 1.0) / (r * gamma);
    if gamma > 0.0 {
        c.close(
            "analytic eta = 1 + (gamma-1)/(r gamma)",
            &params,
            analytic.eta,
            expected_eta,
            tol::ORACLE,
        );
    }
    c.at_most(
        "analytic first-law residual",
        &params,
        engine::first_law_residual(&analytic).map_or(f64::NAN, f64::abs),
        tol::IDENTITY,
    );
    if !(0.5..=1.0).contains(&gamma) {
        let refused = matches!(
            engine::run_numeric(&p),
            Err(EngineError::Unrealizable { .. } | EngineError::BoundViolation { .. })
        );
        c.holds("numeric refuses unrealizable gamma", &params, refused);
        return;
    }
    let Some(l) = c.ledger("numeric five-stroke", &params, numeric(&p)) else {
        return;
    };
    check_numeric_ledger(c, &params, &l);
    c.at_most(
        "first-law residual",
        &params,
        engine::first_law_residual(&l).map_or(f64::NAN, f64::abs),
        tol::IDENTITY,
    );
    c.close(
        "numeric eta = 1 + (gamma-1)/(r gamma)",
        &params,
        l.eta,
        expected_eta,
        tol::ORACLE,
    );
    compare_ledgers(c, "numeric vs analytic", &params, &l, &analytic, tol::ORACLE);

    let s = |name| stroke(&l, name).entropy_after;
    c.holds(
        "API leaves entropy unchanged",
        &params,
        s(StrokeName::Api) == s(StrokeName::Tp),
    );
    c.holds(
        "APII leaves entropy unchanged",
        &params,
        s(StrokeName::Apii) == s(StrokeName::Qmii),
    );

    if let Ok(three_params) = CycleParams::three_stroke(b, gamma) {
        if let Some(three) = c.ledger("numeric three-stroke", &params, numeric(&three_params)) {
            let s3 = stroke(&three, StrokeName::Qmi).entropy_after;
            c.close(
                "entropy independent of r",
                &params,
                s(StrokeName::Qmi),
                s3,
                tol::IDENTITY,
            );
            if r == 1.0 {
                compare_ledgers(c, "r = 1 reduces to three-stroke", &params, &l, &three, tol::IDENTITY);
            }
        }
    }
}

fn check_monotone_efficiency(
    c: &mut Checker,
    b: f64,
    grid: &VerifyGrid,
    numeric: &dyn Fn(&CycleParams) -> Result<EnergyLedger, EngineError>,
) {
    let mut gammas: Vec<f64> = grid.gamma.iter().copied().filter(|g| (0.5..=1.0).contains(g)).collect();
    gammas.sort_by(f64::total_cmp);
    let mut series: Vec<(CycleMode, f64)> = vec![(CycleMode::ThreeStroke, 1.0)];
    series.extend(grid.r.iter().map(|&r| (CycleMode::FiveStroke, r)));
    for (mode, r) in series {
        let etas: Vec<f64> = gammas
            .iter()
            .filter_map(|&g| CycleParams::new(mode, b, g, r).ok())
            .filter_map(|p| numeric(&p).ok())
            .map(|l| l.eta)
            .collect();
        for w in etas.windows(2) {
            c.at_most(
                "eta nondecreasing in gamma",
                &format!("mode={} b={b} r={r}", mode.short_name()),
                w[0] - w[1],
                tol::IDENTITY,
            );
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_is_clean() {
        let report = run_verify(&VerifyGrid::default(), None);
        for f in &report.failures {
            eprintln!("{f}");
        }
        assert!(report.passed());
        assert!(report.checks_run > 500);
    }

    #[test]
    fn every_perturbation_is_caught() {
        for name in ["qin", "qout", "wapi", "wapii", "delta", "wext", "eta"] {
            let p: Perturbation = name.parse().unwrap();
            let report = run_verify(&VerifyGrid::default(), Some(p));
            assert!(!report.passed(), "{name} went unnoticed");
        }
    }

    #[test]
    fn qout_perturbation_breaks_first_law() {
        let report = run_verify(&VerifyGrid::default(), Some(Perturbation::QOut));
        assert!(report.failures.iter().any(|f| f.check == "first-law residual"));
    }

    #[test]
    fn checks_scale_with_grid() {
        let small = VerifyGrid {
            b: vec![0.1, 5.0],
            gamma: vec![0.5, 1.0],
            r: vec![1.0, 2.0, 5.0],
        };
        let large = VerifyGrid {
            b: vec![0.1, 1.0, 5.0],
            gamma: vec![0.5, 0.7, 1.0],
            ..small.clone()
        };
        let a = run_verify(&small, None);
        let b = run_verify(&large, None);
        assert!(a.passed() && b.passed());
        assert!(b.checks_run > a.checks_run);
    }

    #[test]
    fn out_of_range_gammas_are_handled() {
        let grid = VerifyGrid {
            b: vec![1.0],
            gamma: vec![0.0, 0.2, 0.4, 0.8],
            r: vec![1.0, 2.0, 5.0],
        };
        let report = run_verify(&grid, None);
        for f in &report.failures {
            eprintln!("{f}");
        }
        assert!(report.passed());
    }

    #[test]
    fn unknown_perturbation() {
        assert!("heat".parse::<Perturbation>().is_err());
    }
}
