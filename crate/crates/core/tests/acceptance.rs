//! Acceptance suite. Runs every criterion at its pinned tolerance, prints one
//! PASS/FAIL line per criterion and exits non-zero if any fails.

mod common;

use std::path::Path;
use std::process::Command;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qmengine::channels::{self, first_channel, second_channel, validate_completeness};
use qmengine::engine::{self, CycleParams, EnergyLedger, StrokeName};
use qmengine::qlinalg::{trace, SquareMatrix};
use qmengine::qstate::{self, DensityMatrix};

const LN2: f64 = std::f64::consts::LN_2;
const B_GRID: [f64; 4] = [0.1, LN2, 1.0, 5.0];
const GAMMA_GRID: [f64; 5] = [0.5, 0.6, 0.75, 0.9, 1.0];
const R_GRID: [f64; 3] = [1.0, 2.0, 5.0];

/// 0.5, 0.525, ..., 1.0
fn fine_gammas() -> Vec<f64> {
    (0..=20).map(|k| 0.5 + 0.025 * k as f64).collect()
}

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    failures: Vec<String>,
    worst: f64,
}

impl Outcome {
    fn new() -> Self {
        Self {
            failures: Vec::new(),
            worst: 0.0,
        }
    }

    fn close(&mut self, what: &str, observed: f64, expected: f64, tol: f64) {
        let err = (observed - expected).abs();
        self.worst = self.worst.max(err);
        if err.is_nan() || err > tol {
            self.failures.push(format!(
                "{what}: observed {observed:.17e}, expected {expected:.17e}, tol {tol:e}"
            ));
        }
    }

    fn within(&mut self, what: &str, value: f64, tol: f64) {
        self.close(what, value, 0.0, tol);
    }

    fn holds(&mut self, what: &str, ok: bool) {
        if !ok {
            self.failures.push(what.to_string());
        }
    }
}

fn three(b: f64, gamma: f64) -> EnergyLedger {
    engine::run_three_stroke_numeric(&CycleParams::three_stroke(b, gamma).unwrap()).unwrap()
}

fn five(b: f64, gamma: f64, r: f64) -> EnergyLedger {
    engine::run_five_stroke_numeric(&CycleParams::five_stroke(b, gamma, r).unwrap()).unwrap()
}

fn state_after(l: &EnergyLedger, name: StrokeName) -> &DensityMatrix {
    &l.stroke(name).unwrap().state_after
}

fn criterion_1() -> Outcome {
    let mut o = Outcome::new();
    for b in B_GRID {
        o.close(&format!("eta at gamma=1/2, b={b}"), three(b, 0.5).eta, 0.0, 1e-10);
        o.close(&format!("eta at gamma=1, b={b}"), three(b, 1.0).eta, 1.0, 1e-10);
    }
    o
}

fn criterion_2() -> Outcome {
    let mut o = Outcome::new();
    for b in B_GRID {
        for g in GAMMA_GRID {
            o.close(&format!("eta b={b} gamma={g}"), three(b, g).eta, 2.0 - 1.0 / g, 1e-10);
        }
    }
    o
}

fn criterion_3() -> Outcome {
    // exact arithmetic at b = ln 2, γ = 3/4: P = 3/8, Z = 3/√2, P e^{b/2}/Z = 1/4,
    // tanh(b/2) = 1/3, q = (√2/4)/(7√2/8) = 2/7
    let mut o = Outcome::new();
    let l = three(LN2, 0.75);
    o.close("q_in", l.q_in, 0.25, 1e-10);
    o.close("w_ext", l.w_ext, 1.0 / 6.0, 1e-10);
    o.close("q_out", l.q_out, -1.0 / 12.0, 1e-10);
    o.close("q", l.q_used.unwrap(), 2.0 / 7.0, 1e-10);
    o.close("eta", l.eta, 2.0 / 3.0, 1e-10);
    o
}

fn criterion_4() -> Outcome {
    let mut o = Outcome::new();
    for b in B_GRID {
        for g in fine_gammas() {
            let mut ledgers = vec![three(b, g)];
            ledgers.extend(R_GRID.iter().map(|&r| five(b, g, r)));
            for l in &ledgers {
                let tag = format!("b={b} gamma={g} r={}", l.params.r());
                let m = state_after(l, StrokeName::Qmi);
                let n = state_after(l, StrokeName::Qmii);
                o.close(
                    &format!("S(QMI) = S(QMII) {tag}"),
                    qstate::von_neumann_entropy(n),
                    qstate::von_neumann_entropy(m),
                    1e-12,
                );
                let (pm, pn) = (m.populations(), n.populations());
                o.close(&format!("swap |0> {tag}"), pn[0], pm[1], 1e-12);
                o.close(&format!("swap |1> {tag}"), pn[1], pm[0], 1e-12);
            }
        }
    }
    o
}

fn criterion_5() -> Outcome {
    let mut o = Outcome::new();
    let mixed = DensityMatrix::maximally_mixed(2);
    for b in B_GRID {
        for l in [three(b, 0.5), five(b, 0.5, 1.0)] {
            let qmi = l.stroke(StrokeName::Qmi).unwrap();
            let d = qstate::trace_distance(&qmi.state_after, &mixed).unwrap();
            o.within(&format!("trace distance to I/2, b={b}"), d, 1e-12);
            o.within(&format!("E^M, b={b}"), qmi.energy_after, 1e-12);
        }
    }
    o
}

fn criterion_6() -> Outcome {
    let mut o = Outcome::new();
    for b in B_GRID {
        let p = 1.0 - (-b).exp();
        let th = qstate::gibbs_state(
            &qstate::Hamiltonian::qubit(1.0).unwrap(),
            qstate::ThermalParams::new(b).unwrap(),
        );
        let m = channels::apply_unselective(&first_channel(p).unwrap(), &th).unwrap();
        o.close(
            &format!("S(rho^M) = S(rho^th), b={b}"),
            qstate::von_neumann_entropy(&m),
            qstate::von_neumann_entropy(&th),
            1e-12,
        );
        let l = three(b, 1.0);
        o.close(&format!("Q^M = tanh(b/2), b={b}"), l.q_in, (0.5 * b).tanh(), 1e-12);
    }
    o
}

fn criterion_7() -> Outcome {
    let mut o = Outcome::new();
    for b in B_GRID {
        for g in fine_gammas() {
            for r in R_GRID {
                let res = engine::first_law_residual(&five(b, g, r)).unwrap();
                o.within(&format!("residual b={b} gamma={g} r={r}"), res, 1e-12);
            }
        }
    }
    o
}

fn criterion_8() -> Outcome {
    let mut o = Outcome::new();
    for b in B_GRID {
        for g in fine_gammas() {
            for r in R_GRID {
                let expected = 1.0 + (g - 1.0) / (r * g);
                o.close(
                    &format!("eta b={b} gamma={g} r={r}"),
                    five(b, g, r).eta,
                    expected,
                    1e-10,
                );
            }
        }
        o.close(
            &format!("eta at gamma=1/2, r=2, b={b}"),
            five(b, 0.5, 2.0).eta,
            0.5,
            1e-10,
        );
    }
    for r in R_GRID.iter().copied().chain([3.0, 10.0]) {
        for b in B_GRID {
            let p = CycleParams::five_stroke(b, 1.0 / (1.0 + r), r).unwrap();
            let eta = engine::analytic_five_stroke(&p).unwrap().eta;
            // γ = 1/(1+r) gives (γ-1)/γ = -r, so η = 1 - 1 in exact arithmetic
            o.close(&format!("analytic eta at gamma_min, r={r}, b={b}"), eta, 0.0, 0.0);
        }
    }
    o
}

fn criterion_9() -> Outcome {
    let mut o = Outcome::new();
    for b in B_GRID {
        for g in fine_gammas() {
            let t = three(b, g);
            let f = five(b, g, 1.0);
            let (te, fe) = (t.scalar_entries(), f.scalar_entries());
            o.holds(&format!("entry count b={b} gamma={g}"), te.len() == fe.len());
            for ((name, x), (_, y)) in fe.iter().zip(&te) {
                o.close(&format!("{name} b={b} gamma={g}"), *x, *y, 1e-12);
            }
        }
    }
    o
}

fn criterion_10() -> Outcome {
    let mut o = Outcome::new();
    for b in B_GRID {
        for g in fine_gammas() {
            let p = -g * (-b).exp_m1();
            let k1 = first_channel(p).unwrap();
            o.within(
                &format!("first channel P={p}"),
                validate_completeness(&k1).deviation,
                1e-12,
            );
            let q = channels::isentropic_strength(p, b).unwrap();
            let k2 = second_channel(q).unwrap();
            o.within(
                &format!("second channel q={q}"),
                validate_completeness(&k2).deviation,
                1e-12,
            );
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_cafe);
    for i in 0..1000 {
        let dim = rng.gen_range(1..=3);
        let outcomes = rng.gen_range(1..=4);
        let k = common::random_kraus(&mut rng, dim, outcomes);
        o.within(
            &format!("random set {i} completeness"),
            validate_completeness(&k).deviation,
            1e-12,
        );
        let rho = common::random_state(&mut rng, dim);
        let out = channels::apply_unselective(&k, &rho).unwrap();
        o.close(&format!("random set {i} trace"), trace(out.matrix()).re, 1.0, 1e-13);
        let min_eig = out.eigenvalues()[0];
        o.holds(
            &format!("random set {i} PSD (min eigenvalue {min_eig:e})"),
            min_eig >= -1e-12,
        );

        let mut rebuilt = SquareMatrix::zeros(dim);
        for oc in channels::measure_selective(&k, &rho).unwrap() {
            if let Some(s) = oc.post_state {
                rebuilt = &rebuilt + &s.matrix().scale_real(oc.probability);
            }
        }
        o.within(
            &format!("random set {i} selective sum"),
            rebuilt.max_abs_diff(out.matrix()).unwrap(),
            1e-13,
        );
    }
    o
}

fn criterion_11() -> Outcome {
    let mut o = Outcome::new();
    let bin = env!("CARGO_BIN_EXE_qmengine");
    let status = Command::new(bin).arg("verify").output().expect("run qmengine verify");
    o.holds(
        &format!("verify exit status {:?}", status.status.code()),
        status.status.code() == Some(0),
    );

    let dir = tempfile::tempdir().unwrap();
    let run_sweep = |name: &str| -> Vec<u8> {
        let path = dir.path().join(name);
        let st = Command::new(bin)
            .args([
                "sweep",
                "--mode",
                "three",
                "--b-values",
                "0.1,0.6931471805599453,1,5",
                "--gamma-values",
                "0.5,0.6,0.75,0.9,1.0",
                "--out",
            ])
            .arg(&path)
            .status()
            .expect("run qmengine sweep");
        assert!(st.success());
        std::fs::read(&path).unwrap()
    };
    let first = run_sweep("a.csv");
    let second = run_sweep("b.csv");
    o.holds("sweep CSV byte-identical across runs", first == second);
    let golden = std::fs::read(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/sweep_three_stroke.csv"))
        .expect("golden CSV present");
    o.holds("sweep CSV matches golden file", first == golden);
    o
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("1  three-stroke efficiency endpoints", criterion_1),
        ("2  three-stroke efficiency law", criterion_2),
        ("3  worked point b = ln 2, gamma = 3/4", criterion_3),
        (
            "4  isentropic stroke: entropy equality and population swap",
            criterion_4,
        ),
        ("5  maximal mixing at gamma = 1/2", criterion_5),
        ("6  entropy crossover at P = 1 - e^-b", criterion_6),
        ("7  five-stroke first law", criterion_7),
        ("8  five-stroke efficiency law", criterion_8),
        ("9  r = 1 reduces to the three-stroke ledger", criterion_9),
        ("10 channel soundness", criterion_10),
        ("11 CLI contract", criterion_11),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let o = run();
        if o.failures.is_empty() {
            println!("PASS  criterion {name}  (max deviation {:.3e})", o.worst);
        } else {
            failed += 1;
            println!("FAIL  criterion {name}  ({} failures)", o.failures.len());
            for f in o.failures.iter().take(10) {
                println!("        {f}");
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
