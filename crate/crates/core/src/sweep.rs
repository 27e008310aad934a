//! Parameter-grid sweeps rendered as CSV.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use thiserror::Error;

use crate::engine::{self, CycleMode, CycleParams, EnergyLedger, EngineError, StrokeName};

/// Column order of the sweep CSV.
pub const CSV_HEADER: &str = "mode,b,gamma,r,P,q,Q_in,Q_out,W_api,W_apii,Delta,W_ext,\
eta_analytic,eta_numeric,S_after_QMI,S_after_QMII,first_law_residual,valid";

/// Significant digits used for every floating-point CSV field.
pub const CSV_DIGITS: usize = 12;

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("sweep list '{0}' is empty")]
    EmptyList(&'static str),
    #[error(transparent)]
    Params(#[from] EngineError),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed CSV row: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub mode: CycleMode,
    pub b_values: Vec<f64>,
    pub gamma_values: Vec<f64>,
    pub r_values: Vec<f64>,
    pub output_path: PathBuf,
}

impl SweepSpec {
    /// Checks that every list is non-empty and every grid point forms valid
    /// [`CycleParams`].
    pub fn validate(&self) -> Result<(), SweepError> {
        for (name, list) in [
            ("b_values", &self.b_values),
            ("gamma_values", &self.gamma_values),
            ("r_values", &self.r_values),
        ] {
            if list.is_empty() {
                return Err(SweepError::EmptyList(name));
            }
        }
        for p in self.points() {
            p?;
        }
        Ok(())
    }

    /// Grid points with `b` outermost, then `gamma`, then `r`.
    pub fn points(&self) -> impl Iterator<Item = Result<CycleParams, EngineError>> + '_ {
        self.b_values.iter().flat_map(move |&b| {
            self.gamma_values.iter().flat_map(move |&gamma| {
                self.r_values
                    .iter()
                    .map(move |&r| CycleParams::new(self.mode, b, gamma, r))
            })
        })
    }
}

/// One grid point of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub mode: CycleMode,
    pub b: f64,
    pub gamma: f64,
    pub r: f64,
    pub p: f64,
    pub q: Option<f64>,
    pub q_in: f64,
    pub q_out: f64,
    pub w_api: f64,
    pub w_apii: f64,
    pub delta: f64,
    pub w_ext: f64,
    pub eta_analytic: f64,
    pub eta_numeric: Option<f64>,
    pub s_after_qmi: f64,
    pub s_after_qmii: f64,
    pub first_law_residual: f64,
    pub valid: bool,
}

impl SweepRow {
    /// Energies come from the numeric ledger when the cycle is realizable and
    /// from the closed forms otherwise.
    pub fn evaluate(params: &CycleParams) -> Result<Self, EngineError> {
        let analytic = engine::run_analytic(params)?;
        let numeric = match engine::run_numeric(params) {
            Ok(l) => Some(l),
            Err(EngineError::BoundViolation { .. } | EngineError::Unrealizable { .. }) => None,
            Err(e) => return Err(e),
        };
        let source: &EnergyLedger = numeric.as_ref().unwrap_or(&analytic);
        let entropy = |name| {
            source
                .stroke(name)
                .map(|s| s.entropy_after)
                .expect("every cycle records QMI and QMII")
        };
        Ok(Self {
            mode: params.mode(),
            b: params.b(),
            gamma: params.gamma(),
            r: params.r(),
            p: params.strength(),
            q: source.q_used,
            q_in: source.q_in,
            q_out: source.q_out,
            w_api: source.w_api,
            w_apii: source.w_apii,
            delta: source.delta,
            w_ext: source.w_ext,
            eta_analytic: analytic.eta,
            eta_numeric: numeric.as_ref().map(|l| l.eta),
            s_after_qmi: entropy(StrokeName::Qmi),
            s_after_qmii: entropy(StrokeName::Qmii),
            first_law_residual: source.balance_residual(),
            valid: analytic.validity.within_bounds(),
        })
    }

    pub fn to_csv_line(&self) -> String {
        let opt = |v: Option<f64>| v.map(format_sig).unwrap_or_default();
        let fields = [
            self.mode.short_name().to_string(),
            format_sig(self.b),
            format_sig(self.gamma),
            format_sig(self.r),
            format_sig(self.p),
            opt(self.q),
            format_sig(self.q_in),
            format_sig(self.q_out),
            format_sig(self.w_api),
            format_sig(self.w_apii),
            format_sig(self.delta),
            format_sig(self.w_ext),
            format_sig(self.eta_analytic),
            opt(self.eta_numeric),
            format_sig(self.s_after_qmi),
            format_sig(self.s_after_qmii),
            format_sig(self.first_law_residual),
            if self.valid { "1" } else { "0" }.to_string(),
        ];
        fields.join(",")
    }

    pub fn from_csv_line(line: &str) -> Result<Self, SweepError> {
        let bad = || SweepError::Malformed(line.to_string());
        let f: Vec<&str> = line.trim_end().split(',').collect();
        if f.len() != 18 {
            return Err(bad());
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad());
        let opt = |s: &str| {
            if s.is_empty() {
                Ok(None)
            } else {
                num(s).map(Some)
            }
        };
        Ok(Self {
            mode: f[0].parse().map_err(|_| bad())?,
            b: num(f[1])?,
            gamma: num(f[2])?,
            r: num(f[3])?,
            p: num(f[4])?,
            q: opt(f[5])?,
            q_in: num(f[6])?,
            q_out: num(f[7])?,
            w_api: num(f[8])?,
            w_apii: num(f[9])?,
            delta: num(f[10])?,
            w_ext: num(f[11])?,
            eta_analytic: num(f[12])?,
            eta_numeric: opt(f[13])?,
            s_after_qmi: num(f[14])?,
            s_after_qmii: num(f[15])?,
            first_law_residual: num(f[16])?,
            valid: match f[17] {
                "1" => true,
                "0" => false,
                _ => return Err(bad()),
            },
        })
    }
}

/// Evaluates the grid concurrently; rows come back in grid order.
pub fn sweep_rows(spec: &SweepSpec) -> Result<Vec<SweepRow>, SweepError> {
    spec.validate()?;
    let points: Vec<CycleParams> = spec.points().collect::<Result<_, _>>()?;
    let rows = points
        .par_iter()
        .map(SweepRow::evaluate)
        .collect::<Result<Vec<_>, _>>()?;
    Ok(rows)
}

pub fn render_csv(rows: &[SweepRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.to_csv_line());
        out.push('\n');
    }
    out
}

pub fn parse_csv(text: &str) -> Result<Vec<SweepRow>, SweepError> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == CSV_HEADER => {}
        other => return Err(SweepError::Malformed(other.unwrap_or_default().to_string())),
    }
    lines.filter(|l| !l.is_empty()).map(SweepRow::from_csv_line).collect()
}

/// Runs the sweep and writes the CSV to `spec.output_path`. Returns the row count.
pub fn write_sweep(spec: &SweepSpec) -> Result<usize, SweepError> {
    let rows = sweep_rows(spec)?;
    write_text(&spec.output_path, &render_csv(&rows))?;
    Ok(rows.len())
}

fn write_text(path: &Path, text: &str) -> Result<(), SweepError> {
    fs::write(path, text).map_err(|source| SweepError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// `%.12g`-style rendering: 12 significant digits, trailing zeros trimmed,
/// scientific notation outside `1e-5 <= |x| < 1e12`.
pub fn format_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", CSV_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= CSV_DIGITS as i32 {
        format!("{}e{}", trim_zeros(mantissa), exp)
    } else {
        let decimals = (CSV_DIGITS as i32 - 1 - exp) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const LN2: f64 = std::f64::consts::LN_2;

    #[test]
    fn format_sig_examples() {
        assert_eq!(format_sig(0.0), "0");
        assert_eq!(format_sig(-0.0), "0");
        assert_eq!(format_sig(1.0), "1");
        assert_eq!(format_sig(0.5), "0.5");
        assert_eq!(format_sig(2.0 / 3.0), "0.666666666667");
        assert_eq!(format_sig(-1.0 / 12.0), "-0.0833333333333");
        assert_eq!(format_sig(LN2), "0.69314718056");
        assert_eq!(format_sig(1.5e-17), "1.5e-17");
        assert_eq!(format_sig(123456.0), "123456");
        assert_eq!(format_sig(1e12), "1e12");
        assert_eq!(format_sig(9.9999999999996), "10");
    }

    fn spec(mode: CycleMode, gammas: &[f64], rs: &[f64]) -> SweepSpec {
        SweepSpec {
            mode,
            b_values: vec![LN2],
            gamma_values: gammas.to_vec(),
            r_values: rs.to_vec(),
            output_path: PathBuf::from("unused.csv"),
        }
    }

    #[test]
    fn three_stroke_eta_column() {
        let rows = sweep_rows(&spec(CycleMode::ThreeStroke, &[0.5, 0.75, 1.0], &[1.0])).unwrap();
        let eta: Vec<f64> = rows.iter().map(|r| r.eta_analytic).collect();
        assert_eq!(eta[0], 0.0);
        assert!((eta[1] - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(eta[2], 1.0);
        assert!(rows.iter().all(|r| r.valid && r.eta_numeric.is_some()));
    }

    #[test]
    fn grid_order_is_b_gamma_r() {
        let s = SweepSpec {
            mode: CycleMode::FiveStroke,
            b_values: vec![0.5, 1.0],
            gamma_values: vec![0.6, 0.9],
            r_values: vec![1.0, 3.0],
            output_path: PathBuf::new(),
        };
        let rows = sweep_rows(&s).unwrap();
        let keys: Vec<(f64, f64, f64)> = rows.iter().map(|r| (r.b, r.gamma, r.r)).collect();
        assert_eq!(
            keys,
            vec![
                (0.5, 0.6, 1.0),
                (0.5, 0.6, 3.0),
                (0.5, 0.9, 1.0),
                (0.5, 0.9, 3.0),
                (1.0, 0.6, 1.0),
                (1.0, 0.6, 3.0),
                (1.0, 0.9, 1.0),
                (1.0, 0.9, 3.0),
            ]
        );
    }

    #[test]
    fn degenerate_five_stroke_rows_match_three_stroke() {
        let gammas = [0.5, 0.6, 0.75, 0.9, 1.0];
        let three = render_csv(&sweep_rows(&spec(CycleMode::ThreeStroke, &gammas, &[1.0])).unwrap());
        let five = render_csv(&sweep_rows(&spec(CycleMode::FiveStroke, &gammas, &[1.0])).unwrap());
        for (a, b) in three.lines().zip(five.lines()).skip(1) {
            let (_, a_rest) = a.split_once(',').unwrap();
            let (_, b_rest) = b.split_once(',').unwrap();
            assert_eq!(a_rest, b_rest);
        }
    }

    #[test]
    fn valid_column_follows_gamma_bounds() {
        let rows = sweep_rows(&spec(CycleMode::FiveStroke, &[0.2, 0.3, 0.4, 0.8], &[2.0])).unwrap();
        let valid: Vec<bool> = rows.iter().map(|r| r.valid).collect();
        assert_eq!(valid, vec![false, false, true, true]);
        // realizable only from 1/2 upward
        assert!(rows[2].eta_numeric.is_none() && rows[2].q.is_none());
        assert!(rows[3].eta_numeric.is_some());
    }

    #[test]
    fn invalid_specs() {
        assert!(matches!(
            sweep_rows(&spec(CycleMode::ThreeStroke, &[], &[1.0])),
            Err(SweepError::EmptyList("gamma_values"))
        ));
        assert!(matches!(
            sweep_rows(&spec(CycleMode::ThreeStroke, &[0.7], &[2.0])),
            Err(SweepError::Params(_))
        ));
        assert!(matches!(
            sweep_rows(&spec(CycleMode::ThreeStroke, &[1.2], &[1.0])),
            Err(SweepError::Params(_))
        ));
    }

    #[test]
    fn unwritable_path() {
        let mut s = spec(CycleMode::ThreeStroke, &[0.7], &[1.0]);
        s.output_path = PathBuf::from("/nonexistent-dir/out.csv");
        assert!(matches!(write_sweep(&s), Err(SweepError::Io { .. })));
    }

    #[test]
    fn csv_parses_back() {
        let rows = sweep_rows(&spec(CycleMode::FiveStroke, &[0.3, 0.45, 0.75], &[2.0, 5.0])).unwrap();
        let text = render_csv(&rows);
        let parsed = parse_csv(&text).unwrap();
        assert_eq!(render_csv(&parsed), text);
        assert!(parse_csv("nope\n").is_err());
    }
}
