//! The `qes` command line.

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::model::{format_rational, raw_model_from_json, validate, Model, ModelKind};
use crate::oracle::{verify_model, SuiteOptions, VerifyReport};
use crate::qes::{format_terms, reduced_direct, sl2_expansion, sl2_matrix};
use crate::sectors::{canonicalize, enumerate_sectors, quantum_numbers, sector_basis, MonomialState, SectorLabel, SectorSummary};
use crate::spectral::{full_spectrum, SectorSpectrum, DEFAULT_TOL};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_VERIFY_FAILED: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Validate,
    Sector,
    Spectrum,
    Reduce,
    Enumerate,
    Verify,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Parser)]
#[command(name = "qes", version, about = "Sectors, spectra and checks for multi-mode photon-conversion Hamiltonians")]
pub struct RunConfig {
    #[arg(value_enum)]
    pub command: Command,
    /// Model file (JSON).
    pub model_path: PathBuf,
    /// Sector label, e.g. "N=0;M=2".
    #[arg(long = "sector")]
    pub sector_spec: Option<String>,
    /// Monomial exponents, e.g. "i=4;j=0"; canonicalized to its sector.
    #[arg(long)]
    pub monomial: Option<String>,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long)]
    pub max_photons: Option<u64>,
    #[arg(long)]
    pub max_r: Option<u64>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintStatus {
    pub lhs: String,
    pub rhs: String,
    pub satisfied: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidateReport {
    pub model: Model,
    pub kind: ModelKind,
    pub constraint: ConstraintStatus,
    pub conversion_energy: String,
    pub operator_order: u64,
    pub exponent_gcd: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectorReport {
    pub input: String,
    pub sector: String,
    pub nvec: Vec<u64>,
    pub mvec: Vec<u64>,
    pub r: u64,
    pub dim: usize,
    pub e0: String,
    pub alpha: Vec<i64>,
    pub beta: Vec<i64>,
    pub basis: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReduceReport {
    pub sector: String,
    pub terms: String,
    pub direct: Vec<Vec<String>>,
    pub sl2: Vec<Vec<String>>,
    pub equal: bool,
    pub verdict: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnumerateReport {
    pub max_photons: u64,
    pub sectors: Vec<SectorSummary>,
}

#[derive(Debug)]
enum Failure {
    Invalid(String),
    Io(String),
    Verify(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Invalid(_) => EXIT_INVALID,
            Failure::Verify(_) => EXIT_VERIFY_FAILED,
            Failure::Io(_) => EXIT_IO,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Invalid(m) | Failure::Io(m) | Failure::Verify(m) => m,
        }
    }
}

fn invalid(e: impl ToString) -> Failure {
    Failure::Invalid(e.to_string())
}

/// Formats a real with 17 significant digits, independent of locale.
pub fn csv_real(x: f64) -> String {
    format!("{x:.16e}")
}

fn load_model(config: &RunConfig) -> Result<Model, Failure> {
    let text = std::fs::read_to_string(&config.model_path)
        .map_err(|e| Failure::Io(format!("{}: {e}", config.model_path.display())))?;
    let raw = raw_model_from_json(&text).map_err(|e| invalid(format!("{}: {e}", config.model_path.display())))?;
    validate(&raw).map_err(invalid)
}

fn sector_arg(config: &RunConfig, model: &Model) -> Result<(String, SectorLabel), Failure> {
    match (&config.sector_spec, &config.monomial) {
        (Some(text), None) => Ok((text.clone(), SectorLabel::parse(model, text).map_err(invalid)?)),
        (None, Some(text)) => {
            let state: MonomialState = text.parse().map_err(invalid)?;
            Ok((text.clone(), canonicalize(model, &state).map_err(invalid)?))
        }
        (Some(_), Some(_)) => Err(invalid("give either --sector or --monomial, not both")),
        (None, None) => Err(invalid("this command needs --sector or --monomial")),
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("reports serialize")
}

fn cmd_validate(config: &RunConfig, model: Model) -> Result<String, Failure> {
    let (lhs, rhs) = model.constraint_sums();
    let report = ValidateReport {
        kind: model.kind(),
        constraint: ConstraintStatus {
            lhs: format_rational(&lhs),
            rhs: format_rational(&rhs),
            satisfied: lhs == rhs,
        },
        conversion_energy: format_rational(&model.conversion_energy()),
        operator_order: model.operator_order(),
        exponent_gcd: model.exponent_gcd(),
        model,
    };
    Ok(match config.format {
        Format::Json => to_json(&report),
        Format::Csv => {
            let m = serde_json::to_value(&report.model).expect("model serializes");
            let mut out = String::from("field,value\n");
            for key in ["nu", "mu", "n", "m", "g"] {
                let items: Vec<String> = match &m[key] {
                    serde_json::Value::Array(items) => items
                        .iter()
                        .map(|v| v.as_str().map_or_else(|| v.to_string(), str::to_string))
                        .collect(),
                    other => vec![other.to_string()],
                };
                out += &format!("{key},{}\n", items.join(" "));
            }
            out += &format!("kind,{}\n", report.kind);
            out += &format!("constraint_lhs,{}\n", report.constraint.lhs);
            out += &format!("constraint_rhs,{}\n", report.constraint.rhs);
            out += &format!("constraint_satisfied,{}\n", report.constraint.satisfied);
            out += &format!("conversion_energy,{}\n", report.conversion_energy);
            out += &format!("operator_order,{}\n", report.operator_order);
            out += &format!("exponent_gcd,{}", report.exponent_gcd);
            out
        }
    })
}

fn cmd_sector(config: &RunConfig, model: &Model) -> Result<String, Failure> {
    let (input, sector) = sector_arg(config, model)?;
    let basis = sector_basis(model, &sector).map_err(invalid)?;
    let qn = quantum_numbers(model, &basis[0]).map_err(invalid)?;
    let report = SectorReport {
        input,
        sector: sector.to_string(),
        nvec: sector.nvec().to_vec(),
        mvec: sector.mvec().to_vec(),
        r: sector.r(),
        dim: sector.dim(),
        e0: format_rational(&qn.e0),
        alpha: qn.alpha,
        beta: qn.beta,
        basis: basis.iter().map(ToString::to_string).collect(),
    };
    Ok(match config.format {
        Format::Json => to_json(&report),
        Format::Csv => {
            let rows: Vec<String> = report.basis.iter().enumerate().map(|(s, b)| format!("{s},\"{b}\"")).collect();
            format!("s,state\n{}", rows.join("\n"))
        }
    })
}

fn cmd_spectrum(config: &RunConfig, model: &Model) -> Result<String, Failure> {
    let (_, sector) = sector_arg(config, model)?;
    let result: SectorSpectrum = full_spectrum(model, &sector, config.tol).map_err(invalid)?;
    Ok(match config.format {
        Format::Json => to_json(&result),
        Format::Csv => {
            let rows: Vec<String> = result
                .pairs()
                .into_iter()
                .map(|(total, lambda)| format!("{},{}", csv_real(lambda), csv_real(total)))
                .collect();
            format!("lambda,total\n{}", rows.join("\n"))
        }
    })
}

fn cmd_reduce(config: &RunConfig, model: &Model) -> Result<(String, bool), Failure> {
    let (_, sector) = sector_arg(config, model)?;
    let direct = reduced_direct(model, &sector).map_err(invalid)?;
    let terms = sl2_expansion(model, &sector).map_err(invalid)?;
    let via = sl2_matrix(&terms, sector.r()).map_err(invalid)?;
    let equal = via.same_matrix(&direct);
    let report = ReduceReport {
        sector: sector.to_string(),
        terms: format_terms(&terms),
        direct: direct.to_strings(),
        sl2: via.to_strings(),
        equal,
        verdict: format!("EQUAL: {}", if equal { "yes" } else { "no" }),
    };
    let text = match config.format {
        Format::Json => to_json(&report),
        Format::Csv => {
            let mut out = String::from("matrix,row,col,value");
            for (name, m) in [("direct", &report.direct), ("sl2", &report.sl2)] {
                for (row, entries) in m.iter().enumerate() {
                    for (col, v) in entries.iter().enumerate() {
                        if v != "0" {
                            out += &format!("\n{name},{row},{col},{v}");
                        }
                    }
                }
            }
            out
        }
    };
    Ok((text, equal))
}

fn cmd_enumerate(config: &RunConfig, model: &Model) -> Result<String, Failure> {
    let max_photons = config
        .max_photons
        .ok_or_else(|| invalid("enumerate needs --max-photons"))?;
    let report = EnumerateReport {
        max_photons,
        sectors: enumerate_sectors(model, max_photons).iter().map(SectorSummary::from).collect(),
    };
    Ok(match config.format {
        Format::Json => to_json(&report),
        Format::Csv => {
            let rows: Vec<String> = report
                .sectors
                .iter()
                .map(|s| format!("\"{}\",{},{}", s.sector, s.r, s.dim))
                .collect();
            format!("sector,r,dim\n{}", rows.join("\n"))
        }
    })
}

fn cmd_verify(config: &RunConfig, model: &Model) -> Result<(String, bool), Failure> {
    let defaults = SuiteOptions::default();
    let opts = SuiteOptions {
        max_r: config.max_r.unwrap_or(defaults.max_r),
        max_photons: config.max_photons.unwrap_or(defaults.max_photons),
        seed: config.seed,
        probes: defaults.probes,
    };
    let report: VerifyReport = verify_model(model, &opts).map_err(invalid)?;
    let text = match config.format {
        Format::Json => to_json(&report),
        Format::Csv => {
            let rows: Vec<String> = report
                .checks
                .iter()
                .map(|c| {
                    let w = c.witness.as_ref().map_or(String::new(), |w| format!("{}: {}", w.state, w.residual));
                    format!("{},{},\"{}\",\"{}\"", c.name, c.passed, c.detail, w.replace('"', "'"))
                })
                .collect();
            format!("check,passed,detail,witness\n{}", rows.join("\n"))
        }
    };
    Ok((text, report.passed))
}

fn configure_threads() {
    if let Some(n) = std::env::var("QES_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        if n > 0 {
            // a pool may already exist when called twice in one process
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

fn dispatch(config: &RunConfig) -> Result<String, Failure> {
    let model = load_model(config)?;
    match config.command {
        Command::Validate => cmd_validate(config, model),
        Command::Sector => cmd_sector(config, &model),
        Command::Spectrum => cmd_spectrum(config, &model),
        Command::Enumerate => cmd_enumerate(config, &model),
        Command::Reduce => {
            let (text, equal) = cmd_reduce(config, &model)?;
            if equal {
                Ok(text)
            } else {
                Err(Failure::Verify(text))
            }
        }
        Command::Verify => {
            let (text, passed) = cmd_verify(config, &model)?;
            if passed {
                Ok(text)
            } else {
                Err(Failure::Verify(text))
            }
        }
    }
}

/// Runs one command. Data goes to `out`, diagnostics to `err`; returns the
/// process exit code.
pub fn run(config: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    configure_threads();
    let result = dispatch(config);
    let code = match &result {
        Ok(text) => writeln!(out, "{text}").map_or(EXIT_IO, |_| EXIT_OK),
        Err(Failure::Verify(text)) => {
            // the failing report is still data
            let _ = writeln!(out, "{text}");
            let _ = writeln!(err, "verification failed");
            EXIT_VERIFY_FAILED
        }
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message());
            f.code()
        }
    };
    if out.flush().is_err() {
        return EXIT_IO;
    }
    code
}

/// Parses `args` (including the program name) and runs. Usage errors exit
/// with [`EXIT_INVALID`]; `--help` and `--version` exit with 0.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match RunConfig::try_parse_from(args) {
        Ok(config) => run(&config, out, err),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let rendered = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{rendered}");
            } else {
                let _ = write!(out, "{rendered}");
            }
            code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model_file(json: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(json.as_bytes()).unwrap();
        f
    }

    const SHG: &str = r#"{"nu":["1/2"],"mu":["1"],"n":[2],"m":[1],"g":1.0}"#;

    fn call(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let mut full = vec!["qes"];
        full.extend_from_slice(args);
        let code = main_with_args(full, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn spectrum_csv() {
        let f = model_file(SHG);
        let path = f.path().to_str().unwrap();
        let (code, out, _) = call(&["spectrum", path, "--sector", "N=0;M=2", "--format", "csv"]);
        assert_eq!(code, 0);
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines[0], "lambda,total");
        let rows: Vec<(f64, f64)> = lines[1..]
            .iter()
            .map(|l| {
                let (a, b) = l.split_once(',').unwrap();
                (a.parse().unwrap(), b.parse().unwrap())
            })
            .collect();
        for ((l, t), (wl, wt)) in rows.iter().zip([(-4.0, -2.0), (0.0, 2.0), (4.0, 6.0)]) {
            assert!((l - wl).abs() < 1e-10 && (t - wt).abs() < 1e-10);
        }
    }

    #[test]
    fn broken_model_exits_one() {
        let f = model_file(r#"{"nu":["1"],"mu":["1"],"n":[2],"m":[1],"g":1.0}"#);
        let (code, out, err) = call(&["validate", f.path().to_str().unwrap()]);
        assert_eq!(code, EXIT_INVALID);
        assert!(out.is_empty());
        assert!(err.contains('2') && err.contains('1'), "{err}");
    }

    #[test]
    fn usage_and_io_errors() {
        assert_eq!(call(&["bogus", "x.json"]).0, EXIT_INVALID);
        assert_eq!(call(&["validate", "/nonexistent/model.json"]).0, EXIT_IO);
        let f = model_file(SHG);
        let path = f.path().to_str().unwrap();
        assert_eq!(call(&["spectrum", path]).0, EXIT_INVALID);
        assert_eq!(call(&["spectrum", path, "--sector", "N=2;M=0"]).0, EXIT_INVALID);
        assert_eq!(call(&["spectrum", path, "--sector", "N=0;M=2", "--tol", "1e-20"]).0, EXIT_INVALID);
        assert_eq!(call(&["enumerate", path]).0, EXIT_INVALID);
        assert_eq!(call(&["--help"]).0, EXIT_OK);
    }

    #[test]
    fn reports_round_trip() {
        let f = model_file(SHG);
        let path = f.path().to_str().unwrap();
        let (_, out, _) = call(&["validate", path]);
        let v: ValidateReport = serde_json::from_str(&out).unwrap();
        assert_eq!(v.constraint.lhs, "1");
        assert_eq!(to_json(&v).trim(), out.trim());

        let (_, out, _) = call(&["sector", path, "--monomial", "i=4;j=0"]);
        let s: SectorReport = serde_json::from_str(&out).unwrap();
        assert_eq!(s.sector, "N=0;M=2");
        assert_eq!(s.basis, vec!["i=0;j=2", "i=2;j=1", "i=4;j=0"]);

        let (code, out, _) = call(&["reduce", path, "--sector", "N=0;M=2"]);
        assert_eq!(code, 0);
        let r: ReduceReport = serde_json::from_str(&out).unwrap();
        assert_eq!(r.terms, "4 * J- * (J0 + 1/2) + (-1) * J+");
        assert_eq!(r.verdict, "EQUAL: yes");
        assert_eq!(r.direct, vec![vec!["0", "2", "0"], vec!["2", "0", "12"], vec!["0", "1", "0"]]);

        let (_, out, _) = call(&["spectrum", path, "--sector", "N=1;M=1"]);
        let sp: SectorSpectrum = serde_json::from_str(&out).unwrap();
        assert_eq!(to_json(&sp).trim(), out.trim());

        let (_, out, _) = call(&["enumerate", path, "--max-photons", "2"]);
        let e: EnumerateReport = serde_json::from_str(&out).unwrap();
        assert_eq!(e.sectors.len(), 5);
    }

    #[test]
    fn verify_runs() {
        let f = model_file(SHG);
        let (code, out, _) = call(&["verify", f.path().to_str().unwrap(), "--max-r", "3", "--max-photons", "6"]);
        assert_eq!(code, 0, "{out}");
        let v: VerifyReport = serde_json::from_str(&out).unwrap();
        assert!(v.passed);
    }
}
