//! `carpenter` command-line front end.
//!
//! JSON results go to stdout, or to `--out` when given; in that case the
//! one-line summary goes to stdout, otherwise to stderr.
//! Exit codes: 0 ok, 1 internal error or failed verification, 2 infeasible
//! or invalid input, 64 usage.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use carpenter::feasibility::Route;
use carpenter::rational::{parse_rational, Rational};
use carpenter::schurhorn::schur_horn_unitary_exact;
use carpenter::selector::{carpenter_traced, necessity_oracle, schur_necessity_oracle};
use carpenter::oracle::{exact_necessity_oracle, exact_schur_oracle};
use carpenter::tetris::{tetris_vectors, TetrisTrace};
use carpenter::sispectral::{check_spectral, extract_spectral, round_trip_error, synthesize_range, SpectralSamples};
use carpenter::{carpenter_field, classify, plan, verify_projection, CellField, DiagonalSpec, Error, ProjectionRep};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

const EXIT_INTERNAL: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_USAGE: u8 = 64;

#[derive(Parser, Debug)]
#[command(name = "carpenter", version, about = "Projections with a prescribed diagonal")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decide feasibility of a diagonal spec.
    Check {
        /// DiagonalSpec JSON file.
        spec: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a projection with the given diagonal.
    Construct {
        spec: PathBuf,
        /// auto and nonsummable run spectral tetris directly when its
        /// hypotheses hold for the sequence as given.
        #[arg(long, value_enum, default_value_t = Mode::Auto)]
        mode: Mode,
        /// Number of streamed vectors on the nonsummable route.
        #[arg(long = "vectors", default_value_t = 16, value_parser = clap::value_parser!(u64).range(1..))]
        vectors: u64,
        /// Write the construction trace here.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the selector over a field of cells.
    Field {
        #[arg(long)]
        input: PathBuf,
        #[arg(long = "vectors", default_value_t = 16, value_parser = clap::value_parser!(u64).range(1..))]
        vectors: u64,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        parallel: bool,
    },
    /// Check a projection representation against a spec.
    Verify {
        #[arg(long)]
        rep: PathBuf,
        #[arg(long)]
        spec: PathBuf,
        #[arg(long = "vectors", default_value_t = 16, value_parser = clap::value_parser!(u64).range(1..))]
        vectors: u64,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Orthogonal U with diag(Uᵀ diag(spectrum) U) = target.
    SchurHorn {
        /// Comma-separated rationals.
        #[arg(long)]
        spectrum: String,
        #[arg(long)]
        target: String,
        /// Also dump the conjugated matrix as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Synthesize a range function from spectral samples.
    Si {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long = "vectors", default_value_t = 16, value_parser = clap::value_parser!(u64).range(1..))]
        vectors: u64,
        /// Write the extracted spectral function here.
        #[arg(long)]
        extract: Option<PathBuf>,
    },
    /// Random necessity checks.
    Oracle {
        #[arg(long, default_value_t = 4)]
        dim: usize,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = OracleKind::Kadison)]
        kind: OracleKind,
        /// Exact rational orthogonal matrices instead of floating QR.
        #[arg(long)]
        exact: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Mode {
    Auto,
    Nonsummable,
    Summable,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum OracleKind {
    Kadison,
    Schur,
}

/// Failure carrying its exit code.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidInput(_)
            | Error::Infeasible { .. }
            | Error::Partition(_)
            | Error::Domain(_)
            | Error::Unsupported(_) => EXIT_INVALID,
            Error::OutOfRange(_) | Error::Hypothesis { .. } | Error::Internal(_) => EXIT_INTERNAL,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

type Outcome = std::result::Result<u8, Failure>;

fn read(path: &Path) -> std::result::Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure {
        code: EXIT_INVALID,
        message: format!("cannot read {}: {e}", path.display()),
    })
}

fn write(path: &Path, text: &str) -> std::result::Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure {
        code: EXIT_INTERNAL,
        message: format!("cannot write {}: {e}", path.display()),
    })
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable output");
    s.push('\n');
    s
}

/// Stdout that tolerates a closed pipe (`carpenter ... | head`).
fn say(text: &str) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes()).and_then(|_| out.flush());
}

/// Writes the JSON result and the summary line.
fn emit<T: Serialize>(value: &T, out: Option<&Path>, summary: &str) -> std::result::Result<(), Failure> {
    let text = to_json(value);
    match out {
        Some(p) => {
            write(p, &text)?;
            say(&format!("{summary}\n"));
        }
        None => {
            say(&text);
            eprintln!("{summary}");
        }
    }
    Ok(())
}

fn load_spec(path: &Path) -> std::result::Result<DiagonalSpec, Failure> {
    Ok(DiagonalSpec::from_json(&read(path)?)?)
}

fn parse_list(s: &str) -> std::result::Result<Vec<Rational>, Failure> {
    Ok(s.split(',').map(parse_rational).collect::<carpenter::Result<Vec<_>>>()?)
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Check { spec, out } => {
            let report = classify(&load_spec(&spec)?);
            let summary = format!("{:?}: a = {}, b = {}", report.verdict, report.a, report.b);
            emit(&report, out.as_deref(), &summary)?;
            Ok(if report.is_feasible() { 0 } else { EXIT_INVALID })
        }
        Command::Construct {
            spec,
            mode,
            vectors,
            trace,
            out,
        } => {
            let spec = load_spec(&spec)?;
            let m = vectors as usize;
            // spectral tetris applies to the sequence as given when its
            // hypotheses hold; everything else goes through the selector
            let direct = match mode {
                Mode::Summable => None,
                _ => tetris_vectors(&spec, m).ok(),
            };
            let (rep, trace_json, branch) = match direct {
                Some(t) => (t.rep(), to_json(&TetrisRun { route: "tetris", trace: t.trace() }), "tetris".to_string()),
                None => {
                    let planned = plan(&spec)?;
                    let nonsummable = matches!(planned.route, Route::Nonsummable { .. });
                    if mode != Mode::Auto && (mode == Mode::Nonsummable) != nonsummable {
                        return Err(Failure {
                            code: EXIT_INVALID,
                            message: format!("--mode {mode:?} does not apply; the sequence is on branch {}", planned.label),
                        });
                    }
                    let (rep, label, tr) = carpenter_traced(&spec, m)?;
                    (rep, to_json(&tr), label.to_string())
                }
            };
            if let Some(t) = trace {
                write(&t, &trace_json)?;
            }
            let summary = format!(
                "{:?} with {} vectors, settled {}, branch {branch}",
                rep.form,
                rep.vectors.len(),
                rep.settled.map_or("all".to_string(), |s| s.to_string())
            );
            emit(&rep, out.as_deref(), &summary)?;
            Ok(0)
        }
        Command::Field {
            input,
            vectors,
            out,
            parallel,
        } => field(&input, vectors as usize, &out, parallel),
        Command::Verify {
            rep,
            spec,
            vectors,
            tol,
            out,
        } => {
            if !(tol > 0.0) {
                return Err(Failure {
                    code: EXIT_USAGE,
                    message: "--tol must be positive".into(),
                });
            }
            let p = ProjectionRep::from_json(&read(&rep)?)?;
            let s = load_spec(&spec)?;
            let report = verify_projection(&p, &s, vectors as usize, tol);
            let summary = format!(
                "{} on {} indices (gram {:.1e}, diag {:.1e})",
                if report.pass { "pass" } else { "FAIL" },
                report.settled_indices,
                report.gram_max_err,
                report.diag_max_err
            );
            emit(&report, out.as_deref(), &summary)?;
            Ok(if report.pass { 0 } else { EXIT_INTERNAL })
        }
        Command::SchurHorn {
            spectrum,
            target,
            csv,
            out,
        } => {
            let lambda = parse_list(&spectrum)?;
            let f = parse_list(&target)?;
            let u = schur_horn_unitary_exact(&lambda, &f)?;
            let n = lambda.len();
            let lam: Vec<f64> = lambda.iter().map(carpenter::rational::to_f64).collect();
            let conj: Vec<Vec<f64>> = (0..n)
                .map(|i| (0..n).map(|j| (0..n).map(|k| u[(k, i)] * lam[k] * u[(k, j)]).sum()).collect())
                .collect();
            let rows: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| u[(i, j)]).collect()).collect();
            if let Some(p) = csv {
                let text: String = conj
                    .iter()
                    .map(|r| r.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",") + "\n")
                    .collect();
                write(&p, &text)?;
            }
            let err = (0..n)
                .map(|i| (conj[i][i] - carpenter::rational::to_f64(&f[i])).abs())
                .fold(0.0, f64::max);
            let summary = format!("{n}x{n} unitary, diagonal error {err:.1e}");
            emit(&SchurHornOutput { u: rows, conjugated: conj }, out.as_deref(), &summary)?;
            Ok(0)
        }
        Command::Si {
            input,
            out,
            vectors,
            extract,
        } => {
            let samples = SpectralSamples::from_json(&read(&input)?)?;
            let check = check_spectral(&samples);
            if !check.pass {
                let bad = samples
                    .fibers
                    .iter()
                    .zip(&check.fibers)
                    .find(|(_, c)| !c.report.is_feasible())
                    .expect("a failing fiber");
                return Err(bad.1.report.infeasible_error(Some(bad.0.name())).into());
            }
            let range = synthesize_range(&samples, vectors as usize)?;
            write(&out, &to_json(&range))?;
            let extracted = extract_spectral(&range);
            if let Some(p) = extract {
                write(&p, &to_json(&extracted))?;
            }
            say(&format!(
                "{} fibers synthesized, round-trip error {:.1e}\n",
                range.fibers.len(),
                round_trip_error(&samples, &extracted)
            ));
            Ok(0)
        }
        Command::Oracle {
            dim,
            trials,
            seed,
            kind,
            exact,
            out,
        } => {
            if dim == 0 {
                return Err(Failure {
                    code: EXIT_USAGE,
                    message: "--dim must be at least 1".into(),
                });
            }
            let report = match (kind, exact) {
                (OracleKind::Kadison, false) => necessity_oracle(dim, trials, seed)?,
                (OracleKind::Kadison, true) => exact_necessity_oracle(dim, trials, seed)?,
                (OracleKind::Schur, false) => schur_necessity_oracle(dim, trials, seed)?,
                (OracleKind::Schur, true) => exact_schur_oracle(dim, trials, seed)?,
            };
            let summary = format!("{} violations in {} trials (dim {dim})", report.violations, report.trials);
            emit(&report, out.as_deref(), &summary)?;
            Ok(if report.violations == 0 { 0 } else { EXIT_INTERNAL })
        }
    }
}

#[derive(Serialize)]
struct TetrisRun {
    route: &'static str,
    #[serde(flatten)]
    trace: TetrisTrace,
}

#[derive(Serialize)]
struct SchurHornOutput {
    u: Vec<Vec<f64>>,
    conjugated: Vec<Vec<f64>>,
}

#[derive(Serialize)]
struct ManifestEntry {
    cell: String,
    file: String,
    label: String,
}

#[derive(Serialize)]
struct Manifest {
    vectors: usize,
    cells: Vec<ManifestEntry>,
    /// Branch label to cell ids, in field order.
    partition: std::collections::BTreeMap<String, Vec<String>>,
}

fn field(input: &Path, m: usize, out: &Path, parallel: bool) -> Outcome {
    let cells = CellField::from_json(&read(input)?)?;
    let result = carpenter_field(&cells, m, parallel)?;
    let dir = out.join("cells");
    fs::create_dir_all(&dir).map_err(|e| Failure {
        code: EXIT_INTERNAL,
        message: format!("cannot create {}: {e}", dir.display()),
    })?;
    let width = result.cells.len().to_string().len();
    let mut entries = Vec::new();
    let mut partition: std::collections::BTreeMap<String, Vec<String>> = Default::default();
    for (i, c) in result.cells.iter().enumerate() {
        // cell ids are free text, so files are numbered
        let file = format!("cells/{:0width$}.json", i + 1);
        write(&out.join(&file), &to_json(c))?;
        let label = c.label.to_string();
        partition.entry(label.clone()).or_default().push(c.cell.clone());
        entries.push(ManifestEntry {
            cell: c.cell.clone(),
            file,
            label,
        });
    }
    let manifest = Manifest {
        vectors: m,
        cells: entries,
        partition,
    };
    write(&out.join("manifest.json"), &to_json(&manifest))?;
    say(&format!(
        "{} cells in {} branches written to {}\n",
        manifest.cells.len(),
        manifest.partition.len(),
        out.display()
    ));
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use carpenter::rational::rat;

    #[test]
    fn list_parsing() {
        assert_eq!(parse_list("1, 1/2,0.25").unwrap(), vec![rat(1, 1), rat(1, 2), rat(1, 4)]);
        assert_eq!(parse_list("1,,2").unwrap_err().code, EXIT_INVALID);
    }

    #[test]
    fn error_codes() {
        assert_eq!(Failure::from(Error::Internal("x".into())).code, EXIT_INTERNAL);
        let infeasible = Error::Infeasible { cell: None, a: "1/3".into(), b: "0".into() };
        assert_eq!(Failure::from(infeasible).code, EXIT_INVALID);
    }

    #[test]
    fn argument_parsing() {
        assert!(Cli::try_parse_from(["carpenter", "construct", "s.json", "--vectors", "0"]).is_err());
        let cli = Cli::try_parse_from(["carpenter", "oracle", "--seed", "7"]).unwrap();
        match cli.command {
            Command::Oracle { dim, trials, seed, .. } => assert_eq!((dim, trials, seed), (4, 1000, 7)),
            other => panic!("unexpected {other:?}"),
        }
    }
}
