//! Batch front-end for the verification suites: runs checks, exports
//! truncated matrices and spectra, writes JSON reports.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails or a
//! runtime verification error occurs, 2 on flag errors.

use clap::{Parser, Subcommand};
use qsphere_core::rep::{hermitian_spectrum, to_matrix, ReprConfig};
use qsphere_core::report::{CheckReport, SCHEMA_VERSION};
use qsphere_core::spheres::{
    build_generators, check_exactness, check_lemma_restrictions, check_q_independence_proxy,
    check_set_identities, check_sphere_relations, check_su2q_relations, check_theorem_support,
    parse_word, GRAM_RANK_TOL,
};
use std::io::Write;
use std::process::ExitCode;

fn parse_q(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(format!("q must lie strictly between 0 and 1, got {v}"))
    }
}

fn parse_dim(s: &str) -> Result<usize, String> {
    let v: usize = s.parse().map_err(|e| format!("{e}"))?;
    if v >= 1 {
        Ok(v)
    } else {
        Err("must be at least 1".into())
    }
}

fn parse_bound(s: &str) -> Result<i64, String> {
    let v: i64 = s.parse().map_err(|e| format!("{e}"))?;
    if v >= 0 {
        Ok(v)
    } else {
        Err("window bounds must be nonnegative".into())
    }
}

fn parse_tol(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err("tolerance must be positive".into())
    }
}

#[derive(Parser)]
#[command(
    name = "qsphere",
    version,
    about = "Groupoid-convolution realization of the odd quantum spheres: check suites, matrix exports, spectra"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Single-factor relations and the sphere relations, symbolic + numeric
    CheckRelations {
        #[arg(long, value_parser = parse_dim, default_value_t = 1)]
        n: usize,
        /// Deformation parameter; repeat the flag to run several values
        #[arg(long = "q", value_parser = parse_q, default_values_t = [0.5])]
        q: Vec<f64>,
        #[arg(long = "N", value_parser = parse_dim, default_value_t = 10)]
        cutoff: usize,
        /// Report path, `-` for stdout
        #[arg(long, default_value = "-")]
        out: String,
    },
    /// Face-restriction formulas and quotient pullback identities (n ≥ 2)
    CheckLemma {
        #[arg(long, value_parser = parse_dim, default_value_t = 2)]
        n: usize,
        #[arg(long = "q", value_parser = parse_q, default_values_t = [0.5])]
        q: Vec<f64>,
        #[arg(long, default_value = "-")]
        out: String,
    },
    /// Subgroupoid support and quotient invariance of all short words
    CheckTheorem {
        #[arg(long, value_parser = parse_dim, default_value_t = 2)]
        n: usize,
        #[arg(long = "q", value_parser = parse_q, default_values_t = [0.5])]
        q: Vec<f64>,
        /// Maximum word length
        #[arg(long = "L", value_parser = parse_dim, default_value_t = 3)]
        max_len: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value = "-")]
        out: String,
    },
    /// Exhaustive window scan of the subgroupoid set identities (n ≥ 2)
    CheckSets {
        #[arg(long, value_parser = parse_dim, default_value_t = 2)]
        n: usize,
        #[arg(long, value_parser = parse_bound, default_value_t = 3)]
        zmax: i64,
        #[arg(long, value_parser = parse_bound, default_value_t = 3)]
        xmax: i64,
        #[arg(long = "N", value_parser = parse_bound, default_value_t = 3)]
        cutoff: i64,
        #[arg(long, default_value = "-")]
        out: String,
    },
    /// Boundary-vanishing ideal membership and interior richness
    CheckExactness {
        #[arg(long, value_parser = parse_dim, default_value_t = 2)]
        n: usize,
        #[arg(long = "q", value_parser = parse_q, default_values_t = [0.5])]
        q: Vec<f64>,
        #[arg(long = "N", value_parser = parse_dim, default_value_t = 6)]
        cutoff: usize,
        #[arg(long, default_value = "-")]
        out: String,
    },
    /// Structural q-independence proxy (requires exactly two --q values)
    CheckQindep {
        #[arg(long, value_parser = parse_dim, default_value_t = 1)]
        n: usize,
        #[arg(long = "q", value_parser = parse_q, num_args = 1, required = true)]
        q: Vec<f64>,
        #[arg(long = "L", value_parser = parse_dim, default_value_t = 3)]
        max_len: usize,
        #[arg(long = "N", value_parser = parse_dim, default_value_t = 8)]
        cutoff: usize,
        /// Relative Gram-rank threshold
        #[arg(long, value_parser = parse_tol, default_value_t = GRAM_RANK_TOL)]
        tol: f64,
        #[arg(long, default_value = "-")]
        out: String,
    },
    /// Export the truncated matrix of a word in the generators
    Represent {
        #[arg(long, value_parser = parse_dim, default_value_t = 1)]
        n: usize,
        #[arg(long = "q", value_parser = parse_q, default_value_t = 0.5)]
        q: f64,
        #[arg(long = "N", value_parser = parse_dim, default_value_t = 8)]
        cutoff: usize,
        #[arg(long, default_value_t = 0.0)]
        theta: f64,
        /// Circle-mode angle per slot; repeat n times or omit to broadcast theta
        #[arg(long = "phi")]
        phi: Vec<f64>,
        /// Word like "Y1 Y2*"; empty for the unit element
        #[arg(long, default_value = "")]
        word: String,
        #[arg(long, default_value = "-")]
        out: String,
    },
    /// Eigenvalues of the truncated matrix of a Hermitian word
    Spectrum {
        #[arg(long, value_parser = parse_dim, default_value_t = 1)]
        n: usize,
        #[arg(long = "q", value_parser = parse_q, default_value_t = 0.5)]
        q: f64,
        #[arg(long = "N", value_parser = parse_dim, default_value_t = 8)]
        cutoff: usize,
        #[arg(long, default_value_t = 0.0)]
        theta: f64,
        #[arg(long = "phi")]
        phi: Vec<f64>,
        #[arg(long, default_value = "")]
        word: String,
        #[arg(long, default_value = "-")]
        out: String,
    },
}

/// Usage errors exit with 2 (like flag parse failures), runtime failures
/// with 1.
enum CliError {
    Usage(String),
    Runtime(String),
}

impl CliError {
    fn usage(e: impl ToString) -> CliError {
        CliError::Usage(e.to_string())
    }

    fn runtime(e: impl ToString) -> CliError {
        CliError::Runtime(e.to_string())
    }
}

fn write_output(path: &str, content: &str) -> std::io::Result<()> {
    if path == "-" {
        let mut stdout = std::io::stdout().lock();
        stdout.write_all(content.as_bytes())?;
        if !content.ends_with('\n') {
            stdout.write_all(b"\n")?;
        }
    } else {
        std::fs::write(path, content)?;
    }
    Ok(())
}

/// Merge per-q reports under one suite, prefixing check names with the q
/// value so every check appears exactly once.
fn merge_q_reports(
    suite: &str,
    params: serde_json::Value,
    parts: Vec<(f64, CheckReport)>,
) -> CheckReport {
    let mut merged = CheckReport::new(suite, params);
    for (q, rep) in parts {
        for mut item in rep.checks {
            item.name = format!("q={q}/{}", item.name);
            merged.push(item);
        }
    }
    merged
}

fn finish(report: CheckReport, out: &str) -> Result<ExitCode, CliError> {
    let json = report.to_json_pretty();
    write_output(out, &json)
        .map_err(|e| CliError::runtime(format!("cannot write report: {e}")))?;
    if report.passed {
        Ok(ExitCode::SUCCESS)
    } else {
        let failing: Vec<&str> = report
            .checks
            .iter()
            .filter(|c| !c.passed())
            .map(|c| c.name.as_str())
            .collect();
        eprintln!("FAIL: {}", failing.join(", "));
        Ok(ExitCode::from(1))
    }
}

fn build_phi(n: usize, theta: f64, phi: &[f64]) -> Result<Vec<f64>, CliError> {
    match phi.len() {
        0 => Ok(vec![theta; n]),
        1 => Ok(vec![phi[0]; n]),
        l if l == n => Ok(phi.to_vec()),
        l => Err(CliError::Usage(format!("need 1 or {n} --phi values, got {l}"))),
    }
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::CheckRelations { n, q, cutoff, out } => {
            let params = serde_json::json!({ "n": n, "q": q, "N": cutoff });
            let mut parts = Vec::new();
            for &qv in &q {
                let mut rep = check_su2q_relations(qv, cutoff).map_err(CliError::usage)?;
                rep.merge(check_sphere_relations(n, qv, cutoff).map_err(CliError::usage)?);
                parts.push((qv, rep));
            }
            finish(merge_q_reports("check-relations", params, parts), &out)
        }
        Command::CheckLemma { n, q, out } => {
            let params = serde_json::json!({ "n": n, "q": q });
            let mut parts = Vec::new();
            for &qv in &q {
                parts.push((qv, check_lemma_restrictions(n, qv).map_err(CliError::usage)?));
            }
            finish(merge_q_reports("check-lemma", params, parts), &out)
        }
        Command::CheckTheorem {
            n,
            q,
            max_len,
            seed,
            out,
        } => {
            let params = serde_json::json!({ "n": n, "q": q, "L": max_len, "seed": seed });
            let mut parts = Vec::new();
            for &qv in &q {
                parts.push((
                    qv,
                    check_theorem_support(n, qv, max_len, seed).map_err(CliError::usage)?,
                ));
            }
            finish(merge_q_reports("check-theorem", params, parts), &out)
        }
        Command::CheckSets {
            n,
            zmax,
            xmax,
            cutoff,
            out,
        } => {
            let report = check_set_identities(n, zmax, xmax, cutoff).map_err(CliError::usage)?;
            for c in &report.checks {
                if let Some(qsphere_core::report::Witness::Note { text }) = &c.witness {
                    eprintln!("{}: {}", c.name, text);
                }
            }
            finish(report, &out)
        }
        Command::CheckExactness { n, q, cutoff, out } => {
            let params = serde_json::json!({ "n": n, "q": q, "N": cutoff });
            let mut parts = Vec::new();
            for &qv in &q {
                parts.push((qv, check_exactness(n, qv, cutoff).map_err(CliError::usage)?));
            }
            finish(merge_q_reports("check-exactness", params, parts), &out)
        }
        Command::CheckQindep {
            n,
            q,
            max_len,
            cutoff,
            tol,
            out,
        } => {
            if q.len() != 2 {
                return Err(CliError::Usage(format!(
                    "check-qindep needs exactly two --q values, got {}",
                    q.len()
                )));
            }
            let report = check_q_independence_proxy(n, q[0], q[1], max_len, cutoff, tol)
                .map_err(CliError::usage)?;
            finish(report, &out)
        }
        Command::Represent {
            n,
            q,
            cutoff,
            theta,
            phi,
            word,
            out,
        } => {
            let gens = build_generators(n, q).map_err(CliError::usage)?;
            let element = parse_word(&gens, &word).map_err(CliError::usage)?;
            let cfg = ReprConfig::new(n, cutoff, q, theta, build_phi(n, theta, &phi)?)
                .map_err(CliError::usage)?;
            let matrix = to_matrix(&element, &cfg).map_err(CliError::usage)?;
            write_output(&out, &matrix.export_text())
                .map_err(|e| CliError::runtime(format!("cannot write matrix: {e}")))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Spectrum {
            n,
            q,
            cutoff,
            theta,
            phi,
            word,
            out,
        } => {
            let gens = build_generators(n, q).map_err(CliError::usage)?;
            let element = parse_word(&gens, &word).map_err(CliError::usage)?;
            let cfg = ReprConfig::new(n, cutoff, q, theta, build_phi(n, theta, &phi)?)
                .map_err(CliError::usage)?;
            let matrix = to_matrix(&element, &cfg).map_err(CliError::usage)?;
            match hermitian_spectrum(&matrix) {
                Ok(values) => {
                    let doc = serde_json::json!({
                        "schema_version": SCHEMA_VERSION,
                        "suite": "spectrum",
                        "params": { "n": n, "q": q, "N": cutoff, "theta": theta, "word": word },
                        "eigenvalues": values,
                    });
                    write_output(&out, &serde_json::to_string_pretty(&doc).unwrap())
                        .map_err(|e| CliError::runtime(format!("cannot write spectrum: {e}")))?;
                    Ok(ExitCode::SUCCESS)
                }
                Err(e) => {
                    eprintln!("spectrum check failed: {e}");
                    Ok(ExitCode::from(1))
                }
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
