use std::fs;
use std::path::Path;

use ncmoment::dilations::{halmos_dilation, normal_doubling, normal_doubling_centered, unitary_mean};
use ncmoment::geometry::{chebyshev_radius, spread, ChebyshevOptions};
use ncmoment::harness::{lemma1_bruteforce, run_examples, verify_suite, VerificationReport, VerifyOptions, DEFAULT_DIMS, DEFAULT_PS};
use ncmoment::json::{self, matrix_from_str, matrix_value};
use ncmoment::linalg::{operator_norm, ComplexMatrix, Density};
use ncmoment::moments::{bernoulli_b, central_moment_with, moment_report, MomentValue};
use ncmoment::pinching::{conditional_expectation, pinching_contractivity_check, Partition};
use ncmoment::states::{mu_p, reduce_to_projection, MuOptions};
use serde::Serialize;
use serde_json::json;

use crate::config::{Format, GlobalConfig};
use crate::{CliError, Command, DilationChoice, Output};

fn load_matrix(path: &Path) -> Result<ComplexMatrix, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    matrix_from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String, CliError> {
    let mut s = json::to_string(value)?;
    s.push('\n');
    Ok(s)
}

fn to_csv<T: Serialize>(rows: &[T]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).map_err(|e| CliError::Io(format!("csv: {e}")))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn json_only(cfg: &GlobalConfig, command: &str) -> Result<(), CliError> {
    if cfg.format == Format::Csv {
        return Err(CliError::Usage(format!("`{command}` has no CSV output; use --format json")));
    }
    Ok(())
}

fn passed(text: String) -> Output {
    Output { text, passed: true }
}

#[derive(Serialize)]
struct MomentRow {
    p: String,
    raw: String,
    root: String,
    mean_re: String,
    mean_im: String,
}

impl From<&MomentValue> for MomentRow {
    fn from(m: &MomentValue) -> Self {
        Self {
            p: num(m.p),
            raw: num(m.raw),
            root: num(m.root),
            mean_re: num(m.mean.re),
            mean_im: num(m.mean.im),
        }
    }
}

/// Columns in report order.
#[derive(Serialize)]
struct ReportRow {
    theorem_id: String,
    trials: usize,
    dim: usize,
    p: String,
    max_lhs: String,
    bound: String,
    max_slack: String,
    violations: usize,
    seed: u64,
    elapsed_s: String,
}

impl From<&VerificationReport> for ReportRow {
    fn from(r: &VerificationReport) -> Self {
        Self {
            theorem_id: r.theorem_id.clone(),
            trials: r.trials,
            dim: r.dim,
            p: num(r.p),
            max_lhs: num(r.max_lhs),
            bound: num(r.bound),
            max_slack: num(r.max_slack),
            violations: r.violations,
            seed: r.seed,
            elapsed_s: r.elapsed_s.map(num).unwrap_or_default(),
        }
    }
}

#[derive(Serialize)]
struct BernoulliRow {
    p: String,
    b_p: String,
    argmax_t: String,
}

pub fn dispatch(command: Command, cfg: &GlobalConfig) -> Result<Output, CliError> {
    let tol = &cfg.tolerances;
    match command {
        Command::Moment {
            matrix,
            density,
            p,
            bounds,
        } => {
            let a = load_matrix(&matrix)?;
            let d = match density {
                Some(path) => Density::new(load_matrix(&path)?, tol)?,
                None => Density::maximally_mixed(a.n()),
            };
            if bounds {
                json_only(cfg, "moment --bounds")?;
                let report = moment_report(&d, &a, &p, tol)?;
                return Ok(Output {
                    text: to_json(&report)?,
                    passed: report.all_hold(),
                });
            }
            let values = p
                .iter()
                .map(|&p| central_moment_with(&d, &a, p, tol))
                .collect::<Result<Vec<_>, _>>()?;
            let text = match cfg.format {
                Format::Csv => to_csv(&values.iter().map(MomentRow::from).collect::<Vec<_>>())?,
                Format::Json if values.len() == 1 => to_json(&values[0])?,
                Format::Json => to_json(&values)?,
            };
            Ok(passed(text))
        }
        Command::Mu { matrix, p, restarts } => {
            json_only(cfg, "mu")?;
            let a = load_matrix(&matrix)?;
            let opts = MuOptions {
                restarts,
                seed: cfg.seed,
                ..Default::default()
            };
            Ok(passed(to_json(&mu_p(&a, p, &opts)?)?))
        }
        Command::Reduce { matrix, density, p } => {
            json_only(cfg, "reduce")?;
            let a = load_matrix(&matrix)?;
            let d = Density::new(load_matrix(&density)?, tol)?;
            let red = reduce_to_projection(&d, &a, p, tol)?;
            let ok = red.trace.final_rank == 1 && red.residuals.iter().all(|&r| r <= tol.feasibility);
            Ok(Output {
                text: to_json(&red)?,
                passed: ok,
            })
        }
        Command::Chebyshev { matrix } => {
            json_only(cfg, "chebyshev")?;
            let a = load_matrix(&matrix)?;
            Ok(passed(to_json(&chebyshev_radius(&a, &ChebyshevOptions::default())?)?))
        }
        Command::Spread { matrix } => {
            json_only(cfg, "spread")?;
            let a = load_matrix(&matrix)?;
            Ok(passed(to_json(&spread(&a)?)?))
        }
        Command::Dilate {
            matrix,
            kind,
            normalize,
            centered,
        } => {
            json_only(cfg, "dilate")?;
            let mut a = load_matrix(&matrix)?;
            let mut scale = 1.0;
            if normalize {
                let norm = operator_norm(&a)?;
                if norm > 0.0 {
                    scale = 1.0 / norm;
                    a = a.scale_real(scale);
                }
            }
            let value = match kind {
                DilationChoice::Halmos => {
                    let pair = halmos_dilation(&a, tol)?;
                    json!({ "scale": scale, "dilation": pair })
                }
                DilationChoice::UnitaryMean => {
                    let (u1, u2) = unitary_mean(&a, tol)?;
                    json!({
                        "scale": scale,
                        "original": matrix_value(&a),
                        "unitaries": [matrix_value(&u1), matrix_value(&u2)],
                    })
                }
                DilationChoice::Doubling => {
                    let doubled = if centered {
                        normal_doubling_centered(&a, tol)?
                    } else {
                        normal_doubling(&a, tol)?
                    };
                    json!({ "scale": scale, "doubling": doubled })
                }
            };
            Ok(passed(to_json(&value)?))
        }
        Command::Pinch { matrix, blocks, basis, p } => {
            json_only(cfg, "pinch")?;
            let a = load_matrix(&matrix)?;
            let n = a.n();
            let mut part = match blocks {
                Some(spec) => Partition::parse(n, &spec)?,
                None => Partition::singletons(n),
            };
            if let Some(path) = basis {
                part = part.with_basis(load_matrix(&path)?, tol)?;
            }
            let e = conditional_expectation(&a, &part)?;
            let checks = p
                .iter()
                .map(|&p| pinching_contractivity_check(&a, &part, p))
                .collect::<Result<Vec<_>, _>>()?;
            let ok = checks.iter().all(|c| c.holds);
            let value = json!({
                // reported 1-based, matching `--blocks`
                "blocks": part
                    .blocks()
                    .iter()
                    .map(|b| b.iter().map(|i| i + 1).collect::<Vec<_>>())
                    .collect::<Vec<_>>(),
                "conditional_expectation": matrix_value(&e),
                "contractivity": checks,
            });
            Ok(Output {
                text: to_json(&value)?,
                passed: ok,
            })
        }
        Command::Bernoulli { p } => {
            let values = p.iter().map(|&p| bernoulli_b(p)).collect::<Result<Vec<_>, _>>()?;
            let text = match cfg.format {
                Format::Csv => to_csv(
                    &values
                        .iter()
                        .map(|b| BernoulliRow {
                            p: num(b.p),
                            b_p: num(b.b_p),
                            argmax_t: num(b.argmax_t),
                        })
                        .collect::<Vec<_>>(),
                )?,
                Format::Json if values.len() == 1 => to_json(&values[0])?,
                Format::Json => to_json(&values)?,
            };
            Ok(passed(text))
        }
        Command::Lemma1 { resolution } => {
            json_only(cfg, "lemma1")?;
            let res = lemma1_bruteforce(resolution)?;
            Ok(Output {
                text: to_json(&res)?,
                passed: res.max_value <= 1.0 + 1e-9,
            })
        }
        Command::Verify {
            suite,
            trials,
            dim,
            p,
            timing,
        } => {
            let dims = if dim.is_empty() { DEFAULT_DIMS.to_vec() } else { dim };
            let ps = if p.is_empty() { DEFAULT_PS.to_vec() } else { p };
            let reports = verify_suite(&suite, trials, &dims, &ps, cfg.seed, tol, &VerifyOptions { timing })?;
            let ok = reports.iter().all(VerificationReport::passed);
            let text = match cfg.format {
                Format::Csv => to_csv(&reports.iter().map(ReportRow::from).collect::<Vec<_>>())?,
                Format::Json if reports.len() == 1 => to_json(&reports[0])?,
                Format::Json => to_json(&reports)?,
            };
            Ok(Output { text, passed: ok })
        }
        Command::Examples => {
            json_only(cfg, "examples")?;
            let report = run_examples()?;
            Ok(Output {
                text: to_json(&report)?,
                passed: report.passed,
            })
        }
    }
}
