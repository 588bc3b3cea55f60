//! Command-line front end. [`run`] returns the exit code and the text written
//! to stdout and stderr, so the binary stays a thin wrapper.

use std::fs;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::certify::{self, Certificate};
use crate::commutative::{jvdk_decompose, z_tame_decompose, CommEndo, CommStep};
use crate::estimate::check_estimate;
use crate::freealg::oracle_is_zero;
use crate::morphism::{abelianize_endo, compose, to_endo, Endo};
use crate::peel::{nc_decompose, FailureReason, MatchBounds, PeelError};
use crate::text::{parse_comm, parse_nc, render_comm, render_nc};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NOT_LIFTABLE: i32 = 10;
pub const EXIT_NOT_AUTOMORPHISM: i32 = 20;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 64;

#[derive(Parser, Debug)]
#[command(name = "zlift", version, about = "Exact algebra for lifting automorphisms of F[z][x,y]")]
pub struct Cli {
    /// Machine-readable JSON output.
    #[arg(long, global = true)]
    pub json: bool,
    /// Seed for randomized checks.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Matching bounds as `dp,nd` (denominator power, numerator degree).
    #[arg(long, global = true, value_parser = parse_bounds)]
    pub bounds: Option<MatchBounds>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Normalize and print an expression.
    Eval {
        expr: String,
        /// Read in commuting variables.
        #[arg(long)]
        comm: bool,
    },
    /// Product of two noncommutative expressions.
    Mul { a: String, b: String },
    /// `a ∘ b`: the images of `b` with the images of `a` substituted.
    Compose {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
    },
    /// Abelianize an expression, or an endomorphism given with --fx/--fy or --endo.
    Abelianize {
        expr: Option<String>,
        #[command(flatten)]
        endo: EndoArgs,
    },
    /// Canonical elementary sequence over F(z).
    DecomposeComm {
        #[command(flatten)]
        endo: EndoArgs,
    },
    /// Alternating elementary decomposition in the free algebra.
    DecomposeNc {
        #[command(flatten)]
        endo: EndoArgs,
    },
    /// Decomposition with coefficients in F[z], if one exists.
    TameCheck {
        #[command(flatten)]
        endo: EndoArgs,
    },
    /// Degree estimate for P(f, g).
    Estimate {
        #[arg(long)]
        f: String,
        #[arg(long)]
        g: String,
        #[arg(long = "P")]
        p: String,
    },
    /// Lifting certificate for an F[z]-automorphism.
    Certify {
        #[command(flatten)]
        endo: EndoArgs,
    },
    /// Completes a coordinate to an automorphism and certifies it.
    CertifyCoordinate {
        #[arg(long)]
        f: String,
    },
    /// Built-in demonstrations.
    Demo {
        #[arg(value_parser = ["nagata"])]
        name: String,
    },
}

#[derive(Args, Debug)]
pub struct EndoArgs {
    /// JSON file `{"image_x": ..., "image_y": ...}`, or the word `id`.
    #[arg(long, conflicts_with_all = ["fx", "fy"])]
    pub endo: Option<String>,
    #[arg(long, requires = "fy")]
    pub fx: Option<String>,
    #[arg(long, requires = "fx")]
    pub fy: Option<String>,
}

fn parse_bounds(s: &str) -> Result<MatchBounds, String> {
    let (a, b) = s.split_once(',').ok_or("expected dp,nd")?;
    let p = |t: &str| t.trim().parse::<u32>().map_err(|e| e.to_string());
    Ok(MatchBounds::new(p(a)?, p(b)?))
}

#[derive(Debug, Default, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome {
            code: EXIT_OK,
            stdout,
            stderr: String::new(),
        }
    }

    fn fail(code: i32, msg: impl ToString) -> Self {
        Outcome {
            code,
            stdout: String::new(),
            stderr: msg.to_string() + "\n",
        }
    }
}

struct Usage(String);

impl<E: std::fmt::Display> From<E> for Usage {
    fn from(e: E) -> Self {
        Usage(e.to_string())
    }
}

fn read_endo_json(arg: &str) -> Result<serde_json::Value, Usage> {
    if arg == "id" {
        return Ok(serde_json::json!({"image_x": "x", "image_y": "y"}));
    }
    let text = fs::read_to_string(arg).map_err(|e| Usage(format!("{arg}: {e}")))?;
    Ok(serde_json::from_str(&text)?)
}

fn nc_endo(a: &EndoArgs) -> Result<Endo, Usage> {
    match (&a.endo, &a.fx, &a.fy) {
        (Some(path), _, _) => Ok(serde_json::from_value(read_endo_json(path)?)?),
        (None, Some(fx), Some(fy)) => Ok(Endo::new(parse_nc(fx)?, parse_nc(fy)?)),
        _ => Err(Usage("expected --endo FILE or --fx EXPR --fy EXPR".into())),
    }
}

fn comm_endo(a: &EndoArgs) -> Result<CommEndo, Usage> {
    match (&a.endo, &a.fx, &a.fy) {
        (Some(path), _, _) => Ok(serde_json::from_value(read_endo_json(path)?)?),
        (None, Some(fx), Some(fy)) => Ok(CommEndo::new(parse_comm(fx)?, parse_comm(fy)?)),
        _ => Err(Usage("expected --endo FILE or --fx EXPR --fy EXPR".into())),
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

fn render_endo(e: &Endo) -> String {
    format!("image_x: {}\nimage_y: {}\n", render_nc(&e.image_x), render_nc(&e.image_y))
}

fn render_comm_endo(e: &CommEndo) -> String {
    format!("image_x: {}\nimage_y: {}\n", render_comm(&e.image_x), render_comm(&e.image_y))
}

fn render_steps(steps: &[CommStep]) -> String {
    steps
        .iter()
        .enumerate()
        .map(|(i, s)| format!("{i}: {}\n", certify::render_step(s)))
        .collect()
}

fn certificate_outcome(c: &Certificate, json: bool) -> Outcome {
    Outcome {
        code: c.verdict.exit_code(),
        stdout: if json { to_json(c) } else { c.render() },
        stderr: String::new(),
    }
}

/// Runs the command line given as `args` (including the program name).
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome::fail(code, text.trim_end())
            } else {
                Outcome::ok(text)
            };
        }
    };
    match dispatch(&cli) {
        Ok(o) => o,
        Err(Usage(msg)) => Outcome::fail(EXIT_USAGE, format!("error: {msg}")),
    }
}

fn dispatch(cli: &Cli) -> Result<Outcome, Usage> {
    let json = cli.json;
    let bounds = cli.bounds.unwrap_or_default();
    let out = match &cli.command {
        Command::Eval { expr, comm } => {
            if *comm {
                let p = parse_comm(expr)?;
                Outcome::ok(if json {
                    to_json(&serde_json::json!({ "value": render_comm(&p) }))
                } else {
                    format!("{}\n", render_comm(&p))
                })
            } else {
                let a = parse_nc(expr)?;
                let oracle_zero = oracle_is_zero(&a, cli.seed);
                Outcome::ok(if json {
                    to_json(&serde_json::json!({
                        "value": render_nc(&a),
                        "is_zero": a.is_zero(),
                        "oracle_is_zero": oracle_zero,
                        "seed": cli.seed,
                        "degree": a.degree(),
                        "has_sandwich": a.has_sandwich(),
                    }))
                } else {
                    format!("{}\n", render_nc(&a))
                })
            }
        }
        Command::Mul { a, b } => {
            let p = parse_nc(a)?.mul(&parse_nc(b)?);
            Outcome::ok(if json {
                to_json(&serde_json::json!({ "value": render_nc(&p) }))
            } else {
                format!("{}\n", render_nc(&p))
            })
        }
        Command::Compose { a, b } => {
            let ea: Endo = serde_json::from_value(read_endo_json(a)?)?;
            let eb: Endo = serde_json::from_value(read_endo_json(b)?)?;
            let c = compose(&ea, &eb);
            Outcome::ok(if json { to_json(&c) } else { render_endo(&c) })
        }
        Command::Abelianize { expr, endo } => match expr {
            Some(s) => {
                let p = parse_nc(s)?.abelianize();
                Outcome::ok(if json {
                    to_json(&serde_json::json!({ "value": render_comm(&p) }))
                } else {
                    format!("{}\n", render_comm(&p))
                })
            }
            None => {
                let e = abelianize_endo(&nc_endo(endo)?);
                Outcome::ok(if json { to_json(&e) } else { render_comm_endo(&e) })
            }
        },
        Command::DecomposeComm { endo } => match jvdk_decompose(&comm_endo(endo)?) {
            Ok(steps) => Outcome::ok(if json { to_json(&steps) } else { render_steps(&steps) }),
            Err(e) => Outcome::fail(EXIT_NOT_AUTOMORPHISM, e),
        },
        Command::TameCheck { endo } => match z_tame_decompose(&comm_endo(endo)?) {
            Ok(w) => {
                let tame = w.is_some();
                Outcome {
                    code: if tame { EXIT_OK } else { EXIT_NOT_LIFTABLE },
                    stdout: if json {
                        to_json(&serde_json::json!({ "z_tame": tame, "witness": w }))
                    } else {
                        match &w {
                            Some(s) => format!("z-tame\n{}", render_steps(s)),
                            None => "not z-tame\n".to_string(),
                        }
                    },
                    stderr: String::new(),
                }
            }
            Err(e) => Outcome::fail(EXIT_NOT_AUTOMORPHISM, e),
        },
        Command::DecomposeNc { endo } => match nc_decompose(&nc_endo(endo)?, &bounds) {
            Ok(d) => Outcome::ok(if json {
                to_json(&d.to_json())
            } else {
                d.steps
                    .iter()
                    .enumerate()
                    .map(|(i, s)| {
                        let e = to_endo(s);
                        format!("{i}: (x, y) -> ({}, {})\n", render_nc(&e.image_x), render_nc(&e.image_y))
                    })
                    .collect()
            }),
            Err(e @ PeelError::DecompositionFailed { reason, .. }) => {
                let code = match reason {
                    FailureReason::Bounds => EXIT_FAILURE,
                    FailureReason::NotAnAutomorphism => EXIT_NOT_AUTOMORPHISM,
                };
                Outcome::fail(code, e)
            }
            Err(e) => Outcome::fail(EXIT_FAILURE, e),
        },
        Command::Estimate { f, g, p } => match check_estimate(&parse_nc(f)?, &parse_nc(g)?, &parse_nc(p)?) {
            Ok(r) => Outcome::ok(if json {
                to_json(&r)
            } else {
                format!(
                    "lhs {} bound {} holds={} hypotheses {:?}\n",
                    r.lhs_degree, r.bound, r.holds, r.hypotheses
                )
            }),
            Err(e) => Outcome::fail(EXIT_FAILURE, e),
        },
        Command::Certify { endo } => match certify::certify(&comm_endo(endo)?) {
            Ok(c) => certificate_outcome(&c, json),
            Err(e) => Outcome::fail(EXIT_USAGE, e),
        },
        Command::CertifyCoordinate { f } => match certify::certify_coordinate(&parse_comm(f)?) {
            Ok(c) => certificate_outcome(&c, json),
            Err(e @ certify::CertifyError::NotACoordinate) => Outcome::fail(EXIT_NOT_AUTOMORPHISM, e),
            Err(e) => Outcome::fail(EXIT_USAGE, e),
        },
        Command::Demo { .. } => {
            let r = certify::nagata_demo();
            let code = r.certificate.verdict.exit_code();
            let stdout = if json {
                to_json(&r)
            } else {
                let mut s = render_comm_endo(&r.automorphism);
                s.push_str(&format!("jacobian: {}\n", r.jacobian_det));
                s.push_str(&format!("fixes {}: {}\n", r.invariant, r.fixes_invariant));
                s.push_str(&format!("canonical sequence (recomposes: {}):\n", r.recomposes));
                s.push_str(&render_steps(&r.canonical_sequence));
                s.push_str(&format!("coordinate verdicts: {:?}\n", r.coordinate_verdicts));
                s.push_str(&r.certificate.render());
                s
            };
            Outcome {
                code,
                stdout,
                stderr: String::new(),
            }
        }
    };
    Ok(out)
}
