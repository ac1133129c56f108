//! Command-line front end.
//!
//! Every verb writes one JSON document (or a text rendering) to stdout and
//! maps failures onto stable exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | invalid input (parse or validation), or a partition that fails `verify` |
//! | 2 | wrong parity for the verb |
//! | 3 | modulus too large for the exhaustive bounds |
//! | 4 | internal invariant failure (a bug; a reproduction dump is printed) |
//! | 5 | `explore` or `oracle-solve` found an odd-modulus counterexample |

use std::io::Read;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::hall::SearchConfig;
use crate::oracle::{self, OracleBounds};
use crate::solver;
use crate::zmod::{
    validate_instance, verify_partition, Instance, Orientation, Pair, PairPartition, Parity,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_PARITY: i32 = 2;
pub const EXIT_TOO_LARGE: i32 = 3;
pub const EXIT_INTERNAL: i32 = 4;
pub const EXIT_COUNTEREXAMPLE: i32 = 5;

#[derive(Debug, Parser)]
#[command(
    name = "seating",
    version,
    about = "Partition Z/N into pairs with prescribed differences"
)]
pub struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,

    /// Largest modulus for oracle-solve and count (env: SEATING_ORACLE_MAX_N).
    #[arg(long, global = true)]
    pub max_n: Option<u64>,

    /// Largest even modulus for explore (env: SEATING_SWEEP_MAX_EVEN).
    #[arg(long, global = true)]
    pub sweep_even: Option<u64>,

    /// Largest odd modulus for explore (env: SEATING_SWEEP_MAX_ODD).
    #[arg(long, global = true)]
    pub sweep_odd: Option<u64>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Args)]
pub struct InstanceSource {
    /// Instance file: "N d1 ... dn" or {"N": .., "differences": [..]}.
    #[arg(long, conflicts_with = "values")]
    pub file: Option<PathBuf>,

    /// N followed by the n differences.
    #[arg(allow_negative_numbers = true)]
    pub values: Vec<i64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve an even instance with the constructive pipeline.
    Solve {
        #[command(flatten)]
        source: InstanceSource,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Solve any instance by exhaustive search.
    OracleSolve {
        #[command(flatten)]
        source: InstanceSource,
    },
    /// Count partitions matching the difference classes.
    Count {
        #[command(flatten)]
        source: InstanceSource,
    },
    /// Check a solution document (read from --file or stdin).
    Verify {
        #[arg(long)]
        file: Option<PathBuf>,
    },
    /// Sweep every instance for a range of moduli.
    Explore {
        #[arg(long, conflicts_with = "odd", required_unless_present = "odd")]
        even: bool,
        #[arg(long)]
        odd: bool,
        from: u64,
        to: u64,
        /// Worker threads (default: available parallelism).
        #[arg(long)]
        jobs: Option<usize>,
    },
}

/// What a run produced: exit code plus the text for each stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Deserialize)]
struct InstanceDoc {
    #[serde(rename = "N")]
    modulus: i64,
    differences: Vec<i64>,
}

/// Parses `"N d1 d2 ... dn"` or `{"N": N, "differences": [...]}`.
pub fn parse_instance(text: &str) -> Result<Instance> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('{') {
        let doc: InstanceDoc = serde_json::from_str(text).map_err(|e| Error::Parse {
            position: e.column(),
            message: e.to_string(),
        })?;
        return validate_instance(doc.modulus, &doc.differences);
    }

    let mut numbers = Vec::new();
    let mut offset = 0;
    for token in text.split_whitespace() {
        let position = offset + text[offset..].find(token).unwrap_or(0);
        offset = position + token.len();
        let value = token.parse::<i64>().map_err(|_| Error::Parse {
            position,
            message: format!("expected an integer, found {token:?}"),
        })?;
        numbers.push(value);
    }
    let Some((&modulus, ds)) = numbers.split_first() else {
        return Err(Error::Parse {
            position: 0,
            message: "empty instance".into(),
        });
    };
    validate_instance(modulus, ds)
}

fn read_source(source: &InstanceSource) -> Result<Instance> {
    match &source.file {
        Some(path) => parse_instance(&read_file(path)?),
        None => match source.values.split_first() {
            Some((&modulus, ds)) => validate_instance(modulus, ds),
            None => Err(Error::Parse {
                position: 0,
                message: "no instance given: pass N d1 ... dn or --file".into(),
            }),
        },
    }
}

fn read_file(path: &PathBuf) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Parse {
        position: 0,
        message: format!("cannot read {}: {e}", path.display()),
    })
}

/// The document printed by `solve` and `oracle-solve`, and read by `verify`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolutionDoc {
    #[serde(rename = "N")]
    pub modulus: u64,
    pub differences: Vec<u64>,
    pub pairs: Vec<[u64; 2]>,
    /// 1-based index into `differences` realized by each pair.
    pub realizes: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orientations: Option<Vec<Orientation>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signs: Option<Vec<i8>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl SolutionDoc {
    pub fn from_partition(p: &PairPartition) -> Self {
        SolutionDoc {
            modulus: p.instance.modulus(),
            differences: p.instance.difference_values(),
            pairs: p.pairs.iter().map(|q| [q.a, q.b]).collect(),
            realizes: p.pairs.iter().map(|q| q.index + 1).collect(),
            orientations: Some(p.pairs.iter().map(|q| q.orientation).collect()),
            signs: None,
            seed: None,
        }
    }

    /// Rebuilds the partition. A missing orientation is read off the pair:
    /// `a-b` when `a - b` equals the difference, `b-a` otherwise.
    pub fn to_partition(&self) -> Result<PairPartition> {
        let ds: Vec<i64> = self.differences.iter().map(|&d| d as i64).collect();
        let instance = validate_instance(self.modulus as i64, &ds)?;
        if self.realizes.len() != self.pairs.len() {
            return Err(Error::Parse {
                position: 0,
                message: "\"realizes\" must have one entry per pair".into(),
            });
        }
        if let Some(o) = &self.orientations {
            if o.len() != self.pairs.len() {
                return Err(Error::Parse {
                    position: 0,
                    message: "\"orientations\" must have one entry per pair".into(),
                });
            }
        }
        let m = instance.modulus();
        let pairs = self
            .pairs
            .iter()
            .zip(&self.realizes)
            .enumerate()
            .map(|(k, (&[a, b], &j))| {
                // out-of-range indices are left for the verifier to report
                let index = j.wrapping_sub(1);
                let orientation = match &self.orientations {
                    Some(o) => o[k],
                    None => {
                        let d = self.differences.get(index).copied().unwrap_or(0) % m;
                        if (a % m + m - b % m) % m == d {
                            Orientation::AMinusB
                        } else {
                            Orientation::BMinusA
                        }
                    }
                };
                Pair {
                    a,
                    b,
                    index,
                    orientation,
                }
            })
            .collect();
        Ok(PairPartition { instance, pairs })
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::WrongParity { .. } => EXIT_PARITY,
        Error::TooLarge { .. } => EXIT_TOO_LARGE,
        Error::Internal { .. } => EXIT_INTERNAL,
        _ => EXIT_INVALID,
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::InvalidModulus(_) => "invalid_modulus",
        Error::WrongCount { .. } => "wrong_count",
        Error::NonUnit { .. } => "non_unit",
        Error::ModulusMismatch(..) => "modulus_mismatch",
        Error::WrongParity { .. } => "wrong_parity",
        Error::TooLarge { .. } => "too_large",
        Error::Parse { .. } => "parse",
        Error::Precondition(_) => "precondition",
        Error::Internal { .. } => "internal",
    }
}

fn bounds(cli: &Cli) -> Result<OracleBounds> {
    let mut b = OracleBounds::from_env()?;
    if let Some(v) = cli.max_n {
        b.max_n = v;
    }
    if let Some(v) = cli.sweep_even {
        b.sweep_even = v;
    }
    if let Some(v) = cli.sweep_odd {
        b.sweep_odd = v;
    }
    Ok(b)
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string(value).expect("serializable output");
    s.push('\n');
    s
}

fn render_pairs(doc: &SolutionDoc) -> String {
    let mut out = format!("N = {}, differences = {:?}\n", doc.modulus, doc.differences);
    for (k, (&[a, b], &j)) in doc.pairs.iter().zip(&doc.realizes).enumerate() {
        let d = doc.differences.get(j.wrapping_sub(1)).copied().unwrap_or(0);
        let how = match doc.orientations.as_ref().map(|o| o[k]) {
            Some(Orientation::AMinusB) => format!("{a} - {b}"),
            Some(Orientation::BMinusA) => format!("{b} - {a}"),
            None => String::new(),
        };
        out.push_str(&format!("  {{{a}, {b}}}  d{j} = {d}  ({how})\n"));
    }
    if let Some(signs) = &doc.signs {
        let s: Vec<String> = signs
            .iter()
            .map(|&x| if x > 0 { "+".into() } else { "-".into() })
            .collect();
        out.push_str(&format!("signs: {}\n", s.join(" ")));
    }
    out
}

fn run_inner(cli: &Cli, stdin: &mut dyn Read) -> Result<Outcome> {
    let ok = |stdout: String| Outcome {
        code: EXIT_OK,
        stdout,
        stderr: String::new(),
    };
    let text = cli.format == Format::Text;

    match &cli.command {
        Command::Solve { source, seed } => {
            let inst = read_source(source)?;
            let solved = solver::solve(&inst, &SearchConfig::with_seed(*seed))?;
            let mut doc = SolutionDoc::from_partition(&solved.partition);
            doc.signs = Some(solved.signs.signs.clone());
            doc.seed = Some(*seed);
            Ok(ok(if text {
                render_pairs(&doc)
            } else {
                to_json(&doc)
            }))
        }
        Command::OracleSolve { source } => {
            let inst = read_source(source)?;
            let b = bounds(cli)?;
            match oracle::oracle_solve(&inst, &b)? {
                Some(p) => {
                    let doc = SolutionDoc::from_partition(&p);
                    Ok(ok(if text {
                        render_pairs(&doc)
                    } else {
                        to_json(&doc)
                    }))
                }
                None if inst.parity() == Parity::Even => Err(Error::internal(
                    "no partition exists for an even instance",
                    format!("N={} ds={:?}", inst.modulus(), inst.difference_values()),
                )),
                None => {
                    let body = json!({
                        "N": inst.modulus(),
                        "differences": inst.difference_values(),
                        "counterexample": true,
                    });
                    Ok(Outcome {
                        code: EXIT_COUNTEREXAMPLE,
                        stdout: if text {
                            format!(
                                "COUNTEREXAMPLE: no partition of Z/{} \\ {{0}} for {:?}\n",
                                inst.modulus(),
                                inst.difference_values()
                            )
                        } else {
                            to_json(&body)
                        },
                        stderr: String::new(),
                    })
                }
            }
        }
        Command::Count { source } => {
            let inst = read_source(source)?;
            let count = oracle::oracle_count(&inst, &bounds(cli)?)?;
            Ok(ok(if text {
                format!("{count}\n")
            } else {
                to_json(&json!({ "count": count }))
            }))
        }
        Command::Verify { file } => {
            let raw = match file {
                Some(path) => read_file(path)?,
                None => {
                    let mut buf = String::new();
                    stdin.read_to_string(&mut buf).map_err(|e| Error::Parse {
                        position: 0,
                        message: format!("cannot read stdin: {e}"),
                    })?;
                    buf
                }
            };
            let doc: SolutionDoc = serde_json::from_str(&raw).map_err(|e| Error::Parse {
                position: e.column(),
                message: e.to_string(),
            })?;
            let report = verify_partition(&doc.to_partition()?);
            let stdout = if text {
                if report.valid {
                    "valid\n".to_string()
                } else {
                    let lines: Vec<String> =
                        report.failures.iter().map(|f| format!("  {f:?}")).collect();
                    format!("invalid\n{}\n", lines.join("\n"))
                }
            } else {
                to_json(&report)
            };
            Ok(Outcome {
                code: if report.valid { EXIT_OK } else { EXIT_INVALID },
                stdout,
                stderr: String::new(),
            })
        }
        Command::Explore {
            even,
            odd: _,
            from,
            to,
            jobs,
        } => {
            let parity = if *even { Parity::Even } else { Parity::Odd };
            let report = oracle::explore(*from, *to, parity, &bounds(cli)?, *jobs)?;
            let stdout = if text {
                let mut s = format!("{parity} moduli {:?}\n", report.range);
                for m in &report.per_modulus {
                    s.push_str(&format!(
                        "  N={:<3} instances={:<7} failures={} ({:.2}s)\n",
                        m.modulus, m.instances, m.failures, m.seconds
                    ));
                }
                s.push_str(&format!(
                    "{} instances, {} failures\n",
                    report.total_instances,
                    report.failures.len()
                ));
                for f in &report.failures {
                    s.push_str(&format!(
                        "COUNTEREXAMPLE N={} {:?}\n",
                        f.modulus, f.differences
                    ));
                }
                s
            } else {
                to_json(&report)
            };
            Ok(Outcome {
                code: if report.failures.is_empty() {
                    EXIT_OK
                } else {
                    EXIT_COUNTEREXAMPLE
                },
                stdout,
                stderr: String::new(),
            })
        }
    }
}

/// Runs one command. `stdin` is only read by `verify` without `--file`.
pub fn run(cli: &Cli, stdin: &mut dyn Read) -> Outcome {
    match run_inner(cli, stdin) {
        Ok(outcome) => outcome,
        Err(e) => {
            let stderr = if cli.format == Format::Text {
                match &e {
                    Error::Internal { dump, .. } => format!("error: {e}\nreproduction: {dump}\n"),
                    _ => format!("error: {e}\n"),
                }
            } else {
                let mut body = json!({ "error": error_kind(&e), "message": e.to_string() });
                if let Error::WrongParity {
                    expected: Parity::Even,
                } = &e
                {
                    body["hint"] = json!("odd moduli have no construction; use `oracle-solve`");
                }
                if let Error::Internal { dump, .. } = &e {
                    body["reproduction"] = json!({
                        "command": std::env::args().collect::<Vec<_>>(),
                        "state": dump,
                    });
                }
                to_json(&body)
            };
            Outcome {
                code: exit_code(&e),
                stdout: String::new(),
                stderr,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> Outcome {
        let cli =
            Cli::try_parse_from(std::iter::once("seating").chain(args.iter().copied())).unwrap();
        run(&cli, &mut std::io::empty())
    }

    #[test]
    fn parse_text_and_json() {
        let inst = parse_instance("4 1 3").unwrap();
        assert_eq!((inst.modulus(), inst.difference_values()), (4, vec![1, 3]));
        let inst = parse_instance(r#"{"N":6,"differences":[1,5,1]}"#).unwrap();
        assert_eq!(
            (inst.modulus(), inst.difference_values()),
            (6, vec![1, 5, 1])
        );
        let inst = parse_instance("  6\n-1 5\t1 ").unwrap();
        assert_eq!(inst.difference_values(), vec![5, 5, 1]);
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            parse_instance("4 1 2"),
            Err(Error::NonUnit { index: 2, .. })
        ));
        assert_eq!(
            parse_instance("4 1 x3"),
            Err(Error::Parse {
                position: 4,
                message: "expected an integer, found \"x3\"".into()
            })
        );
        assert!(matches!(parse_instance("   "), Err(Error::Parse { .. })));
        assert!(matches!(
            parse_instance("{\"N\": 4}"),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run_args(&["solve", "4", "1", "2"]).code, EXIT_INVALID);
        assert_eq!(run_args(&["solve", "5", "1", "2"]).code, EXIT_PARITY);
        assert_eq!(
            run_args(&[
                "count", "33", "1", "1", "1", "1", "1", "1", "1", "1", "1", "1", "1", "1", "1",
                "1", "1", "1"
            ])
            .code,
            EXIT_TOO_LARGE
        );
        assert_eq!(
            run_args(&["explore", "--even", "2", "30"]).code,
            EXIT_TOO_LARGE
        );
        assert_eq!(run_args(&["solve"]).code, EXIT_INVALID);
    }

    #[test]
    fn count_output() {
        let out = run_args(&["count", "4", "1", "1"]);
        assert_eq!(out.code, 0);
        assert_eq!(out.stdout, "{\"count\":2}\n");
    }

    #[test]
    fn solve_output_schema() {
        let out = run_args(&["solve", "6", "1", "5", "1", "--seed", "0"]);
        assert_eq!(out.code, 0);
        assert_eq!(
            out.stdout,
            "{\"N\":6,\"differences\":[1,5,1],\"pairs\":[[2,3],[4,5],[0,1]],\"realizes\":[1,2,3],\
             \"orientations\":[\"b-a\",\"a-b\",\"b-a\"],\"signs\":[-1,1,-1],\"seed\":0}\n"
        );
    }

    #[test]
    fn verify_infers_missing_orientation() {
        let doc = SolutionDoc {
            modulus: 4,
            differences: vec![1, 3],
            pairs: vec![[2, 1], [0, 3]],
            realizes: vec![1, 2],
            orientations: None,
            signs: None,
            seed: None,
        };
        assert!(verify_partition(&doc.to_partition().unwrap()).valid);

        let bad = SolutionDoc {
            pairs: vec![[0, 2], [1, 3]],
            ..doc
        };
        assert!(!verify_partition(&bad.to_partition().unwrap()).valid);
    }

    #[test]
    fn text_format() {
        let out = run_args(&["--format", "text", "solve", "4", "1", "3"]);
        assert_eq!(out.code, 0);
        assert!(
            out.stdout.contains("{2, 1}  d1 = 1  (2 - 1)"),
            "{}",
            out.stdout
        );
        assert!(out.stdout.contains("signs: + -"));
    }

    #[test]
    fn errors_are_json_on_stderr() {
        let out = run_args(&["solve", "4", "1", "2"]);
        let v: serde_json::Value = serde_json::from_str(&out.stderr).unwrap();
        assert_eq!(v["error"], "non_unit");
    }
}
