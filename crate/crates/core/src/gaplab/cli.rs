//! The `minknap` command line.
//!
//! Exit codes: 0 success or certified point, 2 bad input, 3 violated cut
//! found by `separate`, 4 DP budget exceeded.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::cutloop::{self, Config, FsTrigger};
use crate::error::{Error, Result};
use crate::knapdp::{self, DEFAULT_DP_BUDGET};
use crate::model::rational::parse_rational;
use crate::model::{is_valid, Family, Inequality, Instance, Point, Rational};
use crate::sep::{self, KcMode, OracleMode, SeparationResult, ViolatedCut};

use super::experiment::{experiment_gap_table, write_csv, ExperimentFamily, ExperimentRow};
use super::format::{
    parse_inequality_spec, parse_instance, parse_rational_list, serialize_instance,
};
use super::{gen_lemma4, gen_ola, gen_pitch3_wild, gen_random};

pub const EXIT_OK: i32 = 0;
pub const EXIT_BAD_INPUT: i32 = 2;
pub const EXIT_VIOLATED: i32 = 3;
pub const EXIT_BUDGET: i32 = 4;

#[derive(Parser, Debug)]
#[command(
    name = "minknap",
    version,
    about = "Exact separation and cutting planes for min-knapsack"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum GenFamily {
    Lemma4,
    Ola,
    Wild,
    Random,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SolveModeArg {
    Exact,
    Fptas,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OracleArg {
    Exact,
    Approx,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum KcArg {
    Heuristic,
    Exhaustive,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FsArg {
    Lp,
    Full,
    Both,
}

#[derive(clap::Args, Debug)]
struct CutArgs {
    /// Comma-separated subset of kc, p12, fs.
    #[arg(long, default_value = "p12")]
    families: String,
    #[arg(long, default_value = "1/100")]
    eps: String,
    #[arg(long, value_enum, default_value = "exact")]
    mode: OracleArg,
    #[arg(long, value_enum, default_value = "heuristic")]
    kc_mode: KcArg,
    #[arg(long, value_enum, default_value = "lp")]
    fs_trigger: FsArg,
    /// Only look for fixed-support cuts of at most this pitch.
    #[arg(long)]
    fs_pitch_bound: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a generated instance.
    Gen {
        #[arg(long, value_enum)]
        family: GenFamily,
        #[arg(long, default_value_t = 4)]
        n: u64,
        #[arg(long, default_value = "1/8")]
        eps: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        p_equals_c: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Solve an instance and print the optimum.
    Solve {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "exact")]
        mode: SolveModeArg,
        #[arg(long, default_value = "1/100")]
        eps: String,
        /// Maximum number of DP cells.
        #[arg(long, default_value_t = DEFAULT_DP_BUDGET)]
        budget: u64,
    },
    /// Separate a point given in input order.
    Separate {
        file: PathBuf,
        #[arg(long)]
        point: String,
        #[command(flatten)]
        cuts: CutArgs,
    },
    /// Run the cutting-plane loop.
    Cutplane {
        file: PathBuf,
        #[command(flatten)]
        cuts: CutArgs,
        #[arg(long, default_value_t = 1000)]
        max_iter: usize,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Print the pitch and validity of an inequality given in input order.
    Verify {
        file: PathBuf,
        #[arg(long)]
        ineq: String,
    },
    /// Run a gap experiment over several sizes.
    GapTable {
        #[arg(long, value_enum)]
        family: GenFamily,
        #[arg(long, value_delimiter = ',', default_value = "4")]
        n_list: Vec<u64>,
        #[arg(long, default_value = "1/8")]
        eps: String,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Parses `argv` (program name first), runs the command and returns the
/// exit code. Output goes to stdout, diagnostics to stderr.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                EXIT_BAD_INPUT
            } else {
                EXIT_OK
            };
        }
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match execute(cli.command, &mut out) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::BudgetExceeded { .. } => EXIT_BUDGET,
                _ => EXIT_BAD_INPUT,
            }
        }
    }
}

fn arg_rational(name: &str, text: &str) -> Result<Rational> {
    parse_rational(text).map_err(|(off, msg)| Error::Parse {
        line: 1,
        column: off + 1,
        message: format!("--{name}: {msg}"),
    })
}

fn load(path: &Path) -> Result<Instance> {
    let text =
        fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let raw = parse_instance(&text).map_err(|e| match e {
        Error::Parse {
            line,
            column,
            message,
        } => Error::Parse {
            line,
            column,
            message: format!("{}: {message}", path.display()),
        },
        other => other,
    })?;
    Instance::normalize(&raw)
}

fn io(e: std::io::Error) -> Error {
    Error::from(e)
}

struct Families {
    kc: bool,
    p12: bool,
    fs: bool,
}

fn parse_families(text: &str) -> Result<Families> {
    let mut f = Families {
        kc: false,
        p12: false,
        fs: false,
    };
    for part in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match part {
            "kc" => f.kc = true,
            "p12" => f.p12 = true,
            "fs" => f.fs = true,
            other => {
                return Err(Error::Precondition(format!(
                    "unknown cut family {other:?}; expected kc, p12 or fs"
                )))
            }
        }
    }
    Ok(f)
}

fn build_config(args: &CutArgs, max_iter: usize) -> Result<Config> {
    let fams = parse_families(&args.families)?;
    Ok(Config {
        kc: fams.kc.then_some(match args.kc_mode {
            KcArg::Heuristic => KcMode::Heuristic,
            KcArg::Exhaustive => KcMode::Exhaustive,
        }),
        p12: fams.p12,
        fixed_support: fams.fs.then_some(match args.fs_trigger {
            FsArg::Lp => FsTrigger::LpSupport,
            FsArg::Full => FsTrigger::Full,
            FsArg::Both => FsTrigger::Both,
        }),
        fs_pitch_bound: args.fs_pitch_bound,
        eps: arg_rational("eps", &args.eps)?,
        mode: match args.mode {
            OracleArg::Exact => OracleMode::Exact,
            OracleArg::Approx => OracleMode::Approximate,
        },
        max_iter,
        check_cuts: false,
    })
}

fn labelled(inst: &Instance, cut: &Inequality) -> String {
    cut.display_with(inst.labels()).to_string()
}

fn execute(command: Command, out: &mut impl Write) -> Result<i32> {
    match command {
        Command::Gen {
            family,
            n,
            eps,
            seed,
            p_equals_c,
            output,
        } => {
            let raw = match family {
                GenFamily::Lemma4 => gen_lemma4(n, &arg_rational("eps", &eps)?)?,
                GenFamily::Ola => gen_ola(n)?,
                GenFamily::Wild => gen_pitch3_wild(),
                GenFamily::Random => gen_random(n as usize, seed, p_equals_c)?,
            };
            let text = serialize_instance(&raw)?;
            match output {
                Some(path) => fs::write(&path, text).map_err(io)?,
                None => out.write_all(text.as_bytes()).map_err(io)?,
            }
            Ok(EXIT_OK)
        }
        Command::Solve {
            file,
            mode,
            eps,
            budget,
        } => {
            let inst = load(&file)?;
            let sol = match mode {
                SolveModeArg::Exact => knapdp::solve_exact_budgeted(&inst, inst.costs(), budget)?,
                SolveModeArg::Fptas => knapdp::solve_fptas_budgeted(
                    &inst,
                    inst.costs(),
                    &arg_rational("eps", &eps)?,
                    budget,
                )?,
            };
            writeln!(out, "{}", sol.value).map_err(io)?;
            let mut chosen = sol.chosen.clone();
            chosen.sort_by_key(|&i| inst.input_index(i));
            let labels: Vec<&str> = chosen.iter().map(|&i| inst.label(i)).collect();
            writeln!(out, "chosen {}", labels.join(" ")).map_err(io)?;
            Ok(EXIT_OK)
        }
        Command::Separate { file, point, cuts } => {
            let inst = load(&file)?;
            let coords = parse_rational_list(&point)?;
            let x = Point::new(inst.from_input_order(&coords)?)?;
            let config = build_config(&cuts, 0)?;
            let mut candidates: Vec<ViolatedCut> = Vec::new();
            if let Some(mode) = config.kc {
                candidates.extend(sep::separate_kc(&inst, &x, mode)?);
            }
            let mut certificate = None;
            if config.p12 {
                match sep::pitch12_oracle(&inst, &x, &config.eps, config.mode)? {
                    SeparationResult::Violated(v) => candidates.push(v),
                    SeparationResult::Certified(y) => certificate = Some(y),
                }
            }
            if let Some(trigger) = config.fixed_support {
                let support = match trigger {
                    FsTrigger::LpSupport => x.support(),
                    _ => (0..inst.len()).collect(),
                };
                if inst.beta_of_support(&support) > Rational::from_integer(0.into()) {
                    let res =
                        sep::separate_fixed_support(&inst, &x, &support, config.fs_pitch_bound)?;
                    candidates.extend(res.cut);
                }
            }
            let row = sep::knapsack_row(&inst);
            if row.is_violated_by(&x) {
                let violation = row.violation(&x);
                candidates.push(ViolatedCut {
                    cut: row,
                    violation,
                });
            }
            let mut best: Option<ViolatedCut> = None;
            for c in candidates {
                if best.as_ref().is_none_or(|b| c.relative() > b.relative()) {
                    best = Some(c);
                }
            }
            if let Some(best) = best {
                writeln!(out, "{}", labelled(&inst, &best.cut)).map_err(io)?;
                writeln!(
                    out,
                    "family={} violation={}",
                    best.cut.family(),
                    best.violation
                )
                .map_err(io)?;
                return Ok(EXIT_VIOLATED);
            }
            match certificate {
                Some(y) => {
                    let coords: Vec<String> = inst
                        .to_input_order(y.coords())
                        .iter()
                        .map(|v| v.to_string())
                        .collect();
                    writeln!(out, "certified {}", coords.join(",")).map_err(io)?;
                }
                None => writeln!(out, "no violated cut").map_err(io)?,
            }
            Ok(EXIT_OK)
        }
        Command::Cutplane {
            file,
            cuts,
            max_iter,
            report,
        } => {
            let inst = load(&file)?;
            let config = build_config(&cuts, max_iter)?;
            let id = file.display().to_string();
            let start = std::time::Instant::now();
            let rep = cutloop::run_named(&inst, &config, &id)?;
            let ms = start.elapsed().as_millis();
            writeln!(out, "int_opt={}", rep.int_opt).map_err(io)?;
            writeln!(out, "lp_value={}", rep.final_lp).map_err(io)?;
            match &rep.gap {
                Some(g) => writeln!(out, "gap={g}").map_err(io)?,
                None => writeln!(out, "gap=inf").map_err(io)?,
            }
            writeln!(
                out,
                "iterations={} cuts_kc={} cuts_p12={} cuts_fs={} reason={}",
                rep.lp_values.len() - 1,
                rep.cuts_kc,
                rep.cuts_p12,
                rep.cuts_fs,
                rep.termination
            )
            .map_err(io)?;
            for cut in rep.pool.cuts() {
                writeln!(out, "cut {} [{}]", labelled(&inst, cut), cut.family()).map_err(io)?;
            }
            if let Some(path) = report {
                let row = ExperimentRow {
                    family: "file".into(),
                    n: inst.len() as u64,
                    params: format!("families={}", cuts.families),
                    int_opt: Some(rep.int_opt.clone()),
                    lp_value: Some(rep.final_lp.clone()),
                    gap: rep.gap.clone(),
                    cuts_kc: rep.cuts_kc,
                    cuts_p12: rep.cuts_p12,
                    cuts_fs: rep.cuts_fs,
                    reason: rep.termination.name().into(),
                    ms,
                    ok: true,
                };
                let f = fs::File::create(&path).map_err(io)?;
                write_csv(f, &[row])?;
            }
            Ok(EXIT_OK)
        }
        Command::Verify { file, ineq } => {
            let inst = load(&file)?;
            let (coeffs, rhs) = parse_inequality_spec(&ineq)?;
            let dense = inst.from_input_order(&coeffs)?;
            let ineq = Inequality::from_dense(&dense, rhs, Family::User)?;
            let valid = is_valid(&ineq, &inst)?;
            writeln!(out, "pitch={} valid={valid}", ineq.pitch()).map_err(io)?;
            Ok(EXIT_OK)
        }
        Command::GapTable {
            family,
            n_list,
            eps,
            k,
            seed,
            out: path,
        } => {
            let family = match family {
                GenFamily::Lemma4 => ExperimentFamily::Lemma4 {
                    eps: arg_rational("eps", &eps)?,
                },
                GenFamily::Ola => ExperimentFamily::Ola { k },
                GenFamily::Wild => ExperimentFamily::Pitch3Wild,
                GenFamily::Random => ExperimentFamily::Random {
                    seed,
                    p_equals_c: false,
                },
            };
            let rows = experiment_gap_table(&family, &n_list, None);
            match path {
                Some(p) => write_csv(fs::File::create(&p).map_err(io)?, &rows)?,
                None => write_csv(&mut *out, &rows)?,
            }
            Ok(EXIT_OK)
        }
    }
}
