//! Gap experiments and their CSV reports.

use std::io::Write;
use std::time::Instant;

use crate::cutloop::{self, Config, FsTrigger, GapReport};
use crate::error::{Error, Result};
use crate::model::rational::to_decimal;
use crate::model::{is_valid, Family, Inequality, Instance, Rational};
use crate::sep::{self, KcMode, OracleMode};

use super::{gen_lemma4, gen_ola, gen_pitch3_wild, gen_random, lemma4_point};

pub const CSV_HEADER: [&str; 12] = [
    "family",
    "n",
    "params",
    "int_opt",
    "lp_value",
    "gap",
    "gap_decimal",
    "cuts_kc",
    "cuts_p12",
    "cuts_fs",
    "reason",
    "ms",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExperimentFamily {
    Lemma4 { eps: Rational },
    Ola { k: usize },
    Pitch3Wild,
    Random { seed: u64, p_equals_c: bool },
}

impl ExperimentFamily {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentFamily::Lemma4 { .. } => "lemma4",
            ExperimentFamily::Ola { .. } => "ola",
            ExperimentFamily::Pitch3Wild => "pitch3_wild",
            ExperimentFamily::Random { .. } => "random",
        }
    }

    pub fn params(&self) -> String {
        match self {
            ExperimentFamily::Lemma4 { eps } => format!("eps={eps}"),
            ExperimentFamily::Ola { k } => format!("k={k}"),
            ExperimentFamily::Pitch3Wild => String::new(),
            ExperimentFamily::Random { seed, p_equals_c } => {
                format!("seed={seed};p_equals_c={p_equals_c}")
            }
        }
    }

    /// Cut configuration used for this family's gap table: pitch-1/pitch-2
    /// everywhere, plus heuristic KC and full-support fixed-support cuts of
    /// pitch at most `k` for `ola`.
    pub fn default_config(&self) -> Config {
        match self {
            ExperimentFamily::Ola { k } => Config {
                kc: Some(KcMode::Heuristic),
                p12: true,
                fixed_support: Some(FsTrigger::Full),
                fs_pitch_bound: Some(*k),
                ..Config::default()
            },
            _ => Config::default(),
        }
    }

    pub fn build(&self, n: u64) -> Result<Instance> {
        let raw = match self {
            ExperimentFamily::Lemma4 { eps } => gen_lemma4(n, eps)?,
            ExperimentFamily::Ola { .. } => gen_ola(n)?,
            ExperimentFamily::Pitch3Wild => gen_pitch3_wild(),
            ExperimentFamily::Random { seed, p_equals_c } => {
                gen_random(n as usize, *seed, *p_equals_c)?
            }
        };
        Instance::normalize(&raw)
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentRow {
    pub family: String,
    pub n: u64,
    pub params: String,
    pub int_opt: Option<Rational>,
    pub lp_value: Option<Rational>,
    pub gap: Option<Rational>,
    pub cuts_kc: usize,
    pub cuts_p12: usize,
    pub cuts_fs: usize,
    /// Termination reason, extra checks, or the error that stopped the row.
    pub reason: String,
    pub ms: u128,
    /// False when the run or one of the family's checks failed.
    pub ok: bool,
}

impl ExperimentRow {
    fn from_report(family: &ExperimentFamily, n: u64, report: &GapReport) -> ExperimentRow {
        ExperimentRow {
            family: family.name().to_string(),
            n,
            params: family.params(),
            int_opt: Some(report.int_opt.clone()),
            lp_value: Some(report.final_lp.clone()),
            gap: report.gap.clone(),
            cuts_kc: report.cuts_kc,
            cuts_p12: report.cuts_p12,
            cuts_fs: report.cuts_fs,
            reason: report.termination.name().to_string(),
            ms: 0,
            ok: true,
        }
    }

    fn failed(family: &ExperimentFamily, n: u64, err: &Error) -> ExperimentRow {
        ExperimentRow {
            family: family.name().to_string(),
            n,
            params: family.params(),
            int_opt: None,
            lp_value: None,
            gap: None,
            cuts_kc: 0,
            cuts_p12: 0,
            cuts_fs: 0,
            reason: format!("error: {err}"),
            ms: 0,
            ok: false,
        }
    }

    fn note(&mut self, check: &str, passed: bool) {
        self.reason.push_str(&format!(";{check}={passed}"));
        self.ok &= passed;
    }

    pub fn record(&self) -> Vec<String> {
        let opt = |v: &Option<Rational>| v.as_ref().map_or(String::new(), |v| v.to_string());
        vec![
            self.family.clone(),
            self.n.to_string(),
            self.params.clone(),
            opt(&self.int_opt),
            opt(&self.lp_value),
            opt(&self.gap),
            self.gap
                .as_ref()
                .map_or(String::new(), |g| to_decimal(g, 12)),
            self.cuts_kc.to_string(),
            self.cuts_p12.to_string(),
            self.cuts_fs.to_string(),
            self.reason.clone(),
            self.ms.to_string(),
        ]
    }
}

/// The two inequalities checked on the pitch-3 instance, as dense
/// coefficient vectors in input order.
pub fn wild_inequalities() -> [(Vec<i64>, i64); 2] {
    [
        (vec![1, 0, 1, 1, 2, 1, 2], 3),
        (vec![1, 1, 2, 3, 4, 3, 4], 8),
    ]
}

fn wild_checks(inst: &Instance, row: &mut ExperimentRow) -> Result<()> {
    for (k, (w, rhs)) in wild_inequalities().into_iter().enumerate() {
        let coeffs: Vec<Rational> = w
            .iter()
            .map(|&v| Rational::from_integer(v.into()))
            .collect();
        let ineq = Inequality::from_dense(
            &inst.from_input_order(&coeffs)?,
            Rational::from_integer(rhs.into()),
            Family::User,
        )?;
        row.note(&format!("valid{}", k + 1), is_valid(&ineq, inst)?);
        if k == 0 {
            row.note("pitch3", ineq.pitch() == 3);
        }
    }
    Ok(())
}

fn lemma4_checks(n: u64, inst: &Instance, row: &mut ExperimentRow) -> Result<()> {
    let x = lemma4_point(n, inst)?;
    let on_row = x.dot(inst.profits()) >= Rational::from_integer(1.into());
    row.note("point_on_row", on_row);
    let eps = Rational::new(1.into(), 100.into());
    let cut = sep::separate_pitch1(inst, &x, &eps, OracleMode::Exact)?;
    row.note("point_pitch1", cut.is_none());
    if inst.len() <= sep::PITCH1_ENUM_LIMIT {
        let all = sep::enumerate_pitch1(inst)?;
        row.note(
            "point_pitch1_enum",
            all.iter().all(|c| c.is_satisfied_by(&x)),
        );
    }
    Ok(())
}

fn run_one(family: &ExperimentFamily, n: u64, config: &Config) -> Result<ExperimentRow> {
    let inst = family.build(n)?;
    let id = format!("{}-{n}", family.name());
    let report = cutloop::run_named(&inst, config, &id)?;
    let mut row = ExperimentRow::from_report(family, n, &report);
    match family {
        ExperimentFamily::Lemma4 { .. } => lemma4_checks(n, &inst, &mut row)?,
        ExperimentFamily::Pitch3Wild => wild_checks(&inst, &mut row)?,
        _ => {}
    }
    Ok(row)
}

/// One row per `n`; a failing row records its error and the run goes on.
/// `config` overrides [`ExperimentFamily::default_config`].
pub fn experiment_gap_table(
    family: &ExperimentFamily,
    ns: &[u64],
    config: Option<&Config>,
) -> Vec<ExperimentRow> {
    let config = config.cloned().unwrap_or_else(|| family.default_config());
    ns.iter()
        .map(|&n| {
            let start = Instant::now();
            let mut row = run_one(family, n, &config)
                .unwrap_or_else(|e| ExperimentRow::failed(family, n, &e));
            row.ms = start.elapsed().as_millis();
            row
        })
        .collect()
}

pub fn write_csv<W: Write>(out: W, rows: &[ExperimentRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(CSV_HEADER).map_err(io)?;
    for row in rows {
        w.write_record(row.record()).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}
