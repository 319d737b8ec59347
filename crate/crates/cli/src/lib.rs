//! The `shavis` command line: level scans, single-pair reports and the
//! cohomology self-test. Commands write to the given sinks and return an exit
//! code, so the binary is a thin wrapper.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use shavis_cohomology::{run_selftest, Fault, SelftestConfig, SelftestSummary};
use shavis_core::gate::{evaluate_corollary, scan_pairs, GateContext, GateError, ScanOptions, DEFAULT_BOUND_CAP};
use shavis_core::hecke::{congruence_modulus, CoefficientPolicy, CongruenceCandidate, HeckeError, TraceCache};
use shavis_core::ingest::{normalize_label, CurveDb, CurveRecord};
use shavis_core::ledger::{
    bsd_divisibility_verdict, level_primes, render_report, BsdSnapshot, DivisibilityVerdict, ReportFormat, ReportRow,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

/// File inside `--cache DIR` holding the trace cache.
pub const CACHE_FILE: &str = "traces.cache";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Ingest(#[from] shavis_core::ingest::IngestError),
    #[error(transparent)]
    Gate(#[from] GateError),
    #[error(transparent)]
    Hecke(#[from] HeckeError),
    #[error("write failed: {0}")]
    Output(#[from] std::io::Error),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    #[default]
    All,
    Good,
    Coprime,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    #[default]
    Text,
    Json,
}

impl From<FormatArg> for ReportFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Text => ReportFormat::Text,
            FormatArg::Json => ReportFormat::Json,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FaultArg {
    CorruptConnectingMap,
}

#[derive(Debug, Parser)]
#[command(name = "shavis", version, about = "Congruent elliptic curve pairs and visibility hypothesis checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Scan every level in a range for congruent (rank 1, rank >= 2) pairs.
    Scan(CommonArgs),
    /// Full checklist for one pair of curves.
    CheckPair {
        label_e: String,
        label_f: String,
        /// Evaluate only this prime; default is every odd prime of the modulus.
        #[arg(long)]
        q: Option<u64>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Random instances of the cohomology identities.
    CohomologySelftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        instances: u64,
        #[arg(long, value_enum, default_value_t = FormatArg::Text)]
        format: FormatArg,
        #[arg(long, value_enum, hide = true)]
        inject_fault: Option<FaultArg>,
    },
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Curve database file or directory; repeatable.
    #[arg(long = "db", required = true)]
    pub db: Vec<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub from: u64,
    #[arg(long, default_value_t = u64::MAX)]
    pub to: u64,
    #[arg(long, default_value_t = DEFAULT_BOUND_CAP)]
    pub bound_cap: u64,
    #[arg(long, value_enum, default_value_t = PolicyArg::All)]
    pub policy: PolicyArg,
    /// Modulus for `--policy coprime`.
    #[arg(long)]
    pub coprime_to: Option<u64>,
    #[arg(long, value_enum, default_value_t = FormatArg::Text)]
    pub format: FormatArg,
    /// Accepted for symmetry with the self-test; scans use no randomness.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub cache: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CliConfig {
    pub db: Vec<PathBuf>,
    pub from: u64,
    pub to: u64,
    pub bound_cap: u64,
    pub policy: CoefficientPolicy,
    pub format: ReportFormat,
    pub seed: u64,
    pub cache: Option<PathBuf>,
}

impl CliConfig {
    pub fn new(db: Vec<PathBuf>) -> Self {
        CliConfig {
            db,
            from: 1,
            to: u64::MAX,
            bound_cap: DEFAULT_BOUND_CAP,
            policy: CoefficientPolicy::AllPrimes,
            format: ReportFormat::Text,
            seed: 0,
            cache: None,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.db.is_empty() {
            return Err(CliError::Config("at least one --db path is required".into()));
        }
        if self.from > self.to {
            return Err(CliError::Config(format!("empty level range {}..{}", self.from, self.to)));
        }
        if self.bound_cap < 1 {
            return Err(CliError::Config("--bound-cap must be at least 1".into()));
        }
        if let CoefficientPolicy::CoprimeTo(0) = self.policy {
            return Err(CliError::Config("--coprime-to must be positive".into()));
        }
        Ok(())
    }

    fn load_db(&self) -> Result<CurveDb, CliError> {
        Ok(CurveDb::load(&self.db)?)
    }

    fn open_cache(&self) -> Result<Option<TraceCache>, CliError> {
        match &self.cache {
            None => Ok(None),
            Some(dir) => {
                std::fs::create_dir_all(dir)
                    .map_err(|e| CliError::Config(format!("cache directory {}: {e}", dir.display())))?;
                Ok(Some(TraceCache::open_or_reset(dir.join(CACHE_FILE))?))
            }
        }
    }
}

impl TryFrom<&CommonArgs> for CliConfig {
    type Error = CliError;

    fn try_from(a: &CommonArgs) -> Result<Self, CliError> {
        let policy = match (a.policy, a.coprime_to) {
            (PolicyArg::All, None) => CoefficientPolicy::AllPrimes,
            (PolicyArg::Good, None) => CoefficientPolicy::GoodPrimesOnly,
            (PolicyArg::Coprime, Some(m)) => CoefficientPolicy::CoprimeTo(m),
            (PolicyArg::Coprime, None) => {
                return Err(CliError::Config("--policy coprime needs --coprime-to M".into()))
            }
            (_, Some(_)) => return Err(CliError::Config("--coprime-to only applies to --policy coprime".into())),
        };
        let config = CliConfig {
            db: a.db.clone(),
            from: a.from,
            to: a.to,
            bound_cap: a.bound_cap,
            policy,
            format: a.format.into(),
            seed: a.seed,
            cache: a.cache.clone(),
        };
        config.validate()?;
        Ok(config)
    }
}

fn context<'a>(db: &'a CurveDb, cache: Option<&'a TraceCache>, config: &CliConfig) -> GateContext<'a> {
    let ctx = GateContext::new(db).with_bound_cap(config.bound_cap);
    match cache {
        Some(c) => ctx.with_cache(c),
        None => ctx,
    }
}

fn ledger_rows(db: &CurveDb, verdicts: &[shavis_core::gate::VisibilityVerdict]) -> Result<Vec<DivisibilityVerdict>, CliError> {
    verdicts
        .iter()
        .map(|v| {
            let rec = db.get(&v.label_e).ok_or_else(|| GateError::UnknownLabel(v.label_e.clone()))?;
            let snap = BsdSnapshot::from_record(rec, &level_primes(rec.level)).map_err(GateError::from)?;
            bsd_divisibility_verdict(v, Some(&snap)).map_err(|e| CliError::Config(e.to_string()))
        })
        .collect()
}

/// Scan, ledger and report. Scan issues go to `err`; the report to `out`.
pub fn cmd_scan(config: &CliConfig, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    config.validate()?;
    let db = config.load_db()?;
    let cache = config.open_cache()?;
    let ctx = context(&db, cache.as_ref(), config);
    let opts = ScanOptions {
        min_level: config.from,
        max_level: config.to,
        policy: config.policy,
        ..ScanOptions::default()
    };
    let outcome = scan_pairs(&ctx, &opts);
    let rows = ledger_rows(&db, &outcome.verdicts)?;
    out.write_all(render_report(&rows, config.format).as_bytes())?;
    for issue in &outcome.issues {
        writeln!(err, "warning: {} {} {}: {}", issue.level, issue.label_e, issue.label_f, issue.message)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct PairReport<'a> {
    #[serde(rename = "labelE")]
    label_e: &'a str,
    #[serde(rename = "labelF")]
    label_f: &'a str,
    level: u64,
    congruence: &'a CongruenceCandidate,
    note: Option<String>,
    rows: Vec<ReportRow>,
}

fn lookup<'a>(db: &'a CurveDb, label: &str) -> Result<&'a CurveRecord, CliError> {
    db.get(label)
        .ok_or_else(|| GateError::UnknownLabel(normalize_label(label)).into())
}

/// Report for one pair. A prime that does not divide the modulus, or a
/// modulus with no odd prime, is reported in the output, not as an error.
pub fn cmd_check_pair(
    label_e: &str,
    label_f: &str,
    q: Option<u64>,
    config: &CliConfig,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    config.validate()?;
    let db = config.load_db()?;
    let (e, f) = (lookup(&db, label_e)?, lookup(&db, label_f)?);
    if e.level != f.level {
        return Err(GateError::LevelMismatch(e.level, f.level).into());
    }
    let cache = config.open_cache()?;
    let ctx = context(&db, cache.as_ref(), config);
    let bound = ctx.bound_for(e.level);
    let cand = congruence_modulus(&ctx.table(e, bound)?, &ctx.table(f, bound)?, config.policy)?;
    let (qs, note) = match q {
        Some(q) if q == 0 || cand.modulus % q != 0 => (
            Vec::new(),
            Some(GateError::NotCongruent { q, modulus: cand.modulus }.to_string()),
        ),
        Some(q) => (vec![q], None),
        None if cand.odd_primes().is_empty() => (
            Vec::new(),
            Some(format!("no odd congruence prime: modulus r = {}", cand.modulus)),
        ),
        None => (cand.odd_primes(), None),
    };
    let verdicts = qs
        .iter()
        .map(|&q| evaluate_corollary(e, f, q, &cand, &ctx))
        .collect::<Result<Vec<_>, _>>()?;
    let rows = ledger_rows(&db, &verdicts)?;
    match config.format {
        ReportFormat::Json => {
            let report = PairReport {
                label_e: &cand.label_e,
                label_f: &cand.label_f,
                level: cand.level,
                congruence: &cand,
                note,
                rows: rows.iter().map(ReportRow::from).collect(),
            };
            let mut s = serde_json::to_string_pretty(&report).expect("pair report serializes");
            s.push('\n');
            out.write_all(s.as_bytes())?;
        }
        ReportFormat::Text => {
            writeln!(
                out,
                "{} / {} at level {}: congruence modulus r = {} over primes <= {} ({})",
                cand.label_e,
                cand.label_f,
                cand.level,
                cand.modulus,
                cand.bound_used,
                if cand.certified { "certified" } else { "not certified" }
            )?;
            if let Some(note) = &note {
                writeln!(out, "{note}")?;
            }
            for d in &rows {
                writeln!(out, "\nq = {}: {}", d.q(), d.verdict.predicted_statement)?;
                for (key, c) in &d.verdict.checklist {
                    writeln!(out, "  {key:<40} {:<9} {}", format!("{:?}", c.status).to_lowercase(), c.evidence)?;
                }
                writeln!(out, "  ledger: {}", d.conclusion)?;
            }
        }
    }
    Ok(())
}

/// Run the self-test and print its summary. Exit 1 on any failure.
pub fn cmd_cohomology_selftest(
    seed: u64,
    instances: u64,
    fault: Option<Fault>,
    format: ReportFormat,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32, CliError> {
    let summary: SelftestSummary = run_selftest(&SelftestConfig { seed, instances, fault });
    match format {
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(&summary).expect("summary serializes");
            s.push('\n');
            out.write_all(s.as_bytes())?;
        }
        ReportFormat::Text => {
            writeln!(out, "scope: {}", summary.scope)?;
            writeln!(out, "seed: {}", summary.seed)?;
            writeln!(out, "instances: {}", summary.instances)?;
            writeln!(out, "failures: {}", summary.failures)?;
            for (check, count) in &summary.failed_checks {
                writeln!(out, "  {check}: {count}")?;
            }
        }
    }
    if summary.failures == 0 {
        Ok(EXIT_OK)
    } else {
        writeln!(
            err,
            "self-test failed: {} of {} instances; first failing instance {}; reproduce with --seed {}",
            summary.failures,
            summary.instances,
            summary.first_failure.expect("failures imply a first failure"),
            summary.seed
        )?;
        Ok(EXIT_FAILURE)
    }
}

/// Parse `args` (including the program name) and dispatch.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(err, "{}", e.render())
            } else {
                write!(out, "{}", e.render())
            };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Scan(common) => CliConfig::try_from(common).and_then(|c| cmd_scan(&c, out, err)).map(|()| EXIT_OK),
        Command::CheckPair {
            label_e,
            label_f,
            q,
            common,
        } => CliConfig::try_from(common)
            .and_then(|c| cmd_check_pair(label_e, label_f, *q, &c, out))
            .map(|()| EXIT_OK),
        Command::CohomologySelftest {
            seed,
            instances,
            format,
            inject_fault,
        } => {
            let fault = inject_fault.map(|FaultArg::CorruptConnectingMap| Fault::CorruptConnectingMap);
            cmd_cohomology_selftest(*seed, *instances, fault, (*format).into(), out, err)
        }
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_CONFIG
        }
    }
}
