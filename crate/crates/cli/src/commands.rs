use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use basis_forge::conv::Backend;
use basis_forge::generate::parse_kind;
use basis_forge::grid::{log_spaced, GridSpec};
use basis_forge::mainthm::{self, ExperimentConfig, SeedSpec};
use basis_forge::prob::{self, ProbabilityAssignment};
use basis_forge::regvar::{self, Thresholds};
use basis_forge::report::{Provenance, WithProvenance};
use basis_forge::{par, repfn, rng, schnirelmann, selftest, GeneratorSpec, Sequence};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug)]
pub enum CliError {
    /// Bad input or a failed check: exit status 1.
    Validation(String),
    /// Anything else: exit status 2.
    Internal(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Internal(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) | CliError::Internal(m) => f.write_str(m),
        }
    }
}

impl From<basis_forge::Error> for CliError {
    fn from(e: basis_forge::Error) -> Self {
        if e.is_validation() {
            CliError::Validation(e.to_string())
        } else {
            CliError::Internal(e.to_string())
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Internal(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Internal(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Internal(e.to_string())
    }
}

type CliResult<T = ()> = Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(
    name = "basis-forge",
    version,
    about = "Additive representation functions and random sequence experiments"
)]
pub struct Cli {
    /// Worker threads (0 = all cores). Falls back to BASIS_FORGE_THREADS.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Tabulate r, s, rho, greedy rho-hat and the non-exact count as CSV.
    Repfn(RepfnArgs),
    /// Classify a sequence as OR / PI / OR+ and estimate its indices.
    Regvar(RegvarArgs),
    /// Draw one random sequence.
    Sample(SampleArgs),
    /// Exact expectations and the expectation-based checks.
    Expect(ExpectArgs),
    /// Run an experiment described by a JSON config.
    Experiment(ExperimentArgs),
    /// Singular integral and series, Cesàro criterion and basis coverage.
    Schnirelmann(SchnirelmannArgs),
    /// Run the oracle-equivalence suite.
    Selftest,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    /// Generator: naturals, squares, cubes, primes, primes01, power:K, poly:C0,C1,../D,
    /// file:PATH, counter-c[:BASE[:KMIN]], counter-d[:BASE[:KMIN]], compose(OUTER,INNER).
    #[arg(long = "gen")]
    pub generator: String,
}

impl GenArgs {
    fn build(&self, horizon: u64) -> CliResult<(GeneratorSpec, Sequence)> {
        let spec = GeneratorSpec::new(parse_kind(&self.generator)?, horizon);
        let seq = basis_forge::generate(&spec)?;
        Ok((spec, seq))
    }
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BackendArg {
    Auto,
    Schoolbook,
    Ntt,
}

impl From<BackendArg> for Backend {
    fn from(b: BackendArg) -> Self {
        match b {
            BackendArg::Auto => Backend::Auto,
            BackendArg::Schoolbook => Backend::Schoolbook,
            BackendArg::Ntt => Backend::Ntt,
        }
    }
}

#[derive(Args, Debug)]
pub struct RepfnArgs {
    #[command(flatten)]
    pub gen: GenArgs,
    #[arg(long)]
    pub h: u32,
    #[arg(long)]
    pub nmax: u64,
    /// Sequence horizon; defaults to nmax.
    #[arg(long)]
    pub horizon: Option<u64>,
    /// Smallest admissible part in the exact count.
    #[arg(long, default_value_t = 0)]
    pub lower_bound: u64,
    /// Leave the rho_hat_greedy column empty.
    #[arg(long)]
    pub skip_rho_hat: bool,
    #[arg(long, value_enum, default_value_t = BackendArg::Auto)]
    pub backend: BackendArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct RegvarArgs {
    #[command(flatten)]
    pub gen: GenArgs,
    #[arg(long)]
    pub horizon: u64,
    /// JSON file overriding the default thresholds.
    #[arg(long)]
    pub thresholds: Option<PathBuf>,
    /// Also compare with the reciprocal indices of n -> a_n.
    #[arg(long)]
    pub duality: bool,
    /// Also compare the indices of s_{A,h} with h times those of A (repeatable).
    #[arg(long = "sumset-h")]
    pub sumset_h: Vec<u32>,
    /// Also report the band of sum_{n<=x} A(n)/n over A(x).
    #[arg(long)]
    pub integral: bool,
    #[arg(long)]
    pub evidence_csv: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SampleArgs {
    /// Sequence A of the space with alpha_n = A(n)/(n+1).
    #[arg(long = "gen", conflicts_with = "uniform")]
    pub generator: Option<String>,
    /// Constant inclusion probability.
    #[arg(long)]
    pub uniform: Option<f64>,
    /// Outer sequence L of a composition space; --gen gives the inner sequence.
    #[arg(long, requires = "generator")]
    pub outer: Option<String>,
    #[arg(long)]
    pub nmax: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Sequence file to write; a JSON summary goes to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExpectCheck {
    Table,
    Fundamental,
    Rbulk,
    StrongLaw,
    Delta,
    MonteCarlo,
}

#[derive(Args, Debug, Serialize)]
pub struct ExpectArgs {
    #[arg(long = "gen")]
    pub generator: String,
    #[arg(long, default_value_t = 2)]
    pub h: u32,
    #[arg(long)]
    pub nmax: u64,
    #[arg(long, default_value_t = 0)]
    pub lower_bound: u64,
    #[arg(long, value_enum, default_value_t = ExpectCheck::Table)]
    pub check: ExpectCheck,
    /// Lowest grid point of the checks; the top is nmax.
    #[arg(long, default_value_t = 1000)]
    pub grid_lo: u64,
    #[arg(long, default_value_t = 21)]
    pub grid_points: usize,
    #[arg(long, value_delimiter = ',', default_value = "0.01,0.05,0.1,0.25")]
    pub eps: Vec<f64>,
    #[arg(long, default_value_t = 100)]
    pub seeds: usize,
    #[arg(long, default_value_t = 0)]
    pub master_seed: u64,
    #[arg(long, default_value_t = 25.0)]
    pub band_width: f64,
    #[arg(long, default_value_t = 0.1)]
    pub tolerance: f64,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ExperimentArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out_json: Option<PathBuf>,
    #[arg(long)]
    pub out_csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SchnirelmannArgs {
    #[command(flatten)]
    pub gen: GenArgs,
    #[arg(long, default_value_t = 2)]
    pub h: u32,
    #[arg(long)]
    pub nmax: u64,
    /// Exponent 1 + eps of the Cesàro averages.
    #[arg(long, default_value_t = 1.0)]
    pub eps: f64,
    /// Top-decade maximum may exceed the decade below by at most this factor.
    #[arg(long, default_value_t = 1.2)]
    pub bound: f64,
    /// Also report coverage of hA on [0, nmax] for h up to this order.
    #[arg(long)]
    pub basis_hmax: Option<u32>,
    /// CSV with columns n, r, J, Sigma.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON criterion report; stdout when absent.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

/// Experiments accepted by the `experiment` command.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ExperimentFile {
    Concentration(ExperimentConfig),
    MonteCarlo(MonteCarloFile),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MonteCarloFile {
    pub generator: GeneratorSpec,
    pub h: u32,
    pub seeds: SeedSpec,
    pub grid: GridSpec,
}

pub fn run(cmd: Command) -> CliResult {
    match cmd {
        Command::Repfn(a) => repfn_cmd(a),
        Command::Regvar(a) => regvar_cmd(a),
        Command::Sample(a) => sample_cmd(a),
        Command::Expect(a) => expect_cmd(a),
        Command::Experiment(a) => experiment_cmd(a),
        Command::Schnirelmann(a) => schnirelmann_cmd(a),
        Command::Selftest => selftest_cmd(),
    }
}

fn emit(out: Option<&Path>, text: &str) -> CliResult {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(text.as_bytes())?;
            so.flush()?;
        }
    }
    Ok(())
}

fn emit_json<T: Serialize>(out: Option<&Path>, value: &T) -> CliResult {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    emit(out, &s)
}

/// Provenance for a CSV file goes next to it as `<file>.meta.json`.
fn write_meta(out: Option<&Path>, prov: &Provenance) -> CliResult {
    if let Some(p) = out {
        let mut name = p.as_os_str().to_owned();
        name.push(".meta.json");
        emit_json(Some(Path::new(&name)), prov)?;
    }
    Ok(())
}

fn csv_string(header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Internal(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Internal(e.to_string()))
}

fn factorial(h: u32) -> CliResult<u64> {
    (1..=h as u64)
        .try_fold(1u64, |acc, k| acc.checked_mul(k))
        .ok_or_else(|| CliError::Validation(format!("{h}! does not fit in 64 bits")))
}

fn repfn_cmd(a: RepfnArgs) -> CliResult {
    if a.h == 0 {
        return Err(CliError::Validation("--h must be at least 1".into()));
    }
    let horizon = a.horizon.unwrap_or(a.nmax);
    let (spec, seq) = a.gen.build(horizon)?;
    let t = repfn::rep_table_with(&seq, a.h, a.nmax, a.backend.into())?;
    let (rho, rho_all) = if a.h == 1 {
        let mut ind = seq.indicator(a.nmax)?;
        let all = ind.clone();
        for v in ind.iter_mut().take(a.lower_bound.min(a.nmax + 1) as usize) {
            *v = 0;
        }
        (ind, all)
    } else {
        let all = repfn::rho_table(&seq, a.h, a.nmax, 0)?;
        let lb = if a.lower_bound == 0 {
            all.clone()
        } else {
            repfn::rho_table(&seq, a.h, a.nmax, a.lower_bound)?
        };
        (lb, all)
    };
    let f = factorial(a.h)?;
    let rho_hat: Vec<Option<u64>> = if a.skip_rho_hat {
        vec![None; a.nmax as usize + 1]
    } else if a.h == 1 {
        rho_all.iter().map(|&v| Some(v)).collect()
    } else {
        let fams = par::map_range(a.nmax as usize + 1, |n| {
            repfn::greedy_family(&seq, a.h, n as u64).map(|f| f.len() as u64)
        });
        fams.into_iter()
            .map(|r| r.map(Some))
            .collect::<Result<_, _>>()?
    };
    let rows = (0..=a.nmax as usize).map(|n| {
        vec![
            n.to_string(),
            t.r[n].to_string(),
            t.s[n].to_string(),
            rho[n].to_string(),
            rho_hat[n].map(|v| v.to_string()).unwrap_or_default(),
            (t.r[n] - f * rho_all[n]).to_string(),
        ]
    });
    let text = csv_string(&["n", "r", "s", "rho", "rho_hat_greedy", "nonexact"], rows)?;
    emit(a.out.as_deref(), &text)?;
    let config = serde_json::json!({
        "command": "repfn", "generator": spec, "h": a.h, "nmax": a.nmax,
        "lower_bound": a.lower_bound, "backend": a.backend, "skip_rho_hat": a.skip_rho_hat,
    });
    write_meta(a.out.as_deref(), &Provenance::new(&config)?)
}

#[derive(Serialize)]
struct RegvarOutput {
    #[serde(flatten)]
    classification: regvar::RegularityReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    duality: Option<regvar::DualityReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    sumset: Vec<regvar::SumsetIndexReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    integral: Option<regvar::IntegralReport>,
}

fn regvar_cmd(a: RegvarArgs) -> CliResult {
    let th: Thresholds = match &a.thresholds {
        Some(p) => serde_json::from_str(&std::fs::read_to_string(p)?)
            .map_err(|e| CliError::Validation(format!("malformed thresholds file: {e}")))?,
        None => Thresholds::default(),
    };
    let (spec, seq) = a.gen.build(a.horizon)?;
    let classification = regvar::classify(&seq, &th)?;
    if let Some(p) = &a.evidence_csv {
        let rows = classification.evidence.iter().map(|e| {
            vec![
                e.statistic.clone(),
                e.x_lo.to_string(),
                e.x_hi.to_string(),
                e.value
                    .finite()
                    .map(|v| v.to_string())
                    .unwrap_or_else(|| "unbounded".into()),
                e.witness.to_string(),
            ]
        });
        emit(
            Some(p),
            &csv_string(&["statistic", "x_lo", "x_hi", "value", "witness"], rows)?,
        )?;
    }
    let duality = if a.duality {
        Some(regvar::duality_check(&seq, &th)?)
    } else {
        None
    };
    let sumset = a
        .sumset_h
        .iter()
        .map(|&h| regvar::sumset_index_check(&seq, h, &th))
        .collect::<Result<_, _>>()?;
    let integral = if a.integral {
        Some(regvar::orplus_integral_check(&seq, &th)?)
    } else {
        None
    };
    let config = serde_json::json!({
        "command": "regvar", "generator": spec, "thresholds": th,
        "duality": a.duality, "sumset_h": a.sumset_h, "integral": a.integral,
    });
    let out = WithProvenance {
        report: RegvarOutput {
            classification,
            duality,
            sumset,
            integral,
        },
        provenance: Provenance::new(&config)?,
    };
    emit_json(a.out.as_deref(), &out)
}

fn sample_cmd(a: SampleArgs) -> CliResult {
    let asg = match (&a.generator, a.uniform, &a.outer) {
        (None, Some(p), None) => ProbabilityAssignment::uniform(p, a.nmax)?,
        (Some(g), None, None) => {
            let seq = GenArgs {
                generator: g.clone(),
            }
            .build(a.nmax)?
            .1;
            ProbabilityAssignment::from_sequence(&seq, a.nmax, g)?
        }
        (Some(inner), None, Some(outer)) => {
            let l = GenArgs {
                generator: outer.clone(),
            }
            .build(a.nmax)?
            .1;
            let need = l.count(a.nmax)?.max(1);
            let inn = GenArgs {
                generator: inner.clone(),
            }
            .build(need)?
            .1;
            ProbabilityAssignment::composition(&l, &inn, a.nmax, (outer, inner))?
        }
        _ => {
            return Err(CliError::Validation(
                "give exactly one of --gen or --uniform (with --outer only alongside --gen)".into(),
            ))
        }
    };
    let omega = prob::sample(&asg, a.seed);
    if let Some(p) = &a.out {
        omega.write_file(p)?;
    }
    let config = serde_json::json!({
        "command": "sample", "assignment": asg.descriptor(), "seed": a.seed,
    });
    let summary = serde_json::json!({
        "seed": a.seed,
        "size": omega.len(),
        "expected_size": asg.proper_estimate,
        "assignment": asg.descriptor(),
    });
    emit_json(
        None,
        &WithProvenance {
            report: summary,
            provenance: Provenance::new(&config)?,
        },
    )
}

fn expect_cmd(a: ExpectArgs) -> CliResult {
    let seq = GenArgs {
        generator: a.generator.clone(),
    }
    .build(a.nmax)?
    .1;
    let asg = ProbabilityAssignment::from_sequence(&seq, a.nmax, &a.generator)?;
    let grid = log_spaced(a.grid_lo.min(a.nmax), a.nmax, a.grid_points);
    let prov = Provenance::new(&a)?;
    let out = a.out.as_deref();
    match a.check {
        ExpectCheck::Table => {
            let r = prob::expected_r_tables(&asg, a.h, a.nmax)?;
            let rho = prob::expected_rho_tables(&asg, a.h, a.nmax, a.lower_bound)?;
            let h = a.h as usize;
            let rows = (0..=a.nmax as usize)
                .map(|n| vec![n.to_string(), r[h][n].to_string(), rho[h][n].to_string()]);
            emit(
                out,
                &csv_string(&["n", "expected_r", "expected_rho"], rows)?,
            )?;
            write_meta(out, &prov)
        }
        ExpectCheck::Fundamental => {
            let rep = prob::fundamental_lemma_check(&seq, a.h, &grid, a.band_width)?;
            emit_json(
                out,
                &WithProvenance {
                    report: rep,
                    provenance: prov,
                },
            )
        }
        ExpectCheck::Rbulk => {
            let rep = prob::rbulk_check(&seq, a.h, &a.eps, &grid)?;
            emit_json(
                out,
                &WithProvenance {
                    report: rep,
                    provenance: prov,
                },
            )
        }
        ExpectCheck::StrongLaw => {
            let seeds = rng::derive_seeds(a.master_seed, a.seeds);
            let rep = prob::strong_law_check(&asg, &seeds, &grid, a.tolerance)?;
            emit_json(
                out,
                &WithProvenance {
                    report: rep,
                    provenance: prov,
                },
            )
        }
        ExpectCheck::Delta => {
            let rows: Vec<serde_json::Value> = grid
                .iter()
                .map(|&n| Ok(serde_json::json!({"n": n, "bound": prob::delta_overlap_bound(&asg, a.h, n)?})))
                .collect::<Result<_, basis_forge::Error>>()?;
            emit_json(
                out,
                &WithProvenance {
                    report: serde_json::json!({ "h": a.h, "points": rows }),
                    provenance: prov,
                },
            )
        }
        ExpectCheck::MonteCarlo => {
            let seeds = rng::derive_seeds(a.master_seed, a.seeds);
            let mut rep = prob::monte_carlo_rep(&seq, a.h, &grid, &seeds)?;
            rep.config = serde_json::to_value(&a)?;
            rep.config_hash = prov.config_hash;
            let mut s = rep.to_json()?;
            s.push('\n');
            emit(out, &s)
        }
    }
}

fn experiment_cmd(a: ExperimentArgs) -> CliResult {
    let text = std::fs::read_to_string(&a.config).map_err(|e| {
        CliError::Validation(format!("cannot read config {}: {e}", a.config.display()))
    })?;
    let cfg: ExperimentFile = serde_json::from_str(&text)
        .map_err(|e| CliError::Validation(format!("malformed config: {e}")))?;
    let mut report = match &cfg {
        ExperimentFile::Concentration(c) => mainthm::concentration_experiment(c)?,
        ExperimentFile::MonteCarlo(m) => {
            let grid = m.grid.points()?;
            let horizon = m.generator.horizon.unwrap_or(0).max(*grid.last().unwrap());
            let spec = GeneratorSpec {
                horizon: Some(horizon),
                ..m.generator.clone()
            };
            let seq = basis_forge::generate(&spec)?;
            prob::monte_carlo_rep(&seq, m.h, &grid, &m.seeds.seeds())?
        }
    };
    report.config = serde_json::to_value(&cfg)?;
    report.config_hash = basis_forge::report::config_hash(&cfg)?;
    if let Some(p) = &a.out_csv {
        report.write_csv(p)?;
    }
    let mut s = report.to_json()?;
    s.push('\n');
    emit(a.out_json.as_deref(), &s)
}

#[derive(Serialize)]
struct SchnirelmannOutput {
    h: u32,
    n_max: u64,
    factorization_error: f64,
    error_bound: f64,
    cesaro: schnirelmann::CesaroReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    basis: Option<schnirelmann::BasisReport>,
}

fn schnirelmann_cmd(a: SchnirelmannArgs) -> CliResult {
    let (spec, seq) = a.gen.build(a.nmax)?;
    let table = schnirelmann::singular_series(&seq, a.h, a.nmax)?;
    if let Some(p) = &a.out {
        let rows = (0..=a.nmax as usize).map(|n| {
            vec![
                n.to_string(),
                table.r[n].to_string(),
                table.j[n].to_string(),
                table.sigma[n].to_string(),
            ]
        });
        emit(Some(p), &csv_string(&["n", "r", "J", "Sigma"], rows)?)?;
    }
    let lo = (a.nmax / 1000).max(1);
    let grid = log_spaced(lo, a.nmax, 61);
    let cesaro = schnirelmann::cesaro_criterion(&table, a.eps, &grid, a.bound)?;
    let basis = a
        .basis_hmax
        .map(|k| schnirelmann::basis_check(&seq, k, a.nmax))
        .transpose()?;
    let config = serde_json::json!({
        "command": "schnirelmann", "generator": spec, "h": a.h, "nmax": a.nmax,
        "eps": a.eps, "bound": a.bound, "basis_hmax": a.basis_hmax,
    });
    let out = SchnirelmannOutput {
        h: a.h,
        n_max: a.nmax,
        factorization_error: table.factorization_error(),
        error_bound: table.error_bound,
        cesaro,
        basis,
    };
    let prov = Provenance::new(&config)?;
    write_meta(a.out.as_deref(), &prov)?;
    emit_json(
        a.report.as_deref(),
        &WithProvenance {
            report: out,
            provenance: prov,
        },
    )
}

fn selftest_cmd() -> CliResult {
    let results = selftest::run();
    let mut failed = 0;
    for r in &results {
        println!(
            "{} {}: {}",
            if r.passed { "PASS" } else { "FAIL" },
            r.name,
            r.detail
        );
        failed += usize::from(!r.passed);
    }
    if failed > 0 {
        return Err(CliError::Validation(format!(
            "{failed} of {} suites failed",
            results.len()
        )));
    }
    Ok(())
}
