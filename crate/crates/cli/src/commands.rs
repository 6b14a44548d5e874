//! Subcommand implementations. Data and reports go to stdout unless an output
//! path is given; human-readable messages go to stderr.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use hazrank_core::diagnose::{RegimeOutcome, PH_TEST_MIN_EVENTS};
use hazrank_core::figure::figure_data;
use hazrank_core::fixtures::{probe_crossing_regime, probe_ph_regime};
use hazrank_core::{
    breslow_baseline, build_risk_sets, conditional_cdf, cox_fit, cox_fit_grouped, cox_partial_loglik,
    crossing_detect, dpo_fit_tabular, dpo_scores, empirical_cdf, misestimation_probe, ph_test,
    pl_fit, pl_log_likelihood, rankings_to_pseudotimes, simulate, utilities_to_rankings,
    CrossingReport, FitConfig, FitResult, FitWarning, PhTestReport, PolicyLogProbs,
    RankingDataset, ScoreModel, SimSpec, SurvivalDataset, TabularPolicy, TieMethod,
};
use serde::{Deserialize, Serialize};

use crate::config::{resolve_seed, LoadedConfig, ModelKind};
use crate::csvio::{read_dataset, write_ranking_csv, write_table, write_utility_csv, DatasetFile, Sink};
use crate::error::{CliError, CliResult, EXIT_OK};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Parser)]
#[command(name = "hazrank", version, about = "Fit Plackett-Luce and Cox models and check proportional hazards")]
#[command(after_help = "Exit codes: 0 success, 2 usage/config/input error, 3 fit did not converge, 4 insufficient data.")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a utility (or ranking) dataset from the `simulate` config section.
    Simulate(SimulateArgs),
    /// Fit a Cox, Plackett-Luce or DPO model and print a JSON report.
    Fit(FitArgs),
    /// Breslow baseline and conditional CDF for a fitted Cox model.
    Baseline(BaselineArgs),
    /// CDF crossing and Schoenfeld trend diagnostics for two groups.
    Diagnose(DiagnoseArgs),
    /// CDF curves for the figure groups in long format (`group,u,F`).
    Figure(FigureArgs),
    /// Seed sweep comparing preference-fit direction with median utilities.
    Probe(ProbeArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output CSV; the provenance sidecar goes to `<out>.meta.json`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum TiesArg {
    Breslow,
    Efron,
}

impl From<TiesArg> for TieMethod {
    fn from(t: TiesArg) -> Self {
        match t {
            TiesArg::Breslow => TieMethod::Breslow,
            TiesArg::Efron => TieMethod::Efron,
        }
    }
}

#[derive(Debug, Args)]
pub struct FitArgs {
    pub data: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Defaults to cox for utility files, pl for ranking files, dpo for preference files.
    #[arg(long, value_enum)]
    pub model: Option<ModelKind>,
    #[arg(long, value_enum)]
    pub ties: Option<TiesArg>,
    /// Ranking files only: also fit Cox on pseudo-times and report the discrepancies.
    #[arg(long)]
    pub check_equivalence: bool,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum TableFormat {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct BaselineArgs {
    pub data: PathBuf,
    /// A report written by `fit`.
    #[arg(long)]
    pub fit: PathBuf,
    /// Comma-separated covariate profile for the conditional CDF (default all zeros).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub at: Option<Vec<f64>>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: TableFormat,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DiagnoseArgs {
    pub data: PathBuf,
    /// Second group's utility file.
    pub other: Option<PathBuf>,
    /// Split a single file on this 0/1 feature column instead.
    #[arg(long, conflicts_with = "other")]
    pub group_column: Option<String>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FigureArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// CDF table `group,u,F`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Hazard-ratio proxy table `group,u,log_hazard_ratio`.
    #[arg(long)]
    pub hazard_out: Option<PathBuf>,
    /// JSON report of the pairwise crossing checks.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ProbeArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Number of consecutive seeds starting at the resolved seed (ignored when
    /// the config lists `diagnose.seeds`).
    #[arg(long, default_value_t = 20)]
    pub seeds: usize,
    /// Records per simulated dataset.
    #[arg(long, default_value_t = 2000)]
    pub n: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Run a parsed command line and return the process exit code.
pub fn run(cli: Cli) -> i32 {
    let result = match cli.command {
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Fit(a) => cmd_fit(&a),
        Command::Baseline(a) => cmd_baseline(&a),
        Command::Diagnose(a) => cmd_diagnose(&a),
        Command::Figure(a) => cmd_figure(&a),
        Command::Probe(a) => cmd_probe(&a),
    };
    match result {
        Ok(()) => EXIT_OK,
        // the reader went away (e.g. `| head`); nothing left to report
        Err(CliError::Io { source, .. }) if source.kind() == std::io::ErrorKind::BrokenPipe => EXIT_OK,
        Err(e) => {
            eprintln!("hazrank: error: {e}");
            e.exit_code()
        }
    }
}

fn pick(flag: &Option<PathBuf>, configured: Option<PathBuf>) -> Sink {
    Sink { path: flag.clone().or(configured) }
}

fn write_json<T: Serialize>(sink: &Sink, value: &T) -> CliResult<()> {
    let mut w = sink.open()?;
    serde_json::to_writer_pretty(&mut w, value)
        .map_err(|e| CliError::io(sink.label(), std::io::Error::other(e)))?;
    writeln!(w).and_then(|_| w.flush()).map_err(|e| CliError::io(sink.label(), e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub version: String,
    pub seed: u64,
    pub config_hash: String,
}

impl Provenance {
    fn new(seed: u64, cfg: &LoadedConfig) -> Self {
        Self { version: VERSION.to_string(), seed, config_hash: cfg.hash.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSidecar {
    pub kind: String,
    pub rows: usize,
    pub spec: SimSpec,
    #[serde(flatten)]
    pub provenance: Provenance,
}

pub fn cmd_simulate(args: &SimulateArgs) -> CliResult<()> {
    let cfg = LoadedConfig::load(Some(&args.config))?;
    let Some(mut spec) = cfg.config.simulate.clone() else {
        return Err(CliError::Config("missing `simulate` section".into()));
    };
    let explicit = cfg.has_key("simulate", "seed").then_some(spec.seed);
    spec.seed = resolve_seed(args.seed, explicit, spec.seed)?;
    let out = pick(&args.out, cfg.output().out);
    let Some(path) = out.path.clone() else {
        return Err(CliError::Usage("simulate needs --out (or output.out) for the CSV and its sidecar".into()));
    };
    let data = simulate(&spec)?;
    let (kind, rows) = match spec.group_size {
        Some(g) => {
            let ext = utilities_to_rankings(&data, g, hazrank_core::derive_seed(spec.seed, 1))?;
            if ext.dropped_tied > 0 {
                eprintln!("hazrank: dropped {} groups with tied utilities", ext.dropped_tied);
            }
            let ranks = ext.dataset()?;
            write_ranking_csv(out.open()?, &path, &ranks)?;
            ("ranking", ranks.instances().iter().map(|i| i.n_items()).sum())
        }
        None => {
            write_utility_csv(out.open()?, &path, &data)?;
            ("utility", data.len())
        }
    };
    let sidecar = SimulationSidecar {
        kind: kind.into(),
        rows,
        spec: spec.clone(),
        provenance: Provenance::new(spec.seed, &cfg),
    };
    write_json(&Sink { path: Some(sidecar_path(&path)) }, &sidecar)
}

pub fn sidecar_path(csv: &Path) -> PathBuf {
    let mut s = csv.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DpoDetails {
    pub beta_temp: f64,
    pub log_probs: Vec<f64>,
    pub reference_log_probs: Vec<f64>,
    /// `beta_temp * (log pi - log pi_ref)` per response.
    pub scores: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceCheck {
    pub pl_log_likelihood: f64,
    pub cox_log_likelihood: f64,
    /// Largest per-instance `|PL - Cox|` log-likelihood gap at the PL estimate.
    pub max_abs_loglik_diff: f64,
    pub max_abs_beta_diff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub model: ModelKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ties: Option<TieMethod>,
    pub feature_names: Vec<String>,
    pub beta: Vec<f64>,
    /// From the inverse observed information; null when it is singular, and
    /// always null for dpo.
    pub se: Option<Vec<f64>>,
    pub loglik: f64,
    pub converged: bool,
    pub iterations: usize,
    pub gradient_norm: f64,
    pub warnings: Vec<FitWarning>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dpo: Option<DpoDetails>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub equivalence: Option<EquivalenceCheck>,
    #[serde(flatten)]
    pub provenance: Provenance,
}

impl FitReport {
    fn new(model: ModelKind, ties: Option<TieMethod>, names: Vec<String>, fit: &FitResult<f64>, prov: Provenance) -> Self {
        Self {
            model,
            ties,
            feature_names: names,
            beta: fit.beta().to_vec(),
            se: fit.standard_errors(),
            loglik: fit.log_likelihood,
            converged: fit.converged,
            iterations: fit.iterations,
            gradient_norm: fit.gradient_norm,
            warnings: fit.warnings.clone(),
            dpo: None,
            equivalence: None,
            provenance: prov,
        }
    }
}

fn mismatch(path: &Path, model: ModelKind, kind: &str) -> CliError {
    CliError::Input {
        path: path.to_path_buf(),
        message: format!("model {model:?} cannot be fitted to a {kind} file"),
    }
}

fn check_equivalence(data: &RankingDataset<f64>, config: &FitConfig<f64>) -> CliResult<EquivalenceCheck> {
    let pl = pl_fit(data, config)?;
    let strata = rankings_to_pseudotimes(data);
    let cox = cox_fit_grouped(&strata, TieMethod::Breslow, config)?;
    let mut max_ll = 0.0f64;
    for (inst, s) in data.instances().iter().zip(&strata) {
        let scores = ScoreModel::new(pl.beta().to_vec())?.scores(inst.covariates())?;
        let a = pl_log_likelihood(&scores, inst.order())?;
        let b = cox_partial_loglik(s.covariates(), pl.beta(), &build_risk_sets(s), TieMethod::Breslow)?;
        max_ll = max_ll.max((a - b).abs());
    }
    let max_beta = pl.beta().iter().zip(cox.beta()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    eprintln!("hazrank: equivalence check: max |loglik diff| {max_ll:e}, max |beta diff| {max_beta:e}");
    Ok(EquivalenceCheck {
        pl_log_likelihood: pl.log_likelihood,
        cox_log_likelihood: cox.log_likelihood,
        max_abs_loglik_diff: max_ll,
        max_abs_beta_diff: max_beta,
    })
}

pub fn cmd_fit(args: &FitArgs) -> CliResult<()> {
    let cfg = LoadedConfig::load(args.config.as_deref())?;
    let section = cfg.fit();
    let seed = resolve_seed(args.seed, None, 0)?;
    let config = section.fit_config();
    config.validate()?;
    let ties: TieMethod = args.ties.map(Into::into).or(section.ties).unwrap_or_default();
    let data = read_dataset(&args.data)?;
    let model = args.model.or(section.model).unwrap_or(match &data {
        DatasetFile::Utility(_) => ModelKind::Cox,
        DatasetFile::Ranking(_) => ModelKind::Pl,
        DatasetFile::Preferences(_) => ModelKind::Dpo,
    });
    if args.check_equivalence && !matches!(data, DatasetFile::Ranking(_)) {
        return Err(CliError::Usage("--check-equivalence needs a ranking file".into()));
    }
    let prov = Provenance::new(seed, &cfg);
    let report = match (&data, model) {
        (DatasetFile::Utility(d), ModelKind::Cox) => {
            let fit = cox_fit(d, ties, &config)?;
            FitReport::new(model, Some(ties), d.covariates().feature_names().to_vec(), &fit, prov)
        }
        (DatasetFile::Ranking(r), ModelKind::Pl | ModelKind::Cox) => {
            let fit = if model == ModelKind::Pl {
                pl_fit(r, &config)?
            } else {
                cox_fit_grouped(&rankings_to_pseudotimes(r), ties, &config)?
            };
            let names = r.instances()[0].covariates().feature_names().to_vec();
            let t = (model == ModelKind::Cox).then_some(ties);
            let mut rep = FitReport::new(model, t, names, &fit, prov);
            if args.check_equivalence {
                rep.equivalence = Some(check_equivalence(r, &config)?);
            }
            rep
        }
        (DatasetFile::Preferences(p), ModelKind::Dpo) => {
            let m = match &section.reference_logits {
                Some(z) => z.len(),
                None => p.iter().map(|&(a, b)| a.max(b)).max().unwrap_or(0) + 1,
            };
            let reference = match &section.reference_logits {
                Some(z) => TabularPolicy::new(z.clone())?,
                None => TabularPolicy::uniform(m)?,
            };
            let temp = section.beta_temp.unwrap_or(1.0);
            let fitted = dpo_fit_tabular(p, &reference, temp, &config)?;
            let lp = PolicyLogProbs::from_policies(&fitted.policy, &reference)?;
            let names = (0..m).map(|k| format!("logit{k}")).collect();
            let mut rep = FitReport::new(model, None, names, &fitted.fit, prov);
            rep.beta = fitted.policy.logits().to_vec();
            // the optimizer's parameters are anchored offsets, not the logits listed here
            rep.se = None;
            rep.dpo = Some(DpoDetails {
                beta_temp: temp,
                log_probs: lp.logp_policy().to_vec(),
                reference_log_probs: lp.logp_ref().to_vec(),
                scores: dpo_scores(&lp, temp)?,
            });
            rep
        }
        (d, m) => return Err(mismatch(&args.data, m, d.kind())),
    };
    write_json(&pick(&args.out, cfg.output().out), &report)?;
    if !report.converged {
        return Err(CliError::NotConverged);
    }
    Ok(())
}

/// The fields of a fit report that later commands need.
#[derive(Debug, Clone, Deserialize)]
pub struct FitFile {
    pub model: ModelKind,
    pub beta: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineReport {
    pub at: Vec<f64>,
    pub score: f64,
    pub u: Vec<f64>,
    pub cumulative_hazard: Vec<f64>,
    pub survival: Vec<f64>,
    pub cdf: Vec<f64>,
    #[serde(flatten)]
    pub provenance: Provenance,
}

pub fn cmd_baseline(args: &BaselineArgs) -> CliResult<()> {
    let cfg = LoadedConfig::load(args.config.as_deref())?;
    let seed = resolve_seed(args.seed, None, 0)?;
    let DatasetFile::Utility(data) = read_dataset(&args.data)? else {
        return Err(CliError::Input { path: args.data.clone(), message: "baseline needs a utility file".into() });
    };
    let text = std::fs::read_to_string(&args.fit).map_err(|e| CliError::io(&args.fit, e))?;
    let fit: FitFile = serde_json::from_str(&text)
        .map_err(|e| CliError::Input { path: args.fit.clone(), message: e.to_string() })?;
    if fit.model != ModelKind::Cox {
        return Err(CliError::Input { path: args.fit.clone(), message: "baseline needs a cox fit".into() });
    }
    let d = data.n_features();
    if fit.beta.len() != d {
        return Err(CliError::Usage(format!("fit has {} coefficients, data has {d} features", fit.beta.len())));
    }
    let at = args.at.clone().unwrap_or_else(|| vec![0.0; d]);
    if at.len() != d {
        return Err(CliError::Usage(format!("--at has {} values, data has {d} features", at.len())));
    }
    let model = ScoreModel::new(fit.beta)?;
    let base = breslow_baseline(&data, &model)?;
    let score = model.score(&at);
    let cdf = conditional_cdf(&base, score);
    let report = BaselineReport {
        at,
        score,
        u: base.cumulative_hazard.knots().to_vec(),
        cumulative_hazard: base.cumulative_hazard.values().to_vec(),
        survival: base.survival.values().to_vec(),
        cdf: cdf.values().to_vec(),
        provenance: Provenance::new(seed, &cfg),
    };
    let sink = pick(&args.out, cfg.output().out);
    match args.format {
        TableFormat::Json => write_json(&sink, &report),
        TableFormat::Csv => {
            let rows = (0..report.u.len()).map(|k| {
                vec![
                    report.u[k].to_string(),
                    report.cumulative_hazard[k].to_string(),
                    report.survival[k].to_string(),
                    report.cdf[k].to_string(),
                ]
            });
            write_table(sink.open()?, &sink.label(), &["u", "cumhaz", "S0", "cdf"], rows)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub label: String,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnoseReport {
    pub groups: Vec<GroupSummary>,
    pub crossing: CrossingReport,
    pub ph_test: PhTestReport,
    pub beta: Vec<f64>,
    pub fit_converged: bool,
    #[serde(flatten)]
    pub provenance: Provenance,
}

fn utility_file(path: &Path) -> CliResult<SurvivalDataset<f64>> {
    match read_dataset(path)? {
        DatasetFile::Utility(d) => Ok(d),
        other => Err(CliError::Input {
            path: path.to_path_buf(),
            message: format!("expected a utility file, got a {} file", other.kind()),
        }),
    }
}

pub fn cmd_diagnose(args: &DiagnoseArgs) -> CliResult<()> {
    let cfg = LoadedConfig::load(args.config.as_deref())?;
    let section = cfg.diagnose();
    let seed = resolve_seed(args.seed, None, 0)?;
    let first = utility_file(&args.data)?;
    let (pooled, a, b, labels) = match (&args.other, &args.group_column) {
        (Some(other), None) => {
            let second = utility_file(other)?;
            let rows: Vec<Vec<f64>> = (0..first.len()).map(|_| vec![0.0]).chain((0..second.len()).map(|_| vec![1.0])).collect();
            let u: Vec<f64> = first.utilities().iter().chain(second.utilities()).copied().collect();
            let cov = hazrank_core::Covariates::with_names(rows, vec!["group".into()])?;
            let pooled = SurvivalDataset::from_covariates(cov, u)?;
            let labels = [args.data.display().to_string(), other.display().to_string()];
            (pooled, first.utilities().to_vec(), second.utilities().to_vec(), labels)
        }
        (None, Some(column)) => {
            let names = first.covariates().feature_names();
            let Some(k) = names.iter().position(|n| n == column) else {
                return Err(CliError::Usage(format!("no feature column named {column:?}")));
            };
            let (mut a, mut b) = (Vec::new(), Vec::new());
            for (x, &u) in first.covariates().rows().zip(first.utilities()) {
                if x[k] == 0.0 {
                    a.push(u);
                } else if x[k] == 1.0 {
                    b.push(u);
                } else {
                    return Err(CliError::Input {
                        path: args.data.clone(),
                        message: format!("group column {column:?} must be 0 or 1, found {}", x[k]),
                    });
                }
            }
            let labels = [format!("{column}=0"), format!("{column}=1")];
            (first.clone(), a, b, labels)
        }
        _ => return Err(CliError::Usage("give a second utility file or --group-column".into())),
    };
    if a.is_empty() || b.is_empty() {
        return Err(hazrank_core::Error::InsufficientData("one of the groups is empty".into()).into());
    }
    let crossing = crossing_detect(&empirical_cdf(&a)?, &empirical_cdf(&b)?, &section.crossing())?;
    if pooled.len() < PH_TEST_MIN_EVENTS {
        return Err(hazrank_core::Error::InsufficientData(format!(
            "the PH test needs at least {PH_TEST_MIN_EVENTS} records"
        ))
        .into());
    }
    let fit = cox_fit(&pooled, TieMethod::Breslow, &cfg.fit().fit_config())?;
    let ph = ph_test(&pooled, &fit, section.z_crit())?;
    let report = DiagnoseReport {
        groups: vec![GroupSummary { label: labels[0].clone(), n: a.len() }, GroupSummary { label: labels[1].clone(), n: b.len() }],
        crossing,
        ph_test: ph,
        beta: fit.beta().to_vec(),
        fit_converged: fit.converged,
        provenance: Provenance::new(seed, &cfg),
    };
    write_json(&pick(&args.out, cfg.output().out), &report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureReport {
    pub groups: Vec<String>,
    pub n_per_group: usize,
    pub pairs: Vec<hazrank_core::figure::PairComparison>,
    #[serde(flatten)]
    pub provenance: Provenance,
}

pub fn cmd_figure(args: &FigureArgs) -> CliResult<()> {
    let cfg = LoadedConfig::load(args.config.as_deref())?;
    let mut spec = cfg.config.figure.clone().unwrap_or_default();
    let explicit = cfg.has_key("figure", "seed").then_some(spec.seed);
    spec.seed = resolve_seed(args.seed, explicit, spec.seed)?;
    let data = figure_data(&spec)?;
    let output = cfg.output();
    let sink = pick(&args.out, output.out);
    let rows = data.cdf_rows.iter().map(|r| vec![r.group.clone(), r.u.to_string(), r.f.to_string()]);
    write_table(sink.open()?, &sink.label(), &["group", "u", "F"], rows)?;
    if let Some(p) = args.hazard_out.clone().or(output.hazard_out) {
        let rows = data
            .hazard_rows
            .iter()
            .map(|r| vec![r.group.clone(), r.u.to_string(), r.log_hazard_ratio.to_string()]);
        let sink = Sink { path: Some(p) };
        write_table(sink.open()?, &sink.label(), &["group", "u", "log_hazard_ratio"], rows)?;
    }
    if let Some(p) = args.report.clone().or(output.report) {
        let report = FigureReport {
            groups: spec.groups.iter().map(|g| g.name.clone()).collect(),
            n_per_group: spec.n_per_group,
            pairs: data.pairs.clone(),
            provenance: Provenance::new(spec.seed, &cfg),
        };
        write_json(&Sink { path: Some(p) }, &report)?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeOutput {
    pub feature: usize,
    pub seeds: Vec<u64>,
    pub ph_regime: RegimeOutcome,
    pub crossing_regime: RegimeOutcome,
    #[serde(flatten)]
    pub provenance: Provenance,
}

pub fn cmd_probe(args: &ProbeArgs) -> CliResult<()> {
    let cfg = LoadedConfig::load(args.config.as_deref())?;
    let seed = resolve_seed(args.seed, None, 0)?;
    let seeds: Vec<u64> = match cfg.diagnose().seeds {
        Some(s) => s,
        None => (0..args.seeds as u64).map(|k| seed.wrapping_add(k)).collect(),
    };
    let report = misestimation_probe(&probe_ph_regime(args.n, 0), &probe_crossing_regime(args.n, 0), 0, &seeds)?;
    let out = ProbeOutput {
        feature: report.feature,
        seeds: report.seeds,
        ph_regime: report.first,
        crossing_regime: report.second,
        provenance: Provenance::new(seed, &cfg),
    };
    write_json(&pick(&args.out, cfg.output().out), &out)
}
