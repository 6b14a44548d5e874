//! Dataset files.
//!
//! The header decides the kind of file:
//! * `utility,<features...>`: one record per row, utility > 0;
//! * `group,rank,<features...>`: ranking instances, ranks `1..=g` within each
//!   group with 1 the most preferred;
//! * `chosen,rejected`: response-index preference pairs.
//!
//! Numbers are written with Rust's shortest round-trip formatting, so a file
//! read back reproduces the in-memory values bit for bit.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use hazrank_core::{Covariates, RankingDataset, RankingInstance, SurvivalDataset};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq)]
pub enum DatasetFile {
    Utility(SurvivalDataset<f64>),
    Ranking(RankingDataset<f64>),
    Preferences(Vec<(usize, usize)>),
}

impl DatasetFile {
    pub fn kind(&self) -> &'static str {
        match self {
            DatasetFile::Utility(_) => "utility",
            DatasetFile::Ranking(_) => "ranking",
            DatasetFile::Preferences(_) => "preference",
        }
    }
}

pub fn read_dataset(path: &Path) -> CliResult<DatasetFile> {
    let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    parse_dataset(file, path)
}

struct Ctx<'a> {
    path: &'a Path,
}

impl Ctx<'_> {
    fn err(&self, line: u64, message: impl Into<String>) -> CliError {
        CliError::Parse { path: self.path.to_path_buf(), line, message: message.into() }
    }

    fn input(&self, message: impl Into<String>) -> CliError {
        CliError::Input { path: self.path.to_path_buf(), message: message.into() }
    }

    fn csv(&self, e: csv::Error) -> CliError {
        let line = e.position().map_or(0, |p| p.line());
        self.err(line, e.to_string())
    }
}

fn number(ctx: &Ctx, line: u64, column: &str, text: &str) -> CliResult<f64> {
    let v: f64 = text
        .trim()
        .parse()
        .map_err(|_| ctx.err(line, format!("column {column}: {text:?} is not a number")))?;
    if !v.is_finite() {
        return Err(ctx.err(line, format!("column {column}: value must be finite")));
    }
    Ok(v)
}

fn integer<I: std::str::FromStr>(ctx: &Ctx, line: u64, column: &str, text: &str) -> CliResult<I> {
    text.trim()
        .parse()
        .map_err(|_| ctx.err(line, format!("column {column}: {text:?} is not a valid integer")))
}

pub fn parse_dataset(input: impl Read, path: &Path) -> CliResult<DatasetFile> {
    let ctx = Ctx { path };
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header: Vec<String> =
        reader.headers().map_err(|e| ctx.csv(e))?.iter().map(|h| h.trim().to_string()).collect();
    let mut records = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| ctx.csv(e))?;
        let line = rec.position().map_or(0, |p| p.line());
        records.push((line, rec));
    }
    if records.is_empty() {
        return Err(ctx.input("no data rows"));
    }
    let h: Vec<&str> = header.iter().map(String::as_str).collect();
    match h.as_slice() {
        ["utility", features @ ..] => {
            let names = feature_names(&ctx, features)?;
            let mut rows = Vec::with_capacity(records.len());
            let mut utilities = Vec::with_capacity(records.len());
            for (line, rec) in &records {
                let u = number(&ctx, *line, "utility", &rec[0])?;
                if u <= 0.0 {
                    return Err(ctx.err(*line, format!("utility must be positive, got {u}")));
                }
                utilities.push(u);
                rows.push(features_of(&ctx, *line, rec, 1, &names)?);
            }
            let cov = Covariates::with_names(rows, names)?;
            Ok(DatasetFile::Utility(SurvivalDataset::from_covariates(cov, utilities)?))
        }
        ["group", "rank", features @ ..] => {
            let names = feature_names(&ctx, features)?;
            let mut order_of_groups: Vec<i64> = Vec::new();
            let mut members: HashMap<i64, Vec<(usize, u64, Vec<f64>)>> = HashMap::new();
            for (line, rec) in &records {
                let g: i64 = integer(&ctx, *line, "group", &rec[0])?;
                let rank: usize = integer(&ctx, *line, "rank", &rec[1])?;
                let row = features_of(&ctx, *line, rec, 2, &names)?;
                members
                    .entry(g)
                    .or_insert_with(|| {
                        order_of_groups.push(g);
                        Vec::new()
                    })
                    .push((rank, *line, row));
            }
            let mut instances = Vec::with_capacity(order_of_groups.len());
            for g in order_of_groups {
                let items = members.remove(&g).expect("group recorded");
                let first_line = items[0].1;
                let mut by_rank: Vec<(usize, usize)> =
                    items.iter().enumerate().map(|(i, (r, _, _))| (*r, i)).collect();
                by_rank.sort_unstable();
                if by_rank.iter().enumerate().any(|(k, (r, _))| *r != k + 1) {
                    return Err(ctx.err(
                        first_line,
                        format!("group {g}: ranks must be exactly 1..={} with no repeats", items.len()),
                    ));
                }
                if items.len() < 2 {
                    return Err(ctx.err(first_line, format!("group {g} has a single item")));
                }
                let order = by_rank.into_iter().map(|(_, i)| i).collect();
                let rows = items.into_iter().map(|(_, _, row)| row).collect();
                let cov = Covariates::with_names(rows, names.clone())?;
                instances.push(RankingInstance::from_covariates(cov, order)?);
            }
            Ok(DatasetFile::Ranking(RankingDataset::new(instances)?))
        }
        ["chosen", "rejected"] => {
            let mut pairs = Vec::with_capacity(records.len());
            for (line, rec) in &records {
                let c: usize = integer(&ctx, *line, "chosen", &rec[0])?;
                let r: usize = integer(&ctx, *line, "rejected", &rec[1])?;
                if c == r {
                    return Err(ctx.err(*line, "chosen and rejected must differ"));
                }
                pairs.push((c, r));
            }
            Ok(DatasetFile::Preferences(pairs))
        }
        _ => Err(ctx.input(format!(
            "unrecognized header {header:?}; expected `utility,...`, `group,rank,...` or `chosen,rejected`"
        ))),
    }
}

fn feature_names(ctx: &Ctx, features: &[&str]) -> CliResult<Vec<String>> {
    if features.is_empty() {
        return Err(ctx.input("no feature columns"));
    }
    if let Some(bad) = features.iter().find(|f| f.is_empty()) {
        return Err(ctx.input(format!("empty feature column name {bad:?}")));
    }
    Ok(features.iter().map(|s| s.to_string()).collect())
}

fn features_of(
    ctx: &Ctx,
    line: u64,
    rec: &csv::StringRecord,
    skip: usize,
    names: &[String],
) -> CliResult<Vec<f64>> {
    names.iter().enumerate().map(|(k, name)| number(ctx, line, name, &rec[skip + k])).collect()
}

fn sink_err(path: &Path) -> impl Fn(csv::Error) -> CliError + '_ {
    move |e| CliError::Io { path: path.to_path_buf(), source: std::io::Error::other(e.to_string()) }
}

pub fn write_utility_csv(out: impl Write, path: &Path, data: &SurvivalDataset<f64>) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(out);
    let e = sink_err(path);
    let mut header = vec!["utility".to_string()];
    header.extend(data.covariates().feature_names().iter().cloned());
    w.write_record(&header).map_err(&e)?;
    for (x, u) in data.covariates().rows().zip(data.utilities()) {
        let mut rec = vec![u.to_string()];
        rec.extend(x.iter().map(f64::to_string));
        w.write_record(&rec).map_err(&e)?;
    }
    w.flush().map_err(|err| CliError::io(path, err))
}

pub fn write_ranking_csv(out: impl Write, path: &Path, data: &RankingDataset<f64>) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(out);
    let e = sink_err(path);
    let names = data.instances()[0].covariates().feature_names().to_vec();
    let mut header = vec!["group".to_string(), "rank".to_string()];
    header.extend(names);
    w.write_record(&header).map_err(&e)?;
    for (g, inst) in data.instances().iter().enumerate() {
        let mut rank = vec![0; inst.n_items()];
        for (k, &item) in inst.order().iter().enumerate() {
            rank[item] = k + 1;
        }
        for (i, x) in inst.covariates().rows().enumerate() {
            let mut rec = vec![(g + 1).to_string(), rank[i].to_string()];
            rec.extend(x.iter().map(f64::to_string));
            w.write_record(&rec).map_err(&e)?;
        }
    }
    w.flush().map_err(|err| CliError::io(path, err))
}

/// Write `header` and `rows` as CSV.
pub fn write_table(out: impl Write, path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(out);
    let e = sink_err(path);
    w.write_record(header).map_err(&e)?;
    for r in rows {
        w.write_record(&r).map_err(&e)?;
    }
    w.flush().map_err(|err| CliError::io(path, err))
}

/// A named output: a file, or stdout when absent.
pub struct Sink {
    pub path: Option<PathBuf>,
}

impl Sink {
    pub fn label(&self) -> PathBuf {
        self.path.clone().unwrap_or_else(|| PathBuf::from("<stdout>"))
    }

    pub fn open(&self) -> CliResult<Box<dyn Write>> {
        match &self.path {
            Some(p) => {
                let f = std::fs::File::create(p).map_err(|e| CliError::io(p, e))?;
                Ok(Box::new(std::io::BufWriter::new(f)))
            }
            None => Ok(Box::new(std::io::stdout().lock())),
        }
    }
}
