//! Curve tables contrasting utility distributions that do and do not satisfy
//! proportional hazards, as long-format rows ready for any plotting tool.

use serde::{Deserialize, Serialize};

use crate::diagnose::{crossing_detect, empirical_cdf, CrossingConfig, CrossingReport, Ecdf};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, seeded_rng};
use crate::simulate::UtilityLaw;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FigureGroup {
    pub name: String,
    pub law: UtilityLaw,
    /// Linear predictor applied to the law.
    #[serde(default)]
    pub eta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FigureSpec {
    pub n_per_group: usize,
    #[serde(default)]
    pub seed: u64,
    /// Number of pooled-quantile grid points for the emitted curves.
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
    /// The first group is the reference every other group is compared with.
    pub groups: Vec<FigureGroup>,
    #[serde(default)]
    pub crossing: CrossingConfig,
}

fn default_grid_points() -> usize {
    200
}

impl Default for FigureSpec {
    fn default() -> Self {
        crate::fixtures::figure_default()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdfRow {
    pub group: String,
    pub u: f64,
    #[serde(rename = "F")]
    pub f: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HazardRow {
    pub group: String,
    pub u: f64,
    /// `log(-log(1 - F_g(u))) - log(-log(1 - F_ref(u)))`; constant in `u` under PH.
    pub log_hazard_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairComparison {
    pub first: String,
    pub second: String,
    pub report: CrossingReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FigureData {
    pub ecdfs: Vec<(String, Ecdf<f64>)>,
    pub cdf_rows: Vec<CdfRow>,
    pub hazard_rows: Vec<HazardRow>,
    pub pairs: Vec<PairComparison>,
}

impl FigureData {
    pub fn pair(&self, first: &str, second: &str) -> Option<&CrossingReport> {
        self.pairs
            .iter()
            .find(|p| p.first == first && p.second == second)
            .map(|p| &p.report)
    }
}

/// Sample each group from its own derived stream and tabulate the curves.
pub fn figure_data(spec: &FigureSpec) -> Result<FigureData> {
    if spec.groups.len() < 2 {
        return Err(Error::InvalidParameter("a figure needs at least two groups".into()));
    }
    if spec.grid_points < 2 {
        return Err(Error::InvalidParameter("grid_points must be >= 2".into()));
    }
    let mut samples = Vec::with_capacity(spec.groups.len());
    for (gi, g) in spec.groups.iter().enumerate() {
        g.law.validate()?;
        let mut rng = seeded_rng(derive_seed(spec.seed, gi as u64));
        let s: Vec<f64> = (0..spec.n_per_group).map(|_| g.law.sample(g.eta, &mut rng)).collect();
        samples.push(s);
    }
    let ecdfs: Vec<(String, Ecdf<f64>)> = spec
        .groups
        .iter()
        .zip(&samples)
        .map(|(g, s)| Ok((g.name.clone(), empirical_cdf(s)?)))
        .collect::<Result<_>>()?;

    let mut pooled: Vec<f64> = samples.concat();
    pooled.sort_by(f64::total_cmp);
    let grid: Vec<f64> = (0..spec.grid_points)
        .map(|k| pooled[k * (pooled.len() - 1) / (spec.grid_points - 1)])
        .collect();

    let mut cdf_rows = Vec::new();
    let mut hazard_rows = Vec::new();
    let reference = &ecdfs[0].1;
    for (name, e) in &ecdfs {
        for &u in &grid {
            let f = e.eval(u);
            cdf_rows.push(CdfRow { group: name.clone(), u, f });
            let fr = reference.eval(u);
            if f > 0.0 && f < 1.0 && fr > 0.0 && fr < 1.0 {
                let lh = |p: f64| (-(-p).ln_1p()).ln();
                hazard_rows.push(HazardRow {
                    group: name.clone(),
                    u,
                    log_hazard_ratio: lh(f) - lh(fr),
                });
            }
        }
    }

    let mut pairs = Vec::new();
    for (name, e) in &ecdfs[1..] {
        pairs.push(PairComparison {
            first: ecdfs[0].0.clone(),
            second: name.clone(),
            report: crossing_detect(reference, e, &spec.crossing)?,
        });
    }
    Ok(FigureData { ecdfs, cdf_rows, hazard_rows, pairs })
}
