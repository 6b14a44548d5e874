//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fail.

use std::process::Command;
use std::time::Instant;

use hazrank_core::diagnose::DEFAULT_Z_CRIT;
use hazrank_core::fixtures::{
    ph_true_regime, ph_violating_regime, probe_crossing_regime, probe_ph_regime, recovery_regime,
};
use hazrank_core::{
    breslow_baseline, build_risk_sets, conditional_cdf, cox_fit, cox_fit_grouped, cox_grad_hessian,
    cox_partial_loglik, dpo_fit_tabular, dpo_pair_loss, dpo_pair_loss_hessian, misestimation_probe,
    ph_test, pl_enumerate, pl_fit, pl_grad_hessian, pl_log_likelihood, ranking_to_pseudotimes,
    rankings_to_pseudotimes, seeded_rng, simulate, utilities_to_rankings, FitConfig, PolicyLogProbs,
    RandomStream, RankingDataset, RankingInstance, ScoreModel, SurvivalDataset, TabularPolicy,
    TieMethod,
};

type Check = fn() -> Outcome;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn between(r: &mut RandomStream, lo: usize, hi: usize) -> usize {
    lo + r.index(hi - lo + 1)
}

fn normal_rows(r: &mut RandomStream, n: usize, d: usize) -> Vec<Vec<f64>> {
    (0..n).map(|_| (0..d).map(|_| r.standard_normal()).collect()).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Draw a ranking by repeated softmax choice among the remaining items.
fn sample_ranking(r: &mut RandomStream, rows: &[Vec<f64>], beta: &[f64]) -> Vec<usize> {
    let mut left: Vec<usize> = (0..rows.len()).collect();
    let mut order = Vec::with_capacity(rows.len());
    while !left.is_empty() {
        let w: Vec<f64> = left.iter().map(|&i| dot(&rows[i], beta).exp()).collect();
        let mut t = r.uniform() * w.iter().sum::<f64>();
        let mut pick = left.len() - 1;
        for (k, wk) in w.iter().enumerate() {
            if t < *wk {
                pick = k;
                break;
            }
            t -= wk;
        }
        order.push(left.remove(pick));
    }
    order
}

fn equivalence() -> Outcome {
    let mut r = seeded_rng(101);
    let mut max_ll = 0.0f64;
    for _ in 0..1000 {
        let n = between(&mut r, 2, 20);
        let d = between(&mut r, 1, 5);
        let rows = normal_rows(&mut r, n, d);
        let mut order: Vec<usize> = (0..n).collect();
        r.shuffle(&mut order);
        let inst = RankingInstance::new(rows, order).unwrap();
        let beta: Vec<f64> = (0..d).map(|_| r.standard_normal()).collect();
        let scores: Vec<f64> = inst.covariates().rows().map(|x| dot(x, &beta)).collect();
        let pl = pl_log_likelihood(&scores, inst.order()).unwrap();
        let surv = ranking_to_pseudotimes(&inst);
        let cox = cox_partial_loglik(surv.covariates(), &beta, &build_risk_sets(&surv), TieMethod::Breslow).unwrap();
        max_ll = max_ll.max((pl - cox).abs());
    }
    let mut max_beta = 0.0f64;
    let mut all_converged = true;
    for d in 1..=5 {
        let beta_true: Vec<f64> = (0..d).map(|_| r.standard_normal() * 0.7).collect();
        let instances = (0..200)
            .map(|_| {
                let n = between(&mut r, 2, 20);
                let rows = normal_rows(&mut r, n, d);
                let order = sample_ranking(&mut r, &rows, &beta_true);
                RankingInstance::new(rows, order).unwrap()
            })
            .collect();
        let data = RankingDataset::new(instances).unwrap();
        let pl = pl_fit(&data, &FitConfig::default()).unwrap();
        let cox = cox_fit_grouped(&rankings_to_pseudotimes(&data), TieMethod::Breslow, &FitConfig::default()).unwrap();
        all_converged &= pl.converged && cox.converged;
        for (a, b) in pl.beta().iter().zip(cox.beta()) {
            max_beta = max_beta.max((a - b).abs());
        }
    }
    outcome(
        max_ll <= 1e-12 && max_beta <= 1e-8 && all_converged,
        format!("max |loglik diff| {max_ll:.2e} over 1000 instances; max |beta diff| {max_beta:.2e} over 5 fits"),
    )
}

fn normalization() -> Outcome {
    let mut r = seeded_rng(102);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let n = between(&mut r, 1, 6);
        let scores: Vec<f64> = (0..n).map(|_| 10.0 * r.uniform() - 5.0).collect();
        let total: f64 = pl_enumerate(&scores).unwrap().values().sum();
        worst = worst.max((total - 1.0).abs());
    }
    outcome(worst <= 1e-12, format!("max |sum - 1| {worst:.2e} over 200 score vectors"))
}

fn inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn rel(a: &[f64], b: &[f64]) -> f64 {
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    inf(&diff) / inf(b).max(1e-8)
}

fn fd_grad(f: &dyn Fn(&[f64]) -> f64, x: &[f64]) -> Vec<f64> {
    (0..x.len())
        .map(|k| {
            let h = 1e-5 * (1.0 + x[k].abs());
            let (mut up, mut dn) = (x.to_vec(), x.to_vec());
            up[k] += h;
            dn[k] -= h;
            (f(&up) - f(&dn)) / (2.0 * h)
        })
        .collect()
}

fn fd_jac(g: &dyn Fn(&[f64]) -> Vec<f64>, x: &[f64]) -> Vec<f64> {
    let d = x.len();
    let mut j = vec![0.0; d * d];
    for k in 0..d {
        let h = 1e-5 * (1.0 + x[k].abs());
        let (mut up, mut dn) = (x.to_vec(), x.to_vec());
        up[k] += h;
        dn[k] -= h;
        let (gu, gd) = (g(&up), g(&dn));
        for i in 0..d {
            j[i * d + k] = (gu[i] - gd[i]) / (2.0 * h);
        }
    }
    j
}

fn derivatives() -> Outcome {
    let mut r = seeded_rng(103);
    let (mut worst_g, mut worst_h) = ([0.0f64; 4], [0.0f64; 4]);
    for _ in 0..100 {
        // Plackett-Luce
        let (n, d) = (between(&mut r, 2, 12), between(&mut r, 1, 5));
        let rows = normal_rows(&mut r, n, d);
        let mut order: Vec<usize> = (0..n).collect();
        r.shuffle(&mut order);
        let inst = RankingInstance::new(rows, order).unwrap();
        let beta: Vec<f64> = (0..d).map(|_| 3.0 * r.uniform() - 1.5).collect();
        let cov = inst.covariates();
        let f = |b: &[f64]| {
            let s: Vec<f64> = cov.rows().map(|x| dot(x, b)).collect();
            pl_log_likelihood(&s, inst.order()).unwrap()
        };
        let g = |b: &[f64]| pl_grad_hessian(cov, b, inst.order()).unwrap().0;
        let (ga, ha) = pl_grad_hessian(cov, &beta, inst.order()).unwrap();
        worst_g[0] = worst_g[0].max(rel(&ga, &fd_grad(&f, &beta)));
        worst_h[0] = worst_h[0].max(rel(ha.as_slice(), &fd_jac(&g, &beta)));

        // Cox with ties, both methods
        let (n, d) = (between(&mut r, 3, 30), between(&mut r, 1, 4));
        let u: Vec<f64> = (0..n).map(|_| (1 + r.index(n / 2 + 1)) as f64).collect();
        let data = SurvivalDataset::new(normal_rows(&mut r, n, d), u).unwrap();
        let risk = build_risk_sets(&data);
        let beta: Vec<f64> = (0..d).map(|_| 2.0 * r.uniform() - 1.0).collect();
        for (slot, ties) in [(1, TieMethod::Breslow), (2, TieMethod::Efron)] {
            let f = |b: &[f64]| cox_partial_loglik(data.covariates(), b, &risk, ties).unwrap();
            let g = |b: &[f64]| cox_grad_hessian(data.covariates(), b, &risk, ties).unwrap().0;
            let (ga, ha) = cox_grad_hessian(data.covariates(), &beta, &risk, ties).unwrap();
            worst_g[slot] = worst_g[slot].max(rel(&ga, &fd_grad(&f, &beta)));
            worst_h[slot] = worst_h[slot].max(rel(ha.as_slice(), &fd_jac(&g, &beta)));
        }

        // DPO pairwise loss in the policy logits
        let m = between(&mut r, 2, 8);
        let z: Vec<f64> = (0..m).map(|_| 4.0 * r.uniform() - 2.0).collect();
        let reference = TabularPolicy::new((0..m).map(|_| 4.0 * r.uniform() - 2.0).collect()).unwrap();
        let c = r.index(m);
        let rj = (c + 1 + r.index(m - 1)) % m;
        let temp = 0.1 + 1.9 * r.uniform();
        let lp = |z: &[f64]| PolicyLogProbs::from_policies(&TabularPolicy::new(z.to_vec()).unwrap(), &reference).unwrap();
        let f = |z: &[f64]| dpo_pair_loss(&lp(z), c, rj, temp).unwrap().0;
        let g = |z: &[f64]| dpo_pair_loss(&lp(z), c, rj, temp).unwrap().1;
        let h = dpo_pair_loss_hessian(&lp(&z), c, rj, temp).unwrap();
        worst_g[3] = worst_g[3].max(rel(&g(&z), &fd_grad(&f, &z)));
        worst_h[3] = worst_h[3].max(rel(h.as_slice(), &fd_jac(&g, &z)));
    }
    let pass = worst_g.iter().all(|&e| e <= 1e-6) && worst_h.iter().all(|&e| e <= 1e-5);
    outcome(
        pass,
        format!(
            "max rel err gradient/hessian: PL {:.1e}/{:.1e}, Cox-Breslow {:.1e}/{:.1e}, Cox-Efron {:.1e}/{:.1e}, DPO {:.1e}/{:.1e}",
            worst_g[0], worst_h[0], worst_g[1], worst_h[1], worst_g[2], worst_h[2], worst_g[3], worst_h[3]
        ),
    )
}

fn breslow_reduction() -> Outcome {
    let mut r = seeded_rng(104);
    let (mut worst, mut exact) = (0.0f64, true);
    for _ in 0..50 {
        let n = between(&mut r, 2, 300);
        let u: Vec<f64> = (0..n).map(|_| (1 + r.index(n)) as f64 * 0.25).collect();
        let data = SurvivalDataset::new(normal_rows(&mut r, n, 2), u.clone()).unwrap();
        let base = breslow_baseline(&data, &ScoreModel::zeros(2)).unwrap();
        // Nelson-Aalen by direct counting
        let mut total = 0.0;
        for (&t, &h) in base.cumulative_hazard.knots().iter().zip(base.cumulative_hazard.values()) {
            let events = u.iter().filter(|&&v| v == t).count() as f64;
            let at_risk = u.iter().filter(|&&v| v >= t).count() as f64;
            total += events / at_risk;
            worst = worst.max((h - total).abs());
        }
        let cdf = conditional_cdf(&base, 0.0);
        exact &= cdf.values().iter().zip(base.survival.values()).all(|(&f, &s)| f == 1.0 - s);
    }
    outcome(worst <= 1e-14 && exact, format!("max |Breslow - Nelson-Aalen| {worst:.2e}; CDF at score 0 equals 1 - S0 exactly: {exact}"))
}

fn recovery() -> Outcome {
    let start = Instant::now();
    let mut hits = 0;
    for seed in 0..20 {
        let data = simulate(&recovery_regime(2000, seed)).unwrap();
        let fit = cox_fit(&data, TieMethod::Breslow, &FitConfig::default()).unwrap();
        let se = fit.standard_errors().map_or(f64::INFINITY, |s| s[0]);
        if fit.converged && (fit.beta()[0] - 1.5).abs() <= 3.0 * se {
            hits += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(hits >= 19 && secs <= 10.0, format!("{hits}/20 seeds within 3 SE of 1.5 in {secs:.2} s"))
}

fn hazrank(args: &[&str], threads: Option<&str>) -> std::process::Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_hazrank"));
    c.args(args).env_remove("HAZRANK_SEED");
    if let Some(t) = threads {
        c.env("RAYON_NUM_THREADS", t);
    }
    c.output().expect("binary runs")
}

fn ph_flags(spec_for: impl Fn(u64) -> hazrank_core::SimSpec) -> usize {
    (0..20u64)
        .filter(|&seed| {
            let data = simulate(&spec_for(seed)).unwrap();
            let fit = cox_fit(&data, TieMethod::Breslow, &FitConfig::default()).unwrap();
            ph_test(&data, &fit, DEFAULT_Z_CRIT).unwrap().any_violated()
        })
        .count()
}

fn figure() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let out = dir.path().join("curves.csv");
    let o = hazrank(&["figure", "--out", out.to_str().unwrap(), "--report", report.to_str().unwrap()], None);
    let r: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap_or_default()).unwrap_or_default();
    let pair = |second: &str| {
        r["pairs"].as_array().and_then(|ps| ps.iter().find(|p| p["second"] == second)).map(|p| p["report"].clone())
    };
    let (ij, ik) = (pair("j").unwrap_or_default(), pair("k").unwrap_or_default());
    let ij_ok = ij["crossing_count"] == 0 && ij["dominance_verdict"] != "crossing" && ij["dominance_verdict"] != "indistinguishable";
    let ik_ok = ik["crossing_count"].as_u64().is_some_and(|c| c >= 1);
    let violating = ph_flags(|s| ph_violating_regime(5000, s));
    let ph_true = ph_flags(|s| ph_true_regime(5000, s));
    outcome(
        o.status.success() && ij_ok && ik_ok && violating >= 18 && ph_true <= 2,
        format!(
            "(i,j) {} with {} crossings; (i,k) {} crossings; ph_test flags violating {violating}/20, PH-true {ph_true}/20",
            ij["dominance_verdict"], ij["crossing_count"], ik["crossing_count"]
        ),
    )
}

fn misestimation() -> Outcome {
    let seeds: Vec<u64> = (0..20).collect();
    let rep = misestimation_probe(&probe_ph_regime(2000, 0), &probe_crossing_regime(2000, 0), 0, &seeds).unwrap();
    outcome(
        rep.second.disagreements >= 10 && rep.first.agreements >= 19,
        format!(
            "crossing fixture: {}/20 disagree (medians {:.3} vs {:.3}); PH fixture: {}/20 agree",
            rep.second.disagreements, rep.second.median_without, rep.second.median_with, rep.first.agreements
        ),
    )
}

fn dpo() -> Outcome {
    let policy = TabularPolicy::new(vec![0.3, -1.2, 2.0]).unwrap();
    let lp = PolicyLogProbs::from_policies(&policy, &policy).unwrap();
    let (loss, _) = dpo_pair_loss(&lp, 0, 2, 0.7).unwrap();
    let exact = loss == std::f64::consts::LN_2;
    let prefs: Vec<(usize, usize)> = (0..10_000).map(|k| if k % 4 == 3 { (1, 0) } else { (0, 1) }).collect();
    let fit = dpo_fit_tabular(&prefs, &TabularPolicy::uniform(2).unwrap(), 1.0, &FitConfig::default()).unwrap();
    let lp = PolicyLogProbs::from_policies(&fit.policy, &TabularPolicy::uniform(2).unwrap()).unwrap();
    let s = hazrank_core::dpo_scores(&lp, 1.0).unwrap();
    let gap = s[0] - s[1];
    outcome(
        exact && (gap - 3f64.ln()).abs() <= 0.1,
        format!("policy == reference loss is log 2 exactly: {exact}; 75% fit gap {gap:.4} vs ln 3 = {:.4}", 3f64.ln()),
    )
}

fn library_pipeline() -> Vec<u64> {
    let data = simulate(&ph_violating_regime(3000, 7)).unwrap();
    let cox = cox_fit(&data, TieMethod::Efron, &FitConfig::default()).unwrap();
    let pairs = utilities_to_rankings(&data, 3, 8).unwrap();
    let pl = pl_fit(&pairs.dataset().unwrap(), &FitConfig::default()).unwrap();
    let probe = misestimation_probe(&probe_ph_regime(400, 0), &probe_crossing_regime(400, 0), 0, &[3, 4, 5, 6]).unwrap();
    data.utilities()
        .iter()
        .chain(cox.beta())
        .chain(pl.beta())
        .chain(&probe.first.fitted)
        .chain(&probe.second.fitted)
        .map(|v| v.to_bits())
        .collect()
}

fn determinism() -> Outcome {
    let pool = |n: usize| rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap().install(library_pipeline);
    let reference = library_pipeline();
    let library_ok = reference == library_pipeline() && [1, 2, 8].iter().all(|&n| pool(n) == reference);

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(
        &cfg,
        r#"{"simulate": {"n": 500, "beta_true": [0.5], "covariates": [{"type": "uniform_box", "lo": -1, "hi": 1}],
            "law": {"type": "log_normal", "mu": 0, "sigma": 1}, "seed": 12, "group_size": 4}}"#,
    )
    .unwrap();
    let mut files = Vec::new();
    for (k, threads) in ["1", "4", "1"].iter().enumerate() {
        let out = dir.path().join(format!("s{k}.csv"));
        hazrank(&["simulate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], Some(threads));
        let fit = hazrank(&["fit", out.to_str().unwrap()], Some(threads)).stdout;
        let fig = hazrank(&["figure"], Some(threads)).stdout;
        files.push((std::fs::read(&out).unwrap_or_default(), fit, fig));
    }
    let cli_ok = !files[0].0.is_empty() && files.windows(2).all(|w| w[0] == w[1]);
    outcome(
        library_ok && cli_ok,
        format!("library bits identical over runs and 1/2/8 threads: {library_ok}; CLI simulate/fit/figure bytes identical over runs and 1/4 threads: {cli_ok}"),
    )
}

fn main() {
    let criteria: [(&str, Check); 9] = [
        ("likelihood equivalence", equivalence),
        ("ranking normalization", normalization),
        ("gradient and hessian", derivatives),
        ("breslow reduction", breslow_reduction),
        ("parameter recovery", recovery),
        ("dominance vs crossing", figure),
        ("preference mis-estimation", misestimation),
        ("dpo sanity", dpo),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!("{} criterion {} ({name}): {}", if o.pass { "PASS" } else { "FAIL" }, k + 1, o.detail);
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
