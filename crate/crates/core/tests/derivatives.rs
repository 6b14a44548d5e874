//! Analytic gradients and Hessians against central finite differences.

mod common;

use common::*;
use hazrank_core::{
    build_risk_sets, cox_grad_hessian, cox_partial_loglik, dpo_pair_loss, dpo_pair_loss_hessian,
    pl_grad_hessian, pl_log_likelihood, PolicyLogProbs, SurvivalDataset, TabularPolicy, TieMethod,
};

const GRAD_TOL: f64 = 1e-6;
const HESS_TOL: f64 = 1e-5;
const INSTANCES: usize = 100;

#[test]
fn plackett_luce_derivatives() {
    let mut r = rng(11);
    for _ in 0..INSTANCES {
        let n = int_between(&mut r, 2, 12);
        let d = int_between(&mut r, 1, 5);
        let inst = random_instance(&mut r, n, d);
        let beta: Vec<f64> = (0..d).map(|_| between(&mut r, -1.5, 1.5)).collect();
        let cov = inst.covariates();
        let ll = |b: &[f64]| {
            let s: Vec<f64> = cov.rows().map(|x| x.iter().zip(b).map(|(a, c)| a * c).sum()).collect();
            pl_log_likelihood(&s, inst.order()).unwrap()
        };
        let grad = |b: &[f64]| pl_grad_hessian(cov, b, inst.order()).unwrap().0;
        let (g, h) = pl_grad_hessian(cov, &beta, inst.order()).unwrap();
        let e = rel_err(&g, &fd_gradient(ll, &beta));
        assert!(e <= GRAD_TOL, "gradient rel err {e}");
        let e = rel_err(h.as_slice(), &fd_jacobian(grad, &beta));
        assert!(e <= HESS_TOL, "hessian rel err {e}");
    }
}

fn cox_case(r: &mut hazrank_core::RandomStream, ties: TieMethod) {
    let n = int_between(r, 3, 30);
    let d = int_between(r, 1, 4);
    let rows = normal_rows(r, n, d);
    // a small support forces tied utilities
    let utilities: Vec<f64> = (0..n).map(|_| (1 + r.index(n / 2 + 1)) as f64).collect();
    let data = SurvivalDataset::new(rows, utilities).unwrap();
    let risk = build_risk_sets(&data);
    let beta: Vec<f64> = (0..d).map(|_| between(r, -1.0, 1.0)).collect();
    let cov = data.covariates();
    let ll = |b: &[f64]| cox_partial_loglik(cov, b, &risk, ties).unwrap();
    let grad = |b: &[f64]| cox_grad_hessian(cov, b, &risk, ties).unwrap().0;
    let (g, h) = cox_grad_hessian(cov, &beta, &risk, ties).unwrap();
    let e = rel_err(&g, &fd_gradient(ll, &beta));
    assert!(e <= GRAD_TOL, "{ties:?} gradient rel err {e}");
    let e = rel_err(h.as_slice(), &fd_jacobian(grad, &beta));
    assert!(e <= HESS_TOL, "{ties:?} hessian rel err {e}");
    assert!(h.diagonal().iter().all(|&v| v <= 0.0));
}

#[test]
fn cox_breslow_derivatives() {
    let mut r = rng(12);
    for _ in 0..INSTANCES {
        cox_case(&mut r, TieMethod::Breslow);
    }
}

#[test]
fn cox_efron_derivatives() {
    let mut r = rng(13);
    for _ in 0..INSTANCES {
        cox_case(&mut r, TieMethod::Efron);
    }
}

#[test]
fn dpo_pair_derivatives() {
    let mut r = rng(14);
    for _ in 0..INSTANCES {
        let m = int_between(&mut r, 2, 8);
        let logits: Vec<f64> = (0..m).map(|_| between(&mut r, -2.0, 2.0)).collect();
        let reference = TabularPolicy::new((0..m).map(|_| between(&mut r, -2.0, 2.0)).collect()).unwrap();
        let chosen = r.index(m);
        let rejected = (chosen + 1 + r.index(m - 1)) % m;
        let temp = between(&mut r, 0.1, 2.0);
        let lp = |z: &[f64]| {
            PolicyLogProbs::from_policies(&TabularPolicy::new(z.to_vec()).unwrap(), &reference).unwrap()
        };
        let loss = |z: &[f64]| dpo_pair_loss(&lp(z), chosen, rejected, temp).unwrap().0;
        let grad = |z: &[f64]| dpo_pair_loss(&lp(z), chosen, rejected, temp).unwrap().1;
        let g = grad(&logits);
        let e = rel_err(&g, &fd_gradient(loss, &logits));
        assert!(e <= GRAD_TOL, "gradient rel err {e}");
        let h = dpo_pair_loss_hessian(&lp(&logits), chosen, rejected, temp).unwrap();
        let e = rel_err(h.as_slice(), &fd_jacobian(grad, &logits));
        assert!(e <= HESS_TOL, "hessian rel err {e}");
    }
}
