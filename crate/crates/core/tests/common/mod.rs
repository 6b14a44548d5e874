#![allow(dead_code)]

use hazrank_core::{seeded_rng, RandomStream, RankingInstance};

pub fn rng(seed: u64) -> RandomStream {
    seeded_rng(seed)
}

pub fn between(rng: &mut RandomStream, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.uniform()
}

pub fn int_between(rng: &mut RandomStream, lo: usize, hi: usize) -> usize {
    lo + rng.index(hi - lo + 1)
}

pub fn normal_rows(rng: &mut RandomStream, n: usize, d: usize) -> Vec<Vec<f64>> {
    (0..n).map(|_| (0..d).map(|_| rng.standard_normal()).collect()).collect()
}

pub fn random_permutation(rng: &mut RandomStream, n: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    rng.shuffle(&mut p);
    p
}

pub fn random_instance(rng: &mut RandomStream, n: usize, d: usize) -> RankingInstance<f64> {
    let rows = normal_rows(rng, n, d);
    let order = random_permutation(rng, n);
    RankingInstance::new(rows, order).unwrap()
}

pub fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// `||a - b||_inf / ||b||_inf`, with `b` the reference.
pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    inf_norm(&diff) / inf_norm(b).max(1e-8)
}

fn step(beta: &[f64], k: usize) -> f64 {
    1e-5 * (1.0 + beta[k].abs())
}

pub fn fd_gradient(f: impl Fn(&[f64]) -> f64, beta: &[f64]) -> Vec<f64> {
    (0..beta.len())
        .map(|k| {
            let h = step(beta, k);
            let mut up = beta.to_vec();
            let mut down = beta.to_vec();
            up[k] += h;
            down[k] -= h;
            (f(&up) - f(&down)) / (2.0 * h)
        })
        .collect()
}

/// Row-major Jacobian of `g` by central differences, symmetrized.
pub fn fd_jacobian(g: impl Fn(&[f64]) -> Vec<f64>, beta: &[f64]) -> Vec<f64> {
    let d = beta.len();
    let mut j = vec![0.0; d * d];
    for k in 0..d {
        let h = step(beta, k);
        let mut up = beta.to_vec();
        let mut down = beta.to_vec();
        up[k] += h;
        down[k] -= h;
        let (gu, gd) = (g(&up), g(&down));
        for r in 0..d {
            j[r * d + k] = (gu[r] - gd[r]) / (2.0 * h);
        }
    }
    for r in 0..d {
        for c in 0..r {
            let m = 0.5 * (j[r * d + c] + j[c * d + r]);
            j[r * d + c] = m;
            j[c * d + r] = m;
        }
    }
    j
}

/// Two-sample Kolmogorov-Smirnov statistic.
pub fn ks_distance(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

/// Nelson-Aalen cumulative hazard at each distinct utility: after sorting, the
/// number at risk at a value is the count of records not below it.
pub fn nelson_aalen(u: &[f64]) -> Vec<(f64, f64)> {
    let mut s = u.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    let mut out = Vec::new();
    let mut total = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j < n && s[j] == s[i] {
            j += 1;
        }
        total += (j - i) as f64 / (n - i) as f64;
        out.push((s[i], total));
        i = j;
    }
    out
}
