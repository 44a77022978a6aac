//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use ndarray::{Array1, Array2};
use qlb::dataset::{NormRegime, SampleSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Entries of `X` and `y` uniform in `[-1, 1]`.
pub fn random_linf(n: usize, d: usize, seed: u64) -> SampleSet {
    let mut r = rng(seed);
    let x = Array2::from_shape_fn((n, d), |_| r.gen_range(-1.0..=1.0));
    let y = Array1::from_shape_fn(n, |_| r.gen_range(-1.0..=1.0));
    SampleSet::new(x, y, NormRegime::LInf).unwrap()
}

/// `(G, b, c)` with `L(theta) = theta' G theta - 2 b' theta + c`, built with
/// plain loops.
pub fn normal_form(s: &SampleSet) -> (Vec<Vec<f64>>, Vec<f64>, f64) {
    let (n, d) = (s.n(), s.d());
    let x = s.x();
    let y = s.y();
    let mut g = vec![vec![0.0; d]; d];
    let mut b = vec![0.0; d];
    let mut c = 0.0;
    for i in 0..n {
        for j in 0..d {
            b[j] += x[[i, j]] * y[i] / n as f64;
            for k in 0..d {
                g[j][k] += x[[i, j]] * x[[i, k]] / n as f64;
            }
        }
        c += y[i] * y[i] / n as f64;
    }
    (g, b, c)
}

pub fn quad_loss(g: &[Vec<f64>], b: &[f64], c: f64, theta: &[f64]) -> f64 {
    let d = theta.len();
    let mut total = c;
    for j in 0..d {
        total -= 2.0 * b[j] * theta[j];
        for k in 0..d {
            total += theta[j] * g[j][k] * theta[k];
        }
    }
    total
}

/// Euclidean projection onto the unit l1 ball.
pub fn project_l1(v: &[f64]) -> Vec<f64> {
    if v.iter().map(|x| x.abs()).sum::<f64>() <= 1.0 {
        return v.to_vec();
    }
    let mut u: Vec<f64> = v.iter().map(|x| x.abs()).collect();
    u.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cum = 0.0;
    let mut shift = 0.0;
    for (k, &uk) in u.iter().enumerate() {
        cum += uk;
        let t = (cum - 1.0) / (k as f64 + 1.0);
        if uk - t > 0.0 {
            shift = t;
        }
    }
    v.iter().map(|x| x.signum() * (x.abs() - shift).max(0.0)).collect()
}

fn matvec(g: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    g.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

/// Accelerated projected gradient over the l1 ball.
pub fn fista_minimum(g: &[Vec<f64>], b: &[f64], c: f64, iters: usize) -> f64 {
    let d = b.len();
    let lip = 2.0 * (0..d).map(|j| g[j][j]).sum::<f64>().max(1e-12);
    let mut x = vec![0.0; d];
    let mut z = x.clone();
    let mut t = 1.0f64;
    let mut best = quad_loss(g, b, c, &x);
    for _ in 0..iters {
        let gz = matvec(g, &z);
        let step: Vec<f64> = (0..d).map(|j| z[j] - 2.0 * (gz[j] - b[j]) / lip).collect();
        let next = project_l1(&step);
        let t_next = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        z = (0..d).map(|j| next[j] + (t - 1.0) / t_next * (next[j] - x[j])).collect();
        x = next;
        t = t_next;
        best = best.min(quad_loss(g, b, c, &x));
    }
    best
}

/// Dense-vector Frank-Wolfe with exact linear minimization.
pub fn dense_fw_minimum(g: &[Vec<f64>], b: &[f64], c: f64, iters: usize) -> f64 {
    let d = b.len();
    let mut theta = vec![0.0; d];
    let mut h = vec![0.0; d];
    let mut best = c;
    for t in 0..iters {
        let tau = 2.0 / (t as f64 + 2.0);
        let mut j = 0;
        let mut gj = 2.0 * (h[0] - b[0]);
        for k in 1..d {
            let gk = 2.0 * (h[k] - b[k]);
            if gk.abs() > gj.abs() {
                j = k;
                gj = gk;
            }
        }
        let sign = if gj > 0.0 { -1.0 } else { 1.0 };
        for k in 0..d {
            theta[k] *= 1.0 - tau;
            h[k] = (1.0 - tau) * h[k] + tau * sign * g[k][j];
        }
        theta[j] += tau * sign;
        let loss: f64 = c + theta.iter().zip(&h).zip(b).map(|((th, hk), bk)| th * (hk - 2.0 * bk)).sum::<f64>();
        best = best.min(loss);
    }
    best
}

/// Best of the two reference minimizers.
pub fn l1_minimum(s: &SampleSet, fw_iters: usize) -> f64 {
    let (g, b, c) = normal_form(s);
    fista_minimum(&g, &b, c, 20_000).min(dense_fw_minimum(&g, &b, c, fw_iters))
}
