//! Squared loss on a sample set, its gradient and curvature constant over the
//! l1 ball, and closed forms for the planted population losses.

use ndarray::{Array1, Array2};
use serde::Serialize;

use crate::dataset::{NormRegime, SampleSet};
use crate::error::{ensure, Error, Result};
use crate::kp_tree::KpTree;

/// Anything that can present a coefficient vector by its nonzero entries.
pub trait Coefficients {
    fn dim(&self) -> usize;
    /// `(j, theta_j)` for the nonzero entries, in increasing `j`.
    fn nonzeros(&self) -> Vec<(usize, f64)>;
}

impl Coefficients for [f64] {
    fn dim(&self) -> usize {
        self.len()
    }

    fn nonzeros(&self) -> Vec<(usize, f64)> {
        self.iter()
            .enumerate()
            .filter(|(_, &v)| v != 0.0)
            .map(|(j, &v)| (j, v))
            .collect()
    }
}

impl Coefficients for Vec<f64> {
    fn dim(&self) -> usize {
        self.len()
    }

    fn nonzeros(&self) -> Vec<(usize, f64)> {
        self.as_slice().nonzeros()
    }
}

impl Coefficients for KpTree {
    fn dim(&self) -> usize {
        KpTree::dim(self)
    }

    fn nonzeros(&self) -> Vec<(usize, f64)> {
        self.support()
    }
}

/// Neumaier-compensated sum.
pub(crate) fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut carry = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            carry += (sum - t) + v;
        } else {
            carry += (v - t) + sum;
        }
        sum = t;
    }
    sum + carry
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// `X theta - y`, touching only the columns in the support of `theta`.
fn residual<C: Coefficients + ?Sized>(s: &SampleSet, theta: &C) -> Result<Array1<f64>> {
    check_dim(s.d(), theta.dim())?;
    let mut r = -s.y();
    for (j, v) in theta.nonzeros() {
        r.scaled_add(v, &s.x().column(j));
    }
    Ok(r)
}

/// `(1/N) ||X theta - y||^2`.
pub fn empirical_loss<C: Coefficients + ?Sized>(s: &SampleSet, theta: &C) -> Result<f64> {
    let r = residual(s, theta)?;
    Ok(compensated_sum(r.iter().map(|v| v * v)) / s.n() as f64)
}

/// `(2/N) X^T (X theta - y)`.
pub fn empirical_gradient<C: Coefficients + ?Sized>(s: &SampleSet, theta: &C) -> Result<Array1<f64>> {
    let r = residual(s, theta)?;
    Ok(s.x().t().dot(&r) * (2.0 / s.n() as f64))
}

/// One entry of the empirical gradient, `(2/N) <X_{.j}, X theta - y>`.
pub fn empirical_gradient_entry<C: Coefficients + ?Sized>(s: &SampleSet, theta: &C, j: usize) -> Result<f64> {
    if j >= s.d() {
        return Err(Error::IndexOutOfRange { index: j, len: s.d() });
    }
    let r = residual(s, theta)?;
    Ok(2.0 * compensated_sum(s.x().column(j).iter().zip(&r).map(|(a, b)| a * b)) / s.n() as f64)
}

/// The loss as a quadratic form: `L(theta) = theta^T G theta - 2 <b, theta> + c`
/// with `G = X^T X / N`, `b = X^T y / N` and `c = ||y||^2 / N`.
///
/// Building it reads every entry of `X` and `y` once; after that losses and
/// gradients cost `O(d)` given the cached product `G theta`.
#[derive(Debug, Clone)]
pub struct QuadraticModel {
    gram: Array2<f64>,
    xty: Array1<f64>,
    yy: f64,
    n: usize,
}

impl QuadraticModel {
    pub fn new(s: &SampleSet) -> Self {
        let n = s.n() as f64;
        let gram = s.x().t().dot(s.x()) / n;
        let xty = s.x().t().dot(s.y()) / n;
        let yy = compensated_sum(s.y().iter().map(|v| v * v)) / n;
        Self { gram, xty, yy, n: s.n() }
    }

    pub fn d(&self) -> usize {
        self.xty.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gram(&self) -> &Array2<f64> {
        &self.gram
    }

    pub fn xty(&self) -> &Array1<f64> {
        &self.xty
    }

    pub fn yy(&self) -> f64 {
        self.yy
    }

    /// `G theta` for a sparse `theta`.
    pub fn gram_product<C: Coefficients + ?Sized>(&self, theta: &C) -> Result<Array1<f64>> {
        check_dim(self.d(), theta.dim())?;
        let mut h = Array1::zeros(self.d());
        for (j, v) in theta.nonzeros() {
            h.scaled_add(v, &self.gram.column(j));
        }
        Ok(h)
    }

    /// Loss from a sparse `theta` and its cached product `h = G theta`.
    pub fn loss_with(&self, theta: &[(usize, f64)], h: &Array1<f64>) -> f64 {
        let quad = compensated_sum(theta.iter().map(|&(j, v)| v * (h[j] - 2.0 * self.xty[j])));
        (quad + self.yy).max(0.0)
    }

    /// Gradient `2 (h - b)` from the cached product `h = G theta`.
    pub fn gradient_with(&self, h: &Array1<f64>) -> Array1<f64> {
        (h - &self.xty) * 2.0
    }

    pub fn loss<C: Coefficients + ?Sized>(&self, theta: &C) -> Result<f64> {
        let h = self.gram_product(theta)?;
        Ok(self.loss_with(&theta.nonzeros(), &h))
    }

    pub fn gradient<C: Coefficients + ?Sized>(&self, theta: &C) -> Result<Array1<f64>> {
        Ok(self.gradient_with(&self.gram_product(theta)?))
    }

    /// Loss at the vertex-scaled point `scale * e_j`.
    pub fn loss_at_basis(&self, j: usize, scale: f64) -> f64 {
        (scale * scale * self.gram[[j, j]] - 2.0 * scale * self.xty[j] + self.yy).max(0.0)
    }

    /// Curvature constant over the l1 ball,
    /// `2 max_{j,k} (G_jj + G_kk + 2 |G_jk|)`.
    pub fn curvature(&self) -> f64 {
        let d = self.d();
        let mut best = 0.0f64;
        for j in 0..d {
            let gjj = self.gram[[j, j]];
            for k in j..d {
                let c = 2.0 * (gjj + self.gram[[k, k]] + 2.0 * self.gram[[j, k]].abs());
                if c > best {
                    best = c;
                    if best >= 8.0 {
                        return best;
                    }
                }
            }
        }
        best
    }
}

/// Exact curvature constant of the empirical loss over the l1 ball:
/// `max (2/N) ||X (s - x)||^2` over pairs of signed basis vertices.
pub fn curvature_exact(s: &SampleSet) -> Result<f64> {
    ensure(s.regime() == NormRegime::LInf, "regime", || {
        format!("curvature over the l1 ball needs linf samples, got {}", s.regime())
    })?;
    Ok(QuadraticModel::new(s).curvature())
}

/// Population minimizer of a planted distribution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlantedMinimizer {
    pub theta_star: Vec<f64>,
    /// Common magnitude of the planted coordinates.
    pub v: f64,
    pub regime: NormRegime,
}

fn check_lasso_p(p: f64) -> Result<()> {
    ensure(p > 0.0 && p < 0.5, "p", || format!("{p} not in (0, 1/2)"))
}

fn check_ridge_p(p: f64) -> Result<()> {
    ensure(p > 0.0 && p < 0.25, "p", || format!("{p} not in (0, 1/4)"))
}

fn planted_mask(d: usize, w_set: &[usize]) -> Result<Vec<bool>> {
    let mut mask = vec![false; d];
    for &j in w_set {
        if j >= d {
            return Err(Error::IndexOutOfRange { index: j, len: d });
        }
        mask[j] = true;
    }
    Ok(mask)
}

/// Expected squared loss under the Lasso planted distribution.
pub fn population_loss_lasso(theta: &[f64], p: f64, w_set: &[usize]) -> Result<f64> {
    check_lasso_p(p)?;
    let mask = planted_mask(theta.len(), w_set)?;
    let w = w_set.len() as f64;
    let outside = compensated_sum(theta.iter().zip(&mask).filter(|(_, &m)| !m).map(|(t, _)| t * t));
    let inside = compensated_sum(w_set.iter().map(|&j| (theta[j] - 2.0 * p).powi(2)));
    let sum_w = compensated_sum(w_set.iter().map(|&j| theta[j]));
    let sq_w = compensated_sum(w_set.iter().map(|&j| theta[j] * theta[j]));
    let cross = sum_w * sum_w - sq_w;
    let q = 4.0 * p * p;
    Ok(compensated_sum([outside, inside, q * cross, -q * w, 1.0]))
}

pub fn population_gradient_lasso(theta: &[f64], p: f64, w_set: &[usize]) -> Result<Vec<f64>> {
    check_lasso_p(p)?;
    let mask = planted_mask(theta.len(), w_set)?;
    let sum_w = compensated_sum(w_set.iter().map(|&j| theta[j]));
    Ok(theta
        .iter()
        .zip(&mask)
        .map(|(&t, &m)| {
            if m {
                2.0 * t - 4.0 * p + 8.0 * p * p * (sum_w - t)
            } else {
                2.0 * t
            }
        })
        .collect())
}

/// `theta* = v e_W` with `v = 2p / (1 + 4p^2 (w - 1))`.
pub fn lasso_population_minimizer(d: usize, p: f64, w_set: &[usize]) -> Result<PlantedMinimizer> {
    check_lasso_p(p)?;
    let mask = planted_mask(d, w_set)?;
    let w = w_set.len() as f64;
    let v = 2.0 * p / (1.0 + 4.0 * p * p * (w - 1.0));
    Ok(PlantedMinimizer {
        theta_star: mask.iter().map(|&m| if m { v } else { 0.0 }).collect(),
        v,
        regime: NormRegime::LInf,
    })
}

/// `+-1/sqrt(d)`, positive exactly on `W`.
pub fn ridge_population_minimizer(d: usize, w_set: &[usize]) -> Result<PlantedMinimizer> {
    ensure(d >= 1, "d", || "must be at least 1".into())?;
    let mask = planted_mask(d, w_set)?;
    let v = 1.0 / (d as f64).sqrt();
    Ok(PlantedMinimizer {
        theta_star: mask.iter().map(|&m| if m { v } else { -v }).collect(),
        v,
        regime: NormRegime::L2,
    })
}

/// Expected squared loss under the Ridge planted distribution,
/// `||theta||^2 (1 - 4p^2) / d + (2p <theta, theta*> - 1)^2`.
pub fn population_loss_ridge(theta: &[f64], p: f64, w_set: &[usize]) -> Result<f64> {
    check_ridge_p(p)?;
    let d = theta.len();
    let star = ridge_population_minimizer(d, w_set)?.theta_star;
    let norm2 = compensated_sum(theta.iter().map(|t| t * t));
    let inner = compensated_sum(theta.iter().zip(&star).map(|(a, b)| a * b));
    Ok(norm2 * (1.0 - 4.0 * p * p) / d as f64 + (2.0 * p * inner - 1.0).powi(2))
}

pub fn population_gradient_ridge(theta: &[f64], p: f64, w_set: &[usize]) -> Result<Vec<f64>> {
    check_ridge_p(p)?;
    let d = theta.len();
    let star = ridge_population_minimizer(d, w_set)?.theta_star;
    let inner = compensated_sum(theta.iter().zip(&star).map(|(a, b)| a * b));
    let pull = 4.0 * p * (2.0 * p * inner - 1.0);
    let diag = 2.0 * (1.0 - 4.0 * p * p) / d as f64;
    Ok(theta.iter().zip(&star).map(|(t, s)| diag * t + pull * s).collect())
}

/// `#{j : theta_j * theta*_j <= 0}`.
pub fn sign_mismatches(theta: &[f64], theta_star: &[f64]) -> usize {
    theta.iter().zip(theta_star).filter(|(a, b)| *a * *b <= 0.0).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::gen_lasso_hidden;
    use crate::rng;
    use proptest::prelude::*;
    use rand::Rng as _;

    fn random_set(n: usize, d: usize, seed: u64) -> SampleSet {
        let mut r = rng::from_seed(seed);
        let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| r.gen_range(-1.0..=1.0)).collect()).collect();
        let y: Vec<f64> = (0..n).map(|_| r.gen_range(-1.0..=1.0)).collect();
        SampleSet::from_rows(&rows, &y, NormRegime::LInf).unwrap()
    }

    fn naive_loss(s: &SampleSet, theta: &[f64]) -> f64 {
        let mut total = 0.0;
        for i in 0..s.n() {
            let mut dot = 0.0;
            for j in 0..s.d() {
                dot += s.x()[[i, j]] * theta[j];
            }
            total += (dot - s.y()[i]).powi(2);
        }
        total / s.n() as f64
    }

    /// Brute force over all pairs of signed basis vertices.
    fn vertex_pair_curvature(s: &SampleSet) -> f64 {
        let d = s.d();
        let mut best = 0.0f64;
        for a in 0..2 * d {
            for b in 0..2 * d {
                let mut diff = vec![0.0; d];
                diff[a / 2] += if a % 2 == 0 { 1.0 } else { -1.0 };
                diff[b / 2] -= if b % 2 == 0 { 1.0 } else { -1.0 };
                let mut total = 0.0;
                for i in 0..s.n() {
                    let v: f64 = (0..d).map(|j| s.x()[[i, j]] * diff[j]).sum();
                    total += v * v;
                }
                best = best.max(2.0 * total / s.n() as f64);
            }
        }
        best
    }

    #[test]
    fn loss_examples() {
        let s = SampleSet::from_rows(&[vec![1.0], vec![-1.0]], &[1.0, 1.0], NormRegime::LInf).unwrap();
        assert_eq!(empirical_loss(&s, &vec![1.0]).unwrap(), 2.0);
        assert_eq!(empirical_loss(&s, &vec![0.0]).unwrap(), 1.0);
        assert_eq!(empirical_gradient(&s, &vec![0.0]).unwrap()[0], 0.0);
        assert!(empirical_loss(&s, &vec![0.0, 1.0]).is_err());
        assert!(empirical_gradient_entry(&s, &vec![0.0], 1).is_err());
    }

    #[test]
    fn gradient_at_zero_is_correlation() {
        let s = random_set(30, 5, 2);
        let g = empirical_gradient(&s, &vec![0.0; 5]).unwrap();
        for j in 0..5 {
            let want: f64 = -(2.0 / 30.0) * (0..30).map(|i| s.x()[[i, j]] * s.y()[i]).sum::<f64>();
            assert!((g[j] - want).abs() < 1e-14);
        }
    }

    #[test]
    fn tree_and_dense_agree() {
        let s = random_set(40, 8, 3);
        let theta = vec![0.1, 0.0, -0.3, 0.0, 0.0, 0.2, 0.0, 0.05];
        let tree = KpTree::from_dense(&theta).unwrap();
        let a = empirical_loss(&s, &theta).unwrap();
        let b = empirical_loss(&s, &tree).unwrap();
        assert!((a - b).abs() < 1e-14);
        let model = QuadraticModel::new(&s);
        assert!((model.loss(&theta).unwrap() - a).abs() < 1e-12);
        let g = empirical_gradient(&s, &tree).unwrap();
        let gm = model.gradient(&theta).unwrap();
        for j in 0..8 {
            assert!((g[j] - gm[j]).abs() < 1e-12);
            assert!((empirical_gradient_entry(&s, &theta, j).unwrap() - g[j]).abs() < 1e-14);
        }
        assert!((model.loss_at_basis(2, -1.0 / 3.0) - empirical_loss(&s, &vec![0., 0., -1. / 3., 0., 0., 0., 0., 0.]).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn curvature_examples() {
        let ones = SampleSet::new(Array2::ones((7, 3)), Array1::ones(7), NormRegime::LInf).unwrap();
        assert!((curvature_exact(&ones).unwrap() - 8.0).abs() < 1e-12);
        let zero = SampleSet::new(Array2::zeros((4, 3)), Array1::ones(4), NormRegime::LInf).unwrap();
        assert_eq!(curvature_exact(&zero).unwrap(), 0.0);
        let l2 = SampleSet::new(Array2::zeros((4, 3)), Array1::ones(4), NormRegime::L2).unwrap();
        assert!(curvature_exact(&l2).is_err());
        for seed in 0..5 {
            let s = random_set(20, 6, seed);
            let c = curvature_exact(&s).unwrap();
            assert!((c - vertex_pair_curvature(&s)).abs() < 1e-12);
            assert!(c <= 8.0);
        }
    }

    #[test]
    fn lasso_population_examples() {
        let w = [3, 7];
        let m = lasso_population_minimizer(10, 0.25, &w).unwrap();
        assert!((m.v - 0.4).abs() < 1e-15);
        assert!((population_loss_lasso(&m.theta_star, 0.25, &w).unwrap() - 0.6).abs() < 1e-12);
        assert!((population_loss_lasso(&[0.0; 10], 0.25, &w).unwrap() - 1.0).abs() < 1e-15);
        for g in population_gradient_lasso(&m.theta_star, 0.25, &w).unwrap() {
            assert!(g.abs() < 1e-12);
        }
        let single = lasso_population_minimizer(5, 0.1, &[2]).unwrap();
        assert!((single.v - 0.2).abs() < 1e-15);
        let theta = [0.3, -0.2, 0.0, 0.1, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        let g = population_gradient_lasso(&theta, 0.25, &w).unwrap();
        assert_eq!(g[0], 0.6);
        assert_eq!(g[1], -0.4);
        assert!(population_loss_lasso(&theta, 0.5, &w).is_err());
        assert!(population_loss_lasso(&theta, 0.1, &[10]).is_err());
    }

    #[test]
    fn lasso_minimizer_is_feasible_on_the_grid() {
        for k in [3usize, 5, 10, 20, 50, 99] {
            let p = 1.0 / (2.0 * k as f64);
            let d = 4 * k;
            let w: Vec<usize> = (0..k).collect();
            let m = lasso_population_minimizer(d, p, &w).unwrap();
            assert!(m.v * k as f64 <= 1.0);
        }
    }

    #[test]
    fn ridge_population_examples() {
        let m = ridge_population_minimizer(4, &[0, 1]).unwrap();
        assert_eq!(m.theta_star, vec![0.5, 0.5, -0.5, -0.5]);
        let norm: f64 = m.theta_star.iter().map(|v| v * v).sum();
        assert!((norm - 1.0).abs() < 1e-15);
        let p = 0.1;
        assert!((population_loss_ridge(&[0.0; 4], p, &[0, 1]).unwrap() - 1.0).abs() < 1e-15);
        let at_star = population_loss_ridge(&m.theta_star, p, &[0, 1]).unwrap();
        assert!((at_star - ((1.0 - 4.0 * p * p) / 4.0 + (2.0 * p - 1.0).powi(2))).abs() < 1e-15);
        assert!(population_loss_ridge(&[0.0; 4], 0.3, &[0]).is_err());
    }

    /// Projected gradient descent from random starts never beats theta*.
    #[test]
    fn ridge_minimizer_beats_local_search() {
        let d = 16;
        let w: Vec<usize> = (0..5).collect();
        let p = 0.1;
        let star = ridge_population_minimizer(d, &w).unwrap().theta_star;
        let best = population_loss_ridge(&star, p, &w).unwrap();
        let mut r = rng::from_seed(11);
        for _ in 0..100 {
            let mut theta: Vec<f64> = (0..d).map(|_| r.gen_range(-1.0..1.0)).collect();
            for _ in 0..2000 {
                let g = population_gradient_ridge(&theta, p, &w).unwrap();
                for (t, gj) in theta.iter_mut().zip(&g) {
                    *t -= 0.5 * gj;
                }
                let n = theta.iter().map(|t| t * t).sum::<f64>().sqrt();
                if n > 1.0 {
                    theta.iter_mut().for_each(|t| *t /= n);
                }
            }
            assert!(population_loss_ridge(&theta, p, &w).unwrap() >= best - 1e-9);
        }
    }

    #[test]
    fn monte_carlo_lasso_small() {
        let w = [0usize, 2];
        let p = 0.2;
        let theta = [0.3, -0.1, 0.25, 0.05];
        let (s, _) = crate::dataset::gen_lasso_hidden_with(4, &w, p, 200_000, 5).unwrap();
        let r = residual(&s, &theta[..]).unwrap();
        let sq: Vec<f64> = r.iter().map(|v| v * v).collect();
        let mean = sq.iter().sum::<f64>() / sq.len() as f64;
        let var = sq.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (sq.len() - 1) as f64;
        let se = (var / sq.len() as f64).sqrt();
        let exact = population_loss_lasso(&theta, p, &w).unwrap();
        assert!((mean - exact).abs() <= 4.0 * se, "{mean} vs {exact} (se {se})");
    }

    #[test]
    fn sign_mismatch_count() {
        assert_eq!(sign_mismatches(&[1.0, -1.0, 0.0], &[1.0, 1.0, 1.0]), 2);
    }

    #[test]
    fn planted_sample_loss_near_population() {
        let (s, inst) = gen_lasso_hidden(32, 4, 0.1, 20_000, 9).unwrap();
        let star = lasso_population_minimizer(32, 0.1, &inst.planted).unwrap().theta_star;
        let emp = empirical_loss(&s, &star).unwrap();
        let pop = population_loss_lasso(&star, 0.1, &inst.planted).unwrap();
        assert!((emp - pop).abs() < 0.02);
    }

    proptest! {
        #[test]
        fn loss_matches_naive_loop(seed in 0u64..1000, n in 1usize..12, d in 1usize..8) {
            let s = random_set(n, d, seed);
            let mut r = rng::from_seed(seed ^ 0xabc);
            let theta: Vec<f64> = (0..d).map(|_| r.gen_range(-1.0..=1.0)).collect();
            let got = empirical_loss(&s, &theta).unwrap();
            prop_assert!(got >= 0.0);
            prop_assert!((got - naive_loss(&s, &theta)).abs() < 1e-12);
        }

        #[test]
        fn gradient_matches_finite_differences(seed in 0u64..1000, n in 1usize..12, d in 1usize..8) {
            let s = random_set(n, d, seed);
            let mut r = rng::from_seed(seed ^ 0xdef);
            let theta: Vec<f64> = (0..d).map(|_| r.gen_range(-1.0..=1.0)).collect();
            let g = empirical_gradient(&s, &theta).unwrap();
            let h = 1e-6;
            for j in 0..d {
                let mut up = theta.clone();
                let mut down = theta.clone();
                up[j] += h;
                down[j] -= h;
                let fd = (empirical_loss(&s, &up).unwrap() - empirical_loss(&s, &down).unwrap()) / (2.0 * h);
                prop_assert!((fd - g[j]).abs() < 1e-5);
            }
        }

        #[test]
        fn population_lasso_is_strongly_convex(seed in 0u64..1000, p in 0.01f64..0.49) {
            let d = 12;
            let w = [1usize, 4, 5, 9];
            let mut r = rng::from_seed(seed);
            let a: Vec<f64> = (0..d).map(|_| r.gen_range(-1.0..=1.0)).collect();
            let b: Vec<f64> = (0..d).map(|_| r.gen_range(-1.0..=1.0)).collect();
            let la = population_loss_lasso(&a, p, &w).unwrap();
            let lb = population_loss_lasso(&b, p, &w).unwrap();
            let g = population_gradient_lasso(&a, p, &w).unwrap();
            let lin: f64 = g.iter().zip(a.iter().zip(&b)).map(|(gj, (x, y))| gj * (y - x)).sum();
            let dist: f64 = a.iter().zip(&b).map(|(x, y)| (y - x).powi(2)).sum();
            prop_assert!(lb >= la + lin + (1.0 - 4.0 * p * p) * dist - 1e-12);
        }

        #[test]
        fn population_gradients_match_finite_differences(seed in 0u64..1000) {
            let d = 10;
            let w = [0usize, 3, 6];
            let mut r = rng::from_seed(seed);
            let theta: Vec<f64> = (0..d).map(|_| r.gen_range(-1.0..=1.0)).collect();
            let gl = population_gradient_lasso(&theta, 0.2, &w).unwrap();
            let gr = population_gradient_ridge(&theta, 0.2, &w).unwrap();
            let h = 1e-6;
            for j in 0..d {
                let mut up = theta.clone();
                let mut down = theta.clone();
                up[j] += h;
                down[j] -= h;
                let fl = (population_loss_lasso(&up, 0.2, &w).unwrap() - population_loss_lasso(&down, 0.2, &w).unwrap()) / (2.0 * h);
                let fr = (population_loss_ridge(&up, 0.2, &w).unwrap() - population_loss_ridge(&down, 0.2, &w).unwrap()) / (2.0 * h);
                prop_assert!((fl - gl[j]).abs() < 1e-5);
                prop_assert!((fr - gr[j]).abs() < 1e-5);
            }
        }

        #[test]
        fn curvature_never_exceeds_eight(seed in 0u64..1000, n in 1usize..20, d in 1usize..10) {
            let mut r = rng::from_seed(seed);
            let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| if r.gen_bool(0.5) { 1.0 } else { -1.0 }).collect()).collect();
            let s = SampleSet::from_rows(&rows, &vec![1.0; n], NormRegime::LInf).unwrap();
            prop_assert!(curvature_exact(&s).unwrap() <= 8.0);
        }

        #[test]
        fn near_ridge_optimum_has_few_sign_mismatches(seed in 0u64..200) {
            let d = 1000;
            let star = ridge_population_minimizer(d, &(0..300).collect::<Vec<_>>()).unwrap().theta_star;
            let mut r = rng::from_seed(seed);
            // theta = c theta* + s u with u a unit vector orthogonal to theta*
            let mut u: Vec<f64> = (0..d).map(|_| r.gen_range(-1.0..=1.0)).collect();
            let proj: f64 = u.iter().zip(&star).map(|(a, b)| a * b).sum();
            u.iter_mut().zip(&star).for_each(|(a, b)| *a -= proj * b);
            let un = u.iter().map(|a| a * a).sum::<f64>().sqrt();
            let c = r.gen_range(0.999..=1.0f64);
            let sn = (1.0 - c * c).sqrt();
            let theta: Vec<f64> = star.iter().zip(&u).map(|(a, b)| c * a + sn * b / un).collect();
            prop_assert!(sign_mismatches(&theta, &star) <= d / 500);
        }
    }
}
