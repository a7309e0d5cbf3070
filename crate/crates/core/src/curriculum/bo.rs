//! Gaussian-process surrogate with expected-improvement acquisition.
//!
//! The search space is the environment box normalized to the unit cube
//! (log-scale dims in log space, degenerate dims dropped). Observations are
//! standardized; the kernel is an isotropic Matérn 5/2 whose lengthscale
//! and extra noise floor are fit by coarse marginal-likelihood
//! maximization. Per-point observation noise comes from the gap estimate's
//! sampling variance. Acquisition is maximized over a random candidate set
//! plus perturbations of the incumbent.

use crate::space::{EnvConfig, EnvSpace};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

const LENGTHSCALE_GRID: [f64; 8] = [0.05, 0.1, 0.2, 0.35, 0.5, 0.8, 1.2, 2.0];
const NOISE_GRID: [f64; 4] = [1e-6, 1e-4, 1e-3, 1e-2];
const EI_XI: f64 = 0.05;
const N_CANDIDATES: usize = 8192;
const N_INCUMBENT_PERTURBATIONS: usize = 512;

/// Map configs into the unit cube over non-degenerate dims.
#[derive(Debug, Clone)]
pub struct CubeMap<'a> {
    space: &'a EnvSpace,
    active: Vec<usize>,
}

impl<'a> CubeMap<'a> {
    pub fn new(space: &'a EnvSpace) -> Self {
        let active = space
            .params
            .iter()
            .enumerate()
            .filter(|(_, p)| !p.is_degenerate())
            .map(|(i, _)| i)
            .collect();
        CubeMap { space, active }
    }

    pub fn dim(&self) -> usize {
        self.active.len()
    }

    pub fn to_cube(&self, cfg: &EnvConfig) -> Vec<f64> {
        self.active
            .iter()
            .map(|&i| self.space.params[i].normalize(cfg.values[i]))
            .collect()
    }

    pub fn to_config(&self, u: &[f64]) -> EnvConfig {
        let mut values: Vec<f64> = self.space.params.iter().map(|p| p.lo).collect();
        for (k, &i) in self.active.iter().enumerate() {
            values[i] = self.space.params[i].denormalize(u[k]);
        }
        EnvConfig {
            use_case: self.space.use_case,
            values,
        }
    }

    /// Low-discrepancy points (Kronecker/R2 sequence) with a random offset.
    pub fn quasi_random(&self, n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
        let d = self.dim().max(1);
        // Generalized golden-ratio increments per dimension.
        let phi = {
            let mut x: f64 = 2.0;
            for _ in 0..24 {
                x = (1.0 + x).powf(1.0 / (d as f64 + 1.0));
            }
            x
        };
        let alphas: Vec<f64> = (1..=d).map(|k| (1.0 / phi.powi(k as i32)) % 1.0).collect();
        let offset: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
        (0..n)
            .map(|i| {
                (0..self.dim())
                    .map(|k| (offset[k] + alphas[k] * (i as f64 + 1.0)) % 1.0)
                    .collect()
            })
            .collect()
    }
}

fn matern52(r: f64, lengthscale: f64) -> f64 {
    let s = 5.0_f64.sqrt() * r / lengthscale;
    (1.0 + s + s * s / 3.0) * (-s).exp()
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// In-place Cholesky; returns false when the matrix is not positive
/// definite even after jitter.
fn cholesky(a: &mut [Vec<f64>]) -> bool {
    let n = a.len();
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[i][j];
            for k in 0..j {
                sum -= a[i][k] * a[j][k];
            }
            if i == j {
                if sum <= 0.0 {
                    return false;
                }
                a[i][i] = sum.sqrt();
            } else {
                a[i][j] = sum / a[j][j];
            }
        }
        for j in (i + 1)..n {
            a[i][j] = 0.0;
        }
    }
    true
}

fn chol_solve(l: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = l.len();
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut sum = b[i];
        for k in 0..i {
            sum -= l[i][k] * y[k];
        }
        y[i] = sum / l[i][i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut sum = y[i];
        for k in (i + 1)..n {
            sum -= l[k][i] * x[k];
        }
        x[i] = sum / l[i][i];
    }
    x
}

/// Fitted Gaussian process over unit-cube points.
#[derive(Debug, Clone)]
pub struct Gp {
    points: Vec<Vec<f64>>,
    alpha: Vec<f64>,
    chol: Vec<Vec<f64>>,
    lengthscale: f64,
    y_mean: f64,
    y_std: f64,
}

impl Gp {
    /// Fit on observations with per-point noise variance (same units as y).
    pub fn fit(points: Vec<Vec<f64>>, y: &[f64], noise_var: &[f64]) -> Gp {
        let n = y.len();
        assert!(n > 0 && points.len() == n && noise_var.len() == n);
        let y = y.to_vec();
        let noise_var = noise_var.to_vec();
        let y_mean = y.iter().sum::<f64>() / n as f64;
        let var = y.iter().map(|v| (v - y_mean) * (v - y_mean)).sum::<f64>() / n as f64;
        // Floor the scale by the noise level so near-constant observations
        // do not blow up the scaled noise.
        let mean_noise = noise_var.iter().sum::<f64>() / n as f64;
        let y_std = var.sqrt().max(mean_noise.sqrt()).max(1e-8);
        let ys: Vec<f64> = y.iter().map(|v| (v - y_mean) / y_std).collect();
        let ns: Vec<f64> = noise_var.iter().map(|v| v / (y_std * y_std)).collect();

        let mut best: Option<(f64, f64, f64)> = None; // (log-lik, lengthscale, extra noise)
        for &ell in &LENGTHSCALE_GRID {
            for &extra in &NOISE_GRID {
                if let Some(ll) = log_marginal(&points, &ys, &ns, ell, extra) {
                    if best.map(|(b, _, _)| ll > b).unwrap_or(true) {
                        best = Some((ll, ell, extra));
                    }
                }
            }
        }
        let (_, lengthscale, extra) = best.unwrap_or((0.0, 0.5, 1e-2));

        let mut k = kernel_matrix(&points, &ns, lengthscale, extra);
        if !cholesky(&mut k) {
            // Ridge fallback.
            let mut k2 = kernel_matrix(&points, &ns, lengthscale, extra + 1e-4);
            assert!(cholesky(&mut k2), "kernel matrix not PD even with ridge");
            k = k2;
        }
        let alpha = chol_solve(&k, &ys);
        Gp {
            points,
            alpha,
            chol: k,
            lengthscale,
            y_mean,
            y_std,
        }
    }

    pub fn lengthscale(&self) -> f64 {
        self.lengthscale
    }

    /// Posterior mean and standard deviation at `x` (original y units).
    pub fn predict(&self, x: &[f64]) -> (f64, f64) {
        let kx: Vec<f64> = self
            .points
            .iter()
            .map(|p| matern52(sq_dist(p, x).sqrt(), self.lengthscale))
            .collect();
        let mean_s: f64 = kx.iter().zip(&self.alpha).map(|(a, b)| a * b).sum();
        // v = L^{-1} k_x.
        let n = self.points.len();
        let mut v = vec![0.0; n];
        for i in 0..n {
            let mut sum = kx[i];
            for k in 0..i {
                sum -= self.chol[i][k] * v[k];
            }
            v[i] = sum / self.chol[i][i];
        }
        let var_s = (1.0 - v.iter().map(|a| a * a).sum::<f64>()).max(1e-12);
        (
            self.y_mean + self.y_std * mean_s,
            self.y_std * var_s.sqrt(),
        )
    }

    /// Expected improvement over `best_y` for maximization.
    pub fn expected_improvement(&self, x: &[f64], best_y: f64) -> f64 {
        let (mean, std) = self.predict(x);
        if std < 1e-12 {
            return 0.0;
        }
        let xi = EI_XI * self.y_std;
        let z = (mean - best_y - xi) / std;
        std * (z * normal_cdf(z) + normal_pdf(z))
    }

    /// Argmax of EI over random candidates plus incumbent perturbations.
    pub fn suggest(
        &self,
        dim: usize,
        best_point: &[f64],
        best_y: f64,
        rng: &mut ChaCha8Rng,
    ) -> Vec<f64> {
        let mut best_ei = f64::NEG_INFINITY;
        let mut best_x = best_point.to_vec();
        let mut consider = |x: Vec<f64>, gp: &Gp| {
            let ei = gp.expected_improvement(&x, best_y);
            if ei > best_ei {
                best_ei = ei;
                best_x = x;
            }
        };
        for _ in 0..N_CANDIDATES {
            let x: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
            consider(x, self);
        }
        for _ in 0..N_INCUMBENT_PERTURBATIONS {
            let x: Vec<f64> = best_point
                .iter()
                .map(|&v| (v + rng.random_range(-0.1..0.1)).clamp(0.0, 1.0))
                .collect();
            consider(x, self);
        }
        best_x
    }
}

fn kernel_matrix(
    points: &[Vec<f64>],
    noise: &[f64],
    lengthscale: f64,
    extra_noise: f64,
) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut k = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let v = matern52(sq_dist(&points[i], &points[j]).sqrt(), lengthscale);
            k[i][j] = v;
            k[j][i] = v;
        }
        k[i][i] += noise[i] + extra_noise + 1e-9;
    }
    k
}

fn log_marginal(
    points: &[Vec<f64>],
    ys: &[f64],
    noise: &[f64],
    lengthscale: f64,
    extra_noise: f64,
) -> Option<f64> {
    let n = ys.len();
    let mut k = kernel_matrix(points, noise, lengthscale, extra_noise);
    if !cholesky(&mut k) {
        return None;
    }
    let alpha = chol_solve(&k, ys);
    let fit: f64 = ys.iter().zip(&alpha).map(|(a, b)| a * b).sum();
    let logdet: f64 = (0..n).map(|i| k[i][i].ln()).sum::<f64>() * 2.0;
    Some(-0.5 * fit - 0.5 * logdet - 0.5 * n as f64 * (2.0 * std::f64::consts::PI).ln())
}

fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Abramowitz-Stegun 7.1.26 approximation (|error| < 1.5e-7).
fn normal_cdf(z: f64) -> f64 {
    let x = z / std::f64::consts::SQRT_2;
    let sign = if x < 0.0 { -1.0 } else { 1.0 };
    let x = x.abs();
    let t = 1.0 / (1.0 + 0.3275911 * x);
    let poly = t
        * (0.254829592 + t * (-0.284496736 + t * (1.421413741 + t * (-1.453152027 + t * 1.061405429))));
    let erf = sign * (1.0 - poly * (-x * x).exp());
    0.5 * (1.0 + erf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::child_rng;

    #[test]
    fn posterior_interpolates_observations() {
        let points = vec![vec![0.1], vec![0.4], vec![0.9]];
        let y = vec![1.0, 3.0, -2.0];
        let noise = vec![1e-6; 3];
        let gp = Gp::fit(points.clone(), &y, &noise);
        for (p, want) in points.iter().zip(&y) {
            let (mean, _) = gp.predict(p);
            assert!(
                (mean - want).abs() < 0.05,
                "posterior {mean} vs observed {want}"
            );
        }
    }

    #[test]
    fn predictive_uncertainty_grows_away_from_data() {
        let gp = Gp::fit(vec![vec![0.5]], &[1.0], &[1e-6]);
        let (_, s_near) = gp.predict(&[0.5]);
        let (_, s_far) = gp.predict(&[0.0]);
        assert!(s_far > s_near);
    }

    #[test]
    fn ei_prefers_unexplored_high_mean_regions() {
        // Increasing function sampled on the left: EI should point right.
        let points = vec![vec![0.0], vec![0.2], vec![0.4]];
        let y = vec![0.0, 1.0, 2.0];
        let gp = Gp::fit(points, &y, &[1e-6; 3]);
        let ei_right = gp.expected_improvement(&[0.6], 2.0);
        let ei_left = gp.expected_improvement(&[0.1], 2.0);
        assert!(ei_right > ei_left, "{ei_right} vs {ei_left}");
    }

    #[test]
    fn normal_cdf_sane() {
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-7);
        assert!((normal_cdf(1.959964) - 0.975).abs() < 1e-5);
        assert!(normal_cdf(-8.0) < 1e-12);
    }

    #[test]
    fn quasi_random_points_stay_in_cube_and_spread() {
        use crate::space::{EnvSpace, ParamSpec, Scale, UseCase};
        let space = EnvSpace {
            use_case: UseCase::Abr,
            params: vec![
                ParamSpec::new("a", "", 0.0, 1.0, Scale::Linear).unwrap(),
                ParamSpec::new("b", "", 1.0, 100.0, Scale::Log).unwrap(),
            ],
        };
        let map = CubeMap::new(&space);
        let pts = map.quasi_random(16, &mut child_rng(1, &[]));
        assert_eq!(pts.len(), 16);
        for p in &pts {
            assert!(p.iter().all(|&v| (0.0..1.0).contains(&v)));
        }
        // Distinct points (no collapse).
        let mut xs: Vec<f64> = pts.iter().map(|p| p[0]).collect();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        xs.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
        assert_eq!(xs.len(), 16);
    }
}
