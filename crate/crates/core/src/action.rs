//! The modified Hamiltonian action functional, its gradient, the lambda
//! cutoff, the twisted vector field F_lambda, and the endpoint
//! transversality certificate.

use std::f64::consts::PI;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{CoreError, Result};
use crate::hamiltonian::{LiftedHamiltonian, SMALLNESS_SAFETY};
use crate::loops::{anti_alias_grid, FourierLoop, ProductPoint};

/// Smooth cutoff chi: constant lambda0 below lambda0, the identity on
/// [lambda0 + eps/2, lambda0 + 1 - eps/2], constant lambda0 + 1 above,
/// with chi' > 0 on the open window. Realized on each transition band by
/// the C-infinity blend s(t) = sigma(t) / (sigma(t) + sigma(1-t)),
/// sigma(t) = exp(-1/t), in closed form for both chi and chi'.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ChiCutoff {
    pub lambda0: f64,
    pub eps: f64,
}

fn sigma(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-1.0 / t).exp()
    }
}

fn sigma_prime(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-1.0 / t).exp() / (t * t)
    }
}

/// Blend s and its derivative: s(0) = 0, s(1) = 1, flat to all orders at
/// both ends, strictly increasing in between.
fn blend(t: f64) -> (f64, f64) {
    if t <= 0.0 {
        return (0.0, 0.0);
    }
    if t >= 1.0 {
        return (1.0, 0.0);
    }
    let a = sigma(t);
    let b = sigma(1.0 - t);
    let denom = a + b;
    let s = a / denom;
    let ds = (sigma_prime(t) * b + a * sigma_prime(1.0 - t)) / (denom * denom);
    (s, ds)
}

impl ChiCutoff {
    pub fn new(lambda0: f64, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps < 0.25) {
            return Err(CoreError::BadCutoffWidth(eps));
        }
        Ok(ChiCutoff { lambda0, eps })
    }

    /// The cutoff used by the main pipeline: lambda0 = -1/2.
    pub fn standard(eps: f64) -> Result<Self> {
        Self::new(-0.5, eps)
    }

    /// Returns (chi(lambda), chi'(lambda)).
    pub fn eval(&self, lambda: f64) -> (f64, f64) {
        let l0 = self.lambda0;
        let h = self.eps / 2.0;
        if lambda <= l0 {
            (l0, 0.0)
        } else if lambda < l0 + h {
            // chi = l0 + (lambda - l0) s(u), u = (lambda - l0)/h
            let u = (lambda - l0) / h;
            let (s, ds) = blend(u);
            (l0 + (lambda - l0) * s, s + u * ds)
        } else if lambda <= l0 + 1.0 - h {
            (lambda, 1.0)
        } else if lambda < l0 + 1.0 {
            let v = (l0 + 1.0 - lambda) / h;
            let (s, ds) = blend(v);
            (l0 + 1.0 - (l0 + 1.0 - lambda) * s, s + v * ds)
        } else {
            (l0 + 1.0, 0.0)
        }
    }
}

/// L^2 representative of the twisted Hamiltonian vector field
/// F_lambda(x, y) = (-J x' - grad_x H, -J y' - grad_y H + 2 pi lambda y),
/// with the nonlinearity analyzed on the anti-aliased grid.
pub fn f_lambda(
    h: &LiftedHamiltonian,
    x: &FourierLoop,
    y: &FourierLoop,
    lambda: f64,
) -> (FourierLoop, FourierLoop) {
    assert_eq!(x.max_mode(), y.max_mode());
    let max_mode = x.max_mode();
    let mut u = x.neg_j_dt();
    let mut v = y.neg_j_dt();
    v.axpy(2.0 * PI * lambda, y);
    if !h.is_zero() {
        let (ax, ay) = analyze_gradient(h, x, y);
        u.axpy(-1.0, &ax);
        v.axpy(-1.0, &ay);
        let _ = max_mode;
    }
    (u, v)
}

/// Projects t -> grad H(t, x(t), y(t)) onto the retained modes.
fn analyze_gradient(
    h: &LiftedHamiltonian,
    x: &FourierLoop,
    y: &FourierLoop,
) -> (FourierLoop, FourierLoop) {
    let max_mode = x.max_mode();
    let n = anti_alias_grid(max_mode);
    let dx = x.dim();
    let dy = y.dim();
    let xs = x.sample_grid(n);
    let ys = y.sample_grid(n);
    let mut gxs = vec![0.0; n * dx];
    let mut gys = vec![0.0; n * dy];
    for j in 0..n {
        let t = j as f64 / n as f64;
        h.grad_into(
            t,
            &xs[j * dx..(j + 1) * dx],
            &ys[j * dy..(j + 1) * dy],
            &mut gxs[j * dx..(j + 1) * dx],
            &mut gys[j * dy..(j + 1) * dy],
        );
    }
    (
        FourierLoop::analyze(dx, max_mode, &gxs),
        FourierLoop::analyze(dy, max_mode, &gys),
    )
}

/// Quadrature of int_0^1 H(t, x(t), y(t)) dt on the anti-aliased grid
/// (the trapezoid rule coincides with the uniform average for periodic
/// integrands).
fn hamiltonian_integral(h: &LiftedHamiltonian, x: &FourierLoop, y: &FourierLoop) -> f64 {
    if h.is_zero() {
        return 0.0;
    }
    let n = anti_alias_grid(x.max_mode());
    let dx = x.dim();
    let dy = y.dim();
    let xs = x.sample_grid(n);
    let ys = y.sample_grid(n);
    (0..n)
        .map(|j| {
            h.eval(
                j as f64 / n as f64,
                &xs[j * dx..(j + 1) * dx],
                &ys[j * dy..(j + 1) * dy],
            )
        })
        .sum::<f64>()
        / n as f64
}

/// Signed quadratic part (1/2) sum_k 2 pi k |q_k|^2 of a loop.
fn quadratic_action(l: &FourierLoop) -> f64 {
    l.modes()
        .map(|k| PI * k as f64 * l.coeff(k).iter().map(|v| v * v).sum::<f64>())
        .sum()
}

/// The modified action A_H(x, y, lambda).
pub fn action_value(h: &LiftedHamiltonian, chi: &ChiCutoff, p: &ProductPoint) -> f64 {
    let (cv, _) = chi.eval(p.lambda);
    quadratic_action(&p.x) + quadratic_action(&p.y) - hamiltonian_integral(h, &p.x, &p.y)
        + PI * (cv * p.y.l2_norm_sq() - p.lambda)
}

/// Gradient of the modified action with respect to the product metric.
#[derive(Clone, Debug, Serialize)]
pub struct ActionGradient {
    pub x: FourierLoop,
    pub y: FourierLoop,
    pub lambda: f64,
}

impl ActionGradient {
    pub fn norm(&self) -> f64 {
        (self.x.h_half_norm_sq() + self.y.h_half_norm_sq() + self.lambda * self.lambda).sqrt()
    }
}

/// grad A_H = (j* F_{chi(lambda)}(x, y), pi (chi'(lambda) |y|_2^2 - 1)).
/// This is the exact gradient of the grid-discretized `action_value`, so
/// finite-difference checks hold to machine precision independent of the
/// quadrature error.
pub fn action_gradient(h: &LiftedHamiltonian, chi: &ChiCutoff, p: &ProductPoint) -> ActionGradient {
    let (cv, cd) = chi.eval(p.lambda);
    let (u, v) = f_lambda(h, &p.x, &p.y, cv);
    ActionGradient {
        x: u.apply_jstar(),
        y: v.apply_jstar(),
        lambda: PI * (cd * p.y.l2_norm_sq() - 1.0),
    }
}

/// Outcome of the endpoint transversality check: the lower bound
/// delta = 1/2 - eps - c from the sampled smallness constant, an
/// optional sharper bound from the mean / mean-free splitting of y, and
/// an empirical minimum of |j* pr_2 F_lambda| / |y| over random loops
/// with lambda in the two endpoint bands.
#[derive(Clone, Debug, Serialize)]
pub struct ConditionACertificate {
    pub c: f64,
    pub c_safety: f64,
    pub eps: f64,
    pub delta: f64,
    pub verdict: bool,
    pub empirical_min_ratio: f64,
    pub delta_sharp: f64,
    pub verdict_sharp: bool,
    pub samples: usize,
    pub seed: u64,
}

/// Sharper endpoint bound obtained by splitting y into its mean and
/// mean-free parts: on the unit sphere |y_0|^2 = u, |y_perp|^2 = 1 - u
/// in H^{1/2}, the twist part is bounded below by
/// sqrt((2 pi lambda)^2 u + (1 - lambda)^2 (1 - u)) while the
/// perturbation is at most c sqrt(u + (1 - u)/(2 pi)). Minimized over u
/// and the worst band endpoint lambda = 1/2 - eps.
fn sharp_delta(c: f64, eps: f64) -> f64 {
    let lambda = 0.5 - eps;
    let grid = 10_000;
    let mut best = f64::INFINITY;
    for i in 0..=grid {
        let u = i as f64 / grid as f64;
        let twist = ((2.0 * PI * lambda).powi(2) * u + (1.0 - lambda).powi(2) * (1.0 - u)).sqrt();
        let pert = c * (u + (1.0 - u) / (2.0 * PI)).sqrt();
        best = best.min(twist - pert);
    }
    best
}

/// Samples random loops to probe |j* pr_2 F_lambda| >= delta |y| with
/// lambda in [-1/2, -1/2 + eps) and (1/2 - eps, 1/2]. Deterministic
/// per-sample seeds, so results are independent of scheduling. A failed
/// verdict is data, not an error.
pub fn condition_a_certificate(
    h: &LiftedHamiltonian,
    max_mode: usize,
    eps: f64,
    samples: usize,
    seed: u64,
    smallness_grid: usize,
) -> Result<ConditionACertificate> {
    let _ = ChiCutoff::standard(eps)?;
    let c = h.smallness_constant(smallness_grid)?;
    let delta = 0.5 - eps - c;
    let m = h.m();
    let n = h.n();
    let ratios: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha20Rng::seed_from_u64(seed ^ (0x5eed_0000 + i as u64));
            let x = random_band_limited(&mut rng, 2 * m, max_mode);
            let y = random_band_limited(&mut rng, 2 * n + 2, max_mode);
            let lambda = sample_band_lambda(&mut rng, eps);
            let (_, v) = f_lambda(h, &x, &y, lambda);
            let (num, _) = v.apply_jstar().norms();
            let (den, _) = y.norms();
            if den == 0.0 {
                f64::INFINITY
            } else {
                num / den
            }
        })
        .collect();
    let empirical_min_ratio = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let delta_sharp = sharp_delta(c, eps);
    Ok(ConditionACertificate {
        c,
        c_safety: SMALLNESS_SAFETY * c,
        eps,
        delta,
        verdict: delta > 0.0,
        empirical_min_ratio,
        delta_sharp,
        verdict_sharp: delta_sharp > 0.0,
        samples,
        seed,
    })
}

pub fn random_band_limited(rng: &mut impl Rng, dim: usize, max_mode: usize) -> FourierLoop {
    let mut l = FourierLoop::zeros(dim, max_mode);
    for k in -(max_mode as i64)..=(max_mode as i64) {
        let decay = 1.0 / (1.0 + k.unsigned_abs() as f64);
        for v in l.coeff_mut(k) {
            *v = decay * rng.gen_range(-1.0..1.0);
        }
    }
    l
}

fn sample_band_lambda(rng: &mut impl Rng, eps: f64) -> f64 {
    let t: f64 = rng.gen_range(0.0..eps);
    if rng.gen::<bool>() {
        -0.5 + t
    } else {
        0.5 - t
    }
}
