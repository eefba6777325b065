//! Galerkin truncations of the negative gradient flow: exponential
//! time stepping, isolating-neighborhood audits with a homotopy sweep,
//! a damped least-squares critical-point solver, multistart search, and
//! clustering of solutions into circle families.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::action::{action_gradient, action_value, f_lambda, random_band_limited, ChiCutoff};
use crate::error::{CoreError, Result};
use crate::hamiltonian::{lift, HamiltonianSpec, LiftedHamiltonian};
use crate::loops::{h_half_weight, FourierLoop, ProductPoint};

/// Retained Fourier window {-neg, ..., pos}; modes outside are frozen to
/// zero by the Galerkin projection.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct TruncationLevel {
    pub neg: usize,
    pub pos: usize,
}

impl TruncationLevel {
    pub fn new(neg: usize, pos: usize) -> Result<Self> {
        if neg < 1 || pos < 1 {
            return Err(CoreError::InvalidParameter(format!(
                "truncation window ({neg}, {pos}) must keep at least one mode on each side"
            )));
        }
        Ok(TruncationLevel { neg, pos })
    }

    pub fn symmetric(k: usize) -> Result<Self> {
        Self::new(k, k)
    }

    /// Storage depth for loops living in this window.
    pub fn max_mode(&self) -> usize {
        self.neg.max(self.pos)
    }

    pub fn contains(&self, mode: i64) -> bool {
        mode >= -(self.neg as i64) && mode <= self.pos as i64
    }

    pub fn project(&self, l: &FourierLoop) -> FourierLoop {
        l.truncate(self.neg, self.pos)
    }

    pub fn project_point(&self, p: &ProductPoint) -> ProductPoint {
        ProductPoint {
            x: self.project(&p.x),
            y: self.project(&p.y),
            lambda: p.lambda,
        }
    }
}

/// Tangent vector at a point of the product space.
#[derive(Clone, Debug, Serialize)]
pub struct Tangent {
    pub x: FourierLoop,
    pub y: FourierLoop,
    pub lambda: f64,
}

impl Tangent {
    pub fn norm(&self) -> f64 {
        (self.x.h_half_norm_sq() + self.y.h_half_norm_sq() + self.lambda * self.lambda).sqrt()
    }
}

/// Negative gradient of the action, projected to the truncation window.
/// The lambda component is a plain scalar and is never projected.
pub fn galerkin_vector_field(
    h: &LiftedHamiltonian,
    chi: &ChiCutoff,
    level: &TruncationLevel,
    p: &ProductPoint,
) -> Tangent {
    let g = action_gradient(h, chi, p);
    Tangent {
        x: level.project(&g.x).scaled(-1.0),
        y: level.project(&g.y).scaled(-1.0),
        lambda: -g.lambda,
    }
}

fn x_rate(k: i64) -> f64 {
    match k {
        0 => 0.0,
        _ => (k as f64).signum(),
    }
}

fn y_rate(k: i64, chi_val: f64) -> f64 {
    if k == 0 {
        2.0 * PI * chi_val
    } else {
        (k as f64).signum() + chi_val / k.unsigned_abs() as f64
    }
}

fn exp_scale_x(l: &FourierLoop, t: f64) -> FourierLoop {
    let mut out = l.clone();
    for k in out.modes().collect::<Vec<_>>() {
        let f = (-x_rate(k) * t).exp();
        for v in out.coeff_mut(k) {
            *v *= f;
        }
    }
    out
}

fn exp_scale_y(l: &FourierLoop, t: f64, chi_val: f64) -> FourierLoop {
    let mut out = l.clone();
    for k in out.modes().collect::<Vec<_>>() {
        let f = (-y_rate(k, chi_val) * t).exp();
        for v in out.coeff_mut(k) {
            *v *= f;
        }
    }
    out
}

/// Compact remainder N(p) = A_lin p - grad A(p) of the negative gradient
/// field, with the linear rates frozen at chi_val.
fn compact_part(
    h: &LiftedHamiltonian,
    chi: &ChiCutoff,
    level: &TruncationLevel,
    p: &ProductPoint,
    chi_val: f64,
) -> Tangent {
    let g = action_gradient(h, chi, p);
    let mut nx = level.project(&g.x).scaled(-1.0);
    for k in nx.modes().collect::<Vec<_>>() {
        let r = x_rate(k);
        if r != 0.0 && level.contains(k) {
            let src = p.x.coeff(k).to_vec();
            for (v, s) in nx.coeff_mut(k).iter_mut().zip(&src) {
                *v += r * s;
            }
        }
    }
    let mut ny = level.project(&g.y).scaled(-1.0);
    for k in ny.modes().collect::<Vec<_>>() {
        let r = y_rate(k, chi_val);
        if r != 0.0 && level.contains(k) {
            let src = p.y.coeff(k).to_vec();
            for (v, s) in ny.coeff_mut(k).iter_mut().zip(&src) {
                *v += r * s;
            }
        }
    }
    Tangent {
        x: nx,
        y: ny,
        lambda: -g.lambda,
    }
}

/// One step of the negative gradient flow by an exponential midpoint
/// rule: the mode-wise linear rates (frozen at the step's start) are
/// integrated exactly, the compact remainder by explicit midpoint. Steps
/// that increase the action are rejected and retried with half the step;
/// returns the accepted point and the step actually taken (0 if every
/// retry was rejected).
pub fn flow_step(
    h: &LiftedHamiltonian,
    chi: &ChiCutoff,
    level: &TruncationLevel,
    p: &ProductPoint,
    dt: f64,
) -> (ProductPoint, f64) {
    assert!(dt > 0.0);
    let p = level.project_point(p);
    let chi0 = chi.eval(p.lambda).0;
    let a0 = action_value(h, chi, &p);
    let n1 = compact_part(h, chi, level, &p, chi0);
    let mut step = dt;
    for _ in 0..20 {
        let mut pred = p.clone();
        pred.x.axpy(0.5 * step, &n1.x);
        pred.y.axpy(0.5 * step, &n1.y);
        pred.lambda += 0.5 * step * n1.lambda;
        let mid = ProductPoint {
            x: exp_scale_x(&pred.x, 0.5 * step),
            y: exp_scale_y(&pred.y, 0.5 * step, chi0),
            lambda: pred.lambda,
        };
        let n2 = compact_part(h, chi, level, &mid, chi0);
        let mut z = ProductPoint {
            x: exp_scale_x(&p.x, step),
            y: exp_scale_y(&p.y, step, chi0),
            lambda: p.lambda,
        };
        z.x.axpy(step, &exp_scale_x(&n2.x, 0.5 * step));
        z.y.axpy(step, &exp_scale_y(&n2.y, 0.5 * step, chi0));
        z.lambda += step * n2.lambda;
        if action_value(h, chi, &z) <= a0 + 1e-10 * (1.0 + a0.abs()) {
            return (z, step);
        }
        step *= 0.5;
    }
    (p, 0.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SolveStatus {
    Converged,
    Diverged,
    MaxIters,
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveOutcome {
    pub status: SolveStatus,
    /// Last iterate (the solution when status is Converged).
    pub point: ProductPoint,
    pub residual: f64,
    pub iterations: usize,
    /// Rest-point checks: |y|_2 should be 1 and lambda interior to the
    /// cutoff window at any genuine critical point with y != 0.
    pub y_l2: f64,
    pub lambda_interior: bool,
}

struct Coords {
    level: TruncationLevel,
    xdim: usize,
    ydim: usize,
}

impl Coords {
    fn window(&self) -> impl Iterator<Item = i64> {
        -(self.level.neg as i64)..=(self.level.pos as i64)
    }

    fn dim(&self) -> usize {
        (self.level.neg + self.level.pos + 1) * (self.xdim + self.ydim) + 1
    }

    fn pack(&self, p: &ProductPoint) -> DVector<f64> {
        let mut v = DVector::zeros(self.dim());
        let mut i = 0;
        for k in self.window() {
            let w = h_half_weight(k).sqrt();
            for c in p.x.coeff(k) {
                v[i] = w * c;
                i += 1;
            }
        }
        for k in self.window() {
            let w = h_half_weight(k).sqrt();
            for c in p.y.coeff(k) {
                v[i] = w * c;
                i += 1;
            }
        }
        v[i] = p.lambda;
        v
    }

    fn unpack(&self, v: &DVector<f64>) -> ProductPoint {
        let mm = self.level.max_mode();
        let mut x = FourierLoop::zeros(self.xdim, mm);
        let mut y = FourierLoop::zeros(self.ydim, mm);
        let mut i = 0;
        for k in self.window() {
            let w = h_half_weight(k).sqrt();
            for c in x.coeff_mut(k) {
                *c = v[i] / w;
                i += 1;
            }
        }
        for k in self.window() {
            let w = h_half_weight(k).sqrt();
            for c in y.coeff_mut(k) {
                *c = v[i] / w;
                i += 1;
            }
        }
        ProductPoint::new(x, y, v[i])
    }

    /// Gradient in the packed (orthonormal) coordinates; its Euclidean
    /// norm is the H^{1/2} x R norm of the action gradient.
    fn residual(
        &self,
        h: &LiftedHamiltonian,
        chi: &ChiCutoff,
        v: &DVector<f64>,
    ) -> DVector<f64> {
        let p = self.unpack(v);
        let g = action_gradient(h, chi, &p);
        let mut r = DVector::zeros(self.dim());
        let mut i = 0;
        for k in self.window() {
            let w = h_half_weight(k).sqrt();
            for c in g.x.coeff(k) {
                r[i] = w * c;
                i += 1;
            }
        }
        for k in self.window() {
            let w = h_half_weight(k).sqrt();
            for c in g.y.coeff(k) {
                r[i] = w * c;
                i += 1;
            }
        }
        r[i] = g.lambda;
        r
    }
}

/// Damped least-squares (Levenberg-Marquardt) search for a zero of the
/// truncated action gradient. Reports divergence when the iterate leaves
/// twice the given radius in either loop factor or |lambda| exceeds 1.
pub fn solve_critical(
    h: &LiftedHamiltonian,
    chi: &ChiCutoff,
    level: &TruncationLevel,
    start: &ProductPoint,
    tol: f64,
    max_iters: usize,
    radius: f64,
) -> SolveOutcome {
    let coords = Coords {
        level: *level,
        xdim: start.x.dim(),
        ydim: start.y.dim(),
    };
    let start = level.project_point(&start.with_max_mode(level.max_mode()));
    let mut v = coords.pack(&start);
    let mut r = coords.residual(h, chi, &v);
    let mut mu = 1e-3;
    let fd = 1e-6;
    let outcome = |status, v: &DVector<f64>, res: f64, it| {
        let p = coords.unpack(v);
        let y_l2 = p.y.l2_norm_sq().sqrt();
        let lambda_interior =
            p.lambda > chi.lambda0 + 1e-12 && p.lambda < chi.lambda0 + 1.0 - 1e-12;
        SolveOutcome {
            status,
            point: p,
            residual: res,
            iterations: it,
            y_l2,
            lambda_interior,
        }
    };
    for it in 0..max_iters {
        if r.norm() <= tol {
            return outcome(SolveStatus::Converged, &v, r.norm(), it);
        }
        let dim = coords.dim();
        let mut j = DMatrix::zeros(dim, dim);
        for c in 0..dim {
            let mut vp = v.clone();
            vp[c] += fd;
            let mut vm = v.clone();
            vm[c] -= fd;
            let col = (coords.residual(h, chi, &vp) - coords.residual(h, chi, &vm)) / (2.0 * fd);
            j.set_column(c, &col);
        }
        let jt = j.transpose();
        let jtj = &jt * &j;
        let jtr = &jt * &r;
        let mut accepted = false;
        for _ in 0..16 {
            let mut a = jtj.clone();
            for d in 0..dim {
                a[(d, d)] += mu * jtj[(d, d)].max(1e-12);
            }
            let delta = match a.clone().cholesky() {
                Some(ch) => ch.solve(&(-&jtr)),
                None => match a.lu().solve(&(-&jtr)) {
                    Some(s) => s,
                    None => {
                        mu *= 4.0;
                        continue;
                    }
                },
            };
            let vn = &v + &delta;
            let rn = coords.residual(h, chi, &vn);
            if rn.norm() < r.norm() {
                v = vn;
                r = rn;
                mu = (mu / 3.0).max(1e-14);
                accepted = true;
                break;
            }
            mu *= 4.0;
            if mu > 1e14 {
                return outcome(SolveStatus::MaxIters, &v, r.norm(), it);
            }
        }
        if !accepted {
            return outcome(SolveStatus::MaxIters, &v, r.norm(), it);
        }
        let p = coords.unpack(&v);
        if p.x.h_half_norm_perp() > 2.0 * radius
            || p.y.h_half_norm_sq().sqrt() > 2.0 * radius
            || p.lambda.abs() > 1.0
        {
            return outcome(SolveStatus::Diverged, &v, r.norm(), it);
        }
    }
    outcome(SolveStatus::MaxIters, &v, r.norm(), max_iters)
}

#[derive(Clone, Debug, Serialize)]
pub struct MultistartConfig {
    pub starts: usize,
    pub seed: u64,
    /// Size of the random perturbation applied to modes |k| <= 2, so the
    /// same seed produces the same starts at every truncation depth.
    pub perturbation: f64,
    pub tol: f64,
    pub max_iters: usize,
    pub radius: f64,
}

impl Default for MultistartConfig {
    fn default() -> Self {
        MultistartConfig {
            starts: 200,
            seed: 1,
            perturbation: 0.05,
            tol: 1e-10,
            max_iters: 120,
            radius: 8.0,
        }
    }
}

fn random_unit(rng: &mut impl Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if n > 0.1 {
            return v.iter().map(|a| a / n).collect();
        }
    }
}

/// Deterministic start for index i: a random point of the unperturbed
/// critical manifold (x constant on the torus, y a constant unit vector,
/// lambda near 0) with a band-limited perturbation on modes |k| <= 2.
pub fn multistart_point(
    rng: &mut impl Rng,
    m: usize,
    n: usize,
    level: &TruncationLevel,
    perturbation: f64,
) -> ProductPoint {
    let mm = level.max_mode();
    let x0: Vec<f64> = (0..2 * m).map(|_| rng.gen_range(0.0..1.0)).collect();
    let y0 = random_unit(rng, 2 * n + 2);
    let mut x = FourierLoop::constant(&x0, mm);
    let mut y = FourierLoop::constant(&y0, mm);
    let lambda = perturbation * rng.gen_range(-0.5..0.5);
    for k in -2i64..=2 {
        let decay = perturbation / (1 + k.unsigned_abs()) as f64;
        for v in x.coeff_mut(k) {
            *v += decay * rng.gen_range(-1.0..1.0);
        }
        for v in y.coeff_mut(k) {
            *v += decay * rng.gen_range(-1.0..1.0);
        }
    }
    level.project_point(&ProductPoint::new(x, y, lambda))
}

/// Runs `solve_critical` from `starts` deterministic seeds in parallel,
/// merged in seed order.
pub fn multistart_search(
    h: &LiftedHamiltonian,
    chi: &ChiCutoff,
    level: &TruncationLevel,
    cfg: &MultistartConfig,
) -> Vec<SolveOutcome> {
    (0..cfg.starts)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed ^ (0x57a8_7000 + i as u64));
            let start = multistart_point(&mut rng, h.m(), h.n(), level, cfg.perturbation);
            solve_critical(h, chi, level, &start, cfg.tol, cfg.max_iters, cfg.radius)
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct CriticalFamily {
    pub representative: ProductPoint,
    pub residual: f64,
    pub action: f64,
    pub lambda: f64,
    /// Number of multistart hits merged into this family.
    pub multiplicity: usize,
}

/// Greedy clustering under the quotient distance (phase circle on y,
/// integer translations of the x zero mode). Output is sorted by action
/// then lambda, so it is independent of input order up to ties.
pub fn cluster_families(
    h: &LiftedHamiltonian,
    chi: &ChiCutoff,
    points: &[ProductPoint],
    radius: f64,
) -> Vec<CriticalFamily> {
    let mut families: Vec<CriticalFamily> = Vec::new();
    for p in points {
        let mut merged = false;
        for fam in &mut families {
            if fam.representative.quotient_distance(p) <= radius {
                fam.multiplicity += 1;
                let res = action_gradient(h, chi, p).norm();
                if res < fam.residual {
                    fam.representative = p.clone();
                    fam.residual = res;
                    fam.action = action_value(h, chi, p);
                    fam.lambda = p.lambda;
                }
                merged = true;
                break;
            }
        }
        if !merged {
            families.push(CriticalFamily {
                residual: action_gradient(h, chi, p).norm(),
                action: action_value(h, chi, p),
                lambda: p.lambda,
                representative: p.clone(),
                multiplicity: 1,
            });
        }
    }
    families.sort_by(|a, b| {
        a.action
            .total_cmp(&b.action)
            .then(a.lambda.total_cmp(&b.lambda))
    });
    families
}

/// One-to-one matching of two family lists under the quotient distance;
/// used to compare runs at different truncation depths.
pub fn families_match(a: &[CriticalFamily], b: &[CriticalFamily], tol: f64) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mm = a
        .iter()
        .chain(b)
        .map(|f| f.representative.max_mode())
        .max()
        .unwrap_or(0);
    let mut used = vec![false; b.len()];
    for fa in a {
        let pa = fa.representative.with_max_mode(mm);
        let mut hit = None;
        for (j, fb) in b.iter().enumerate() {
            if used[j] {
                continue;
            }
            if pa.quotient_distance(&fb.representative.with_max_mode(mm)) <= tol {
                hit = Some(j);
                break;
            }
        }
        match hit {
            Some(j) => used[j] = true,
            None => return false,
        }
    }
    true
}

#[derive(Clone, Debug, Serialize)]
pub struct AuditParams {
    /// Random samples per boundary face and homotopy value.
    pub shell_samples: usize,
    /// Random samples of the inner region used for the action bounds.
    pub interior_samples: usize,
    /// Multistart solves used to locate rest points per homotopy value.
    pub rest_starts: usize,
    pub seed: u64,
    /// Minimal admissible gradient norm on the boundary shell.
    pub rho_floor: f64,
    /// Minimal admissible twist margin on the lambda bands.
    pub ratio_floor: f64,
    /// Padding added around the located rest points.
    pub rest_margin: f64,
    pub solver_tol: f64,
    pub solver_iters: usize,
    /// Samples of loops supported outside the retained window for the
    /// tail positivity check.
    pub tail_samples: usize,
}

impl Default for AuditParams {
    fn default() -> Self {
        AuditParams {
            shell_samples: 60,
            interior_samples: 120,
            rest_starts: 6,
            seed: 1,
            rho_floor: 1e-3,
            ratio_floor: 1e-2,
            rest_margin: 0.25,
            solver_tol: 1e-8,
            solver_iters: 80,
            tail_samples: 40,
        }
    }
}

/// Sampled evidence that the box {|x perp| <= R} x {|y| <= R} x
/// [-1/2, 1/2] isolates the rest points of the flow at every audited
/// homotopy value. `required_radius` is the radius 2 (r + (b - a) / rho)
/// that the audit data certifies as sufficient.
#[derive(Clone, Debug, Serialize)]
pub struct IsolationAudit {
    pub radius: f64,
    pub inner_radius: f64,
    pub rho: f64,
    pub action_min: f64,
    pub action_max: f64,
    pub s_grid: Vec<f64>,
    pub required_radius: f64,
    /// Minimal normalized twist margin |j* pr2 F_lambda| / |y| over the
    /// cutoff bands, sampled on structured and random loops.
    pub lambda_face_margin: f64,
    /// Minimal normalized pairing <grad A, L p> / |p|^2 on loops
    /// supported outside the retained window.
    pub tail_margin: f64,
    pub rest_point_count: usize,
    pub failing_s: Option<f64>,
    pub verdict: bool,
}

fn scaled_hamiltonian(h: &LiftedHamiltonian, s: f64) -> LiftedHamiltonian {
    let mut spec = h.spec().clone();
    for t in &mut spec.terms {
        t.amplitude *= s;
    }
    lift(spec).expect("scaling preserves validity")
}

fn set_perp_norm(l: &mut FourierLoop, target: f64) {
    let cur = l.h_half_norm_perp();
    if cur < 1e-12 {
        let dim = l.dim();
        l.coeff_mut(1)[0] = target / h_half_weight(1).sqrt();
        let _ = dim;
    } else {
        let f = target / cur;
        for k in l.modes().collect::<Vec<_>>() {
            if k != 0 {
                for v in l.coeff_mut(k) {
                    *v *= f;
                }
            }
        }
    }
}

fn set_norm(l: &mut FourierLoop, target: f64) {
    let cur = l.h_half_norm_sq().sqrt();
    if cur < 1e-12 {
        l.coeff_mut(0)[0] = target;
    } else {
        let f = target / cur;
        for v in l.as_mut_slice() {
            *v *= f;
        }
    }
}

fn random_torus_loop(rng: &mut impl Rng, dim: usize, level: &TruncationLevel) -> FourierLoop {
    let mut x = random_band_limited(rng, dim, level.max_mode());
    for v in x.coeff_mut(0) {
        *v = rng.gen_range(0.0..1.0);
    }
    level.project(&x)
}

/// Closed-form minimum over the two cutoff bands of
/// |w + 2 pi lambda z| / |y| with w = j*(-J y' - grad_y H(x, y)) and
/// z = j* y: a quadratic in lambda, minimized at the clamped vertex.
fn endpoint_margin(
    h: &LiftedHamiltonian,
    x: &FourierLoop,
    y: &FourierLoop,
    eps: f64,
) -> f64 {
    let yn = y.h_half_norm_sq().sqrt();
    if yn < 1e-12 {
        return f64::INFINITY;
    }
    let (_, v) = f_lambda(h, x, y, 0.0);
    let w = v.apply_jstar();
    let z = y.apply_jstar();
    let ww = w.h_half_norm_sq();
    let zz = z.h_half_norm_sq();
    let wz = w.h_half_inner(&z);
    let value = |lam: f64| ww + 4.0 * PI * lam * wz + 4.0 * PI * PI * lam * lam * zz;
    let vertex = -wz / (2.0 * PI * zz);
    let mut best = f64::INFINITY;
    for band in [(-0.5, -0.5 + eps), (0.5 - eps, 0.5)] {
        let lam = vertex.clamp(band.0, band.1);
        best = best.min(value(lam).max(0.0));
    }
    best.sqrt() / yn
}

struct PerS {
    rho: f64,
    margin: f64,
    tail: f64,
    r_inner: f64,
    a: f64,
    b: f64,
    rest_count: usize,
    required: f64,
}

#[allow(clippy::too_many_arguments)]
fn audit_one_s(
    h: &LiftedHamiltonian,
    chi: &ChiCutoff,
    level: &TruncationLevel,
    radius: f64,
    s: f64,
    si: usize,
    params: &AuditParams,
) -> PerS {
    let hs = scaled_hamiltonian(h, s);
    let m = h.m();
    let n = h.n();
    let xdim = 2 * m;
    let ydim = 2 * n + 2;
    let seed_base = params.seed ^ ((si as u64) << 32);

    // Rest points: multistart from the unperturbed critical manifold.
    let rest: Vec<ProductPoint> = (0..params.rest_starts)
        .into_par_iter()
        .filter_map(|j| {
            let mut rng = ChaCha20Rng::seed_from_u64(seed_base ^ (0xbe57 + j as u64));
            let start = multistart_point(&mut rng, m, n, level, 0.02);
            let out = solve_critical(
                &hs,
                chi,
                level,
                &start,
                params.solver_tol,
                params.solver_iters,
                radius,
            );
            (out.status == SolveStatus::Converged).then_some(out.point)
        })
        .collect();
    let rest_count = rest.len();
    let r_core = rest
        .iter()
        .map(|p| p.x.h_half_norm_perp().max(p.y.h_half_norm_sq().sqrt()))
        .fold(1.0f64, f64::max);
    let r_inner = r_core + params.rest_margin;

    // Action bounds over the inner region.
    let mut a = f64::INFINITY;
    let mut b = f64::NEG_INFINITY;
    for p in &rest {
        let val = action_value(&hs, chi, p);
        a = a.min(val);
        b = b.max(val);
    }
    let bounds: Vec<(f64, f64)> = (0..params.interior_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha20Rng::seed_from_u64(seed_base ^ (0x147e + i as u64));
            let mut x = random_torus_loop(&mut rng, xdim, level);
            set_perp_norm(&mut x, rng.gen_range(0.0..r_inner));
            let mut y = level.project(&random_band_limited(&mut rng, ydim, level.max_mode()));
            set_norm(&mut y, rng.gen_range(0.0..r_inner));
            let lambda = rng.gen_range(-0.5..=0.5);
            let val = action_value(&hs, chi, &ProductPoint::new(x, y, lambda));
            (val, val)
        })
        .collect();
    for (lo, hi) in bounds {
        a = a.min(lo);
        b = b.max(hi);
    }

    // Gradient-norm floor on the boundary shell.
    let rho = (0..params.shell_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha20Rng::seed_from_u64(seed_base ^ (0x5e11 + i as u64));
            let mut worst = f64::INFINITY;
            for face in 0..4 {
                let mut x = random_torus_loop(&mut rng, xdim, level);
                let mut y =
                    level.project(&random_band_limited(&mut rng, ydim, level.max_mode()));
                let mut lambda = rng.gen_range(-0.5..=0.5);
                match face {
                    0 => {
                        set_perp_norm(&mut x, radius);
                        set_norm(&mut y, rng.gen_range(0.0..radius));
                    }
                    1 => {
                        set_perp_norm(&mut x, rng.gen_range(0.0..radius));
                        set_norm(&mut y, radius);
                    }
                    _ => {
                        set_perp_norm(&mut x, rng.gen_range(0.0..radius));
                        set_norm(&mut y, rng.gen_range(0.0..radius));
                        lambda = if face == 2 { -0.5 } else { 0.5 };
                    }
                }
                let g = action_gradient(&hs, chi, &ProductPoint::new(x, y, lambda));
                let gn = (level.project(&g.x).h_half_norm_sq()
                    + level.project(&g.y).h_half_norm_sq()
                    + g.lambda * g.lambda)
                    .sqrt();
                worst = worst.min(gn);
            }
            worst
        })
        .reduce(|| f64::INFINITY, f64::min);

    // Twist margin over the cutoff bands: structured loops (constant and
    // single-mode y along coordinate axes, x constant on a coordinate
    // grid) plus random ones.
    let mm = level.max_mode();
    let mut margin = f64::INFINITY;
    for coord in 0..xdim {
        for g in 0..64 {
            let mut x0 = vec![0.0; xdim];
            x0[coord] = g as f64 / 64.0;
            let x = FourierLoop::constant(&x0, mm);
            for axis in 0..ydim {
                let mut e = vec![0.0; ydim];
                e[axis] = 1.0;
                for mode in [0i64, 1, -1] {
                    let y = FourierLoop::single_mode(mode, &e, mm);
                    margin = margin.min(endpoint_margin(&hs, &x, &y, chi.eps));
                }
            }
        }
    }
    let random_margin = (0..params.shell_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha20Rng::seed_from_u64(seed_base ^ (0x3a46 + i as u64));
            let x = random_torus_loop(&mut rng, xdim, level);
            let y = level.project(&random_band_limited(&mut rng, ydim, level.max_mode()));
            endpoint_margin(&hs, &x, &y, chi.eps)
        })
        .reduce(|| f64::INFINITY, f64::min);
    margin = margin.min(random_margin);

    // Tail positivity outside the retained window.
    let ambient = mm + 2;
    let tail = (0..params.tail_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha20Rng::seed_from_u64(seed_base ^ (0x7a11 + i as u64));
            let keep_outside = |l: &FourierLoop| {
                let mut out = l.clone();
                for k in out.modes().collect::<Vec<_>>() {
                    if level.contains(k) {
                        out.coeff_mut(k).fill(0.0);
                    }
                }
                out
            };
            let x = keep_outside(&random_band_limited(&mut rng, xdim, ambient));
            let y = keep_outside(&random_band_limited(&mut rng, ydim, ambient));
            let lambda = rng.gen_range(-0.5..=0.5);
            let p = ProductPoint::new(x, y, lambda);
            let g = action_gradient(&hs, chi, &p);
            let num = g.x.h_half_inner(&p.x.apply_l()) + g.y.h_half_inner(&p.y.apply_l());
            let den = p.x.h_half_norm_sq() + p.y.h_half_norm_sq();
            num / den
        })
        .reduce(|| f64::INFINITY, f64::min);

    let required = 2.0 * (r_inner + (b - a) / rho.max(1e-300));
    PerS {
        rho,
        margin,
        tail,
        r_inner,
        a,
        b,
        rest_count,
        required,
    }
}

/// Audits the isolation box of radius `radius` over the given homotopy
/// values. A failed verdict is data, not an error.
pub fn audit_isolating_neighborhood(
    h: &LiftedHamiltonian,
    chi: &ChiCutoff,
    level: &TruncationLevel,
    radius: f64,
    s_grid: &[f64],
    params: &AuditParams,
) -> IsolationAudit {
    assert!(radius > 0.0);
    let mut agg = IsolationAudit {
        radius,
        inner_radius: 0.0,
        rho: f64::INFINITY,
        action_min: f64::INFINITY,
        action_max: f64::NEG_INFINITY,
        s_grid: s_grid.to_vec(),
        required_radius: 0.0,
        lambda_face_margin: f64::INFINITY,
        tail_margin: f64::INFINITY,
        rest_point_count: 0,
        failing_s: None,
        verdict: true,
    };
    for (si, &s) in s_grid.iter().enumerate() {
        let per = audit_one_s(h, chi, level, radius, s, si, params);
        let ok = per.rho >= params.rho_floor
            && per.margin >= params.ratio_floor
            && per.tail > 0.0
            && radius >= per.required;
        if !ok && agg.failing_s.is_none() {
            agg.failing_s = Some(s);
        }
        agg.verdict &= ok;
        agg.rho = agg.rho.min(per.rho);
        agg.lambda_face_margin = agg.lambda_face_margin.min(per.margin);
        agg.tail_margin = agg.tail_margin.min(per.tail);
        agg.inner_radius = agg.inner_radius.max(per.r_inner);
        agg.action_min = agg.action_min.min(per.a);
        agg.action_max = agg.action_max.max(per.b);
        agg.required_radius = agg.required_radius.max(per.required);
        agg.rest_point_count += per.rest_count;
    }
    agg
}

/// Determines a working radius from the unperturbed flow: audits at an
/// initial guess, then doubles the certified radius until the audit
/// confirms it.
pub fn auto_radius(
    m: usize,
    n: usize,
    chi: &ChiCutoff,
    level: &TruncationLevel,
    params: &AuditParams,
) -> Result<(f64, IsolationAudit)> {
    let h0 = lift(HamiltonianSpec::zero(m, n))?;
    let mut radius = 4.0;
    for _ in 0..8 {
        let audit = audit_isolating_neighborhood(&h0, chi, level, radius, &[0.0], params);
        if audit.rho < params.rho_floor
            || audit.lambda_face_margin < params.ratio_floor
            || audit.tail_margin <= 0.0
        {
            return Err(CoreError::InvalidParameter(format!(
                "reference audit degenerate at radius {radius}: rho {:.3e}, band margin {:.3e}, tail {:.3e}",
                audit.rho, audit.lambda_face_margin, audit.tail_margin
            )));
        }
        if audit.verdict {
            let certified = 2.0 * audit.required_radius;
            let confirm =
                audit_isolating_neighborhood(&h0, chi, level, certified, &[0.0], params);
            if confirm.verdict {
                return Ok((certified, confirm));
            }
        }
        radius = 2.0 * audit.required_radius.max(radius);
    }
    Err(CoreError::InvalidParameter(
        "radius search did not stabilize after 8 doublings".into(),
    ))
}

#[derive(Clone, Debug, Serialize)]
pub struct ContinuationReport {
    pub radius: f64,
    pub audits: Vec<IsolationAudit>,
    pub pass: bool,
    pub first_failing_s: Option<f64>,
}

/// Audits the shared box along the linear homotopy s H, s = 0 .. 1.
pub fn continuation_sweep(
    h: &LiftedHamiltonian,
    chi: &ChiCutoff,
    level: &TruncationLevel,
    radius: f64,
    steps: usize,
    params: &AuditParams,
) -> Result<ContinuationReport> {
    if steps < 2 {
        return Err(CoreError::InvalidParameter(format!(
            "continuation needs at least 2 steps, got {steps}"
        )));
    }
    let mut audits = Vec::with_capacity(steps + 1);
    let mut first_failing_s = None;
    for i in 0..=steps {
        let s = i as f64 / steps as f64;
        let audit = audit_isolating_neighborhood(h, chi, level, radius, &[s], params);
        if !audit.verdict && first_failing_s.is_none() {
            first_failing_s = Some(s);
        }
        audits.push(audit);
    }
    Ok(ContinuationReport {
        radius,
        pass: first_failing_s.is_none(),
        first_failing_s,
        audits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{benchmark_spec, resonant_spec};
    use rand::rngs::StdRng;

    fn zero_h() -> LiftedHamiltonian {
        lift(HamiltonianSpec::zero(1, 1)).unwrap()
    }

    fn chi() -> ChiCutoff {
        ChiCutoff::standard(0.05).unwrap()
    }

    fn manifold_point(mm: usize) -> ProductPoint {
        ProductPoint::new(
            FourierLoop::constant(&[0.3, 0.7], mm),
            FourierLoop::constant(&[0.0, 1.0, 0.0, 0.0], mm),
            0.0,
        )
    }

    #[test]
    fn field_vanishes_on_critical_manifold() {
        let level = TruncationLevel::symmetric(4).unwrap();
        let t = galerkin_vector_field(&zero_h(), &chi(), &level, &manifold_point(4));
        assert!(t.norm() < 1e-14);
    }

    #[test]
    fn field_is_projected() {
        let h = lift(resonant_spec(1, 1)).unwrap();
        let level = TruncationLevel::new(2, 2).unwrap();
        let mut rng = StdRng::seed_from_u64(11);
        let p = ProductPoint::new(
            random_band_limited(&mut rng, 2, 4),
            random_band_limited(&mut rng, 4, 4),
            0.1,
        );
        let t = galerkin_vector_field(&h, &chi(), &level, &p);
        for k in [-4i64, -3, 3, 4] {
            assert!(t.x.coeff(k).iter().all(|v| *v == 0.0));
            assert!(t.y.coeff(k).iter().all(|v| *v == 0.0));
        }
        let full = TruncationLevel::symmetric(4).unwrap();
        let tf = galerkin_vector_field(&h, &chi(), &full, &p);
        let g = action_gradient(&h, &chi(), &p);
        assert!(tf.x.add(&g.x).h_half_norm_sq() < 1e-28);
        assert!(tf.y.add(&g.y).h_half_norm_sq() < 1e-28);
        assert_eq!(tf.lambda, -g.lambda);
    }

    #[test]
    fn flow_fixes_critical_points() {
        let level = TruncationLevel::symmetric(4).unwrap();
        let p = manifold_point(4);
        let (q, used) = flow_step(&zero_h(), &chi(), &level, &p, 0.1);
        assert_eq!(used, 0.1);
        assert!(p.quotient_distance(&q) < 1e-14);
    }

    #[test]
    fn flow_matches_modewise_exponential_on_linear_field() {
        // H = 0 with lambda deep in the flat region: the loop field is
        // purely linear with chi frozen at -1/2, and the lambda equation
        // has the constant rate pi.
        let h = zero_h();
        let c = chi();
        let level = TruncationLevel::symmetric(4).unwrap();
        let mut x = FourierLoop::zeros(2, 4);
        x.coeff_mut(2)[0] = 0.3;
        x.coeff_mut(-1)[1] = -0.2;
        let mut y = FourierLoop::zeros(4, 4);
        y.coeff_mut(1)[2] = 0.5;
        y.coeff_mut(-3)[0] = 0.1;
        let p = ProductPoint::new(x, y, -0.8);
        let dt = 0.05;
        let (q, used) = flow_step(&h, &c, &level, &p, dt);
        assert_eq!(used, dt);
        assert!((q.lambda - (p.lambda + PI * dt)).abs() < 1e-12);
        for (k, i, v) in [(2i64, 0usize, 0.3f64), (-1, 1, -0.2)] {
            let expect = v * (-x_rate(k) * dt).exp();
            assert!((q.x.coeff(k)[i] - expect).abs() < 1e-12, "x mode {k}");
        }
        for (k, i, v) in [(1i64, 2usize, 0.5f64), (-3, 0, 0.1)] {
            let expect = v * (-y_rate(k, -0.5) * dt).exp();
            assert!((q.y.coeff(k)[i] - expect).abs() < 1e-12, "y mode {k}");
        }
    }

    #[test]
    fn flow_decreases_action() {
        let h = lift(benchmark_spec()).unwrap();
        let c = chi();
        let level = TruncationLevel::symmetric(5).unwrap();
        let mut rng = StdRng::seed_from_u64(19);
        let mut p = ProductPoint::new(
            random_band_limited(&mut rng, 2, 5),
            random_band_limited(&mut rng, 4, 5),
            0.2,
        );
        let mut prev = action_value(&h, &c, &p);
        let mut decreased = 0;
        for _ in 0..100 {
            let (q, used) = flow_step(&h, &c, &level, &p, 0.02);
            let val = action_value(&h, &c, &q);
            assert!(val <= prev + 1e-9 * (1.0 + prev.abs()));
            if val < prev {
                decreased += 1;
            }
            if used > 0.0 {
                p = q;
                prev = val;
            }
        }
        assert!(decreased > 50);
        assert!(action_value(&h, &c, &p) < prev + 1e-12);
    }

    #[test]
    fn lambda_face_gradient_is_at_least_pi() {
        let c = chi();
        let p = ProductPoint::new(
            FourierLoop::constant(&[0.1, 0.2], 4),
            FourierLoop::zeros(4, 4),
            -0.5,
        );
        let g = action_gradient(&zero_h(), &c, &p);
        assert!((g.lambda + PI).abs() < 1e-14);
        assert!(g.norm() >= PI - 1e-14);
    }

    #[test]
    fn solver_recovers_unperturbed_critical_points() {
        let h = zero_h();
        let c = chi();
        let level = TruncationLevel::symmetric(4).unwrap();
        let mut rng = StdRng::seed_from_u64(5);
        for _ in 0..5 {
            let start = multistart_point(&mut rng, 1, 1, &level, 0.05);
            let out = solve_critical(&h, &c, &level, &start, 1e-10, 80, 8.0);
            assert_eq!(out.status, SolveStatus::Converged);
            assert!(out.residual <= 1e-10);
            assert!(out.point.x.h_half_norm_perp() < 1e-8);
            assert!(out.point.y.h_half_norm_perp() < 1e-8);
            assert!((out.y_l2 - 1.0).abs() < 1e-8);
            assert!(out.point.lambda.abs() < 1e-8);
            assert!(out.lambda_interior);
        }
    }

    #[test]
    fn solver_stalls_without_a_sphere_component() {
        let h = zero_h();
        let c = chi();
        let level = TruncationLevel::symmetric(3).unwrap();
        let start = ProductPoint::new(
            FourierLoop::constant(&[0.2, 0.4], 3),
            FourierLoop::zeros(4, 3),
            0.0,
        );
        let out = solve_critical(&h, &c, &level, &start, 1e-10, 40, 8.0);
        assert_ne!(out.status, SolveStatus::Converged);
    }

    #[test]
    fn solver_finds_benchmark_rest_points() {
        let h = lift(benchmark_spec()).unwrap();
        let c = chi();
        let level = TruncationLevel::symmetric(4).unwrap();
        for exact in crate::hamiltonian::benchmark_families(4) {
            let g = action_gradient(&h, &c, &exact);
            assert!(g.norm() < 1e-12, "expected an exact rest point");
            let mut start = exact.clone();
            start.x.coeff_mut(1)[0] += 0.01;
            start.y.coeff_mut(0)[1] += 0.02;
            let out = solve_critical(&h, &c, &level, &start, 1e-10, 80, 8.0);
            assert_eq!(out.status, SolveStatus::Converged);
            assert!(out.point.quotient_distance(&exact) < 1e-6);
        }
    }

    #[test]
    fn clustering_mods_out_symmetries() {
        let h = zero_h();
        let c = chi();
        let p = manifold_point(4);
        let rotated = ProductPoint::new(p.x.clone(), p.y.rotate_phase(0.37), p.lambda);
        let mut shifted = p.clone();
        shifted.x.coeff_mut(0)[0] += 1.0;
        let fams = cluster_families(&h, &c, &[p.clone(), rotated, shifted], 1e-3);
        assert_eq!(fams.len(), 1);
        assert_eq!(fams[0].multiplicity, 3);

        // antipodal y0 not on the same phase circle: J acts as a quarter
        // turn in each pair, so (0,1,0,0) -> -(0,1,0,0) is reachable, but
        // (1,0,0,0) vs (0,0,1,0) is not
        let q = ProductPoint::new(
            p.x.clone(),
            FourierLoop::constant(&[1.0, 0.0, 0.0, 0.0], 4),
            0.0,
        );
        let r = ProductPoint::new(
            p.x.clone(),
            FourierLoop::constant(&[0.0, 0.0, 1.0, 0.0], 4),
            0.0,
        );
        let fams = cluster_families(&h, &c, &[q, r], 1e-3);
        assert_eq!(fams.len(), 2);
    }

    #[test]
    fn audit_certifies_the_unperturbed_flow() {
        let c = chi();
        let level = TruncationLevel::symmetric(3).unwrap();
        let params = AuditParams {
            shell_samples: 30,
            interior_samples: 60,
            rest_starts: 3,
            tail_samples: 20,
            ..AuditParams::default()
        };
        let (radius, audit) = auto_radius(1, 1, &c, &level, &params).unwrap();
        assert!(audit.verdict, "auto radius audit failed: {audit:?}");
        assert!(radius >= audit.required_radius);
        assert!(audit.rho >= params.rho_floor);
        // single-mode loops realize the 1 - lambda twist bound, so the
        // unperturbed margin sits at 1/2
        assert!(audit.lambda_face_margin > 0.45);
        assert!(audit.tail_margin > 0.0);
        assert!((audit.inner_radius - 1.25).abs() < 0.1);
    }

    #[test]
    fn sweep_rejects_the_resonant_hamiltonian_before_full_strength() {
        let h = lift(resonant_spec(1, 1)).unwrap();
        let c = chi();
        let level = TruncationLevel::symmetric(3).unwrap();
        let params = AuditParams {
            shell_samples: 10,
            interior_samples: 20,
            rest_starts: 2,
            tail_samples: 8,
            ..AuditParams::default()
        };
        let report = continuation_sweep(&h, &c, &level, 12.0, 10, &params).unwrap();
        assert!(!report.pass);
        let failing = report.first_failing_s.unwrap();
        assert!(failing < 1.0, "expected failure before s = 1, got {failing}");
        assert!(failing >= 0.85, "unexpectedly early failure at {failing}");
    }

    #[test]
    fn sweep_accepts_the_benchmark_hamiltonian() {
        let h = lift(benchmark_spec()).unwrap();
        let c = chi();
        let level = TruncationLevel::symmetric(3).unwrap();
        let params = AuditParams {
            shell_samples: 10,
            interior_samples: 20,
            rest_starts: 2,
            tail_samples: 8,
            ..AuditParams::default()
        };
        let (radius, _) = auto_radius(1, 1, &c, &level, &params).unwrap();
        let report = continuation_sweep(&h, &c, &level, radius, 4, &params).unwrap();
        assert!(report.pass, "sweep failed: {:?}", report.first_failing_s);
    }
}
