//! Hamiltonians on T x T^{2m} x CP^n and their quadratic lifts.
//!
//! A Hamiltonian is a finite sum of terms
//! `a * cos(2 pi (nu_t t + nu . x) + phase) * y^T Q y`
//!
//! with integer frequencies nu and a symmetric quadratic form Q on
//! R^{2n+2} commuting with the complex structure J. Integer frequencies
//! make Z^{2m}-periodicity in x structural; J-commutation makes the
//! induced function on R^{2n+2} invariant under the phase circle, so the
//! lift to the ambient space is just the term itself (each term is
//! already quadratic in y).

use std::f64::consts::PI;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::loops::{j_mul, FourierLoop, ProductPoint};

/// Symmetric quadratic form y -> y^T Q y on R^{2n+2}, required to commute
/// with the blockwise complex structure.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QuadraticForm {
    dim: usize,
    /// Row-major dim x dim matrix.
    mat: Vec<f64>,
}

impl QuadraticForm {
    pub fn new(dim: usize, mat: Vec<f64>) -> Result<Self> {
        if mat.len() != dim * dim {
            return Err(CoreError::FormSize {
                expected: dim,
                got: mat.len(),
            });
        }
        let q = QuadraticForm { dim, mat };
        q.validate()?;
        Ok(q)
    }

    pub fn identity(dim: usize) -> Self {
        let mut mat = vec![0.0; dim * dim];
        for i in 0..dim {
            mat[i * dim + i] = 1.0;
        }
        QuadraticForm { dim, mat }
    }

    /// Blockwise-constant diagonal form: entry i of `pairs` weights the
    /// coordinate pair (2i, 2i+1). Always commutes with J.
    pub fn block_diagonal(pairs: &[f64]) -> Self {
        let dim = 2 * pairs.len();
        let mut mat = vec![0.0; dim * dim];
        for (i, &w) in pairs.iter().enumerate() {
            mat[(2 * i) * dim + 2 * i] = w;
            mat[(2 * i + 1) * dim + 2 * i + 1] = w;
        }
        QuadraticForm { dim, mat }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dim;
        let mut asym: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                asym = asym.max((self.mat[i * d + j] - self.mat[j * d + i]).abs());
            }
        }
        if asym > 1e-12 {
            return Err(CoreError::AsymmetricForm(asym));
        }
        // (QJ)_{ij} vs (JQ)_{ij} with J(e_{2k}) = e_{2k+1}, J(e_{2k+1}) = -e_{2k}:
        // column action: (QJ)[:, 2k] = Q[:, 2k+1] * (-1)? Work entrywise below.
        let mut comm: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                // (Q J) e_j = Q (J e_j)
                let qj = if j % 2 == 0 {
                    self.mat[i * d + (j + 1)]
                } else {
                    -self.mat[i * d + (j - 1)]
                };
                // (J Q) e_j: apply J to column Q e_j
                let jq = if i % 2 == 0 {
                    -self.mat[(i + 1) * d + j]
                } else {
                    self.mat[(i - 1) * d + j]
                };
                comm = comm.max((qj - jq).abs());
            }
        }
        if comm > 1e-12 {
            return Err(CoreError::NonInvariantForm(comm));
        }
        Ok(())
    }

    /// y^T Q y.
    pub fn eval(&self, y: &[f64]) -> f64 {
        let d = self.dim;
        let mut acc = 0.0;
        for i in 0..d {
            let mut row = 0.0;
            for j in 0..d {
                row += self.mat[i * d + j] * y[j];
            }
            acc += y[i] * row;
        }
        acc
    }

    /// out += s * Q y (used for gradients; the y-gradient of a term is 2 Q y).
    pub fn accumulate(&self, s: f64, y: &[f64], out: &mut [f64]) {
        let d = self.dim;
        for i in 0..d {
            let mut row = 0.0;
            for j in 0..d {
                row += self.mat[i * d + j] * y[j];
            }
            out[i] += s * row;
        }
    }
}

/// One parametric term of a Hamiltonian.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrigTerm {
    pub amplitude: f64,
    pub freq_t: i64,
    pub freq_x: Vec<i64>,
    #[serde(default)]
    pub phase: f64,
    pub form: QuadraticForm,
}

/// A Hamiltonian on T x T^{2m} x CP^n in the closed parametric family.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HamiltonianSpec {
    pub m: usize,
    pub n: usize,
    pub terms: Vec<TrigTerm>,
}

impl HamiltonianSpec {
    pub fn zero(m: usize, n: usize) -> Self {
        HamiltonianSpec {
            m,
            n,
            terms: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for term in &self.terms {
            if term.freq_x.len() != 2 * self.m {
                return Err(CoreError::FrequencySize {
                    expected: 2 * self.m,
                    got: term.freq_x.len(),
                });
            }
            if term.form.dim() != 2 * self.n + 2 {
                return Err(CoreError::FormSize {
                    expected: 2 * self.n + 2,
                    got: term.form.mat.len(),
                });
            }
            term.form.validate()?;
        }
        Ok(())
    }
}

/// The quadratic, phase-invariant, Z^{2m}-periodic extension of a
/// `HamiltonianSpec` to T x R^{2m} x R^{2n+2}, with exact gradients.
#[derive(Clone, Debug, Serialize)]
pub struct LiftedHamiltonian {
    spec: HamiltonianSpec,
}

/// Builds the quadratic extension, rejecting specs whose forms fail the
/// J-commutation test (those would not descend from CP^n).
pub fn lift(spec: HamiltonianSpec) -> Result<LiftedHamiltonian> {
    spec.validate()?;
    Ok(LiftedHamiltonian { spec })
}

impl LiftedHamiltonian {
    pub fn spec(&self) -> &HamiltonianSpec {
        &self.spec
    }

    pub fn m(&self) -> usize {
        self.spec.m
    }

    pub fn n(&self) -> usize {
        self.spec.n
    }

    pub fn is_zero(&self) -> bool {
        self.spec.terms.is_empty()
    }

    fn term_angle(term: &TrigTerm, t: f64, x: &[f64]) -> f64 {
        let mut arg = term.freq_t as f64 * t;
        for (nu, xi) in term.freq_x.iter().zip(x) {
            arg += *nu as f64 * xi;
        }
        2.0 * PI * arg + term.phase
    }

    pub fn eval(&self, t: f64, x: &[f64], y: &[f64]) -> f64 {
        self.spec
            .terms
            .iter()
            .map(|term| term.amplitude * Self::term_angle(term, t, x).cos() * term.form.eval(y))
            .sum()
    }

    /// Writes the partial gradients of `eval` into `gx` (length 2m) and
    /// `gy` (length 2n+2). Exact analytic differentiation per term.
    pub fn grad_into(&self, t: f64, x: &[f64], y: &[f64], gx: &mut [f64], gy: &mut [f64]) {
        gx.fill(0.0);
        gy.fill(0.0);
        for term in &self.spec.terms {
            let arg = Self::term_angle(term, t, x);
            let (s, c) = arg.sin_cos();
            let q = term.form.eval(y);
            let wx = -term.amplitude * s * 2.0 * PI * q;
            for (g, nu) in gx.iter_mut().zip(&term.freq_x) {
                *g += wx * *nu as f64;
            }
            term.form.accumulate(2.0 * term.amplitude * c, y, gy);
        }
    }

    pub fn grad(&self, t: f64, x: &[f64], y: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut gx = vec![0.0; 2 * self.spec.m];
        let mut gy = vec![0.0; 2 * self.spec.n + 2];
        self.grad_into(t, x, y, &mut gx, &mut gy);
        (gx, gy)
    }

    /// Estimate of c = max{2 |H|, |horizontal y-gradient|} over the unit
    /// sphere in y, by deterministic grid search. The horizontal part
    /// removes the components along y and Jy, the directions collapsed by
    /// the phase quotient. `grid` points are used per circle direction
    /// (minimum 8; a multiple of 4 puts the extrema of pure sines on the
    /// grid). Returns the sampled maximum; multiply by
    /// [`SMALLNESS_SAFETY`] for the reported conservative value.
    pub fn smallness_constant(&self, grid: usize) -> Result<f64> {
        if grid < 8 {
            return Err(CoreError::GridTooCoarse(grid, 8));
        }
        if self.is_zero() {
            return Ok(0.0);
        }
        let m = self.spec.m;
        let dy = 2 * self.spec.n + 2;

        // (t, x) sample set: full product grid while affordable, otherwise
        // a seeded uniform sample of the same cardinality budget.
        let budget = 200_000usize;
        let full = (grid as u128).checked_pow(2 * m as u32 + 1).map(|c| c <= budget as u128);
        let mut tx: Vec<(f64, Vec<f64>)> = Vec::new();
        if full == Some(true) {
            let mut idx = vec![0usize; 2 * m + 1];
            loop {
                let t = idx[0] as f64 / grid as f64;
                let x: Vec<f64> = idx[1..].iter().map(|&i| i as f64 / grid as f64).collect();
                tx.push((t, x));
                let mut carry = 2 * m;
                loop {
                    idx[carry] += 1;
                    if idx[carry] < grid {
                        break;
                    }
                    idx[carry] = 0;
                    if carry == 0 {
                        break;
                    }
                    carry -= 1;
                }
                if idx.iter().all(|&i| i == 0) {
                    break;
                }
            }
        } else {
            let mut rng = ChaCha20Rng::seed_from_u64(grid as u64);
            for _ in 0..budget {
                let t = rng.gen::<f64>();
                let x: Vec<f64> = (0..2 * m).map(|_| rng.gen::<f64>()).collect();
                tx.push((t, x));
            }
        }

        // y sample set on the unit sphere: coordinate axes, pair mixtures,
        // and a seeded random batch.
        let mut ys: Vec<Vec<f64>> = Vec::new();
        for i in 0..dy {
            let mut e = vec![0.0; dy];
            e[i] = 1.0;
            ys.push(e);
        }
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        for i in 0..dy {
            for j in (i + 1)..dy {
                for sign in [1.0, -1.0] {
                    let mut e = vec![0.0; dy];
                    e[i] = inv_sqrt2;
                    e[j] = sign * inv_sqrt2;
                    ys.push(e);
                }
            }
        }
        let mut rng = ChaCha20Rng::seed_from_u64(0x9a11);
        for _ in 0..(8 * grid) {
            let mut v: Vec<f64> = (0..dy).map(|_| rng.sample::<f64, _>(rand_distr_standard())).collect();
            let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            if norm < 1e-9 {
                continue;
            }
            for a in &mut v {
                *a /= norm;
            }
            ys.push(v);
        }

        let mut gx = vec![0.0; 2 * m];
        let mut gy = vec![0.0; dy];
        let mut jy = vec![0.0; dy];
        let mut c: f64 = 0.0;
        for (t, x) in &tx {
            for y in &ys {
                let h = self.eval(*t, x, y);
                c = c.max(2.0 * h.abs());
                self.grad_into(*t, x, y, &mut gx, &mut gy);
                j_mul(y, &mut jy);
                let ry: f64 = gy.iter().zip(y).map(|(g, v)| g * v).sum();
                let rj: f64 = gy.iter().zip(&jy).map(|(g, v)| g * v).sum();
                let tang: f64 = gy
                    .iter()
                    .zip(y.iter().zip(&jy))
                    .map(|(g, (v, w))| {
                        let h = g - ry * v - rj * w;
                        h * h
                    })
                    .sum::<f64>()
                    .sqrt();
                c = c.max(tang);
            }
        }
        Ok(c)
    }
}

/// Safety factor applied to grid-searched sup norms in reports.
pub const SMALLNESS_SAFETY: f64 = 1.1;

// Small shim so we don't pull in rand_distr for one Gaussian.
fn rand_distr_standard() -> impl rand::distributions::Distribution<f64> {
    struct BoxMuller;
    impl rand::distributions::Distribution<f64> for BoxMuller {
        fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
            let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
            let u2: f64 = rng.gen::<f64>();
            (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
        }
    }
    BoxMuller
}

/// Small two-frequency benchmark Hamiltonian on T^2 x CP^1:
/// (0.06 cos(2 pi x_1) + 0.04 cos(2 pi x_2)) y^T Q y with
/// Q = blockdiag(1, 0.8). Its smallness constant is exactly 0.2 (attained
/// at x = 0, y on the first block axis), every rest point is a constant
/// loop with x in {0, 1/2}^2 and y on a block axis, and the unequal
/// amplitudes and block weights make all eight circle families isolated
/// in the quotient.
pub fn benchmark_spec() -> HamiltonianSpec {
    let q = QuadraticForm::block_diagonal(&[1.0, 0.8]);
    HamiltonianSpec {
        m: 1,
        n: 1,
        terms: vec![
            TrigTerm {
                amplitude: 0.06,
                freq_t: 0,
                freq_x: vec![1, 0],
                phase: 0.0,
                form: q.clone(),
            },
            TrigTerm {
                amplitude: 0.04,
                freq_t: 0,
                freq_x: vec![0, 1],
                phase: 0.0,
                form: q,
            },
        ],
    }
}

/// The exact rest points of `benchmark_spec` in any truncation: constant
/// loops indexed by the corner of {0, 1/2}^2 and the block axis (0 or 1),
/// with lambda = f(x) q_block / pi.
pub fn benchmark_families(max_mode: usize) -> Vec<ProductPoint> {
    let qs = [1.0, 0.8];
    let mut out = Vec::new();
    for corner in 0..4usize {
        let x0 = [
            0.5 * (corner & 1) as f64,
            0.5 * ((corner >> 1) & 1) as f64,
        ];
        let f = 0.06 * (2.0 * PI * x0[0]).cos() + 0.04 * (2.0 * PI * x0[1]).cos();
        for (block, q) in qs.iter().enumerate() {
            let mut e = vec![0.0; 4];
            e[2 * block] = 1.0;
            out.push(ProductPoint::new(
                FourierLoop::constant(&x0, max_mode),
                FourierLoop::constant(&e, max_mode),
                f * q / PI,
            ));
        }
    }
    out
}

/// The resonant Hamiltonian (pi/2) sin(2 pi x_1) |y|^2, the standard
/// witness that the endpoint transversality bound fails once c reaches pi.
pub fn resonant_spec(m: usize, n: usize) -> HamiltonianSpec {
    let mut freq_x = vec![0i64; 2 * m];
    freq_x[0] = 1;
    HamiltonianSpec {
        m,
        n,
        terms: vec![TrigTerm {
            amplitude: PI / 2.0,
            freq_t: 0,
            freq_x,
            phase: -PI / 2.0, // cos(theta - pi/2) = sin(theta)
            form: QuadraticForm::identity(2 * n + 2),
        }],
    }
}

/// Exact twisted solutions of the resonant Hamiltonian: x constant with
/// sin(2 pi x_1) = 2(k + lambda), y the single mode k with a unit
/// coefficient. Fails when |2(k + lambda)| > 1.
pub fn resonant_family(
    m: usize,
    n: usize,
    max_mode: usize,
    k: i64,
    lambda: f64,
) -> Result<ProductPoint> {
    let v = 2.0 * (k as f64 + lambda);
    if v.abs() > 1.0 {
        return Err(CoreError::NoRealAngle(v.abs()));
    }
    if k.unsigned_abs() as usize > max_mode {
        return Err(CoreError::InvalidParameter(format!(
            "mode {k} outside the truncation window {max_mode}"
        )));
    }
    let mut x0 = vec![0.0; 2 * m];
    x0[0] = v.asin() / (2.0 * PI);
    let x = FourierLoop::constant(&x0, max_mode);
    let mut e1 = vec![0.0; 2 * n + 2];
    e1[0] = 1.0;
    let y = FourierLoop::single_mode(k, &e1, max_mode);
    Ok(ProductPoint::new(x, y, lambda))
}
