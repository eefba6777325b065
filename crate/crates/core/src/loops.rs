//! Truncated Fourier model of the loop space H^{1/2}(T, R^d).
//!
//! A loop is stored as coefficients of the real basis curves
//! t -> e^{2 pi k J t} q for modes k in {-K, ..., K}, where J is the
//! blockwise standard complex structure pairing coordinates (2i, 2i+1).
//! The basis is orthonormal in L^2, so the L^2 norm of a loop equals the
//! Euclidean norm of the stacked coefficient vectors, and the H^{1/2}
//! norm weights mode k by 2 pi |k|.

use std::f64::consts::PI;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

/// Applies the block rotation e^{theta J} to `src`, writing into `dst`.
pub fn rotate_block(theta: f64, src: &[f64], dst: &mut [f64]) {
    let (s, c) = theta.sin_cos();
    for i in (0..src.len()).step_by(2) {
        let (a, b) = (src[i], src[i + 1]);
        dst[i] = c * a - s * b;
        dst[i + 1] = s * a + c * b;
    }
}

/// Applies J in place: (a, b) -> (-b, a) on every coordinate pair.
pub fn j_mul(src: &[f64], dst: &mut [f64]) {
    for i in (0..src.len()).step_by(2) {
        dst[i] = -src[i + 1];
        dst[i + 1] = src[i];
    }
}

/// H^{1/2} weight of mode k: 1 for the zero mode, 2 pi |k| otherwise.
#[inline]
pub fn h_half_weight(k: i64) -> f64 {
    if k == 0 {
        1.0
    } else {
        2.0 * PI * k.unsigned_abs() as f64
    }
}

/// Number of equispaced samples used when a loop enters a nonlinearity.
/// Quadratic terms live below mode 2K, so N >= 4K + 4 prevents their
/// aliases from folding back into the retained window.
#[inline]
pub fn anti_alias_grid(max_mode: usize) -> usize {
    4 * max_mode + 4
}

/// A loop in R^d truncated to Fourier modes {-K, ..., K}, stored densely.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierLoop {
    dim: usize,
    max_mode: usize,
    /// (2K+1) * dim reals; mode k lives at offset (k + K) * dim.
    data: Vec<f64>,
}

impl FourierLoop {
    pub fn zeros(dim: usize, max_mode: usize) -> Self {
        assert!(dim >= 2 && dim % 2 == 0, "ambient dimension must be even");
        FourierLoop {
            dim,
            max_mode,
            data: vec![0.0; (2 * max_mode + 1) * dim],
        }
    }

    /// Constant loop with value `q`.
    pub fn constant(q: &[f64], max_mode: usize) -> Self {
        let mut l = Self::zeros(q.len(), max_mode);
        l.coeff_mut(0).copy_from_slice(q);
        l
    }

    /// Loop with a single mode `k` carrying coefficient `q`.
    pub fn single_mode(k: i64, q: &[f64], max_mode: usize) -> Self {
        let mut l = Self::zeros(q.len(), max_mode);
        l.coeff_mut(k).copy_from_slice(q);
        l
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn max_mode(&self) -> usize {
        self.max_mode
    }

    #[inline]
    fn offset(&self, k: i64) -> usize {
        debug_assert!(k.unsigned_abs() as usize <= self.max_mode);
        ((k + self.max_mode as i64) as usize) * self.dim
    }

    pub fn coeff(&self, k: i64) -> &[f64] {
        let o = self.offset(k);
        &self.data[o..o + self.dim]
    }

    pub fn coeff_mut(&mut self, k: i64) -> &mut [f64] {
        let o = self.offset(k);
        let d = self.dim;
        &mut self.data[o..o + d]
    }

    pub fn modes(&self) -> impl Iterator<Item = i64> + '_ {
        -(self.max_mode as i64)..=(self.max_mode as i64)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Pointwise value sum_k e^{2 pi k J t} q_k.
    pub fn eval(&self, t: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        let mut tmp = vec![0.0; self.dim];
        for k in self.modes() {
            rotate_block(2.0 * PI * k as f64 * t, self.coeff(k), &mut tmp);
            for (o, v) in out.iter_mut().zip(&tmp) {
                *o += v;
            }
        }
        out
    }

    /// Values on the uniform grid t_j = j/n, row-major with stride `dim`.
    pub fn sample_grid(&self, n: usize) -> Vec<f64> {
        let mut out = vec![0.0; n * self.dim];
        let mut tmp = vec![0.0; self.dim];
        for j in 0..n {
            let t = j as f64 / n as f64;
            for k in self.modes() {
                rotate_block(2.0 * PI * k as f64 * t, self.coeff(k), &mut tmp);
                let row = &mut out[j * self.dim..(j + 1) * self.dim];
                for (o, v) in row.iter_mut().zip(&tmp) {
                    *o += v;
                }
            }
        }
        out
    }

    /// Discrete Fourier analysis of `samples` (row-major, n rows) onto
    /// modes {-K, ..., K}. Inverse of `sample_grid` for band-limited data
    /// when n >= 2K + 1.
    pub fn analyze(dim: usize, max_mode: usize, samples: &[f64]) -> Self {
        assert!(samples.len() % dim == 0);
        let n = samples.len() / dim;
        assert!(n >= 2 * max_mode + 1, "grid too coarse for the window");
        let mut l = Self::zeros(dim, max_mode);
        let mut tmp = vec![0.0; dim];
        for k in -(max_mode as i64)..=(max_mode as i64) {
            let acc = l.coeff_mut(k);
            for j in 0..n {
                let t = j as f64 / n as f64;
                rotate_block(-2.0 * PI * k as f64 * t, &samples[j * dim..(j + 1) * dim], &mut tmp);
                for (a, v) in acc.iter_mut().zip(&tmp) {
                    *a += v;
                }
            }
            for a in acc.iter_mut() {
                *a /= n as f64;
            }
        }
        l
    }

    pub fn l2_norm_sq(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    pub fn h_half_norm_sq(&self) -> f64 {
        self.modes()
            .map(|k| h_half_weight(k) * self.coeff(k).iter().map(|v| v * v).sum::<f64>())
            .sum()
    }

    /// (H^{1/2} norm, L^2 norm).
    pub fn norms(&self) -> (f64, f64) {
        (self.h_half_norm_sq().sqrt(), self.l2_norm_sq().sqrt())
    }

    /// H^{1/2} norm of the mean-free part (zero mode dropped).
    pub fn h_half_norm_perp(&self) -> f64 {
        self.modes()
            .filter(|&k| k != 0)
            .map(|k| h_half_weight(k) * self.coeff(k).iter().map(|v| v * v).sum::<f64>())
            .sum::<f64>()
            .sqrt()
    }

    pub fn l2_inner(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        assert_eq!(self.max_mode, other.max_mode);
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    pub fn h_half_inner(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        assert_eq!(self.max_mode, other.max_mode);
        self.modes()
            .map(|k| {
                h_half_weight(k)
                    * self
                        .coeff(k)
                        .iter()
                        .zip(other.coeff(k))
                        .map(|(a, b)| a * b)
                        .sum::<f64>()
            })
            .sum()
    }

    /// L = positive modes kept, negative modes negated, zero mode killed.
    pub fn apply_l(&self) -> Self {
        let mut out = self.clone();
        for k in out.modes().collect::<Vec<_>>() {
            if k == 0 {
                out.coeff_mut(0).fill(0.0);
            } else if k < 0 {
                for v in out.coeff_mut(k) {
                    *v = -*v;
                }
            }
        }
        out
    }

    /// Adjoint of the inclusion L^2 -> H^{1/2}: zero mode fixed, mode k
    /// scaled by 1/(2 pi |k|).
    pub fn apply_jstar(&self) -> Self {
        let mut out = self.clone();
        for k in out.modes().collect::<Vec<_>>() {
            if k != 0 {
                let w = 1.0 / (2.0 * PI * k.unsigned_abs() as f64);
                for v in out.coeff_mut(k) {
                    *v *= w;
                }
            }
        }
        out
    }

    /// -J d/dt: mode k scaled by 2 pi k (an exact coefficient operation).
    pub fn neg_j_dt(&self) -> Self {
        let mut out = self.clone();
        for k in out.modes().collect::<Vec<_>>() {
            let w = 2.0 * PI * k as f64;
            for v in out.coeff_mut(k) {
                *v *= w;
            }
        }
        out
    }

    /// Global phase rotation: every coefficient replaced by e^{2 pi theta J} q_k.
    pub fn rotate_phase(&self, theta: f64) -> Self {
        let mut out = Self::zeros(self.dim, self.max_mode);
        for k in self.modes() {
            rotate_block(2.0 * PI * theta, self.coeff(k), out.coeff_mut(k));
        }
        out
    }

    /// Zeroes all modes outside {-k, ..., l}. Idempotent.
    pub fn truncate(&self, k: usize, l: usize) -> Self {
        let mut out = self.clone();
        for mode in out.modes().collect::<Vec<_>>() {
            if mode < -(k as i64) || mode > l as i64 {
                out.coeff_mut(mode).fill(0.0);
            }
        }
        out
    }

    /// Re-embeds into a (possibly different) truncation window, dropping
    /// or zero-padding modes as needed.
    pub fn with_max_mode(&self, max_mode: usize) -> Self {
        let mut out = Self::zeros(self.dim, max_mode);
        let kk = self.max_mode.min(max_mode) as i64;
        for k in -kk..=kk {
            out.coeff_mut(k).copy_from_slice(self.coeff(k));
        }
        out
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        for v in &mut out.data {
            *v *= s;
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.axpy(1.0, other);
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }

    /// self += a * other.
    pub fn axpy(&mut self, a: f64, other: &Self) {
        assert_eq!(self.dim, other.dim);
        assert_eq!(self.max_mode, other.max_mode);
        for (s, o) in self.data.iter_mut().zip(&other.data) {
            *s += a * o;
        }
    }
}

// Reports carry loops as flat (mode, coefficient-vector) records.
impl Serialize for FourierLoop {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Rec<'a> {
            mode: i64,
            coeff: &'a [f64],
        }
        let recs: Vec<Rec> = self
            .modes()
            .filter(|&k| self.coeff(k).iter().any(|v| *v != 0.0))
            .map(|k| Rec {
                mode: k,
                coeff: self.coeff(k),
            })
            .collect();
        let mut st = serializer.serialize_struct("FourierLoop", 3)?;
        st.serialize_field("dim", &self.dim)?;
        st.serialize_field("max_mode", &self.max_mode)?;
        st.serialize_field("coeffs", &recs)?;
        st.end()
    }
}

/// A point (x, y, lambda) of the extended phase space: x is the torus
/// loop (dim 2m, zero mode taken modulo Z^{2m}), y the sphere-direction
/// loop (dim 2n+2), lambda the twist parameter.
#[derive(Clone, Debug, Serialize)]
pub struct ProductPoint {
    pub x: FourierLoop,
    pub y: FourierLoop,
    pub lambda: f64,
}

impl ProductPoint {
    pub fn new(x: FourierLoop, y: FourierLoop, lambda: f64) -> Self {
        assert_eq!(x.max_mode(), y.max_mode(), "mismatched truncation levels");
        ProductPoint { x, y, lambda }
    }

    pub fn max_mode(&self) -> usize {
        self.x.max_mode()
    }

    pub fn with_max_mode(&self, max_mode: usize) -> Self {
        ProductPoint {
            x: self.x.with_max_mode(max_mode),
            y: self.y.with_max_mode(max_mode),
            lambda: self.lambda,
        }
    }

    /// Distance on the quotient by the y-phase circle and the integer
    /// translations of the x zero mode. The optimal phase is computed in
    /// closed form: <p.y, R_theta q.y> = A cos(2 pi theta) + B sin(2 pi theta)
    /// with A, B fixed inner products, so the minimum over theta is exact.
    pub fn quotient_distance(&self, other: &Self) -> f64 {
        assert_eq!(self.max_mode(), other.max_mode());
        // Best integer shift of the x zero mode, coordinatewise.
        let mut dx = self.x.sub(&other.x);
        {
            let z = dx.coeff_mut(0);
            for v in z.iter_mut() {
                *v -= v.round();
            }
        }
        let dx2 = dx.h_half_norm_sq();

        let a = self.y.h_half_inner(&other.y);
        let mut jy = other.y.clone();
        {
            let dim = jy.dim();
            let mut tmp = vec![0.0; dim];
            for k in jy.modes().collect::<Vec<_>>() {
                j_mul(other.y.coeff(k), &mut tmp);
                jy.coeff_mut(k).copy_from_slice(&tmp);
            }
        }
        let b = self.y.h_half_inner(&jy);
        let best = (a * a + b * b).sqrt();
        let dy2 = (self.y.h_half_norm_sq() + other.y.h_half_norm_sq() - 2.0 * best).max(0.0);

        let dl = self.lambda - other.lambda;
        (dx2 + dy2 + dl * dl).sqrt()
    }
}
