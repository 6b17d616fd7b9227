//! Finite Zak transform on C^L with split L = N*M, quasi-periodic grid
//! extension, Zak images of time-frequency shifts, and analytic Zak
//! evaluation for the cataloged continuous windows.
//!
//! Grids carry values over the Zak cell [0,1)^{2d} at a per-axis rational
//! resolution; the finite model is the d = 1 grid at resolution (N, M)
//! with one continuous time unit = N samples and one frequency unit = M
//! bins.

use crate::qmat::Rat;
use num::bigint::BigInt;
use num::complex::Complex64;
use num::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ZakError {
    #[error("vector length {got} does not match L = {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("N = {n} does not divide L = {l}")]
    BadSplit { l: usize, n: usize },
    #[error("continuous-mode grid has no sample-domain inverse")]
    ContinuousMode,
    #[error("point is not on the extended grid")]
    OffGrid,
    #[error("unknown window kind for this operation")]
    UnsupportedWindow,
    #[error("requested tolerance unreachable: {0}")]
    ToleranceUnreachable(String),
    #[error("incompatible resampling: {0}")]
    IncompatibleResampling(String),
    #[error("invalid window: {0}")]
    InvalidWindow(String),
}

/// Ambient split L = N*M of the finite model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZakSplit {
    pub l: usize,
    pub n: usize,
    pub m: usize,
}

impl ZakSplit {
    pub fn new(l: usize, n: usize) -> Result<Self, ZakError> {
        if l == 0 || n == 0 || !l.is_multiple_of(n) {
            return Err(ZakError::BadSplit { l, n });
        }
        Ok(ZakSplit { l, n, m: l / n })
    }
}

/// Complex values on a uniform rational grid of the Zak cell, with the
/// quasi-periodic extension rule. `res` lists node counts per axis, time
/// axes first; finite-mode grids are d = 1 with `res = [N, M]`.
#[derive(Debug, Clone)]
pub struct ZakGrid {
    res: Vec<usize>,
    values: Vec<Complex64>,
    split: Option<ZakSplit>,
    zero_tol: f64,
}

pub const DEFAULT_REL_TOL: f64 = 1e-9;

impl ZakGrid {
    pub fn new(res: Vec<usize>, values: Vec<Complex64>) -> Self {
        assert_eq!(res.len() % 2, 0, "axes come in time/frequency pairs");
        assert_eq!(values.len(), res.iter().product::<usize>());
        let mut g = ZakGrid {
            res,
            values,
            split: None,
            zero_tol: 0.0,
        };
        g.zero_tol = DEFAULT_REL_TOL * g.max_abs();
        g
    }

    pub fn new_finite(split: ZakSplit, values: Vec<Complex64>) -> Self {
        let mut g = ZakGrid::new(vec![split.n, split.m], values);
        g.split = Some(split);
        g
    }

    pub fn res(&self) -> &[usize] {
        &self.res
    }

    pub fn half_dim(&self) -> usize {
        self.res.len() / 2
    }

    pub fn split(&self) -> Option<ZakSplit> {
        self.split
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn zero_tol(&self) -> f64 {
        self.zero_tol
    }

    pub fn set_zero_tol(&mut self, tol: f64) {
        self.zero_tol = tol;
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn node_count(&self) -> usize {
        self.values.len()
    }

    pub fn flat(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.res.len());
        idx.iter()
            .zip(self.res.iter())
            .fold(0, |acc, (&i, &r)| acc * r + i)
    }

    pub fn unflatten(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0usize; self.res.len()];
        for k in (0..self.res.len()).rev() {
            idx[k] = flat % self.res[k];
            flat /= self.res[k];
        }
        idx
    }

    pub fn value(&self, idx: &[usize]) -> Complex64 {
        self.values[self.flat(idx)]
    }

    /// Rational coordinates of a node.
    pub fn coord(&self, idx: &[usize]) -> Vec<Rat> {
        idx.iter()
            .zip(self.res.iter())
            .map(|(&i, &r)| Rat::new(BigInt::from(i), BigInt::from(r)))
            .collect()
    }

    /// Quasi-periodic evaluation at an arbitrary integer index vector:
    /// frequency axes reduce periodically, each unit wrap of time axis k
    /// contributes the phase e^{2 pi i w_k . omega_k}.
    pub fn extend_idx(&self, idx: &[isize]) -> Complex64 {
        let (flat, phase) = self.reduce_idx(idx);
        self.values[flat] * phase_to_complex(&phase)
    }

    /// Reduces an extended index to (flat cell index, rational phase).
    pub fn reduce_idx(&self, idx: &[isize]) -> (usize, Rat) {
        debug_assert_eq!(idx.len(), self.res.len());
        let d = self.half_dim();
        let mut reduced = vec![0usize; idx.len()];
        // Frequency axes first: pure periodicity.
        for k in d..2 * d {
            reduced[k] = idx[k].rem_euclid(self.res[k] as isize) as usize;
        }
        // Time axes: wrap count w picks up phase w * omega.
        let mut phase = Rat::zero();
        for k in 0..d {
            let r = self.res[k] as isize;
            let w = idx[k].div_euclid(r);
            reduced[k] = idx[k].rem_euclid(r) as usize;
            if w != 0 {
                phase += Rat::new(
                    BigInt::from(w) * BigInt::from(reduced[d + k]),
                    BigInt::from(self.res[d + k]),
                );
            }
        }
        (self.flat(&reduced), phase)
    }

    /// Frobenius norm of the grid values.
    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Boolean support pattern classified by the zero tolerance.
    pub fn support(&self) -> Vec<bool> {
        self.values
            .iter()
            .map(|v| v.norm() > self.zero_tol)
            .collect()
    }
}

/// CSV export of a d = 1 grid: header `x,omega,re,im`, row-major nodes,
/// values as decimals with 17 significant digits.
pub fn grid_to_csv(grid: &ZakGrid) -> Result<String, ZakError> {
    if grid.half_dim() != 1 {
        return Err(ZakError::UnsupportedWindow);
    }
    let mut out = String::from("x,omega,re,im\n");
    for flat in 0..grid.node_count() {
        let idx = grid.unflatten(flat);
        let coords = grid.coord(&idx);
        let v = grid.values()[flat];
        out.push_str(&format!(
            "{},{},{},{}\n",
            sig17(coords[0].to_f64().expect("finite")),
            sig17(coords[1].to_f64().expect("finite")),
            sig17(v.re),
            sig17(v.im)
        ));
    }
    Ok(out)
}

/// 17 significant digits, deterministic.
pub fn sig17(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn phase_to_complex(t: &Rat) -> Complex64 {
    let theta = 2.0 * PI * t.to_f64().expect("finite rational");
    Complex64::new(theta.cos(), theta.sin())
}

/// Phase e^{2 pi i k / den} from an integer pair, exact at the rational
/// level before the single trig evaluation.
pub fn unit_root(num: i64, den: i64) -> Complex64 {
    phase_to_complex(&Rat::new(BigInt::from(num), BigInt::from(den)))
}

/// Finite Zak transform: Zf(x, w) = M^{-1/2} sum_k f(x + kN) e^{-2 pi i k w / M}.
/// Unitary from C^L onto the N x M cell.
pub fn finite_zak(f: &[Complex64], split: ZakSplit) -> Result<ZakGrid, ZakError> {
    if f.len() != split.l {
        return Err(ZakError::LengthMismatch {
            expected: split.l,
            got: f.len(),
        });
    }
    let (n, m) = (split.n, split.m);
    let scale = 1.0 / (m as f64).sqrt();
    let mut values = vec![Complex64::zero(); n * m];
    for x in 0..n {
        for w in 0..m {
            let mut acc = Complex64::zero();
            for k in 0..m {
                let sample = f[(x + k * n) % split.l];
                acc += sample * unit_root(-((k * w) as i64), m as i64);
            }
            values[x * m + w] = acc * scale;
        }
    }
    Ok(ZakGrid::new_finite(split, values))
}

/// Inverse of `finite_zak`: f(x + kN) = M^{-1/2} sum_w Zf(x, w) e^{2 pi i k w / M}.
pub fn inverse_finite_zak(grid: &ZakGrid) -> Result<Vec<Complex64>, ZakError> {
    let split = grid.split().ok_or(ZakError::ContinuousMode)?;
    let (n, m) = (split.n, split.m);
    let scale = 1.0 / (m as f64).sqrt();
    let mut f = vec![Complex64::zero(); split.l];
    for x in 0..n {
        for k in 0..m {
            let mut acc = Complex64::zero();
            for w in 0..m {
                acc += grid.value(&[x, w]) * unit_root((k * w) as i64, m as i64);
            }
            f[x + k * n] = acc * scale;
        }
    }
    Ok(f)
}

/// Time-frequency shift on C^L: (pi(u, eta) f)(x) = e^{2 pi i eta x / L} f(x - u).
pub fn tf_shift(f: &[Complex64], u: i64, eta: i64) -> Vec<Complex64> {
    let l = f.len() as i64;
    (0..l)
        .map(|x| {
            let src = (x - u).rem_euclid(l) as usize;
            f[src] * unit_root((eta * x).rem_euclid(l), l)
        })
        .collect()
}

/// Zak image of the time-frequency shift by (u, eta) samples:
/// Z[pi(u,eta) f](x, w) = e^{2 pi i eta x / L} Zf(x - u, w - eta).
pub fn zak_shift_image(grid: &ZakGrid, u: i64, eta: i64) -> Result<ZakGrid, ZakError> {
    let split = grid.split().ok_or(ZakError::ContinuousMode)?;
    let (n, m, l) = (split.n as i64, split.m as i64, split.l as i64);
    let mut values = vec![Complex64::zero(); (n * m) as usize];
    for x in 0..n {
        for w in 0..m {
            let shifted = grid.extend_idx(&[(x - u) as isize, (w - eta) as isize]);
            let phase = unit_root((eta * x).rem_euclid(l), l);
            values[(x * m + w) as usize] = phase * shifted;
        }
    }
    Ok(ZakGrid::new_finite(split, values))
}

/// Window descriptions accepted by the analytic and finite pipelines.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WindowSpec {
    Indicator {
        /// Support width of chi_[0, width); 1 unless rescaled.
        #[serde(default = "one_rat", skip_serializing_if = "is_one_rat")]
        width: f64,
        #[serde(default = "one_f64", skip_serializing_if = "is_one_f64")]
        amplitude: f64,
    },
    Gaussian {
        sigma: f64,
    },
    FiniteVector {
        #[serde(rename = "L")]
        l: usize,
        values: Vec<[f64; 2]>,
    },
    ExplicitZak {
        #[serde(rename = "P")]
        p: usize,
        #[serde(rename = "Q")]
        q: usize,
        values: Vec<[f64; 2]>,
    },
}

fn one_rat() -> f64 {
    1.0
}
fn is_one_rat(x: &f64) -> bool {
    *x == 1.0
}
fn one_f64() -> f64 {
    1.0
}
fn is_one_f64(x: &f64) -> bool {
    *x == 1.0
}

impl WindowSpec {
    pub fn indicator() -> Self {
        WindowSpec::Indicator {
            width: 1.0,
            amplitude: 1.0,
        }
    }

    pub fn validate(&self) -> Result<(), ZakError> {
        let check = |x: f64, what: &str| -> Result<(), ZakError> {
            if !x.is_finite() {
                Err(ZakError::InvalidWindow(format!("{what} must be finite")))
            } else {
                Ok(())
            }
        };
        match self {
            WindowSpec::Indicator { width, amplitude } => {
                check(*width, "width")?;
                check(*amplitude, "amplitude")?;
                if *width <= 0.0 {
                    return Err(ZakError::InvalidWindow("width must be positive".into()));
                }
                Ok(())
            }
            WindowSpec::Gaussian { sigma } => {
                check(*sigma, "sigma")?;
                if *sigma <= 0.0 {
                    return Err(ZakError::InvalidWindow("sigma must be positive".into()));
                }
                Ok(())
            }
            WindowSpec::FiniteVector { l, values } => {
                if values.len() != *l {
                    return Err(ZakError::InvalidWindow(format!(
                        "values: expected {l} entries, got {}",
                        values.len()
                    )));
                }
                for (i, v) in values.iter().enumerate() {
                    if !v[0].is_finite() || !v[1].is_finite() {
                        return Err(ZakError::InvalidWindow(format!(
                            "values[{i}]: entries must be finite"
                        )));
                    }
                }
                Ok(())
            }
            WindowSpec::ExplicitZak { p, q, values } => {
                if values.len() != p * q {
                    return Err(ZakError::InvalidWindow(format!(
                        "values: expected {} entries, got {}",
                        p * q,
                        values.len()
                    )));
                }
                for (i, v) in values.iter().enumerate() {
                    if !v[0].is_finite() || !v[1].is_finite() {
                        return Err(ZakError::InvalidWindow(format!(
                            "values[{i}]: entries must be finite"
                        )));
                    }
                }
                Ok(())
            }
        }
    }

    pub fn finite_vector(&self) -> Option<Vec<Complex64>> {
        match self {
            WindowSpec::FiniteVector { values, .. } => {
                Some(values.iter().map(|v| Complex64::new(v[0], v[1])).collect())
            }
            _ => None,
        }
    }
}

/// Analytic Zak transform of a cataloged window on a (P, Q) grid of the
/// d = 1 Zak cell. The indicator satisfies Z chi = 1 identically; the
/// Gaussian uses a truncated quasi-periodization with tail below 1e-15.
pub fn analytic_zak(spec: &WindowSpec, p: usize, q: usize) -> Result<ZakGrid, ZakError> {
    spec.validate()?;
    assert!(p >= 1 && q >= 1);
    match spec {
        WindowSpec::Indicator { width, amplitude } => {
            let mut values = vec![Complex64::zero(); p * q];
            for ix in 0..p {
                let x = ix as f64 / p as f64;
                for iw in 0..q {
                    // Sum over k >= 0 with x + k < width of e^{-2 pi i k w}.
                    let mut acc = Complex64::zero();
                    let mut k = 0i64;
                    while x + (k as f64) < *width {
                        acc += unit_root((-k * iw as i64).rem_euclid(q as i64), q as i64);
                        k += 1;
                    }
                    values[ix * q + iw] = acc * *amplitude;
                }
            }
            Ok(ZakGrid::new(vec![p, q], values))
        }
        WindowSpec::Gaussian { sigma } => {
            let k_max = gaussian_truncation(*sigma)?;
            let norm = (std::f64::consts::SQRT_2 / sigma).sqrt();
            let phi = |t: f64| norm * (-PI * t * t / (sigma * sigma)).exp();
            let mut values = vec![Complex64::zero(); p * q];
            for ix in 0..p {
                let x = ix as f64 / p as f64;
                for iw in 0..q {
                    let mut acc = Complex64::zero();
                    for k in -k_max..=k_max {
                        acc += phi(x + k as f64)
                            * unit_root((-k * iw as i64).rem_euclid(q as i64), q as i64);
                    }
                    values[ix * q + iw] = acc;
                }
            }
            Ok(ZakGrid::new(vec![p, q], values))
        }
        WindowSpec::ExplicitZak {
            p: sp,
            q: sq,
            values,
        } => {
            if *sp != p || *sq != q {
                return Err(ZakError::InvalidWindow(format!(
                    "explicit grid is {sp}x{sq}, requested {p}x{q}"
                )));
            }
            Ok(ZakGrid::new(
                vec![p, q],
                values.iter().map(|v| Complex64::new(v[0], v[1])).collect(),
            ))
        }
        WindowSpec::FiniteVector { .. } => Err(ZakError::UnsupportedWindow),
    }
}

/// Smallest K whose tail bound sum_{|k|>K} e^{-pi (k-1)^2 / sigma^2} falls
/// below 1e-15.
fn gaussian_truncation(sigma: f64) -> Result<i64, ZakError> {
    let target = 1e-15;
    let term = |k: f64| (-PI * (k - 1.0) * (k - 1.0) / (sigma * sigma)).exp();
    for k in 1..1_000_000i64 {
        // Geometric-style remainder bound past k.
        let t = term(k as f64 + 1.0);
        let ratio = term(k as f64 + 2.0) / t;
        if ratio < 1.0 && 2.0 * t / (1.0 - ratio) < target {
            return Ok(k);
        }
    }
    Err(ZakError::ToleranceUnreachable(format!(
        "gaussian sigma = {sigma}"
    )))
}

/// Dilated window alpha^{1/2} phi(alpha .), mapping lattices inside
/// alpha Z x (1/alpha) Z to integer lattices for the dilated window.
pub fn rescale(spec: &WindowSpec, alpha: &Rat) -> Result<WindowSpec, ZakError> {
    spec.validate()?;
    if alpha <= &Rat::zero() {
        return Err(ZakError::InvalidWindow("alpha must be positive".into()));
    }
    let a = alpha.to_f64().expect("finite");
    match spec {
        WindowSpec::Indicator { width, amplitude } => Ok(WindowSpec::Indicator {
            width: width / a,
            amplitude: amplitude * a.sqrt(),
        }),
        WindowSpec::Gaussian { sigma } => Ok(WindowSpec::Gaussian { sigma: sigma / a }),
        WindowSpec::FiniteVector { l, values } => {
            let p = alpha.numer().to_i64().ok_or_else(|| {
                ZakError::IncompatibleResampling("alpha numerator too large".into())
            })?;
            let q = alpha.denom().to_i64().ok_or_else(|| {
                ZakError::IncompatibleResampling("alpha denominator too large".into())
            })?;
            if *l as i64 % q != 0 {
                return Err(ZakError::IncompatibleResampling(format!(
                    "denominator {q} of alpha does not divide L = {l}"
                )));
            }
            let old: Vec<Complex64> = values.iter().map(|v| Complex64::new(v[0], v[1])).collect();
            let old_norm = old.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            let mut new = vec![Complex64::zero(); *l];
            for (n, slot) in new.iter_mut().enumerate() {
                if n as i64 % q == 0 {
                    let src = ((n as i64 / q) * p).rem_euclid(*l as i64) as usize;
                    *slot = old[src];
                }
            }
            let new_norm = new.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if old_norm > 0.0 && new_norm == 0.0 {
                return Err(ZakError::IncompatibleResampling(
                    "resampled vector vanishes".into(),
                ));
            }
            if new_norm > 0.0 {
                let s = old_norm / new_norm;
                for z in &mut new {
                    *z *= s;
                }
            }
            Ok(WindowSpec::FiniteVector {
                l: *l,
                values: new.iter().map(|z| [z.re, z.im]).collect(),
            })
        }
        WindowSpec::ExplicitZak { .. } => Err(ZakError::IncompatibleResampling(
            "explicit Zak grids have no closed-form dilation".into(),
        )),
    }
}
