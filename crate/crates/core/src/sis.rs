//! Finite Fourier-model counterpart of the shift-invariant-space theory,
//! for side-by-side comparison with the Gabor results: SIS membership via
//! periodic symbols, the extra-invariance zero-pattern condition on
//! annihilator orbits, and full translation invariance.

use crate::finite_gabor::{space_basis, tf_shift, vec_norm, SubspaceBasis};
use crate::zak::unit_root;
use nalgebra::DMatrix;
use num::complex::Complex64;
use num::Zero;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SisError {
    #[error("shift step {p} does not divide L = {l}")]
    BadShift { l: usize, p: usize },
    #[error("finer step {q} must divide the base step {p}")]
    NotFiner { p: usize, q: usize },
    #[error("generator length {got} does not match L = {expected}")]
    LengthMismatch { expected: usize, got: usize },
}

/// Shift-invariant model on C^L: generator phi and shift lattice p Z_L,
/// with the annihilator (L/p) Z_L cached implicitly through `r()`.
#[derive(Debug, Clone)]
pub struct FiniteSISModel {
    pub l: usize,
    pub p: usize,
    generator: Vec<Complex64>,
    spectrum: Vec<Complex64>,
}

/// Unitary DFT: f_hat(xi) = L^{-1/2} sum_x f(x) e^{-2 pi i x xi / L}.
pub fn dft(f: &[Complex64]) -> Vec<Complex64> {
    let l = f.len();
    let scale = 1.0 / (l as f64).sqrt();
    (0..l)
        .map(|xi| {
            f.iter()
                .enumerate()
                .map(|(x, v)| v * unit_root(-(((x * xi) % l) as i64), l as i64))
                .sum::<Complex64>()
                * scale
        })
        .collect()
}

pub fn idft(fh: &[Complex64]) -> Vec<Complex64> {
    let l = fh.len();
    let scale = 1.0 / (l as f64).sqrt();
    (0..l)
        .map(|x| {
            fh.iter()
                .enumerate()
                .map(|(xi, v)| v * unit_root(((x * xi) % l) as i64, l as i64))
                .sum::<Complex64>()
                * scale
        })
        .collect()
}

impl FiniteSISModel {
    pub fn new(l: usize, p: usize, generator: Vec<Complex64>) -> Result<Self, SisError> {
        if p == 0 || !l.is_multiple_of(p) {
            return Err(SisError::BadShift { l, p });
        }
        if generator.len() != l {
            return Err(SisError::LengthMismatch {
                expected: l,
                got: generator.len(),
            });
        }
        let spectrum = dft(&generator);
        Ok(FiniteSISModel {
            l,
            p,
            generator,
            spectrum,
        })
    }

    pub fn generator(&self) -> &[Complex64] {
        &self.generator
    }

    pub fn spectrum(&self) -> &[Complex64] {
        &self.spectrum
    }

    /// Annihilator step: Gamma* = r Z_L with r = L/p.
    pub fn r(&self) -> usize {
        self.l / self.p
    }

    /// Orbit of xi under the annihilator: {xi + j r}, j = 0..p-1.
    fn orbit(&self, xi: usize) -> impl Iterator<Item = usize> + '_ {
        let r = self.r();
        (0..self.p).map(move |j| (xi + j * r) % self.l)
    }

    /// Membership via the periodic-symbol representation: f is in
    /// S(phi, pZ) iff f_hat = m . phi_hat for a Gamma*-periodic m, found
    /// orbit-by-orbit as a least-squares symbol. Returns the verdict and
    /// the symbol (zero on orbits where phi_hat vanishes).
    pub fn membership(&self, f: &[Complex64], tol: f64) -> (bool, Vec<Complex64>) {
        let fh = dft(f);
        let mut symbol = vec![Complex64::zero(); self.l];
        let phi_max: f64 = self
            .spectrum
            .iter()
            .map(|v| v.norm_sqr())
            .fold(0.0, f64::max);
        for xi0 in 0..self.r() {
            let mut num = Complex64::zero();
            let mut den = 0.0f64;
            for xi in self.orbit(xi0) {
                num += fh[xi] * self.spectrum[xi].conj();
                den += self.spectrum[xi].norm_sqr();
            }
            let m = if den > tol * tol * phi_max {
                num / den
            } else {
                Complex64::zero()
            };
            for xi in self.orbit(xi0) {
                symbol[xi] = m;
            }
        }
        let residual: f64 = (0..self.l)
            .map(|xi| (fh[xi] - symbol[xi] * self.spectrum[xi]).norm_sqr())
            .sum::<f64>()
            .sqrt();
        (residual <= tol * vec_norm(f).max(f64::MIN_POSITIVE), symbol)
    }

    /// Dense-span oracle: orthonormal basis of {T_{kp} phi}.
    pub fn span_basis(&self) -> SubspaceBasis {
        let cols = self.l / self.p;
        let mut mat = DMatrix::zeros(self.l, cols);
        for k in 0..cols {
            let shifted = tf_shift(&self.generator, (k * self.p) as i64, 0);
            for i in 0..self.l {
                mat[(i, k)] = shifted[i];
            }
        }
        space_basis(&mat, 1e-10)
    }

    /// Zero-pattern condition for invariance under the finer shifts q Z_L
    /// (q | p): wherever phi_hat is energized, all translates by
    /// Gamma* \ Gamma~* vanish. Returns the verdict, witnesses as
    /// (xi, translate) pairs, and the energized-coset maximum.
    pub fn condition_d(&self, q: usize, tau: f64) -> Result<SisCondition, SisError> {
        if q == 0 || !self.p.is_multiple_of(q) {
            return Err(SisError::NotFiner { p: self.p, q });
        }
        let r = self.r();
        let cosets = self.p / q; // order of Gamma*/Gamma~*
        let tau_abs = tau * self.spectrum.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let mut witnesses = Vec::new();
        let mut max_energized = 0usize;
        for xi in 0..self.l {
            // Coset energies over Gamma~* translates.
            let mut energized = 0usize;
            for c in 0..cosets {
                let mut e = 0.0;
                let mut t = (xi + c * r) % self.l;
                // Gamma~* = (L/q) Z_L = (r * cosets) Z_L.
                for _ in 0..q {
                    e += self.spectrum[t].norm_sqr();
                    t = (t + r * cosets) % self.l;
                }
                if e > tau_abs * tau_abs {
                    energized += 1;
                }
            }
            max_energized = max_energized.max(energized);
            if self.spectrum[xi].norm() > tau_abs {
                for j in 1..self.p {
                    if (j * r).is_multiple_of(r * cosets) {
                        continue; // translate lies in Gamma~*
                    }
                    let t = (xi + j * r) % self.l;
                    if self.spectrum[t].norm() > tau_abs {
                        witnesses.push((xi, t));
                    }
                }
            }
        }
        Ok(SisCondition {
            holds: witnesses.is_empty(),
            witnesses,
            max_energized_cosets: max_energized,
        })
    }

    /// Brute-force counterpart: S(phi, qZ) = S(phi, pZ) iff every finer
    /// translate stays in the base span.
    pub fn brute_force_invariant(&self, q: usize, tol: f64) -> Result<bool, SisError> {
        if q == 0 || !self.p.is_multiple_of(q) {
            return Err(SisError::NotFiner { p: self.p, q });
        }
        let basis = self.span_basis();
        Ok((0..self.l / q).all(|k| {
            let shifted = tf_shift(&self.generator, (k * q) as i64, 0);
            basis.residual(&shifted) <= tol * vec_norm(&shifted).max(f64::MIN_POSITIVE)
        }))
    }

    /// Full translation invariance: at most one energized bin on each
    /// annihilator orbit (the Paley-Wiener-style band condition).
    pub fn full_translation(&self, tau: f64) -> bool {
        let tau_abs = tau * self.spectrum.iter().map(|v| v.norm()).fold(0.0, f64::max);
        (0..self.r()).all(|xi0| {
            self.orbit(xi0)
                .filter(|&xi| self.spectrum[xi].norm() > tau_abs)
                .count()
                <= 1
        })
    }
}

#[derive(Debug, Clone)]
pub struct SisCondition {
    pub holds: bool,
    pub witnesses: Vec<(usize, usize)>,
    pub max_energized_cosets: usize,
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};

    const TOL: f64 = 1e-9;

    fn random_vec(l: usize, seed: u64) -> Vec<Complex64> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        (0..l)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect()
    }

    fn from_spectrum(spec: &[Complex64]) -> Vec<Complex64> {
        idft(spec)
    }

    #[test]
    fn dft_unitary_roundtrip() {
        let f = random_vec(24, 1);
        let fh = dft(&f);
        assert_abs_diff_eq!(vec_norm(&fh), vec_norm(&f), epsilon = 1e-12);
        let back = idft(&fh);
        for (a, b) in f.iter().zip(back.iter()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn shifted_generator_has_phase_symbol() {
        let l = 16;
        let p = 4;
        let model = FiniteSISModel::new(l, p, random_vec(l, 2)).unwrap();
        let f = tf_shift(model.generator(), p as i64, 0);
        let (ok, symbol) = model.membership(&f, TOL);
        assert!(ok);
        // DFT shift theorem: m(xi) = e^{-2 pi i p xi / L} wherever
        // phi_hat is energized.
        for xi in 0..l {
            if model.spectrum()[xi].norm() > 1e-9 {
                let expect = unit_root(-((p * xi) as i64).rem_euclid(l as i64), l as i64);
                assert!((symbol[xi] - expect).norm() < 1e-9, "xi={xi}");
            }
        }
        // Symbol is Gamma*-periodic by construction.
        let r = model.r();
        for xi in 0..l {
            assert_eq!(symbol[xi], symbol[(xi + r) % l]);
        }
    }

    #[test]
    fn membership_rejects_complement_and_agrees_with_span_oracle() {
        for (l, p, seed) in [(16usize, 4usize, 3u64), (32, 8, 4), (64, 4, 5), (24, 6, 6)] {
            let model = FiniteSISModel::new(l, p, random_vec(l, seed)).unwrap();
            let basis = model.span_basis();
            for inner in 0..5 {
                let f = random_vec(l, 100 + seed * 10 + inner);
                let projected = basis.project(&f);
                let (ok_proj, _) = model.membership(&projected, 1e-8);
                assert!(ok_proj, "span projection must be a member");
                let comp: Vec<Complex64> =
                    f.iter().zip(projected.iter()).map(|(a, b)| a - b).collect();
                if vec_norm(&comp) > 1e-6 {
                    let (ok_comp, _) = model.membership(&comp, 1e-8);
                    assert!(!ok_comp, "complement must not be a member");
                }
                // Residual route equals the Gram oracle route.
                let (ok_f, symbol) = model.membership(&f, 1e-8);
                let gram_in = basis.residual(&f) <= 1e-8 * vec_norm(&f);
                assert_eq!(ok_f, gram_in);
                // Reconstruction through the symbol matches the projection.
                let fh_proj: Vec<Complex64> =
                    (0..l).map(|xi| symbol[xi] * model.spectrum()[xi]).collect();
                let via_symbol = idft(&fh_proj);
                for (a, b) in via_symbol.iter().zip(projected.iter()) {
                    assert!((a - b).norm() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn flat_spectrum_accepts_orbit_constant_symbols() {
        let l = 12;
        let p = 3;
        // phi_hat = 1 everywhere.
        let model =
            FiniteSISModel::new(l, p, from_spectrum(&vec![Complex64::new(1.0, 0.0); l])).unwrap();
        let r = model.r();
        // Any f_hat constant on annihilator orbits is a member.
        let mut fh = vec![Complex64::zero(); l];
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for xi0 in 0..r {
            let v = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            for j in 0..p {
                fh[(xi0 + j * r) % l] = v;
            }
        }
        let (ok, _) = model.membership(&idft(&fh), TOL);
        assert!(ok);
    }

    #[test]
    fn condition_d_banded_and_flat_spectra() {
        let l = 24;
        let p = 6;
        let q = 3;
        let r = l / p; // 4
                       // Spectrum supported on a single Gamma~*-coset band within each
                       // orbit: pick bins congruent to 0 mod (r * p/q) = 8.
        let mut spec = vec![Complex64::zero(); l];
        for xi in (0..l).step_by(r * (p / q)) {
            spec[xi] = Complex64::new(1.0, 0.0);
        }
        let model = FiniteSISModel::new(l, p, from_spectrum(&spec)).unwrap();
        let cond = model.condition_d(q, TOL).unwrap();
        assert!(cond.holds);
        assert!(cond.max_energized_cosets <= 1);
        // Nonvanishing spectrum: every orbit multiply occupied.
        let model =
            FiniteSISModel::new(l, p, from_spectrum(&vec![Complex64::new(1.0, 0.0); l])).unwrap();
        let cond = model.condition_d(q, TOL).unwrap();
        assert!(!cond.holds);
        assert_eq!(cond.max_energized_cosets, p / q);
        // Zero spectrum: vacuously true.
        let model = FiniteSISModel::new(l, p, vec![Complex64::zero(); l]).unwrap();
        assert!(model.condition_d(q, TOL).unwrap().holds);
        // Bad q rejected.
        assert_eq!(
            model.condition_d(4, TOL).unwrap_err(),
            SisError::NotFiner { p: 6, q: 4 }
        );
    }

    #[test]
    fn condition_d_matches_brute_force_across_instances() {
        // The executable SIS/Gabor analogy: zero-pattern condition equals
        // span comparison for every divisor chain and a batch of random
        // sparse spectra, L <= 32.
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for l in [8usize, 12, 16, 24, 32] {
            let divisors: Vec<usize> = (1..=l).filter(|d| l % d == 0).collect();
            for &p in &divisors {
                for &q in divisors.iter().filter(|&&q| q < p && p % q == 0) {
                    for _ in 0..6 {
                        let spec: Vec<Complex64> = (0..l)
                            .map(|_| {
                                if rng.gen_bool(0.4) {
                                    Complex64::new(
                                        rng.gen_range(0.2..1.0),
                                        rng.gen_range(-1.0..1.0),
                                    )
                                } else {
                                    Complex64::zero()
                                }
                            })
                            .collect();
                        let model = FiniteSISModel::new(l, p, from_spectrum(&spec)).unwrap();
                        let cond = model.condition_d(q, 1e-9).unwrap().holds;
                        let brute = model.brute_force_invariant(q, 1e-9).unwrap();
                        assert_eq!(cond, brute, "L={l} p={p} q={q}");
                    }
                }
            }
        }
    }

    #[test]
    fn paley_wiener_band_is_fully_translation_invariant() {
        let l = 32;
        let p = 4;
        let r = l / p; // 8: a fundamental domain of Gamma* has 8 bins
        let mut spec = vec![Complex64::zero(); l];
        for xi in 0..r {
            spec[xi] = Complex64::new(1.0, 0.0);
        }
        let model = FiniteSISModel::new(l, p, from_spectrum(&spec)).unwrap();
        assert!(model.full_translation(TOL));
        // Brute force at the finest shift agrees.
        assert!(model.brute_force_invariant(1, 1e-9).unwrap());
        // Two energized bins in one orbit break it.
        let mut spec = vec![Complex64::zero(); l];
        spec[0] = Complex64::new(1.0, 0.0);
        spec[r] = Complex64::new(1.0, 0.0);
        let model = FiniteSISModel::new(l, p, from_spectrum(&spec)).unwrap();
        assert!(!model.full_translation(TOL));
        // Zero spectrum is vacuously invariant.
        let model = FiniteSISModel::new(l, p, vec![Complex64::zero(); l]).unwrap();
        assert!(model.full_translation(TOL));
    }
}
