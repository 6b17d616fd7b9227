//! Exact finite-dimensional Gabor machinery on C^L: Gabor systems over
//! integer subgroup lattices, the bracket [f,g] over the adjoint subgroup,
//! the Zak-domain orthogonal projection onto G(phi, Lambda), and
//! frame/Riesz bound computation.
//!
//! Phase-space coordinates are (time shift in samples, modulation index);
//! the Zak cell is x in [0, N), omega in [0, M), matching the continuous
//! unit square under x_c = x/N, omega_c = omega/M.

use crate::lattice::{parse_lattice, LatticeError, RationalLattice};
use crate::qmat::{rat_int, QMat, Rat};
use crate::zak::{finite_zak, inverse_finite_zak, WindowSpec, ZakError, ZakGrid, ZakSplit};
use nalgebra::{DMatrix, DVector};
use num::complex::Complex64;
use num::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use crate::zak::tf_shift;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("lattice generators must be integral sample pairs")]
    NonIntegralLattice,
    #[error("lattice must lie inside N Z x M Z (samples): generator ({0}, {1}) does not")]
    OutsideModelIntegerLattice(i64, i64),
    #[error("lattice dimension must be 2, got {0}")]
    BadDimension(usize),
    #[error("window length {got} does not match L = {expected}")]
    WindowLength { expected: usize, got: usize },
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Zak(#[from] ZakError),
}

/// JSON description of a finite model: ambient L, split N, the sample
/// lattice in row-major text form, and a window spec.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelSpec {
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub lattice: String,
    pub window: WindowSpec,
}

impl ModelSpec {
    pub fn parse(json: &str) -> Result<Self, ModelError> {
        let spec: ModelSpec = serde_json::from_str(json)
            .map_err(|e| ModelError::Zak(ZakError::InvalidWindow(format!("model JSON: {e}"))))?;
        spec.window.validate()?;
        Ok(spec)
    }

    /// Builds the model; only finite-realizable windows are accepted here
    /// (finite vectors and explicit Zak grids matching the split).
    pub fn build(&self) -> Result<FiniteGaborModel, ModelError> {
        let split = ZakSplit::new(self.l, self.n)?;
        let lattice = parse_lattice(&self.lattice)?;
        let window = match &self.window {
            WindowSpec::FiniteVector { l, .. } => {
                if *l != split.l {
                    return Err(ModelError::WindowLength {
                        expected: split.l,
                        got: *l,
                    });
                }
                self.window.finite_vector().expect("finite vector")
            }
            WindowSpec::ExplicitZak { p, q, values } => {
                if *p != split.n || *q != split.m {
                    return Err(ModelError::Zak(ZakError::InvalidWindow(format!(
                        "explicit grid is {p}x{q}, the model cell is {}x{}",
                        split.n, split.m
                    ))));
                }
                let grid = ZakGrid::new_finite(
                    split,
                    values.iter().map(|v| Complex64::new(v[0], v[1])).collect(),
                );
                inverse_finite_zak(&grid)?
            }
            _ => {
                return Err(ModelError::Zak(ZakError::UnsupportedWindow));
            }
        };
        FiniteGaborModel::new(split, lattice, window)
    }
}

/// Finite Gabor model: C^L with Zak split L = N*M, a sample lattice
/// Lambda_fin inside N Z x M Z (the model's Z^2), and a window.
///
/// The induced subgroup of Z_L x Z_L and its adjoint subgroup
/// {(x, w) : eta x = u w mod L for all (u, eta)} are computed once and
/// cached, along with the window's Zak transform.
#[derive(Debug, Clone)]
pub struct FiniteGaborModel {
    split: ZakSplit,
    lattice: RationalLattice,
    window: Vec<Complex64>,
    subgroup: Vec<(usize, usize)>,
    adjoint_subgroup: Vec<(usize, usize)>,
    adjoint_in_cell: Vec<(usize, usize)>,
    zak_window: ZakGrid,
}

impl FiniteGaborModel {
    pub fn new(
        split: ZakSplit,
        lattice: RationalLattice,
        window: Vec<Complex64>,
    ) -> Result<Self, ModelError> {
        if lattice.dim() != 2 {
            return Err(ModelError::BadDimension(lattice.dim()));
        }
        if window.len() != split.l {
            return Err(ModelError::WindowLength {
                expected: split.l,
                got: window.len(),
            });
        }
        let model_integer =
            RationalLattice::diagonal(&[rat_int(split.n as i64), rat_int(split.m as i64)])?;
        let mut gens: Vec<(i64, i64)> = Vec::new();
        for j in 0..2 {
            let col = lattice.basis().column(j);
            if !col.iter().all(|x| x.denom().is_one()) {
                return Err(ModelError::NonIntegralLattice);
            }
            let u = col[0]
                .numer()
                .to_i64()
                .ok_or(ModelError::NonIntegralLattice)?;
            let eta = col[1]
                .numer()
                .to_i64()
                .ok_or(ModelError::NonIntegralLattice)?;
            if !model_integer.member(&col)? {
                return Err(ModelError::OutsideModelIntegerLattice(u, eta));
            }
            gens.push((u, eta));
        }
        let l = split.l as i64;
        let subgroup = subgroup_closure(&gens, l);
        let adjoint_subgroup: Vec<(usize, usize)> = {
            let mut out = Vec::new();
            for x in 0..l {
                for w in 0..l {
                    if gens
                        .iter()
                        .all(|&(u, eta)| (eta * x - u * w).rem_euclid(l) == 0)
                    {
                        out.push((x as usize, w as usize));
                    }
                }
            }
            out
        };
        let adjoint_in_cell: Vec<(usize, usize)> = adjoint_subgroup
            .iter()
            .copied()
            .filter(|&(x, w)| x < split.n && w < split.m)
            .collect();
        let zak_window = finite_zak(&window, split)?;
        Ok(FiniteGaborModel {
            split,
            lattice,
            window,
            subgroup,
            adjoint_subgroup,
            adjoint_in_cell,
            zak_window,
        })
    }

    pub fn split(&self) -> ZakSplit {
        self.split
    }

    pub fn lattice(&self) -> &RationalLattice {
        &self.lattice
    }

    pub fn window(&self) -> &[Complex64] {
        &self.window
    }

    pub fn zak_window(&self) -> &ZakGrid {
        &self.zak_window
    }

    /// Sample pairs of the induced subgroup of Z_L x Z_L, sorted.
    pub fn subgroup(&self) -> &[(usize, usize)] {
        &self.subgroup
    }

    pub fn adjoint_subgroup(&self) -> &[(usize, usize)] {
        &self.adjoint_subgroup
    }

    /// Adjoint subgroup elements inside the Zak cell (u < N, eta < M);
    /// their count is the `m` of the frame-bound formulas.
    pub fn adjoint_in_cell(&self) -> &[(usize, usize)] {
        &self.adjoint_in_cell
    }

    /// The continuous integer lattice this sample lattice models:
    /// diag(1/N, 1/M) * Lambda_fin.
    pub fn continuous_lattice(&self) -> RationalLattice {
        let mut scale = QMat::zeros(2, 2);
        scale[(0, 0)] = Rat::new(num::BigInt::one(), num::BigInt::from(self.split.n));
        scale[(1, 1)] = Rat::new(num::BigInt::one(), num::BigInt::from(self.split.m));
        RationalLattice::canonical_basis(&scale.mul(self.lattice.basis()))
            .expect("scaled lattice stays full rank")
    }

    /// One column per subgroup element, deterministic order.
    pub fn gabor_matrix(&self) -> DMatrix<Complex64> {
        let l = self.split.l;
        let mut mat = DMatrix::zeros(l, self.subgroup.len());
        for (j, &(u, eta)) in self.subgroup.iter().enumerate() {
            let shifted = tf_shift(&self.window, u as i64, eta as i64);
            for i in 0..l {
                mat[(i, j)] = shifted[i];
            }
        }
        mat
    }

    /// Bracket [f, g](x, w) = sum over the adjoint subgroup in the cell of
    /// Zf(x+u, w+eta) conj(Zg(x+u, w+eta)), quasi-periodically extended.
    /// The phases cancel between the two factors, so the result is a
    /// genuinely Lambda°_fin-periodic N x M grid.
    pub fn bracket(&self, zf: &ZakGrid, zg: &ZakGrid) -> Result<ZakGrid, ModelError> {
        if zf.res() != [self.split.n, self.split.m] || zg.res() != zf.res() {
            return Err(ModelError::Zak(ZakError::LengthMismatch {
                expected: self.split.n * self.split.m,
                got: zg.node_count(),
            }));
        }
        let (n, m) = (self.split.n, self.split.m);
        let mut values = vec![Complex64::zero(); n * m];
        for x in 0..n {
            for w in 0..m {
                let mut acc = Complex64::zero();
                for &(u, eta) in &self.adjoint_in_cell {
                    let a = zf.extend_idx(&[(x + u) as isize, (w + eta) as isize]);
                    let b = zg.extend_idx(&[(x + u) as isize, (w + eta) as isize]);
                    acc += a * b.conj();
                }
                values[x * m + w] = acc;
            }
        }
        Ok(ZakGrid::new_finite(self.split, values))
    }

    pub fn bracket_vectors(&self, f: &[Complex64], g: &[Complex64]) -> Result<ZakGrid, ModelError> {
        let zf = finite_zak(f, self.split)?;
        let zg = finite_zak(g, self.split)?;
        self.bracket(&zf, &zg)
    }

    /// Zak-domain multiplier h_f = [f, phi]/[phi, phi] on the support of
    /// [phi, phi] (thresholded at tau^2 relative to its maximum), else 0.
    pub fn projection_multiplier(&self, f: &[Complex64], tau: f64) -> Result<ZakGrid, ModelError> {
        let zf = finite_zak(f, self.split)?;
        let num = self.bracket(&zf, &self.zak_window)?;
        let den = self.bracket(&self.zak_window, &self.zak_window)?;
        let den_max = den.values().iter().map(|v| v.re).fold(0.0, f64::max);
        let cutoff = tau * tau * den_max;
        let values: Vec<Complex64> = num
            .values()
            .iter()
            .zip(den.values().iter())
            .map(|(nu, de)| {
                if de.re > cutoff {
                    nu / de.re
                } else {
                    Complex64::zero()
                }
            })
            .collect();
        Ok(ZakGrid::new_finite(self.split, values))
    }

    /// Orthogonal projection onto G(phi, Lambda) via the bracket formula:
    /// Pf = Z^{-1}(h_f . Z phi).
    pub fn project(&self, f: &[Complex64], tau: f64) -> Result<Vec<Complex64>, ModelError> {
        let h = self.projection_multiplier(f, tau)?;
        let values: Vec<Complex64> = h
            .values()
            .iter()
            .zip(self.zak_window.values().iter())
            .map(|(a, b)| a * b)
            .collect();
        Ok(inverse_finite_zak(&ZakGrid::new_finite(
            self.split, values,
        ))?)
    }

    /// Membership test: f in G(phi, Lambda) iff ||f - Pf|| <= tol ||f||.
    /// On success also returns the certifying multiplier grid.
    pub fn membership(
        &self,
        f: &[Complex64],
        tol: f64,
    ) -> Result<(bool, Option<ZakGrid>), ModelError> {
        let pf = self.project(f, tol)?;
        let norm_f = vec_norm(f);
        let residual = f
            .iter()
            .zip(pf.iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        if residual <= tol * norm_f || norm_f == 0.0 {
            Ok((true, Some(self.projection_multiplier(f, tol)?)))
        } else {
            Ok((false, None))
        }
    }

    /// Frame/Riesz bounds from the bracket: with m = |Lambda°_fin ∩ cell|,
    /// A = min [phi,phi]/m and B = max [phi,phi]/m over the Zak cell. In
    /// this normalization the Gram-matrix Riesz bounds of the system equal
    /// L*A and L*B, and the |Z phi| = 1 orthonormal case gives A = B = 1.
    pub fn riesz_frame_bounds(&self, tau: f64) -> Result<(f64, f64, bool), ModelError> {
        let den = self.bracket(&self.zak_window, &self.zak_window)?;
        let m = self.adjoint_in_cell.len() as f64;
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for v in den.values() {
            lo = lo.min(v.re);
            hi = hi.max(v.re);
        }
        let a = (lo / m).max(0.0);
        let b = hi / m;
        Ok((a, b, a > tau * tau))
    }
}

fn subgroup_closure(gens: &[(i64, i64)], l: i64) -> Vec<(usize, usize)> {
    use std::collections::BTreeSet;
    let mut set: BTreeSet<(i64, i64)> = BTreeSet::new();
    set.insert((0, 0));
    let mut frontier = vec![(0i64, 0i64)];
    while let Some((a, b)) = frontier.pop() {
        for &(u, eta) in gens {
            let next = ((a + u).rem_euclid(l), (b + eta).rem_euclid(l));
            if set.insert(next) {
                frontier.push(next);
            }
        }
    }
    set.into_iter()
        .map(|(a, b)| (a as usize, b as usize))
        .collect()
}

pub fn vec_norm(f: &[Complex64]) -> f64 {
    f.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn to_dvector(f: &[Complex64]) -> DVector<Complex64> {
    DVector::from_column_slice(f)
}

/// Orthonormal basis of a column span, with singular values below
/// `tol * sigma_max` treated as zero.
#[derive(Debug, Clone)]
pub struct SubspaceBasis {
    columns: DMatrix<Complex64>,
    rank: usize,
    tol: f64,
}

impl SubspaceBasis {
    pub fn from_columns(matrix: &DMatrix<Complex64>, tol: f64) -> Self {
        assert!(tol > 0.0);
        if matrix.ncols() == 0 {
            return SubspaceBasis {
                columns: DMatrix::zeros(matrix.nrows(), 0),
                rank: 0,
                tol,
            };
        }
        let (orth, sigma) = jacobi_orthogonalize(matrix);
        let sigma_max = sigma.iter().copied().fold(0.0, f64::max);
        let keep: Vec<usize> = (0..sigma.len())
            .filter(|&i| sigma_max > 0.0 && sigma[i] > tol * sigma_max)
            .collect();
        let mut columns = DMatrix::zeros(matrix.nrows(), keep.len());
        for (dst, &src) in keep.iter().enumerate() {
            let s = sigma[src];
            let col = orth.column(src) / Complex64::new(s, 0.0);
            columns.set_column(dst, &col);
        }
        SubspaceBasis {
            columns,
            rank: keep.len(),
            tol,
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        self.columns.column(j).iter().copied().collect()
    }

    /// Gram projection Q Q* f onto the span.
    pub fn project(&self, f: &[Complex64]) -> Vec<Complex64> {
        let v = to_dvector(f);
        let coeffs = self.columns.adjoint() * &v;
        let out = &self.columns * coeffs;
        out.iter().copied().collect()
    }

    /// ||(I - Q Q*) f||.
    pub fn residual(&self, f: &[Complex64]) -> f64 {
        let p = self.project(f);
        f.iter()
            .zip(p.iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

/// Rank-revealing orthonormalization of a Gabor system's span.
pub fn space_basis(matrix: &DMatrix<Complex64>, tol: f64) -> SubspaceBasis {
    SubspaceBasis::from_columns(matrix, tol)
}

/// CSV export of a complex matrix: one row per line, entries as
/// interleaved re,im pairs with 17 significant digits.
pub fn matrix_to_csv(m: &DMatrix<Complex64>) -> String {
    let header: Vec<String> = (0..m.ncols())
        .flat_map(|j| [format!("col{j}_re"), format!("col{j}_im")])
        .collect();
    let mut out = header.join(",");
    out.push('\n');
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols())
            .flat_map(|j| {
                [
                    crate::zak::sig17(m[(i, j)].re),
                    crate::zak::sig17(m[(i, j)].im),
                ]
            })
            .collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// One-sided complex Jacobi: rotates column pairs until mutually
/// orthogonal. Returns the rotated matrix (columns scaled by the singular
/// values) and the singular values, sorted in descending order.
///
/// Sidesteps the general SVD: singular values come out at full relative
/// accuracy without forming the Gram matrix.
pub fn jacobi_orthogonalize(matrix: &DMatrix<Complex64>) -> (DMatrix<Complex64>, Vec<f64>) {
    let mut a = matrix.clone();
    let n = a.ncols();
    let eps = 1e-15;
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let cp = a.column(p);
                let cq = a.column(q);
                let app = cp.iter().map(|z| z.norm_sqr()).sum::<f64>();
                let aqq = cq.iter().map(|z| z.norm_sqr()).sum::<f64>();
                let apq: Complex64 = cp.iter().zip(cq.iter()).map(|(x, y)| x.conj() * y).sum();
                if apq.norm_sqr() <= eps * eps * app * aqq || apq.norm() == 0.0 {
                    continue;
                }
                rotated = true;
                // Diagonalize the Hermitian 2x2 [[app, apq], [conj, aqq]]:
                // strip the phase, then a real Jacobi rotation.
                let phase = apq / apq.norm();
                let tau = (aqq - app) / (2.0 * apq.norm());
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for i in 0..a.nrows() {
                    let vp = a[(i, p)];
                    let vq = a[(i, q)];
                    a[(i, p)] = vp * c - vq * phase.conj() * s;
                    a[(i, q)] = vp * phase * s + vq * c;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sigma: Vec<f64> = (0..n)
        .map(|j| a.column(j).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .collect();
    // Sort columns by descending singular value.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| sigma[j].partial_cmp(&sigma[i]).unwrap());
    let mut sorted = DMatrix::zeros(a.nrows(), n);
    for (dst, &src) in order.iter().enumerate() {
        sorted.set_column(dst, &a.column(src));
    }
    sigma.sort_by(|x, y| y.partial_cmp(x).unwrap());
    (sorted, sigma)
}
