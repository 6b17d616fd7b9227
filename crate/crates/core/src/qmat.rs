//! Dense matrices over exact rationals, plus the integer normal forms
//! (column Hermite, Smith) that back lattice canonicalization and
//! quotient enumeration.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{Integer, One, Signed, Zero};

pub type Rat = BigRational;

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Fractional part in [0, 1).
pub fn frac(x: &Rat) -> Rat {
    x - x.floor()
}

/// Row-major dense matrix over `BigRational`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QMat {
    pub rows: usize,
    pub cols: usize,
    data: Vec<Rat>,
}

impl QMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        QMat {
            rows,
            cols,
            data: vec![Rat::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = QMat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rat::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rat>>) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        QMat {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_i64_rows(rows: &[&[i64]]) -> Self {
        QMat::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| rat_int(x)).collect())
                .collect(),
        )
    }

    pub fn column(&self, j: usize) -> Vec<Rat> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn set_column(&mut self, j: usize, col: &[Rat]) {
        assert_eq!(col.len(), self.rows);
        for i in 0..self.rows {
            self[(i, j)] = col[i].clone();
        }
    }

    pub fn transpose(&self) -> QMat {
        let mut t = QMat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &QMat) -> QMat {
        assert_eq!(self.cols, other.rows);
        let mut out = QMat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                if self[(i, k)].is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let p = &self[(i, k)] * &other[(k, j)];
                    out[(i, j)] += p;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Rat]) -> Vec<Rat> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                (0..self.cols)
                    .map(|j| &self[(i, j)] * &v[j])
                    .fold(Rat::zero(), |a, b| a + b)
            })
            .collect()
    }

    /// Determinant by fraction-free-ish Gaussian elimination (exact).
    pub fn det(&self) -> Rat {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut a = self.clone();
        let mut det = Rat::one();
        for col in 0..n {
            let pivot = (col..n).find(|&r| !a[(r, col)].is_zero());
            let Some(p) = pivot else {
                return Rat::zero();
            };
            if p != col {
                for j in 0..n {
                    let tmp = a[(p, j)].clone();
                    a[(p, j)] = a[(col, j)].clone();
                    a[(col, j)] = tmp;
                }
                det = -det;
            }
            let pv = a[(col, col)].clone();
            det *= &pv;
            for r in col + 1..n {
                if a[(r, col)].is_zero() {
                    continue;
                }
                let factor = &a[(r, col)] / &pv;
                for j in col..n {
                    let sub = &factor * &a[(col, j)];
                    a[(r, j)] -= sub;
                }
            }
        }
        det
    }

    /// Solves `self * x = b` exactly. Returns `None` when singular.
    pub fn solve(&self, b: &[Rat]) -> Option<Vec<Rat>> {
        assert_eq!(self.rows, self.cols);
        assert_eq!(b.len(), self.rows);
        let n = self.rows;
        let mut a = self.clone();
        let mut rhs = b.to_vec();
        for col in 0..n {
            let p = (col..n).find(|&r| !a[(r, col)].is_zero())?;
            if p != col {
                for j in 0..n {
                    let tmp = a[(p, j)].clone();
                    a[(p, j)] = a[(col, j)].clone();
                    a[(col, j)] = tmp;
                }
                rhs.swap(p, col);
            }
            let pv = a[(col, col)].clone();
            for r in 0..n {
                if r == col || a[(r, col)].is_zero() {
                    continue;
                }
                let factor = &a[(r, col)] / &pv;
                for j in col..n {
                    let sub = &factor * &a[(col, j)];
                    a[(r, j)] -= sub;
                }
                let sub = &factor * &rhs[col];
                rhs[r] -= sub;
            }
        }
        Some((0..n).map(|i| &rhs[i] / &a[(i, i)]).collect())
    }

    pub fn inverse(&self) -> Option<QMat> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut out = QMat::zeros(n, n);
        for j in 0..n {
            let mut e = vec![Rat::zero(); n];
            e[j] = Rat::one();
            let col = self.solve(&e)?;
            out.set_column(j, &col);
        }
        Some(out)
    }

    /// Least common multiple of all entry denominators.
    pub fn denominator_lcm(&self) -> BigInt {
        self.data
            .iter()
            .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()))
    }
}

impl std::ops::Index<(usize, usize)> for QMat {
    type Output = Rat;
    fn index(&self, (i, j): (usize, usize)) -> &Rat {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for QMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rat {
        &mut self.data[i * self.cols + j]
    }
}

/// Row-major dense matrix over `BigInt`, used only inside the normal forms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZMat {
    pub rows: usize,
    pub cols: usize,
    data: Vec<BigInt>,
}

impl ZMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ZMat {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = ZMat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = BigInt::one();
        }
        m
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            let t = self[(i, a)].clone();
            self[(i, a)] = self[(i, b)].clone();
            self[(i, b)] = t;
        }
    }

    /// col_dst -= q * col_src
    fn sub_col(&mut self, dst: usize, src: usize, q: &BigInt) {
        for i in 0..self.rows {
            let s = q * &self[(i, src)];
            self[(i, dst)] -= s;
        }
    }

    fn negate_col(&mut self, j: usize) {
        for i in 0..self.rows {
            let v = -self[(i, j)].clone();
            self[(i, j)] = v;
        }
    }

    fn col_is_zero(&self, j: usize) -> bool {
        (0..self.rows).all(|i| self[(i, j)].is_zero())
    }
}

impl std::ops::Index<(usize, usize)> for ZMat {
    type Output = BigInt;
    fn index(&self, (i, j): (usize, usize)) -> &BigInt {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ZMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigInt {
        &mut self.data[i * self.cols + j]
    }
}

/// Column Hermite normal form of an integer matrix with full row rank.
///
/// Column operations only, so the column span (the generated lattice) is
/// unchanged. The result is `rows x rows`, lower triangular with positive
/// pivots and `0 <= h[i][j] < h[i][i]` for `j < i`. Returns `None` when the
/// columns do not span a full-rank lattice.
pub fn column_hnf(input: &ZMat) -> Option<ZMat> {
    let n = input.rows;
    let mut a = input.clone();
    for row in 0..n {
        // Euclid across columns `row..` until a single nonzero survives in
        // this row, then move it to position `row`.
        loop {
            let mut nonzero: Vec<usize> =
                (row..a.cols).filter(|&j| !a[(row, j)].is_zero()).collect();
            if nonzero.is_empty() {
                return None; // rank deficient
            }
            if nonzero.len() == 1 {
                a.swap_cols(row, nonzero[0]);
                break;
            }
            nonzero.sort_by_key(|&j| a[(row, j)].abs());
            let min = nonzero[0];
            for &j in &nonzero[1..] {
                let q = a[(row, j)].div_floor(&a[(row, min)]);
                a.sub_col(j, min, &q);
            }
        }
        if a[(row, row)].is_negative() {
            a.negate_col(row);
        }
        // Reduce entries left of the pivot into [0, pivot).
        let pivot = a[(row, row)].clone();
        for j in 0..row {
            let q = a[(row, j)].div_floor(&pivot);
            if !q.is_zero() {
                a.sub_col(j, row, &q);
            }
        }
    }
    // Past column n everything must have been absorbed.
    for j in n..a.cols {
        if !a.col_is_zero(j) {
            // Cannot happen once n pivots exist: every remaining entry was
            // eliminated during the Euclid passes.
            return None;
        }
    }
    let mut out = ZMat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            out[(i, j)] = a[(i, j)].clone();
        }
    }
    Some(out)
}

/// Diagonalizes `c` by unimodular row and column operations:
/// `c = u_inv * diag * v_inv`. Returns `(diag, u_inv)`; the lattice
/// quotient machinery only needs the inverse row transform.
pub fn smith_diagonalize(c: &ZMat) -> (ZMat, ZMat) {
    let n = c.rows;
    assert_eq!(n, c.cols);
    let mut a = c.clone();
    let mut u_inv = ZMat::identity(n);

    // Row op on `a` (r_dst -= q r_src) pairs with a column op on u_inv
    // (c_src += q c_dst) to keep u_inv * a invariant.
    fn row_sub(a: &mut ZMat, u_inv: &mut ZMat, dst: usize, src: usize, q: &BigInt) {
        for j in 0..a.cols {
            let s = q * &a[(src, j)];
            a[(dst, j)] -= s;
        }
        for i in 0..u_inv.rows {
            let s = q * &u_inv[(i, dst)];
            u_inv[(i, src)] += s;
        }
    }
    fn row_swap(a: &mut ZMat, u_inv: &mut ZMat, x: usize, y: usize) {
        if x == y {
            return;
        }
        for j in 0..a.cols {
            let t = a[(x, j)].clone();
            a[(x, j)] = a[(y, j)].clone();
            a[(y, j)] = t;
        }
        u_inv.swap_cols(x, y);
    }
    fn row_negate(a: &mut ZMat, u_inv: &mut ZMat, r: usize) {
        for j in 0..a.cols {
            let v = -a[(r, j)].clone();
            a[(r, j)] = v;
        }
        for i in 0..u_inv.rows {
            let v = -u_inv[(i, r)].clone();
            u_inv[(i, r)] = v;
        }
    }

    for k in 0..n {
        loop {
            // Find a pivot in the trailing block.
            let mut pivot = None;
            'search: for i in k..n {
                for j in k..n {
                    if !a[(i, j)].is_zero() {
                        pivot = Some((i, j));
                        break 'search;
                    }
                }
            }
            let Some((pi, pj)) = pivot else {
                break;
            };
            row_swap(&mut a, &mut u_inv, k, pi);
            a.swap_cols(k, pj);

            // Clear column k below the pivot.
            let mut dirty = false;
            for i in k + 1..n {
                if !a[(i, k)].is_zero() {
                    let q = a[(i, k)].div_floor(&a[(k, k)]);
                    row_sub(&mut a, &mut u_inv, i, k, &q);
                    if !a[(i, k)].is_zero() {
                        // Remainder became the smaller pivot candidate.
                        row_swap(&mut a, &mut u_inv, k, i);
                        dirty = true;
                    }
                }
            }
            if dirty {
                continue;
            }
            // Clear row k right of the pivot.
            for j in k + 1..n {
                if !a[(k, j)].is_zero() {
                    let q = a[(k, j)].div_floor(&a[(k, k)]);
                    for i in 0..n {
                        let s = &q * &a[(i, k)];
                        a[(i, j)] -= s;
                    }
                    if !a[(k, j)].is_zero() {
                        a.swap_cols(k, j);
                        dirty = true;
                    }
                }
            }
            if !dirty {
                break;
            }
        }
        if a[(k, k)].is_negative() {
            row_negate(&mut a, &mut u_inv, k);
        }
    }
    (a, u_inv)
}
