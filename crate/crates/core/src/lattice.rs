//! Exact arithmetic for full-rank rational lattices: canonical Hermite
//! bases, dual and adjoint lattices, quotient cosets, fundamental domains,
//! and enumeration of intermediate lattices.
//!
//! Everything here is computed over `BigRational`; equality of lattices is
//! literal equality of canonical bases.

use crate::qmat::{column_hnf, frac, rat_int, smith_diagonalize, QMat, Rat, ZMat};
use num::bigint::BigInt;
use num::{One, Signed, ToPrimitive, Zero};
use std::collections::BTreeSet;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LatticeError {
    #[error("degenerate lattice")]
    Degenerate,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("adjoint requires even dimension, got {0}")]
    OddDimension(usize),
    #[error("not a sublattice")]
    NotSublattice,
    #[error("quotient index {index} exceeds guard {guard}")]
    IndexGuardExceeded { index: u64, guard: u64 },
    #[error("character undefined off the adjoint of the sublattice")]
    CharacterUndefined,
    #[error("grid does not refine the lattice")]
    GridTooCoarse,
    #[error("cosets with more than one class require the sublattice to contain Z^dim")]
    SublatticeNotIntegerRefining,
    #[error("cannot parse lattice string: {0}")]
    Parse(String),
}

/// A full-rank lattice in `Q^dim`, stored in canonical column Hermite
/// normal form: the basis matrix is lower triangular with positive pivots
/// and off-pivot row entries reduced into `[0, pivot)`. Two values denote
/// the same point set iff their bases are identical.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RationalLattice {
    dim: usize,
    basis: QMat,
    covolume: Rat,
}

impl RationalLattice {
    /// Canonicalizes a raw generating matrix (columns generate the lattice).
    /// The matrix may have more columns than rows (extra generators).
    pub fn from_generators(raw: &QMat) -> Result<Self, LatticeError> {
        let dim = raw.rows;
        if dim == 0 || raw.cols < dim {
            return Err(LatticeError::Degenerate);
        }
        let scale = raw.denominator_lcm();
        let mut z = ZMat::zeros(raw.rows, raw.cols);
        for i in 0..raw.rows {
            for j in 0..raw.cols {
                let entry = &raw[(i, j)] * Rat::from_integer(scale.clone());
                debug_assert!(entry.denom().is_one());
                z[(i, j)] = entry.numer().clone();
            }
        }
        let hnf = column_hnf(&z).ok_or(LatticeError::Degenerate)?;
        let inv = Rat::new(BigInt::one(), scale);
        let mut basis = QMat::zeros(dim, dim);
        for i in 0..dim {
            for j in 0..dim {
                basis[(i, j)] = Rat::from_integer(hnf[(i, j)].clone()) * &inv;
            }
        }
        let covolume = (0..dim)
            .map(|i| basis[(i, i)].clone())
            .fold(Rat::one(), |a, b| a * b);
        Ok(RationalLattice {
            dim,
            basis,
            covolume,
        })
    }

    /// Canonical form of a square basis matrix. Errors on singular input.
    pub fn canonical_basis(raw: &QMat) -> Result<Self, LatticeError> {
        if raw.rows != raw.cols {
            return Err(LatticeError::Degenerate);
        }
        Self::from_generators(raw)
    }

    /// The integer lattice `Z^dim`.
    pub fn integer(dim: usize) -> Self {
        Self::canonical_basis(&QMat::identity(dim)).unwrap()
    }

    /// Diagonal lattice `c_1 Z x ... x c_dim Z`.
    pub fn diagonal(entries: &[Rat]) -> Result<Self, LatticeError> {
        let mut m = QMat::zeros(entries.len(), entries.len());
        for (i, c) in entries.iter().enumerate() {
            m[(i, i)] = c.clone();
        }
        Self::canonical_basis(&m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn basis(&self) -> &QMat {
        &self.basis
    }

    pub fn covolume(&self) -> &Rat {
        &self.covolume
    }

    /// Membership test: solve `basis * x = v` and check integrality.
    pub fn member(&self, v: &[Rat]) -> Result<bool, LatticeError> {
        if v.len() != self.dim {
            return Err(LatticeError::DimensionMismatch {
                expected: self.dim,
                got: v.len(),
            });
        }
        Ok(self.coordinates(v).iter().all(|c| c.denom().is_one()))
    }

    /// Coordinates of `v` in the lattice basis (exact forward substitution;
    /// the basis is lower triangular).
    pub fn coordinates(&self, v: &[Rat]) -> Vec<Rat> {
        let n = self.dim;
        let mut x = vec![Rat::zero(); n];
        for i in 0..n {
            let mut acc = v[i].clone();
            for j in 0..i {
                acc -= &self.basis[(i, j)] * &x[j];
            }
            x[i] = acc / &self.basis[(i, i)];
        }
        x
    }

    /// Reduces `v` modulo the lattice into the fundamental parallelepiped
    /// `basis * [0,1)^dim`.
    pub fn reduce(&self, v: &[Rat]) -> Vec<Rat> {
        let coords = self.coordinates(v);
        let fracs: Vec<Rat> = coords.iter().map(frac).collect();
        self.basis.mul_vec(&fracs)
    }

    pub fn sublattice_of(&self, other: &RationalLattice) -> Result<bool, LatticeError> {
        if self.dim != other.dim {
            return Err(LatticeError::DimensionMismatch {
                expected: other.dim,
                got: self.dim,
            });
        }
        for j in 0..self.dim {
            if !other.member(&self.basis.column(j))? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Dual lattice `(A^{-1})^T Z^dim`.
    pub fn dual(&self) -> RationalLattice {
        let inv_t = self
            .basis
            .inverse()
            .expect("canonical basis is nonsingular")
            .transpose();
        RationalLattice::canonical_basis(&inv_t).expect("dual of a lattice is a lattice")
    }

    /// Adjoint lattice `J (A^{-1})^T Z^{2d}` with `J = (0, I_d; -I_d, 0)`.
    pub fn adjoint(&self) -> Result<RationalLattice, LatticeError> {
        if !self.dim.is_multiple_of(2) {
            return Err(LatticeError::OddDimension(self.dim));
        }
        let d = self.dim / 2;
        let inv_t = self.basis.inverse().expect("nonsingular").transpose();
        let mut j = QMat::zeros(self.dim, self.dim);
        for k in 0..d {
            j[(k, d + k)] = Rat::one();
            j[(d + k, k)] = -Rat::one();
        }
        Ok(RationalLattice::canonical_basis(&j.mul(&inv_t)).expect("adjoint is a lattice"))
    }

    /// Smallest lattice containing `self` and the extra vectors.
    pub fn join(&self, extra: &[Vec<Rat>]) -> Result<RationalLattice, LatticeError> {
        for v in extra {
            if v.len() != self.dim {
                return Err(LatticeError::DimensionMismatch {
                    expected: self.dim,
                    got: v.len(),
                });
            }
        }
        let mut rows: Vec<Vec<Rat>> = Vec::with_capacity(self.dim);
        for i in 0..self.dim {
            let mut row: Vec<Rat> = (0..self.dim).map(|j| self.basis[(i, j)].clone()).collect();
            row.extend(extra.iter().map(|v| v[i].clone()));
            rows.push(row);
        }
        RationalLattice::from_generators(&QMat::from_rows(rows))
    }

    /// `[super : sub] = covolume(sub) / covolume(super)`, checked integral.
    pub fn index_in(&self, superlattice: &RationalLattice) -> Result<u64, LatticeError> {
        if !self.sublattice_of(superlattice)? {
            return Err(LatticeError::NotSublattice);
        }
        let ratio = &self.covolume / &superlattice.covolume;
        debug_assert!(ratio.denom().is_one(), "index of a sublattice is integral");
        Ok(ratio.numer().to_u64().expect("index fits in u64"))
    }

    /// Integer matrix `C` with `sub = self * C` (valid when `sub ⊆ self`).
    fn relation_matrix(&self, sub: &RationalLattice) -> ZMat {
        let mut c = ZMat::zeros(self.dim, self.dim);
        for j in 0..self.dim {
            let coords = self.coordinates(&sub.basis.column(j));
            for i in 0..self.dim {
                debug_assert!(coords[i].denom().is_one());
                c[(i, j)] = coords[i].numer().clone();
            }
        }
        c
    }

    /// Points of the lattice inside `[0,1)^dim`. Requires `Z^dim ⊆ self`
    /// (otherwise the unit cube is not a period box). Sorted, 0 first.
    pub fn points_in_unit_cube(&self) -> Result<Vec<Vec<Rat>>, LatticeError> {
        let zn = RationalLattice::integer(self.dim);
        if !zn.sublattice_of(self)? {
            return Err(LatticeError::SublatticeNotIntegerRefining);
        }
        let c = self.relation_matrix(&zn);
        let (diag, u_inv) = smith_diagonalize(&c);
        // self * u_inv is another basis B' of self with Z^dim = B' * diag.
        let u_inv_q = {
            let mut m = QMat::zeros(self.dim, self.dim);
            for i in 0..self.dim {
                for j in 0..self.dim {
                    m[(i, j)] = Rat::from_integer(u_inv[(i, j)].clone());
                }
            }
            m
        };
        let bprime = self.basis.mul(&u_inv_q);
        let orders: Vec<u64> = (0..self.dim)
            .map(|i| diag[(i, i)].abs().to_u64().expect("order fits in u64"))
            .collect();
        let mut points = Vec::new();
        let mut digits = vec![0u64; self.dim];
        loop {
            let coord: Vec<Rat> = (0..self.dim)
                .map(|i| {
                    (0..self.dim)
                        .map(|k| &bprime[(i, k)] * rat_int(digits[k] as i64))
                        .fold(Rat::zero(), |a, b| a + b)
                })
                .collect();
            points.push(coord.iter().map(frac).collect::<Vec<Rat>>());
            // odometer
            let mut k = 0;
            loop {
                if k == self.dim {
                    let mut unique: BTreeSet<Vec<Rat>> = BTreeSet::new();
                    for p in points {
                        unique.insert(p);
                    }
                    return Ok(unique.into_iter().collect());
                }
                digits[k] += 1;
                if digits[k] < orders[k] {
                    break;
                }
                digits[k] = 0;
                k += 1;
            }
        }
    }
}

impl fmt::Display for RationalLattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", format_matrix(&self.basis))
    }
}

/// Row-major text form: rows joined by ';', entries by ',', rationals "p/q".
pub fn format_matrix(m: &QMat) -> String {
    (0..m.rows)
        .map(|i| {
            (0..m.cols)
                .map(|j| format_rat(&m[(i, j)]))
                .collect::<Vec<_>>()
                .join(",")
        })
        .collect::<Vec<_>>()
        .join(";")
}

pub fn format_rat(x: &Rat) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn parse_rat(s: &str) -> Result<Rat, LatticeError> {
    let s = s.trim();
    let parse_int = |t: &str| -> Result<BigInt, LatticeError> {
        t.trim()
            .parse::<BigInt>()
            .map_err(|_| LatticeError::Parse(format!("bad rational entry '{s}'")))
    };
    match s.split_once('/') {
        Some((num, den)) => {
            let d = parse_int(den)?;
            if d.is_zero() {
                return Err(LatticeError::Parse(format!("zero denominator in '{s}'")));
            }
            Ok(Rat::new(parse_int(num)?, d))
        }
        None => Ok(Rat::from_integer(parse_int(s)?)),
    }
}

/// Parses the row-major lattice text format, e.g. "4,0;0,2" or
/// "1/2,0;0,1/4", and canonicalizes.
pub fn parse_lattice(s: &str) -> Result<RationalLattice, LatticeError> {
    let rows: Vec<Vec<Rat>> = s
        .split(';')
        .map(|row| row.split(',').map(parse_rat).collect::<Result<Vec<_>, _>>())
        .collect::<Result<Vec<_>, _>>()?;
    if rows.is_empty() || rows.iter().any(|r| r.len() != rows.len()) {
        return Err(LatticeError::Parse(format!("'{s}' is not a square matrix")));
    }
    RationalLattice::canonical_basis(&QMat::from_rows(rows))
}

/// The quotient `super/sub` as explicit coset representatives.
///
/// Representatives are reduced into `[0,1)^dim` (the lex-least point of
/// each coset there), representative 0 first, then lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CosetPartition {
    superlattice: RationalLattice,
    sublattice: RationalLattice,
    order: u64,
    representatives: Vec<Vec<Rat>>,
}

impl CosetPartition {
    pub fn new(
        superlattice: &RationalLattice,
        sublattice: &RationalLattice,
    ) -> Result<Self, LatticeError> {
        let order = sublattice.index_in(superlattice)?;
        let dim = superlattice.dim();
        if order == 1 {
            return Ok(CosetPartition {
                superlattice: superlattice.clone(),
                sublattice: sublattice.clone(),
                order,
                representatives: vec![vec![Rat::zero(); dim]],
            });
        }
        // Reduction into the unit cube requires Z^dim inside the sublattice.
        let zn = RationalLattice::integer(dim);
        if !zn.sublattice_of(sublattice)? {
            return Err(LatticeError::SublatticeNotIntegerRefining);
        }
        let super_points = superlattice.points_in_unit_cube()?;
        let sub_points = sublattice.points_in_unit_cube()?;
        // Group the super points into cosets mod sub; canonical rep is the
        // lex-least element of (coset ∩ [0,1)^dim).
        let mut reps: Vec<Vec<Rat>> = Vec::new();
        let mut seen: Vec<Vec<Rat>> = Vec::new();
        for p in &super_points {
            if seen.iter().any(|q| congruent(sublattice, p, q)) {
                continue;
            }
            // Enumerate the coset inside the cube: frac(p + s) over the sub
            // points (sub ⊇ Z^dim makes this the full intersection).
            let mut best = p.clone();
            for s in &sub_points {
                let cand: Vec<Rat> = p
                    .iter()
                    .zip(s.iter())
                    .map(|(a, b)| frac(&(a + b)))
                    .collect();
                if cand < best {
                    best = cand;
                }
            }
            seen.push(p.clone());
            reps.push(best);
        }
        debug_assert_eq!(reps.len() as u64, order);
        reps.sort();
        debug_assert!(reps[0].iter().all(|x| x.is_zero()));
        Ok(CosetPartition {
            superlattice: superlattice.clone(),
            sublattice: sublattice.clone(),
            order,
            representatives: reps,
        })
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn superlattice(&self) -> &RationalLattice {
        &self.superlattice
    }

    pub fn sublattice(&self) -> &RationalLattice {
        &self.sublattice
    }

    pub fn representatives(&self) -> &[Vec<Rat>] {
        &self.representatives
    }

    /// Index of the coset containing `point` (a point of the superlattice).
    pub fn coset_of(&self, point: &[Rat]) -> Result<usize, LatticeError> {
        for (l, rep) in self.representatives.iter().enumerate() {
            if congruent(&self.sublattice, point, rep) {
                return Ok(l);
            }
        }
        Err(LatticeError::NotSublattice)
    }

    /// Exact rational phase `t in [0,1)` of the coset character
    /// `e^{2 pi i (b.u - a.eta)}` evaluated at the representative `(u,eta)`
    /// of coset `l`, for `(a,b)` in the adjoint of the sublattice.
    ///
    /// Well defined: the sublattice annihilates `(a,b)`, so the phase is
    /// independent of the representative.
    pub fn character_phase(&self, l: usize, ab: &[Rat]) -> Result<Rat, LatticeError> {
        let dim = self.superlattice.dim();
        if !dim.is_multiple_of(2) {
            return Err(LatticeError::OddDimension(dim));
        }
        if ab.len() != dim {
            return Err(LatticeError::DimensionMismatch {
                expected: dim,
                got: ab.len(),
            });
        }
        let lambda_tilde = self.sublattice.adjoint()?;
        if !lambda_tilde.member(ab)? {
            return Err(LatticeError::CharacterUndefined);
        }
        let rep = &self.representatives[l];
        Ok(frac(&symplectic_phase(ab, rep)))
    }

    /// Unit-modulus complex value of the character.
    pub fn character(&self, l: usize, ab: &[Rat]) -> Result<num::complex::Complex64, LatticeError> {
        let t = self.character_phase(l, ab)?;
        let theta = 2.0 * std::f64::consts::PI * t.to_f64().expect("finite");
        Ok(num::complex::Complex64::new(theta.cos(), theta.sin()))
    }
}

/// `b . u - a . eta` for `ab = (a,b)` and `point = (u,eta)` split halfway.
pub fn symplectic_phase(ab: &[Rat], point: &[Rat]) -> Rat {
    let d = ab.len() / 2;
    let mut acc = Rat::zero();
    for k in 0..d {
        acc += &ab[d + k] * &point[k]; // b . u
        acc -= &ab[k] * &point[d + k]; // a . eta
    }
    acc
}

fn congruent(lattice: &RationalLattice, p: &[Rat], q: &[Rat]) -> bool {
    let diff: Vec<Rat> = p.iter().zip(q.iter()).map(|(a, b)| a - b).collect();
    lattice.member(&diff).unwrap_or(false)
}

/// A fundamental domain of a lattice containing `Z^dim`, described either
/// as an axis-aligned half-open box (diagonal bases) or as a digit set of
/// half-open grid cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FundamentalDomain {
    Box {
        lattice: RationalLattice,
        sides: Vec<Rat>,
    },
    DigitSet {
        lattice: RationalLattice,
        resolution: Vec<u64>,
        /// Cell anchors, each a point of the grid `idx/resolution`.
        cells: Vec<Vec<Rat>>,
    },
}

impl FundamentalDomain {
    /// Canonical domain of `lattice ⊇ Z^dim`: the box `basis * [0,1)^dim`
    /// for diagonal bases, otherwise a lex-least grid-cell transversal at
    /// the given resolution (which must refine the lattice).
    pub fn of(lattice: &RationalLattice, resolution: &[u64]) -> Result<Self, LatticeError> {
        let dim = lattice.dim();
        let zn = RationalLattice::integer(dim);
        if !zn.sublattice_of(lattice)? {
            return Err(LatticeError::SublatticeNotIntegerRefining);
        }
        if resolution.len() != dim {
            return Err(LatticeError::DimensionMismatch {
                expected: dim,
                got: resolution.len(),
            });
        }
        // Refinement: every basis entry is an integer multiple of the step.
        for i in 0..dim {
            for j in 0..dim {
                let scaled = &lattice.basis()[(i, j)] * rat_int(resolution[i] as i64);
                if !scaled.denom().is_one() {
                    return Err(LatticeError::GridTooCoarse);
                }
            }
        }
        let diagonal =
            (0..dim).all(|i| (0..dim).all(|j| i == j || lattice.basis()[(i, j)].is_zero()));
        if diagonal {
            let sides = (0..dim).map(|i| lattice.basis()[(i, i)].clone()).collect();
            return Ok(FundamentalDomain::Box {
                lattice: lattice.clone(),
                sides,
            });
        }
        // Orbit transversal of grid cells under the finite quotient
        // lattice/Z^dim acting on the torus.
        let translates = lattice.points_in_unit_cube()?;
        let total: u64 = resolution.iter().product();
        let mut taken = vec![false; total as usize];
        let mut cells = Vec::new();
        for flat in 0..total {
            if taken[flat as usize] {
                continue;
            }
            let anchor = unflatten(flat, resolution);
            let anchor_pt: Vec<Rat> = anchor
                .iter()
                .zip(resolution.iter())
                .map(|(&a, &r)| Rat::new(BigInt::from(a), BigInt::from(r)))
                .collect();
            cells.push(anchor_pt.clone());
            for t in &translates {
                let shifted: Vec<Rat> = anchor_pt
                    .iter()
                    .zip(t.iter())
                    .map(|(a, b)| frac(&(a + b)))
                    .collect();
                let idx: Vec<u64> = shifted
                    .iter()
                    .zip(resolution.iter())
                    .map(|(x, &r)| {
                        let scaled = x * rat_int(r as i64);
                        debug_assert!(scaled.denom().is_one());
                        scaled.numer().to_u64().expect("in range")
                    })
                    .collect();
                taken[flatten(&idx, resolution) as usize] = true;
            }
        }
        Ok(FundamentalDomain::DigitSet {
            lattice: lattice.clone(),
            resolution: resolution.to_vec(),
            cells,
        })
    }

    pub fn lattice(&self) -> &RationalLattice {
        match self {
            FundamentalDomain::Box { lattice, .. } => lattice,
            FundamentalDomain::DigitSet { lattice, .. } => lattice,
        }
    }

    /// Whether the point lies in the domain. For digit sets the point must
    /// land on the stored grid.
    pub fn contains(&self, point: &[Rat]) -> bool {
        match self {
            FundamentalDomain::Box { sides, .. } => point
                .iter()
                .zip(sides.iter())
                .all(|(x, s)| !x.is_negative() && x < s),
            FundamentalDomain::DigitSet { cells, .. } => cells.iter().any(|c| c == point),
        }
    }

    /// The unique lattice point `lambda` with `point - lambda` in the
    /// domain. `point` must lie on a grid refining both domain and lattice.
    pub fn anchor_offset(&self, point: &[Rat]) -> Vec<Rat> {
        match self {
            FundamentalDomain::Box { sides, .. } => point
                .iter()
                .zip(sides.iter())
                .map(|(x, s)| x - mod_pos(x, s))
                .collect(),
            FundamentalDomain::DigitSet { lattice, cells, .. } => {
                // Search the unique translate of a cell anchor matching
                // point modulo the lattice.
                for c in cells {
                    let diff: Vec<Rat> = point.iter().zip(c.iter()).map(|(a, b)| a - b).collect();
                    if lattice.member(&diff).unwrap_or(false) {
                        return diff;
                    }
                }
                unreachable!("digit set fails to tile: not a fundamental domain")
            }
        }
    }
}

fn mod_pos(x: &Rat, m: &Rat) -> Rat {
    let q = (x / m).floor();
    x - q * m
}

fn flatten(idx: &[u64], res: &[u64]) -> u64 {
    idx.iter()
        .zip(res.iter())
        .fold(0, |acc, (&i, &r)| acc * r + i)
}

fn unflatten(mut flat: u64, res: &[u64]) -> Vec<u64> {
    let mut idx = vec![0u64; res.len()];
    for k in (0..res.len()).rev() {
        idx[k] = flat % res[k];
        flat /= res[k];
    }
    idx
}

/// All lattices between `inner` and `outer`, via subgroup enumeration of
/// the finite quotient `outer/inner`. Guarded by the quotient order.
pub const INDEX_GUARD: u64 = 10_000;

pub fn intermediate_lattices(
    inner: &RationalLattice,
    outer: &RationalLattice,
) -> Result<Vec<RationalLattice>, LatticeError> {
    let index = inner.index_in(outer)?;
    if index > INDEX_GUARD {
        return Err(LatticeError::IndexGuardExceeded {
            index,
            guard: INDEX_GUARD,
        });
    }
    let dim = inner.dim();
    // Elements of outer/inner as reduced representatives.
    let elements = quotient_elements(inner, outer)?;
    let zero = inner.reduce(&vec![Rat::zero(); dim]);
    let add = |a: &Vec<Rat>, b: &Vec<Rat>| -> Vec<Rat> {
        let sum: Vec<Rat> = a.iter().zip(b.iter()).map(|(x, y)| x + y).collect();
        inner.reduce(&sum)
    };
    // Subgroup closure enumeration.
    let closure = |gens: &BTreeSet<Vec<Rat>>| -> BTreeSet<Vec<Rat>> {
        let mut set: BTreeSet<Vec<Rat>> = BTreeSet::new();
        set.insert(zero.clone());
        let mut frontier: Vec<Vec<Rat>> = vec![zero.clone()];
        while let Some(x) = frontier.pop() {
            for g in gens {
                let y = add(&x, g);
                if set.insert(y.clone()) {
                    frontier.push(y);
                }
            }
        }
        set
    };
    let mut subgroups: BTreeSet<BTreeSet<Vec<Rat>>> = BTreeSet::new();
    let trivial: BTreeSet<Vec<Rat>> = [zero.clone()].into_iter().collect();
    subgroups.insert(trivial.clone());
    let mut frontier = vec![trivial];
    while let Some(h) = frontier.pop() {
        for g in &elements {
            if h.contains(g) {
                continue;
            }
            let mut gens = h.clone();
            gens.insert(g.clone());
            let extended = closure(&gens);
            if subgroups.insert(extended.clone()) {
                frontier.push(extended);
            }
        }
    }
    let mut out: Vec<RationalLattice> = Vec::new();
    let mut seen: BTreeSet<String> = BTreeSet::new();
    for h in subgroups {
        let gens: Vec<Vec<Rat>> = h.into_iter().collect();
        let lat = inner.join(&gens)?;
        if seen.insert(lat.to_string()) {
            out.push(lat);
        }
    }
    // Deterministic report order: coarsest first, then lexicographic on
    // the row-major canonical basis.
    out.sort_by(|a, b| {
        b.covolume()
            .cmp(a.covolume())
            .then_with(|| basis_key(a).cmp(&basis_key(b)))
    });
    Ok(out)
}

fn basis_key(l: &RationalLattice) -> Vec<Rat> {
    let b = l.basis();
    let mut v = Vec::with_capacity(b.rows * b.cols);
    for i in 0..b.rows {
        for j in 0..b.cols {
            v.push(b[(i, j)].clone());
        }
    }
    v
}

/// Representatives of `outer/inner`, reduced into the fundamental
/// parallelepiped of `inner` (not necessarily the unit cube).
fn quotient_elements(
    inner: &RationalLattice,
    outer: &RationalLattice,
) -> Result<Vec<Vec<Rat>>, LatticeError> {
    if !inner.sublattice_of(outer)? {
        return Err(LatticeError::NotSublattice);
    }
    let c = outer.relation_matrix(inner);
    let (diag, u_inv) = smith_diagonalize(&c);
    let dim = inner.dim();
    let u_inv_q = {
        let mut m = QMat::zeros(dim, dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = Rat::from_integer(u_inv[(i, j)].clone());
            }
        }
        m
    };
    let bprime = outer.basis().mul(&u_inv_q);
    let orders: Vec<u64> = (0..dim)
        .map(|i| diag[(i, i)].abs().to_u64().expect("fits"))
        .collect();
    let mut out = BTreeSet::new();
    let mut digits = vec![0u64; dim];
    loop {
        let point: Vec<Rat> = (0..dim)
            .map(|i| {
                (0..dim)
                    .map(|k| &bprime[(i, k)] * rat_int(digits[k] as i64))
                    .fold(Rat::zero(), |a, b| a + b)
            })
            .collect();
        out.insert(inner.reduce(&point));
        let mut k = 0;
        loop {
            if k == dim {
                return Ok(out.into_iter().collect());
            }
            digits[k] += 1;
            if digits[k] < orders[k] {
                break;
            }
            digits[k] = 0;
            k += 1;
        }
    }
}
