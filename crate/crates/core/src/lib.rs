//! Decides and certifies extra time-frequency shift invariance of Gabor
//! spaces G(phi, Lambda) generated by integer lattices.
//!
//! The library pairs exact rational lattice arithmetic (duals, adjoints,
//! quotients) with a finite Zak/Gabor model on C^L in which the
//! zero-pattern characterization of extra invariance can be checked against
//! a brute-force subspace oracle, and produces certified reports: condition
//! verdicts with witnesses, orthogonal decompositions, multiplier
//! certificates, and frame-bound computations.

pub mod finite_gabor;
pub mod invariance;
pub mod lattice;
pub mod qmat;
pub mod sis;
pub mod windows;
pub mod zak;

pub use lattice::{
    intermediate_lattices, parse_lattice, CosetPartition, FundamentalDomain, LatticeError,
    RationalLattice,
};
pub use zak::{
    analytic_zak, finite_zak, inverse_finite_zak, rescale, tf_shift, zak_shift_image, WindowSpec,
    ZakError, ZakGrid, ZakSplit,
};
