//! The zero-pattern characterization of extra time-frequency invariance:
//! condition (d) checks with witnesses, coset masks B^(l) and the
//! orthogonal decomposition they induce, multiplier construction and
//! certification, the brute-force subspace oracle, extreme-case tests,
//! and invariance-set enumeration.

use crate::finite_gabor::{space_basis, tf_shift, vec_norm, FiniteGaborModel, ModelError};
use crate::lattice::{
    format_rat, intermediate_lattices, symplectic_phase, CosetPartition, FundamentalDomain,
    LatticeError, RationalLattice,
};
use crate::qmat::{frac, rat_int, Rat};
use crate::zak::{finite_zak, inverse_finite_zak, phase_to_complex, zak_shift_image, ZakGrid};
use num::complex::Complex64;
use num::{One, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum InvarianceError {
    #[error("lattice chain violated: need Lambda ⊆ Lambda~ ⊆ Z^2d")]
    ChainViolated,
    #[error("grid does not refine the adjoint lattice")]
    GridTooCoarse,
    #[error("the two forms of condition (d) disagree at a node; tolerance artifact")]
    FormDisagreement,
    #[error("condition (d) and the brute-force oracle disagree")]
    OracleMismatch,
    #[error("condition (d) fails: not invariant; no multiplier exists")]
    NotInvariant,
    #[error("(a,b) is not in Lambda~")]
    ShiftOffLattice,
    #[error("invalid mode: {0}")]
    BadMode(String),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Zak(#[from] crate::zak::ZakError),
}

/// Precomputed grid geometry for a lattice pair Lambda ⊆ Lambda~ ⊆ Z^{2d}:
/// the adjoint points inside the Zak cell as node offsets, each labeled
/// with its coset in Lambda° / Lambda~°.
pub struct InvarianceContext {
    pub lambda: RationalLattice,
    pub lambda_tilde: RationalLattice,
    pub cosets: CosetPartition,
    res: Vec<usize>,
    /// (node-index offset, coset label, rational coordinates)
    offsets: Vec<(Vec<usize>, usize, Vec<Rat>)>,
}

impl InvarianceContext {
    pub fn new(
        res: &[usize],
        lambda: &RationalLattice,
        lambda_tilde: &RationalLattice,
    ) -> Result<Self, InvarianceError> {
        let dim = lambda.dim();
        let zn = RationalLattice::integer(dim);
        if !lambda.sublattice_of(lambda_tilde)? || !lambda_tilde.sublattice_of(&zn)? {
            return Err(InvarianceError::ChainViolated);
        }
        let adj = lambda.adjoint()?;
        let adj_tilde = lambda_tilde.adjoint()?;
        let cosets = CosetPartition::new(&adj, &adj_tilde)?;
        let points = adj.points_in_unit_cube()?;
        let mut offsets = Vec::with_capacity(points.len());
        for p in points {
            let mut idx = Vec::with_capacity(dim);
            for (axis, x) in p.iter().enumerate() {
                let scaled = x * rat_int(res[axis] as i64);
                if !scaled.denom().is_one() {
                    return Err(InvarianceError::GridTooCoarse);
                }
                idx.push(scaled.numer().to_usize().expect("in cell"));
            }
            let label = cosets.coset_of(&p)?;
            offsets.push((idx, label, p));
        }
        Ok(InvarianceContext {
            lambda: lambda.clone(),
            lambda_tilde: lambda_tilde.clone(),
            cosets,
            res: res.to_vec(),
            offsets,
        })
    }

    pub fn order(&self) -> u64 {
        self.cosets.order()
    }

    pub fn res(&self) -> &[usize] {
        &self.res
    }

    /// Adjoint cell offsets with their coset labels and coordinates.
    pub fn offsets(&self) -> &[(Vec<usize>, usize, Vec<Rat>)] {
        &self.offsets
    }

    /// Count of Lambda~° points in the cell: the normalizing M of the
    /// coset multiplier.
    pub fn tilde_count(&self) -> usize {
        self.offsets.iter().filter(|(_, l, _)| *l == 0).count()
    }

    pub fn translate(&self, node: &[usize], offset: &[usize]) -> Vec<usize> {
        node.iter()
            .zip(offset.iter())
            .zip(self.res.iter())
            .map(|((&a, &b), &r)| (a + b) % r)
            .collect()
    }
}

/// One violation of the condition-(d) implication, with both magnitudes
/// so borderline verdicts stay auditable.
#[derive(Debug, Clone, Serialize)]
pub struct Witness {
    /// Grid node (x, omega) as rational strings.
    pub node: Vec<String>,
    /// Offending translate (u, eta) in Lambda° \ Lambda~°.
    pub shift: Vec<String>,
    pub magnitude_at_node: f64,
    pub magnitude_at_translate: f64,
}

#[derive(Debug, Clone)]
pub struct ConditionOutcome {
    pub holds: bool,
    pub witnesses: Vec<Witness>,
    /// Maximum number of simultaneously energized cosets at any node
    /// (the second form of condition (d): holds iff this is <= 1).
    pub max_energized_cosets: usize,
    pub order: u64,
    pub tau_abs: f64,
}

/// Condition (d): wherever |Z phi| exceeds tau, every translate by
/// Lambda° \ Lambda~° must vanish. Also evaluates the coset-energy form
/// and errors if the two forms disagree.
pub fn condition_d(
    grid: &ZakGrid,
    ctx: &InvarianceContext,
    tau_rel: f64,
) -> Result<ConditionOutcome, InvarianceError> {
    if ctx.res() != grid.res() {
        return Err(InvarianceError::GridTooCoarse);
    }
    let tau_abs = tau_rel * grid.max_abs();
    let mags: Vec<f64> = grid.values().iter().map(|v| v.norm()).collect();
    let n_cosets = ctx.order() as usize;
    let mut witnesses = Vec::new();
    let mut max_energized = 0usize;
    let mut energies = vec![0.0f64; n_cosets];
    for flat in 0..grid.node_count() {
        let node = grid.unflatten(flat);
        energies.iter_mut().for_each(|e| *e = 0.0);
        for (off_idx, label, _) in &ctx.offsets {
            let t = grid.flat(&ctx.translate(&node, off_idx));
            energies[*label] += mags[t] * mags[t];
        }
        let energized = energies.iter().filter(|&&e| e > tau_abs * tau_abs).count();
        max_energized = max_energized.max(energized);
        if mags[flat] > tau_abs {
            for (off_idx, label, coords) in &ctx.offsets {
                if *label == 0 {
                    continue;
                }
                let t = grid.flat(&ctx.translate(&node, off_idx));
                if mags[t] > tau_abs {
                    witnesses.push(Witness {
                        node: grid.coord(&node).iter().map(format_rat).collect(),
                        shift: coords.iter().map(format_rat).collect(),
                        magnitude_at_node: mags[flat],
                        magnitude_at_translate: mags[t],
                    });
                }
            }
        }
    }
    let holds = witnesses.is_empty();
    if holds != (max_energized <= 1) {
        return Err(InvarianceError::FormDisagreement);
    }
    Ok(ConditionOutcome {
        holds,
        witnesses,
        max_energized_cosets: max_energized,
        order: ctx.order(),
        tau_abs,
    })
}

/// The masks B^(l): unions of coset translates of a fundamental domain of
/// Lambda°, realized as boolean grids over the Zak cell.
pub struct MaskFamily {
    pub res: Vec<usize>,
    /// masks[l][flat node index]
    pub masks: Vec<Vec<bool>>,
}

impl MaskFamily {
    /// Every node belongs to exactly one mask: the coset of the unique
    /// lattice translate taking it into the domain.
    pub fn build(
        cosets: &CosetPartition,
        domain: &FundamentalDomain,
        res: &[usize],
    ) -> Result<Self, InvarianceError> {
        let adj = cosets.superlattice();
        if domain.lattice() != adj {
            return Err(InvarianceError::ChainViolated);
        }
        let dim = adj.dim();
        // The grid must refine the domain lattice.
        for i in 0..dim {
            for j in 0..dim {
                let scaled = &adj.basis()[(i, j)] * rat_int(res[i] as i64);
                if !scaled.denom().is_one() {
                    return Err(InvarianceError::GridTooCoarse);
                }
            }
        }
        if let FundamentalDomain::DigitSet { resolution, .. } = domain {
            for (axis, &r) in resolution.iter().enumerate() {
                if !(res[axis] as u64).is_multiple_of(r) {
                    return Err(InvarianceError::GridTooCoarse);
                }
            }
        }
        let total: usize = res.iter().product();
        let n = cosets.order() as usize;
        let mut masks = vec![vec![false; total]; n];
        let mut idx = vec![0usize; res.len()];
        for flat in 0..total {
            let coords: Vec<Rat> = idx
                .iter()
                .zip(res.iter())
                .map(|(&i, &r)| Rat::new(num::BigInt::from(i), num::BigInt::from(r)))
                .collect();
            let offset = domain.anchor_offset(&coords);
            let label = cosets.coset_of(&offset)?;
            masks[label][flat] = true;
            let _ = flat;
            for k in (0..res.len()).rev() {
                idx[k] += 1;
                if idx[k] < res[k] {
                    break;
                }
                idx[k] = 0;
            }
        }
        Ok(MaskFamily {
            res: res.to_vec(),
            masks,
        })
    }

    pub fn mask(&self, l: usize) -> &[bool] {
        &self.masks[l]
    }

    pub fn count(&self) -> usize {
        self.masks.len()
    }
}

/// Orthogonal components f^(l) = Z^{-1}(Zf . chi_{B^(l)}) and their
/// diagnostics.
pub struct Decomposition {
    pub components: Vec<Vec<Complex64>>,
    pub norms: Vec<f64>,
    pub max_cross: f64,
    pub sum_residual: f64,
    pub condition_held: bool,
    /// Membership of each component in G(phi, Lambda); only asserted
    /// meaningful when `condition_held`.
    pub memberships: Vec<bool>,
}

/// Splits f along the coset masks of Lambda°/Lambda~° in the finite model.
/// When condition (d) fails the components are still returned but flagged.
pub fn decompose(
    f: &[Complex64],
    model: &FiniteGaborModel,
    lambda_tilde: &RationalLattice,
    tau_rel: f64,
    tol: f64,
) -> Result<Decomposition, InvarianceError> {
    let split = model.split();
    let res = [split.n, split.m];
    let lambda = model.continuous_lattice();
    let ctx = InvarianceContext::new(&res, &lambda, lambda_tilde)?;
    let cond = condition_d(model.zak_window(), &ctx, tau_rel)?;
    let domain = FundamentalDomain::of(&lambda.adjoint()?, &[res[0] as u64, res[1] as u64])?;
    let masks = MaskFamily::build(&ctx.cosets, &domain, &res)?;
    let zf = finite_zak(f, split)?;
    let mut components = Vec::with_capacity(masks.count());
    for l in 0..masks.count() {
        let vals: Vec<Complex64> = zf
            .values()
            .iter()
            .zip(masks.mask(l).iter())
            .map(|(v, &keep)| if keep { *v } else { Complex64::zero() })
            .collect();
        components.push(inverse_finite_zak(&ZakGrid::new_finite(split, vals))?);
    }
    let norms: Vec<f64> = components.iter().map(|c| vec_norm(c)).collect();
    let mut max_cross = 0.0f64;
    for i in 0..components.len() {
        for j in i + 1..components.len() {
            let dot: Complex64 = components[i]
                .iter()
                .zip(components[j].iter())
                .map(|(a, b)| a * b.conj())
                .sum();
            max_cross = max_cross.max(dot.norm());
        }
    }
    let mut sum = vec![Complex64::zero(); f.len()];
    for c in &components {
        for (s, v) in sum.iter_mut().zip(c.iter()) {
            *s += v;
        }
    }
    let sum_residual = f
        .iter()
        .zip(sum.iter())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt();
    // A component whose whole norm sits below the tolerance scale of f is
    // numerically zero and trivially a member.
    let scale = vec_norm(f);
    let memberships = components
        .iter()
        .map(|c| {
            if vec_norm(c) <= tol * scale {
                return Ok(true);
            }
            model.membership(c, tol).map(|(ok, _)| ok)
        })
        .collect::<Result<Vec<bool>, ModelError>>()?;
    Ok(Decomposition {
        components,
        norms,
        max_cross,
        sum_residual,
        condition_held: cond.holds,
        memberships,
    })
}

/// The coset multiplier: averaged phase sum over Lambda° ∩ cell against
/// the mask B^(l),
///   h^(l)_{a,b}(x,w) = (1/M) sum e^{2 pi i [b(x+u) - a(w+eta)]} chi(x+u, w+eta),
/// which satisfies h . chi_{B^(l)} = e^{2 pi i (b x - a w)} chi_{B^(l)}
/// exactly at grid nodes. The surviving translates sit in Lambda~° and
/// already carry the target phase, so no per-coset prefactor appears.
pub fn multiplier_coset(
    ctx: &InvarianceContext,
    masks: &MaskFamily,
    l: usize,
    ab: &[Rat],
) -> Result<Vec<Complex64>, InvarianceError> {
    if !ctx.lambda_tilde.member(ab)? {
        return Err(InvarianceError::ShiftOffLattice);
    }
    let m_count = ctx.tilde_count() as f64;
    let res = ctx.res();
    let total: usize = res.iter().product();
    let mut out = vec![Complex64::zero(); total];
    let mut idx = vec![0usize; res.len()];
    for slot in out.iter_mut() {
        let coords: Vec<Rat> = idx
            .iter()
            .zip(res.iter())
            .map(|(&i, &r)| Rat::new(num::BigInt::from(i), num::BigInt::from(r)))
            .collect();
        let mut acc = Complex64::zero();
        for (off_idx, _, off_coords) in &ctx.offsets {
            let wrapped = ctx.translate(&idx, off_idx);
            let wrapped_flat = wrapped
                .iter()
                .zip(res.iter())
                .fold(0usize, |a, (&i, &r)| a * r + i);
            if masks.mask(l)[wrapped_flat] {
                let translated: Vec<Rat> = coords
                    .iter()
                    .zip(off_coords.iter())
                    .map(|(a, b)| a + b)
                    .collect();
                acc += phase_to_complex(&frac(&symplectic_phase(ab, &translated)));
            }
        }
        *slot = acc / m_count;
        for k in (0..res.len()).rev() {
            idx[k] += 1;
            if idx[k] < res[k] {
                break;
            }
            idx[k] = 0;
        }
    }
    Ok(out)
}

/// The (d) => (a) multiplier: on a fundamental domain of Lambda° the value
/// is the coset character times e^{2 pi i (b x - a w)} where a unique coset
/// carries the orbit energy, zero on dead orbits; extended
/// Lambda°-periodically. Errors when condition (d) fails.
pub fn multiplier_from_pattern(
    grid: &ZakGrid,
    ctx: &InvarianceContext,
    ab: &[Rat],
    tau_rel: f64,
) -> Result<Vec<Complex64>, InvarianceError> {
    let cond = condition_d(grid, ctx, tau_rel)?;
    if !cond.holds {
        return Err(InvarianceError::NotInvariant);
    }
    if !ctx.lambda_tilde.member(ab)? {
        return Err(InvarianceError::ShiftOffLattice);
    }
    let res = ctx.res();
    let adj = ctx.lambda.adjoint()?;
    let res_u64: Vec<u64> = res.iter().map(|&r| r as u64).collect();
    let domain = FundamentalDomain::of(&adj, &res_u64)?;
    let tau_abs = tau_rel * grid.max_abs();
    let total: usize = res.iter().product();
    let mut out = vec![Complex64::zero(); total];
    for flat in 0..total {
        let node = grid.unflatten(flat);
        let coords = grid.coord(&node);
        // Reduce to the domain node and evaluate there.
        let lat_offset = domain.anchor_offset(&coords);
        let d_coords: Vec<Rat> = coords
            .iter()
            .zip(lat_offset.iter())
            .map(|(a, b)| a - b)
            .collect();
        let d_node: Vec<usize> = d_coords
            .iter()
            .zip(res.iter())
            .map(|(x, &r)| {
                let scaled = x * rat_int(r as i64);
                scaled.numer().to_usize().expect("on grid")
            })
            .collect();
        // Which coset carries energy on the orbit of the domain node?
        let mut carrier: Option<usize> = None;
        for (off_idx, label, _) in &ctx.offsets {
            let t = grid.flat(&ctx.translate(&d_node, off_idx));
            if grid.values()[t].norm() > tau_abs {
                carrier = Some(*label);
                break;
            }
        }
        if let Some(l0) = carrier {
            let character = ctx.cosets.character(l0, ab)?;
            let base = phase_to_complex(&frac(&symplectic_phase(ab, &d_coords)));
            out[flat] = character * base;
        }
    }
    Ok(out)
}

/// Certificate residual max over nodes of |Z[pi(a,b) phi] - h . Z phi| for
/// a finite model, with the shifted Zak computed through the transform
/// itself, independent of the phase law used to build h.
pub fn multiplier_certificate(
    model: &FiniteGaborModel,
    h: &[Complex64],
    ab: &[Rat],
) -> Result<f64, InvarianceError> {
    let split = model.split();
    let a = (&ab[0] * rat_int(split.n as i64))
        .to_i64()
        .expect("integer shift");
    let b = (&ab[1] * rat_int(split.m as i64))
        .to_i64()
        .expect("integer shift");
    let shifted = zak_shift_image(model.zak_window(), a, b)?;
    let mut worst = 0.0f64;
    for (i, sv) in shifted.values().iter().enumerate() {
        let predicted = h[i] * model.zak_window().values()[i];
        worst = worst.max((sv - predicted).norm());
    }
    Ok(worst)
}

/// Brute-force invariance oracle: pi(a,b) maps an orthonormal basis of
/// G(phi, Lambda) back into the span, to within tol per basis vector.
/// Implemented from the definition via rank-revealing orthogonalization,
/// independent of the Zak-domain machinery.
pub fn brute_force_invariant(model: &FiniteGaborModel, a: i64, b: i64, tol: f64) -> bool {
    let basis = space_basis(&model.gabor_matrix(), 1e-10);
    (0..basis.rank()).all(|j| {
        let v = basis.column(j);
        basis.residual(&tf_shift(&v, a, b)) <= tol
    })
}

/// Lattice-level oracle: checks the generators of Lambda~ (mapped to
/// samples); group closure extends the verdict to the whole lattice.
pub fn brute_force_lattice_invariant(
    model: &FiniteGaborModel,
    lambda_tilde: &RationalLattice,
    tol: f64,
) -> Result<bool, InvarianceError> {
    let split = model.split();
    for j in 0..lambda_tilde.dim() {
        let col = lambda_tilde.basis().column(j);
        let a = (&col[0] * rat_int(split.n as i64))
            .to_i64()
            .ok_or(InvarianceError::ChainViolated)?;
        let b = (&col[1] * rat_int(split.m as i64))
            .to_i64()
            .ok_or(InvarianceError::ChainViolated)?;
        if !brute_force_invariant(model, a, b, tol) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Outcome of the Z^{2d}-invariance test: at most one node of each
/// Lambda°-orbit may carry energy; the Riesz refinement requires exactly
/// one.
#[derive(Debug, Clone)]
pub struct IntegerInvariance {
    pub invariant: bool,
    /// A certifying fundamental domain: one node per orbit (the energized
    /// one where present). Present iff invariant.
    pub domain_nodes: Option<Vec<Vec<usize>>>,
    /// Two energized nodes of one orbit, when not invariant.
    pub witness: Option<(Vec<usize>, Vec<usize>)>,
    pub exactly_one_per_orbit: bool,
}

pub fn integer_invariance(
    grid: &ZakGrid,
    lambda: &RationalLattice,
    tau_rel: f64,
) -> Result<IntegerInvariance, InvarianceError> {
    let ctx = InvarianceContext::new(grid.res(), lambda, lambda)?;
    let tau_abs = tau_rel * grid.max_abs();
    let total = grid.node_count();
    let mut visited = vec![false; total];
    let mut domain_nodes = Vec::new();
    let mut witness = None;
    let mut exactly_one = true;
    for flat in 0..total {
        if visited[flat] {
            continue;
        }
        let node = grid.unflatten(flat);
        let mut orbit = Vec::with_capacity(ctx.offsets.len());
        for (off_idx, _, _) in &ctx.offsets {
            let t = ctx.translate(&node, off_idx);
            let tf = grid.flat(&t);
            visited[tf] = true;
            orbit.push(t);
        }
        orbit.sort();
        orbit.dedup();
        let energized: Vec<&Vec<usize>> = orbit
            .iter()
            .filter(|n| grid.values()[grid.flat(n)].norm() > tau_abs)
            .collect();
        match energized.len() {
            0 => {
                exactly_one = false;
                domain_nodes.push(orbit[0].clone());
            }
            1 => domain_nodes.push(energized[0].clone()),
            _ => {
                if witness.is_none() {
                    witness = Some((energized[0].clone(), energized[1].clone()));
                }
            }
        }
    }
    let invariant = witness.is_none();
    domain_nodes.sort();
    Ok(IntegerInvariance {
        invariant,
        domain_nodes: if invariant { Some(domain_nodes) } else { None },
        witness,
        exactly_one_per_orbit: invariant && exactly_one,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShiftMode {
    Translation,
    Modulation,
    All,
}

impl std::str::FromStr for ShiftMode {
    type Err = InvarianceError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "translation" => Ok(ShiftMode::Translation),
            "modulation" => Ok(ShiftMode::Modulation),
            "all" => Ok(ShiftMode::All),
            other => Err(InvarianceError::BadMode(other.to_string())),
        }
    }
}

/// Verdict for the extreme cases with Lambda = Z^{2d}: full translation
/// invariance needs the support to be a product [0,1)^d x E (every
/// frequency row entirely energized or entirely dead); modulation is the
/// transposed test; `All` requires an all-or-nothing pattern.
#[derive(Debug, Clone)]
pub struct FullShiftOutcome {
    pub holds: bool,
    /// Row (or column) multi-indices forming E when the test holds.
    pub level_set: Option<Vec<Vec<usize>>>,
    /// A mixed row: (row index, energized node, dead node).
    pub witness: Option<(Vec<usize>, Vec<usize>, Vec<usize>)>,
}

pub fn full_shift_invariance(
    grid: &ZakGrid,
    mode: ShiftMode,
    tau_rel: f64,
) -> Result<FullShiftOutcome, InvarianceError> {
    let tau_abs = tau_rel * grid.max_abs();
    let d = grid.half_dim();
    match mode {
        ShiftMode::All => {
            let t = full_shift_invariance(grid, ShiftMode::Translation, tau_rel)?;
            let m = full_shift_invariance(grid, ShiftMode::Modulation, tau_rel)?;
            let nonzero = grid.values().iter().filter(|v| v.norm() > tau_abs).count();
            let all_or_nothing = nonzero == 0 || nonzero == grid.node_count();
            Ok(FullShiftOutcome {
                holds: t.holds && m.holds && all_or_nothing,
                level_set: None,
                witness: t.witness.or(m.witness),
            })
        }
        ShiftMode::Translation | ShiftMode::Modulation => {
            // Group nodes by the frequency part (translation) or the time
            // part (modulation); each group must be all-energized or dead.
            let group_axes: Vec<usize> = match mode {
                ShiftMode::Translation => (d..2 * d).collect(),
                _ => (0..d).collect(),
            };
            let mut groups: std::collections::BTreeMap<Vec<usize>, (Vec<usize>, Vec<usize>)> =
                std::collections::BTreeMap::new();
            for flat in 0..grid.node_count() {
                let node = grid.unflatten(flat);
                let key: Vec<usize> = group_axes.iter().map(|&ax| node[ax]).collect();
                let slot = groups.entry(key).or_default();
                if grid.values()[flat].norm() > tau_abs {
                    if slot.0.is_empty() {
                        slot.0 = node.clone();
                    }
                } else if slot.1.is_empty() {
                    slot.1 = node.clone();
                }
            }
            let mut level_set = Vec::new();
            for (key, (hot, cold)) in &groups {
                if !hot.is_empty() && !cold.is_empty() {
                    return Ok(FullShiftOutcome {
                        holds: false,
                        level_set: None,
                        witness: Some((key.clone(), hot.clone(), cold.clone())),
                    });
                }
                if !hot.is_empty() {
                    level_set.push(key.clone());
                }
            }
            Ok(FullShiftOutcome {
                holds: true,
                level_set: Some(level_set),
                witness: None,
            })
        }
    }
}

/// Per-lattice verdict row of an invariance-set sweep.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub lattice: RationalLattice,
    pub condition_d: bool,
    pub oracle: Option<bool>,
}

pub struct InvarianceSet {
    pub rows: Vec<SweepRow>,
    /// Join of all invariant lattices; itself re-verified invariant.
    pub maximal: RationalLattice,
    pub join_verified: bool,
}

/// Sweeps every lattice between the model's and the ambient, evaluating
/// condition (d) (and optionally the oracle) for each; the maximal
/// invariant lattice is the join of the invariant ones, re-verified
/// rather than assumed.
pub fn invariance_set(
    model: &FiniteGaborModel,
    ambient: &RationalLattice,
    tau_rel: f64,
    tol: f64,
    use_oracle: bool,
) -> Result<InvarianceSet, InvarianceError> {
    let lambda = model.continuous_lattice();
    let split = model.split();
    let res = [split.n, split.m];
    let mut rows = Vec::new();
    let mut invariant: Vec<RationalLattice> = Vec::new();
    for tilde in intermediate_lattices(&lambda, ambient)? {
        let ctx = InvarianceContext::new(&res, &lambda, &tilde)?;
        let cond = condition_d(model.zak_window(), &ctx, tau_rel)?;
        let oracle = if use_oracle {
            let o = brute_force_lattice_invariant(model, &tilde, tol)?;
            if o != cond.holds {
                return Err(InvarianceError::OracleMismatch);
            }
            Some(o)
        } else {
            None
        };
        if cond.holds {
            invariant.push(tilde.clone());
        }
        rows.push(SweepRow {
            lattice: tilde,
            condition_d: cond.holds,
            oracle,
        });
    }
    let mut maximal = lambda.clone();
    for l in &invariant {
        let gens: Vec<Vec<Rat>> = (0..l.dim()).map(|j| l.basis().column(j)).collect();
        maximal = maximal.join(&gens)?;
    }
    let ctx = InvarianceContext::new(&res, &lambda, &maximal)?;
    let join_verified = condition_d(model.zak_window(), &ctx, tau_rel)?.holds;
    Ok(InvarianceSet {
        rows,
        maximal,
        join_verified,
    })
}

/// JSON report per the CLI contract.
#[derive(Debug, Serialize)]
pub struct InvarianceReport {
    pub lambda: String,
    pub lambda_tilde: String,
    #[serde(rename = "N")]
    pub order: u64,
    pub condition_d: bool,
    pub witnesses: Vec<Witness>,
    pub max_energized_cosets: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decomposition: Option<DecompositionReport>,
    pub resolution: ResolutionReport,
}

#[derive(Debug, Serialize)]
pub struct DecompositionReport {
    pub norms: Vec<f64>,
    pub max_cross: f64,
    pub sum_residual: f64,
    pub memberships: Vec<bool>,
}

#[derive(Debug, Serialize)]
pub struct ResolutionReport {
    pub res: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none", rename = "L")]
    pub l: Option<usize>,
    pub tau: f64,
    pub tol: f64,
}

/// Assembles the full report for a finite model; errors with
/// `OracleMismatch` when the oracle contradicts condition (d).
pub fn check_report(
    model: &FiniteGaborModel,
    lambda_tilde: &RationalLattice,
    tau_rel: f64,
    tol: f64,
    use_oracle: bool,
    with_decomposition: bool,
) -> Result<InvarianceReport, InvarianceError> {
    let split = model.split();
    let res = [split.n, split.m];
    let lambda = model.continuous_lattice();
    let ctx = InvarianceContext::new(&res, &lambda, lambda_tilde)?;
    let cond = condition_d(model.zak_window(), &ctx, tau_rel)?;
    let oracle = if use_oracle {
        let o = brute_force_lattice_invariant(model, lambda_tilde, tol)?;
        if o != cond.holds {
            return Err(InvarianceError::OracleMismatch);
        }
        Some(o)
    } else {
        None
    };
    let decomposition = if with_decomposition {
        let d = decompose(model.window(), model, lambda_tilde, tau_rel, tol)?;
        Some(DecompositionReport {
            norms: d.norms,
            max_cross: d.max_cross,
            sum_residual: d.sum_residual,
            memberships: d.memberships,
        })
    } else {
        None
    };
    Ok(InvarianceReport {
        lambda: lambda.to_string(),
        lambda_tilde: lambda_tilde.to_string(),
        order: cond.order,
        condition_d: cond.holds,
        witnesses: cond.witnesses,
        max_energized_cosets: cond.max_energized_cosets,
        oracle,
        decomposition,
        resolution: ResolutionReport {
            res: res.to_vec(),
            l: Some(split.l),
            tau: tau_rel,
            tol,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::parse_lattice;
    use crate::windows::{window_from_mask, PhaseRule};
    use crate::zak::{ZakGrid, ZakSplit};
    use approx::assert_abs_diff_eq;

    const TAU: f64 = 1e-9;
    const TOL: f64 = 1e-9;

    fn lat(s: &str) -> RationalLattice {
        parse_lattice(s).unwrap()
    }

    fn example_lambda() -> RationalLattice {
        lat("4,0;0,2")
    }

    /// Context and masks of the running example on the continuous (8,4)
    /// grid.
    fn example_masks(tilde: &RationalLattice) -> (InvarianceContext, MaskFamily) {
        let ctx = InvarianceContext::new(&[8, 4], &example_lambda(), tilde).unwrap();
        let domain = FundamentalDomain::of(&example_lambda().adjoint().unwrap(), &[8, 4]).unwrap();
        let masks = MaskFamily::build(&ctx.cosets, &domain, &[8, 4]).unwrap();
        (ctx, masks)
    }

    fn cell_set(masks: &MaskFamily, l: usize) -> Vec<(usize, usize)> {
        masks
            .mask(l)
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(flat, _)| (flat / masks.res[1], flat % masks.res[1]))
            .collect()
    }

    /// The finite-model chi_{B^(0)} window for a given Lambda~ at L = 32.
    fn b0_window(tilde: &RationalLattice) -> Vec<Complex64> {
        let split = ZakSplit::new(32, 4).unwrap();
        let domain = FundamentalDomain::of(&example_lambda().adjoint().unwrap(), &[4, 8]).unwrap();
        let cosets = CosetPartition::new(
            &example_lambda().adjoint().unwrap(),
            &tilde.adjoint().unwrap(),
        )
        .unwrap();
        let masks = MaskFamily::build(&cosets, &domain, &[4, 8]).unwrap();
        window_from_mask(masks.mask(0), split, &PhaseRule::One)
            .unwrap()
            .finite_vector()
            .unwrap()
    }

    fn flat_window() -> Vec<Complex64> {
        let split = ZakSplit::new(32, 4).unwrap();
        inverse_finite_zak(&ZakGrid::new_finite(
            split,
            vec![Complex64::new(1.0, 0.0); 32],
        ))
        .unwrap()
    }

    #[test]
    fn masks_partition_and_match_paper_figures() {
        // Case (viii): B^(0) within the cell is [0,1/2) x [0,1/4), grid
        // cells x in {0..3}, w = 0 at resolution (8,4).
        let (_, masks) = example_masks(&lat("1,0;0,1"));
        assert_eq!(masks.count(), 8);
        assert_eq!(cell_set(&masks, 0), vec![(0, 0), (1, 0), (2, 0), (3, 0)]);
        // Case (vi): N = 2 and B^(0) is the four shaded half-by-quarter
        // boxes of the figure.
        let (_, masks) = example_masks(&lat("4,2;0,1"));
        assert_eq!(masks.count(), 2);
        let mut expect = Vec::new();
        for x in 0..4 {
            expect.push((x, 0));
            expect.push((x, 2));
        }
        for x in 4..8 {
            expect.push((x, 1));
            expect.push((x, 3));
        }
        expect.sort();
        assert_eq!(cell_set(&masks, 0), expect);
        // N = 1: a single mask covering the whole cell.
        let (_, masks) = example_masks(&example_lambda());
        assert_eq!(masks.count(), 1);
        assert!(masks.mask(0).iter().all(|&b| b));
        // Partition + Lambda~°-periodicity in every case.
        for tilde in intermediate_lattices(&example_lambda(), &lat("1,0;0,1")).unwrap() {
            let (ctx, masks) = example_masks(&tilde);
            for flat in 0..32 {
                let hits = (0..masks.count()).filter(|&l| masks.mask(l)[flat]).count();
                assert_eq!(hits, 1, "masks must partition the cell");
            }
            for (off, label, _) in ctx.offsets() {
                if *label != 0 {
                    continue;
                }
                for l in 0..masks.count() {
                    for flat in 0..32usize {
                        let node = [flat / 4, flat % 4];
                        let t = ctx.translate(&node, off);
                        assert_eq!(
                            masks.mask(l)[flat],
                            masks.mask(l)[t[0] * 4 + t[1]],
                            "B^(l) must be Lambda~°-periodic"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn condition_d_on_constructed_patterns() {
        let split = ZakSplit::new(32, 4).unwrap();
        let tilde = lat("1,0;0,1");
        let ctx = InvarianceContext::new(&[4, 8], &example_lambda(), &tilde).unwrap();
        // chi_{B^(0)} pattern: true, order 8.
        let grid = finite_zak(&b0_window(&tilde), split).unwrap();
        let out = condition_d(&grid, &ctx, TAU).unwrap();
        assert!(out.holds);
        assert!(out.witnesses.is_empty());
        assert_eq!(out.order, 8);
        assert_eq!(out.max_energized_cosets, 1);
        // All-ones pattern: false, first witness at the origin.
        let ones = ZakGrid::new_finite(split, vec![Complex64::new(1.0, 0.0); 32]);
        let out = condition_d(&ones, &ctx, TAU).unwrap();
        assert!(!out.holds);
        assert_eq!(out.max_energized_cosets, 8);
        assert_eq!(
            out.witnesses[0].node,
            vec!["0".to_string(), "0".to_string()]
        );
        // Zero pattern: vacuously true.
        let zero = ZakGrid::new_finite(split, vec![Complex64::zero(); 32]);
        assert!(condition_d(&zero, &ctx, TAU).unwrap().holds);
    }

    #[test]
    fn condition_d_rejects_bad_inputs() {
        assert!(matches!(
            InvarianceContext::new(&[8, 4], &lat("1,0;0,1"), &lat("4,0;0,2")),
            Err(InvarianceError::ChainViolated)
        ));
        assert!(matches!(
            InvarianceContext::new(&[2, 2], &example_lambda(), &lat("1,0;0,1")),
            Err(InvarianceError::GridTooCoarse)
        ));
    }

    #[test]
    fn monotonicity_along_the_chain() {
        // Invariance for a coarser Lambda~2 implies it for any Lambda~1
        // between Lambda and Lambda~2.
        let split = ZakSplit::new(32, 4).unwrap();
        let tilde2 = lat("1,0;0,1");
        let grid = finite_zak(&b0_window(&tilde2), split).unwrap();
        for tilde1 in intermediate_lattices(&example_lambda(), &tilde2).unwrap() {
            let ctx = InvarianceContext::new(&[4, 8], &example_lambda(), &tilde1).unwrap();
            assert!(
                condition_d(&grid, &ctx, TAU).unwrap().holds,
                "monotonicity failed at {tilde1}"
            );
        }
    }

    #[test]
    fn decompose_parseval_and_membership() {
        let split = ZakSplit::new(32, 4).unwrap();
        let tilde = lat("1,0;0,1");
        let phi = b0_window(&tilde);
        let model = FiniteGaborModel::new(split, lat("16,0;0,16"), phi.clone()).unwrap();
        // f = pi(a,b) phi for (a,b) = (1,1) in Lambda~ (samples (4, 8)):
        // supp Zf = supp Z phi stays inside B^(0).
        let f = tf_shift(&phi, 4, 8);
        let d = decompose(&f, &model, &tilde, TAU, TOL).unwrap();
        assert!(d.condition_held);
        let total: f64 = d.norms.iter().map(|n| n * n).sum();
        assert_abs_diff_eq!(total, vec_norm(&f).powi(2), epsilon = 1e-12);
        assert!(d.max_cross < 1e-10);
        assert!(d.sum_residual < 1e-12);
        assert_abs_diff_eq!(d.norms[0], vec_norm(&f), epsilon = 1e-10);
        for l in 1..d.norms.len() {
            assert!(d.norms[l] < 1e-12);
        }
        assert!(d.memberships.iter().all(|&b| b));
        // Trivial N = 1 decomposition returns f itself.
        let d1 = decompose(&f, &model, &example_lambda(), TAU, TOL).unwrap();
        assert_eq!(d1.components.len(), 1);
        for (a, b) in d1.components[0].iter().zip(f.iter()) {
            assert!((a - b).norm() < 1e-12);
        }
        // Random f against a non-invariant window: Parseval still holds,
        // condition flagged false.
        let model_ones = FiniteGaborModel::new(split, lat("16,0;0,16"), flat_window()).unwrap();
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        let f: Vec<Complex64> = (0..32)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let d = decompose(&f, &model_ones, &tilde, TAU, TOL).unwrap();
        assert!(!d.condition_held);
        let total: f64 = d.norms.iter().map(|n| n * n).sum();
        assert_abs_diff_eq!(total, vec_norm(&f).powi(2), epsilon = 1e-12);
        assert!(d.sum_residual < 1e-12);
    }

    #[test]
    fn multiplier_coset_intertwines_shifts_on_components() {
        // The operational content of the coset multiplier: for any f with
        // supp Zf inside B^(l) and any (a,b) in Lambda~,
        //   h^(l)_{a,b} . Zf = Z[pi(a,b) f],
        // with the shifted Zak computed through the transform itself.
        let split = ZakSplit::new(32, 4).unwrap();
        for tilde in intermediate_lattices(&example_lambda(), &lat("1,0;0,1")).unwrap() {
            let ctx = InvarianceContext::new(&[4, 8], &example_lambda(), &tilde).unwrap();
            let domain =
                FundamentalDomain::of(&example_lambda().adjoint().unwrap(), &[4, 8]).unwrap();
            let masks = MaskFamily::build(&ctx.cosets, &domain, &[4, 8]).unwrap();
            // A generic vector cut down to each mask.
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(55);
            let g: Vec<Complex64> = (0..32)
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let zg = finite_zak(&g, split).unwrap();
            let g0 = tilde.basis().column(0);
            let g1 = tilde.basis().column(1);
            for l in 0..masks.count() {
                let vals: Vec<Complex64> = zg
                    .values()
                    .iter()
                    .zip(masks.mask(l).iter())
                    .map(|(v, &on)| if on { *v } else { Complex64::zero() })
                    .collect();
                let zf = ZakGrid::new_finite(split, vals);
                for (i, j) in [(1i64, 0i64), (0, 1), (1, 1), (-1, 2)] {
                    let ab: Vec<Rat> = (0..2)
                        .map(|k| &g0[k] * rat_int(i) + &g1[k] * rat_int(j))
                        .collect();
                    let h = multiplier_coset(&ctx, &masks, l, &ab).unwrap();
                    let a = (&ab[0] * rat_int(4)).to_i64().unwrap();
                    let b = (&ab[1] * rat_int(8)).to_i64().unwrap();
                    let shifted = zak_shift_image(&zf, a, b).unwrap();
                    for flat in 0..32usize {
                        let predicted = h[flat] * zf.values()[flat];
                        assert!(
                            (shifted.values()[flat] - predicted).norm() < 1e-12,
                            "tilde={tilde} l={l} ab=({i},{j}) flat={flat}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn oracle_equivalence_on_a_non_separable_base() {
        // Base lattice (4 2; 0 1) Z^2 (non-diagonal): its adjoint forces
        // digit-set fundamental domains through the whole pipeline.
        let split = ZakSplit::new(32, 4).unwrap();
        let lambda = lat("4,2;0,1");
        let sample = lat("16,8;0,8"); // diag(4, 8) * lambda
        let tildes = intermediate_lattices(&lambda, &lat("1,0;0,1")).unwrap();
        assert_eq!(tildes.len(), 3); // Z^2 / lambda is cyclic of order 4
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(91);
        for seed in 0..25u64 {
            let mask: Vec<bool> = (0..32).map(|_| rng.gen_bool(0.4)).collect();
            let phi = window_from_mask(&mask, split, &PhaseRule::RandomUnit { seed: 7000 + seed })
                .unwrap()
                .finite_vector()
                .unwrap();
            let model = FiniteGaborModel::new(split, sample.clone(), phi).unwrap();
            for tilde in &tildes {
                let ctx = InvarianceContext::new(&[4, 8], &lambda, tilde).unwrap();
                let cond = condition_d(model.zak_window(), &ctx, TAU).unwrap().holds;
                let oracle = brute_force_lattice_invariant(&model, tilde, TOL).unwrap();
                assert_eq!(cond, oracle, "seed={seed} tilde={tilde}");
            }
        }
        // And a structured invariant case: the B^(0) window of the chain's
        // top, decomposed and certified.
        let adj = lambda.adjoint().unwrap();
        let domain = FundamentalDomain::of(&adj, &[4, 8]).unwrap();
        assert!(matches!(domain, FundamentalDomain::DigitSet { .. }));
        let cosets = CosetPartition::new(&adj, &lat("1,0;0,1").adjoint().unwrap()).unwrap();
        let masks = MaskFamily::build(&cosets, &domain, &[4, 8]).unwrap();
        let phi = window_from_mask(masks.mask(0), split, &PhaseRule::One)
            .unwrap()
            .finite_vector()
            .unwrap();
        let model = FiniteGaborModel::new(split, sample, phi.clone()).unwrap();
        let z2 = lat("1,0;0,1");
        let ctx = InvarianceContext::new(&[4, 8], &lambda, &z2).unwrap();
        assert!(condition_d(model.zak_window(), &ctx, TAU).unwrap().holds);
        assert!(brute_force_lattice_invariant(&model, &z2, TOL).unwrap());
        let d = decompose(&phi, &model, &z2, TAU, TOL).unwrap();
        assert!(d.condition_held);
        assert!(d.memberships.iter().all(|&m| m));
        let h = multiplier_from_pattern(
            model.zak_window(),
            &ctx,
            &[rat_int(1), rat_int(0)],
            TAU,
        )
        .unwrap();
        let res = multiplier_certificate(&model, &h, &[rat_int(1), rat_int(0)]).unwrap();
        assert!(res < 1e-10);
    }

    #[test]
    fn multiplier_coset_identity_case_viii() {
        // l = 0, (a,b) = (1,0) on the 8x4 grid: the identity holds at all
        // 32 nodes with unit modulus on B^(0).
        let tilde = lat("1,0;0,1");
        let (ctx, masks) = example_masks(&tilde);
        let ab = vec![rat_int(1), rat_int(0)];
        let h = multiplier_coset(&ctx, &masks, 0, &ab).unwrap();
        for flat in 0..32usize {
            if !masks.mask(0)[flat] {
                continue;
            }
            let node = [flat / 4, flat % 4];
            let coords = vec![
                Rat::new(num::BigInt::from(node[0]), num::BigInt::from(8u32)),
                Rat::new(num::BigInt::from(node[1]), num::BigInt::from(4u32)),
            ];
            let target = phase_to_complex(&frac(&symplectic_phase(&ab, &coords)));
            assert!((h[flat] - target).norm() < 1e-12);
            assert_abs_diff_eq!(h[flat].norm(), 1.0, epsilon = 1e-12);
        }
        // (a,b) = (0,0): h is identically 1.
        let h0 = multiplier_coset(&ctx, &masks, 0, &[rat_int(0), rat_int(0)]).unwrap();
        for v in &h0 {
            assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        }
        // Lambda°-periodicity of h.
        for (off, _, _) in ctx.offsets() {
            for flat in 0..32usize {
                let node = [flat / 4, flat % 4];
                let t = ctx.translate(&node, off);
                assert!((h[flat] - h[t[0] * 4 + t[1]]).norm() < 1e-12);
            }
        }
        // Off-lattice (a,b) errors.
        assert!(matches!(
            multiplier_coset(
                &ctx,
                &masks,
                0,
                &[Rat::new(1.into(), 3.into()), Rat::zero()]
            ),
            Err(InvarianceError::ShiftOffLattice)
        ));
    }

    #[test]
    fn multiplier_coset_identity_all_cases() {
        for tilde in intermediate_lattices(&example_lambda(), &lat("1,0;0,1")).unwrap() {
            let (ctx, masks) = example_masks(&tilde);
            let b0 = tilde.basis().column(0);
            let b1 = tilde.basis().column(1);
            for i in -1i64..=1 {
                for j in -1i64..=1 {
                    let ab: Vec<Rat> = (0..2)
                        .map(|k| &b0[k] * rat_int(i) + &b1[k] * rat_int(j))
                        .collect();
                    for l in 0..masks.count() {
                        let h = multiplier_coset(&ctx, &masks, l, &ab).unwrap();
                        for flat in 0..32usize {
                            if !masks.mask(l)[flat] {
                                continue;
                            }
                            let node = [flat / 4, flat % 4];
                            let coords = vec![
                                Rat::new(num::BigInt::from(node[0]), num::BigInt::from(8u32)),
                                Rat::new(num::BigInt::from(node[1]), num::BigInt::from(4u32)),
                            ];
                            let target = phase_to_complex(&frac(&symplectic_phase(&ab, &coords)));
                            assert!(
                                (h[flat] - target).norm() < 1e-12,
                                "tilde={tilde} l={l} i={i} j={j} flat={flat}"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn multiplier_from_pattern_certificate() {
        let split = ZakSplit::new(32, 4).unwrap();
        let tilde = lat("1,0;0,1");
        let ctx = InvarianceContext::new(&[4, 8], &example_lambda(), &tilde).unwrap();
        let phi = b0_window(&tilde);
        let model = FiniteGaborModel::new(split, lat("16,0;0,16"), phi).unwrap();
        for ab in [
            vec![rat_int(1), rat_int(0)],
            vec![rat_int(0), rat_int(1)],
            vec![rat_int(1), rat_int(1)],
            vec![rat_int(4), rat_int(2)], // in Lambda itself
        ] {
            let h = multiplier_from_pattern(model.zak_window(), &ctx, &ab, TAU).unwrap();
            let residual = multiplier_certificate(&model, &h, &ab).unwrap();
            assert!(residual < 1e-10, "ab={ab:?} residual={residual}");
        }
        // For (a,b) in Lambda the multiplier matches the shift phase law
        // on supp Z phi.
        let ab = vec![rat_int(4), rat_int(2)];
        let h = multiplier_from_pattern(model.zak_window(), &ctx, &ab, TAU).unwrap();
        for flat in 0..32usize {
            if model.zak_window().values()[flat].norm() > 1e-9 {
                let node = [flat / 8, flat % 8];
                let coords = vec![
                    Rat::new(num::BigInt::from(node[0]), num::BigInt::from(4u32)),
                    Rat::new(num::BigInt::from(node[1]), num::BigInt::from(8u32)),
                ];
                let expect = phase_to_complex(&frac(&symplectic_phase(&ab, &coords)));
                assert!((h[flat] - expect).norm() < 1e-10);
            }
        }
        // Condition (d) violated: error.
        let ones_model = FiniteGaborModel::new(split, lat("16,0;0,16"), flat_window()).unwrap();
        assert!(matches!(
            multiplier_from_pattern(
                ones_model.zak_window(),
                &ctx,
                &[rat_int(1), rat_int(0)],
                TAU
            ),
            Err(InvarianceError::NotInvariant)
        ));
    }

    #[test]
    fn brute_force_examples() {
        let split = ZakSplit::new(32, 4).unwrap();
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(33);
        let phi: Vec<Complex64> = (0..32)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let model = FiniteGaborModel::new(split, lat("16,0;0,16"), phi).unwrap();
        // (a,b) in Lambda_fin: always invariant.
        assert!(brute_force_invariant(&model, 16, 16, TOL));
        assert!(brute_force_invariant(&model, 16, 0, TOL));
        // |Z phi| = 1, proper sublattice, shift from model-Z^2 \ Lambda:
        // not invariant.
        let model = FiniteGaborModel::new(split, lat("16,0;0,16"), flat_window()).unwrap();
        assert!(!brute_force_invariant(&model, 4, 0, TOL));
        // chi_{B^(0)} window for Lambda~ = Z^2: invariant under Lambda~.
        let tilde = lat("1,0;0,1");
        let model = FiniteGaborModel::new(split, lat("16,0;0,16"), b0_window(&tilde)).unwrap();
        assert!(brute_force_invariant(&model, 4, 0, TOL));
        assert!(brute_force_invariant(&model, 0, 8, TOL));
        assert!(brute_force_lattice_invariant(&model, &tilde, TOL).unwrap());
    }

    #[test]
    fn integer_invariance_examples() {
        let split = ZakSplit::new(32, 4).unwrap();
        // Support on [0,1/2) x [0,1/4): one node per adjoint orbit.
        let mut vals = vec![Complex64::zero(); 32];
        for x in 0..2usize {
            for w in 0..2usize {
                vals[x * 8 + w] = Complex64::new(1.0, 0.0);
            }
        }
        let grid = ZakGrid::new_finite(split, vals);
        let out = integer_invariance(&grid, &example_lambda(), TAU).unwrap();
        assert!(out.invariant);
        assert!(out.exactly_one_per_orbit);
        assert_eq!(out.domain_nodes.unwrap().len(), 4);
        // All-ones: witness with two energized nodes of one orbit.
        let ones = ZakGrid::new_finite(split, vec![Complex64::new(1.0, 0.0); 32]);
        let out = integer_invariance(&ones, &example_lambda(), TAU).unwrap();
        assert!(!out.invariant);
        assert!(out.witness.is_some());
        // Lambda = Z^2: singleton orbits, always invariant.
        let out = integer_invariance(&ones, &lat("1,0;0,1"), TAU).unwrap();
        assert!(out.invariant);
        assert!(out.exactly_one_per_orbit);
    }

    #[test]
    fn full_shift_invariance_examples() {
        // chi_{[0,1) x [0,1/2)} on an 8x8 grid.
        let mut vals = vec![Complex64::zero(); 64];
        for x in 0..8usize {
            for w in 0..4usize {
                vals[x * 8 + w] = Complex64::new(1.0, 0.0);
            }
        }
        let grid = ZakGrid::new(vec![8, 8], vals);
        let t = full_shift_invariance(&grid, ShiftMode::Translation, TAU).unwrap();
        assert!(t.holds);
        assert_eq!(
            t.level_set.unwrap(),
            (0..4).map(|w| vec![w]).collect::<Vec<_>>()
        );
        let m = full_shift_invariance(&grid, ShiftMode::Modulation, TAU).unwrap();
        assert!(!m.holds);
        assert!(m.witness.is_some());
        // All-ones: every mode true.
        let ones = ZakGrid::new(vec![8, 8], vec![Complex64::new(1.0, 0.0); 64]);
        for mode in [
            ShiftMode::Translation,
            ShiftMode::Modulation,
            ShiftMode::All,
        ] {
            assert!(full_shift_invariance(&ones, mode, TAU).unwrap().holds);
        }
        // A half-energized row defeats translation invariance.
        let mut vals = vec![Complex64::new(1.0, 0.0); 64];
        for x in 0..4usize {
            vals[x * 8 + 3] = Complex64::zero();
        }
        let grid = ZakGrid::new(vec![8, 8], vals);
        let t = full_shift_invariance(&grid, ShiftMode::Translation, TAU).unwrap();
        assert!(!t.holds);
        let (row, hot, cold) = t.witness.unwrap();
        assert_eq!(row, vec![3]);
        assert!(grid.values()[grid.flat(&hot)].norm() > 0.5);
        assert!(grid.values()[grid.flat(&cold)].norm() < 0.5);
        // all = translation AND modulation on random patterns.
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(77);
        for _ in 0..20 {
            let vals: Vec<Complex64> = (0..64)
                .map(|_| {
                    if rng.gen_bool(0.5) {
                        Complex64::new(1.0, 0.0)
                    } else {
                        Complex64::zero()
                    }
                })
                .collect();
            let grid = ZakGrid::new(vec![8, 8], vals);
            let t = full_shift_invariance(&grid, ShiftMode::Translation, TAU)
                .unwrap()
                .holds;
            let m = full_shift_invariance(&grid, ShiftMode::Modulation, TAU)
                .unwrap()
                .holds;
            let a = full_shift_invariance(&grid, ShiftMode::All, TAU)
                .unwrap()
                .holds;
            assert_eq!(a, t && m);
        }
    }

    #[test]
    fn invariance_set_sweeps() {
        let split = ZakSplit::new(32, 4).unwrap();
        let z2 = lat("1,0;0,1");
        // chi_{B^(0)} for Lambda~ = Z^2 masks: everything invariant.
        let model = FiniteGaborModel::new(split, lat("16,0;0,16"), b0_window(&z2)).unwrap();
        let sweep = invariance_set(&model, &z2, TAU, TOL, true).unwrap();
        assert_eq!(sweep.rows.len(), 8);
        assert!(sweep.rows.iter().all(|r| r.condition_d));
        assert!(sweep.rows.iter().all(|r| r.oracle == Some(true)));
        assert_eq!(sweep.maximal, z2);
        assert!(sweep.join_verified);
        // |Z phi| = 1: only Lambda~ = Lambda survives.
        let model = FiniteGaborModel::new(split, lat("16,0;0,16"), flat_window()).unwrap();
        let sweep = invariance_set(&model, &z2, TAU, TOL, true).unwrap();
        let invariant: Vec<&SweepRow> = sweep.rows.iter().filter(|r| r.condition_d).collect();
        assert_eq!(invariant.len(), 1);
        assert_eq!(invariant[0].lattice, example_lambda());
        assert_eq!(sweep.maximal, example_lambda());
        // Lambda = ambient: a single row.
        let model2 = FiniteGaborModel::new(split, lat("4,0;0,8"), model.window().to_vec()).unwrap();
        let sweep = invariance_set(&model2, &z2, TAU, TOL, false).unwrap();
        assert_eq!(sweep.rows.len(), 1);
        assert_eq!(sweep.maximal, z2);
    }

    #[test]
    fn report_serializes_with_contract_keys() {
        let split = ZakSplit::new(32, 4).unwrap();
        let model = FiniteGaborModel::new(split, lat("16,0;0,16"), flat_window()).unwrap();
        let report = check_report(&model, &lat("1,0;0,1"), TAU, TOL, true, true).unwrap();
        assert!(!report.condition_d);
        assert_eq!(report.oracle, Some(false));
        let json = serde_json::to_value(&report).unwrap();
        for key in [
            "lambda",
            "lambda_tilde",
            "N",
            "condition_d",
            "witnesses",
            "oracle",
            "decomposition",
            "resolution",
        ] {
            assert!(json.get(key).is_some(), "missing key {key}");
        }
        assert_eq!(json["lambda"], "4,0;0,2");
        assert_eq!(json["N"], 8);
    }
}
