//! Window ingestion, validation, and cataloging, plus construction of
//! test windows with prescribed Zak zero patterns — the fixture generator
//! behind the invariance tests.

use crate::zak::{inverse_finite_zak, WindowSpec, ZakError, ZakGrid, ZakSplit};
use num::complex::Complex64;
use num::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Phase rule for mask-constructed windows. Condition (d) depends only on
/// |Z phi|, so verdicts must be phase-independent; the seeded rule exists
/// to test exactly that.
#[derive(Debug, Clone)]
pub enum PhaseRule {
    One,
    RandomUnit { seed: u64 },
}

/// Window whose Zak transform is the given mask times unit-modulus phases.
pub fn window_from_mask(
    mask: &[bool],
    split: ZakSplit,
    phase: &PhaseRule,
) -> Result<WindowSpec, ZakError> {
    if mask.len() != split.l {
        return Err(ZakError::LengthMismatch {
            expected: split.l,
            got: mask.len(),
        });
    }
    let mut rng = match phase {
        PhaseRule::One => None,
        PhaseRule::RandomUnit { seed } => Some(ChaCha8Rng::seed_from_u64(*seed)),
    };
    let values: Vec<Complex64> = mask
        .iter()
        .map(|&on| {
            if !on {
                return Complex64::zero();
            }
            match rng.as_mut() {
                None => Complex64::new(1.0, 0.0),
                Some(r) => {
                    let theta = r.gen_range(0.0..std::f64::consts::TAU);
                    Complex64::new(theta.cos(), theta.sin())
                }
            }
        })
        .collect();
    let grid = ZakGrid::new_finite(split, values);
    let f = inverse_finite_zak(&grid)?;
    Ok(WindowSpec::FiniteVector {
        l: split.l,
        values: f.iter().map(|z| [z.re, z.im]).collect(),
    })
}

/// Parses and validates a window from JSON; finite vectors are optionally
/// normalized to unit norm.
pub fn parse_window(json: &str, normalize: bool) -> Result<WindowSpec, ZakError> {
    let spec: WindowSpec = serde_json::from_str(json)
        .map_err(|e| ZakError::InvalidWindow(format!("schema violation: {e}")))?;
    spec.validate()?;
    if !normalize {
        return Ok(spec);
    }
    match spec {
        WindowSpec::FiniteVector { l, values } => {
            let norm = values
                .iter()
                .map(|v| v[0] * v[0] + v[1] * v[1])
                .sum::<f64>()
                .sqrt();
            if norm == 0.0 {
                return Ok(WindowSpec::FiniteVector { l, values });
            }
            Ok(WindowSpec::FiniteVector {
                l,
                values: values.iter().map(|v| [v[0] / norm, v[1] / norm]).collect(),
            })
        }
        other => Ok(other),
    }
}

/// Named window with provenance, as stored in the bundled catalog file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WindowCatalogEntry {
    pub name: String,
    pub spec: WindowSpec,
    pub provenance: String,
}

/// Built-in fixtures. The finite entries realize |Z phi| = 1 and the
/// B^(0)-supported pattern of the 4Z x 2Z worked example at L = 32.
pub fn builtin_catalog() -> Vec<WindowCatalogEntry> {
    let split = ZakSplit::new(32, 4).expect("32 = 4 * 8");
    let full = vec![true; 32];
    // B^(0) of the example at resolution (4, 8): x in {0,1}, w in {0,1}.
    let mut b0 = vec![false; 32];
    for x in 0..2 {
        for w in 0..2 {
            b0[x * 8 + w] = true;
        }
    }
    vec![
        WindowCatalogEntry {
            name: "indicator".into(),
            spec: WindowSpec::indicator(),
            provenance: "unit-cube characteristic window; |Z phi| = 1".into(),
        },
        WindowCatalogEntry {
            name: "gaussian".into(),
            spec: WindowSpec::Gaussian { sigma: 1.0 },
            provenance: "standard Gaussian, sigma = 1".into(),
        },
        WindowCatalogEntry {
            name: "flat-zak-32".into(),
            spec: window_from_mask(&full, split, &PhaseRule::One).expect("valid mask"),
            provenance: "finite chi analog: Z phi = 1 on the 4x8 cell".into(),
        },
        WindowCatalogEntry {
            name: "mask-b0-32".into(),
            spec: window_from_mask(&b0, split, &PhaseRule::One).expect("valid mask"),
            provenance: "Z phi supported on B^(0) of the 4Z x 2Z example; Z^2-invariant".into(),
        },
    ]
}

pub fn parse_catalog(json: &str) -> Result<Vec<WindowCatalogEntry>, ZakError> {
    let entries: Vec<WindowCatalogEntry> = serde_json::from_str(json)
        .map_err(|e| ZakError::InvalidWindow(format!("catalog schema violation: {e}")))?;
    for e in &entries {
        e.spec.validate()?;
    }
    Ok(entries)
}
