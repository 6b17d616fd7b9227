//! Deterministic lattice diagrams in the style of the worked example's
//! figures: the sublattice panel over a fundamental box of Lambda with
//! the extra generators marked, and the adjoint panel over the unit
//! square with B^(0) shaded.

use anyhow::{bail, Result};
use gabinv::invariance::MaskFamily;
use gabinv::lattice::{CosetPartition, FundamentalDomain, RationalLattice};
use gabinv::qmat::{rat_int, Rat};
use num::{BigInt, One, ToPrimitive, Zero};

pub struct DiagramData {
    /// Box sides (c1, c2) of the Lambda fundamental domain shown left.
    pub box_sides: (i64, i64),
    /// Lambda~ points inside the closed box, lex sorted.
    pub tilde_points: Vec<(Rat, Rat)>,
    /// Deterministically chosen extra generators, marked red.
    pub generators: Vec<(Rat, Rat)>,
    /// Adjoint-panel resolution (cells per unit on each axis).
    pub res: (u64, u64),
    /// Lambda° points in the closed unit square with membership of
    /// Lambda~° (filled when true, hollow when false).
    pub adjoint_points: Vec<(Rat, Rat, bool)>,
    /// Shaded B^(0) cells as (ix, iw) grid anchors, sorted.
    pub shaded: Vec<(u64, u64)>,
}

/// Collects everything both renderers need. Requires d = 1 and a diagonal
/// Lambda (the figures present separable base lattices).
pub fn diagram_data(lambda: &RationalLattice, tilde: &RationalLattice) -> Result<DiagramData> {
    if lambda.dim() != 2 {
        bail!("diagrams support d = 1 (2x2 lattices) only");
    }
    let b = lambda.basis();
    if !b[(0, 1)].is_zero() || !b[(1, 0)].is_zero() {
        bail!("diagrams require a separable (diagonal) Lambda");
    }
    if !b[(0, 0)].denom().is_one() || !b[(1, 1)].denom().is_one() {
        bail!("diagrams require an integer Lambda");
    }
    if !lambda.sublattice_of(tilde)? || !tilde.sublattice_of(&RationalLattice::integer(2))? {
        bail!("need Lambda ⊆ Lambda~ ⊆ Z^2");
    }
    let c1 = b[(0, 0)].numer().to_i64().expect("small box");
    let c2 = b[(1, 1)].numer().to_i64().expect("small box");

    // Lambda~ points in the closed box (edges drawn inclusively, like the
    // figures).
    let mut tilde_points = Vec::new();
    for x in 0..=c1 {
        for y in 0..=c2 {
            let p = vec![rat_int(x), rat_int(y)];
            if tilde.member(&p)? {
                tilde_points.push((p[0].clone(), p[1].clone()));
            }
        }
    }

    // Red generators: greedy lex-least points of the half-open box that
    // grow Lambda up to Lambda~; (0,0) alone when Lambda~ = Lambda.
    let mut generators = Vec::new();
    if tilde == lambda {
        generators.push((Rat::zero(), Rat::zero()));
    } else {
        let mut acc = lambda.clone();
        'grow: for x in 0..c1 {
            for y in 0..c2 {
                let p = vec![rat_int(x), rat_int(y)];
                if tilde.member(&p)? && !acc.member(&p)? {
                    generators.push((p[0].clone(), p[1].clone()));
                    acc = acc.join(&[p])?;
                    if &acc == tilde {
                        break 'grow;
                    }
                }
            }
        }
        // Lex order over the box scan is column-major above; re-sort to
        // plain lexicographic for determinism.
        generators.sort();
    }

    // Adjoint panel at the resolution of Lambda°'s box domain.
    let adj = lambda.adjoint()?;
    let adj_tilde = tilde.adjoint()?;
    let ab = adj.basis();
    let den_x = ab[(0, 0)].denom().to_u64().expect("small");
    let den_w = ab[(1, 1)].denom().to_u64().expect("small");
    let res = (den_x.max(1), den_w.max(1));

    let mut adjoint_points = Vec::new();
    for ix in 0..=res.0 {
        for iw in 0..=res.1 {
            let p = vec![
                Rat::new(BigInt::from(ix), BigInt::from(res.0)),
                Rat::new(BigInt::from(iw), BigInt::from(res.1)),
            ];
            if adj.member(&p)? {
                let in_tilde = adj_tilde.member(&p)?;
                adjoint_points.push((p[0].clone(), p[1].clone(), in_tilde));
            }
        }
    }

    let cosets = CosetPartition::new(&adj, &adj_tilde)?;
    let domain = FundamentalDomain::of(&adj, &[res.0, res.1])?;
    let masks = MaskFamily::build(&cosets, &domain, &[res.0 as usize, res.1 as usize])?;
    let mut shaded: Vec<(u64, u64)> = masks
        .mask(0)
        .iter()
        .enumerate()
        .filter(|(_, &on)| on)
        .map(|(flat, _)| {
            (
                (flat / res.1 as usize) as u64,
                (flat % res.1 as usize) as u64,
            )
        })
        .collect();
    shaded.sort();

    Ok(DiagramData {
        box_sides: (c1, c2),
        tilde_points,
        generators,
        res,
        adjoint_points,
        shaded,
    })
}

fn fmt_coord(x: f64) -> String {
    // Fixed formatting with trailing zeros trimmed keeps byte-identical
    // output across runs and platforms.
    let s = format!("{x:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s.is_empty() || s == "-" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

fn rat_f64(x: &Rat) -> f64 {
    x.to_f64().expect("small rational")
}

/// SVG rendering mirroring the figures: filled/hollow nodes, red
/// generators, shaded B^(0), thick unit-square border. Byte-stable.
pub fn render_svg(data: &DiagramData) -> String {
    const SCALE: f64 = 60.0;
    const MARGIN: f64 = 24.0;
    const GAP: f64 = 48.0;
    const R_NODE: f64 = 3.5;

    let (c1, c2) = data.box_sides;
    let left_w = c1 as f64 * SCALE;
    let left_h = c2 as f64 * SCALE;
    let right_w = SCALE;
    let right_h = SCALE;
    let height = left_h.max(right_h) + 2.0 * MARGIN + 18.0;
    let width = left_w + right_w + 2.0 * MARGIN + GAP;

    // Panel origins in SVG coordinates (y flipped).
    let lx = MARGIN;
    let ly = MARGIN + (height - 2.0 * MARGIN - 18.0 - left_h).max(0.0);
    let rx = MARGIN + left_w + GAP;
    let ry = MARGIN + (height - 2.0 * MARGIN - 18.0 - right_h).max(0.0);

    let mut s = String::new();
    s.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n",
        fmt_coord(width), fmt_coord(height), fmt_coord(width), fmt_coord(height)
    ));
    s.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");

    // Left panel: light integer grid, unit square, lattice nodes, red
    // generators.
    s.push_str("<g id=\"sublattice\">\n");
    for x in 0..=c1 {
        s.push_str(&format!(
            "<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"#cccccc\" stroke-width=\"1\"/>\n",
            fmt_coord(lx + x as f64 * SCALE),
            fmt_coord(ly),
            fmt_coord(ly + left_h)
        ));
    }
    for y in 0..=c2 {
        s.push_str(&format!(
            "<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"#cccccc\" stroke-width=\"1\"/>\n",
            fmt_coord(lx),
            fmt_coord(ly + left_h - y as f64 * SCALE),
            fmt_coord(lx + left_w)
        ));
    }
    s.push_str(&format!(
        "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\" stroke-width=\"2\"/>\n",
        fmt_coord(lx),
        fmt_coord(ly + left_h - SCALE),
        fmt_coord(SCALE),
        fmt_coord(SCALE)
    ));
    for (x, y) in &data.tilde_points {
        s.push_str(&format!(
            "<circle cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"black\"/>\n",
            fmt_coord(lx + rat_f64(x) * SCALE),
            fmt_coord(ly + left_h - rat_f64(y) * SCALE),
            fmt_coord(R_NODE)
        ));
    }
    for (x, y) in &data.generators {
        s.push_str(&format!(
            "<circle cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"red\"/>\n",
            fmt_coord(lx + rat_f64(x) * SCALE),
            fmt_coord(ly + left_h - rat_f64(y) * SCALE),
            fmt_coord(R_NODE)
        ));
    }
    s.push_str("</g>\n");

    // Right panel: shaded B^(0) cells, grid, adjoint nodes.
    s.push_str("<g id=\"adjoint\">\n");
    let (res_x, res_w) = data.res;
    let cell_w = SCALE / res_x as f64;
    let cell_h = SCALE / res_w as f64;
    for (ix, iw) in &data.shaded {
        s.push_str(&format!(
            "<rect class=\"b0\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"#b3c6e7\"/>\n",
            fmt_coord(rx + *ix as f64 * cell_w),
            fmt_coord(ry + right_h - (*iw + 1) as f64 * cell_h),
            fmt_coord(cell_w),
            fmt_coord(cell_h)
        ));
    }
    for ix in 0..=res_x {
        s.push_str(&format!(
            "<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"#cccccc\" stroke-width=\"1\"/>\n",
            fmt_coord(rx + ix as f64 * cell_w),
            fmt_coord(ry),
            fmt_coord(ry + right_h)
        ));
    }
    for iw in 0..=res_w {
        s.push_str(&format!(
            "<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"#cccccc\" stroke-width=\"1\"/>\n",
            fmt_coord(rx),
            fmt_coord(ry + right_h - iw as f64 * cell_h),
            fmt_coord(rx + right_w)
        ));
    }
    s.push_str(&format!(
        "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\" stroke-width=\"2\"/>\n",
        fmt_coord(rx),
        fmt_coord(ry),
        fmt_coord(right_w),
        fmt_coord(right_h)
    ));
    for (x, w, in_tilde) in &data.adjoint_points {
        let cx = fmt_coord(rx + rat_f64(x) * SCALE);
        let cy = fmt_coord(ry + right_h - rat_f64(w) * SCALE);
        if *in_tilde {
            s.push_str(&format!(
                "<circle cx=\"{cx}\" cy=\"{cy}\" r=\"{}\" fill=\"black\"/>\n",
                fmt_coord(R_NODE)
            ));
        } else {
            s.push_str(&format!(
                "<circle cx=\"{cx}\" cy=\"{cy}\" r=\"{}\" fill=\"white\" stroke=\"black\" stroke-width=\"1\"/>\n",
                fmt_coord(R_NODE)
            ));
        }
    }
    s.push_str("</g>\n</svg>\n");
    s
}

/// Terminal fallback: '●' filled nodes, '○' hollow nodes, '#' shading.
pub fn render_ascii(data: &DiagramData) -> String {
    let (c1, c2) = data.box_sides;
    let mut out = String::new();
    out.push_str("sublattice (box ");
    out.push_str(&format!("[0,{c1}]x[0,{c2}], * = generator):\n"));
    for y in (0..=c2).rev() {
        for x in 0..=c1 {
            let p = (rat_int(x), rat_int(y));
            let is_gen = data.generators.contains(&p);
            let is_node = data.tilde_points.contains(&p);
            out.push(if is_gen {
                '*'
            } else if is_node {
                '\u{25CF}' // ●
            } else {
                '.'
            });
            out.push(' ');
        }
        out.push('\n');
    }
    out.push_str("adjoint cell ([0,1]^2, # = B0 shading):\n");
    let (res_x, res_w) = data.res;
    // One text row per cell row, nodes drawn on cell corners: interleave
    // a node row and a cell row.
    for iw in (0..res_w).rev() {
        // node row at the top edge of this cell row happens at iw+1.
        out.push_str(&node_row(data, res_x, iw + 1));
        let mut row = String::new();
        for ix in 0..res_x {
            row.push(' ');
            row.push(if data.shaded.contains(&(ix, iw)) {
                '#'
            } else {
                '.'
            });
        }
        row.push('\n');
        out.push_str(&row);
    }
    out.push_str(&node_row(data, res_x, 0));
    out
}

fn node_row(data: &DiagramData, res_x: u64, iw: u64) -> String {
    let (_, res_w) = data.res;
    let w = Rat::new(BigInt::from(iw), BigInt::from(res_w));
    let mut row = String::new();
    for ix in 0..=res_x {
        let x = Rat::new(BigInt::from(ix), BigInt::from(data.res.0));
        let node = data
            .adjoint_points
            .iter()
            .find(|(px, pw, _)| px == &x && pw == &w);
        row.push(match node {
            Some((_, _, true)) => '\u{25CF}',  // ●
            Some((_, _, false)) => '\u{25CB}', // ○
            None => '+',
        });
        if ix < res_x {
            row.push(' ');
        }
    }
    row.push('\n');
    row
}
