//! Non-lopsided length lists and their realization as closed planar polygons.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{check_stratum, k_subsets, FunctionFamily};

/// Relative tolerance used to call a list degenerate.
pub const DEGENERATE_TOL: f64 = 1e-12;

/// Largest term count for which every set partition is enumerated.
pub const FULL_PARTITION_LIMIT: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Lopsidedness {
    Balanced,
    /// Entry (0-based) strictly larger than the sum of the others.
    Lopsided(usize),
    /// Entry equal to the sum of the others.
    Degenerate(usize),
}

fn validate(lengths: &[f64], min: usize) -> Result<()> {
    if lengths.len() < min {
        return Err(Error::InvalidLengths(format!("need at least {min} lengths, got {}", lengths.len())));
    }
    if let Some(l) = lengths.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
        return Err(Error::InvalidLengths(format!("length {l} is not a positive finite number")));
    }
    Ok(())
}

pub fn lopsided_index(lengths: &[f64]) -> Result<Lopsidedness> {
    validate(lengths, 2)?;
    Ok(lopsidedness(lengths))
}

fn lopsidedness(lengths: &[f64]) -> Lopsidedness {
    let total: f64 = lengths.iter().sum();
    let (imax, &lmax) = lengths
        .iter()
        .enumerate()
        .fold((0, &lengths[0]), |best, cur| if cur.1 > best.1 { cur } else { best });
    let diff = lmax - (total - lmax);
    if diff.abs() <= DEGENERATE_TOL * total {
        Lopsidedness::Degenerate(imax)
    } else if diff > 0.0 {
        Lopsidedness::Lopsided(imax)
    } else {
        Lopsidedness::Balanced
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polygon {
    /// `V_0 .. V_N`; `V_N` is where the path ends and should equal `V_0`.
    pub vertices: Vec<[f64; 2]>,
    /// Input index of each side, in path order.
    pub order: Vec<usize>,
    pub degenerate: bool,
    pub closure_error: f64,
}

impl Polygon {
    pub fn side_lengths(&self) -> Vec<f64> {
        self.vertices
            .windows(2)
            .map(|w| ((w[1][0] - w[0][0]).powi(2) + (w[1][1] - w[0][1]).powi(2)).sqrt())
            .collect()
    }

    /// Signed area of the closed path (positive for counter-clockwise).
    pub fn signed_area(&self) -> f64 {
        0.5 * self
            .vertices
            .windows(2)
            .map(|w| w[0][0] * w[1][1] - w[1][0] * w[0][1])
            .sum::<f64>()
    }
}

// chords get placeholder indices counting down from here, one per level
const CHORD: usize = usize::MAX;

type Edges = Vec<(usize, [f64; 2])>;

/// Closed polygon with the given side lengths, built by splitting off a
/// triangle along an auxiliary chord and recursing on the remainder.
///
/// Output is counter-clockwise with `V_0` at the origin and the first side
/// along `+x`.
pub fn build_closed_polygon(lengths: &[f64], tol: f64) -> Result<Polygon> {
    validate(lengths, 3)?;
    if let Lopsidedness::Lopsided(i) = lopsidedness(lengths) {
        return Err(Error::Lopsided(i));
    }
    let items: Vec<(f64, usize)> = lengths.iter().copied().zip(0..).collect();
    let (mut edges, degenerate) = realize(items, CHORD);

    let area: f64 = {
        let mut p = [0.0, 0.0];
        let mut a = 0.0;
        for (_, e) in &edges {
            let q = [p[0] + e[0], p[1] + e[1]];
            a += p[0] * q[1] - q[0] * p[1];
            p = q;
        }
        a
    };
    if area < 0.0 {
        for (_, e) in edges.iter_mut() {
            e[1] = -e[1];
        }
    }
    let first = edges[0].1;
    let (c, s) = {
        let len = (first[0] * first[0] + first[1] * first[1]).sqrt();
        (first[0] / len, -first[1] / len)
    };
    let mut vertices = vec![[0.0, 0.0]];
    let mut p = [0.0, 0.0];
    for (_, e) in &edges {
        p = [p[0] + c * e[0] - s * e[1], p[1] + s * e[0] + c * e[1]];
        vertices.push(p);
    }
    let closure_error = (p[0] * p[0] + p[1] * p[1]).sqrt();
    if closure_error > tol {
        return Err(Error::Inconclusive(format!("polygon closure error {closure_error:e} exceeds {tol:e}")));
    }
    Ok(Polygon { vertices, order: edges.iter().map(|e| e.0).collect(), degenerate, closure_error })
}

fn realize(mut items: Vec<(f64, usize)>, chord_id: usize) -> (Edges, bool) {
    items.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let scale = items[0].0;
    if items.len() == 3 {
        let [(a, ia), (b, ib), (c, ic)] = [items[0], items[1], items[2]];
        let px = (a * a - b * b + c * c) / (2.0 * a);
        let y2 = c * c - px * px;
        let degenerate = y2 <= DEGENERATE_TOL * scale * scale;
        let py = y2.max(0.0).sqrt();
        return (vec![(ia, [a, 0.0]), (ib, [px - a, py]), (ic, [-px, -py])], degenerate);
    }
    let last = items.len() - 1;
    let (l1, l2, ln) = (items[0].0, items[1].0, items[last].0);
    let middle: f64 = items[1..last].iter().map(|i| i.0).sum();
    let lo = l2.max(l1 - ln);
    let hi = l1.min(middle);
    let chord = 0.5 * (lo + hi);
    let collapsed = hi - lo <= DEGENERATE_TOL * scale;

    let (c1, d1) = realize(vec![items[0], (chord, chord_id), items[last]], chord_id - 1);
    let mut rest = vec![(chord, chord_id)];
    rest.extend_from_slice(&items[1..last]);
    let (c2, d2) = realize(rest, chord_id - 1);

    let p = c1.iter().position(|e| e.0 == chord_id).expect("chord in triangle");
    let q = c2.iter().position(|e| e.0 == chord_id).expect("chord in remainder");
    let v = c1[p].1;
    let w = c2[q].1;
    // rotate the remainder so its chord runs opposite to the triangle's
    let theta = (-v[1]).atan2(-v[0]) - w[1].atan2(w[0]);
    let (c, s) = (theta.cos(), theta.sin());
    let rot = |e: [f64; 2]| [c * e[0] - s * e[1], s * e[0] + c * e[1]];
    let mut out: Edges = c1[..p].to_vec();
    out.extend(c2[q + 1..].iter().chain(&c2[..q]).map(|&(i, e)| (i, rot(e))));
    out.extend_from_slice(&c1[p + 1..]);
    (out, collapsed || d1 || d2)
}

/// Whether every aggregated length list over set partitions of the terms
/// into `g` blocks, `N-k+1 <= g <= N`, is non-lopsided at `x`.
///
/// All partitions are tested for `N <= 8`; above that only the binding ones
/// (one `k`-block plus singletons).
pub fn k_constructibility_check(family: &FunctionFamily, k: usize, x: &[f64]) -> Result<bool> {
    let n = family.len();
    check_stratum(n, k)?;
    let exps = family.exponents(x);
    let m = exps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lengths: Vec<f64> = exps.iter().map(|f| (f - m).exp()).collect();
    let balanced = |blocks: &[f64]| lopsidedness(blocks) == Lopsidedness::Balanced;

    if n > FULL_PARTITION_LIMIT {
        return Ok(k_subsets(n, k).into_iter().all(|mask| {
            let mut blocks = vec![mask.indices().map(|i| lengths[i]).sum::<f64>()];
            blocks.extend((0..n).filter(|&i| !mask.contains(i)).map(|i| lengths[i]));
            balanced(&blocks)
        }));
    }

    // restricted growth strings enumerate set partitions
    let mut rgs = vec![0usize; n];
    let mut blocks = Vec::with_capacity(n);
    loop {
        let g = rgs.iter().copied().max().unwrap_or(0) + 1;
        if g + k > n {
            blocks.clear();
            blocks.resize(g, 0.0);
            for (i, &b) in rgs.iter().enumerate() {
                blocks[b] += lengths[i];
            }
            if !balanced(&blocks) {
                return Ok(false);
            }
        }
        if !next_rgs(&mut rgs) {
            return Ok(true);
        }
    }
}

fn next_rgs(rgs: &mut [usize]) -> bool {
    for i in (1..rgs.len()).rev() {
        let cap = rgs[..i].iter().copied().max().unwrap_or(0) + 1;
        if rgs[i] < cap {
            rgs[i] += 1;
            for r in rgs[i + 1..].iter_mut() {
                *r = 0;
            }
            return true;
        }
    }
    false
}
