//! Tropical limits: max-plus skeletons of linear families, stratum-wise
//! tropical loci and unboundedness of dominance regions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::log_sum_exp;
use crate::grid::GridSpec;
use crate::model::{FunctionFamily, SubsetMask};

/// Tie tolerance for dominance, in exponent units.
pub const TIE_TOL: f64 = 1e-9;

const GEOM_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TropicalKind {
    /// Constants dropped: every form is linear and the arrangement passes through the origin.
    Homogeneous,
    /// Constants kept.
    Affine,
}

/// `b + a . x`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineForm {
    pub b: f64,
    pub a: Vec<f64>,
}

impl AffineForm {
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.b + self.a.iter().zip(x).map(|(a, x)| a * x).sum::<f64>()
    }
}

/// Limit forms of a linear family. `drop[i] = true` removes variable `i`
/// (cylindrical limits).
pub fn limit_forms(family: &FunctionFamily, kind: TropicalKind, drop: &[bool]) -> Result<Vec<AffineForm>> {
    let forms = family.linear_forms().ok_or(Error::LinearOnly)?;
    Ok(forms
        .into_iter()
        .map(|(b, a)| AffineForm {
            b: if kind == TropicalKind::Affine { b } else { 0.0 },
            a: a.iter()
                .enumerate()
                .map(|(i, &v)| if drop.get(i).copied().unwrap_or(false) { 0.0 } else { v })
                .collect(),
        })
        .collect())
}

/// 0-based indices attaining the maximum within `tol`.
pub fn dominance(forms: &[AffineForm], x: &[f64], tol: f64) -> Vec<usize> {
    let vals: Vec<f64> = forms.iter().map(|f| f.eval(x)).collect();
    argmax_set(&vals, tol)
}

fn argmax_set(vals: &[f64], tol: f64) -> Vec<usize> {
    let m = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (0..vals.len()).filter(|&i| vals[i] >= m - tol).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PieceShape {
    Segment,
    Ray,
    Line,
}

/// `{origin + s * dir : lo <= s <= hi}` with `dir` a unit vector.
///
/// Canonical forms: a line has its origin at the foot of the perpendicular
/// from `0` and a direction whose first non-zero component is positive; a
/// ray starts at its end point with `lo = 0`; a segment starts at its
/// lexicographically smaller end.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkeletonPiece {
    /// Supporting pairs `(alpha, beta)`, 0-based, `alpha < beta`.
    pub pairs: Vec<(usize, usize)>,
    pub origin: [f64; 2],
    pub dir: [f64; 2],
    pub lo: f64,
    pub hi: f64,
}

impl SkeletonPiece {
    pub fn shape(&self) -> PieceShape {
        match (self.lo.is_finite(), self.hi.is_finite()) {
            (true, true) => PieceShape::Segment,
            (false, false) => PieceShape::Line,
            _ => PieceShape::Ray,
        }
    }

    pub fn at(&self, s: f64) -> [f64; 2] {
        [self.origin[0] + s * self.dir[0], self.origin[1] + s * self.dir[1]]
    }

    pub fn distance(&self, p: &[f64]) -> f64 {
        let s = ((p[0] - self.origin[0]) * self.dir[0] + (p[1] - self.origin[1]) * self.dir[1]).clamp(self.lo, self.hi);
        let q = self.at(s);
        ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()
    }

    /// The part inside an axis-aligned box, as a segment.
    pub fn clip(&self, bbox: &[(f64, f64)]) -> Option<([f64; 2], [f64; 2])> {
        let (mut lo, mut hi) = (self.lo, self.hi);
        for axis in 0..2 {
            let (o, d) = (self.origin[axis], self.dir[axis]);
            let (blo, bhi) = bbox[axis];
            if d.abs() < 1e-300 {
                if o < blo || o > bhi {
                    return None;
                }
                continue;
            }
            let (s0, s1) = ((blo - o) / d, (bhi - o) / d);
            lo = lo.max(s0.min(s1));
            hi = hi.min(s0.max(s1));
        }
        (lo <= hi).then(|| (self.at(lo), self.at(hi)))
    }

    fn canonical(mut self) -> Self {
        match self.shape() {
            PieceShape::Line => {
                let s = self.origin[0] * self.dir[0] + self.origin[1] * self.dir[1];
                self.origin = self.at(-s);
                if self.dir[0] < -GEOM_EPS || (self.dir[0].abs() <= GEOM_EPS && self.dir[1] < 0.0) {
                    self.dir = [-self.dir[0], -self.dir[1]];
                }
            }
            PieceShape::Ray => {
                if self.lo.is_finite() {
                    self.origin = self.at(self.lo);
                } else {
                    self.origin = self.at(self.hi);
                    self.dir = [-self.dir[0], -self.dir[1]];
                }
                self.lo = 0.0;
                self.hi = f64::INFINITY;
            }
            PieceShape::Segment => {
                let (a, b) = (self.at(self.lo), self.at(self.hi));
                let (a, b) = if (a[0], a[1]) <= (b[0], b[1]) { (a, b) } else { (b, a) };
                let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
                self.origin = a;
                self.dir = [(b[0] - a[0]) / len, (b[1] - a[1]) / len];
                self.lo = 0.0;
                self.hi = len;
            }
        }
        self
    }

    fn same_geometry(&self, other: &SkeletonPiece) -> bool {
        let close = |a: f64, b: f64| (a == b) || (a - b).abs() <= GEOM_EPS * (1.0 + a.abs().max(b.abs()));
        self.shape() == other.shape()
            && close(self.origin[0], other.origin[0])
            && close(self.origin[1], other.origin[1])
            && close(self.dir[0], other.dir[0])
            && close(self.dir[1], other.dir[1])
            && close(self.lo, other.lo)
            && close(self.hi, other.hi)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TropicalSkeleton {
    pub kind: TropicalKind,
    pub forms: Vec<AffineForm>,
    pub pieces: Vec<SkeletonPiece>,
}

impl TropicalSkeleton {
    /// Max attained at least twice at `x`.
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        dominance(&self.forms, x, tol).len() >= 2
    }

    pub fn distance(&self, x: &[f64]) -> f64 {
        self.pieces.iter().map(|p| p.distance(x)).fold(f64::INFINITY, f64::min)
    }
}

pub fn skeleton_2d(family: &FunctionFamily, kind: TropicalKind) -> Result<TropicalSkeleton> {
    skeleton_2d_masked(family, kind, &[])
}

/// Pairwise tie lines `f_a = f_b` clipped to where the pair attains the maximum.
pub fn skeleton_2d_masked(family: &FunctionFamily, kind: TropicalKind, drop: &[bool]) -> Result<TropicalSkeleton> {
    if family.dim() != 2 {
        return Err(Error::DimensionUnsupported { supported: 2, actual: family.dim() });
    }
    let forms = limit_forms(family, kind, drop)?;
    Ok(TropicalSkeleton { kind, pieces: skeleton_pieces(&forms), forms })
}

pub fn skeleton_pieces(forms: &[AffineForm]) -> Vec<SkeletonPiece> {
    let n = forms.len();
    let mut pieces: Vec<SkeletonPiece> = Vec::new();
    for alpha in 0..n {
        for beta in alpha + 1..n {
            let Some(piece) = clip_pair(forms, alpha, beta) else { continue };
            match pieces.iter_mut().find(|p| p.same_geometry(&piece)) {
                Some(existing) => existing.pairs.push((alpha, beta)),
                None => pieces.push(piece),
            }
        }
    }
    pieces
}

fn clip_pair(forms: &[AffineForm], alpha: usize, beta: usize) -> Option<SkeletonPiece> {
    let (fa, fb) = (&forms[alpha], &forms[beta]);
    let d = [fa.a[0] - fb.a[0], fa.a[1] - fb.a[1]];
    let c = fa.b - fb.b;
    let norm2 = d[0] * d[0] + d[1] * d[1];
    if norm2 < 1e-24 {
        // identical or parallel-never-equal forms: no line
        return None;
    }
    let norm = norm2.sqrt();
    let origin = [-c * d[0] / norm2, -c * d[1] / norm2];
    let dir = [-d[1] / norm, d[0] / norm];
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    for (gamma, fg) in forms.iter().enumerate() {
        if gamma == alpha || gamma == beta {
            continue;
        }
        // f_a - f_g along the line: u + v s >= 0
        let e = [fa.a[0] - fg.a[0], fa.a[1] - fg.a[1]];
        let u = (fa.b - fg.b) + e[0] * origin[0] + e[1] * origin[1];
        let v = e[0] * dir[0] + e[1] * dir[1];
        if v.abs() < 1e-12 {
            if u < -TIE_TOL {
                return None;
            }
        } else if v > 0.0 {
            lo = lo.max(-u / v);
        } else {
            hi = hi.min(-u / v);
        }
    }
    if hi - lo <= GEOM_EPS {
        return None;
    }
    Some(SkeletonPiece { pairs: vec![(alpha, beta)], origin, dir, lo, hi }.canonical())
}

/// Max over `I` equals max over the complement, on the family's own exponents.
pub fn tropical_stratum_membership(family: &FunctionFamily, subset: SubsetMask, x: &[f64], tol: f64) -> Result<bool> {
    let n = family.len();
    if subset.k() == 0 || subset.k() >= n || subset.bits() >> n != 0 {
        return Err(Error::InvalidSubset { n_terms: n });
    }
    Ok(split_max_gap(&family.exponents(x), subset).abs() <= tol)
}

/// `max_{b not in I} v_b - max_{a in I} v_a`.
pub fn split_max_gap(vals: &[f64], subset: SubsetMask) -> f64 {
    let (mut m_in, mut m_out) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for (i, &v) in vals.iter().enumerate() {
        if subset.contains(i) {
            m_in = m_in.max(v);
        } else {
            m_out = m_out.max(v);
        }
    }
    m_out - m_in
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplementComponent {
    /// 0-based index of the dominant form.
    pub dominant: usize,
    pub nodes: usize,
    pub touches_border: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnboundedReport {
    pub kind: TropicalKind,
    pub components: Vec<ComplementComponent>,
    pub pieces_unbounded: bool,
    pub components_unbounded: bool,
    /// `false` for the affine kind, where bounded components are allowed.
    pub asserted: bool,
}

impl UnboundedReport {
    pub fn pass(&self) -> bool {
        !self.asserted || (self.pieces_unbounded && self.components_unbounded)
    }
}

/// Labels the grid nodes by their dominant form and checks that every
/// connected region reaches the bbox boundary.
pub fn check_unbounded(skel: &TropicalSkeleton, grid: &GridSpec) -> Result<UnboundedReport> {
    if grid.dim() != 2 {
        return Err(Error::DimensionUnsupported { supported: 2, actual: grid.dim() });
    }
    let nodes = grid.node_count();
    let owner: Vec<Option<usize>> = (0..nodes)
        .map(|n| {
            let d = dominance(&skel.forms, &grid.node_point(n), TIE_TOL);
            (d.len() == 1).then(|| d[0])
        })
        .collect();
    let (nx, ny) = (grid.res[0], grid.res[1]);
    let mut seen = vec![false; nodes];
    let mut components = Vec::new();
    for start in 0..nodes {
        let Some(dom) = owner[start] else { continue };
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut stack = vec![start];
        let (mut count, mut border) = (0, false);
        while let Some(n) = stack.pop() {
            count += 1;
            let (i, j) = (n % nx, n / nx);
            border |= i == 0 || j == 0 || i + 1 == nx || j + 1 == ny;
            let mut nbs = Vec::with_capacity(4);
            if i > 0 {
                nbs.push(n - 1);
            }
            if i + 1 < nx {
                nbs.push(n + 1);
            }
            if j > 0 {
                nbs.push(n - nx);
            }
            if j + 1 < ny {
                nbs.push(n + nx);
            }
            for nb in nbs {
                if !seen[nb] && owner[nb] == Some(dom) {
                    seen[nb] = true;
                    stack.push(nb);
                }
            }
        }
        components.push(ComplementComponent { dominant: dom, nodes: count, touches_border: border });
    }
    Ok(UnboundedReport {
        kind: skel.kind,
        pieces_unbounded: skel.pieces.iter().all(|p| p.shape() != PieceShape::Segment),
        components_unbounded: components.iter().all(|c| c.touches_border),
        components,
        asserted: skel.kind == TropicalKind::Homogeneous,
    })
}

/// `sum e^{lambda f_a} <= (sum e^{f_a})^lambda`, compared in log space.
pub fn power_sum_check(family: &FunctionFamily, lambda: f64, x: &[f64]) -> Result<bool> {
    power_sum_holds(&family.exponents(x), lambda)
}

pub fn power_sum_holds(exps: &[f64], lambda: f64) -> Result<bool> {
    if lambda.is_nan() || lambda < 1.0 {
        return Err(Error::InvalidLambda(lambda));
    }
    let scaled: Vec<f64> = exps.iter().map(|f| lambda * f).collect();
    let lhs = log_sum_exp(&scaled)?;
    let rhs = lambda * log_sum_exp(exps)?;
    Ok(lhs <= rhs + 1e-12 * rhs.abs().max(1.0))
}
