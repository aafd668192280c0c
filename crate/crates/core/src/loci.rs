//! Zero-locus geometry: marching squares on the log-gap field in 2D,
//! sign-change point clouds in 3D, visibility and crossing detection.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::log_gap_from_exponents;
use crate::grid::GridSpec;
use crate::model::{binomial, check_stratum, dedup_for_loci, k_subsets, FunctionFamily, SubsetMask};
use crate::regions::{CellClass, RegionMap};

/// Gap magnitude below which a crossing-free cell is flagged as a possible touch point.
pub const TOUCH_TOL: f64 = 1e-6;

const REFINE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polyline {
    pub points: Vec<[f64; 2]>,
    pub closed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContourSet {
    pub subset: SubsetMask,
    pub polylines: Vec<Polyline>,
    pub empty: bool,
    /// Cells without a sign change whose corner gap nearly vanishes.
    pub touch_cells: Vec<usize>,
}

impl ContourSet {
    pub fn vertex_count(&self) -> usize {
        self.polylines.iter().map(|p| p.points.len()).sum()
    }

    pub fn segments(&self) -> impl Iterator<Item = ([f64; 2], [f64; 2])> + '_ {
        self.polylines.iter().flat_map(|p| {
            let wrap = if p.closed && p.points.len() > 2 { Some((p.points[p.points.len() - 1], p.points[0])) } else { None };
            p.points.windows(2).map(|w| (w[0], w[1])).chain(wrap)
        })
    }
}

/// Exponents of every grid node, computed once and shared by all subsets.
pub struct ExponentField {
    n_terms: usize,
    data: Vec<f64>,
}

impl ExponentField {
    pub fn new(family: &FunctionFamily, grid: &GridSpec) -> Self {
        let n_terms = family.len();
        let mut data = vec![0.0; n_terms * grid.node_count()];
        data.par_chunks_mut(n_terms)
            .enumerate()
            .for_each(|(node, out)| family.exponents_into(&grid.node_point(node), out));
        ExponentField { n_terms, data }
    }

    pub fn gap(&self, node: usize, mask: SubsetMask) -> f64 {
        log_gap_from_exponents(&self.data[node * self.n_terms..(node + 1) * self.n_terms], mask)
    }

    pub fn gaps(&self, mask: SubsetMask) -> Vec<f64> {
        (0..self.data.len() / self.n_terms)
            .into_par_iter()
            .map(|node| self.gap(node, mask))
            .collect()
    }
}

fn gap_at(family: &FunctionFamily, mask: SubsetMask, x: &[f64]) -> f64 {
    log_gap_from_exponents(&family.exponents(x), mask)
}

/// Root of the gap on the segment `a -> b`, given gap values of opposite sides.
fn refine_edge(family: &FunctionFamily, mask: SubsetMask, a: [f64; 2], b: [f64; 2], ga: f64, gb: f64) -> [f64; 2] {
    let lerp = |t: f64| [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
    if ga == 0.0 {
        return a;
    }
    if gb == 0.0 {
        return b;
    }
    // Illinois false position on t in [0, 1]
    let (mut t0, mut t1, mut g0, mut g1) = (0.0f64, 1.0f64, ga, gb);
    let mut side = 0;
    let mut t = 0.5;
    for _ in 0..100 {
        t = (t0 * g1 - t1 * g0) / (g1 - g0);
        if !(t > t0 && t < t1) {
            t = 0.5 * (t0 + t1);
        }
        let g = gap_at(family, mask, &lerp(t));
        if g.abs() <= REFINE_TOL || (t1 - t0) < 1e-15 {
            break;
        }
        if (g > 0.0) == (g0 > 0.0) {
            t0 = t;
            g0 = g;
            if side == -1 {
                g1 *= 0.5;
            }
            side = -1;
        } else {
            t1 = t;
            g1 = g;
            if side == 1 {
                g0 *= 0.5;
            }
            side = 1;
        }
    }
    lerp(t)
}

fn check_mask(family: &FunctionFamily, mask: SubsetMask) -> Result<()> {
    let n = family.len();
    if mask.k() == 0 || mask.k() >= n || mask.bits() >> n != 0 {
        return Err(Error::InvalidSubset { n_terms: n });
    }
    Ok(())
}

pub fn extract_zero_locus(family: &FunctionFamily, subset: SubsetMask, grid: &GridSpec) -> Result<ContourSet> {
    if family.dim() != 2 || grid.dim() != 2 {
        return Err(Error::DimensionUnsupported { supported: 2, actual: family.dim() });
    }
    check_mask(family, subset)?;
    let field = ExponentField::new(family, grid);
    Ok(contour_from_field(family, subset, grid, &field.gaps(subset)))
}

fn contour_from_field(family: &FunctionFamily, subset: SubsetMask, grid: &GridSpec, gaps: &[f64]) -> ContourSet {
    let (nx, ny) = (grid.res[0], grid.res[1]);
    let node = |i: usize, j: usize| i + nx * j;
    let pos = |n: usize| gaps[n] > 0.0;
    let point = |n: usize| [grid.coord(0, n % nx), grid.coord(1, n / nx)];

    // edge key: 2*node for the edge to the right, 2*node+1 for the edge above
    let crossing_edges: Vec<usize> = (0..nx * ny)
        .flat_map(|n| {
            let (i, j) = (n % nx, n / nx);
            let right = (i + 1 < nx && pos(n) != pos(n + 1)).then_some(2 * n);
            let up = (j + 1 < ny && pos(n) != pos(n + nx)).then_some(2 * n + 1);
            right.into_iter().chain(up)
        })
        .collect();

    let vertices: HashMap<usize, [f64; 2]> = crossing_edges
        .par_iter()
        .map(|&e| {
            let a = e / 2;
            let b = if e % 2 == 0 { a + 1 } else { a + nx };
            (e, refine_edge(family, subset, point(a), point(b), gaps[a], gaps[b]))
        })
        .collect();

    let mut segments: Vec<(usize, usize)> = Vec::new();
    let mut touch_cells = Vec::new();
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            let c = [node(i, j), node(i + 1, j), node(i + 1, j + 1), node(i, j + 1)];
            let edges = [2 * c[0], 2 * c[1] + 1, 2 * c[3], 2 * c[0] + 1];
            let bits: Vec<bool> = c.iter().map(|&n| pos(n)).collect();
            let cut: Vec<usize> = (0..4).filter(|&e| bits[e] != bits[(e + 1) % 4]).collect();
            match cut.len() {
                0 => {
                    if c.iter().any(|&n| gaps[n].abs() < TOUCH_TOL) {
                        touch_cells.push(grid.cell_index(&[i, j]));
                    }
                }
                2 => segments.push((edges[cut[0]], edges[cut[1]])),
                _ => {
                    let mid = [grid.coord(0, i) + 0.5 * grid.step(0), grid.coord(1, j) + 0.5 * grid.step(1)];
                    if (gap_at(family, subset, &mid) > 0.0) == bits[0] {
                        // corners 0 and 2 connect through the centre
                        segments.push((edges[0], edges[1]));
                        segments.push((edges[2], edges[3]));
                    } else {
                        segments.push((edges[3], edges[0]));
                        segments.push((edges[1], edges[2]));
                    }
                }
            }
        }
    }

    let polylines = chain_segments(&segments)
        .into_iter()
        .map(|(keys, closed)| Polyline { points: keys.iter().map(|k| vertices[k]).collect(), closed })
        .collect::<Vec<_>>();
    ContourSet { subset, empty: polylines.is_empty(), polylines, touch_cells }
}

/// Joins segments sharing endpoints into maximal chains. Open chains start at
/// their smallest free endpoint; closed loops at their smallest key.
fn chain_segments(segments: &[(usize, usize)]) -> Vec<(Vec<usize>, bool)> {
    let mut adj: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (s, &(a, b)) in segments.iter().enumerate() {
        adj.entry(a).or_default().push(s);
        adj.entry(b).or_default().push(s);
    }
    let mut used = vec![false; segments.len()];
    let mut out = Vec::new();
    let walk = |start: usize, used: &mut Vec<bool>| {
        let mut chain = vec![start];
        let mut at = start;
        while let Some(&s) = adj[&at].iter().find(|&&s| !used[s]) {
            used[s] = true;
            let (a, b) = segments[s];
            at = if a == at { b } else { a };
            chain.push(at);
        }
        chain
    };
    for (&key, segs) in &adj {
        if segs.len() == 1 && !used[segs[0]] {
            out.push((walk(key, &mut used), false));
        }
    }
    for (&key, segs) in &adj {
        if segs.iter().any(|&s| !used[s]) {
            let mut chain = walk(key, &mut used);
            chain.pop();
            out.push((chain, true));
        }
    }
    out
}

/// Midpoints of grid edges whose endpoints lie on opposite sides of the locus.
pub fn sample_zero_points(family: &FunctionFamily, subset: SubsetMask, grid: &GridSpec) -> Result<Vec<[f64; 3]>> {
    if family.dim() != 3 || grid.dim() != 3 {
        return Err(Error::DimensionUnsupported { supported: 3, actual: family.dim() });
    }
    check_mask(family, subset)?;
    let gaps = ExponentField::new(family, grid).gaps(subset);
    let res = &grid.res;
    let strides = [1, res[0], res[0] * res[1]];
    let mut points = Vec::new();
    for n in 0..grid.node_count() {
        let multi = grid.node_multi(n);
        for axis in 0..3 {
            if multi[axis] + 1 < res[axis] && (gaps[n] > 0.0) != (gaps[n + strides[axis]] > 0.0) {
                let a = grid.node_point(n);
                let b = grid.node_point(n + strides[axis]);
                points.push([0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1]), 0.5 * (a[2] + b[2])]);
            }
        }
    }
    Ok(points)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StratumLoci {
    pub k: usize,
    pub sets: Vec<ContourSet>,
    pub visible: usize,
}

impl StratumLoci {
    pub fn empty_subsets(&self) -> Vec<SubsetMask> {
        self.sets.iter().filter(|c| c.empty).map(|c| c.subset).collect()
    }

    pub fn visible_subsets(&self) -> Vec<SubsetMask> {
        self.sets.iter().filter(|c| !c.empty).map(|c| c.subset).collect()
    }
}

/// One contour set per locus-distinct subset of the stratum.
pub fn stratum_loci(family: &FunctionFamily, k: usize, grid: &GridSpec) -> Result<StratumLoci> {
    if family.dim() != 2 || grid.dim() != 2 {
        return Err(Error::DimensionUnsupported { supported: 2, actual: family.dim() });
    }
    check_stratum(family.len(), k)?;
    let masks = dedup_for_loci(&k_subsets(family.len(), k), family.len());
    let field = ExponentField::new(family, grid);
    let sets: Vec<ContourSet> = masks
        .iter()
        .map(|&m| contour_from_field(family, m, grid, &field.gaps(m)))
        .collect();
    let visible = sets.iter().filter(|c| !c.empty).count();
    Ok(StratumLoci { k, sets, visible })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Intersection {
    pub a: SubsetMask,
    pub b: SubsetMask,
    pub witness: [f64; 2],
    pub distance: f64,
    /// The polylines cross geometrically (otherwise the report rests on the sign test).
    pub crossing: bool,
}

fn sub(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

fn cross(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn point_segment(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> ([f64; 2], f64) {
    let d = sub(b, a);
    let len2 = d[0] * d[0] + d[1] * d[1];
    let t = if len2 > 0.0 { ((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / len2 } else { 0.0 };
    let t = t.clamp(0.0, 1.0);
    let q = [a[0] + t * d[0], a[1] + t * d[1]];
    (q, ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt())
}

/// Proper crossing point of two segments, if any.
pub fn segment_crossing(p: ([f64; 2], [f64; 2]), q: ([f64; 2], [f64; 2])) -> Option<[f64; 2]> {
    let r = sub(p.1, p.0);
    let s = sub(q.1, q.0);
    let denom = cross(r, s);
    if denom == 0.0 {
        return None;
    }
    let qp = sub(q.0, p.0);
    let t = cross(qp, s) / denom;
    let u = cross(qp, r) / denom;
    ((0.0..=1.0).contains(&t) && (0.0..=1.0).contains(&u)).then(|| [p.0[0] + t * r[0], p.0[1] + t * r[1]])
}

/// Closest points between two segments with their midpoint and distance.
fn segment_distance(p: ([f64; 2], [f64; 2]), q: ([f64; 2], [f64; 2])) -> ([f64; 2], f64) {
    if let Some(x) = segment_crossing(p, q) {
        return (x, 0.0);
    }
    [(p.0, q), (p.1, q), (q.0, p), (q.1, p)]
        .into_iter()
        .map(|(pt, seg)| {
            let (c, d) = point_segment(pt, seg.0, seg.1);
            ([(pt[0] + c[0]) * 0.5, (pt[1] + c[1]) * 0.5], d)
        })
        .fold(([0.0; 2], f64::INFINITY), |best, cand| if cand.1 < best.1 { cand } else { best })
}

/// All four sign combinations of the two gaps occur on a small lattice
/// inside the disc, i.e. the loci genuinely cross near the witness.
fn four_quadrants(family: &FunctionFamily, a: SubsetMask, b: SubsetMask, centre: [f64; 2], radius: f64) -> bool {
    const STEPS: i32 = 8;
    let mut seen = [false; 4];
    for i in -STEPS..=STEPS {
        for j in -STEPS..=STEPS {
            let (dx, dy) = (radius * i as f64 / STEPS as f64, radius * j as f64 / STEPS as f64);
            if dx * dx + dy * dy > radius * radius {
                continue;
            }
            let x = [centre[0] + dx, centre[1] + dy];
            let e = family.exponents(&x);
            let (ga, gb) = (log_gap_from_exponents(&e, a), log_gap_from_exponents(&e, b));
            if ga != 0.0 && gb != 0.0 {
                seen[((ga > 0.0) as usize) << 1 | (gb > 0.0) as usize] = true;
            }
        }
    }
    seen.iter().all(|&s| s)
}

/// Pairs of loci that cross, or that come within `radius` of each other
/// while all four sign combinations of their gaps occur nearby.
pub fn detect_pairwise_intersections(family: &FunctionFamily, loci: &[ContourSet], radius: f64) -> Vec<Intersection> {
    let segs: Vec<Vec<([f64; 2], [f64; 2])>> = loci.iter().map(|c| c.segments().collect()).collect();
    let longest = segs
        .iter()
        .flatten()
        .map(|(a, b)| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt())
        .fold(0.0, f64::max);
    let bucket = (radius + longest).max(1e-12);
    let key = |p: [f64; 2]| ((p[0] / bucket).floor() as i64, (p[1] / bucket).floor() as i64);

    let mut hash: HashMap<(i64, i64), Vec<(usize, usize)>> = HashMap::new();
    for (set, list) in segs.iter().enumerate() {
        for (idx, s) in list.iter().enumerate() {
            hash.entry(key(s.0)).or_default().push((set, idx));
        }
    }

    let pairs: Vec<(usize, usize)> = (0..loci.len())
        .flat_map(|i| (i + 1..loci.len()).map(move |j| (i, j)))
        .collect();
    pairs
        .par_iter()
        .filter_map(|&(i, j)| {
            let mut best: Option<([f64; 2], f64)> = None;
            let mut crossing: Option<[f64; 2]> = None;
            for s in &segs[i] {
                let (cx, cy) = key(s.0);
                for dx in -1..=1 {
                    for dy in -1..=1 {
                        let Some(cands) = hash.get(&(cx + dx, cy + dy)) else { continue };
                        for &(set, idx) in cands {
                            if set != j {
                                continue;
                            }
                            let t = segs[j][idx];
                            let (w, d) = segment_distance(*s, t);
                            if d == 0.0 && crossing.is_none() {
                                crossing = Some(w);
                            }
                            if best.is_none_or(|b| d < b.1) {
                                best = Some((w, d));
                            }
                        }
                    }
                }
            }
            let (a, b) = (loci[i].subset, loci[j].subset);
            if let Some(w) = crossing {
                return Some(Intersection { a, b, witness: w, distance: 0.0, crossing: true });
            }
            let (w, d) = best?;
            (d <= radius && four_quadrants(family, a, b, w, radius))
                .then_some(Intersection { a, b, witness: w, distance: d, crossing: false })
        })
        .collect()
}

/// Smallest distance between the polylines of two contour sets.
pub fn min_distance(a: &ContourSet, b: &ContourSet) -> f64 {
    let bs: Vec<_> = b.segments().collect();
    a.segments()
        .flat_map(|s| bs.iter().map(move |&t| segment_distance(s, t).1))
        .fold(f64::INFINITY, f64::min)
}

/// Non-NEG cells face-adjacent to a NEG cell: the outer boundary of the
/// statistical amoeba `D_{k+} + ZCD_k`.
pub fn extremal_boundary(map: &RegionMap) -> Result<Vec<usize>> {
    if !map.is_labeled() {
        return Err(Error::NotLabeled);
    }
    Ok((0..map.cell_class.len())
        .filter(|&c| {
            map.cell_class[c] != CellClass::Neg
                && map.grid.cell_neighbors(c).iter().any(|&nb| map.cell_class[nb] == CellClass::Neg)
        })
        .collect())
}

/// Upper bound on the number of pairwise intersections within the stratum.
pub fn max_intersection_bound(n_terms: usize, k: usize) -> Result<u64> {
    check_stratum(n_terms, k)?;
    let c = binomial(n_terms, k);
    Ok(c * (c - 1 - binomial(n_terms - k, k)) / 2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::zk_log_gap;
    use crate::model::preset;
    use crate::regions::{classify_grid, label_subdomains};

    fn one(i: usize) -> SubsetMask {
        SubsetMask::from_one_based(&[i]).unwrap()
    }

    #[test]
    fn triangle_curve_passes_near_forced_point() {
        let tri = preset("triangle").unwrap();
        let grid = GridSpec::cube(2, -10.0, 10.0, 201).unwrap();
        let c = extract_zero_locus(&tri, one(1), &grid).unwrap();
        assert!(!c.empty);
        let target = [-(2f64.ln()), -(2f64.ln())];
        let d = c
            .polylines
            .iter()
            .flat_map(|p| &p.points)
            .map(|p| ((p[0] - target[0]).powi(2) + (p[1] - target[1]).powi(2)).sqrt())
            .fold(f64::INFINITY, f64::min);
        assert!(d < grid.cell_size());
        for p in c.polylines.iter().flat_map(|p| &p.points) {
            assert!(zk_log_gap(&tri, one(1), p).unwrap().value().abs() < 1e-6);
        }
    }

    #[test]
    fn triangle_tail_matches_bisection() {
        let tri = preset("triangle").unwrap();
        let grid = GridSpec::cube(2, -10.0, 10.0, 201).unwrap();
        let c = extract_zero_locus(&tri, one(1), &grid).unwrap();
        // oracle: bisection of 1 - e^x - e^{-10} along y = -10
        let (mut lo, mut hi) = (-1.0f64, 0.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if 1.0 - mid.exp() - (-10f64).exp() > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let on_edge = c.polylines.iter().flat_map(|p| &p.points).find(|p| p[1] == -10.0).unwrap();
        assert!((on_edge[0] - lo).abs() < 1e-10);
        assert!((lo + 4.54e-5).abs() < 1e-7);
    }

    #[test]
    fn wrong_dimension() {
        let f = preset("fig5_3d").unwrap();
        let g = GridSpec::cube(3, -1.0, 1.0, 5).unwrap();
        assert!(matches!(extract_zero_locus(&f, one(1), &g), Err(Error::DimensionUnsupported { .. })));
        let tri = preset("triangle").unwrap();
        let g2 = GridSpec::cube(2, -1.0, 1.0, 5).unwrap();
        assert!(matches!(sample_zero_points(&tri, one(1), &g2), Err(Error::DimensionUnsupported { .. })));
    }

    #[test]
    fn superideal_cloud() {
        let f = preset("superideal3").unwrap();
        let g = GridSpec::cube(3, -3.0, 3.0, 31).unwrap();
        let pts = sample_zero_points(&f, one(3), &g).unwrap();
        assert!(!pts.is_empty());
        let near = pts.iter().filter(|p| p[0].abs() < 0.2 && p[1].abs() < 0.2).map(|p| p[2]);
        for z in near {
            assert!((z - 2f64.ln()).abs() < 0.5);
        }
        for p in sample_zero_points(&f, one(1), &g).unwrap() {
            assert!(p[0] >= p[1].min(p[2]) - 1.0);
        }
    }

    #[test]
    fn visible_counts_small_grid() {
        let g = GridSpec::cube(2, -6.0, 6.0, 241).unwrap();
        let fig4 = stratum_loci(&preset("fig4").unwrap(), 1, &g).unwrap();
        assert_eq!(fig4.visible, 5);
        assert_eq!(fig4.empty_subsets(), vec![one(4)]);
        assert_eq!(stratum_loci(&preset("symmetric6").unwrap(), 1, &g).unwrap().visible, 6);
        let d = stratum_loci(&preset("degenerate6").unwrap(), 1, &g).unwrap();
        assert_eq!(d.visible_subsets(), vec![one(1), one(6)]);
        let half = stratum_loci(&preset("fig4").unwrap(), 3, &g).unwrap();
        assert_eq!(half.sets.len(), 10);
    }

    #[test]
    fn chaining_closed_and_open() {
        let segs = [(1, 2), (2, 3), (3, 1), (10, 11), (11, 12)];
        let chains = chain_segments(&segs);
        assert_eq!(chains, vec![(vec![10, 11, 12], false), (vec![1, 2, 3], true)]);
    }

    #[test]
    fn closed_circle_contour() {
        // gap = ln(e^0) - ln(e^{x^2+y^2-1}) vanishes on the unit circle
        let f = FunctionFamily::new(
            2,
            vec![
                crate::model::FunctionSpec::Polynomial {
                    terms: vec![
                        crate::model::Monomial { c: 1.0, e: vec![2, 0] },
                        crate::model::Monomial { c: 1.0, e: vec![0, 2] },
                        crate::model::Monomial { c: -1.0, e: vec![0, 0] },
                    ],
                },
                crate::model::FunctionSpec::Linear { b: 0.0, a: vec![0.0, 0.0] },
            ],
        )
        .unwrap();
        let g = GridSpec::cube(2, -2.0, 2.0, 41).unwrap();
        let c = extract_zero_locus(&f, one(1), &g).unwrap();
        assert_eq!(c.polylines.len(), 1);
        assert!(c.polylines[0].closed);
        for p in &c.polylines[0].points {
            assert!(((p[0] * p[0] + p[1] * p[1]).sqrt() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn k1_loci_never_reported() {
        let g = GridSpec::cube(2, -10.0, 10.0, 201).unwrap();
        for name in ["triangle", "fig4", "symmetric6"] {
            let f = preset(name).unwrap();
            let loci = stratum_loci(&f, 1, &g).unwrap();
            assert!(detect_pairwise_intersections(&f, &loci.sets, 2.0 * g.cell_size()).is_empty(), "{name}");
        }
    }

    #[test]
    fn fig4_k2_crossings_overlap() {
        let g = GridSpec::cube(2, -6.0, 6.0, 241).unwrap();
        let f = preset("fig4").unwrap();
        let loci = stratum_loci(&f, 2, &g).unwrap();
        let hits = detect_pairwise_intersections(&f, &loci.sets, 2.0 * g.cell_size());
        assert!(!hits.is_empty());
        assert!(hits.iter().all(|h| h.a.intersects(h.b)));
        assert!(hits.len() as u64 <= max_intersection_bound(6, 2).unwrap());
    }

    #[test]
    fn extremal_boundary_examples() {
        let tri = preset("triangle").unwrap();
        let g = GridSpec::cube(2, -5.0, 5.0, 101).unwrap();
        let map = classify_grid(&tri, 1, &g, 1e-12).unwrap();
        assert!(matches!(extremal_boundary(&map), Err(Error::NotLabeled)));
        let map = label_subdomains(map);
        let cells = extremal_boundary(&map).unwrap();
        assert!(!cells.is_empty());
        assert!(cells.iter().all(|&c| map.cell_class[c] == CellClass::Boundary));

        let f = preset("fig4").unwrap();
        let map = label_subdomains(classify_grid(&f, 2, &g, 1e-12).unwrap());
        let cells = extremal_boundary(&map).unwrap();
        assert!(!cells.is_empty());
        assert!(cells
            .iter()
            .all(|&c| matches!(map.cell_class[c], CellClass::Boundary | CellClass::Zcd)));
    }

    #[test]
    fn intersection_bounds() {
        assert_eq!(max_intersection_bound(6, 2).unwrap(), 60);
        assert_eq!(max_intersection_bound(6, 1).unwrap(), 0);
        assert_eq!(max_intersection_bound(4, 2).unwrap(), 12);
        assert!(max_intersection_bound(4, 3).is_err());
    }
}
