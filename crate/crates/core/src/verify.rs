//! Executable property checks with counterexample reporting.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{PointExponents, SignVector};
use crate::grid::GridSpec;
use crate::loci::stratum_loci;
use crate::model::{binomial, check_stratum, k_subsets, FunctionFamily, SubsetMask};
use crate::polygon::k_constructibility_check;
use crate::regions::{DomainClass, Stratum};
use crate::sampling::{sample_points, SampleConfig};
use crate::tropical::{limit_forms, skeleton_2d, split_max_gap, AffineForm, TropicalKind};

/// Witnesses kept per check.
pub const MAX_WITNESSES: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub point: Vec<f64>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckSection {
    pub name: String,
    pub samples: usize,
    pub violations: usize,
    pub witnesses: Vec<Witness>,
    pub expect_violation: bool,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CheckSection {
    fn new(name: &str, samples: usize, mut found: Vec<(usize, Witness)>, expect_violation: bool) -> Self {
        found.sort_by_key(|(i, _)| *i);
        let violations = found.len();
        let witnesses = found.into_iter().take(MAX_WITNESSES).map(|(_, w)| w).collect();
        CheckSection {
            name: name.to_string(),
            samples,
            violations,
            witnesses,
            expect_violation,
            pass: (violations > 0) == expect_violation,
            note: None,
        }
    }

    fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

/// How membership of the maximal instability domain is decided.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NegRule {
    /// Exactly `C(N-1,k-1)` negatives (a common-term star at `2k = N`).
    #[default]
    Count,
    /// The largest negative count observed over the sample set.
    ObservedMax,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub seed: u64,
    pub samples: usize,
    pub bbox: Vec<(f64, f64)>,
    pub tol: f64,
    pub near_fraction: f64,
    pub neg_rule: NegRule,
    /// Check names whose pass criterion is inverted.
    pub expect_violation: Vec<String>,
    /// Grid resolution for the grid-based checks.
    pub res: usize,
    pub rays: usize,
}

impl VerifyConfig {
    pub fn new(seed: u64, samples: usize, bbox: Vec<(f64, f64)>) -> Self {
        VerifyConfig {
            seed,
            samples,
            bbox,
            tol: crate::eval::DEFAULT_TOL,
            near_fraction: 0.25,
            neg_rule: NegRule::Count,
            expect_violation: Vec::new(),
            res: 201,
            rays: 200,
        }
    }

    fn expects(&self, name: &str) -> bool {
        self.expect_violation.iter().any(|e| e == name || (e == "chains" && name == "chain_neg"))
    }

    fn sample_config(&self) -> SampleConfig {
        let mut s = SampleConfig::new(self.seed, self.samples, self.bbox.clone());
        s.near_fraction = self.near_fraction;
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub config: VerifyConfig,
    pub sections: Vec<CheckSection>,
    pub pass: bool,
}

impl VerifyReport {
    pub fn new(config: VerifyConfig, sections: Vec<CheckSection>) -> Self {
        let pass = sections.iter().all(|s| s.pass);
        VerifyReport { config, sections, pass }
    }

    pub fn section(&self, name: &str) -> Option<&CheckSection> {
        self.sections.iter().find(|s| s.name == name)
    }
}

fn all_strata(n_terms: usize) -> Vec<usize> {
    (1..=n_terms / 2).collect()
}

/// Sign-count bound, intersecting negatives, the half-stratum count and the
/// inclusion chains of the stable and maximally unstable domains.
pub fn check_inclusion_and_counts(family: &FunctionFamily, strata: &[usize], cfg: &VerifyConfig) -> Result<Vec<CheckSection>> {
    let n = family.len();
    for &k in strata {
        check_stratum(n, k)?;
    }
    let mut strata = strata.to_vec();
    strata.sort_unstable();
    strata.dedup();
    let layers: Vec<Stratum> = strata.iter().map(|&k| Stratum::new(n, k)).collect::<Result<_>>()?;
    let points = sample_points(family, &strata, &cfg.sample_config());
    let vectors: Vec<Vec<SignVector>> = points
        .par_iter()
        .map(|x| {
            let p = PointExponents::new(family, x);
            layers.iter().map(|l| l.sign_vector(&p, cfg.tol)).collect()
        })
        .collect();

    let mut ekr = Vec::new();
    let mut intersecting = Vec::new();
    let mut half = Vec::new();
    let mut half_samples = 0;
    for (i, (x, vs)) in points.iter().zip(&vectors).enumerate() {
        for (layer, v) in layers.iter().zip(vs) {
            if v.has_zero() {
                continue;
            }
            let k = layer.k;
            let bound = binomial(n - 1, k - 1) as usize;
            if v.neg_count > bound {
                ekr.push((i, Witness { point: x.clone(), detail: format!("k={k}: {} negatives > {bound}", v.neg_count) }));
            }
            let neg = v.negatives(&layer.masks);
            if let Some((a, b)) = neg
                .iter()
                .enumerate()
                .flat_map(|(p, a)| neg[p + 1..].iter().map(move |b| (a, b)))
                .find(|(a, b)| !a.intersects(**b))
            {
                intersecting.push((i, Witness { point: x.clone(), detail: format!("k={k}: disjoint negatives {a} {b}") }));
            }
            if 2 * k == n {
                half_samples += 1;
                let expect = binomial(2 * k - 1, k) as usize;
                if v.neg_count != expect {
                    half.push((i, Witness { point: x.clone(), detail: format!("k={k}: {} negatives != {expect}", v.neg_count) }));
                }
            }
        }
    }

    let max_neg: Vec<usize> = (0..layers.len())
        .map(|li| vectors.iter().filter(|vs| !vs[li].has_zero()).map(|vs| vs[li].neg_count).max().unwrap_or(0))
        .collect();
    let is_neg = |li: usize, v: &SignVector| -> bool {
        match cfg.neg_rule {
            NegRule::Count => layers[li].classify(v) == Some(DomainClass::Neg),
            NegRule::ObservedMax => max_neg[li] > 0 && v.neg_count == max_neg[li],
        }
    };
    let mut chain_pos = Vec::new();
    let mut chain_neg = Vec::new();
    let mut chain_samples = 0;
    for (i, (x, vs)) in points.iter().zip(&vectors).enumerate() {
        for lo in 0..layers.len() {
            for hi in lo + 1..layers.len() {
                let (vl, vh) = (&vs[lo], &vs[hi]);
                if vl.has_zero() || vh.has_zero() {
                    continue;
                }
                chain_samples += 1;
                let (kl, kh) = (layers[lo].k, layers[hi].k);
                if layers[hi].classify(vh) == Some(DomainClass::Pos) && layers[lo].classify(vl) != Some(DomainClass::Pos) {
                    chain_pos.push((i, Witness { point: x.clone(), detail: format!("POS at k={kh} but not at k={kl}") }));
                }
                if is_neg(lo, vl) && !is_neg(hi, vh) {
                    chain_neg.push((
                        i,
                        Witness {
                            point: x.clone(),
                            detail: format!(
                                "NEG at k={kl} ({} negatives) but not at k={kh} ({} negatives)",
                                vl.neg_count, vh.neg_count
                            ),
                        },
                    ));
                }
            }
        }
    }
    let mut sections = vec![
        CheckSection::new("ekr_bound", points.len(), ekr, cfg.expects("ekr_bound")),
        CheckSection::new("intersecting_family", points.len(), intersecting, cfg.expects("intersecting_family")),
    ];
    if strata.iter().any(|&k| 2 * k == n) {
        sections.push(CheckSection::new("half_stratum_count", half_samples, half, cfg.expects("half_stratum_count")));
    }
    if strata.len() > 1 {
        let rule = match cfg.neg_rule {
            NegRule::Count => "NEG by exact maximal count".to_string(),
            NegRule::ObservedMax => format!("NEG by observed maximum counts {max_neg:?} for strata {strata:?}"),
        };
        sections.push(CheckSection::new("chain_pos", chain_samples, chain_pos, cfg.expects("chain_pos")));
        sections.push(CheckSection::new("chain_neg", chain_samples, chain_neg, cfg.expects("chain_neg")).with_note(rule));
    }
    Ok(sections)
}

/// Counting identity, antisymmetry, power sums and nesting monotonicity.
pub fn check_algebraic_identities(family: &FunctionFamily, cfg: &VerifyConfig) -> Result<Vec<CheckSection>> {
    let n = family.len();
    let mut sc = cfg.sample_config();
    sc.seed = cfg.seed.wrapping_add(1);
    sc.near_fraction = 0.0;
    let points = sample_points(family, &[], &sc);
    let all_masks: Vec<Vec<SubsetMask>> = (1..n).map(|k| k_subsets(n, k)).collect();

    type Found = Vec<(usize, Witness)>;
    let results: Vec<(Found, Found, Found, Found)> = points
        .par_iter()
        .enumerate()
        .map(|(i, x)| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed);
            rng.set_stream(i as u64 + 1);
            let exps = family.exponents(x);
            let p = PointExponents::from_exponents(exps.clone());
            let m = p.max();
            let w: Vec<f64> = exps.iter().map(|f| (f - m).exp()).collect();
            let total: f64 = w.iter().sum();
            let mass = |mask: SubsetMask| mask.indices().map(|a| w[a]).sum::<f64>();
            let wit = |detail: String| Witness { point: x.clone(), detail };
            let (mut count, mut anti, mut power, mut nest) = (vec![], vec![], vec![], vec![]);

            for (ki, masks) in all_masks.iter().enumerate() {
                let k = ki + 1;
                let lhs: f64 = masks.iter().map(|&mk| mass(mk)).sum();
                let rhs = binomial(n - 1, k - 1) as f64 * total;
                if (lhs - rhs).abs() > 1e-12 * rhs {
                    count.push((i, wit(format!("k={k}: {lhs} vs {rhs}"))));
                }
                for &mk in masks {
                    let g = p.log_gap(mk);
                    let gc = p.log_gap(mk.complement(n));
                    if g != -gc {
                        anti.push((i, wit(format!("{mk}: {g} vs {gc}"))));
                    }
                }
            }

            let lambda = rng.random_range(1.0..10.0);
            match crate::tropical::power_sum_holds(&exps, lambda) {
                Ok(true) => {}
                _ => power.push((i, wit(format!("lambda={lambda}")))),
            }

            // random nested pair I_k subset of I_kh
            if n >= 3 {
                let kh = rng.random_range(2..n);
                let k = rng.random_range(1..kh);
                let mut order: Vec<usize> = (0..n).collect();
                for a in (1..n).rev() {
                    order.swap(a, rng.random_range(0..=a));
                }
                let big = SubsetMask::from_indices(order[..kh].iter().copied());
                let small = SubsetMask::from_indices(order[..k].iter().copied());
                let z = |mask: SubsetMask| total - 2.0 * mass(mask);
                let diff = z(small) - z(big);
                let expect = 2.0 * (mass(big) - mass(small));
                let extra = 2.0 * big.indices().filter(|&a| !small.contains(a)).map(|a| w[a]).sum::<f64>();
                if !(extra > 0.0) || (diff - extra).abs() > 1e-12 * total.max(expect.abs()) {
                    nest.push((i, wit(format!("{small} in {big}: difference {diff}, expected {extra}"))));
                }
            }
            (count, anti, power, nest)
        })
        .collect();

    let mut buckets: [Vec<(usize, Witness)>; 4] = Default::default();
    for (a, b, c, d) in results {
        buckets[0].extend(a);
        buckets[1].extend(b);
        buckets[2].extend(c);
        buckets[3].extend(d);
    }
    let [count, anti, power, nest] = buckets;
    let s = points.len();
    Ok(vec![
        CheckSection::new("counting_identity", s, count, cfg.expects("counting_identity")),
        CheckSection::new("antisymmetry", s, anti, cfg.expects("antisymmetry")),
        CheckSection::new("power_sum", s, power, cfg.expects("power_sum")),
        CheckSection::new("nesting_monotonicity", s, nest, cfg.expects("nesting_monotonicity")),
    ])
}

/// Constructibility by non-lopsided aggregated lengths agrees with all-positive signs.
pub fn check_constructibility(family: &FunctionFamily, strata: &[usize], cfg: &VerifyConfig) -> Result<CheckSection> {
    let n = family.len();
    let layers: Vec<Stratum> = strata.iter().map(|&k| Stratum::new(n, k)).collect::<Result<_>>()?;
    let mut sc = cfg.sample_config();
    sc.seed = cfg.seed.wrapping_add(2);
    sc.count = cfg.samples.min(1000);
    let points = sample_points(family, strata, &sc);
    let found: Vec<(usize, Witness)> = points
        .par_iter()
        .enumerate()
        .flat_map_iter(|(i, x)| {
            let p = PointExponents::new(family, x);
            layers
                .iter()
                .filter_map(|l| {
                    let v = l.sign_vector(&p, cfg.tol);
                    if v.has_zero() {
                        return None;
                    }
                    let poly = k_constructibility_check(family, l.k, x).ok()?;
                    (poly != (v.neg_count == 0)).then(|| {
                        (i, Witness { point: x.clone(), detail: format!("k={}: polygons {poly}, signs {}", l.k, v.neg_count == 0) })
                    })
                })
                .collect::<Vec<_>>()
        })
        .collect();
    Ok(CheckSection::new("constructibility", points.len(), found, cfg.expects("constructibility")))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RayEscapeReport {
    pub section: CheckSection,
    pub trials: usize,
    pub excluded: usize,
    pub hits: usize,
    pub exclusion_fraction: f64,
    pub hit_fraction: f64,
}

/// Band half-width, in cells, around a tie line `f_a = f_b` used to exclude rays.
pub const EXCLUSION_CELLS: f64 = 2.0;

/// True when the ray stays within `band` of some tie line `f_a = f_b` for
/// `t` in `[0, reach]`, the numerical stand-in for `f_a - f_b` vanishing
/// identically along the ray.
fn tracks_tie_line(forms: &[AffineForm], vals: &[f64], slope: &[f64], band: f64, reach: f64) -> bool {
    let n = forms.len();
    (0..n).any(|a| {
        (a + 1..n).any(|b| {
            let norm = forms[a].a.iter().zip(&forms[b].a).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
            if norm == 0.0 {
                return false;
            }
            let d0 = vals[a] - vals[b];
            let d1 = d0 + reach * (slope[a] - slope[b]);
            d0.abs() <= band * norm && d1.abs() <= band * norm
        })
    })
}

/// Rays from points of the `k_hat` stratum locus, marched until one form
/// dominates for good, must cross the `k` stratum locus.
///
/// Rays that run along a tie line `f_a = f_b` are excluded.
pub fn ray_escape_test(
    family: &FunctionFamily,
    k_hat: usize,
    k: usize,
    trials: usize,
    seed: u64,
    grid: &GridSpec,
) -> Result<RayEscapeReport> {
    let n = family.len();
    check_stratum(n, k_hat)?;
    check_stratum(n, k)?;
    if k >= k_hat {
        return Err(Error::InvalidStratum { n_terms: n, k, max: k_hat - 1 });
    }
    let forms = limit_forms(family, TropicalKind::Affine, &[])?;
    let loci = stratum_loci(family, k_hat, grid)?;
    let bases: Vec<[f64; 2]> = loci.sets.iter().flat_map(|c| c.polylines.iter().flat_map(|p| p.points.iter().copied())).collect();
    if bases.is_empty() {
        return Err(Error::Inconclusive(format!("no k={k_hat} locus on the grid")));
    }
    let cell = grid.cell_size();
    let step = cell / 4.0;
    let band = EXCLUSION_CELLS * cell;
    let reach = grid.bbox.iter().map(|(lo, hi)| (hi - lo).powi(2)).sum::<f64>().sqrt();
    let masks = k_subsets(n, k);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rays: Vec<([f64; 2], [f64; 2])> = (0..trials)
        .map(|_| {
            let b = bases[rng.random_range(0..bases.len())];
            let t = rng.random_range(0.0..std::f64::consts::TAU);
            (b, [t.cos(), t.sin()])
        })
        .collect();

    enum Outcome {
        Excluded,
        Hit,
        Miss(String),
    }
    let outcomes: Vec<Outcome> = rays
        .par_iter()
        .map(|&(x0, d)| {
            let vals: Vec<f64> = forms.iter().map(|f| f.eval(&x0)).collect();
            let slope: Vec<f64> = forms.iter().map(|f| f.a[0] * d[0] + f.a[1] * d[1]).collect();
            if tracks_tie_line(&forms, &vals, &slope, band, reach) {
                return Outcome::Excluded;
            }
            // f_a(x0 + t d) = vals[a] + t * slope[a]
            let a0 = (0..n)
                .max_by(|&a, &b| slope[a].total_cmp(&slope[b]).then(vals[a].total_cmp(&vals[b])))
                .expect("non-empty");
            let mut t0: f64 = 0.0;
            for b in 0..n {
                if b != a0 && slope[a0] > slope[b] {
                    t0 = t0.max((vals[b] - vals[a0]) / (slope[a0] - slope[b]));
                }
            }
            let dominated = |t: f64| {
                let top = vals[a0] + t * slope[a0];
                (0..n).filter(|&b| b != a0).map(|b| (vals[b] + t * slope[b] - top).exp()).sum::<f64>() < 1.0
            };
            let mut t1 = t0.max(step);
            let mut guard = 0;
            while !dominated(t1) {
                t1 *= 2.0;
                guard += 1;
                if guard > 60 {
                    return Outcome::Miss(format!("form {} never dominates along the ray", a0 + 1));
                }
            }
            let at = |t: f64| [x0[0] + t * d[0], x0[1] + t * d[1]];
            let signs = |t: f64| -> Vec<i8> {
                let p = PointExponents::new(family, &at(t));
                masks.iter().map(|&m| crate::eval::sign_with_tol(p.log_gap(m), 0.0)).collect()
            };
            let start = signs(0.0);
            let steps = (t1 / step).ceil() as usize;
            for s in 1..=steps {
                let t = (s as f64 * step).min(t1);
                if signs(t) != start {
                    return Outcome::Hit;
                }
            }
            Outcome::Miss(format!("no k={k} sign change up to t={t1:.3} (dominant form {})", a0 + 1))
        })
        .collect();

    let mut found = Vec::new();
    let (mut excluded, mut hits) = (0, 0);
    for (i, (o, (x0, d))) in outcomes.into_iter().zip(&rays).enumerate() {
        match o {
            Outcome::Excluded => excluded += 1,
            Outcome::Hit => hits += 1,
            Outcome::Miss(detail) => found.push((
                i,
                Witness { point: x0.to_vec(), detail: format!("direction ({:.4},{:.4}): {detail}", d[0], d[1]) },
            )),
        }
    }
    let counted = trials - excluded;
    let exclusion_fraction = excluded as f64 / trials.max(1) as f64;
    let hit_fraction = if counted == 0 { 0.0 } else { hits as f64 / counted as f64 };
    let note = format!(
        "{excluded} of {trials} rays excluded (within {EXCLUSION_CELLS} cells of a tie line f_a = f_b over the bbox diagonal); {hits}/{counted} rays crossed"
    );
    let section = CheckSection::new("ray_escape", counted, found, false).with_note(note);
    Ok(RayEscapeReport { section, trials, excluded, hits, exclusion_fraction, hit_fraction })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoincidenceMasks {
    pub strata: Vec<usize>,
    /// Per stratum: cells where some `max_I - max_{not I}` changes sign across the corners.
    pub cell_masks: Vec<Vec<bool>>,
    /// Cells within half a cell of the clipped skeleton.
    pub skeleton_cells: Vec<bool>,
}

fn stratum_cell_mask(vals: &[Vec<f64>], masks: &[SubsetMask], grid: &GridSpec, tol: f64) -> Vec<bool> {
    (0..grid.cell_count())
        .into_par_iter()
        .map(|cell| {
            let corners = grid.cell_corners(cell);
            masks.iter().any(|&m| {
                let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
                for &c in &corners {
                    let g = split_max_gap(&vals[c], m);
                    lo = lo.min(g);
                    hi = hi.max(g);
                }
                lo <= tol && hi >= -tol
            })
        })
        .collect()
}

pub fn tropical_masks(family: &FunctionFamily, strata: &[usize], grid: &GridSpec, tol: f64) -> Result<CoincidenceMasks> {
    let n = family.len();
    for &k in strata {
        check_stratum(n, k)?;
    }
    let skel = skeleton_2d(family, TropicalKind::Affine)?;
    let vals: Vec<Vec<f64>> = (0..grid.node_count())
        .into_par_iter()
        .map(|node| skel.forms.iter().map(|f| f.eval(&grid.node_point(node))).collect())
        .collect();
    let cell_masks = strata
        .iter()
        .map(|&k| stratum_cell_mask(&vals, &k_subsets(n, k), grid, tol))
        .collect();
    let half = 0.5 * (0..2).map(|a| grid.step(a)).fold(f64::INFINITY, f64::min);
    let skeleton_cells = (0..grid.cell_count())
        .into_par_iter()
        .map(|cell| skel.distance(&grid.cell_center(cell)) < half)
        .collect();
    Ok(CoincidenceMasks { strata: strata.to_vec(), cell_masks, skeleton_cells })
}

/// Stratum-wise tropical loci agree across strata and with the skeleton
/// (within one cell).
pub fn check_tropical_coincidence(family: &FunctionFamily, strata: &[usize], grid: &GridSpec, tol: f64) -> Result<CheckSection> {
    let masks = tropical_masks(family, strata, grid, tol)?;
    let within_one = |mask: &[bool], cell: usize| {
        mask[cell] || grid.cell_neighbors(cell).iter().any(|&nb| mask[nb]) || {
            // diagonal neighbours
            let m = grid.cell_multi(cell);
            let cells = grid.cells_per_axis();
            (-1i64..=1).any(|dx| {
                (-1i64..=1).any(|dy| {
                    let (i, j) = (m[0] as i64 + dx, m[1] as i64 + dy);
                    i >= 0 && j >= 0 && (i as usize) < cells[0] && (j as usize) < cells[1] && mask[grid.cell_index(&[i as usize, j as usize])]
                })
            })
        }
    };
    let skel_dist = skeleton_2d(family, TropicalKind::Affine)?;
    let reach = 0.5 * (grid.step(0).powi(2) + grid.step(1).powi(2)).sqrt() + grid.cell_size();
    let mut found = Vec::new();
    for (si, mask) in masks.cell_masks.iter().enumerate() {
        let k = masks.strata[si];
        for cell in 0..mask.len() {
            if si > 0 && mask[cell] != masks.cell_masks[0][cell] {
                found.push((cell, Witness {
                    point: grid.cell_center(cell),
                    detail: format!("k={k} differs from k={}", masks.strata[0]),
                }));
            }
            if mask[cell] && skel_dist.distance(&grid.cell_center(cell)) > reach {
                found.push((cell, Witness { point: grid.cell_center(cell), detail: format!("k={k} cell far from skeleton") }));
            }
            if masks.skeleton_cells[cell] && !within_one(mask, cell) {
                found.push((cell, Witness { point: grid.cell_center(cell), detail: format!("skeleton cell missed by k={k}") }));
            }
        }
    }
    Ok(CheckSection::new("tropical_coincidence", grid.cell_count() * strata.len(), found, false))
}

/// Runs every check that applies to the family.
pub fn run_verify(family: &FunctionFamily, cfg: &VerifyConfig) -> Result<VerifyReport> {
    let strata = all_strata(family.len());
    let mut sections = check_inclusion_and_counts(family, &strata, cfg)?;
    sections.extend(check_algebraic_identities(family, cfg)?);
    sections.push(check_constructibility(family, &strata, cfg)?);
    if family.is_linear() && family.dim() == 2 {
        let grid = GridSpec::new(cfg.bbox.clone(), vec![cfg.res])?;
        let mut tc = check_tropical_coincidence(family, &strata, &grid, 1e-9)?;
        tc.expect_violation = cfg.expects(&tc.name);
        tc.pass = (tc.violations > 0) == tc.expect_violation;
        sections.push(tc);
        if strata.len() >= 2 {
            match ray_escape_test(family, 2, 1, cfg.rays, cfg.seed, &grid) {
                Ok(r) => sections.push(r.section),
                Err(Error::Inconclusive(msg)) => sections.push(
                    CheckSection::new("ray_escape", 0, Vec::new(), false).with_note(format!("skipped: {msg}")),
                ),
                Err(e) => return Err(e),
            }
        }
    }
    Ok(VerifyReport::new(cfg.clone(), sections))
}
