//! Exponent-function families and k-subset bookkeeping.
//!
//! Every other module relies on the ordering conventions fixed here: term
//! indices are 0-based in the library API and 1-based in files and on the
//! command line, and the k-subsets of a stratum are always listed in
//! lexicographic order of their sorted element lists.

use std::fmt;
use std::path::Path;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest number of terms a family may carry (C(24,12) ~ 2.7M subsets).
pub const MAX_TERMS: usize = 24;

/// Largest exponent allowed per variable in a polynomial term.
pub const MAX_POLY_EXPONENT: u32 = 12;

/// One monomial `c * x_1^e_1 * ... * x_n^e_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub c: f64,
    pub e: Vec<u32>,
}

/// An exponent function `f_alpha` over `R^n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FunctionSpec {
    /// `b + a . x`
    Linear { b: f64, a: Vec<f64> },
    /// Sum of monomials with non-negative integer exponents.
    Polynomial { terms: Vec<Monomial> },
    /// Radial bump with threshold radius `(alpha + 1999) / 1000`; `c` scales
    /// the inner branch and `d` the outer one.
    RadialBump { alpha: usize, c: f64, d: f64 },
}

/// Smooth step used by the radial bump: `1 - exp(-z^2 / (1 - z^2))` inside
/// the unit interval, `1` outside.
pub fn bump_eta(z: f64) -> f64 {
    if z.abs() < 1.0 {
        let z2 = z * z;
        1.0 - (-z2 / (1.0 - z2)).exp()
    } else {
        1.0
    }
}

/// Threshold radius of the radial bump with index `alpha` (1-based).
pub fn bump_radius(alpha: usize) -> f64 {
    (alpha as f64 + 1999.0) / 1000.0
}

impl FunctionSpec {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            FunctionSpec::Linear { b, a } => b + a.iter().zip(x).map(|(ai, xi)| ai * xi).sum::<f64>(),
            FunctionSpec::Polynomial { terms } => terms
                .iter()
                .map(|t| {
                    t.e.iter()
                        .zip(x)
                        .fold(t.c, |acc, (&e, &xi)| acc * xi.powi(e as i32))
                })
                .sum(),
            FunctionSpec::RadialBump { alpha, c, d } => {
                let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                let r = bump_radius(*alpha);
                let eta = bump_eta(norm - r);
                if r > norm {
                    c * eta
                } else {
                    d * eta
                }
            }
        }
    }

    /// `(b, a)` for a linear spec.
    pub fn as_linear(&self) -> Option<(f64, &[f64])> {
        match self {
            FunctionSpec::Linear { b, a } => Some((*b, a.as_slice())),
            _ => None,
        }
    }

    fn check(&self, n: usize) -> Result<()> {
        match self {
            FunctionSpec::Linear { b, a } => {
                if a.len() != n {
                    return Err(Error::InvalidModel(format!(
                        "linear term has {} coefficients, expected {n}",
                        a.len()
                    )));
                }
                if !b.is_finite() || a.iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidModel("non-finite linear coefficient".into()));
                }
            }
            FunctionSpec::Polynomial { terms } => {
                for t in terms {
                    if t.e.len() != n {
                        return Err(Error::InvalidModel(format!(
                            "monomial has {} exponents, expected {n}",
                            t.e.len()
                        )));
                    }
                    if let Some(&e) = t.e.iter().find(|&&e| e > MAX_POLY_EXPONENT) {
                        return Err(Error::InvalidModel(format!(
                            "exponent {e} exceeds the limit {MAX_POLY_EXPONENT}"
                        )));
                    }
                    if !t.c.is_finite() {
                        return Err(Error::InvalidModel("non-finite monomial coefficient".into()));
                    }
                }
            }
            FunctionSpec::RadialBump { alpha, c, d } => {
                if *alpha == 0 {
                    return Err(Error::InvalidModel("radial bump index is 1-based".into()));
                }
                if !c.is_finite() || !d.is_finite() {
                    return Err(Error::InvalidModel("non-finite bump parameter".into()));
                }
            }
        }
        Ok(())
    }
}

/// The ordered list of exponent functions of a signed partition function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawFamily", into = "RawFamily")]
pub struct FunctionFamily {
    n: usize,
    specs: Vec<FunctionSpec>,
}

#[derive(Serialize, Deserialize)]
struct RawFamily {
    n: usize,
    functions: Vec<FunctionSpec>,
}

impl TryFrom<RawFamily> for FunctionFamily {
    type Error = Error;

    fn try_from(raw: RawFamily) -> Result<Self> {
        FunctionFamily::new(raw.n, raw.functions)
    }
}

impl From<FunctionFamily> for RawFamily {
    fn from(f: FunctionFamily) -> Self {
        RawFamily {
            n: f.n,
            functions: f.specs,
        }
    }
}

impl FunctionFamily {
    pub fn new(n: usize, specs: Vec<FunctionSpec>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidModel("dimension n must be at least 1".into()));
        }
        if specs.len() < 2 {
            return Err(Error::InvalidModel(format!(
                "need at least 2 terms, got {}",
                specs.len()
            )));
        }
        if specs.len() > MAX_TERMS {
            return Err(Error::ModelTooLarge(format!(
                "{} terms exceeds the limit of {MAX_TERMS}",
                specs.len()
            )));
        }
        for s in &specs {
            s.check(n)?;
        }
        Ok(FunctionFamily { n, specs })
    }

    /// Linear family from `(b, a)` pairs.
    pub fn linear(n: usize, forms: &[(f64, Vec<f64>)]) -> Result<Self> {
        Self::new(
            n,
            forms
                .iter()
                .map(|(b, a)| FunctionSpec::Linear { b: *b, a: a.clone() })
                .collect(),
        )
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("family serializes")
    }

    /// Dimension of the variable space.
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of terms N.
    pub fn len(&self) -> usize {
        self.specs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.specs.is_empty()
    }

    pub fn specs(&self) -> &[FunctionSpec] {
        &self.specs
    }

    /// `f_index(x)` with a 0-based index.
    pub fn value(&self, index: usize, x: &[f64]) -> f64 {
        self.specs[index].eval(x)
    }

    /// Writes every exponent `f_alpha(x)` into `out`.
    pub fn exponents_into(&self, x: &[f64], out: &mut [f64]) {
        for (o, s) in out.iter_mut().zip(&self.specs) {
            *o = s.eval(x);
        }
    }

    pub fn exponents(&self, x: &[f64]) -> Vec<f64> {
        self.specs.iter().map(|s| s.eval(x)).collect()
    }

    pub fn is_linear(&self) -> bool {
        self.specs.iter().all(|s| s.as_linear().is_some())
    }

    pub fn is_polynomial(&self) -> bool {
        self.specs
            .iter()
            .all(|s| !matches!(s, FunctionSpec::RadialBump { .. }))
    }

    /// `(b_alpha, a_alpha)` for every term, or `None` if any term is non-linear.
    pub fn linear_forms(&self) -> Option<Vec<(f64, Vec<f64>)>> {
        self.specs
            .iter()
            .map(|s| s.as_linear().map(|(b, a)| (b, a.to_vec())))
            .collect()
    }
}

/// A non-fatal issue found by [`validate_family`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FamilyWarning {
    /// Two linear terms have identical `(a, b)`; their difference vanishes
    /// identically. Indices are 0-based.
    DuplicateLinearForm(usize, usize),
    /// Fewer than three terms: the disjointness arguments for the first
    /// stratum need N >= 3.
    FewTerms(usize),
}

impl fmt::Display for FamilyWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilyWarning::DuplicateLinearForm(a, b) => {
                write!(f, "terms {} and {} have identical linear forms", a + 1, b + 1)
            }
            FamilyWarning::FewTerms(n) => write!(f, "only {n} terms; first-stratum loci may intersect"),
        }
    }
}

pub fn validate_family(family: &FunctionFamily) -> Vec<FamilyWarning> {
    let mut warnings = Vec::new();
    if family.len() < 3 {
        warnings.push(FamilyWarning::FewTerms(family.len()));
    }
    let specs = family.specs();
    for (i, j) in (0..specs.len()).tuple_combinations() {
        if let (Some((bi, ai)), Some((bj, aj))) = (specs[i].as_linear(), specs[j].as_linear()) {
            if bi == bj && ai == aj {
                warnings.push(FamilyWarning::DuplicateLinearForm(i, j));
            }
        }
    }
    warnings
}

/// A subset of the term indices `{0, .., N-1}` stored as a bitmask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubsetMask(u32);

impl SubsetMask {
    pub fn from_bits(bits: u32) -> Self {
        SubsetMask(bits)
    }

    /// Builds a mask from 0-based indices.
    pub fn from_indices(indices: impl IntoIterator<Item = usize>) -> Self {
        SubsetMask(indices.into_iter().fold(0u32, |acc, i| acc | (1 << i)))
    }

    /// Builds a mask from 1-based indices as used in files and on the CLI.
    pub fn from_one_based(indices: &[usize]) -> Result<Self> {
        if indices.iter().any(|&i| i == 0 || i > MAX_TERMS) {
            return Err(Error::InvalidModel(format!("subset indices {indices:?} out of range")));
        }
        Ok(Self::from_indices(indices.iter().map(|i| i - 1)))
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn k(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn contains(self, index: usize) -> bool {
        self.0 & (1 << index) != 0
    }

    pub fn complement(self, n_terms: usize) -> Self {
        SubsetMask(!self.0 & full_bits(n_terms))
    }

    pub fn intersects(self, other: SubsetMask) -> bool {
        self.0 & other.0 != 0
    }

    /// 0-based members in increasing order.
    pub fn indices(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            (bits != 0).then(|| {
                let i = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                i
            })
        })
    }

    pub fn one_based(self) -> Vec<usize> {
        self.indices().map(|i| i + 1).collect()
    }

    /// Lexicographic comparison of the sorted element lists.
    pub fn lex_cmp(self, other: SubsetMask) -> std::cmp::Ordering {
        self.indices().cmp(other.indices())
    }
}

impl fmt::Display for SubsetMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.one_based().iter().join(","))
    }
}

/// Serialized as its 1-based element list.
impl Serialize for SubsetMask {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.one_based().serialize(s)
    }
}

impl<'de> Deserialize<'de> for SubsetMask {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<usize>::deserialize(d)?;
        SubsetMask::from_one_based(&v).map_err(serde::de::Error::custom)
    }
}

fn full_bits(n_terms: usize) -> u32 {
    if n_terms >= 32 {
        u32::MAX
    } else {
        (1u32 << n_terms) - 1
    }
}

pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i + 1) as u64)
}

/// All k-subsets of `N` terms in lexicographic order, for any `0 <= k <= N`.
pub fn k_subsets(n_terms: usize, k: usize) -> Vec<SubsetMask> {
    (0..n_terms)
        .combinations(k)
        .map(SubsetMask::from_indices)
        .collect()
}

/// The stratum subsets `P_k[N]`, `1 <= k <= N/2`, in lexicographic order.
/// Position `tau` in this list is the component index of every sign vector.
pub fn enumerate_subsets(n_terms: usize, k: usize) -> Result<Vec<SubsetMask>> {
    check_stratum(n_terms, k)?;
    Ok(k_subsets(n_terms, k))
}

pub(crate) fn check_stratum(n_terms: usize, k: usize) -> Result<()> {
    let max = n_terms / 2;
    if k == 0 || k > max {
        return Err(Error::InvalidStratum { n_terms, k, max });
    }
    Ok(())
}

/// Drops the redundant half of complementary pairs when `2k = N` (their loci
/// coincide), keeping the lexicographically smaller mask.
pub fn dedup_for_loci(subsets: &[SubsetMask], n_terms: usize) -> Vec<SubsetMask> {
    subsets
        .iter()
        .copied()
        .filter(|s| {
            2 * s.k() != n_terms || s.lex_cmp(s.complement(n_terms)) == std::cmp::Ordering::Less
        })
        .collect()
}

/// Built-in example families.
pub const PRESETS: &[(&str, &str)] = &[
    ("triangle", "n=2, f = {0, x, y}"),
    ("fig1b", "n=2, f = {0, 3x, 3y, x+y+ln6}"),
    ("symmetric6", "n=2, f_a = cos(pi(a-1)/3) x + sin(pi(a-1)/3) y, a=1..6"),
    ("symmetric7", "n=2, f_a = cos(2pi(a-1)/7) x + sin(2pi(a-1)/7) y, a=1..7"),
    ("degenerate6", "n=2, f_a = (a-1) x + (6-a) y, a=1..6"),
    ("fig4", "n=2, f = {0, 3x, 3y, x+y+ln6, 2x+y+ln11, x+3y+ln4}"),
    ("fig5_3d", "n=3, f = {0, 3x, 3y, 2x+z+ln6, 2x+y+z+ln11, 3y+z+ln4}"),
    ("superideal3", "n=3, f = {x, y, z}"),
    ("poly6", "n=2, f = {0, 3x^2, 3y^3, x+xy+ln6, 2x+y^2+ln11, x+3y+xy+ln4}"),
    ("bump10", "n=2, ten radial bumps; (c,d) = (ln20,ln8), (ln20,ln2), then (ln2,ln2)"),
];

/// Names of the linear presets.
pub const LINEAR_PRESETS: &[&str] = &[
    "triangle",
    "fig1b",
    "symmetric6",
    "symmetric7",
    "degenerate6",
    "fig4",
    "fig5_3d",
    "superideal3",
];

pub fn preset(name: &str) -> Result<FunctionFamily> {
    let ln = f64::ln;
    let lin2 = |forms: &[(f64, f64, f64)]| {
        FunctionFamily::linear(2, &forms.iter().map(|&(b, ax, ay)| (b, vec![ax, ay])).collect::<Vec<_>>())
    };
    let cyclic = |n: usize, step: f64| {
        let forms: Vec<_> = (0..n)
            .map(|i| {
                let th = step * i as f64;
                (0.0, th.cos(), th.sin())
            })
            .collect();
        lin2(&forms)
    };
    match name {
        "triangle" => lin2(&[(0.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0)]),
        "fig1b" => lin2(&[
            (0.0, 0.0, 0.0),
            (0.0, 3.0, 0.0),
            (0.0, 0.0, 3.0),
            (ln(6.0), 1.0, 1.0),
        ]),
        "symmetric6" => cyclic(6, std::f64::consts::PI / 3.0),
        "symmetric7" => cyclic(7, 2.0 * std::f64::consts::PI / 7.0),
        "degenerate6" => {
            let forms: Vec<_> = (1..=6).map(|a| (0.0, (a - 1) as f64, (6 - a) as f64)).collect();
            lin2(&forms)
        }
        "fig4" => lin2(&[
            (0.0, 0.0, 0.0),
            (0.0, 3.0, 0.0),
            (0.0, 0.0, 3.0),
            (ln(6.0), 1.0, 1.0),
            (ln(11.0), 2.0, 1.0),
            (ln(4.0), 1.0, 3.0),
        ]),
        "fig5_3d" => FunctionFamily::linear(
            3,
            &[
                (0.0, vec![0.0, 0.0, 0.0]),
                (0.0, vec![3.0, 0.0, 0.0]),
                (0.0, vec![0.0, 3.0, 0.0]),
                (ln(6.0), vec![2.0, 0.0, 1.0]),
                (ln(11.0), vec![2.0, 1.0, 1.0]),
                (ln(4.0), vec![0.0, 3.0, 1.0]),
            ],
        ),
        "superideal3" => FunctionFamily::linear(
            3,
            &[
                (0.0, vec![1.0, 0.0, 0.0]),
                (0.0, vec![0.0, 1.0, 0.0]),
                (0.0, vec![0.0, 0.0, 1.0]),
            ],
        ),
        "poly6" => {
            let m = |c: f64, ex: u32, ey: u32| Monomial { c, e: vec![ex, ey] };
            let poly = |terms: Vec<Monomial>| FunctionSpec::Polynomial { terms };
            FunctionFamily::new(
                2,
                vec![
                    poly(vec![m(0.0, 0, 0)]),
                    poly(vec![m(3.0, 2, 0)]),
                    poly(vec![m(3.0, 0, 3)]),
                    poly(vec![m(1.0, 1, 0), m(1.0, 1, 1), m(ln(6.0), 0, 0)]),
                    poly(vec![m(2.0, 1, 0), m(1.0, 0, 2), m(ln(11.0), 0, 0)]),
                    poly(vec![m(1.0, 1, 0), m(3.0, 0, 1), m(1.0, 1, 1), m(ln(4.0), 0, 0)]),
                ],
            )
        }
        "bump10" => {
            let specs = (1..=10)
                .map(|alpha| {
                    let (c, d) = match alpha {
                        1 => (ln(20.0), ln(8.0)),
                        2 => (ln(20.0), ln(2.0)),
                        _ => (ln(2.0), ln(2.0)),
                    };
                    FunctionSpec::RadialBump { alpha, c, d }
                })
                .collect();
            FunctionFamily::new(2, specs)
        }
        other => Err(Error::UnknownPreset(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sets(masks: &[SubsetMask]) -> Vec<Vec<usize>> {
        masks.iter().map(|m| m.one_based()).collect()
    }

    #[test]
    fn enumerate_four_choose_two() {
        let masks = enumerate_subsets(4, 2).unwrap();
        assert_eq!(
            sets(&masks),
            vec![vec![1, 2], vec![1, 3], vec![1, 4], vec![2, 3], vec![2, 4], vec![3, 4]]
        );
    }

    #[test]
    fn six_choose_three_complements_mirror() {
        let masks = enumerate_subsets(6, 3).unwrap();
        assert_eq!(masks.len(), 20);
        for tau in 0..20 {
            assert_eq!(masks[tau].complement(6), masks[19 - tau]);
        }
    }

    #[test]
    fn six_choose_two_endpoints() {
        let masks = enumerate_subsets(6, 2).unwrap();
        assert_eq!(masks.len(), 15);
        assert_eq!(masks[0].one_based(), vec![1, 2]);
        assert_eq!(masks[14].one_based(), vec![5, 6]);
    }

    #[test]
    fn stratum_range_is_checked() {
        assert!(matches!(enumerate_subsets(6, 0), Err(Error::InvalidStratum { .. })));
        assert!(matches!(enumerate_subsets(6, 4), Err(Error::InvalidStratum { .. })));
        assert!(matches!(enumerate_subsets(5, 3), Err(Error::InvalidStratum { .. })));
    }

    #[test]
    fn dedup_halves_only_at_half_n() {
        assert_eq!(dedup_for_loci(&enumerate_subsets(6, 3).unwrap(), 6).len(), 10);
        assert_eq!(dedup_for_loci(&enumerate_subsets(6, 2).unwrap(), 6).len(), 15);
        let kept = dedup_for_loci(&enumerate_subsets(4, 2).unwrap(), 4);
        assert_eq!(sets(&kept), vec![vec![1, 2], vec![1, 3], vec![1, 4]]);
    }

    #[test]
    fn evaluate_examples() {
        let tri = preset("triangle").unwrap();
        assert_eq!(tri.value(1, &[3.0, -1.0]), 3.0);
        let fig4 = preset("fig4").unwrap();
        assert!((fig4.value(4, &[0.0, 0.0]) - 11f64.ln()).abs() < 1e-15);
        let bump = preset("bump10").unwrap();
        assert!((bump.value(0, &[3.0, 0.0]) - 8f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn bump_is_continuous_at_threshold() {
        let bump = preset("bump10").unwrap();
        for alpha in 0..10 {
            let r = bump_radius(alpha + 1);
            let inner = bump.value(alpha, &[r - 1e-9, 0.0]);
            let outer = bump.value(alpha, &[r + 1e-9, 0.0]);
            assert!(inner.abs() < 1e-12 && outer.abs() < 1e-12, "{inner} {outer}");
        }
    }

    #[test]
    fn warnings() {
        assert!(validate_family(&preset("triangle").unwrap()).is_empty());
        let dup = FunctionFamily::linear(2, &[(0.0, vec![1.0, 0.0]), (0.0, vec![1.0, 0.0]), (0.0, vec![0.0, 1.0])])
            .unwrap();
        assert_eq!(validate_family(&dup), vec![FamilyWarning::DuplicateLinearForm(0, 1)]);
        let two = FunctionFamily::linear(1, &[(0.0, vec![1.0]), (1.0, vec![0.0])]).unwrap();
        assert_eq!(validate_family(&two), vec![FamilyWarning::FewTerms(2)]);
    }

    #[test]
    fn model_json_round_trip_and_limits() {
        let fam = preset("poly6").unwrap();
        let back = FunctionFamily::from_json_str(&fam.to_json_string()).unwrap();
        assert_eq!(fam, back);

        let text = r#"{"n":1,"functions":[{"kind":"linear","b":0,"a":[1]},{"kind":"polynomial","terms":[{"c":1,"e":[13]}]}]}"#;
        assert!(matches!(FunctionFamily::from_json_str(text), Err(Error::Json(_))));

        let specs = vec![FunctionSpec::Linear { b: 0.0, a: vec![1.0] }; 25];
        assert!(matches!(FunctionFamily::new(1, specs), Err(Error::ModelTooLarge(_))));
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(6, 2), 15);
        assert_eq!(binomial(10, 4), 210);
        assert_eq!(binomial(24, 12), 2_704_156);
        assert_eq!(binomial(3, 5), 0);
    }

    #[test]
    fn every_preset_loads() {
        for (name, _) in PRESETS {
            preset(name).unwrap();
        }
        assert!(matches!(preset("nope"), Err(Error::UnknownPreset(_))));
    }
}
