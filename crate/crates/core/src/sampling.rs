//! Reproducible quasi-random sample points: a shifted Halton sequence plus
//! points pushed close to stratum loci.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eval::{log_gap_from_exponents, sign_with_tol};
use crate::model::{k_subsets, FunctionFamily, SubsetMask};

const PRIMES: [u32; 8] = [2, 3, 5, 7, 11, 13, 17, 19];
const LINE_STEPS: usize = 96;
const SEARCH_TRIES: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleConfig {
    pub seed: u64,
    pub count: usize,
    pub bbox: Vec<(f64, f64)>,
    /// Share of samples moved next to a locus.
    pub near_fraction: f64,
    /// Jitter radius around located locus points.
    pub near_radius: f64,
}

impl SampleConfig {
    /// Jitter radius of two cells of a 401-node grid over the bbox.
    pub fn new(seed: u64, count: usize, bbox: Vec<(f64, f64)>) -> Self {
        let width = bbox.iter().map(|(lo, hi)| hi - lo).fold(f64::INFINITY, f64::min);
        SampleConfig { seed, count, bbox, near_fraction: 0.25, near_radius: 2.0 * width / 400.0 }
    }
}

pub fn radical_inverse(mut i: u64, base: u32) -> f64 {
    let b = base as f64;
    let (mut inv, mut f) = (0.0, 1.0 / b);
    while i > 0 {
        inv += f * (i % base as u64) as f64;
        i /= base as u64;
        f /= b;
    }
    inv
}

fn sample_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64 + 1);
    rng
}

/// Halton points with a seeded Cranley-Patterson rotation, scaled into the bbox.
pub fn halton_points(seed: u64, count: usize, bbox: &[(f64, f64)]) -> Vec<Vec<f64>> {
    assert!(bbox.len() <= PRIMES.len(), "at most {} dimensions", PRIMES.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift: Vec<f64> = bbox.iter().map(|_| rng.random::<f64>()).collect();
    (0..count)
        .map(|i| {
            bbox.iter()
                .enumerate()
                .map(|(d, &(lo, hi))| {
                    let u = (radical_inverse(i as u64 + 1, PRIMES[d]) + shift[d]).fract();
                    lo + u * (hi - lo)
                })
                .collect()
        })
        .collect()
}

/// Quasi-random points, a share of them relocated next to a zero of some
/// `Z_k(I)` for a stratum `k` drawn from `strata`. A point whose search
/// finds no zero keeps its quasi-random position.
pub fn sample_points(family: &FunctionFamily, strata: &[usize], cfg: &SampleConfig) -> Vec<Vec<f64>> {
    let base = halton_points(cfg.seed, cfg.count, &cfg.bbox);
    let masks: Vec<Vec<SubsetMask>> = strata.iter().map(|&k| k_subsets(family.len(), k)).collect();
    base.into_par_iter()
        .enumerate()
        .map(|(i, p)| {
            let mut rng = sample_rng(cfg.seed, i);
            if strata.is_empty() || rng.random::<f64>() >= cfg.near_fraction {
                return p;
            }
            let which = rng.random_range(0..strata.len());
            near_locus(family, &masks[which], &p, cfg, &mut rng).unwrap_or(p)
        })
        .collect()
}

fn random_direction(dim: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let n2: f64 = v.iter().map(|x| x * x).sum();
        if n2 > 1e-6 && n2 <= 1.0 {
            let n = n2.sqrt();
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

fn clamp_into(p: &mut [f64], bbox: &[(f64, f64)]) {
    for (x, &(lo, hi)) in p.iter_mut().zip(bbox) {
        *x = x.clamp(lo, hi);
    }
}

/// Walks from `start` along random directions until the gap of a randomly
/// chosen mask changes sign, then bisects onto the zero and jitters.
fn near_locus(
    family: &FunctionFamily,
    masks: &[SubsetMask],
    start: &[f64],
    cfg: &SampleConfig,
    rng: &mut ChaCha8Rng,
) -> Option<Vec<f64>> {
    let dim = start.len();
    let diag = cfg.bbox.iter().map(|(lo, hi)| (hi - lo).powi(2)).sum::<f64>().sqrt();
    let step = diag / LINE_STEPS as f64;
    let mut buf = vec![0.0; family.len()];
    let mut gap = |x: &[f64], m: SubsetMask| {
        family.exponents_into(x, &mut buf);
        log_gap_from_exponents(&buf, m)
    };
    for _ in 0..SEARCH_TRIES {
        let mask = masks[rng.random_range(0..masks.len())];
        let dir = random_direction(dim, rng);
        let g0 = gap(start, mask);
        for sense in [1.0, -1.0] {
            let at = |t: f64| -> Vec<f64> { start.iter().zip(&dir).map(|(s, d)| s + sense * t * d).collect() };
            let mut prev_t = 0.0;
            for s in 1..=LINE_STEPS {
                let t = s as f64 * step;
                let x = at(t);
                if !x.iter().zip(&cfg.bbox).all(|(v, &(lo, hi))| *v >= lo && *v <= hi) {
                    break;
                }
                if sign_with_tol(gap(&x, mask), 0.0) != sign_with_tol(g0, 0.0) {
                    let (mut a, mut b) = (prev_t, t);
                    for _ in 0..60 {
                        let m = 0.5 * (a + b);
                        if (gap(&at(m), mask) > 0.0) == (g0 > 0.0) {
                            a = m;
                        } else {
                            b = m;
                        }
                    }
                    let mut p = at(0.5 * (a + b));
                    let jitter = random_direction(dim, rng);
                    let r = cfg.near_radius * rng.random::<f64>();
                    for (x, j) in p.iter_mut().zip(jitter) {
                        *x += r * j;
                    }
                    clamp_into(&mut p, &cfg.bbox);
                    return Some(p);
                }
                prev_t = t;
            }
        }
    }
    None
}
