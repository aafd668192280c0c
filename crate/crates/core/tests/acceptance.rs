//! Acceptance checks, one line per criterion. Exits non-zero if any fails.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statamoeba::eval::PointExponents;
use statamoeba::export;
use statamoeba::grid::GridSpec;
use statamoeba::loci::{detect_pairwise_intersections, min_distance, stratum_loci};
use statamoeba::model::{k_subsets, LINEAR_PRESETS, PRESETS};
use statamoeba::polygon::{build_closed_polygon, lopsided_index, Lopsidedness};
use statamoeba::regions::{classify_grid, label_subdomains};
use statamoeba::sampling::{sample_points, SampleConfig};
use statamoeba::tropical::{check_unbounded, skeleton_2d, TropicalKind};
use statamoeba::verify::{
    check_algebraic_identities, check_constructibility, check_inclusion_and_counts, check_tropical_coincidence,
    ray_escape_test, run_verify, CheckSection, NegRule, VerifyConfig,
};
use statamoeba::{preset, sign_vector, with_threads, Error, FunctionFamily, DEFAULT_TOL};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn err(e: Error) -> String {
    e.to_string()
}

fn square(half: f64, res: usize) -> GridSpec {
    GridSpec::cube(2, -half, half, res).unwrap()
}

fn two_d_linear() -> Vec<(&'static str, FunctionFamily)> {
    LINEAR_PRESETS.iter().map(|&n| (n, preset(n).unwrap())).filter(|(_, f)| f.dim() == 2).collect()
}

fn timed(limit: Duration, what: &str, f: impl FnOnce() -> Outcome) -> Outcome {
    let t = Instant::now();
    let out = f()?;
    let dt = t.elapsed();
    ensure(dt < limit, format!("{what} took {dt:.2?}, limit {limit:?}"))?;
    Ok(format!("{out} [{dt:.2?}]"))
}

fn visible_curve_counts() -> Outcome {
    let grid = square(10.0, 801);
    let mut notes = Vec::new();
    let expect: [(&str, &[usize]); 3] =
        [("fig4", &[1, 2, 3, 5, 6]), ("symmetric6", &[1, 2, 3, 4, 5, 6]), ("degenerate6", &[1, 6])];
    for (name, visible) in expect {
        let f = preset(name).unwrap();
        let note = timed(Duration::from_secs(10), name, || {
            let loci = stratum_loci(&f, 1, &grid).map_err(err)?;
            let got: Vec<usize> = loci.visible_subsets().iter().map(|m| m.one_based()[0]).collect();
            ensure(got == visible, format!("{name}: visible {got:?}, expected {visible:?}"))?;
            Ok(format!("{name} visible {got:?}"))
        })?;
        notes.push(note);
    }
    Ok(notes.join("; "))
}

fn bisect(mut lo: f64, mut hi: f64, g: impl Fn(f64) -> f64) -> f64 {
    for _ in 0..200 {
        let m = 0.5 * (lo + hi);
        if (g(m) > 0.0) == (g(hi) > 0.0) {
            hi = m;
        } else {
            lo = m;
        }
    }
    0.5 * (lo + hi)
}

fn degenerate_geometry() -> Outcome {
    let chi = bisect(0.0, 1.0, |c| (1..=5).map(|a| c.powi(a)).sum::<f64>() - 1.0);
    ensure((chi - 0.5087).abs() < 1e-4, format!("chi = {chi}"))?;
    let f = preset("degenerate6").unwrap();
    let loci = stratum_loci(&f, 1, &square(10.0, 801)).map_err(err)?;
    let six = loci.sets.iter().find(|s| s.subset.one_based() == [6]).ok_or("no {6} locus")?;
    ensure(!six.empty, "{6} locus empty")?;
    // line through (-ln chi, 0) with slope 1: y = x + ln chi
    let dev = six
        .polylines
        .iter()
        .flat_map(|p| &p.points)
        .map(|p| (p[1] - p[0] - chi.ln()).abs() / 2f64.sqrt())
        .fold(0.0, f64::max);
    ensure(dev < 1e-3, format!("max deviation {dev:e}"))?;
    Ok(format!("chi = {chi:.6}, {} vertices, max deviation {dev:.2e}", six.vertex_count()))
}

fn disjointness() -> Outcome {
    let grid = square(10.0, 801);
    let radius = 2.0 * grid.cell_size();
    let mut notes = Vec::new();
    for (name, f) in two_d_linear().into_iter().filter(|(_, f)| f.len() >= 3) {
        let loci = stratum_loci(&f, 1, &grid).map_err(err)?;
        let hits = detect_pairwise_intersections(&f, &loci.sets, radius);
        ensure(hits.is_empty(), format!("{name}: {} k=1 pairs reported, first {:?}", hits.len(), hits.first()))?;
        let visible: Vec<_> = loci.sets.iter().filter(|s| !s.empty).collect();
        let raw = visible
            .iter()
            .enumerate()
            .flat_map(|(i, a)| visible[i + 1..].iter().map(move |b| min_distance(a, b)))
            .fold(f64::INFINITY, f64::min);
        notes.push(format!("{name} min gap {raw:.1e}"));
    }
    let f = preset("fig4").unwrap();
    let loci = stratum_loci(&f, 2, &grid).map_err(err)?;
    let hits = detect_pairwise_intersections(&f, &loci.sets, radius);
    ensure(!hits.is_empty(), "fig4 k=2: no intersection found")?;
    for h in &hits {
        ensure(h.a.intersects(h.b), format!("fig4 k=2: disjoint masks {} {} intersect", h.a, h.b))?;
    }
    Ok(format!("k=1 no pairs within 2 cells ({}); fig4 k=2 {} intersecting pairs, all overlapping", notes.join(", "), hits.len()))
}

fn golden_sign_vector() -> Outcome {
    let f = preset("fig4").unwrap();
    let v = sign_vector(&f, 2, &[2.0, -2.0], DEFAULT_TOL).map_err(err)?;
    let expect = [-1, 1, 1, 1, 1, -1, -1, -1, -1, 1, 1, 1, 1, 1, 1];
    ensure(v.entries == expect, format!("got {:?}", v.entries))?;
    Ok(format!("{:?}", v.entries))
}

fn sample_cfg(f: &FunctionFamily, samples: usize, half: f64) -> VerifyConfig {
    VerifyConfig::new(1, samples, vec![(-half, half); f.dim()])
}

fn section<'a>(sections: &'a [CheckSection], name: &str) -> Option<&'a CheckSection> {
    sections.iter().find(|s| s.name == name)
}

fn ekr_and_half_count() -> Outcome {
    timed(Duration::from_secs(60), "all presets", || {
        let mut total = 0;
        for (name, _) in PRESETS {
            let f = preset(name).unwrap();
            let strata: Vec<usize> = (1..=f.len() / 2).collect();
            let sections = check_inclusion_and_counts(&f, &strata, &sample_cfg(&f, 100_000, 8.0)).map_err(err)?;
            for check in ["ekr_bound", "intersecting_family", "half_stratum_count"] {
                if let Some(s) = section(&sections, check) {
                    ensure(s.violations == 0, format!("{name} {check}: {} violations, e.g. {:?}", s.violations, s.witnesses.first()))?;
                }
            }
            total += 100_000;
        }
        Ok(format!("{total} samples over {} presets, zero violations", PRESETS.len()))
    })
}

fn inclusion_chains() -> Outcome {
    let mut notes = Vec::new();
    for name in LINEAR_PRESETS {
        let f = preset(name).unwrap();
        if f.len() < 4 {
            continue;
        }
        let strata: Vec<usize> = (1..=f.len() / 2).collect();
        let sections = check_inclusion_and_counts(&f, &strata, &sample_cfg(&f, 10_000, 8.0)).map_err(err)?;
        for check in ["chain_pos", "chain_neg"] {
            let s = section(&sections, check).ok_or(format!("{name}: no {check}"))?;
            ensure(s.violations == 0, format!("{name} {check}: {} violations, e.g. {:?}", s.violations, s.witnesses.first()))?;
        }
        notes.push(name.to_string());
    }
    Ok(format!("zero violations on {}", notes.join(", ")))
}

fn bump_counterexample() -> Outcome {
    let f = preset("bump10").unwrap();
    let bbox = vec![(-5.0, 5.0); 2];
    let points = sample_points(&f, &[3, 4], &SampleConfig::new(1, 100_000, bbox.clone()));
    let masks3 = k_subsets(10, 3);
    let masks4 = k_subsets(10, 4);
    let mut spins: Vec<(f64, i64, i64)> = Vec::new();
    for x in &points {
        let p = PointExponents::new(&f, x);
        let v3 = p.sign_vector(3, &masks3, DEFAULT_TOL);
        let v4 = p.sign_vector(4, &masks4, DEFAULT_TOL);
        if v3.has_zero() || v4.has_zero() {
            continue;
        }
        spins.push((x[0].hypot(x[1]), v3.sum(), v4.sum()));
    }
    let min3 = spins.iter().map(|s| s.1).min().ok_or("no samples")?;
    let min4 = spins.iter().map(|s| s.2).min().unwrap();
    ensure(min3 == 104, format!("min S3 = {min3}"))?;
    ensure(min4 == 42, format!("min S4 = {min4}"))?;
    let far3 = spins.iter().filter(|s| s.1 == min3 && s.0 >= 2.0).count();
    let near4 = spins.iter().filter(|s| s.2 == min4 && s.0 <= 2.0).count();
    ensure(far3 == 0, format!("{far3} samples with S3 = 104 at |x| >= 2"))?;
    ensure(near4 == 0, format!("{near4} samples with S4 = 42 at |x| <= 2"))?;
    let n3 = spins.iter().filter(|s| s.1 == min3).count();
    let n4 = spins.iter().filter(|s| s.2 == min4).count();

    let mut cfg = VerifyConfig::new(1, 10_000, bbox);
    cfg.neg_rule = NegRule::ObservedMax;
    cfg.expect_violation = vec!["chains".into()];
    let sections = check_inclusion_and_counts(&f, &[3, 4], &cfg).map_err(err)?;
    let chain = section(&sections, "chain_neg").ok_or("no chain_neg")?;
    ensure(chain.violations >= 1 && chain.pass, format!("chain violations {}", chain.violations))?;
    for s in &sections {
        ensure(s.pass, format!("{} failed", s.name))?;
    }
    Ok(format!(
        "min S3 = 104 at {n3} samples all |x|<2, min S4 = 42 at {n4} samples all |x|>2; D3- not in D4-: {} witnesses",
        chain.violations
    ))
}

fn algebraic_identities() -> Outcome {
    for (name, _) in PRESETS {
        let f = preset(name).unwrap();
        for s in check_algebraic_identities(&f, &sample_cfg(&f, 1000, 6.0)).map_err(err)? {
            ensure(s.violations == 0, format!("{name} {}: {} violations, e.g. {:?}", s.name, s.violations, s.witnesses.first()))?;
        }
    }
    Ok(format!("counting, antisymmetry, power sum, nesting: zero violations on {} presets", PRESETS.len()))
}

fn hausdorff(a: &[[f64; 2]], b: &[[f64; 2]]) -> f64 {
    let one = |p: &[f64; 2], q: &[[f64; 2]]| q.iter().map(|r| (p[0] - r[0]).hypot(p[1] - r[1])).fold(f64::INFINITY, f64::min);
    let ab = a.iter().map(|p| one(p, b)).fold(0.0, f64::max);
    let ba = b.iter().map(|p| one(p, a)).fold(0.0, f64::max);
    ab.max(ba)
}

fn densify(segments: &[([f64; 2], [f64; 2])], step: f64) -> Vec<[f64; 2]> {
    let mut out = Vec::new();
    for &(a, b) in segments {
        let len = (b[0] - a[0]).hypot(b[1] - a[1]);
        let n = (len / step).ceil().max(1.0) as usize;
        for i in 0..=n {
            let t = i as f64 / n as f64;
            out.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
        }
    }
    out
}

fn tropical_coincidence() -> Outcome {
    let grid = square(6.0, 201);
    for name in ["fig4", "symmetric6"] {
        let s = check_tropical_coincidence(&preset(name).unwrap(), &[1, 2, 3], &grid, 1e-9).map_err(err)?;
        ensure(s.violations == 0, format!("{name}: {} violations, e.g. {:?}", s.violations, s.witnesses.first()))?;
    }
    let skel = skeleton_2d(&preset("triangle").unwrap(), TropicalKind::Affine).map_err(err)?;
    let clipped: Vec<_> = skel.pieces.iter().filter_map(|p| p.clip(&grid.bbox)).collect();
    // rays from the origin along -y, -x and the diagonal
    let rays = [([0.0, 0.0], [0.0, -6.0]), ([0.0, 0.0], [-6.0, 0.0]), ([0.0, 0.0], [6.0, 6.0])];
    let step = grid.cell_size() / 8.0;
    let h = hausdorff(&densify(&clipped, step), &densify(&rays, step));
    ensure(h <= grid.cell_size(), format!("triangle Hausdorff distance {h}"))?;
    Ok(format!("fig4, symmetric6 masks identical for k=1,2,3 and within one cell of the skeleton; triangle Hausdorff {h:.1e}"))
}

fn homogeneous_unbounded() -> Outcome {
    let grid = square(6.0, 201);
    let mut notes = Vec::new();
    for name in ["triangle", "symmetric6", "degenerate6"] {
        let skel = skeleton_2d(&preset(name).unwrap(), TropicalKind::Homogeneous).map_err(err)?;
        let r = check_unbounded(&skel, &grid).map_err(err)?;
        ensure(r.pieces_unbounded && r.components_unbounded, format!("{name}: {r:?}"))?;
        notes.push(format!("{name} {} pieces/{} regions", skel.pieces.len(), r.components.len()));
    }
    Ok(notes.join(", "))
}

fn polygons() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut built = 0;
    let mut worst: f64 = 0.0;
    while built < 1000 {
        let n = rng.random_range(3..=10);
        let lengths: Vec<f64> = (0..n).map(|_| rng.random_range(0.01..10.0)).collect();
        if lopsided_index(&lengths).map_err(err)? != Lopsidedness::Balanced {
            continue;
        }
        let poly = build_closed_polygon(&lengths, 1e-9).map_err(|e| format!("{lengths:?}: {e}"))?;
        ensure(poly.closure_error < 1e-9, format!("{lengths:?}: closure {}", poly.closure_error))?;
        let mut got = poly.side_lengths();
        let mut want = lengths.clone();
        got.sort_by(f64::total_cmp);
        want.sort_by(f64::total_cmp);
        for (g, w) in got.iter().zip(&want) {
            let rel = (g - w).abs() / w;
            worst = worst.max(rel);
            ensure(rel < 1e-9, format!("{lengths:?}: side {g} vs {w}"))?;
        }
        built += 1;
    }
    let mut rejected = 0;
    for _ in 0..1000 {
        let n = rng.random_range(3..=10);
        let mut lengths: Vec<f64> = (0..n).map(|_| rng.random_range(0.01..10.0)).collect();
        let rest: f64 = lengths.iter().sum();
        let i = rng.random_range(0..n);
        lengths[i] = rest + rng.random_range(0.01..5.0);
        ensure(
            matches!(build_closed_polygon(&lengths, 1e-9), Err(Error::Lopsided(j)) if j == i),
            format!("{lengths:?} not rejected at {i}"),
        )?;
        rejected += 1;
    }
    for (name, _) in PRESETS {
        let f = preset(name).unwrap();
        let strata: Vec<usize> = (1..=f.len() / 2).collect();
        let s = check_constructibility(&f, &strata, &sample_cfg(&f, 1000, 6.0)).map_err(err)?;
        ensure(s.violations == 0, format!("{name}: {} disagreements, e.g. {:?}", s.violations, s.witnesses.first()))?;
    }
    Ok(format!("{built} polygons closed (worst side error {worst:.1e}), {rejected} lopsided lists rejected, constructibility agrees on {} presets", PRESETS.len()))
}

fn ray_escape() -> Outcome {
    let f = preset("fig4").unwrap();
    let r = ray_escape_test(&f, 2, 1, 200, 1, &square(6.0, 401)).map_err(err)?;
    ensure(r.hit_fraction == 1.0, format!("hit fraction {} ({:?})", r.hit_fraction, r.section.witnesses.first()))?;
    ensure(r.exclusion_fraction < 0.1, format!("exclusion fraction {}", r.exclusion_fraction))?;
    Ok(format!("{}/{} non-excluded rays crossed, exclusion fraction {:.3}", r.hits, r.trials - r.excluded, r.exclusion_fraction))
}

fn artifacts() -> Vec<String> {
    let f = preset("fig4").unwrap();
    let map = label_subdomains(classify_grid(&f, 2, &square(6.0, 301), DEFAULT_TOL).unwrap());
    let mut cfg = VerifyConfig::new(5, 5000, vec![(-8.0, 8.0); 2]);
    cfg.rays = 50;
    let report = run_verify(&f, &cfg).unwrap();
    let loci = stratum_loci(&f, 1, &square(6.0, 301)).unwrap();
    vec![
        export::region_csv(&map),
        export::region_summary_json(&map).unwrap(),
        export::to_json(&report).unwrap(),
        export::contours_json(&loci.sets).unwrap(),
    ]
}

fn determinism() -> Outcome {
    let one = with_threads(1, artifacts);
    let auto = with_threads(0, artifacts);
    let four = with_threads(4, artifacts);
    let again = with_threads(0, artifacts);
    ensure(one == auto && auto == four && auto == again, "artifacts differ between runs")?;
    let bytes: usize = one.iter().map(|a| a.len()).sum();
    let auto_workers = with_threads(0, rayon::current_num_threads);
    Ok(format!("{} artifacts ({bytes} bytes) identical with 1, 4 and auto ({auto_workers}) workers", one.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 13] = [
        ("visible_curve_counts", visible_curve_counts),
        ("degenerate6_geometry", degenerate_geometry),
        ("first_stratum_disjointness", disjointness),
        ("golden_sign_vector", golden_sign_vector),
        ("ekr_bound_and_half_stratum_count", ekr_and_half_count),
        ("inclusion_chains", inclusion_chains),
        ("radial_bump_counterexample", bump_counterexample),
        ("algebraic_identities", algebraic_identities),
        ("tropical_coincidence", tropical_coincidence),
        ("homogeneous_unboundedness", homogeneous_unbounded),
        ("polygon_construction", polygons),
        ("ray_escape", ray_escape),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match std::panic::catch_unwind(check) {
            Ok(Ok(detail)) => println!("PASS {name}: {detail}"),
            Ok(Err(why)) => {
                failed += 1;
                println!("FAIL {name}: {why}");
            }
            Err(_) => {
                failed += 1;
                println!("FAIL {name}: panicked");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
