//! Command-line front end.

use std::ffi::OsString;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::eval::DEFAULT_TOL;
use crate::export;
use crate::grid::GridSpec;
use crate::loci::{detect_pairwise_intersections, extract_zero_locus, sample_zero_points, stratum_loci};
use crate::model::{preset, validate_family, FunctionFamily, SubsetMask, PRESETS};
use crate::polygon::build_closed_polygon;
use crate::regions::{classify_grid, label_subdomains, spin_thermodynamics, SpinWeighting};
use crate::tropical::{check_unbounded, skeleton_2d_masked, TropicalKind};
use crate::verify::{run_verify, tropical_masks, NegRule, VerifyConfig};

/// Worker cap read from the environment; `0` or unset means automatic.
pub const THREADS_ENV: &str = "STATAMOEBA_THREADS";

#[derive(Debug, Parser)]
#[command(name = "statamoeba", version, about = "Strata, statistical amoebas and tropical limits of signed exponential sums")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify grid cells into POS, NEG, ZCD subdomains and BOUNDARY.
    Classify(ClassifyArgs),
    /// Zero locus of a single Z_k(I).
    Contour(ContourArgs),
    /// Every zero locus of one stratum, one file per visible subset.
    Strata(StrataArgs),
    /// Tropical skeleton of a linear family.
    Tropical(TropicalArgs),
    /// Closed polygon from side lengths.
    Polygon(PolygonArgs),
    /// Spin-system energies and partition function over the labeled domains.
    Spin(SpinArgs),
    /// Run the property suite and write a JSON report.
    Verify(VerifyArgs),
    /// List the built-in families.
    Presets,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct ModelSource {
    /// Built-in family name.
    #[arg(long)]
    pub preset: Option<String>,
    /// JSON model file.
    #[arg(long)]
    pub model: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// Axis ranges `lo:hi[,lo:hi...]`; a single range is used for every axis.
    #[arg(long, allow_hyphen_values = true)]
    pub bbox: Option<String>,
    /// Nodes per axis, one value or one per axis.
    #[arg(long, default_value = "401")]
    pub res: String,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub model: ModelSource,
    #[arg(long)]
    pub k: usize,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ContourArgs {
    #[command(flatten)]
    pub model: ModelSource,
    /// 1-based term indices, e.g. `1,3`.
    #[arg(long)]
    pub subset: String,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct StrataArgs {
    #[command(flatten)]
    pub model: ModelSource,
    #[arg(long)]
    pub k: usize,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Intersection search radius in cells.
    #[arg(long, default_value_t = 2.0)]
    pub radius: f64,
}

#[derive(Debug, Args)]
pub struct TropicalArgs {
    #[command(flatten)]
    pub model: ModelSource,
    /// Keep the constants b_a in the limit forms.
    #[arg(long)]
    pub constants: bool,
    /// 1-based variables dropped from the limit forms, e.g. `2`.
    #[arg(long)]
    pub cylindrical: Option<String>,
    /// Strata for the membership CSV, e.g. `1,2,3`.
    #[arg(long)]
    pub k: Option<String>,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Include the unboundedness report in the JSON output.
    #[arg(long)]
    pub check_unbounded: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct PolygonArgs {
    /// Comma-separated side lengths.
    #[arg(long)]
    pub lengths: String,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SpinArgs {
    #[command(flatten)]
    pub model: ModelSource,
    #[arg(long)]
    pub k: usize,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    /// External field H.
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub field: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub gamma: f64,
    /// Weight states by exp(-beta E) instead of exp(-beta H sum S).
    #[arg(long)]
    pub boltzmann: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NegRuleArg {
    Count,
    ObservedMax,
    /// Observed maximum when chain violations are expected, else count.
    Auto,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub model: ModelSource,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Sampling box; `-8:8` on every axis by default.
    #[arg(long, allow_hyphen_values = true)]
    pub bbox: Option<String>,
    /// Grid resolution for the grid-based checks.
    #[arg(long, default_value_t = 201)]
    pub res: usize,
    #[arg(long, default_value_t = 200)]
    pub rays: usize,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    /// Checks expected to fail (`chains` covers both chain checks).
    #[arg(long, value_delimiter = ',')]
    pub expect_violation: Vec<String>,
    #[arg(long, value_enum, default_value = "auto")]
    pub neg_rule: NegRuleArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Failure of a run: a bad request (exit 2) or a failed check (exit 1).
#[derive(Debug)]
enum Failure {
    Usage(Error),
    Check,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e)
    }
}

fn load_family(src: &ModelSource) -> Result<FunctionFamily> {
    let family = match (&src.preset, &src.model) {
        (Some(name), _) => preset(name)?,
        (None, Some(path)) => FunctionFamily::load(path)?,
        (None, None) => unreachable!("clap enforces one model source"),
    };
    for w in validate_family(&family) {
        eprintln!("warning: {w}");
    }
    Ok(family)
}

fn bbox_for(spec: Option<&str>, dim: usize, default: &str) -> String {
    let spec = spec.unwrap_or(default);
    if dim > 1 && !spec.contains(',') {
        vec![spec; dim].join(",")
    } else {
        spec.to_string()
    }
}

fn grid_for(args: &GridArgs, dim: usize) -> Result<GridSpec> {
    let grid = GridSpec::parse(&bbox_for(args.bbox.as_deref(), dim, "-6:6"), &args.res)?;
    if grid.dim() != dim {
        return Err(Error::InvalidGrid(format!("bbox has {} axes, model has {dim}", grid.dim())));
    }
    Ok(grid)
}

fn parse_indices(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| p.trim().parse::<usize>().map_err(|_| Error::InvalidGrid(format!("cannot parse index list {s:?}"))))
        .collect()
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            fs::write(path, text)?;
        }
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn format_or(output: &OutputArgs, default: Format) -> Format {
    output.format.unwrap_or(default)
}

fn unsupported(what: &str, f: Format) -> Error {
    Error::InvalidGrid(format!("{what} cannot be written as {f:?}"))
}

fn classify(a: &ClassifyArgs) -> std::result::Result<(), Failure> {
    let family = load_family(&a.model)?;
    let grid = grid_for(&a.grid, family.dim())?;
    let map = label_subdomains(classify_grid(&family, a.k, &grid, a.tol)?);
    let text = match format_or(&a.output, Format::Csv) {
        Format::Csv => export::region_csv(&map),
        Format::Json => export::region_summary_json(&map)?,
        Format::Svg => export::region_svg(&map).ok_or_else(|| unsupported("a region map of this dimension", Format::Svg))?,
    };
    emit(a.output.out.as_deref(), &text)?;
    Ok(())
}

fn contour(a: &ContourArgs) -> std::result::Result<(), Failure> {
    let family = load_family(&a.model)?;
    let grid = grid_for(&a.grid, family.dim())?;
    let subset = SubsetMask::from_one_based(&parse_indices(&a.subset)?)?;
    let text = if family.dim() == 3 {
        match format_or(&a.output, Format::Csv) {
            Format::Csv => export::points_csv(&[(subset, sample_zero_points(&family, subset, &grid)?)]),
            f => return Err(unsupported("a 3D point cloud", f).into()),
        }
    } else {
        let set = extract_zero_locus(&family, subset, &grid)?;
        match format_or(&a.output, Format::Json) {
            Format::Json => export::contours_json(std::slice::from_ref(&set))?,
            Format::Svg => export::contours_svg(std::slice::from_ref(&set), &grid.bbox),
            Format::Csv => return Err(unsupported("a contour", Format::Csv).into()),
        }
    };
    emit(a.output.out.as_deref(), &text)?;
    Ok(())
}

fn file_stem(k: usize, m: SubsetMask) -> String {
    let parts: Vec<String> = m.one_based().iter().map(|i| i.to_string()).collect();
    format!("locus_k{k}_{}", parts.join("_"))
}

fn strata(a: &StrataArgs) -> std::result::Result<(), Failure> {
    let family = load_family(&a.model)?;
    let grid = grid_for(&a.grid, family.dim())?;
    fs::create_dir_all(&a.out).map_err(Error::from)?;
    let mut files: Vec<(PathBuf, String)> = Vec::new();
    let summary = if family.dim() == 3 {
        let subsets = crate::model::dedup_for_loci(&crate::model::enumerate_subsets(family.len(), a.k)?, family.len());
        let mut visible = Vec::new();
        let mut empty = Vec::new();
        for m in subsets {
            let pts = sample_zero_points(&family, m, &grid)?;
            if pts.is_empty() {
                empty.push(m);
            } else {
                files.push((a.out.join(format!("{}.csv", file_stem(a.k, m))), export::points_csv(&[(m, pts)])));
                visible.push(m);
            }
        }
        serde_json::json!({ "k": a.k, "grid": grid, "visible": visible, "empty": empty })
    } else {
        let loci = stratum_loci(&family, a.k, &grid)?;
        let format = a.format.unwrap_or(Format::Json);
        for set in loci.sets.iter().filter(|s| !s.empty) {
            let one = std::slice::from_ref(set);
            let (ext, text) = match format {
                Format::Json => ("json", export::contours_json(one)?),
                Format::Svg => ("svg", export::contours_svg(one, &grid.bbox)),
                Format::Csv => return Err(unsupported("a contour", Format::Csv).into()),
            };
            files.push((a.out.join(format!("{}.{ext}", file_stem(a.k, set.subset))), text));
        }
        let radius = a.radius * grid.cell_size();
        let hits = detect_pairwise_intersections(&family, &loci.sets, radius);
        serde_json::json!({
            "k": a.k,
            "grid": grid,
            "visible": loci.visible_subsets(),
            "empty": loci.empty_subsets(),
            "intersection_radius": radius,
            "intersections": hits,
        })
    };
    files.push((a.out.join(format!("strata_k{}_summary.json", a.k)), export::to_json(&summary)?));
    for (path, text) in files {
        emit(Some(&path), &text)?;
    }
    Ok(())
}

fn tropical(a: &TropicalArgs) -> std::result::Result<(), Failure> {
    let family = load_family(&a.model)?;
    let kind = if a.constants { TropicalKind::Affine } else { TropicalKind::Homogeneous };
    let mut drop = vec![false; family.dim()];
    if let Some(spec) = &a.cylindrical {
        for i in parse_indices(spec)? {
            if i == 0 || i > drop.len() {
                return Err(Error::InvalidGrid(format!("variable {i} out of range 1..={}", drop.len())).into());
            }
            drop[i - 1] = true;
        }
    }
    let grid = grid_for(&a.grid, family.dim())?;
    let skel = skeleton_2d_masked(&family, kind, &drop)?;
    let text = match format_or(&a.output, Format::Json) {
        Format::Json if a.check_unbounded => {
            let report = check_unbounded(&skel, &grid)?;
            let clipped: Vec<_> = skel.pieces.iter().filter_map(|p| p.clip(&grid.bbox)).collect();
            export::to_json(&serde_json::json!({ "skeleton": skel, "clipped": clipped, "unbounded": report }))?
        }
        Format::Json => export::skeleton_json(&skel, &grid.bbox)?,
        Format::Svg => export::skeleton_svg(&skel, &grid.bbox),
        Format::Csv => {
            let strata = match &a.k {
                Some(spec) => parse_indices(spec)?,
                None => (1..=family.len() / 2).collect(),
            };
            export::membership_csv(&tropical_masks(&family, &strata, &grid, crate::tropical::TIE_TOL)?, &grid)
        }
    };
    emit(a.output.out.as_deref(), &text)?;
    Ok(())
}

fn polygon(a: &PolygonArgs) -> std::result::Result<(), Failure> {
    let lengths = a
        .lengths
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|_| Error::InvalidLengths(format!("cannot parse {p:?}"))))
        .collect::<Result<Vec<_>>>()?;
    let poly = build_closed_polygon(&lengths, a.tol)?;
    let text = match format_or(&a.output, Format::Json) {
        Format::Json => export::polygon_json(&poly)?,
        Format::Svg => export::polygon_svg(&poly),
        Format::Csv => return Err(unsupported("a polygon", Format::Csv).into()),
    };
    emit(a.output.out.as_deref(), &text)?;
    Ok(())
}

fn spin(a: &SpinArgs) -> std::result::Result<(), Failure> {
    let family = load_family(&a.model)?;
    let grid = grid_for(&a.grid, family.dim())?;
    let map = label_subdomains(classify_grid(&family, a.k, &grid, a.tol)?);
    let weighting = if a.boltzmann { SpinWeighting::Boltzmann } else { SpinWeighting::AsPrinted };
    let thermo = spin_thermodynamics(&map, a.beta, a.field, a.gamma, weighting)?;
    emit(a.out.as_deref(), &export::to_json(&thermo)?)?;
    Ok(())
}

fn verify(a: &VerifyArgs) -> std::result::Result<(), Failure> {
    let family = load_family(&a.model)?;
    let bbox = bbox_for(a.bbox.as_deref(), family.dim(), "-8:8");
    let grid = GridSpec::parse(&bbox, &a.res.to_string())?;
    if grid.dim() != family.dim() {
        return Err(Error::InvalidGrid(format!("bbox has {} axes, model has {}", grid.dim(), family.dim())).into());
    }
    let mut cfg = VerifyConfig::new(a.seed, a.samples, grid.bbox);
    cfg.tol = a.tol;
    cfg.res = a.res;
    cfg.rays = a.rays;
    cfg.expect_violation = a.expect_violation.iter().map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
    cfg.neg_rule = match a.neg_rule {
        NegRuleArg::Count => NegRule::Count,
        NegRuleArg::ObservedMax => NegRule::ObservedMax,
        NegRuleArg::Auto => {
            if cfg.expect_violation.iter().any(|e| e == "chains" || e == "chain_neg") {
                NegRule::ObservedMax
            } else {
                NegRule::Count
            }
        }
    };
    let report = run_verify(&family, &cfg)?;
    emit(a.out.as_deref(), &export::to_json(&report)?)?;
    for s in &report.sections {
        let status = if s.pass { "pass" } else { "FAIL" };
        let mode = if s.expect_violation { " (expect violation)" } else { "" };
        eprintln!("{status} {}{mode}: {} violations in {} samples", s.name, s.violations, s.samples);
    }
    if report.pass {
        Ok(())
    } else {
        Err(Failure::Check)
    }
}

fn presets() -> std::result::Result<(), Failure> {
    let mut text = String::new();
    for (name, about) in PRESETS {
        text.push_str(&format!("{name:<12} {about}\n"));
    }
    emit(None, &text)?;
    Ok(())
}

fn threads_from_env() -> usize {
    std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse().ok()).unwrap_or(0)
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let outcome = crate::with_threads(threads_from_env(), || match &cli.command {
        Command::Classify(a) => classify(a),
        Command::Contour(a) => contour(a),
        Command::Strata(a) => strata(a),
        Command::Tropical(a) => tropical(a),
        Command::Polygon(a) => polygon(a),
        Command::Spin(a) => spin(a),
        Command::Verify(a) => verify(a),
        Command::Presets => presets(),
    });
    match outcome {
        Ok(()) => 0,
        Err(Failure::Check) => 1,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e}");
            2
        }
    }
}
