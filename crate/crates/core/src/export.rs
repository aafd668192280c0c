//! CSV, JSON and SVG artifacts. Every writer is a pure function of its input,
//! so identical inputs give byte-identical text.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::Result;
use crate::grid::GridSpec;
use crate::loci::ContourSet;
use crate::model::{binomial, SubsetMask};
use crate::polygon::Polygon;
use crate::regions::{CellClass, RegionMap};
use crate::tropical::TropicalSkeleton;
use crate::verify::CoincidenceMasks;

const POS_COLOR: &str = "#2a5cd6";
const NEG_COLOR: &str = "#ffffff";
const BOUNDARY_COLOR: &str = "#d62728";
const PALETTE: [&str; 10] =
    ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"];
const SVG_SIZE: f64 = 600.0;

fn subset_label(m: SubsetMask) -> String {
    m.one_based().iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" ")
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// One row per cell: centre, class, subdomain label, negative count and mean spin.
pub fn region_csv(map: &RegionMap) -> String {
    let dim = map.grid.dim();
    let mut out = String::new();
    out.push_str(["x", "y", "z"][..dim].join(",").as_str());
    out.push_str(",class,delta,neg_count,mean_spin\n");
    for cell in 0..map.grid.cell_count() {
        for c in map.grid.cell_center(cell) {
            write!(out, "{c},").unwrap();
        }
        let class = map.cell_class[cell];
        out.push_str(class.as_str());
        let delta = match (&map.components, class) {
            (Some(labels), CellClass::Zcd) => labels[cell].to_string(),
            _ => String::new(),
        };
        match map.cell_vector(cell) {
            Some(v) => writeln!(out, ",{delta},{},{}", v.neg_count, v.sum() as f64 / v.len() as f64).unwrap(),
            None => out.push_str(",,,\n"),
        }
    }
    out
}

#[derive(Debug, Serialize)]
struct ClassCounts {
    #[serde(rename = "POS")]
    pos: usize,
    #[serde(rename = "NEG")]
    neg: usize,
    #[serde(rename = "ZCD")]
    zcd: usize,
    #[serde(rename = "BOUNDARY")]
    boundary: usize,
}

#[derive(Debug, Serialize)]
struct SignEntry<'a> {
    id: usize,
    neg_count: usize,
    entries: &'a [i8],
}

#[derive(Debug, Serialize)]
struct Subdomain {
    delta: usize,
    sign_id: u32,
    cells: usize,
}

#[derive(Debug, Serialize)]
struct RegionSummary<'a> {
    k: usize,
    n_terms: usize,
    grid: &'a GridSpec,
    tol: f64,
    #[serde(rename = "M")]
    m: usize,
    counts: ClassCounts,
    subdomains: Vec<Subdomain>,
    sign_table: Vec<SignEntry<'a>>,
}

pub fn region_summary_json(map: &RegionMap) -> Result<String> {
    let mut sizes = vec![0usize; map.subdomain_count() + 1];
    if let Some(labels) = &map.components {
        for &l in labels {
            sizes[l as usize] += 1;
        }
    }
    let summary = RegionSummary {
        k: map.k,
        n_terms: map.n_terms,
        grid: &map.grid,
        tol: map.tol,
        m: map.subdomain_count(),
        counts: ClassCounts {
            pos: map.count(CellClass::Pos),
            neg: map.count(CellClass::Neg),
            zcd: map.count(CellClass::Zcd),
            boundary: map.count(CellClass::Boundary),
        },
        subdomains: map
            .subdomain_ids
            .iter()
            .enumerate()
            .map(|(i, &sign_id)| Subdomain { delta: i + 1, sign_id, cells: sizes[i + 1] })
            .collect(),
        sign_table: map
            .sign_table
            .iter()
            .enumerate()
            .map(|(id, v)| SignEntry { id, neg_count: v.neg_count, entries: &v.entries })
            .collect(),
    };
    to_json(&summary)
}

fn zcd_color(neg_count: usize, max: usize) -> String {
    // light grey for few negatives, dark grey near the maximum
    let t = if max == 0 { 0.0 } else { neg_count as f64 / max as f64 };
    let level = (225.0 - 175.0 * t).round() as u8;
    format!("#{level:02x}{level:02x}{level:02x}")
}

fn cell_color(map: &RegionMap, cell: usize, max_neg: usize) -> String {
    match map.cell_class[cell] {
        CellClass::Pos => POS_COLOR.to_string(),
        CellClass::Neg => NEG_COLOR.to_string(),
        CellClass::Boundary => BOUNDARY_COLOR.to_string(),
        CellClass::Zcd => zcd_color(map.cell_vector(cell).map_or(0, |v| v.neg_count), max_neg),
    }
}

/// Raster of a 2D region map, one pixel per cell, row runs merged.
pub fn region_svg(map: &RegionMap) -> Option<String> {
    if map.grid.dim() != 2 {
        return None;
    }
    let cells = map.grid.cells_per_axis();
    let (nx, ny) = (cells[0], cells[1]);
    let max_neg = binomial(map.n_terms - 1, map.k - 1) as usize;
    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {nx} {ny}" width="{SVG_SIZE}" height="{}" shape-rendering="crispEdges">"#,
        (SVG_SIZE * ny as f64 / nx as f64).round()
    )
    .unwrap();
    for j in 0..ny {
        let row = ny - 1 - j;
        let mut i = 0;
        while i < nx {
            let color = cell_color(map, map.grid.cell_index(&[i, j]), max_neg);
            let mut end = i + 1;
            while end < nx && cell_color(map, map.grid.cell_index(&[end, j]), max_neg) == color {
                end += 1;
            }
            writeln!(out, r#"<rect x="{i}" y="{row}" width="{}" height="1" fill="{color}"/>"#, end - i).unwrap();
            i = end;
        }
    }
    out.push_str("</svg>\n");
    Some(out)
}

#[derive(Debug, Serialize)]
struct ContourRecord<'a> {
    subset: SubsetMask,
    empty: bool,
    closed: Vec<bool>,
    polylines: Vec<&'a [[f64; 2]]>,
}

pub fn contours_json(sets: &[ContourSet]) -> Result<String> {
    let records: Vec<ContourRecord> = sets
        .iter()
        .map(|c| ContourRecord {
            subset: c.subset,
            empty: c.empty,
            closed: c.polylines.iter().map(|p| p.closed).collect(),
            polylines: c.polylines.iter().map(|p| p.points.as_slice()).collect(),
        })
        .collect();
    to_json(&records)
}

struct Frame {
    x0: f64,
    y1: f64,
    scale: f64,
    width: f64,
    height: f64,
}

impl Frame {
    fn new(bbox: &[(f64, f64)]) -> Self {
        let (wx, wy) = (bbox[0].1 - bbox[0].0, bbox[1].1 - bbox[1].0);
        let scale = SVG_SIZE / wx.max(wy);
        Frame { x0: bbox[0].0, y1: bbox[1].1, scale, width: wx * scale, height: wy * scale }
    }

    fn map(&self, p: [f64; 2]) -> (f64, f64) {
        (((p[0] - self.x0) * self.scale * 100.0).round() / 100.0, ((self.y1 - p[1]) * self.scale * 100.0).round() / 100.0)
    }

    fn open(&self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {w} {h}\" width=\"{w}\" height=\"{h}\">\n<rect width=\"{w}\" height=\"{h}\" fill=\"#ffffff\"/>\n",
            w = self.width,
            h = self.height
        )
    }

    fn path(&self, points: &[[f64; 2]], closed: bool) -> String {
        let mut d = String::new();
        for (i, &p) in points.iter().enumerate() {
            let (x, y) = self.map(p);
            write!(d, "{}{x} {y}", if i == 0 { "M" } else { " L" }).unwrap();
        }
        if closed {
            d.push_str(" Z");
        }
        d
    }
}

/// Overlay of 2D contour sets, one colour per subset.
pub fn contours_svg(sets: &[ContourSet], bbox: &[(f64, f64)]) -> String {
    let frame = Frame::new(bbox);
    let mut out = frame.open();
    for (i, c) in sets.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        writeln!(out, r#"<g stroke="{color}" fill="none" stroke-width="1.5"><title>{}</title>"#, c.subset).unwrap();
        for p in &c.polylines {
            writeln!(out, r#"<path d="{}"/>"#, frame.path(&p.points, p.closed)).unwrap();
        }
        out.push_str("</g>\n");
    }
    out.push_str("</svg>\n");
    out
}

pub fn points_csv(clouds: &[(SubsetMask, Vec<[f64; 3]>)]) -> String {
    let mut out = String::from("x,y,z,subset\n");
    for (m, pts) in clouds {
        let label = subset_label(*m);
        for p in pts {
            writeln!(out, "{},{},{},{label}", p[0], p[1], p[2]).unwrap();
        }
    }
    out
}

#[derive(Debug, Serialize)]
struct SkeletonExport<'a> {
    skeleton: &'a TropicalSkeleton,
    bbox: &'a [(f64, f64)],
    clipped: Vec<[[f64; 2]; 2]>,
}

pub fn skeleton_json(skel: &TropicalSkeleton, bbox: &[(f64, f64)]) -> Result<String> {
    let clipped = skel.pieces.iter().filter_map(|p| p.clip(bbox)).map(|(a, b)| [a, b]).collect();
    to_json(&SkeletonExport { skeleton: skel, bbox, clipped })
}

pub fn skeleton_svg(skel: &TropicalSkeleton, bbox: &[(f64, f64)]) -> String {
    let frame = Frame::new(bbox);
    let mut out = frame.open();
    out.push_str("<g stroke=\"#000000\" fill=\"none\" stroke-width=\"2\">\n");
    for piece in &skel.pieces {
        if let Some((a, b)) = piece.clip(bbox) {
            writeln!(out, r#"<path d="{}"/>"#, frame.path(&[a, b], false)).unwrap();
        }
    }
    out.push_str("</g>\n</svg>\n");
    out
}

/// Per cell: centre, skeleton proximity and tropical membership per stratum (0/1).
pub fn membership_csv(masks: &CoincidenceMasks, grid: &GridSpec) -> String {
    let mut out = String::from("x,y,skeleton");
    for k in &masks.strata {
        write!(out, ",k{k}").unwrap();
    }
    out.push('\n');
    for cell in 0..grid.cell_count() {
        let c = grid.cell_center(cell);
        write!(out, "{},{},{}", c[0], c[1], u8::from(masks.skeleton_cells[cell])).unwrap();
        for m in &masks.cell_masks {
            write!(out, ",{}", u8::from(m[cell])).unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn polygon_json(poly: &Polygon) -> Result<String> {
    to_json(poly)
}

pub fn polygon_svg(poly: &Polygon) -> String {
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for v in &poly.vertices {
        for a in 0..2 {
            lo[a] = lo[a].min(v[a]);
            hi[a] = hi[a].max(v[a]);
        }
    }
    let pad = 0.05 * (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-9);
    let bbox = [(lo[0] - pad, hi[0] + pad), (lo[1] - pad, hi[1] + pad)];
    let frame = Frame::new(&bbox);
    let mut out = frame.open();
    let n = poly.vertices.len().saturating_sub(1);
    writeln!(
        out,
        r##"<path d="{}" stroke="#1f77b4" fill="#1f77b433" stroke-width="2"/>"##,
        frame.path(&poly.vertices[..n], true)
    )
    .unwrap();
    for (i, &v) in poly.vertices[..n].iter().enumerate() {
        let (x, y) = frame.map(v);
        writeln!(out, r#"<text x="{x}" y="{y}" font-size="12">V{i}</text>"#).unwrap();
    }
    out.push_str("</svg>\n");
    out
}
