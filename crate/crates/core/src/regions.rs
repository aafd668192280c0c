//! Grid classification into the stability domain `D_{k+}`, the maximal
//! instability domain `D_{k-}` and the labeled zero confinement subdomains.

use std::collections::{HashMap, VecDeque};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{PointExponents, SignVector};
use crate::grid::GridSpec;
use crate::model::{binomial, check_stratum, k_subsets, FunctionFamily, SubsetMask};

/// Upper bound on `C(N,k) * nodes` sign evaluations held in memory.
pub const DEFAULT_EVAL_BUDGET: u64 = 1 << 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DomainClass {
    Pos,
    Neg,
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CellClass {
    Pos,
    Neg,
    Zcd,
    Boundary,
}

impl CellClass {
    pub fn as_str(self) -> &'static str {
        match self {
            CellClass::Pos => "POS",
            CellClass::Neg => "NEG",
            CellClass::Zcd => "ZCD",
            CellClass::Boundary => "BOUNDARY",
        }
    }
}

/// Classifies an off-locus sign vector.
///
/// For `2k < N`, NEG means the maximal count `C(N-1,k-1)` of negatives. For
/// `2k = N` every off-locus vector has that count; there POS means +1 on
/// every mask containing the first term, and NEG means the negative masks
/// all share one common term.
pub fn domain_class(v: &SignVector, n_terms: usize, k: usize) -> Result<DomainClass> {
    if v.has_zero() {
        return Err(Error::OnBoundary);
    }
    let masks = k_subsets(n_terms, k);
    Ok(classify_with_masks(v, &masks, n_terms))
}

fn classify_with_masks(v: &SignVector, masks: &[SubsetMask], n_terms: usize) -> DomainClass {
    let k = v.k;
    if 2 * k == n_terms {
        let rep_positive = masks
            .iter()
            .zip(&v.entries)
            .filter(|(m, _)| m.contains(0))
            .all(|(_, &s)| s > 0);
        if rep_positive {
            return DomainClass::Pos;
        }
        let common = masks
            .iter()
            .zip(&v.entries)
            .filter(|(_, &s)| s < 0)
            .fold(u32::MAX, |acc, (m, _)| acc & m.bits());
        return if v.neg_count > 0 && common != 0 {
            DomainClass::Neg
        } else {
            DomainClass::Mixed
        };
    }
    if v.neg_count == 0 {
        DomainClass::Pos
    } else if v.neg_count as u64 == binomial(n_terms - 1, k - 1) {
        DomainClass::Neg
    } else {
        DomainClass::Mixed
    }
}

/// Average entry of an off-locus sign vector.
pub fn mean_spin(v: &SignVector) -> Result<f64> {
    if v.has_zero() {
        return Err(Error::OnBoundary);
    }
    Ok(v.sum() as f64 / v.len() as f64)
}

/// Cached stratum data shared by every point of a classification run.
#[derive(Debug, Clone)]
pub struct Stratum {
    pub n_terms: usize,
    pub k: usize,
    pub masks: Vec<SubsetMask>,
}

impl Stratum {
    pub fn new(n_terms: usize, k: usize) -> Result<Self> {
        check_stratum(n_terms, k)?;
        Ok(Stratum { n_terms, k, masks: k_subsets(n_terms, k) })
    }

    pub fn sign_vector(&self, point: &PointExponents, tol: f64) -> SignVector {
        point.sign_vector(self.k, &self.masks, tol)
    }

    /// `None` for vectors with a zero entry.
    pub fn classify(&self, v: &SignVector) -> Option<DomainClass> {
        (!v.has_zero()).then(|| classify_with_masks(v, &self.masks, self.n_terms))
    }
}

#[derive(Debug, Clone)]
pub struct RegionMap {
    pub grid: GridSpec,
    pub k: usize,
    pub n_terms: usize,
    pub tol: f64,
    /// Distinct sign vectors in first-encounter node order.
    pub sign_table: Vec<SignVector>,
    /// Sign-table id of every node.
    pub node_ids: Vec<u32>,
    pub cell_class: Vec<CellClass>,
    /// Sign-table id of every non-boundary cell.
    pub cell_ids: Vec<Option<u32>>,
    /// Subdomain label per cell, `0` outside ZCD; filled by [`label_subdomains`].
    pub components: Option<Vec<u32>>,
    /// Sign-table id of each subdomain `delta = 1..=M`.
    pub subdomain_ids: Vec<u32>,
}

impl RegionMap {
    pub fn subdomain_count(&self) -> usize {
        self.subdomain_ids.len()
    }

    pub fn is_labeled(&self) -> bool {
        self.components.is_some()
    }

    pub fn count(&self, class: CellClass) -> usize {
        self.cell_class.iter().filter(|&&c| c == class).count()
    }

    pub fn cell_vector(&self, cell: usize) -> Option<&SignVector> {
        self.cell_ids[cell].map(|id| &self.sign_table[id as usize])
    }

    pub fn node_vector(&self, node: usize) -> &SignVector {
        &self.sign_table[self.node_ids[node] as usize]
    }

    /// Cell containing `x`, if inside the bbox.
    pub fn cell_at(&self, x: &[f64]) -> Option<usize> {
        if !self.grid.contains(x) {
            return None;
        }
        let cells = self.grid.cells_per_axis();
        let multi: Vec<usize> = (0..self.grid.dim())
            .map(|a| {
                let i = ((x[a] - self.grid.bbox[a].0) / self.grid.step(a)).floor() as usize;
                i.min(cells[a] - 1)
            })
            .collect();
        Some(self.grid.cell_index(&multi))
    }
}

pub fn classify_grid(family: &FunctionFamily, k: usize, grid: &GridSpec, tol: f64) -> Result<RegionMap> {
    classify_grid_with_budget(family, k, grid, tol, DEFAULT_EVAL_BUDGET)
}

pub fn classify_grid_with_budget(
    family: &FunctionFamily,
    k: usize,
    grid: &GridSpec,
    tol: f64,
    budget: u64,
) -> Result<RegionMap> {
    if grid.dim() != family.dim() {
        return Err(Error::InvalidGrid(format!(
            "grid has {} axes, model has n={}",
            grid.dim(),
            family.dim()
        )));
    }
    if grid.dim() > 3 {
        return Err(Error::DimensionUnsupported { supported: 3, actual: grid.dim() });
    }
    let stratum = Stratum::new(family.len(), k)?;
    let width = stratum.masks.len();
    let nodes = grid.node_count();
    let work = width as u64 * nodes as u64;
    if work > budget {
        return Err(Error::ModelTooLarge(format!(
            "{width} subsets x {nodes} nodes exceeds the budget of {budget}"
        )));
    }

    let mut signs = vec![0i8; width * nodes];
    signs.par_chunks_mut(width).enumerate().for_each(|(node, out)| {
        let p = PointExponents::new(family, &grid.node_point(node));
        for (s, &m) in out.iter_mut().zip(&stratum.masks) {
            *s = crate::eval::sign_with_tol(p.log_gap(m), tol);
        }
    });

    let mut lookup: HashMap<&[i8], u32> = HashMap::new();
    let mut sign_table = Vec::new();
    let mut node_ids = Vec::with_capacity(nodes);
    for chunk in signs.chunks(width) {
        let next = sign_table.len() as u32;
        let id = *lookup.entry(chunk).or_insert_with(|| {
            sign_table.push(SignVector::new(k, chunk.to_vec()));
            next
        });
        node_ids.push(id);
    }
    let table_class: Vec<Option<DomainClass>> = sign_table.iter().map(|v| stratum.classify(v)).collect();

    let (cell_class, cell_ids): (Vec<_>, Vec<_>) = (0..grid.cell_count())
        .into_par_iter()
        .map(|cell| {
            let corners = grid.cell_corners(cell);
            let id = node_ids[corners[0]];
            let uniform = corners.iter().all(|&c| node_ids[c] == id);
            match (uniform, table_class[id as usize]) {
                (true, Some(DomainClass::Pos)) => (CellClass::Pos, Some(id)),
                (true, Some(DomainClass::Neg)) => (CellClass::Neg, Some(id)),
                (true, Some(DomainClass::Mixed)) => (CellClass::Zcd, Some(id)),
                _ => (CellClass::Boundary, None),
            }
        })
        .unzip();

    Ok(RegionMap {
        grid: grid.clone(),
        k,
        n_terms: family.len(),
        tol,
        sign_table,
        node_ids,
        cell_class,
        cell_ids,
        components: None,
        subdomain_ids: Vec::new(),
    })
}

/// Labels face-connected components of ZCD cells sharing one sign vector,
/// numbering them `1..=M` in scan order.
pub fn label_subdomains(mut map: RegionMap) -> RegionMap {
    let grid = &map.grid;
    let mut labels = vec![0u32; grid.cell_count()];
    let mut subdomain_ids = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..labels.len() {
        if map.cell_class[start] != CellClass::Zcd || labels[start] != 0 {
            continue;
        }
        let id = map.cell_ids[start];
        subdomain_ids.push(id.expect("ZCD cell has a sign id"));
        let delta = subdomain_ids.len() as u32;
        labels[start] = delta;
        queue.push_back(start);
        while let Some(cell) = queue.pop_front() {
            for nb in grid.cell_neighbors(cell) {
                if labels[nb] == 0 && map.cell_class[nb] == CellClass::Zcd && map.cell_ids[nb] == id {
                    labels[nb] = delta;
                    queue.push_back(nb);
                }
            }
        }
    }
    map.components = Some(labels);
    map.subdomain_ids = subdomain_ids;
    map
}

/// How spin states are weighted in the partition function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpinWeighting {
    /// `exp(-beta * H * sum S)`.
    #[default]
    AsPrinted,
    /// `exp(-beta * E)` with `E = -H * sum S`.
    Boltzmann,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpinState {
    pub label: String,
    pub spin_sum: i64,
    pub energy: f64,
    pub interaction: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpinThermo {
    pub beta: f64,
    pub field: f64,
    pub gamma: f64,
    pub weighting: SpinWeighting,
    pub states: Vec<SpinState>,
    pub z_spin: f64,
}

pub fn spin_state(label: impl Into<String>, spin_sum: i64, beta: f64, h: f64, gamma: f64, w: SpinWeighting) -> SpinState {
    let s = spin_sum as f64;
    let energy = -h * s;
    let weight = match w {
        SpinWeighting::AsPrinted => (-beta * h * s).exp(),
        SpinWeighting::Boltzmann => (-beta * energy).exp(),
    };
    SpinState { label: label.into(), spin_sum, energy, interaction: gamma * s * s, weight }
}

/// Energies and partition function over the states `D_{k+}`, `D_{k-}` (when
/// present on the grid) and every labeled subdomain.
pub fn spin_thermodynamics(
    map: &RegionMap,
    beta: f64,
    h: f64,
    gamma: f64,
    weighting: SpinWeighting,
) -> Result<SpinThermo> {
    if !map.is_labeled() {
        return Err(Error::NotLabeled);
    }
    let mut states = Vec::new();
    for (class, label) in [(CellClass::Pos, "D+"), (CellClass::Neg, "D-")] {
        if let Some(cell) = map.cell_class.iter().position(|&c| c == class) {
            let sum = map.cell_vector(cell).expect("classified cell").sum();
            states.push(spin_state(label, sum, beta, h, gamma, weighting));
        }
    }
    for (i, &id) in map.subdomain_ids.iter().enumerate() {
        let sum = map.sign_table[id as usize].sum();
        states.push(spin_state(format!("ZCD{}", i + 1), sum, beta, h, gamma, weighting));
    }
    let z_spin = states.iter().map(|s| s.weight).sum();
    Ok(SpinThermo { beta, field: h, gamma, weighting, states, z_spin })
}
