//! Regular axis-aligned sampling grids.
//!
//! Nodes and cells are numbered with axis 0 varying fastest, so a 2D grid is
//! scanned row by row from the bottom (`y = lo`) upwards.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub bbox: Vec<(f64, f64)>,
    pub res: Vec<usize>,
}

impl GridSpec {
    /// A single resolution entry is broadcast to every axis.
    pub fn new(bbox: Vec<(f64, f64)>, res: Vec<usize>) -> Result<Self> {
        if bbox.is_empty() {
            return Err(Error::InvalidGrid("bbox has no axes".into()));
        }
        let res = match res.len() {
            1 => vec![res[0]; bbox.len()],
            n if n == bbox.len() => res,
            n => {
                return Err(Error::InvalidGrid(format!(
                    "{n} resolution entries for {} axes",
                    bbox.len()
                )))
            }
        };
        for (axis, &(lo, hi)) in bbox.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::InvalidGrid(format!("axis {axis}: need lo < hi, got {lo}:{hi}")));
            }
        }
        if let Some(&r) = res.iter().find(|&&r| r < 2) {
            return Err(Error::InvalidGrid(format!("resolution {r} < 2")));
        }
        Ok(GridSpec { bbox, res })
    }

    /// The cube `[lo, hi]^dim` with `res` nodes per axis.
    pub fn cube(dim: usize, lo: f64, hi: f64, res: usize) -> Result<Self> {
        Self::new(vec![(lo, hi); dim], vec![res])
    }

    /// Parses `"lo:hi,lo:hi"` and `"401"` or `"401,201"`.
    pub fn parse(bbox: &str, res: &str) -> Result<Self> {
        let bad = |what: &str| Error::InvalidGrid(format!("cannot parse {what}"));
        let axes = bbox
            .split(',')
            .map(|part| {
                let (lo, hi) = part.split_once(':').ok_or_else(|| bad(part))?;
                let lo: f64 = lo.trim().parse().map_err(|_| bad(lo))?;
                let hi: f64 = hi.trim().parse().map_err(|_| bad(hi))?;
                Ok((lo, hi))
            })
            .collect::<Result<Vec<_>>>()?;
        let res = res
            .split(',')
            .map(|r| r.trim().parse::<usize>().map_err(|_| bad(r)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(axes, res)
    }

    pub fn dim(&self) -> usize {
        self.bbox.len()
    }

    pub fn node_count(&self) -> usize {
        self.res.iter().product()
    }

    pub fn cells_per_axis(&self) -> Vec<usize> {
        self.res.iter().map(|r| r - 1).collect()
    }

    pub fn cell_count(&self) -> usize {
        self.res.iter().map(|r| r - 1).product()
    }

    pub fn step(&self, axis: usize) -> f64 {
        let (lo, hi) = self.bbox[axis];
        (hi - lo) / (self.res[axis] - 1) as f64
    }

    /// Largest grid step over all axes.
    pub fn cell_size(&self) -> f64 {
        (0..self.dim()).map(|a| self.step(a)).fold(0.0, f64::max)
    }

    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        let (lo, hi) = self.bbox[axis];
        if i + 1 == self.res[axis] {
            hi
        } else {
            lo + i as f64 * self.step(axis)
        }
    }

    pub fn node_multi(&self, mut idx: usize) -> Vec<usize> {
        self.res
            .iter()
            .map(|&r| {
                let i = idx % r;
                idx /= r;
                i
            })
            .collect()
    }

    pub fn node_index(&self, multi: &[usize]) -> usize {
        multi.iter().zip(&self.res).rev().fold(0, |acc, (&i, &r)| acc * r + i)
    }

    pub fn node_point(&self, idx: usize) -> Vec<f64> {
        self.node_multi(idx)
            .iter()
            .enumerate()
            .map(|(axis, &i)| self.coord(axis, i))
            .collect()
    }

    pub fn cell_multi(&self, mut idx: usize) -> Vec<usize> {
        self.res
            .iter()
            .map(|&r| {
                let i = idx % (r - 1);
                idx /= r - 1;
                i
            })
            .collect()
    }

    pub fn cell_index(&self, multi: &[usize]) -> usize {
        multi
            .iter()
            .zip(&self.res)
            .rev()
            .fold(0, |acc, (&i, &r)| acc * (r - 1) + i)
    }

    pub fn cell_center(&self, idx: usize) -> Vec<f64> {
        self.cell_multi(idx)
            .iter()
            .enumerate()
            .map(|(axis, &i)| 0.5 * (self.coord(axis, i) + self.coord(axis, i + 1)))
            .collect()
    }

    /// The `2^n` corner nodes of a cell; corner bit `a` selects the upper node on axis `a`.
    pub fn cell_corners(&self, idx: usize) -> Vec<usize> {
        let base = self.cell_multi(idx);
        let n = self.dim();
        (0..1usize << n)
            .map(|c| {
                let multi: Vec<usize> = (0..n).map(|a| base[a] + ((c >> a) & 1)).collect();
                self.node_index(&multi)
            })
            .collect()
    }

    /// Face-adjacent cells (4-connectivity in 2D, 6 in 3D).
    pub fn cell_neighbors(&self, idx: usize) -> Vec<usize> {
        let multi = self.cell_multi(idx);
        let cells = self.cells_per_axis();
        let mut out = Vec::with_capacity(2 * self.dim());
        for axis in 0..self.dim() {
            let mut m = multi.clone();
            if multi[axis] > 0 {
                m[axis] = multi[axis] - 1;
                out.push(self.cell_index(&m));
            }
            if multi[axis] + 1 < cells[axis] {
                m[axis] = multi[axis] + 1;
                out.push(self.cell_index(&m));
            }
        }
        out
    }

    pub fn cell_on_border(&self, idx: usize) -> bool {
        let cells = self.cells_per_axis();
        self.cell_multi(idx)
            .iter()
            .zip(&cells)
            .any(|(&i, &c)| i == 0 || i + 1 == c)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().zip(&self.bbox).all(|(&v, &(lo, hi))| v >= lo && v <= hi)
    }
}
