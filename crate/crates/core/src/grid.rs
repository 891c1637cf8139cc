//! Uniform spatial hash for exact nearest-neighbor queries in low ambient
//! dimension.

use std::collections::HashMap;

use crate::numeric::dist2;

pub(crate) struct NeighborGrid<'a> {
    coords: &'a [f64],
    dim: usize,
    cell: f64,
    origin: Vec<f64>,
    max_ring: i64,
    cells: HashMap<Vec<i64>, Vec<usize>>,
}

impl<'a> NeighborGrid<'a> {
    /// Indexes `coords` (row-major, `dim` per point) with cubic cells of side `cell`.
    pub(crate) fn new(coords: &'a [f64], dim: usize, cell: f64) -> Self {
        let n = coords.len() / dim;
        let mut origin = vec![f64::INFINITY; dim];
        let mut top = vec![f64::NEG_INFINITY; dim];
        for row in coords.chunks(dim) {
            for k in 0..dim {
                origin[k] = origin[k].min(row[k]);
                top[k] = top[k].max(row[k]);
            }
        }
        let extent = origin
            .iter()
            .zip(&top)
            .map(|(a, b)| b - a)
            .fold(0.0, f64::max);
        let cell = if cell > 0.0 && cell.is_finite() {
            cell
        } else {
            extent.max(1.0)
        };
        let mut grid = Self {
            coords,
            dim,
            cell,
            origin,
            max_ring: 0,
            cells: HashMap::with_capacity(n),
        };
        grid.max_ring = (extent / cell).ceil() as i64 + 2;
        for i in 0..n {
            let key = grid.key(&coords[i * dim..(i + 1) * dim]);
            grid.cells.entry(key).or_default().push(i);
        }
        grid
    }

    fn key(&self, x: &[f64]) -> Vec<i64> {
        x.iter()
            .zip(&self.origin)
            .map(|(v, o)| ((v - o) / self.cell).floor() as i64)
            .collect()
    }

    /// Nearest indexed point to `q` and its squared distance, skipping
    /// `exclude`. Distances are computed as `dist2(q, x_j)`.
    pub(crate) fn nearest(&self, q: &[f64], exclude: Option<usize>) -> Option<(usize, f64)> {
        let center = self.key(q);
        // a query outside the indexed box must start searching further out
        let offset = center
            .iter()
            .map(|&c| {
                if c < 0 {
                    -c
                } else {
                    (c - self.max_ring + 2).max(0)
                }
            })
            .max()
            .unwrap_or(0);
        let mut best: Option<(usize, f64)> = None;
        let mut ring = 0i64;
        loop {
            self.visit_shell(&center, ring, &mut |j| {
                if Some(j) == exclude {
                    return;
                }
                let d = dist2(q, &self.coords[j * self.dim..(j + 1) * self.dim]);
                if best.is_none_or(|(bj, bd)| d < bd || (d == bd && j < bj)) {
                    best = Some((j, d));
                }
            });
            // everything outside rings 0..=ring is farther than ring * cell
            if let Some((_, d)) = best {
                let reach = ring as f64 * self.cell;
                if d <= reach * reach {
                    return best;
                }
            }
            if ring > self.max_ring + offset {
                return best;
            }
            ring += 1;
        }
    }

    fn visit_shell(&self, center: &[i64], ring: i64, f: &mut impl FnMut(usize)) {
        let dim = self.dim;
        let mut offs = vec![-ring; dim];
        let mut key = vec![0i64; dim];
        loop {
            if offs.iter().any(|o| o.abs() == ring) {
                for k in 0..dim {
                    key[k] = center[k] + offs[k];
                }
                if let Some(list) = self.cells.get(&key) {
                    list.iter().for_each(|&j| f(j));
                }
            }
            // odometer increment over [-ring, ring]^dim
            let mut k = 0;
            loop {
                if k == dim {
                    return;
                }
                if offs[k] < ring {
                    offs[k] += 1;
                    break;
                }
                offs[k] = -ring;
                k += 1;
            }
        }
    }
}
