use crate::graph::Graph;

/// `D^-1/2 (A + I) D^-1/2` in compressed rows, where `D` is the degree
/// matrix of `A + I`. Each row lists its diagonal entry along with the
/// neighbours, in ascending column order.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedAdjacency {
    offsets: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl NormalizedAdjacency {
    pub fn from_graph(g: &Graph) -> Self {
        let n = g.node_count();
        let inv_sqrt: Vec<f64> = (0..n).map(|v| 1.0 / ((g.degree(v) + 1) as f64).sqrt()).collect();
        let mut offsets = Vec::with_capacity(n + 1);
        let mut cols = Vec::with_capacity(n + 2 * g.edge_count());
        let mut vals = Vec::with_capacity(n + 2 * g.edge_count());
        offsets.push(0);
        for u in 0..n {
            let mut self_done = false;
            for &v in g.neighbors(u) {
                if !self_done && v > u {
                    cols.push(u);
                    vals.push(inv_sqrt[u] * inv_sqrt[u]);
                    self_done = true;
                }
                cols.push(v);
                vals.push(inv_sqrt[u] * inv_sqrt[v]);
            }
            if !self_done {
                cols.push(u);
                vals.push(inv_sqrt[u] * inv_sqrt[u]);
            }
            offsets.push(cols.len());
        }
        NormalizedAdjacency { offsets, cols, vals }
    }

    pub fn n(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Nonzero `(column, value)` pairs of row `u`.
    pub fn row(&self, u: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.offsets[u]..self.offsets[u + 1];
        self.cols[range.clone()].iter().copied().zip(self.vals[range].iter().copied())
    }

    pub fn get(&self, u: usize, v: usize) -> f64 {
        self.row(u).find(|&(c, _)| c == v).map_or(0.0, |(_, x)| x)
    }

    /// `out = A x` for a vector.
    pub fn mul_vec(&self, x: &[f64], out: &mut [f64]) {
        for (u, o) in out.iter_mut().enumerate() {
            *o = self.row(u).map(|(v, a)| a * x[v]).sum();
        }
    }

    /// `A X` for a row-major `n x width` matrix.
    pub fn mul_dense(&self, x: &[f64], width: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.n() * width];
        for u in 0..self.n() {
            let dst = &mut out[u * width..(u + 1) * width];
            for (v, a) in self.row(u) {
                for (d, s) in dst.iter_mut().zip(&x[v * width..(v + 1) * width]) {
                    *d += a * s;
                }
            }
        }
        out
    }
}
