use ndarray::{Array2, ArrayView2};

use super::dense::DenseLayer;
use super::optim::SgdParams;
use crate::error::{Error, Result};

/// One weighted edge of a bipartite layer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Connection {
    pub row: u32,
    pub col: u32,
    pub weight: f64,
}

impl Connection {
    pub fn new(row: u32, col: u32, weight: f64) -> Self {
        Self { row, col, weight }
    }

    #[inline]
    pub(crate) fn cell(&self) -> (u32, u32) {
        (self.row, self.col)
    }
}

/// Sparse bipartite layer stored as COO triplets.
///
/// Connections are kept sorted by `(col, row)`; `row_order` is a permutation of
/// connection ids sorted by `(row, col)` used by the transpose pass. Velocity
/// buffers for SGD momentum are parallel to `weights` and `bias`.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseLayer {
    n_in: usize,
    n_out: usize,
    rows: Vec<u32>,
    cols: Vec<u32>,
    weights: Vec<f64>,
    bias: Vec<f64>,
    weight_velocity: Vec<f64>,
    bias_velocity: Vec<f64>,
    row_order: Vec<u32>,
}

/// Gradients of a sparse layer, aligned with its connection order.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseGrad {
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    /// Gradient with respect to the layer input, `(n_in, batch)`.
    pub input: Option<Array2<f64>>,
}

impl SparseLayer {
    /// A layer with no connections and zero bias.
    pub fn empty(n_in: usize, n_out: usize) -> Result<Self> {
        Self::from_connections(n_in, n_out, Vec::new(), vec![0.0; n_out])
    }

    /// Builds a layer from arbitrary-order connections.
    ///
    /// Fails on out-of-range indices, duplicate cells or a bias of the wrong
    /// length. Velocities start at zero.
    pub fn from_connections(
        n_in: usize,
        n_out: usize,
        mut connections: Vec<Connection>,
        bias: Vec<f64>,
    ) -> Result<Self> {
        if n_in == 0 || n_out == 0 {
            return Err(Error::Shape(format!(
                "layer dimensions must be positive, got {n_in}x{n_out}"
            )));
        }
        if n_in > u32::MAX as usize || n_out > u32::MAX as usize {
            return Err(Error::Shape("layer dimension exceeds u32 range".into()));
        }
        if bias.len() != n_out {
            return Err(Error::Shape(format!(
                "bias length {} does not match n_out {n_out}",
                bias.len()
            )));
        }
        if let Some(c) = connections
            .iter()
            .find(|c| c.row as usize >= n_in || c.col as usize >= n_out)
        {
            return Err(Error::Shape(format!(
                "connection ({}, {}) out of bounds for {n_in}x{n_out} layer",
                c.row, c.col
            )));
        }
        connections.sort_unstable_by_key(|c| (c.col, c.row));
        if let Some(w) = connections.windows(2).find(|w| w[0].cell() == w[1].cell()) {
            return Err(Error::Shape(format!(
                "duplicate connection ({}, {})",
                w[0].row, w[0].col
            )));
        }
        let nnz = connections.len();
        let mut layer = SparseLayer {
            n_in,
            n_out,
            rows: connections.iter().map(|c| c.row).collect(),
            cols: connections.iter().map(|c| c.col).collect(),
            weights: connections.iter().map(|c| c.weight).collect(),
            bias,
            weight_velocity: vec![0.0; nnz],
            bias_velocity: vec![0.0; n_out],
            row_order: Vec::new(),
        };
        layer.rebuild_row_order();
        Ok(layer)
    }

    pub fn n_in(&self) -> usize {
        self.n_in
    }

    pub fn n_out(&self) -> usize {
        self.n_out
    }

    pub fn nnz(&self) -> usize {
        self.weights.len()
    }

    /// Number of possible cells, `n_in * n_out`.
    pub fn capacity(&self) -> usize {
        self.n_in * self.n_out
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn bias_mut(&mut self) -> &mut [f64] {
        &mut self.bias
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    pub fn rows(&self) -> &[u32] {
        &self.rows
    }

    pub fn cols(&self) -> &[u32] {
        &self.cols
    }

    pub fn weight_velocity(&self) -> &[f64] {
        &self.weight_velocity
    }

    pub fn bias_velocity(&self) -> &[f64] {
        &self.bias_velocity
    }

    pub fn connection(&self, idx: usize) -> Connection {
        Connection::new(self.rows[idx], self.cols[idx], self.weights[idx])
    }

    /// Connections in storage order, `(col, row)` ascending.
    pub fn connections(&self) -> impl Iterator<Item = Connection> + '_ {
        (0..self.nnz()).map(move |i| self.connection(i))
    }

    /// Storage index of the connection at `(row, col)`, if present.
    pub fn find(&self, row: u32, col: u32) -> Option<usize> {
        let start = self.cols.partition_point(|&c| c < col);
        let end = start + self.cols[start..].partition_point(|&c| c == col);
        self.rows[start..end]
            .binary_search(&row)
            .ok()
            .map(|off| start + off)
    }

    fn rebuild_row_order(&mut self) {
        let mut order: Vec<u32> = (0..self.nnz() as u32).collect();
        order.sort_unstable_by_key(|&i| (self.rows[i as usize], self.cols[i as usize]));
        self.row_order = order;
    }

    /// Applies a permutation sorting storage by `(col, row)` again.
    fn resort(&mut self) {
        let mut perm: Vec<usize> = (0..self.nnz()).collect();
        perm.sort_unstable_by_key(|&i| (self.cols[i], self.rows[i]));
        self.rows = perm.iter().map(|&i| self.rows[i]).collect();
        self.cols = perm.iter().map(|&i| self.cols[i]).collect();
        self.weights = perm.iter().map(|&i| self.weights[i]).collect();
        self.weight_velocity = perm.iter().map(|&i| self.weight_velocity[i]).collect();
        self.rebuild_row_order();
    }

    /// Keeps the connections for which `keep` is true, dropping their
    /// velocities with them. Order is preserved.
    pub fn retain_connections(&mut self, keep: &[bool]) -> Result<()> {
        if keep.len() != self.nnz() {
            return Err(Error::Shape(format!(
                "retain mask length {} does not match nnz {}",
                keep.len(),
                self.nnz()
            )));
        }
        let mut w = 0;
        for (r, &kept) in keep.iter().enumerate() {
            if kept {
                self.rows[w] = self.rows[r];
                self.cols[w] = self.cols[r];
                self.weights[w] = self.weights[r];
                self.weight_velocity[w] = self.weight_velocity[r];
                w += 1;
            }
        }
        self.rows.truncate(w);
        self.cols.truncate(w);
        self.weights.truncate(w);
        self.weight_velocity.truncate(w);
        self.rebuild_row_order();
        Ok(())
    }

    /// Inserts new connections with zero velocity. Cells must be in bounds and
    /// currently empty.
    pub fn insert_connections(&mut self, new: &[Connection]) -> Result<()> {
        let mut seen = std::collections::HashSet::with_capacity(new.len());
        for c in new {
            if c.row as usize >= self.n_in || c.col as usize >= self.n_out {
                return Err(Error::Shape(format!(
                    "connection ({}, {}) out of bounds",
                    c.row, c.col
                )));
            }
            if !seen.insert(c.cell()) || self.find(c.row, c.col).is_some() {
                return Err(Error::Shape(format!(
                    "connection ({}, {}) already present",
                    c.row, c.col
                )));
            }
        }
        for c in new {
            self.rows.push(c.row);
            self.cols.push(c.col);
            self.weights.push(c.weight);
            self.weight_velocity.push(0.0);
        }
        self.resort();
        Ok(())
    }

    /// Removes the given input neurons (rows) and renumbers the rest.
    pub fn remove_inputs(&mut self, removed: &[usize]) -> Result<()> {
        let map = index_map(self.n_in, removed)?;
        let keep: Vec<bool> = self
            .rows
            .iter()
            .map(|&r| map[r as usize].is_some())
            .collect();
        self.retain_connections(&keep)?;
        for r in &mut self.rows {
            *r = map[*r as usize].expect("retained row") as u32;
        }
        self.n_in -= removed.len();
        self.rebuild_row_order();
        Ok(())
    }

    /// Removes the given output neurons (columns, with their biases) and
    /// renumbers the rest.
    pub fn remove_outputs(&mut self, removed: &[usize]) -> Result<()> {
        let map = index_map(self.n_out, removed)?;
        let keep: Vec<bool> = self
            .cols
            .iter()
            .map(|&c| map[c as usize].is_some())
            .collect();
        self.retain_connections(&keep)?;
        for c in &mut self.cols {
            *c = map[*c as usize].expect("retained col") as u32;
        }
        let bias_keep: Vec<bool> = (0..self.n_out).map(|j| map[j].is_some()).collect();
        self.bias = filter(&self.bias, &bias_keep);
        self.bias_velocity = filter(&self.bias_velocity, &bias_keep);
        self.n_out -= removed.len();
        // Renumbering is monotone, so (col, row) order is unchanged.
        self.rebuild_row_order();
        Ok(())
    }

    /// Incoming connection count per output neuron.
    pub fn in_degree(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n_out];
        for &c in &self.cols {
            deg[c as usize] += 1;
        }
        deg
    }

    /// Outgoing connection count per input neuron.
    pub fn out_degree(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n_in];
        for &r in &self.rows {
            deg[r as usize] += 1;
        }
        deg
    }

    /// Pre-activation `z = W^T x + b` over the mask. `input` is `(n_in, batch)`.
    pub fn forward(&self, input: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        if input.nrows() != self.n_in {
            return Err(Error::Shape(format!(
                "input has {} rows, layer expects {}",
                input.nrows(),
                self.n_in
            )));
        }
        let batch = input.ncols();
        let x = input.as_standard_layout();
        let xs = x.as_slice().expect("standard layout");
        let mut out = Array2::<f64>::zeros((self.n_out, batch));
        let os = out.as_slice_mut().expect("fresh array");
        for (j, b) in self.bias.iter().enumerate() {
            os[j * batch..(j + 1) * batch].fill(*b);
        }
        for ((&r, &c), &w) in self.rows.iter().zip(&self.cols).zip(&self.weights) {
            let (r, c) = (r as usize, c as usize);
            let xr = &xs[r * batch..(r + 1) * batch];
            let orow = &mut os[c * batch..(c + 1) * batch];
            for (o, xv) in orow.iter_mut().zip(xr) {
                *o += w * xv;
            }
        }
        Ok(out)
    }

    /// Backpropagates `upstream` (`(n_out, batch)`, already scaled by the loss
    /// convention) through the layer. Weight gradients are only produced for
    /// existing connections.
    pub fn backward(
        &self,
        input: ArrayView2<'_, f64>,
        upstream: ArrayView2<'_, f64>,
        need_input_grad: bool,
    ) -> Result<SparseGrad> {
        if input.nrows() != self.n_in
            || upstream.nrows() != self.n_out
            || input.ncols() != upstream.ncols()
        {
            return Err(Error::Shape(format!(
                "backward got input {:?} and upstream {:?} for {}x{} layer",
                input.dim(),
                upstream.dim(),
                self.n_in,
                self.n_out
            )));
        }
        let batch = input.ncols();
        let x = input.as_standard_layout();
        let d = upstream.as_standard_layout();
        let xs = x.as_slice().expect("standard layout");
        let ds = d.as_slice().expect("standard layout");

        let weights = self
            .rows
            .iter()
            .zip(&self.cols)
            .map(|(&r, &c)| {
                let xr = &xs[r as usize * batch..(r as usize + 1) * batch];
                let dr = &ds[c as usize * batch..(c as usize + 1) * batch];
                xr.iter().zip(dr).map(|(a, b)| a * b).sum()
            })
            .collect();
        let bias = (0..self.n_out)
            .map(|j| ds[j * batch..(j + 1) * batch].iter().sum())
            .collect();

        let input_grad = need_input_grad.then(|| {
            let mut gx = Array2::<f64>::zeros((self.n_in, batch));
            let gs = gx.as_slice_mut().expect("fresh array");
            for &idx in &self.row_order {
                let idx = idx as usize;
                let (r, c, w) = (
                    self.rows[idx] as usize,
                    self.cols[idx] as usize,
                    self.weights[idx],
                );
                let dr = &ds[c * batch..(c + 1) * batch];
                let grow = &mut gs[r * batch..(r + 1) * batch];
                for (g, dv) in grow.iter_mut().zip(dr) {
                    *g += w * dv;
                }
            }
            gx
        });

        Ok(SparseGrad {
            weights,
            bias,
            input: input_grad,
        })
    }

    /// One SGD-with-momentum step. The mask is never modified.
    pub fn apply_update(&mut self, grad: &SparseGrad, params: &SgdParams) -> Result<()> {
        if grad.weights.len() != self.nnz() || grad.bias.len() != self.n_out {
            return Err(Error::Shape(format!(
                "gradient ({}, {}) does not match layer ({}, {})",
                grad.weights.len(),
                grad.bias.len(),
                self.nnz(),
                self.n_out
            )));
        }
        for ((w, v), g) in self
            .weights
            .iter_mut()
            .zip(&mut self.weight_velocity)
            .zip(&grad.weights)
        {
            *v = params.momentum * *v + g + params.weight_decay * *w;
            *w -= params.lr * *v;
        }
        for ((b, v), g) in self
            .bias
            .iter_mut()
            .zip(&mut self.bias_velocity)
            .zip(&grad.bias)
        {
            *v = params.momentum * *v + g;
            *b -= params.lr * *v;
        }
        Ok(())
    }

    /// Dense equivalent with zeros at absent cells. Velocities are carried over.
    pub fn to_dense(&self) -> DenseLayer {
        let mut weights = Array2::<f64>::zeros((self.n_in, self.n_out));
        let mut velocity = Array2::<f64>::zeros((self.n_in, self.n_out));
        for i in 0..self.nnz() {
            let cell = [self.rows[i] as usize, self.cols[i] as usize];
            weights[cell] = self.weights[i];
            velocity[cell] = self.weight_velocity[i];
        }
        DenseLayer::from_parts(weights, self.bias.clone().into(), velocity, self.bias_velocity.clone().into())
            .expect("shapes are consistent by construction")
    }

    /// Scatters per-connection values into an `(n_in, n_out)` matrix.
    pub fn scatter(&self, values: &[f64]) -> Array2<f64> {
        let mut out = Array2::<f64>::zeros((self.n_in, self.n_out));
        for (i, v) in values.iter().enumerate() {
            out[[self.rows[i] as usize, self.cols[i] as usize]] = *v;
        }
        out
    }
}

/// Maps surviving indices of `0..n` to their new positions after removing
/// `removed`.
pub(crate) fn index_map(n: usize, removed: &[usize]) -> Result<Vec<Option<usize>>> {
    let mut gone = vec![false; n];
    for &r in removed {
        if r >= n {
            return Err(Error::Shape(format!("neuron {r} out of range 0..{n}")));
        }
        if gone[r] {
            return Err(Error::Shape(format!("neuron {r} listed twice")));
        }
        gone[r] = true;
    }
    let mut next = 0;
    Ok(gone
        .iter()
        .map(|&g| {
            if g {
                None
            } else {
                next += 1;
                Some(next - 1)
            }
        })
        .collect())
}

fn filter(values: &[f64], keep: &[bool]) -> Vec<f64> {
    values
        .iter()
        .zip(keep)
        .filter(|(_, &k)| k)
        .map(|(v, _)| *v)
        .collect()
}
