//! Bipartite layer storage and the kernels that run over it.

mod coo;
mod dense;
mod init;
mod optim;

pub use coo::{Connection, SparseGrad, SparseLayer};
pub use dense::{DenseGrad, DenseLayer};
pub use init::{
    connection_probability, dense_init, er_init, expected_nnz, InitConfig, DEFAULT_EPSILON,
};
pub use optim::SgdParams;

use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};

/// A layer of the network, either sparse or fully connected.
#[derive(Debug, Clone, PartialEq)]
pub enum Layer {
    Sparse(SparseLayer),
    Dense(DenseLayer),
}

#[derive(Debug, Clone, PartialEq)]
pub enum LayerGrad {
    Sparse(SparseGrad),
    Dense(DenseGrad),
}

impl LayerGrad {
    pub fn input(&self) -> Option<&Array2<f64>> {
        match self {
            LayerGrad::Sparse(g) => g.input.as_ref(),
            LayerGrad::Dense(g) => g.input.as_ref(),
        }
    }

    pub fn take_input(&mut self) -> Option<Array2<f64>> {
        match self {
            LayerGrad::Sparse(g) => g.input.take(),
            LayerGrad::Dense(g) => g.input.take(),
        }
    }

    pub fn bias(&self) -> &[f64] {
        match self {
            LayerGrad::Sparse(g) => &g.bias,
            LayerGrad::Dense(g) => g.bias.as_slice().expect("contiguous"),
        }
    }

    /// Weight gradient laid out as an `(n_in, n_out)` matrix, zero outside
    /// the mask for sparse layers.
    pub fn dense_weights(&self, layer: &Layer) -> Array2<f64> {
        match (self, layer) {
            (LayerGrad::Sparse(g), Layer::Sparse(l)) => l.scatter(&g.weights),
            (LayerGrad::Dense(g), Layer::Dense(_)) => g.weights.clone(),
            _ => panic!("gradient kind does not match layer kind"),
        }
    }
}

impl Layer {
    pub fn n_in(&self) -> usize {
        match self {
            Layer::Sparse(l) => l.n_in(),
            Layer::Dense(l) => l.n_in(),
        }
    }

    pub fn n_out(&self) -> usize {
        match self {
            Layer::Sparse(l) => l.n_out(),
            Layer::Dense(l) => l.n_out(),
        }
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self, Layer::Sparse(_))
    }

    pub fn as_sparse(&self) -> Option<&SparseLayer> {
        match self {
            Layer::Sparse(l) => Some(l),
            Layer::Dense(_) => None,
        }
    }

    pub fn as_sparse_mut(&mut self) -> Option<&mut SparseLayer> {
        match self {
            Layer::Sparse(l) => Some(l),
            Layer::Dense(_) => None,
        }
    }

    /// Trainable weight count: nnz for sparse, `n_in * n_out` for dense.
    pub fn weight_count(&self) -> usize {
        match self {
            Layer::Sparse(l) => l.nnz(),
            Layer::Dense(l) => l.n_in() * l.n_out(),
        }
    }

    pub fn bias(&self) -> &[f64] {
        match self {
            Layer::Sparse(l) => l.bias(),
            Layer::Dense(l) => l.bias().as_slice().expect("contiguous"),
        }
    }

    /// Incoming connections per output neuron.
    pub fn in_degree(&self) -> Vec<usize> {
        match self {
            Layer::Sparse(l) => l.in_degree(),
            Layer::Dense(l) => vec![l.n_in(); l.n_out()],
        }
    }

    /// Outgoing connections per input neuron.
    pub fn out_degree(&self) -> Vec<usize> {
        match self {
            Layer::Sparse(l) => l.out_degree(),
            Layer::Dense(l) => vec![l.n_out(); l.n_in()],
        }
    }

    pub fn forward(&self, input: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        match self {
            Layer::Sparse(l) => l.forward(input),
            Layer::Dense(l) => l.forward(input),
        }
    }

    pub fn backward(
        &self,
        input: ArrayView2<'_, f64>,
        upstream: ArrayView2<'_, f64>,
        need_input_grad: bool,
    ) -> Result<LayerGrad> {
        Ok(match self {
            Layer::Sparse(l) => LayerGrad::Sparse(l.backward(input, upstream, need_input_grad)?),
            Layer::Dense(l) => LayerGrad::Dense(l.backward(input, upstream, need_input_grad)?),
        })
    }

    pub fn apply_update(&mut self, grad: &LayerGrad, params: &SgdParams) -> Result<()> {
        match (self, grad) {
            (Layer::Sparse(l), LayerGrad::Sparse(g)) => l.apply_update(g, params),
            (Layer::Dense(l), LayerGrad::Dense(g)) => l.apply_update(g, params),
            _ => Err(Error::Shape("gradient kind does not match layer kind".into())),
        }
    }

    /// Dense view of the weights (zeros at absent cells).
    pub fn dense_weights(&self) -> Array2<f64> {
        match self {
            Layer::Sparse(l) => l.to_dense().weights().clone(),
            Layer::Dense(l) => l.weights().clone(),
        }
    }

    pub fn remove_inputs(&mut self, removed: &[usize]) -> Result<()> {
        match self {
            Layer::Sparse(l) => l.remove_inputs(removed),
            Layer::Dense(l) => l.remove_inputs(removed),
        }
    }

    pub fn remove_outputs(&mut self, removed: &[usize]) -> Result<()> {
        match self {
            Layer::Sparse(l) => l.remove_outputs(removed),
            Layer::Dense(l) => l.remove_outputs(removed),
        }
    }
}
