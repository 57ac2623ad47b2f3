use ndarray::{Array1, Array2, ArrayView2, Axis};

use super::optim::SgdParams;
use crate::error::{Error, Result};

/// Fully connected layer, weights stored `(n_in, n_out)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    weights: Array2<f64>,
    bias: Array1<f64>,
    weight_velocity: Array2<f64>,
    bias_velocity: Array1<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseGrad {
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
    pub input: Option<Array2<f64>>,
}

impl DenseLayer {
    pub fn new(weights: Array2<f64>, bias: Array1<f64>) -> Result<Self> {
        let (n_in, n_out) = weights.dim();
        Self::from_parts(
            weights,
            bias,
            Array2::zeros((n_in, n_out)),
            Array1::zeros(n_out),
        )
    }

    pub(crate) fn from_parts(
        weights: Array2<f64>,
        bias: Array1<f64>,
        weight_velocity: Array2<f64>,
        bias_velocity: Array1<f64>,
    ) -> Result<Self> {
        let (n_in, n_out) = weights.dim();
        if n_in == 0 || n_out == 0 {
            return Err(Error::Shape(format!(
                "layer dimensions must be positive, got {n_in}x{n_out}"
            )));
        }
        if bias.len() != n_out
            || weight_velocity.dim() != weights.dim()
            || bias_velocity.len() != n_out
        {
            return Err(Error::Shape(format!(
                "inconsistent dense layer parts for {n_in}x{n_out}"
            )));
        }
        Ok(Self {
            weights: weights.as_standard_layout().into_owned(),
            bias,
            weight_velocity,
            bias_velocity,
        })
    }

    pub fn n_in(&self) -> usize {
        self.weights.nrows()
    }

    pub fn n_out(&self) -> usize {
        self.weights.ncols()
    }

    pub fn weights(&self) -> &Array2<f64> {
        &self.weights
    }

    pub fn weights_mut(&mut self) -> &mut Array2<f64> {
        &mut self.weights
    }

    pub fn bias(&self) -> &Array1<f64> {
        &self.bias
    }

    pub fn bias_mut(&mut self) -> &mut Array1<f64> {
        &mut self.bias
    }

    pub fn weight_velocity(&self) -> &Array2<f64> {
        &self.weight_velocity
    }

    pub fn forward(&self, input: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        if input.nrows() != self.n_in() {
            return Err(Error::Shape(format!(
                "input has {} rows, layer expects {}",
                input.nrows(),
                self.n_in()
            )));
        }
        let mut out = self.weights.t().dot(&input);
        out += &self.bias.view().insert_axis(Axis(1));
        Ok(out)
    }

    pub fn backward(
        &self,
        input: ArrayView2<'_, f64>,
        upstream: ArrayView2<'_, f64>,
        need_input_grad: bool,
    ) -> Result<DenseGrad> {
        if input.nrows() != self.n_in()
            || upstream.nrows() != self.n_out()
            || input.ncols() != upstream.ncols()
        {
            return Err(Error::Shape(format!(
                "backward got input {:?} and upstream {:?} for {}x{} layer",
                input.dim(),
                upstream.dim(),
                self.n_in(),
                self.n_out()
            )));
        }
        Ok(DenseGrad {
            weights: input.dot(&upstream.t()),
            bias: upstream.sum_axis(Axis(1)),
            input: need_input_grad.then(|| self.weights.dot(&upstream)),
        })
    }

    pub fn apply_update(&mut self, grad: &DenseGrad, params: &SgdParams) -> Result<()> {
        if grad.weights.dim() != self.weights.dim() || grad.bias.len() != self.n_out() {
            return Err(Error::Shape(format!(
                "gradient {:?} does not match layer {:?}",
                grad.weights.dim(),
                self.weights.dim()
            )));
        }
        let (lr, m, wd) = (params.lr, params.momentum, params.weight_decay);
        ndarray::Zip::from(&mut self.weights)
            .and(&mut self.weight_velocity)
            .and(&grad.weights)
            .for_each(|w, v, &g| {
                *v = m * *v + g + wd * *w;
                *w -= lr * *v;
            });
        ndarray::Zip::from(&mut self.bias)
            .and(&mut self.bias_velocity)
            .and(&grad.bias)
            .for_each(|b, v, &g| {
                *v = m * *v + g;
                *b -= lr * *v;
            });
        Ok(())
    }

    pub fn remove_inputs(&mut self, removed: &[usize]) -> Result<()> {
        let keep = kept(self.n_in(), removed)?;
        self.weights = self.weights.select(Axis(0), &keep);
        self.weight_velocity = self.weight_velocity.select(Axis(0), &keep);
        Ok(())
    }

    pub fn remove_outputs(&mut self, removed: &[usize]) -> Result<()> {
        let keep = kept(self.n_out(), removed)?;
        self.weights = self.weights.select(Axis(1), &keep);
        self.weight_velocity = self.weight_velocity.select(Axis(1), &keep);
        self.bias = self.bias.select(Axis(0), &keep);
        self.bias_velocity = self.bias_velocity.select(Axis(0), &keep);
        Ok(())
    }
}

fn kept(n: usize, removed: &[usize]) -> Result<Vec<usize>> {
    let map = super::coo::index_map(n, removed)?;
    let keep: Vec<usize> = (0..n).filter(|&i| map[i].is_some()).collect();
    if keep.is_empty() {
        return Err(Error::Shape("cannot remove every neuron of a layer".into()));
    }
    Ok(keep)
}
