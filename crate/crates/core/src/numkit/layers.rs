use rand::Rng;

use super::vecops::{axpy, dot, sigmoid, softmax_in_place};
use super::Tensor;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Sigmoid,
    Softmax,
    Tanh,
    Identity,
}

impl Activation {
    fn apply_row(self, row: &mut [f64]) {
        match self {
            Activation::Relu => row.iter_mut().for_each(|v| *v = v.max(0.0)),
            Activation::Sigmoid => row.iter_mut().for_each(|v| *v = sigmoid(*v)),
            Activation::Tanh => row.iter_mut().for_each(|v| *v = v.tanh()),
            Activation::Softmax => softmax_in_place(row),
            Activation::Identity => {}
        }
    }

    /// Maps the gradient w.r.t. the activated output `y` back to the
    /// pre-activation, in place.
    fn backward_row(self, y: &[f64], dy: &mut [f64]) {
        match self {
            Activation::Relu => {
                for (d, &v) in dy.iter_mut().zip(y) {
                    if v <= 0.0 {
                        *d = 0.0;
                    }
                }
            }
            Activation::Sigmoid => {
                for (d, &v) in dy.iter_mut().zip(y) {
                    *d *= v * (1.0 - v);
                }
            }
            Activation::Tanh => {
                for (d, &v) in dy.iter_mut().zip(y) {
                    *d *= 1.0 - v * v;
                }
            }
            Activation::Softmax => {
                let s = dot(dy, y);
                for (d, &v) in dy.iter_mut().zip(y) {
                    *d = v * (*d - s);
                }
            }
            Activation::Identity => {}
        }
    }
}

fn check_dense_shapes(x: &Tensor, w: &Tensor, b: &Tensor) -> Result<(usize, usize, usize)> {
    if x.shape().len() != 2 || w.shape().len() != 2 || x.shape()[1] != w.shape()[0] {
        return Err(Error::Shape(format!(
            "dense input {:?} vs weights {:?}",
            x.shape(),
            w.shape()
        )));
    }
    let m = w.shape()[1];
    if b.shape() != [m] {
        return Err(Error::Shape(format!(
            "dense bias {:?} vs weights {:?}",
            b.shape(),
            w.shape()
        )));
    }
    Ok((x.shape()[0], x.shape()[1], m))
}

/// `act(x·W + b)` for `x: [n×d]`, `W: [d×m]`, `b: [m]`.
pub fn dense_forward(x: &Tensor, w: &Tensor, b: &Tensor, activation: Activation) -> Result<Tensor> {
    let (n, d, m) = check_dense_shapes(x, w, b)?;
    x.check_finite("dense input")?;
    let mut out = vec![0.0; n * m];
    for i in 0..n {
        let orow = &mut out[i * m..(i + 1) * m];
        orow.copy_from_slice(b.data());
        let xrow = x.row(i);
        for k in 0..d {
            if xrow[k] != 0.0 {
                axpy(xrow[k], &w.data()[k * m..(k + 1) * m], orow);
            }
        }
        activation.apply_row(orow);
    }
    Tensor::new(vec![n, m], out)
}

#[derive(Clone, Debug)]
pub struct DenseGrads {
    pub dx: Tensor,
    pub dw: Tensor,
    pub db: Tensor,
}

/// Backward pass of [`dense_forward`]; `y` is the forward output and `dy`
/// the loss gradient with respect to it.
pub fn dense_backward(
    x: &Tensor,
    w: &Tensor,
    y: &Tensor,
    dy: &Tensor,
    activation: Activation,
) -> Result<DenseGrads> {
    let n = x.rows();
    let d = x.cols();
    let m = w.cols();
    y.expect_shape(&[n, m], "dense output")?;
    dy.expect_shape(&[n, m], "dense output gradient")?;
    let mut dz = dy.clone();
    for i in 0..n {
        let yrow = y.row(i);
        activation.backward_row(yrow, dz.row_mut(i));
    }
    let mut dx = Tensor::zeros(&[n, d]);
    let mut dw = Tensor::zeros(&[d, m]);
    let mut db = Tensor::zeros(&[m]);
    for i in 0..n {
        let dzrow = dz.row(i);
        let xrow = x.row(i);
        super::vecops::add_assign(db.data_mut(), dzrow);
        for k in 0..d {
            let wrow = &w.data()[k * m..(k + 1) * m];
            dx.row_mut(i)[k] = dot(wrow, dzrow);
            if xrow[k] != 0.0 {
                axpy(xrow[k], dzrow, &mut dw.data_mut()[k * m..(k + 1) * m]);
            }
        }
    }
    Ok(DenseGrads { dx, dw, db })
}

/// Per-entry multipliers applied by a dropout pass.
#[derive(Clone, Debug)]
pub struct DropoutMask {
    scale: Option<Vec<f64>>,
}

impl DropoutMask {
    pub fn identity() -> Self {
        DropoutMask { scale: None }
    }

    pub fn backward(&self, dy: &Tensor) -> Tensor {
        match &self.scale {
            None => dy.clone(),
            Some(s) => {
                let mut out = dy.clone();
                for (o, k) in out.data_mut().iter_mut().zip(s) {
                    *o *= k;
                }
                out
            }
        }
    }
}

/// Inverted dropout: in training each entry is zeroed with probability
/// `rate` and survivors are scaled by `1/(1-rate)`; inference is identity.
pub fn dropout<R: Rng + ?Sized>(
    x: &Tensor,
    rate: f64,
    training: bool,
    rng: &mut R,
) -> Result<(Tensor, DropoutMask)> {
    if !(0.0..1.0).contains(&rate) {
        return Err(Error::InvalidArgument(format!(
            "dropout rate {rate} outside [0, 1)"
        )));
    }
    if !training || rate == 0.0 {
        return Ok((x.clone(), DropoutMask::identity()));
    }
    let keep = 1.0 / (1.0 - rate);
    let scale: Vec<f64> = (0..x.len())
        .map(|_| if rng.gen::<f64>() < rate { 0.0 } else { keep })
        .collect();
    let mut out = x.clone();
    for (o, k) in out.data_mut().iter_mut().zip(&scale) {
        *o *= k;
    }
    Ok((out, DropoutMask { scale: Some(scale) }))
}
