use super::Tensor;
use crate::Result;

/// Added inside the AdaGrad square root.
pub const ADAGRAD_EPS: f64 = 1e-8;

/// Adam moments and constants for one parameter tensor.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    pub t: u64,
    pub m: Tensor,
    pub v: Tensor,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamState {
    /// Zero moments with the usual constants (β1 0.9, β2 0.999, ε 1e-8).
    pub fn new(shape: &[usize], lr: f64) -> Self {
        AdamState {
            t: 0,
            m: Tensor::zeros(shape),
            v: Tensor::zeros(shape),
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// One bias-corrected Adam update of `param` in place.
pub fn adam_step(param: &mut Tensor, grad: &Tensor, state: &mut AdamState) -> Result<()> {
    param.expect_shape(grad.shape(), "adam gradient")?;
    param.expect_shape(state.m.shape(), "adam moment")?;
    state.t += 1;
    let (b1, b2) = (state.beta1, state.beta2);
    let c1 = 1.0 - b1.powi(state.t as i32);
    let c2 = 1.0 - b2.powi(state.t as i32);
    let m = state.m.data_mut();
    let v = state.v.data_mut();
    for (k, (p, &g)) in param.data_mut().iter_mut().zip(grad.data()).enumerate() {
        m[k] = b1 * m[k] + (1.0 - b1) * g;
        v[k] = b2 * v[k] + (1.0 - b2) * g * g;
        let m_hat = m[k] / c1;
        let v_hat = v[k] / c2;
        *p -= state.lr * m_hat / (v_hat.sqrt() + state.eps);
    }
    Ok(())
}

/// `acc += g²; param -= lr·g/√(acc+ε)`
pub fn adagrad_step(param: &mut [f64], grad: &[f64], acc: &mut [f64], lr: f64) {
    for ((p, &g), a) in param.iter_mut().zip(grad).zip(acc.iter_mut()) {
        *a += g * g;
        *p -= lr * g / (*a + ADAGRAD_EPS).sqrt();
    }
}
