use rand::Rng;

use super::init::glorot_uniform;
use super::vecops::{axpy, dot, sigmoid};
use super::Tensor;
use crate::{Error, Result};

/// Weights of one LSTM cell. Gate blocks are stacked in the order
/// input, forget, cell candidate, output (`[i, f, g, o]`), each `hidden` rows.
#[derive(Clone, Debug, PartialEq)]
pub struct LstmCellParams {
    /// `[4h × d]`
    pub w: Tensor,
    /// `[4h × h]`
    pub u: Tensor,
    /// `[4h]`
    pub b: Tensor,
}

impl LstmCellParams {
    pub fn zeros(input: usize, hidden: usize) -> Self {
        LstmCellParams {
            w: Tensor::zeros(&[4 * hidden, input]),
            u: Tensor::zeros(&[4 * hidden, hidden]),
            b: Tensor::zeros(&[4 * hidden]),
        }
    }

    /// Glorot-uniform `W` and `U`, zero bias except the forget gate at +1.
    pub fn init<R: Rng + ?Sized>(rng: &mut R, input: usize, hidden: usize) -> Self {
        let w = glorot_uniform(rng, &[4 * hidden, input], input, 4 * hidden);
        let u = glorot_uniform(rng, &[4 * hidden, hidden], hidden, 4 * hidden);
        let mut b = Tensor::zeros(&[4 * hidden]);
        b.data_mut()[hidden..2 * hidden].fill(1.0);
        LstmCellParams { w, u, b }
    }

    pub fn hidden(&self) -> usize {
        self.u.cols()
    }

    pub fn input(&self) -> usize {
        self.w.cols()
    }

    pub fn validate(&self) -> Result<()> {
        let h = self.hidden();
        let d = self.input();
        if self.w.shape() != [4 * h, d] || self.u.shape() != [4 * h, h] || self.b.shape() != [4 * h]
        {
            return Err(Error::Shape(format!(
                "lstm params W {:?}, U {:?}, b {:?}",
                self.w.shape(),
                self.u.shape(),
                self.b.shape()
            )));
        }
        Ok(())
    }

    pub fn zeros_like(&self) -> Self {
        LstmCellParams::zeros(self.input(), self.hidden())
    }

    pub fn add_assign(&mut self, other: &LstmCellParams) {
        super::vecops::add_assign(self.w.data_mut(), other.w.data());
        super::vecops::add_assign(self.u.data_mut(), other.u.data());
        super::vecops::add_assign(self.b.data_mut(), other.b.data());
    }
}

/// Everything the backward pass needs from one forward step.
#[derive(Clone, Debug)]
pub struct LstmStepCache {
    x: Vec<f64>,
    h_prev: Vec<f64>,
    c_prev: Vec<f64>,
    /// Activated gates, `[i, f, g, o]` stacked.
    gates: Vec<f64>,
    tanh_c: Vec<f64>,
}

/// One step over raw slices; returns `(h_t, c_t, cache)`.
pub fn lstm_cell_step_cached(
    x: &[f64],
    h_prev: &[f64],
    c_prev: &[f64],
    p: &LstmCellParams,
) -> (Vec<f64>, Vec<f64>, LstmStepCache) {
    let h = p.hidden();
    let d = p.input();
    let mut gates = p.b.data().to_vec();
    let w = p.w.data();
    let u = p.u.data();
    for (r, g) in gates.iter_mut().enumerate() {
        *g += dot(&w[r * d..(r + 1) * d], x) + dot(&u[r * h..(r + 1) * h], h_prev);
    }
    for (r, g) in gates.iter_mut().enumerate() {
        *g = if (2 * h..3 * h).contains(&r) {
            g.tanh()
        } else {
            sigmoid(*g)
        };
    }
    let mut c = vec![0.0; h];
    let mut tanh_c = vec![0.0; h];
    let mut h_t = vec![0.0; h];
    for k in 0..h {
        let (i, f, g, o) = (gates[k], gates[h + k], gates[2 * h + k], gates[3 * h + k]);
        c[k] = f * c_prev[k] + i * g;
        tanh_c[k] = c[k].tanh();
        h_t[k] = o * tanh_c[k];
    }
    let cache = LstmStepCache {
        x: x.to_vec(),
        h_prev: h_prev.to_vec(),
        c_prev: c_prev.to_vec(),
        gates,
        tanh_c,
    };
    (h_t, c, cache)
}

/// Checked single step: `i,f,o = σ(·)`, `g = tanh(·)`,
/// `c_t = f⊙c_prev + i⊙g`, `h_t = o⊙tanh(c_t)`.
pub fn lstm_cell_step(
    x_t: &Tensor,
    h_prev: &Tensor,
    c_prev: &Tensor,
    params: &LstmCellParams,
) -> Result<(Tensor, Tensor)> {
    params.validate()?;
    let h = params.hidden();
    x_t.expect_shape(&[params.input()], "lstm input")?;
    h_prev.expect_shape(&[h], "lstm h_prev")?;
    c_prev.expect_shape(&[h], "lstm c_prev")?;
    x_t.check_finite("lstm input")?;
    let (h_t, c_t, _) = lstm_cell_step_cached(x_t.data(), h_prev.data(), c_prev.data(), params);
    let (h_t, c_t) = (Tensor::vector(h_t), Tensor::vector(c_t));
    h_t.check_finite("lstm h_t")?;
    c_t.check_finite("lstm c_t")?;
    Ok((h_t, c_t))
}

/// Backward through one step. `dh`/`dc` are the gradients arriving at
/// `h_t`/`c_t`; parameter gradients accumulate into `grads`. Returns
/// `(dx, dh_prev, dc_prev)`, with `dx` empty when `want_dx` is false.
pub fn lstm_cell_backward(
    p: &LstmCellParams,
    cache: &LstmStepCache,
    dh: &[f64],
    dc: &[f64],
    grads: &mut LstmCellParams,
    want_dx: bool,
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let h = p.hidden();
    let d = p.input();
    let gates = &cache.gates;
    let mut da = vec![0.0; 4 * h];
    let mut dc_prev = vec![0.0; h];
    for k in 0..h {
        let (i, f, g, o) = (gates[k], gates[h + k], gates[2 * h + k], gates[3 * h + k]);
        let tc = cache.tanh_c[k];
        let d_o = dh[k] * tc;
        let dct = dc[k] + dh[k] * o * (1.0 - tc * tc);
        let d_i = dct * g;
        let d_g = dct * i;
        let d_f = dct * cache.c_prev[k];
        dc_prev[k] = dct * f;
        da[k] = d_i * i * (1.0 - i);
        da[h + k] = d_f * f * (1.0 - f);
        da[2 * h + k] = d_g * (1.0 - g * g);
        da[3 * h + k] = d_o * o * (1.0 - o);
    }
    let mut dx = if want_dx { vec![0.0; d] } else { Vec::new() };
    let mut dh_prev = vec![0.0; h];
    let w = p.w.data();
    let u = p.u.data();
    {
        let gw = grads.w.data_mut();
        for r in 0..4 * h {
            let a = da[r];
            if a == 0.0 {
                continue;
            }
            axpy(a, &cache.x, &mut gw[r * d..(r + 1) * d]);
            if want_dx {
                axpy(a, &w[r * d..(r + 1) * d], &mut dx);
            }
        }
    }
    {
        let gu = grads.u.data_mut();
        for r in 0..4 * h {
            let a = da[r];
            if a == 0.0 {
                continue;
            }
            axpy(a, &cache.h_prev, &mut gu[r * h..(r + 1) * h]);
            axpy(a, &u[r * h..(r + 1) * h], &mut dh_prev);
        }
    }
    super::vecops::add_assign(grads.b.data_mut(), &da);
    (dx, dh_prev, dc_prev)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_weights_closed_form() {
        let p = LstmCellParams::zeros(3, 2);
        let x = Tensor::vector(vec![0.3, -1.0, 2.0]);
        let h0 = Tensor::vector(vec![0.1, 0.2]);
        let c0 = Tensor::vector(vec![0.8, -0.4]);
        let (h, c) = lstm_cell_step(&x, &h0, &c0, &p).unwrap();
        for k in 0..2 {
            let cp = c0.data()[k];
            assert!((c.data()[k] - 0.5 * cp).abs() < 1e-15);
            assert!((h.data()[k] - 0.5 * (0.5 * cp).tanh()).abs() < 1e-15);
        }
        let zero = Tensor::zeros(&[2]);
        let (h, _) = lstm_cell_step(&Tensor::zeros(&[3]), &h0, &zero, &p).unwrap();
        assert_eq!(h.data(), &[0.0, 0.0]);
    }

    #[test]
    fn scalar_oracle() {
        // h = 1, d = 1: evaluate the four gates by hand.
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let p = LstmCellParams {
            w: super::super::uniform(&mut rng, &[4, 1], -1.0, 1.0),
            u: super::super::uniform(&mut rng, &[4, 1], -1.0, 1.0),
            b: super::super::uniform(&mut rng, &[4], -1.0, 1.0),
        };
        let (x, h0, c0) = (0.7, -0.3, 0.45);
        let pre = |r: usize| p.w.data()[r] * x + p.u.data()[r] * h0 + p.b.data()[r];
        let s = |z: f64| 1.0 / (1.0 + (-z).exp());
        let (i, f, g, o) = (s(pre(0)), s(pre(1)), pre(2).tanh(), s(pre(3)));
        let c = f * c0 + i * g;
        let h = o * c.tanh();
        let (ht, ct) = lstm_cell_step(
            &Tensor::vector(vec![x]),
            &Tensor::vector(vec![h0]),
            &Tensor::vector(vec![c0]),
            &p,
        )
        .unwrap();
        assert!((ht.data()[0] - h).abs() < 1e-12);
        assert!((ct.data()[0] - c).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_shapes() {
        let p = LstmCellParams::zeros(3, 2);
        let err = lstm_cell_step(
            &Tensor::zeros(&[2]),
            &Tensor::zeros(&[2]),
            &Tensor::zeros(&[2]),
            &p,
        );
        assert!(matches!(err, Err(Error::Shape(_))));
    }

    #[test]
    fn init_sets_forget_bias() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = LstmCellParams::init(&mut rng, 5, 3);
        assert_eq!(&p.b.data()[3..6], &[1.0, 1.0, 1.0]);
        assert_eq!(&p.b.data()[0..3], &[0.0, 0.0, 0.0]);
        p.validate().unwrap();
    }
}
