use rand::Rng;

use super::Tensor;

/// Half-width of the Glorot-uniform interval.
pub fn glorot_limit(fan_in: usize, fan_out: usize) -> f64 {
    (6.0 / (fan_in + fan_out) as f64).sqrt()
}

/// Samples `shape` from U(-l, l) with `l = sqrt(6 / (fan_in + fan_out))`.
pub fn glorot_uniform<R: Rng + ?Sized>(
    rng: &mut R,
    shape: &[usize],
    fan_in: usize,
    fan_out: usize,
) -> Tensor {
    let limit = glorot_limit(fan_in, fan_out);
    uniform(rng, shape, -limit, limit)
}

pub fn uniform<R: Rng + ?Sized>(rng: &mut R, shape: &[usize], low: f64, high: f64) -> Tensor {
    let n: usize = shape.iter().product();
    let data = (0..n).map(|_| rng.gen_range(low..high)).collect();
    Tensor::new(shape.to_vec(), data).expect("length matches shape")
}
