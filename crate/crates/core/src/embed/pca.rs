use super::table::EmbeddingTable;
use crate::numkit::Tensor;
use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct PcaProjection {
    /// `[n × k]` projected points.
    pub points: Tensor,
    /// Top eigenvalue / trace, one per component.
    pub ratios: Vec<f64>,
    /// `[k × d]` unit components.
    pub components: Tensor,
}

/// Eigen-decomposition of a symmetric `n × n` row-major matrix by cyclic
/// Jacobi rotations. Returns eigenvalues in descending order with the
/// matching eigenvectors as rows.
pub fn symmetric_eigen(a: &[f64], n: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    assert_eq!(a.len(), n * n);
    let mut m = a.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let scale: f64 = m.iter().map(|x| x * x).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i * n + j] * m[i * n + j])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq.abs() <= f64::MIN_POSITIVE {
                    continue;
                }
                let (app, aqq) = (m[p * n + p], m[q * n + q]);
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[k * n + p], m[k * n + q]);
                    m[k * n + p] = c * mkp - s * mkq;
                    m[k * n + q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[p * n + k], m[q * n + k]);
                    m[p * n + k] = c * mpk - s * mqk;
                    m[q * n + k] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[k * n + p], v[k * n + q]);
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[j * n + j].total_cmp(&m[i * n + i]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| m[i * n + i]).collect();
    let vectors = order
        .iter()
        .map(|&i| (0..n).map(|k| v[k * n + i]).collect())
        .collect();
    (values, vectors)
}

/// Projects mean-centred rows of `x` (`[n × d]`) onto the top `k`
/// covariance eigenvectors. Each component is signed so that its first
/// non-negligible loading is positive.
pub fn pca(x: &Tensor, k: usize) -> Result<PcaProjection> {
    let (n, d) = (x.rows(), x.cols());
    if k > d {
        return Err(Error::InvalidArgument(format!("{k} components requested from {d}-d data")));
    }
    if n < k || n == 0 {
        return Err(Error::InvalidArgument(format!("{n} points for {k} components")));
    }
    let mut mean = vec![0.0; d];
    for i in 0..n {
        crate::numkit::vecops::add_assign(&mut mean, x.row(i));
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let centred: Vec<Vec<f64>> = (0..n)
        .map(|i| x.row(i).iter().zip(&mean).map(|(a, m)| a - m).collect())
        .collect();
    let mut cov = vec![0.0; d * d];
    for r in &centred {
        for a in 0..d {
            if r[a] == 0.0 {
                continue;
            }
            for b in a..d {
                cov[a * d + b] += r[a] * r[b];
            }
        }
    }
    let denom = (n.max(2) - 1) as f64;
    for a in 0..d {
        for b in a..d {
            cov[a * d + b] /= denom;
            cov[b * d + a] = cov[a * d + b];
        }
    }
    let trace: f64 = (0..d).map(|i| cov[i * d + i]).sum();
    let (values, mut vectors) = symmetric_eigen(&cov, d);
    vectors.truncate(k);
    let tol = 1e-12 * vectors.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
    for vec in &mut vectors {
        if let Some(first) = vec.iter().copied().find(|x| x.abs() > tol) {
            if first < 0.0 {
                vec.iter_mut().for_each(|x| *x = -*x);
            }
        }
    }
    let ratios = values
        .iter()
        .take(k)
        .map(|&l| if trace > 0.0 { l.max(0.0) / trace } else { 0.0 })
        .collect();
    let mut points = Vec::with_capacity(n * k);
    for r in &centred {
        for vec in &vectors {
            points.push(crate::numkit::vecops::dot(r, vec));
        }
    }
    Ok(PcaProjection {
        points: Tensor::new(vec![n, k], points)?,
        ratios,
        components: Tensor::new(vec![k, d], vectors.concat())?,
    })
}

/// PCA over every row of an embedding table.
pub fn pca_project(table: &EmbeddingTable, components: usize) -> Result<PcaProjection> {
    pca(&table.matrix, components)
}

/// `token,x,y` CSV of the first two projected coordinates.
pub fn projection_csv(table: &EmbeddingTable, proj: &PcaProjection, rows: &[usize]) -> String {
    let mut out = String::from("token,x,y\n");
    for &i in rows {
        let p = proj.points.row(i);
        let y = p.get(1).copied().unwrap_or(0.0);
        out.push_str(&format!("{},{},{}\n", super::csv_field(table.vocab.token(i)), p[0], y));
    }
    out
}
