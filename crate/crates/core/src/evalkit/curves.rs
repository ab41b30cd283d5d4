use serde::{Deserialize, Serialize};

use super::check_inputs;
use crate::{Error, Result};

/// Curve points `(x, y)` with non-decreasing `x`, plus the trapezoid area.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub points: Vec<(f64, f64)>,
    pub auc: f64,
}

impl Curve {
    pub fn to_csv(&self, x: &str, y: &str) -> String {
        let mut out = format!("{x},{y}\n");
        for (a, b) in &self.points {
            out.push_str(&format!("{a},{b}\n"));
        }
        out
    }
}

fn trapezoid(points: &[(f64, f64)]) -> f64 {
    points
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0)
        .sum()
}

/// Cumulative (tp, fp) after each distinct score, highest score first.
fn sweep(labels: &[bool], probs: &[f64]) -> Vec<(u64, u64)> {
    let mut idx: Vec<usize> = (0..probs.len()).collect();
    idx.sort_by(|&a, &b| probs[b].total_cmp(&probs[a]));
    let mut out = Vec::new();
    let (mut tp, mut fp) = (0u64, 0u64);
    for (k, &i) in idx.iter().enumerate() {
        if labels[i] {
            tp += 1;
        } else {
            fp += 1;
        }
        let last_of_group = idx.get(k + 1).map_or(true, |&j| probs[j] != probs[i]);
        if last_of_group {
            out.push((tp, fp));
        }
    }
    out
}

/// ROC curve through every distinct-score threshold, from (0,0) to (1,1).
pub fn roc_auc(labels: &[bool], probs: &[f64]) -> Result<Curve> {
    check_inputs(labels, probs)?;
    let pos = labels.iter().filter(|&&y| y).count() as f64;
    let neg = labels.len() as f64 - pos;
    if pos == 0.0 || neg == 0.0 {
        return Err(Error::InvalidArgument("ROC needs both classes".into()));
    }
    let mut points = vec![(0.0, 0.0)];
    points.extend(sweep(labels, probs).into_iter().map(|(tp, fp)| (fp as f64 / neg, tp as f64 / pos)));
    let auc = trapezoid(&points);
    Ok(Curve { points, auc })
}

/// Precision-recall points per distinct-score threshold, descending score.
/// The curve is anchored at recall 0 with the precision of the first
/// threshold and ends at recall 1; the area is a trapezoid over recall.
pub fn pr_auc(labels: &[bool], probs: &[f64]) -> Result<Curve> {
    check_inputs(labels, probs)?;
    let pos = labels.iter().filter(|&&y| y).count() as f64;
    if pos == 0.0 {
        return Err(Error::InvalidArgument("PR curve needs at least one positive".into()));
    }
    let pts: Vec<(f64, f64)> = sweep(labels, probs)
        .into_iter()
        .map(|(tp, fp)| (tp as f64 / pos, tp as f64 / (tp + fp) as f64))
        .collect();
    let mut points = vec![(0.0, pts[0].1)];
    points.extend(pts);
    let auc = trapezoid(&points);
    Ok(Curve { points, auc })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roc_examples() {
        let r = roc_auc(&[true, true, false, false], &[0.9, 0.8, 0.3, 0.1]).unwrap();
        assert_eq!(r.auc, 1.0);
        assert_eq!(r.points.first(), Some(&(0.0, 0.0)));
        assert_eq!(r.points.last(), Some(&(1.0, 1.0)));
        let r = roc_auc(&[true, false, true, false], &[0.9, 0.8, 0.3, 0.1]).unwrap();
        assert!((r.auc - 0.75).abs() < 1e-12);
        assert!(roc_auc(&[true, true], &[0.1, 0.2]).is_err());
    }

    #[test]
    fn ties_count_half() {
        let r = roc_auc(&[true, false], &[0.5, 0.5]).unwrap();
        assert_eq!(r.auc, 0.5);
    }

    #[test]
    fn pr_examples() {
        let p = pr_auc(&[true, true, false, false], &[0.9, 0.8, 0.3, 0.1]).unwrap();
        assert_eq!(p.auc, 1.0);
        assert_eq!(p.points.last().unwrap().0, 1.0);
        assert!(pr_auc(&[false, false], &[0.1, 0.2]).is_err());
    }

    #[test]
    fn pr_hand_instance() {
        // Scores 0.9(+) 0.7(-) 0.5(+) 0.2(-): thresholds give
        // (0.5, 1), (0.5, 0.5), (1, 2/3), (1, 0.5).
        let p = pr_auc(&[true, false, true, false], &[0.9, 0.7, 0.5, 0.2]).unwrap();
        let want = [(0.0, 1.0), (0.5, 1.0), (0.5, 0.5), (1.0, 2.0 / 3.0), (1.0, 0.5)];
        assert_eq!(p.points.len(), want.len());
        for (a, b) in p.points.iter().zip(want) {
            assert!((a.0 - b.0).abs() < 1e-12 && (a.1 - b.1).abs() < 1e-12);
        }
        let area = 0.5 * 1.0 + 0.5 * (0.5 + 2.0 / 3.0) / 2.0;
        assert!((p.auc - area).abs() < 1e-12);
    }
}
