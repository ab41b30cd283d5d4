use serde::{Deserialize, Serialize};

use super::plot::{line_plot_svg, Series};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub loss: f64,
    pub accuracy: f64,
    #[serde(default)]
    pub val_loss: Option<f64>,
    #[serde(default)]
    pub val_accuracy: Option<f64>,
}

/// Per-epoch training curve of one model.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingHistory {
    pub records: Vec<EpochRecord>,
}

impl TrainingHistory {
    pub fn push(&mut self, r: EpochRecord) {
        self.records.push(r);
    }

    pub fn last(&self) -> Option<&EpochRecord> {
        self.records.last()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// `epoch,loss,accuracy[,val_loss,val_accuracy]`; validation columns
    /// appear only when some epoch has them, blank where missing.
    pub fn to_csv(&self) -> String {
        self.to_csv_labeled("accuracy")
    }

    /// Same as [`to_csv`](Self::to_csv) with a custom accuracy column name.
    pub fn to_csv_labeled(&self, acc: &str) -> String {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let with_val = self
            .records
            .iter()
            .any(|r| r.val_loss.is_some() || r.val_accuracy.is_some());
        let mut out = format!("epoch,loss,{acc}");
        if with_val {
            out.push_str(&format!(",val_loss,val_{acc}"));
        }
        out.push('\n');
        for r in &self.records {
            out.push_str(&format!("{},{},{}", r.epoch, r.loss, r.accuracy));
            if with_val {
                out.push_str(&format!(",{},{}", opt(r.val_loss), opt(r.val_accuracy)));
            }
            out.push('\n');
        }
        out
    }

    fn series(&self, name: &str, f: impl Fn(&EpochRecord) -> Option<f64>) -> Option<Series> {
        let points: Vec<(f64, f64)> = self
            .records
            .iter()
            .filter_map(|r| f(r).map(|v| (r.epoch as f64, v)))
            .collect();
        (!points.is_empty()).then(|| Series::new(name, points))
    }

    pub fn loss_svg(&self, title: &str) -> String {
        let s: Vec<Series> = [self.series("train", |r| Some(r.loss)), self.series("validation", |r| r.val_loss)]
            .into_iter()
            .flatten()
            .collect();
        line_plot_svg(title, "epoch", "loss", &s)
    }

    pub fn accuracy_svg(&self, title: &str) -> String {
        let s: Vec<Series> = [
            self.series("train", |r| Some(r.accuracy)),
            self.series("validation", |r| r.val_accuracy),
        ]
        .into_iter()
        .flatten()
        .collect();
        line_plot_svg(title, "epoch", "accuracy", &s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_blanks() {
        let mut h = TrainingHistory::default();
        h.push(EpochRecord {
            epoch: 1,
            loss: 0.5,
            accuracy: 0.75,
            val_loss: None,
            val_accuracy: Some(0.5),
        });
        assert_eq!(h.to_csv(), "epoch,loss,accuracy,val_loss,val_accuracy\n1,0.5,0.75,,0.5\n");
        assert!(h.loss_svg("t").contains("<polyline"));
        let mut plain = TrainingHistory::default();
        plain.push(EpochRecord {
            epoch: 1,
            loss: 1.0,
            accuracy: 0.5,
            val_loss: None,
            val_accuracy: None,
        });
        assert_eq!(plain.to_csv_labeled("token_accuracy"), "epoch,loss,token_accuracy\n1,1,0.5\n");
    }
}
