use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::error::{Error, Result};

/// Binary confusion counts with HATE as the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionMatrix {
    pub fn new(tp: u64, fp: u64, fn_: u64, tn: u64) -> Self {
        ConfusionMatrix { tp, fp, fn_, tn }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    /// The same outcomes with the positive and negative classes exchanged.
    pub fn swapped(&self) -> Self {
        ConfusionMatrix::new(self.tn, self.fn_, self.fp, self.tp)
    }
}

pub fn confusion(y_true: &[Label], y_pred: &[Label]) -> Result<ConfusionMatrix> {
    if y_true.len() != y_pred.len() {
        return Err(Error::LengthMismatch {
            left: y_true.len(),
            right: y_pred.len(),
        });
    }
    if y_true.is_empty() {
        return Err(Error::Empty);
    }
    let mut cm = ConfusionMatrix::default();
    for (t, p) in y_true.iter().zip(y_pred) {
        match (t, p) {
            (Label::Hate, Label::Hate) => cm.tp += 1,
            (Label::NonHate, Label::Hate) => cm.fp += 1,
            (Label::Hate, Label::NonHate) => cm.fn_ += 1,
            (Label::NonHate, Label::NonHate) => cm.tn += 1,
        }
    }
    Ok(cm)
}

pub fn accuracy(cm: &ConfusionMatrix) -> Result<f64> {
    match cm.total() {
        0 => Err(Error::Empty),
        n => Ok((cm.tp + cm.tn) as f64 / n as f64),
    }
}

/// Matthews correlation coefficient; 0 when any marginal is empty.
pub fn mcc(cm: &ConfusionMatrix) -> Result<f64> {
    if cm.total() == 0 {
        return Err(Error::Empty);
    }
    let (tp, fp, fn_, tn) = (cm.tp as f64, cm.fp as f64, cm.fn_ as f64, cm.tn as f64);
    let margins = [tp + fp, tp + fn_, tn + fp, tn + fn_];
    if margins.contains(&0.0) {
        return Ok(0.0);
    }
    // Pairing each margin with its label-swapped counterpart keeps the result
    // exactly symmetric under swapping the positive class.
    let denom = (margins[0] * margins[3]).sqrt() * (margins[1] * margins[2]).sqrt();
    Ok(((tp * tn - fp * fn_) / denom).clamp(-1.0, 1.0))
}
