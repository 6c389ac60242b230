use std::ops::{Add, AddAssign};

use rayon::prelude::*;

use super::corpus::Page;
use crate::error::{Error, Result};
use crate::inference::InferenceConfig;
use crate::model::Model;

/// Block counts with content as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Confusion {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    pub fn_: u64,
}

impl Confusion {
    pub fn from_labels(predicted: &[u8], gold: &[u8]) -> Result<Confusion> {
        Error::check_len("predicted labels", gold.len(), predicted.len())?;
        let mut c = Confusion::default();
        for (&p, &g) in predicted.iter().zip(gold) {
            match (p, g) {
                (1, 1) => c.tp += 1,
                (1, _) => c.fp += 1,
                (_, 1) => c.fn_ += 1,
                _ => c.tn += 1,
            }
        }
        Ok(c)
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn metrics(&self) -> Metrics {
        let ratio = |a: u64, b: u64| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let precision = ratio(self.tp, self.tp + self.fp);
        let recall = ratio(self.tp, self.tp + self.fn_);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Metrics {
            accuracy: ratio(self.tp + self.tn, self.total()),
            precision,
            recall,
            f1,
            blocks: self.total(),
        }
    }
}

impl Add for Confusion {
    type Output = Confusion;

    fn add(self, o: Confusion) -> Confusion {
        Confusion {
            tp: self.tp + o.tp,
            fp: self.fp + o.fp,
            tn: self.tn + o.tn,
            fn_: self.fn_ + o.fn_,
        }
    }
}

impl AddAssign for Confusion {
    fn add_assign(&mut self, o: Confusion) {
        *self = *self + o;
    }
}

impl std::iter::Sum for Confusion {
    fn sum<I: Iterator<Item = Confusion>>(iter: I) -> Confusion {
        iter.fold(Confusion::default(), Add::add)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub blocks: u64,
}

/// Decodes every page and pools the block counts.
pub fn evaluate<'a, I>(model: &Model, pages: I, cfg: &InferenceConfig) -> Result<(Metrics, Confusion)>
where
    I: IntoIterator<Item = &'a Page>,
{
    let pages: Vec<&Page> = pages.into_iter().collect();
    if pages.is_empty() {
        return Err(Error::domain("cannot evaluate an empty split"));
    }
    let per_page = pages
        .par_iter()
        .map(|p| {
            let (pred, _) = model.decode(&p.block_features, &p.edge_features, cfg)?;
            Confusion::from_labels(&pred, &p.labels)
        })
        .collect::<Result<Vec<_>>>()?;
    let total: Confusion = per_page.into_iter().sum();
    Ok((total.metrics(), total))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_prediction() {
        let g = [1, 0, 1, 1, 0];
        let m = Confusion::from_labels(&g, &g).unwrap().metrics();
        assert_eq!((m.accuracy, m.precision, m.recall, m.f1), (1.0, 1.0, 1.0, 1.0));
    }

    #[test]
    fn all_content_prediction() {
        let gold = [1, 1, 1, 0, 0, 1, 1, 0, 1, 0];
        let m = Confusion::from_labels(&[1; 10], &gold).unwrap().metrics();
        assert!((m.precision - 0.6).abs() < 1e-15);
        assert_eq!(m.recall, 1.0);
    }

    #[test]
    fn hand_counted_case() {
        // 10 blocks, 2 false positives (idx 1, 7), 1 false negative (idx 4)
        let gold = [1, 0, 1, 1, 1, 0, 0, 0, 1, 0];
        let pred = [1, 1, 1, 1, 0, 0, 0, 1, 1, 0];
        let c = Confusion::from_labels(&pred, &gold).unwrap();
        assert_eq!(c, Confusion { tp: 4, fp: 2, tn: 3, fn_: 1 });
        let m = c.metrics();
        assert_eq!(m.accuracy, 0.7);
        assert_eq!(m.precision, 4.0 / 6.0);
        assert_eq!(m.recall, 0.8);
        let f1 = 2.0 * (4.0 / 6.0) * 0.8 / (4.0 / 6.0 + 0.8);
        assert!((m.f1 - f1).abs() < 1e-15);
    }

    #[test]
    fn degenerate_f1_is_zero() {
        let m = Confusion::from_labels(&[0, 0], &[0, 0]).unwrap().metrics();
        assert_eq!((m.precision, m.recall, m.f1, m.accuracy), (0.0, 0.0, 0.0, 1.0));
    }

    #[test]
    fn pooled_equals_summed_pages() {
        let a = Confusion::from_labels(&[1, 0, 1], &[1, 1, 0]).unwrap();
        let b = Confusion::from_labels(&[0, 0], &[0, 1]).unwrap();
        let pooled = Confusion::from_labels(&[1, 0, 1, 0, 0], &[1, 1, 0, 0, 1]).unwrap();
        assert_eq!(a + b, pooled);
    }
}
