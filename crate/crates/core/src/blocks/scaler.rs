
use super::layout::FeatureDef;
use super::text::clip_kind;
use crate::error::{Error, Result};

/// Per-dimension clipping and z-scoring fitted on a training set. Binary
/// dimensions pass through unchanged.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureScaler {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub binary: Vec<bool>,
    pub clip: Vec<Option<(f64, f64)>>,
}

impl FeatureScaler {
    /// Fits mean and (population) standard deviation of every non-binary
    /// dimension after clipping. Dimensions with zero variance get std 1.
    pub fn fit<'a, I>(layout: &[FeatureDef], rows: I) -> Result<FeatureScaler>
    where
        I: IntoIterator<Item = &'a [f64]>,
    {
        let dim = layout.len();
        let mut sum = vec![0.0; dim];
        let mut rows_seen: Vec<&[f64]> = Vec::new();
        for row in rows {
            Error::check_len("feature row", dim, row.len())?;
            for (i, def) in layout.iter().enumerate() {
                sum[i] += clip_kind(row[i], def.kind);
            }
            rows_seen.push(row);
        }
        if rows_seen.is_empty() {
            return Err(Error::domain("cannot fit a scaler on an empty corpus"));
        }
        let n = rows_seen.len() as f64;
        let mean: Vec<f64> = sum.iter().map(|s| s / n).collect();
        let mut sq = vec![0.0; dim];
        for row in &rows_seen {
            for (i, def) in layout.iter().enumerate() {
                let d = clip_kind(row[i], def.kind) - mean[i];
                sq[i] += d * d;
            }
        }
        let mut scaler = FeatureScaler {
            mean,
            std: sq.iter().map(|s| (s / n).sqrt()).collect(),
            binary: layout.iter().map(|s| s.kind.is_binary()).collect(),
            clip: layout.iter().map(|s| s.kind.clip()).collect(),
        };
        for i in 0..dim {
            if scaler.binary[i] {
                scaler.mean[i] = 0.0;
                scaler.std[i] = 1.0;
            } else if !(scaler.std[i] > 1e-12) {
                scaler.std[i] = 1.0;
            }
        }
        Ok(scaler)
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Clips and standardizes one row in place.
    pub fn apply_in_place(&self, row: &mut [f64]) {
        for (i, x) in row.iter_mut().enumerate() {
            if self.binary[i] {
                continue;
            }
            let v = match self.clip[i] {
                Some((lo, hi)) => x.clamp(lo, hi),
                None => *x,
            };
            *x = (v - self.mean[i]) / self.std[i];
        }
    }

    pub fn apply(&self, row: &[f64]) -> Vec<f64> {
        let mut out = row.to_vec();
        self.apply_in_place(&mut out);
        out
    }

    /// Scales a sequence of rows into one flat `rows x dim` buffer.
    pub fn apply_rows<'a, I>(&self, rows: I) -> Vec<f64>
    where
        I: IntoIterator<Item = &'a [f64]>,
    {
        let mut out = Vec::new();
        for row in rows {
            let start = out.len();
            out.extend_from_slice(row);
            self.apply_in_place(&mut out[start..]);
        }
        out
    }

    /// Inverse of the standardization (clipping is not undone).
    pub fn invert(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .enumerate()
            .map(|(i, &z)| {
                if self.binary[i] {
                    z
                } else {
                    self.mean[i] + self.std[i] * z
                }
            })
            .collect()
    }

    /// Rounds all statistics to single precision, as stored in model files.
    pub fn quantize(&mut self) {
        for v in self.mean.iter_mut().chain(self.std.iter_mut()) {
            *v = *v as f32 as f64;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blocks::layout::{FeatureKind, FeatureDef};

    fn layout() -> Vec<FeatureDef> {
        vec![
            FeatureDef {
                name: "const".into(),
                kind: FeatureKind::Continuous { clip: None },
            },
            FeatureDef {
                name: "two".into(),
                kind: FeatureKind::Continuous { clip: None },
            },
            FeatureDef {
                name: "bin".into(),
                kind: FeatureKind::Binary,
            },
            FeatureDef {
                name: "clipped".into(),
                kind: FeatureKind::Continuous {
                    clip: Some((0.0, 1.0)),
                },
            },
        ]
    }

    #[test]
    fn degenerate_and_two_point_dims() {
        let rows = [vec![5.0, 0.0, 1.0, -3.0], vec![5.0, 2.0, 0.0, 9.0]];
        let s = FeatureScaler::fit(&layout(), rows.iter().map(|r| r.as_slice())).unwrap();
        assert_eq!(s.std[0], 1.0);
        assert_eq!((s.mean[1], s.std[1]), (1.0, 1.0));
        assert_eq!(s.apply(&rows[0]), vec![0.0, -1.0, 1.0, -1.0]);
        assert_eq!(s.apply(&rows[1]), vec![0.0, 1.0, 0.0, 1.0]);
    }

    #[test]
    fn binary_is_identity_and_roundtrip() {
        let rows = [vec![1.0, 3.0, 1.0, 0.2], vec![2.0, 7.0, 0.0, 0.4], vec![4.0, 8.0, 1.0, 0.9]];
        let s = FeatureScaler::fit(&layout(), rows.iter().map(|r| r.as_slice())).unwrap();
        for r in &rows {
            let z = s.apply(r);
            assert_eq!(z[2], r[2]);
            let back = s.invert(&z);
            for (a, b) in back.iter().zip(r) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn empty_corpus_is_an_error() {
        let rows: Vec<&[f64]> = Vec::new();
        assert!(FeatureScaler::fit(&layout(), rows).is_err());
    }

    #[test]
    fn wrong_width_is_an_error() {
        let rows = [vec![1.0, 2.0]];
        assert!(FeatureScaler::fit(&layout(), rows.iter().map(|r| r.as_slice())).is_err());
    }
}
