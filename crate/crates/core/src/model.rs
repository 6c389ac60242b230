//! A trained extractor (scalers, both networks, lambda) and its file format.
//!
//! File layout, little endian throughout:
//!
//! ```text
//! "W2T1"  u32 version  [u8; 32] feature layout hash  f32 lambda
//! scaler (blocks)  scaler (edges)
//! u32 kernel count, then per kernel: u32 in, u32 out, u32 width, f32 weights
//!   (unary kernels first, then pairwise)
//! scaler: u32 dim, dim x u8 binary flag, dim x f32 mean, dim x f32 std
//! ```

use std::path::Path;

use crate::blocks::{block_layout, edge_layout, layout_hash, BlockFeatures, EdgeFeatures, FeatureScaler, FeatureDef, PageFeatures};
use crate::cnn::{Architecture, CnnParams, ConvKernel};
use crate::error::{Error, Result};
use crate::inference::{viterbi, InferenceConfig, PotentialSequence};

pub const MAGIC: &[u8; 4] = b"W2T1";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub block_scaler: FeatureScaler,
    pub edge_scaler: FeatureScaler,
    pub unary: CnnParams,
    pub pairwise: CnnParams,
    pub lambda: f64,
}

/// One block of an extraction result.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockRecord {
    pub index: usize,
    pub text: String,
    pub label: u8,
    pub p_content: f64,
    pub source_offset: usize,
    pub source_length: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Extraction {
    pub blocks: Vec<BlockRecord>,
}

impl Extraction {
    pub fn labels(&self) -> Vec<u8> {
        self.blocks.iter().map(|b| b.label).collect()
    }

    /// Content blocks, one per line.
    pub fn text(&self) -> String {
        let kept: Vec<&str> = self
            .blocks
            .iter()
            .filter(|b| b.label == 1)
            .map(|b| b.text.as_str())
            .collect();
        kept.join("\n")
    }
}

fn identity_scaler(layout: &[FeatureDef]) -> FeatureScaler {
    FeatureScaler {
        mean: vec![0.0; layout.len()],
        std: vec![1.0; layout.len()],
        binary: layout.iter().map(|s| s.kind.is_binary()).collect(),
        clip: layout.iter().map(|s| s.kind.clip()).collect(),
    }
}

impl Model {
    /// All weights zero: every potential is uniform, so decoding keeps every
    /// block.
    pub fn uniform() -> Self {
        Model {
            block_scaler: identity_scaler(block_layout()),
            edge_scaler: identity_scaler(edge_layout()),
            unary: CnnParams::zeros(Architecture::Unary),
            pairwise: CnnParams::zeros(Architecture::Pairwise),
            lambda: 0.1,
        }
    }

    pub fn inference_config(&self) -> InferenceConfig {
        InferenceConfig::new(self.lambda).expect("model lambda is validated on construction")
    }

    /// Rounds all stored numbers to single precision so that a saved and
    /// reloaded model behaves identically.
    pub fn quantize(&mut self) {
        self.block_scaler.quantize();
        self.edge_scaler.quantize();
        self.unary.quantize();
        self.pairwise.quantize();
        self.lambda = self.lambda as f32 as f64;
    }

    /// Unary and pairwise probabilities for a page; `None` for a page without
    /// blocks.
    pub fn potentials(&self, blocks: &[BlockFeatures], edges: &[EdgeFeatures]) -> Result<Option<PotentialSequence>> {
        Error::check_len("edge features", blocks.len().saturating_sub(1), edges.len())?;
        if blocks.is_empty() {
            return Ok(None);
        }
        let x = self.block_scaler.apply_rows(blocks.iter().map(|b| b.values()));
        let unary = self.unary.probabilities(&x, blocks.len())?;
        let pairwise = if edges.is_empty() {
            Vec::new()
        } else {
            let e = self.edge_scaler.apply_rows(edges.iter().map(|e| e.values()));
            self.pairwise.probabilities(&e, edges.len())?
        };
        PotentialSequence::from_flat(&unary, &pairwise).map(Some)
    }

    pub fn decode(&self, blocks: &[BlockFeatures], edges: &[EdgeFeatures], cfg: &InferenceConfig) -> Result<(Vec<u8>, Option<PotentialSequence>)> {
        match self.potentials(blocks, edges)? {
            None => Ok((Vec::new(), None)),
            Some(pot) => Ok((viterbi(&pot, cfg)?, Some(pot))),
        }
    }

    pub fn extract_features(&self, page: &PageFeatures, cfg: &InferenceConfig) -> Result<Extraction> {
        let (labels, pot) = self.decode(&page.block_features, &page.edge_features, cfg)?;
        let blocks = page
            .blocks
            .iter()
            .zip(&labels)
            .enumerate()
            .map(|(i, (b, &label))| BlockRecord {
                index: b.index,
                text: b.text.clone(),
                label,
                p_content: pot.as_ref().map_or(0.0, |p| p.unary()[i][1]),
                source_offset: b.source_offset,
                source_length: b.source_length,
            })
            .collect();
        Ok(Extraction { blocks })
    }

    /// Parse, featurize, score and decode one page.
    pub fn extract(&self, markup: &[u8], cfg: &InferenceConfig) -> Result<Extraction> {
        let page = PageFeatures::from_html(markup)?;
        self.extract_features(&page, cfg)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.extend_from_slice(&layout_hash());
        put_f32(&mut out, self.lambda);
        write_scaler(&mut out, &self.block_scaler);
        write_scaler(&mut out, &self.edge_scaler);
        let kernels: Vec<&ConvKernel> = self.unary.layers.iter().chain(&self.pairwise.layers).collect();
        out.extend_from_slice(&(kernels.len() as u32).to_le_bytes());
        for k in kernels {
            for dim in [k.in_channels, k.out_channels, k.width] {
                out.extend_from_slice(&(dim as u32).to_le_bytes());
            }
            for &w in &k.weights {
                put_f32(&mut out, w);
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Model> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(4)? != MAGIC {
            return Err(Error::ModelFormat("not a model file (bad magic)".into()));
        }
        let version = r.u32()?;
        if version != FORMAT_VERSION {
            return Err(Error::ModelFormat(format!("unsupported format version {version}")));
        }
        if r.take(32)? != layout_hash() {
            return Err(Error::ModelFormat(
                "feature layout hash does not match this build".into(),
            ));
        }
        let lambda = r.f32()?;
        let block_scaler = read_scaler(&mut r, block_layout())?;
        let edge_scaler = read_scaler(&mut r, edge_layout())?;
        let count = r.u32()? as usize;
        if count != 10 {
            return Err(Error::ModelFormat(format!("expected 10 kernels, found {count}")));
        }
        let mut kernels = Vec::with_capacity(count);
        for _ in 0..count {
            let (i, o, k) = (r.u32()? as usize, r.u32()? as usize, r.u32()? as usize);
            if i == 0 || o == 0 || k % 2 == 0 || i * o * k > r.remaining() / 4 {
                return Err(Error::ModelFormat(format!("bad kernel header ({i}, {o}, {k})")));
            }
            let mut kernel = ConvKernel::zeros(i, o, k);
            for w in &mut kernel.weights {
                *w = r.f32()?;
            }
            kernels.push(kernel);
        }
        if r.remaining() != 0 {
            return Err(Error::ModelFormat(format!("{} trailing bytes", r.remaining())));
        }
        let pairwise_layers = kernels.split_off(5);
        let shape_err = |e: Error| Error::ModelFormat(e.to_string());
        let unary = CnnParams::from_layers(Architecture::Unary, kernels).map_err(shape_err)?;
        let pairwise = CnnParams::from_layers(Architecture::Pairwise, pairwise_layers).map_err(shape_err)?;
        InferenceConfig::new(lambda).map_err(shape_err)?;
        Ok(Model {
            block_scaler,
            edge_scaler,
            unary,
            pairwise,
            lambda,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Model> {
        Model::from_bytes(&std::fs::read(path)?)
    }
}

fn put_f32(out: &mut Vec<u8>, v: f64) {
    out.extend_from_slice(&(v as f32).to_le_bytes());
}

fn write_scaler(out: &mut Vec<u8>, s: &FeatureScaler) {
    out.extend_from_slice(&(s.dim() as u32).to_le_bytes());
    out.extend(s.binary.iter().map(|&b| b as u8));
    for &v in s.mean.iter().chain(&s.std) {
        put_f32(out, v);
    }
}

fn read_scaler(r: &mut Reader<'_>, layout: &[FeatureDef]) -> Result<FeatureScaler> {
    let dim = r.u32()? as usize;
    if dim != layout.len() {
        return Err(Error::ModelFormat(format!(
            "scaler has {dim} dimensions, layout has {}",
            layout.len()
        )));
    }
    let mut binary = Vec::with_capacity(dim);
    for def in layout {
        let flag = r.take(1)?[0];
        if flag > 1 || (flag == 1) != def.kind.is_binary() {
            return Err(Error::ModelFormat(format!("binary flag mismatch for {}", def.name)));
        }
        binary.push(flag == 1);
    }
    let mean = (0..dim).map(|_| r.f32()).collect::<Result<Vec<_>>>()?;
    let std = (0..dim).map(|_| r.f32()).collect::<Result<Vec<_>>>()?;
    if std.iter().any(|&s| !(s > 0.0)) || mean.iter().any(|m| !m.is_finite()) {
        return Err(Error::ModelFormat("scaler statistics out of range".into()));
    }
    Ok(FeatureScaler {
        mean,
        std,
        binary,
        clip: layout.iter().map(|s| s.kind.clip()).collect(),
    })
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.remaining() < n {
            return Err(Error::ModelFormat("file is truncated".into()));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f32(&mut self) -> Result<f64> {
        let v = f32::from_le_bytes(self.take(4)?.try_into().unwrap()) as f64;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::ModelFormat("non-finite value".into()))
        }
    }
}
