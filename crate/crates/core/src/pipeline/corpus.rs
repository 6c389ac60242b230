use std::fmt;
use std::str::FromStr;

use crate::blocks::{block_layout, edge_layout, BlockFeatures, EdgeFeatures, FeatureScaler, PageFeatures};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Split {
    Train,
    Validation,
    Test,
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Split> {
        match s {
            "train" => Ok(Split::Train),
            "validation" | "val" => Ok(Split::Validation),
            "test" => Ok(Split::Test),
            other => Err(Error::Corpus(format!("unknown split `{other}`"))),
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Validation => "validation",
            Split::Test => "test",
        })
    }
}

/// One labeled page with raw features.
#[derive(Debug, Clone)]
pub struct Page {
    pub id: String,
    pub split: Split,
    pub texts: Vec<String>,
    pub block_features: Vec<BlockFeatures>,
    pub edge_features: Vec<EdgeFeatures>,
    pub labels: Vec<u8>,
}

impl Page {
    pub fn new(id: impl Into<String>, split: Split, features: PageFeatures, labels: Vec<u8>) -> Result<Page> {
        let id = id.into();
        if labels.len() != features.len() {
            return Err(Error::Corpus(format!(
                "{id}: {} labels for {} blocks",
                labels.len(),
                features.len()
            )));
        }
        if labels.iter().any(|&l| l > 1) {
            return Err(Error::Corpus(format!("{id}: labels must be 0 or 1")));
        }
        Ok(Page {
            id,
            split,
            texts: features.blocks.into_iter().map(|b| b.text).collect(),
            block_features: features.block_features,
            edge_features: features.edge_features,
            labels,
        })
    }

    pub fn from_html(id: impl Into<String>, split: Split, markup: &[u8], labels: Vec<u8>) -> Result<Page> {
        Page::new(id, split, PageFeatures::from_html(markup)?, labels)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

#[derive(Debug, Clone, Default)]
pub struct Corpus {
    pub pages: Vec<Page>,
}

impl Corpus {
    pub fn new(pages: Vec<Page>) -> Self {
        Corpus { pages }
    }

    pub fn split(&self, split: Split) -> impl Iterator<Item = &Page> + Clone {
        self.pages.iter().filter(move |p| p.split == split)
    }

    /// Block and edge scalers fitted on the training split only.
    pub fn fit_scalers(&self) -> Result<(FeatureScaler, FeatureScaler)> {
        let train = self.split(Split::Train);
        let blocks = FeatureScaler::fit(
            block_layout(),
            train.clone().flat_map(|p| p.block_features.iter().map(|b| b.values())),
        )?;
        let edges = FeatureScaler::fit(
            edge_layout(),
            train.flat_map(|p| p.edge_features.iter().map(|e| e.values())),
        )?;
        Ok((blocks, edges))
    }
}
