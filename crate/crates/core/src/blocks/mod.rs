//! Block segmentation and feature extraction.

pub mod layout;
mod scaler;
mod stopwords;
pub mod text;

use std::collections::HashMap;

use crate::cdom::{CdomTree, NodeId};
use crate::error::{Error, Result};

pub use layout::{block_layout, edge_layout, layout_hash, FeatureKind, FeatureDef, BLOCK_DIM, EDGE_DIM};
pub use scaler::FeatureScaler;
pub use stopwords::{is_stopword, STOPWORDS};
pub use text::TextStats;

use layout::{block_offsets as bo, edge_offsets as eo, BLOCK_TAGS, NODE_DIM, PARENT_TAGS, TEXT_DIM};

/// Tags treated as line-breaking when rendered without styles.
pub const BLOCK_LEVEL_TAGS: &[&str] = &[
    "p", "div", "ul", "ol", "li", "table", "tr", "td", "h1", "h2", "h3", "h4", "h5", "h6",
    "blockquote", "pre", "dl", "form", "section", "article", "header", "footer",
];

const FORM_TAGS: &[&str] = &["form", "input", "select", "textarea", "button", "option", "fieldset"];

/// One labelable unit: a text leaf of the collapsed DOM.
#[derive(Debug, Clone, PartialEq)]
pub struct TextBlock {
    pub index: usize,
    pub text: String,
    pub leaf: NodeId,
    pub parent: Option<NodeId>,
    pub grandparent: Option<NodeId>,
    pub root: NodeId,
    pub source_offset: usize,
    pub source_length: usize,
}

/// One block per leaf, in document order.
pub fn segment(tree: &CdomTree) -> Vec<TextBlock> {
    let Some(root) = tree.root() else {
        return Vec::new();
    };
    tree.leaves()
        .enumerate()
        .map(|(index, leaf)| {
            let node = tree.node(leaf);
            let parent = tree.parent(leaf);
            TextBlock {
                index,
                text: node.text.clone(),
                leaf,
                parent,
                grandparent: parent.and_then(|p| tree.parent(p)),
                root,
                source_offset: node.source_offset,
                source_length: node.source_length,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockFeatures(pub [f64; BLOCK_DIM]);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeFeatures(pub [f64; EDGE_DIM]);

impl BlockFeatures {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    /// Value of the named feature; panics on unknown names.
    pub fn get(&self, name: &str) -> f64 {
        let i = layout::position(block_layout(), name)
            .unwrap_or_else(|| panic!("unknown block feature {name}"));
        self.0[i]
    }

    pub fn is_binary(i: usize) -> bool {
        block_layout()[i].kind.is_binary()
    }
}

impl EdgeFeatures {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn get(&self, name: &str) -> f64 {
        let i = layout::position(edge_layout(), name)
            .unwrap_or_else(|| panic!("unknown edge feature {name}"));
        self.0[i]
    }

    pub fn is_binary(i: usize) -> bool {
        edge_layout()[i].kind.is_binary()
    }
}

/// Page-wide counts needed by block features, plus a cache of context-node
/// sections.
pub struct PageStats<'t> {
    tree: &'t CdomTree,
    text_counts: HashMap<&'t str, usize>,
    class_path_counts: HashMap<&'t str, usize>,
    n_blocks: usize,
    node_cache: Vec<Option<[f64; NODE_DIM]>>,
}

impl<'t> PageStats<'t> {
    pub fn new(tree: &'t CdomTree) -> Self {
        let mut text_counts = HashMap::new();
        let mut class_path_counts = HashMap::new();
        for leaf in tree.leaves() {
            let node = tree.node(leaf);
            *text_counts.entry(node.text.as_str()).or_insert(0) += 1;
            *class_path_counts.entry(node.class_path.as_str()).or_insert(0) += 1;
        }
        PageStats {
            tree,
            text_counts,
            class_path_counts,
            n_blocks: tree.leaves().len(),
            node_cache: vec![None; tree.len()],
        }
    }

    /// Features of a context node: source share, link density, text section
    /// and form presence.
    pub fn node_section(&mut self, id: NodeId) -> [f64; NODE_DIM] {
        if let Some(cached) = self.node_cache[id.index()] {
            return cached;
        }
        let tree = self.tree;
        let node = tree.node(id);
        let mut out = [0.0; NODE_DIM];
        out[0] = if tree.source_len() == 0 {
            0.0
        } else {
            node.source_length as f64 / tree.source_len() as f64
        };
        let (mut link_chars, mut chars) = (0usize, 0usize);
        for leaf in tree.leaves_under(id) {
            let n = leaf.text.chars().count();
            chars += n;
            if leaf.in_link {
                link_chars += n;
            }
        }
        out[1] = if chars == 0 {
            0.0
        } else {
            link_chars as f64 / chars as f64
        };
        let text = tree.text_of(id);
        out[2..2 + TEXT_DIM].copy_from_slice(&TextStats::of(&text).features());
        let has_form = tree
            .subtree(id)
            .any(|n| n.tag_chain.iter().any(|t| FORM_TAGS.contains(&t.as_str())));
        out[NODE_DIM - 1] = if has_form { 1.0 } else { 0.0 };
        self.node_cache[id.index()] = Some(out);
        out
    }
}

fn flag(v: bool) -> f64 {
    if v {
        1.0
    } else {
        0.0
    }
}

/// All 128 block features.
pub fn extract_block_features(block: &TextBlock, tree: &CdomTree, stats: &mut PageStats<'_>) -> BlockFeatures {
    let mut f = [0.0; BLOCK_DIM];
    let node = tree.node(block.leaf);
    let dup = stats.text_counts.get(node.text.as_str()).copied().unwrap_or(1);
    f[bo::HAS_DUPLICATE] = flag(dup > 1);
    f[bo::HAS_10_DUPLICATES] = flag(dup > 10);
    let same_path = stats
        .class_path_counts
        .get(node.class_path.as_str())
        .copied()
        .unwrap_or(1);
    f[bo::SAME_CLASS_PATH_RATIO] = same_path as f64 / stats.n_blocks.max(1) as f64;

    let ts = TextStats::of(&block.text);
    f[bo::HAS_WORD] = flag(ts.n_words > 0);
    f[bo::LOG_N_WORDS] = text::clipped_log(ts.n_words as f64, layout::CLIP_LOG_WORDS);
    f[bo::TEXT..bo::TEXT + TEXT_DIM].copy_from_slice(&ts.features());
    f[bo::CONTAINS_PUNCTUATION] = flag(ts.n_punctuation > 0);
    f[bo::N_PUNCTUATION] = ts.n_punctuation as f64;
    f[bo::MULTIPLE_SENTENCES] = flag(ts.n_sentences > 1);
    let pos = if tree.source_len() == 0 {
        0.0
    } else {
        block.source_offset as f64 / tree.source_len() as f64
    };
    f[bo::RELATIVE_POSITION] = pos;
    f[bo::RELATIVE_POSITION_2] = pos * pos;

    if let Some(parent) = block.parent {
        f[bo::HAS_PARENT] = 1.0;
        f[bo::PARENT..bo::PARENT + NODE_DIM].copy_from_slice(&stats.node_section(parent));
        let pnode = tree.node(parent);
        for (i, tag) in PARENT_TAGS.iter().enumerate() {
            f[bo::PARENT_TAGS + i] = flag(pnode.has_tag(tag));
        }
    }
    if let Some(gp) = block.grandparent {
        f[bo::HAS_GRANDPARENT] = 1.0;
        f[bo::GRANDPARENT..bo::GRANDPARENT + NODE_DIM].copy_from_slice(&stats.node_section(gp));
    }
    f[bo::ROOT..bo::ROOT + NODE_DIM].copy_from_slice(&stats.node_section(block.root));
    for (i, tag) in BLOCK_TAGS.iter().enumerate() {
        f[bo::TAGS + i] = flag(node.has_tag(tag));
    }
    BlockFeatures(f)
}

/// The 25 features of the edge between `a` and the block right after it.
pub fn extract_edge_features(
    a: &TextBlock,
    b: &TextBlock,
    tree: &CdomTree,
    stats: &mut PageStats<'_>,
) -> Result<EdgeFeatures> {
    if b.index != a.index + 1 {
        return Err(Error::domain(format!(
            "blocks {} and {} are not adjacent",
            a.index, b.index
        )));
    }
    let mut f = [0.0; EDGE_DIM];
    let distance = tree.tree_distance(a.leaf, b.leaf)?;
    let slot = match distance {
        0..=2 => 0,
        3 => 1,
        4 => 2,
        _ => 3,
    };
    f[eo::DISTANCE + slot] = 1.0;
    let breaks = tree.path_between(a.leaf, b.leaf)?.into_iter().any(|n| {
        tree.node(n)
            .tag_chain
            .iter()
            .any(|t| BLOCK_LEVEL_TAGS.contains(&t.as_str()))
    });
    f[eo::LINE_BREAK] = flag(breaks);
    let lca = tree.common_ancestor(a.leaf, b.leaf)?;
    f[eo::ANCESTOR..eo::ANCESTOR + NODE_DIM].copy_from_slice(&stats.node_section(lca));
    Ok(EdgeFeatures(f))
}

/// Blocks of one page with their raw (unscaled) features.
#[derive(Debug, Clone)]
pub struct PageFeatures {
    pub blocks: Vec<TextBlock>,
    pub block_features: Vec<BlockFeatures>,
    pub edge_features: Vec<EdgeFeatures>,
}

impl PageFeatures {
    pub fn extract(tree: &CdomTree) -> PageFeatures {
        let blocks = segment(tree);
        let mut stats = PageStats::new(tree);
        let block_features = blocks
            .iter()
            .map(|b| extract_block_features(b, tree, &mut stats))
            .collect();
        let edge_features = blocks
            .windows(2)
            .map(|w| extract_edge_features(&w[0], &w[1], tree, &mut stats).expect("consecutive blocks"))
            .collect();
        PageFeatures {
            blocks,
            block_features,
            edge_features,
        }
    }

    pub fn from_html(markup: &[u8]) -> Result<PageFeatures> {
        let tree = crate::cdom::build_cdom(markup)?;
        Ok(Self::extract(&tree))
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }
}
