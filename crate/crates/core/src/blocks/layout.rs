//! Canonical order, names and value ranges of the block and edge features.
//!
//! The model file stores a hash of these tables, so any reordering or change
//! of clip bounds invalidates previously trained models.

use std::fmt::Write as _;

use once_cell::sync::Lazy;
use sha2::{Digest, Sha256};

pub const BLOCK_DIM: usize = 128;
pub const EDGE_DIM: usize = 25;
/// Features computed for a context node (parent, grandparent, root, common
/// ancestor).
pub const NODE_DIM: usize = 20;
/// Text statistics shared by the block and every context node.
pub const TEXT_DIM: usize = 17;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FeatureKind {
    Binary,
    Continuous { clip: Option<(f64, f64)> },
}

impl FeatureKind {
    pub fn is_binary(&self) -> bool {
        matches!(self, FeatureKind::Binary)
    }

    pub fn clip(&self) -> Option<(f64, f64)> {
        match self {
            FeatureKind::Continuous { clip } => *clip,
            FeatureKind::Binary => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureDef {
    pub name: String,
    pub kind: FeatureKind,
}

const BIN: FeatureKind = FeatureKind::Binary;
const REAL: FeatureKind = FeatureKind::Continuous { clip: None };

const fn clipped(lo: f64, hi: f64) -> FeatureKind {
    FeatureKind::Continuous {
        clip: Some((lo, hi)),
    }
}

pub const CLIP_LOG_WORDS: (f64, f64) = (0.0, 3.5);
pub const CLIP_AVG_WORD_LEN: (f64, f64) = (3.0, 15.0);
pub const CLIP_LOG_CHARS: (f64, f64) = (2.5, 5.5);
pub const CLIP_LOG_PUNCT_RATIO: (f64, f64) = (-4.0, -2.5);
pub const CLIP_LOG_SENTENCE_LEN: (f64, f64) = (2.0, 5.0);

/// Text statistics in canonical order.
const TEXT_FEATURES: [(&str, FeatureKind); TEXT_DIM] = [
    ("avg_word_length", clipped(CLIP_AVG_WORD_LEN.0, CLIP_AVG_WORD_LEN.1)),
    ("has_stopword", BIN),
    ("stopword_ratio", REAL),
    ("log_n_chars", clipped(CLIP_LOG_CHARS.0, CLIP_LOG_CHARS.1)),
    ("log_punctuation_ratio", clipped(CLIP_LOG_PUNCT_RATIO.0, CLIP_LOG_PUNCT_RATIO.1)),
    ("has_numeric", BIN),
    ("numeric_ratio", REAL),
    ("log_avg_sentence_length", clipped(CLIP_LOG_SENTENCE_LEN.0, CLIP_LOG_SENTENCE_LEN.1)),
    ("ends_with_punctuation", BIN),
    ("ends_with_question_mark", BIN),
    ("contains_copyright", BIN),
    ("contains_email", BIN),
    ("contains_url", BIN),
    ("contains_year", BIN),
    ("ratio_words_with_capital", REAL),
    ("ratio_words_with_capital_2", REAL),
    ("ratio_words_with_capital_3", REAL),
];

/// Tags encoded for the parent node.
pub const PARENT_TAGS: [&str; 20] = [
    "td", "div", "p", "tr", "table", "body", "ul", "span", "li", "blockquote", "b", "small", "a",
    "ol", "i", "form", "dl", "strong", "pre", "h1",
];

/// Tags encoded for the block's own node.
pub const BLOCK_TAGS: [&str; 19] = [
    "a", "p", "td", "b", "li", "span", "i", "tr", "div", "strong", "em", "h3", "h2", "table",
    "h4", "small", "sup", "h1", "blockquote",
];

/// Offsets into the block vector.
pub mod block_offsets {
    pub const HAS_DUPLICATE: usize = 0;
    pub const HAS_10_DUPLICATES: usize = 1;
    pub const SAME_CLASS_PATH_RATIO: usize = 2;
    pub const HAS_WORD: usize = 3;
    pub const LOG_N_WORDS: usize = 4;
    pub const TEXT: usize = 5;
    pub const CONTAINS_PUNCTUATION: usize = 22;
    pub const N_PUNCTUATION: usize = 23;
    pub const MULTIPLE_SENTENCES: usize = 24;
    pub const RELATIVE_POSITION: usize = 25;
    pub const RELATIVE_POSITION_2: usize = 26;
    pub const HAS_PARENT: usize = 27;
    pub const PARENT: usize = 28;
    pub const PARENT_TAGS: usize = 48;
    pub const HAS_GRANDPARENT: usize = 68;
    pub const GRANDPARENT: usize = 69;
    pub const ROOT: usize = 89;
    pub const TAGS: usize = 109;
}

/// Offsets into the edge vector.
pub mod edge_offsets {
    pub const DISTANCE: usize = 0;
    pub const LINE_BREAK: usize = 4;
    pub const ANCESTOR: usize = 5;
}

fn node_section(prefix: &str, out: &mut Vec<FeatureDef>) {
    let mut push = |name: &str, kind| {
        out.push(FeatureDef {
            name: format!("{prefix}.{name}"),
            kind,
        })
    };
    push("body_percentage", REAL);
    push("link_density", REAL);
    for (name, kind) in TEXT_FEATURES {
        push(name, kind);
    }
    push("contains_form_element", BIN);
}

fn def(name: &str, kind: FeatureKind) -> FeatureDef {
    FeatureDef {
        name: name.to_string(),
        kind,
    }
}

pub static BLOCK_LAYOUT: Lazy<Vec<FeatureDef>> = Lazy::new(|| {
    let mut v = vec![
        def("has_duplicate", BIN),
        def("has_10_duplicates", BIN),
        def("same_class_path_ratio", REAL),
        def("has_word", BIN),
        def("log_n_words", clipped(CLIP_LOG_WORDS.0, CLIP_LOG_WORDS.1)),
    ];
    for (name, kind) in TEXT_FEATURES {
        v.push(def(name, kind));
    }
    v.extend([
        def("contains_punctuation", BIN),
        def("n_punctuation", REAL),
        def("has_multiple_sentences", BIN),
        def("relative_position", REAL),
        def("relative_position_2", REAL),
        def("has_parent", BIN),
    ]);
    node_section("parent", &mut v);
    for tag in PARENT_TAGS {
        v.push(def(&format!("parent.tag.{tag}"), BIN));
    }
    v.push(def("has_grandparent", BIN));
    node_section("grandparent", &mut v);
    node_section("root", &mut v);
    for tag in BLOCK_TAGS {
        v.push(def(&format!("tag.{tag}"), BIN));
    }
    assert_eq!(v.len(), BLOCK_DIM);
    v
});

pub static EDGE_LAYOUT: Lazy<Vec<FeatureDef>> = Lazy::new(|| {
    let mut v = vec![
        def("tree_distance_2", BIN),
        def("tree_distance_3", BIN),
        def("tree_distance_4", BIN),
        def("tree_distance_gt4", BIN),
        def("line_break", BIN),
    ];
    node_section("ancestor", &mut v);
    assert_eq!(v.len(), EDGE_DIM);
    v
});

pub fn block_layout() -> &'static [FeatureDef] {
    &BLOCK_LAYOUT
}

pub fn edge_layout() -> &'static [FeatureDef] {
    &EDGE_LAYOUT
}

/// Index of a feature by name.
pub fn position(layout: &[FeatureDef], name: &str) -> Option<usize> {
    layout.iter().position(|f| f.name == name)
}

/// Plain-text table of both layouts, one feature per line.
pub fn describe() -> String {
    let mut out = String::new();
    for (title, layout) in [("block", block_layout()), ("edge", edge_layout())] {
        for (i, f) in layout.iter().enumerate() {
            let kind = match f.kind {
                FeatureKind::Binary => "binary".to_string(),
                FeatureKind::Continuous { clip: None } => "real".to_string(),
                FeatureKind::Continuous {
                    clip: Some((lo, hi)),
                } => format!("real[{lo},{hi}]"),
            };
            let _ = writeln!(out, "{title}\t{i}\t{}\t{kind}", f.name);
        }
    }
    out
}

/// SHA-256 of [`describe`].
pub fn layout_hash() -> [u8; 32] {
    static HASH: Lazy<[u8; 32]> = Lazy::new(|| Sha256::digest(describe().as_bytes()).into());
    *HASH
}
