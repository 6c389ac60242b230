//! HTML parsing, preprocessing and the Collapsed DOM.

mod collapse;
mod dom;
mod parser;

pub use collapse::{normalize_whitespace, CdomNode, CdomTree, NodeId, TEXT_TAG};
pub use dom::{is_blank, is_space, DomKind, DomNode, DomTree, Span, NON_CONTENT_TAGS};
pub use parser::{parse_html, parse_str};

/// Removes whitespace-only text, non-content elements and elements emptied
/// by those removals.
pub fn preprocess(tree: &DomTree) -> DomTree {
    tree.preprocess()
}

pub fn collapse(tree: &DomTree) -> CdomTree {
    CdomTree::collapse(tree)
}

/// Parse, preprocess and collapse in one step.
pub fn build_cdom(markup: &[u8]) -> crate::Result<CdomTree> {
    let dom = parse_html(markup)?;
    Ok(collapse(&dom.preprocess()))
}
