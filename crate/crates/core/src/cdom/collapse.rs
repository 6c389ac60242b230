//! Collapsed DOM: every single-child element is merged into its child, so
//! that parent/grandparent relations reflect the semantic grouping of text.

use std::sync::atomic::{AtomicU64, Ordering};

use crate::cdom::dom::{is_space, DomKind, DomNode, DomTree, Span};
use crate::error::{Error, Result};

/// Pseudo-tag used as the chain of a bare text node that was not merged into
/// an element (it has siblings).
pub const TEXT_TAG: &str = "#text";

static NEXT_TREE_ID: AtomicU64 = AtomicU64::new(1);

/// Handle to a node of a particular [`CdomTree`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId {
    tree: u64,
    index: usize,
}

impl NodeId {
    pub fn index(&self) -> usize {
        self.index
    }
}

/// One collapsed element chain. Leaves carry text; internal nodes have at
/// least two children.
#[derive(Debug, Clone, PartialEq)]
pub struct CdomNode {
    /// Merged tag names, outermost first.
    pub tag_chain: Vec<String>,
    /// `tag.class>tag.class>...` from the root down to this node.
    pub class_path: String,
    pub children: Vec<usize>,
    pub parent: Option<usize>,
    pub depth: usize,
    /// Whitespace-normalized text; non-empty iff this is a leaf.
    pub text: String,
    /// Whether the text sits inside an `<a>` element (leaves only).
    pub in_link: bool,
    pub source_offset: usize,
    pub source_length: usize,
    /// Leaves under this node form the contiguous range `leaf_range` of the
    /// document-order leaf list.
    pub leaf_range: (usize, usize),
    /// Descendants occupy the arena range `index+1..subtree_end`.
    pub subtree_end: usize,
}

impl CdomNode {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    pub fn has_tag(&self, tag: &str) -> bool {
        self.tag_chain.iter().any(|t| t == tag)
    }
}

#[derive(Debug, Clone)]
pub struct CdomTree {
    id: u64,
    nodes: Vec<CdomNode>,
    root: Option<usize>,
    leaves: Vec<usize>,
    source_len: usize,
}

/// Collapses whitespace runs (including NBSP) to a single space and trims.
pub fn normalize_whitespace(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut pending = false;
    for c in s.chars() {
        if is_space(c) {
            pending = !out.is_empty();
        } else {
            if pending {
                out.push(' ');
                pending = false;
            }
            out.push(c);
        }
    }
    out
}

struct Chain<'a> {
    tags: Vec<&'a DomNode>,
    /// Terminal node: a text node or an element with >= 2 children (or none).
    end: &'a DomNode,
    span: Span,
}

impl CdomTree {
    /// Builds the collapsed tree from a preprocessed DOM.
    pub fn collapse(dom: &DomTree) -> CdomTree {
        let mut tree = CdomTree {
            id: NEXT_TREE_ID.fetch_add(1, Ordering::Relaxed),
            nodes: Vec::new(),
            root: None,
            leaves: Vec::new(),
            source_len: dom.source_len(),
        };
        let root = dom.node(dom.root());
        if has_text(dom, root) {
            tree.root = Some(tree.build(dom, root, None, "", false));
        }
        tree
    }

    fn build(
        &mut self,
        dom: &DomTree,
        start: &DomNode,
        parent: Option<usize>,
        parent_path: &str,
        in_link: bool,
    ) -> usize {
        let chain = follow_chain(dom, start);
        let mut in_link = in_link;
        let mut path = parent_path.to_string();
        let mut tag_chain = Vec::with_capacity(chain.tags.len());
        for el in &chain.tags {
            let name = el.tag().unwrap_or_default();
            in_link |= name == "a";
            if !path.is_empty() {
                path.push('>');
            }
            path.push_str(name);
            for class in el.classes() {
                path.push('.');
                path.push_str(&class.to_lowercase());
            }
            tag_chain.push(name.to_string());
        }
        if tag_chain.is_empty() {
            if !path.is_empty() {
                path.push('>');
            }
            path.push_str(TEXT_TAG);
            tag_chain.push(TEXT_TAG.to_string());
        }
        let depth = parent.map_or(0, |p| self.nodes[p].depth + 1);
        let id = self.nodes.len();
        self.nodes.push(CdomNode {
            tag_chain,
            class_path: path.clone(),
            children: Vec::new(),
            parent,
            depth,
            text: String::new(),
            in_link,
            source_offset: chain.span.start,
            source_length: chain.span.len,
            leaf_range: (self.leaves.len(), self.leaves.len()),
            subtree_end: id + 1,
        });
        match &chain.end.kind {
            DomKind::Text(t) => {
                self.nodes[id].text = normalize_whitespace(t);
                self.leaves.push(id);
            }
            DomKind::Element { .. } => {
                let mut children = Vec::with_capacity(chain.end.children.len());
                for &c in &chain.end.children {
                    let child = dom.node(c);
                    if has_text(dom, child) {
                        children.push(self.build(dom, child, Some(id), &path, in_link));
                    }
                }
                self.nodes[id].children = children;
            }
        }
        self.nodes[id].leaf_range.1 = self.leaves.len();
        self.nodes[id].subtree_end = self.nodes.len();
        id
    }

    fn handle(&self, index: usize) -> NodeId {
        NodeId {
            tree: self.id,
            index,
        }
    }

    fn check(&self, id: NodeId) -> Result<usize> {
        if id.tree != self.id || id.index >= self.nodes.len() {
            return Err(Error::domain("node does not belong to this tree"));
        }
        Ok(id.index)
    }

    pub fn root(&self) -> Option<NodeId> {
        self.root.map(|r| self.handle(r))
    }

    pub fn is_empty(&self) -> bool {
        self.root.is_none()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn source_len(&self) -> usize {
        self.source_len
    }

    /// Panics if `id` belongs to another tree.
    pub fn node(&self, id: NodeId) -> &CdomNode {
        let idx = self.check(id).expect("node from a different tree");
        &self.nodes[idx]
    }

    pub fn try_node(&self, id: NodeId) -> Result<&CdomNode> {
        self.check(id).map(|i| &self.nodes[i])
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        self.node(id).parent.map(|p| self.handle(p))
    }

    pub fn children(&self, id: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.node(id).children.iter().map(move |&c| self.handle(c))
    }

    /// All nodes in pre-order.
    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.nodes.len()).map(move |i| self.handle(i))
    }

    /// `id` and all its descendants.
    pub fn subtree(&self, id: NodeId) -> impl Iterator<Item = &CdomNode> + '_ {
        let start = self.check(id).expect("node from a different tree");
        self.nodes[start..self.nodes[start].subtree_end].iter()
    }

    /// Leaves in document order.
    pub fn leaves(&self) -> impl ExactSizeIterator<Item = NodeId> + '_ {
        self.leaves.iter().map(move |&i| self.handle(i))
    }

    /// Leaves below `id`, in document order.
    pub fn leaves_under(&self, id: NodeId) -> impl Iterator<Item = &CdomNode> + '_ {
        let (a, b) = self.node(id).leaf_range;
        self.leaves[a..b].iter().map(move |&i| &self.nodes[i])
    }

    /// Text of all leaves below `id`, joined by single spaces.
    pub fn text_of(&self, id: NodeId) -> String {
        let mut out = String::new();
        for leaf in self.leaves_under(id) {
            if !out.is_empty() {
                out.push(' ');
            }
            out.push_str(&leaf.text);
        }
        out
    }

    /// Lowest common ancestor.
    pub fn common_ancestor(&self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let (a, b) = (self.check(a)?, self.check(b)?);
        Ok(self.handle(self.lca(a, b).0))
    }

    /// Hops from both nodes up to their lowest common ancestor, summed.
    pub fn tree_distance(&self, a: NodeId, b: NodeId) -> Result<usize> {
        let (a, b) = (self.check(a)?, self.check(b)?);
        Ok(self.lca(a, b).1)
    }

    /// Returns (lca, hops).
    fn lca(&self, mut a: usize, mut b: usize) -> (usize, usize) {
        let mut hops = 0;
        while self.nodes[a].depth > self.nodes[b].depth {
            a = self.nodes[a].parent.expect("depth > 0 has a parent");
            hops += 1;
        }
        while self.nodes[b].depth > self.nodes[a].depth {
            b = self.nodes[b].parent.expect("depth > 0 has a parent");
            hops += 1;
        }
        while a != b {
            a = self.nodes[a].parent.expect("same tree");
            b = self.nodes[b].parent.expect("same tree");
            hops += 2;
        }
        (a, hops)
    }

    /// Nodes strictly between `a` and `b` on the tree path, plus `a` and `b`
    /// themselves; the common ancestor is excluded unless it is an endpoint.
    pub fn path_between(&self, a: NodeId, b: NodeId) -> Result<Vec<NodeId>> {
        let (ai, bi) = (self.check(a)?, self.check(b)?);
        let (lca, _) = self.lca(ai, bi);
        let mut out = Vec::new();
        for start in [ai, bi] {
            let mut cur = start;
            while cur != lca {
                out.push(self.handle(cur));
                cur = self.nodes[cur].parent.expect("below lca");
            }
        }
        if out.is_empty() {
            out.push(self.handle(lca));
        }
        Ok(out)
    }

    /// Expands each merged chain back into nested elements. Collapsing the
    /// result yields a tree with the same structure.
    pub fn to_dom(&self) -> DomTree {
        let mut dom = DomTree::new(self.source_len);
        let html = dom.push(DomNode {
            kind: DomKind::Element {
                name: "#document".into(),
                attrs: Vec::new(),
            },
            children: Vec::new(),
            span: Span::new(0, self.source_len),
        });
        dom.root = html;
        if let Some(r) = self.root {
            let child = self.expand(r, &mut dom);
            dom.nodes[html].children.push(child);
        }
        dom
    }

    fn expand(&self, idx: usize, dom: &mut DomTree) -> usize {
        let node = &self.nodes[idx];
        let span = Span {
            start: node.source_offset,
            len: node.source_length,
        };
        let element = |name: &str, children: Vec<usize>| DomNode {
            kind: DomKind::Element {
                name: name.to_string(),
                attrs: Vec::new(),
            },
            children,
            span,
        };
        let (mut inner, outer_tags) = if node.is_leaf() {
            let text = dom.push(DomNode {
                kind: DomKind::Text(node.text.clone()),
                children: Vec::new(),
                span,
            });
            let tags = if node.tag_chain == [TEXT_TAG] {
                &node.tag_chain[..0]
            } else {
                &node.tag_chain[..]
            };
            (text, tags)
        } else {
            let children: Vec<usize> = node.children.iter().map(|&c| self.expand(c, dom)).collect();
            let (last, rest) = node.tag_chain.split_last().expect("internal chains are non-empty");
            (dom.push(element(last, children)), rest)
        };
        for tag in outer_tags.iter().rev() {
            inner = dom.push(element(tag, vec![inner]));
        }
        inner
    }

    /// Structural rendering: `[html,body](...)` for internal nodes and
    /// `[li,a]"text"` for leaves.
    pub fn outline(&self) -> String {
        let mut out = String::new();
        if let Some(r) = self.root {
            self.outline_into(r, &mut out);
        }
        out
    }

    fn outline_into(&self, idx: usize, out: &mut String) {
        let node = &self.nodes[idx];
        out.push('[');
        out.push_str(&node.tag_chain.join(","));
        out.push(']');
        if node.is_leaf() {
            out.push('"');
            out.push_str(&node.text);
            out.push('"');
        } else {
            out.push('(');
            for (i, &c) in node.children.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                self.outline_into(c, out);
            }
            out.push(')');
        }
    }
}

fn has_text(dom: &DomTree, node: &DomNode) -> bool {
    match &node.kind {
        DomKind::Text(t) => !t.chars().all(is_space),
        DomKind::Element { .. } => node.children.iter().any(|&c| has_text(dom, dom.node(c))),
    }
}

/// Follows single-child (text-bearing) links downwards from `start`.
fn follow_chain<'a>(dom: &'a DomTree, start: &'a DomNode) -> Chain<'a> {
    let span = start.span;
    let mut tags = Vec::new();
    let mut cur = start;
    loop {
        match &cur.kind {
            DomKind::Text(_) => break,
            DomKind::Element { name, .. } => {
                if name == "#document" {
                    // synthetic wrapper produced by `to_dom`
                } else {
                    tags.push(cur);
                }
                let mut live = cur
                    .children
                    .iter()
                    .map(|&c| dom.node(c))
                    .filter(|c| has_text(dom, c));
                match (live.next(), live.next()) {
                    (Some(only), None) => cur = only,
                    _ => break,
                }
            }
        }
    }
    Chain {
        tags,
        end: cur,
        span,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cdom::parse_html;

    pub(crate) const FIG2: &str =
        "<body>Its a <ul><li><a href=\"#\">Item 1</a></li><li><a href=\"#\">Item 2</a></li></ul></body>";

    fn cdom(html: &str) -> CdomTree {
        CdomTree::collapse(&parse_html(html.as_bytes()).unwrap().preprocess())
    }

    #[test]
    fn list_chains_collapse_to_leaves() {
        let t = cdom(FIG2);
        assert_eq!(
            t.outline(),
            "[html,body](\
             [#text]\"Its a\",\
             [ul]([li,a]\"Item 1\",[li,a]\"Item 2\"))"
        );
    }

    #[test]
    fn single_text_body_is_one_leaf() {
        let t = cdom("<body>hello</body>");
        assert_eq!(t.leaves().len(), 1);
        let leaf = t.node(t.leaves().next().unwrap());
        assert_eq!(leaf.tag_chain, vec!["html", "body"]);
        assert_eq!(leaf.text, "hello");
    }

    #[test]
    fn empty_page_has_no_root() {
        let t = cdom("<div> </div><img>");
        assert!(t.is_empty());
        assert_eq!(t.leaves().len(), 0);
    }

    #[test]
    fn class_path_sorts_classes() {
        let t = cdom("<div class=\"b A\"><p>x</p><p class=z>y</p></div>");
        let leaves: Vec<_> = t.leaves().map(|l| t.node(l).class_path.clone()).collect();
        assert_eq!(leaves, vec!["html>body>div.a.b>p", "html>body>div.a.b>p.z"]);
    }

    #[test]
    fn distances() {
        // body > div > (p > (x, b > y), p > z)
        let t = cdom("<div><p>x<b>y</b></p><p>z</p></div>");
        let l: Vec<_> = t.leaves().collect();
        assert_eq!(l.len(), 3);
        assert_eq!(t.tree_distance(l[0], l[1]).unwrap(), 2);
        assert_eq!(t.tree_distance(l[0], l[0]).unwrap(), 0);
        // x is a leaf under p, z's chain is a child of div: x->p->div, z->div
        assert_eq!(t.tree_distance(l[0], l[2]).unwrap(), 3);
        let root = t.root().unwrap();
        assert_eq!(t.common_ancestor(l[0], root).unwrap(), root);
        let p = t.parent(l[0]).unwrap();
        assert_eq!(t.common_ancestor(l[0], l[1]).unwrap(), p);
    }

    #[test]
    fn uncle_child_distance_is_four() {
        // root has two internal children each holding two leaves
        let t = cdom("<div><p>a</p><p>b</p></div><div><p>c</p><p>d</p></div>");
        let l: Vec<_> = t.leaves().collect();
        assert_eq!(t.tree_distance(l[0], l[2]).unwrap(), 4);
        assert_eq!(t.tree_distance(l[1], l[2]).unwrap(), 4);
    }

    #[test]
    fn foreign_nodes_are_rejected() {
        let a = cdom("<p>a</p><p>b</p>");
        let b = cdom("<p>a</p><p>b</p>");
        let x = a.leaves().next().unwrap();
        let y = b.leaves().next().unwrap();
        assert!(matches!(a.tree_distance(x, y), Err(Error::Domain(_))));
        assert!(a.common_ancestor(x, y).is_err());
    }

    #[test]
    fn leaf_offsets_point_into_source() {
        let src = "<div><p>one</p><p>two</p></div>";
        let t = cdom(src);
        let l: Vec<_> = t.leaves().collect();
        let second = t.node(l[1]);
        let chars: Vec<char> = src.chars().collect();
        let slice: String = chars[second.source_offset..second.source_offset + second.source_length]
            .iter()
            .collect();
        assert_eq!(slice, "<p>two</p>");
    }

    #[test]
    fn link_flag_propagates() {
        let t = cdom("<p>a <a href=x><b>link</b></a> c</p>");
        let flags: Vec<bool> = t.leaves().map(|l| t.node(l).in_link).collect();
        assert_eq!(flags, vec![false, true, false]);
    }

    #[test]
    fn whitespace_is_normalized() {
        assert_eq!(normalize_whitespace("  a \n\u{a0} b\t"), "a b");
        assert_eq!(normalize_whitespace(" \n"), "");
    }
}
