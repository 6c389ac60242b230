//! Plain DOM tree produced by the parser, and the preprocessing pass that
//! strips nodes without extractable content.

/// Half-open character range into the original markup.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Span {
    pub start: usize,
    pub len: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span {
            start,
            len: end.saturating_sub(start),
        }
    }

    pub fn end(&self) -> usize {
        self.start + self.len
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DomKind {
    Element {
        name: String,
        attrs: Vec<(String, String)>,
    },
    Text(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DomNode {
    pub kind: DomKind,
    pub children: Vec<usize>,
    pub span: Span,
}

impl DomNode {
    pub fn tag(&self) -> Option<&str> {
        match &self.kind {
            DomKind::Element { name, .. } => Some(name),
            DomKind::Text(_) => None,
        }
    }

    pub fn text(&self) -> Option<&str> {
        match &self.kind {
            DomKind::Text(t) => Some(t),
            DomKind::Element { .. } => None,
        }
    }

    pub fn attr(&self, key: &str) -> Option<&str> {
        match &self.kind {
            DomKind::Element { attrs, .. } => attrs
                .iter()
                .find(|(k, _)| k == key)
                .map(|(_, v)| v.as_str()),
            DomKind::Text(_) => None,
        }
    }

    /// Sorted, deduplicated class names.
    pub fn classes(&self) -> Vec<&str> {
        let mut out: Vec<&str> = self
            .attr("class")
            .map(|c| c.split_whitespace().collect())
            .unwrap_or_default();
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// Arena-backed DOM. Node 0 is not special; `root` names the document element.
#[derive(Debug, Clone, PartialEq)]
pub struct DomTree {
    pub(crate) nodes: Vec<DomNode>,
    pub(crate) root: usize,
    /// Length of the original markup in characters.
    pub(crate) source_len: usize,
}

/// Elements that never carry extractable text.
pub const NON_CONTENT_TAGS: &[&str] = &[
    "head", "script", "style", "noscript", "template", "svg", "br", "hr", "iframe", "img", "input",
    "checkbox", "embed", "object", "video", "audio", "source", "track", "meta", "link",
];

/// Whitespace for emptiness checks: Unicode whitespace plus NBSP.
pub fn is_space(c: char) -> bool {
    c.is_whitespace() || c == '\u{a0}'
}

pub fn is_blank(s: &str) -> bool {
    s.chars().all(is_space)
}

impl DomTree {
    pub(crate) fn new(source_len: usize) -> Self {
        DomTree {
            nodes: Vec::new(),
            root: 0,
            source_len,
        }
    }

    pub(crate) fn push(&mut self, node: DomNode) -> usize {
        self.nodes.push(node);
        self.nodes.len() - 1
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn node(&self, id: usize) -> &DomNode {
        &self.nodes[id]
    }

    pub fn source_len(&self) -> usize {
        self.source_len
    }

    /// Number of nodes reachable from the root.
    pub fn len(&self) -> usize {
        self.descendants(self.root).count()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes[self.root].children.is_empty()
    }

    /// Pre-order traversal starting at `id` (inclusive).
    pub fn descendants(&self, id: usize) -> impl Iterator<Item = usize> + '_ {
        let mut stack = vec![id];
        std::iter::from_fn(move || {
            let next = stack.pop()?;
            stack.extend(self.nodes[next].children.iter().rev());
            Some(next)
        })
    }

    /// Text nodes in document order.
    pub fn text_nodes(&self) -> impl Iterator<Item = &str> + '_ {
        self.descendants(self.root)
            .filter_map(move |id| self.nodes[id].text())
    }

    /// First element with the given tag, in document order.
    pub fn find_element(&self, tag: &str) -> Option<usize> {
        self.descendants(self.root)
            .find(|&id| self.nodes[id].tag() == Some(tag))
    }

    /// Compact structural rendering, e.g. `html(body(p("Hi")))`, used by tests
    /// and debugging output.
    pub fn outline(&self) -> String {
        let mut out = String::new();
        self.outline_into(self.root, &mut out);
        out
    }

    fn outline_into(&self, id: usize, out: &mut String) {
        let node = &self.nodes[id];
        match &node.kind {
            DomKind::Text(t) => {
                out.push('"');
                out.push_str(t);
                out.push('"');
            }
            DomKind::Element { name, .. } => {
                out.push_str(name);
                if !node.children.is_empty() {
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
    }

    /// Removes whitespace-only text, non-content elements and elements left
    /// without children, to fixpoint. The document element and `body` are
    /// always kept.
    pub fn preprocess(&self) -> DomTree {
        let mut out = DomTree::new(self.source_len);
        let root = self.copy_pruned(self.root, &mut out, true);
        out.root = root.expect("document element is always kept");
        out
    }

    fn copy_pruned(&self, id: usize, out: &mut DomTree, keep: bool) -> Option<usize> {
        let node = &self.nodes[id];
        match &node.kind {
            DomKind::Text(t) => {
                if is_blank(t) {
                    return None;
                }
                Some(out.push(node.clone()))
            }
            DomKind::Element { name, attrs } => {
                let keep = keep || name == "body";
                if !keep && NON_CONTENT_TAGS.contains(&name.as_str()) {
                    return None;
                }
                // bottom-up: children first, so emptiness cascades in one pass
                let children: Vec<usize> = node
                    .children
                    .iter()
                    .filter_map(|&c| self.copy_pruned(c, out, false))
                    .collect();
                if children.is_empty() && !keep {
                    return None;
                }
                Some(out.push(DomNode {
                    kind: DomKind::Element {
                        name: name.clone(),
                        attrs: attrs.clone(),
                    },
                    children,
                    span: node.span,
                }))
            }
        }
    }
}
