//! Lenient HTML tokenizer and tree builder.
//!
//! Implements the subset of the HTML5 recovery rules that matter for text
//! segmentation: implied end tags for `p`, `li`, `dt`/`dd`, table parts and
//! headings, void elements, raw-text elements and an implicit `html > body`
//! skeleton. Formatting-element reconstruction and table foster parenting
//! are not performed. Every node records its character span in the input.

use std::borrow::Cow;

use crate::cdom::dom::{is_blank, DomKind, DomNode, DomTree, Span};
use crate::error::{Error, Result};

const VOID: &[&str] = &[
    "area", "base", "br", "col", "embed", "hr", "img", "input", "keygen", "link", "meta",
    "param", "source", "track", "wbr", "basefont", "bgsound", "frame", "image",
];

const RAW_TEXT: &[&str] = &[
    "script", "style", "textarea", "title", "xmp", "iframe", "noembed", "noframes", "noscript",
];

const ESCAPABLE_RAW_TEXT: &[&str] = &["textarea", "title"];

const HEAD_CONTENT: &[&str] = &[
    "title", "meta", "link", "style", "script", "base", "noscript", "template", "basefont",
    "bgsound",
];

/// Start tags that close an open `p` element.
const CLOSES_P: &[&str] = &[
    "address", "article", "aside", "blockquote", "center", "details", "dialog", "dir", "div",
    "dl", "fieldset", "figcaption", "figure", "footer", "form", "h1", "h2", "h3", "h4", "h5",
    "h6", "header", "hgroup", "hr", "li", "dd", "dt", "main", "menu", "nav", "ol", "p", "pre",
    "listing", "section", "summary", "table", "ul", "xmp", "plaintext", "search",
];

const HEADINGS: &[&str] = &["h1", "h2", "h3", "h4", "h5", "h6"];

/// Elements with special parsing behaviour; an unmatched inline end tag does
/// not close across them.
const SPECIAL: &[&str] = &[
    "address", "applet", "area", "article", "aside", "base", "basefont", "bgsound", "blockquote",
    "body", "br", "button", "caption", "center", "col", "colgroup", "dd", "details", "dir",
    "div", "dl", "dt", "embed", "fieldset", "figcaption", "figure", "footer", "form", "frame",
    "frameset", "h1", "h2", "h3", "h4", "h5", "h6", "head", "header", "hgroup", "hr", "html",
    "iframe", "img", "input", "keygen", "li", "link", "listing", "main", "marquee", "menu",
    "meta", "nav", "noembed", "noframes", "noscript", "object", "ol", "p", "param", "plaintext",
    "pre", "script", "search", "section", "select", "source", "style", "summary", "table",
    "tbody", "td", "template", "textarea", "tfoot", "th", "thead", "title", "tr", "track", "ul",
    "wbr", "xmp",
];

const SCOPE_BOUNDARY: &[&str] = &[
    "applet", "caption", "html", "table", "td", "th", "marquee", "object", "template", "body",
];

/// Parses markup into a DOM. Invalid UTF-8 is decoded lossily; malformed
/// markup never fails.
pub fn parse_html(markup: &[u8]) -> Result<DomTree> {
    let text = String::from_utf8_lossy(markup);
    if text.contains('\0') && text.chars().filter(|&c| c == '\0').count() * 4 > text.len() {
        return Err(Error::Parse("input looks like binary data".into()));
    }
    Ok(parse_str(&text))
}

pub fn parse_str(markup: &str) -> DomTree {
    let mut builder = Builder::new(markup);
    Tokenizer::new(markup).run(&mut builder);
    builder.finish()
}

enum Token<'a> {
    Text {
        start: usize,
        end: usize,
        raw: &'a str,
    },
    Start {
        start: usize,
        end: usize,
        name: String,
        attrs: Vec<(String, String)>,
        self_closing: bool,
    },
    End {
        start: usize,
        end: usize,
        name: String,
    },
}

struct Tokenizer<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Tokenizer<'a> {
    fn new(src: &'a str) -> Self {
        Tokenizer {
            src,
            bytes: src.as_bytes(),
            pos: 0,
        }
    }

    fn run(mut self, sink: &mut Builder) {
        let mut text_start = 0;
        while self.pos < self.bytes.len() {
            if self.bytes[self.pos] != b'<' {
                self.pos += 1;
                continue;
            }
            let lt = self.pos;
            let Some(token) = self.markup_at(lt) else {
                // literal '<'
                self.pos += 1;
                continue;
            };
            if text_start < lt {
                sink.token(Token::Text {
                    start: text_start,
                    end: lt,
                    raw: &self.src[text_start..lt],
                });
            }
            let raw_name = match &token {
                Some(Token::Start {
                    name, self_closing, ..
                }) if !self_closing && RAW_TEXT.contains(&name.as_str()) => Some(name.clone()),
                _ => None,
            };
            if let Some(token) = token {
                sink.token(token);
            }
            if let Some(name) = raw_name {
                let body_start = self.pos;
                let (body_end, close_end) = self.find_raw_end(&name);
                if body_start < body_end {
                    sink.raw_text(body_start, body_end, &self.src[body_start..body_end], &name);
                }
                sink.token(Token::End {
                    start: body_end,
                    end: close_end,
                    name,
                });
                self.pos = close_end;
            }
            text_start = self.pos;
        }
        if text_start < self.bytes.len() {
            sink.token(Token::Text {
                start: text_start,
                end: self.bytes.len(),
                raw: &self.src[text_start..],
            });
        }
    }

    /// Tries to read markup at `lt`. Returns `None` if the `<` is literal text,
    /// `Some(None)` for markup producing no token (comments, doctype).
    fn markup_at(&mut self, lt: usize) -> Option<Option<Token<'a>>> {
        let b = self.bytes;
        let next = *b.get(lt + 1)?;
        if next == b'!' {
            if b[lt..].starts_with(b"<!--") {
                let body = lt + 4;
                let end = find(b, body, b"-->").map(|i| i + 3).unwrap_or(b.len());
                self.pos = end;
            } else if b[lt..].starts_with(b"<![CDATA[") {
                let end = find(b, lt + 9, b"]]>").map(|i| i + 3).unwrap_or(b.len());
                self.pos = end;
            } else {
                self.pos = find(b, lt + 2, b">").map(|i| i + 1).unwrap_or(b.len());
            }
            return Some(None);
        }
        if next == b'?' {
            self.pos = find(b, lt + 2, b">").map(|i| i + 1).unwrap_or(b.len());
            return Some(None);
        }
        if next == b'/' {
            let after = *b.get(lt + 2)?;
            if after == b'>' {
                self.pos = lt + 3;
                return Some(None);
            }
            if !after.is_ascii_alphabetic() {
                self.pos = find(b, lt + 2, b">").map(|i| i + 1).unwrap_or(b.len());
                return Some(None);
            }
            let (name, mut p) = self.read_name(lt + 2);
            // end tags may carry junk attributes; skip to '>'
            while p < b.len() && b[p] != b'>' {
                p += 1;
            }
            if p >= b.len() {
                // unterminated tag at EOF is dropped
                self.pos = b.len();
                return Some(None);
            }
            self.pos = p + 1;
            return Some(Some(Token::End {
                start: lt,
                end: p + 1,
                name,
            }));
        }
        if !next.is_ascii_alphabetic() {
            return None;
        }
        let (name, p) = self.read_name(lt + 1);
        let Some((attrs, self_closing, end)) = self.read_attrs(p) else {
            self.pos = b.len();
            return Some(None);
        };
        self.pos = end;
        Some(Some(Token::Start {
            start: lt,
            end,
            name,
            attrs,
            self_closing,
        }))
    }

    fn read_name(&self, from: usize) -> (String, usize) {
        let b = self.bytes;
        let mut p = from;
        while p < b.len() && !b[p].is_ascii_whitespace() && b[p] != b'/' && b[p] != b'>' {
            p += 1;
        }
        (self.src[from..p].to_ascii_lowercase(), p)
    }

    fn read_attrs(&self, mut p: usize) -> Option<(Vec<(String, String)>, bool, usize)> {
        let b = self.bytes;
        let mut attrs: Vec<(String, String)> = Vec::new();
        loop {
            while p < b.len() && (b[p].is_ascii_whitespace() || b[p] == b'/') {
                if b[p] == b'/' && b.get(p + 1) == Some(&b'>') {
                    return Some((attrs, true, p + 2));
                }
                p += 1;
            }
            if p >= b.len() {
                return None;
            }
            if b[p] == b'>' {
                return Some((attrs, false, p + 1));
            }
            let name_start = p;
            p += 1;
            while p < b.len()
                && !b[p].is_ascii_whitespace()
                && !matches!(b[p], b'/' | b'>' | b'=')
            {
                p += 1;
            }
            let name = self.src[name_start..p].to_ascii_lowercase();
            while p < b.len() && b[p].is_ascii_whitespace() {
                p += 1;
            }
            let mut value = String::new();
            if p < b.len() && b[p] == b'=' {
                p += 1;
                while p < b.len() && b[p].is_ascii_whitespace() {
                    p += 1;
                }
                if p >= b.len() {
                    return None;
                }
                let raw = if b[p] == b'"' || b[p] == b'\'' {
                    let q = b[p];
                    let vs = p + 1;
                    let ve = b[vs..].iter().position(|&c| c == q).map(|i| vs + i)?;
                    p = ve + 1;
                    &self.src[vs..ve]
                } else {
                    let vs = p;
                    while p < b.len() && !b[p].is_ascii_whitespace() && b[p] != b'>' {
                        p += 1;
                    }
                    &self.src[vs..p]
                };
                value = decode_entities(raw).into_owned();
            }
            if !attrs.iter().any(|(k, _)| *k == name) {
                attrs.push((name, value));
            }
        }
    }

    /// Locates `</name` (ASCII case-insensitive) terminating a raw-text element.
    /// Returns (start of close tag, end of close tag).
    fn find_raw_end(&self, name: &str) -> (usize, usize) {
        let b = self.bytes;
        let n = name.len();
        let mut p = self.pos;
        while let Some(i) = find(b, p, b"</") {
            let after = i + 2;
            if after + n <= b.len()
                && b[after..after + n].eq_ignore_ascii_case(name.as_bytes())
                && b
                    .get(after + n)
                    .is_none_or(|&c| c.is_ascii_whitespace() || c == b'/' || c == b'>')
            {
                let close = find(b, after + n, b">").map(|j| j + 1).unwrap_or(b.len());
                return (i, close);
            }
            p = after;
        }
        (b.len(), b.len())
    }
}

fn find(hay: &[u8], from: usize, needle: &[u8]) -> Option<usize> {
    if from >= hay.len() {
        return None;
    }
    hay[from..]
        .windows(needle.len())
        .position(|w| w == needle)
        .map(|i| i + from)
}

fn decode_entities(raw: &str) -> Cow<'_, str> {
    if raw.contains('&') {
        html_escape::decode_html_entities(raw)
    } else {
        Cow::Borrowed(raw)
    }
}

#[derive(PartialEq, Eq, Clone, Copy)]
enum Mode {
    BeforeBody,
    InHead,
    InBody,
}

struct Builder {
    tree: DomTree,
    /// byte offset -> char offset, empty when the input is ASCII
    char_index: Vec<usize>,
    byte_len: usize,
    html: usize,
    head: Option<usize>,
    body: Option<usize>,
    stack: Vec<usize>,
    mode: Mode,
}

impl Builder {
    fn new(src: &str) -> Self {
        let char_index = if src.is_ascii() {
            Vec::new()
        } else {
            let mut idx = vec![0usize; src.len() + 1];
            let mut count = 0;
            for (b, _) in src.char_indices() {
                idx[b] = count;
                count += 1;
            }
            idx[src.len()] = count;
            // only char boundaries are ever looked up
            idx
        };
        let char_len = if char_index.is_empty() {
            src.len()
        } else {
            char_index[src.len()]
        };
        let mut tree = DomTree::new(char_len);
        let html = tree.push(DomNode {
            kind: DomKind::Element {
                name: "html".into(),
                attrs: Vec::new(),
            },
            children: Vec::new(),
            span: Span::new(0, char_len),
        });
        tree.root = html;
        Builder {
            tree,
            char_index,
            byte_len: src.len(),
            html,
            head: None,
            body: None,
            stack: vec![html],
            mode: Mode::BeforeBody,
        }
    }

    fn ch(&self, byte: usize) -> usize {
        if self.char_index.is_empty() {
            byte
        } else {
            self.char_index[byte]
        }
    }

    fn current(&self) -> usize {
        *self.stack.last().expect("stack holds html")
    }

    fn name_of(&self, id: usize) -> &str {
        self.tree.nodes[id].tag().unwrap_or("")
    }

    fn append(&mut self, parent: usize, node: DomNode) -> usize {
        let id = self.tree.push(node);
        self.tree.nodes[parent].children.push(id);
        id
    }

    fn element(&self, name: &str, attrs: Vec<(String, String)>, start: usize, end: usize) -> DomNode {
        DomNode {
            kind: DomKind::Element {
                name: name.to_string(),
                attrs,
            },
            children: Vec::new(),
            span: Span::new(self.ch(start), self.ch(end)),
        }
    }

    fn ensure_head(&mut self, at: usize) -> usize {
        if let Some(h) = self.head {
            return h;
        }
        let node = self.element("head", Vec::new(), at, at);
        let h = self.append(self.html, node);
        self.head = Some(h);
        h
    }

    fn ensure_body(&mut self, at: usize, attrs: Vec<(String, String)>) -> usize {
        if let Some(b) = self.body {
            self.merge_attrs(b, attrs);
            return b;
        }
        if self.mode == Mode::InHead {
            self.close_element_at(at);
        }
        let mut node = self.element("body", attrs, at, self.byte_len);
        node.span = Span::new(self.ch(at), self.tree.source_len);
        let b = self.append(self.html, node);
        self.body = Some(b);
        self.stack.truncate(1);
        self.stack.push(b);
        self.mode = Mode::InBody;
        b
    }

    fn merge_attrs(&mut self, id: usize, extra: Vec<(String, String)>) {
        if let DomKind::Element { attrs, .. } = &mut self.tree.nodes[id].kind {
            for (k, v) in extra {
                if !attrs.iter().any(|(ek, _)| *ek == k) {
                    attrs.push((k, v));
                }
            }
        }
    }

    /// Pops the current element, closing its span at byte `at`.
    fn close_element_at(&mut self, at: usize) {
        if self.stack.len() <= 1 {
            return;
        }
        let id = self.stack.pop().unwrap();
        let start = self.tree.nodes[id].span.start;
        self.tree.nodes[id].span = Span::new(start, self.ch(at));
    }

    /// Pops through stack index `idx` (inclusive).
    fn pop_through(&mut self, idx: usize, at: usize) {
        while self.stack.len() > idx {
            self.close_element_at(at);
        }
    }

    /// Finds `targets` on the stack searching from the top, giving up at any
    /// element in `stop` (checked after the target test).
    fn find_open(&self, targets: &[&str], stop: &[&str]) -> Option<usize> {
        for (i, &id) in self.stack.iter().enumerate().rev() {
            let name = self.name_of(id);
            if targets.contains(&name) {
                return Some(i);
            }
            if stop.contains(&name) || i == 0 {
                return None;
            }
        }
        None
    }

    fn raw_text(&mut self, start: usize, end: usize, raw: &str, element: &str) {
        let text = if ESCAPABLE_RAW_TEXT.contains(&element) {
            decode_entities(raw).into_owned()
        } else {
            raw.to_string()
        };
        let node = DomNode {
            kind: DomKind::Text(text),
            children: Vec::new(),
            span: Span::new(self.ch(start), self.ch(end)),
        };
        let parent = self.current();
        self.append(parent, node);
    }

    fn token(&mut self, token: Token<'_>) {
        match token {
            Token::Text { start, end, raw } => self.text(start, end, raw),
            Token::Start {
                start,
                end,
                name,
                attrs,
                self_closing,
            } => self.start_tag(start, end, name, attrs, self_closing),
            Token::End { start, end, name } => self.end_tag(start, end, &name),
        }
    }

    fn text(&mut self, start: usize, end: usize, raw: &str) {
        if self.mode != Mode::InBody {
            if is_blank(raw) {
                return;
            }
            self.ensure_body(start, Vec::new());
        }
        let decoded = decode_entities(raw);
        let parent = self.current();
        let (s, e) = (self.ch(start), self.ch(end));
        if let Some(&last) = self.tree.nodes[parent].children.last() {
            if let DomKind::Text(t) = &mut self.tree.nodes[last].kind {
                t.push_str(&decoded);
                let span_start = self.tree.nodes[last].span.start;
                self.tree.nodes[last].span = Span::new(span_start, e);
                return;
            }
        }
        let node = DomNode {
            kind: DomKind::Text(decoded.into_owned()),
            children: Vec::new(),
            span: Span::new(s, e),
        };
        self.append(parent, node);
    }

    fn start_tag(
        &mut self,
        start: usize,
        end: usize,
        name: String,
        attrs: Vec<(String, String)>,
        self_closing: bool,
    ) {
        let name = if name == "image" { "img".to_string() } else { name };
        match name.as_str() {
            "html" => {
                self.merge_attrs(self.html, attrs);
                return;
            }
            "head" => {
                if self.mode == Mode::BeforeBody && self.head.is_none() {
                    let h = self.ensure_head(start);
                    self.tree.nodes[h].span = Span::new(self.ch(start), self.ch(end));
                    self.merge_attrs(h, attrs);
                    self.stack.push(h);
                    self.mode = Mode::InHead;
                }
                return;
            }
            "body" => {
                self.ensure_body(start, attrs);
                return;
            }
            _ => {}
        }

        if self.mode != Mode::InBody {
            if HEAD_CONTENT.contains(&name.as_str()) {
                if self.mode == Mode::BeforeBody {
                    let h = self.ensure_head(start);
                    self.stack.push(h);
                    self.mode = Mode::InHead;
                }
            } else {
                self.ensure_body(start, Vec::new());
            }
        }

        if self.mode == Mode::InBody {
            self.implied_end_tags(&name, start);
        }

        let node = self.element(&name, attrs, start, end);
        let parent = self.current();
        let id = self.append(parent, node);
        let is_void = VOID.contains(&name.as_str());
        if !is_void && !self_closing {
            self.stack.push(id);
        }
    }

    fn implied_end_tags(&mut self, name: &str, at: usize) {
        if CLOSES_P.contains(&name) {
            if let Some(i) = self.find_open(&["p"], &[SCOPE_BOUNDARY, &["button"]].concat()) {
                self.pop_through(i, at);
            }
        }
        match name {
            "li" => {
                if let Some(i) = self.find_open(
                    &["li"],
                    &[SCOPE_BOUNDARY, &["ul", "ol", "menu", "button"]].concat(),
                ) {
                    self.pop_through(i, at);
                }
            }
            "dt" | "dd" => {
                if let Some(i) = self.find_open(&["dt", "dd"], &[SCOPE_BOUNDARY, &["dl"]].concat())
                {
                    self.pop_through(i, at);
                }
            }
            "tr" => {
                if let Some(i) = self.find_open(
                    &["tr"],
                    &["table", "tbody", "thead", "tfoot", "html", "template"],
                ) {
                    self.pop_through(i, at);
                }
            }
            "td" | "th" => {
                if let Some(i) = self.find_open(&["td", "th"], &["tr", "table", "html", "template"])
                {
                    self.pop_through(i, at);
                }
            }
            "tbody" | "thead" | "tfoot" => {
                if let Some(i) = self.find_open(
                    &["tbody", "thead", "tfoot"],
                    &["table", "html", "template"],
                ) {
                    self.pop_through(i, at);
                }
            }
            "option" => {
                if self.name_of(self.current()) == "option" {
                    self.close_element_at(at);
                }
            }
            "optgroup" => {
                if let Some(i) = self.find_open(&["option", "optgroup"], &["select", "html"]) {
                    self.pop_through(i, at);
                }
            }
            "a" => {
                if let Some(i) = self.find_open(&["a"], SCOPE_BOUNDARY) {
                    self.pop_through(i, at);
                }
            }
            n if HEADINGS.contains(&n)
                && HEADINGS.contains(&self.name_of(self.current())) => {
                    self.close_element_at(at);
                }
            _ => {}
        }
    }

    fn end_tag(&mut self, start: usize, end: usize, name: &str) {
        match name {
            "html" | "body" => return,
            "head" => {
                if self.mode == Mode::InHead {
                    self.close_element_at(end);
                    self.mode = Mode::BeforeBody;
                }
                return;
            }
            "br" => {
                self.start_tag(start, end, "br".into(), Vec::new(), true);
                return;
            }
            _ => {}
        }
        if self.mode == Mode::InHead {
            if let Some(i) = self.find_open(&[name], &["head"]) {
                self.pop_through(i, end);
            }
            return;
        }
        if SPECIAL.contains(&name) {
            let boundary: &[&str] = match name {
                "li" => &["applet", "caption", "html", "table", "td", "th", "marquee", "object",
                    "template", "body", "ul", "ol"],
                "p" => &["applet", "caption", "html", "table", "td", "th", "marquee", "object",
                    "template", "body", "button"],
                "td" | "th" | "tr" | "tbody" | "thead" | "tfoot" | "caption" => {
                    &["table", "html", "template"]
                }
                "table" => &["html", "template"],
                _ => SCOPE_BOUNDARY,
            };
            if let Some(i) = self.find_open(&[name], boundary) {
                self.pop_through(i, end);
            }
        } else {
            for i in (1..self.stack.len()).rev() {
                let here = self.name_of(self.stack[i]);
                if here == name {
                    self.pop_through(i, end);
                    return;
                }
                if SPECIAL.contains(&here) {
                    return;
                }
            }
        }
    }

    fn finish(mut self) -> DomTree {
        let end = self.byte_len;
        while self.stack.len() > 1 {
            self.close_element_at(end);
        }
        if self.body.is_none() {
            let node = self.element("body", Vec::new(), end, end);
            let b = self.append(self.html, node);
            self.body = Some(b);
        }
        self.tree
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn outline(html: &str) -> String {
        parse_str(html).outline()
    }

    #[test]
    fn minimal_document() {
        assert_eq!(outline("<p>Hi</p>"), "html(body(p(\"Hi\")))");
    }

    #[test]
    fn unclosed_paragraphs_become_siblings() {
        assert_eq!(outline("<p>a<p>b"), "html(body(p(\"a\"),p(\"b\")))");
    }

    #[test]
    fn list_items_close_each_other() {
        assert_eq!(
            outline("<ul><li>a<li>b</ul>"),
            "html(body(ul(li(\"a\"),li(\"b\"))))"
        );
    }

    #[test]
    fn entities_are_decoded() {
        assert_eq!(
            outline("<p>a &amp; b &copy; &#169; &lt;x&gt;</p>"),
            "html(body(p(\"a & b © © <x>\")))"
        );
    }

    #[test]
    fn script_content_is_raw() {
        assert_eq!(
            outline("<script>if (a<b) { x = '</p>'; }</script><p>k</p>"),
            "html(head(script(\"if (a<b) { x = '</p>'; }\")),body(p(\"k\")))"
        );
    }

    #[test]
    fn comments_doctype_and_cdata_are_skipped() {
        assert_eq!(
            outline("<!DOCTYPE html><!-- c --><p>a<!-- x -->b<![CDATA[zz]]></p>"),
            "html(body(p(\"ab\")))"
        );
    }

    #[test]
    fn head_and_body_are_placed() {
        assert_eq!(
            outline("<html><head><title>T</title></head><body class=x><div>d</div></body></html>"),
            "html(head(title(\"T\")),body(div(\"d\")))"
        );
        let t = parse_str("<body class=\"main\"><p>x</p></body>");
        let body = t.find_element("body").unwrap();
        assert_eq!(t.node(body).attr("class"), Some("main"));
    }

    #[test]
    fn stray_end_tags_are_ignored() {
        assert_eq!(outline("</div><p>a</span>b</p>"), "html(body(p(\"ab\")))");
    }

    #[test]
    fn literal_less_than() {
        assert_eq!(outline("<p>1 < 2</p>"), "html(body(p(\"1 < 2\")))");
    }

    #[test]
    fn unterminated_tag_is_dropped() {
        assert_eq!(outline("<p>a</p><div class=\"x"), "html(body(p(\"a\")))");
    }

    #[test]
    fn spans_are_character_offsets() {
        let src = "<p>héllo</p><p>w</p>";
        let t = parse_str(src);
        let ps: Vec<usize> = t
            .descendants(t.root())
            .filter(|&i| t.node(i).tag() == Some("p"))
            .collect();
        assert_eq!(t.node(ps[0]).span, Span { start: 0, len: 12 });
        assert_eq!(t.node(ps[1]).span, Span { start: 12, len: 8 });
        assert_eq!(t.source_len(), src.chars().count());
    }

    #[test]
    fn implicitly_closed_span_ends_at_next_token() {
        let t = parse_str("<p>ab<div>c</div>");
        let p = t.find_element("p").unwrap();
        assert_eq!(t.node(p).span, Span { start: 0, len: 5 });
    }

    #[test]
    fn lossy_decoding() {
        let t = parse_html(b"<p>caf\xe9</p>").unwrap();
        assert_eq!(t.outline(), "html(body(p(\"caf\u{fffd}\")))");
    }

    #[test]
    fn binary_input_is_rejected() {
        assert!(parse_html(&[0u8; 64]).is_err());
    }
}
