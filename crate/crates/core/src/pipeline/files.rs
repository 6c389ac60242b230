//! On-disk corpus layout: `<id>.html` pages, `<id>.txt` cleaned texts,
//! `<id>.labels` block labels, and a manifest of `<split> <id>` lines.

use std::fs;
use std::path::Path;

use once_cell::sync::Lazy;
use rayon::prelude::*;
use regex::Regex;

use super::corpus::{Corpus, Page, Split};
use crate::aligner::{align_blocks, AlignmentResult};
use crate::blocks::{segment, PageFeatures};
use crate::cdom::build_cdom;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub split: Split,
    pub id: String,
}

/// Parses manifest text. Blank lines and `#` comments are ignored.
pub fn parse_manifest(text: &str) -> Result<Vec<ManifestEntry>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let (Some(split), Some(id), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(Error::Corpus(format!("manifest line {}: expected `<split> <id>`", n + 1)));
        };
        let split = split
            .parse()
            .map_err(|e: Error| Error::Corpus(format!("manifest line {}: {e}", n + 1)))?;
        out.push(ManifestEntry {
            split,
            id: id.to_string(),
        });
    }
    Ok(out)
}

pub fn format_manifest(entries: &[ManifestEntry]) -> String {
    entries.iter().map(|e| format!("{} {}\n", e.split, e.id)).collect()
}

static CLEANEVAL_MARKER: Lazy<Regex> = Lazy::new(|| Regex::new(r"(?mi)^[ \t]*<(?:p|h|l)>").unwrap());

/// Cleaned text as used for alignment: a leading `URL:` line and the
/// paragraph markers (`<p>`, `<h>`, `<l>`) of CleanEval gold files are
/// dropped.
pub fn clean_text_from_file(raw: &str) -> String {
    let body = match raw.trim_start_matches('\u{feff}').split_once('\n') {
        Some((first, rest)) if first.trim_start().starts_with("URL:") => rest,
        None if raw.trim_start().starts_with("URL:") => "",
        _ => raw,
    };
    CLEANEVAL_MARKER.replace_all(body, "").into_owned()
}

/// One `label<TAB>ratio` line per block.
pub fn format_labels(result: &AlignmentResult) -> String {
    result
        .labels
        .iter()
        .zip(&result.ratios)
        .map(|(l, r)| format!("{l}\t{r:.4}\n"))
        .collect()
}

/// Reads the first column of a labels file.
pub fn parse_labels(text: &str) -> Result<Vec<u8>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, l)| match l.split_whitespace().next() {
            Some("0") => Ok(0),
            Some("1") => Ok(1),
            _ => Err(Error::Corpus(format!("labels line {}: expected 0 or 1", n + 1))),
        })
        .collect()
}

/// Aligns one page against its cleaned text.
pub fn label_page(markup: &[u8], clean: &str) -> Result<AlignmentResult> {
    let tree = build_cdom(markup)?;
    Ok(align_blocks(&segment(&tree), &clean_text_from_file(clean)))
}

fn read_text(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::Corpus(format!("{}: {e}", path.display())))?;
    Ok(String::from_utf8_lossy(&bytes).into_owned())
}

fn collect_failures<T>(results: Vec<(String, Result<T>)>) -> Result<Vec<T>> {
    let mut ok = Vec::new();
    let mut bad = Vec::new();
    for (id, r) in results {
        match r {
            Ok(v) => ok.push(v),
            Err(e) => bad.push(format!("{id} ({e})")),
        }
    }
    if bad.is_empty() {
        Ok(ok)
    } else {
        Err(Error::Corpus(format!("offending ids: {}", bad.join(", "))))
    }
}

/// Writes `<id>.labels` for every manifest entry that has `<id>.txt`.
/// Returns the number of pages labeled.
pub fn label_corpus(dir: &Path, entries: &[ManifestEntry]) -> Result<usize> {
    let results: Vec<(String, Result<()>)> = entries
        .par_iter()
        .map(|e| {
            let r = (|| {
                let markup = fs::read(dir.join(format!("{}.html", e.id)))?;
                let clean = read_text(&dir.join(format!("{}.txt", e.id)))?;
                let result = label_page(&markup, &clean)?;
                fs::write(dir.join(format!("{}.labels", e.id)), format_labels(&result))?;
                Ok(())
            })();
            (e.id.clone(), r)
        })
        .collect();
    Ok(collect_failures(results)?.len())
}

/// Loads and featurizes every page of the manifest. All problems are
/// collected and reported together.
pub fn load_corpus(dir: &Path, entries: &[ManifestEntry]) -> Result<Corpus> {
    let results: Vec<(String, Result<Page>)> = entries
        .par_iter()
        .map(|e| {
            let r = (|| {
                let markup = fs::read(dir.join(format!("{}.html", e.id)))
                    .map_err(|err| Error::Corpus(format!("missing html: {err}")))?;
                let labels = parse_labels(&read_text(&dir.join(format!("{}.labels", e.id)))?)?;
                let features = PageFeatures::from_html(&markup)?;
                Page::new(e.id.clone(), e.split, features, labels)
            })();
            (e.id.clone(), r)
        })
        .collect();
    Ok(Corpus::new(collect_failures(results)?))
}

pub fn load_manifest(path: &Path) -> Result<Vec<ManifestEntry>> {
    parse_manifest(&read_text(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_parsing() {
        let m = parse_manifest("# header\ntrain a1\n\nvalidation b2 # note\ntest c3\n").unwrap();
        assert_eq!(m.len(), 3);
        assert_eq!(m[1], ManifestEntry { split: Split::Validation, id: "b2".into() });
        assert_eq!(parse_manifest(&format_manifest(&m)).unwrap(), m);
        assert!(parse_manifest("dev x").is_err());
        assert!(parse_manifest("train").is_err());
        assert!(parse_manifest("train a b").is_err());
    }

    #[test]
    fn cleaneval_headers_are_stripped() {
        let raw = "URL: http://example.com/page\n<h>Title here\n<p>First paragraph.\n<l>item\n";
        assert_eq!(clean_text_from_file(raw), "Title here\nFirst paragraph.\nitem\n");
        assert_eq!(clean_text_from_file("plain text"), "plain text");
        assert_eq!(clean_text_from_file("URL: x"), "");
    }

    #[test]
    fn labels_parsing() {
        assert_eq!(parse_labels("1\t0.9000\n0\t0.1000\n\n1\n").unwrap(), vec![1, 0, 1]);
        assert!(parse_labels("2\n").is_err());
    }

    #[test]
    fn whole_page_and_empty_clean() {
        let html = b"<body><p>The first paragraph of the page.</p><div>Second block here</div></body>";
        let all = label_page(html, "The first paragraph of the page. Second block here").unwrap();
        assert_eq!(all.labels, vec![1, 1]);
        let none = label_page(html, "").unwrap();
        assert_eq!(none.labels, vec![0, 0]);
        assert_eq!(format_labels(&none), "0\t0.0000\n0\t0.0000\n");
    }
}
