//! Generator for labeled synthetic news-style pages.
//!
//! Content is headings plus paragraphs of 3 to 8 sentences with ordinary
//! stopword density; boilerplate is navigation link lists, breadcrumbs,
//! share links, related-article lists, bylines and copyright footers. Labels
//! are known by construction and checked against the page segmentation.

use std::fs;
use std::ops::RangeInclusive;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::blocks::segment;
use crate::cdom::build_cdom;
use crate::error::Result;
use crate::pipeline::files::{format_manifest, ManifestEntry};
use crate::pipeline::{derive_seed, Split};

const FUNCTION_WORDS: &[&str] = &[
    "the", "of", "and", "to", "in", "a", "is", "that", "for", "it", "was", "on", "with", "as", "by", "at",
    "from", "this", "be", "are", "have", "which", "their", "has", "but", "not", "they", "were", "been", "an",
    "or", "its", "into", "more", "than", "when", "who", "would", "there", "about",
];

const CONTENT_WORDS: &[&str] = &[
    "government", "report", "city", "council", "plan", "water", "school", "children", "market", "price",
    "energy", "company", "workers", "river", "bridge", "project", "study", "researchers", "data", "health",
    "hospital", "patients", "budget", "village", "farmers", "season", "weather", "storm", "road", "traffic",
    "museum", "history", "painting", "music", "festival", "audience", "team", "match", "players", "coach",
    "election", "voters", "minister", "policy", "law", "court", "judge", "decision", "community", "residents",
    "houses", "rent", "bank", "interest", "growth", "economy", "exports", "factory", "technology", "software",
    "network", "phone", "users", "privacy", "science", "planet", "telescope", "ocean", "forest", "species",
    "climate", "carbon", "emissions", "transport", "railway", "airport", "tourists", "hotel", "restaurant",
    "food", "recipe", "garden", "university", "students", "teachers", "library", "books", "author", "novel",
    "film", "director", "actors", "stage", "police", "investigation", "witnesses", "evidence", "changes",
    "announced", "expected", "reported", "increased", "reduced", "argued", "described", "suggested",
    "considered", "developed", "improved", "opened", "closed", "started", "finished", "raised", "lowered",
    "important", "local", "national", "recent", "significant", "several", "new", "old", "large", "small",
    "public", "private", "early", "late", "difficult", "possible", "necessary", "similar", "different",
    "annual", "regional", "careful", "quickly", "slowly", "finally", "already", "yesterday", "morning",
    "evening", "officials", "members", "families", "visitors", "experts", "analysts", "sources", "figures",
];

const NAV_WORDS: &[&str] = &[
    "Home", "News", "Sport", "Business", "Technology", "Science", "Health", "Travel", "Culture", "Opinion",
    "About", "Contact", "Login", "Register", "Subscribe", "Archive", "Weather", "Video", "Photos", "Blog",
    "Shop", "Events", "Jobs", "Help", "World", "Politics", "Money", "Style", "Food", "Books",
];

const SITE_NAMES: &[&str] = &[
    "Daily Courier", "Morning Ledger", "Valley Times", "Harbor Post", "Northern Star", "City Herald",
    "Evening Gazette", "Coastal Review",
];

const SHARE_LINKS: &[&str] = &[
    "Share on Facebook", "Tweet", "Email this", "Print", "Share", "Save", "Pin it", "Comments",
];

const FOOTER_LINKS: &[&str] = &[
    "Privacy policy", "Terms of use", "Cookies", "Advertise", "Contact us", "Site map", "Careers", "RSS",
];

const MONTHS: &[&str] = &[
    "January", "February", "March", "April", "May", "June", "July", "August", "September", "October",
    "November", "December",
];

/// Size knobs for one page.
#[derive(Debug, Clone, PartialEq)]
pub struct PageShape {
    pub nav_links: RangeInclusive<usize>,
    pub sections: RangeInclusive<usize>,
    pub paragraphs_per_section: RangeInclusive<usize>,
    pub related_links: RangeInclusive<usize>,
    pub footer_links: RangeInclusive<usize>,
}

impl Default for PageShape {
    fn default() -> Self {
        PageShape {
            nav_links: 4..=9,
            sections: 1..=3,
            paragraphs_per_section: 1..=4,
            related_links: 2..=6,
            footer_links: 2..=5,
        }
    }
}

impl PageShape {
    /// Roughly 190 blocks per page, the size of an average real-world page.
    pub fn large() -> Self {
        PageShape {
            nav_links: 40..=45,
            sections: 6..=7,
            paragraphs_per_section: 6..=8,
            related_links: 35..=40,
            footer_links: 14..=14,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticPage {
    pub id: String,
    pub html: String,
    /// The content blocks, one paragraph or heading per line.
    pub clean: String,
    pub texts: Vec<String>,
    pub labels: Vec<u8>,
}

struct Builder<'r, R> {
    rng: &'r mut R,
    html: String,
    texts: Vec<String>,
    labels: Vec<u8>,
    clean: Vec<String>,
}

fn capitalize(w: &str) -> String {
    let mut c = w.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl<R: Rng> Builder<'_, R> {
    fn pick<'a>(&mut self, list: &[&'a str]) -> &'a str {
        list.choose(self.rng).expect("non-empty word list")
    }

    fn words(&mut self, n: usize) -> Vec<String> {
        (0..n)
            .map(|_| {
                if self.rng.gen_bool(0.45) {
                    self.pick(FUNCTION_WORDS).to_string()
                } else {
                    self.pick(CONTENT_WORDS).to_string()
                }
            })
            .collect()
    }

    fn sentence(&mut self) -> String {
        let n = self.rng.gen_range(8..=22);
        let mut words = self.words(n);
        words[0] = capitalize(&words[0]);
        if n > 10 && self.rng.gen_bool(0.5) {
            let k = self.rng.gen_range(3..n - 3);
            words[k].push(',');
        }
        if self.rng.gen_bool(0.1) {
            let year = self.rng.gen_range(1990..=2016);
            words.insert(n / 2, year.to_string());
        }
        let end = if self.rng.gen_bool(0.08) { "?" } else { "." };
        words.join(" ") + end
    }

    fn title(&mut self, lo: usize, hi: usize) -> String {
        let n = self.rng.gen_range(lo..=hi);
        (0..n)
            .map(|_| capitalize(self.pick(CONTENT_WORDS)))
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Emits markup around a single text leaf.
    fn leaf(&mut self, open: &str, close: &str, text: String, label: u8) {
        self.html.push_str(open);
        self.html.push_str(&escape(&text));
        self.html.push_str(close);
        if label == 1 {
            self.clean.push(text.clone());
        }
        self.texts.push(text);
        self.labels.push(label);
    }

    fn paragraph(&mut self) {
        let n = self.rng.gen_range(3..=8);
        let sentences: Vec<String> = (0..n).map(|_| self.sentence()).collect();
        let text = sentences.join(" ");
        if n >= 4 && self.rng.gen_bool(0.15) {
            // a paragraph with an inline link splits into three content blocks
            let before = sentences[..2].join(" ");
            let link = self.title(2, 4).to_lowercase();
            let after = sentences[2..].join(" ");
            self.html.push_str("<p>");
            self.html.push_str(&escape(&before));
            self.html.push_str(" <a href=\"/story\">");
            self.html.push_str(&escape(&link));
            self.html.push_str("</a> ");
            self.html.push_str(&escape(&after));
            self.html.push_str("</p>\n");
            self.clean.push(format!("{before} {link} {after}"));
            for t in [before, link, after] {
                self.texts.push(t);
                self.labels.push(1);
            }
        } else {
            self.leaf("<p>", "</p>\n", text, 1);
        }
    }

    fn link_list(&mut self, class: &str, items: Vec<String>) {
        self.html.push_str(&format!("<ul class=\"{class}\">\n"));
        for item in items {
            let href = format!("/{}", item.to_lowercase().replace(' ', "-"));
            self.leaf(&format!("<li><a href=\"{href}\">"), "</a></li>\n", item, 0);
        }
        self.html.push_str("</ul>\n");
    }

    fn nav(&mut self, shape: &PageShape, site: &str) {
        self.html.push_str("<div class=\"header\">\n");
        self.leaf("<div class=\"logo\"><a href=\"/\">", "</a></div>\n", site.to_string(), 0);
        let n = self.rng.gen_range(shape.nav_links.clone());
        let mut words: Vec<&str> = NAV_WORDS.to_vec();
        words.shuffle(self.rng);
        let mut items: Vec<String> = words.iter().cycle().take(n).map(|w| w.to_string()).collect();
        for (i, item) in items.iter_mut().enumerate().skip(NAV_WORDS.len()) {
            *item = format!("{item} {}", i / NAV_WORDS.len() + 1);
        }
        self.link_list("nav", items);
        self.html.push_str("</div>\n");
        if self.rng.gen_bool(0.6) {
            self.html.push_str("<div class=\"breadcrumbs\">");
            let section = self.pick(NAV_WORDS).to_string();
            self.leaf("<a href=\"/\">", "</a>", "Home".into(), 0);
            self.leaf(" <span class=\"sep\">", "</span> ", ">".into(), 0);
            self.leaf("<a href=\"/section\">", "</a>", section, 0);
            self.html.push_str("</div>\n");
        }
    }

    fn article(&mut self, shape: &PageShape) {
        self.html.push_str("<div class=\"article\">\n");
        let title = self.title(4, 9);
        self.leaf("<h1>", "</h1>\n", title, 1);
        if self.rng.gen_bool(0.7) {
            let byline = format!(
                "By {} {}, {} {}, {}",
                capitalize(self.pick(CONTENT_WORDS)),
                capitalize(self.pick(CONTENT_WORDS)),
                self.pick(MONTHS),
                self.rng.gen_range(1..=28),
                self.rng.gen_range(2005..=2016)
            );
            self.leaf("<div class=\"byline\">", "</div>\n", byline, 0);
        }
        let sections = self.rng.gen_range(shape.sections.clone());
        for s in 0..sections {
            if s > 0 {
                let heading = self.title(2, 6);
                self.leaf("<h2>", "</h2>\n", heading, 1);
            }
            for _ in 0..self.rng.gen_range(shape.paragraphs_per_section.clone()) {
                self.paragraph();
            }
        }
        if self.rng.gen_bool(0.7) {
            self.html.push_str("<div class=\"share\">");
            let mut links = SHARE_LINKS.to_vec();
            links.shuffle(self.rng);
            let n = self.rng.gen_range(2..=5);
            for l in &links[..n] {
                self.leaf("<a href=\"#share\">", "</a>\n", l.to_string(), 0);
            }
            self.html.push_str("</div>\n");
        }
        self.html.push_str("</div>\n");
    }

    fn sidebar(&mut self, shape: &PageShape) {
        self.html.push_str("<div class=\"sidebar\">\n");
        self.leaf("<h3>", "</h3>\n", "Related articles".into(), 0);
        let n = self.rng.gen_range(shape.related_links.clone());
        let items = (0..n).map(|_| self.title(3, 7)).collect();
        self.link_list("related", items);
        if self.rng.gen_bool(0.4) {
            self.leaf("<div class=\"ad\">", "</div>\n", "Advertisement".into(), 0);
        }
        self.html.push_str("</div>\n");
    }

    fn footer(&mut self, shape: &PageShape, site: &str) {
        self.html.push_str("<div class=\"footer\">\n");
        let n = self.rng.gen_range(shape.footer_links.clone());
        let mut links = FOOTER_LINKS.to_vec();
        links.shuffle(self.rng);
        for (i, l) in links.iter().cycle().take(n).enumerate() {
            if i > 0 {
                self.leaf("<span>", "</span>\n", "|".into(), 0);
            }
            self.leaf("<a href=\"/info\">", "</a>\n", l.to_string(), 0);
        }
        let year = self.rng.gen_range(2008..=2016);
        let line = match self.rng.gen_range(0..3) {
            0 => format!("© {year} {site}. All rights reserved."),
            1 => format!("Copyright {year} {site} Ltd. contact@{}.com", site.to_lowercase().replace(' ', "")),
            _ => format!("© {site} {year}"),
        };
        self.leaf("<p class=\"copyright\">", "</p>\n", line, 0);
        self.html.push_str("</div>\n");
    }
}

pub fn generate_page<R: Rng>(rng: &mut R, id: &str, shape: &PageShape) -> SyntheticPage {
    let site = *SITE_NAMES.choose(rng).expect("site names");
    let mut b = Builder {
        rng,
        html: String::new(),
        texts: Vec::new(),
        labels: Vec::new(),
        clean: Vec::new(),
    };
    b.html.push_str(&format!(
        "<!DOCTYPE html>\n<html>\n<head><title>{site}</title>\n<script>var x = 1;</script></head>\n<body>\n"
    ));
    b.nav(shape, site);
    let sidebar_first = b.rng.gen_bool(0.3);
    if sidebar_first {
        b.sidebar(shape);
    }
    b.article(shape);
    if !sidebar_first {
        b.sidebar(shape);
    }
    b.footer(shape, site);
    b.html.push_str("</body>\n</html>\n");

    let page = SyntheticPage {
        id: id.to_string(),
        html: b.html,
        clean: b.clean.join("\n"),
        texts: b.texts,
        labels: b.labels,
    };
    let tree = build_cdom(page.html.as_bytes()).expect("generated markup parses");
    let got: Vec<String> = segment(&tree).into_iter().map(|blk| blk.text).collect();
    assert_eq!(got, page.texts, "generated page does not segment as constructed");
    page
}

/// `(split, page)` pairs; page `k` of every split is generated from its own
/// seed so the corpus does not depend on the split sizes.
pub fn generate_corpus(seed: u64, train: usize, validation: usize, test: usize, shape: &PageShape) -> Vec<(Split, SyntheticPage)> {
    let mut out = Vec::with_capacity(train + validation + test);
    for (split, n, tag) in [(Split::Train, train, 1), (Split::Validation, validation, 2), (Split::Test, test, 3)] {
        for k in 0..n {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(&[seed, tag, k as u64]));
            let id = format!("{split}-{k:04}");
            out.push((split, generate_page(&mut rng, &id, shape)));
        }
    }
    out
}

/// Writes `<id>.html`, `<id>.txt`, `<id>.labels` and `manifest.txt`.
pub fn write_corpus(dir: &Path, pages: &[(Split, SyntheticPage)]) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut entries = Vec::with_capacity(pages.len());
    for (split, p) in pages {
        fs::write(dir.join(format!("{}.html", p.id)), &p.html)?;
        fs::write(dir.join(format!("{}.txt", p.id)), &p.clean)?;
        let labels: String = p.labels.iter().map(|l| format!("{l}\n")).collect();
        fs::write(dir.join(format!("{}.labels", p.id)), labels)?;
        entries.push(ManifestEntry {
            split: *split,
            id: p.id.clone(),
        });
    }
    fs::write(dir.join("manifest.txt"), format_manifest(&entries))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pages_segment_as_constructed() {
        let pages = generate_corpus(7, 20, 0, 0, &PageShape::default());
        for (_, p) in &pages {
            assert!(p.labels.contains(&1) && p.labels.contains(&0));
            assert!(p.labels.len() >= 9, "{} has {} blocks", p.id, p.labels.len());
        }
    }

    #[test]
    fn corpus_is_reproducible() {
        let a = generate_corpus(3, 2, 1, 1, &PageShape::default());
        let b = generate_corpus(3, 2, 1, 1, &PageShape::default());
        assert_eq!(a, b);
    }

    #[test]
    fn large_pages_are_large() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p = generate_page(&mut rng, "big", &PageShape::large());
        assert!((165..215).contains(&p.labels.len()), "{}", p.labels.len());
    }
}
