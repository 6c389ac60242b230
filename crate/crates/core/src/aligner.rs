//! Recovers per-block gold labels from a page and its manually cleaned text.
//!
//! Both texts are stripped of whitespace. Ten-character windows of the clean
//! text that occur exactly once in the current page segment and once in the
//! current clean segment become anchors; anchors are extended as far as the
//! texts agree and split both texts into smaller segment pairs, which are
//! processed the same way. Whatever is left is aligned character by character
//! with an edit-distance dynamic program. A block is content iff at least two
//! thirds of its characters end up matched.

use std::collections::HashMap;

use crate::blocks::TextBlock;

pub const WINDOW: usize = 10;
/// Segment pairs longer than this use a banded alignment.
pub const FULL_DP_MAX_LEN: usize = 20_000;
pub const BAND: usize = 2_000;
const FULL_DP_MAX_CELLS: usize = 25_000_000;
const BANDED_MAX_CELLS: usize = 200_000_000;

pub fn normalize_for_matching(text: &str) -> String {
    text.chars().filter(|c| !c.is_whitespace()).collect()
}

/// An exact match between the clean text and the page, both in normalized
/// character coordinates. `window_*` locate the unique window that seeded
/// it; the window is unique within `page_segment` and `clean_segment`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Anchor {
    pub page_segment: (usize, usize),
    pub clean_segment: (usize, usize),
    pub window_clean: usize,
    pub window_page: usize,
    pub clean_start: usize,
    pub page_start: usize,
    pub len: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AlignmentDiagnostics {
    pub anchors: Vec<Anchor>,
    pub dp_segments: usize,
    pub banded_segments: usize,
    pub dp_cells: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentResult {
    pub labels: Vec<u8>,
    pub ratios: Vec<f64>,
    /// `(clean index, page index)` of every matched character, increasing in
    /// both coordinates.
    pub mapping: Vec<(usize, usize)>,
    pub diagnostics: AlignmentDiagnostics,
}

/// True iff `matched` out of `len` characters reaches the two-thirds bar.
pub fn is_content(matched: usize, len: usize) -> bool {
    len > 0 && 3 * matched >= 2 * len
}

pub fn align_blocks(blocks: &[TextBlock], clean: &str) -> AlignmentResult {
    let texts: Vec<&str> = blocks.iter().map(|b| b.text.as_str()).collect();
    align(&texts, clean)
}

pub fn align<S: AsRef<str>>(block_texts: &[S], clean: &str) -> AlignmentResult {
    let mut page = Vec::new();
    let mut owner = Vec::new();
    let mut lengths = Vec::with_capacity(block_texts.len());
    for (i, t) in block_texts.iter().enumerate() {
        let before = page.len();
        page.extend(t.as_ref().chars().filter(|c| !c.is_whitespace()));
        owner.resize(page.len(), i);
        lengths.push(page.len() - before);
    }
    let clean: Vec<char> = clean.chars().filter(|c| !c.is_whitespace()).collect();

    let mut aligner = Aligner {
        page: &page,
        clean: &clean,
        matched: Vec::new(),
        diagnostics: AlignmentDiagnostics::default(),
    };
    aligner.run();
    let Aligner {
        mut matched,
        diagnostics,
        ..
    } = aligner;
    matched.sort_unstable();

    let mut counts = vec![0usize; block_texts.len()];
    for &(_, p) in &matched {
        counts[owner[p]] += 1;
    }
    let ratios: Vec<f64> = counts
        .iter()
        .zip(&lengths)
        .map(|(&c, &n)| if n == 0 { 0.0 } else { c as f64 / n as f64 })
        .collect();
    let labels = counts
        .iter()
        .zip(&lengths)
        .map(|(&c, &n)| is_content(c, n) as u8)
        .collect();
    AlignmentResult {
        labels,
        ratios,
        mapping: matched,
        diagnostics,
    }
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    page: (usize, usize),
    clean: (usize, usize),
}

struct Aligner<'a> {
    page: &'a [char],
    clean: &'a [char],
    matched: Vec<(usize, usize)>,
    diagnostics: AlignmentDiagnostics,
}

impl Aligner<'_> {
    fn run(&mut self) {
        let mut stack = vec![Segment {
            page: (0, self.page.len()),
            clean: (0, self.clean.len()),
        }];
        while let Some(seg) = stack.pop() {
            let (ps, pe) = seg.page;
            let (cs, ce) = seg.clean;
            if ps == pe || cs == ce {
                continue;
            }
            let anchors = if pe - ps >= WINDOW && ce - cs >= WINDOW {
                self.find_anchors(seg)
            } else {
                Vec::new()
            };
            if anchors.is_empty() {
                self.dp(seg);
                continue;
            }
            let (mut p, mut c) = (ps, cs);
            let mut gaps = Vec::with_capacity(anchors.len() + 1);
            for a in &anchors {
                gaps.push(Segment {
                    page: (p, a.page_start),
                    clean: (c, a.clean_start),
                });
                for k in 0..a.len {
                    self.matched.push((a.clean_start + k, a.page_start + k));
                }
                p = a.page_start + a.len;
                c = a.clean_start + a.len;
            }
            gaps.push(Segment {
                page: (p, pe),
                clean: (c, ce),
            });
            self.diagnostics.anchors.extend(anchors);
            // pushed in reverse so segments are processed left to right
            stack.extend(gaps.into_iter().rev());
        }
    }

    /// Left-to-right scan over clean windows unique in both segments; each
    /// accepted window is extended to a maximal exact match that does not
    /// cross the previous anchor.
    fn find_anchors(&self, seg: Segment) -> Vec<Anchor> {
        let (ps, pe) = seg.page;
        let (cs, ce) = seg.clean;
        let page_counts = window_counts(&self.page[ps..pe], ps);
        let clean_counts = window_counts(&self.clean[cs..ce], cs);
        let mut anchors: Vec<Anchor> = Vec::new();
        let (mut min_p, mut min_c) = (ps, cs);
        let mut j = cs;
        while j + WINDOW <= ce {
            let w = &self.clean[j..j + WINDOW];
            let unique = clean_counts.get(w).is_some_and(|&(n, _)| n == 1);
            let hit = page_counts.get(w).filter(|&&(n, pos)| n == 1 && pos >= min_p);
            let (true, Some(&(_, pos))) = (unique, hit) else {
                j += 1;
                continue;
            };
            let (mut p0, mut c0) = (pos, j);
            while p0 > min_p && c0 > min_c && self.page[p0 - 1] == self.clean[c0 - 1] {
                p0 -= 1;
                c0 -= 1;
            }
            let (mut p1, mut c1) = (pos + WINDOW, j + WINDOW);
            while p1 < pe && c1 < ce && self.page[p1] == self.clean[c1] {
                p1 += 1;
                c1 += 1;
            }
            anchors.push(Anchor {
                page_segment: seg.page,
                clean_segment: seg.clean,
                window_clean: j,
                window_page: pos,
                clean_start: c0,
                page_start: p0,
                len: c1 - c0,
            });
            min_p = p1;
            min_c = c1;
            j = c1;
        }
        anchors
    }

    fn dp(&mut self, seg: Segment) {
        let (ps, pe) = seg.page;
        let (cs, ce) = seg.clean;
        let (n, m) = (ce - cs, pe - ps);
        self.diagnostics.dp_segments += 1;
        let clean = &self.clean[cs..ce];
        let page = &self.page[ps..pe];
        let pairs = if n.max(m) <= FULL_DP_MAX_LEN && n * m <= FULL_DP_MAX_CELLS {
            self.diagnostics.dp_cells += (n * m) as u64;
            levenshtein_matches(clean, page, None)
        } else if n * (2 * BAND + 1) <= BANDED_MAX_CELLS {
            self.diagnostics.banded_segments += 1;
            self.diagnostics.dp_cells += (n * (2 * BAND + 1)) as u64;
            levenshtein_matches(clean, page, Some(BAND))
        } else {
            // split both sides proportionally into pieces the band can handle
            self.diagnostics.banded_segments += 1;
            let pieces = (n * (2 * BAND + 1)).div_ceil(BANDED_MAX_CELLS).max(2);
            let mut out = Vec::new();
            for k in 0..pieces {
                let (c0, c1) = (n * k / pieces, n * (k + 1) / pieces);
                let (p0, p1) = (m * k / pieces, m * (k + 1) / pieces);
                self.diagnostics.dp_cells += ((c1 - c0) * (2 * BAND + 1)) as u64;
                out.extend(
                    levenshtein_matches(&clean[c0..c1], &page[p0..p1], Some(BAND))
                        .into_iter()
                        .map(|(c, p)| (c + c0, p + p0)),
                );
            }
            out
        };
        self.matched
            .extend(pairs.into_iter().map(|(c, p)| (c + cs, p + ps)));
    }
}

fn window_counts(text: &[char], offset: usize) -> HashMap<&[char], (u32, usize)> {
    let mut counts: HashMap<&[char], (u32, usize)> = HashMap::new();
    for (i, w) in text.windows(WINDOW).enumerate() {
        counts.entry(w).or_insert((0, offset + i)).0 += 1;
    }
    counts
}

const DIAG: u8 = 0;
const UP: u8 = 1;
const LEFT: u8 = 2;

/// Unit-cost edit-distance alignment of `a` (clean) against `b` (page);
/// returns index pairs of equal characters aligned to each other. With a
/// band, only cells within `band` columns of the stretched diagonal are
/// considered.
pub fn levenshtein_matches(a: &[char], b: &[char], band: Option<usize>) -> Vec<(usize, usize)> {
    let (n, m) = (a.len(), b.len());
    if n == 0 || m == 0 {
        return Vec::new();
    }
    // column range [lo, hi] per row (row 0 included)
    let range = |i: usize| -> (usize, usize) {
        match band {
            None => (0, m),
            Some(w) => {
                let w = w.max(m.div_ceil(n) + 1);
                let centre = (i as u128 * m as u128 / n as u128) as usize;
                (centre.saturating_sub(w), (centre + w).min(m))
            }
        }
    };
    const INF: u32 = u32::MAX / 2;
    let mut dirs: Vec<Vec<u8>> = Vec::with_capacity(n + 1);
    let mut offsets = Vec::with_capacity(n + 1);
    let (lo0, hi0) = range(0);
    let mut prev: Vec<u32> = (lo0..=hi0).map(|j| j as u32).collect();
    dirs.push(vec![LEFT; hi0 - lo0 + 1]);
    offsets.push(lo0);
    let mut prev_lo = lo0;
    for i in 1..=n {
        let (lo, hi) = range(i);
        let mut cur = vec![INF; hi - lo + 1];
        let mut dir = vec![UP; hi - lo + 1];
        let get_prev = |j: usize, prev: &[u32]| -> u32 {
            if j >= prev_lo && j - prev_lo < prev.len() {
                prev[j - prev_lo]
            } else {
                INF
            }
        };
        for j in lo..=hi {
            let up = get_prev(j, &prev).saturating_add(1);
            let (mut best, mut d) = (up, UP);
            if j > 0 {
                let sub = (a[i - 1] != b[j - 1]) as u32;
                let diag = get_prev(j - 1, &prev).saturating_add(sub);
                if diag <= best {
                    best = diag;
                    d = DIAG;
                }
                if j > lo {
                    let left = cur[j - 1 - lo].saturating_add(1);
                    if left < best {
                        best = left;
                        d = LEFT;
                    }
                }
            }
            cur[j - lo] = best;
            dir[j - lo] = d;
        }
        dirs.push(dir);
        offsets.push(lo);
        prev = cur;
        prev_lo = lo;
    }

    let mut out = Vec::new();
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        let d = if i == 0 {
            LEFT
        } else {
            let lo = offsets[i];
            if j < lo || j - lo >= dirs[i].len() {
                // outside the band; walk back towards it
                if j < lo { UP } else { LEFT }
            } else {
                dirs[i][j - lo]
            }
        };
        match d {
            DIAG => {
                if a[i - 1] == b[j - 1] {
                    out.push((i - 1, j - 1));
                }
                i -= 1;
                j -= 1;
            }
            UP => i -= 1,
            _ => j -= 1,
        }
    }
    out.reverse();
    out
}
