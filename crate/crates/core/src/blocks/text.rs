//! Text statistics shared by block and context-node features.

use once_cell::sync::Lazy;
use regex::Regex;

use super::layout::{
    FeatureKind, CLIP_AVG_WORD_LEN, CLIP_LOG_CHARS, CLIP_LOG_PUNCT_RATIO, CLIP_LOG_SENTENCE_LEN,
    TEXT_DIM,
};
use super::stopwords::is_stopword;

pub const PUNCTUATION: [char; 6] = [',', '.', '?', ';', ':', '!'];

static EMAIL: Lazy<Regex> =
    Lazy::new(|| Regex::new(r"[A-Za-z0-9._%+\-]+@[A-Za-z0-9\-]+(?:\.[A-Za-z0-9\-]+)*\.[A-Za-z]{2,}").unwrap());
static URL: Lazy<Regex> = Lazy::new(|| Regex::new(r"(?i)(?:\bhttps?://|\bwww\.)[^\s]+").unwrap());

pub fn is_punctuation(c: char) -> bool {
    PUNCTUATION.contains(&c)
}

/// Words are maximal runs of alphanumeric characters.
pub fn words(text: &str) -> impl Iterator<Item = &str> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
}

/// Sentences end at `.`, `!` or `?` followed by whitespace or the end of the
/// text. Only sentences containing at least one word are returned.
pub fn sentences(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut start = 0;
    let mut it = text.char_indices().peekable();
    while let Some((i, c)) = it.next() {
        if matches!(c, '.' | '!' | '?') {
            let boundary = it.peek().is_none_or(|&(_, n)| n.is_whitespace());
            if boundary {
                let end = i + c.len_utf8();
                out.push(&text[start..end]);
                start = end;
            }
        }
    }
    out.push(&text[start..]);
    out.retain(|s| words(s).next().is_some());
    out
}

fn is_year(word: &str) -> bool {
    word.len() == 4
        && word.bytes().all(|b| b.is_ascii_digit())
        && matches!(word.as_bytes()[0], b'1' | b'2')
}

/// Raw counts over one piece of text.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TextStats {
    pub n_words: usize,
    pub n_chars: usize,
    pub word_chars: usize,
    pub n_stopwords: usize,
    pub n_punctuation: usize,
    pub n_numeric: usize,
    pub n_sentences: usize,
    pub n_capitalized: usize,
    pub ends_with_punctuation: bool,
    pub ends_with_question_mark: bool,
    pub has_copyright: bool,
    pub has_email: bool,
    pub has_url: bool,
    pub has_year: bool,
}

impl TextStats {
    pub fn of(text: &str) -> Self {
        let mut s = TextStats::default();
        for w in words(text) {
            s.n_words += 1;
            s.word_chars += w.chars().count();
            if is_stopword(w) {
                s.n_stopwords += 1;
            }
            if w.chars().next().is_some_and(char::is_uppercase) {
                s.n_capitalized += 1;
            }
            s.has_year |= is_year(w);
        }
        for c in text.chars() {
            s.n_chars += 1;
            if is_punctuation(c) {
                s.n_punctuation += 1;
            }
            if c.is_numeric() {
                s.n_numeric += 1;
            }
            s.has_copyright |= c == '©';
        }
        let last = text.trim_end().chars().last();
        s.ends_with_punctuation = last.is_some_and(is_punctuation);
        s.ends_with_question_mark = last == Some('?');
        s.n_sentences = if s.n_words > 0 { sentences(text).len() } else { 0 };
        s.has_email = text.contains('@') && EMAIL.is_match(text);
        s.has_url = URL.is_match(text);
        s
    }

    fn ratio(num: usize, den: usize) -> f64 {
        if den == 0 {
            0.0
        } else {
            num as f64 / den as f64
        }
    }

    pub fn avg_word_length(&self) -> f64 {
        Self::ratio(self.word_chars, self.n_words)
    }

    pub fn stopword_ratio(&self) -> f64 {
        Self::ratio(self.n_stopwords, self.n_words)
    }

    pub fn punctuation_ratio(&self) -> f64 {
        Self::ratio(self.n_punctuation, self.n_chars)
    }

    pub fn numeric_ratio(&self) -> f64 {
        Self::ratio(self.n_numeric, self.n_chars)
    }

    pub fn avg_sentence_length(&self) -> f64 {
        Self::ratio(self.n_words, self.n_sentences)
    }

    pub fn capitalized_ratio(&self) -> f64 {
        Self::ratio(self.n_capitalized, self.n_words)
    }

    /// The shared 17-value text section, already clipped.
    pub fn features(&self) -> [f64; TEXT_DIM] {
        let b = |v: bool| if v { 1.0 } else { 0.0 };
        let cap = self.capitalized_ratio();
        [
            clip(self.avg_word_length(), CLIP_AVG_WORD_LEN),
            b(self.n_stopwords > 0),
            self.stopword_ratio(),
            clipped_log(self.n_chars as f64, CLIP_LOG_CHARS),
            clipped_log(self.punctuation_ratio(), CLIP_LOG_PUNCT_RATIO),
            b(self.n_numeric > 0),
            self.numeric_ratio(),
            clipped_log(self.avg_sentence_length(), CLIP_LOG_SENTENCE_LEN),
            b(self.ends_with_punctuation),
            b(self.ends_with_question_mark),
            b(self.has_copyright),
            b(self.has_email),
            b(self.has_url),
            b(self.has_year),
            cap,
            cap * cap,
            cap * cap * cap,
        ]
    }
}

pub fn clip(x: f64, (lo, hi): (f64, f64)) -> f64 {
    x.clamp(lo, hi)
}

/// Natural log clipped to `bounds`; a zero argument maps to the lower bound.
pub fn clipped_log(x: f64, bounds: (f64, f64)) -> f64 {
    if x <= 0.0 {
        bounds.0
    } else {
        clip(x.ln(), bounds)
    }
}

/// Applies a layout entry's clip bounds, if any.
pub fn clip_kind(x: f64, kind: FeatureKind) -> f64 {
    match kind.clip() {
        Some(b) => clip(x, b),
        None => x,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokenization() {
        let w: Vec<_> = words("Hello, world! It's 2016.").collect();
        assert_eq!(w, vec!["Hello", "world", "It", "s", "2016"]);
        assert_eq!(sentences("One two. Three? Four").len(), 3);
        assert_eq!(sentences("v1.2 is out").len(), 1);
        assert_eq!(sentences("...").len(), 0);
    }

    #[test]
    fn hello_world_stats() {
        let s = TextStats::of("Hello world.");
        assert_eq!(s.n_words, 2);
        assert_eq!(s.n_chars, 12);
        assert_eq!(s.n_punctuation, 1);
        assert_eq!(s.n_sentences, 1);
        assert!(s.ends_with_punctuation);
        assert!(!s.ends_with_question_mark);
        assert_eq!(s.avg_word_length(), 5.0);
        assert_eq!(s.n_capitalized, 1);
    }

    #[test]
    fn detectors_on_footer_line() {
        let s = TextStats::of("Copyright © 2016 example@mail.com http://x.io");
        assert!(s.has_copyright);
        assert!(s.has_email);
        assert!(s.has_url);
        assert!(s.has_year);
    }

    #[test]
    fn detector_negatives() {
        let s = TextStats::of("Call 12345 or 0999 at example dot com");
        assert!(!s.has_year);
        assert!(!s.has_email);
        assert!(!s.has_url);
        assert!(!s.has_copyright);
        assert!(TextStats::of("see www.example.org").has_url);
        assert!(TextStats::of("in 1999 we").has_year);
        assert!(!TextStats::of("in 3999 we").has_year);
    }

    #[test]
    fn log_of_zero_hits_lower_bound() {
        assert_eq!(clipped_log(0.0, CLIP_LOG_PUNCT_RATIO), -4.0);
        assert_eq!(clipped_log(1.0, CLIP_LOG_PUNCT_RATIO), -2.5);
        assert_eq!(clipped_log(2.0, (0.0, 3.5)), 2f64.ln());
    }

    #[test]
    fn clipped_sections_stay_in_bounds() {
        for text in ["", "a", "x".repeat(5000).as_str(), "!!!!", "Hello world. Bye."] {
            let f = TextStats::of(text).features();
            assert!((3.0..=15.0).contains(&f[0]));
            assert!((2.5..=5.5).contains(&f[3]));
            assert!((-4.0..=-2.5).contains(&f[4]));
            assert!((2.0..=5.0).contains(&f[7]));
        }
    }
}
