//! Regenerates the fixture model and golden extraction under tests/data.
//!
//! cargo run --release -p declutter-core --example make_golden

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use declutter_core::model::Extraction;
use declutter_core::pipeline::{train, Corpus, Page, TrainConfig};
use declutter_core::synthetic::{generate_corpus, PageShape};

/// One line per block: label, p_content bits in hex, text.
fn block_lines(ex: &Extraction) -> String {
    let mut out = String::new();
    for b in &ex.blocks {
        writeln!(out, "{}\t{:016x}\t{}", b.label, b.p_content.to_bits(), b.text).unwrap();
    }
    out
}

fn main() -> declutter_core::Result<()> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data");
    fs::create_dir_all(&dir)?;
    let generated = generate_corpus(7, 60, 10, 1, &PageShape::default());
    let pages = generated
        .iter()
        .map(|(split, p)| Page::from_html(p.id.clone(), *split, p.html.as_bytes(), p.labels.clone()))
        .collect::<declutter_core::Result<Vec<_>>>()?;
    let cfg = TrainConfig {
        iterations: 300,
        seed: 7,
        ..TrainConfig::default()
    };
    let (model, _) = train(&Corpus::new(pages), &cfg)?;
    model.save(dir.join("fixture.model"))?;

    // a hand-written header in front of a generated page, so the golden
    // input also exercises lenient parsing
    let page = &generated.last().unwrap().1;
    let html = page.html.replacen(
        "<body>",
        "<body><!-- banner --><div class=\"promo\"><p>Sign up today<p>Free trial</div>",
        1,
    );
    fs::write(dir.join("golden.html"), &html)?;
    let ex = model.extract(html.as_bytes(), &model.inference_config())?;
    fs::write(dir.join("golden.blocks"), block_lines(&ex))?;
    let mut text = ex.text();
    text.push('\n');
    fs::write(dir.join("golden.txt"), text)?;
    eprintln!("wrote fixtures to {}", dir.display());
    Ok(())
}
