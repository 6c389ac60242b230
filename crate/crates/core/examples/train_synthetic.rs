//! Trains on a generated corpus and reports test metrics.
//!
//! cargo run --release -p declutter-core --example train_synthetic -- [iterations] [seed]

use std::time::Instant;

use declutter_core::pipeline::{evaluate, train_with_progress, Corpus, Page, Split, TrainConfig};
use declutter_core::synthetic::{generate_corpus, PageShape};

fn main() -> declutter_core::Result<()> {
    let mut args = std::env::args().skip(1);
    let iterations = args.next().map_or(5000, |a| a.parse().expect("iterations"));
    let seed = args.next().map_or(0, |a| a.parse().expect("seed"));

    let start = Instant::now();
    let pages = generate_corpus(seed, 200, 30, 30, &PageShape::default())
        .into_iter()
        .map(|(split, p)| Page::from_html(p.id, split, p.html.as_bytes(), p.labels))
        .collect::<declutter_core::Result<Vec<_>>>()?;
    let corpus = Corpus::new(pages);
    eprintln!("corpus ready in {:.1?}", start.elapsed());

    let cfg = TrainConfig {
        iterations,
        seed,
        ..TrainConfig::default()
    };
    let (model, report) = train_with_progress(&corpus, &cfg, &|arch, cp| {
        eprintln!(
            "{}\t{}\t{:.5}\t{:.5}",
            arch.name(),
            cp.step,
            cp.train_loss,
            cp.validation_loss.unwrap_or(f64::NAN)
        );
    })?;
    eprintln!(
        "trained in {:.1?} (best steps {} / {})",
        start.elapsed(),
        report.unary.best_step,
        report.pairwise.best_step
    );
    let (m, _) = evaluate(&model, corpus.split(Split::Test), &model.inference_config())?;
    println!(
        "accuracy {:.4} precision {:.4} recall {:.4} f1 {:.4}",
        m.accuracy, m.precision, m.recall, m.f1
    );
    Ok(())
}
