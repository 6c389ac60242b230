use std::fs::{self, File};
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde_json::json;

use declutter_core::blocks::layout::describe;
use declutter_core::inference::InferenceConfig;
use declutter_core::model::{Extraction, Model};
use declutter_core::pipeline::files::{format_labels, label_corpus, label_page, load_corpus, load_manifest};
use declutter_core::pipeline::{evaluate, train_with_progress, Split, TrainConfig};
use declutter_core::synthetic::{generate_corpus, write_corpus, PageShape};

#[derive(Parser)]
#[command(name = "declutter", version, about = "Boilerplate removal for web pages")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the main content of HTML pages.
    Extract(ExtractArgs),
    /// Label the blocks of a page by aligning it with its cleaned text.
    Label(LabelArgs),
    /// Write `<id>.labels` for every page of a corpus directory.
    LabelCorpus(CorpusArgs),
    /// Train a model on a labeled corpus.
    Train(TrainArgs),
    /// Block-level accuracy, precision, recall and F1 on one split.
    Eval(EvalArgs),
    /// Print the feature layout.
    Layout,
    /// Write a synthetic labeled corpus.
    Synth(SynthArgs),
}

#[derive(Args)]
struct ModelArg {
    /// Model file.
    #[arg(long, env = "DECLUTTER_MODEL")]
    model: Option<PathBuf>,
}

#[derive(Args)]
struct ExtractArgs {
    #[command(flatten)]
    model: ModelArg,
    /// HTML files; standard input when absent or `-`.
    files: Vec<PathBuf>,
    /// Weight of the pairwise potentials (defaults to the model's value).
    #[arg(long)]
    lambda: Option<f64>,
    /// Emit per-block records as JSON.
    #[arg(long)]
    json: bool,
    /// Worker threads for multiple files.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Directory for per-file outputs; required with more than one file.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct LabelArgs {
    #[arg(long)]
    html: PathBuf,
    #[arg(long)]
    clean: PathBuf,
    /// Output file (standard output by default).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CorpusArgs {
    /// Corpus directory.
    #[arg(long)]
    corpus: PathBuf,
    /// Manifest of `<split> <id>` lines (default: `<corpus>/manifest.txt`).
    #[arg(long)]
    manifest: Option<PathBuf>,
}

impl CorpusArgs {
    fn manifest_path(&self) -> PathBuf {
        self.manifest
            .clone()
            .unwrap_or_else(|| self.corpus.join("manifest.txt"))
    }
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    /// Where to write the model.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 5000)]
    iterations: usize,
    #[arg(long, default_value_t = 1e-3)]
    learning_rate: f64,
    #[arg(long, default_value_t = 0.1)]
    lambda: f64,
    /// Training log (standard error by default).
    #[arg(long)]
    log: Option<PathBuf>,
    /// Continue from an existing model (not supported).
    #[arg(long)]
    resume: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    model: ModelArg,
    #[command(flatten)]
    corpus: CorpusArgs,
    #[arg(long, default_value = "test")]
    split: String,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 200)]
    train: usize,
    #[arg(long, default_value_t = 30)]
    validation: usize,
    #[arg(long, default_value_t = 30)]
    test: usize,
    /// Generate pages of roughly 190 blocks.
    #[arg(long)]
    large: bool,
}

/// An error with the exit code it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        Failure { code: 1, error }
    }
}

fn model_failure(error: anyhow::Error) -> Failure {
    Failure { code: 2, error }
}

type CliResult<T = ()> = Result<T, Failure>;

fn main() -> ExitCode {
    // clap exits with 2 on usage errors, which is reserved for model problems
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("declutter: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Extract(a) => extract(a),
        Command::Label(a) => label(a),
        Command::LabelCorpus(a) => {
            let entries = load_manifest(&a.manifest_path()).map_err(anyhow::Error::from)?;
            let n = label_corpus(&a.corpus, &entries).map_err(anyhow::Error::from)?;
            eprintln!("labeled {n} pages");
            Ok(())
        }
        Command::Train(a) => train(a),
        Command::Eval(a) => eval(a),
        Command::Layout => {
            print!("{}", describe());
            Ok(())
        }
        Command::Synth(a) => {
            let shape = if a.large { PageShape::large() } else { PageShape::default() };
            let pages = generate_corpus(a.seed, a.train, a.validation, a.test, &shape);
            write_corpus(&a.out, &pages).with_context(|| format!("writing {}", a.out.display()))?;
            eprintln!("wrote {} pages to {}", pages.len(), a.out.display());
            Ok(())
        }
    }
}

fn load_model(arg: &ModelArg) -> CliResult<Model> {
    let path = arg
        .model
        .as_ref()
        .ok_or_else(|| model_failure(anyhow!("no model given (use --model or DECLUTTER_MODEL)")))?;
    Model::load(path)
        .with_context(|| format!("cannot load model {}", path.display()))
        .map_err(model_failure)
}

fn inference_config(model: &Model, lambda: Option<f64>) -> CliResult<InferenceConfig> {
    Ok(InferenceConfig::new(lambda.unwrap_or(model.lambda)).map_err(anyhow::Error::from)?)
}

fn render(ex: &Extraction, as_json: bool) -> String {
    if !as_json {
        let mut text = ex.text();
        if !text.is_empty() {
            text.push('\n');
        }
        return text;
    }
    let blocks: Vec<_> = ex
        .blocks
        .iter()
        .map(|b| {
            json!({
                "index": b.index,
                "text": b.text,
                "label": b.label,
                "p_content": b.p_content,
                "source_offset": b.source_offset,
                "source_length": b.source_length,
            })
        })
        .collect();
    let mut s = serde_json::to_string_pretty(&json!({ "blocks": blocks })).expect("json value");
    s.push('\n');
    s
}

fn read_input(path: &Path) -> anyhow::Result<Vec<u8>> {
    if path == Path::new("-") {
        let mut buf = Vec::new();
        io::stdin().read_to_end(&mut buf).context("reading standard input")?;
        Ok(buf)
    } else {
        fs::read(path).with_context(|| format!("cannot read {}", path.display()))
    }
}

fn extract(a: ExtractArgs) -> CliResult {
    let model = load_model(&a.model)?;
    let cfg = inference_config(&model, a.lambda)?;
    let files = if a.files.is_empty() {
        vec![PathBuf::from("-")]
    } else {
        a.files.clone()
    };
    let run_one = |path: &Path| -> anyhow::Result<String> {
        let markup = read_input(path)?;
        let ex = model
            .extract(&markup, &cfg)
            .with_context(|| format!("cannot process {}", path.display()))?;
        Ok(render(&ex, a.json))
    };

    let Some(out_dir) = &a.out_dir else {
        if files.len() > 1 {
            return Err(anyhow!("several input files need --out-dir").into());
        }
        let out = run_one(&files[0])?;
        io::stdout().write_all(out.as_bytes()).context("writing output")?;
        return Ok(());
    };

    fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let ext = if a.json { "json" } else { "txt" };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(a.jobs.max(1))
        .build()
        .context("starting worker threads")?;
    let results: Vec<anyhow::Result<()>> = pool.install(|| {
        files
            .par_iter()
            .map(|path| {
                let out = run_one(path)?;
                let stem = path.file_stem().map_or_else(|| "stdin".into(), |s| s.to_string_lossy().into_owned());
                let target = out_dir.join(format!("{stem}.{ext}"));
                fs::write(&target, out).with_context(|| format!("writing {}", target.display()))
            })
            .collect()
    });
    let mut failed = 0;
    for r in results {
        if let Err(e) = r {
            eprintln!("declutter: {e:#}");
            failed += 1;
        }
    }
    if failed > 0 {
        return Err(anyhow!("{failed} of {} files failed", files.len()).into());
    }
    Ok(())
}

fn label(a: LabelArgs) -> CliResult {
    let markup = fs::read(&a.html).with_context(|| format!("cannot read {}", a.html.display()))?;
    let clean = fs::read(&a.clean).with_context(|| format!("cannot read {}", a.clean.display()))?;
    let result = label_page(&markup, &String::from_utf8_lossy(&clean)).map_err(anyhow::Error::from)?;
    let text = format_labels(&result);
    match &a.out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        None => io::stdout().write_all(text.as_bytes()).context("writing output")?,
    }
    Ok(())
}

fn train(a: TrainArgs) -> CliResult {
    if a.resume.is_some() {
        return Err(anyhow!("resuming training from a model is not supported; train from scratch").into());
    }
    let entries = load_manifest(&a.corpus.manifest_path()).map_err(anyhow::Error::from)?;
    let corpus = load_corpus(&a.corpus.corpus, &entries).map_err(anyhow::Error::from)?;
    let mut cfg = TrainConfig {
        iterations: a.iterations,
        seed: a.seed,
        lambda: a.lambda,
        ..TrainConfig::default()
    };
    cfg.adam.learning_rate = a.learning_rate;

    let log: Box<dyn Write + Send> = match &a.log {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).with_context(|| format!("creating {}", path.display()))?,
        )),
        None => Box::new(io::stderr()),
    };
    let log = std::sync::Mutex::new(log);
    writeln!(log.lock().unwrap(), "# network\tstep\ttrain_loss\tvalidation_loss").context("writing log")?;
    let (model, report) = train_with_progress(&corpus, &cfg, &|arch, cp| {
        let val = cp
            .validation_loss
            .map_or_else(|| "-".to_string(), |v| format!("{v:.6}"));
        let _ = writeln!(
            log.lock().unwrap(),
            "{}\t{}\t{:.6}\t{}",
            arch.name(),
            cp.step,
            cp.train_loss,
            val
        );
    })
    .map_err(anyhow::Error::from)?;
    {
        let mut log = log.lock().unwrap();
        writeln!(
            log,
            "# best\tunary {}\tpairwise {}",
            report.unary.best_step, report.pairwise.best_step
        )
        .and_then(|_| log.flush())
        .context("writing log")?;
    }
    model
        .save(&a.out)
        .with_context(|| format!("writing {}", a.out.display()))?;
    Ok(())
}

fn eval(a: EvalArgs) -> CliResult {
    let model = load_model(&a.model)?;
    let cfg = inference_config(&model, a.lambda)?;
    let split: Split = a.split.parse().map_err(anyhow::Error::from)?;
    let entries = load_manifest(&a.corpus.manifest_path()).map_err(anyhow::Error::from)?;
    let entries: Vec<_> = entries.into_iter().filter(|e| e.split == split).collect();
    if entries.is_empty() {
        return Err(anyhow!("split `{split}` has no pages").into());
    }
    let corpus = load_corpus(&a.corpus.corpus, &entries).map_err(anyhow::Error::from)?;
    let (m, c) = evaluate(&model, corpus.split(split), &cfg).map_err(anyhow::Error::from)?;
    if a.json {
        let v = json!({
            "split": split.to_string(),
            "pages": corpus.pages.len(),
            "blocks": m.blocks,
            "accuracy": m.accuracy,
            "precision": m.precision,
            "recall": m.recall,
            "f1": m.f1,
            "tp": c.tp, "fp": c.fp, "tn": c.tn, "fn": c.fn_,
        });
        println!("{}", serde_json::to_string_pretty(&v).expect("json value"));
    } else {
        println!("split\tpages\tblocks\taccuracy\tprecision\trecall\tf1");
        println!(
            "{split}\t{}\t{}\t{:.4}\t{:.4}\t{:.4}\t{:.4}",
            corpus.pages.len(),
            m.blocks,
            m.accuracy,
            m.precision,
            m.recall,
            m.f1
        );
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }
}
