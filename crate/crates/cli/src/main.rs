use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};

mod commands;
mod config;
mod records;

use config::PipelineConfig;

/// Bad input or configuration; exits with status 2.
#[derive(Debug)]
pub struct InputError(pub String);

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

#[derive(Parser, Debug)]
#[command(name = "defgraph", version, about = "Definition graphs and explainable entailment")]
struct Cli {
    /// INI configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Remove parenthesized asides and example sentences from glosses.
    #[arg(long, global = true)]
    strip_gloss: bool,
    /// Let navigation follow graph edges backwards.
    #[arg(long, global = true)]
    bidirectional: bool,
    #[arg(long, global = true, value_name = "N")]
    max_depth: Option<usize>,
    #[arg(long, global = true, value_name = "N")]
    beam: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Label definitions from their parses and write Brat files.
    Preannotate {
        /// Definitions JSONL (id, pos, lemmas, gloss, tree).
        #[arg(long)]
        input: Option<PathBuf>,
        /// Trees JSONL (id, tree) for records without a `tree` field.
        #[arg(long)]
        trees: Option<PathBuf>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Also write the annotated records as JSONL.
        #[arg(long)]
        jsonl: Option<PathBuf>,
    },
    /// Restore missing supertypes and flag records that still fail validation.
    Postprocess {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        trees: Option<PathBuf>,
        #[arg(long)]
        output: PathBuf,
    },
    /// Write one .txt/.ann pair per annotated record.
    ExportBrat {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Read curated Brat files back into annotated JSONL.
    ImportBrat {
        #[arg(long)]
        dir: PathBuf,
        /// Definitions JSONL supplying id, pos and lemmas.
        #[arg(long)]
        defs: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Build the definition graph and write it as N-Triples.
    Build {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Decide entailment for T/H pairs and print one verdict per line.
    Entail {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        embeddings: Option<PathBuf>,
        /// Pairs JSONL (t, h, optional id and POS tags).
        #[arg(long)]
        pairs: PathBuf,
        #[arg(long)]
        stopwords: Option<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Check annotated records and report violations.
    Validate {
        #[arg(long)]
        input: PathBuf,
    },
}

fn load_config(cli: &Cli) -> Result<PipelineConfig> {
    let mut cfg = match &cli.config {
        Some(p) => PipelineConfig::load(p).map_err(|e| InputError(format!("{e:#}")))?,
        None => PipelineConfig::default(),
    };
    if cli.bidirectional {
        cfg.graph.bidirectional = true;
    }
    if let Some(d) = cli.max_depth {
        cfg.entail.max_depth = d;
    }
    if let Some(b) = cli.beam {
        cfg.entail.beam = b;
    }
    cfg.entail.validate().map_err(|e| InputError(e.to_string()))?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<()> {
    let cfg = load_config(&cli)?;
    let ctx = commands::Context {
        cfg,
        strip_gloss: cli.strip_gloss,
    };
    match cli.command {
        Command::Preannotate { input, trees, out_dir, jsonl } => commands::preannotate(&ctx, input, trees, out_dir, jsonl),
        Command::Postprocess { input, trees, output } => commands::postprocess(&ctx, &input, trees, &output),
        Command::ExportBrat { input, out_dir } => commands::export_brat(&ctx, &input, out_dir),
        Command::ImportBrat { dir, defs, output } => commands::import_brat(&dir, &defs, &output),
        Command::Build { input, output } => commands::build(&ctx, &input, &output),
        Command::Entail {
            graph,
            embeddings,
            pairs,
            stopwords,
            output,
        } => commands::entail(&ctx, &graph, embeddings, &pairs, stopwords, output),
        Command::Validate { input } => commands::validate(&input),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.downcast_ref::<InputError>().is_some() => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("internal error: {e:#}");
            ExitCode::from(1)
        }
    }
}
