//! Pipeline driver: harvest, train, classify, extract, emit, profile,
//! embed, and query, with a run manifest in every output directory.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error.

mod commands;
mod config;
mod manifest;

use std::path::PathBuf;

use anyhow::Result;
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use commands::{analysis, graph, pipeline, query, vectors};
use config::Settings;
use manifest::ManifestBuilder;

#[derive(Parser)]
#[command(name = "argot", version, about = "Glossary mining and concept graph pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonOpts {
    /// Output directory for this stage.
    #[arg(long)]
    out: PathBuf,
    /// Flat key-value configuration file; flags win over file values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Seed for every random choice in the stage.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a corpus tree and harvest labeled paragraphs.
    Harvest {
        #[command(flatten)]
        common: CommonOpts,
        /// Corpus root laid out as <archive>/<article>/<article>.{tex,xml}.
        #[arg(long)]
        input: PathBuf,
        /// Negatives sampled per positive.
        #[arg(long)]
        ratio: Option<f64>,
        /// Worker threads for per-article stages.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Train the SGD-SVM definition classifier on harvested records.
    TrainClassifier {
        #[command(flatten)]
        common: CommonOpts,
        /// Records file produced by harvest.
        #[arg(long)]
        records: PathBuf,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        learning_rate: Option<f64>,
        #[arg(long)]
        l2: Option<f64>,
        /// Feature hashing bits (10..=24).
        #[arg(long)]
        bits: Option<u32>,
    },
    /// Label every corpus paragraph with a trained model.
    Classify {
        #[command(flatten)]
        common: CommonOpts,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Extract definienda from definition-labeled records.
    ExtractTerms {
        #[command(flatten)]
        common: CommonOpts,
        #[arg(long)]
        records: PathBuf,
        /// Gold IOB2 annotations to score the chunker against.
        #[arg(long)]
        gold: Option<PathBuf>,
    },
    /// Write per-tranche glossary XML files plus term statistics.
    EmitGlossary {
        #[command(flatten)]
        common: CommonOpts,
        #[arg(long)]
        records: PathBuf,
        #[arg(long)]
        terms: PathBuf,
        #[arg(long)]
        input: PathBuf,
    },
    /// Compare two glossaries and, optionally, their paragraph labelings.
    CompareGlossaries {
        #[command(flatten)]
        common: CommonOpts,
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long)]
        a_predictions: Option<PathBuf>,
        #[arg(long)]
        b_predictions: Option<PathBuf>,
    },
    /// Build per-term category profiles scored against the baseline.
    ProfileCategories {
        #[command(flatten)]
        common: CommonOpts,
        #[arg(long)]
        glossary: PathBuf,
        /// Tab-separated article_id<TAB>categories metadata.
        #[arg(long)]
        metadata: PathBuf,
        /// Also rank all terms for this category code.
        #[arg(long)]
        rank_category: Option<String>,
    },
    /// Train Euclidean GloVe vectors over phrase-joined text.
    TrainEmbedding {
        #[command(flatten)]
        common: CommonOpts,
        #[arg(long)]
        glossary: PathBuf,
        /// Corpus root, required with --scope full.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Train on definition statements or full articles.
        #[arg(long)]
        scope: Option<String>,
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long)]
        window: Option<usize>,
        #[arg(long)]
        min_count: Option<u64>,
        #[arg(long)]
        x_max: Option<f64>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        eta: Option<f64>,
        #[arg(long)]
        epochs: Option<usize>,
        /// Profiles file; when given, a category-labeled projection
        /// export is written next to the vectors.
        #[arg(long)]
        profiles: Option<PathBuf>,
    },
    /// Train hyperbolic embeddings in a product of half-planes.
    TrainHyperbolic {
        #[command(flatten)]
        common: CommonOpts,
        #[arg(long)]
        glossary: PathBuf,
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        scope: Option<String>,
        /// Number of half-planes (total dimension is twice this).
        #[arg(long)]
        planes: Option<usize>,
        #[arg(long)]
        window: Option<usize>,
        #[arg(long)]
        min_count: Option<u64>,
        #[arg(long)]
        x_max: Option<f64>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        eta: Option<f64>,
        #[arg(long)]
        epochs: Option<usize>,
    },
    /// Build the term dependency graph and assign levels.
    BuildGraph {
        #[command(flatten)]
        common: CommonOpts,
        #[arg(long)]
        glossary: PathBuf,
    },
    /// Query trained artifacts.
    Query {
        #[command(subcommand)]
        what: QueryCommand,
    },
}

#[derive(Subcommand)]
enum QueryCommand {
    /// Nearest neighbors by cosine similarity.
    Neighbors {
        token: String,
        #[arg(long)]
        vectors: PathBuf,
        #[arg(short, default_value_t = 10)]
        k: usize,
    },
    /// IS-A rating of a term relative to a query term.
    Isa {
        term: String,
        query: String,
        #[arg(long)]
        model: PathBuf,
    },
    /// Neighbors of a query sorted ascending by IS-A rating.
    Hypernyms {
        query: String,
        #[arg(long)]
        model: PathBuf,
        /// Euclidean vectors for cosine neighbors; omitted means
        /// hyperbolic-only mode.
        #[arg(long)]
        vectors: Option<PathBuf>,
        #[arg(short, default_value_t = 5)]
        k: usize,
    },
    /// Level and component of a term in a built graph.
    Levels {
        term: String,
        #[arg(long)]
        graph: PathBuf,
    },
    /// Category profile line for a term.
    Profile {
        term: String,
        #[arg(long)]
        profiles: PathBuf,
    },
}

fn default_jobs() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Harvest {
            common,
            input,
            ratio,
            jobs,
        } => {
            let settings = Settings::load(common.config.as_deref())?;
            let seed = settings.resolve("seed", common.seed, 0)?;
            let ratio = settings.resolve("ratio", ratio, 1.0)?;
            let jobs = settings.resolve("jobs", jobs, default_jobs())?;
            let snapshot = settings.snapshot(&[
                ("seed", seed.to_string()),
                ("ratio", ratio.to_string()),
                ("jobs", jobs.to_string()),
            ]);
            let mut manifest = ManifestBuilder::new("harvest", seed, snapshot);
            pipeline::harvest(
                pipeline::HarvestArgs {
                    input: &input,
                    out: &common.out,
                    ratio,
                    seed,
                    jobs,
                },
                &mut manifest,
            )?;
            manifest.write(&common.out)
        }
        Command::TrainClassifier {
            common,
            records,
            epochs,
            learning_rate,
            l2,
            bits,
        } => {
            let settings = Settings::load(common.config.as_deref())?;
            let seed = settings.resolve("seed", common.seed, 0)?;
            let hyper = argot::classifier::Hyper {
                epochs: settings.resolve("epochs", epochs, 12)?,
                learning_rate: settings.resolve("learning_rate", learning_rate, 0.5)?,
                l2: settings.resolve("l2", l2, 1e-4)?,
                bits: settings.resolve("bits", bits, 18)?,
                seed,
            };
            let snapshot = settings.snapshot(&[
                ("seed", seed.to_string()),
                ("epochs", hyper.epochs.to_string()),
                ("learning_rate", hyper.learning_rate.to_string()),
                ("l2", hyper.l2.to_string()),
                ("bits", hyper.bits.to_string()),
            ]);
            let mut manifest = ManifestBuilder::new("train-classifier", seed, snapshot);
            pipeline::train_classifier(
                pipeline::TrainClassifierArgs {
                    records: &records,
                    out: &common.out,
                    hyper,
                    split_seed: seed,
                },
                &mut manifest,
            )?;
            manifest.write(&common.out)
        }
        Command::Classify {
            common,
            model,
            input,
            jobs,
        } => {
            let settings = Settings::load(common.config.as_deref())?;
            let seed = settings.resolve("seed", common.seed, 0)?;
            let jobs = settings.resolve("jobs", jobs, default_jobs())?;
            let snapshot = settings.snapshot(&[("jobs", jobs.to_string())]);
            let mut manifest = ManifestBuilder::new("classify", seed, snapshot);
            pipeline::classify(
                pipeline::ClassifyArgs {
                    model: &model,
                    input: &input,
                    out: &common.out,
                    jobs,
                },
                &mut manifest,
            )?;
            manifest.write(&common.out)
        }
        Command::ExtractTerms {
            common,
            records,
            gold,
        } => {
            let settings = Settings::load(common.config.as_deref())?;
            let seed = settings.resolve("seed", common.seed, 0)?;
            let snapshot = settings.snapshot(&[]);
            let mut manifest = ManifestBuilder::new("extract-terms", seed, snapshot);
            pipeline::extract_terms(
                pipeline::ExtractTermsArgs {
                    records: &records,
                    out: &common.out,
                    gold: gold.as_deref(),
                },
                &mut manifest,
            )?;
            manifest.write(&common.out)
        }
        Command::EmitGlossary {
            common,
            records,
            terms,
            input,
        } => {
            let settings = Settings::load(common.config.as_deref())?;
            let seed = settings.resolve("seed", common.seed, 0)?;
            let snapshot = settings.snapshot(&[]);
            let mut manifest = ManifestBuilder::new("emit-glossary", seed, snapshot);
            pipeline::emit_glossary(
                pipeline::EmitGlossaryArgs {
                    records: &records,
                    terms: &terms,
                    input: &input,
                    out: &common.out,
                },
                &mut manifest,
            )?;
            manifest.write(&common.out)
        }
        Command::CompareGlossaries {
            common,
            a,
            b,
            a_predictions,
            b_predictions,
        } => {
            let settings = Settings::load(common.config.as_deref())?;
            let seed = settings.resolve("seed", common.seed, 0)?;
            let snapshot = settings.snapshot(&[]);
            let mut manifest = ManifestBuilder::new("compare-glossaries", seed, snapshot);
            analysis::compare_glossaries(
                analysis::CompareArgs {
                    a: &a,
                    b: &b,
                    a_predictions: a_predictions.as_deref(),
                    b_predictions: b_predictions.as_deref(),
                    out: &common.out,
                },
                &mut manifest,
            )?;
            manifest.write(&common.out)
        }
        Command::ProfileCategories {
            common,
            glossary,
            metadata,
            rank_category,
        } => {
            let settings = Settings::load(common.config.as_deref())?;
            let seed = settings.resolve("seed", common.seed, 0)?;
            let snapshot = settings.snapshot(&[]);
            let mut manifest = ManifestBuilder::new("profile-categories", seed, snapshot);
            analysis::profile_categories(
                analysis::ProfileArgs {
                    glossary: &glossary,
                    metadata: &metadata,
                    out: &common.out,
                    rank_category: rank_category.as_deref(),
                },
                &mut manifest,
            )?;
            manifest.write(&common.out)
        }
        Command::TrainEmbedding {
            common,
            glossary,
            input,
            scope,
            dim,
            window,
            min_count,
            x_max,
            alpha,
            eta,
            epochs,
            profiles,
        } => {
            let settings = Settings::load(common.config.as_deref())?;
            let seed = settings.resolve("seed", common.seed, 0)?;
            let scope = settings.resolve("scope", scope, "definitions".to_string())?;
            let window = settings.resolve("window", window, 10)?;
            let min_count = settings.resolve("min_count", min_count, 1)?;
            let hyper = argot::embedding::GloveHyper {
                dim: settings.resolve("dim", dim, 50)?,
                x_max: settings.resolve("x_max", x_max, 100.0)?,
                alpha: settings.resolve("alpha", alpha, 0.75)?,
                eta: settings.resolve("eta", eta, 0.05)?,
                epochs: settings.resolve("epochs", epochs, 25)?,
                seed,
            };
            let snapshot = settings.snapshot(&[
                ("seed", seed.to_string()),
                ("scope", scope.clone()),
                ("dim", hyper.dim.to_string()),
                ("window", window.to_string()),
                ("min_count", min_count.to_string()),
                ("x_max", hyper.x_max.to_string()),
                ("alpha", hyper.alpha.to_string()),
                ("eta", hyper.eta.to_string()),
                ("epochs", hyper.epochs.to_string()),
            ]);
            let mut manifest = ManifestBuilder::new("train-embedding", seed, snapshot);
            vectors::train_embedding(
                vectors::TrainEmbeddingArgs {
                    input: input.as_deref(),
                    glossary: &glossary,
                    out: &common.out,
                    scope,
                    window,
                    min_count,
                    hyper,
                    profiles: profiles.as_deref(),
                },
                &mut manifest,
            )?;
            manifest.write(&common.out)
        }
        Command::TrainHyperbolic {
            common,
            glossary,
            input,
            scope,
            planes,
            window,
            min_count,
            x_max,
            alpha,
            eta,
            epochs,
        } => {
            let settings = Settings::load(common.config.as_deref())?;
            let seed = settings.resolve("seed", common.seed, 0)?;
            let scope = settings.resolve("scope", scope, "definitions".to_string())?;
            let window = settings.resolve("window", window, 10)?;
            let min_count = settings.resolve("min_count", min_count, 1)?;
            let hyper = argot::hyperbolic::HyperbolicHyper {
                planes: settings.resolve("planes", planes, 25)?,
                epochs: settings.resolve("epochs", epochs, 200)?,
                eta: settings.resolve("eta", eta, 0.1)?,
                seed,
                x_max: settings.resolve("x_max", x_max, 20.0)?,
                alpha: settings.resolve("alpha", alpha, 0.75)?,
            };
            let snapshot = settings.snapshot(&[
                ("seed", seed.to_string()),
                ("scope", scope.clone()),
                ("planes", hyper.planes.to_string()),
                ("window", window.to_string()),
                ("min_count", min_count.to_string()),
                ("x_max", hyper.x_max.to_string()),
                ("alpha", hyper.alpha.to_string()),
                ("eta", hyper.eta.to_string()),
                ("epochs", hyper.epochs.to_string()),
            ]);
            let mut manifest = ManifestBuilder::new("train-hyperbolic", seed, snapshot);
            vectors::train_hyperbolic(
                vectors::TrainHyperbolicArgs {
                    input: input.as_deref(),
                    glossary: &glossary,
                    out: &common.out,
                    scope,
                    window,
                    min_count,
                    hyper,
                },
                &mut manifest,
            )?;
            manifest.write(&common.out)
        }
        Command::BuildGraph { common, glossary } => {
            let settings = Settings::load(common.config.as_deref())?;
            let seed = settings.resolve("seed", common.seed, 0)?;
            let snapshot = settings.snapshot(&[]);
            let mut manifest = ManifestBuilder::new("build-graph", seed, snapshot);
            graph::build_graph(
                graph::BuildGraphArgs {
                    glossary: &glossary,
                    out: &common.out,
                },
                &mut manifest,
            )?;
            manifest.write(&common.out)
        }
        Command::Query { what } => match what {
            QueryCommand::Neighbors { token, vectors, k } => {
                query::neighbors(&vectors, &token, k)
            }
            QueryCommand::Isa { term, query: q, model } => query::isa(&model, &term, &q),
            QueryCommand::Hypernyms {
                query: q,
                model,
                vectors,
                k,
            } => query::hypernyms(&model, vectors.as_deref(), &q, k),
            QueryCommand::Levels { term, graph } => query::levels(&graph, &term),
            QueryCommand::Profile { term, profiles } => query::profile(&profiles, &term),
        },
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // --help/--version are not usage errors
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            std::process::exit(code);
        }
    };
    if let Err(err) = run(cli) {
        eprintln!("error: {err:#}");
        std::process::exit(2);
    }
}
