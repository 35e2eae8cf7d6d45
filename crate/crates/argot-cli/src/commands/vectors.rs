//! Embedding training subcommands.

use std::io::Write;
use std::path::Path;

use anyhow::Result;
use argot::embedding::{self, GloveHyper, PhraseLexicon};
use argot::hyperbolic::{self, HyperbolicHyper};

use super::{embedding_documents, ensure_out_dir, load_glossary};
use crate::manifest::ManifestBuilder;

pub struct TrainEmbeddingArgs<'a> {
    pub input: Option<&'a Path>,
    pub glossary: &'a Path,
    pub out: &'a Path,
    pub scope: String,
    pub window: usize,
    pub min_count: u64,
    pub hyper: GloveHyper,
    /// Profiles file for the category-labeled projection export.
    pub profiles: Option<&'a Path>,
}

pub fn train_embedding(args: TrainEmbeddingArgs, manifest: &mut ManifestBuilder) -> Result<()> {
    ensure_out_dir(args.out)?;
    manifest.input(args.glossary);
    if let Some(input) = args.input {
        manifest.input(input);
    }
    let glossary = load_glossary(args.glossary)?;
    let lexicon = PhraseLexicon::from_terms(glossary.terms())?;
    let docs = embedding_documents(&args.scope, args.input, &glossary, &lexicon)?;
    let matrix = embedding::count_cooccurrences(&docs, args.window, args.min_count)?;

    let mut cache = std::fs::File::create(args.out.join("cooccurrence.bin"))?;
    embedding::write_cooccurrences(&mut cache, &matrix)?;

    let (model, losses) = embedding::train_glove(&matrix, &args.hyper)?;
    let mut loss_file = std::fs::File::create(args.out.join("loss.txt"))?;
    for (epoch, loss) in losses.iter().enumerate() {
        writeln!(loss_file, "epoch_{}={loss:.6}", epoch + 1)?;
    }
    let set = model.vector_set();
    let mut vectors = std::fs::File::create(args.out.join("vectors.txt"))?;
    embedding::write_vectors(&mut vectors, &set)?;

    // data series for external projection: token, dominant category, vector
    if let Some(profiles_path) = args.profiles {
        let text = std::fs::read_to_string(profiles_path)?;
        let dominant_of: std::collections::BTreeMap<String, String> = text
            .lines()
            .filter_map(|line| {
                let mut parts = line.split('\t');
                let term = parts.next()?;
                let _kl = parts.next()?;
                let dominant = parts.next()?;
                Some((PhraseLexicon::token_of(term), dominant.to_string()))
            })
            .collect();
        let mut projection = std::fs::File::create(args.out.join("projection.tsv"))?;
        for token in &set.vocab {
            if let Some(dominant) = dominant_of.get(token) {
                let components: Vec<String> = set
                    .get(token)
                    .unwrap()
                    .iter()
                    .map(|v| format!("{v:.6}"))
                    .collect();
                writeln!(projection, "{token}\t{dominant}\t{}", components.join(" "))?;
            }
        }
    }
    println!(
        "trained {}-dim vectors over {} tokens ({} co-occurrence entries)",
        args.hyper.dim,
        matrix.vocab_size(),
        matrix.nnz()
    );
    Ok(())
}

pub struct TrainHyperbolicArgs<'a> {
    pub input: Option<&'a Path>,
    pub glossary: &'a Path,
    pub out: &'a Path,
    pub scope: String,
    pub window: usize,
    pub min_count: u64,
    pub hyper: HyperbolicHyper,
}

pub fn train_hyperbolic(args: TrainHyperbolicArgs, manifest: &mut ManifestBuilder) -> Result<()> {
    ensure_out_dir(args.out)?;
    manifest.input(args.glossary);
    if let Some(input) = args.input {
        manifest.input(input);
    }
    let glossary = load_glossary(args.glossary)?;
    let lexicon = PhraseLexicon::from_terms(glossary.terms())?;
    let docs = embedding_documents(&args.scope, args.input, &glossary, &lexicon)?;
    let matrix = embedding::count_cooccurrences(&docs, args.window, args.min_count)?;

    let (embedding, losses) = hyperbolic::train_hyperbolic(&matrix, &args.hyper)?;
    let mut loss_file = std::fs::File::create(args.out.join("loss.txt"))?;
    for (epoch, loss) in losses.iter().enumerate() {
        writeln!(loss_file, "epoch_{}={loss:.6}", epoch + 1)?;
    }
    let mut model_file = std::fs::File::create(args.out.join("hyperbolic.txt"))?;
    hyperbolic::write_model(&mut model_file, &embedding)?;
    println!(
        "trained {}-plane hyperbolic embedding over {} tokens",
        args.hyper.planes,
        matrix.vocab_size()
    );
    Ok(())
}
