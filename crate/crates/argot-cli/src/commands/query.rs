//! Read-only queries over trained artifacts.

use std::path::Path;

use anyhow::{bail, Context, Result};
use argot::embedding::read_vectors;
use argot::hyperbolic::{self, read_model};

pub fn neighbors(vectors: &Path, token: &str, k: usize) -> Result<()> {
    let file = std::fs::File::open(vectors).with_context(|| {
        format!(
            "missing {}; run `argot train-embedding` first",
            vectors.display()
        )
    })?;
    let set = read_vectors(std::io::BufReader::new(file))?;
    for (neighbor, similarity) in set.nearest_neighbors(token, k)? {
        println!("{neighbor}\t{similarity:.6}");
    }
    Ok(())
}

fn load_hyperbolic(model: &Path) -> Result<hyperbolic::HyperbolicEmbedding> {
    let file = std::fs::File::open(model).with_context(|| {
        format!(
            "missing {}; run `argot train-hyperbolic` first",
            model.display()
        )
    })?;
    Ok(read_model(std::io::BufReader::new(file))?)
}

pub fn isa(model: &Path, term: &str, query: &str) -> Result<()> {
    let embedding = load_hyperbolic(model)?;
    let rating = hyperbolic::isa_score(&embedding, term, query)?;
    println!("{}\t{}\t{:.6}", rating.term, rating.query, rating.score);
    Ok(())
}

pub fn hypernyms(model: &Path, vectors: Option<&Path>, query: &str, k: usize) -> Result<()> {
    let embedding = load_hyperbolic(model)?;
    let vector_set = match vectors {
        Some(path) => {
            let file = std::fs::File::open(path).with_context(|| {
                format!(
                    "missing {}; run `argot train-embedding` first",
                    path.display()
                )
            })?;
            Some(read_vectors(std::io::BufReader::new(file))?)
        }
        None => None,
    };
    let rows = hyperbolic::hypernymy_query(&embedding, vector_set.as_ref(), query, k)?;
    for row in rows {
        println!("{}\t{:.2}\t{:.6}", row.token, row.isa, row.similarity);
    }
    Ok(())
}

pub fn levels(graph_dir: &Path, term: &str) -> Result<()> {
    let path = graph_dir.join("levels.tsv");
    let file = std::fs::File::open(&path).with_context(|| {
        format!("missing {}; run `argot build-graph` first", path.display())
    })?;
    let levels = argot::concept_graph::read_levels(std::io::BufReader::new(file))?;
    match levels.get(term) {
        Some(&(level, component)) => {
            println!("{term}\t{level}\t{component}");
            Ok(())
        }
        None => bail!("term {term:?} not present in {}", path.display()),
    }
}

pub fn profile(profiles: &Path, term: &str) -> Result<()> {
    let text = std::fs::read_to_string(profiles).with_context(|| {
        format!(
            "missing {}; run `argot profile-categories` first",
            profiles.display()
        )
    })?;
    for line in text.lines() {
        if line.split('\t').next() == Some(term) {
            println!("{line}");
            return Ok(());
        }
    }
    bail!("term {term:?} not present in {}", profiles.display());
}
