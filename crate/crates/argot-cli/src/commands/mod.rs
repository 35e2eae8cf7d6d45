//! Subcommand implementations.

pub mod analysis;
pub mod graph;
pub mod pipeline;
pub mod query;
pub mod vectors;

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use argot::corpus::{ArticleSource, ParagraphRecord, SkipReport};
use argot::glossary::Glossary;

/// Create the output directory (parents included).
pub fn ensure_out_dir(out: &Path) -> Result<()> {
    std::fs::create_dir_all(out)
        .with_context(|| format!("creating output directory {}", out.display()))
}

/// Load every article under the corpus tree, with its skip report.
pub fn load_corpus(input: &Path) -> Result<(Vec<ArticleSource>, SkipReport)> {
    if !input.is_dir() {
        bail!(
            "{} is not a directory; expected an <archive>/<article>/<article>.tex tree",
            input.display()
        );
    }
    Ok(argot::corpus::load_corpus_dir(input)?)
}

/// Article id -> (archive id, source file name) for glossary naming.
pub fn article_locations(input: &Path) -> Result<Vec<(String, String, String)>> {
    let mut locations = Vec::new();
    for archive in read_sorted_dirs(input)? {
        let archive_id = dir_name(&archive);
        for article_dir in read_sorted_dirs(&archive)? {
            let article_id = dir_name(&article_dir);
            for ext in ["xml", "tex"] {
                if article_dir.join(format!("{article_id}.{ext}")).exists() {
                    locations.push((
                        article_id.clone(),
                        archive_id.clone(),
                        format!("{article_id}.{ext}"),
                    ));
                    break;
                }
            }
        }
    }
    Ok(locations)
}

fn read_sorted_dirs(path: &Path) -> Result<Vec<PathBuf>> {
    let mut dirs: Vec<PathBuf> = std::fs::read_dir(path)
        .with_context(|| format!("reading {}", path.display()))?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.is_dir())
        .collect();
    dirs.sort();
    Ok(dirs)
}

fn dir_name(path: &Path) -> String {
    path.file_name().unwrap_or_default().to_string_lossy().into_owned()
}

/// Read records from a stage output file, naming the producing stage on
/// failure.
pub fn read_records_file(path: &Path, producer: &str) -> Result<Vec<ParagraphRecord>> {
    let file = std::fs::File::open(path).with_context(|| {
        format!(
            "missing {}; run `argot {producer}` first",
            path.display()
        )
    })?;
    Ok(argot::corpus::read_records(std::io::BufReader::new(file))?)
}

/// Load a glossary from one `.xml.gz` file or from every tranche in a
/// directory (sorted by file name).
pub fn load_glossary(path: &Path) -> Result<Glossary> {
    if path.is_dir() {
        let mut files: Vec<PathBuf> = std::fs::read_dir(path)?
            .filter_map(|e| e.ok())
            .map(|e| e.path())
            .filter(|p| p.file_name().is_some_and(|n| n.to_string_lossy().ends_with(".xml.gz")))
            .collect();
        files.sort();
        if files.is_empty() {
            bail!(
                "no .xml.gz tranche files under {}; run `argot emit-glossary` first",
                path.display()
            );
        }
        let mut entries = Vec::new();
        for file in files {
            entries.extend(argot::glossary::read_glossary_gz(&file)?.entries);
        }
        Ok(Glossary::new(entries))
    } else {
        let glossary = argot::glossary::read_glossary_gz(path).with_context(|| {
            format!(
                "missing {}; run `argot emit-glossary` first",
                path.display()
            )
        })?;
        Ok(glossary)
    }
}

/// Tokenized documents for embedding training from either scope.
pub fn embedding_documents(
    scope: &str,
    input: Option<&Path>,
    glossary: &Glossary,
    lexicon: &argot::embedding::PhraseLexicon,
) -> Result<Vec<Vec<String>>> {
    let texts: Vec<String> = match scope {
        "definitions" => glossary.entries.iter().map(|e| e.statement.clone()).collect(),
        "full" => {
            let input = input
                .ok_or_else(|| anyhow::anyhow!("--input is required with --scope full"))?;
            let (articles, _) = load_corpus(input)?;
            let mut texts = Vec::new();
            let mut sorted: Vec<&ArticleSource> = articles.iter().collect();
            sorted.sort_by(|a, b| a.article_id.cmp(&b.article_id));
            for article in sorted {
                for paragraph in article.paragraphs() {
                    texts.push(argot::corpus::normalize_math(&paragraph.text));
                }
            }
            texts
        }
        other => bail!("unknown scope {other:?}; expected definitions or full"),
    };
    Ok(texts
        .iter()
        .map(|text| {
            let normalized = argot::embedding::normalize_for_embedding(text);
            argot::embedding::phrase_join(&normalized, lexicon)
                .split_whitespace()
                .map(str::to_string)
                .collect()
        })
        .collect())
}
