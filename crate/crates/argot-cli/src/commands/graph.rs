//! Concept graph construction and layering.

use std::io::Write;
use std::path::Path;

use anyhow::Result;
use argot::concept_graph;
use argot::embedding::PhraseLexicon;

use super::{ensure_out_dir, load_glossary};
use crate::manifest::ManifestBuilder;

pub struct BuildGraphArgs<'a> {
    pub glossary: &'a Path,
    pub out: &'a Path,
}

pub fn build_graph(args: BuildGraphArgs, manifest: &mut ManifestBuilder) -> Result<()> {
    ensure_out_dir(args.out)?;
    manifest.input(args.glossary);
    let glossary = load_glossary(args.glossary)?;
    let lexicon = PhraseLexicon::from_terms(glossary.terms())?;

    // one (term, definition) pair per entry-definiendum combination
    let pairs: Vec<(String, String)> = glossary
        .entries
        .iter()
        .flat_map(|entry| {
            entry
                .definienda
                .iter()
                .map(|d| (d.text.clone(), entry.statement.clone()))
        })
        .collect();

    let (graph, warnings) = concept_graph::build_graph(&pairs, &lexicon);
    let (condensed, components) = concept_graph::condense_cycles(&graph);
    let solution = concept_graph::assign_levels(&condensed)?;

    let mut edges = std::fs::File::create(args.out.join("edges.tsv"))?;
    concept_graph::write_edges(&mut edges, &graph)?;
    let mut levels = std::fs::File::create(args.out.join("levels.tsv"))?;
    concept_graph::write_levels(&mut levels, &solution, &components)?;
    if !warnings.is_empty() {
        let mut log = std::fs::File::create(args.out.join("warnings.txt"))?;
        for warning in &warnings {
            writeln!(log, "{warning}")?;
        }
    }
    println!(
        "graph: {} terms, {} edges, {} levels, objective {}",
        graph.vertex_count(),
        graph.edge_count(),
        solution.level_count,
        solution.objective
    );
    Ok(())
}
