//! Library-level integration: the full flow from corpus tree to leveled
//! concept graph, exercised through the public API.

use argot::category::{baseline, build_profiles, CategoryMetadata};
use argot::classifier::{cohen_kappa, evaluate, predict, train, Hyper};
use argot::concept_graph::{assign_levels, build_graph, condense_cycles};
use argot::corpus::{harvest_labeled, load_corpus_dir, split_dataset, ParagraphLabel};
use argot::embedding::PhraseLexicon;
use argot::glossary::{compare, emit_xml, parse_xml, stats, Glossary, GlossaryEntry};
use argot::synthetic::mini_corpus;
use argot::term_ner::{extract_definienda, ChunkGrammar, Lexicon};

#[test]
fn corpus_to_graph_through_the_library() {
    let dir = tempfile::tempdir().unwrap();
    mini_corpus(42).write_to(dir.path()).unwrap();

    let (articles, skips) = load_corpus_dir(dir.path()).unwrap();
    assert_eq!(articles.len(), 40);
    assert!(skips.entries.is_empty());

    let harvest = harvest_labeled(&articles, 1.0, 7);
    let split = split_dataset(&harvest.records, 7).unwrap();
    let trained = train(
        &split,
        &Hyper {
            epochs: 12,
            learning_rate: 0.5,
            l2: 1e-4,
            bits: 16,
            seed: 7,
        },
    )
    .unwrap();
    let report = evaluate(&trained.model, &split.test).unwrap();
    assert!(report.f1 >= 0.9, "test f1 {}", report.f1);

    // glossary from predicted definitions
    let lexicon = Lexicon::builtin();
    let grammar = ChunkGrammar::default();
    let mut entries = Vec::new();
    let mut sorted: Vec<_> = articles.iter().collect();
    sorted.sort_by(|a, b| a.article_id.cmp(&b.article_id));
    for (ordinal, article) in sorted.iter().enumerate() {
        for (index, paragraph) in article.paragraphs().iter().enumerate() {
            let record = argot::corpus::ParagraphRecord {
                article_id: article.article_id.clone(),
                index,
                text: argot::corpus::normalize_math(&paragraph.text),
                label: ParagraphLabel::Unlabeled,
            };
            if predict(&trained.model, &record).unwrap().label != ParagraphLabel::Definition {
                continue;
            }
            let terms = extract_definienda(&record.text, &lexicon, &grammar);
            if terms.is_empty() {
                continue;
            }
            let name = format!(
                "{}/{}/{}.tex",
                article.archive_id, article.article_id, article.article_id
            );
            entries.push(
                GlossaryEntry::new(&name, ordinal as u32 + 1, index, &record.text, &terms)
                    .unwrap(),
            );
        }
    }
    let glossary = Glossary::new(entries);
    assert!(stats(&glossary).distinct_terms >= 25);

    // serialization identity
    let doc = emit_xml(&glossary).unwrap();
    assert_eq!(parse_xml(&doc).unwrap(), glossary);

    // comparing a glossary against itself agrees perfectly
    let comparison = compare(&glossary, &glossary);
    assert!(comparison.only_a.is_empty() && comparison.only_b.is_empty());
    let labels: Vec<ParagraphLabel> = harvest.records.iter().map(|r| r.label).collect();
    assert_eq!(cohen_kappa(&labels, &labels).unwrap(), 1.0);

    // category profiles over the same metadata
    let metadata_file = std::fs::File::open(dir.path().join("metadata.tsv")).unwrap();
    let metadata = CategoryMetadata::from_reader(std::io::BufReader::new(metadata_file)).unwrap();
    let (profiles, skipped) = build_profiles(&glossary, &metadata).unwrap();
    assert!(skipped.is_empty(), "{skipped:?}");
    assert!(!profiles.is_empty());
    let base = baseline(&metadata).unwrap();
    assert!((base.q.values().sum::<f64>() - 1.0).abs() < 1e-12);

    // dependency graph from the glossary's term-definition pairs
    let phrase_lexicon = PhraseLexicon::from_terms(glossary.terms()).unwrap();
    let pairs: Vec<(String, String)> = glossary
        .entries
        .iter()
        .flat_map(|e| {
            e.definienda
                .iter()
                .map(|d| (d.text.clone(), e.statement.clone()))
        })
        .collect();
    let (graph, _) = build_graph(&pairs, &phrase_lexicon);
    let (condensed, components) = condense_cycles(&graph);
    let solution = assign_levels(&condensed).unwrap();
    assert!(solution.level_count >= 2, "levels {}", solution.level_count);
    // every original term is mapped to a leveled component
    for term in graph.terms() {
        let component = components.component_of[term];
        assert!(solution
            .levels
            .contains_key(components.representative(component)));
    }
}

#[test]
fn skip_report_records_broken_articles() {
    let dir = tempfile::tempdir().unwrap();
    mini_corpus(1).write_to(dir.path()).unwrap();
    let bad_dir = dir.path().join("2301_001/2301.90001");
    std::fs::create_dir_all(&bad_dir).unwrap();
    std::fs::write(
        bad_dir.join("2301.90001.tex"),
        "\\begin{document}\n\\begin{definition} never closed\n\\end{document}",
    )
    .unwrap();
    let (articles, skips) = load_corpus_dir(dir.path()).unwrap();
    assert_eq!(articles.len(), 40);
    assert_eq!(skips.entries.len(), 1);
    assert_eq!(skips.entries[0].0, "2301.90001");
    assert!(skips.entries[0].1.contains("unbalanced"));
}
