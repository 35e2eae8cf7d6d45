//! Desk-scale synthetic corpora.
//!
//! Two generators, both deterministic per seed:
//!
//! * [`mini_corpus`] builds ~40 articles across five topic areas, with
//!   definition environments, gold definiendum annotations, and category
//!   metadata, laid out like a bulk download tree.
//! * [`hierarchy_corpus`] builds token-level documents over a hand-built
//!   three-level hypernym tree (30 terms) in which general terms co-occur
//!   broadly and specific terms stay near their own branch, plus the
//!   matching term-definition pairs.

use std::collections::BTreeMap;
use std::io;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::category::CategoryMetadata;
use crate::corpus::normalize_math;
use crate::embedding::PhraseLexicon;
use crate::term_ner::{pos_tag, split_sentences, tokenize_sentence, ChunkSpan, IobSentence, Lexicon};

/// One term of the hand-built hierarchy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TermSpec {
    pub term: &'static str,
    pub level: u32,
    pub parent: Option<&'static str>,
    pub tree: usize,
}

/// Categories per topic tree.
pub const TREE_CATEGORIES: [&str; 5] = ["math.FA", "math.CO", "math.CA", "math.RA", "math.OA"];

/// The three-level hypernym hierarchy: five trees, one root, two mid
/// terms, three leaves each.
pub const HIERARCHY: &[TermSpec] = &[
    // spaces
    TermSpec { term: "space", level: 0, parent: None, tree: 0 },
    TermSpec { term: "metric space", level: 1, parent: Some("space"), tree: 0 },
    TermSpec { term: "normed space", level: 1, parent: Some("space"), tree: 0 },
    TermSpec { term: "complete metric space", level: 2, parent: Some("metric space"), tree: 0 },
    TermSpec { term: "banach space", level: 2, parent: Some("normed space"), tree: 0 },
    TermSpec { term: "hilbert space", level: 2, parent: Some("normed space"), tree: 0 },
    // graphs
    TermSpec { term: "graph", level: 0, parent: None, tree: 1 },
    TermSpec { term: "directed graph", level: 1, parent: Some("graph"), tree: 1 },
    TermSpec { term: "bipartite graph", level: 1, parent: Some("graph"), tree: 1 },
    TermSpec { term: "directed cycle", level: 2, parent: Some("directed graph"), tree: 1 },
    TermSpec { term: "directed forest", level: 2, parent: Some("directed graph"), tree: 1 },
    TermSpec { term: "complete bipartite graph", level: 2, parent: Some("bipartite graph"), tree: 1 },
    // functions
    TermSpec { term: "function", level: 0, parent: None, tree: 2 },
    TermSpec { term: "continuous function", level: 1, parent: Some("function"), tree: 2 },
    TermSpec { term: "measurable function", level: 1, parent: Some("function"), tree: 2 },
    TermSpec { term: "piecewise continuous function", level: 2, parent: Some("continuous function"), tree: 2 },
    TermSpec { term: "smooth function", level: 2, parent: Some("continuous function"), tree: 2 },
    TermSpec { term: "integrable function", level: 2, parent: Some("measurable function"), tree: 2 },
    // algebras
    TermSpec { term: "algebra", level: 0, parent: None, tree: 3 },
    TermSpec { term: "lie algebra", level: 1, parent: Some("algebra"), tree: 3 },
    TermSpec { term: "commutative algebra", level: 1, parent: Some("algebra"), tree: 3 },
    TermSpec { term: "nilpotent lie algebra", level: 2, parent: Some("lie algebra"), tree: 3 },
    TermSpec { term: "simple lie algebra", level: 2, parent: Some("lie algebra"), tree: 3 },
    TermSpec { term: "graded commutative algebra", level: 2, parent: Some("commutative algebra"), tree: 3 },
    // operators
    TermSpec { term: "operator", level: 0, parent: None, tree: 4 },
    TermSpec { term: "linear operator", level: 1, parent: Some("operator"), tree: 4 },
    TermSpec { term: "bounded operator", level: 1, parent: Some("operator"), tree: 4 },
    TermSpec { term: "compact linear operator", level: 2, parent: Some("linear operator"), tree: 4 },
    TermSpec { term: "invertible linear operator", level: 2, parent: Some("linear operator"), tree: 4 },
    TermSpec { term: "trace class operator", level: 2, parent: Some("bounded operator"), tree: 4 },
];

/// Phrase lexicon over the hierarchy's multiword terms.
pub fn hierarchy_lexicon() -> PhraseLexicon {
    PhraseLexicon::from_terms(HIERARCHY.iter().map(|t| t.term)).expect("hierarchy terms are valid")
}

/// Token (underscore-joined) form of every term with its level.
pub fn hierarchy_levels() -> BTreeMap<String, u32> {
    HIERARCHY
        .iter()
        .map(|t| (PhraseLexicon::token_of(t.term), t.level))
        .collect()
}

fn spec_of(term: &str) -> &'static TermSpec {
    HIERARCHY
        .iter()
        .find(|t| t.term == term)
        .expect("term in hierarchy")
}

fn tree_terms(tree: usize) -> Vec<&'static TermSpec> {
    HIERARCHY.iter().filter(|t| t.tree == tree).collect()
}

/// One synthesized definition inside an article.
#[derive(Debug, Clone)]
pub struct SynthDefinition {
    pub paragraph_index: usize,
    pub term: String,
}

/// One synthesized article.
#[derive(Debug, Clone)]
pub struct SynthArticle {
    pub archive_id: String,
    pub article_id: String,
    /// `true` for the XML article format, `false` for LaTeX.
    pub is_xml: bool,
    pub source: String,
    pub categories: Vec<String>,
    pub definitions: Vec<SynthDefinition>,
    /// Paragraph texts in order, environments not yet stripped of math.
    pub paragraphs: Vec<(String, Option<String>)>,
}

impl SynthArticle {
    pub fn file_name(&self) -> String {
        let ext = if self.is_xml { "xml" } else { "tex" };
        format!("{}.{}", self.article_id, ext)
    }
}

/// The bundled mini corpus.
#[derive(Debug, Clone)]
pub struct MiniCorpus {
    pub articles: Vec<SynthArticle>,
}

const MATH_INLINE: [&str; 5] = ["$x$", "$y > 0$", "$c$", "$f(x)$", "$d(x, y)$"];

fn template_a(term: &str, parent: Option<&str>, rng: &mut ChaCha8Rng) -> String {
    let math = MATH_INLINE[rng.gen_range(0..MATH_INLINE.len())];
    let tail = match rng.gen_range(0..3) {
        0 => format!("such that {math} holds for every point"),
        1 => format!("such that {math} stays bounded"),
        _ => "satisfying $$\\int f \\, d\\mu < c$$ in the usual sense".to_string(),
    };
    match parent {
        Some(p) => format!("We define the {term} as follows. It is a {p} {tail}."),
        None => format!("We define the {term} as follows. It is a collection {tail}."),
    }
}

fn template_b(term: &str, parent: &str, rng: &mut ChaCha8Rng) -> String {
    let math = MATH_INLINE[rng.gen_range(0..MATH_INLINE.len())];
    format!(
        "A {parent} which is complete is called a {term}. The quantity {math} denotes its usual invariant."
    )
}

fn template_c(term: &str, parent: Option<&str>, rng: &mut ChaCha8Rng) -> String {
    let math = MATH_INLINE[rng.gen_range(0..MATH_INLINE.len())];
    let second = match parent {
        Some(p) => format!("This is obtained from a {p} whenever {math} is finite."),
        None => format!("This happens whenever {math} is finite."),
    };
    format!("We say that the {term} is complete if and only if it is bounded. {second}")
}

fn template_d(term: &str, parent: Option<&str>, rng: &mut ChaCha8Rng) -> String {
    let math = MATH_INLINE[rng.gen_range(0..MATH_INLINE.len())];
    match parent {
        Some(p) => format!("A \\emph{{{term}}} is a {p} with {math} bounded."),
        None => format!("A \\emph{{{term}}} is a collection with {math} bounded."),
    }
}

fn negative_paragraph(tree: usize, rng: &mut ChaCha8Rng) -> String {
    let terms = tree_terms(tree);
    let term = terms[rng.gen_range(0..terms.len())].term;
    let math = MATH_INLINE[rng.gen_range(0..MATH_INLINE.len())];
    match rng.gen_range(0..6) {
        0 => format!("Let {math} be a {term} and let $y$ act on it in the usual way."),
        1 => format!(
            "Theorem {}. Every {term} admits the standard estimate with constant {math}.",
            rng.gen_range(1..9)
        ),
        2 => format!("The proof follows from the properties of the {term} and the triangle estimate."),
        3 => format!("It follows that the {term} constructed above is complete under {math}."),
        4 => format!("In this section we study the {term} and its basic properties."),
        _ => format!("Combining both bounds for the {term} we conclude that {math} converges."),
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Generate the bundled corpus: 40 articles over five topics, with gold
/// definition environments, some `\newtheorem` aliases, and a couple of
/// XML-format articles per tranche.
pub fn mini_corpus(seed: u64) -> MiniCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut articles = Vec::with_capacity(40);

    for index in 0..40usize {
        let tree = index % 5;
        let terms = tree_terms(tree);
        // round-robin so every term is defined at least twice across the
        // eight articles of its tree
        let k = index / 5;
        let mut defined: Vec<&'static TermSpec> =
            vec![terms[(2 * k) % terms.len()], terms[(2 * k + 1) % terms.len()]];
        if rng.gen_bool(0.35) {
            let extra = terms[rng.gen_range(0..terms.len())];
            if !defined.iter().any(|t| t.term == extra.term) {
                defined.push(extra);
            }
        }

        let mut paragraphs: Vec<(String, Option<String>)> = Vec::new();
        let mut definitions = Vec::new();
        let use_alias = !((index / 5) % 7 == 2) && index % 3 == 0;
        let is_xml = index % 7 == 2;
        let env_name = if use_alias && !is_xml { "defn" } else { "definition" };

        paragraphs.push((negative_paragraph(tree, &mut rng), None));
        for spec in &defined {
            let parent = spec.parent;
            let body = if spec.level == 0 {
                match rng.gen_range(0..10) {
                    0..=5 => template_a(spec.term, None, &mut rng),
                    6..=8 => template_c(spec.term, None, &mut rng),
                    _ => template_d(spec.term, None, &mut rng),
                }
            } else {
                match rng.gen_range(0..20) {
                    0..=10 => template_a(spec.term, parent, &mut rng),
                    11..=15 => template_b(spec.term, parent.unwrap(), &mut rng),
                    16..=18 => template_c(spec.term, parent, &mut rng),
                    _ => template_d(spec.term, parent, &mut rng),
                }
            };
            definitions.push(SynthDefinition {
                paragraph_index: paragraphs.len(),
                term: spec.term.to_string(),
            });
            paragraphs.push((body, Some(env_name.to_string())));
            for _ in 0..rng.gen_range(2..5) {
                paragraphs.push((negative_paragraph(tree, &mut rng), None));
            }
        }
        paragraphs.push((negative_paragraph(tree, &mut rng), None));

        let mut categories = vec![TREE_CATEGORIES[tree].to_string()];
        if rng.gen_bool(0.3) {
            categories.push(TREE_CATEGORIES[(tree + 1) % 5].to_string());
        }

        let archive_id = if index < 20 { "2301_001" } else { "2301_002" };
        let article_id = format!("2301.{:05}", index + 1);
        let source = if is_xml {
            render_xml(&paragraphs)
        } else {
            render_latex(&paragraphs, use_alias)
        };
        articles.push(SynthArticle {
            archive_id: archive_id.to_string(),
            article_id,
            is_xml,
            source,
            categories,
            definitions,
            paragraphs,
        });
    }
    MiniCorpus { articles }
}

fn render_latex(paragraphs: &[(String, Option<String>)], use_alias: bool) -> String {
    let mut out = String::from("\\documentclass{article}\n");
    if use_alias {
        out.push_str("\\newtheorem{defn}{Definition}\n");
    }
    out.push_str("\\begin{document}\n\n");
    for (text, env) in paragraphs {
        match env {
            Some(name) => {
                out.push_str(&format!("\\begin{{{name}}} {text} \\end{{{name}}}\n\n"));
            }
            None => {
                out.push_str(text);
                out.push_str("\n\n");
            }
        }
    }
    out.push_str("\\end{document}\n");
    out
}

fn render_xml(paragraphs: &[(String, Option<String>)]) -> String {
    let mut out = String::from("<article>\n");
    for (text, env) in paragraphs {
        match env {
            Some(_) => out.push_str(&format!(
                "<para env=\"definition\">{}</para>\n",
                xml_escape(text)
            )),
            None => out.push_str(&format!("<para>{}</para>\n", xml_escape(text))),
        }
    }
    out.push_str("</article>\n");
    out
}

impl MiniCorpus {
    /// Write the bulk-layout tree, `metadata.tsv`, and the gold IOB file.
    pub fn write_to(&self, dir: &Path) -> io::Result<()> {
        for article in &self.articles {
            let article_dir = dir.join(&article.archive_id).join(&article.article_id);
            std::fs::create_dir_all(&article_dir)?;
            std::fs::write(article_dir.join(article.file_name()), &article.source)?;
        }
        let mut metadata = Vec::new();
        self.metadata().write_tsv(&mut metadata)?;
        std::fs::write(dir.join("metadata.tsv"), metadata)?;

        let gold_dir = dir.join("gold");
        std::fs::create_dir_all(&gold_dir)?;
        let mut iob = Vec::new();
        crate::term_ner::write_iob(&mut iob, &self.gold_iob())?;
        std::fs::write(gold_dir.join("definienda.iob"), iob)?;
        Ok(())
    }

    pub fn metadata(&self) -> CategoryMetadata {
        let mut tsv = String::new();
        let mut rows: Vec<(&str, &[String])> = self
            .articles
            .iter()
            .map(|a| (a.article_id.as_str(), a.categories.as_slice()))
            .collect();
        rows.sort();
        for (id, cats) in rows {
            tsv.push_str(&format!("{id}\t{}\n", cats.join(",")));
        }
        CategoryMetadata::from_reader(tsv.as_bytes()).expect("valid synthetic metadata")
    }

    /// Gold definiendum annotations over every definition paragraph,
    /// sorted by (article id, paragraph index), one [`IobSentence`] per
    /// sentence of the normalized paragraph text.
    pub fn gold_iob(&self) -> Vec<IobSentence> {
        let lexicon = Lexicon::builtin();
        let mut sentences = Vec::new();
        let mut sorted: Vec<&SynthArticle> = self.articles.iter().collect();
        sorted.sort_by(|a, b| a.article_id.cmp(&b.article_id));
        for article in sorted {
            for def in &article.definitions {
                let raw = &article.paragraphs[def.paragraph_index].0;
                let normalized = normalize_math(raw);
                let term_tokens: Vec<String> = def
                    .term
                    .split_whitespace()
                    .map(str::to_string)
                    .collect();
                for (si, sentence) in split_sentences(&normalized).iter().enumerate() {
                    let tokens = tokenize_sentence(sentence);
                    let tagged = pos_tag(&tokens, &lexicon);
                    let mut spans = Vec::new();
                    if si == 0 {
                        let lowered: Vec<String> =
                            tokens.iter().map(|t| t.to_lowercase()).collect();
                        if let Some(start) = find_subsequence(&lowered, &term_tokens) {
                            spans.push(ChunkSpan::dfndum(start, start + term_tokens.len()));
                        }
                    }
                    sentences.push(IobSentence {
                        tokens,
                        tags: tagged.iter().map(|t| t.pos).collect(),
                        spans,
                    });
                }
            }
        }
        sentences
    }
}

fn find_subsequence(haystack: &[String], needle: &[String]) -> Option<usize> {
    if needle.is_empty() || haystack.len() < needle.len() {
        return None;
    }
    (0..=haystack.len() - needle.len())
        .find(|&i| haystack[i..i + needle.len()] == *needle)
}

/// Hierarchy corpus: token documents plus term-definition pairs.
#[derive(Debug, Clone)]
pub struct HierarchyCorpus {
    pub docs: Vec<Vec<String>>,
    /// Raw `(term, definition)` pairs; definitions mention the parent.
    pub pairs: Vec<(String, String)>,
    /// Token form -> hierarchy level.
    pub levels: BTreeMap<String, u32>,
    pub lexicon: PhraseLexicon,
}

/// Generate token documents in which roots co-occur broadly (many
/// distinct partners across all trees), mid terms stay within their
/// tree, and leaves stick to their own branch.
pub fn hierarchy_corpus(seed: u64) -> HierarchyCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let token = |term: &str| PhraseLexicon::token_of(term);
    let roots: Vec<&TermSpec> = HIERARCHY.iter().filter(|t| t.level == 0).collect();
    let mids: Vec<&TermSpec> = HIERARCHY.iter().filter(|t| t.level == 1).collect();
    let leaves: Vec<&TermSpec> = HIERARCHY.iter().filter(|t| t.level == 2).collect();

    let mut docs = Vec::with_capacity(1500);
    for _ in 0..1500 {
        let mut doc: Vec<String> = Vec::new();
        match rng.gen_range(0..20) {
            0..=6 => {
                // a leaf with its own branch
                let leaf = leaves[rng.gen_range(0..leaves.len())];
                let parent = spec_of(leaf.parent.unwrap());
                let root = spec_of(parent.parent.unwrap());
                doc.push(token(leaf.term));
                doc.push(token(parent.term));
                doc.push(token(root.term));
            }
            7..=12 => {
                // roots keep broad company with every kind of term
                let root = roots[rng.gen_range(0..roots.len())];
                let other = &HIERARCHY[rng.gen_range(0..HIERARCHY.len())];
                doc.push(token(root.term));
                doc.push(token(other.term));
                if rng.gen_bool(0.3) {
                    let third = roots[rng.gen_range(0..roots.len())];
                    doc.push(token(third.term));
                }
            }
            13..=16 => {
                // mid terms mesh with mid terms of other trees
                let a = mids[rng.gen_range(0..mids.len())];
                let b = mids[rng.gen_range(0..mids.len())];
                doc.push(token(a.term));
                doc.push(token(b.term));
            }
            17 | 18 => {
                // a mid term in its own tree
                let mid = mids[rng.gen_range(0..mids.len())];
                let member = tree_terms(mid.tree);
                let other = member[rng.gen_range(0..member.len())];
                doc.push(token(mid.term));
                doc.push(token(other.term));
            }
            _ => {
                // weak uniform background so every pair gets some signal
                let a = &HIERARCHY[rng.gen_range(0..HIERARCHY.len())];
                let b = &HIERARCHY[rng.gen_range(0..HIERARCHY.len())];
                doc.push(token(a.term));
                doc.push(token(b.term));
            }
        }
        // light shuffle keeps window contents varied
        for i in (1..doc.len()).rev() {
            let j = rng.gen_range(0..=i);
            doc.swap(i, j);
        }
        docs.push(doc);
    }

    let pairs = HIERARCHY
        .iter()
        .map(|spec| {
            let definition = match spec.parent {
                Some(parent) => format!("a {} is a {} with extra structure", spec.term, parent),
                None => format!("a {} is a basic object of study", spec.term),
            };
            (spec.term.to_string(), definition)
        })
        .collect();

    HierarchyCorpus {
        docs,
        pairs,
        levels: hierarchy_levels(),
        lexicon: hierarchy_lexicon(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{parse_article, FormatHint, ParagraphLabel};
    use crate::term_ner::{chunk_paragraph, chunk_score, ChunkGrammar};

    #[test]
    fn hierarchy_shape() {
        assert_eq!(HIERARCHY.len(), 30);
        for tree in 0..5 {
            let terms = tree_terms(tree);
            assert_eq!(terms.len(), 6);
            assert_eq!(terms.iter().filter(|t| t.level == 0).count(), 1);
            assert_eq!(terms.iter().filter(|t| t.level == 1).count(), 2);
            assert_eq!(terms.iter().filter(|t| t.level == 2).count(), 3);
        }
        for spec in HIERARCHY {
            if let Some(parent) = spec.parent {
                assert_eq!(spec_of(parent).level + 1, spec.level);
            }
        }
    }

    #[test]
    fn mini_corpus_is_deterministic() {
        let a = mini_corpus(42);
        let b = mini_corpus(42);
        assert_eq!(a.articles.len(), 40);
        for (x, y) in a.articles.iter().zip(&b.articles) {
            assert_eq!(x.source, y.source);
            assert_eq!(x.categories, y.categories);
        }
    }

    #[test]
    fn generated_articles_parse_with_matching_indices() {
        let corpus = mini_corpus(7);
        let mut saw_xml = false;
        let mut saw_alias = false;
        for article in &corpus.articles {
            let hint = if article.is_xml {
                saw_xml = true;
                FormatHint::Xml
            } else {
                FormatHint::Latex
            };
            let parsed =
                parse_article(&article.archive_id, &article.article_id, &article.source, hint)
                    .unwrap_or_else(|e| panic!("{}: {e}", article.article_id));
            assert_eq!(
                parsed.paragraph_count(),
                article.paragraphs.len(),
                "{}",
                article.article_id
            );
            for def in &article.definitions {
                let para = &parsed.paragraphs()[def.paragraph_index];
                assert!(para.is_definition, "{}", article.article_id);
                if para.environment.as_deref() == Some("defn") {
                    saw_alias = true;
                }
            }
            for (i, para) in parsed.paragraphs().iter().enumerate() {
                let is_def = article.definitions.iter().any(|d| d.paragraph_index == i);
                assert_eq!(para.is_definition, is_def);
            }
        }
        assert!(saw_xml);
        assert!(saw_alias);
    }

    #[test]
    fn every_term_is_defined_at_least_twice() {
        let corpus = mini_corpus(42);
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for article in &corpus.articles {
            for def in &article.definitions {
                *counts.entry(def.term.as_str()).or_default() += 1;
            }
        }
        for spec in HIERARCHY {
            assert!(
                counts.get(spec.term).copied().unwrap_or(0) >= 2,
                "{} defined fewer than twice",
                spec.term
            );
        }
    }

    #[test]
    fn gold_spans_found_for_every_definition() {
        let corpus = mini_corpus(42);
        let gold = corpus.gold_iob();
        let with_span = gold.iter().filter(|s| !s.spans.is_empty()).count();
        let total_defs: usize = corpus.articles.iter().map(|a| a.definitions.len()).sum();
        assert_eq!(with_span, total_defs, "every definition has one gold span");
    }

    #[test]
    fn chunker_scores_well_on_gold() {
        let corpus = mini_corpus(42);
        let gold = corpus.gold_iob();
        let lexicon = Lexicon::builtin();
        let grammar = ChunkGrammar::default();

        let mut guessed: Vec<Vec<ChunkSpan>> = Vec::new();
        let mut sorted: Vec<&SynthArticle> = corpus.articles.iter().collect();
        sorted.sort_by(|a, b| a.article_id.cmp(&b.article_id));
        for article in sorted {
            for def in &article.definitions {
                let normalized = normalize_math(&article.paragraphs[def.paragraph_index].0);
                for sentence in chunk_paragraph(&normalized, &lexicon, &grammar) {
                    guessed.push(sentence.spans);
                }
            }
        }
        let gold_spans: Vec<Vec<ChunkSpan>> = gold.iter().map(|s| s.spans.clone()).collect();
        let report = chunk_score(&gold_spans, &guessed).unwrap();
        assert!(
            report.f1 >= 0.70,
            "chunker f1 {} (p {}, r {})",
            report.f1,
            report.precision,
            report.recall
        );
        assert!(report.recall >= 0.9, "recall {}", report.recall);
    }

    #[test]
    fn harvest_and_classify_mini_corpus() {
        use crate::classifier::{evaluate, train, Hyper};
        use crate::corpus::{harvest_labeled, split_dataset};

        let corpus = mini_corpus(42);
        let articles: Vec<_> = corpus
            .articles
            .iter()
            .map(|a| {
                let hint = if a.is_xml { FormatHint::Xml } else { FormatHint::Latex };
                parse_article(&a.archive_id, &a.article_id, &a.source, hint).unwrap()
            })
            .collect();
        let harvest = harvest_labeled(&articles, 1.0, 13);
        let positives = harvest
            .records
            .iter()
            .filter(|r| r.label == ParagraphLabel::Definition)
            .count();
        assert!(positives >= 80, "positives {positives}");
        let split = split_dataset(&harvest.records, 13).unwrap();
        let out = train(
            &split,
            &Hyper {
                epochs: 12,
                learning_rate: 0.5,
                l2: 1e-4,
                bits: 16,
                seed: 13,
            },
        )
        .unwrap();
        let report = evaluate(&out.model, &split.test).unwrap();
        assert!(report.f1 >= 0.90, "held-out f1 {}", report.f1);
    }

    #[test]
    fn write_to_produces_bulk_layout() {
        let dir = tempfile::tempdir().unwrap();
        let corpus = mini_corpus(1);
        corpus.write_to(dir.path()).unwrap();
        assert!(dir.path().join("metadata.tsv").exists());
        assert!(dir.path().join("gold/definienda.iob").exists());
        let first = &corpus.articles[0];
        let path = dir
            .path()
            .join(&first.archive_id)
            .join(&first.article_id)
            .join(first.file_name());
        assert!(path.exists());
        let (articles, report) = crate::corpus::load_corpus_dir(dir.path()).unwrap();
        assert_eq!(articles.len(), 40);
        assert!(report.entries.is_empty(), "{:?}", report.entries);
    }

    #[test]
    fn hierarchy_corpus_docs_cover_vocabulary() {
        let corpus = hierarchy_corpus(5);
        let mut seen: BTreeMap<&str, usize> = BTreeMap::new();
        for doc in &corpus.docs {
            for token in doc {
                *seen.entry(token.as_str()).or_default() += 1;
            }
        }
        for spec in HIERARCHY {
            let token = PhraseLexicon::token_of(spec.term);
            let count = seen.get(token.as_str()).copied().unwrap_or(0);
            assert!(count > 0, "{token} never appears");
        }
        // roots are the most frequent level
        let freq_of = |level: u32| -> f64 {
            let tokens: Vec<String> = HIERARCHY
                .iter()
                .filter(|t| t.level == level)
                .map(|t| PhraseLexicon::token_of(t.term))
                .collect();
            tokens
                .iter()
                .map(|t| seen.get(t.as_str()).copied().unwrap_or(0))
                .sum::<usize>() as f64
                / tokens.len() as f64
        };
        assert!(freq_of(0) > freq_of(1));
        assert!(freq_of(1) > freq_of(2));
    }

    #[test]
    fn hierarchy_pairs_recover_levels_exactly() {
        use crate::concept_graph::{assign_levels, build_graph, condense_cycles};
        let corpus = hierarchy_corpus(9);
        let (graph, warnings) = build_graph(&corpus.pairs, &corpus.lexicon);
        assert!(warnings.is_empty(), "{warnings:?}");
        let (condensed, map) = condense_cycles(&graph);
        let solution = assign_levels(&condensed).unwrap();
        for (token, &level) in &corpus.levels {
            let component = map.component_of[token];
            let assigned = solution.levels[map.representative(component)];
            assert_eq!(assigned, level as i64, "{token}");
        }
    }
}
