//! Mining term-definition pairs from article corpora and analyzing the
//! resulting glossary.
//!
//! The pipeline in this crate runs end to end:
//!
//! 1. [`corpus`] ingests LaTeX/XML article sources, splits them into
//!    paragraphs, normalizes mathematics into placeholder tokens, and
//!    harvests labeled training examples from definition environments.
//! 2. [`classifier`] trains a linear SGD-SVM that labels paragraphs as
//!    definitions, plus evaluation metrics including Cohen's kappa.
//! 3. [`term_ner`] finds the term being defined (the definiendum) with a
//!    POS tagger and a chunk grammar, scored against gold annotations.
//! 4. [`glossary`] serializes entries to the glossary XML format, computes
//!    term statistics, and compares independently produced glossaries.
//! 5. [`category`] profiles terms against article category metadata and
//!    scores specificity with KL divergence against the corpus baseline.
//! 6. [`embedding`] phrase-joins multiword terms, counts co-occurrences,
//!    and trains Euclidean GloVe vectors.
//! 7. [`hyperbolic`] trains GloVe-style embeddings in a product of upper
//!    half-planes and derives IS-A hypernymy ratings from y-coordinates.
//! 8. [`concept_graph`] builds the term dependency graph and assigns
//!    integer levels by solving the layering linear program exactly.
//!
//! [`synthetic`] generates the bundled desk-scale corpora used by the test
//! suite and the CLI walkthrough.

pub mod category;
pub mod classifier;
pub mod concept_graph;

pub mod corpus;
pub mod embedding;
pub mod glossary;
pub mod hyperbolic;
pub mod synthetic;


pub mod term_ner;
