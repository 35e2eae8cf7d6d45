//! Ingestion through glossary emission.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};
use argot::classifier::{self, Hyper};
use argot::corpus::{self, ParagraphLabel, ParagraphRecord};
use argot::glossary::{self, Glossary, GlossaryEntry};
use argot::term_ner::{self, ChunkGrammar, Lexicon};

use super::{article_locations, ensure_out_dir, load_corpus, read_records_file};
use crate::manifest::ManifestBuilder;

pub struct HarvestArgs<'a> {
    pub input: &'a Path,
    pub out: &'a Path,
    pub ratio: f64,
    pub seed: u64,
    pub jobs: usize,
}

pub fn harvest(args: HarvestArgs, manifest: &mut ManifestBuilder) -> Result<()> {
    ensure_out_dir(args.out)?;
    manifest.input(args.input);
    let (articles, skip_report) = load_corpus(args.input)?;
    if articles.is_empty() {
        bail!("no articles found under {}", args.input.display());
    }
    let _ = args.jobs; // article parsing is already batched by load_corpus
    let harvest = corpus::harvest_labeled(&articles, args.ratio, args.seed);

    let mut records_file = std::fs::File::create(args.out.join("records.tsv"))?;
    corpus::write_records(&mut records_file, &harvest.records)?;

    let mut skips = std::fs::File::create(args.out.join("skip_report.txt"))?;
    skip_report.write(&mut skips)?;
    for note in &harvest.notes {
        writeln!(skips, "{note}")?;
    }
    println!(
        "harvested {} records from {} articles ({} skipped)",
        harvest.records.len(),
        articles.len(),
        skip_report.entries.len()
    );
    Ok(())
}

pub struct TrainClassifierArgs<'a> {
    pub records: &'a Path,
    pub out: &'a Path,
    pub hyper: Hyper,
    pub split_seed: u64,
}

pub fn train_classifier(args: TrainClassifierArgs, manifest: &mut ManifestBuilder) -> Result<()> {
    ensure_out_dir(args.out)?;
    manifest.input(args.records);
    let records = read_records_file(args.records, "harvest")?;
    let split = corpus::split_dataset(&records, args.split_seed)?;
    let output = classifier::train(&split, &args.hyper)?;

    let mut model_file = std::fs::File::create(args.out.join("model.svm"))?;
    classifier::write_model(&mut model_file, &output.model)?;

    let test_report = classifier::evaluate(&output.model, &split.test)?;
    let mut metrics = std::fs::File::create(args.out.join("metrics.txt"))?;
    for (epoch, report) in output.validation_history.iter().enumerate() {
        writeln!(
            metrics,
            "validation_epoch_{}_precision={:.6}\nvalidation_epoch_{}_recall={:.6}\nvalidation_epoch_{}_f1={:.6}",
            epoch + 1, report.precision, epoch + 1, report.recall, epoch + 1, report.f1
        )?;
    }
    writeln!(metrics, "test_precision={:.6}", test_report.precision)?;
    writeln!(metrics, "test_recall={:.6}", test_report.recall)?;
    writeln!(metrics, "test_f1={:.6}", test_report.f1)?;
    writeln!(
        metrics,
        "test_confusion_tp={} test_confusion_fp={} test_confusion_fn={} test_confusion_tn={}",
        test_report.confusion[0][0],
        test_report.confusion[0][1],
        test_report.confusion[1][0],
        test_report.confusion[1][1]
    )?;
    println!(
        "trained on {} records; held-out f1 {:.3}",
        split.train.len(),
        test_report.f1
    );
    Ok(())
}

pub struct ClassifyArgs<'a> {
    pub model: &'a Path,
    pub input: &'a Path,
    pub out: &'a Path,
    pub jobs: usize,
}

pub fn classify(args: ClassifyArgs, manifest: &mut ManifestBuilder) -> Result<()> {
    ensure_out_dir(args.out)?;
    manifest.input(args.model).input(args.input);
    let model_file = std::fs::File::open(args.model).with_context(|| {
        format!(
            "missing {}; run `argot train-classifier` first",
            args.model.display()
        )
    })?;
    let model = classifier::read_model(std::io::BufReader::new(model_file))?;
    let (mut articles, _) = load_corpus(args.input)?;
    articles.sort_by(|a, b| a.article_id.cmp(&b.article_id));

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs)
        .build()
        .context("building worker pool")?;
    let predictions: Vec<Vec<ParagraphRecord>> = pool.install(|| {
        use rayon::prelude::*;
        articles
            .par_iter()
            .map(|article| {
                article
                    .paragraphs()
                    .iter()
                    .enumerate()
                    .map(|(index, paragraph)| {
                        let mut record = ParagraphRecord {
                            article_id: article.article_id.clone(),
                            index,
                            text: corpus::normalize_math(&paragraph.text),
                            label: ParagraphLabel::Unlabeled,
                        };
                        let prediction =
                            classifier::predict(&model, &record).expect("model bits validated");
                        record.label = prediction.label;
                        record
                    })
                    .collect()
            })
            .collect()
    });

    let flat: Vec<ParagraphRecord> = predictions.into_iter().flatten().collect();
    let positives = flat
        .iter()
        .filter(|r| r.label == ParagraphLabel::Definition)
        .count();
    let mut out_file = std::fs::File::create(args.out.join("predictions.tsv"))?;
    corpus::write_records(&mut out_file, &flat)?;
    println!(
        "classified {} paragraphs; {} predicted definitions",
        flat.len(),
        positives
    );
    Ok(())
}

pub struct ExtractTermsArgs<'a> {
    pub records: &'a Path,
    pub out: &'a Path,
    pub gold: Option<&'a Path>,
}

pub fn extract_terms(args: ExtractTermsArgs, manifest: &mut ManifestBuilder) -> Result<()> {
    ensure_out_dir(args.out)?;
    manifest.input(args.records);
    let mut records = read_records_file(args.records, "classify")?;
    records.sort_by(|a, b| a.article_id.cmp(&b.article_id).then(a.index.cmp(&b.index)));
    let lexicon = Lexicon::builtin();
    let grammar = ChunkGrammar::default();

    let mut terms_file = std::fs::File::create(args.out.join("terms.tsv"))?;
    let mut extracted = 0usize;
    let mut empty = 0usize;
    for record in records.iter().filter(|r| r.label == ParagraphLabel::Definition) {
        let terms = term_ner::extract_definienda(&record.text, &lexicon, &grammar);
        if terms.is_empty() {
            empty += 1;
            continue;
        }
        for term in terms {
            writeln!(terms_file, "{}\t{}\t{}", record.article_id, record.index, term)?;
            extracted += 1;
        }
    }
    println!("extracted {extracted} terms ({empty} definitions yielded none)");

    if let Some(gold_path) = args.gold {
        manifest.input(gold_path);
        let gold_file = std::fs::File::open(gold_path)
            .with_context(|| format!("reading gold annotations {}", gold_path.display()))?;
        let gold = term_ner::read_iob(std::io::BufReader::new(gold_file))?;
        let mut guessed = Vec::new();
        for record in records.iter().filter(|r| r.label == ParagraphLabel::Definition) {
            for sentence in term_ner::chunk_paragraph(&record.text, &lexicon, &grammar) {
                guessed.push(sentence.spans);
            }
        }
        let gold_spans: Vec<Vec<term_ner::ChunkSpan>> =
            gold.iter().map(|s| s.spans.clone()).collect();
        let report = term_ner::chunk_score(&gold_spans, &guessed)?;
        let mut report_file = std::fs::File::create(args.out.join("chunk_report.txt"))?;
        writeln!(report_file, "precision={:.6}", report.precision)?;
        writeln!(report_file, "recall={:.6}", report.recall)?;
        writeln!(report_file, "f1={:.6}", report.f1)?;
        writeln!(
            report_file,
            "guessed={} gold={} correct={}",
            report.guessed, report.gold, report.correct
        )?;
        println!(
            "chunk score vs gold: p {:.3} r {:.3} f1 {:.3}",
            report.precision, report.recall, report.f1
        );
    }
    Ok(())
}

pub struct EmitGlossaryArgs<'a> {
    pub records: &'a Path,
    pub terms: &'a Path,
    pub input: &'a Path,
    pub out: &'a Path,
}

pub fn emit_glossary(args: EmitGlossaryArgs, manifest: &mut ManifestBuilder) -> Result<()> {
    ensure_out_dir(args.out)?;
    manifest.input(args.records).input(args.terms).input(args.input);
    let records = read_records_file(args.records, "classify")?;
    let terms_text = std::fs::read_to_string(args.terms).with_context(|| {
        format!(
            "missing {}; run `argot extract-terms` first",
            args.terms.display()
        )
    })?;

    // (article, paragraph index) -> terms
    let mut terms_by_paragraph: BTreeMap<(String, usize), Vec<String>> = BTreeMap::new();
    for (lineno, line) in terms_text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split('\t').collect();
        if parts.len() != 3 {
            bail!("terms file line {}: expected 3 fields", lineno + 1);
        }
        let index: usize = parts[1]
            .parse()
            .with_context(|| format!("terms file line {}: bad index", lineno + 1))?;
        terms_by_paragraph
            .entry((parts[0].to_string(), index))
            .or_default()
            .push(parts[2].to_string());
    }

    let locations = article_locations(args.input)?;
    let location_of: BTreeMap<&str, (&str, &str)> = locations
        .iter()
        .map(|(article, archive, file)| (article.as_str(), (archive.as_str(), file.as_str())))
        .collect();

    // tranche -> ordered articles, preserving article order inside
    let mut entries_by_tranche: BTreeMap<String, Vec<GlossaryEntry>> = BTreeMap::new();
    let mut ordinal_by_article: BTreeMap<String, u32> = BTreeMap::new();
    let mut next_ordinal: BTreeMap<String, u32> = BTreeMap::new();
    let mut skipped = 0usize;
    let mut sorted_records: Vec<&ParagraphRecord> = records
        .iter()
        .filter(|r| r.label == ParagraphLabel::Definition)
        .collect();
    sorted_records.sort_by(|a, b| a.article_id.cmp(&b.article_id).then(a.index.cmp(&b.index)));

    for record in sorted_records {
        let key = (record.article_id.clone(), record.index);
        let Some(terms) = terms_by_paragraph.get(&key) else {
            skipped += 1;
            continue;
        };
        let Some(&(archive, file)) = location_of.get(record.article_id.as_str()) else {
            bail!(
                "article {} not present under {}",
                record.article_id,
                args.input.display()
            );
        };
        let ordinal = *ordinal_by_article
            .entry(record.article_id.clone())
            .or_insert_with(|| {
                let counter = next_ordinal.entry(archive.to_string()).or_insert(0);
                *counter += 1;
                *counter
            });
        let article_name = format!("{archive}/{}/{file}", record.article_id);
        let entry = GlossaryEntry::new(&article_name, ordinal, record.index, &record.text, terms)?;
        entries_by_tranche.entry(archive.to_string()).or_default().push(entry);
    }

    let mut total_entries = 0usize;
    for (archive, entries) in &entries_by_tranche {
        total_entries += entries.len();
        let tranche = Glossary::new(entries.clone());
        let path = args.out.join(glossary::tranche_file_name(archive));
        glossary::write_glossary_gz(&path, &tranche)?;
    }

    let combined = Glossary::new(entries_by_tranche.into_values().flatten().collect());
    let stats = glossary::stats(&combined);
    let mut stats_file = std::fs::File::create(args.out.join("stats.tsv"))?;
    stats.write_tsv(&mut stats_file)?;
    println!(
        "emitted {total_entries} entries over {} distinct terms ({skipped} definitions without terms skipped)",
        stats.distinct_terms
    );
    Ok(())
}
