//! Glossary comparison and category profiling.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use argot::category::{self, CategoryMetadata};
use argot::classifier::cohen_kappa;
use argot::corpus::ParagraphLabel;

use super::{ensure_out_dir, load_glossary, read_records_file};
use crate::manifest::ManifestBuilder;

pub struct CompareArgs<'a> {
    pub a: &'a Path,
    pub b: &'a Path,
    pub a_predictions: Option<&'a Path>,
    pub b_predictions: Option<&'a Path>,
    pub out: &'a Path,
}

pub fn compare_glossaries(args: CompareArgs, manifest: &mut ManifestBuilder) -> Result<()> {
    ensure_out_dir(args.out)?;
    manifest.input(args.a).input(args.b);
    let glossary_a = load_glossary(args.a)?;
    let glossary_b = load_glossary(args.b)?;
    let comparison = argot::glossary::compare(&glossary_a, &glossary_b);

    let kappa = match (args.a_predictions, args.b_predictions) {
        (Some(pa), Some(pb)) => {
            manifest.input(pa).input(pb);
            let records_a = read_records_file(pa, "classify")?;
            let records_b = read_records_file(pb, "classify")?;
            let by_key =
                |records: &[argot::corpus::ParagraphRecord]| -> BTreeMap<(String, usize), ParagraphLabel> {
                    records
                        .iter()
                        .map(|r| ((r.article_id.clone(), r.index), r.label))
                        .collect()
                };
            let map_a = by_key(&records_a);
            let map_b = by_key(&records_b);
            let mut labels_a = Vec::new();
            let mut labels_b = Vec::new();
            for (key, &label) in &map_a {
                if let Some(&other) = map_b.get(key) {
                    labels_a.push(label);
                    labels_b.push(other);
                }
            }
            Some((cohen_kappa(&labels_a, &labels_b)?, labels_a.len()))
        }
        _ => None,
    };

    let mut report = std::fs::File::create(args.out.join("comparison.txt"))?;
    writeln!(report, "only_a={}", comparison.only_a.len())?;
    writeln!(report, "only_b={}", comparison.only_b.len())?;
    writeln!(report, "intersection={}", comparison.intersection.len())?;
    writeln!(report, "appearances_a={}", comparison.appearances_a)?;
    writeln!(report, "appearances_b={}", comparison.appearances_b)?;
    if let Some((kappa, shared)) = kappa {
        writeln!(report, "kappa={kappa:.6}")?;
        writeln!(report, "shared_paragraphs={shared}")?;
    }
    for (name, set) in [
        ("only_a", &comparison.only_a),
        ("only_b", &comparison.only_b),
        ("intersection", &comparison.intersection),
    ] {
        for term in set {
            writeln!(report, "{name}\t{term}")?;
        }
    }
    println!(
        "compared: {} only in a, {} shared, {} only in b{}",
        comparison.only_a.len(),
        comparison.intersection.len(),
        comparison.only_b.len(),
        kappa
            .map(|(k, _)| format!(", kappa {k:.3}"))
            .unwrap_or_default()
    );
    Ok(())
}

pub struct ProfileArgs<'a> {
    pub glossary: &'a Path,
    pub metadata: &'a Path,
    pub out: &'a Path,
    pub rank_category: Option<&'a str>,
}

pub fn profile_categories(args: ProfileArgs, manifest: &mut ManifestBuilder) -> Result<()> {
    ensure_out_dir(args.out)?;
    manifest.input(args.glossary).input(args.metadata);
    let glossary = load_glossary(args.glossary)?;
    let metadata_file = std::fs::File::open(args.metadata)
        .with_context(|| format!("reading metadata {}", args.metadata.display()))?;
    let metadata = CategoryMetadata::from_reader(std::io::BufReader::new(metadata_file))?;

    let (profiles, skipped) = category::build_profiles(&glossary, &metadata)?;
    let mut profile_file = std::fs::File::create(args.out.join("profiles.tsv"))?;
    category::write_profiles_tsv(&mut profile_file, &profiles)?;
    if !skipped.is_empty() {
        let mut log = std::fs::File::create(args.out.join("skipped.txt"))?;
        for line in &skipped {
            writeln!(log, "{line}")?;
        }
    }

    if let Some(code) = args.rank_category {
        let baseline = category::baseline(&metadata)?;
        let ranked = category::rank_terms_by_category(&profiles, &baseline, code)?;
        let mut rank_file = std::fs::File::create(args.out.join("ranking.tsv"))?;
        for (term, score) in &ranked {
            writeln!(rank_file, "{term}\t{score:.6}")?;
        }
    }
    println!(
        "profiled {} terms ({} entries skipped for missing metadata)",
        profiles.len(),
        skipped.len()
    );
    Ok(())
}
