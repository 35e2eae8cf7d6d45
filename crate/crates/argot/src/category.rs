//! Per-term category profiles and KL-divergence specificity scores.
//!
//! A term's profile counts the categories of the articles whose
//! definitions mention it (one count per article category, so an article
//! with k categories contributes to all k). The baseline distribution is
//! the add-one-smoothed fraction of articles per category; comparing a
//! profile against it with `D_KL(P || Q) = sum P(x) ln(P(x)/Q(x))` (nats)
//! measures how much of an outlier the term is.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{self, BufRead, Write};

use thiserror::Error;

use crate::corpus::ArticleSource;
use crate::glossary::Glossary;

#[derive(Debug, Error)]
pub enum CategoryError {
    #[error("no articles provided; cannot build a baseline distribution")]
    NoArticles,
    #[error("Q({category}) = 0 on the support of P; baseline smoothing was bypassed")]
    UnsmoothedSupport { category: String },
    #[error("unknown category {code:?}; valid codes: {valid:?}")]
    UnknownCategory { code: String, valid: Vec<String> },
    #[error("metadata line {line}: {message}")]
    BadMetadataLine { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Article-to-categories metadata, keyed by article id.
#[derive(Debug, Clone, Default)]
pub struct CategoryMetadata {
    map: BTreeMap<String, Vec<String>>,
}

impl CategoryMetadata {
    pub fn from_articles(articles: &[ArticleSource]) -> Self {
        let map = articles
            .iter()
            .filter(|a| !a.categories.is_empty())
            .map(|a| (a.article_id.clone(), a.categories.clone()))
            .collect();
        CategoryMetadata { map }
    }

    /// Parse tab-separated `article_id<TAB>cat1,cat2,...` lines.
    pub fn from_reader<R: BufRead>(r: R) -> Result<Self, CategoryError> {
        let mut map = BTreeMap::new();
        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (id, cats) =
                line.split_once('\t')
                    .ok_or_else(|| CategoryError::BadMetadataLine {
                        line: lineno + 1,
                        message: "expected article_id<TAB>categories".into(),
                    })?;
            let cats: Vec<String> = cats
                .split(',')
                .map(|c| c.trim().to_string())
                .filter(|c| !c.is_empty())
                .collect();
            if cats.is_empty() {
                return Err(CategoryError::BadMetadataLine {
                    line: lineno + 1,
                    message: "empty category list".into(),
                });
            }
            map.insert(id.to_string(), cats);
        }
        Ok(CategoryMetadata { map })
    }

    pub fn write_tsv<W: Write>(&self, mut w: W) -> io::Result<()> {
        for (id, cats) in &self.map {
            writeln!(w, "{id}\t{}", cats.join(","))?;
        }
        Ok(())
    }

    pub fn get(&self, article_id: &str) -> Option<&[String]> {
        self.map.get(article_id).map(|v| v.as_slice())
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Vec<String>)> {
        self.map.iter()
    }
}

/// Corpus-wide category distribution Q with add-one smoothing.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineDistribution {
    pub q: BTreeMap<String, f64>,
    pub article_totals: BTreeMap<String, u64>,
}

impl BaselineDistribution {
    pub fn categories(&self) -> Vec<String> {
        self.q.keys().cloned().collect()
    }
}

/// One term's category profile.
#[derive(Debug, Clone, PartialEq)]
pub struct CategoryProfile {
    pub term: String,
    pub counts: BTreeMap<String, u64>,
    pub p: BTreeMap<String, f64>,
    pub kl_score: f64,
    pub dominant_category: String,
}

impl CategoryProfile {
    /// Build from raw counts; normalizes, scores against the baseline,
    /// and picks the dominant category (argmax P, ties lexicographic).
    pub fn from_counts(
        term: &str,
        counts: BTreeMap<String, u64>,
        baseline: &BaselineDistribution,
    ) -> Result<Self, CategoryError> {
        let total: u64 = counts.values().sum();
        assert!(total > 0, "profile for {term} has no observations");
        let p: BTreeMap<String, f64> = counts
            .iter()
            .map(|(c, &n)| (c.clone(), n as f64 / total as f64))
            .collect();
        let kl_score = kl_divergence(&p, &baseline.q)?;
        // BTreeMap iteration is sorted, so strict `>` keeps the first
        // (lexicographically least) of tied maxima.
        let dominant_category = p
            .iter()
            .fold(("", f64::NEG_INFINITY), |best, (c, &prob)| {
                if prob > best.1 {
                    (c.as_str(), prob)
                } else {
                    best
                }
            })
            .0
            .to_string();
        Ok(CategoryProfile {
            term: term.to_string(),
            counts,
            p,
            kl_score,
            dominant_category,
        })
    }

    /// Top-k categories by probability, ties lexicographic.
    pub fn top_categories(&self, k: usize) -> Vec<(String, f64)> {
        let mut pairs: Vec<(String, f64)> = self.p.iter().map(|(c, &p)| (c.clone(), p)).collect();
        pairs.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
        pairs.truncate(k);
        pairs
    }
}

/// Baseline Q: articles per category, add-one smoothed and normalized.
pub fn baseline(metadata: &CategoryMetadata) -> Result<BaselineDistribution, CategoryError> {
    if metadata.is_empty() {
        return Err(CategoryError::NoArticles);
    }
    let mut article_totals: BTreeMap<String, u64> = BTreeMap::new();
    for (_, cats) in metadata.iter() {
        for cat in BTreeSet::from_iter(cats.iter()) {
            *article_totals.entry(cat.clone()).or_default() += 1;
        }
    }
    let total: u64 = article_totals.values().sum();
    let denom = (total + article_totals.len() as u64) as f64;
    let q = article_totals
        .iter()
        .map(|(c, &n)| (c.clone(), (n + 1) as f64 / denom))
        .collect();
    Ok(BaselineDistribution { q, article_totals })
}

/// `D_KL(P || Q)` in nats; terms with `P(x) = 0` contribute nothing.
pub fn kl_divergence(
    p: &BTreeMap<String, f64>,
    q: &BTreeMap<String, f64>,
) -> Result<f64, CategoryError> {
    let mut sum = 0.0;
    for (x, &px) in p {
        if px == 0.0 {
            continue;
        }
        let qx = q.get(x).copied().unwrap_or(0.0);
        if qx <= 0.0 {
            return Err(CategoryError::UnsmoothedSupport {
                category: x.clone(),
            });
        }
        sum += px * (px / qx).ln();
    }
    Ok(sum)
}

/// Build one profile per glossary term.
///
/// Each glossary entry contributes one count to every category of its
/// article; entries whose article is missing from the metadata are
/// skipped and reported.
pub fn build_profiles(
    glossary: &Glossary,
    metadata: &CategoryMetadata,
) -> Result<(Vec<CategoryProfile>, Vec<String>), CategoryError> {
    let base = baseline(metadata)?;
    let mut counts: BTreeMap<String, BTreeMap<String, u64>> = BTreeMap::new();
    let mut skipped = Vec::new();
    for entry in &glossary.entries {
        let article_id = article_id_from_name(&entry.article_name);
        let Some(cats) = metadata.get(&article_id) else {
            skipped.push(format!(
                "{}: article {} missing from metadata",
                entry.article_name, article_id
            ));
            continue;
        };
        for d in &entry.definienda {
            let term_counts = counts.entry(d.text.clone()).or_default();
            for cat in BTreeSet::from_iter(cats.iter()) {
                *term_counts.entry(cat.clone()).or_default() += 1;
            }
        }
    }
    let profiles = counts
        .into_iter()
        .map(|(term, c)| CategoryProfile::from_counts(&term, c, &base))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((profiles, skipped))
}

/// The article id embedded in a glossary article name such as
/// `1407_005/1407.2218/1407.2218.xml`.
pub fn article_id_from_name(article_name: &str) -> String {
    let last = article_name.rsplit('/').next().unwrap_or(article_name);
    last.trim_end_matches(".xml")
        .trim_end_matches(".tex")
        .to_string()
}

/// Rank terms by pertinence to a category: `score = P(category) * kl_score`,
/// descending, ties broken by term.
pub fn rank_terms_by_category(
    profiles: &[CategoryProfile],
    baseline: &BaselineDistribution,
    category: &str,
) -> Result<Vec<(String, f64)>, CategoryError> {
    if !baseline.q.contains_key(category) {
        return Err(CategoryError::UnknownCategory {
            code: category.to_string(),
            valid: baseline.categories(),
        });
    }
    let mut ranked: Vec<(String, f64)> = profiles
        .iter()
        .map(|profile| {
            let p_cat = profile.p.get(category).copied().unwrap_or(0.0);
            (profile.term.clone(), p_cat * profile.kl_score)
        })
        .collect();
    ranked.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
    Ok(ranked)
}

/// Tab-separated profile export: term, kl score, dominant category, then
/// the top-5 categories as `cat:prob` pairs.
pub fn write_profiles_tsv<W: Write>(mut w: W, profiles: &[CategoryProfile]) -> io::Result<()> {
    for p in profiles {
        let top: Vec<String> = p
            .top_categories(5)
            .into_iter()
            .map(|(c, prob)| format!("{c}:{prob:.6}"))
            .collect();
        writeln!(
            w,
            "{}\t{:.6}\t{}\t{}",
            p.term,
            p.kl_score,
            p.dominant_category,
            top.join(",")
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::glossary::GlossaryEntry;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn metadata(entries: &[(&str, &[&str])]) -> CategoryMetadata {
        let mut text = String::new();
        for (id, cats) in entries {
            text.push_str(&format!("{id}\t{}\n", cats.join(",")));
        }
        CategoryMetadata::from_reader(text.as_bytes()).unwrap()
    }

    fn glossary_of(terms_per_article: &[(&str, &[&str])]) -> Glossary {
        let entries = terms_per_article
            .iter()
            .enumerate()
            .map(|(i, (id, terms))| {
                let terms: Vec<String> = terms.iter().map(|t| t.to_string()).collect();
                GlossaryEntry::new(
                    &format!("0001_001/{id}/{id}.xml"),
                    i as u32 + 1,
                    i,
                    &format!("we define the {}", terms[0]),
                    &terms,
                )
                .unwrap()
            })
            .collect();
        Glossary::new(entries)
    }

    #[test]
    fn single_article_single_category() {
        let meta = metadata(&[("a1", &["math.FA"])]);
        let g = glossary_of(&[("a1", &["norm"])]);
        let (profiles, skipped) = build_profiles(&g, &meta).unwrap();
        assert!(skipped.is_empty());
        assert_eq!(profiles.len(), 1);
        assert_eq!(profiles[0].p["math.FA"], 1.0);
        assert_eq!(profiles[0].dominant_category, "math.FA");
    }

    #[test]
    fn multi_category_articles_count_once_per_category() {
        let meta = metadata(&[("a1", &["math.FA"]), ("a2", &["math.FA", "math.PR"])]);
        let g = glossary_of(&[("a1", &["norm"]), ("a2", &["norm"])]);
        let (profiles, _) = build_profiles(&g, &meta).unwrap();
        let p = &profiles[0];
        assert_eq!(p.counts["math.FA"], 2);
        assert_eq!(p.counts["math.PR"], 1);
        assert!((p.p["math.FA"] - 2.0 / 3.0).abs() < 1e-12);
        assert!((p.p["math.PR"] - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn missing_metadata_skips_entry() {
        let meta = metadata(&[("a1", &["math.FA"])]);
        let g = glossary_of(&[("a1", &["norm"]), ("ghost", &["graph"])]);
        let (profiles, skipped) = build_profiles(&g, &meta).unwrap();
        assert_eq!(profiles.len(), 1);
        assert_eq!(skipped.len(), 1);
        assert!(skipped[0].contains("ghost"));
    }

    #[test]
    fn baseline_two_articles_symmetric() {
        let meta = metadata(&[("a1", &["A"]), ("a2", &["B"])]);
        let base = baseline(&meta).unwrap();
        assert!((base.q["A"] - 0.5).abs() < 1e-12);
        assert!((base.q["B"] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn baseline_single_category() {
        let meta = metadata(&[("a1", &["A"]), ("a2", &["A"])]);
        let base = baseline(&meta).unwrap();
        assert_eq!(base.q["A"], 1.0);
        assert_eq!(base.article_totals["A"], 2);
    }

    #[test]
    fn baseline_sums_to_one_on_random_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let n = rng.gen_range(1..20);
            let cats = ["A", "B", "C", "D", "E"];
            let lines: String = (0..n)
                .map(|i| {
                    let k = rng.gen_range(1..=3);
                    let chosen: Vec<&str> =
                        (0..k).map(|_| cats[rng.gen_range(0..cats.len())]).collect();
                    format!("a{i}\t{}\n", chosen.join(","))
                })
                .collect();
            let meta = CategoryMetadata::from_reader(lines.as_bytes()).unwrap();
            let base = baseline(&meta).unwrap();
            let sum: f64 = base.q.values().sum();
            assert!((sum - 1.0).abs() < 1e-12);
            assert!(base.q.values().all(|&q| q > 0.0));
        }
    }

    #[test]
    fn baseline_empty_is_error() {
        assert!(matches!(
            baseline(&CategoryMetadata::default()),
            Err(CategoryError::NoArticles)
        ));
    }

    fn dist(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn kl_of_identical_distributions_is_zero() {
        let p = dist(&[("A", 0.3), ("B", 0.7)]);
        assert!(kl_divergence(&p, &p).unwrap() < 1e-12);
    }

    #[test]
    fn kl_worked_example() {
        let p = dist(&[("A", 0.5), ("B", 0.5)]);
        let q = dist(&[("A", 0.25), ("B", 0.75)]);
        let expect = 0.5 * 2f64.ln() + 0.5 * (2f64 / 3.0).ln();
        let got = kl_divergence(&p, &q).unwrap();
        assert!((got - expect).abs() < 1e-12);
        assert!((got - 0.14384).abs() < 1e-4);
    }

    #[test]
    fn kl_zero_p_terms_contribute_nothing() {
        let p = dist(&[("A", 1.0), ("B", 0.0)]);
        let q = dist(&[("A", 0.5), ("B", 0.5)]);
        assert!((kl_divergence(&p, &q).unwrap() - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn kl_unsmoothed_support_is_error() {
        let p = dist(&[("A", 0.5), ("B", 0.5)]);
        let q = dist(&[("A", 1.0)]);
        assert!(matches!(
            kl_divergence(&p, &q),
            Err(CategoryError::UnsmoothedSupport { .. })
        ));
    }

    #[test]
    fn kl_nonnegative_on_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let cats = ["A", "B", "C", "D"];
        for _ in 0..1000 {
            let raw_p: Vec<f64> = (0..cats.len()).map(|_| rng.gen_range(0.0..1.0)).collect();
            let raw_q: Vec<f64> = (0..cats.len()).map(|_| rng.gen_range(0.01..1.0)).collect();
            let sp: f64 = raw_p.iter().sum();
            let sq: f64 = raw_q.iter().sum();
            let p: BTreeMap<String, f64> = cats
                .iter()
                .zip(&raw_p)
                .map(|(c, v)| (c.to_string(), v / sp))
                .collect();
            let q: BTreeMap<String, f64> = cats
                .iter()
                .zip(&raw_q)
                .map(|(c, v)| (c.to_string(), v / sq))
                .collect();
            assert!(kl_divergence(&p, &q).unwrap() >= -1e-12);
        }
    }

    #[test]
    fn kl_is_asymmetric() {
        let p = dist(&[("A", 0.9), ("B", 0.1)]);
        let q = dist(&[("A", 0.5), ("B", 0.5)]);
        let forward = kl_divergence(&p, &q).unwrap();
        let backward = kl_divergence(&q, &p).unwrap();
        assert!((forward - backward).abs() > 1e-3);
    }

    #[test]
    fn dominant_category_invariant_under_count_scaling() {
        let meta = metadata(&[("a1", &["math.FA"]), ("a2", &["math.PR"])]);
        let base = baseline(&meta).unwrap();
        let counts: BTreeMap<String, u64> = [("math.FA".to_string(), 3), ("math.PR".to_string(), 1)]
            .into_iter()
            .collect();
        let p1 = CategoryProfile::from_counts("t", counts.clone(), &base).unwrap();
        let scaled: BTreeMap<String, u64> =
            counts.iter().map(|(c, &n)| (c.clone(), n * 7)).collect();
        let p2 = CategoryProfile::from_counts("t", scaled, &base).unwrap();
        assert_eq!(p1.dominant_category, p2.dominant_category);
        assert!((p1.kl_score - p2.kl_score).abs() < 1e-12);
    }

    #[test]
    fn profiles_sum_to_one() {
        let meta = metadata(&[
            ("a1", &["math.FA", "math.PR"]),
            ("a2", &["math.PR"]),
            ("a3", &["math.CO"]),
        ]);
        let g = glossary_of(&[
            ("a1", &["norm", "graph"]),
            ("a2", &["norm"]),
            ("a3", &["graph"]),
        ]);
        let (profiles, _) = build_profiles(&g, &meta).unwrap();
        for p in &profiles {
            let sum: f64 = p.p.values().sum();
            assert!((sum - 1.0).abs() < 1e-12);
            assert!(kl_divergence(&p.p, &p.p).unwrap() < 1e-12);
        }
    }

    #[test]
    fn ranking_prefers_concentration() {
        let meta = metadata(&[
            ("a1", &["math.FA"]),
            ("a2", &["math.FA"]),
            ("a3", &["math.PR"]),
            ("a4", &["math.PR"]),
        ]);
        // focused appears twice in math.FA; diffuse once in each category
        let g = glossary_of(&[
            ("a1", &["focused"]),
            ("a2", &["focused"]),
            ("a1", &["diffuse"]),
            ("a3", &["diffuse"]),
        ]);
        let (profiles, _) = build_profiles(&g, &meta).unwrap();
        let base = baseline(&meta).unwrap();
        let ranked = rank_terms_by_category(&profiles, &base, "math.FA").unwrap();
        assert_eq!(ranked[0].0, "focused");
        assert!(ranked[0].1 > ranked[1].1);
    }

    #[test]
    fn ranking_unknown_category_is_error() {
        let meta = metadata(&[("a1", &["math.FA"])]);
        let g = glossary_of(&[("a1", &["norm"])]);
        let (profiles, _) = build_profiles(&g, &meta).unwrap();
        let base = baseline(&meta).unwrap();
        match rank_terms_by_category(&profiles, &base, "math.XX").unwrap_err() {
            CategoryError::UnknownCategory { code, valid } => {
                assert_eq!(code, "math.XX");
                assert_eq!(valid, vec!["math.FA".to_string()]);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn terms_absent_from_category_score_zero() {
        let meta = metadata(&[("a1", &["math.FA"]), ("a2", &["math.PR"])]);
        let g = glossary_of(&[("a1", &["norm"]), ("a2", &["graph"])]);
        let (profiles, _) = build_profiles(&g, &meta).unwrap();
        let base = baseline(&meta).unwrap();
        let ranked = rank_terms_by_category(&profiles, &base, "math.FA").unwrap();
        let graph_score = ranked.iter().find(|(t, _)| t == "graph").unwrap().1;
        assert_eq!(graph_score, 0.0);
    }

    #[test]
    fn article_id_extraction() {
        assert_eq!(
            article_id_from_name("1407_005/1407.2218/1407.2218.xml"),
            "1407.2218"
        );
        assert_eq!(article_id_from_name("plain"), "plain");
    }
}
