//! Article ingestion: paragraph extraction, math normalization, and
//! harvesting of labeled paragraphs from definition environments.
//!
//! LaTeX sources are split into paragraphs on blank-line boundaries, with
//! every top-level environment kept as a single paragraph. XML sources use
//! one paragraph per `<para>` element. Math regions are replaced by the
//! placeholder tokens `_inline_math_` and `_display_math_` so downstream
//! stages never see raw TeX math.

use std::collections::BTreeSet;
use std::fmt;
use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use regex::Regex;
use thiserror::Error;

/// Placeholder token substituted for inline math regions.
pub const INLINE_MATH: &str = "_inline_math_";
/// Placeholder token substituted for display math regions.
pub const DISPLAY_MATH: &str = "_display_math_";

/// Environments whose body is replaced wholesale by `_display_math_`.
const DISPLAY_MATH_ENVS: &[&str] = &[
    "equation",
    "align",
    "alignat",
    "displaymath",
    "eqnarray",
    "gather",
    "multline",
];

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("article {article_id}: unbalanced environment delimiters at byte {offset}")]
    UnbalancedEnvironment { article_id: String, offset: usize },
    #[error("article {article_id}: malformed XML at byte {offset}: {message}")]
    MalformedXml {
        article_id: String,
        offset: usize,
        message: String,
    },
    #[error("need at least 10 records to split, got {0}; use a larger corpus")]
    TooFewRecords(usize),
    #[error("record line {line}: {message}")]
    BadRecordLine { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Input format of an article source file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormatHint {
    Latex,
    Xml,
}

/// One paragraph of an article body, before labeling.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArticleParagraph {
    pub text: String,
    /// Environment name when the paragraph is a full environment body.
    pub environment: Option<String>,
    /// True when the environment is `definition` or a declared alias.
    pub is_definition: bool,
}

/// A parsed article with its paragraphs and metadata.
#[derive(Debug, Clone)]
pub struct ArticleSource {
    pub archive_id: String,
    pub article_id: String,
    pub categories: Vec<String>,
    paragraphs: Vec<ArticleParagraph>,
}

impl ArticleSource {
    pub fn paragraphs(&self) -> &[ArticleParagraph] {
        &self.paragraphs
    }

    pub fn paragraph_count(&self) -> usize {
        self.paragraphs.len()
    }
}

/// Classification label carried by a paragraph record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ParagraphLabel {
    Definition,
    NonDefinition,
    Unlabeled,
}

impl ParagraphLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            ParagraphLabel::Definition => "definition",
            ParagraphLabel::NonDefinition => "non-definition",
            ParagraphLabel::Unlabeled => "unlabeled",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "definition" => Some(ParagraphLabel::Definition),
            "non-definition" => Some(ParagraphLabel::NonDefinition),
            "unlabeled" => Some(ParagraphLabel::Unlabeled),
            _ => None,
        }
    }
}

impl fmt::Display for ParagraphLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One normalized paragraph with article identity and position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParagraphRecord {
    pub article_id: String,
    /// 0-based position within the article.
    pub index: usize,
    pub text: String,
    pub label: ParagraphLabel,
}

/// 80/10/10 partition of a record set.
#[derive(Debug, Clone)]
pub struct DatasetSplit {
    pub train: Vec<ParagraphRecord>,
    pub test: Vec<ParagraphRecord>,
    pub validation: Vec<ParagraphRecord>,
    pub seed: u64,
}

/// Parse one article body into paragraphs.
///
/// LaTeX bodies are split on blank lines outside environments; every
/// top-level environment becomes a single paragraph tagged with its
/// environment name. Comments are stripped first. The definition alias set
/// is the canonical `definition` environment plus any alias declared via
/// `\newtheorem{<alias>}{Definition}` in the preamble.
pub fn parse_article(
    archive_id: &str,
    article_id: &str,
    raw: &str,
    hint: FormatHint,
) -> Result<ArticleSource, CorpusError> {
    let paragraphs = match hint {
        FormatHint::Latex => parse_latex(article_id, raw)?,
        FormatHint::Xml => parse_xml_article(article_id, raw)?,
    };
    Ok(ArticleSource {
        archive_id: archive_id.to_string(),
        article_id: article_id.to_string(),
        categories: Vec::new(),
        paragraphs,
    })
}

fn strip_comments(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    for line in raw.split_inclusive('\n') {
        let bytes = line.as_bytes();
        let mut cut = line.len();
        let mut i = 0;
        while i < bytes.len() {
            if bytes[i] == b'\\' {
                i += 2; // skip escaped character
                continue;
            }
            if bytes[i] == b'%' {
                cut = i;
                break;
            }
            i += 1;
        }
        out.push_str(&line[..cut]);
        if cut < line.len() && line.ends_with('\n') {
            out.push('\n');
        }
    }
    out
}

/// Scan the preamble for `\newtheorem` aliases of the definition environment.
fn definition_aliases(preamble: &str) -> BTreeSet<String> {
    let mut aliases = BTreeSet::new();
    aliases.insert("definition".to_string());
    let re = Regex::new(r"\\newtheorem\*?\{([A-Za-z@]+)\}(?:\[[^\]]*\])?\{([^}]*)\}").unwrap();
    for cap in re.captures_iter(preamble) {
        if cap[2].trim().eq_ignore_ascii_case("definition") {
            aliases.insert(cap[1].to_string());
        }
    }
    aliases
}

fn parse_latex(article_id: &str, raw: &str) -> Result<Vec<ArticleParagraph>, CorpusError> {
    let text = strip_comments(raw);
    let (preamble, body) = match text.find(r"\begin{document}") {
        Some(pos) => {
            let body_start = pos + r"\begin{document}".len();
            let body_end = text.find(r"\end{document}").unwrap_or(text.len());
            (&text[..pos], &text[body_start..body_end])
        }
        None => ("", text.as_str()),
    };
    let aliases = definition_aliases(preamble);

    let env_re = Regex::new(r"\\(begin|end)\{([A-Za-z@]+\*?)\}").unwrap();
    let mut paragraphs = Vec::new();
    let mut cursor = 0usize;
    let mut stack: Vec<(String, usize, usize)> = Vec::new(); // (name, body_start, begin_offset)

    for cap in env_re.captures_iter(body) {
        let whole = cap.get(0).unwrap();
        let kind = &cap[1];
        let name = cap[2].trim_end_matches('*').to_string();
        if kind == "begin" {
            if stack.is_empty() {
                push_plain_paragraphs(&mut paragraphs, &body[cursor..whole.start()]);
            }
            stack.push((name, whole.end(), whole.start()));
        } else {
            match stack.pop() {
                Some((open_name, body_start, _)) if open_name == name => {
                    if stack.is_empty() {
                        let inner = body[body_start..whole.start()].trim();
                        if !inner.is_empty() {
                            paragraphs.push(ArticleParagraph {
                                text: squeeze_whitespace(inner),
                                is_definition: aliases.contains(&open_name),
                                environment: Some(open_name),
                            });
                        }
                        cursor = whole.end();
                    }
                }
                _ => {
                    return Err(CorpusError::UnbalancedEnvironment {
                        article_id: article_id.to_string(),
                        offset: whole.start(),
                    })
                }
            }
        }
    }
    if let Some((_, _, begin_offset)) = stack.first() {
        return Err(CorpusError::UnbalancedEnvironment {
            article_id: article_id.to_string(),
            offset: *begin_offset,
        });
    }
    push_plain_paragraphs(&mut paragraphs, &body[cursor..]);
    Ok(paragraphs)
}

fn push_plain_paragraphs(out: &mut Vec<ArticleParagraph>, segment: &str) {
    for block in split_blank_lines(segment) {
        out.push(ArticleParagraph {
            text: squeeze_whitespace(&block),
            environment: None,
            is_definition: false,
        });
    }
}

fn split_blank_lines(segment: &str) -> Vec<String> {
    let mut blocks = Vec::new();
    let mut current = String::new();
    for line in segment.lines() {
        if line.trim().is_empty() {
            if !current.trim().is_empty() {
                blocks.push(current.trim().to_string());
            }
            current.clear();
        } else {
            if !current.is_empty() {
                current.push('\n');
            }
            current.push_str(line);
        }
    }
    if !current.trim().is_empty() {
        blocks.push(current.trim().to_string());
    }
    blocks
}

fn squeeze_whitespace(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Minimal XML article format: an `<article>` root containing `<para>`
/// elements, each optionally carrying an `env` attribute.
fn parse_xml_article(article_id: &str, raw: &str) -> Result<Vec<ArticleParagraph>, CorpusError> {
    let err = |offset: usize, message: &str| CorpusError::MalformedXml {
        article_id: article_id.to_string(),
        offset,
        message: message.to_string(),
    };
    let para_re = Regex::new(r#"<para(?:\s+env="([^"]*)")?\s*>"#).unwrap();
    let mut paragraphs = Vec::new();
    let mut cursor = 0usize;
    while let Some(m) = para_re.find_at(raw, cursor) {
        let cap = para_re.captures(&raw[m.start()..]).unwrap();
        let env = cap.get(1).map(|g| g.as_str().to_string());
        let content_start = m.end();
        let close = raw[content_start..]
            .find("</para>")
            .ok_or_else(|| err(m.start(), "unclosed <para> element"))?;
        let inner = xml_unescape(raw[content_start..content_start + close].trim());
        let is_definition = env.as_deref() == Some("definition");
        paragraphs.push(ArticleParagraph {
            text: squeeze_whitespace(&inner),
            environment: env,
            is_definition,
        });
        cursor = content_start + close + "</para>".len();
    }
    if !raw.contains("<article") {
        return Err(err(0, "missing <article> root element"));
    }
    Ok(paragraphs)
}

fn xml_unescape(s: &str) -> String {
    s.replace("&lt;", "<")
        .replace("&gt;", ">")
        .replace("&quot;", "\"")
        .replace("&amp;", "&")
}

/// Replace every math region with its placeholder token.
///
/// `$...$` and `\(...\)` become `_inline_math_`; `$$...$$`, `\[...\]`, and
/// display environments become `_display_math_`. The function is idempotent.
/// An unterminated region turns the remainder of the paragraph into one
/// display region.
pub fn normalize_math(paragraph: &str) -> String {
    normalize_math_flagged(paragraph).0
}

/// Like [`normalize_math`], also reporting whether an unterminated math
/// region was patched up.
pub fn normalize_math_flagged(paragraph: &str) -> (String, bool) {
    let bytes = paragraph.as_bytes();
    let mut out = String::with_capacity(paragraph.len());
    let mut i = 0usize;
    let mut flagged = false;

    while i < bytes.len() {
        let rest = &paragraph[i..];
        if rest.starts_with("\\$") {
            out.push_str("\\$");
            i += 2;
        } else if let Some(tail) = rest.strip_prefix("\\(") {
            match tail.find("\\)") {
                Some(end) => {
                    out.push_str(INLINE_MATH);
                    i += 2 + end + 2;
                }
                None => {
                    out.push_str(DISPLAY_MATH);
                    flagged = true;
                    i = bytes.len();
                }
            }
        } else if let Some(tail) = rest.strip_prefix("\\[") {
            match tail.find("\\]") {
                Some(end) => {
                    out.push_str(DISPLAY_MATH);
                    i += 2 + end + 2;
                }
                None => {
                    out.push_str(DISPLAY_MATH);
                    flagged = true;
                    i = bytes.len();
                }
            }
        } else if let Some(env) = display_env_at(rest) {
            let open = format!("\\begin{{{env}}}");
            let close = format!("\\end{{{env}}}");
            match rest[open.len()..].find(close.as_str()) {
                Some(end) => {
                    out.push_str(DISPLAY_MATH);
                    i += open.len() + end + close.len();
                }
                None => {
                    out.push_str(DISPLAY_MATH);
                    flagged = true;
                    i = bytes.len();
                }
            }
        } else if let Some(tail) = rest.strip_prefix("$$") {
            match tail.find("$$") {
                Some(end) => {
                    out.push_str(DISPLAY_MATH);
                    i += 2 + end + 2;
                }
                None => {
                    out.push_str(DISPLAY_MATH);
                    flagged = true;
                    i = bytes.len();
                }
            }
        } else if let Some(tail) = rest.strip_prefix('$') {
            match find_unescaped_dollar(tail) {
                Some(end) => {
                    out.push_str(INLINE_MATH);
                    i += 1 + end + 1;
                }
                None => {
                    out.push_str(DISPLAY_MATH);
                    flagged = true;
                    i = bytes.len();
                }
            }
        } else {
            let ch = rest.chars().next().unwrap();
            out.push(ch);
            i += ch.len_utf8();
        }
    }
    (out, flagged)
}

fn display_env_at(rest: &str) -> Option<String> {
    for env in DISPLAY_MATH_ENVS {
        let starred = format!("{env}*");
        if rest.starts_with(&format!("\\begin{{{starred}}}")) {
            return Some(starred);
        }
        if rest.starts_with(&format!("\\begin{{{env}}}")) {
            return Some((*env).to_string());
        }
    }
    None
}

fn find_unescaped_dollar(s: &str) -> Option<usize> {
    let bytes = s.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'\\' {
            i += 2;
            continue;
        }
        if bytes[i] == b'$' {
            return Some(i);
        }
        i += 1;
    }
    None
}

/// Output of [`harvest_labeled`]: labeled records plus log notes for
/// articles that could not contribute negatives or had flagged paragraphs.
#[derive(Debug, Clone)]
pub struct HarvestOutput {
    pub records: Vec<ParagraphRecord>,
    pub notes: Vec<String>,
}

/// Harvest labeled paragraphs from parsed articles.
///
/// Every paragraph inside a definition environment becomes a positive;
/// negatives are sampled uniformly without replacement from the same
/// article's other paragraphs, `floor(ratio * positives)` per article.
/// Deterministic for a fixed seed regardless of input article order.
pub fn harvest_labeled(
    articles: &[ArticleSource],
    negatives_per_positive: f64,
    seed: u64,
) -> HarvestOutput {
    assert!(
        negatives_per_positive > 0.0,
        "negatives_per_positive must be positive"
    );
    let mut refs: Vec<&ArticleSource> = articles.iter().collect();
    refs.sort_by(|a, b| a.article_id.cmp(&b.article_id));

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::new();
    let mut notes = Vec::new();

    for article in refs {
        let positives: Vec<usize> = (0..article.paragraphs.len())
            .filter(|&i| article.paragraphs[i].is_definition)
            .collect();
        if positives.is_empty() {
            continue;
        }
        let pool: Vec<usize> = (0..article.paragraphs.len())
            .filter(|&i| !article.paragraphs[i].is_definition)
            .collect();
        let want = (negatives_per_positive * positives.len() as f64).floor() as usize;
        let take = want.min(pool.len());
        if pool.is_empty() {
            notes.push(format!(
                "{}: no non-definition paragraphs; positives only",
                article.article_id
            ));
        }
        let mut negatives: Vec<usize> = sample(&mut rng, pool.len(), take)
            .into_iter()
            .map(|k| pool[k])
            .collect();
        negatives.sort_unstable();

        let mut chosen: Vec<(usize, ParagraphLabel)> = positives
            .iter()
            .map(|&i| (i, ParagraphLabel::Definition))
            .chain(negatives.iter().map(|&i| (i, ParagraphLabel::NonDefinition)))
            .collect();
        chosen.sort_unstable_by_key(|&(i, _)| i);

        for (i, label) in chosen {
            let (text, flagged) = normalize_math_flagged(&article.paragraphs[i].text);
            if flagged {
                notes.push(format!(
                    "{}: paragraph {} had an unterminated math region",
                    article.article_id, i
                ));
            }
            records.push(ParagraphRecord {
                article_id: article.article_id.clone(),
                index: i,
                text,
                label,
            });
        }
    }
    HarvestOutput { records, notes }
}

/// Shuffle and partition records 80/10/10 (train/test/validation).
///
/// `|train| = floor(0.8 n)`; the remainder is split evenly with the odd
/// record going to the test part.
pub fn split_dataset(records: &[ParagraphRecord], seed: u64) -> Result<DatasetSplit, CorpusError> {
    let n = records.len();
    if n < 10 {
        return Err(CorpusError::TooFewRecords(n));
    }
    let mut indices: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Fisher-Yates, explicit so the permutation is pinned to this rng stream.
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        indices.swap(i, j);
    }
    let n_train = (0.8 * n as f64).floor() as usize;
    let remainder = n - n_train;
    let n_test = remainder.div_ceil(2);

    let pick = |range: std::ops::Range<usize>| -> Vec<ParagraphRecord> {
        indices[range].iter().map(|&i| records[i].clone()).collect()
    };
    Ok(DatasetSplit {
        train: pick(0..n_train),
        test: pick(n_train..n_train + n_test),
        validation: pick(n_train + n_test..n),
        seed,
    })
}

fn escape_field(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '\\' => out.push_str("\\\\"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            _ => out.push(ch),
        }
    }
    out
}

fn unescape_field(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(ch) = chars.next() {
        if ch != '\\' {
            out.push(ch);
            continue;
        }
        match chars.next() {
            Some('t') => out.push('\t'),
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            Some('\\') => out.push('\\'),
            Some(other) => {
                out.push('\\');
                out.push(other);
            }
            None => out.push('\\'),
        }
    }
    out
}

/// Write records as tab-separated `article_id, index, label, text` lines.
pub fn write_records<W: Write>(mut w: W, records: &[ParagraphRecord]) -> io::Result<()> {
    for r in records {
        writeln!(
            w,
            "{}\t{}\t{}\t{}",
            escape_field(&r.article_id),
            r.index,
            r.label,
            escape_field(&r.text)
        )?;
    }
    Ok(())
}

/// Parse a record file written by [`write_records`].
pub fn read_records<R: BufRead>(r: R) -> Result<Vec<ParagraphRecord>, CorpusError> {
    let mut records = Vec::new();
    for (lineno, line) in r.lines().enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.splitn(4, '\t').collect();
        if parts.len() != 4 {
            return Err(CorpusError::BadRecordLine {
                line: lineno + 1,
                message: format!("expected 4 tab-separated fields, got {}", parts.len()),
            });
        }
        let index: usize = parts[1].parse().map_err(|_| CorpusError::BadRecordLine {
            line: lineno + 1,
            message: format!("bad index {:?}", parts[1]),
        })?;
        let label = ParagraphLabel::parse(parts[2]).ok_or_else(|| CorpusError::BadRecordLine {
            line: lineno + 1,
            message: format!("unknown label {:?}", parts[2]),
        })?;
        records.push(ParagraphRecord {
            article_id: unescape_field(parts[0]),
            index,
            label,
            text: unescape_field(parts[3]),
        });
    }
    Ok(records)
}

/// Articles skipped during corpus loading, with reasons.
#[derive(Debug, Clone, Default)]
pub struct SkipReport {
    pub entries: Vec<(String, String)>,
}

impl SkipReport {
    pub fn record(&mut self, article_id: &str, reason: impl fmt::Display) {
        self.entries.push((article_id.to_string(), reason.to_string()));
    }

    pub fn write<W: Write>(&self, mut w: W) -> io::Result<()> {
        for (article_id, reason) in &self.entries {
            writeln!(w, "{article_id}\t{reason}")?;
        }
        Ok(())
    }
}

/// Load every article under a directory tree laid out as
/// `<archive_id>/<article_id>/<article_id>.{tex,xml}`.
///
/// Unparseable articles are skipped and recorded in the report.
pub fn load_corpus_dir(root: &Path) -> Result<(Vec<ArticleSource>, SkipReport), CorpusError> {
    let mut articles = Vec::new();
    let mut report = SkipReport::default();
    let mut article_dirs: Vec<(String, String, PathBuf)> = Vec::new();

    for archive in sorted_dirs(root)? {
        let archive_id = dir_name(&archive);
        for article_dir in sorted_dirs(&archive)? {
            let article_id = dir_name(&article_dir);
            article_dirs.push((archive_id.clone(), article_id, article_dir));
        }
    }

    for (archive_id, article_id, dir) in article_dirs {
        let tex = dir.join(format!("{article_id}.tex"));
        let xml = dir.join(format!("{article_id}.xml"));
        let (path, hint) = if tex.exists() {
            (tex, FormatHint::Latex)
        } else if xml.exists() {
            (xml, FormatHint::Xml)
        } else {
            report.record(&article_id, "no .tex or .xml source file");
            continue;
        };
        let raw = match std::fs::read_to_string(&path) {
            Ok(raw) => raw,
            Err(e) => {
                report.record(&article_id, format!("unreadable: {e}"));
                continue;
            }
        };
        match parse_article(&archive_id, &article_id, &raw, hint) {
            Ok(article) => articles.push(article),
            Err(e) => report.record(&article_id, e),
        }
    }
    Ok((articles, report))
}

fn sorted_dirs(path: &Path) -> io::Result<Vec<PathBuf>> {
    let mut dirs: Vec<PathBuf> = std::fs::read_dir(path)?
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

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blank_line_split() {
        let article = parse_article("a", "x", "A.\n\nB.", FormatHint::Latex).unwrap();
        let texts: Vec<&str> = article.paragraphs().iter().map(|p| p.text.as_str()).collect();
        assert_eq!(texts, vec!["A.", "B."]);
    }

    #[test]
    fn definition_environment_is_one_paragraph() {
        let body = "intro\n\n\\begin{definition}X\\end{definition}\n\nafter";
        let article = parse_article("a", "x", body, FormatHint::Latex).unwrap();
        assert_eq!(article.paragraph_count(), 3);
        let def = &article.paragraphs()[1];
        assert_eq!(def.environment.as_deref(), Some("definition"));
        assert!(def.is_definition);
        assert_eq!(def.text, "X");
    }

    #[test]
    fn unbalanced_environment_is_an_error() {
        let err = parse_article("a", "x", "\\begin{definition} lost", FormatHint::Latex)
            .unwrap_err();
        match err {
            CorpusError::UnbalancedEnvironment { article_id, .. } => {
                assert_eq!(article_id, "x")
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn newtheorem_alias_counts_as_definition() {
        let body = "\\newtheorem{defn}{Definition}\n\\begin{document}\n\\begin{defn}Y\\end{defn}\n\\end{document}";
        let article = parse_article("a", "x", body, FormatHint::Latex).unwrap();
        assert!(article.paragraphs()[0].is_definition);
    }

    #[test]
    fn nested_environment_stays_in_one_paragraph() {
        let body = "\\begin{definition}a \\begin{equation}x\\end{equation} b\\end{definition}";
        let article = parse_article("a", "x", body, FormatHint::Latex).unwrap();
        assert_eq!(article.paragraph_count(), 1);
        assert!(article.paragraphs()[0].text.contains("equation"));
    }

    #[test]
    fn comments_are_stripped_but_escaped_percent_kept() {
        let article =
            parse_article("a", "x", "keep 100\\% of this % drop this", FormatHint::Latex).unwrap();
        assert_eq!(article.paragraphs()[0].text, "keep 100\\% of this");
    }

    #[test]
    fn xml_paragraph_elements() {
        let raw = "<article>\n<para>plain</para>\n<para env=\"definition\">def text</para>\n</article>";
        let article = parse_article("a", "x", raw, FormatHint::Xml).unwrap();
        assert_eq!(article.paragraph_count(), 2);
        assert!(article.paragraphs()[1].is_definition);
        assert_eq!(article.paragraphs()[1].text, "def text");
    }

    #[test]
    fn normalize_inline() {
        assert_eq!(normalize_math("let $x>0$ hold"), "let _inline_math_ hold");
    }

    #[test]
    fn normalize_identity_without_math() {
        assert_eq!(normalize_math("no math here"), "no math here");
    }

    #[test]
    fn normalize_mixed_delimiters() {
        assert_eq!(
            normalize_math("$a$ and $$b$$"),
            "_inline_math_ and _display_math_"
        );
        assert_eq!(
            normalize_math("\\(u\\) vs \\[v\\]"),
            "_inline_math_ vs _display_math_"
        );
        assert_eq!(
            normalize_math("x \\begin{equation}E=mc^2\\end{equation} y"),
            "x _display_math_ y"
        );
    }

    #[test]
    fn normalize_unterminated_flags_paragraph() {
        let (text, flagged) = normalize_math_flagged("broken $x and more");
        assert!(flagged);
        assert_eq!(text, "broken _display_math_");
    }

    #[test]
    fn normalize_is_idempotent() {
        let cases = [
            "let $x>0$ hold",
            "$a$ and $$b$$",
            "broken $x",
            "costs \\$5 only",
            "\\begin{align}a&=b\\end{align}",
        ];
        for case in cases {
            let once = normalize_math(case);
            assert_eq!(normalize_math(&once), once, "not idempotent on {case:?}");
        }
    }

    fn synthetic_article(defs: usize, plain: usize) -> ArticleSource {
        let mut body = String::new();
        for i in 0..plain {
            body.push_str(&format!("plain paragraph number {i}.\n\n"));
        }
        for i in 0..defs {
            body.push_str(&format!(
                "\\begin{{definition}}definition body {i}\\end{{definition}}\n\n"
            ));
        }
        parse_article("arch", "art", &body, FormatHint::Latex).unwrap()
    }

    #[test]
    fn harvest_ratio_one() {
        let articles = vec![synthetic_article(1, 9)];
        let out = harvest_labeled(&articles, 1.0, 7);
        let pos = out
            .records
            .iter()
            .filter(|r| r.label == ParagraphLabel::Definition)
            .count();
        let neg = out
            .records
            .iter()
            .filter(|r| r.label == ParagraphLabel::NonDefinition)
            .count();
        assert_eq!((pos, neg), (1, 1));
    }

    #[test]
    fn harvest_ratio_three() {
        let articles = vec![synthetic_article(1, 9)];
        let out = harvest_labeled(&articles, 3.0, 7);
        let neg = out
            .records
            .iter()
            .filter(|r| r.label == ParagraphLabel::NonDefinition)
            .count();
        assert_eq!(neg, 3);
    }

    #[test]
    fn harvest_is_deterministic() {
        let articles = vec![synthetic_article(2, 8), synthetic_article(1, 5)];
        let a = harvest_labeled(&articles, 1.0, 42);
        let b = harvest_labeled(&articles, 1.0, 42);
        assert_eq!(a.records, b.records);
    }

    #[test]
    fn harvest_positives_only_article_is_noted() {
        let articles = vec![synthetic_article(2, 0)];
        let out = harvest_labeled(&articles, 1.0, 1);
        assert_eq!(out.records.len(), 2);
        assert_eq!(out.notes.len(), 1);
    }

    #[test]
    fn harvest_negatives_avoid_definition_environments() {
        let articles = vec![synthetic_article(3, 12)];
        let out = harvest_labeled(&articles, 2.0, 3);
        for r in &out.records {
            let para = &articles[0].paragraphs()[r.index];
            match r.label {
                ParagraphLabel::Definition => assert!(para.is_definition),
                _ => assert!(!para.is_definition),
            }
        }
    }

    fn dummy_records(n: usize) -> Vec<ParagraphRecord> {
        (0..n)
            .map(|i| ParagraphRecord {
                article_id: format!("a{}", i % 7),
                index: i,
                text: format!("text {i}"),
                label: if i % 2 == 0 {
                    ParagraphLabel::Definition
                } else {
                    ParagraphLabel::NonDefinition
                },
            })
            .collect()
    }

    #[test]
    fn split_sizes() {
        for (n, expect) in [(100, (80, 10, 10)), (10, (8, 1, 1)), (101, (80, 11, 10))] {
            let split = split_dataset(&dummy_records(n), 5).unwrap();
            assert_eq!(
                (split.train.len(), split.test.len(), split.validation.len()),
                expect,
                "n = {n}"
            );
        }
    }

    #[test]
    fn split_too_small() {
        assert!(matches!(
            split_dataset(&dummy_records(9), 5),
            Err(CorpusError::TooFewRecords(9))
        ));
    }

    #[test]
    fn split_is_disjoint_and_exhaustive() {
        use std::collections::BTreeMap;
        for seed in [0u64, 1, 99] {
            let records = dummy_records(53);
            let split = split_dataset(&records, seed).unwrap();
            let mut seen: BTreeMap<(String, usize), usize> = BTreeMap::new();
            for r in split
                .train
                .iter()
                .chain(split.test.iter())
                .chain(split.validation.iter())
            {
                *seen.entry((r.article_id.clone(), r.index)).or_default() += 1;
            }
            assert_eq!(seen.len(), records.len());
            assert!(seen.values().all(|&c| c == 1));
        }
    }

    #[test]
    fn record_file_round_trip() {
        let records = vec![
            ParagraphRecord {
                article_id: "a\tb".into(),
                index: 3,
                text: "line one\nline two\twith tab \\ and backslash".into(),
                label: ParagraphLabel::Definition,
            },
            ParagraphRecord {
                article_id: "plain".into(),
                index: 0,
                text: "nothing special".into(),
                label: ParagraphLabel::Unlabeled,
            },
        ];
        let mut buf = Vec::new();
        write_records(&mut buf, &records).unwrap();
        let back = read_records(&buf[..]).unwrap();
        assert_eq!(back, records);

        let mut buf2 = Vec::new();
        write_records(&mut buf2, &back).unwrap();
        assert_eq!(buf, buf2);
    }
}
