//! The glossary data set: XML serialization, term statistics, and
//! comparison of independently produced glossaries.
//!
//! The XML schema is fixed: `<article name="..." num="...">` elements
//! containing `<definition index="...">` elements, each with one
//! `<stmnt>` and one or more `<dfndum>` children. Documents are wrapped
//! in a `<glossary>` root; a bare sequence of `<article>` elements is
//! also accepted on parse. Statement text is whitespace-normalized to
//! single spaces, terms are lowercase.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{self, Read, Write};
use std::path::Path;

use flate2::read::GzDecoder;
use flate2::{Compression, GzBuilder};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GlossaryError {
    #[error("entry for {article_name} definition {definition_index} has no definienda")]
    EmptyDefinienda {
        article_name: String,
        definition_index: usize,
    },
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("unknown element at {path}")]
    UnknownElement { path: String },
    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// A term being defined. `inferred` marks terms that do not occur
/// verbatim in the statement text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Definiendum {
    pub text: String,
    pub inferred: bool,
}

/// One glossary entry: a definition statement plus its terms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GlossaryEntry {
    pub article_name: String,
    pub article_num: u32,
    pub definition_index: usize,
    pub statement: String,
    pub definienda: Vec<Definiendum>,
}

impl GlossaryEntry {
    /// Build an entry, normalizing the statement and terms. A term absent
    /// from the statement (case-insensitive) is flagged `inferred`.
    pub fn new(
        article_name: &str,
        article_num: u32,
        definition_index: usize,
        statement: &str,
        terms: &[String],
    ) -> Result<Self, GlossaryError> {
        if terms.is_empty() {
            return Err(GlossaryError::EmptyDefinienda {
                article_name: article_name.to_string(),
                definition_index,
            });
        }
        let statement = squeeze(statement);
        let statement_lower = statement.to_lowercase();
        let definienda = terms
            .iter()
            .map(|t| {
                let text = squeeze(&t.to_lowercase());
                let inferred = !statement_lower.contains(&text);
                Definiendum { text, inferred }
            })
            .collect();
        Ok(GlossaryEntry {
            article_name: article_name.to_string(),
            article_num,
            definition_index,
            statement,
            definienda,
        })
    }
}

/// A glossary: entries in emission order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Glossary {
    pub entries: Vec<GlossaryEntry>,
}

impl Glossary {
    pub fn new(entries: Vec<GlossaryEntry>) -> Self {
        Glossary { entries }
    }

    /// Distinct normalized terms.
    pub fn terms(&self) -> BTreeSet<String> {
        self.entries
            .iter()
            .flat_map(|e| e.definienda.iter().map(|d| d.text.clone()))
            .collect()
    }
}

fn squeeze(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn xml_unescape(s: &str) -> String {
    s.replace("&lt;", "<")
        .replace("&gt;", ">")
        .replace("&quot;", "\"")
        .replace("&amp;", "&")
}

/// Serialize the glossary to its XML document form.
///
/// Consecutive entries sharing `(article_name, article_num)` are grouped
/// under one `<article>` element, so emit-then-parse preserves entry order.
pub fn emit_xml(glossary: &Glossary) -> Result<String, GlossaryError> {
    let mut out = String::new();
    out.push_str("<glossary>\n");
    let mut i = 0;
    while i < glossary.entries.len() {
        let head = &glossary.entries[i];
        out.push_str(&format!(
            "  <article name=\"{}\" num=\"{}\">\n",
            xml_escape(&head.article_name),
            head.article_num
        ));
        let mut j = i;
        while j < glossary.entries.len()
            && glossary.entries[j].article_name == head.article_name
            && glossary.entries[j].article_num == head.article_num
        {
            let entry = &glossary.entries[j];
            if entry.definienda.is_empty() {
                return Err(GlossaryError::EmptyDefinienda {
                    article_name: entry.article_name.clone(),
                    definition_index: entry.definition_index,
                });
            }
            out.push_str(&format!(
                "    <definition index=\"{}\">\n",
                entry.definition_index
            ));
            out.push_str(&format!(
                "      <stmnt>{}</stmnt>\n",
                xml_escape(&entry.statement)
            ));
            for d in &entry.definienda {
                if d.inferred {
                    out.push_str(&format!(
                        "      <dfndum inferred=\"true\">{}</dfndum>\n",
                        xml_escape(&d.text)
                    ));
                } else {
                    out.push_str(&format!("      <dfndum>{}</dfndum>\n", xml_escape(&d.text)));
                }
            }
            out.push_str("    </definition>\n");
            j += 1;
        }
        out.push_str("  </article>\n");
        i = j;
    }
    out.push_str("</glossary>\n");
    Ok(out)
}

struct Cursor<'a> {
    doc: &'a str,
    pos: usize,
}

#[derive(Debug, PartialEq)]
enum XmlEvent {
    Open {
        name: String,
        attrs: Vec<(String, String)>,
    },
    Close(String),
    Eof,
}

impl Cursor<'_> {
    fn line(&self) -> usize {
        self.doc[..self.pos].matches('\n').count() + 1
    }

    fn error(&self, message: impl Into<String>) -> GlossaryError {
        GlossaryError::Malformed {
            line: self.line(),
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.doc.len() && self.doc.as_bytes()[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    /// Next tag event; requires the cursor to sit at inter-element space.
    fn next_event(&mut self) -> Result<XmlEvent, GlossaryError> {
        self.skip_ws();
        if self.pos >= self.doc.len() {
            return Ok(XmlEvent::Eof);
        }
        if self.doc.as_bytes()[self.pos] != b'<' {
            return Err(self.error("expected a tag"));
        }
        let rest = &self.doc[self.pos..];
        let end = rest
            .find('>')
            .ok_or_else(|| self.error("unterminated tag"))?;
        let inner = &rest[1..end];
        let event = if let Some(name) = inner.strip_prefix('/') {
            XmlEvent::Close(name.trim().to_string())
        } else {
            let inner = inner.trim_end_matches('/');
            let mut parts = inner.splitn(2, char::is_whitespace);
            let name = parts.next().unwrap_or("").to_string();
            let attrs = parse_attrs(parts.next().unwrap_or("")).map_err(|m| self.error(m))?;
            XmlEvent::Open { name, attrs }
        };
        self.pos += end + 1;
        Ok(event)
    }

    /// Text content up to the matching close tag of `name`.
    fn text_until_close(&mut self, name: &str) -> Result<String, GlossaryError> {
        let close = format!("</{name}>");
        let rest = &self.doc[self.pos..];
        let end = rest
            .find(&close)
            .ok_or_else(|| self.error(format!("missing {close}")))?;
        let text = &rest[..end];
        if text.contains('<') {
            return Err(self.error(format!("unexpected element inside <{name}>")));
        }
        self.pos += end + close.len();
        Ok(xml_unescape(text.trim()))
    }
}

fn parse_attrs(s: &str) -> Result<Vec<(String, String)>, String> {
    let mut attrs = Vec::new();
    let mut rest = s.trim();
    while !rest.is_empty() {
        let eq = rest
            .find('=')
            .ok_or_else(|| format!("bad attribute syntax in {rest:?}"))?;
        let key = rest[..eq].trim().to_string();
        let after = rest[eq + 1..].trim_start();
        if !after.starts_with('"') {
            return Err(format!("attribute {key} value must be quoted"));
        }
        let close = after[1..]
            .find('"')
            .ok_or_else(|| format!("unterminated value for attribute {key}"))?;
        attrs.push((key, xml_unescape(&after[1..1 + close])));
        rest = after[close + 2..].trim_start();
    }
    Ok(attrs)
}

/// Parse a glossary XML document (with or without the `<glossary>` root).
pub fn parse_xml(doc: &str) -> Result<Glossary, GlossaryError> {
    let mut cursor = Cursor { doc, pos: 0 };
    let mut entries = Vec::new();

    let first = cursor.next_event()?;
    let (mut pending, rooted) = match first {
        XmlEvent::Eof => return Ok(Glossary::default()),
        XmlEvent::Open { ref name, ref attrs } if name == "glossary" => {
            if !attrs.is_empty() {
                return Err(GlossaryError::Schema {
                    path: "glossary".into(),
                    message: "unexpected attributes".into(),
                });
            }
            (None, true)
        }
        other => (Some(other), false),
    };

    let mut article_ordinal = 0usize;
    loop {
        let event = match pending.take() {
            Some(e) => e,
            None => cursor.next_event()?,
        };
        match event {
            XmlEvent::Eof => {
                if rooted {
                    return Err(cursor.error("missing </glossary>"));
                }
                break;
            }
            XmlEvent::Close(name) if rooted && name == "glossary" => {
                cursor.skip_ws();
                if cursor.pos != doc.len() {
                    return Err(cursor.error("content after </glossary>"));
                }
                break;
            }
            XmlEvent::Open { name, attrs } if name == "article" => {
                article_ordinal += 1;
                parse_article_element(&mut cursor, attrs, article_ordinal, &mut entries)?;
            }
            XmlEvent::Open { name, .. } => {
                return Err(GlossaryError::UnknownElement {
                    path: format!("glossary/{name}"),
                });
            }
            XmlEvent::Close(name) => {
                return Err(cursor.error(format!("unexpected </{name}>")));
            }
        }
    }
    Ok(Glossary { entries })
}

fn parse_article_element(
    cursor: &mut Cursor,
    attrs: Vec<(String, String)>,
    ordinal: usize,
    entries: &mut Vec<GlossaryEntry>,
) -> Result<(), GlossaryError> {
    let path = format!("glossary/article[{ordinal}]");
    let mut name = None;
    let mut num = None;
    for (key, value) in attrs {
        match key.as_str() {
            "name" => name = Some(value),
            "num" => {
                num = Some(value.parse::<u32>().map_err(|_| GlossaryError::Schema {
                    path: path.clone(),
                    message: format!("num attribute {value:?} is not an integer"),
                })?)
            }
            other => {
                return Err(GlossaryError::Schema {
                    path,
                    message: format!("unknown attribute {other:?}"),
                })
            }
        }
    }
    let name = name.ok_or_else(|| GlossaryError::Schema {
        path: path.clone(),
        message: "missing name attribute".into(),
    })?;
    let num = num.ok_or_else(|| GlossaryError::Schema {
        path: path.clone(),
        message: "missing num attribute".into(),
    })?;

    loop {
        match cursor.next_event()? {
            XmlEvent::Close(tag) if tag == "article" => return Ok(()),
            XmlEvent::Open { name: tag, attrs } if tag == "definition" => {
                let entry = parse_definition_element(cursor, attrs, &path, &name, num)?;
                entries.push(entry);
            }
            XmlEvent::Open { name: tag, .. } => {
                return Err(GlossaryError::UnknownElement {
                    path: format!("{path}/{tag}"),
                });
            }
            XmlEvent::Close(tag) => {
                return Err(cursor.error(format!("unexpected </{tag}> inside article")));
            }
            XmlEvent::Eof => return Err(cursor.error("missing </article>")),
        }
    }
}

fn parse_definition_element(
    cursor: &mut Cursor,
    attrs: Vec<(String, String)>,
    article_path: &str,
    article_name: &str,
    article_num: u32,
) -> Result<GlossaryEntry, GlossaryError> {
    let mut index = None;
    for (key, value) in &attrs {
        match key.as_str() {
            "index" => {
                index = Some(value.parse::<usize>().map_err(|_| GlossaryError::Schema {
                    path: format!("{article_path}/definition"),
                    message: format!("index attribute {value:?} is not an integer"),
                })?)
            }
            other => {
                return Err(GlossaryError::Schema {
                    path: format!("{article_path}/definition"),
                    message: format!("unknown attribute {other:?}"),
                })
            }
        }
    }
    let index = index.ok_or_else(|| GlossaryError::Schema {
        path: format!("{article_path}/definition"),
        message: "missing index attribute".into(),
    })?;
    let path = format!("{article_path}/definition[@index={index}]");

    let mut statement: Option<String> = None;
    let mut definienda: Vec<Definiendum> = Vec::new();
    loop {
        match cursor.next_event()? {
            XmlEvent::Close(tag) if tag == "definition" => break,
            XmlEvent::Open { name: tag, attrs } if tag == "stmnt" => {
                if statement.is_some() {
                    return Err(GlossaryError::Schema {
                        path,
                        message: "duplicate <stmnt>".into(),
                    });
                }
                if !attrs.is_empty() {
                    return Err(GlossaryError::Schema {
                        path,
                        message: "<stmnt> takes no attributes".into(),
                    });
                }
                statement = Some(squeeze(&cursor.text_until_close("stmnt")?));
            }
            XmlEvent::Open { name: tag, attrs } if tag == "dfndum" => {
                let mut inferred = false;
                for (key, value) in &attrs {
                    if key == "inferred" && value == "true" {
                        inferred = true;
                    } else {
                        return Err(GlossaryError::Schema {
                            path,
                            message: format!("unknown dfndum attribute {key:?}"),
                        });
                    }
                }
                let text = squeeze(&cursor.text_until_close("dfndum")?);
                definienda.push(Definiendum { text, inferred });
            }
            XmlEvent::Open { name: tag, .. } => {
                return Err(GlossaryError::UnknownElement {
                    path: format!("{path}/{tag}"),
                });
            }
            XmlEvent::Close(tag) => {
                return Err(cursor.error(format!("unexpected </{tag}> inside definition")));
            }
            XmlEvent::Eof => return Err(cursor.error("missing </definition>")),
        }
    }
    let statement = statement.ok_or_else(|| GlossaryError::Schema {
        path: path.clone(),
        message: "missing <stmnt>".into(),
    })?;
    if definienda.is_empty() {
        return Err(GlossaryError::Schema {
            path,
            message: "missing <dfndum>".into(),
        });
    }
    Ok(GlossaryEntry {
        article_name: article_name.to_string(),
        article_num,
        definition_index: index,
        statement,
        definienda,
    })
}

/// File name for a tranche, matching the bulk naming convention.
pub fn tranche_file_name(archive_id: &str) -> String {
    format!("{archive_id}.xml.gz")
}

/// Write the glossary as a gzip-compressed XML document.
///
/// The gzip header carries no mtime, so identical glossaries produce
/// byte-identical files.
pub fn write_glossary_gz(path: &Path, glossary: &Glossary) -> Result<(), GlossaryError> {
    let xml = emit_xml(glossary)?;
    let file = std::fs::File::create(path)?;
    let mut encoder = GzBuilder::new().mtime(0).write(file, Compression::default());
    encoder.write_all(xml.as_bytes())?;
    encoder.finish()?;
    Ok(())
}

/// Read a gzip-compressed glossary document.
pub fn read_glossary_gz(path: &Path) -> Result<Glossary, GlossaryError> {
    let file = std::fs::File::open(path)?;
    let mut decoder = GzDecoder::new(file);
    let mut xml = String::new();
    decoder.read_to_string(&mut xml)?;
    parse_xml(&xml)
}

/// Per-term appearance counts over a glossary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GlossaryStats {
    pub term_counts: BTreeMap<String, u64>,
    pub distinct_terms: usize,
    pub total_appearances: u64,
}

impl GlossaryStats {
    /// Top-k terms by count, ties broken lexicographically.
    pub fn top_k(&self, k: usize) -> Vec<(String, u64)> {
        let mut pairs: Vec<(String, u64)> = self
            .term_counts
            .iter()
            .map(|(t, &c)| (t.clone(), c))
            .collect();
        pairs.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        pairs.truncate(k);
        pairs
    }

    /// Tab-separated `term<TAB>count`, descending count, ties lexicographic.
    pub fn write_tsv<W: Write>(&self, mut w: W) -> io::Result<()> {
        for (term, count) in self.top_k(self.term_counts.len()) {
            writeln!(w, "{term}\t{count}")?;
        }
        Ok(())
    }
}

/// Count term occurrences; each (entry, definiendum) pair counts once.
pub fn stats(glossary: &Glossary) -> GlossaryStats {
    let mut term_counts: BTreeMap<String, u64> = BTreeMap::new();
    for entry in &glossary.entries {
        for d in &entry.definienda {
            *term_counts.entry(d.text.clone()).or_default() += 1;
        }
    }
    let distinct_terms = term_counts.len();
    let total_appearances = term_counts.values().sum();
    GlossaryStats {
        term_counts,
        distinct_terms,
        total_appearances,
    }
}

/// Set partition of two glossaries' terms plus appearance totals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GlossaryComparison {
    pub only_a: BTreeSet<String>,
    pub only_b: BTreeSet<String>,
    pub intersection: BTreeSet<String>,
    pub appearances_a: u64,
    pub appearances_b: u64,
}

/// Partition the distinct terms of `a` and `b`.
pub fn compare(a: &Glossary, b: &Glossary) -> GlossaryComparison {
    let terms_a = a.terms();
    let terms_b = b.terms();
    GlossaryComparison {
        only_a: terms_a.difference(&terms_b).cloned().collect(),
        only_b: terms_b.difference(&terms_a).cloned().collect(),
        intersection: terms_a.intersection(&terms_b).cloned().collect(),
        appearances_a: stats(a).total_appearances,
        appearances_b: stats(b).total_appearances,
    }
}
