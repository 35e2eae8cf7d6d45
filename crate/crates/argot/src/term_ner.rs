//! Definiendum extraction: POS tagging plus a chunk grammar over tagged
//! sentences, scored against gold IOB2 annotations.
//!
//! The tagger is deliberately rule-based (lexicon lookup, then suffix
//! rules) so the whole pipeline stays deterministic; the interface takes
//! the lexicon as a value so a trained tagger can be dropped in behind it.

use std::collections::{BTreeSet, HashMap};
use std::io::{self, BufRead, Write};

use thiserror::Error;

use crate::corpus::{DISPLAY_MATH, INLINE_MATH};

#[derive(Debug, Error)]
pub enum NerError {
    #[error("gold and guessed span lists cover different sentence counts ({0} vs {1})")]
    SentenceCountMismatch(usize, usize),
    #[error("lexicon line {line}: {message}")]
    BadLexiconLine { line: usize, message: String },
    #[error("IOB line {line}: {message}")]
    BadIobLine { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Penn-style part-of-speech tags, plus a catch-all `Punct` for
/// punctuation and residual markup tokens.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[allow(clippy::upper_case_acronyms)]
#[rustfmt::skip]
pub enum PennTag {
    CC, CD, DT, EX, FW, IN, JJ, JJR, JJS, LS, MD, NN, NNS, NNP, NNPS, PDT,
    POS, PRP, PRPS, RB, RBR, RBS, RP, SYM, TO, UH, VB, VBD, VBG, VBN, VBP,
    VBZ, WDT, WP, WPS, WRB, Punct,
}

impl PennTag {
    #[rustfmt::skip]
    pub fn as_str(self) -> &'static str {
        use PennTag::*;
        match self {
            CC => "CC", CD => "CD", DT => "DT", EX => "EX", FW => "FW",
            IN => "IN", JJ => "JJ", JJR => "JJR", JJS => "JJS", LS => "LS",
            MD => "MD", NN => "NN", NNS => "NNS", NNP => "NNP",
            NNPS => "NNPS", PDT => "PDT", POS => "POS", PRP => "PRP",
            PRPS => "PRP$", RB => "RB", RBR => "RBR", RBS => "RBS",
            RP => "RP", SYM => "SYM", TO => "TO", UH => "UH", VB => "VB",
            VBD => "VBD", VBG => "VBG", VBN => "VBN", VBP => "VBP",
            VBZ => "VBZ", WDT => "WDT", WP => "WP", WPS => "WP$",
            WRB => "WRB", Punct => "PUNCT",
        }
    }

    #[rustfmt::skip]
    pub fn parse(s: &str) -> Option<Self> {
        use PennTag::*;
        Some(match s {
            "CC" => CC, "CD" => CD, "DT" => DT, "EX" => EX, "FW" => FW,
            "IN" => IN, "JJ" => JJ, "JJR" => JJR, "JJS" => JJS, "LS" => LS,
            "MD" => MD, "NN" => NN, "NNS" => NNS, "NNP" => NNP,
            "NNPS" => NNPS, "PDT" => PDT, "POS" => POS, "PRP" => PRP,
            "PRP$" => PRPS, "RB" => RB, "RBR" => RBR, "RBS" => RBS,
            "RP" => RP, "SYM" => SYM, "TO" => TO, "UH" => UH, "VB" => VB,
            "VBD" => VBD, "VBG" => VBG, "VBN" => VBN, "VBP" => VBP,
            "VBZ" => VBZ, "WDT" => WDT, "WP" => WP, "WP$" => WPS,
            "WRB" => WRB, "PUNCT" => Punct,
            _ => return None,
        })
    }
}

/// One tagged token of a sentence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedToken {
    pub surface: String,
    pub pos: PennTag,
    pub is_capitalized: bool,
    pub is_sentence_final_period: bool,
}

/// Word-to-tag lookup, most frequent tag per word.
#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    entries: HashMap<String, PennTag>,
}

/// Built-in lexicon covering function words and the verbs and adjectives
/// common in mathematical prose. Nouns are mostly left to the default rule.
const BUILTIN_LEXICON: &str = "\
a\tDT\nan\tDT\nthe\tDT\nthis\tDT\nthese\tDT\nthose\tDT\neach\tDT\nevery\tDT\n\
all\tDT\nboth\tDT\nsome\tDT\nany\tDT\nno\tDT\neither\tDT\nneither\tDT\n\
of\tIN\nin\tIN\non\tIN\nfor\tIN\nwith\tIN\nby\tIN\nfrom\tIN\nat\tIN\n\
over\tIN\nunder\tIN\ninto\tIN\nonto\tIN\nbetween\tIN\namong\tIN\nwithin\tIN\n\
without\tIN\nalong\tIN\nacross\tIN\nagainst\tIN\nduring\tIN\nas\tIN\nif\tIN\n\
unless\tIN\nwhether\tIN\nthat\tIN\nsuch\tJJ\nto\tTO\n\
and\tCC\nor\tCC\nbut\tCC\nnor\tCC\n\
we\tPRP\nit\tPRP\nthey\tPRP\nus\tPRP\nthem\tPRP\nitself\tPRP\none\tCD\n\
its\tPRP$\nour\tPRP$\ntheir\tPRP$\n\
there\tEX\nwhich\tWDT\nwho\tWP\nwhat\tWP\nwhere\tWRB\nwhen\tWRB\nhow\tWRB\nwhy\tWRB\n\
can\tMD\nmay\tMD\nmust\tMD\nshall\tMD\nwill\tMD\nmight\tMD\ncould\tMD\nwould\tMD\nshould\tMD\n\
not\tRB\nalso\tRB\nthen\tRB\nthus\tRB\nhence\tRB\ntherefore\tRB\nmoreover\tRB\n\
furthermore\tRB\nhowever\tRB\nindeed\tRB\nnamely\tRB\nusually\tRB\noften\tRB\n\
always\tRB\nnever\tRB\nagain\tRB\nstill\tRB\nalready\tRB\nclearly\tRB\n\
similarly\tRB\nrespectively\tRB\nso\tRB\ntoo\tRB\nonly\tRB\nhere\tRB\nnow\tRB\n\
is\tVBZ\nhas\tVBZ\ndoes\tVBZ\nexists\tVBZ\nsatisfies\tVBZ\nholds\tVBZ\n\
denotes\tVBZ\ndefines\tVBZ\nsays\tVBZ\nbecomes\tVBZ\nadmits\tVBZ\ncontains\tVBZ\n\
equals\tVBZ\nmeans\tVBZ\nimplies\tVBZ\nfollows\tVBZ\nconsists\tVBZ\nbelongs\tVBZ\n\
sends\tVBZ\nacts\tVBZ\nvanishes\tVBZ\nconverges\tVBZ\n\
are\tVBP\nhave\tVBP\ndo\tVBP\nexist\tVBP\nsatisfy\tVBP\nhold\tVBP\ndenote\tVBP\n\
define\tVBP\nsay\tVBP\nbecome\tVBP\nadmit\tVBP\ncontain\tVBP\nequal\tVBP\n\
mean\tVBP\nimply\tVBP\nconsist\tVBP\nbelong\tVBP\nwrite\tVBP\ncall\tVBP\n\
be\tVB\nlet\tVB\nassume\tVB\nsuppose\tVB\nconsider\tVB\ntake\tVB\nchoose\tVB\n\
fix\tVB\nrecall\tVB\nobserve\tVB\nnote\tVB\nprove\tVB\nshow\tVB\nsee\tVB\n\
was\tVBD\nwere\tVBD\nsaid\tVBD\nhad\tVBD\ndid\tVBD\n\
been\tVBN\ncalled\tVBN\nnamed\tVBN\ntermed\tVBN\ndefined\tVBN\ngiven\tVBN\n\
equipped\tVBN\nendowed\tVBN\ndenoted\tVBN\nwritten\tVBN\nobtained\tVBN\n\
being\tVBG\nfollowing\tVBG\nusing\tVBG\nhaving\tVBG\nsatisfying\tVBG\n\
assuming\tVBG\nconsidering\tVBG\nletting\tVBG\ntaking\tVBG\n\
same\tJJ\nother\tJJ\nnew\tJJ\ncertain\tJJ\nimportant\tJJ\nclassical\tJJ\n\
standard\tJJ\nusual\tJJ\nfinite\tJJ\ninfinite\tJJ\ntrivial\tJJ\nnontrivial\tJJ\n\
compact\tJJ\ncomplete\tJJ\nincomplete\tJJ\nclosed\tJJ\nopen\tJJ\n\
continuous\tJJ\ndiscrete\tJJ\nlinear\tJJ\nnonlinear\tJJ\nconvex\tJJ\n\
smooth\tJJ\ndense\tJJ\nseparable\tJJ\nmeasurable\tJJ\nintegrable\tJJ\n\
countable\tJJ\nuncountable\tJJ\npositive\tJJ\nnegative\tJJ\nnonempty\tJJ\n\
empty\tJJ\nequivalent\tJJ\nwell-defined\tJJ\ninvertible\tJJ\nnondegenerate\tJJ\n\
zero\tCD\ntwo\tCD\nthree\tCD\n";

impl Lexicon {
    /// The bundled default lexicon.
    pub fn builtin() -> Self {
        Self::from_reader(BUILTIN_LEXICON.as_bytes()).expect("builtin lexicon parses")
    }

    /// Parse `word<TAB>tag` lines.
    pub fn from_reader<R: BufRead>(r: R) -> Result<Self, NerError> {
        let mut entries = HashMap::new();
        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (word, tag) = line
                .split_once('\t')
                .ok_or_else(|| NerError::BadLexiconLine {
                    line: lineno + 1,
                    message: "expected word<TAB>tag".into(),
                })?;
            let tag = PennTag::parse(tag.trim()).ok_or_else(|| NerError::BadLexiconLine {
                line: lineno + 1,
                message: format!("unknown tag {:?}", tag.trim()),
            })?;
            entries.insert(word.to_string(), tag);
        }
        Ok(Lexicon { entries })
    }

    pub fn lookup(&self, word: &str) -> Option<PennTag> {
        self.entries
            .get(word)
            .or_else(|| self.entries.get(word.to_lowercase().as_str()))
            .copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// A candidate definiendum span over one sentence; `end` is exclusive.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ChunkSpan {
    pub start: usize,
    pub end: usize,
    pub label: String,
}

impl ChunkSpan {
    pub fn dfndum(start: usize, end: usize) -> Self {
        ChunkSpan {
            start,
            end,
            label: "DFNDUM".to_string(),
        }
    }
}

/// The chunk grammar: modifier tags, head tags, and definitional cues.
///
/// A chunk is a maximal run of modifier-tagged tokens ending at a
/// head-tagged token; determiners are never part of a chunk. Chunks are
/// only emitted from sentences that contain a cue substring or a
/// surviving emphasis marker.
#[derive(Debug, Clone)]
pub struct ChunkGrammar {
    pub modifier_tags: BTreeSet<PennTag>,
    pub head_tags: BTreeSet<PennTag>,
    pub cues: Vec<String>,
    pub markup_markers: Vec<String>,
}

impl Default for ChunkGrammar {
    fn default() -> Self {
        use PennTag::*;
        ChunkGrammar {
            modifier_tags: [JJ, VBN, NN, NNS, NNP].into_iter().collect(),
            head_tags: [NN, NNS, NNP].into_iter().collect(),
            cues: vec![
                "we say".into(),
                "is called".into(),
                "define".into(),
                "if and only if".into(),
            ],
            markup_markers: vec!["\\emph".into(), "\\textbf".into(), "\\textit".into()],
        }
    }
}

/// Split a paragraph into sentences at `.`/`!`/`?` followed by whitespace,
/// with a short abbreviation guard.
pub fn split_sentences(paragraph: &str) -> Vec<String> {
    const ABBREVIATIONS: &[&str] = &[
        "e.g", "i.e", "cf", "etc", "resp", "vs", "fig", "eq", "dr", "prof", "sec",
    ];
    let chars: Vec<char> = paragraph.chars().collect();
    let mut sentences = Vec::new();
    let mut current = String::new();
    let mut i = 0;
    while i < chars.len() {
        let ch = chars[i];
        current.push(ch);
        if matches!(ch, '.' | '!' | '?') {
            let next_is_break = chars.get(i + 1).is_none_or(|c| c.is_whitespace());
            let tail: String = current
                .trim_end_matches(['.', '!', '?'])
                .chars()
                .rev()
                .take_while(|c| c.is_ascii_alphabetic() || *c == '.')
                .collect::<String>()
                .chars()
                .rev()
                .collect();
            let is_abbrev = ABBREVIATIONS
                .iter()
                .any(|a| tail.to_lowercase().trim_start_matches('.') == *a
                    || tail.to_lowercase().ends_with(&format!(".{a}")));
            if next_is_break && !is_abbrev && !current.trim().is_empty() {
                sentences.push(current.trim().to_string());
                current.clear();
            }
        }
        i += 1;
    }
    if !current.trim().is_empty() {
        sentences.push(current.trim().to_string());
    }
    sentences
}

/// Tokenize a sentence into words (hyphens kept inside words), math
/// placeholders, LaTeX command tokens, and single punctuation marks.
pub fn tokenize_sentence(sentence: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let bytes = sentence.as_bytes();
    let mut i = 0;
    let word_end = |start: usize| -> usize {
        let mut j = start;
        while j < bytes.len() && bytes[j].is_ascii_alphanumeric() {
            j += 1;
        }
        // hyphenated continuation
        while j + 1 < bytes.len() && bytes[j] == b'-' && bytes[j + 1].is_ascii_alphanumeric() {
            j += 1;
            while j < bytes.len() && bytes[j].is_ascii_alphanumeric() {
                j += 1;
            }
        }
        j
    };
    while i < bytes.len() {
        let rest = &sentence[i..];
        if rest.starts_with(INLINE_MATH) {
            tokens.push(INLINE_MATH.to_string());
            i += INLINE_MATH.len();
        } else if rest.starts_with(DISPLAY_MATH) {
            tokens.push(DISPLAY_MATH.to_string());
            i += DISPLAY_MATH.len();
        } else if bytes[i] == b'\\' && i + 1 < bytes.len() && bytes[i + 1].is_ascii_alphabetic() {
            let mut j = i + 1;
            while j < bytes.len() && bytes[j].is_ascii_alphabetic() {
                j += 1;
            }
            tokens.push(sentence[i..j].to_string());
            i = j;
        } else if bytes[i].is_ascii_alphanumeric() {
            let j = word_end(i);
            tokens.push(sentence[i..j].to_string());
            i = j;
        } else if bytes[i].is_ascii_whitespace() {
            i += 1;
        } else {
            let ch = rest.chars().next().unwrap();
            tokens.push(ch.to_string());
            i += ch.len_utf8();
        }
    }
    tokens
}

fn is_word(token: &str) -> bool {
    token
        .chars()
        .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
        && token.chars().any(|c| c.is_ascii_alphanumeric())
}

/// Tag a tokenized sentence: lexicon lookup first, then suffix rules,
/// then capitalized-unknown-mid-sentence, then the NN default.
pub fn pos_tag(tokens: &[String], lexicon: &Lexicon) -> Vec<TaggedToken> {
    let n = tokens.len();
    tokens
        .iter()
        .enumerate()
        .map(|(i, token)| {
            let is_capitalized = token.chars().next().is_some_and(|c| c.is_ascii_uppercase());
            let pos = tag_one(token, i, lexicon);
            TaggedToken {
                surface: token.clone(),
                pos,
                is_capitalized,
                is_sentence_final_period: token == "." && i == n - 1,
            }
        })
        .collect()
}

fn tag_one(token: &str, index: usize, lexicon: &Lexicon) -> PennTag {
    if token == INLINE_MATH || token == DISPLAY_MATH {
        return PennTag::NN;
    }
    if let Some(tag) = lexicon.lookup(token) {
        return tag;
    }
    if !is_word(token) || token.starts_with('\\') {
        return PennTag::Punct;
    }
    if token.chars().all(|c| c.is_ascii_digit()) {
        return PennTag::CD;
    }
    let lower = token.to_lowercase();
    for (suffix, tag) in [
        ("tion", PennTag::NN),
        ("ity", PennTag::NN),
        ("ness", PennTag::NN),
        ("ous", PennTag::JJ),
        ("ic", PennTag::JJ),
        ("ian", PennTag::JJ),
        ("ly", PennTag::RB),
        ("ed", PennTag::VBN),
        ("ize", PennTag::VB),
    ] {
        if lower.len() > suffix.len() && lower.ends_with(suffix) {
            return tag;
        }
    }
    if index > 0 && token.chars().next().is_some_and(|c| c.is_ascii_uppercase()) {
        return PennTag::NNP;
    }
    PennTag::NN
}

/// True when the sentence carries a definitional cue or markup marker.
pub fn has_definitional_cue(tagged: &[TaggedToken], grammar: &ChunkGrammar) -> bool {
    let joined = tagged
        .iter()
        .map(|t| t.surface.to_lowercase())
        .collect::<Vec<_>>()
        .join(" ");
    grammar.cues.iter().any(|cue| joined.contains(cue.as_str()))
        || tagged.iter().any(|t| {
            grammar
                .markup_markers
                .iter()
                .any(|m| t.surface.eq_ignore_ascii_case(m))
        })
}

/// Longest leftmost non-overlapping grammar matches over a tagged
/// sentence. Sentences without a definitional cue yield no chunks.
pub fn chunk_definienda(tagged: &[TaggedToken], grammar: &ChunkGrammar) -> Vec<ChunkSpan> {
    if !has_definitional_cue(tagged, grammar) {
        return Vec::new();
    }
    chunk_spans_unfiltered(tagged, grammar)
}

/// Grammar matching without the cue filter (useful for diagnostics).
pub fn chunk_spans_unfiltered(tagged: &[TaggedToken], grammar: &ChunkGrammar) -> Vec<ChunkSpan> {
    let mut spans = Vec::new();
    let mut i = 0;
    while i < tagged.len() {
        if !grammar.modifier_tags.contains(&tagged[i].pos) {
            i += 1;
            continue;
        }
        let mut run_end = i;
        while run_end < tagged.len() && grammar.modifier_tags.contains(&tagged[run_end].pos) {
            run_end += 1;
        }
        // shrink to the last head-tagged token in the run
        let mut head = None;
        for k in (i..run_end).rev() {
            if grammar.head_tags.contains(&tagged[k].pos) {
                head = Some(k);
                break;
            }
        }
        if let Some(k) = head {
            spans.push(ChunkSpan::dfndum(i, k + 1));
        }
        i = run_end;
    }
    spans
}

/// The surface text of a span, lowercased and space-normalized.
pub fn span_text(tagged: &[TaggedToken], span: &ChunkSpan) -> String {
    tagged[span.start..span.end]
        .iter()
        .map(|t| t.surface.to_lowercase())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Tokenized sentence with its guessed chunk spans.
#[derive(Debug, Clone)]
pub struct SentenceChunks {
    pub tagged: Vec<TaggedToken>,
    pub spans: Vec<ChunkSpan>,
}

/// Tag and chunk every sentence of a paragraph.
pub fn chunk_paragraph(
    paragraph: &str,
    lexicon: &Lexicon,
    grammar: &ChunkGrammar,
) -> Vec<SentenceChunks> {
    split_sentences(paragraph)
        .iter()
        .map(|sentence| {
            let tokens = tokenize_sentence(sentence);
            let tagged = pos_tag(&tokens, lexicon);
            let spans = chunk_definienda(&tagged, grammar);
            SentenceChunks { tagged, spans }
        })
        .collect()
}

/// Extract definiendum strings from a definition paragraph, lowercased
/// and space-normalized, in sentence order with duplicates removed.
pub fn extract_definienda(
    paragraph: &str,
    lexicon: &Lexicon,
    grammar: &ChunkGrammar,
) -> Vec<String> {
    let mut seen = BTreeSet::new();
    let mut terms = Vec::new();
    for sentence in chunk_paragraph(paragraph, lexicon, grammar) {
        for span in &sentence.spans {
            let text = span_text(&sentence.tagged, span);
            if seen.insert(text.clone()) {
                terms.push(text);
            }
        }
    }
    terms
}

/// Exact-span precision/recall/F1 plus raw counts.
#[derive(Debug, Clone, PartialEq)]
pub struct ChunkScoreReport {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub guessed: usize,
    pub gold: usize,
    pub correct: usize,
}

/// Exact-match chunk scoring: a guessed span is correct iff an identical
/// `(start, end, label)` span exists in the same gold sentence.
pub fn chunk_score(
    gold: &[Vec<ChunkSpan>],
    guessed: &[Vec<ChunkSpan>],
) -> Result<ChunkScoreReport, NerError> {
    if gold.len() != guessed.len() {
        return Err(NerError::SentenceCountMismatch(gold.len(), guessed.len()));
    }
    let mut n_gold = 0;
    let mut n_guessed = 0;
    let mut correct = 0;
    for (g, h) in gold.iter().zip(guessed) {
        let gold_set: BTreeSet<&ChunkSpan> = g.iter().collect();
        let guess_set: BTreeSet<&ChunkSpan> = h.iter().collect();
        n_gold += gold_set.len();
        n_guessed += guess_set.len();
        correct += gold_set.intersection(&guess_set).count();
    }
    let precision = if n_guessed > 0 {
        correct as f64 / n_guessed as f64
    } else {
        0.0
    };
    let recall = if n_gold > 0 {
        correct as f64 / n_gold as f64
    } else {
        0.0
    };
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    Ok(ChunkScoreReport {
        precision,
        recall,
        f1,
        guessed: n_guessed,
        gold: n_gold,
        correct,
    })
}

/// One gold sentence: tokens with tags and the derived chunk spans.
#[derive(Debug, Clone, PartialEq)]
pub struct IobSentence {
    pub tokens: Vec<String>,
    pub tags: Vec<PennTag>,
    pub spans: Vec<ChunkSpan>,
}

/// Parse IOB2 gold annotations: `token<TAB>tag<TAB>{B-DFNDUM|I-DFNDUM|O}`
/// lines, blank line between sentences.
pub fn read_iob<R: BufRead>(r: R) -> Result<Vec<IobSentence>, NerError> {
    let mut sentences = Vec::new();
    let mut tokens: Vec<String> = Vec::new();
    let mut tags: Vec<PennTag> = Vec::new();
    let mut iob: Vec<String> = Vec::new();

    let mut flush = |tokens: &mut Vec<String>, tags: &mut Vec<PennTag>, iob: &mut Vec<String>| {
        if tokens.is_empty() {
            return;
        }
        let spans = iob_to_spans(iob);
        sentences.push(IobSentence {
            tokens: std::mem::take(tokens),
            tags: std::mem::take(tags),
            spans,
        });
        iob.clear();
    };

    for (lineno, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            flush(&mut tokens, &mut tags, &mut iob);
            continue;
        }
        let parts: Vec<&str> = line.split('\t').collect();
        if parts.len() != 3 {
            return Err(NerError::BadIobLine {
                line: lineno + 1,
                message: format!("expected 3 tab-separated fields, got {}", parts.len()),
            });
        }
        let tag = PennTag::parse(parts[1]).ok_or_else(|| NerError::BadIobLine {
            line: lineno + 1,
            message: format!("unknown tag {:?}", parts[1]),
        })?;
        if !matches!(parts[2], "B-DFNDUM" | "I-DFNDUM" | "O") {
            return Err(NerError::BadIobLine {
                line: lineno + 1,
                message: format!("unknown IOB label {:?}", parts[2]),
            });
        }
        tokens.push(parts[0].to_string());
        tags.push(tag);
        iob.push(parts[2].to_string());
    }
    flush(&mut tokens, &mut tags, &mut iob);
    Ok(sentences)
}

fn iob_to_spans(iob: &[String]) -> Vec<ChunkSpan> {
    let mut spans = Vec::new();
    let mut start: Option<usize> = None;
    for (i, label) in iob.iter().enumerate() {
        match label.as_str() {
            "B-DFNDUM" => {
                if let Some(s) = start.take() {
                    spans.push(ChunkSpan::dfndum(s, i));
                }
                start = Some(i);
            }
            "I-DFNDUM" => {
                if start.is_none() {
                    start = Some(i); // tolerate I without B
                }
            }
            _ => {
                if let Some(s) = start.take() {
                    spans.push(ChunkSpan::dfndum(s, i));
                }
            }
        }
    }
    if let Some(s) = start {
        spans.push(ChunkSpan::dfndum(s, iob.len()));
    }
    spans
}

/// Write gold sentences in the IOB2 format read by [`read_iob`].
pub fn write_iob<W: Write>(mut w: W, sentences: &[IobSentence]) -> io::Result<()> {
    for (si, sentence) in sentences.iter().enumerate() {
        if si > 0 {
            writeln!(w)?;
        }
        let mut labels = vec!["O"; sentence.tokens.len()];
        for span in &sentence.spans {
            labels[span.start] = "B-DFNDUM";
            for slot in labels.iter_mut().take(span.end).skip(span.start + 1) {
                *slot = "I-DFNDUM";
            }
        }
        for ((token, tag), label) in sentence.tokens.iter().zip(&sentence.tags).zip(&labels) {
            writeln!(w, "{token}\t{}\t{label}", tag.as_str())?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tag(sentence: &str) -> Vec<TaggedToken> {
        pos_tag(&tokenize_sentence(sentence), &Lexicon::builtin())
    }

    #[test]
    fn placeholder_is_nn() {
        let tagged = tag("_inline_math_");
        assert_eq!(tagged[0].pos, PennTag::NN);
    }

    #[test]
    fn suffix_rules_apply_to_unknown_words() {
        let tagged = tag("ambiguous frobnication freely crystallized");
        assert_eq!(tagged[0].pos, PennTag::JJ); // -ous
        assert_eq!(tagged[1].pos, PennTag::NN); // -tion
        assert_eq!(tagged[2].pos, PennTag::RB); // -ly
        assert_eq!(tagged[3].pos, PennTag::VBN); // -ed
    }

    #[test]
    fn lexicon_overrides_suffix_rule() {
        let tagged = tag("he said so");
        assert_eq!(tagged[1].pos, PennTag::VBD);
    }

    #[test]
    fn capitalized_unknown_mid_sentence_is_nnp() {
        let tagged = tag("the Grothendieck construction");
        assert_eq!(tagged[1].pos, PennTag::NNP);
        // sentence-initial capitalized unknown falls through to default
        let tagged = tag("Grothendieck was here");
        assert_eq!(tagged[0].pos, PennTag::NN);
    }

    #[test]
    fn sentence_final_period_flag() {
        let tagged = tag("we define the norm .");
        let last = tagged.last().unwrap();
        assert!(last.is_sentence_final_period);
        assert_eq!(last.pos, PennTag::Punct);
    }

    #[test]
    fn chunk_space_time_norm() {
        let tagged = tag("we define the following space-time norm");
        let spans = chunk_definienda(&tagged, &ChunkGrammar::default());
        assert_eq!(spans.len(), 1);
        assert_eq!(span_text(&tagged, &spans[0]), "space-time norm");
    }

    #[test]
    fn chunk_excludes_determiner() {
        let tagged = tag("a compact hausdorff space is called nice if it exists");
        let spans = chunk_definienda(&tagged, &ChunkGrammar::default());
        assert!(!spans.is_empty());
        assert_eq!(span_text(&tagged, &spans[0]), "compact hausdorff space");
    }

    #[test]
    fn sentence_without_noun_has_no_chunks() {
        let tagged = tag("we define and satisfy");
        let spans = chunk_definienda(&tagged, &ChunkGrammar::default());
        assert!(spans.is_empty());
    }

    #[test]
    fn sentence_without_cue_is_skipped() {
        let tagged = tag("the banach space appears in every proof");
        assert!(chunk_definienda(&tagged, &ChunkGrammar::default()).is_empty());
        assert!(!chunk_spans_unfiltered(&tagged, &ChunkGrammar::default()).is_empty());
    }

    #[test]
    fn chunks_are_sorted_and_disjoint() {
        let tagged = tag("we say a metric space embeds into a normed space");
        let spans = chunk_definienda(&tagged, &ChunkGrammar::default());
        assert!(spans.len() >= 2);
        for pair in spans.windows(2) {
            assert!(pair[0].end <= pair[1].start);
        }
    }

    #[test]
    fn markup_marker_counts_as_cue() {
        let tagged = tag("a \\emph { banach space } is complete");
        let spans = chunk_definienda(&tagged, &ChunkGrammar::default());
        assert_eq!(spans.len(), 1);
        assert_eq!(span_text(&tagged, &spans[0]), "banach space");
    }

    #[test]
    fn split_sentences_handles_abbreviations() {
        let sentences = split_sentences("This holds, e.g. for groups. Next sentence here.");
        assert_eq!(sentences.len(), 2, "{sentences:?}");
    }

    #[test]
    fn chunk_score_perfect() {
        let gold = vec![vec![ChunkSpan::dfndum(2, 4)], vec![]];
        let report = chunk_score(&gold, &gold).unwrap();
        assert_eq!(
            (report.precision, report.recall, report.f1),
            (1.0, 1.0, 1.0)
        );
    }

    #[test]
    fn chunk_score_partial() {
        let gold = vec![vec![ChunkSpan::dfndum(0, 2), ChunkSpan::dfndum(4, 5)]];
        let guessed = vec![vec![ChunkSpan::dfndum(0, 2)]];
        let report = chunk_score(&gold, &guessed).unwrap();
        assert!((report.precision - 1.0).abs() < 1e-12);
        assert!((report.recall - 0.5).abs() < 1e-12);
        assert!((report.f1 - 2.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn chunk_score_sentence_count_mismatch() {
        let gold = vec![vec![]];
        let guessed: Vec<Vec<ChunkSpan>> = vec![];
        assert!(matches!(
            chunk_score(&gold, &guessed),
            Err(NerError::SentenceCountMismatch(1, 0))
        ));
    }

    #[test]
    fn iob_round_trip() {
        let text = "we\tPRP\tO\ndefine\tVBP\tO\nbanach\tNN\tB-DFNDUM\nspace\tNN\tI-DFNDUM\n.\tPUNCT\tO\n\nnext\tJJ\tO\nsentence\tNN\tO\n";
        let sentences = read_iob(text.as_bytes()).unwrap();
        assert_eq!(sentences.len(), 2);
        assert_eq!(sentences[0].spans, vec![ChunkSpan::dfndum(2, 4)]);
        let mut buf = Vec::new();
        write_iob(&mut buf, &sentences).unwrap();
        let back = read_iob(&buf[..]).unwrap();
        assert_eq!(back, sentences);
    }

    #[test]
    fn extract_definienda_normalizes() {
        let terms = extract_definienda(
            "We define the Banach space as follows. It is complete.",
            &Lexicon::builtin(),
            &ChunkGrammar::default(),
        );
        assert_eq!(terms, vec!["banach space".to_string()]);
    }
}
