//! Euclidean word embeddings: text normalization, phrase joining,
//! co-occurrence counting, and GloVe training with AdaGrad.
//!
//! The objective is `J = sum f(X_ij) (w_i.wc_j + b_i + bc_j - ln X_ij)^2`
//! with `f(x) = min(1, (x/x_max)^alpha)`. Exported vectors are the sum of
//! the main and context vectors.

use std::collections::{BTreeMap, HashMap};
use std::io::{self, BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("phrase {0:?} must have at least two words and no '_' characters")]
    BadPhrase(String),
    #[error("vocabulary is empty after applying min_count")]
    EmptyVocabulary,
    #[error("co-occurrence matrix has no entries")]
    EmptyMatrix,
    #[error("non-finite loss at entry ({i}, {j}) with weight {weight}")]
    NonFiniteLoss { i: u32, j: u32, weight: f64 },
    #[error("token {token:?} not in vocabulary; closest spellings: {suggestions:?}")]
    OutOfVocabulary {
        token: String,
        suggestions: Vec<String>,
    },
    #[error("vector file: {0}")]
    BadVectorFile(String),
    #[error("co-occurrence cache: {0}")]
    BadCache(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Lowercase and strip punctuation/special characters, keeping word
/// characters, hyphens, and underscores (math placeholders survive).
pub fn normalize_for_embedding(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for ch in text.chars() {
        if ch.is_ascii_alphanumeric() || ch == '_' || ch == '-' {
            out.push(ch.to_ascii_lowercase());
        } else {
            out.push(' ');
        }
    }
    out.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Multiword phrases to be joined into single tokens.
#[derive(Debug, Clone, Default)]
pub struct PhraseLexicon {
    phrases: std::collections::BTreeSet<String>,
    max_len: usize,
}

impl PhraseLexicon {
    /// Build from candidate terms; single-word terms are ignored, and a
    /// term containing the join character is rejected.
    pub fn from_terms<I, S>(terms: I) -> Result<Self, EmbeddingError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut lex = PhraseLexicon::default();
        for term in terms {
            let phrase = term.as_ref().trim().to_lowercase();
            let words: Vec<&str> = phrase.split_whitespace().collect();
            if words.len() < 2 {
                continue;
            }
            if phrase.contains('_') {
                return Err(EmbeddingError::BadPhrase(phrase));
            }
            lex.max_len = lex.max_len.max(words.len());
            lex.phrases.insert(words.join(" "));
        }
        Ok(lex)
    }

    pub fn contains(&self, phrase: &str) -> bool {
        self.phrases.contains(phrase)
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    pub fn len(&self) -> usize {
        self.phrases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phrases.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &String> {
        self.phrases.iter()
    }

    /// The single-token form of a term: phrase words joined by `_`.
    pub fn token_of(term: &str) -> String {
        term.trim().to_lowercase().split_whitespace().collect::<Vec<_>>().join("_")
    }
}

/// Replace phrase occurrences by underscore-joined tokens, greedy
/// longest-match left to right. Idempotent.
pub fn phrase_join(text: &str, lex: &PhraseLexicon) -> String {
    let tokens: Vec<&str> = text.split_whitespace().collect();
    let mut out: Vec<String> = Vec::with_capacity(tokens.len());
    let mut i = 0;
    while i < tokens.len() {
        let mut matched = 0;
        if lex.max_len() >= 2 {
            let upper = lex.max_len().min(tokens.len() - i);
            for len in (2..=upper).rev() {
                let candidate = tokens[i..i + len].join(" ");
                if lex.contains(&candidate) {
                    matched = len;
                    break;
                }
            }
        }
        if matched > 0 {
            out.push(tokens[i..i + matched].join("_"));
            i += matched;
        } else {
            out.push(tokens[i].to_string());
            i += 1;
        }
    }
    out.join(" ")
}

/// Symmetric windowed co-occurrence counts with 1/offset weighting.
#[derive(Debug, Clone, PartialEq)]
pub struct CooccurrenceMatrix {
    /// id -> token, ordered by descending count then token.
    pub vocab: Vec<String>,
    pub x: BTreeMap<(u32, u32), f64>,
    pub window: usize,
    pub min_count: u64,
}

impl CooccurrenceMatrix {
    pub fn id_of(&self, token: &str) -> Option<u32> {
        self.vocab.iter().position(|t| t == token).map(|i| i as u32)
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab.len()
    }

    pub fn nnz(&self) -> usize {
        self.x.len()
    }
}

/// Count co-occurrences over documents (windows do not cross document
/// boundaries). Tokens below `min_count` are dropped before counting.
pub fn count_cooccurrences(
    docs: &[Vec<String>],
    window: usize,
    min_count: u64,
) -> Result<CooccurrenceMatrix, EmbeddingError> {
    let mut counts: BTreeMap<&str, u64> = BTreeMap::new();
    for doc in docs {
        for token in doc {
            *counts.entry(token.as_str()).or_default() += 1;
        }
    }
    let mut kept: Vec<(&str, u64)> = counts
        .into_iter()
        .filter(|&(_, c)| c >= min_count)
        .collect();
    kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    if kept.is_empty() {
        return Err(EmbeddingError::EmptyVocabulary);
    }
    let vocab: Vec<String> = kept.iter().map(|&(t, _)| t.to_string()).collect();
    let ids: HashMap<&str, u32> = kept
        .iter()
        .enumerate()
        .map(|(i, &(t, _))| (t, i as u32))
        .collect();

    let mut x: BTreeMap<(u32, u32), f64> = BTreeMap::new();
    for doc in docs {
        let filtered: Vec<u32> = doc
            .iter()
            .filter_map(|t| ids.get(t.as_str()).copied())
            .collect();
        for (pos, &i) in filtered.iter().enumerate() {
            for offset in 1..=window {
                let Some(&j) = filtered.get(pos + offset) else {
                    break;
                };
                let weight = 1.0 / offset as f64;
                *x.entry((i, j)).or_default() += weight;
                *x.entry((j, i)).or_default() += weight;
            }
        }
    }
    Ok(CooccurrenceMatrix {
        vocab,
        x,
        window,
        min_count,
    })
}

/// GloVe hyperparameters.
#[derive(Debug, Clone)]
pub struct GloveHyper {
    pub dim: usize,
    pub x_max: f64,
    pub alpha: f64,
    pub eta: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for GloveHyper {
    fn default() -> Self {
        GloveHyper {
            dim: 50,
            x_max: 100.0,
            alpha: 0.75,
            eta: 0.05,
            epochs: 25,
            seed: 0,
        }
    }
}

/// Trained GloVe parameters; vectors are stored row-major `|V| x dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct GloveModel {
    pub vocab: Vec<String>,
    pub dim: usize,
    pub w: Vec<f64>,
    pub w_ctx: Vec<f64>,
    pub b: Vec<f64>,
    pub b_ctx: Vec<f64>,
}

/// Full-batch gradient of the GloVe objective, same shapes as the model.
#[derive(Debug, Clone)]
pub struct GloveGradient {
    pub w: Vec<f64>,
    pub w_ctx: Vec<f64>,
    pub b: Vec<f64>,
    pub b_ctx: Vec<f64>,
}

impl GloveModel {
    fn random_init(vocab: Vec<String>, dim: usize, rng: &mut ChaCha8Rng) -> Self {
        let n = vocab.len();
        let scale = 0.5 / (dim as f64 + 1.0);
        let mut draw = |len: usize| -> Vec<f64> {
            (0..len).map(|_| rng.gen_range(-scale..scale)).collect()
        };
        GloveModel {
            w: draw(n * dim),
            w_ctx: draw(n * dim),
            b: draw(n),
            b_ctx: draw(n),
            vocab,
            dim,
        }
    }

    pub fn id_of(&self, token: &str) -> Option<usize> {
        self.vocab.iter().position(|t| t == token)
    }

    fn row(flat: &[f64], i: usize, dim: usize) -> &[f64] {
        &flat[i * dim..(i + 1) * dim]
    }

    fn entry_residual(&self, i: usize, j: usize, weight: f64) -> f64 {
        let wi = Self::row(&self.w, i, self.dim);
        let cj = Self::row(&self.w_ctx, j, self.dim);
        let dot: f64 = wi.iter().zip(cj).map(|(a, b)| a * b).sum();
        dot + self.b[i] + self.b_ctx[j] - weight.ln()
    }

    /// The objective `J` over all nonzero entries.
    pub fn loss(&self, x: &CooccurrenceMatrix, hyper: &GloveHyper) -> f64 {
        x.x.iter()
            .map(|(&(i, j), &weight)| {
                let f = weighting(weight, hyper);
                let diff = self.entry_residual(i as usize, j as usize, weight);
                f * diff * diff
            })
            .sum()
    }

    /// Analytic full-batch gradient of `J`.
    pub fn gradient(&self, x: &CooccurrenceMatrix, hyper: &GloveHyper) -> GloveGradient {
        let mut grad = GloveGradient {
            w: vec![0.0; self.w.len()],
            w_ctx: vec![0.0; self.w_ctx.len()],
            b: vec![0.0; self.b.len()],
            b_ctx: vec![0.0; self.b_ctx.len()],
        };
        for (&(i, j), &weight) in &x.x {
            let (i, j) = (i as usize, j as usize);
            let f = weighting(weight, hyper);
            let diff = self.entry_residual(i, j, weight);
            let coeff = 2.0 * f * diff;
            for d in 0..self.dim {
                grad.w[i * self.dim + d] += coeff * self.w_ctx[j * self.dim + d];
                grad.w_ctx[j * self.dim + d] += coeff * self.w[i * self.dim + d];
            }
            grad.b[i] += coeff;
            grad.b_ctx[j] += coeff;
        }
        grad
    }

    /// Exported per-token vectors: `w + w_ctx`.
    pub fn vector_set(&self) -> VectorSet {
        let vectors: Vec<f64> = self
            .w
            .iter()
            .zip(&self.w_ctx)
            .map(|(a, b)| a + b)
            .collect();
        VectorSet::new(self.vocab.clone(), self.dim, vectors)
    }
}

fn weighting(x: f64, hyper: &GloveHyper) -> f64 {
    if x < hyper.x_max {
        (x / hyper.x_max).powf(hyper.alpha)
    } else {
        1.0
    }
}

/// Train GloVe with AdaGrad over shuffled nonzero entries.
///
/// Deterministic for a fixed seed; returns the model and per-epoch loss
/// (measured at the parameters current when each entry is visited).
pub fn train_glove(
    x: &CooccurrenceMatrix,
    hyper: &GloveHyper,
) -> Result<(GloveModel, Vec<f64>), EmbeddingError> {
    if x.x.is_empty() {
        return Err(EmbeddingError::EmptyMatrix);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(hyper.seed);
    let mut model = GloveModel::random_init(x.vocab.clone(), hyper.dim, &mut rng);
    let n = model.vocab.len();
    let dim = hyper.dim;
    let mut gsq_w = vec![1.0f64; n * dim];
    let mut gsq_ctx = vec![1.0f64; n * dim];
    let mut gsq_b = vec![1.0f64; n];
    let mut gsq_bctx = vec![1.0f64; n];

    let mut entries: Vec<(u32, u32, f64)> =
        x.x.iter().map(|(&(i, j), &w)| (i, j, w)).collect();
    let mut losses = Vec::with_capacity(hyper.epochs);

    for _epoch in 0..hyper.epochs {
        for i in (1..entries.len()).rev() {
            let j = rng.gen_range(0..=i);
            entries.swap(i, j);
        }
        let mut epoch_loss = 0.0;
        for &(i, j, weight) in &entries {
            let (i, j) = (i as usize, j as usize);
            let f = weighting(weight, hyper);
            let diff = model.entry_residual(i, j, weight);
            if !diff.is_finite() {
                return Err(EmbeddingError::NonFiniteLoss {
                    i: i as u32,
                    j: j as u32,
                    weight,
                });
            }
            epoch_loss += f * diff * diff;
            let coeff = 2.0 * f * diff;
            for d in 0..dim {
                let gi = coeff * model.w_ctx[j * dim + d];
                let gj = coeff * model.w[i * dim + d];
                let iw = i * dim + d;
                let jw = j * dim + d;
                model.w[iw] -= hyper.eta * gi / gsq_w[iw].sqrt();
                model.w_ctx[jw] -= hyper.eta * gj / gsq_ctx[jw].sqrt();
                gsq_w[iw] += gi * gi;
                gsq_ctx[jw] += gj * gj;
            }
            model.b[i] -= hyper.eta * coeff / gsq_b[i].sqrt();
            model.b_ctx[j] -= hyper.eta * coeff / gsq_bctx[j].sqrt();
            gsq_b[i] += coeff * coeff;
            gsq_bctx[j] += coeff * coeff;
        }
        losses.push(epoch_loss);
    }
    Ok((model, losses))
}

/// A set of exported token vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorSet {
    pub vocab: Vec<String>,
    pub dim: usize,
    vectors: Vec<f64>,
    ids: HashMap<String, usize>,
}

impl VectorSet {
    pub fn new(vocab: Vec<String>, dim: usize, vectors: Vec<f64>) -> Self {
        assert_eq!(vocab.len() * dim, vectors.len());
        let ids = vocab
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        VectorSet {
            vocab,
            dim,
            vectors,
            ids,
        }
    }

    pub fn get(&self, token: &str) -> Option<&[f64]> {
        self.ids
            .get(token)
            .map(|&i| &self.vectors[i * self.dim..(i + 1) * self.dim])
    }

    pub fn contains(&self, token: &str) -> bool {
        self.ids.contains_key(token)
    }

    /// Top-k cosine neighbors of `token`, excluding the token itself,
    /// descending similarity with ties broken by token.
    pub fn nearest_neighbors(
        &self,
        token: &str,
        k: usize,
    ) -> Result<Vec<(String, f64)>, EmbeddingError> {
        let Some(query) = self.get(token) else {
            return Err(oov_error(token, &self.vocab));
        };
        let mut scored: Vec<(String, f64)> = self
            .vocab
            .iter()
            .filter(|t| t.as_str() != token)
            .map(|t| (t.clone(), cosine(query, self.get(t).unwrap())))
            .collect();
        scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
        scored.truncate(k);
        Ok(scored)
    }
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

/// Levenshtein distance, used only for out-of-vocabulary suggestions.
pub fn edit_distance(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut current = vec![0usize; b.len() + 1];
    for (i, &ca) in a.iter().enumerate() {
        current[0] = i + 1;
        for (j, &cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            current[j + 1] = sub.min(prev[j + 1] + 1).min(current[j] + 1);
        }
        std::mem::swap(&mut prev, &mut current);
    }
    prev[b.len()]
}

pub(crate) fn oov_error(token: &str, vocab: &[String]) -> EmbeddingError {
    let mut scored: Vec<(usize, &String)> = vocab
        .iter()
        .map(|t| (edit_distance(token, t), t))
        .collect();
    scored.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(b.1)));
    EmbeddingError::OutOfVocabulary {
        token: token.to_string(),
        suggestions: scored.into_iter().take(3).map(|(_, t)| t.clone()).collect(),
    }
}

/// Write vectors: first line `<vocab_size> <dim>`, then one line per token
/// with 6-decimal fixed components.
pub fn write_vectors<W: Write>(mut w: W, set: &VectorSet) -> io::Result<()> {
    writeln!(w, "{} {}", set.vocab.len(), set.dim)?;
    for (i, token) in set.vocab.iter().enumerate() {
        write!(w, "{token}")?;
        for d in 0..set.dim {
            write!(w, " {:.6}", set.vectors[i * set.dim + d])?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Parse a vector file written by [`write_vectors`].
pub fn read_vectors<R: BufRead>(r: R) -> Result<VectorSet, EmbeddingError> {
    let bad = |msg: String| EmbeddingError::BadVectorFile(msg);
    let mut lines = r.lines();
    let header = lines.next().ok_or_else(|| bad("empty file".into()))??;
    let (n, dim) = header
        .split_once(' ')
        .and_then(|(a, b)| Some((a.parse::<usize>().ok()?, b.parse::<usize>().ok()?)))
        .ok_or_else(|| bad(format!("bad header {header:?}")))?;
    let mut vocab = Vec::with_capacity(n);
    let mut vectors = Vec::with_capacity(n * dim);
    for line in lines {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split(' ');
        let token = parts.next().ok_or_else(|| bad("empty line".into()))?;
        vocab.push(token.to_string());
        let mut count = 0;
        for part in parts {
            let v: f64 = part
                .parse()
                .map_err(|_| bad(format!("bad component {part:?} for {token}")))?;
            vectors.push(v);
            count += 1;
        }
        if count != dim {
            return Err(bad(format!("{token}: expected {dim} components, got {count}")));
        }
    }
    if vocab.len() != n {
        return Err(bad(format!("expected {n} tokens, got {}", vocab.len())));
    }
    Ok(VectorSet::new(vocab, dim, vectors))
}

const COOC_MAGIC: &str = "ARGOT-COOC1";

/// Write the co-occurrence cache: text header and vocab, then binary
/// little-endian `(u32 i, u32 j, f64 weight)` triples.
pub fn write_cooccurrences<W: Write>(mut w: W, x: &CooccurrenceMatrix) -> io::Result<()> {
    writeln!(w, "{COOC_MAGIC}")?;
    writeln!(w, "window={}", x.window)?;
    writeln!(w, "min_count={}", x.min_count)?;
    writeln!(w, "vocab={}", x.vocab.len())?;
    for token in &x.vocab {
        writeln!(w, "{token}")?;
    }
    writeln!(w, "triples={}", x.nnz())?;
    for (&(i, j), &weight) in &x.x {
        w.write_all(&i.to_le_bytes())?;
        w.write_all(&j.to_le_bytes())?;
        w.write_all(&weight.to_le_bytes())?;
    }
    Ok(())
}

/// Read a cache written by [`write_cooccurrences`].
pub fn read_cooccurrences<R: BufRead>(mut r: R) -> Result<CooccurrenceMatrix, EmbeddingError> {
    let bad = |msg: String| EmbeddingError::BadCache(msg);
    let mut line = String::new();
    let read_line = |r: &mut R, line: &mut String| -> Result<String, EmbeddingError> {
        line.clear();
        r.read_line(line)?;
        Ok(line.trim_end_matches('\n').to_string())
    };
    let magic = read_line(&mut r, &mut line)?;
    if magic != COOC_MAGIC {
        return Err(bad(format!("bad magic {magic:?}")));
    }
    let parse_field = |line: String, name: &str| -> Result<u64, EmbeddingError> {
        line.strip_prefix(&format!("{name}="))
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| bad(format!("expected {name}=..., got {line:?}")))
    };
    let window = parse_field(read_line(&mut r, &mut line)?, "window")? as usize;
    let min_count = parse_field(read_line(&mut r, &mut line)?, "min_count")?;
    let vocab_size = parse_field(read_line(&mut r, &mut line)?, "vocab")? as usize;
    let mut vocab = Vec::with_capacity(vocab_size);
    for _ in 0..vocab_size {
        vocab.push(read_line(&mut r, &mut line)?);
    }
    let triples = parse_field(read_line(&mut r, &mut line)?, "triples")? as usize;
    let mut x = BTreeMap::new();
    let mut buf = [0u8; 16];
    for _ in 0..triples {
        r.read_exact(&mut buf)?;
        let i = u32::from_le_bytes(buf[0..4].try_into().unwrap());
        let j = u32::from_le_bytes(buf[4..8].try_into().unwrap());
        let weight = f64::from_le_bytes(buf[8..16].try_into().unwrap());
        x.insert((i, j), weight);
    }
    Ok(CooccurrenceMatrix {
        vocab,
        x,
        window,
        min_count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lexicon(phrases: &[&str]) -> PhraseLexicon {
        PhraseLexicon::from_terms(phrases.iter().copied()).unwrap()
    }

    #[test]
    fn normalize_strips_punctuation_and_case() {
        assert_eq!(
            normalize_for_embedding("A Banach space, (really)! With _inline_math_."),
            "a banach space really with _inline_math_"
        );
    }

    #[test]
    fn phrase_join_basic() {
        let lex = lexicon(&["banach space"]);
        assert_eq!(phrase_join("a banach space is", &lex), "a banach_space is");
    }

    #[test]
    fn phrase_join_no_phrases_unchanged() {
        let lex = lexicon(&["banach space"]);
        assert_eq!(phrase_join("nothing to see here", &lex), "nothing to see here");
    }

    #[test]
    fn phrase_join_longest_match_from_left() {
        let lex = lexicon(&["closed sub", "sub space"]);
        assert_eq!(
            phrase_join("closed sub space", &lex),
            "closed_sub space"
        );
    }

    #[test]
    fn phrase_join_prefers_longer_phrase() {
        let lex = lexicon(&["metric space", "complete metric space"]);
        assert_eq!(
            phrase_join("a complete metric space here", &lex),
            "a complete_metric_space here"
        );
    }

    #[test]
    fn phrase_join_is_idempotent_and_length_monotone() {
        let lex = lexicon(&["banach space", "lie algebra", "closed sub", "sub space"]);
        let cases = [
            "a banach space and a lie algebra",
            "closed sub space of a banach space",
            "no phrases at all",
        ];
        for case in cases {
            let once = phrase_join(case, &lex);
            assert_eq!(phrase_join(&once, &lex), once);
            assert!(once.split_whitespace().count() <= case.split_whitespace().count());
        }
    }

    #[test]
    fn phrase_with_underscore_is_rejected() {
        assert!(matches!(
            PhraseLexicon::from_terms(["bad_phrase here"]),
            Err(EmbeddingError::BadPhrase(_))
        ));
    }

    fn docs(texts: &[&str]) -> Vec<Vec<String>> {
        texts
            .iter()
            .map(|t| t.split_whitespace().map(str::to_string).collect())
            .collect()
    }

    #[test]
    fn cooccurrence_adjacent_pair() {
        let x = count_cooccurrences(&docs(&["a b"]), 2, 1).unwrap();
        let ia = x.id_of("a").unwrap();
        let ib = x.id_of("b").unwrap();
        assert_eq!(x.x[&(ia, ib)], 1.0);
        assert_eq!(x.x[&(ib, ia)], 1.0);
    }

    #[test]
    fn cooccurrence_distance_weighting() {
        let x = count_cooccurrences(&docs(&["a b c"]), 2, 1).unwrap();
        let ia = x.id_of("a").unwrap();
        let ic = x.id_of("c").unwrap();
        assert_eq!(x.x[&(ia, ic)], 0.5);
    }

    #[test]
    fn cooccurrence_matches_independent_recount() {
        // oracle: direct pair enumeration over token strings
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let vocab = ["a", "b", "c", "d", "e", "f"];
        let stream: Vec<String> = (0..1000)
            .map(|_| vocab[rng.gen_range(0..vocab.len())].to_string())
            .collect();
        let window = 4;
        let x = count_cooccurrences(std::slice::from_ref(&stream), window, 1).unwrap();

        let mut oracle: HashMap<(String, String), f64> = HashMap::new();
        for t in 0..stream.len() {
            for o in 1..=window {
                if t + o >= stream.len() {
                    break;
                }
                let w = 1.0 / o as f64;
                *oracle
                    .entry((stream[t].clone(), stream[t + o].clone()))
                    .or_default() += w;
                *oracle
                    .entry((stream[t + o].clone(), stream[t].clone()))
                    .or_default() += w;
            }
        }
        assert_eq!(x.nnz(), oracle.len());
        for (&(i, j), &weight) in &x.x {
            let key = (x.vocab[i as usize].clone(), x.vocab[j as usize].clone());
            assert!((oracle[&key] - weight).abs() < 1e-12);
        }
    }

    #[test]
    fn cooccurrence_symmetry_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let vocab = ["x", "y", "z", "w"];
        let stream: Vec<String> = (0..500)
            .map(|_| vocab[rng.gen_range(0..vocab.len())].to_string())
            .collect();
        let x = count_cooccurrences(&[stream], 5, 1).unwrap();
        for (&(i, j), &weight) in &x.x {
            assert_eq!(x.x[&(j, i)], weight);
        }
    }

    #[test]
    fn min_count_drops_rare_tokens_before_counting() {
        // "rare" sits between a and b; dropping it first makes a-b adjacent
        let x = count_cooccurrences(&docs(&["a rare b", "a b", "b a"]), 1, 2).unwrap();
        assert!(x.id_of("rare").is_none());
        let ia = x.id_of("a").unwrap();
        let ib = x.id_of("b").unwrap();
        assert_eq!(x.x[&(ia, ib)], 3.0);
    }

    #[test]
    fn empty_vocabulary_is_error() {
        assert!(matches!(
            count_cooccurrences(&docs(&["a b"]), 2, 5),
            Err(EmbeddingError::EmptyVocabulary)
        ));
    }

    use rand_chacha::ChaCha8Rng;

    fn planted_matrix(seed: u64, n: usize, dim: usize) -> (CooccurrenceMatrix, GloveModel) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let vocab: Vec<String> = (0..n).map(|i| format!("t{i}")).collect();
        let mut truth = GloveModel::random_init(vocab.clone(), dim, &mut rng);
        // symmetric construction keeps X_ij = X_ji
        truth.w_ctx = truth.w.clone();
        truth.b_ctx = truth.b.clone();
        let mut x = BTreeMap::new();
        for i in 0..n as u32 {
            for j in 0..n as u32 {
                if i == j {
                    continue;
                }
                // residual at weight 1.0 is dot + b_i + bc_j, so X = exp(link)
                let weight = truth.entry_residual(i as usize, j as usize, 1.0).exp();
                x.insert((i, j), weight);
            }
        }
        (
            CooccurrenceMatrix {
                vocab,
                x,
                window: 10,
                min_count: 1,
            },
            truth,
        )
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let (x, _) = planted_matrix(2, 5, 3);
        let hyper = GloveHyper {
            dim: 3,
            x_max: 1.0,
            alpha: 0.75,
            eta: 0.05,
            epochs: 1,
            seed: 7,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let model = GloveModel::random_init(x.vocab.clone(), 3, &mut rng);
        let grad = model.gradient(&x, &hyper);
        let h = 1e-6;
        for _ in 0..20 {
            let which = rng.gen_range(0..4);
            let mut plus = model.clone();
            let mut minus = model.clone();
            let (analytic, slot_plus, slot_minus): (f64, &mut f64, &mut f64) = match which {
                0 => {
                    let k = rng.gen_range(0..model.w.len());
                    (grad.w[k], &mut plus.w[k], &mut minus.w[k])
                }
                1 => {
                    let k = rng.gen_range(0..model.w_ctx.len());
                    (grad.w_ctx[k], &mut plus.w_ctx[k], &mut minus.w_ctx[k])
                }
                2 => {
                    let k = rng.gen_range(0..model.b.len());
                    (grad.b[k], &mut plus.b[k], &mut minus.b[k])
                }
                _ => {
                    let k = rng.gen_range(0..model.b_ctx.len());
                    (grad.b_ctx[k], &mut plus.b_ctx[k], &mut minus.b_ctx[k])
                }
            };
            *slot_plus += h;
            *slot_minus -= h;
            let numeric = (plus.loss(&x, &hyper) - minus.loss(&x, &hyper)) / (2.0 * h);
            let denom = analytic.abs().max(numeric.abs()).max(1e-8);
            assert!(
                ((analytic - numeric) / denom).abs() < 1e-4,
                "analytic {analytic} vs numeric {numeric}"
            );
        }
    }

    #[test]
    fn planted_solution_loss_drops_below_one_percent() {
        let (x, _) = planted_matrix(3, 5, 3);
        let hyper = GloveHyper {
            dim: 3,
            x_max: 1.0,
            alpha: 0.75,
            eta: 0.05,
            epochs: 500,
            seed: 11,
        };
        let (_, losses) = train_glove(&x, &hyper).unwrap();
        let initial = losses[0];
        let final_loss = *losses.last().unwrap();
        assert!(
            final_loss < 0.01 * initial,
            "initial {initial}, final {final_loss}"
        );
        for loss in &losses {
            assert!(loss.is_finite());
        }
        assert!(*losses.last().unwrap() < losses[0]);
    }

    #[test]
    fn single_entry_one_dimension_fits_exactly() {
        let x = CooccurrenceMatrix {
            vocab: vec!["a".into(), "b".into()],
            x: [((0u32, 1u32), 3.0)].into_iter().collect(),
            window: 2,
            min_count: 1,
        };
        let hyper = GloveHyper {
            dim: 1,
            x_max: 1.0,
            alpha: 0.75,
            eta: 0.05,
            epochs: 500,
            seed: 1,
        };
        let (model, losses) = train_glove(&x, &hyper).unwrap();
        assert!(*losses.last().unwrap() < 1e-6, "losses tail {:?}", &losses[losses.len() - 3..]);
        assert!((model.entry_residual(0, 1, 3.0)).abs() < 1e-3);
    }

    #[test]
    fn training_is_deterministic() {
        let (x, _) = planted_matrix(4, 5, 2);
        let hyper = GloveHyper {
            dim: 2,
            x_max: 1.0,
            alpha: 0.75,
            eta: 0.05,
            epochs: 20,
            seed: 33,
        };
        let (a, _) = train_glove(&x, &hyper).unwrap();
        let (b, _) = train_glove(&x, &hyper).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn neighbors_exclude_query_and_rank_planted_twins_first() {
        // two tokens share a planted vector; they are mutual top neighbors
        let vocab: Vec<String> = vec!["a".into(), "b".into(), "c".into(), "d".into()];
        let vectors = vec![
            1.0, 0.0, //
            1.0, 0.0, //
            0.0, 1.0, //
            -1.0, 0.5,
        ];
        let set = VectorSet::new(vocab, 2, vectors);
        let nn = set.nearest_neighbors("a", 2).unwrap();
        assert_eq!(nn[0].0, "b");
        assert!((nn[0].1 - 1.0).abs() < 1e-12);
        assert!(nn.iter().all(|(t, _)| t != "a"));
        let nn_b = set.nearest_neighbors("b", 1).unwrap();
        assert_eq!(nn_b[0].0, "a");
    }

    #[test]
    fn oov_suggests_close_spellings() {
        let set = VectorSet::new(
            vec!["banach_space".into(), "metric".into()],
            1,
            vec![1.0, 2.0],
        );
        match set.nearest_neighbors("banach_spaces", 1).unwrap_err() {
            EmbeddingError::OutOfVocabulary { suggestions, .. } => {
                assert_eq!(suggestions[0], "banach_space");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn vector_file_round_trip_is_bit_exact() {
        let (x, _) = planted_matrix(6, 5, 3);
        let hyper = GloveHyper {
            dim: 3,
            x_max: 1.0,
            alpha: 0.75,
            eta: 0.05,
            epochs: 5,
            seed: 2,
        };
        let (model, _) = train_glove(&x, &hyper).unwrap();
        let set = model.vector_set();
        let mut buf = Vec::new();
        write_vectors(&mut buf, &set).unwrap();
        let back = read_vectors(&buf[..]).unwrap();
        let mut buf2 = Vec::new();
        write_vectors(&mut buf2, &back).unwrap();
        assert_eq!(buf, buf2);
    }

    #[test]
    fn cooccurrence_cache_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let vocab = ["p", "q", "r", "s"];
        let stream: Vec<String> = (0..300)
            .map(|_| vocab[rng.gen_range(0..vocab.len())].to_string())
            .collect();
        let x = count_cooccurrences(&[stream], 3, 1).unwrap();
        let mut buf = Vec::new();
        write_cooccurrences(&mut buf, &x).unwrap();
        let back = read_cooccurrences(&buf[..]).unwrap();
        assert_eq!(back, x);
    }
}
