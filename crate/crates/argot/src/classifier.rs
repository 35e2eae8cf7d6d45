//! Linear definition classifier: hinge-loss SGD (SGD-SVM) over hashed
//! bag-of-words features, with evaluation metrics and Cohen's kappa.

use std::collections::HashMap;
use std::hash::Hash;
use std::io::{self, BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::corpus::{DatasetSplit, ParagraphLabel, ParagraphRecord, DISPLAY_MATH, INLINE_MATH};

#[derive(Debug, Error)]
pub enum ClassifierError {
    #[error("training data contains a single class; no decision boundary to fit")]
    SingleClass,
    #[error("training part of the split is empty")]
    EmptyTrainingSet,
    #[error("cannot evaluate an empty record list")]
    EmptyEvaluation,
    #[error("label lists have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("hashing bits must be in [10, 24], got {0}")]
    BadHashBits(u32),
    #[error("model file: {0}")]
    BadModelFile(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Sparse hashed feature vector; indices strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub indices: Vec<u32>,
    pub values: Vec<f64>,
}

impl FeatureVector {
    pub fn dot(&self, dense: &[f64]) -> f64 {
        self.indices
            .iter()
            .zip(&self.values)
            .map(|(&i, &v)| dense[i as usize] * v)
            .sum()
    }
}

/// Training hyperparameters.
#[derive(Debug, Clone)]
pub struct Hyper {
    pub epochs: usize,
    pub learning_rate: f64,
    pub l2: f64,
    pub bits: u32,
    pub seed: u64,
}

impl Default for Hyper {
    fn default() -> Self {
        Hyper {
            epochs: 10,
            learning_rate: 0.1,
            l2: 1e-4,
            bits: 18,
            seed: 0,
        }
    }
}

/// A trained linear model over `2^bits` hashed buckets.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub bits: u32,
    pub epochs_trained: usize,
    pub seed: u64,
}

/// Precision/recall/F1 for the `definition` class, plus the confusion
/// matrix `[[tp, fp], [fn, tn]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub confusion: [[usize; 2]; 2],
}

/// Model plus the per-epoch validation reports produced during training.
#[derive(Debug, Clone)]
pub struct TrainOutput {
    pub model: LinearModel,
    pub validation_history: Vec<EvalReport>,
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// FNV-1a, pinned here so hashed models are stable across platforms.
fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h = FNV_OFFSET;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

fn hash_token(token: &str, bits: u32) -> (u32, f64) {
    let h = fnv1a(token.as_bytes());
    let index = (h & ((1u64 << bits) - 1)) as u32;
    let sign = if h >> 63 == 1 { -1.0 } else { 1.0 };
    (index, sign)
}

/// Tokens for classification: words and math placeholders, case preserved.
pub fn tokenize(text: &str) -> Vec<&str> {
    let mut tokens = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let rest = &text[i..];
        if rest.starts_with(INLINE_MATH) {
            tokens.push(&text[i..i + INLINE_MATH.len()]);
            i += INLINE_MATH.len();
        } else if rest.starts_with(DISPLAY_MATH) {
            tokens.push(&text[i..i + DISPLAY_MATH.len()]);
            i += DISPLAY_MATH.len();
        } else if bytes[i].is_ascii_alphanumeric() {
            let mut j = i + 1;
            while j < bytes.len() && bytes[j].is_ascii_alphanumeric() {
                j += 1;
            }
            tokens.push(&text[i..j]);
            i = j;
        } else {
            i += 1;
        }
    }
    tokens
}

/// Hash unigrams and bigrams of a paragraph into `2^bits` buckets.
///
/// Bucket updates carry a sign taken from a spare hash bit and are scaled
/// by `1 / sqrt(token count)`.
pub fn featurize(record: &ParagraphRecord, bits: u32) -> Result<FeatureVector, ClassifierError> {
    if !(10..=24).contains(&bits) {
        return Err(ClassifierError::BadHashBits(bits));
    }
    let tokens = tokenize(&record.text);
    if tokens.is_empty() {
        return Ok(FeatureVector {
            indices: Vec::new(),
            values: Vec::new(),
        });
    }
    let scale = 1.0 / (tokens.len() as f64).sqrt();
    let mut buckets: HashMap<u32, f64> = HashMap::new();
    for token in &tokens {
        let (index, sign) = hash_token(token, bits);
        *buckets.entry(index).or_default() += sign * scale;
    }
    for pair in tokens.windows(2) {
        let bigram = format!("{}\u{1f}{}", pair[0], pair[1]);
        let (index, sign) = hash_token(&bigram, bits);
        *buckets.entry(index).or_default() += sign * scale;
    }
    let mut entries: Vec<(u32, f64)> = buckets.into_iter().filter(|&(_, v)| v != 0.0).collect();
    entries.sort_unstable_by_key(|&(i, _)| i);
    Ok(FeatureVector {
        indices: entries.iter().map(|&(i, _)| i).collect(),
        values: entries.iter().map(|&(_, v)| v).collect(),
    })
}

fn label_to_sign(label: ParagraphLabel) -> f64 {
    match label {
        ParagraphLabel::Definition => 1.0,
        _ => -1.0,
    }
}

/// Hinge + L2 objective `l2/2 ||w||^2 + mean(max(0, 1 - y f(x)))`.
pub fn hinge_objective(model: &LinearModel, data: &[(FeatureVector, f64)], l2: f64) -> f64 {
    let norm2: f64 = model.weights.iter().map(|w| w * w).sum();
    let hinge: f64 = data
        .iter()
        .map(|(x, y)| (1.0 - y * (x.dot(&model.weights) + model.bias)).max(0.0))
        .sum::<f64>()
        / data.len().max(1) as f64;
    0.5 * l2 * norm2 + hinge
}

/// Train the SGD-SVM on the split's training part.
///
/// Learning rate schedule `eta_t = eta0 / (1 + eta0 * l2 * t)`; one shuffle
/// per epoch from the seed; deterministic for a fixed seed. Validation
/// metrics are computed after every epoch.
pub fn train(split: &DatasetSplit, hyper: &Hyper) -> Result<TrainOutput, ClassifierError> {
    if split.train.is_empty() {
        return Err(ClassifierError::EmptyTrainingSet);
    }
    let has_pos = split
        .train
        .iter()
        .any(|r| r.label == ParagraphLabel::Definition);
    let has_neg = split
        .train
        .iter()
        .any(|r| r.label != ParagraphLabel::Definition);
    if !has_pos || !has_neg {
        return Err(ClassifierError::SingleClass);
    }

    let data: Vec<(FeatureVector, f64)> = split
        .train
        .iter()
        .map(|r| Ok((featurize(r, hyper.bits)?, label_to_sign(r.label))))
        .collect::<Result<_, ClassifierError>>()?;

    let dim = 1usize << hyper.bits;
    let mut weights = vec![0.0f64; dim];
    let mut scale = 1.0f64;
    let mut bias = 0.0f64;
    let mut rng = ChaCha8Rng::seed_from_u64(hyper.seed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut step = 0u64;
    let mut history = Vec::with_capacity(hyper.epochs);

    for epoch in 0..hyper.epochs {
        for i in (1..order.len()).rev() {
            let j = rng.gen_range(0..=i);
            order.swap(i, j);
        }
        for &idx in &order {
            let (x, y) = &data[idx];
            let eta = hyper.learning_rate / (1.0 + hyper.learning_rate * hyper.l2 * step as f64);
            step += 1;

            let margin = y * (scale * x.dot(&weights) + bias);
            // L2 shrink kept as a running scale on the weight vector.
            scale *= 1.0 - eta * hyper.l2;
            if margin < 1.0 {
                let boost = eta * y / scale;
                for (&i, &v) in x.indices.iter().zip(&x.values) {
                    weights[i as usize] += boost * v;
                }
                bias += eta * y;
            }
            if scale < 1e-9 {
                for w in weights.iter_mut() {
                    *w *= scale;
                }
                scale = 1.0;
            }
        }

        if !split.validation.is_empty() {
            let snapshot = LinearModel {
                weights: weights.iter().map(|w| w * scale).collect(),
                bias,
                bits: hyper.bits,
                epochs_trained: epoch + 1,
                seed: hyper.seed,
            };
            history.push(evaluate(&snapshot, &split.validation)?);
        }
    }

    for w in weights.iter_mut() {
        *w *= scale;
    }
    Ok(TrainOutput {
        model: LinearModel {
            weights,
            bias,
            bits: hyper.bits,
            epochs_trained: hyper.epochs,
            seed: hyper.seed,
        },
        validation_history: history,
    })
}

/// Predicted label plus the raw margin `w.x + bias`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub label: ParagraphLabel,
    pub margin: f64,
}

/// Classify one paragraph. A margin of exactly zero is non-definition.
pub fn predict(
    model: &LinearModel,
    record: &ParagraphRecord,
) -> Result<Prediction, ClassifierError> {
    let x = featurize(record, model.bits)?;
    let margin = x.dot(&model.weights) + model.bias;
    let label = if margin > 0.0 {
        ParagraphLabel::Definition
    } else {
        ParagraphLabel::NonDefinition
    };
    Ok(Prediction { label, margin })
}

/// Score the model against labeled records.
pub fn evaluate(
    model: &LinearModel,
    records: &[ParagraphRecord],
) -> Result<EvalReport, ClassifierError> {
    if records.is_empty() {
        return Err(ClassifierError::EmptyEvaluation);
    }
    let mut confusion = [[0usize; 2]; 2];
    for r in records {
        let predicted = predict(model, r)?.label == ParagraphLabel::Definition;
        let actual = r.label == ParagraphLabel::Definition;
        match (predicted, actual) {
            (true, true) => confusion[0][0] += 1,
            (true, false) => confusion[0][1] += 1,
            (false, true) => confusion[1][0] += 1,
            (false, false) => confusion[1][1] += 1,
        }
    }
    Ok(report_from_confusion(confusion))
}

/// Build the report from a confusion matrix `[[tp, fp], [fn, tn]]`.
pub fn report_from_confusion(confusion: [[usize; 2]; 2]) -> EvalReport {
    let tp = confusion[0][0] as f64;
    let fp = confusion[0][1] as f64;
    let fnn = confusion[1][0] as f64;
    let precision = if tp + fp > 0.0 { tp / (tp + fp) } else { 0.0 };
    let recall = if tp + fnn > 0.0 { tp / (tp + fnn) } else { 0.0 };
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    EvalReport {
        precision,
        recall,
        f1,
        confusion,
    }
}

/// Cohen's kappa between two labelings of the same items.
///
/// `kappa = (p_o - p_e) / (1 - p_e)`; two constant identical raters score 1.
pub fn cohen_kappa<T: Eq + Hash>(labels_a: &[T], labels_b: &[T]) -> Result<f64, ClassifierError> {
    if labels_a.len() != labels_b.len() {
        return Err(ClassifierError::LengthMismatch(
            labels_a.len(),
            labels_b.len(),
        ));
    }
    if labels_a.is_empty() {
        return Err(ClassifierError::EmptyEvaluation);
    }
    let n = labels_a.len() as f64;
    let observed = labels_a
        .iter()
        .zip(labels_b)
        .filter(|(a, b)| a == b)
        .count() as f64
        / n;

    let mut count_a: HashMap<&T, usize> = HashMap::new();
    let mut count_b: HashMap<&T, usize> = HashMap::new();
    for (a, b) in labels_a.iter().zip(labels_b) {
        *count_a.entry(a).or_default() += 1;
        *count_b.entry(b).or_default() += 1;
    }
    let mut expected = 0.0;
    for (label, &ca) in &count_a {
        if let Some(&cb) = count_b.get(label) {
            expected += (ca as f64 / n) * (cb as f64 / n);
        }
    }
    if (1.0 - expected).abs() < 1e-15 {
        // Both marginals are a point mass on the same label, so p_o = 1.
        return Ok(1.0);
    }
    Ok((observed - expected) / (1.0 - expected))
}

const MODEL_MAGIC: &str = "ARGOT-SVM1";

/// Write the model container: magic, bits, bias, then nonzero weights as
/// `(index, value)` pairs.
pub fn write_model<W: Write>(mut w: W, model: &LinearModel) -> io::Result<()> {
    writeln!(w, "{MODEL_MAGIC}")?;
    writeln!(w, "bits={}", model.bits)?;
    writeln!(w, "bias={}", model.bias)?;
    writeln!(w, "epochs={}", model.epochs_trained)?;
    writeln!(w, "seed={}", model.seed)?;
    let nnz = model.weights.iter().filter(|&&v| v != 0.0).count();
    writeln!(w, "nnz={nnz}")?;
    for (i, &v) in model.weights.iter().enumerate() {
        if v != 0.0 {
            writeln!(w, "{i} {v}")?;
        }
    }
    Ok(())
}

/// Parse a model container written by [`write_model`].
pub fn read_model<R: BufRead>(r: R) -> Result<LinearModel, ClassifierError> {
    let mut lines = r.lines();
    let bad = |msg: String| ClassifierError::BadModelFile(msg);
    let magic = lines
        .next()
        .ok_or_else(|| bad("empty file".into()))??;
    if magic != MODEL_MAGIC {
        return Err(bad(format!("bad magic {magic:?}")));
    }
    let mut field = |name: &str| -> Result<String, ClassifierError> {
        let line = lines
            .next()
            .ok_or_else(|| bad(format!("missing {name} line")))??;
        line.strip_prefix(&format!("{name}="))
            .map(str::to_string)
            .ok_or_else(|| bad(format!("expected {name}=..., got {line:?}")))
    };
    let bits: u32 = field("bits")?.parse().map_err(|_| bad("bad bits".into()))?;
    let bias: f64 = field("bias")?.parse().map_err(|_| bad("bad bias".into()))?;
    let epochs: usize = field("epochs")?
        .parse()
        .map_err(|_| bad("bad epochs".into()))?;
    let seed: u64 = field("seed")?.parse().map_err(|_| bad("bad seed".into()))?;
    let nnz: usize = field("nnz")?.parse().map_err(|_| bad("bad nnz".into()))?;
    if !(10..=24).contains(&bits) {
        return Err(ClassifierError::BadHashBits(bits));
    }
    let mut weights = vec![0.0f64; 1 << bits];
    let mut seen = 0usize;
    for line in lines {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let (idx, val) = line
            .split_once(' ')
            .ok_or_else(|| bad(format!("bad weight line {line:?}")))?;
        let idx: usize = idx.parse().map_err(|_| bad("bad weight index".into()))?;
        if idx >= weights.len() {
            return Err(bad(format!("weight index {idx} out of range")));
        }
        weights[idx] = val.parse().map_err(|_| bad("bad weight value".into()))?;
        seen += 1;
    }
    if seen != nnz {
        return Err(bad(format!("expected {nnz} weights, found {seen}")));
    }
    Ok(LinearModel {
        weights,
        bias,
        bits,
        epochs_trained: epochs,
        seed,
    })
}
