//! Hyperbolic word embeddings in a product of upper half-planes.
//!
//! Each token is a list of `n` points `(x, y)` with `y > 0`. The per-plane
//! metric is `d(p, q) = arcosh(1 + ((xq-xp)^2 + (yq-yp)^2) / (2 yp yq))`
//! and the product distance is the square root of the summed squares. The
//! GloVe objective is modified to use the hyperbolic metric through the
//! link `-cosh^2(d) + b_i + bc_j = ln X_ij`, optimized by Riemannian SGD
//! (coordinate gradient scaled by `y^2`, then a retraction clamping
//! `y >= Y_MIN`). The y-coordinates carry the IS-A signal: generality
//! grows with `y`, and `isa(term, query)` is the mean log-ratio of their
//! y-coordinates, so the query itself always scores exactly zero.

use std::io::{self, BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::embedding::{oov_error, CooccurrenceMatrix, VectorSet};

/// Retraction floor for y-coordinates.
pub const Y_MIN: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum HyperbolicError {
    #[error("half-plane point has y = {0} <= 0; invariant breached upstream")]
    InvalidPoint(f64),
    #[error("mismatched plane counts ({0} vs {1})")]
    PlaneCountMismatch(usize, usize),
    #[error("co-occurrence matrix has no entries")]
    EmptyMatrix,
    #[error("non-finite loss at pair ({i}, {j}) with weight {weight}")]
    NonFiniteLoss { i: u32, j: u32, weight: f64 },
    #[error("token {token:?} not in vocabulary; closest spellings: {suggestions:?}")]
    OutOfVocabulary {
        token: String,
        suggestions: Vec<String>,
    },
    #[error("model file: {0}")]
    BadModelFile(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// One point of the upper half-plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfPlanePoint {
    pub x: f64,
    pub y: f64,
}

impl HalfPlanePoint {
    pub fn new(x: f64, y: f64) -> Self {
        HalfPlanePoint { x, y }
    }
}

/// Half-plane distance `arcosh(1 + (dx^2 + dy^2) / (2 yp yq))`.
pub fn hyperbolic_distance(p: HalfPlanePoint, q: HalfPlanePoint) -> Result<f64, HyperbolicError> {
    if p.y <= 0.0 {
        return Err(HyperbolicError::InvalidPoint(p.y));
    }
    if q.y <= 0.0 {
        return Err(HyperbolicError::InvalidPoint(q.y));
    }
    let dx = q.x - p.x;
    let dy = q.y - p.y;
    let u = 1.0 + (dx * dx + dy * dy) / (2.0 * p.y * q.y);
    Ok(u.acosh())
}

/// Product-manifold distance: sqrt of summed squared per-plane distances.
pub fn product_distance(
    a: &[HalfPlanePoint],
    b: &[HalfPlanePoint],
) -> Result<f64, HyperbolicError> {
    if a.len() != b.len() {
        return Err(HyperbolicError::PlaneCountMismatch(a.len(), b.len()));
    }
    let mut sum = 0.0;
    for (&p, &q) in a.iter().zip(b) {
        let d = hyperbolic_distance(p, q)?;
        sum += d * d;
    }
    Ok(sum.sqrt())
}

/// Hyperbolic training hyperparameters.
#[derive(Debug, Clone)]
pub struct HyperbolicHyper {
    /// Number of half-planes (total dimension is `2 * planes`).
    pub planes: usize,
    pub epochs: usize,
    pub eta: f64,
    pub seed: u64,
    pub x_max: f64,
    pub alpha: f64,
}

impl Default for HyperbolicHyper {
    fn default() -> Self {
        HyperbolicHyper {
            planes: 25,
            epochs: 25,
            eta: 0.01,
            seed: 0,
            x_max: 100.0,
            alpha: 0.75,
        }
    }
}

/// Trained hyperbolic embedding: main and context points plus biases.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperbolicEmbedding {
    pub vocab: Vec<String>,
    pub planes: usize,
    /// Main points, `|V| * planes` row-major.
    pub points: Vec<HalfPlanePoint>,
    pub ctx_points: Vec<HalfPlanePoint>,
    pub b: Vec<f64>,
    pub b_ctx: Vec<f64>,
}

impl HyperbolicEmbedding {
    pub fn id_of(&self, token: &str) -> Option<usize> {
        self.vocab.iter().position(|t| t == token)
    }

    /// Main points of one token.
    pub fn token_points(&self, id: usize) -> &[HalfPlanePoint] {
        &self.points[id * self.planes..(id + 1) * self.planes]
    }

    fn ctx_token_points(&self, id: usize) -> &[HalfPlanePoint] {
        &self.ctx_points[id * self.planes..(id + 1) * self.planes]
    }

    /// Smallest stored y-coordinate (main and context).
    pub fn min_y(&self) -> f64 {
        self.points
            .iter()
            .chain(&self.ctx_points)
            .map(|p| p.y)
            .fold(f64::INFINITY, f64::min)
    }

    /// Mean log y-coordinate of a token's main points.
    pub fn mean_log_y(&self, id: usize) -> f64 {
        let points = self.token_points(id);
        points.iter().map(|p| p.y.ln()).sum::<f64>() / points.len() as f64
    }

    fn residual(&self, i: usize, j: usize, weight: f64) -> Result<f64, HyperbolicError> {
        let d = product_distance(self.token_points(i), self.ctx_token_points(j))?;
        Ok(-d.cosh().powi(2) + self.b[i] + self.b_ctx[j] - weight.ln())
    }

    /// The objective `J` over all nonzero entries.
    pub fn loss(
        &self,
        x: &CooccurrenceMatrix,
        hyper: &HyperbolicHyper,
    ) -> Result<f64, HyperbolicError> {
        let mut total = 0.0;
        for (&(i, j), &weight) in &x.x {
            let f = weighting(weight, hyper);
            let diff = self.residual(i as usize, j as usize, weight)?;
            total += f * diff * diff;
        }
        Ok(total)
    }

    /// Full-batch coordinate gradient of `J` (before Riemannian scaling).
    pub fn gradient(
        &self,
        x: &CooccurrenceMatrix,
        hyper: &HyperbolicHyper,
    ) -> Result<HyperbolicGradient, HyperbolicError> {
        let mut grad = HyperbolicGradient::zeros(self.vocab.len(), self.planes);
        for (&(i, j), &weight) in &x.x {
            let (i, j) = (i as usize, j as usize);
            let f = weighting(weight, hyper);
            let diff = self.residual(i, j, weight)?;
            accumulate_entry_gradient(self, i, j, 2.0 * f * diff, &mut grad)?;
        }
        Ok(grad)
    }
}

/// Coordinate gradients with the same layout as the embedding.
#[derive(Debug, Clone)]
pub struct HyperbolicGradient {
    pub points: Vec<(f64, f64)>,
    pub ctx_points: Vec<(f64, f64)>,
    pub b: Vec<f64>,
    pub b_ctx: Vec<f64>,
}

impl HyperbolicGradient {
    fn zeros(vocab: usize, planes: usize) -> Self {
        HyperbolicGradient {
            points: vec![(0.0, 0.0); vocab * planes],
            ctx_points: vec![(0.0, 0.0); vocab * planes],
            b: vec![0.0; vocab],
            b_ctx: vec![0.0; vocab],
        }
    }
}

fn weighting(x: f64, hyper: &HyperbolicHyper) -> f64 {
    if x < hyper.x_max {
        (x / hyper.x_max).powf(hyper.alpha)
    } else {
        1.0
    }
}

/// Largest per-coordinate step; `sinh(2D)` in the chain rule can spike on
/// distant pairs and clipping keeps single updates from running away.
const MAX_STEP: f64 = 0.1;

fn clip_step(step: f64) -> f64 {
    step.clamp(-MAX_STEP, MAX_STEP)
}

/// Per-plane partials of the half-plane distance `d(p, q)`.
///
/// With `u = 1 + (dx^2 + dy^2)/(2 yp yq)` and `d = arcosh(u)`:
/// `dd/d* = du/d* / sqrt(u^2 - 1)`. Coincident points get zero.
fn distance_partials(p: HalfPlanePoint, q: HalfPlanePoint) -> (f64, f64, f64, f64) {
    let dx = q.x - p.x;
    let dy = q.y - p.y;
    let s = dx * dx + dy * dy;
    let u = 1.0 + s / (2.0 * p.y * q.y);
    // u >= 1 by construction (y coordinates are validated positive)
    let root = (u * u - 1.0).sqrt();
    if root <= 1e-12 {
        return (0.0, 0.0, 0.0, 0.0);
    }
    let du_dxp = -dx / (p.y * q.y);
    let du_dyp = -dy / (p.y * q.y) - s / (2.0 * p.y * p.y * q.y);
    let du_dxq = dx / (p.y * q.y);
    let du_dyq = dy / (p.y * q.y) - s / (2.0 * p.y * q.y * q.y);
    (du_dxp / root, du_dyp / root, du_dxq / root, du_dyq / root)
}

/// Add one entry's gradient, scaled by `coeff = dJ/d(residual)`, into `grad`.
fn accumulate_entry_gradient(
    emb: &HyperbolicEmbedding,
    i: usize,
    j: usize,
    coeff: f64,
    grad: &mut HyperbolicGradient,
) -> Result<(), HyperbolicError> {
    let main = emb.token_points(i);
    let ctx = emb.ctx_token_points(j);
    let total = product_distance(main, ctx)?;
    // d(-cosh^2(D))/dD = -sinh(2D)
    let chain = -coeff * (2.0 * total).sinh();
    if total > 1e-12 {
        for k in 0..emb.planes {
            let p = main[k];
            let q = ctx[k];
            let dk = hyperbolic_distance(p, q)?;
            if dk == 0.0 {
                continue;
            }
            let (dxp, dyp, dxq, dyq) = distance_partials(p, q);
            let scale = chain * dk / total;
            let slot = &mut grad.points[i * emb.planes + k];
            slot.0 += scale * dxp;
            slot.1 += scale * dyp;
            let slot = &mut grad.ctx_points[j * emb.planes + k];
            slot.0 += scale * dxq;
            slot.1 += scale * dyq;
        }
    }
    grad.b[i] += coeff;
    grad.b_ctx[j] += coeff;
    Ok(())
}

/// Train in the product of half-planes with Riemannian stochastic
/// descent.
///
/// The Riemannian gradient on each plane is `y^2` times the coordinate
/// gradient; steps use AdaGrad per-coordinate rates (the `cosh^2` link
/// blows up on distant pairs, where a constant rate provably diverges),
/// then the retraction clamps `y` to [`Y_MIN`]. Deterministic per seed;
/// returns the embedding and per-epoch losses.
pub fn train_hyperbolic(
    x: &CooccurrenceMatrix,
    hyper: &HyperbolicHyper,
) -> Result<(HyperbolicEmbedding, Vec<f64>), HyperbolicError> {
    train_hyperbolic_with(x, hyper, |_, _| {})
}

/// [`train_hyperbolic`] with an inspection callback run after each epoch.
pub fn train_hyperbolic_with<F>(
    x: &CooccurrenceMatrix,
    hyper: &HyperbolicHyper,
    mut inspect: F,
) -> Result<(HyperbolicEmbedding, Vec<f64>), HyperbolicError>
where
    F: FnMut(usize, &HyperbolicEmbedding),
{
    if x.x.is_empty() {
        return Err(HyperbolicError::EmptyMatrix);
    }
    let n = x.vocab.len();
    let mut rng = ChaCha8Rng::seed_from_u64(hyper.seed);

    // Inversions are half-plane isometries, so the loss cannot tell a
    // configuration from its upside-down twin; the y-orientation is a
    // gauge choice. Anchor it at initialization: frequent tokens start
    // high. This is the interpretation step the method needs, done with
    // corpus statistics only.
    let mut totals = vec![0.0f64; n];
    for (&(i, _), &weight) in &x.x {
        totals[i as usize] += weight;
    }
    let mean_total = totals.iter().sum::<f64>() / n as f64;
    let init_y: Vec<f64> = totals
        .iter()
        .map(|&t| (t.max(1e-9) / mean_total).sqrt().clamp(0.25, 4.0))
        .collect();

    let draw_points = |rng: &mut ChaCha8Rng| -> Vec<HalfPlanePoint> {
        (0..n * hyper.planes)
            .map(|idx| {
                let base = init_y[idx / hyper.planes];
                HalfPlanePoint::new(
                    rng.gen_range(-0.1..0.1),
                    base * rng.gen_range(0.9..1.1),
                )
            })
            .collect()
    };
    // Pre-fit biases so typical residuals start near zero. Without this
    // the early targets are infeasible (cosh^2 >= 1) and the pull crushes
    // every strong pair onto one point before the biases catch up.
    let mut partner_counts = vec![0usize; n];
    for &(i, _) in x.x.keys() {
        partner_counts[i as usize] += 1;
    }
    let init_b: Vec<f64> = totals
        .iter()
        .zip(&partner_counts)
        .map(|(&total, &count)| {
            let mean_weight = total / count.max(1) as f64;
            0.5 * (1.0 + mean_weight.max(1e-9).ln())
        })
        .collect();

    let mut emb = HyperbolicEmbedding {
        points: draw_points(&mut rng),
        ctx_points: draw_points(&mut rng),
        b: init_b
            .iter()
            .map(|&b| b + rng.gen_range(-0.05..0.05))
            .collect(),
        b_ctx: init_b
            .iter()
            .map(|&b| b + rng.gen_range(-0.05..0.05))
            .collect(),
        vocab: x.vocab.clone(),
        planes: hyper.planes,
    };

    let mut entries: Vec<(u32, u32, f64)> = x.x.iter().map(|(&(i, j), &w)| (i, j, w)).collect();
    let mut losses = Vec::with_capacity(hyper.epochs);

    let mut gsq_points = vec![(1.0f64, 1.0f64); n * hyper.planes];
    let mut gsq_ctx = vec![(1.0f64, 1.0f64); n * hyper.planes];
    let mut gsq_b = vec![1.0f64; n];
    let mut gsq_bctx = vec![1.0f64; n];

    for epoch in 0..hyper.epochs {
        for i in (1..entries.len()).rev() {
            let j = rng.gen_range(0..=i);
            entries.swap(i, j);
        }
        let mut epoch_loss = 0.0;
        for &(iu, ju, weight) in &entries {
            let (i, j) = (iu as usize, ju as usize);
            let f = weighting(weight, hyper);
            let diff = emb.residual(i, j, weight)?;
            if !diff.is_finite() {
                return Err(HyperbolicError::NonFiniteLoss { i: iu, j: ju, weight });
            }
            epoch_loss += f * diff * diff;

            let mut grad = HyperbolicGradient::zeros(n, hyper.planes);
            accumulate_entry_gradient(&emb, i, j, 2.0 * f * diff, &mut grad)?;
            for k in 0..hyper.planes {
                let gi = grad.points[i * hyper.planes + k];
                let gj = grad.ctx_points[j * hyper.planes + k];
                let p = &mut emb.points[i * hyper.planes + k];
                let gsq = &mut gsq_points[i * hyper.planes + k];
                let (rx, ry) = (p.y * p.y * gi.0, p.y * p.y * gi.1);
                p.x -= clip_step(hyper.eta * rx / gsq.0.sqrt());
                p.y = (p.y - clip_step(hyper.eta * ry / gsq.1.sqrt())).max(Y_MIN);
                gsq.0 += rx * rx;
                gsq.1 += ry * ry;
                let q = &mut emb.ctx_points[j * hyper.planes + k];
                let gsq = &mut gsq_ctx[j * hyper.planes + k];
                let (rx, ry) = (q.y * q.y * gj.0, q.y * q.y * gj.1);
                q.x -= clip_step(hyper.eta * rx / gsq.0.sqrt());
                q.y = (q.y - clip_step(hyper.eta * ry / gsq.1.sqrt())).max(Y_MIN);
                gsq.0 += rx * rx;
                gsq.1 += ry * ry;
            }
            emb.b[i] -= clip_step(hyper.eta * grad.b[i] / gsq_b[i].sqrt());
            gsq_b[i] += grad.b[i] * grad.b[i];
            emb.b_ctx[j] -= clip_step(hyper.eta * grad.b_ctx[j] / gsq_bctx[j].sqrt());
            gsq_bctx[j] += grad.b_ctx[j] * grad.b_ctx[j];
        }
        losses.push(epoch_loss);
        inspect(epoch, &emb);
    }
    Ok((emb, losses))
}

/// An IS-A rating of `term` relative to `query`.
#[derive(Debug, Clone, PartialEq)]
pub struct IsaRating {
    pub term: String,
    pub query: String,
    pub score: f64,
}

/// `isa(term, query) = mean_i(ln y_i(term) - ln y_i(query))`.
///
/// Antisymmetric by construction; positive means `term` is the more
/// general of the pair.
pub fn isa_score(
    emb: &HyperbolicEmbedding,
    term: &str,
    query: &str,
) -> Result<IsaRating, HyperbolicError> {
    let term_id = emb
        .id_of(term)
        .ok_or_else(|| oov(term, &emb.vocab))?;
    let query_id = emb
        .id_of(query)
        .ok_or_else(|| oov(query, &emb.vocab))?;
    let score = if term_id == query_id {
        0.0
    } else {
        emb.mean_log_y(term_id) - emb.mean_log_y(query_id)
    };
    Ok(IsaRating {
        term: term.to_string(),
        query: query.to_string(),
        score,
    })
}

fn oov(token: &str, vocab: &[String]) -> HyperbolicError {
    match oov_error(token, vocab) {
        crate::embedding::EmbeddingError::OutOfVocabulary { token, suggestions } => {
            HyperbolicError::OutOfVocabulary { token, suggestions }
        }
        _ => unreachable!(),
    }
}

/// Mean IS-A of the shared vocabulary relative to `term` as the query.
///
/// Specific terms (small y) sit high on this scale, matching their high
/// dependency-graph levels.
pub fn mean_isa_as_query(
    emb: &HyperbolicEmbedding,
    term: &str,
    vocabulary: &[String],
) -> Result<f64, HyperbolicError> {
    let mut total = 0.0;
    let mut count = 0usize;
    for other in vocabulary {
        if !emb.vocab.contains(other) {
            continue;
        }
        total += isa_score(emb, other, term)?.score;
        count += 1;
    }
    if count == 0 {
        return Err(oov(term, &emb.vocab));
    }
    Ok(total / count as f64)
}

/// One row of a hypernymy query table.
#[derive(Debug, Clone, PartialEq)]
pub struct HypernymyRow {
    pub token: String,
    pub isa: f64,
    pub similarity: f64,
}

/// Nearest neighbors of `query` annotated with IS-A scores, sorted
/// ascending by IS-A (most specific first). Neighbors come from cosine
/// similarity in the Euclidean model when one is given, otherwise from
/// negative hyperbolic product distance. The query itself is always
/// present with IS-A exactly zero, so the table has `k + 1` rows.
pub fn hypernymy_query(
    emb: &HyperbolicEmbedding,
    euclidean: Option<&VectorSet>,
    query: &str,
    k: usize,
) -> Result<Vec<HypernymyRow>, HyperbolicError> {
    let query_id = emb.id_of(query).ok_or_else(|| oov(query, &emb.vocab))?;

    let neighbors: Vec<(String, f64)> = match euclidean {
        Some(set) => {
            if !set.contains(query) {
                return Err(oov(query, &set.vocab));
            }
            set.nearest_neighbors(query, usize::MAX)
                .map_err(|_| oov(query, &set.vocab))?
                .into_iter()
                .filter(|(t, _)| emb.id_of(t).is_some())
                .take(k)
                .collect()
        }
        None => {
            let mut scored: Vec<(String, f64)> = Vec::new();
            for (id, token) in emb.vocab.iter().enumerate() {
                if id == query_id {
                    continue;
                }
                let d = product_distance(emb.token_points(query_id), emb.token_points(id))?;
                scored.push((token.clone(), -d));
            }
            scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
            scored.truncate(k);
            scored
        }
    };

    let mut rows = Vec::with_capacity(neighbors.len() + 1);
    rows.push(HypernymyRow {
        token: query.to_string(),
        isa: 0.0,
        similarity: match euclidean {
            Some(_) => 1.0,
            None => 0.0,
        },
    });
    for (token, similarity) in neighbors {
        let isa = isa_score(emb, &token, query)?.score;
        rows.push(HypernymyRow {
            token,
            isa,
            similarity,
        });
    }
    rows.sort_by(|a, b| {
        a.isa
            .partial_cmp(&b.isa)
            .unwrap()
            .then_with(|| a.token.cmp(&b.token))
    });
    Ok(rows)
}

const MODEL_MAGIC: &str = "ARGOT-HYP1";

/// Write the model: header `ARGOT-HYP1 n=<planes>`, main points, then
/// `#context` points and a `#biases` section, all 6-decimal fixed.
pub fn write_model<W: Write>(mut w: W, emb: &HyperbolicEmbedding) -> io::Result<()> {
    writeln!(w, "{MODEL_MAGIC} n={}", emb.planes)?;
    writeln!(w, "{}", emb.vocab.len())?;
    let write_points = |w: &mut W, points: &[HalfPlanePoint]| -> io::Result<()> {
        for (i, token) in emb.vocab.iter().enumerate() {
            write!(w, "{token}")?;
            for p in &points[i * emb.planes..(i + 1) * emb.planes] {
                write!(w, " {:.6} {:.6}", p.x, p.y)?;
            }
            writeln!(w)?;
        }
        Ok(())
    };
    write_points(&mut w, &emb.points)?;
    writeln!(w, "#context")?;
    write_points(&mut w, &emb.ctx_points)?;
    writeln!(w, "#biases")?;
    for (i, token) in emb.vocab.iter().enumerate() {
        writeln!(w, "{token} {:.6} {:.6}", emb.b[i], emb.b_ctx[i])?;
    }
    Ok(())
}

/// Parse a model written by [`write_model`].
pub fn read_model<R: BufRead>(r: R) -> Result<HyperbolicEmbedding, HyperbolicError> {
    let bad = |msg: String| HyperbolicError::BadModelFile(msg);
    let mut lines = r.lines();
    let mut next = |what: &str| -> Result<String, HyperbolicError> {
        lines
            .next()
            .transpose()?
            .ok_or_else(|| bad(format!("unexpected end of file, expected {what}")))
    };
    let header = next("header")?;
    let planes: usize = header
        .strip_prefix(&format!("{MODEL_MAGIC} n="))
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| bad(format!("bad header {header:?}")))?;
    let vocab_size: usize = next("vocab size")?
        .parse()
        .map_err(|_| bad("bad vocab size".into()))?;

    let mut vocab = Vec::with_capacity(vocab_size);
    let parse_points = |expect_vocab: Option<&[String]>,
                            next: &mut dyn FnMut(&str) -> Result<String, HyperbolicError>|
     -> Result<(Vec<String>, Vec<HalfPlanePoint>), HyperbolicError> {
        let mut tokens = Vec::with_capacity(vocab_size);
        let mut points = Vec::with_capacity(vocab_size * planes);
        for row in 0..vocab_size {
            let line = next("point line")?;
            let mut parts = line.split(' ');
            let token = parts.next().unwrap_or("").to_string();
            if let Some(expected) = expect_vocab {
                if expected[row] != token {
                    return Err(bad(format!(
                        "vocab mismatch: {token:?} vs {:?}",
                        expected[row]
                    )));
                }
            }
            let values: Vec<f64> = parts
                .map(|v| v.parse::<f64>().map_err(|_| bad(format!("bad value {v:?}"))))
                .collect::<Result<_, _>>()?;
            if values.len() != 2 * planes {
                return Err(bad(format!(
                    "{token}: expected {} coordinates, got {}",
                    2 * planes,
                    values.len()
                )));
            }
            for pair in values.chunks(2) {
                if pair[1] <= 0.0 {
                    return Err(HyperbolicError::InvalidPoint(pair[1]));
                }
                points.push(HalfPlanePoint::new(pair[0], pair[1]));
            }
            tokens.push(token);
        }
        Ok((tokens, points))
    };

    let (tokens, points) = parse_points(None, &mut next)?;
    vocab.extend(tokens);
    if next("#context separator")? != "#context" {
        return Err(bad("missing #context section".into()));
    }
    let (_, ctx_points) = parse_points(Some(&vocab), &mut next)?;
    if next("#biases separator")? != "#biases" {
        return Err(bad("missing #biases section".into()));
    }
    let mut b = Vec::with_capacity(vocab_size);
    let mut b_ctx = Vec::with_capacity(vocab_size);
    for token in &vocab {
        let line = next("bias line")?;
        let parts: Vec<&str> = line.split(' ').collect();
        if parts.len() != 3 || parts[0] != token {
            return Err(bad(format!("bad bias line {line:?}")));
        }
        b.push(parts[1].parse().map_err(|_| bad("bad bias".into()))?);
        b_ctx.push(parts[2].parse().map_err(|_| bad("bad bias".into()))?);
    }
    Ok(HyperbolicEmbedding {
        vocab,
        planes,
        points,
        ctx_points,
        b,
        b_ctx,
    })
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let rx = average_ranks(xs);
    let ry = average_ranks(ys);
    let n = xs.len() as f64;
    let mean = (n + 1.0) / 2.0;
    let mut num = 0.0;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        num += (a - mean) * (b - mean);
        var_x += (a - mean) * (a - mean);
        var_y += (b - mean) * (b - mean);
    }
    if var_x == 0.0 || var_y == 0.0 {
        return None;
    }
    Some(num / (var_x * var_y).sqrt())
}

fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = rank;
        }
        i = j + 1;
    }
    ranks
}
