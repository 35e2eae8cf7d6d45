//! Regenerate the bundled mini corpus.
//!
//! ```bash
//! cargo run -p argot --example generate_corpus -- data/mini-corpus [seed]
//! ```

use std::path::PathBuf;

fn main() {
    let mut args = std::env::args().skip(1);
    let out: PathBuf = args
        .next()
        .unwrap_or_else(|| "data/mini-corpus".to_string())
        .into();
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(42);
    let corpus = argot::synthetic::mini_corpus(seed);
    corpus.write_to(&out).expect("writing corpus tree");
    let definitions: usize = corpus.articles.iter().map(|a| a.definitions.len()).sum();
    println!(
        "wrote {} articles with {definitions} definitions under {}",
        corpus.articles.len(),
        out.display()
    );
}
