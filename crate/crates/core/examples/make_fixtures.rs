//! Regenerates the committed fixture corpus and its pair list.
//!
//! cargo run -p structvec-core --example make_fixtures -- crates/core/tests/fixtures

use std::path::PathBuf;

use structvec::conll::write_conll;
use structvec::synthetic::{World, WorldConfig};

fn main() -> structvec::Result<()> {
    let dir = PathBuf::from(
        std::env::args()
            .nth(1)
            .unwrap_or_else(|| "crates/core/tests/fixtures".into()),
    );
    let world = World::new(WorldConfig::toy(), 7);
    let corpus = world.corpus_of_size(100_000, 7);
    write_conll(std::fs::File::create(dir.join("corpus100k.conll"))?, &corpus)?;
    let pairs: String = world.class_pairs().iter().map(|(a, b)| format!("{a}\t{b}\n")).collect();
    std::fs::write(dir.join("corpus100k_pairs.tsv"), pairs)?;
    println!("{} sentences", corpus.len());
    Ok(())
}
