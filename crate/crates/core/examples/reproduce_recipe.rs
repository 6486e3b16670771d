//! Run a named recipe and print its headline metrics.
//!
//! ```bash
//! cargo run --release --example reproduce_recipe -- ex52
//! ```

use motif_ht::harness::{recipe, reproduce, RecipeName, DEFAULT_SEED};

fn main() -> motif_ht::Result<()> {
    let name: RecipeName = std::env::args().nth(1).as_deref().unwrap_or("ex52").parse()?;
    let r = recipe(name, DEFAULT_SEED);
    println!("{}: {}", name.as_str(), r.description);
    println!("expect: {}", r.expectation);
    let report = reproduce(name, DEFAULT_SEED)?;
    for (k, v) in &report.metrics {
        println!("  {k:<24} {v:.4}");
    }
    Ok(())
}
