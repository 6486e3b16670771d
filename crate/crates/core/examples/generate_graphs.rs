//! Draw graphs from each ensemble and print a few basic statistics.
//!
//! ```bash
//! cargo run --example generate_graphs
//! ```

use motif_ht::generators::{Ensemble, EnsembleSpec};

fn main() -> motif_ht::Result<()> {
    let ensembles = [
        Ensemble::ErdosRenyi { n: 1000, q: 0.01 },
        Ensemble::RandomRegular { n: 1000, d: 4 },
        Ensemble::Sbm { sizes: vec![500, 500], probs: vec![vec![0.02, 0.002], vec![0.002, 0.02]] },
        Ensemble::Graphon { grid: vec![vec![0.05, 0.01], vec![0.01, 0.02]], n: 800 },
        Ensemble::Star { n: 200 },
        Ensemble::StarsPlusCliques { r: 10, a: 100, b: 10 },
        Ensemble::StarPlusMatching { a: 100, b: 1000 },
    ];
    for ensemble in ensembles {
        let spec = EnsembleSpec::new(ensemble, 42);
        let g = spec.generate()?;
        let kind = serde_json::to_value(&spec)?["kind"].as_str().unwrap_or("?").to_string();
        println!("{kind:<20} n={:<6} m={:<7} max degree {}", g.n(), g.m(), g.max_degree());
        for note in spec.guidance() {
            println!("  note: {note}");
        }
    }

    // edge lists round-trip through the text format
    let g = EnsembleSpec::new(Ensemble::ErdosRenyi { n: 30, q: 0.1 }, 1).generate()?;
    let back = motif_ht::graph::parse_edge_list(&g.to_edge_list())?;
    assert_eq!(back, g);
    Ok(())
}
