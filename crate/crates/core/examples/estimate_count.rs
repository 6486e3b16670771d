//! Estimate a triangle count from a single vertex sample.

use motif_ht::copies::DEFAULT_COPY_CAP;
use motif_ht::estimator::{estimate, sample_vertices};
use motif_ht::generators::{Ensemble, EnsembleSpec};
use motif_ht::{enumerate_copies, Motif};

fn main() -> motif_ht::Result<()> {
    let g = EnsembleSpec::new(Ensemble::ErdosRenyi { n: 2000, q: 0.02 }, 1).generate()?;
    let copies = enumerate_copies(&g, &Motif::parse("triangle")?, DEFAULT_COPY_CAP)?;
    println!("true count N = {}", copies.len());
    for (p, seed) in [(0.2, 1), (0.4, 2), (0.6, 3)] {
        let mask = sample_vertices(g.n(), p, seed)?;
        let r = estimate(&copies, &mask, 0.05)?;
        println!(
            "p={p}: T={:<5} N_hat={:<9.1} sigma_hat={:<8.2} 95% CI [{:.1}, {:.1}] covers: {}",
            r.t,
            r.n_hat,
            r.sigma_plus,
            r.ci_lo,
            r.ci_hi,
            r.covers(copies.len() as f64)
        );
    }
    Ok(())
}
