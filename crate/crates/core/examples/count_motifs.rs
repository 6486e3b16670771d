//! Count the standard motifs in a random graph and inspect local counts.

use motif_ht::copies::DEFAULT_COPY_CAP;
use motif_ht::generators::{Ensemble, EnsembleSpec};
use motif_ht::{enumerate_copies, motif_count, Motif};

fn main() -> motif_ht::Result<()> {
    let g = EnsembleSpec::new(Ensemble::ErdosRenyi { n: 400, q: 0.05 }, 3).generate()?;
    for name in ["edge", "wedge", "triangle", "path4", "cycle4", "clique4", "star_3", "0-1,1-2,2-0,2-3"] {
        let motif = Motif::parse(name)?;
        println!(
            "{name:<16} h={} |Aut|={:<3} m(H)={:<5} N={}",
            motif.order(),
            motif.automorphism_count(),
            motif.balancedness().to_string(),
            motif_count(&g, &motif)
        );
    }

    // local counts t(A): copies whose vertex set contains A
    let tri = Motif::parse("triangle")?;
    let copies = enumerate_copies(&g, &tri, DEFAULT_COPY_CAP)?;
    let busiest = (0..g.n()).max_by_key(|&v| copies.containing(v).len()).unwrap_or(0);
    println!(
        "vertex {busiest} lies in {} of {} triangles",
        copies.local_count(&[busiest as u32])?,
        copies.len()
    );
    let mut total = 0u128;
    copies.for_each_local_count(|_, t| total += t as u128);
    println!("sum of all local counts = {total} = 7 * N");
    Ok(())
}
