//! Find the vertex sets that dominate the count and see how truncation
//! removes them.

use motif_ht::copies::DEFAULT_COPY_CAP;
use motif_ht::estimator::{consistency_diagnostic, m_diagnostic, sample_vertices, truncated_statistic_m};
use motif_ht::generators::{star_plus_matching, Ensemble, EnsembleSpec};
use motif_ht::moments::exact_variance;
use motif_ht::{enumerate_copies, Motif};

fn main() -> motif_ht::Result<()> {
    // one big star next to many disjoint edges: the hub carries most wedges
    let g = star_plus_matching(300, 3000)?;
    let copies = enumerate_copies(&g, &Motif::parse("wedge")?, DEFAULT_COPY_CAP)?;
    let p = 0.05;
    let var = exact_variance(&copies, p);
    for eps in [0.01, 0.1, 1.0] {
        let r = consistency_diagnostic(&copies, p, eps)?;
        println!("eps={eps:<5} flagged {:<4} condition {:.4}", r.flagged_count, r.condition_value);
    }
    for m in [1.0, 16.0, 256.0] {
        let r = m_diagnostic(&copies, p, m, var)?;
        let top: Vec<String> = r.flagged_sets.iter().take(3).map(|f| format!("{:?}:{}", f.set, f.count)).collect();
        println!("M={m:<5} kept {:<6} flagged {:<4} e.g. {}", r.kept_copies, r.flagged_count, top.join(" "));
    }
    let mask = sample_vertices(g.n(), p, 9)?;
    let t = truncated_statistic_m(&copies, &mask, 16.0, var)?;
    println!("truncated T at M=16: {} (Z = {:.3})", t.value, t.z(var.sqrt()));

    // a dense ER graph has nothing to flag
    let er = EnsembleSpec::new(Ensemble::ErdosRenyi { n: 300, q: 0.1 }, 2).generate()?;
    let copies = enumerate_copies(&er, &Motif::parse("triangle")?, DEFAULT_COPY_CAP)?;
    let r = consistency_diagnostic(&copies, 0.3, 0.1)?;
    println!("ER triangles: flagged {} sets", r.flagged_count);
    Ok(())
}
