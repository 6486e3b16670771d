//! Sweep the sampling probability across the ER threshold for triangles.

use motif_ht::generators::Ensemble;
use motif_ht::harness::{threshold_sweep, ExperimentSpec, SweepAxis, SweepSpec};

fn main() -> motif_ht::Result<()> {
    let mut base = ExperimentSpec::ensemble(Ensemble::ErdosRenyi { n: 600, q: 0.1 }, 1, "triangle", 0.1, 300);
    base.statistics.truncation = false;
    base.statistics.keep_reps = false;
    let grid = vec![0.02, 0.05, 0.1, 0.2, 0.4];
    let report = threshold_sweep(&SweepSpec { base, axis: SweepAxis::P(grid) })?;
    println!("{:>6} {:>10} {:>8} {:>8} {:>8}", "p", "covariate", "P(T=0)", "mean", "KS");
    for pt in &report.points {
        match &pt.summary {
            Some(s) => println!(
                "{:>6} {:>10.3} {:>8.3} {:>8.3} {:>8.3}",
                pt.p, pt.covariate, s.frac_t_zero, s.mean_ratio, s.ks
            ),
            None => println!("{:>6} skipped", pt.p),
        }
    }
    Ok(())
}
