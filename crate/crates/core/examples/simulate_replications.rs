//! Repeat sampling on a fixed graph and summarize N_hat/N and Z.

use motif_ht::generators::Ensemble;
use motif_ht::harness::{records_csv, run_experiment, ExperimentSpec};

fn main() -> motif_ht::Result<()> {
    let mut spec = ExperimentSpec::ensemble(Ensemble::ErdosRenyi { n: 500, q: 0.05 }, 1, "triangle", 0.3, 2000);
    spec.master_seed = 11;
    let s = run_experiment(&spec)?;
    println!("N = {:?}, Var[T] = {:?}", s.n, s.var_t);
    println!("mean N_hat/N = {:.4}, sd = {:.4}", s.mean_ratio, s.sd_ratio);
    println!("E[Z^2] = {:.3}, E[Z^4] = {:.3}, KS = {:.4}", s.mean_z2, s.mean_z4, s.ks);
    if let Some(c) = s.coverage {
        println!("interval coverage = {c:.3}");
    }
    for t in &s.truncated {
        println!("M={:<5} P(T != T_trunc) = {:.4} <= {:.4}", t.m, t.p_differ, t.bound);
    }
    for w in &s.warnings {
        println!("warning: {w}");
    }
    let csv = records_csv(&spec, &s.records);
    println!("{}", csv.lines().take(3).collect::<Vec<_>>().join("\n"));
    Ok(())
}
