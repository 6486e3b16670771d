//! Exact variance, fourth moment and Wasserstein bound, next to a Monte
//! Carlo check.

use motif_ht::copies::DEFAULT_COPY_CAP;
use motif_ht::generators::{Ensemble, EnsembleSpec};
use motif_ht::moments::{moment_report, MomentMode, DEFAULT_QUAD_CAP};
use motif_ht::{enumerate_copies, Motif};

fn main() -> motif_ht::Result<()> {
    let g = EnsembleSpec::new(Ensemble::ErdosRenyi { n: 25, q: 0.15 }, 4).generate()?;
    let copies = enumerate_copies(&g, &Motif::parse("wedge")?, DEFAULT_COPY_CAP)?;
    let p = 0.3;
    println!("{} wedges", copies.len());
    let exact = moment_report(&copies, p, MomentMode::Exact, 0, 0, DEFAULT_QUAD_CAP)?;
    println!(
        "Var[T] = {:.4}, beta = {:.4} (bracket holds: {})",
        exact.var_t, exact.beta, exact.beta_holds
    );
    println!(
        "E[Z^4] = {:.4}, E[W] = {:.4e}, Wasserstein ratio = {:.4}",
        exact.fourth_moment,
        exact.expected_w.unwrap_or(f64::NAN),
        exact.wass_ratio.unwrap_or(f64::NAN)
    );
    let mc = moment_report(&copies, p, MomentMode::MonteCarlo, 20_000, 7, DEFAULT_QUAD_CAP)?;
    println!(
        "Monte Carlo E[Z^4] = {:.4} +/- {:.4}",
        mc.fourth_moment,
        mc.fourth_moment_se.unwrap_or(f64::NAN)
    );
    Ok(())
}
