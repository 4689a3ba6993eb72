//! MTLM on the two geometries where its analysis is tight.

use migrationlab::algorithms::{paper_constants, run_online, Mtlm};
use migrationlab::instance::{bipartite_instance, linear_instance};
use migrationlab::opt::opt_dp;

fn main() -> migrationlab::Result<()> {
    let p = paper_constants();
    let d = 1000;
    let lin = linear_instance(p.c0, d)?;
    let run = run_online(&mut Mtlm::new(d), &lin)?;
    println!(
        "linear:    {} requests, MTLM ends at {}, ALG = {:.1}, OPT = {:.1}",
        lin.requests.len(),
        lin.space.name(*run.positions.last().unwrap()),
        run.total_cost(),
        opt_dp(&lin).cost
    );
    let bip = bipartite_instance(20, 1.0, p.alpha, p.c0, d)?;
    let run = run_online(&mut Mtlm::new(d), &bip)?;
    println!(
        "bipartite: {} requests, MTLM ends at {}, ALG = {:.1}, OPT = {:.1}",
        bip.requests.len(),
        bip.space.name(*run.positions.last().unwrap()),
        run.total_cost(),
        opt_dp(&bip).cost
    );
    Ok(())
}
