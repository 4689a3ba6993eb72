//! The dynamic program for the offline optimum against exhaustive search,
//! and the OPT lower bound on a short segment.

use migrationlab::instance::{random_instance, RandomKind};
use migrationlab::opt::{check_opt_lower_bound, opt_bruteforce, opt_dp};

fn main() -> migrationlab::Result<()> {
    for seed in 0..5 {
        let inst = random_instance(4, 2, 6, seed, RandomKind::RandomGraphShortestPath)?;
        let dp = opt_dp(&inst);
        let brute = opt_bruteforce(&inst.space, inst.start, &inst.requests);
        println!("seed {seed}: dp = {:.6}  exhaustive = {:.6}", dp.cost, brute);
    }
    let inst = random_instance(5, 4, 8, 11, RandomKind::EuclideanSample)?;
    let opt = opt_dp(&inst);
    let slack = check_opt_lower_bound(&opt.trajectory, &inst.requests, &inst.space)?;
    println!("lower bound slack on the optimal trajectory: {slack:.6}");
    Ok(())
}
