//! Checks every step of DLM's per-phase argument on a random run.

use migrationlab::algorithms::{run_online, Dlm};
use migrationlab::analysis::{phase_partition, verify_dlm_phase, verify_proof_chain};
use migrationlab::instance::{random_instance, RandomKind};
use migrationlab::opt::opt_dp;

fn main() -> migrationlab::Result<()> {
    let inst = random_instance(5, 8, 120, 3, RandomKind::RandomGraphShortestPath)?;
    let run = run_online(&mut Dlm::new(8)?, &inst)?;
    let opt = opt_dp(&inst);
    let part = phase_partition(&inst.space, &run, &opt)?;
    for l in &part.ledgers {
        let chain = verify_proof_chain(&inst.space, l)?;
        println!("phase {:>2} {:<5} slack {:>9.4}", l.phase_id, l.kind.as_str(), verify_dlm_phase(l));
        for s in &chain.steps {
            println!("    {:<28} {:>9.4} <= {:>9.4}", s.name, s.lhs, s.rhs);
        }
    }
    println!("{} trailing steps", part.tail_steps);
    Ok(())
}
