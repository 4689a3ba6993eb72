//! Runs DLM, MTM and MTLM on one random instance and compares each with
//! the offline optimum.

use migrationlab::algorithms::{run_online, Dlm, Mtlm, Mtm, OnlinePolicy};
use migrationlab::analysis::competitive_report;
use migrationlab::instance::{random_instance, RandomKind};
use migrationlab::opt::opt_dp;

fn main() -> migrationlab::Result<()> {
    let inst = random_instance(6, 8, 400, 7, RandomKind::EuclideanSample)?;
    let opt = opt_dp(&inst);
    let policies: Vec<Box<dyn OnlinePolicy>> = vec![Box::new(Dlm::new(8)?), Box::new(Mtm::new(8)), Box::new(Mtlm::new(8))];
    println!("OPT = {:.4}", opt.cost);
    for mut p in policies {
        let run = run_online(p.as_mut(), &inst)?;
        let report = competitive_report(&[(&inst, &run, &opt)])?;
        println!(
            "{:<5} ALG = {:>9.4}  ratio = {:.4}  phases checked = {}  negative = {}",
            run.policy,
            report.total_alg,
            report.ratio.unwrap_or(f64::NAN),
            report.phases.len(),
            report.negative_slack_phases
        );
    }
    Ok(())
}
