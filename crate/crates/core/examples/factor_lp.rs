//! Builds and solves the MTLM and DLM factor-revealing LPs.

use migrationlab::lp::{
    build_dlm_lp, build_mtlm_lp, export_lp, extract_witness, solve_lp, DlmLpOptions, DlmLpParams, MtlmLpParams,
};

fn main() -> migrationlab::Result<()> {
    let mtlm = build_mtlm_lp(&MtlmLpParams::default());
    let sol = solve_lp(&mtlm);
    println!("{}", extract_witness(&sol, &mtlm)?);

    let dlm = build_dlm_lp(&DlmLpParams::default(), &DlmLpOptions::default());
    let sol = solve_lp(&dlm);
    println!("dlm: {:?} {:.9} after {} pivots", sol.status, sol.objective_value, sol.iterations);

    let printed = build_dlm_lp(&DlmLpParams::with_beta2(0.25), &DlmLpOptions::default());
    println!("dlm with beta2 = 0.25: {:.9}", solve_lp(&printed).objective_value);

    let no_short = build_dlm_lp(&DlmLpParams::default(), &DlmLpOptions { include_short: false, ..Default::default() });
    println!("dlm without the short block: {:?}", solve_lp(&no_short).status);

    let text = export_lp(&mtlm);
    println!("LP text of the MTLM model: {} lines", text.lines().count());
    Ok(())
}
