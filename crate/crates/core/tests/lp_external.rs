//! Cross-checks the built-in simplex against an independent solver fed the
//! exported model.

use std::io::Cursor;

use migrationlab::lp::{
    build_dlm_lp, build_mtlm_lp, export_lp, export_mps, parse_lp, solve_lp, Direction, DlmLpOptions, DlmLpParams,
    LpModel, MtlmLpParams,
};
use minilp::{MpsFile, OptimizationDirection};

fn external_objective(model: &LpModel) -> f64 {
    let dir = match model.direction {
        Direction::Maximize => OptimizationDirection::Maximize,
        Direction::Minimize => OptimizationDirection::Minimize,
    };
    let mps = MpsFile::parse(Cursor::new(export_mps(model)), dir).expect("MPS parses");
    assert_eq!(mps.variables.len(), model.vars.len());
    mps.problem.solve().expect("external solve").objective()
}

fn shipped_models() -> Vec<LpModel> {
    let no_short = DlmLpOptions { include_short: false, ..Default::default() };
    vec![
        build_mtlm_lp(&MtlmLpParams::default()),
        build_mtlm_lp(&MtlmLpParams { phi: 3.5, ..Default::default() }),
        build_dlm_lp(&DlmLpParams::default(), &DlmLpOptions::default()),
        build_dlm_lp(&DlmLpParams::default(), &DlmLpOptions { multiset_pairs: false, ..Default::default() }),
        build_dlm_lp(&DlmLpParams::default(), &DlmLpOptions { share_opt_start: false, ..Default::default() }),
        build_dlm_lp(&DlmLpParams::with_beta2(0.25), &DlmLpOptions::default()),
        build_dlm_lp(&DlmLpParams { phi: 3.5, ..Default::default() }, &no_short),
    ]
}

#[test]
fn internal_and_external_solvers_agree() {
    for m in shipped_models() {
        let ours = solve_lp(&m);
        assert!(ours.is_optimal(), "{}: {:?}", m.name, ours.message);
        let theirs = external_objective(&m);
        assert!((ours.objective_value - theirs).abs() <= 1e-6, "{}: {} vs {}", m.name, ours.objective_value, theirs);
    }
}

#[test]
fn lp_text_survives_a_round_trip_into_the_external_solver() {
    let m = build_mtlm_lp(&MtlmLpParams::default());
    let parsed = parse_lp(&export_lp(&m)).unwrap();
    let theirs = external_objective(&parsed);
    assert!((theirs - 4.086130197651491).abs() < 1e-6);
}
