//! Plays the adversarial game against MTLM and prints each epoch.

use migrationlab::algorithms::{paper_constants, MtlmRule};
use migrationlab::lowerbound::{Game, GameParams};

fn main() -> migrationlab::Result<()> {
    let p = paper_constants();
    let mut game = Game::new(GameParams::new(12, 200, p.c0, 400))?;
    let ledger = game.run_epochs(&mut MtlmRule::default(), 5)?;
    for e in &ledger.epochs {
        let path: Vec<String> = e.plays.iter().map(|p| p.state_in.to_string()).collect();
        println!("epoch {}: {} -> S  gain/D = {:.4}", e.index, path.join(" -> "), e.gain / 400.0);
    }
    println!("ratio {:.6} against R0 - eps = {:.6}", ledger.ratio, ledger.factor);
    Ok(())
}
