//! The constants of the MTLM analysis and the lower-bound game.

use migrationlab::algorithms::paper_constants;

fn main() {
    let p = paper_constants();
    println!("c0    = {:.12}  (3c^3 - 8c - 4 = {:.1e})", p.c0, p.c0_residual());
    println!("R0    = {:.12}  (R^3 - 5R^2 + 3R + 3 = {:.1e})", p.r0, p.r0_residual());
    println!("alpha = {:.12}", p.alpha);
    println!("c_T   = {:.12}", p.c_t);
    println!("t     = {:.12}", p.t_lin);
}
