//! The bound on fixed-phase algorithms as a function of the phase factor,
//! and the closed-path gains of the state graph.

use migrationlab::algorithms::paper_constants;
use migrationlab::lowerbound::{epsilon, l_of_c, min_l_of_c, verify_state_graph};

fn main() {
    let p = paper_constants();
    for c in [0.5, 1.0, p.c_t, 1.5, p.c0, 2.5, 4.0] {
        println!("L({c:.4}) = {:.6}", l_of_c(c));
    }
    let (c, v) = min_l_of_c();
    println!("min over c: L({c:.6}) = {v:.6}");
    for (l, k) in [(4, 10), (8, 50), (12, 200), (20, 2000)] {
        println!("eps({l}, {k}) = {:.6}", epsilon(l, k));
    }
    let r = verify_state_graph(12, p.c_t);
    println!("closed paths at c_T: case 2 minimum {:.6}, factor {:.6}", r.case2_min, r.case2_factor_at_ct);
}
