//! An ambiguous grammar with 2^n trees on (cd)^n: the forest stays linear
//! while the tree count doubles.
//!
//! ```bash
//! cargo run --example ambiguity
//! ```

use vpg::corpus;
use vpg::extract::display_tree;
use vpg::grammar::parse_vpg;
use vpg::grammar::syntax::term_id;
use vpg::Compiled;

fn main() {
    let c = Compiled::from_vpg(parse_vpg(corpus::G2_VPG).unwrap());
    let g = &c.vpg;
    let (cc, d) = (term_id(g, "'c'"), term_id(g, "'d'"));
    println!("{:>4} {:>8} {:>24} {:>18}", "n", "tokens", "trees", "max edges/state");
    for n in [1usize, 2, 3, 4, 8, 16, 64, 120] {
        let w: Vec<_> = (0..n).flat_map(|_| [cc, d]).collect();
        let parsed = c.parse(&w).unwrap();
        let widest = parsed.forest.states.iter().map(|m| m.len()).max().unwrap_or(0);
        println!("{n:>4} {:>8} {:>24} {widest:>18}", w.len(), c.index(&parsed.forest).count());
    }

    let w = [cc, d, cc, d];
    let parsed = c.parse(&w).unwrap();
    println!("\ntrees of c d c d:");
    for t in c.index(&parsed.forest).trees(usize::MAX) {
        println!("  {}", display_tree(g.symbols(), &t));
    }
}
