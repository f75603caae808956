//! Parse `<a c d b>` with the running example: the parser's forest, the
//! pruned forest and the single extracted tree.
//!
//! ```bash
//! cargo run --example parse_forest
//! ```

use vpg::corpus;
use vpg::extract::display_tree;
use vpg::grammar::parse_vpg;
use vpg::grammar::syntax::term_id;
use vpg::Compiled;

fn main() {
    let c = Compiled::from_vpg(parse_vpg(corpus::FIG2_VPG).expect("bundled grammar parses"));
    let g = &c.vpg;
    let w: Vec<_> = ["'a'", "'c'", "'d'", "'b'"].iter().map(|n| term_id(g, n)).collect();

    println!(
        "parser PDA: {} states, {} transitions; pruner PDA: {} states, {} transitions",
        c.parser.states().len(),
        c.parser.num_transitions(),
        c.pruner.states().len(),
        c.pruner.num_transitions()
    );

    let parsed = c.parse(&w).expect("input is in the language");
    println!("\nforest from the parser PDA:");
    print!("{}", c.parser.materialize(&parsed.raw).display(g.symbols()));
    println!("\npruned forest:");
    print!("{}", parsed.forest.display(g.symbols()));

    let idx = c.index(&parsed.forest);
    println!("\n{} tree(s)", idx.count());
    for t in idx.trees(10) {
        println!("{}", display_tree(g.symbols(), &t));
    }
}
