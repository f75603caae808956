//! Turn VPG parse trees back into trees of the source grammar through the
//! prefix-notation stack machine.
//!
//! ```bash
//! cargo run --example semantic_actions
//! ```

use vpg::corpus;
use vpg::grammar::syntax::term_id;
use vpg::grammar::{parse_tagged_cfg, parse_vpg};
use vpg::runtime::{eval_stack_machine, tree_to_stack_machine};
use vpg::translate::{translate, DEFAULT_ITER_CAP};
use vpg::Compiled;

fn main() {
    // A translated grammar carries the composed actions of its source rules.
    let t = translate(&parse_tagged_cfg(corpus::APPENDIX_F_TCFG).unwrap(), DEFAULT_ITER_CAP).unwrap();
    println!("{}", t.linear.to_text());
    let c = Compiled::new(t.vpg, t.actions);
    let w: Vec<_> = ["'c'", "'a'", "'c'", "'b'"].iter().map(|n| term_id(&c.vpg, n)).collect();
    let parsed = c.parse(&w).unwrap();
    let tree = c.index(&parsed.forest).first_tree().unwrap();
    let program = tree_to_stack_machine(&c.vpg, &c.actions, &tree, &[]).unwrap();
    println!("program: {program}");
    let value = eval_stack_machine(&program).unwrap();
    println!("result:  {}", value.to_bracket());
    println!("sexpr:   {}\n", value.to_sexpr());

    // A plain VPG gets one default action per rule; lexemes become leaves.
    let c = Compiled::from_vpg(parse_vpg(corpus::G2_VPG).unwrap());
    let w: Vec<_> = ["'c'", "'d'", "'c'", "'d'"].iter().map(|n| term_id(&c.vpg, n)).collect();
    let lexemes: Vec<Option<String>> = ["c1", "d1", "c2", "d2"].iter().map(|s| Some(s.to_string())).collect();
    let parsed = c.parse(&w).unwrap();
    for (k, tree) in c.index(&parsed.forest).trees(10).iter().enumerate() {
        println!("tree {}: {}", k + 1, c.cfg_tree(tree, &lexemes).unwrap().to_sexpr());
    }
}
