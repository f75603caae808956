//! Grammars with pending calls and returns: acceptance with a nonempty
//! stack, and why the acceptance test must look at the top frame.
//!
//! ```bash
//! cargo run --example general_vpg
//! ```

use vpg::corpus;
use vpg::grammar::parse_vpg;
use vpg::grammar::syntax::term_id;
use vpg::recognizer::literal_general_acceptance;
use vpg::{Compiled, Vpg};

fn run(name: &str, src: &str, w: &[&str]) {
    let c = Compiled::from_vpg(parse_vpg(src).unwrap());
    let g: &Vpg = &c.vpg;
    let ids: Vec<_> = w.iter().map(|n| term_id(g, n)).collect();
    print!("{name:<16} {:<36}", w.join(" "));
    match c.recognizer.run(g, &ids) {
        Err(r) => println!("reject at {}", r.position),
        Ok(cfg) => {
            let ok = c.recognizer.is_accepting(g, &cfg);
            let literal = literal_general_acceptance(&c.recognizer, g, &cfg);
            println!("{} (literal test: {})", if ok { "accept" } else { "reject" }, literal);
            println!("{:<53}stack {}", "", c.recognizer.display_stack(g, &cfg.stack));
            if ok {
                let trees = c.parse(&ids).map(|p| c.index(&p.forest).count()).unwrap_or(0);
                println!("{:<53}{trees} tree(s)", "");
            }
        }
    }
}

fn main() {
    run("appendix_b", corpus::APPENDIX_B_VPG, &["'a'", "'b'", "'a'", "'a'", "'a'", "'b'", "'b'"]);
    run("pending_calls", corpus::PENDING_CALLS_VPG, &["'a'"]);
    run("pending_calls", corpus::PENDING_CALLS_VPG, &["'a'", "'a'", "'a'"]);
    run("pending_returns", corpus::PENDING_RETURNS_VPG, &["'b'", "'b'"]);
    run("mixed", corpus::MIXED_VPG, &["'b'", "'a'", "'c'", "'b'", "'a'"]);
    // The literal test accepts here although no derivation exists.
    run("acceptance_trap", corpus::ACCEPTANCE_TRAP_VPG, &["'a'"]);
}
