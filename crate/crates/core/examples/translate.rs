//! Translate tagged CFGs to VPGs and show every stage.
//!
//! ```bash
//! cargo run --example translate            # the walkthrough grammar
//! cargo run --example translate -- json    # any bundled grammar by name
//! ```

use vpg::corpus;
use vpg::grammar::parse_tagged_cfg;
use vpg::translate::{translate, DEFAULT_ITER_CAP};

fn main() {
    let name = std::env::args().nth(1).unwrap_or_else(|| "appendix_f".into());
    let Some((_, src)) = corpus::tagged_grammars().into_iter().find(|(n, _)| *n == name) else {
        let names: Vec<_> = corpus::tagged_grammars().iter().map(|(n, _)| *n).collect();
        eprintln!("unknown grammar `{name}`; try one of {}", names.join(", "));
        std::process::exit(2);
    };
    let g = parse_tagged_cfg(src).expect("bundled grammar parses");
    println!("## input\n{}", g.to_text());
    match translate(&g, DEFAULT_ITER_CAP) {
        Ok(t) => {
            print!("{t}");
            println!(
                "\n{} VPG rules, {} nonterminals, mode {:?}",
                t.vpg.rules().len(),
                t.vpg.symbols().num_nonterminals(),
                t.vpg.mode()
            );
        }
        Err(e) => println!("translation failed: {e}"),
    }

    println!("\n## validator");
    for src in ["l = 'c' l | ;", "l = l 'c' | ;"] {
        let verdict = vpg::translate::check(&parse_tagged_cfg(src).unwrap());
        println!("{src:<20} {}", verdict.map_or_else(|e| e.to_string(), |_| "ok".into()));
    }
}
