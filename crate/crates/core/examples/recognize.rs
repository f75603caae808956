//! Build the recognizer PDA of the running example and run it on a few
//! token streams.
//!
//! ```bash
//! cargo run --example recognize
//! ```

use vpg::corpus;
use vpg::grammar::parse_vpg;
use vpg::grammar::syntax::term_id;
use vpg::RecognizerPda;

fn main() {
    let g = parse_vpg(corpus::FIG2_VPG).expect("bundled grammar parses");
    let pda = RecognizerPda::build(&g);
    println!("{}", g.to_text());
    println!("{} states, {} transitions", pda.states().len(), pda.num_transitions());
    for (id, s) in pda.states().iter().enumerate() {
        println!("  S{id} = {}", s.display(g.symbols()));
    }

    let inputs: [&[&str]; 5] = [
        &["'a'", "'c'", "'d'", "'b'"],
        &["'a'", "'c'", "'c'", "'b'", "'a'", "'c'", "'d'", "'b'"],
        &[],
        &["'a'", "'c'", "'b'"],
        &["'a'", "'c'", "'d'"],
    ];
    for w in inputs {
        let ids: Vec<_> = w.iter().map(|n| term_id(&g, n)).collect();
        match pda.recognize(&g, &ids) {
            Ok(cfg) => println!("{:<40} accept in S{}", w.join(" "), cfg.state),
            Err(r) => println!("{:<40} reject at {}: {:?}", w.join(" "), r.position, r.reason),
        }
    }
}
