//! Exhaustive cross-check against the reference semantics: for every word
//! up to a length bound, recognizer acceptance equals big-step derivability
//! and the extracted trees equal the big-step trees.
//!
//! ```bash
//! cargo run --release --example oracle_check          # |w| <= 6
//! cargo run --release --example oracle_check -- 8
//! ```

use std::collections::BTreeSet;

use vpg::corpus;
use vpg::grammar::{parse_vpg, TermId};
use vpg::oracle::bigstep_trees;
use vpg::Compiled;

fn words(n_terms: usize, max: usize) -> impl Iterator<Item = Vec<TermId>> {
    (0..=max).flat_map(move |len| {
        (0..n_terms.pow(len as u32)).map(move |mut k| {
            (0..len)
                .map(|_| {
                    let t = TermId((k % n_terms) as u32);
                    k /= n_terms;
                    t
                })
                .collect()
        })
    })
}

fn main() {
    let max: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(6);
    for (name, src) in corpus::vpg_grammars() {
        let c = Compiled::from_vpg(parse_vpg(src).unwrap());
        let g = &c.vpg;
        let (mut checked, mut accepted, mut mismatches) = (0, 0, 0);
        for w in words(g.symbols().num_terminals(), max) {
            let expect = bigstep_trees(g, &w);
            let got: BTreeSet<_> = match c.parse(&w) {
                Ok(p) => c.index(&p.forest).trees(usize::MAX).into_iter().collect(),
                Err(_) => BTreeSet::new(),
            };
            let recognized = c.recognize(&w).is_ok();
            if got != expect || recognized != !expect.is_empty() {
                mismatches += 1;
            }
            checked += 1;
            accepted += usize::from(recognized);
        }
        println!("{name:<16} {checked:>7} words, {accepted:>5} accepted, {mismatches} mismatches");
    }
}
