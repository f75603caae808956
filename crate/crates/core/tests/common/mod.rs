//! Helpers shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use vpg::corpus;
use vpg::extract::ParseTree;
use vpg::grammar::{parse_tagged_cfg, parse_vpg, TermId};
use vpg::translate::{translate, DEFAULT_ITER_CAP};
use vpg::Compiled;

/// Every word over `0..n_terms` with length at most `max`, shortest first.
pub fn words(n_terms: usize, max: usize) -> impl Iterator<Item = Vec<TermId>> {
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

pub fn names(c: &Compiled, w: &[TermId]) -> String {
    let s = c.vpg.symbols();
    w.iter().map(|&t| s.display_term(t)).collect::<Vec<_>>().join(" ")
}

pub fn ids(c: &Compiled, w: &[&str]) -> Vec<TermId> {
    w.iter().map(|n| c.vpg.term(n).unwrap_or_else(|| panic!("no terminal {n}"))).collect()
}

pub fn translated(src: &str) -> Compiled {
    let t = translate(&parse_tagged_cfg(src).unwrap(), DEFAULT_ITER_CAP).unwrap();
    Compiled::new(t.vpg, t.actions)
}

/// The grammars of the exhaustive sweep, each with at most 4 terminals.
pub fn sweep_grammars() -> Vec<(&'static str, Compiled)> {
    let mut out: Vec<(&'static str, Compiled)> =
        corpus::vpg_grammars().into_iter().map(|(n, s)| (n, Compiled::from_vpg(parse_vpg(s).unwrap()))).collect();
    out.push(("appendix_f_translated", translated(corpus::APPENDIX_F_TCFG)));
    out
}

/// Trees found by the pipeline, empty on rejection.
pub fn pipeline_trees(c: &Compiled, w: &[TermId]) -> BTreeSet<ParseTree> {
    match c.parse(w) {
        Ok(p) => c.index(&p.forest).trees(usize::MAX).into_iter().collect(),
        Err(_) => BTreeSet::new(),
    }
}
