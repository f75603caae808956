//! Tagged CFG to VPG translation.
//!
//! Stages: [`desugar`] removes regular operators, [`simple`] replaces every
//! bracketed substring by a matched token over a nonterminal, [`validate`]
//! checks the dependency graph, [`linear`] eliminates sinks until every rule
//! is linear, and [`emit`] chains linear rules into VPG rules. Semantic
//! actions are composed along the way so VPG trees map back to trees of the
//! input grammar.

pub mod desugar;
pub mod emit;
pub mod linear;
pub mod simple;
pub mod validate;

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::actions::{ActionExpr, ActionTable};
use crate::grammar::{GrammarError, NtId, Symbols, TaggedCfg, TermId, Vpg};

pub use desugar::desugar_regex_ops;
pub use emit::linear_to_vpg;
pub use linear::to_linear_form;
pub use simple::to_simple_form;
pub use validate::{dependency_graph, validate, DepEdge, DepKind, ValidationError};

/// Default cap on sink-elimination rounds.
pub const DEFAULT_ITER_CAP: usize = 10_000;

/// A right-hand-side item after bracket replacement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SItem {
    Term(TermId),
    Nt(NtId),
    Matched { call: TermId, inner: NtId, ret: TermId },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SRule {
    pub head: NtId,
    pub items: Vec<SItem>,
    /// `None` for generated abbreviations, whose values stay on the stack.
    pub action: Option<ActionExpr>,
}

impl SRule {
    /// `ε`, `t1..tk` or `t1..tk L'` with every `ti` a terminal or matched token.
    pub fn is_linear(&self) -> bool {
        match self.items.split_last() {
            None => true,
            Some((_, init)) => {
                !matches!(self.items[0], SItem::Nt(_)) && init.iter().all(|i| !matches!(i, SItem::Nt(_)))
            }
        }
    }
}

/// A rule set in simple or linear form together with the abbreviation map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleSet {
    pub symbols: Symbols,
    pub rules: Vec<SRule>,
    pub start: NtId,
    /// Generated nonterminal for each abbreviated string.
    pub abbrev: BTreeMap<Vec<SItem>, NtId>,
}

impl RuleSet {
    pub fn rules_of(&self, head: NtId) -> impl Iterator<Item = &SRule> {
        self.rules.iter().filter(move |r| r.head == head)
    }

    pub fn display_items(&self, items: &[SItem]) -> String {
        let s = &self.symbols;
        items
            .iter()
            .map(|i| match *i {
                SItem::Term(t) => s.display_term(t),
                SItem::Nt(n) => s.nt_name(n).to_string(),
                SItem::Matched { call, inner, ret } => {
                    format!("{} {} {}", s.display_term(call), s.nt_name(inner), s.display_term(ret))
                }
            })
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn display_rule(&self, r: &SRule) -> String {
        let body = self.display_items(&r.items);
        let mut out = self.symbols.nt_name(r.head).to_string();
        out.push_str(" =");
        if !body.is_empty() {
            out.push(' ');
            out.push_str(&body);
        }
        if let Some(a) = &r.action {
            out.push_str(&format!(" @{a}"));
        }
        out
    }

    /// One rule per line; generated nonterminals are listed first as comments.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (items, n) in &self.abbrev {
            let body = if items.is_empty() { "ε".to_string() } else { self.display_items(items) };
            out.push_str(&format!("# {} := {}\n", self.symbols.nt_name(*n), body));
        }
        for r in &self.rules {
            out.push_str(&self.display_rule(r));
            out.push('\n');
        }
        out
    }

    pub(crate) fn nullable(&self) -> Vec<bool> {
        let mut set = vec![false; self.symbols.num_nonterminals()];
        loop {
            let mut changed = false;
            for r in &self.rules {
                if !set[r.head.index()] && r.items.iter().all(|i| matches!(i, SItem::Nt(n) if set[n.index()])) {
                    set[r.head.index()] = true;
                    changed = true;
                }
            }
            if !changed {
                return set;
            }
        }
    }

    /// Abbreviation for `items`, created with an action-free rule if new.
    pub(crate) fn abbreviate(&mut self, items: Vec<SItem>) -> (NtId, bool) {
        if let Some(&n) = self.abbrev.get(&items) {
            return (n, false);
        }
        let n = self.symbols.fresh_nonterminal();
        self.abbrev.insert(items, n);
        (n, true)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TranslateError {
    #[error(transparent)]
    Grammar(#[from] GrammarError),
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error("linear-form rewriting did not finish within {0} rounds")]
    IterationCapExceeded(usize),
    #[error("internal error: {0}")]
    InternalNonSink(String),
}

/// Every stage of one translation.
#[derive(Debug, Clone)]
pub struct Translation {
    pub desugared: TaggedCfg,
    pub simple: RuleSet,
    pub linear: RuleSet,
    pub vpg: Vpg,
    pub actions: ActionTable,
}

impl Translation {
    pub fn stage_texts(&self) -> [(&'static str, String); 4] {
        [
            ("desugared.tcfg", self.desugared.to_text()),
            ("simple.tcfg", self.simple.to_text()),
            ("linear.tcfg", self.linear.to_text()),
            ("out.vpg", self.vpg.to_text()),
        ]
    }
}

impl fmt::Display for Translation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (name, text) in self.stage_texts() {
            writeln!(f, "## {name}\n{text}")?;
        }
        write!(f, "## actions\n{}", self.actions.to_sidecar())
    }
}

/// Desugar, simple form, validate, linear form, emit.
pub fn translate(g: &TaggedCfg, iter_cap: usize) -> Result<Translation, TranslateError> {
    let desugared = desugar_regex_ops(g);
    let simple = to_simple_form(&desugared)?;
    validate(&simple)?;
    let linear = to_linear_form(&simple, iter_cap)?;
    let (vpg, actions) = linear_to_vpg(&linear)?;
    Ok(Translation { desugared, simple, linear, vpg, actions })
}

/// Front half of [`translate`]: everything up to validation.
pub fn check(g: &TaggedCfg) -> Result<RuleSet, TranslateError> {
    let simple = to_simple_form(&desugar_regex_ops(g))?;
    validate(&simple)?;
    Ok(simple)
}

/// Iteration cap from `VPG_ITER_CAP`, else the default.
pub fn iter_cap_from_env() -> usize {
    std::env::var("VPG_ITER_CAP").ok().and_then(|v| v.parse().ok()).unwrap_or(DEFAULT_ITER_CAP)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::grammar::parse_tagged_cfg;
    use crate::oracle::cfg_derive_enumerate;
    use crate::recognizer::RecognizerPda;

    /// All words over the grammar's terminals up to `max` tokens.
    fn words(n_terms: usize, max: usize) -> Vec<Vec<TermId>> {
        let mut out = vec![Vec::new()];
        let mut layer = vec![Vec::new()];
        for _ in 0..max {
            let mut next = Vec::new();
            for w in &layer {
                for t in 0..n_terms {
                    let mut v: Vec<TermId> = w.clone();
                    v.push(TermId(t as u32));
                    next.push(v);
                }
            }
            out.extend(next.iter().cloned());
            layer = next;
        }
        out
    }

    fn assert_equivalent(src: &str, max: usize) {
        let g = parse_tagged_cfg(src).unwrap();
        let t = translate(&g, DEFAULT_ITER_CAP).unwrap();
        t.vpg.check_wellformed().unwrap();
        let pda = RecognizerPda::build(&t.vpg);
        for w in words(g.symbols.num_terminals(), max) {
            let expect = cfg_derive_enumerate(&g, &w, max).unwrap();
            let mapped: Vec<TermId> =
                w.iter().map(|&x| t.vpg.term(g.symbols.term_name(x)).expect("terminal kept")).collect();
            assert_eq!(pda.accepts(&t.vpg, &mapped), expect, "{src} on {w:?}");
        }
    }

    #[test]
    fn appendix_f_stages() {
        let g = parse_tagged_cfg(corpus::APPENDIX_F_TCFG).unwrap();
        let t = translate(&g, DEFAULT_ITER_CAP).unwrap();
        assert_eq!(t.simple.to_text(), "# _g1 := a e\nl = a <'a' _g1 'b'> e @l⁶\n_g1 = a e\na = 'c' e @a²\ne = @e⁰\n");
        assert_eq!(
            t.linear.to_text(),
            "# _g1 := a e\nl = 'c' <'a' _g1 'b'> e @l⁶∘a¹\n_g1 = 'c' e @a¹\na = 'c' e @a²\ne = @e⁰\n"
        );
        assert_eq!(t.vpg.to_text(), "l = 'c' _g2 ;\n_g2 = <'a' _g1 'b'> e ;\n_g1 = 'c' e ;\na = 'c' e ;\ne = ;\n");
        assert_eq!(t.actions.to_sidecar(), "0\tl⁶∘a¹\n1\t-\n2\ta¹\n3\ta²\n4\te⁰\n");
    }

    #[test]
    fn languages_are_preserved() {
        assert_equivalent(corpus::APPENDIX_F_TCFG, 6);
        assert_equivalent(corpus::RIGHT_REC_TCFG, 5);
        assert_equivalent("l = a 'd' ; a = 'c' ;", 4);
        assert_equivalent("l = <'a' <'a' 'c' 'b'> 'b'> ;", 6);
        assert_equivalent("l = 'x' ('y' | <'a' l 'b'>)* 'z'? ;", 6);
        assert_equivalent("l = a b 'c' ; a = 'x' | ; b = 'y' b | ;", 5);
        assert_equivalent("l = <'a' 'b'> l | 'c' ;", 6);
        assert_equivalent("l = a ; a = b 'x' | 'y' ; b = 'z' | ;", 4);
    }

    #[test]
    fn abbreviation_is_shared() {
        let g = parse_tagged_cfg("l = <'a' m 'x' 'b'> <'a' m 'x' 'b'> ; m = 'c' ;").unwrap();
        let s = to_simple_form(&desugar_regex_ops(&g)).unwrap();
        assert_eq!(s.abbrev.len(), 1);
        assert_eq!(s.rules.len(), 3);
    }

    #[test]
    fn one_step_expansion_composes_actions() {
        let g = parse_tagged_cfg("l = a 'd' ; a = 'c' ;").unwrap();
        let t = translate(&g, DEFAULT_ITER_CAP).unwrap();
        assert_eq!(t.linear.display_rule(&t.linear.rules[0]), "l = 'c' 'd' @l²∘a¹");
        assert_eq!(t.vpg.to_text(), "l = 'c' _g1 ;\n_g1 = 'd' _g2 ;\n_g2 = ;\na = 'c' _g3 ;\n_g3 = ;\n");
    }

    #[test]
    fn iteration_cap() {
        let g = parse_tagged_cfg("l = a 'd' ; a = 'c' ;").unwrap();
        assert_eq!(translate(&g, 0).unwrap_err(), TranslateError::IterationCapExceeded(0));
    }

    #[test]
    fn corpus_grammars_translate() {
        for (name, src) in corpus::tagged_grammars() {
            let g = parse_tagged_cfg(src).unwrap();
            let t = translate(&g, DEFAULT_ITER_CAP).unwrap_or_else(|e| panic!("{name}: {e}"));
            t.vpg.check_wellformed().unwrap();
            assert_eq!(t.actions.len(), t.vpg.rules().len());
        }
    }
}
