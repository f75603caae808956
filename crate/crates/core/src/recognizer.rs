//! Recognizer PDA built from derivatives over sets of nonterminal pairs.
//!
//! A state is a set of pairs `(context, current)`: `current` is the
//! nonterminal still to be expanded, `context` the nonterminal that started
//! the innermost open call level. Calls push `[S, ⟨a]`, returns pop it.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::grammar::{Mode, NtId, Symbols, TermId, TermKind, Vpg};

pub type Pair = (NtId, NtId);

/// Canonical set of pairs, sorted by interned ids.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RecState(Vec<Pair>);

impl RecState {
    pub fn new(pairs: impl IntoIterator<Item = Pair>) -> Self {
        let set: BTreeSet<Pair> = pairs.into_iter().collect();
        RecState(set.into_iter().collect())
    }

    pub fn pairs(&self) -> &[Pair] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, p: Pair) -> bool {
        self.0.binary_search(&p).is_ok()
    }

    pub fn display(&self, symbols: &Symbols) -> String {
        let parts: Vec<String> =
            self.0.iter().map(|&(a, b)| format!("({},{})", symbols.nt_name(a), symbols.nt_name(b))).collect();
        format!("{{{}}}", parts.join(","))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StackAction {
    NoOp,
    Push,
    Pop,
}

impl fmt::Display for StackAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StackAction::NoOp => "noop",
            StackAction::Push => "push",
            StackAction::Pop => "pop",
        })
    }
}

/// `δc(S)`.
pub fn derive_plain(g: &Vpg, s: &RecState, c: TermId) -> RecState {
    RecState::new(s.pairs().iter().flat_map(|&(l1, l2)| g.linear_targets(l2, c).iter().map(move |&l3| (l1, l3))))
}

/// `δ⟨a(S)` for well-matched grammars; the caller pushes `[S, ⟨a]`.
pub fn derive_call(g: &Vpg, s: &RecState, a: TermId) -> RecState {
    RecState::new(s.pairs().iter().flat_map(|&(_, l2)| g.matching_rules(l2, a).iter().map(|&(l3, _, _)| (l3, l3))))
}

/// `δ⟨a(S)` with pending calls: matching inners plus pending-call targets.
pub fn derive_call_general(g: &Vpg, s: &RecState, a: TermId) -> RecState {
    let pending = s.pairs().iter().flat_map(|&(_, l2)| g.linear_targets(l2, a).iter().map(|&l3| (l3, l3)));
    RecState::new(derive_call(g, s, a).0.into_iter().chain(pending))
}

/// `δb⟩(S, [S1, ⟨a])` for well-matched grammars; the caller pops.
pub fn derive_ret(g: &Vpg, s: &RecState, top: (&RecState, TermId), b: TermId) -> RecState {
    let (s1, a) = top;
    let mut out = Vec::new();
    for &(l3, l4) in s.pairs() {
        if !g.is_nullable(l4) {
            continue;
        }
        for &(l1, l2) in s1.pairs() {
            for &(inner, ret, l5) in g.matching_rules(l2, a) {
                if inner == l3 && ret == b {
                    out.push((l1, l5));
                }
            }
        }
    }
    RecState::new(out)
}

/// `δb⟩` with pending symbols. With a stack top it pops and also closes
/// pending calls (`Sp1`); on an empty stack it reads a pending return (`Sp2`).
pub fn derive_ret_general(
    g: &Vpg,
    s: &RecState,
    top: Option<(&RecState, TermId)>,
    b: TermId,
) -> (RecState, StackAction) {
    match top {
        Some((s1, a)) => {
            let mut out = derive_ret(g, s, (s1, a), b).0;
            for &(l1, l2) in s1.pairs() {
                for &l3 in g.linear_targets(l2, a) {
                    for &(ctx, l4) in s.pairs() {
                        if ctx == l3 {
                            out.extend(g.linear_targets(l4, b).iter().map(|&l5| (l1, l5)));
                        }
                    }
                }
            }
            (RecState::new(out), StackAction::Pop)
        }
        None => {
            let out = s.pairs().iter().flat_map(|&(_, l2)| g.linear_targets(l2, b).iter().map(|&l3| (l3, l3)));
            (RecState::new(out), StackAction::NoOp)
        }
    }
}

/// Stack symbol `[S, ⟨a]` as (state id, call terminal).
pub type StackSym = (u32, TermId);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecognizerPda {
    pub(crate) mode: Mode,
    pub(crate) states: Vec<RecState>,
    pub(crate) index: HashMap<RecState, u32>,
    /// Plain and call transitions; the action follows from the terminal kind.
    pub(crate) step: HashMap<(u32, TermId), u32>,
    pub(crate) ret: HashMap<(u32, TermId, Option<StackSym>), (u32, StackAction)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RejectReason {
    NoTransition,
    EmptyStackOnReturn,
    NotAcceptingAtEof,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("rejected at token {position}: {reason:?}")]
pub struct Reject {
    /// 0-based token index, or the input length for end-of-input rejections.
    pub position: usize,
    pub reason: RejectReason,
}

/// Configuration `(S, T)`, stack top last.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecognizerConfig {
    pub state: u32,
    pub stack: Vec<StackSym>,
}

impl RecognizerPda {
    /// Worklist fixpoint: every state gets plain and call transitions; return
    /// transitions are added for every (state, known call-stack symbol) pair
    /// and, in general mode, for the empty stack.
    pub fn build(g: &Vpg) -> Self {
        let mut pda = RecognizerPda {
            mode: g.mode(),
            states: Vec::new(),
            index: HashMap::new(),
            step: HashMap::new(),
            ret: HashMap::new(),
        };
        let start = RecState::new([(g.start(), g.start())]);
        pda.intern(start);
        let symbols = g.symbols();
        let plains = symbols.terminals_of_kind(TermKind::Plain);
        let calls = symbols.terminals_of_kind(TermKind::Call);
        let rets = symbols.terminals_of_kind(TermKind::Return);
        let general = g.mode() == Mode::General;
        let mut done = 0usize;
        while done < pda.states.len() {
            let n = pda.states.len();
            for sid in done..n {
                let s = pda.states[sid].clone();
                for &c in &plains {
                    let t = pda.intern(derive_plain(g, &s, c));
                    pda.step.insert((sid as u32, c), t);
                }
                for &a in &calls {
                    let next = if general { derive_call_general(g, &s, a) } else { derive_call(g, &s, a) };
                    let t = pda.intern(next);
                    pda.step.insert((sid as u32, a), t);
                }
            }
            for sid in 0..n {
                for top in 0..n {
                    if sid < done && top < done {
                        continue;
                    }
                    for &a in &calls {
                        for &b in &rets {
                            let (s, s1) = (pda.states[sid].clone(), pda.states[top].clone());
                            let next = if general {
                                derive_ret_general(g, &s, Some((&s1, a)), b).0
                            } else {
                                derive_ret(g, &s, (&s1, a), b)
                            };
                            let t = pda.intern(next);
                            pda.ret.insert((sid as u32, b, Some((top as u32, a))), (t, StackAction::Pop));
                        }
                    }
                }
                if general && sid >= done {
                    for &b in &rets {
                        let s = pda.states[sid].clone();
                        let (next, act) = derive_ret_general(g, &s, None, b);
                        let t = pda.intern(next);
                        pda.ret.insert((sid as u32, b, None), (t, act));
                    }
                }
            }
            done = n;
        }
        pda
    }

    fn intern(&mut self, s: RecState) -> u32 {
        if let Some(&id) = self.index.get(&s) {
            return id;
        }
        let id = self.states.len() as u32;
        self.index.insert(s.clone(), id);
        self.states.push(s);
        id
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn states(&self) -> &[RecState] {
        &self.states
    }

    pub fn state(&self, id: u32) -> &RecState {
        &self.states[id as usize]
    }

    pub fn state_id(&self, s: &RecState) -> Option<u32> {
        self.index.get(s).copied()
    }

    pub fn num_transitions(&self) -> usize {
        self.step.len() + self.ret.len()
    }

    pub fn start(&self) -> u32 {
        0
    }

    /// Threads the configuration through every token. Entering the empty
    /// state rejects at once since no derivative leaves it.
    pub fn run(&self, g: &Vpg, tokens: &[TermId]) -> Result<RecognizerConfig, Reject> {
        let mut cfg = RecognizerConfig { state: 0, stack: Vec::new() };
        for (i, &t) in tokens.iter().enumerate() {
            self.feed(g, &mut cfg, t, i)?;
        }
        Ok(cfg)
    }

    /// One runtime transition.
    pub fn feed(&self, g: &Vpg, cfg: &mut RecognizerConfig, t: TermId, i: usize) -> Result<(), Reject> {
        let reject = |reason| Reject { position: i, reason };
        let next = match g.symbols().kind(t) {
            TermKind::Plain => *self.step.get(&(cfg.state, t)).ok_or(reject(RejectReason::NoTransition))?,
            TermKind::Call => {
                let n = *self.step.get(&(cfg.state, t)).ok_or(reject(RejectReason::NoTransition))?;
                cfg.stack.push((cfg.state, t));
                n
            }
            TermKind::Return => {
                let top = cfg.stack.last().copied();
                if top.is_none() && self.mode == Mode::WellMatched {
                    return Err(reject(RejectReason::EmptyStackOnReturn));
                }
                let &(n, act) = self.ret.get(&(cfg.state, t, top)).ok_or(reject(RejectReason::NoTransition))?;
                if act == StackAction::Pop {
                    cfg.stack.pop();
                }
                n
            }
        };
        if self.states[next as usize].is_empty() {
            return Err(reject(RejectReason::NoTransition));
        }
        cfg.state = next;
        Ok(())
    }

    /// Acceptance configuration test.
    ///
    /// Well-matched: empty stack and a pair whose current nonterminal is
    /// nullable. General: a nullable pair `(L3, L4)` whose context `L3` is
    /// either the start context (empty stack) or the target of a pending call
    /// `L2 → ⟨a L3` from some pair `(_, L2)` of the top frame.
    pub fn is_accepting(&self, g: &Vpg, cfg: &RecognizerConfig) -> bool {
        let s = &self.states[cfg.state as usize];
        match cfg.stack.last() {
            None => s.pairs().iter().any(|&(_, l)| g.is_nullable(l)),
            Some(_) if self.mode == Mode::WellMatched => false,
            Some(&(top, a)) => {
                let frame = &self.states[top as usize];
                s.pairs().iter().any(|&(l3, l4)| {
                    g.is_nullable(l4) && frame.pairs().iter().any(|&(_, l2)| g.linear_targets(l2, a).contains(&l3))
                })
            }
        }
    }

    pub fn accepts(&self, g: &Vpg, tokens: &[TermId]) -> bool {
        self.recognize(g, tokens).is_ok()
    }

    /// Runs and checks acceptance, returning the final configuration.
    pub fn recognize(&self, g: &Vpg, tokens: &[TermId]) -> Result<RecognizerConfig, Reject> {
        let cfg = self.run(g, tokens)?;
        if self.is_accepting(g, &cfg) {
            Ok(cfg)
        } else {
            Err(Reject { position: tokens.len(), reason: RejectReason::NotAcceptingAtEof })
        }
    }

    /// `[S1,⟨a]·[S2,⟨b]·⊥`, top first.
    pub fn display_stack(&self, g: &Vpg, stack: &[StackSym]) -> String {
        let mut out = String::new();
        for &(s, a) in stack.iter().rev() {
            out.push_str(&format!(
                "[{},{}]·",
                self.states[s as usize].display(g.symbols()),
                g.symbols().display_term(a)
            ));
        }
        out.push('⊥');
        out
    }
}

/// Acceptance as literally stated for general grammars: it links the
/// nullable pair to the top frame only through some unrelated pending rule.
/// Kept to document why [`RecognizerPda::is_accepting`] differs.
pub fn literal_general_acceptance(pda: &RecognizerPda, g: &Vpg, cfg: &RecognizerConfig) -> bool {
    let s = pda.state(cfg.state);
    let nullable = s.pairs().iter().any(|&(_, l)| g.is_nullable(l));
    match cfg.stack.last() {
        None => nullable,
        Some(&(top, a)) => {
            nullable && pda.state(top).pairs().iter().any(|&(_, l4)| !g.linear_targets(l4, a).is_empty())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::grammar::parse_vpg;
    use crate::grammar::syntax::{nt_id, term_id};

    fn st(g: &Vpg, pairs: &[(&str, &str)]) -> RecState {
        RecState::new(pairs.iter().map(|&(a, b)| (nt_id(g, a), nt_id(g, b))))
    }

    fn toks(g: &Vpg, names: &[&str]) -> Vec<TermId> {
        names.iter().map(|n| term_id(g, n)).collect()
    }

    #[test]
    fn fig2_derivatives() {
        let g = parse_vpg(corpus::FIG2_VPG).unwrap();
        let c = term_id(&g, "'c'");
        let d = term_id(&g, "'d'");
        let a = term_id(&g, "'a'");
        let b = term_id(&g, "'b'");
        assert_eq!(derive_plain(&g, &st(&g, &[("a", "a")]), c), st(&g, &[("a", "c"), ("a", "d")]));
        assert_eq!(derive_plain(&g, &st(&g, &[("a", "c"), ("a", "d")]), d), st(&g, &[("a", "e")]));
        assert!(derive_plain(&g, &RecState::default(), c).is_empty());
        assert_eq!(derive_call(&g, &st(&g, &[("l", "l")]), a), st(&g, &[("a", "a")]));
        let top = st(&g, &[("l", "l")]);
        assert_eq!(derive_ret(&g, &st(&g, &[("a", "e")]), (&top, a), b), st(&g, &[("l", "l")]));
        assert!(derive_ret(&g, &st(&g, &[("a", "c")]), (&top, a), b).is_empty());
        assert!(derive_ret(&g, &RecState::default(), (&top, a), b).is_empty());
    }

    #[test]
    fn two_matching_rules_share_a_call() {
        let g = parse_vpg("l = <A l1 B> l2 | <A l3 B> l4 ;\nl1 = ;\nl2 = ;\nl3 = ;\nl4 = ;").unwrap();
        let s = derive_call(&g, &st(&g, &[("l", "l")]), term_id(&g, "A"));
        assert_eq!(s, st(&g, &[("l1", "l1"), ("l3", "l3")]));
        assert!(derive_call(&g, &st(&g, &[("l1", "l1")]), term_id(&g, "A")).is_empty());
    }

    #[test]
    fn general_derivatives() {
        let g = parse_vpg(corpus::PENDING_CALLS_VPG).unwrap();
        let a = term_id(&g, "'a'");
        assert_eq!(derive_call_general(&g, &st(&g, &[("l", "l")]), a), st(&g, &[("l", "l")]));
        assert!(derive_call_general(&g, &RecState::default(), a).is_empty());

        let g = parse_vpg(corpus::APPENDIX_B_VPG).unwrap();
        let a = term_id(&g, "'a'");
        assert_eq!(derive_call_general(&g, &st(&g, &[("l1", "l1")]), a), st(&g, &[("l2", "l2")]));

        let g = parse_vpg("l1 = <A l2 ;\nl2 = B> l3 | ;\nl3 = ;").unwrap();
        let (s, act) = derive_ret_general(
            &g,
            &st(&g, &[("l2", "l2")]),
            Some((&st(&g, &[("l1", "l1")]), term_id(&g, "A"))),
            term_id(&g, "B"),
        );
        assert_eq!((s, act), (st(&g, &[("l1", "l3")]), StackAction::Pop));

        let g = parse_vpg(corpus::PENDING_RETURNS_VPG).unwrap();
        let b = term_id(&g, "'b'");
        assert_eq!(derive_ret_general(&g, &st(&g, &[("l", "l")]), None, b), (st(&g, &[("l", "l")]), StackAction::NoOp));
        assert_eq!(derive_ret_general(&g, &RecState::default(), None, b), (RecState::default(), StackAction::NoOp));
    }

    #[test]
    fn fig2_pda_states_and_runs() {
        let g = parse_vpg(corpus::FIG2_VPG).unwrap();
        let pda = RecognizerPda::build(&g);
        for s in
            [st(&g, &[("l", "l")]), st(&g, &[("a", "a")]), st(&g, &[("a", "c"), ("a", "d")]), st(&g, &[("a", "e")])]
        {
            assert!(pda.state_id(&s).is_some(), "{}", s.display(g.symbols()));
        }
        assert!(pda.accepts(&g, &toks(&g, &["'a'", "'c'", "'d'", "'b'"])));
        assert!(pda.accepts(&g, &[]));
        assert!(!pda.accepts(&g, &toks(&g, &["'a'", "'c'", "'b'"])));
        let err = pda.recognize(&g, &toks(&g, &["'b'"])).unwrap_err();
        assert_eq!(err.reason, RejectReason::EmptyStackOnReturn);
        let err = pda.recognize(&g, &toks(&g, &["'a'"])).unwrap_err();
        assert_eq!(err.reason, RejectReason::NotAcceptingAtEof);
    }

    #[test]
    fn closure_and_determinism() {
        for (_, text) in corpus::vpg_grammars() {
            let g = parse_vpg(text).unwrap();
            let pda = RecognizerPda::build(&g);
            let n = pda.states().len() as u32;
            assert!(pda.step.values().all(|&t| t < n));
            assert!(pda.ret.values().all(|&(t, _)| t < n));
            // the tables are maps, so determinism is structural; check they are complete
            let calls = g.symbols().terminals_of_kind(TermKind::Call).len();
            let rets = g.symbols().terminals_of_kind(TermKind::Return).len();
            let plains = g.symbols().terminals_of_kind(TermKind::Plain).len();
            assert_eq!(pda.step.len(), pda.states().len() * (calls + plains));
            let empty_top = if g.mode() == Mode::General { 1 } else { 0 };
            let per_state = rets * (pda.states().len() * calls + empty_top);
            assert_eq!(pda.ret.len(), pda.states().len() * per_state);
        }
    }

    #[test]
    fn epsilon_only_grammar_has_one_state() {
        let g = parse_vpg("l = ;").unwrap();
        let pda = RecognizerPda::build(&g);
        assert_eq!(pda.states().len(), 1);
        assert_eq!(pda.num_transitions(), 0);
    }

    #[test]
    fn pending_call_grammar_single_state() {
        let g = parse_vpg(corpus::PENDING_CALLS_VPG).unwrap();
        let pda = RecognizerPda::build(&g);
        assert_eq!(pda.states(), &[st(&g, &[("l", "l")])]);
        assert_eq!(pda.step.len(), 1);
        assert!(pda.ret.is_empty());
        let cfg = pda.recognize(&g, &toks(&g, &["'a'"])).unwrap();
        assert_eq!(pda.display_stack(&g, &cfg.stack), "[{(l,l)},<'a']·⊥");
    }

    #[test]
    fn appendix_b_accepts_its_example() {
        let g = parse_vpg(corpus::APPENDIX_B_VPG).unwrap();
        let pda = RecognizerPda::build(&g);
        let w = toks(&g, &["'a'", "'b'", "'a'", "'a'", "'a'", "'b'", "'b'"]);
        assert!(pda.accepts(&g, &w));
    }

    #[test]
    fn literal_general_acceptance_overaccepts() {
        let g = parse_vpg(corpus::ACCEPTANCE_TRAP_VPG).unwrap();
        let pda = RecognizerPda::build(&g);
        let cfg = pda.run(&g, &toks(&g, &["'a'"])).unwrap();
        assert!(literal_general_acceptance(&pda, &g, &cfg));
        assert!(!pda.is_accepting(&g, &cfg));
        assert!(pda.accepts(&g, &toks(&g, &["'a'", "'c'"])));
        assert!(pda.accepts(&g, &toks(&g, &["'a'", "'b'"])));
    }
}
