//! Parser PDA: states are sets of tagged parse-tree edges, and the sequence
//! of states visited while reading the input is the parse forest.
//!
//! A tag `true` on a nonterminal means it sits inside a matched call, where
//! only well-matched rules may be used.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::grammar::{Mode, NtId, Symbols, TermId, TermKind, Vpg};

/// Nonterminal with its well-matched tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TNt {
    pub nt: NtId,
    pub tag: bool,
}

impl TNt {
    pub fn new(nt: NtId, tag: bool) -> Self {
        TNt { nt, tag }
    }

    pub fn display(&self, s: &Symbols) -> String {
        format!("({},{})", s.nt_name(self.nt), if self.tag { 't' } else { 'f' })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ParseEdge {
    /// Helper edge of the start state; never part of a forest.
    Start(TNt),
    Plain {
        from: TNt,
        term: TermId,
        to: TNt,
    },
    /// Matching when `to.tag` is true, pending otherwise.
    Call {
        from: TNt,
        term: TermId,
        to: TNt,
    },
    /// Pending return.
    Ret {
        from: TNt,
        term: TermId,
        to: TNt,
    },
    /// Return closing the call edge `(outer, _, inner)`.
    RetMatched {
        outer: TNt,
        inner: TNt,
        term: TermId,
        to: TNt,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Family {
    Start,
    Plain,
    Call,
    Ret,
}

impl Family {
    pub fn of_kind(kind: TermKind) -> Family {
        match kind {
            TermKind::Plain => Family::Plain,
            TermKind::Call => Family::Call,
            TermKind::Return => Family::Ret,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Start => "start",
            Family::Plain => "plain",
            Family::Call => "call",
            Family::Ret => "ret",
        })
    }
}

impl ParseEdge {
    pub fn target(&self) -> TNt {
        match *self {
            ParseEdge::Start(t) => t,
            ParseEdge::Plain { to, .. }
            | ParseEdge::Call { to, .. }
            | ParseEdge::Ret { to, .. }
            | ParseEdge::RetMatched { to, .. } => to,
        }
    }

    /// Single-nonterminal start; `None` for matched returns.
    pub fn source(&self) -> Option<TNt> {
        match *self {
            ParseEdge::Start(t) => Some(t),
            ParseEdge::Plain { from, .. } | ParseEdge::Call { from, .. } | ParseEdge::Ret { from, .. } => Some(from),
            ParseEdge::RetMatched { .. } => None,
        }
    }

    pub fn term(&self) -> Option<TermId> {
        match *self {
            ParseEdge::Start(_) => None,
            ParseEdge::Plain { term, .. }
            | ParseEdge::Call { term, .. }
            | ParseEdge::Ret { term, .. }
            | ParseEdge::RetMatched { term, .. } => Some(term),
        }
    }

    pub fn family(&self) -> Family {
        match self {
            ParseEdge::Start(_) => Family::Start,
            ParseEdge::Plain { .. } => Family::Plain,
            ParseEdge::Call { .. } => Family::Call,
            ParseEdge::Ret { .. } | ParseEdge::RetMatched { .. } => Family::Ret,
        }
    }

    pub fn is_matching_call(&self) -> bool {
        matches!(self, ParseEdge::Call { to, .. } if to.tag)
    }

    /// For a matching call `(L, ⟨a, L1)`, whether `r` is a return of the
    /// same rule instance `((L, L1), _, _)`.
    pub fn pairs_with(&self, r: &ParseEdge) -> bool {
        match (*self, *r) {
            (ParseEdge::Call { from, to, .. }, ParseEdge::RetMatched { outer, inner, .. }) => {
                from == outer && to == inner
            }
            _ => false,
        }
    }

    pub fn display(&self, s: &Symbols) -> String {
        match *self {
            ParseEdge::Start(t) => format!("{} --_--> {}", t.display(s), t.display(s)),
            ParseEdge::Plain { from, term, to }
            | ParseEdge::Call { from, term, to }
            | ParseEdge::Ret { from, term, to } => {
                format!("{} --{}--> {}", from.display(s), s.display_term(term), to.display(s))
            }
            ParseEdge::RetMatched { outer, inner, term, to } => {
                format!("({},{}) --{}--> {}", outer.display(s), inner.display(s), s.display_term(term), to.display(s))
            }
        }
    }
}

/// Canonical, homogeneous set of edges.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ParserState {
    family: Family,
    edges: Vec<ParseEdge>,
}

impl ParserState {
    /// Builds a state of the given family. Panics if an edge does not belong
    /// to the family.
    pub fn new(family: Family, edges: impl IntoIterator<Item = ParseEdge>) -> Self {
        let set: BTreeSet<ParseEdge> = edges.into_iter().collect();
        assert!(set.iter().all(|e| e.family() == family), "mixed edge families in one state");
        ParserState { family, edges: set.into_iter().collect() }
    }

    pub fn start(l0: NtId) -> Self {
        ParserState { family: Family::Start, edges: vec![ParseEdge::Start(TNt::new(l0, false))] }
    }

    pub fn empty(family: Family) -> Self {
        ParserState { family, edges: Vec::new() }
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn edges(&self) -> &[ParseEdge] {
        &self.edges
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn contains(&self, e: &ParseEdge) -> bool {
        self.edges.binary_search(e).is_ok()
    }

    pub fn filter(&self, keep: impl Fn(&ParseEdge) -> bool) -> ParserState {
        ParserState { family: self.family, edges: self.edges.iter().copied().filter(|e| keep(e)).collect() }
    }

    fn targets(&self) -> impl Iterator<Item = TNt> + '_ {
        self.edges.iter().map(|e| e.target())
    }

    pub fn display(&self, s: &Symbols) -> String {
        let parts: Vec<String> = self.edges.iter().map(|e| e.display(s)).collect();
        format!("{{{}}}", parts.join(", "))
    }
}

/// `p_c(m)`: plain steps keep the tag.
pub fn p_plain(g: &Vpg, m: &ParserState, c: TermId) -> ParserState {
    let mut out = Vec::new();
    for from in dedup(m.targets()) {
        for &l1 in g.linear_targets(from.nt, c) {
            out.push(ParseEdge::Plain { from, term: c, to: TNt::new(l1, from.tag) });
        }
    }
    ParserState::new(Family::Plain, out)
}

/// `p_⟨a(m)`: matching calls from any tag, pending calls only from `false`.
/// The result is also what gets pushed.
pub fn p_call(g: &Vpg, m: &ParserState, a: TermId) -> ParserState {
    let mut out = Vec::new();
    for from in dedup(m.targets()) {
        for &(inner, _, _) in g.matching_rules(from.nt, a) {
            out.push(ParseEdge::Call { from, term: a, to: TNt::new(inner, true) });
        }
        if !from.tag {
            for &l1 in g.linear_targets(from.nt, a) {
                out.push(ParseEdge::Call { from, term: a, to: TNt::new(l1, false) });
            }
        }
    }
    ParserState::new(Family::Call, out)
}

/// `p_b⟩(m, mcall)`: matching returns come from the pushed call edges only;
/// pending returns continue `false` targets of `m`.
pub fn p_ret(g: &Vpg, m: &ParserState, mcall: Option<&ParserState>, b: TermId) -> ParserState {
    let mut out = Vec::new();
    if let Some(mcall) = mcall {
        for e in mcall.edges() {
            if let ParseEdge::Call { from, term: a, to } = *e {
                if !to.tag {
                    continue;
                }
                for &(inner, ret, next) in g.matching_rules(from.nt, a) {
                    if inner == to.nt && ret == b {
                        out.push(ParseEdge::RetMatched {
                            outer: from,
                            inner: to,
                            term: b,
                            to: TNt::new(next, from.tag),
                        });
                    }
                }
            }
        }
    }
    for from in dedup(m.targets()) {
        if !from.tag {
            for &l1 in g.linear_targets(from.nt, b) {
                out.push(ParseEdge::Ret { from, term: b, to: TNt::new(l1, false) });
            }
        }
    }
    ParserState::new(Family::Ret, out)
}

fn dedup(it: impl Iterator<Item = TNt>) -> BTreeSet<TNt> {
    it.collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParserPda {
    pub(crate) states: Vec<ParserState>,
    pub(crate) index: HashMap<ParserState, u32>,
    /// Plain and call transitions (call pushes the target).
    pub(crate) step: HashMap<(u32, TermId), u32>,
    /// Return transitions keyed by the pushed call state, `None` for ⊥.
    pub(crate) ret: HashMap<(u32, TermId, Option<u32>), u32>,
    pub(crate) mode: Mode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("parse failure at token {0}")]
    ParseFailure(usize),
    #[error("no edge survives pruning at token {0}")]
    EmptyAfterPrune(usize),
    #[error("input ends inside an open call")]
    UnclosedCall,
}

/// Result of a parser run. Forest entries are state ids of the PDA.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParserRun {
    pub forest: Vec<u32>,
    pub stack: Vec<u32>,
    pub max_depth: usize,
}

/// Materialized forest `[m1..mn]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseForest {
    pub states: Vec<ParserState>,
}

impl ParseForest {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn refs(&self) -> Vec<&ParserState> {
        self.states.iter().collect()
    }

    /// One line per token: `[i] edge ; edge ; ...` (1-based positions).
    pub fn display(&self, s: &Symbols) -> String {
        let mut out = String::new();
        for (i, m) in self.states.iter().enumerate() {
            let edges: Vec<String> = m.edges().iter().map(|e| e.display(s)).collect();
            out.push_str(&format!("[{}] {}\n", i + 1, edges.join(" ; ")));
        }
        out
    }
}

impl ParserPda {
    /// Worklist fixpoint from the helper start state. Return transitions are
    /// enumerated against every call state found so far plus the empty stack.
    /// Empty targets are not stored; a missing entry is a parse failure.
    pub fn build(g: &Vpg) -> Self {
        let mut pda = ParserPda {
            states: Vec::new(),
            index: HashMap::new(),
            step: HashMap::new(),
            ret: HashMap::new(),
            mode: g.mode(),
        };
        pda.intern(ParserState::start(g.start()));
        let symbols = g.symbols();
        let plains = symbols.terminals_of_kind(TermKind::Plain);
        let calls = symbols.terminals_of_kind(TermKind::Call);
        let rets = symbols.terminals_of_kind(TermKind::Return);
        let mut call_states: Vec<u32> = Vec::new();
        let mut done = 0usize;
        while done < pda.states.len() {
            let n = pda.states.len();
            for sid in done..n {
                let m = pda.states[sid].clone();
                for &c in &plains {
                    let next = p_plain(g, &m, c);
                    if let Some(t) = pda.intern_nonempty(next) {
                        pda.step.insert((sid as u32, c), t);
                    }
                }
                for &a in &calls {
                    let next = p_call(g, &m, a);
                    if let Some(t) = pda.intern_nonempty(next) {
                        pda.step.insert((sid as u32, a), t);
                    }
                }
            }
            let old_calls = call_states.iter().filter(|&&c| (c as usize) < done).count();
            call_states = (0..n as u32).filter(|&i| pda.states[i as usize].family() == Family::Call).collect();
            for sid in 0..n {
                let m = pda.states[sid].clone();
                let tops = call_states.iter().enumerate().map(|(k, &c)| (k, Some(c))).chain([(usize::MAX, None)]);
                for (k, top) in tops {
                    let fresh = sid >= done || (top.is_some() && k >= old_calls);
                    if !fresh {
                        continue;
                    }
                    let mcall = top.map(|c| pda.states[c as usize].clone());
                    for &b in &rets {
                        let next = p_ret(g, &m, mcall.as_ref(), b);
                        if let Some(t) = pda.intern_nonempty(next) {
                            pda.ret.insert((sid as u32, b, top), t);
                        }
                    }
                }
            }
            done = n;
        }
        pda
    }

    fn intern(&mut self, m: ParserState) -> u32 {
        if let Some(&id) = self.index.get(&m) {
            return id;
        }
        let id = self.states.len() as u32;
        self.index.insert(m.clone(), id);
        self.states.push(m);
        id
    }

    fn intern_nonempty(&mut self, m: ParserState) -> Option<u32> {
        (!m.is_empty()).then(|| self.intern(m))
    }

    pub fn states(&self) -> &[ParserState] {
        &self.states
    }

    pub fn state(&self, id: u32) -> &ParserState {
        &self.states[id as usize]
    }

    pub fn state_id(&self, m: &ParserState) -> Option<u32> {
        self.index.get(m).copied()
    }

    pub fn start(&self) -> u32 {
        0
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn num_transitions(&self) -> usize {
        self.step.len() + self.ret.len()
    }

    /// One runtime transition `P(i, m, T)`.
    #[inline]
    pub fn feed(&self, g: &Vpg, m: u32, stack: &mut Vec<u32>, t: TermId) -> Option<u32> {
        match g.symbols().kind(t) {
            TermKind::Plain => self.step.get(&(m, t)).copied(),
            TermKind::Call => {
                let next = *self.step.get(&(m, t))?;
                stack.push(next);
                Some(next)
            }
            TermKind::Return => {
                let top = stack.last().copied();
                let next = *self.ret.get(&(m, t, top))?;
                if top.is_some() {
                    stack.pop();
                }
                Some(next)
            }
        }
    }

    pub fn run(&self, g: &Vpg, tokens: &[TermId]) -> Result<ParserRun, ParseError> {
        let mut m = self.start();
        let mut stack = Vec::new();
        let mut forest = Vec::with_capacity(tokens.len());
        let mut max_depth = 0;
        for (i, &t) in tokens.iter().enumerate() {
            m = self.feed(g, m, &mut stack, t).ok_or(ParseError::ParseFailure(i))?;
            max_depth = max_depth.max(stack.len());
            forest.push(m);
        }
        Ok(ParserRun { forest, stack, max_depth })
    }

    /// Every configuration `(m_i, T_i)` for `i = 1..n`, stack top last.
    pub fn run_trace(&self, g: &Vpg, tokens: &[TermId]) -> Result<Vec<(u32, Vec<u32>)>, ParseError> {
        let mut m = self.start();
        let mut stack = Vec::new();
        let mut out = Vec::new();
        for (i, &t) in tokens.iter().enumerate() {
            m = self.feed(g, m, &mut stack, t).ok_or(ParseError::ParseFailure(i))?;
            out.push((m, stack.clone()));
        }
        Ok(out)
    }

    pub fn materialize(&self, ids: &[u32]) -> ParseForest {
        ParseForest { states: ids.iter().map(|&i| self.states[i as usize].clone()).collect() }
    }

    /// End-of-input check before pruning: some final edge ends in a
    /// nullable `false` nonterminal, and in well-matched mode the stack is
    /// empty.
    pub fn accepts_at_end(&self, g: &Vpg, run: &ParserRun) -> bool {
        if self.mode == Mode::WellMatched && !run.stack.is_empty() {
            return false;
        }
        let last = run.forest.last().copied().unwrap_or(self.start());
        self.states[last as usize].edges().iter().any(|e| {
            let t = e.target();
            !t.tag && g.is_nullable(t.nt)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::grammar::parse_vpg;
    use crate::grammar::syntax::{nt_id, term_id};

    fn tn(g: &Vpg, n: &str, tag: bool) -> TNt {
        TNt::new(nt_id(g, n), tag)
    }

    #[test]
    fn fig2_derivatives() {
        let g = parse_vpg(corpus::FIG2_VPG).unwrap();
        let (a, b, c, d) = (term_id(&g, "'a'"), term_id(&g, "'b'"), term_id(&g, "'c'"), term_id(&g, "'d'"));
        let m0 = ParserState::start(g.start());
        let m1 = p_call(&g, &m0, a);
        assert_eq!(
            m1,
            ParserState::new(
                Family::Call,
                [ParseEdge::Call { from: tn(&g, "l", false), term: a, to: tn(&g, "a", true) }]
            )
        );
        let m2 = p_plain(&g, &m1, c);
        assert_eq!(
            m2,
            ParserState::new(
                Family::Plain,
                [
                    ParseEdge::Plain { from: tn(&g, "a", true), term: c, to: tn(&g, "c", true) },
                    ParseEdge::Plain { from: tn(&g, "a", true), term: c, to: tn(&g, "d", true) },
                ]
            )
        );
        let m3 = p_plain(&g, &m2, d);
        let m4 = p_ret(&g, &m3, Some(&m1), b);
        assert_eq!(
            m4.edges(),
            &[ParseEdge::RetMatched {
                outer: tn(&g, "l", false),
                inner: tn(&g, "a", true),
                term: b,
                to: tn(&g, "l", false)
            }]
        );
        assert!(p_plain(&g, &ParserState::empty(Family::Plain), c).is_empty());
        assert!(p_call(&g, &ParserState::empty(Family::Plain), a).is_empty());
        // empty stack and only tagged targets: nothing
        assert!(p_ret(&g, &m3, None, b).is_empty());
    }

    #[test]
    fn pending_rules_are_barred_under_true_tag() {
        let g = parse_vpg("l = <A l1 | C l | ;\nl1 = ;").unwrap();
        let c = term_id(&g, "C");
        let m = ParserState::new(
            Family::Plain,
            [ParseEdge::Plain { from: tn(&g, "l", true), term: c, to: tn(&g, "l", true) }],
        );
        assert!(p_call(&g, &m, term_id(&g, "A")).is_empty());
        let m = ParserState::new(
            Family::Plain,
            [ParseEdge::Plain { from: tn(&g, "l", false), term: c, to: tn(&g, "l", false) }],
        );
        assert_eq!(p_call(&g, &m, term_id(&g, "A")).len(), 1);
    }

    #[test]
    fn pending_return_on_empty_stack() {
        let g = parse_vpg(corpus::PENDING_RETURNS_VPG).unwrap();
        let b = term_id(&g, "'b'");
        let m = p_ret(&g, &ParserState::start(g.start()), None, b);
        assert_eq!(m.edges(), &[ParseEdge::Ret { from: tn(&g, "l", false), term: b, to: tn(&g, "l", false) }]);
    }

    #[test]
    fn g2_first_step_has_both_readings() {
        let g = parse_vpg(corpus::G2_VPG).unwrap();
        let c = term_id(&g, "'c'");
        let m = p_plain(&g, &ParserState::start(g.start()), c);
        assert_eq!(
            m.edges(),
            &[
                ParseEdge::Plain { from: tn(&g, "l", false), term: c, to: tn(&g, "a", false) },
                ParseEdge::Plain { from: tn(&g, "l", false), term: c, to: tn(&g, "b", false) },
            ]
        );
        let pda = ParserPda::build(&g);
        assert!(pda.state_id(&m).is_some());
        let m0 = ParserState::start(g.start());
        assert_eq!(p_plain(&parse_vpg("l = 'c' l | ;").unwrap(), &m0, TermId(0)).len(), 1);
    }

    #[test]
    fn fig2_pda_and_run() {
        let g = parse_vpg(corpus::FIG2_VPG).unwrap();
        let pda = ParserPda::build(&g);
        // start + five reachable non-start states
        assert_eq!(pda.states().len(), 6);
        let w: Vec<TermId> = ["'a'", "'c'", "'d'", "'b'"].iter().map(|n| term_id(&g, n)).collect();
        let run = pda.run(&g, &w).unwrap();
        let forest = pda.materialize(&run.forest);
        let text = forest.display(g.symbols());
        assert_eq!(
            text,
            "[1] (l,f) --<'a'--> (a,t)\n\
             [2] (a,t) --'c'--> (c,t) ; (a,t) --'c'--> (d,t)\n\
             [3] (d,t) --'d'--> (e,t)\n\
             [4] ((l,f),(a,t)) --'b'>--> (l,f)\n"
        );
        assert!(pda.accepts_at_end(&g, &run));
        let w: Vec<TermId> = ["'a'", "'c'", "'c'", "'b'"].iter().map(|n| term_id(&g, n)).collect();
        let run = pda.run(&g, &w).unwrap();
        assert_eq!(run.forest[1], pda.run(&g, &w[..2]).unwrap().forest[1]);
        let m3 = pda.state(run.forest[2]);
        assert_eq!(
            m3.edges(),
            &[ParseEdge::Plain { from: tn(&g, "c", true), term: term_id(&g, "'c'"), to: tn(&g, "e", true) }]
        );
    }

    #[test]
    fn epsilon_grammar_has_only_start() {
        let g = parse_vpg("l = ;").unwrap();
        let pda = ParserPda::build(&g);
        assert_eq!(pda.states().len(), 1);
        assert_eq!(pda.num_transitions(), 0);
        let run = pda.run(&g, &[]).unwrap();
        assert!(run.forest.is_empty());
        assert!(pda.accepts_at_end(&g, &run));
    }

    #[test]
    fn homogeneous_states_and_pushed_call_states() {
        for (_, text) in corpus::vpg_grammars() {
            let g = parse_vpg(text).unwrap();
            let pda = ParserPda::build(&g);
            for m in pda.states() {
                assert!(m.edges().iter().all(|e| e.family() == m.family()));
            }
            for &(_, top) in pda.ret.keys().map(|(s, _, t)| (s, t)).collect::<Vec<_>>().iter() {
                if let Some(t) = top {
                    assert_eq!(pda.state(*t).family(), Family::Call);
                }
            }
        }
    }
}
