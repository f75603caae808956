//! Backward pruner: walks the forest from the last state to the first and
//! keeps only edges that connect to a surviving edge on their right.
//!
//! Its stack holds pruned return states; a call state pops the return state
//! pushed at its matching return, so a matching call edge survives only if
//! its own return edge did.

use std::collections::{BTreeSet, HashMap};

use crate::grammar::Vpg;
use crate::parser::{Family, ParseEdge, ParseError, ParseForest, ParserPda, ParserState, TNt};
use crate::recognizer::StackAction;

/// `gε(mn)`: final edges must end in a nullable `false` nonterminal.
pub fn prune_last(g: &Vpg, mn: &ParserState) -> ParserState {
    mn.filter(|e| {
        let t = e.target();
        !t.tag && g.is_nullable(t.nt)
    })
}

fn starts(m: &ParserState) -> BTreeSet<TNt> {
    m.edges().iter().filter_map(ParseEdge::source).collect()
}

fn has_pair(m: &ParserState, call: &ParseEdge) -> bool {
    m.edges().iter().any(|r| call.pairs_with(r))
}

/// Which of the four transition cases applies to `(m1, m2')`.
pub fn prune_case(m1: Family, m2p: Family) -> u8 {
    match (m1, m2p) {
        (Family::Call, Family::Ret) => 4,
        (Family::Call, _) => 3,
        (_, Family::Ret) => 2,
        _ => 1,
    }
}

/// `g(m1, m2')`. `top` is the popped stack head for case 3 (`None` when the
/// stack is empty) and ignored otherwise.
pub fn prune_step(
    g: &Vpg,
    m1: &ParserState,
    m2p: &ParserState,
    top: Option<&ParserState>,
) -> (ParserState, StackAction) {
    let st = starts(m2p);
    let connects = |t: TNt| st.contains(&t);
    match prune_case(m1.family(), m2p.family()) {
        1 => (m1.filter(|e| connects(e.target())), StackAction::NoOp),
        2 => (
            m1.filter(|e| {
                let t = e.target();
                if t.tag {
                    g.is_nullable(t.nt)
                } else {
                    connects(t)
                }
            }),
            StackAction::Push,
        ),
        3 => (
            m1.filter(|e| {
                let t = e.target();
                if t.tag {
                    connects(t) && top.is_some_and(|r| has_pair(r, e))
                } else {
                    connects(t)
                }
            }),
            StackAction::Pop,
        ),
        _ => (
            m1.filter(|e| {
                let t = e.target();
                if t.tag {
                    has_pair(m2p, e) && g.is_nullable(t.nt)
                } else {
                    connects(t)
                }
            }),
            StackAction::NoOp,
        ),
    }
}

/// Applies the transition functions directly, without a prebuilt table.
pub fn prune_direct(g: &Vpg, forest: &[&ParserState]) -> Result<ParseForest, ParseError> {
    let n = forest.len();
    if n == 0 {
        return Ok(ParseForest { states: Vec::new() });
    }
    let mut out = vec![ParserState::empty(Family::Plain); n];
    let mut cur = prune_last(g, forest[n - 1]);
    if cur.is_empty() {
        return Err(ParseError::EmptyAfterPrune(n - 1));
    }
    let mut stack: Vec<ParserState> = Vec::new();
    out[n - 1] = cur.clone();
    for i in (0..n - 1).rev() {
        let m1 = forest[i];
        let top = if prune_case(m1.family(), cur.family()) == 3 { stack.pop() } else { None };
        let (next, act) = prune_step(g, m1, &cur, top.as_ref());
        if act == StackAction::Push {
            stack.push(cur);
        }
        if next.is_empty() {
            return Err(ParseError::EmptyAfterPrune(i));
        }
        out[i] = next.clone();
        cur = next;
    }
    Ok(ParseForest { states: out })
}

/// Pruner PDA over the states of a parser PDA.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrunerPda {
    pub(crate) states: Vec<ParserState>,
    pub(crate) index: HashMap<ParserState, u32>,
    /// Family of every parser state, by parser id.
    pub(crate) parser_family: Vec<Family>,
    /// `gε` per parser state.
    pub(crate) last: Vec<u32>,
    /// Cases 1, 2 and 4, keyed by (pruned m2', parser m1).
    pub(crate) step: HashMap<(u32, u32), (u32, StackAction)>,
    /// Case 3, keyed by (pruned m2', parser m1, popped top).
    pub(crate) pop: HashMap<(u32, u32, Option<u32>), u32>,
}

impl PrunerPda {
    /// Least fixpoint seeded with the parser states and their `gε` images,
    /// closed under the transition functions with every pruned return state
    /// (and the empty stack) as possible case-3 tops.
    pub fn build(g: &Vpg, parser: &ParserPda) -> Self {
        let mut pda = PrunerPda {
            states: Vec::new(),
            index: HashMap::new(),
            parser_family: parser.states().iter().map(ParserState::family).collect(),
            last: Vec::new(),
            step: HashMap::new(),
            pop: HashMap::new(),
        };
        for m in parser.states() {
            pda.intern(m.clone());
        }
        for m in parser.states() {
            let id = pda.intern(prune_last(g, m));
            pda.last.push(id);
        }
        let m1s: Vec<u32> =
            (0..parser.states().len() as u32).filter(|&i| parser.state(i).family() != Family::Start).collect();
        let mut done = 0usize;
        let mut tops: Vec<u32> = Vec::new();
        while done < pda.states.len() {
            let n = pda.states.len();
            let old_tops = tops.len();
            tops.extend((done..n).map(|i| i as u32).filter(|&i| pda.states[i as usize].family() == Family::Ret));
            for m2 in 0..n as u32 {
                let m2p = pda.states[m2 as usize].clone();
                if m2p.is_empty() || m2p.family() == Family::Start {
                    continue;
                }
                let m2_new = m2 as usize >= done;
                for &m1 in &m1s {
                    let m1s_state = parser.state(m1);
                    if prune_case(m1s_state.family(), m2p.family()) == 3 {
                        let candidates =
                            tops.iter().enumerate().map(|(k, &t)| (k, Some(t))).chain([(usize::MAX, None)]);
                        for (k, top) in candidates {
                            if !(m2_new || (top.is_some() && k >= old_tops)) {
                                continue;
                            }
                            let top_state = top.map(|t| pda.states[t as usize].clone());
                            let (next, _) = prune_step(g, m1s_state, &m2p, top_state.as_ref());
                            let id = pda.intern(next);
                            pda.pop.insert((m2, m1, top), id);
                        }
                    } else if m2_new {
                        let (next, act) = prune_step(g, m1s_state, &m2p, None);
                        let id = pda.intern(next);
                        pda.step.insert((m2, m1), (id, act));
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

    pub fn states(&self) -> &[ParserState] {
        &self.states
    }

    pub fn state(&self, id: u32) -> &ParserState {
        &self.states[id as usize]
    }

    pub fn state_id(&self, m: &ParserState) -> Option<u32> {
        self.index.get(m).copied()
    }

    pub fn num_transitions(&self) -> usize {
        self.step.len() + self.pop.len()
    }

    /// Runs over a forest of parser state ids, last to first. Returns pruned
    /// state ids in forward order.
    pub fn run(&self, forest: &[u32]) -> Result<Vec<u32>, ParseError> {
        let n = forest.len();
        if n == 0 {
            return Ok(Vec::new());
        }
        let mut out = vec![0u32; n];
        let mut cur = self.last[forest[n - 1] as usize];
        if self.states[cur as usize].is_empty() {
            return Err(ParseError::EmptyAfterPrune(n - 1));
        }
        out[n - 1] = cur;
        let mut stack: Vec<u32> = Vec::new();
        for i in (0..n - 1).rev() {
            let m1 = forest[i];
            let case = prune_case(self.parser_family[m1 as usize], self.states[cur as usize].family());
            let next = if case == 3 {
                let top = stack.pop();
                *self.pop.get(&(cur, m1, top)).ok_or(ParseError::EmptyAfterPrune(i))?
            } else {
                let &(next, act) = self.step.get(&(cur, m1)).ok_or(ParseError::EmptyAfterPrune(i))?;
                if act == StackAction::Push {
                    stack.push(cur);
                }
                next
            };
            if self.states[next as usize].is_empty() {
                return Err(ParseError::EmptyAfterPrune(i));
            }
            out[i] = next;
            cur = next;
        }
        Ok(out)
    }

    pub fn materialize(&self, ids: &[u32]) -> ParseForest {
        ParseForest { states: ids.iter().map(|&i| self.states[i as usize].clone()).collect() }
    }
}
