//! Parse-tree extraction from a forest.
//!
//! [`extract`] is the set-based fold over the forest and materializes every
//! trace. [`ForestIndex`] counts and enumerates complete trees without
//! materializing them: per matched call/return pair it keeps, for each call
//! edge, how many inner traces reach each edge of each inner position.

use std::collections::BTreeSet;

use crate::grammar::{Symbols, Vpg};
use crate::parser::{Family, ParseEdge, ParseForest, ParserState};

/// A trace of edges.
pub type ParseTree = Vec<ParseEdge>;

/// Entries `(v, E)`: a trace and its stack of open call edges, top last.
pub type TreeSet = BTreeSet<(ParseTree, Vec<ParseEdge>)>;

/// `[e1, e2, ...]` with edges in `(L,u) --a--> (L',u')` form.
pub fn display_tree(s: &Symbols, v: &[ParseEdge]) -> String {
    let parts: Vec<String> = v.iter().map(|e| e.display(s)).collect();
    format!("[{}]", parts.join(", "))
}

/// `e1 ⋄ e2` on the boundary edges of two traces.
pub fn edge_connects(last: &ParseEdge, first: &ParseEdge) -> bool {
    first.source() == Some(last.target()) || last.pairs_with(first)
}

/// `v1 ⋄ v2`. Both traces must be nonempty.
pub fn connects(v1: &[ParseEdge], v2: &[ParseEdge]) -> bool {
    match (v1.last(), v2.first()) {
        (Some(a), Some(b)) => edge_connects(a, b),
        _ => false,
    }
}

/// `F1(m1)`.
pub fn f1(m1: &ParserState) -> TreeSet {
    let mut out = TreeSet::new();
    for &e in m1.edges() {
        match m1.family() {
            Family::Call => {
                out.insert((vec![e], vec![e]));
            }
            _ if !e.target().tag => {
                out.insert((vec![e], Vec::new()));
            }
            _ => {}
        }
    }
    out
}

/// `F(V, m)`. With `strict`, a matched return directly after its call edge
/// also requires the call's inner nonterminal to be nullable.
pub fn f_step(g: &Vpg, v: &TreeSet, m: &ParserState, strict: bool) -> TreeSet {
    let mut out = TreeSet::new();
    for (tree, stack) in v {
        let last = tree.last().expect("traces are nonempty");
        for &e in m.edges() {
            match m.family() {
                Family::Plain | Family::Start => {
                    if edge_connects(last, &e) {
                        let mut t = tree.clone();
                        t.push(e);
                        out.insert((t, stack.clone()));
                    }
                }
                Family::Call => {
                    if edge_connects(last, &e) {
                        let mut t = tree.clone();
                        t.push(e);
                        let mut s = stack.clone();
                        s.push(e);
                        out.insert((t, s));
                    }
                }
                Family::Ret => {
                    let popped = &stack[..stack.len().saturating_sub(1)];
                    let direct = edge_connects(last, &e)
                        && (!strict || !matches!(e, ParseEdge::RetMatched { .. }) || {
                            let t = last.target();
                            t.tag && g.is_nullable(t.nt)
                        });
                    let through_call = stack.last().is_some_and(|call| {
                        let t = last.target();
                        t.tag && g.is_nullable(t.nt) && edge_connects(call, &e)
                    });
                    if direct || through_call {
                        let mut t = tree.clone();
                        t.push(e);
                        out.insert((t, popped.to_vec()));
                    }
                }
            }
        }
    }
    out
}

fn fold(g: &Vpg, forest: &[&ParserState], strict: bool) -> TreeSet {
    let Some((first, rest)) = forest.split_first() else {
        return TreeSet::new();
    };
    let mut v = f1(first);
    for m in rest {
        v = f_step(g, &v, m, strict);
    }
    v
}

/// `V1 = F1(m1)`, `Vi = F(Vi-1, mi)`; returns `Vn`.
pub fn extract(g: &Vpg, forest: &[&ParserState]) -> TreeSet {
    fold(g, forest, false)
}

/// The fold with the nullable check on empty matched segments. Agrees with
/// [`extract`] on pruned forests; differs on unpruned ones.
pub fn extract_strict(g: &Vpg, forest: &[&ParserState]) -> TreeSet {
    fold(g, forest, true)
}

/// Every fold prefix `[V1, ..., Vn]`.
pub fn extract_prefixes(g: &Vpg, forest: &[&ParserState], strict: bool) -> Vec<TreeSet> {
    let mut out: Vec<TreeSet> = Vec::with_capacity(forest.len());
    for (i, m) in forest.iter().enumerate() {
        let next = if i == 0 { f1(m) } else { f_step(g, &out[i - 1], m, strict) };
        out.push(next);
    }
    out
}

/// Traces whose last nonterminal is a nullable `false` one. For an empty
/// forest this is `{[]}` when the start symbol is nullable.
pub fn complete_trees(g: &Vpg, forest: &[&ParserState], v: &TreeSet) -> BTreeSet<ParseTree> {
    if forest.is_empty() {
        return if g.is_nullable(g.start()) { BTreeSet::from([Vec::new()]) } else { BTreeSet::new() };
    }
    v.iter()
        .filter(|(t, _)| {
            let last = t.last().unwrap().target();
            !last.tag && g.is_nullable(last.nt)
        })
        .map(|(t, _)| t.clone())
        .collect()
}

const TOP: usize = usize::MAX;

/// Counting and enumeration structure over a forest.
pub struct ForestIndex<'a> {
    g: &'a Vpg,
    states: Vec<&'a ParserState>,
    /// Partner position of matched calls and returns.
    pair: Vec<Option<usize>>,
    /// Call position opening the frame of each position (`TOP` for the outermost).
    frame: Vec<usize>,
    offset: Vec<usize>,
    /// Path counts per (position, frame source, edge), saturating.
    cnt: Vec<u128>,
}

#[derive(Debug, Clone, Copy)]
struct Node {
    k: usize,
    s: usize,
    e: usize,
}

impl<'a> ForestIndex<'a> {
    pub fn new(g: &'a Vpg, states: Vec<&'a ParserState>) -> Self {
        let n = states.len();
        let mut pair = vec![None; n];
        let mut open = Vec::new();
        for (k, m) in states.iter().enumerate() {
            match m.family() {
                Family::Call => open.push(k),
                Family::Ret => {
                    if let Some(i) = open.pop() {
                        pair[i] = Some(k);
                        pair[k] = Some(i);
                    }
                }
                _ => {}
            }
        }
        let mut frame = vec![TOP; n];
        let mut frames = vec![TOP];
        for k in 0..n {
            if states[k].family() == Family::Ret && pair[k].is_some() {
                frames.pop();
            }
            frame[k] = *frames.last().unwrap();
            if states[k].family() == Family::Call && pair[k].is_some() {
                frames.push(k);
            }
        }
        let mut offset = Vec::with_capacity(n + 1);
        let mut total = 0usize;
        for k in 0..n {
            offset.push(total);
            let sources = if frame[k] == TOP { 1 } else { states[frame[k]].len() };
            total += sources * states[k].len();
        }
        offset.push(total);
        let mut idx = ForestIndex { g, states, pair, frame, offset, cnt: vec![0; total] };
        idx.fill();
        idx
    }

    pub fn from_forest(g: &'a Vpg, forest: &'a ParseForest) -> Self {
        Self::new(g, forest.refs())
    }

    fn sources(&self, k: usize) -> usize {
        if self.frame[k] == TOP {
            1
        } else {
            self.states[self.frame[k]].len()
        }
    }

    fn at(&self, k: usize, s: usize, e: usize) -> u128 {
        self.cnt[self.offset[k] + s * self.states[k].len() + e]
    }

    fn is_frame_start(&self, k: usize) -> bool {
        if self.frame[k] == TOP {
            k == 0
        } else {
            k == self.frame[k] + 1
        }
    }

    fn matched_return(&self, k: usize) -> Option<usize> {
        match self.pair[k] {
            Some(i) if i < k => Some(i),
            _ => None,
        }
    }

    /// Whether inner last edge `p` lets return `r` close call `c`.
    fn closes(&self, p: &ParseEdge, c: &ParseEdge, r: &ParseEdge) -> bool {
        match r {
            ParseEdge::RetMatched { .. } => {
                let t = p.target();
                t.tag && self.g.is_nullable(t.nt) && c.pairs_with(r)
            }
            _ => edge_connects(p, r),
        }
    }

    /// Inner count of reaching `p_idx` at the last inner position from
    /// source `c_idx`; identity when the inner segment is empty.
    fn inner(&self, i: usize, j: usize, c: usize, p: usize) -> u128 {
        if j == i + 1 {
            u128::from(c == p)
        } else {
            self.at(j - 1, c, p)
        }
    }

    fn inner_state(&self, i: usize, j: usize) -> &'a ParserState {
        if j == i + 1 {
            self.states[i]
        } else {
            self.states[j - 1]
        }
    }

    fn fill(&mut self) {
        let n = self.states.len();
        for k in 0..n {
            let m = self.states[k];
            let width = m.len();
            let base = self.offset[k];
            let mut row = vec![0u128; self.sources(k) * width];
            if let Some(i) = self.matched_return(k) {
                let mi = self.states[i];
                let mp = self.inner_state(i, k);
                let outer_sources = self.sources(i);
                for (ri, r) in m.edges().iter().enumerate() {
                    for (ci, c) in mi.edges().iter().enumerate() {
                        let mut w = 0u128;
                        for (pi, p) in mp.edges().iter().enumerate() {
                            let inner = self.inner(i, k, ci, pi);
                            if inner > 0 && self.closes(p, c, r) {
                                w = w.saturating_add(inner);
                            }
                        }
                        if w == 0 {
                            continue;
                        }
                        for s in 0..outer_sources {
                            let before = self.at(i, s, ci);
                            row[s * width + ri] = row[s * width + ri].saturating_add(before.saturating_mul(w));
                        }
                    }
                }
            } else if self.is_frame_start(k) {
                if self.frame[k] == TOP {
                    for (ei, e) in m.edges().iter().enumerate() {
                        if m.family() == Family::Call || !e.target().tag {
                            row[ei] = 1;
                        }
                    }
                } else {
                    let mc = self.states[self.frame[k]];
                    for (ci, c) in mc.edges().iter().enumerate() {
                        for (ei, e) in m.edges().iter().enumerate() {
                            if edge_connects(c, e) {
                                row[ci * width + ei] = 1;
                            }
                        }
                    }
                }
            } else {
                let prev = self.states[k - 1];
                for s in 0..self.sources(k) {
                    for (pi, p) in prev.edges().iter().enumerate() {
                        let before = self.at(k - 1, s, pi);
                        if before == 0 {
                            continue;
                        }
                        for (ei, e) in m.edges().iter().enumerate() {
                            if edge_connects(p, e) {
                                row[s * width + ei] = row[s * width + ei].saturating_add(before);
                            }
                        }
                    }
                }
            }
            self.cnt[base..base + row.len()].copy_from_slice(&row);
        }
    }

    fn final_ok(&self, e: &ParseEdge) -> bool {
        let t = e.target();
        !t.tag && self.g.is_nullable(t.nt)
    }

    /// Number of complete trees (saturating at `u128::MAX`).
    pub fn count(&self) -> u128 {
        let n = self.states.len();
        if n == 0 {
            return u128::from(self.g.is_nullable(self.g.start()));
        }
        let last = self.states[n - 1];
        let mut total = 0u128;
        for (ei, e) in last.edges().iter().enumerate() {
            if self.final_ok(e) {
                total = total.saturating_add(self.at(n - 1, 0, ei));
            }
        }
        total
    }

    /// Backward options from a node, in canonical edge order. Each option is
    /// the next node plus, for matched returns, the outer node to resume at.
    fn options(&self, node: Node) -> Vec<(Node, Option<Node>)> {
        let Node { k, s, e } = node;
        let m = self.states[k];
        let edge = &m.edges()[e];
        let mut out = Vec::new();
        if let Some(i) = self.matched_return(k) {
            let mi = self.states[i];
            let mp = self.inner_state(i, k);
            for (ci, c) in mi.edges().iter().enumerate() {
                if self.at(i, s, ci) == 0 {
                    continue;
                }
                let outer = Node { k: i, s, e: ci };
                if k == i + 1 {
                    if self.closes(c, c, edge) {
                        out.push((outer, None));
                    }
                    continue;
                }
                for (pi, p) in mp.edges().iter().enumerate() {
                    if self.at(k - 1, ci, pi) > 0 && self.closes(p, c, edge) {
                        out.push((Node { k: k - 1, s: ci, e: pi }, Some(outer)));
                    }
                }
            }
        } else if !self.is_frame_start(k) {
            let prev = self.states[k - 1];
            for (pi, p) in prev.edges().iter().enumerate() {
                if self.at(k - 1, s, pi) > 0 && edge_connects(p, edge) {
                    out.push((Node { k: k - 1, s, e: pi }, None));
                }
            }
        }
        out
    }

    fn final_nodes(&self) -> Vec<Node> {
        let n = self.states.len();
        if n == 0 {
            return Vec::new();
        }
        self.states[n - 1]
            .edges()
            .iter()
            .enumerate()
            .filter(|(ei, e)| self.final_ok(e) && self.at(n - 1, 0, *ei) > 0)
            .map(|(ei, _)| Node { k: n - 1, s: 0, e: ei })
            .collect()
    }

    /// Follows `choices` (default 0 past the end), recording the number of
    /// options at each decision. Returns `None` if there is no tree.
    fn walk(&self, choices: &[usize], arity: &mut Vec<usize>) -> Option<ParseTree> {
        let n = self.states.len();
        arity.clear();
        if n == 0 {
            return self.g.is_nullable(self.g.start()).then(Vec::new);
        }
        let finals = self.final_nodes();
        if finals.is_empty() {
            return None;
        }
        let mut decision = 0usize;
        let mut pick = |opts: usize, arity: &mut Vec<usize>| {
            let c = choices.get(decision).copied().unwrap_or(0);
            arity.push(opts);
            decision += 1;
            c
        };
        let mut node = finals[pick(finals.len(), arity)];
        let mut resume: Vec<Node> = Vec::new();
        let mut rev = Vec::with_capacity(n);
        loop {
            rev.push(self.states[node.k].edges()[node.e]);
            let opts = self.options(node);
            if opts.is_empty() {
                if self.frame[node.k] == TOP {
                    debug_assert_eq!(node.k, 0);
                    break;
                }
                node = resume.pop().expect("inner frame entered from its return");
                continue;
            }
            let (next, outer) = if opts.len() == 1 { opts[0] } else { opts[pick(opts.len(), arity)] };
            if let Some(o) = outer {
                resume.push(o);
            }
            node = next;
        }
        rev.reverse();
        Some(rev)
    }

    /// The first tree in enumeration order.
    pub fn first_tree(&self) -> Option<ParseTree> {
        self.walk(&[], &mut Vec::new())
    }

    /// Up to `cap` trees, depth-first over canonical edge order.
    pub fn trees(&self, cap: usize) -> Vec<ParseTree> {
        let mut out = Vec::new();
        let mut choices: Vec<usize> = Vec::new();
        let mut arity = Vec::new();
        while out.len() < cap {
            let Some(t) = self.walk(&choices, &mut arity) else { break };
            out.push(t);
            choices.resize(arity.len(), 0);
            let Some(d) = (0..arity.len()).rev().find(|&d| choices[d] + 1 < arity[d]) else { break };
            choices.truncate(d + 1);
            choices[d] += 1;
        }
        out
    }

    /// For each position, the edges that occur in at least one complete tree.
    pub fn useful_edges(&self) -> Vec<Vec<bool>> {
        let n = self.states.len();
        let mut useful: Vec<Vec<bool>> = self.states.iter().map(|m| vec![false; m.len()]).collect();
        let mut seen = vec![false; self.cnt.len()];
        let mut work = self.final_nodes();
        while let Some(node) = work.pop() {
            let slot = self.offset[node.k] + node.s * self.states[node.k].len() + node.e;
            if seen[slot] {
                continue;
            }
            seen[slot] = true;
            useful[node.k][node.e] = true;
            for (next, outer) in self.options(node) {
                work.push(next);
                if let Some(o) = outer {
                    work.push(o);
                }
            }
        }
        debug_assert!(n == 0 || useful.iter().all(|u| u.iter().any(|&b| b)) || self.count() == 0);
        useful
    }

    /// The forest restricted to edges of complete trees.
    pub fn tightened(&self) -> ParseForest {
        let useful = self.useful_edges();
        ParseForest {
            states: self
                .states
                .iter()
                .zip(&useful)
                .map(|(m, u)| {
                    let keep: Vec<ParseEdge> = m.edges().iter().zip(u).filter(|(_, &b)| b).map(|(e, _)| *e).collect();
                    ParserState::new(m.family(), keep)
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::grammar::parse_vpg;
    use crate::grammar::syntax::{nt_id, term_id};
    use crate::parser::{ParserPda, TNt};
    use crate::pruner::PrunerPda;

    fn tn(g: &Vpg, n: &str, tag: bool) -> TNt {
        TNt::new(nt_id(g, n), tag)
    }

    fn pruned(g: &Vpg, names: &[&str]) -> ParseForest {
        let parser = ParserPda::build(g);
        let pruner = PrunerPda::build(g, &parser);
        let w: Vec<_> = names.iter().map(|n| term_id(g, n)).collect();
        let run = parser.run(g, &w).unwrap();
        pruner.materialize(&pruner.run(&run.forest).unwrap())
    }

    #[test]
    fn connection_clauses() {
        let g = parse_vpg(corpus::FIG2_VPG).unwrap();
        let (a, b, c) = (term_id(&g, "'a'"), term_id(&g, "'b'"), term_id(&g, "'c'"));
        let call = ParseEdge::Call { from: tn(&g, "l", false), term: a, to: tn(&g, "a", true) };
        let ad = ParseEdge::Plain { from: tn(&g, "a", true), term: c, to: tn(&g, "d", true) };
        let ret = ParseEdge::RetMatched {
            outer: tn(&g, "l", false),
            inner: tn(&g, "a", true),
            term: b,
            to: tn(&g, "l", false),
        };
        let ce = ParseEdge::Plain { from: tn(&g, "c", true), term: c, to: tn(&g, "e", true) };
        assert!(connects(&[call], &[ad]));
        assert!(connects(&[call], &[ret]));
        assert!(!connects(&[ad], &[ce]));
    }

    #[test]
    fn fig2_single_tree() {
        let g = parse_vpg(corpus::FIG2_VPG).unwrap();
        let forest = pruned(&g, &["'a'", "'c'", "'d'", "'b'"]);
        let refs = forest.refs();
        let trees = complete_trees(&g, &refs, &extract(&g, &refs));
        let (a, b, c, d) = (term_id(&g, "'a'"), term_id(&g, "'b'"), term_id(&g, "'c'"), term_id(&g, "'d'"));
        let expected = vec![
            ParseEdge::Call { from: tn(&g, "l", false), term: a, to: tn(&g, "a", true) },
            ParseEdge::Plain { from: tn(&g, "a", true), term: c, to: tn(&g, "d", true) },
            ParseEdge::Plain { from: tn(&g, "d", true), term: d, to: tn(&g, "e", true) },
            ParseEdge::RetMatched {
                outer: tn(&g, "l", false),
                inner: tn(&g, "a", true),
                term: b,
                to: tn(&g, "l", false),
            },
        ];
        assert_eq!(trees, BTreeSet::from([expected.clone()]));
        let idx = ForestIndex::new(&g, refs);
        assert_eq!(idx.count(), 1);
        assert_eq!(idx.first_tree(), Some(expected));
    }

    #[test]
    fn single_plain_edge_forest() {
        let g = parse_vpg("l = C l | ;").unwrap();
        let c = term_id(&g, "C");
        let e = ParseEdge::Plain { from: tn(&g, "l", false), term: c, to: tn(&g, "l", false) };
        let m = ParserState::new(Family::Plain, [e]);
        let trees = complete_trees(&g, &[&m], &extract(&g, &[&m]));
        assert_eq!(trees, BTreeSet::from([vec![e]]));
    }

    #[test]
    fn g2_counts_double() {
        let g = parse_vpg(corpus::G2_VPG).unwrap();
        for n in 1..=4 {
            let w: Vec<&str> = (0..n).flat_map(|_| ["'c'", "'d'"]).collect();
            let forest = pruned(&g, &w);
            let refs = forest.refs();
            let idx = ForestIndex::new(&g, refs.clone());
            assert_eq!(idx.count(), 1 << n);
            let listed: BTreeSet<ParseTree> = idx.trees(usize::MAX).into_iter().collect();
            assert_eq!(listed.len(), 1 << n);
            assert_eq!(listed, complete_trees(&g, &refs, &extract(&g, &refs)));
        }
    }

    #[test]
    fn empty_forest() {
        let g = parse_vpg(corpus::FIG2_VPG).unwrap();
        let idx = ForestIndex::new(&g, Vec::new());
        assert_eq!(idx.count(), 1);
        assert_eq!(idx.first_tree(), Some(Vec::new()));
        assert_eq!(complete_trees(&g, &[], &TreeSet::new()), BTreeSet::from([Vec::new()]));
    }

    #[test]
    fn deep_nesting_is_iterative() {
        let g = parse_vpg("l = <A l B> l | ;").unwrap();
        let (a, b) = (term_id(&g, "A"), term_id(&g, "B"));
        let depth = 20_000;
        let w: Vec<_> = std::iter::repeat_n(a, depth).chain(std::iter::repeat_n(b, depth)).collect();
        let parser = ParserPda::build(&g);
        let pruner = PrunerPda::build(&g, &parser);
        let run = parser.run(&g, &w).unwrap();
        assert_eq!(run.max_depth, depth);
        let ids = pruner.run(&run.forest).unwrap();
        let states: Vec<&ParserState> = ids.iter().map(|&i| pruner.state(i)).collect();
        let idx = ForestIndex::new(&g, states);
        assert_eq!(idx.count(), 1);
        assert_eq!(idx.first_tree().unwrap().len(), 2 * depth);
    }
}
