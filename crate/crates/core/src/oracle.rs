//! Reference derivation relations used as ground truth in tests.
//!
//! Nothing here is tuned for speed; inputs are meant to be short.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::rc::Rc;

use thiserror::Error;

use crate::extract::{ParseTree, TreeSet};
use crate::grammar::{Item, RegOp};
use crate::grammar::{NtId, TaggedCfg, TermId, TermKind, Vpg, VpgRule};
use crate::parser::{ParseEdge, ParserPda, TNt};

/// Balanced partner of the call at `i`, if `w[i+1..k]` is balanced and
/// `w[k]` is a return.
fn matching_return(g: &Vpg, w: &[TermId], i: usize) -> Option<usize> {
    let mut depth = 0usize;
    for (k, &t) in w.iter().enumerate().skip(i + 1) {
        match g.symbols().kind(t) {
            TermKind::Call => depth += 1,
            TermKind::Return if depth == 0 => return Some(k),
            TermKind::Return => depth -= 1,
            TermKind::Plain => {}
        }
    }
    None
}

type Memo = HashMap<(NtId, bool, usize, usize), Rc<BTreeSet<ParseTree>>>;

fn big(g: &Vpg, w: &[TermId], l: TNt, i: usize, j: usize, memo: &mut Memo) -> Rc<BTreeSet<ParseTree>> {
    let key = (l.nt, l.tag, i, j);
    if let Some(r) = memo.get(&key) {
        return r.clone();
    }
    let mut out = BTreeSet::new();
    if i == j {
        if g.is_nullable(l.nt) {
            out.insert(Vec::new());
        }
    } else {
        let t = w[i];
        let kind = g.symbols().kind(t);
        for rule in g.rules() {
            match *rule {
                VpgRule::Linear { head, term, next } if head == l.nt && term == t => {
                    if kind != TermKind::Plain && l.tag {
                        continue;
                    }
                    let to = TNt::new(next, l.tag);
                    let edge = match kind {
                        TermKind::Plain => ParseEdge::Plain { from: l, term, to },
                        TermKind::Call => ParseEdge::Call { from: l, term, to },
                        TermKind::Return => ParseEdge::Ret { from: l, term, to },
                    };
                    for v1 in big(g, w, to, i + 1, j, memo).iter() {
                        let mut v = vec![edge];
                        v.extend_from_slice(v1);
                        out.insert(v);
                    }
                }
                VpgRule::Matching { head, call, inner, ret, next } if head == l.nt && call == t => {
                    let Some(k) = matching_return(g, &w[..j], i) else { continue };
                    if w[k] != ret {
                        continue;
                    }
                    let l1 = TNt::new(inner, true);
                    let l2 = TNt::new(next, l.tag);
                    let inside = big(g, w, l1, i + 1, k, memo);
                    if inside.is_empty() {
                        continue;
                    }
                    let after = big(g, w, l2, k + 1, j, memo);
                    for v1 in inside.iter() {
                        for v2 in after.iter() {
                            let mut v = vec![ParseEdge::Call { from: l, term: call, to: l1 }];
                            v.extend_from_slice(v1);
                            v.push(ParseEdge::RetMatched { outer: l, inner: l1, term: ret, to: l2 });
                            v.extend_from_slice(v2);
                            out.insert(v);
                        }
                    }
                }
                _ => {}
            }
        }
    }
    let r = Rc::new(out);
    memo.insert(key, r.clone());
    r
}

/// All `v` with `(Lᵘ, w, v)` derivable by the big-step rules.
pub fn bigstep_enumerate(g: &Vpg, start: TNt, w: &[TermId]) -> BTreeSet<ParseTree> {
    let mut memo = Memo::new();
    (*big(g, w, start, 0, w.len(), &mut memo)).clone()
}

/// Big-step trees from `L0^false`.
pub fn bigstep_trees(g: &Vpg, w: &[TermId]) -> BTreeSet<ParseTree> {
    bigstep_enumerate(g, TNt::new(g.start(), false), w)
}

fn last_is(v: &[ParseEdge], l: TNt) -> bool {
    v.last().is_none_or(|e| e.target() == l)
}

/// Every `(v', E')` reachable from `(v, E)` by one small-step rule on `i`.
/// The stack has its top last.
pub fn smallstep_extend(g: &Vpg, v: &[ParseEdge], e: &[ParseEdge], i: TermId) -> TreeSet {
    let mut out = TreeSet::new();
    let kind = g.symbols().kind(i);
    let push = |out: &mut TreeSet, edge: ParseEdge, stack: Vec<ParseEdge>| {
        let mut t = v.to_vec();
        t.push(edge);
        out.insert((t, stack));
    };
    let tags: &[bool] = &[false, true];
    for rule in g.rules() {
        match *rule {
            VpgRule::Linear { head, term, next } if term == i => match kind {
                TermKind::Plain => {
                    for &u in tags {
                        let from = TNt::new(head, u);
                        if last_is(v, from) {
                            push(&mut out, ParseEdge::Plain { from, term, to: TNt::new(next, u) }, e.to_vec());
                        }
                    }
                }
                TermKind::Call => {
                    let from = TNt::new(head, false);
                    if last_is(v, from) {
                        let edge = ParseEdge::Call { from, term, to: TNt::new(next, false) };
                        let mut s = e.to_vec();
                        s.push(edge);
                        push(&mut out, edge, s);
                    }
                }
                TermKind::Return => {
                    let from = TNt::new(head, false);
                    if !last_is(v, from) {
                        continue;
                    }
                    let edge = ParseEdge::Ret { from, term, to: TNt::new(next, false) };
                    match e.last() {
                        None => push(&mut out, edge, Vec::new()),
                        Some(&ParseEdge::Call { from: l3, term: a, to: l4 }) if !l3.tag && !l4.tag => {
                            let pending = g.rules().iter().any(|r| {
                                matches!(*r, VpgRule::Linear { head, term, next }
                                    if head == l3.nt && term == a && next == l4.nt)
                            });
                            if pending {
                                push(&mut out, edge, e[..e.len() - 1].to_vec());
                            }
                        }
                        _ => {}
                    }
                }
            },
            VpgRule::Matching { head, call, inner, ret, next } => {
                if call == i {
                    for &u in tags {
                        let from = TNt::new(head, u);
                        if last_is(v, from) {
                            let edge = ParseEdge::Call { from, term: call, to: TNt::new(inner, true) };
                            let mut s = e.to_vec();
                            s.push(edge);
                            push(&mut out, edge, s);
                        }
                    }
                }
                if ret == i {
                    let Some(last) = v.last() else { continue };
                    let l3 = last.target();
                    if !(l3.tag && g.is_nullable(l3.nt)) {
                        continue;
                    }
                    if let Some(&ParseEdge::Call { from, term, to }) = e.last() {
                        if from.nt == head && term == call && to == TNt::new(inner, true) {
                            let edge = ParseEdge::RetMatched {
                                outer: from,
                                inner: to,
                                term: ret,
                                to: TNt::new(next, from.tag),
                            };
                            push(&mut out, edge, e[..e.len() - 1].to_vec());
                        }
                    }
                }
            }
            _ => {}
        }
    }
    out
}

/// Closure of the small-step relation from `([], ⊥)` over `w`, keeping
/// traces whose first nonterminal is `start`. One set per prefix length
/// `1..=|w|`.
pub fn smallstep_prefixes(g: &Vpg, start: TNt, w: &[TermId]) -> Vec<TreeSet> {
    let mut out: Vec<TreeSet> = Vec::with_capacity(w.len());
    let mut cur = TreeSet::from([(Vec::new(), Vec::new())]);
    for (k, &i) in w.iter().enumerate() {
        let mut next = TreeSet::new();
        for (v, e) in &cur {
            next.extend(smallstep_extend(g, v, e, i));
        }
        if k == 0 {
            next.retain(|(v, _)| v[0].source() == Some(start));
        }
        out.push(next.clone());
        cur = next;
    }
    out
}

/// Complete traces from `L0^false`: the small-step closure filtered by
/// a nullable `false` last nonterminal.
pub fn smallstep_trees(g: &Vpg, w: &[TermId]) -> BTreeSet<ParseTree> {
    if w.is_empty() {
        return if g.is_nullable(g.start()) { BTreeSet::from([Vec::new()]) } else { BTreeSet::new() };
    }
    let sets = smallstep_prefixes(g, TNt::new(g.start(), false), w);
    sets.last()
        .unwrap()
        .iter()
        .filter(|(v, _)| {
            let l = v.last().unwrap().target();
            !l.tag && g.is_nullable(l.nt)
        })
        .map(|(v, _)| v.clone())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("input length {len} exceeds bound {bound}")]
    BoundExceeded { len: usize, bound: usize },
}

/// Units of the substring table: nonterminals then groups in discovery order.
struct CfgTable<'a> {
    g: &'a TaggedCfg,
    groups: Vec<(&'a [Vec<Item>], RegOp)>,
    group_ids: HashMap<*const Item, usize>,
}

impl<'a> CfgTable<'a> {
    fn new(g: &'a TaggedCfg) -> Self {
        let mut t = CfgTable { g, groups: Vec::new(), group_ids: HashMap::new() };
        for r in &g.rules {
            t.collect(&r.rhs);
        }
        t
    }

    fn collect(&mut self, items: &'a [Item]) {
        for it in items {
            if let Item::Group { alts, op } = it {
                self.group_ids.insert(it as *const Item, self.groups.len());
                self.groups.push((alts, *op));
                for a in alts {
                    self.collect(a);
                }
            }
        }
    }

    fn unit_of(&self, it: &Item) -> Option<usize> {
        match it {
            Item::Nt(n) => Some(n.0 as usize),
            Item::Group { .. } => Some(self.g.symbols.num_nonterminals() + self.group_ids[&(it as *const Item)]),
            Item::Term(_) => None,
        }
    }
}

/// Ends reachable by deriving `items` from position `i`.
fn seq_ends(t: &CfgTable, d: &[Vec<Vec<bool>>], w: &[TermId], items: &[Item], i: usize) -> Vec<bool> {
    let n = w.len();
    let mut cur = vec![false; n + 1];
    cur[i] = true;
    for it in items {
        let mut next = vec![false; n + 1];
        for k in (0..=n).filter(|&k| cur[k]) {
            match it {
                Item::Term(a) => {
                    if k < n && w[k] == *a {
                        next[k + 1] = true;
                    }
                }
                _ => {
                    let u = t.unit_of(it).unwrap();
                    for m in k..=n {
                        if d[u][k][m] {
                            next[m] = true;
                        }
                    }
                }
            }
        }
        cur = next;
    }
    cur
}

/// Whether the start symbol derives `w` as a plain CFG. Groups are
/// interpreted directly.
pub fn cfg_derive_enumerate(g: &TaggedCfg, w: &[TermId], bound: usize) -> Result<bool, OracleError> {
    if w.len() > bound {
        return Err(OracleError::BoundExceeded { len: w.len(), bound });
    }
    let n = w.len();
    let t = CfgTable::new(g);
    let nts = g.symbols.num_nonterminals();
    let units = nts + t.groups.len();
    let mut d = vec![vec![vec![false; n + 1]; n + 1]; units];
    loop {
        let mut changed = false;
        for u in 0..units {
            for i in 0..=n {
                let mut ends = vec![false; n + 1];
                if u < nts {
                    for r in g.rules_of(NtId(u as u32)) {
                        for (e, b) in seq_ends(&t, &d, w, &r.rhs, i).into_iter().enumerate() {
                            ends[e] |= b;
                        }
                    }
                } else {
                    let (alts, op) = t.groups[u - nts];
                    let mut once = vec![false; n + 1];
                    for a in alts {
                        for (e, b) in seq_ends(&t, &d, w, a, i).into_iter().enumerate() {
                            once[e] |= b;
                        }
                    }
                    ends.copy_from_slice(&once);
                    if matches!(op, RegOp::Optional | RegOp::Star) {
                        ends[i] = true;
                    }
                    if matches!(op, RegOp::Star | RegOp::Plus) {
                        for m in (i..=n).filter(|&m| once[m]) {
                            for e in m..=n {
                                if d[u][m][e] {
                                    ends[e] = true;
                                }
                            }
                        }
                    }
                }
                for e in i..=n {
                    if ends[e] && !d[u][i][e] {
                        d[u][i][e] = true;
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    Ok(d[g.start.0 as usize][0][n])
}

/// Like [`cfg_derive_enumerate`] on terminal names; unknown names give `false`.
pub fn cfg_derives_names(g: &TaggedCfg, w: &[&str], bound: usize) -> Result<bool, OracleError> {
    let mut ids = Vec::with_capacity(w.len());
    for name in w {
        match g.symbols.lookup_terminal(name) {
            Some(t) => ids.push(t),
            None => {
                if w.len() > bound {
                    return Err(OracleError::BoundExceeded { len: w.len(), bound });
                }
                return Ok(false);
            }
        }
    }
    cfg_derive_enumerate(g, &ids, bound)
}

/// First violated clause of the parsing invariants and the step (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Violation {
    pub clause: u8,
    pub step: usize,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invariant clause {} violated after token {}", self.clause, self.step)
    }
}

/// Checks, for each step `i`, that `vs[i]` is exactly the small-step set
/// from `L0^false`, that every call-edge stack agrees with the parser stack,
/// and that every trace ends in an edge of the current state.
pub fn check_parse_invariants(
    g: &Vpg,
    pda: &ParserPda,
    w: &[TermId],
    trace: &[(u32, Vec<u32>)],
    vs: &[TreeSet],
) -> Result<(), Violation> {
    let expected = smallstep_prefixes(g, TNt::new(g.start(), false), w);
    for (k, ((m, stack), v)) in trace.iter().zip(vs).enumerate() {
        let step = k + 1;
        if *v != expected[k] {
            return Err(Violation { clause: 1, step });
        }
        let state = pda.state(*m);
        for (tree, e) in v {
            let ok = match e.last() {
                None => stack.is_empty(),
                Some(top) => stack.last().is_some_and(|&h| pda.state(h).contains(top)),
            };
            if !ok {
                return Err(Violation { clause: 2, step });
            }
            if !tree.last().is_some_and(|last| state.contains(last)) {
                return Err(Violation { clause: 3, step });
            }
        }
    }
    if trace.len() != vs.len() || trace.len() != w.len() {
        return Err(Violation { clause: 1, step: trace.len().min(vs.len()) + 1 });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::extract::{complete_trees, extract, extract_prefixes};
    use crate::grammar::syntax::{nt_id, term_id};
    use crate::grammar::{parse_tagged_cfg, parse_vpg};

    fn toks(g: &Vpg, names: &[&str]) -> Vec<TermId> {
        names.iter().map(|n| term_id(g, n)).collect()
    }

    #[test]
    fn bigstep_fig2() {
        let g = parse_vpg(corpus::FIG2_VPG).unwrap();
        let l = TNt::new(nt_id(&g, "l"), false);
        assert_eq!(bigstep_enumerate(&g, l, &[]), BTreeSet::from([Vec::new()]));
        let w = toks(&g, &["'a'", "'c'", "'d'", "'b'"]);
        let trees = bigstep_enumerate(&g, l, &w);
        assert_eq!(trees.len(), 1);
        let t = trees.into_iter().next().unwrap();
        let shown: Vec<String> = t.iter().map(|e| e.display(g.symbols())).collect();
        assert_eq!(
            shown,
            ["(l,f) --<'a'--> (a,t)", "(a,t) --'c'--> (d,t)", "(d,t) --'d'--> (e,t)", "((l,f),(a,t)) --'b'>--> (l,f)"]
        );
    }

    #[test]
    fn bigstep_g2_four_trees() {
        let g = parse_vpg(corpus::G2_VPG).unwrap();
        let w = toks(&g, &["'c'", "'d'", "'c'", "'d'"]);
        assert_eq!(bigstep_trees(&g, &w).len(), 4);
        let w1 = toks(&g, &["'c'", "'d'"]);
        let one = bigstep_trees(&g, &w1);
        let shown: BTreeSet<String> =
            one.iter().map(|t| t.iter().map(|e| e.display(g.symbols())).collect::<Vec<_>>().join(" ")).collect();
        assert_eq!(
            shown,
            BTreeSet::from([
                "(l,f) --'c'--> (a,f) (a,f) --'d'--> (l,f)".to_string(),
                "(l,f) --'c'--> (b,f) (b,f) --'d'--> (l,f)".to_string(),
            ])
        );
    }

    #[test]
    fn smallstep_single_steps() {
        let g = parse_vpg(corpus::FIG2_VPG).unwrap();
        let a = term_id(&g, "'a'");
        let b = term_id(&g, "'b'");
        let l = TNt::new(nt_id(&g, "l"), false);
        let got: TreeSet =
            smallstep_extend(&g, &[], &[], a).into_iter().filter(|(v, _)| v[0].source() == Some(l)).collect();
        let e = ParseEdge::Call { from: l, term: a, to: TNt::new(nt_id(&g, "a"), true) };
        assert_eq!(got, TreeSet::from([(vec![e], vec![e])]));
        assert!(smallstep_extend(&g, &[], &[], b).is_empty());
    }

    #[test]
    fn smallstep_matches_bigstep_on_fig2() {
        let g = parse_vpg(corpus::FIG2_VPG).unwrap();
        let w = toks(&g, &["'a'", "'c'", "'d'", "'b'"]);
        assert_eq!(smallstep_trees(&g, &w), bigstep_trees(&g, &w));
    }

    #[test]
    fn cfg_membership() {
        let g = parse_tagged_cfg(corpus::APPENDIX_F_TCFG).unwrap();
        assert_eq!(cfg_derives_names(&g, &["'c'", "'a'", "'c'", "'b'"], 8), Ok(true));
        assert_eq!(cfg_derives_names(&g, &["'c'", "'a'", "'b'"], 8), Ok(false));
        assert_eq!(cfg_derives_names(&g, &["zzz"], 8), Ok(false));
        assert!(matches!(cfg_derives_names(&g, &["'c'"; 3], 2), Err(OracleError::BoundExceeded { .. })));
        let fig2 = parse_tagged_cfg(corpus::FIG2_VPG).unwrap();
        assert_eq!(cfg_derives_names(&fig2, &["'a'", "'c'", "'c'", "'b'"], 8), Ok(true));
        let groups = parse_tagged_cfg("l = 'x' ('y' | 'z')* 'w'? ;").unwrap();
        assert_eq!(cfg_derives_names(&groups, &["'x'", "'z'", "'y'", "'w'"], 8), Ok(true));
        assert_eq!(cfg_derives_names(&groups, &["'x'"], 8), Ok(true));
        assert_eq!(cfg_derives_names(&groups, &["'x'", "'w'", "'w'"], 8), Ok(false));
        let plus = parse_tagged_cfg("l = 'x'+ ;").unwrap();
        assert_eq!(cfg_derives_names(&plus, &[], 8), Ok(false));
        assert_eq!(cfg_derives_names(&plus, &["'x'"; 3], 8), Ok(true));
    }

    fn invariants_hold(src: &str, w: &[&str]) -> Result<(), Violation> {
        let g = parse_vpg(src).unwrap();
        let pda = ParserPda::build(&g);
        let w = toks(&g, w);
        let trace = pda.run_trace(&g, &w).unwrap();
        let ids: Vec<u32> = trace.iter().map(|(m, _)| *m).collect();
        let forest = pda.materialize(&ids);
        let vs = extract_prefixes(&g, &forest.refs(), true);
        check_parse_invariants(&g, &pda, &w, &trace, &vs)
    }

    #[test]
    fn invariants_on_worked_examples() {
        assert_eq!(invariants_hold(corpus::FIG2_VPG, &["'a'", "'c'", "'d'", "'b'"]), Ok(()));
        assert_eq!(invariants_hold(corpus::G2_VPG, &["'c'", "'d'", "'c'", "'d'"]), Ok(()));
        assert_eq!(invariants_hold(corpus::APPENDIX_B_VPG, &["'a'", "'b'", "'a'", "'a'", "'a'", "'b'", "'b'"]), Ok(()));
    }

    #[test]
    fn corrupted_tree_set_violates_first_clause() {
        let g = parse_vpg(corpus::FIG2_VPG).unwrap();
        let pda = ParserPda::build(&g);
        let w = toks(&g, &["'a'", "'c'", "'d'", "'b'"]);
        let trace = pda.run_trace(&g, &w).unwrap();
        let ids: Vec<u32> = trace.iter().map(|(m, _)| *m).collect();
        let forest = pda.materialize(&ids);
        let mut vs = extract_prefixes(&g, &forest.refs(), true);
        let (tree, stack) = vs[1].iter().next().unwrap().clone();
        vs[1].remove(&(tree.clone(), stack.clone()));
        let mut swapped = tree;
        let c = term_id(&g, "'c'");
        let l = nt_id(&g, "l");
        swapped[1] = ParseEdge::Plain { from: TNt::new(l, true), term: c, to: TNt::new(l, true) };
        vs[1].insert((swapped, stack));
        assert_eq!(check_parse_invariants(&g, &pda, &w, &trace, &vs), Err(Violation { clause: 1, step: 2 }));
    }

    #[test]
    fn literal_fold_differs_on_unpruned_forest() {
        let g = parse_vpg("l = <A m B> l | ; m = C n ; n = ;").unwrap();
        let pda = ParserPda::build(&g);
        let w = toks(&g, &["A", "B"]);
        let run = pda.run(&g, &w).unwrap();
        let forest = pda.materialize(&run.forest);
        let literal = complete_trees(&g, &forest.refs(), &extract(&g, &forest.refs()));
        let strict = complete_trees(&g, &forest.refs(), &crate::extract::extract_strict(&g, &forest.refs()));
        assert!(strict.is_empty());
        assert_eq!(literal.len(), 1);
        assert!(bigstep_trees(&g, &w).is_empty());
    }
}
