use std::collections::{HashMap, HashSet, VecDeque};

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};
use thiserror::Error;

use super::{RuleSet, SItem};
use crate::grammar::NtId;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DepKind {
    /// The target is the body of a matched token.
    Matched,
    /// The target ends the rule.
    Tail,
    Other,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DepEdge {
    pub from: NtId,
    pub to: NtId,
    pub kind: DepKind,
    /// Whether the items before the occurrence can derive ε.
    pub prefix_nullable: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValidationError {
    #[error("left-recursion-like cycle: {}", .0.join(" -> "))]
    LeftRecursionLike(Vec<String>),
    #[error("cycle through a non-tail position: {}", .0.join(" -> "))]
    NonTailCycle(Vec<String>),
}

/// One edge per nonterminal occurrence.
pub fn dependency_graph(rs: &RuleSet) -> Vec<DepEdge> {
    let nullable = rs.nullable();
    let mut out = Vec::new();
    for r in &rs.rules {
        let mut prefix_nullable = true;
        for (p, item) in r.items.iter().enumerate() {
            match *item {
                SItem::Nt(n) => {
                    let kind = if p + 1 == r.items.len() { DepKind::Tail } else { DepKind::Other };
                    out.push(DepEdge { from: r.head, to: n, kind, prefix_nullable });
                    prefix_nullable &= nullable[n.index()];
                }
                SItem::Matched { inner, .. } => {
                    out.push(DepEdge { from: r.head, to: inner, kind: DepKind::Matched, prefix_nullable });
                    prefix_nullable = false;
                }
                SItem::Term(_) => prefix_nullable = false,
            }
        }
    }
    out
}

/// Every cycle must pass through a matched token, or consist of tail edges
/// of which at least one has a non-nullable prefix. Checked per strongly
/// connected component of the graph without matched edges.
pub fn validate(rs: &RuleSet) -> Result<(), ValidationError> {
    let edges = dependency_graph(rs);
    let n = rs.symbols.num_nonterminals();
    let mut graph: DiGraph<NtId, DepEdge> = DiGraph::with_capacity(n, edges.len());
    let nodes: Vec<NodeIndex> = (0..n).map(|i| graph.add_node(NtId(i as u32))).collect();
    for e in edges.iter().filter(|e| e.kind != DepKind::Matched) {
        graph.add_edge(nodes[e.from.index()], nodes[e.to.index()], *e);
    }
    let mut comp = vec![usize::MAX; n];
    for (c, scc) in tarjan_scc(&graph).into_iter().enumerate() {
        for v in scc {
            comp[v.index()] = c;
        }
    }
    let same = |e: &DepEdge| comp[e.from.index()] == comp[e.to.index()];
    let name = |x: NtId| rs.symbols.nt_name(x).to_string();

    // Non-tail edges inside a component, in rule order.
    if let Some(e) = edges.iter().find(|e| e.kind == DepKind::Other && same(e)) {
        let mut cycle: Vec<String> = vec![name(e.from)];
        cycle.extend(path(&edges, e.to, e.from, &same).into_iter().map(name));
        return Err(if e.prefix_nullable {
            ValidationError::LeftRecursionLike(cycle)
        } else {
            ValidationError::NonTailCycle(cycle)
        });
    }

    // Cycles made only of nullable-prefix tail edges.
    let weak = |e: &DepEdge| e.kind == DepKind::Tail && e.prefix_nullable;
    let mut sub: DiGraph<NtId, ()> = DiGraph::with_capacity(n, 0);
    let sub_nodes: Vec<NodeIndex> = (0..n).map(|i| sub.add_node(NtId(i as u32))).collect();
    for e in edges.iter().filter(|e| weak(e) && same(e)) {
        sub.add_edge(sub_nodes[e.from.index()], sub_nodes[e.to.index()], ());
    }
    for scc in tarjan_scc(&sub) {
        let v = scc[0];
        let looped = scc.len() > 1 || sub.contains_edge(v, v);
        if looped {
            let members: HashSet<NtId> = scc.iter().map(|&w| sub[w]).collect();
            let e = edges
                .iter()
                .find(|e| weak(e) && members.contains(&e.from) && members.contains(&e.to))
                .expect("component has an internal edge");
            let mut cycle = vec![name(e.from)];
            cycle.extend(path(&edges, e.to, e.from, &|x| weak(x) && same(x)).into_iter().map(name));
            return Err(ValidationError::LeftRecursionLike(cycle));
        }
    }
    Ok(())
}

/// Shortest path `from ..= to` over non-matched edges accepted by `keep`.
fn path(edges: &[DepEdge], from: NtId, to: NtId, keep: &dyn Fn(&DepEdge) -> bool) -> Vec<NtId> {
    let mut prev: HashMap<NtId, NtId> = HashMap::new();
    let mut queue = VecDeque::from([from]);
    let mut seen = HashSet::from([from]);
    while let Some(x) = queue.pop_front() {
        if x == to {
            break;
        }
        for e in edges.iter().filter(|e| e.from == x && e.kind != DepKind::Matched && keep(e)) {
            if seen.insert(e.to) {
                prev.insert(e.to, x);
                queue.push_back(e.to);
            }
        }
    }
    let mut out = vec![to];
    let mut cur = to;
    while cur != from {
        match prev.get(&cur) {
            Some(&p) => {
                out.push(p);
                cur = p;
            }
            None => break,
        }
    }
    out.reverse();
    out
}
