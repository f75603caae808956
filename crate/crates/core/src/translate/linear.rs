use std::collections::{BTreeSet, HashSet};

use super::{RuleSet, SItem, SRule, TranslateError};
use crate::actions::ActionExpr;
use crate::grammar::NtId;

fn compose(outer: Option<&ActionExpr>, inner: Option<ActionExpr>) -> Option<ActionExpr> {
    match (outer, inner) {
        (None, x) => x,
        (Some(o), None) => Some(o.clone()),
        (Some(o), Some(i)) => Some(ActionExpr::compose(o.clone(), i)),
    }
}

/// Nonterminals that `L` waits on: anything at a non-final position, and a
/// leading nonterminal even when it is also final.
fn waits_on(r: &SRule) -> impl Iterator<Item = NtId> + '_ {
    let last = r.items.len().saturating_sub(1);
    r.items.iter().enumerate().filter_map(move |(p, i)| match *i {
        SItem::Nt(n) if p < last || p == 0 => Some(n),
        _ => None,
    })
}

struct Rewriter {
    rs: RuleSet,
    remaining: BTreeSet<NtId>,
}

impl Rewriter {
    fn eps_only(&self, n: NtId) -> bool {
        let mut it = self.rs.rules_of(n);
        matches!(it.next(), Some(r) if r.items.is_empty()) && it.next().is_none()
    }

    fn sink(&self) -> Option<NtId> {
        self.remaining
            .iter()
            .copied()
            .find(|&l| self.rs.rules_of(l).all(|r| waits_on(r).all(|n| n == l || !self.remaining.contains(&n))))
    }

    /// Rewrites the non-linear rules of `l` in place. Returns whether every
    /// rule of `l` is now linear.
    fn rewrite(&mut self, l: NtId) -> Result<bool, TranslateError> {
        let mut i = 0;
        while i < self.rs.rules.len() {
            let r = &self.rs.rules[i];
            if r.head != l || r.is_linear() {
                i += 1;
                continue;
            }
            if let SItem::Nt(first) = r.items[0] {
                if first == l {
                    return Err(TranslateError::InternalNonSink(format!(
                        "left self-reference in `{}` survived validation",
                        self.rs.display_rule(r)
                    )));
                }
                if self.remaining.contains(&first) {
                    return Ok(false);
                }
                let replaced = self.expand(i, first);
                self.replace(i, replaced);
                continue;
            }
            let p = r.items.iter().position(|x| matches!(x, SItem::Nt(_))).expect("non-linear rule has a nonterminal");
            let suffix = r.items[p..].to_vec();
            let (n, fresh) = self.rs.abbreviate(suffix.clone());
            if fresh {
                self.rs.rules.push(SRule { head: n, items: suffix, action: None });
                self.remaining.insert(n);
            }
            let r = &mut self.rs.rules[i];
            r.items.truncate(p);
            r.items.push(SItem::Nt(n));
            i += 1;
        }
        Ok(true)
    }

    /// Rules replacing `L → L' s` (rule `i`), one per rule of `L'`.
    fn expand(&self, i: usize, first: NtId) -> Vec<SRule> {
        let r = &self.rs.rules[i];
        let rest = &r.items[1..];
        let mut out = Vec::new();
        for r2 in self.rs.rules_of(first) {
            let mut items = r2.items.clone();
            let mut inner = r2.action.clone();
            if let (Some(&SItem::Nt(tail)), false) = (items.last(), rest.is_empty()) {
                let droppable = inner.as_ref().and_then(|a| match a.outermost() {
                    ActionExpr::Default { .. } => a.drop_one_from_outermost(),
                    _ => None,
                });
                if self.eps_only(tail) && droppable.is_some() {
                    items.pop();
                    inner = droppable;
                }
            }
            items.extend_from_slice(rest);
            out.push(SRule { head: r.head, items, action: compose(r.action.as_ref(), inner) });
        }
        out
    }

    /// Replaces rule `i` by `new`, skipping rules already present.
    fn replace(&mut self, i: usize, new: Vec<SRule>) {
        self.rs.rules.remove(i);
        let existing: HashSet<(NtId, Vec<SItem>)> = self.rs.rules.iter().map(|r| (r.head, r.items.clone())).collect();
        let mut seen = HashSet::new();
        let keep: Vec<SRule> = new
            .into_iter()
            .filter(|r| !existing.contains(&(r.head, r.items.clone())) && seen.insert(r.items.clone()))
            .collect();
        for (k, r) in keep.into_iter().enumerate() {
            self.rs.rules.insert(i + k, r);
        }
    }
}

/// Sink elimination: repeatedly pick a nonterminal whose dependencies are
/// all linear, expand leading nonterminals with their rules and abbreviate
/// any remaining `L' s` suffix. At most `cap` rounds.
pub fn to_linear_form(simple: &RuleSet, cap: usize) -> Result<RuleSet, TranslateError> {
    let mut w = Rewriter { rs: simple.clone(), remaining: BTreeSet::new() };
    w.remaining = w.rs.rules.iter().map(|r| r.head).collect();
    let mut rounds = 0;
    while !w.remaining.is_empty() {
        if rounds >= cap {
            return Err(TranslateError::IterationCapExceeded(cap));
        }
        rounds += 1;
        let l = w.sink().ok_or_else(|| {
            let names: Vec<&str> = w.remaining.iter().map(|&n| w.rs.symbols.nt_name(n)).collect();
            TranslateError::InternalNonSink(format!("no sink among {}", names.join(", ")))
        })?;
        if w.rewrite(l)? {
            w.remaining.remove(&l);
        }
    }
    Ok(w.rs)
}
