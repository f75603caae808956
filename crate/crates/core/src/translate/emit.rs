use std::collections::HashSet;

use super::{RuleSet, SItem, TranslateError};
use crate::actions::{ActionExpr, ActionTable};
use crate::grammar::{Mode, NtId, TermKind, Vpg, VpgRule};

/// Chains `L → t1 .. tk [L']` into `L → t1 L1; L1 → t2 L2; ..` with a fresh
/// `ε` end when there is no `L'`. Only the first rule of a chain keeps the
/// action.
pub fn linear_to_vpg(rs: &RuleSet) -> Result<(Vpg, ActionTable), TranslateError> {
    let mut symbols = rs.symbols.clone();
    let mut rules: Vec<VpgRule> = Vec::new();
    let mut actions: Vec<Option<ActionExpr>> = Vec::new();
    let mut seen = HashSet::new();
    let mut add = |rule: VpgRule, action: Option<ActionExpr>, rules: &mut Vec<VpgRule>| {
        if seen.insert(rule) {
            rules.push(rule);
            actions.push(action);
        }
    };
    for r in &rs.rules {
        if !r.is_linear() {
            return Err(TranslateError::InternalNonSink(format!("`{}` is not linear", rs.display_rule(r))));
        }
        let (body, tail) = match r.items.last() {
            Some(&SItem::Nt(n)) => (&r.items[..r.items.len() - 1], Some(n)),
            _ => (&r.items[..], None),
        };
        if body.is_empty() {
            add(VpgRule::Empty { head: r.head }, r.action.clone(), &mut rules);
            continue;
        }
        let mut cur = r.head;
        let mut pending_end: Option<NtId> = None;
        for (k, item) in body.iter().enumerate() {
            let next = if k + 1 < body.len() {
                symbols.fresh_nonterminal()
            } else if let Some(t) = tail {
                t
            } else {
                let e = symbols.fresh_nonterminal();
                pending_end = Some(e);
                e
            };
            let rule = match *item {
                SItem::Term(term) => VpgRule::Linear { head: cur, term, next },
                SItem::Matched { call, inner, ret } => VpgRule::Matching { head: cur, call, inner, ret, next },
                SItem::Nt(_) => unreachable!("checked linear"),
            };
            add(rule, if k == 0 { r.action.clone() } else { None }, &mut rules);
            cur = next;
        }
        if let Some(e) = pending_end {
            add(VpgRule::Empty { head: e }, None, &mut rules);
        }
    }
    let pending =
        rules.iter().any(|r| matches!(*r, VpgRule::Linear { term, .. } if symbols.kind(term) != TermKind::Plain));
    let mode = if pending { Mode::General } else { Mode::WellMatched };
    let vpg = Vpg::new(symbols, rules, rs.start, mode)?;
    vpg.check_wellformed()?;
    Ok((vpg, ActionTable::new(actions)))
}
