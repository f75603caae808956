use std::collections::BTreeMap;

use super::{RuleSet, SItem, SRule, TranslateError};
use crate::grammar::{GrammarError, Item, TaggedCfg, TermKind};

/// Replaces each bracketed `<a s b>` by `<a L_s b>` with `L_s → s`,
/// innermost first. A single-nonterminal body is used as is; equal bodies
/// share one nonterminal. Expects a group-free grammar.
pub fn to_simple_form(g: &TaggedCfg) -> Result<RuleSet, TranslateError> {
    let mut rs = RuleSet { symbols: g.symbols.clone(), rules: Vec::new(), start: g.start, abbrev: BTreeMap::new() };
    for r in &g.rules {
        let mut generated = Vec::new();
        let items = simplify(&mut rs, &r.rhs, &mut generated)
            .ok_or_else(|| GrammarError::UnbalancedBrackets(g.symbols.nt_name(r.head).to_string()))?;
        rs.rules.push(SRule { head: r.head, items, action: Some(r.action.clone()) });
        rs.rules.extend(generated);
    }
    Ok(rs)
}

fn simplify(rs: &mut RuleSet, items: &[Item], generated: &mut Vec<SRule>) -> Option<Vec<SItem>> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < items.len() {
        match &items[i] {
            Item::Nt(n) => out.push(SItem::Nt(*n)),
            Item::Term(t) => match rs.symbols.kind(*t) {
                TermKind::Plain => out.push(SItem::Term(*t)),
                TermKind::Return => return None,
                TermKind::Call => {
                    let close = partner(rs, items, i)?;
                    let Item::Term(ret) = items[close] else { unreachable!() };
                    let body = simplify(rs, &items[i + 1..close], generated)?;
                    let inner = match body.as_slice() {
                        [SItem::Nt(n)] => *n,
                        _ => {
                            let (n, fresh) = rs.abbreviate(body.clone());
                            if fresh {
                                generated.push(SRule { head: n, items: body, action: None });
                            }
                            n
                        }
                    };
                    out.push(SItem::Matched { call: *t, inner, ret });
                    i = close;
                }
            },
            Item::Group { .. } => return None,
        }
        i += 1;
    }
    Some(out)
}

fn partner(rs: &RuleSet, items: &[Item], i: usize) -> Option<usize> {
    let mut depth = 0usize;
    for (k, it) in items.iter().enumerate().skip(i + 1) {
        if let Item::Term(t) = it {
            match rs.symbols.kind(*t) {
                TermKind::Call => depth += 1,
                TermKind::Return if depth == 0 => return Some(k),
                TermKind::Return => depth -= 1,
                TermKind::Plain => {}
            }
        }
    }
    None
}
