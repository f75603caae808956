use crate::actions::ActionExpr;
use crate::grammar::{CfgRule, Item, RegOp, TaggedCfg};

/// Replaces every group by a fresh nonterminal `N`, innermost first:
/// `N → ε | s N` for `*`, `N → ε | s` for `?`, `N → s N | s` for `+` and
/// `N → s` for a plain group, one rule per alternative `s`. Group rules get
/// a default action, so group values end up under an `N` node.
pub fn desugar_regex_ops(g: &TaggedCfg) -> TaggedCfg {
    let mut out = TaggedCfg { symbols: g.symbols.clone(), rules: Vec::new(), start: g.start };
    for r in &g.rules {
        let mut generated = Vec::new();
        let rhs = lower(&mut out, &r.rhs, &mut generated);
        out.rules.push(CfgRule { head: r.head, rhs, action: r.action.clone(), pos: r.pos });
        out.rules.extend(generated);
    }
    out
}

fn lower(g: &mut TaggedCfg, items: &[Item], generated: &mut Vec<CfgRule>) -> Vec<Item> {
    items
        .iter()
        .map(|it| match it {
            Item::Group { alts, op } => {
                let alts: Vec<Vec<Item>> = alts.iter().map(|a| lower(g, a, generated)).collect();
                let n = g.symbols.fresh_nonterminal();
                let name = g.symbols.nt_name(n).to_string();
                let mut push = |rhs: Vec<Item>| {
                    let action = ActionExpr::default_for(&name, rhs.len());
                    if !generated.iter().any(|r: &CfgRule| r.head == n && r.rhs == rhs) {
                        generated.push(CfgRule { head: n, rhs, action, pos: (0, 0) });
                    }
                };
                if matches!(op, RegOp::Star | RegOp::Optional) {
                    push(Vec::new());
                }
                for a in &alts {
                    if matches!(op, RegOp::Star | RegOp::Plus) {
                        let mut rhs = a.clone();
                        rhs.push(Item::Nt(n));
                        push(rhs);
                    }
                }
                if !matches!(op, RegOp::Star) {
                    for a in &alts {
                        push(a.clone());
                    }
                }
                Item::Nt(n)
            }
            other => other.clone(),
        })
        .collect()
}
