use std::collections::BTreeSet;

use super::symbols::{NtId, Symbols, TermId, TermKind};
use super::GrammarError;
use crate::actions::ActionExpr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RegOp {
    None,
    Optional,
    Star,
    Plus,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Item {
    Term(TermId),
    Nt(NtId),
    Group { alts: Vec<Vec<Item>>, op: RegOp },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CfgRule {
    pub head: NtId,
    pub rhs: Vec<Item>,
    pub action: ActionExpr,
    /// Source position (line, col) of the alternative, 0 for generated rules.
    pub pos: (usize, usize),
}

/// A context-free grammar whose terminals carry call/return tags.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedCfg {
    pub symbols: Symbols,
    pub rules: Vec<CfgRule>,
    pub start: NtId,
}

impl TaggedCfg {
    pub fn rules_of(&self, head: NtId) -> impl Iterator<Item = &CfgRule> {
        self.rules.iter().filter(move |r| r.head == head)
    }

    /// Least fixpoint of nullability over items and groups.
    pub fn nullable(&self) -> BTreeSet<NtId> {
        let mut set = BTreeSet::new();
        loop {
            let mut changed = false;
            for r in &self.rules {
                if !set.contains(&r.head) && seq_nullable(&r.rhs, &set) {
                    set.insert(r.head);
                    changed = true;
                }
            }
            if !changed {
                return set;
            }
        }
    }

    /// Every call must be closed by a return at the same nesting level of
    /// the same body (groups count as their own level).
    pub fn check_balanced(&self) -> Result<(), GrammarError> {
        for r in &self.rules {
            if !seq_balanced(&r.rhs, &self.symbols) {
                return Err(GrammarError::UnbalancedBrackets(self.symbols.nt_name(r.head).to_string()));
            }
        }
        Ok(())
    }

    pub fn has_groups(&self) -> bool {
        self.rules.iter().any(|r| r.rhs.iter().any(|i| matches!(i, Item::Group { .. })))
    }

    pub fn display_items(&self, items: &[Item]) -> String {
        display_items(&self.symbols, items)
    }

    /// Grammar file text, one alternative per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for r in &self.rules {
            let name = self.symbols.nt_name(r.head);
            let body = self.display_items(&r.rhs);
            let sep = if body.is_empty() { "" } else { " " };
            match &r.action {
                ActionExpr::UserCode { text, .. } => out.push_str(&format!("{name} ={sep}{body} @{{{text}}} ;\n")),
                _ => out.push_str(&format!("{name} ={sep}{body} ;\n")),
            }
        }
        out
    }
}

pub(crate) fn seq_nullable(items: &[Item], set: &BTreeSet<NtId>) -> bool {
    items.iter().all(|i| item_nullable(i, set))
}

pub(crate) fn item_nullable(item: &Item, set: &BTreeSet<NtId>) -> bool {
    match item {
        Item::Term(_) => false,
        Item::Nt(n) => set.contains(n),
        Item::Group { alts, op } => match op {
            RegOp::Optional | RegOp::Star => true,
            RegOp::None | RegOp::Plus => alts.iter().any(|a| seq_nullable(a, set)),
        },
    }
}

fn seq_balanced(items: &[Item], symbols: &Symbols) -> bool {
    let mut depth = 0usize;
    for item in items {
        match item {
            Item::Term(t) => match symbols.kind(*t) {
                TermKind::Call => depth += 1,
                TermKind::Return => {
                    if depth == 0 {
                        return false;
                    }
                    depth -= 1;
                }
                TermKind::Plain => {}
            },
            Item::Nt(_) => {}
            Item::Group { alts, .. } => {
                if !alts.iter().all(|a| seq_balanced(a, symbols)) {
                    return false;
                }
            }
        }
    }
    depth == 0
}

pub(crate) fn display_items(symbols: &Symbols, items: &[Item]) -> String {
    let parts: Vec<String> = items
        .iter()
        .map(|i| match i {
            Item::Term(t) => symbols.display_term(*t),
            Item::Nt(n) => symbols.nt_name(*n).to_string(),
            Item::Group { alts, op } => {
                let inner: Vec<String> = alts.iter().map(|a| display_items(symbols, a)).collect();
                let suffix = match op {
                    RegOp::None => "",
                    RegOp::Optional => "?",
                    RegOp::Star => "*",
                    RegOp::Plus => "+",
                };
                format!("({}){suffix}", inner.join(" | "))
            }
        })
        .collect();
    parts.join(" ")
}
