//! Semantic actions over VPG parse trees.
//!
//! A trace is read as a prefix-notation program: every edge contributes its
//! rule's action followed by its token, and the `ε`-rule action of the
//! segment's last nonterminal is emitted before each matched return and at
//! the end. Evaluating the program right to left with `Default` actions
//! rebuilds the tree of the source grammar.

use std::fmt;

use thiserror::Error;

use crate::actions::{ActionExpr, ActionTable};
use crate::grammar::{Item, NtId, TaggedCfg, TermId, Vpg, VpgRule};
use crate::parser::ParseEdge;

/// A tree of the source grammar. Leaves are tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CfgTree {
    Leaf { term: String, lexeme: Option<String> },
    Node { name: String, children: Vec<CfgTree> },
}

impl CfgTree {
    pub fn leaf_text(&self) -> Option<&str> {
        match self {
            CfgTree::Leaf { term, lexeme } => Some(lexeme.as_deref().unwrap_or(term)),
            CfgTree::Node { .. } => None,
        }
    }

    /// Terminal names along the frontier.
    pub fn frontier(&self) -> Vec<&str> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(t) = stack.pop() {
            match t {
                CfgTree::Leaf { term, .. } => out.push(term.as_str()),
                CfgTree::Node { children, .. } => stack.extend(children.iter().rev()),
            }
        }
        out
    }

    /// `(L,[(A,[c]),⟨a,E⁰])` style.
    pub fn to_bracket(&self) -> String {
        match self {
            CfgTree::Leaf { .. } => self.leaf_text().unwrap().to_string(),
            CfgTree::Node { name, children } if children.is_empty() => format!("{name}⁰"),
            CfgTree::Node { name, children } => {
                let parts: Vec<String> = children.iter().map(CfgTree::to_bracket).collect();
                format!("({name},[{}])", parts.join(","))
            }
        }
    }

    /// `(l (a c) ⟨a e⁰)` style; leaves with spaces or parentheses are quoted.
    pub fn to_sexpr(&self) -> String {
        match self {
            CfgTree::Leaf { .. } => {
                let text = self.leaf_text().unwrap();
                if text.is_empty() || text.contains(|c: char| c.is_whitespace() || c == '(' || c == ')' || c == '"') {
                    format!("{text:?}")
                } else {
                    text.to_string()
                }
            }
            CfgTree::Node { name, children } if children.is_empty() => format!("{name}⁰"),
            CfgTree::Node { name, children } => {
                let parts: Vec<String> = children.iter().map(CfgTree::to_sexpr).collect();
                format!("({name} {})", parts.join(" "))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StackItem {
    Push(CfgTree),
    Apply(ActionExpr),
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct StackProgram {
    pub items: Vec<StackItem>,
}

impl fmt::Display for StackProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .items
            .iter()
            .map(|i| match i {
                StackItem::Push(v) => v.to_bracket(),
                StackItem::Apply(a) => a.to_string(),
            })
            .collect();
        write!(f, "[{}]", parts.join(","))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuntimeError {
    #[error("no action known for the rule of edge {0}")]
    MissingAction(usize),
    #[error("matched return at edge {0} has no call")]
    UnpairedReturn(usize),
    #[error("stack underflow applying `{0}`")]
    StackUnderflow(String),
    #[error("program left {0} values instead of one")]
    MultipleResults(usize),
    #[error("user action `{0}` cannot be executed")]
    NotExecutable(String),
}

/// Default actions `head^|rhs|` for every rule.
pub fn default_actions(g: &Vpg) -> ActionTable {
    ActionTable::new(
        g.rules().iter().map(|r| Some(ActionExpr::default_for(g.symbols().nt_name(r.head()), r.rhs_len()))).collect(),
    )
}

fn rule_action(g: &Vpg, actions: &ActionTable, rule: &VpgRule, k: usize) -> Result<Option<ActionExpr>, RuntimeError> {
    let id = g.rule_id(rule).ok_or(RuntimeError::MissingAction(k))?;
    actions.get(id).cloned().ok_or(RuntimeError::MissingAction(k))
}

fn eps_action(g: &Vpg, actions: &ActionTable, n: NtId, k: usize) -> Result<Option<ActionExpr>, RuntimeError> {
    rule_action(g, actions, &VpgRule::Empty { head: n }, k)
}

/// Program for a complete trace. `lexemes` is aligned with the tokens and
/// may be shorter; missing entries fall back to the terminal name.
pub fn tree_to_stack_machine(
    g: &Vpg,
    actions: &ActionTable,
    tree: &[ParseEdge],
    lexemes: &[Option<String>],
) -> Result<StackProgram, RuntimeError> {
    let n = tree.len();
    let mut partner = vec![None; n];
    let mut open = Vec::new();
    for (k, e) in tree.iter().enumerate() {
        match e {
            ParseEdge::Call { .. } => open.push(k),
            ParseEdge::RetMatched { .. } => {
                let i = open.pop().ok_or(RuntimeError::UnpairedReturn(k))?;
                partner[i] = Some(k);
            }
            ParseEdge::Ret { .. } => {
                open.pop();
            }
            _ => {}
        }
    }
    let leaf = |k: usize, t: TermId| CfgTree::Leaf {
        term: g.symbols().term_name(t).to_string(),
        lexeme: lexemes.get(k).cloned().flatten(),
    };
    let mut items = Vec::with_capacity(2 * n + 1);
    let apply = |items: &mut Vec<StackItem>, a: Option<ActionExpr>| {
        if let Some(a) = a {
            items.push(StackItem::Apply(a));
        }
    };
    for (k, e) in tree.iter().enumerate() {
        let rule = match *e {
            ParseEdge::Plain { from, term, to } | ParseEdge::Ret { from, term, to } => {
                Some(VpgRule::Linear { head: from.nt, term, next: to.nt })
            }
            ParseEdge::Call { from, term, to } if to.tag => {
                let j = partner[k].ok_or(RuntimeError::MissingAction(k))?;
                let ParseEdge::RetMatched { term: ret, to: next, .. } = tree[j] else { unreachable!() };
                Some(VpgRule::Matching { head: from.nt, call: term, inner: to.nt, ret, next: next.nt })
            }
            ParseEdge::Call { from, term, to } => Some(VpgRule::Linear { head: from.nt, term, next: to.nt }),
            ParseEdge::RetMatched { .. } => {
                let last = tree[k - 1].target().nt;
                apply(&mut items, eps_action(g, actions, last, k)?);
                None
            }
            ParseEdge::Start { .. } => None,
        };
        if let Some(rule) = rule {
            apply(&mut items, rule_action(g, actions, &rule, k)?);
        }
        if let Some(t) = e.term() {
            items.push(StackItem::Push(leaf(k, t)));
        }
    }
    let last = tree.last().map_or(g.start(), |e| e.target().nt);
    apply(&mut items, eps_action(g, actions, last, n)?);
    Ok(StackProgram { items })
}

/// Evaluates right to left; `Compose` runs its inner action first.
pub fn eval_stack_machine(p: &StackProgram) -> Result<CfgTree, RuntimeError> {
    let mut stack: Vec<CfgTree> = Vec::new();
    for item in p.items.iter().rev() {
        match item {
            StackItem::Push(v) => stack.push(v.clone()),
            StackItem::Apply(a) => {
                for atom in a.atoms().into_iter().rev() {
                    match atom {
                        ActionExpr::Default { head, arity } => {
                            if stack.len() < *arity {
                                return Err(RuntimeError::StackUnderflow(a.to_string()));
                            }
                            let children: Vec<CfgTree> = (0..*arity).map(|_| stack.pop().unwrap()).collect();
                            stack.push(CfgTree::Node { name: head.clone(), children });
                        }
                        other => return Err(RuntimeError::NotExecutable(other.to_string())),
                    }
                }
            }
        }
    }
    match stack.len() {
        1 => Ok(stack.pop().unwrap()),
        k => Err(RuntimeError::MultipleResults(k)),
    }
}

pub fn vpg_tree_to_cfg_tree(
    g: &Vpg,
    actions: &ActionTable,
    tree: &[ParseEdge],
    lexemes: &[Option<String>],
) -> Result<CfgTree, RuntimeError> {
    eval_stack_machine(&tree_to_stack_machine(g, actions, tree, lexemes)?)
}

/// Whether `t` is a derivation tree of `tokens` under the group-free grammar
/// `g`. A node may omit a final child for a nonterminal whose only rule is
/// `ε`, since translation drops those values.
pub fn check_cfg_tree(g: &TaggedCfg, t: &CfgTree, tokens: &[&str]) -> bool {
    let CfgTree::Node { name, .. } = t else { return false };
    if g.symbols.lookup_nonterminal(name) != Some(g.start) {
        return false;
    }
    t.frontier() == tokens && node_ok(g, t)
}

fn node_ok(g: &TaggedCfg, t: &CfgTree) -> bool {
    let CfgTree::Node { name, children } = t else { return true };
    let Some(head) = g.symbols.lookup_nonterminal(name) else { return false };
    let eps_only = |n: NtId| {
        let mut rs = g.rules_of(n);
        matches!(rs.next(), Some(r) if r.rhs.is_empty()) && rs.next().is_none()
    };
    let fits = |rhs: &[Item]| -> bool {
        let full = rhs.len() == children.len();
        let short = rhs.len() == children.len() + 1 && matches!(rhs.last(), Some(Item::Nt(n)) if eps_only(*n));
        (full || short)
            && rhs.iter().zip(children).all(|(item, c)| match (item, c) {
                (Item::Term(x), CfgTree::Leaf { term, .. }) => g.symbols.term_name(*x) == term,
                (Item::Nt(x), CfgTree::Node { name, .. }) => g.symbols.nt_name(*x) == name,
                _ => false,
            })
    };
    g.rules_of(head).any(|r| fits(&r.rhs)) && children.iter().all(|c| node_ok(g, c))
}
