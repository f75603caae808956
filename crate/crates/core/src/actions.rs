//! Semantic action expressions and the per-rule action table.
//!
//! Text form: `l⁶`, `@{ body }²`, and composition `l⁶∘a¹` (outer on the left).

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ActionExpr {
    /// Builds a tree node named `head` from `arity` values.
    Default { head: String, arity: usize },
    /// Opaque host-language action; stored, never executed.
    UserCode { text: String, arity: usize },
    /// `outer ∘ inner`: run `inner` first, then `outer` with its result on the stack.
    Compose(Box<ActionExpr>, Box<ActionExpr>),
}

impl ActionExpr {
    pub fn default_for(head: &str, arity: usize) -> Self {
        ActionExpr::Default { head: head.to_string(), arity }
    }

    /// `outer ∘ inner`, kept right-nested so equal chains compare equal.
    pub fn compose(outer: ActionExpr, inner: ActionExpr) -> Self {
        match outer {
            ActionExpr::Compose(a, b) => ActionExpr::Compose(a, Box::new(ActionExpr::compose(*b, inner))),
            atom => ActionExpr::Compose(Box::new(atom), Box::new(inner)),
        }
    }

    /// Number of stack values consumed.
    pub fn arity(&self) -> usize {
        match self {
            ActionExpr::Default { arity, .. } | ActionExpr::UserCode { arity, .. } => *arity,
            ActionExpr::Compose(outer, inner) => inner.arity() + outer.arity().saturating_sub(1),
        }
    }

    /// Atoms from outermost to innermost.
    pub fn atoms(&self) -> Vec<&ActionExpr> {
        let mut out = Vec::new();
        let mut cur = self;
        loop {
            match cur {
                ActionExpr::Compose(outer, inner) => {
                    out.extend(outer.atoms());
                    cur = inner;
                }
                atom => {
                    out.push(atom);
                    return out;
                }
            }
        }
    }

    /// Rebuilds a right-nested composition from atoms, outermost first.
    pub fn from_atoms(mut atoms: Vec<ActionExpr>) -> Option<Self> {
        let mut acc = atoms.pop()?;
        while let Some(outer) = atoms.pop() {
            acc = ActionExpr::compose(outer, acc);
        }
        Some(acc)
    }

    /// The outermost atom.
    pub fn outermost(&self) -> &ActionExpr {
        match self {
            ActionExpr::Compose(outer, _) => outer.outermost(),
            atom => atom,
        }
    }

    /// Same expression with the outermost `Default` arity lowered by one.
    pub fn drop_one_from_outermost(&self) -> Option<ActionExpr> {
        match self {
            ActionExpr::Default { head, arity } if *arity > 0 => {
                Some(ActionExpr::Default { head: head.clone(), arity: arity - 1 })
            }
            ActionExpr::Compose(outer, inner) => {
                Some(ActionExpr::Compose(Box::new(outer.drop_one_from_outermost()?), inner.clone()))
            }
            _ => None,
        }
    }

    pub fn is_executable(&self) -> bool {
        self.atoms().iter().all(|a| matches!(a, ActionExpr::Default { .. }))
    }
}

pub(crate) fn superscript(n: usize) -> String {
    const DIGITS: [char; 10] = ['⁰', '¹', '²', '³', '⁴', '⁵', '⁶', '⁷', '⁸', '⁹'];
    n.to_string().chars().map(|c| DIGITS[c.to_digit(10).unwrap() as usize]).collect()
}

fn superscript_value(c: char) -> Option<usize> {
    "⁰¹²³⁴⁵⁶⁷⁸⁹".chars().position(|d| d == c)
}

impl fmt::Display for ActionExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ActionExpr::Default { head, arity } => write!(f, "{head}{}", superscript(*arity)),
            ActionExpr::UserCode { text, arity } => write!(f, "@{{{text}}}{}", superscript(*arity)),
            ActionExpr::Compose(outer, inner) => write!(f, "{outer}∘{inner}"),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ActionParseError {
    #[error("malformed action `{0}`")]
    Malformed(String),
    #[error("missing arity in action `{0}`")]
    MissingArity(String),
}

impl std::str::FromStr for ActionExpr {
    type Err = ActionParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let chars: Vec<char> = s.trim().chars().collect();
        let mut atoms = Vec::new();
        let mut i = 0;
        let malformed = || ActionParseError::Malformed(s.to_string());
        loop {
            let atom_start = i;
            let user = chars.get(i) == Some(&'@');
            let mut text = String::new();
            if user {
                if chars.get(i + 1) != Some(&'{') {
                    return Err(malformed());
                }
                i += 2;
                let mut depth = 1;
                while depth > 0 {
                    let c = *chars.get(i).ok_or_else(malformed)?;
                    match c {
                        '{' => depth += 1,
                        '}' => depth -= 1,
                        _ => {}
                    }
                    if depth > 0 {
                        text.push(c);
                    }
                    i += 1;
                }
            } else {
                while let Some(&c) = chars.get(i) {
                    if superscript_value(c).is_some() || c == '∘' {
                        break;
                    }
                    text.push(c);
                    i += 1;
                }
                if text.is_empty() {
                    return Err(malformed());
                }
            }
            let mut arity = None::<usize>;
            while let Some(d) = chars.get(i).and_then(|&c| superscript_value(c)) {
                arity = Some(arity.unwrap_or(0) * 10 + d);
                i += 1;
            }
            let arity = arity.ok_or_else(|| ActionParseError::MissingArity(chars[atom_start..].iter().collect()))?;
            atoms.push(if user {
                ActionExpr::UserCode { text, arity }
            } else {
                ActionExpr::Default { head: text, arity }
            });
            match chars.get(i) {
                None => break,
                Some('∘') => i += 1,
                Some(_) => return Err(malformed()),
            }
        }
        ActionExpr::from_atoms(atoms).ok_or_else(malformed)
    }
}

/// Action per VPG rule id; `None` means the rule's values pass through unchanged.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ActionTable {
    pub actions: Vec<Option<ActionExpr>>,
}

impl ActionTable {
    pub fn new(actions: Vec<Option<ActionExpr>>) -> Self {
        ActionTable { actions }
    }

    pub fn get(&self, rule: usize) -> Option<&Option<ActionExpr>> {
        self.actions.get(rule)
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    /// Sidecar text: one `id<TAB>action` line per rule, `-` for none.
    pub fn to_sidecar(&self) -> String {
        let mut out = String::new();
        for (id, a) in self.actions.iter().enumerate() {
            match a {
                Some(a) => out.push_str(&format!("{id}\t{a}\n")),
                None => out.push_str(&format!("{id}\t-\n")),
            }
        }
        out
    }

    pub fn from_sidecar(text: &str) -> Result<Self, ActionParseError> {
        let mut actions = Vec::new();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let (id, body) = line.split_once('\t').ok_or_else(|| ActionParseError::Malformed(line.to_string()))?;
            let id: usize = id.trim().parse().map_err(|_| ActionParseError::Malformed(line.to_string()))?;
            if id != actions.len() {
                return Err(ActionParseError::Malformed(line.to_string()));
            }
            actions.push(if body.trim() == "-" { None } else { Some(body.parse()?) });
        }
        Ok(ActionTable { actions })
    }
}
