use std::collections::HashMap;
use std::fmt;

/// Interned terminal handle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TermId(pub u32);

/// Interned nonterminal handle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NtId(pub u32);

impl TermId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl NtId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TermKind {
    Plain,
    Call,
    Return,
}

impl fmt::Display for TermKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TermKind::Plain => "plain",
            TermKind::Call => "call",
            TermKind::Return => "return",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Terminal {
    pub name: String,
    pub kind: TermKind,
}

/// Symbol tables shared by every grammar representation.
///
/// Terminal names keep their surface spelling, so a quoted literal is stored
/// with its quotes (`'c'`) and never collides with an identifier (`C`).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Symbols {
    terminals: Vec<Terminal>,
    nonterminals: Vec<String>,
    term_index: HashMap<String, TermId>,
    nt_index: HashMap<String, NtId>,
    fresh_counter: u32,
}

impl Symbols {
    pub fn new() -> Self {
        Self::default()
    }

    /// Interns a terminal. Returns the existing id if the name is known with
    /// the same kind, and `Err(existing_kind)` if the kinds differ.
    pub fn add_terminal(&mut self, name: &str, kind: TermKind) -> Result<TermId, TermKind> {
        if let Some(&id) = self.term_index.get(name) {
            let old = self.terminals[id.index()].kind;
            return if old == kind { Ok(id) } else { Err(old) };
        }
        let id = TermId(self.terminals.len() as u32);
        self.terminals.push(Terminal { name: name.to_string(), kind });
        self.term_index.insert(name.to_string(), id);
        Ok(id)
    }

    pub fn intern_nonterminal(&mut self, name: &str) -> NtId {
        if let Some(&id) = self.nt_index.get(name) {
            return id;
        }
        let id = NtId(self.nonterminals.len() as u32);
        self.nonterminals.push(name.to_string());
        self.nt_index.insert(name.to_string(), id);
        id
    }

    /// Last number used for a fresh name.
    pub fn fresh_counter(&self) -> u32 {
        self.fresh_counter
    }

    pub(crate) fn set_fresh_counter(&mut self, n: u32) {
        self.fresh_counter = n;
    }

    /// Allocates a fresh `_g<N>` nonterminal.
    pub fn fresh_nonterminal(&mut self) -> NtId {
        loop {
            self.fresh_counter += 1;
            let name = format!("_g{}", self.fresh_counter);
            if !self.nt_index.contains_key(&name) {
                return self.intern_nonterminal(&name);
            }
        }
    }

    pub fn terminal(&self, t: TermId) -> &Terminal {
        &self.terminals[t.index()]
    }

    pub fn term_name(&self, t: TermId) -> &str {
        &self.terminals[t.index()].name
    }

    pub fn kind(&self, t: TermId) -> TermKind {
        self.terminals[t.index()].kind
    }

    pub fn nt_name(&self, n: NtId) -> &str {
        &self.nonterminals[n.index()]
    }

    pub fn lookup_terminal(&self, name: &str) -> Option<TermId> {
        self.term_index.get(name).copied()
    }

    pub fn lookup_nonterminal(&self, name: &str) -> Option<NtId> {
        self.nt_index.get(name).copied()
    }

    pub fn num_terminals(&self) -> usize {
        self.terminals.len()
    }

    pub fn num_nonterminals(&self) -> usize {
        self.nonterminals.len()
    }

    pub fn terminal_ids(&self) -> impl Iterator<Item = TermId> {
        (0..self.terminals.len() as u32).map(TermId)
    }

    pub fn nonterminal_ids(&self) -> impl Iterator<Item = NtId> {
        (0..self.nonterminals.len() as u32).map(NtId)
    }

    pub fn terminals_of_kind(&self, kind: TermKind) -> Vec<TermId> {
        self.terminal_ids().filter(|&t| self.kind(t) == kind).collect()
    }

    /// Surface spelling with the kind marker: `<'a'`, `'b'>` or `'c'`.
    pub fn display_term(&self, t: TermId) -> String {
        let term = self.terminal(t);
        match term.kind {
            TermKind::Plain => term.name.clone(),
            TermKind::Call => format!("<{}", term.name),
            TermKind::Return => format!("{}>", term.name),
        }
    }
}
