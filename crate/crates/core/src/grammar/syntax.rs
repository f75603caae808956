//! Grammar file reader.
//!
//! ```text
//! json  = value ;
//! obj   = <'{' pair (',' pair)* '}'> | <'{' '}'> ;   # postfix ? * +
//! e     = ;                                           # empty alternative
//! x     : A y @{ build(x) } ;                         # ':' works as '='
//! ```

use std::collections::{BTreeMap, HashSet};

use super::symbols::{NtId, Symbols, TermId, TermKind};
use super::tagged::{CfgRule, Item, RegOp, TaggedCfg};
use super::vpg::{Mode, Vpg, VpgRule};
use super::GrammarError;
use crate::actions::ActionExpr;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Syntax {
    TaggedCfg,
    Vpg,
}

#[derive(Debug, Clone)]
pub enum Grammar {
    Tagged(TaggedCfg),
    Vpg(Vpg),
}

pub fn parse_grammar_file(text: &str, syntax: Syntax) -> Result<Grammar, GrammarError> {
    match syntax {
        Syntax::TaggedCfg => parse_tagged_cfg(text).map(Grammar::Tagged),
        Syntax::Vpg => parse_vpg(text).map(Grammar::Vpg),
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Quoted(String),
    Define,
    Bar,
    Semi,
    LParen,
    RParen,
    Question,
    Star,
    Plus,
    Lt,
    Gt,
    Action(String),
}

type Pos = (usize, usize);

fn syntax_err(pos: Pos, msg: impl Into<String>) -> GrammarError {
    GrammarError::Syntax { line: pos.0, col: pos.1, msg: msg.into() }
}

fn lex(text: &str) -> Result<Vec<(Tok, Pos)>, GrammarError> {
    let chars: Vec<char> = text.chars().collect();
    let mut toks = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    macro_rules! bump {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }
    while i < chars.len() {
        let c = chars[i];
        let pos = (line, col);
        if c.is_whitespace() {
            bump!();
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                bump!();
            }
            continue;
        }
        let single = match c {
            '=' | ':' => Some(Tok::Define),
            '|' => Some(Tok::Bar),
            ';' => Some(Tok::Semi),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '?' => Some(Tok::Question),
            '*' => Some(Tok::Star),
            '+' => Some(Tok::Plus),
            '<' => Some(Tok::Lt),
            '>' => Some(Tok::Gt),
            _ => None,
        };
        if let Some(t) = single {
            toks.push((t, pos));
            bump!();
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                s.push(chars[i]);
                bump!();
            }
            toks.push((Tok::Ident(s), pos));
            continue;
        }
        if c == '\'' {
            let mut s = String::from('\'');
            bump!();
            loop {
                if i >= chars.len() || chars[i] == '\n' {
                    return Err(syntax_err(pos, "unterminated quoted terminal"));
                }
                let ch = chars[i];
                if ch == '\\' && i + 1 < chars.len() {
                    s.push(ch);
                    bump!();
                    s.push(chars[i]);
                    bump!();
                    continue;
                }
                s.push(ch);
                bump!();
                if ch == '\'' {
                    break;
                }
            }
            if s.len() == 2 {
                return Err(syntax_err(pos, "empty quoted terminal"));
            }
            if s.chars().any(char::is_whitespace) {
                return Err(syntax_err(pos, "whitespace inside a quoted terminal"));
            }
            toks.push((Tok::Quoted(s), pos));
            continue;
        }
        if c == '@' {
            bump!();
            if i >= chars.len() || chars[i] != '{' {
                return Err(syntax_err(pos, "expected `{` after `@`"));
            }
            bump!();
            let mut depth = 1;
            let mut body = String::new();
            loop {
                if i >= chars.len() {
                    return Err(syntax_err(pos, "unterminated action"));
                }
                let ch = chars[i];
                bump!();
                match ch {
                    '{' => depth += 1,
                    '}' => {
                        depth -= 1;
                        if depth == 0 {
                            break;
                        }
                    }
                    _ => {}
                }
                body.push(ch);
            }
            toks.push((Tok::Action(body), pos));
            continue;
        }
        return Err(syntax_err(pos, format!("unexpected character `{c}`")));
    }
    Ok(toks)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Ast {
    Sym { name: String, call: bool, ret: bool, pos: Pos },
    Group { alts: Vec<Vec<Ast>>, op: RegOp },
}

#[derive(Debug)]
struct Alt {
    items: Vec<Ast>,
    action: Option<String>,
    pos: Pos,
}

#[derive(Debug)]
struct Stmt {
    head: String,
    alts: Vec<Alt>,
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    i: usize,
    end: Pos,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.i).map(|t| &t.0)
    }

    fn pos(&self) -> Pos {
        self.toks.get(self.i).map_or(self.end, |t| t.1)
    }

    fn next(&mut self) -> Option<(Tok, Pos)> {
        let t = self.toks.get(self.i).cloned();
        self.i += 1;
        t
    }

    fn stmts(&mut self) -> Result<Vec<Stmt>, GrammarError> {
        let mut out = Vec::new();
        while self.peek().is_some() {
            out.push(self.stmt()?);
        }
        Ok(out)
    }

    fn stmt(&mut self) -> Result<Stmt, GrammarError> {
        let pos = self.pos();
        let head = match self.next() {
            Some((Tok::Ident(n), _)) if is_nonterminal_name(&n) => n,
            _ => return Err(syntax_err(pos, "expected a nonterminal name starting a rule")),
        };
        match self.next() {
            Some((Tok::Define, _)) => {}
            _ => return Err(syntax_err(self.toks.get(self.i - 1).map_or(self.end, |t| t.1), "expected `=` or `:`")),
        }
        let mut alts = vec![self.alt(true)?];
        loop {
            let pos = self.pos();
            match self.next() {
                Some((Tok::Bar, _)) => alts.push(self.alt(true)?),
                Some((Tok::Semi, _)) => break,
                _ => return Err(syntax_err(pos, "expected `|` or `;`")),
            }
        }
        Ok(Stmt { head, alts })
    }

    fn alt(&mut self, allow_action: bool) -> Result<Alt, GrammarError> {
        let pos = self.pos();
        let mut items = Vec::new();
        let mut action = None;
        loop {
            match self.peek() {
                Some(Tok::Ident(_) | Tok::Quoted(_) | Tok::Lt | Tok::LParen) => items.push(self.item()?),
                Some(Tok::Action(_)) if allow_action => {
                    if let Some((Tok::Action(body), _)) = self.next() {
                        action = Some(body);
                    }
                    match self.peek() {
                        Some(Tok::Bar | Tok::Semi) => break,
                        _ => return Err(syntax_err(self.pos(), "action must end its alternative")),
                    }
                }
                _ => break,
            }
        }
        Ok(Alt { items, action, pos })
    }

    fn item(&mut self) -> Result<Ast, GrammarError> {
        let pos = self.pos();
        let call = if self.peek() == Some(&Tok::Lt) {
            self.next();
            true
        } else {
            false
        };
        let atom = match self.next() {
            Some((Tok::Ident(n), p)) => Ast::Sym { name: n, call, ret: false, pos: p },
            Some((Tok::Quoted(n), p)) => Ast::Sym { name: n, call, ret: false, pos: p },
            Some((Tok::LParen, _)) if !call => {
                let mut alts = vec![self.alt(false)?.items];
                loop {
                    let p = self.pos();
                    match self.next() {
                        Some((Tok::Bar, _)) => alts.push(self.alt(false)?.items),
                        Some((Tok::RParen, _)) => break,
                        _ => return Err(syntax_err(p, "expected `|` or `)`")),
                    }
                }
                let op = match self.peek() {
                    Some(Tok::Question) => RegOp::Optional,
                    Some(Tok::Star) => RegOp::Star,
                    Some(Tok::Plus) => RegOp::Plus,
                    _ => RegOp::None,
                };
                if op != RegOp::None {
                    self.next();
                }
                return Ok(Ast::Group { alts, op });
            }
            _ => return Err(syntax_err(pos, "expected a symbol after `<`")),
        };
        let Ast::Sym { name, pos: spos, .. } = atom else { unreachable!() };
        let ret = if self.peek() == Some(&Tok::Gt) {
            self.next();
            true
        } else {
            false
        };
        if (call || ret) && is_nonterminal_name(&name) {
            return Err(syntax_err(spos, format!("nonterminal `{name}` cannot be call/return tagged")));
        }
        if call && ret {
            return Err(syntax_err(spos, format!("terminal `{name}` tagged as both call and return")));
        }
        let sym = Ast::Sym { name, call, ret, pos: spos };
        let op = match self.peek() {
            Some(Tok::Question) => RegOp::Optional,
            Some(Tok::Star) => RegOp::Star,
            Some(Tok::Plus) => RegOp::Plus,
            _ => return Ok(sym),
        };
        self.next();
        Ok(Ast::Group { alts: vec![vec![sym]], op })
    }
}

fn is_nonterminal_name(name: &str) -> bool {
    name.chars().next().is_some_and(|c| c.is_ascii_lowercase() || c == '_')
}

fn parse_stmts(text: &str) -> Result<Vec<Stmt>, GrammarError> {
    let toks = lex(text)?;
    let lines = text.lines().count().max(1);
    let mut p = Parser { toks, i: 0, end: (lines, 1) };
    let stmts = p.stmts()?;
    if stmts.is_empty() {
        return Err(syntax_err((1, 1), "grammar has no rules"));
    }
    Ok(stmts)
}

/// Collects terminal kinds across every occurrence, then interns symbols in
/// order of first appearance.
fn build_symbols(stmts: &[Stmt]) -> Result<Symbols, GrammarError> {
    fn walk(
        items: &[Ast],
        kinds: &mut BTreeMap<String, TermKind>,
        order: &mut Vec<String>,
    ) -> Result<(), GrammarError> {
        for it in items {
            match it {
                Ast::Sym { name, call, ret, .. } if !is_nonterminal_name(name) => {
                    let kind = if *call {
                        TermKind::Call
                    } else if *ret {
                        TermKind::Return
                    } else {
                        TermKind::Plain
                    };
                    match kinds.get(name) {
                        Some(&k) if k != kind => {
                            return Err(GrammarError::KindConflict { name: name.clone(), first: k, second: kind })
                        }
                        Some(_) => {}
                        None => {
                            kinds.insert(name.clone(), kind);
                            order.push(name.clone());
                        }
                    }
                }
                Ast::Sym { .. } => {}
                Ast::Group { alts, .. } => {
                    for a in alts {
                        walk(a, kinds, order)?;
                    }
                }
            }
        }
        Ok(())
    }
    let mut kinds = BTreeMap::new();
    let mut order = Vec::new();
    for s in stmts {
        for a in &s.alts {
            walk(&a.items, &mut kinds, &mut order)?;
        }
    }
    let mut symbols = Symbols::new();
    for s in stmts {
        symbols.intern_nonterminal(&s.head);
    }
    for name in order {
        symbols.add_terminal(&name, kinds[&name]).expect("kinds checked above");
    }
    Ok(symbols)
}

fn check_declared(items: &[Ast], defined: &HashSet<&str>) -> Result<(), GrammarError> {
    for it in items {
        match it {
            Ast::Sym { name, .. } if is_nonterminal_name(name) && !defined.contains(name.as_str()) => {
                return Err(GrammarError::UndeclaredSymbol(name.clone()))
            }
            Ast::Group { alts, .. } => {
                for a in alts {
                    check_declared(a, defined)?;
                }
            }
            _ => {}
        }
    }
    Ok(())
}

fn check_duplicates(stmts: &[Stmt]) -> Result<(), GrammarError> {
    let mut seen = HashSet::new();
    for s in stmts {
        for a in &s.alts {
            let text = format!("{} = {}", s.head, render_ast(&a.items));
            if !seen.insert(text.clone()) {
                return Err(GrammarError::DuplicateRule(text));
            }
        }
    }
    Ok(())
}

fn render_ast(items: &[Ast]) -> String {
    let parts: Vec<String> = items
        .iter()
        .map(|i| match i {
            Ast::Sym { name, call, ret, .. } => {
                format!("{}{}{}", if *call { "<" } else { "" }, name, if *ret { ">" } else { "" })
            }
            Ast::Group { alts, op } => {
                let inner: Vec<String> = alts.iter().map(|a| render_ast(a)).collect();
                let op = match op {
                    RegOp::None => "",
                    RegOp::Optional => "?",
                    RegOp::Star => "*",
                    RegOp::Plus => "+",
                };
                format!("({}){op}", inner.join(" | "))
            }
        })
        .collect();
    parts.join(" ")
}

fn prepare(text: &str) -> Result<(Vec<Stmt>, Symbols), GrammarError> {
    let stmts = parse_stmts(text)?;
    let symbols = build_symbols(&stmts)?;
    let defined: HashSet<&str> = stmts.iter().map(|s| s.head.as_str()).collect();
    for s in &stmts {
        for a in &s.alts {
            check_declared(&a.items, &defined)?;
        }
    }
    check_duplicates(&stmts)?;
    Ok((stmts, symbols))
}

/// Reads a tagged CFG. Names starting with `_` are reserved for generated
/// nonterminals and rejected here.
pub fn parse_tagged_cfg(text: &str) -> Result<TaggedCfg, GrammarError> {
    let (stmts, symbols) = prepare(text)?;
    fn convert(items: &[Ast], symbols: &Symbols) -> Vec<Item> {
        items
            .iter()
            .map(|i| match i {
                Ast::Sym { name, .. } if is_nonterminal_name(name) => {
                    Item::Nt(symbols.lookup_nonterminal(name).expect("declared"))
                }
                Ast::Sym { name, .. } => Item::Term(symbols.lookup_terminal(name).expect("interned")),
                Ast::Group { alts, op } => {
                    Item::Group { alts: alts.iter().map(|a| convert(a, symbols)).collect(), op: *op }
                }
            })
            .collect()
    }
    let mut rules = Vec::new();
    for s in &stmts {
        if s.head.starts_with('_') {
            let pos = s.alts[0].pos;
            return Err(syntax_err(pos, format!("`{}`: names starting with `_` are reserved", s.head)));
        }
        let head = symbols.lookup_nonterminal(&s.head).expect("interned");
        for a in &s.alts {
            let rhs = convert(&a.items, &symbols);
            let arity = rhs.len();
            let action = match &a.action {
                Some(text) => ActionExpr::UserCode { text: text.clone(), arity },
                None => ActionExpr::default_for(&s.head, arity),
            };
            rules.push(CfgRule { head, rhs, action, pos: a.pos });
        }
    }
    let start = symbols.lookup_nonterminal(&stmts[0].head).expect("interned");
    let g = TaggedCfg { symbols, rules, start };
    g.check_balanced()?;
    Ok(g)
}

/// Reads a VPG and checks it is well-formed under the inferred mode
/// (general iff some rule is pending).
pub fn parse_vpg(text: &str) -> Result<Vpg, GrammarError> {
    parse_vpg_annotated(text).map(|(g, _)| g)
}

/// Like [`parse_vpg`], also returning each rule's `@{...}` body.
pub fn parse_vpg_annotated(text: &str) -> Result<(Vpg, Vec<Option<String>>), GrammarError> {
    let (stmts, symbols) = prepare(text)?;
    let mut rules = Vec::new();
    let mut user = Vec::new();
    let nt = |n: &str| symbols.lookup_nonterminal(n).expect("declared");
    let term = |n: &str| symbols.lookup_terminal(n).expect("interned");
    for s in &stmts {
        let head = nt(&s.head);
        for a in &s.alts {
            let shape_err = || syntax_err(a.pos, format!("`{} = {}` is not a VPG rule", s.head, render_ast(&a.items)));
            let syms: Option<Vec<(&str, bool)>> = a
                .items
                .iter()
                .map(|i| match i {
                    Ast::Sym { name, .. } => Some((name.as_str(), is_nonterminal_name(name))),
                    Ast::Group { .. } => None,
                })
                .collect();
            let syms = syms.ok_or_else(shape_err)?;
            let rule = match syms.as_slice() {
                [] => VpgRule::Empty { head },
                [(t, false), (n, true)] => VpgRule::Linear { head, term: term(t), next: nt(n) },
                [(c, false), (inner, true), (r, false), (next, true)]
                    if symbols.kind(term(c)) == TermKind::Call && symbols.kind(term(r)) == TermKind::Return =>
                {
                    VpgRule::Matching { head, call: term(c), inner: nt(inner), ret: term(r), next: nt(next) }
                }
                _ => return Err(shape_err()),
            };
            rules.push(rule);
            user.push(a.action.clone());
        }
    }
    let start = nt(&stmts[0].head);
    let pending =
        rules.iter().any(|r| matches!(*r, VpgRule::Linear { term, .. } if symbols.kind(term) != TermKind::Plain));
    let mode = if pending { Mode::General } else { Mode::WellMatched };
    let g = Vpg::new(symbols, rules, start, mode)?;
    g.check_wellformed()?;
    Ok((g, user))
}

/// Convenience for building ids from names in tests and examples.
pub fn nt_id(g: &Vpg, name: &str) -> NtId {
    g.nt(name).unwrap_or_else(|| panic!("unknown nonterminal {name}"))
}

pub fn term_id(g: &Vpg, name: &str) -> TermId {
    g.term(name).unwrap_or_else(|| panic!("unknown terminal {name}"))
}
