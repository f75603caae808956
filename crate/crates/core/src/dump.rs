//! Line-oriented text bundle of a [`Compiled`] grammar.
//!
//! ```text
//! # vpg-pda 1
//! mode general
//! terminal 0 call 'a'
//! nonterminal 0 V1 l
//! rule 0 M 0 0 1 1 2          # E h | L h t n | M h a i b n
//! action 0 l⁴
//! [recognizer]
//! state 0 0:0
//! 0 'a' -> 1 push
//! 1 'b' 0,'a' -> 2 pop        # return: top is state,call or None
//! [parser]
//! state 1 call C:0f:0:1t
//! [pruner]
//! last 0 3 4
//! 4 2 -> 5 push               # (pruned state, parser state)
//! 5 1 None -> 6 pop
//! ```
//!
//! Symbols are written with `\s`, `\t`, `\n` and `\\` escapes. Ids are the
//! in-memory ids, so loading rebuilds identical tables.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::actions::{ActionExpr, ActionTable};
use crate::grammar::{MatchClass, Mode, NtId, Symbols, TermId, TermKind, Vpg, VpgRule};
use crate::parser::{Family, ParseEdge, ParserPda, ParserState, TNt};
use crate::pipeline::Compiled;
use crate::pruner::PrunerPda;
use crate::recognizer::{RecState, RecognizerPda, StackAction};

pub const MAGIC: &str = "# vpg-pda 1";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DumpError {
    #[error("not a vpg-pda bundle")]
    BadHeader,
    #[error("line {0}: {1}")]
    Malformed(usize, String),
    #[error("grammar in bundle is invalid: {0}")]
    Grammar(String),
}

fn esc(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            ' ' => out.push_str("\\s"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\\' => out.push_str("\\\\"),
            c => out.push(c),
        }
    }
    out
}

fn unesc(s: &str) -> Option<String> {
    let mut out = String::with_capacity(s.len());
    let mut it = s.chars();
    while let Some(c) = it.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        out.push(match it.next()? {
            's' => ' ',
            't' => '\t',
            'n' => '\n',
            '\\' => '\\',
            _ => return None,
        });
    }
    Some(out)
}

fn act(a: StackAction) -> &'static str {
    match a {
        StackAction::NoOp => "noop",
        StackAction::Push => "push",
        StackAction::Pop => "pop",
    }
}

fn tnt(t: TNt) -> String {
    format!("{}{}", t.nt.0, if t.tag { 't' } else { 'f' })
}

fn edge(e: &ParseEdge) -> String {
    match *e {
        ParseEdge::Start(t) => format!("S:{}", tnt(t)),
        ParseEdge::Plain { from, term, to } => format!("P:{}:{}:{}", tnt(from), term.0, tnt(to)),
        ParseEdge::Call { from, term, to } => format!("C:{}:{}:{}", tnt(from), term.0, tnt(to)),
        ParseEdge::Ret { from, term, to } => format!("R:{}:{}:{}", tnt(from), term.0, tnt(to)),
        ParseEdge::RetMatched { outer, inner, term, to } => {
            format!("M:{}:{}:{}:{}", tnt(outer), tnt(inner), term.0, tnt(to))
        }
    }
}

fn write_states<'a>(out: &mut String, states: impl Iterator<Item = &'a ParserState>) {
    for (id, m) in states.enumerate() {
        let _ = write!(out, "state {id} {}", m.family());
        for e in m.edges() {
            out.push(' ');
            out.push_str(&edge(e));
        }
        out.push('\n');
    }
}

fn sorted<K: Ord + Clone, V>(m: &HashMap<K, V>) -> Vec<(&K, &V)> {
    let mut v: Vec<_> = m.iter().collect();
    v.sort_by(|a, b| a.0.cmp(b.0));
    v
}

pub fn write_bundle(c: &Compiled) -> String {
    let g = &c.vpg;
    let s = g.symbols();
    let sym = |t: TermId| esc(s.term_name(t));
    let mut out = String::new();
    out.push_str(MAGIC);
    out.push('\n');
    let _ = writeln!(out, "mode {}", if g.mode() == Mode::General { "general" } else { "wm" });
    let _ = writeln!(out, "start {}", g.start().0);
    let _ = writeln!(out, "fresh {}", s.fresh_counter());
    for t in s.terminal_ids() {
        let _ = writeln!(out, "terminal {} {} {}", t.0, s.kind(t), sym(t));
    }
    for n in s.nonterminal_ids() {
        let class = if g.class(n) == MatchClass::V0 { "V0" } else { "V1" };
        let _ = writeln!(out, "nonterminal {} {class} {}", n.0, esc(s.nt_name(n)));
    }
    for (id, r) in g.rules().iter().enumerate() {
        let body = match *r {
            VpgRule::Empty { head } => format!("E {}", head.0),
            VpgRule::Linear { head, term, next } => format!("L {} {} {}", head.0, term.0, next.0),
            VpgRule::Matching { head, call, inner, ret, next } => {
                format!("M {} {} {} {} {}", head.0, call.0, inner.0, ret.0, next.0)
            }
        };
        let _ = writeln!(out, "rule {id} {body}");
    }
    for (id, a) in c.actions.actions.iter().enumerate() {
        let text = a.as_ref().map_or("-".to_string(), |a| esc(&a.to_string()));
        let _ = writeln!(out, "action {id} {text}");
    }

    out.push_str("[recognizer]\n");
    let r = &c.recognizer;
    for (id, st) in r.states.iter().enumerate() {
        let _ = write!(out, "state {id}");
        for &(a, b) in st.pairs() {
            let _ = write!(out, " {}:{}", a.0, b.0);
        }
        out.push('\n');
    }
    for (&(from, t), &to) in sorted(&r.step) {
        let a = if s.kind(t) == TermKind::Call { StackAction::Push } else { StackAction::NoOp };
        let _ = writeln!(out, "{from} {} -> {to} {}", sym(t), act(a));
    }
    for (&(from, t, top), &(to, a)) in sorted(&r.ret) {
        let top = top.map_or("None".to_string(), |(st, call)| format!("{st},{}", sym(call)));
        let _ = writeln!(out, "{from} {} {top} -> {to} {}", sym(t), act(a));
    }

    out.push_str("[parser]\n");
    write_states(&mut out, c.parser.states.iter());
    for (&(from, t), &to) in sorted(&c.parser.step) {
        let a = if s.kind(t) == TermKind::Call { StackAction::Push } else { StackAction::NoOp };
        let _ = writeln!(out, "{from} {} -> {to} {}", sym(t), act(a));
    }
    for (&(from, t, top), &to) in sorted(&c.parser.ret) {
        let (top, a) = top.map_or(("None".to_string(), StackAction::NoOp), |x| (x.to_string(), StackAction::Pop));
        let _ = writeln!(out, "{from} {} {top} -> {to} {}", sym(t), act(a));
    }

    out.push_str("[pruner]\n");
    let p = &c.pruner;
    write_states(&mut out, p.states.iter());
    let last: Vec<String> = p.last.iter().map(u32::to_string).collect();
    let _ = writeln!(out, "last {}", last.join(" "));
    for (&(m2, m1), &(to, a)) in sorted(&p.step) {
        let _ = writeln!(out, "{m2} {m1} -> {to} {}", act(a));
    }
    for (&(m2, m1, top), &to) in sorted(&p.pop) {
        let top = top.map_or("None".to_string(), |x| x.to_string());
        let _ = writeln!(out, "{m2} {m1} {top} -> {to} pop");
    }
    out
}

struct Reader<'a> {
    lines: std::iter::Peekable<std::iter::Enumerate<std::str::Lines<'a>>>,
}

impl<'a> Reader<'a> {
    /// Next non-empty line and its 1-based number.
    fn next(&mut self) -> Option<(usize, &'a str)> {
        for (k, l) in self.lines.by_ref() {
            if !l.trim().is_empty() {
                return Some((k + 1, l));
            }
        }
        None
    }

    fn peek_starts(&mut self, prefix: &str) -> bool {
        while let Some((_, l)) = self.lines.peek() {
            if l.trim().is_empty() {
                self.lines.next();
            } else {
                return l.starts_with(prefix);
            }
        }
        false
    }
}

fn bad(line: usize, msg: impl Into<String>) -> DumpError {
    DumpError::Malformed(line, msg.into())
}

fn num<T: std::str::FromStr>(line: usize, s: &str) -> Result<T, DumpError> {
    s.parse().map_err(|_| bad(line, format!("expected a number, found `{s}`")))
}

fn parse_action(line: usize, s: &str) -> Result<StackAction, DumpError> {
    match s {
        "noop" => Ok(StackAction::NoOp),
        "push" => Ok(StackAction::Push),
        "pop" => Ok(StackAction::Pop),
        _ => Err(bad(line, format!("unknown stack action `{s}`"))),
    }
}

fn parse_tnt(line: usize, s: &str) -> Result<TNt, DumpError> {
    let (n, tag) = s.split_at(s.len().saturating_sub(1));
    let tag = match tag {
        "t" => true,
        "f" => false,
        _ => return Err(bad(line, format!("bad tagged nonterminal `{s}`"))),
    };
    Ok(TNt::new(NtId(num(line, n)?), tag))
}

fn parse_edge(line: usize, s: &str) -> Result<ParseEdge, DumpError> {
    let parts: Vec<&str> = s.split(':').collect();
    let t = |k: usize| -> Result<TNt, DumpError> { parse_tnt(line, parts[k]) };
    let term = |k: usize| -> Result<TermId, DumpError> { Ok(TermId(num(line, parts[k])?)) };
    Ok(match (parts[0], parts.len()) {
        ("S", 2) => ParseEdge::Start(t(1)?),
        ("P", 4) => ParseEdge::Plain { from: t(1)?, term: term(2)?, to: t(3)? },
        ("C", 4) => ParseEdge::Call { from: t(1)?, term: term(2)?, to: t(3)? },
        ("R", 4) => ParseEdge::Ret { from: t(1)?, term: term(2)?, to: t(3)? },
        ("M", 5) => ParseEdge::RetMatched { outer: t(1)?, inner: t(2)?, term: term(3)?, to: t(4)? },
        _ => return Err(bad(line, format!("bad edge `{s}`"))),
    })
}

fn parse_family(line: usize, s: &str) -> Result<Family, DumpError> {
    match s {
        "start" => Ok(Family::Start),
        "plain" => Ok(Family::Plain),
        "call" => Ok(Family::Call),
        "ret" => Ok(Family::Ret),
        _ => Err(bad(line, format!("unknown family `{s}`"))),
    }
}

fn read_states(r: &mut Reader) -> Result<Vec<ParserState>, DumpError> {
    let mut out = Vec::new();
    while r.peek_starts("state ") {
        let (ln, l) = r.next().unwrap();
        let f: Vec<&str> = l.split_whitespace().collect();
        if f.len() < 3 || num::<usize>(ln, f[1])? != out.len() {
            return Err(bad(ln, "states must be numbered in order"));
        }
        let family = parse_family(ln, f[2])?;
        let edges = f[3..].iter().map(|e| parse_edge(ln, e)).collect::<Result<Vec<_>, _>>()?;
        if edges.iter().any(|e| e.family() != family) {
            return Err(bad(ln, "edge family differs from state family"));
        }
        out.push(ParserState::new(family, edges));
    }
    Ok(out)
}

fn index_of<T: Clone + Eq + std::hash::Hash>(states: &[T]) -> HashMap<T, u32> {
    states.iter().enumerate().map(|(i, s)| (s.clone(), i as u32)).collect()
}

/// Transition lines up to the next section: `(line, fields before ->, to, action)`.
/// Source state, symbol fields, target state and stack action.
type Transition<'a> = (usize, Vec<&'a str>, u32, StackAction);

fn read_transitions<'a>(r: &mut Reader<'a>) -> Result<Vec<Transition<'a>>, DumpError> {
    let mut out = Vec::new();
    while !r.peek_starts("[") && !r.peek_starts("last ") {
        let Some((ln, l)) = r.next() else { break };
        let (lhs, rhs) = l.split_once(" -> ").ok_or_else(|| bad(ln, "expected `->`"))?;
        let rhs: Vec<&str> = rhs.split_whitespace().collect();
        if rhs.len() != 2 {
            return Err(bad(ln, "expected `-> id action`"));
        }
        out.push((ln, lhs.split_whitespace().collect(), num(ln, rhs[0])?, parse_action(ln, rhs[1])?));
    }
    Ok(out)
}

fn expect_line(r: &mut Reader, text: &str) -> Result<(), DumpError> {
    match r.next() {
        Some((_, l)) if l.trim() == text => Ok(()),
        Some((ln, l)) => Err(bad(ln, format!("expected `{text}`, found `{l}`"))),
        None => Err(bad(0, format!("missing `{text}`"))),
    }
}

pub fn read_bundle(text: &str) -> Result<Compiled, DumpError> {
    let mut r = Reader { lines: text.lines().enumerate().peekable() };
    match r.next() {
        Some((_, l)) if l.trim() == MAGIC => {}
        _ => return Err(DumpError::BadHeader),
    }
    let mut mode = Mode::WellMatched;
    let mut start = NtId(0);
    let mut fresh = 0;
    let mut symbols = Symbols::new();
    let mut classes = Vec::new();
    let mut rules = Vec::new();
    let mut actions = Vec::new();
    while !r.peek_starts("[") {
        let Some((ln, l)) = r.next() else { break };
        let f: Vec<&str> = l.split_whitespace().collect();
        let arg = |k: usize| f.get(k).copied().ok_or_else(|| bad(ln, "missing field"));
        match f[0] {
            "mode" => {
                mode = match arg(1)? {
                    "general" => Mode::General,
                    "wm" => Mode::WellMatched,
                    m => return Err(bad(ln, format!("unknown mode `{m}`"))),
                }
            }
            "start" => start = NtId(num(ln, arg(1)?)?),
            "fresh" => fresh = num(ln, arg(1)?)?,
            "terminal" => {
                let kind = match arg(2)? {
                    "plain" => TermKind::Plain,
                    "call" => TermKind::Call,
                    "return" => TermKind::Return,
                    k => return Err(bad(ln, format!("unknown terminal kind `{k}`"))),
                };
                let name = unesc(arg(3)?).ok_or_else(|| bad(ln, "bad escape"))?;
                let id = symbols.add_terminal(&name, kind).map_err(|_| bad(ln, "terminal redeclared"))?;
                if id.0 != num::<u32>(ln, arg(1)?)? {
                    return Err(bad(ln, "terminals must be numbered in order"));
                }
            }
            "nonterminal" => {
                classes.push(match arg(2)? {
                    "V0" => MatchClass::V0,
                    "V1" => MatchClass::V1,
                    c => return Err(bad(ln, format!("unknown class `{c}`"))),
                });
                let name = unesc(arg(3)?).ok_or_else(|| bad(ln, "bad escape"))?;
                let id = symbols.intern_nonterminal(&name);
                if id.0 != num::<u32>(ln, arg(1)?)? {
                    return Err(bad(ln, "nonterminals must be numbered in order"));
                }
            }
            "rule" => {
                let n = |k: usize| -> Result<u32, DumpError> { num(ln, arg(k)?) };
                rules.push(match arg(2)? {
                    "E" => VpgRule::Empty { head: NtId(n(3)?) },
                    "L" => VpgRule::Linear { head: NtId(n(3)?), term: TermId(n(4)?), next: NtId(n(5)?) },
                    "M" => VpgRule::Matching {
                        head: NtId(n(3)?),
                        call: TermId(n(4)?),
                        inner: NtId(n(5)?),
                        ret: TermId(n(6)?),
                        next: NtId(n(7)?),
                    },
                    k => return Err(bad(ln, format!("unknown rule shape `{k}`"))),
                });
            }
            "action" => {
                let body = unesc(arg(2)?).ok_or_else(|| bad(ln, "bad escape"))?;
                actions.push(if body == "-" {
                    None
                } else {
                    Some(body.parse::<ActionExpr>().map_err(|e| bad(ln, e.to_string()))?)
                });
            }
            k => return Err(bad(ln, format!("unknown entry `{k}`"))),
        }
    }
    symbols.set_fresh_counter(fresh);
    let vpg = Vpg::with_classes(symbols, rules, start, mode, classes).map_err(|e| DumpError::Grammar(e.to_string()))?;
    let term = |ln: usize, s: &str| -> Result<TermId, DumpError> {
        let name = unesc(s).ok_or_else(|| bad(ln, "bad escape"))?;
        vpg.term(&name).ok_or_else(|| bad(ln, format!("unknown terminal `{name}`")))
    };

    expect_line(&mut r, "[recognizer]")?;
    let mut rec_states = Vec::new();
    while r.peek_starts("state ") {
        let (ln, l) = r.next().unwrap();
        let f: Vec<&str> = l.split_whitespace().collect();
        if num::<usize>(ln, f[1])? != rec_states.len() {
            return Err(bad(ln, "states must be numbered in order"));
        }
        let mut pairs = Vec::new();
        for p in &f[2..] {
            let (a, b) = p.split_once(':').ok_or_else(|| bad(ln, "bad pair"))?;
            pairs.push((NtId(num(ln, a)?), NtId(num(ln, b)?)));
        }
        rec_states.push(RecState::new(pairs));
    }
    let mut rec = RecognizerPda {
        mode,
        index: index_of(&rec_states),
        states: rec_states,
        step: HashMap::new(),
        ret: HashMap::new(),
    };
    for (ln, lhs, to, a) in read_transitions(&mut r)? {
        let from: u32 = num(ln, lhs[0])?;
        let t = term(ln, lhs.get(1).ok_or_else(|| bad(ln, "missing symbol"))?)?;
        match lhs.get(2) {
            None => {
                rec.step.insert((from, t), to);
            }
            Some(&"None") => {
                rec.ret.insert((from, t, None), (to, a));
            }
            Some(top) => {
                let (st, call) = top.split_once(',').ok_or_else(|| bad(ln, "bad stack symbol"))?;
                rec.ret.insert((from, t, Some((num(ln, st)?, term(ln, call)?))), (to, a));
            }
        }
    }

    expect_line(&mut r, "[parser]")?;
    let states = read_states(&mut r)?;
    let mut parser = ParserPda { index: index_of(&states), states, step: HashMap::new(), ret: HashMap::new(), mode };
    for (ln, lhs, to, _) in read_transitions(&mut r)? {
        let from: u32 = num(ln, lhs[0])?;
        let t = term(ln, lhs.get(1).ok_or_else(|| bad(ln, "missing symbol"))?)?;
        match lhs.get(2) {
            None => {
                parser.step.insert((from, t), to);
            }
            Some(&"None") => {
                parser.ret.insert((from, t, None), to);
            }
            Some(top) => {
                parser.ret.insert((from, t, Some(num(ln, top)?)), to);
            }
        }
    }

    expect_line(&mut r, "[pruner]")?;
    let states = read_states(&mut r)?;
    let (ln, l) = r.next().ok_or_else(|| bad(0, "missing `last`"))?;
    let last = l
        .strip_prefix("last")
        .ok_or_else(|| bad(ln, "expected `last`"))?
        .split_whitespace()
        .map(|x| num(ln, x))
        .collect::<Result<Vec<u32>, _>>()?;
    let mut pruner = PrunerPda {
        index: index_of(&states),
        states,
        parser_family: parser.states.iter().map(ParserState::family).collect(),
        last,
        step: HashMap::new(),
        pop: HashMap::new(),
    };
    for (ln, lhs, to, a) in read_transitions(&mut r)? {
        let m2: u32 = num(ln, lhs[0])?;
        let m1: u32 = num(ln, lhs.get(1).ok_or_else(|| bad(ln, "missing parser state"))?)?;
        match lhs.get(2) {
            None => {
                pruner.step.insert((m2, m1), (to, a));
            }
            Some(&"None") => {
                pruner.pop.insert((m2, m1, None), to);
            }
            Some(top) => {
                pruner.pop.insert((m2, m1, Some(num(ln, top)?)), to);
            }
        }
    }
    if let Some((ln, l)) = r.next() {
        return Err(bad(ln, format!("unexpected `{l}`")));
    }
    Ok(Compiled { vpg, actions: ActionTable::new(actions), recognizer: rec, parser, pruner })
}
