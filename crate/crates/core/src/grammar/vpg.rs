use std::collections::{BTreeSet, HashMap};
use std::fmt;

use super::symbols::{NtId, Symbols, TermId, TermKind};
use super::GrammarError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    WellMatched,
    General,
}

/// V0 (only well-matched strings) or V1 (may produce pending calls/returns).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MatchClass {
    V0,
    V1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VpgRule {
    Empty {
        head: NtId,
    },
    /// `head → term next`; a call or return `term` makes this a pending rule.
    Linear {
        head: NtId,
        term: TermId,
        next: NtId,
    },
    Matching {
        head: NtId,
        call: TermId,
        inner: NtId,
        ret: TermId,
        next: NtId,
    },
}

impl VpgRule {
    pub fn head(&self) -> NtId {
        match *self {
            VpgRule::Empty { head } | VpgRule::Linear { head, .. } | VpgRule::Matching { head, .. } => head,
        }
    }

    /// Number of right-hand-side symbols.
    pub fn rhs_len(&self) -> usize {
        match self {
            VpgRule::Empty { .. } => 0,
            VpgRule::Linear { .. } => 2,
            VpgRule::Matching { .. } => 4,
        }
    }
}

/// Which clause of the well-formedness definition a rule breaks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WellFormedClause {
    PendingRuleInWellMatchedMode,
    V0LinearNonPlain,
    V0LinearTargetNotV0,
    MatchingInnerNotV0,
    V0MatchingNextNotV0,
}

impl fmt::Display for WellFormedClause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WellFormedClause::PendingRuleInWellMatchedMode => "pending rule in a well-matched grammar",
            WellFormedClause::V0LinearNonPlain => "V0 nonterminal with a call/return linear rule",
            WellFormedClause::V0LinearTargetNotV0 => "V0 linear rule targets a V1 nonterminal",
            WellFormedClause::MatchingInnerNotV0 => "matching rule with a V1 inner nonterminal",
            WellFormedClause::V0MatchingNextNotV0 => "V0 matching rule continues with a V1 nonterminal",
        })
    }
}

/// `(L, <a)` to every `(inner, b>, next)` of a matched rule `L -> <a inner b> next`.
type MatchTargets = HashMap<(NtId, TermId), Vec<(NtId, TermId, NtId)>>;

/// A visibly pushdown grammar with lookup indexes for derivative computation.
#[derive(Debug, Clone)]
pub struct Vpg {
    symbols: Symbols,
    rules: Vec<VpgRule>,
    start: NtId,
    mode: Mode,
    classes: Vec<MatchClass>,
    eps: Vec<bool>,
    linear: HashMap<(NtId, TermId), Vec<NtId>>,
    matching: MatchTargets,
    rule_ids: HashMap<VpgRule, usize>,
}

impl PartialEq for Vpg {
    fn eq(&self, other: &Self) -> bool {
        self.symbols == other.symbols
            && self.rules == other.rules
            && self.start == other.start
            && self.mode == other.mode
            && self.classes == other.classes
    }
}

impl Eq for Vpg {}

impl Vpg {
    /// Builds a grammar with inferred V0/V1 classes. Does not check
    /// well-formedness; see [`Vpg::check_wellformed`].
    pub fn new(symbols: Symbols, rules: Vec<VpgRule>, start: NtId, mode: Mode) -> Result<Vpg, GrammarError> {
        let classes = infer_classes(&symbols, &rules);
        Vpg::with_classes(symbols, rules, start, mode, classes)
    }

    pub fn with_classes(
        symbols: Symbols,
        rules: Vec<VpgRule>,
        start: NtId,
        mode: Mode,
        classes: Vec<MatchClass>,
    ) -> Result<Vpg, GrammarError> {
        let n_nt = symbols.num_nonterminals();
        let n_t = symbols.num_terminals();
        let nt_ok = |n: NtId| n.index() < n_nt;
        let t_ok = |t: TermId| t.index() < n_t;
        if !nt_ok(start) {
            return Err(GrammarError::UndeclaredSymbol(format!("#{}", start.0)));
        }
        if classes.len() != n_nt {
            return Err(GrammarError::UndeclaredSymbol("class table size".into()));
        }
        let mut rule_ids = HashMap::new();
        let mut eps = vec![false; n_nt];
        let mut linear: HashMap<(NtId, TermId), Vec<NtId>> = HashMap::new();
        let mut matching: MatchTargets = HashMap::new();
        for (id, rule) in rules.iter().enumerate() {
            let ok = match *rule {
                VpgRule::Empty { head } => nt_ok(head),
                VpgRule::Linear { head, term, next } => nt_ok(head) && t_ok(term) && nt_ok(next),
                VpgRule::Matching { head, call, inner, ret, next } => {
                    nt_ok(head) && nt_ok(inner) && nt_ok(next) && t_ok(call) && t_ok(ret)
                }
            };
            if !ok {
                return Err(GrammarError::UndeclaredSymbol(format!("in rule #{id}")));
            }
            if let VpgRule::Matching { call, ret, .. } = *rule {
                if symbols.kind(call) != TermKind::Call || symbols.kind(ret) != TermKind::Return {
                    return Err(GrammarError::KindConflict {
                        name: symbols.term_name(call).to_string(),
                        first: symbols.kind(call),
                        second: TermKind::Call,
                    });
                }
            }
            if rule_ids.insert(*rule, id).is_some() {
                return Err(GrammarError::DuplicateRule(display_rule(&symbols, rule)));
            }
            match *rule {
                VpgRule::Empty { head } => eps[head.index()] = true,
                VpgRule::Linear { head, term, next } => linear.entry((head, term)).or_default().push(next),
                VpgRule::Matching { head, call, inner, ret, next } => {
                    matching.entry((head, call)).or_default().push((inner, ret, next))
                }
            }
        }
        for v in linear.values_mut() {
            v.sort();
        }
        for v in matching.values_mut() {
            v.sort();
        }
        Ok(Vpg { symbols, rules, start, mode, classes, eps, linear, matching, rule_ids })
    }

    /// Checks every rule against the V0/V1 clauses and the declared mode.
    pub fn check_wellformed(&self) -> Result<(), GrammarError> {
        let class = |n: NtId| self.classes[n.index()];
        for rule in &self.rules {
            let violated = match *rule {
                VpgRule::Empty { .. } => None,
                VpgRule::Linear { head, term, next } => {
                    let plain = self.symbols.kind(term) == TermKind::Plain;
                    if !plain && self.mode == Mode::WellMatched {
                        Some(WellFormedClause::PendingRuleInWellMatchedMode)
                    } else if class(head) == MatchClass::V0 && !plain {
                        Some(WellFormedClause::V0LinearNonPlain)
                    } else if class(head) == MatchClass::V0 && class(next) != MatchClass::V0 {
                        Some(WellFormedClause::V0LinearTargetNotV0)
                    } else {
                        None
                    }
                }
                VpgRule::Matching { head, inner, next, .. } => {
                    if class(inner) != MatchClass::V0 {
                        Some(WellFormedClause::MatchingInnerNotV0)
                    } else if class(head) == MatchClass::V0 && class(next) != MatchClass::V0 {
                        Some(WellFormedClause::V0MatchingNextNotV0)
                    } else {
                        None
                    }
                }
            };
            if let Some(clause) = violated {
                return Err(GrammarError::IllFormedRule { rule: self.display_rule(rule), clause });
            }
        }
        Ok(())
    }

    /// Same grammar under another mode. Does not re-check well-formedness.
    pub fn with_mode(&self, mode: Mode) -> Vpg {
        let mut g = self.clone();
        g.mode = mode;
        g
    }

    pub fn symbols(&self) -> &Symbols {
        &self.symbols
    }

    pub fn rules(&self) -> &[VpgRule] {
        &self.rules
    }

    pub fn start(&self) -> NtId {
        self.start
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn class(&self, n: NtId) -> MatchClass {
        self.classes[n.index()]
    }

    pub fn classes(&self) -> &[MatchClass] {
        &self.classes
    }

    pub fn has_pending_rules(&self) -> bool {
        self.rules.iter().any(|r| self.is_pending(r))
    }

    pub fn is_pending(&self, rule: &VpgRule) -> bool {
        matches!(*rule, VpgRule::Linear { term, .. } if self.symbols.kind(term) != TermKind::Plain)
    }

    /// `L → ε ∈ P`.
    pub fn is_nullable(&self, n: NtId) -> bool {
        self.eps[n.index()]
    }

    pub fn nullable(&self) -> BTreeSet<NtId> {
        self.symbols.nonterminal_ids().filter(|&n| self.is_nullable(n)).collect()
    }

    /// Targets `L1` of rules `L → t L1`, sorted.
    pub fn linear_targets(&self, head: NtId, term: TermId) -> &[NtId] {
        self.linear.get(&(head, term)).map_or(&[], Vec::as_slice)
    }

    /// `(inner, ret, next)` of rules `L → ⟨a inner ret⟩ next`, sorted.
    pub fn matching_rules(&self, head: NtId, call: TermId) -> &[(NtId, TermId, NtId)] {
        self.matching.get(&(head, call)).map_or(&[], Vec::as_slice)
    }

    pub fn rule_id(&self, rule: &VpgRule) -> Option<usize> {
        self.rule_ids.get(rule).copied()
    }

    pub fn nt(&self, name: &str) -> Option<NtId> {
        self.symbols.lookup_nonterminal(name)
    }

    pub fn term(&self, name: &str) -> Option<TermId> {
        self.symbols.lookup_terminal(name)
    }

    pub fn display_rule(&self, rule: &VpgRule) -> String {
        display_rule(&self.symbols, rule)
    }

    /// Grammar file text, one alternative per line so that rule ids
    /// survive a reparse.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for rule in &self.rules {
            out.push_str(&self.display_rule(rule));
            out.push_str(" ;\n");
        }
        out
    }
}

fn display_rule(symbols: &Symbols, rule: &VpgRule) -> String {
    let nt = |n: NtId| symbols.nt_name(n);
    match *rule {
        VpgRule::Empty { head } => format!("{} =", nt(head)),
        VpgRule::Linear { head, term, next } => {
            format!("{} = {} {}", nt(head), symbols.display_term(term), nt(next))
        }
        VpgRule::Matching { head, call, inner, ret, next } => format!(
            "{} = {} {} {} {}",
            nt(head),
            symbols.display_term(call),
            nt(inner),
            symbols.display_term(ret),
            nt(next)
        ),
    }
}

/// V1 = nonterminals from which some pending rule is reachable; V0 = the rest.
fn infer_classes(symbols: &Symbols, rules: &[VpgRule]) -> Vec<MatchClass> {
    let n = symbols.num_nonterminals();
    let mut v1 = vec![false; n];
    for r in rules {
        if let VpgRule::Linear { head, term, .. } = *r {
            if symbols.kind(term) != TermKind::Plain {
                v1[head.index()] = true;
            }
        }
    }
    loop {
        let mut changed = false;
        for r in rules {
            let head = r.head().index();
            if v1[head] {
                continue;
            }
            let reaches = match *r {
                VpgRule::Empty { .. } => false,
                VpgRule::Linear { next, .. } => v1[next.index()],
                VpgRule::Matching { inner, next, .. } => v1[inner.index()] || v1[next.index()],
            };
            if reaches {
                v1[head] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    v1.into_iter().map(|b| if b { MatchClass::V1 } else { MatchClass::V0 }).collect()
}
