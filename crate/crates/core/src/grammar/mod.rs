//! Grammar representations: symbol tables, VPGs, tagged CFGs and the
//! grammar file syntax shared by both.

mod symbols;
pub mod syntax;
mod tagged;
mod vpg;

use thiserror::Error;

pub use symbols::{NtId, Symbols, TermId, TermKind, Terminal};
pub use syntax::{parse_grammar_file, parse_tagged_cfg, parse_vpg, parse_vpg_annotated, Grammar, Syntax};
pub use tagged::{CfgRule, Item, RegOp, TaggedCfg};
pub use vpg::{MatchClass, Mode, Vpg, VpgRule, WellFormedClause};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GrammarError {
    #[error("{line}:{col}: syntax error: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("duplicate rule `{0}`")]
    DuplicateRule(String),
    #[error("undeclared symbol `{0}`")]
    UndeclaredSymbol(String),
    #[error("terminal `{name}` used as {first} and as {second}")]
    KindConflict { name: String, first: TermKind, second: TermKind },
    #[error("ill-formed rule `{rule}`: {clause}")]
    IllFormedRule { rule: String, clause: WellFormedClause },
    #[error("unbalanced call/return terminals in a rule for `{0}`")]
    UnbalancedBrackets(String),
}
