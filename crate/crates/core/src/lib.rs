//! Parser generator for visibly pushdown grammars (VPGs).
//!
//! A VPG splits terminals into plain, call and return symbols, so the stack
//! action for every token is fixed by the token itself. This crate compiles a
//! VPG into three deterministic pushdown automata built from derivatives:
//!
//! * a recognizer ([`recognizer`]),
//! * a parser that records a linear-size parse forest ([`parser`]),
//! * a backward pruner that removes dead edges from the forest ([`pruner`]),
//!
//! then extracts, counts or enumerates parse trees ([`extract`]). Tagged CFGs
//! with regular operators are translated to VPGs by [`translate`], and
//! [`runtime`] maps VPG trees back to trees of the source grammar.

pub mod actions;
pub mod bench;
pub mod corpus;
pub mod dump;
pub mod extract;
pub mod grammar;
pub mod oracle;
pub mod parser;
pub mod pipeline;
pub mod pruner;
pub mod recognizer;
pub mod runtime;
pub mod tokens;
pub mod translate;

pub use actions::{ActionExpr, ActionTable};
pub use grammar::{GrammarError, Mode, NtId, TaggedCfg, TermId, TermKind, Vpg, VpgRule};
pub use parser::{ParseEdge, ParseForest, ParserPda, ParserState, TNt};
pub use pipeline::Compiled;
pub use recognizer::RecognizerPda;
