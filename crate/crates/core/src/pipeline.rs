//! A grammar compiled into its three automata, plus the run that turns a
//! token stream into a pruned forest.

use crate::actions::ActionTable;
use crate::extract::{ForestIndex, ParseTree};
use crate::grammar::{Mode, TermId, Vpg};
use crate::parser::{ParseError, ParseForest, ParserPda};
use crate::pruner::PrunerPda;
use crate::recognizer::{RecognizerConfig, RecognizerPda, Reject};
use crate::runtime::{default_actions, vpg_tree_to_cfg_tree, CfgTree, RuntimeError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Compiled {
    pub vpg: Vpg,
    pub actions: ActionTable,
    pub recognizer: RecognizerPda,
    pub parser: ParserPda,
    pub pruner: PrunerPda,
}

/// Output of [`Compiled::parse`].
#[derive(Debug, Clone)]
pub struct Parsed {
    /// Parser state ids, one per token.
    pub raw: Vec<u32>,
    /// Pruner state ids, one per token.
    pub pruned: Vec<u32>,
    /// Pruned forest restricted to edges of complete trees.
    pub forest: ParseForest,
    pub max_depth: usize,
}

impl Compiled {
    pub fn new(vpg: Vpg, actions: ActionTable) -> Self {
        let recognizer = RecognizerPda::build(&vpg);
        let parser = ParserPda::build(&vpg);
        let pruner = PrunerPda::build(&vpg, &parser);
        Compiled { vpg, actions, recognizer, parser, pruner }
    }

    /// Compiles with `head^|rhs|` actions on every rule.
    pub fn from_vpg(vpg: Vpg) -> Self {
        let actions = default_actions(&vpg);
        Compiled::new(vpg, actions)
    }

    /// Recompiles under another acceptance mode.
    pub fn with_mode(&self, mode: Mode) -> Self {
        if mode == self.vpg.mode() {
            return self.clone();
        }
        Compiled::new(self.vpg.with_mode(mode), self.actions.clone())
    }

    pub fn recognize(&self, tokens: &[TermId]) -> Result<RecognizerConfig, Reject> {
        self.recognizer.recognize(&self.vpg, tokens)
    }

    /// Parser, pruner PDA, then tightening to complete-tree edges. The
    /// pruner PDA alone can keep return edges whose call was removed, so
    /// the final step is needed for every kept edge to lie on a tree.
    pub fn parse(&self, tokens: &[TermId]) -> Result<Parsed, ParseError> {
        let g = &self.vpg;
        let run = self.parser.run(g, tokens)?;
        if !self.parser.accepts_at_end(g, &run) {
            return Err(if g.mode() == Mode::WellMatched && !run.stack.is_empty() {
                ParseError::UnclosedCall
            } else {
                ParseError::ParseFailure(tokens.len())
            });
        }
        let pruned = self.pruner.run(&run.forest)?;
        let states: Vec<_> = pruned.iter().map(|&i| self.pruner.state(i)).collect();
        let forest = ForestIndex::new(g, states).tightened();
        if let Some(i) = forest.states.iter().position(|m| m.is_empty()) {
            return Err(ParseError::EmptyAfterPrune(i));
        }
        Ok(Parsed { raw: run.forest, pruned, forest, max_depth: run.max_depth })
    }

    pub fn index<'a>(&'a self, forest: &'a ParseForest) -> ForestIndex<'a> {
        ForestIndex::from_forest(&self.vpg, forest)
    }

    pub fn cfg_tree(&self, tree: &ParseTree, lexemes: &[Option<String>]) -> Result<CfgTree, RuntimeError> {
        vpg_tree_to_cfg_tree(&self.vpg, &self.actions, tree, lexemes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::grammar::parse_vpg;
    use crate::grammar::syntax::term_id;

    fn toks(g: &Vpg, names: &[&str]) -> Vec<TermId> {
        names.iter().map(|n| term_id(g, n)).collect()
    }

    #[test]
    fn g2_counts() {
        let c = Compiled::from_vpg(parse_vpg(corpus::G2_VPG).unwrap());
        for n in 1..=4 {
            let w: Vec<&str> = (0..n).flat_map(|_| ["'c'", "'d'"]).collect();
            let p = c.parse(&toks(&c.vpg, &w)).unwrap();
            assert_eq!(c.index(&p.forest).count(), 1 << n);
        }
    }

    #[test]
    fn rejection_positions() {
        let c = Compiled::from_vpg(parse_vpg(corpus::FIG2_VPG).unwrap());
        let g = &c.vpg;
        assert_eq!(c.parse(&toks(g, &["'c'"])).unwrap_err(), ParseError::ParseFailure(0));
        // The parser does not look inside `<'a' a 'b'>`; the pruner finds `a` empty.
        assert_eq!(c.parse(&toks(g, &["'a'", "'b'"])).unwrap_err(), ParseError::EmptyAfterPrune(0));
        assert_eq!(c.parse(&toks(g, &["'a'", "'c'"])).unwrap_err(), ParseError::UnclosedCall);
        assert!(c.parse(&[]).unwrap().forest.is_empty());
    }

    #[test]
    fn orphan_edges_are_removed() {
        let c = Compiled::from_vpg(parse_vpg(corpus::TWO_CALLS_VPG).unwrap());
        let w = toks(&c.vpg, &["'a'", "'e'", "'b'"]);
        let p = c.parse(&w).unwrap();
        let literal = c.pruner.materialize(&p.pruned);
        let total = |f: &ParseForest| f.states.iter().map(|m| m.len()).sum::<usize>();
        assert!(total(&p.forest) < total(&literal));
        let idx = c.index(&p.forest);
        let used: usize = idx.useful_edges().iter().flatten().filter(|&&b| b).count();
        assert_eq!(used, total(&p.forest));
    }
}
