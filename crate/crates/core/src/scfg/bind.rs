use std::collections::{BTreeMap, BTreeSet};

use rand::seq::index;

use super::derive::DerivedPair;
use super::grammar::{LexEntry, ScfgGrammar};
use super::GrammarError;
use crate::lf::{LfNode, LogicalForm};
use crate::rng::seeded;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BindMode {
    /// Every combination of lexicon entries.
    All,
    /// Up to `k` distinct combinations drawn uniformly without replacement.
    Sample { k: usize, seed: u64 },
    /// No lexical substitution; only checks that every variable is known.
    AbstractOnly,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundPair {
    pub utterance: Vec<String>,
    pub lf: LogicalForm,
    /// Lexicon entry chosen for each domain-specific variable.
    pub bindings: BTreeMap<String, LexEntry>,
}

fn is_variable(token: &str) -> bool {
    let mut chars = token.chars();
    chars.next() == Some('$')
        && chars.next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Replaces domain-specific variables by lexicon entries on both sides of
/// a pair at once. A variable occurring several times receives the same
/// entry everywhere. Abstract variables are kept as they are.
pub fn bind_variables(
    pair: &DerivedPair,
    grammar: &ScfgGrammar,
    mode: BindMode,
) -> Result<Vec<BoundPair>, GrammarError> {
    let mut vars: BTreeSet<&str> = pair.utterance.iter().map(String::as_str).filter(|t| is_variable(t)).collect();
    vars.extend(pair.lf.nodes().filter(|n| n.is_leaf()).map(|n| n.label()).filter(|t| is_variable(t)));
    let mut lexical: Vec<(&str, &[LexEntry])> = Vec::new();
    for v in vars {
        if grammar.abstract_vars.contains(v) {
            continue;
        }
        match grammar.lexicon.get(v) {
            Some(entries) if !entries.is_empty() => lexical.push((v, entries)),
            _ => return Err(GrammarError::UnknownVariable(v.to_string())),
        }
    }

    let total: usize = lexical.iter().map(|(_, e)| e.len()).product();
    let picks: Vec<usize> = match mode {
        BindMode::AbstractOnly => {
            return Ok(vec![BoundPair {
                utterance: pair.utterance.clone(),
                lf: pair.lf.clone(),
                bindings: BTreeMap::new(),
            }])
        }
        BindMode::All => (0..total).collect(),
        BindMode::Sample { k, seed } => {
            let mut rng = seeded(seed);
            let mut chosen = index::sample(&mut rng, total, k.min(total)).into_vec();
            chosen.sort_unstable();
            chosen
        }
    };

    Ok(picks
        .into_iter()
        .map(|mut combo| {
            // mixed-radix decoding, last variable least significant
            let mut bindings = BTreeMap::new();
            for (v, entries) in lexical.iter().rev() {
                bindings.insert(v.to_string(), entries[combo % entries.len()].clone());
                combo /= entries.len();
            }
            apply(pair, bindings)
        })
        .collect())
}

fn apply(pair: &DerivedPair, bindings: BTreeMap<String, LexEntry>) -> BoundPair {
    let utterance = pair
        .utterance
        .iter()
        .flat_map(|t| match bindings.get(t) {
            Some(e) => e.surface.clone(),
            None => vec![t.clone()],
        })
        .collect();
    fn go(node: &LfNode, b: &BTreeMap<String, LexEntry>) -> LfNode {
        if node.is_leaf() {
            return match b.get(node.label()) {
                Some(e) => LfNode::leaf(&e.value),
                None => node.clone(),
            };
        }
        LfNode::new(node.label(), node.children().iter().map(|c| go(c, b)).collect())
    }
    let lf = LogicalForm::new(go(pair.lf.root(), &bindings));
    BoundPair { utterance, lf, bindings }
}
