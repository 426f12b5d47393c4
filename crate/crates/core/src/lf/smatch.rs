//! Triple-overlap similarity between logical forms.
//!
//! Every edge of a tree yields a triple `(parent label, argument index,
//! child label)`, and the root yields `(TOP, 0, root label)`. Variable labels
//! (by default tokens starting with `$`) are renamed consistently: an
//! injective alignment from the variables of one LF onto same-typed
//! variables of the other is searched by hill climbing with random restarts,
//! and the score is the fraction of the first LF's triples matched under the
//! best alignment found.

use std::collections::{BTreeMap, HashMap};

use rand::seq::SliceRandom;
use rand::Rng;

use super::{LfNode, LogicalForm};
use crate::rng::seeded;

pub const TOP: &str = "TOP";

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    pub parent: String,
    pub index: usize,
    pub child: String,
}

/// Decides which labels are alignable variables and of which type.
#[derive(Debug, Clone, Default)]
pub struct VariableScheme {
    slots: BTreeMap<String, String>,
}

impl VariableScheme {
    /// Additionally treats the given slot tokens (slot → type) as variables.
    pub fn with_slots(slots: BTreeMap<String, String>) -> Self {
        VariableScheme { slots }
    }

    /// `$`-prefixed tokens are variables typed by their non-numeric stem, so
    /// `$0` and `$1` are alignable while `$0` and `$loc` are not.
    pub fn var_type<'a>(&'a self, label: &'a str) -> Option<&'a str> {
        if let Some(t) = self.slots.get(label) {
            return Some(t);
        }
        if label.len() > 1 && label.starts_with('$') {
            return Some(label.trim_end_matches(|c: char| c.is_ascii_digit()));
        }
        None
    }
}

#[derive(Debug, Clone)]
pub struct SmatchConfig {
    /// Random restarts in addition to the label-identity start.
    pub restarts: usize,
    pub seed: u64,
    pub scheme: VariableScheme,
}

impl Default for SmatchConfig {
    fn default() -> Self {
        SmatchConfig { restarts: 4, seed: 0, scheme: VariableScheme::default() }
    }
}

impl LogicalForm {
    /// Edge triples plus the `TOP` triple, in pre-order.
    pub fn triples(&self) -> Vec<Triple> {
        let mut out = vec![Triple {
            parent: TOP.to_string(),
            index: 0,
            child: self.root().label().to_string(),
        }];
        fn go(node: &LfNode, out: &mut Vec<Triple>) {
            for (i, c) in node.children().iter().enumerate() {
                out.push(Triple {
                    parent: node.label().to_string(),
                    index: i,
                    child: c.label().to_string(),
                });
                go(c, out);
            }
        }
        go(self.root(), &mut out);
        out
    }
}

const UNMATCHED: u32 = u32::MAX;

#[derive(Clone, Copy)]
enum Term {
    Const(u32),
    Var(usize),
}

struct Problem {
    a_triples: Vec<(Term, usize, Term)>,
    b_counts: HashMap<(u32, usize, u32), usize>,
    /// Compatible target label ids for each variable of `a`.
    candidates: Vec<Vec<u32>>,
    /// Label id of each variable of `a`.
    var_labels: Vec<u32>,
}

impl Problem {
    fn new(a: &LogicalForm, b: &LogicalForm, scheme: &VariableScheme) -> Self {
        let mut ids: HashMap<String, u32> = HashMap::new();
        let mut intern = |s: &str| {
            let n = ids.len() as u32;
            *ids.entry(s.to_string()).or_insert(n)
        };

        let mut b_counts = HashMap::new();
        let mut b_vars: Vec<(u32, String)> = Vec::new();
        for t in b.triples() {
            let key = (intern(&t.parent), t.index, intern(&t.child));
            *b_counts.entry(key).or_insert(0) += 1;
            for label in [&t.parent, &t.child] {
                if let Some(ty) = scheme.var_type(label) {
                    let id = intern(label);
                    if !b_vars.iter().any(|(v, _)| *v == id) {
                        b_vars.push((id, ty.to_string()));
                    }
                }
            }
        }

        let mut a_vars: Vec<String> = Vec::new();
        let var_index = |label: &str, a_vars: &mut Vec<String>| -> Option<usize> {
            scheme.var_type(label)?;
            Some(match a_vars.iter().position(|v| v == label) {
                Some(i) => i,
                None => {
                    a_vars.push(label.to_string());
                    a_vars.len() - 1
                }
            })
        };
        let mut a_triples = Vec::new();
        for t in a.triples() {
            let parent = match var_index(&t.parent, &mut a_vars) {
                Some(v) => Term::Var(v),
                None => Term::Const(intern(&t.parent)),
            };
            let child = match var_index(&t.child, &mut a_vars) {
                Some(v) => Term::Var(v),
                None => Term::Const(intern(&t.child)),
            };
            a_triples.push((parent, t.index, child));
        }

        let candidates = a_vars
            .iter()
            .map(|v| {
                let ty = scheme.var_type(v).expect("variable");
                b_vars.iter().filter(|(_, t)| t == ty).map(|(id, _)| *id).collect()
            })
            .collect();
        let var_labels = a_vars.iter().map(|v| intern(v)).collect();
        Problem { a_triples, b_counts, candidates, var_labels }
    }

    fn matched(&self, mapping: &[u32]) -> usize {
        let resolve = |t: Term| match t {
            Term::Const(id) => id,
            Term::Var(v) => mapping[v],
        };
        let mut counts: HashMap<(u32, usize, u32), usize> = HashMap::new();
        for &(p, i, c) in &self.a_triples {
            let (p, c) = (resolve(p), resolve(c));
            if p == UNMATCHED || c == UNMATCHED {
                continue;
            }
            *counts.entry((p, i, c)).or_insert(0) += 1;
        }
        counts
            .iter()
            .map(|(k, n)| (*n).min(self.b_counts.get(k).copied().unwrap_or(0)))
            .sum()
    }

    fn identity_start(&self) -> Vec<u32> {
        let mut used = Vec::new();
        self.var_labels
            .iter()
            .zip(&self.candidates)
            .map(|(label, cands)| {
                if cands.contains(label) && !used.contains(label) {
                    used.push(*label);
                    *label
                } else {
                    UNMATCHED
                }
            })
            .collect()
    }

    fn random_start(&self, rng: &mut impl Rng) -> Vec<u32> {
        let mut mapping = vec![UNMATCHED; self.candidates.len()];
        let mut order: Vec<usize> = (0..mapping.len()).collect();
        order.shuffle(rng);
        let mut used: Vec<u32> = Vec::new();
        for v in order {
            let free: Vec<u32> =
                self.candidates[v].iter().copied().filter(|c| !used.contains(c)).collect();
            // index == free.len() leaves the variable unaligned
            let pick = rng.gen_range(0..=free.len());
            if pick < free.len() {
                mapping[v] = free[pick];
                used.push(free[pick]);
            }
        }
        mapping
    }

    /// Steepest-ascent hill climbing over reassign/swap moves.
    fn climb(&self, mut mapping: Vec<u32>) -> usize {
        let mut score = self.matched(&mapping);
        loop {
            let mut best: Option<(usize, Vec<u32>)> = None;
            for v in 0..mapping.len() {
                let options = self.candidates[v].iter().copied().chain(std::iter::once(UNMATCHED));
                for target in options {
                    if target == mapping[v] {
                        continue;
                    }
                    let mut next = mapping.clone();
                    if target != UNMATCHED {
                        if let Some(other) = mapping.iter().position(|&m| m == target) {
                            next[other] = mapping[v];
                        }
                    }
                    next[v] = target;
                    let s = self.matched(&next);
                    if s > best.as_ref().map_or(score, |(b, _)| *b) {
                        best = Some((s, next));
                    }
                }
            }
            match best {
                Some((s, next)) => {
                    score = s;
                    mapping = next;
                }
                None => return score,
            }
        }
    }
}

/// Fraction of `a`'s triples matched in `b` under the best variable
/// alignment found.
pub fn smatch_directional(a: &LogicalForm, b: &LogicalForm, config: &SmatchConfig) -> f64 {
    let problem = Problem::new(a, b, &config.scheme);
    let total = problem.a_triples.len();
    let mut best = problem.climb(problem.identity_start());
    if !problem.candidates.iter().all(Vec::is_empty) {
        let mut rng = seeded(config.seed);
        for _ in 0..config.restarts {
            if best == total {
                break;
            }
            best = best.max(problem.climb(problem.random_start(&mut rng)));
        }
    }
    best as f64 / total as f64
}

/// Symmetric similarity: the mean of both directional scores.
pub fn smatch_sim(a: &LogicalForm, b: &LogicalForm, config: &SmatchConfig) -> f64 {
    (smatch_directional(a, b, config) + smatch_directional(b, a, config)) / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lf(s: &str) -> LogicalForm {
        LogicalForm::parse(s).unwrap()
    }

    #[test]
    fn self_similarity() {
        let y = lf("( lambda $0 e ( and ( state:t $0 ) ( next_to:t $0 s0 ) ) )");
        let cfg = SmatchConfig::default();
        assert_eq!(smatch_directional(&y, &y, &cfg), 1.0);
        assert_eq!(smatch_sim(&y, &y, &cfg), 1.0);
    }

    #[test]
    fn disjoint_labels() {
        let cfg = SmatchConfig::default();
        assert_eq!(smatch_sim(&lf("( f a b )"), &lf("( g c d )"), &cfg), 0.0);
    }

    #[test]
    fn renamed_variables_align() {
        let a = lf("( lambda $0 e ( state:t $0 ) )");
        let b = lf("( lambda $1 e ( state:t $1 ) )");
        assert_eq!(smatch_sim(&a, &b, &SmatchConfig::default()), 1.0);
    }

    #[test]
    fn variables_of_different_types_do_not_align() {
        let a = lf("( f $0 )");
        let b = lf("( f $loc )");
        // only the TOP triple matches
        assert_eq!(smatch_directional(&a, &b, &SmatchConfig::default()), 0.5);
    }

    #[test]
    fn half_shared_triples() {
        // a: TOP-f, f0-a, f1-b, f2-c  b: TOP-f, f0-a, f1-x, f2-y
        let a = lf("( f a b c )");
        let b = lf("( f a x y )");
        let cfg = SmatchConfig::default();
        assert_eq!(smatch_directional(&a, &b, &cfg), 0.5);
        assert_eq!(smatch_sim(&a, &b, &cfg), 0.5);
        // asymmetric sizes: 2 of a's 4 triples, 2 of b's 3 triples
        let c = lf("( f a z )");
        assert_eq!(smatch_directional(&a, &c, &cfg), 0.5);
        assert!((smatch_directional(&c, &a, &cfg) - 2.0 / 3.0).abs() < 1e-15);
        assert!((smatch_sim(&a, &c, &cfg) - (0.5 + 2.0 / 3.0) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn slot_scheme() {
        let mut slots = BTreeMap::new();
        slots.insert("var".to_string(), "value".to_string());
        let scheme = VariableScheme::with_slots(slots);
        assert_eq!(scheme.var_type("var"), Some("value"));
        assert_eq!(scheme.var_type("$12"), Some("$"));
        assert_eq!(scheme.var_type("$loc"), Some("$loc"));
        assert_eq!(scheme.var_type("$"), None);
        assert_eq!(scheme.var_type("x"), None);
    }
}
