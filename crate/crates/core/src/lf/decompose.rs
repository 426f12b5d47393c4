use std::fmt;

use serde::{Deserialize, Serialize};

use super::{LfNode, LogicalForm};

/// A node label of a logical form.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Atom(pub String);

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// The depth-1 skeleton of an internal node: its label followed by the root
/// labels of its children.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Compound {
    pub head: String,
    pub child_heads: Vec<String>,
}

impl fmt::Display for Compound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "( {}", self.head)?;
        for c in &self.child_heads {
            write!(f, " {c}")?;
        }
        f.write_str(" )")
    }
}

impl Compound {
    fn of(node: &LfNode) -> Option<Self> {
        if node.is_leaf() {
            return None;
        }
        Some(Compound {
            head: node.label().to_string(),
            child_heads: node.children().iter().map(|c| c.label().to_string()).collect(),
        })
    }
}

impl LogicalForm {
    /// One atom per node, in pre-order.
    pub fn atoms(&self) -> Vec<Atom> {
        self.nodes().map(|n| Atom(n.label().to_string())).collect()
    }

    /// One compound per internal node, in pre-order.
    pub fn compounds(&self) -> Vec<Compound> {
        self.nodes().filter_map(Compound::of).collect()
    }

    /// Parse actions of a top-down transition system: every internal node
    /// emits `REDUCE head:-c1 c2 ...`, every leaf emits `GEN label`.
    pub fn actions(&self) -> Vec<String> {
        self.nodes()
            .map(|n| match Compound::of(n) {
                Some(c) => format!("REDUCE {}:-{}", c.head, c.child_heads.join(" ")),
                None => format!("GEN {}", n.label()),
            })
            .collect()
    }

    /// Atoms and compounds as prefixed feature strings (`A:label`,
    /// `C:( head ... )`), in pre-order with multiplicity.
    pub fn structure_terms(&self) -> Vec<String> {
        let mut terms: Vec<String> = self.atoms().into_iter().map(|a| format!("A:{a}")).collect();
        terms.extend(self.compounds().into_iter().map(|c| format!("C:{c}")));
        terms
    }
}

/// Predicate named by an action string: the head of a `REDUCE` action or the
/// generated token of a `GEN` action. Other strings are returned unchanged.
pub(crate) fn action_predicate(action: &str) -> &str {
    if let Some(rest) = action.strip_prefix("REDUCE ") {
        rest.split(":-").next().unwrap_or(rest)
    } else if let Some(rest) = action.strip_prefix("GEN ") {
        rest
    } else {
        action
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lf::tests::arb_tree;
    use proptest::prelude::*;

    const EXAMPLE: &str = "( lambda $0 e ( and ( state:t $0 ) ( next_to:t $0 s0 ) ) )";

    fn compound(head: &str, children: &[&str]) -> Compound {
        Compound {
            head: head.into(),
            child_heads: children.iter().map(|s| s.to_string()).collect(),
        }
    }

    #[test]
    fn worked_example_atoms_and_compounds() {
        let lf = LogicalForm::parse(EXAMPLE).unwrap();
        let atoms = lf.atoms();
        for a in ["lambda", "$0", "e"] {
            assert!(atoms.contains(&Atom(a.into())), "missing atom {a}");
        }
        let compounds = lf.compounds();
        assert!(compounds.contains(&compound("and", &["state:t", "next_to:t"])));
        assert!(compounds.contains(&compound("lambda", &["$0", "e", "and"])));
        assert!(compounds.contains(&compound("state:t", &["$0"])));
        assert!(compounds.contains(&compound("next_to:t", &["$0", "s0"])));
        assert_eq!(compound("and", &["state:t", "next_to:t"]).to_string(), "( and state:t next_to:t )");
    }

    #[test]
    fn leaf_lf() {
        let lf = LogicalForm::parse("x").unwrap();
        assert_eq!(lf.atoms(), vec![Atom("x".into())]);
        assert!(lf.compounds().is_empty());
        assert_eq!(lf.actions(), vec!["GEN x"]);
    }

    #[test]
    fn depth_one() {
        let lf = LogicalForm::parse("( f a b )").unwrap();
        assert_eq!(lf.compounds(), vec![compound("f", &["a", "b"])]);
        let mut actions = lf.actions();
        actions.sort();
        assert_eq!(actions, vec!["GEN a", "GEN b", "REDUCE f:-a b"]);
    }

    #[test]
    fn predicates_of_actions() {
        assert_eq!(action_predicate("REDUCE ask_weather:-a b"), "ask_weather");
        assert_eq!(action_predicate("GEN weather"), "weather");
        assert_eq!(action_predicate("other"), "other");
    }

    fn count_nodes(node: &LfNode) -> (usize, usize) {
        // (all nodes, internal nodes) via explicit recursion
        let mut all = 1;
        let mut internal = usize::from(!node.children().is_empty());
        for c in node.children() {
            let (a, i) = count_nodes(c);
            all += a;
            internal += i;
        }
        (all, internal)
    }

    proptest! {
        #[test]
        fn multiset_sizes(tree in arb_tree()) {
            let (all, internal) = count_nodes(&tree);
            let lf = LogicalForm::new(tree);
            prop_assert_eq!(lf.atoms().len(), all);
            prop_assert_eq!(lf.compounds().len(), internal);
            prop_assert_eq!(lf.actions().len(), all);
            prop_assert_eq!(lf.actions(), lf.clone().actions());
        }
    }
}
