//! Template normalization: frequent complete subtrees, and groups of fixed
//! siblings together with their parent, are collapsed into single unit
//! nodes. A dictionary maps every unit back to the structure it replaced so
//! normalization can be undone exactly.
//!
//! Support is counted in documents: the number of templates in which a
//! pattern occurs at least once.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::{LfNode, LogicalForm, Template};

pub const DEFAULT_MIN_SUPPORT: usize = 2;

/// What a unit node stands for: a head label with some argument positions
/// fixed to given subtrees. Positions that are `None` are filled, in order,
/// by the children of the unit node.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IdiomPattern {
    pub head: String,
    pub slots: Vec<Option<LfNode>>,
}

impl IdiomPattern {
    pub fn holes(&self) -> usize {
        self.slots.iter().filter(|s| s.is_none()).count()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IdiomDictionary {
    pub min_support: usize,
    pub units: BTreeMap<String, IdiomPattern>,
}

impl IdiomDictionary {
    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }

    pub fn len(&self) -> usize {
        self.units.len()
    }

    /// Re-expands every unit node.
    pub fn expand(&self, lf: &LogicalForm) -> LogicalForm {
        LogicalForm::new(self.expand_node(lf.root()))
    }

    fn expand_node(&self, node: &LfNode) -> LfNode {
        match self.units.get(node.label()) {
            None => LfNode::new(
                node.label(),
                node.children().iter().map(|c| self.expand_node(c)).collect(),
            ),
            Some(pattern) => {
                let mut free = node.children().iter();
                let children = pattern
                    .slots
                    .iter()
                    .map(|slot| match slot {
                        Some(fixed) => self.expand_node(fixed),
                        None => self.expand_node(free.next().expect("unit arity matches pattern")),
                    })
                    .collect();
                LfNode::new(pattern.head.clone(), children)
            }
        }
    }
}

/// Collapses idioms of support at least `min_support` across the corpus.
///
/// Two passes run in order:
///
/// 1. every maximal complete subtree (a node with all its descendants) that
///    is not a leaf and occurs in at least `min_support` templates becomes a
///    leaf unit;
/// 2. at every remaining internal node, leaf children that always occur
///    together at the same position under the same head and arity (fixed
///    siblings) are merged, with the parent, into one unit whose remaining
///    children stay as arguments.
///
/// # Panics
///
/// Panics if `min_support < 2`.
pub fn normalize_templates(
    corpus: &[Template],
    min_support: usize,
) -> (Vec<Template>, IdiomDictionary) {
    assert!(min_support >= 2, "minimum support must be at least 2");
    let mut namer = UnitNamer::new(corpus);
    let mut dict = IdiomDictionary { min_support, units: BTreeMap::new() };

    let roots: Vec<LfNode> = corpus.iter().map(|t| t.lf.root().clone()).collect();
    let roots = collapse_complete_subtrees(roots, min_support, &mut namer, &mut dict);
    let roots = collapse_fixed_siblings(roots, min_support, &mut namer, &mut dict);

    let normalized = corpus
        .iter()
        .zip(roots)
        .map(|(t, root)| Template { lf: LogicalForm::new(root), slot_types: t.slot_types.clone() })
        .collect();
    (normalized, dict)
}

struct UnitNamer {
    taken: BTreeSet<String>,
    next: usize,
}

impl UnitNamer {
    fn new(corpus: &[Template]) -> Self {
        let taken = corpus
            .iter()
            .flat_map(|t| t.lf.nodes().map(|n| n.label().to_string()))
            .collect();
        UnitNamer { taken, next: 0 }
    }

    fn fresh(&mut self) -> String {
        loop {
            let name = format!("idiom_{}", self.next);
            self.next += 1;
            if self.taken.insert(name.clone()) {
                return name;
            }
        }
    }
}

fn subtree_key(node: &LfNode) -> String {
    LogicalForm::new(node.clone()).to_sexpr()
}

fn collapse_complete_subtrees(
    roots: Vec<LfNode>,
    min_support: usize,
    namer: &mut UnitNamer,
    dict: &mut IdiomDictionary,
) -> Vec<LfNode> {
    let mut support: HashMap<String, BTreeSet<usize>> = HashMap::new();
    for (doc, root) in roots.iter().enumerate() {
        for node in root.preorder().filter(|n| !n.is_leaf()) {
            support.entry(subtree_key(node)).or_default().insert(doc);
        }
    }
    let frequent = |node: &LfNode| {
        !node.is_leaf()
            && support.get(&subtree_key(node)).is_some_and(|docs| docs.len() >= min_support)
    };

    // Collect the maximal frequent subtrees first so unit names follow the
    // sorted order of their patterns.
    let mut maximal: BTreeMap<String, LfNode> = BTreeMap::new();
    fn find_maximal(
        node: &LfNode,
        frequent: &dyn Fn(&LfNode) -> bool,
        out: &mut BTreeMap<String, LfNode>,
    ) {
        if frequent(node) {
            out.entry(subtree_key(node)).or_insert_with(|| node.clone());
        } else {
            for c in node.children() {
                find_maximal(c, frequent, out);
            }
        }
    }
    for root in &roots {
        find_maximal(root, &frequent, &mut maximal);
    }
    let mut names: HashMap<String, String> = HashMap::new();
    for (key, node) in maximal {
        let name = namer.fresh();
        let (head, children) = node.into_parts();
        dict.units.insert(
            name.clone(),
            IdiomPattern { head, slots: children.into_iter().map(Some).collect() },
        );
        names.insert(key, name);
    }

    fn rewrite(node: LfNode, names: &HashMap<String, String>) -> LfNode {
        if !node.is_leaf() {
            if let Some(name) = names.get(&subtree_key(&node)) {
                return LfNode::leaf(name.clone());
            }
        }
        let (label, children) = node.into_parts();
        LfNode::new(label, children.into_iter().map(|c| rewrite(c, names)).collect())
    }
    roots.into_iter().map(|r| rewrite(r, &names)).collect()
}

/// (head, arity, position, leaf label)
type SiblingKey = (String, usize, usize, String);

fn collapse_fixed_siblings(
    roots: Vec<LfNode>,
    min_support: usize,
    namer: &mut UnitNamer,
    dict: &mut IdiomDictionary,
) -> Vec<LfNode> {
    // Occurrence sets over nodes, identified by (document, pre-order index).
    let mut occurrences: HashMap<SiblingKey, BTreeSet<(usize, usize)>> = HashMap::new();
    for (doc, root) in roots.iter().enumerate() {
        for (idx, node) in root.preorder().enumerate() {
            for (pos, child) in node.children().iter().enumerate() {
                if child.is_leaf() {
                    let key = (node.label().to_string(), node.children().len(), pos, child.label().to_string());
                    occurrences.entry(key).or_default().insert((doc, idx));
                }
            }
        }
    }

    // For every occurring (head, arity) decide the fixed positions once.
    let mut groups: BTreeMap<(String, usize), Vec<(usize, String)>> = BTreeMap::new();
    let mut by_set: BTreeMap<(String, usize, Vec<(usize, usize)>), Vec<(usize, String)>> = BTreeMap::new();
    for ((head, arity, pos, label), occ) in &occurrences {
        let docs: BTreeSet<usize> = occ.iter().map(|(d, _)| *d).collect();
        if docs.len() < min_support {
            continue;
        }
        by_set
            .entry((head.clone(), *arity, occ.iter().copied().collect()))
            .or_default()
            .push((*pos, label.clone()));
    }
    for ((head, arity, _), mut members) in by_set {
        if members.len() < 2 {
            continue;
        }
        members.sort();
        let entry = groups.entry((head, arity)).or_default();
        // keep the largest group per (head, arity); ties go to the earliest position
        if members.len() > entry.len() || (members.len() == entry.len() && members < *entry) {
            *entry = members;
        }
    }

    // Assign unit names per distinct pattern.
    let mut patterns: BTreeMap<(String, usize), String> = BTreeMap::new();
    for ((head, arity), members) in &groups {
        if members.is_empty() {
            continue;
        }
        let mut slots: Vec<Option<LfNode>> = vec![None; *arity];
        for (pos, label) in members {
            slots[*pos] = Some(LfNode::leaf(label.clone()));
        }
        let name = namer.fresh();
        dict.units.insert(name.clone(), IdiomPattern { head: head.clone(), slots });
        patterns.insert((head.clone(), *arity), name);
    }

    fn rewrite(
        node: LfNode,
        groups: &BTreeMap<(String, usize), Vec<(usize, String)>>,
        patterns: &BTreeMap<(String, usize), String>,
    ) -> LfNode {
        let key = (node.label().to_string(), node.children().len());
        let (label, children) = node.into_parts();
        if let (Some(members), Some(name)) = (groups.get(&key), patterns.get(&key)) {
            let matches = members
                .iter()
                .all(|(pos, leaf)| children[*pos].is_leaf() && children[*pos].label() == leaf);
            if matches {
                let rest = children
                    .into_iter()
                    .enumerate()
                    .filter(|(i, _)| !members.iter().any(|(p, _)| p == i))
                    .map(|(_, c)| rewrite(c, groups, patterns))
                    .collect();
                return LfNode::new(name.clone(), rest);
            }
        }
        LfNode::new(label, children.into_iter().map(|c| rewrite(c, groups, patterns)).collect())
    }
    roots.into_iter().map(|r| rewrite(r, &groups, &patterns)).collect()
}
