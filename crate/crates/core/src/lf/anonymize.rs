use std::collections::{BTreeMap, BTreeSet};

use regex::Regex;

use super::{LfNode, LogicalForm};

/// Entity typing rules: each rule maps leaf tokens fully matching a regular
/// expression to a type tag and the slot token that replaces them.
///
/// The line-oriented file format is
///
/// ```text
/// # comment
/// PATTERN  TYPE  [SLOT]
/// ```
///
/// where `PATTERN` is a regular expression matched against the whole token
/// and `SLOT` defaults to `TYPE`. The first matching rule wins.
#[derive(Debug, Clone)]
pub struct TypingRules {
    rules: Vec<(Regex, String, String)>,
    slots: BTreeMap<String, String>,
}

#[derive(Debug, thiserror::Error)]
pub enum TypingRulesError {
    #[error("line {line}: expected `PATTERN TYPE [SLOT]`")]
    Malformed { line: usize },
    #[error("line {line}: {source}")]
    Pattern { line: usize, source: regex::Error },
}

impl TypingRules {
    pub fn new() -> Self {
        TypingRules { rules: Vec::new(), slots: BTreeMap::new() }
    }

    /// Rules that anonymize every quoted value to the slot `var`.
    pub fn quoted_values() -> Self {
        let mut rules = TypingRules::new();
        rules.push(r#"'[^']*'|"[^"]*""#, "value", "var").expect("static pattern");
        rules
    }

    pub fn push(&mut self, pattern: &str, type_tag: &str, slot: &str) -> Result<(), regex::Error> {
        let re = Regex::new(&format!("^(?:{pattern})$"))?;
        self.rules.push((re, type_tag.to_string(), slot.to_string()));
        self.slots.insert(slot.to_string(), type_tag.to_string());
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self, TypingRulesError> {
        let mut rules = TypingRules::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let (pattern, tag, slot) = match fields.as_slice() {
                [p, t] => (*p, *t, *t),
                [p, t, s] => (*p, *t, *s),
                _ => return Err(TypingRulesError::Malformed { line: i + 1 }),
            };
            rules
                .push(pattern, tag, slot)
                .map_err(|source| TypingRulesError::Pattern { line: i + 1, source })?;
        }
        Ok(rules)
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    /// Type tag of a token that is already a slot token.
    pub fn slot_type(&self, token: &str) -> Option<&str> {
        self.slots.get(token).map(String::as_str)
    }

    fn classify<'a>(&'a self, token: &'a str) -> Option<(&'a str, &'a str)> {
        if let Some((slot, tag)) = self.slots.get_key_value(token) {
            return Some((slot.as_str(), tag.as_str()));
        }
        self.rules
            .iter()
            .find(|(re, _, _)| re.is_match(token))
            .map(|(_, tag, slot)| (slot.as_str(), tag.as_str()))
    }
}

impl Default for TypingRules {
    fn default() -> Self {
        TypingRules::new()
    }
}

/// A logical form whose entity and value leaves are replaced by typed slots.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Template {
    pub lf: LogicalForm,
    pub slot_types: BTreeMap<String, String>,
}

impl Template {
    /// Canonical string used to group examples by template.
    pub fn key(&self) -> String {
        self.lf.to_sexpr()
    }

    /// Wraps a logical form that is already abstract.
    pub fn from_lf(lf: LogicalForm) -> Self {
        Template { lf, slot_types: BTreeMap::new() }
    }

    pub fn slots(&self) -> BTreeSet<&str> {
        self.slot_types.keys().map(String::as_str).collect()
    }
}

/// Replaces every leaf matched by `typing` with its slot token. Tokens that
/// are already slot tokens are kept, so the operation is idempotent.
pub fn anonymize(lf: &LogicalForm, typing: &TypingRules) -> Template {
    let mut slot_types = BTreeMap::new();
    fn go(node: &LfNode, typing: &TypingRules, slots: &mut BTreeMap<String, String>) -> LfNode {
        if node.is_leaf() {
            if let Some((slot, tag)) = typing.classify(node.label()) {
                slots.insert(slot.to_string(), tag.to_string());
                return LfNode::leaf(slot);
            }
            return node.clone();
        }
        LfNode::new(
            node.label(),
            node.children().iter().map(|c| go(c, typing, slots)).collect(),
        )
    }
    let root = go(lf.root(), typing, &mut slot_types);
    Template { lf: LogicalForm::new(root), slot_types }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lf::tests::arb_tree;
    use proptest::prelude::*;

    #[test]
    fn weather_example() {
        let lf = LogicalForm::parse("ask_weather(state_id('VIC'), date('today'), var)").unwrap();
        let t = anonymize(&lf, &TypingRules::quoted_values());
        assert_eq!(t.lf.to_functional(), "ask_weather(state_id(var), date(var), var)");
        assert_eq!(t.slot_types.get("var").map(String::as_str), Some("value"));
    }

    #[test]
    fn idempotent_on_example() {
        let lf = LogicalForm::parse("ask_weather(state_id('VIC'), date('today'), var)").unwrap();
        let rules = TypingRules::quoted_values();
        let once = anonymize(&lf, &rules);
        let twice = anonymize(&once.lf, &rules);
        assert_eq!(once, twice);
    }

    #[test]
    fn no_entities_is_identity() {
        let lf = LogicalForm::parse("( answer ( state all ) )").unwrap();
        let t = anonymize(&lf, &TypingRules::quoted_values());
        assert_eq!(t.lf, lf);
        assert!(t.slot_types.is_empty());
    }

    #[test]
    fn parses_rule_file() {
        let rules = TypingRules::parse("# cities\n[a-z]+_city city $city\ns[0-9]+ state\n").unwrap();
        let lf = LogicalForm::parse("( loc austin_city s0 x )").unwrap();
        let t = anonymize(&lf, &rules);
        assert_eq!(t.lf.to_string(), "( loc $city state x )");
        assert_eq!(t.slot_types.len(), 2);
        assert!(matches!(TypingRules::parse("onlyone"), Err(TypingRulesError::Malformed { line: 1 })));
        assert!(matches!(TypingRules::parse("( x"), Err(TypingRulesError::Pattern { .. })));
    }

    proptest! {
        #[test]
        fn idempotence(tree in arb_tree()) {
            let mut rules = TypingRules::new();
            rules.push("[a-c][a-z0-9_]*", "ent", "e_slot").unwrap();
            rules.push("[0-9].*|x.*", "num", "n_slot").unwrap();
            let lf = LogicalForm::new(tree);
            let once = anonymize(&lf, &rules);
            let twice = anonymize(&once.lf, &rules);
            prop_assert_eq!(&once, &twice);
            for node in once.lf.nodes().filter(|n| n.is_leaf()) {
                if rules.slot_type(node.label()).is_some() {
                    prop_assert!(once.slot_types.contains_key(node.label()));
                }
            }
        }
    }
}
