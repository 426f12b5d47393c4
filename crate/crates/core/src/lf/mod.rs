//! Logical forms as rooted, ordered, labeled trees.
//!
//! Two surface syntaxes are accepted by [`LogicalForm::parse`]:
//!
//! * parenthesized prefix trees, `( answer ( state ( next_to s0 ) ) )`;
//! * function-call notation, `ask_weather(state_id('VIC'), date('today'), var)`.
//!
//! The canonical serialization ([`Display`](std::fmt::Display)) is always the
//! parenthesized form with single spaces and parentheses as separate tokens.
//! Quoted values (`'VIC'`, `"container ship"`) are kept as single tokens
//! including their quotes.

mod anonymize;
mod decompose;
mod normalize;
mod smatch;

use std::fmt;

use thiserror::Error;

pub use anonymize::{anonymize, Template, TypingRules};
pub use decompose::{Atom, Compound};
pub(crate) use decompose::action_predicate;
pub use normalize::{normalize_templates, IdiomDictionary, IdiomPattern, DEFAULT_MIN_SUPPORT};
pub use smatch::{smatch_directional, smatch_sim, SmatchConfig, Triple, VariableScheme};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LfError {
    #[error("unbalanced parentheses at token {position}")]
    UnbalancedParens { position: usize },
    #[error("node without a label at token {position}")]
    EmptyNode { position: usize },
    #[error("unexpected trailing input at token {position}")]
    TrailingTokens { position: usize },
    #[error("unterminated quoted token starting at byte {offset}")]
    UnterminatedQuote { offset: usize },
}

/// One node of a logical form. A node is a leaf iff it has no children.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LfNode {
    label: String,
    children: Vec<LfNode>,
}

impl LfNode {
    /// # Panics
    ///
    /// Panics if `label` is not a valid token (empty, a parenthesis, or
    /// containing unquoted whitespace).
    pub fn new(label: impl Into<String>, children: Vec<LfNode>) -> Self {
        let label = label.into();
        assert!(is_valid_label(&label), "invalid logical form label {label:?}");
        LfNode { label, children }
    }

    pub fn leaf(label: impl Into<String>) -> Self {
        LfNode::new(label, Vec::new())
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn children(&self) -> &[LfNode] {
        &self.children
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    /// Number of nodes in the subtree rooted here.
    pub fn size(&self) -> usize {
        1 + self.children.iter().map(LfNode::size).sum::<usize>()
    }

    /// Pre-order traversal of the subtree rooted here.
    pub fn preorder(&self) -> Preorder<'_> {
        Preorder { stack: vec![self] }
    }

    pub(crate) fn into_parts(self) -> (String, Vec<LfNode>) {
        (self.label, self.children)
    }

    fn write_sexpr(&self, out: &mut String) {
        if self.children.is_empty() {
            out.push_str(&self.label);
            return;
        }
        out.push_str("( ");
        out.push_str(&self.label);
        for child in &self.children {
            out.push(' ');
            child.write_sexpr(out);
        }
        out.push_str(" )");
    }

    fn write_functional(&self, out: &mut String) {
        out.push_str(&self.label);
        if self.children.is_empty() {
            return;
        }
        out.push('(');
        for (i, child) in self.children.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            child.write_functional(out);
        }
        out.push(')');
    }
}

pub struct Preorder<'a> {
    stack: Vec<&'a LfNode>,
}

impl<'a> Iterator for Preorder<'a> {
    type Item = &'a LfNode;

    fn next(&mut self) -> Option<Self::Item> {
        let node = self.stack.pop()?;
        self.stack.extend(node.children.iter().rev());
        Some(node)
    }
}

fn is_valid_label(label: &str) -> bool {
    if label.is_empty() || label == "(" || label == ")" {
        return false;
    }
    let quoted = label.len() >= 2
        && ((label.starts_with('\'') && label.ends_with('\''))
            || (label.starts_with('"') && label.ends_with('"')));
    quoted || !label.chars().any(|c| c.is_whitespace() || c == '(' || c == ')')
}

/// A logical form: a finite ordered labeled tree.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LogicalForm {
    root: LfNode,
}

impl LogicalForm {
    pub fn new(root: LfNode) -> Self {
        LogicalForm { root }
    }

    /// Parses either surface syntax. Text starting with `(` (or containing no
    /// parentheses at all) is read as a prefix tree; otherwise function-call
    /// notation is assumed.
    pub fn parse(text: &str) -> Result<Self, LfError> {
        let trimmed = text.trim_start();
        if !trimmed.starts_with('(') && trimmed.contains('(') {
            return parse_functional(text);
        }
        parse_sexpr(text)
    }

    pub fn root(&self) -> &LfNode {
        &self.root
    }

    pub fn into_root(self) -> LfNode {
        self.root
    }

    pub fn node_count(&self) -> usize {
        self.root.size()
    }

    pub fn nodes(&self) -> Preorder<'_> {
        self.root.preorder()
    }

    /// Canonical parenthesized serialization.
    pub fn to_sexpr(&self) -> String {
        let mut out = String::new();
        self.root.write_sexpr(&mut out);
        out
    }

    /// Function-call serialization, `f(a, g(b))`.
    pub fn to_functional(&self) -> String {
        let mut out = String::new();
        self.root.write_functional(&mut out);
        out
    }

    /// Applies `f` to every node label, keeping the tree shape.
    pub fn map_labels(&self, mut f: impl FnMut(&LfNode) -> String) -> LogicalForm {
        fn go(node: &LfNode, f: &mut impl FnMut(&LfNode) -> String) -> LfNode {
            let label = f(node);
            LfNode::new(label, node.children.iter().map(|c| go(c, f)).collect())
        }
        LogicalForm::new(go(&self.root, &mut f))
    }
}

impl fmt::Display for LogicalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_sexpr())
    }
}

impl std::str::FromStr for LogicalForm {
    type Err = LfError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        LogicalForm::parse(s)
    }
}

/// Splits LF text into tokens: parentheses (and commas when `commas` is set)
/// are separate tokens, quoted strings are single tokens.
pub(crate) fn tokenize(text: &str, commas: bool) -> Result<Vec<String>, LfError> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    let mut chars = text.char_indices().peekable();
    while let Some((offset, c)) = chars.next() {
        match c {
            '\'' | '"' if current.is_empty() => {
                let mut quoted = String::from(c);
                let mut closed = false;
                for (_, q) in chars.by_ref() {
                    quoted.push(q);
                    if q == c {
                        closed = true;
                        break;
                    }
                }
                if !closed {
                    return Err(LfError::UnterminatedQuote { offset });
                }
                tokens.push(quoted);
            }
            '(' | ')' => {
                flush(&mut current, &mut tokens);
                tokens.push(c.to_string());
            }
            ',' if commas => {
                flush(&mut current, &mut tokens);
                tokens.push(",".to_string());
            }
            c if c.is_whitespace() => flush(&mut current, &mut tokens),
            c => current.push(c),
        }
    }
    flush(&mut current, &mut tokens);
    Ok(tokens)
}

fn flush(current: &mut String, tokens: &mut Vec<String>) {
    if !current.is_empty() {
        tokens.push(std::mem::take(current));
    }
}

fn parse_sexpr(text: &str) -> Result<LogicalForm, LfError> {
    let tokens = tokenize(text, false)?;
    let mut pos = 0;
    let root = sexpr_node(&tokens, &mut pos)?;
    if pos < tokens.len() {
        return Err(if tokens[pos] == ")" {
            LfError::UnbalancedParens { position: pos }
        } else {
            LfError::TrailingTokens { position: pos }
        });
    }
    Ok(LogicalForm::new(root))
}

fn sexpr_node(tokens: &[String], pos: &mut usize) -> Result<LfNode, LfError> {
    let Some(token) = tokens.get(*pos) else {
        return Err(if *pos == 0 {
            LfError::EmptyNode { position: 0 }
        } else {
            LfError::UnbalancedParens { position: *pos }
        });
    };
    match token.as_str() {
        ")" => Err(LfError::UnbalancedParens { position: *pos }),
        "(" => {
            *pos += 1;
            let label = match tokens.get(*pos).map(String::as_str) {
                None => return Err(LfError::UnbalancedParens { position: *pos }),
                Some("(") | Some(")") => return Err(LfError::EmptyNode { position: *pos }),
                Some(label) => label.to_string(),
            };
            *pos += 1;
            let mut children = Vec::new();
            loop {
                match tokens.get(*pos).map(String::as_str) {
                    None => return Err(LfError::UnbalancedParens { position: *pos }),
                    Some(")") => {
                        *pos += 1;
                        break;
                    }
                    Some(_) => children.push(sexpr_node(tokens, pos)?),
                }
            }
            Ok(LfNode { label, children })
        }
        label => {
            *pos += 1;
            Ok(LfNode { label: label.to_string(), children: Vec::new() })
        }
    }
}

fn parse_functional(text: &str) -> Result<LogicalForm, LfError> {
    let tokens = tokenize(text, true)?;
    let mut pos = 0;
    let root = functional_node(&tokens, &mut pos)?;
    if pos < tokens.len() {
        return Err(if tokens[pos] == ")" {
            LfError::UnbalancedParens { position: pos }
        } else {
            LfError::TrailingTokens { position: pos }
        });
    }
    Ok(LogicalForm::new(root))
}

fn functional_node(tokens: &[String], pos: &mut usize) -> Result<LfNode, LfError> {
    let label = match tokens.get(*pos).map(String::as_str) {
        None | Some(",") => return Err(LfError::EmptyNode { position: *pos }),
        Some("(") | Some(")") => return Err(LfError::EmptyNode { position: *pos }),
        Some(label) => label.to_string(),
    };
    *pos += 1;
    let mut children = Vec::new();
    if tokens.get(*pos).map(String::as_str) == Some("(") {
        *pos += 1;
        if tokens.get(*pos).map(String::as_str) == Some(")") {
            *pos += 1;
            return Ok(LfNode { label, children });
        }
        loop {
            children.push(functional_node(tokens, pos)?);
            match tokens.get(*pos).map(String::as_str) {
                Some(",") => *pos += 1,
                Some(")") => {
                    *pos += 1;
                    break;
                }
                None => return Err(LfError::UnbalancedParens { position: *pos }),
                Some(_) => return Err(LfError::TrailingTokens { position: *pos }),
            }
        }
    }
    Ok(LfNode { label, children })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_chain() {
        let lf = LogicalForm::parse("( answer ( state ( next_to s0 ) ) )").unwrap();
        assert_eq!(lf.node_count(), 4);
        assert_eq!(lf.root().label(), "answer");
        let mut node = lf.root();
        for expected in ["state", "next_to", "s0"] {
            assert_eq!(node.children().len(), 1);
            node = &node.children()[0];
            assert_eq!(node.label(), expected);
        }
        assert!(node.is_leaf());
    }

    #[test]
    fn parses_lambda_example() {
        let lf =
            LogicalForm::parse("( lambda $0 e ( and ( state:t $0 ) ( next_to:t $0 s0 ) ) )").unwrap();
        assert_eq!(lf.root().label(), "lambda");
        assert_eq!(lf.root().children().len(), 3);
    }

    #[test]
    fn canonicalizes_whitespace() {
        let lf = LogicalForm::parse("(f   a\t(g b)  )").unwrap();
        assert_eq!(lf.to_string(), "( f a ( g b ) )");
    }

    #[test]
    fn single_leaf() {
        let lf = LogicalForm::parse("x").unwrap();
        assert!(lf.root().is_leaf());
        assert_eq!(lf.to_string(), "x");
    }

    #[test]
    fn functional_notation() {
        let lf = LogicalForm::parse("ask_weather(state_id('VIC'), date('today'), var)").unwrap();
        assert_eq!(lf.to_string(), "( ask_weather ( state_id 'VIC' ) ( date 'today' ) var )");
        assert_eq!(lf.to_functional(), "ask_weather(state_id('VIC'), date('today'), var)");
    }

    #[test]
    fn quoted_tokens_keep_spaces() {
        let lf = LogicalForm::parse("( = va.victim \"container ship\" )").unwrap();
        assert_eq!(lf.root().children()[1].label(), "\"container ship\"");
    }

    #[test]
    fn malformed_inputs() {
        assert!(matches!(LogicalForm::parse("( f a"), Err(LfError::UnbalancedParens { .. })));
        assert!(matches!(LogicalForm::parse("( f a ) )"), Err(LfError::UnbalancedParens { .. })));
        assert!(matches!(LogicalForm::parse("( )"), Err(LfError::EmptyNode { .. })));
        assert!(matches!(LogicalForm::parse(""), Err(LfError::EmptyNode { .. })));
        assert!(matches!(LogicalForm::parse("( ( a ) b )"), Err(LfError::EmptyNode { .. })));
        assert!(matches!(LogicalForm::parse("a b"), Err(LfError::TrailingTokens { .. })));
        assert!(matches!(LogicalForm::parse("( f 'abc )"), Err(LfError::UnterminatedQuote { .. })));
        assert!(matches!(LogicalForm::parse("f(a, b"), Err(LfError::UnbalancedParens { .. })));
    }

    pub(crate) fn arb_tree() -> impl Strategy<Value = LfNode> {
        let leaf = "[a-z][a-z0-9_:$.]{0,5}".prop_map(LfNode::leaf);
        leaf.prop_recursive(4, 24, 4, |inner| {
            ("[a-z][a-z_:]{0,5}", prop::collection::vec(inner, 1..4))
                .prop_map(|(label, children)| LfNode::new(label, children))
        })
    }

    proptest! {
        #[test]
        fn round_trip(tree in arb_tree(), pad in prop::collection::vec(" |  |\t|\n", 1..4)) {
            let lf = LogicalForm::new(tree);
            let canonical = lf.to_string();
            let spaced = canonical.split(' ').collect::<Vec<_>>().join(&pad.concat());
            let reparsed = LogicalForm::parse(&spaced).unwrap();
            prop_assert_eq!(reparsed.to_string(), canonical);
            prop_assert_eq!(&reparsed, &lf);
            let functional = LogicalForm::parse(&lf.to_functional());
            if !lf.root().is_leaf() {
                prop_assert_eq!(functional.unwrap(), lf);
            }
        }
    }
}
