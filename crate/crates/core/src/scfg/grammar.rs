use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::Path;

use regex::Regex;

use super::GrammarError;

pub const DEFAULT_START: &str = "ROOT";

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Symbol {
    Terminal(String),
    /// A nonterminal occurrence; `link` pairs it with its aligned occurrence
    /// on the other side of the rule.
    Nonterminal { name: String, link: usize },
}

impl Symbol {
    pub fn nonterminal(&self) -> Option<&str> {
        match self {
            Symbol::Nonterminal { name, .. } => Some(name),
            Symbol::Terminal(_) => None,
        }
    }
}

/// `head -> (source, target, alignment)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScfgRule {
    pub head: String,
    pub source: Vec<Symbol>,
    pub target: Vec<Symbol>,
    /// For the k-th nonterminal of `source` (left to right), the index of
    /// its aligned nonterminal among the nonterminals of `target`.
    pub alignment: Vec<usize>,
}

impl ScfgRule {
    /// Builds a rule, deriving the alignment from the occurrence links.
    pub fn new(head: &str, source: Vec<Symbol>, target: Vec<Symbol>) -> Result<Self, GrammarError> {
        let src: Vec<(&str, usize)> = nts(&source);
        let tgt: Vec<(&str, usize)> = nts(&target);
        let mismatch = || GrammarError::AlignmentMismatch { head: head.to_string() };
        let src_links: HashSet<usize> = src.iter().map(|(_, l)| *l).collect();
        let tgt_links: HashSet<usize> = tgt.iter().map(|(_, l)| *l).collect();
        if src.len() != tgt.len() || src_links.len() != src.len() || src_links != tgt_links {
            return Err(mismatch());
        }
        let mut alignment = Vec::with_capacity(src.len());
        for (name, link) in &src {
            let j = tgt.iter().position(|(_, l)| l == link).ok_or_else(mismatch)?;
            if tgt[j].0 != *name {
                return Err(mismatch());
            }
            alignment.push(j);
        }
        Ok(ScfgRule { head: head.to_string(), source, target, alignment })
    }

    /// Nonterminal names in source order.
    pub fn children(&self) -> impl Iterator<Item = &str> {
        self.source.iter().filter_map(Symbol::nonterminal)
    }

    pub fn arity(&self) -> usize {
        self.alignment.len()
    }
}

fn nts(side: &[Symbol]) -> Vec<(&str, usize)> {
    side.iter()
        .filter_map(|s| match s {
            Symbol::Nonterminal { name, link } => Some((name.as_str(), *link)),
            Symbol::Terminal(_) => None,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexEntry {
    pub surface: Vec<String>,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScfgGrammar {
    pub start: String,
    pub rules: Vec<ScfgRule>,
    pub lexicon: BTreeMap<String, Vec<LexEntry>>,
    pub abstract_vars: BTreeSet<String>,
}

impl ScfgGrammar {
    pub fn new(rules: Vec<ScfgRule>) -> Self {
        ScfgGrammar {
            start: DEFAULT_START.to_string(),
            rules,
            lexicon: BTreeMap::new(),
            abstract_vars: BTreeSet::new(),
        }
    }

    /// Indices of the rules rewriting `head`, in file order.
    pub fn rules_for<'a>(&'a self, head: &'a str) -> impl Iterator<Item = usize> + 'a {
        self.rules.iter().enumerate().filter(move |(_, r)| r.head == head).map(|(i, _)| i)
    }

    /// Checks that the start symbol and every referenced nonterminal have
    /// rules and that no variable is both lexical and abstract.
    pub fn validate(&self) -> Result<(), GrammarError> {
        let heads: HashSet<&str> = self.rules.iter().map(|r| r.head.as_str()).collect();
        if !heads.contains(self.start.as_str()) {
            return Err(GrammarError::UnreachableStart(self.start.clone()));
        }
        for rule in &self.rules {
            if let Some(missing) = rule.children().find(|nt| !heads.contains(nt)) {
                return Err(GrammarError::UnknownNonterminal {
                    head: rule.head.clone(),
                    name: missing.to_string(),
                });
            }
        }
        if let Some(v) = self.abstract_vars.iter().find(|v| self.lexicon.contains_key(*v)) {
            return Err(GrammarError::AbstractLexicalOverlap(v.clone()));
        }
        Ok(())
    }

    /// Nonterminals that have at least one finite derivation.
    pub fn productive(&self) -> HashSet<&str> {
        let mut done: HashSet<&str> = HashSet::new();
        loop {
            let before = done.len();
            for r in &self.rules {
                if r.children().all(|c| done.contains(c)) {
                    done.insert(r.head.as_str());
                }
            }
            if done.len() == before {
                return done;
            }
        }
    }

    pub fn parse(text: &str) -> Result<Self, GrammarError> {
        let nt_re = Regex::new(r"^<([A-Za-z_][A-Za-z0-9_]*):([0-9]+)>$").expect("static pattern");
        let mut grammar = ScfgGrammar::new(Vec::new());
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let syntax = |msg: &str| GrammarError::Syntax { line: line_no, message: msg.to_string() };
            if let Some(rest) = line.strip_prefix("lexicon ") {
                let (var, entry) = rest.split_once('=').ok_or_else(|| syntax("expected `lexicon VAR = surface | value`"))?;
                let (surface, value) = entry.split_once('|').ok_or_else(|| syntax("expected `surface | value`"))?;
                let var = var.trim();
                let value = value.trim();
                let surface: Vec<String> = surface.split_whitespace().map(str::to_string).collect();
                if var.is_empty() || value.is_empty() || surface.is_empty() {
                    return Err(syntax("empty lexicon field"));
                }
                if crate::lf::LogicalForm::parse(value).map_or(true, |lf| !lf.root().is_leaf()) {
                    return Err(syntax("lexicon value must be a single LF token"));
                }
                grammar
                    .lexicon
                    .entry(var.to_string())
                    .or_default()
                    .push(LexEntry { surface, value: value.to_string() });
            } else if let Some(rest) = line.strip_prefix("abstract ") {
                for v in rest.split_whitespace() {
                    grammar.abstract_vars.insert(v.to_string());
                }
            } else if let Some(rest) = line.strip_prefix("start ") {
                grammar.start = rest.trim().to_string();
            } else {
                let (head, body) = line.split_once("->").ok_or_else(|| syntax("expected `HEAD -> src: ... ;; tgt: ...`"))?;
                let head = head.trim();
                if head.is_empty() || head.contains(char::is_whitespace) {
                    return Err(syntax("rule head must be a single token"));
                }
                let (src, tgt) = body.split_once(";;").ok_or_else(|| syntax("missing `;;` separator"))?;
                let src = src.trim().strip_prefix("src:").ok_or_else(|| syntax("missing `src:`"))?;
                let tgt = tgt.trim().strip_prefix("tgt:").ok_or_else(|| syntax("missing `tgt:`"))?;
                let symbols = |side: &str| -> Vec<Symbol> {
                    side.split_whitespace()
                        .map(|tok| match nt_re.captures(tok) {
                            Some(c) => Symbol::Nonterminal {
                                name: c[1].to_string(),
                                link: c[2].parse().expect("digits"),
                            },
                            None => Symbol::Terminal(tok.to_string()),
                        })
                        .collect()
                };
                let rule = ScfgRule::new(head, symbols(src), symbols(tgt))?;
                if rule.target.is_empty() {
                    return Err(syntax("empty target side"));
                }
                grammar.rules.push(rule);
            }
        }
        grammar.validate()?;
        Ok(grammar)
    }

    pub fn load(path: &Path) -> Result<Self, GrammarError> {
        let text = std::fs::read_to_string(path).map_err(|source| GrammarError::Io {
            path: path.display().to_string(),
            source,
        })?;
        ScfgGrammar::parse(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const TOY: &str = "\
# ROOT -> A B with two A rules and three B rules
ROOT -> src: <A:1> and <B:2> ;; tgt: ( pair <B:2> <A:1> )
A -> src: red ;; tgt: r
A -> src: blue ;; tgt: b
B -> src: one ;; tgt: n1
B -> src: two ;; tgt: n2
B -> src: three ;; tgt: n3
";

    #[test]
    fn loads_toy_grammar() {
        let g = ScfgGrammar::parse(TOY).unwrap();
        assert_eq!(g.rules.len(), 6);
        assert_eq!(g.rules[0].alignment, vec![1, 0]);
        assert_eq!(g.rules_for("B").collect::<Vec<_>>(), vec![3, 4, 5]);
    }

    #[test]
    fn three_rule_grammar() {
        let g = ScfgGrammar::parse(
            "ROOT -> src: show <X:1> ;; tgt: ( show <X:1> )\nX -> src: a ;; tgt: a\nX -> src: b ;; tgt: b\n",
        )
        .unwrap();
        assert_eq!(g.rules.len(), 3);
    }

    #[test]
    fn alignment_mismatch() {
        for bad in [
            "ROOT -> src: <A:1> <B:2> ;; tgt: ( f <A:1> )",
            "ROOT -> src: <A:1> ;; tgt: ( f <B:1> )",
            "ROOT -> src: <A:1> <A:1> ;; tgt: ( f <A:1> <A:1> )",
            "ROOT -> src: <A:1> ;; tgt: ( f <A:2> )",
        ] {
            let text = format!("{bad}\nA -> src: a ;; tgt: a\nB -> src: b ;; tgt: b\n");
            assert!(
                matches!(ScfgGrammar::parse(&text), Err(GrammarError::AlignmentMismatch { .. })),
                "{bad}"
            );
        }
    }

    #[test]
    fn validation_errors() {
        assert!(matches!(
            ScfgGrammar::parse("ROOT -> src: <A:1> ;; tgt: <A:1>\n"),
            Err(GrammarError::UnknownNonterminal { .. })
        ));
        assert!(matches!(
            ScfgGrammar::parse("S -> src: a ;; tgt: a\n"),
            Err(GrammarError::UnreachableStart(_))
        ));
        assert!(matches!(
            ScfgGrammar::parse("ROOT -> src: a ;; tgt: a\nlexicon $x = a | a\nabstract $x\n"),
            Err(GrammarError::AbstractLexicalOverlap(_))
        ));
        assert!(matches!(ScfgGrammar::parse("ROOT src a"), Err(GrammarError::Syntax { line: 1, .. })));
        assert!(matches!(
            ScfgGrammar::parse("ROOT -> src: a ;; tgt: a\nlexicon $x = a b | ( f x )\n"),
            Err(GrammarError::Syntax { line: 2, .. })
        ));
    }

    #[test]
    fn lexicon_and_abstract_lines() {
        let g = ScfgGrammar::parse(
            "start Q\nQ -> src: $v ;; tgt: ( f $v )\nlexicon $v = oil tanker | \"oil tanker\"\nabstract $loc $dat\n",
        )
        .unwrap();
        assert_eq!(g.start, "Q");
        assert_eq!(g.lexicon["$v"][0].surface, vec!["oil", "tanker"]);
        assert_eq!(g.lexicon["$v"][0].value, "\"oil tanker\"");
        assert_eq!(g.abstract_vars.len(), 2);
    }
}
