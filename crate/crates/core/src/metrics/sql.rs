use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use super::MetricsError;

/// The clause kinds a query is decomposed into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ClauseKind {
    Select,
    From,
    Where,
    GroupBy,
    OrderBy,
}

impl ClauseKind {
    pub const ALL: [ClauseKind; 5] =
        [ClauseKind::Select, ClauseKind::From, ClauseKind::Where, ClauseKind::GroupBy, ClauseKind::OrderBy];
}

impl fmt::Display for ClauseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClauseKind::Select => "SELECT",
            ClauseKind::From => "FROM",
            ClauseKind::Where => "WHERE",
            ClauseKind::GroupBy => "GROUP BY",
            ClauseKind::OrderBy => "ORDER BY",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Word(String),
    Quoted(String),
    Op(String),
}

impl Token {
    fn text(&self) -> &str {
        match self {
            Token::Word(s) | Token::Quoted(s) | Token::Op(s) => s,
        }
    }

    fn is_word(&self, w: &str) -> bool {
        matches!(self, Token::Word(s) if s == w)
    }
}

fn lex(query: &str) -> Result<Vec<Token>, String> {
    let chars: Vec<char> = query.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c == '"' || c == '\'' {
            let end = chars[i + 1..].iter().position(|&d| d == c).ok_or("unterminated string literal")? + i + 1;
            out.push(Token::Quoted(chars[i..=end].iter().collect()));
            i = end + 1;
        } else if c.is_alphanumeric() || matches!(c, '_' | '.' | '*' | '$') {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || matches!(chars[i], '_' | '.' | '*' | '$')) {
                i += 1;
            }
            out.push(Token::Word(chars[start..i].iter().collect::<String>().to_lowercase()));
        } else {
            let two: String = chars[i..(i + 2).min(chars.len())].iter().collect();
            if matches!(two.as_str(), "!=" | "<>" | "<=" | ">=") {
                out.push(Token::Op(two));
                i += 2;
            } else {
                out.push(Token::Op(c.to_string()));
                i += 1;
            }
        }
    }
    Ok(out)
}

/// A query as bags of normalized sub-components per clause kind. Clause
/// bodies split on top-level commas, and WHERE bodies also on top-level
/// `AND`. Unquoted text is lowercased and tokens are rejoined with single
/// spaces, so `a.b="x"` and `A.B = "x"` normalize alike.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SqlClauses {
    clauses: BTreeMap<ClauseKind, Vec<String>>,
}

impl SqlClauses {
    pub fn parse(query: &str) -> Result<Self, MetricsError> {
        let err = |reason: &str| MetricsError::SqlParse { query: query.to_string(), reason: reason.to_string() };
        let tokens = lex(query).map_err(|r| err(&r))?;

        let mut depth = 0i64;
        let mut starts: Vec<(usize, usize, ClauseKind)> = Vec::new();
        for (i, t) in tokens.iter().enumerate() {
            match t.text() {
                "(" => depth += 1,
                ")" => depth -= 1,
                _ => {}
            }
            if depth < 0 {
                return Err(err("unbalanced parentheses"));
            }
            if depth != 0 {
                continue;
            }
            let next_by = tokens.get(i + 1).is_some_and(|n| n.is_word("by"));
            let kind = match t {
                Token::Word(w) if w == "select" => Some((ClauseKind::Select, 1)),
                Token::Word(w) if w == "from" => Some((ClauseKind::From, 1)),
                Token::Word(w) if w == "where" => Some((ClauseKind::Where, 1)),
                Token::Word(w) if w == "group" && next_by => Some((ClauseKind::GroupBy, 2)),
                Token::Word(w) if w == "order" && next_by => Some((ClauseKind::OrderBy, 2)),
                _ => None,
            };
            if let Some((kind, width)) = kind {
                starts.push((i, width, kind));
            }
        }
        if depth != 0 {
            return Err(err("unbalanced parentheses"));
        }
        match starts.first() {
            Some(&(0, _, _)) => {}
            _ => return Err(err("query must start with a clause keyword")),
        }

        let mut clauses = BTreeMap::new();
        for (n, &(start, width, kind)) in starts.iter().enumerate() {
            let end = starts.get(n + 1).map_or(tokens.len(), |s| s.0);
            let body = &tokens[start + width..end];
            if body.is_empty() {
                return Err(err(&format!("empty {kind} clause")));
            }
            let parts = split_body(body, kind == ClauseKind::Where);
            if parts.iter().any(Vec::is_empty) {
                return Err(err(&format!("empty item in {kind} clause")));
            }
            let parts = parts.into_iter().map(|p| p.iter().map(|t| t.text()).collect::<Vec<_>>().join(" ")).collect();
            if clauses.insert(kind, parts).is_some() {
                return Err(err(&format!("repeated {kind} clause")));
            }
        }
        Ok(SqlClauses { clauses })
    }

    pub fn get(&self, kind: ClauseKind) -> &[String] {
        self.clauses.get(&kind).map_or(&[], Vec::as_slice)
    }

    pub fn kinds(&self) -> impl Iterator<Item = ClauseKind> + '_ {
        self.clauses.keys().copied()
    }

    fn set(&self, kind: ClauseKind) -> BTreeSet<&str> {
        self.get(kind).iter().map(String::as_str).collect()
    }
}

fn split_body(body: &[Token], on_and: bool) -> Vec<Vec<Token>> {
    let mut parts = vec![Vec::new()];
    let mut depth = 0i64;
    for t in body {
        match t.text() {
            "(" => depth += 1,
            ")" => depth -= 1,
            _ => {}
        }
        let split = depth == 0 && (matches!(t, Token::Op(s) if s == ",") || (on_and && t.is_word("and")));
        if split {
            parts.push(Vec::new());
        } else {
            parts.last_mut().expect("nonempty").push(t.clone());
        }
    }
    parts
}

/// True when every clause kind holds the same set of sub-components in
/// both queries, regardless of their order.
pub fn set_match(pred: &str, gold: &str) -> Result<bool, MetricsError> {
    let (p, g) = (SqlClauses::parse(pred)?, SqlClauses::parse(gold)?);
    Ok(ClauseKind::ALL.iter().all(|&k| p.set(k) == g.set(k)))
}

/// Precision, recall and F1 on a 0-100 scale, averaged over `support` pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentF1 {
    pub per_kind: BTreeMap<ClauseKind, Prf>,
    /// Mean F1 over the kinds that occur in the corpus.
    pub macro_f1: f64,
}

/// Per clause kind set precision/recall/F1 of sub-components, averaged over
/// the pairs where the kind occurs on at least one side. A prediction that
/// fails to parse contributes zero overlap; an unparseable gold query is an
/// error.
pub fn component_f1<P: AsRef<str>, G: AsRef<str>>(preds: &[P], golds: &[G]) -> Result<ComponentF1, MetricsError> {
    if preds.len() != golds.len() {
        return Err(MetricsError::LengthMismatch(preds.len(), golds.len()));
    }
    let mut sums: BTreeMap<ClauseKind, (f64, f64, f64, usize)> = BTreeMap::new();
    for (pred, gold) in preds.iter().zip(golds) {
        let g = SqlClauses::parse(gold.as_ref())?;
        let p = SqlClauses::parse(pred.as_ref()).unwrap_or_default();
        let kinds: BTreeSet<ClauseKind> = g.kinds().chain(p.kinds()).collect();
        for k in kinds {
            let (ps, gs) = (p.set(k), g.set(k));
            let hit = ps.intersection(&gs).count() as f64;
            let precision = if ps.is_empty() { 0.0 } else { hit / ps.len() as f64 };
            let recall = if gs.is_empty() { 0.0 } else { hit / gs.len() as f64 };
            let f1 = if hit == 0.0 { 0.0 } else { 2.0 * precision * recall / (precision + recall) };
            let e = sums.entry(k).or_insert((0.0, 0.0, 0.0, 0));
            e.0 += precision;
            e.1 += recall;
            e.2 += f1;
            e.3 += 1;
        }
    }
    let per_kind: BTreeMap<ClauseKind, Prf> = sums
        .into_iter()
        .map(|(k, (p, r, f, n))| {
            let n_f = n as f64;
            (k, Prf { precision: 100.0 * p / n_f, recall: 100.0 * r / n_f, f1: 100.0 * f / n_f, support: n })
        })
        .collect();
    let macro_f1 =
        if per_kind.is_empty() { 0.0 } else { per_kind.values().map(|x| x.f1).sum::<f64>() / per_kind.len() as f64 };
    Ok(ComponentF1 { per_kind, macro_f1 })
}
