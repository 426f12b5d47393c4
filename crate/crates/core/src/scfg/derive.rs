use std::collections::HashMap;
use std::rc::Rc;

use rand::Rng;

use super::grammar::{ScfgGrammar, Symbol};
use super::GrammarError;
use crate::lf::LogicalForm;
use crate::rng::seeded;

pub const DEFAULT_MAX_DEPTH: usize = 12;

/// Attempts per sample before [`derive_sample`] gives up with
/// [`GrammarError::DepthExceeded`].
pub const SAMPLE_RETRIES: usize = 100;

/// A rule-application tree. Children follow the source-side order of the
/// rule's nonterminals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Derivation {
    pub rule: usize,
    pub children: Vec<Rc<Derivation>>,
}

/// Paired yield of a derivation.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedPair {
    pub utterance: Vec<String>,
    pub lf: LogicalForm,
}

impl Derivation {
    pub fn depth(&self) -> usize {
        1 + self.children.iter().map(|c| c.depth()).max().unwrap_or(0)
    }

    /// Rule indices used, in pre-order.
    pub fn rules_used(&self) -> Vec<usize> {
        let mut out = vec![self.rule];
        for c in &self.children {
            out.extend(c.rules_used());
        }
        out
    }

    pub fn source_yield(&self, g: &ScfgGrammar) -> Vec<String> {
        let mut out = Vec::new();
        self.write_side(g, true, &mut out);
        out
    }

    pub fn target_yield(&self, g: &ScfgGrammar) -> Vec<String> {
        let mut out = Vec::new();
        self.write_side(g, false, &mut out);
        out
    }

    fn write_side(&self, g: &ScfgGrammar, source: bool, out: &mut Vec<String>) {
        let rule = &g.rules[self.rule];
        let side = if source { &rule.source } else { &rule.target };
        let mut nt_index = 0;
        for sym in side {
            match sym {
                Symbol::Terminal(t) => out.push(t.clone()),
                Symbol::Nonterminal { .. } => {
                    let child = if source {
                        nt_index
                    } else {
                        rule.alignment.iter().position(|&j| j == nt_index).expect("bijective alignment")
                    };
                    self.children[child].write_side(g, source, out);
                    nt_index += 1;
                }
            }
        }
    }

    pub fn to_pair(&self, g: &ScfgGrammar) -> Result<DerivedPair, GrammarError> {
        let target = self.target_yield(g).join(" ");
        let lf = LogicalForm::parse(&target)
            .map_err(|source| GrammarError::InvalidLf { text: target.clone(), source })?;
        Ok(DerivedPair { utterance: self.source_yield(g), lf })
    }
}

/// Number of derivation trees of depth at most `max_depth` rooted at the
/// start symbol, by dynamic programming over (nonterminal, depth).
/// Saturates at `u128::MAX`.
pub fn count_derivations(g: &ScfgGrammar, max_depth: usize) -> u128 {
    let mut memo: HashMap<(&str, usize), u128> = HashMap::new();
    fn count<'g>(
        g: &'g ScfgGrammar,
        nt: &'g str,
        depth: usize,
        memo: &mut HashMap<(&'g str, usize), u128>,
    ) -> u128 {
        if depth == 0 {
            return 0;
        }
        if let Some(&c) = memo.get(&(nt, depth)) {
            return c;
        }
        let mut total: u128 = 0;
        for r in g.rules_for(nt) {
            let mut product: u128 = 1;
            for child in g.rules[r].children() {
                product = product.saturating_mul(count(g, child, depth - 1, memo));
                if product == 0 {
                    break;
                }
            }
            total = total.saturating_add(product);
        }
        memo.insert((nt, depth), total);
        total
    }
    count(g, &g.start, max_depth, &mut memo)
}

type Forest = Rc<Vec<Rc<Derivation>>>;

struct Memo<'g> {
    g: &'g ScfgGrammar,
    table: HashMap<(String, usize), Forest>,
}

impl<'g> Memo<'g> {
    fn all(&mut self, nt: &str, depth: usize) -> Forest {
        if depth == 0 {
            return Rc::new(Vec::new());
        }
        if let Some(f) = self.table.get(&(nt.to_string(), depth)) {
            return f.clone();
        }
        let mut out = Vec::new();
        for r in self.g.rules_for(nt).collect::<Vec<_>>() {
            let forests: Vec<Forest> = self.g.rules[r]
                .children()
                .map(str::to_string)
                .collect::<Vec<_>>()
                .iter()
                .map(|c| self.all(c, depth - 1))
                .collect();
            let mut odometer = Odometer::new(&forests);
            while let Some(children) = odometer.next_combination() {
                out.push(Rc::new(Derivation { rule: r, children }));
            }
        }
        let forest = Rc::new(out);
        self.table.insert((nt.to_string(), depth), forest.clone());
        forest
    }
}

/// Enumerates the cartesian product of forests, leftmost position most
/// significant.
struct Odometer {
    forests: Vec<Forest>,
    index: Vec<usize>,
    done: bool,
}

impl Odometer {
    fn new(forests: &[Forest]) -> Self {
        let done = forests.iter().any(|f| f.is_empty());
        Odometer { forests: forests.to_vec(), index: vec![0; forests.len()], done }
    }

    fn next_combination(&mut self) -> Option<Vec<Rc<Derivation>>> {
        if self.done {
            return None;
        }
        let item = self.index.iter().zip(&self.forests).map(|(&i, f)| f[i].clone()).collect();
        let mut pos = self.index.len();
        loop {
            if pos == 0 {
                self.done = true;
                break;
            }
            pos -= 1;
            self.index[pos] += 1;
            if self.index[pos] < self.forests[pos].len() {
                break;
            }
            self.index[pos] = 0;
        }
        Some(item)
    }
}

/// Lazily enumerates every derivation of depth at most `max_depth`, ordered
/// by top rule index and then left-to-right over child choices. Subtrees
/// below the root are shared.
pub struct ExhaustiveDerivations<'g> {
    g: &'g ScfgGrammar,
    memo: Memo<'g>,
    top_rules: Vec<usize>,
    next_rule: usize,
    current: Option<(usize, Odometer)>,
    depth: usize,
}

impl<'g> Iterator for ExhaustiveDerivations<'g> {
    type Item = Rc<Derivation>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            if let Some((rule, odo)) = &mut self.current {
                if let Some(children) = odo.next_combination() {
                    return Some(Rc::new(Derivation { rule: *rule, children }));
                }
                self.current = None;
            }
            let &rule = self.top_rules.get(self.next_rule)?;
            self.next_rule += 1;
            let children: Vec<String> = self.g.rules[rule].children().map(str::to_string).collect();
            let forests: Vec<Forest> =
                children.iter().map(|c| self.memo.all(c, self.depth - 1)).collect();
            self.current = Some((rule, Odometer::new(&forests)));
        }
    }
}

impl<'g> ExhaustiveDerivations<'g> {
    /// Adapts the stream to paired yields.
    pub fn pairs(self) -> impl Iterator<Item = Result<DerivedPair, GrammarError>> + 'g {
        let g = self.g;
        self.map(move |d| d.to_pair(g))
    }
}

/// Every derivation of depth at most `max_depth`. Fails with
/// [`GrammarError::DepthExceeded`] only when the start symbol has no finite
/// derivation at all.
pub fn derive_exhaustive(
    g: &ScfgGrammar,
    max_depth: usize,
) -> Result<ExhaustiveDerivations<'_>, GrammarError> {
    assert!(max_depth >= 1, "depth cap must be at least 1");
    let has_rules = g.rules_for(&g.start).next().is_some();
    if has_rules && !g.productive().contains(g.start.as_str()) {
        return Err(GrammarError::DepthExceeded { max_depth });
    }
    Ok(ExhaustiveDerivations {
        g,
        memo: Memo { g, table: HashMap::new() },
        top_rules: g.rules_for(&g.start).collect(),
        next_rule: 0,
        current: None,
        depth: max_depth,
    })
}

/// Samples `n` derivations top-down, choosing uniformly among the rules of
/// each nonterminal. Derivations deeper than `max_depth` are rejected and
/// redrawn, up to [`SAMPLE_RETRIES`] times per sample.
pub fn derive_sample(
    g: &ScfgGrammar,
    n: usize,
    max_depth: usize,
    seed: u64,
) -> Result<Vec<Derivation>, GrammarError> {
    let mut rng = seeded(seed);
    let rules: HashMap<&str, Vec<usize>> = g
        .rules
        .iter()
        .map(|r| (r.head.as_str(), g.rules_for(&r.head).collect()))
        .collect();
    fn sample(
        g: &ScfgGrammar,
        rules: &HashMap<&str, Vec<usize>>,
        nt: &str,
        budget: usize,
        rng: &mut impl Rng,
    ) -> Option<Derivation> {
        if budget == 0 {
            return None;
        }
        let options = rules.get(nt)?;
        let rule = options[rng.gen_range(0..options.len())];
        let mut children = Vec::new();
        for child in g.rules[rule].children() {
            children.push(Rc::new(sample(g, rules, child, budget - 1, rng)?));
        }
        Some(Derivation { rule, children })
    }
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let d = (0..SAMPLE_RETRIES)
            .find_map(|_| sample(g, &rules, &g.start, max_depth, &mut rng))
            .ok_or(GrammarError::DepthExceeded { max_depth })?;
        out.push(d);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOY: &str = "\
ROOT -> src: <A:1> and <B:2> ;; tgt: ( pair <B:2> <A:1> )
A -> src: red ;; tgt: r
A -> src: blue ;; tgt: b
B -> src: one ;; tgt: n1
B -> src: two ;; tgt: n2
B -> src: three ;; tgt: n3
";

    const RECURSIVE: &str = "\
ROOT -> src: <E:1> ;; tgt: <E:1>
E -> src: x ;; tgt: x
E -> src: not <E:1> ;; tgt: ( not <E:1> )
E -> src: <E:1> and <E:2> ;; tgt: ( and <E:1> <E:2> )
";

    #[test]
    fn toy_product() {
        let g = ScfgGrammar::parse(TOY).unwrap();
        let pairs: Vec<DerivedPair> =
            derive_exhaustive(&g, 5).unwrap().pairs().collect::<Result<_, _>>().unwrap();
        assert_eq!(pairs.len(), 6);
        assert_eq!(count_derivations(&g, 5), 6);
        assert_eq!(pairs[0].utterance, vec!["red", "and", "one"]);
        assert_eq!(pairs[0].lf.to_string(), "( pair n1 r )");
        assert_eq!(pairs[1].utterance, vec!["red", "and", "two"]);
        assert_eq!(pairs[5].lf.to_string(), "( pair n3 b )");
        // depth cap 1 leaves only terminal-only rules, none at ROOT
        assert_eq!(derive_exhaustive(&g, 1).unwrap().count(), 0);
    }

    #[test]
    fn recursive_counts_match_enumeration() {
        let g = ScfgGrammar::parse(RECURSIVE).unwrap();
        for depth in 1..=5 {
            let n = derive_exhaustive(&g, depth).unwrap().count() as u128;
            assert_eq!(n, count_derivations(&g, depth), "depth {depth}");
        }
        // E(1)=1, E(2)=1+1+1=3, E(3)=1+3+9=13; ROOT(d)=E(d-1)
        assert_eq!(count_derivations(&g, 4), 13);
        for pair in derive_exhaustive(&g, 4).unwrap().pairs() {
            let pair = pair.unwrap();
            assert!(pair.utterance.iter().all(|t| !t.starts_with('<')));
        }
    }

    #[test]
    fn non_productive_start_exceeds_depth() {
        let g = ScfgGrammar::parse("ROOT -> src: <E:1> ;; tgt: <E:1>\nE -> src: <E:1> ;; tgt: ( f <E:1> )\n").unwrap();
        assert!(matches!(derive_exhaustive(&g, 4), Err(GrammarError::DepthExceeded { .. })));
        assert!(matches!(derive_sample(&g, 1, 4, 0), Err(GrammarError::DepthExceeded { .. })));
    }

    #[test]
    fn empty_start_counts_zero() {
        let g = ScfgGrammar::new(Vec::new());
        assert_eq!(count_derivations(&g, 4), 0);
        assert_eq!(derive_exhaustive(&g, 4).unwrap().count(), 0);
    }

    #[test]
    fn sampling_is_reproducible() {
        let g = ScfgGrammar::parse(RECURSIVE).unwrap();
        let a = derive_sample(&g, 50, 6, 7).unwrap();
        let b = derive_sample(&g, 50, 6, 7).unwrap();
        assert_eq!(a, b);
        for d in &a {
            assert!(d.depth() <= 6);
            let pair = d.to_pair(&g).unwrap();
            assert!(!pair.utterance.is_empty());
        }
    }

    #[test]
    fn sampled_rule_frequencies_are_uniform() {
        // Each B choice should be ~1/3 of 10k samples; 3 sigma band.
        let g = ScfgGrammar::parse(TOY).unwrap();
        let samples = derive_sample(&g, 10_000, 4, 11).unwrap();
        let mut counts = [0usize; 6];
        for d in &samples {
            for r in d.rules_used() {
                counts[r] += 1;
            }
        }
        let n = samples.len() as f64;
        for (rules, k) in [(&counts[1..3], 2.0), (&counts[3..6], 3.0)] {
            let p = 1.0 / k;
            let sigma = (n * p * (1.0 - p)).sqrt();
            for &c in rules {
                assert!((c as f64 - n * p).abs() < 3.0 * sigma, "{counts:?}");
            }
        }
    }

    /// Random grammar over nonterminals N0..N3 with up to two children per
    /// rule, so both recursion and dead ends occur.
    fn random_grammar(seed: u64) -> ScfgGrammar {
        let mut rng = seeded(seed);
        let mut text = String::from("ROOT -> src: <N0:1> ;; tgt: <N0:1>\n");
        for nt in 0..4 {
            for r in 0..rng.gen_range(1..=3) {
                let arity = rng.gen_range(0..=2);
                let kids: Vec<usize> = (0..arity).map(|_| rng.gen_range(0..4)).collect();
                let src: Vec<String> = kids.iter().enumerate().map(|(i, k)| format!("<N{k}:{i}>")).collect();
                let tgt: Vec<String> = kids.iter().enumerate().rev().map(|(i, k)| format!("<N{k}:{i}>")).collect();
                let body = if arity == 0 { format!("t{nt}_{r}") } else { format!("( f{nt}_{r} {} )", tgt.join(" ")) };
                text.push_str(&format!("N{nt} -> src: w{nt}_{r} {} ;; tgt: {body}\n", src.join(" ")));
            }
        }
        ScfgGrammar::parse(&text).unwrap()
    }

    #[test]
    fn random_grammars_count_matches_enumeration() {
        let mut checked = 0;
        for seed in 0.. {
            if checked == 20 {
                break;
            }
            let g = random_grammar(seed);
            let Ok(stream) = derive_exhaustive(&g, 5) else { continue };
            let pairs: Vec<DerivedPair> = stream.pairs().collect::<Result<_, _>>().unwrap();
            assert_eq!(pairs.len() as u128, count_derivations(&g, 5), "seed {seed}");
            for p in &pairs {
                assert!(p.utterance.iter().all(|t| t.starts_with('w')));
            }
            checked += 1;
        }
    }
}
