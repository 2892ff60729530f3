//! Free-group words over interned, typed alphabets.
//!
//! Symbols are small integers with a side table giving their name and kind.
//! Words are always kept freely reduced.

use std::collections::HashMap;
use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WordError {
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("symbol `{0}` is already defined")]
    DuplicateSymbol(String),
    #[error("invalid symbol name `{0}`")]
    BadName(String),
    #[error("basis element {0} is the empty word")]
    EmptyBasisElement(usize),
}

/// Interned symbol id.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Sym(pub u32);

/// A symbol with an exponent of +1 or -1.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Letter {
    pub sym: Sym,
    pub inv: bool,
}

impl Letter {
    pub fn pos(sym: Sym) -> Self {
        Letter { sym, inv: false }
    }
    pub fn neg(sym: Sym) -> Self {
        Letter { sym, inv: true }
    }
    pub fn inverse(self) -> Self {
        Letter { sym: self.sym, inv: !self.inv }
    }
    pub fn sign(self) -> i8 {
        if self.inv {
            -1
        } else {
            1
        }
    }
}

/// Classification of tape letters used when counting typed lengths.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TapeSub {
    /// Copies of letters of the input alphabet and its first copy.
    ALetter,
    /// Copies of the two noise letters.
    BLetter,
    Ordinary,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Kind {
    State { part: usize },
    Tape { sector: usize, sub: TapeSub },
    Theta { rule: usize, pos: usize },
    /// Letters that belong to no machine (basis indices, relator alphabets).
    Plain,
}

/// Name and kind tables for a set of symbols.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alphabet {
    names: Vec<String>,
    kinds: Vec<Kind>,
    #[serde(skip)]
    lookup: HashMap<String, Sym>,
}

fn valid_name(name: &str) -> bool {
    !name.is_empty()
        && name != "1"
        && !name.contains("^")
        && !name.chars().any(|c| c.is_whitespace() || c == ',' || c == '{' || c == '}' || c == '[' || c == ']' || c == '|' || c == ':' || c == '@')
}

impl Alphabet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn add(&mut self, name: &str, kind: Kind) -> Result<Sym, WordError> {
        if !valid_name(name) {
            return Err(WordError::BadName(name.to_string()));
        }
        if self.lookup.contains_key(name) {
            return Err(WordError::DuplicateSymbol(name.to_string()));
        }
        let s = Sym(self.names.len() as u32);
        self.names.push(name.to_string());
        self.kinds.push(kind);
        self.lookup.insert(name.to_string(), s);
        Ok(s)
    }

    /// Returns the symbol with this name, adding it if missing.
    pub fn intern(&mut self, name: &str, kind: Kind) -> Result<Sym, WordError> {
        match self.lookup.get(name) {
            Some(&s) => Ok(s),
            None => self.add(name, kind),
        }
    }

    pub fn get(&self, name: &str) -> Option<Sym> {
        self.lookup.get(name).copied()
    }

    pub fn name(&self, s: Sym) -> &str {
        &self.names[s.0 as usize]
    }

    pub fn kind(&self, s: Sym) -> Kind {
        self.kinds[s.0 as usize]
    }

    pub fn set_kind(&mut self, s: Sym, kind: Kind) {
        self.kinds[s.0 as usize] = kind;
    }

    pub fn symbols(&self) -> impl Iterator<Item = Sym> + '_ {
        (0..self.names.len() as u32).map(Sym)
    }

    /// Rebuilds the name index after deserialization.
    pub fn reindex(&mut self) {
        self.lookup = self
            .names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), Sym(i as u32)))
            .collect();
    }

    pub fn parse_letter(&self, tok: &str) -> Result<Letter, WordError> {
        let (name, inv) = match tok.strip_suffix("^-1") {
            Some(n) => (n, true),
            None => (tok, false),
        };
        let sym = self
            .get(name)
            .ok_or_else(|| WordError::UnknownSymbol(name.to_string()))?;
        Ok(Letter { sym, inv })
    }

    /// Parses `name` / `name^-1` tokens separated by whitespace; `1` is the empty word.
    pub fn parse_word(&self, text: &str) -> Result<Word, WordError> {
        let text = text.trim();
        if text.is_empty() || text == "1" {
            return Ok(Word::empty());
        }
        let mut letters = Vec::new();
        for tok in text.split_whitespace() {
            if tok == "1" {
                continue;
            }
            letters.push(self.parse_letter(tok)?);
        }
        Ok(Word::from_letters(letters))
    }

    pub fn format_letter(&self, l: Letter) -> String {
        if l.inv {
            format!("{}^-1", self.name(l.sym))
        } else {
            self.name(l.sym).to_string()
        }
    }

    pub fn format_word(&self, w: &Word) -> String {
        if w.is_empty() {
            return "1".to_string();
        }
        let parts: Vec<String> = w.letters().iter().map(|&l| self.format_letter(l)).collect();
        parts.join(" ")
    }

    /// Typed lengths of a word.
    pub fn lengths(&self, w: &Word) -> Lengths {
        let mut out = Lengths::default();
        for l in w.letters() {
            match self.kind(l.sym) {
                Kind::State { .. } => out.q += 1,
                Kind::Theta { .. } => out.theta += 1,
                Kind::Tape { sub, .. } => {
                    out.a += 1;
                    match sub {
                        TapeSub::ALetter => out.big_a += 1,
                        TapeSub::BLetter => out.b += 1,
                        TapeSub::Ordinary => out.o += 1,
                    }
                }
                Kind::Plain => out.other += 1,
            }
        }
        out
    }
}

/// Letter counts by type. `a = big_a + b + o` always holds.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Lengths {
    pub q: usize,
    pub a: usize,
    pub theta: usize,
    pub big_a: usize,
    pub b: usize,
    pub o: usize,
    pub other: usize,
}

impl Lengths {
    pub fn total(&self) -> usize {
        self.q + self.a + self.theta + self.other
    }
}

/// A freely reduced word.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Word(Vec<Letter>);

/// Freely reduces a raw letter sequence with a single stack pass.
pub fn free_reduce(raw: impl IntoIterator<Item = Letter>) -> Word {
    let mut out: Vec<Letter> = Vec::new();
    for l in raw {
        if out.last() == Some(&l.inverse()) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    Word(out)
}

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn letter(l: Letter) -> Self {
        Word(vec![l])
    }

    pub fn sym(s: Sym) -> Self {
        Word(vec![Letter::pos(s)])
    }

    pub fn from_letters(letters: impl IntoIterator<Item = Letter>) -> Self {
        free_reduce(letters)
    }

    /// Positive word spelling the given symbols.
    pub fn from_syms(syms: impl IntoIterator<Item = Sym>) -> Self {
        free_reduce(syms.into_iter().map(Letter::pos))
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn into_letters(self) -> Vec<Letter> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn first(&self) -> Option<Letter> {
        self.0.first().copied()
    }

    pub fn last(&self) -> Option<Letter> {
        self.0.last().copied()
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.inverse()).collect())
    }

    pub fn mul(&self, other: &Word) -> Word {
        let mut out = self.0.clone();
        for &l in &other.0 {
            if out.last() == Some(&l.inverse()) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Word(out)
    }

    /// Appends a letter, cancelling if needed.
    pub fn push(&mut self, l: Letter) {
        if self.0.last() == Some(&l.inverse()) {
            self.0.pop();
        } else {
            self.0.push(l);
        }
    }

    pub fn append(&mut self, other: &Word) {
        for &l in &other.0 {
            self.push(l);
        }
    }

    pub fn pow(&self, n: i64) -> Word {
        let base = if n < 0 { self.inverse() } else { self.clone() };
        let mut out = Word::empty();
        for _ in 0..n.unsigned_abs() {
            out.append(&base);
        }
        out
    }

    pub fn is_positive(&self) -> bool {
        self.0.iter().all(|l| !l.inv)
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        match (self.0.first(), self.0.last()) {
            (Some(&a), Some(&b)) => self.0.len() < 2 || a != b.inverse(),
            _ => true,
        }
    }

    /// Subword by letter range (already reduced as a factor of a reduced word).
    pub fn slice(&self, start: usize, end: usize) -> Word {
        Word(self.0[start..end].to_vec())
    }

    /// Cyclic permutation starting at letter `k`.
    pub fn rotate(&self, k: usize) -> Word {
        if self.0.is_empty() {
            return Word::empty();
        }
        let k = k % self.0.len();
        let mut v = self.0[k..].to_vec();
        v.extend_from_slice(&self.0[..k]);
        free_reduce(v)
    }

    pub fn count(&self, pred: impl Fn(Sym) -> bool) -> usize {
        self.0.iter().filter(|l| pred(l.sym)).count()
    }

    /// Applies a letter substitution `s -> image(s)`; inverse letters map to inverse images.
    pub fn substitute(&self, image: impl Fn(Sym) -> Word) -> Word {
        let mut out = Word::empty();
        for &l in &self.0 {
            let w = image(l.sym);
            if l.inv {
                out.append(&w.inverse());
            } else {
                out.append(&w);
            }
        }
        out
    }

    /// Keeps only letters satisfying `keep` and reduces.
    pub fn filter(&self, keep: impl Fn(Sym) -> bool) -> Word {
        free_reduce(self.0.iter().copied().filter(|l| keep(l.sym)))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "s{}", l.sym.0)?;
            if l.inv {
                write!(f, "^-1")?;
            }
        }
        Ok(())
    }
}

/// Splits `w` as `conjugator · core · conjugator⁻¹` with `core` cyclically reduced.
pub fn cyclic_reduce(w: &Word) -> (Word, Word) {
    let l = w.letters();
    let mut i = 0;
    let mut j = l.len();
    while j >= i + 2 && l[i] == l[j - 1].inverse() {
        i += 1;
        j -= 1;
    }
    (Word(l[i..j].to_vec()), Word(l[..i].to_vec()))
}

/// An element of a free subgroup written in terms of a basis: a reduced word
/// over basis indices (`Sym(i)` stands for the i-th basis element).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BasisExpression {
    pub terms: Word,
}

impl BasisExpression {
    /// The term list as `(index, sign)` pairs.
    pub fn terms(&self) -> Vec<(usize, i8)> {
        self.terms.letters().iter().map(|l| (l.sym.0 as usize, l.sign())).collect()
    }

    /// Number of terms, i.e. the theta-length of the expressed word.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn evaluate(&self, basis: &[Word]) -> Word {
        self.terms.substitute(|s| basis[s.0 as usize].clone())
    }
}

/// Folded core graph of a finitely generated subgroup, with each edge carrying
/// the basis expression read along it.
#[derive(Clone, Debug)]
pub struct FoldedGraph {
    adj: Vec<HashMap<Letter, (usize, Word)>>,
    alive: Vec<bool>,
    /// True when folding discovered a nontrivial relation among the basis words.
    pub relation_found: bool,
    ngens: usize,
}

const BASE: usize = 0;

impl FoldedGraph {
    pub fn build(basis: &[Word]) -> Result<FoldedGraph, WordError> {
        let mut g = Folder {
            adj: vec![HashMap::new()],
            alias: vec![None],
            relation_found: false,
            work: Vec::new(),
        };
        for (i, w) in basis.iter().enumerate() {
            if w.is_empty() {
                return Err(WordError::EmptyBasisElement(i));
            }
            let tag = Word::sym(Sym(i as u32));
            let n = w.len();
            let mut prev = BASE;
            for (k, &l) in w.letters().iter().enumerate() {
                let next = if k + 1 == n { BASE } else { g.new_vertex() };
                let t = if k == 0 { tag.clone() } else { Word::empty() };
                g.work.push((prev, l, next, t));
                prev = next;
            }
        }
        g.run();
        let alive = g.alias.iter().map(|a| a.is_none()).collect();
        Ok(FoldedGraph {
            adj: g.adj,
            alive,
            relation_found: g.relation_found,
            ngens: basis.len(),
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.alive.iter().filter(|&&a| a).count()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|m| m.len()).sum::<usize>() / 2
    }

    /// Rank of the subgroup: E - V + 1 of the folded graph.
    pub fn rank(&self) -> usize {
        (self.edge_count() + 1).saturating_sub(self.vertex_count())
    }

    /// True when the basis words freely generate their subgroup.
    pub fn is_free_basis(&self) -> bool {
        !self.relation_found && self.rank() == self.ngens
    }

    /// Reads `w` from the base vertex; returns the tag product if the path closes up.
    pub fn express(&self, w: &Word) -> Option<BasisExpression> {
        let mut v = BASE;
        let mut tags: Vec<Letter> = Vec::new();
        for &l in w.letters() {
            let (next, tag) = self.adj[v].get(&l)?;
            tags.extend_from_slice(tag.letters());
            v = *next;
        }
        if v != BASE {
            return None;
        }
        Some(BasisExpression { terms: free_reduce(tags) })
    }
}

struct Folder {
    adj: Vec<HashMap<Letter, (usize, Word)>>,
    /// `alias[v] = (r, c)`: vertex v was merged into r, reached from r by a virtual edge tagged c.
    alias: Vec<Option<(usize, Word)>>,
    relation_found: bool,
    work: Vec<(usize, Letter, usize, Word)>,
}

impl Folder {
    fn new_vertex(&mut self) -> usize {
        self.adj.push(HashMap::new());
        self.alias.push(None);
        self.adj.len() - 1
    }

    fn find(&self, mut v: usize) -> (usize, Word) {
        let mut chain: Vec<&Word> = Vec::new();
        while let Some((p, c)) = &self.alias[v] {
            chain.push(c);
            v = *p;
        }
        let mut t = Word::empty();
        for c in chain.into_iter().rev() {
            t.append(c);
        }
        (v, t)
    }

    fn run(&mut self) {
        while let Some((u, l, w, tag)) = self.work.pop() {
            let (u, cu) = self.find(u);
            let (w, cw) = self.find(w);
            let tag = cu.mul(&tag).mul(&cw.inverse());
            self.insert(u, l, w, tag);
        }
    }

    fn insert(&mut self, u: usize, l: Letter, w: usize, tag: Word) {
        if let Some((w2, t2)) = self.adj[u].get(&l).cloned() {
            self.fold(w2, t2, w, tag);
            return;
        }
        if let Some((u2, t3)) = self.adj[w].get(&l.inverse()).cloned() {
            self.fold(u2, t3, u, tag.inverse());
            return;
        }
        self.adj[u].insert(l, (w, tag.clone()));
        self.adj[w].insert(l.inverse(), (u, tag.inverse()));
    }

    /// Two edges leave a common vertex with the same label, ending at `a` (tag ta) and `b` (tag tb).
    fn fold(&mut self, a: usize, ta: Word, b: usize, tb: Word) {
        let c = ta.inverse().mul(&tb);
        if a == b {
            if !c.is_empty() {
                self.relation_found = true;
            }
            return;
        }
        // b is reached from a by c; merge b into a unless b is the base.
        let (keep, gone, c) = if b == BASE { (b, a, c.inverse()) } else { (a, b, c) };
        self.alias[gone] = Some((keep, c));
        let edges: Vec<(Letter, (usize, Word))> = self.adj[gone].drain().collect();
        for (l, (x, k)) in edges {
            if x != gone {
                self.adj[x].remove(&l.inverse());
            }
            self.work.push((gone, l, x, k));
        }
    }
}

/// A list of basis words with a lazily built folded graph.
#[derive(Clone, Debug, Default)]
pub struct Basis {
    words: Vec<Word>,
    graph: OnceLock<Result<FoldedGraph, WordError>>,
}

impl PartialEq for Basis {
    fn eq(&self, other: &Self) -> bool {
        self.words == other.words
    }
}
impl Eq for Basis {}

impl Basis {
    pub fn new(words: Vec<Word>) -> Self {
        Basis { words, graph: OnceLock::new() }
    }

    pub fn letters(syms: impl IntoIterator<Item = Sym>) -> Self {
        Basis::new(syms.into_iter().map(Word::sym).collect())
    }

    pub fn words(&self) -> &[Word] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn graph(&self) -> Result<&FoldedGraph, WordError> {
        self.graph
            .get_or_init(|| FoldedGraph::build(&self.words))
            .as_ref()
            .map_err(|e| e.clone())
    }

    pub fn express(&self, w: &Word) -> Result<Option<BasisExpression>, WordError> {
        if w.is_empty() {
            return Ok(Some(BasisExpression { terms: Word::empty() }));
        }
        Ok(self.graph()?.express(w))
    }

    pub fn contains(&self, w: &Word) -> bool {
        matches!(self.express(w), Ok(Some(_)))
    }

    pub fn is_free(&self) -> bool {
        self.graph().map(|g| g.is_free_basis()).unwrap_or(false)
    }

    /// True when every basis word is a single positive letter.
    pub fn is_letter_basis(&self) -> bool {
        self.words.iter().all(|w| w.len() == 1 && w.is_positive())
    }
}

/// Expresses `w` in terms of `basis` if `w` lies in the subgroup it generates.
pub fn express_in_basis(w: &Word, basis: &[Word]) -> Result<Option<BasisExpression>, WordError> {
    if w.is_empty() {
        if let Some(i) = basis.iter().position(|b| b.is_empty()) {
            return Err(WordError::EmptyBasisElement(i));
        }
        return Ok(Some(BasisExpression { terms: Word::empty() }));
    }
    Ok(FoldedGraph::build(basis)?.express(w))
}

/// True iff the words freely generate the subgroup they span.
pub fn validate_basis(words: &[Word]) -> bool {
    match FoldedGraph::build(words) {
        Ok(g) => g.is_free_basis(),
        Err(_) => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ab() -> (Alphabet, Sym, Sym) {
        let mut al = Alphabet::new();
        let a = al.add("a", Kind::Plain).unwrap();
        let b = al.add("b", Kind::Plain).unwrap();
        (al, a, b)
    }

    fn l(s: u32, inv: bool) -> Letter {
        Letter { sym: Sym(s), inv }
    }

    /// Reduction by repeated scanning for adjacent inverse pairs.
    fn naive_reduce(mut v: Vec<Letter>) -> Vec<Letter> {
        loop {
            let pos = v.windows(2).position(|p| p[0] == p[1].inverse());
            match pos {
                Some(i) => {
                    v.drain(i..i + 2);
                }
                None => return v,
            }
        }
    }

    fn arb_letters(nsym: u32, max: usize) -> impl Strategy<Value = Vec<Letter>> {
        prop::collection::vec((0..nsym, any::<bool>()).prop_map(|(s, i)| l(s, i)), 0..max)
    }

    #[test]
    fn cancellation_examples() {
        let (al, _, _) = ab();
        assert!(al.parse_word("a a^-1").unwrap().is_empty());
        assert_eq!(al.format_word(&al.parse_word("a b b^-1 a").unwrap()), "a a");
    }

    #[test]
    fn cyclic_reduce_examples() {
        let (al, _, _) = ab();
        let (core, conj) = cyclic_reduce(&al.parse_word("a b a^-1").unwrap());
        assert_eq!(al.format_word(&core), "b");
        assert_eq!(al.format_word(&conj), "a");
        let (core, conj) = cyclic_reduce(&al.parse_word("b a").unwrap());
        assert_eq!(al.format_word(&core), "b a");
        assert!(conj.is_empty());
    }

    #[test]
    fn text_round_trip() {
        let (al, _, _) = ab();
        for s in ["1", "a", "a^-1 b", "b b b^-1"] {
            let w = al.parse_word(s).unwrap();
            let t = al.format_word(&w);
            assert_eq!(al.parse_word(&t).unwrap(), w);
        }
        assert_eq!(al.format_word(&Word::empty()), "1");
        assert!(al.parse_word("z").is_err());
    }

    #[test]
    fn express_examples() {
        let (al, _, _) = ab();
        let p = |s: &str| al.parse_word(s).unwrap();
        let basis = vec![p("a a"), p("b")];
        let e = express_in_basis(&p("a a b"), &basis).unwrap().unwrap();
        assert_eq!(e.terms(), vec![(0, 1), (1, 1)]);
        assert!(express_in_basis(&p("a"), &basis).unwrap().is_none());
        assert_eq!(
            express_in_basis(&p("a"), &[p("a"), Word::empty()]),
            Err(WordError::EmptyBasisElement(1))
        );
    }

    #[test]
    fn validate_examples() {
        let (al, _, _) = ab();
        let p = |s: &str| al.parse_word(s).unwrap();
        assert!(validate_basis(&[p("a"), p("b")]));
        assert!(!validate_basis(&[p("a"), p("a^-1")]));
        assert!(!validate_basis(&[p("a"), p("b"), p("a b")]));
        assert!(validate_basis(&[p("a b a^-1"), p("a a")]));
        assert!(!validate_basis(&[p("a a"), p("a a a")]));
        assert!(validate_basis(&[p("a b"), p("b a")]));
    }

    #[test]
    fn typed_lengths_partition() {
        let mut al = Alphabet::new();
        let q = al.add("q", Kind::State { part: 0 }).unwrap();
        let x = al.add("x", Kind::Tape { sector: 1, sub: TapeSub::ALetter }).unwrap();
        let b = al.add("b", Kind::Tape { sector: 1, sub: TapeSub::BLetter }).unwrap();
        let o = al.add("o", Kind::Tape { sector: 1, sub: TapeSub::Ordinary }).unwrap();
        let w = Word::from_syms([q, x, b, o, o]);
        let n = al.lengths(&w);
        assert_eq!((n.q, n.a, n.big_a, n.b, n.o), (1, 4, 1, 1, 2));
        assert_eq!(n.total(), w.len());
    }

    proptest! {
        #[test]
        fn reduce_matches_naive(v in arb_letters(3, 30)) {
            prop_assert_eq!(free_reduce(v.clone()).into_letters(), naive_reduce(v));
        }

        #[test]
        fn reduce_idempotent_and_shrinking(v in arb_letters(3, 30)) {
            let w = free_reduce(v.clone());
            prop_assert!(w.len() <= v.len());
            prop_assert_eq!(free_reduce(w.letters().to_vec()), w.clone());
            prop_assert!(w.mul(&w.inverse()).is_empty());
        }

        #[test]
        fn cyclic_reduce_conjugates_back(core in arb_letters(3, 12), conj in arb_letters(3, 6)) {
            let core = free_reduce(core);
            let conj = free_reduce(conj);
            let (c, _) = cyclic_reduce(&core);
            let w = conj.mul(&c).mul(&conj.inverse());
            let (c2, t) = cyclic_reduce(&w);
            prop_assert!(c2.is_cyclically_reduced());
            prop_assert_eq!(t.mul(&c2).mul(&t.inverse()), w);
            prop_assert_eq!(c2.len(), c.len());
        }

        #[test]
        fn express_round_trips_on_free_basis(terms in arb_letters(3, 10)) {
            let (al, _, _) = ab();
            let p = |s: &str| al.parse_word(s).unwrap();
            let basis = vec![p("a a b"), p("b a^-1 b"), p("a b a")];
            prop_assume!(validate_basis(&basis));
            let expr = BasisExpression { terms: free_reduce(terms) };
            let w = expr.evaluate(&basis);
            let back = express_in_basis(&w, &basis).unwrap().unwrap();
            prop_assert_eq!(back, expr);
        }
    }
}
