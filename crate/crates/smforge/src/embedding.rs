//! Embedding a recursively presented group into the group of the main machine: the positive
//! presentation of the group, its `C`-expansion and the word problem of the expanded group.
//!
//! Words are "index words": `Sym(i)` stands for the `i`-th letter of whichever alphabet is in play
//! (`X`, `Y = X ⊔ X̄`, or `Y_C`, which is also the input alphabet of the machine).

use std::collections::HashMap;
use std::path::Path;
use std::process::Command;
use std::sync::{Arc, Mutex};

use serde::Deserialize;
use thiserror::Error;

use crate::words::{cyclic_reduce, free_reduce, Letter, Sym, Word};

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("config: {0}")]
    Config(String),
    #[error("C must be at least 1")]
    BadC,
    #[error("no generators")]
    NoGenerators,
    #[error("word: {0}")]
    Word(String),
}

/// Decides the word problem of a group given by generators `X`.
pub trait WordProblem: Send + Sync {
    fn generators(&self) -> &[String];
    /// Whether an index word over `X^{±1}` is trivial in the group.
    fn is_trivial(&self, w: &Word) -> bool;
}

fn exponent_sums(w: &Word, n: usize) -> Vec<i64> {
    let mut s = vec![0i64; n];
    for l in w.letters() {
        s[l.sym.0 as usize] += if l.inv { -1 } else { 1 };
    }
    s
}

/// The infinite cyclic group on one generator.
#[derive(Clone, Debug)]
pub struct BuiltinZ {
    gens: Vec<String>,
}

impl BuiltinZ {
    pub fn new(name: &str) -> Self {
        BuiltinZ { gens: vec![name.to_string()] }
    }
}

impl WordProblem for BuiltinZ {
    fn generators(&self) -> &[String] {
        &self.gens
    }

    fn is_trivial(&self, w: &Word) -> bool {
        exponent_sums(w, 1)[0] == 0
    }
}

/// The cyclic group of order two on one generator.
#[derive(Clone, Debug)]
pub struct BuiltinZ2 {
    gens: Vec<String>,
}

impl BuiltinZ2 {
    pub fn new(name: &str) -> Self {
        BuiltinZ2 { gens: vec![name.to_string()] }
    }
}

impl WordProblem for BuiltinZ2 {
    fn generators(&self) -> &[String] {
        &self.gens
    }

    fn is_trivial(&self, w: &Word) -> bool {
        exponent_sums(w, 1)[0] % 2 == 0
    }
}

/// External decider: the word is passed as one argument (`x y^-1 …`, or `1`) and exit code 0
/// means trivial.
#[derive(Clone, Debug)]
pub struct CommandOracle {
    gens: Vec<String>,
    cmd: String,
}

impl CommandOracle {
    pub fn new(gens: Vec<String>, cmd: &str) -> Self {
        CommandOracle { gens, cmd: cmd.to_string() }
    }
}

impl WordProblem for CommandOracle {
    fn generators(&self) -> &[String] {
        &self.gens
    }

    fn is_trivial(&self, w: &Word) -> bool {
        let text = format_index_word(w, &self.gens);
        Command::new("sh")
            .arg("-c")
            .arg(format!("{} \"$1\"", self.cmd))
            .arg("sh")
            .arg(text)
            .status()
            .is_ok_and(|s| s.success())
    }
}

pub fn format_index_word(w: &Word, names: &[String]) -> String {
    if w.is_empty() {
        return "1".into();
    }
    w.letters()
        .iter()
        .map(|l| {
            let n = &names[l.sym.0 as usize];
            if l.inv {
                format!("{n}^-1")
            } else {
                n.clone()
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn parse_index_word(text: &str, names: &[String]) -> Result<Word, EmbeddingError> {
    let text = text.trim();
    if text == "1" || text.is_empty() {
        return Ok(Word::empty());
    }
    let mut out = Vec::new();
    for tok in text.split_whitespace() {
        let (name, inv) = match tok.strip_suffix("^-1") {
            Some(n) => (n, true),
            None => (tok, false),
        };
        let i = names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| EmbeddingError::Word(format!("unknown letter `{name}`")))?;
        out.push(Letter { sym: Sym(i as u32), inv });
    }
    Ok(Word::from_letters(out))
}

/// `Y = X ⊔ X̄` with `ξ(x) = x`, `ξ(x̄) = x⁻¹`; `𝒮` is the set of nonempty positive `Y`-words
/// whose `ξ`-image is trivial.
#[derive(Clone, Debug)]
pub struct StandardTrick {
    pub x: Vec<String>,
    pub y: Vec<String>,
}

pub fn standard_trick(x: &[String]) -> StandardTrick {
    let mut y = x.to_vec();
    y.extend(x.iter().map(|n| format!("{n}bar")));
    StandardTrick { x: x.to_vec(), y }
}

impl StandardTrick {
    /// `ξ̃` on an index word over `Y`.
    pub fn xi(&self, w: &Word) -> Word {
        let n = self.x.len() as u32;
        Word::from_letters(w.letters().iter().map(|l| {
            if l.sym.0 < n {
                *l
            } else {
                Letter { sym: Sym(l.sym.0 - n), inv: !l.inv }
            }
        }))
    }

    pub fn in_s(&self, w: &Word, wp: &dyn WordProblem) -> bool {
        !w.is_empty() && w.is_positive() && wp.is_trivial(&self.xi(w))
    }

    /// `x·τ⁻¹(x)` for each generator.
    pub fn s2(&self) -> Vec<Word> {
        let n = self.x.len() as u32;
        (0..n).map(|i| Word::from_syms([Sym(i), Sym(i + n)])).collect()
    }
}

/// `Y_C`: each `y_i` becomes a block `A_i = a_{1,i} … a_{C,i}` of fresh letters.
#[derive(Clone, Debug)]
pub struct Expansion {
    pub c: usize,
    pub m: usize,
    pub names: Vec<String>,
}

pub fn expand_c(y: &[String], c: usize) -> Result<Expansion, EmbeddingError> {
    if c == 0 {
        return Err(EmbeddingError::BadC);
    }
    let names = y.iter().flat_map(|n| (1..=c).map(move |j| format!("{n}.{j}"))).collect();
    Ok(Expansion { c, m: y.len(), names })
}

impl Expansion {
    pub fn letter(&self, j: usize, i: usize) -> Sym {
        Sym((i * self.c + j) as u32)
    }

    pub fn block(&self, i: usize) -> Word {
        Word::from_syms((0..self.c).map(|j| self.letter(j, i)))
    }

    /// `φ`: `y_i ↦ A_i`.
    pub fn phi(&self, w: &Word) -> Word {
        w.substitute(|s| self.block(s.0 as usize))
    }

    /// Reads a maximal run of whole blocks `A_i^{±1}` from the start of `w`.
    pub fn block_prefix(&self, w: &[Letter]) -> Vec<Letter> {
        let c = self.c;
        let mut out = Vec::new();
        let mut k = 0;
        while k + c <= w.len() {
            let first = w[k];
            let i = first.sym.0 as usize / c;
            let j = first.sym.0 as usize % c;
            let ok = if !first.inv && j == 0 {
                (0..c).all(|t| w[k + t] == Letter::pos(self.letter(t, i)))
            } else if first.inv && j == c - 1 {
                (0..c).all(|t| w[k + t] == Letter::neg(self.letter(c - 1 - t, i)))
            } else {
                false
            };
            if !ok {
                break;
            }
            out.push(Letter { sym: Sym(i as u32), inv: first.inv });
            k += c;
        }
        out
    }

    /// Inverse of `φ` on words that are exactly products of blocks.
    pub fn parse_blocks(&self, w: &Word) -> Option<Word> {
        let b = self.block_prefix(w.letters());
        (b.len() * self.c == w.len()).then(|| Word::from_letters(b))
    }
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum OracleSpec {
    Builtin(String),
    Command { command: String },
}

#[derive(Debug, Deserialize)]
struct ConfigFile {
    generators: Vec<String>,
    #[serde(rename = "C")]
    c: usize,
    oracle: OracleSpec,
}

/// The whole embedding: the oracle for `R`, the positive presentation and its expansion.
pub struct Pipeline {
    pub oracle: Arc<dyn WordProblem>,
    pub trick: StandardTrick,
    pub expansion: Expansion,
    memo: Mutex<HashMap<Word, bool>>,
}

impl std::fmt::Debug for Pipeline {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Pipeline").field("trick", &self.trick).field("C", &self.expansion.c).finish()
    }
}

impl Pipeline {
    pub fn new(oracle: Arc<dyn WordProblem>, c: usize) -> Result<Pipeline, EmbeddingError> {
        if oracle.generators().is_empty() {
            return Err(EmbeddingError::NoGenerators);
        }
        let trick = standard_trick(oracle.generators());
        let expansion = expand_c(&trick.y, c)?;
        Ok(Pipeline { oracle, trick, expansion, memo: Mutex::new(HashMap::new()) })
    }

    /// Reads a TOML config with `generators`, `C` and `oracle` (`"Z"`, `"Z2"` or
    /// `{ command = "…" }`).
    pub fn from_toml(text: &str) -> Result<Pipeline, EmbeddingError> {
        let cfg: ConfigFile = toml::from_str(text).map_err(|e| EmbeddingError::Config(e.to_string()))?;
        let oracle: Arc<dyn WordProblem> = match cfg.oracle {
            OracleSpec::Builtin(b) => {
                let [g] = &cfg.generators[..] else {
                    return Err(EmbeddingError::Config(format!("builtin `{b}` needs exactly one generator")));
                };
                match b.as_str() {
                    "Z" => Arc::new(BuiltinZ::new(g)),
                    "Z2" => Arc::new(BuiltinZ2::new(g)),
                    _ => return Err(EmbeddingError::Config(format!("unknown builtin oracle `{b}`"))),
                }
            }
            OracleSpec::Command { command } => Arc::new(CommandOracle::new(cfg.generators.clone(), &command)),
        };
        Pipeline::new(oracle, cfg.c)
    }

    pub fn from_file(path: &Path) -> Result<Pipeline, EmbeddingError> {
        let text = std::fs::read_to_string(path).map_err(|e| EmbeddingError::Config(e.to_string()))?;
        Pipeline::from_toml(&text)
    }

    /// Names of `Y_C`, which double as the input letters of the machine.
    pub fn letters(&self) -> &[String] {
        &self.expansion.names
    }

    pub fn in_s_c(&self, w: &Word) -> bool {
        w.is_positive()
            && self.expansion.parse_blocks(w).is_some_and(|u| self.trick.in_s(&u, self.oracle.as_ref()))
    }

    /// Triviality of an index word over `Y_C` in `R_C`.
    pub fn wp_rc(&self, w: &Word) -> bool {
        let w = cyclic_reduce(&free_reduce(w.letters().iter().copied())).0;
        if w.is_empty() {
            return true;
        }
        if let Some(&v) = self.memo.lock().expect("memo lock").get(&w) {
            return v;
        }
        let res = self.wp_step(&w);
        self.memo.lock().expect("memo lock").insert(w, res);
        res
    }

    /// Deletes the longest subword (over all cyclic permutations) that is itself a cyclic
    /// permutation of a block word trivial in `R`, then recurses.
    fn wp_step(&self, w: &Word) -> bool {
        let c = self.expansion.c;
        for r in 0..w.len() {
            let v = w.rotate(r);
            for len in (1..=v.len() / c).rev().map(|k| k * c) {
                let u = v.slice(0, len);
                let hit = (0..c).any(|k| {
                    self.expansion
                        .parse_blocks(&u.rotate(k))
                        .is_some_and(|d| self.oracle.is_trivial(&self.trick.xi(&d)))
                });
                if hit {
                    return self.wp_rc(&v.slice(len, v.len()));
                }
            }
        }
        false
    }

    /// Membership in `Λ`: nontrivial, cyclically reduced, trivial in `R_C`.
    pub fn lambda_oracle(&self, w: &Word) -> bool {
        !w.is_empty() && w.is_cyclically_reduced() && self.wp_rc(w)
    }

    /// The language `𝓛 = ζ̃(𝒮_C)` as index words.
    pub fn language_member(&self, w: &[usize]) -> bool {
        self.in_s_c(&Word::from_syms(w.iter().map(|&i| Sym(i as u32))))
    }

    /// `x ↦ ζ̃(φ(x))` for each generator of `R`.
    pub fn generator_images(&self) -> Vec<(String, Word)> {
        self.trick
            .x
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), self.expansion.block(i)))
            .collect()
    }

    /// `ψ` on an index word over `X`.
    pub fn psi(&self, w: &Word) -> Word {
        free_reduce(w.substitute(|s| self.expansion.block(s.0 as usize)).letters().iter().copied())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn z(c: usize) -> Pipeline {
        Pipeline::new(Arc::new(BuiltinZ::new("x")), c).unwrap()
    }

    /// Independent decider: `R_C = R * F(rest)` after trading `a_{1,i}` for `A_i`; trivial iff the
    /// free-product normal form is empty.
    fn free_product_oracle(p: &Pipeline, w: &Word) -> bool {
        let c = p.expansion.c;
        // Syllables: Ok(letter) for R-letters (over Y), Err(letter) for free letters.
        let mut seq: Vec<Result<Letter, Letter>> = Vec::new();
        for l in w.letters() {
            let i = l.sym.0 as usize / c;
            let j = l.sym.0 as usize % c;
            let mut piece: Vec<Result<Letter, Letter>> = Vec::new();
            if j == 0 {
                piece.push(Ok(Letter::pos(Sym(i as u32))));
                for t in (1..c).rev() {
                    piece.push(Err(Letter::neg(p.expansion.letter(t, i))));
                }
            } else {
                piece.push(Err(Letter::pos(l.sym)));
            }
            if l.inv {
                piece.reverse();
                for x in piece.iter_mut() {
                    *x = match *x {
                        Ok(y) => Ok(y.inverse()),
                        Err(y) => Err(y.inverse()),
                    };
                }
            }
            seq.extend(piece);
        }
        // Stack of syllables: R-syllables as Y-words, free syllables as reduced words.
        let mut stack: Vec<(bool, Vec<Letter>)> = Vec::new();
        for x in seq {
            let (is_r, l) = match x {
                Ok(l) => (true, l),
                Err(l) => (false, l),
            };
            match stack.last_mut() {
                Some((r, s)) if *r == is_r => s.push(l),
                _ => stack.push((is_r, vec![l])),
            }
            while let Some((r, s)) = stack.last() {
                let trivial = if *r {
                    p.oracle.is_trivial(&p.trick.xi(&Word::from_letters(s.iter().copied())))
                } else {
                    free_reduce(s.iter().copied()).is_empty()
                };
                if !trivial {
                    break;
                }
                stack.pop();
                if stack.len() >= 2 && stack[stack.len() - 1].0 == stack[stack.len() - 2].0 {
                    let (_, top) = stack.pop().unwrap();
                    stack.last_mut().unwrap().1.extend(top);
                } else {
                    break;
                }
            }
        }
        stack.is_empty()
    }

    #[test]
    fn standard_trick_examples() {
        let p = z(2);
        let t = &p.trick;
        assert_eq!(t.y, vec!["x", "xbar"]);
        let s2 = &t.s2()[0];
        assert!(t.in_s(s2, p.oracle.as_ref()));
        assert_eq!(t.xi(s2), Word::from_letters([Letter::pos(Sym(0)), Letter::neg(Sym(0))]));
        assert!(!t.in_s(&Word::empty(), p.oracle.as_ref()));
        let xxbxxb = Word::from_syms([Sym(0), Sym(1), Sym(0), Sym(1)]);
        assert!(t.in_s(&xxbxxb, p.oracle.as_ref()));
        assert!(!t.in_s(&Word::from_syms([Sym(0), Sym(0)]), p.oracle.as_ref()));
    }

    #[test]
    fn expansion_examples() {
        let y: Vec<String> = ["y1", "y2", "y3"].map(String::from).to_vec();
        let e = expand_c(&y, 3).unwrap();
        let r = Word::from_syms([Sym(0), Sym(2)]);
        let names: Vec<&str> = e.phi(&r).letters().iter().map(|l| e.names[l.sym.0 as usize].as_str()).collect();
        assert_eq!(names, ["y1.1", "y1.2", "y1.3", "y3.1", "y3.2", "y3.3"]);
        assert!(e.parse_blocks(&e.phi(&r)).is_some());
        assert!(e.parse_blocks(&e.phi(&r).slice(1, 6)).is_none());
        assert!(expand_c(&y, 0).is_err());
        let p = z(3);
        let shifted = p.expansion.phi(&p.trick.s2()[0]).rotate(1);
        assert!(!p.in_s_c(&shifted));
        assert!(p.in_s_c(&p.expansion.phi(&p.trick.s2()[0])));
    }

    #[test]
    fn wp_examples() {
        let p = z(3);
        let e = &p.expansion;
        let w = e.phi(&Word::from_syms([Sym(0), Sym(1)]));
        assert!(p.wp_rc(&w));
        assert!(!p.wp_rc(&e.block(0)));
        assert!(p.wp_rc(&Word::empty()));
    }

    #[test]
    fn lambda_examples() {
        let p = z(3);
        let r = p.expansion.phi(&Word::from_syms([Sym(1), Sym(0), Sym(0), Sym(1)]));
        assert!(p.lambda_oracle(&r));
        for k in 0..r.len() {
            assert!(p.lambda_oracle(&r.rotate(k)));
        }
        assert!(p.lambda_oracle(&r.inverse()));
        assert!(!p.lambda_oracle(&r.slice(0, 2)));
        let imgs = p.generator_images();
        assert_eq!(imgs.len(), 1);
        assert_eq!(imgs[0].1.len(), 3);
    }

    #[test]
    fn config_parsing() {
        let p = Pipeline::from_toml("generators = [\"x\"]\nC = 4\noracle = \"Z2\"\n").unwrap();
        assert_eq!(p.expansion.c, 4);
        assert!(p.oracle.is_trivial(&Word::from_syms([Sym(0), Sym(0)])));
        let p = Pipeline::from_toml("generators = [\"x\", \"y\"]\nC = 2\noracle = { command = \"true\" }\n").unwrap();
        assert_eq!(p.letters().len(), 8);
        assert!(Pipeline::from_toml("generators = [\"x\", \"y\"]\nC = 2\noracle = \"Z\"\n").is_err());
        assert!(Pipeline::from_toml("generators = [\"x\"]\nC = 2\noracle = \"Q\"\n").is_err());
    }

    fn random_word(rng: &mut impl Rng, n_letters: usize, len: usize) -> Word {
        free_reduce((0..len).map(|_| Letter { sym: Sym(rng.gen_range(0..n_letters) as u32), inv: rng.gen() }))
    }

    #[test]
    fn wp_matches_free_product_oracle() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for (p, c) in [(z(2), 2), (z(3), 3), (Pipeline::new(Arc::new(BuiltinZ2::new("x")), 2).unwrap(), 2)] {
            let n = p.letters().len();
            let s_words: Vec<Word> = vec![
                Word::from_syms([Sym(0), Sym(1)]),
                Word::from_syms([Sym(1), Sym(0)]),
                Word::from_syms([Sym(0), Sym(0), Sym(1), Sym(1)]),
                Word::from_syms([Sym(0), Sym(1), Sym(1), Sym(0)]),
            ];
            for _ in 0..50 {
                let mut w = Word::empty();
                for _ in 0..rng.gen_range(1..=3) {
                    let r = p.expansion.phi(&s_words[rng.gen_range(0..s_words.len())]);
                    let r = if rng.gen() { r.inverse() } else { r };
                    let g = { let len = rng.gen_range(0..4); random_word(&mut rng, n, len) };
                    w = w.mul(&g.mul(&r).mul(&g.inverse()));
                }
                assert!(p.wp_rc(&w), "{w:?}");
                assert!(free_product_oracle(&p, &w));
            }
            for _ in 0..50 {
                let w = { let len = rng.gen_range(1..c); random_word(&mut rng, n, len) };
                assert!(!w.is_empty() || p.wp_rc(&w));
                if !w.is_empty() {
                    assert!(!p.wp_rc(&w));
                }
            }
            for _ in 0..300 {
                let w = { let len = rng.gen_range(0..=3 * c); random_word(&mut rng, n, len) };
                assert_eq!(p.wp_rc(&w), free_product_oracle(&p, &w), "{w:?}");
            }
        }
    }

    #[test]
    fn psi_is_injective_on_short_words() {
        let p = z(2);
        // all reduced words over {x} of length at most 3
        for len in 0..=3i64 {
            for sign in [1i64, -1] {
                let w = Word::sym(Sym(0)).pow(sign * len);
                let img = p.psi(&w);
                assert_eq!(img.is_empty() || p.wp_rc(&img), p.oracle.is_trivial(&w));
            }
        }
    }

    proptest! {
        #[test]
        fn phi_scales_lengths(letters in prop::collection::vec((0u32..2, any::<bool>()), 0..12)) {
            let p = z(3);
            let w = free_reduce(letters.into_iter().map(|(s, inv)| Letter { sym: Sym(s), inv }));
            prop_assert_eq!(p.expansion.phi(&w).len(), 3 * w.len());
            let a = p.psi(&w);
            let b = p.psi(&w.inverse());
            prop_assert!(a.mul(&b).is_empty());
        }
    }
}
