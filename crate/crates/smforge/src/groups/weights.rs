//! Weight functions and the Dehn bound, evaluated exactly.
//!
//! Values such as `f(n) = c1·h(n)·c0^{h(n)}` are far too large to expand even for tiny `n`, so
//! numbers are kept in the form `exact + Σ coef·c0^exp` where every `exp` is again such a number.
//! Small powers are folded into `exact`; everything stays exact and comparisons are decided
//! without approximation.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, ToPrimitive, Zero};

/// `exact + Σ coef·base^exp`, terms sorted and merged by exponent.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Num {
    exact: BigUint,
    terms: Vec<(Num, BigUint)>,
}

impl Num {
    pub fn zero() -> Num {
        Num { exact: BigUint::zero(), terms: Vec::new() }
    }

    pub fn exact(&self) -> Option<&BigUint> {
        self.terms.is_empty().then_some(&self.exact)
    }

    /// Nesting depth of exponents (0 for plain integers).
    pub fn height(&self) -> usize {
        self.terms.iter().map(|(e, _)| e.height() + 1).max().unwrap_or(0)
    }
}

impl From<u64> for Num {
    fn from(v: u64) -> Num {
        Num { exact: BigUint::from(v), terms: Vec::new() }
    }
}

impl From<BigUint> for Num {
    fn from(v: BigUint) -> Num {
        Num { exact: v, terms: Vec::new() }
    }
}

/// Arithmetic over a fixed base.
#[derive(Clone, Debug)]
pub struct Arith {
    pub base: u64,
    /// Powers with at most this many bits are expanded.
    pub fold_bits: u64,
}

impl Arith {
    pub fn new(base: u64) -> Arith {
        assert!(base >= 2, "base must be at least 2");
        Arith { base, fold_bits: 4096 }
    }

    fn log2_base_ceil(&self) -> u64 {
        64 - (self.base - 1).leading_zeros() as u64
    }

    fn norm(&self, mut exact: BigUint, terms: Vec<(Num, BigUint)>) -> Num {
        let lg = self.log2_base_ceil();
        let mut kept: Vec<(Num, BigUint)> = Vec::new();
        for (e, c) in terms {
            if c.is_zero() {
                continue;
            }
            if let Some(x) = e.exact().and_then(|x| x.to_u64()) {
                if x.saturating_mul(lg) <= self.fold_bits {
                    exact += c * BigUint::from(self.base).pow(x as u32);
                    continue;
                }
            }
            kept.push((e, c));
        }
        kept.sort_by(|a, b| a.0.cmp(&b.0));
        let mut merged: Vec<(Num, BigUint)> = Vec::new();
        for (e, c) in kept {
            match merged.last_mut() {
                Some((le, lc)) if *le == e => *lc += c,
                _ => merged.push((e, c)),
            }
        }
        Num { exact, terms: merged }
    }

    pub fn add(&self, a: &Num, b: &Num) -> Num {
        let mut terms = a.terms.clone();
        terms.extend(b.terms.iter().cloned());
        self.norm(&a.exact + &b.exact, terms)
    }

    pub fn mul(&self, a: &Num, b: &Num) -> Num {
        let mut terms = Vec::new();
        for (e, c) in &a.terms {
            terms.push((e.clone(), c * &b.exact));
        }
        for (e, c) in &b.terms {
            terms.push((e.clone(), c * &a.exact));
        }
        for (e1, c1) in &a.terms {
            for (e2, c2) in &b.terms {
                terms.push((self.add(e1, e2), c1 * c2));
            }
        }
        self.norm(&a.exact * &b.exact, terms)
    }

    pub fn scale(&self, k: u64, a: &Num) -> Num {
        self.mul(&Num::from(k), a)
    }

    pub fn powi(&self, a: &Num, k: u32) -> Num {
        let mut r = Num::from(1);
        for _ in 0..k {
            r = self.mul(&r, a);
        }
        r
    }

    /// `base^e`.
    pub fn pow(&self, e: &Num) -> Num {
        self.norm(BigUint::zero(), vec![(e.clone(), BigUint::one())])
    }

    /// Exact comparison; `None` only if two exponents differ by a small but non-constant amount,
    /// which none of the functions here produce.
    pub fn cmp(&self, a: &Num, b: &Num) -> Option<Ordering> {
        if a == b {
            return Some(Ordering::Equal);
        }
        // signed terms of a - b, exact parts as exponent 0
        let mut items: Vec<(Num, BigInt)> = Vec::new();
        for (e, c) in &a.terms {
            items.push((e.clone(), BigInt::from(c.clone())));
        }
        for (e, c) in &b.terms {
            items.push((e.clone(), -BigInt::from(c.clone())));
        }
        let mut order_err = false;
        items.sort_by(|x, y| {
            self.cmp(&y.0, &x.0).unwrap_or_else(|| {
                order_err = true;
                Ordering::Equal
            })
        });
        if order_err {
            return None;
        }
        items.push((Num::zero(), BigInt::from(a.exact.clone()) - BigInt::from(b.exact.clone())));

        let mut acc = BigInt::zero();
        let mut cur = Num::zero();
        for k in 0..items.len() {
            let (e, c) = &items[k];
            if acc.is_zero() {
                acc = c.clone();
                cur = e.clone();
                continue;
            }
            let rest: BigUint = items[k..].iter().map(|(_, c)| c.magnitude().clone()).sum();
            let bound = Num::from(rest.bits() + 1);
            match self.cmp(&cur, &self.add(e, &bound))? {
                Ordering::Greater | Ordering::Equal => return Some(sign_of(&acc)),
                Ordering::Less => {
                    let gap = small_gap(&cur, e)?;
                    acc = acc * BigInt::from(self.base).pow(gap) + c;
                    cur = e.clone();
                }
            }
        }
        Some(sign_of(&acc))
    }

    pub fn le(&self, a: &Num, b: &Num) -> bool {
        matches!(self.cmp(a, b), Some(Ordering::Less | Ordering::Equal))
    }

    pub fn fmt_num(&self, n: &Num) -> String {
        let mut parts = Vec::new();
        for (e, c) in n.terms.iter().rev() {
            let p = format!("{}^({})", self.base, self.fmt_num(e));
            parts.push(if c.is_one() { p } else { format!("{c}*{p}") });
        }
        if !n.exact.is_zero() || parts.is_empty() {
            parts.push(n.exact.to_string());
        }
        parts.join(" + ")
    }
}

fn sign_of(x: &BigInt) -> Ordering {
    match x.sign() {
        Sign::Minus => Ordering::Less,
        Sign::NoSign => Ordering::Equal,
        Sign::Plus => Ordering::Greater,
    }
}

/// `a - b` when both share their symbolic part and the difference fits in a `u32`.
fn small_gap(a: &Num, b: &Num) -> Option<u32> {
    if a.terms != b.terms || a.exact < b.exact {
        return None;
    }
    (&a.exact - &b.exact).to_u32()
}

/// `χ, h_𝓛, f_𝓛, g_𝓛` and the Dehn bound for given constants and recognizer time bound.
#[derive(Clone, Debug)]
pub struct WeightFunctions {
    pub c0: u64,
    pub c1: u64,
    pub l: u64,
    pub k: u64,
    /// Coefficients of the recognizer's time bound, constant term first.
    pub tm: Vec<u64>,
    pub arith: Arith,
}

impl WeightFunctions {
    pub fn new(c0: u64, c1: u64, l: u64, k: u64, tm: Vec<u64>) -> WeightFunctions {
        WeightFunctions { c0, c1, l, k, tm, arith: Arith::new(c0) }
    }

    fn n(&self, v: u64) -> Num {
        Num::from(v)
    }

    pub fn time(&self, n: &Num) -> Num {
        let a = &self.arith;
        let mut acc = Num::zero();
        for &c in self.tm.iter().rev() {
            acc = a.add(&a.mul(&acc, n), &self.n(c));
        }
        acc
    }

    /// `χ(n) = n·c0ⁿ`.
    pub fn chi(&self, n: &Num) -> Num {
        self.arith.mul(n, &self.arith.pow(n))
    }

    /// `h(n) = c0·TM(c0 n)³ + n·c0ⁿ + c0 n + L`.
    pub fn h(&self, n: &Num) -> Num {
        let a = &self.arith;
        let c0n = a.scale(self.c0, n);
        let t = self.time(&c0n);
        let mut r = a.scale(self.c0, &a.powi(&t, 3));
        r = a.add(&r, &self.chi(n));
        r = a.add(&r, &c0n);
        a.add(&r, &self.n(self.l))
    }

    /// `f(n) = c1·χ(h(n))`.
    pub fn f(&self, n: &Num) -> Num {
        self.arith.scale(self.c1, &self.chi(&self.h(n)))
    }

    /// `g(n) = c0 n³ + n·f(c0 n)`.
    pub fn g(&self, n: &Num) -> Num {
        let a = &self.arith;
        let cube = a.scale(self.c0, &a.powi(n, 3));
        a.add(&cube, &a.mul(n, &self.f(&a.scale(self.c0, n))))
    }

    /// `n·(K n¹² + g(K n⁹) + f(K n³))`.
    pub fn dehn(&self, n: &Num) -> Num {
        let a = &self.arith;
        let k = self.k;
        let t1 = a.scale(k, &a.powi(n, 12));
        let t2 = self.g(&a.scale(k, &a.powi(n, 9)));
        let t3 = self.f(&a.scale(k, &a.powi(n, 3)));
        a.mul(n, &a.add(&a.add(&t1, &t2), &t3))
    }

    pub fn chi_u(&self, n: u64) -> Num {
        self.chi(&self.n(n))
    }
    pub fn h_u(&self, n: u64) -> Num {
        self.h(&self.n(n))
    }
    pub fn f_u(&self, n: u64) -> Num {
        self.f(&self.n(n))
    }
    pub fn g_u(&self, n: u64) -> Num {
        self.g(&self.n(n))
    }
    pub fn dehn_u(&self, n: u64) -> Num {
        self.dehn(&self.n(n))
    }

    pub fn show(&self, n: &Num) -> String {
        self.arith.fmt_num(n)
    }

    /// The bound as a formula over the symbolic constants.
    pub fn formula() -> &'static str {
        "dehn(n) = n*(K*n^12 + g(K*n^9) + f(K*n^3))\n\
         g(n) = c0*n^3 + n*f(c0*n)\n\
         f(n) = c1*chi(h(n))\n\
         h(n) = c0*TM(c0*n)^3 + n*c0^n + c0*n + L\n\
         chi(n) = n*c0^n"
    }
}

impl fmt::Display for Num {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.exact() {
            Some(x) => write!(f, "{x}"),
            None => write!(f, "<height {} number>", self.height()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn desk() -> WeightFunctions {
        WeightFunctions::new(5, 7, 6, 9, vec![1, 1])
    }

    #[test]
    fn chi_of_two() {
        let w = desk();
        assert_eq!(w.chi_u(2).exact(), Some(&BigUint::from(2u64 * 25)));
    }

    #[test]
    fn small_values_are_exact() {
        let w = desk();
        // h(0) = c0·TM(0)³ + 0 + 0 + L
        assert_eq!(w.h_u(0).exact(), Some(&BigUint::from(5u64 + 6)));
        let h1 = 5u64 * 6u64.pow(3) + 5 + 5 + 6;
        assert_eq!(w.h_u(1).exact(), Some(&BigUint::from(h1)));
        assert_eq!(w.dehn_u(0), Num::zero());
    }

    #[test]
    fn comparisons() {
        let a = Arith::new(5);
        let big = a.pow(&Num::from(10_000));
        let bigger = a.add(&big, &Num::from(1));
        assert_eq!(a.cmp(&big, &bigger), Some(Ordering::Less));
        let twice = a.scale(2, &big);
        assert_eq!(a.cmp(&twice, &a.add(&big, &big)), Some(Ordering::Equal));
        // 5·5^e = 5^(e+1)
        let e = Num::from(20_000);
        let lhs = a.scale(5, &a.pow(&e));
        let rhs = a.pow(&a.add(&e, &Num::from(1)));
        assert_eq!(a.cmp(&lhs, &rhs), Some(Ordering::Equal));
        assert_eq!(a.cmp(&a.pow(&e), &Num::from(u64::MAX)), Some(Ordering::Greater));
    }

    #[test]
    fn functions_are_monotone() {
        let w = desk();
        let a = &w.arith;
        let fs: [fn(&WeightFunctions, u64) -> Num; 5] = [
            WeightFunctions::chi_u,
            WeightFunctions::h_u,
            WeightFunctions::f_u,
            WeightFunctions::g_u,
            WeightFunctions::dehn_u,
        ];
        for f in fs {
            let vals: Vec<Num> = (0..=12).map(|n| f(&w, n)).collect();
            for p in vals.windows(2) {
                assert!(a.le(&p[0], &p[1]));
            }
        }
    }

    #[test]
    fn g_super_additive() {
        let w = desk();
        let a = &w.arith;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..30 {
            let m = rng.gen_range(0..40u64);
            let n = rng.gen_range(0..40u64);
            assert!(a.le(&a.add(&w.g_u(m), &w.g_u(n)), &w.g_u(m + n)));
        }
    }

    proptest! {
        #[test]
        fn folded_arithmetic_matches_bigint(x in 0u64..2000, y in 0u64..2000, p in 0u64..300) {
            let a = Arith::new(3);
            let lhs = a.mul(&a.add(&Num::from(x), &a.pow(&Num::from(p))), &Num::from(y));
            let expect = (BigUint::from(x) + BigUint::from(3u64).pow(p as u32)) * BigUint::from(y);
            prop_assert_eq!(lhs.exact(), Some(&expect));
        }

        #[test]
        fn cmp_matches_bigint_on_symbolic_values(e1 in 1500u64..1700, e2 in 1500u64..1700, c1 in 1u64..50, c2 in 1u64..50, x in 0u64..1000) {
            // fold threshold lowered so these stay symbolic
            let a = Arith { base: 3, fold_bits: 64 };
            let u = a.add(&a.scale(c1, &a.pow(&Num::from(e1))), &Num::from(x));
            let v = a.scale(c2, &a.pow(&Num::from(e2)));
            let bu = BigUint::from(c1) * BigUint::from(3u64).pow(e1 as u32) + BigUint::from(x);
            let bv = BigUint::from(c2) * BigUint::from(3u64).pow(e2 as u32);
            prop_assert_eq!(a.cmp(&u, &v), Some(bu.cmp(&bv)));
        }
    }
}
