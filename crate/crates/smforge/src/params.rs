//! The parameter chain `N << C << c0 << L << c1 << δ⁻¹ << K`.
//!
//! The `desk` profile holds small concrete values and enforces the strict ordering. The `paper`
//! profile only records the lower bounds the arguments rely on; it cannot be instantiated.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::groups::weights::WeightFunctions;

/// Parameter names in chain order.
pub const CHAIN: [&str; 7] = ["N", "C", "c0", "L", "c1", "delta_inv", "K"];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParamsError {
    #[error("parameter chain violated: {lo} = {lo_val} must be < {hi} = {hi_val}")]
    Chain { lo: &'static str, lo_val: u64, hi: &'static str, hi_val: u64 },
    #[error("the `paper` profile is symbolic and has no numeric values")]
    Symbolic,
    #[error("unknown profile `{0}` (expected `desk` or `paper`)")]
    UnknownProfile(String),
    #[error("unknown parameter `{0}`")]
    UnknownParameter(String),
    #[error("parameter {0} must be positive")]
    Zero(&'static str),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    Desk,
    Paper,
}

impl FromStr for Profile {
    type Err = ParamsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "desk" => Ok(Profile::Desk),
            "paper" | "paper-symbolic" => Ok(Profile::Paper),
            _ => Err(ParamsError::UnknownProfile(s.into())),
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Profile::Desk => "desk",
            Profile::Paper => "paper",
        })
    }
}

/// Optional overrides, as read from a config file.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamOverrides {
    #[serde(rename = "N")]
    pub n: Option<u64>,
    #[serde(rename = "C")]
    pub c: Option<u64>,
    pub c0: Option<u64>,
    #[serde(rename = "L")]
    pub l: Option<u64>,
    pub c1: Option<u64>,
    pub delta_inv: Option<u64>,
    #[serde(rename = "K")]
    pub k: Option<u64>,
}

impl ParamOverrides {
    pub fn is_empty(&self) -> bool {
        *self == ParamOverrides::default()
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Params {
    pub n: u64,
    pub c: u64,
    pub c0: u64,
    pub l: u64,
    pub c1: u64,
    pub delta_inv: u64,
    pub k: u64,
}

impl Params {
    pub fn desk() -> Params {
        Params { n: 2, c: 4, c0: 5, l: 6, c1: 7, delta_inv: 8, k: 9 }
    }

    pub fn values(&self) -> [u64; 7] {
        [self.n, self.c, self.c0, self.l, self.c1, self.delta_inv, self.k]
    }

    pub fn get(&self, name: &str) -> Option<u64> {
        CHAIN.iter().position(|&n| n == name).map(|i| self.values()[i])
    }

    pub fn validate(&self) -> Result<(), ParamsError> {
        let v = self.values();
        if v[0] == 0 {
            return Err(ParamsError::Zero(CHAIN[0]));
        }
        for i in 1..v.len() {
            if v[i - 1] >= v[i] {
                return Err(ParamsError::Chain { lo: CHAIN[i - 1], lo_val: v[i - 1], hi: CHAIN[i], hi_val: v[i] });
            }
        }
        Ok(())
    }

    pub fn with(mut self, o: &ParamOverrides) -> Params {
        let set = |slot: &mut u64, v: Option<u64>| {
            if let Some(v) = v {
                *slot = v;
            }
        };
        set(&mut self.n, o.n);
        set(&mut self.c, o.c);
        set(&mut self.c0, o.c0);
        set(&mut self.l, o.l);
        set(&mut self.c1, o.c1);
        set(&mut self.delta_inv, o.delta_inv);
        set(&mut self.k, o.k);
        self
    }

    /// Weight functions for a recognizer with time bound coefficients `tm`.
    pub fn weights(&self, tm: Vec<u64>) -> WeightFunctions {
        WeightFunctions::new(self.c0, self.c1, self.l, self.k, tm)
    }
}

impl fmt::Display for Params {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = CHAIN.iter().zip(self.values()).map(|(n, v)| format!("{n}={v}")).collect();
        f.write_str(&parts.join(" "))
    }
}

/// Concrete values for a profile. Only `desk` has any.
pub fn instantiate(profile: Profile, overrides: &ParamOverrides) -> Result<Params, ParamsError> {
    match profile {
        Profile::Paper => Err(ParamsError::Symbolic),
        Profile::Desk => {
            let p = Params::desk().with(overrides);
            p.validate()?;
            Ok(p)
        }
    }
}

/// A lower bound on one parameter in terms of constants and earlier parameters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub param: &'static str,
    pub relation: &'static str,
    pub bound: &'static str,
    pub depends_on: &'static [&'static str],
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.param, self.relation, self.bound)
    }
}

/// The symbolic profile: the explicit numeric bounds, plus the chain requirement that each
/// parameter dominates any expression in the earlier ones.
pub fn paper_constraints() -> Vec<Constraint> {
    let mut out = vec![
        Constraint { param: "C", relation: ">=", bound: "2744", depends_on: &[] },
        Constraint { param: "c0", relation: ">=", bound: "6", depends_on: &[] },
        Constraint { param: "L", relation: ">", bound: "33", depends_on: &[] },
    ];
    for (i, p) in CHAIN.iter().enumerate().skip(1) {
        out.push(Constraint { param: p, relation: ">=", bound: "F(earlier parameters)", depends_on: &CHAIN[..i] });
    }
    out
}

/// Each constraint may only depend on parameters that precede it in the chain.
pub fn check_constraint_order(cs: &[Constraint]) -> Result<(), String> {
    for c in cs {
        let at = CHAIN.iter().position(|&n| n == c.param).ok_or_else(|| format!("unknown parameter `{}`", c.param))?;
        for d in c.depends_on {
            match CHAIN.iter().position(|n| n == d) {
                Some(j) if j < at => {}
                _ => return Err(format!("`{c}` depends on `{d}`, which is not an earlier parameter")),
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn desk_is_a_strict_chain() {
        let p = instantiate(Profile::Desk, &ParamOverrides::default()).unwrap();
        assert_eq!(p, Params::desk());
        assert_eq!(p.to_string(), "N=2 C=4 c0=5 L=6 c1=7 delta_inv=8 K=9");
    }

    #[test]
    fn overrides_are_checked() {
        let o = ParamOverrides { l: Some(4), ..Default::default() };
        assert!(matches!(instantiate(Profile::Desk, &o), Err(ParamsError::Chain { lo: "c0", hi: "L", .. })));
        let o = ParamOverrides { k: Some(100), c1: Some(20), delta_inv: Some(50), ..Default::default() };
        assert_eq!(instantiate(Profile::Desk, &o).unwrap().k, 100);
    }

    #[test]
    fn symbolic_profile_refuses_numbers() {
        assert_eq!(instantiate(Profile::Paper, &ParamOverrides::default()), Err(ParamsError::Symbolic));
        assert!(check_constraint_order(&paper_constraints()).is_ok());
        let bad = Constraint { param: "C", relation: ">=", bound: "L", depends_on: &["L"] };
        assert!(check_constraint_order(&[bad]).is_err());
    }

    #[test]
    fn profile_names() {
        assert_eq!("paper-symbolic".parse::<Profile>().unwrap(), Profile::Paper);
        assert!("huge".parse::<Profile>().is_err());
        let o: ParamOverrides = toml::from_str("C = 3\nK = 12").unwrap();
        assert_eq!(o.c, Some(3));
        assert!(toml::from_str::<ParamOverrides>("Q = 1").is_err());
    }
}
