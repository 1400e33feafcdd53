//! Boolean functions given by truth table, promise classification, the
//! oracle gate `|x, y⟩ → |x, y ⊕ f(x)⟩` and the classical query baseline.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{BasisString, UnitaryMatrix};

/// Largest arity accepted by the exhaustive enumerations.
pub const MAX_ENUM_ARITY: usize = 4;

/// `f: {0,1}^m → {0,1}` as an explicit table; entry `i` is `f` at the
/// big-endian reading of `i`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BooleanFunction {
    arity: usize,
    table: Vec<bool>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    Constant,
    Balanced,
    Neither,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Classification::Constant => "constant",
            Classification::Balanced => "balanced",
            Classification::Neither => "neither",
        })
    }
}

impl BooleanFunction {
    pub fn new(arity: usize, table: Vec<bool>) -> Result<Self> {
        if arity == 0 || arity >= usize::BITS as usize || table.len() != 1 << arity {
            let shown: String = table.iter().map(|&b| if b { '1' } else { '0' }).collect();
            return Err(Error::InvalidTable(shown));
        }
        Ok(Self { arity, table })
    }

    pub fn from_fn(arity: usize, f: impl Fn(usize) -> bool) -> Result<Self> {
        Self::new(arity, (0..1usize << arity).map(f).collect())
    }

    pub fn constant(arity: usize, value: bool) -> Result<Self> {
        Self::from_fn(arity, |_| value)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn table(&self) -> &[bool] {
        &self.table
    }

    pub fn eval_index(&self, x: usize) -> bool {
        self.table[x]
    }

    pub fn eval(&self, x: &BasisString) -> bool {
        assert_eq!(x.width(), self.arity, "argument width must equal arity");
        self.table[x.index()]
    }

    pub fn ones(&self) -> usize {
        self.table.iter().filter(|&&b| b).count()
    }

    /// Table read as a big-endian binary number (first entry most significant).
    /// Only meaningful for arity ≤ 6.
    fn table_value(&self) -> u64 {
        self.table.iter().fold(0, |acc, &b| (acc << 1) | b as u64)
    }

    /// Uniformly random balanced function.
    pub fn random_balanced<R: Rng + ?Sized>(arity: usize, rng: &mut R) -> Result<Self> {
        let n = 1usize << arity;
        let mut table: Vec<bool> = (0..n).map(|i| i < n / 2).collect();
        table.shuffle(rng);
        Self::new(arity, table)
    }

    pub fn random_constant<R: Rng + ?Sized>(arity: usize, rng: &mut R) -> Result<Self> {
        Self::constant(arity, rng.gen())
    }
}

impl FromStr for BooleanFunction {
    type Err = Error;

    /// Parses the `"0110"` truth-table format.
    fn from_str(s: &str) -> Result<Self> {
        let table = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::InvalidTable(s.to_string())),
            })
            .collect::<Result<Vec<bool>>>()?;
        let n = table.len();
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::InvalidTable(s.to_string()));
        }
        Self::new(n.trailing_zeros() as usize, table)
    }
}

impl fmt::Display for BooleanFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.table {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BooleanFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "f[{self}]")
    }
}

impl Serialize for BooleanFunction {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BooleanFunction {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

pub fn classify(f: &BooleanFunction) -> Classification {
    let ones = f.ones();
    let n = f.table.len();
    if ones == 0 || ones == n {
        Classification::Constant
    } else if 2 * ones == n {
        Classification::Balanced
    } else {
        Classification::Neither
    }
}

fn check_enum_arity(m: usize) -> Result<()> {
    if m == 0 {
        return Err(Error::Range { what: "arity", value: m, min: 1, max: MAX_ENUM_ARITY });
    }
    if m > MAX_ENUM_ARITY {
        return Err(Error::Size { what: "arity", value: m, max: MAX_ENUM_ARITY });
    }
    Ok(())
}

/// All constant and balanced functions of arity `m`, ordered by table value.
pub fn enumerate_promise_functions(m: usize) -> Result<Vec<BooleanFunction>> {
    check_enum_arity(m)?;
    let n = 1usize << m;
    let half = (n / 2) as u32;
    let full = (1u64 << n) - 1;
    // bit n-1-i of `value` holds table entry i
    let out = (0..=full)
        .filter(|v| {
            let ones = v.count_ones();
            ones == 0 || ones == n as u32 || ones == half
        })
        .map(|v| BooleanFunction::from_fn(m, |i| (v >> (n - 1 - i)) & 1 == 1).expect("valid arity"))
        .collect::<Vec<_>>();
    debug_assert!(out.windows(2).all(|w| w[0].table_value() < w[1].table_value()));
    Ok(out)
}

/// Oracle unitary built from an arbitrary query callback; the callback is
/// invoked exactly once per domain point.
pub fn oracle_unitary_with(arity: usize, mut query: impl FnMut(usize) -> bool) -> UnitaryMatrix {
    let values: Vec<usize> = (0..1usize << arity).map(|x| query(x) as usize).collect();
    // index of |x, y⟩ is 2x + y
    UnitaryMatrix::permutation(arity + 1, |col| col ^ values[col >> 1])
}

/// `U_f: |x, y⟩ → |x, y ⊕ f(x)⟩` on `arity + 1` qubits.
pub fn oracle_unitary(f: &BooleanFunction) -> UnitaryMatrix {
    oracle_unitary_with(f.arity, |x| f.eval_index(x))
}

/// Worst-case number of deterministic classical queries needed to decide
/// constant vs. balanced, found by adversary enumeration: the smallest `k`
/// such that no query set of size `k` admits a constant and a balanced
/// function agreeing on it. Equals `2^(m-1) + 1`.
pub fn classical_worst_case_queries(m: usize) -> Result<usize> {
    check_enum_arity(m)?;
    let n = 1usize << m;
    let domain = (1u32 << n) - 1;
    let promise = enumerate_promise_functions(m)?;
    let to_mask = |f: &BooleanFunction| f.table.iter().enumerate().fold(0u32, |acc, (i, &b)| acc | ((b as u32) << i));
    let constants: Vec<u32> = promise.iter().filter(|f| classify(f) == Classification::Constant).map(to_mask).collect();
    let balanced: Vec<u32> = promise.iter().filter(|f| classify(f) == Classification::Balanced).map(to_mask).collect();

    let ambiguous = |set: u32| constants.iter().any(|&c| balanced.iter().any(|&b| (c ^ b) & set == 0));
    let k = (1..=n)
        .find(|&k| (0..=domain).filter(|s: &u32| s.count_ones() as usize == k).all(|s| !ambiguous(s)))
        .expect("querying the whole domain always decides");
    debug_assert_eq!(k, n / 2 + 1);
    Ok(k)
}
