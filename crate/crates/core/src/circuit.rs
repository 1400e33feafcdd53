//! Layered circuits over `{H, I, X, U_f}`, the Deutsch / Deutsch–Jozsa
//! builders, state-vector simulation and prefix measurement.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{BasisString, StateVector, UnitaryMatrix};
use crate::oracle::{oracle_unitary_with, BooleanFunction};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Gate {
    H,
    I,
    X,
}

impl Gate {
    pub fn matrix(self) -> UnitaryMatrix {
        match self {
            Gate::H => UnitaryMatrix::hadamard(),
            Gate::I => UnitaryMatrix::identity(1),
            Gate::X => UnitaryMatrix::pauli_x(),
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// One time step of a circuit: a row of single-qubit gates (one per wire),
/// or the oracle spanning every wire.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Layer {
    Row(Vec<Gate>),
    Oracle(BooleanFunction),
}

impl Layer {
    fn check(&self, width: usize) -> Result<()> {
        match self {
            Layer::Row(gates) if gates.len() != width => {
                Err(Error::InvalidCircuit(format!("gate row has {} gates on a {width}-wire circuit", gates.len())))
            }
            Layer::Oracle(f) if f.arity() + 1 != width => Err(Error::InvalidCircuit(format!(
                "oracle of arity {} needs width {}, circuit has {width}",
                f.arity(),
                f.arity() + 1
            ))),
            _ => Ok(()),
        }
    }

    /// The layer's unitary on `width` wires.
    pub fn unitary(&self, width: usize) -> UnitaryMatrix {
        self.unitary_counting(width, &mut 0)
    }

    fn unitary_counting(&self, width: usize, queries: &mut usize) -> UnitaryMatrix {
        match self {
            Layer::Row(gates) => {
                debug_assert_eq!(gates.len(), width);
                let mut it = gates.iter();
                let first = it.next().expect("width >= 1").matrix();
                it.fold(first, |acc, g| acc.tensor(&g.matrix()))
            }
            Layer::Oracle(f) => oracle_unitary_with(f.arity(), |x| {
                *queries += 1;
                f.eval_index(x)
            }),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawCircuit")]
pub struct Circuit {
    width: usize,
    initial: BasisString,
    layers: Vec<Layer>,
}

#[derive(Deserialize)]
struct RawCircuit {
    width: usize,
    initial: BasisString,
    layers: Vec<Layer>,
}

impl TryFrom<RawCircuit> for Circuit {
    type Error = Error;

    fn try_from(raw: RawCircuit) -> Result<Self> {
        Circuit::new(raw.width, raw.initial, raw.layers)
    }
}

impl Circuit {
    pub fn new(width: usize, initial: BasisString, layers: Vec<Layer>) -> Result<Self> {
        if width == 0 || initial.width() != width {
            return Err(Error::InvalidCircuit(format!("initial string {initial} does not match width {width}")));
        }
        for layer in &layers {
            layer.check(width)?;
        }
        Ok(Self { width, initial, layers })
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("circuit serializes")
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn initial(&self) -> &BasisString {
        &self.initial
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn oracle_layer_count(&self) -> usize {
        self.layers.iter().filter(|l| matches!(l, Layer::Oracle(_))).count()
    }
}

/// `(H ⊗ I) U_f (H ⊗ H) |01⟩`
pub fn build_deutsch(f: &BooleanFunction) -> Result<Circuit> {
    if f.arity() != 1 {
        return Err(Error::Arity { expected: "1".into(), found: f.arity() });
    }
    build_dj(f)
}

/// Width `m + 1` for an arity-`m` function: `H^{⊗m+1}`, the oracle, then
/// `H^{⊗m} ⊗ I`, starting from `0…01`.
pub fn build_dj(f: &BooleanFunction) -> Result<Circuit> {
    let width = f.arity() + 1;
    let initial = BasisString::from_index(1, width);
    let mut last = vec![Gate::H; width];
    last[width - 1] = Gate::I;
    Circuit::new(width, initial, vec![Layer::Row(vec![Gate::H; width]), Layer::Oracle(f.clone()), Layer::Row(last)])
}

/// Two-value evaluation `U_f (H ⊗ I) |00⟩`. Measuring the bottom wire gives
/// `f(0)` or `f(1)` with probability ½ each.
pub fn build_naive(f: &BooleanFunction) -> Result<Circuit> {
    if f.arity() != 1 {
        return Err(Error::Arity { expected: "1".into(), found: f.arity() });
    }
    Circuit::new(2, BasisString::zeros(2), vec![Layer::Row(vec![Gate::H, Gate::I]), Layer::Oracle(f.clone())])
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SimulationStats {
    pub oracle_layers: usize,
    pub oracle_queries: usize,
}

/// States `|Φ₀⟩ … |Φ_L⟩`, one per layer boundary.
pub fn simulate(c: &Circuit) -> Vec<StateVector> {
    simulate_with_stats(c).0
}

pub fn simulate_with_stats(c: &Circuit) -> (Vec<StateVector>, SimulationStats) {
    let mut stats = SimulationStats::default();
    let mut states = Vec::with_capacity(c.layers.len() + 1);
    states.push(StateVector::basis(c.initial.clone()));
    for layer in &c.layers {
        if matches!(layer, Layer::Oracle(_)) {
            stats.oracle_layers += 1;
        }
        let u = layer.unitary_counting(c.width, &mut stats.oracle_queries);
        let next = u.apply(states.last().expect("non-empty")).expect("layer width checked");
        states.push(next);
    }
    (states, stats)
}

/// Marginal distribution of the first `k` bits.
pub fn measure_prefix(s: &StateVector, k: usize) -> Result<BTreeMap<BasisString, f64>> {
    if k == 0 || k > s.width() {
        return Err(Error::Range { what: "prefix length", value: k, min: 1, max: s.width() });
    }
    let mut dist = BTreeMap::new();
    for (b, a) in s.iter() {
        *dist.entry(b.prefix(k)).or_insert(0.0) += a.norm_sqr();
    }
    Ok(dist)
}

/// Probability of one outcome in a distribution (0 when absent).
pub fn probability(dist: &BTreeMap<BasisString, f64>, outcome: &BasisString) -> f64 {
    dist.get(outcome).copied().unwrap_or(0.0)
}

/// Largest absolute probability difference over the union of outcomes.
pub fn distribution_distance(a: &BTreeMap<BasisString, f64>, b: &BTreeMap<BasisString, f64>) -> f64 {
    a.keys().chain(b.keys()).map(|k| (probability(a, k) - probability(b, k)).abs()).fold(0.0, f64::max)
}
