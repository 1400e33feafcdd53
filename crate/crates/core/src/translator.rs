//! Circuit → QTM compilation and rule-set comparison.
//!
//! A circuit with `L` layers becomes a machine with states `PHI_0 … PHI_L`.
//! The blank in `PHI_0` writes the initial register value and stays in
//! `PHI_0`; layer `k` then contributes, for every input value `b` and every
//! output `b'` with a non-zero matrix entry, the branch
//! `δ(b, PHI_{k−1}, b', PHI_k, N) = U_k[b', b]`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::circuit::{build_dj, Circuit};
use crate::error::{Error, Result};
use crate::linalg::{amp_distance, Amplitude, BasisString, ONE};
use crate::oracle::{enumerate_promise_functions, BooleanFunction};
use crate::qtm::{
    build_deutsch_qtm, build_dj_qtm, expand_rules, extend_dj_qtm, reachable_sources, Branch, DeltaRule, Move, Qtm,
    StateLabel, Symbol, Target,
};

/// Amplitude tolerance for rule-set comparison.
pub const RULE_TOLERANCE: f64 = 1e-12;

/// Largest `n_max` accepted by [`verify_induction`].
pub const MAX_INDUCTION_WIDTH: usize = 6;

/// Random balanced functions drawn per induction step once exhaustive
/// enumeration is out of reach.
pub const INDUCTION_SAMPLES: usize = 32;

pub fn translate(c: &Circuit) -> Result<Qtm> {
    if c.layers().is_empty() {
        return Err(Error::InvalidCircuit("circuit has no layers".into()));
    }
    let width = c.width();
    let states: Vec<StateLabel> = (0..=c.layers().len()).map(StateLabel::phi).collect();
    let mut rules = vec![DeltaRule::new(
        Symbol::Blank,
        StateLabel::phi(0),
        vec![Branch::basis(c.initial().clone(), StateLabel::phi(0), Move::N, ONE)],
    )];
    for (k, layer) in c.layers().iter().enumerate() {
        let u = layer.unitary(width);
        let (from, to) = (StateLabel::phi(k), StateLabel::phi(k + 1));
        for col in 0..u.dim() {
            let branches = u
                .column(col)
                .map(|(row, a)| Branch::basis(BasisString::from_index(row, width), to.clone(), Move::N, a))
                .collect();
            let read = Symbol::Bits(BasisString::from_index(col, width));
            rules.push(DeltaRule::new(read, from.clone(), branches));
        }
    }
    let last = states.last().expect("at least two states").clone();
    Qtm::new(width, states.clone(), StateLabel::phi(0), [last], rules)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RuleDifference {
    pub read: Option<Symbol>,
    pub state: Option<StateLabel>,
    pub detail: String,
}

impl fmt::Display for RuleDifference {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.read, &self.state) {
            (Some(r), Some(q)) => write!(f, "at source ({r}, {q}): {}", self.detail),
            _ => f.write_str(&self.detail),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RuleComparison {
    pub equal: bool,
    pub sources_compared: usize,
    pub first_difference: Option<RuleDifference>,
}

fn machine_difference(detail: String) -> RuleComparison {
    RuleComparison {
        equal: false,
        sources_compared: 0,
        first_difference: Some(RuleDifference { read: None, state: None, detail }),
    }
}

/// Expanded successor map of every reachable source.
fn reachable_rule_set(m: &Qtm) -> BTreeMap<(Symbol, StateLabel), BTreeMap<Target, Amplitude>> {
    let expanded = expand_rules(m);
    reachable_sources(&expanded)
        .into_iter()
        .map(|(read, state)| {
            let succ = expanded.rule(&read, &state).map(|r| r.successors()).unwrap_or_default();
            ((read, state), succ)
        })
        .collect()
}

/// Compares two machines as expanded rule sets, restricted to the sources
/// each machine can actually reach from its blank start. Amplitudes must
/// agree within [`RULE_TOLERANCE`]; zero-amplitude branches are ignored.
pub fn rules_equal(a: &Qtm, b: &Qtm) -> RuleComparison {
    if a.width() != b.width() {
        return machine_difference(format!("register widths differ: {} vs {}", a.width(), b.width()));
    }
    if a.start() != b.start() {
        return machine_difference(format!("start states differ: {} vs {}", a.start(), b.start()));
    }
    if a.finals() != b.finals() {
        return machine_difference(format!("final states differ: {:?} vs {:?}", a.finals(), b.finals()));
    }
    let ra = reachable_rule_set(a);
    let rb = reachable_rule_set(b);
    let sources: BTreeSet<&(Symbol, StateLabel)> = ra.keys().chain(rb.keys()).collect();
    let mut compared = 0;
    for src in sources {
        compared += 1;
        let diff = |detail: String| RuleComparison {
            equal: false,
            sources_compared: compared,
            first_difference: Some(RuleDifference { read: Some(src.0.clone()), state: Some(src.1.clone()), detail }),
        };
        let (Some(sa), Some(sb)) = (ra.get(src), rb.get(src)) else {
            let side = if ra.contains_key(src) { "second" } else { "first" };
            return diff(format!("source is unreachable or undefined in the {side} machine"));
        };
        let targets: BTreeSet<&Target> = sa.keys().chain(sb.keys()).collect();
        for t in targets {
            let (x, y) = (sa.get(t).copied().unwrap_or_default(), sb.get(t).copied().unwrap_or_default());
            if amp_distance(x, y) > RULE_TOLERANCE {
                return diff(format!("branch to ({}, {}, {}) has amplitude {x} vs {y}", t.0, t.1, t.2));
            }
        }
    }
    RuleComparison { equal: true, sources_compared: compared, first_difference: None }
}

#[derive(Clone, Debug, Serialize)]
pub struct InductionCase {
    pub function: BooleanFunction,
    pub equal: bool,
    pub first_difference: Option<RuleDifference>,
}

#[derive(Clone, Debug, Serialize)]
pub struct InductionStep {
    pub from_width: usize,
    pub to_width: usize,
    pub exhaustive: bool,
    pub cases: Vec<InductionCase>,
}

#[derive(Clone, Debug, Serialize)]
pub struct InductionReport {
    pub pass: bool,
    pub base: Vec<InductionCase>,
    pub steps: Vec<InductionStep>,
}

impl InductionStep {
    pub fn passed(&self) -> usize {
        self.cases.iter().filter(|c| c.equal).count()
    }
}

fn case(function: &BooleanFunction, cmp: RuleComparison) -> InductionCase {
    InductionCase { function: function.clone(), equal: cmp.equal, first_difference: cmp.first_difference }
}

/// Functions of one arity used by an induction step: every promise function
/// when the arity is small enough to enumerate, otherwise both constants
/// plus [`INDUCTION_SAMPLES`] seeded random balanced functions.
fn induction_functions(arity: usize, rng: &mut ChaCha8Rng) -> Result<(Vec<BooleanFunction>, bool)> {
    if arity <= 3 {
        return Ok((enumerate_promise_functions(arity)?, true));
    }
    let mut fs = vec![BooleanFunction::constant(arity, false)?, BooleanFunction::constant(arity, true)?];
    for _ in 0..INDUCTION_SAMPLES {
        fs.push(BooleanFunction::random_balanced(arity, rng)?);
    }
    Ok((fs, false))
}

/// Base case: the width-2 Deutsch–Jozsa machine equals the Deutsch machine
/// for every arity-1 function. Step `n → n+1` for `2 ≤ n < n_max`: extending
/// a width-`n` machine with an arity-`n` function equals the translation of
/// that function's circuit.
pub fn verify_induction(n_max: usize) -> Result<InductionReport> {
    if n_max < 2 {
        return Err(Error::Range { what: "n_max", value: n_max, min: 2, max: MAX_INDUCTION_WIDTH });
    }
    if n_max > MAX_INDUCTION_WIDTH {
        return Err(Error::Size { what: "n_max", value: n_max, max: MAX_INDUCTION_WIDTH });
    }
    let base = enumerate_promise_functions(1)?
        .iter()
        .map(|g| Ok(case(g, rules_equal(&build_dj_qtm(g)?, &build_deutsch_qtm(g)?))))
        .collect::<Result<Vec<_>>>()?;

    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut steps = Vec::new();
    for n in 2..n_max {
        let previous = enumerate_promise_functions(n - 1)?;
        let (fs, exhaustive) = induction_functions(n, &mut rng)?;
        let mut cases = Vec::with_capacity(fs.len());
        for (i, g) in fs.iter().enumerate() {
            // the width-n machine being extended cycles through arity n-1 functions
            let old = build_dj_qtm(&previous[i % previous.len()])?;
            let extended = extend_dj_qtm(&old, g)?;
            let direct = translate(&build_dj(g)?)?;
            cases.push(case(g, rules_equal(&extended, &direct)));
        }
        steps.push(InductionStep { from_width: n, to_width: n + 1, exhaustive, cases });
    }
    let pass = base.iter().all(|c| c.equal) && steps.iter().all(|s| s.cases.iter().all(|c| c.equal));
    Ok(InductionReport { pass, base, steps })
}
