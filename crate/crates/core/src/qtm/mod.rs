//! Quantum Turing machines: rule model, rule normal forms, local
//! normalization, the superposed-configuration interpreter and the
//! Deutsch / Deutsch–Jozsa machine builders.
//!
//! A machine is `(Q, Σ, Γ, δ, q₀, □, F)` where every non-blank tape symbol is
//! a whole `width`-bit register. `δ` maps a `(read, state)` source to a list
//! of weighted branches; a branch may write a superposition of symbols
//! (compact form) or a single symbol (expanded form).

mod builders;
mod format;
mod interp;

use std::borrow::Cow;
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{Amplitude, BasisString, StateVector, ONE, PRUNE_TOLERANCE, TOLERANCE, ZERO};

pub use builders::{
    build_deutsch_qtm, build_deutsch_qtm_with, build_dj_qtm, extend_dj_qtm, FinalGrouping, HadamardGrouping,
    EAGER_WIDTH_LIMIT,
};
pub use format::{delta_text, format_amplitude, trace_to_json};
pub use interp::{
    check_reachable_isometry, measure_tape_prefix, run, step, step_with_stats, Configuration, IsometryReport, Run,
    StepStats, Superposition, DEFAULT_MAX_STEPS,
};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StateLabel(String);

impl StateLabel {
    pub fn new(label: impl Into<String>) -> Self {
        Self(label.into())
    }

    /// Label of the `k`-th layer boundary, `PHI_k`.
    pub fn phi(k: usize) -> Self {
        Self(format!("PHI_{k}"))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for StateLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for StateLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Tape symbol: the blank `□` or a whole register value.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Symbol {
    Blank,
    Bits(BasisString),
}

impl Symbol {
    pub fn bits(&self) -> Option<&BasisString> {
        match self {
            Symbol::Blank => None,
            Symbol::Bits(b) => Some(b),
        }
    }
}

impl From<BasisString> for Symbol {
    fn from(b: BasisString) -> Self {
        Symbol::Bits(b)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::Blank => f.write_str("□"),
            Symbol::Bits(b) => write!(f, "{b}"),
        }
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Symbol {
    type Err = Error;

    /// `□` (or `_`) is the blank; anything else must be a bit string.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "□" | "_" => Ok(Symbol::Blank),
            _ => Ok(Symbol::Bits(s.parse()?)),
        }
    }
}

impl Serialize for Symbol {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Symbol {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Move {
    L,
    N,
    R,
}

impl Move {
    pub fn offset(self) -> i64 {
        match self {
            Move::L => -1,
            Move::N => 0,
            Move::R => 1,
        }
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// What a branch writes: a weighted sum of register values. The expanded
/// form is a single term of weight 1.
///
/// Weights need not be normalized on their own; rules such as
/// `(|0⟩+|1⟩)^{n−1}0` carry the normalization in the branch amplitude.
#[derive(Clone, Debug, PartialEq)]
pub struct WriteTarget {
    terms: Vec<(BasisString, Amplitude)>,
}

impl WriteTarget {
    pub fn new(terms: Vec<(BasisString, Amplitude)>) -> Result<Self> {
        let Some((first, _)) = terms.first() else {
            return Err(Error::InvalidMachine("empty write target".into()));
        };
        let width = first.width();
        if terms.iter().any(|(b, _)| b.width() != width) {
            return Err(Error::InvalidMachine("write target mixes register widths".into()));
        }
        Ok(Self { terms })
    }

    pub fn basis(b: BasisString) -> Self {
        Self { terms: vec![(b, ONE)] }
    }

    /// Write target carrying the amplitudes of `s`.
    pub fn from_state(s: &StateVector) -> Self {
        Self { terms: s.iter().map(|(b, &a)| (b.clone(), a)).collect() }
    }

    /// The single-qubit superposition `a0|0⟩ + a1|1⟩`.
    pub fn qubit(a0: Amplitude, a1: Amplitude) -> Self {
        let zero = BasisString::zeros(1);
        let one = BasisString::from_index(1, 1);
        Self { terms: vec![(zero, a0), (one, a1)] }
    }

    pub fn terms(&self) -> &[(BasisString, Amplitude)] {
        &self.terms
    }

    pub fn width(&self) -> usize {
        self.terms[0].0.width()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.terms.iter().map(|(_, w)| w.norm_sqr()).sum()
    }

    pub fn is_basis(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].1 == ONE
    }

    /// Product with `self` on the leading bits.
    pub fn tensor(&self, other: &WriteTarget) -> WriteTarget {
        let terms =
            self.terms.iter().flat_map(|(a, x)| other.terms.iter().map(move |(b, y)| (a.concat(b), x * y))).collect();
        Self { terms }
    }

    /// Inserts a new wire in state `a0|0⟩ + a1|1⟩` before position `at`.
    pub fn insert_qubit(&self, at: usize, a0: Amplitude, a1: Amplitude) -> WriteTarget {
        let terms =
            self.terms.iter().flat_map(|(b, w)| [(b.insert(at, 0), w * a0), (b.insert(at, 1), w * a1)]).collect();
        Self { terms }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Branch {
    pub write: WriteTarget,
    pub next: StateLabel,
    pub movement: Move,
    pub amplitude: Amplitude,
}

impl Branch {
    pub fn new(write: WriteTarget, next: StateLabel, movement: Move, amplitude: Amplitude) -> Self {
        Self { write, next, movement, amplitude }
    }

    /// Expanded single-symbol branch.
    pub fn basis(write: BasisString, next: StateLabel, movement: Move, amplitude: Amplitude) -> Self {
        Self::new(WriteTarget::basis(write), next, movement, amplitude)
    }
}

/// Successor key of an expanded branch.
pub type Target = (BasisString, StateLabel, Move);

/// All branches leaving one `(read, state)` source.
#[derive(Clone, Debug, PartialEq)]
pub struct DeltaRule {
    pub read: Symbol,
    pub state: StateLabel,
    pub branches: Vec<Branch>,
}

impl DeltaRule {
    pub fn new(read: Symbol, state: StateLabel, branches: Vec<Branch>) -> Self {
        Self { read, state, branches }
    }

    /// Amplitude per successor after distributing write weights and merging
    /// equal successors. Near-zero successors are dropped.
    pub fn successors(&self) -> BTreeMap<Target, Amplitude> {
        let mut out = BTreeMap::new();
        for br in &self.branches {
            for (bits, w) in br.write.terms() {
                let key = (bits.clone(), br.next.clone(), br.movement);
                *out.entry(key).or_insert(ZERO) += br.amplitude * w;
            }
        }
        out.retain(|_, a: &mut Amplitude| a.norm() > PRUNE_TOLERANCE);
        out
    }

    /// Canonical expanded form: one weight-1 branch per successor, sorted.
    pub fn expanded(&self) -> DeltaRule {
        let branches =
            self.successors().into_iter().map(|((bits, next, mv), a)| Branch::basis(bits, next, mv, a)).collect();
        Self::new(self.read.clone(), self.state.clone(), branches)
    }

    /// Groups successors sharing `(next, move)` into one branch whose write
    /// target is the normalized superposition; the inverse of [`expanded`].
    ///
    /// [`expanded`]: DeltaRule::expanded
    pub fn compacted(&self) -> DeltaRule {
        let mut groups: BTreeMap<(StateLabel, Move), Vec<(BasisString, Amplitude)>> = BTreeMap::new();
        for ((bits, next, mv), a) in self.successors() {
            groups.entry((next, mv)).or_default().push((bits, a));
        }
        let branches = groups
            .into_iter()
            .map(|((next, mv), terms)| {
                let norm = terms.iter().map(|(_, a)| a.norm_sqr()).sum::<f64>().sqrt();
                let terms = terms.into_iter().map(|(b, a)| (b, a / norm)).collect();
                Branch::new(WriteTarget { terms }, next, mv, Amplitude::new(norm, 0.0))
            })
            .collect();
        Self::new(self.read.clone(), self.state.clone(), branches)
    }

    /// `Σᵢ |αᵢ|²` over the distinct successors.
    pub fn outgoing_norm_sqr(&self) -> f64 {
        self.successors().values().map(|a| a.norm_sqr()).sum()
    }

    pub fn is_expanded(&self) -> bool {
        self.branches.iter().all(|b| b.write.is_basis())
    }
}

/// Produces the branches for a register value read in one state, or `None`
/// when the pattern does not apply.
pub type RuleFn = dyn Fn(&BasisString) -> Option<Vec<Branch>> + Send + Sync;

/// Width-parametric rule evaluated on demand instead of being stored per
/// symbol.
#[derive(Clone)]
pub struct PatternRule {
    pub state: StateLabel,
    pub description: String,
    produce: Arc<RuleFn>,
}

impl PatternRule {
    pub fn new(
        state: StateLabel,
        description: impl Into<String>,
        produce: impl Fn(&BasisString) -> Option<Vec<Branch>> + Send + Sync + 'static,
    ) -> Self {
        Self { state, description: description.into(), produce: Arc::new(produce) }
    }

    pub fn instantiate(&self, read: &BasisString) -> Option<DeltaRule> {
        (self.produce)(read).map(|branches| DeltaRule::new(Symbol::Bits(read.clone()), self.state.clone(), branches))
    }
}

impl fmt::Debug for PatternRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PatternRule").field("state", &self.state).field("description", &self.description).finish()
    }
}

type RuleKey = (Symbol, StateLabel);

#[derive(Clone, Debug)]
pub struct Qtm {
    width: usize,
    states: BTreeSet<StateLabel>,
    start: StateLabel,
    finals: BTreeSet<StateLabel>,
    rules: BTreeMap<RuleKey, DeltaRule>,
    patterns: Vec<PatternRule>,
}

impl Qtm {
    pub fn new(
        width: usize,
        states: impl IntoIterator<Item = StateLabel>,
        start: StateLabel,
        finals: impl IntoIterator<Item = StateLabel>,
        rules: impl IntoIterator<Item = DeltaRule>,
    ) -> Result<Self> {
        let states: BTreeSet<StateLabel> = states.into_iter().collect();
        let finals: BTreeSet<StateLabel> = finals.into_iter().collect();
        if width == 0 {
            return Err(Error::InvalidMachine("register width must be at least 1".into()));
        }
        if !states.contains(&start) {
            return Err(Error::InvalidMachine(format!("start state {start} is not in Q")));
        }
        if let Some(q) = finals.iter().find(|q| !states.contains(*q)) {
            return Err(Error::InvalidMachine(format!("final state {q} is not in Q")));
        }
        let mut machine = Self { width, states, start, finals, rules: BTreeMap::new(), patterns: vec![] };
        for rule in rules {
            machine.check_rule(&rule)?;
            let key = (rule.read.clone(), rule.state.clone());
            if machine.rules.insert(key, rule).is_some() {
                return Err(Error::InvalidMachine("duplicate rule for one (read, state) source".into()));
            }
        }
        Ok(machine)
    }

    pub fn with_patterns(mut self, patterns: Vec<PatternRule>) -> Result<Self> {
        if let Some(p) = patterns.iter().find(|p| !self.states.contains(&p.state)) {
            return Err(Error::InvalidMachine(format!("pattern state {} is not in Q", p.state)));
        }
        self.patterns = patterns;
        Ok(self)
    }

    fn check_rule(&self, rule: &DeltaRule) -> Result<()> {
        if !self.states.contains(&rule.state) {
            return Err(Error::InvalidMachine(format!("rule source state {} is not in Q", rule.state)));
        }
        if let Symbol::Bits(b) = &rule.read {
            if b.width() != self.width {
                return Err(Error::InvalidMachine(format!(
                    "symbol {b} does not have the machine width {}",
                    self.width
                )));
            }
        }
        for br in &rule.branches {
            if !self.states.contains(&br.next) {
                return Err(Error::InvalidMachine(format!("rule target state {} is not in Q", br.next)));
            }
            if br.write.width() != self.width {
                return Err(Error::InvalidMachine(format!(
                    "rule ({}, {}) writes a {}-bit symbol on a {}-bit machine",
                    rule.read,
                    rule.state,
                    br.write.width(),
                    self.width
                )));
            }
        }
        Ok(())
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn states(&self) -> &BTreeSet<StateLabel> {
        &self.states
    }

    pub fn start(&self) -> &StateLabel {
        &self.start
    }

    pub fn finals(&self) -> &BTreeSet<StateLabel> {
        &self.finals
    }

    pub fn is_final(&self, q: &StateLabel) -> bool {
        self.finals.contains(q)
    }

    /// Explicitly stored rules in `(read, state)` order.
    pub fn rules(&self) -> impl Iterator<Item = &DeltaRule> {
        self.rules.values()
    }

    pub fn patterns(&self) -> &[PatternRule] {
        &self.patterns
    }

    /// The rule for a source, consulting stored rules first and patterns
    /// second.
    pub fn rule(&self, read: &Symbol, state: &StateLabel) -> Option<Cow<'_, DeltaRule>> {
        if let Some(r) = self.rules.get(&(read.clone(), state.clone())) {
            return Some(Cow::Borrowed(r));
        }
        let bits = read.bits()?;
        self.patterns.iter().filter(|p| &p.state == state).find_map(|p| p.instantiate(bits)).map(Cow::Owned)
    }

    /// Copy with every pattern instantiated for all `2^width` symbols.
    pub fn materialize(&self) -> Qtm {
        let mut out = self.clone();
        out.patterns.clear();
        for p in &self.patterns {
            for bits in BasisString::all(self.width) {
                let key = (Symbol::Bits(bits.clone()), p.state.clone());
                if out.rules.contains_key(&key) {
                    continue;
                }
                if let Some(rule) = p.instantiate(&bits) {
                    out.rules.insert(key, rule);
                }
            }
        }
        out
    }

    /// Total number of expanded branches over stored rules.
    pub fn branch_count(&self) -> usize {
        self.rules.values().map(|r| r.successors().len()).sum()
    }

    fn map_rules(&self, f: impl Fn(&DeltaRule) -> DeltaRule + Send + Sync + Clone + 'static) -> Qtm {
        let rules = self.rules.iter().map(|(k, r)| (k.clone(), f(r))).collect();
        let patterns = self
            .patterns
            .iter()
            .map(|p| {
                let inner = p.clone();
                let f = f.clone();
                PatternRule::new(p.state.clone(), p.description.clone(), move |bits| {
                    inner.instantiate(bits).map(|r| f(&r).branches)
                })
            })
            .collect();
        Qtm { rules, patterns, ..self.clone() }
    }
}

/// Rewrites every rule into expanded form (one weight-1 symbol per branch);
/// the branch amplitudes absorb the write weights.
pub fn expand_rules(m: &Qtm) -> Qtm {
    m.map_rules(DeltaRule::expanded)
}

/// Inverse grouping of [`expand_rules`]: one branch per `(next, move)` whose
/// write target is the normalized superposition of its successors.
pub fn compact_rules(m: &Qtm) -> Qtm {
    m.map_rules(DeltaRule::compacted)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormalizationViolation {
    pub read: Symbol,
    pub state: StateLabel,
    pub sum: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormalizationReport {
    pub sources_checked: usize,
    pub max_deviation: f64,
    pub violations: Vec<NormalizationViolation>,
}

impl NormalizationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks `Σᵢ |αᵢ|² = 1` (within [`TOLERANCE`]) for every defined source,
/// over distinct successor configurations.
pub fn check_local_normalization(m: &Qtm) -> NormalizationReport {
    let m = m.materialize();
    let mut report = NormalizationReport { sources_checked: 0, max_deviation: 0.0, violations: vec![] };
    for rule in m.rules() {
        report.sources_checked += 1;
        let sum = rule.outgoing_norm_sqr();
        let dev = (sum - 1.0).abs();
        report.max_deviation = report.max_deviation.max(dev);
        if dev > TOLERANCE {
            report.violations.push(NormalizationViolation { read: rule.read.clone(), state: rule.state.clone(), sum });
        }
    }
    report
}

/// Sources `(read, state)` that can be consulted in some run from the blank
/// start. Rules out of final states are never consulted. A head move may
/// land on a blank or on any symbol the machine ever writes.
pub fn reachable_sources(m: &Qtm) -> BTreeSet<(Symbol, StateLabel)> {
    let m = m.materialize();
    let written: BTreeSet<Symbol> =
        m.rules().flat_map(|r| r.successors().into_keys().map(|(b, _, _)| Symbol::Bits(b))).collect();
    let mut seen = BTreeSet::new();
    let mut queue = VecDeque::from([(Symbol::Blank, m.start.clone())]);
    while let Some(src) = queue.pop_front() {
        if m.is_final(&src.1) || !seen.insert(src.clone()) {
            continue;
        }
        let Some(rule) = m.rule(&src.0, &src.1) else { continue };
        for (bits, next, mv) in rule.successors().into_keys() {
            if mv == Move::N {
                queue.push_back((Symbol::Bits(bits), next));
            } else {
                queue.push_back((Symbol::Blank, next.clone()));
                queue.extend(written.iter().map(|s| (s.clone(), next.clone())));
            }
        }
    }
    seen
}

#[cfg(test)]
mod tests;
