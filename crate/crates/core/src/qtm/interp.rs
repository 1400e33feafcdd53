use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use super::{Qtm, StateLabel, Symbol};
use crate::error::{Error, Result};
use crate::linalg::{Amplitude, BasisString, ONE, PRUNE_TOLERANCE, TOLERANCE, ZERO};

pub const DEFAULT_MAX_STEPS: usize = 10_000;

/// `⟨state, tape, head⟩` with the tape stored as its finite non-blank
/// support, so equal configurations compare equal regardless of padding.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration {
    pub state: StateLabel,
    pub tape: BTreeMap<i64, BasisString>,
    pub head: i64,
}

impl Configuration {
    /// All-blank tape, head at 0.
    pub fn blank(state: StateLabel) -> Self {
        Self { state, tape: BTreeMap::new(), head: 0 }
    }

    /// Single register value at cell 0 with the head on it.
    pub fn at_origin(state: StateLabel, bits: BasisString) -> Self {
        Self { state, tape: BTreeMap::from([(0, bits)]), head: 0 }
    }

    pub fn symbol_at_head(&self) -> Symbol {
        self.tape.get(&self.head).cloned().map_or(Symbol::Blank, Symbol::Bits)
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "⟨{}, [", self.state)?;
        for (i, (pos, bits)) in self.tape.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{pos}:{bits}")?;
        }
        write!(f, "], head {}⟩", self.head)
    }
}

impl fmt::Debug for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Finite amplitude-weighted set of configurations.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Superposition {
    entries: BTreeMap<Configuration, Amplitude>,
}

impl Superposition {
    /// `{⟨q₀, blank tape, head 0⟩: 1}`
    pub fn initial(m: &Qtm) -> Self {
        Self { entries: BTreeMap::from([(Configuration::blank(m.start().clone()), ONE)]) }
    }

    pub fn from_entries(entries: impl IntoIterator<Item = (Configuration, Amplitude)>) -> Self {
        let mut map = BTreeMap::new();
        for (c, a) in entries {
            *map.entry(c).or_insert(ZERO) += a;
        }
        map.retain(|_, a: &mut Amplitude| a.norm() >= PRUNE_TOLERANCE);
        Self { entries: map }
    }

    pub fn amplitude(&self, c: &Configuration) -> Amplitude {
        self.entries.get(c).copied().unwrap_or(ZERO)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Configuration, &Amplitude)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.entries.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn all_final(&self, m: &Qtm) -> bool {
        self.entries.keys().all(|c| m.is_final(&c.state))
    }
}

/// Bookkeeping for one interpreter step.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StepStats {
    /// Individual `amplitude × branch × weight` products produced.
    pub contributions: usize,
    /// Distinct configurations that received at least one contribution.
    pub targets: usize,
    /// Targets whose contributions summed to (numerically) zero.
    pub cancelled: usize,
    /// Largest modulus among cancelled sums.
    pub max_cancelled_residual: f64,
}

/// One application of δ to every configuration of `s`. Configurations in a
/// final state are carried over unchanged.
pub fn step(m: &Qtm, s: &Superposition) -> Result<Superposition> {
    step_with_stats(m, s).map(|(next, _)| next)
}

pub fn step_with_stats(m: &Qtm, s: &Superposition) -> Result<(Superposition, StepStats)> {
    let mut stats = StepStats::default();
    let mut acc: BTreeMap<Configuration, Amplitude> = BTreeMap::new();
    for (config, &amp) in s.iter() {
        if m.is_final(&config.state) {
            stats.contributions += 1;
            *acc.entry(config.clone()).or_insert(ZERO) += amp;
            continue;
        }
        let read = config.symbol_at_head();
        let rule = m.rule(&read, &config.state).ok_or_else(|| Error::Stuck(config.to_string()))?;
        for branch in &rule.branches {
            for (bits, weight) in branch.write.terms() {
                let mut tape = config.tape.clone();
                tape.insert(config.head, bits.clone());
                let next =
                    Configuration { state: branch.next.clone(), tape, head: config.head + branch.movement.offset() };
                stats.contributions += 1;
                *acc.entry(next).or_insert(ZERO) += amp * branch.amplitude * weight;
            }
        }
    }
    stats.targets = acc.len();
    acc.retain(|_, a| {
        let keep = a.norm() >= PRUNE_TOLERANCE;
        if !keep {
            stats.cancelled += 1;
            stats.max_cancelled_residual = stats.max_cancelled_residual.max(a.norm());
        }
        keep
    });
    Ok((Superposition { entries: acc }, stats))
}

/// A complete run: `trace[0]` is the initial superposition, the last entry is
/// entirely in final states.
#[derive(Clone, Debug)]
pub struct Run {
    pub trace: Vec<Superposition>,
}

impl Run {
    pub fn final_superposition(&self) -> &Superposition {
        self.trace.last().expect("trace holds at least the initial superposition")
    }

    pub fn steps(&self) -> usize {
        self.trace.len() - 1
    }
}

/// Steps from the blank start until every configuration is final.
pub fn run(m: &Qtm, max_steps: usize) -> Result<Run> {
    let mut trace = vec![Superposition::initial(m)];
    loop {
        let current = trace.last().expect("non-empty");
        if current.all_final(m) {
            return Ok(Run { trace });
        }
        if trace.len() > max_steps {
            return Err(Error::Timeout { steps: max_steps });
        }
        let next = step(m, current)?;
        trace.push(next);
    }
}

/// Marginal distribution of the first `k` bits of the symbol under the head.
pub fn measure_tape_prefix(s: &Superposition, k: usize) -> Result<BTreeMap<BasisString, f64>> {
    let mut dist = BTreeMap::new();
    for (config, a) in s.iter() {
        let Symbol::Bits(bits) = config.symbol_at_head() else {
            return Err(Error::Measure(format!("blank under the head in {config}")));
        };
        if k == 0 || k > bits.width() {
            return Err(Error::Range { what: "prefix length", value: k, min: 1, max: bits.width() });
        }
        *dist.entry(bits.prefix(k)).or_insert(0.0) += a.norm_sqr();
    }
    Ok(dist)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IsometryReport {
    pub configurations: usize,
    /// `max |⟨δc, δc'⟩ − [c = c']|` over the configurations checked.
    pub max_deviation: f64,
}

impl IsometryReport {
    pub fn passed(&self) -> bool {
        self.max_deviation <= TOLERANCE
    }
}

fn inner(a: &Superposition, b: &Superposition) -> Amplitude {
    a.iter().map(|(c, x)| x.conj() * b.amplitude(c)).sum()
}

/// Checks that one step sends the non-final configurations visited by a run
/// to orthonormal superpositions, so the step is invertible on the span of
/// everything the machine actually reaches.
pub fn check_reachable_isometry(m: &Qtm, max_steps: usize) -> Result<IsometryReport> {
    let r = run(m, max_steps)?;
    let configs: BTreeSet<&Configuration> =
        r.trace.iter().flat_map(|s| s.iter().map(|(c, _)| c)).filter(|c| !m.is_final(&c.state)).collect();
    let images = configs
        .iter()
        .map(|&c| step(m, &Superposition::from_entries([(c.clone(), ONE)])))
        .collect::<Result<Vec<_>>>()?;
    let mut max_deviation: f64 = 0.0;
    for (i, a) in images.iter().enumerate() {
        for (j, b) in images.iter().enumerate().skip(i) {
            let expected = if i == j { ONE } else { ZERO };
            max_deviation = max_deviation.max((inner(a, b) - expected).norm());
        }
    }
    Ok(IsometryReport { configurations: images.len(), max_deviation })
}
