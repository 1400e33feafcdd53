//! Rule-file and trace JSON, and the `δ(read, state, write, next, move) = α`
//! text form.

use serde::{Deserialize, Serialize};

use super::{Branch, DeltaRule, Move, Qtm, StateLabel, Superposition, Symbol, WriteTarget};
use crate::error::Result;
use crate::linalg::{Amplitude, BasisString};

#[derive(Debug, Serialize, Deserialize)]
pub struct RuleFile {
    pub width: usize,
    pub states: Vec<StateLabel>,
    pub start: StateLabel,
    pub finals: Vec<StateLabel>,
    pub rules: Vec<RuleEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RuleEntry {
    pub read: Symbol,
    pub state: StateLabel,
    pub branches: Vec<BranchEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct BranchEntry {
    pub write: Vec<TermEntry>,
    pub next: StateLabel,
    #[serde(rename = "move")]
    pub movement: Move,
    pub amp_re: f64,
    pub amp_im: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TermEntry {
    pub bits: BasisString,
    pub weight_re: f64,
    pub weight_im: f64,
}

/// Serializes through `serde_json::Value`, whose maps keep keys sorted.
pub(crate) fn canonical_json<T: Serialize>(value: &T, pretty: bool) -> String {
    let v = serde_json::to_value(value).expect("serializable");
    if pretty {
        serde_json::to_string_pretty(&v).expect("value serializes")
    } else {
        serde_json::to_string(&v).expect("value serializes")
    }
}

impl Qtm {
    pub fn to_rule_file(&self) -> RuleFile {
        let m = self.materialize();
        let rules = m
            .rules()
            .map(|r| RuleEntry {
                read: r.read.clone(),
                state: r.state.clone(),
                branches: r
                    .branches
                    .iter()
                    .map(|b| BranchEntry {
                        write: b
                            .write
                            .terms()
                            .iter()
                            .map(|(bits, w)| TermEntry { bits: bits.clone(), weight_re: w.re, weight_im: w.im })
                            .collect(),
                        next: b.next.clone(),
                        movement: b.movement,
                        amp_re: b.amplitude.re,
                        amp_im: b.amplitude.im,
                    })
                    .collect(),
            })
            .collect();
        RuleFile {
            width: m.width,
            states: m.states.iter().cloned().collect(),
            start: m.start.clone(),
            finals: m.finals.iter().cloned().collect(),
            rules,
        }
    }

    pub fn from_rule_file(file: RuleFile) -> Result<Qtm> {
        let mut rules = Vec::with_capacity(file.rules.len());
        for r in file.rules {
            let mut branches = Vec::with_capacity(r.branches.len());
            for b in r.branches {
                let terms = b.write.into_iter().map(|t| (t.bits, Amplitude::new(t.weight_re, t.weight_im))).collect();
                branches.push(Branch::new(
                    WriteTarget::new(terms)?,
                    b.next,
                    b.movement,
                    Amplitude::new(b.amp_re, b.amp_im),
                ));
            }
            rules.push(DeltaRule::new(r.read, r.state, branches));
        }
        Qtm::new(file.width, file.states, file.start, file.finals, rules)
    }

    /// Deterministic rule-file JSON; patterns are materialized first.
    pub fn to_rule_json(&self) -> String {
        canonical_json(&self.to_rule_file(), true)
    }

    pub fn from_rule_json(s: &str) -> Result<Qtm> {
        Self::from_rule_file(serde_json::from_str(s)?)
    }
}

#[derive(Serialize)]
struct TapeCell<'a> {
    pos: i64,
    bits: &'a BasisString,
}

#[derive(Serialize)]
struct ConfigEntry<'a> {
    state: &'a StateLabel,
    head: i64,
    tape: Vec<TapeCell<'a>>,
    amp_re: f64,
    amp_im: f64,
}

/// Trace as a JSON array of superpositions, each sorted by state label then
/// tape contents.
pub fn trace_to_json(trace: &[Superposition]) -> String {
    let out: Vec<Vec<ConfigEntry<'_>>> = trace
        .iter()
        .map(|s| {
            s.iter()
                .map(|(c, a)| ConfigEntry {
                    state: &c.state,
                    head: c.head,
                    tape: c.tape.iter().map(|(&pos, bits)| TapeCell { pos, bits }).collect(),
                    amp_re: a.re,
                    amp_im: a.im,
                })
                .collect()
        })
        .collect();
    canonical_json(&out, false)
}

/// Formats a real number, recognizing `±2^{-k/2}` exactly as `1`, `1/√2`,
/// `1/2`, `1/√8`, `1/4`, …
fn format_real(x: f64) -> String {
    let sign = if x < 0.0 { "-" } else { "" };
    let mag = x.abs();
    for k in 0..=40u32 {
        if (mag - 2f64.powf(-(k as f64) / 2.0)).abs() < 1e-12 {
            let body = match k {
                0 => "1".to_string(),
                1 => "1/√2".to_string(),
                _ if k % 2 == 0 => format!("1/{}", 1u64 << (k / 2)),
                _ => format!("1/√{}", 1u64 << k),
            };
            return format!("{sign}{body}");
        }
    }
    format!("{x}")
}

pub fn format_amplitude(a: Amplitude) -> String {
    const EPS: f64 = 1e-12;
    match (a.re.abs() < EPS, a.im.abs() < EPS) {
        (_, true) => format_real(a.re),
        (true, false) => format!("{}i", format_real(a.im)),
        (false, false) => format!("({}{:+}i)", a.re, a.im),
    }
}

fn format_write(w: &WriteTarget) -> String {
    if w.is_basis() {
        return w.terms()[0].0.to_string();
    }
    let mut out = String::from("(");
    for (i, (bits, weight)) in w.terms().iter().enumerate() {
        let coeff = format_amplitude(*weight);
        let (sep, coeff) = match coeff.strip_prefix('-') {
            Some(rest) => (if i == 0 { "-" } else { " - " }, rest.to_string()),
            None => (if i == 0 { "" } else { " + " }, coeff),
        };
        out.push_str(sep);
        if coeff != "1" {
            out.push_str(&coeff);
        }
        out.push_str(&format!("|{bits}⟩"));
    }
    out.push(')');
    out
}

/// One line per branch, `δ(read, state, write, next, move) = α`, rules
/// ordered by source state and then read symbol (blank first).
pub fn delta_text(m: &Qtm) -> String {
    let m = m.materialize();
    let mut rules: Vec<&DeltaRule> = m.rules().collect();
    rules.sort_by(|a, b| (&a.state, &a.read).cmp(&(&b.state, &b.read)));
    let mut out = String::new();
    for r in rules {
        for b in &r.branches {
            out.push_str(&format!(
                "δ({}, {}, {}, {}, {}) = {}\n",
                r.read,
                r.state,
                format_write(&b.write),
                b.next,
                b.movement,
                format_amplitude(b.amplitude)
            ));
        }
    }
    out
}
