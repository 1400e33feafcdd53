//! Lockstep comparison of circuit states against QTM superpositions, the
//! closed-form Deutsch states, and the promise-function verification suites.
//!
//! Mapping contract: circuit state `|Φ_k⟩` corresponds to QTM trace entry
//! `k + 1` (the machine spends its first step writing the initial register
//! value), and basis value `b` corresponds to configuration
//! `⟨PHI_k, tape {0: b}, head 0⟩`.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;

use rayon::prelude::*;
use serde::Serialize;

use crate::circuit::{build_deutsch, build_dj, measure_prefix, probability, simulate, Circuit};
use crate::error::{Error, Result};
use crate::linalg::{amp_distance, Amplitude, BasisString, StateVector, ZERO};
use crate::oracle::{classify, enumerate_promise_functions, oracle_unitary, BooleanFunction, Classification};
use crate::qtm::{
    build_deutsch_qtm, build_dj_qtm, expand_rules, measure_tape_prefix, run, Configuration, Qtm, StateLabel,
    DEFAULT_MAX_STEPS,
};
use crate::translator::translate;

/// Tolerance for the closed-form comparisons.
pub const CLOSED_FORM_TOLERANCE: f64 = 1e-12;

/// Largest arity accepted by [`dj_suite`].
pub const MAX_SUITE_ARITY: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ComplexValue {
    pub re: f64,
    pub im: f64,
}

impl From<Amplitude> for ComplexValue {
    fn from(a: Amplitude) -> Self {
        Self { re: a.re, im: a.im }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LockstepFailure {
    pub layer: usize,
    /// Register value, or the full configuration when the QTM entry does not
    /// have the single-cell `PHI_k` shape.
    pub basis: String,
    pub circuit_amp: ComplexValue,
    pub qtm_amp: ComplexValue,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LockstepReport {
    pub pass: bool,
    pub max_deviation: f64,
    pub first_failure: Option<LockstepFailure>,
}

pub fn lockstep_check(c: &Circuit, m: &Qtm) -> Result<LockstepReport> {
    lockstep_check_with_tolerance(c, m, crate::linalg::TOLERANCE)
}

pub fn lockstep_check_with_tolerance(c: &Circuit, m: &Qtm, tol: f64) -> Result<LockstepReport> {
    let layers = c.layers().len();
    if m.width() != c.width() {
        return Err(Error::Structure(format!(
            "machine width {} does not match circuit width {}",
            m.width(),
            c.width()
        )));
    }
    if m.states().len() != layers + 1 || (0..=layers).any(|k| !m.states().contains(&StateLabel::phi(k))) {
        return Err(Error::Structure(format!(
            "expected states PHI_0..PHI_{layers} for {layers} layers, machine has {:?}",
            m.states()
        )));
    }

    let states = simulate(c);
    let trace = run(m, DEFAULT_MAX_STEPS)?.trace;
    let mut report = LockstepReport { pass: true, max_deviation: 0.0, first_failure: None };
    let mut record = |layer: usize, basis: String, ca: Amplitude, qa: Amplitude| {
        let dev = amp_distance(ca, qa);
        report.max_deviation = report.max_deviation.max(dev);
        if dev > tol && report.first_failure.is_none() {
            report.pass = false;
            report.first_failure = Some(LockstepFailure { layer, basis, circuit_amp: ca.into(), qtm_amp: qa.into() });
        }
    };

    for (k, circuit_state) in states.iter().enumerate() {
        let Some(sup) = trace.get(k + 1) else {
            record(k, "<machine halted early>".into(), ZERO, ZERO);
            report.pass = false;
            report.max_deviation = f64::INFINITY;
            break;
        };
        let label = StateLabel::phi(k);
        let mut qtm_amps: BTreeMap<BasisString, Amplitude> = BTreeMap::new();
        let mut off_shape = Vec::new();
        for (config, &a) in sup.iter() {
            match single_cell(config, &label) {
                Some(b) => {
                    qtm_amps.insert(b.clone(), a);
                }
                None => off_shape.push((config.to_string(), a)),
            }
        }
        let mut bases: Vec<&BasisString> = circuit_state.iter().map(|(b, _)| b).collect();
        bases.extend(qtm_amps.keys());
        bases.sort();
        bases.dedup();
        for b in bases {
            let qa = qtm_amps.get(b).copied().unwrap_or(ZERO);
            record(k, b.to_string(), circuit_state.amplitude(b), qa);
        }
        for (config, a) in off_shape {
            record(k, config, ZERO, a);
        }
    }
    Ok(report)
}

fn single_cell<'a>(config: &'a Configuration, label: &StateLabel) -> Option<&'a BasisString> {
    if &config.state != label || config.head != 0 || config.tape.len() != 1 {
        return None;
    }
    config.tape.get(&0)
}

#[derive(Clone, Debug, Serialize)]
pub struct ClosedFormReport {
    pub function: BooleanFunction,
    pub classification: Classification,
    /// Deviation of `|Φ₂⟩` from `((−1)^{f(0)}|0⟩ + (−1)^{f(1)}|1⟩)(|0⟩ − |1⟩)/2`.
    pub phi2_deviation: f64,
    /// Sign `±` in front of the constant/balanced product form of `|Φ₂⟩`.
    pub case_split_sign: i8,
    pub case_split_deviation: f64,
    /// Deviation of `|Φ₃⟩` from `|c⟩(|0⟩ − |1⟩)/√2` up to a global sign,
    /// with `c = 0` for constant and `c = 1` for balanced `f`.
    pub phi3_deviation: f64,
    pub phi3_global_sign: i8,
    pub pass: bool,
}

fn product(top: [f64; 2], bottom: [f64; 2], scale: f64) -> StateVector {
    let entries = (0..4usize).map(|i| {
        let b = BasisString::from_index(i, 2);
        (b, Amplitude::new(scale * top[i >> 1] * bottom[i & 1], 0.0))
    });
    StateVector::from_entries(2, entries).expect("width 2")
}

/// Checks the Deutsch circuit states `|Φ₂⟩` and `|Φ₃⟩` against their closed
/// forms for an arity-1 function.
pub fn verify_closed_forms(f: &BooleanFunction) -> Result<ClosedFormReport> {
    if f.arity() != 1 {
        return Err(Error::Arity { expected: "1".into(), found: f.arity() });
    }
    let states = simulate(&build_deutsch(f)?);
    let sign = |v: bool| if v { -1.0 } else { 1.0 };
    let (s0, s1) = (sign(f.eval_index(0)), sign(f.eval_index(1)));
    let minus = [1.0, -1.0];

    let phi2 = product([s0, s1], minus, 0.5);
    let phi2_deviation = states[2].max_deviation(&phi2);

    let classification = classify(f);
    let top = if classification == Classification::Constant { [1.0, 1.0] } else { [1.0, -1.0] };
    let split = product(top, minus, 0.5 * s0);
    let case_split_deviation = states[2].max_deviation(&split);

    let c = if classification == Classification::Constant { [1.0, 0.0] } else { [0.0, 1.0] };
    let (phi3_global_sign, phi3_deviation) = [1i8, -1]
        .into_iter()
        .map(|g| (g, states[3].max_deviation(&product(c, minus, g as f64 * FRAC_1_SQRT_2))))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("two candidates");

    let pass = [phi2_deviation, case_split_deviation, phi3_deviation].iter().all(|&d| d <= CLOSED_FORM_TOLERANCE);
    Ok(ClosedFormReport {
        function: f.clone(),
        classification,
        phi2_deviation,
        case_split_sign: s0 as i8,
        case_split_deviation,
        phi3_deviation,
        phi3_global_sign,
        pass,
    })
}

/// `U_f · U_f = I` with exact entry comparison.
pub fn verify_uf_involution(f: &BooleanFunction) -> Result<bool> {
    if f.arity() > crate::oracle::MAX_ENUM_ARITY {
        return Err(Error::Size { what: "arity", value: f.arity(), max: crate::oracle::MAX_ENUM_ARITY });
    }
    let u = oracle_unitary(f);
    Ok(u.matmul(&u)?.is_exact_identity())
}

/// Both models run on one function.
#[derive(Clone, Debug, Serialize)]
pub struct CaseReport {
    pub function: BooleanFunction,
    pub classification: Classification,
    pub circuit_distribution: BTreeMap<String, f64>,
    pub qtm_distribution: BTreeMap<String, f64>,
    /// Outcome carrying all the probability, if there is one.
    pub top_register: Option<String>,
    pub models_agree: bool,
    /// Constant ⟹ `P(0…0) = 1`; balanced ⟹ `P(0…0) = 0`; vacuous otherwise.
    pub verdict_correct: bool,
    pub lockstep_hand_written: LockstepReport,
    pub lockstep_translated: LockstepReport,
    pub pass: bool,
}

fn stringify(dist: &BTreeMap<BasisString, f64>) -> BTreeMap<String, f64> {
    dist.iter().map(|(b, p)| (b.to_string(), *p)).collect()
}

/// Runs the circuit, the hand-written machine and the translated machine for
/// `f`, and compares them. Arity-1 functions use the Deutsch machine; larger
/// arities use the expanded Deutsch–Jozsa machine.
pub fn check_function(f: &BooleanFunction, tol: f64) -> Result<CaseReport> {
    let arity = f.arity();
    let circuit = build_dj(f)?;
    let hand = if arity == 1 { build_deutsch_qtm(f)? } else { expand_rules(&build_dj_qtm(f)?) };
    let translated = translate(&circuit)?;

    let final_state = simulate(&circuit).pop().expect("three layers");
    let circuit_dist = measure_prefix(&final_state, arity)?;
    let qtm_run = run(&hand, DEFAULT_MAX_STEPS)?;
    let qtm_dist = measure_tape_prefix(qtm_run.final_superposition(), arity)?;

    let models_agree = crate::circuit::distribution_distance(&circuit_dist, &qtm_dist) <= tol;
    let zeros = BasisString::zeros(arity);
    let classification = classify(f);
    let verdict = |d: &BTreeMap<BasisString, f64>| match classification {
        Classification::Constant => (probability(d, &zeros) - 1.0).abs() <= tol,
        Classification::Balanced => probability(d, &zeros).abs() <= tol,
        Classification::Neither => true,
    };
    let verdict_correct = verdict(&circuit_dist) && verdict(&qtm_dist);
    let top_register = circuit_dist.iter().find(|(_, &p)| (p - 1.0).abs() <= tol).map(|(b, _)| b.to_string());

    let lockstep_hand_written = lockstep_check_with_tolerance(&circuit, &hand, tol)?;
    let lockstep_translated = lockstep_check_with_tolerance(&circuit, &translated, tol)?;
    let pass = models_agree && verdict_correct && lockstep_hand_written.pass && lockstep_translated.pass;
    Ok(CaseReport {
        function: f.clone(),
        classification,
        circuit_distribution: stringify(&circuit_dist),
        qtm_distribution: stringify(&qtm_dist),
        top_register,
        models_agree,
        verdict_correct,
        lockstep_hand_written,
        lockstep_translated,
        pass,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub pass: bool,
    pub passed: usize,
    pub total: usize,
    pub max_deviation: f64,
    pub cases: Vec<CaseReport>,
}

fn suite(functions: Vec<BooleanFunction>, tol: f64) -> Result<SuiteReport> {
    let cases = functions.par_iter().map(|f| check_function(f, tol)).collect::<Result<Vec<_>>>()?;
    let passed = cases.iter().filter(|c| c.pass).count();
    let max_deviation = cases
        .iter()
        .flat_map(|c| [c.lockstep_hand_written.max_deviation, c.lockstep_translated.max_deviation])
        .fold(0.0, f64::max);
    Ok(SuiteReport { pass: passed == cases.len(), passed, total: cases.len(), max_deviation, cases })
}

/// All four arity-1 functions.
pub fn deutsch_suite(tol: f64) -> Result<SuiteReport> {
    suite(enumerate_promise_functions(1)?, tol)
}

/// Every promise function of arity `2..=max_arity` (just arity 1 when
/// `max_arity` is 1).
pub fn dj_suite(max_arity: usize, tol: f64) -> Result<SuiteReport> {
    if max_arity == 0 {
        return Err(Error::Range { what: "max arity", value: 0, min: 1, max: MAX_SUITE_ARITY });
    }
    if max_arity > MAX_SUITE_ARITY {
        return Err(Error::Size { what: "max arity", value: max_arity, max: MAX_SUITE_ARITY });
    }
    let mut fs = Vec::new();
    for m in max_arity.min(2)..=max_arity {
        fs.extend(enumerate_promise_functions(m)?);
    }
    suite(fs, tol)
}
