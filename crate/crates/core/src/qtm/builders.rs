//! Hand-written Deutsch and Deutsch–Jozsa machines and the width extension.
//!
//! All machines use `Q = {PHI_0, PHI_1, PHI_2, PHI_3}`, start in `PHI_0`,
//! halt in `PHI_3` and never move the head. The oracle `f` is baked into the
//! `PHI_1` rules; the tape starts blank.

use std::collections::BTreeSet;
use std::f64::consts::FRAC_1_SQRT_2;

use super::{Branch, DeltaRule, Move, PatternRule, Qtm, StateLabel, Symbol, WriteTarget};
use crate::error::{Error, Result};
use crate::linalg::{Amplitude, BasisString, StateVector, UnitaryMatrix, ONE};
use crate::oracle::BooleanFunction;

/// Above this register width the `PHI_1`/`PHI_2` rules of the
/// Deutsch–Jozsa machine are stored as patterns instead of per symbol.
pub const EAGER_WIDTH_LIMIT: usize = 8;

fn real(x: f64) -> Amplitude {
    Amplitude::new(x, 0.0)
}

fn bits(s: &str) -> BasisString {
    s.parse().expect("literal bit string")
}

fn phi(k: usize) -> StateLabel {
    StateLabel::phi(k)
}

fn stage_states() -> [StateLabel; 4] {
    [phi(0), phi(1), phi(2), phi(3)]
}

fn stage_machine(width: usize, rules: Vec<DeltaRule>) -> Result<Qtm> {
    Qtm::new(width, stage_states(), phi(0), [phi(3)], rules)
}

/// `(|0⟩ ± |1⟩)/√2`
fn h_ket(bit: u8) -> WriteTarget {
    let s = if bit == 0 { 1.0 } else { -1.0 };
    WriteTarget::qubit(real(FRAC_1_SQRT_2), real(s * FRAC_1_SQRT_2))
}

fn ket(b: u8) -> WriteTarget {
    WriteTarget::basis(BasisString::from_index(b as usize, 1))
}

fn oracle_branch(x: &BasisString, y: u8, f: &BooleanFunction) -> Branch {
    let fx = f.eval(x) as u8;
    Branch::basis(x.concat(&BasisString::from_index((y ^ fx) as usize, 1)), phi(2), Move::N, ONE)
}

/// `H(x) ⊗ |y⟩` written with amplitude 1.
fn hadamard_branch(x: &BasisString, y: u8) -> Branch {
    let hx = UnitaryMatrix::hadamard_n(x.width()).apply(&StateVector::basis(x.clone())).expect("matching width");
    Branch::new(WriteTarget::from_state(&hx).tensor(&ket(y)), phi(3), Move::N, ONE)
}

/// Grouping of the `PHI_0` rules, which apply `H ⊗ H` to `01`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HadamardGrouping {
    /// Four branches `±½`, one per register value.
    Expanded,
    /// Top qubit on the tape: `(|0⟩+|1⟩)/√2 ⊗ b` with amplitude `±1/√2`.
    TopFactored,
    /// Bottom qubit on the tape: `a ⊗ (|0⟩−|1⟩)/√2` with amplitude `1/√2`.
    BottomFactored,
    /// Whole superposition on the tape with amplitude 1.
    Joint,
}

/// Grouping of the `PHI_2` rules, which apply `H ⊗ I`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FinalGrouping {
    /// Two branches `±1/√2` per source.
    Expanded,
    /// `H(a) ⊗ x` on the tape with amplitude 1.
    Factored,
}

/// The Deutsch machine with expanded rules.
pub fn build_deutsch_qtm(f: &BooleanFunction) -> Result<Qtm> {
    build_deutsch_qtm_with(f, HadamardGrouping::Expanded, FinalGrouping::Expanded)
}

/// The Deutsch machine with a chosen rule grouping; every grouping expands to
/// the same rule set.
pub fn build_deutsch_qtm_with(f: &BooleanFunction, hadamard: HadamardGrouping, last: FinalGrouping) -> Result<Qtm> {
    if f.arity() != 1 {
        return Err(Error::Arity { expected: "1".into(), found: f.arity() });
    }
    let half = real(0.5);
    let r = real(FRAC_1_SQRT_2);
    let seed = bits("01");

    let mut rules =
        vec![DeltaRule::new(Symbol::Blank, phi(0), vec![Branch::basis(seed.clone(), phi(0), Move::N, ONE)])];

    let layer1 = match hadamard {
        HadamardGrouping::Expanded => vec![
            Branch::basis(bits("00"), phi(1), Move::N, half),
            Branch::basis(bits("01"), phi(1), Move::N, -half),
            Branch::basis(bits("10"), phi(1), Move::N, half),
            Branch::basis(bits("11"), phi(1), Move::N, -half),
        ],
        HadamardGrouping::TopFactored => vec![
            Branch::new(h_ket(0).tensor(&ket(0)), phi(1), Move::N, r),
            Branch::new(h_ket(0).tensor(&ket(1)), phi(1), Move::N, -r),
        ],
        HadamardGrouping::BottomFactored => vec![
            Branch::new(ket(0).tensor(&h_ket(1)), phi(1), Move::N, r),
            Branch::new(ket(1).tensor(&h_ket(1)), phi(1), Move::N, r),
        ],
        HadamardGrouping::Joint => {
            vec![Branch::new(h_ket(0).tensor(&h_ket(1)), phi(1), Move::N, ONE)]
        }
    };
    rules.push(DeltaRule::new(Symbol::Bits(seed), phi(0), layer1));

    for x in 0..2u8 {
        let xs = BasisString::from_index(x as usize, 1);
        for y in 0..2u8 {
            let read = xs.concat(&BasisString::from_index(y as usize, 1));
            rules.push(DeltaRule::new(read.clone().into(), phi(1), vec![oracle_branch(&xs, y, f)]));
        }
    }

    for a in 0..2u8 {
        for x in 0..2u8 {
            let read = BasisString::new(vec![a, x])?;
            let branches = match last {
                FinalGrouping::Expanded => {
                    let sign = if a == 1 { -1.0 } else { 1.0 };
                    vec![
                        Branch::basis(BasisString::new(vec![0, x])?, phi(3), Move::N, r),
                        Branch::basis(BasisString::new(vec![1, x])?, phi(3), Move::N, r * sign),
                    ]
                }
                FinalGrouping::Factored => {
                    vec![Branch::new(h_ket(a).tensor(&ket(x)), phi(3), Move::N, ONE)]
                }
            };
            rules.push(DeltaRule::new(read.into(), phi(2), branches));
        }
    }
    stage_machine(2, rules)
}

/// `(|0⟩ + |1⟩)^{⊗k}` with unit weights, built one factor at a time.
fn uniform_unnormalized(k: usize) -> WriteTarget {
    let plus = WriteTarget::qubit(ONE, ONE);
    (1..k).fold(plus.clone(), |acc, _| acc.tensor(&plus))
}

/// Deutsch–Jozsa machine on `n = arity + 1` register bits, in compact form:
/// the `PHI_0` rule writes `(|0⟩+|1⟩)^{n−1}b` with amplitude `±1/√2^n`, and
/// the `PHI_2` rules write `H(x)b` with amplitude 1.
pub fn build_dj_qtm(f: &BooleanFunction) -> Result<Qtm> {
    let n = f.arity() + 1;
    let seed = BasisString::from_index(1, n);
    let amp = real(2f64.powf(-(n as f64) / 2.0));
    let spread = uniform_unnormalized(n - 1);

    let mut rules = vec![
        DeltaRule::new(Symbol::Blank, phi(0), vec![Branch::basis(seed.clone(), phi(0), Move::N, ONE)]),
        DeltaRule::new(
            Symbol::Bits(seed),
            phi(0),
            vec![
                Branch::new(spread.tensor(&ket(0)), phi(1), Move::N, amp),
                Branch::new(spread.tensor(&ket(1)), phi(1), Move::N, -amp),
            ],
        ),
    ];

    if n <= EAGER_WIDTH_LIMIT {
        for x in BasisString::all(n - 1) {
            for y in 0..2u8 {
                let read = x.concat(&BasisString::from_index(y as usize, 1));
                rules.push(DeltaRule::new(read.clone().into(), phi(1), vec![oracle_branch(&x, y, f)]));
                rules.push(DeltaRule::new(read.into(), phi(2), vec![hadamard_branch(&x, y)]));
            }
        }
        return stage_machine(n, rules);
    }

    let split = |read: &BasisString| (read.prefix(read.width() - 1), read.bit(read.width() - 1));
    let oracle = f.clone();
    let patterns = vec![
        PatternRule::new(phi(1), "x y ↦ x (y ⊕ f(x))", move |read| {
            let (x, y) = split(read);
            Some(vec![oracle_branch(&x, y, &oracle)])
        }),
        PatternRule::new(phi(2), "x y ↦ H(x) y", move |read| {
            let (x, y) = split(read);
            Some(vec![hadamard_branch(&x, y)])
        }),
    ];
    stage_machine(n, rules)?.with_patterns(patterns)
}

fn structure_error(msg: impl Into<String>) -> Error {
    Error::Structure(msg.into())
}

/// Extends a width-`n` Deutsch–Jozsa machine to width `n + 1` for an
/// arity-`n` function.
///
/// The new `PHI_0` rule inserts an unnormalized `(|0⟩+|1⟩)` factor before the
/// last register bit and scales the amplitude by `1/√2`. Each new `PHI_2`
/// rule on `x x_n b` is the old rule on `x b` with `H(x_n)` inserted at the
/// same position, using `H(y₁…y_m) = H(y₁…y_{m−1}) H(y_m)`. The `PHI_1` rules
/// are rebuilt for `f_new`.
pub fn extend_dj_qtm(m: &Qtm, f_new: &BooleanFunction) -> Result<Qtm> {
    let n = m.width();
    if f_new.arity() != n {
        return Err(Error::Arity { expected: n.to_string(), found: f_new.arity() });
    }
    let m = m.materialize();
    let expected: BTreeSet<StateLabel> = stage_states().into_iter().collect();
    if m.states() != &expected || m.start() != &phi(0) || m.finals() != &BTreeSet::from([phi(3)]) {
        return Err(structure_error("expected Q = {PHI_0..PHI_3}, start PHI_0, F = {PHI_3}"));
    }

    let seed = BasisString::from_index(1, n);
    let init = m
        .rule(&Symbol::Blank, &phi(0))
        .ok_or_else(|| structure_error("no initialization rule on the blank in PHI_0"))?;
    let init_succ = init.successors();
    let writes_seed = init_succ.len() == 1
        && matches!(init_succ.iter().next(), Some((t, a))
            if *t == (seed.clone(), phi(0), Move::N) && (a - ONE).norm() <= 1e-12);
    if !writes_seed {
        return Err(structure_error(format!("initialization rule does not write the seed {seed}")));
    }
    let spread = m
        .rule(&Symbol::Bits(seed.clone()), &phi(0))
        .ok_or_else(|| structure_error(format!("no PHI_0 rule for the seed {seed}")))?;
    if spread.branches.iter().any(|b| b.next != phi(1) || b.movement != Move::N) {
        return Err(structure_error("PHI_0 seed rule must lead to PHI_1 without moving"));
    }

    let new_seed = BasisString::from_index(1, n + 1);
    let r = FRAC_1_SQRT_2;
    let mut rules = vec![
        DeltaRule::new(Symbol::Blank, phi(0), vec![Branch::basis(new_seed.clone(), phi(0), Move::N, ONE)]),
        DeltaRule::new(
            Symbol::Bits(new_seed),
            phi(0),
            spread
                .branches
                .iter()
                .map(|b| {
                    let write = b.write.insert_qubit(n - 1, ONE, ONE);
                    Branch::new(write, phi(1), Move::N, b.amplitude * r)
                })
                .collect(),
        ),
    ];

    for x in BasisString::all(n) {
        for y in 0..2u8 {
            let read = x.concat(&BasisString::from_index(y as usize, 1));
            rules.push(DeltaRule::new(read.into(), phi(1), vec![oracle_branch(&x, y, f_new)]));
        }
    }

    for read in BasisString::all(n + 1) {
        let x_n = read.bit(n - 1);
        let old_read = BasisString::new([&read.bits()[..n - 1], &read.bits()[n..]].concat())?;
        let old = m
            .rule(&Symbol::Bits(old_read.clone()), &phi(2))
            .ok_or_else(|| structure_error(format!("no PHI_2 rule for {old_read}")))?;
        if old.branches.iter().any(|b| b.next != phi(3) || b.movement != Move::N) {
            return Err(structure_error("PHI_2 rules must lead to PHI_3 without moving"));
        }
        let (a0, a1) = if x_n == 0 { (real(r), real(r)) } else { (real(r), real(-r)) };
        let branches = old
            .branches
            .iter()
            .map(|b| Branch::new(b.write.insert_qubit(n - 1, a0, a1), phi(3), Move::N, b.amplitude))
            .collect();
        rules.push(DeltaRule::new(read.into(), phi(2), branches));
    }
    stage_machine(n + 1, rules)
}
