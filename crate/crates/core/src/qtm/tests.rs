use std::f64::consts::FRAC_1_SQRT_2;

use super::*;
use crate::oracle::{enumerate_promise_functions, BooleanFunction};

fn f(s: &str) -> BooleanFunction {
    s.parse().unwrap()
}

fn bs(s: &str) -> BasisString {
    s.parse().unwrap()
}

fn sym(s: &str) -> Symbol {
    s.parse().unwrap()
}

fn real(x: f64) -> Amplitude {
    Amplitude::new(x, 0.0)
}

fn phi(k: usize) -> StateLabel {
    StateLabel::phi(k)
}

fn successors_of(m: &Qtm, read: &str, k: usize) -> BTreeMap<Target, Amplitude> {
    m.rule(&sym(read), &phi(k)).unwrap().successors()
}

fn assert_amp(a: Amplitude, want: f64) {
    assert!((a - real(want)).norm() < 1e-12, "{a} != {want}");
}

#[test]
fn symbol_parsing() {
    assert_eq!(sym("□"), Symbol::Blank);
    assert_eq!(sym("_"), Symbol::Blank);
    assert_eq!(sym("01"), Symbol::Bits(bs("01")));
    assert!("0x".parse::<Symbol>().is_err());
    assert!(Symbol::Blank < sym("0"));
}

#[test]
fn machine_validation() {
    let ok = DeltaRule::new(Symbol::Blank, phi(0), vec![Branch::basis(bs("0"), phi(1), Move::N, ONE)]);
    assert!(Qtm::new(1, [phi(0), phi(1)], phi(0), [phi(1)], [ok.clone()]).is_ok());
    assert!(Qtm::new(1, [phi(0)], phi(1), [phi(0)], []).is_err());
    assert!(Qtm::new(1, [phi(0)], phi(0), [phi(1)], []).is_err());
    assert!(Qtm::new(1, [phi(0)], phi(0), [], [ok.clone()]).is_err(), "unknown target state");
    assert!(Qtm::new(2, [phi(0), phi(1)], phi(0), [phi(1)], [ok.clone()]).is_err(), "width");
    assert!(Qtm::new(1, [phi(0), phi(1)], phi(0), [phi(1)], [ok.clone(), ok]).is_err(), "duplicate");
}

#[test]
fn expand_joint_hadamard_rule_gives_rules_7_to_10() {
    let m = build_deutsch_qtm_with(&f("01"), HadamardGrouping::Joint, FinalGrouping::Expanded).unwrap();
    let compact = m.rule(&sym("01"), &phi(0)).unwrap().into_owned();
    assert_eq!(compact.branches.len(), 1);
    assert_amp(compact.branches[0].amplitude, 1.0);

    let expanded = expand_rules(&m);
    let rule = expanded.rule(&sym("01"), &phi(0)).unwrap();
    assert!(rule.is_expanded());
    let got: Vec<(String, f64)> =
        rule.branches.iter().map(|b| (b.write.terms()[0].0.to_string(), b.amplitude.re)).collect();
    let want = [("00", 0.5), ("01", -0.5), ("10", 0.5), ("11", -0.5)];
    assert_eq!(got.len(), 4);
    for ((gb, ga), (wb, wa)) in got.iter().zip(want) {
        assert_eq!(gb, wb);
        assert!((ga - wa).abs() < 1e-12);
    }
}

#[test]
fn expand_spread_rule_into_uniform_branches() {
    for arity in 1..=4 {
        let n = arity + 1;
        let m = build_dj_qtm(&BooleanFunction::constant(arity, false).unwrap()).unwrap();
        let seed = BasisString::from_index(1, n);
        let rule = m.rule(&Symbol::Bits(seed.clone()), &phi(0)).unwrap().into_owned();
        let amp = 2f64.powf(-(n as f64) / 2.0);
        assert_eq!(rule.branches.len(), 2);
        assert_amp(rule.branches[0].amplitude, amp);
        assert_amp(rule.branches[1].amplitude, -amp);

        let expanded = expand_rules(&m).rule(&Symbol::Bits(seed), &phi(0)).unwrap().into_owned();
        assert_eq!(expanded.branches.len(), 1 << n);
        let ending_in_zero: Vec<&Branch> =
            expanded.branches.iter().filter(|b| b.write.terms()[0].0.bit(n - 1) == 0).collect();
        assert_eq!(ending_in_zero.len(), 1 << (n - 1));
        for b in ending_in_zero {
            assert_amp(b.amplitude, amp);
        }
    }
}

#[test]
fn expanding_expanded_machine_is_identity() {
    let m = build_deutsch_qtm(&f("10")).unwrap();
    let e = expand_rules(&m);
    assert_eq!(m.rules().collect::<Vec<_>>(), e.rules().collect::<Vec<_>>());
}

#[test]
fn compact_then_expand_round_trips() {
    for t in ["00", "01", "0110", "01011010"] {
        let m = expand_rules(&build_dj_qtm(&f(t)).unwrap());
        let back = expand_rules(&compact_rules(&m));
        for (a, b) in m.rules().zip(back.rules()) {
            assert_eq!(a.read, b.read);
            let (sa, sb) = (a.successors(), b.successors());
            assert_eq!(sa.keys().collect::<Vec<_>>(), sb.keys().collect::<Vec<_>>());
            for (x, y) in sa.values().zip(sb.values()) {
                assert!((x - y).norm() < 1e-12);
            }
        }
    }
}

#[test]
fn compact_deutsch_seed_rule_matches_joint_form() {
    let m = compact_rules(&build_deutsch_qtm(&f("00")).unwrap());
    let rule = m.rule(&sym("01"), &phi(0)).unwrap();
    assert_eq!(rule.branches.len(), 1);
    assert_amp(rule.branches[0].amplitude, 1.0);
    assert!((rule.branches[0].write.norm_sqr() - 1.0).abs() < 1e-12);
}

#[test]
fn local_normalization_on_deutsch_sources() {
    let m = build_deutsch_qtm(&f("01")).unwrap();
    let report = check_local_normalization(&m);
    assert!(report.passed());
    assert_eq!(report.sources_checked, 1 + 1 + 4 + 4);

    let seed = m.rule(&sym("01"), &phi(0)).unwrap();
    assert!((seed.outgoing_norm_sqr() - 4.0 * 0.25).abs() < 1e-15);
    let last = m.rule(&sym("01"), &phi(2)).unwrap();
    assert!((last.outgoing_norm_sqr() - 1.0).abs() < 1e-15);
}

#[test]
fn local_normalization_reports_lone_half_branch() {
    let rule = DeltaRule::new(Symbol::Blank, phi(0), vec![Branch::basis(bs("0"), phi(1), Move::N, real(0.5))]);
    let m = Qtm::new(1, [phi(0), phi(1)], phi(0), [phi(1)], [rule]).unwrap();
    let report = check_local_normalization(&m);
    assert_eq!(report.violations.len(), 1);
    assert_eq!(report.violations[0].read, Symbol::Blank);
    assert!((report.violations[0].sum - 0.25).abs() < 1e-15);
}

#[test]
fn local_normalization_for_all_builders() {
    for arity in 1..=3 {
        for g in enumerate_promise_functions(arity).unwrap() {
            assert!(check_local_normalization(&build_dj_qtm(&g).unwrap()).passed());
            if arity == 1 {
                assert!(check_local_normalization(&build_deutsch_qtm(&g).unwrap()).passed());
            }
        }
    }
}

#[test]
fn deutsch_rule_totals_by_source() {
    let m = build_deutsch_qtm(&f("11")).unwrap();
    let count = |state: usize| -> usize { m.rules().filter(|r| r.state == phi(state)).map(|r| r.branches.len()).sum() };
    // blank rule + four Hadamard branches in PHI_0
    assert_eq!(count(0), 1 + 4);
    assert_eq!(count(1), 4);
    assert_eq!(count(2), 8);
}

#[test]
fn deutsch_oracle_rules_for_constant_zero() {
    let m = build_deutsch_qtm(&f("00")).unwrap();
    for (read, write) in [("00", "00"), ("01", "01"), ("10", "10"), ("11", "11")] {
        let succ = successors_of(&m, read, 1);
        assert_eq!(succ.len(), 1);
        let ((bits, next, mv), a) = succ.into_iter().next().unwrap();
        assert_eq!(bits.to_string(), write);
        assert_eq!((next, mv), (phi(2), Move::N));
        assert_amp(a, 1.0);
    }
}

#[test]
fn dj_oracle_rule_writes_function_value() {
    let g = f("01101001");
    let m = build_dj_qtm(&g).unwrap();
    for x in BasisString::all(3) {
        for y in 0..2u8 {
            let read = x.concat(&BasisString::from_index(y as usize, 1));
            let succ = m.rule(&Symbol::Bits(read), &phi(1)).unwrap().successors();
            let expected = x.concat(&BasisString::from_index((y ^ g.eval(&x) as u8) as usize, 1));
            assert_eq!(succ.keys().next().unwrap().0, expected);
        }
    }
}

#[test]
fn step_from_seed_spreads_four_ways() {
    let m = build_deutsch_qtm(&f("01")).unwrap();
    let s = Superposition::from_entries([(Configuration::at_origin(phi(0), bs("01")), ONE)]);
    let next = step(&m, &s).unwrap();
    assert_eq!(next.len(), 4);
    for (tape, a) in [("00", 0.5), ("01", -0.5), ("10", 0.5), ("11", -0.5)] {
        assert_amp(next.amplitude(&Configuration::at_origin(phi(1), bs(tape))), a);
    }
}

#[test]
fn step_oracle_constant_one_swaps_bottom_bit() {
    let m = build_deutsch_qtm(&f("11")).unwrap();
    let amps = [("00", 0.5), ("01", -0.5), ("10", 0.5), ("11", -0.5)];
    let s = Superposition::from_entries(amps.iter().map(|(t, a)| (Configuration::at_origin(phi(1), bs(t)), real(*a))));
    let next = step(&m, &s).unwrap();
    for (from, to) in [("00", "01"), ("01", "00"), ("10", "11"), ("11", "10")] {
        let a = s.amplitude(&Configuration::at_origin(phi(1), bs(from)));
        assert_eq!(next.amplitude(&Configuration::at_origin(phi(2), bs(to))), a);
    }
}

#[test]
fn final_superposition_is_a_fixed_point() {
    let m = build_deutsch_qtm(&f("01")).unwrap();
    let s = Superposition::from_entries([
        (Configuration::at_origin(phi(3), bs("10")), real(FRAC_1_SQRT_2)),
        (Configuration::at_origin(phi(3), bs("11")), real(-FRAC_1_SQRT_2)),
    ]);
    assert_eq!(step(&m, &s).unwrap(), s);
}

#[test]
fn run_halts_in_four_steps() {
    for arity in 1..=3 {
        for g in enumerate_promise_functions(arity).unwrap() {
            let r = run(&build_dj_qtm(&g).unwrap(), DEFAULT_MAX_STEPS).unwrap();
            assert_eq!(r.steps(), 4);
            assert!(r.final_superposition().iter().all(|(c, _)| c.state == phi(3)));
            for s in &r.trace {
                assert!((s.norm_sqr() - 1.0).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn deutsch_machine_answers() {
    for (t, outcome) in [("00", "0"), ("11", "0"), ("01", "1"), ("10", "1")] {
        let r = run(&build_deutsch_qtm(&f(t)).unwrap(), DEFAULT_MAX_STEPS).unwrap();
        let d = measure_tape_prefix(r.final_superposition(), 1).unwrap();
        assert_eq!(d.len(), 1, "{t}");
        assert!((d[&bs(outcome)] - 1.0).abs() < 1e-9, "{t}");
    }
}

#[test]
fn dj_width_three_constant_reads_zero_zero() {
    let r = run(&build_dj_qtm(&f("0000")).unwrap(), DEFAULT_MAX_STEPS).unwrap();
    let d = measure_tape_prefix(r.final_superposition(), 2).unwrap();
    assert!((d[&bs("00")] - 1.0).abs() < 1e-9);
}

#[test]
fn measure_uniform_superposition() {
    let m = build_deutsch_qtm(&f("01")).unwrap();
    let r = run(&m, DEFAULT_MAX_STEPS).unwrap();
    let d = measure_tape_prefix(&r.trace[2], 1).unwrap();
    assert!((d[&bs("0")] - 0.5).abs() < 1e-12);
    assert!((d[&bs("1")] - 0.5).abs() < 1e-12);
}

#[test]
fn measure_rejects_blank_head() {
    let m = build_deutsch_qtm(&f("01")).unwrap();
    let r = run(&m, DEFAULT_MAX_STEPS).unwrap();
    assert!(matches!(measure_tape_prefix(&r.trace[0], 1), Err(Error::Measure(_))));
    assert!(matches!(measure_tape_prefix(&r.trace[4], 3), Err(Error::Range { .. })));
}

#[test]
fn missing_rule_is_stuck() {
    let rule = DeltaRule::new(Symbol::Blank, phi(0), vec![Branch::basis(bs("1"), phi(1), Move::N, ONE)]);
    let m = Qtm::new(1, [phi(0), phi(1), phi(2)], phi(0), [phi(2)], [rule]).unwrap();
    let err = run(&m, 10).unwrap_err();
    assert!(matches!(err, Error::Stuck(ref c) if c.contains("PHI_1")), "{err}");
}

#[test]
fn looping_machine_times_out() {
    let rule = DeltaRule::new(Symbol::Blank, phi(0), vec![Branch::basis(bs("1"), phi(0), Move::R, ONE)]);
    let m = Qtm::new(1, [phi(0), phi(1)], phi(0), [phi(1)], [rule]).unwrap();
    assert!(matches!(run(&m, 25), Err(Error::Timeout { steps: 25 })));
}

/// Writes 1 and moves right, writes 0 and moves left, then reads back the 1
/// in superposition with a phase flip on the way.
#[test]
fn head_moves_left_and_right() {
    let h = real(FRAC_1_SQRT_2);
    let q = |s: &str| StateLabel::new(s);
    let rules = vec![
        DeltaRule::new(Symbol::Blank, q("a"), vec![Branch::basis(bs("1"), q("b"), Move::R, ONE)]),
        DeltaRule::new(Symbol::Blank, q("b"), vec![Branch::basis(bs("0"), q("c"), Move::L, ONE)]),
        DeltaRule::new(
            sym("1"),
            q("c"),
            vec![Branch::basis(bs("0"), q("done"), Move::R, h), Branch::basis(bs("1"), q("done"), Move::L, -h)],
        ),
    ];
    let m = Qtm::new(1, [q("a"), q("b"), q("c"), q("done")], q("a"), [q("done")], rules).unwrap();
    assert!(check_local_normalization(&m).passed());
    let r = run(&m, 10).unwrap();
    assert_eq!(r.steps(), 3);

    let after_two = r.trace[2].iter().next().unwrap().0;
    assert_eq!(after_two.head, 0);
    assert_eq!(after_two.tape, BTreeMap::from([(0, bs("1")), (1, bs("0"))]));

    let fin = r.final_superposition();
    assert_eq!(fin.len(), 2);
    let right = Configuration { state: q("done"), tape: BTreeMap::from([(0, bs("0")), (1, bs("0"))]), head: 1 };
    let left = Configuration { state: q("done"), tape: BTreeMap::from([(0, bs("1")), (1, bs("0"))]), head: -1 };
    assert_amp(fin.amplitude(&right), FRAC_1_SQRT_2);
    assert_amp(fin.amplitude(&left), -FRAC_1_SQRT_2);
    // head at -1 is over a blank
    assert!(measure_tape_prefix(fin, 1).is_err());

    let reach = reachable_sources(&m);
    assert!(reach.contains(&(Symbol::Blank, q("b"))));
    assert!(reach.contains(&(sym("1"), q("c"))));
}

#[test]
fn balanced_final_step_cancels_half_the_targets() {
    for t in ["01", "10"] {
        let m = build_deutsch_qtm(&f(t)).unwrap();
        let r = run(&m, DEFAULT_MAX_STEPS).unwrap();
        let (out, stats) = step_with_stats(&m, &r.trace[3]).unwrap();
        assert_eq!(r.trace[3].len(), 4);
        assert_eq!(stats.contributions, 8);
        assert_eq!(stats.targets, 4);
        assert_eq!(stats.cancelled, 2);
        assert!(stats.max_cancelled_residual < 1e-12);
        assert_eq!(out.len(), 2);
        assert_eq!(&out, r.final_superposition());
    }
}

#[test]
fn pattern_rules_above_eager_limit() {
    let arity = EAGER_WIDTH_LIMIT; // width EAGER_WIDTH_LIMIT + 1
    let g = BooleanFunction::from_fn(arity, |x| x & 1 == 1).unwrap();
    let m = build_dj_qtm(&g).unwrap();
    assert_eq!(m.patterns().len(), 2);
    assert_eq!(m.rules().count(), 2);
    let r = run(&m, DEFAULT_MAX_STEPS).unwrap();
    let d = measure_tape_prefix(r.final_superposition(), arity).unwrap();
    // f(x) = last input bit: all weight on 0…01
    let outcome = BasisString::from_index(1, arity);
    assert!((d[&outcome] - 1.0).abs() < 1e-9);

    let small = BooleanFunction::from_fn(EAGER_WIDTH_LIMIT - 1, |x| x & 1 == 1).unwrap();
    assert!(build_dj_qtm(&small).unwrap().patterns().is_empty());
}

#[test]
fn extension_keeps_four_states_and_scales_seed_amplitude() {
    for n in 2..=4 {
        let old = build_dj_qtm(&BooleanFunction::constant(n - 1, false).unwrap()).unwrap();
        let g = BooleanFunction::constant(n, true).unwrap();
        let ext = extend_dj_qtm(&old, &g).unwrap();
        assert_eq!(ext.states().len(), 4);
        assert_eq!(ext.width(), n + 1);
        let seed = BasisString::from_index(1, n + 1);
        let rule = ext.rule(&Symbol::Bits(seed), &phi(0)).unwrap();
        let amp = 2f64.powf(-((n + 1) as f64) / 2.0);
        assert_amp(rule.branches[0].amplitude, amp);
        assert_amp(rule.branches[1].amplitude, -amp);
        assert!(check_local_normalization(&ext).passed());
    }
}

#[test]
fn extension_rejects_foreign_structure() {
    let rule = DeltaRule::new(Symbol::Blank, phi(0), vec![Branch::basis(bs("01"), phi(1), Move::N, ONE)]);
    let m = Qtm::new(2, [phi(0), phi(1)], phi(0), [phi(1)], [rule]).unwrap();
    assert!(matches!(extend_dj_qtm(&m, &f("0011")), Err(Error::Structure(_))));
    let dj = build_dj_qtm(&f("01")).unwrap();
    assert!(matches!(extend_dj_qtm(&dj, &f("01101001")), Err(Error::Arity { .. })));
}

#[test]
fn rule_json_round_trip() {
    let m = build_dj_qtm(&f("0110")).unwrap();
    let json = m.to_rule_json();
    let back = Qtm::from_rule_json(&json).unwrap();
    assert_eq!(back.to_rule_json(), json);
    assert_eq!(back.rules().collect::<Vec<_>>(), m.rules().collect::<Vec<_>>());
    assert!(Qtm::from_rule_json("{\"width\": 2}").is_err());
}

#[test]
fn delta_text_first_line_is_initialization() {
    let text = delta_text(&build_deutsch_qtm(&f("01")).unwrap());
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "δ(□, PHI_0, 01, PHI_0, N) = 1");
    assert_eq!(lines[1], "δ(01, PHI_0, 00, PHI_1, N) = 1/2");
    assert_eq!(lines[2], "δ(01, PHI_0, 01, PHI_1, N) = -1/2");
    assert!(lines.contains(&"δ(11, PHI_2, 11, PHI_3, N) = -1/√2"));
    assert_eq!(lines.len(), 17);
}

#[test]
fn trace_json_is_sorted_and_complete() {
    let r = run(&build_deutsch_qtm(&f("01")).unwrap(), DEFAULT_MAX_STEPS).unwrap();
    let json = trace_to_json(&r.trace);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    let arr = v.as_array().unwrap();
    assert_eq!(arr.len(), 5);
    assert_eq!(arr[0][0]["tape"].as_array().unwrap().len(), 0);
    assert_eq!(arr[1][0]["tape"][0]["bits"], "01");
    let tapes: Vec<&str> = arr[2].as_array().unwrap().iter().map(|c| c["tape"][0]["bits"].as_str().unwrap()).collect();
    assert_eq!(tapes, ["00", "01", "10", "11"]);
}

#[test]
fn step_is_an_isometry_on_reachable_configurations() {
    let mut machines = vec![];
    for g in enumerate_promise_functions(1).unwrap() {
        machines.push(build_deutsch_qtm_with(&g, HadamardGrouping::TopFactored, FinalGrouping::Factored).unwrap());
        machines.push(build_deutsch_qtm(&g).unwrap());
    }
    for g in enumerate_promise_functions(3).unwrap().iter().step_by(9) {
        machines.push(build_dj_qtm(g).unwrap());
    }
    for m in &machines {
        let r = check_reachable_isometry(m, DEFAULT_MAX_STEPS).unwrap();
        assert!(r.passed(), "{r:?}");
        assert!(r.configurations > 0);
    }
}

#[test]
fn local_normalization_does_not_imply_isometry() {
    let q = |s: &str| StateLabel::new(s);
    let h = real(FRAC_1_SQRT_2);
    // both halves of the split collapse onto the same configuration
    let rules = vec![
        DeltaRule::new(
            Symbol::Blank,
            q("a"),
            vec![Branch::basis(bs("0"), q("b"), Move::N, h), Branch::basis(bs("1"), q("b"), Move::N, h)],
        ),
        DeltaRule::new(sym("0"), q("b"), vec![Branch::basis(bs("0"), q("c"), Move::N, ONE)]),
        DeltaRule::new(sym("1"), q("b"), vec![Branch::basis(bs("0"), q("c"), Move::N, ONE)]),
    ];
    let m = Qtm::new(1, [q("a"), q("b"), q("c")], q("a"), [q("c")], rules).unwrap();
    assert!(check_local_normalization(&m).passed());
    let r = check_reachable_isometry(&m, DEFAULT_MAX_STEPS).unwrap();
    assert!(!r.passed());
    assert!((r.max_deviation - 1.0).abs() < 1e-12);
    let fin = run(&m, DEFAULT_MAX_STEPS).unwrap();
    assert!((fin.final_superposition().norm_sqr() - 2.0).abs() < 1e-12);
}
