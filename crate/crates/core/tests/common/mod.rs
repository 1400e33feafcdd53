//! Reference computations written independently of the library's simulators.

#![allow(dead_code)]

use std::collections::HashMap;
use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

/// Amplitudes of the Deutsch–Jozsa circuit on `0…01` after each of its three
/// layers, as a dense vector indexed by `(x << 1) | b`, from the path sum
///
/// * `|Φ₁⟩[x, b] = (−1)^b / √2ⁿ`
/// * `|Φ₂⟩[x, b] = (−1)^{f(x) + b} / √2ⁿ`
/// * `|Φ₃⟩[y, b] = (−1)^b / (2^m √2) · Σₓ (−1)^{f(x) + x·y}`
pub fn dj_path_sum(table: &[bool]) -> [Vec<Complex64>; 4] {
    let size = table.len();
    let m = size.trailing_zeros() as i32;
    let dim = size * 2;
    let sign = |odd: bool| if odd { -1.0 } else { 1.0 };
    let scale = 2f64.powi(m + 1).sqrt().recip();

    let mut phi0 = vec![Complex64::new(0.0, 0.0); dim];
    phi0[1] = Complex64::new(1.0, 0.0);
    let phi1 = (0..dim).map(|i| Complex64::new(sign(i & 1 == 1) * scale, 0.0)).collect();
    let phi2 = (0..dim).map(|i| Complex64::new(sign((i & 1 == 1) ^ table[i >> 1]) * scale, 0.0)).collect();
    let phi3 = (0..dim)
        .map(|i| {
            let y = i >> 1;
            let sum: f64 = (0..size).map(|x| sign(table[x] ^ ((x & y).count_ones() % 2 == 1))).sum();
            Complex64::new(sign(i & 1 == 1) * sum / size as f64 * FRAC_1_SQRT_2, 0.0)
        })
        .collect();
    [phi0, phi1, phi2, phi3]
}

/// Probability of each top-register outcome, from a dense final state.
pub fn top_register_probabilities(state: &[Complex64]) -> Vec<f64> {
    (0..state.len() / 2).map(|y| state[2 * y].norm_sqr() + state[2 * y + 1].norm_sqr()).collect()
}

/// Every constant or balanced table of `arity`, by brute force.
pub fn promise_tables(arity: usize) -> Vec<Vec<bool>> {
    let size = 1usize << arity;
    (0u64..1 << size)
        .map(|bits| (0..size).map(|i| bits >> (size - 1 - i) & 1 == 1).collect::<Vec<bool>>())
        .filter(|t| {
            let ones = t.iter().filter(|&&v| v).count();
            ones == 0 || ones == size || 2 * ones == size
        })
        .collect()
}

pub fn table_string(t: &[bool]) -> String {
    t.iter().map(|&v| if v { '1' } else { '0' }).collect()
}

/// Minimax depth of the best adaptive deterministic decision tree that
/// separates constant from balanced among the promise functions of `arity`.
pub fn adaptive_query_complexity(arity: usize) -> usize {
    let tables = promise_tables(arity);
    assert!(tables.len() <= 128);
    let all: u128 = if tables.len() == 128 { u128::MAX } else { (1u128 << tables.len()) - 1 };
    let mut memo = HashMap::new();
    minimax(&tables, all, &mut memo)
}

fn minimax(tables: &[Vec<bool>], alive: u128, memo: &mut HashMap<u128, usize>) -> usize {
    if let Some(&v) = memo.get(&alive) {
        return v;
    }
    let members: Vec<&Vec<bool>> = (0..tables.len()).filter(|&i| alive >> i & 1 == 1).map(|i| &tables[i]).collect();
    let constant = |t: &Vec<bool>| t.iter().all(|&v| v == t[0]);
    let decided = members.iter().all(|t| constant(t)) || members.iter().all(|t| !constant(t));
    let best = if decided {
        0
    } else {
        let size = tables[0].len();
        (0..size)
            .filter_map(|pos| {
                let split = |answer: bool| {
                    (0..tables.len())
                        .filter(|&i| alive >> i & 1 == 1 && tables[i][pos] == answer)
                        .fold(0u128, |acc, i| acc | 1 << i)
                };
                let (zero, one) = (split(false), split(true));
                // a query that cannot split the candidates gains nothing
                if zero == 0 || one == 0 {
                    return None;
                }
                Some(1 + minimax(tables, zero, memo).max(minimax(tables, one, memo)))
            })
            .min()
            .expect("undecided set has a splitting query")
    };
    memo.insert(alive, best);
    best
}
