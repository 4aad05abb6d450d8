//! Test-side oracles that share no code with the library's rate engine.

#![allow(dead_code)]

use mccs::combinatorics::binomial;
use mccs::{Placement, ProblemInstance};
use rand::Rng;

/// Every demand vector over `n` files and `k` users, first user slowest.
pub fn demands(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..n).map(move |f| {
                    let mut d = prefix.clone();
                    d.push(f);
                    d
                })
            })
            .collect();
    }
    out
}

/// MCCS rate by direct transcription: scan all nonempty subsets as user
/// lists, keep those containing a first requester of some file, and charge
/// the longest subfile among the members.
pub fn literal_mccs_rate(a: &[Vec<f64>], d: &[usize]) -> f64 {
    let k = d.len();
    let is_leader: Vec<bool> = (0..k).map(|u| !d[..u].contains(&d[u])).collect();
    let mut total = 0.0;
    for mask in 1u32..(1 << k) {
        let members: Vec<usize> = (0..k).filter(|&u| mask & (1 << u) != 0).collect();
        if !members.iter().any(|&u| is_leader[u]) {
            continue;
        }
        let level = members.len() - 1;
        total += members.iter().map(|&u| a[d[u]][level]).fold(0.0, f64::max);
    }
    total
}

pub fn literal_average_mccs(a: &[Vec<f64>], p: &[f64], k: usize) -> f64 {
    demands(p.len(), k).iter().map(|d| d.iter().map(|&f| p[f]).product::<f64>() * literal_mccs_rate(a, d)).sum()
}

/// `E[number of distinct requests] = sum_n 1 - (1 - p_n)^K`.
pub fn expected_distinct(p: &[f64], k: usize) -> f64 {
    p.iter().map(|&q| 1.0 - (1.0 - q).powi(k as i32)).sum()
}

/// Nonincreasing probabilities: uniform draws, sorted, normalized.
pub fn random_popularity(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let mut p: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
    p.sort_by(|x, y| y.total_cmp(x));
    let s: f64 = p.iter().sum();
    p.iter().map(|x| x / s).collect()
}

/// A random popularity-first placement: each cached level is drawn sorted
/// in decreasing order, all rows are scaled by one common factor so that
/// every file fits, and the remainder goes to the server-only level.
pub fn random_q_placement(rng: &mut impl Rng, n: usize, k: usize) -> Placement {
    let mut cached = vec![vec![0.0; k + 1]; n];
    for l in 1..=k {
        let mut column: Vec<f64> = (0..n).map(|_| if rng.gen_bool(0.2) { 0.0 } else { rng.gen::<f64>() }).collect();
        column.sort_by(|x, y| y.total_cmp(x));
        for (row, v) in cached.iter_mut().zip(column) {
            row[l] = v;
        }
    }
    let weight = |row: &[f64]| (1..=k).map(|l| binomial(k as i64, l as i64) as f64 * row[l]).sum::<f64>();
    let heaviest = cached.iter().map(|r| weight(r)).fold(0.0, f64::max);
    let scale = if heaviest > 0.0 { rng.gen_range(0.0..=1.0) / heaviest } else { 0.0 };
    let rows = cached
        .into_iter()
        .map(|mut row| {
            for v in row.iter_mut().skip(1) {
                *v *= scale;
            }
            row[0] = (1.0 - weight(&row)).max(0.0);
            row
        })
        .collect();
    Placement::from_rows(rows).expect("rectangular")
}

/// Instance whose cache size is exactly what `placement` uses.
pub fn instance_for(p: Vec<f64>, k: usize, placement: &Placement) -> ProblemInstance {
    let m = (mccs::model::cache_usage(placement, k) + 1e-12).min(p.len() as f64);
    ProblemInstance::new(p.len(), k, m, p).expect("valid instance")
}
