//! Brute-force references shared by the integration tests.
#![allow(dead_code)]

pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Enumerates every support set; on a support the minimizer is a uniform
/// shift, and it is admissible only if nonnegative.
pub fn simplex_oracle(z: &[f64], c: f64) -> Vec<f64> {
    let n = z.len();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 1u32..(1 << n) {
        let support: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        let shift = (c - support.iter().map(|&i| z[i]).sum::<f64>()) / support.len() as f64;
        let mut v = vec![0.0; n];
        for &i in &support {
            v[i] = z[i] + shift;
        }
        if v.iter().any(|x| *x < -1e-12) {
            continue;
        }
        let d = sq_dist(&v, z);
        if best.as_ref().map_or(true, |(bd, _)| d < *bd) {
            best = Some((d, v));
        }
    }
    best.unwrap().1
}

pub fn compositions(c: u64, parts: usize) -> Vec<Vec<u64>> {
    if parts == 1 {
        return vec![vec![c]];
    }
    let mut out = Vec::new();
    for first in 0..=c {
        for mut rest in compositions(c - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}
