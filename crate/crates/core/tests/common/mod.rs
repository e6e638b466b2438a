//! Brute-force references shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use scatterlab::lattice::QuasiMomentum;

/// Every energy `|ξ+k|² ≤ cutoff`, found by scanning the whole cube `|ξ_i| ≤ ⌈√cutoff⌉ + 1`.
pub fn box_energies(k: &QuasiMomentum, cutoff: f64) -> Vec<f64> {
    let n = cutoff.sqrt().ceil() as i64 + 1;
    let mut out = Vec::new();
    for a in -n..=n {
        for b in -n..=n {
            for c in -n..=n {
                let e = k.energy([a, b, c]);
                if e <= cutoff {
                    out.push(e);
                }
            }
        }
    }
    out.sort_by(|x, y| x.total_cmp(y));
    out
}

/// Composite Simpson rule on `[a, b]` with `n` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// `∫_C^∞ 2π√t g(t) dt` through `t = C/s²`, assuming `g(t) = O(t^{-2})` or
/// `O(t^{-1})` with `√t g(t)·t^{3/2}` bounded.
pub fn weyl_tail(g: impl Fn(f64) -> f64, cutoff: f64) -> f64 {
    let integrand = |s: f64| {
        // the integrand has a finite nonzero limit at s = 0
        let s = s.max(1e-7);
        let t = cutoff / (s * s);
        2.0 * PI * t.sqrt() * g(t) * 2.0 * cutoff / (s * s * s)
    };
    simpson(integrand, 0.0, 1.0, 20_000)
}

fn weyl(x: f64) -> f64 {
    4.0 / 3.0 * PI * x.powf(1.5)
}

/// Secular sum from the sorted box energies: sharp part, Weyl tail and the
/// partial-summation boundary correction at the cutoff.
pub fn secular_oracle(energies: &[f64], cutoff: f64, lambda: f64) -> f64 {
    let f = |t: f64| (lambda * t + 1.0) / ((t - lambda) * (t * t + 1.0));
    let sharp: f64 = energies.iter().map(|&n| 1.0 / (n - lambda) - n / (n * n + 1.0)).sum();
    let discrepancy = energies.len() as f64 - weyl(cutoff);
    sharp + weyl_tail(f, cutoff) - discrepancy * f(cutoff)
}

/// `Σ 1/(n²+1)` with the same tail and boundary treatment.
pub fn c0_oracle(energies: &[f64], cutoff: f64) -> f64 {
    let f = |t: f64| 1.0 / (t * t + 1.0);
    let sharp: f64 = energies.iter().map(|&n| f(n)).sum();
    let discrepancy = energies.len() as f64 - weyl(cutoff);
    sharp + weyl_tail(f, cutoff) - discrepancy * f(cutoff)
}

/// Ordered pairs in `(T/2, T]` with `√T|n−m| ≤ D` by a full double loop.
pub fn brute_pair_count(energies: &[f64], d: f64, t: f64) -> u64 {
    let inside: Vec<f64> = energies.iter().copied().filter(|&x| x > 0.5 * t && x <= t).collect();
    let st = t.sqrt();
    let mut count = 0;
    for (i, &a) in inside.iter().enumerate() {
        for (j, &b) in inside.iter().enumerate() {
            if i != j && st * (a - b).abs() <= d {
                count += 1;
            }
        }
    }
    count
}

/// Median of a nonempty sample.
pub fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
