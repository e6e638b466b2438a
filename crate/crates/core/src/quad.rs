//! Gauss–Legendre rules and Weyl-density tail integrals.

use std::f64::consts::PI;
use std::sync::OnceLock;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for j in 2..=n {
        let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

fn rule64() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(64))
}

/// Integrates `f` over [a, b] with `pieces` equal panels of the 64-point rule.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, pieces: usize) -> f64 {
    let (x, w) = rule64();
    let h = (b - a) / pieces as f64;
    let mut total = 0.0;
    for p in 0..pieces {
        let lo = a + p as f64 * h;
        let mid = lo + 0.5 * h;
        let mut s = 0.0;
        for (xi, wi) in x.iter().zip(w) {
            s += wi * f(mid + 0.5 * h * xi);
        }
        total += 0.5 * h * s;
    }
    total
}

/// `∫_C^∞ g(t) dt` for integrands decaying at least like `t^{-3/2}`.
///
/// Uses `t = C / s²`, which maps the tail onto (0, 1] with a bounded integrand.
pub fn tail_integral<F: Fn(f64) -> f64>(g: F, cutoff: f64) -> f64 {
    integrate(
        |s: f64| {
            if s <= 0.0 {
                return 0.0;
            }
            let t = cutoff / (s * s);
            g(t) * 2.0 * cutoff / (s * s * s)
        },
        0.0,
        1.0,
        4,
    )
}

/// `∫_C^∞ 2π √t f(t) dt`: the sum of `f` over modes above `C` with the
/// smooth Weyl density in place of the lattice count.
pub fn weyl_tail<F: Fn(f64) -> f64>(f: F, cutoff: f64) -> f64 {
    tail_integral(|t| 2.0 * PI * t.sqrt() * f(t), cutoff)
}

/// Rigorous upper bound on `Σ_{n > C} f(n)` for positive decreasing `f`,
/// given the exact count `count_at_cutoff = N(C)`.
///
/// Each shifted lattice point with `|ξ+k| ≤ r` owns a unit cube inside the
/// ball of radius `r + √3/2`, so `N(t) ≤ (4/3)π(√t + √3/2)³`. Abel
/// summation against that envelope gives the bound.
pub fn counting_tail_bound<F: Fn(f64) -> f64>(f: F, cutoff: f64, count_at_cutoff: usize) -> f64 {
    let half_diag = 3f64.sqrt() / 2.0;
    let upper = |t: f64| 4.0 / 3.0 * PI * (t.sqrt() + half_diag).powi(3);
    let density = |t: f64| 2.0 * PI * (t.sqrt() + half_diag).powi(2) / t.sqrt();
    let boundary = f(cutoff) * (upper(cutoff) - count_at_cutoff as f64);
    boundary + tail_integral(|t| f(t) * density(t), cutoff)
}
