//! Adaptive Gauss–Legendre quadrature on 32-point panels.
//!
//! The oscillatory integrands here (products of complex exponentials against
//! `cos(k pi x)`) are smooth, so fixed high-order panels with bisection on a
//! local error estimate are enough. Callers that know the oscillation scale
//! pass initial split points so the first pass already resolves the waves.

use crate::error::{Error, Result};
use std::sync::OnceLock;

const PANEL_POINTS: usize = 32;

/// Nodes and weights of the 32-point Gauss–Legendre rule on [-1, 1].
fn gl32() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = PANEL_POINTS;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n {
            // Newton iteration on P_n from the Chebyshev initial guess.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, dp) = legendre_pair(n, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre_pair(n, x);
            nodes[n - 1 - i] = x;
            weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        (nodes, weights)
    })
}

/// Value and derivative of the Legendre polynomial P_n at x.
fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for j in 2..=n {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

fn panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let (nodes, weights) = gl32();
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for (x, w) in nodes.iter().zip(weights.iter()) {
        acc += w * f(mid + half * x);
    }
    acc * half
}

struct Adapt<'f, F: Fn(f64) -> f64> {
    f: &'f F,
    abs_tol: f64,
    rel_tol: f64,
    max_levels: usize,
    scale: f64,
    failed: bool,
    worst_err: f64,
}

impl<'f, F: Fn(f64) -> f64> Adapt<'f, F> {
    fn refine(&mut self, a: f64, b: f64, whole: f64, level: usize) -> f64 {
        let mid = 0.5 * (a + b);
        let left = panel(self.f, a, mid);
        let right = panel(self.f, mid, b);
        let err = (left + right - whole).abs();
        let tol = self
            .abs_tol
            .max(self.rel_tol * self.scale)
            .max(f64::EPSILON * self.scale)
            * 0.5f64.powi(level as i32);
        if err <= tol {
            return left + right;
        }
        if level >= self.max_levels {
            self.failed = true;
            self.worst_err = self.worst_err.max(err);
            return left + right;
        }
        self.refine(a, mid, left, level + 1) + self.refine(mid, b, right, level + 1)
    }
}

/// Integrate `f` over `[a, b]`, refining each initial panel until the local
/// bisection error estimate meets `abs_tol`/`rel_tol`. `splits` are interior
/// break points (out-of-range entries are ignored). Fails after `max_levels`
/// bisections with the achieved estimate attached.
pub fn adaptive_gl<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    splits: &[f64],
    abs_tol: f64,
    rel_tol: f64,
    max_levels: usize,
) -> Result<f64> {
    if !(b > a) {
        return Err(Error::InvalidInput(format!("bad interval [{a}, {b}]")));
    }
    let mut edges = vec![a];
    for &s in splits {
        if s > a && s < b {
            edges.push(s);
        }
    }
    edges.push(b);
    edges.sort_by(|p, q| p.partial_cmp(q).unwrap());
    edges.dedup();

    let coarse: Vec<f64> = edges.windows(2).map(|w| panel(&f, w[0], w[1])).collect();
    let scale: f64 = coarse.iter().map(|v| v.abs()).sum::<f64>().max(abs_tol);

    let mut adapt = Adapt {
        f: &f,
        abs_tol,
        rel_tol,
        max_levels,
        scale,
        failed: false,
        worst_err: 0.0,
    };
    let mut total = 0.0;
    for (w, &c) in edges.windows(2).zip(coarse.iter()) {
        total += adapt.refine(w[0], w[1], c, 0);
    }
    if adapt.failed {
        return Err(Error::QuadratureNoConverge {
            levels: max_levels,
            estimate: total,
            error: adapt.worst_err,
        });
    }
    Ok(total)
}

/// Uniform interior split points with spacing at most `max_len`.
pub fn uniform_splits(a: f64, b: f64, max_len: f64) -> Vec<f64> {
    let n = ((b - a) / max_len).ceil().max(1.0) as usize;
    (1..n).map(|j| a + (b - a) * j as f64 / n as f64).collect()
}
