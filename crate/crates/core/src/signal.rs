//! Uniformly sampled time signals and the seeded generators used by every
//! randomized audit.
//!
//! Controls are interpreted as piecewise-linear between samples; all solvers
//! and transforms in this crate integrate that interpolant exactly, so the
//! sampled signal *is* the mathematical object under study.

use crate::error::{Error, Result};

/// A real function on `[0, t_end]` sampled at `n_steps + 1` uniform points.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSignal {
    t_end: f64,
    values: Vec<f64>,
}

/// Controls u(t) are plain time signals.
pub type ControlSignal = TimeSignal;

impl TimeSignal {
    pub fn new(t_end: f64, values: Vec<f64>) -> Result<Self> {
        if !(t_end > 0.0) || values.len() < 2 {
            return Err(Error::InvalidInput(
                "time signal needs t_end > 0 and at least two samples".into(),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite sample in time signal".into()));
        }
        Ok(Self { t_end, values })
    }

    pub fn zeros(t_end: f64, n_steps: usize) -> Self {
        Self {
            t_end,
            values: vec![0.0; n_steps + 1],
        }
    }

    pub fn from_fn(t_end: f64, n_steps: usize, f: impl Fn(f64) -> f64) -> Self {
        let dt = t_end / n_steps as f64;
        Self {
            t_end,
            values: (0..=n_steps).map(|j| f(j as f64 * dt)).collect(),
        }
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn n_steps(&self) -> usize {
        self.values.len() - 1
    }

    pub fn dt(&self) -> f64 {
        self.t_end / self.n_steps() as f64
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Piecewise-linear evaluation; zero outside `[0, t_end]`.
    pub fn eval(&self, t: f64) -> f64 {
        if t < 0.0 || t > self.t_end {
            return 0.0;
        }
        let s = t / self.dt();
        let j = (s.floor() as usize).min(self.n_steps() - 1);
        let frac = s - j as f64;
        self.values[j] * (1.0 - frac) + self.values[j + 1] * frac
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            t_end: self.t_end,
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    /// Trapezoidal `int_0^T |u| dt` (exact for the interpolant away from sign
    /// changes, second order across them).
    pub fn l1_norm(&self) -> f64 {
        let dt = self.dt();
        let mut acc = 0.0;
        for w in self.values.windows(2) {
            acc += 0.5 * dt * (w[0].abs() + w[1].abs());
        }
        acc
    }

    /// Exact `int_0^T u^2 dt` of the piecewise-linear interpolant.
    pub fn l2_norm_sq(&self) -> f64 {
        let dt = self.dt();
        let mut acc = 0.0;
        for w in self.values.windows(2) {
            acc += dt / 3.0 * (w[0] * w[0] + w[0] * w[1] + w[1] * w[1]);
        }
        acc
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Total variation of the zero-extension (includes the endpoint jumps).
    pub fn total_variation(&self) -> f64 {
        let interior: f64 = self.values.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
        self.values[0].abs() + interior + self.values[self.values.len() - 1].abs()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == 0.0)
    }

    /// Concatenate with `tail` defined on `[0, tail.t_end]`, producing a signal
    /// on `[0, t_end + tail.t_end]`. Requires matching sample steps.
    pub fn concat(&self, tail: &TimeSignal) -> Result<TimeSignal> {
        let rel = (self.dt() - tail.dt()).abs() / self.dt();
        if rel > 1e-12 {
            return Err(Error::InvalidInput(format!(
                "concat needs equal steps: {} vs {}",
                self.dt(),
                tail.dt()
            )));
        }
        let mut values = self.values.clone();
        values.extend_from_slice(&tail.values[1..]);
        TimeSignal::new(self.t_end + tail.t_end, values)
    }
}

/// Counter-based generator: output i of stream s under seed k is a pure hash
/// of (k, s, i), so any run (or any other language) can reproduce a draw
/// without replaying the sequence.
#[derive(Debug, Clone)]
pub struct CounterRng {
    seed: u64,
    stream: u64,
    counter: u64,
    cached_normal: Option<f64>,
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

impl CounterRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self {
            seed,
            stream,
            counter: 0,
            cached_normal: None,
        }
    }

    pub fn raw(seed: u64, stream: u64, counter: u64) -> u64 {
        splitmix(splitmix(splitmix(seed) ^ stream) ^ counter)
    }

    pub fn next_u64(&mut self) -> u64 {
        let v = Self::raw(self.seed, self.stream, self.counter);
        self.counter += 1;
        v
    }

    /// Uniform in [0, 1).
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / 9007199254740992.0)
    }

    /// Standard normal via Box–Muller (pairs cached).
    pub fn normal(&mut self) -> f64 {
        if let Some(v) = self.cached_normal.take() {
            return v;
        }
        // u1 in (0, 1] so the log is finite.
        let u1 = ((self.next_u64() >> 11) + 1) as f64 * (1.0 / 9007199254740992.0);
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (2.0 * std::f64::consts::PI * u2).sin_cos();
        self.cached_normal = Some(r * s);
        r * c
    }
}

/// Band-limited field `sum_j alpha_j sin(j pi t / T)` with Gaussian
/// coefficients damped by `j^{-1/2}`; vanishes at both endpoints, so its
/// zero-extension has no jumps.
pub fn band_limited_signal(
    t_end: f64,
    n_steps: usize,
    harmonics: usize,
    rng: &mut CounterRng,
) -> TimeSignal {
    let alphas: Vec<f64> = (1..=harmonics)
        .map(|j| rng.normal() / (j as f64).sqrt())
        .collect();
    TimeSignal::from_fn(t_end, n_steps, |t| {
        alphas
            .iter()
            .enumerate()
            .map(|(i, a)| a * ((i + 1) as f64 * std::f64::consts::PI * t / t_end).sin())
            .sum()
    })
}

/// C^1 bump of width `h` centered at `center`, normalized to unit mass.
/// Members of the dilation family concentrate as h -> 0 while keeping
/// `int u dt = 1`.
pub fn bump_signal(t_end: f64, n_steps: usize, center: f64, h: f64) -> TimeSignal {
    // cos^2 profile: supp in [c-h, c+h], mass = h.
    TimeSignal::from_fn(t_end, n_steps, |t| {
        let s = (t - center) / h;
        if s.abs() >= 1.0 {
            0.0
        } else {
            let c = (0.5 * std::f64::consts::PI * s).cos();
            c * c / h
        }
    })
}
