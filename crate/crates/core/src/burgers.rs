//! Nonlinear viscous Burgers solver with a time-only control, on the sine
//! basis with the diffusion integrated exactly per mode (integrating factor)
//! and the transport term `-y y_x` evaluated pseudo-spectrally on a padded
//! grid. Two-stage integrating-factor Heun is the second-order default;
//! exponential Euler is kept for order comparisons.

use crate::error::{Error, Result};
use crate::heat::omega_coefficient;
use crate::signal::TimeSignal;
use crate::spectral::{ModalField, Trajectory};

const PI: f64 = std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Scheme {
    Imex1,
    Imex2,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct BurgersConfig {
    pub order: usize,
    pub n_t: usize,
    pub t_end: f64,
    pub scheme: Scheme,
    /// Padding factor of the product grid, n = dealias * K; >= 2 keeps the
    /// quadratic product alias-free.
    pub dealias: usize,
    /// Dropping the transport term recovers the linear flow (validation).
    pub nonlinear: bool,
}

impl BurgersConfig {
    pub fn new(order: usize, n_t: usize, t_end: f64) -> Self {
        Self {
            order,
            n_t,
            t_end,
            scheme: Scheme::Imex2,
            dealias: 2,
            nonlinear: true,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.order < 4 {
            return Err(Error::InvalidInput("K >= 4 required".into()));
        }
        if self.n_t < 10 {
            return Err(Error::InvalidInput("n_t >= 10 required".into()));
        }
        if !(self.t_end > 0.0) {
            return Err(Error::InvalidInput("t_end > 0 required".into()));
        }
        if self.dealias < 2 {
            return Err(Error::Aliasing(
                "dealias factor must be >= 2 for the quadratic product".into(),
            ));
        }
        Ok(())
    }
}

pub const BLOWUP_THRESHOLD: f64 = 1e3;

/// Spectral product tables for the fixed solver grid.
struct ProductTables {
    order: usize,
    n: usize,
    /// sin_tab[k-1][j] = sqrt(2) sin(k pi x_j)
    sin_tab: Vec<Vec<f64>>,
    /// cos_tab[k-1][j] = cos(k pi x_j)
    cos_tab: Vec<Vec<f64>>,
}

impl ProductTables {
    fn new(order: usize, dealias: usize) -> Self {
        let n = dealias * order;
        let h = PI / (n + 1) as f64;
        let sin_tab = (1..=order)
            .map(|k| {
                (1..=n)
                    .map(|j| std::f64::consts::SQRT_2 * (k as f64 * h * j as f64).sin())
                    .collect()
            })
            .collect();
        let cos_tab = (1..=order)
            .map(|k| (1..=n).map(|j| (k as f64 * h * j as f64).cos()).collect())
            .collect();
        Self {
            order,
            n,
            sin_tab,
            cos_tab,
        }
    }

    /// Modal coefficients of `-y y_x`: mode k is
    /// `(k pi sqrt2 / 2) int y^2 cos(k pi x) dx` by grid quadrature.
    fn transport(&self, coeffs: &[f64], out: &mut [f64]) {
        let mut grid = vec![0.0; self.n];
        for (k0, a) in coeffs.iter().enumerate() {
            if *a == 0.0 {
                continue;
            }
            let row = &self.sin_tab[k0];
            for (g, s) in grid.iter_mut().zip(row.iter()) {
                *g += a * s;
            }
        }
        for g in grid.iter_mut() {
            *g = *g * *g;
        }
        let w = 1.0 / (self.n + 1) as f64;
        for (k0, o) in out.iter_mut().enumerate() {
            let k = k0 + 1;
            let row = &self.cos_tab[k0];
            let mut acc = 0.0;
            for (g, c) in grid.iter().zip(row.iter()) {
                acc += g * c;
            }
            *o = 0.5 * k as f64 * PI * std::f64::consts::SQRT_2 * acc * w;
        }
        let _ = self.order;
    }
}

/// Solve the controlled Burgers system; `extra_source` (modal, on the same
/// time grid) supports manufactured solutions.
pub fn burgers_solve(
    u: Option<&TimeSignal>,
    y0: &ModalField,
    cfg: &BurgersConfig,
    extra_source: Option<&Trajectory>,
) -> Result<Trajectory> {
    cfg.validate()?;
    if let Some(src) = extra_source {
        if src.n_steps() != cfg.n_t || (src.t_end() - cfg.t_end).abs() > 1e-12 * cfg.t_end {
            return Err(Error::InvalidInput(
                "extra source must live on the solver grid".into(),
            ));
        }
    }
    let order = cfg.order;
    let n_t = cfg.n_t;
    let dt = cfg.t_end / n_t as f64;
    let tables = ProductTables::new(order, cfg.dealias);
    let stepper = crate::heat::ModeStepper::new(order, dt);
    let omegas: Vec<f64> = (1..=order).map(omega_coefficient).collect();

    let forcing = |j: usize, out: &mut [f64]| {
        let t = dt * j as f64;
        let uval = u.map_or(0.0, |s| s.eval(t));
        for (i, o) in out.iter_mut().enumerate() {
            *o = omegas[i] * uval;
            if let Some(src) = extra_source {
                *o += src.field(j).coeff(i + 1);
            }
        }
    };

    let mut a: Vec<f64> = (1..=order).map(|k| y0.coeff(k)).collect();
    let mut fields = Vec::with_capacity(n_t + 1);
    fields.push(ModalField::new(a.clone())?);

    let mut f_now = vec![0.0; order];
    let mut f_next = vec![0.0; order];
    let mut n_now = vec![0.0; order];
    let mut n_stage = vec![0.0; order];
    let mut stage = vec![0.0; order];

    // The forcing (control and manufactured source) is integrated exactly per
    // step as in the linear solver; only the transport term is explicit, so
    // the linear configuration reproduces the heat flow to rounding.
    for j in 0..n_t {
        forcing(j, &mut f_now);
        forcing(j + 1, &mut f_next);
        if cfg.nonlinear {
            tables.transport(&a, &mut n_now);
        } else {
            n_now.iter_mut().for_each(|v| *v = 0.0);
        }
        match cfg.scheme {
            Scheme::Imex1 => {
                for i in 0..order {
                    a[i] = stepper.step(i, a[i], f_now[i], f_next[i])
                        + stepper.decay[i] * dt * n_now[i];
                }
            }
            Scheme::Imex2 => {
                for i in 0..order {
                    stage[i] = stepper.step(i, a[i], f_now[i], f_next[i])
                        + stepper.decay[i] * dt * n_now[i];
                }
                if cfg.nonlinear {
                    tables.transport(&stage, &mut n_stage);
                } else {
                    n_stage.iter_mut().for_each(|v| *v = 0.0);
                }
                for i in 0..order {
                    a[i] = stepper.step(i, a[i], f_now[i], f_next[i])
                        + 0.5 * dt * (stepper.decay[i] * n_now[i] + n_stage[i]);
                }
            }
        }
        let norm_sq: f64 = a.iter().map(|v| v * v).sum();
        if !norm_sq.is_finite() || norm_sq.sqrt() > BLOWUP_THRESHOLD {
            return Err(Error::BlowUp {
                time: dt * (j + 1) as f64,
                norm: norm_sq.sqrt(),
            });
        }
        fields.push(ModalField::new(a.clone())?);
    }
    Trajectory::new(cfg.t_end, fields)
}

/// Residual of the weak formulation tested against the heat-caloric family
/// `phi(t, x) = e^{-pi^2 k^2 (tau - t)} e_k(x)`: for each test mode k and
/// sampled terminal time tau,
/// `a_k(tau) - y0_k e^{-mu tau} - int_0^tau (omega_k u + n_k) e^{-mu (tau-t)} dt`.
/// The control part is integrated exactly (piecewise linear), the transport
/// part by the trapezoid rule, so the linear case is exact and the nonlinear
/// case is second order. Returns the max over tests.
pub fn weak_residual(
    traj: &Trajectory,
    u: Option<&TimeSignal>,
    cfg: &BurgersConfig,
    k_tests: &[usize],
    n_test_times: usize,
) -> Result<f64> {
    let n_t = traj.n_steps();
    let dt = traj.dt();
    let tables = ProductTables::new(traj.order(), cfg.dealias);
    // Transport coefficients on the whole grid (zero when the config is linear).
    let mut transport = vec![vec![0.0; traj.order()]; n_t + 1];
    if cfg.nonlinear {
        for (j, row) in transport.iter_mut().enumerate() {
            tables.transport(traj.field(j).coeffs(), row);
        }
    }
    let mut worst: f64 = 0.0;
    for m in 1..=n_test_times {
        let jt = (n_t * m) / n_test_times;
        let tau = dt * jt as f64;
        if tau == 0.0 {
            continue;
        }
        for &k in k_tests {
            if k == 0 || k > traj.order() {
                return Err(Error::InvalidInput(format!("test mode {k} out of range")));
            }
            let mu = (k as f64 * PI).powi(2);
            // Exact control contribution.
            let mut duhamel = 0.0;
            if let Some(sig) = u {
                let w = omega_coefficient(k);
                if w != 0.0 {
                    for j in 0..jt {
                        let (t0, t1) = (dt * j as f64, dt * (j + 1) as f64);
                        let (u0, u1) = (sig.eval(t0), sig.eval(t1));
                        let slope = (u1 - u0) / dt;
                        // int (u0 + slope (t - t0)) e^{-mu (tau - t)} dt
                        let e0 = (-mu * (tau - t0)).exp();
                        let e1 = (-mu * (tau - t1)).exp();
                        duhamel += w
                            * ((u0 - slope * t0) * (e1 - e0) / mu
                                + slope * ((t1 * e1 - t0 * e0) / mu - (e1 - e0) / (mu * mu)));
                    }
                }
            }
            // Trapezoid transport contribution.
            let mut tq = 0.5
                * (transport[0][k - 1] * (-mu * tau).exp() + transport[jt][k - 1]);
            for j in 1..jt {
                tq += transport[j][k - 1] * (-mu * (tau - dt * j as f64)).exp();
            }
            tq *= dt;
            let res = traj.field(jt).coeff(k)
                - traj.field(0).coeff(k) * (-mu * tau).exp()
                - duhamel
                - tq;
            worst = worst.max(res.abs());
        }
    }
    Ok(worst)
}

/// Time-integrated residual of
/// `1/2 d/dt ||y||^2 + ||y_x||^2 - u(t) int y dx = 0`
/// (the transport term is L^2-conservative under Dirichlet ends).
pub fn nonlinear_energy_residual(traj: &Trajectory, u: Option<&TimeSignal>) -> f64 {
    let n = traj.n_steps();
    let dt = traj.dt();
    let term = |j: usize| {
        let f = traj.field(j);
        let t = dt * j as f64;
        let mut forcing = 0.0;
        if let Some(sig) = u {
            let uval = sig.eval(t);
            for k in 1..=f.order() {
                forcing += omega_coefficient(k) * f.coeff(k) * uval;
            }
        }
        f.h1_seminorm().powi(2) - forcing
    };
    let mut integral = 0.5 * (term(0) + term(n));
    for j in 1..n {
        integral += term(j);
    }
    integral *= dt;
    0.5 * (traj.last().l2_norm().powi(2) - traj.field(0).l2_norm().powi(2)) + integral
}

/// Empirical well-posedness ratios `||y||_{Y_T} / (||u||_{L^1} + ||y0||)`.
#[derive(Debug, Clone, serde::Serialize)]
pub struct WellposednessAudit {
    pub ratios: Vec<Option<f64>>,
    pub max_ratio: f64,
    pub skipped: usize,
}

pub fn wellposedness_audit(
    samples: &[(TimeSignal, ModalField)],
    cfg: &BurgersConfig,
) -> Result<WellposednessAudit> {
    let mut ratios = Vec::with_capacity(samples.len());
    let mut max_ratio: f64 = 0.0;
    let mut skipped = 0;
    for (u, y0) in samples {
        let denom = u.l1_norm() + y0.l2_norm();
        if denom == 0.0 {
            skipped += 1;
            ratios.push(None);
            continue;
        }
        let y = burgers_solve(Some(u), y0, cfg, None)?;
        let r = crate::spectral::yt_norm(&y) / denom;
        max_ratio = max_ratio.max(r);
        ratios.push(Some(r));
    }
    Ok(WellposednessAudit {
        ratios,
        max_ratio,
        skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heat::heat_modal_solve;
    use crate::signal::{band_limited_signal, CounterRng};
    use crate::spectral::yt_norm;

    /// Manufactured exact solution `y* = e^{-t} e_1 + 0.1 e^{-2t} e_2` and the
    /// modal source that makes it exact in any Galerkin model with K >= 4.
    fn mms_source(n_t: usize, t_end: f64, order: usize) -> Trajectory {
        let fields: Vec<ModalField> = (0..=n_t)
            .map(|j| {
                let t = t_end * j as f64 / n_t as f64;
                let c1 = (-t).exp();
                let c2 = 0.1 * (-2.0 * t).exp();
                let ystar = ModalField::new(vec![c1, c2]).unwrap();
                let qs = crate::heat::quadratic_source_field(&ystar, order);
                let mut f = vec![0.0; order];
                f[0] = (PI * PI - 1.0) * c1 - qs.coeff(1);
                f[1] = (4.0 * PI * PI - 2.0) * c2 - qs.coeff(2);
                for (k0, fk) in f.iter_mut().enumerate().skip(2) {
                    *fk = -qs.coeff(k0 + 1);
                }
                ModalField::new(f).unwrap()
            })
            .collect();
        Trajectory::new(t_end, fields).unwrap()
    }

    fn mms_error(n_t: usize, scheme: Scheme) -> f64 {
        let mut cfg = BurgersConfig::new(8, n_t, 1.0);
        cfg.scheme = scheme;
        let src = mms_source(n_t, 1.0, 8);
        let y0 = ModalField::new(vec![1.0, 0.1, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        let y = burgers_solve(None, &y0, &cfg, Some(&src)).unwrap();
        let c1 = (-1.0f64).exp();
        let c2 = 0.1 * (-2.0f64).exp();
        let mut err: f64 = 0.0;
        for k in 1..=8 {
            let exact = match k {
                1 => c1,
                2 => c2,
                _ => 0.0,
            };
            err = err.max((y.last().coeff(k) - exact).abs());
        }
        err
    }

    #[test]
    fn zero_data_stays_zero() {
        let cfg = BurgersConfig::new(8, 32, 0.5);
        let y = burgers_solve(None, &ModalField::zeros(8), &cfg, None).unwrap();
        assert!(y.last().l2_norm() == 0.0);
    }

    #[test]
    fn mms_imex2_is_second_order() {
        let e1 = mms_error(64, Scheme::Imex2);
        let e2 = mms_error(128, Scheme::Imex2);
        let e3 = mms_error(256, Scheme::Imex2);
        let o1 = (e1 / e2).log2();
        let o2 = (e2 / e3).log2();
        assert!(o1 >= 1.9 && o2 >= 1.9, "orders {o1}, {o2} (errors {e1}, {e2}, {e3})");
        // first-order scheme is visibly first order
        let f1 = mms_error(128, Scheme::Imex1);
        let f2 = mms_error(256, Scheme::Imex1);
        let of = (f1 / f2).log2();
        assert!(of < 1.5, "imex1 order {of}");
    }

    #[test]
    fn unforced_l2_is_nonincreasing() {
        let mut rng = CounterRng::new(21, 0);
        let mut y0 = ModalField::zeros(16);
        for k in 1..=16 {
            y0.coeffs_mut()[k - 1] = 0.1 * rng.normal() / k as f64;
        }
        let cfg = BurgersConfig::new(16, 400, 0.5);
        let y = burgers_solve(None, &y0, &cfg, None).unwrap();
        let mut prev = y.field(0).l2_norm();
        for j in 1..=y.n_steps() {
            let cur = y.field(j).l2_norm();
            assert!(
                cur <= prev + 1e-12 * prev.max(1.0),
                "norm grew at step {j}: {prev} -> {cur}"
            );
            prev = cur;
        }
    }

    #[test]
    fn weak_residual_linear_exact_and_nonlinear_second_order() {
        let mut rng = CounterRng::new(33, 0);
        let u = band_limited_signal(0.5, 512, 6, &mut rng).scale(0.3);
        let mut lin = BurgersConfig::new(8, 512, 0.5);
        lin.nonlinear = false;
        let ylin = burgers_solve(Some(&u), &ModalField::zeros(8), &lin, None).unwrap();
        let r = weak_residual(&ylin, Some(&u), &lin, &[1, 2, 3], 4).unwrap();
        assert!(r < 1e-10, "linear weak residual {r}");

        let y0 = ModalField::new(vec![0.3, 0.1, -0.05, 0.02, 0.0, 0.0, 0.0, 0.0]).unwrap();
        let res: Vec<f64> = [256usize, 512]
            .iter()
            .map(|&n_t| {
                let cfg = BurgersConfig::new(8, n_t, 0.5);
                let y = burgers_solve(Some(&u), &y0, &cfg, None).unwrap();
                weak_residual(&y, Some(&u), &cfg, &[1, 2, 3], 4).unwrap()
            })
            .collect();
        let ratio = res[0] / res[1];
        assert!(ratio > 2.5 && ratio < 6.0, "refinement ratio {ratio}");

        let zcfg = BurgersConfig::new(4, 16, 0.5);
        let z = burgers_solve(None, &ModalField::zeros(4), &zcfg, None).unwrap();
        assert_eq!(weak_residual(&z, None, &zcfg, &[1], 2).unwrap(), 0.0);
    }

    #[test]
    fn energy_residual_second_order() {
        let y0 = ModalField::new(vec![0.2, 0.05, 0.0, 0.0]).unwrap();
        let r: Vec<f64> = [200usize, 400]
            .iter()
            .map(|&n_t| {
                let cfg = BurgersConfig::new(4, n_t, 0.5);
                let u = TimeSignal::from_fn(0.5, n_t, |_| 1.0);
                let y = burgers_solve(Some(&u), &y0, &cfg, None).unwrap();
                nonlinear_energy_residual(&y, Some(&u)).abs()
            })
            .collect();
        let ratio = r[0] / r[1];
        assert!(ratio > 3.0 && ratio < 5.0, "ratio {ratio}");
        let z = Trajectory::new(1.0, vec![ModalField::zeros(4); 11]).unwrap();
        assert_eq!(nonlinear_energy_residual(&z, None), 0.0);
    }

    #[test]
    fn truncation_self_convergence() {
        // Smooth data: doubling K changes the solution by a spectral tail.
        let y0_16 = ModalField::new((1..=16).map(|k| 0.5 / (k * k * k) as f64).collect()).unwrap();
        let y0_32 = y0_16.resized(32);
        let c16 = BurgersConfig::new(16, 256, 0.25);
        let c32 = BurgersConfig::new(32, 256, 0.25);
        let a = burgers_solve(None, &y0_16, &c16, None).unwrap();
        let b = burgers_solve(None, &y0_32, &c32, None).unwrap();
        let mut diff: f64 = 0.0;
        for k in 1..=16 {
            diff = diff.max((a.last().coeff(k) - b.last().coeff(k)).abs());
        }
        assert!(diff < 1e-9, "K-refinement moved the solution by {diff}");
    }

    #[test]
    fn small_data_limit_is_the_heat_flow() {
        let mut rng = CounterRng::new(77, 0);
        let unit = band_limited_signal(0.5, 256, 5, &mut rng);
        // The linear configuration reproduces the modal heat solve exactly...
        let u1 = unit.scale(0.3);
        let mut lin = BurgersConfig::new(8, 256, 0.5);
        lin.nonlinear = false;
        let ylin = burgers_solve(Some(&u1), &ModalField::zeros(8), &lin, None).unwrap();
        let yh = heat_modal_solve(&u1, &ModalField::zeros(8), 8, 256).unwrap();
        assert!(yt_norm(&ylin.axpy(-1.0, &yh).unwrap()) < 1e-13);
        // ...and the nonlinear deviation from it scales quadratically.
        let cfg = BurgersConfig::new(8, 256, 0.5);
        let mut prev_ratio = None;
        for eps in [1e-2, 1e-3] {
            let u = unit.scale(eps);
            let yb = burgers_solve(Some(&u), &ModalField::zeros(8), &cfg, None).unwrap();
            let yh = heat_modal_solve(&u, &ModalField::zeros(8), 8, 256).unwrap();
            let diff = yb.axpy(-1.0, &yh).unwrap();
            let ratio = yt_norm(&diff) / (eps * eps);
            if let Some(p) = prev_ratio {
                let drift: f64 = ratio / p;
                assert!(drift > 0.5 && drift < 2.0, "quadratic deficit drifts: {drift}");
            }
            prev_ratio = Some(ratio);
        }
    }

    #[test]
    fn blow_up_guard_fires_with_time() {
        // Huge antidiffusive data via a negative-time trick is not available;
        // drive hard with a large constant control instead.
        let u = TimeSignal::from_fn(0.5, 64, |_| 4.0e3);
        let cfg = BurgersConfig::new(8, 64, 0.5);
        match burgers_solve(Some(&u), &ModalField::zeros(8), &cfg, None) {
            Err(Error::BlowUp { time, norm }) => {
                assert!(time > 0.0 && norm > BLOWUP_THRESHOLD);
            }
            other => panic!("expected blow-up, got {other:?}"),
        }
    }

    #[test]
    fn wellposedness_ratios() {
        let mut rng = CounterRng::new(4, 9);
        let mut samples = Vec::new();
        samples.push((TimeSignal::zeros(0.5, 64), ModalField::zeros(8)));
        for _ in 0..6 {
            let u = band_limited_signal(0.5, 64, 4, &mut rng).scale(0.2);
            let mut y0 = ModalField::zeros(8);
            for k in 1..=8 {
                y0.coeffs_mut()[k - 1] = 0.05 * rng.normal() / k as f64;
            }
            samples.push((u, y0));
        }
        let cfg = BurgersConfig::new(8, 128, 0.5);
        let audit = wellposedness_audit(&samples, &cfg).unwrap();
        assert_eq!(audit.skipped, 1);
        assert!(audit.ratios[0].is_none());
        assert!(audit.max_ratio.is_finite() && audit.max_ratio > 0.0);

        // Linear-regime scaling: halving the data roughly halves ||y||_{Y_T}.
        let (u, y0) = &samples[1];
        let y_full = burgers_solve(Some(u), y0, &cfg, None).unwrap();
        let y_half = burgers_solve(Some(&u.scale(0.5)), &{
            let mut h = y0.clone();
            h.coeffs_mut().iter_mut().for_each(|c| *c *= 0.5);
            h
        }, &cfg, None)
        .unwrap();
        let ratio = yt_norm(&y_full) / yt_norm(&y_half);
        assert!((ratio - 2.0).abs() < 0.2, "scaling ratio {ratio}");
    }
}
