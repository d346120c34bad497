//! Sine-basis representation of functions on (0, 1) with Dirichlet ends.
//!
//! The basis is the orthonormal family `e_k(x) = sqrt(2) sin(k pi x)`, so the
//! L^2 norm of a field is the Euclidean norm of its coefficients and the H^1
//! seminorm weights mode k by `k pi`. Grid functions live on the `n` interior
//! points `x_j = j/(n+1)`; the implied endpoint values are zero, which makes
//! the composite trapezoid rule a plain scaled sum and — by the discrete
//! orthogonality of sines — *exact* for mode products below the alias limit.

use crate::error::{Error, Result};

pub const F64_EXP_LIMIT: f64 = 700.0;

/// Coefficients (a_k)_{k=1..K} against `sqrt(2) sin(k pi x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModalField {
    coeffs: Vec<f64>,
}

impl ModalField {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidInput("modal field needs K >= 1".into()));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput("non-finite modal coefficient".into()));
        }
        Ok(Self { coeffs })
    }

    pub fn zeros(order: usize) -> Self {
        Self {
            coeffs: vec![0.0; order.max(1)],
        }
    }

    /// The single mode `amp * e_k` at truncation `order`.
    pub fn mode(order: usize, k: usize, amp: f64) -> Self {
        let mut coeffs = vec![0.0; order.max(k)];
        coeffs[k - 1] = amp;
        Self { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    /// 1-based mode coefficient; zero beyond the truncation.
    pub fn coeff(&self, k: usize) -> f64 {
        if k >= 1 && k <= self.coeffs.len() {
            self.coeffs[k - 1]
        } else {
            0.0
        }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn l2_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn h1_seminorm(&self) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let kpi = (i + 1) as f64 * std::f64::consts::PI;
                (kpi * c).powi(2)
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Re-truncate (pad with zeros or drop high modes).
    pub fn resized(&self, order: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(order.max(1), 0.0);
        Self { coeffs }
    }

    pub fn axpy(&mut self, alpha: f64, other: &ModalField) {
        for (i, c) in other.coeffs.iter().enumerate() {
            if i < self.coeffs.len() {
                self.coeffs[i] += alpha * c;
            }
        }
    }
}

/// Samples on the `n` uniform interior points of (0, 1).
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidInput("grid needs n >= 2".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite grid value".into()));
        }
        Ok(Self { values })
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Interior node x_j = (j+1)/(n+1) for j = 0..n-1.
    pub fn node(&self, j: usize) -> f64 {
        (j + 1) as f64 / (self.values.len() + 1) as f64
    }

    /// Trapezoidal `int_0^1 g^2 dx` with implicit zero endpoints.
    pub fn l2_norm(&self) -> f64 {
        let h = 1.0 / (self.values.len() + 1) as f64;
        (self.values.iter().map(|v| v * v).sum::<f64>() * h).sqrt()
    }
}

/// Evaluate `sum_k a_k sqrt(2) sin(k pi x_j)` on the n-point interior grid.
pub fn sine_synthesis(field: &ModalField, n: usize) -> Result<GridFunction> {
    let order = field.order();
    if n < 2 * order {
        return Err(Error::Aliasing(format!(
            "synthesis grid n = {n} below 2K = {} for K = {order}",
            2 * order
        )));
    }
    let h = std::f64::consts::PI / (n + 1) as f64;
    let mut values = vec![0.0; n];
    for (i, a) in field.coeffs.iter().enumerate() {
        if *a == 0.0 {
            continue;
        }
        let k = (i + 1) as f64;
        let amp = a * std::f64::consts::SQRT_2;
        for (j, v) in values.iter_mut().enumerate() {
            *v += amp * (k * h * (j + 1) as f64).sin();
        }
    }
    GridFunction::new(values)
}

/// Project a grid function onto the first K modes by the trapezoid rule,
/// `a_k = (1/(n+1)) sum_j g_j sqrt(2) sin(k pi x_j)`; exact below the alias
/// limit of the grid.
pub fn sine_analysis(g: &GridFunction, order: usize) -> Result<ModalField> {
    let n = g.n();
    if order == 0 || 2 * order > n {
        return Err(Error::Aliasing(format!(
            "analysis order K = {order} exceeds n/2 = {}",
            n / 2
        )));
    }
    let h = std::f64::consts::PI / (n + 1) as f64;
    let w = 1.0 / (n + 1) as f64;
    let mut coeffs = vec![0.0; order];
    for (i, c) in coeffs.iter_mut().enumerate() {
        let k = (i + 1) as f64;
        let mut acc = 0.0;
        for (j, v) in g.values.iter().enumerate() {
            acc += v * (k * h * (j + 1) as f64).sin();
        }
        *c = acc * std::f64::consts::SQRT_2 * w;
    }
    ModalField::new(coeffs)
}

/// A time-indexed sequence of modal fields on a uniform grid over [0, t_end].
#[derive(Debug, Clone)]
pub struct Trajectory {
    t_end: f64,
    fields: Vec<ModalField>,
}

impl Trajectory {
    pub fn new(t_end: f64, fields: Vec<ModalField>) -> Result<Self> {
        if !(t_end > 0.0) || fields.len() < 2 {
            return Err(Error::InvalidInput(
                "trajectory needs t_end > 0 and at least two snapshots".into(),
            ));
        }
        let order = fields[0].order();
        if fields.iter().any(|f| f.order() != order) {
            return Err(Error::InvalidInput("snapshots must share K".into()));
        }
        Ok(Self { t_end, fields })
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn n_steps(&self) -> usize {
        self.fields.len() - 1
    }

    pub fn dt(&self) -> f64 {
        self.t_end / self.n_steps() as f64
    }

    pub fn order(&self) -> usize {
        self.fields[0].order()
    }

    pub fn field(&self, j: usize) -> &ModalField {
        &self.fields[j]
    }

    pub fn fields(&self) -> &[ModalField] {
        &self.fields
    }

    pub fn last(&self) -> &ModalField {
        self.fields.last().unwrap()
    }

    /// Time series of one mode coefficient as a signal.
    pub fn mode_series(&self, k: usize) -> crate::signal::TimeSignal {
        crate::signal::TimeSignal::new(
            self.t_end,
            self.fields.iter().map(|f| f.coeff(k)).collect(),
        )
        .unwrap()
    }

    /// Pointwise combination `self + alpha * other` (matching grids).
    pub fn axpy(&self, alpha: f64, other: &Trajectory) -> Result<Trajectory> {
        if self.fields.len() != other.fields.len()
            || (self.t_end - other.t_end).abs() > 1e-12 * self.t_end
        {
            return Err(Error::InvalidInput("trajectory grids differ".into()));
        }
        let order = self.order().max(other.order());
        let fields = self
            .fields
            .iter()
            .zip(other.fields.iter())
            .map(|(a, b)| {
                let mut f = a.resized(order);
                f.axpy(alpha, &b.resized(order));
                f
            })
            .collect();
        Trajectory::new(self.t_end, fields)
    }
}

fn trapezoid<F: Fn(usize) -> f64>(n_steps: usize, dt: f64, f: F) -> f64 {
    let mut acc = 0.5 * (f(0) + f(n_steps));
    for j in 1..n_steps {
        acc += f(j);
    }
    acc * dt
}

/// `max_t ||y(t)||_{L^2} + (int_0^T ||y||_{L^2}^2 + |y|_{H^1}^2 dt)^{1/2}`.
pub fn yt_norm(traj: &Trajectory) -> f64 {
    let sup = traj
        .fields
        .iter()
        .fold(0.0f64, |m, f| m.max(f.l2_norm()));
    sup + l2h1_norm(traj)
}

/// `(int_0^T ||y||_{L^2}^2 + |y|_{H^1}^2 dt)^{1/2}` by the trapezoid rule.
pub fn l2h1_norm(traj: &Trajectory) -> f64 {
    trapezoid(traj.n_steps(), traj.dt(), |j| {
        let f = traj.field(j);
        f.l2_norm().powi(2) + f.h1_seminorm().powi(2)
    })
    .sqrt()
}

/// `(int_0^T ||y||_{L^2}^2 dt)^{1/2}`.
pub fn l2l2_norm(traj: &Trajectory) -> f64 {
    trapezoid(traj.n_steps(), traj.dt(), |j| traj.field(j).l2_norm().powi(2)).sqrt()
}

fn weight_guard(k: usize, t: f64) -> Result<()> {
    let exponent = (k as f64 * std::f64::consts::PI).powi(2) * t;
    if exponent > F64_EXP_LIMIT {
        return Err(Error::WeightOverflow {
            exponent,
            limit: F64_EXP_LIMIT,
        });
    }
    Ok(())
}

/// `phi_k(t, x) = e^{pi^2 k^2 t} sin(k pi x)`.
pub fn phi_k_eval(k: usize, t: f64, x: f64) -> Result<f64> {
    weight_guard(k, t)?;
    let kpi = k as f64 * std::f64::consts::PI;
    Ok((kpi * kpi * t).exp() * (kpi * x).sin())
}

/// `d/dx phi_k = k pi e^{pi^2 k^2 t} cos(k pi x)`.
pub fn phi_k_x_eval(k: usize, t: f64, x: f64) -> Result<f64> {
    weight_guard(k, t)?;
    let kpi = k as f64 * std::f64::consts::PI;
    Ok(kpi * (kpi * kpi * t).exp() * (kpi * x).cos())
}

/// `int_0^1 (sum a_m e_m)(sum b_l e_l) cos(k pi x) dx` from the coupling rule
/// `int e_m e_l cos(k pi x) dx = (delta_{|m-l|,k} - delta_{m+l,k}) / 2`.
pub fn cos_pairing_modal(a: &ModalField, b: &ModalField, k: usize) -> f64 {
    let mut acc = 0.0;
    // |m - l| = k: ordered pairs (m, m+k) and (m+k, m).
    let max_m = a.order().max(b.order());
    for m in 1..=max_m {
        acc += 0.5 * (a.coeff(m) * b.coeff(m + k) + a.coeff(m + k) * b.coeff(m));
    }
    // m + l = k.
    for m in 1..k {
        acc -= 0.5 * a.coeff(m) * b.coeff(k - m);
    }
    acc
}

/// Space-time pairing `int_0^T int_0^1 y^2 phi_{k,x} dx dt`: pseudo-spectral
/// in x on the 8K-point grid, trapezoid in t.
pub fn quadratic_phi_pairing(traj: &Trajectory, k: usize) -> Result<f64> {
    weight_guard(k, traj.t_end())?;
    let order = traj.order();
    let n = 8 * order.max(k);
    let kpi = k as f64 * std::f64::consts::PI;
    let h = 1.0 / (n + 1) as f64;
    let cos_tab: Vec<f64> = (1..=n).map(|j| (kpi * h * j as f64).cos()).collect();
    let mu = kpi * kpi;
    let pair = |j: usize| -> Result<f64> {
        let g = sine_synthesis(traj.field(j), n)?;
        let mut acc = 0.0;
        for (v, c) in g.values().iter().zip(cos_tab.iter()) {
            acc += v * v * c;
        }
        let t = traj.dt() * j as f64;
        Ok(kpi * (mu * t).exp() * acc * h)
    };
    let mut total = 0.5 * (pair(0)? + pair(traj.n_steps())?);
    for j in 1..traj.n_steps() {
        total += pair(j)?;
    }
    Ok(total * traj.dt())
}

/// Same pairing evaluated through the exact modal coupling rule instead of
/// grid quadrature; used as the fast path in batch experiments and as the
/// second route in the dual-path checks.
pub fn quadratic_phi_pairing_modal(traj: &Trajectory, k: usize) -> Result<f64> {
    weight_guard(k, traj.t_end())?;
    let kpi = k as f64 * std::f64::consts::PI;
    let mu = kpi * kpi;
    let pair = |j: usize| {
        let f = traj.field(j);
        let t = traj.dt() * j as f64;
        kpi * (mu * t).exp() * cos_pairing_modal(f, f, k)
    };
    Ok(trapezoid(traj.n_steps(), traj.dt(), pair))
}

/// The pairing with `g(t) = k pi <y^2, cos(k pi x)>` treated as piecewise
/// linear between snapshots and `int g e^{mu t} dt` integrated exactly per
/// segment. This matches the time model of the exponential-integrator
/// solvers, so identities derived by parts hold to rounding in the
/// discretized system (rather than to trapezoid accuracy).
pub fn quadratic_phi_pairing_pl(traj: &Trajectory, k: usize) -> Result<f64> {
    weight_guard(k, traj.t_end())?;
    let kpi = k as f64 * std::f64::consts::PI;
    let mu = kpi * kpi;
    let h = traj.dt();
    let g: Vec<f64> = traj
        .fields()
        .iter()
        .map(|f| kpi * cos_pairing_modal(f, f, k))
        .collect();
    // int_{t_j}^{t_j+h} (g0 + (dg/h)(t - t_j)) e^{mu t} dt
    //   = e^{mu t_j} (g0 A + dg B / h),
    // A = (e^{mu h} - 1)/mu, B = h e^{mu h}/mu - (e^{mu h} - 1)/mu^2.
    let ep = (mu * h).exp();
    let a_seg = (ep - 1.0) / mu;
    let b_seg = h * ep / mu - (ep - 1.0) / (mu * mu);
    let mut acc = 0.0;
    let mut weight = 1.0; // e^{mu t_j}
    for w in g.windows(2) {
        let dg = w[1] - w[0];
        acc += weight * (w[0] * a_seg + dg * b_seg / h);
        weight *= ep;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_mode_synthesis_value() {
        // sqrt(2) sin(pi/2) at x = 0.5: put the node there with n = 7.
        let f = ModalField::mode(1, 1, 1.0);
        let g = sine_synthesis(&f, 7).unwrap();
        assert!((g.values()[3] - std::f64::consts::SQRT_2).abs() < 1e-14);
        assert!((g.node(3) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn zero_field_synthesizes_to_zero() {
        let g = sine_synthesis(&ModalField::zeros(5), 16).unwrap();
        assert!(g.values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn synthesis_rejects_coarse_grid() {
        assert!(matches!(
            sine_synthesis(&ModalField::zeros(8), 15),
            Err(Error::Aliasing(_))
        ));
        assert!(matches!(
            sine_analysis(&GridFunction::new(vec![0.0; 15]).unwrap(), 8),
            Err(Error::Aliasing(_))
        ));
    }

    #[test]
    fn analysis_of_pure_mode() {
        let g = GridFunction::new(
            (1..=256)
                .map(|j| {
                    let x = j as f64 / 257.0;
                    std::f64::consts::SQRT_2 * (2.0 * std::f64::consts::PI * x).sin()
                })
                .collect(),
        )
        .unwrap();
        let f = sine_analysis(&g, 8).unwrap();
        for k in 1..=8 {
            let expect = if k == 2 { 1.0 } else { 0.0 };
            assert!((f.coeff(k) - expect).abs() < 1e-10, "k = {k}: {}", f.coeff(k));
        }
    }

    #[test]
    fn analysis_of_parabola_matches_exact_integral() {
        // x(1-x) = sum_k (4 sqrt(2)/(k pi)^3) e_k over odd k.
        let n = 4096;
        let g = GridFunction::new(
            (1..=n)
                .map(|j| {
                    let x = j as f64 / (n + 1) as f64;
                    x * (1.0 - x)
                })
                .collect(),
        )
        .unwrap();
        let f = sine_analysis(&g, 6).unwrap();
        for k in 1..=6usize {
            let exact = if k % 2 == 1 {
                4.0 * std::f64::consts::SQRT_2 / (k as f64 * std::f64::consts::PI).powi(3)
            } else {
                0.0
            };
            assert!(
                (f.coeff(k) - exact).abs() < 1e-8,
                "k = {k}: got {}, want {exact}",
                f.coeff(k)
            );
        }
        assert!((f.coeff(1) - 0.182442229611094354).abs() < 1e-8);
    }

    #[test]
    fn roundtrip_is_exact_below_alias_limit() {
        let coeffs: Vec<f64> = (0..12).map(|i| ((i * 7 + 3) % 11) as f64 / 11.0 - 0.4).collect();
        let f = ModalField::new(coeffs).unwrap();
        let g = sine_synthesis(&f, 8 * f.order()).unwrap();
        let back = sine_analysis(&g, f.order()).unwrap();
        for k in 1..=f.order() {
            assert!((back.coeff(k) - f.coeff(k)).abs() < 1e-12);
        }
        // Parseval on the grid.
        assert!((g.l2_norm() - f.l2_norm()).abs() < 1e-10);
    }

    #[test]
    fn mode_norms() {
        let f = ModalField::mode(4, 1, 1.0);
        assert!((f.l2_norm() - 1.0).abs() < 1e-15);
        assert!((f.h1_seminorm() - std::f64::consts::PI).abs() < 1e-13);
        let f3 = ModalField::mode(8, 3, 2.0);
        assert!((f3.h1_seminorm() - 6.0 * std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn yt_norm_of_constant_trajectory() {
        let f = ModalField::mode(3, 1, 1.0);
        let traj = Trajectory::new(1.0, vec![f; 33]).unwrap();
        let expect = 1.0 + (1.0 + std::f64::consts::PI.powi(2)).sqrt();
        assert!((yt_norm(&traj) - expect).abs() < 1e-12, "{}", yt_norm(&traj));
        assert!((yt_norm(&traj) - 4.29690830947561516).abs() < 1e-12);
        let z = Trajectory::new(1.0, vec![ModalField::zeros(3); 33]).unwrap();
        assert_eq!(yt_norm(&z), 0.0);
    }

    #[test]
    fn phi_values_and_guard() {
        assert!((phi_k_eval(2, 0.0, 0.25).unwrap() - 1.0).abs() < 1e-15);
        assert!((phi_k_eval(1, 0.1, 0.5).unwrap() - 2.68306672345905732).abs() < 1e-12);
        assert!(matches!(
            phi_k_eval(10, 1.0, 0.3),
            Err(Error::WeightOverflow { .. })
        ));
        let kpi = 2.0 * std::f64::consts::PI;
        assert!((phi_k_x_eval(2, 0.0, 0.5).unwrap() - kpi * (kpi * 0.5).cos()).abs() < 1e-13);
    }

    #[test]
    fn pairing_dual_path_single_mode() {
        // a_1(t) = 1 constant, k = 2, T = 0.1:
        // int_0^T -pi e^{4 pi^2 t} dt = -pi (e^{4 pi^2 T} - 1)/(4 pi^2).
        let f = ModalField::mode(4, 1, 1.0);
        let n_t = 4096;
        let traj = Trajectory::new(0.1, vec![f; n_t + 1]).unwrap();
        let grid = quadratic_phi_pairing(&traj, 2).unwrap();
        let modal = quadratic_phi_pairing_modal(&traj, 2).unwrap();
        assert!(
            (grid - modal).abs() <= 1e-10 * (1.0 + modal.abs()),
            "grid {grid} vs modal {modal}"
        );
        let exact = -4.04439756724320593;
        assert!((modal - exact).abs() < 2e-4 * exact.abs(), "modal = {modal}");
        let z = Trajectory::new(0.1, vec![ModalField::zeros(4); 9]).unwrap();
        assert_eq!(quadratic_phi_pairing(&z, 2).unwrap(), 0.0);
    }

    #[test]
    fn cos_pairing_rule_spot_checks() {
        // single mode c_1 = 1, k = 2: integral = -1/2.
        let f = ModalField::mode(4, 1, 1.0);
        assert!((cos_pairing_modal(&f, &f, 2) + 0.5).abs() < 1e-15);
        // odd-even cross pairing against even k vanishes.
        let odd = ModalField::mode(6, 3, 1.3);
        let even = ModalField::mode(6, 4, 0.7);
        assert_eq!(cos_pairing_modal(&odd, &even, 2), 0.0);
    }
}
