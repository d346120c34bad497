//! Parity projections and truncated moment-method null controls.
//!
//! A time-only control never touches the even sine modes, so only initial
//! data supported on the odd modes can be steered to zero. The finitely many
//! moment conditions `int_0^T u(t) e^{pi^2 k^2 t} dt = c_k` (odd k up to a
//! cutoff) are solved by a least-L^2-norm ansatz over shifted Legendre
//! polynomials. Everything is assembled in the row-normalized form obtained
//! by multiplying the k-th equation through by `e^{-pi^2 k^2 T}` — the same
//! equation, but with weights `e^{-pi^2 k^2 (T - t)}` that f64 can represent;
//! the normalized residual of mode k is exactly the end-state error
//! `|a_k(T)| / omega_k` the control leaves behind.

use crate::error::{Error, Result};
use crate::heat::{heat_modal_solve, omega_coefficient};
use crate::quadrature::adaptive_gl;
use crate::signal::TimeSignal;
use crate::spectral::ModalField;

const PI: f64 = std::f64::consts::PI;

/// Hard refusal threshold for the equilibrated moment Gram. The canonical
/// six-mode problem (odd k <= 11 on a unit window) sits at 3e14; past ~1e16
/// the factorization carries no information and the refinement loop cannot
/// recover, so that is where we refuse. The delivered accuracy is verified
/// directly: every solve reports the exact moment residual of the sampled
/// control.
pub const CONDITION_LIMIT: f64 = 1e16;
pub const MAX_MOMENT_MODES: usize = 8;

/// Split by mode parity: (even part in the unreachable space, odd part).
pub fn project_unreachable(y0: &ModalField) -> (ModalField, ModalField) {
    let order = y0.order();
    let mut even = vec![0.0; order];
    let mut odd = vec![0.0; order];
    for k in 1..=order {
        if k % 2 == 0 {
            even[k - 1] = y0.coeff(k);
        } else {
            odd[k - 1] = y0.coeff(k);
        }
    }
    (
        ModalField::new(even).unwrap(),
        ModalField::new(odd).unwrap(),
    )
}

/// Moment targets `c_k = -(k pi / 2) int_0^1 y0 sin(k pi x) dx` for the
/// requested odd modes; rejects data with even content (not steerable).
pub fn moment_targets(y0: &ModalField, odd_modes: &[usize]) -> Result<Vec<f64>> {
    validate_modes(odd_modes)?;
    let (even, _) = project_unreachable(y0);
    if even.l2_norm() > 1e-12 * y0.l2_norm().max(1e-300) {
        return Err(Error::Domain(
            "initial datum has even-mode content: not in the steerable space".into(),
        ));
    }
    Ok(odd_modes
        .iter()
        .map(|&k| -(k as f64 * PI) / 2.0 * y0.coeff(k) / std::f64::consts::SQRT_2)
        .collect())
}

fn validate_modes(odd_modes: &[usize]) -> Result<()> {
    if odd_modes.is_empty() || odd_modes.len() > MAX_MOMENT_MODES {
        return Err(Error::InvalidInput(format!(
            "need 1..={MAX_MOMENT_MODES} moment modes, got {}",
            odd_modes.len()
        )));
    }
    for w in odd_modes.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::InvalidInput("modes must be strictly increasing".into()));
        }
    }
    if odd_modes.iter().any(|k| k % 2 == 0 || *k == 0) {
        return Err(Error::InvalidInput("moment modes must be odd".into()));
    }
    Ok(())
}

/// A truncated moment problem on [0, T].
#[derive(Debug, Clone)]
pub struct MomentProblem {
    pub t_end: f64,
    pub odd_modes: Vec<usize>,
    /// Raw targets c_k of `int_0^T u e^{pi^2 k^2 t} dt = c_k`.
    pub targets: Vec<f64>,
    /// Polynomial ansatz degree (defaults to |odd_modes| + 4).
    pub degree: usize,
}

impl MomentProblem {
    pub fn new(t_end: f64, odd_modes: Vec<usize>, targets: Vec<f64>) -> Result<Self> {
        validate_modes(&odd_modes)?;
        if targets.len() != odd_modes.len() {
            return Err(Error::InvalidInput("one target per mode".into()));
        }
        if targets.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidInput("non-finite target".into()));
        }
        if !(t_end > 0.0) {
            return Err(Error::InvalidInput("moment horizon must be positive".into()));
        }
        let degree = odd_modes.len() + 4;
        Ok(Self {
            t_end,
            odd_modes,
            targets,
            degree,
        })
    }
}

/// Orthonormal shifted Legendre value: L_d on [0, T] with unit L^2 norm.
fn legendre_orthonormal(d: usize, t: f64, t_end: f64) -> f64 {
    let x = 2.0 * t / t_end - 1.0;
    let (mut p0, mut p1) = (1.0, x);
    if d == 0 {
        return (1.0 / t_end).sqrt();
    }
    for j in 2..=d {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    ((2.0 * d as f64 + 1.0) / t_end).sqrt() * p1
}

/// `int_0^T u(t) e^{-mu (T - t)} dt`, exact for piecewise-linear u: the
/// row-normalized moment of a sampled control.
pub fn normalized_moment(u: &TimeSignal, mu: f64) -> f64 {
    let dt = u.dt();
    let n = u.n_steps();
    let vals = u.values();
    // Same per-segment weights as the modal exponential integrator, so the
    // residual reported here is literally the end-state error a solve leaves.
    let decay = (-mu * dt).exp();
    let one_m = -(-mu * dt).exp_m1();
    let phi1 = one_m / mu;
    let phi2 = (dt - phi1) / (mu * dt);
    // sum_j e^{-mu (T - t_{j+1})} (u_j phi1 + (u_{j+1} - u_j) phi2)
    let mut acc = 0.0;
    let mut weight = 1.0; // e^{-mu (T - t_{j+1})} at j = n-1
    for j in (0..n).rev() {
        let (u0, u1) = (vals[j], vals[j + 1]);
        acc += weight * (u0 * phi1 + (u1 - u0) * phi2);
        weight *= decay;
    }
    acc
}

/// Solution of a truncated moment problem.
#[derive(Debug, Clone)]
pub struct MomentControl {
    pub control: TimeSignal,
    /// Condition number of the row-normalized Gram matrix.
    pub gram_condition: f64,
    /// max_k |int u e^{-mu_k (T-t)} dt - c_k e^{-mu_k T}| of the sampled control.
    pub residual: f64,
    /// Ansatz coefficients against the orthonormal Legendre basis.
    pub coefficients: Vec<f64>,
}

struct MinNormSolver {
    m: usize,
    q: Vec<Vec<f64>>,    // (degree+1) x m orthonormal columns
    r: Vec<Vec<f64>>,    // m x m upper triangular
    perm: Vec<usize>,    // column permutation: A[:, perm[i]] ~ Q R column i
}

impl MinNormSolver {
    /// Column-pivoted modified Gram–Schmidt on A (n x m, columns = rows of G).
    fn factor(a: &[Vec<f64>]) -> Result<Self> {
        let m = a.len();
        let n = a[0].len();
        let mut cols: Vec<Vec<f64>> = a.to_vec();
        let mut perm: Vec<usize> = (0..m).collect();
        let mut q: Vec<Vec<f64>> = Vec::with_capacity(m);
        let mut r = vec![vec![0.0; m]; m];
        for i in 0..m {
            // pivot: remaining column with largest norm
            let (pivot, norm) = (i..m)
                .map(|j| (j, cols[j].iter().map(|v| v * v).sum::<f64>()))
                .max_by(|x, y| x.1.partial_cmp(&y.1).unwrap())
                .unwrap();
            cols.swap(i, pivot);
            perm.swap(i, pivot);
            for row in r.iter_mut() {
                row.swap(i, pivot);
            }
            let norm = norm.sqrt();
            if !(norm > 1e-300) {
                return Err(Error::IllConditioned {
                    condition: f64::INFINITY,
                });
            }
            let qi: Vec<f64> = cols[i].iter().map(|v| v / norm).collect();
            r[i][i] = norm;
            for j in (i + 1)..m {
                let dot: f64 = qi.iter().zip(cols[j].iter()).map(|(x, y)| x * y).sum();
                r[i][j] = dot;
                for (cj, qv) in cols[j].iter_mut().zip(qi.iter()) {
                    *cj -= dot * qv;
                }
            }
            q.push(qi);
            let _ = n;
        }
        Ok(Self { m, q, r, perm })
    }

    /// Min-norm alpha with G alpha = c, using G^T = Q R P^T.
    fn solve(&self, c: &[f64]) -> Vec<f64> {
        // forward substitution on R^T beta = P^T c
        let mut beta = vec![0.0; self.m];
        for i in 0..self.m {
            let mut s = c[self.perm[i]];
            for j in 0..i {
                s -= self.r[j][i] * beta[j];
            }
            beta[i] = s / self.r[i][i];
        }
        let n = self.q[0].len();
        let mut alpha = vec![0.0; n];
        for (qi, bi) in self.q.iter().zip(beta.iter()) {
            for (av, qv) in alpha.iter_mut().zip(qi.iter()) {
                *av += bi * qv;
            }
        }
        alpha
    }
}

/// Condition number of a small symmetric positive matrix by cyclic Jacobi.
fn sym_condition(mut g: Vec<Vec<f64>>) -> f64 {
    let m = g.len();
    for _ in 0..60 {
        let mut off = 0.0;
        for p in 0..m {
            for q in (p + 1)..m {
                off += g[p][q] * g[p][q];
            }
        }
        if off < 1e-300 {
            break;
        }
        for p in 0..m {
            for q in (p + 1)..m {
                if g[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = 0.5 * (g[q][q] - g[p][p]) / g[p][q];
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for i in 0..m {
                    let (gip, giq) = (g[i][p], g[i][q]);
                    g[i][p] = c * gip - s * giq;
                    g[i][q] = s * gip + c * giq;
                }
                for i in 0..m {
                    let (gpi, gqi) = (g[p][i], g[q][i]);
                    g[p][i] = c * gpi - s * gqi;
                    g[q][i] = s * gpi + c * gqi;
                }
            }
        }
    }
    let eigs: Vec<f64> = (0..m).map(|i| g[i][i]).collect();
    let max = eigs.iter().cloned().fold(f64::MIN, f64::max);
    let min = eigs.iter().cloned().fold(f64::MAX, f64::min);
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Solve the moment problem with a least-L^2-norm polynomial ansatz, sampled
/// on `n_t` steps. The sampled (piecewise-linear) control is refined until
/// *its own* exact moments match the normalized targets, so the returned
/// signal. not just the ideal polynomial, satisfies the equations.
pub fn solve_moment_control(problem: &MomentProblem, n_t: usize) -> Result<MomentControl> {
    let m = problem.odd_modes.len();
    let n_basis = problem.degree + 1;
    let t_end = problem.t_end;
    let mus: Vec<f64> = problem
        .odd_modes
        .iter()
        .map(|&k| (k as f64 * PI).powi(2))
        .collect();
    // Row-normalized targets.
    let targets: Vec<f64> = problem
        .targets
        .iter()
        .zip(mus.iter())
        .map(|(c, mu)| c * (-mu * t_end).exp())
        .collect();

    // G[k][d] = int_0^T L_d(t) e^{-mu_k (T - t)} dt, by adaptive quadrature
    // with dyadic splits resolving the boundary layer at t = T.
    let mut g = vec![vec![0.0; n_basis]; m];
    for (ki, mu) in mus.iter().enumerate() {
        let mut splits = vec![];
        let mut w = 1.0 / mu;
        while w < t_end {
            splits.push(t_end - w);
            w *= 4.0;
        }
        for d in 0..n_basis {
            g[ki][d] = adaptive_gl(
                |t| legendre_orthonormal(d, t, t_end) * (-mu * (t_end - t)).exp(),
                0.0,
                t_end,
                &splits,
                1e-300,
                1e-14,
                28,
            )?;
        }
    }

    // Equilibrate rows to unit norm (the row scales span ~1/mu_1 .. 1/mu_m and
    // would dominate the condition number without changing the constraint
    // set); the min-norm solution is unchanged.
    let row_scales: Vec<f64> = g
        .iter()
        .map(|row| row.iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();
    if row_scales.iter().any(|s| !(*s > 1e-300)) {
        return Err(Error::IllConditioned {
            condition: f64::INFINITY,
        });
    }
    for (row, s) in g.iter_mut().zip(row_scales.iter()) {
        row.iter_mut().for_each(|v| *v /= s);
    }
    let scaled_targets: Vec<f64> = targets
        .iter()
        .zip(row_scales.iter())
        .map(|(c, s)| c / s)
        .collect();

    // Conditioning of the equilibrated Gram G G^T (the system actually solved).
    let mut gram = vec![vec![0.0; m]; m];
    for i in 0..m {
        for j in 0..m {
            gram[i][j] = g[i].iter().zip(g[j].iter()).map(|(x, y)| x * y).sum();
        }
    }
    let condition = sym_condition(gram);
    if !(condition < CONDITION_LIMIT) {
        return Err(Error::IllConditioned { condition });
    }

    // Columns of A = G^T.
    let a: Vec<Vec<f64>> = (0..m).map(|k| g[k].clone()).collect();
    let solver = MinNormSolver::factor(&a)?;
    let mut alpha = solver.solve(&scaled_targets);

    let sample = |alpha: &[f64]| -> TimeSignal {
        TimeSignal::from_fn(t_end, n_t, |t| {
            alpha
                .iter()
                .enumerate()
                .map(|(d, a)| a * legendre_orthonormal(d, t, t_end))
                .sum()
        })
    };

    // Refine against the exact moments of the *sampled* control, so the
    // piecewise-linear deliverable meets the targets, not merely the ideal
    // polynomial it approximates.
    let mut u = sample(&alpha);
    let mut residual = f64::INFINITY;
    for _ in 0..8 {
        let defect: Vec<f64> = mus
            .iter()
            .zip(targets.iter())
            .map(|(mu, c)| c - normalized_moment(&u, *mu))
            .collect();
        residual = defect.iter().fold(0.0f64, |a, d| a.max(d.abs()));
        if residual <= 1e-13 * targets.iter().fold(1.0f64, |a, c| a.max(c.abs())) {
            break;
        }
        let scaled_defect: Vec<f64> = defect
            .iter()
            .zip(row_scales.iter())
            .map(|(d, s)| d / s)
            .collect();
        let delta = solver.solve(&scaled_defect);
        for (av, dv) in alpha.iter_mut().zip(delta.iter()) {
            *av += dv;
        }
        u = sample(&alpha);
    }

    Ok(MomentControl {
        control: u,
        gram_condition: condition,
        residual,
        coefficients: alpha,
    })
}

/// End-to-end verification of a moment control: run the modal heat solve and
/// report the end state on controlled modes and the decay envelope of the
/// uncontrolled tail.
#[derive(Debug, Clone, serde::Serialize)]
pub struct NullControlReport {
    pub controlled_end: Vec<f64>,
    pub max_controlled_end: f64,
    /// max over uncontrolled odd k of k^3 |a_k(T)|.
    pub tail_envelope: f64,
    pub end_l2: f64,
}

pub fn null_control_verify(
    u: &TimeSignal,
    y0: &ModalField,
    odd_modes: &[usize],
    k_model: usize,
    n_t: usize,
) -> Result<NullControlReport> {
    let y = heat_modal_solve(u, y0, k_model, n_t)?;
    let end = y.last();
    let controlled_end: Vec<f64> = odd_modes.iter().map(|&k| end.coeff(k).abs()).collect();
    let max_controlled_end = controlled_end.iter().cloned().fold(0.0f64, f64::max);
    let k_max_ctrl = odd_modes.last().copied().unwrap_or(0);
    let mut tail_envelope: f64 = 0.0;
    for k in (1..=k_model).filter(|k| k % 2 == 1 && *k > k_max_ctrl) {
        tail_envelope = tail_envelope.max((k as f64).powi(3) * end.coeff(k).abs());
    }
    Ok(NullControlReport {
        controlled_end,
        max_controlled_end,
        tail_envelope,
        end_l2: end.l2_norm(),
    })
}

/// A return-to-zero extension: free phase under `u_free` on [0, T], then a
/// moment-method corrector on [T, t_total] driving the controlled odd modes
/// of the linearized state to zero at t_total.
#[derive(Debug, Clone)]
pub struct ReturnToZero {
    pub control: TimeSignal,
    pub free_end: ModalField,
    pub gram_condition: f64,
    pub residual: f64,
    pub corrector_l2: f64,
}

pub fn return_to_zero(
    u_free: &TimeSignal,
    t_total: f64,
    odd_modes: &[usize],
    k_model: usize,
) -> Result<ReturnToZero> {
    if t_total <= u_free.t_end() {
        return Err(Error::InvalidInput("t_total must exceed the free phase".into()));
    }
    validate_modes(odd_modes)?;
    let y1 = heat_modal_solve(u_free, &ModalField::zeros(k_model), k_model, u_free.n_steps())?;
    let free_end = y1.last().clone();
    let window = t_total - u_free.t_end();
    let n_corr = (window / u_free.dt()).round() as usize;
    if n_corr == 0 || (n_corr as f64 * u_free.dt() - window).abs() > 1e-9 * window {
        return Err(Error::InvalidInput(
            "corrector window must be a multiple of the control step".into(),
        ));
    }
    // a_k(t_total) = e^{-mu w}(a_k(T) + omega_k int_0^w u* e^{mu tau} dtau):
    // zero end state needs targets c_k = -a_k(T) / omega_k.
    let targets: Vec<f64> = odd_modes
        .iter()
        .map(|&k| -free_end.coeff(k) / omega_coefficient(k))
        .collect();
    let problem = MomentProblem::new(window, odd_modes.to_vec(), targets)?;
    let corr = solve_moment_control(&problem, n_corr)?;
    let control = u_free.concat(&corr.control)?;
    Ok(ReturnToZero {
        control,
        free_end,
        gram_condition: corr.gram_condition,
        residual: corr.residual,
        corrector_l2: corr.control.l2_norm_sq().sqrt(),
    })
}
