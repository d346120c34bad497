//! The frequency-domain multiplier machinery.
//!
//! Everything here revolves around the branch pair Lambda_{1,k}(z) =
//! -Lambda_{2,k}(z), the square roots of `i z - (k pi)^2 / 2`, and the derived
//! quantities P_k, Q_k, Theta_k, Psi_k, Phi_k and Omega_k. Two independent
//! routes are kept for each nontrivial object: a closed form assembled from
//! the algebraic decomposition, and direct quadrature of the defining
//! integral. The sign portrait of Omega_k (negative everywhere for k in
//! {2, 10}, negative beyond `3 (k pi)^2 / (2 sqrt 7)` for all even k) is what
//! the downstream obstruction experiments consume.

use crate::error::{Error, Result};
use crate::quadrature::{adaptive_gl, uniform_splits};
use num_complex::Complex64;

const PI: f64 = std::f64::consts::PI;

/// The principal pair at mode k and real frequency z.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaPair {
    pub k: usize,
    pub z: f64,
    pub lambda1: Complex64,
}

impl LambdaPair {
    pub fn lambda2(&self) -> Complex64 {
        -self.lambda1
    }
}

/// Lambda_{1,k}(z) from the explicit real/imaginary branch formula,
/// `sqrt(a/2 - (k pi)^2/4) + i sign(z) sqrt(a/2 + (k pi)^2/4)` with
/// `a = sqrt(z^2 + (k pi)^4/4)`; the real part is evaluated in the
/// cancellation-free form `|z| / sqrt(2 (a + (k pi)^2 / 2))`.
pub fn lambda1(k: usize, z: f64) -> Complex64 {
    let q = (k as f64 * PI).powi(2);
    let half_q = 0.5 * q;
    let a = z.hypot(half_q);
    let re = z.abs() / (2.0 * (a + half_q)).sqrt();
    let im = (0.5 * a + 0.25 * q).sqrt();
    let sign = if z < 0.0 { -1.0 } else { 1.0 };
    Complex64::new(re, sign * im)
}

pub fn lambda_pair(k: usize, z: f64) -> LambdaPair {
    LambdaPair {
        k,
        z,
        lambda1: lambda1(k, z),
    }
}

/// lambda_1 at a general complex argument: the square root of `i zc` with
/// argument in (-pi/2, pi/2], i.e. the principal branch.
pub fn lambda1_complex(zc: Complex64) -> Result<Complex64> {
    if zc == Complex64::new(0.0, 0.0) {
        return Err(Error::Domain("lambda_1 undefined at zc = 0".into()));
    }
    let l = (Complex64::i() * zc).sqrt();
    // Principal sqrt already lands in (-pi/2, pi/2]; nudge the negative-real
    // edge case (arg exactly -pi/2) onto the convention.
    if l.re == 0.0 && l.im < 0.0 {
        Ok(-l)
    } else {
        Ok(l)
    }
}

fn require_even(k: usize) -> Result<()> {
    if k == 0 || k % 2 != 0 {
        Err(Error::Domain(format!("closed form requires even k, got {k}")))
    } else {
        Ok(())
    }
}

fn require_nonneg(z: f64) -> Result<()> {
    if z < 0.0 {
        Err(Error::Domain(format!(
            "P_k, Q_k are defined for z >= 0 (got {z}); use evenness upstream"
        )))
    } else {
        Ok(())
    }
}

/// P_k(z) = e^{2 Re L1} - e^{-2 Re L1} - 2 Re(e^{L1} - e^{-L1}).
pub fn pk(k: usize, z: f64) -> Result<f64> {
    require_nonneg(z)?;
    let l1 = lambda1(k, z);
    let (r, b) = (l1.re, l1.im);
    Ok((2.0 * r).exp() - (-2.0 * r).exp() - 2.0 * (r.exp() - (-r).exp()) * b.cos())
}

/// The defining product `|e^{L2} - 1|^2 (e^{2 Re L1} - 1)`; cross-check route.
pub fn pk_definitional(k: usize, z: f64) -> Result<f64> {
    require_nonneg(z)?;
    let l1 = lambda1(k, z);
    let e2 = (-l1).exp();
    Ok((e2 - 1.0).norm_sqr() * ((2.0 * l1.re).exp() - 1.0))
}

/// Q_k(z) = -2 (e^{Re L1} + e^{-Re L1} - 2 cos Im L1) sin(Im L1).
pub fn qk(k: usize, z: f64) -> Result<f64> {
    require_nonneg(z)?;
    let l1 = lambda1(k, z);
    let (r, b) = (l1.re, l1.im);
    Ok(-2.0 * (r.exp() + (-r).exp() - 2.0 * b.cos()) * b.sin())
}

/// The defining imaginary part, Im{(e^{L2}-1)(e^{conj L1}-1)(e^{2i Im L1}-1)}.
pub fn qk_definitional(k: usize, z: f64) -> Result<f64> {
    require_nonneg(z)?;
    let l1 = lambda1(k, z);
    let f = ((-l1).exp() - 1.0) * (l1.conj().exp() - 1.0)
        * ((Complex64::new(0.0, 2.0 * l1.im)).exp() - 1.0);
    Ok(f.im)
}

/// sqrt(z^2 + (k pi)^4 / 4).
fn a_of(k: usize, z: f64) -> f64 {
    z.hypot(0.5 * (k as f64 * PI).powi(2))
}

/// Theta_k for even k through the A + B decomposition; even in z.
pub fn theta_closed(k: usize, z: f64) -> Result<f64> {
    require_even(k)?;
    let z = z.abs();
    let l1 = lambda1(k, z);
    if 2.0 * l1.re > 700.0 {
        return Err(Error::WeightOverflow {
            exponent: 2.0 * l1.re,
            limit: 700.0,
        });
    }
    let q = (k as f64 * PI).powi(2);
    let a = a_of(k, z);
    let big_a = (2.0 * q + a) * pk(k, z)? * l1.re;
    let big_b = (2.0 * q - a) * qk(k, z)? * l1.im;
    Ok(-2.0 * (big_a + big_b) / (a * a))
}

/// Complex integrand of the Theta/Psi integral at x.
fn psi_integrand(l1: Complex64, x: f64) -> Complex64 {
    let l2 = -l1;
    let e1 = l1.exp();
    let e2 = l2.exp();
    (e2 - 1.0) * (l1 * x).exp() + (1.0 - e1) * (l2 * x).exp() + e1 - e2
}

fn modulus_sq_cos_quad(l1: Complex64, k: usize) -> Result<f64> {
    if 2.0 * l1.re.abs() > 690.0 {
        return Err(Error::WeightOverflow {
            exponent: 2.0 * l1.re.abs(),
            limit: 690.0,
        });
    }
    // Oscillation frequency ~ max(Im L1, k pi); one wave per panel.
    let freq = l1.im.abs().max(k as f64 * PI).max(1.0);
    let splits = uniform_splits(0.0, 1.0, (2.0 * PI / freq).min(0.5));
    adaptive_gl(
        |x| psi_integrand(l1, x).norm_sqr() * (k as f64 * PI * x).cos(),
        0.0,
        1.0,
        &splits,
        1e-12,
        1e-10,
        20,
    )
}

/// Independent oracle: direct adaptive quadrature of the defining integral
/// `int_0^1 |...|^2 cos(k pi x) dx` at the shifted line. Any k >= 1.
pub fn theta_quadrature(k: usize, z: f64) -> Result<f64> {
    if k == 0 {
        return Err(Error::Domain("k >= 1 required".into()));
    }
    modulus_sq_cos_quad(lambda1(k, z), k)
}

/// Psi_k at a general nonzero complex argument (quadrature route).
pub fn psi(k: usize, zc: Complex64) -> Result<f64> {
    modulus_sq_cos_quad(lambda1_complex(zc)?, k)
}

/// Phi_k(zc) = Psi_k(zc) / (|zc|^2 |e^{l1} - e^{l2}|^2).
pub fn phi_cap(k: usize, zc: Complex64) -> Result<f64> {
    let l1 = lambda1_complex(zc)?;
    let denom = (l1.exp() - (-l1).exp()).norm_sqr();
    Ok(psi(k, zc)? / (zc.norm_sqr() * denom))
}

/// The five terms of the Theta decomposition, from their closed forms.
/// Order: [I1, I2, I3, I4, I5] with I1 = I2 and I4 = I5 structurally.
pub fn i_decomposition(k: usize, z: f64) -> Result<[f64; 5]> {
    require_even(k)?;
    require_nonneg(z)?;
    let l1 = lambda1(k, z);
    let (r, b) = (l1.re, l1.im);
    let q = (k as f64 * PI).powi(2);
    let a = a_of(k, z);
    let p = pk(k, z)?;
    let qq = qk(k, z)?;
    let i1 = r * p / a;
    let i3 = -2.0 * b * qq / a;
    let i4 = -2.0 * (p * (0.5 * q * r + z * b) - qq * (z * r - 0.5 * q * b)) / (a * a);
    Ok([i1, i1, i3, i4, i4])
}

/// `int_0^1 e^{w x} cos(k pi x) dx` by adaptive quadrature (oracle route).
fn exp_cos_quad(w: Complex64, k: usize) -> Result<Complex64> {
    let freq = w.im.abs().max(k as f64 * PI).max(1.0);
    let splits = uniform_splits(0.0, 1.0, (2.0 * PI / freq).min(0.5));
    let kpi = k as f64 * PI;
    let re = adaptive_gl(
        |x| (w.re * x).exp() * (w.im * x).cos() * (kpi * x).cos(),
        0.0,
        1.0,
        &splits,
        1e-13,
        1e-11,
        20,
    )?;
    let im = adaptive_gl(
        |x| (w.re * x).exp() * (w.im * x).sin() * (kpi * x).cos(),
        0.0,
        1.0,
        &splits,
        1e-13,
        1e-11,
        20,
    )?;
    Ok(Complex64::new(re, im))
}

/// The same five terms evaluated by direct quadrature of their defining
/// integrals; the per-term independent oracle.
pub fn i_quadrature(k: usize, z: f64) -> Result<[f64; 5]> {
    if k == 0 {
        return Err(Error::Domain("k >= 1 required".into()));
    }
    require_nonneg(z)?;
    let l1 = lambda1(k, z);
    let l2 = -l1;
    let e1 = l1.exp();
    let e2 = l2.exp();
    let i1 = (e2 - 1.0).norm_sqr() * exp_cos_quad(Complex64::new(2.0 * l1.re, 0.0), k)?.re;
    let i2 = (e1 - 1.0).norm_sqr() * exp_cos_quad(Complex64::new(2.0 * l2.re, 0.0), k)?.re;
    let i3 = 2.0
        * ((e2 - 1.0) * (1.0 - l1.conj().exp()) * exp_cos_quad(l1 + l2.conj(), k)?).re;
    let diff = l1.conj().exp() - l2.conj().exp();
    let i4 = 2.0 * ((e2 - 1.0) * diff * exp_cos_quad(l1, k)?).re;
    let i5 = 2.0 * ((1.0 - e1) * diff * exp_cos_quad(l2, k)?).re;
    Ok([i1, i2, i3, i4, i5])
}

/// Omega_k(z) = Theta_k(z) / ((z^2 + (k pi)^4/4) |e^{L1} - e^{L2}|^2),
/// assembled with the factor e^{2 Re L1} cancelled analytically between
/// numerator and denominator so the evaluation never overflows (z up to
/// ~1e12 and beyond). Even in z.
pub fn omega(k: usize, z: f64) -> Result<f64> {
    require_even(k)?;
    let z = z.abs();
    let l1 = lambda1(k, z);
    let (r, b) = (l1.re, l1.im);
    let q = (k as f64 * PI).powi(2);
    let a = a_of(k, z);
    let em = (-r).exp();
    let em2 = em * em;
    let em3 = em2 * em;
    let em4 = em2 * em2;
    // P, Q and |e^{L1}-e^{L2}|^2, each divided by e^{2 Re L1}.
    let p_s = 1.0 - em4 - 2.0 * b.cos() * (em - em3);
    let q_s = -2.0 * (em + em3 - 2.0 * em2 * b.cos()) * b.sin();
    let d_s = 1.0 + em4 - 2.0 * em2 * (2.0 * b).cos();
    let a4 = (z * z + 0.25 * q * q).powi(2);
    Ok(-2.0 * ((2.0 * q + a) * p_s * r + (2.0 * q - a) * q_s * b) / (a4 * d_s))
}

/// z^{5/2} Omega_k(z) + sqrt(2); decays like 1/z for even k.
pub fn asymptotic_deficit(k: usize, z: f64) -> Result<f64> {
    if z <= 0.0 {
        return Err(Error::Domain("asymptotic deficit needs z > 0".into()));
    }
    Ok(z.powf(2.5) * omega(k, z)? + std::f64::consts::SQRT_2)
}

/// Result of scanning Omega_k over a symmetric grid.
#[derive(Debug, Clone, serde::Serialize)]
pub struct SignScanReport {
    pub k: usize,
    pub z_max: f64,
    pub n_points: usize,
    /// 3 (k pi)^2 / (2 sqrt 7): negativity is guaranteed beyond this.
    pub threshold: f64,
    pub max_omega: f64,
    pub argmax_z: f64,
    pub negative_beyond_threshold: bool,
    pub negative_everywhere: bool,
}

pub fn threshold(k: usize) -> f64 {
    3.0 * (k as f64 * PI).powi(2) / (2.0 * 7.0f64.sqrt())
}

/// Scan Omega_k on `n` points of [-z_max, z_max].
pub fn sign_scan(k: usize, z_max: f64, n: usize) -> Result<SignScanReport> {
    require_even(k)?;
    if n < 3 {
        return Err(Error::InvalidInput("scan needs n >= 3 points".into()));
    }
    let thr = threshold(k);
    let mut max_omega = f64::NEG_INFINITY;
    let mut argmax_z = 0.0;
    let mut neg_beyond = true;
    let mut neg_all = true;
    for j in 0..n {
        let z = -z_max + 2.0 * z_max * j as f64 / (n - 1) as f64;
        let w = omega(k, z)?;
        if w > max_omega {
            max_omega = w;
            argmax_z = z;
        }
        if w >= 0.0 {
            neg_all = false;
            if z.abs() > thr {
                neg_beyond = false;
            }
        }
    }
    Ok(SignScanReport {
        k,
        z_max,
        n_points: n,
        threshold: thr,
        max_omega,
        argmax_z,
        negative_beyond_threshold: neg_beyond,
        negative_everywhere: neg_all,
    })
}

/// Everything at one (k, z): the CSV row of the scan commands.
#[derive(Debug, Clone, serde::Serialize)]
pub struct MultiplierSample {
    pub k: usize,
    pub z: f64,
    pub lambda_re: f64,
    pub lambda_im: f64,
    pub p: f64,
    pub q: f64,
    pub theta: f64,
    pub omega: f64,
    pub i: [f64; 5],
}

impl MultiplierSample {
    /// P, Q, Theta, I_j are taken at |z| (they are defined for z >= 0 and
    /// extended by evenness); Lambda keeps the sign convention.
    pub fn compute(k: usize, z: f64) -> Result<Self> {
        let l1 = lambda1(k, z);
        let za = z.abs();
        Ok(Self {
            k,
            z,
            lambda_re: l1.re,
            lambda_im: l1.im,
            p: pk(k, za)?,
            q: qk(k, za)?,
            theta: theta_closed(k, za)?,
            omega: omega(k, za)?,
            i: i_decomposition(k, za)?,
        })
    }
}

/// Closed form for the transformed first-order state,
/// `hat y_1(zc, x) = (i uhat / zc) ((e^{l2}-1)/(e^{l2}-e^{l1}) e^{l1 x}
///  + (1-e^{l1})/(e^{l2}-e^{l1}) e^{l2 x} - 1)`.
/// With `shift = Some(k)` the argument is moved to the line `zc + i (k pi)^2/2`.
pub fn hat_y1_closed(
    shift: Option<usize>,
    zc: Complex64,
    x: f64,
    u_hat: Complex64,
) -> Result<Complex64> {
    let zc_eff = match shift {
        Some(k) => zc + Complex64::new(0.0, 0.5 * (k as f64 * PI).powi(2)),
        None => zc,
    };
    let l1 = lambda1_complex(zc_eff)?;
    let l2 = -l1;
    let e1 = l1.exp();
    let e2 = l2.exp();
    let denom = e2 - e1;
    let bracket =
        (e2 - 1.0) / denom * (l1 * x).exp() + (1.0 - e1) / denom * (l2 * x).exp() - 1.0;
    Ok(Complex64::i() * u_hat / zc_eff * bracket)
}
