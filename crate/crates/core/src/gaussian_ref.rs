//! Analytic references from Gaussian field theory: the two-mode model, the
//! weakly interacting Bose gas, and the cutoff-regulated complexity densities
//!
//! ```text
//! c_kappa = 2^(1-kappa) Omega_{d-1} / (2 pi)^d
//!           * int_0^sqrt(w0^2 - m^2) p^(d-1) |ln(sqrt(p^2 + m^2) / w0)|^kappa dp
//! ```
//!
//! with their closed forms in d = 2, 3. Logarithms are natural throughout.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadratic::ModeBlock;
use crate::quadrature::integrate;

const QUAD_REL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianParams {
    /// Mass gap.
    pub m: f64,
    /// Reference (UV) frequency.
    pub omega0: f64,
    pub d: usize,
    pub kappa: f64,
}

impl GaussianParams {
    pub fn new(m: f64, omega0: f64, d: usize, kappa: f64) -> Result<Self> {
        let g = Self { m, omega0, d, kappa };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega0 > 0.0) || !(self.m >= 0.0) || self.m > self.omega0 {
            return Err(Error::Domain(format!(
                "need 0 <= m <= omega0, got m = {}, omega0 = {}",
                self.m, self.omega0
            )));
        }
        if self.d == 0 {
            return Err(Error::Domain("dimension must be >= 1".into()));
        }
        if !(self.kappa >= 1.0) {
            return Err(Error::Domain(format!("kappa must be >= 1, got {}", self.kappa)));
        }
        Ok(())
    }

    fn with_omega0(self, omega0: f64) -> Self {
        Self { omega0, ..self }
    }

    fn with_kappa(self, kappa: f64) -> Self {
        Self { kappa, ..self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GasParams {
    /// Boson mass.
    pub mass: f64,
    /// Interaction scale `U = n U_0`.
    pub u: f64,
    pub d: usize,
}

/// `Gamma(d/2)` for integer `d >= 1`.
fn gamma_half(d: usize) -> f64 {
    let mut g = if d.is_multiple_of(2) { 1.0 } else { PI.sqrt() };
    let mut x = if d.is_multiple_of(2) { 1.0 } else { 0.5 };
    while x < d as f64 / 2.0 - 0.25 {
        g *= x;
        x += 1.0;
    }
    g
}

/// Area of the unit sphere `S^(d-1)`, `2 pi^(d/2) / Gamma(d/2)`.
pub fn sphere_area(d: usize) -> f64 {
    2.0 * PI.powf(d as f64 / 2.0) / gamma_half(d)
}

/// `C_kappa = 2^(1-kappa) |atanh lambda|^kappa` of the two-mode model.
pub fn two_mode_complexity(lambda: f64, kappa: f64) -> Result<f64> {
    if !(lambda.abs() < 1.0) {
        return Err(Error::Domain(format!("two-mode coupling must satisfy |lambda| < 1, got {lambda}")));
    }
    Ok(2f64.powf(1.0 - kappa) * lambda.atanh().abs().powf(kappa))
}

/// Two coupled unit oscillators, `M = 1`, `P = [[0, lambda], [lambda, 0]]`.
pub fn two_mode_block(lambda: f64) -> ModeBlock {
    ModeBlock::from_matrices(DMatrix::identity(2, 2), DMatrix::from_row_slice(2, 2, &[0.0, lambda, lambda, 0.0]))
}

/// One oscillator of frequency `omega` written in the basis of a reference
/// oscillator of frequency `omega0`.
pub fn free_field_block(omega0: f64, omega: f64) -> ModeBlock {
    let m = (omega0 * omega0 + omega * omega) / (2.0 * omega0);
    let p = (omega * omega - omega0 * omega0) / (2.0 * omega0);
    ModeBlock::from_matrices(DMatrix::from_element(1, 1, m), DMatrix::from_element(1, 1, p))
}

/// Weak-gas block at momentum `p`: `M = p^2 / 2m + U`, `P = U`.
pub fn gas_block(p: f64, gas: &GasParams) -> ModeBlock {
    ModeBlock::from_matrices(
        DMatrix::from_element(1, 1, p * p / (2.0 * gas.mass) + gas.u),
        DMatrix::from_element(1, 1, gas.u),
    )
}

/// `theta_p = 1/2 atanh(2mU / (p^2 + 2mU))`; infinite at `p = 0`.
pub fn gas_theta(p: f64, gas: &GasParams) -> f64 {
    let a = 2.0 * gas.mass * gas.u;
    if p == 0.0 {
        return if a > 0.0 { f64::INFINITY } else { 0.0 };
    }
    // 1/2 atanh(a / (p^2 + a)) = 1/4 ln(1 + 2a / p^2), stable for small p
    0.25 * (2.0 * a / (p * p)).ln_1p()
}

/// Closed-form `c_2` of the three-dimensional weak gas,
/// `(2 - ln 4) (4 m U)^(3/2) / (48 pi)`.
pub fn gas_c2_d3(gas: &GasParams) -> f64 {
    (2.0 - 4f64.ln()) * (4.0 * gas.mass * gas.u).powf(1.5) / (48.0 * PI)
}

/// `int d^d p / (2 pi)^d |theta_p|^kappa` over all momenta, by quadrature after
/// mapping `p = s u / (1 - u)` onto `u in (0, 1)`.
pub fn gas_c_kappa_quadrature(gas: &GasParams, kappa: f64) -> Result<f64> {
    let a = 2.0 * gas.mass * gas.u;
    if !(a > 0.0) {
        return Ok(0.0);
    }
    let s = a.sqrt();
    let d = gas.d as i32;
    let pref = sphere_area(gas.d) / (2.0 * PI).powi(d);
    let r = integrate(
        |u| {
            let p = s * u / (1.0 - u);
            let jac = s / ((1.0 - u) * (1.0 - u));
            p.powi(d - 1) * gas_theta(p, gas).powf(kappa) * jac
        },
        0.0,
        1.0,
        0.0,
        QUAD_REL,
    )?;
    Ok(pref * r.value)
}

/// `c_kappa` by adaptive quadrature, any `d >= 1` and `kappa >= 1`.
pub fn c_kappa_quadrature(g: &GaussianParams) -> Result<f64> {
    g.validate()?;
    if g.m >= g.omega0 {
        return Ok(0.0);
    }
    let cutoff = (g.omega0 * g.omega0 - g.m * g.m).sqrt();
    let d = g.d as i32;
    let pref = 2f64.powf(1.0 - g.kappa) * sphere_area(g.d) / (2.0 * PI).powi(d);
    let m2 = g.m * g.m;
    let w2 = g.omega0 * g.omega0;
    let r = integrate(
        |p| p.powi(d - 1) * (0.5 * ((p * p + m2) / w2).ln()).abs().powf(g.kappa),
        0.0,
        cutoff,
        0.0,
        QUAD_REL,
    )?;
    Ok(pref * r.value)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedForm {
    pub value: f64,
    /// Power of `m` at which a small-mass expansion was truncated, if any.
    pub truncated_at: Option<u32>,
}

/// Closed forms for `d in {2, 3}`, `kappa in {1, 2}`. The d = 3, kappa = 2
/// value is the small-mass expansion through `m^3`.
pub fn c_closed_form(g: &GaussianParams) -> Result<ClosedForm> {
    g.validate()?;
    let (m, w) = (g.m, g.omega0);
    let m2 = m * m;
    let w2 = w * w;
    // m^2 ln m^2, continuous at m = 0
    let xlx = |x: f64| if x == 0.0 { 0.0 } else { x * x.ln() };
    let exact = |value| Ok(ClosedForm { value, truncated_at: None });
    match (g.d, g.kappa) {
        (2, 1.0) => exact((xlx(m2) - m2 * w2.ln() - m2 + w2) / (8.0 * PI)),
        (2, 2.0) => {
            let lm = if m2 == 0.0 { 0.0 } else { m2.ln() };
            let lw = w2.ln();
            let v = -0.5 * m2 * lm * lm + m2 * lm * lw - 0.5 * m2 * lw * lw + (xlx(m2) - m2 * lw) - m2 + w2;
            exact(v / (16.0 * PI))
        }
        (3, 1.0) => {
            if m == w {
                return exact(0.0);
            }
            let s = (w2 - m2).sqrt();
            let bracket = w2 * w2 / 3.0 - 5.0 / 3.0 * m2 * w2 + 4.0 / 3.0 * m2 * m2
                + m2 * m * s * (1.0 - m2 / w2).sqrt().asin();
            exact(bracket / (s * 6.0 * PI * PI))
        }
        (3, 2.0) => {
            let m3 = m2 * m;
            let v = w2 * w / (54.0 * PI * PI) - w * m2 / (4.0 * PI * PI) - xlx(m2) * m / (24.0 * PI)
                + m3 / (36.0 * PI) * (1.5 * w2.ln() - 1.5 * 4f64.ln() + 4.0);
            Ok(ClosedForm {
                value: v,
                truncated_at: Some(4),
            })
        }
        _ => Err(Error::Domain(format!(
            "closed form available for d in {{2, 3}} and kappa in {{1, 2}}, got d = {}, kappa = {}",
            g.d, g.kappa
        ))),
    }
}

/// Documented bound on the truncation error of the d = 3, kappa = 2 expansion.
pub fn d3_c2_truncation_bound(g: &GaussianParams) -> f64 {
    1e-2 * (g.m / g.omega0).powi(4) * g.omega0.powi(3)
}

/// `c_kappa` from the closed form when one exists, else by quadrature.
pub fn c_kappa(g: &GaussianParams) -> Result<f64> {
    match c_closed_form(g) {
        Ok(cf) => Ok(cf.value),
        Err(_) => c_kappa_quadrature(g),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecursionCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub absolute: f64,
    /// Residual relative to `c_{kappa-1}`; equals `absolute` when that vanishes.
    pub relative: f64,
}

/// Residual of `c_{kappa-1} = (2 w0 / kappa) dc_kappa/dw0`, the derivative by
/// central differences with step `1e-5 w0`.
pub fn recursion_residual(g: &GaussianParams) -> Result<RecursionCheck> {
    g.validate()?;
    if g.kappa < 2.0 {
        return Err(Error::Domain("recursion needs kappa >= 2".into()));
    }
    let h = 1e-5 * g.omega0;
    let lower = g.with_kappa(g.kappa - 1.0);
    let lhs = c_kappa(&lower)?;
    let eval = |w: f64| -> Result<f64> {
        // keep the mass below the shifted cutoff at the m = w0 edge
        let p = g.with_omega0(w);
        if p.m > w {
            Ok(0.0)
        } else {
            c_kappa(&p)
        }
    };
    let deriv = (eval(g.omega0 + h)? - eval(g.omega0 - h)?) / (2.0 * h);
    let rhs = 2.0 * g.omega0 / g.kappa * deriv;
    let absolute = (lhs - rhs).abs();
    let relative = if lhs != 0.0 { absolute / lhs.abs() } else { absolute };
    Ok(RecursionCheck {
        lhs,
        rhs,
        absolute,
        relative,
    })
}
