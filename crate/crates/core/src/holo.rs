//! Complexity=volume deficit of AdS capped by a wall at depth `xi`:
//! `delta C_V = sigma_d L^d / (d G_N) xi^(-d)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HoloParams {
    /// Boundary spatial dimension.
    pub d: usize,
    /// AdS radius.
    pub l: f64,
    pub g_n: f64,
    /// Boundary spatial volume.
    pub sigma_d: f64,
    /// Wall position; ignored when `delta_t` is given.
    pub xi: f64,
    /// Correlation-length exponent.
    pub nu: f64,
    /// Distance to the critical point; sets `xi = |delta_t|^(-nu)`.
    pub delta_t: Option<f64>,
}

impl HoloParams {
    pub fn correlation_length(&self) -> f64 {
        match self.delta_t {
            Some(dt) => dt.abs().powf(-self.nu),
            None => self.xi,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let pos = [self.l, self.g_n, self.sigma_d, self.nu];
        if self.d == 0 || pos.iter().any(|&x| !(x > 0.0)) {
            return Err(Error::Domain("holographic parameters must be positive".into()));
        }
        match self.delta_t {
            Some(dt) if !(dt != 0.0 && dt.is_finite()) => {
                Err(Error::Domain("delta_t must be finite and nonzero".into()))
            }
            None if !(self.xi > 0.0) => Err(Error::Domain("xi must be positive".into())),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CvDelta {
    pub xi: f64,
    pub delta_cv: f64,
    /// `nu d`, the power of `|delta_t|`, when `delta_t` was given.
    pub exponent: Option<f64>,
}

pub fn cv_delta(p: &HoloParams) -> Result<CvDelta> {
    p.validate()?;
    let xi = p.correlation_length();
    let d = p.d as i32;
    let delta_cv = if xi.is_infinite() {
        0.0
    } else {
        p.sigma_d * p.l.powi(d) / (p.d as f64 * p.g_n) * xi.powi(-d)
    };
    Ok(CvDelta {
        xi,
        delta_cv,
        exponent: p.delta_t.map(|_| p.nu * p.d as f64),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(d: usize, xi: f64) -> HoloParams {
        HoloParams {
            d,
            l: 1.0,
            g_n: 1.0,
            sigma_d: 1.0,
            xi,
            nu: 0.5,
            delta_t: None,
        }
    }

    #[test]
    fn closed_form_value() {
        assert_eq!(cv_delta(&unit(2, 2.0)).unwrap().delta_cv, 0.125);
    }

    #[test]
    fn doubling_xi() {
        for d in 1..=4 {
            let a = cv_delta(&unit(d, 1.7)).unwrap().delta_cv;
            let b = cv_delta(&unit(d, 3.4)).unwrap().delta_cv;
            assert!((a / b - 2f64.powi(d as i32)).abs() < 1e-12);
        }
    }

    #[test]
    fn fixed_point_limit() {
        assert_eq!(cv_delta(&unit(2, f64::INFINITY)).unwrap().delta_cv, 0.0);
    }

    #[test]
    fn from_delta_t() {
        let p = HoloParams {
            delta_t: Some(1e-2),
            ..unit(2, 1.0)
        };
        let r = cv_delta(&p).unwrap();
        assert!((r.xi - 10.0).abs() < 1e-12);
        assert_eq!(r.exponent, Some(1.0));
        // delta C_V = |delta_t|^(nu d) / d
        assert!((r.delta_cv - 0.5e-2).abs() < 1e-15);
    }
}
