//! Complex-analytic layer: the completed-zeta logarithm and its scaled
//! real form on the critical line, the logarithmic-derivative detector whose
//! sign changes mark zeros of the derivative, the second-to-first derivative
//! ratio, and its truncated Dirichlet-series approximation.

pub mod gamma;
pub mod zeta;

use crate::arith::ArithTables;
use crate::error::{Error, Result};
use crate::util::KahanSum;
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

pub use gamma::{digamma, ln_gamma, trigamma};
pub use zeta::{zeta_derivs, zeta_em, HEIGHT_CAP};

/// A point of evaluation with its precision target.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EvalPoint {
    pub sigma: f64,
    pub t: f64,
    pub precision: f64,
}

impl EvalPoint {
    /// Point on the critical line, sigma = 1/2 exactly.
    pub fn critical_line(t: f64) -> Self {
        Self {
            sigma: 0.5,
            t,
            precision: 1e-12,
        }
    }

    /// Point just right of the 1-line at height t: sigma = 1 + 1/log(t/2pi).
    pub fn mollifier_line(t: f64) -> Self {
        let l = (t / (2.0 * PI)).ln();
        Self {
            sigma: 1.0 + 1.0 / l,
            t,
            precision: 1e-12,
        }
    }

    pub fn off_line(sigma: f64, t: f64) -> Self {
        Self {
            sigma,
            t,
            precision: 1e-12,
        }
    }

    pub fn with_precision(mut self, precision: f64) -> Result<Self> {
        if !(1e-14..=1e-6).contains(&precision) {
            return Err(Error::Domain(
                "precision target must lie in [1e-14, 1e-6]".into(),
            ));
        }
        self.precision = precision;
        Ok(self)
    }

    pub fn s(&self) -> Complex64 {
        Complex64::new(self.sigma, self.t)
    }
}

/// The scaled completed-zeta value at height t on the critical line.
///
/// `scaled_value` carries the factor exp(pi t / 4) so the number stays in
/// double range up to the height cap; `log_magnitude` is its natural log,
/// and `sign` is -1, 0 or +1 matching `scaled_value`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct XiValue {
    pub scaled_value: f64,
    pub log_magnitude: f64,
    pub sign: i8,
}

/// log of the completed zeta function xi(s) = s(s-1)/2 * pi^{-s/2}
/// Gamma(s/2) zeta(s), mod 2*pi*i.
pub(crate) fn log_xi(s: Complex64, zeta_tol: f64) -> Result<Complex64> {
    let z = zeta_em(s, 0, zeta_tol)?;
    if z.norm() == 0.0 {
        return Err(Error::Conditioning("zeta vanished to double precision".into()));
    }
    Ok((s * (s - 1.0) / 2.0).ln() - (s / 2.0) * PI.ln() + ln_gamma(s / 2.0) + z.ln())
}

/// Internal form of [`xi_scaled`] that also returns the realness residual
/// instead of gating on it. The sign is reliable whenever the residual is
/// well below pi/2, which holds even deep inside bisection brackets where
/// the phase of zeta is poorly conditioned.
pub(crate) fn xi_scaled_raw(t: f64) -> Result<(XiValue, f64)> {
    if !(0.0..=HEIGHT_CAP).contains(&t) {
        return Err(Error::Capacity(format!(
            "t = {t} outside the supported range [0, {HEIGHT_CAP}]"
        )));
    }
    let s = Complex64::new(0.5, t);
    let lx = log_xi(s, 1e-12)?;
    let k = (lx.im / PI).round();
    let residual = (lx.im - k * PI).abs();
    let sign = if (k as i64).rem_euclid(2) == 0 { 1i8 } else { -1i8 };
    let log_magnitude = lx.re + PI * t / 4.0;
    let scaled_value = sign as f64 * log_magnitude.exp();
    Ok((
        XiValue {
            scaled_value,
            log_magnitude,
            sign: if scaled_value == 0.0 { 0 } else { sign },
        },
        residual,
    ))
}

/// Xi(t) e^{pi t/4} with sign, where Xi(t) is the completed zeta function on
/// the critical line. Errors if the imaginary part of the assembled
/// logarithm strays from a multiple of pi by more than 1e-6.
pub fn xi_scaled(t: f64) -> Result<XiValue> {
    let (v, residual) = xi_scaled_raw(t)?;
    if residual > 1e-6 {
        return Err(Error::Precision(format!(
            "realness residual {residual:.3e} at t = {t}"
        )));
    }
    Ok(v)
}

/// The rational-plus-digamma part of the logarithmic derivative of xi:
/// order 0 returns 1/s + 1/(s-1) - log(pi)/2 + psi(s/2)/2, order 1 its
/// derivative.
pub fn l_func(s: Complex64, order: u8) -> Result<Complex64> {
    if s.norm() < 1e-12 || (s - 1.0).norm() < 1e-12 {
        return Err(Error::Domain("pole of the rational part at s = 0 or 1".into()));
    }
    let half = s / 2.0;
    if half.re <= 0.0 && half.im.abs() < 1e-12 && (half.re - half.re.round()).abs() < 1e-12 {
        return Err(Error::Domain(
            "s/2 at a nonpositive integer is a digamma pole".into(),
        ));
    }
    match order {
        0 => Ok(s.inv() + (s - 1.0).inv() - PI.ln() / 2.0 + 0.5 * digamma(half)),
        1 => Ok(-(s * s).inv() - ((s - 1.0) * (s - 1.0)).inv() + 0.25 * trigamma(half)),
        _ => Err(Error::Domain("order must be 0 or 1".into())),
    }
}

/// Detector for zeros of the derivative of the completed zeta function on
/// the critical line: the scaled derivative factorizes as
/// Xi'(t) = Xi(t) g(t) with g(t) = -Im[(L + zeta'/zeta)(1/2 + it)].
///
/// g has a simple-pole sign flip at every zeta zero and changes sign exactly
/// at the derivative's zeros strictly between consecutive zeta zeros.
pub fn g_detector(t: f64) -> Result<f64> {
    if t.abs() > HEIGHT_CAP {
        return Err(Error::Capacity(format!("t = {t} beyond the height cap")));
    }
    let s = Complex64::new(0.5, t);
    let d = zeta_derivs(s, 1, 1e-11)?;
    let dist = d[0].norm() / d[1].norm().max(1e-300);
    if dist < 1e-6 {
        return Err(Error::PoleProximity(format!(
            "t = {t} is within ~{dist:.2e} of a zeta zero"
        )));
    }
    let l = l_func(s, 0)?;
    Ok(-(l + d[1] / d[0]).im)
}

/// Ratio of the second to the first derivative of the completed zeta
/// function, assembled from w = L + zeta'/zeta as w + w'/w.
pub fn xi2_over_xi1(s: Complex64) -> Result<Complex64> {
    let d = zeta_derivs(s, 2, 1e-11)?;
    let w = l_func(s, 0)? + d[1] / d[0];
    let wp = l_func(s, 1)? + (d[2] * d[0] - d[1] * d[1]) / (d[0] * d[0]);
    let dist = w.norm() / wp.norm().max(1e-300);
    if dist < 1e-6 {
        return Err(Error::Conditioning(format!(
            "s = {s} is within ~{dist:.2e} of a zero of the first derivative"
        )));
    }
    Ok(w + wp / w)
}

/// Truncated Dirichlet-series approximation of [`xi2_over_xi1`] to the right
/// of the 1-line: L/2 plus the sum over n <= n_max of the k-truncated
/// coefficient divided by n^s, where L = log(|Im s| / 2 pi).
pub fn xi2_series_truncated(
    tables: &ArithTables,
    s: Complex64,
    n_max: u64,
    k_max: u32,
    ) -> Result<Complex64> {
    if s.re <= 0.5 {
        return Err(Error::Domain("series form requires sigma > 1/2".into()));
    }
    if k_max > 30 {
        return Err(Error::Domain("truncation order k_max must be <= 30".into()));
    }
    if s.im.abs() <= 2.0 * PI {
        return Err(Error::Domain(
            "height must exceed 2 pi for the log normalization".into(),
        ));
    }
    if n_max > tables.limit() as u64 {
        return Err(Error::Capacity(format!(
            "n_max = {n_max} exceeds sieve limit {}",
            tables.limit()
        )));
    }
    let l_scalar = (s.im.abs() / (2.0 * PI)).ln();
    let ls = l_func(s, 0)?;
    let inv_ls = ls.inv();

    // Coefficients vanish for k beyond log2(n_max).
    let k_eff = k_max.min(64 - (n_max.max(2)).leading_zeros());

    let nb = n_max as usize;
    let mut coef = vec![Complex64::new(0.0, 0.0); nb + 1];
    let mut lp = Complex64::new(1.0, 0.0);
    for k in 0..=k_eff {
        let arr = tables.alpha_array(k, n_max)?;
        for n in 2..=nb {
            if arr[n] != 0.0 {
                coef[n] += arr[n] * lp;
            }
        }
        lp *= inv_ls;
    }

    let mut re = KahanSum::new();
    let mut im = KahanSum::new();
    for (n, &c) in coef.iter().enumerate().skip(2) {
        if c.norm_sqr() == 0.0 {
            continue;
        }
        let term = c * (-s * (n as f64).ln()).exp();
        re.add(term.re);
        im.add(term.im);
    }
    Ok(Complex64::new(l_scalar / 2.0 + re.value(), im.value()))
}
