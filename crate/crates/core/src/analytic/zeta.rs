//! Euler-Maclaurin evaluation of zeta and its first two derivatives on the
//! strip, valid for |Im s| up to the crate's height cap of 5000.
//!
//! The truncation point grows linearly with the height; the correction sum
//! is extended until its terms drop below the requested tolerance, with an
//! automatic restart at a larger truncation if the terms stop decreasing.

use crate::error::{Error, Result};
use crate::util::{KahanSum, BERNOULLI_2K};
use num_complex::Complex64;

pub const HEIGHT_CAP: f64 = 5000.0;

/// zeta(s), zeta'(s) or zeta''(s) depending on `order`.
pub fn zeta_em(s: Complex64, order: u8, tol: f64) -> Result<Complex64> {
    if order > 2 {
        return Err(Error::Domain("derivative order must be 0, 1 or 2".into()));
    }
    let d = zeta_derivs(s, order, tol)?;
    Ok(d[order as usize])
}

/// All derivatives of zeta up to `max_order` in one Euler-Maclaurin sweep.
pub fn zeta_derivs(s: Complex64, max_order: u8, tol: f64) -> Result<[Complex64; 3]> {
    if (s - Complex64::new(1.0, 0.0)).norm() < 1e-12 {
        return Err(Error::Domain("zeta has a pole at s = 1".into()));
    }
    if s.im.abs() > HEIGHT_CAP {
        return Err(Error::Capacity(format!(
            "height {} exceeds the double-precision cap {HEIGHT_CAP}",
            s.im.abs()
        )));
    }
    let tol = tol.max(1e-15);
    let orders = max_order.min(2);

    let mut n = (0.6 * s.im.abs() + 14.0).ceil() as usize;
    for _ in 0..4 {
        match em_attempt(s, orders, tol, n) {
            Some(vals) => return Ok(vals),
            None => n *= 2,
        }
    }
    Err(Error::Precision(format!(
        "Euler-Maclaurin correction series did not reach tol {tol} at s = {s}"
    )))
}

struct CKahan {
    re: KahanSum,
    im: KahanSum,
}

impl CKahan {
    fn new() -> Self {
        Self {
            re: KahanSum::new(),
            im: KahanSum::new(),
        }
    }
    #[inline]
    fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }
    fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

fn em_attempt(s: Complex64, orders: u8, tol: f64, n: usize) -> Option<[Complex64; 3]> {
    let nf = n as f64;
    let ln_n = nf.ln();

    // Prefix sum of n^{-s} and its s-derivatives.
    let mut sum0 = CKahan::new();
    let mut sum1 = CKahan::new();
    let mut sum2 = CKahan::new();
    for m in 1..n {
        let lm = (m as f64).ln();
        let term = (-s * lm).exp();
        sum0.add(term);
        if orders >= 1 {
            sum1.add(-lm * term);
        }
        if orders >= 2 {
            sum2.add(lm * lm * term);
        }
    }

    let mut v = [sum0.value(), sum1.value(), sum2.value()];

    // N^{1-s}/(s-1) tail.
    let sm1 = s - 1.0;
    let inv_sm1 = sm1.inv();
    let a = ((1.0 - s) * ln_n).exp() * inv_sm1;
    v[0] += a;
    if orders >= 1 {
        v[1] += a * (-ln_n - inv_sm1);
    }
    if orders >= 2 {
        let q = ln_n + inv_sm1;
        v[2] += a * (q * q + inv_sm1 * inv_sm1);
    }

    // N^{-s}/2 boundary term.
    let b = 0.5 * (-s * ln_n).exp();
    v[0] += b;
    if orders >= 1 {
        v[1] += -ln_n * b;
    }
    if orders >= 2 {
        v[2] += ln_n * ln_n * b;
    }

    // Correction terms with the rising-factorial products updated in place.
    let mut poch = s; // s (s+1) ... (s+2k-2)
    let mut sig1 = s.inv(); // sum of 1/(s+j)
    let mut sig2 = sig1 * sig1; // sum of 1/(s+j)^2
    let mut npow = ((-s - 1.0) * ln_n).exp(); // N^{-s-2k+1}
    let n2 = (-2.0 * ln_n).exp();

    let mut prev_mag = f64::INFINITY;
    let mut converged = false;
    for (k, &b2k) in BERNOULLI_2K.iter().enumerate() {
        let kk = (k + 1) as f64;
        let c = b2k / crate::util::factorial(2 * (k as u32 + 1));
        let t0 = c * poch * npow;
        let q = sig1 - ln_n;
        let t1 = t0 * q;
        let t2 = t0 * (q * q - sig2);

        v[0] += t0;
        if orders >= 1 {
            v[1] += t1;
        }
        if orders >= 2 {
            v[2] += t2;
        }

        let mut mag = t0.norm();
        if orders >= 1 {
            mag = mag.max(t1.norm());
        }
        if orders >= 2 {
            mag = mag.max(t2.norm());
        }
        if mag < tol * 0.25 {
            converged = true;
            break;
        }
        if mag > prev_mag {
            // Asymptotic series entered its divergent phase short of tol.
            return None;
        }
        prev_mag = mag;

        // Extend the products by the factors for j = 2k-1, 2k.
        let f1 = s + (2.0 * kk - 1.0);
        let f2 = s + 2.0 * kk;
        poch *= f1 * f2;
        sig1 += f1.inv() + f2.inv();
        sig2 += (f1 * f1).inv() + (f2 * f2).inv();
        npow *= n2;
    }

    if converged {
        Some(v)
    } else {
        None
    }
}
