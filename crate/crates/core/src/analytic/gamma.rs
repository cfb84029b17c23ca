//! Complex log-gamma, digamma and trigamma via the asymptotic series with
//! argument push-up, plus reflection for the left half-plane.
//!
//! The log-gamma result may differ from the principal branch by a multiple
//! of 2*pi*i after the recurrence; every consumer in this crate works with
//! exponentials or with residues mod 2*pi, so that offset is immaterial.

use crate::util::BERNOULLI_2K;
use num_complex::Complex64;
use std::f64::consts::PI;

const PUSH_RADIUS: f64 = 12.0;

/// log Gamma(z), accurate to ~1e-13 relative (mod 2*pi*i).
pub fn ln_gamma(z: Complex64) -> Complex64 {
    if z.re < 0.5 && z.im.abs() < PUSH_RADIUS {
        // Reflection: Gamma(z) Gamma(1-z) = pi / sin(pi z).
        return PI.ln() - ln_sin_pi(z) - ln_gamma(Complex64::new(1.0, 0.0) - z);
    }
    let mut shift = Complex64::new(0.0, 0.0);
    let mut w = z;
    while w.norm() < PUSH_RADIUS {
        shift += w.ln();
        w += 1.0;
    }
    stirling_ln_gamma(w) - shift
}

fn stirling_ln_gamma(w: Complex64) -> Complex64 {
    let mut acc = (w - 0.5) * w.ln() - w + 0.5 * (2.0 * PI).ln();
    let w2 = w * w;
    let mut pw = w; // w^{2k-1}
    for (k, &b) in BERNOULLI_2K.iter().enumerate() {
        let kk = (k + 1) as f64;
        let term = b / (2.0 * kk * (2.0 * kk - 1.0)) / pw;
        acc += term;
        if term.norm() < 1e-18 * acc.norm() {
            break;
        }
        pw *= w2;
    }
    acc
}

/// log sin(pi z), stable for large |Im z| (mod 2*pi*i).
fn ln_sin_pi(z: Complex64) -> Complex64 {
    if z.im > 20.0 {
        // sin(pi z) ~ (i/2) e^{-i pi z}
        return Complex64::new(-(2f64.ln()), PI / 2.0) - Complex64::i() * PI * z;
    }
    if z.im < -20.0 {
        return Complex64::new(-(2f64.ln()), -PI / 2.0) + Complex64::i() * PI * z;
    }
    (PI * z).sin().ln()
}

/// Digamma psi(z) = Gamma'(z)/Gamma(z).
pub fn digamma(z: Complex64) -> Complex64 {
    if z.re < 0.0 && z.im.abs() < PUSH_RADIUS {
        return digamma(Complex64::new(1.0, 0.0) - z) - PI * cot_pi(z);
    }
    let mut acc = Complex64::new(0.0, 0.0);
    let mut w = z;
    while w.norm() < PUSH_RADIUS || w.re < 1.0 {
        acc -= w.inv();
        w += 1.0;
    }
    let inv = w.inv();
    let inv2 = inv * inv;
    acc += w.ln() - 0.5 * inv;
    let mut pw = inv2; // w^{-2k}
    for (k, &b) in BERNOULLI_2K.iter().enumerate() {
        let kk = (k + 1) as f64;
        let term = b / (2.0 * kk) * pw;
        acc -= term;
        if term.norm() < 1e-18 * acc.norm() {
            break;
        }
        pw *= inv2;
    }
    acc
}

/// Trigamma psi'(z).
pub fn trigamma(z: Complex64) -> Complex64 {
    if z.re < 0.0 && z.im.abs() < PUSH_RADIUS {
        let s = (PI * z).sin();
        let csc2 = if z.im.abs() > 20.0 {
            Complex64::new(0.0, 0.0)
        } else {
            (s * s).inv()
        };
        return -trigamma(Complex64::new(1.0, 0.0) - z) + PI * PI * csc2;
    }
    let mut acc = Complex64::new(0.0, 0.0);
    let mut w = z;
    while w.norm() < PUSH_RADIUS || w.re < 1.0 {
        acc += (w * w).inv();
        w += 1.0;
    }
    let inv = w.inv();
    let inv2 = inv * inv;
    acc += inv + 0.5 * inv2;
    let mut pw = inv2 * inv; // w^{-2k-1}
    for &b in BERNOULLI_2K.iter() {
        let term = b * pw;
        acc += term;
        if term.norm() < 1e-18 * acc.norm() {
            break;
        }
        pw *= inv2;
    }
    acc
}

fn cot_pi(z: Complex64) -> Complex64 {
    if z.im > 20.0 {
        return -Complex64::i();
    }
    if z.im < -20.0 {
        return Complex64::i();
    }
    let w = PI * z;
    w.cos() / w.sin()
}
