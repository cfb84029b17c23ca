//! Global-adaptive quadrature on intervals and on the triangle
//! 0 <= eta <= x <= 1, built on an embedded 21-point Kronrod rule with its
//! 10-point Gauss companion.
//!
//! The driver keeps a priority queue of panels and always splits the panel
//! with the largest error estimate, so the panel budget is spent where the
//! integrand is hardest.

use crate::error::{Error, Result};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Result of an adaptive integration: the value, a certified-style error
/// estimate, and how many panels were used.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
    pub panels: usize,
}

// 21-point Kronrod abscissae on [0,1] side (symmetric about 0).
const XGK: [f64; 11] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.000000000000000000000000000000000,
];

const WGK: [f64; 11] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077958109831074,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
];

// 10-point Gauss weights; the Gauss nodes are XGK[1], XGK[3], ..., XGK[9].
const WG: [f64; 5] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
];

const MAX_PANELS: usize = 20_000;

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .partial_cmp(&other.error)
            .unwrap_or(Ordering::Equal)
    }
}

/// One Kronrod/Gauss evaluation over [a, b].
fn kronrod_panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<Panel> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);

    let fc = f(center);
    let mut resk = WGK[10] * fc;
    let mut resg = 0.0;
    let mut resabs = WGK[10] * fc.abs();
    let mut fv = [0.0f64; 21];
    fv[10] = fc;

    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv[j] = f1;
        fv[20 - j] = f2;
        resk += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }

    if !resk.is_finite() {
        return Err(Error::Domain(format!(
            "integrand not finite on [{a}, {b}]"
        )));
    }

    // QUADPACK-style error estimate via the deviation integral.
    let mean = 0.5 * resk;
    let mut resasc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        resasc += WGK[j] * ((fv[j] - mean).abs() + (fv[20 - j] - mean).abs());
    }
    resasc *= half.abs();
    let raw = ((resk - resg) * half).abs();
    let mut error = raw;
    if resasc != 0.0 && raw != 0.0 {
        error = resasc * 1.0f64.min((200.0 * raw / resasc).powf(1.5));
    }
    let round = f64::EPSILON * 50.0 * resabs * half.abs();
    if round > error {
        error = round;
    }

    Ok(Panel {
        a,
        b,
        value: resk * half,
        error,
    })
}

/// Adaptive integration of `f` over [a, b] to absolute tolerance `tol`.
///
/// Fails with an accuracy error (carrying the best estimate) if the panel
/// budget is exhausted first.
pub fn adaptive_quad<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<Quadrature> {
    if !(tol > 0.0) {
        return Err(Error::Domain("quadrature tolerance must be positive".into()));
    }
    if a == b {
        return Ok(Quadrature {
            value: 0.0,
            error: 0.0,
            panels: 0,
        });
    }
    let (a, b, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };

    let mut heap = BinaryHeap::new();
    let first = kronrod_panel(&f, a, b)?;
    let mut err_total = first.error;
    heap.push(first);

    while err_total > tol && heap.len() < MAX_PANELS {
        let worst = heap.pop().expect("heap nonempty");
        // Interval too narrow to split further in f64.
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            heap.push(worst);
            break;
        }
        let left = kronrod_panel(&f, worst.a, mid)?;
        let right = kronrod_panel(&f, mid, worst.b)?;
        err_total += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }

    // Resum from panels to shed the incremental-update drift.
    let panels: Vec<Panel> = heap.into_vec();
    let value: f64 = panels.iter().map(|p| p.value).sum();
    let error: f64 = panels.iter().map(|p| p.error).sum();

    if error > tol {
        return Err(Error::Accuracy(
            format!("interval quadrature did not reach tol {tol}"),
            sign * value,
            error,
        ));
    }
    Ok(Quadrature {
        value: sign * value,
        error,
        panels: panels.len(),
    })
}

/// Adaptive integration of `f(x, eta)` over the triangle 0 <= eta <= x <= 1.
///
/// Iterated scheme: for each outer node x the inner integral over
/// eta in [0, x] is resolved adaptively to a fraction of the budget, and the
/// resulting profile is integrated adaptively in x. The reported error adds
/// the inner allowance to the outer estimate.
pub fn adaptive_quad_triangle<F: Fn(f64, f64) -> f64>(f: F, tol: f64) -> Result<Quadrature> {
    if !(tol > 0.0) {
        return Err(Error::Domain("quadrature tolerance must be positive".into()));
    }
    let inner_tol = 0.25 * tol;
    let outer_tol = 0.7 * tol;

    let profile = |x: f64| -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        match adaptive_quad(|eta| f(x, eta), 0.0, x, inner_tol) {
            Ok(q) => q.value,
            // Propagate the best estimate; the outer error term covers it.
            Err(Error::Accuracy(_, best, _)) => best,
            Err(_) => f64::NAN,
        }
    };

    match adaptive_quad(profile, 0.0, 1.0, outer_tol) {
        Ok(q) => Ok(Quadrature {
            value: q.value,
            error: q.error + inner_tol,
            panels: q.panels,
        }),
        Err(Error::Accuracy(msg, best, err)) => Err(Error::Accuracy(msg, best, err + inner_tol)),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn linear_on_unit_interval() {
        let q = adaptive_quad(|x| x, 0.0, 1.0, 1e-12).unwrap();
        assert!((q.value - 0.5).abs() < 1e-14);
    }

    #[test]
    fn triangle_area() {
        let q = adaptive_quad_triangle(|_, _| 1.0, 1e-10).unwrap();
        assert!((q.value - 0.5).abs() < 1e-10);
    }

    #[test]
    fn removable_singularity_matches_trapezoid_oracle() {
        // sin^2(pi u / 2) (1-u)^2 / u with limit 0 at u = 0.
        let g = |u: f64| {
            if u == 0.0 {
                0.0
            } else {
                (PI * u / 2.0).sin().powi(2) * (1.0 - u).powi(2) / u
            }
        };
        let q = adaptive_quad(g, 0.0, 1.0, 1e-11).unwrap();

        let n = 1_000_000usize;
        let h = 1.0 / n as f64;
        let mut acc = crate::util::KahanSum::new();
        acc.add(0.5 * (g(0.0) + g(1.0)));
        for i in 1..n {
            acc.add(g(i as f64 * h));
        }
        let oracle = acc.value() * h;
        assert!(
            (q.value - oracle).abs() < 1e-9,
            "quad {} vs trapezoid {}",
            q.value,
            oracle
        );
    }

    #[test]
    fn oscillatory_against_closed_form() {
        // Closed form: integral of sin(kx) on [0, pi] = (1 - cos(k pi))/k.
        let k = 37.0;
        let q = adaptive_quad(|x| (k * x).sin(), 0.0, PI, 1e-12).unwrap();
        let exact = (1.0 - (k * PI).cos()) / k;
        assert!((q.value - exact).abs() < 1e-11);
    }

    #[test]
    fn reversed_bounds_flip_sign() {
        let q = adaptive_quad(|x| x * x, 1.0, 0.0, 1e-12).unwrap();
        assert!((q.value + 1.0 / 3.0).abs() < 1e-13);
    }

    #[test]
    fn triangle_polynomial() {
        // integral over 0<=eta<=x<=1 of x*eta = integral x^3/2 = 1/8.
        let q = adaptive_quad_triangle(|x, eta| x * eta, 1e-11).unwrap();
        assert!((q.value - 0.125).abs() < 1e-10);
    }
}
