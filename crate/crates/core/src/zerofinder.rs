//! Locating critical-line zeros and their gap statistics.
//!
//! Zeros of the completed zeta function are sign changes of the scaled real
//! form; zeros of its derivative are sign changes of the detector factor
//! strictly between consecutive zeros of the function itself (one per
//! interval when the interlacing is clean, with anomalies reported rather
//! than asserted). Every ordinate carries a sign-change certificate.

use crate::analytic::{g_detector, xi_scaled_raw, HEIGHT_CAP};
use crate::error::{Error, Result};
use crate::util::KahanSum;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

/// Which function's critical-line zeros a list holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroKind {
    Zeta,
    XiPrime,
}

impl ZeroKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ZeroKind::Zeta => "zeta",
            ZeroKind::XiPrime => "xi_prime",
        }
    }
}

/// Sign-change certificate: detector values of opposite sign at the bracket
/// endpoints.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Certificate {
    pub lo: f64,
    pub hi: f64,
    pub f_lo: f64,
    pub f_hi: f64,
}

/// Sorted zero ordinates over a scan window with bisection certificates.
#[derive(Debug, Clone, Serialize)]
pub struct ZeroList {
    pub kind: ZeroKind,
    pub window: (f64, f64),
    pub ordinates: Vec<f64>,
    pub certificates: Vec<Certificate>,
    pub bracket_width: f64,
    pub warnings: Vec<String>,
}

/// Normalized gap statistics of a zero list.
///
/// `deltas` uses the per-ordinate log(gamma)/2pi normalization and
/// `deltas_density` the log(gamma/2pi)/2pi one; the two agree as the height
/// grows but differ noticeably at desk heights, so both are recorded.
/// The one-sided gaps `delta_plus`/`delta_minus` (and their min/max
/// `delta_zero`/`delta_one`) use the fixed window normalization
/// L = log(t_min/2pi).
#[derive(Debug, Clone, Serialize)]
pub struct GapStats {
    pub deltas: Vec<f64>,
    pub deltas_density: Vec<f64>,
    pub delta_plus: Vec<f64>,
    pub delta_minus: Vec<f64>,
    pub delta_zero: Vec<f64>,
    pub delta_one: Vec<f64>,
    pub mean_delta: f64,
    pub mean_delta_density: f64,
    pub sum_delta_sq: f64,
    pub count: usize,
    pub window: (f64, f64),
    pub l_norm: f64,
}

/// One row of the empirical distribution table.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DistRow {
    pub alpha: f64,
    pub d: f64,
    pub frac_delta1_gt: f64,
    pub frac_delta0_lt: f64,
}

/// Empirical gap-distribution summary over a window.
#[derive(Debug, Clone, Serialize)]
pub struct DistributionTable {
    pub window: (f64, f64),
    pub count: usize,
    pub normalizer: f64,
    pub normalizer_kind: String,
    pub theoretical_normalizer: f64,
    pub count_residual: f64,
    pub sum_delta_sq: f64,
    pub rows: Vec<DistRow>,
}

const GRID_STEP: f64 = 0.05;
const CHUNK_WIDTH: f64 = 25.0;

/// Scans a window for critical-line zeros and refines each sign change by
/// bisection to a bracket of width at most `tol`.
pub fn scan_zeros(kind: ZeroKind, t_min: f64, t_max: f64, tol: f64) -> Result<ZeroList> {
    scan_zeros_with_step(kind, t_min, t_max, tol, GRID_STEP)
}

pub(crate) fn scan_zeros_with_step(
    kind: ZeroKind,
    t_min: f64,
    t_max: f64,
    tol: f64,
    step: f64,
) -> Result<ZeroList> {
    if !(10.0 <= t_min && t_min < t_max && t_max <= HEIGHT_CAP) {
        return Err(Error::Domain(format!(
            "window ({t_min}, {t_max}) must satisfy 10 <= t_min < t_max <= {HEIGHT_CAP}"
        )));
    }
    if !(1e-9..=0.01).contains(&tol) {
        return Err(Error::Domain("bracket tolerance must lie in [1e-9, 1e-2]".into()));
    }
    match kind {
        ZeroKind::Zeta => scan_zeta(t_min, t_max, tol, step),
        ZeroKind::XiPrime => scan_xi_prime(t_min, t_max, tol, step),
    }
}

fn zeta_detector(t: f64) -> Result<f64> {
    Ok(xi_scaled_raw(t)?.0.scaled_value)
}

#[inline]
fn sgn(x: f64) -> i8 {
    if x < 0.0 {
        -1
    } else {
        1
    }
}

/// Bisects a certified sign change down to width `tol`.
fn bisect<F: Fn(f64) -> Result<f64>>(
    f: &F,
    mut lo: f64,
    mut hi: f64,
    mut f_lo: f64,
    mut f_hi: f64,
    tol: f64,
) -> Result<Certificate> {
    debug_assert!(sgn(f_lo) != sgn(f_hi));
    let mut guard = 0;
    while hi - lo > tol && guard < 200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid)?;
        if sgn(fm) == sgn(f_lo) {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
            f_hi = fm;
        }
        guard += 1;
    }
    Ok(Certificate { lo, hi, f_lo, f_hi })
}

struct SegmentScan {
    certs: Vec<Certificate>,
    warnings: Vec<String>,
}

/// Sign-change sweep over grid indices [i0, i1] at spacing `step` from
/// `base`, refining each change by bisection.
fn sweep_segment<F: Fn(f64) -> Result<f64> + Sync>(
    f: &F,
    base: f64,
    step: f64,
    i0: usize,
    i1: usize,
    t_max: f64,
    tol: f64,
) -> Result<SegmentScan> {
    let grid_t = |i: usize| (base + i as f64 * step).min(t_max);
    let mut certs = Vec::new();
    let mut warnings = Vec::new();
    let mut prev_t = grid_t(i0);
    let mut prev_f = f(prev_t)?;
    for i in (i0 + 1)..=i1 {
        let t = grid_t(i);
        if t <= prev_t {
            break;
        }
        let ft = f(t)?;
        if sgn(ft) != sgn(prev_f) {
            certs.push(bisect(f, prev_t, t, prev_f, ft, tol)?);
        }
        prev_t = t;
        prev_f = ft;
    }

    // Close-pair guard: a dip that crosses twice inside one panel leaves no
    // sign change on the coarse grid; rescan between neighbouring hits.
    let mut extra = Vec::new();
    for w in certs.windows(2) {
        let (a, b) = (w[0].hi, w[1].lo);
        if b - a < 4.0 * step && b > a {
            let fine = (b - a) / 32.0;
            let mut pt = a;
            let mut pf = w[0].f_hi;
            let mut hits = Vec::new();
            let mut i = 1;
            while pt < b {
                let t = (a + i as f64 * fine).min(b);
                if t <= pt {
                    break;
                }
                let ft = f(t)?;
                if sgn(ft) != sgn(pf) {
                    hits.push(bisect(f, pt, t, pf, ft, tol)?);
                }
                pt = t;
                pf = ft;
                i += 1;
            }
            if !hits.is_empty() {
                warnings.push(format!(
                    "grid resolution: {} extra sign change(s) between {a:.6} and {b:.6}",
                    hits.len()
                ));
                extra.extend(hits);
            }
        }
    }
    certs.extend(extra);
    certs.sort_by(|x, y| x.lo.partial_cmp(&y.lo).unwrap());
    Ok(SegmentScan { certs, warnings })
}

fn scan_zeta(t_min: f64, t_max: f64, tol: f64, step: f64) -> Result<ZeroList> {
    let n_steps = ((t_max - t_min) / step).ceil() as usize;
    let per_chunk = (CHUNK_WIDTH / step).ceil() as usize;
    let chunk_bounds: Vec<(usize, usize)> = (0..n_steps)
        .step_by(per_chunk)
        .map(|i0| (i0, (i0 + per_chunk).min(n_steps)))
        .collect();

    let scans: Result<Vec<SegmentScan>> = chunk_bounds
        .par_iter()
        .map(|&(i0, i1)| sweep_segment(&zeta_detector, t_min, step, i0, i1, t_max, tol))
        .collect();
    let scans = scans?;

    let mut certificates = Vec::new();
    let mut warnings = Vec::new();
    for s in scans {
        certificates.extend(s.certs);
        warnings.extend(s.warnings);
    }
    certificates.sort_by(|x, y| x.lo.partial_cmp(&y.lo).unwrap());
    finish_list(ZeroKind::Zeta, (t_min, t_max), certificates, warnings, tol)
}

fn finish_list(
    kind: ZeroKind,
    window: (f64, f64),
    certificates: Vec<Certificate>,
    warnings: Vec<String>,
    tol: f64,
) -> Result<ZeroList> {
    let mut keep_c = Vec::with_capacity(certificates.len());
    let mut ordinates: Vec<f64> = Vec::with_capacity(certificates.len());
    for c in certificates {
        let mid = 0.5 * (c.lo + c.hi);
        if mid <= window.0 || mid > window.1 {
            continue;
        }
        // Drop duplicates from overlapping refinement passes.
        if let Some(&last) = ordinates.last() {
            if (mid - last).abs() <= 2.0 * tol {
                continue;
            }
        }
        ordinates.push(mid);
        keep_c.push(c);
    }
    Ok(ZeroList {
        kind,
        window,
        ordinates,
        certificates: keep_c,
        bracket_width: tol,
        warnings,
    })
}

fn scan_xi_prime(t_min: f64, t_max: f64, tol: f64, step: f64) -> Result<ZeroList> {
    // Pad so the zeta zeros bracketing the window boundaries are available.
    let mean_gap = 2.0 * PI / (t_min / (2.0 * PI)).ln();
    let pad = 5.0 * mean_gap;
    let z_lo = (t_min - pad).max(10.0);
    let z_hi = (t_max + pad).min(HEIGHT_CAP);
    let zeta_zeros = scan_zeta(z_lo, z_hi, tol, step)?;

    let ords = &zeta_zeros.ordinates;
    let mut intervals = Vec::new();
    for w in ords.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b > t_min && a < t_max {
            intervals.push((a, b));
        }
    }

    let shrink = (1e-5f64).max(4.0 * tol);
    let results: Result<Vec<SegmentScan>> = intervals
        .par_iter()
        .map(|&(ga, gb)| {
            let a = ga + shrink;
            let b = gb - shrink;
            if b <= a {
                return Ok(SegmentScan {
                    certs: Vec::new(),
                    warnings: vec![format!(
                        "interval ({ga:.6}, {gb:.6}) too narrow after pole shrink"
                    )],
                });
            }
            let n = (((b - a) / step).ceil() as usize).max(48);
            let fine = (b - a) / n as f64;
            let mut scan = sweep_segment(&g_detector, a, fine, 0, n, b, tol)?;
            match scan.certs.len() {
                1 => {}
                0 => {
                    // One refinement attempt at four times the density.
                    let scan4 =
                        sweep_segment(&g_detector, a, fine / 4.0, 0, 4 * n, b, tol)?;
                    if scan4.certs.is_empty() {
                        scan.warnings.push(format!(
                            "interlacing anomaly: no detector sign change in ({ga:.6}, {gb:.6})"
                        ));
                    } else {
                        scan = scan4;
                    }
                }
                k => scan.warnings.push(format!(
                    "interlacing anomaly: {k} detector sign changes in ({ga:.6}, {gb:.6})"
                )),
            }
            Ok(scan)
        })
        .collect();
    let results = results?;

    let mut certificates = Vec::new();
    let mut warnings = zeta_zeros.warnings.clone();
    for s in results {
        certificates.extend(s.certs);
        warnings.extend(s.warnings);
    }
    certificates.sort_by(|x, y| x.lo.partial_cmp(&y.lo).unwrap());
    finish_list(ZeroKind::XiPrime, (t_min, t_max), certificates, warnings, tol)
}

impl ZeroList {
    /// CSV rows: index, kind, ordinate, bracket_lo, bracket_hi.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,kind,ordinate,bracket_lo,bracket_hi\n");
        for (i, (o, c)) in self.ordinates.iter().zip(&self.certificates).enumerate() {
            out.push_str(&format!(
                "{i},{},{:.11e},{:.11e},{:.11e}\n",
                self.kind.as_str(),
                o,
                c.lo,
                c.hi
            ));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("zero list serializes")
    }

    /// Ordinates restricted to (lo, hi].
    pub fn in_range(&self, lo: f64, hi: f64) -> Vec<f64> {
        self.ordinates
            .iter()
            .copied()
            .filter(|&t| t > lo && t <= hi)
            .collect()
    }

    /// Sub-list over (lo, hi] with certificates carried along.
    pub fn restrict(&self, lo: f64, hi: f64) -> ZeroList {
        let mut ordinates = Vec::new();
        let mut certificates = Vec::new();
        for (&o, &c) in self.ordinates.iter().zip(&self.certificates) {
            if o > lo && o <= hi {
                ordinates.push(o);
                certificates.push(c);
            }
        }
        ZeroList {
            kind: self.kind,
            window: (lo, hi),
            ordinates,
            certificates,
            bracket_width: self.bracket_width,
            warnings: self.warnings.clone(),
        }
    }
}

/// Normalized gap statistics. Boundary zeros lacking a neighbour on one side
/// are excluded from the one-sided lists.
pub fn normalized_gaps(zeros: &ZeroList) -> Result<GapStats> {
    let n = zeros.ordinates.len();
    if n < 3 {
        return Err(Error::TooFewZeros { need: 3, got: n });
    }
    let ords = &zeros.ordinates;
    let two_pi = 2.0 * PI;
    let l_norm = (zeros.window.0 / two_pi).ln();

    let mut deltas = Vec::with_capacity(n - 1);
    let mut deltas_density = Vec::with_capacity(n - 1);
    for w in ords.windows(2) {
        let gap = w[1] - w[0];
        deltas.push(gap * w[0].ln() / two_pi);
        deltas_density.push(gap * (w[0] / two_pi).ln() / two_pi);
    }

    let mut delta_plus = Vec::with_capacity(n - 2);
    let mut delta_minus = Vec::with_capacity(n - 2);
    let mut delta_zero = Vec::with_capacity(n - 2);
    let mut delta_one = Vec::with_capacity(n - 2);
    for i in 1..n - 1 {
        let dp = (ords[i + 1] - ords[i]) * l_norm / two_pi;
        let dm = (ords[i] - ords[i - 1]) * l_norm / two_pi;
        delta_plus.push(dp);
        delta_minus.push(dm);
        delta_zero.push(dp.min(dm));
        delta_one.push(dp.max(dm));
    }

    let mut mean = KahanSum::new();
    let mut mean_density = KahanSum::new();
    let mut sumsq = KahanSum::new();
    for (&d, &dd) in deltas.iter().zip(&deltas_density) {
        mean.add(d);
        mean_density.add(dd);
        sumsq.add(d * d);
    }
    let count = deltas.len();
    Ok(GapStats {
        mean_delta: mean.value() / count as f64,
        mean_delta_density: mean_density.value() / count as f64,
        sum_delta_sq: sumsq.value(),
        count,
        window: zeros.window,
        l_norm,
        deltas,
        deltas_density,
        delta_plus,
        delta_minus,
        delta_zero,
        delta_one,
    })
}

/// Empirical distribution of normalized gaps at the requested thresholds,
/// with the fractions of one-sided extremes used by the proportion
/// inequalities. The normalizer is the window's own gap count (recorded as
/// such) since a window scan cannot use the from-zero count normalizer.
pub fn distribution(zeros: &ZeroList, alphas: &[f64]) -> Result<DistributionTable> {
    let stats = normalized_gaps(zeros)?;
    let count = stats.count;
    let normalizer = count as f64;
    let (t1, t2) = zeros.window;
    let theoretical = (t2 * t2.ln() - t1 * t1.ln()) / (2.0 * PI);

    let rows = alphas
        .iter()
        .map(|&alpha| {
            let d = stats.deltas.iter().filter(|&&x| x <= alpha).count() as f64 / normalizer;
            let n1 = stats.delta_one.len().max(1) as f64;
            let frac_delta1_gt =
                stats.delta_one.iter().filter(|&&x| x > alpha).count() as f64 / n1;
            let frac_delta0_lt =
                stats.delta_zero.iter().filter(|&&x| x < alpha).count() as f64 / n1;
            DistRow {
                alpha,
                d,
                frac_delta1_gt,
                frac_delta0_lt,
            }
        })
        .collect();

    Ok(DistributionTable {
        window: zeros.window,
        count,
        normalizer,
        normalizer_kind: "window_gap_count".into(),
        theoretical_normalizer: theoretical,
        count_residual: count as f64 - theoretical,
        sum_delta_sq: stats.sum_delta_sq,
        rows,
    })
}

impl GapStats {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("gap stats serialize")
    }
}

impl DistributionTable {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("distribution serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic_list(ords: Vec<f64>, window: (f64, f64)) -> ZeroList {
        let certificates = ords
            .iter()
            .map(|&o| Certificate {
                lo: o - 1e-9,
                hi: o + 1e-9,
                f_lo: -1.0,
                f_hi: 1.0,
            })
            .collect();
        ZeroList {
            kind: ZeroKind::XiPrime,
            window,
            ordinates: ords,
            certificates,
            bracket_width: 1e-9,
            warnings: Vec::new(),
        }
    }

    #[test]
    fn twenty_nine_zeta_zeros_below_hundred() {
        let list = scan_zeros(ZeroKind::Zeta, 10.0, 100.0, 1e-9).unwrap();
        assert_eq!(list.ordinates.len(), 29, "{:?}", list.ordinates);
        assert!((list.ordinates[0] - 14.134725).abs() < 1e-6);
        assert!(list.warnings.is_empty(), "{:?}", list.warnings);
    }

    #[test]
    fn empty_window_yields_empty_list() {
        let list = scan_zeros(ZeroKind::Zeta, 50.0, 50.1, 1e-9).unwrap();
        assert!(list.ordinates.is_empty());
    }

    #[test]
    fn certificates_reproduce_opposite_signs() {
        let list = scan_zeros(ZeroKind::Zeta, 10.0, 60.0, 1e-9).unwrap();
        for c in &list.certificates {
            let f_lo = xi_scaled_raw(c.lo).unwrap().0.scaled_value;
            let f_hi = xi_scaled_raw(c.hi).unwrap().0.scaled_value;
            assert!(f_lo.signum() != f_hi.signum());
            assert!(f_lo.signum() == c.f_lo.signum());
            assert!(f_hi.signum() == c.f_hi.signum());
            assert!(c.hi - c.lo <= 1e-9 * (1.0 + 1e-9));
        }
    }

    #[test]
    fn one_derivative_zero_between_first_two() {
        let list = scan_zeros(ZeroKind::XiPrime, 14.2, 21.0, 1e-9).unwrap();
        assert_eq!(list.ordinates.len(), 1, "{:?}", list.ordinates);
    }

    #[test]
    fn interlacing_on_a_midsized_window() {
        let tol = 1e-9;
        let zeta = scan_zeros(ZeroKind::Zeta, 100.0, 160.0, tol).unwrap();
        let xi1 = scan_zeros(ZeroKind::XiPrime, 100.0, 160.0, tol).unwrap();
        // Exactly one derivative zero strictly inside each complete
        // inter-zero interval of the window.
        for w in zeta.ordinates.windows(2) {
            let inside = xi1
                .ordinates
                .iter()
                .filter(|&&t| t > w[0] && t < w[1])
                .count();
            assert_eq!(inside, 1, "interval {w:?}");
        }
        assert!(xi1.warnings.is_empty(), "{:?}", xi1.warnings);
    }

    #[test]
    fn refinement_stability_under_halved_grid() {
        let a = scan_zeros_with_step(ZeroKind::Zeta, 10.0, 60.0, 1e-9, GRID_STEP).unwrap();
        let b = scan_zeros_with_step(ZeroKind::Zeta, 10.0, 60.0, 1e-9, GRID_STEP / 2.0).unwrap();
        assert_eq!(a.ordinates.len(), b.ordinates.len());
        for (x, y) in a.ordinates.iter().zip(&b.ordinates) {
            assert!((x - y).abs() <= 1e-9, "{x} vs {y}");
        }
    }

    #[test]
    fn window_validation() {
        assert!(scan_zeros(ZeroKind::Zeta, 5.0, 50.0, 1e-9).is_err());
        assert!(scan_zeros(ZeroKind::Zeta, 100.0, 50.0, 1e-9).is_err());
        assert!(scan_zeros(ZeroKind::Zeta, 10.0, 6000.0, 1e-9).is_err());
        assert!(scan_zeros(ZeroKind::Zeta, 10.0, 50.0, 1e-12).is_err());
    }

    #[test]
    fn equally_spaced_synthetic_gaps() {
        let t0 = 1000.0;
        let l = (t0 / (2.0 * PI)).ln();
        let g = 2.0 * PI / l;
        let ords: Vec<f64> = (0..40).map(|k| t0 + k as f64 * g).collect();
        let list = synthetic_list(ords, (t0, t0 + 40.0 * g));
        let stats = normalized_gaps(&list).unwrap();
        for (dp, dm) in stats.delta_plus.iter().zip(&stats.delta_minus) {
            assert!((dp - 1.0).abs() < 1e-9, "{dp}");
            assert!((dm - 1.0).abs() < 1e-9, "{dm}");
        }
        for (d0, d1) in stats.delta_zero.iter().zip(&stats.delta_one) {
            assert!(d0 <= d1);
        }
        assert_eq!(stats.count, stats.deltas.len());
    }

    #[test]
    fn too_few_zeros_error() {
        let list = synthetic_list(vec![100.0, 101.0], (100.0, 102.0));
        assert!(matches!(
            normalized_gaps(&list),
            Err(Error::TooFewZeros { .. })
        ));
    }

    #[test]
    fn distribution_limits() {
        let t0 = 500.0;
        let l = (t0 / (2.0 * PI)).ln();
        let g = 2.0 * PI / l;
        // Slightly uneven synthetic spacing.
        let ords: Vec<f64> = (0..60)
            .map(|k| t0 + k as f64 * g + 0.1 * g * ((k * 7 % 5) as f64 / 5.0))
            .collect();
        let hi = *ords.last().unwrap();
        let list = synthetic_list(ords, (t0, hi));
        let table = distribution(&list, &[0.0, 1000.0]).unwrap();
        // D(0) = 0: no nonpositive normalized gap.
        assert_eq!(table.rows[0].d, 0.0);
        // With the window-adapted normalizer, all gaps counted gives 1.
        assert!((table.rows[1].d - 1.0).abs() < 1e-15);
    }

    #[test]
    fn csv_shape() {
        let list = scan_zeros(ZeroKind::Zeta, 10.0, 30.0, 1e-9).unwrap();
        let csv = list.to_csv();
        let lines: Vec<&str> = csv.trim_end().lines().collect();
        assert_eq!(lines[0], "index,kind,ordinate,bracket_lo,bracket_hi");
        assert_eq!(lines.len(), list.ordinates.len() + 1);
        assert!(lines[1].starts_with("0,zeta,"));
    }
}
