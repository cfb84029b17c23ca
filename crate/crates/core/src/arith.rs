//! Multiplicative and convolution arithmetic over a sieved range: Dirichlet
//! coefficients of powers of zeta and their inverses, von Mangoldt
//! convolutions, local twist factors, Euler-product constants, and the
//! brute-force reference sums the asymptotic tests check against.

use crate::error::{Error, Result};
use crate::util::{binomial, KahanSum};
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

/// Default sieve bound used by the command-line front end.
pub const DEFAULT_SIEVE_LIMIT: usize = 10_000_000;

/// Which family of Dirichlet-series coefficients: the coefficients of
/// zeta(s)^r (`Divisor`) or of zeta(s)^{-r} (`Moebius`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum CoeffKind {
    Divisor,
    Moebius,
}

/// Identifier of a brute-force reference sum. The tokens mirror the
/// `lemma-check` report keys of the command-line interface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum OracleId {
    Lemma1,
    Lemma2,
    Lemma6,
    Lemma7,
}

/// Parameters for [`ArithTables::oracle_sum`]. `bound` is the summation
/// range (the `x` or `y` of the sum); the remaining fields default to the
/// neutral values 1, 1, 0.
#[derive(Debug, Clone, Copy)]
pub struct OracleParams {
    pub bound: u64,
    pub r: u32,
    pub n: u64,
    pub m: u64,
    pub k: u32,
}

impl Default for OracleParams {
    fn default() -> Self {
        Self {
            bound: 1000,
            r: 1,
            n: 1,
            m: 1,
            k: 0,
        }
    }
}

#[derive(Default)]
struct Caches {
    coeff: HashMap<(CoeffKind, u32), Arc<Vec<f64>>>,
    mangoldt: HashMap<u32, Arc<Vec<f64>>>,
    alpha: HashMap<u32, Arc<Vec<f64>>>,
}

/// Sieve-backed arithmetic tables.
///
/// Construction is single-threaded; afterwards the struct is safe for
/// concurrent reads (the coefficient caches sit behind a mutex and hand out
/// shared arrays).
pub struct ArithTables {
    limit: usize,
    spf: Vec<u32>,
    primes: Vec<u32>,
    caches: Mutex<Caches>,
}

impl ArithTables {
    /// Builds the smallest-prime-factor table up to `limit` with a linear
    /// sieve.
    pub fn new(limit: usize) -> Self {
        assert!(limit >= 4, "sieve limit too small");
        let mut spf = vec![0u32; limit + 1];
        spf[1] = 1;
        let mut primes: Vec<u32> = Vec::new();
        for i in 2..=limit {
            if spf[i] == 0 {
                spf[i] = i as u32;
                primes.push(i as u32);
            }
            let si = spf[i];
            for &p in &primes {
                if p > si || (i as u64) * (p as u64) > limit as u64 {
                    break;
                }
                spf[i * p as usize] = p;
            }
        }
        Self {
            limit,
            spf,
            primes,
            caches: Mutex::new(Caches::default()),
        }
    }

    pub fn limit(&self) -> usize {
        self.limit
    }

    pub fn primes(&self) -> &[u32] {
        &self.primes
    }

    pub fn smallest_prime_factor(&self, n: u64) -> Result<u32> {
        self.check_capacity(n)?;
        Ok(self.spf[n as usize])
    }

    fn check_capacity(&self, n: u64) -> Result<()> {
        if n == 0 {
            return Err(Error::Domain("n must be positive".into()));
        }
        if n > self.limit as u64 {
            return Err(Error::Capacity(format!(
                "n = {n} exceeds sieve limit {}",
                self.limit
            )));
        }
        Ok(())
    }

    /// Prime-power factorization via repeated smallest-prime-factor division.
    pub fn factorize(&self, n: u64) -> Result<Vec<(u32, u32)>> {
        self.check_capacity(n)?;
        let mut out = Vec::new();
        let mut m = n as usize;
        while m > 1 {
            let p = self.spf[m];
            let mut e = 0u32;
            while m as u64 % p as u64 == 0 {
                m /= p as usize;
                e += 1;
            }
            out.push((p, e));
        }
        Ok(out)
    }

    /// Coefficient of n^{-s} in zeta(s)^r (divisor kind) or zeta(s)^{-r}
    /// (Moebius kind). Multiplicative; on prime powers the divisor kind is
    /// binom(a+r-1, r-1) and the Moebius kind is (-1)^a binom(r, a).
    pub fn coeff(&self, kind: CoeffKind, r: u32, n: u64) -> Result<f64> {
        if r == 0 {
            return Err(Error::Domain("r must be at least 1".into()));
        }
        let mut acc = 1.0;
        for (_, a) in self.factorize(n)? {
            acc *= prime_power_coeff(kind, r, a);
            if acc == 0.0 {
                return Ok(0.0);
            }
        }
        Ok(acc)
    }

    /// Dense coefficient array for 0..=bound (index 0 unused, set to 0).
    pub fn coeff_array(&self, kind: CoeffKind, r: u32, bound: u64) -> Result<Arc<Vec<f64>>> {
        if r == 0 {
            return Err(Error::Domain("r must be at least 1".into()));
        }
        self.check_capacity(bound.max(1))?;
        let mut caches = self.caches.lock().unwrap();
        if let Some(arr) = caches.coeff.get(&(kind, r)) {
            if arr.len() > bound as usize {
                return Ok(arr.clone());
            }
        }
        let b = bound as usize;
        let mut arr = vec![0.0f64; b + 1];
        if b >= 1 {
            arr[1] = 1.0;
        }
        for i in 2..=b {
            let p = self.spf[i] as usize;
            let mut m = i;
            let mut a = 0u32;
            while m % p == 0 {
                m /= p;
                a += 1;
            }
            arr[i] = arr[m] * prime_power_coeff(kind, r, a);
        }
        let arr = Arc::new(arr);
        caches.coeff.insert((kind, r), arr.clone());
        Ok(arr)
    }

    /// Von Mangoldt value: log p on prime powers p^a, 0 elsewhere.
    pub fn von_mangoldt(&self, n: u64) -> Result<f64> {
        self.check_capacity(n)?;
        if n == 1 {
            return Ok(0.0);
        }
        let p = self.spf[n as usize] as u64;
        let mut m = n;
        while m % p == 0 {
            m /= p;
        }
        Ok(if m == 1 { (p as f64).ln() } else { 0.0 })
    }

    /// Dense j-fold von Mangoldt convolution up to `bound`; index 0 unused.
    /// The 0-fold array is the convolution identity (mass at 1).
    pub fn mangoldt_array(&self, j: u32, bound: u64) -> Result<Arc<Vec<f64>>> {
        self.check_capacity(bound.max(1))?;
        {
            let caches = self.caches.lock().unwrap();
            if let Some(arr) = caches.mangoldt.get(&j) {
                if arr.len() > bound as usize {
                    return Ok(arr.clone());
                }
            }
        }
        let b = bound as usize;
        let arr = if j == 0 {
            let mut a = vec![0.0f64; b + 1];
            if b >= 1 {
                a[1] = 1.0;
            }
            Arc::new(a)
        } else {
            let prev = self.mangoldt_array(j - 1, bound)?;
            Arc::new(self.convolve_prime_powers(&prev, b, false))
        };
        let mut caches = self.caches.lock().unwrap();
        caches.mangoldt.insert(j, arr.clone());
        Ok(arr)
    }

    /// Convolves `base` with the von Mangoldt function (or with
    /// Lambda*log when `log_weight` is set), truncated at `bound`.
    fn convolve_prime_powers(&self, base: &[f64], bound: usize, log_weight: bool) -> Vec<f64> {
        let mut out = vec![0.0f64; bound + 1];
        for &p in &self.primes {
            let p = p as usize;
            if p > bound {
                break;
            }
            let logp = (p as f64).ln();
            let mut q = p;
            let mut a = 1u32;
            loop {
                let w = if log_weight {
                    logp * (a as f64 * logp)
                } else {
                    logp
                };
                let mut t = q;
                let mut m = 1usize;
                while t <= bound {
                    if base[m] != 0.0 {
                        out[t] += base[m] * w;
                    }
                    m += 1;
                    t += q;
                }
                if q > bound / p {
                    break;
                }
                q *= p;
                a += 1;
            }
        }
        out
    }

    /// Dense array of the coefficient family in the second-derivative
    /// Dirichlet expansion: index k = 0 holds -Lambda(n); k >= 1 holds the
    /// convolution of the (k-1)-fold von Mangoldt array with Lambda*log.
    pub fn alpha_array(&self, k: u32, bound: u64) -> Result<Arc<Vec<f64>>> {
        self.check_capacity(bound.max(1))?;
        {
            let caches = self.caches.lock().unwrap();
            if let Some(arr) = caches.alpha.get(&k) {
                if arr.len() > bound as usize {
                    return Ok(arr.clone());
                }
            }
        }
        let b = bound as usize;
        let arr = if k == 0 {
            let mut a = vec![0.0f64; b + 1];
            for (i, slot) in a.iter_mut().enumerate().skip(2) {
                let v = self.von_mangoldt(i as u64)?;
                if v != 0.0 {
                    *slot = -v;
                }
            }
            Arc::new(a)
        } else if 1u64.checked_shl(k - 1).map(|x| x > bound).unwrap_or(true) && k > 1 {
            // Lambda_{k-1} vanishes below 2^{k-1}, so the convolution is 0.
            Arc::new(vec![0.0f64; b + 1])
        } else {
            let prev = self.mangoldt_array(k - 1, bound)?;
            Arc::new(self.convolve_prime_powers(&prev, b, true))
        };
        let mut caches = self.caches.lock().unwrap();
        caches.alpha.insert(k, arr.clone());
        Ok(arr)
    }

    /// Pointwise variant of [`ArithTables::alpha_array`].
    pub fn alpha_k(&self, k: u32, n: u64) -> Result<f64> {
        let arr = self.alpha_array(k, n)?;
        Ok(arr[n as usize])
    }

    /// Prime-support growth weight with the constant made explicit:
    /// product over distinct primes p dividing n of (1 + a * p^{-tau}).
    /// Only upper-bound checks consume it, so `a` defaults to 1 at call
    /// sites.
    pub fn prime_weight(&self, n: u64, tau: f64, a: f64) -> Result<f64> {
        if tau <= 0.0 {
            return Err(Error::Domain("tau must be positive".into()));
        }
        let mut acc = 1.0;
        for (p, _) in self.factorize(n)? {
            acc *= 1.0 + a * (p as f64).powf(-tau);
        }
        Ok(acc)
    }

    /// Local-ratio correction factor of the twisted divisor sum: product
    /// over prime powers p^lambda exactly dividing n of the ratio of the two
    /// local series at p^{-s}. `s = 1` is the default normalization.
    pub fn twist_factor(&self, n: u64, r: u32, s: f64, tol: f64) -> Result<f64> {
        if s <= 0.0 {
            return Err(Error::Domain(
                "twist factor requires s > 0 for local convergence".into(),
            ));
        }
        if r == 0 {
            return Err(Error::Domain("r must be at least 1".into()));
        }
        if !(tol > 0.0) {
            return Err(Error::Domain("tol must be positive".into()));
        }
        let mut acc = 1.0;
        for (p, lambda) in self.factorize(n)? {
            acc *= local_twist_ratio(p as f64, lambda, r, s, tol)?;
        }
        Ok(acc)
    }

    /// Euler-product constant of the squared-coefficient sum, over primes up
    /// to `prime_cutoff`, with a tail correction from the second-order
    /// expansion of the local logarithm. Returns (value, error bound).
    pub fn euler_const(&self, r: u32, prime_cutoff: u64) -> Result<(f64, f64)> {
        if prime_cutoff < 100 {
            return Err(Error::Domain("prime cutoff must be at least 100".into()));
        }
        self.check_capacity(prime_cutoff)?;
        if r == 0 {
            return Err(Error::Domain("r must be at least 1".into()));
        }
        let r2 = (r * r) as f64;
        let mut logsum = KahanSum::new();
        for &p in &self.primes {
            if p as u64 > prime_cutoff {
                break;
            }
            let x = 1.0 / p as f64;
            // Local series of squared prime-power coefficients.
            let mut series = KahanSum::new();
            let mut d = 1.0f64; // coefficient at exponent j
            let mut xj = 1.0f64;
            let mut j = 0u32;
            loop {
                let term = d * d * xj;
                series.add(term);
                if term < 1e-18 * series.value() && j > 2 * r {
                    break;
                }
                d = d * (j as f64 + r as f64) / (j as f64 + 1.0);
                xj *= x;
                j += 1;
                if j > 8000 {
                    break;
                }
            }
            logsum.add(r2 * (1.0 - x).ln() + series.value().ln());
        }
        // Second-order coefficient of the local logarithm in 1/p.
        let d2 = r as f64 * (r as f64 + 1.0) / 2.0;
        let a2 = d2 * d2 - r2 * r2 / 2.0 - r2 / 2.0;
        let pf = prime_cutoff as f64;
        let lnp = pf.ln();
        // Remaining sum of p^{-2} over p > cutoff from the prime density.
        let tail_p2 = (1.0 - 1.0 / lnp + 2.0 / (lnp * lnp)) / (pf * lnp);
        let tail = a2 * tail_p2;
        let value = (logsum.value() + tail).exp();
        let r6 = r2 * r2 * r2;
        let err_log = a2.abs() * 6.0 / (pf * lnp * lnp * lnp) + r6 / (2.0 * pf * pf * lnp) + 1e-14;
        Ok((value, value.abs() * err_log))
    }

    /// Brute-force reference sums, all with compensated summation.
    pub fn oracle_sum(&self, id: OracleId, params: &OracleParams) -> Result<f64> {
        let OracleParams { bound, r, n, m, k } = *params;
        match id {
            // Sum over n <= bound of coeff(n)^2 / n.
            OracleId::Lemma1 => {
                let arr = self.coeff_array(CoeffKind::Divisor, r, bound)?;
                let mut acc = KahanSum::new();
                for (i, &d) in arr.iter().enumerate().skip(1).take(bound as usize) {
                    acc.add(d * d / i as f64);
                }
                Ok(acc.value())
            }
            // Sum over m' <= bound of coeff(m') coeff(m' n) / m'.
            OracleId::Lemma2 => {
                self.check_capacity(bound.saturating_mul(n))?;
                let arr = self.coeff_array(CoeffKind::Divisor, r, bound)?;
                let mut acc = KahanSum::new();
                for i in 1..=bound {
                    let d1 = arr[i as usize];
                    if d1 == 0.0 {
                        continue;
                    }
                    let d2 = self.coeff(CoeffKind::Divisor, r, i * n)?;
                    acc.add(d1 * d2 / i as f64);
                }
                Ok(acc.value())
            }
            // Sum over n <= bound of alpha_k(n) twist_factor(n) / n.
            OracleId::Lemma6 => {
                let alpha = self.alpha_array(k, bound)?;
                let mut memo: HashMap<(u32, u32), f64> = HashMap::new();
                let mut acc = KahanSum::new();
                for i in 1..=bound as usize {
                    let a = alpha[i];
                    if a == 0.0 {
                        continue;
                    }
                    let mut tf = 1.0;
                    for (p, lambda) in self.factorize(i as u64)? {
                        let key = (p, lambda);
                        let local = match memo.get(&key) {
                            Some(&v) => v,
                            None => {
                                let v = local_twist_ratio(p as f64, lambda, r, 1.0, 1e-12)?;
                                memo.insert(key, v);
                                v
                            }
                        };
                        tf *= local;
                    }
                    acc.add(a * tf / i as f64);
                }
                Ok(acc.value())
            }
            // Sum over n <= bound of alpha_k(m n) coeff(n) / n.
            OracleId::Lemma7 => {
                let big = bound
                    .checked_mul(m)
                    .ok_or_else(|| Error::Capacity("m * bound overflows".into()))?;
                self.check_capacity(big)?;
                let alpha = self.alpha_array(k, big)?;
                let darr = self.coeff_array(CoeffKind::Divisor, r, bound)?;
                let mut acc = KahanSum::new();
                for i in 1..=bound {
                    let a = alpha[(i * m) as usize];
                    if a == 0.0 {
                        continue;
                    }
                    acc.add(a * darr[i as usize] / i as f64);
                }
                Ok(acc.value())
            }
        }
    }
}

fn prime_power_coeff(kind: CoeffKind, r: u32, a: u32) -> f64 {
    match kind {
        CoeffKind::Divisor => binomial(a + r - 1, r - 1),
        CoeffKind::Moebius => {
            let b = binomial(r, a);
            if a % 2 == 0 {
                b
            } else {
                -b
            }
        }
    }
}

/// Ratio of the two local series at one prime power: numerator has the
/// coefficient pair offset by `lambda`, the denominator is the squared
/// series. Truncated once the next term falls below `tol` times the partial
/// sum and a geometric tail certificate holds.
fn local_twist_ratio(p: f64, lambda: u32, r: u32, s: f64, tol: f64) -> Result<f64> {
    let x = p.powf(-s);
    let rf = r as f64;
    let mut num = KahanSum::new();
    let mut den = KahanSum::new();
    let mut d_j = 1.0f64; // coeff at exponent j
    let mut d_jl = binomial(lambda + r - 1, r - 1); // coeff at exponent j + lambda
    let mut xj = 1.0f64;
    let mut j = 0u32;
    loop {
        let tn = d_j * d_jl * xj;
        let td = d_j * d_j * xj;
        num.add(tn);
        den.add(td);
        let jf = j as f64;
        d_j = d_j * (jf + rf) / (jf + 1.0);
        d_jl = d_jl * (jf + lambda as f64 + rf) / (jf + lambda as f64 + 1.0);
        xj *= x;
        j += 1;
        if j > lambda + 2 * r + 4 {
            let next = d_j * d_jl * xj;
            // Geometric tail bound with the coefficient growth folded in.
            let rho = x * ((j as f64 + rf + lambda as f64 + 1.0) / (j as f64 + 1.0)).powi(2 * r as i32);
            if rho < 1.0 && next * rho / (1.0 - rho) < tol * den.value() && next < tol * den.value()
            {
                break;
            }
        }
        if j > 2000 {
            return Err(Error::Accuracy(
                format!("local series at p = {p} did not converge"),
                num.value() / den.value(),
                tol,
            ));
        }
    }
    Ok(num.value() / den.value())
}

/// Dense Dirichlet convolution, truncated at the shorter input length.
/// Quadratic-log cost; intended for reference computations and tests.
pub fn convolve_dirichlet(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len().min(b.len());
    let bound = n.saturating_sub(1);
    let mut out = vec![0.0f64; bound + 1];
    for d in 1..=bound {
        if a[d] == 0.0 {
            continue;
        }
        let mut t = d;
        let mut e = 1usize;
        while t <= bound {
            if b[e] != 0.0 {
                out[t] += a[d] * b[e];
            }
            e += 1;
            t += d;
        }
    }
    out
}
