//! Numeric helpers: compensated summation, pairwise reduction, Bernoulli
//! numbers and small combinatorial tables used throughout the crate.

/// Neumaier-compensated accumulator.
///
/// Keeps the running error of the naive sum in a carry term so that long
/// arithmetic sums stay below ~1e-15 relative accumulation error.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Sums a slice by recursive halving. Deterministic for a fixed input order,
/// independent of how the values were produced.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        2 => xs[0] + xs[1],
        n => {
            let mid = n / 2;
            pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
        }
    }
}

/// Bernoulli numbers B_2, B_4, ..., B_40 (index k holds B_{2(k+1)}).
pub const BERNOULLI_2K: [f64; 20] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
    -236364091.0 / 2730.0,
    8553103.0 / 6.0,
    -23749461029.0 / 870.0,
    8615841276005.0 / 14322.0,
    -7709321041217.0 / 510.0,
    2577687858367.0 / 6.0,
    -26315271553053477373.0 / 1919190.0,
    2929993913841559.0 / 6.0,
    -261082718496449122051.0 / 13530.0,
];

/// n! as f64, exact up to n = 22 and correctly rounded well beyond.
pub fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Binomial coefficient as f64 via the multiplicative formula.
pub fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

/// Euler beta value for nonnegative integer exponents:
/// the integral over [0,1] of (1-u)^m u^q du = m! q! / (m+q+1)!.
pub fn beta_int(m: u32, q: u32) -> f64 {
    // Computed as a product of ratios to stay far from overflow.
    // 1/(m+q+1) * 1/binom(m+q, q)
    1.0 / ((m + q + 1) as f64 * binomial(m + q, q))
}
