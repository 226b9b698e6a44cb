//! Double-double arithmetic (an unevaluated sum `hi + lo` of two `f64`s,
//! roughly 106 bits of significand). Used where sampled potentials must
//! resolve Fourier coefficients far below `f64` rounding of the samples.

use std::ops::{Add, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub(crate) struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };

    pub const fn new(hi: f64, lo: f64) -> Self {
        Self { hi, lo }
    }

    pub fn from_f64(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    /// Exact product of two doubles.
    pub fn prod(a: f64, b: f64) -> Self {
        let (hi, lo) = two_prod(a, b);
        Self { hi, lo }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn mul_f64(self, b: f64) -> Self {
        let (p, e) = two_prod(self.hi, b);
        let (hi, lo) = quick_two_sum(p, e + self.lo * b);
        Self { hi, lo }
    }

    pub fn div_f64(self, b: f64) -> Self {
        let q1 = self.hi / b;
        let r = self - Dd::prod(q1, b);
        let q2 = r.hi / b;
        let r = r - Dd::prod(q2, b);
        let q3 = r.hi / b;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo } + Dd::from_f64(q3)
    }

    pub fn recip(self) -> Self {
        let q1 = 1.0 / self.hi;
        // one Newton step: q1 + q1 (1 − x q1)
        let r = Dd::from_f64(1.0) - self.mul_f64(q1);
        let (hi, lo) = quick_two_sum(q1, r.hi * q1);
        Self { hi, lo }
    }

    pub fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return Self::ZERO;
        }
        let x = self.hi.sqrt();
        let r = self - Dd::prod(x, x);
        let (hi, lo) = quick_two_sum(x, r.hi / (2.0 * x));
        Self { hi, lo }
    }

    /// `1 / sqrt(self)`.
    pub fn rsqrt(self) -> Self {
        self.sqrt().recip()
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, b: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, b.hi);
        let (t, f) = two_sum(self.lo, b.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Dd { hi, lo }
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, b: Dd) -> Dd {
        self + (-b)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, b: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, b.hi);
        let e = e + (self.hi * b.lo + self.lo * b.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

const TWO_PI: Dd = Dd::new(std::f64::consts::TAU, 2.449_293_598_294_706_4e-16);

/// `(cos, sin)` of `2π · r` for `r ∈ [0, 1/4]`, by Taylor series.
fn sincos_first_quadrant(r: f64) -> (Dd, Dd) {
    let x = TWO_PI.mul_f64(r);
    let x2 = x * x;
    let mut sin = x;
    let mut cos = Dd::from_f64(1.0);
    let mut term = x;
    let mut k = 1.0;
    loop {
        // term_k = (−1)^k x^(2k+1)/(2k+1)!
        term = -(term * x2).div_f64((2.0 * k) * (2.0 * k + 1.0));
        sin = sin + term;
        k += 1.0;
        if term.hi.abs() < 1e-36 {
            break;
        }
    }
    let mut term = Dd::from_f64(1.0);
    let mut k = 1.0;
    loop {
        term = -(term * x2).div_f64((2.0 * k - 1.0) * (2.0 * k));
        cos = cos + term;
        k += 1.0;
        if term.hi.abs() < 1e-36 {
            break;
        }
    }
    (cos, sin)
}

/// `(cos, sin)` of `2π j / n` for `j = 0..n`, with `n` a power of two.
pub(crate) fn unit_roots(n: usize) -> Vec<(Dd, Dd)> {
    assert!(
        n.is_power_of_two(),
        "root table size must be a power of two"
    );
    (0..n)
        .map(|j| {
            let quadrant = 4 * j / n;
            // exact: n is a power of two
            let r = j as f64 / n as f64 - quadrant as f64 * 0.25;
            let (c, s) = sincos_first_quadrant(r);
            match quadrant {
                0 => (c, s),
                1 => (-s, c),
                2 => (-c, -s),
                _ => (s, -c),
            }
        })
        .collect()
}
