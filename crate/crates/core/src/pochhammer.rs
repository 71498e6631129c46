//! Rising factorials over any ring-like scalar.
//!
//! Every shifted factorial in the crate goes through [`rising`], a plain
//! running product. Zero factors therefore come out as exact zeros, which is
//! what terminating series rely on.

use std::ops::{Add, Mul};

use num_traits::{One, Zero};

/// (a)_n = a (a+1) ... (a+n-1), with (a)_0 = 1.
pub fn rising<T>(a: &T, n: u32) -> T
where
    T: Clone + One + Add<Output = T> + Mul<Output = T>,
{
    let mut acc = T::one();
    let mut factor = a.clone();
    for _ in 0..n {
        acc = acc * factor.clone();
        factor = factor + T::one();
    }
    acc
}

/// Falling factorial λ (λ-1) ... (λ-n+1).
pub fn falling<T>(lambda: &T, n: u32) -> T
where
    T: Clone + One + std::ops::Sub<Output = T> + Mul<Output = T>,
{
    let mut acc = T::one();
    let mut factor = lambda.clone();
    for _ in 0..n {
        acc = acc * factor.clone();
        factor = factor - T::one();
    }
    acc
}

/// Shifted factorial for real arguments.
pub fn pochhammer(a: f64, n: u32) -> f64 {
    rising(&a, n)
}

/// n! as a float; exact up to 22!.
pub fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

pub fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Table of (a)_0 ..= (a)_len.
pub fn rising_table(a: f64, len: u32) -> Vec<f64> {
    let mut out = Vec::with_capacity(len as usize + 1);
    let mut acc = 1.0;
    let mut factor = a;
    out.push(acc);
    for _ in 0..len {
        acc *= factor;
        factor += 1.0;
        out.push(acc);
    }
    out
}

/// `true` when `a` is zero or a negative integer, i.e. (a)_n vanishes for
/// some finite n.
pub fn is_nonpositive_integer(a: f64) -> bool {
    a <= 0.0 && a.fract() == 0.0
}

/// Ratio of two Pochhammer-style products under the terminating-series
/// convention: a zero denominator is harmless when the numerator also
/// vanishes, and a pole otherwise.
pub(crate) fn guarded_ratio<T>(num: T, den: T) -> Option<T>
where
    T: Zero + std::ops::Div<Output = T>,
{
    if den.is_zero() {
        if num.is_zero() {
            Some(T::zero())
        } else {
            None
        }
    } else {
        Some(num / den)
    }
}
