//! Truncated multiple power series.
//!
//! All families share one summation engine: terms are visited shell by shell
//! (increasing total degree, lexicographic inside a shell) and accumulated
//! with Neumaier compensation, so a given input always produces the same
//! bits. A shell is the set of terms of one total degree.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pochhammer::{factorial, guarded_ratio, rising, rising_table};

/// Points with `|x|+|y|+|z|+|t|` above this are evaluated but flagged.
pub const EVALUATION_DOMAIN_L1: f64 = 0.5;

/// Parameters `(a, b, c; e1, e2, e3, e4)` of K₂.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct K2Params {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub e: [f64; 4],
}

impl K2Params {
    pub fn new(a: f64, b: f64, c: f64, e: [f64; 4]) -> Result<Self> {
        let p = K2Params { a, b, c, e };
        if p.to_array().iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("K2 parameters must be finite"));
        }
        Ok(p)
    }

    /// `[a, b, c, e1, e2, e3, e4]`
    pub fn to_array(&self) -> [f64; 7] {
        [self.a, self.b, self.c, self.e[0], self.e[1], self.e[2], self.e[3]]
    }

    pub fn from_array(v: [f64; 7]) -> Result<Self> {
        Self::new(v[0], v[1], v[2], [v[3], v[4], v[5], v[6]])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point4 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub t: f64,
}

impl Point4 {
    pub fn new(x: f64, y: f64, z: f64, t: f64) -> Result<Self> {
        let p = Point4 { x, y, z, t };
        if p.coords().iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("point coordinates must be finite"));
        }
        Ok(p)
    }

    pub const ORIGIN: Point4 = Point4 { x: 0.0, y: 0.0, z: 0.0, t: 0.0 };

    pub fn coords(&self) -> [f64; 4] {
        [self.x, self.y, self.z, self.t]
    }

    pub fn from_coords(c: [f64; 4]) -> Self {
        Point4 { x: c[0], y: c[1], z: c[2], t: c[3] }
    }

    pub fn l1_norm(&self) -> f64 {
        self.coords().iter().map(|v| v.abs()).sum()
    }

    pub fn in_domain(&self) -> bool {
        self.l1_norm() <= EVALUATION_DOMAIN_L1
    }
}

/// Summation index `(m, n, p, q)`; also used for derivative orders.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct MultiIndex4 {
    pub m: u32,
    pub n: u32,
    pub p: u32,
    pub q: u32,
}

impl MultiIndex4 {
    pub const fn new(m: u32, n: u32, p: u32, q: u32) -> Self {
        MultiIndex4 { m, n, p, q }
    }

    pub fn from_array(a: [u32; 4]) -> Self {
        MultiIndex4::new(a[0], a[1], a[2], a[3])
    }

    pub fn to_array(self) -> [u32; 4] {
        [self.m, self.n, self.p, self.q]
    }

    pub fn total(self) -> u32 {
        self.m + self.n + self.p + self.q
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationPolicy {
    pub max_total_degree: u32,
    pub abs_tol: f64,
    pub rel_tol: f64,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        TruncationPolicy { max_total_degree: 30, abs_tol: 1e-300, rel_tol: 1e-17 }
    }
}

impl TruncationPolicy {
    pub fn with_degree(max_total_degree: u32) -> Self {
        TruncationPolicy { max_total_degree, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::invalid("truncation tolerances must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesValue {
    pub value: f64,
    /// Sum of |terms| in the last completed shell.
    pub tail_estimate: f64,
    pub terms_summed: u64,
    pub truncated_at_degree: u32,
    /// Shell magnitudes did not decrease over the last three shells.
    pub divergence_warning: bool,
    /// The point lies outside [`EVALUATION_DOMAIN_L1`].
    pub outside_domain: bool,
}

impl SeriesValue {
    pub(crate) fn exact(value: f64) -> Self {
        SeriesValue {
            value,
            tail_estimate: 0.0,
            terms_summed: 1,
            truncated_at_degree: 0,
            divergence_warning: false,
            outside_domain: false,
        }
    }

    /// Multiply value and tail by a constant prefactor.
    pub fn scaled(mut self, factor: f64) -> Self {
        self.value *= factor;
        self.tail_estimate *= factor.abs();
        self
    }
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

/// Bare coefficient Δ(m,n,p,q) of a quadruple series; the evaluator supplies
/// the factorials and powers.
pub trait CoefficientRule {
    fn coefficient(&self, idx: MultiIndex4) -> Result<f64>;
}

impl<F> CoefficientRule for F
where
    F: Fn(MultiIndex4) -> Result<f64>,
{
    fn coefficient(&self, idx: MultiIndex4) -> Result<f64> {
        self(idx)
    }
}

/// Visit every composition of `degree` into `K` nonnegative parts in
/// lexicographic order.
pub(crate) fn for_each_composition<const K: usize>(
    degree: u32,
    f: &mut impl FnMut(&[u32; K]) -> Result<()>,
) -> Result<()> {
    fn rec<const K: usize>(
        idx: &mut [u32; K],
        pos: usize,
        remaining: u32,
        f: &mut impl FnMut(&[u32; K]) -> Result<()>,
    ) -> Result<()> {
        if pos + 1 == K {
            idx[pos] = remaining;
            return f(idx);
        }
        for v in 0..=remaining {
            idx[pos] = v;
            rec(idx, pos + 1, remaining - v, f)?;
        }
        Ok(())
    }
    if K == 0 {
        return Ok(());
    }
    let mut idx = [0u32; K];
    rec(&mut idx, 0, degree, f)
}

/// Shell-major summation of Σ Δ(i) ∏ coords[v]^{i_v} / i_v! over total degree ≤ D.
pub(crate) fn shell_series<const K: usize>(
    coords: [f64; K],
    policy: &TruncationPolicy,
    mut coefficient: impl FnMut(&[u32; K]) -> Result<f64>,
) -> Result<SeriesValue> {
    policy.validate()?;
    let d_max = policy.max_total_degree;
    // coords[v]^k / k!
    let scaled_powers: Vec<Vec<f64>> = coords
        .iter()
        .map(|&c| {
            let mut row = Vec::with_capacity(d_max as usize + 1);
            let mut acc = 1.0;
            row.push(acc);
            for k in 1..=d_max {
                acc *= c / k as f64;
                row.push(acc);
            }
            row
        })
        .collect();

    let mut total = CompensatedSum::new();
    let mut terms = 0u64;
    let mut shell_mags: Vec<f64> = Vec::with_capacity(d_max as usize + 1);
    let mut quiet_shells = 0;
    let mut last_degree = 0;

    for d in 0..=d_max {
        let mut shell_abs = 0.0;
        for_each_composition::<K>(d, &mut |idx| {
            for (v, &k) in idx.iter().enumerate() {
                if k > 0 && coords[v] == 0.0 {
                    return Ok(());
                }
            }
            let mut weight = 1.0;
            for (v, &k) in idx.iter().enumerate() {
                weight *= scaled_powers[v][k as usize];
            }
            let term = coefficient(idx)? * weight;
            total.add(term);
            shell_abs += term.abs();
            terms += 1;
            Ok(())
        })?;
        shell_mags.push(shell_abs);
        last_degree = d;
        let threshold = policy.abs_tol.max(policy.rel_tol * total.value().abs());
        if shell_abs < threshold {
            quiet_shells += 1;
            if quiet_shells >= 2 {
                break;
            }
        } else {
            quiet_shells = 0;
        }
    }

    let n = shell_mags.len();
    let divergence_warning = n >= 3 && {
        let (a, b, c) = (shell_mags[n - 3], shell_mags[n - 2], shell_mags[n - 1]);
        c > 0.0 && a <= b && b <= c
    };
    let l1: f64 = coords.iter().map(|v| v.abs()).sum();
    Ok(SeriesValue {
        value: total.value(),
        tail_estimate: *shell_mags.last().unwrap_or(&0.0),
        terms_summed: terms,
        truncated_at_degree: last_degree,
        divergence_warning,
        outside_domain: l1 > EVALUATION_DOMAIN_L1,
    })
}

/// Δ(m,n,p,q) of K₂ over any field-like scalar; `None` marks a pole.
pub fn k2_coefficient_generic<T>(params: &[T; 7], idx: MultiIndex4) -> Option<T>
where
    T: Clone + num_traits::Num,
{
    let [a, b, c, e1, e2, e3, e4] = params;
    let MultiIndex4 { m, n, p, q } = idx;
    let num = rising(a, m + n + p + q) * rising(b, m + n + q) * rising(c, p);
    let den = rising(e1, m) * rising(e2, n) * rising(e3, p) * rising(e4, q);
    guarded_ratio(num, den)
}

/// Bare coefficient of K₂, `(a)_{m+n+p+q}(b)_{m+n+q}(c)_p / ((e1)_m (e2)_n (e3)_p (e4)_q)`.
pub fn k2_coefficient(params: &K2Params, idx: MultiIndex4) -> Result<f64> {
    k2_coefficient_generic(&params.to_array(), idx)
        .ok_or_else(|| Error::pole(format!("K2 denominator vanishes at {idx:?} for {params:?}")))
}

/// Coefficient read off a twelve-slot bracket `[a1..a4; b1..b4; e1..e4]`.
///
/// Within each numerator row, slots that share a label contribute a single
/// Pochhammer symbol whose index is the sum of their indices. With labels
/// `a,a,a,a` and `b,b,c,b` this reproduces [`k2_coefficient_generic`].
pub fn bracket_coefficient<T>(rows: &[[(&str, T); 4]; 2], den: &[T; 4], idx: MultiIndex4) -> Option<T>
where
    T: Clone + num_traits::Num,
{
    let ks = idx.to_array();
    let mut num = T::one();
    for row in rows {
        let mut groups: Vec<(&str, &T, u32)> = Vec::new();
        for ((label, value), k) in row.iter().zip(ks) {
            match groups.iter_mut().find(|g| g.0 == *label) {
                Some(g) => g.2 += k,
                None => groups.push((label, value, k)),
            }
        }
        for (_, value, k) in groups {
            num = num * rising(value, k);
        }
    }
    let d = den.iter().zip(ks).fold(T::one(), |acc, (e, k)| acc * rising(e, k));
    guarded_ratio(num, d)
}

/// K₂ coefficients backed by precomputed Pochhammer tables.
#[derive(Debug, Clone)]
pub struct K2Rule {
    params: K2Params,
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
    e: [Vec<f64>; 4],
}

impl K2Rule {
    pub fn new(params: K2Params, max_degree: u32) -> Self {
        K2Rule {
            params,
            a: rising_table(params.a, max_degree),
            b: rising_table(params.b, max_degree),
            c: rising_table(params.c, max_degree),
            e: params.e.map(|e| rising_table(e, max_degree)),
        }
    }

    fn table(t: &[f64], base: f64, n: u32) -> f64 {
        t.get(n as usize).copied().unwrap_or_else(|| rising(&base, n))
    }
}

impl CoefficientRule for K2Rule {
    fn coefficient(&self, idx: MultiIndex4) -> Result<f64> {
        let MultiIndex4 { m, n, p, q } = idx;
        let pr = &self.params;
        let num = Self::table(&self.a, pr.a, m + n + p + q)
            * Self::table(&self.b, pr.b, m + n + q)
            * Self::table(&self.c, pr.c, p);
        let den = Self::table(&self.e[0], pr.e[0], m)
            * Self::table(&self.e[1], pr.e[1], n)
            * Self::table(&self.e[2], pr.e[2], p)
            * Self::table(&self.e[3], pr.e[3], q);
        guarded_ratio(num, den)
            .ok_or_else(|| Error::pole(format!("K2 denominator vanishes at {idx:?} for {pr:?}")))
    }
}

/// Evaluate Σ Δ(m,n,p,q) x^m/m! y^n/n! z^p/p! t^q/q! for an arbitrary rule.
pub fn quad_series_eval(
    rule: &impl CoefficientRule,
    point: Point4,
    policy: &TruncationPolicy,
) -> Result<SeriesValue> {
    shell_series(point.coords(), policy, |i| rule.coefficient(MultiIndex4::from_array(*i)))
}

pub fn k2_eval(params: &K2Params, point: Point4, policy: &TruncationPolicy) -> Result<SeriesValue> {
    let rule = K2Rule::new(*params, policy.max_total_degree);
    quad_series_eval(&rule, point, policy)
}

/// Gauss ₂F₁(α, β; γ; x).
pub fn gauss_2f1(
    alpha: f64,
    beta: f64,
    gamma: f64,
    x: f64,
    policy: &TruncationPolicy,
) -> Result<SeriesValue> {
    let d = policy.max_total_degree;
    let (ta, tb, tg) = (rising_table(alpha, d), rising_table(beta, d), rising_table(gamma, d));
    shell_series([x], policy, |&[k]| {
        let k = k as usize;
        guarded_ratio(ta[k] * tb[k], tg[k])
            .ok_or_else(|| Error::pole(format!("2F1 denominator ({gamma})_{k} vanishes")))
    })
}

/// Appell F₄: Σ (α)_{j+k}(β)_{j+k} / ((γ)_j (δ)_k) x^j y^k / (j! k!).
pub fn appell_f4(
    alpha: f64,
    beta: f64,
    gamma: f64,
    delta: f64,
    x: f64,
    y: f64,
    policy: &TruncationPolicy,
) -> Result<SeriesValue> {
    let d = policy.max_total_degree;
    let (ta, tb) = (rising_table(alpha, d), rising_table(beta, d));
    let (tg, td) = (rising_table(gamma, d), rising_table(delta, d));
    shell_series([x, y], policy, |&[j, k]| {
        let (j, k) = (j as usize, k as usize);
        guarded_ratio(ta[j + k] * tb[j + k], tg[j] * td[k])
            .ok_or_else(|| Error::pole(format!("F4 denominator vanishes at ({j},{k})")))
    })
}

/// The terminating triple series
/// Σ (-n)_{j+k+l} (1-e1-n)_{j+k+l} (c)_k / ((e2)_j (e3)_k (e4)_l) u1^j u2^k u3^l / (j! k! l!),
/// summed exactly over j+k+l ≤ n.
#[allow(clippy::too_many_arguments)]
pub fn srivastava_f3_shape(
    n: u32,
    e1: f64,
    c: f64,
    e2: f64,
    e3: f64,
    e4: f64,
    u1: f64,
    u2: f64,
    u3: f64,
    policy: &TruncationPolicy,
) -> Result<SeriesValue> {
    let exact = TruncationPolicy { max_total_degree: n, ..*policy };
    let neg_n = -(n as f64);
    let (t0, t1, tc) = (rising_table(neg_n, n), rising_table(1.0 - e1 - n as f64, n), rising_table(c, n));
    let (t2, t3, t4) = (rising_table(e2, n), rising_table(e3, n), rising_table(e4, n));
    shell_series([u1, u2, u3], &exact, |&[j, k, l]| {
        let (j, k, l) = (j as usize, k as usize, l as usize);
        let s = j + k + l;
        guarded_ratio(t0[s] * t1[s] * tc[k], t2[j] * t3[k] * t4[l])
            .ok_or_else(|| Error::pole(format!("F3 denominator vanishes at ({j},{k},{l})")))
    })
}

/// Lauricella F_C⁽⁴⁾(α, β; c1..c4; x, y, z, t).
pub fn lauricella_fc4(
    alpha: f64,
    beta: f64,
    c: [f64; 4],
    point: Point4,
    policy: &TruncationPolicy,
) -> Result<SeriesValue> {
    let d = policy.max_total_degree;
    let (ta, tb) = (rising_table(alpha, d), rising_table(beta, d));
    let tc = c.map(|v| rising_table(v, d));
    shell_series(point.coords(), policy, |&[m, n, p, q]| {
        let s = (m + n + p + q) as usize;
        let den = tc[0][m as usize] * tc[1][n as usize] * tc[2][p as usize] * tc[3][q as usize];
        guarded_ratio(ta[s] * tb[s], den)
            .ok_or_else(|| Error::pole(format!("FC4 denominator vanishes at ({m},{n},{p},{q})")))
    })
}

/// Constant and shifted parameters of the parameter-shift derivative rule:
/// ∂^{i+j+k+l} K₂ / ∂x^i ∂y^j ∂z^k ∂t^l = factor · K₂(shifted; same point).
pub fn derivative_shift(params: &K2Params, orders: MultiIndex4) -> Result<(f64, K2Params)> {
    let MultiIndex4 { m: i, n: j, p: k, q: l } = orders;
    let num = rising(&params.a, i + j + k + l) * rising(&params.b, i + j + l) * rising(&params.c, k);
    let den = rising(&params.e[0], i)
        * rising(&params.e[1], j)
        * rising(&params.e[2], k)
        * rising(&params.e[3], l);
    let factor = guarded_ratio(num, den)
        .ok_or_else(|| Error::pole(format!("derivative prefactor has a pole at orders {orders:?}")))?;
    let shifted = K2Params {
        a: params.a + (i + j + k + l) as f64,
        b: params.b + (i + j + l) as f64,
        c: params.c + k as f64,
        e: [
            params.e[0] + i as f64,
            params.e[1] + j as f64,
            params.e[2] + k as f64,
            params.e[3] + l as f64,
        ],
    };
    Ok((factor, shifted))
}

/// Mixed partial derivative of K₂ via the parameter-shift rule.
pub fn k2_mixed_partial(
    params: &K2Params,
    point: Point4,
    orders: MultiIndex4,
    policy: &TruncationPolicy,
) -> Result<SeriesValue> {
    let (factor, shifted) = derivative_shift(params, orders)?;
    if factor == 0.0 {
        let mut v = SeriesValue::exact(0.0);
        v.outside_domain = !point.in_domain();
        return Ok(v);
    }
    Ok(k2_eval(&shifted, point, policy)?.scaled(factor))
}

/// Δ(m,n,p,q)/(m! n! p! q!) for the given rule, i.e. the Taylor coefficient.
pub fn taylor_coefficient(rule: &impl CoefficientRule, idx: MultiIndex4) -> Result<f64> {
    let f = factorial(idx.m) * factorial(idx.n) * factorial(idx.p) * factorial(idx.q);
    Ok(rule.coefficient(idx)? / f)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn generic() -> K2Params {
        K2Params::new(0.3, 0.5, 0.7, [1.6, 1.3, 1.7, 1.9]).unwrap()
    }

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-300)
    }

    #[test]
    fn coefficient_at_origin_is_one() {
        assert_eq!(k2_coefficient(&generic(), MultiIndex4::default()).unwrap(), 1.0);
    }

    #[test]
    fn coefficient_vanishes_for_zero_a() {
        let p = K2Params::new(0.0, 0.4, 0.9, [1.1, 1.2, 1.3, 1.4]).unwrap();
        assert_eq!(k2_coefficient(&p, MultiIndex4::new(1, 0, 0, 0)).unwrap(), 0.0);
    }

    #[test]
    fn coefficient_hand_product() {
        let p = K2Params::new(1.0, 1.0, 1.0, [2.0; 4]).unwrap();
        // (1)_2 (1)_2 / ((2)_1 (2)_1) = 2*2/(2*2)
        assert_eq!(k2_coefficient(&p, MultiIndex4::new(1, 1, 0, 0)).unwrap(), 1.0);
    }

    #[test]
    fn pole_is_reported() {
        let p = K2Params::new(0.5, 0.5, 0.5, [-1.0, 1.0, 1.0, 1.0]).unwrap();
        assert!(matches!(
            k2_coefficient(&p, MultiIndex4::new(2, 0, 0, 0)),
            Err(Error::Pole(_))
        ));
        // numerator already zero: terminating convention
        let p = K2Params::new(-1.0, 0.5, 0.5, [-1.0, 1.0, 1.0, 1.0]).unwrap();
        assert_eq!(k2_coefficient(&p, MultiIndex4::new(2, 0, 0, 0)).unwrap(), 0.0);
    }

    #[test]
    fn table_rule_matches_direct_coefficient() {
        let p = generic();
        let rule = K2Rule::new(p, 6);
        for idx in [[0, 0, 0, 0], [1, 2, 0, 1], [3, 0, 2, 1], [4, 2, 1, 3]] {
            let idx = MultiIndex4::from_array(idx);
            assert!(close(rule.coefficient(idx).unwrap(), k2_coefficient(&p, idx).unwrap(), 1e-15));
        }
    }

    #[test]
    fn origin_gives_one_with_zero_tail() {
        let v = k2_eval(&generic(), Point4::ORIGIN, &TruncationPolicy::default()).unwrap();
        assert_eq!(v.value, 1.0);
        assert_eq!(v.tail_estimate, 0.0);
    }

    #[test]
    fn x_axis_is_log_series() {
        let p = K2Params::new(1.0, 1.0, 1.0, [2.0; 4]).unwrap();
        let v = k2_eval(&p, Point4::new(0.1, 0.0, 0.0, 0.0).unwrap(), &TruncationPolicy::with_degree(30))
            .unwrap();
        let exact = -(0.9f64).ln() / 0.1;
        assert!(close(v.value, exact, 1e-14), "{} vs {}", v.value, exact);
        assert!((v.value - 1.0536052).abs() < 1e-7);
    }

    #[test]
    fn truncation_is_stable_at_small_points() {
        let p = K2Params::new(0.3, 0.5, 0.7, [1.6, 1.3, 1.7, 1.9]).unwrap();
        let pt = Point4::new(0.05, 0.05, 0.05, 0.05).unwrap();
        let a = k2_eval(&p, pt, &TruncationPolicy::with_degree(20)).unwrap();
        let b = k2_eval(&p, pt, &TruncationPolicy::with_degree(24)).unwrap();
        assert!((a.value - b.value).abs() < 1e-12);
    }

    #[test]
    fn gauss_examples() {
        let pol = TruncationPolicy::default();
        assert_eq!(gauss_2f1(0.0, 2.5, 1.5, 0.7, &pol).unwrap().value, 1.0);
        let v = gauss_2f1(1.0, 1.0, 2.0, 0.1, &pol).unwrap().value;
        assert!(close(v, -(0.9f64).ln() / 0.1, 1e-14));
        // binomial theorem: (1-x)^2
        assert_eq!(gauss_2f1(-2.0, 1.0, 1.0, 0.5, &pol).unwrap().value, 0.25);
    }

    #[test]
    fn appell_reductions() {
        let pol = TruncationPolicy::default();
        assert_eq!(appell_f4(0.3, 0.4, 1.2, 1.5, 0.0, 0.0, &pol).unwrap().value, 1.0);
        let f4 = appell_f4(0.3, 0.4, 1.2, 1.5, 0.08, 0.0, &pol).unwrap().value;
        let f21 = gauss_2f1(0.3, 0.4, 1.2, 0.08, &pol).unwrap().value;
        assert!(close(f4, f21, 1e-15));
        // α = -1 terminates after total degree 1: 1 + αβ(x/γ + y/δ)
        let (b, g, d, x, y) = (0.4, 1.2, 1.5, 0.3, 0.2);
        let v = appell_f4(-1.0, b, g, d, x, y, &pol).unwrap().value;
        let brute = 1.0 - b * x / g - b * y / d;
        assert!(close(v, brute, 1e-15));
    }

    #[test]
    fn f3_shape_examples() {
        let pol = TruncationPolicy::default();
        assert_eq!(srivastava_f3_shape(0, 0.7, 0.4, 1.3, 1.3, 1.3, 0.2, 0.3, 0.1, &pol).unwrap().value, 1.0);
        assert_eq!(srivastava_f3_shape(3, 0.7, 0.4, 1.3, 1.3, 1.3, 0.0, 0.0, 0.0, &pol).unwrap().value, 1.0);
        // n = 1: four terms, (-1)_1 (1-e1-1)_1 = e1
        let (e1, c, e) = (0.7, 0.4, 1.3);
        let (u1, u2, u3) = (0.2, 0.3, 0.1);
        let brute = 1.0 + e1 * (u1 / e + c * u2 / e + u3 / e);
        let v = srivastava_f3_shape(1, e1, c, e, e, e, u1, u2, u3, &pol).unwrap();
        assert!(close(v.value, brute, 1e-15));
        assert_eq!(v.truncated_at_degree, 1);
    }

    #[test]
    fn lauricella_reductions() {
        let pol = TruncationPolicy::default();
        let c = [1.2, 1.4, 1.6, 1.8];
        assert_eq!(lauricella_fc4(0.3, 0.6, c, Point4::ORIGIN, &pol).unwrap().value, 1.0);
        let pt = Point4::new(0.05, 0.04, 0.03, 0.02).unwrap();
        let v = lauricella_fc4(0.3, -1.0, c, pt, &pol).unwrap().value;
        let brute = 1.0 - 0.3 * (0.05 / 1.2 + 0.04 / 1.4 + 0.03 / 1.6 + 0.02 / 1.8);
        assert!(close(v, brute, 1e-15));
        let v = lauricella_fc4(0.3, 0.6, c, Point4::new(0.07, 0.0, 0.0, 0.0).unwrap(), &pol).unwrap();
        let g = gauss_2f1(0.3, 0.6, 1.2, 0.07, &pol).unwrap();
        assert!(close(v.value, g.value, 1e-15));
    }

    #[test]
    fn first_partials_at_origin() {
        let p = generic();
        let pol = TruncationPolicy::default();
        let dx = k2_mixed_partial(&p, Point4::ORIGIN, MultiIndex4::new(1, 0, 0, 0), &pol).unwrap();
        assert!(close(dx.value, p.a * p.b / p.e[0], 1e-15));
        let dz = k2_mixed_partial(&p, Point4::ORIGIN, MultiIndex4::new(0, 0, 1, 0), &pol).unwrap();
        assert!(close(dz.value, p.a * p.c / p.e[2], 1e-15));
        let pt = Point4::new(0.02, 0.03, 0.01, 0.04).unwrap();
        let d0 = k2_mixed_partial(&p, pt, MultiIndex4::default(), &pol).unwrap();
        assert_eq!(d0.value, k2_eval(&p, pt, &pol).unwrap().value);
    }

    #[test]
    fn divergence_is_flagged_outside_convergence() {
        let p = K2Params::new(1.5, 1.5, 1.5, [0.5; 4]).unwrap();
        let v = k2_eval(&p, Point4::new(0.3, 0.3, 0.0, 0.3).unwrap(), &TruncationPolicy::with_degree(20))
            .unwrap();
        assert!(v.divergence_warning);
        assert!(v.outside_domain);
    }

    #[test]
    fn compositions_are_lexicographic() {
        let mut seen = Vec::new();
        for_each_composition::<3>(2, &mut |i| {
            seen.push(*i);
            Ok(())
        })
        .unwrap();
        assert_eq!(
            seen,
            vec![[0, 0, 2], [0, 1, 1], [0, 2, 0], [1, 0, 1], [1, 1, 0], [2, 0, 0]]
        );
    }

    #[test]
    fn compensated_sum_recovers_cancellation() {
        let s: CompensatedSum = [1e16, 1.0, -1e16].into_iter().collect();
        assert_eq!(s.value(), 1.0);
    }
}
