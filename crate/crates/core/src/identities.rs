//! Finite-sum, decomposition and duplication identities for K₂, checked
//! numerically variant by variant.
//!
//! Each formula is compared in its stated form together with a small set of
//! declared corrections. Nothing is silently rewritten: every variant gets
//! its own [`IdentityReport`].

use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::opcalc::{k2_taylor_exact, to_f64, Rational, RationalParams};
use crate::pochhammer::{binomial, factorial, guarded_ratio, rising};
use crate::series::{
    appell_f4, for_each_composition, k2_eval, lauricella_fc4, shell_series, srivastava_f3_shape,
    CompensatedSum, K2Params, MultiIndex4, Point4, SeriesValue, TruncationPolicy,
};

/// Extra degrees used by the truncation-stability rerun.
pub const STABILITY_STEP: u32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IdentityId {
    #[serde(rename = "3.10")]
    FiniteSumB,
    #[serde(rename = "3.11")]
    FiniteSumA,
    #[serde(rename = "3.12")]
    Decomposition,
    #[serde(rename = "3.13")]
    Duplication,
}

impl IdentityId {
    pub fn label(self) -> &'static str {
        match self {
            IdentityId::FiniteSumB => "3.10",
            IdentityId::FiniteSumA => "3.11",
            IdentityId::Decomposition => "3.12",
            IdentityId::Duplication => "3.13",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "3.10" => Ok(IdentityId::FiniteSumB),
            "3.11" => Ok(IdentityId::FiniteSumA),
            "3.12" => Ok(IdentityId::Decomposition),
            "3.13" => Ok(IdentityId::Duplication),
            other => Err(Error::invalid(format!("unknown identity {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatchStatus {
    Match,
    Mismatch,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityTolerances {
    /// Relative tolerance for comparisons involving truncated series.
    pub truncated: f64,
    /// Relative tolerance when both sides are finite sums.
    pub exact: f64,
    pub abs_floor: f64,
}

impl Default for IdentityTolerances {
    fn default() -> Self {
        IdentityTolerances { truncated: 1e-8, exact: 1e-12, abs_floor: 1e-14 }
    }
}

/// Both sides recomputed at D + 4.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityCheck {
    pub degree: u32,
    pub lhs: f64,
    pub rhs: f64,
    /// Both sides moved by no more than their tail estimates at D.
    pub stable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub identity_id: IdentityId,
    pub variant: String,
    pub lhs: f64,
    pub rhs: f64,
    pub abs_diff: f64,
    pub rel_diff: f64,
    pub tolerance: f64,
    pub lhs_tail: f64,
    pub rhs_tail: f64,
    pub truncation: TruncationPolicy,
    pub stability: Option<StabilityCheck>,
    pub status: MatchStatus,
    pub notes: String,
}

impl IdentityReport {
    pub fn is_match(&self) -> bool {
        self.status == MatchStatus::Match
    }
}

/// Indices of one term of the ten-fold duplication sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DuplicationIndexMap {
    pub m_total: u32,
    pub n: u32,
    pub p: u32,
    pub q1: u32,
    pub q2: u32,
    pub q3: u32,
    pub q4: u32,
}

impl DuplicationIndexMap {
    /// From `(m, n, p, q, s, r, k, l, h, t)`, where s, k, r, l, h, t are the
    /// powers of 2xy, 2xz, 2xu, 2yz, 2yu, 2zu.
    pub fn new(idx: [u32; 10]) -> Self {
        let [m, n, p, q, s, r, k, l, h, t] = idx;
        DuplicationIndexMap {
            m_total: idx.iter().sum(),
            n: 2 * (m + n + q + s + r + h) + k + l + t,
            p: 2 * p + k + l + t,
            q1: 2 * m + s + k + r,
            q2: 2 * n + s + l + h,
            q3: 2 * p + k + l + t,
            q4: 2 * q + r + h + t,
        }
    }

    pub fn is_consistent(&self) -> bool {
        self.p == self.q3 && self.n + self.p == 2 * self.m_total && self.n == self.q1 + self.q2 + self.q4
    }

    pub fn q(&self) -> [u32; 4] {
        [self.q1, self.q2, self.q3, self.q4]
    }
}

/// One side of an identity: value and declared truncation error.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Side {
    value: f64,
    tail: f64,
}

impl Side {
    fn exact(value: f64) -> Self {
        Side { value, tail: 0.0 }
    }
}

impl From<SeriesValue> for Side {
    fn from(v: SeriesValue) -> Self {
        Side { value: v.value, tail: v.tail_estimate }
    }
}

/// Outer coefficient times an inner series.
struct OuterTerm {
    weight: f64,
    inner: Side,
    at_bound: bool,
}

fn combine(terms: Vec<OuterTerm>) -> Side {
    let mut sum = CompensatedSum::new();
    let mut tail = 0.0;
    for t in &terms {
        sum.add(t.weight * t.inner.value);
        tail += (t.weight * t.inner.tail).abs();
        if t.at_bound {
            tail += (t.weight * t.inner.value).abs();
        }
    }
    Side { value: sum.value(), tail }
}

fn diffs(lhs: f64, rhs: f64) -> (f64, f64) {
    let abs = (lhs - rhs).abs();
    let scale = lhs.abs().max(rhs.abs());
    let rel = if scale > 0.0 { abs / scale } else { 0.0 };
    (abs, rel)
}

fn within(lhs: f64, rhs: f64, tol: f64, floor: f64) -> bool {
    let (abs, rel) = diffs(lhs, rhs);
    rel <= tol || abs <= floor
}

fn moved_within_tail(at_d: Side, at_d4: f64, floor: f64) -> bool {
    let slack = at_d.tail + floor + 8.0 * f64::EPSILON * at_d.value.abs();
    (at_d4 - at_d.value).abs() <= slack
}

fn exact_report(
    id: IdentityId,
    variant: &str,
    lhs: f64,
    rhs: Result<f64>,
    truncation: TruncationPolicy,
    tols: &IdentityTolerances,
    notes: String,
) -> IdentityReport {
    let (rhs, status, notes) = match rhs {
        Ok(r) => {
            let status = if within(lhs, r, tols.exact, tols.abs_floor) { MatchStatus::Match } else { MatchStatus::Mismatch };
            (r, status, notes)
        }
        Err(e) => (f64::NAN, MatchStatus::Inconclusive, join_notes(&notes, &e.to_string())),
    };
    let (abs_diff, rel_diff) = diffs(lhs, rhs);
    IdentityReport {
        identity_id: id,
        variant: variant.to_string(),
        lhs,
        rhs,
        abs_diff,
        rel_diff,
        tolerance: tols.exact,
        lhs_tail: 0.0,
        rhs_tail: 0.0,
        truncation,
        stability: None,
        status,
        notes,
    }
}

fn join_notes(a: &str, b: &str) -> String {
    match (a.is_empty(), b.is_empty()) {
        (true, _) => b.to_string(),
        (_, true) => a.to_string(),
        _ => format!("{a}; {b}"),
    }
}

#[allow(clippy::too_many_arguments)]
fn truncated_report(
    id: IdentityId,
    variant: &str,
    lhs: [Side; 2],
    rhs: Result<[Side; 2]>,
    policy: &TruncationPolicy,
    tols: &IdentityTolerances,
    notes: &str,
) -> IdentityReport {
    let rhs = match rhs {
        Ok(r) => r,
        Err(e) => {
            let (abs_diff, rel_diff) = (f64::NAN, f64::NAN);
            return IdentityReport {
                identity_id: id,
                variant: variant.to_string(),
                lhs: lhs[0].value,
                rhs: f64::NAN,
                abs_diff,
                rel_diff,
                tolerance: tols.truncated,
                lhs_tail: lhs[0].tail,
                rhs_tail: f64::NAN,
                truncation: *policy,
                stability: None,
                status: MatchStatus::Inconclusive,
                notes: join_notes(notes, &e.to_string()),
            };
        }
    };
    let (l, r) = (lhs[0], rhs[0]);
    let (abs_diff, rel_diff) = diffs(l.value, r.value);
    let stable = moved_within_tail(l, lhs[1].value, tols.abs_floor) && moved_within_tail(r, rhs[1].value, tols.abs_floor);
    let scale = l.value.abs().max(r.value.abs());
    let status = if !stable || !abs_diff.is_finite() {
        MatchStatus::Inconclusive
    } else if rel_diff <= tols.truncated || abs_diff <= tols.abs_floor {
        MatchStatus::Match
    } else if abs_diff - (l.tail + r.tail) > tols.truncated * scale {
        MatchStatus::Mismatch
    } else {
        MatchStatus::Inconclusive
    };
    IdentityReport {
        identity_id: id,
        variant: variant.to_string(),
        lhs: l.value,
        rhs: r.value,
        abs_diff,
        rel_diff,
        tolerance: tols.truncated,
        lhs_tail: l.tail,
        rhs_tail: r.tail,
        truncation: *policy,
        stability: Some(StabilityCheck {
            degree: policy.max_total_degree + STABILITY_STEP,
            lhs: lhs[1].value,
            rhs: rhs[1].value,
            stable,
        }),
        status,
        notes: notes.to_string(),
    }
}

/// Fail with `Inconclusive` when no variant reached a verdict.
fn conclude(reports: Vec<IdentityReport>) -> Result<Vec<IdentityReport>> {
    if reports.iter().all(|r| r.status == MatchStatus::Inconclusive) {
        let id = reports.first().map(|r| r.identity_id.label()).unwrap_or("?");
        return Err(Error::Inconclusive(format!("no variant of {id} converged stably")));
    }
    Ok(reports)
}

fn to_rational(v: f64) -> Result<Rational> {
    Rational::from_float(v).ok_or_else(|| Error::invalid(format!("{v} is not finite")))
}

/// Exact sum of a K₂ series that terminates below total degree `degree`.
fn terminating_k2_exact(params: &RationalParams, point: &[Rational; 4], degree: u32) -> Result<Rational> {
    let mut total = Rational::zero();
    for d in 0..=degree {
        for_each_composition::<4>(d, &mut |idx| {
            if idx.iter().zip(point).any(|(&k, x)| k > 0 && x.is_zero()) {
                return Ok(());
            }
            let idx4 = MultiIndex4::from_array(*idx);
            let c = k2_taylor_exact(params, idx4)
                .ok_or_else(|| Error::pole(format!("K2 coefficient has a pole at {idx:?}")))?;
            if c.is_zero() {
                return Ok(());
            }
            let w: Rational = idx.iter().zip(point).map(|(&k, x)| num_traits::pow(x.clone(), k as usize)).product();
            total += c * w;
            Ok(())
        })?;
    }
    Ok(total)
}

fn rational_point(point: Point4) -> Result<[Rational; 4]> {
    let c = point.coords();
    Ok([to_rational(c[0])?, to_rational(c[1])?, to_rational(c[2])?, to_rational(c[3])?])
}

fn rational_params(v: [f64; 7]) -> Result<RationalParams> {
    let r: Vec<Rational> = v.iter().map(|&x| to_rational(x)).collect::<Result<_>>()?;
    Ok(r.try_into().expect("seven entries"))
}

fn nonzero_x(point: Point4) -> Result<()> {
    if point.x == 0.0 {
        return Err(Error::domain("the finite-sum identities divide by x; x must be nonzero"));
    }
    Ok(())
}

fn signed_binomial(n: u32, r: u32) -> Rational {
    let b = Rational::from_float(binomial(n, r)).expect("finite binomial");
    if r.is_multiple_of(2) {
        b
    } else {
        -b
    }
}

/// Σ_r (-1)^r C(n,r) K₂[-r,…; b,b,c,b; e; point], exactly.
pub fn finite_sum_b_lhs(n: u32, b: f64, c: f64, e: [f64; 4], point: Point4) -> Result<f64> {
    let pt = rational_point(point)?;
    let mut total = Rational::zero();
    for r in 0..=n {
        let params = rational_params([-(r as f64), b, c, e[0], e[1], e[2], e[3]])?;
        total += signed_binomial(n, r) * terminating_k2_exact(&params, &pt, r)?;
    }
    Ok(to_f64(&total))
}

/// Σ_r Σ_s (-1)^{r+s} C(n,r) C(m,s) K₂[a,…; -r,-r,-s,-r; e; point], exactly.
pub fn finite_sum_a_lhs(n: u32, m: u32, a: f64, e: [f64; 4], point: Point4) -> Result<f64> {
    let pt = rational_point(point)?;
    let mut total = Rational::zero();
    for r in 0..=n {
        for s in 0..=m {
            let params = rational_params([a, -(r as f64), -(s as f64), e[0], e[1], e[2], e[3]])?;
            total += signed_binomial(n, r) * signed_binomial(m, s) * terminating_k2_exact(&params, &pt, r + s)?;
        }
    }
    Ok(to_f64(&total))
}

fn pochhammer_ratio(num: f64, den: f64, what: &str) -> Result<f64> {
    guarded_ratio(num, den).ok_or_else(|| Error::pole(format!("{what} has a vanishing denominator")))
}

/// Terminating triple series with the z-slot weighted by (-1)^k / (1-b-n)_k,
/// which is what the b-Pochhammer contributes once (b)_{n-k} is factored.
#[allow(clippy::too_many_arguments)]
fn f3_with_b_weight(n: u32, b: f64, e1: f64, c: f64, e2: f64, e3: f64, e4: f64, u: [f64; 3], policy: &TruncationPolicy) -> Result<SeriesValue> {
    let exact = TruncationPolicy { max_total_degree: n, ..*policy };
    let nf = n as f64;
    shell_series(u, &exact, |&[j, k, l]| {
        let s = j + k + l;
        let num = rising(&-nf, s) * rising(&(1.0 - e1 - nf), s) * rising(&c, k) * if k % 2 == 0 { 1.0 } else { -1.0 };
        let den = rising(&(1.0 - b - nf), k) * rising(&e2, j) * rising(&e3, k) * rising(&e4, l);
        pochhammer_ratio(num, den, "weighted triple series")
    })
}

/// Finite sum over K₂ with a = -r against the terminating triple series.
///
/// Variants: `printed`, `x^n` (stated form times x^n), and `x^n-b-weighted`,
/// which also carries the factor (-1)^k/(1-b-n)_k on the z-index.
pub fn verify_finite_sum_b(
    n: u32,
    b: f64,
    c: f64,
    e: [f64; 4],
    point: Point4,
    policy: &TruncationPolicy,
    tols: &IdentityTolerances,
) -> Result<Vec<IdentityReport>> {
    nonzero_x(point)?;
    let lhs = finite_sum_b_lhs(n, b, c, e, point)?;
    let Point4 { x, y, z, t: u } = point;
    let ratios = [y / x, z / x, u / x];
    let pre = pochhammer_ratio(rising(&b, n), rising(&e[0], n), "(b)_n/(e1)_n")?;
    let truncation = TruncationPolicy { max_total_degree: n, ..*policy };
    let printed = srivastava_f3_shape(n, e[0], c, e[1], e[2], e[3], ratios[0], ratios[1], ratios[2], policy)
        .map(|v| pre * v.value);
    let xn = x.powi(n as i32);
    let weighted = f3_with_b_weight(n, b, e[0], c, e[1], e[2], e[3], ratios, policy).map(|v| xn * pre * v.value);
    let id = IdentityId::FiniteSumB;
    conclude(vec![
        exact_report(id, "printed", lhs, printed.clone(), truncation, tols, String::new()),
        exact_report(id, "x^n", lhs, printed.map(|v| xn * v), truncation, tols, String::new()),
        exact_report(
            id,
            "x^n-b-weighted",
            lhs,
            weighted,
            truncation,
            tols,
            "z-index weighted by (-1)^k/(1-b-n)_k".to_string(),
        ),
    ])
}

/// Double finite sum over K₂ with b = -r, c = -s against Appell F₄.
///
/// Variants: `printed`, `x^n`, `z^m`, `x^n z^m`.
pub fn verify_finite_sum_a(
    n: u32,
    m: u32,
    a: f64,
    e: [f64; 4],
    point: Point4,
    policy: &TruncationPolicy,
    tols: &IdentityTolerances,
) -> Result<Vec<IdentityReport>> {
    nonzero_x(point)?;
    let lhs = finite_sum_a_lhs(n, m, a, e, point)?;
    let Point4 { x, y, z, t: u } = point;
    let truncation = TruncationPolicy { max_total_degree: n, ..*policy };
    let pre = pochhammer_ratio(rising(&a, n + m), rising(&e[0], n) * rising(&e[2], m), "(a)_{n+m}/((e1)_n (e3)_m)")?;
    let nf = n as f64;
    let base = appell_f4(-nf, 1.0 - e[0] - nf, e[1], e[3], y / x, u / x, &truncation).map(|v| pre * v.value);
    let (xn, zm) = (x.powi(n as i32), z.powi(m as i32));
    let id = IdentityId::FiniteSumA;
    let variants = [("printed", 1.0), ("x^n", xn), ("z^m", zm), ("x^n z^m", xn * zm)];
    conclude(
        variants
            .iter()
            .map(|(name, f)| exact_report(id, name, lhs, base.clone().map(|v| f * v), truncation, tols, String::new()))
            .collect(),
    )
}

fn at_degree(policy: &TruncationPolicy, d: u32) -> TruncationPolicy {
    TruncationPolicy { max_total_degree: d, ..*policy }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum DecompositionVariant {
    Printed,
    Shifted,
    ShiftedFactorial,
}

fn decomposition_rhs(
    a: f64,
    b: f64,
    e: [f64; 4],
    point: Point4,
    policy: &TruncationPolicy,
    outer_bound: u32,
    variant: DecompositionVariant,
) -> Result<Side> {
    let d = policy.max_total_degree;
    let Point4 { x, y, z, t: u } = point;
    let mut triples = Vec::new();
    for j in 0..=outer_bound.min(d / 2) {
        for_each_composition::<3>(j, &mut |&[s, k, r]| {
            triples.push([s, k, r]);
            Ok(())
        })?;
    }
    let terms: Vec<Result<OuterTerm>> = triples
        .par_iter()
        .map(|&[s, k, r]| {
            let j = s + k + r;
            let mut den = rising(&e[0], s) * rising(&e[1], k) * rising(&e[2], j) * rising(&e[3], r);
            if variant == DecompositionVariant::ShiftedFactorial {
                den *= factorial(s) * factorial(k) * factorial(r);
            }
            let coeff = pochhammer_ratio(rising(&a, 2 * j) * rising(&b, j), den, "outer coefficient")?;
            let weight = coeff * (-x * z).powi(s as i32) * (-y * z).powi(k as i32) * (-u * z).powi(r as i32);
            let at_bound = j == outer_bound;
            if weight == 0.0 {
                return Ok(OuterTerm { weight, inner: Side::exact(0.0), at_bound });
            }
            let lower = match variant {
                DecompositionVariant::Printed => e,
                _ => [e[0] + s as f64, e[1] + k as f64, e[2] + j as f64, e[3] + r as f64],
            };
            let inner = lauricella_fc4(a + 2.0 * j as f64, b + j as f64, lower, point, &at_degree(policy, d - 2 * j))?;
            Ok(OuterTerm { weight, inner: inner.into(), at_bound })
        })
        .collect();
    Ok(combine(terms.into_iter().collect::<Result<_>>()?))
}

/// K₂ with c = b against the F_C⁽⁴⁾ decomposition.
///
/// Outer sum over s + k + r ≤ `outer_bound`; each inner series is truncated
/// at D − 2(s+k+r) so every product has total degree ≤ D. Variants: the
/// stated lower parameters, the lower parameters shifted to
/// (e1+s, e2+k, e3+s+k+r, e4+r), and the shifted form with 1/(s! k! r!).
pub fn verify_decomposition(
    a: f64,
    b: f64,
    e: [f64; 4],
    point: Point4,
    policy: &TruncationPolicy,
    outer_bound: u32,
    tols: &IdentityTolerances,
) -> Result<Vec<IdentityReport>> {
    let params = K2Params::new(a, b, b, e)?;
    let degrees = [policy.max_total_degree, policy.max_total_degree + STABILITY_STEP];
    let lhs = degrees.map(|d| k2_eval(&params, point, &at_degree(policy, d)).map(Side::from));
    let lhs = [lhs[0].clone()?, lhs[1].clone()?];
    let id = IdentityId::Decomposition;
    let variants = [
        ("printed", DecompositionVariant::Printed, ""),
        ("shifted", DecompositionVariant::Shifted, "lower parameters e1+s, e2+k, e3+s+k+r, e4+r"),
        ("shifted-factorial", DecompositionVariant::ShiftedFactorial, "shifted lower parameters and 1/(s! k! r!)"),
    ];
    let reports = variants
        .iter()
        .map(|&(name, v, note)| {
            let rhs = degrees
                .iter()
                .map(|&d| decomposition_rhs(a, b, e, point, &at_degree(policy, d), outer_bound, v))
                .collect::<Result<Vec<_>>>()
                .map(|s| [s[0], s[1]]);
            truncated_report(id, name, lhs, rhs, policy, tols, note)
        })
        .collect();
    conclude(reports)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum DuplicationVariant {
    PrintedCPlusN,
    PrintedCPlusP,
    ProductSplit,
}

fn ten_index_rhs(params: &K2Params, point: Point4, policy: &TruncationPolicy, total_bound: u32, c_shift_by_p: bool) -> Result<Side> {
    let d = policy.max_total_degree;
    let coords = point.coords();
    let mut tuples = Vec::new();
    for m in 0..=total_bound.min(d / 2) {
        for_each_composition::<10>(m, &mut |idx| {
            tuples.push(*idx);
            Ok(())
        })?;
    }
    let K2Params { a, b, c, e } = *params;
    let terms: Vec<Result<OuterTerm>> = tuples
        .par_iter()
        .map(|idx| {
            let map = DuplicationIndexMap::new(*idx);
            let q = map.q();
            let den: f64 = (0..4).map(|i| rising(&e[i], q[i])).product();
            let num = rising(&a, map.m_total) * rising(&b, map.n) * rising(&c, map.p);
            let coeff = pochhammer_ratio(num, den, "ten-index coefficient")?;
            let cross: u32 = idx[4..].iter().sum();
            let mono: f64 = (0..4).map(|i| coords[i].powi(q[i] as i32)).product::<f64>() * 2f64.powi(cross as i32);
            let weight = coeff * mono;
            let at_bound = map.m_total == total_bound;
            if weight == 0.0 {
                return Ok(OuterTerm { weight, inner: Side::exact(0.0), at_bound });
            }
            let c_shift = if c_shift_by_p { map.p } else { map.n };
            let inner_params = K2Params::new(
                a + map.m_total as f64,
                b + map.n as f64,
                c + c_shift as f64,
                [0, 1, 2, 3].map(|i| e[i] + q[i] as f64),
            )?;
            let inner = k2_eval(&inner_params, point, &at_degree(policy, d - 2 * map.m_total))?;
            Ok(OuterTerm { weight, inner: inner.into(), at_bound })
        })
        .collect();
    Ok(combine(terms.into_iter().collect::<Result<_>>()?))
}

/// Σ_κ (a)_{|κ|} (b)_{κ1+κ2+κ4} (c)_{κ3} / ((e)_κ κ!) x^κ · K₂[a; b+κ1+κ2+κ4, c+κ3; e+κ],
/// summed over |κ| ≤ D with inner degree D − |κ|.
fn product_split_rhs(params: &K2Params, point: Point4, policy: &TruncationPolicy) -> Result<Side> {
    let d = policy.max_total_degree;
    let coords = point.coords();
    let mut kappas = Vec::new();
    for k in 0..=d {
        for_each_composition::<4>(k, &mut |idx| {
            kappas.push(*idx);
            Ok(())
        })?;
    }
    let K2Params { a, b, c, e } = *params;
    let terms: Vec<Result<OuterTerm>> = kappas
        .par_iter()
        .map(|kap| {
            let total: u32 = kap.iter().sum();
            let bdeg = kap[0] + kap[1] + kap[3];
            let den: f64 = (0..4).map(|i| rising(&e[i], kap[i]) * factorial(kap[i])).product();
            let coeff = pochhammer_ratio(rising(&a, total) * rising(&b, bdeg) * rising(&c, kap[2]), den, "split coefficient")?;
            let weight = coeff * (0..4).map(|i| coords[i].powi(kap[i] as i32)).product::<f64>();
            if weight == 0.0 {
                return Ok(OuterTerm { weight, inner: Side::exact(0.0), at_bound: false });
            }
            let inner_params = K2Params::new(a, b + bdeg as f64, c + kap[2] as f64, [0, 1, 2, 3].map(|i| e[i] + kap[i] as f64))?;
            let inner = k2_eval(&inner_params, point, &at_degree(policy, d - total))?;
            Ok(OuterTerm { weight, inner: inner.into(), at_bound: false })
        })
        .collect();
    Ok(combine(terms.into_iter().collect::<Result<_>>()?))
}

/// K₂ with first parameter 2a against the ten-index duplication sum.
///
/// The ten-index variants sum over M ≤ `total_bound` with inner degree
/// D − 2M and shift the third numerator by N (stated form) or by P. The
/// `product-split` variant splits (2a)_{|k|} by the multivariate
/// Vandermonde convolution instead and is summed through total degree D.
#[allow(clippy::too_many_arguments)]
pub fn verify_duplication(
    a: f64,
    b: f64,
    c: f64,
    e: [f64; 4],
    point: Point4,
    policy: &TruncationPolicy,
    total_bound: u32,
    tols: &IdentityTolerances,
) -> Result<Vec<IdentityReport>> {
    let base = K2Params::new(a, b, c, e)?;
    let doubled = K2Params::new(2.0 * a, b, c, e)?;
    let degrees = [policy.max_total_degree, policy.max_total_degree + STABILITY_STEP];
    let lhs = degrees.map(|d| k2_eval(&doubled, point, &at_degree(policy, d)).map(Side::from));
    let lhs = [lhs[0].clone()?, lhs[1].clone()?];
    let id = IdentityId::Duplication;
    let variants = [
        ("printed-c+N", DuplicationVariant::PrintedCPlusN, "third numerator shifted by N"),
        ("printed-c+P", DuplicationVariant::PrintedCPlusP, "third numerator shifted by P"),
        ("product-split", DuplicationVariant::ProductSplit, "Vandermonde split of (2a)_{m+n+p+q}"),
    ];
    let reports = variants
        .iter()
        .map(|&(name, v, note)| {
            let rhs = degrees
                .iter()
                .map(|&d| {
                    let pol = at_degree(policy, d);
                    match v {
                        DuplicationVariant::PrintedCPlusN => ten_index_rhs(&base, point, &pol, total_bound, false),
                        DuplicationVariant::PrintedCPlusP => ten_index_rhs(&base, point, &pol, total_bound, true),
                        DuplicationVariant::ProductSplit => product_split_rhs(&base, point, &pol),
                    }
                })
                .collect::<Result<Vec<_>>>()
                .map(|s| [s[0], s[1]]);
            truncated_report(id, name, lhs, rhs, policy, tols, note)
        })
        .collect();
    conclude(reports)
}
