//! Exact operational calculus for derivative / antiderivative words acting on
//! monomials with rational exponents.
//!
//! A word such as `x D_t1 t2^-1 D_t2^-1 t1` is a list of atoms applied right
//! to left. Powers of words, and products of powers of several words, are
//! taken in normal order: for every formal variable, all multiplications
//! that sit to the right of its derivative act first, then the combined
//! derivative or antiderivative, then the remaining multiplications. That is
//! the ordering under which `(1 - Σ T)^(-α)` reproduces the hypergeometric
//! coefficients term by term.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pochhammer::{falling, rising};
use crate::series::{bracket_coefficient, k2_coefficient_generic, MultiIndex4};

pub type Rational = BigRational;

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parse `"p/q"`, an integer, or a plain decimal such as `"-0.125"`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::invalid(format!("cannot parse {s:?} as a rational"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::invalid(format!("zero denominator in {s:?}")));
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = whole.trim_start().starts_with('-');
        let w: BigInt = match whole {
            "" | "-" | "+" => BigInt::zero(),
            w => w.parse().map_err(|_| bad())?,
        };
        let f: BigInt = frac.parse().map_err(|_| bad())?;
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        let magnitude = Rational::new(w.abs() * &scale + f, scale);
        return Ok(if negative { -magnitude } else { magnitude });
    }
    s.parse::<BigInt>().map(Rational::from_integer).map_err(|_| bad())
}

pub fn to_f64(r: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

/// Formal variables the operators act on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Var {
    /// `t` for index 0, `t1`..`t6` otherwise.
    T(u8),
    U,
    X,
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::T(0) => write!(f, "t"),
            Var::T(k) => write!(f, "t{k}"),
            Var::U => write!(f, "u"),
            Var::X => write!(f, "x"),
        }
    }
}

/// Scalar multipliers x, y, z, u; they only count degrees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Indeterminate {
    X,
    Y,
    Z,
    U,
}

impl Indeterminate {
    pub fn slot(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Monomial {
    pub coeff: Rational,
    exps: BTreeMap<Var, Rational>,
}

impl Monomial {
    pub fn one() -> Self {
        Monomial { coeff: Rational::one(), exps: BTreeMap::new() }
    }

    pub fn new(coeff: Rational, exps: impl IntoIterator<Item = (Var, Rational)>) -> Self {
        let mut m = Monomial { coeff, exps: BTreeMap::new() };
        for (v, e) in exps {
            m.set_exponent(v, m.exponent(v) + e);
        }
        m
    }

    pub fn exponent(&self, var: Var) -> Rational {
        self.exps.get(&var).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn set_exponent(&mut self, var: Var, e: Rational) {
        if e.is_zero() {
            self.exps.remove(&var);
        } else {
            self.exps.insert(var, e);
        }
    }

    pub fn exponents(&self) -> impl Iterator<Item = (&Var, &Rational)> {
        self.exps.iter()
    }

    pub fn same_powers(&self, other: &Monomial) -> bool {
        self.exps == other.exps
    }

    pub fn scaled(mut self, k: &Rational) -> Self {
        self.coeff *= k;
        self
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.coeff)?;
        for (v, e) in &self.exps {
            write!(f, " {v}^({e})")?;
        }
        Ok(())
    }
}

/// D^m: multiply by λ(λ-1)...(λ-m+1) and lower the exponent by m.
pub fn apply_derive(var: Var, m: u32, mono: &Monomial) -> Monomial {
    let lambda = mono.exponent(var);
    let mut out = mono.clone();
    out.coeff *= falling(&lambda, m);
    out.set_exponent(var, lambda - int(m as i64));
    out
}

/// D^-m (integration from zero): divide by (λ+1)...(λ+m), raise the exponent by m.
pub fn apply_integrate(var: Var, m: u32, mono: &Monomial) -> Result<Monomial> {
    let lambda = mono.exponent(var);
    let den = rising(&(lambda.clone() + int(1)), m);
    if den.is_zero() {
        return Err(Error::pole(format!(
            "D_{var}^-{m} applied to {var}^({lambda}) hits a negative integer exponent"
        )));
    }
    let mut out = mono.clone();
    out.coeff /= den;
    out.set_exponent(var, lambda + int(m as i64));
    Ok(out)
}

pub fn apply_multiply(var: Var, exponent: &Rational, mono: &Monomial) -> Monomial {
    let mut out = mono.clone();
    out.set_exponent(var, mono.exponent(var) + exponent);
    out
}

/// D_t^m D_u^-m on t^(β+m-1) u^(γ-1), in closed form: multiply by
/// (β)_m / (γ)_m, lower t by m and raise u by m.
pub fn apply_shift_pair(t_var: Var, u_var: Var, m: u32, mono: &Monomial) -> Result<Monomial> {
    let m_r = int(m as i64);
    let beta = mono.exponent(t_var) - m_r.clone() + int(1);
    let gamma = mono.exponent(u_var) + int(1);
    let den = rising(&gamma, m);
    if den.is_zero() {
        return Err(Error::pole(format!("({gamma})_{m} vanishes in the shift pair")));
    }
    let mut out = mono.clone();
    out.coeff *= rising(&beta, m) / den;
    out.set_exponent(t_var, mono.exponent(t_var) - m_r.clone());
    out.set_exponent(u_var, mono.exponent(u_var) + m_r);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OperatorAtom {
    Derive { var: Var, order: u32 },
    Integrate { var: Var, order: u32 },
    MultiplyPower { var: Var, exponent: Rational },
    ScaleByIndeterminate(Indeterminate),
}

impl OperatorAtom {
    pub fn d(var: Var) -> Self {
        OperatorAtom::Derive { var, order: 1 }
    }

    pub fn d_inv(var: Var) -> Self {
        OperatorAtom::Integrate { var, order: 1 }
    }

    pub fn mul(var: Var, exponent: i64) -> Self {
        OperatorAtom::MultiplyPower { var, exponent: int(exponent) }
    }

    pub fn scale(tag: Indeterminate) -> Self {
        OperatorAtom::ScaleByIndeterminate(tag)
    }
}

/// Per-variable action of a normal-ordered word:
/// multiply by `inner`, differentiate `order` times (negative: integrate),
/// then multiply by `outer`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
struct VarAction {
    inner: Rational,
    order: i64,
    outer: Rational,
}

/// Word atoms, written left to right as in the formula and applied right to left.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OperatorWord {
    atoms: Vec<OperatorAtom>,
    actions: BTreeMap<Var, VarAction>,
    degree: [u32; 4],
}

impl OperatorWord {
    pub fn new(atoms: Vec<OperatorAtom>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::invalid("operator word must be nonempty"));
        }
        let mut actions: BTreeMap<Var, VarAction> = BTreeMap::new();
        let mut degree = [0u32; 4];
        for atom in atoms.iter().rev() {
            match atom {
                OperatorAtom::ScaleByIndeterminate(tag) => degree[tag.slot()] += 1,
                OperatorAtom::MultiplyPower { var, exponent } => {
                    let act = actions.entry(*var).or_default();
                    if act.order == 0 {
                        act.inner += exponent;
                    } else {
                        act.outer += exponent;
                    }
                }
                OperatorAtom::Derive { var, order } | OperatorAtom::Integrate { var, order } => {
                    if *order == 0 {
                        return Err(Error::invalid("derivative order must be at least 1"));
                    }
                    let signed = match atom {
                        OperatorAtom::Derive { .. } => *order as i64,
                        _ => -(*order as i64),
                    };
                    let act = actions.entry(*var).or_default();
                    if !act.outer.is_zero() || (act.order != 0 && act.order.signum() != signed.signum()) {
                        return Err(Error::invalid(format!(
                            "word mixes operators on {var} in a way that has no normal order"
                        )));
                    }
                    act.order += signed;
                }
            }
        }
        Ok(OperatorWord { atoms, actions, degree })
    }

    pub fn atoms(&self) -> &[OperatorAtom] {
        &self.atoms
    }

    /// Degrees in (x, y, z, u) contributed by one application.
    pub fn degree(&self) -> [u32; 4] {
        self.degree
    }

    /// One literal right-to-left application.
    pub fn apply_once(&self, mono: &Monomial) -> Result<Monomial> {
        let mut cur = mono.clone();
        for atom in self.atoms.iter().rev() {
            cur = match atom {
                OperatorAtom::Derive { var, order } => apply_derive(*var, *order, &cur),
                OperatorAtom::Integrate { var, order } => apply_integrate(*var, *order, &cur)?,
                OperatorAtom::MultiplyPower { var, exponent } => apply_multiply(*var, exponent, &cur),
                OperatorAtom::ScaleByIndeterminate(_) => cur,
            };
        }
        Ok(cur)
    }
}

/// Apply ∏ word_i^{power_i} in normal order.
pub fn apply_normal_ordered(words: &[(&OperatorWord, u32)], target: &Monomial) -> Result<Monomial> {
    let mut combined: BTreeMap<Var, VarAction> = BTreeMap::new();
    for (word, power) in words {
        if *power == 0 {
            continue;
        }
        let k = int(*power as i64);
        for (var, act) in &word.actions {
            let c = combined.entry(*var).or_default();
            c.inner += &act.inner * &k;
            c.order += act.order * *power as i64;
            c.outer += &act.outer * &k;
        }
    }
    let mut cur = target.clone();
    for (var, act) in &combined {
        cur = apply_multiply(*var, &act.inner, &cur);
        cur = match act.order {
            o if o > 0 => apply_derive(*var, o as u32, &cur),
            o if o < 0 => apply_integrate(*var, (-o) as u32, &cur)?,
            _ => cur,
        };
        cur = apply_multiply(*var, &act.outer, &cur);
    }
    Ok(cur)
}

/// `(1 - Σ terms)^(-exponent)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OperatorFactor {
    pub exponent: Rational,
    pub terms: Vec<OperatorWord>,
}

/// A product of factors; under normal ordering the factors commute.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OperatorExpression {
    pub factors: Vec<OperatorFactor>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpansionPolicy {
    /// Largest total power of the expansion terms kept.
    pub total_order: u32,
}

/// Expansion keyed by the power of every term (factors concatenated).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndeterminateSeries {
    pub term_degrees: Vec<[u32; 4]>,
    pub entries: BTreeMap<Vec<u32>, Monomial>,
}

impl IndeterminateSeries {
    pub fn multidegree(&self, powers: &[u32]) -> [u32; 4] {
        let mut out = [0; 4];
        for (k, deg) in powers.iter().zip(&self.term_degrees) {
            for s in 0..4 {
                out[s] += k * deg[s];
            }
        }
        out
    }

    /// Entries summed per (x, y, z, u) multidegree, like monomials combined,
    /// ordered lexicographically by exponents.
    pub fn by_multidegree(&self) -> BTreeMap<[u32; 4], Vec<Monomial>> {
        let mut out: BTreeMap<[u32; 4], Vec<Monomial>> = BTreeMap::new();
        for (powers, mono) in &self.entries {
            let bucket = out.entry(self.multidegree(powers)).or_default();
            match bucket.iter_mut().find(|m| m.same_powers(mono)) {
                Some(m) => m.coeff += &mono.coeff,
                None => bucket.push(mono.clone()),
            }
        }
        for bucket in out.values_mut() {
            bucket.retain(|m| !m.coeff.is_zero());
            bucket.sort_by(|a, b| a.exps.cmp(&b.exps));
        }
        out
    }
}

/// Every vector of `len` nonnegative integers with sum ≤ `max_total`, ordered
/// by sum and then lexicographically.
fn for_each_bounded_vector(len: usize, max_total: u32, f: &mut impl FnMut(&[u32]) -> Result<()>) -> Result<()> {
    fn rec(buf: &mut Vec<u32>, len: usize, remaining: u32, f: &mut impl FnMut(&[u32]) -> Result<()>) -> Result<()> {
        if buf.len() + 1 == len {
            buf.push(remaining);
            f(buf)?;
            buf.pop();
            return Ok(());
        }
        for v in 0..=remaining {
            buf.push(v);
            rec(buf, len, remaining - v, f)?;
            buf.pop();
        }
        Ok(())
    }
    if len == 0 {
        return f(&[]);
    }
    let mut buf = Vec::with_capacity(len);
    for total in 0..=max_total {
        rec(&mut buf, len, total, f)?;
    }
    Ok(())
}

/// Expand `∏ (1 - Σ T_i)^(-α_f)` on `target` through total term power N using
/// `(1-T)^(-α) = Σ_k (α)_k T^k / k!` and the multinomial theorem.
pub fn expand_neg_power(
    expr: &OperatorExpression,
    target: &Monomial,
    policy: ExpansionPolicy,
) -> Result<IndeterminateSeries> {
    let words: Vec<&OperatorWord> = expr.factors.iter().flat_map(|f| f.terms.iter()).collect();
    let owners: Vec<usize> = expr
        .factors
        .iter()
        .enumerate()
        .flat_map(|(i, f)| std::iter::repeat_n(i, f.terms.len()))
        .collect();
    let mut entries = BTreeMap::new();
    for_each_bounded_vector(words.len(), policy.total_order, &mut |powers| {
        let mut coeff = Rational::one();
        let mut factor_totals = vec![0u32; expr.factors.len()];
        for (k, owner) in powers.iter().zip(&owners) {
            factor_totals[*owner] += k;
            coeff /= rising(&int(1), *k);
        }
        for (factor, total) in expr.factors.iter().zip(&factor_totals) {
            coeff *= rising(&factor.exponent, *total);
        }
        let paired: Vec<(&OperatorWord, u32)> = words.iter().copied().zip(powers.iter().copied()).collect();
        let mono = apply_normal_ordered(&paired, target)?.scaled(&coeff);
        entries.insert(powers.to_vec(), mono);
        Ok(())
    })?;
    Ok(IndeterminateSeries { term_degrees: words.iter().map(|w| w.degree()).collect(), entries })
}

/// `tag · D_{t} s^-1 D_{s}^-1 t`, the building block of every image here.
fn raising_word(tag: Option<Indeterminate>, lowered: Var, raised: Var, inverse_mult: bool) -> OperatorWord {
    use OperatorAtom as A;
    let mut atoms = Vec::new();
    if let Some(tag) = tag {
        atoms.push(A::scale(tag));
    }
    atoms.push(A::d(lowered));
    if inverse_mult {
        atoms.push(A::mul(raised, -1));
    }
    atoms.push(A::d_inv(raised));
    atoms.push(A::mul(lowered, 1));
    OperatorWord::new(atoms).expect("raising word is normal-orderable")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GaussForm {
    /// `(1 - x D_t u^-1 D_u^-1 t)^-α {t^(β-1) u^(γ-1)}`
    ViaU,
    /// `(1 - D_t D_x^-1 t)^-α {t^(β-1) x^(γ-1)}`
    ViaX,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum K2Form {
    /// Two factors with exponents -b and -c on `t1^(a-1) t2^(e1-1) ... t5^(e4-1)`.
    TwoFactor,
    /// One factor with exponent -a on `t1^(b-1) t2^(c-1) t3^(e1-1) ... t6^(e4-1)`.
    OneFactor,
}

/// Result of comparing one operator form against the series coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormCheck {
    pub form: String,
    pub order: u32,
    pub entries_checked: usize,
    pub matched: bool,
    /// Exact |expansion - expected| maximised over the entries, as a rational string.
    pub worst_deviation: String,
    pub first_mismatch: Option<Vec<u32>>,
    pub notes: Vec<String>,
}

fn compare_entries(
    form: &str,
    order: u32,
    series: &IndeterminateSeries,
    mut expected: impl FnMut(&[u32]) -> Result<Monomial>,
) -> Result<FormCheck> {
    let mut worst = Rational::zero();
    let mut first_mismatch = None;
    for (powers, got) in &series.entries {
        let want = expected(powers)?;
        let ok = got.same_powers(&want) && got.coeff == want.coeff;
        let dev = if got.same_powers(&want) {
            (&got.coeff - &want.coeff).abs()
        } else {
            got.coeff.abs() + want.coeff.abs()
        };
        if dev > worst {
            worst = dev;
        }
        if !ok && first_mismatch.is_none() {
            first_mismatch = Some(powers.clone());
        }
    }
    Ok(FormCheck {
        form: form.to_string(),
        order,
        entries_checked: series.entries.len(),
        matched: first_mismatch.is_none(),
        worst_deviation: worst.to_string(),
        first_mismatch,
        notes: Vec::new(),
    })
}

pub fn gauss_expression(form: GaussForm, alpha: &Rational) -> OperatorExpression {
    let t = Var::T(0);
    let word = match form {
        GaussForm::ViaU => raising_word(Some(Indeterminate::X), t, Var::U, true),
        GaussForm::ViaX => raising_word(None, t, Var::X, false),
    };
    OperatorExpression { factors: vec![OperatorFactor { exponent: alpha.clone(), terms: vec![word] }] }
}

/// Check one operator form of the ₂F₁ image through order N.
pub fn verify_gauss_form(form: GaussForm, alpha: &Rational, beta: &Rational, gamma: &Rational, n: u32) -> Result<FormCheck> {
    if gamma <= &Rational::zero() && gamma.is_integer() {
        return Err(Error::pole(format!("γ = {gamma} is a nonpositive integer")));
    }
    let t = Var::T(0);
    let second = match form {
        GaussForm::ViaU => Var::U,
        GaussForm::ViaX => Var::X,
    };
    let target = Monomial::new(Rational::one(), [(t, beta - int(1)), (second, gamma - int(1))]);
    let series = expand_neg_power(&gauss_expression(form, alpha), &target, ExpansionPolicy { total_order: n })?;
    let name = match form {
        GaussForm::ViaU => "lemma1-3.4",
        GaussForm::ViaX => "lemma1-3.5",
    };
    compare_entries(name, n, &series, |powers| {
        let k = powers[0];
        let coeff = rising(alpha, k) * rising(beta, k) / (rising(gamma, k) * rising(&int(1), k));
        let mut want = target.clone().scaled(&coeff);
        if form == GaussForm::ViaX {
            want.set_exponent(Var::X, gamma - int(1) + int(k as i64));
        }
        Ok(want)
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussImageReport {
    pub via_u: FormCheck,
    pub via_x: FormCheck,
}

impl GaussImageReport {
    pub fn matched(&self) -> bool {
        self.via_u.matched && self.via_x.matched
    }
}

pub fn verify_gauss_image(alpha: &Rational, beta: &Rational, gamma: &Rational, n: u32) -> Result<GaussImageReport> {
    Ok(GaussImageReport {
        via_u: verify_gauss_form(GaussForm::ViaU, alpha, beta, gamma, n)?,
        via_x: verify_gauss_form(GaussForm::ViaX, alpha, beta, gamma, n)?,
    })
}

/// `[a, b, c, e1, e2, e3, e4]` as exact rationals.
pub type RationalParams = [Rational; 7];

/// Operator expression and target monomial of one K₂ image.
pub fn k2_image(form: K2Form, params: &RationalParams) -> (OperatorExpression, Monomial) {
    use Indeterminate::*;
    let [a, b, c, e1, e2, e3, e4] = params.clone();
    let one = int(1);
    let t = Var::T;
    match form {
        K2Form::TwoFactor => {
            let first = OperatorFactor {
                exponent: b,
                terms: vec![
                    raising_word(Some(X), t(1), t(2), true),
                    raising_word(Some(Y), t(1), t(3), true),
                    raising_word(Some(U), t(1), t(5), true),
                ],
            };
            let second = OperatorFactor { exponent: c, terms: vec![raising_word(Some(Z), t(1), t(4), true)] };
            // the z-slot lives on t4
            let target = Monomial::new(
                Rational::one(),
                [(t(1), a - &one), (t(2), e1 - &one), (t(3), e2 - &one), (t(4), e3 - &one), (t(5), e4 - &one)],
            );
            (OperatorExpression { factors: vec![first, second] }, target)
        }
        K2Form::OneFactor => {
            let factor = OperatorFactor {
                exponent: a,
                terms: vec![
                    raising_word(Some(X), t(1), t(3), true),
                    raising_word(Some(Y), t(1), t(4), true),
                    raising_word(Some(Z), t(2), t(5), true),
                    raising_word(Some(U), t(1), t(6), true),
                ],
            };
            let target = Monomial::new(
                Rational::one(),
                [
                    (t(1), b - &one),
                    (t(2), c - &one),
                    (t(3), e1 - &one),
                    (t(4), e2 - &one),
                    (t(5), e3 - &one),
                    (t(6), e4 - &one),
                ],
            );
            (OperatorExpression { factors: vec![factor] }, target)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct K2ImageReport {
    pub form: String,
    pub order: u32,
    pub multidegrees_checked: usize,
    pub matched: bool,
    pub first_mismatch: Option<[u32; 4]>,
    pub notes: Vec<String>,
}

/// Expand a K₂ operator image through order N and compare every multidegree
/// with the K₂ Taylor coefficient read off the twelve-slot bracket
/// `[a,a,a,a; b,b,c,b; e1,e2,e3,e4]`.
pub fn verify_k2_image(params: &RationalParams, n: u32, form: K2Form) -> Result<K2ImageReport> {
    let (expr, target) = k2_image(form, params);
    let series = expand_neg_power(&expr, &target, ExpansionPolicy { total_order: n })?;
    let [a, b, c, e1, e2, e3, e4] = params.clone();
    let rows = [
        [("a", a.clone()), ("a", a.clone()), ("a", a.clone()), ("a", a)],
        [("b", b.clone()), ("b", b.clone()), ("c", c), ("b", b)],
    ];
    let den = [e1, e2, e3, e4];
    let grouped = series.by_multidegree();
    let mut first_mismatch = None;
    for (deg, monos) in &grouped {
        let idx = MultiIndex4::from_array(*deg);
        let bare = bracket_coefficient(&rows, &den, idx)
            .ok_or_else(|| Error::pole(format!("K2 coefficient has a pole at {deg:?}")))?;
        let fact: Rational = deg.iter().map(|&k| rising(&int(1), k)).product();
        let want = target.clone().scaled(&(bare / fact));
        let ok = match monos.as_slice() {
            [] => want.coeff.is_zero(),
            [got] => got.same_powers(&want) && got.coeff == want.coeff,
            _ => false,
        };
        if !ok && first_mismatch.is_none() {
            first_mismatch = Some(*deg);
        }
    }
    let mut notes = Vec::new();
    if form == K2Form::TwoFactor {
        notes.push(
            "target monomial uses t4^(e3-1) for the e3 slot".to_string(),
        );
    }
    Ok(K2ImageReport {
        form: match form {
            K2Form::TwoFactor => "thm-3.7".into(),
            K2Form::OneFactor => "thm-3.8".into(),
        },
        order: n,
        multidegrees_checked: grouped.len(),
        matched: first_mismatch.is_none(),
        first_mismatch,
        notes,
    })
}

/// Exact K₂ Taylor coefficient Δ/(m! n! p! q!) for rational parameters.
pub fn k2_taylor_exact(params: &RationalParams, idx: MultiIndex4) -> Option<Rational> {
    let fact: Rational = idx.to_array().iter().map(|&k| rising(&int(1), k)).product();
    k2_coefficient_generic(params, idx).map(|c| c / fact)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mono(pairs: &[(Var, Rational)]) -> Monomial {
        Monomial::new(Rational::one(), pairs.iter().cloned())
    }

    #[test]
    fn parse_forms() {
        assert_eq!(parse_rational("1/3").unwrap(), rat(1, 3));
        assert_eq!(parse_rational("-2").unwrap(), int(-2));
        assert_eq!(parse_rational("0.25").unwrap(), rat(1, 4));
        assert_eq!(parse_rational("-1.5").unwrap(), rat(-3, 2));
        assert_eq!(parse_rational(" 6/4 ").unwrap(), rat(3, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("1.").is_err());
    }

    #[test]
    fn derive_examples() {
        let x = Var::X;
        let m = mono(&[(x, int(3))]);
        assert_eq!(apply_derive(x, 0, &m), m);
        let d2 = apply_derive(x, 2, &m);
        assert_eq!(d2.coeff, int(6));
        assert_eq!(d2.exponent(x), int(1));
        let d1 = apply_derive(x, 1, &mono(&[(x, rat(1, 2))]));
        assert_eq!(d1.coeff, rat(1, 2));
        assert_eq!(d1.exponent(x), rat(-1, 2));
    }

    #[test]
    fn integrate_examples() {
        let x = Var::X;
        let once = apply_integrate(x, 1, &Monomial::one()).unwrap();
        assert_eq!((once.coeff.clone(), once.exponent(x)), (int(1), int(1)));
        let twice = apply_integrate(x, 2, &Monomial::one()).unwrap();
        assert_eq!((twice.coeff.clone(), twice.exponent(x)), (rat(1, 2), int(2)));
        let half = apply_integrate(x, 1, &mono(&[(x, rat(1, 2))])).unwrap();
        assert_eq!((half.coeff.clone(), half.exponent(x)), (rat(2, 3), rat(3, 2)));
        assert!(matches!(apply_integrate(x, 2, &mono(&[(x, int(-2))])), Err(Error::Pole(_))));
    }

    #[test]
    fn shift_pair_example_and_composition() {
        let (t, u) = (Var::T(0), Var::U);
        let m = mono(&[(t, int(3)), (u, int(2))]);
        let got = apply_shift_pair(t, u, 2, &m).unwrap();
        assert_eq!(got.coeff, rat(1, 2));
        assert_eq!((got.exponent(t), got.exponent(u)), (int(1), int(4)));
        let composed = apply_derive(t, 2, &apply_integrate(u, 2, &m).unwrap());
        assert_eq!(got, composed);
        assert_eq!(apply_shift_pair(t, u, 0, &m).unwrap(), m);
    }

    #[test]
    fn single_application_is_ratio_of_exponents() {
        // x D_t1 t2^-1 D_t2^-1 t1 on t1^(λ-1) t2^(μ-1) gives λ/μ and keeps the powers
        let w = raising_word(Some(Indeterminate::X), Var::T(1), Var::T(2), true);
        let m = mono(&[(Var::T(1), rat(-2, 3)), (Var::T(2), rat(1, 2))]);
        let got = w.apply_once(&m).unwrap();
        assert!(got.same_powers(&m));
        assert_eq!(got.coeff, rat(1, 3) / rat(3, 2));
        assert_eq!(w.degree(), [1, 0, 0, 0]);
    }

    #[test]
    fn unorderable_words_are_rejected() {
        use OperatorAtom as A;
        let t = Var::T(1);
        assert!(OperatorWord::new(vec![A::d(t), A::mul(t, 1), A::d(t)]).is_err());
        assert!(OperatorWord::new(vec![A::d(t), A::d_inv(t)]).is_err());
        assert!(OperatorWord::new(vec![]).is_err());
    }

    #[test]
    fn zero_order_expansion_is_the_target() {
        let (expr, target) = k2_image(K2Form::OneFactor, &default_params());
        let s = expand_neg_power(&expr, &target, ExpansionPolicy { total_order: 0 }).unwrap();
        assert_eq!(s.entries.len(), 1);
        assert_eq!(s.entries.values().next().unwrap(), &target);
    }

    fn default_params() -> RationalParams {
        [rat(1, 3), rat(1, 5), rat(1, 7), rat(3, 2), rat(5, 2), rat(7, 2), rat(9, 2)]
    }

    #[test]
    fn gauss_forms_match_coefficients() {
        let r = verify_gauss_image(&rat(1, 2), &rat(2, 3), &rat(5, 4), 6).unwrap();
        assert!(r.matched(), "{r:?}");
        assert_eq!(r.via_u.worst_deviation, "0");
        let r0 = verify_gauss_image(&rat(1, 2), &rat(2, 3), &rat(5, 4), 0).unwrap();
        assert!(r0.matched());
        assert_eq!(r0.via_x.entries_checked, 1);
    }

    #[test]
    fn gauss_form_rejects_pole() {
        assert!(matches!(
            verify_gauss_image(&rat(1, 2), &rat(2, 3), &int(-2), 3),
            Err(Error::Pole(_))
        ));
    }

    #[test]
    fn k2_image_order_one_by_hand() {
        let p = default_params();
        let (expr, target) = k2_image(K2Form::TwoFactor, &p);
        let s = expand_neg_power(&expr, &target, ExpansionPolicy { total_order: 1 }).unwrap();
        let g = s.by_multidegree();
        let [a, b, c, e1, _, e3, _] = p.clone();
        assert_eq!(g[&[1, 0, 0, 0]][0].coeff, &a * &b / &e1);
        assert_eq!(g[&[0, 0, 1, 0]][0].coeff, &a * &c / &e3);
    }

    #[test]
    fn k2_forms_match_at_order_four() {
        for form in [K2Form::TwoFactor, K2Form::OneFactor] {
            let r = verify_k2_image(&default_params(), 4, form).unwrap();
            assert!(r.matched, "{r:?}");
            assert_eq!(r.multidegrees_checked, 70);
        }
    }

    #[test]
    fn wrong_target_is_caught() {
        // drop the t1 exponent shift: coefficients no longer carry (a)_N
        let p = default_params();
        let (expr, mut target) = k2_image(K2Form::TwoFactor, &p);
        target.set_exponent(Var::T(1), rat(7, 5));
        let s = expand_neg_power(&expr, &target, ExpansionPolicy { total_order: 2 }).unwrap();
        let coeff = &s.by_multidegree()[&[1, 0, 0, 0]][0].coeff;
        assert_ne!(coeff, &(&p[0] * &p[1] / &p[3]));
    }
}
