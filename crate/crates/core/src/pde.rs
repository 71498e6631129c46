//! The K₂ partial differential system and its sixteen Frobenius-type
//! solutions x^α y^β z^γ t^δ · K₂(shifted parameters).

use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{
    k2_eval, k2_mixed_partial, taylor_coefficient, CoefficientRule, K2Params, K2Rule, MultiIndex4,
    Point4, SeriesValue, TruncationPolicy,
};

/// Smallest-to-largest singular value ratio below which the solution matrix
/// is declared rank deficient.
pub const RANK_TOL: f64 = 1e-8;

/// Number of Frobenius-type solutions.
pub const SOLUTION_COUNT: usize = 16;

/// Which of the four slots take the nonzero indicial root 1 - e_i, in table
/// order (solution 1 first).
pub const SOLUTION_PATTERNS: [[bool; 4]; SOLUTION_COUNT] = {
    const O: bool = false;
    const I: bool = true;
    [
        [O, O, O, O],
        [I, O, O, O],
        [O, I, O, O],
        [O, O, I, O],
        [O, O, O, I],
        [I, I, O, O],
        [I, O, I, O],
        [I, O, O, I],
        [O, I, I, O],
        [O, I, O, I],
        [O, O, I, I],
        [I, I, I, O],
        [I, I, O, I],
        [I, O, I, I],
        [O, I, I, I],
        [I, I, I, I],
    ]
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlotRoots {
    pub roots: [f64; 2],
    /// Both roots coincide (e_i = 1).
    pub degenerate: bool,
}

/// Roots {0, 1 - e_i} of α(α - 1 + e_i) = 0 for each slot.
pub fn indicial_roots(params: &K2Params) -> [SlotRoots; 4] {
    params.e.map(|e| {
        let r = 1.0 - e;
        SlotRoots { roots: [0.0, r], degenerate: r == 0.0 }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentQuadruple {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
}

impl ExponentQuadruple {
    pub fn to_array(self) -> [f64; 4] {
        [self.alpha, self.beta, self.gamma, self.delta]
    }

    pub fn from_array(v: [f64; 4]) -> Self {
        ExponentQuadruple { alpha: v[0], beta: v[1], gamma: v[2], delta: v[3] }
    }

    /// Largest |ρ(ρ - 1 + e_i)| over the four slots.
    pub fn indicial_defect(&self, params: &K2Params) -> f64 {
        self.to_array()
            .iter()
            .zip(params.e)
            .map(|(&r, e)| (r * (r - 1.0 + e)).abs())
            .fold(0.0, f64::max)
    }
}

/// Exponents of one table column over any scalar type.
pub fn pattern_exponents<T>(pattern: [bool; 4], e: &[T; 4]) -> [T; 4]
where
    T: Clone + Zero + One + Sub<Output = T>,
{
    std::array::from_fn(|i| if pattern[i] { T::one() - e[i].clone() } else { T::zero() })
}

pub fn exponent_table(params: &K2Params) -> [ExponentQuadruple; SOLUTION_COUNT] {
    SOLUTION_PATTERNS.map(|pat| ExponentQuadruple::from_array(pattern_exponents(pat, &params.e)))
}

/// `(A, B, C; E1..E4)` of the transformed system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransformedParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub e: [f64; 4],
}

impl TransformedParams {
    pub fn as_k2(&self) -> K2Params {
        K2Params { a: self.a, b: self.b, c: self.c, e: self.e }
    }
}

/// A = α+β+γ+δ+a, B = α+β+δ+b, C = γ+c, E_i = 2ρ_i + e_i, generic over the
/// scalar so the same formulas can be checked in exact arithmetic.
/// `base` is `[a, b, c, e1, e2, e3, e4]`.
pub fn shift_parameters<T>(exps: &[T; 4], base: &[T; 7]) -> [T; 7]
where
    T: Clone + Add<Output = T> + Mul<Output = T> + One,
{
    let [al, be, ga, de] = exps.clone();
    let two = T::one() + T::one();
    let [a, b, c, e1, e2, e3, e4] = base.clone();
    [
        al.clone() + be.clone() + ga.clone() + de.clone() + a,
        al.clone() + be.clone() + de.clone() + b,
        ga.clone() + c,
        two.clone() * al + e1,
        two.clone() * be + e2,
        two.clone() * ga + e3,
        two * de + e4,
    ]
}

pub fn transformed_params(exp: &ExponentQuadruple, params: &K2Params) -> TransformedParams {
    let s = shift_parameters(&exp.to_array(), &params.to_array());
    TransformedParams { a: s[0], b: s[1], c: s[2], e: [s[3], s[4], s[5], s[6]] }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolutionSpec {
    pub index: usize,
    pub exponents: ExponentQuadruple,
    pub shifted: K2Params,
}

fn check_index(j: usize) -> Result<()> {
    if (1..=SOLUTION_COUNT).contains(&j) {
        Ok(())
    } else {
        Err(Error::invalid(format!("solution index {j} outside 1..=16")))
    }
}

pub fn solution_spec(j: usize, params: &K2Params) -> Result<SolutionSpec> {
    check_index(j)?;
    let exponents = exponent_table(params)[j - 1];
    let shifted = transformed_params(&exponents, params).as_k2();
    Ok(SolutionSpec { index: j, exponents, shifted })
}

pub fn solution_specs(params: &K2Params) -> Vec<SolutionSpec> {
    (1..=SOLUTION_COUNT).map(|j| solution_spec(j, params).expect("index in range")).collect()
}

/// Real power with the conventions of the solution prefactors: a zero
/// exponent gives 1 everywhere, fractional powers need a positive base.
fn prefactor_power(coord: f64, exponent: f64, name: &str) -> Result<f64> {
    if exponent == 0.0 {
        Ok(1.0)
    } else if coord > 0.0 {
        Ok(coord.powf(exponent))
    } else if exponent.fract() == 0.0 && coord != 0.0 {
        Ok(coord.powi(exponent as i32))
    } else {
        Err(Error::domain(format!(
            "{name} = {coord} is not admissible for the prefactor power {exponent}"
        )))
    }
}

const COORD_NAMES: [&str; 4] = ["x", "y", "z", "t"];

fn prefactor(exps: &ExponentQuadruple, point: Point4) -> Result<f64> {
    let mut acc = 1.0;
    for ((c, e), name) in point.coords().into_iter().zip(exps.to_array()).zip(COORD_NAMES) {
        acc *= prefactor_power(c, e, name)?;
    }
    Ok(acc)
}

/// Value of the j-th solution, 1-based.
pub fn solution_value(
    j: usize,
    params: &K2Params,
    point: Point4,
    policy: &TruncationPolicy,
) -> Result<SeriesValue> {
    let spec = solution_spec(j, params)?;
    let pre = prefactor(&spec.exponents, point)?;
    Ok(k2_eval(&spec.shifted, point, policy)?.scaled(pre))
}

/// Value, gradient and Hessian of a function at one point.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SecondOrderJet {
    pub value: f64,
    pub grad: [f64; 4],
    pub hess: [[f64; 4]; 4],
}

impl SecondOrderJet {
    fn scaled_add(&mut self, k: f64, other: &SecondOrderJet) {
        self.value += k * other.value;
        for i in 0..4 {
            self.grad[i] += k * other.grad[i];
            for j in 0..4 {
                self.hess[i][j] += k * other.hess[i][j];
            }
        }
    }
}

fn unit(i: usize) -> [u32; 4] {
    let mut o = [0; 4];
    o[i] = 1;
    o
}

fn pair(i: usize, j: usize) -> [u32; 4] {
    let mut o = [0; 4];
    o[i] += 1;
    o[j] += 1;
    o
}

/// Anything that can supply mixed partials up to order two.
pub trait PartialProvider {
    fn partial(&self, point: Point4, orders: MultiIndex4) -> Result<f64>;

    fn jet(&self, point: Point4) -> Result<SecondOrderJet> {
        let mut jet = SecondOrderJet { value: self.partial(point, MultiIndex4::default())?, ..Default::default() };
        for i in 0..4 {
            jet.grad[i] = self.partial(point, MultiIndex4::from_array(unit(i)))?;
            for j in i..4 {
                let v = self.partial(point, MultiIndex4::from_array(pair(i, j)))?;
                jet.hess[i][j] = v;
                jet.hess[j][i] = v;
            }
        }
        Ok(jet)
    }
}

/// K₂ itself, differentiated by parameter shift.
#[derive(Debug, Clone, Copy)]
pub struct K2Function {
    pub params: K2Params,
    pub policy: TruncationPolicy,
}

impl PartialProvider for K2Function {
    fn partial(&self, point: Point4, orders: MultiIndex4) -> Result<f64> {
        Ok(k2_mixed_partial(&self.params, point, orders, &self.policy)?.value)
    }
}

/// The constant function; used to probe the residual assembly.
#[derive(Debug, Clone, Copy)]
pub struct ConstantFunction(pub f64);

impl PartialProvider for ConstantFunction {
    fn partial(&self, _point: Point4, orders: MultiIndex4) -> Result<f64> {
        Ok(if orders.total() == 0 { self.0 } else { 0.0 })
    }
}

/// The j-th solution; partials by the Leibniz rule with the power prefactor
/// differentiated analytically.
#[derive(Debug, Clone, Copy)]
pub struct SolutionFunction {
    pub spec: SolutionSpec,
    pub policy: TruncationPolicy,
}

impl SolutionFunction {
    pub fn new(j: usize, params: &K2Params, policy: TruncationPolicy) -> Result<Self> {
        Ok(SolutionFunction { spec: solution_spec(j, params)?, policy })
    }

    /// ∂_i P / P and ∂_i² P / P for the prefactor P.
    fn log_derivatives(&self, point: Point4) -> ([f64; 4], [f64; 4]) {
        let c = point.coords();
        let r = self.spec.exponents.to_array();
        let d1 = std::array::from_fn(|i| if r[i] == 0.0 { 0.0 } else { r[i] / c[i] });
        let d2 = std::array::from_fn(|i| {
            if r[i] == 0.0 {
                0.0
            } else {
                r[i] * (r[i] - 1.0) / (c[i] * c[i])
            }
        });
        (d1, d2)
    }
}

impl PartialProvider for SolutionFunction {
    fn partial(&self, point: Point4, orders: MultiIndex4) -> Result<f64> {
        if orders.total() > 2 {
            return Err(Error::invalid("solution partials are available up to order 2"));
        }
        let jet = self.jet(point)?;
        let o = orders.to_array();
        let nz: Vec<usize> = (0..4).flat_map(|i| std::iter::repeat_n(i, o[i] as usize)).collect();
        Ok(match nz.as_slice() {
            [] => jet.value,
            [i] => jet.grad[*i],
            [i, j] => jet.hess[*i][*j],
            _ => unreachable!(),
        })
    }

    fn jet(&self, point: Point4) -> Result<SecondOrderJet> {
        let pre = prefactor(&self.spec.exponents, point)?;
        let w = K2Function { params: self.spec.shifted, policy: self.policy }.jet(point)?;
        let (d1, d2) = self.log_derivatives(point);
        let mut u = SecondOrderJet { value: pre * w.value, ..Default::default() };
        for i in 0..4 {
            u.grad[i] = pre * (d1[i] * w.value + w.grad[i]);
            for j in 0..4 {
                u.hess[i][j] = if i == j {
                    pre * (d2[i] * w.value + 2.0 * d1[i] * w.grad[i] + w.hess[i][i])
                } else {
                    pre * (d1[i] * d1[j] * w.value + d1[i] * w.grad[j] + d1[j] * w.grad[i] + w.hess[i][j])
                };
            }
        }
        Ok(u)
    }
}

/// Σ k_j u_j as a differentiable function.
pub struct LinearCombination<'a> {
    pub terms: Vec<(f64, &'a dyn PartialProvider)>,
}

impl PartialProvider for LinearCombination<'_> {
    fn partial(&self, point: Point4, orders: MultiIndex4) -> Result<f64> {
        self.terms
            .iter()
            .map(|(k, f)| Ok(k * f.partial(point, orders)?))
            .sum()
    }

    fn jet(&self, point: Point4) -> Result<SecondOrderJet> {
        let mut acc = SecondOrderJet::default();
        for (k, f) in &self.terms {
            acc.scaled_add(*k, &f.jet(point)?);
        }
        Ok(acc)
    }
}

fn check_equation(eq: usize) -> Result<()> {
    if (1..=4).contains(&eq) {
        Ok(())
    } else {
        Err(Error::invalid(format!("equation index {eq} outside 1..=4")))
    }
}

/// Left-hand side of the eq-th second-order equation, assembled from a jet.
pub fn residual_from_jet(eq: usize, u: &SecondOrderJet, params: &K2Params, point: Point4) -> Result<f64> {
    check_equation(eq)?;
    let K2Params { a, b, c, e } = *params;
    let [x, y, z, t] = point.coords();
    let h = &u.hess;
    let g = &u.grad;
    let (xx, yy, zz, tt) = (h[0][0], h[1][1], h[2][2], h[3][3]);
    let (xy, xz, xt, yz, yt, zt) = (h[0][1], h[0][2], h[0][3], h[1][2], h[1][3], h[2][3]);
    let (ux, uy, uz, ut) = (g[0], g[1], g[2], g[3]);
    let s = a + b + 1.0;
    // mixed terms shared by equations 1, 2 and 4
    let coupled = -2.0 * x * y * xy - x * z * xz - 2.0 * x * t * xt - y * z * yz - 2.0 * y * t * yt - z * t * zt;
    let r = match eq {
        1 => {
            x * (1.0 - x) * xx - y * y * yy - t * t * tt + coupled + (e[0] - s * x) * ux
                - s * y * uy
                - b * z * uz
                - s * t * ut
                - a * b * u.value
        }
        2 => {
            y * (1.0 - y) * yy - x * x * xx - t * t * tt + coupled - s * x * ux + (e[1] - s * y) * uy
                - b * z * uz
                - s * t * ut
                - a * b * u.value
        }
        3 => {
            z * (1.0 - z) * zz - x * z * xz - y * z * yz - z * t * zt - c * x * ux - c * y * uy
                + (e[2] - (a + c + 1.0) * z) * uz
                - c * t * ut
                - a * c * u.value
        }
        _ => {
            t * (1.0 - t) * tt - x * x * xx - y * y * yy + coupled - s * x * ux - s * y * uy - b * z * uz
                + (e[3] - s * t) * ut
                - a * b * u.value
        }
    };
    Ok(r)
}

pub fn pde_residual_2nd(eq: usize, f: &dyn PartialProvider, params: &K2Params, point: Point4) -> Result<f64> {
    check_equation(eq)?;
    residual_from_jet(eq, &f.jet(point)?, params, point)
}

/// All four residuals from one jet evaluation.
pub fn pde_residuals(f: &dyn PartialProvider, params: &K2Params, point: Point4) -> Result<[f64; 4]> {
    let jet = f.jet(point)?;
    let mut out = [0.0; 4];
    for (eq, slot) in out.iter_mut().enumerate() {
        *slot = residual_from_jet(eq + 1, &jet, params, point)?;
    }
    Ok(out)
}

fn relative_gap(lhs: f64, rhs: f64) -> f64 {
    let scale = lhs.abs().max(rhs.abs());
    if scale == 0.0 {
        0.0
    } else {
        (lhs - rhs).abs() / scale
    }
}

/// Worst relative violation of the coefficient recurrence implied by the
/// eq-th Euler-operator equation, over all indices of total degree ≤ bound.
///
/// With Taylor coefficients c(m,n,p,q) = Δ/(m! n! p! q!), equation 1 reads
/// (e1+m)(m+1) c(m+1,n,p,q) = (a+m+n+p+q)(b+m+n+q) c(m,n,p,q); the others
/// step n, p (with c+p in place of b+m+n+q) and q.
pub fn recurrence_violation(
    eq: usize,
    params: &K2Params,
    rule: &impl CoefficientRule,
    bound: u32,
) -> Result<f64> {
    check_equation(eq)?;
    let K2Params { a, b, c, e } = *params;
    let slot = eq - 1;
    let mut worst = 0.0f64;
    for d in 0..=bound {
        crate::series::for_each_composition::<4>(d, &mut |idx| {
            let here = MultiIndex4::from_array(*idx);
            let mut next = *idx;
            next[slot] += 1;
            let next = MultiIndex4::from_array(next);
            let k = idx[slot] as f64;
            let total = here.total() as f64;
            let second = if eq == 3 {
                c + here.p as f64
            } else {
                b + (here.m + here.n + here.q) as f64
            };
            let lhs = (e[slot] + k) * (k + 1.0) * taylor_coefficient(rule, next)?;
            let rhs = (a + total) * second * taylor_coefficient(rule, here)?;
            worst = worst.max(relative_gap(lhs, rhs));
            Ok(())
        })?;
    }
    Ok(worst)
}

pub fn coefficient_recurrence_check(eq: usize, params: &K2Params, bound: u32) -> Result<f64> {
    recurrence_violation(eq, params, &K2Rule::new(*params, bound + 1), bound)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalSolutionCoeffs {
    pub k: [f64; SOLUTION_COUNT],
}

impl GlobalSolutionCoeffs {
    pub fn new(k: [f64; SOLUTION_COUNT]) -> Result<Self> {
        if k.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("global solution coefficients must be finite"));
        }
        Ok(GlobalSolutionCoeffs { k })
    }
}

/// Σ k_j u_j at a point; solutions with k_j = 0 are skipped.
pub fn global_solution(
    coeffs: &GlobalSolutionCoeffs,
    params: &K2Params,
    point: Point4,
    policy: &TruncationPolicy,
) -> Result<f64> {
    let mut acc = crate::series::CompensatedSum::new();
    for (j, &k) in coeffs.k.iter().enumerate() {
        if k != 0.0 {
            acc.add(k * solution_value(j + 1, params, point, policy)?.value);
        }
    }
    Ok(acc.value())
}

fn near_integer(v: f64) -> bool {
    (v - v.round()).abs() <= 1e-12 * v.abs().max(1.0)
}

/// Warnings about parameter choices that make solutions coincide.
pub fn genericity_warnings(params: &K2Params) -> Vec<String> {
    let mut out = Vec::new();
    for (i, e) in params.e.iter().enumerate() {
        if near_integer(*e) {
            out.push(format!(
                "e{} = {e} is an integer; solutions sharing slot {} may coincide or be singular",
                i + 1,
                i + 1
            ));
        }
    }
    for i in 0..4 {
        for j in i + 1..4 {
            let d = params.e[i] - params.e[j];
            if near_integer(d) {
                out.push(format!("e{} - e{} = {} is an integer", i + 1, j + 1, d.round()));
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndependenceDiagnostic {
    pub singular_values: Vec<f64>,
    pub smallest: f64,
    pub largest: f64,
    pub ratio: f64,
    pub full_rank: bool,
    pub rank_tol: f64,
    pub warnings: Vec<String>,
}

/// Matrix V[i][j] = u_j(points[i]).
pub fn solution_matrix(params: &K2Params, points: &[Point4], policy: &TruncationPolicy) -> Result<DMatrix<f64>> {
    let mut v = DMatrix::zeros(points.len(), SOLUTION_COUNT);
    for (i, pt) in points.iter().enumerate() {
        if pt.coords().iter().any(|&c| c <= 0.0) {
            return Err(Error::domain(format!("sample point {pt:?} must have positive coordinates")));
        }
        for j in 0..SOLUTION_COUNT {
            v[(i, j)] = solution_value(j + 1, params, *pt, policy)?.value;
        }
    }
    Ok(v)
}

/// Numerical rank test of the sixteen solutions on sixteen sample points,
/// using singular values of the column-equilibrated solution matrix.
pub fn independence_check(
    params: &K2Params,
    points: &[Point4],
    policy: &TruncationPolicy,
) -> Result<IndependenceDiagnostic> {
    if points.len() != SOLUTION_COUNT {
        return Err(Error::invalid(format!("need {SOLUTION_COUNT} sample points, got {}", points.len())));
    }
    let mut v = solution_matrix(params, points, policy)?;
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::domain("solution matrix has non-finite entries"));
    }
    // Each solution is only defined up to a constant factor: equilibrate the
    // columns so the diagnostic does not depend on that normalisation.
    for mut col in v.column_iter_mut() {
        let n = col.norm();
        if n > 0.0 {
            col /= n;
        }
    }
    let mut sv: Vec<f64> = v.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    let largest = sv[0];
    let smallest = *sv.last().unwrap();
    let ratio = if largest > 0.0 { smallest / largest } else { 0.0 };
    Ok(IndependenceDiagnostic {
        singular_values: sv,
        smallest,
        largest,
        ratio,
        full_rank: ratio > RANK_TOL,
        rank_tol: RANK_TOL,
        warnings: genericity_warnings(params),
    })
}

/// Seeded uniform samples in [lo, hi]⁴.
pub fn sample_points(seed: u64, count: usize, lo: f64, hi: f64) -> Vec<Point4> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| Point4::from_coords(std::array::from_fn(|_| rng.gen_range(lo..=hi))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn generic() -> K2Params {
        K2Params::new(0.3, 0.5, 0.7, [0.6, 1.3, 1.7, 1.9]).unwrap()
    }

    #[test]
    fn roots_per_slot() {
        let p = K2Params::new(0.1, 0.2, 0.3, [0.7, 1.3, 0.4, 1.6]).unwrap();
        let r = indicial_roots(&p);
        let expect = [0.3, -0.3, 0.6, -0.6];
        for i in 0..4 {
            assert_eq!(r[i].roots[0], 0.0);
            assert!((r[i].roots[1] - expect[i]).abs() < 1e-15);
            assert!(!r[i].degenerate);
        }
        let p = K2Params::new(0.1, 0.2, 0.3, [1.0, 1.3, 0.4, 1.6]).unwrap();
        assert!(indicial_roots(&p)[0].degenerate);
        assert_eq!(indicial_roots(&p)[0].roots, [0.0, 0.0]);
    }

    #[test]
    fn table_columns() {
        let p = generic();
        let t = exponent_table(&p);
        assert_eq!(t[0].to_array(), [0.0; 4]);
        assert_eq!(t[6].to_array(), [1.0 - p.e[0], 0.0, 1.0 - p.e[2], 0.0]);
        assert_eq!(t[15].to_array(), p.e.map(|e| 1.0 - e));
        for q in t {
            assert_eq!(q.indicial_defect(&p), 0.0);
        }
    }

    #[test]
    fn patterns_are_distinct_subsets() {
        let mut seen = std::collections::BTreeSet::new();
        for p in SOLUTION_PATTERNS {
            assert!(seen.insert(p));
        }
        assert_eq!(seen.len(), 16);
    }

    #[test]
    fn transformed_examples() {
        let p = generic();
        let id = transformed_params(&exponent_table(&p)[0], &p);
        assert_eq!(id.as_k2(), p);
        let t2 = transformed_params(&exponent_table(&p)[1], &p);
        assert_eq!(t2.a, 1.0 - p.e[0] + p.a);
        assert_eq!(t2.b, 1.0 - p.e[0] + p.b);
        assert_eq!(t2.c, p.c);
        assert_eq!(t2.e, [2.0 * (1.0 - p.e[0]) + p.e[0], p.e[1], p.e[2], p.e[3]]);
    }

    #[test]
    fn solution_one_is_k2() {
        let p = generic();
        let pt = Point4::new(0.04, 0.03, 0.02, 0.01).unwrap();
        let pol = TruncationPolicy::with_degree(24);
        assert_eq!(
            solution_value(1, &p, pt, &pol).unwrap().value,
            k2_eval(&p, pt, &pol).unwrap().value
        );
    }

    #[test]
    fn degenerate_slot_collapses_to_first_solution() {
        let p = K2Params::new(0.3, 0.5, 0.7, [0.6, 1.3, 1.0, 1.9]).unwrap();
        let pt = Point4::new(0.04, 0.03, 0.02, 0.01).unwrap();
        let pol = TruncationPolicy::with_degree(24);
        assert_eq!(
            solution_value(4, &p, pt, &pol).unwrap().value,
            solution_value(1, &p, pt, &pol).unwrap().value
        );
    }

    #[test]
    fn fractional_power_needs_positive_coordinate() {
        let p = generic();
        let pt = Point4::new(-0.01, 0.03, 0.02, 0.01).unwrap();
        let err = solution_value(2, &p, pt, &TruncationPolicy::default()).unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
        // u1 has no prefactor, so negative x is fine
        assert!(solution_value(1, &p, pt, &TruncationPolicy::default()).is_ok());
        assert!(solution_value(17, &p, pt, &TruncationPolicy::default()).is_err());
    }

    #[test]
    fn constant_probe_leaves_only_the_zero_order_term() {
        let p = generic();
        let pt = Point4::new(0.02, 0.03, 0.04, 0.05).unwrap();
        let one = ConstantFunction(1.0);
        assert_eq!(pde_residual_2nd(1, &one, &p, pt).unwrap(), -p.a * p.b);
        assert_eq!(pde_residual_2nd(3, &one, &p, pt).unwrap(), -p.a * p.c);
        assert!(pde_residual_2nd(5, &one, &p, pt).is_err());
    }

    #[test]
    fn k2_satisfies_the_system() {
        let p = generic();
        let pt = Point4::new(0.03, 0.02, 0.04, 0.01).unwrap();
        let f = K2Function { params: p, policy: TruncationPolicy::with_degree(24) };
        for r in pde_residuals(&f, &p, pt).unwrap() {
            assert!(r.abs() <= 1e-8, "residual {r}");
        }
    }

    #[test]
    fn recurrences_hold_for_exact_coefficients() {
        let p = generic();
        for eq in 1..=4 {
            assert!(coefficient_recurrence_check(eq, &p, 8).unwrap() <= 1e-14);
        }
    }

    #[test]
    fn injected_coefficient_fault_is_detected() {
        let p = generic();
        let exact = K2Rule::new(p, 10);
        let faulty = |idx: MultiIndex4| -> Result<f64> {
            let v = exact.coefficient(idx)?;
            Ok(if idx == MultiIndex4::new(1, 1, 0, 0) { v + 1e-3 } else { v })
        };
        let worst = recurrence_violation(1, &p, &faulty, 8).unwrap();
        assert!(worst >= 1e-4, "{worst}");
    }

    #[test]
    fn global_solution_unit_and_zero() {
        let p = generic();
        let pt = Point4::new(0.04, 0.03, 0.02, 0.01).unwrap();
        let pol = TruncationPolicy::with_degree(20);
        let mut k = [0.0; 16];
        assert_eq!(global_solution(&GlobalSolutionCoeffs::new(k).unwrap(), &p, pt, &pol).unwrap(), 0.0);
        k[0] = 1.0;
        assert_eq!(
            global_solution(&GlobalSolutionCoeffs::new(k).unwrap(), &p, pt, &pol).unwrap(),
            solution_value(1, &p, pt, &pol).unwrap().value
        );
    }

    #[test]
    fn duplicated_rows_are_rank_deficient() {
        let p = K2Params::new(0.37, 0.52, 0.71, [0.3, 0.45, 0.6, 0.75]).unwrap();
        let mut pts = sample_points(3, 16, 0.01, 0.05);
        pts[5] = pts[2];
        let d = independence_check(&p, &pts, &TruncationPolicy::with_degree(20)).unwrap();
        assert!(!d.full_rank);
    }

    #[test]
    fn sampling_is_reproducible() {
        assert_eq!(sample_points(42, 5, 0.01, 0.05), sample_points(42, 5, 0.01, 0.05));
        for p in sample_points(42, 50, 0.01, 0.05) {
            assert!(p.coords().iter().all(|&c| (0.01..=0.05).contains(&c)));
        }
    }

    #[test]
    fn integer_parameters_raise_warnings() {
        let p = K2Params::new(0.3, 0.5, 0.7, [1.0, 1.3, 1.7, 2.3]).unwrap();
        let w = genericity_warnings(&p);
        assert_eq!(w.len(), 2, "{w:?}");
        assert!(genericity_warnings(&generic()).is_empty());
    }
}
