//! Sparse multivariate polynomials with complex coefficients.
//!
//! Three families share one sparse engine ([`SparsePoly`]):
//!
//! * [`BiPolynomial`]: polynomials in `(z, z̄)` over `ℂ^d`, stored over the
//!   `2d` formal variables `z_1..z_d, z̄_1..z̄_d`.
//! * [`RealPolynomial`]: polynomials in real coordinates `x_1..x_D`.
//! * [`UniPolynomial`]: dense univariate polynomials, used for the
//!   annihilating polynomials of the recovery loop.
//!
//! Every polynomial doubles as a constant-coefficient differential operator
//! by reading `x^γ` as `∂^γ` (see [`SparsePoly::apply_diff`]).
//!
//! Terms are kept in graded lexicographic order, which fixes matrix indexing
//! and text rendering.

mod bi;
mod real;
mod uni;

pub use bi::BiPolynomial;
pub use real::RealPolynomial;
pub use uni::UniPolynomial;

use num_complex::Complex64;
use std::cmp::Ordering;
use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;

/// Exponent vector `γ ∈ ℤ₊^n`.
///
/// Ordered graded-lexicographically: first by total order `|γ|`, then with
/// larger exponents in earlier variables first, so that
/// `1 < x1 < x2 < x1² < x1x2 < x2²`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        MultiIndex(exponents)
    }

    pub fn zeros(len: usize) -> Self {
        MultiIndex(vec![0; len])
    }

    pub fn unit(len: usize, i: usize, power: u32) -> Self {
        let mut e = vec![0; len];
        e[i] = power;
        MultiIndex(e)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    /// Total order `|γ|`.
    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        debug_assert_eq!(self.len(), other.len());
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `self − other`, if componentwise nonnegative.
    pub fn checked_sub(&self, other: &MultiIndex) -> Option<MultiIndex> {
        debug_assert_eq!(self.len(), other.len());
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.checked_sub(*b))
            .collect::<Option<Vec<_>>>()
            .map(MultiIndex)
    }

    /// `γ! = Π γ_i!` as a float.
    pub fn factorial(&self) -> f64 {
        self.0.iter().map(|&e| factorial(e)).product()
    }

    /// Concatenation `(self, other)`.
    pub fn concat(&self, other: &MultiIndex) -> MultiIndex {
        let mut e = self.0.clone();
        e.extend_from_slice(&other.0);
        MultiIndex(e)
    }

    /// Splits into `(first n, rest)`.
    pub fn split(&self, n: usize) -> (MultiIndex, MultiIndex) {
        (
            MultiIndex(self.0[..n].to_vec()),
            MultiIndex(self.0[n..].to_vec()),
        )
    }

    /// All multi-indices of length `len` with `|γ| = degree`, in graded-lex order.
    pub fn homogeneous(len: usize, degree: u32) -> Vec<MultiIndex> {
        fn rec(len: usize, remaining: u32, prefix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
            if prefix.len() + 1 == len {
                prefix.push(remaining);
                out.push(MultiIndex(prefix.clone()));
                prefix.pop();
                return;
            }
            for e in (0..=remaining).rev() {
                prefix.push(e);
                rec(len, remaining - e, prefix, out);
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        if len == 0 {
            if degree == 0 {
                out.push(MultiIndex(Vec::new()));
            }
            return out;
        }
        rec(len, degree, &mut Vec::with_capacity(len), &mut out);
        out
    }

    /// All multi-indices of length `len` with `|γ| ≤ max_degree`, in graded-lex order.
    pub fn up_to_degree(len: usize, max_degree: u32) -> Vec<MultiIndex> {
        (0..=max_degree)
            .flat_map(|k| MultiIndex::homogeneous(len, k))
            .collect()
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.order()
            .cmp(&other.order())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl From<Vec<u32>> for MultiIndex {
    fn from(v: Vec<u32>) -> Self {
        MultiIndex(v)
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

pub(crate) fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// `n (n−1) … (n−k+1)`.
pub(crate) fn falling_factorial(n: u32, k: u32) -> f64 {
    debug_assert!(k <= n);
    ((n - k + 1)..=n).map(f64::from).product()
}

/// Sparse polynomial over `nvars` formal variables.
///
/// Invariant: no stored zero coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct SparsePoly {
    nvars: usize,
    terms: BTreeMap<MultiIndex, Complex64>,
}

impl SparsePoly {
    pub fn zero(nvars: usize) -> Self {
        SparsePoly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: Complex64) -> Self {
        let mut p = SparsePoly::zero(nvars);
        p.add_term(MultiIndex::zeros(nvars), c);
        p
    }

    pub fn one(nvars: usize) -> Self {
        SparsePoly::constant(nvars, Complex64::new(1.0, 0.0))
    }

    pub fn monomial(exponents: MultiIndex, c: Complex64) -> Self {
        let mut p = SparsePoly::zero(exponents.len());
        p.add_term(exponents, c);
        p
    }

    pub fn variable(nvars: usize, i: usize) -> Self {
        SparsePoly::monomial(MultiIndex::unit(nvars, i, 1), Complex64::new(1.0, 0.0))
    }

    /// Builds from `(exponents, coefficient)` pairs, merging duplicates.
    pub fn from_terms<I>(nvars: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (MultiIndex, Complex64)>,
    {
        let mut p = SparsePoly::zero(nvars);
        for (k, c) in terms {
            assert_eq!(k.len(), nvars, "exponent length must equal variable count");
            p.add_term(k, c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in graded-lex order.
    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Complex64)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, key: &MultiIndex) -> Complex64 {
        self.terms.get(key).copied().unwrap_or_default()
    }

    pub fn constant_term(&self) -> Complex64 {
        self.coefficient(&MultiIndex::zeros(self.nvars))
    }

    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(MultiIndex::order).max()
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Euclidean norm of the coefficient vector.
    pub fn coefficient_norm(&self) -> f64 {
        self.terms.values().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn add_term(&mut self, key: MultiIndex, c: Complex64) {
        debug_assert_eq!(key.len(), self.nvars);
        if c == Complex64::default() {
            return;
        }
        match self.terms.entry(key) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if *o.get() == Complex64::default() {
                    o.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &SparsePoly) -> SparsePoly {
        debug_assert_eq!(self.nvars, other.nvars);
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_term(k.clone(), *c);
        }
        out
    }

    pub fn sub(&self, other: &SparsePoly) -> SparsePoly {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, s: Complex64) -> SparsePoly {
        if s == Complex64::default() {
            return SparsePoly::zero(self.nvars);
        }
        SparsePoly::from_terms(self.nvars, self.terms.iter().map(|(k, c)| (k.clone(), c * s)))
    }

    pub fn mul(&self, other: &SparsePoly) -> SparsePoly {
        debug_assert_eq!(self.nvars, other.nvars);
        let mut acc: BTreeMap<MultiIndex, Complex64> = BTreeMap::new();
        for (ka, ca) in &self.terms {
            for (kb, cb) in &other.terms {
                *acc.entry(ka.add(kb)).or_default() += ca * cb;
            }
        }
        SparsePoly::from_terms(self.nvars, acc)
    }

    pub fn pow(&self, e: u32) -> SparsePoly {
        let mut out = SparsePoly::one(self.nvars);
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    /// Conjugates every coefficient.
    pub fn conj_coefficients(&self) -> SparsePoly {
        SparsePoly::from_terms(self.nvars, self.terms.iter().map(|(k, c)| (k.clone(), c.conj())))
    }

    /// `∂^γ p`, exact.
    pub fn derivative(&self, gamma: &MultiIndex) -> SparsePoly {
        debug_assert_eq!(gamma.len(), self.nvars);
        let mut out = SparsePoly::zero(self.nvars);
        for (k, c) in &self.terms {
            if let Some(rest) = k.checked_sub(gamma) {
                let f: f64 = k
                    .exponents()
                    .iter()
                    .zip(gamma.exponents())
                    .map(|(&n, &g)| falling_factorial(n, g))
                    .product();
                out.add_term(rest, c * f);
            }
        }
        out
    }

    /// Reads `self` as a constant-coefficient differential operator
    /// (`x^γ ↦ ∂^γ`) and applies it to `target`.
    pub fn apply_diff(&self, target: &SparsePoly) -> SparsePoly {
        debug_assert_eq!(self.nvars, target.nvars);
        let mut out = SparsePoly::zero(self.nvars);
        for (gamma, c) in &self.terms {
            for (k, t) in &target.terms {
                if let Some(rest) = k.checked_sub(gamma) {
                    let f: f64 = k
                        .exponents()
                        .iter()
                        .zip(gamma.exponents())
                        .map(|(&n, &g)| falling_factorial(n, g))
                        .product();
                    out.add_term(rest, c * t * f);
                }
            }
        }
        out
    }

    /// Evaluates at a point given per-variable values.
    pub fn eval(&self, values: &[Complex64]) -> Complex64 {
        debug_assert_eq!(values.len(), self.nvars);
        let max_exp = self
            .terms
            .keys()
            .flat_map(|k| k.exponents().iter().copied())
            .max()
            .unwrap_or(0) as usize;
        let powers: Vec<Vec<Complex64>> = values
            .iter()
            .map(|&v| {
                let mut p = Vec::with_capacity(max_exp + 1);
                let mut acc = Complex64::new(1.0, 0.0);
                for _ in 0..=max_exp {
                    p.push(acc);
                    acc *= v;
                }
                p
            })
            .collect();
        self.terms
            .iter()
            .map(|(k, c)| {
                k.exponents()
                    .iter()
                    .enumerate()
                    .fold(*c, |acc, (i, &e)| acc * powers[i][e as usize])
            })
            .sum()
    }

    /// Composition: replaces variable `i` by `images[i]`.
    pub fn substitute(&self, images: &[SparsePoly]) -> SparsePoly {
        assert_eq!(images.len(), self.nvars, "one image per variable");
        let target_vars = images.first().map_or(0, |p| p.nvars);
        let mut power_cache: Vec<Vec<SparsePoly>> = images
            .iter()
            .map(|p| vec![SparsePoly::one(p.nvars)])
            .collect();
        let mut out = SparsePoly::zero(target_vars);
        for (k, c) in &self.terms {
            let mut term = SparsePoly::constant(target_vars, *c);
            for (i, &e) in k.exponents().iter().enumerate() {
                while power_cache[i].len() <= e as usize {
                    let next = power_cache[i].last().unwrap().mul(&images[i]);
                    power_cache[i].push(next);
                }
                if e > 0 {
                    term = term.mul(&power_cache[i][e as usize]);
                }
            }
            out = out.add(&term);
        }
        out
    }

    /// Permutes variables: variable `i` of `self` becomes variable `perm[i]`.
    pub fn permute_variables(&self, perm: &[usize]) -> SparsePoly {
        SparsePoly::from_terms(
            self.nvars,
            self.terms.iter().map(|(k, c)| {
                let mut e = vec![0; self.nvars];
                for (i, &x) in k.exponents().iter().enumerate() {
                    e[perm[i]] = x;
                }
                (MultiIndex(e), *c)
            }),
        )
    }

    /// Maximum coefficient difference, for tolerance comparisons.
    pub fn max_coefficient_difference(&self, other: &SparsePoly) -> f64 {
        self.sub(other).max_abs_coefficient()
    }

    pub(crate) fn render(&self, names: &dyn Fn(usize) -> String, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (k, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({}{:+}i)", c.re, c.im)?;
            for (v, &e) in k.exponents().iter().enumerate() {
                match e {
                    0 => {}
                    1 => write!(f, "*{}", names(v))?,
                    _ => write!(f, "*{}^{}", names(v), e)?,
                }
            }
        }
        Ok(())
    }
}

/// The Vandermonde polynomial `V(Z) = Π_{i<j} (z_i − z_j)` over `ℂ^n`,
/// expanded sparsely. It is homogeneous of degree `n(n−1)/2`.
pub fn vandermonde_poly(n: usize) -> crate::error::Result<BiPolynomial> {
    if n < 1 {
        return Err(crate::error::Error::InvalidArgument("Vandermonde polynomial needs N >= 1".into()));
    }
    let mut v = BiPolynomial::one(n);
    for i in 0..n {
        for j in (i + 1)..n {
            v = v.multiply(&BiPolynomial::z(n, i).sub(&BiPolynomial::z(n, j))?)?;
        }
    }
    Ok(v)
}
