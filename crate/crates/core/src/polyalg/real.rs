use super::{MultiIndex, SparsePoly};
use crate::error::{check_dim, Result};
use num_complex::Complex64;
use std::fmt;

/// Polynomial in real coordinates `x ∈ ℝ^D` with complex coefficients.
///
/// Also used as the symbol of a constant-coefficient differential operator
/// `Σ c_γ ∂^γ`.
#[derive(Clone, Debug, PartialEq)]
pub struct RealPolynomial {
    poly: SparsePoly,
}

impl RealPolynomial {
    pub fn zero(dim: usize) -> Self {
        RealPolynomial {
            poly: SparsePoly::zero(dim),
        }
    }

    pub fn one(dim: usize) -> Self {
        RealPolynomial {
            poly: SparsePoly::one(dim),
        }
    }

    pub fn constant(dim: usize, c: Complex64) -> Self {
        RealPolynomial {
            poly: SparsePoly::constant(dim, c),
        }
    }

    /// The coordinate `x_i` (0-based).
    pub fn variable(dim: usize, i: usize) -> Self {
        RealPolynomial {
            poly: SparsePoly::variable(dim, i),
        }
    }

    pub fn monomial(gamma: MultiIndex, c: Complex64) -> Self {
        RealPolynomial {
            poly: SparsePoly::monomial(gamma, c),
        }
    }

    pub fn from_terms<I>(dim: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (MultiIndex, Complex64)>,
    {
        RealPolynomial {
            poly: SparsePoly::from_terms(dim, terms),
        }
    }

    pub(crate) fn from_sparse(poly: SparsePoly) -> Self {
        RealPolynomial { poly }
    }

    /// Real dimension `D`.
    pub fn dim(&self) -> usize {
        self.poly.nvars()
    }

    pub fn as_sparse(&self) -> &SparsePoly {
        &self.poly
    }

    pub fn is_zero(&self) -> bool {
        self.poly.is_zero()
    }

    pub fn len_terms(&self) -> usize {
        self.poly.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Complex64)> {
        self.poly.terms()
    }

    pub fn coefficient(&self, gamma: &MultiIndex) -> Complex64 {
        self.poly.coefficient(gamma)
    }

    pub fn constant_term(&self) -> Complex64 {
        self.poly.constant_term()
    }

    pub fn degree(&self) -> Option<u32> {
        self.poly.degree()
    }

    pub fn multiply(&self, other: &RealPolynomial) -> Result<RealPolynomial> {
        check_dim(self.dim(), other.dim())?;
        Ok(RealPolynomial::from_sparse(self.poly.mul(&other.poly)))
    }

    pub fn add(&self, other: &RealPolynomial) -> Result<RealPolynomial> {
        check_dim(self.dim(), other.dim())?;
        Ok(RealPolynomial::from_sparse(self.poly.add(&other.poly)))
    }

    pub fn sub(&self, other: &RealPolynomial) -> Result<RealPolynomial> {
        check_dim(self.dim(), other.dim())?;
        Ok(RealPolynomial::from_sparse(self.poly.sub(&other.poly)))
    }

    pub fn scale(&self, s: Complex64) -> RealPolynomial {
        RealPolynomial::from_sparse(self.poly.scale(s))
    }

    pub fn pow(&self, e: u32) -> RealPolynomial {
        RealPolynomial::from_sparse(self.poly.pow(e))
    }

    /// Pointwise conjugate (coordinates are real, so only coefficients change).
    pub fn conj(&self) -> RealPolynomial {
        RealPolynomial::from_sparse(self.poly.conj_coefficients())
    }

    pub fn derivative(&self, gamma: &MultiIndex) -> Result<RealPolynomial> {
        check_dim(self.dim(), gamma.len())?;
        Ok(RealPolynomial::from_sparse(self.poly.derivative(gamma)))
    }

    /// Applies `self` read as `Σ c_γ ∂^γ` to `target`.
    pub fn apply_diff(&self, target: &RealPolynomial) -> Result<RealPolynomial> {
        check_dim(self.dim(), target.dim())?;
        Ok(RealPolynomial::from_sparse(self.poly.apply_diff(&target.poly)))
    }

    /// The Laplacian symbol `Σ_j ξ_j²`.
    pub fn laplacian_symbol(dim: usize) -> RealPolynomial {
        RealPolynomial::from_terms(
            dim,
            (0..dim).map(|i| (MultiIndex::unit(dim, i, 2), Complex64::new(1.0, 0.0))),
        )
    }

    pub fn laplacian(&self) -> RealPolynomial {
        RealPolynomial::from_sparse(
            RealPolynomial::laplacian_symbol(self.dim())
                .poly
                .apply_diff(&self.poly),
        )
    }

    pub fn eval(&self, x: &[f64]) -> Result<Complex64> {
        check_dim(self.dim(), x.len())?;
        let v: Vec<Complex64> = x.iter().map(|&t| Complex64::new(t, 0.0)).collect();
        Ok(self.poly.eval(&v))
    }

    pub fn eval_complex(&self, x: &[Complex64]) -> Result<Complex64> {
        check_dim(self.dim(), x.len())?;
        Ok(self.poly.eval(x))
    }

    /// `p(Mx)` for a real `D' × D`-shaped map given by rows: variable `i`
    /// is replaced by `Σ_k m[i][k] y_k`.
    pub fn compose_linear(&self, m: &[Vec<f64>]) -> Result<RealPolynomial> {
        check_dim(self.dim(), m.len())?;
        let target = m.first().map_or(0, Vec::len);
        let images: Vec<SparsePoly> = m
            .iter()
            .map(|row| {
                SparsePoly::from_terms(
                    target,
                    row.iter()
                        .enumerate()
                        .map(|(k, &v)| (MultiIndex::unit(target, k, 1), Complex64::new(v, 0.0))),
                )
            })
            .collect();
        Ok(RealPolynomial::from_sparse(self.poly.substitute(&images)))
    }
}

impl fmt::Display for RealPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.poly.render(&|v| format!("x{}", v + 1), f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laplacian_of_harmonic_and_not() {
        let x = RealPolynomial::variable(2, 0);
        let y = RealPolynomial::variable(2, 1);
        let h = x.pow(2).sub(&y.pow(2)).unwrap();
        assert!(h.laplacian().is_zero());
        let r2 = x.pow(2).add(&y.pow(2)).unwrap();
        assert_eq!(r2.laplacian(), RealPolynomial::constant(2, Complex64::new(4.0, 0.0)));
    }

    #[test]
    fn monomial_duality() {
        // ∂^γ x^γ = γ!, ∂^γ x^γ' (0) = 0 for γ ≠ γ' of equal order
        for g in MultiIndex::up_to_degree(3, 3) {
            let op = RealPolynomial::monomial(g.clone(), Complex64::new(1.0, 0.0));
            for h in MultiIndex::up_to_degree(3, 3) {
                let t = RealPolynomial::monomial(h.clone(), Complex64::new(1.0, 0.0));
                let v = op.apply_diff(&t).unwrap().constant_term();
                let expected = if g == h { g.factorial() } else { 0.0 };
                assert_eq!(v, Complex64::new(expected, 0.0), "{g} on {h}");
            }
        }
    }

    #[test]
    fn compose_with_rotation() {
        // x1 under the map x1 -> y2 becomes y2
        let p = RealPolynomial::variable(2, 0);
        let q = p.compose_linear(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(q, RealPolynomial::variable(2, 1));
    }
}
