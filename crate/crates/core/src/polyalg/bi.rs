use super::{MultiIndex, RealPolynomial, SparsePoly};
use crate::error::{check_dim, Error, Result};
use num_complex::Complex64;
use std::fmt;

/// Polynomial in `z ∈ ℂ^d` and `z̄`, `Σ c_{αβ} z^α z̄^β`.
#[derive(Clone, Debug, PartialEq)]
pub struct BiPolynomial {
    dim: usize,
    poly: SparsePoly,
}

const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

impl BiPolynomial {
    pub fn zero(dim: usize) -> Self {
        BiPolynomial {
            dim,
            poly: SparsePoly::zero(2 * dim),
        }
    }

    pub fn one(dim: usize) -> Self {
        BiPolynomial::constant(dim, ONE)
    }

    pub fn constant(dim: usize, c: Complex64) -> Self {
        BiPolynomial {
            dim,
            poly: SparsePoly::constant(2 * dim, c),
        }
    }

    /// The coordinate `z_j` (0-based).
    pub fn z(dim: usize, j: usize) -> Self {
        BiPolynomial {
            dim,
            poly: SparsePoly::variable(2 * dim, j),
        }
    }

    /// The conjugate coordinate `z̄_j` (0-based).
    pub fn zbar(dim: usize, j: usize) -> Self {
        BiPolynomial {
            dim,
            poly: SparsePoly::variable(2 * dim, dim + j),
        }
    }

    /// `c z^α z̄^β`.
    pub fn monomial(alpha: &MultiIndex, beta: &MultiIndex, c: Complex64) -> Self {
        assert_eq!(alpha.len(), beta.len(), "holomorphic and antiholomorphic parts differ in length");
        BiPolynomial {
            dim: alpha.len(),
            poly: SparsePoly::monomial(alpha.concat(beta), c),
        }
    }

    pub fn from_terms<I>(dim: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (MultiIndex, MultiIndex, Complex64)>,
    {
        BiPolynomial {
            dim,
            poly: SparsePoly::from_terms(2 * dim, terms.into_iter().map(|(a, b, c)| (a.concat(&b), c))),
        }
    }

    pub(crate) fn from_sparse(dim: usize, poly: SparsePoly) -> Self {
        debug_assert_eq!(poly.nvars(), 2 * dim);
        BiPolynomial { dim, poly }
    }

    /// Complex dimension `d`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_sparse(&self) -> &SparsePoly {
        &self.poly
    }

    pub fn is_zero(&self) -> bool {
        self.poly.is_zero()
    }

    /// Terms `(α, β, c)` in graded-lex order of the concatenated exponent.
    pub fn terms(&self) -> impl Iterator<Item = (MultiIndex, MultiIndex, Complex64)> + '_ {
        self.poly.terms().map(|(k, c)| {
            let (a, b) = k.split(self.dim);
            (a, b, *c)
        })
    }

    pub fn coefficient(&self, alpha: &MultiIndex, beta: &MultiIndex) -> Complex64 {
        self.poly.coefficient(&alpha.concat(beta))
    }

    /// `(max |α|, max |β|)` over stored terms.
    pub fn bidegree(&self) -> (u32, u32) {
        self.terms()
            .fold((0, 0), |(da, db), (a, b, _)| (da.max(a.order()), db.max(b.order())))
    }

    /// True when no term contains `z̄`.
    pub fn is_holomorphic(&self) -> bool {
        self.terms().all(|(_, b, _)| b.is_zero())
    }

    pub fn multiply(&self, other: &BiPolynomial) -> Result<BiPolynomial> {
        check_dim(self.dim, other.dim)?;
        Ok(BiPolynomial::from_sparse(self.dim, self.poly.mul(&other.poly)))
    }

    pub fn add(&self, other: &BiPolynomial) -> Result<BiPolynomial> {
        check_dim(self.dim, other.dim)?;
        Ok(BiPolynomial::from_sparse(self.dim, self.poly.add(&other.poly)))
    }

    pub fn sub(&self, other: &BiPolynomial) -> Result<BiPolynomial> {
        check_dim(self.dim, other.dim)?;
        Ok(BiPolynomial::from_sparse(self.dim, self.poly.sub(&other.poly)))
    }

    pub fn scale(&self, s: Complex64) -> BiPolynomial {
        BiPolynomial::from_sparse(self.dim, self.poly.scale(s))
    }

    pub fn pow(&self, e: u32) -> BiPolynomial {
        BiPolynomial::from_sparse(self.dim, self.poly.pow(e))
    }

    /// Pointwise complex conjugate: `Σ conj(c) z^β z̄^α`.
    pub fn conj(&self) -> BiPolynomial {
        BiPolynomial::from_terms(self.dim, self.terms().map(|(a, b, c)| (b, a, c.conj())))
    }

    /// Applies `self` read as the operator `Σ c D^α D̄^β` (Wirtinger
    /// derivatives) to `target`.
    pub fn apply_diff(&self, target: &BiPolynomial) -> Result<BiPolynomial> {
        check_dim(self.dim, target.dim)?;
        Ok(BiPolynomial::from_sparse(self.dim, self.poly.apply_diff(&target.poly)))
    }

    /// Value at `z`, with `z̄` taken as the conjugate of `z`.
    pub fn eval(&self, z: &[Complex64]) -> Result<Complex64> {
        check_dim(self.dim, z.len())?;
        let mut vars: Vec<Complex64> = z.to_vec();
        vars.extend(z.iter().map(|w| w.conj()));
        Ok(self.poly.eval(&vars))
    }

    /// Value at a point given in real coordinates `(x_1, x_2, …)` with
    /// `z_j = x_{2j−1} + i x_{2j}`.
    pub fn eval_real(&self, x: &[f64]) -> Result<Complex64> {
        check_dim(2 * self.dim, x.len())?;
        let z: Vec<Complex64> = x.chunks(2).map(|p| Complex64::new(p[0], p[1])).collect();
        self.eval(&z)
    }

    /// The same function in real coordinates, `z_j = x_{2j−1} + i x_{2j}`.
    pub fn complexify(&self) -> RealPolynomial {
        let n = 2 * self.dim;
        let xy = |j: usize| {
            (
                SparsePoly::variable(n, 2 * j),
                SparsePoly::variable(n, 2 * j + 1).scale(I),
            )
        };
        let holo = (0..self.dim).map(|j| {
            let (x, iy) = xy(j);
            x.add(&iy)
        });
        let anti = (0..self.dim).map(|j| {
            let (x, iy) = xy(j);
            x.sub(&iy)
        });
        let images: Vec<SparsePoly> = holo.chain(anti).collect();
        RealPolynomial::from_sparse(self.poly.substitute(&images))
    }

    /// Converts a real-coordinate operator symbol `Σ c_γ ∂^γ` over `ℝ^{2d}`
    /// into Wirtinger form via `∂_{x_j} = D_j + D̄_j`, `∂_{y_j} = i(D_j − D̄_j)`.
    pub fn from_real_operator(op: &RealPolynomial) -> Result<BiPolynomial> {
        let n = op.dim();
        if n % 2 != 0 {
            return Err(Error::InvalidArgument(format!(
                "real operator dimension {n} is odd; cannot pair with complex coordinates"
            )));
        }
        let d = n / 2;
        let mut images = Vec::with_capacity(n);
        for j in 0..d {
            let dz = SparsePoly::variable(n, j);
            let dzb = SparsePoly::variable(n, d + j);
            images.push(dz.add(&dzb));
            images.push(dz.sub(&dzb).scale(I));
        }
        Ok(BiPolynomial::from_sparse(d, op.as_sparse().substitute(&images)))
    }

    /// Inverse of [`BiPolynomial::from_real_operator`]:
    /// `D_j = ½(∂_{x_j} − i∂_{y_j})`, `D̄_j = ½(∂_{x_j} + i∂_{y_j})`.
    pub fn to_real_operator(&self) -> RealPolynomial {
        let n = 2 * self.dim;
        let half = Complex64::new(0.5, 0.0);
        let mut images = Vec::with_capacity(n);
        for j in 0..self.dim {
            let dx = SparsePoly::variable(n, 2 * j);
            let dy = SparsePoly::variable(n, 2 * j + 1).scale(I);
            images.push(dx.sub(&dy).scale(half));
        }
        for j in 0..self.dim {
            let dx = SparsePoly::variable(n, 2 * j);
            let dy = SparsePoly::variable(n, 2 * j + 1).scale(I);
            images.push(dx.add(&dy).scale(half));
        }
        RealPolynomial::from_sparse(self.poly.substitute(&images))
    }

    /// Composition with a linear change of the holomorphic coordinates,
    /// `p(Uz, conj(Uz))`.
    pub fn compose_linear(&self, u: &[Vec<Complex64>]) -> Result<BiPolynomial> {
        check_dim(self.dim, u.len())?;
        let n = 2 * self.dim;
        let mut images = Vec::with_capacity(n);
        for row in u {
            check_dim(self.dim, row.len())?;
            images.push(SparsePoly::from_terms(
                n,
                row.iter().enumerate().map(|(k, c)| (MultiIndex::unit(n, k, 1), *c)),
            ));
        }
        for row in u {
            images.push(SparsePoly::from_terms(
                n,
                row.iter()
                    .enumerate()
                    .map(|(k, c)| (MultiIndex::unit(n, self.dim + k, 1), c.conj())),
            ));
        }
        Ok(BiPolynomial::from_sparse(self.dim, self.poly.substitute(&images)))
    }
}

impl fmt::Display for BiPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = self.dim;
        self.poly.render(
            &|v| if v < d { format!("z{}", v + 1) } else { format!("zb{}", v - d + 1) },
            f,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn z_times_zbar() {
        let p = BiPolynomial::z(1, 0).multiply(&BiPolynomial::zbar(1, 0)).unwrap();
        assert_eq!(p.len_terms(), 1);
        assert_eq!(
            p.coefficient(&MultiIndex::new(vec![1]), &MultiIndex::new(vec![1])),
            c(1.0, 0.0)
        );
        assert_eq!(p.bidegree(), (1, 1));
        assert!(!p.is_holomorphic());
    }

    #[test]
    fn difference_of_squares() {
        let z1 = BiPolynomial::z(2, 0);
        let z2 = BiPolynomial::z(2, 1);
        let p = z1.sub(&z2).unwrap().multiply(&z1.add(&z2).unwrap()).unwrap();
        let expected = z1.pow(2).sub(&z2.pow(2)).unwrap();
        assert_eq!(p, expected);
        assert_eq!(p.len_terms(), 2);
    }

    #[test]
    fn multiply_by_zero() {
        let p = BiPolynomial::z(1, 0).add(&BiPolynomial::one(1)).unwrap();
        assert!(p.multiply(&BiPolynomial::zero(1)).unwrap().is_zero());
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let err = BiPolynomial::z(1, 0).multiply(&BiPolynomial::z(2, 0)).unwrap_err();
        assert_eq!(err, Error::DimensionMismatch { expected: 1, found: 2 });
        assert!(BiPolynomial::z(1, 0).apply_diff(&BiPolynomial::z(2, 1)).is_err());
    }

    #[test]
    fn operator_application() {
        let z1 = BiPolynomial::z(2, 0);
        let z2 = BiPolynomial::z(2, 1);
        let v = z1.sub(&z2).unwrap();
        // (D1 − D2)(z1 − z2) = 2
        assert_eq!(v.apply_diff(&v).unwrap(), BiPolynomial::constant(2, c(2.0, 0.0)));
        // D1 z2 = 0
        assert!(z1.apply_diff(&z2).unwrap().is_zero());
    }

    #[test]
    fn complexify_examples() {
        let z = BiPolynomial::z(1, 0);
        let zb = BiPolynomial::zbar(1, 0);
        let x = RealPolynomial::variable(2, 0);
        let y = RealPolynomial::variable(2, 1);

        assert_eq!(z.complexify(), x.add(&y.scale(c(0.0, 1.0))).unwrap());

        let zzb = z.multiply(&zb).unwrap().complexify();
        assert_eq!(zzb, x.pow(2).add(&y.pow(2)).unwrap());

        let z2 = z.pow(2).complexify();
        let expected = x
            .pow(2)
            .sub(&y.pow(2))
            .unwrap()
            .add(&x.multiply(&y).unwrap().scale(c(0.0, 2.0)))
            .unwrap();
        assert_eq!(z2, expected);
    }

    #[test]
    fn wirtinger_round_trip() {
        let dz = BiPolynomial::z(1, 0);
        let real = dz.to_real_operator();
        let back = BiPolynomial::from_real_operator(&real).unwrap();
        assert!(back.sub(&dz).unwrap().as_sparse().max_abs_coefficient() < 1e-15);
        // ∂_z̄ z̄ = 1 through real coordinates
        let dzb = BiPolynomial::zbar(1, 0).to_real_operator();
        let target = BiPolynomial::zbar(1, 0).complexify();
        let v = dzb.apply_diff(&target).unwrap();
        assert!((v.constant_term() - c(1.0, 0.0)).norm() < 1e-15);
        assert_eq!(v.len_terms(), 1);
    }

    #[test]
    fn conj_swaps_parts() {
        let p = BiPolynomial::monomial(&MultiIndex::new(vec![2]), &MultiIndex::new(vec![1]), c(1.0, 2.0));
        let q = p.conj();
        assert_eq!(
            q.coefficient(&MultiIndex::new(vec![1]), &MultiIndex::new(vec![2])),
            c(1.0, -2.0)
        );
        let z = [c(0.3, -0.4)];
        assert!((q.eval(&z).unwrap() - p.eval(&z).unwrap().conj()).norm() < 1e-15);
    }

    #[test]
    fn display_is_graded() {
        let p = BiPolynomial::z(1, 0).pow(2).add(&BiPolynomial::zbar(1, 0)).unwrap();
        assert_eq!(p.to_string(), "(1+0i)*zb1 + (1+0i)*z1^2");
    }
}

#[cfg(test)]
impl BiPolynomial {
    fn len_terms(&self) -> usize {
        self.poly.len()
    }
}
