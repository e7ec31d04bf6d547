//! Algebraic witness that `|V(Z)|²` is not in the closed span of products
//! `H₁ · conj(H₂)` of symmetric holomorphic polynomials: the operator
//! `V(D)V(D̄)` at the origin kills every such product but not `|V|²`.

use crate::error::{check_dim, Error, Result};
use crate::polyalg::{vandermonde_poly, BiPolynomial, MultiIndex, SparsePoly};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Largest supported number of variables (`V` has `N!` terms).
pub const MAX_VARIABLES: usize = 4;

fn check_n(n: usize) -> Result<()> {
    if !(2..=MAX_VARIABLES).contains(&n) {
        return Err(Error::InvalidArgument(format!("N must lie in 2..={MAX_VARIABLES}, got {n}")));
    }
    Ok(())
}

/// Two holomorphic polynomials in `N` variables with exact symmetry flags.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricPair {
    pub h1: BiPolynomial,
    pub h2: BiPolynomial,
    pub symmetric_flags: (bool, bool),
}

impl SymmetricPair {
    pub fn new(h1: BiPolynomial, h2: BiPolynomial) -> Result<Self> {
        check_dim(h1.dim(), h2.dim())?;
        if !h1.is_holomorphic() || !h2.is_holomorphic() {
            return Err(Error::NonHolomorphic);
        }
        let symmetric_flags = (is_symmetric(&h1), is_symmetric(&h2));
        Ok(SymmetricPair { h1, h2, symmetric_flags })
    }

    pub fn both_symmetric(&self) -> bool {
        self.symmetric_flags.0 && self.symmetric_flags.1
    }
}

/// Exact invariance under every adjacent transposition `z_i ↔ z_{i+1}`
/// (applied to `z` and `z̄` alike).
pub fn is_symmetric(p: &BiPolynomial) -> bool {
    let n = p.dim();
    (0..n.saturating_sub(1)).all(|i| {
        let mut perm: Vec<usize> = (0..2 * n).collect();
        perm.swap(i, i + 1);
        perm.swap(n + i, n + i + 1);
        p.as_sparse().permute_variables(&perm) == *p.as_sparse()
    })
}

/// Power sum `p_k = Σ_j z_j^k`.
fn power_sum(n: usize, k: u32) -> SparsePoly {
    SparsePoly::from_terms(
        2 * n,
        (0..n).map(|j| (MultiIndex::unit(2 * n, j, k), Complex64::new(1.0, 0.0))),
    )
}

/// Partitions of every weight `1..=degree` into parts `≤ degree`,
/// largest part first.
fn partitions(degree: u32) -> Vec<Vec<u32>> {
    fn rec(remaining: u32, max_part: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if remaining == 0 {
            out.push(prefix.clone());
            return;
        }
        for part in (1..=max_part.min(remaining)).rev() {
            prefix.push(part);
            rec(remaining - part, part, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    for weight in 1..=degree {
        rec(weight, weight, &mut Vec::new(), &mut out);
    }
    out
}

/// Random symmetric holomorphic polynomial of degree `≤ degree`: a seeded
/// complex Gaussian combination of the power-sum products `p_λ`,
/// `|λ| ≤ degree`. Products of power sums have integer coefficients, so
/// the symmetry holds exactly in floating point.
pub fn symmetric_sample(n: usize, degree: u32, seed: u64) -> Result<BiPolynomial> {
    check_n(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut acc = SparsePoly::zero(2 * n);
    for lambda in partitions(degree) {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        let mut term = SparsePoly::one(2 * n);
        for &k in &lambda {
            term = term.mul(&power_sum(n, k));
        }
        acc = acc.add(&term.scale(Complex64::new(re, im)));
    }
    let p = BiPolynomial::from_sparse(n, acc);
    debug_assert!(is_symmetric(&p));
    Ok(p)
}

/// `[V(D) H](0)` for holomorphic `H`.
pub fn vandermonde_factor(h: &BiPolynomial) -> Result<Complex64> {
    let n = h.dim();
    check_n(n)?;
    if !h.is_holomorphic() {
        return Err(Error::NonHolomorphic);
    }
    Ok(vandermonde_poly(n)?.apply_diff(h)?.as_sparse().constant_term())
}

/// `V(D)V(D̄)[H₁ · conj(H₂)]` at the origin, by exact differentiation.
///
/// Equals `[V(D)H₁](0) · conj([V(D)H₂](0))`, which vanishes when either
/// factor is symmetric.
pub fn check_annihilation(h1: &BiPolynomial, h2: &BiPolynomial, n: usize) -> Result<Complex64> {
    check_n(n)?;
    check_dim(n, h1.dim())?;
    check_dim(n, h2.dim())?;
    if !h1.is_holomorphic() || !h2.is_holomorphic() {
        return Err(Error::NonHolomorphic);
    }
    let v = vandermonde_poly(n)?;
    let op = v.multiply(&v.conj())?;
    let target = h1.multiply(&h2.conj())?;
    Ok(op.apply_diff(&target)?.as_sparse().constant_term())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_examples() {
        let p = symmetric_sample(2, 1, 3).unwrap();
        let c = p.coefficient(&MultiIndex::new(vec![1, 0]), &MultiIndex::zeros(2));
        let q = BiPolynomial::z(2, 0).add(&BiPolynomial::z(2, 1)).unwrap().scale(c);
        assert_eq!(p, q);
        assert_eq!(symmetric_sample(2, 3, 9).unwrap(), symmetric_sample(2, 3, 9).unwrap());
        assert_ne!(symmetric_sample(2, 3, 9).unwrap(), symmetric_sample(2, 3, 10).unwrap());
        let s = symmetric_sample(3, 2, 5).unwrap();
        assert!(is_symmetric(&s));
        assert_eq!(s.bidegree(), (2, 0));
        assert!(symmetric_sample(1, 2, 0).is_err());
    }

    #[test]
    fn partitions_up_to_two() {
        assert_eq!(partitions(2), vec![vec![1], vec![2], vec![1, 1]]);
    }

    #[test]
    fn annihilation_examples() {
        let n = 2;
        let h1 = BiPolynomial::z(n, 0).add(&BiPolynomial::z(n, 1)).unwrap();
        let h2 = BiPolynomial::z(n, 0).pow(3).add(&BiPolynomial::z(n, 1)).unwrap();
        assert_eq!(check_annihilation(&h1, &h2, n).unwrap(), Complex64::default());
        let v = vandermonde_poly(n).unwrap();
        assert_eq!(check_annihilation(&v, &v, n).unwrap(), Complex64::new(4.0, 0.0));
        let one = BiPolynomial::one(n);
        assert_eq!(check_annihilation(&one, &one, n).unwrap(), Complex64::default());
        let v3 = vandermonde_poly(3).unwrap();
        assert_eq!(check_annihilation(&v3, &v3, 3).unwrap(), Complex64::new(144.0, 0.0));
        assert!(check_annihilation(&BiPolynomial::zbar(2, 0), &one, 2).is_err());
        assert!(check_annihilation(&one, &one, 3).is_err());
    }

    #[test]
    fn pair_flags() {
        let v = vandermonde_poly(3).unwrap();
        let s = symmetric_sample(3, 3, 1).unwrap();
        let pair = SymmetricPair::new(s, v).unwrap();
        assert_eq!(pair.symmetric_flags, (true, false));
        assert!(!pair.both_symmetric());
    }
}
