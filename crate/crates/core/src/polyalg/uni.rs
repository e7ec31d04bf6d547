use crate::linalg;
use num_complex::Complex64;
use std::fmt;

/// Dense univariate polynomial `c_0 + c_1 w + … + c_m w^m`.
///
/// Trailing exact zeros are trimmed, so the leading coefficient is nonzero
/// unless the polynomial is zero.
#[derive(Clone, Debug, PartialEq)]
pub struct UniPolynomial {
    coefficients: Vec<Complex64>,
}

/// Relative size below which a leading coefficient is treated as a degree drop.
const DEFLATION_TOL: f64 = 1e-8;

impl UniPolynomial {
    pub fn new(mut coefficients: Vec<Complex64>) -> Self {
        while coefficients.last().is_some_and(|c| *c == Complex64::default()) {
            coefficients.pop();
        }
        UniPolynomial { coefficients }
    }

    pub fn zero() -> Self {
        UniPolynomial::new(Vec::new())
    }

    /// Monic polynomial with the given roots.
    pub fn from_roots(roots: &[Complex64]) -> Self {
        let mut c = vec![Complex64::new(1.0, 0.0)];
        for r in roots {
            let mut next = vec![Complex64::default(); c.len() + 1];
            for (i, ci) in c.iter().enumerate() {
                next[i + 1] += ci;
                next[i] -= ci * r;
            }
            c = next;
        }
        UniPolynomial::new(c)
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coefficients.len().checked_sub(1)
    }

    pub fn norm(&self) -> f64 {
        self.coefficients.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn eval(&self, w: Complex64) -> Complex64 {
        self.coefficients
            .iter()
            .rev()
            .fold(Complex64::default(), |acc, c| acc * w + c)
    }

    pub fn derivative(&self) -> UniPolynomial {
        UniPolynomial::new(
            self.coefficients
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * k as f64)
                .collect(),
        )
    }

    /// Drops leading coefficients below `1e−8 · ‖h‖` and divides by the new
    /// leading coefficient.
    pub fn monic(&self) -> UniPolynomial {
        let scale = self.norm();
        let mut c = self.coefficients.clone();
        while c.last().is_some_and(|x| x.norm() < DEFLATION_TOL * scale) {
            c.pop();
        }
        match c.last().copied() {
            Some(lead) => UniPolynomial::new(c.into_iter().map(|x| x / lead).collect()),
            None => UniPolynomial::zero(),
        }
    }

    /// Roots as eigenvalues of the companion matrix of the monic
    /// normalization, each refined by a guarded Newton step.
    pub fn roots(&self) -> Vec<Complex64> {
        let monic = self.monic();
        let n = match monic.degree() {
            Some(n) if n >= 1 => n,
            _ => return Vec::new(),
        };
        let c = monic.coefficients();
        let mut companion = nalgebra::DMatrix::<Complex64>::zeros(n, n);
        for i in 1..n {
            companion[(i, i - 1)] = Complex64::new(1.0, 0.0);
        }
        for i in 0..n {
            companion[(i, n - 1)] = -c[i];
        }
        let deriv = monic.derivative();
        linalg::eigenvalues(&companion)
            .into_iter()
            .map(|r| polish_root(&monic, &deriv, r))
            .collect()
    }
}

fn polish_root(p: &UniPolynomial, dp: &UniPolynomial, mut r: Complex64) -> Complex64 {
    for _ in 0..3 {
        let f = p.eval(r);
        let df = dp.eval(r);
        if df.norm() == 0.0 {
            break;
        }
        let candidate = r - f / df;
        if p.eval(candidate).norm() < f.norm() {
            r = candidate;
        } else {
            break;
        }
    }
    r
}

impl fmt::Display for UniPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coefficients.is_empty() {
            return write!(f, "0");
        }
        for (k, c) in self.coefficients.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            match k {
                0 => write!(f, "({}{:+}i)", c.re, c.im)?,
                1 => write!(f, "({}{:+}i)*w", c.re, c.im)?,
                _ => write!(f, "({}{:+}i)*w^{}", c.re, c.im, k)?,
            }
        }
        Ok(())
    }
}
