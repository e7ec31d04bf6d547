//! Dense complex linear algebra helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Singular values, sorted in decreasing order.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Right singular vectors of `m`, one per column of `m`, paired with
/// singular values (zero-padded when `m` has fewer rows than columns),
/// sorted by decreasing singular value.
pub fn right_singular_pairs(m: &CMatrix) -> Vec<(f64, CVector)> {
    let (rows, cols) = m.shape();
    let padded = if rows < cols {
        let mut p = CMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested V^H");
    let mut pairs: Vec<(f64, CVector)> = svd
        .singular_values
        .iter()
        .enumerate()
        .map(|(i, &s)| (s, v_t.row(i).adjoint().into_owned()))
        .collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    pairs
}

/// Orthonormal basis of `{v : ‖Mv‖ ≤ tol_rel · σ₁}`.
pub fn nullspace(m: &CMatrix, tol_rel: f64) -> Vec<CVector> {
    let pairs = right_singular_pairs(m);
    let top = pairs.first().map_or(0.0, |p| p.0);
    pairs
        .into_iter()
        .filter(|(s, _)| *s <= tol_rel * top || top == 0.0)
        .map(|(_, v)| v)
        .collect()
}

/// Minimum-norm least-squares solution of `a x ≈ b` with column
/// equilibration. Singular values below `1e−14 · σ₁` are discarded.
pub fn least_squares(a: &CMatrix, b: &CVector) -> CVector {
    let cols = a.ncols();
    if cols == 0 {
        return CVector::zeros(0);
    }
    let norms: Vec<f64> = (0..cols)
        .map(|j| {
            let n = a.column(j).norm();
            if n > 0.0 {
                n
            } else {
                1.0
            }
        })
        .collect();
    let mut scaled = a.clone();
    for (j, n) in norms.iter().enumerate() {
        scaled.column_mut(j).scale_mut(1.0 / n);
    }
    let svd = scaled.svd(true, true);
    let top = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let y = svd
        .solve(b, 1e-14 * top)
        .expect("U and V^H were computed");
    DVector::from_iterator(cols, y.iter().zip(&norms).map(|(v, n)| v / *n))
}

/// Eigenvalues of a square complex matrix from its Schur form.
pub fn eigenvalues(m: &CMatrix) -> Vec<Complex64> {
    let n = m.nrows();
    if n == 0 {
        return Vec::new();
    }
    if n == 1 {
        return vec![m[(0, 0)]];
    }
    let schur = nalgebra::Schur::try_new(m.clone(), f64::EPSILON, 10_000)
        .unwrap_or_else(|| nalgebra::Schur::new(m.clone()));
    let (_, t) = schur.unpack();
    (0..n).map(|i| t[(i, i)]).collect()
}

/// Haar-distributed random unitary `d × d` matrix (QR of a complex
/// Gaussian matrix with the phases of `R`'s diagonal removed).
pub fn random_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(d, d, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im)
    });
    let qr = g.qr();
    let (mut q, r) = qr.unpack();
    for j in 0..d {
        let diag = r[(j, j)];
        let phase = if diag.norm() > 0.0 { diag / diag.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Rows of a matrix as nested vectors.
pub fn to_rows(m: &CMatrix) -> Vec<Vec<Complex64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for d in 1..=4 {
            let u = random_unitary(d, &mut rng);
            let err = (u.adjoint() * &u - CMatrix::identity(d, d)).norm();
            assert!(err < 1e-12, "d = {d}: {err}");
        }
    }

    #[test]
    fn eigenvalues_of_companion() {
        // w² − 1
        let mut m = CMatrix::zeros(2, 2);
        m[(1, 0)] = Complex64::new(1.0, 0.0);
        m[(0, 1)] = Complex64::new(1.0, 0.0);
        let mut e = eigenvalues(&m);
        e.sort_by(|a, b| a.re.total_cmp(&b.re));
        assert!((e[0] + 1.0).norm() < 1e-14 && (e[1] - 1.0).norm() < 1e-14);
    }

    #[test]
    fn nullspace_of_wide_matrix() {
        let m = CMatrix::from_row_slice(1, 3, &[Complex64::new(1.0, 0.0); 3]);
        let ns = nullspace(&m, 1e-12);
        assert_eq!(ns.len(), 2);
        for v in ns {
            assert!((&m * v).norm() < 1e-14);
        }
    }

    #[test]
    fn least_squares_recovers_solution() {
        let a = CMatrix::from_fn(6, 3, |i, j| Complex64::new((i + 1) as f64, 0.0).powu(j as u32));
        let x = CVector::from_vec(vec![
            Complex64::new(1.0, 2.0),
            Complex64::new(-0.5, 0.0),
            Complex64::new(0.0, 0.25),
        ]);
        let b = &a * &x;
        let y = least_squares(&a, &b);
        assert!((y - x).norm() < 1e-10);
    }
}
