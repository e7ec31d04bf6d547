//! Truncated moment matrices `A_F` (monomial `(z, z̄)` basis) and `H_F`
//! (harmonic basis), the `|g|²` twist and coordinate submatrices.

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::polyalg::{BiPolynomial, MultiIndex, RealPolynomial};
use crate::weights::{SpaceKind, Weight};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;
use std::collections::HashMap;
use std::fmt;

/// Relative singular-value cutoff used to extract the Laplacian nullspace.
const HARMONIC_NULL_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisKind {
    MonomialBi,
    Harmonic,
}

/// Row or column descriptor of a [`MomentMatrix`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BasisLabel {
    /// `z^α` as a row, `z̄^β` as a column.
    Monomial(MultiIndex),
    /// The `index`-th harmonic basis polynomial of pure degree `degree`.
    Harmonic { degree: u32, index: usize },
}

impl fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasisLabel::Monomial(a) => write!(f, "{a}"),
            BasisLabel::Harmonic { degree, index } => write!(f, "h{degree}.{index}"),
        }
    }
}

impl Serialize for BasisLabel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Dense truncated moment matrix with `entries[r][c] = ⟨W, b_r · conj(b_c)⟩`.
#[derive(Clone, Debug)]
pub struct MomentMatrix {
    pub basis_kind: BasisKind,
    pub row_labels: Vec<BasisLabel>,
    pub col_labels: Vec<BasisLabel>,
    pub degree_cutoff: u32,
    pub entries: CMatrix,
}

#[derive(Serialize)]
struct MomentMatrixDto<'a> {
    basis_kind: BasisKind,
    degree_cutoff: u32,
    row_labels: &'a [BasisLabel],
    col_labels: &'a [BasisLabel],
    entries: Vec<Vec<Complex64>>,
}

impl Serialize for MomentMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MomentMatrixDto {
            basis_kind: self.basis_kind,
            degree_cutoff: self.degree_cutoff,
            row_labels: &self.row_labels,
            col_labels: &self.col_labels,
            entries: crate::linalg::to_rows(&self.entries),
        }
        .serialize(s)
    }
}

impl MomentMatrix {
    pub fn nrows(&self) -> usize {
        self.entries.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.entries.ncols()
    }

    /// `max |M − M^H|`, or `None` for a non-square matrix.
    pub fn hermitian_defect(&self) -> Option<f64> {
        if self.nrows() != self.ncols() {
            return None;
        }
        Some((&self.entries - self.entries.adjoint()).iter().map(|c| c.norm()).fold(0.0, f64::max))
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_hermitian_eigenvalue(&self) -> Option<f64> {
        if self.nrows() != self.ncols() || self.nrows() == 0 {
            return None;
        }
        let h = (&self.entries + self.entries.adjoint()).scale(0.5);
        h.symmetric_eigenvalues().iter().copied().reduce(f64::min)
    }
}

/// `A_F` with `a_{αβ} = ⟨W, z^α z̄^β⟩` over the box `|α|, |β| ≤ N`.
pub fn analytic_moment_matrix(w: &Weight, n: u32) -> Result<MomentMatrix> {
    require_complex(w)?;
    let d = w.ambient().dim;
    let idx = MultiIndex::up_to_degree(d, n);
    let entries = assemble(&idx, &idx, |a, b| w.bi_moment(a, b))?;
    Ok(monomial_matrix(idx, n, entries))
}

/// `A_{|g|²F}`: entries `⟨W, g z^α · conj(g z^β)⟩` for holomorphic `g`.
pub fn twist(w: &Weight, g: &BiPolynomial, n: u32) -> Result<MomentMatrix> {
    require_complex(w)?;
    let d = w.ambient().dim;
    crate::error::check_dim(d, g.dim())?;
    if !g.is_holomorphic() {
        return Err(Error::NonHolomorphic);
    }
    let g_terms: Vec<(MultiIndex, Complex64)> = g.terms().map(|(a, _, c)| (a, c)).collect();
    let mut cache: HashMap<(MultiIndex, MultiIndex), Complex64> = HashMap::new();
    let idx = MultiIndex::up_to_degree(d, n);
    let entries = assemble(&idx, &idx, |a, b| {
        let mut acc = Complex64::default();
        for (mu, gm) in &g_terms {
            for (nu, gn) in &g_terms {
                let key = (a.add(mu), b.add(nu));
                let m = match cache.get(&key) {
                    Some(v) => *v,
                    None => {
                        let v = w.bi_moment(&key.0, &key.1)?;
                        cache.insert(key, v);
                        v
                    }
                };
                acc += gm * gn.conj() * m;
            }
        }
        Ok(acc)
    })?;
    Ok(monomial_matrix(idx, n, entries))
}

/// The block of `A_F` with `α_j = β_j = 0` (`j` 0-based). Labels drop
/// coordinate `j`, so the result lines up entrywise with the moment matrix
/// of the weight projected along `z_j`.
pub fn coordinate_submatrix(w: &Weight, j: usize, n: u32) -> Result<MomentMatrix> {
    require_complex(w)?;
    let d = w.ambient().dim;
    if d < 2 {
        return Err(Error::InvalidArgument("coordinate submatrix needs d >= 2".into()));
    }
    if j >= d {
        return Err(Error::InvalidArgument(format!("coordinate {j} out of range for C^{d}")));
    }
    let reduced = MultiIndex::up_to_degree(d - 1, n);
    let lift = |a: &MultiIndex| {
        let mut e = a.exponents().to_vec();
        e.insert(j, 0);
        MultiIndex::new(e)
    };
    let entries = assemble(&reduced, &reduced, |a, b| w.bi_moment(&lift(a), &lift(b)))?;
    Ok(monomial_matrix(reduced, n, entries))
}

/// Orthonormal bases of homogeneous harmonic polynomials on `ℝ^D`,
/// degree by degree.
#[derive(Clone, Debug)]
pub struct HarmonicBasis {
    pub dim: usize,
    pub by_degree: Vec<Vec<RealPolynomial>>,
}

impl HarmonicBasis {
    pub fn len(&self) -> usize {
        self.by_degree.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn k_max(&self) -> u32 {
        self.by_degree.len() as u32 - 1
    }

    /// `(label, polynomial)` pairs in degree order.
    pub fn iter(&self) -> impl Iterator<Item = (BasisLabel, &RealPolynomial)> {
        self.by_degree.iter().enumerate().flat_map(|(k, ps)| {
            ps.iter().enumerate().map(move |(i, p)| {
                (
                    BasisLabel::Harmonic {
                        degree: k as u32,
                        index: i,
                    },
                    p,
                )
            })
        })
    }
}

/// For each `k ≤ k_max`, an orthonormal (in coefficient space) basis of the
/// kernel of `Δ` on homogeneous degree-`k` polynomials in `D` variables.
pub fn harmonic_basis(dim: usize, k_max: u32) -> Result<HarmonicBasis> {
    if dim < 2 {
        return Err(Error::InvalidArgument("harmonic basis needs D >= 2".into()));
    }
    let by_degree = (0..=k_max).map(|k| harmonic_degree(dim, k)).collect();
    Ok(HarmonicBasis { dim, by_degree })
}

fn harmonic_degree(dim: usize, k: u32) -> Vec<RealPolynomial> {
    let cols = MultiIndex::homogeneous(dim, k);
    let one = Complex64::new(1.0, 0.0);
    if k < 2 {
        return cols.into_iter().map(|g| RealPolynomial::monomial(g, one)).collect();
    }
    let rows = MultiIndex::homogeneous(dim, k - 2);
    let row_of: HashMap<&MultiIndex, usize> = rows.iter().enumerate().map(|(i, r)| (r, i)).collect();
    // Δ x^γ = Σ_i γ_i(γ_i − 1) x^{γ − 2e_i}, padded to a square matrix
    let n = cols.len();
    let mut lap = DMatrix::<f64>::zeros(n, n);
    for (c, g) in cols.iter().enumerate() {
        for i in 0..dim {
            let e = g.exponents()[i];
            if e >= 2 {
                let mut t = g.exponents().to_vec();
                t[i] -= 2;
                lap[(row_of[&MultiIndex::new(t)], c)] += f64::from(e * (e - 1));
            }
        }
    }
    let svd = lap.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let top = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let mut null: Vec<(f64, Vec<f64>)> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= HARMONIC_NULL_TOL * top)
        .map(|(i, &s)| (s, v_t.row(i).iter().copied().collect()))
        .collect();
    null.sort_by(|a, b| a.0.total_cmp(&b.0));
    null.into_iter()
        .map(|(_, v)| {
            RealPolynomial::from_terms(
                dim,
                cols.iter()
                    .zip(&v)
                    .filter(|(_, c)| c.abs() > 1e-15)
                    .map(|(g, &c)| (g.clone(), Complex64::new(c, 0.0))),
            )
        })
        .collect()
}

/// `H_F` with entries `⟨W, f_a · conj(f_b)⟩` over the harmonic basis of
/// degree `≤ k_max`.
///
/// Assembled as `Cᵀ M conj(C)` from the monomial moment matrix `M` of
/// degree `≤ k_max`, with each distinct moment evaluated once.
pub fn harmonic_moment_matrix(w: &Weight, k_max: u32) -> Result<MomentMatrix> {
    let basis = harmonic_basis_for(w, k_max)?;
    harmonic_moment_matrix_with(w, &basis)
}

fn harmonic_basis_for(w: &Weight, k_max: u32) -> Result<HarmonicBasis> {
    if w.ambient().kind != SpaceKind::Real {
        return Err(Error::AmbientMismatch(format!(
            "harmonic moment matrix needs a real ambient, weight lives in {}",
            w.ambient()
        )));
    }
    harmonic_basis(w.ambient().dim, k_max)
}

/// [`harmonic_moment_matrix`] with a precomputed basis.
pub fn harmonic_moment_matrix_with(w: &Weight, basis: &HarmonicBasis) -> Result<MomentMatrix> {
    if w.ambient().kind != SpaceKind::Real {
        return Err(Error::AmbientMismatch("harmonic moment matrix needs a real ambient".into()));
    }
    crate::error::check_dim(w.ambient().dim, basis.dim)?;
    let monos = MultiIndex::up_to_degree(basis.dim, basis.k_max());
    let pos: HashMap<&MultiIndex, usize> = monos.iter().enumerate().map(|(i, m)| (m, i)).collect();
    let labels: Vec<BasisLabel> = basis.iter().map(|(l, _)| l).collect();
    let mut c = CMatrix::zeros(monos.len(), labels.len());
    for (col, (_, p)) in basis.iter().enumerate() {
        for (g, v) in p.terms() {
            c[(pos[g], col)] = *v;
        }
    }
    let mut cache: HashMap<MultiIndex, Complex64> = HashMap::new();
    let m = assemble(&monos, &monos, |a, b| {
        let key = a.add(b);
        if let Some(v) = cache.get(&key) {
            return Ok(*v);
        }
        let v = w.real_moment(&key)?;
        cache.insert(key, v);
        Ok(v)
    })?;
    let entries = c.transpose() * m * c.map(|x| x.conj());
    Ok(MomentMatrix {
        basis_kind: BasisKind::Harmonic,
        row_labels: labels.clone(),
        col_labels: labels,
        degree_cutoff: basis.k_max(),
        entries,
    })
}

fn require_complex(w: &Weight) -> Result<()> {
    if w.ambient().kind != SpaceKind::Complex {
        return Err(Error::AmbientMismatch(format!(
            "analytic moment matrix needs a complex ambient, weight lives in {}",
            w.ambient()
        )));
    }
    Ok(())
}

fn assemble<F>(rows: &[MultiIndex], cols: &[MultiIndex], mut entry: F) -> Result<CMatrix>
where
    F: FnMut(&MultiIndex, &MultiIndex) -> Result<Complex64>,
{
    let mut m = CMatrix::zeros(rows.len(), cols.len());
    for (i, a) in rows.iter().enumerate() {
        for (j, b) in cols.iter().enumerate() {
            m[(i, j)] = entry(a, b)?;
        }
    }
    Ok(m)
}

fn monomial_matrix(idx: Vec<MultiIndex>, n: u32, entries: CMatrix) -> MomentMatrix {
    let labels: Vec<BasisLabel> = idx.into_iter().map(BasisLabel::Monomial).collect();
    MomentMatrix {
        basis_kind: BasisKind::MonomialBi,
        row_labels: labels.clone(),
        col_labels: labels,
        degree_cutoff: n,
        entries,
    }
}
