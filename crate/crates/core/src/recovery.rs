//! Numerical rank, the 1-D reduction loop, multi-dimensional recovery by
//! coordinate projections, and the Cauchy transform.
//!
//! The 1-D loop works on the moment table `t[k][l] = ⟨F, z^k z̄^l⟩`. A
//! polynomial `h` with `Σ_l h_l t[k][l] = 0` for all `k` means `h(z̄)F`
//! annihilates every holomorphic polynomial, so the conjugates of the roots
//! of `h` are support candidates. The table is then replaced by that of the
//! compactly supported `F'` with `∂̄F' = h(z̄)F`, whose order is lower, and
//! the search repeats. Operators are finally fitted by least squares at the
//! collected candidates.

use crate::error::{check_dim, Error, Result};
use crate::linalg::{self, CMatrix, CVector};
use crate::moments::MomentMatrix;
use crate::polyalg::{falling_factorial, BiPolynomial, MultiIndex, UniPolynomial};
use crate::weights::{decode_complex, encode_complex, Ambient, DifferentialOperator, SpaceKind, Weight, WeightBody};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Default relative threshold for [`numerical_rank`].
pub const DEFAULT_RANK_EPS: f64 = 1e-10;

/// Tunables of the recovery loop.
#[derive(Clone, Debug, PartialEq)]
pub struct RecoveryConfig {
    /// `σ_min/σ₁` below which a column-block null vector counts as genuine.
    pub null_tol: f64,
    /// A reduced table below this fraction of the original scale is null.
    pub null_table_tol: f64,
    /// Candidates whose fitted operator is below this fraction of the
    /// largest one are dropped.
    pub prune_rel: f64,
    /// Roots and candidates closer than this are merged.
    pub cluster_tol: f64,
    /// Maximum relative moment residual of an accepted fit.
    pub residual_tol: f64,
    /// Random unitary retries in dimension `d ≥ 2`.
    pub max_retries: usize,
    pub seed: u64,
}

impl Default for RecoveryConfig {
    fn default() -> Self {
        RecoveryConfig {
            null_tol: 1e-8,
            null_table_tol: 1e-12,
            prune_rel: 1e-9,
            cluster_tol: 1e-6,
            residual_tol: 1e-6,
            max_retries: 3,
            seed: 0x5eed,
        }
    }
}

/// `(rank, singular values)` with rank `= #{σ_k > eps_rel · σ₁}`.
pub fn numerical_rank(m: &MomentMatrix, eps_rel: f64) -> Result<(usize, Vec<f64>)> {
    matrix_rank(&m.entries, eps_rel)
}

/// [`numerical_rank`] for a bare matrix.
pub fn matrix_rank(m: &CMatrix, eps_rel: f64) -> Result<(usize, Vec<f64>)> {
    if !(eps_rel > 0.0 && eps_rel < 1.0) {
        return Err(Error::InvalidArgument(format!("eps_rel must lie in (0, 1), got {eps_rel}")));
    }
    if m.is_empty() {
        return Err(Error::EmptyMatrix);
    }
    let s = linalg::singular_values(m);
    let top = s[0];
    let rank = if top == 0.0 {
        0
    } else {
        s.iter().filter(|&&x| x > eps_rel * top).count()
    };
    Ok((rank, s))
}

/// 1-D moment table `t[k][l] = ⟨F, z^k z̄^l⟩`, `k ≤ K`, `l ≤ L`.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentTable {
    data: CMatrix,
}

impl MomentTable {
    /// Table with entries `f(k, l)` for `k ≤ k_rows`, `l ≤ l_cols`.
    pub fn from_fn<F>(k_rows: usize, l_cols: usize, mut f: F) -> Result<Self>
    where
        F: FnMut(usize, usize) -> Result<Complex64>,
    {
        let mut data = CMatrix::zeros(k_rows + 1, l_cols + 1);
        for k in 0..=k_rows {
            for l in 0..=l_cols {
                data[(k, l)] = f(k, l)?;
            }
        }
        Ok(MomentTable { data })
    }

    pub fn from_weight(w: &Weight, k_rows: usize, l_cols: usize) -> Result<Self> {
        require_c1(w)?;
        MomentTable::from_fn(k_rows, l_cols, |k, l| w.bi_moment(&mi1(k), &mi1(l)))
    }

    pub fn from_matrix(data: CMatrix) -> Self {
        MomentTable { data }
    }

    /// Largest row index `K`.
    pub fn k_rows(&self) -> usize {
        self.data.nrows() - 1
    }

    /// Largest column index `L`.
    pub fn l_cols(&self) -> usize {
        self.data.ncols() - 1
    }

    pub fn get(&self, k: usize, l: usize) -> Complex64 {
        self.data[(k, l)]
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.data
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

fn mi1(k: usize) -> MultiIndex {
    MultiIndex::new(vec![k as u32])
}

/// Smallest-degree `h` (degree `≤ m`) whose coefficients span a genuine
/// null vector of the column block `t[·][0..=deg]`, with its `σ_min/σ₁`.
///
/// Columns are equilibrated before the SVD so the decision does not depend
/// on the spread of `|z|^l` across columns.
fn find_null(t: &MomentTable, m: usize, tol: f64) -> Result<Option<(UniPolynomial, f64)>> {
    if t.l_cols() < m {
        return Err(Error::InsufficientTableWidth {
            needed: m + 1,
            available: t.l_cols() + 1,
        });
    }
    for deg in 0..=m {
        let block = t.data.columns(0, deg + 1).into_owned();
        let top = block.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let norms: Vec<f64> = (0..=deg)
            .map(|j| {
                let n = block.column(j).norm();
                if n > 1e-300 && n > 1e-14 * top {
                    n
                } else {
                    1.0
                }
            })
            .collect();
        let mut scaled = block.clone();
        for (j, n) in norms.iter().enumerate() {
            scaled.column_mut(j).scale_mut(1.0 / n);
        }
        let pairs = linalg::right_singular_pairs(&scaled);
        let s1 = pairs[0].0;
        // the smallest of the deg+1 right singular pairs
        let (smin, v) = pairs[..deg + 1].last().cloned().expect("nonempty block");
        let ratio = if s1 == 0.0 { 0.0 } else { smin / s1 };
        let coeffs: Vec<Complex64> = v.iter().zip(&norms).map(|(c, n)| c / *n).collect();
        let h = normalize(UniPolynomial::new(coeffs));
        if ratio < tol {
            return Ok(Some((h, ratio)));
        }
    }
    Ok(None)
}

/// Unit-norm `h` with a real positive leading coefficient.
fn normalize(h: UniPolynomial) -> UniPolynomial {
    let n = h.norm();
    let Some(&lead) = h.coefficients().last() else {
        return h;
    };
    let phase = lead.conj() / lead.norm();
    UniPolynomial::new(h.coefficients().iter().map(|c| c * phase / n).collect())
}

/// Annihilating polynomial of the table's first `m + 1` columns.
///
/// Returns the lowest-degree genuine null vector (relative trailing singular
/// value below `1e−8`), or the trailing right singular vector of the full
/// `m + 1` column block when no genuine one exists. An all-zero table yields
/// the zero polynomial.
pub fn null_polynomial(t: &MomentTable, m: usize) -> Result<UniPolynomial> {
    if t.k_rows() < 2 * m {
        return Err(Error::InvalidArgument(format!(
            "null polynomial of degree {m} needs at least {} table rows, have {}",
            2 * m + 1,
            t.k_rows() + 1
        )));
    }
    if t.max_abs() == 0.0 {
        return Ok(UniPolynomial::zero());
    }
    let tol = RecoveryConfig::default().null_tol;
    match find_null(t, m, tol)? {
        Some((h, _)) => Ok(h),
        None => {
            let block = t.data.columns(0, m + 1).into_owned();
            let pairs = linalg::right_singular_pairs(&block);
            Ok(normalize(UniPolynomial::new(pairs[m].1.iter().copied().collect())))
        }
    }
}

/// Moment table of `F'` with `∂̄F' = h(z̄)F`:
/// `t'[k][l] = −(l+1)^{−1} Σ_j h_j t[k][l+1+j]`.
///
/// Valid when `h(z̄)F` annihilates holomorphic polynomials, so that `F'` has
/// compact support. Each call loses `deg h + 1` columns.
pub fn reduce_moments(t: &MomentTable, h: &UniPolynomial) -> Result<MomentTable> {
    let Some(deg) = h.degree() else {
        return Err(Error::InvalidArgument("cannot reduce by the zero polynomial".into()));
    };
    let width = t.l_cols() + 1;
    if width < deg + 2 {
        return Err(Error::InsufficientTableWidth {
            needed: deg + 2,
            available: width,
        });
    }
    let new_cols = width - deg - 1;
    let hc = h.coefficients();
    let mut data = CMatrix::zeros(t.data.nrows(), new_cols);
    for k in 0..t.data.nrows() {
        for l in 0..new_cols {
            let mut acc = Complex64::default();
            for (j, hj) in hc.iter().enumerate() {
                acc += hj * t.data[(k, l + 1 + j)];
            }
            data[(k, l)] = -acc / (l as f64 + 1.0);
        }
    }
    Ok(MomentTable { data })
}

/// Result of a successful recovery.
#[derive(Clone, Debug, Serialize)]
pub struct RecoveryReport {
    /// Support points in `ℂ^d`.
    pub support: Vec<Vec<Complex64>>,
    /// Operator at each support point, in real coordinates of `ℝ^{2d}`.
    #[serde(serialize_with = "serialize_operators")]
    pub operators: Vec<DifferentialOperator>,
    pub rank_used: usize,
    pub singular_values: Vec<f64>,
    pub moment_residual: f64,
    #[serde(serialize_with = "serialize_unis")]
    pub stage_polynomials: Vec<UniPolynomial>,
    /// Random unitary changes of coordinates that were needed.
    pub retries: usize,
}

fn serialize_operators<S: serde::Serializer>(ops: &[DifferentialOperator], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(ops.len()))?;
    for op in ops {
        let terms: Vec<(Vec<u32>, Complex64)> = op.terms().map(|(g, c)| (g.exponents().to_vec(), *c)).collect();
        seq.serialize_element(&terms)?;
    }
    seq.end()
}

fn serialize_unis<S: serde::Serializer>(hs: &[UniPolynomial], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(hs.len()))?;
    for h in hs {
        seq.serialize_element(h.coefficients())?;
    }
    seq.end()
}

impl RecoveryReport {
    pub fn dim(&self) -> usize {
        self.support.first().map_or(0, Vec::len)
    }

    /// Zeroth-order coefficient at each point (the mass, for measures).
    pub fn masses(&self) -> Vec<Complex64> {
        self.operators.iter().map(|o| o.symbol().constant_term()).collect()
    }

    /// True when every operator is a multiple of the identity.
    pub fn is_atomic(&self) -> bool {
        self.operators.iter().all(|o| o.order() == 0)
    }

    /// The reconstructed weight `Σ L_q δ(· − x_q)`.
    pub fn to_weight(&self, dim: usize) -> Result<Weight> {
        let points = self.support.iter().map(|z| encode_complex(z)).collect();
        if self.is_atomic() {
            Weight::atomic(Ambient::complex(dim), points, self.masses())
        } else {
            Weight::point_distribution(Ambient::complex(dim), points, self.operators.clone())
        }
    }
}

/// Support candidate with the derivative order searched there.
#[derive(Clone, Debug)]
struct Candidate {
    point: Vec<Complex64>,
    order: u32,
    /// Size of the root cluster the point came from; `1` for simple roots
    /// and grid points.
    mult: u32,
}

fn dist(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

fn merge_candidate(list: &mut Vec<Candidate>, c: Candidate, tol: f64) {
    match list.iter_mut().find(|q| dist(&q.point, &c.point) <= tol) {
        Some(q) => {
            q.order = q.order.max(c.order);
            q.mult = q.mult.max(c.mult);
        }
        None => list.push(c),
    }
}

/// Relative accuracy assumed for the coefficients of `h` when deciding
/// whether nearby roots come from one multiple root.
const ROOT_COEFF_EPS: f64 = 1e-12;

/// Groups roots into clusters and returns each cluster's mean with its
/// multiplicity.
///
/// A `k`-fold root of a perturbed polynomial splits by about `ε^{1/k}`, so
/// a cluster of size `k` may have radius up to `max(tol, 10·ε^{1/k})`.
/// Multiplicities are tried from the largest down; the mean of a cluster is
/// well conditioned even when its members are not.
fn cluster_roots(roots: &[Complex64], tol: f64) -> Vec<(Complex64, u32)> {
    let reach = |k: usize| tol.max(10.0 * ROOT_COEFF_EPS.powf(1.0 / k as f64));
    let mut left: Vec<Complex64> = roots.to_vec();
    let mut out = Vec::new();
    for k in (1..=roots.len()).rev() {
        let link = 2.0 * reach(k);
        let mut rest = Vec::new();
        let mut pool = std::mem::take(&mut left);
        while let Some(seed) = pool.pop() {
            let mut group = vec![seed];
            let mut i = 0;
            while i < group.len() {
                let g = group[i];
                let (near, far): (Vec<_>, Vec<_>) = pool.into_iter().partition(|r| (r - g).norm() <= link);
                pool = far;
                group.extend(near);
                i += 1;
            }
            let mean = group.iter().sum::<Complex64>() / group.len() as f64;
            let radius = group.iter().map(|r| (r - mean).norm()).fold(0.0, f64::max);
            if group.len() >= k && radius <= reach(group.len()) {
                out.push((mean, group.len() as u32));
            } else {
                rest.extend(group);
            }
        }
        left = rest;
    }
    out
}

/// Runs the reduction loop and returns candidates plus stage polynomials.
fn stage_loop<F>(
    oracle: &F,
    m_bound: usize,
    order_bound: u32,
    cfg: &RecoveryConfig,
) -> Result<(Vec<Candidate>, Vec<UniPolynomial>)>
where
    F: Fn(usize, usize) -> Result<Complex64>,
{
    let stages = order_bound as usize + 1;
    let k_rows = 2 * m_bound;
    let l_cols = (stages + 1) * (m_bound + 1);
    let mut table = MomentTable::from_fn(k_rows, l_cols, oracle)?;
    let scale = table.max_abs();
    let mut candidates = Vec::new();
    let mut polys = Vec::new();
    if scale == 0.0 {
        return Ok((candidates, polys));
    }
    for _ in 0..stages {
        if table.max_abs() < cfg.null_table_tol * scale || table.l_cols() < m_bound {
            break;
        }
        let Some((h, _)) = find_null(&table, m_bound, cfg.null_tol)? else {
            break;
        };
        for (root, mult) in cluster_roots(&h.roots(), cfg.cluster_tol) {
            merge_candidate(
                &mut candidates,
                Candidate {
                    point: vec![root.conj()],
                    order: mult - 1 + order_bound,
                    mult,
                },
                cfg.cluster_tol,
            );
        }
        let deg = h.degree().unwrap_or(0);
        polys.push(h.clone());
        if table.l_cols() + 1 < deg + 2 {
            break;
        }
        table = reduce_moments(&table, &h)?;
    }
    Ok((candidates, polys))
}

/// Wirtinger exponent pairs `(a, b)` over `ℂ^d` with `|a| + |b| ≤ order`.
fn wirtinger_indices(d: usize, order: u32) -> Vec<(MultiIndex, MultiIndex)> {
    MultiIndex::up_to_degree(2 * d, order)
        .into_iter()
        .map(|g| g.split(d))
        .collect()
}

/// `D^a D̄^b (z^α z̄^β)` at `q`.
fn derivative_monomial(a: &MultiIndex, b: &MultiIndex, alpha: &MultiIndex, beta: &MultiIndex, q: &[Complex64]) -> Complex64 {
    let mut v = Complex64::new(1.0, 0.0);
    for j in 0..q.len() {
        let (aj, bj) = (a.exponents()[j], b.exponents()[j]);
        let (al, be) = (alpha.exponents()[j], beta.exponents()[j]);
        if aj > al || bj > be {
            return Complex64::default();
        }
        v *= falling_factorial(al, aj) * falling_factorial(be, bj);
        v *= q[j].powu(al - aj) * q[j].conj().powu(be - bj);
    }
    v
}

struct Fit {
    operators: Vec<BiPolynomial>,
    residual: f64,
}

/// Design matrix of the Wirtinger operators at the candidates against the
/// moment box over `idx`, one column per `(candidate, term)`.
fn design_matrix(d: usize, candidates: &[Candidate], idx: &[MultiIndex]) -> (CMatrix, Vec<Vec<(MultiIndex, MultiIndex)>>) {
    let n = idx.len();
    let layout: Vec<Vec<(MultiIndex, MultiIndex)>> = candidates.iter().map(|c| wirtinger_indices(d, c.order)).collect();
    let unknowns: usize = layout.iter().map(Vec::len).sum();
    let mut design = CMatrix::zeros(n * n, unknowns);
    let mut col = 0;
    for (c, terms) in candidates.iter().zip(&layout) {
        for (ea, eb) in terms {
            for (i, alpha) in idx.iter().enumerate() {
                for (j, beta) in idx.iter().enumerate() {
                    design[(i * n + j, col)] = derivative_monomial(ea, eb, alpha, beta, &c.point);
                }
            }
            col += 1;
        }
    }
    (design, layout)
}

fn box_vector(a: &CMatrix) -> CVector {
    let n = a.nrows();
    CVector::from_iterator(n * n, (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| a[(i, j)]))
}

/// Least-squares fit of Wirtinger operators at the candidates against the
/// moment box `A` (rows `z^α`, columns `z̄^β` over `idx`).
fn fit(d: usize, candidates: &[Candidate], idx: &[MultiIndex], a: &CMatrix) -> Fit {
    let rhs = box_vector(a);
    let (design, layout) = design_matrix(d, candidates, idx);
    let x = linalg::least_squares(&design, &rhs);
    let residual = relative_residual(&(&design * &x), &rhs);
    let mut operators = Vec::with_capacity(candidates.len());
    let mut col = 0;
    for terms in &layout {
        let op = BiPolynomial::from_terms(
            d,
            terms.iter().map(|(ea, eb)| {
                let v = x[col];
                col += 1;
                (ea.clone(), eb.clone(), v)
            }),
        );
        operators.push(op);
    }
    Fit { operators, residual }
}

/// Moves the candidate points to minimise the least-squares moment
/// residual with the operator coefficients eliminated (variable
/// projection), by Levenberg–Marquardt on the real coordinates with a
/// central-difference Jacobian.
///
/// Cluster means of multiple roots are only as accurate as the annihilator,
/// and a fit at a slightly wrong point absorbs the error into spurious
/// higher-order terms; this polishes the points at the intended order.
fn refine_points(d: usize, candidates: &[Candidate], free: &[usize], idx: &[MultiIndex], a: &CMatrix) -> Vec<Candidate> {
    let rhs = box_vector(a);
    let scale = rhs.norm();
    if scale == 0.0 || free.is_empty() {
        return candidates.to_vec();
    }
    let residual_vec = |cands: &[Candidate]| -> DVector<f64> {
        let (design, _) = design_matrix(d, cands, idx);
        let x = linalg::least_squares(&design, &rhs);
        let r = (&design * &x - &rhs).unscale(scale);
        DVector::from_iterator(2 * r.len(), r.iter().flat_map(|c| [c.re, c.im]))
    };
    let params = 2 * d * free.len();
    let set = |cands: &mut [Candidate], k: usize, v: f64| {
        let z = &mut cands[free[k / (2 * d)]].point[(k / 2) % d];
        if k % 2 == 0 {
            z.re = v;
        } else {
            z.im = v;
        }
    };
    let get = |cands: &[Candidate], k: usize| {
        let z = cands[free[k / (2 * d)]].point[(k / 2) % d];
        if k % 2 == 0 {
            z.re
        } else {
            z.im
        }
    };
    let mut current = candidates.to_vec();
    let mut r = residual_vec(&current);
    let mut cost = r.norm_squared();
    let mut lambda = 1e-3;
    const STEP: f64 = 1e-6;
    for _ in 0..30 {
        let mut jac = DMatrix::<f64>::zeros(r.len(), params);
        for k in 0..params {
            let base = get(&current, k);
            let mut plus = current.clone();
            set(&mut plus, k, base + STEP);
            let mut minus = current.clone();
            set(&mut minus, k, base - STEP);
            let col = (residual_vec(&plus) - residual_vec(&minus)) / (2.0 * STEP);
            jac.set_column(k, &col);
        }
        let jtj = jac.transpose() * &jac;
        let jtr = jac.transpose() * &r;
        let mut improved = false;
        for _ in 0..10 {
            let mut damped = jtj.clone();
            for k in 0..params {
                damped[(k, k)] += lambda * jtj[(k, k)].max(1e-300);
            }
            let Some(delta) = damped.lu().solve(&(-&jtr)) else {
                lambda *= 10.0;
                continue;
            };
            let mut trial = current.clone();
            for k in 0..params {
                set(&mut trial, k, get(&current, k) + delta[k]);
            }
            let rt = residual_vec(&trial);
            let ct = rt.norm_squared();
            if ct < cost {
                let step = delta.norm();
                current = trial;
                r = rt;
                cost = ct;
                lambda = (lambda / 10.0).max(1e-12);
                improved = step > 1e-15;
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    current
}

fn relative_residual(model: &CVector, data: &CVector) -> f64 {
    let den = data.norm();
    let num = (model - data).norm();
    if den == 0.0 {
        if num == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        num / den
    }
}

/// Fit, prune negligible candidates and tiny terms, refit.
fn fit_and_prune(
    d: usize,
    candidates: Vec<Candidate>,
    idx: &[MultiIndex],
    a: &CMatrix,
    cfg: &RecoveryConfig,
) -> (Vec<Candidate>, Fit) {
    let first = fit(d, &candidates, idx, a);
    let norms: Vec<f64> = first.operators.iter().map(|o| o.as_sparse().coefficient_norm()).collect();
    let top = norms.iter().copied().fold(0.0, f64::max);
    let mut kept: Vec<Candidate> = candidates
        .into_iter()
        .zip(&norms)
        .filter(|(_, &n)| n > cfg.prune_rel * top)
        .map(|(c, _)| c)
        .collect();
    let mut current = fit(d, &kept, idx, a);
    // drop the weakest candidate while that does not hurt the fit
    loop {
        if kept.len() <= 1 {
            break;
        }
        let (weakest, _) = current
            .operators
            .iter()
            .enumerate()
            .map(|(i, o)| (i, o.as_sparse().coefficient_norm()))
            .fold((0, f64::MAX), |acc, x| if x.1 < acc.1 { x } else { acc });
        let mut trial = kept.clone();
        trial.remove(weakest);
        let refit = fit(d, &trial, idx, a);
        if refit.residual <= (4.0 * current.residual).max(1e-13) {
            kept = trial;
            current = refit;
        } else {
            break;
        }
    }
    (kept, current)
}

/// Drops operator terms below `rel` times the largest coefficient overall.
fn clean_terms(ops: &[BiPolynomial], rel: f64) -> Vec<BiPolynomial> {
    let top = ops.iter().map(|o| o.as_sparse().max_abs_coefficient()).fold(0.0, f64::max);
    ops.iter()
        .map(|o| BiPolynomial::from_terms(o.dim(), o.terms().filter(|(_, _, c)| c.norm() > rel * top)))
        .collect()
}

/// Moment box `⟨W, z^α z̄^β⟩`, `|α|, |β| ≤ m`, from a multi-index oracle.
fn moment_box<F>(d: usize, m: u32, oracle: &F) -> Result<(Vec<MultiIndex>, CMatrix)>
where
    F: Fn(&MultiIndex, &MultiIndex) -> Result<Complex64>,
{
    let idx = MultiIndex::up_to_degree(d, m);
    let mut a = CMatrix::zeros(idx.len(), idx.len());
    for (i, alpha) in idx.iter().enumerate() {
        for (j, beta) in idx.iter().enumerate() {
            a[(i, j)] = oracle(alpha, beta)?;
        }
    }
    Ok((idx, a))
}

/// Fits the candidates against `W`'s moments and assembles the report.
fn finish<F>(
    d: usize,
    candidates: Vec<Candidate>,
    polys: Vec<UniPolynomial>,
    m_bound: usize,
    order_bound: u32,
    oracle: &F,
    cfg: &RecoveryConfig,
    retries: usize,
) -> Result<RecoveryReport>
where
    F: Fn(&MultiIndex, &MultiIndex) -> Result<Complex64>,
{
    let unknowns: usize = candidates.iter().map(|c| wirtinger_indices(d, c.order).len()).sum();
    // enlarge the box if the candidate set would leave the fit underdetermined
    let mut m = 2 * m_bound as u32;
    while MultiIndex::up_to_degree(d, m).len().pow(2) < unknowns {
        m += 1;
    }
    let (idx, a) = moment_box(d, m, oracle)?;
    let (rank_used, singular_values) = matrix_rank(&a, DEFAULT_RANK_EPS)?;
    let (mut kept, fitted) = fit_and_prune(d, candidates, &idx, &a, cfg);
    let mut cleaned = clean_terms(&fitted.operators, 1e-11);
    let mut model_residual = residual_of(&kept, &cleaned, &idx, &a);
    // excess order signals that a cluster mean is slightly off
    let free: Vec<usize> = (0..kept.len()).filter(|&i| kept[i].mult > 1).collect();
    if !free.is_empty() && cleaned.iter().any(|o| o.as_sparse().degree().is_some_and(|g| g > order_bound)) {
        for extra in 0..=order_bound {
            let trial: Vec<Candidate> = kept
                .iter()
                .map(|c| Candidate {
                    point: c.point.clone(),
                    order: if c.mult > 1 { (c.mult - 1 + extra).min(order_bound.max(c.mult - 1)) } else { order_bound },
                    mult: c.mult,
                })
                .collect();
            let polished = refine_points(d, &trial, &free, &idx, &a);
            let refit = fit(d, &polished, &idx, &a);
            let refit_ops = clean_terms(&refit.operators, 1e-11);
            let refit_residual = residual_of(&polished, &refit_ops, &idx, &a);
            if refit_residual <= model_residual.max(1e-10) {
                kept = polished;
                cleaned = refit_ops;
                model_residual = refit_residual;
                break;
            }
        }
    }
    let model = Fit {
        residual: model_residual,
        operators: cleaned,
    };
    if !(model.residual <= cfg.residual_tol) {
        return Err(Error::RecoveryFailed { residual: model.residual });
    }
    let mut order: Vec<usize> = (0..kept.len()).collect();
    order.sort_by(|&i, &j| {
        let (p, q) = (&kept[i].point, &kept[j].point);
        p.iter()
            .zip(q)
            .map(|(x, y)| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(RecoveryReport {
        support: order.iter().map(|&i| kept[i].point.clone()).collect(),
        operators: order
            .iter()
            .map(|&i| DifferentialOperator::from_wirtinger(&model.operators[i]))
            .collect(),
        rank_used,
        singular_values,
        moment_residual: model.residual,
        stage_polynomials: polys,
        retries,
    })
}

fn residual_of(cands: &[Candidate], ops: &[BiPolynomial], idx: &[MultiIndex], a: &CMatrix) -> f64 {
    let n = idx.len();
    let mut model = CVector::zeros(n * n);
    let mut data = CVector::zeros(n * n);
    for (i, alpha) in idx.iter().enumerate() {
        for (j, beta) in idx.iter().enumerate() {
            let mut v = Complex64::default();
            for (c, op) in cands.iter().zip(ops) {
                for (ea, eb, coef) in op.terms() {
                    v += coef * derivative_monomial(&ea, &eb, alpha, beta, &c.point);
                }
            }
            model[i * n + j] = v;
            data[i * n + j] = a[(i, j)];
        }
    }
    relative_residual(&model, &data)
}

fn require_c1(w: &Weight) -> Result<()> {
    if w.ambient().kind != SpaceKind::Complex {
        return Err(Error::AmbientMismatch(format!("recovery needs a complex ambient, weight lives in {}", w.ambient())));
    }
    check_dim(1, w.ambient().dim)
}

/// Recovers `F = Σ L_q δ(z − z_q)` over `ℂ¹` with at most `m_bound`
/// annihilator degree and derivative order at most `order_bound`.
pub fn recover_1d(w: &Weight, m_bound: usize, order_bound: u32) -> Result<RecoveryReport> {
    recover_1d_with(w, m_bound, order_bound, &RecoveryConfig::default())
}

pub fn recover_1d_with(w: &Weight, m_bound: usize, order_bound: u32, cfg: &RecoveryConfig) -> Result<RecoveryReport> {
    require_c1(w)?;
    if m_bound < 1 {
        return Err(Error::InvalidArgument("m_bound must be at least 1".into()));
    }
    let oracle = |k: usize, l: usize| w.bi_moment(&mi1(k), &mi1(l));
    let (candidates, polys) = stage_loop(&oracle, m_bound, order_bound, cfg)?;
    finish(1, candidates, polys, m_bound, order_bound, &|a: &MultiIndex, b: &MultiIndex| w.bi_moment(a, b), cfg, 0)
}

/// Recovery over `ℂ^d`, `d ≥ 2`: 1-D recovery of each coordinate marginal,
/// a least-squares fit on the candidate grid, and up to
/// `cfg.max_retries` random unitary changes of coordinates when
/// projections collide.
pub fn recover_multid(w: &Weight, m_bound: usize, order_bound: u32) -> Result<RecoveryReport> {
    recover_multid_with(w, m_bound, order_bound, &RecoveryConfig::default())
}

pub fn recover_multid_with(w: &Weight, m_bound: usize, order_bound: u32, cfg: &RecoveryConfig) -> Result<RecoveryReport> {
    if w.ambient().kind != SpaceKind::Complex {
        return Err(Error::AmbientMismatch(format!("recovery needs a complex ambient, weight lives in {}", w.ambient())));
    }
    let d = w.ambient().dim;
    if d < 2 {
        return Err(Error::InvalidArgument("multi-dimensional recovery needs d >= 2".into()));
    }
    if m_bound < 1 {
        return Err(Error::InvalidArgument("m_bound must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut last_residual = f64::INFINITY;
    for attempt in 0..=cfg.max_retries {
        let (frame, u) = if attempt == 0 {
            (w.clone(), None)
        } else {
            let u = linalg::random_unitary(d, &mut rng);
            match w.transform_unitary(&linalg::to_rows(&u)) {
                Ok(moved) => (moved, Some(u)),
                Err(Error::Unsupported(_)) => break,
                Err(e) => return Err(e),
            }
        };
        let grid = match candidate_grid(&frame, m_bound, order_bound, cfg) {
            Ok(g) => g,
            Err(Error::RecoveryFailed { residual }) => {
                last_residual = residual;
                continue;
            }
            Err(e) => return Err(e),
        };
        let grid: Vec<Candidate> = match &u {
            None => grid,
            Some(u) => {
                let uh = u.adjoint();
                grid.into_iter()
                    .map(|c| {
                        let p = &uh * CVector::from_vec(c.point);
                        Candidate {
                            point: p.iter().copied().collect(),
                            order: c.order,
                            mult: 1,
                        }
                    })
                    .collect()
            }
        };
        match finish(d, grid, Vec::new(), m_bound, order_bound, &|a: &MultiIndex, b: &MultiIndex| w.bi_moment(a, b), cfg, attempt) {
            Ok(report) => return Ok(report),
            Err(Error::RecoveryFailed { residual }) => last_residual = residual,
            Err(e) => return Err(e),
        }
    }
    Err(Error::RecoveryFailed { residual: last_residual })
}

/// Cartesian product of the per-coordinate 1-D supports.
fn candidate_grid(w: &Weight, m_bound: usize, order_bound: u32, cfg: &RecoveryConfig) -> Result<Vec<Candidate>> {
    let d = w.ambient().dim;
    let mut axes: Vec<Vec<(Complex64, u32)>> = Vec::with_capacity(d);
    for j in 0..d {
        let oracle = |k: usize, l: usize| w.bi_moment(&MultiIndex::unit(d, j, k as u32), &MultiIndex::unit(d, j, l as u32));
        let (cands, polys) = stage_loop(&oracle, m_bound, order_bound, cfg)?;
        let marginal = |a: &MultiIndex, b: &MultiIndex| {
            w.bi_moment(
                &MultiIndex::unit(d, j, a.exponents()[0]),
                &MultiIndex::unit(d, j, b.exponents()[0]),
            )
        };
        let report = finish(1, cands, polys, m_bound, order_bound, &marginal, cfg, 0)?;
        axes.push(
            report
                .support
                .iter()
                .zip(&report.operators)
                .map(|(p, o)| (p[0], o.order()))
                .collect(),
        );
    }
    let mut grid = vec![Candidate {
        point: Vec::new(),
        order: order_bound,
        mult: 1,
    }];
    for axis in &axes {
        let mut next = Vec::with_capacity(grid.len() * axis.len());
        for g in &grid {
            for &(z, o) in axis {
                let mut point = g.point.clone();
                point.push(z);
                next.push(Candidate {
                    point,
                    order: g.order.max(o),
                    mult: 1,
                });
            }
        }
        grid = next;
    }
    Ok(grid)
}

/// Cauchy transform `G(z) = ⟨W, 1/(π(z − w))⟩` of a weight over `ℂ¹`.
pub fn cauchy_transform(w: &Weight, z: Complex64) -> Result<Complex64> {
    require_c1(w)?;
    const NEAR: f64 = 1e-6;
    let pi = std::f64::consts::PI;
    let check = |p: Complex64| -> Result<()> {
        let dz = (z - p).norm();
        if dz <= NEAR {
            Err(Error::NearSupport { distance: dz })
        } else {
            Ok(())
        }
    };
    match w.body() {
        WeightBody::Atomic { points, masses } => {
            let mut acc = Complex64::default();
            for (x, c) in points.iter().zip(masses) {
                let p = decode_complex(x)[0];
                check(p)?;
                acc += c / (pi * (z - p));
            }
            Ok(acc)
        }
        WeightBody::PointDistribution { points, operators } => {
            // 1/(z − w) is holomorphic in w: D̄ kills it, D^a gives a!/(z − w)^{a+1}
            let mut acc = Complex64::default();
            for (x, op) in points.iter().zip(operators) {
                let p = decode_complex(x)[0];
                check(p)?;
                for (a, b, c) in op.to_wirtinger()?.terms() {
                    if b.is_zero() {
                        let k = a.exponents()[0];
                        acc += c * a.factorial() / (pi * (z - p).powu(k + 1));
                    }
                }
            }
            Ok(acc)
        }
        WeightBody::Density { bounds, nodes, .. } => {
            let dx = (bounds[0].0 - z.re).max(z.re - bounds[0].1).max(0.0);
            let dy = (bounds[1].0 - z.im).max(z.im - bounds[1].1).max(0.0);
            check(z - Complex64::new(dx.hypot(dy), 0.0))?;
            let mut acc = Complex64::default();
            for (x, c) in nodes.points.iter().zip(&nodes.weights) {
                acc += c / (pi * (z - Complex64::new(x[0], x[1])));
            }
            Ok(acc)
        }
        WeightBody::FourierRadial { .. } => Err(Error::Unsupported("Cauchy transform")),
    }
}
