//! Compactly supported weights and the pairing `⟨F, p⟩`.
//!
//! Four families are supported: finite atomic measures, point-supported
//! distributions `Σ L_q δ(x − x_q)`, quadrature-backed densities on a box and
//! radial distributions given through the Taylor series of their Fourier
//! transform.
//!
//! Complex points are stored as real vectors of length `2d` with
//! `z_j = x_{2j−1} + i x_{2j}`. Differential operators always act in these
//! real coordinates; Wirtinger derivatives are expressed through them.
//!
//! The Fourier transform is normalized as `𝓕W(ξ) = ⟨W, e^{−i x·ξ}⟩`, hence
//! `⟨W, x^γ⟩ = i^{|γ|} ∂^γ(𝓕W)(0)`. This normalization is a convention of
//! this crate; the radial moment formula and the atom-mass functionals in
//! [`crate::wiener`] both depend on it.

use crate::error::{check_dim, Error, Result};
use crate::polyalg::{falling_factorial, factorial, BiPolynomial, MultiIndex, RealPolynomial};
use crate::quadrature;
use num_complex::Complex64;
use std::fmt;
use std::sync::Arc;

/// Default tensor Gauss–Legendre order per axis for densities.
pub const DEFAULT_QUADRATURE_ORDER: usize = 64;

/// Absolute distance under which projected atoms are merged.
pub const COLLISION_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpaceKind {
    Complex,
    Real,
}

/// Ambient space of a weight: `ℂ^d` or `ℝ^d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Ambient {
    pub kind: SpaceKind,
    pub dim: usize,
}

impl Ambient {
    pub fn complex(dim: usize) -> Self {
        Ambient {
            kind: SpaceKind::Complex,
            dim,
        }
    }

    pub fn real(dim: usize) -> Self {
        Ambient {
            kind: SpaceKind::Real,
            dim,
        }
    }

    /// Length of the real coordinate vectors.
    pub fn real_dim(&self) -> usize {
        match self.kind {
            SpaceKind::Complex => 2 * self.dim,
            SpaceKind::Real => self.dim,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::InvalidArgument("ambient dimension must be at least 1".into()));
        }
        Ok(())
    }
}

impl fmt::Display for Ambient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            SpaceKind::Complex => write!(f, "C^{}", self.dim),
            SpaceKind::Real => write!(f, "R^{}", self.dim),
        }
    }
}

/// Constant-coefficient operator `Σ c_γ ∂^γ` in real coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct DifferentialOperator {
    symbol: RealPolynomial,
}

impl DifferentialOperator {
    pub fn new<I>(dim: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (MultiIndex, Complex64)>,
    {
        DifferentialOperator {
            symbol: RealPolynomial::from_terms(dim, terms),
        }
    }

    /// `c · id`.
    pub fn identity(dim: usize, c: Complex64) -> Self {
        DifferentialOperator::new(dim, [(MultiIndex::zeros(dim), c)])
    }

    /// Single-term operator `c ∂^γ`.
    pub fn partial(gamma: MultiIndex, c: Complex64) -> Self {
        let dim = gamma.len();
        DifferentialOperator::new(dim, [(gamma, c)])
    }

    pub fn from_symbol(symbol: RealPolynomial) -> Self {
        DifferentialOperator { symbol }
    }

    /// Wirtinger operator `Σ c D^α D̄^β` rewritten in real coordinates.
    pub fn from_wirtinger(op: &BiPolynomial) -> Self {
        DifferentialOperator {
            symbol: op.to_real_operator(),
        }
    }

    pub fn symbol(&self) -> &RealPolynomial {
        &self.symbol
    }

    pub fn dim(&self) -> usize {
        self.symbol.dim()
    }

    pub fn is_zero(&self) -> bool {
        self.symbol.is_zero()
    }

    /// `max |γ|` over stored terms; 0 for the zero operator.
    pub fn order(&self) -> u32 {
        self.symbol.degree().unwrap_or(0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Complex64)> {
        self.symbol.terms()
    }

    pub fn coefficient_norm(&self) -> f64 {
        self.symbol.as_sparse().coefficient_norm()
    }

    pub fn scale(&self, c: Complex64) -> Self {
        DifferentialOperator {
            symbol: self.symbol.scale(c),
        }
    }

    pub fn add(&self, other: &DifferentialOperator) -> Result<Self> {
        Ok(DifferentialOperator {
            symbol: self.symbol.add(&other.symbol)?,
        })
    }

    /// Wirtinger form over `ℂ^{dim/2}`.
    pub fn to_wirtinger(&self) -> Result<BiPolynomial> {
        BiPolynomial::from_real_operator(&self.symbol)
    }

    /// `(Lp)(x)` by exact differentiation.
    pub fn apply(&self, p: &RealPolynomial, x: &[f64]) -> Result<Complex64> {
        check_dim(self.dim(), p.dim())?;
        check_dim(self.dim(), x.len())?;
        self.symbol.apply_diff(p)?.eval(x)
    }

    /// Drops terms whose coefficient is below `rel · max |c_γ|`.
    pub fn pruned(&self, rel: f64) -> Self {
        let top = self.symbol.as_sparse().max_abs_coefficient();
        DifferentialOperator::new(
            self.dim(),
            self.terms()
                .filter(|(_, c)| c.norm() > rel * top)
                .map(|(k, c)| (k.clone(), *c)),
        )
    }
}

/// `(Lp)(x)` for a real-coordinate polynomial.
pub fn apply_operator(op: &DifferentialOperator, p: &RealPolynomial, x: &[f64]) -> Result<Complex64> {
    op.apply(p, x)
}

/// Density evaluation contract `x ↦ ρ(x)`. Implementations must be
/// re-entrant.
#[derive(Clone)]
pub enum DensityFn {
    /// Constant value on the box.
    Uniform { value: Complex64 },
    /// `amplitude · exp(−|x − center|² / width²)`.
    Gaussian {
        center: Vec<f64>,
        width: f64,
        amplitude: Complex64,
    },
    Custom(Arc<dyn Fn(&[f64]) -> Complex64 + Send + Sync>),
}

impl DensityFn {
    pub fn eval(&self, x: &[f64]) -> Complex64 {
        match self {
            DensityFn::Uniform { value } => *value,
            DensityFn::Gaussian {
                center,
                width,
                amplitude,
            } => {
                let r2: f64 = x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum();
                amplitude * (-r2 / (width * width)).exp()
            }
            DensityFn::Custom(f) => f(x),
        }
    }
}

impl fmt::Debug for DensityFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DensityFn::Uniform { value } => f.debug_struct("Uniform").field("value", value).finish(),
            DensityFn::Gaussian {
                center,
                width,
                amplitude,
            } => f
                .debug_struct("Gaussian")
                .field("center", center)
                .field("width", width)
                .field("amplitude", amplitude)
                .finish(),
            DensityFn::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// Precomputed tensor quadrature: points with `weight · ρ(point)`.
#[derive(Clone, Debug)]
pub struct DensityNodes {
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<Complex64>,
}

#[derive(Clone, Debug)]
pub enum WeightBody {
    Atomic {
        points: Vec<Vec<f64>>,
        masses: Vec<Complex64>,
    },
    PointDistribution {
        points: Vec<Vec<f64>>,
        operators: Vec<DifferentialOperator>,
    },
    Density {
        bounds: Vec<(f64, f64)>,
        density: DensityFn,
        quadrature_order: usize,
        nodes: Arc<DensityNodes>,
    },
    /// `𝓕F(ξ) = Σ_{k ≤ K} a_k |ξ|^{2k}`; `series[k] = a_k`.
    FourierRadial { series: Vec<f64>, validity_radius: f64 },
}

/// A compactly supported weight over an [`Ambient`] space.
#[derive(Clone, Debug)]
pub struct Weight {
    ambient: Ambient,
    body: WeightBody,
    /// Wirtinger forms of the operators, for complex point distributions.
    wirtinger: Vec<BiPolynomial>,
}

fn check_points(ambient: &Ambient, points: &[Vec<f64>]) -> Result<()> {
    let n = ambient.real_dim();
    for p in points {
        check_dim(n, p.len())?;
        if p.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("non-finite point coordinate".into()));
        }
    }
    Ok(())
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Merges points closer than `tol`, summing their masses, and drops masses
/// that cancel to rounding level.
pub(crate) fn merge_atoms(points: Vec<Vec<f64>>, masses: Vec<Complex64>, tol: f64) -> (Vec<Vec<f64>>, Vec<Complex64>) {
    let mut out_p: Vec<Vec<f64>> = Vec::new();
    let mut out_m: Vec<Complex64> = Vec::new();
    let mut magnitude: Vec<f64> = Vec::new();
    for (p, m) in points.into_iter().zip(masses) {
        match out_p.iter().position(|q| distance(q, &p) <= tol) {
            Some(i) => {
                out_m[i] += m;
                magnitude[i] += m.norm();
            }
            None => {
                out_p.push(p);
                out_m.push(m);
                magnitude.push(m.norm());
            }
        }
    }
    let keep: Vec<bool> = out_m
        .iter()
        .zip(&magnitude)
        .map(|(m, s)| m.norm() > 4.0 * f64::EPSILON * s)
        .collect();
    let mut it = keep.iter();
    out_p.retain(|_| *it.next().unwrap());
    let mut it = keep.iter();
    out_m.retain(|_| *it.next().unwrap());
    (out_p, out_m)
}

fn merge_operators(
    points: Vec<Vec<f64>>,
    operators: Vec<DifferentialOperator>,
    tol: f64,
) -> Result<(Vec<Vec<f64>>, Vec<DifferentialOperator>)> {
    let mut out_p: Vec<Vec<f64>> = Vec::new();
    let mut out_o: Vec<DifferentialOperator> = Vec::new();
    for (p, o) in points.into_iter().zip(operators) {
        match out_p.iter().position(|q| distance(q, &p) <= tol) {
            Some(i) => out_o[i] = out_o[i].add(&o)?,
            None => {
                out_p.push(p);
                out_o.push(o);
            }
        }
    }
    let keep: Vec<bool> = out_o.iter().map(|o| !o.is_zero()).collect();
    let mut it = keep.iter();
    out_p.retain(|_| *it.next().unwrap());
    out_o.retain(|o| !o.is_zero());
    Ok((out_p, out_o))
}

impl Weight {
    /// Validating constructor for any family.
    pub fn from_body(ambient: Ambient, body: WeightBody) -> Result<Self> {
        ambient.validate()?;
        let body = match body {
            WeightBody::Atomic { points, masses } => {
                if points.len() != masses.len() {
                    return Err(Error::InvalidArgument(format!(
                        "{} points but {} masses",
                        points.len(),
                        masses.len()
                    )));
                }
                check_points(&ambient, &points)?;
                let (points, masses) = merge_atoms(points, masses, 0.0);
                WeightBody::Atomic { points, masses }
            }
            WeightBody::PointDistribution { points, operators } => {
                if points.len() != operators.len() {
                    return Err(Error::InvalidArgument(format!(
                        "{} points but {} operators",
                        points.len(),
                        operators.len()
                    )));
                }
                check_points(&ambient, &points)?;
                for op in &operators {
                    check_dim(ambient.real_dim(), op.dim())?;
                }
                let (points, operators) = merge_operators(points, operators, 0.0)?;
                WeightBody::PointDistribution { points, operators }
            }
            WeightBody::Density {
                bounds,
                density,
                quadrature_order,
                ..
            } => {
                check_dim(ambient.real_dim(), bounds.len())?;
                if quadrature_order < 1 {
                    return Err(Error::InvalidArgument("quadrature order must be at least 1".into()));
                }
                if bounds.iter().any(|(a, b)| !(b > a) || !a.is_finite() || !b.is_finite()) {
                    return Err(Error::InvalidArgument("density box must have positive volume".into()));
                }
                let axes: Vec<Vec<(f64, f64)>> = bounds
                    .iter()
                    .map(|&(a, b)| quadrature::gauss_legendre_on(a, b, quadrature_order))
                    .collect();
                let rule = quadrature::tensor_rule(&axes);
                let weights = rule.iter().map(|(x, w)| density.eval(x) * *w).collect();
                let points = rule.into_iter().map(|(x, _)| x).collect();
                WeightBody::Density {
                    bounds,
                    density,
                    quadrature_order,
                    nodes: Arc::new(DensityNodes { points, weights }),
                }
            }
            WeightBody::FourierRadial {
                series,
                validity_radius,
            } => {
                if series.is_empty() {
                    return Err(Error::InvalidArgument("radial series needs at least one coefficient".into()));
                }
                if !(validity_radius >= 0.0) {
                    return Err(Error::InvalidArgument("validity radius must be nonnegative".into()));
                }
                WeightBody::FourierRadial {
                    series,
                    validity_radius,
                }
            }
        };
        let wirtinger = match (&body, ambient.kind) {
            (WeightBody::PointDistribution { operators, .. }, SpaceKind::Complex) => operators
                .iter()
                .map(DifferentialOperator::to_wirtinger)
                .collect::<Result<_>>()?,
            _ => Vec::new(),
        };
        Ok(Weight {
            ambient,
            body,
            wirtinger,
        })
    }

    pub fn atomic(ambient: Ambient, points: Vec<Vec<f64>>, masses: Vec<Complex64>) -> Result<Self> {
        Weight::from_body(ambient, WeightBody::Atomic { points, masses })
    }

    /// Atomic weight over `ℂ^d` from complex points.
    pub fn complex_atoms(points: &[Vec<Complex64>], masses: &[Complex64]) -> Result<Self> {
        let d = points.first().map_or(1, Vec::len);
        let real = points.iter().map(|z| encode_complex(z)).collect();
        Weight::atomic(Ambient::complex(d), real, masses.to_vec())
    }

    pub fn point_distribution(
        ambient: Ambient,
        points: Vec<Vec<f64>>,
        operators: Vec<DifferentialOperator>,
    ) -> Result<Self> {
        Weight::from_body(ambient, WeightBody::PointDistribution { points, operators })
    }

    pub fn density(ambient: Ambient, bounds: Vec<(f64, f64)>, density: DensityFn, quadrature_order: usize) -> Result<Self> {
        Weight::from_body(
            ambient,
            WeightBody::Density {
                bounds,
                density,
                quadrature_order,
                nodes: Arc::new(DensityNodes {
                    points: Vec::new(),
                    weights: Vec::new(),
                }),
            },
        )
    }

    /// Uniform density `value` on an axis-aligned box.
    pub fn uniform_box(ambient: Ambient, bounds: Vec<(f64, f64)>, value: Complex64) -> Result<Self> {
        Weight::density(ambient, bounds, DensityFn::Uniform { value }, DEFAULT_QUADRATURE_ORDER)
    }

    pub fn fourier_radial(dim: usize, series: Vec<f64>, validity_radius: f64) -> Result<Self> {
        Weight::from_body(
            Ambient::real(dim),
            WeightBody::FourierRadial {
                series,
                validity_radius,
            },
        )
    }

    /// The radial distribution with `𝓕F(ξ) = cos|ξ|`, truncated after
    /// `|ξ|^{2K}`. The validity radius is where the first omitted term
    /// drops to `1e−12`.
    pub fn cos_radial(dim: usize, truncation: usize) -> Result<Self> {
        let series: Vec<f64> = (0..=truncation)
            .map(|k| {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                sign / factorial(2 * k as u32)
            })
            .collect();
        let next = 2 * (truncation as u32 + 1);
        let radius = (1e-12 * factorial(next)).powf(1.0 / next as f64);
        Weight::fourier_radial(dim, series, radius)
    }

    /// Arclength measure on a circle in `ℂ¹`, discretized by the `nodes`-point
    /// trapezoidal rule (exact for trigonometric moments below `nodes`).
    pub fn circle_arclength(center: Complex64, radius: f64, nodes: usize) -> Result<Self> {
        let mass = Complex64::new(2.0 * std::f64::consts::PI * radius / nodes as f64, 0.0);
        let points = (0..nodes)
            .map(|k| {
                let t = 2.0 * std::f64::consts::PI * k as f64 / nodes as f64;
                let z = center + Complex64::from_polar(radius, t);
                vec![z.re, z.im]
            })
            .collect();
        Weight::atomic(Ambient::complex(1), points, vec![mass; nodes])
    }

    pub fn ambient(&self) -> Ambient {
        self.ambient
    }

    pub fn body(&self) -> &WeightBody {
        &self.body
    }

    pub fn family(&self) -> &'static str {
        match self.body {
            WeightBody::Atomic { .. } => "atomic",
            WeightBody::PointDistribution { .. } => "point_distribution",
            WeightBody::Density { .. } => "density",
            WeightBody::FourierRadial { .. } => "fourier_radial",
        }
    }

    /// True for the atomic or point-distribution weight with no support.
    pub fn is_zero(&self) -> bool {
        match &self.body {
            WeightBody::Atomic { masses, .. } => masses.is_empty(),
            WeightBody::PointDistribution { operators, .. } => operators.is_empty(),
            _ => false,
        }
    }

    /// Truncation `K` of a radial series.
    pub fn truncation(&self) -> Option<usize> {
        match &self.body {
            WeightBody::FourierRadial { series, .. } => Some(series.len() - 1),
            _ => None,
        }
    }

    /// `c · W`.
    pub fn scale(&self, c: Complex64) -> Result<Self> {
        let body = match &self.body {
            WeightBody::Atomic { points, masses } => WeightBody::Atomic {
                points: points.clone(),
                masses: masses.iter().map(|m| m * c).collect(),
            },
            WeightBody::PointDistribution { points, operators } => WeightBody::PointDistribution {
                points: points.clone(),
                operators: operators.iter().map(|o| o.scale(c)).collect(),
            },
            WeightBody::Density {
                bounds,
                density,
                quadrature_order,
                ..
            } => {
                let inner = density.clone();
                WeightBody::Density {
                    bounds: bounds.clone(),
                    density: DensityFn::Custom(Arc::new(move |x| c * inner.eval(x))),
                    quadrature_order: *quadrature_order,
                    nodes: Arc::new(DensityNodes {
                        points: Vec::new(),
                        weights: Vec::new(),
                    }),
                }
            }
            WeightBody::FourierRadial { .. } => return Err(Error::Unsupported("complex scaling of a real radial series")),
        };
        Weight::from_body(self.ambient, body)
    }

    /// Reinterprets a weight over `ℂ^d` as a weight over `ℝ^{2d}`.
    pub fn as_real(&self) -> Result<Self> {
        match self.ambient.kind {
            SpaceKind::Real => Ok(self.clone()),
            SpaceKind::Complex => Weight::from_body(Ambient::real(2 * self.ambient.dim), self.body.clone()),
        }
    }

    fn require(&self, kind: SpaceKind, dim: usize) -> Result<()> {
        if self.ambient.kind != kind {
            return Err(Error::AmbientMismatch(format!(
                "weight lives in {} but the test function is {}",
                self.ambient,
                match kind {
                    SpaceKind::Complex => "a (z, z̄) polynomial",
                    SpaceKind::Real => "a real-coordinate polynomial",
                }
            )));
        }
        check_dim(self.ambient.dim, dim)
    }

    /// `⟨W, p⟩`.
    pub fn pair<P: TestPolynomial + ?Sized>(&self, p: &P) -> Result<Complex64> {
        p.pair_with(self)
    }

    /// `⟨W, p⟩` for a `(z, z̄)` polynomial.
    pub fn pair_bi(&self, p: &BiPolynomial) -> Result<Complex64> {
        self.require(SpaceKind::Complex, p.dim())?;
        match &self.body {
            WeightBody::Atomic { points, masses } => {
                let mut acc = Complex64::default();
                for (x, c) in points.iter().zip(masses) {
                    acc += c * p.eval_real(x)?;
                }
                Ok(acc)
            }
            WeightBody::PointDistribution { points, .. } => {
                let mut acc = Complex64::default();
                for (x, op) in points.iter().zip(&self.wirtinger) {
                    acc += op.apply_diff(p)?.eval_real(x)?;
                }
                Ok(acc)
            }
            WeightBody::Density { nodes, .. } => {
                let mut acc = Complex64::default();
                for (x, w) in nodes.points.iter().zip(&nodes.weights) {
                    acc += w * p.eval_real(x)?;
                }
                Ok(acc)
            }
            WeightBody::FourierRadial { series, .. } => radial_pairing(series, &p.complexify()),
        }
    }

    /// `⟨W, p⟩` for a real-coordinate polynomial.
    pub fn pair_real(&self, p: &RealPolynomial) -> Result<Complex64> {
        self.require(SpaceKind::Real, p.dim())?;
        match &self.body {
            WeightBody::Atomic { points, masses } => {
                let mut acc = Complex64::default();
                for (x, c) in points.iter().zip(masses) {
                    acc += c * p.eval(x)?;
                }
                Ok(acc)
            }
            WeightBody::PointDistribution { points, operators } => {
                let mut acc = Complex64::default();
                for (x, op) in points.iter().zip(operators) {
                    acc += op.apply(p, x)?;
                }
                Ok(acc)
            }
            WeightBody::Density { nodes, .. } => {
                let mut acc = Complex64::default();
                for (x, w) in nodes.points.iter().zip(&nodes.weights) {
                    acc += w * p.eval(x)?;
                }
                Ok(acc)
            }
            WeightBody::FourierRadial { series, .. } => radial_pairing(series, p),
        }
    }

    /// `⟨W, z^α z̄^β⟩`, with direct evaluation for atoms and point
    /// distributions.
    pub fn bi_moment(&self, alpha: &MultiIndex, beta: &MultiIndex) -> Result<Complex64> {
        self.require(SpaceKind::Complex, alpha.len())?;
        check_dim(alpha.len(), beta.len())?;
        match &self.body {
            WeightBody::Atomic { points, masses } => Ok(points
                .iter()
                .zip(masses)
                .map(|(x, c)| c * monomial_at(alpha, beta, x))
                .sum()),
            WeightBody::PointDistribution { points, .. } => {
                let d = alpha.len();
                let mut acc = Complex64::default();
                for (x, op) in points.iter().zip(&self.wirtinger) {
                    for (a, b, c) in op.terms() {
                        if let (Some(ra), Some(rb)) = (alpha.checked_sub(&a), beta.checked_sub(&b)) {
                            let f: f64 = (0..d)
                                .map(|j| {
                                    falling_factorial(alpha.exponents()[j], a.exponents()[j])
                                        * falling_factorial(beta.exponents()[j], b.exponents()[j])
                                })
                                .product();
                            acc += c * f * monomial_at(&ra, &rb, x);
                        }
                    }
                }
                Ok(acc)
            }
            _ => self.pair_bi(&BiPolynomial::monomial(alpha, beta, Complex64::new(1.0, 0.0))),
        }
    }

    /// `⟨W, x^γ⟩`.
    pub fn real_moment(&self, gamma: &MultiIndex) -> Result<Complex64> {
        self.require(SpaceKind::Real, gamma.len())?;
        match &self.body {
            WeightBody::Atomic { points, masses } => Ok(points
                .iter()
                .zip(masses)
                .map(|(x, c)| {
                    c * x
                        .iter()
                        .zip(gamma.exponents())
                        .map(|(t, &e)| t.powi(e as i32))
                        .product::<f64>()
                })
                .sum()),
            WeightBody::FourierRadial { series, .. } => radial_moment(series, gamma),
            _ => self.pair_real(&RealPolynomial::monomial(gamma.clone(), Complex64::new(1.0, 0.0))),
        }
    }

    /// Pushforward under the complex-linear map `z ↦ Uz` (atomic and point
    /// distributions only). Operator symbols transform by the transpose of
    /// the induced real map.
    pub fn transform_unitary(&self, u: &[Vec<Complex64>]) -> Result<Self> {
        if self.ambient.kind != SpaceKind::Complex {
            return Err(Error::AmbientMismatch("unitary change of coordinates needs a complex ambient".into()));
        }
        let d = self.ambient.dim;
        check_dim(d, u.len())?;
        let t = realify(u);
        let apply = |x: &Vec<f64>| -> Vec<f64> {
            (0..2 * d).map(|i| (0..2 * d).map(|k| t[i][k] * x[k]).sum()).collect()
        };
        let body = match &self.body {
            WeightBody::Atomic { points, masses } => WeightBody::Atomic {
                points: points.iter().map(apply).collect(),
                masses: masses.clone(),
            },
            WeightBody::PointDistribution { points, operators } => {
                // ∂_i(φ∘T) = Σ_k T_{ki} (∂_k φ)∘T: symbol ξ_i ↦ Σ_k T_{ki} ξ_k
                let transpose: Vec<Vec<f64>> = (0..2 * d).map(|i| (0..2 * d).map(|k| t[k][i]).collect()).collect();
                WeightBody::PointDistribution {
                    points: points.iter().map(apply).collect(),
                    operators: operators
                        .iter()
                        .map(|o| o.symbol().compose_linear(&transpose).map(DifferentialOperator::from_symbol))
                        .collect::<Result<_>>()?,
                }
            }
            _ => return Err(Error::Unsupported("unitary change of coordinates")),
        };
        Weight::from_body(self.ambient, body)
    }

    /// Pushforward under the projection `ℂ^d → ℂ^{d−1}` forgetting complex
    /// coordinate `j` (0-based). Collisions within [`COLLISION_TOL`] merge.
    pub fn forget_coordinate(&self, j: usize) -> Result<Self> {
        self.keep_coordinates(&(0..self.ambient.dim).filter(|&k| k != j).collect::<Vec<_>>(), j)
    }

    /// Pushforward onto complex coordinate `j` alone.
    pub fn coordinate_marginal(&self, j: usize) -> Result<Self> {
        self.keep_coordinates(&[j], j)
    }

    fn keep_coordinates(&self, keep: &[usize], j: usize) -> Result<Self> {
        if self.ambient.kind != SpaceKind::Complex {
            return Err(Error::AmbientMismatch("coordinate projection needs a complex ambient".into()));
        }
        let d = self.ambient.dim;
        if j >= d {
            return Err(Error::InvalidArgument(format!("coordinate {j} out of range for C^{d}")));
        }
        if keep.is_empty() {
            return Err(Error::InvalidArgument("projection would leave no coordinates".into()));
        }
        let real_keep: Vec<usize> = keep.iter().flat_map(|&k| [2 * k, 2 * k + 1]).collect();
        let restrict = |x: &Vec<f64>| -> Vec<f64> { real_keep.iter().map(|&i| x[i]).collect() };
        let ambient = Ambient::complex(keep.len());
        let body = match &self.body {
            WeightBody::Atomic { points, masses } => {
                let (points, masses) = merge_atoms(points.iter().map(restrict).collect(), masses.clone(), COLLISION_TOL);
                WeightBody::Atomic { points, masses }
            }
            WeightBody::PointDistribution { points, operators } => {
                // derivatives along forgotten directions annihilate u∘π
                let ops = operators
                    .iter()
                    .map(|o| {
                        DifferentialOperator::new(
                            real_keep.len(),
                            o.terms()
                                .filter(|(g, _)| {
                                    g.exponents()
                                        .iter()
                                        .enumerate()
                                        .all(|(i, &e)| e == 0 || real_keep.contains(&i))
                                })
                                .map(|(g, c)| {
                                    (
                                        MultiIndex::new(real_keep.iter().map(|&i| g.exponents()[i]).collect()),
                                        *c,
                                    )
                                }),
                        )
                    })
                    .collect();
                let (points, operators) = merge_operators(points.iter().map(restrict).collect(), ops, COLLISION_TOL)?;
                WeightBody::PointDistribution { points, operators }
            }
            _ => return Err(Error::Unsupported("coordinate projection")),
        };
        Weight::from_body(ambient, body)
    }
}

/// `[x_1, y_1, x_2, y_2, …]` encoding of a complex vector.
pub fn encode_complex(z: &[Complex64]) -> Vec<f64> {
    z.iter().flat_map(|w| [w.re, w.im]).collect()
}

pub fn decode_complex(x: &[f64]) -> Vec<Complex64> {
    x.chunks(2).map(|p| Complex64::new(p[0], p[1])).collect()
}

/// Real `2d × 2d` matrix of the complex-linear map `z ↦ Uz`.
pub(crate) fn realify(u: &[Vec<Complex64>]) -> Vec<Vec<f64>> {
    let d = u.len();
    let mut t = vec![vec![0.0; 2 * d]; 2 * d];
    for j in 0..d {
        for k in 0..d {
            let c = u[j][k];
            t[2 * j][2 * k] = c.re;
            t[2 * j][2 * k + 1] = -c.im;
            t[2 * j + 1][2 * k] = c.im;
            t[2 * j + 1][2 * k + 1] = c.re;
        }
    }
    t
}

fn monomial_at(alpha: &MultiIndex, beta: &MultiIndex, x: &[f64]) -> Complex64 {
    let mut v = Complex64::new(1.0, 0.0);
    for (j, (a, b)) in alpha.exponents().iter().zip(beta.exponents()).enumerate() {
        let z = Complex64::new(x[2 * j], x[2 * j + 1]);
        if *a > 0 {
            v *= z.powu(*a);
        }
        if *b > 0 {
            v *= z.conj().powu(*b);
        }
    }
    v
}

/// `⟨F, x^γ⟩ = i^{|γ|} ∂^γ(𝓕F)(0)` for `𝓕F = Σ a_k |ξ|^{2k}`: nonzero only for
/// `γ = 2δ`, where it equals `(−1)^{|δ|} a_{|δ|} |δ|!/δ! (2δ)!`.
pub fn radial_moment(series: &[f64], gamma: &MultiIndex) -> Result<Complex64> {
    let order = gamma.order() as usize;
    let available = 2 * (series.len() - 1);
    if order > available {
        return Err(Error::TruncationExceeded {
            requested: order,
            available,
        });
    }
    if gamma.exponents().iter().any(|e| e % 2 == 1) {
        return Ok(Complex64::default());
    }
    let delta = MultiIndex::new(gamma.exponents().iter().map(|e| e / 2).collect());
    let k = delta.order();
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    let value = sign * series[k as usize] * factorial(k) / delta.factorial() * gamma.factorial();
    Ok(Complex64::new(value, 0.0))
}

fn radial_pairing(series: &[f64], p: &RealPolynomial) -> Result<Complex64> {
    let mut acc = Complex64::default();
    for (gamma, c) in p.terms() {
        acc += c * radial_moment(series, gamma)?;
    }
    Ok(acc)
}

/// Polynomials that can be paired with a [`Weight`].
pub trait TestPolynomial {
    fn pair_with(&self, weight: &Weight) -> Result<Complex64>;
}

impl TestPolynomial for BiPolynomial {
    fn pair_with(&self, weight: &Weight) -> Result<Complex64> {
        weight.pair_bi(self)
    }
}

impl TestPolynomial for RealPolynomial {
    fn pair_with(&self, weight: &Weight) -> Result<Complex64> {
        weight.pair_real(self)
    }
}
