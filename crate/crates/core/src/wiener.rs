//! Fourier transforms of weights, projections to lines and the Wiener
//! atom-mass functional `⌊μ⌋² = Σ_x |μ({x})|²`.
//!
//! The functional is approximated by
//! `R^{−D} ∫ h(ξ/R) |𝓕μ(ξ)|² dξ` with the unit-mass Gaussian
//! `h(ξ) = π^{−D/2} e^{−|ξ|²}`, under the transform convention of
//! [`crate::weights`].

use crate::error::{check_dim, Error, Result};
use crate::polyalg::MultiIndex;
use crate::quadrature;
use crate::weights::{merge_atoms, Ambient, DensityFn, DifferentialOperator, SpaceKind, Weight, WeightBody, COLLISION_TOL};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;
use std::sync::Arc;

/// Default scale schedule.
pub const DEFAULT_SCHEDULE: [f64; 6] = [2.0, 4.0, 8.0, 16.0, 32.0, 64.0];

/// Default number of sphere nodes for [`sphere_average_check`].
pub const DEFAULT_SPHERE_NODES: usize = 500;

/// Default truncation of the frequency box, in units of `R`.
pub const DEFAULT_BANDWIDTH_FACTOR: f64 = 6.0;

/// Largest admissible tail bound, relative to `‖μ‖²`.
const TAIL_TOL: f64 = 1e-10;

/// Gauss–Legendre nodes per panel of the frequency quadrature.
const PANEL_NODES: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    Gaussian,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WienerEstimate {
    pub profile: Profile,
    pub r_schedule: Vec<f64>,
    pub values: Vec<f64>,
    pub limit: f64,
    /// `|last − previous|`, zero for a one-point schedule.
    pub error_estimate: f64,
}

impl WienerEstimate {
    fn from_values(r_schedule: Vec<f64>, values: Vec<f64>) -> Self {
        let limit = *values.last().expect("nonempty schedule");
        let error_estimate = if values.len() >= 2 {
            (limit - values[values.len() - 2]).abs()
        } else {
            0.0
        };
        WienerEstimate {
            profile: Profile::Gaussian,
            r_schedule,
            values,
            limit,
            error_estimate,
        }
    }
}

/// `𝓕W(ξ) = ⟨W, e^{−i x·ξ}⟩` with `ξ` in the real coordinates of the ambient.
pub fn fourier(w: &Weight, xi: &[f64]) -> Result<Complex64> {
    check_dim(w.ambient().real_dim(), xi.len())?;
    let phase = |x: &[f64]| -> Complex64 {
        let t: f64 = x.iter().zip(xi).map(|(a, b)| a * b).sum();
        Complex64::from_polar(1.0, -t)
    };
    match w.body() {
        WeightBody::Atomic { points, masses } => Ok(points.iter().zip(masses).map(|(x, c)| c * phase(x)).sum()),
        WeightBody::PointDistribution { points, operators } => {
            // ∂^γ e^{−ix·ξ} = (−iξ)^γ e^{−ix·ξ}
            let minus_i_xi: Vec<Complex64> = xi.iter().map(|&t| Complex64::new(0.0, -t)).collect();
            let mut acc = Complex64::default();
            for (x, op) in points.iter().zip(operators) {
                acc += op.symbol().eval_complex(&minus_i_xi)? * phase(x);
            }
            Ok(acc)
        }
        WeightBody::Density { bounds, density, .. } => Ok(density_fourier(bounds, density, xi)),
        WeightBody::FourierRadial {
            series,
            validity_radius,
        } => {
            let r2: f64 = xi.iter().map(|t| t * t).sum();
            if r2.sqrt() > *validity_radius {
                return Err(Error::OutsideValidity {
                    radius: r2.sqrt(),
                    limit: *validity_radius,
                });
            }
            Ok(Complex64::new(series.iter().rev().fold(0.0, |acc, a| acc * r2 + a), 0.0))
        }
    }
}

/// Tensor Gauss–Legendre rule on `bounds` fine enough to resolve
/// `e^{−i x·ξ}`: each panel spans at most one period per axis.
fn density_fourier(bounds: &[(f64, f64)], density: &DensityFn, xi: &[f64]) -> Complex64 {
    let axes: Vec<Vec<(f64, f64)>> = bounds
        .iter()
        .zip(xi)
        .map(|(&(a, b), &t)| {
            let periods = (t.abs() * (b - a) / (2.0 * std::f64::consts::PI)).ceil() as usize;
            quadrature::composite_gauss_legendre(a, b, periods.max(1), 32)
        })
        .collect();
    let mut acc = Complex64::default();
    for (x, wt) in quadrature::tensor_rule(&axes) {
        let t: f64 = x.iter().zip(xi).map(|(a, b)| a * b).sum();
        acc += density.eval(&x) * wt * Complex64::from_polar(1.0, -t);
    }
    acc
}

/// Pushforward of `W` over `ℝ^D` under `x ↦ x·ζ`.
///
/// Atoms land at `x_j·ζ` and merge within [`COLLISION_TOL`]; a point
/// operator `Σ c_γ ∂^γ` becomes `Σ c_γ ζ^γ ∂^{|γ|}`. In `D = 1` densities
/// are mapped by the identity or the reflection.
pub fn project(w: &Weight, zeta: &[f64]) -> Result<Weight> {
    if w.ambient().kind != SpaceKind::Real {
        return Err(Error::AmbientMismatch(format!("projection needs a real ambient, weight lives in {}", w.ambient())));
    }
    let dim = w.ambient().dim;
    check_dim(dim, zeta.len())?;
    let norm = zeta.iter().map(|t| t * t).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!("direction must be a unit vector, |zeta| = {norm}")));
    }
    let dot = |x: &Vec<f64>| -> f64 { x.iter().zip(zeta).map(|(a, b)| a * b).sum() };
    let line = Ambient::real(1);
    match w.body() {
        WeightBody::Atomic { points, masses } => {
            let (points, masses) = merge_atoms(points.iter().map(|x| vec![dot(x)]).collect(), masses.clone(), COLLISION_TOL);
            Weight::atomic(line, points, masses)
        }
        WeightBody::PointDistribution { points, operators } => {
            let ops = operators
                .iter()
                .map(|op| {
                    DifferentialOperator::new(
                        1,
                        op.terms().map(|(g, c)| {
                            let z: f64 = g.exponents().iter().zip(zeta).map(|(&e, t)| t.powi(e as i32)).product();
                            (MultiIndex::new(vec![g.order()]), c * z)
                        }),
                    )
                })
                .collect();
            // merge collisions by summing operators
            let mut pts: Vec<Vec<f64>> = Vec::new();
            let mut merged: Vec<DifferentialOperator> = Vec::new();
            for (x, op) in points.iter().map(|x| vec![dot(x)]).zip::<Vec<DifferentialOperator>>(ops) {
                match pts.iter().position(|p| (p[0] - x[0]).abs() <= COLLISION_TOL) {
                    Some(i) => merged[i] = merged[i].add(&op)?,
                    None => {
                        pts.push(x);
                        merged.push(op);
                    }
                }
            }
            Weight::point_distribution(line, pts, merged)
        }
        WeightBody::Density {
            bounds,
            density,
            quadrature_order,
            ..
        } if dim == 1 => {
            if zeta[0] > 0.0 {
                Ok(w.clone())
            } else {
                let inner = density.clone();
                let reflected = DensityFn::Custom(Arc::new(move |x: &[f64]| inner.eval(&[-x[0]])));
                Weight::density(line, vec![(-bounds[0].1, -bounds[0].0)], reflected, *quadrature_order)
            }
        }
        _ => Err(Error::Unsupported("projection")),
    }
}

fn check_schedule(r_schedule: &[f64]) -> Result<()> {
    if r_schedule.is_empty() {
        return Err(Error::InvalidArgument("R schedule must not be empty".into()));
    }
    if r_schedule.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
        return Err(Error::InvalidArgument("R schedule entries must be positive".into()));
    }
    if r_schedule.windows(2).any(|p| p[1] <= p[0]) {
        return Err(Error::InvalidArgument("R schedule must be increasing".into()));
    }
    Ok(())
}

/// Wiener functional on a scale schedule.
///
/// Atomic weights use the closed form
/// `Σ_{j,k} c_j conj(c_k) e^{−R²|x_j − x_k|²/4}`; densities use frequency
/// quadrature over the box `|ξ_i| ≤ 6R`.
pub fn atom_mass(w: &Weight, r_schedule: &[f64]) -> Result<WienerEstimate> {
    check_schedule(r_schedule)?;
    let values = match w.body() {
        WeightBody::Atomic { .. } => r_schedule.iter().map(|&r| atom_mass_closed_form(w, r)).collect::<Result<Vec<_>>>()?,
        WeightBody::Density { .. } => r_schedule
            .iter()
            .map(|&r| atom_mass_quadrature(w, r, DEFAULT_BANDWIDTH_FACTOR * r))
            .collect::<Result<Vec<_>>>()?,
        _ => return Err(Error::Unsupported("the atom-mass functional")),
    };
    Ok(WienerEstimate::from_values(r_schedule.to_vec(), values))
}

/// Closed form of the functional for an atomic weight at scale `r`.
pub fn atom_mass_closed_form(w: &Weight, r: f64) -> Result<f64> {
    let WeightBody::Atomic { points, masses } = w.body() else {
        return Err(Error::Unsupported("the closed-form atom mass"));
    };
    let mut acc = Complex64::default();
    for (xj, cj) in points.iter().zip(masses) {
        for (xk, ck) in points.iter().zip(masses) {
            let d2: f64 = xj.iter().zip(xk).map(|(a, b)| (a - b) * (a - b)).sum();
            acc += cj * ck.conj() * (-r * r * d2 / 4.0).exp();
        }
    }
    Ok(acc.re)
}

/// `π^{−D/2} ∫_{|ξ_i| ≤ Ξ} e^{−|ξ|²/R²} |𝓕W(ξ)|² dξ / R^D` by composite
/// Gauss–Legendre quadrature.
///
/// Fails with [`Error::BandwidthInsufficient`] when the Gaussian mass
/// outside the box, times `‖W‖²`, may exceed `1e−10 ‖W‖²`.
pub fn atom_mass_quadrature(w: &Weight, r: f64, bandwidth: f64) -> Result<f64> {
    let dim = w.ambient().real_dim();
    let (total_variation, diameter) = match w.body() {
        WeightBody::Atomic { points, masses } => (masses.iter().map(|c| c.norm()).sum::<f64>(), box_diameter(points)),
        WeightBody::Density { nodes, bounds, .. } => (
            nodes.weights.iter().map(|c| c.norm()).sum::<f64>(),
            bounds.iter().map(|(a, b)| (b - a).powi(2)).sum::<f64>().sqrt(),
        ),
        _ => return Err(Error::Unsupported("the atom-mass quadrature")),
    };
    // tail of the Gaussian outside the cube [−η, η]^D ≤ D·erfc(η) ≤ D e^{−η²}/(η√π)
    let eta = bandwidth / r;
    let tail = dim as f64 * (-eta * eta).exp() / (eta * std::f64::consts::PI.sqrt());
    if !(tail <= TAIL_TOL) {
        return Err(Error::BandwidthInsufficient {
            tail: tail * total_variation * total_variation,
            bandwidth,
            scale: r,
        });
    }
    // |𝓕W(Rη)|² oscillates with period ≈ 2π/(R·diameter) in η
    let periods = (2.0 * eta * r * diameter / (2.0 * std::f64::consts::PI)).ceil() as usize;
    let axis = quadrature::composite_gauss_legendre(-eta, eta, periods.max(1) + 2, PANEL_NODES);
    let axes = vec![axis; dim];
    let norm = std::f64::consts::PI.powf(-(dim as f64) / 2.0);
    let mut acc = 0.0;
    for (eta_pt, wt) in quadrature::tensor_rule(&axes) {
        let e2: f64 = eta_pt.iter().map(|t| t * t).sum();
        let xi: Vec<f64> = eta_pt.iter().map(|t| t * r).collect();
        acc += wt * (-e2).exp() * fourier(w, &xi)?.norm_sqr();
    }
    Ok(norm * acc)
}

fn box_diameter(points: &[Vec<f64>]) -> f64 {
    let Some(first) = points.first() else {
        return 0.0;
    };
    (0..first.len())
        .map(|i| {
            let lo = points.iter().map(|p| p[i]).fold(f64::INFINITY, f64::min);
            let hi = points.iter().map(|p| p[i]).fold(f64::NEG_INFINITY, f64::max);
            (hi - lo).powi(2)
        })
        .sum::<f64>()
        .sqrt()
}

/// `⌊W_ζ⌋²` for an atomic weight: `Σ |mass|²` over collision classes of
/// the projected atoms.
fn projected_atom_mass(w: &Weight, zeta: &[f64]) -> Result<f64> {
    match project(w, zeta)?.body() {
        WeightBody::Atomic { masses, .. } => Ok(masses.iter().map(|c| c.norm_sqr()).sum()),
        _ => unreachable!("projection of an atomic weight is atomic"),
    }
}

/// `(sphere average of ⌊W_ζ⌋², ⌊W⌋²)` for an atomic weight over `ℝ^D`,
/// `D ∈ {2, 3}`, with [`DEFAULT_SPHERE_NODES`] directions.
pub fn sphere_average_check(w: &Weight) -> Result<(f64, f64)> {
    sphere_average_check_with(w, DEFAULT_SPHERE_NODES)
}

pub fn sphere_average_check_with(w: &Weight, nodes: usize) -> Result<(f64, f64)> {
    let WeightBody::Atomic { masses, .. } = w.body() else {
        return Err(Error::Unsupported("the sphere average"));
    };
    if w.ambient().kind != SpaceKind::Real {
        return Err(Error::AmbientMismatch("the sphere average needs a real ambient".into()));
    }
    let directions = match w.ambient().dim {
        2 => quadrature::circle_directions(nodes),
        3 => quadrature::fibonacci_sphere(nodes),
        d => return Err(Error::InvalidArgument(format!("sphere average supports D in {{2, 3}}, got {d}"))),
    };
    let mut sum = 0.0;
    for zeta in &directions {
        let unit = normalized(zeta);
        sum += projected_atom_mass(w, &unit)?;
    }
    let direct = masses.iter().map(|c| c.norm_sqr()).sum();
    Ok((sum / directions.len() as f64, direct))
}

fn normalized(v: &[f64]) -> Vec<f64> {
    let n = v.iter().map(|t| t * t).sum::<f64>().sqrt();
    v.iter().map(|t| t / n).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Discrete,
    Continuous,
    Mixed,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiscretenessVerdict {
    pub verdict: Verdict,
    /// `⌊μ⌋²` estimate of the weight itself.
    pub atom_mass: f64,
    pub direction_samples: usize,
}

/// Extended schedule for atomic weights, where the closed form is free.
const ATOMIC_CLASSIFY_SCHEDULE: [f64; 12] = [2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0, 256.0, 512.0, 1024.0, 2048.0, 4096.0];

/// Classifies a weight over `ℝ^D` from `⌊W⌋²` and `⌊W_ζ⌋²` along
/// `n_directions` seeded random directions.
///
/// * `Discrete`: an atomic weight all of whose estimates lie within 5% of
///   `Σ|c_j|²`.
/// * `Continuous`: the zero weight, or all estimates below `0.1 ‖W‖²` and
///   still decreasing along the schedule.
/// * `Mixed`: estimates have settled (last step below 5% of the value) on
///   a positive value that is not the full discrete mass.
/// * `Inconclusive` otherwise.
pub fn classify_discreteness(w: &Weight, n_directions: usize, seed: u64) -> Result<DiscretenessVerdict> {
    if n_directions < 10 {
        return Err(Error::InvalidArgument("classification needs at least 10 directions".into()));
    }
    if w.ambient().kind != SpaceKind::Real {
        return Err(Error::AmbientMismatch("classification needs a real ambient".into()));
    }
    if w.is_zero() {
        return Ok(DiscretenessVerdict {
            verdict: Verdict::Continuous,
            atom_mass: 0.0,
            direction_samples: 0,
        });
    }
    let (schedule, proxy, norm2): (&[f64], Option<f64>, f64) = match w.body() {
        WeightBody::Atomic { masses, .. } => (
            &ATOMIC_CLASSIFY_SCHEDULE,
            Some(masses.iter().map(|c| c.norm_sqr()).sum()),
            masses.iter().map(|c| c.norm()).sum::<f64>().powi(2),
        ),
        WeightBody::Density { nodes, .. } => (
            &DEFAULT_SCHEDULE,
            None,
            nodes.weights.iter().map(|c| c.norm()).sum::<f64>().powi(2),
        ),
        _ => return Err(Error::Unsupported("discreteness classification")),
    };
    let dim = w.ambient().dim;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let own = atom_mass(w, schedule)?;
    let mut estimates = vec![own.clone()];
    for _ in 0..n_directions {
        let zeta = loop {
            let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
            if v.iter().any(|t: &f64| t.abs() > 1e-8) {
                break normalized(&v);
            }
        };
        estimates.push(atom_mass(&project(w, &zeta)?, schedule)?);
    }
    let within = |e: &WienerEstimate, target: f64| (e.limit - target).abs() <= 0.05 * target;
    let verdict = if proxy.is_some_and(|p| p > 0.0 && estimates.iter().all(|e| within(e, p))) {
        Verdict::Discrete
    } else if estimates
        .iter()
        .all(|e| e.limit <= 0.1 * norm2 && e.values.first().is_some_and(|&v0| e.limit < v0))
    {
        Verdict::Continuous
    } else if estimates
        .iter()
        .all(|e| e.limit > 0.1 * norm2 && e.error_estimate <= 0.05 * e.limit)
    {
        Verdict::Mixed
    } else {
        Verdict::Inconclusive
    };
    Ok(DiscretenessVerdict {
        verdict,
        atom_mass: own.limit,
        direction_samples: n_directions,
    })
}
