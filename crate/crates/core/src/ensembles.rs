//! Seeded random weights for experiments and tests.
//!
//! Every generator is a pure function of its arguments; the same seed
//! always yields the same weight.

use crate::error::{Error, Result};
use crate::polyalg::{BiPolynomial, MultiIndex};
use crate::weights::{encode_complex, Ambient, DifferentialOperator, Weight};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Parameters of a random atomic ensemble.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomBounds {
    /// Minimum pairwise distance between atoms.
    #[serde(default = "default_separation")]
    pub separation: f64,
    /// Atoms lie in the ball (or polydisk, over `ℂ^d`) of this radius.
    #[serde(default = "default_radius")]
    pub radius: f64,
    /// `|mass| ∈ [mass_min, mass_max]`.
    #[serde(default = "default_mass_min")]
    pub mass_min: f64,
    #[serde(default = "default_mass_max")]
    pub mass_max: f64,
}

fn default_separation() -> f64 {
    0.1
}

fn default_radius() -> f64 {
    1.0
}

fn default_mass_min() -> f64 {
    0.1
}

fn default_mass_max() -> f64 {
    1.0
}

impl Default for AtomBounds {
    fn default() -> Self {
        AtomBounds {
            separation: default_separation(),
            radius: default_radius(),
            mass_min: default_mass_min(),
            mass_max: default_mass_max(),
        }
    }
}

impl AtomBounds {
    fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0 && self.separation >= 0.0 && self.mass_min > 0.0 && self.mass_max >= self.mass_min) {
            return Err(Error::InvalidArgument(format!("invalid atom bounds {self:?}")));
        }
        Ok(())
    }
}

/// Seeded RNG for case `index` of an ensemble with base seed `seed`.
pub fn case_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn disk_point<R: Rng>(rng: &mut R, radius: f64) -> Complex64 {
    let r = radius * rng.random::<f64>().sqrt();
    Complex64::from_polar(r, 2.0 * PI * rng.random::<f64>())
}

fn ball_point<R: Rng>(rng: &mut R, dim: usize, radius: f64) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        if v.iter().map(|t| t * t).sum::<f64>() <= 1.0 {
            return v.into_iter().map(|t| t * radius).collect();
        }
    }
}

/// Complex mass with uniform phase and modulus in `[min, max]`.
pub fn complex_mass<R: Rng>(rng: &mut R, bounds: &AtomBounds) -> Complex64 {
    Complex64::from_polar(rng.random_range(bounds.mass_min..=bounds.mass_max), 2.0 * PI * rng.random::<f64>())
}

/// Real mass with random sign and modulus in `[min, max]`.
pub fn real_mass<R: Rng>(rng: &mut R, bounds: &AtomBounds) -> Complex64 {
    let m = rng.random_range(bounds.mass_min..=bounds.mass_max);
    Complex64::new(if rng.random::<bool>() { m } else { -m }, 0.0)
}

/// Rejection-samples `count` points with pairwise distance `≥ separation`.
fn separated<R: Rng, F>(rng: &mut R, count: usize, separation: f64, mut draw: F) -> Result<Vec<Vec<f64>>>
where
    F: FnMut(&mut R) -> Vec<f64>,
{
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(count);
    let mut attempts = 0;
    while out.len() < count {
        attempts += 1;
        if attempts > 100_000 {
            return Err(Error::InvalidArgument(format!(
                "could not place {count} points with separation {separation}"
            )));
        }
        let p = draw(rng);
        let ok = out
            .iter()
            .all(|q| q.iter().zip(&p).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt() >= separation);
        if ok {
            out.push(p);
        }
    }
    Ok(out)
}

/// `count` atoms over `ℂ^d` with complex masses. Each coordinate lies in
/// the disk of radius `bounds.radius`.
pub fn complex_atoms<R: Rng>(rng: &mut R, d: usize, count: usize, bounds: &AtomBounds) -> Result<Weight> {
    bounds.validate()?;
    let points = separated(rng, count, bounds.separation, |r| {
        let z: Vec<Complex64> = (0..d).map(|_| disk_point(r, bounds.radius)).collect();
        encode_complex(&z)
    })?;
    let masses = (0..count).map(|_| complex_mass(rng, bounds)).collect();
    Weight::atomic(Ambient::complex(d), points, masses)
}

/// `count` atoms in the ball of `ℝ^D` with real signed masses.
pub fn real_atoms<R: Rng>(rng: &mut R, dim: usize, count: usize, bounds: &AtomBounds) -> Result<Weight> {
    bounds.validate()?;
    let points = separated(rng, count, bounds.separation, |r| ball_point(r, dim, bounds.radius))?;
    let masses = (0..count).map(|_| real_mass(rng, bounds)).collect();
    Weight::atomic(Ambient::real(dim), points, masses)
}

/// Point distribution over `ℂ¹`: `count` separated points, each carrying
/// a random operator of order exactly `order` (in real coordinates) whose
/// coefficients have modulus in `[mass_min, mass_max]`.
pub fn point_distribution<R: Rng>(rng: &mut R, count: usize, max_order: u32, bounds: &AtomBounds) -> Result<Weight> {
    bounds.validate()?;
    let points = separated(rng, count, bounds.separation, |r| encode_complex(&[disk_point(r, bounds.radius)]))?;
    let operators = (0..count)
        .map(|_| {
            let order = rng.random_range(0..=max_order);
            let terms: Vec<(MultiIndex, Complex64)> = MultiIndex::up_to_degree(2, order)
                .into_iter()
                .map(|g| (g, complex_mass(rng, bounds)))
                .collect();
            DifferentialOperator::new(2, terms)
        })
        .collect();
    Weight::point_distribution(Ambient::complex(1), points, operators)
}

/// Random holomorphic polynomial of degree exactly `degree` over `ℂ^d`
/// with complex Gaussian coefficients.
pub fn holomorphic_polynomial<R: Rng>(rng: &mut R, d: usize, degree: u32) -> BiPolynomial {
    let terms: Vec<(MultiIndex, MultiIndex, Complex64)> = MultiIndex::up_to_degree(d, degree)
        .into_iter()
        .map(|a| {
            let c = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            (a, MultiIndex::zeros(d), c)
        })
        .collect();
    BiPolynomial::from_terms(d, terms)
}

/// Greedy matching distance: the largest distance from a point of `a` to
/// its assigned point of `b`, or infinity when counts differ.
///
/// The assignment is optimal whenever the point sets are within half their
/// separation of each other.
pub fn matching_error(a: &[Vec<Complex64>], b: &[Vec<Complex64>]) -> (f64, Vec<usize>) {
    if a.len() != b.len() {
        return (f64::INFINITY, Vec::new());
    }
    let dist = |p: &[Complex64], q: &[Complex64]| p.iter().zip(q).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(a.len() * b.len());
    for (i, p) in a.iter().enumerate() {
        for (j, q) in b.iter().enumerate() {
            pairs.push((dist(p, q), i, j));
        }
    }
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut assign = vec![usize::MAX; a.len()];
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for (d, i, j) in pairs {
        if assign[i] == usize::MAX && !used[j] {
            assign[i] = j;
            used[j] = true;
            worst = worst.max(d);
        }
    }
    (worst, assign)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::{decode_complex, WeightBody};

    #[test]
    fn atoms_respect_bounds() {
        let mut rng = case_rng(1, 0);
        let w = complex_atoms(&mut rng, 1, 6, &AtomBounds::default()).unwrap();
        let WeightBody::Atomic { points, masses } = w.body() else { unreachable!() };
        assert_eq!(points.len(), 6);
        for (i, p) in points.iter().enumerate() {
            assert!(decode_complex(p)[0].norm() <= 1.0);
            assert!((0.1..=1.0 + 1e-15).contains(&masses[i].norm()));
            for q in &points[..i] {
                let d = ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt();
                assert!(d >= 0.1);
            }
        }
    }

    #[test]
    fn seeds_are_reproducible() {
        let a = real_atoms(&mut case_rng(5, 3), 3, 4, &AtomBounds::default()).unwrap();
        let b = real_atoms(&mut case_rng(5, 3), 3, 4, &AtomBounds::default()).unwrap();
        assert_eq!(format!("{:?}", a.body()), format!("{:?}", b.body()));
    }

    #[test]
    fn matching() {
        let a = vec![vec![Complex64::new(0.0, 0.0)], vec![Complex64::new(1.0, 0.0)]];
        let b = vec![vec![Complex64::new(1.0, 1e-9)], vec![Complex64::new(0.0, 0.0)]];
        let (err, assign) = matching_error(&a, &b);
        assert!(err <= 1e-9);
        assert_eq!(assign, vec![1, 0]);
        assert!(matching_error(&a, &b[..1]).0.is_infinite());
    }
}
