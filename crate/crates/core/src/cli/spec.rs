//! JSON experiment specs and their translation into library weights.

use crate::ensembles::{self, AtomBounds};
use crate::polyalg::MultiIndex;
use crate::weights::{encode_complex, Ambient, DensityFn, DifferentialOperator, SpaceKind, Weight, DEFAULT_QUADRATURE_ORDER};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Complex number as `[re, im]`.
pub type C2 = [f64; 2];

fn c(v: C2) -> Complex64 {
    Complex64::new(v[0], v[1])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExperimentKind {
    RankTable,
    Recovery,
    Wiener,
    SphereAverage,
    HarmonicGrowth,
    VandermondeCheck,
    CauchyDecay,
    TwistMonotonicity,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 8] = [
        ExperimentKind::RankTable,
        ExperimentKind::Recovery,
        ExperimentKind::Wiener,
        ExperimentKind::SphereAverage,
        ExperimentKind::HarmonicGrowth,
        ExperimentKind::VandermondeCheck,
        ExperimentKind::CauchyDecay,
        ExperimentKind::TwistMonotonicity,
    ];

    /// Metric columns of the CSV summary, in order.
    pub fn metrics(self) -> &'static [&'static str] {
        match self {
            ExperimentKind::RankTable => &["n", "rank", "expected_rank", "gap"],
            ExperimentKind::Recovery => &["points", "support_error", "mass_error", "residual", "retries"],
            ExperimentKind::Wiener => &["limit", "error_estimate", "projection_error"],
            ExperimentKind::SphereAverage => &["average", "direct", "relative_error"],
            ExperimentKind::HarmonicGrowth => &["k_max", "rank", "bound"],
            ExperimentKind::VandermondeCheck => &["abs_value", "scale"],
            ExperimentKind::CauchyDecay => &["max_abs", "min_radius"],
            ExperimentKind::TwistMonotonicity => &["n", "g_degree", "twist_rank", "untwisted_rank"],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AmbientKind {
    Complex,
    Real,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmbientSpec {
    pub kind: AmbientKind,
    pub dim: usize,
}

impl AmbientSpec {
    fn build(self) -> Ambient {
        match self.kind {
            AmbientKind::Complex => Ambient::complex(self.dim),
            AmbientKind::Real => Ambient::real(self.dim),
        }
    }
}

/// A point: real coordinates `[x, …]` or complex ones `[[re, im], …]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coords {
    Real(Vec<f64>),
    Complex(Vec<C2>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum DensitySpec {
    UniformBox { value: C2 },
    Gaussian { center: Vec<f64>, width: f64, amplitude: C2 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadialPreset {
    /// `𝓕F(ξ) = cos|ξ|`.
    Cos,
}

/// One weight in the JSON schema.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightSpec {
    Atomic {
        ambient: AmbientSpec,
        points: Vec<Coords>,
        masses: Vec<C2>,
    },
    /// `operators[i]` lists `(γ, coefficient)` pairs of `Σ c_γ ∂^γ` in real
    /// coordinates.
    PointDistribution {
        ambient: AmbientSpec,
        points: Vec<Coords>,
        operators: Vec<Vec<(Vec<u32>, C2)>>,
    },
    Density {
        ambient: AmbientSpec,
        bounds: Vec<[f64; 2]>,
        density: DensitySpec,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        quadrature_order: Option<usize>,
    },
    /// Either an explicit Taylor series in `|ξ|²` with its validity
    /// radius, or a preset truncated after `truncation` terms.
    FourierRadial {
        ambient: AmbientSpec,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        series: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        validity_radius: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        preset: Option<RadialPreset>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        truncation: Option<usize>,
    },
    /// Normalised arclength on a circle in `ℂ¹` minus the point mass of
    /// equal total mass at its centre.
    CircleMinusDelta { center: C2, radius: f64, nodes: usize },
}

fn points_of(ambient: &AmbientSpec, points: &[Coords]) -> Result<Vec<Vec<f64>>, String> {
    points
        .iter()
        .map(|p| match (ambient.kind, p) {
            (AmbientKind::Real, Coords::Real(x)) => Ok(x.clone()),
            (AmbientKind::Complex, Coords::Complex(z)) => Ok(encode_complex(&z.iter().map(|v| c(*v)).collect::<Vec<_>>())),
            // `[]` parses as real; accept it for zero-dimensional complex points
            (AmbientKind::Complex, Coords::Real(x)) if x.is_empty() => Ok(Vec::new()),
            (AmbientKind::Real, Coords::Complex(_)) => Err("real ambient needs real coordinates".into()),
            (AmbientKind::Complex, Coords::Real(_)) => Err("complex ambient needs [re, im] coordinates".into()),
        })
        .collect()
}

impl WeightSpec {
    /// Validates and builds the weight.
    pub fn build(&self) -> Result<Weight, String> {
        let w = match self {
            WeightSpec::Atomic { ambient, points, masses } => {
                Weight::atomic(ambient.build(), points_of(ambient, points)?, masses.iter().map(|m| c(*m)).collect())
            }
            WeightSpec::PointDistribution {
                ambient,
                points,
                operators,
            } => {
                let real_dim = ambient.build().real_dim();
                let ops = operators
                    .iter()
                    .map(|terms| {
                        DifferentialOperator::new(
                            real_dim,
                            terms.iter().map(|(g, v)| (MultiIndex::new(g.clone()), c(*v))),
                        )
                    })
                    .collect();
                Weight::point_distribution(ambient.build(), points_of(ambient, points)?, ops)
            }
            WeightSpec::Density {
                ambient,
                bounds,
                density,
                quadrature_order,
            } => {
                let f = match density {
                    DensitySpec::UniformBox { value } => DensityFn::Uniform { value: c(*value) },
                    DensitySpec::Gaussian {
                        center,
                        width,
                        amplitude,
                    } => DensityFn::Gaussian {
                        center: center.clone(),
                        width: *width,
                        amplitude: c(*amplitude),
                    },
                };
                Weight::density(
                    ambient.build(),
                    bounds.iter().map(|b| (b[0], b[1])).collect(),
                    f,
                    quadrature_order.unwrap_or(DEFAULT_QUADRATURE_ORDER),
                )
            }
            WeightSpec::FourierRadial {
                ambient,
                series,
                validity_radius,
                preset,
                truncation,
            } => {
                if ambient.kind != AmbientKind::Real {
                    return Err("fourier_radial weights live in a real ambient".into());
                }
                match (series, validity_radius, preset, truncation) {
                    (Some(s), Some(r), None, None) => Weight::fourier_radial(ambient.dim, s.clone(), *r),
                    (None, None, Some(RadialPreset::Cos), Some(k)) => Weight::cos_radial(ambient.dim, *k),
                    _ => return Err("fourier_radial needs either series + validity_radius or preset + truncation".into()),
                }
            }
            WeightSpec::CircleMinusDelta { center, radius, nodes } => {
                let circle = Weight::circle_arclength(c(*center), *radius, *nodes).map_err(|e| e.to_string())?;
                let crate::weights::WeightBody::Atomic { mut points, mut masses } = circle.body().clone() else {
                    unreachable!("circle_arclength is atomic")
                };
                points.push(encode_complex(&[c(*center)]));
                masses.push(Complex64::new(-2.0 * PI * radius, 0.0));
                Weight::atomic(Ambient::complex(1), points, masses)
            }
        };
        w.map_err(|e| e.to_string())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnsembleFamily {
    /// Atoms in the polydisk of `ℂ^dim` with complex masses.
    ComplexAtoms,
    /// Atoms in the ball of `ℝ^dim` with real signed masses.
    RealAtoms,
    /// Point distributions over `ℂ¹` with operators of order `≤ max_order`.
    PointDistribution,
}

/// Seeded random weights: case `i` draws its atom count from `atoms` and
/// its weight from the RNG stream `i` of the spec seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSpec {
    pub family: EnsembleFamily,
    pub dim: usize,
    pub cases: usize,
    /// Inclusive range of the number of points.
    pub atoms: [usize; 2],
    #[serde(default)]
    pub max_order: u32,
    #[serde(default)]
    pub bounds: AtomBounds,
}

impl EnsembleSpec {
    fn validate(&self) -> Result<(), String> {
        if self.atoms[0] > self.atoms[1] {
            return Err(format!("atoms range {:?} is empty", self.atoms));
        }
        if self.dim == 0 {
            return Err("ensemble dim must be positive".into());
        }
        if self.family == EnsembleFamily::PointDistribution && self.dim != 1 {
            return Err("point_distribution ensembles live in C^1".into());
        }
        Ok(())
    }

    /// Draws case `index`; returns the weight and its point count.
    pub fn draw(&self, rng: &mut ChaCha8Rng) -> Result<(Weight, usize), String> {
        let m = rng.random_range(self.atoms[0]..=self.atoms[1]);
        let w = match self.family {
            EnsembleFamily::ComplexAtoms => ensembles::complex_atoms(rng, self.dim, m, &self.bounds),
            EnsembleFamily::RealAtoms => ensembles::real_atoms(rng, self.dim, m, &self.bounds),
            EnsembleFamily::PointDistribution => ensembles::point_distribution(rng, m, self.max_order, &self.bounds),
        };
        w.map(|w| (w, m)).map_err(|e| e.to_string())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthCheck {
    /// Harmonic rank equals the number of atoms.
    EqualsAtoms,
    /// Harmonic rank of the realified weight is at least the analytic rank.
    AtLeastAnalytic,
    /// Rank strictly increases along `k_values`.
    StrictlyIncreasing,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpectedVerdict {
    Discrete,
    Continuous,
    Mixed,
    Inconclusive,
}

/// Kind-specific parameters; unset fields take the documented defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Parameters {
    /// Moment truncation `N`; defaults to twice the point count for ranks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    /// Relative rank threshold (default `1e-8`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_rel: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_rank: Option<usize>,
    /// Defaults to `points · (order_bound + 1)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_bound: Option<usize>,
    /// Defaults to the ensemble's `max_order`, else 0.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order_bound: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub support_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual_tol: Option<f64>,
    /// The case passes only if recovery reports failure.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub expect_failure: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_schedule: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper_bound: Option<f64>,
    /// Random `(ζ, t)` pairs for the projection–Fourier identity.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub projection_samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_directions: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_verdict: Option<ExpectedVerdict>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sphere_nodes: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_values: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub check: Option<GrowthCheck>,
    /// Number of variables for the Vandermonde check.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_vars: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree: Option<u32>,
    /// Seeded cases for kinds without weights.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cases: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radii: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angles: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_g_degree: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub name: String,
    pub kind: ExperimentKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ensemble: Option<EnsembleSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub weights: Vec<WeightSpec>,
    #[serde(default)]
    pub parameters: Parameters,
}

fn positive(name: &str, v: Option<f64>) -> Result<(), String> {
    match v {
        Some(x) if !(x > 0.0 && x.is_finite()) => Err(format!("{name} must be positive and finite, got {x}")),
        _ => Ok(()),
    }
}

impl ExperimentSpec {
    pub fn parse(text: &str) -> Result<Self, String> {
        let spec: ExperimentSpec = serde_json::from_str(text).map_err(|e| format!("spec parse error: {e}"))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("specs serialize")
    }

    /// Structural checks that do not need the experiment to run.
    pub fn validate(&self) -> Result<(), String> {
        if self.name.is_empty() || !self.name.chars().all(|ch| ch.is_ascii_alphanumeric() || "-_.".contains(ch)) {
            return Err(format!("name {:?} must be non-empty and use [A-Za-z0-9._-]", self.name));
        }
        if let Some(e) = &self.ensemble {
            e.validate()?;
        }
        for w in &self.weights {
            w.build()?;
        }
        let p = &self.parameters;
        if let Some(eps) = p.eps_rel {
            if !(eps > 0.0 && eps < 1.0) {
                return Err(format!("eps_rel must lie in (0, 1), got {eps}"));
            }
        }
        for (name, v) in [
            ("support_tol", p.support_tol),
            ("mass_tol", p.mass_tol),
            ("residual_tol", p.residual_tol),
            ("tolerance", p.tolerance),
            ("upper_bound", p.upper_bound),
        ] {
            positive(name, v)?;
        }
        if let Some(s) = &p.r_schedule {
            if s.is_empty() || s.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
                return Err("r_schedule must be a non-empty list of positive radii".into());
            }
        }
        if let Some(r) = &p.radii {
            if r.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
                return Err("radii must be positive".into());
            }
        }
        if let Some(k) = &p.k_values {
            if k.is_empty() {
                return Err("k_values must not be empty".into());
            }
        }
        if p.n_directions.is_some_and(|n| n < 10) {
            return Err("n_directions must be at least 10".into());
        }
        match self.kind {
            ExperimentKind::VandermondeCheck => {
                if !self.weights.is_empty() || self.ensemble.is_some() {
                    return Err("VandermondeCheck takes no weights".into());
                }
                let n = p.n_vars.unwrap_or(2);
                if !(2..=crate::vandermonde::MAX_VARIABLES).contains(&n) {
                    return Err(format!("n_vars must lie in 2..={}", crate::vandermonde::MAX_VARIABLES));
                }
            }
            ExperimentKind::HarmonicGrowth => {
                if p.check == Some(GrowthCheck::EqualsAtoms)
                    && !self.weights.is_empty()
                    && p.expected_rank.is_none()
                {
                    return Err("equals_atoms on explicit weights needs expected_rank".into());
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// Number of cases the spec expands to.
    pub fn case_count(&self) -> usize {
        match self.kind {
            ExperimentKind::VandermondeCheck => self.parameters.cases.unwrap_or(50) + 1,
            _ => self.weights.len() + self.ensemble.as_ref().map_or(0, |e| e.cases),
        }
    }
}

/// Point count of an explicit weight, when it has one.
pub fn point_count(w: &Weight) -> Option<usize> {
    match w.body() {
        crate::weights::WeightBody::Atomic { points, .. } | crate::weights::WeightBody::PointDistribution { points, .. } => {
            Some(points.len())
        }
        _ => None,
    }
}

pub(crate) fn is_complex(w: &Weight) -> bool {
    w.ambient().kind == SpaceKind::Complex
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weight_schema_examples() {
        let text = r#"{"type":"atomic","ambient":{"kind":"complex","dim":1},
            "points":[[[0.5,0.0]],[[-0.5,0.25]]],"masses":[[1,0],[0,1]]}"#;
        let spec: WeightSpec = serde_json::from_str(text).unwrap();
        let w = spec.build().unwrap();
        assert_eq!(point_count(&w), Some(2));

        let real = r#"{"type":"atomic","ambient":{"kind":"real","dim":2},"points":[[1,2]],"masses":[[1,0]]}"#;
        assert!(serde_json::from_str::<WeightSpec>(real).unwrap().build().is_ok());

        let mixed = r#"{"type":"atomic","ambient":{"kind":"real","dim":1},"points":[[[1,0]]],"masses":[[1,0]]}"#;
        assert!(serde_json::from_str::<WeightSpec>(mixed).unwrap().build().is_err());

        let unknown = r#"{"type":"atomic","ambient":{"kind":"real","dim":1},"points":[],"masses":[],"extra":1}"#;
        assert!(serde_json::from_str::<WeightSpec>(unknown).is_err());

        let cos = r#"{"type":"fourier_radial","ambient":{"kind":"real","dim":3},"preset":"cos","truncation":6}"#;
        assert_eq!(serde_json::from_str::<WeightSpec>(cos).unwrap().build().unwrap().truncation(), Some(6));

        let dens = r#"{"type":"density","ambient":{"kind":"real","dim":1},"bounds":[[0,1]],
            "density":{"name":"uniform_box","value":[1,0]}}"#;
        assert!(serde_json::from_str::<WeightSpec>(dens).unwrap().build().is_ok());
    }

    #[test]
    fn circle_minus_delta_kills_holomorphic_moments() {
        let w = WeightSpec::CircleMinusDelta {
            center: [0.25, 0.0],
            radius: 1.0,
            nodes: 64,
        }
        .build()
        .unwrap();
        for k in 0..5u32 {
            let m = w.bi_moment(&MultiIndex::new(vec![k]), &MultiIndex::zeros(1)).unwrap();
            assert!(m.norm() < 1e-12, "k = {k}: {m}");
        }
    }

    #[test]
    fn validation() {
        let ok = r#"{"name":"x","kind":"RankTable","seed":3,
            "ensemble":{"family":"complex_atoms","dim":1,"cases":2,"atoms":[3,3]},"parameters":{"n":5}}"#;
        let spec = ExperimentSpec::parse(ok).unwrap();
        assert_eq!(ExperimentSpec::parse(&spec.to_json()).unwrap(), spec);
        assert!(ExperimentSpec::parse(&ok.replace("\"n\":5", "\"eps_rel\":2")).is_err());
        assert!(ExperimentSpec::parse(&ok.replace("[3,3]", "[3,2]")).is_err());
        assert!(ExperimentSpec::parse(&ok.replace("\"x\"", "\"a/b\"")).is_err());
        assert!(ExperimentSpec::parse("{").is_err());
    }
}
