//! Built-in specs, one per acceptance check.

use super::spec::{
    AmbientKind, AmbientSpec, DensitySpec, EnsembleFamily, EnsembleSpec, ExperimentKind, ExperimentSpec, GrowthCheck,
    Parameters, RadialPreset, WeightSpec,
};
use crate::ensembles::AtomBounds;

fn ensemble(family: EnsembleFamily, dim: usize, cases: usize, atoms: [usize; 2], max_order: u32) -> Option<EnsembleSpec> {
    Some(EnsembleSpec {
        family,
        dim,
        cases,
        atoms,
        max_order,
        bounds: AtomBounds::default(),
    })
}

fn spec(name: &str, kind: ExperimentKind, seed: u64) -> ExperimentSpec {
    ExperimentSpec {
        name: name.into(),
        kind,
        seed,
        ensemble: None,
        weights: Vec::new(),
        parameters: Parameters::default(),
    }
}

fn complex1() -> AmbientSpec {
    AmbientSpec {
        kind: AmbientKind::Complex,
        dim: 1,
    }
}

fn real(dim: usize) -> AmbientSpec {
    AmbientSpec {
        kind: AmbientKind::Real,
        dim,
    }
}

/// All built-in specs, in suite order.
pub fn builtin_specs() -> Vec<ExperimentSpec> {
    use super::spec::Coords;
    use EnsembleFamily::*;
    use ExperimentKind::*;
    let mut out = Vec::new();

    let mut s = spec("rank-atoms", RankTable, 1);
    s.ensemble = ensemble(ComplexAtoms, 1, 100, [1, 6], 0);
    s.parameters.eps_rel = Some(1e-8);
    out.push(s);

    let mut s = spec("recovery-1d", Recovery, 1);
    s.ensemble = ensemble(ComplexAtoms, 1, 100, [1, 6], 0);
    out.push(s);

    let mut s = spec("recovery-distributions", Recovery, 3);
    s.ensemble = ensemble(PointDistribution, 1, 50, [1, 3], 2);
    out.push(s);

    let mut s = spec("recovery-density-control", Recovery, 0);
    s.weights = vec![WeightSpec::Density {
        ambient: complex1(),
        bounds: vec![[0.0, 1.0], [0.0, 1.0]],
        density: DensitySpec::UniformBox { value: [1.0, 0.0] },
        quadrature_order: None,
    }];
    s.parameters.m_bound = Some(4);
    s.parameters.order_bound = Some(2);
    s.parameters.expect_failure = true;
    out.push(s);

    for (name, dim, seed) in [("recovery-c2", 2, 4), ("recovery-c3", 3, 5)] {
        let mut s = spec(name, Recovery, seed);
        s.ensemble = ensemble(ComplexAtoms, dim, 25, [1, 4], 0);
        s.parameters.support_tol = Some(1e-5);
        s.parameters.mass_tol = Some(1e-5);
        s.parameters.residual_tol = Some(1e-6);
        out.push(s);
    }

    let mut s = spec("recovery-collision", Recovery, 0);
    s.weights = vec![WeightSpec::Atomic {
        ambient: AmbientSpec {
            kind: AmbientKind::Complex,
            dim: 2,
        },
        points: vec![
            Coords::Complex(vec![[1.0, 0.0], [1.0, 0.0]]),
            Coords::Complex(vec![[-1.0, 0.0], [1.0, 0.0]]),
        ],
        masses: vec![[1.0, 0.0], [-1.0, 0.0]],
    }];
    s.parameters.support_tol = Some(1e-5);
    s.parameters.mass_tol = Some(1e-5);
    s.parameters.residual_tol = Some(1e-6);
    out.push(s);

    let mut s = spec("twist-monotonicity", TwistMonotonicity, 5);
    s.ensemble = ensemble(ComplexAtoms, 1, 100, [1, 6], 0);
    s.parameters.n = Some(3);
    s.parameters.max_g_degree = Some(3);
    out.push(s);

    let mut s = spec("wiener-two-atoms", Wiener, 0);
    s.weights = vec![WeightSpec::Atomic {
        ambient: real(1),
        points: vec![Coords::Real(vec![1.0]), Coords::Real(vec![-1.0])],
        masses: vec![[0.5, 0.0], [0.5, 0.0]],
    }];
    s.parameters.r_schedule = Some(vec![32.0]);
    s.parameters.expected = Some(0.5);
    s.parameters.tolerance = Some(1e-6);
    out.push(s);

    let mut s = spec("wiener-uniform-segment", Wiener, 0);
    s.weights = vec![WeightSpec::Density {
        ambient: real(1),
        bounds: vec![[0.0, 1.0]],
        density: DensitySpec::UniformBox { value: [1.0, 0.0] },
        quadrature_order: None,
    }];
    s.parameters.r_schedule = Some(vec![64.0]);
    s.parameters.upper_bound = Some(0.05);
    out.push(s);

    let mut s = spec("sphere-average", SphereAverage, 7);
    s.ensemble = ensemble(RealAtoms, 3, 20, [1, 5], 0);
    s.parameters.sphere_nodes = Some(500);
    s.parameters.tolerance = Some(0.01);
    out.push(s);

    let mut s = spec("harmonic-odd", HarmonicGrowth, 8);
    s.ensemble = ensemble(RealAtoms, 3, 20, [1, 4], 0);
    s.parameters.k_values = Some(vec![6]);
    s.parameters.check = Some(GrowthCheck::EqualsAtoms);
    out.push(s);

    let mut s = spec("harmonic-even", HarmonicGrowth, 9);
    s.ensemble = ensemble(ComplexAtoms, 1, 20, [1, 4], 0);
    s.parameters.k_values = Some(vec![6]);
    s.parameters.check = Some(GrowthCheck::AtLeastAnalytic);
    out.push(s);

    let mut s = spec("harmonic-cos", HarmonicGrowth, 0);
    s.weights = vec![WeightSpec::FourierRadial {
        ambient: real(3),
        series: None,
        validity_radius: None,
        preset: Some(RadialPreset::Cos),
        truncation: Some(8),
    }];
    s.parameters.k_values = Some((2..=8).collect());
    s.parameters.check = Some(GrowthCheck::StrictlyIncreasing);
    out.push(s);

    for (name, n, seed) in [("vandermonde-2", 2, 10), ("vandermonde-3", 3, 11)] {
        let mut s = spec(name, VandermondeCheck, seed);
        s.parameters.n_vars = Some(n);
        s.parameters.cases = Some(50);
        out.push(s);
    }

    let mut s = spec("cauchy-circle", CauchyDecay, 0);
    s.weights = vec![WeightSpec::CircleMinusDelta {
        center: [0.0, 0.0],
        radius: 1.0,
        nodes: 2048,
    }];
    s.parameters.radii = Some(vec![1.5, 2.0, 3.0]);
    out.push(s);

    let mut s = spec("projection-fourier", Wiener, 12);
    s.ensemble = ensemble(RealAtoms, 3, 50, [1, 5], 0);
    s.parameters.projection_samples = Some(20);
    s.parameters.tolerance = Some(1e-12);
    out.push(s);

    out
}
