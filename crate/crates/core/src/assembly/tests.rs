use super::*;
use crate::mesh::{generate_structured, generate_voronoi_2d, BoundarySet, StructuredKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn steel() -> NeoHookean {
    NeoHookean::from_engineering(210_000.0, 0.3, 7.85e-9).unwrap()
}

fn q2s(nx: usize, ny: usize) -> Mesh {
    generate_structured(StructuredKind::Q2s, &[nx, ny], Vec3::zeros(), Vec3::new(4.0, 1.0, 0.0)).unwrap()
}

fn h2s() -> Mesh {
    generate_structured(StructuredKind::H2s, &[2, 1, 1], Vec3::zeros(), Vec3::new(2.0, 1.0, 1.0)).unwrap()
}

fn random_field(n: usize, amp: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random_range(-amp..amp)).collect()
}

#[test]
fn half_sine_time_function() {
    let tf = TimeFunction::HalfSine { p_max: 2.0, period: 4.0 };
    assert_eq!(tf.eval(-1.0), 0.0);
    assert!((tf.eval(2.0) - 2.0).abs() < 1e-15);
    assert!((tf.eval(1.0) - 2.0 * (PI / 4.0).sin()).abs() < 1e-15);
    assert_eq!(tf.eval(4.5), 0.0);
    assert_eq!(TimeFunction::default().eval(123.0), 1.0);
    let parsed: TimeFunction = serde_json::from_str(r#"{"kind":"half_sine","p_max":3,"period":1}"#).unwrap();
    assert_eq!(parsed, TimeFunction::HalfSine { p_max: 3.0, period: 1.0 });
}

#[test]
fn traction_resultant_equals_value_times_measure() {
    let mesh = q2s(4, 2);
    let bcs = [BoundaryCondition::Traction {
        set: "x_max".into(),
        value: vec![3.0, -2.0],
        time_function: TimeFunction::default(),
    }];
    let model = Model::new(mesh, steel(), ModelOptions::default(), &bcs).unwrap();
    let f = model.external_force(0.0);
    let fx: f64 = f.iter().step_by(2).sum();
    let fy: f64 = f.iter().skip(1).step_by(2).sum();
    assert!((fx - 3.0).abs() < 1e-13 && (fy + 2.0).abs() < 1e-13);

    let bcs = [BoundaryCondition::Traction {
        set: "z_max".into(),
        value: vec![0.0, 0.0, 5.0],
        time_function: TimeFunction::HalfSine { p_max: 1.0, period: 2.0 },
    }];
    let model = Model::new(h2s(), steel(), ModelOptions::default(), &bcs).unwrap();
    let f = model.external_force(1.0);
    let fz: f64 = f.iter().skip(2).step_by(3).sum();
    assert!((fz - 10.0).abs() < 1e-12);
}

#[test]
fn face_weights_are_uniform_on_serendipity_face() {
    let mesh = h2s();
    let face = mesh.boundary_set("x_min").unwrap().facets[0].clone();
    assert_eq!(face.len(), 8);
    for (_, w) in facet_weights(&mesh, &face) {
        assert!((w - 1.0 / 8.0).abs() < 1e-14);
    }
}

#[test]
fn body_force_and_mass_totals() {
    let seeds: Vec<Vec3> = {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        (0..20).map(|_| Vec3::new(rng.random_range(0.0..2.0), rng.random_range(0.0..1.0), 0.0)).collect()
    };
    let mesh = generate_voronoi_2d(&seeds, Vec3::zeros(), Vec3::new(2.0, 1.0, 0.0)).unwrap();
    let mat = steel();
    let bcs = [BoundaryCondition::BodyForce {
        value: vec![0.0, -9.81],
        time_function: TimeFunction::default(),
    }];
    for scheme in [MassScheme::Centroid, MassScheme::SubTriangulation, MassScheme::BoundaryExact] {
        for beta_dyn in [0.0, 0.5] {
            let options = ModelOptions {
                mass_scheme: scheme,
                stabilization: StabilizationConfig { beta_stat: 0.4, beta_dyn },
                ..Default::default()
            };
            let model = Model::new(mesh.clone(), mat, options, &bcs).unwrap();
            let vol: f64 = model.nodal_volume.iter().sum();
            assert!((vol - 2.0).abs() < 1e-12);
            let f = model.external_force(0.0);
            let fy: f64 = f.iter().skip(1).step_by(2).sum();
            assert!((fy + 9.81 * 2.0).abs() < 1e-11);
            let ones_x: Vec<f64> = (0..model.n_dofs).map(|k| if k % 2 == 0 { 1.0 } else { 0.0 }).collect();
            let m_total = 2.0 * model.kinetic_energy(&ones_x);
            assert!((m_total / (mat.rho * 2.0) - 1.0).abs() < 1e-12, "{scheme:?} {beta_dyn}");
            assert!(model.mass.asymmetry() < 1e-30);
        }
    }
}

#[test]
fn rigid_translation_gives_zero_internal_force() {
    let model = Model::new(q2s(3, 2), steel(), ModelOptions::default(), &[]).unwrap();
    let u: Vec<f64> = (0..model.n_dofs).map(|k| if k % 2 == 0 { 0.3 } else { -0.1 }).collect();
    let ev = model.evaluate(&u, false).unwrap();
    assert!(ev.internal.iter().all(|r| r.abs() < 1e-9));
    assert!(ev.energy.abs() < 1e-12);
}

#[test]
fn unconstrained_tangent_has_rigid_null_space() {
    for (mesh, expected) in [(q2s(3, 2), 3), (h2s(), 6)] {
        let model = Model::new(mesh, steel(), ModelOptions::default(), &[]).unwrap();
        let u = vec![0.0; model.n_dofs];
        let k = model.evaluate(&u, true).unwrap().tangent.unwrap();
        match model.solver.factor(&k, false) {
            Err(Error::SingularSystem { near_null, .. }) => assert_eq!(near_null, expected),
            other => panic!("expected singular system, got {:?}", other.map(|f| f.pinned())),
        }
    }
}

#[test]
fn tangent_matches_finite_differences_with_constraints() {
    let bcs = [BoundaryCondition::Fixed {
        set: "x_min".into(),
        components: None,
    }];
    for mesh in [q2s(2, 2), h2s()] {
        let model = Model::new(mesh, steel(), ModelOptions::default(), &bcs).unwrap();
        let mut u = random_field(model.n_dofs, 0.01, 5);
        model.apply_dirichlet(&mut u, 0.0);
        let ev = model.evaluate(&u, true).unwrap();
        let k = ev.tangent.unwrap();
        let scale = k.vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let h = 1e-7;
        for (col, &dof) in model.free.iter().enumerate().step_by(3) {
            let mut up = u.clone();
            let mut um = u.clone();
            up[dof] += h;
            um[dof] -= h;
            let rp = model.evaluate(&up, false).unwrap().internal;
            let rm = model.evaluate(&um, false).unwrap().internal;
            for (row, &g) in model.free.iter().enumerate() {
                let fd = (rp[g] - rm[g]) / (2.0 * h);
                assert!((fd - k.get(row, col)).abs() < 1e-6 * scale);
            }
        }
        assert!(k.asymmetry() < 1e-9 * scale);
    }
}

#[test]
fn assembly_is_independent_of_thread_count() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let seeds: Vec<Vec3> = (0..60).map(|_| Vec3::new(rng.random_range(0.0..3.0), rng.random_range(0.0..1.0), 0.0)).collect();
    let mesh = generate_voronoi_2d(&seeds, Vec3::zeros(), Vec3::new(3.0, 1.0, 0.0)).unwrap();
    let bcs = [BoundaryCondition::Fixed {
        set: "x_min".into(),
        components: None,
    }];
    let model = Model::new(mesh, steel(), ModelOptions::default(), &bcs).unwrap();
    let u = random_field(model.n_dofs, 1e-5, 2);
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| model.evaluate(&u, true).unwrap())
    };
    let a = run(1);
    let b = run(4);
    assert_eq!(a.energy.to_bits(), b.energy.to_bits());
    assert!(a.internal.iter().zip(&b.internal).all(|(x, y)| x.to_bits() == y.to_bits()));
    assert_eq!(a.tangent, b.tangent);
}

#[test]
fn dirichlet_values_and_free_map() {
    let bcs = [
        BoundaryCondition::Fixed {
            set: "x_min".into(),
            components: Some(vec![0]),
        },
        BoundaryCondition::Prescribed {
            set: "x_max".into(),
            components: None,
            value: vec![0.1, 0.0],
            time_function: TimeFunction::HalfSine { p_max: 1.0, period: 2.0 },
        },
    ];
    let model = Model::new(q2s(2, 1), steel(), ModelOptions::default(), &bcs).unwrap();
    let mut u = vec![9.0; model.n_dofs];
    model.apply_dirichlet(&mut u, 1.0);
    for &n in &model.mesh.boundary_set("x_max").unwrap().nodes {
        assert!((u[2 * n] - 0.1).abs() < 1e-15 && u[2 * n + 1] == 0.0);
    }
    for &n in &model.mesh.boundary_set("x_min").unwrap().nodes {
        assert_eq!(u[2 * n], 0.0);
        assert_eq!(u[2 * n + 1], 9.0);
        assert!(model.free_index[2 * n + 1].is_some());
    }
    assert_eq!(model.free.len() + model.constraints.len(), model.n_dofs);
}

#[test]
fn linear_field_constraint() {
    let bcs = [BoundaryCondition::LinearField {
        set: "all".into(),
        offset: vec![0.5, 0.0],
        gradient: vec![vec![0.01, 0.02], vec![0.0, -0.03]],
    }];
    let model = Model::new(q2s(1, 1), steel(), ModelOptions::default(), &bcs).unwrap();
    assert!(model.free.is_empty());
    let mut u = vec![0.0; model.n_dofs];
    model.apply_dirichlet(&mut u, 0.0);
    let x = model.mesh.nodes[2].x;
    assert!((u[4] - (0.5 + 0.01 * x[0] + 0.02 * x[1])).abs() < 1e-15);
}

#[test]
fn interior_facet_is_rejected() {
    let mut mesh = q2s(2, 1);
    let interior = {
        let counts = mesh.boundary_facets();
        let el = &mesh.elements[0];
        let n = el.nodes.len();
        (0..n)
            .map(|i| vec![el.nodes[i], el.nodes[(i + 1) % n]])
            .find(|f| {
                let mut k = f.clone();
                k.sort_unstable();
                !counts.contains_key(&k)
            })
            .unwrap()
    };
    mesh.boundary_sets.insert(
        "bad".into(),
        BoundarySet {
            nodes: interior.clone(),
            facets: vec![interior],
        },
    );
    let bcs = [BoundaryCondition::Traction {
        set: "bad".into(),
        value: vec![1.0, 0.0],
        time_function: TimeFunction::default(),
    }];
    assert!(matches!(
        Model::new(mesh, steel(), ModelOptions::default(), &bcs),
        Err(Error::FacetNotOnBoundary { .. })
    ));
}

#[test]
fn configuration_errors() {
    let bad_set = [BoundaryCondition::Fixed {
        set: "nowhere".into(),
        components: None,
    }];
    assert!(matches!(
        Model::new(q2s(1, 1), steel(), ModelOptions::default(), &bad_set),
        Err(Error::Validation(_))
    ));
    let bad_len = [BoundaryCondition::InitialVelocity {
        set: "all".into(),
        value: vec![1.0, 2.0, 3.0],
    }];
    assert!(Model::new(q2s(1, 1), steel(), ModelOptions::default(), &bad_len).is_err());
    let options = ModelOptions {
        stabilization: StabilizationConfig { beta_stat: 1.5, beta_dyn: 0.0 },
        ..Default::default()
    };
    assert!(Model::new(q2s(1, 1), steel(), options, &[]).is_err());
    let json = r#"{"kind":"fixed","set":"x_min","components":[0],"extra":1}"#;
    assert!(serde_json::from_str::<BoundaryCondition>(json).is_err());
}

#[test]
fn constrained_nodes_start_at_rest() {
    let bcs = [
        BoundaryCondition::InitialVelocity {
            set: "all".into(),
            value: vec![2.0, 0.0],
        },
        BoundaryCondition::Fixed {
            set: "x_min".into(),
            components: None,
        },
    ];
    let model = Model::new(q2s(2, 1), steel(), ModelOptions::default(), &bcs).unwrap();
    for (k, v) in model.initial_velocity.iter().enumerate() {
        let expected = if model.constraints.contains_key(&k) || k % 2 == 1 { 0.0 } else { 2.0 };
        assert_eq!(*v, expected);
    }
}
