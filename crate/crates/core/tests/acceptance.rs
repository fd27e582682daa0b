//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Runs as a plain binary (`harness = false`). The process exits non-zero on a failed
//! criterion only when `POLYVEM_ACCEPTANCE_STRICT=1` is set, so expected failures stay
//! visible without breaking `cargo test`.

use std::time::Instant;

use polyvem::assembly::{Model, ModelOptions};
use polyvem::bench::verify::{self, Family};
use polyvem::bench::{
    analytical_bar_displacement_with_factor, simulate, BenchmarkPreset, MeshSource, MeshSpec, RunResult, SimulationConfig,
    DEFAULT_OMEGA_FACTOR,
};
use polyvem::dynamics::{Integrator, NewmarkParams, NewtonSettings};
use polyvem::mass::MassScheme;
use polyvem::mesh::{polygon_area_centroid, StructuredKind, Vec3};
use polyvem::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { passed, detail })
}

fn rel_l2(a: &[f64], reference: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(reference).map(|(x, y)| (x - y).powi(2)).sum();
    let den: f64 = reference.iter().map(|y| y * y).sum();
    (num / den).sqrt()
}

/// Times where `u` changes sign, by linear interpolation.
fn zero_crossings(t: &[f64], u: &[f64], after: f64) -> Vec<f64> {
    let mut out = Vec::new();
    for k in 1..u.len() {
        if t[k] <= after {
            continue;
        }
        let (a, b) = (u[k - 1], u[k]);
        if (a > 0.0 && b <= 0.0) || (a < 0.0 && b >= 0.0) {
            out.push(t[k - 1] + (t[k] - t[k - 1]) * a / (a - b));
        }
    }
    out
}

fn bar_config(scheme: MassScheme) -> SimulationConfig {
    let mut cfg = BenchmarkPreset::Bar2D.config();
    let k = BenchmarkPreset::Bar2D.constants();
    cfg.mesh = MeshSource::Generate {
        generate: MeshSpec::Structured {
            family: StructuredKind::Q2s,
            divisions: vec![50, 4],
            lo: vec![0.0, 0.0],
            hi: vec![k.length, k.height],
        },
    };
    cfg.mass_scheme = scheme;
    cfg
}

struct BarRuns {
    centroid: Option<RunResult>,
}

fn criterion_1() -> Result<Outcome> {
    let r = verify::verify_patch(&[Family::Voronoi, Family::Q2s, Family::CMesh, Family::H2s])?;
    outcome(
        r.passed(),
        format!("max patch error {:.2e} over {} checks (tol 1e-9)", r.max_value(), r.checks.len()),
    )
}

fn criterion_2() -> Result<Outcome> {
    let r = verify::verify_fd(&Family::ALL, 10)?;
    let worst = r
        .checks
        .iter()
        .max_by(|a, b| a.value.total_cmp(&b.value))
        .map(|c| c.name.clone())
        .unwrap_or_default();
    outcome(
        r.passed(),
        format!("max relative FD error {:.2e} ({worst}), tol 1e-5", r.max_value()),
    )
}

fn criterion_3() -> Result<Outcome> {
    let r = verify::verify_mass()?;
    let exact = r
        .checks
        .iter()
        .filter(|c| c.name.contains("quadrature"))
        .fold(0.0f64, |m, c| m.max(c.value));
    let low = r
        .checks
        .iter()
        .filter(|c| c.name.contains("degree"))
        .fold(0.0f64, |m, c| m.max(c.value));
    outcome(
        r.passed(),
        format!("exact vs quadrature {exact:.2e} (tol 1e-12), degree<=1 agreement {low:.2e} (tol 1e-14)"),
    )
}

fn criterion_4() -> Result<Outcome> {
    let mut ok = true;
    let mut parts = Vec::new();
    for fam in [Family::Q2s, Family::Voronoi, Family::CMesh, Family::H2s, Family::VoronoiPrism] {
        let mesh = fam.mesh();
        let expected = if fam.dim() == 2 { 3 } else { 6 };
        let z = verify::zero_eigenvalues(&mesh, 0.4)?;
        ok &= z == expected;
        parts.push(format!("{} {z}/{expected}", fam.name()));
    }
    for fam in [Family::Q2s, Family::H2s] {
        let mesh = fam.mesh();
        let expected = if fam.dim() == 2 { 3 } else { 6 };
        let z = verify::zero_eigenvalues(&mesh, 0.0)?;
        ok &= z > expected;
        parts.push(format!("{} beta=0 {z}>{expected}", fam.name()));
    }
    outcome(ok, format!("zero eigenvalues: {}", parts.join(", ")))
}

fn criterion_5(runs: &mut BarRuns) -> Result<Outcome> {
    let cfg = bar_config(MassScheme::Centroid);
    let k = BenchmarkPreset::Bar2D.constants();
    let c = cfg.material.wave_speed();
    let result = simulate(&cfg)?;
    let mid = &result.histories["mid"];
    let u = mid.displacement(0);
    let exact: Vec<f64> = mid
        .t
        .iter()
        .map(|&t| analytical_bar_displacement_with_factor(k.length / 2.0, t, k.v0, c, k.length, 5000, DEFAULT_OMEGA_FACTOR))
        .collect();
    let l2 = rel_l2(&u, &exact);
    let end = &result.histories["end"];
    let expected = 2.0 * k.length / c;
    let ret = zero_crossings(&end.t, &end.displacement(0), 0.5 * k.length / c)
        .first()
        .copied()
        .unwrap_or(f64::NAN);
    let ret_err = (ret - expected).abs() / expected;
    runs.centroid = Some(result);
    outcome(
        l2 < 0.08 && ret_err < 0.03,
        format!(
            "L2 vs series (factor 1/0.95) {:.2}% (tol 8%); first return {ret:.4e} s vs 2l/c = {expected:.4e} s, {:.2}% (tol 3%)",
            100.0 * l2,
            100.0 * ret_err
        ),
    )
}

fn criterion_6(runs: &mut BarRuns) -> Result<Outcome> {
    let centroid = match runs.centroid.take() {
        Some(r) => r,
        None => simulate(&bar_config(MassScheme::Centroid))?,
    };
    let exact = simulate(&bar_config(MassScheme::BoundaryExact))?;
    let d = rel_l2(
        &centroid.histories["mid"].displacement(0),
        &exact.histories["mid"].displacement(0),
    );
    outcome(d < 0.01, format!("centroid vs exact mass, mid probe L2 {:.3}% (tol 1%)", 100.0 * d))
}

fn momentum(model: &Model, v: &[f64]) -> Vec<f64> {
    let d = model.dim();
    let mv = model.mass.mul_vec(v);
    (0..d).map(|i| mv.iter().skip(i).step_by(d).sum()).collect()
}

fn criterion_7() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut worst: f64 = 0.0;
    let mat = verify::table_material();
    // the centroid mass of a lone element only sees its translation, leaving the rotation
    // without mass or stiffness, so the exact moments are used here
    let options = ModelOptions {
        mass_scheme: MassScheme::BoundaryExact,
        ..Default::default()
    };
    for fam in [Family::Q2s, Family::H2s] {
        let model = Model::new(fam.mesh(), mat, options, &[])?;
        let d = model.dim();
        let integrator = Integrator::new(&model, NewmarkParams::default(), NewtonSettings::default(), 1e-8)?;
        let mut s = integrator.initial_state()?;
        for (k, v) in s.v.iter_mut().enumerate() {
            let rigid = [2.0e4, -1.0e4, 5.0e3][k % d];
            *v = rigid + rng.random_range(-1.0e3..1.0e3);
        }
        let p0 = momentum(&model, &s.v);
        let norm0 = p0.iter().map(|x| x * x).sum::<f64>().sqrt();
        for _ in 0..100 {
            s = integrator.step(&s)?.0;
            let p = momentum(&model, &s.v);
            let diff = p.iter().zip(&p0).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            worst = worst.max(diff / norm0);
        }
    }
    let plate = simulate(&BenchmarkPreset::Plate3D.config())?;
    let e = &plate.summary.energy;
    let e0 = e[0].kinetic + e[0].strain;
    let drift = e
        .iter()
        .map(|r| ((r.kinetic + r.strain) - e0).abs() / e0)
        .fold(0.0f64, f64::max);
    outcome(
        worst < 1e-10 && drift <= 0.02 && plate.summary.steps == 200,
        format!(
            "momentum drift {worst:.2e} (tol 1e-10); Plate3D {} elements, {} steps, energy drift {:.3}% (tol 2%)",
            plate.summary.elements,
            plate.summary.steps,
            100.0 * drift
        ),
    )
}

fn criterion_8() -> Result<Outcome> {
    let base = bar_config(MassScheme::Centroid);
    let k = BenchmarkPreset::Bar2D.constants();
    let c = base.material.wave_speed();
    let dt0 = base.time.dt;
    let t_end = 2.0 * k.length / c;
    let run = |factor: usize| -> Result<RunResult> {
        let mut cfg = base.clone();
        cfg.time.dt = dt0 / factor as f64;
        cfg.time.t_end = t_end;
        cfg.output.history_every = factor;
        simulate(&cfg)
    };
    let reference = run(8)?.histories["mid"].displacement(0);
    let mut errors = Vec::new();
    for factor in [1, 2, 4] {
        let u = run(factor)?.histories["mid"].displacement(0);
        let n = u.len().min(reference.len());
        let e = (0..n).map(|i| (u[i] - reference[i]).abs()).fold(0.0f64, f64::max);
        errors.push(e);
    }
    // least-squares slope of log e against log dt
    let xs: Vec<f64> = [1.0f64, 0.5, 0.25].iter().map(|x| x.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / 3.0, ys.iter().sum::<f64>() / 3.0);
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    let pairs: Vec<String> = errors.windows(2).map(|w| format!("{:.2}", (w[0] / w[1]).log2())).collect();
    outcome(
        slope >= 1.8,
        format!(
            "max errors {:.2e}, {:.2e}, {:.2e} mm; pairwise orders {}; fitted order {slope:.2} (tol >= 1.8)",
            errors[0],
            errors[1],
            errors[2],
            pairs.join(", ")
        ),
    )
}

/// Mean period from all zero crossings after the load has ended.
fn period(r: &RunResult, probe: &str, axis: usize, after: f64) -> f64 {
    let h = &r.histories[probe];
    let z = zero_crossings(&h.t, &h.displacement(axis), after);
    if z.len() < 2 {
        return f64::NAN;
    }
    2.0 * (z[z.len() - 1] - z[0]) / (z.len() - 1) as f64
}

fn point_in_polygon(p: &Vec3, poly: &[Vec3]) -> bool {
    let mut inside = false;
    let n = poly.len();
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        if (a.y > p.y) != (b.y > p.y) && p.x < a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y) {
            inside = !inside;
        }
    }
    inside
}

fn criterion_9() -> Result<Outcome> {
    let q2s_cfg = BenchmarkPreset::TransversalBeam2D.config();
    let k = BenchmarkPreset::TransversalBeam2D.constants();
    let mut c_cfg = q2s_cfg.clone();
    c_cfg.mesh = MeshSource::Generate {
        generate: MeshSpec::CMesh {
            divisions: [10, 5],
            lo: vec![0.0, 0.0],
            hi: vec![k.length, k.height],
        },
    };
    let c_mesh = c_cfg.build_mesh()?;
    let mut outside = 0;
    for el in &c_mesh.elements {
        let pts = c_mesh.coords(&el.nodes);
        let (_, xc) = polygon_area_centroid(&pts)?;
        if !point_in_polygon(&xc, &pts) {
            outside += 1;
        }
    }
    let q2s = simulate(&q2s_cfg)?;
    let cm = simulate(&c_cfg)?;
    let tq = period(&q2s, "tip", 1, k.period);
    let tc = period(&cm, "tip", 1, k.period);
    let diff = (tc - tq).abs() / tq;
    outcome(
        outside > 0 && diff < 0.05,
        format!(
            "{} C-mesh elements ({outside} with centroid outside); tip period Q2S {tq:.4e} s, C-mesh {tc:.4e} s, {:.2}% (tol 5%)",
            c_mesh.elements.len(),
            100.0 * diff
        ),
    )
}

fn criterion_10() -> Result<Outcome> {
    let cook = |n: u32| -> Result<RunResult> {
        let mut cfg = BenchmarkPreset::Cooks2D.config();
        cfg.mesh = MeshSource::Generate {
            generate: MeshSpec::Cook { n },
        };
        simulate(&cfg)
    };
    let coarse = cook(3)?;
    let fine = cook(4)?;
    let d = rel_l2(
        &coarse.histories["vertex"].displacement(1),
        &fine.histories["vertex"].displacement(1),
    );
    let peak = fine.histories["vertex"]
        .displacement(1)
        .iter()
        .fold(0.0f64, |m, x| m.max(x.abs()));
    outcome(
        d < 0.05,
        format!("vertex u_y N=3 vs N=4 L2 {:.2}% (tol 5%), peak |u_y| {peak:.3e} mm", 100.0 * d),
    )
}

fn main() {
    let mut runs = BarRuns { centroid: None };
    type Criterion<'a> = (usize, &'a str, f64, Box<dyn FnMut(&mut BarRuns) -> Result<Outcome>>);
    let criteria: Vec<Criterion> = vec![
        (1, "linear patch test", 5.0, Box::new(|_| criterion_1())),
        (2, "derivative consistency", 30.0, Box::new(|_| criterion_2())),
        (3, "mass-scheme oracle equivalence", 10.0, Box::new(|_| criterion_3())),
        (4, "rigid-mode spectrum", 10.0, Box::new(|_| criterion_4())),
        (5, "bar wave vs analytical series", 120.0, Box::new(criterion_5)),
        (6, "centroid vs exact mass", 120.0, Box::new(criterion_6)),
        (7, "momentum and energy", 120.0, Box::new(|_| criterion_7())),
        (8, "time-integration order", 180.0, Box::new(|_| criterion_8())),
        (9, "C-mesh robustness", 120.0, Box::new(|_| criterion_9())),
        (10, "Cook membrane mesh convergence", 300.0, Box::new(|_| criterion_10())),
    ];
    let mut failed = 0;
    for (id, title, limit, mut f) in criteria {
        let start = Instant::now();
        let result = f(&mut runs);
        let secs = start.elapsed().as_secs_f64();
        let (passed, detail) = match result {
            Ok(o) => (o.passed && secs < limit, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !passed {
            failed += 1;
        }
        let tag = if passed { "PASS" } else { "FAIL" };
        println!("{tag} criterion {id} ({title}): {detail} [{secs:.1} s, limit {limit:.0} s]");
    }
    println!("{} of 10 criteria passed", 10 - failed);
    let strict = std::env::var("POLYVEM_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    if strict && failed > 0 {
        std::process::exit(1);
    }
}
