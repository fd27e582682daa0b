//! Newmark time integration with a Newton solve per step.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::assembly::{CsrMatrix, Model};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NewmarkParams {
    #[serde(default = "half")]
    pub gamma: f64,
    #[serde(default = "quarter")]
    pub zeta: f64,
}

fn half() -> f64 {
    0.5
}

fn quarter() -> f64 {
    0.25
}

impl Default for NewmarkParams {
    fn default() -> Self {
        Self { gamma: 0.5, zeta: 0.25 }
    }
}

impl NewmarkParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.zeta > 0.0 && self.gamma >= 0.0 && self.zeta.is_finite() && self.gamma.is_finite()) {
            return Err(Error::Validation(format!(
                "Newmark parameters need zeta > 0 and gamma >= 0, got {self:?}"
            )));
        }
        Ok(())
    }

    /// `a_{n+1}` from the displacement update.
    pub fn acceleration(&self, dt: f64, u_n: &[f64], v_n: &[f64], a_n: &[f64], u: &[f64]) -> Vec<f64> {
        let z = self.zeta;
        let c0 = 1.0 / (z * dt * dt);
        let c1 = 1.0 / (z * dt);
        let c2 = 0.5 / z - 1.0;
        (0..u.len())
            .map(|k| c0 * (u[k] - u_n[k]) - c1 * v_n[k] - c2 * a_n[k])
            .collect()
    }

    /// Sum of the magnitudes of the terms that make up [`Self::acceleration`].
    pub fn acceleration_terms(&self, dt: f64, u_n: &[f64], v_n: &[f64], a_n: &[f64], u: &[f64]) -> Vec<f64> {
        let z = self.zeta;
        let c0 = 1.0 / (z * dt * dt);
        let c1 = 1.0 / (z * dt);
        let c2 = 0.5 / z - 1.0;
        (0..u.len())
            .map(|k| c0 * (u[k].abs() + u_n[k].abs()) + c1 * v_n[k].abs() + c2.abs() * a_n[k].abs())
            .collect()
    }

    pub fn velocity(&self, dt: f64, v_n: &[f64], a_n: &[f64], a: &[f64]) -> Vec<f64> {
        (0..v_n.len())
            .map(|k| v_n[k] + dt * ((1.0 - self.gamma) * a_n[k] + self.gamma * a[k]))
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NewtonSettings {
    #[serde(default = "abs_tol")]
    pub abs_tol: f64,
    #[serde(default = "rel_tol")]
    pub rel_tol: f64,
    #[serde(default = "max_iterations")]
    pub max_iterations: usize,
    /// Halvings of the Newton increment allowed when a trial state inverts an element.
    #[serde(default = "max_cuts")]
    pub max_cuts: usize,
    /// Recursive halvings of a time step whose Newton solve fails.
    #[serde(default = "max_step_splits")]
    pub max_step_splits: usize,
}

fn abs_tol() -> f64 {
    1e-8
}
fn rel_tol() -> f64 {
    1e-10
}
fn max_iterations() -> usize {
    25
}
fn max_cuts() -> usize {
    8
}
fn max_step_splits() -> usize {
    6
}

impl Default for NewtonSettings {
    fn default() -> Self {
        Self {
            abs_tol: abs_tol(),
            rel_tol: rel_tol(),
            max_iterations: max_iterations(),
            max_cuts: max_cuts(),
            max_step_splits: max_step_splits(),
        }
    }
}

/// Residuals are also accepted below this fraction of the largest force term.
const ROUNDOFF_FLOOR: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct State {
    pub t: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub a: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Default, Serialize)]
pub struct StepReport {
    /// Residual evaluations, including rejected trial states.
    pub iterations: usize,
    pub residual_norm: f64,
    pub cuts: usize,
    /// Time-step halvings; the reported iterations exclude the failed attempts.
    pub splits: usize,
}

struct Linearization {
    residual: Vec<f64>,
    scale: f64,
    tangent: CsrMatrix,
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Newton on the free dofs; `starts` are tried in order until one evaluates.
fn newton<F>(model: &Model, starts: Vec<Vec<f64>>, t: f64, settings: &NewtonSettings, eval: F) -> Result<(Vec<f64>, StepReport)>
where
    F: Fn(&[f64]) -> Result<Linearization>,
{
    let mut report = StepReport::default();
    let mut first = None;
    let mut last_err = None;
    for u in starts {
        report.iterations += 1;
        match eval(&u) {
            Ok(lin) => {
                first = Some((u, lin));
                break;
            }
            Err(e @ Error::InvertedElement { .. }) => last_err = Some(e),
            Err(e) => return Err(e),
        }
    }
    let (mut u, mut lin) = match first {
        Some(f) => f,
        None => return Err(last_err.unwrap_or_else(|| Error::Validation("no Newton start".into()))),
    };
    let r0 = norm2(&lin.residual);
    loop {
        let ri = inf_norm(&lin.residual);
        report.residual_norm = ri;
        if !ri.is_finite() {
            return Err(Error::NewtonDiverged {
                time: t,
                detail: "non-finite residual".into(),
            });
        }
        let converged = ri < settings.abs_tol
            || ri <= ROUNDOFF_FLOOR * lin.scale
            || (report.iterations > 1 && r0 > 0.0 && norm2(&lin.residual) / r0 < settings.rel_tol);
        if converged {
            return Ok((u, report));
        }
        if report.iterations >= settings.max_iterations {
            return Err(Error::NewtonDiverged {
                time: t,
                detail: format!("{} iterations, residual {ri:e}", report.iterations),
            });
        }
        let rhs: Vec<f64> = lin.residual.iter().map(|r| -r).collect();
        let du = model.solver.factor(&lin.tangent, false)?.solve_refined(&lin.tangent, &rhs);
        let mut alpha = 1.0;
        loop {
            let mut trial = u.clone();
            for (k, &g) in model.free.iter().enumerate() {
                trial[g] += alpha * du[k];
            }
            report.iterations += 1;
            match eval(&trial) {
                Ok(l) => {
                    u = trial;
                    lin = l;
                    break;
                }
                Err(e @ Error::InvertedElement { .. }) => {
                    if report.cuts >= settings.max_cuts || report.iterations >= settings.max_iterations {
                        return Err(e);
                    }
                    report.cuts += 1;
                    alpha *= 0.5;
                }
                Err(e) => return Err(e),
            }
        }
    }
}

/// Consistent initial acceleration `M a0 = F(t) - R_int(u)` on the free dofs.
///
/// The projection mass may be singular; the row-sum estimate is corrected by a
/// minimum solve in which zero pivots are pinned.
pub fn initial_acceleration(model: &Model, u: &[f64], t: f64) -> Result<Vec<f64>> {
    let internal = model.evaluate(u, false)?.internal;
    let f = model.external_force(t);
    let rhs: Vec<f64> = model.free.iter().map(|&g| f[g] - internal[g]).collect();
    let m = &model.mass_free;
    let sums = m.row_sums();
    let max_sum = inf_norm(&sums);
    let guess: Vec<f64> = rhs
        .iter()
        .zip(&sums)
        .map(|(r, s)| if s.abs() > 1e-12 * max_sum { r / s } else { 0.0 })
        .collect();
    let mg = m.mul_vec(&guess);
    let defect: Vec<f64> = rhs.iter().zip(&mg).map(|(r, x)| r - x).collect();
    let mut a = vec![0.0; model.n_dofs];
    if !model.free.is_empty() {
        let fac = model.solver.factor(m, true)?;
        let delta = fac.solve_refined(m, &defect);
        for (k, &g) in model.free.iter().enumerate() {
            a[g] = guess[k] + delta[k];
        }
    }
    Ok(a)
}

/// Quasi-static equilibrium `R_int(u) = F(t)` from `u_guess` (Dirichlet values are reset).
pub fn solve_static(model: &Model, t: f64, u_guess: &[f64], settings: &NewtonSettings) -> Result<(Vec<f64>, StepReport)> {
    let f = model.external_force(t);
    let mut u0 = u_guess.to_vec();
    model.apply_dirichlet(&mut u0, t);
    newton(model, vec![u0], t, settings, |u| {
        let ev = model.evaluate(u, true)?;
        let scale = ev.magnitude.max(inf_norm(&ev.internal)).max(inf_norm(&f));
        let residual = model.free.iter().map(|&g| ev.internal[g] - f[g]).collect();
        Ok(Linearization {
            residual,
            scale,
            tangent: ev.tangent.expect("tangent requested"),
        })
    })
}

/// Fixed-step Newmark integrator over a model.
pub struct Integrator<'m> {
    pub model: &'m Model,
    pub params: NewmarkParams,
    pub newton: NewtonSettings,
    pub dt: f64,
}

impl<'m> Integrator<'m> {
    pub fn new(model: &'m Model, params: NewmarkParams, newton: NewtonSettings, dt: f64) -> Result<Self> {
        params.validate()?;
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Validation(format!("time step must be positive, got {dt}")));
        }
        Ok(Self {
            model,
            params,
            newton,
            dt,
        })
    }

    /// Undeformed state with the model's initial velocity and a consistent acceleration.
    pub fn initial_state(&self) -> Result<State> {
        let mut u = vec![0.0; self.model.n_dofs];
        self.model.apply_dirichlet(&mut u, 0.0);
        let a = initial_acceleration(self.model, &u, 0.0)?;
        Ok(State {
            t: 0.0,
            u,
            v: self.model.initial_velocity.clone(),
            a,
        })
    }

    /// Advances by `dt`, splitting the step in halves when Newton fails or an element inverts.
    pub fn step(&self, s: &State) -> Result<(State, StepReport)> {
        self.advance(s, self.dt, 0)
    }

    fn advance(&self, s: &State, dt: f64, depth: usize) -> Result<(State, StepReport)> {
        match self.single_step(s, dt) {
            Err(Error::InvertedElement { .. } | Error::NewtonDiverged { .. }) if depth < self.newton.max_step_splits => {
                let (mid, r1) = self.advance(s, 0.5 * dt, depth + 1)?;
                let (end, r2) = self.advance(&mid, 0.5 * dt, depth + 1)?;
                Ok((
                    end,
                    StepReport {
                        iterations: r1.iterations + r2.iterations,
                        residual_norm: r2.residual_norm,
                        cuts: r1.cuts + r2.cuts,
                        splits: r1.splits + r2.splits + 1,
                    },
                ))
            }
            other => other,
        }
    }

    fn single_step(&self, s: &State, dt: f64) -> Result<(State, StepReport)> {
        let model = self.model;
        let t1 = s.t + dt;
        let f = model.external_force(t1);
        let c = 1.0 / (self.params.zeta * dt * dt);
        // Start from u_n rather than extrapolating: along modes the projection mass does not
        // see, v and a are not controlled by the dynamics and the acceleration recursion drifts.
        let mut start = s.u.clone();
        model.apply_dirichlet(&mut start, t1);
        let (u, report) = newton(model, vec![start], t1, &self.newton, |u| {
            let a = self.params.acceleration(dt, &s.u, &s.v, &s.a, u);
            let ev = model.evaluate(u, true)?;
            let ma = model.mass.mul_vec(&a);
            // The Newmark terms are large and cancel in `a`; their size sets the roundoff of `ma`.
            let terms = self.params.acceleration_terms(dt, &s.u, &s.v, &s.a, u);
            let inertial = inf_norm(&model.mass.mul_vec(&terms));
            let scale = ev.magnitude.max(inf_norm(&ev.internal)).max(inertial).max(inf_norm(&f));
            let residual = model.free.iter().map(|&g| ev.internal[g] + ma[g] - f[g]).collect();
            let mut tangent = ev.tangent.expect("tangent requested");
            for (k, m) in tangent.vals.iter_mut().zip(&model.mass_free.vals) {
                *k += c * m;
            }
            Ok(Linearization {
                residual,
                scale,
                tangent,
            })
        })?;
        let a = self.params.acceleration(dt, &s.u, &s.v, &s.a, &u);
        let v = self.params.velocity(dt, &s.v, &s.a, &a);
        Ok((State { t: t1, u, v, a }, report))
    }

    /// `(kinetic, strain)` energy.
    pub fn energies(&self, s: &State) -> Result<(f64, f64)> {
        Ok((self.model.kinetic_energy(&s.v), self.model.evaluate(&s.u, false)?.energy))
    }

    /// Support forces on constrained dofs at `s`.
    pub fn reactions(&self, s: &State) -> Result<BTreeMap<usize, f64>> {
        let internal = self.model.evaluate(&s.u, false)?.internal;
        let ma = self.model.mass.mul_vec(&s.a);
        let f = self.model.external_force(s.t);
        let r: Vec<f64> = (0..self.model.n_dofs).map(|k| internal[k] + ma[k] - f[k]).collect();
        Ok(self.model.reactions(&r))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{BoundaryCondition, ModelOptions, TimeFunction};
    use crate::material::NeoHookean;
    use crate::mesh::{generate_structured, Mesh, StructuredKind, Vec3};

    fn steel() -> NeoHookean {
        NeoHookean::from_engineering(210_000.0, 0.3, 7.85e-9).unwrap()
    }

    fn strip() -> Mesh {
        generate_structured(StructuredKind::Q2s, &[6, 1], Vec3::zeros(), Vec3::new(6.0, 1.0, 0.0)).unwrap()
    }

    fn fixed_left() -> BoundaryCondition {
        BoundaryCondition::Fixed {
            set: "x_min".into(),
            components: None,
        }
    }

    #[test]
    fn constant_acceleration_is_reproduced() {
        let p = NewmarkParams::default();
        let g = 3.0;
        let dt = 0.1;
        let (t0, t1) = (0.4, 0.5);
        let x = |t: f64| 0.5 * g * t * t + 2.0 * t;
        let a = p.acceleration(dt, &[x(t0)], &[g * t0 + 2.0], &[g], &[x(t1)]);
        assert!((a[0] - g).abs() < 1e-9);
        let v = p.velocity(dt, &[g * t0 + 2.0], &[g], &a);
        assert!((v[0] - (g * t1 + 2.0)).abs() < 1e-12);
    }

    #[test]
    fn rest_state_stays_at_rest_in_one_iteration() {
        let model = Model::new(strip(), steel(), ModelOptions::default(), &[fixed_left()]).unwrap();
        let int = Integrator::new(&model, NewmarkParams::default(), NewtonSettings::default(), 1e-6).unwrap();
        let s0 = int.initial_state().unwrap();
        let (s1, rep) = int.step(&s0).unwrap();
        assert_eq!(rep.iterations, 1);
        assert!(s1.u.iter().chain(&s1.v).chain(&s1.a).all(|x| *x == 0.0));
    }

    #[test]
    fn uniform_body_force_gives_uniform_acceleration() {
        let bcs = [BoundaryCondition::BodyForce {
            value: vec![0.0, -2.0e-6],
            time_function: TimeFunction::default(),
        }];
        let mat = steel();
        let model = Model::new(strip(), mat, ModelOptions::default(), &bcs).unwrap();
        let a = initial_acceleration(&model, &vec![0.0; model.n_dofs], 0.0).unwrap();
        for n in 0..model.mesh.n_nodes() {
            assert!(a[2 * n].abs() < 1e-6);
            assert!((a[2 * n + 1] / (-2.0e-6 / mat.rho) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn free_vibration_conserves_energy() {
        let bcs = [
            BoundaryCondition::InitialVelocity {
                set: "all".into(),
                value: vec![0.0, 1.0e4],
            },
            fixed_left(),
        ];
        let mat = steel();
        let model = Model::new(strip(), mat, ModelOptions::default(), &bcs).unwrap();
        let dt = 1e-7;
        let newton = NewtonSettings {
            abs_tol: 1e-10,
            ..Default::default()
        };
        let int = Integrator::new(&model, NewmarkParams::default(), newton, dt).unwrap();
        let mut s = int.initial_state().unwrap();
        let (k0, w0) = int.energies(&s).unwrap();
        let e0 = k0 + w0;
        let mut worst: f64 = 0.0;
        for _ in 0..150 {
            s = int.step(&s).unwrap().0;
            let (k, w) = int.energies(&s).unwrap();
            worst = worst.max(((k + w) - e0).abs() / e0);
        }
        assert!(worst < 1e-3, "energy drift {worst:e}");
        let (_, w) = int.energies(&s).unwrap();
        assert!(w > 0.0);
    }

    #[test]
    fn reactions_balance_loads_and_inertia() {
        let bcs = [
            fixed_left(),
            BoundaryCondition::Traction {
                set: "x_max".into(),
                value: vec![0.0, -50.0],
                time_function: TimeFunction::HalfSine { p_max: 1.0, period: 1e-5 },
            },
        ];
        let model = Model::new(strip(), steel(), ModelOptions::default(), &bcs).unwrap();
        let int = Integrator::new(&model, NewmarkParams::default(), NewtonSettings::default(), 2e-7).unwrap();
        let mut s = int.initial_state().unwrap();
        for _ in 0..5 {
            s = int.step(&s).unwrap().0;
        }
        let reac = int.reactions(&s).unwrap();
        let f = model.external_force(s.t);
        let ma = model.mass.mul_vec(&s.a);
        for axis in 0..2 {
            let r: f64 = reac.iter().filter(|(k, _)| *k % 2 == axis).map(|(_, v)| v).sum();
            let fe: f64 = f.iter().skip(axis).step_by(2).sum();
            let inertia: f64 = -ma.iter().skip(axis).step_by(2).sum::<f64>();
            let scale = 50.0;
            assert!((r + fe + inertia).abs() < 1e-6 * scale, "axis {axis}: {r} {fe} {inertia}");
        }
    }

    #[test]
    fn iteration_cap_reports_divergence() {
        let bcs = [
            fixed_left(),
            BoundaryCondition::Traction {
                set: "x_max".into(),
                value: vec![0.0, -500.0],
                time_function: TimeFunction::default(),
            },
        ];
        let model = Model::new(strip(), steel(), ModelOptions::default(), &bcs).unwrap();
        let newton = NewtonSettings {
            max_iterations: 2,
            abs_tol: 1e-14,
            ..Default::default()
        };
        let u0 = vec![0.0; model.n_dofs];
        assert!(matches!(
            solve_static(&model, 0.0, &u0, &newton),
            Err(Error::NewtonDiverged { .. })
        ));
    }

    #[test]
    fn static_solve_converges_quadratically() {
        let bcs = [
            fixed_left(),
            BoundaryCondition::Traction {
                set: "x_max".into(),
                value: vec![0.0, -200.0],
                time_function: TimeFunction::default(),
            },
        ];
        let model = Model::new(strip(), steel(), ModelOptions::default(), &bcs).unwrap();
        let (u, rep) = solve_static(&model, 0.0, &vec![0.0; model.n_dofs], &NewtonSettings::default()).unwrap();
        assert!(rep.iterations <= 8, "{rep:?}");
        let ev = model.evaluate(&u, false).unwrap();
        let f = model.external_force(0.0);
        for &g in &model.free {
            assert!((ev.internal[g] - f[g]).abs() < 1e-7);
        }
        let tip = model.mesh.nearest_node(&Vec3::new(6.0, 0.5, 0.0));
        assert!(u[2 * tip + 1] < 0.0);
    }
}
