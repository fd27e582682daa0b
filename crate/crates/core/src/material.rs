//! Compressible Neo-Hookean hyperelasticity.
//!
//! Units are mm, N, tonne, s, so moduli are in MPa and densities in tonne/mm³.
//! Two-dimensional problems are treated in plane strain: the in-plane deformation
//! gradient is embedded in a 3×3 tensor with `F33 = 1`.

use nalgebra::{Matrix3, SMatrix};

use crate::error::{Error, Result};

/// Fourth-order tensor stored as a 9×9 matrix with index pairs `(A,B) -> 3A + B`.
pub type Tensor4 = SMatrix<f64, 9, 9>;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NeoHookean {
    pub kappa: f64,
    pub mu: f64,
    pub rho: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Kinematics {
    pub f: Matrix3<f64>,
    pub c: Matrix3<f64>,
    pub j: f64,
    pub i1: f64,
    pub i3: f64,
}

impl Kinematics {
    pub fn from_deformation_gradient(f: Matrix3<f64>) -> Result<Self> {
        let j = f.determinant();
        if !(j > 0.0) || !j.is_finite() {
            return Err(Error::InvertedElement {
                element: None,
                jacobian: j,
            });
        }
        let c = f.transpose() * f;
        Ok(Self {
            f,
            c,
            j,
            i1: c.trace(),
            i3: j * j,
        })
    }

    /// `F = Id + grad u`, with a 2×2 gradient embedded in plane strain.
    pub fn from_displacement_gradient(grad: &[f64], dim: usize) -> Result<Self> {
        Self::from_deformation_gradient(deformation_gradient(grad, dim))
    }
}

/// `Id + grad u` from a row-major `dim x dim` gradient.
pub fn deformation_gradient(grad: &[f64], dim: usize) -> Matrix3<f64> {
    let mut f = Matrix3::identity();
    for i in 0..dim {
        for j in 0..dim {
            f[(i, j)] += grad[i * dim + j];
        }
    }
    f
}

struct Invariants {
    cinv: Matrix3<f64>,
    i1: f64,
    i3: f64,
}

fn invariants(c: &Matrix3<f64>) -> Result<Invariants> {
    let i3 = c.determinant();
    if !(i3 > 0.0) || !i3.is_finite() {
        return Err(Error::InvertedElement {
            element: None,
            jacobian: i3.max(0.0).sqrt(),
        });
    }
    let cinv = c.try_inverse().ok_or(Error::InvertedElement {
        element: None,
        jacobian: 0.0,
    })?;
    let cinv = (cinv + cinv.transpose()) * 0.5;
    Ok(Invariants {
        cinv,
        i1: c.trace(),
        i3,
    })
}

impl NeoHookean {
    pub fn new(kappa: f64, mu: f64, rho: f64) -> Result<Self> {
        if !(kappa > 0.0 && mu > 0.0 && rho >= 0.0) || !(kappa.is_finite() && mu.is_finite() && rho.is_finite()) {
            return Err(Error::Validation(format!(
                "material requires kappa > 0, mu > 0, rho >= 0 (got kappa={kappa}, mu={mu}, rho={rho})"
            )));
        }
        Ok(Self { kappa, mu, rho })
    }

    pub fn from_engineering(e: f64, nu: f64, rho: f64) -> Result<Self> {
        if nu >= 0.5 - 1e-9 {
            return Err(Error::IncompressibleLimit { nu });
        }
        if !(e > 0.0) || !(nu > -1.0) {
            return Err(Error::Validation(format!(
                "material requires E > 0 and -1 < nu < 0.5 (got E={e}, nu={nu})"
            )));
        }
        Self::new(e / (3.0 * (1.0 - 2.0 * nu)), e / (2.0 * (1.0 + nu)), rho)
    }

    pub fn youngs_modulus(&self) -> f64 {
        9.0 * self.kappa * self.mu / (3.0 * self.kappa + self.mu)
    }

    pub fn poisson_ratio(&self) -> f64 {
        (3.0 * self.kappa - 2.0 * self.mu) / (2.0 * (3.0 * self.kappa + self.mu))
    }

    /// Bar wave speed `sqrt(E / rho)`.
    pub fn wave_speed(&self) -> f64 {
        (self.youngs_modulus() / self.rho).sqrt()
    }

    pub fn energy(&self, c: &Matrix3<f64>) -> Result<f64> {
        let inv = invariants(c)?;
        Ok(self.energy_from(inv.i1, inv.i3))
    }

    fn energy_from(&self, i1: f64, i3: f64) -> f64 {
        0.25 * self.kappa * (i3 - 1.0 - i3.ln()) + 0.5 * self.mu * (i3.powf(-1.0 / 3.0) * i1 - 3.0)
    }

    /// Second Piola-Kirchhoff stress `S = 2 dPsi/dC`.
    pub fn pk2_stress(&self, c: &Matrix3<f64>) -> Result<Matrix3<f64>> {
        let inv = invariants(c)?;
        Ok(self.pk2_from(&inv))
    }

    fn pk2_from(&self, inv: &Invariants) -> Matrix3<f64> {
        let iso = inv.i3.powf(-1.0 / 3.0);
        inv.cinv * (0.5 * self.kappa * (inv.i3 - 1.0))
            + (Matrix3::identity() - inv.cinv * (inv.i1 / 3.0)) * (self.mu * iso)
    }

    /// Material tangent `4 d²Psi/dC dC` with major and minor symmetry.
    pub fn material_tangent(&self, c: &Matrix3<f64>) -> Result<Tensor4> {
        let inv = invariants(c)?;
        Ok(self.tangent_from(&inv))
    }

    fn tangent_from(&self, inv: &Invariants) -> Tensor4 {
        let ci = &inv.cinv;
        let iso = inv.i3.powf(-1.0 / 3.0);
        let (k, m) = (self.kappa, self.mu);
        let a_outer = k * inv.i3 + 2.0 * m / 9.0 * iso * inv.i1;
        let a_sym = -k * (inv.i3 - 1.0) + 2.0 * m / 3.0 * iso * inv.i1;
        let a_mix = -2.0 * m / 3.0 * iso;
        let mut t = Tensor4::zeros();
        for a in 0..3 {
            for b in 0..3 {
                let id_ab = if a == b { 1.0 } else { 0.0 };
                for c in 0..3 {
                    for d in 0..3 {
                        let id_cd = if c == d { 1.0 } else { 0.0 };
                        let sym = 0.5 * (ci[(a, c)] * ci[(b, d)] + ci[(a, d)] * ci[(b, c)]);
                        t[(3 * a + b, 3 * c + d)] = a_outer * (ci[(a, b)] * ci[(c, d)])
                            + a_sym * sym
                            + a_mix * (id_ab * ci[(c, d)] + ci[(a, b)] * id_cd);
                    }
                }
            }
        }
        t
    }

    /// Energy, first Piola-Kirchhoff stress `P = F S` and its tangent `dP/dF`
    /// (index pairs `(i,J) -> 3i + J`).
    pub fn first_piola(&self, f: &Matrix3<f64>) -> Result<(f64, Matrix3<f64>, Tensor4)> {
        let kin = Kinematics::from_deformation_gradient(*f)?;
        let inv = invariants(&kin.c)?;
        let psi = self.energy_from(inv.i1, inv.i3);
        let s = self.pk2_from(&inv);
        let cc = self.tangent_from(&inv);
        let p = f * s;
        // dP_iJ/dF_kL = delta_ik S_JL + F_iA F_kC CC_AJCL
        let mut tmp = Tensor4::zeros();
        for i in 0..3 {
            for jj in 0..3 {
                for col in 0..9 {
                    let mut v = 0.0;
                    for a in 0..3 {
                        v += f[(i, a)] * cc[(3 * a + jj, col)];
                    }
                    tmp[(3 * i + jj, col)] = v;
                }
            }
        }
        let mut big = Tensor4::zeros();
        for row in 0..9 {
            for k in 0..3 {
                for l in 0..3 {
                    let mut v = 0.0;
                    for c in 0..3 {
                        v += f[(k, c)] * tmp[(row, 3 * c + l)];
                    }
                    big[(row, 3 * k + l)] = v;
                }
            }
        }
        for i in 0..3 {
            for jj in 0..3 {
                for l in 0..3 {
                    big[(3 * i + jj, 3 * i + l)] += s[(jj, l)];
                }
            }
        }
        Ok((psi, p, big))
    }
}
