//! One-dimensional coupled electromechanical finite elements for the laminate.
//!
//! Each node carries four degrees of freedom: axial displacement `u`,
//! deflection `w`, slope `w'` and the potential amplitude `phi`. `u` and
//! `phi` are interpolated linearly, `w` with Hermite cubics. The element
//! energy is the electric enthalpy
//!
//! ```text
//! 1/2 [A11 u'^2 + D11 w''^2 - 2 F w'' phi - E3 phi^2 - E1 phi'^2]
//! E3 = epsbar33 h1^3 / 3,   E1 = epsbar11 h1^5 / 30
//! ```
//!
//! whose stationary conditions are the beam equations
//! `-D11 w'''' + F phi'' = rho0 w_tt - rho2 w_tt''` and
//! `eta1 phi'' + phi + eta2 w'' = 0`. The kinetic energy is
//! `1/2 [rho0 (u_t^2 + w_t^2) + rho2 w_t'^2 - 2 rho1 u_t w_t']`, the last term
//! only when [`FemFlags::include_rho1_coupling`] is set. `phi` carries no mass.

mod convergence;
mod solve;

use std::io::{self, Write};

use serde::Serialize;
use thiserror::Error;

use crate::linalg::{LinalgError, Matrix};
use crate::scalar::Scalar;
use crate::section::{Layup, Section};

pub use convergence::{convergence_report, ConvergenceReport, ConvergenceRow};
pub use solve::{CondensedModel, FemMode, FemModes, ModeClass};

pub const DOFS_PER_NODE: usize = 4;

#[derive(Debug, Error, PartialEq)]
pub enum FemError {
    #[error("mesh needs at least 2 elements, got {0}")]
    TooFewElements(usize),
    #[error("at least one mode must be requested")]
    NoModes,
    #[error("electric block is singular or not definite: {0}")]
    SingularElectricBlock(LinalgError),
    #[error("mass matrix is not positive definite on the mechanical DOFs: {0}")]
    IndefiniteMass(LinalgError),
    #[error("eigensolver failed: {0}")]
    Eigen(LinalgError),
    #[error("subspace iteration did not converge in {0} iterations")]
    NoConvergence(usize),
}

/// Nodal degree of freedom.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dof {
    Axial = 0,
    Deflection = 1,
    Slope = 2,
    Potential = 3,
}

impl Dof {
    pub fn index(self, node: usize) -> usize {
        node * DOFS_PER_NODE + self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FemFlags {
    pub include_rho1_coupling: bool,
    pub include_axial: bool,
}

impl Default for FemFlags {
    fn default() -> Self {
        FemFlags {
            include_rho1_coupling: false,
            include_axial: true,
        }
    }
}

/// Assembled stiffness and mass over all `4 (n_elems + 1)` DOFs, plus the
/// simply supported constraint set.
#[derive(Debug, Clone)]
pub struct FemModel<T = f64> {
    pub n_elems: usize,
    pub length: T,
    pub nodes: Vec<T>,
    pub flags: FemFlags,
    pub has_electric: bool,
    pub stiffness: Matrix<T>,
    pub mass: Matrix<T>,
    /// Unconstrained mechanical DOFs, ascending.
    pub free_mechanical: Vec<usize>,
    /// Electric DOFs (all free), ascending.
    pub electric: Vec<usize>,
    pub coefficients: Coefficients<T>,
}

/// Per-unit-length coefficients of the element energies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Coefficients<T = f64> {
    pub a11: T,
    pub d11: T,
    pub f: T,
    pub e3: T,
    pub e1: T,
    pub rho0: T,
    pub rho1: T,
    pub rho2: T,
}

/// Gauss-Legendre points and weights on `[0, 1]`, exact to degree 7.
fn gauss4<T: Scalar>() -> [(T, T); 4] {
    let a = (3.0 / 7.0 - 2.0 / 7.0 * (6.0f64 / 5.0).sqrt()).sqrt();
    let b = (3.0 / 7.0 + 2.0 / 7.0 * (6.0f64 / 5.0).sqrt()).sqrt();
    let wa = (18.0 + 30f64.sqrt()) / 36.0;
    let wb = (18.0 - 30f64.sqrt()) / 36.0;
    [(-b, wb), (-a, wa), (a, wa), (b, wb)].map(|(x, w)| (T::lit(0.5 * (x + 1.0)), T::lit(0.5 * w)))
}

/// Shape functions of one element at local coordinate `s in [0, 1]`.
struct Basis<T> {
    linear: [T; 2],
    linear_d: [T; 2],
    hermite: [T; 4],
    hermite_d: [T; 4],
    hermite_dd: [T; 4],
}

fn basis<T: Scalar>(s: T, h: T) -> Basis<T> {
    let c = T::lit;
    let s2 = s * s;
    let s3 = s2 * s;
    Basis {
        linear: [T::one() - s, s],
        linear_d: [-T::one() / h, T::one() / h],
        hermite: [
            T::one() - c(3.0) * s2 + c(2.0) * s3,
            h * (s - c(2.0) * s2 + s3),
            c(3.0) * s2 - c(2.0) * s3,
            h * (s3 - s2),
        ],
        hermite_d: [
            (c(6.0) * s2 - c(6.0) * s) / h,
            T::one() - c(4.0) * s + c(3.0) * s2,
            (c(6.0) * s - c(6.0) * s2) / h,
            c(3.0) * s2 - c(2.0) * s,
        ],
        hermite_dd: [
            (c(12.0) * s - c(6.0)) / (h * h),
            (c(6.0) * s - c(4.0)) / h,
            (c(6.0) - c(12.0) * s) / (h * h),
            (c(6.0) * s - c(2.0)) / h,
        ],
    }
}

/// Element DOF slots: local index -> global index for element `e`.
fn element_dofs(e: usize) -> ([usize; 2], [usize; 4], [usize; 2]) {
    let (a, b) = (e, e + 1);
    (
        [Dof::Axial.index(a), Dof::Axial.index(b)],
        [
            Dof::Deflection.index(a),
            Dof::Slope.index(a),
            Dof::Deflection.index(b),
            Dof::Slope.index(b),
        ],
        [Dof::Potential.index(a), Dof::Potential.index(b)],
    )
}

/// Assembles the coupled model on a uniform mesh of `[-L/2, L/2]`.
///
/// Electric DOFs exist only when the piezoelectric layer has a positive
/// permittivity; otherwise the model is purely mechanical.
pub fn assemble<T: Scalar>(
    layup: &Layup<T>,
    section: &Section<T>,
    n_elems: usize,
    flags: FemFlags,
) -> Result<FemModel<T>, FemError> {
    if n_elems < 2 {
        return Err(FemError::TooFewElements(n_elems));
    }
    let n_nodes = n_elems + 1;
    let n_dofs = n_nodes * DOFS_PER_NODE;
    let length = layup.length;
    let h = length / T::from_count(n_elems);
    let half = length * T::lit(0.5);
    let nodes: Vec<T> = (0..n_nodes).map(|i| -half + h * T::from_count(i)).collect();

    let piezo = &layup.piezo;
    let has_electric = piezo.has_electric_field();
    let h1 = piezo.h;
    let e3 = piezo.epsbar33 * h1.powi(3) / T::lit(3.0);
    let e1 = piezo.epsbar11 * h1.powi(5) / T::lit(30.0);
    let s = section;
    let rho1 = if flags.include_rho1_coupling {
        s.rho1
    } else {
        T::zero()
    };

    let mut k = Matrix::zeros(n_dofs, n_dofs);
    let mut m = Matrix::zeros(n_dofs, n_dofs);
    let quad = gauss4::<T>();

    for e in 0..n_elems {
        let (ud, wd, pd) = element_dofs(e);
        for &(xi, weight) in &quad {
            let b = basis(xi, h);
            let dx = weight * h;
            for i in 0..2 {
                for j in 0..2 {
                    k[(ud[i], ud[j])] += dx * s.a11 * b.linear_d[i] * b.linear_d[j];
                    m[(ud[i], ud[j])] += dx * s.rho0 * b.linear[i] * b.linear[j];
                    if has_electric {
                        k[(pd[i], pd[j])] -= dx
                            * (e3 * b.linear[i] * b.linear[j] + e1 * b.linear_d[i] * b.linear_d[j]);
                    }
                }
            }
            for i in 0..4 {
                for j in 0..4 {
                    k[(wd[i], wd[j])] += dx * s.d11 * b.hermite_dd[i] * b.hermite_dd[j];
                    m[(wd[i], wd[j])] += dx
                        * (s.rho0 * b.hermite[i] * b.hermite[j]
                            + s.rho2 * b.hermite_d[i] * b.hermite_d[j]);
                }
                for j in 0..2 {
                    if has_electric {
                        let kwp = -dx * s.f * b.hermite_dd[i] * b.linear[j];
                        k[(wd[i], pd[j])] += kwp;
                        k[(pd[j], wd[i])] += kwp;
                    }
                    if rho1 != T::zero() {
                        let muw = -dx * rho1 * b.linear[j] * b.hermite_d[i];
                        m[(ud[j], wd[i])] += muw;
                        m[(wd[i], ud[j])] += muw;
                    }
                }
            }
        }
    }

    let mut free_mechanical = Vec::new();
    for node in 0..n_nodes {
        let end = node == 0 || node == n_nodes - 1;
        if flags.include_axial && node != 0 {
            free_mechanical.push(Dof::Axial.index(node));
        }
        if !end {
            free_mechanical.push(Dof::Deflection.index(node));
        }
        free_mechanical.push(Dof::Slope.index(node));
    }
    free_mechanical.sort_unstable();
    let electric = if has_electric {
        (0..n_nodes).map(|n| Dof::Potential.index(n)).collect()
    } else {
        Vec::new()
    };

    Ok(FemModel {
        n_elems,
        length,
        nodes,
        flags,
        has_electric,
        stiffness: k,
        mass: m,
        free_mechanical,
        electric,
        coefficients: Coefficients {
            a11: s.a11,
            d11: s.d11,
            f: if has_electric { s.f } else { T::zero() },
            e3,
            e1,
            rho0: s.rho0,
            rho1,
            rho2: s.rho2,
        },
    })
}

impl<T: Scalar> FemModel<T> {
    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn element_length(&self) -> T {
        self.length / T::from_count(self.n_elems)
    }

    /// All free DOFs, mechanical and electric, ascending.
    /// Twice the enthalpy and twice the kinetic energy of a full DOF vector,
    /// integrated element by element from strains rather than through the
    /// assembled matrices, which keeps smooth modes free of the O(n^4)
    /// cancellation in `x^T K x`.
    pub fn energies(&self, full: &[T]) -> (T, T) {
        let c = &self.coefficients;
        let h = self.element_length();
        let (mut strain, mut kinetic) = (T::zero(), T::zero());
        for e in 0..self.n_elems {
            let (ud, wd, pd) = element_dofs(e);
            for &(xi, weight) in &gauss4::<T>() {
                let b = basis(xi, h);
                let dx = weight * h;
                let lin = |v: &[T; 2], d: &[usize; 2]| v[0] * full[d[0]] + v[1] * full[d[1]];
                let her = |v: &[T; 4]| (0..4).map(|i| v[i] * full[wd[i]]).sum::<T>();
                let (u, du) = (lin(&b.linear, &ud), lin(&b.linear_d, &ud));
                let (w, dw, ddw) = (her(&b.hermite), her(&b.hermite_d), her(&b.hermite_dd));
                let mut density = c.a11 * du * du + c.d11 * ddw * ddw;
                if self.has_electric {
                    let (p, dp) = (lin(&b.linear, &pd), lin(&b.linear_d, &pd));
                    density -= T::lit(2.0) * c.f * ddw * p + c.e3 * p * p + c.e1 * dp * dp;
                }
                strain += dx * density;
                kinetic += dx
                    * (c.rho0 * (u * u + w * w) + c.rho2 * dw * dw - T::lit(2.0) * c.rho1 * u * dw);
            }
        }
        (strain, kinetic)
    }

    /// `omega^2` as the ratio of [`FemModel::energies`].
    pub fn rayleigh_quotient(&self, full: &[T]) -> T {
        let (strain, kinetic) = self.energies(full);
        strain / kinetic
    }

    pub fn free_dofs(&self) -> Vec<usize> {
        let mut all: Vec<usize> = self
            .free_mechanical
            .iter()
            .chain(&self.electric)
            .copied()
            .collect();
        all.sort_unstable();
        all
    }

    /// Nodal values of one DOF family from a full DOF vector.
    pub fn nodal(&self, full: &[T], dof: Dof) -> Vec<T> {
        (0..self.n_nodes()).map(|n| full[dof.index(n)]).collect()
    }

    /// Full DOF vector interpolating `w(x)`, `w'(x)`, `phi(x)` and `u(x)`.
    pub fn interpolate(
        &self,
        u: impl Fn(T) -> T,
        w: impl Fn(T) -> T,
        slope: impl Fn(T) -> T,
        phi: impl Fn(T) -> T,
    ) -> Vec<T> {
        let mut full = vec![T::zero(); self.n_nodes() * DOFS_PER_NODE];
        for (n, &x) in self.nodes.iter().enumerate() {
            full[Dof::Axial.index(n)] = u(x);
            full[Dof::Deflection.index(n)] = w(x);
            full[Dof::Slope.index(n)] = slope(x);
            if self.has_electric {
                full[Dof::Potential.index(n)] = phi(x);
            }
        }
        full
    }

    /// Bending stiffness seen by a uniform unit-curvature state after the
    /// potential has relaxed (patch test of the condensed operator).
    ///
    /// Uses the unconstrained matrices: `w = x^2/2`, `w' = x`, `u = 0`.
    pub fn bending_patch_stiffness(&self) -> Result<T, FemError> {
        let mech: Vec<usize> = (0..self.n_nodes())
            .flat_map(|n| {
                [
                    Dof::Axial.index(n),
                    Dof::Deflection.index(n),
                    Dof::Slope.index(n),
                ]
            })
            .collect();
        let condensed = solve::condense_on(self, &mech)?;
        let state: Vec<T> = mech
            .iter()
            .map(|&d| {
                let x = self.nodes[d / DOFS_PER_NODE];
                match d % DOFS_PER_NODE {
                    1 => x * x * T::lit(0.5),
                    2 => x,
                    _ => T::zero(),
                }
            })
            .collect();
        Ok(condensed.stiffness.bilinear(&state, &state) / self.length)
    }

    /// Writes `K` and `M` as `row col value` triplets, one non-zero per line.
    pub fn write_triplets<W: Write>(&self, mut out: W) -> io::Result<()> {
        for (name, mat) in [("stiffness", &self.stiffness), ("mass", &self.mass)] {
            writeln!(out, "# {name} {}x{}", mat.rows(), mat.cols())?;
            for (i, j, v) in mat.triplets() {
                writeln!(out, "{i} {j} {:.17e}", v.as_f64())?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::materials::table1;

    fn reference_layup() -> Layup {
        let db = table1::<f64>();
        Layup::from_materials(&db["PZT-5A"], &db["glass"], 200e-6, 500e-6, 6e-3).unwrap()
    }

    #[test]
    fn symmetric_matrices() {
        let layup = reference_layup();
        let flags = FemFlags {
            include_rho1_coupling: true,
            include_axial: true,
        };
        let model = assemble(&layup, &layup.section(), 16, flags).unwrap();
        assert!(model.stiffness.symmetry_residual() <= 1e-12);
        assert!(model.mass.symmetry_residual() <= 1e-12);
    }

    #[test]
    fn potential_is_massless() {
        let layup = reference_layup();
        let model = assemble(&layup, &layup.section(), 8, FemFlags::default()).unwrap();
        for &p in &model.electric {
            assert!(model.mass.row(p).iter().all(|v| *v == 0.0));
        }
    }

    #[test]
    fn uncoupled_bending_block_is_textbook() {
        let mut layup = reference_layup();
        layup.piezo.ebar31 = 0.0;
        let s = layup.section();
        let model = assemble(&layup, &s, 2, FemFlags::default()).unwrap();
        let h = layup.length / 2.0;
        let d = s.d11 / h.powi(3);
        let reference = [
            [12.0, 6.0 * h, -12.0, 6.0 * h],
            [6.0 * h, 4.0 * h * h, -6.0 * h, 2.0 * h * h],
            [-12.0, -6.0 * h, 12.0, -6.0 * h],
            [6.0 * h, 2.0 * h * h, -6.0 * h, 4.0 * h * h],
        ];
        let (_, wd, pd) = element_dofs(0);
        for i in 0..4 {
            for j in 0..4 {
                let expected = d * reference[i][j];
                let got = model.stiffness[(wd[i], wd[j])];
                // the node-1 block also collects the second element
                if !(i >= 2 && j >= 2) {
                    assert!(
                        (got - expected).abs() <= 1e-11 * expected.abs().max(d * h * h),
                        "{i}{j}: {got} vs {expected}"
                    );
                }
            }
            for p in pd {
                assert_eq!(model.stiffness[(wd[i], p)], 0.0);
            }
        }
        let (w1, t1) = (Dof::Deflection.index(1), Dof::Slope.index(1));
        assert!((model.stiffness[(w1, w1)] - 24.0 * d).abs() <= 1e-12 * d * 24.0);
        assert!(model.stiffness[(w1, t1)].abs() <= 1e-12 * d * 6.0 * h);
        assert!((model.stiffness[(t1, t1)] - 8.0 * h * h * d).abs() <= 1e-12 * d * 8.0 * h * h);
    }

    #[test]
    fn axial_and_flexural_blocks_decouple() {
        let layup = reference_layup();
        let model = assemble(&layup, &layup.section(), 12, FemFlags::default()).unwrap();
        for (i, j, _) in model.stiffness.triplets().chain(model.mass.triplets()) {
            let (a, b) = (i % DOFS_PER_NODE, j % DOFS_PER_NODE);
            let axial = |d| d == Dof::Axial as usize;
            assert!(axial(a) == axial(b), "cross entry at ({i}, {j})");
        }
    }

    #[test]
    fn rejects_single_element() {
        let layup = reference_layup();
        assert_eq!(
            assemble(&layup, &layup.section(), 1, FemFlags::default()).unwrap_err(),
            FemError::TooFewElements(1)
        );
    }

    #[test]
    fn elastic_layup_has_no_potential() {
        let db = table1::<f64>();
        let layup = Layup::from_materials(&db["glass"], &db["glass"], 1e-4, 1e-4, 1e-2).unwrap();
        let model = assemble(&layup, &layup.section(), 4, FemFlags::default()).unwrap();
        assert!(!model.has_electric);
        assert!(model.electric.is_empty());
    }

    #[test]
    fn triplet_dump() {
        let layup = reference_layup();
        let model = assemble(&layup, &layup.section(), 2, FemFlags::default()).unwrap();
        let mut buf = Vec::new();
        model.write_triplets(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("# stiffness 12x12\n"));
        assert!(text.contains("# mass 12x12\n"));
        let entry = text.lines().nth(1).unwrap();
        assert_eq!(entry.split(' ').count(), 3);
    }
}
