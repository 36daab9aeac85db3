use serde::Serialize;

use super::{Dof, FemError, FemModel, DOFS_PER_NODE};
use crate::linalg::{generalized_lowest, jacobi_eigen, schur_complement, LinalgError, Lu, Matrix};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeClass {
    FlexuralSymmetric,
    FlexuralAntisymmetric,
    Axial,
}

impl ModeClass {
    pub fn is_flexural(self) -> bool {
        self != ModeClass::Axial
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ModeClass::FlexuralSymmetric => "flexural-symmetric",
            ModeClass::FlexuralAntisymmetric => "flexural-antisymmetric",
            ModeClass::Axial => "axial",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FemMode<T = f64> {
    pub freq_hz: T,
    pub omega: T,
    pub class: ModeClass,
    /// Full DOF vector (constrained entries zero), mass-normalised.
    pub shape: Vec<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FemModes<T = f64> {
    pub modes: Vec<FemMode<T>>,
}

impl<T: Scalar> FemModes<T> {
    pub fn frequencies(&self) -> Vec<T> {
        self.modes.iter().map(|m| m.freq_hz).collect()
    }

    /// Flexural modes only, in ascending order; index `i` is mode `m = i + 1`.
    pub fn flexural(&self) -> Vec<&FemMode<T>> {
        self.modes
            .iter()
            .filter(|m| m.class.is_flexural())
            .collect()
    }
}

/// Mechanical-only operator after eliminating the massless potential DOFs.
#[derive(Debug, Clone)]
pub struct CondensedModel<T = f64> {
    /// `K_mm - K_me K_ee^{-1} K_em`
    pub stiffness: Matrix<T>,
    pub mass: Matrix<T>,
    pub mechanical: Vec<usize>,
    pub electric: Vec<usize>,
    /// Potential DOFs from mechanical ones: `phi = R x_m`.
    pub recovery: Matrix<T>,
}

pub(super) fn condense_on<T: Scalar>(
    model: &FemModel<T>,
    mech: &[usize],
) -> Result<CondensedModel<T>, FemError> {
    let k = &model.stiffness;
    let kmm = k.select(mech, mech);
    let mass = model.mass.select(mech, mech);
    let elec = &model.electric;
    if elec.is_empty() {
        return Ok(CondensedModel {
            stiffness: kmm,
            mass,
            mechanical: mech.to_vec(),
            electric: Vec::new(),
            recovery: Matrix::zeros(0, mech.len()),
        });
    }
    let kme = k.select(mech, elec);
    let kem = k.select(elec, mech);
    let kee = k.select(elec, elec);
    let (mut stiffness, recovery) =
        schur_complement(&kmm, &kme, &kem, &kee).map_err(FemError::SingularElectricBlock)?;
    stiffness.symmetrize();
    Ok(CondensedModel {
        stiffness,
        mass,
        mechanical: mech.to_vec(),
        electric: elec.clone(),
        recovery,
    })
}

impl<T: Scalar> CondensedModel<T> {
    /// Expands a mechanical vector to the full DOF vector, recovering `phi`.
    pub fn expand(&self, mech: &[T], n_dofs: usize) -> Vec<T> {
        let mut full = vec![T::zero(); n_dofs];
        for (&d, &v) in self.mechanical.iter().zip(mech) {
            full[d] = v;
        }
        if !self.electric.is_empty() {
            for (&d, v) in self.electric.iter().zip(self.recovery.mul_vec(mech)) {
                full[d] = v;
            }
        }
        full
    }
}

impl<T: Scalar> FemModel<T> {
    /// Eliminates the potential DOFs from the constrained system.
    pub fn condense_electric(&self) -> Result<CondensedModel<T>, FemError> {
        condense_on(self, &self.free_mechanical)
    }

    /// Lowest `k` modes by a dense generalised solve of the condensed system.
    pub fn solve_modes(&self, k: usize) -> Result<FemModes<T>, FemError> {
        if k == 0 {
            return Err(FemError::NoModes);
        }
        let condensed = self.condense_electric()?;
        let pairs =
            generalized_lowest(&condensed.stiffness, &condensed.mass, k).map_err(|e| match e {
                LinalgError::NotPositiveDefinite { .. } => FemError::IndefiniteMass(e),
                other => FemError::Eigen(other),
            })?;
        let n_dofs = self.stiffness.rows();
        let modes = pairs
            .values
            .iter()
            .enumerate()
            .map(|(c, &lambda)| {
                let full = condensed.expand(&pairs.vectors.column(c), n_dofs);
                self.make_mode(lambda, full)
            })
            .collect();
        Ok(FemModes { modes })
    }

    /// Lowest `k` modes of the uncondensed coupled system `K x = omega^2 M x`
    /// (indefinite `K`, singular `M`) by subspace iteration with
    /// Rayleigh-Ritz projection. Independent of the condensation path.
    pub fn solve_modes_monolithic(&self, k: usize) -> Result<FemModes<T>, FemError> {
        if k == 0 {
            return Err(FemError::NoModes);
        }
        let free = self.free_dofs();
        let n = free.len();
        let kf = self.stiffness.select(&free, &free);
        let mf = self.mass.select(&free, &free);
        // symmetric equilibration: mechanical and potential rows differ by ~20 decades
        let scale: Vec<T> = (0..n)
            .map(|i| {
                let d = kf[(i, i)].abs();
                if d > T::zero() {
                    T::one() / d.sqrt()
                } else {
                    T::one()
                }
            })
            .collect();
        let lu = Lu::new(&Matrix::from_fn(n, n, |i, j| {
            scale[i] * kf[(i, j)] * scale[j]
        }))
        .map_err(FemError::Eigen)?;
        let solve_k = |b: &[T]| -> Vec<T> {
            let rhs: Vec<T> = b.iter().zip(&scale).map(|(v, s)| *v * *s).collect();
            lu.solve(&rhs)
                .into_iter()
                .zip(&scale)
                .map(|(v, s)| v * *s)
                .collect()
        };
        let m_rows = sparse_rows(&mf);
        let mul_m = |x: &[T]| -> Vec<T> {
            m_rows
                .iter()
                .map(|row| row.iter().map(|&(j, v)| v * x[j]).sum())
                .collect()
        };

        let block = (2 * k).max(k + 8).min(n);
        let mut state = 0x9e37_79b9_7f4a_7c15u64;
        let mut x: Vec<Vec<T>> = (0..block)
            .map(|_| {
                (0..n)
                    .map(|_| {
                        state ^= state << 13;
                        state ^= state >> 7;
                        state ^= state << 17;
                        T::lit((state >> 11) as f64 / (1u64 << 53) as f64 - 0.5)
                    })
                    .collect()
            })
            .collect();

        let max_iter = 500;
        let mut previous: Option<Vec<T>> = None;
        for _ in 0..max_iter {
            let dot = |a: &[T], b: &[T]| a.iter().zip(b).map(|(p, q)| *p * *q).sum::<T>();
            // K y_j = M x_j; carry K y alongside y through the orthogonalisation
            let mut ky: Vec<Vec<T>> = x.iter().map(|v| mul_m(v)).collect();
            let mut y: Vec<Vec<T>> = ky.iter().map(|v| solve_k(v)).collect();
            let mut basis: Vec<Vec<T>> = Vec::with_capacity(block);
            let mut k_basis: Vec<Vec<T>> = Vec::with_capacity(block);
            for (mut v, mut kv) in y.drain(..).zip(ky.drain(..)) {
                let initial = dot(&v, &mul_m(&v)).sqrt();
                for _ in 0..2 {
                    for (b, kb) in basis.iter().zip(&k_basis) {
                        let c = dot(b, &mul_m(&v));
                        axpy(&mut v, -c, b);
                        axpy(&mut kv, -c, kb);
                    }
                }
                let norm = dot(&v, &mul_m(&v)).sqrt();
                if !(norm > initial * T::epsilon().sqrt()) {
                    continue;
                }
                v.iter_mut().chain(kv.iter_mut()).for_each(|e| *e /= norm);
                basis.push(v);
                k_basis.push(kv);
            }
            if basis.len() < k {
                return Err(FemError::NoConvergence(0));
            }
            let dim = basis.len();
            let mut kr = Matrix::from_fn(dim, dim, |i, j| dot(&basis[i], &k_basis[j]));
            kr.symmetrize();
            let ritz = jacobi_eigen(&kr).map_err(FemError::Eigen)?;
            x = (0..dim)
                .map(|c| {
                    let mut v = vec![T::zero(); n];
                    for (b, q) in basis.iter().zip(ritz.vectors.column(c)) {
                        axpy(&mut v, q, b);
                    }
                    v
                })
                .collect();
            let values: Vec<T> = ritz.values[..k].to_vec();
            if let Some(prev) = &previous {
                let change = values
                    .iter()
                    .zip(prev)
                    .fold(T::zero(), |m, (a, b)| m.max((*a - *b).abs() / a.abs()));
                // the coupled K is badly scaled, so Ritz values stall near 1e-13
                if change <= T::epsilon().sqrt() * T::lit(1e-3) {
                    let n_dofs = self.stiffness.rows();
                    let modes = values
                        .iter()
                        .zip(&x)
                        .map(|(&lambda, v)| {
                            let mut full = vec![T::zero(); n_dofs];
                            for (&d, &val) in free.iter().zip(v) {
                                full[d] = val;
                            }
                            self.make_mode(lambda, full)
                        })
                        .collect();
                    return Ok(FemModes { modes });
                }
            }
            previous = Some(values);
        }
        Err(FemError::NoConvergence(max_iter))
    }

    /// The eigenvalue is re-evaluated as the strain-form Rayleigh quotient of
    /// its vector: the vector error enters only quadratically, while the
    /// solver's eigenvalue carries roundoff of order `eps * cond(K)`.
    fn make_mode(&self, lambda: T, shape: Vec<T>) -> FemMode<T> {
        let polished = self.rayleigh_quotient(&shape);
        let lambda = if polished.is_finite() && polished > T::zero() {
            polished
        } else {
            lambda
        };
        let omega = lambda.max(T::zero()).sqrt();
        FemMode {
            freq_hz: omega / T::TAU(),
            omega,
            class: self.classify(&shape),
            shape,
        }
    }

    /// Dominant DOF family by kinetic energy, then midspan symmetry of `w`.
    pub fn classify(&self, full: &[T]) -> ModeClass {
        let n_nodes = self.n_nodes();
        let family_energy = |keep: &dyn Fn(usize) -> bool| {
            let masked: Vec<T> = full
                .iter()
                .enumerate()
                .map(|(d, v)| {
                    if keep(d % DOFS_PER_NODE) {
                        *v
                    } else {
                        T::zero()
                    }
                })
                .collect();
            self.mass.bilinear(&masked, &masked)
        };
        let axial = family_energy(&|d| d == Dof::Axial as usize);
        let bending = family_energy(&|d| d == Dof::Deflection as usize || d == Dof::Slope as usize);
        if axial > bending {
            return ModeClass::Axial;
        }
        let w = self.nodal(full, Dof::Deflection);
        let mirror: T = (0..n_nodes).map(|i| w[i] * w[n_nodes - 1 - i]).sum();
        if mirror >= T::zero() {
            ModeClass::FlexuralSymmetric
        } else {
            ModeClass::FlexuralAntisymmetric
        }
    }
}

fn axpy<T: Scalar>(y: &mut [T], a: T, x: &[T]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * *xi;
    }
}

fn sparse_rows<T: Scalar>(a: &Matrix<T>) -> Vec<Vec<(usize, T)>> {
    (0..a.rows())
        .map(|i| {
            a.row(i)
                .iter()
                .enumerate()
                .filter(|(_, v)| **v != T::zero())
                .map(|(j, v)| (j, *v))
                .collect()
        })
        .collect()
}
