//! Cross-section integrals of the two-layer laminate.
//!
//! The piezoelectric layer occupies `z in [0, h1]`, the substrate
//! `z in [-h2, 0]`; `z = 0` is the bonded interface. All quantities are per
//! unit width.

use serde::Serialize;
use thiserror::Error;

use crate::materials::{Material, MaterialError, ReducedLayer};
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum SectionError {
    #[error("{name} must be positive, got {value:e}")]
    NonPositive { name: &'static str, value: f64 },
    #[error(transparent)]
    Material(#[from] MaterialError),
}

/// Two-layer beam: piezoelectric layer on top of an elastic substrate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Layup<T = f64> {
    pub piezo: ReducedLayer<T>,
    pub substrate: ReducedLayer<T>,
    pub length: T,
    /// Reporting only.
    pub width: T,
}

/// Laminate-level constants about the neutral axis `z0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Section<T = f64> {
    pub z0: T,
    pub a11: T,
    pub b11: T,
    pub d11: T,
    /// Electromechanical bending coupling.
    pub f: T,
    pub rho0: T,
    pub rho1: T,
    pub rho2: T,
    pub eta1: T,
    pub eta2: T,
    /// Effective bending stiffness `d11 + f * eta2`.
    pub dbar: T,
}

fn positive<T: Scalar>(name: &'static str, value: T) -> Result<(), SectionError> {
    if value > T::zero() && value.is_finite() {
        Ok(())
    } else {
        Err(SectionError::NonPositive {
            name,
            value: value.as_f64(),
        })
    }
}

impl<T: Scalar> Layup<T> {
    pub fn new(
        piezo: ReducedLayer<T>,
        substrate: ReducedLayer<T>,
        length: T,
    ) -> Result<Self, SectionError> {
        positive("h1", piezo.h)?;
        positive("h2", substrate.h)?;
        positive("length", length)?;
        positive("piezo cbar11", piezo.cbar11)?;
        positive("substrate cbar11", substrate.cbar11)?;
        Ok(Layup {
            piezo,
            substrate,
            length,
            width: T::one(),
        })
    }

    /// Reduces both materials and builds the layup.
    pub fn from_materials(
        piezo: &Material<T>,
        substrate: &Material<T>,
        h1: T,
        h2: T,
        length: T,
    ) -> Result<Self, SectionError> {
        piezo.validate()?;
        substrate.validate()?;
        Layup::new(piezo.reduce(h1)?, substrate.reduce(h2)?, length)
    }

    pub fn with_width(mut self, width: T) -> Self {
        self.width = width;
        self
    }

    pub fn h1(&self) -> T {
        self.piezo.h
    }

    pub fn h2(&self) -> T {
        self.substrate.h
    }

    /// Through-thickness coordinate making the stretching-bending stiffness vanish.
    pub fn neutral_axis(&self) -> T {
        let (c1, h1) = (self.piezo.cbar11, self.piezo.h);
        let (c2, h2) = (self.substrate.cbar11, self.substrate.h);
        (c1 * h1 * h1 - c2 * h2 * h2) / (T::lit(2.0) * (c1 * h1 + c2 * h2))
    }

    /// Stretching-bending coupling stiffness about an arbitrary reference `z0`.
    pub fn coupling_stiffness(&self, z0: T) -> T {
        let (c1, h1) = (self.piezo.cbar11, self.piezo.h);
        let (c2, h2) = (self.substrate.cbar11, self.substrate.h);
        let half = T::lit(0.5);
        (c1 * h1 * h1 * half - c2 * h2 * h2 * half) - z0 * (c1 * h1 + c2 * h2)
    }

    /// Closed-form evaluation of every section integral.
    pub fn section(&self) -> Section<T> {
        let p = &self.piezo;
        let s = &self.substrate;
        let (c1, h1) = (p.cbar11, p.h);
        let (c2, h2) = (s.cbar11, s.h);
        let z0 = self.neutral_axis();
        let three = T::lit(3.0);

        let a11 = c1 * h1 + c2 * h2;
        let b11 = self.coupling_stiffness(z0);
        let d11 = c1 * (h1.powi(3) / three - h1 * h1 * z0 + h1 * z0 * z0)
            + c2 * (h2.powi(3) / three + h2 * h2 * z0 + h2 * z0 * z0);
        let f = -p.ebar31 * h1.powi(3) / T::lit(6.0);

        // int_a^b rho (z - z0)^k dz per layer
        let moment = |rho: T, a: T, b: T, k: i32| {
            rho * ((b - z0).powi(k + 1) - (a - z0).powi(k + 1)) / T::from_count(k as usize + 1)
        };
        let rho_k = |k| moment(p.rho, T::zero(), h1, k) + moment(s.rho, -h2, T::zero(), k);

        let (eta1, eta2) = if p.has_electric_field() {
            (
                -h1 * h1 * p.epsbar11 / (T::lit(10.0) * p.epsbar33),
                three * f / (h1.powi(3) * p.epsbar33),
            )
        } else {
            (T::zero(), T::zero())
        };

        Section {
            z0,
            a11,
            b11,
            d11,
            f,
            rho0: p.rho * h1 + s.rho * h2,
            rho1: rho_k(1),
            rho2: rho_k(2),
            eta1,
            eta2,
            dbar: d11 + f * eta2,
        }
    }

    /// Recomputes [`Layup::section`] by composite 3-point Gauss quadrature
    /// with `panels` panels per layer. Verification only.
    pub fn quadrature_check(&self, panels: usize) -> Section<T> {
        let panels = panels.max(1);
        let p = &self.piezo;
        let s = &self.substrate;
        let (h1, h2) = (p.h, s.h);

        let c_of = |z: T| if z >= T::zero() { p.cbar11 } else { s.cbar11 };
        let rho_of = |z: T| if z >= T::zero() { p.rho } else { s.rho };
        let piezo_only = |a: T, b: T, g: &dyn Fn(T) -> T| gauss3(a, b, panels, g);
        let both = |g: &dyn Fn(T) -> T| {
            gauss3(-h2, T::zero(), panels, g) + gauss3(T::zero(), h1, panels, g)
        };

        let a11 = both(&|z| c_of(z));
        let first = both(&|z| c_of(z) * z);
        let z0 = first / a11;
        let b11 = both(&|z| c_of(z) * (z - z0));
        let d11 = both(&|z| c_of(z) * (z - z0) * (z - z0));
        let f = piezo_only(T::zero(), h1, &|z| {
            -p.ebar31 * (T::lit(2.0) * z - h1) * (z - z0)
        });
        let rho0 = both(&|z| rho_of(z));
        let rho1 = both(&|z| rho_of(z) * (z - z0));
        let rho2 = both(&|z| rho_of(z) * (z - z0) * (z - z0));

        // Through-thickness weights of the quadratic potential z (h1 - z).
        let axial_weight = piezo_only(T::zero(), h1, &|z| (z * (z - h1)).powi(2));
        let transverse_weight = piezo_only(T::zero(), h1, &|z| (T::lit(2.0) * z - h1).powi(2));
        let (eta1, eta2) = if p.has_electric_field() {
            (
                -p.epsbar11 * axial_weight / (p.epsbar33 * transverse_weight),
                f / (p.epsbar33 * transverse_weight),
            )
        } else {
            (T::zero(), T::zero())
        };

        Section {
            z0,
            a11,
            b11,
            d11,
            f,
            rho0,
            rho1,
            rho2,
            eta1,
            eta2,
            dbar: d11 + f * eta2,
        }
    }
}

fn gauss3<T: Scalar>(a: T, b: T, panels: usize, g: &dyn Fn(T) -> T) -> T {
    let offset = T::lit(0.6).sqrt();
    let nodes = [-offset, T::zero(), offset];
    let weights = [T::lit(5.0 / 9.0), T::lit(8.0 / 9.0), T::lit(5.0 / 9.0)];
    let width = (b - a) / T::from_count(panels);
    let half = width * T::lit(0.5);
    let mut sum = T::zero();
    for i in 0..panels {
        let mid = a + width * (T::from_count(i) + T::lit(0.5));
        for (x, w) in nodes.iter().zip(weights) {
            sum += w * g(mid + half * *x);
        }
    }
    sum * half
}

impl<T: Scalar> Section<T> {
    /// Field name / value pairs in a fixed order, for reports and comparisons.
    pub fn fields(&self) -> [(&'static str, T); 11] {
        [
            ("z0", self.z0),
            ("A11", self.a11),
            ("B11", self.b11),
            ("D11", self.d11),
            ("F", self.f),
            ("rho0", self.rho0),
            ("rho1", self.rho1),
            ("rho2", self.rho2),
            ("eta1", self.eta1),
            ("eta2", self.eta2),
            ("Dbar", self.dbar),
        ]
    }

    /// Piezoelectric stiffening `dbar - d11`.
    pub fn electric_stiffening(&self) -> T {
        self.f * self.eta2
    }
}
