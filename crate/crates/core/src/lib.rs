//! Resonance analysis of an asymmetric two-layer beam: an elastic substrate
//! carrying a piezoelectric layer poled through its thickness.
//!
//! The crate computes reduced layer constants ([`materials`]), laminate
//! section integrals about the neutral axis ([`section`]), closed-form and
//! sixth-order simply supported frequencies ([`modal`]), and an independent
//! coupled electromechanical finite-element eigensolver ([`fem`]) used to
//! verify them.
//!
//! Everything numerical is generic over [`Scalar`] (`f32` or `f64`); the
//! `*64` / `*32` aliases below name the concrete instantiations.

pub mod fem;
pub mod linalg;
pub mod materials;
pub mod modal;
pub mod scalar;
pub mod section;

pub use fem::{assemble, convergence_report, FemError, FemFlags, FemModel, FemModes, ModeClass};
pub use materials::{
    load_materials, parse_materials, table1, Material, MaterialError, MaterialKind, ReducedLayer,
};
pub use modal::{
    calibrate_length, characteristic_roots, electric_profile, frequency_closed_form,
    frequency_sixth_order, potential_amplitude, CharacteristicRoots, ElectricProfile, ModalError,
    ModalResult, Symmetry,
};
pub use scalar::{rel_diff, Scalar};
pub use section::{Layup, Section, SectionError};

pub type Material64 = Material<f64>;
pub type Material32 = Material<f32>;
pub type ReducedLayer64 = ReducedLayer<f64>;
pub type ReducedLayer32 = ReducedLayer<f32>;
pub type Layup64 = Layup<f64>;
pub type Layup32 = Layup<f32>;
pub type Section64 = Section<f64>;
pub type Section32 = Section<f32>;
pub type ModalResult64 = ModalResult<f64>;
pub type ModalResult32 = ModalResult<f32>;
pub type ElectricProfile64 = ElectricProfile<f64>;
pub type FemModel64 = FemModel<f64>;
pub type FemModel32 = FemModel<f32>;
pub type FemModes64 = FemModes<f64>;
