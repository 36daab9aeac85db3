use serde::Serialize;

use super::{assemble, FemError, FemFlags, ModeClass};
use crate::scalar::Scalar;
use crate::section::{Layup, Section};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow<T = f64> {
    pub n_elems: usize,
    /// 1-based position in the ascending spectrum.
    pub mode: usize,
    pub class: ModeClass,
    pub freq_hz: T,
    /// `(f - f_prev) / f_prev` against the previous mesh.
    pub rel_change: Option<T>,
    /// Observed order from the last three meshes.
    pub observed_order: Option<T>,
    /// Richardson extrapolation using the observed order.
    pub extrapolated_hz: Option<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport<T = f64> {
    pub rows: Vec<ConvergenceRow<T>>,
    /// `(mode, n_elems)` where the frequency rose under refinement.
    pub non_monotone: Vec<(usize, usize)>,
}

impl<T: Scalar> ConvergenceReport<T> {
    pub fn mode_rows(&self, mode: usize) -> impl Iterator<Item = &ConvergenceRow<T>> {
        self.rows.iter().filter(move |r| r.mode == mode)
    }

    pub fn is_monotone(&self) -> bool {
        self.non_monotone.is_empty()
    }
}

/// Solves the first `k` modes on every mesh of `meshes` (ascending) and
/// tabulates per-mode convergence.
pub fn convergence_report<T: Scalar>(
    layup: &Layup<T>,
    section: &Section<T>,
    meshes: &[usize],
    k: usize,
    flags: FemFlags,
) -> Result<ConvergenceReport<T>, FemError> {
    let spectra = meshes
        .iter()
        .map(|&n| assemble(layup, section, n, flags)?.solve_modes(k))
        .collect::<Result<Vec<_>, _>>()?;

    let mut rows = Vec::new();
    let mut non_monotone = Vec::new();
    for mode in 0..k {
        let mut history: Vec<(usize, T)> = Vec::new();
        for (mesh, spectrum) in meshes.iter().zip(&spectra) {
            let Some(m) = spectrum.modes.get(mode) else {
                continue;
            };
            let f = m.freq_hz;
            let rel_change = history.last().map(|&(_, prev)| (f - prev) / prev);
            if let Some(&(_, prev)) = history.last() {
                if f > prev {
                    non_monotone.push((mode + 1, *mesh));
                }
            }
            let (observed_order, extrapolated_hz) = match history.as_slice() {
                [.., (n0, f0), (n1, f1)] => {
                    let (d_prev, d_curr) = (*f1 - *f0, f - *f1);
                    let ratio = T::from_count(*mesh) / T::from_count(*n1);
                    let ratio_prev = T::from_count(*n1) / T::from_count(*n0);
                    if d_curr != T::zero()
                        && d_prev != T::zero()
                        && (d_prev / d_curr) > T::zero()
                        && ratio == ratio_prev
                    {
                        let p = (d_prev / d_curr).ln() / ratio.ln();
                        let extrapolated = f + d_curr / (ratio.powf(p) - T::one());
                        (Some(p), Some(extrapolated))
                    } else {
                        (None, None)
                    }
                }
                _ => (None, None),
            };
            rows.push(ConvergenceRow {
                n_elems: *mesh,
                mode: mode + 1,
                class: m.class,
                freq_hz: f,
                rel_change,
                observed_order,
                extrapolated_hz,
            });
            history.push((*mesh, f));
        }
    }
    Ok(ConvergenceReport { rows, non_monotone })
}
