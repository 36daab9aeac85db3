//! Free vibration of the simply supported laminate.
//!
//! The transverse amplitude obeys the reduced fourth-order equation
//! `w'''' + 2 alpha^2 w'' - beta^4 w = 0` whose general solution is
//! `b1 cosh(n1 x) + b2 sinh(n1 x) + b3 cos(n3 x) + b4 sin(n3 x)` on
//! `x in [-L/2, L/2]`. For simple supports only the trigonometric branch
//! survives and `n3 = m pi / L`.

use serde::Serialize;
use thiserror::Error;

use crate::scalar::Scalar;
use crate::section::Section;

#[derive(Debug, Error, PartialEq)]
pub enum ModalError {
    #[error("mode number must be >= 1")]
    ModeNumber,
    #[error("{name} must be positive and finite, got {value:e}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("position {x:e} lies outside [-L/2, L/2] with L = {length:e}")]
    OutOfSpan { x: f64, length: f64 },
    #[error("no positive real omega^2 root for mode {m} (omega^2 = {omega2:e}); section data is nonphysical")]
    NoPositiveRoot { m: usize, omega2: f64 },
    #[error("electric potential is undefined without piezoelectric coupling (F = 0)")]
    CouplingAbsent,
    #[error("electric profile needs at least 16 grid points, got {0}")]
    GridTooSmall(usize),
    #[error("could not bracket a beam length for target {target_hz:e} Hz")]
    Bracket { target_hz: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Symmetry {
    /// Cosine family about midspan, odd `m`.
    Symmetric,
    /// Sine family, even `m`.
    Antisymmetric,
}

impl Symmetry {
    pub fn of_mode(m: usize) -> Self {
        if m % 2 == 1 {
            Symmetry::Symmetric
        } else {
            Symmetry::Antisymmetric
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Symmetry::Symmetric => "symmetric",
            Symmetry::Antisymmetric => "antisymmetric",
        }
    }
}

/// Coefficients and wavenumbers of the reduced equation at one frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CharacteristicRoots<T = f64> {
    /// `alpha^2`, m^-2.
    pub alpha2: T,
    /// `beta^4`, m^-4.
    pub beta4: T,
    /// Hyperbolic-branch wavenumber.
    pub n1: T,
    /// Trigonometric-branch wavenumber.
    pub n3: T,
}

/// `b1 cosh(n1 x) + b2 sinh(n1 x) + b3 cos(n3 x) + b4 sin(n3 x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeShape<T = f64> {
    pub b: [T; 4],
    pub n1: T,
    pub n3: T,
}

impl<T: Scalar> ModeShape<T> {
    /// `order`-th derivative at `x`.
    pub fn derivative(&self, x: T, order: u32) -> T {
        let [b1, b2, b3, b4] = self.b;
        let (n1, n3) = (self.n1, self.n3);
        let (ch, sh) = ((n1 * x).cosh(), (n1 * x).sinh());
        let (c, s) = ((n3 * x).cos(), (n3 * x).sin());
        let k1 = n1.powi(order as i32);
        let k3 = n3.powi(order as i32);
        // d^k/dx^k of (cosh, sinh) alternates between the pair;
        // (cos, sin) cycles with period four.
        let hyper = if order % 2 == 0 {
            b1 * ch + b2 * sh
        } else {
            b1 * sh + b2 * ch
        };
        let trig = match order % 4 {
            0 => b3 * c + b4 * s,
            1 => -b3 * s + b4 * c,
            2 => -b3 * c - b4 * s,
            _ => b3 * s - b4 * c,
        };
        k1 * hyper + k3 * trig
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModalResult<T = f64> {
    pub m: usize,
    pub symmetry: Symmetry,
    /// rad/s
    pub omega: T,
    pub freq_hz: T,
    pub length: T,
    pub roots: CharacteristicRoots<T>,
    pub shape: ModeShape<T>,
}

impl<T: Scalar> ModalResult<T> {
    /// Unit-normalised deflection at `x`.
    pub fn mode_shape(&self, x: T) -> Result<T, ModalError> {
        let half = self.length * T::lit(0.5);
        if x.abs() > half * (T::one() + T::epsilon() * T::lit(16.0)) {
            return Err(ModalError::OutOfSpan {
                x: x.as_f64(),
                length: self.length.as_f64(),
            });
        }
        Ok(self.shape.derivative(x, 0))
    }

    /// Bending moment amplitude `-D11 w'' + F phi` at `x`.
    pub fn bending_moment(&self, section: &Section<T>, x: T) -> Result<T, ModalError> {
        let w2 = self.shape.derivative(x, 2);
        let phi = if section.f == T::zero() {
            T::zero()
        } else {
            potential_amplitude(self, section, x)
        };
        Ok(-section.d11 * w2 + section.f * phi)
    }
}

fn check_positive<T: Scalar>(name: &'static str, value: T) -> Result<(), ModalError> {
    if value > T::zero() && value.is_finite() {
        Ok(())
    } else {
        Err(ModalError::NonPositive {
            name,
            value: value.as_f64(),
        })
    }
}

fn wavenumber<T: Scalar>(length: T, m: usize) -> T {
    T::from_count(m) * T::PI() / length
}

/// Rotary-plus-electric inertia correction `rho2 - eta1 rho0`.
fn inertia_correction<T: Scalar>(section: &Section<T>) -> T {
    section.rho2 - section.eta1 * section.rho0
}

/// Trigonometric shape for mode `m` on the simply supported span.
fn trig_shape<T: Scalar>(m: usize, n1: T, length: T) -> ModeShape<T> {
    let b = match Symmetry::of_mode(m) {
        Symmetry::Symmetric => [T::zero(), T::zero(), T::one(), T::zero()],
        Symmetry::Antisymmetric => [T::zero(), T::zero(), T::zero(), T::one()],
    };
    ModeShape {
        b,
        n1,
        n3: wavenumber(length, m),
    }
}

fn modal_result<T: Scalar>(section: &Section<T>, length: T, m: usize, omega: T) -> ModalResult<T> {
    let roots = characteristic_roots(section, omega);
    ModalResult {
        m,
        symmetry: Symmetry::of_mode(m),
        omega,
        freq_hz: omega / T::TAU(),
        length,
        roots,
        shape: trig_shape(m, roots.n1, length),
    }
}

/// Closed-form simply supported frequency of mode `m`:
/// `omega = k^2 sqrt(Dbar / (rho0 + k^2 (rho2 - eta1 rho0)))`, `k = m pi / L`.
pub fn frequency_closed_form<T: Scalar>(
    section: &Section<T>,
    length: T,
    m: usize,
) -> Result<ModalResult<T>, ModalError> {
    if m == 0 {
        return Err(ModalError::ModeNumber);
    }
    check_positive("length", length)?;
    let k2 = wavenumber(length, m).powi(2);
    let omega = k2 * (section.dbar / (section.rho0 + k2 * inertia_correction(section))).sqrt();
    check_positive("omega", omega)?;
    Ok(modal_result(section, length, m, omega))
}

/// Coefficients and wavenumbers of the reduced equation at angular frequency `omega`.
pub fn characteristic_roots<T: Scalar>(section: &Section<T>, omega: T) -> CharacteristicRoots<T> {
    let w2 = omega * omega;
    let alpha2 = inertia_correction(section) * w2 / (T::lit(2.0) * section.dbar);
    let beta4 = section.rho0 * w2 / section.dbar;
    let disc = (alpha2 * alpha2 + beta4).sqrt();
    // n1^2 = disc - alpha2 cancels for alpha2 >> beta4; use the conjugate form.
    let n1_sq = if alpha2 > T::zero() {
        beta4 / (disc + alpha2)
    } else {
        disc - alpha2
    };
    let n3_sq = if alpha2 < T::zero() {
        beta4 / (disc - alpha2)
    } else {
        disc + alpha2
    };
    CharacteristicRoots {
        alpha2,
        beta4,
        n1: n1_sq.sqrt(),
        n3: n3_sq.sqrt(),
    }
}

/// Linear-in-`omega^2` form of the full sixth-order equation evaluated on the
/// trial `cos(k x)` / `sin(k x)`: `c0 + c1 omega^2 = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SixthOrderRelation<T = f64> {
    pub c0: T,
    pub c1: T,
}

impl<T: Scalar> SixthOrderRelation<T> {
    pub fn new(section: &Section<T>, k: T) -> Self {
        let k2 = k * k;
        let k4 = k2 * k2;
        let s = section;
        // eta1 D11 (-k^2)^3 + (eta1 rho2 w^2 + Dbar) k^4 + (rho2 - eta1 rho0) w^2 (-k^2) - rho0 w^2
        SixthOrderRelation {
            c0: -s.eta1 * s.d11 * k4 * k2 + s.dbar * k4,
            c1: s.eta1 * s.rho2 * k4 - inertia_correction(s) * k2 - s.rho0,
        }
    }

    pub fn residual(&self, omega: T) -> T {
        self.c0 + self.c1 * omega * omega
    }

    pub fn omega_squared(&self) -> T {
        -self.c0 / self.c1
    }
}

/// Frequency of mode `m` from the full sixth-order equation, without the
/// small-term neglect behind [`frequency_closed_form`].
pub fn frequency_sixth_order<T: Scalar>(
    section: &Section<T>,
    length: T,
    m: usize,
) -> Result<ModalResult<T>, ModalError> {
    if m == 0 {
        return Err(ModalError::ModeNumber);
    }
    check_positive("length", length)?;
    let relation = SixthOrderRelation::new(section, wavenumber(length, m));
    let omega2 = relation.omega_squared();
    if !(omega2 > T::zero()) || !omega2.is_finite() {
        return Err(ModalError::NoPositiveRoot {
            m,
            omega2: omega2.as_f64(),
        });
    }
    Ok(modal_result(section, length, m, omega2.sqrt()))
}

/// Samples of the potential amplitude `phi(x)`; the full potential in the
/// piezoelectric layer is `z (h1 - z) phi(x)` times the time factor.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ElectricProfile<T = f64> {
    pub x: Vec<T>,
    pub phi: Vec<T>,
    /// Deflection amplitude on the same grid.
    pub w: Vec<T>,
}

impl<T: Scalar> ElectricProfile<T> {
    /// Full potential at sample `i` and height `z` above the interface.
    pub fn potential(&self, i: usize, z: T, h1: T) -> T {
        z * (h1 - z) * self.phi[i]
    }

    /// Relative norm of `eta1 phi'' + phi + eta2 w''`, second derivatives by a
    /// fourth-order central stencil on the interior samples.
    pub fn electric_residual(&self, section: &Section<T>) -> T {
        let n = self.x.len();
        if n < 5 {
            return T::nan();
        }
        let dx = self.x[1] - self.x[0];
        let d2 = |v: &[T], i: usize| {
            (-v[i - 2] + T::lit(16.0) * v[i - 1] - T::lit(30.0) * v[i] + T::lit(16.0) * v[i + 1]
                - v[i + 2])
                / (T::lit(12.0) * dx * dx)
        };
        let mut res = T::zero();
        let mut norm = T::zero();
        for i in 2..n - 2 {
            let r = section.eta1 * d2(&self.phi, i) + self.phi[i] + section.eta2 * d2(&self.w, i);
            res += r * r;
            norm += self.phi[i] * self.phi[i];
        }
        (res / norm).sqrt()
    }
}

/// Potential amplitude `phi(x)` implied by a modal result; requires `F != 0`.
pub fn potential_amplitude<T: Scalar>(result: &ModalResult<T>, section: &Section<T>, x: T) -> T {
    let s = section;
    let w2 = result.omega * result.omega;
    let shape = &result.shape;
    let (w, wpp, w4) = (
        shape.derivative(x, 0),
        shape.derivative(x, 2),
        shape.derivative(x, 4),
    );
    -(s.eta1 / s.f) * (s.d11 * w4 + s.rho2 * w2 * wpp - s.rho0 * w2 * w) - s.eta2 * wpp
}

/// Recovers the potential amplitude from the mechanical equation.
///
/// Exact for results of [`frequency_sixth_order`], which solve the coupled
/// mechanical and electric equations together. For closed-form results the
/// electric equation is only satisfied up to the neglected small terms.
pub fn electric_profile<T: Scalar>(
    result: &ModalResult<T>,
    section: &Section<T>,
    grid: usize,
) -> Result<ElectricProfile<T>, ModalError> {
    if section.f == T::zero() {
        return Err(ModalError::CouplingAbsent);
    }
    if grid < 16 {
        return Err(ModalError::GridTooSmall(grid));
    }
    let half = result.length * T::lit(0.5);
    let step = result.length / T::from_count(grid - 1);
    let x: Vec<T> = (0..grid)
        .map(|i| (-half + step * T::from_count(i)).min(half))
        .collect();
    let phi = x
        .iter()
        .map(|&xi| potential_amplitude(result, section, xi))
        .collect();
    let w = x.iter().map(|&xi| result.shape.derivative(xi, 0)).collect();
    Ok(ElectricProfile { x, phi, w })
}

/// Span length whose closed-form mode-`m` frequency equals `target_hz`.
pub fn calibrate_length<T: Scalar>(
    section: &Section<T>,
    target_hz: T,
    m: usize,
) -> Result<T, ModalError> {
    check_positive("target frequency", target_hz)?;
    let freq = |length: T| frequency_closed_form(section, length, m).map(|r| r.freq_hz);
    let target_omega = target_hz * T::TAU();
    // classical estimate k^2 sqrt(Dbar / rho0) = omega
    let guess =
        T::from_count(m) * T::PI() / (target_omega * (section.rho0 / section.dbar).sqrt()).sqrt();
    check_positive("length estimate", guess)?;

    // f decreases with L
    let (mut short, mut long) = (guess, guess);
    let mut tries = 0;
    while freq(short)? < target_hz {
        short = short * T::lit(0.5);
        tries += 1;
        if tries > 200 {
            return Err(ModalError::Bracket {
                target_hz: target_hz.as_f64(),
            });
        }
    }
    while freq(long)? > target_hz {
        long = long * T::lit(2.0);
        tries += 1;
        if tries > 200 {
            return Err(ModalError::Bracket {
                target_hz: target_hz.as_f64(),
            });
        }
    }
    for _ in 0..200 {
        let mid = (short + long) * T::lit(0.5);
        if mid <= short || mid >= long {
            break;
        }
        if freq(mid)? > target_hz {
            short = mid;
        } else {
            long = mid;
        }
    }
    let (fs, fl) = (freq(short)? - target_hz, freq(long)? - target_hz);
    Ok(if fs.abs() <= fl.abs() { short } else { long })
}
