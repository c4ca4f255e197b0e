//! Battery Hamiltonians and the Gibbs initial state.
//!
//! Basis order is |00⟩, |01⟩, |10⟩, |11⟩ throughout; with that order the
//! degeneracy-point Hamiltonian is
//!
//! ```text
//!        ⎛ 2ξc  −ξ2  −ξ1    0 ⎞
//! H_B = ½⎜ −ξ2 −2ξc    0  −ξ1 ⎟
//!        ⎜ −ξ1    0 −2ξc  −ξ2 ⎟
//!        ⎝   0  −ξ1  −ξ2  2ξc ⎠
//! ```
//!
//! whose eigenvalues are `±α₊/2, ±α₋/2` with `α± = √(4ξc² + (ξ1 ± ξ2)²)`.
//! Energies are dimensionless and `k_B = ħ = 1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigendecomposition, pauli, Complex, ComplexMatrix};
use crate::tolerances::Tolerances;

/// Gate charge at the charge-degeneracy point.
pub const DEGENERACY_GATE_CHARGE: f64 = 0.5;

/// Physical knobs of the two-qubit battery.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BatteryParams {
    /// Josephson energy of qubit 1.
    pub xi1: f64,
    /// Josephson energy of qubit 2.
    pub xi2: f64,
    /// Mutual (capacitive) coupling energy.
    pub xic: f64,
    /// Charging energy of qubit 1; only enters the full Hamiltonian.
    pub xic1: f64,
    /// Charging energy of qubit 2; only enters the full Hamiltonian.
    pub xic2: f64,
    pub ng1: f64,
    pub ng2: f64,
    pub temperature: f64,
}

impl BatteryParams {
    /// Parameters at the degeneracy point (`ng1 = ng2 = 1/2`, charging energies zero).
    pub fn degenerate(xi1: f64, xi2: f64, xic: f64, temperature: f64) -> Self {
        Self {
            xi1,
            xi2,
            xic,
            xic1: 0.0,
            xic2: 0.0,
            ng1: DEGENERACY_GATE_CHARGE,
            ng2: DEGENERACY_GATE_CHARGE,
            temperature,
        }
    }

    pub fn is_degeneracy_point(&self) -> bool {
        self.ng1 == DEGENERACY_GATE_CHARGE && self.ng2 == DEGENERACY_GATE_CHARGE
    }

    pub fn validate(&self) -> Result<()> {
        let named = [
            ("xi1", self.xi1),
            ("xi2", self.xi2),
            ("xic", self.xic),
            ("xic1", self.xic1),
            ("xic2", self.xic2),
            ("ng1", self.ng1),
            ("ng2", self.ng2),
            ("temperature", self.temperature),
        ];
        if let Some((name, v)) = named.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "{name} must be finite, got {v}"
            )));
        }
        if self.xi1 < 0.0 || self.xi2 < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "Josephson energies must be non-negative (xi1 = {}, xi2 = {})",
                self.xi1, self.xi2
            )));
        }
        if !(0.0..=1.0).contains(&self.ng1) || !(0.0..=1.0).contains(&self.ng2) {
            return Err(Error::InvalidParameter(format!(
                "gate charges must lie in [0, 1] (ng1 = {}, ng2 = {})",
                self.ng1, self.ng2
            )));
        }
        if self.temperature <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "temperature must be positive, got {}",
                self.temperature
            )));
        }
        Ok(())
    }

    pub(crate) fn require_degeneracy_point(&self) -> Result<()> {
        self.validate()?;
        if self.is_degeneracy_point() {
            Ok(())
        } else {
            Err(Error::NotDegeneracyPoint {
                ng1: self.ng1,
                ng2: self.ng2,
            })
        }
    }
}

/// Hermitian, unit-trace, positive-semidefinite 4×4 state.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(ComplexMatrix);

impl DensityMatrix {
    /// Wraps `m` after checking the density-matrix invariants.
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        let state = Self(m);
        state.validate(Tolerances::current().density)?;
        Ok(state)
    }

    /// Wraps a matrix that is a density matrix by construction.
    pub(crate) fn from_matrix_unchecked(m: ComplexMatrix) -> Self {
        Self(m)
    }

    /// Maximally mixed state of dimension `dim`.
    pub fn maximally_mixed(dim: usize) -> Self {
        Self(ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64))
    }

    /// `|ψ⟩⟨ψ|` for a normalised vector.
    pub fn pure(psi: &[Complex]) -> Result<Self> {
        Self::new(ComplexMatrix::from_outer_products(
            &[Complex::new(1.0, 0.0)],
            &[psi.to_vec()],
        ))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    /// Checks Hermiticity, unit trace and positivity within `tol`.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let m = &self.0;
        if !m.is_finite() {
            return Err(Error::InvalidState("non-finite entries".into()));
        }
        let herm = m.hermitian_deviation();
        if herm > tol {
            return Err(Error::InvalidState(format!(
                "not Hermitian (deviation {herm:e})"
            )));
        }
        let tr = m.trace();
        if (tr - Complex::new(1.0, 0.0)).norm() > tol {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let min = hermitian_eigendecomposition(m)?.eigenvalues[0];
        if min < -tol {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        Ok(())
    }
}

/// Full two-qubit Hamiltonian with gate charges, built from Pauli tensor products:
///
/// `H = −½{[4ξc1(½−ng1) + 2ξc(½−ng2)]σz⊗I + [4ξc2(½−ng2) + 2ξc(½−ng1)]I⊗σz
///        + ξ1 σx⊗I + ξ2 I⊗σx − 2ξc σz⊗σz}`.
pub fn build_full_hamiltonian(p: &BatteryParams) -> ComplexMatrix {
    let (x, z, id) = (pauli::x(), pauli::z(), pauli::identity());
    let hz1 = 4.0 * p.xic1 * (0.5 - p.ng1) + 2.0 * p.xic * (0.5 - p.ng2);
    let hz2 = 4.0 * p.xic2 * (0.5 - p.ng2) + 2.0 * p.xic * (0.5 - p.ng1);
    let terms = [
        z.kron(&id).scale_real(hz1),
        id.kron(&z).scale_real(hz2),
        x.kron(&id).scale_real(p.xi1),
        id.kron(&x).scale_real(p.xi2),
        z.kron(&z).scale_real(-2.0 * p.xic),
    ];
    let sum = terms
        .iter()
        .fold(ComplexMatrix::zeros(4), |acc, t| &acc + t);
    sum.scale_real(-0.5)
}

/// The degeneracy-point Hamiltonian, entry by entry.
pub fn build_degenerate_hamiltonian(p: &BatteryParams) -> ComplexMatrix {
    let (a, b, c) = (p.xic, -p.xi2 / 2.0, -p.xi1 / 2.0);
    ComplexMatrix::from_real_rows(&[
        &[a, b, c, 0.0],
        &[b, -a, 0.0, c],
        &[c, 0.0, -a, b],
        &[0.0, c, b, a],
    ])
}

/// Collective X drive `Ω(σx⊗I + I⊗σx)`.
pub fn build_charging_hamiltonian(omega: f64) -> ComplexMatrix {
    let w = omega;
    ComplexMatrix::from_real_rows(&[
        &[0.0, w, w, 0.0],
        &[w, 0.0, 0.0, w],
        &[w, 0.0, 0.0, w],
        &[0.0, w, w, 0.0],
    ])
}

/// Above this the hyperbolic functions are evaluated in shifted form.
const SHIFT_THRESHOLD: f64 = 700.0;

/// Below this `sinh(x)/α` is taken from its series to survive `α → 0`.
const SMALL_EXPONENT: f64 = 1e-5;

/// `α±`, `A± = cosh(α±/2T)`, `B± = sinh(α±/2T)` and `Z = 2(A₊ + A₋)`.
///
/// The hyperbolic values are stored multiplied by `e^{−s}` with
/// `s = max(α±)/(2T)`, so every ratio such as `B₊/(A₊+A₋)` stays finite even
/// when the raw values would overflow. Use the `*_ratio` style accessors in
/// numerical code; the raw accessors return `+inf` once `s` passes ~709.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalClosedFormTerms {
    pub alpha_plus: f64,
    pub alpha_minus: f64,
    pub temperature: f64,
    log_scale: f64,
    a_plus_s: f64,
    a_minus_s: f64,
    b_plus_s: f64,
    b_minus_s: f64,
    b_over_alpha_plus_s: f64,
    b_over_alpha_minus_s: f64,
}

fn scaled_cosh(x: f64, shift: f64) -> f64 {
    if shift <= SHIFT_THRESHOLD {
        x.cosh() * (-shift).exp()
    } else {
        0.5 * ((x - shift).exp() + (-x - shift).exp())
    }
}

fn scaled_sinh(x: f64, shift: f64) -> f64 {
    if shift <= SHIFT_THRESHOLD {
        x.sinh() * (-shift).exp()
    } else {
        0.5 * ((x - shift).exp() - (-x - shift).exp())
    }
}

/// `sinh(α/2T)/α · e^{−shift}`, continuous through `α = 0`.
fn scaled_sinh_over_alpha(alpha: f64, temperature: f64, shift: f64) -> f64 {
    let x = alpha / (2.0 * temperature);
    if x < SMALL_EXPONENT {
        (1.0 + x * x / 6.0) / (2.0 * temperature) * (-shift).exp()
    } else {
        scaled_sinh(x, shift) / alpha
    }
}

impl ThermalClosedFormTerms {
    pub fn a_plus(&self) -> f64 {
        self.a_plus_s * self.log_scale.exp()
    }

    pub fn a_minus(&self) -> f64 {
        self.a_minus_s * self.log_scale.exp()
    }

    pub fn b_plus(&self) -> f64 {
        self.b_plus_s * self.log_scale.exp()
    }

    pub fn b_minus(&self) -> f64 {
        self.b_minus_s * self.log_scale.exp()
    }

    /// Partition function `Z = 2(A₊ + A₋)`.
    pub fn z(&self) -> f64 {
        2.0 * (self.a_plus_s + self.a_minus_s) * self.log_scale.exp()
    }

    /// `ln Z`, finite in every regime.
    pub fn log_z(&self) -> f64 {
        (2.0 * (self.a_plus_s + self.a_minus_s)).ln() + self.log_scale
    }

    /// Exponent shift applied to the stored hyperbolic values.
    pub fn log_scale(&self) -> f64 {
        self.log_scale
    }

    fn norm_s(&self) -> f64 {
        self.a_plus_s + self.a_minus_s
    }

    /// `A₊/(A₊+A₋)`.
    pub fn a_plus_ratio(&self) -> f64 {
        self.a_plus_s / self.norm_s()
    }

    /// `A₋/(A₊+A₋)`.
    pub fn a_minus_ratio(&self) -> f64 {
        self.a_minus_s / self.norm_s()
    }

    /// `B₊/(A₊+A₋)`.
    pub fn b_plus_ratio(&self) -> f64 {
        self.b_plus_s / self.norm_s()
    }

    /// `B₋/(A₊+A₋)`.
    pub fn b_minus_ratio(&self) -> f64 {
        self.b_minus_s / self.norm_s()
    }

    /// `B₊/(α₊(A₊+A₋))`, finite as `α₊ → 0`.
    pub fn b_over_alpha_plus_ratio(&self) -> f64 {
        self.b_over_alpha_plus_s / self.norm_s()
    }

    /// `B₋/(α₋(A₊+A₋))`, finite as `α₋ → 0`.
    pub fn b_over_alpha_minus_ratio(&self) -> f64 {
        self.b_over_alpha_minus_s / self.norm_s()
    }

    /// Thermal mean energy `tr(H_B R_th) = −(α₊B₊ + α₋B₋)/(2(A₊+A₋))`.
    pub fn mean_energy(&self) -> f64 {
        -(self.alpha_plus * self.b_plus_ratio() + self.alpha_minus * self.b_minus_ratio()) / 2.0
    }
}

pub fn thermal_terms(p: &BatteryParams) -> Result<ThermalClosedFormTerms> {
    p.validate()?;
    let alpha_plus = (4.0 * p.xic * p.xic + (p.xi1 + p.xi2).powi(2)).sqrt();
    let alpha_minus = (4.0 * p.xic * p.xic + (p.xi1 - p.xi2).powi(2)).sqrt();
    let t = p.temperature;
    let x_plus = alpha_plus / (2.0 * t);
    let x_minus = alpha_minus / (2.0 * t);
    let shift = x_plus.max(x_minus);
    if !shift.is_finite() {
        return Err(Error::Overflow { exponent: shift });
    }
    Ok(ThermalClosedFormTerms {
        alpha_plus,
        alpha_minus,
        temperature: t,
        log_scale: shift,
        a_plus_s: scaled_cosh(x_plus, shift),
        a_minus_s: scaled_cosh(x_minus, shift),
        b_plus_s: scaled_sinh(x_plus, shift),
        b_minus_s: scaled_sinh(x_minus, shift),
        b_over_alpha_plus_s: scaled_sinh_over_alpha(alpha_plus, t, shift),
        b_over_alpha_minus_s: scaled_sinh_over_alpha(alpha_minus, t, shift),
    })
}

/// `e^{−H/T}/Z` through the eigenbasis of `h`, with weights shifted by the
/// ground energy so nothing overflows.
pub fn gibbs_state_numeric(h: &ComplexMatrix, temperature: f64) -> Result<DensityMatrix> {
    if !(temperature.is_finite() && temperature > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "temperature must be positive and finite, got {temperature}"
        )));
    }
    let decomp = hermitian_eigendecomposition(h)?;
    let ground = decomp.eigenvalues[0];
    let weights: Vec<f64> = decomp
        .eigenvalues
        .iter()
        .map(|e| (-(e - ground) / temperature).exp())
        .collect();
    let total: f64 = weights.iter().sum();
    let rho = decomp.map(|e| {
        let w = (-(e - ground) / temperature).exp();
        Complex::new(w / total, 0.0)
    });
    Ok(DensityMatrix::from_matrix_unchecked(rho))
}

/// The Gibbs state assembled element by element from the `A±, B±, α±` terms.
pub fn gibbs_state_closed_form(p: &BatteryParams) -> Result<DensityMatrix> {
    p.require_degeneracy_point()?;
    let t = thermal_terms(p)?;
    let (xi1, xi2, xic) = (p.xi1, p.xi2, p.xic);
    let (ap, am) = (t.a_plus_ratio(), t.a_minus_ratio());
    let (bap, bam) = (t.b_over_alpha_plus_ratio(), t.b_over_alpha_minus_ratio());

    let r11 = (am + ap - 2.0 * bam * xic - 2.0 * bap * xic) / 4.0;
    let r12 = (bam * (xi2 - xi1) / 2.0 + bap * (xi1 + xi2) / 2.0) / 2.0;
    let r13 = (bam * (xi1 - xi2) / 2.0 + bap * (xi1 + xi2) / 2.0) / 2.0;
    let r14 = (-am + ap + 2.0 * bam * xic - 2.0 * bap * xic) / 4.0;
    let r22 = (am + ap + 2.0 * (bam + bap) * xic) / 4.0;
    let r23 = (-am + ap - 2.0 * bam * xic + 2.0 * bap * xic) / 4.0;
    let r34 = r12;
    let r24 = r13;

    let rows: [&[f64]; 4] = [
        &[r11, r12, r13, r14],
        &[r12, r22, r23, r24],
        &[r13, r23, r22, r34],
        &[r14, r24, r34, r11],
    ];
    Ok(DensityMatrix::from_matrix_unchecked(
        ComplexMatrix::from_real_rows(&rows),
    ))
}
