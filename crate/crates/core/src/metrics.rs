//! Battery figures of merit: ergotropy, work, power, capacity and
//! l1-coherence.
//!
//! Every closed-form metric has a numeric counterpart built only from the
//! eigensolver, the Gibbs state and the charging unitary:
//!
//! | metric     | closed form                                  | numeric route                              |
//! |------------|----------------------------------------------|--------------------------------------------|
//! | ergotropy  | `4ξc² sin²(2τ) B₊ / (α₊(A₊+A₋))`             | sorted spectra of `R_X(τ)` and `H_B`       |
//! | power      | `8ξc² sin(4τ) B₊ / (α₊(A₊+A₋))` (= `dE/dτ`)  | central difference of numeric ergotropy    |
//! | capacity   | `ξc + (α₋B₋ + α₊B₊) / (2(A₊+A₋))`            | `ξc − tr(H_B R_th)`                         |
//!
//! Power is reported per unit `τ`.

use serde::{Deserialize, Serialize};

use crate::dynamics::{charging_unitary_at, evolve, ChargingTime, ClosedFormMode};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigendecomposition, ComplexMatrix, SpectralDecomposition};
use crate::model::{
    build_degenerate_hamiltonian, gibbs_state_numeric, thermal_terms, BatteryParams, DensityMatrix,
    ThermalClosedFormTerms,
};
use crate::tolerances::Tolerances;

/// State with the populations of `state` sorted descending, placed on the
/// eigenvectors of `h` sorted ascending in energy.
pub fn passive_state(state: &DensityMatrix, h: &ComplexMatrix) -> Result<DensityMatrix> {
    let basis = hermitian_eigendecomposition(h)?;
    passive_state_in_basis(state, &basis)
}

/// [`passive_state`] against an explicit eigenbasis of the Hamiltonian. Any
/// orthonormal basis of a degenerate eigenspace gives the same energy.
pub fn passive_state_in_basis(
    state: &DensityMatrix,
    basis: &SpectralDecomposition,
) -> Result<DensityMatrix> {
    check_dims(state, basis.dim())?;
    let populations = descending_populations(state)?;
    let vectors: Vec<_> = (0..basis.dim()).map(|i| basis.eigenvector(i)).collect();
    let weights: Vec<_> = populations.iter().map(|&p| p.into()).collect();
    Ok(DensityMatrix::from_matrix_unchecked(
        ComplexMatrix::from_outer_products(&weights, &vectors),
    ))
}

fn descending_populations(state: &DensityMatrix) -> Result<Vec<f64>> {
    let mut pops = hermitian_eigendecomposition(state.matrix())?.eigenvalues;
    pops.reverse();
    Ok(pops)
}

fn check_dims(state: &DensityMatrix, dim: usize) -> Result<()> {
    if state.dim() == dim {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "state dimension {} does not match Hamiltonian dimension {dim}",
            state.dim()
        )))
    }
}

/// `Σ_{m,n} λ_m ε_n (|⟨Δ_n|e_m⟩|² − δ_mn)`, i.e. `tr(ρH) − Σ_k λ↓_k ε↑_k`.
pub fn ergotropy_general(state: &DensityMatrix, h: &ComplexMatrix) -> Result<f64> {
    check_dims(state, h.dim())?;
    let energies = hermitian_eigendecomposition(h)?.eigenvalues;
    let populations = descending_populations(state)?;
    let passive_energy: f64 = populations.iter().zip(&energies).map(|(l, e)| l * e).sum();
    Ok(state.matrix().trace_product(h).re - passive_energy)
}

/// `tr((ρ − ρ_ref) H)`.
pub fn ergotropy_vs_reference(
    state: &DensityMatrix,
    reference: &DensityMatrix,
    h: &ComplexMatrix,
) -> f64 {
    (state.matrix() - reference.matrix()).trace_product(h).re
}

/// Work `tr((ρ − Π) H)` released when the battery ends in `final_state`.
pub fn work_extracted(
    state: &DensityMatrix,
    final_state: &DensityMatrix,
    h: &ComplexMatrix,
) -> f64 {
    ergotropy_vs_reference(state, final_state, h)
}

pub fn ergotropy_closed_form(
    p: &BatteryParams,
    tau: ChargingTime,
    mode: ClosedFormMode,
) -> Result<f64> {
    ergotropy_closed_form_at(p, tau.value(), mode)
}

pub(crate) fn ergotropy_closed_form_at(
    p: &BatteryParams,
    tau: f64,
    mode: ClosedFormMode,
) -> Result<f64> {
    p.require_degeneracy_point()?;
    let t = thermal_terms(p)?;
    let xic = p.xic;
    Ok(match mode {
        ClosedFormMode::Corrected => {
            let s2 = (2.0 * tau).sin();
            4.0 * xic * xic * s2 * s2 * t.b_over_alpha_plus_ratio()
        }
        ClosedFormMode::Verbatim => verbatim_ergotropy(p, &t, tau, -1.0),
    })
}

/// Published ergotropy with the ambiguous "(A₊− +A₋)" bracket read as
/// `A₊ + sign·A₋`. The minus reading is the one consistent with the
/// `(A₊ − A₋)` term of the published power and is what `Verbatim` uses.
pub(crate) fn verbatim_ergotropy(
    p: &BatteryParams,
    t: &ThermalClosedFormTerms,
    tau: f64,
    sign: f64,
) -> f64 {
    let xic = p.xic;
    let (s, c) = tau.sin_cos();
    let bracket = 4.0
        * xic
        * (xic * (2.0 * tau).cos() * (t.b_over_alpha_minus_ratio() + t.b_over_alpha_plus_ratio())
            + c * c * (t.a_plus_ratio() + sign * t.a_minus_ratio()))
        + t.alpha_minus * t.b_minus_ratio()
        + t.alpha_plus * t.b_plus_ratio();
    s * s * bracket
}

pub fn instantaneous_power_closed_form(
    p: &BatteryParams,
    tau: ChargingTime,
    mode: ClosedFormMode,
) -> Result<f64> {
    p.require_degeneracy_point()?;
    let t = thermal_terms(p)?;
    let (xi1, xi2, xic) = (p.xi1, p.xi2, p.xic);
    let tau = tau.value();
    Ok(match mode {
        ClosedFormMode::Corrected => {
            8.0 * xic * xic * (4.0 * tau).sin() * t.b_over_alpha_plus_ratio()
        }
        ClosedFormMode::Verbatim => {
            let (s2, c2) = (2.0 * tau).sin_cos();
            let drive = 8.0 * xic * xic * c2;
            s2 * (4.0 * (t.a_plus_ratio() - t.a_minus_ratio()) * xic * c2
                + t.b_over_alpha_plus_ratio() * (drive + (xi1 + xi2).powi(2))
                + t.b_over_alpha_minus_ratio() * (drive + (xi1 - xi2).powi(2)))
        }
    })
}

/// Ergotropy of `R_X(τ)` from the numeric pipeline; `τ` may be negative.
pub fn ergotropy_numeric_at(p: &BatteryParams, tau: f64) -> Result<f64> {
    NumericPipeline::new(p)?.ergotropy_at(tau)
}

/// `(E(τ+h) − E(τ−h)) / 2h` with `E` from [`ergotropy_general`].
pub fn instantaneous_power_fd(p: &BatteryParams, tau: ChargingTime, step: f64) -> Result<f64> {
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "finite-difference step must be positive, got {step}"
        )));
    }
    NumericPipeline::new(p)?.power_fd_at(tau.value(), step)
}

/// `tr(H ρ↑) − tr(H ρ↓)` with `ρ↓ = |00⟩⟨00|`, `ρ↑ = |11⟩⟨11|`.
pub fn capacity_definitional(h: &ComplexMatrix) -> f64 {
    let last = h.dim() - 1;
    h[(last, last)].re - h[(0, 0)].re
}

pub fn capacity_closed_form(p: &BatteryParams) -> Result<f64> {
    p.require_degeneracy_point()?;
    let t = thermal_terms(p)?;
    Ok(p.xic + (t.alpha_minus * t.b_minus_ratio() + t.alpha_plus * t.b_plus_ratio()) / 2.0)
}

/// `Σ_{i≠j} |ρ_ij|` in the computational basis.
pub fn l1_coherence(state: &DensityMatrix) -> f64 {
    let m = state.matrix();
    let n = m.dim();
    let mut total = 0.0;
    for r in 0..n {
        for c in 0..n {
            if r != c {
                total += m[(r, c)].norm();
            }
        }
    }
    total
}

/// Numeric evaluation context for one parameter set: `H_B`, its spectrum and
/// the Gibbs state are computed once and reused across `τ`.
#[derive(Debug, Clone)]
pub struct NumericPipeline {
    pub params: BatteryParams,
    pub hamiltonian: ComplexMatrix,
    pub energies: Vec<f64>,
    pub thermal: DensityMatrix,
}

impl NumericPipeline {
    pub fn new(p: &BatteryParams) -> Result<Self> {
        p.validate()?;
        let hamiltonian = build_degenerate_hamiltonian(p);
        let energies = hermitian_eigendecomposition(&hamiltonian)?.eigenvalues;
        let thermal = gibbs_state_numeric(&hamiltonian, p.temperature)?;
        Ok(Self {
            params: *p,
            hamiltonian,
            energies,
            thermal,
        })
    }

    pub fn evolved_at(&self, tau: f64) -> Result<DensityMatrix> {
        evolve(&self.thermal, &charging_unitary_at(tau))
    }

    pub fn ergotropy_of(&self, state: &DensityMatrix) -> Result<f64> {
        let populations = descending_populations(state)?;
        let passive: f64 = populations
            .iter()
            .zip(&self.energies)
            .map(|(l, e)| l * e)
            .sum();
        Ok(state.matrix().trace_product(&self.hamiltonian).re - passive)
    }

    pub fn ergotropy_at(&self, tau: f64) -> Result<f64> {
        self.ergotropy_of(&self.evolved_at(tau)?)
    }

    /// `tr((R_X(τ) − R_th) H_B)`.
    pub fn ergotropy_vs_thermal_at(&self, tau: f64) -> Result<f64> {
        Ok(ergotropy_vs_reference(
            &self.evolved_at(tau)?,
            &self.thermal,
            &self.hamiltonian,
        ))
    }

    pub fn power_fd_at(&self, tau: f64, step: f64) -> Result<f64> {
        Ok((self.ergotropy_at(tau + step)? - self.ergotropy_at(tau - step)?) / (2.0 * step))
    }

    /// `ξc − tr(H_B R_th)`.
    pub fn capacity_thermal(&self) -> f64 {
        self.params.xic - self.thermal.matrix().trace_product(&self.hamiltonian).re
    }
}

/// All metrics at one `τ`. Closed-form fields are `None` when closed forms
/// are disabled for the run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsSample {
    pub tau: f64,
    pub ergotropy_numeric: f64,
    pub ergotropy_closed: Option<f64>,
    pub power_closed: Option<f64>,
    pub power_fd: f64,
    pub capacity_definitional: f64,
    /// `ξc − tr(H_B R_th)` from the numeric Gibbs state.
    pub capacity_numeric: f64,
    pub capacity_closed: Option<f64>,
    pub coherence_l1: f64,
}

impl MetricsSample {
    pub fn evaluate(
        p: &BatteryParams,
        tau: ChargingTime,
        mode: Option<ClosedFormMode>,
    ) -> Result<Self> {
        Self::evaluate_with(
            &NumericPipeline::new(p)?,
            tau,
            mode,
            Tolerances::current().fd_step,
        )
    }

    pub fn evaluate_with(
        pipeline: &NumericPipeline,
        tau: ChargingTime,
        mode: Option<ClosedFormMode>,
        fd_step: f64,
    ) -> Result<Self> {
        let p = &pipeline.params;
        let evolved = pipeline.evolved_at(tau.value())?;
        let (ergotropy_closed, power_closed, capacity_closed) = match mode {
            Some(mode) => (
                Some(ergotropy_closed_form(p, tau, mode)?),
                Some(instantaneous_power_closed_form(p, tau, mode)?),
                Some(capacity_closed_form(p)?),
            ),
            None => (None, None, None),
        };
        Ok(Self {
            tau: tau.value(),
            ergotropy_numeric: pipeline.ergotropy_of(&evolved)?,
            ergotropy_closed,
            power_closed,
            power_fd: pipeline.power_fd_at(tau.value(), fd_step)?,
            capacity_definitional: capacity_definitional(&pipeline.hamiltonian),
            capacity_numeric: pipeline.capacity_thermal(),
            capacity_closed,
            coherence_l1: l1_coherence(&evolved),
        })
    }

    /// Closed-form value when available, numeric otherwise.
    pub fn ergotropy(&self) -> f64 {
        self.ergotropy_closed.unwrap_or(self.ergotropy_numeric)
    }

    pub fn power(&self) -> f64 {
        self.power_closed.unwrap_or(self.power_fd)
    }

    pub fn capacity(&self) -> f64 {
        self.capacity_closed.unwrap_or(self.capacity_numeric)
    }
}
