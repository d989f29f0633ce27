//! Transfer matrix functions `Ξ(s) = S − C(sI − A)⁻¹C†S` and `ξ(s) = C(sI − A)⁻¹`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matkit::{
    self, c, commutator, eig_hermitian, identity, max_norm, unitarity_residual, ComplexMatrix,
    STRUCTURAL_TOL,
};
use crate::slh::{drift, LinearComponent};

/// Real offset used for `0⁺` when evaluating on the imaginary axis.
pub const SIGMA_MIN: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct TransferEvaluation {
    pub s: Complex64,
    /// `Ξ(s)`: input fields to output fields.
    pub transfer: ComplexMatrix,
    /// `ξ(s)`: initial mode operators to output fields.
    pub mode_response: ComplexMatrix,
}

/// `(sI − A)⁻¹ rhs`, failing with SingularAtS when `s` sits on a pole.
fn resolvent_solve(comp: &LinearComponent, s: Complex64, rhs: &ComplexMatrix) -> Result<ComplexMatrix> {
    let a = drift(comp);
    let scale = s.norm() + a.column_iter().map(|col| col.norm()).fold(0.0, f64::max);
    let resolvent = identity(comp.n_modes()) * s - a;
    matkit::solve_scaled(&resolvent, rhs, scale).map_err(|_| Error::SingularAtS { re: s.re, im: s.im })
}

pub fn eval_transfer(comp: &LinearComponent, s: Complex64) -> Result<TransferEvaluation> {
    let m = comp.n_modes();
    let cs = comp.c().adjoint() * comp.s();
    let x = resolvent_solve(comp, s, &cs)?;
    let xi = comp.s() - comp.c() * x;
    let mode_response = comp.c() * resolvent_solve(comp, s, &identity(m))?;
    Ok(TransferEvaluation { s, transfer: xi, mode_response })
}

/// Just `Ξ(s)`.
pub fn transfer_at(comp: &LinearComponent, s: Complex64) -> Result<ComplexMatrix> {
    let x = resolvent_solve(comp, s, &(comp.c().adjoint() * comp.s()))?;
    Ok(comp.s() - comp.c() * x)
}

/// Evaluates `Ξ(σ + iω)` on a frequency grid. Poles are reported per point.
pub fn freq_response_with_sigma(
    comp: &LinearComponent,
    omegas: &[f64],
    sigma: f64,
) -> Vec<Result<TransferEvaluation>> {
    omegas.par_iter().map(|&w| eval_transfer(comp, c(sigma, w))).collect()
}

pub fn freq_response(comp: &LinearComponent, omegas: &[f64]) -> Vec<Result<TransferEvaluation>> {
    freq_response_with_sigma(comp, omegas, SIGMA_MIN)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AxisUnitarityReport {
    pub tol: f64,
    /// `(ω, residual)`; `None` where `ω` is a pole.
    pub points: Vec<(f64, Option<f64>)>,
}

impl AxisUnitarityReport {
    pub fn max_residual(&self) -> f64 {
        self.points.iter().filter_map(|p| p.1).fold(0.0, f64::max)
    }

    pub fn passed(&self) -> bool {
        self.points.iter().all(|p| p.1.is_none_or(|r| r <= self.tol))
    }
}

/// Residual `max(‖ΞΞ† − I‖, ‖Ξ†Ξ − I‖)` of `Ξ(0⁺ + iω)` along a grid.
pub fn check_unitary_on_axis(comp: &LinearComponent, omegas: &[f64], tol: f64) -> AxisUnitarityReport {
    let points = freq_response(comp, omegas)
        .into_iter()
        .zip(omegas)
        .map(|(ev, &w)| (w, ev.ok().and_then(|ev| unitarity_residual(&ev.transfer))))
        .collect();
    AxisUnitarityReport { tol, points }
}

/// Spectral form of a component whose `Ω` is a function of `C†C`:
/// `Ξ(s) = Σ_k (s − ½γ_k + iε_k)/(s + ½γ_k + iε_k) E_k S`.
#[derive(Debug, Clone, PartialEq)]
pub struct CommutingForm {
    pub gammas: Vec<f64>,
    pub epsilons: Vec<f64>,
    /// Eigenprojectors of `CC†` (port space).
    pub projectors: Vec<ComplexMatrix>,
    pub s: ComplexMatrix,
}

impl CommutingForm {
    pub fn eval(&self, s: Complex64) -> ComplexMatrix {
        let n = self.s.nrows();
        let mut sum = ComplexMatrix::zeros(n, n);
        for ((&g, &e), p) in self.gammas.iter().zip(&self.epsilons).zip(&self.projectors) {
            let num = s - 0.5 * g + c(0.0, e);
            let den = s + 0.5 * g + c(0.0, e);
            sum += p * (num / den);
        }
        sum * &self.s
    }
}

pub fn commuting_form(comp: &LinearComponent) -> Result<CommutingForm> {
    let cm = comp.c();
    let omega = comp.omega();
    let ctc = cm.adjoint() * cm;
    let comm = max_norm(&commutator(&ctc, omega));
    if comm > STRUCTURAL_TOL {
        return Err(Error::NotCommuting { residual: comm });
    }

    let port_spec = eig_hermitian(&(cm * cm.adjoint()))?;
    let lifted = cm * omega * cm.adjoint();
    let zero_tol = STRUCTURAL_TOL;

    let mut gammas = Vec::with_capacity(port_spec.eigenvalues.len());
    let mut epsilons = Vec::with_capacity(port_spec.eigenvalues.len());
    for (&g, p) in port_spec.eigenvalues.iter().zip(&port_spec.projectors) {
        let eps = if g > zero_tol {
            let eps = (p * &lifted).trace().re / (p * cm * cm.adjoint()).trace().re;
            // Ω restricted to the eigenspace must act as a scalar.
            let res = max_norm(&(p * &lifted * p - p * c(g * eps, 0.0)));
            if res > STRUCTURAL_TOL * g.max(1.0) {
                return Err(Error::NotCommuting { residual: res });
            }
            eps
        } else {
            decoupled_shift(cm, omega)?
        };
        gammas.push(g.max(0.0));
        epsilons.push(eps);
    }

    Ok(CommutingForm {
        gammas,
        epsilons,
        projectors: port_spec.projectors,
        s: comp.s().clone(),
    })
}

/// `ε(0)`: the frequency of `Ω` on the kernel of `C`, when that kernel exists
/// and `Ω` acts on it as a scalar.
fn decoupled_shift(cm: &ComplexMatrix, omega: &ComplexMatrix) -> Result<f64> {
    let mode_spec = eig_hermitian(&(cm.adjoint() * cm))?;
    let kernel = mode_spec
        .eigenvalues
        .iter()
        .zip(&mode_spec.projectors)
        .find(|(&g, _)| g <= STRUCTURAL_TOL)
        .map(|(_, p)| p)
        .ok_or(Error::ZeroModeAmbiguity)?;
    let eps = (kernel * omega).trace().re / kernel.trace().re;
    let res = max_norm(&(kernel * omega * kernel - kernel * c(eps, 0.0)));
    if res > STRUCTURAL_TOL {
        return Err(Error::ZeroModeAmbiguity);
    }
    Ok(eps)
}

/// Poles `−½γ_k − iε_k` and zeros `½γ_k − iε_k`.
pub fn poles_zeros_commuting(cf: &CommutingForm) -> (Vec<Complex64>, Vec<Complex64>) {
    cf.gammas
        .iter()
        .zip(&cf.epsilons)
        .map(|(&g, &e)| (c(-0.5 * g, -e), c(0.5 * g, -e)))
        .unzip()
}
