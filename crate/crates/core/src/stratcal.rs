//! Stratonovich generator `(E, F, K)` ⇄ Itô parameters `(S, C, Ω)`.
//!
//! The two parameterisations are tied together by the coefficient form of
//! `dG = −i dE − (i/2) dE dG` under the quantum Itô table:
//!
//! ```text
//! S − I            = −iE − (i/2) E (S − I)
//! C                = −iF − (i/2) E C
//! −½C†C − iΩ       = −iK − (i/2) F†C      (anti-hermitian part fixes Ω)
//! ```

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matkit::{
    self, c, eig_hermitian, hermiticity_residual, identity, im_part, max_norm, ComplexMatrix,
    STRUCTURAL_TOL,
};
use crate::slh::LinearComponent;

#[derive(Debug, Clone, PartialEq)]
pub struct StratonovichModel {
    /// Hermitian `n×n` scattering generator.
    pub e: ComplexMatrix,
    /// `n×m` coupling generator, `F_op = F a`.
    pub f: ComplexMatrix,
    /// Hermitian `m×m` constant term, `K_op = a† K a`.
    pub k: ComplexMatrix,
}

impl StratonovichModel {
    pub fn new(e: ComplexMatrix, f: ComplexMatrix, k: ComplexMatrix) -> Result<Self> {
        if !e.is_square() || !k.is_square() || f.shape() != (e.nrows(), k.nrows()) {
            return Err(Error::DimensionMismatch(format!(
                "E {}x{}, F {}x{}, K {}x{}",
                e.nrows(),
                e.ncols(),
                f.nrows(),
                f.ncols(),
                k.nrows(),
                k.ncols()
            )));
        }
        for (m, what) in [(&e, "E"), (&f, "F"), (&k, "K")] {
            if !matkit::is_finite(m) {
                return Err(Error::NonFinite(what));
            }
        }
        for m in [&e, &k] {
            let r = hermiticity_residual(m).unwrap_or(f64::INFINITY);
            if r > STRUCTURAL_TOL {
                return Err(Error::NotHermitian { residual: r });
            }
        }
        Ok(Self { e, f, k })
    }

    pub fn n_ports(&self) -> usize {
        self.e.nrows()
    }
    pub fn n_modes(&self) -> usize {
        self.k.nrows()
    }
}

fn half_i() -> Complex64 {
    c(0.0, 0.5)
}

/// `I + (i/2) E`; invertible for hermitian `E`.
fn cayley_denominator(e: &ComplexMatrix) -> ComplexMatrix {
    identity(e.nrows()) + e * half_i()
}

pub fn strat_to_ito(sm: &StratonovichModel) -> Result<LinearComponent> {
    let n = sm.n_ports();
    let den = cayley_denominator(&sm.e);
    let num = identity(n) - &sm.e * half_i();
    // (I + iE/2)⁻¹ and (I − iE/2) commute
    let s = matkit::solve(&den, &num)?;
    let cm = matkit::solve(&den, &sm.f)? * c(0.0, -1.0);
    let omega = &sm.k + im_part(&(sm.f.adjoint() * &cm * half_i()));
    LinearComponent::new(s, cm, omega)
}

/// Inverse Cayley map; fails when −1 is an eigenvalue of `S`.
pub fn ito_to_strat(comp: &LinearComponent) -> Result<StratonovichModel> {
    let n = comp.n_ports();
    let s = comp.s();
    let s_plus = s + identity(n);
    let s_minus = s - identity(n);
    // E = 2i (S − I)(S + I)⁻¹, solved as (S + I)ᵀ-side system
    let e_adj = matkit::solve(&s_plus.adjoint(), &s_minus.adjoint()).map_err(|_| Error::CayleySingular)?;
    let e_raw = e_adj.adjoint() * c(0.0, 2.0);
    let e = matkit::re_part(&e_raw);
    let f = cayley_denominator(&e) * comp.c() * c(0.0, 1.0);
    let k = comp.omega() - im_part(&(f.adjoint() * comp.c() * half_i()));
    StratonovichModel::new(e, f, matkit::re_part(&k))
}

/// Max-norm residuals of the three coefficient equations linking `sm` and `comp`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ItoTableResiduals {
    pub scattering: f64,
    pub coupling: f64,
    pub damping: f64,
}

impl ItoTableResiduals {
    pub fn max(&self) -> f64 {
        self.scattering.max(self.coupling).max(self.damping)
    }
    pub fn as_array(&self) -> [f64; 3] {
        [self.scattering, self.coupling, self.damping]
    }
}

pub fn ito_table_residuals(sm: &StratonovichModel, comp: &LinearComponent) -> Result<ItoTableResiduals> {
    if sm.n_ports() != comp.n_ports() || sm.n_modes() != comp.n_modes() {
        return Err(Error::DimensionMismatch(format!(
            "Stratonovich model is {}-port/{}-mode, component is {}-port/{}-mode",
            sm.n_ports(),
            sm.n_modes(),
            comp.n_ports(),
            comp.n_modes()
        )));
    }
    let n = comp.n_ports();
    let i = c(0.0, 1.0);
    let s_minus = comp.s() - identity(n);
    let cm = comp.c();

    let scattering = max_norm(&(&s_minus + &sm.e * i + &sm.e * &s_minus * half_i()));
    let coupling = max_norm(&(cm + &sm.f * i + &sm.e * cm * half_i()));
    let lhs = cm.adjoint() * cm * c(-0.5, 0.0) - comp.omega() * i;
    let rhs = &sm.k * (-i) - sm.f.adjoint() * cm * half_i();
    let damping = max_norm(&(lhs - rhs));
    Ok(ItoTableResiduals { scattering, coupling, damping })
}

/// `S = exp(−iJ)` with `J = 2 arctan(E/2)`, by spectral calculus on `E`.
pub fn scattering_from_generator(e: &ComplexMatrix) -> Result<ComplexMatrix> {
    let spectrum = eig_hermitian(e)?;
    Ok(spectrum.apply(|lam| Complex64::from_polar(1.0, -2.0 * (lam / 2.0).atan())))
}
