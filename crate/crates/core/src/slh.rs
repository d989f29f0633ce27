//! Linear components: `L = C a`, `H = a† Ω a` and a scalar scattering matrix `S`.

use std::collections::HashSet;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matkit::{
    self, block_diag, c, hermiticity_residual, identity, unitarity_residual, zeros, ComplexMatrix,
    STRUCTURAL_TOL,
};

/// An open linear quantum component with `n` field ports and `m` oscillator modes.
///
/// `S` is `n×n`, `C` is `n×m` (rows index output ports), `Ω` is `m×m`.
/// Construction only checks shapes and finiteness; physical validity is
/// reported by [`validate`].
#[derive(Debug, Clone, PartialEq)]
pub struct LinearComponent {
    name: String,
    s: ComplexMatrix,
    c: ComplexMatrix,
    omega: ComplexMatrix,
    port_labels: Vec<String>,
    mode_labels: Vec<String>,
}

impl LinearComponent {
    pub fn new(s: ComplexMatrix, c: ComplexMatrix, omega: ComplexMatrix) -> Result<Self> {
        let n = s.nrows();
        let m = omega.nrows();
        if !s.is_square() {
            return Err(Error::DimensionMismatch(format!("S is {}x{}, expected square", n, s.ncols())));
        }
        if !omega.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "Omega is {}x{}, expected square",
                m,
                omega.ncols()
            )));
        }
        if c.shape() != (n, m) {
            return Err(Error::DimensionMismatch(format!(
                "C is {}x{}, expected {}x{}",
                c.nrows(),
                c.ncols(),
                n,
                m
            )));
        }
        for (mat, what) in [(&s, "S"), (&c, "C"), (&omega, "Omega")] {
            if !matkit::is_finite(mat) {
                return Err(Error::NonFinite(what));
            }
        }
        Ok(Self {
            name: String::from("g"),
            s,
            c,
            omega,
            port_labels: (0..n).map(|k| format!("p{k}")).collect(),
            mode_labels: (0..m).map(|k| format!("a{k}")).collect(),
        })
    }

    /// A component without modes: a static scattering device such as a beam splitter.
    pub fn scattering(s: ComplexMatrix) -> Result<Self> {
        let n = s.nrows();
        Self::new(s, zeros(n, 0), zeros(0, 0))
    }

    /// `n` ports that pass fields through unchanged.
    pub fn passthrough(n: usize) -> Self {
        Self::scattering(identity(n)).expect("identity is a valid scattering matrix")
    }

    /// The unit of concatenation.
    pub fn empty() -> Self {
        Self::passthrough(0)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn with_port_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n_ports() {
            return Err(Error::DimensionMismatch(format!(
                "{} port labels for {} ports",
                labels.len(),
                self.n_ports()
            )));
        }
        self.port_labels = labels;
        Ok(self)
    }

    pub fn with_mode_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n_modes() {
            return Err(Error::DimensionMismatch(format!(
                "{} mode labels for {} modes",
                labels.len(),
                self.n_modes()
            )));
        }
        self.mode_labels = labels;
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn n_ports(&self) -> usize {
        self.s.nrows()
    }
    pub fn n_modes(&self) -> usize {
        self.omega.nrows()
    }
    pub fn s(&self) -> &ComplexMatrix {
        &self.s
    }
    pub fn c(&self) -> &ComplexMatrix {
        &self.c
    }
    pub fn omega(&self) -> &ComplexMatrix {
        &self.omega
    }
    pub fn port_labels(&self) -> &[String] {
        &self.port_labels
    }
    pub fn mode_labels(&self) -> &[String] {
        &self.mode_labels
    }

    /// `(S, C, Ω)` equal entrywise within `tol`. Labels are ignored.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.s.shape() == other.s.shape()
            && self.omega.shape() == other.omega.shape()
            && matkit::max_norm(&(&self.s - &other.s)) <= tol
            && matkit::max_norm(&(&self.c - &other.c)) <= tol
            && matkit::max_norm(&(&self.omega - &other.omega)) <= tol
    }
}

/// Single-mode cavity: `L = √γ a`, `H = ω a†a`, `S = e^{iφ}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityParams {
    pub gamma: f64,
    pub omega: f64,
    pub phi: f64,
}

pub fn make_cavity(p: CavityParams) -> Result<LinearComponent> {
    if !(p.gamma >= 0.0) {
        return Err(Error::InvalidComponent(format!("cavity decay rate {} is negative", p.gamma)));
    }
    let s = ComplexMatrix::from_element(1, 1, Complex64::from_polar(1.0, p.phi));
    let cm = ComplexMatrix::from_element(1, 1, c(p.gamma.sqrt(), 0.0));
    let omega = ComplexMatrix::from_element(1, 1, c(p.omega, 0.0));
    Ok(LinearComponent::new(s, cm, omega)?.with_name("cavity"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Violation {
    SNotUnitary,
    OmegaNotHermitian,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::SNotUnitary => f.write_str("S not unitary"),
            Violation::OmegaNotHermitian => f.write_str("Omega not hermitian"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationIssue {
    pub violation: Violation,
    pub residual: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub issues: Vec<ValidationIssue>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.issues.is_empty()
    }

    pub fn residual_of(&self, violation: Violation) -> Option<f64> {
        self.issues.iter().find(|i| i.violation == violation).map(|i| i.residual)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.issues.is_empty() {
            return writeln!(f, "ok");
        }
        for issue in &self.issues {
            writeln!(f, "{} (residual {:e})", issue.violation, issue.residual)?;
        }
        Ok(())
    }
}

pub fn validate(comp: &LinearComponent) -> ValidationReport {
    validate_with_tol(comp, STRUCTURAL_TOL)
}

pub fn validate_with_tol(comp: &LinearComponent, tol: f64) -> ValidationReport {
    let mut issues = Vec::new();
    let s_res = unitarity_residual(comp.s()).unwrap_or(f64::INFINITY);
    if !(s_res <= tol) {
        issues.push(ValidationIssue { violation: Violation::SNotUnitary, residual: s_res });
    }
    let h_res = hermiticity_residual(comp.omega()).unwrap_or(f64::INFINITY);
    if !(h_res <= tol) {
        issues.push(ValidationIssue { violation: Violation::OmegaNotHermitian, residual: h_res });
    }
    ValidationReport { issues }
}

/// Drift matrix `A = −½ C†C − iΩ`.
pub fn drift(comp: &LinearComponent) -> ComplexMatrix {
    let cm = comp.c();
    cm.adjoint() * cm * c(-0.5, 0.0) - comp.omega() * matkit::I
}

/// State-space quadruple with `Ξ(s) = D + C (s − A)⁻¹ B`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpace {
    pub a: ComplexMatrix,
    pub b: ComplexMatrix,
    pub c: ComplexMatrix,
    pub d: ComplexMatrix,
}

impl StateSpace {
    pub fn eval(&self, s: Complex64) -> Result<ComplexMatrix> {
        let m = self.a.nrows();
        let resolvent = identity(m) * s - &self.a;
        let x = matkit::solve(&resolvent, &self.b)
            .map_err(|_| Error::SingularAtS { re: s.re, im: s.im })?;
        Ok(&self.d + &self.c * x)
    }
}

/// `[A | −C†S ; C | S]`.
pub fn realize(comp: &LinearComponent) -> StateSpace {
    StateSpace {
        a: drift(comp),
        b: -(comp.c().adjoint() * comp.s()),
        c: comp.c().clone(),
        d: comp.s().clone(),
    }
}

/// Direct sum of two independent components; ports and modes of `a` come first.
///
/// If the label sets collide, every label is prefixed with its component name.
pub fn concatenate(a: &LinearComponent, b: &LinearComponent) -> LinearComponent {
    let s = block_diag(a.s(), b.s());
    let cm = block_diag(a.c(), b.c());
    let omega = block_diag(a.omega(), b.omega());

    let (pa, pb) = disjoint_labels(a, b, a.port_labels(), b.port_labels());
    let (ma, mb) = disjoint_labels(a, b, a.mode_labels(), b.mode_labels());

    LinearComponent {
        name: format!("{}+{}", a.name(), b.name()),
        s,
        c: cm,
        omega,
        port_labels: pa.into_iter().chain(pb).collect(),
        mode_labels: ma.into_iter().chain(mb).collect(),
    }
}

fn disjoint_labels(
    a: &LinearComponent,
    b: &LinearComponent,
    la: &[String],
    lb: &[String],
) -> (Vec<String>, Vec<String>) {
    let seen: HashSet<&String> = la.iter().collect();
    if lb.iter().all(|l| !seen.contains(l)) {
        return (la.to_vec(), lb.to_vec());
    }
    let (na, nb) = if a.name() == b.name() {
        (format!("{}#0", a.name()), format!("{}#1", b.name()))
    } else {
        (a.name().to_string(), b.name().to_string())
    };
    (
        la.iter().map(|l| format!("{na}.{l}")).collect(),
        lb.iter().map(|l| format!("{nb}.{l}")).collect(),
    )
}
