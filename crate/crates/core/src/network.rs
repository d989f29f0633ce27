//! Composition algebra for linear components under instantaneous feedback.
//!
//! The central operation is [`feedback_reduce`]: given a component whose
//! internal output ports are wired back into internal input ports through a
//! permutation `η`, eliminate the internal fields and return the reduced
//! `(S, C, Ω)`. The series product, beam-splitter loops and the Redheffer star
//! product are all special wirings of it; they are provided with their own
//! closed forms so the two routes can be checked against each other.

use std::collections::HashSet;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matkit::{
    self, block_diag, identity, im_part, is_unitary, max_norm, select, spectral_radius, zeros,
    ComplexMatrix, STRUCTURAL_TOL,
};
use crate::slh::{concatenate, LinearComponent};
use crate::transfer::transfer_at;

/// A component with a subset of its ports wired into feedback loops.
///
/// `eta` is indexed by `(internal_out[r], internal_in[c])` and is 1 where that
/// output feeds that input.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionedComponent {
    pub comp: LinearComponent,
    pub internal_out: Vec<usize>,
    pub internal_in: Vec<usize>,
    pub external_out: Vec<usize>,
    pub external_in: Vec<usize>,
    pub eta: ComplexMatrix,
    /// Optional names for the reduced ports, in external order.
    pub external_labels: Option<Vec<String>>,
}

impl PartitionedComponent {
    /// External ports are the complements of the internal ones, in ascending order.
    pub fn new(
        comp: LinearComponent,
        internal_out: Vec<usize>,
        internal_in: Vec<usize>,
        eta: ComplexMatrix,
    ) -> Result<Self> {
        let n = comp.n_ports();
        let external_out = complement(n, &internal_out);
        let external_in = complement(n, &internal_in);
        Self::with_external_order(comp, internal_out, internal_in, eta, external_out, external_in)
    }

    pub fn with_external_order(
        comp: LinearComponent,
        internal_out: Vec<usize>,
        internal_in: Vec<usize>,
        eta: ComplexMatrix,
        external_out: Vec<usize>,
        external_in: Vec<usize>,
    ) -> Result<Self> {
        let pc = Self {
            comp,
            internal_out,
            internal_in,
            external_out,
            external_in,
            eta,
            external_labels: None,
        };
        pc.check()?;
        Ok(pc)
    }

    /// Builds the partition from `(output port, input port)` channels. Internal
    /// ports are listed in ascending order, so `η` is a general permutation.
    pub fn from_edges(comp: LinearComponent, edges: &[(usize, usize)]) -> Result<Self> {
        let mut outs: Vec<usize> = edges.iter().map(|e| e.0).collect();
        let mut ins: Vec<usize> = edges.iter().map(|e| e.1).collect();
        outs.sort_unstable();
        ins.sort_unstable();
        let k = edges.len();
        let mut eta = zeros(k, k);
        for &(o, i) in edges {
            let (Ok(r), Ok(c)) = (outs.binary_search(&o), ins.binary_search(&i)) else {
                unreachable!()
            };
            eta[(r, c)] += Complex64::new(1.0, 0.0);
        }
        Self::new(comp, outs, ins, eta)
    }

    pub fn with_external_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.external_in.len() {
            return Err(Error::BadPartition(format!(
                "{} labels for {} external ports",
                labels.len(),
                self.external_in.len()
            )));
        }
        self.external_labels = Some(labels);
        Ok(self)
    }

    fn check(&self) -> Result<()> {
        let n = self.comp.n_ports();
        let bad = |msg: String| Err(Error::BadPartition(msg));
        if self.internal_in.len() != self.internal_out.len() {
            return bad(format!(
                "{} internal inputs but {} internal outputs",
                self.internal_in.len(),
                self.internal_out.len()
            ));
        }
        for (ports, other, what) in [
            (&self.internal_out, &self.external_out, "output"),
            (&self.internal_in, &self.external_in, "input"),
        ] {
            let mut seen = HashSet::new();
            for &p in ports.iter().chain(other.iter()) {
                if p >= n {
                    return bad(format!("{what} port {p} out of range for {n} ports"));
                }
                if !seen.insert(p) {
                    return bad(format!("{what} port {p} listed twice"));
                }
            }
            if seen.len() != n {
                return bad(format!("{what} ports do not cover all {n} ports"));
            }
        }
        let k = self.internal_in.len();
        if self.eta.shape() != (k, k) {
            return bad(format!("eta is {}x{}, expected {k}x{k}", self.eta.nrows(), self.eta.ncols()));
        }
        if !is_permutation(&self.eta) {
            return bad("eta is not a permutation matrix".into());
        }
        Ok(())
    }

    /// `(S_ii, S_ie, S_ei, S_ee)`.
    pub fn scattering_blocks(&self) -> [ComplexMatrix; 4] {
        let s = self.comp.s();
        [
            select(s, &self.internal_out, &self.internal_in),
            select(s, &self.internal_out, &self.external_in),
            select(s, &self.external_out, &self.internal_in),
            select(s, &self.external_out, &self.external_in),
        ]
    }

    /// `(C_i, C_e)`: coupling rows of the internal and external outputs.
    pub fn coupling_blocks(&self) -> [ComplexMatrix; 2] {
        let cm = self.comp.c();
        let all: Vec<usize> = (0..cm.ncols()).collect();
        [select(cm, &self.internal_out, &all), select(cm, &self.external_out, &all)]
    }

    fn reduced_labels(&self) -> Vec<String> {
        if let Some(labels) = &self.external_labels {
            return labels.clone();
        }
        let labels = self.comp.port_labels();
        self.external_in
            .iter()
            .zip(&self.external_out)
            .map(|(&i, &o)| {
                if i == o {
                    labels[i].clone()
                } else {
                    format!("{}->{}", labels[i], labels[o])
                }
            })
            .collect()
    }
}

fn complement(n: usize, ports: &[usize]) -> Vec<usize> {
    let used: HashSet<usize> = ports.iter().copied().collect();
    (0..n).filter(|p| !used.contains(p)).collect()
}

fn is_permutation(eta: &ComplexMatrix) -> bool {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    if !eta.iter().all(|&z| z == one || z == zero) {
        return false;
    }
    let unit = |count: usize| count == 1;
    eta.row_iter().all(|r| unit(r.iter().filter(|&&z| z == one).count()))
        && eta.column_iter().all(|c| unit(c.iter().filter(|&&z| z == one).count()))
}

/// Eliminates the internal channels of `pc`:
///
/// ```text
/// S_red = S_ee + S_ei (η − S_ii)⁻¹ S_ie
/// C_red = C_e + S_ei (η − S_ii)⁻¹ C_i
/// Ω_red = Ω + Im{C_i† S_ii (η − S_ii)⁻¹ C_i} + Im{C_e† S_ei (η − S_ii)⁻¹ C_i}
/// ```
///
/// with `Im{M} = (M − M†)/2i`.
pub fn feedback_reduce(pc: &PartitionedComponent) -> Result<LinearComponent> {
    pc.check()?;
    let [s_ii, s_ie, s_ei, s_ee] = pc.scattering_blocks();
    let [c_i, c_e] = pc.coupling_blocks();

    let loop_matrix = &pc.eta - &s_ii;
    let loop_solve = |rhs: &ComplexMatrix| matkit::solve(&loop_matrix, rhs).map_err(|_| Error::AlgebraicLoop);
    let x_s = loop_solve(&s_ie)?;
    let x_c = loop_solve(&c_i)?;

    let s_red = s_ee + &s_ei * x_s;
    let c_red = c_e.clone() + &s_ei * &x_c;
    let omega_red = pc.comp.omega()
        + im_part(&(c_i.adjoint() * &s_ii * &x_c))
        + im_part(&(c_e.adjoint() * &s_ei * &x_c));

    LinearComponent::new(s_red, c_red, omega_red)?
        .with_name(pc.comp.name())
        .with_port_labels(pc.reduced_labels())?
        .with_mode_labels(pc.comp.mode_labels().to_vec())
}

/// Feeds every output of `g1` into the matching input of `g2`.
///
/// Modes of `g1` come first. `S = S₂S₁`, `C = [S₂C₁ | C₂]`,
/// `Ω = diag(Ω₁, Ω₂) + Im{L₂†S₂L₁}`.
pub fn series_product(g2: &LinearComponent, g1: &LinearComponent) -> Result<LinearComponent> {
    let n = g1.n_ports();
    if g2.n_ports() != n {
        return Err(Error::DimensionMismatch(format!(
            "series product of a {}-port into a {}-port",
            n,
            g2.n_ports()
        )));
    }
    let (m1, m2) = (g1.n_modes(), g2.n_modes());
    let s = g2.s() * g1.s();

    let mut c = zeros(n, m1 + m2);
    c.view_mut((0, 0), (n, m1)).copy_from(&(g2.s() * g1.c()));
    c.view_mut((0, m1), (n, m2)).copy_from(g2.c());

    // L₂†S₂L₁ on the joint mode space has a single nonzero block, C₂†S₂C₁.
    let mut cross = zeros(m1 + m2, m1 + m2);
    cross.view_mut((m1, 0), (m2, m1)).copy_from(&(g2.c().adjoint() * g2.s() * g1.c()));
    let omega = block_diag(g1.omega(), g2.omega()) + im_part(&cross);

    let joint = concatenate(g1, g2);
    let labels = g1
        .port_labels()
        .iter()
        .zip(g2.port_labels())
        .map(|(a, b)| if a == b { a.clone() } else { format!("{a}->{b}") })
        .collect();
    LinearComponent::new(s, c, omega)?
        .with_name(format!("{}>{}", g1.name(), g2.name()))
        .with_port_labels(labels)?
        .with_mode_labels(joint.mode_labels().to_vec())
}

/// The series connection written as a feedback network: `g1` then `g2`
/// concatenated, every output of `g1` wired to the same input of `g2`, `η = I`.
pub fn series_network(g2: &LinearComponent, g1: &LinearComponent) -> Result<PartitionedComponent> {
    let n = g1.n_ports();
    if g2.n_ports() != n {
        return Err(Error::DimensionMismatch(format!(
            "series product of a {}-port into a {}-port",
            n,
            g2.n_ports()
        )));
    }
    let joint = concatenate(g1, g2);
    let edges: Vec<(usize, usize)> = (0..n).map(|k| (k, n + k)).collect();
    PartitionedComponent::from_edges(joint, &edges)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CascadeReport {
    /// `(s, ‖Ξ_series(s) − Ξ₂(s)Ξ₁(s)‖)` per point.
    pub residuals: Vec<(Complex64, f64)>,
    pub tol: f64,
}

impl CascadeReport {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().map(|r| r.1).fold(0.0, f64::max)
    }
    pub fn passed(&self) -> bool {
        self.residuals.iter().all(|r| r.1 <= self.tol)
    }
}

pub const CASCADE_TOL: f64 = 1e-10;

/// Compares the series product's transfer function with `Ξ₂(s)Ξ₁(s)`.
pub fn cascade_transfer_check(
    g2: &LinearComponent,
    g1: &LinearComponent,
    s_points: &[Complex64],
) -> Result<CascadeReport> {
    let series = series_product(g2, g1)?;
    let residuals = s_points
        .iter()
        .map(|&s| {
            let lhs = transfer_at(&series, s)?;
            let rhs = transfer_at(g2, s)? * transfer_at(g1, s)?;
            Ok((s, max_norm(&(lhs - rhs))))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CascadeReport { residuals, tol: CASCADE_TOL })
}

/// A static unitary `T = [[T11, T12], [T21, T22]]` with blocks of size `n1`, `n2`.
///
/// Block 1 carries the external fields, block 2 the in-loop fields.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamSplitter {
    t: ComplexMatrix,
    n1: usize,
    n2: usize,
}

impl BeamSplitter {
    pub fn new(t: ComplexMatrix, n1: usize) -> Result<Self> {
        if !t.is_square() || n1 > t.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "beam splitter matrix {}x{} with outer block {n1}",
                t.nrows(),
                t.ncols()
            )));
        }
        if !is_unitary(&t, STRUCTURAL_TOL) {
            return Err(Error::InvalidComponent("beam splitter matrix is not unitary".into()));
        }
        let n2 = t.nrows() - n1;
        Ok(Self { t, n1, n2 })
    }

    /// Scalar splitter `[[α, β], [μ, ν]]`.
    pub fn scalar(alpha: Complex64, beta: Complex64, mu: Complex64, nu: Complex64) -> Result<Self> {
        Self::new(matkit::from_rows(&[&[alpha, beta], &[mu, nu]]), 1)
    }

    /// The real orthogonal splitter `[[α, β], [β, −α]]` with `β = √(1 − α²)`.
    pub fn real_symmetric(alpha: f64) -> Result<Self> {
        let beta = (1.0 - alpha * alpha).sqrt();
        Self::scalar(alpha.into(), beta.into(), beta.into(), (-alpha).into())
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.t
    }
    pub fn dims(&self) -> (usize, usize) {
        (self.n1, self.n2)
    }
    pub fn t11(&self) -> ComplexMatrix {
        self.t.view((0, 0), (self.n1, self.n1)).into_owned()
    }
    pub fn t12(&self) -> ComplexMatrix {
        self.t.view((0, self.n1), (self.n1, self.n2)).into_owned()
    }
    pub fn t21(&self) -> ComplexMatrix {
        self.t.view((self.n1, 0), (self.n2, self.n1)).into_owned()
    }
    pub fn t22(&self) -> ComplexMatrix {
        self.t.view((self.n1, self.n1), (self.n2, self.n2)).into_owned()
    }

    pub fn as_component(&self) -> LinearComponent {
        let labels = (0..self.n1)
            .map(|k| format!("ext{k}"))
            .chain((0..self.n2).map(|k| format!("loop{k}")))
            .collect();
        LinearComponent::scattering(self.t.clone())
            .expect("validated on construction")
            .with_name("bs")
            .with_port_labels(labels)
            .expect("label count matches")
    }
}

/// Non-commutative Möbius transform `T11 + T12 (I − X T22)⁻¹ X T21`.
pub fn mobius(t: &BeamSplitter, x: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n2 = t.n2;
    if x.shape() != (n2, n2) {
        return Err(Error::DimensionMismatch(format!(
            "Moebius argument is {}x{}, expected {n2}x{n2}",
            x.nrows(),
            x.ncols()
        )));
    }
    let lhs = identity(n2) - x * t.t22();
    let y = matkit::solve(&lhs, &(x * t.t21())).map_err(|_| Error::OutsideDomain)?;
    Ok(t.t11() + t.t12() * y)
}

/// Closes the in-loop block of `t` around `plant`:
///
/// ```text
/// S = T11 + T12 (1 − S₀T22)⁻¹ S₀ T21
/// C = T12 (1 − S₀T22)⁻¹ C₀
/// Ω = Ω₀ + Im{C₀† (1 − S₀T22)⁻¹ C₀}
/// ```
pub fn beamsplitter_loop(t: &BeamSplitter, plant: &LinearComponent) -> Result<LinearComponent> {
    if plant.n_ports() != t.n2 {
        return Err(Error::DimensionMismatch(format!(
            "plant has {} ports, beam splitter loop block has {}",
            plant.n_ports(),
            t.n2
        )));
    }
    let s0 = plant.s();
    let c0 = plant.c();
    let lhs = identity(t.n2) - s0 * t.t22();
    let solve = |rhs: &ComplexMatrix| matkit::solve(&lhs, rhs).map_err(|_| Error::AlgebraicLoop);

    let s = t.t11() + t.t12() * solve(&(s0 * t.t21()))?;
    let x_c = solve(c0)?;
    let c = t.t12() * &x_c;
    let omega = plant.omega() + im_part(&(c0.adjoint() * x_c));

    let labels = (0..t.n1).map(|k| format!("ext{k}")).collect();
    LinearComponent::new(s, c, omega)?
        .with_name(format!("{}:bs", plant.name()))
        .with_port_labels(labels)?
        .with_mode_labels(plant.mode_labels().to_vec())
}

/// The beam-splitter loop as a two-edge feedback network (splitter ports
/// first, then the plant): splitter loop outputs feed the plant, plant outputs
/// feed the splitter loop inputs.
pub fn beamsplitter_network(t: &BeamSplitter, plant: &LinearComponent) -> Result<PartitionedComponent> {
    if plant.n_ports() != t.n2 {
        return Err(Error::DimensionMismatch(format!(
            "plant has {} ports, beam splitter loop block has {}",
            plant.n_ports(),
            t.n2
        )));
    }
    let (n1, n2) = (t.n1, t.n2);
    let joint = concatenate(&t.as_component(), plant);
    let edges: Vec<(usize, usize)> = (0..n2)
        .flat_map(|k| [(n1 + k, n1 + n2 + k), (n1 + n2 + k, n1 + k)])
        .collect();
    PartitionedComponent::from_edges(joint, &edges)
}

/// Port roles for the star product: the first `a_outer` ports of `a` are its
/// external block, the rest face `b`; the first `b_inner` ports of `b` face `a`,
/// the rest are external.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StarWiring {
    pub a_outer: usize,
    pub b_inner: usize,
}

/// Builds the crossed two-channel network for the star product.
pub fn star_network(a: &LinearComponent, b: &LinearComponent, wiring: StarWiring) -> Result<PartitionedComponent> {
    let StarWiring { a_outer, b_inner } = wiring;
    if a_outer > a.n_ports() || b_inner > b.n_ports() {
        return Err(Error::DimensionMismatch("star wiring exceeds port count".into()));
    }
    let a_inner = a.n_ports() - a_outer;
    if a_inner != b_inner {
        return Err(Error::DimensionMismatch(format!(
            "star product joins {a_inner} ports of a with {b_inner} ports of b"
        )));
    }
    let joint = concatenate(a, b);
    let offset = a.n_ports();
    let edges: Vec<(usize, usize)> = (0..a_inner)
        .flat_map(|k| [(a_outer + k, offset + k), (offset + k, a_outer + k)])
        .collect();
    PartitionedComponent::from_edges(joint, &edges)
}

/// Redheffer star product of `a` (ports 1, 2) and `b` (ports 3, 4) with channels
/// 2 → 3 and 3 → 2. The result has `a`'s outer ports followed by `b`'s outer ports.
pub fn redheffer_star(a: &LinearComponent, b: &LinearComponent, wiring: StarWiring) -> Result<LinearComponent> {
    feedback_reduce(&star_network(a, b, wiring)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathExpansionReport {
    pub spectral_radius: f64,
    pub converged: bool,
    /// Max-norm distance of the `k`-th partial sum from the closed form,
    /// for `k = 0..=order`, over both `S_red` and `C_red`.
    pub residuals: Vec<f64>,
    /// Ratio of the last two residuals; `None` when undefined.
    pub decay_rate: Option<f64>,
}

impl PathExpansionReport {
    pub fn final_residual(&self) -> f64 {
        self.residuals.last().copied().unwrap_or(0.0)
    }
}

/// Sums the loop paths `S_ee + Σ_k S_ei ξ (S_ii ξ)^k S_ie`, `ξ = η⁻¹ = ηᵀ`, up
/// to the given order and compares with [`feedback_reduce`].
pub fn path_expansion_check(pc: &PartitionedComponent, order: usize) -> Result<PathExpansionReport> {
    let closed = feedback_reduce(pc)?;
    let [s_ii, s_ie, s_ei, s_ee] = pc.scattering_blocks();
    let [c_i, c_e] = pc.coupling_blocks();
    let xi = pc.eta.transpose();
    let step = &s_ii * &xi;
    let rho = spectral_radius(&step);

    let mut s_sum = s_ee;
    let mut c_sum = c_e;
    let mut power = identity(step.nrows());
    let mut residuals = Vec::with_capacity(order + 1);
    for _ in 0..=order {
        let path = &s_ei * &xi * &power;
        s_sum += &path * &s_ie;
        c_sum += &path * &c_i;
        let res = max_norm(&(&s_sum - closed.s())).max(max_norm(&(&c_sum - closed.c())));
        residuals.push(res);
        power = &power * &step;
    }
    let decay_rate = match residuals.as_slice() {
        [.., prev, last] if *prev > 0.0 => Some(last / prev),
        _ => None,
    };
    Ok(PathExpansionReport {
        spectral_radius: rho,
        converged: rho < 1.0,
        residuals,
        decay_rate,
    })
}
