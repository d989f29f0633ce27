//! Seeded random generators shared by the integration tests.
#![allow(dead_code)]

use linqnet::matkit::{c, identity, select, solve, ComplexMatrix};
use linqnet::network::{feedback_reduce, star_network, PartitionedComponent, StarWiring};
use linqnet::slh::LinearComponent;
use linqnet::transfer::transfer_at;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Standard complex gaussian via Box–Muller.
pub fn gaussian(rng: &mut TestRng) -> Complex64 {
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let r = (-u1.ln()).sqrt();
    c(r * u2.cos(), r * u2.sin())
}

pub fn gaussian_matrix(rng: &mut TestRng, rows: usize, cols: usize) -> ComplexMatrix {
    DMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// Haar-distributed unitary: QR of a gaussian matrix with the phases of
/// diag(R) divided out.
pub fn unitary(rng: &mut TestRng, n: usize) -> ComplexMatrix {
    if n == 0 {
        return identity(0);
    }
    let (q, r) = gaussian_matrix(rng, n, n).qr().unpack();
    let phases = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            let d = r[(i, i)];
            if d.norm() > 0.0 {
                d / d.norm()
            } else {
                c(1.0, 0.0)
            }
        } else {
            c(0.0, 0.0)
        }
    });
    q * phases
}

pub fn hermitian(rng: &mut TestRng, n: usize, scale: f64) -> ComplexMatrix {
    let g = gaussian_matrix(rng, n, n);
    (&g + g.adjoint()) * c(scale / 2.0, 0.0)
}

pub fn component(rng: &mut TestRng, n: usize, m: usize) -> LinearComponent {
    let s = unitary(rng, n);
    let cm = gaussian_matrix(rng, n, m);
    let omega = hermitian(rng, m, 1.0);
    LinearComponent::new(s, cm, omega).unwrap()
}

/// A component with `1..=max_n` ports and `0..=max_m` modes.
pub fn any_component(rng: &mut TestRng, max_n: usize, max_m: usize) -> LinearComponent {
    let n = rng.gen_range(1..=max_n);
    let m = rng.gen_range(0..=max_m);
    component(rng, n, m)
}

/// Wires `k` random outputs to `k` random inputs through a random permutation.
pub fn partition(rng: &mut TestRng, comp: LinearComponent, k: usize) -> PartitionedComponent {
    let n = comp.n_ports();
    let mut outs: Vec<usize> = (0..n).collect();
    let mut ins: Vec<usize> = (0..n).collect();
    outs.shuffle(rng);
    ins.shuffle(rng);
    let edges: Vec<(usize, usize)> = outs[..k].iter().copied().zip(ins[..k].iter().copied()).collect();
    PartitionedComponent::from_edges(comp, &edges).unwrap()
}

/// A point in the open right half plane away from the imaginary axis.
pub fn right_half_plane(rng: &mut TestRng) -> Complex64 {
    c(rng.gen_range(0.05..5.0), rng.gen_range(-10.0..10.0))
}

pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Ξ_ee + Ξ_ei (η − Ξ_ii)⁻¹ Ξ_ie from the unreduced transfer function.
pub fn lft_oracle(pc: &PartitionedComponent, s: Complex64) -> ComplexMatrix {
    let x = transfer_at(&pc.comp, s).unwrap();
    let pick = |rows: &[usize], cols: &[usize]| select(&x, rows, cols);
    let x_ii = pick(&pc.internal_out, &pc.internal_in);
    let x_ie = pick(&pc.internal_out, &pc.external_in);
    let x_ei = pick(&pc.external_out, &pc.internal_in);
    let x_ee = pick(&pc.external_out, &pc.external_in);
    x_ee + x_ei * solve(&(&pc.eta - x_ii), &x_ie).unwrap()
}

/// Star product by eliminating the crossed channels one at a time.
pub fn sequential_star(a: &LinearComponent, b: &LinearComponent, w: StarWiring) -> (LinearComponent, LinearComponent) {
    let net = star_network(a, b, w).unwrap();
    let k = a.n_ports() - w.a_outer;
    let a_to_b: Vec<(usize, usize)> = (0..k).map(|j| (w.a_outer + j, a.n_ports() + j)).collect();
    let b_to_a: Vec<(usize, usize)> = (0..k).map(|j| (a.n_ports() + j, w.a_outer + j)).collect();
    let run = |first: &[(usize, usize)], second: &[(usize, usize)]| {
        let step1 = PartitionedComponent::from_edges(net.comp.clone(), first).unwrap();
        let mid = feedback_reduce(&step1).unwrap();
        // reduced ports keep the relative order of the open ones
        let pos = |ports: &[usize], p: usize| ports.iter().position(|&q| q == p).unwrap();
        let edges: Vec<(usize, usize)> = second
            .iter()
            .map(|&(o, i)| (pos(&step1.external_out, o), pos(&step1.external_in, i)))
            .collect();
        let step2 = PartitionedComponent::from_edges(mid, &edges).unwrap();
        let out = feedback_reduce(&step2).unwrap();
        // back to the port order of the joint reduction
        let perm_in: Vec<usize> = net
            .external_in
            .iter()
            .map(|&p| step2.external_in.iter().position(|&q| step1.external_in[q] == p).unwrap())
            .collect();
        let perm_out: Vec<usize> = net
            .external_out
            .iter()
            .map(|&p| step2.external_out.iter().position(|&q| step1.external_out[q] == p).unwrap())
            .collect();
        let all: Vec<usize> = (0..out.n_modes()).collect();
        let s = select(out.s(), &perm_out, &perm_in);
        let cm = select(out.c(), &perm_out, &all);
        LinearComponent::new(s, cm, out.omega().clone()).unwrap()
    };
    (run(&a_to_b, &b_to_a), run(&b_to_a, &a_to_b))
}
