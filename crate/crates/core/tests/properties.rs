mod common;

use common::*;
use linqnet::matkit::{
    adjoint, c, eig_hermitian, identity, im_part, is_unitary, max_norm, solve, unitarity_residual, ComplexMatrix,
};
use linqnet::netfile::{build_partitioned, parse, serialize, Connection, Instance, NetDocument, PortRef};
use linqnet::network::{
    beamsplitter_loop, feedback_reduce, mobius, redheffer_star, series_product, BeamSplitter,
    PartitionedComponent, StarWiring,
};
use linqnet::slh::{concatenate, drift, make_cavity, realize, validate, CavityParams, LinearComponent};
use linqnet::stratcal::{
    ito_table_residuals, ito_to_strat, scattering_from_generator, strat_to_ito, StratonovichModel,
};
use linqnet::transfer::{commuting_form, eval_transfer, transfer_at, SIGMA_MIN};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng;

fn cases(n: u32) -> ProptestConfig {
    ProptestConfig::with_cases(n)
}

proptest! {
    #![proptest_config(cases(64))]

    #[test]
    fn adjoint_is_an_involution(seed in any::<u64>(), r in 0usize..5, k in 0usize..5) {
        let m = gaussian_matrix(&mut rng(seed), r, k);
        prop_assert_eq!(adjoint(&adjoint(&m)), m);
    }

    #[test]
    fn solve_inverts(seed in any::<u64>(), n in 1usize..7) {
        let mut g = rng(seed);
        // unitary plus a shift keeps the condition number modest
        let m = unitary(&mut g, n) * c(3.0, 0.0) + gaussian_matrix(&mut g, n, n);
        let x = solve(&m, &identity(n)).unwrap();
        prop_assert!(max_norm(&(&m * x - identity(n))) <= 1e-10);
    }

    #[test]
    fn hermitian_spectrum_reconstructs(seed in any::<u64>(), n in 1usize..7, degenerate in any::<bool>()) {
        let mut g = rng(seed);
        let m = if degenerate {
            // repeated eigenvalues exercise the cluster merge
            let u = unitary(&mut g, n);
            let d = DMatrix::from_fn(n, n, |i, j| if i == j { c((i / 2) as f64, 0.0) } else { c(0.0, 0.0) });
            &u * d * u.adjoint()
        } else {
            hermitian(&mut g, n, 2.0)
        };
        let spectrum = eig_hermitian(&m).unwrap();
        prop_assert!(max_norm(&(spectrum.reconstruct() - &m)) <= 1e-10);
        for (j, pj) in spectrum.projectors.iter().enumerate() {
            for (k, pk) in spectrum.projectors.iter().enumerate() {
                let expect = if j == k { pk.clone() } else { ComplexMatrix::zeros(n, n) };
                prop_assert!(max_norm(&(pj * pk - expect)) <= 1e-10);
            }
        }
    }

    #[test]
    fn unitary_products(seed in any::<u64>(), n in 1usize..6) {
        let mut g = rng(seed);
        let (u, v) = (unitary(&mut g, n), unitary(&mut g, n));
        prop_assert!(is_unitary(&u, 1e-12) && is_unitary(&v, 1e-12));
        prop_assert!(is_unitary(&(u * v), 1e-11));
    }

    #[test]
    fn drift_is_dissipative(seed in any::<u64>()) {
        let comp = any_component(&mut rng(seed), 4, 5);
        let a = drift(&comp);
        if a.nrows() > 0 {
            let (_, t) = a.schur().unpack();
            for z in t.diagonal().iter() {
                prop_assert!(z.re <= 1e-10, "eigenvalue {}", z);
            }
        }
    }

    #[test]
    fn concatenation_is_associative(seed in any::<u64>()) {
        let mut g = rng(seed);
        let a = any_component(&mut g, 3, 2);
        let b = any_component(&mut g, 3, 2);
        let cc = any_component(&mut g, 3, 2);
        let left = concatenate(&concatenate(&a, &b), &cc);
        let right = concatenate(&a, &concatenate(&b, &cc));
        prop_assert_eq!(left.s(), right.s());
        prop_assert_eq!(left.c(), right.c());
        prop_assert_eq!(left.omega(), right.omega());
        prop_assert!(validate(&left).is_empty());
    }

    #[test]
    fn state_space_matches_transfer(seed in any::<u64>()) {
        let mut g = rng(seed);
        let comp = any_component(&mut g, 4, 4);
        let s = right_half_plane(&mut g);
        let ss = realize(&comp);
        let diff = ss.eval(s).unwrap() - transfer_at(&comp, s).unwrap();
        prop_assert!(max_norm(&diff) <= 1e-10);
    }

    #[test]
    fn lossless_on_the_axis(seed in any::<u64>()) {
        let mut g = rng(seed);
        let comp = any_component(&mut g, 4, 4);
        for _ in 0..8 {
            // the limit itself; a fixed positive offset adds an O(σ) term
            // that grows near weakly damped poles
            let w: f64 = g.gen_range(-10.0..10.0);
            let Ok(x) = transfer_at(&comp, c(0.0, w)) else { continue };
            prop_assert!(unitarity_residual(&x).unwrap() <= 1e-8);
            prop_assert!(max_norm(&(x.adjoint() * &x - identity(x.nrows()))) <= 1e-8);
        }
    }

    #[test]
    fn transfer_factorises_through_s(seed in any::<u64>()) {
        let mut g = rng(seed);
        let comp = any_component(&mut g, 4, 4);
        let s = right_half_plane(&mut g);
        let m = comp.n_modes();
        let resolvent = identity(m) * s - drift(&comp);
        let inner = comp.c() * solve(&resolvent, &comp.c().adjoint()).unwrap();
        let direct = (identity(comp.n_ports()) - inner) * comp.s();
        prop_assert!(max_norm(&(direct - transfer_at(&comp, s).unwrap())) <= 1e-10);
    }

    #[test]
    fn poles_in_left_half_plane(seed in any::<u64>()) {
        let mut g = rng(seed);
        let comp = any_component(&mut g, 3, 4);
        // the resolvent only fails where the drift has an eigenvalue
        let s = c(g.gen_range(1e-6..5.0), g.gen_range(-10.0..10.0));
        prop_assert!(eval_transfer(&comp, s).is_ok());
    }

    #[test]
    fn commuting_form_reconstructs(seed in any::<u64>(), n in 1usize..4, extra in 0usize..2) {
        let mut g = rng(seed);
        let m = n;
        let n = n + extra;
        // C†C and Ω share the eigenbasis W
        let w = unitary(&mut g, m);
        let v = unitary(&mut g, n);
        let gammas: Vec<f64> = (0..m).map(|_| g.gen_range(0.2..4.0)).collect();
        let eps: Vec<f64> = (0..m).map(|_| g.gen_range(-3.0..3.0)).collect();
        let diag_c = DMatrix::from_fn(n, m, |i, j| if i == j { c(gammas[j].sqrt(), 0.0) } else { c(0.0, 0.0) });
        let cm = &v * diag_c * w.adjoint();
        let omega = &w * DMatrix::from_fn(m, m, |i, j| if i == j { c(eps[i], 0.0) } else { c(0.0, 0.0) }) * w.adjoint();
        let comp = LinearComponent::new(unitary(&mut g, n), cm, omega).unwrap();
        if n > m {
            // uncoupled ports give γ = 0 with nothing fixing ε
            prop_assert!(matches!(commuting_form(&comp), Err(linqnet::Error::ZeroModeAmbiguity)));
            return Ok(());
        }
        let cf = commuting_form(&comp).unwrap();
        for _ in 0..50 {
            let s = right_half_plane(&mut g);
            prop_assert!(max_norm(&(cf.eval(s) - transfer_at(&comp, s).unwrap())) <= 1e-8);
        }
        let mut checked = 0;
        while checked < 10 {
            let s = c(g.gen_range(-5.0..-0.05), g.gen_range(-10.0..10.0));
            if eps.iter().zip(&gammas).any(|(e, gm)| (s - c(-0.5 * gm, -e)).norm() < 0.1) {
                continue;
            }
            let x = transfer_at(&comp, s).unwrap();
            prop_assert!(max_norm(&(cf.eval(s) - x)) <= 1e-8);
            checked += 1;
        }
    }

    #[test]
    fn reduction_stays_in_model_class(seed in any::<u64>()) {
        let mut g = rng(seed);
        let comp = any_component(&mut g, 5, 3);
        let k = g.gen_range(0..=comp.n_ports());
        let pc = partition(&mut g, comp, k);
        let reduced = feedback_reduce(&pc).unwrap();
        prop_assert!(validate(&reduced).is_empty(), "{}", validate(&reduced));
    }

    #[test]
    fn reduction_commutes_with_transfer(seed in any::<u64>()) {
        let mut g = rng(seed);
        let comp = any_component(&mut g, 5, 3);
        let k = g.gen_range(0..=comp.n_ports());
        let pc = partition(&mut g, comp, k);
        let reduced = feedback_reduce(&pc).unwrap();
        for _ in 0..5 {
            let s = right_half_plane(&mut g);
            let oracle = lft_oracle(&pc, s);
            prop_assert!(max_norm(&(transfer_at(&reduced, s).unwrap() - oracle)) <= 1e-8);
        }
    }

    #[test]
    fn series_is_associative(seed in any::<u64>(), n in 1usize..4) {
        let mut g = rng(seed);
        let (a, b, cc) = (component(&mut g, n, 1), component(&mut g, n, 2), component(&mut g, n, 1));
        let left = series_product(&cc, &series_product(&b, &a).unwrap()).unwrap();
        let right = series_product(&series_product(&cc, &b).unwrap(), &a).unwrap();
        // both put a's modes first, then b's, then c's
        prop_assert!(max_norm(&(left.s() - right.s())) <= 1e-10);
        prop_assert!(max_norm(&(left.c() - right.c())) <= 1e-10);
        prop_assert!(max_norm(&(left.omega() - right.omega())) <= 1e-10);
    }

    #[test]
    fn mobius_keeps_unitaries(seed in any::<u64>(), n1 in 1usize..3, n2 in 1usize..3) {
        let mut g = rng(seed);
        let t = BeamSplitter::new(unitary(&mut g, n1 + n2), n1).unwrap();
        let x = unitary(&mut g, n2);
        if let Ok(y) = mobius(&t, &x) {
            prop_assert!(unitarity_residual(&y).unwrap() <= 1e-9);
        }
    }

    #[test]
    fn star_is_order_independent(seed in any::<u64>()) {
        let mut g = rng(seed);
        let k = g.gen_range(1..3);
        let (oa, ob) = (g.gen_range(0..3), g.gen_range(0..3));
        let (ma, mb) = (g.gen_range(0..3), g.gen_range(0..3));
        let a = component(&mut g, oa + k, ma);
        let b = component(&mut g, k + ob, mb);
        let wiring = StarWiring { a_outer: oa, b_inner: k };
        let star = redheffer_star(&a, &b, wiring).unwrap();
        let (first, second) = sequential_star(&a, &b, wiring);
        for other in [first, second] {
            prop_assert!(max_norm(&(star.s() - other.s())) <= 1e-10);
            prop_assert!(max_norm(&(star.c() - other.c())) <= 1e-10);
            prop_assert!(max_norm(&(star.omega() - other.omega())) <= 1e-10);
        }
    }

    #[test]
    fn loop_identity_for_identity_wiring(seed in any::<u64>()) {
        let mut g = rng(seed);
        let comp = any_component(&mut g, 4, 3);
        let k = g.gen_range(1..=comp.n_ports());
        let internal: Vec<usize> = (0..k).collect();
        let pc = PartitionedComponent::new(comp, internal.clone(), internal, identity(k)).unwrap();
        let [s_ii, ..] = pc.scattering_blocks();
        let [c_i, _] = pc.coupling_blocks();
        let x = solve(&(&pc.eta - &s_ii), &c_i).unwrap();
        let lhs = im_part(&(c_i.adjoint() * &s_ii * &x));
        prop_assert!(max_norm(&(lhs - im_part(&(c_i.adjoint() * &x)))) <= 1e-10);
    }

    #[test]
    fn loop_identity_for_any_permutation(seed in any::<u64>()) {
        // S_ii (η − S_ii)⁻¹ = η (η − S_ii)⁻¹ − I, and Im{C†C} = 0
        let mut g = rng(seed);
        let comp = any_component(&mut g, 5, 3);
        let k = g.gen_range(1..=comp.n_ports());
        let pc = partition(&mut g, comp, k);
        let [s_ii, ..] = pc.scattering_blocks();
        let [c_i, _] = pc.coupling_blocks();
        let x = solve(&(&pc.eta - &s_ii), &c_i).unwrap();
        let lhs = im_part(&(c_i.adjoint() * &s_ii * &x));
        prop_assert!(max_norm(&(lhs - im_part(&(c_i.adjoint() * &pc.eta * &x)))) <= 1e-10);
    }

    #[test]
    fn cayley_round_trip(seed in any::<u64>(), n in 1usize..5, m in 0usize..4) {
        let mut g = rng(seed);
        let sm = StratonovichModel::new(hermitian(&mut g, n, 2.0), gaussian_matrix(&mut g, n, m), hermitian(&mut g, m, 1.0)).unwrap();
        let comp = strat_to_ito(&sm).unwrap();
        prop_assert!(unitarity_residual(comp.s()).unwrap() <= 1e-10);
        prop_assert!(max_norm(&(comp.s() - scattering_from_generator(&sm.e).unwrap())) <= 1e-9);
        prop_assert!(ito_table_residuals(&sm, &comp).unwrap().max() <= 1e-10);
        let back = ito_to_strat(&comp).unwrap();
        prop_assert!(max_norm(&(&back.e - &sm.e)) <= 1e-9);
        prop_assert!(max_norm(&(&back.f - &sm.f)) <= 1e-9);
        prop_assert!(max_norm(&(&back.k - &sm.k)) <= 1e-9);
    }

    #[test]
    fn ito_round_trip(seed in any::<u64>(), n in 1usize..5, m in 0usize..4) {
        let mut g = rng(seed);
        let comp = component(&mut g, n, m);
        let Ok(sm) = ito_to_strat(&comp) else { return Ok(()) };
        prop_assert!(ito_table_residuals(&sm, &comp).unwrap().max() <= 1e-10);
        let back = strat_to_ito(&sm).unwrap();
        prop_assert!(back.approx_eq(&comp, 1e-9));
    }
}

proptest! {
    #![proptest_config(cases(48))]

    #[test]
    fn qnet_round_trip_is_exact(seed in any::<u64>()) {
        let doc = random_doc(&mut rng(seed));
        let text = serialize(&doc);
        let back = parse(&text).unwrap();
        prop_assert_eq!(&back, &doc);
        prop_assert_eq!(serialize(&back), text);
    }

    #[test]
    fn built_partitions_are_consistent(seed in any::<u64>()) {
        let doc = random_doc(&mut rng(seed));
        let pc = build_partitioned(&doc).unwrap();
        let total = pc.comp.n_ports();
        prop_assert_eq!(pc.internal_in.len() + pc.external_in.len(), total);
        prop_assert_eq!(pc.internal_out.len() + pc.external_out.len(), total);
        let k = pc.eta.nrows();
        for r in 0..k {
            let ones = (0..k).filter(|&c| pc.eta[(r, c)] == num_complex::Complex64::new(1.0, 0.0)).count();
            prop_assert_eq!(ones, 1);
        }
    }

    #[test]
    fn error_locations_point_at_the_token(seed in any::<u64>()) {
        let mut g = rng(seed);
        let doc = random_doc(&mut g);
        let text = serialize(&doc);
        // corrupt one token and check the reported position holds the snippet
        let tokens: Vec<(usize, &str)> = text
            .match_indices([';', '[', '='])
            .collect();
        let (at, _) = tokens[g.gen_range(0..tokens.len())];
        let mut broken = text.clone();
        broken.replace_range(at..at + 1, "@");
        let err = parse(&broken).unwrap_err();
        let line = broken.lines().nth(err.line - 1).unwrap();
        let rest: String = line.chars().skip(err.column - 1).collect();
        prop_assert!(rest.starts_with(&err.snippet), "{:?} at {}:{} in {:?}", err.snippet, err.line, err.column, line);
    }
}

fn random_doc(g: &mut TestRng) -> NetDocument {
    let mut doc = NetDocument::default();
    let n_comp = g.gen_range(1..4);
    for k in 0..n_comp {
        let mut comp = any_component(g, 3, 2).with_name(format!("comp{k}"));
        if g.gen_bool(0.3) {
            // exercise signed zeros and awkward magnitudes
            let s = comp.s().map(|z| if z.re.abs() < 0.2 { c(-0.0, z.im * 1e-300) } else { z });
            comp = LinearComponent::new(s, comp.c().clone(), comp.omega().clone()).unwrap().with_name(format!("comp{k}"));
        }
        doc.components.push(comp);
    }
    if g.gen_bool(0.2) {
        return doc;
    }
    let n_inst = g.gen_range(1..5);
    let mut open_out: Vec<PortRef> = Vec::new();
    let mut open_in: Vec<PortRef> = Vec::new();
    for i in 0..n_inst {
        let which = g.gen_range(0..n_comp);
        let name = format!("u{i}");
        for p in 0..doc.components[which].n_ports() {
            open_out.push(PortRef::new(name.clone(), p));
            open_in.push(PortRef::new(name.clone(), p));
        }
        doc.instances.push(Instance { name, component: format!("comp{which}") });
    }
    use rand::seq::SliceRandom;
    open_out.shuffle(g);
    open_in.shuffle(g);
    let n_edges = g.gen_range(0..=open_out.len() / 2);
    for _ in 0..n_edges {
        let (from, to) = (open_out.pop().unwrap(), open_in.pop().unwrap());
        doc.connections.push(Connection { from, to });
    }
    for k in 0..g.gen_range(0..=open_in.len().min(2)) {
        let input = open_in.pop().unwrap();
        doc.externals.push(linqnet::netfile::ExternalPort { input, name: format!("ext{k}") });
    }
    doc
}

#[test]
fn loop_identity_without_eta_needs_identity_wiring() {
    // a swap of two internal channels: dropping η changes the result
    let mut g = rng(11);
    let comp = component(&mut g, 3, 2);
    let pc = PartitionedComponent::from_edges(comp, &[(0, 1), (1, 0)]).unwrap();
    let [s_ii, ..] = pc.scattering_blocks();
    let [c_i, _] = pc.coupling_blocks();
    let x = solve(&(&pc.eta - &s_ii), &c_i).unwrap();
    let lhs = im_part(&(c_i.adjoint() * &s_ii * &x));
    assert!(max_norm(&(&lhs - im_part(&(c_i.adjoint() * &pc.eta * &x)))) < 1e-12);
    assert!(max_norm(&(lhs - im_part(&(c_i.adjoint() * &x)))) > 1e-3);
}

#[test]
fn offset_from_the_axis_costs_first_order() {
    // ΞΞ† − I = −2σ C(s − A)⁻¹(s − A)⁻†C†: linear in σ near the axis
    let comp = make_cavity(CavityParams { gamma: 0.01, omega: 0.0, phi: 0.0 }).unwrap();
    let at = |sigma: f64| unitarity_residual(&transfer_at(&comp, c(sigma, 0.0)).unwrap()).unwrap();
    let expect = 2.0 * SIGMA_MIN * 0.01 / (0.005f64 * 0.005);
    assert!((at(SIGMA_MIN) - expect).abs() < 1e-3 * expect);
    assert!(at(0.0) < 1e-14);
}

#[test]
fn cavity_block_matrix() {
    // [A | −C†S ; C | S] for γ = 2, ω = 0.5, φ = 0.3
    let comp = make_cavity(CavityParams { gamma: 2.0, omega: 0.5, phi: 0.3 }).unwrap();
    let ss = realize(&comp);
    let phase = c(0.0, 0.3).exp();
    let root = 2f64.sqrt();
    assert!((ss.a[(0, 0)] - c(-1.0, -0.5)).norm() < 1e-12);
    assert!((ss.b[(0, 0)] + phase * root).norm() < 1e-12);
    assert!((ss.c[(0, 0)] - c(root, 0.0)).norm() < 1e-12);
    assert!((ss.d[(0, 0)] - phase).norm() < 1e-12);
}

#[test]
fn beamsplitter_loop_is_valid() {
    let mut g = rng(7);
    for _ in 0..20 {
        let (n1, n2) = (g.gen_range(1..3), g.gen_range(1..3));
        let t = BeamSplitter::new(unitary(&mut g, n1 + n2), n1).unwrap();
        let m = g.gen_range(0..3);
        let plant = component(&mut g, n2, m);
        let closed = beamsplitter_loop(&t, &plant).unwrap();
        assert!(validate(&closed).is_empty());
    }
}
