mod common;

use std::sync::Arc;

use common::*;
use petzlab::bloch::{qubit_reverse_jump, BlochState, QubitJump};
use petzlab::lindblad::{Schedule, Superoperator};
use petzlab::linalg::{herm_eig, DensityMatrix};
use petzlab::petz::{
    build_dissipation_only_reverse, build_reverse_generator, correction_hamiltonian, petz_channel, reversal_experiment,
    reverse_hamiltonian_derivative_form, reverse_jumps, ForwardSpec, ReversalKind, SpectralShift,
};

const EPS: f64 = 1e-12;

/// Square root of a 2×2 PSD matrix: `(M + √det 𝟙) / √(Tr M + 2√det)`.
fn sqrt2(m: &Op) -> Op {
    let det = (m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]).re.max(0.0);
    let s = det.sqrt();
    let t = (trace(m).re + 2.0 * s).sqrt();
    (&*m + &Op::identity(2).scale_re(s)).scale_re(1.0 / t)
}

fn inv2(m: &Op) -> Op {
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    Op::from_fn(2, 2, |i, j| match (i, j) {
        (0, 0) => m[(1, 1)] / det,
        (1, 1) => m[(0, 0)] / det,
        _ => -m[(i, j)] / det,
    })
}

fn reference_spec(steps: usize) -> ForwardSpec<f64> {
    let (h, l) = reference_qubit_model();
    ForwardSpec::constant(h, vec![l], DensityMatrix::basis(2, 0).into_operator(), 10.0, steps)
}

#[test]
fn petz_of_identity_and_unitary_channels() {
    let mut rng = rng(21);
    let sigma = random_density(&mut rng, 3, 3);
    let id = Superoperator::identity(3);
    assert!(petz_channel(&id, &sigma, EPS).unwrap().max_abs_diff(&id) < 1e-10);

    let u = random_unitary(&mut rng, 3);
    let n = Superoperator::from_kraus(&[u.clone()]).unwrap();
    let expected = Superoperator::from_kraus(&[u.adjoint()]).unwrap();
    assert!(petz_channel(&n, &sigma, EPS).unwrap().max_abs_diff(&expected) < 1e-10);
}

#[test]
fn petz_identity_holds_on_the_support_of_rank_deficient_references() {
    let mut rng = rng(22);
    for d in 2..=4 {
        let sigma = random_density(&mut rng, d, d - 1);
        let kraus = random_kraus(&mut rng, d, 2);
        let n = Superoperator::from_kraus(&kraus).unwrap();
        let r = petz_channel(&n, &sigma, EPS).unwrap();
        // σ lives on its support already, so Π σ Π = σ
        assert!(frobenius(&r.apply(&kraus_apply(&kraus, &sigma)), &sigma) < 1e-8);
    }
}

#[test]
fn reverse_jumps_against_closed_square_roots() {
    let spec = reference_spec(10_000);
    let (_, l) = reference_qubit_model();
    let traj = spec.run().unwrap();
    let gamma = &traj.states[5_000];
    assert!((traj.time(5_000) - 5.0).abs() < 1e-12);
    let root = sqrt2(gamma);
    let oracle = naive_mul(&naive_mul(&root, &l.adjoint()), &inv2(&root));
    let lb = &reverse_jumps(gamma, &[l.clone()], EPS).unwrap()[0];
    assert!(max_diff(lb, &oracle) < 1e-8);
    let closed = qubit_reverse_jump(&BlochState::from_density(gamma).unwrap(), &QubitJump::from_operator(&l));
    assert!(max_diff(lb, &vec_dot_sigma(&closed.l)) < 1e-8);
}

#[test]
fn reverse_jumps_trivial_cases() {
    let mut rng = rng(23);
    let l = random_matrix(&mut rng, 3, 3);
    let mixed = Op::identity(3).scale_re(1.0 / 3.0);
    let lb = &reverse_jumps(&mixed, &[l.clone(), Op::zeros(3, 3)], EPS).unwrap();
    assert!(max_diff(&lb[0], &l.adjoint()) < 1e-12);
    assert!(lb[1].max_norm() == 0.0);
}

#[test]
fn correction_hamiltonian_vanishes_where_expected() {
    let mut rng = rng(24);
    let gamma = random_density(&mut rng, 3, 3);
    let l = random_matrix(&mut rng, 3, 3);
    assert!(correction_hamiltonian(&gamma, &[], EPS).unwrap().max_norm() == 0.0);
    let mixed = Op::identity(3).scale_re(1.0 / 3.0);
    assert!(correction_hamiltonian(&mixed, &[l.clone()], EPS).unwrap().max_norm() < 1e-15);
    let hc = correction_hamiltonian(&gamma, &[l], EPS).unwrap();
    assert!(hc.hermitian_deviation() < 1e-12);
    assert!(hc.max_norm() > 1e-3);
}

#[test]
fn correction_hamiltonian_alternative_form() {
    // M = Σ L†L + L_B†L_B, H_C = −(i/2) Σ w_{λλ′} ⟨λ|M|λ′⟩ |λ⟩⟨λ′|
    let mut rng = rng(25);
    let gamma = random_density(&mut rng, 3, 3);
    let jumps: Vec<Op> = (0..2).map(|_| random_matrix(&mut rng, 3, 3)).collect();
    let lb = reverse_jumps(&gamma, &jumps, EPS).unwrap();
    let mut m = Op::zeros(3, 3);
    for (f, b) in jumps.iter().zip(&lb) {
        m = &m + &(&naive_mul(&f.adjoint(), f) + &naive_mul(&b.adjoint(), b));
    }
    let es = herm_eig(&gamma).unwrap();
    let v = &es.vectors;
    let me = naive_mul(&naive_mul(&v.adjoint(), &m), v);
    let w = Op::from_fn(3, 3, |i, j| {
        let (a, b) = (es.values[i].sqrt(), es.values[j].sqrt());
        me[(i, j)] * c(0.0, -0.5 * (a - b) / (a + b))
    });
    let oracle = naive_mul(&naive_mul(v, &w), &v.adjoint());
    assert!(max_diff(&correction_hamiltonian(&gamma, &jumps, EPS).unwrap(), &oracle) < 1e-10);
}

#[test]
fn derivative_form_matches_split_form_at_t2() {
    let spec = reference_spec(10_000);
    let (h, l) = reference_qubit_model();
    let traj = spec.run().unwrap();
    let lind = spec.lindbladian().unwrap();
    let k = 2_000;
    let gamma = &traj.states[k];
    let dot = lind.apply_generator(gamma, traj.time(k)).unwrap();
    let hb = reverse_hamiltonian_derivative_form(gamma, &dot, &h, &[l.clone()], EPS).unwrap();
    let hc = correction_hamiltonian(gamma, &[l], EPS).unwrap();
    assert!(max_diff(&(&hb + &h), &hc) < 1e-6);
}

#[test]
fn derivative_form_reduces_to_minus_h_without_dissipation() {
    let mut rng = rng(26);
    let h = random_hermitian(&mut rng, 3);
    let gamma = random_density(&mut rng, 3, 3);
    let dot = (&naive_mul(&h, &gamma) - &naive_mul(&gamma, &h)).scale(c(0.0, -1.0));
    let hb = reverse_hamiltonian_derivative_form(&gamma, &dot, &h, &[], EPS).unwrap();
    assert!(max_diff(&hb, &h.scale_re(-1.0)) < 1e-10);

    let l = random_matrix(&mut rng, 2, 2);
    let h2 = random_hermitian(&mut rng, 2);
    let mixed = Op::identity(2).scale_re(0.5);
    let dot = petzlab::lindblad::Lindbladian::constant(h2.clone(), vec![l.clone()])
        .unwrap()
        .apply_generator(&mixed, 0.0)
        .unwrap();
    let hb = reverse_hamiltonian_derivative_form(&mixed, &dot, &h2, &[l], EPS).unwrap();
    assert!(max_diff(&hb, &h2.scale_re(-1.0)) < 1e-10);
}

#[test]
fn spectral_shift_is_antisymmetric_and_bounded() {
    let s = SpectralShift::<f64>::new(&[0.0, 1e-14, 0.1, 0.3, 0.6], 1e-12);
    for i in 0..5 {
        for j in 0..5 {
            let w = s.weight(i, j);
            assert!(w.abs() <= 1.0);
            assert_eq!(w, -s.weight(j, i));
        }
    }
    assert_eq!(s.weight(0, 1), 0.0);
    let expected = (0.1f64.sqrt() - 0.3f64.sqrt()) / (0.1f64.sqrt() + 0.3f64.sqrt());
    assert!((s.weight(2, 3) - expected).abs() < 1e-15);
}

#[test]
fn jump_free_forward_run_gives_a_pure_hamiltonian_reverse() {
    let mut rng = rng(27);
    let h = random_hermitian(&mut rng, 2);
    let spec = ForwardSpec::constant(h.clone(), vec![], random_density(&mut rng, 2, 1), 2.0, 200);
    let fwd = Arc::new(spec.run().unwrap());
    let rev = build_reverse_generator(fwd.clone(), &spec.hamiltonian, &spec.jumps, EPS).unwrap();
    assert!(rev.jumps.is_empty());
    assert!(rev.hamiltonian.values.iter().all(|hb| max_diff(hb, &h.scale_re(-1.0)) < 1e-12));

    let diss = build_dissipation_only_reverse(fwd.clone(), &spec.hamiltonian, &spec.jumps, EPS).unwrap();
    assert!(diss.hamiltonian.values.iter().all(|hb| hb.max_norm() < 1e-12));

    let report = reversal_experiment(&spec, EPS, ReversalKind::Full).unwrap();
    assert!(report.fidelity.iter().all(|f| (f - 1.0).abs() < 1e-9));
    let report = reversal_experiment(&spec, EPS, ReversalKind::DissipationOnly).unwrap();
    assert!(max_diff(report.endpoint_state(), fwd.last()) < 1e-12);
}

#[test]
fn reverse_grid_mirrors_forward_grid() {
    let spec = reference_spec(1_000);
    let fwd = Arc::new(spec.run().unwrap());
    let rev = build_reverse_generator(fwd.clone(), &spec.hamiltonian, &spec.jumps, EPS).unwrap();
    let grid = rev.grid();
    assert_eq!(grid.len, fwd.len());
    assert!((grid.step - fwd.step).abs() < 1e-15);
    assert!((rev.duration() - 10.0).abs() < 1e-12);
    assert!(rev.hamiltonian.values.iter().all(|h| h.hermitian_deviation() < 1e-12));
    // node j of the reverse run carries γ at forward node M − j
    let (_, l) = reference_qubit_model();
    let m = fwd.len() - 1;
    let lb = reverse_jumps(&fwd.states[m - 300], &[l], EPS).unwrap();
    assert!(max_diff(&rev.jumps[0].values[300], &lb[0]) < 1e-12);
}

#[test]
fn random_qubit_lindbladian_is_retraced() {
    let mut rng = rng(28);
    let h = random_hermitian(&mut rng, 2);
    let jumps: Vec<Op> = (0..2).map(|_| random_matrix(&mut rng, 2, 2).scale_re(0.3)).collect();
    let spec = ForwardSpec::constant(h, jumps, random_density(&mut rng, 2, 2), 3.0, 3_000);
    let report = reversal_experiment(&spec, EPS, ReversalKind::Full).unwrap();
    assert!(report.min_fidelity >= 1.0 - 1e-3, "{}", report.min_fidelity);
}

#[test]
fn hamiltonian_only_reversal_falls_short() {
    let spec = reference_spec(2_000);
    let full = reversal_experiment(&spec, EPS, ReversalKind::Full).unwrap();
    let ham = reversal_experiment(&spec, EPS, ReversalKind::HamiltonianOnly).unwrap();
    assert!(ham.endpoint_fidelity < full.endpoint_fidelity);
    assert!(ham.endpoint_fidelity < 0.99);
}

#[test]
fn dissipation_only_endpoint_keeps_initial_purity() {
    let mut rng = rng(29);
    let rho0 = random_density(&mut rng, 2, 2);
    let (h, l) = reference_qubit_model();
    let spec = ForwardSpec::constant(h.clone(), vec![l], rho0.clone(), 4.0, 4_000);
    let report = reversal_experiment(&spec, EPS, ReversalKind::DissipationOnly).unwrap();
    let p0 = trace(&naive_mul(&rho0, &rho0)).re;
    let end = report.endpoint_state();
    assert!((trace(&naive_mul(end, end)).re - p0).abs() < 1e-3);
    let u = qubit_unitary([0.3, 0.0, 1.0], 4.0);
    let target = naive_mul(&naive_mul(&u, &rho0), &u.adjoint());
    assert!(max_diff(end, &target) < 1e-3);
}

#[test]
fn schedules_are_accepted_as_hamiltonians() {
    let (h, l) = reference_qubit_model();
    let spec = ForwardSpec {
        hamiltonian: Schedule::Constant(h),
        jumps: vec![Schedule::Constant(l)],
        initial: DensityMatrix::basis(2, 0).into_operator(),
        tau: 1.0,
        steps: 500,
    };
    let report = reversal_experiment(&spec, EPS, ReversalKind::Full).unwrap();
    assert!(report.min_fidelity > 1.0 - 1e-4);
}
