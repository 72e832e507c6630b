mod common;

use common::*;
use petzlab::bloch::{bch_conjugate, qubit_reverse_hamiltonian, qubit_reverse_jump, BlochSeries, BlochState, QubitJump};
use petzlab::lindblad::{propagate, Lindbladian, PropagateOptions, Schedule};
use petzlab::linalg::DensityMatrix;
use petzlab::petz::{correction_hamiltonian, reverse_jumps};
use petzlab::C;
use rand::Rng;

const EPS: f64 = 1e-12;

fn random_ball<R: Rng>(rng: &mut R, max_radius: f64) -> [f64; 3] {
    let g = [gauss(rng).re, gauss(rng).re, gauss(rng).re];
    let n = (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]).sqrt();
    let r = max_radius * rng.random::<f64>();
    g.map(|x| r * x / n)
}

fn random_cvec<R: Rng>(rng: &mut R) -> [C<f64>; 3] {
    [gauss(rng), gauss(rng), gauss(rng)]
}

#[test]
fn conjugation_trivial_cases() {
    let mut rng = rng(31);
    let n = [0.0, 0.6, 0.8];
    let v = random_cvec(&mut rng);
    assert_eq!(bch_conjugate(0.0, &n, &v).unwrap(), v);
    let parallel = n.map(|a| c(a * 1.7, -0.4 * a));
    let out = bch_conjugate(1.3, &n, &parallel).unwrap();
    for (a, b) in out.iter().zip(&parallel) {
        assert!((a - b).norm() < 1e-14);
    }
    assert!(bch_conjugate(1.0, &[1.0, 1.0, 0.0], &v).is_err());
}

#[test]
fn reverse_jump_limits() {
    let mut rng = rng(32);
    let l = QubitJump::new(random_cvec(&mut rng)).unwrap();
    let centre = BlochState::new([0.0; 3]).unwrap();
    let lb = qubit_reverse_jump(&centre, &l);
    for (a, b) in lb.l.iter().zip(&l.l) {
        assert!((a - b.conj()).norm() < 1e-15);
    }
    let zero = QubitJump::new([c(0.0, 0.0); 3]).unwrap();
    let state = BlochState::new(random_ball(&mut rng, 0.9)).unwrap();
    assert!(qubit_reverse_jump(&state, &zero).l.iter().all(|z| z.norm() == 0.0));
}

#[test]
fn reverse_hamiltonian_limits() {
    let mut rng = rng(33);
    let h = [0.3, -0.2, 1.0];
    let state = BlochState::new(random_ball(&mut rng, 0.9)).unwrap();
    assert_eq!(qubit_reverse_hamiltonian(&state, &h, &[]), [-0.3, 0.2, -1.0]);
    let l = QubitJump::new(random_cvec(&mut rng)).unwrap();
    let centre = BlochState::new([0.0; 3]).unwrap();
    let hb = qubit_reverse_hamiltonian(&centre, &h, &[l]);
    for (a, b) in hb.iter().zip(&h) {
        assert!((a + b).abs() < 1e-15);
    }
}

#[test]
fn closed_forms_match_general_construction_on_random_states() {
    let mut rng = rng(34);
    for _ in 0..50 {
        let state = BlochState::new(random_ball(&mut rng, 0.95)).unwrap();
        let gamma = state.to_density();
        let jumps: Vec<QubitJump<f64>> = (0..2).map(|_| QubitJump::new(random_cvec(&mut rng)).unwrap()).collect();
        let ops: Vec<Op> = jumps.iter().map(|j| vec_dot_sigma(&j.l)).collect();
        let general = reverse_jumps(&gamma, &ops, EPS).unwrap();
        for (j, g) in jumps.iter().zip(&general) {
            assert!(max_diff(&vec_dot_sigma(&qubit_reverse_jump(&state, j).l), g) < 1e-8);
        }
        let h = [gauss(&mut rng).re, gauss(&mut rng).re, gauss(&mut rng).re];
        let h_op = vec_dot_sigma(&h.map(|x| c(x, 0.0)));
        let hb = qubit_reverse_hamiltonian(&state, &h, &jumps);
        let general_h = &correction_hamiltonian(&gamma, &ops, EPS).unwrap() - &h_op;
        assert!(max_diff(&vec_dot_sigma(&hb.map(|x| c(x, 0.0))), &general_h) < 1e-8);
    }
}

#[test]
fn bloch_round_trip() {
    let mut rng = rng(35);
    for _ in 0..100 {
        let r = random_ball(&mut rng, 1.0);
        let back = BlochState::from_density(&BlochState::new(r).unwrap().to_density()).unwrap();
        for (a, b) in back.r.iter().zip(&r) {
            assert!((a - b).abs() < 1e-12);
        }
        let rho = random_density(&mut rng, 2, 2);
        let again = BlochState::from_density(&rho).unwrap().to_density();
        assert!(max_diff(&again, &rho) < 1e-12);
    }
    assert!(BlochState::new([0.8, 0.8, 0.0]).is_err());
}

#[test]
fn jump_vectors_round_trip_through_operators() {
    let mut rng = rng(36);
    let l = QubitJump::new(random_cvec(&mut rng)).unwrap();
    let op = l.to_operator();
    assert!(max_diff(&op, &vec_dot_sigma(&l.l)) < 1e-15);
    let back = QubitJump::from_operator(&op);
    for (a, b) in back.l.iter().zip(&l.l) {
        assert!((a - b).norm() < 1e-15);
    }
}

#[test]
fn series_along_reference_trajectory() {
    let (h, l) = reference_qubit_model();
    let lind = Lindbladian::constant(h.clone(), vec![l.clone()]).unwrap();
    let rho0 = DensityMatrix::basis(2, 0).into_operator();
    let traj = propagate(&lind, &rho0, 0.0, 10.0, 1_000, PropagateOptions::default().with_stride(100)).unwrap();
    let series = BlochSeries::from_trajectory(&traj, &Schedule::Constant(h.clone()), &[Schedule::Constant(l.clone())]).unwrap();
    assert_eq!(series.times.len(), 11);
    for k in 1..series.times.len() {
        let gamma = &traj.states[k];
        let lb = &reverse_jumps(gamma, &[l.clone()], EPS).unwrap()[0];
        assert!(max_diff(&vec_dot_sigma(&series.l_b[k][0]), lb) < 1e-7);
        let hb = &correction_hamiltonian(gamma, &[l.clone()], EPS).unwrap() - &h;
        assert!(max_diff(&vec_dot_sigma(&series.h_b[k].map(|x| c(x, 0.0))), &hb) < 1e-7);
    }
    let mut buf = Vec::new();
    series.write_csv(&mut buf).unwrap();
    let header = String::from_utf8(buf).unwrap().lines().next().unwrap().to_string();
    assert_eq!(header.split(',').count(), 4 + 6);
}
