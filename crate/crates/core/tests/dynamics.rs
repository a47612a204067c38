use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use floquet_core::device::{DephasingSource, DeviceSpec, SidebandDrive, SidebandKind};
use floquet_core::dynamics::*;
use floquet_core::effective::{effective_pair_hamiltonian, ising_hamiltonian, ChainConfig, EffectiveCoupling};
use floquet_core::qop::*;
use floquet_core::Error;

fn labels(n: usize) -> Vec<String> {
    HilbertSpace::qubits(n).labels()
}

#[test]
fn zero_hamiltonian_keeps_state() {
    let s = HilbertSpace::qubits(2);
    let h = TimeDependentHamiltonian::constant(&Operator::zeros(&s));
    let psi = QuantumState::superposition(&s, &[(ONE, "01"), (I, "10")]).unwrap();
    let tr = evolve_schrodinger(&h, &psi, (0.0, 500.0), 10.0, 50.0).unwrap();
    for st in &tr.states {
        assert!((st.vector().unwrap() - psi.vector().unwrap()).norm() < 1e-15);
    }
}

#[test]
fn pair_rabi_matches_analytic() {
    let h = TimeDependentHamiltonian::constant(&effective_pair_hamiltonian(&EffectiveCoupling::new(0, 0.75, 0.0, 0.0, 0.0).unwrap()));
    let s = HilbertSpace::qubits(2);
    let tr = evolve_schrodinger(&h, &QuantumState::from_label(&s, "00").unwrap(), (0.0, 1000.0), 1.0, 5.0).unwrap();
    let p = measure_populations(&tr, &labels(2)).unwrap();
    for (k, &t) in tr.times.iter().enumerate() {
        let want = (TAU * 0.00075 * t).sin().powi(2);
        assert!((p[3][k] - want).abs() < 1e-10, "t={t}");
        assert!((p.iter().map(|x| x[k]).sum::<f64>() - 1.0).abs() < 1e-12);
    }
}

/// A constant Hamiltonian disguised as time dependent, so the Magnus path runs.
fn via_magnus(op: &Operator) -> TimeDependentHamiltonian {
    let d = op.dim();
    TimeDependentHamiltonian::constant(op)
        .with_drive(DriveTerm { operator: CMatrix::identity(d, d), coefficient: Arc::new(|_| 0.0), bound: 0.0, frequency_ghz: 0.0 })
        .unwrap()
}

#[test]
fn step_integrator_matches_exact_propagator() {
    let h = ising_hamiltonian(3, 0.75, 0.6).unwrap();
    let s = h.space().clone();
    let psi = QuantumState::from_label(&s, "000").unwrap();
    let tr = evolve_schrodinger(&via_magnus(&h), &psi, (0.0, 100.0), 0.5, 100.0).unwrap();
    let u = matrix_exponential_propagator(&h, 100.0).unwrap();
    let exact = u.matrix() * psi.vector().unwrap();
    let got = tr.final_state().vector().unwrap();
    for (a, b) in got.iter().zip(exact.iter()) {
        assert!((a.norm_sqr() - b.norm_sqr()).abs() < 1e-8);
    }
}

/// Driven two-level system `ω/2 σᶻ + Ω cos(νt) σˣ` (rad/ns).
fn driven_qubit() -> TimeDependentHamiltonian {
    let s = HilbertSpace::qubits(1);
    let z = site_operator(SiteLabel::Z, 0, &s).unwrap();
    let x = site_operator(SiteLabel::X, 0, &s).unwrap();
    TimeDependentHamiltonian::constant(&(&z * (0.5 * TAU * 0.2)))
        .with_drive(DriveTerm {
            operator: x.matrix() * C64::new(TAU * 0.05, 0.0),
            coefficient: Arc::new(|t| (TAU * 0.21 * t).cos()),
            bound: 1.0,
            frequency_ghz: 0.21,
        })
        .unwrap()
}

fn final_amplitudes(h: &TimeDependentHamiltonian, t: f64, dt: f64) -> CVector {
    let s = h.space().clone();
    let tr = evolve_schrodinger(h, &QuantumState::from_label(&s, "0").unwrap(), (0.0, t), dt, t).unwrap();
    tr.final_state().vector().unwrap().clone()
}

#[test]
fn convergence_is_fourth_order() {
    let h = driven_qubit();
    let dt = h.max_step_ns();
    let reference = final_amplitudes(&h, 40.0, dt / 64.0);
    let e1 = (final_amplitudes(&h, 40.0, dt) - &reference).norm();
    let e2 = (final_amplitudes(&h, 40.0, dt / 2.0) - &reference).norm();
    let ratio = e1 / e2;
    assert!((ratio / 16.0 - 1.0).abs() < 0.2, "ratio {ratio}");
}

#[test]
fn norm_preserved_over_a_microsecond() {
    let h = driven_qubit();
    let s = h.space().clone();
    let tr = evolve_schrodinger(&h, &QuantumState::from_label(&s, "0").unwrap(), (0.0, 1000.0), h.max_step_ns(), 10.0).unwrap();
    for st in &tr.states {
        assert!((st.vector().unwrap().norm() - 1.0).abs() < 1e-9);
    }
}

#[test]
fn deterministic() {
    let h = driven_qubit();
    let s = h.space().clone();
    let run = || evolve_schrodinger(&h, &QuantumState::from_label(&s, "0").unwrap(), (0.0, 50.0), 0.1, 1.0).unwrap().populations();
    assert_eq!(run(), run());
}

#[test]
fn coarse_step_rejected() {
    let h = driven_qubit();
    let s = h.space().clone();
    let psi = QuantumState::from_label(&s, "0").unwrap();
    let dt = 2.0 * h.max_step_ns();
    assert!(matches!(evolve_schrodinger(&h, &psi, (0.0, 10.0), dt, 1.0), Err(Error::StepTooCoarse { .. })));
    assert!(evolve_schrodinger(&h, &psi.to_mixed(), (0.0, 10.0), 0.01, 1.0).is_err());
}

#[test]
fn sample_grid_ends_on_span() {
    let g = sample_grid(0.0, 10.0, 3.0).unwrap();
    assert_eq!(g, vec![0.0, 3.0, 6.0, 9.0, 10.0]);
    let g = sample_grid(0.0, 10.0, 2.5).unwrap();
    assert_eq!(g.len(), 5);
    assert_eq!(*g.last().unwrap(), 10.0);
    assert!(sample_grid(5.0, 1.0, 1.0).is_err());
}

#[test]
fn lindblad_without_rates_matches_schrodinger() {
    let cfg = ChainConfig::uniform_xx(3, 0.75, 1.2);
    let h = floquet_core::effective::effective_chain_hamiltonian(&cfg).unwrap();
    let s = h.space().clone();
    let psi = QuantumState::from_label(&s, "000").unwrap();
    let a = evolve_schrodinger(&via_magnus(&h), &psi, (0.0, 400.0), 2.0, 20.0).unwrap();
    let b = evolve_lindblad(&via_magnus(&h), &psi, &CollapseModel::none(3), (0.0, 400.0), 2.0, 20.0).unwrap();
    for (x, y) in a.populations().iter().zip(b.populations()) {
        for (p, q) in x.iter().zip(y) {
            assert!((p - q).abs() < 1e-8);
        }
    }
}

#[test]
fn amplitude_damping_law() {
    let s = HilbertSpace::qubits(1);
    let h = TimeDependentHamiltonian::constant(&Operator::zeros(&s));
    let model = CollapseModel { sites: vec![SiteRates { gamma1: 1.0 / 34_000.0, gamma_phi: 0.0 }] };
    let tr = evolve_lindblad(&h, &QuantumState::from_label(&s, "1").unwrap(), &model, (0.0, 34_000.0), 100.0, 1000.0).unwrap();
    let p1 = tr.final_state().populations()[1];
    assert!((p1 - (-1.0f64).exp()).abs() < 1e-4, "{p1}");
}

#[test]
fn negative_rates_rejected() {
    let s = HilbertSpace::qubits(1);
    let h = TimeDependentHamiltonian::constant(&Operator::zeros(&s));
    let model = CollapseModel { sites: vec![SiteRates { gamma1: -1.0, gamma_phi: 0.0 }] };
    assert!(matches!(
        evolve_lindblad(&h, &QuantumState::from_label(&s, "1").unwrap(), &model, (0.0, 1.0), 0.1, 1.0),
        Err(Error::NegativeRate(_))
    ));
}

#[test]
fn lindblad_trace_and_positivity() {
    let dev = DeviceSpec::table_s1();
    let cfg = ChainConfig::uniform_xx(3, 0.75, 0.0);
    let h = floquet_core::effective::effective_chain_hamiltonian(&cfg).unwrap();
    let s = h.space().clone();
    let model = CollapseModel::from_device(&dev, &[Some(0), Some(1), Some(2)], DephasingSource::Ramsey);
    let tr = evolve_lindblad(&TimeDependentHamiltonian::constant(&h), &QuantumState::from_label(&s, "000").unwrap(), &model, (0.0, 3000.0), 5.0, 100.0)
        .unwrap();
    for st in &tr.states {
        let r = st.density();
        assert!((r.trace().re - 1.0).abs() < 1e-7);
        assert!(hermitian_eigen(&r).eigenvalues.min() > -1e-7);
    }
}

#[test]
fn rabi_contrast_decay_matches_prediction() {
    let dev = DeviceSpec::table_s1();
    let h = TimeDependentHamiltonian::constant(&effective_pair_hamiltonian(&EffectiveCoupling::new(0, 0.75, 0.0, 0.0, 0.0).unwrap()));
    let s = HilbertSpace::qubits(2);
    let model = CollapseModel::from_device(&dev, &[Some(0), Some(1)], DephasingSource::Echo);
    let tr = evolve_lindblad(&h, &QuantumState::from_label(&s, "00").unwrap(), &model, (0.0, 20_000.0), 2.0, 2.0).unwrap();
    let p11: Vec<f64> = tr.states.iter().map(|st| st.populations()[3]).collect();
    let period: f64 = 1.0 / 0.0015;
    let per = (period / 2.0 / 2.0).round() as usize * 2;
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    let mut start = 0;
    while start + per < p11.len() {
        let w = &p11[start..start + per];
        let amp = w.iter().copied().fold(f64::MIN, f64::max) - w.iter().copied().fold(f64::MAX, f64::min);
        xs.push(tr.times[start] + 0.5 * period);
        ys.push(amp.ln());
        start += per;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    let predicted: f64 = model.sites.iter().map(|r| 0.5 * (r.gamma1 + r.gamma_phi)).sum();
    let fitted = -slope;
    assert!((fitted / predicted - 1.0).abs() < 0.15, "fitted {fitted}, predicted {predicted}");
}

#[test]
fn lab_static_limit_matches_explicit_construction() {
    let dev = DeviceSpec::table_s1();
    let lab = build_lab_hamiltonian(&dev, &[], 0, 2, &LabOptions::default()).unwrap();
    assert!(lab.hamiltonian.is_time_independent());
    let s = lab.hamiltonian.space().clone();
    assert_eq!(s.site_dims(), &[2, 2, 2]);
    // Explicit oracle: n = (1 − σᶻ)/2, x = σˣ.
    let n = |k| {
        let z = site_operator(SiteLabel::Z, k, &s).unwrap();
        (&Operator::identity(&s) - &z).scale(C64::new(0.5, 0.0))
    };
    let x = |k| site_operator(SiteLabel::X, k, &s).unwrap();
    let c = &dev.couplers[0];
    let wc = floquet_core::device::coupler_frequency(c.idle_flux(), c.omega_max_ghz);
    let terms = [
        (n(0), TAU * dev.qubits[0].omega_idle_ghz),
        (n(1), TAU * wc),
        (n(2), TAU * dev.qubits[1].omega_idle_ghz),
        (&x(0) * &x(1), TAU * 1e-3 * c.g_left_mhz),
        (&x(2) * &x(1), TAU * 1e-3 * c.g_right_mhz),
    ];
    let mut want = Operator::zeros(&s);
    for (op, w) in terms {
        want = &want + &(&op * w);
    }
    assert!(lab.hamiltonian.static_part().max_abs_diff(&want) < 1e-12);
    assert!((wc - 5.44).abs() < 1e-12);
}

fn red_drive(amplitude: f64) -> SidebandDrive {
    SidebandDrive {
        coupler: 0,
        kind: SidebandKind::Red,
        amplitude,
        frequency_ghz: 0.356,
        phase_rad: 0.3,
        t_start_ns: 0.0,
        t_end_ns: 50.0,
        ramp_ns: 10.0,
    }
}

#[test]
fn zero_amplitude_drive_is_static() {
    let dev = DeviceSpec::table_s1();
    let a = build_lab_hamiltonian(&dev, &[], 0, 2, &LabOptions::default()).unwrap();
    let b = build_lab_hamiltonian(&dev, &[red_drive(0.0)], 0, 2, &LabOptions::default()).unwrap();
    for t in [0.0, 3.3, 17.0, 25.2] {
        assert_eq!(a.hamiltonian.at(t), b.hamiltonian.at(t));
    }
}

#[test]
fn driven_lab_hamiltonian_is_hermitian() {
    let dev = DeviceSpec::table_s1();
    let lab = build_lab_hamiltonian(&dev, &[red_drive(0.04)], 0, 2, &LabOptions { levels: 3, ..Default::default() }).unwrap();
    for k in 0..50 {
        assert!(lab.hamiltonian.check_hermitian(k as f64 * 1.01) < 1e-12);
    }
    assert!(lab.hamiltonian.at(25.0) != lab.hamiltonian.at(0.0));
}

#[test]
fn lab_model_guards() {
    let dev = DeviceSpec::table_s1();
    assert!(matches!(build_lab_hamiltonian(&dev, &[], 0, 4, &LabOptions::default()), Err(Error::DimensionCap(4))));
    let mut d = red_drive(0.01);
    d.coupler = 3;
    assert!(matches!(build_lab_hamiltonian(&dev, &[d], 0, 2, &LabOptions::default()), Err(Error::ExcludedCoupler(3))));
    assert!(matches!(build_lab_hamiltonian(&dev, &[red_drive(0.3)], 0, 2, &LabOptions::default()), Err(Error::AmplitudeGuard { .. })));
}

#[test]
fn population_label_examples() {
    let s = HilbertSpace::qubits(2);
    let h = TimeDependentHamiltonian::constant(&Operator::zeros(&s));
    let bell = QuantumState::superposition(&s, &[(ONE, "01"), (ONE, "10")]).unwrap();
    let tr = evolve_schrodinger(&h, &bell, (0.0, 0.0), 1.0, 1.0).unwrap();
    let p = measure_populations(&tr, &labels(2)).unwrap();
    assert!((p[1][0] - 0.5).abs() < 1e-15 && (p[2][0] - 0.5).abs() < 1e-15);
    let tr = evolve_schrodinger(&h, &QuantumState::from_label(&s, "00").unwrap(), (0.0, 0.0), 1.0, 1.0).unwrap();
    assert_eq!(measure_populations(&tr, &["00".to_string()]).unwrap()[0][0], 1.0);
    assert!(matches!(measure_populations(&tr, &["0x".to_string()]), Err(Error::InvalidLabel(_))));
    assert!(matches!(measure_populations(&tr, &["000".to_string()]), Err(Error::InvalidLabel(_))));
}

#[test]
fn three_level_populations_show_leakage_deficit() {
    let dev = DeviceSpec::table_s1();
    let lab = build_lab_hamiltonian(&dev, &[], 0, 2, &LabOptions { levels: 3, ..Default::default() }).unwrap();
    let s = lab.hamiltonian.space().clone();
    // Put weight on |2⟩ of the first qubit directly.
    let mut v = CVector::zeros(s.dim());
    v[s.index_of(&[1, 0, 1]).unwrap()] = C64::new(0.8, 0.0);
    v[s.index_of(&[2, 0, 0]).unwrap()] = C64::new(0.6, 0.0);
    let psi = QuantumState::pure(&s, v).unwrap();
    let tr = evolve_schrodinger(&lab.hamiltonian, &psi, (0.0, 0.0), 1e-3, 1.0).unwrap();
    let mut tr = tr;
    tr.qubit_sites = lab.qubit_sites.clone();
    let p = measure_populations(&tr, &labels(2)).unwrap();
    let total: f64 = p.iter().map(|x| x[0]).sum();
    assert!((total - 0.64).abs() < 1e-12);
    assert!(total <= 1.0);
    let _ = PI;
}
