use std::f64::consts::PI;

use floquet_web::{bond_anisotropy, ising_echo, loop_populations, MAX_DURATION_NS};

#[test]
fn loop_layout_and_caging() {
    let v = loop_populations(PI, 0.75, 1000.0, 10.0).unwrap();
    let n = 101;
    assert_eq!(v.len(), 5 * n);
    assert_eq!(v[n - 1], 1000.0);
    let p101 = &v[3 * n..4 * n];
    assert!(p101.iter().all(|&p| p < 1e-10));
    let open = loop_populations(0.0, 0.75, 1000.0, 10.0).unwrap();
    assert!(open[3 * n..4 * n].iter().cloned().fold(0.0, f64::max) > 0.9);
    for k in 0..n {
        let total: f64 = (1..5).map(|b| open[b * n + k]).sum();
        assert!((total - 1.0).abs() < 1e-9);
    }
}

#[test]
fn echo_starts_at_one_and_matches_two_spin_formula() {
    let l = ising_echo(2, 0.75, 0.0, 500.0, 5.0).unwrap();
    assert!((l[0] - 1.0).abs() < 1e-12);
    for (k, v) in l.iter().enumerate() {
        let t = 5.0 * k as f64;
        assert!((v - (2.0 * PI * 0.75e-3 * t).cos().powi(2)).abs() < 1e-9);
    }
}

#[test]
fn anisotropy_cases() {
    assert_eq!(bond_anisotropy(0.75, 0.0, 0.75, 0.0).unwrap(), vec![0.75, 0.0, 0.0, 0.0]);
    let yy = bond_anisotropy(0.75, PI, 0.75, 0.0).unwrap();
    assert!(yy[0].abs() < 1e-15 && (yy[1] - 0.75).abs() < 1e-15);
}

#[test]
fn guards() {
    assert!(loop_populations(0.0, 0.75, MAX_DURATION_NS * 2.0, 10.0).is_err());
    assert!(ising_echo(9, 0.75, 1.0, 100.0, 1.0).is_err());
    assert!(ising_echo(3, 0.75, 1.0, 100.0, 0.0).is_err());
    assert!(bond_anisotropy(-1.0, 0.0, 0.0, 0.0).is_err());
}
