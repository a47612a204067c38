//! Effective rotating-frame Hamiltonians of sideband-driven chains.
//!
//! Bond `k` couples sites `k` and `k+1` with a pairing term
//! `g_b e^{−iφ_b} σ_k⁺σ_{k+1}⁺` and a hopping term `g_r e^{−iφ_r} σ_a⁺σ_b⁻ + h.c.`
//! The raised site `a` of the hopping term is the odd-numbered qubit of the
//! bond (Q1, Q3, Q5: even 0-based index), so bond 0 reads `σ₁⁺σ₂⁻` and
//! bond 1 reads `σ₃⁺σ₂⁻`. With this orientation the gauge-invariant flux of
//! the first triple is `Φ = φ_r12 + φ_b23 − φ_r23 − φ_b12`.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qop::{mhz_to_rad_ns, site_operator, CMatrix, HilbertSpace, Operator, SiteLabel, C64};

/// Map a phase to `(−π, π]`.
pub fn canonical_phase(x: f64) -> f64 {
    let y = x - TAU * ((x - PI) / TAU).ceil();
    if y <= -PI {
        y + TAU
    } else {
        y
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EffectiveCoupling {
    pub bond: usize,
    pub g_blue: f64,
    pub phi_blue: f64,
    pub g_red: f64,
    pub phi_red: f64,
}

impl EffectiveCoupling {
    pub fn new(bond: usize, g_blue: f64, phi_blue: f64, g_red: f64, phi_red: f64) -> Result<Self> {
        if !(g_blue >= 0.0 && g_red >= 0.0) {
            return Err(Error::InvalidArgument(format!("bond {bond}: strengths must be non-negative")));
        }
        Ok(Self { bond, g_blue, phi_blue: canonical_phase(phi_blue), g_red, phi_red: canonical_phase(phi_red) })
    }

    /// Equal blue and red strength `g` with zero phases: a pure XX bond.
    pub fn xx(bond: usize, g: f64) -> Self {
        Self { bond, g_blue: g, phi_blue: 0.0, g_red: g, phi_red: 0.0 }
    }

    /// Whether the hopping term raises the left site of the bond.
    pub fn hopping_raises_left(&self) -> bool {
        self.bond.is_multiple_of(2)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub n_qubits: usize,
    pub couplings: Vec<EffectiveCoupling>,
    /// Common blue-drive detuning Δᵇ, MHz.
    #[serde(default)]
    pub detuning_blue_mhz: f64,
}

impl ChainConfig {
    /// Uniform chain of pure-XX bonds.
    pub fn uniform_xx(n: usize, g: f64, detuning_blue_mhz: f64) -> Self {
        Self { n_qubits: n, couplings: (0..n.saturating_sub(1)).map(|k| EffectiveCoupling::xx(k, g)).collect(), detuning_blue_mhz }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_qubits < 2 {
            return Err(Error::InvalidArgument(format!("n_qubits = {} < 2", self.n_qubits)));
        }
        if self.couplings.len() != self.n_qubits - 1 {
            return Err(Error::InvalidArgument(format!(
                "{} couplings for {} qubits",
                self.couplings.len(),
                self.n_qubits
            )));
        }
        for (k, c) in self.couplings.iter().enumerate() {
            if c.bond != k {
                return Err(Error::InvalidArgument(format!("couplings[{k}] has bond {}", c.bond)));
            }
            if !(c.g_blue >= 0.0 && c.g_red >= 0.0) {
                return Err(Error::InvalidArgument(format!("couplings[{k}]: strengths must be non-negative")));
            }
        }
        Ok(())
    }
}

fn bond_matrix(c: &EffectiveCoupling, left: usize, right: usize, space: &HilbertSpace) -> Result<CMatrix> {
    let sp_l = site_operator(SiteLabel::Sp, left, space)?;
    let sp_r = site_operator(SiteLabel::Sp, right, space)?;
    let sm_l = site_operator(SiteLabel::Sm, left, space)?;
    let sm_r = site_operator(SiteLabel::Sm, right, space)?;
    let pairing = (&sp_l * &sp_r).scale(C64::from_polar(mhz_to_rad_ns(c.g_blue), -c.phi_blue));
    let hop = if c.hopping_raises_left() { &sp_l * &sm_r } else { &sp_r * &sm_l };
    let hopping = hop.scale(C64::from_polar(mhz_to_rad_ns(c.g_red), -c.phi_red));
    let half = &pairing + &hopping;
    Ok(half.matrix() + half.matrix().adjoint())
}

/// Two-qubit bond Hamiltonian (rad/ns); orientation follows `c.bond` parity.
pub fn effective_pair_hamiltonian(c: &EffectiveCoupling) -> Operator {
    let space = HilbertSpace::qubits(2);
    let m = bond_matrix(c, 0, 1, &space).expect("two-site space");
    Operator::new(space, m).expect("dimension matches")
}

/// `Σᵢ (Δᵇ/4)σᵢᶻ + Σ bonds` on `n_qubits` qubits (rad/ns).
pub fn effective_chain_hamiltonian(cfg: &ChainConfig) -> Result<Operator> {
    cfg.validate()?;
    let space = HilbertSpace::qubits(cfg.n_qubits);
    let d = space.dim();
    let mut m = CMatrix::zeros(d, d);
    let field = mhz_to_rad_ns(cfg.detuning_blue_mhz / 4.0);
    if field != 0.0 {
        for i in 0..cfg.n_qubits {
            m += site_operator(SiteLabel::Z, i, &space)?.matrix() * C64::new(field, 0.0);
        }
    }
    for c in &cfg.couplings {
        m += bond_matrix(c, c.bond, c.bond + 1, &space)?;
    }
    Operator::new(space, m)
}

/// Bonds of `couplings` on the qubits `first_qubit .. first_qubit+n_qubits`,
/// renumbered from site 0. Orientation still follows each bond's parity.
pub fn segment_hamiltonian(first_qubit: usize, n_qubits: usize, couplings: &[EffectiveCoupling]) -> Result<Operator> {
    let space = HilbertSpace::qubits(n_qubits);
    let d = space.dim();
    let mut m = CMatrix::zeros(d, d);
    for c in couplings {
        if c.bond < first_qubit || c.bond + 1 >= first_qubit + n_qubits {
            return Err(Error::BondOutOfRange { bond: c.bond, n_bonds: first_qubit + n_qubits - 1 });
        }
        let left = c.bond - first_qubit;
        m += bond_matrix(c, left, left + 1, &space)?;
    }
    Operator::new(space, m)
}

/// Open-boundary `J Σ σˣσˣ + B_z Σ σᶻ` (inputs MHz, output rad/ns).
pub fn ising_hamiltonian(n: usize, j_mhz: f64, bz_mhz: f64) -> Result<Operator> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("n = {n} < 2")));
    }
    let space = HilbertSpace::qubits(n);
    let d = space.dim();
    let mut m = CMatrix::zeros(d, d);
    let j = C64::new(mhz_to_rad_ns(j_mhz), 0.0);
    let b = C64::new(mhz_to_rad_ns(bz_mhz), 0.0);
    for i in 0..n {
        m += site_operator(SiteLabel::Z, i, &space)?.matrix() * b;
        if i + 1 < n {
            let xx = &site_operator(SiteLabel::X, i, &space)? * &site_operator(SiteLabel::X, i + 1, &space)?;
            m += xx.matrix() * j;
        }
    }
    Operator::new(space, m)
}

/// Coefficients (MHz) of `σˣσˣ, σʸσʸ, σˣσʸ, σʸσˣ` in a bond Hamiltonian; the
/// first Pauli acts on the left site.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Anisotropy {
    pub xx: f64,
    pub yy: f64,
    pub xy: f64,
    pub yx: f64,
}

impl Anisotropy {
    pub fn as_array(&self) -> [f64; 4] {
        [self.xx, self.yy, self.xy, self.yx]
    }

    /// Rebuild the 4×4 bond matrix (rad/ns).
    pub fn reconstruct(&self) -> Operator {
        let s = HilbertSpace::qubits(2);
        let p = |a: SiteLabel, b: SiteLabel| &site_operator(a, 0, &s).unwrap() * &site_operator(b, 1, &s).unwrap();
        let terms = [
            (self.xx, p(SiteLabel::X, SiteLabel::X)),
            (self.yy, p(SiteLabel::Y, SiteLabel::Y)),
            (self.xy, p(SiteLabel::X, SiteLabel::Y)),
            (self.yx, p(SiteLabel::Y, SiteLabel::X)),
        ];
        let mut m = CMatrix::zeros(4, 4);
        for (c, op) in terms {
            m += op.matrix() * C64::new(mhz_to_rad_ns(c), 0.0);
        }
        Operator::new(s, m).unwrap()
    }
}

pub fn anisotropy_decompose(c: &EffectiveCoupling) -> Anisotropy {
    let (sb, cb) = c.phi_blue.sin_cos();
    let (sr, cr) = c.phi_red.sin_cos();
    let (gb, gr) = (c.g_blue, c.g_red);
    let hop_cross = if c.hopping_raises_left() { gr * sr } else { -gr * sr };
    Anisotropy {
        xx: 0.5 * (gb * cb + gr * cr),
        yy: 0.5 * (gr * cr - gb * cb),
        xy: 0.5 * (-gb * sb + hop_cross),
        yx: 0.5 * (-gb * sb - hop_cross),
    }
}

fn check_adjacent(c12: &EffectiveCoupling, c23: &EffectiveCoupling) -> Result<()> {
    if c23.bond != c12.bond + 1 {
        return Err(Error::InvalidArgument(format!("bonds {} and {} are not adjacent", c12.bond, c23.bond)));
    }
    Ok(())
}

/// Gauge-invariant synthetic flux through the four-state loop of the triple
/// spanned by two adjacent bonds, in `(−π, π]`.
pub fn loop_flux(c12: &EffectiveCoupling, c23: &EffectiveCoupling) -> Result<f64> {
    check_adjacent(c12, c23)?;
    let s = if c12.hopping_raises_left() { 1.0 } else { -1.0 };
    Ok(canonical_phase(s * (c12.phi_red - c23.phi_red) + c23.phi_blue - c12.phi_blue))
}

/// Fluxes `(upper, lower)` of the two triangles cut by the link between
/// `|110⟩` and `|011⟩` (triangle through `|000⟩`, triangle through `|101⟩`).
/// A value of π means the two paths into the apex cancel for the symmetric
/// state `(|110⟩+|011⟩)/√2`.
pub fn triangle_fluxes(c12: &EffectiveCoupling, c23: &EffectiveCoupling) -> Result<(f64, f64)> {
    check_adjacent(c12, c23)?;
    let upper = canonical_phase(c12.phi_blue - c23.phi_blue);
    let lower = if c12.hopping_raises_left() { c12.phi_red - c23.phi_red } else { c23.phi_red - c12.phi_red };
    Ok((upper, canonical_phase(lower)))
}

/// Apply `σⱼ⁺ → e^{iθⱼ}σⱼ⁺` to every bond.
pub fn gauge_transform(couplings: &[EffectiveCoupling], theta: &[f64]) -> Vec<EffectiveCoupling> {
    couplings
        .iter()
        .map(|c| {
            let (l, r) = (theta[c.bond], theta[c.bond + 1]);
            let (raised, lowered) = if c.hopping_raises_left() { (l, r) } else { (r, l) };
            EffectiveCoupling {
                phi_blue: canonical_phase(c.phi_blue - l - r),
                phi_red: canonical_phase(c.phi_red - raised + lowered),
                ..c.clone()
            }
        })
        .collect()
}

/// Local phases `θ` that bring every bond with vanishing loop fluxes to
/// `φ_b = φ_r = 0`, plus the residual phases left on the last bond.
/// `θ` has one entry per site.
pub fn aligning_gauge(couplings: &[EffectiveCoupling]) -> Vec<f64> {
    let n = couplings.len() + 1;
    let mut theta = vec![0.0; n];
    for c in couplings {
        let k = c.bond;
        // Zero the hopping phase by choosing θ_{k+1}.
        theta[k + 1] = if c.hopping_raises_left() { theta[k] - c.phi_red } else { theta[k] + c.phi_red };
    }
    // A common shift ψ on every site moves every φ_b by −2ψ and leaves φ_r.
    let residual: Vec<f64> = gauge_transform(couplings, &theta).iter().map(|c| c.phi_blue).collect();
    if let Some(&first) = residual.first() {
        let psi = first / 2.0;
        for t in theta.iter_mut() {
            *t += psi;
        }
    }
    theta
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qop::{hermitian_eigen, Spectrum};

    const G: f64 = 0.75;

    fn pauli2(a: SiteLabel, b: SiteLabel) -> Operator {
        let s = HilbertSpace::qubits(2);
        &site_operator(a, 0, &s).unwrap() * &site_operator(b, 1, &s).unwrap()
    }

    fn projection(h: &Operator, a: SiteLabel, b: SiteLabel) -> f64 {
        let p = pauli2(a, b);
        let t = (p.matrix() * h.matrix()).trace() / C64::new(4.0, 0.0);
        assert!(t.im.abs() < 1e-14);
        t.re / mhz_to_rad_ns(1.0)
    }

    #[test]
    fn canonical_phase_range() {
        assert_eq!(canonical_phase(PI), PI);
        assert!((canonical_phase(-PI) - PI).abs() < 1e-15);
        assert!((canonical_phase(3.0 * PI) - PI).abs() < 1e-12);
        assert!((canonical_phase(0.5 - 4.0 * TAU) - 0.5).abs() < 1e-12);
        assert_eq!(canonical_phase(0.0), 0.0);
    }

    #[test]
    fn xx_and_yy_cases() {
        let xx = effective_pair_hamiltonian(&EffectiveCoupling::new(0, G, 0.0, G, 0.0).unwrap());
        let want = pauli2(SiteLabel::X, SiteLabel::X).scale(C64::new(mhz_to_rad_ns(G), 0.0));
        assert!(xx.max_abs_diff(&want) < 1e-14);
        let yy = effective_pair_hamiltonian(&EffectiveCoupling::new(0, G, PI, G, 0.0).unwrap());
        let want = pauli2(SiteLabel::Y, SiteLabel::Y).scale(C64::new(mhz_to_rad_ns(G), 0.0));
        assert!(yy.max_abs_diff(&want) < 1e-14);
    }

    #[test]
    fn pairing_only_block_structure() {
        let h = effective_pair_hamiltonian(&EffectiveCoupling::new(0, G, 0.3, 0.0, 0.0).unwrap());
        let m = h.matrix();
        for i in [1, 2] {
            for j in 0..4 {
                assert_eq!(m[(i, j)].norm(), 0.0);
                assert_eq!(m[(j, i)].norm(), 0.0);
            }
        }
        assert!(m[(0, 3)].norm() > 0.0);
    }

    #[test]
    fn decomposition_examples() {
        let a = anisotropy_decompose(&EffectiveCoupling::new(0, G, 0.0, G, 0.0).unwrap());
        assert!((a.xx - G).abs() < 1e-15 && a.yy.abs() < 1e-15 && a.xy.abs() < 1e-15 && a.yx.abs() < 1e-15);
        let a = anisotropy_decompose(&EffectiveCoupling::new(0, G, PI, G, 0.0).unwrap());
        assert!(a.xx.abs() < 1e-15 && (a.yy - G).abs() < 1e-15 && a.xy.abs() < 1e-15 && a.yx.abs() < 1e-15);
        // φ_b = π/2 alone leaves half the strength on each of XX and YY.
        let a = anisotropy_decompose(&EffectiveCoupling::new(0, G, PI / 2.0, G, 0.0).unwrap());
        let want = [G / 2.0, G / 2.0, -G / 2.0, -G / 2.0];
        for (x, w) in a.as_array().iter().zip(want) {
            assert!((x - w).abs() < 1e-15, "{a:?}");
        }
        // Both phases at π/2: XX and YY vanish, cross terms carry g.
        let a = anisotropy_decompose(&EffectiveCoupling::new(0, G, PI / 2.0, G, PI / 2.0).unwrap());
        assert!(a.xx.abs() < 1e-15 && a.yy.abs() < 1e-15);
        assert!(a.xy.abs() < 1e-15 && (a.yx + G).abs() < 1e-15);
    }

    #[test]
    fn decomposition_matches_projection_oracle() {
        for bond in [0, 1] {
            for &(gb, pb, gr, pr) in &[(0.75, 0.3, 0.5, -1.1), (1.0, PI / 2.0, 1.0, 0.0), (0.2, -2.5, 0.9, 2.9)] {
                let c = EffectiveCoupling::new(bond, gb, pb, gr, pr).unwrap();
                let h = effective_pair_hamiltonian(&c);
                let a = anisotropy_decompose(&c);
                let oracle = [
                    projection(&h, SiteLabel::X, SiteLabel::X),
                    projection(&h, SiteLabel::Y, SiteLabel::Y),
                    projection(&h, SiteLabel::X, SiteLabel::Y),
                    projection(&h, SiteLabel::Y, SiteLabel::X),
                ];
                for (x, o) in a.as_array().iter().zip(oracle) {
                    assert!((x - o).abs() < 1e-12, "bond {bond}: {a:?} vs {oracle:?}");
                }
                assert!(a.reconstruct().max_abs_diff(&h) < 1e-15);
            }
        }
    }

    #[test]
    fn ising_examples() {
        let u = mhz_to_rad_ns(1.0);
        let ev = |h: Operator| {
            let mut v: Vec<f64> = hermitian_eigen(h.matrix()).eigenvalues.iter().map(|x| x / u).collect();
            v.sort_by(f64::total_cmp);
            v
        };
        let v = ev(ising_hamiltonian(2, 1.0, 0.0).unwrap());
        for (x, w) in v.iter().zip([-1.0, -1.0, 1.0, 1.0]) {
            assert!((x - w).abs() < 1e-12);
        }
        let v = ev(ising_hamiltonian(2, 0.0, 1.0).unwrap());
        for (x, w) in v.iter().zip([-2.0, 0.0, 0.0, 2.0]) {
            assert!((x - w).abs() < 1e-12);
        }
        assert!(ising_hamiltonian(1, 1.0, 1.0).is_err());
    }

    #[test]
    fn chain_of_two_is_the_pair() {
        let c = EffectiveCoupling::new(0, 0.4, 0.7, 0.9, -0.2).unwrap();
        let cfg = ChainConfig { n_qubits: 2, couplings: vec![c.clone()], detuning_blue_mhz: 0.0 };
        assert!(effective_chain_hamiltonian(&cfg).unwrap().max_abs_diff(&effective_pair_hamiltonian(&c)) < 1e-15);
    }

    #[test]
    fn six_site_chain_matches_ising_spectrum() {
        let cfg = ChainConfig::uniform_xx(6, 0.75, 3.0);
        let a = Spectrum::of(&effective_chain_hamiltonian(&cfg).unwrap()).unwrap();
        let b = Spectrum::of(&ising_hamiltonian(6, 0.75, 0.75).unwrap()).unwrap();
        let (mut x, mut y) = (a.values, b.values);
        x.sort_by(f64::total_cmp);
        y.sort_by(f64::total_cmp);
        for (p, q) in x.iter().zip(&y) {
            assert!((p - q).abs() < 1e-12);
        }
    }

    fn loop_product_phase(n: usize, k: usize, h: &Operator) -> f64 {
        let s = h.space();
        let lab = |bits: [u8; 3]| {
            let mut l = vec!['0'; n];
            for (o, b) in bits.iter().enumerate() {
                l[k + o] = char::from(b'0' + b);
            }
            s.label_index(&l.iter().collect::<String>()).unwrap()
        };
        let (a, b, c, d) = (lab([0, 0, 0]), lab([1, 1, 0]), lab([1, 0, 1]), lab([0, 1, 1]));
        let m = h.matrix();
        (m[(b, a)] * m[(c, b)] * m[(d, c)] * m[(a, d)]).arg()
    }

    #[test]
    fn loop_flux_matches_matrix_element_oracle() {
        let phases = [(0.3, -1.2, 2.0, 0.4), (PI, 0.0, 0.0, 0.0), (-2.2, 1.7, -0.6, 3.0)];
        for k in 0..4 {
            for &(pb1, pr1, pb2, pr2) in &phases {
                let n = k + 3;
                let mut cs: Vec<EffectiveCoupling> = (0..n - 1).map(|b| EffectiveCoupling::xx(b, 0.0)).collect();
                cs[k] = EffectiveCoupling::new(k, G, pb1, G, pr1).unwrap();
                cs[k + 1] = EffectiveCoupling::new(k + 1, G, pb2, G, pr2).unwrap();
                let h = effective_chain_hamiltonian(&ChainConfig { n_qubits: n, couplings: cs.clone(), detuning_blue_mhz: 0.0 }).unwrap();
                let oracle = canonical_phase(loop_product_phase(n, k, &h));
                let phi = loop_flux(&cs[k], &cs[k + 1]).unwrap();
                assert!(canonical_phase(phi - oracle).abs() < 1e-12, "k={k}: {phi} vs {oracle}");
            }
        }
    }

    #[test]
    fn loop_flux_examples() {
        let z = |b| EffectiveCoupling::xx(b, G);
        assert_eq!(loop_flux(&z(0), &z(1)).unwrap(), 0.0);
        let c12 = EffectiveCoupling::new(0, G, PI, G, 0.0).unwrap();
        assert!((loop_flux(&c12, &z(1)).unwrap() - PI).abs() < 1e-15);
        let h = PI / 2.0;
        let c12 = EffectiveCoupling::new(0, G, h, G, -h).unwrap();
        let c23 = EffectiveCoupling::new(1, G, -h, G, h).unwrap();
        let (up, low) = triangle_fluxes(&c12, &c23).unwrap();
        assert!((up - PI).abs() < 1e-15 && (low - PI).abs() < 1e-15);
        assert!(loop_flux(&c12, &c23).unwrap().abs() < 1e-15);
        assert!(loop_flux(&z(0), &z(2)).is_err());
    }

    #[test]
    fn triangle_fluxes_match_matrix_elements() {
        let c12 = EffectiveCoupling::new(0, G, 0.4, G, -1.3).unwrap();
        let c23 = EffectiveCoupling::new(1, G, 2.2, G, 0.9).unwrap();
        let h = effective_chain_hamiltonian(&ChainConfig { n_qubits: 3, couplings: vec![c12.clone(), c23.clone()], detuning_blue_mhz: 0.0 }).unwrap();
        let s = h.space();
        let m = h.matrix();
        let i = |l: &str| s.label_index(l).unwrap();
        let up = (m[(i("000"), i("110"))] / m[(i("000"), i("011"))]).arg();
        let low = (m[(i("101"), i("110"))] / m[(i("101"), i("011"))]).arg();
        let (u, l) = triangle_fluxes(&c12, &c23).unwrap();
        assert!(canonical_phase(u - up).abs() < 1e-12);
        assert!(canonical_phase(l - low).abs() < 1e-12);
    }

    #[test]
    fn gauge_transform_is_a_unitary_rotation() {
        let cs = vec![EffectiveCoupling::new(0, 0.5, 0.3, 0.8, -0.7).unwrap(), EffectiveCoupling::new(1, 0.6, 1.9, 0.4, 2.5).unwrap()];
        let theta = [0.4, -1.1, 2.3];
        let cfg = ChainConfig { n_qubits: 3, couplings: cs.clone(), detuning_blue_mhz: 1.0 };
        let h = effective_chain_hamiltonian(&cfg).unwrap();
        let h2 = effective_chain_hamiltonian(&ChainConfig { couplings: gauge_transform(&cs, &theta), ..cfg }).unwrap();
        let s = h.space();
        let u = CMatrix::from_diagonal(&nalgebra::DVector::from_fn(8, |idx, _| {
            let d = s.digits(idx);
            C64::from_polar(1.0, (0..3).map(|j| theta[j] * d[j] as f64).sum())
        }));
        let rotated = &u * h.matrix() * u.adjoint();
        assert!((rotated - h2.matrix()).iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-15);
        assert!((loop_flux(&cs[0], &cs[1]).unwrap() - {
            let g = gauge_transform(&cs, &theta);
            loop_flux(&g[0], &g[1]).unwrap()
        })
        .abs()
            < 1e-12);
    }

    #[test]
    fn aligning_gauge_makes_zero_flux_chain_pure_xx() {
        let cs: Vec<EffectiveCoupling> = vec![
            EffectiveCoupling::new(0, G, 0.0, G, 0.0).unwrap(),
            EffectiveCoupling::new(1, G, 0.0, G, 0.0).unwrap(),
            EffectiveCoupling::new(2, G, 0.0, G, 0.0).unwrap(),
        ];
        let scrambled = gauge_transform(&cs, &[1.3, -0.4, 2.9, 0.6]);
        let theta = aligning_gauge(&scrambled);
        for c in gauge_transform(&scrambled, &theta) {
            let a = anisotropy_decompose(&c);
            assert!((a.xx - G).abs() < 1e-12 && a.yy.abs() < 1e-12, "{c:?}");
        }
    }
}
