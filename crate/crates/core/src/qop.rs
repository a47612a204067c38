//! Dense tensor-product operators and quantum states.
//!
//! Conventions used everywhere in the crate:
//! * `σᶻ = diag(+1, −1)`, so `σᶻ|0⟩ = +|0⟩`.
//! * `σ⁺ = |1⟩⟨0|` raises the excitation number, `σ⁻ = |0⟩⟨1|`.
//! * `σʸ` is the standard Pauli matrix `[[0, −i], [i, 0]]`, which gives
//!   `σʸ = i(σ⁺ − σ⁻)` and `[σ⁺, σ⁻] = −σᶻ` under the two choices above.
//! * Site 0 is the most significant tensor factor; basis labels read
//!   left to right as site 0, site 1, ...
//! * Operator entries are angular frequencies in rad/ns.

use std::fmt;
use std::ops::{Add, Mul, Sub};
use std::str::FromStr;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Tolerance for accepting a matrix as Hermitian on input.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Tolerance for state normalization.
pub const NORM_TOL: f64 = 1e-9;

/// 2π·1e-3: MHz to rad/ns.
pub fn mhz_to_rad_ns(f_mhz: f64) -> f64 {
    f_mhz * std::f64::consts::TAU * 1e-3
}

/// 2π: GHz to rad/ns.
pub fn ghz_to_rad_ns(f_ghz: f64) -> f64 {
    f_ghz * std::f64::consts::TAU
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HilbertSpace {
    site_dims: Vec<usize>,
}

impl HilbertSpace {
    pub fn new(site_dims: Vec<usize>) -> Result<Self> {
        if site_dims.is_empty() {
            return Err(Error::InvalidSpace("no sites".into()));
        }
        if let Some(d) = site_dims.iter().find(|&&d| d < 2) {
            return Err(Error::InvalidSpace(format!("site dimension {d} < 2")));
        }
        Ok(Self { site_dims })
    }

    /// `n` two-level sites.
    pub fn qubits(n: usize) -> Self {
        Self::new(vec![2; n.max(1)]).expect("qubit space is valid")
    }

    pub fn site_dims(&self) -> &[usize] {
        &self.site_dims
    }

    pub fn n_sites(&self) -> usize {
        self.site_dims.len()
    }

    pub fn dim(&self) -> usize {
        self.site_dims.iter().product()
    }

    /// Index step of `site` in the flattened basis.
    pub fn stride(&self, site: usize) -> usize {
        self.site_dims[site + 1..].iter().product()
    }

    /// Per-site levels of a flattened basis index.
    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.n_sites()];
        for (k, &d) in self.site_dims.iter().enumerate().rev() {
            out[k] = index % d;
            index /= d;
        }
        out
    }

    pub fn index_of(&self, digits: &[usize]) -> Result<usize> {
        if digits.len() != self.n_sites() {
            return Err(Error::DimensionMismatch { expected: self.n_sites(), got: digits.len() });
        }
        let mut idx = 0;
        for (&x, &d) in digits.iter().zip(&self.site_dims) {
            if x >= d {
                return Err(Error::InvalidLabel(format!("level {x} on a site of dimension {d}")));
            }
            idx = idx * d + x;
        }
        Ok(idx)
    }

    /// Parse a label such as `"0110"` into a basis index.
    pub fn label_index(&self, label: &str) -> Result<usize> {
        let digits: Option<Vec<usize>> =
            label.chars().map(|c| c.to_digit(10).map(|d| d as usize)).collect();
        let digits = digits.ok_or_else(|| Error::InvalidLabel(label.to_string()))?;
        if digits.len() != self.n_sites() {
            return Err(Error::InvalidLabel(label.to_string()));
        }
        self.index_of(&digits).map_err(|_| Error::InvalidLabel(label.to_string()))
    }

    pub fn label(&self, index: usize) -> String {
        self.digits(index).iter().map(|d| char::from(b'0' + *d as u8)).collect()
    }

    pub fn labels(&self) -> Vec<String> {
        (0..self.dim()).map(|i| self.label(i)).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SiteLabel {
    Sp,
    Sm,
    X,
    Y,
    Z,
    Id,
    N,
}

impl FromStr for SiteLabel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "sp" => Self::Sp,
            "sm" => Self::Sm,
            "x" => Self::X,
            "y" => Self::Y,
            "z" => Self::Z,
            "id" => Self::Id,
            "n" => Self::N,
            _ => return Err(Error::InvalidLabel(s.to_string())),
        })
    }
}

impl fmt::Display for SiteLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::Sp => "sp",
            Self::Sm => "sm",
            Self::X => "x",
            Self::Y => "y",
            Self::Z => "z",
            Self::Id => "id",
            Self::N => "n",
        };
        f.write_str(s)
    }
}

/// Truncated lowering operator `a|k⟩ = √k |k−1⟩`.
pub fn lowering(dim: usize) -> CMatrix {
    let mut m = CMatrix::zeros(dim, dim);
    for k in 1..dim {
        m[(k - 1, k)] = C64::new((k as f64).sqrt(), 0.0);
    }
    m
}

/// Number operator `diag(0, 1, ..., dim−1)`.
pub fn number(dim: usize) -> CMatrix {
    CMatrix::from_diagonal(&DVector::from_fn(dim, |k, _| C64::new(k as f64, 0.0)))
}

/// Single-site matrix for `label`. Pauli-type labels act on the {|0⟩,|1⟩}
/// block and vanish on higher levels; `id` and `n` are full-dimension.
pub fn local_operator(label: SiteLabel, dim: usize) -> Result<CMatrix> {
    if !(2..=3).contains(&dim) {
        return Err(Error::LabelUndefined { label: label.to_string(), dim });
    }
    let mut m = CMatrix::zeros(dim, dim);
    match label {
        SiteLabel::Id => return Ok(CMatrix::identity(dim, dim)),
        SiteLabel::N => return Ok(number(dim)),
        SiteLabel::Sp => m[(1, 0)] = ONE,
        SiteLabel::Sm => m[(0, 1)] = ONE,
        SiteLabel::X => {
            m[(0, 1)] = ONE;
            m[(1, 0)] = ONE;
        }
        SiteLabel::Y => {
            m[(0, 1)] = -I;
            m[(1, 0)] = I;
        }
        SiteLabel::Z => {
            m[(0, 0)] = ONE;
            m[(1, 1)] = -ONE;
        }
    }
    Ok(m)
}

/// Dense operator on a `HilbertSpace`.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    space: HilbertSpace,
    matrix: CMatrix,
}

impl Operator {
    pub fn new(space: HilbertSpace, matrix: CMatrix) -> Result<Self> {
        let d = space.dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, got: matrix.nrows().max(matrix.ncols()) });
        }
        Ok(Self { space, matrix })
    }

    pub fn zeros(space: &HilbertSpace) -> Self {
        let d = space.dim();
        Self { space: space.clone(), matrix: CMatrix::zeros(d, d) }
    }

    pub fn identity(space: &HilbertSpace) -> Self {
        let d = space.dim();
        Self { space: space.clone(), matrix: CMatrix::identity(d, d) }
    }

    /// `𝟙 ⊗ … ⊗ local ⊗ … ⊗ 𝟙` with `local` at `site`.
    pub fn embed(local: &CMatrix, site: usize, space: &HilbertSpace) -> Result<Self> {
        let n = space.n_sites();
        if site >= n {
            return Err(Error::SiteOutOfRange { site, n_sites: n });
        }
        let d = space.site_dims()[site];
        if local.nrows() != d || local.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, got: local.nrows() });
        }
        let left: usize = space.site_dims()[..site].iter().product();
        let right = space.stride(site);
        let m = CMatrix::identity(left, left).kronecker(local).kronecker(&CMatrix::identity(right, right));
        Ok(Self { space: space.clone(), matrix: m })
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn dagger(&self) -> Self {
        Self { space: self.space.clone(), matrix: self.matrix.adjoint() }
    }

    pub fn scale(&self, c: C64) -> Self {
        Self { space: self.space.clone(), matrix: &self.matrix * c }
    }

    /// `‖H − H†‖_F / ‖H‖_F`, zero for the zero matrix.
    pub fn hermiticity_error(&self) -> f64 {
        let norm = self.matrix.norm();
        if norm == 0.0 {
            return 0.0;
        }
        (&self.matrix - self.matrix.adjoint()).norm() / norm
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_error() <= tol
    }

    /// Largest entrywise absolute difference.
    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        (&self.matrix - &other.matrix).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    fn check_same(&self, other: &Operator) {
        assert_eq!(self.space, other.space, "operators live on different spaces");
    }
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        self.check_same(rhs);
        Operator { space: self.space.clone(), matrix: &self.matrix + &rhs.matrix }
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        self.check_same(rhs);
        Operator { space: self.space.clone(), matrix: &self.matrix - &rhs.matrix }
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        self.check_same(rhs);
        Operator { space: self.space.clone(), matrix: &self.matrix * &rhs.matrix }
    }
}

impl Mul<f64> for &Operator {
    type Output = Operator;
    fn mul(self, rhs: f64) -> Operator {
        self.scale(C64::new(rhs, 0.0))
    }
}

impl Mul<C64> for &Operator {
    type Output = Operator;
    fn mul(self, rhs: C64) -> Operator {
        self.scale(rhs)
    }
}

pub fn site_operator(label: SiteLabel, site: usize, space: &HilbertSpace) -> Result<Operator> {
    let n = space.n_sites();
    if site >= n {
        return Err(Error::SiteOutOfRange { site, n_sites: n });
    }
    let local = local_operator(label, space.site_dims()[site])?;
    Operator::embed(&local, site, space)
}

#[derive(Clone, Debug, PartialEq)]
pub enum StateData {
    Pure(CVector),
    Mixed(CMatrix),
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuantumState {
    space: HilbertSpace,
    data: StateData,
}

impl QuantumState {
    pub fn pure(space: &HilbertSpace, psi: CVector) -> Result<Self> {
        if psi.len() != space.dim() {
            return Err(Error::DimensionMismatch { expected: space.dim(), got: psi.len() });
        }
        let dev = (psi.norm() - 1.0).abs();
        if dev > NORM_TOL {
            return Err(Error::NotNormalized(dev));
        }
        Ok(Self { space: space.clone(), data: StateData::Pure(psi) })
    }

    /// Normalizes `psi` before wrapping it.
    pub fn normalized(space: &HilbertSpace, psi: CVector) -> Result<Self> {
        let n = psi.norm();
        if n == 0.0 {
            return Err(Error::NotNormalized(1.0));
        }
        Self::pure(space, psi / C64::new(n, 0.0))
    }

    pub fn mixed(space: &HilbertSpace, rho: CMatrix) -> Result<Self> {
        let d = space.dim();
        if rho.nrows() != d || rho.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, got: rho.nrows() });
        }
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > NORM_TOL || tr.im.abs() > NORM_TOL {
            return Err(Error::InvalidDensityMatrix(format!("trace {tr}")));
        }
        let herm = (&rho - rho.adjoint()).norm();
        if herm > NORM_TOL {
            return Err(Error::InvalidDensityMatrix(format!("non-Hermitian by {herm:.3e}")));
        }
        let min = hermitian_eigen(&rho).eigenvalues.min();
        if min < -NORM_TOL {
            return Err(Error::InvalidDensityMatrix(format!("eigenvalue {min:.3e}")));
        }
        Ok(Self { space: space.clone(), data: StateData::Mixed(rho) })
    }

    pub fn basis(space: &HilbertSpace, index: usize) -> Result<Self> {
        if index >= space.dim() {
            return Err(Error::InvalidLabel(format!("basis index {index}")));
        }
        let mut v = CVector::zeros(space.dim());
        v[index] = ONE;
        Ok(Self { space: space.clone(), data: StateData::Pure(v) })
    }

    pub fn from_label(space: &HilbertSpace, label: &str) -> Result<Self> {
        Self::basis(space, space.label_index(label)?)
    }

    /// Equal superposition of the labelled basis states with the given coefficients.
    pub fn superposition(space: &HilbertSpace, terms: &[(C64, &str)]) -> Result<Self> {
        let mut v = CVector::zeros(space.dim());
        for (c, label) in terms {
            v[space.label_index(label)?] += *c;
        }
        Self::normalized(space, v)
    }

    /// Tensor product of single-site vectors.
    pub fn product(space: &HilbertSpace, locals: &[CVector]) -> Result<Self> {
        if locals.len() != space.n_sites() {
            return Err(Error::DimensionMismatch { expected: space.n_sites(), got: locals.len() });
        }
        let mut v = CVector::from_element(1, ONE);
        for (l, &d) in locals.iter().zip(space.site_dims()) {
            if l.len() != d {
                return Err(Error::DimensionMismatch { expected: d, got: l.len() });
            }
            v = v.kronecker(l);
        }
        Self::normalized(space, v)
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn data(&self) -> &StateData {
        &self.data
    }

    pub fn is_pure(&self) -> bool {
        matches!(self.data, StateData::Pure(_))
    }

    pub fn vector(&self) -> Option<&CVector> {
        match &self.data {
            StateData::Pure(v) => Some(v),
            StateData::Mixed(_) => None,
        }
    }

    pub fn density(&self) -> CMatrix {
        match &self.data {
            StateData::Pure(v) => v * v.adjoint(),
            StateData::Mixed(r) => r.clone(),
        }
    }

    pub fn to_mixed(&self) -> Self {
        Self { space: self.space.clone(), data: StateData::Mixed(self.density()) }
    }

    /// Diagonal in the computational basis.
    pub fn populations(&self) -> Vec<f64> {
        match &self.data {
            StateData::Pure(v) => v.iter().map(|z| z.norm_sqr()).collect(),
            StateData::Mixed(r) => (0..r.nrows()).map(|k| r[(k, k)].re).collect(),
        }
    }

    pub(crate) fn from_parts_unchecked(space: HilbertSpace, data: StateData) -> Self {
        Self { space, data }
    }
}

pub fn expectation(state: &QuantumState, op: &Operator) -> Result<C64> {
    let d = state.space.dim();
    if op.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, got: op.dim() });
    }
    Ok(match &state.data {
        StateData::Pure(v) => v.dotc(&(op.matrix() * v)),
        StateData::Mixed(r) => (r * op.matrix()).trace(),
    })
}

/// `|⟨ψ|φ⟩|²` for pure states, Uhlmann fidelity `(Tr √(√ρ σ √ρ))²` otherwise.
pub fn fidelity(a: &QuantumState, b: &QuantumState) -> Result<f64> {
    let d = a.space.dim();
    if b.space.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, got: b.space.dim() });
    }
    let f = match (&a.data, &b.data) {
        (StateData::Pure(x), StateData::Pure(y)) => x.dotc(y).norm_sqr(),
        (StateData::Pure(x), StateData::Mixed(r)) | (StateData::Mixed(r), StateData::Pure(x)) => {
            x.dotc(&(r * x)).re
        }
        (StateData::Mixed(r), StateData::Mixed(s)) => {
            let sr = hermitian_function(r, |l| l.max(0.0).sqrt());
            let m = &sr * s * &sr;
            let ev = hermitian_eigen(&m).eigenvalues;
            let t: f64 = ev.iter().map(|l| l.max(0.0).sqrt()).sum();
            t * t
        }
    };
    Ok(f.clamp(0.0, 1.0))
}

/// Eigendecomposition of a Hermitian matrix (the input is symmetrized first).
pub fn hermitian_eigen(m: &CMatrix) -> SymmetricEigen<C64, nalgebra::Dyn> {
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    SymmetricEigen::new(h)
}

/// `f(M)` for Hermitian `M` through its eigendecomposition.
pub fn hermitian_function(m: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let e = hermitian_eigen(m);
    let d = DVector::from_iterator(e.eigenvalues.len(), e.eigenvalues.iter().map(|&l| C64::new(f(l), 0.0)));
    scale_columns(&e.eigenvectors, &d) * e.eigenvectors.adjoint()
}

fn scale_columns(v: &CMatrix, d: &CVector) -> CMatrix {
    let mut out = v.clone();
    for (j, mut col) in out.column_iter_mut().enumerate() {
        col *= d[j];
    }
    out
}

/// `exp(−i H τ)` for Hermitian `H`.
pub fn unitary_exp(h: &CMatrix, tau: f64) -> CMatrix {
    let e = hermitian_eigen(h);
    let d = CVector::from_iterator(e.eigenvalues.len(), e.eigenvalues.iter().map(|&l| C64::from_polar(1.0, -l * tau)));
    scale_columns(&e.eigenvectors, &d) * e.eigenvectors.adjoint()
}

/// Cached eigendecomposition of a time-independent Hamiltonian.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl Spectrum {
    pub fn of(h: &Operator) -> Result<Self> {
        let err = h.hermiticity_error();
        if err > HERMITIAN_TOL {
            return Err(Error::NotHermitian(err));
        }
        let e = hermitian_eigen(h.matrix());
        Ok(Self { values: e.eigenvalues.iter().copied().collect(), vectors: e.eigenvectors })
    }

    pub fn propagator(&self, t: f64) -> CMatrix {
        let d = CVector::from_iterator(self.values.len(), self.values.iter().map(|&l| C64::from_polar(1.0, -l * t)));
        scale_columns(&self.vectors, &d) * self.vectors.adjoint()
    }

    /// Expansion coefficients `V†ψ`.
    pub fn coefficients(&self, psi: &CVector) -> CVector {
        self.vectors.adjoint() * psi
    }

    /// `e^{−iHt}ψ` from precomputed coefficients.
    pub fn evolve_coefficients(&self, coeffs: &CVector, t: f64) -> CVector {
        let phased =
            CVector::from_iterator(coeffs.len(), coeffs.iter().zip(&self.values).map(|(c, &l)| c * C64::from_polar(1.0, -l * t)));
        &self.vectors * phased
    }

    /// Largest minus smallest eigenvalue.
    pub fn spread(&self) -> f64 {
        let max = self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = self.values.iter().copied().fold(f64::INFINITY, f64::min);
        max - min
    }
}

/// `U = exp(−i h t)`.
pub fn matrix_exponential_propagator(h: &Operator, t: f64) -> Result<Operator> {
    let s = Spectrum::of(h)?;
    Operator::new(h.space().clone(), s.propagator(t))
}

/// `exp(M)` for a general square matrix by scaling and squaring with a Taylor core.
pub fn expm(m: &CMatrix) -> CMatrix {
    let n = m.nrows();
    let norm = m.iter().map(|z| z.norm()).sum::<f64>().max(1e-300);
    let s = (norm / 0.25).log2().ceil().max(0.0) as i32;
    let a = m / C64::new(2f64.powi(s), 0.0);
    let mut term = CMatrix::identity(n, n);
    let mut sum = term.clone();
    for k in 1..=20 {
        term = &term * &a / C64::new(k as f64, 0.0);
        sum += &term;
        if term.iter().map(|z| z.norm()).sum::<f64>() < 1e-18 {
            break;
        }
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: usize) -> HilbertSpace {
        HilbertSpace::qubits(n)
    }

    #[test]
    fn sz_convention() {
        let z = site_operator(SiteLabel::Z, 0, &q(1)).unwrap();
        assert_eq!(z.matrix()[(0, 0)], ONE);
        assert_eq!(z.matrix()[(1, 1)], -ONE);
    }

    #[test]
    fn sp_on_second_site_maps_10_to_11() {
        let s = q(2);
        let sp = site_operator(SiteLabel::Sp, 1, &s).unwrap();
        let nz: Vec<_> = sp.matrix().iter().filter(|z| z.norm() > 0.0).collect();
        assert_eq!(nz.len(), 2);
        assert_eq!(sp.matrix()[(s.label_index("11").unwrap(), s.label_index("10").unwrap())], ONE);
        assert_eq!(sp.matrix()[(s.label_index("01").unwrap(), s.label_index("00").unwrap())], ONE);
    }

    #[test]
    fn x_squared_is_identity() {
        let s = q(2);
        let x = site_operator(SiteLabel::X, 0, &s).unwrap();
        assert!((&x * &x).max_abs_diff(&Operator::identity(&s)) < 1e-15);
    }

    #[test]
    fn site_errors() {
        assert!(matches!(site_operator(SiteLabel::X, 2, &q(2)), Err(Error::SiteOutOfRange { .. })));
        let s4 = HilbertSpace::new(vec![4]).unwrap();
        assert!(matches!(site_operator(SiteLabel::X, 0, &s4), Err(Error::LabelUndefined { .. })));
        assert!(HilbertSpace::new(vec![2, 1]).is_err());
    }

    #[test]
    fn three_level_site_pads_pauli() {
        let s = HilbertSpace::new(vec![3]).unwrap();
        let x = site_operator(SiteLabel::X, 0, &s).unwrap();
        assert_eq!(x.matrix()[(2, 2)], ZERO);
        assert_eq!(x.matrix()[(1, 2)], ZERO);
        let n = site_operator(SiteLabel::N, 0, &s).unwrap();
        assert_eq!(n.matrix()[(2, 2)], C64::new(2.0, 0.0));
    }

    #[test]
    fn expectation_examples() {
        let s = q(2);
        let zz = &site_operator(SiteLabel::Z, 0, &s).unwrap() * &site_operator(SiteLabel::Z, 1, &s).unwrap();
        let e00 = expectation(&QuantumState::from_label(&s, "00").unwrap(), &zz).unwrap();
        let e01 = expectation(&QuantumState::from_label(&s, "01").unwrap(), &zz).unwrap();
        assert!((e00 - ONE).norm() < 1e-15);
        assert!((e01 + ONE).norm() < 1e-15);
        let s1 = q(1);
        let plus = QuantumState::superposition(&s1, &[(ONE, "0"), (ONE, "1")]).unwrap();
        let x = site_operator(SiteLabel::X, 0, &s1).unwrap();
        assert!((expectation(&plus, &x).unwrap() - ONE).norm() < 1e-15);
        assert!((expectation(&plus.to_mixed(), &x).unwrap() - ONE).norm() < 1e-15);
    }

    #[test]
    fn fidelity_examples() {
        let s = q(2);
        let a = QuantumState::from_label(&s, "00").unwrap();
        let b = QuantumState::from_label(&s, "11").unwrap();
        assert!((fidelity(&a, &a).unwrap() - 1.0).abs() < 1e-15);
        assert!(fidelity(&a, &b).unwrap().abs() < 1e-15);
        let s1 = q(1);
        let z = QuantumState::from_label(&s1, "0").unwrap();
        let plus = QuantumState::superposition(&s1, &[(ONE, "0"), (ONE, "1")]).unwrap();
        assert!((fidelity(&z, &plus).unwrap() - 0.5).abs() < 1e-15);
        assert!((fidelity(&z.to_mixed(), &plus.to_mixed()).unwrap() - 0.5).abs() < 1e-12);
        assert!((fidelity(&plus.to_mixed(), &z).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn mixed_state_validation() {
        let s = q(1);
        let half = CMatrix::identity(2, 2) * C64::new(0.5, 0.0);
        assert!(QuantumState::mixed(&s, half).is_ok());
        let bad = CMatrix::from_diagonal(&CVector::from_vec(vec![C64::new(1.2, 0.0), C64::new(-0.2, 0.0)]));
        assert!(QuantumState::mixed(&s, bad).is_err());
        assert!(QuantumState::pure(&s, CVector::from_vec(vec![ONE, ONE])).is_err());
    }

    #[test]
    fn propagator_examples() {
        let s = q(1);
        let u = matrix_exponential_propagator(&Operator::zeros(&s), 3.7).unwrap();
        assert!(u.max_abs_diff(&Operator::identity(&s)) < 1e-15);
        let x = site_operator(SiteLabel::X, 0, &s).unwrap();
        let u = matrix_exponential_propagator(&(&x * std::f64::consts::FRAC_PI_2), 1.0).unwrap();
        let expect = x.scale(-I);
        assert!(u.max_abs_diff(&expect) < 1e-14);
        let mut h = CMatrix::zeros(2, 2);
        h[(0, 1)] = ONE;
        assert!(matches!(
            matrix_exponential_propagator(&Operator::new(s.clone(), h).unwrap(), 1.0),
            Err(Error::NotHermitian(_))
        ));
    }

    #[test]
    fn expm_matches_unitary_exp() {
        let s = q(2);
        let h = &(&site_operator(SiteLabel::X, 0, &s).unwrap() * &site_operator(SiteLabel::Y, 1, &s).unwrap())
            + &(&site_operator(SiteLabel::Z, 1, &s).unwrap() * 0.7);
        let a = unitary_exp(h.matrix(), 2.3);
        let b = expm(&(h.matrix() * C64::new(0.0, -2.3)));
        assert!((a - b).iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-12);
    }

    #[test]
    fn labels_roundtrip() {
        let s = HilbertSpace::new(vec![2, 3, 2]).unwrap();
        for i in 0..s.dim() {
            assert_eq!(s.label_index(&s.label(i)).unwrap(), i);
        }
        assert!(s.label_index("030").is_err());
        assert!(s.label_index("01").is_err());
    }
}
