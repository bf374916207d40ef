//! Brute-force dense-matrix ground truth.
//!
//! Everything here works on explicit `2^n × 2^n` complex matrices assembled
//! from Kronecker products of spin operators, and is meant to cross-check the
//! closed forms in [`crate::spectrum`]. The basis is little-endian: bit `j`
//! of a row index is the state of qubit `j`, with 0 = spin up along z.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::ser::{Serialize, SerializeStruct, Serializer};

use crate::boolfn::{walsh_beta, SignFunction};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from_seed};
use crate::spectrum::{full_spectrum, AngleConfig};

/// Party-count cap for dense work (`4^n` complex entries).
pub const DENSE_MAX_N: usize = 10;

/// Slack allowed above 1 by [`separable_bound_check`].
pub const SEPARABLE_SLACK: f64 = 1e-9;

/// Eigenpair residual threshold, relative to the operator norm.
pub const RESIDUAL_REL_TOL: f64 = 1e-10;

const HERMITIAN_TOL: f64 = 1e-14;
const PRODUCT_NORM_TOL: f64 = 1e-12;
const PRODUCT_NORM_MAX_ITERS: usize = 10_000;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// A dense Hermitian matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseHermitian {
    dim: usize,
    entries: Vec<Complex64>,
}

impl DenseHermitian {
    pub fn new(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if !dim.is_power_of_two() {
            return Err(Error::InvalidInput(format!(
                "dimension {dim} is not a power of two"
            )));
        }
        if entries.len() != dim * dim {
            return Err(Error::InvalidInput(
                "entry count does not match dimension".into(),
            ));
        }
        for i in 0..dim {
            for j in i..dim {
                if (entries[i * dim + j] - entries[j * dim + i].conj()).norm() > HERMITIAN_TOL {
                    return Err(Error::InvalidInput(format!(
                        "matrix is not Hermitian at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(DenseHermitian { dim, entries })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        let mut entries = vec![ZERO; dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = ONE;
        }
        DenseHermitian::new(dim, entries)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of qubits, `log2(dim)`.
    pub fn qubits(&self) -> usize {
        self.dim.trailing_zeros() as usize
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.dim + j]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        self.entries
            .chunks_exact(self.dim)
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Real part of `⟨ψ|H|ψ⟩` (the imaginary part vanishes for Hermitian `H`).
    pub fn expectation(&self, psi: &[Complex64]) -> f64 {
        inner(psi, &self.apply(psi)).re
    }

    pub fn frobenius(&self) -> f64 {
        self.entries
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.dim).map(|i| self.get(i, j)).collect()
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &DenseHermitian) -> DenseHermitian {
        let (da, db) = (self.dim, other.dim);
        let dim = da * db;
        let mut entries = vec![ZERO; dim * dim];
        for i in 0..da {
            for j in 0..da {
                let a = self.get(i, j);
                if a == ZERO {
                    continue;
                }
                for k in 0..db {
                    for l in 0..db {
                        entries[(i * db + k) * dim + j * db + l] = a * other.get(k, l);
                    }
                }
            }
        }
        DenseHermitian { dim, entries }
    }
}

impl Serialize for DenseHermitian {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> = self
            .entries
            .chunks_exact(self.dim)
            .map(|row| row.iter().map(|z| [z.re, z.im]).collect())
            .collect();
        let mut st = serializer.serialize_struct("DenseHermitian", 3)?;
        st.serialize_field("schema", &1)?;
        st.serialize_field("dim", &self.dim)?;
        st.serialize_field("entries", &rows)?;
        st.end()
    }
}

fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `cos θ σ_x + sin θ σ_y`.
pub fn spin_operator(theta: f64) -> DenseHermitian {
    let lower = Complex64::cis(theta);
    DenseHermitian {
        dim: 2,
        entries: vec![ZERO, lower.conj(), lower, ZERO],
    }
}

fn check_dense(what: &'static str, n: usize) -> Result<()> {
    if n > DENSE_MAX_N {
        return Err(Error::TooLarge {
            what,
            n,
            limit: DENSE_MAX_N,
        });
    }
    Ok(())
}

/// `σ(θ^1_{s_1}) ⊗ ... ⊗ σ(θ^n_{s_n})` in the little-endian basis.
pub fn correlation_operator(angles: &AngleConfig, s: usize) -> Result<DenseHermitian> {
    check_dense("correlation operator", angles.n())?;
    let mut m = spin_operator(angles.get(0, s & 1));
    for j in 1..angles.n() {
        m = spin_operator(angles.get(j, s >> j & 1)).kron(&m);
    }
    Ok(m)
}

/// `W_f = Σ_s β(s) σ(θ^1_{s_1}) ⊗ ... ⊗ σ(θ^n_{s_n})`.
pub fn build_dense(f: &SignFunction, angles: &AngleConfig) -> Result<DenseHermitian> {
    let n = f.n();
    check_dense("dense operator", n)?;
    if angles.n() != n {
        return Err(Error::InvalidInput("angle count does not match n".into()));
    }
    let beta = walsh_beta(f);
    let dim = 1usize << n;
    let mut entries = vec![ZERO; dim * dim];
    for (s, &c) in beta.numerators().iter().enumerate() {
        if c == 0 {
            continue;
        }
        let weight = c as f64 / beta.denominator() as f64;
        let term = correlation_operator(angles, s)?;
        for (e, t) in entries.iter_mut().zip(&term.entries) {
            *e += t * weight;
        }
    }
    Ok(DenseHermitian { dim, entries })
}

/// Eigen-decomposition; `vectors[k]` belongs to `values[k]`.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<Complex64>>,
}

/// Hermitian eigen-decomposition by cyclic complex Jacobi rotations.
///
/// Each rotation first removes the phase of `a_pq` with a diagonal unitary and
/// then applies the real symmetric Jacobi rotation to the `(p, q)` block.
/// Every returned pair is checked against `‖Hv - λv‖ ≤ 1e-10 ‖H‖`.
pub fn eigh(h: &DenseHermitian) -> Result<Eigen> {
    let d = h.dim;
    let mut a = h.entries.clone();
    let mut v = DenseHermitian::identity(d)?.entries;
    let scale = h.frobenius();
    let mut converged = scale == 0.0;
    for _sweep in 0..100 {
        if converged {
            break;
        }
        let off: f64 = (0..d)
            .flat_map(|i| (0..d).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * d + j].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            converged = true;
            break;
        }
        for p in 0..d {
            for q in p + 1..d {
                let apq = a[p * d + q];
                let mag = apq.norm();
                if mag <= 1e-300 {
                    continue;
                }
                let phase = apq / mag;
                let (app, aqq) = (a[p * d + p].re, a[q * d + q].re);
                let theta = (aqq - app) / (2.0 * mag);
                let t = if theta == 0.0 {
                    1.0
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let cp = phase.conj();
                for k in 0..d {
                    let (akp, akq) = (a[k * d + p], a[k * d + q]);
                    a[k * d + p] = akp * c - cp * akq * s;
                    a[k * d + q] = akp * s + cp * akq * c;
                    let (vkp, vkq) = (v[k * d + p], v[k * d + q]);
                    v[k * d + p] = vkp * c - cp * vkq * s;
                    v[k * d + q] = vkp * s + cp * vkq * c;
                }
                for k in 0..d {
                    let (apk, aqk) = (a[p * d + k], a[q * d + k]);
                    a[p * d + k] = apk * c - phase * aqk * s;
                    a[q * d + k] = apk * s + phase * aqk * c;
                }
                a[p * d + q] = ZERO;
                a[q * d + p] = ZERO;
                a[p * d + p] = Complex64::new(a[p * d + p].re, 0.0);
                a[q * d + q] = Complex64::new(a[q * d + q].re, 0.0);
            }
        }
    }
    if !converged {
        return Err(Error::NumericalFailure(
            "Jacobi sweeps did not converge".into(),
        ));
    }
    let values: Vec<f64> = (0..d).map(|i| a[i * d + i].re).collect();
    let vectors: Vec<Vec<Complex64>> = (0..d)
        .map(|k| (0..d).map(|i| v[i * d + k]).collect())
        .collect();
    let op_norm = values.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    for (lambda, vec) in values.iter().zip(&vectors) {
        let hv = h.apply(vec);
        let residual = norm(
            &hv.iter()
                .zip(vec)
                .map(|(x, y)| x - y * lambda)
                .collect::<Vec<_>>(),
        );
        if residual > RESIDUAL_REL_TOL * op_norm {
            return Err(Error::NumericalFailure(format!(
                "eigenpair residual {residual:e} exceeds {:e}",
                RESIDUAL_REL_TOL * op_norm
            )));
        }
    }
    Ok(Eigen { values, vectors })
}

/// `{|λ|}` of `H`, sorted descending.
pub fn eigen_magnitudes(h: &DenseHermitian) -> Result<Vec<f64>> {
    let mut mags: Vec<f64> = eigh(h)?.values.iter().map(|x| x.abs()).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    Ok(mags)
}

fn basis_pair(dim: usize, idx: usize, partner: usize, phase: f64) -> Vec<Complex64> {
    let mut psi = vec![ZERO; dim];
    psi[idx] = Complex64::cis(phase) * FRAC_1_SQRT_2;
    psi[partner] = Complex64::new(FRAC_1_SQRT_2, 0.0);
    psi
}

/// GHZ-form eigenvectors `(e^{iΘ}|ω⟩ + |-ω⟩)/√2` with eigenvalue `+|λ(ω)|`
/// and `(e^{i(Θ+π)}|ω⟩ + |-ω⟩)/√2` with `-|λ(ω)|`, one pair per `{ω, -ω}`.
pub fn ghz_basis(f: &SignFunction, angles: &AngleConfig) -> Result<Vec<(Vec<Complex64>, f64)>> {
    let n = f.n();
    check_dense("GHZ basis", n)?;
    let spectrum = full_spectrum(f, angles)?;
    let dim = 1usize << n;
    let top = dim >> 1;
    let mut out = Vec::with_capacity(dim);
    for idx in 0..top {
        let e = &spectrum.entries[idx];
        let partner = idx ^ (dim - 1);
        out.push((basis_pair(dim, idx, partner, e.phase), e.magnitude));
        out.push((basis_pair(dim, idx, partner, e.phase + PI), -e.magnitude));
    }
    Ok(out)
}

/// Largest `|⟨v_i|v_j⟩ - δ_ij|` over a set of vectors.
pub fn gram_deviation(vectors: &[Vec<Complex64>]) -> f64 {
    let mut worst = 0.0f64;
    for (i, a) in vectors.iter().enumerate() {
        for (j, b) in vectors.iter().enumerate() {
            let target = if i == j { ONE } else { ZERO };
            worst = worst.max((inner(a, b) - target).norm());
        }
    }
    worst
}

/// Largest `‖WΨ - λΨ‖` over both GHZ eigenvectors of every `ω`.
pub fn verify_ghz_eigenvectors(f: &SignFunction, angles: &AngleConfig) -> Result<f64> {
    let n = f.n();
    check_dense("GHZ verification", n)?;
    let w = build_dense(f, angles)?;
    let spectrum = full_spectrum(f, angles)?;
    let dim = w.dim;
    let mut worst = 0.0f64;
    for (idx, e) in spectrum.entries.iter().enumerate() {
        let partner = idx ^ (dim - 1);
        let (col_w, col_p) = (w.column(idx), w.column(partner));
        for (phase, lambda) in [(e.phase, e.magnitude), (e.phase + PI, -e.magnitude)] {
            let psi = basis_pair(dim, idx, partner, phase);
            let c = Complex64::cis(phase) * FRAC_1_SQRT_2;
            let residual: f64 = col_w
                .iter()
                .zip(&col_p)
                .zip(&psi)
                .map(|((a, b), p)| (a * c + b * FRAC_1_SQRT_2 - p * lambda).norm_sqr())
                .sum::<f64>()
                .sqrt();
            worst = worst.max(residual);
        }
    }
    Ok(worst)
}

/// Pure product state `|α_1⟩ ⊗ ... ⊗ |α_n⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductState {
    locals: Vec<[Complex64; 2]>,
    vector: Vec<Complex64>,
}

impl ProductState {
    pub fn new(locals: Vec<[Complex64; 2]>) -> Result<Self> {
        if locals.is_empty() {
            return Err(Error::InvalidInput("product state of zero qubits".into()));
        }
        if let Some(bad) = locals.iter().find(|a| (norm(&a[..]) - 1.0).abs() > 1e-14) {
            return Err(Error::InvalidInput(format!(
                "local state {bad:?} is not normalized"
            )));
        }
        let vector = assemble(&locals);
        Ok(ProductState { locals, vector })
    }

    /// Each local state uniform on the Bloch sphere.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let locals: Vec<[Complex64; 2]> = (0..n).map(|_| haar_qubit(rng)).collect();
        let vector = assemble(&locals);
        ProductState { locals, vector }
    }

    pub fn locals(&self) -> &[[Complex64; 2]] {
        &self.locals
    }

    pub fn vector(&self) -> &[Complex64] {
        &self.vector
    }
}

fn haar_qubit<R: Rng + ?Sized>(rng: &mut R) -> [Complex64; 2] {
    loop {
        let z: [Complex64; 2] = std::array::from_fn(|_| {
            Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        let r = norm(&z);
        if r > 1e-12 {
            return [z[0] / r, z[1] / r];
        }
    }
}

fn assemble(locals: &[[Complex64; 2]]) -> Vec<Complex64> {
    let mut v = vec![ONE];
    for a in locals {
        let len = v.len();
        v.extend_from_within(..);
        for (i, x) in v.iter_mut().enumerate() {
            *x *= a[usize::from(i >= len)];
        }
    }
    v
}

/// Samples product states and returns the largest `|⟨Φ|W_f|Φ⟩|`.
///
/// Mixed separable states are convex combinations of pure product states, so
/// pure samples cover the bound.
pub fn separable_bound_check(
    f: &SignFunction,
    angles: &AngleConfig,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    let w = build_dense(f, angles)?;
    let mut rng = rng_from_seed(seed);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let phi = ProductState::random(f.n(), &mut rng);
        worst = worst.max(w.expectation(phi.vector()).abs());
    }
    if worst > 1.0 + SEPARABLE_SLACK {
        return Err(Error::BoundViolated { value: worst });
    }
    Ok(worst)
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct ProductNorm {
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// 2x2 Hermitian `[[p, z], [z*, r]]`: largest eigenvalue and a unit eigenvector.
fn principal_2x2(p: f64, z: Complex64, r: f64) -> (f64, [Complex64; 2]) {
    let half = 0.5 * (p - r);
    let lambda = 0.5 * (p + r) + (half * half + z.norm_sqr()).sqrt();
    if z.norm() <= 1e-300 {
        return if p >= r {
            (p, [ONE, ZERO])
        } else {
            (r, [ZERO, ONE])
        };
    }
    let v = [z, Complex64::new(lambda - p, 0.0)];
    let len = norm(&v);
    (lambda, [v[0] / len, v[1] / len])
}

/// Lower bound on `[[H]] = sup ‖H|α_1⟩...|α_n⟩‖` by alternating ascent.
///
/// With every site but `j` fixed, `‖HΦ‖^2 = ⟨α_j|M_j|α_j⟩` for a 2x2 positive
/// semidefinite `M_j`; `α_j` moves to its principal eigenvector.
pub fn product_norm(h: &DenseHermitian, restarts: usize, seed: u64) -> Result<ProductNorm> {
    let n = h.qubits();
    check_dense("product norm", n)?;
    if restarts == 0 {
        return Err(Error::InvalidInput("restarts must be at least 1".into()));
    }
    let mut best: Option<ProductNorm> = None;
    for r in 0..restarts {
        let mut rng = rng_from_seed(derive_seed(seed, r as u64));
        let mut locals: Vec<[Complex64; 2]> = (0..n).map(|_| haar_qubit(&mut rng)).collect();
        let mut value = norm(&h.apply(&assemble(&locals)));
        let mut converged = false;
        let mut iterations = 0;
        while iterations < PRODUCT_NORM_MAX_ITERS {
            iterations += 1;
            let before = value;
            for j in 0..n {
                let images: Vec<Vec<Complex64>> = [[ONE, ZERO], [ZERO, ONE]]
                    .into_iter()
                    .map(|e| {
                        locals[j] = e;
                        h.apply(&assemble(&locals))
                    })
                    .collect();
                let p = inner(&images[0], &images[0]).re;
                let z = inner(&images[0], &images[1]);
                let q = inner(&images[1], &images[1]).re;
                let (lambda, alpha) = principal_2x2(p, z, q);
                locals[j] = alpha;
                value = value.max(lambda.max(0.0).sqrt());
            }
            if value - before < PRODUCT_NORM_TOL {
                converged = true;
                break;
            }
        }
        let candidate = ProductNorm {
            value,
            iterations,
            converged,
        };
        if best.as_ref().is_none_or(|b| candidate.value > b.value) {
            best = Some(candidate);
        }
    }
    Ok(best.expect("restarts >= 1"))
}
