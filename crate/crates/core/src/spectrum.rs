//! Closed-form spectra of Werner-Wolf operators and maximization of their
//! norm over measurement angles.
//!
//! With every direction in the x-y plane, the operator built from `f` maps the
//! basis state `|ω⟩` to `S(ω)|-ω⟩` where
//! `S(ω) = Σ_s β(s) exp(i Σ_j ω_j θ^j_{s_j})`. Each pair `{ω, -ω}` is an
//! invariant two-dimensional block with eigenvalues `±|S(ω)|`, so the whole
//! spectrum is available without diagonalizing anything.
//!
//! The operator norm maximized over angles equals the maximum of `|P(t)|`
//! over the torus, `P(t) = Σ_s β(s) exp(i Σ_j t^j_{s_j})`. [`maximize_norm`]
//! climbs `|P|` one angle at a time. For a single angle the objective is
//! `|A e^{it} + B|`, whose maximum `|A| + |B|` is reached at
//! `t = arg B - arg A`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boolfn::{walsh_beta, SignFunction, WalshSpectrum};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from_seed};

/// Party-count cap for [`full_spectrum`] (cost `O(4^n)`).
pub const FULL_SPECTRUM_MAX_N: usize = 14;

/// Party-count cap for [`maximize_norm`].
pub const OPTIMIZE_MAX_N: usize = 20;

/// Largest value of the maximized norm for `n` parties, `sqrt(2^{n-1})`.
pub fn mk_ceiling(n: usize) -> f64 {
    2f64.powf((n as f64 - 1.0) / 2.0)
}

fn normalize_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    if t >= TAU {
        0.0
    } else {
        t
    }
}

/// Measurement angles `(θ^j_0, θ^j_1)` for each party, in `[0, 2π)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<[f64; 2]>", into = "Vec<[f64; 2]>")]
pub struct AngleConfig {
    theta: Vec<[f64; 2]>,
}

impl TryFrom<Vec<[f64; 2]>> for AngleConfig {
    type Error = Error;

    fn try_from(theta: Vec<[f64; 2]>) -> Result<Self> {
        AngleConfig::new(theta)
    }
}

impl From<AngleConfig> for Vec<[f64; 2]> {
    fn from(a: AngleConfig) -> Self {
        a.theta
    }
}

impl AngleConfig {
    pub fn new(theta: Vec<[f64; 2]>) -> Result<Self> {
        if theta.is_empty() {
            return Err(Error::InvalidInput(
                "angle configuration for zero parties".into(),
            ));
        }
        if theta.iter().flatten().any(|t| !t.is_finite()) {
            return Err(Error::InvalidInput("non-finite angle".into()));
        }
        Ok(AngleConfig {
            theta: theta
                .into_iter()
                .map(|[a, b]| [normalize_angle(a), normalize_angle(b)])
                .collect(),
        })
    }

    pub fn zeros(n: usize) -> Self {
        AngleConfig {
            theta: vec![[0.0; 2]; n],
        }
    }

    /// Angles drawn independently and uniformly from `[0, 2π)`.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let theta = (0..n)
            .map(|_| {
                [
                    normalize_angle(rng.random::<f64>() * TAU),
                    normalize_angle(rng.random::<f64>() * TAU),
                ]
            })
            .collect();
        AngleConfig { theta }
    }

    pub fn n(&self) -> usize {
        self.theta.len()
    }

    pub fn get(&self, party: usize, setting: usize) -> f64 {
        self.theta[party][setting]
    }

    pub fn pairs(&self) -> &[[f64; 2]] {
        &self.theta
    }

    /// The torus point `t^j_s = ω_j θ^j_s`.
    pub fn signed(&self, omega: &OmegaVector) -> AngleConfig {
        let theta = self
            .theta
            .iter()
            .zip(omega.signs())
            .map(|(&[a, b], &w)| {
                let w = f64::from(w);
                [normalize_angle(w * a), normalize_angle(w * b)]
            })
            .collect();
        AngleConfig { theta }
    }
}

/// Basis label `ω ∈ {-1,+1}^n`; `ω_j = +1` is spin-up along `z_j` and
/// corresponds to bit `j` of the basis index being 0.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OmegaVector(Vec<i8>);

impl OmegaVector {
    pub fn new(signs: Vec<i8>) -> Result<Self> {
        if signs.is_empty() || signs.iter().any(|&w| w != 1 && w != -1) {
            return Err(Error::InvalidInput(format!("{signs:?} is not a ±1 vector")));
        }
        Ok(OmegaVector(signs))
    }

    pub fn from_index(n: usize, index: usize) -> Self {
        OmegaVector(
            (0..n)
                .map(|j| if index >> j & 1 == 0 { 1 } else { -1 })
                .collect(),
        )
    }

    pub fn index(&self) -> usize {
        self.0
            .iter()
            .enumerate()
            .fold(0, |acc, (j, &w)| if w == -1 { acc | 1 << j } else { acc })
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    pub fn signs(&self) -> &[i8] {
        &self.0
    }

    pub fn negated(&self) -> Self {
        OmegaVector(self.0.iter().map(|w| -w).collect())
    }
}

fn check_match(f_n: usize, angles: &AngleConfig) -> Result<()> {
    if f_n != angles.n() {
        return Err(Error::InvalidInput(format!(
            "function has n = {f_n} but angles describe {} parties",
            angles.n()
        )));
    }
    Ok(())
}

/// Tensor product of per-party pairs, little-endian.
fn tensor_pairs(pairs: impl Iterator<Item = [Complex64; 2]>) -> Vec<Complex64> {
    let mut v = vec![Complex64::new(1.0, 0.0)];
    for [lo, hi] in pairs {
        let len = v.len();
        v.extend_from_within(..);
        for (i, x) in v.iter_mut().enumerate() {
            *x *= if i < len { lo } else { hi };
        }
    }
    v
}

/// `g_ε(t) = 2^{-n} Π_j (e^{i t^j_0} + (-1)^{ε_j} e^{i t^j_1})` for every `ε`.
pub fn g_vector(t: &AngleConfig) -> Vec<Complex64> {
    tensor_pairs(t.pairs().iter().map(|&[a, b]| {
        let (ea, eb) = (Complex64::cis(a), Complex64::cis(b));
        [(ea + eb) * 0.5, (ea - eb) * 0.5]
    }))
}

/// `exp(i Σ_j t^j_{s_j})` for every `s`.
fn phase_vector(t: &AngleConfig) -> Vec<Complex64> {
    tensor_pairs(
        t.pairs()
            .iter()
            .map(|&[a, b]| [Complex64::cis(a), Complex64::cis(b)]),
    )
}

/// `Σ_ε f(ε) g_ε(t)`.
pub fn bell_polynomial(f: &SignFunction, t: &AngleConfig) -> Result<Complex64> {
    check_match(f.n(), t)?;
    Ok(g_vector(t)
        .iter()
        .zip(f.values())
        .map(|(g, &v)| g * f64::from(v))
        .sum())
}

/// `Σ_s β(s) exp(i Σ_j t^j_{s_j})`, the same polynomial from the spectrum side.
pub fn bell_polynomial_beta(beta: &WalshSpectrum, t: &AngleConfig) -> Result<Complex64> {
    check_match(beta.n(), t)?;
    Ok(phase_vector(t)
        .iter()
        .zip(beta.numerators())
        .filter(|(_, &c)| c != 0)
        .map(|(p, &c)| p * c as f64)
        .sum::<Complex64>()
        / beta.denominator() as f64)
}

/// `(|λ(ω)|, Θ(ω))` from a precomputed spectrum.
pub fn eigenvalue_from_spectrum(
    beta: &WalshSpectrum,
    angles: &AngleConfig,
    omega: &OmegaVector,
) -> Result<(f64, f64)> {
    check_match(beta.n(), angles)?;
    if omega.n() != angles.n() {
        return Err(Error::InvalidInput("ω has the wrong length".into()));
    }
    let s = bell_polynomial_beta(beta, &angles.signed(omega))?;
    Ok((s.norm(), phase_of(s)))
}

/// `Θ = -arg S`, which makes `λ = e^{iΘ} S = |S|`.
fn phase_of(s: Complex64) -> f64 {
    if s.norm() == 0.0 {
        0.0
    } else {
        normalize_angle(-s.arg())
    }
}

/// Magnitude and phase of the eigenvalue attached to `ω`.
pub fn eigenvalue(
    f: &SignFunction,
    angles: &AngleConfig,
    omega: &OmegaVector,
) -> Result<(f64, f64)> {
    eigenvalue_from_spectrum(&walsh_beta(f), angles, omega)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumEntry {
    pub omega: Vec<i8>,
    pub magnitude: f64,
    pub phase: f64,
}

/// All `2^n` eigenvalue magnitudes with phases, indexed by `ω` index.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumResult {
    pub n: usize,
    pub entries: Vec<SpectrumEntry>,
    pub norm: f64,
    pub argmax_omega: Vec<i8>,
}

impl SpectrumResult {
    pub fn magnitudes(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.magnitude).collect()
    }
}

/// Full closed-form spectrum. The argmax is the lexicographically smallest
/// `ω` (comparing `ω_1` first, with `-1 < +1`).
pub fn full_spectrum(f: &SignFunction, angles: &AngleConfig) -> Result<SpectrumResult> {
    let n = f.n();
    if n > FULL_SPECTRUM_MAX_N {
        return Err(Error::TooLarge {
            what: "full spectrum",
            n,
            limit: FULL_SPECTRUM_MAX_N,
        });
    }
    check_match(n, angles)?;
    let beta = walsh_beta(f);
    let len = 1usize << n;
    let mask = len - 1;
    let mut entries: Vec<Option<SpectrumEntry>> = vec![None; len];
    for idx in 0..len {
        if entries[idx].is_some() {
            continue;
        }
        let omega = OmegaVector::from_index(n, idx);
        let (magnitude, phase) = eigenvalue_from_spectrum(&beta, angles, &omega)?;
        let partner_phase = if phase == 0.0 {
            0.0
        } else {
            normalize_angle(-phase)
        };
        entries[idx ^ mask] = Some(SpectrumEntry {
            omega: omega.negated().signs().to_vec(),
            magnitude,
            phase: partner_phase,
        });
        entries[idx] = Some(SpectrumEntry {
            omega: omega.signs().to_vec(),
            magnitude,
            phase,
        });
    }
    let entries: Vec<SpectrumEntry> = entries.into_iter().map(|e| e.expect("filled")).collect();

    let mut best: Option<(f64, usize)> = None;
    for key in 0..len {
        // key bit (n-1-j) set <=> ω_j = +1, so ascending key is lexicographic.
        let idx = (0..n)
            .filter(|&j| key >> (n - 1 - j) & 1 == 0)
            .fold(0, |acc, j| acc | 1 << j);
        let m = entries[idx].magnitude;
        if best.is_none_or(|(b, _)| m > b) {
            best = Some((m, idx));
        }
    }
    let (norm, arg) = best.expect("non-empty spectrum");
    Ok(SpectrumResult {
        n,
        argmax_omega: entries[arg].omega.clone(),
        entries,
        norm,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizeOptions {
    pub restarts: usize,
    pub tol: f64,
    pub max_sweeps: usize,
    pub seed: u64,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        OptimizeOptions {
            restarts: 32,
            tol: 1e-12,
            max_sweeps: 10_000,
            seed: 0,
        }
    }
}

impl OptimizeOptions {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::InvalidInput("restarts must be at least 1".into()));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::InvalidInput("tol must be positive".into()));
        }
        if self.max_sweeps == 0 {
            return Err(Error::InvalidInput("sweep cap must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OptimizeReport {
    pub n: usize,
    pub best_angles: AngleConfig,
    pub best_norm: f64,
    pub restarts_used: usize,
    pub best_restart: usize,
    pub sweeps: usize,
    pub converged: bool,
    pub history: Vec<f64>,
}

impl OptimizeReport {
    /// Turns a flagged report into [`Error::DidNotConverge`].
    pub fn ensure_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::DidNotConverge {
                sweeps: self.sweeps,
                best_norm: self.best_norm,
            })
        }
    }
}

/// Work buffers and coefficients for coordinate ascent on `|P(t)|`.
struct Ascent<'a> {
    n: usize,
    beta: &'a [f64],
    buf: Vec<Complex64>,
}

impl<'a> Ascent<'a> {
    fn new(n: usize, beta: &'a [f64]) -> Self {
        Ascent {
            n,
            beta,
            buf: Vec::with_capacity(beta.len()),
        }
    }

    /// `(R_0, R_1)` with `P = e^{i t^j_0} R_0 + e^{i t^j_1} R_1`.
    fn partial_sums(&mut self, angles: &[[f64; 2]], j: usize) -> (Complex64, Complex64) {
        let buf = &mut self.buf;
        buf.clear();
        buf.extend(self.beta.iter().map(|&b| Complex64::new(b, 0.0)));
        for k in (j + 1..self.n).rev() {
            let (u0, u1) = (Complex64::cis(angles[k][0]), Complex64::cis(angles[k][1]));
            let half = buf.len() / 2;
            let (lo, hi) = buf.split_at_mut(half);
            for (x, y) in lo.iter_mut().zip(hi.iter()) {
                *x = u0 * *x + u1 * y;
            }
            buf.truncate(half);
        }
        for angle in angles.iter().take(j) {
            let (u0, u1) = (Complex64::cis(angle[0]), Complex64::cis(angle[1]));
            let half = buf.len() / 2;
            for i in 0..half {
                buf[i] = u0 * buf[2 * i] + u1 * buf[2 * i + 1];
            }
            buf.truncate(half);
        }
        (buf[0], buf[1])
    }

    fn objective(&self, angles: &[[f64; 2]]) -> f64 {
        let phases = tensor_pairs(
            angles
                .iter()
                .map(|&[a, b]| [Complex64::cis(a), Complex64::cis(b)]),
        );
        phases
            .iter()
            .zip(self.beta)
            .map(|(p, &b)| p * b)
            .sum::<Complex64>()
            .norm()
    }

    /// One pass over all `2n` angles; each update attains `|A| + |B|`.
    /// `trace` receives the predicted objective after every update.
    fn sweep(&mut self, angles: &mut [[f64; 2]], mut trace: Option<&mut Vec<f64>>) {
        for j in 0..self.n {
            let (r0, r1) = self.partial_sums(angles, j);
            for s in 0..2 {
                let (a, other) = if s == 0 { (r0, r1) } else { (r1, r0) };
                let b = Complex64::cis(angles[j][1 - s]) * other;
                if a.norm() > 0.0 {
                    angles[j][s] = normalize_angle(b.arg() - a.arg());
                }
                if let Some(t) = trace.as_deref_mut() {
                    t.push(a.norm() + b.norm());
                }
            }
        }
    }
}

struct RestartOutcome {
    angles: Vec<[f64; 2]>,
    norm: f64,
    sweeps: usize,
    converged: bool,
    history: Vec<f64>,
}

fn run_restart(n: usize, beta: &[f64], opts: &OptimizeOptions, restart: usize) -> RestartOutcome {
    let mut rng = rng_from_seed(derive_seed(opts.seed, restart as u64));
    let mut angles = AngleConfig::random(n, &mut rng).theta;
    let mut ascent = Ascent::new(n, beta);
    let mut best = ascent.objective(&angles);
    let mut best_angles = angles.clone();
    let mut history = Vec::new();
    let mut converged = false;
    let mut sweeps = 0;
    while sweeps < opts.max_sweeps {
        ascent.sweep(&mut angles, None);
        sweeps += 1;
        let value = ascent.objective(&angles);
        let improvement = value - best;
        if value > best {
            best = value;
            best_angles.clone_from(&angles);
        }
        history.push(best);
        if improvement < opts.tol {
            converged = true;
            break;
        }
    }
    RestartOutcome {
        angles: best_angles,
        norm: best,
        sweeps,
        converged,
        history,
    }
}

/// Maximizes the witness norm over all measurement angles.
///
/// Restarts run in parallel; the best restart wins, ties going to the lowest
/// restart index. The result is a lower bound on the true maximum.
pub fn maximize_norm(f: &SignFunction, opts: &OptimizeOptions) -> Result<OptimizeReport> {
    opts.validate()?;
    let n = f.n();
    if n > OPTIMIZE_MAX_N {
        return Err(Error::TooLarge {
            what: "norm maximization",
            n,
            limit: OPTIMIZE_MAX_N,
        });
    }
    let spectrum = walsh_beta(f);
    if spectrum.support_size() == 1 {
        let mut rng = rng_from_seed(derive_seed(opts.seed, 0));
        return Ok(OptimizeReport {
            n,
            best_angles: AngleConfig::random(n, &mut rng),
            best_norm: 1.0,
            restarts_used: 0,
            best_restart: 0,
            sweeps: 0,
            converged: true,
            history: vec![1.0],
        });
    }
    let beta = spectrum.betas();
    let outcomes: Vec<RestartOutcome> = (0..opts.restarts)
        .into_par_iter()
        .map(|r| run_restart(n, &beta, opts, r))
        .collect();
    let (best_restart, best) = outcomes
        .into_iter()
        .enumerate()
        .reduce(|acc, cur| if cur.1.norm > acc.1.norm { cur } else { acc })
        .expect("at least one restart");
    Ok(OptimizeReport {
        n,
        best_angles: AngleConfig { theta: best.angles },
        best_norm: best.norm,
        restarts_used: opts.restarts,
        best_restart,
        sweeps: best.sweeps,
        converged: best.converged,
        history: best.history,
    })
}
