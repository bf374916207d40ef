//! The classical correlation polytope `C_n`.
//!
//! A local hidden-variable assignment fixes `X^j_0, X^j_1 ∈ {±1}` for each
//! party; its vertex has coordinates `a(s) = Π_j X^j_{s_j}`. Facets are
//! labelled by sign functions `f`, and every vertex sits at `±1` on every
//! facet, so `C_n` is a cross-polytope.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::boolfn::{
    all_functions, is_trivial_facet, orbit, walsh_beta, SignFunction, EXHAUSTIVE_MAX_N,
};
use crate::error::{Error, Result};
use crate::spectrum::{full_spectrum, AngleConfig, OmegaVector};

/// Slack allowed by [`membership`] on each facet.
pub const MEMBERSHIP_TOL: f64 = 1e-12;

/// A deterministic local assignment and its correlation vector.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ClassicalVertex {
    assignments: Vec<[i8; 2]>,
    vector: Vec<i8>,
}

impl ClassicalVertex {
    pub fn new(assignments: Vec<[i8; 2]>) -> Result<Self> {
        if assignments.is_empty() || assignments.len() > EXHAUSTIVE_MAX_N {
            return Err(Error::InvalidInput(format!(
                "vertex needs 1..={EXHAUSTIVE_MAX_N} parties, got {}",
                assignments.len()
            )));
        }
        if assignments.iter().flatten().any(|&x| x != 1 && x != -1) {
            return Err(Error::InvalidInput("vertex assignments must be ±1".into()));
        }
        let n = assignments.len();
        let vector = (0..1usize << n)
            .map(|s| (0..n).map(|j| assignments[j][s >> j & 1]).product())
            .collect();
        Ok(ClassicalVertex {
            assignments,
            vector,
        })
    }

    pub fn n(&self) -> usize {
        self.assignments.len()
    }

    pub fn assignments(&self) -> &[[i8; 2]] {
        &self.assignments
    }

    pub fn vector(&self) -> &[i8] {
        &self.vector
    }
}

/// All `4^n` assignments. Assignment `k` takes `X^j_t = -1` iff bit `2j + t`
/// of `k` is set.
pub fn enumerate_vertices(n: usize) -> Result<Vec<ClassicalVertex>> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be at least 1".into()));
    }
    if n > EXHAUSTIVE_MAX_N {
        return Err(Error::TooLarge {
            what: "vertex enumeration",
            n,
            limit: EXHAUSTIVE_MAX_N,
        });
    }
    (0..1usize << (2 * n))
        .map(|k| {
            let assignments = (0..n)
                .map(|j| [0, 1].map(|t| if k >> (2 * j + t) & 1 == 1 { -1 } else { 1 }))
                .collect();
            ClassicalVertex::new(assignments)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VertexCount {
    pub n: usize,
    pub assignments: usize,
    pub distinct_vectors: usize,
}

pub fn count_vertices(n: usize) -> Result<VertexCount> {
    let vertices = enumerate_vertices(n)?;
    let distinct: BTreeSet<&[i8]> = vertices.iter().map(|v| v.vector()).collect();
    Ok(VertexCount {
        n,
        assignments: vertices.len(),
        distinct_vectors: distinct.len(),
    })
}

/// `Σ_s β_f(s) a(s)` in exact integer arithmetic.
///
/// # Panics
///
/// If the result is not `±1`, which would mean the transform is broken.
pub fn facet_value(f: &SignFunction, v: &ClassicalVertex) -> Result<i8> {
    if f.n() != v.n() {
        return Err(Error::InvalidInput(format!(
            "facet has n = {} but vertex has n = {}",
            f.n(),
            v.n()
        )));
    }
    let beta = walsh_beta(f);
    let total: i64 = beta
        .numerators()
        .iter()
        .zip(v.vector())
        .map(|(&b, &a)| b * i64::from(a))
        .sum();
    let d = beta.denominator();
    assert!(
        total == d || total == -d,
        "facet value {total}/{d} of {f} is not ±1; the Walsh transform is inconsistent"
    );
    Ok(if total > 0 { 1 } else { -1 })
}

/// A point `q(s) ∈ [-1, 1]^{2^n}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CorrelationRepr", into = "CorrelationRepr")]
pub struct CorrelationVector {
    n: usize,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct CorrelationRepr {
    #[serde(default = "schema_one")]
    schema: u32,
    n: usize,
    q: Vec<f64>,
}

fn schema_one() -> u32 {
    1
}

impl TryFrom<CorrelationRepr> for CorrelationVector {
    type Error = Error;

    fn try_from(r: CorrelationRepr) -> Result<Self> {
        if r.schema != 1 {
            return Err(Error::InvalidInput(format!(
                "unsupported schema {}",
                r.schema
            )));
        }
        CorrelationVector::new(r.n, r.q)
    }
}

impl From<CorrelationVector> for CorrelationRepr {
    fn from(q: CorrelationVector) -> Self {
        CorrelationRepr {
            schema: 1,
            n: q.n,
            q: q.values,
        }
    }
}

impl CorrelationVector {
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        if n == 0 || n > 30 || values.len() != 1 << n {
            return Err(Error::InvalidInput(format!(
                "correlation vector for n = {n} needs 2^n coordinates, got {}",
                values.len()
            )));
        }
        if let Some(bad) = values
            .iter()
            .find(|x| !x.is_finite() || x.abs() > 1.0 + MEMBERSHIP_TOL)
        {
            return Err(Error::InvalidInput(format!(
                "coordinate {bad} is outside [-1, 1]"
            )));
        }
        Ok(CorrelationVector { n, values })
    }

    pub fn zeros(n: usize) -> Result<Self> {
        CorrelationVector::new(n, vec![0.0; 1 << n])
    }

    pub fn from_vertex(v: &ClassicalVertex) -> Self {
        CorrelationVector {
            n: v.n(),
            values: v.vector().iter().map(|&a| f64::from(a)).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// `Σ_s β_f(s) q(s)`.
pub fn facet_expectation(f: &SignFunction, q: &CorrelationVector) -> Result<f64> {
    if f.n() != q.n() {
        return Err(Error::InvalidInput(
            "facet and point have different n".into(),
        ));
    }
    let beta = walsh_beta(f);
    let total: f64 = beta
        .numerators()
        .iter()
        .zip(q.values())
        .map(|(&b, &x)| b as f64 * x)
        .sum();
    Ok(total / beta.denominator() as f64)
}

/// Unnormalized Walsh transform of a real vector.
fn fwht_real(v: &mut [f64]) {
    let mut h = 1;
    while h < v.len() {
        for block in v.chunks_exact_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi) {
                (*a, *b) = (*a + *b, *a - *b);
            }
        }
        h *= 2;
    }
}

/// First facet (in bit-pattern order of `f`) with `|Σ β_f q| > 1 + 1e-12`.
///
/// `Σ_s β_f(s) q(s) = 2^{-n} Σ_ε f(ε) q̂(ε)` with `q̂` the Walsh transform of
/// `q`, so each facet costs `2^n` after one transform.
pub fn first_violated_facet(q: &CorrelationVector) -> Result<Option<SignFunction>> {
    let n = q.n();
    if n > EXHAUSTIVE_MAX_N {
        return Err(Error::TooLarge {
            what: "membership test",
            n,
            limit: EXHAUSTIVE_MAX_N,
        });
    }
    let mut hat = q.values().to_vec();
    fwht_real(&mut hat);
    let scale = (1u64 << n) as f64;
    for f in all_functions(n)? {
        let value: f64 = f
            .values()
            .iter()
            .zip(&hat)
            .map(|(&s, &x)| f64::from(s) * x)
            .sum();
        if (value / scale).abs() > 1.0 + MEMBERSHIP_TOL {
            return Ok(Some(f));
        }
    }
    Ok(None)
}

/// True iff `q` satisfies all `2^{2^n}` facet inequalities.
pub fn membership(q: &CorrelationVector) -> Result<bool> {
    Ok(first_violated_facet(q)?.is_none())
}

/// Split of the sixteen `n = 2` facets.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FacetClassification {
    pub total: usize,
    pub trivial: Vec<String>,
    pub chsh: Vec<String>,
    /// Every non-trivial facet is in the orbit of the standard CHSH facet.
    pub chsh_is_one_orbit: bool,
    /// The non-trivial facets are exactly `±½(±1, ±1, ±1, ±1)` with one sign
    /// differing from the other three, i.e. the standard form with its
    /// minus sign moved to each of the four terms.
    pub matches_permuted_forms: bool,
}

pub fn chsh_facets_n2() -> FacetClassification {
    let all: Vec<SignFunction> = all_functions(2).expect("n = 2").collect();
    let (trivial, chsh): (Vec<_>, Vec<_>) = all.iter().cloned().partition(is_trivial_facet);
    let standard = SignFunction::new(2, vec![1, 1, 1, -1]).expect("valid");
    let standard_orbit = orbit(&standard).expect("n = 2");
    let chsh_set: BTreeSet<SignFunction> = chsh.iter().cloned().collect();
    let permuted: BTreeSet<SignFunction> = all
        .iter()
        .filter(|f| {
            let nums = walsh_beta(f).numerators().to_vec();
            let negatives = nums.iter().filter(|&&b| b < 0).count();
            nums.iter().all(|b| b.abs() == 2) && negatives % 2 == 1
        })
        .cloned()
        .collect();
    FacetClassification {
        total: all.len(),
        trivial: trivial.iter().map(SignFunction::to_hex).collect(),
        chsh: chsh.iter().map(SignFunction::to_hex).collect(),
        chsh_is_one_orbit: standard_orbit == chsh_set,
        matches_permuted_forms: permuted == chsh_set,
    }
}

/// Correlations of the top GHZ eigenvector of `W_f`:
/// `q(s) = cos(Θ + Σ_j ω_j θ^j_{s_j})` at the maximizing `ω`.
///
/// Then `Σ β_f(s) q(s)` equals the operator norm at these angles.
pub fn quantum_point(f: &SignFunction, angles: &AngleConfig) -> Result<CorrelationVector> {
    let n = f.n();
    let spectrum = full_spectrum(f, angles)?;
    let omega = OmegaVector::new(spectrum.argmax_omega.clone())?;
    let theta = spectrum.entries[omega.index()].phase;
    let values = (0..1usize << n)
        .map(|s| {
            let phi: f64 = (0..n)
                .map(|j| f64::from(omega.signs()[j]) * angles.get(j, s >> j & 1))
                .sum();
            (theta + phi).cos()
        })
        .collect();
    CorrelationVector::new(n, values)
}
