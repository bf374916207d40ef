//! Facet functions `f: {0,1}^n -> {-1,+1}` and their Walsh spectra.
//!
//! Indexing is little-endian throughout the crate: bit `j` of an index holds
//! the coordinate of party `j` (0-based). The same convention is used for the
//! setting vector `s`, the argument `ε` of `f`, and the qubit basis of the
//! dense operators in [`crate::oracle`].
//!
//! Walsh coefficients are kept exact: `β(s) = numerator(s) / 2^n` with an
//! integer numerator, so Plancherel and the round trip hold with no tolerance.

use std::collections::BTreeSet;
use std::fmt;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;
use crate::spectrum::{maximize_norm, OptimizeOptions, OptimizeReport};

/// Largest party count accepted by [`SignFunction`].
pub const MAX_N: usize = 24;

/// Largest party count for which [`orbit`] enumerates the full group.
pub const ORBIT_MAX_N: usize = 3;

/// Largest party count for exhaustive scans over all `2^(2^n)` functions.
pub const EXHAUSTIVE_MAX_N: usize = 4;

/// Absolute tolerance used to certify a Mermin-Klyshko candidate.
pub const MK_CERT_TOL: f64 = 1e-6;

/// A function `{0,1}^n -> {-1,+1}` stored as its table of signs.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "SignFunctionRepr", into = "SignFunctionRepr")]
pub struct SignFunction {
    n: usize,
    values: Vec<i8>,
}

#[derive(Serialize, Deserialize)]
struct SignFunctionRepr {
    #[serde(default = "schema_v1")]
    schema: u32,
    n: usize,
    signs: Vec<i64>,
}

fn schema_v1() -> u32 {
    1
}

impl TryFrom<SignFunctionRepr> for SignFunction {
    type Error = Error;

    fn try_from(r: SignFunctionRepr) -> Result<Self> {
        if r.schema != 1 {
            return Err(Error::InvalidInput(format!(
                "unsupported schema {}",
                r.schema
            )));
        }
        let values = r
            .signs
            .iter()
            .map(|&v| match v {
                1 => Ok(1i8),
                -1 => Ok(-1i8),
                other => Err(Error::InvalidInput(format!("sign entry {other} is not ±1"))),
            })
            .collect::<Result<Vec<_>>>()?;
        SignFunction::new(r.n, values)
    }
}

impl From<SignFunction> for SignFunctionRepr {
    fn from(f: SignFunction) -> Self {
        SignFunctionRepr {
            schema: 1,
            n: f.n,
            signs: f.values.iter().map(|&v| i64::from(v)).collect(),
        }
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidInput("party count must be at least 1".into()));
    }
    if n > MAX_N {
        return Err(Error::TooLarge {
            what: "sign function",
            n,
            limit: MAX_N,
        });
    }
    Ok(())
}

impl SignFunction {
    pub fn new(n: usize, values: Vec<i8>) -> Result<Self> {
        check_n(n)?;
        if values.len() != 1 << n {
            return Err(Error::InvalidInput(format!(
                "expected {} signs for n = {n}, got {}",
                1usize << n,
                values.len()
            )));
        }
        if let Some(bad) = values.iter().find(|&&v| v != 1 && v != -1) {
            return Err(Error::InvalidInput(format!("sign entry {bad} is not ±1")));
        }
        Ok(SignFunction { n, values })
    }

    /// The constant function `c` (`c` must be ±1).
    pub fn constant(n: usize, c: i8) -> Result<Self> {
        check_n(n)?;
        SignFunction::new(n, vec![c; 1 << n])
    }

    /// The signed character `ε ↦ sign · (-1)^{δ·ε}`.
    pub fn character(n: usize, delta: usize, sign: i8) -> Result<Self> {
        check_n(n)?;
        let values = (0..1usize << n)
            .map(|e| {
                if (e & delta).count_ones().is_multiple_of(2) {
                    sign
                } else {
                    -sign
                }
            })
            .collect();
        SignFunction::new(n, values)
    }

    /// Builds `f` from a bit pattern (bit `ε` set ⇔ `f(ε) = +1`), `n ≤ 6`.
    pub fn from_bits(n: usize, bits: u64) -> Result<Self> {
        if n > 6 {
            return Err(Error::TooLarge {
                what: "bit-pattern sign function",
                n,
                limit: 6,
            });
        }
        check_n(n)?;
        let values = (0..1usize << n)
            .map(|e| if bits >> e & 1 == 1 { 1 } else { -1 })
            .collect();
        Ok(SignFunction { n, values })
    }

    /// Inverse of [`SignFunction::from_bits`].
    pub fn to_bits(&self) -> Option<u64> {
        (self.n <= 6).then(|| {
            self.values
                .iter()
                .enumerate()
                .filter(|(_, &v)| v == 1)
                .fold(0u64, |acc, (e, _)| acc | 1 << e)
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[i8] {
        &self.values
    }

    pub fn value(&self, eps: usize) -> i8 {
        self.values[eps]
    }

    pub fn negated(&self) -> SignFunction {
        SignFunction {
            n: self.n,
            values: self.values.iter().map(|v| -v).collect(),
        }
    }

    /// Compact hex form of the bit pattern (bit `ε` set ⇔ `+1`).
    ///
    /// Bits are packed little-endian into bytes (`ε` goes to byte `ε / 8`,
    /// bit `ε % 8`) and the bytes are written in increasing order, two hex
    /// digits each. Unused high bits of the last byte are zero.
    pub fn to_hex(&self) -> String {
        let mut bytes = vec![0u8; self.values.len().div_ceil(8)];
        for (e, &v) in self.values.iter().enumerate() {
            if v == 1 {
                bytes[e / 8] |= 1 << (e % 8);
            }
        }
        bytes.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Parses the output of [`SignFunction::to_hex`] for a known `n`.
    pub fn from_hex(n: usize, hex: &str) -> Result<Self> {
        check_n(n)?;
        let len = 1usize << n;
        let nbytes = len.div_ceil(8);
        let hex = hex.trim();
        if hex.len() != 2 * nbytes || !hex.is_ascii() {
            return Err(Error::InvalidInput(format!(
                "hex string for n = {n} must have {} digits",
                2 * nbytes
            )));
        }
        let bytes = (0..nbytes)
            .map(|i| {
                u8::from_str_radix(&hex[2 * i..2 * i + 2], 16)
                    .map_err(|e| Error::InvalidInput(format!("bad hex digit: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        if len < 8 && bytes[0] >> len != 0 {
            return Err(Error::InvalidInput(
                "hex string sets bits beyond 2^n".into(),
            ));
        }
        let values = (0..len)
            .map(|e| {
                if bytes[e / 8] >> (e % 8) & 1 == 1 {
                    1
                } else {
                    -1
                }
            })
            .collect();
        Ok(SignFunction { n, values })
    }
}

impl fmt::Display for SignFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "f[n={}; {}]", self.n, self.to_hex())
    }
}

/// Exact Walsh coefficients `β(s) = numerator(s) / 2^n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WalshSpectrum {
    n: usize,
    numerators: Vec<i64>,
}

impl WalshSpectrum {
    /// Wraps numerators over the denominator `2^n`; requires `|β(s)| ≤ 1`.
    pub fn new(n: usize, numerators: Vec<i64>) -> Result<Self> {
        check_n(n)?;
        if numerators.len() != 1 << n {
            return Err(Error::InvalidInput(format!(
                "expected {} coefficients for n = {n}, got {}",
                1usize << n,
                numerators.len()
            )));
        }
        let den = 1i64 << n;
        if numerators.iter().any(|c| c.abs() > den) {
            return Err(Error::InvalidInput("Walsh coefficient with |β| > 1".into()));
        }
        Ok(WalshSpectrum { n, numerators })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn denominator(&self) -> i64 {
        1 << self.n
    }

    pub fn numerators(&self) -> &[i64] {
        &self.numerators
    }

    pub fn beta(&self, s: usize) -> f64 {
        self.numerators[s] as f64 / self.denominator() as f64
    }

    pub fn betas(&self) -> Vec<f64> {
        (0..self.numerators.len()).map(|s| self.beta(s)).collect()
    }

    pub fn support_size(&self) -> usize {
        self.numerators.iter().filter(|&&c| c != 0).count()
    }

    /// `Σ_s |β(s)|`, the trivial bound on every eigenvalue magnitude.
    pub fn l1_norm(&self) -> f64 {
        self.numerators
            .iter()
            .map(|c| c.unsigned_abs() as f64)
            .sum::<f64>()
            / self.denominator() as f64
    }

    /// `Σ_s β(s)^2 · 4^n` in exact arithmetic.
    pub fn sum_of_squares_scaled(&self) -> i128 {
        self.numerators
            .iter()
            .map(|&c| i128::from(c) * i128::from(c))
            .sum()
    }

    /// Exact check of `Σ_s β(s)^2 = 1`.
    pub fn is_plancherel_normalized(&self) -> bool {
        self.sum_of_squares_scaled() == 1i128 << (2 * self.n)
    }
}

/// In-place unnormalized Walsh-Hadamard butterfly.
pub(crate) fn fwht(data: &mut [i64]) {
    let mut h = 1;
    while h < data.len() {
        for block in data.chunks_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        h *= 2;
    }
}

/// `β(s) = 2^{-n} Σ_ε (-1)^{ε·s} f(ε)`, computed by the fast butterfly.
pub fn walsh_beta(f: &SignFunction) -> WalshSpectrum {
    let mut numerators: Vec<i64> = f.values.iter().map(|&v| i64::from(v)).collect();
    fwht(&mut numerators);
    WalshSpectrum { n: f.n, numerators }
}

/// `f(ε) = Σ_s (-1)^{ε·s} β(s)`; fails unless every value is exactly ±1.
pub fn inverse_walsh(beta: &WalshSpectrum) -> Result<SignFunction> {
    let mut data = beta.numerators.clone();
    fwht(&mut data);
    let den = beta.denominator();
    let values = data
        .iter()
        .enumerate()
        .map(|(index, &v)| {
            if v == den {
                Ok(1)
            } else if v == -den {
                Ok(-1)
            } else {
                Err(Error::NotASignFunction {
                    index,
                    value: v as f64 / den as f64,
                })
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SignFunction { n: beta.n, values })
}

/// True iff `f` is a signed character, i.e. its spectrum has one nonzero entry.
pub fn is_trivial_facet(f: &SignFunction) -> bool {
    walsh_beta(f).support_size() == 1
}

/// Iterates over all `2^(2^n)` sign functions in bit-pattern order.
pub fn all_functions(n: usize) -> Result<impl Iterator<Item = SignFunction>> {
    if n > EXHAUSTIVE_MAX_N {
        return Err(Error::TooLarge {
            what: "exhaustive function scan",
            n,
            limit: EXHAUSTIVE_MAX_N,
        });
    }
    check_n(n)?;
    let count = 1u64 << (1u64 << n);
    Ok((0..count).map(move |bits| SignFunction::from_bits(n, bits).expect("n <= 4")))
}

/// Exhaustive count of trivial facets next to the two candidate formulas.
///
/// Signed characters number `2^{n+1}`. The figure `2^n` is also quoted for
/// the exceptional facets; `agrees_with_two_pow_n` flags whether the scan
/// supports it (it does not for any `n ≥ 1`).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TrivialFacetCount {
    pub n: usize,
    pub observed: u64,
    pub signed_characters: u64,
    pub two_pow_n: u64,
    pub agrees_with_signed_characters: bool,
    pub agrees_with_two_pow_n: bool,
}

pub fn count_trivial_facets(n: usize) -> Result<TrivialFacetCount> {
    let observed = all_functions(n)?.filter(is_trivial_facet).count() as u64;
    let signed_characters = 1u64 << (n + 1);
    let two_pow_n = 1u64 << n;
    Ok(TrivialFacetCount {
        n,
        observed,
        signed_characters,
        two_pow_n,
        agrees_with_signed_characters: observed == signed_characters,
        agrees_with_two_pow_n: observed == two_pow_n,
    })
}

/// One symmetry of the correlation polytope.
///
/// Acting on a Walsh spectrum, the element produces
/// `β'(s) = γ · (-1)^{flip·s} · β(m(s))` where bit `j` of `m(s)` is
/// `s_{perm[j]} ⊕ swap_j` and `γ = -1` iff `global`.
///
/// In terms of the local variables: `perm` relabels parties, `swap` exchanges
/// the two settings of a party, `flip` negates the outcome of setting 1 at a
/// party and `global` negates the whole inequality. Negating both outcomes of
/// one party is the same as `global`, which is why the group has
/// `n! · 2^{2n+1}` elements.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SymmetryElement {
    pub perm: Vec<usize>,
    pub swap: u32,
    pub flip: u32,
    pub global: bool,
}

impl SymmetryElement {
    pub fn identity(n: usize) -> Self {
        SymmetryElement {
            perm: (0..n).collect(),
            swap: 0,
            flip: 0,
            global: false,
        }
    }

    pub fn new(perm: Vec<usize>, swap: u32, flip: u32, global: bool) -> Result<Self> {
        let n = perm.len();
        if n == 0 || n > MAX_N {
            return Err(Error::InvalidInput(format!("symmetry on {n} parties")));
        }
        let mut seen = vec![false; n];
        for &p in &perm {
            if p >= n || std::mem::replace(&mut seen[p], true) {
                return Err(Error::InvalidInput(format!(
                    "{perm:?} is not a permutation"
                )));
            }
        }
        let mask = (1u32 << n) - 1;
        if swap & !mask != 0 || flip & !mask != 0 {
            return Err(Error::InvalidInput("swap/flip bits beyond n".into()));
        }
        Ok(SymmetryElement {
            perm,
            swap,
            flip,
            global,
        })
    }

    pub fn n(&self) -> usize {
        self.perm.len()
    }

    /// Group order `n! · 2^{2n+1}`.
    pub fn group_order(n: usize) -> u128 {
        (1..=n as u128).product::<u128>() << (2 * n + 1)
    }

    /// Index map `m(s)`.
    pub fn index_map(&self, s: usize) -> usize {
        self.perm
            .iter()
            .enumerate()
            .fold(0, |acc, (j, &p)| acc | ((s >> p) & 1) << j)
            ^ self.swap as usize
    }

    /// Sign `γ · (-1)^{flip·s}`.
    pub fn sign(&self, s: usize) -> i64 {
        let parity = (s & self.flip as usize).count_ones() % 2 == 1;
        if parity ^ self.global {
            -1
        } else {
            1
        }
    }

    pub fn act_on_spectrum(&self, beta: &WalshSpectrum) -> WalshSpectrum {
        let numerators = (0..beta.numerators.len())
            .map(|s| self.sign(s) * beta.numerators[self.index_map(s)])
            .collect();
        WalshSpectrum {
            n: beta.n,
            numerators,
        }
    }

    /// Recovers an element from a signed permutation of indices, if it is one.
    fn from_signed_permutation(n: usize, map: &[usize], signs: &[i64]) -> Option<Self> {
        let swap = map[0];
        let mut perm = vec![usize::MAX; n];
        for k in 0..n {
            let image = map[1 << k] ^ swap;
            if image.count_ones() != 1 {
                return None;
            }
            perm[image.trailing_zeros() as usize] = k;
        }
        let global = signs[0] == -1;
        let flip = (0..n)
            .filter(|&k| (signs[1 << k] == -1) != global)
            .fold(0u32, |acc, k| acc | 1 << k);
        let g = SymmetryElement::new(perm, swap as u32, flip, global).ok()?;
        let consistent = (0..map.len()).all(|s| g.index_map(s) == map[s] && g.sign(s) == signs[s]);
        consistent.then_some(g)
    }

    /// The element acting as `self ∘ other` (apply `other` first).
    pub fn compose(&self, other: &SymmetryElement) -> SymmetryElement {
        assert_eq!(
            self.n(),
            other.n(),
            "composing symmetries of different arity"
        );
        let n = self.n();
        let len = 1usize << n;
        let map: Vec<usize> = (0..len)
            .map(|s| other.index_map(self.index_map(s)))
            .collect();
        let signs: Vec<i64> = (0..len)
            .map(|s| self.sign(s) * other.sign(self.index_map(s)))
            .collect();
        Self::from_signed_permutation(n, &map, &signs).expect("symmetry group is closed")
    }

    pub fn inverse(&self) -> SymmetryElement {
        let n = self.n();
        let len = 1usize << n;
        let mut map = vec![0; len];
        for s in 0..len {
            map[self.index_map(s)] = s;
        }
        let signs: Vec<i64> = (0..len).map(|x| self.sign(map[x])).collect();
        Self::from_signed_permutation(n, &map, &signs).expect("symmetry group has inverses")
    }

    /// Every element of the group for `n` parties.
    pub fn all(n: usize) -> Vec<SymmetryElement> {
        let mut out = Vec::new();
        for perm in permutations(n) {
            for swap in 0..1u32 << n {
                for flip in 0..1u32 << n {
                    for global in [false, true] {
                        out.push(SymmetryElement {
                            perm: perm.clone(),
                            swap,
                            flip,
                            global,
                        });
                    }
                }
            }
        }
        out
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(n), &mut vec![false; n], &mut out);
    out
}

/// Image of `f`'s facet under `g`, computed on the Walsh side.
pub fn apply_symmetry(g: &SymmetryElement, f: &SignFunction) -> Result<SignFunction> {
    if g.n() != f.n() {
        return Err(Error::InvalidInput(format!(
            "symmetry on {} parties applied to n = {}",
            g.n(),
            f.n()
        )));
    }
    inverse_walsh(&g.act_on_spectrum(&walsh_beta(f)))
}

/// The full orbit of `f` under the symmetry group.
pub fn orbit(f: &SignFunction) -> Result<BTreeSet<SignFunction>> {
    if f.n() > ORBIT_MAX_N {
        return Err(Error::TooLarge {
            what: "orbit enumeration",
            n: f.n(),
            limit: ORBIT_MAX_N,
        });
    }
    SymmetryElement::all(f.n())
        .iter()
        .map(|g| apply_symmetry(g, f))
        .collect()
}

/// Uniformly random `f`; the entries are independent fair signs.
pub fn random_f(n: usize, seed: u64) -> Result<SignFunction> {
    check_n(n)?;
    let mut rng = rng_from_seed(seed);
    let len = 1usize << n;
    let mut values = Vec::with_capacity(len);
    while values.len() < len {
        let word = rng.next_u64();
        let take = (len - values.len()).min(64);
        values.extend((0..take).map(|b| if word >> b & 1 == 1 { 1i8 } else { -1 }));
    }
    Ok(SignFunction { n, values })
}

/// The Mermin-Klyshko candidate: `+1` iff `|ε| mod 4 ∈ {0, 1}`.
pub fn mermin_klyshko_candidate(n: usize) -> Result<SignFunction> {
    if n < 2 {
        return Err(Error::InvalidInput(
            "Mermin-Klyshko facets need n >= 2".into(),
        ));
    }
    check_n(n)?;
    let values = (0..1usize << n)
        .map(|e| if e.count_ones() % 4 < 2 { 1 } else { -1 })
        .collect();
    Ok(SignFunction { n, values })
}

/// A facet function together with the optimizer run that certifies it.
#[derive(Clone, Debug, Serialize)]
pub struct CertifiedFacet {
    pub f: SignFunction,
    pub f_hex: String,
    pub target_norm: f64,
    pub report: OptimizeReport,
}

/// Builds the Mermin-Klyshko facet and certifies that its maximal norm
/// reaches `sqrt(2^{n-1})` within [`MK_CERT_TOL`].
pub fn mermin_klyshko_f(n: usize, opts: &OptimizeOptions) -> Result<CertifiedFacet> {
    let f = mermin_klyshko_candidate(n)?;
    let target = 2f64.powf((n as f64 - 1.0) / 2.0);
    let report = maximize_norm(&f, opts)?;
    if (report.best_norm - target).abs() > MK_CERT_TOL {
        return Err(Error::ConstructionInvalid {
            n,
            found: report.best_norm,
            expected: target,
        });
    }
    Ok(CertifiedFacet {
        f_hex: f.to_hex(),
        f,
        target_norm: target,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Direct double sum over ε and s.
    fn naive_numerators(f: &SignFunction) -> Vec<i64> {
        let len = f.len();
        (0..len)
            .map(|s| {
                (0..len)
                    .map(|e| {
                        let sign = if (e & s).count_ones() % 2 == 0 { 1 } else { -1 };
                        sign * i64::from(f.value(e))
                    })
                    .sum()
            })
            .collect()
    }

    fn chsh() -> SignFunction {
        SignFunction::new(2, vec![1, 1, 1, -1]).unwrap()
    }

    #[test]
    fn chsh_coefficients() {
        let beta = walsh_beta(&chsh());
        assert_eq!(beta.betas(), vec![0.5, 0.5, 0.5, -0.5]);
        assert_eq!(beta.numerators(), naive_numerators(&chsh()).as_slice());
    }

    #[test]
    fn constant_is_delta() {
        let beta = walsh_beta(&SignFunction::constant(3, 1).unwrap());
        assert_eq!(beta.numerators(), &[8, 0, 0, 0, 0, 0, 0, 0]);
        assert_eq!(beta.beta(0), 1.0);
    }

    #[test]
    fn seeded_f_matches_naive_sum() {
        let f = random_f(3, 7).unwrap();
        assert_eq!(walsh_beta(&f).numerators(), naive_numerators(&f).as_slice());
    }

    #[test]
    fn inverse_of_chsh_and_delta() {
        let beta = WalshSpectrum::new(2, vec![2, 2, 2, -2]).unwrap();
        assert_eq!(inverse_walsh(&beta).unwrap(), chsh());
        let delta = WalshSpectrum::new(2, vec![4, 0, 0, 0]).unwrap();
        assert_eq!(
            inverse_walsh(&delta).unwrap(),
            SignFunction::constant(2, 1).unwrap()
        );
    }

    #[test]
    fn flat_spectrum_is_rejected() {
        let beta = WalshSpectrum::new(2, vec![2, 2, 2, 2]).unwrap();
        match inverse_walsh(&beta) {
            Err(Error::NotASignFunction { index, value }) => {
                assert_eq!(index, 0);
                assert_eq!(value, 2.0);
            }
            other => panic!("expected NotASignFunction, got {other:?}"),
        }
    }

    #[test]
    fn trivial_facets() {
        assert!(is_trivial_facet(&SignFunction::constant(3, 1).unwrap()));
        assert!(!is_trivial_facet(&chsh()));
        // (-1)^{ε_1}
        assert!(is_trivial_facet(
            &SignFunction::new(2, vec![1, -1, 1, -1]).unwrap()
        ));
    }

    #[test]
    fn trivial_count_is_signed_characters() {
        for n in 1..=3 {
            let c = count_trivial_facets(n).unwrap();
            assert_eq!(c.observed, 1 << (n + 1));
            assert!(c.agrees_with_signed_characters);
            assert!(!c.agrees_with_two_pow_n);
        }
    }

    #[test]
    fn exhaustive_round_trip_and_plancherel() {
        for n in 1..=3 {
            for f in all_functions(n).unwrap() {
                let beta = walsh_beta(&f);
                assert!(beta.is_plancherel_normalized());
                assert_eq!(inverse_walsh(&beta).unwrap(), f);
                let parseval: i64 = f.values().iter().map(|&v| i64::from(v * v)).sum();
                assert_eq!(parseval, 1 << n);
            }
        }
    }

    #[test]
    fn symmetry_identity_and_global_sign() {
        let f = random_f(3, 11).unwrap();
        assert_eq!(
            apply_symmetry(&SymmetryElement::identity(3), &f).unwrap(),
            f
        );
        let g = SymmetryElement::new(vec![0, 1, 2], 0, 0, true).unwrap();
        let plus = SignFunction::constant(3, 1).unwrap();
        assert_eq!(
            apply_symmetry(&g, &plus).unwrap(),
            SignFunction::constant(3, -1).unwrap()
        );
    }

    #[test]
    fn party_swap_on_chsh() {
        let g = SymmetryElement::new(vec![1, 0], 0, 0, false).unwrap();
        let image = apply_symmetry(&g, &chsh()).unwrap();
        // β(s1,s2) -> β(s2,s1): the CHSH coefficients are symmetric.
        let direct: Vec<i8> = (0..4)
            .map(|e: usize| chsh().value(((e & 1) << 1) | (e >> 1)))
            .collect();
        assert_eq!(image.values(), direct.as_slice());
        assert_eq!(walsh_beta(&image).support_size(), 4);
        assert!(!is_trivial_facet(&image));
    }

    #[test]
    fn group_order_and_size() {
        assert_eq!(SymmetryElement::group_order(2), 64);
        assert_eq!(SymmetryElement::group_order(3), 768);
        assert_eq!(SymmetryElement::all(3).len(), 768);
        let distinct: std::collections::HashSet<_> = SymmetryElement::all(2)
            .iter()
            .map(|g| {
                (0..4)
                    .map(|s| (g.index_map(s), g.sign(s)))
                    .collect::<Vec<_>>()
            })
            .collect();
        assert_eq!(distinct.len(), 64, "action is faithful");
    }

    #[test]
    fn composition_inverse_associativity() {
        let all = SymmetryElement::all(2);
        let f = chsh();
        for (i, g) in all.iter().enumerate().step_by(5) {
            let gi = g.inverse();
            assert_eq!(g.compose(&gi), SymmetryElement::identity(2));
            assert_eq!(gi.compose(g), SymmetryElement::identity(2));
            for h in all.iter().skip(i % 7).step_by(9) {
                let gh = g.compose(h);
                let sequential = apply_symmetry(g, &apply_symmetry(h, &f).unwrap()).unwrap();
                assert_eq!(apply_symmetry(&gh, &f).unwrap(), sequential);
                for k in all.iter().step_by(17) {
                    assert_eq!(gh.compose(k), g.compose(&h.compose(k)));
                }
            }
        }
    }

    #[test]
    fn n2_orbits_partition_the_space() {
        let trivial = orbit(&SignFunction::constant(2, 1).unwrap()).unwrap();
        assert_eq!(trivial.len(), 8);
        assert!(trivial.iter().all(is_trivial_facet));
        let chsh_orbit = orbit(&chsh()).unwrap();
        assert_eq!(chsh_orbit.len(), 8);
        assert!(trivial.is_disjoint(&chsh_orbit));
        assert_eq!(trivial.len() + chsh_orbit.len(), 16);
    }

    #[test]
    fn n3_orbits_partition_the_space() {
        let mut remaining: BTreeSet<SignFunction> = all_functions(3).unwrap().collect();
        let mut sizes = Vec::new();
        while let Some(f) = remaining.iter().next().cloned() {
            let o = orbit(&f).unwrap();
            let support = walsh_beta(&f).support_size();
            assert!(o.iter().all(|g| walsh_beta(g).support_size() == support));
            assert!(o.is_subset(&remaining));
            remaining = &remaining - &o;
            sizes.push(o.len());
        }
        assert_eq!(sizes.iter().sum::<usize>(), 256);
    }

    #[test]
    fn orbit_rejects_large_n() {
        let f = SignFunction::constant(4, 1).unwrap();
        assert!(matches!(orbit(&f), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn random_f_is_deterministic() {
        assert_eq!(random_f(8, 42).unwrap(), random_f(8, 42).unwrap());
        assert_ne!(random_f(8, 42).unwrap(), random_f(8, 43).unwrap());
    }

    #[test]
    fn random_f_moments() {
        let samples = 10_000;
        let fs: Vec<_> = (0..samples)
            .map(|i| random_f(8, crate::rng::derive_seed(99, i)).unwrap())
            .collect();
        for coord in [0usize, 17, 255] {
            let mean = fs.iter().map(|f| f64::from(f.value(coord))).sum::<f64>() / samples as f64;
            assert!(mean.abs() <= 0.05, "coordinate {coord}: mean {mean}");
        }
        let corr = fs
            .iter()
            .map(|f| f64::from(f.value(3) * f.value(200)))
            .sum::<f64>()
            / samples as f64;
        assert!(corr.abs() <= 0.05, "correlation {corr}");
    }

    #[test]
    fn mk_candidate_small_cases() {
        assert_eq!(mermin_klyshko_candidate(2).unwrap(), chsh());
        let f3 = mermin_klyshko_candidate(3).unwrap();
        // weights 0,1,1,2,1,2,2,3
        assert_eq!(f3.values(), &[1, 1, 1, -1, 1, -1, -1, -1]);
        assert!(mermin_klyshko_candidate(1).is_err());
    }

    #[test]
    fn mk_certified_small() {
        let opts = OptimizeOptions {
            restarts: 32,
            ..OptimizeOptions::default()
        };
        let c2 = mermin_klyshko_f(2, &opts).unwrap();
        assert!((c2.report.best_norm - 2f64.sqrt()).abs() < 1e-9);
        let c5 = mermin_klyshko_f(
            5,
            &OptimizeOptions {
                restarts: 64,
                ..opts
            },
        )
        .unwrap();
        assert!((c5.report.best_norm - 4.0).abs() < 1e-6);
    }

    #[test]
    fn hex_encoding() {
        assert_eq!(chsh().to_hex(), "07");
        assert_eq!(SignFunction::constant(3, 1).unwrap().to_hex(), "ff");
        assert_eq!(SignFunction::constant(4, -1).unwrap().to_hex(), "0000");
        assert_eq!(SignFunction::from_hex(2, "07").unwrap(), chsh());
        assert!(SignFunction::from_hex(2, "17").is_err());
        assert!(SignFunction::from_hex(3, "7").is_err());
        assert_eq!(chsh().to_bits(), Some(7));
    }

    #[test]
    fn json_schema() {
        let text = serde_json::to_string(&chsh()).unwrap();
        assert_eq!(text, r#"{"schema":1,"n":2,"signs":[1,1,1,-1]}"#);
        let parsed: SignFunction = serde_json::from_str(r#"{"n":2,"signs":[1,1,1,-1]}"#).unwrap();
        assert_eq!(parsed, chsh());
        assert!(serde_json::from_str::<SignFunction>(r#"{"n":2,"signs":[1,1,0,-1]}"#).is_err());
        assert!(serde_json::from_str::<SignFunction>(r#"{"n":3,"signs":[1,1,1,-1]}"#).is_err());
        assert!(
            serde_json::from_str::<SignFunction>(r#"{"schema":2,"n":2,"signs":[1,1,1,-1]}"#)
                .is_err()
        );
    }

    proptest! {
        #[test]
        fn round_trip_random(n in 1usize..=12, seed in any::<u64>()) {
            let f = random_f(n, seed).unwrap();
            let beta = walsh_beta(&f);
            prop_assert!(beta.is_plancherel_normalized());
            prop_assert_eq!(inverse_walsh(&beta).unwrap(), f.clone());
            prop_assert_eq!(SignFunction::from_hex(n, &f.to_hex()).unwrap(), f);
        }

        #[test]
        fn symmetry_preserves_abs_multiset(seed in any::<u64>(), gi in 0usize..768) {
            let f = random_f(3, seed).unwrap();
            let g = &SymmetryElement::all(3)[gi];
            let image = apply_symmetry(g, &f).unwrap();
            let mut a: Vec<i64> = walsh_beta(&f).numerators().iter().map(|c| c.abs()).collect();
            let mut b: Vec<i64> = walsh_beta(&image).numerators().iter().map(|c| c.abs()).collect();
            a.sort_unstable();
            b.sort_unstable();
            prop_assert_eq!(a, b);
        }
    }
}
