//! Energy-ladder reservoir states and polynomials in the shift operator.
//!
//! A [`ReservoirState`] is a dense amplitude vector over a fixed window of
//! consecutive ladder levels. Shifts translate amplitude inside the window
//! and fail with [`Error::WindowOverflow`] instead of wrapping or truncating,
//! so a guard band that is too small for the planned number of uses is
//! reported rather than silently corrupting results.

use std::collections::BTreeMap;
use std::ops::{Add, Mul};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::C64;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Normalization tolerance for reservoir kets.
pub const NORM_TOL: f64 = 1e-12;

/// Pure reservoir state on a window `[window_min, window_min + W - 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReservoirState {
    base_level: i64,
    length: usize,
    phase: f64,
    guard: usize,
    window_min: i64,
    amplitudes: Vec<C64>,
}

impl ReservoirState {
    /// Uniform phase-coded superposition over `length` levels starting at
    /// `base_level`: amplitude `e^{ilθ}/√L` on level `base_level + l`.
    /// The window extends `guard` levels past the support on each side.
    pub fn eta(length: usize, base_level: i64, phase: f64, guard: usize) -> Result<Self> {
        if length == 0 {
            return Err(Error::InvalidParameter("reservoir length L must be >= 1".into()));
        }
        let g = i64::try_from(guard)
            .map_err(|_| Error::InvalidParameter(format!("guard {guard} too large")))?;
        let window_min = base_level
            .checked_sub(g)
            .ok_or_else(|| Error::InvalidParameter("l0 - guard not representable".into()))?;
        let width = length + 2 * guard;
        let norm = (length as f64).sqrt().recip();
        let mut amplitudes = vec![ZERO; width];
        for l in 0..length {
            amplitudes[guard + l] = C64::from_polar(norm, l as f64 * phase);
        }
        Ok(Self {
            base_level,
            length,
            phase,
            guard,
            window_min,
            amplitudes,
        })
    }

    /// Arbitrary normalized state on a window.
    pub fn from_amplitudes(window_min: i64, amplitudes: Vec<C64>) -> Result<Self> {
        let norm_sq: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidParameter(format!(
                "reservoir amplitudes have squared norm {norm_sq}"
            )));
        }
        let (lo, hi) = support_of(&amplitudes).ok_or_else(|| {
            Error::InvalidParameter("reservoir state has empty support".into())
        })?;
        Ok(Self {
            base_level: window_min + lo as i64,
            length: hi - lo + 1,
            phase: 0.0,
            guard: lo.min(amplitudes.len() - 1 - hi),
            window_min,
            amplitudes,
        })
    }

    pub fn base_level(&self) -> i64 {
        self.base_level
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }

    pub fn guard(&self) -> usize {
        self.guard
    }

    pub fn window_min(&self) -> i64 {
        self.window_min
    }

    pub fn window_max(&self) -> i64 {
        self.window_min + self.amplitudes.len() as i64 - 1
    }

    pub fn width(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    /// Amplitude on ladder level `level` (zero outside the window).
    pub fn amplitude_at(&self, level: i64) -> C64 {
        let idx = level - self.window_min;
        if idx < 0 || idx as usize >= self.amplitudes.len() {
            ZERO
        } else {
            self.amplitudes[idx as usize]
        }
    }

    /// Lowest and highest levels carrying nonzero amplitude.
    pub fn support(&self) -> Option<(i64, i64)> {
        support_of(&self.amplitudes)
            .map(|(lo, hi)| (self.window_min + lo as i64, self.window_min + hi as i64))
    }

    /// Levels with nonzero amplitude.
    pub fn support_levels(&self) -> Vec<i64> {
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(_, a)| **a != ZERO)
            .map(|(i, _)| self.window_min + i as i64)
            .collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `Δ^k |state⟩`.
    pub fn apply_shift(&self, k: i64) -> Result<Self> {
        let amplitudes = shift_ket(self.window_min, &self.amplitudes, k)?;
        Ok(Self {
            base_level: self.base_level + k,
            amplitudes,
            ..self.clone()
        })
    }

    /// `⟨state|Δ^a|state⟩`.
    pub fn shift_overlap(&self, a: i64) -> C64 {
        let w = self.amplitudes.len() as i64;
        if a.abs() >= w {
            return ZERO;
        }
        // Δ^a|j⟩ = |j+a⟩, so the sum pairs amplitude j with the conjugate at j+a.
        let (start, end) = if a >= 0 { (0, w - a) } else { (-a, w) };
        (start..end)
            .map(|j| self.amplitudes[(j + a) as usize].conj() * self.amplitudes[j as usize])
            .sum()
    }

    /// `⟨state| poly(Δ, Δ⁻¹) |state⟩ = Σ_k c_k ⟨Δ^k⟩`.
    pub fn laurent_expectation(&self, poly: &LaurentCoeffs) -> C64 {
        poly.iter().map(|(k, c)| c * self.shift_overlap(k)).sum()
    }

    /// Applies `poly(Δ, Δ⁻¹)` and returns `(‖poly|ψ⟩‖, normalized result)`.
    pub fn apply_polynomial(&self, poly: &LaurentCoeffs) -> Result<(f64, Self)> {
        let ket = apply_laurent_to_ket(self.window_min, &self.amplitudes, poly)?;
        let norm = ket.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::Domain("polynomial annihilates the state".into()));
        }
        let amps: Vec<C64> = ket.into_iter().map(|a| a / norm).collect();
        let (lo, hi) = support_of(&amps).expect("nonzero norm");
        Ok((
            norm,
            Self {
                base_level: self.window_min + lo as i64,
                length: hi - lo + 1,
                phase: self.phase,
                guard: self.guard,
                window_min: self.window_min,
                amplitudes: amps,
            },
        ))
    }

    /// `⟨self|other⟩`, aligning windows by ladder level.
    pub fn inner(&self, other: &Self) -> C64 {
        let lo = self.window_min.max(other.window_min);
        let hi = self.window_max().min(other.window_max());
        (lo..=hi)
            .map(|l| self.amplitude_at(l).conj() * other.amplitude_at(l))
            .sum()
    }
}

/// `⟨η(θ1)|η(θ2)⟩ = (1/L) Σ_l e^{il(θ2-θ1)}`.
pub fn reservoir_overlap(theta1: f64, theta2: f64, length: usize) -> Result<C64> {
    if length == 0 {
        return Err(Error::InvalidParameter("reservoir length L must be >= 1".into()));
    }
    let d = theta2 - theta1;
    if length <= DIRECT_OVERLAP_MAX {
        let sum: C64 = (0..length).map(|l| C64::from_polar(1.0, l as f64 * d)).sum();
        return Ok(sum / length as f64);
    }
    // Dirichlet kernel: Σ_l e^{ild} = e^{i(L-1)d/2} sin(Ld/2) / sin(d/2).
    let l = length as f64;
    let x = 0.5 * d;
    let s = x.sin();
    let ratio = if s.abs() < 1e-12 {
        let k = (x / std::f64::consts::PI).round() as i64;
        if k % 2 != 0 && length.is_multiple_of(2) { -l } else { l }
    } else {
        (l * x).sin() / s
    };
    Ok(C64::from_polar(ratio / l, (l - 1.0) * x))
}

/// Above this length the overlap uses the closed form instead of a sum.
const DIRECT_OVERLAP_MAX: usize = 1 << 16;

fn support_of(amps: &[C64]) -> Option<(usize, usize)> {
    let lo = amps.iter().position(|a| *a != ZERO)?;
    let hi = amps.iter().rposition(|a| *a != ZERO)?;
    Some((lo, hi))
}

/// Translates a window ket by `k` levels; nonzero amplitude may not leave
/// the window.
pub(crate) fn shift_ket(window_min: i64, ket: &[C64], k: i64) -> Result<Vec<C64>> {
    let w = ket.len();
    let Some((lo, hi)) = support_of(ket) else {
        return Ok(vec![ZERO; w]);
    };
    let new_lo = lo as i64 + k;
    let new_hi = hi as i64 + k;
    if new_lo < 0 || new_hi >= w as i64 {
        return Err(Error::WindowOverflow {
            shift: k,
            support_min: window_min + lo as i64,
            support_max: window_min + hi as i64,
            window_min,
            window_max: window_min + w as i64 - 1,
        });
    }
    let mut out = vec![ZERO; w];
    for j in lo..=hi {
        out[(j as i64 + k) as usize] = ket[j];
    }
    Ok(out)
}

/// `poly(Δ, Δ⁻¹)` applied to a window ket. Terms with zero coefficient are
/// skipped and so never trigger an overflow.
pub(crate) fn apply_laurent_to_ket(
    window_min: i64,
    ket: &[C64],
    poly: &LaurentCoeffs,
) -> Result<Vec<C64>> {
    let mut out = vec![ZERO; ket.len()];
    for (k, c) in poly.iter() {
        if c == ZERO {
            continue;
        }
        let shifted = shift_ket(window_min, ket, k)?;
        for (o, s) in out.iter_mut().zip(shifted) {
            *o += c * s;
        }
    }
    Ok(out)
}

/// Finite Laurent polynomial `Σ_k c_k Δ^k`.
///
/// Coefficients are kept exactly as computed; no entry is ever pruned, so
/// the support of a product is the sumset of the factor supports.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct LaurentCoeffs {
    coeffs: BTreeMap<i64, C64>,
}

impl LaurentCoeffs {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        Self::monomial(0, C64::new(c, 0.0))
    }

    pub fn monomial(power: i64, c: C64) -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(power, c);
        Self { coeffs }
    }

    /// Builds from `(power, real coefficient)` pairs; repeated powers add.
    pub fn from_real(pairs: &[(i64, f64)]) -> Self {
        let mut out = Self::new();
        for &(k, c) in pairs {
            *out.coeffs.entry(k).or_insert(ZERO) += C64::new(c, 0.0);
        }
        out
    }

    /// `α·1 + β·Δ^k`.
    pub fn binomial(alpha: f64, beta: f64, k: i64) -> Self {
        Self::from_real(&[(0, alpha), (k, beta)])
    }

    pub fn get(&self, power: i64) -> C64 {
        self.coeffs.get(&power).copied().unwrap_or(ZERO)
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, C64)> + '_ {
        self.coeffs.iter().map(|(&k, &c)| (k, c))
    }

    pub fn support(&self) -> Vec<i64> {
        self.coeffs.keys().copied().collect()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|(&k, &c)| (k, c * s)).collect(),
        }
    }

    /// Operator adjoint: `Σ conj(c_k) Δ^{-k}`.
    pub fn adjoint(&self) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|(&k, &c)| (-k, c.conj())).collect(),
        }
    }

    pub fn pow(&self, n: usize) -> Self {
        let mut out = Self::constant(1.0);
        for _ in 0..n {
            out = &out * self;
        }
        out
    }
}

impl Add for &LaurentCoeffs {
    type Output = LaurentCoeffs;

    fn add(self, rhs: Self) -> LaurentCoeffs {
        let mut coeffs = self.coeffs.clone();
        for (&k, &c) in &rhs.coeffs {
            *coeffs.entry(k).or_insert(ZERO) += c;
        }
        LaurentCoeffs { coeffs }
    }
}

impl Mul for &LaurentCoeffs {
    type Output = LaurentCoeffs;

    /// Discrete convolution of coefficient sequences.
    fn mul(self, rhs: Self) -> LaurentCoeffs {
        let (Some((&a_lo, _)), Some((&b_lo, _))) =
            (self.coeffs.first_key_value(), rhs.coeffs.first_key_value())
        else {
            return LaurentCoeffs::new();
        };
        let a_hi = *self.coeffs.keys().next_back().unwrap();
        let b_hi = *rhs.coeffs.keys().next_back().unwrap();
        let lo = a_lo + b_lo;
        let span = (a_hi + b_hi - lo + 1) as usize;
        let mut acc = vec![ZERO; span];
        let mut touched = vec![false; span];
        for (&ka, &ca) in &self.coeffs {
            for (&kb, &cb) in &rhs.coeffs {
                let idx = (ka + kb - lo) as usize;
                acc[idx] += ca * cb;
                touched[idx] = true;
            }
        }
        let coeffs = acc
            .into_iter()
            .zip(touched)
            .enumerate()
            .filter(|(_, (_, t))| *t)
            .map(|(i, (c, _))| (lo + i as i64, c))
            .collect();
        LaurentCoeffs { coeffs }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn eta_single_level() {
        let s = ReservoirState::eta(1, 5, 0.0, 0).unwrap();
        assert_eq!(s.support_levels(), vec![5]);
        assert_eq!(s.amplitude_at(5), C64::new(1.0, 0.0));
    }

    #[test]
    fn eta_uniform_amplitudes() {
        let s = ReservoirState::eta(4, 10, 0.0, 3).unwrap();
        assert_eq!(s.support(), Some((10, 13)));
        for l in 10..=13 {
            assert!(close(s.amplitude_at(l), C64::new(0.5, 0.0), 1e-15));
        }
        assert_eq!(s.window_min(), 7);
        assert_eq!(s.window_max(), 16);
    }

    #[test]
    fn eta_phase_pi() {
        let s = ReservoirState::eta(2, 0, PI, 1).unwrap();
        assert!(close(s.amplitude_at(0), C64::new(FRAC_1_SQRT_2, 0.0), 1e-15));
        assert!(close(s.amplitude_at(1), C64::new(-FRAC_1_SQRT_2, 0.0), 1e-15));
    }

    #[test]
    fn eta_rejects_zero_length() {
        assert!(matches!(
            ReservoirState::eta(0, 3, 0.0, 1),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn shift_translates_support() {
        let s = ReservoirState::eta(4, 10, 0.0, 2).unwrap();
        let t = s.apply_shift(-1).unwrap();
        assert_eq!(t.support(), Some((9, 12)));
        for l in 9..=12 {
            assert_eq!(t.amplitude_at(l), s.amplitude_at(l + 1));
        }
        assert_eq!(s.apply_shift(0).unwrap(), s);
    }

    #[test]
    fn shift_overflow_without_guard() {
        let s = ReservoirState::eta(4, 10, 0.0, 0).unwrap();
        assert!(matches!(s.apply_shift(-1), Err(Error::WindowOverflow { shift: -1, .. })));
        assert!(matches!(s.apply_shift(1), Err(Error::WindowOverflow { .. })));
    }

    #[test]
    fn overlap_examples() {
        let s = ReservoirState::eta(4, 10, 0.0, 0).unwrap();
        assert!(close(s.shift_overlap(1), C64::new(0.75, 0.0), 1e-15));
        assert!(close(s.shift_overlap(0), C64::new(1.0, 0.0), 1e-15));
        assert_eq!(s.shift_overlap(5), ZERO);
    }

    #[test]
    fn overlap_with_phase_matches_closed_form() {
        let theta = 0.37;
        let s = ReservoirState::eta(9, 4, theta, 2).unwrap();
        for a in -12i64..=12 {
            let expect = C64::from_polar(
                (1.0 - a.abs() as f64 / 9.0).max(0.0),
                -(a as f64) * theta,
            );
            assert!(close(s.shift_overlap(a), expect, 1e-14), "a={a}");
        }
    }

    #[test]
    fn laurent_expectation_examples() {
        let p = LaurentCoeffs::from_real(&[(0, 2.0), (1, -1.0), (-1, -1.0)]);
        let s4 = ReservoirState::eta(4, 10, 0.0, 0).unwrap();
        assert!(close(s4.laurent_expectation(&p), C64::new(0.5, 0.0), 1e-15));
        assert!(close(
            s4.laurent_expectation(&LaurentCoeffs::constant(1.0)),
            C64::new(1.0, 0.0),
            1e-15
        ));
        // (1-Δ)(1-Δ⁻¹) against the brute-force norm of (1-Δ⁻¹)|η⟩.
        let s2 = ReservoirState::eta(2, 3, 0.0, 1).unwrap();
        let q = LaurentCoeffs::binomial(1.0, -1.0, -1);
        let expanded = &q.adjoint() * &q;
        assert_eq!(expanded, p);
        let (norm, _) = s2.apply_polynomial(&q).unwrap();
        assert!((norm * norm - 1.0).abs() < 1e-15);
        assert!(close(s2.laurent_expectation(&expanded), C64::new(1.0, 0.0), 1e-15));
    }

    #[test]
    fn reservoir_overlap_examples() {
        assert!(close(reservoir_overlap(0.3, 0.3, 7).unwrap(), C64::new(1.0, 0.0), 1e-15));
        let l = 6;
        let o = reservoir_overlap(0.1, 0.1 + 2.0 * PI / l as f64, l).unwrap();
        assert!(o.norm() < 1e-15);
        let o2 = reservoir_overlap(0.0, PI / 2.0, 2).unwrap();
        assert!((o2.norm() - FRAC_1_SQRT_2).abs() < 1e-15);
        let direct = ReservoirState::eta(5, 0, 0.2, 0)
            .unwrap()
            .inner(&ReservoirState::eta(5, 0, 1.1, 0).unwrap());
        assert!(close(direct, reservoir_overlap(0.2, 1.1, 5).unwrap(), 1e-15));
    }

    #[test]
    fn long_reservoir_overlap_uses_dirichlet_kernel() {
        let l = DIRECT_OVERLAP_MAX + 3;
        for d in [0.0, 1e-7, 0.013, 2.0 * PI / l as f64, 1.7, 2.0 * PI, 2.0 * PI + 3e-6] {
            let fast = reservoir_overlap(0.4, 0.4 + d, l).unwrap();
            let sum: C64 = (0..l).map(|j| C64::from_polar(1.0, j as f64 * d)).sum::<C64>() / l as f64;
            assert!(close(fast, sum, 1e-9), "d={d}: {fast} vs {sum}");
        }
        assert!((reservoir_overlap(0.0, PI, 1_000_000_000).unwrap().norm()).abs() < 1e-9);
    }

    #[test]
    fn product_support_is_sumset() {
        let a = LaurentCoeffs::from_real(&[(0, 1.0), (2, 1.0)]);
        let b = LaurentCoeffs::from_real(&[(-1, 1.0), (2, -1.0)]);
        assert_eq!((&a * &b).support(), vec![-1, 1, 2, 4]);
        // cancellation keeps the entry
        let c = LaurentCoeffs::from_real(&[(0, 1.0), (1, 1.0)]);
        let d = LaurentCoeffs::from_real(&[(0, 1.0), (1, -1.0)]);
        let cd = &c * &d;
        assert_eq!(cd.support(), vec![0, 1, 2]);
        assert_eq!(cd.get(1), ZERO);
    }

    proptest! {
        #[test]
        fn shift_preserves_norm_bitwise(len in 1usize..20, l0 in -50i64..50, theta in -3.0f64..3.0, k in -5i64..=5) {
            let s = ReservoirState::eta(len, l0, theta, 5).unwrap();
            let t = s.apply_shift(k).unwrap();
            prop_assert_eq!(t.norm_sqr().to_bits(), s.norm_sqr().to_bits());
        }

        #[test]
        fn overlap_conjugate_symmetry(len in 1usize..15, theta in -3.0f64..3.0, a in -20i64..20) {
            let s = ReservoirState::eta(len, 0, theta, 2).unwrap();
            prop_assert!(close(s.shift_overlap(-a), s.shift_overlap(a).conj(), 1e-15));
        }

        #[test]
        fn overlap_closed_form(len in 1usize..40, a in -80i64..80) {
            prop_assume!(a.unsigned_abs() as usize <= 2 * len);
            let s = ReservoirState::eta(len, 7, 0.0, 0).unwrap();
            let expect = (1.0 - a.abs() as f64 / len as f64).max(0.0);
            prop_assert!((s.shift_overlap(a).re - expect).abs() <= 1e-12);
            prop_assert_eq!(s.shift_overlap(a).im, 0.0);
        }

        #[test]
        fn laurent_linearity(
            p in proptest::collection::vec((-6i64..6, -2.0f64..2.0), 1..6),
            q in proptest::collection::vec((-6i64..6, -2.0f64..2.0), 1..6),
            theta in -3.0f64..3.0,
        ) {
            let s = ReservoirState::eta(5, 0, theta, 0).unwrap();
            let p = LaurentCoeffs::from_real(&p);
            let q = LaurentCoeffs::from_real(&q);
            let lhs = s.laurent_expectation(&(&p + &q));
            let rhs = s.laurent_expectation(&p) + s.laurent_expectation(&q);
            prop_assert!(close(lhs, rhs, 1e-12));
        }
    }
}
