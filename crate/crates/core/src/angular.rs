//! Wigner 3-j and 6-j symbols and laser-beam geometry.
//!
//! The symbols are evaluated with the Racah finite sums in exact rational
//! arithmetic; only the final square root is taken in floating point. Values
//! are memoized process-wide.

use std::collections::HashMap;
use std::f64::consts::FRAC_1_SQRT_2;
use std::sync::{OnceLock, RwLock};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::halfint::HalfInt;

fn factorials() -> &'static RwLock<Vec<BigInt>> {
    static TABLE: OnceLock<RwLock<Vec<BigInt>>> = OnceLock::new();
    TABLE.get_or_init(|| RwLock::new(vec![BigInt::one()]))
}

fn factorial(n: i32) -> BigInt {
    debug_assert!(n >= 0);
    let n = n as usize;
    {
        let table = factorials().read().unwrap();
        if let Some(f) = table.get(n) {
            return f.clone();
        }
    }
    let mut table = factorials().write().unwrap();
    while table.len() <= n {
        let k = table.len();
        let next = &table[k - 1] * BigInt::from(k);
        table.push(next);
    }
    table[n].clone()
}

/// (a+b-c)! (a-b+c)! (-a+b+c)! / (a+b+c+1)! for twice-valued arguments of a
/// valid triad.
fn triangle_coefficient(a: i32, b: i32, c: i32) -> BigRational {
    BigRational::new(
        factorial((a + b - c) / 2) * factorial((a - b + c) / 2) * factorial((-a + b + c) / 2),
        factorial((a + b + c) / 2 + 1),
    )
}

fn is_triad(a: i32, b: i32, c: i32) -> bool {
    a >= 0 && b >= 0 && c >= 0 && (a + b + c) % 2 == 0 && c <= a + b && c >= (a - b).abs()
}

/// sign(s) * sqrt(p * s^2), with the square root applied to the exact
/// product so that cancellation in `s` costs no precision.
fn signed_sqrt_product(p: &BigRational, s: &BigRational) -> f64 {
    if s.is_zero() {
        return 0.0;
    }
    let magnitude = (p * s * s).to_f64().unwrap_or(f64::NAN).sqrt();
    if s.is_negative() {
        -magnitude
    } else {
        magnitude
    }
}

type Key3j = [i32; 6];
type Key6j = [i32; 6];

fn cache_3j() -> &'static RwLock<HashMap<Key3j, f64>> {
    static CACHE: OnceLock<RwLock<HashMap<Key3j, f64>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

fn cache_6j() -> &'static RwLock<HashMap<Key6j, f64>> {
    static CACHE: OnceLock<RwLock<HashMap<Key6j, f64>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Wigner 3-j symbol `(j1 j2 j3; m1 m2 m3)`.
///
/// Returns 0 whenever the selection rules fail (triangle condition,
/// `m1 + m2 + m3 = 0`, `|m| <= j`, `j - m` integer).
pub fn wigner3j(j1: HalfInt, j2: HalfInt, j3: HalfInt, m1: HalfInt, m2: HalfInt, m3: HalfInt) -> f64 {
    let key = [j1, j2, j3, m1, m2, m3].map(HalfInt::twice);
    if let Some(v) = cache_3j().read().unwrap().get(&key) {
        return *v;
    }
    let value = wigner3j_uncached(key);
    cache_3j().write().unwrap().insert(key, value);
    value
}

fn wigner3j_uncached([j1, j2, j3, m1, m2, m3]: [i32; 6]) -> f64 {
    if m1 + m2 + m3 != 0 || !is_triad(j1, j2, j3) {
        return 0.0;
    }
    for (j, m) in [(j1, m1), (j2, m2), (j3, m3)] {
        if m.abs() > j || (j - m) % 2 != 0 {
            return 0.0;
        }
    }
    // Work with integer (un-doubled) combinations from here on.
    let h = |x: i32| x / 2;
    let jm1p = h(j1 + m1);
    let jm1m = h(j1 - m1);
    let jm2p = h(j2 + m2);
    let jm2m = h(j2 - m2);
    let jm3p = h(j3 + m3);
    let jm3m = h(j3 - m3);

    let a = h(j3 - j2 + m1); // t + a >= 0
    let b = h(j3 - j1 - m2); // t + b >= 0
    let c = h(j1 + j2 - j3); // c - t >= 0
    let d = jm1m; // d - t >= 0
    let e = jm2p; // e - t >= 0
    let t_min = 0.max(-a).max(-b);
    let t_max = c.min(d).min(e);

    let mut sum = BigRational::zero();
    for t in t_min..=t_max {
        let denom = factorial(t)
            * factorial(t + a)
            * factorial(t + b)
            * factorial(c - t)
            * factorial(d - t)
            * factorial(e - t);
        let term = BigRational::new(BigInt::one(), denom);
        if t % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }

    let prefactor = triangle_coefficient(j1, j2, j3)
        * BigRational::from_integer(
            factorial(jm1p)
                * factorial(jm1m)
                * factorial(jm2p)
                * factorial(jm2m)
                * factorial(jm3p)
                * factorial(jm3m),
        );
    let phase = h(j1 - j2 - m3);
    let value = signed_sqrt_product(&prefactor, &sum);
    if phase.rem_euclid(2) == 1 {
        -value
    } else {
        value
    }
}

/// Wigner 6-j symbol `{j1 j2 j3; j4 j5 j6}`; 0 if any triad fails.
pub fn wigner6j(j1: HalfInt, j2: HalfInt, j3: HalfInt, j4: HalfInt, j5: HalfInt, j6: HalfInt) -> f64 {
    let key = [j1, j2, j3, j4, j5, j6].map(HalfInt::twice);
    if let Some(v) = cache_6j().read().unwrap().get(&key) {
        return *v;
    }
    let value = wigner6j_uncached(key);
    cache_6j().write().unwrap().insert(key, value);
    value
}

fn wigner6j_uncached([a, b, c, d, e, f]: [i32; 6]) -> f64 {
    let triads = [(a, b, c), (a, e, f), (d, b, f), (d, e, c)];
    if triads.iter().any(|&(x, y, z)| !is_triad(x, y, z)) {
        return 0.0;
    }
    let h = |x: i32| x / 2;
    let s1 = h(a + b + c);
    let s2 = h(a + e + f);
    let s3 = h(d + b + f);
    let s4 = h(d + e + c);
    let u1 = h(a + b + d + e);
    let u2 = h(a + c + d + f);
    let u3 = h(b + c + e + f);
    let t_min = s1.max(s2).max(s3).max(s4);
    let t_max = u1.min(u2).min(u3);

    let mut sum = BigRational::zero();
    for t in t_min..=t_max {
        let num = factorial(t + 1);
        let denom = factorial(t - s1)
            * factorial(t - s2)
            * factorial(t - s3)
            * factorial(t - s4)
            * factorial(u1 - t)
            * factorial(u2 - t)
            * factorial(u3 - t);
        let term = BigRational::new(num, denom);
        if t % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    let prefactor = triads
        .iter()
        .map(|&(x, y, z)| triangle_coefficient(x, y, z))
        .fold(BigRational::one(), |acc, x| acc * x);
    signed_sqrt_product(&prefactor, &sum)
}

/// [`wigner3j`] for floating-point arguments; rejects non-half-integers.
pub fn wigner3j_f64(j: [f64; 3], m: [f64; 3]) -> Result<f64> {
    let [j1, j2, j3] = try_halves(j)?;
    let [m1, m2, m3] = try_halves(m)?;
    Ok(wigner3j(j1, j2, j3, m1, m2, m3))
}

/// [`wigner6j`] for floating-point arguments; rejects non-half-integers.
pub fn wigner6j_f64(upper: [f64; 3], lower: [f64; 3]) -> Result<f64> {
    let [j1, j2, j3] = try_halves(upper)?;
    let [j4, j5, j6] = try_halves(lower)?;
    Ok(wigner6j(j1, j2, j3, j4, j5, j6))
}

fn try_halves(x: [f64; 3]) -> Result<[HalfInt; 3]> {
    Ok([
        HalfInt::try_from(x[0])?,
        HalfInt::try_from(x[1])?,
        HalfInt::try_from(x[2])?,
    ])
}

/// Unit polarization vector in the Cartesian lab frame (z = quantization
/// axis).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Polarization([Complex64; 3]);

impl Polarization {
    const NORM_TOLERANCE: f64 = 1e-12;

    /// Requires unit norm to 1e-12.
    pub fn new(v: [Complex64; 3]) -> Result<Self> {
        let norm: f64 = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > Self::NORM_TOLERANCE {
            return Err(Error::InvalidArgument(format!(
                "polarization norm is {norm}, expected 1"
            )));
        }
        Ok(Polarization(v))
    }

    /// Normalizes an arbitrary nonzero vector.
    pub fn normalized(v: [Complex64; 3]) -> Result<Self> {
        let norm: f64 = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidArgument("zero polarization vector".into()));
        }
        Ok(Polarization(v.map(|c| c / norm)))
    }

    pub fn real(v: [f64; 3]) -> Result<Self> {
        Self::normalized(v.map(|x| Complex64::new(x, 0.0)))
    }

    /// Spherical unit vector e_q, q ∈ {-1, 0, +1}.
    pub fn spherical_basis(q: i32) -> Self {
        let s = FRAC_1_SQRT_2;
        match q {
            -1 => Polarization([Complex64::new(s, 0.0), Complex64::new(0.0, -s), Complex64::zero()]),
            0 => Polarization([Complex64::zero(), Complex64::zero(), Complex64::one()]),
            1 => Polarization([Complex64::new(-s, 0.0), Complex64::new(0.0, -s), Complex64::zero()]),
            _ => panic!("spherical index {q} out of range"),
        }
    }

    pub fn cartesian(&self) -> [Complex64; 3] {
        self.0
    }

    pub fn conj(&self) -> Self {
        Polarization(self.0.map(|c| c.conj()))
    }

    /// Components (ε₋₁, ε₀, ε₊₁) with ε₀ = p_z and ε±₁ = ∓(p_x ± i p_y)/√2.
    pub fn spherical_components(&self) -> [Complex64; 3] {
        let [x, y, z] = self.0;
        let i = Complex64::i();
        [
            (x - i * y) * FRAC_1_SQRT_2,
            z,
            -(x + i * y) * FRAC_1_SQRT_2,
        ]
    }
}

/// Spherical components of a unit polarization, ordered (ε₋₁, ε₀, ε₊₁).
pub fn spherical_components(p: &Polarization) -> [Complex64; 3] {
    p.spherical_components()
}

/// Single beam with k̂ in the x–z plane at angle `phi` to the quantization
/// axis; `gamma` rotates the polarization within the plane normal to k̂,
/// measured from the projected quantization axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BeamGeometry {
    pub phi: f64,
    pub gamma: f64,
}

impl BeamGeometry {
    pub fn new(phi: f64, gamma: f64) -> Self {
        BeamGeometry { phi, gamma }
    }

    pub fn k_hat(&self) -> [f64; 3] {
        [self.phi.sin(), 0.0, self.phi.cos()]
    }

    pub fn epsilon(&self) -> [f64; 3] {
        let (sg, cg) = self.gamma.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [cg * cp, sg, -cg * sp]
    }

    pub fn polarization(&self) -> Polarization {
        Polarization(self.epsilon().map(|x| Complex64::new(x, 0.0)))
    }
}

/// Second Raman beam with k̂′ in the y–z plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SecondBeamGeometry {
    pub phi: f64,
    pub gamma: f64,
}

impl SecondBeamGeometry {
    pub fn new(phi: f64, gamma: f64) -> Self {
        SecondBeamGeometry { phi, gamma }
    }

    pub fn k_hat(&self) -> [f64; 3] {
        [0.0, self.phi.sin(), self.phi.cos()]
    }

    pub fn epsilon(&self) -> [f64; 3] {
        let (sg, cg) = self.gamma.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [sg, cg * cp, -cg * sp]
    }

    pub fn polarization(&self) -> Polarization {
        Polarization(self.epsilon().map(|x| Complex64::new(x, 0.0)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn h(twice: i32) -> HalfInt {
        HalfInt::from_twice(twice)
    }

    fn w3(j: [i32; 3], m: [i32; 3]) -> f64 {
        wigner3j(h(j[0]), h(j[1]), h(j[2]), h(m[0]), h(m[1]), h(m[2]))
    }

    fn w6(j: [i32; 6]) -> f64 {
        wigner6j(h(j[0]), h(j[1]), h(j[2]), h(j[3]), h(j[4]), h(j[5]))
    }

    #[test]
    fn three_j_examples() {
        assert_abs_diff_eq!(w3([2, 2, 0], [2, -2, 0]), 1.0 / 3f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(w3([2, 2, 4], [0, 0, 0]), (2.0f64 / 15.0).sqrt(), epsilon = 1e-15);
        assert_eq!(w3([2, 2, 6], [0, 0, 0]), 0.0);
        // m sum nonzero
        assert_eq!(w3([2, 2, 2], [2, 0, 0]), 0.0);
        // |m| > j
        assert_eq!(w3([1, 1, 2], [3, -3, 0]), 0.0);
        // j - m not integer
        assert_eq!(w3([2, 2, 2], [1, -1, 0]), 0.0);
    }

    #[test]
    fn six_j_examples() {
        assert_abs_diff_eq!(w6([2, 2, 2, 2, 2, 2]), 1.0 / 6.0, epsilon = 1e-15);
        assert_eq!(w6([2, 2, 8, 2, 2, 2]), 0.0);
        assert_eq!(w6([1, 1, 1, 1, 1, 1]), 0.0);
    }

    #[test]
    fn large_j_has_no_overflow() {
        // (15/2 15/2 15; ...) sum runs to big factorials
        let v = w3([15, 15, 30], [15, -15, 0]);
        assert!(v.is_finite() && v != 0.0);
        let v6 = w6([15, 15, 30, 15, 15, 30]);
        assert!(v6.is_finite());
    }

    #[test]
    fn float_interface_rejects_non_half_integers() {
        assert!(wigner3j_f64([1.0, 1.0, 0.3], [0.0; 3]).is_err());
        assert!(wigner6j_f64([1.0; 3], [1.0, 1.0, 0.25]).is_err());
        assert_abs_diff_eq!(
            wigner3j_f64([1.0, 1.0, 2.0], [0.0; 3]).unwrap(),
            (2.0f64 / 15.0).sqrt(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn spherical_components_of_axes() {
        let z = Polarization::real([0.0, 0.0, 1.0]).unwrap();
        let c = z.spherical_components();
        assert_abs_diff_eq!(c[0].norm(), 0.0);
        assert_abs_diff_eq!(c[1].re, 1.0);
        assert_abs_diff_eq!(c[2].norm(), 0.0);

        let x = Polarization::real([1.0, 0.0, 0.0]).unwrap();
        let c = x.spherical_components();
        assert_abs_diff_eq!(c[0].re, FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_abs_diff_eq!(c[2].re, -FRAC_1_SQRT_2, epsilon = 1e-15);
    }

    #[test]
    fn spherical_basis_vectors_have_single_component() {
        // components are e_q·p, so e_q itself has (−1)^q at index −q
        for q in -1..=1i32 {
            let c = Polarization::spherical_basis(q).spherical_components();
            for (idx, qq) in (-1..=1).enumerate() {
                let expect = if qq == -q { f64::from((-1i32).pow(q.unsigned_abs())) } else { 0.0 };
                assert_abs_diff_eq!(c[idx].re, expect, epsilon = 1e-15);
                assert_abs_diff_eq!(c[idx].im, 0.0, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn non_unit_polarization_is_rejected() {
        assert!(Polarization::new([Complex64::one(), Complex64::one(), Complex64::zero()]).is_err());
    }

    proptest! {
        #[test]
        fn beam_vectors_are_orthonormal(phi in -10.0f64..10.0, gamma in -10.0f64..10.0) {
            let g = BeamGeometry::new(phi, gamma);
            let (k, e) = (g.k_hat(), g.epsilon());
            let dot: f64 = k.iter().zip(&e).map(|(a, b)| a * b).sum();
            prop_assert!(dot.abs() < 1e-12);
            prop_assert!((e.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!((k.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-12);

            let g2 = SecondBeamGeometry::new(phi, gamma);
            let (k, e) = (g2.k_hat(), g2.epsilon());
            let dot: f64 = k.iter().zip(&e).map(|(a, b)| a * b).sum();
            prop_assert!(dot.abs() < 1e-12);
            prop_assert!((e.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn spherical_norm_is_preserved(
            re in proptest::array::uniform3(-1.0f64..1.0),
            im in proptest::array::uniform3(-1.0f64..1.0),
        ) {
            let v = [0, 1, 2].map(|i| Complex64::new(re[i], im[i]));
            prop_assume!(v.iter().map(|c| c.norm_sqr()).sum::<f64>() > 1e-6);
            let p = Polarization::normalized(v).unwrap();
            let n: f64 = p.spherical_components().iter().map(|c| c.norm_sqr()).sum();
            prop_assert!((n - 1.0).abs() < 1e-12);
        }
    }
}
