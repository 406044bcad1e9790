//! Independent reference implementation used by the integration tests.
//!
//! Hyperfine matrix elements are built in the uncoupled |J m_J⟩|I m_I⟩
//! basis from Clebsch–Gordan coefficients (Racah's closed form in floating
//! point), and polarization sums run over Cartesian axes. Only the level
//! data is shared with the library.

#![allow(dead_code)]

use num_complex::Complex64;
use srslab::atomdata::SpeciesData;

pub const C: f64 = 299_792_458.0;
pub const HBAR: f64 = 1.054_571_817e-34;
pub const EPS0: f64 = 8.854_187_812_8e-12;
pub const E_CHARGE: f64 = 1.602_176_634e-19;
pub const A0: f64 = 5.291_772_109_03e-11;

fn ln_fact(n: i32) -> f64 {
    assert!(n >= 0);
    (1..=n).map(|k| (k as f64).ln()).sum()
}

/// ⟨j1 m1 j2 m2 | J M⟩ with all arguments doubled.
pub fn clebsch(j1: i32, m1: i32, j2: i32, m2: i32, j: i32, m: i32) -> f64 {
    if m1 + m2 != m || m1.abs() > j1 || m2.abs() > j2 || m.abs() > j {
        return 0.0;
    }
    if j < (j1 - j2).abs() || j > j1 + j2 || (j1 + j2 + j) % 2 != 0 {
        return 0.0;
    }
    if (j1 + m1) % 2 != 0 || (j2 + m2) % 2 != 0 || (j + m) % 2 != 0 {
        return 0.0;
    }
    let h = |x: i32| x / 2;
    let pre = 0.5
        * ((j + 1) as f64).ln()
        + 0.5
            * (ln_fact(h(j1 + j2 - j)) + ln_fact(h(j1 - j2 + j)) + ln_fact(h(-j1 + j2 + j))
                - ln_fact(h(j1 + j2 + j) + 1))
        + 0.5
            * (ln_fact(h(j1 + m1)) + ln_fact(h(j1 - m1)) + ln_fact(h(j2 + m2)) + ln_fact(h(j2 - m2))
                + ln_fact(h(j + m))
                + ln_fact(h(j - m)));
    let mut sum = 0.0;
    for k in 0..=100 {
        let args = [
            h(j1 + j2 - j) - k,
            h(j1 - m1) - k,
            h(j2 + m2) - k,
            h(j - j2 + m1) + k,
            h(j - j1 - m2) + k,
        ];
        if args[0] < 0 || args[1] < 0 || args[2] < 0 {
            break;
        }
        if args[3] < 0 || args[4] < 0 {
            continue;
        }
        let den = ln_fact(k) + args.iter().map(|&a| ln_fact(a)).sum::<f64>();
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * (pre - den).exp();
    }
    sum
}

/// Wigner 3j from a Clebsch–Gordan coefficient (doubled arguments).
pub fn three_j(j1: i32, j2: i32, j3: i32, m1: i32, m2: i32, m3: i32) -> f64 {
    let phase = (j1 - j2 - m3) / 2;
    let sign = if phase.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    sign / ((j3 + 1) as f64).sqrt() * clebsch(j1, m1, j2, m2, j3, -m3)
}

/// Hyperfine state in doubled units.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct St {
    pub level: usize,
    pub f: i32,
    pub m: i32,
}

pub struct Oracle<'a> {
    pub species: &'a SpeciesData,
    pub i2: i32,
    pub inter: Vec<usize>,
}

impl<'a> Oracle<'a> {
    pub fn new(species: &'a SpeciesData) -> Self {
        let ground_l = species.levels().iter().find(|l| l.energy == 0.0).unwrap().l;
        let inter = species
            .levels()
            .iter()
            .enumerate()
            .filter(|(_, l)| (l.l + ground_l) % 2 == 1)
            .map(|(k, _)| k)
            .collect();
        Oracle {
            species,
            i2: species.nuclear_spin.twice(),
            inter,
        }
    }

    pub fn idx(&self, label: &str) -> usize {
        self.species.levels().iter().position(|l| l.label == label).unwrap()
    }

    pub fn st(&self, s: &str) -> St {
        let st = srslab::HyperfineState::parse(s).unwrap();
        St {
            level: self.idx(&st.level),
            f: st.f.twice(),
            m: st.m.twice(),
        }
    }

    fn j2(&self, level: usize) -> i32 {
        self.species.levels()[level].j.twice()
    }

    pub fn energy(&self, level: usize) -> f64 {
        self.species.levels()[level].energy
    }

    /// ⟨b‖r‖k⟩ in a0 under the stored-upper-bra convention.
    pub fn reduced(&self, b: usize, k: usize) -> f64 {
        let lb = &self.species.levels()[b].label;
        let lk = &self.species.levels()[k].label;
        for d in self.species.dipoles() {
            if &d.upper == lb && &d.lower == lk {
                return d.value;
            }
            if &d.lower == lb && &d.upper == lk {
                let ju = self.j2(k);
                let jl = self.j2(b);
                let sign = if ((ju - jl) / 2).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                return sign * (((ju + 1) as f64) / ((jl + 1) as f64)).sqrt() * d.value;
            }
        }
        0.0
    }

    pub fn states(&self, level: usize) -> Vec<St> {
        let j = self.j2(level);
        let mut out = Vec::new();
        let mut f = (j - self.i2).abs();
        while f <= j + self.i2 {
            let mut m = -f;
            while m <= f {
                out.push(St { level, f, m });
                m += 2;
            }
            f += 2;
        }
        out
    }

    /// ⟨b|r_q|k⟩ in a0 via the uncoupled basis.
    pub fn me(&self, b: St, k: St, q: i32) -> f64 {
        let r = self.reduced(b.level, k.level);
        if r == 0.0 {
            return 0.0;
        }
        let (jb, jk, i) = (self.j2(b.level), self.j2(k.level), self.i2);
        let mut sum = 0.0;
        let mut mi = -i;
        while mi <= i {
            let mjb = b.m - mi;
            let mjk = k.m - mi;
            if mjb.abs() <= jb && mjk.abs() <= jk && mjb == mjk + 2 * q {
                let phase = if ((jb - mjb) / 2).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                let fine = phase * three_j(jb, 2, jk, -mjb, 2 * q, mjk) * r;
                sum += clebsch(jb, mjb, i, mi, b.f, b.m) * clebsch(jk, mjk, i, mi, k.f, k.m) * fine;
            }
            mi += 2;
        }
        sum
    }

    /// ⟨b|r·ε|k⟩ with Cartesian components of r.
    pub fn dot(&self, b: St, k: St, eps: &[Complex64; 3]) -> Complex64 {
        let rm = self.me(b, k, -1);
        let r0 = self.me(b, k, 0);
        let rp = self.me(b, k, 1);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let rx = Complex64::new((rm - rp) * s, 0.0);
        let ry = Complex64::new(0.0, (rm + rp) * s);
        let rz = Complex64::new(r0, 0.0);
        rx * eps[0] + ry * eps[1] + rz * eps[2]
    }

    fn kets(&self, connect: &[usize]) -> Vec<(f64, Vec<St>)> {
        self.inter
            .iter()
            .filter(|&&k| connect.iter().all(|&c| self.reduced(c, k) != 0.0))
            .map(|&k| (self.energy(k), self.states(k)))
            .collect()
    }

    /// (Λ+V, ladder) rates in 1/s for a real or complex drive polarization.
    pub fn moore(&self, i: St, f: St, omega: f64, field: f64, eps: &[Complex64; 3]) -> (f64, f64) {
        let ei = self.energy(i.level);
        let ef = self.energy(f.level);
        let w_sc = omega + ei - ef;
        let w_sc_l = ei - ef - omega;
        let epsc = eps.map(|c| c.conj());
        let axes = [
            [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)],
            [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
            [Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
        ];
        let kets = self.kets(&[i.level, f.level]);
        let (mut lv, mut lad) = (0.0, 0.0);
        for e in &axes {
            let mut a = Complex64::new(0.0, 0.0);
            let mut b = Complex64::new(0.0, 0.0);
            for (ek, states) in &kets {
                for &k in states {
                    if w_sc > 0.0 {
                        a += self.dot(f, k, e) * self.dot(k, i, eps) / (ek - ei - omega)
                            + self.dot(f, k, eps) * self.dot(k, i, e) / (ek - ef + omega);
                    }
                    if w_sc_l > 0.0 {
                        b += self.dot(f, k, e) * self.dot(k, i, &epsc) / (ek - ei + omega)
                            + self.dot(f, k, &epsc) * self.dot(k, i, e) / (ek - ef - omega);
                    }
                }
            }
            lv += a.norm_sqr();
            lad += b.norm_sqr();
        }
        let ea0 = E_CHARGE * A0;
        let pre = |w: f64| field * field * w.powi(3) / (12.0 * std::f64::consts::PI * EPS0 * HBAR.powi(3) * C.powi(3)) * ea0.powi(4);
        (
            if w_sc > 0.0 { pre(w_sc) * lv } else { 0.0 },
            if w_sc_l > 0.0 { pre(w_sc_l) * lad } else { 0.0 },
        )
    }

    /// Light shift δ in rad/s.
    pub fn stark(&self, s: St, omega: f64, field: f64, eps: &[Complex64; 3]) -> f64 {
        let es = self.energy(s.level);
        let mut sum = 0.0;
        for (ek, states) in self.kets(&[s.level]) {
            let w = ek - es;
            for k in states {
                sum += w * self.dot(s, k, eps).norm_sqr() / (w * w - omega * omega);
            }
        }
        let ea0 = E_CHARGE * A0;
        field * field / (4.0 * HBAR * HBAR) * ea0 * ea0 * sum
    }

    /// Raman Rabi frequency in rad/s.
    pub fn raman(&self, a: St, b: St, omega: f64, f1: f64, e1: &[Complex64; 3], f2: f64, e2: &[Complex64; 3]) -> f64 {
        let ea = self.energy(a.level);
        let eb = self.energy(b.level);
        let e1c = e1.map(|c| c.conj());
        let e2c = e2.map(|c| c.conj());
        let mut sum = Complex64::new(0.0, 0.0);
        for (ek, states) in self.kets(&[a.level, b.level]) {
            for k in states {
                sum += self.dot(b, k, &e1c) * self.dot(k, a, e2) / (ek - ea - omega)
                    + self.dot(b, k, e1) * self.dot(k, a, &e2c) / (ek - eb + omega);
            }
        }
        let ea0 = E_CHARGE * A0;
        (ea0 * ea0 * f1 * f2 / (4.0 * HBAR * HBAR) * sum).norm()
    }
}

pub fn real(v: [f64; 3]) -> [Complex64; 3] {
    v.map(|x| Complex64::new(x, 0.0))
}

/// Beam polarizations for k̂ in the x–z plane and k̂′ in the y–z plane.
pub fn eps1(phi: f64, gamma: f64) -> [Complex64; 3] {
    real([gamma.cos() * phi.cos(), gamma.sin(), -gamma.cos() * phi.sin()])
}

pub fn eps2(phi: f64, gamma: f64) -> [Complex64; 3] {
    real([gamma.sin(), gamma.cos() * phi.cos(), -gamma.cos() * phi.sin()])
}

pub fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}
