//! Quaternion arithmetic over any [`Real`] scalar.
//!
//! Points of S³ are unit quaternions; tangent vectors and frame fields are
//! quaternion-valued as well, so the whole ambient geometry reduces to
//! Hamilton products. The scalar type is generic: `Quat<f64>` for plain
//! evaluation, `Quat<Jet1>` / `Quat<Jet2>` when derivatives ride along.

use crate::error::{GeomError, Result};
use crate::jet::Real;
use rand::Rng;

/// A quaternion w + x i + y j + z k.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quat<S = f64> {
    pub w: S,
    pub x: S,
    pub y: S,
    pub z: S,
}

impl<S: Real> Quat<S> {
    pub fn new(w: S, x: S, y: S, z: S) -> Self {
        Quat { w, x, y, z }
    }

    pub fn zero() -> Self {
        Quat::new(S::zero(), S::zero(), S::zero(), S::zero())
    }

    pub fn from_array(a: [S; 4]) -> Self {
        Quat::new(a[0], a[1], a[2], a[3])
    }

    pub fn as_array(&self) -> [S; 4] {
        [self.w, self.x, self.y, self.z]
    }

    pub fn conj(&self) -> Self {
        Quat::new(self.w, -self.x, -self.y, -self.z)
    }

    pub fn scale(&self, s: S) -> Self {
        Quat::new(self.w * s, self.x * s, self.y * s, self.z * s)
    }

    /// Euclidean inner product of the coefficient vectors in R^4.
    pub fn dot(&self, o: &Self) -> S {
        self.w * o.w + self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn norm_sq(&self) -> S {
        self.dot(self)
    }

    pub fn norm(&self) -> S {
        self.norm_sq().sqrt()
    }

    pub fn normalized(&self) -> Self {
        self.scale(self.norm().recip())
    }

    /// Multiplicative inverse conj(q)/|q|^2. Unchecked: see [`qinv`] for the
    /// zero-norm-aware variant.
    pub fn inverse(&self) -> Self {
        self.conj().scale(self.norm_sq().recip())
    }

    /// The value part as a plain `f64` quaternion.
    pub fn value(&self) -> Quat<f64> {
        Quat::new(
            self.w.value(),
            self.x.value(),
            self.y.value(),
            self.z.value(),
        )
    }
}

impl Quat<f64> {
    pub const ONE: Quat<f64> = Quat {
        w: 1.0,
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };
    pub const I: Quat<f64> = Quat {
        w: 0.0,
        x: 1.0,
        y: 0.0,
        z: 0.0,
    };
    pub const J: Quat<f64> = Quat {
        w: 0.0,
        x: 0.0,
        y: 1.0,
        z: 0.0,
    };
    pub const K: Quat<f64> = Quat {
        w: 0.0,
        x: 0.0,
        y: 0.0,
        z: 1.0,
    };

    /// Promote constant coefficients into any scalar type.
    pub fn lift<S: Real>(&self) -> Quat<S> {
        Quat::new(
            S::from_f64(self.w),
            S::from_f64(self.x),
            S::from_f64(self.y),
            S::from_f64(self.z),
        )
    }

    /// Uniformly random unit quaternion by rejection sampling from the cube.
    pub fn random_unit<R: Rng>(rng: &mut R) -> Quat<f64> {
        loop {
            let q = Quat::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            );
            let n2 = q.norm_sq();
            if n2 > 1e-4 && n2 <= 1.0 {
                return q.scale(1.0 / n2.sqrt());
            }
        }
    }

    /// Uniformly random unit imaginary quaternion.
    pub fn random_unit_imaginary<R: Rng>(rng: &mut R) -> Quat<f64> {
        loop {
            let q = Quat::new(
                0.0,
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            );
            let n2 = q.norm_sq();
            if n2 > 1e-4 && n2 <= 1.0 {
                return q.scale(1.0 / n2.sqrt());
            }
        }
    }
}

/// Left-invariant frame generators on S³: x₁ = i, x₂ = j, x₃ = −k.
pub fn frame_axis(m: usize) -> Quat<f64> {
    match m {
        0 => Quat::I,
        1 => Quat::J,
        2 => Quat::K.scale(-1.0),
        _ => panic!("frame axis index out of range: {m}"),
    }
}

impl<S: Real> std::ops::Add for Quat<S> {
    type Output = Quat<S>;
    fn add(self, o: Quat<S>) -> Quat<S> {
        Quat::new(self.w + o.w, self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl<S: Real> std::ops::Sub for Quat<S> {
    type Output = Quat<S>;
    fn sub(self, o: Quat<S>) -> Quat<S> {
        Quat::new(self.w - o.w, self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl<S: Real> std::ops::Neg for Quat<S> {
    type Output = Quat<S>;
    fn neg(self) -> Quat<S> {
        Quat::new(-self.w, -self.x, -self.y, -self.z)
    }
}

impl<S: Real> std::ops::Mul for Quat<S> {
    type Output = Quat<S>;
    fn mul(self, o: Quat<S>) -> Quat<S> {
        let (a, b) = (self, o);
        Quat::new(
            a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
            a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
            a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
            a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w,
        )
    }
}

/// Hamilton product with the crate's sign conventions.
pub fn qmul<S: Real>(a: Quat<S>, b: Quat<S>) -> Quat<S> {
    a * b
}

/// Checked multiplicative inverse.
pub fn qinv<S: Real>(a: Quat<S>) -> Result<Quat<S>> {
    if a.norm_sq().value() == 0.0 {
        return Err(GeomError::ZeroNorm);
    }
    Ok(a.inverse())
}

/// Half-commutator ½(ab − ba) of imaginary quaternions: the quaternionic
/// counterpart of the R³ cross product. Both inputs and the result are
/// imaginary when the inputs are.
pub fn im_half_commutator<S: Real>(a: Quat<S>, b: Quat<S>) -> Quat<S> {
    (a * b - b * a).scale(S::from_f64(0.5))
}

// Coefficients of exp on imaginary quaternions, written as functions of
// s = |v|² so they stay smooth through v = 0:
//   exp(v) = c(s) + m(s)·v,  c(s) = cos √s,  m(s) = sin √s / √s.
// Each helper returns (f, f', f'') in s for jet composition.

fn cos_sqrt_c2(s: f64) -> (f64, f64, f64) {
    let (q, q1, _) = sinc_parts(s);
    let c = if s < SERIES_CUT {
        let s2 = s * s;
        let s3 = s2 * s;
        1.0 - s / 2.0 + s2 / 24.0 - s3 / 720.0 + s2 * s2 / 40320.0 - s2 * s3 / 3_628_800.0
            + s3 * s3 / 479_001_600.0
    } else {
        s.sqrt().cos()
    };
    // c'(s) = -q/2 and c''(s) = -q'/2 hold exactly.
    (c, -q / 2.0, -q1 / 2.0)
}

fn sinc_sqrt_c2(s: f64) -> (f64, f64, f64) {
    sinc_parts(s)
}

// The cut balances series truncation against cancellation in the closed
// forms, whose q2 numerator is O(r^5) assembled from O(1) terms.
const SERIES_CUT: f64 = 0.1;

fn sinc_parts(s: f64) -> (f64, f64, f64) {
    if s < SERIES_CUT {
        // Truncation error below 2e-15 on [0, 0.1] for all three parts.
        let s2 = s * s;
        let s3 = s2 * s;
        let q = 1.0 - s / 6.0 + s2 / 120.0 - s3 / 5040.0 + s2 * s2 / 362_880.0
            - s2 * s3 / 39_916_800.0
            + s3 * s3 / 6_227_020_800.0;
        let q1 = -1.0 / 6.0 + s / 60.0 - s2 / 1680.0 + s3 / 90720.0 - s2 * s2 / 7_983_360.0
            + s2 * s3 / 1_037_836_800.0;
        let q2 = 1.0 / 60.0 - s / 840.0 + s2 / 30240.0 - s3 / 1_995_840.0
            + s2 * s2 / 207_567_360.0
            - s2 * s3 / 31_135_104_000.0;
        (q, q1, q2)
    } else {
        let r = s.sqrt();
        let (sr, cr) = r.sin_cos();
        let q = sr / r;
        let q1 = (r * cr - sr) / (2.0 * r * r * r);
        let q2 = (-2.0 * r * r * sr - 6.0 * r * cr + 6.0 * sr) / (8.0 * r.powi(5));
        (q, q1, q2)
    }
}

/// exp(c₀ i + c₁ j + c₂ k) on the unit sphere, differentiable in the
/// coefficients (smooth through the origin via the sinc form).
pub fn exp_im<S: Real>(c: [S; 3]) -> Quat<S> {
    let s = c[0] * c[0] + c[1] * c[1] + c[2] * c[2];
    let cs = s.lift_c2(cos_sqrt_c2);
    let m = s.lift_c2(sinc_sqrt_c2);
    Quat::new(cs, m * c[0], m * c[1], m * c[2])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::Jet2;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn qdist(a: Quat<f64>, b: Quat<f64>) -> f64 {
        (a - b).norm()
    }

    #[test]
    fn hamilton_table() {
        assert_eq!(Quat::I * Quat::J, Quat::K);
        assert_eq!(Quat::J * Quat::K, Quat::I);
        assert_eq!(Quat::K * Quat::I, Quat::J);
        assert_eq!(Quat::I * Quat::I, -Quat::ONE);
        assert_eq!(Quat::J * Quat::J, -Quat::ONE);
        assert_eq!(Quat::K * Quat::K, -Quat::ONE);
    }

    #[test]
    fn unit_multiplication_and_complex_subalgebra() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..32 {
            let q = Quat::random_unit(&mut rng);
            assert!(qdist(qmul(q, Quat::ONE), q) == 0.0);
        }
        // (0.6 + 0.8i)(0.6 - 0.8i) = 0.36 + 0.64 = 1.
        let a = Quat::new(0.6, 0.8, 0.0, 0.0);
        let b = Quat::new(0.6, -0.8, 0.0, 0.0);
        assert!(qdist(qmul(a, b), Quat::ONE) <= 1e-15);
    }

    #[test]
    fn inverse_cases() {
        assert!(qdist(qinv(Quat::I).unwrap(), -Quat::I) == 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..32 {
            let q = Quat::random_unit(&mut rng);
            assert!(qdist(qinv(q).unwrap(), q.conj()) <= 1e-14);
            assert!(qdist(qmul(q, qinv(q).unwrap()), Quat::ONE) <= 1e-14);
        }
        let two = Quat::new(2.0, 0.0, 0.0, 0.0);
        assert!(qdist(qinv(two).unwrap(), Quat::new(0.5, 0.0, 0.0, 0.0)) <= 1e-15);
        assert!(qinv(Quat::<f64>::zero()).is_err());
    }

    #[test]
    fn half_commutator_cases() {
        assert_eq!(im_half_commutator(Quat::I, Quat::J), Quat::K);
        assert_eq!(im_half_commutator(Quat::I, Quat::I), Quat::zero());
        // Bilinearity: (i + j) x j = i x j = k.
        assert_eq!(im_half_commutator(Quat::I + Quat::J, Quat::J), Quat::K);
    }

    #[test]
    fn exp_im_matches_axis_rotations() {
        let t = 0.8_f64;
        let e = exp_im([t, 0.0, 0.0]);
        assert!(qdist(e, Quat::new(t.cos(), t.sin(), 0.0, 0.0)) <= 1e-15);
        assert!(qdist(exp_im([0.0; 3]), Quat::ONE) == 0.0);
        // |exp(v)| = 1 away from the series switchover too.
        let e2 = exp_im([1.3, -0.4, 2.2]);
        assert!((e2.norm() - 1.0).abs() <= 1e-14);
    }

    #[test]
    fn exp_im_jets_match_finite_differences() {
        let t0 = [0.12, -0.05, 0.2];
        let seeded = exp_im([
            Jet2::variable(t0[0], 0),
            Jet2::variable(t0[1], 1),
            Jet2::variable(t0[2], 2),
        ]);
        let eval = |t: [f64; 3]| exp_im(t);
        let step = 1e-4;
        for axis in 0..3 {
            let mut tp = t0;
            tp[axis] += step;
            let mut tm = t0;
            tm[axis] -= step;
            let fd = (eval(tp) - eval(tm)).scale(1.0 / (2.0 * step));
            let jet_grad = Quat::new(
                seeded.w.g[axis],
                seeded.x.g[axis],
                seeded.y.g[axis],
                seeded.z.g[axis],
            );
            assert!(
                qdist(fd, jet_grad) <= 1e-7,
                "axis {axis}: fd {fd:?} vs jet {jet_grad:?}"
            );
        }
        // One mixed second derivative across the series switchover region.
        let at = |s0: f64, s1: f64| {
            let t = [t0[0] + s0, t0[1] + s1, t0[2]];
            eval(t)
        };
        let fd2 = (at(step, step) - at(step, -step) - at(-step, step) + at(-step, -step))
            .scale(1.0 / (4.0 * step * step));
        let jet_h = Quat::new(
            seeded.w.h[0][1],
            seeded.x.h[0][1],
            seeded.y.h[0][1],
            seeded.z.h[0][1],
        );
        assert!(qdist(fd2, jet_h) <= 1e-6);
    }

    proptest! {
        #[test]
        fn associativity_and_conjugation(
            a in prop::array::uniform4(-2.0f64..2.0),
            b in prop::array::uniform4(-2.0f64..2.0),
            c in prop::array::uniform4(-2.0f64..2.0),
        ) {
            let (a, b, c) = (Quat::from_array(a), Quat::from_array(b), Quat::from_array(c));
            prop_assert!(qdist((a * b) * c, a * (b * c)) <= 1e-13);
            prop_assert!(qdist((a * b).conj(), b.conj() * a.conj()) <= 1e-13);
            let rel = ((a * b).norm() - a.norm() * b.norm()).abs()
                / (1.0 + a.norm() * b.norm());
            prop_assert!(rel <= 1e-14);
        }
    }
}
