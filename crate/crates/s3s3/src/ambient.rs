//! The homogeneous nearly Kähler structure on S³ × S³.
//!
//! Conventions, fixed once and used everywhere:
//!
//! * Frame generators x₁ = i, x₂ = j, x₃ = −k, so the left-invariant fields
//!   are Eᵢ(p,q) = (p xᵢ, 0) and Fᵢ(p,q) = (0, q xᵢ) with bracket table
//!   [Eᵢ,Eⱼ] = −2 ε_ijk E_k (ε₁₂₃ = +1) and [Eᵢ,Fⱼ] = 0.
//! * J(U,V) = (1/√3)(2pq⁻¹V − U, −2qp⁻¹U + V). The metric is
//!   g(Z,Z') = ½(⟨Z,Z'⟩ + ⟨JZ,JZ'⟩), expanded below in closed form.
//! * P(U,V) = (pq⁻¹V, qp⁻¹U) and Q(U,V) = (−U,V).
//!
//! A note on J: the Lie-algebra-level shorthand "(U,V) ↦ (1/√3)(2V − U,
//! −2U + V)" sometimes quoted for this structure does not square to −Id and
//! is not what this module implements; the pointwise formula above is the
//! self-consistent one and everything here derives from it.
//!
//! G = ∇̃J and ∇̃P are evaluated tensorially by expanding arguments in the
//! frame and applying the constant structure tables; no differentiation is
//! involved, which keeps downstream residuals at the 1e-12 tier. A
//! finite-difference curvature oracle lives at the bottom of the module for
//! cross-checking only.

use crate::error::{GeomError, Result};
use crate::jet::{Jet1, Real};
use crate::quat::{exp_im, frame_axis, Quat};
use rand::Rng;

/// Drift beyond which a would-be unit quaternion is renormalized.
pub const RENORM_LIMIT: f64 = 1e-12;
/// Drift beyond which construction of an [`AmbientPoint`] is rejected.
pub const REJECT_LIMIT: f64 = 1e-6;
/// Distance beyond which two base points are considered distinct.
const BASE_MATCH_LIMIT: f64 = 1e-9;
/// Tangency defect beyond which vector construction is rejected.
const TANGENCY_LIMIT: f64 = 1e-8;

/// A point (p, q) of S³ × S³.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AmbientPoint<S: Real = f64> {
    pub p: Quat<S>,
    pub q: Quat<S>,
}

impl<S: Real> AmbientPoint<S> {
    /// Validating constructor: renormalizes drift above `1e-12`, rejects
    /// drift above `1e-6`.
    pub fn new(p: Quat<S>, q: Quat<S>) -> Result<Self> {
        let dp = (p.norm().value() - 1.0).abs();
        let dq = (q.norm().value() - 1.0).abs();
        let drift = dp.max(dq);
        if drift > REJECT_LIMIT {
            return Err(GeomError::OffSphere {
                drift,
                limit: REJECT_LIMIT,
            });
        }
        if drift > RENORM_LIMIT {
            Ok(AmbientPoint {
                p: p.normalized(),
                q: q.normalized(),
            })
        } else {
            Ok(AmbientPoint { p, q })
        }
    }

    /// Constructor for inputs that are unit by construction.
    pub fn new_unchecked(p: Quat<S>, q: Quat<S>) -> Self {
        AmbientPoint { p, q }
    }

    pub fn value(&self) -> AmbientPoint<f64> {
        AmbientPoint {
            p: self.p.value(),
            q: self.q.value(),
        }
    }

    fn distance_value(&self, o: &Self) -> f64 {
        let a = (self.p.value() - o.p.value()).norm();
        let b = (self.q.value() - o.q.value()).norm();
        a.max(b)
    }
}

/// A tangent vector (U, V) to S³ × S³, carried with its base point.
#[derive(Clone, Copy, Debug)]
pub struct AmbientVector<S: Real = f64> {
    pub base: AmbientPoint<S>,
    pub u: Quat<S>,
    pub v: Quat<S>,
}

/// A raw ℝ⁸ directional derivative (not necessarily tangent).
#[derive(Clone, Copy, Debug)]
pub struct AmbientDeriv<S: Real = f64> {
    pub du: Quat<S>,
    pub dv: Quat<S>,
}

impl<S: Real> AmbientVector<S> {
    /// Validating constructor: rejects inputs that fail Euclidean tangency
    /// ⟨U,p⟩ = ⟨V,q⟩ = 0 beyond `1e-8`.
    pub fn new(base: AmbientPoint<S>, u: Quat<S>, v: Quat<S>) -> Result<Self> {
        let z = AmbientVector { base, u, v };
        let defect = z.tangency_defect();
        if defect > TANGENCY_LIMIT {
            return Err(GeomError::NotTangent { defect });
        }
        Ok(z)
    }

    pub fn new_unchecked(base: AmbientPoint<S>, u: Quat<S>, v: Quat<S>) -> Self {
        AmbientVector { base, u, v }
    }

    pub fn zero_at(base: AmbientPoint<S>) -> Self {
        AmbientVector {
            base,
            u: Quat::zero(),
            v: Quat::zero(),
        }
    }

    pub fn tangency_defect(&self) -> f64 {
        let a = self.u.value().dot(&self.base.p.value()).abs();
        let b = self.v.value().dot(&self.base.q.value()).abs();
        a.max(b)
    }

    pub fn value(&self) -> AmbientVector<f64> {
        AmbientVector {
            base: self.base.value(),
            u: self.u.value(),
            v: self.v.value(),
        }
    }

    pub fn scale(&self, s: S) -> Self {
        AmbientVector {
            base: self.base,
            u: self.u.scale(s),
            v: self.v.scale(s),
        }
    }

    /// The almost complex structure J.
    pub fn apply_j(&self) -> Self {
        let pq = self.base.p * self.base.q.inverse();
        let qp = self.base.q * self.base.p.inverse();
        let c = S::from_f64(1.0 / 3.0_f64.sqrt());
        AmbientVector {
            base: self.base,
            u: ((pq * self.v).scale(S::from_f64(2.0)) - self.u).scale(c),
            v: (self.v - (qp * self.u).scale(S::from_f64(2.0))).scale(c),
        }
    }

    /// The almost product structure P.
    pub fn apply_p(&self) -> Self {
        let pq = self.base.p * self.base.q.inverse();
        let qp = self.base.q * self.base.p.inverse();
        AmbientVector {
            base: self.base,
            u: pq * self.v,
            v: qp * self.u,
        }
    }

    /// The factor-swapping reflection Q(U,V) = (−U, V).
    pub fn apply_q(&self) -> Self {
        AmbientVector {
            base: self.base,
            u: -self.u,
            v: self.v,
        }
    }

    /// Nearly Kähler metric against another vector at the same base point
    /// (debug-asserted). Closed form
    /// (4/3)(⟨U,U'⟩+⟨V,V'⟩) − (2/3)(⟨p⁻¹U, q⁻¹V'⟩ + ⟨p⁻¹U', q⁻¹V⟩).
    pub fn g(&self, o: &Self) -> S {
        debug_assert!(self.base.distance_value(&o.base) <= BASE_MATCH_LIMIT);
        let pi = self.base.p.inverse();
        let qi = self.base.q.inverse();
        let direct = self.u.dot(&o.u) + self.v.dot(&o.v);
        let cross = (pi * self.u).dot(&(qi * o.v)) + (pi * o.u).dot(&(qi * self.v));
        direct.scale_f64(4.0 / 3.0) - cross.scale_f64(2.0 / 3.0)
    }

    /// Product round metric ⟨Z,Z'⟩ = ⟨U,U'⟩ + ⟨V,V'⟩.
    pub fn euclid(&self, o: &Self) -> S {
        debug_assert!(self.base.distance_value(&o.base) <= BASE_MATCH_LIMIT);
        self.u.dot(&o.u) + self.v.dot(&o.v)
    }

    pub fn g_norm(&self) -> S {
        self.g(self).sqrt()
    }

    /// Coefficients in the frame basis (e₁,e₂,e₃,f₁,f₂,f₃); exact because
    /// {p xᵢ} and {q xᵢ} are Euclidean-orthonormal bases of the factors.
    pub fn frame_coeffs(&self) -> [S; 6] {
        let mut c = [S::zero(); 6];
        for i in 0..3 {
            let ax = frame_axis(i).lift::<S>();
            c[i] = self.u.dot(&(self.base.p * ax));
            c[3 + i] = self.v.dot(&(self.base.q * ax));
        }
        c
    }
}

// Small helper so metric formulas stay readable for generic scalars.
trait ScaleF64 {
    fn scale_f64(self, c: f64) -> Self;
}

impl<S: Real> ScaleF64 for S {
    fn scale_f64(self, c: f64) -> Self {
        self * S::from_f64(c)
    }
}

impl<S: Real> std::ops::Add for AmbientVector<S> {
    type Output = AmbientVector<S>;
    fn add(self, o: AmbientVector<S>) -> AmbientVector<S> {
        debug_assert!(self.base.distance_value(&o.base) <= BASE_MATCH_LIMIT);
        AmbientVector {
            base: self.base,
            u: self.u + o.u,
            v: self.v + o.v,
        }
    }
}

impl<S: Real> std::ops::Sub for AmbientVector<S> {
    type Output = AmbientVector<S>;
    fn sub(self, o: AmbientVector<S>) -> AmbientVector<S> {
        debug_assert!(self.base.distance_value(&o.base) <= BASE_MATCH_LIMIT);
        AmbientVector {
            base: self.base,
            u: self.u - o.u,
            v: self.v - o.v,
        }
    }
}

impl<S: Real> std::ops::Neg for AmbientVector<S> {
    type Output = AmbientVector<S>;
    fn neg(self) -> AmbientVector<S> {
        AmbientVector {
            base: self.base,
            u: -self.u,
            v: -self.v,
        }
    }
}

/// The six left-invariant frame fields at a shared base point.
#[derive(Clone, Copy, Debug)]
pub struct FrameBasis<S: Real = f64> {
    pub e: [AmbientVector<S>; 3],
    pub f: [AmbientVector<S>; 3],
}

/// Frame vector by flat index: 0..3 are E₁..E₃, 3..6 are F₁..F₃.
pub fn frame_vector<S: Real>(pt: &AmbientPoint<S>, idx: usize) -> AmbientVector<S> {
    let ax = frame_axis(idx % 3).lift::<S>();
    if idx < 3 {
        AmbientVector::new_unchecked(*pt, pt.p * ax, Quat::zero())
    } else {
        AmbientVector::new_unchecked(*pt, Quat::zero(), pt.q * ax)
    }
}

/// All six frame fields evaluated at `pt`.
pub fn frame_at<S: Real>(pt: &AmbientPoint<S>) -> FrameBasis<S> {
    FrameBasis {
        e: [
            frame_vector(pt, 0),
            frame_vector(pt, 1),
            frame_vector(pt, 2),
        ],
        f: [
            frame_vector(pt, 3),
            frame_vector(pt, 4),
            frame_vector(pt, 5),
        ],
    }
}

/// Rebuild a vector from frame coefficients.
pub fn from_frame_coeffs<S: Real>(pt: &AmbientPoint<S>, c: [S; 6]) -> AmbientVector<S> {
    let mut u = Quat::zero();
    let mut v = Quat::zero();
    for i in 0..3 {
        let ax = frame_axis(i).lift::<S>();
        u = u + (pt.p * ax).scale(c[i]);
        v = v + (pt.q * ax).scale(c[3 + i]);
    }
    AmbientVector::new_unchecked(*pt, u, v)
}

/// ε_ijk contraction helper: for i ≠ j returns (k, ε_ijk) with k the third
/// index; `None` on the diagonal.
fn eps_pair(i: usize, j: usize) -> Option<(usize, f64)> {
    if i == j {
        return None;
    }
    let k = 3 - i - j;
    let sign = if (j + 3 - i) % 3 == 1 { 1.0 } else { -1.0 };
    Some((k, sign))
}

/// The tensor G = ∇̃J, evaluated by frame expansion of the structure table
///   G(Eᵢ,Eⱼ) = −(2/(3√3)) ε_ijk (E_k + 2F_k),
///   G(Eᵢ,Fⱼ) = G(Fᵢ,Eⱼ) = −(2/(3√3)) ε_ijk (E_k − F_k),
///   G(Fᵢ,Fⱼ) = +(2/(3√3)) ε_ijk (2E_k + F_k).
pub fn tensor_g<S: Real>(x: &AmbientVector<S>, y: &AmbientVector<S>) -> AmbientVector<S> {
    debug_assert!(x.base.distance_value(&y.base) <= BASE_MATCH_LIMIT);
    let a = x.frame_coeffs();
    let b = y.frame_coeffs();
    let c0 = -2.0 / (3.0 * 3.0_f64.sqrt());
    let mut out = [S::zero(); 6];
    for i in 0..3 {
        for j in 0..3 {
            let Some((k, s)) = eps_pair(i, j) else {
                continue;
            };
            let ee = a[i] * b[j];
            let ef = a[i] * b[3 + j];
            let fe = a[3 + i] * b[j];
            let ff = a[3 + i] * b[3 + j];
            let t_ee = ee.scale_f64(s * c0);
            out[k] = out[k] + t_ee;
            out[3 + k] = out[3 + k] + t_ee.scale_f64(2.0);
            let t_mixed = (ef + fe).scale_f64(s * c0);
            out[k] = out[k] + t_mixed;
            out[3 + k] = out[3 + k] - t_mixed;
            let t_ff = ff.scale_f64(-s * c0);
            out[k] = out[k] + t_ff.scale_f64(2.0);
            out[3 + k] = out[3 + k] + t_ff;
        }
    }
    from_frame_coeffs(&x.base, out)
}

/// The tensor (∇̃P)(X, Y) = (∇̃_X P)Y, by frame expansion of
///   (∇̃_{Eᵢ}P)Eⱼ = (1/3) ε_ijk (E_k + 2F_k),
///   (∇̃_{Eᵢ}P)Fⱼ = −(1/3) ε_ijk (2E_k + F_k),
///   (∇̃_{Fᵢ}P)Eⱼ = −(1/3) ε_ijk (E_k + 2F_k),
///   (∇̃_{Fᵢ}P)Fⱼ = +(1/3) ε_ijk (2E_k + F_k).
pub fn tensor_nabla_p<S: Real>(x: &AmbientVector<S>, y: &AmbientVector<S>) -> AmbientVector<S> {
    debug_assert!(x.base.distance_value(&y.base) <= BASE_MATCH_LIMIT);
    let a = x.frame_coeffs();
    let b = y.frame_coeffs();
    let third = 1.0 / 3.0;
    let mut out = [S::zero(); 6];
    for i in 0..3 {
        for j in 0..3 {
            let Some((k, s)) = eps_pair(i, j) else {
                continue;
            };
            let ee = (a[i] * b[j]).scale_f64(s * third);
            out[k] = out[k] + ee;
            out[3 + k] = out[3 + k] + ee.scale_f64(2.0);
            let ef = (a[i] * b[3 + j]).scale_f64(-s * third);
            out[k] = out[k] + ef.scale_f64(2.0);
            out[3 + k] = out[3 + k] + ef;
            let fe = (a[3 + i] * b[j]).scale_f64(-s * third);
            out[k] = out[k] + fe;
            out[3 + k] = out[3 + k] + fe.scale_f64(2.0);
            let ff = (a[3 + i] * b[3 + j]).scale_f64(s * third);
            out[k] = out[k] + ff.scale_f64(2.0);
            out[3 + k] = out[3 + k] + ff;
        }
    }
    from_frame_coeffs(&x.base, out)
}

/// Levi-Civita connection of g on frame-field pairs, as frame coefficients:
///   ∇̃_{Eᵢ}Eⱼ = −ε_ijk E_k,            ∇̃_{Eᵢ}Fⱼ = (ε_ijk/3)(E_k − F_k),
///   ∇̃_{Fᵢ}Eⱼ = (ε_ijk/3)(F_k − E_k),  ∇̃_{Fᵢ}Fⱼ = −ε_ijk F_k.
pub fn nabla_frame_pair(a: usize, b: usize) -> [f64; 6] {
    let mut out = [0.0; 6];
    let (i, j) = (a % 3, b % 3);
    let Some((k, s)) = eps_pair(i, j) else {
        return out;
    };
    match (a < 3, b < 3) {
        (true, true) => out[k] = -s,
        (true, false) => {
            out[k] = s / 3.0;
            out[3 + k] = -s / 3.0;
        }
        (false, true) => {
            out[k] = -s / 3.0;
            out[3 + k] = s / 3.0;
        }
        (false, false) => out[3 + k] = -s,
    }
    out
}

/// The curvature tensor R̃(X,Y)Z of the nearly Kähler metric, closed form:
/// 5/12 (g(Y,Z)X − g(X,Z)Y)
/// + 1/12 (g(JY,Z)JX − g(JX,Z)JY − 2 g(JX,Y)JZ)
/// + 1/3 (g(PY,Z)PX − g(PX,Z)PY + g(JPY,Z)JPX − g(JPX,Z)JPY).
pub fn curvature_r<S: Real>(
    x: &AmbientVector<S>,
    y: &AmbientVector<S>,
    z: &AmbientVector<S>,
) -> AmbientVector<S> {
    let jx = x.apply_j();
    let jy = y.apply_j();
    let jz = z.apply_j();
    let px = x.apply_p();
    let py = y.apply_p();
    let jpx = px.apply_j();
    let jpy = py.apply_j();
    let t1 = (x.scale(y.g(z)) - y.scale(x.g(z))).scale(S::from_f64(5.0 / 12.0));
    let t2 = (jx.scale(jy.g(z)) - jy.scale(jx.g(z)) - jz.scale(jx.g(y).scale_f64(2.0)))
        .scale(S::from_f64(1.0 / 12.0));
    let t3 = (px.scale(py.g(z)) - py.scale(px.g(z)) + jpx.scale(jpy.g(z)) - jpy.scale(jpx.g(z)))
        .scale(S::from_f64(1.0 / 3.0));
    t1 + t2 + t3
}

/// Projection of a raw ℝ⁸ derivative onto the tangent spaces of the sphere
/// factors: the Levi-Civita connection ∇ᴱ of the product round metric.
pub fn euclid_connection_from_raw<S: Real>(
    base: &AmbientPoint<S>,
    raw: &AmbientDeriv<S>,
) -> AmbientVector<S> {
    let pu = raw.du - base.p.scale(raw.du.dot(&base.p) * base.p.norm_sq().recip());
    let pv = raw.dv - base.q.scale(raw.dv.dot(&base.q) * base.q.norm_sq().recip());
    AmbientVector::new_unchecked(*base, pu, pv)
}

/// Nearly Kähler connection from the product connection:
/// ∇̃_X W = ∇ᴱ_X W − ½(JG(X,PW) + JG(W,PX)), where `w` is the value of the
/// differentiated field at the base point.
pub fn nk_from_euclid<S: Real>(
    x: &AmbientVector<S>,
    w: &AmbientVector<S>,
    nabla_e: &AmbientVector<S>,
) -> AmbientVector<S> {
    let c1 = tensor_g(x, &w.apply_p()).apply_j();
    let c2 = tensor_g(w, &x.apply_p()).apply_j();
    *nabla_e - (c1 + c2).scale(S::from_f64(0.5))
}

/// Full chain ℝ⁸ derivative → ∇̃.
pub fn nk_connection_from_raw<S: Real>(
    base: &AmbientPoint<S>,
    x: &AmbientVector<S>,
    w: &AmbientVector<S>,
    raw: &AmbientDeriv<S>,
) -> AmbientVector<S> {
    nk_from_euclid(x, w, &euclid_connection_from_raw(base, raw))
}

/// Connection-conversion stage selector for [`connect_convert`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConnectionKind {
    /// Raw ℝ⁸ derivative data → Levi-Civita connection of the product metric.
    EuclidR8ToProduct,
    /// Product Levi-Civita data (tangent) → nearly Kähler connection.
    ProductToNk,
}

/// Checked connection conversion. For `EuclidR8ToProduct` the data is a raw
/// derivative; for `ProductToNk` it must already be tangent.
pub fn connect_convert<S: Real>(
    kind: ConnectionKind,
    base: &AmbientPoint<S>,
    x: &AmbientVector<S>,
    w: &AmbientVector<S>,
    data: &AmbientDeriv<S>,
) -> Result<AmbientVector<S>> {
    for z in [x, w] {
        let defect = z.tangency_defect();
        if defect > TANGENCY_LIMIT {
            return Err(GeomError::NotTangent { defect });
        }
    }
    match kind {
        ConnectionKind::EuclidR8ToProduct => Ok(euclid_connection_from_raw(base, data)),
        ConnectionKind::ProductToNk => {
            let as_vec = AmbientVector::new(*base, data.du, data.dv)?;
            Ok(nk_from_euclid(x, w, &as_vec))
        }
    }
}

// Checked, Result-returning entry points for the binary tensor operations.

fn check_bases<S: Real>(a: &AmbientVector<S>, b: &AmbientVector<S>) -> Result<()> {
    let distance = a.base.distance_value(&b.base);
    if distance > BASE_MATCH_LIMIT {
        return Err(GeomError::BasePointMismatch { distance });
    }
    Ok(())
}

/// Checked nearly Kähler metric.
pub fn metric_g<S: Real>(a: &AmbientVector<S>, b: &AmbientVector<S>) -> Result<S> {
    check_bases(a, b)?;
    Ok(a.g(b))
}

/// Checked product round metric.
pub fn metric_euclid<S: Real>(a: &AmbientVector<S>, b: &AmbientVector<S>) -> Result<S> {
    check_bases(a, b)?;
    Ok(a.euclid(b))
}

/// The metric by its defining average ½(⟨Z,Z'⟩ + ⟨JZ,JZ'⟩); used to check
/// that both closed forms agree.
pub fn metric_g_via_j<S: Real>(a: &AmbientVector<S>, b: &AmbientVector<S>) -> Result<S> {
    check_bases(a, b)?;
    let direct = a.euclid(b);
    let viaj = a.apply_j().euclid(&b.apply_j());
    Ok((direct + viaj).scale_f64(0.5))
}

/// An ambient isometry (p,q) ↦ (a p c⁻¹, b q c⁻¹) with unit a, b, c.
#[derive(Clone, Copy, Debug)]
pub struct Isometry {
    pub a: Quat<f64>,
    pub b: Quat<f64>,
    pub c: Quat<f64>,
}

impl Isometry {
    pub fn identity() -> Self {
        Isometry {
            a: Quat::ONE,
            b: Quat::ONE,
            c: Quat::ONE,
        }
    }

    pub fn new(a: Quat<f64>, b: Quat<f64>, c: Quat<f64>) -> Result<Self> {
        for q in [a, b, c] {
            let drift = (q.norm() - 1.0).abs();
            if drift > REJECT_LIMIT {
                return Err(GeomError::OffSphere {
                    drift,
                    limit: REJECT_LIMIT,
                });
            }
        }
        Ok(Isometry {
            a: a.normalized(),
            b: b.normalized(),
            c: c.normalized(),
        })
    }

    pub fn random<R: Rng>(rng: &mut R) -> Self {
        Isometry {
            a: Quat::random_unit(rng),
            b: Quat::random_unit(rng),
            c: Quat::random_unit(rng),
        }
    }

    pub fn apply_point<S: Real>(&self, pt: &AmbientPoint<S>) -> AmbientPoint<S> {
        let a = self.a.lift::<S>();
        let b = self.b.lift::<S>();
        let ci = self.c.conj().lift::<S>();
        AmbientPoint {
            p: a * pt.p * ci,
            q: b * pt.q * ci,
        }
    }

    pub fn apply_vector<S: Real>(&self, z: &AmbientVector<S>) -> AmbientVector<S> {
        let a = self.a.lift::<S>();
        let b = self.b.lift::<S>();
        let ci = self.c.conj().lift::<S>();
        AmbientVector {
            base: self.apply_point(&z.base),
            u: a * z.u * ci,
            v: b * z.v * ci,
        }
    }

    /// self ∘ other.
    pub fn compose(&self, other: &Isometry) -> Isometry {
        Isometry {
            a: self.a * other.a,
            b: self.b * other.b,
            c: self.c * other.c,
        }
    }

    pub fn inverse(&self) -> Isometry {
        Isometry {
            a: self.a.conj(),
            b: self.b.conj(),
            c: self.c.conj(),
        }
    }

    /// Distance to another isometry, identifying (a,b,c) with (−a,−b,−c).
    pub fn distance(&self, other: &Isometry) -> f64 {
        let direct = (self.a - other.a)
            .norm()
            .max((self.b - other.b).norm())
            .max((self.c - other.c).norm());
        let flipped = (self.a + other.a)
            .norm()
            .max((self.b + other.b).norm())
            .max((self.c + other.c).norm());
        direct.min(flipped)
    }
}

/// Seeded random point of S³ × S³.
pub fn random_point<R: Rng>(rng: &mut R) -> AmbientPoint<f64> {
    AmbientPoint {
        p: Quat::random_unit(rng),
        q: Quat::random_unit(rng),
    }
}

/// Seeded random tangent vector at `pt` with components of order one.
pub fn random_tangent<R: Rng>(rng: &mut R, pt: &AmbientPoint<f64>) -> AmbientVector<f64> {
    let raw = AmbientDeriv {
        du: Quat::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        ),
        dv: Quat::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        ),
    };
    euclid_connection_from_raw(pt, &raw)
}

/// Residual of the ∇̃G identity
/// (∇̃G)(X,Y,Z) = (1/3)(g(X,Z)JY − g(X,Y)JZ − g(JY,Z)X)
/// with X, Y, Z the frame fields of flat indices (a, b, c); the left side is
/// obtained by differentiating `tensor_g` with first-order jets along the
/// left-invariant flow of X and subtracting connection terms.
pub fn nabla_g_identity_residual(pt: &AmbientPoint<f64>, a: usize, b: usize, c: usize) -> f64 {
    // Move the base point along the flow of the frame direction `a` with a
    // one-direction jet: p(t) = p·exp(t xₐ) on the factor X lives on.
    let t = Jet1::variable(0.0, 0);
    let ax = frame_axis(a % 3);
    let coeffs = [
        t * Jet1::constant(ax.x),
        t * Jet1::constant(ax.y),
        t * Jet1::constant(ax.z),
    ];
    let motion = exp_im(coeffs);
    let pt_jet: AmbientPoint<Jet1> = if a < 3 {
        AmbientPoint {
            p: pt.p.lift::<Jet1>() * motion,
            q: pt.q.lift::<Jet1>(),
        }
    } else {
        AmbientPoint {
            p: pt.p.lift::<Jet1>(),
            q: pt.q.lift::<Jet1>() * motion,
        }
    };
    let yj = frame_vector(&pt_jet, b);
    let zj = frame_vector(&pt_jet, c);
    let field = tensor_g(&yj, &zj);
    let raw = AmbientDeriv {
        du: Quat::new(
            field.u.w.g[0],
            field.u.x.g[0],
            field.u.y.g[0],
            field.u.z.g[0],
        ),
        dv: Quat::new(
            field.v.w.g[0],
            field.v.x.g[0],
            field.v.y.g[0],
            field.v.z.g[0],
        ),
    };

    let x = frame_vector(pt, a);
    let y = frame_vector(pt, b);
    let z = frame_vector(pt, c);
    let gyz = tensor_g(&y, &z);
    let dcov = nk_connection_from_raw(pt, &x, &gyz, &raw);

    // (∇̃_X G)(Y,Z) = ∇̃_X(G(Y,Z)) − G(∇̃_X Y, Z) − G(Y, ∇̃_X Z).
    let ny = from_frame_coeffs(pt, nabla_frame_pair(a, b));
    let nz = from_frame_coeffs(pt, nabla_frame_pair(a, c));
    let lhs = dcov - tensor_g(&ny, &z) - tensor_g(&y, &nz);

    let rhs = (y.apply_j().scale(x.g(&z)) - z.apply_j().scale(x.g(&y))
        - x.scale(y.apply_j().g(&z)))
    .scale(1.0 / 3.0);
    (lhs - rhs).g_norm()
}

// ---------------------------------------------------------------------------
// Finite-difference curvature oracle.
//
// Charts S³ × S³ near a point by products of one-parameter subgroups,
//   c(s) = (p e^{s₀x₁} e^{s₁x₂} e^{s₂x₃}, q e^{s₃x₁} e^{s₄x₂} e^{s₅x₃}),
// whose coordinate pushforwards have closed forms, so the metric matrix
// g_ab(s) is exact and only the s-derivatives are finite differences.
// ---------------------------------------------------------------------------

fn chart_factor(base: Quat<f64>, s: [f64; 3]) -> Quat<f64> {
    let mut out = base;
    for (m, &sm) in s.iter().enumerate() {
        let ax = frame_axis(m);
        out = out * exp_im([sm * ax.x, sm * ax.y, sm * ax.z]);
    }
    out
}

fn chart_factor_deriv(base: Quat<f64>, s: [f64; 3], axis: usize) -> Quat<f64> {
    // d/ds_axis (base · e^{s₀x₁} e^{s₁x₂} e^{s₂x₃}): insert the generator
    // after its own exponential factor.
    let mut out = base;
    for (m, &sm) in s.iter().enumerate() {
        let ax = frame_axis(m);
        out = out * exp_im([sm * ax.x, sm * ax.y, sm * ax.z]);
        if m == axis {
            out = out * ax;
        }
    }
    out
}

fn chart_metric(pt: &AmbientPoint<f64>, s: [f64; 6]) -> [[f64; 6]; 6] {
    let sp = [s[0], s[1], s[2]];
    let sq = [s[3], s[4], s[5]];
    let base = AmbientPoint {
        p: chart_factor(pt.p, sp),
        q: chart_factor(pt.q, sq),
    };
    let mut push = [AmbientVector::zero_at(base); 6];
    for a in 0..3 {
        push[a] = AmbientVector::new_unchecked(base, chart_factor_deriv(pt.p, sp, a), Quat::zero());
        push[3 + a] =
            AmbientVector::new_unchecked(base, Quat::zero(), chart_factor_deriv(pt.q, sq, a));
    }
    let mut gm = [[0.0; 6]; 6];
    for a in 0..6 {
        for b in a..6 {
            gm[a][b] = push[a].g(&push[b]);
            gm[b][a] = gm[a][b];
        }
    }
    gm
}

fn invert6(m: [[f64; 6]; 6]) -> [[f64; 6]; 6] {
    let mut a = m;
    let mut inv = [[0.0; 6]; 6];
    for (i, row) in inv.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for col in 0..6 {
        let mut piv = col;
        for r in col + 1..6 {
            if a[r][col].abs() > a[piv][col].abs() {
                piv = r;
            }
        }
        a.swap(col, piv);
        inv.swap(col, piv);
        let d = a[col][col];
        for c in 0..6 {
            a[col][c] /= d;
            inv[col][c] /= d;
        }
        for r in 0..6 {
            if r != col {
                let f = a[r][col];
                for c in 0..6 {
                    a[r][c] -= f * a[col][c];
                    inv[r][c] -= f * inv[col][c];
                }
            }
        }
    }
    inv
}

fn chart_christoffel(pt: &AmbientPoint<f64>, s: [f64; 6], step: f64) -> [[[f64; 6]; 6]; 6] {
    let mut dg = [[[0.0; 6]; 6]; 6];
    for dir in 0..6 {
        let mut sp = s;
        sp[dir] += step;
        let mut sm = s;
        sm[dir] -= step;
        let gp = chart_metric(pt, sp);
        let gm = chart_metric(pt, sm);
        for a in 0..6 {
            for b in 0..6 {
                dg[dir][a][b] = (gp[a][b] - gm[a][b]) / (2.0 * step);
            }
        }
    }
    let ginv = invert6(chart_metric(pt, s));
    let mut gamma = [[[0.0; 6]; 6]; 6];
    for d in 0..6 {
        for a in 0..6 {
            for b in 0..6 {
                let mut sum = 0.0;
                for c in 0..6 {
                    sum += ginv[d][c] * (dg[a][c][b] + dg[b][c][a] - dg[c][a][b]);
                }
                gamma[d][a][b] = 0.5 * sum;
            }
        }
    }
    gamma
}

/// Maximal relative disagreement between the closed-form curvature tensor and
/// a nested-finite-difference Riemann tensor of the metric at `pt`.
pub fn fd_curvature_relative_error(pt: &AmbientPoint<f64>, step: f64) -> f64 {
    let origin = [0.0; 6];
    let gamma0 = chart_christoffel(pt, origin, step);
    let mut dgamma = [[[[0.0; 6]; 6]; 6]; 6];
    for dir in 0..6 {
        let mut sp = origin;
        sp[dir] += step;
        let mut sm = origin;
        sm[dir] -= step;
        let gp = chart_christoffel(pt, sp, step);
        let gm = chart_christoffel(pt, sm, step);
        for d in 0..6 {
            for a in 0..6 {
                for b in 0..6 {
                    dgamma[dir][d][a][b] = (gp[d][a][b] - gm[d][a][b]) / (2.0 * step);
                }
            }
        }
    }
    let g0 = chart_metric(pt, origin);

    // Exact pushforwards at the origin are the frame fields.
    let push: Vec<AmbientVector<f64>> = (0..6).map(|a| frame_vector(pt, a)).collect();

    let mut max_closed = 0.0_f64;
    let mut closed = [[[[0.0; 6]; 6]; 6]; 6];
    for a in 0..6 {
        for b in 0..6 {
            for c in 0..6 {
                let r = curvature_r(&push[a], &push[b], &push[c]);
                for (d, pd) in push.iter().enumerate() {
                    closed[a][b][c][d] = r.g(pd);
                    max_closed = max_closed.max(closed[a][b][c][d].abs());
                }
            }
        }
    }

    let mut worst = 0.0_f64;
    for a in 0..6 {
        for b in 0..6 {
            for c in 0..6 {
                for d in 0..6 {
                    // R(∂_a,∂_b)∂_c = (∂_a Γ^e_bc − ∂_b Γ^e_ac
                    //   + Γ^f_bc Γ^e_af − Γ^f_ac Γ^e_bf) ∂_e.
                    let mut lowered = 0.0;
                    for e in 0..6 {
                        let mut re = dgamma[a][e][b][c] - dgamma[b][e][a][c];
                        for f in 0..6 {
                            re += gamma0[f][b][c] * gamma0[e][a][f]
                                - gamma0[f][a][c] * gamma0[e][b][f];
                        }
                        lowered += re * g0[e][d];
                    }
                    worst = worst.max((closed[a][b][c][d] - lowered).abs());
                }
            }
        }
    }
    worst / max_closed
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn vnorm(z: &AmbientVector<f64>) -> f64 {
        z.u.norm().max(z.v.norm())
    }

    fn origin() -> AmbientPoint<f64> {
        AmbientPoint::new_unchecked(Quat::ONE, Quat::ONE)
    }

    #[test]
    fn frame_at_identity_and_gram_matrix() {
        let pt = origin();
        let fr = frame_at(&pt);
        assert!(vnorm(&(fr.e[0] - AmbientVector::new_unchecked(pt, Quat::I, Quat::zero()))) == 0.0);
        // F₃ = (0, −q k).
        assert!(
            vnorm(&(fr.f[2] - AmbientVector::new_unchecked(pt, Quat::zero(), -Quat::K))) == 0.0
        );

        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..16 {
            let pt = random_point(&mut rng);
            for a in 0..6 {
                for b in 0..6 {
                    let expect = match (a < 3, b < 3) {
                        (true, true) | (false, false) => {
                            if a % 3 == b % 3 {
                                4.0 / 3.0
                            } else {
                                0.0
                            }
                        }
                        _ => {
                            if a % 3 == b % 3 {
                                -2.0 / 3.0
                            } else {
                                0.0
                            }
                        }
                    };
                    let got = frame_vector(&pt, a).g(&frame_vector(&pt, b));
                    assert!(
                        (got - expect).abs() <= 1e-13,
                        "gram({a},{b}) = {got}, expected {expect}"
                    );
                }
            }
        }
    }

    #[test]
    fn j_closed_form_at_identity() {
        let pt = origin();
        let s3 = 3.0_f64.sqrt();
        let z = AmbientVector::new_unchecked(pt, Quat::I, Quat::zero());
        let jz = z.apply_j();
        let expect = AmbientVector::new_unchecked(pt, Quat::I.scale(-1.0 / s3), Quat::I.scale(-2.0 / s3));
        assert!(vnorm(&(jz - expect)) <= 1e-15);

        let z2 = AmbientVector::new_unchecked(pt, Quat::zero(), Quat::I);
        let expect2 = AmbientVector::new_unchecked(pt, Quat::I.scale(2.0 / s3), Quat::I.scale(1.0 / s3));
        assert!(vnorm(&(z2.apply_j() - expect2)) <= 1e-15);
    }

    #[test]
    fn structure_operator_algebra() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..32 {
            let pt = random_point(&mut rng);
            let z = random_tangent(&mut rng, &pt);
            let w = random_tangent(&mut rng, &pt);
            // J² = −Id, P² = Id, PJ + JP = 0.
            assert!(vnorm(&(z.apply_j().apply_j() + z)) <= 1e-13);
            assert!(vnorm(&(z.apply_p().apply_p() - z)) <= 1e-13);
            assert!(
                vnorm(&(z.apply_j().apply_p() + z.apply_p().apply_j())) <= 1e-13
            );
            // Isometric for g; P symmetric.
            assert!((z.apply_j().g(&w.apply_j()) - z.g(&w)).abs() <= 1e-13);
            assert!((z.apply_p().g(&w.apply_p()) - z.g(&w)).abs() <= 1e-13);
            assert!((z.apply_p().g(&w) - z.g(&w.apply_p())).abs() <= 1e-13);
            // P E_i = F_i.
            for i in 0..3 {
                let d = frame_vector(&pt, i).apply_p() - frame_vector(&pt, 3 + i);
                assert!(vnorm(&d) <= 1e-14);
            }
            // Component form of P.
            let pz = z.apply_p();
            let expect_u = pt.p * pt.q.inverse() * z.v;
            assert!((pz.u - expect_u).norm() <= 1e-14);
            // Q relations: Q = (1/√3)(2PJ − JZ) and P = ½(Z − √3 QJZ).
            let qz = z.apply_q();
            let rhs =
                (z.apply_j().apply_p().scale(2.0) - z.apply_j()).scale(1.0 / 3.0_f64.sqrt());
            assert!(vnorm(&(qz - rhs)) <= 1e-13);
            let prhs = (z - z.apply_j().apply_q().scale(3.0_f64.sqrt())).scale(0.5);
            assert!(vnorm(&(pz - prhs)) <= 1e-13);
            // Metric bridges: ⟨Z,Z'⟩ = g(Z,Z') + ½g(Z,PZ') and
            // ⟨Z,QZ'⟩ = (√3/2) g(Z,PJZ'); the two g closed forms agree.
            assert!((z.euclid(&w) - (z.g(&w) + 0.5 * z.g(&w.apply_p()))).abs() <= 1e-13);
            assert!(
                (z.euclid(&w.apply_q()) - 3.0_f64.sqrt() / 2.0 * z.g(&w.apply_j().apply_p())).abs()
                    <= 1e-13
            );
            assert!((metric_g_via_j(&z, &w).unwrap() - z.g(&w)).abs() <= 1e-13);
        }
    }

    #[test]
    fn tensor_g_table_and_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pt = random_point(&mut rng);
        let fr = frame_at(&pt);
        // G(E₁,E₂) = −(2/(3√3))(E₃ + 2F₃).
        let g12 = tensor_g(&fr.e[0], &fr.e[1]);
        let c = -2.0 / (3.0 * 3.0_f64.sqrt());
        let expect = (fr.e[2] + fr.f[2].scale(2.0)).scale(c);
        assert!(vnorm(&(g12 - expect)) <= 1e-14);

        for _ in 0..32 {
            let pt = random_point(&mut rng);
            let x = random_tangent(&mut rng, &pt);
            let y = random_tangent(&mut rng, &pt);
            let z = random_tangent(&mut rng, &pt);
            // Skew symmetry and G(X,X) = 0.
            assert!(vnorm(&(tensor_g(&x, &x))) <= 1e-13);
            assert!(vnorm(&(tensor_g(&x, &y) + tensor_g(&y, &x))) <= 1e-13);
            // g(G(X,Y),G(Z,W)) constant-type identity.
            let w = random_tangent(&mut rng, &pt);
            let lhs = tensor_g(&x, &y).g(&tensor_g(&z, &w));
            let rhs = (x.g(&z) * y.g(&w) - x.g(&w) * y.g(&z)
                + x.apply_j().g(&z) * w.apply_j().g(&y)
                - x.apply_j().g(&w) * z.apply_j().g(&y))
                / 3.0;
            assert!((lhs - rhs).abs() <= 1e-12);
            // Nested identity G(X,G(Y,Z)).
            let lhs2 = tensor_g(&x, &tensor_g(&y, &z));
            let rhs2 = (y.scale(x.g(&z)) - z.scale(x.g(&y))
                + y.apply_j().scale(x.apply_j().g(&z))
                - z.apply_j().scale(x.apply_j().g(&y)))
            .scale(1.0 / 3.0);
            assert!(vnorm(&(lhs2 - rhs2)) <= 1e-12);
            // G is J-anti-commuting in the second slot relative to ∇̃P:
            // G(X,PY) + PG(X,Y) = −2J(∇̃_X P)Y.
            let lhs3 = tensor_g(&x, &y.apply_p()) + tensor_g(&x, &y).apply_p();
            let rhs3 = tensor_nabla_p(&x, &y).apply_j().scale(-2.0);
            assert!(vnorm(&(lhs3 - rhs3)) <= 1e-12);
        }
    }

    #[test]
    fn nabla_p_table_and_lemma_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let pt = random_point(&mut rng);
        let fr = frame_at(&pt);
        let np = tensor_nabla_p(&fr.e[0], &fr.e[1]);
        let expect = (fr.e[2] + fr.f[2].scale(2.0)).scale(1.0 / 3.0);
        assert!(vnorm(&(np - expect)) <= 1e-14);

        for _ in 0..32 {
            let pt = random_point(&mut rng);
            let x = random_tangent(&mut rng, &pt);
            let y = random_tangent(&mut rng, &pt);
            // PG(X,Y) + G(PX,PY) = 0.
            let i1 = tensor_g(&x, &y).apply_p() + tensor_g(&x.apply_p(), &y.apply_p());
            assert!(vnorm(&i1) <= 1e-13);
            // (∇̃_X P)JY = J(∇̃_X P)Y.
            let i2 = tensor_nabla_p(&x, &y.apply_j()) - tensor_nabla_p(&x, &y).apply_j();
            assert!(vnorm(&i2) <= 1e-13);
            // (∇̃_X P)PY + P(∇̃_X P)Y = 0.
            let i3 = tensor_nabla_p(&x, &y.apply_p()) + tensor_nabla_p(&x, &y).apply_p();
            assert!(vnorm(&i3) <= 1e-13);
            // (∇̃_X P)Y + (∇̃_{PX} P)Y = 0.
            let i4 = tensor_nabla_p(&x, &y) + tensor_nabla_p(&x.apply_p(), &y);
            assert!(vnorm(&i4) <= 1e-13);
        }
    }

    #[test]
    fn connection_conversion_reproduces_frame_table() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..8 {
            let pt = random_point(&mut rng);
            let fr = frame_at(&pt);
            // Field E₂ along the flow of E₁: raw derivative (p·i·j, 0).
            let raw = AmbientDeriv {
                du: pt.p * Quat::I * Quat::J,
                dv: Quat::zero(),
            };
            let nk = nk_connection_from_raw(&pt, &fr.e[0], &fr.e[1], &raw);
            // ∇̃_{E₁}E₂ = −E₃.
            assert!(vnorm(&(nk + fr.e[2])) <= 1e-13);

            // Field F₂ is constant along the flow of E₁: raw derivative 0.
            let raw0 = AmbientDeriv {
                du: Quat::zero(),
                dv: Quat::zero(),
            };
            let nk2 = nk_connection_from_raw(&pt, &fr.e[0], &fr.f[1], &raw0);
            // ∇̃_{E₁}F₂ = (1/3)(E₃ − F₃).
            let expect = (fr.e[2] - fr.f[2]).scale(1.0 / 3.0);
            assert!(vnorm(&(nk2 - expect)) <= 1e-13);

            // Full frame table against nabla_frame_pair.
            for a in 0..6 {
                for b in 0..6 {
                    let table = from_frame_coeffs(&pt, nabla_frame_pair(a, b));
                    // Raw derivative of frame field b along direction a:
                    // nonzero only when both live on the same factor.
                    let xa = frame_axis(a % 3);
                    let xb = frame_axis(b % 3);
                    let raw = if (a < 3) == (b < 3) {
                        if a < 3 {
                            AmbientDeriv {
                                du: pt.p * xa * xb,
                                dv: Quat::zero(),
                            }
                        } else {
                            AmbientDeriv {
                                du: Quat::zero(),
                                dv: pt.q * xa * xb,
                            }
                        }
                    } else {
                        AmbientDeriv {
                            du: Quat::zero(),
                            dv: Quat::zero(),
                        }
                    };
                    let got = nk_connection_from_raw(
                        &pt,
                        &frame_vector(&pt, a),
                        &frame_vector(&pt, b),
                        &raw,
                    );
                    assert!(
                        vnorm(&(got - table)) <= 1e-13,
                        "frame connection mismatch at ({a},{b})"
                    );
                }
            }
        }
    }

    #[test]
    fn curvature_algebraic_properties() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..16 {
            let pt = random_point(&mut rng);
            let x = random_tangent(&mut rng, &pt);
            let y = random_tangent(&mut rng, &pt);
            let z = random_tangent(&mut rng, &pt);
            assert!(vnorm(&curvature_r(&x, &x, &y)) <= 1e-13);
            let bianchi = curvature_r(&x, &y, &z) + curvature_r(&y, &z, &x) + curvature_r(&z, &x, &y);
            assert!(vnorm(&bianchi) <= 1e-12);
        }
    }

    #[test]
    fn nabla_g_identity_along_frame_directions() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let pt = random_point(&mut rng);
        for a in 0..6 {
            for (b, c) in [(0, 1), (2, 4), (5, 3), (1, 1), (4, 2)] {
                let r = nabla_g_identity_residual(&pt, a, b, c);
                assert!(r <= 1e-12, "residual {r} at ({a},{b},{c})");
            }
        }
    }

    #[test]
    fn fd_oracle_matches_closed_form_curvature() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let pt = random_point(&mut rng);
        let err = fd_curvature_relative_error(&pt, 1e-4);
        assert!(err <= 1e-5, "relative curvature disagreement {err}");
    }

    #[test]
    fn isometries_preserve_the_structure() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..16 {
            let iso = Isometry::random(&mut rng);
            let pt = random_point(&mut rng);
            let z = random_tangent(&mut rng, &pt);
            let w = random_tangent(&mut rng, &pt);
            // dF ∘ J = J ∘ dF, metric preserved, P preserved.
            let d1 = iso.apply_vector(&z.apply_j()) - iso.apply_vector(&z).apply_j();
            assert!(vnorm(&d1) <= 1e-13);
            assert!((iso.apply_vector(&z).g(&iso.apply_vector(&w)) - z.g(&w)).abs() <= 1e-13);
            let d2 = iso.apply_vector(&z.apply_p()) - iso.apply_vector(&z).apply_p();
            assert!(vnorm(&d2) <= 1e-13);
            // Round trip through the inverse.
            let back = iso.inverse().apply_point(&iso.apply_point(&pt));
            assert!((back.p - pt.p).norm().max((back.q - pt.q).norm()) <= 1e-13);
        }
    }

    #[test]
    fn checked_entry_points_reject_bad_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let pt1 = random_point(&mut rng);
        let pt2 = random_point(&mut rng);
        let z1 = random_tangent(&mut rng, &pt1);
        let z2 = random_tangent(&mut rng, &pt2);
        assert!(matches!(
            metric_g(&z1, &z2),
            Err(GeomError::BasePointMismatch { .. })
        ));
        let bad = Quat::new(1.1, 0.0, 0.0, 0.0);
        assert!(AmbientPoint::new(bad, Quat::ONE).is_err());
        let nudged = Quat::new(1.0 + 1e-9, 0.0, 0.0, 0.0);
        let renorm = AmbientPoint::new(nudged, Quat::ONE).unwrap();
        assert!((renorm.p.norm() - 1.0).abs() <= 1e-15);
        // Non-tangent vector rejected.
        assert!(AmbientVector::new(pt1, pt1.p, Quat::zero()).is_err());
    }
}
