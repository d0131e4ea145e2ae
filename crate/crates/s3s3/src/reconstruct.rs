//! Rebuilds the two non-totally-geodesic catalog immersions from their
//! structure equations, and aligns sampled immersions modulo the ambient
//! isometry group (p, q) ↦ (a p c⁻¹, b q c⁻¹).
//!
//! The frame system on S³ is linear in the state, so classical RK4 along
//! one-parameter subgroup paths integrates it without stiffness. The
//! torus system factors into harmonic oscillators with constant
//! frequency √3/2 along each coordinate, which are propagated exactly;
//! only the mixed coupling of the transverse partials is stepped
//! numerically (RK4 again, with the oscillator values evaluated exactly
//! at the stage offsets).

use crate::ambient::Isometry;
use crate::error::{GeomError, Result};
use crate::lagrangian::{jacobi_eigen3, matmul3};
use crate::quat::{frame_axis, im_half_commutator, Quat};

const FRAME_NORM_SQ: f64 = 0.75;
const INIT_TOL: f64 = 1e-8;
const ABORT_DRIFT: f64 = 1e-5;
const OSC_FREQ: f64 = 0.866_025_403_784_438_6;

/// Congruence verdict threshold on the aligned pointwise deviation.
pub const CONGRUENCE_LIMIT: f64 = 1e-6;

/// State of the moving frame along a path on S³: position `u`, the three
/// imaginary coefficient quaternions, and the two sphere factors.
///
/// Invariants: `|α₁|² = |β₂|² = |α₃|² = 3/4`, mutual orthogonality,
/// `β₂ × α₁ = (√3/2) α₃`, and `|u| = |p| = |q| = 1`.
#[derive(Clone, Copy, Debug)]
pub struct FrameStateS3 {
    pub u: Quat<f64>,
    pub alpha1: Quat<f64>,
    pub beta2: Quat<f64>,
    pub alpha3: Quat<f64>,
    pub p: Quat<f64>,
    pub q: Quat<f64>,
}

impl FrameStateS3 {
    /// The closed-form state over position `u` with gauge rotation `h`.
    pub fn closed_form(h: &Quat<f64>, u: &Quat<f64>) -> Result<Self> {
        for (name, c) in [("h", h), ("u", u)] {
            if (c.norm() - 1.0).abs() > INIT_TOL {
                return Err(GeomError::InvalidParameter(format!(
                    "{name} must be a unit quaternion"
                )));
            }
        }
        let conj = |v: Quat<f64>| (*h * *u * v * u.inverse() * h.inverse()).scale(1.0);
        let half = 3.0_f64.sqrt() / 2.0;
        Ok(FrameStateS3 {
            u: *u,
            alpha1: conj(Quat::K).scale(-half),
            beta2: conj(Quat::I).scale(half),
            alpha3: conj(Quat::J).scale(half),
            p: conj(Quat::I),
            q: conj(Quat::J),
        })
    }

    /// Default initial state at `u = 1` with trivial gauge.
    pub fn standard() -> Self {
        Self::closed_form(&Quat::ONE, &Quat::ONE).expect("unit constants")
    }

    /// Initial state at `u = 1` rotated by the unit quaternion `h`.
    pub fn rotated(h: &Quat<f64>) -> Result<Self> {
        Self::closed_form(h, &Quat::ONE)
    }

    /// Largest violation among the state invariants.
    pub fn invariant_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for c in [self.u, self.p, self.q] {
            worst = worst.max((c.norm() - 1.0).abs());
        }
        let frame = [self.alpha1, self.beta2, self.alpha3];
        for (i, a) in frame.iter().enumerate() {
            worst = worst.max((a.norm_sq() - FRAME_NORM_SQ).abs());
            worst = worst.max(a.w.abs());
            for b in frame.iter().skip(i + 1) {
                worst = worst.max(a.dot(b).abs());
            }
        }
        let half = 3.0_f64.sqrt() / 2.0;
        let cross = im_half_commutator(self.beta2, self.alpha1) - self.alpha3.scale(half);
        worst.max(cross.norm())
    }

    fn check(&self) -> Result<()> {
        let defect = self.invariant_defect();
        if defect > INIT_TOL {
            return Err(GeomError::InvalidParameter(format!(
                "frame state violates its invariants by {defect:.3e}"
            )));
        }
        Ok(())
    }
}

/// One leg of an integration path: flow along the left-invariant field
/// `X_{direction+1}` for (signed) parameter `length`.
#[derive(Clone, Copy, Debug)]
pub struct PathSegment {
    pub direction: usize,
    pub length: f64,
}

type RawState = [Quat<f64>; 6];

fn pack(s: &FrameStateS3) -> RawState {
    [s.u, s.alpha1, s.beta2, s.alpha3, s.p, s.q]
}

fn unpack(v: &RawState) -> FrameStateS3 {
    FrameStateS3 {
        u: v[0],
        alpha1: v[1],
        beta2: v[2],
        alpha3: v[3],
        p: v[4],
        q: v[5],
    }
}

fn axpy(y: &RawState, k: &RawState, s: f64) -> RawState {
    [0, 1, 2, 3, 4, 5].map(|i| y[i] + k[i].scale(s))
}

/// Right-hand side of the frame system along `X_{m+1}`.
fn frame_rhs(v: &RawState, m: usize) -> RawState {
    let [u, a1, b2, a3, p, q] = *v;
    let du = u * frame_axis(m);
    let (da1, db2, da3) = match m {
        0 => (a3.scale(2.0), Quat::zero(), a1.scale(-2.0)),
        1 => (b2.scale(-2.0), a1.scale(2.0), Quat::zero()),
        _ => (Quat::zero(), a3.scale(-2.0), b2.scale(2.0)),
    };
    let r = -4.0 / 3.0_f64.sqrt();
    let (dp, dq) = match m {
        0 => (Quat::zero(), (q * b2).scale(r)),
        1 => ((p * a3).scale(r), Quat::zero()),
        _ => ((p * a1).scale(r), (q * a1).scale(r)),
    };
    [du, da1, db2, da3, dp, dq]
}

fn rk4_step(v: &RawState, m: usize, h: f64) -> RawState {
    let k1 = frame_rhs(v, m);
    let k2 = frame_rhs(&axpy(v, &k1, h / 2.0), m);
    let k3 = frame_rhs(&axpy(v, &k2, h / 2.0), m);
    let k4 = frame_rhs(&axpy(v, &k3, h), m);
    let mut out = *v;
    for i in 0..6 {
        out[i] = out[i]
            + (k1[i] + k2[i].scale(2.0) + k3[i].scale(2.0) + k4[i]).scale(h / 6.0);
    }
    out
}

/// Integrate the frame system along the given path, recording the state
/// after every RK4 step. The trajectory starts with `init`; an empty
/// path returns just that.
pub fn integrate_case1a(
    path: &[PathSegment],
    step: f64,
    init: &FrameStateS3,
) -> Result<Vec<FrameStateS3>> {
    if !(step > 0.0) {
        return Err(GeomError::InvalidParameter(format!(
            "integration step must be positive, got {step}"
        )));
    }
    init.check()?;
    let mut trajectory = vec![*init];
    let mut state = pack(init);
    let mut elapsed = 0.0;
    for seg in path {
        if seg.direction > 2 {
            return Err(GeomError::InvalidParameter(format!(
                "path direction out of range: {}",
                seg.direction
            )));
        }
        let total = seg.length.abs();
        if total == 0.0 {
            continue;
        }
        let h = step.copysign(seg.length);
        let full = (total / step).floor() as usize;
        let tail = total - full as usize as f64 * step;
        for sub in 0..=full {
            let hh = if sub < full {
                h
            } else if tail > 1e-12 {
                tail.copysign(seg.length)
            } else {
                break;
            };
            state = rk4_step(&state, seg.direction, hh);
            elapsed += hh.abs();
            let next = unpack(&state);
            let defect = next.invariant_defect();
            if defect > ABORT_DRIFT {
                return Err(GeomError::IntegrationAborted(format!(
                    "frame invariants drifted to {defect:.3e} after path length {elapsed:.4}"
                )));
            }
            trajectory.push(next);
        }
    }
    Ok(trajectory)
}

/// Sample the reconstructed immersion on a chart grid: node
/// `(t₁, t₂, t₃)` flows from `init` along X₁ by t₁, X₂ by t₂, X₃ by t₃,
/// and records the final `(p, q)`. Records are in row-major order with
/// the last axis fastest, matching the sampled-file layout.
pub fn case1a_chart_records(
    init: &FrameStateS3,
    grid: &crate::grid::GridSpec,
    step: f64,
) -> Result<Vec<(Quat<f64>, Quat<f64>)>> {
    let mut records = Vec::with_capacity(grid.len());
    for i in 0..grid.counts[0] {
        for j in 0..grid.counts[1] {
            for k in 0..grid.counts[2] {
                let t = grid.node_point([i, j, k]);
                let path = [
                    PathSegment { direction: 0, length: t[0] },
                    PathSegment { direction: 1, length: t[1] },
                    PathSegment { direction: 2, length: t[2] },
                ];
                let trajectory = integrate_case1a(&path, step, init)?;
                let last = trajectory.last().expect("trajectory holds the initial state");
                records.push((last.p, last.q));
            }
        }
    }
    Ok(records)
}

/// Origin data for the torus system: the two factors and their first
/// partials at `(u, v, w) = 0`.
#[derive(Clone, Copy, Debug)]
pub struct TorusInit {
    pub p: Quat<f64>,
    pub p_u: Quat<f64>,
    pub p_w: Quat<f64>,
    pub q: Quat<f64>,
    pub q_u: Quat<f64>,
    pub q_v: Quat<f64>,
}

impl Default for TorusInit {
    /// Origin jet of the flat-torus catalog immersion.
    fn default() -> Self {
        let r = 1.0 / 2.0_f64.sqrt();
        TorusInit {
            p: Quat::ONE,
            p_u: Quat::J.scale(OSC_FREQ),
            p_w: Quat::I.scale(OSC_FREQ),
            q: Quat::new(r, 0.0, -r, 0.0),
            q_u: Quat::new(r, 0.0, r, 0.0).scale(OSC_FREQ),
            q_v: Quat::new(0.0, r, 0.0, -r).scale(OSC_FREQ),
        }
    }
}

impl TorusInit {
    fn check(&self) -> Result<()> {
        let mut worst: f64 = 0.0;
        for c in [self.p, self.q] {
            worst = worst.max((c.norm() - 1.0).abs());
        }
        for d in [self.p_u, self.p_w, self.q_u, self.q_v] {
            worst = worst.max((d.norm_sq() - FRAME_NORM_SQ).abs());
        }
        for (base, d) in [
            (self.p, self.p_u),
            (self.p, self.p_w),
            (self.q, self.q_u),
            (self.q, self.q_v),
        ] {
            worst = worst.max(base.dot(&d).abs());
        }
        let shared = self.p.inverse() * self.p_u - self.q.inverse() * self.q_u;
        worst = worst.max(shared.norm());
        if worst > INIT_TOL {
            return Err(GeomError::InvalidParameter(format!(
                "torus origin data violates its invariants by {worst:.3e}"
            )));
        }
        Ok(())
    }
}

/// Marching grid for the torus system: a cube `[0, extent]³` marched at
/// `step` along u, keeping every `keep_every`-th node on all axes.
#[derive(Clone, Copy, Debug)]
pub struct TorusGrid {
    pub extent: f64,
    pub step: f64,
    pub keep_every: usize,
}

impl TorusGrid {
    pub fn cube(extent: f64, step: f64, keep_every: usize) -> Result<Self> {
        if !(extent >= 0.0) || !(step > 0.0) || keep_every == 0 {
            return Err(GeomError::InvalidParameter(
                "torus grid needs extent ≥ 0, step > 0, keep_every ≥ 1".into(),
            ));
        }
        Ok(TorusGrid { extent, step, keep_every })
    }
}

/// The reconstructed torus solution. `p` depends only on `(u, w)` and
/// `q` only on `(u, v)`, so both factors are stored on their own plane;
/// the product over the full `(u, v, w)` grid is assembled on demand.
#[derive(Clone, Debug)]
pub struct TorusState {
    pub us: Vec<f64>,
    pub vs: Vec<f64>,
    pub ws: Vec<f64>,
    /// Indexed `[iu][iw]`.
    pub p: Vec<Vec<Quat<f64>>>,
    pub p_u: Vec<Vec<Quat<f64>>>,
    pub p_w: Vec<Vec<Quat<f64>>>,
    /// Indexed `[iu][iv]`.
    pub q: Vec<Vec<Quat<f64>>>,
    pub q_u: Vec<Vec<Quat<f64>>>,
    pub q_v: Vec<Vec<Quat<f64>>>,
}

impl TorusState {
    /// Immersion value at grid node `(iu, iv, iw)`.
    pub fn factor_point(&self, iu: usize, iv: usize, iw: usize) -> (Quat<f64>, Quat<f64>) {
        (self.p[iu][iw], self.q[iu][iv])
    }
}

/// Exact half-period rotation of an oscillator pair `(y, y')` with
/// `y'' = -ω² y`, advanced by `t`.
fn oscillate(y: Quat<f64>, dy: Quat<f64>, t: f64) -> (Quat<f64>, Quat<f64>) {
    let (s, c) = (OSC_FREQ * t).sin_cos();
    (
        y.scale(c) + dy.scale(s / OSC_FREQ),
        y.scale(-OSC_FREQ * s) + dy.scale(c),
    )
}

#[derive(Clone, Copy)]
struct MarchNode {
    p: Quat<f64>,
    p_u: Quat<f64>,
    p_w: Quat<f64>,
    q: Quat<f64>,
    q_u: Quat<f64>,
    q_v: Quat<f64>,
}

fn coupling_rhs(
    p: Quat<f64>,
    q: Quat<f64>,
    p_w: Quat<f64>,
    q_v: Quat<f64>,
) -> (Quat<f64>, Quat<f64>) {
    (
        (p * q.inverse() * q_v).scale(-OSC_FREQ),
        (q * p.inverse() * p_w).scale(OSC_FREQ),
    )
}

/// March the torus system along the u-line at `v = w = 0`, then extend
/// transversely with exact oscillator propagation. Aborts when the
/// conserved coupling energy `|p_w|² + |q_v|²` drifts.
pub fn integrate_case1b(grid: &TorusGrid, init: &TorusInit) -> Result<TorusState> {
    init.check()?;
    let single_point = |n: &TorusInit| TorusState {
        us: vec![0.0],
        vs: vec![0.0],
        ws: vec![0.0],
        p: vec![vec![n.p]],
        p_u: vec![vec![n.p_u]],
        p_w: vec![vec![n.p_w]],
        q: vec![vec![n.q]],
        q_u: vec![vec![n.q_u]],
        q_v: vec![vec![n.q_v]],
    };
    let n_march = (grid.extent / grid.step).round() as usize;
    if n_march == 0 {
        return Ok(single_point(init));
    }
    let delta = grid.extent / n_march as f64;

    let mut node = MarchNode {
        p: init.p,
        p_u: init.p_u,
        p_w: init.p_w,
        q: init.q,
        q_u: init.q_u,
        q_v: init.q_v,
    };
    let energy0 = node.p_w.norm_sq() + node.q_v.norm_sq();
    let mut march = Vec::with_capacity(n_march + 1);
    march.push(node);
    for step_index in 0..n_march {
        // Oscillator values at the RK4 stage offsets are exact.
        let (p_half, _) = oscillate(node.p, node.p_u, delta / 2.0);
        let (q_half, _) = oscillate(node.q, node.q_u, delta / 2.0);
        let (p_full, p_u_full) = oscillate(node.p, node.p_u, delta);
        let (q_full, q_u_full) = oscillate(node.q, node.q_u, delta);

        let (k1p, k1q) = coupling_rhs(node.p, node.q, node.p_w, node.q_v);
        let (k2p, k2q) = coupling_rhs(
            p_half,
            q_half,
            node.p_w + k1p.scale(delta / 2.0),
            node.q_v + k1q.scale(delta / 2.0),
        );
        let (k3p, k3q) = coupling_rhs(
            p_half,
            q_half,
            node.p_w + k2p.scale(delta / 2.0),
            node.q_v + k2q.scale(delta / 2.0),
        );
        let (k4p, k4q) = coupling_rhs(
            p_full,
            q_full,
            node.p_w + k3p.scale(delta),
            node.q_v + k3q.scale(delta),
        );
        node = MarchNode {
            p: p_full,
            p_u: p_u_full,
            q: q_full,
            q_u: q_u_full,
            p_w: node.p_w
                + (k1p + k2p.scale(2.0) + k3p.scale(2.0) + k4p).scale(delta / 6.0),
            q_v: node.q_v
                + (k1q + k2q.scale(2.0) + k3q.scale(2.0) + k4q).scale(delta / 6.0),
        };
        let energy = node.p_w.norm_sq() + node.q_v.norm_sq();
        if (energy - energy0).abs() > ABORT_DRIFT {
            return Err(GeomError::IntegrationAborted(format!(
                "coupling energy drifted by {:.3e} at u = {:.4}",
                (energy - energy0).abs(),
                (step_index + 1) as f64 * delta
            )));
        }
        march.push(node);
    }

    let kept: Vec<usize> = (0..=n_march).step_by(grid.keep_every).collect();
    let coords: Vec<f64> = kept.iter().map(|&i| i as f64 * delta).collect();
    let n_out = kept.len();
    let mut state = TorusState {
        us: coords.clone(),
        vs: coords.clone(),
        ws: coords,
        p: Vec::with_capacity(n_out),
        p_u: Vec::with_capacity(n_out),
        p_w: Vec::with_capacity(n_out),
        q: Vec::with_capacity(n_out),
        q_u: Vec::with_capacity(n_out),
        q_v: Vec::with_capacity(n_out),
    };
    for &iu in &kept {
        let n = march[iu];
        let (p_uw, q_uv) = coupling_rhs(n.p, n.q, n.p_w, n.q_v);
        let mut rp = Vec::with_capacity(n_out);
        let mut rpu = Vec::with_capacity(n_out);
        let mut rpw = Vec::with_capacity(n_out);
        let mut rq = Vec::with_capacity(n_out);
        let mut rqu = Vec::with_capacity(n_out);
        let mut rqv = Vec::with_capacity(n_out);
        for &t in &state.ws {
            let (p, p_w) = oscillate(n.p, n.p_w, t);
            let (p_u, _) = oscillate(n.p_u, p_uw, t);
            rp.push(p);
            rpw.push(p_w);
            rpu.push(p_u);
        }
        for &t in &state.vs {
            let (q, q_v) = oscillate(n.q, n.q_v, t);
            let (q_u, _) = oscillate(n.q_u, q_uv, t);
            rq.push(q);
            rqv.push(q_v);
            rqu.push(q_u);
        }
        state.p.push(rp);
        state.p_u.push(rpu);
        state.p_w.push(rpw);
        state.q.push(rq);
        state.q_u.push(rqu);
        state.q_v.push(rqv);
    }
    Ok(state)
}

/// Outcome of aligning two sampled immersions.
#[derive(Clone, Copy, Debug)]
pub struct AlignResult {
    pub isometry: Isometry,
    /// Largest pointwise euclidean deviation after applying the isometry.
    pub deviation: f64,
    /// Whether the deviation stays under [`CONGRUENCE_LIMIT`].
    pub congruent: bool,
}

fn imaginary_increments(samples: &[(Quat<f64>, Quat<f64>)]) -> Vec<[[f64; 3]; 2]> {
    let (p0, q0) = samples[0];
    let mut out = Vec::with_capacity(2 * (samples.len() - 1));
    for &(p, q) in &samples[1..] {
        for (base, cur) in [(p0, p), (q0, q)] {
            let g = base.inverse() * cur;
            out.push([[g.x, g.y, g.z], [0.0; 3]]);
        }
    }
    out
}

fn rotation_to_quat(r: &[[f64; 3]; 3]) -> Quat<f64> {
    let tr = r[0][0] + r[1][1] + r[2][2];
    let q = if tr > 0.0 {
        let s = (tr + 1.0).sqrt() * 2.0;
        Quat::new(
            0.25 * s,
            (r[2][1] - r[1][2]) / s,
            (r[0][2] - r[2][0]) / s,
            (r[1][0] - r[0][1]) / s,
        )
    } else if r[0][0] >= r[1][1] && r[0][0] >= r[2][2] {
        let s = (1.0 + r[0][0] - r[1][1] - r[2][2]).sqrt() * 2.0;
        Quat::new(
            (r[2][1] - r[1][2]) / s,
            0.25 * s,
            (r[0][1] + r[1][0]) / s,
            (r[0][2] + r[2][0]) / s,
        )
    } else if r[1][1] >= r[2][2] {
        let s = (1.0 + r[1][1] - r[0][0] - r[2][2]).sqrt() * 2.0;
        Quat::new(
            (r[0][2] - r[2][0]) / s,
            (r[0][1] + r[1][0]) / s,
            0.25 * s,
            (r[1][2] + r[2][1]) / s,
        )
    } else {
        let s = (1.0 + r[2][2] - r[0][0] - r[1][1]).sqrt() * 2.0;
        Quat::new(
            (r[1][0] - r[0][1]) / s,
            (r[0][2] + r[2][0]) / s,
            (r[1][2] + r[2][1]) / s,
            0.25 * s,
        )
    };
    q.normalized()
}

/// Seed for `c`: body-frame increments of both factors transform by
/// conjugation with `c`, so the best-fit rotation between the two
/// increment clouds (polar decomposition of the correlation) gives it.
fn seed_c(
    samples_a: &[(Quat<f64>, Quat<f64>)],
    samples_b: &[(Quat<f64>, Quat<f64>)],
) -> Quat<f64> {
    let mut va = imaginary_increments(samples_a);
    let vb = imaginary_increments(samples_b);
    for (slot, b) in va.iter_mut().zip(vb.iter()) {
        slot[1] = b[0];
    }
    let mut corr = [[0.0; 3]; 3];
    for pair in &va {
        for r in 0..3 {
            for c in 0..3 {
                corr[r][c] += pair[1][r] * pair[0][c];
            }
        }
    }
    let mut gram = [[0.0; 3]; 3];
    for r in 0..3 {
        for c in 0..3 {
            for k in 0..3 {
                gram[r][c] += corr[k][r] * corr[k][c];
            }
        }
    }
    let (vals, rows) = jacobi_eigen3(&gram);
    // gram^(-1/2) from eigenvector rows; tiny modes are dropped, which
    // leaves the seed a projection that the ALS refinement completes.
    let mut inv_sqrt = [[0.0; 3]; 3];
    for (i, &lam) in vals.iter().enumerate() {
        if lam < 1e-12 {
            continue;
        }
        let w = 1.0 / lam.sqrt();
        for r in 0..3 {
            for c in 0..3 {
                inv_sqrt[r][c] += w * rows[i][r] * rows[i][c];
            }
        }
    }
    let rot = matmul3(&corr, &inv_sqrt);
    rotation_to_quat(&rot)
}

/// Best isometry `(a, b, c)` carrying `samples_a` onto `samples_b` at
/// matched chart points, with the largest residual deviation.
pub fn isometry_align(
    samples_a: &[(Quat<f64>, Quat<f64>)],
    samples_b: &[(Quat<f64>, Quat<f64>)],
) -> Result<AlignResult> {
    if samples_a.len() != samples_b.len() {
        return Err(GeomError::InvalidParameter(format!(
            "sample sets differ in length: {} vs {}",
            samples_a.len(),
            samples_b.len()
        )));
    }
    if samples_a.len() < 4 {
        return Err(GeomError::InvalidParameter(
            "alignment needs at least 4 matched samples".into(),
        ));
    }

    let mut c = seed_c(samples_a, samples_b);
    let mut a = Quat::ONE;
    let mut b = Quat::ONE;
    for _ in 0..80 {
        let mut acc_a = Quat::zero();
        let mut acc_b = Quat::zero();
        for (&(pa, qa), &(pb, qb)) in samples_a.iter().zip(samples_b) {
            acc_a = acc_a + pb * c * pa.conj();
            acc_b = acc_b + qb * c * qa.conj();
        }
        let next_a = acc_a.normalized();
        let next_b = acc_b.normalized();
        let mut acc_c = Quat::zero();
        for (&(pa, qa), &(pb, qb)) in samples_a.iter().zip(samples_b) {
            acc_c = acc_c + pb.conj() * next_a * pa + qb.conj() * next_b * qa;
        }
        let next_c = acc_c.normalized();
        let moved = (next_a - a).norm() + (next_b - b).norm() + (next_c - c).norm();
        a = next_a;
        b = next_b;
        c = next_c;
        if moved < 1e-15 {
            break;
        }
    }

    // Canonical sign: the triple and its negation are the same isometry.
    let comps = a.as_array();
    let lead = (0..4).max_by(|&i, &j| comps[i].abs().total_cmp(&comps[j].abs())).unwrap();
    if comps[lead] < 0.0 {
        a = a.scale(-1.0);
        b = b.scale(-1.0);
        c = c.scale(-1.0);
    }

    let cinv = c.inverse();
    let mut deviation: f64 = 0.0;
    for (&(pa, qa), &(pb, qb)) in samples_a.iter().zip(samples_b) {
        deviation = deviation.max((a * pa * cinv - pb).norm());
        deviation = deviation.max((b * qa * cinv - qb).norm());
    }
    Ok(AlignResult {
        isometry: Isometry { a, b, c },
        deviation,
        congruent: deviation <= CONGRUENCE_LIMIT,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{construct_example, ExampleParams};
    use crate::lagrangian::Immersion;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const MIXED_PATH: [PathSegment; 4] = [
        PathSegment { direction: 0, length: 0.7 },
        PathSegment { direction: 1, length: 0.9 },
        PathSegment { direction: 2, length: 0.5 },
        PathSegment { direction: 0, length: 0.4 },
    ];

    fn deviation_from_closed_form(h: &Quat<f64>, trajectory: &[FrameStateS3]) -> f64 {
        let mut worst: f64 = 0.0;
        for s in trajectory {
            let reference = FrameStateS3::closed_form(h, &s.u.normalized()).unwrap();
            worst = worst.max((s.p - reference.p).norm());
            worst = worst.max((s.q - reference.q).norm());
            worst = worst.max((s.alpha1 - reference.alpha1).norm());
        }
        worst
    }

    #[test]
    fn empty_path_returns_the_initial_state() {
        let init = FrameStateS3::standard();
        let trajectory = integrate_case1a(&[], 1e-3, &init).unwrap();
        assert_eq!(trajectory.len(), 1);
        assert_eq!(trajectory[0].p, init.p);
    }

    #[test]
    fn circle_path_matches_the_conjugation_closed_form() {
        let init = FrameStateS3::standard();
        let path = [PathSegment { direction: 0, length: 2.0 * std::f64::consts::PI }];
        let trajectory = integrate_case1a(&path, 1e-3, &init).unwrap();
        assert!(trajectory.len() > 6000);
        let dev = deviation_from_closed_form(&Quat::ONE, &trajectory);
        assert!(dev <= 1e-6, "deviation {dev:.3e}");
        let last = trajectory.last().unwrap();
        assert!((last.p - Quat::I).norm() <= 1e-9, "p is constant along X1");
    }

    #[test]
    fn alpha1_is_conserved_along_the_third_direction() {
        let init = FrameStateS3::standard();
        let path = [PathSegment { direction: 2, length: 1.3 }];
        let trajectory = integrate_case1a(&path, 1e-3, &init).unwrap();
        for s in &trajectory {
            assert!((s.alpha1 - init.alpha1).norm() <= 1e-8);
        }
    }

    #[test]
    fn frame_invariants_survive_ten_thousand_steps() {
        let init = FrameStateS3::standard();
        let path = [
            PathSegment { direction: 0, length: 4.0 },
            PathSegment { direction: 1, length: 3.0 },
            PathSegment { direction: 2, length: 3.0 },
        ];
        let trajectory = integrate_case1a(&path, 1e-3, &init).unwrap();
        assert!(trajectory.len() > 10_000);
        let mut worst: f64 = 0.0;
        for s in &trajectory {
            worst = worst.max(s.invariant_defect());
            worst = worst.max((s.p.norm() - 1.0).abs());
            worst = worst.max((s.q.norm() - 1.0).abs());
        }
        assert!(worst <= 1e-7, "invariant drift {worst:.3e}");
    }

    #[test]
    fn halving_the_step_cuts_the_error_by_an_order() {
        let init = FrameStateS3::standard();
        let coarse = integrate_case1a(&MIXED_PATH, 2e-3, &init).unwrap();
        let fine = integrate_case1a(&MIXED_PATH, 1e-3, &init).unwrap();
        let dev_coarse = deviation_from_closed_form(&Quat::ONE, &coarse);
        let dev_fine = deviation_from_closed_form(&Quat::ONE, &fine);
        assert!(
            dev_coarse >= 8.0 * dev_fine,
            "coarse {dev_coarse:.3e} vs fine {dev_fine:.3e}"
        );
    }

    #[test]
    fn rotated_initial_data_flows_to_the_rotated_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        let h = Quat::random_unit(&mut rng);
        let init = FrameStateS3::rotated(&h).unwrap();
        let trajectory = integrate_case1a(&MIXED_PATH, 1e-3, &init).unwrap();
        let dev = deviation_from_closed_form(&h, &trajectory);
        assert!(dev <= 1e-6, "deviation {dev:.3e}");
    }

    #[test]
    fn invalid_initial_data_is_rejected() {
        let mut bad = FrameStateS3::standard();
        bad.alpha1 = bad.alpha1.scale(1.1);
        assert!(matches!(
            integrate_case1a(&[], 1e-3, &bad),
            Err(GeomError::InvalidParameter(_))
        ));
        let init = FrameStateS3::standard();
        assert!(matches!(
            integrate_case1a(&MIXED_PATH, 0.0, &init),
            Err(GeomError::InvalidParameter(_))
        ));
    }

    #[test]
    fn torus_march_matches_the_flat_torus_closed_form() {
        let extent = 4.0 * std::f64::consts::PI / 3.0_f64.sqrt();
        let grid = TorusGrid::cube(extent, 1e-2, 2).unwrap();
        let state = integrate_case1b(&grid, &TorusInit::default()).unwrap();
        let torus = construct_example("4.8", &ExampleParams::default()).unwrap();
        let mut dev: f64 = 0.0;
        for (iu, &u) in state.us.iter().enumerate() {
            for (iz, (&v, &w)) in state.vs.iter().zip(state.ws.iter()).enumerate() {
                let jet = torus.jet([u, v, w]);
                dev = dev.max((state.p[iu][iz] - jet.p.value()).norm());
                dev = dev.max((state.q[iu][iz] - jet.q.value()).norm());
            }
        }
        assert!(dev <= 1e-6, "deviation {dev:.3e}");
    }

    #[test]
    fn torus_march_satisfies_the_factor_equations() {
        let grid = TorusGrid::cube(2.0, 1e-2, 2).unwrap();
        let state = integrate_case1b(&grid, &TorusInit::default()).unwrap();
        let s = state.us[1] - state.us[0];
        let n = state.us.len();
        let mut worst: f64 = 0.0;
        // Interior fourth-order stencils over the stored values and first
        // partials; all six equations close on the grid.
        for iu in 2..n - 2 {
            for jz in 2..n - 2 {
                let d2 = |f: &Vec<Vec<Quat<f64>>>, along_u: bool| {
                    let pick = |o: isize| {
                        let (r, c) = if along_u {
                            ((iu as isize + o) as usize, jz)
                        } else {
                            (iu, (jz as isize + o) as usize)
                        };
                        f[r][c]
                    };
                    (pick(-2).scale(-1.0) + pick(-1).scale(16.0) + pick(0).scale(-30.0)
                        + pick(1).scale(16.0)
                        + pick(2).scale(-1.0))
                    .scale(1.0 / (12.0 * s * s))
                };
                let d1u = |f: &Vec<Vec<Quat<f64>>>| {
                    (f[iu - 2][jz] - f[iu - 1][jz].scale(8.0) + f[iu + 1][jz].scale(8.0)
                        - f[iu + 2][jz])
                    .scale(1.0 / (12.0 * s))
                };
                let resid = |x: Quat<f64>| x.norm();
                worst = worst.max(resid(d2(&state.p, true) + state.p[iu][jz].scale(0.75)));
                worst = worst.max(resid(d2(&state.p, false) + state.p[iu][jz].scale(0.75)));
                worst = worst.max(resid(d2(&state.q, true) + state.q[iu][jz].scale(0.75)));
                worst = worst.max(resid(d2(&state.q, false) + state.q[iu][jz].scale(0.75)));
                let p_uw = d1u(&state.p_w);
                let q_uv = d1u(&state.q_v);
                let (rhs_p, rhs_q) = coupling_rhs(
                    state.p[iu][jz],
                    state.q[iu][jz],
                    state.p_w[iu][jz],
                    state.q_v[iu][jz],
                );
                worst = worst.max(resid(p_uw - rhs_p));
                worst = worst.max(resid(q_uv - rhs_q));
            }
        }
        assert!(worst <= 1e-6, "PDE residual {worst:.3e}");
    }

    #[test]
    fn torus_halving_improves_fourth_order() {
        let torus = construct_example("4.8", &ExampleParams::default()).unwrap();
        let dev = |step: f64| {
            let grid = TorusGrid::cube(4.0, step, 4).unwrap();
            let state = integrate_case1b(&grid, &TorusInit::default()).unwrap();
            let mut worst: f64 = 0.0;
            for (iu, &u) in state.us.iter().enumerate() {
                for (iz, (&v, &w)) in state.vs.iter().zip(state.ws.iter()).enumerate() {
                    let jet = torus.jet([u, v, w]);
                    worst = worst.max((state.p[iu][iz] - jet.p.value()).norm());
                    worst = worst.max((state.q[iu][iz] - jet.q.value()).norm());
                }
            }
            worst
        };
        let coarse = dev(2e-2);
        let fine = dev(1e-2);
        assert!(coarse >= 4.0 * fine, "coarse {coarse:.3e} vs fine {fine:.3e}");
    }

    #[test]
    fn degenerate_torus_grid_returns_the_origin_state() {
        let grid = TorusGrid::cube(0.0, 1e-2, 1).unwrap();
        let init = TorusInit::default();
        let state = integrate_case1b(&grid, &init).unwrap();
        assert_eq!(state.us.len(), 1);
        assert_eq!(state.factor_point(0, 0, 0).0, init.p);
        assert_eq!(state.factor_point(0, 0, 0).1, init.q);
    }

    #[test]
    fn inconsistent_torus_origin_is_rejected() {
        let mut bad = TorusInit::default();
        bad.q_u = bad.q_u.scale(1.01);
        assert!(matches!(
            integrate_case1b(&TorusGrid::cube(1.0, 1e-2, 1).unwrap(), &bad),
            Err(GeomError::InvalidParameter(_))
        ));
    }

    fn scatter_samples(name: &str, rng: &mut ChaCha8Rng, n: usize) -> Vec<(Quat<f64>, Quat<f64>)> {
        let ex = construct_example(name, &ExampleParams::default()).unwrap();
        (0..n)
            .map(|_| {
                let x = [
                    rng.random_range(-0.5..0.5),
                    rng.random_range(-0.5..0.5),
                    rng.random_range(-0.5..0.5),
                ];
                let jet = ex.jet(x);
                (jet.p.value(), jet.q.value())
            })
            .collect()
    }

    #[test]
    fn identical_samples_align_with_the_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(62);
        let samples = scatter_samples("4.6", &mut rng, 12);
        let result = isometry_align(&samples, &samples).unwrap();
        assert!(result.congruent);
        assert!(result.deviation <= 1e-14);
        assert!((result.isometry.a - Quat::ONE).norm() <= 1e-9);
        assert!((result.isometry.b - Quat::ONE).norm() <= 1e-9);
        assert!((result.isometry.c - Quat::ONE).norm() <= 1e-9);
    }

    #[test]
    fn known_isometry_is_recovered_up_to_sign() {
        let mut rng = ChaCha8Rng::seed_from_u64(63);
        let samples = scatter_samples("4.6", &mut rng, 15);
        let (a0, b0, c0) = (
            Quat::random_unit(&mut rng),
            Quat::random_unit(&mut rng),
            Quat::random_unit(&mut rng),
        );
        let moved: Vec<_> = samples
            .iter()
            .map(|&(p, q)| (a0 * p * c0.inverse(), b0 * q * c0.inverse()))
            .collect();
        let result = isometry_align(&samples, &moved).unwrap();
        assert!(result.deviation <= 1e-9, "deviation {:.3e}", result.deviation);
        let close = |x: Quat<f64>, y: Quat<f64>| ((x - y).norm()).min((x + y).norm()) <= 1e-9;
        assert!(close(result.isometry.a, a0));
        assert!(close(result.isometry.b, b0));
        assert!(close(result.isometry.c, c0));
    }

    #[test]
    fn distinct_examples_are_reported_non_congruent() {
        let mut rng_a = ChaCha8Rng::seed_from_u64(64);
        let mut rng_b = ChaCha8Rng::seed_from_u64(64);
        let samples_a = scatter_samples("4.1", &mut rng_a, 15);
        let samples_b = scatter_samples("4.6", &mut rng_b, 15);
        let result = isometry_align(&samples_a, &samples_b).unwrap();
        assert!(!result.congruent);
        assert!(result.deviation > 0.1, "deviation {:.3e}", result.deviation);
    }

    #[test]
    fn gauge_rotation_between_trajectories_is_recovered() {
        let mut rng = ChaCha8Rng::seed_from_u64(65);
        let h = Quat::random_unit(&mut rng);
        let plain = integrate_case1a(&MIXED_PATH, 1e-3, &FrameStateS3::standard()).unwrap();
        let rotated =
            integrate_case1a(&MIXED_PATH, 1e-3, &FrameStateS3::rotated(&h).unwrap()).unwrap();
        let pick = |t: &[FrameStateS3]| -> Vec<_> {
            t.iter().step_by(97).map(|s| (s.p, s.q)).collect()
        };
        let result = isometry_align(&pick(&plain), &pick(&rotated)).unwrap();
        assert!(result.deviation <= 1e-6, "deviation {:.3e}", result.deviation);
        let close = |x: Quat<f64>, y: Quat<f64>| ((x - y).norm()).min((x + y).norm()) <= 1e-6;
        assert!(close(result.isometry.a, h));
        assert!(close(result.isometry.b, h));
        assert!(close(result.isometry.c, h));
    }

    #[test]
    fn short_sample_sets_are_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(66);
        let samples = scatter_samples("4.1", &mut rng, 3);
        assert!(matches!(
            isometry_align(&samples, &samples),
            Err(GeomError::InvalidParameter(_))
        ));
    }

    #[test]
    fn reconstructed_conjugation_orbit_feeds_back_through_the_analyzer() {
        use crate::grid::{FileImmersion, GridSpec, SampledImmersionFile};
        use crate::lagrangian::{AnalysisConfig, PointAnalysis};

        let center = [0.2, 0.3, 0.15];
        let grid = GridSpec::centered(center, 5e-3, 5);
        let records = case1a_chart_records(&FrameStateS3::standard(), &grid, 1e-3).unwrap();
        let file = SampledImmersionFile::from_records(&grid, &records).unwrap();
        let imm = FileImmersion::new(file).unwrap();
        let cfg = AnalysisConfig::file_tier();
        let an = PointAnalysis::at(&imm, center, &cfg).unwrap();

        let expected = [0.0, 2.0 * std::f64::consts::PI / 3.0, 4.0 * std::f64::consts::PI / 3.0];
        for i in 0..3 {
            assert_abs_diff_eq!(an.frame.angles2[i], expected[i], epsilon = 1e-5);
        }
        assert_abs_diff_eq!(an.frame.h[0][1][2].abs(), 0.25, epsilon = 1e-5);
        let k = crate::lagrangian::sectional_from_analysis(&an, (0, 1));
        assert_abs_diff_eq!(k, 3.0 / 16.0, epsilon = 1e-5);

        let label = crate::lagrangian::classify::classify(&imm, &[center], &cfg).unwrap().label;
        assert_eq!(label, crate::lagrangian::classify::ClassificationLabel::ConjugationOrbitSphere);
    }

    #[test]
    fn reconstructed_torus_feeds_back_through_the_analyzer() {
        use crate::grid::{FileImmersion, GridSpec, SampledImmersionFile};
        use crate::lagrangian::{AnalysisConfig, PointAnalysis};

        let grid = TorusGrid::cube(0.3, 5e-3, 1).unwrap();
        let state = integrate_case1b(&grid, &TorusInit::default()).unwrap();
        let center = [0.25, 0.1, 0.2];
        let window = GridSpec::centered(center, 5e-3, 5);
        let offset = |axis: usize, idx: usize| -> usize {
            ((window.origin[axis] / 5e-3).round() as usize) + idx
        };
        let mut records = Vec::with_capacity(window.len());
        for i in 0..5 {
            for j in 0..5 {
                for k in 0..5 {
                    records.push(state.factor_point(offset(0, i), offset(1, j), offset(2, k)));
                }
            }
        }
        let file = SampledImmersionFile::from_records(&window, &records).unwrap();
        let imm = FileImmersion::new(file).unwrap();
        let cfg = AnalysisConfig::file_tier();
        let an = PointAnalysis::at(&imm, center, &cfg).unwrap();

        assert_abs_diff_eq!(an.frame.h[0][1][2].abs(), 0.5, epsilon = 1e-5);
        let k = crate::lagrangian::sectional_from_analysis(&an, (0, 1));
        assert_abs_diff_eq!(k, 0.0, epsilon = 1e-5);
        let label = crate::lagrangian::classify::classify(&imm, &[center], &cfg).unwrap().label;
        assert_eq!(label, crate::lagrangian::classify::ClassificationLabel::FlatTorus);
    }
}
