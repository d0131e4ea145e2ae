//! Angle-frame analysis of Lagrangian immersions.
//!
//! An immersion hands us second-order jets of `(p, q)` over a
//! three-dimensional chart. From those this module builds, per point:
//!
//! * the pushforward and an orthonormal (Gram-Schmidt) tangent frame,
//! * the operators `A_ij = g(P e_i, e_j)` and `B_ij = g(P e_i, J e_j)`,
//! * the simultaneous eigenframe with its angle functions `2θ_i`,
//! * the second fundamental form `h` and connection coefficients `ω`
//!   in that eigenframe.
//!
//! The eigenframe is gauged canonically: angles sorted ascending in
//! `[0, 2π)` and the first leg flipped so that `J G(E_1, E_2)` points
//! along `+E_3`. Everything downstream (residual identities, the
//! classifier) consumes `PointAnalysis` values produced here.

mod frame;
pub mod residuals;

pub mod classify;

use crate::ambient::{
    curvature_r, nk_connection_from_raw, tensor_g, AmbientDeriv, AmbientPoint, AmbientVector,
};
use crate::error::{GeomError, Result};
use crate::jet::{Jet1, Jet2, Real};
use crate::quat::Quat;
use std::f64::consts::{PI, TAU};

pub(crate) use frame::{inv3, jacobi_eigen3, mat_vec3, matmul3, solve3};

/// Rank-3 tensor of frame components, indexed `t[i][j][k]`.
pub type Tensor3 = [[[f64; 3]; 3]; 3];

/// Second-order chart jet of an immersion into S³ × S³.
#[derive(Clone, Copy, Debug)]
pub struct ImmersionJet {
    pub p: Quat<Jet2>,
    pub q: Quat<Jet2>,
}

/// A map from a three-dimensional chart into S³ × S³, presented through
/// its second-order jets. Implementations must return jets whose value
/// part lies on the product of unit spheres.
pub trait Immersion {
    fn jet(&self, x: [f64; 3]) -> ImmersionJet;
}

impl<T: Immersion + ?Sized> Immersion for &T {
    fn jet(&self, x: [f64; 3]) -> ImmersionJet {
        (**self).jet(x)
    }
}

impl<T: Immersion + ?Sized> Immersion for Box<T> {
    fn jet(&self, x: [f64; 3]) -> ImmersionJet {
        (**self).jet(x)
    }
}

fn quat_map<S: Real>(c: &Quat<Jet2>, f: impl Fn(&Jet2) -> S) -> Quat<S> {
    Quat::new(f(&c.w), f(&c.x), f(&c.y), f(&c.z))
}

impl ImmersionJet {
    /// Base point, validated against sphere drift.
    pub fn base(&self) -> Result<AmbientPoint<f64>> {
        AmbientPoint::new(self.p.value(), self.q.value())
    }

    fn base_jet1(&self) -> AmbientPoint<Jet1> {
        AmbientPoint::new_unchecked(quat_map(&self.p, Jet2::jet1), quat_map(&self.q, Jet2::jet1))
    }

    /// Pushforward of the chart direction `∂_m`, as a plain vector.
    pub fn push_axis(&self, base: &AmbientPoint<f64>, m: usize) -> AmbientVector<f64> {
        AmbientVector::new_unchecked(
            *base,
            quat_map(&self.p, |c| c.g[m]),
            quat_map(&self.q, |c| c.g[m]),
        )
    }

    fn push_axis_jet1(&self, base: &AmbientPoint<Jet1>, m: usize) -> AmbientVector<Jet1> {
        AmbientVector::new_unchecked(
            *base,
            quat_map(&self.p, |c| c.derivative_jet(m)),
            quat_map(&self.q, |c| c.derivative_jet(m)),
        )
    }

    fn second_raw(&self, l: usize, m: usize) -> AmbientDeriv<f64> {
        AmbientDeriv {
            du: quat_map(&self.p, |c| c.h[l][m]),
            dv: quat_map(&self.q, |c| c.h[l][m]),
        }
    }
}

/// Tolerances steering the per-point analysis.
#[derive(Clone, Copy, Debug)]
pub struct AnalysisConfig {
    /// Gate on `max |g(J df e_i, df e_j)|` before angle extraction.
    pub lagrangian_tol: f64,
    /// Lower bound on Gram-Schmidt pivot norms (rank proxy).
    pub rank_tol: f64,
    /// Gate on `‖[A,B]‖` and `‖A² + B² − Id‖`.
    pub ab_tol: f64,
    /// Eigenvalue gaps below this count as degenerate.
    pub gap_tol: f64,
    /// Gate on the `J G(E_i, E_j) = (1/√3) ε_ijk E_k` pattern.
    pub frame_tol: f64,
    /// Gate on `θ_1 + θ_2 + θ_3 ≡ 0 mod π`.
    pub angle_sum_tol: f64,
    /// Step for finite-difference continuation of frame quantities.
    pub fd_step: f64,
    /// Minimal frame overlap accepted when matching neighbour frames.
    pub frame_overlap_min: f64,
    /// Angle-difference sines below this are skipped in quotient identities.
    pub sin_skip_tol: f64,
    /// Second-fundamental-form norms below this count as totally geodesic.
    pub tg_tol: f64,
    /// Gate when matching measured angle triples against catalog patterns.
    pub angle_match_tol: f64,
    /// Gate when matching measured curvature against catalog constants.
    pub k_match_tol: f64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            lagrangian_tol: 1e-8,
            rank_tol: 1e-8,
            ab_tol: 1e-8,
            gap_tol: 1e-6,
            frame_tol: 1e-10,
            angle_sum_tol: 1e-9,
            fd_step: 1e-4,
            frame_overlap_min: 0.9,
            sin_skip_tol: 1e-3,
            tg_tol: 1e-8,
            angle_match_tol: 1e-6,
            k_match_tol: 1e-6,
        }
    }
}

impl AnalysisConfig {
    /// Loosened gates for immersions reconstructed from sampled files,
    /// where jets carry finite-difference truncation error.
    pub fn file_tier() -> Self {
        AnalysisConfig {
            lagrangian_tol: 1e-4,
            ab_tol: 1e-4,
            frame_tol: 1e-4,
            angle_sum_tol: 1e-4,
            tg_tol: 1e-4,
            angle_match_tol: 1e-3,
            k_match_tol: 1e-3,
            ..AnalysisConfig::default()
        }
    }
}

/// Canonical angle frame at one chart point.
///
/// Invariants on construction: `e` is g-orthonormal and diagonalizes both
/// `A` (eigenvalues `cos 2θ_i`) and `B` (eigenvalues `sin 2θ_i`); angles
/// are ascending in `[0, 2π)`; `J G(E_1, E_2)` points along `+(1/√3) E_3`;
/// the halved angles sum to a multiple of π.
#[derive(Clone, Copy, Debug)]
pub struct LagrangianFrame {
    pub chart: [f64; 3],
    pub e: [AmbientVector<f64>; 3],
    /// Doubled angles `2θ_i`.
    pub angles2: [f64; 3],
    /// Frame components `h_ij^k = g(h(E_i, E_j), J E_k)`.
    pub h: [[[f64; 3]; 3]; 3],
    /// Connection coefficients `ω_ij^k = g(∇_{E_i} E_j, E_k)`.
    pub omega: [[[f64; 3]; 3]; 3],
}

/// Everything the per-point pipeline produces, kept together so residual
/// evaluators can reuse intermediate data instead of recomputing jets.
#[derive(Clone, Copy, Debug)]
pub struct PointAnalysis {
    pub frame: LagrangianFrame,
    pub base: AmbientPoint<f64>,
    pub push: [AmbientVector<f64>; 3],
    /// Induced metric `g(∂_l f, ∂_m f)`.
    pub gram: [[f64; 3]; 3],
    /// `max |g(J df e_i, df e_j)|` over the orthonormal frame.
    pub lagrangian_residual: f64,
    /// Orthonormalized tangent frame before eigen-rotation.
    pub gs: [AmbientVector<f64>; 3],
    /// Eigenvector rows: `E_i = Σ_m v[i][m] gs_m`.
    pub v: [[f64; 3]; 3],
    /// Chart coordinates of the frame: `E_i = Σ_l coords[i][l] ∂_l f`.
    pub coords: [[f64; 3]; 3],
    /// `A`, `B` in the orthonormal frame.
    pub a_gs: [[f64; 3]; 3],
    pub b_gs: [[f64; 3]; 3],
    /// `∇̃_{∂_l} f_* ∂_m`.
    pub nabla_push: [[AmbientVector<f64>; 3]; 3],
    /// `∇̃_{∂_l}` of the canonical frame field `E_j`.
    pub nabla_frame: [[AmbientVector<f64>; 3]; 3],
    pub(crate) push_jet: [AmbientVector<Jet1>; 3],
}

fn gram_schmidt<S: Real>(
    push: &[AmbientVector<S>; 3],
    rank_tol: f64,
    at: [f64; 3],
) -> Result<[AmbientVector<S>; 3]> {
    let mut e = *push;
    for i in 0..3 {
        for j in 0..i {
            let c = e[i].g(&e[j]);
            e[i] = e[i] - e[j].scale(c);
        }
        let n = e[i].g_norm();
        if !(n.value() >= rank_tol) {
            return Err(GeomError::RankDeficient {
                at,
                sigma: n.value(),
            });
        }
        e[i] = e[i].scale(n.recip());
    }
    Ok(e)
}

fn wrap_2pi(a: f64) -> f64 {
    let t = a % TAU;
    let t = if t < 0.0 { t + TAU } else { t };
    // Angles a hair under 2π are roundoff images of 0; snapping them keeps
    // the ascending sort stable for triples containing a zero angle.
    if TAU - t < 1e-9 {
        0.0
    } else {
        t
    }
}

fn max_abs3(m: &[[f64; 3]; 3]) -> f64 {
    let mut acc: f64 = 0.0;
    for row in m {
        for x in row {
            acc = acc.max(x.abs());
        }
    }
    acc
}

impl PointAnalysis {
    pub fn at(imm: &dyn Immersion, x: [f64; 3], cfg: &AnalysisConfig) -> Result<Self> {
        let jet = imm.jet(x);
        let base = jet.base()?;
        let base_jet = jet.base_jet1();

        let push = [0, 1, 2].map(|m| jet.push_axis(&base, m));
        let push_jet = [0, 1, 2].map(|m| jet.push_axis_jet1(&base_jet, m));

        let mut gram = [[0.0; 3]; 3];
        for l in 0..3 {
            for m in 0..3 {
                gram[l][m] = push[l].g(&push[m]);
            }
        }

        let gs_jet = gram_schmidt(&push_jet, cfg.rank_tol, x)?;
        let gs = [0, 1, 2].map(|m| gs_jet[m].value());

        let mut lag = 0.0_f64;
        for i in 0..3 {
            let ji = gs[i].apply_j();
            for j in 0..3 {
                lag = lag.max(ji.g(&gs[j]).abs());
            }
        }
        if lag > cfg.lagrangian_tol {
            return Err(GeomError::NotLagrangian {
                at: x,
                residual: lag,
            });
        }

        // A and B in the orthonormal frame, as jets so their chart
        // derivatives come along for free.
        let mut a_jet = [[Jet1::constant(0.0); 3]; 3];
        let mut b_jet = [[Jet1::constant(0.0); 3]; 3];
        for i in 0..3 {
            let pi = gs_jet[i].apply_p();
            for j in 0..3 {
                a_jet[i][j] = pi.g(&gs_jet[j]);
                b_jet[i][j] = pi.g(&gs_jet[j].apply_j());
            }
        }
        let mut a_gs = [[0.0; 3]; 3];
        let mut b_gs = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                a_gs[i][j] = a_jet[i][j].v;
                b_gs[i][j] = b_jet[i][j].v;
            }
        }

        let comm = {
            let ab = matmul3(&a_gs, &b_gs);
            let ba = matmul3(&b_gs, &a_gs);
            let mut d = [[0.0; 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    d[i][j] = ab[i][j] - ba[i][j];
                }
            }
            max_abs3(&d)
        };
        if comm > cfg.ab_tol {
            return Err(GeomError::AbNotCommuting { residual: comm });
        }
        let unit_defect = {
            let aa = matmul3(&a_gs, &a_gs);
            let bb = matmul3(&b_gs, &b_gs);
            let mut d = [[0.0; 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    d[i][j] = aa[i][j] + bb[i][j] - if i == j { 1.0 } else { 0.0 };
                }
            }
            max_abs3(&d)
        };
        if unit_defect > cfg.ab_tol {
            return Err(GeomError::RouteMismatch {
                what: "square sum of the angle operators",
                difference: unit_defect,
            });
        }

        // Symmetrize before the eigen step; the asymmetry is pure roundoff.
        let mut a_sym = a_gs;
        let mut b_sym = b_gs;
        for i in 0..3 {
            for j in 0..3 {
                a_sym[i][j] = 0.5 * (a_gs[i][j] + a_gs[j][i]);
                b_sym[i][j] = 0.5 * (b_gs[i][j] + b_gs[j][i]);
            }
        }
        let mut v = frame::simultaneous_eigenbasis(&a_sym, &b_sym, cfg.gap_tol);

        let quad = |vec: &[f64; 3], m: &[[f64; 3]; 3]| {
            let mv = mat_vec3(m, vec);
            vec[0] * mv[0] + vec[1] * mv[1] + vec[2] * mv[2]
        };
        let mut entries: Vec<(f64, [f64; 3], f64, f64)> = (0..3)
            .map(|k| {
                let ca = quad(&v[k], &a_sym);
                let sb = quad(&v[k], &b_sym);
                (wrap_2pi(sb.atan2(ca)), v[k], ca, sb)
            })
            .collect();
        entries.sort_by(|p, q| p.0.total_cmp(&q.0));
        let mut angles2 = [0.0; 3];
        let mut diag_a = [0.0; 3];
        let mut diag_b = [0.0; 3];
        for k in 0..3 {
            angles2[k] = entries[k].0;
            v[k] = entries[k].1;
            diag_a[k] = entries[k].2;
            diag_b[k] = entries[k].3;
        }

        let frame_vec = |v: &[[f64; 3]; 3], i: usize| {
            let mut out = gs[0].scale(v[i][0]);
            out = out + gs[1].scale(v[i][1]);
            out + gs[2].scale(v[i][2])
        };
        let mut e = [frame_vec(&v, 0), frame_vec(&v, 1), frame_vec(&v, 2)];
        let tau = tensor_g(&e[0], &e[1]).apply_j().g(&e[2]);
        if tau < 0.0 {
            for c in v[0].iter_mut() {
                *c = -*c;
            }
            e[0] = -e[0];
        }

        let inv_sqrt3 = 3.0_f64.sqrt().recip();
        let mut gauge_defect = 0.0_f64;
        for (i, j, k) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
            let d = tensor_g(&e[i], &e[j]).apply_j() - e[k].scale(inv_sqrt3);
            gauge_defect = gauge_defect.max(d.g_norm());
        }
        if gauge_defect > cfg.frame_tol {
            return Err(GeomError::RouteMismatch {
                what: "frame gauge pattern",
                difference: gauge_defect,
            });
        }

        let theta_sum = 0.5 * (angles2[0] + angles2[1] + angles2[2]);
        let sum_defect = (theta_sum - (theta_sum / PI).round() * PI).abs();
        if sum_defect > cfg.angle_sum_tol {
            return Err(GeomError::RouteMismatch {
                what: "angle sum",
                difference: sum_defect,
            });
        }

        // Chart coordinates of each frame leg: solve the Gram system.
        let mut coords = [[0.0; 3]; 3];
        for i in 0..3 {
            let rhs = [
                e[i].g(&push[0]),
                e[i].g(&push[1]),
                e[i].g(&push[2]),
            ];
            coords[i] = solve3(&gram, &rhs);
        }

        let mut nabla_push = [[AmbientVector::zero_at(base); 3]; 3];
        for l in 0..3 {
            for m in 0..3 {
                nabla_push[l][m] =
                    nk_connection_from_raw(&base, &push[l], &push[m], &jet.second_raw(l, m));
            }
        }

        // Covariant derivative of the orthonormalized legs along each
        // chart direction, read off the Gram-Schmidt jets.
        let mut d_gs = [[AmbientVector::zero_at(base); 3]; 3];
        for l in 0..3 {
            for m in 0..3 {
                let raw = AmbientDeriv {
                    du: Quat::new(
                        gs_jet[m].u.w.g[l],
                        gs_jet[m].u.x.g[l],
                        gs_jet[m].u.y.g[l],
                        gs_jet[m].u.z.g[l],
                    ),
                    dv: Quat::new(
                        gs_jet[m].v.w.g[l],
                        gs_jet[m].v.x.g[l],
                        gs_jet[m].v.y.g[l],
                        gs_jet[m].v.z.g[l],
                    ),
                };
                d_gs[l][m] = nk_connection_from_raw(&base, &push[l], &gs[m], &raw);
            }
        }

        let mut nabla_frame = [[AmbientVector::zero_at(base); 3]; 3];
        for l in 0..3 {
            let mut da = [[0.0; 3]; 3];
            let mut db = [[0.0; 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    da[i][j] = 0.5 * (a_jet[i][j].g[l] + a_jet[j][i].g[l]);
                    db[i][j] = 0.5 * (b_jet[i][j].g[l] + b_jet[j][i].g[l]);
                }
            }
            let c = frame::eigvec_derivative(&v, &diag_a, &diag_b, &da, &db, cfg.gap_tol);
            for j in 0..3 {
                let mut acc = AmbientVector::zero_at(base);
                for i in 0..3 {
                    acc = acc + e[i].scale(c[i][j]);
                }
                for m in 0..3 {
                    acc = acc + d_gs[l][m].scale(v[j][m]);
                }
                nabla_frame[l][j] = acc;
            }
        }

        let mut h = [[[0.0; 3]; 3]; 3];
        let mut omega = [[[0.0; 3]; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let mut cov = AmbientVector::zero_at(base);
                for l in 0..3 {
                    cov = cov + nabla_frame[l][j].scale(coords[i][l]);
                }
                for k in 0..3 {
                    omega[i][j][k] = cov.g(&e[k]);
                    h[i][j][k] = cov.g(&e[k].apply_j());
                }
            }
        }

        let frame = LagrangianFrame {
            chart: x,
            e,
            angles2,
            h,
            omega,
        };
        Ok(PointAnalysis {
            frame,
            base,
            push,
            gram,
            lagrangian_residual: lag,
            gs,
            v,
            coords,
            a_gs,
            b_gs,
            nabla_push,
            nabla_frame,
            push_jet,
        })
    }

    /// Normal components of the second fundamental form against the chart
    /// pushforwards: `g(∇̃_{∂_l} f_* ∂_m, J E_k)`.
    pub fn h_chart(&self) -> [[[f64; 3]; 3]; 3] {
        let mut out = [[[0.0; 3]; 3]; 3];
        for l in 0..3 {
            for m in 0..3 {
                for k in 0..3 {
                    out[l][m][k] = self.nabla_push[l][m].g(&self.frame.e[k].apply_j());
                }
            }
        }
        out
    }
}

/// Pushforward of a chart direction under the immersion differential.
pub fn pushforward(
    imm: &dyn Immersion,
    x: [f64; 3],
    dir: [f64; 3],
) -> Result<AmbientVector<f64>> {
    let jet = imm.jet(x);
    let base = jet.base()?;
    let mut out = AmbientVector::zero_at(base);
    for (m, c) in dir.iter().enumerate() {
        out = out + jet.push_axis(&base, m).scale(*c);
    }
    Ok(out)
}

/// `max |g(J df e_i, df e_j)|` over an orthonormalized tangent frame.
/// Zero exactly when the immersion is Lagrangian at `x`.
pub fn lagrangian_residual(imm: &dyn Immersion, x: [f64; 3]) -> Result<f64> {
    let cfg = AnalysisConfig::default();
    let jet = imm.jet(x);
    let base = jet.base()?;
    let push = [0, 1, 2].map(|m| jet.push_axis(&base, m));
    let gs = gram_schmidt(&push, cfg.rank_tol, x)?;
    let mut lag = 0.0_f64;
    for i in 0..3 {
        let ji = gs[i].apply_j();
        for j in 0..3 {
            lag = lag.max(ji.g(&gs[j]).abs());
        }
    }
    Ok(lag)
}

/// Orthonormal tangent frame from Gram-Schmidt over the chart pushforwards.
pub fn induced_frame(imm: &dyn Immersion, x: [f64; 3]) -> Result<[AmbientVector<f64>; 3]> {
    let cfg = AnalysisConfig::default();
    let jet = imm.jet(x);
    let base = jet.base()?;
    let push = [0, 1, 2].map(|m| jet.push_axis(&base, m));
    gram_schmidt(&push, cfg.rank_tol, x)
}

/// The operators `A_ij = g(P df e_i, df e_j)` and `B_ij = g(P df e_i, J df e_j)`
/// in the induced orthonormal frame. Errors if the point is not Lagrangian
/// or the pair fails to commute.
pub fn ab_operators(
    imm: &dyn Immersion,
    x: [f64; 3],
) -> Result<([[f64; 3]; 3], [[f64; 3]; 3])> {
    let analysis = PointAnalysis::at(imm, x, &AnalysisConfig::default())?;
    Ok((analysis.a_gs, analysis.b_gs))
}

/// Canonical angle frame with `h` and `ω`, under default tolerances.
pub fn angle_extract(imm: &dyn Immersion, x: [f64; 3]) -> Result<LagrangianFrame> {
    Ok(PointAnalysis::at(imm, x, &AnalysisConfig::default())?.frame)
}

/// Second fundamental form and connection coefficients expressed in the
/// caller's frame. The tensors are computed in the canonical frame and
/// rotated onto `frame`, so any orthonormal angle frame at `x` is accepted.
pub fn sff_and_connection(
    imm: &dyn Immersion,
    x: [f64; 3],
    frame: &LagrangianFrame,
) -> Result<(Tensor3, Tensor3)> {
    let analysis = PointAnalysis::at(imm, x, &AnalysisConfig::default())?;
    let mut rot = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            rot[i][j] = frame.e[i].g(&analysis.frame.e[j]);
        }
    }
    let transport = |t: &Tensor3| {
        let mut out = [[[0.0; 3]; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    let mut acc = 0.0;
                    for a in 0..3 {
                        for b in 0..3 {
                            for c in 0..3 {
                                acc += rot[i][a] * rot[j][b] * rot[k][c] * t[a][b][c];
                            }
                        }
                    }
                    out[i][j][k] = acc;
                }
            }
        }
        out
    };
    Ok((transport(&analysis.frame.h), transport(&analysis.frame.omega)))
}

/// Induced metric on the chart at `x`.
pub fn induced_gram(imm: &dyn Immersion, x: [f64; 3]) -> Result<[[f64; 3]; 3]> {
    let jet = imm.jet(x);
    let base = jet.base()?;
    let push = [0, 1, 2].map(|m| jet.push_axis(&base, m));
    let mut gram = [[0.0; 3]; 3];
    for l in 0..3 {
        for m in 0..3 {
            gram[l][m] = push[l].g(&push[m]);
        }
    }
    Ok(gram)
}

/// Sectional curvature of the plane spanned by frame legs `plane.0` and
/// `plane.1`, via the Gauss equation on the already-computed analysis.
pub fn sectional_from_analysis(analysis: &PointAnalysis, plane: (usize, usize)) -> f64 {
    let (a, b) = plane;
    let ea = &analysis.frame.e[a];
    let eb = &analysis.frame.e[b];
    let ambient = curvature_r(ea, eb, eb).g(ea);
    let mut extr = 0.0;
    for k in 0..3 {
        extr += analysis.frame.h[a][a][k] * analysis.frame.h[b][b][k]
            - analysis.frame.h[a][b][k] * analysis.frame.h[a][b][k];
    }
    ambient + extr
}

/// Riemann component `g(R(∂_i, ∂_j) ∂_k, ∂_d)` of the induced metric by
/// nested finite differences of the chart Gram matrix.
fn fd_riemann_lowered(
    imm: &dyn Immersion,
    x: [f64; 3],
    step: f64,
) -> Result<[[[[f64; 3]; 3]; 3]; 3]> {
    let christoffel = |y: [f64; 3]| -> Result<[[[f64; 3]; 3]; 3]> {
        let mut dg = [[[0.0; 3]; 3]; 3];
        for a in 0..3 {
            let mut yp = y;
            yp[a] += step;
            let mut ym = y;
            ym[a] -= step;
            let gp = induced_gram(imm, yp)?;
            let gm = induced_gram(imm, ym)?;
            for l in 0..3 {
                for m in 0..3 {
                    dg[a][l][m] = (gp[l][m] - gm[l][m]) / (2.0 * step);
                }
            }
        }
        let g0 = induced_gram(imm, y)?;
        let ginv = inv3(&g0);
        let mut gamma = [[[0.0; 3]; 3]; 3];
        for k in 0..3 {
            for l in 0..3 {
                for m in 0..3 {
                    let mut acc = 0.0;
                    for n in 0..3 {
                        acc += 0.5 * ginv[k][n] * (dg[l][m][n] + dg[m][l][n] - dg[n][l][m]);
                    }
                    gamma[k][l][m] = acc;
                }
            }
        }
        Ok(gamma)
    };

    let g0 = induced_gram(imm, x)?;
    let gamma0 = christoffel(x)?;
    let mut dgamma = [[[[0.0; 3]; 3]; 3]; 3];
    for a in 0..3 {
        let mut xp = x;
        xp[a] += step;
        let mut xm = x;
        xm[a] -= step;
        let gp = christoffel(xp)?;
        let gm = christoffel(xm)?;
        for k in 0..3 {
            for l in 0..3 {
                for m in 0..3 {
                    dgamma[a][k][l][m] = (gp[k][l][m] - gm[k][l][m]) / (2.0 * step);
                }
            }
        }
    }
    let mut out = [[[[0.0; 3]; 3]; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            for c in 0..3 {
                for d in 0..3 {
                    let mut up = [0.0; 3];
                    for (e, slot) in up.iter_mut().enumerate() {
                        let mut acc = dgamma[a][e][b][c] - dgamma[b][e][a][c];
                        for f in 0..3 {
                            acc += gamma0[f][b][c] * gamma0[e][a][f]
                                - gamma0[f][a][c] * gamma0[e][b][f];
                        }
                        *slot = acc;
                    }
                    let mut low = 0.0;
                    for e in 0..3 {
                        low += g0[d][e] * up[e];
                    }
                    out[a][b][c][d] = low;
                }
            }
        }
    }
    Ok(out)
}

/// Sectional curvature of the plane spanned by two canonical frame legs.
///
/// Computed through the Gauss equation, then cross-checked against an
/// intrinsic route: nested finite differences of the induced metric alone.
/// Disagreement beyond `1e-4` reports a route mismatch.
pub fn sectional_curvature(
    imm: &dyn Immersion,
    x: [f64; 3],
    plane: (usize, usize),
) -> Result<f64> {
    let analysis = PointAnalysis::at(imm, x, &AnalysisConfig::default())?;
    let k_gauss = sectional_from_analysis(&analysis, plane);

    let riem = fd_riemann_lowered(imm, x, 1e-3)?;
    let (a, b) = plane;
    let wa = analysis.coords[a];
    let wb = analysis.coords[b];
    let mut k_fd = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                for d in 0..3 {
                    k_fd += wa[i] * wb[j] * wb[k] * wa[d] * riem[i][j][k][d];
                }
            }
        }
    }
    if (k_gauss - k_fd).abs() > 1e-4 {
        return Err(GeomError::RouteMismatch {
            what: "sectional curvature",
            difference: (k_gauss - k_fd).abs(),
        });
    }
    Ok(k_gauss)
}
