//! Residual evaluators for the structural identities a Lagrangian
//! submanifold of the nearly Kähler S³ × S³ must satisfy.
//!
//! Each identity has a string id and a pinned tolerance. Algebraic
//! identities are evaluated from a single [`PointAnalysis`]; the two
//! identities involving derivatives of frame quantities use central
//! finite differences with frame continuation between neighbouring
//! chart points.

use super::{AnalysisConfig, Immersion, PointAnalysis, Tensor3};
use crate::ambient::{curvature_r, tensor_g, AmbientVector};
use crate::error::{GeomError, Result};
use crate::jet::Jet1;
use crate::lagrangian::inv3;

/// Identity ids accepted by [`residual`], in presentation order.
pub const RESIDUAL_IDS: [&str; 12] = [
    "gauss",
    "codazzi",
    "weingarten_normal",
    "shape_tangent",
    "cubic_symmetry",
    "minimality",
    "nabla_AB",
    "lemma36_angles",
    "compatibility",
    "keylemma",
    "linear_h",
    "case2_param",
];

/// Outcome of evaluating one identity over a sample set.
#[derive(Clone, Debug)]
pub struct ResidualReport {
    pub id: &'static str,
    pub n_samples: usize,
    pub max_residual: f64,
    pub tol: f64,
    pub pass: bool,
}

impl ResidualReport {
    fn new(id: &'static str, n_samples: usize, max_residual: f64, tol: f64) -> Self {
        ResidualReport {
            id,
            n_samples,
            max_residual,
            tol,
            pass: max_residual <= tol,
        }
    }
}

/// Maximal residual of the named identity over the samples.
pub fn residual(
    id: &str,
    imm: &dyn Immersion,
    samples: &[[f64; 3]],
    cfg: &AnalysisConfig,
) -> Result<ResidualReport> {
    if samples.is_empty() {
        return Err(GeomError::InvalidParameter(
            "empty sample set for residual evaluation".into(),
        ));
    }
    let (id, tol, eval): (_, _, fn(&dyn Immersion, [f64; 3], &AnalysisConfig) -> Result<f64>) =
        match id {
            "gauss" => ("gauss", 1e-8, eval_gauss),
            "codazzi" => ("codazzi", 1e-8, eval_codazzi),
            "weingarten_normal" => ("weingarten_normal", 1e-8, eval_weingarten_normal),
            "shape_tangent" => ("shape_tangent", 1e-8, eval_shape_tangent),
            "cubic_symmetry" => ("cubic_symmetry", 1e-9, eval_cubic_symmetry),
            "minimality" => ("minimality", 1e-9, eval_minimality),
            "nabla_AB" => ("nabla_AB", 1e-8, eval_nabla_ab),
            "lemma36_angles" => ("lemma36_angles", 1e-5, eval_lemma36_angles),
            "compatibility" => ("compatibility", 1e-5, eval_compatibility),
            "keylemma" => ("keylemma", 1e-8, eval_keylemma),
            "linear_h" => ("linear_h", 1e-8, eval_linear_h),
            "case2_param" => ("case2_param", 1e-8, eval_case2_param),
            other => {
                return Err(GeomError::InvalidParameter(format!(
                    "unknown identity id {other:?}"
                )))
            }
        };
    let mut max_residual: f64 = 0.0;
    for &x in samples {
        max_residual = max_residual.max(eval(imm, x, cfg)?);
    }
    Ok(ResidualReport::new(id, samples.len(), max_residual, tol))
}

fn tangent_part(an: &PointAnalysis, w: &AmbientVector<f64>) -> AmbientVector<f64> {
    let mut out = AmbientVector::zero_at(an.base);
    for e in &an.frame.e {
        out = out + e.scale(e.g(w));
    }
    out
}

fn normal_part(an: &PointAnalysis, w: &AmbientVector<f64>) -> AmbientVector<f64> {
    let mut out = AmbientVector::zero_at(an.base);
    for e in &an.frame.e {
        let je = e.apply_j();
        out = out + je.scale(je.g(w));
    }
    out
}

fn frame_coords(an: &PointAnalysis, w: &AmbientVector<f64>) -> [f64; 3] {
    [0, 1, 2].map(|k| an.frame.e[k].g(w))
}

/// Tangential part of `P` applied to a tangent vector.
fn a_op(an: &PointAnalysis, w: &AmbientVector<f64>) -> AmbientVector<f64> {
    tangent_part(an, &w.apply_p())
}

/// `B` with `PX = AX + JBX`: frame coordinates `g(PX, JE_k)`.
fn b_op(an: &PointAnalysis, w: &AmbientVector<f64>) -> AmbientVector<f64> {
    let pw = w.apply_p();
    let mut out = AmbientVector::zero_at(an.base);
    for e in &an.frame.e {
        out = out + e.scale(e.apply_j().g(&pw));
    }
    out
}

/// `h(u, v)` as an ambient normal vector, from frame coordinates.
fn h_vec(an: &PointAnalysis, uc: &[f64; 3], vc: &[f64; 3]) -> AmbientVector<f64> {
    let mut coeff = [0.0; 3];
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                coeff[k] += uc[i] * vc[j] * an.frame.h[i][j][k];
            }
        }
    }
    let mut out = AmbientVector::zero_at(an.base);
    for k in 0..3 {
        out = out + an.frame.e[k].apply_j().scale(coeff[k]);
    }
    out
}

/// `S_{J u} v` from frame coordinates: `g(S_{JE_j} E_i, E_k) = h_ik^j`.
fn shape_vec(an: &PointAnalysis, ju: &[f64; 3], vc: &[f64; 3]) -> AmbientVector<f64> {
    let mut out = AmbientVector::zero_at(an.base);
    for k in 0..3 {
        let mut c = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                c += vc[i] * ju[j] * an.frame.h[i][k][j];
            }
        }
        out = out + an.frame.e[k].scale(c);
    }
    out
}

/// Ambient covariant derivative of the frame field `E_j` along `E_a`.
fn nabla_along_frame(an: &PointAnalysis, a: usize, j: usize) -> AmbientVector<f64> {
    let mut out = AmbientVector::zero_at(an.base);
    for l in 0..3 {
        out = out + an.nabla_frame[l][j].scale(an.coords[a][l]);
    }
    out
}

/// Tangential ambient curvature vs the A/B expression.
fn eval_gauss(imm: &dyn Immersion, x: [f64; 3], cfg: &AnalysisConfig) -> Result<f64> {
    let an = PointAnalysis::at(imm, x, cfg)?;
    let e = &an.frame.e;
    let ae = [0, 1, 2].map(|i| a_op(&an, &e[i]));
    let be = [0, 1, 2].map(|i| b_op(&an, &e[i]));
    let mut worst: f64 = 0.0;
    for a in 0..3 {
        for b in (a + 1)..3 {
            for c in 0..3 {
                let lhs = tangent_part(&an, &curvature_r(&e[a], &e[b], &e[c]));
                let gbc = if b == c { 1.0 } else { 0.0 };
                let gac = if a == c { 1.0 } else { 0.0 };
                let rhs = (e[a].scale(gbc) - e[b].scale(gac)).scale(5.0 / 12.0)
                    + (ae[a].scale(ae[b].g(&e[c])) - ae[b].scale(ae[a].g(&e[c]))
                        + be[a].scale(be[b].g(&e[c]))
                        - be[b].scale(be[a].g(&e[c])))
                    .scale(1.0 / 3.0);
                worst = worst.max((lhs - rhs).g_norm());
            }
        }
    }
    Ok(worst)
}

/// Normal ambient curvature vs the A/B expression.
fn eval_codazzi(imm: &dyn Immersion, x: [f64; 3], cfg: &AnalysisConfig) -> Result<f64> {
    let an = PointAnalysis::at(imm, x, cfg)?;
    let e = &an.frame.e;
    let ja = [0, 1, 2].map(|i| a_op(&an, &e[i]).apply_j());
    let jb = [0, 1, 2].map(|i| b_op(&an, &e[i]).apply_j());
    let ae = [0, 1, 2].map(|i| a_op(&an, &e[i]));
    let be = [0, 1, 2].map(|i| b_op(&an, &e[i]));
    let mut worst: f64 = 0.0;
    for a in 0..3 {
        for b in (a + 1)..3 {
            for c in 0..3 {
                let lhs = normal_part(&an, &curvature_r(&e[a], &e[b], &e[c]));
                let rhs = (jb[a].scale(ae[b].g(&e[c])) - jb[b].scale(ae[a].g(&e[c]))
                    - ja[a].scale(be[b].g(&e[c]))
                    + ja[b].scale(be[a].g(&e[c])))
                .scale(1.0 / 3.0);
                worst = worst.max((lhs - rhs).g_norm());
            }
        }
    }
    Ok(worst)
}

/// Normal connection of the `J`-image frame: `∇^⊥_X JY = J∇_X Y + G(X,Y)`.
fn eval_weingarten_normal(imm: &dyn Immersion, x: [f64; 3], cfg: &AnalysisConfig) -> Result<f64> {
    let an = PointAnalysis::at(imm, x, cfg)?;
    let e = &an.frame.e;
    let mut worst: f64 = 0.0;
    for a in 0..3 {
        for j in 0..3 {
            let amb = nabla_along_frame(&an, a, j);
            let gaj = tensor_g(&e[a], &e[j]);
            let lhs = normal_part(&an, &(gaj + amb.apply_j()));
            let mut conn = AmbientVector::zero_at(an.base);
            for k in 0..3 {
                conn = conn + e[k].scale(an.frame.omega[a][j][k]);
            }
            let rhs = conn.apply_j() + gaj;
            worst = worst.max((lhs - rhs).g_norm());
        }
    }
    Ok(worst)
}

/// Shape operator of `JE_j` vs `-Jh`: `f_*(S_{JY} X) = -J h(X,Y)`.
fn eval_shape_tangent(imm: &dyn Immersion, x: [f64; 3], cfg: &AnalysisConfig) -> Result<f64> {
    let an = PointAnalysis::at(imm, x, cfg)?;
    let e = &an.frame.e;
    let mut worst: f64 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            let amb = tensor_g(&e[i], &e[j]) + nabla_along_frame(&an, i, j).apply_j();
            let s = tangent_part(&an, &amb).scale(-1.0);
            let mut rhs = AmbientVector::zero_at(an.base);
            for k in 0..3 {
                rhs = rhs + e[k].scale(an.frame.h[i][j][k]);
            }
            worst = worst.max((s - rhs).g_norm());
        }
    }
    Ok(worst)
}

/// Total symmetry of `h_ij^k`.
fn eval_cubic_symmetry(imm: &dyn Immersion, x: [f64; 3], cfg: &AnalysisConfig) -> Result<f64> {
    let an = PointAnalysis::at(imm, x, cfg)?;
    let h = &an.frame.h;
    let mut worst: f64 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                worst = worst.max((h[i][j][k] - h[j][i][k]).abs());
                worst = worst.max((h[i][j][k] - h[i][k][j]).abs());
            }
        }
    }
    Ok(worst)
}

/// Vanishing mean curvature: `Σ_i h_ii^k = 0`.
fn eval_minimality(imm: &dyn Immersion, x: [f64; 3], cfg: &AnalysisConfig) -> Result<f64> {
    let an = PointAnalysis::at(imm, x, cfg)?;
    let mut worst: f64 = 0.0;
    for k in 0..3 {
        let trace: f64 = (0..3).map(|i| an.frame.h[i][i][k]).sum();
        worst = worst.max(trace.abs());
    }
    Ok(worst)
}

/// Covariant derivatives of `A` and `B`:
/// `(∇_X A)Y = B S_{JX} Y - Jh(X,BY) + ½(JG(X,AY) - AJG(X,Y))` and the
/// companion formula for `B`. The left sides differentiate the operator
/// fields through first-order jets of the chart data.
fn eval_nabla_ab(imm: &dyn Immersion, x: [f64; 3], cfg: &AnalysisConfig) -> Result<f64> {
    let an = PointAnalysis::at(imm, x, cfg)?;
    let e = &an.frame.e;

    let mut gram_jet = [[Jet1::constant(0.0); 3]; 3];
    let mut ca_jet = [[Jet1::constant(0.0); 3]; 3];
    let mut cb_jet = [[Jet1::constant(0.0); 3]; 3];
    for l in 0..3 {
        let pl = an.push_jet[l].apply_p();
        for m in 0..3 {
            gram_jet[l][m] = an.push_jet[l].g(&an.push_jet[m]);
            ca_jet[l][m] = pl.g(&an.push_jet[m]);
            cb_jet[l][m] = pl.g(&an.push_jet[m].apply_j());
        }
    }
    let inv_gram = inv3(&gram_jet);
    // Operator matrices: `A ∂_m = Σ_n amat[n][m] ∂_n` and likewise for B.
    let mut amat = [[Jet1::constant(0.0); 3]; 3];
    let mut bmat = [[Jet1::constant(0.0); 3]; 3];
    for n in 0..3 {
        for m in 0..3 {
            for r in 0..3 {
                amat[n][m] = amat[n][m] + inv_gram[n][r] * ca_jet[m][r];
                bmat[n][m] = bmat[n][m] + inv_gram[n][r] * cb_jet[m][r];
            }
        }
    }

    // (∇_{∂_l} A)∂_m in ambient form, tangential by construction.
    let deriv_in_chart = |mat: &[[Jet1; 3]; 3],
                          op: &dyn Fn(&AmbientVector<f64>) -> AmbientVector<f64>,
                          l: usize,
                          m: usize| {
        let mut field = AmbientVector::zero_at(an.base);
        for n in 0..3 {
            field = field
                + an.push[n].scale(mat[n][m].g[l])
                + an.nabla_push[l][n].scale(mat[n][m].v);
        }
        tangent_part(&an, &field) - op(&tangent_part(&an, &an.nabla_push[l][m]))
    };

    let a_fn = |w: &AmbientVector<f64>| a_op(&an, w);
    let b_fn = |w: &AmbientVector<f64>| b_op(&an, w);

    let mut worst: f64 = 0.0;
    for a in 0..3 {
        for b in 0..3 {
            let mut lhs_a = AmbientVector::zero_at(an.base);
            let mut lhs_b = AmbientVector::zero_at(an.base);
            for l in 0..3 {
                for m in 0..3 {
                    let c = an.coords[a][l] * an.coords[b][m];
                    if c != 0.0 {
                        lhs_a = lhs_a + deriv_in_chart(&amat, &a_fn, l, m).scale(c);
                        lhs_b = lhs_b + deriv_in_chart(&bmat, &b_fn, l, m).scale(c);
                    }
                }
            }

            let unit_a = [0, 1, 2].map(|k| if k == a { 1.0 } else { 0.0 });
            let shape = shape_vec(&an, &unit_a, &[0, 1, 2].map(|k| if k == b { 1.0 } else { 0.0 }));
            let aeb = a_op(&an, &e[b]);
            let beb = b_op(&an, &e[b]);
            let jg = tensor_g(&e[a], &e[b]).apply_j();

            let rhs_a = b_op(&an, &shape)
                - h_vec(&an, &unit_a, &frame_coords(&an, &beb)).apply_j()
                + (tensor_g(&e[a], &aeb).apply_j() - a_op(&an, &jg)).scale(0.5);
            let rhs_b = h_vec(&an, &unit_a, &frame_coords(&an, &aeb)).apply_j()
                - a_op(&an, &shape)
                + (tensor_g(&e[a], &beb).apply_j() - b_op(&an, &jg)).scale(0.5);

            worst = worst.max((lhs_a - rhs_a).g_norm());
            worst = worst.max((lhs_b - rhs_b).g_norm());
        }
    }
    Ok(worst)
}

/// Frame data at a neighbouring chart point, re-labelled and re-signed to
/// match a reference frame. `None` when the greedy matching is ambiguous
/// (an eigenvalue crossing inside the stencil).
fn match_frames(reference: &PointAnalysis, neighbor: &PointAnalysis, overlap_min: f64) -> Option<([usize; 3], [f64; 3])> {
    // Raw component overlaps; bases differ by the FD step, so the metric
    // inner product is not available and plain R⁸ dots decide the match.
    let dot = |a: &AmbientVector<f64>, b: &AmbientVector<f64>| {
        a.u.dot(&b.u) + a.v.dot(&b.v)
    };
    let mut cosine = [[0.0_f64; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            let na = dot(&reference.frame.e[a], &reference.frame.e[a]).sqrt();
            let nb = dot(&neighbor.frame.e[b], &neighbor.frame.e[b]).sqrt();
            cosine[a][b] = dot(&reference.frame.e[a], &neighbor.frame.e[b]) / (na * nb);
        }
    }
    let mut perm = [usize::MAX; 3];
    let mut sign = [0.0; 3];
    let mut used = [false; 3];
    for _ in 0..3 {
        let mut best = (0, 0, 0.0_f64);
        for a in 0..3 {
            if perm[a] != usize::MAX {
                continue;
            }
            for b in 0..3 {
                if !used[b] && cosine[a][b].abs() > best.2.abs() {
                    best = (a, b, cosine[a][b]);
                }
            }
        }
        if best.2.abs() < overlap_min {
            return None;
        }
        perm[best.0] = best.1;
        sign[best.0] = best.2.signum();
        used[best.1] = true;
    }
    Some((perm, sign))
}

fn unwrap_towards(target: f64, reference: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let mut d = (target - reference) % TAU;
    if d > PI {
        d -= TAU;
    }
    if d < -PI {
        d += TAU;
    }
    reference + d
}

/// Central-difference derivatives of the angles and of `h` along the
/// frame directions. `ok[i]` is false when the stencil for direction `i`
/// could not be matched.
struct FrameDerivatives {
    /// `dangles[i][j] = E_i(θ_j)` (halved angles).
    dangles: [[f64; 3]; 3],
    /// `dh[i]` is the derivative of the full `h` tensor along `E_i`.
    dh: [Tensor3; 3],
    ok: [bool; 3],
}

fn frame_derivatives(
    imm: &dyn Immersion,
    x: [f64; 3],
    an: &PointAnalysis,
    cfg: &AnalysisConfig,
) -> FrameDerivatives {
    let mut out = FrameDerivatives {
        dangles: [[0.0; 3]; 3],
        dh: [[[[0.0; 3]; 3]; 3]; 3],
        ok: [false; 3],
    };
    for i in 0..3 {
        let w = an.coords[i];
        let step = cfg.fd_step;
        let shift = |s: f64| {
            [
                x[0] + s * w[0],
                x[1] + s * w[1],
                x[2] + s * w[2],
            ]
        };
        let side = |s: f64| -> Option<([f64; 3], Tensor3)> {
            let nb = PointAnalysis::at(imm, shift(s), cfg).ok()?;
            let (perm, sign) = match_frames(an, &nb, cfg.frame_overlap_min)?;
            let mut angles = [0.0; 3];
            let mut h: Tensor3 = [[[0.0; 3]; 3]; 3];
            for a in 0..3 {
                angles[a] = unwrap_towards(nb.frame.angles2[perm[a]], an.frame.angles2[a]);
                for b in 0..3 {
                    for c in 0..3 {
                        h[a][b][c] =
                            sign[a] * sign[b] * sign[c] * nb.frame.h[perm[a]][perm[b]][perm[c]];
                    }
                }
            }
            Some((angles, h))
        };
        let (Some((ap, hp)), Some((am, hm))) = (side(step), side(-step)) else {
            continue;
        };
        out.ok[i] = true;
        for j in 0..3 {
            // Doubled angles differenced, then halved for θ_j itself.
            out.dangles[i][j] = (ap[j] - am[j]) / (4.0 * step);
            for b in 0..3 {
                for c in 0..3 {
                    out.dh[i][j][b][c] = (hp[j][b][c] - hm[j][b][c]) / (2.0 * step);
                }
            }
        }
    }
    out
}

/// Angle derivatives vs `h`, and the `ω`/`h` quotient relation:
/// `E_i(θ_j) = -h_jj^i` and
/// `h_ij^k cos(θ_j - θ_k) = (√3/6 ε_ijk - ω_ij^k) sin(θ_j - θ_k)`.
fn eval_lemma36_angles(imm: &dyn Immersion, x: [f64; 3], cfg: &AnalysisConfig) -> Result<f64> {
    let an = PointAnalysis::at(imm, x, cfg)?;
    let mut worst: f64 = 0.0;

    let theta = [0, 1, 2].map(|k| an.frame.angles2[k] / 2.0);
    let eps = levi_civita();
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                if j == k {
                    continue;
                }
                let d = theta[j] - theta[k];
                if d.sin().abs() < cfg.sin_skip_tol {
                    continue;
                }
                let lhs = an.frame.h[i][j][k] * d.cos();
                let rhs = (3.0_f64.sqrt() / 6.0 * eps[i][j][k] - an.frame.omega[i][j][k]) * d.sin();
                worst = worst.max((lhs - rhs).abs());
            }
        }
    }

    let derivs = frame_derivatives(imm, x, &an, cfg);
    for i in 0..3 {
        if !derivs.ok[i] {
            continue;
        }
        for j in 0..3 {
            worst = worst.max((derivs.dangles[i][j] + an.frame.h[j][j][i]).abs());
        }
    }
    Ok(worst)
}

/// Commutator compatibility of the angle derivatives:
/// `-E_k(h_jj^i) + E_i(h_jj^k) = Σ_ℓ (ω_ik^ℓ - ω_ki^ℓ) h_jj^ℓ`.
fn eval_compatibility(imm: &dyn Immersion, x: [f64; 3], cfg: &AnalysisConfig) -> Result<f64> {
    let an = PointAnalysis::at(imm, x, cfg)?;
    let derivs = frame_derivatives(imm, x, &an, cfg);
    let mut worst: f64 = 0.0;
    for i in 0..3 {
        for k in 0..3 {
            if i == k || !derivs.ok[i] || !derivs.ok[k] {
                continue;
            }
            for j in 0..3 {
                let lhs = -derivs.dh[k][j][j][i] + derivs.dh[i][j][j][k];
                let mut rhs = 0.0;
                for l in 0..3 {
                    rhs +=
                        (an.frame.omega[i][k][l] - an.frame.omega[k][i][l]) * an.frame.h[j][j][l];
                }
                worst = worst.max((lhs - rhs).abs());
            }
        }
    }
    Ok(worst)
}

fn levi_civita() -> Tensor3 {
    let mut eps: Tensor3 = [[[0.0; 3]; 3]; 3];
    eps[0][1][2] = 1.0;
    eps[1][2][0] = 1.0;
    eps[2][0][1] = 1.0;
    eps[0][2][1] = -1.0;
    eps[2][1][0] = -1.0;
    eps[1][0][2] = -1.0;
    eps
}

/// The cyclic second-derivative obstruction for constant sectional
/// curvature: a normal-vector expression in `A`, `B`, `G`, and `h` whose
/// cyclic sum over `(W, X, Y)` must vanish, evaluated on all 81 frame
/// 4-tuples `(W, X, Y, Z)`.
fn eval_keylemma(imm: &dyn Immersion, x: [f64; 3], cfg: &AnalysisConfig) -> Result<f64> {
    let an = PointAnalysis::at(imm, x, cfg)?;
    let e = &an.frame.e;
    let unit = |k: usize| [0, 1, 2].map(|m| if m == k { 1.0 } else { 0.0 });

    let ae = [0, 1, 2].map(|i| a_op(&an, &e[i]));
    let be = [0, 1, 2].map(|i| b_op(&an, &e[i]));
    let ja = [0, 1, 2].map(|i| ae[i].apply_j());
    let jb = [0, 1, 2].map(|i| be[i].apply_j());
    let mut a_sc = [[0.0; 3]; 3];
    let mut b_sc = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            a_sc[i][j] = ae[i].g(&e[j]);
            b_sc[i][j] = be[i].g(&e[j]);
        }
    }

    let g_vec: Vec<Vec<AmbientVector<f64>>> = (0..3)
        .map(|i| (0..3).map(|j| tensor_g(&e[i], &e[j])).collect())
        .collect();
    let jg: Vec<Vec<AmbientVector<f64>>> = (0..3)
        .map(|i| (0..3).map(|j| g_vec[i][j].apply_j()).collect())
        .collect();
    let mut s_jg_a = [[[0.0; 3]; 3]; 3];
    let mut s_jg_b = [[[0.0; 3]; 3]; 3];
    let mut s_h_ja = [[[0.0; 3]; 3]; 3];
    let mut s_h_jb = [[[0.0; 3]; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let hij = h_vec(&an, &unit(i), &unit(j));
            for k in 0..3 {
                s_jg_a[i][j][k] = jg[i][j].g(&ae[k]);
                s_jg_b[i][j][k] = jg[i][j].g(&be[k]);
                s_h_ja[i][j][k] = hij.g(&ja[k]);
                s_h_jb[i][j][k] = hij.g(&jb[k]);
            }
        }
    }

    // Vector brackets multiplying g(AX,Z) and g(BX,Z); antisymmetric in (w,y).
    let mut vec_a: Vec<Vec<AmbientVector<f64>>> = Vec::with_capacity(3);
    let mut vec_b: Vec<Vec<AmbientVector<f64>>> = Vec::with_capacity(3);
    for w in 0..3 {
        let mut row_a = Vec::with_capacity(3);
        let mut row_b = Vec::with_capacity(3);
        for y in 0..3 {
            let aw = frame_coords(&an, &ae[w]);
            let ay = frame_coords(&an, &ae[y]);
            let bw = frame_coords(&an, &be[w]);
            let by = frame_coords(&an, &be[y]);
            let jbjg = b_op(&an, &jg[w][y]).apply_j();
            let jajg = a_op(&an, &jg[w][y]).apply_j();
            row_a.push(
                jbjg + tensor_g(&e[y], &be[w]).scale(0.5) - tensor_g(&e[w], &be[y]).scale(0.5)
                    + h_vec(&an, &unit(w), &ay)
                    - h_vec(&an, &unit(y), &aw),
            );
            row_b.push(
                tensor_g(&e[w], &ae[y]).scale(0.5) - jajg - tensor_g(&e[y], &ae[w]).scale(0.5)
                    + h_vec(&an, &unit(w), &by)
                    - h_vec(&an, &unit(y), &bw),
            );
        }
        vec_a.push(row_a);
        vec_b.push(row_b);
    }

    let term = |w: usize, xx: usize, y: usize, z: usize| {
        let c_jb = s_jg_a[y][w][z] + 0.5 * s_jg_a[y][z][w] - 0.5 * s_jg_a[w][z][y]
            + s_h_jb[w][z][y]
            - s_h_jb[y][z][w];
        let c_ja = s_jg_b[w][y][z] + 0.5 * s_jg_b[w][z][y] - 0.5 * s_jg_b[y][z][w]
            + s_h_ja[w][z][y]
            - s_h_ja[y][z][w];
        jb[xx].scale(c_jb)
            + ja[xx].scale(c_ja)
            + vec_a[w][y].scale(a_sc[xx][z])
            + vec_b[w][y].scale(b_sc[xx][z])
    };

    let mut worst: f64 = 0.0;
    for w in 0..3 {
        for xx in 0..3 {
            for y in 0..3 {
                for z in 0..3 {
                    let total = term(w, xx, y, z) + term(xx, y, w, z) + term(y, w, xx, z);
                    worst = worst.max(total.g_norm());
                }
            }
        }
    }
    Ok(worst)
}

/// The linear equations for `h` from the cyclic obstruction, in terms of
/// `λ_i = cos 2θ_i` and `μ_i = sin 2θ_i`.
fn eval_linear_h(imm: &dyn Immersion, x: [f64; 3], cfg: &AnalysisConfig) -> Result<f64> {
    let an = PointAnalysis::at(imm, x, cfg)?;
    let lam = [0, 1, 2].map(|k| an.frame.angles2[k].cos());
    let mu = [0, 1, 2].map(|k| an.frame.angles2[k].sin());
    let h = &an.frame.h;
    let mut worst: f64 = 0.0;
    for (i, j, k) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
        let c1 = lam[i] * (lam[j] - lam[k]) + mu[i] * (mu[j] - mu[k]);
        let c2 = lam[k] * (lam[i] - lam[j]) + mu[k] * (mu[i] - mu[j]);
        worst = worst.max((c1 * h[k][k][j] + c2 * h[i][i][j]).abs());
        worst = worst.max((c1 * h[0][1][2]).abs());
    }
    Ok(worst)
}

/// The one-parameter solution of the linear equations when `h_12^3 = 0`:
/// `h_ii^j = -2α_j sin(θ_j-θ_k) sin(2θ_i-θ_j-θ_k)` and
/// `h_kk^j = 2α_j sin(θ_i-θ_j) sin(2θ_k-θ_i-θ_j)`, fitted per `j` by
/// least squares.
fn eval_case2_param(imm: &dyn Immersion, x: [f64; 3], cfg: &AnalysisConfig) -> Result<f64> {
    let an = PointAnalysis::at(imm, x, cfg)?;
    let th = [0, 1, 2].map(|k| an.frame.angles2[k] / 2.0);
    let h = &an.frame.h;
    let mut worst: f64 = 0.0;
    for (i, j, k) in [(2, 0, 1), (0, 1, 2), (1, 2, 0)] {
        let c1 = -2.0 * (th[j] - th[k]).sin() * (2.0 * th[i] - th[j] - th[k]).sin();
        let c2 = 2.0 * (th[i] - th[j]).sin() * (2.0 * th[k] - th[i] - th[j]).sin();
        let y1 = h[i][i][j];
        let y2 = h[k][k][j];
        let denom = c1 * c1 + c2 * c2;
        let alpha = if denom < 1e-12 {
            0.0
        } else {
            (c1 * y1 + c2 * y2) / denom
        };
        worst = worst.max((y1 - c1 * alpha).abs());
        worst = worst.max((y2 - c2 * alpha).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{all_examples, construct_example, ExampleParams};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sample_box(rng: &mut ChaCha8Rng, n: usize) -> Vec<[f64; 3]> {
        (0..n)
            .map(|_| {
                [
                    rng.random_range(-0.8..0.8),
                    rng.random_range(-0.8..0.8),
                    rng.random_range(-0.8..0.8),
                ]
            })
            .collect()
    }

    #[test]
    fn algebraic_identities_hold_on_the_catalog() {
        let cfg = AnalysisConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        for ex in all_examples() {
            let samples = sample_box(&mut rng, 4);
            for id in [
                "gauss",
                "codazzi",
                "weingarten_normal",
                "shape_tangent",
                "cubic_symmetry",
                "minimality",
                "nabla_AB",
                "linear_h",
                "case2_param",
            ] {
                let report = residual(id, &ex, &samples, &cfg).unwrap();
                assert!(
                    report.pass,
                    "{} failed {id}: {:.3e} > {:.1e}",
                    ex.name(),
                    report.max_residual,
                    report.tol
                );
            }
        }
    }

    #[test]
    fn derivative_identities_hold_on_the_catalog() {
        let cfg = AnalysisConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(52);
        for ex in all_examples() {
            let samples = sample_box(&mut rng, 2);
            for id in ["lemma36_angles", "compatibility"] {
                let report = residual(id, &ex, &samples, &cfg).unwrap();
                assert!(
                    report.pass,
                    "{} failed {id}: {:.3e} > {:.1e}",
                    ex.name(),
                    report.max_residual,
                    report.tol
                );
            }
        }
    }

    #[test]
    fn keylemma_vanishes_on_constant_curvature_examples() {
        let cfg = AnalysisConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        for name in ["4.1", "4.2", "4.3", "4.6", "4.8"] {
            let ex = construct_example(name, &ExampleParams::default()).unwrap();
            let samples = sample_box(&mut rng, 3);
            let report = residual("keylemma", &ex, &samples, &cfg).unwrap();
            assert!(
                report.pass,
                "{name} keylemma: {:.3e}",
                report.max_residual
            );
        }
    }

    #[test]
    fn constant_angle_example_has_flat_angle_derivatives() {
        let cfg = AnalysisConfig::default();
        let ex = construct_example("4.6", &ExampleParams::default()).unwrap();
        let report = residual("lemma36_angles", &ex, &[[0.3, -0.2, 0.1]], &cfg).unwrap();
        assert!(report.max_residual <= 1e-9, "got {:.3e}", report.max_residual);
    }

    #[test]
    fn unknown_identity_is_rejected() {
        let cfg = AnalysisConfig::default();
        let ex = construct_example("4.1", &ExampleParams::default()).unwrap();
        assert!(matches!(
            residual("not_an_identity", &ex, &[[0.0; 3]], &cfg),
            Err(GeomError::InvalidParameter(_))
        ));
        assert!(matches!(
            residual("gauss", &ex, &[], &cfg),
            Err(GeomError::InvalidParameter(_))
        ));
    }

    #[test]
    fn report_pass_flag_tracks_tolerance() {
        let r = ResidualReport::new("gauss", 5, 1e-9, 1e-8);
        assert!(r.pass);
        let r = ResidualReport::new("gauss", 5, 2e-8, 1e-8);
        assert!(!r.pass);
    }
}
