//! Hand-rolled 3×3 linear algebra for the angle-frame pipeline.
//!
//! Everything here works on plain `[[f64; 3]; 3]` (or generic `Real`
//! scalars where jets must flow through). Vectors returned by the eigen
//! routines are rows.

use crate::jet::Real;

pub(crate) fn matmul3<S: Real>(a: &[[S; 3]; 3], b: &[[S; 3]; 3]) -> [[S; 3]; 3] {
    let mut out = [[S::zero(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let mut acc = S::zero();
            for k in 0..3 {
                acc = acc + a[i][k] * b[k][j];
            }
            out[i][j] = acc;
        }
    }
    out
}

pub(crate) fn mat_vec3<S: Real>(a: &[[S; 3]; 3], v: &[S; 3]) -> [S; 3] {
    let mut out = [S::zero(); 3];
    for i in 0..3 {
        for k in 0..3 {
            out[i] = out[i] + a[i][k] * v[k];
        }
    }
    out
}

pub(crate) fn det3<S: Real>(m: &[[S; 3]; 3]) -> S {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Adjugate inverse; generic so jet-valued matrices can be inverted.
pub(crate) fn inv3<S: Real>(m: &[[S; 3]; 3]) -> [[S; 3]; 3] {
    let d = det3(m).recip();
    let mut out = [[S::zero(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let (a, b) = ((i + 1) % 3, (i + 2) % 3);
            let (c, e) = ((j + 1) % 3, (j + 2) % 3);
            // Cofactor transpose: out[j][i] pattern folded into the index swap.
            out[j][i] = (m[a][c] * m[b][e] - m[a][e] * m[b][c]) * d;
        }
    }
    out
}

/// Solve M x = rhs for symmetric positive-definite 3×3 via the adjugate.
pub(crate) fn solve3(m: &[[f64; 3]; 3], rhs: &[f64; 3]) -> [f64; 3] {
    mat_vec3(&inv3(m), rhs)
}

fn quadratic_form(v: &[f64; 3], m: &[[f64; 3]; 3], w: &[f64; 3]) -> f64 {
    let mut acc = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            acc += v[i] * m[i][j] * w[j];
        }
    }
    acc
}

pub(crate) fn off_diag_norm(m: &[[f64; 3]; 3]) -> f64 {
    let mut acc: f64 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            if i != j {
                acc = acc.max(m[i][j].abs());
            }
        }
    }
    acc
}

/// Cyclic Jacobi eigensolver for a symmetric 3×3 matrix.
/// Returns (eigenvalues, eigenvectors as rows), unsorted.
pub(crate) fn jacobi_eigen3(m: &[[f64; 3]; 3]) -> ([f64; 3], [[f64; 3]; 3]) {
    let mut a = *m;
    let mut v = [[0.0; 3]; 3];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for _sweep in 0..32 {
        let mut off: f64 = 0.0;
        for p in 0..3 {
            for q in p + 1..3 {
                off = off.max(a[p][q].abs());
            }
        }
        if off < 1e-15 {
            break;
        }
        for p in 0..3 {
            for q in p + 1..3 {
                if a[p][q].abs() < 1e-18 {
                    continue;
                }
                let tau = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..3 {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..3 {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                    // Eigenvector rows rotate with the row transform.
                    let (vpk, vqk) = (v[p][k], v[q][k]);
                    v[p][k] = c * vpk - s * vqk;
                    v[q][k] = s * vpk + c * vqk;
                }
            }
        }
    }
    ([a[0][0], a[1][1], a[2][2]], v)
}

/// Joint diagonalization of two symmetric commuting 3×3 matrices by the
/// Cardoso-Souloumiac pair-rotation update. Returns eigenvector rows.
pub(crate) fn joint_jacobi3(a0: &[[f64; 3]; 3], b0: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut a = *a0;
    let mut b = *b0;
    let mut v = [[0.0; 3]; 3];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for _sweep in 0..64 {
        if off_diag_norm(&a).max(off_diag_norm(&b)) < 1e-15 {
            break;
        }
        for p in 0..3 {
            for q in p + 1..3 {
                // Rotation maximizing the joint diagonal of both matrices.
                let mut ton = 0.0;
                let mut toff = 0.0;
                for m in [&a, &b] {
                    let h0 = m[p][p] - m[q][q];
                    let h1 = m[p][q] + m[q][p];
                    ton += h0 * h0 - h1 * h1;
                    toff += 2.0 * h0 * h1;
                }
                let theta = -0.5 * toff.atan2(ton + (ton * ton + toff * toff).sqrt());
                if theta.abs() < 1e-18 {
                    continue;
                }
                let (s, c) = theta.sin_cos();
                for m in [&mut a, &mut b] {
                    for k in 0..3 {
                        let (mkp, mkq) = (m[k][p], m[k][q]);
                        m[k][p] = c * mkp - s * mkq;
                        m[k][q] = s * mkp + c * mkq;
                    }
                    for k in 0..3 {
                        let (mpk, mqk) = (m[p][k], m[q][k]);
                        m[p][k] = c * mpk - s * mqk;
                        m[q][k] = s * mpk + c * mqk;
                    }
                }
                for k in 0..3 {
                    let (vpk, vqk) = (v[p][k], v[q][k]);
                    v[p][k] = c * vpk - s * vqk;
                    v[q][k] = s * vpk + c * vqk;
                }
            }
        }
    }
    v
}

/// Fixed probe angles for the combined-matrix diagonalization attempts.
/// Quasi-random but hard-coded so runs stay deterministic.
const PHI_PROBES: [f64; 5] = [0.739_085_133_2, 2.046_6, 3.863_703_3, 1.324_717_957, 5.097_3];

/// Simultaneous eigenbasis of two commuting symmetric matrices: diagonalize
/// cos(φ)A + sin(φ)B for successive probe angles, retrying while the
/// eigenvalue gaps are below `gap_tol`; after the probes are exhausted
/// (genuinely repeated angles) fall back to joint Jacobi. Returns rows.
pub(crate) fn simultaneous_eigenbasis(
    a: &[[f64; 3]; 3],
    b: &[[f64; 3]; 3],
    gap_tol: f64,
) -> [[f64; 3]; 3] {
    for phi in PHI_PROBES {
        let (c, s) = (phi.cos(), phi.sin());
        let mut m = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] = c * a[i][j] + s * b[i][j];
            }
        }
        let (vals, vecs) = jacobi_eigen3(&m);
        let mut sorted = vals;
        sorted.sort_by(f64::total_cmp);
        let gap = (sorted[1] - sorted[0]).min(sorted[2] - sorted[1]);
        if gap >= gap_tol {
            return vecs;
        }
    }
    joint_jacobi3(a, b)
}

/// First-order eigenvector variation for a pair of commuting symmetric
/// matrices given their derivatives, in the basis of the eigenvectors
/// themselves: returns c with dv_j = Σᵢ c[i][j] vᵢ. Rows of `vecs` are the
/// (orthonormal) eigenvectors; `diag_a[i]` = vᵢᵀA vᵢ and likewise for B.
/// Pairs whose eigenvalues coincide in both matrices (gap below `gap_tol`)
/// get c = 0: the frame is chosen non-rotating inside degenerate blocks.
pub(crate) fn eigvec_derivative(
    vecs: &[[f64; 3]; 3],
    diag_a: &[f64; 3],
    diag_b: &[f64; 3],
    da: &[[f64; 3]; 3],
    db: &[[f64; 3]; 3],
    gap_tol: f64,
) -> [[f64; 3]; 3] {
    let mut c = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            if i == j {
                continue;
            }
            let gap_a = diag_a[j] - diag_a[i];
            let gap_b = diag_b[j] - diag_b[i];
            if gap_a.abs() < gap_tol && gap_b.abs() < gap_tol {
                continue;
            }
            // Use whichever matrix separates the pair more strongly.
            let (dm, gap) = if gap_a.abs() >= gap_b.abs() {
                (da, gap_a)
            } else {
                (db, gap_b)
            };
            c[i][j] = quadratic_form(&vecs[i], dm, &vecs[j]) / gap;
        }
    }
    c
}
