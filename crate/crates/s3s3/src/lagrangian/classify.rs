//! Classification of Lagrangian immersions by angle pattern and curvature.
//!
//! The decision tree follows the constant-curvature classification: a
//! totally geodesic grid is matched against the six known angle triples;
//! otherwise the angles must be constant `(0, 2π/3, 4π/3)` and the
//! sectional curvature constant, selecting the Berger sphere (`K = 3/16`)
//! or the flat torus (`K = 0`). Everything else is reported as outside
//! the classification.

use super::{sectional_from_analysis, AnalysisConfig, Immersion, PointAnalysis};
use crate::error::{GeomError, Result};
use std::f64::consts::{PI, TAU};
use std::fmt;

/// Outcome labels, one per classified immersion class.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClassificationLabel {
    /// Totally geodesic round sphere in the first factor.
    FirstFactorSphere,
    /// Totally geodesic round sphere in the second factor.
    SecondFactorSphere,
    /// Totally geodesic round diagonal sphere.
    DiagonalSphere,
    /// Totally geodesic Berger sphere, right-translated second factor.
    RightTranslatedSphere,
    /// Totally geodesic Berger sphere through inverse and conjugation.
    ConjugateTranslatedSphere,
    /// Totally geodesic Berger sphere, conjugation paired with inverse.
    MixedConjugateSphere,
    /// Non-totally-geodesic Berger sphere of curvature 3/16.
    ConjugationOrbitSphere,
    /// Flat Lagrangian torus.
    FlatTorus,
    /// Lagrangian but outside the constant-curvature classification.
    Unclassified,
}

impl fmt::Display for ClassificationLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ClassificationLabel::FirstFactorSphere => {
                "Theorem 1.3 (1) / Theorem 1.1 (1) — totally geodesic sphere (u, 1)"
            }
            ClassificationLabel::SecondFactorSphere => {
                "Theorem 1.3 (2) / Theorem 1.1 (2) — totally geodesic sphere (1, u)"
            }
            ClassificationLabel::DiagonalSphere => {
                "Theorem 1.3 (3) / Theorem 1.1 (3) — totally geodesic sphere (u, u)"
            }
            ClassificationLabel::RightTranslatedSphere => {
                "Theorem 1.3 (4) — totally geodesic Berger sphere (u, ui)"
            }
            ClassificationLabel::ConjugateTranslatedSphere => {
                "Theorem 1.3 (5) — totally geodesic Berger sphere (u⁻¹, uiu⁻¹)"
            }
            ClassificationLabel::MixedConjugateSphere => {
                "Theorem 1.3 (6) — totally geodesic Berger sphere (uiu⁻¹, u⁻¹)"
            }
            ClassificationLabel::ConjugationOrbitSphere => {
                "Theorem 1.1 (4) — Berger sphere, K = 3/16"
            }
            ClassificationLabel::FlatTorus => "Theorem 1.1 (5) — flat torus",
            ClassificationLabel::Unclassified => {
                "outside classification / not constant curvature"
            }
        };
        f.write_str(s)
    }
}

/// The six totally geodesic doubled-angle triples, in canonical ascending
/// order, in the same order as the labels of the totally geodesic list.
pub const TG_ANGLE_TRIPLES: [[f64; 3]; 6] = [
    [4.0 * PI / 3.0, 4.0 * PI / 3.0, 4.0 * PI / 3.0],
    [2.0 * PI / 3.0, 2.0 * PI / 3.0, 2.0 * PI / 3.0],
    [0.0, 0.0, 0.0],
    [0.0, PI, PI],
    [PI / 3.0, PI / 3.0, 4.0 * PI / 3.0],
    [2.0 * PI / 3.0, 5.0 * PI / 3.0, 5.0 * PI / 3.0],
];

const TG_LABELS: [ClassificationLabel; 6] = [
    ClassificationLabel::FirstFactorSphere,
    ClassificationLabel::SecondFactorSphere,
    ClassificationLabel::DiagonalSphere,
    ClassificationLabel::RightTranslatedSphere,
    ClassificationLabel::ConjugateTranslatedSphere,
    ClassificationLabel::MixedConjugateSphere,
];

/// Classification outcome with the measurements that drove the decision.
#[derive(Clone, Debug)]
pub struct Classification {
    pub label: ClassificationLabel,
    /// Largest second-fundamental-form component over the grid.
    pub max_h_norm: f64,
    /// Worst circular distance to the matched angle triple, when one matched.
    pub angle_deviation: f64,
    /// Angle triple at the first grid point.
    pub angles2: [f64; 3],
    /// Range of sectional curvatures seen over grid points and planes.
    pub curvature_range: Option<(f64, f64)>,
}

fn circ_dist(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

/// Distance between two angle multisets on the circle: the best over
/// permutations of the worst per-entry circular distance.
pub(crate) fn triple_distance(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    const PERMS: [[usize; 3]; 6] = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    let mut best = f64::INFINITY;
    for p in PERMS {
        let mut worst = 0.0_f64;
        for i in 0..3 {
            worst = worst.max(circ_dist(a[i], b[p[i]]));
        }
        best = best.min(worst);
    }
    best
}

/// Classify an immersion from its analyses over a grid of chart points.
pub fn classify(
    imm: &dyn Immersion,
    grid: &[[f64; 3]],
    cfg: &AnalysisConfig,
) -> Result<Classification> {
    if grid.is_empty() {
        return Err(GeomError::InvalidParameter(
            "classification needs at least one chart point".into(),
        ));
    }
    let mut analyses = Vec::with_capacity(grid.len());
    for &x in grid {
        analyses.push(PointAnalysis::at(imm, x, cfg)?);
    }

    let mut max_h = 0.0_f64;
    for a in &analyses {
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    max_h = max_h.max(a.frame.h[i][j][k].abs());
                }
            }
        }
    }
    let first_angles = analyses[0].frame.angles2;

    if max_h <= cfg.tg_tol {
        // Totally geodesic branch: all points must agree on one of the six
        // known triples.
        let mut best = (f64::INFINITY, 0usize);
        for (idx, target) in TG_ANGLE_TRIPLES.iter().enumerate() {
            let d = triple_distance(&first_angles, target);
            if d < best.0 {
                best = (d, idx);
            }
        }
        if best.0 > cfg.angle_match_tol {
            return Ok(Classification {
                label: ClassificationLabel::Unclassified,
                max_h_norm: max_h,
                angle_deviation: best.0,
                angles2: first_angles,
                curvature_range: None,
            });
        }
        let target = &TG_ANGLE_TRIPLES[best.1];
        let mut worst = best.0;
        for a in &analyses[1..] {
            let d = triple_distance(&a.frame.angles2, target);
            if d > cfg.angle_match_tol {
                return Err(GeomError::InconsistentAngles {
                    at: a.frame.chart,
                    spread: d,
                });
            }
            worst = worst.max(d);
        }
        return Ok(Classification {
            label: TG_LABELS[best.1],
            max_h_norm: max_h,
            angle_deviation: worst,
            angles2: first_angles,
            curvature_range: None,
        });
    }

    // Non-totally-geodesic branch: angles must be the fixed non-degenerate
    // triple and the sectional curvature constant across grid and planes.
    let target = [0.0, 2.0 * PI / 3.0, 4.0 * PI / 3.0];
    let mut worst = 0.0_f64;
    let mut angles_ok = true;
    for a in &analyses {
        let d = triple_distance(&a.frame.angles2, &target);
        worst = worst.max(d);
        if d > cfg.angle_match_tol {
            angles_ok = false;
        }
    }
    let mut k_min = f64::INFINITY;
    let mut k_max = f64::NEG_INFINITY;
    for a in &analyses {
        for plane in [(0, 1), (1, 2), (2, 0)] {
            let k = sectional_from_analysis(a, plane);
            k_min = k_min.min(k);
            k_max = k_max.max(k);
        }
    }
    let range = Some((k_min, k_max));
    if !angles_ok || k_max - k_min > cfg.k_match_tol {
        return Ok(Classification {
            label: ClassificationLabel::Unclassified,
            max_h_norm: max_h,
            angle_deviation: worst,
            angles2: first_angles,
            curvature_range: range,
        });
    }
    let k_mid = 0.5 * (k_min + k_max);
    let label = if (k_mid - 3.0 / 16.0).abs() <= cfg.k_match_tol {
        ClassificationLabel::ConjugationOrbitSphere
    } else if k_mid.abs() <= cfg.k_match_tol {
        ClassificationLabel::FlatTorus
    } else {
        ClassificationLabel::Unclassified
    };
    Ok(Classification {
        label,
        max_h_norm: max_h,
        angle_deviation: worst,
        angles2: first_angles,
        curvature_range: range,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triple_distance_handles_wrap_and_permutation() {
        let a = [0.001, 2.0 * PI / 3.0, TAU - 0.001];
        let b = [0.0, 0.0, 2.0 * PI / 3.0];
        // One entry of `a` sits just below 2π and must match 0 across the wrap.
        assert!(triple_distance(&a, &b) <= 0.0011);
        let c = [PI / 3.0, PI / 3.0, 4.0 * PI / 3.0];
        let shuffled = [4.0 * PI / 3.0, PI / 3.0, PI / 3.0];
        assert!(triple_distance(&c, &shuffled) <= 1e-15);
        assert!(triple_distance(&c, &[0.0, 0.0, 0.0]) > 1.0);
    }

    #[test]
    fn labels_render_the_published_names() {
        assert_eq!(
            ClassificationLabel::FlatTorus.to_string(),
            "Theorem 1.1 (5) — flat torus"
        );
        assert_eq!(
            ClassificationLabel::Unclassified.to_string(),
            "outside classification / not constant curvature"
        );
        assert!(ClassificationLabel::ConjugationOrbitSphere
            .to_string()
            .contains("3/16"));
    }
}
