//! Newton enumeration of the critical points of the field inside the
//! extracted domain, with Morse classification by Hessian eigenvalue signs.
//!
//! Seeds form a fixed lattice over the mask bounding box; iterations from
//! different seeds are independent and the merge order is fixed, so two runs
//! with identical parameters produce identical lists.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::geometry::domain::{ComponentCount, Mask};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CriticalKind {
    Maximum,
    Saddle,
    Minimum,
    Degenerate,
}

/// A converged zero of the gradient.
#[derive(Debug, Clone, Serialize)]
pub struct CriticalPoint {
    pub location: (f64, f64),
    pub kind: CriticalKind,
    /// Eigenvalues of the symmetric Hessian, ascending.
    pub hessian_eigenvalues: (f64, f64),
    /// Field value at the point.
    pub value: f64,
    /// Gradient norm at the point.
    pub residual: f64,
}

/// Eigenvalue-sign classification. An eigenvalue whose magnitude falls below
/// `degeneracy_tol` makes the point degenerate; degenerate points are
/// reported, never dropped (the strip limit is genuinely degenerate).
pub fn classify(hessian: (f64, f64, f64), degeneracy_tol: f64) -> CriticalKind {
    let (l1, l2) = hessian_eigenvalues(hessian);
    if l1.abs().min(l2.abs()) < degeneracy_tol {
        CriticalKind::Degenerate
    } else if l2 < 0.0 {
        CriticalKind::Maximum
    } else if l1 > 0.0 {
        CriticalKind::Minimum
    } else {
        CriticalKind::Saddle
    }
}

/// Eigenvalues of the symmetric 2x2 matrix `[[uxx, uxy], [uxy, uyy]]`,
/// ascending.
pub fn hessian_eigenvalues(hessian: (f64, f64, f64)) -> (f64, f64) {
    let (uxx, uxy, uyy) = hessian;
    let mean = 0.5 * (uxx + uyy);
    let r = (0.5 * (uxx - uyy)).hypot(uxy);
    (mean - r, mean + r)
}

#[derive(Debug, Clone, Copy)]
pub struct NewtonOptions {
    /// Seed lattice density over the mask bounding box.
    pub seeds: (usize, usize),
    /// Convergence threshold on the gradient norm.
    pub newton_tol: f64,
    pub degeneracy_tol: f64,
    pub max_iterations: usize,
    /// Merge radius relative to the mask bounding-box diagonal.
    pub dedup_relative: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            seeds: (256, 64),
            newton_tol: 1e-12,
            degeneracy_tol: 1e-12,
            max_iterations: 50,
            dedup_relative: 1e-6,
        }
    }
}

/// Damped Newton on the gradient from every seed inside the mask; diverged
/// seeds are discarded silently, converged iterates outside the mask too.
/// Points closer than the dedup radius merge, keeping the smaller residual.
pub fn find_critical_points<F: ScalarField>(
    field: &F,
    mask: &Mask,
    opts: &NewtonOptions,
) -> Vec<CriticalPoint> {
    let Some(bbox) = mask.bbox() else {
        return Vec::new();
    };
    let diameter = (bbox.xmax - bbox.xmin).hypot(bbox.ymax - bbox.ymin);
    let dedup_radius = opts.dedup_relative * diameter;
    let (sx, sy) = opts.seeds;
    let mut found: Vec<CriticalPoint> = Vec::new();
    for jy in 0..sy {
        let y0 = bbox.ymin + (bbox.ymax - bbox.ymin) * (jy as f64 + 0.5) / sy as f64;
        for jx in 0..sx {
            let x0 = bbox.xmin + (bbox.xmax - bbox.xmin) * (jx as f64 + 0.5) / sx as f64;
            if !mask.contains(x0, y0) {
                continue;
            }
            let Some(point) = newton_from_seed(field, (x0, y0), diameter, opts) else {
                continue;
            };
            if !mask.contains(point.location.0, point.location.1) {
                continue;
            }
            match found.iter_mut().find(|p| {
                (p.location.0 - point.location.0).hypot(p.location.1 - point.location.1)
                    <= dedup_radius
            }) {
                Some(existing) => {
                    if point.residual < existing.residual {
                        *existing = point;
                    }
                }
                None => found.push(point),
            }
        }
    }
    found
}

fn newton_from_seed<F: ScalarField>(
    field: &F,
    seed: (f64, f64),
    diameter: f64,
    opts: &NewtonOptions,
) -> Option<CriticalPoint> {
    let (mut x, mut y) = seed;
    let mut gnorm = grad_norm(field, x, y);
    for _ in 0..opts.max_iterations {
        if gnorm <= opts.newton_tol {
            return Some(converged(field, x, y, gnorm, opts));
        }
        let (gx, gy) = field.gradient(x, y);
        let (uxx, uxy, uyy) = field.hessian(x, y);
        let mut det = uxx * uyy - uxy * uxy;
        let (mut a, mut d) = (uxx, uyy);
        if det.abs() < 1e-14 {
            // regularize a near-singular Hessian; the strip ridge hits this
            let mu = 1e-8 * (1.0 + uxx.abs().max(uyy.abs()).max(uxy.abs()));
            a += mu;
            d += mu;
            det = a * d - uxy * uxy;
            if det.abs() < f64::MIN_POSITIVE {
                return None;
            }
        }
        let dx = -(d * gx - uxy * gy) / det;
        let dy = -(a * gy - uxy * gx) / det;
        // halve the step until the gradient norm decreases
        let mut step = 1.0;
        let mut moved = false;
        for _ in 0..30 {
            let (nx, ny) = (x + step * dx, y + step * dy);
            let ng = grad_norm(field, nx, ny);
            if ng < gnorm {
                x = nx;
                y = ny;
                gnorm = ng;
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if !moved {
            return None;
        }
        if (x - seed.0).hypot(y - seed.1) > 4.0 * diameter {
            return None;
        }
    }
    if gnorm <= opts.newton_tol {
        return Some(converged(field, x, y, gnorm, opts));
    }
    None
}

fn converged<F: ScalarField>(
    field: &F,
    x: f64,
    y: f64,
    gnorm: f64,
    opts: &NewtonOptions,
) -> CriticalPoint {
    let hess = field.hessian(x, y);
    CriticalPoint {
        location: (x, y),
        kind: classify(hess, opts.degeneracy_tol),
        hessian_eigenvalues: hessian_eigenvalues(hess),
        value: field.value(x, y),
        residual: gnorm,
    }
}

fn grad_norm<F: ScalarField>(field: &F, x: f64, y: f64) -> f64 {
    let (gx, gy) = field.gradient(x, y);
    gx.hypot(gy)
}

/// Maxima count against the required `k`, cross-checked against the
/// superlevel components: every component must contain at least one located
/// maximum, and every above-level maximum must land in some component.
#[derive(Debug, Clone, Serialize)]
pub struct MaximaCheck {
    pub count_maxima: usize,
    pub required: usize,
    /// Located maxima per component label.
    pub per_component: Vec<usize>,
    pub pass: bool,
}

pub fn maxima_count_vs_k(
    points: &[CriticalPoint],
    required: usize,
    components: &ComponentCount,
) -> Result<MaximaCheck> {
    let maxima: Vec<&CriticalPoint> = points
        .iter()
        .filter(|p| p.kind == CriticalKind::Maximum)
        .collect();
    let mut per_component = vec![0usize; components.count];
    for m in &maxima {
        if m.value <= components.level {
            continue;
        }
        match components.component_of(m.location.0, m.location.1) {
            Some(label) => per_component[label] += 1,
            None => {
                return Err(Error::Inconsistent(format!(
                    "maximum at ({}, {}) with value {} lies in no superlevel component \
                     (resolution too coarse)",
                    m.location.0, m.location.1, m.value
                )))
            }
        }
    }
    if let Some(empty) = per_component.iter().position(|&c| c == 0) {
        return Err(Error::Inconsistent(format!(
            "superlevel component {empty} contains no located maximum \
             (resolution too coarse)"
        )));
    }
    Ok(MaximaCheck {
        count_maxima: maxima.len(),
        required,
        per_component,
        pass: maxima.len() >= required,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{predictions, ImplicitField, RadialField, RootConfig, StripField};
    use crate::geometry::contour::GridWindow;
    use crate::geometry::domain::{extract_domain, superlevel_component_count};

    #[test]
    fn classification_table() {
        assert_eq!(classify((-1.0, 0.0, -1.0), 1e-12), CriticalKind::Maximum);
        assert_eq!(classify((1.0, 0.0, -1.0), 1e-12), CriticalKind::Saddle);
        assert_eq!(classify((1.0, 0.0, 1.0), 1e-12), CriticalKind::Minimum);
        assert_eq!(
            classify((-1e-15, 0.0, -1.0), 1e-12),
            CriticalKind::Degenerate
        );
    }

    #[test]
    fn strip_ridge_is_degenerate() {
        let window = GridWindow::new(-2.0, 2.0, -1.5, 1.5, 64, 64).unwrap();
        let mask = Mask::sample(&StripField, window, 0.0);
        let opts = NewtonOptions {
            seeds: (32, 16),
            ..Default::default()
        };
        let points = find_critical_points(&StripField, &mask, &opts);
        assert!(!points.is_empty());
        for p in &points {
            assert_eq!(p.kind, CriticalKind::Degenerate);
            assert!(p.location.1.abs() <= 1e-12);
            assert!(p.residual <= opts.newton_tol);
        }
    }

    #[test]
    fn disk_has_single_maximum_at_center() {
        let disk = RadialField { radius: 1.0 };
        let window = GridWindow::new(-1.2, 1.2, -1.2, 1.2, 128, 128).unwrap();
        let dom = extract_domain(&disk, &window, 1e-10).unwrap();
        let points = find_critical_points(&disk, &dom.mask, &NewtonOptions::default());
        assert_eq!(points.len(), 1);
        let p = &points[0];
        assert_eq!(p.kind, CriticalKind::Maximum);
        assert!(p.location.0.abs() < 1e-12 && p.location.1.abs() < 1e-12);
        assert!((p.value - 0.25).abs() < 1e-14);
    }

    fn canonical_setup() -> (ImplicitField, crate::geometry::domain::DomainExtract) {
        let cfg = RootConfig::new(vec![-2.0, -1.0, 1.0, 2.0], 1e-3).unwrap();
        let field = ImplicitField::new(cfg).unwrap();
        let pred = predictions(field.config()).unwrap();
        let window = GridWindow::from_rect(pred.rect, 1.05, 1024, 256).unwrap();
        let dom = extract_domain(&field, &window, 1e-9).unwrap();
        (field, dom)
    }

    #[test]
    fn two_maxima_near_the_peak_abscissae() {
        let (field, dom) = canonical_setup();
        let points = find_critical_points(&field, &dom.mask, &NewtonOptions::default());
        let maxima: Vec<_> = points
            .iter()
            .filter(|p| p.kind == CriticalKind::Maximum)
            .collect();
        assert!(maxima.len() >= 2, "found {} maxima", maxima.len());
        let s = (2.5f64).sqrt();
        for target in [-s, s] {
            let hit = maxima
                .iter()
                .any(|p| (p.location.0 - target).abs() < 0.1 && p.location.1.abs() < 0.1);
            assert!(hit, "no maximum near ({target}, 0)");
        }
        for p in &maxima {
            assert!(p.value > 0.5, "maximum value {} not above 1/2", p.value);
            assert!(p.residual <= 1e-12);
        }
        // a saddle with value below 1/2 separates consecutive maxima
        let saddles: Vec<_> = points
            .iter()
            .filter(|p| p.kind == CriticalKind::Saddle)
            .collect();
        assert!(saddles
            .iter()
            .any(|p| p.location.0.abs() < 0.1 && p.value < 0.5));
    }

    #[test]
    fn maxima_pair_with_components() {
        let (field, dom) = canonical_setup();
        let points = find_critical_points(&field, &dom.mask, &NewtonOptions::default());
        let comps =
            superlevel_component_count(&field, 0.5, dom.window(), (1024, 256), (4096, 1024))
                .unwrap();
        let check = maxima_count_vs_k(&points, field.config().k, &comps).unwrap();
        assert!(check.pass);
        assert!(check.count_maxima >= 2);
        assert!(check.per_component.iter().all(|&c| c >= 1));
        assert!(check.count_maxima >= comps.count);
    }

    #[test]
    fn runs_are_deterministic() {
        let (field, dom) = canonical_setup();
        let a = find_critical_points(&field, &dom.mask, &NewtonOptions::default());
        let b = find_critical_points(&field, &dom.mask, &NewtonOptions::default());
        assert_eq!(a.len(), b.len());
        for (p, q) in a.iter().zip(&b) {
            assert_eq!(p.location, q.location);
            assert_eq!(p.kind, q.kind);
            assert_eq!(p.value, q.value);
        }
    }
}
