//! Quantitative certificates measured on the extracted boundary: the
//! starshapedness margin, the curvature sign-change count with its
//! refinement-stability check, and the minimum-curvature trend.
//!
//! Certificates report measured margins, never bare booleans, so trends in
//! the vanishing quantities stay visible in the artifacts.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{
    curvature, predictions, radial_derivative, AsymptoticPrediction, ImplicitField, RootConfig,
    ScalarField,
};
use crate::geometry::contour::{Contour, GridWindow};
use crate::geometry::domain::{extract_domain, DomainExtract};

/// Measured starshapedness margin with respect to a center on the axis.
#[derive(Debug, Clone, Serialize)]
pub struct StarshapeCertificate {
    pub center_x: f64,
    /// Maximum of `(x - cx) u_x + y u_y` over the boundary.
    pub max_radial_derivative: f64,
    pub argmax: (f64, f64),
    /// Pass iff the maximum stays below `-margin`.
    pub margin: f64,
    pub pass: bool,
}

/// Maximum of the radial derivative over boundary vertices, sharpened by a
/// golden-section pass over the two polyline segments adjacent to the argmax
/// (each query point projected back onto the level curve).
pub fn starshape_certificate<F: ScalarField>(
    field: &F,
    domain: &DomainExtract,
    center_x: f64,
    margin: f64,
) -> StarshapeCertificate {
    let contour = &domain.boundary;
    let mut best_i = 0;
    let mut best = f64::NEG_INFINITY;
    for (i, &(x, y)) in contour.vertices.iter().enumerate() {
        let rd = radial_derivative(field, center_x, x, y);
        if rd > best {
            best = rd;
            best_i = i;
        }
    }
    let n = contour.len();
    let prev = contour.vertices[(best_i + n - 1) % n];
    let next = contour.vertices[(best_i + 1) % n];
    let eval = |p: (f64, f64)| {
        let q = project_to_level(field, p, 0.0);
        radial_derivative(field, center_x, q.0, q.1)
    };
    let (p1, v1) = golden_max_on_segment(&eval, prev, contour.vertices[best_i]);
    let (p2, v2) = golden_max_on_segment(&eval, contour.vertices[best_i], next);
    let mut argmax = contour.vertices[best_i];
    if v1 > best {
        best = v1;
        argmax = project_to_level(field, p1, 0.0);
    }
    if v2 > best {
        best = v2;
        argmax = project_to_level(field, p2, 0.0);
    }
    StarshapeCertificate {
        center_x,
        max_radial_derivative: best,
        argmax,
        margin,
        pass: best <= -margin,
    }
}

/// Curvature sign structure of the extracted boundary.
#[derive(Debug, Clone, Serialize)]
pub struct CurvatureCertificate {
    /// Sign changes of the vertex curvature along the closed boundary.
    pub zero_count: usize,
    /// Same count measured on a re-extraction at doubled resolution.
    pub zero_count_refined: usize,
    /// Polished locations of the sign changes at the base resolution.
    pub zero_locations: Vec<(f64, f64)>,
    pub min_curvature: f64,
    pub min_location: (f64, f64),
    /// Predicted zero abscissae `(zeta_minus, zeta_plus)`.
    pub predicted_zeros: (f64, f64),
    /// Pass iff exactly two sign changes, stable under refinement.
    pub pass: bool,
}

/// Count and locate curvature zeros on the boundary and measure the global
/// curvature minimum. The count is certified by repeating the extraction at
/// doubled resolution; sign-change counting alone is resolution-sensitive
/// near tangential zeros.
pub fn curvature_certificate<F: ScalarField>(
    field: &F,
    domain: &DomainExtract,
    pred: &AsymptoticPrediction,
) -> Result<CurvatureCertificate> {
    let contour = &domain.boundary;
    if !contour.closed {
        return Err(Error::Certificate(
            "curvature certificate needs a closed boundary".into(),
        ));
    }
    if contour.curvature.iter().any(|k| !k.is_finite()) {
        return Err(Error::Certificate(
            "curvature undefined at a boundary vertex".into(),
        ));
    }
    let changes = sign_changes(&contour.curvature);
    let zero_locations = changes
        .iter()
        .map(|&i| polish_zero(field, contour, i))
        .collect::<Vec<_>>();
    let (min_curvature, min_location) = min_curvature_on(field, contour)?;

    let refined_window = domain.window().doubled();
    let refined = extract_domain(field, &refined_window, domain.refine_tol)?;
    if refined.boundary.curvature.iter().any(|k| !k.is_finite()) {
        return Err(Error::Certificate(
            "curvature undefined at a refined boundary vertex".into(),
        ));
    }
    let refined_changes = sign_changes(&refined.boundary.curvature);

    let zero_count = changes.len();
    let zero_count_refined = refined_changes.len();
    Ok(CurvatureCertificate {
        zero_count,
        zero_count_refined,
        zero_locations,
        min_curvature,
        min_location,
        predicted_zeros: (pred.zeta_minus, pred.zeta_plus),
        pass: zero_count == 2 && zero_count_refined == 2,
    })
}

/// Vertex indices where the curvature changes sign along the closed contour.
/// Exact zeros are folded into the following nonzero value so a vertex
/// sitting on a zero is counted once, not twice.
fn sign_changes(kappa: &[f64]) -> Vec<usize> {
    let nonzero: Vec<(usize, f64)> = kappa
        .iter()
        .copied()
        .enumerate()
        .filter(|(_, k)| *k != 0.0)
        .collect();
    if nonzero.len() < 2 {
        return Vec::new();
    }
    let mut out = Vec::new();
    for w in 0..nonzero.len() {
        let (i, a) = nonzero[w];
        let (_, b) = nonzero[(w + 1) % nonzero.len()];
        if a.signum() != b.signum() {
            out.push(i);
        }
    }
    out
}

/// Bisection along the polyline parameterization between vertices `i` and
/// `i+1`, each query projected onto the level curve, until the curvature
/// magnitude drops below `1e-8 * (1 + max |curvature|)`.
fn polish_zero<F: ScalarField>(field: &F, contour: &Contour, i: usize) -> (f64, f64) {
    let n = contour.len();
    let a = contour.vertices[i];
    let b = contour.vertices[(i + 1) % n];
    let scale = 1.0 + contour
        .curvature
        .iter()
        .fold(0.0f64, |m, &k| if k.is_finite() { m.max(k.abs()) } else { m });
    let eval = |t: f64| -> ((f64, f64), f64) {
        let p = (a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1));
        let q = project_to_level(field, p, 0.0);
        (q, curvature(field, q.0, q.1).unwrap_or(f64::NAN))
    };
    let (mut t0, mut t1) = (0.0, 1.0);
    let (p0, k0) = eval(t0);
    let (p1, k1) = eval(t1);
    if !k0.is_finite() || !k1.is_finite() || k0.signum() == k1.signum() {
        return if k0.abs() <= k1.abs() { p0 } else { p1 };
    }
    let mut best = if k0.abs() <= k1.abs() { p0 } else { p1 };
    let mut best_k = k0.abs().min(k1.abs());
    let mut f0 = k0;
    for _ in 0..60 {
        let tm = 0.5 * (t0 + t1);
        let (pm, km) = eval(tm);
        if !km.is_finite() {
            break;
        }
        if km.abs() < best_k {
            best_k = km.abs();
            best = pm;
        }
        if km.abs() <= 1e-8 * scale {
            break;
        }
        if km.signum() == f0.signum() {
            t0 = tm;
            f0 = km;
        } else {
            t1 = tm;
        }
    }
    best
}

/// Global curvature minimum over the boundary, refined by golden search over
/// the polyline neighborhood of the minimizing vertex.
pub(crate) fn min_curvature_on<F: ScalarField>(
    field: &F,
    contour: &Contour,
) -> Result<(f64, (f64, f64))> {
    let n = contour.len();
    let mut best_i = 0;
    let mut best = f64::INFINITY;
    for (i, &k) in contour.curvature.iter().enumerate() {
        if !k.is_finite() {
            return Err(Error::Certificate(
                "curvature undefined at a boundary vertex".into(),
            ));
        }
        if k < best {
            best = k;
            best_i = i;
        }
    }
    let prev = contour.vertices[(best_i + n - 1) % n];
    let here = contour.vertices[best_i];
    let next = contour.vertices[(best_i + 1) % n];
    let eval = |p: (f64, f64)| {
        let q = project_to_level(field, p, 0.0);
        curvature(field, q.0, q.1).unwrap_or(f64::INFINITY)
    };
    let neg = |p: (f64, f64)| -eval(p);
    let (pa, va) = golden_max_on_segment(&neg, prev, here);
    let (pb, vb) = golden_max_on_segment(&neg, here, next);
    let mut min_loc = here;
    if -va < best {
        best = -va;
        min_loc = project_to_level(field, pa, 0.0);
    }
    if -vb < best {
        best = -vb;
        min_loc = project_to_level(field, pb, 0.0);
    }
    Ok((best, min_loc))
}

/// One pass of Newton projection onto `{u = level}` along the gradient.
fn project_to_level<F: ScalarField>(field: &F, p: (f64, f64), level: f64) -> (f64, f64) {
    let mut q = p;
    for _ in 0..3 {
        let r = field.value(q.0, q.1) - level;
        let (gx, gy) = field.gradient(q.0, q.1);
        let g2 = gx * gx + gy * gy;
        if g2 < 1e-30 || r == 0.0 {
            break;
        }
        q = (q.0 - r * gx / g2, q.1 - r * gy / g2);
    }
    q
}

fn golden_max_on_segment(
    f: &dyn Fn((f64, f64)) -> f64,
    a: (f64, f64),
    b: (f64, f64),
) -> ((f64, f64), f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let lerp = |t: f64| (a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1));
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut t1 = hi - INV_PHI * (hi - lo);
    let mut t2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(lerp(t1));
    let mut f2 = f(lerp(t2));
    for _ in 0..40 {
        if f1 < f2 {
            lo = t1;
            t1 = t2;
            f1 = f2;
            t2 = lo + INV_PHI * (hi - lo);
            f2 = f(lerp(t2));
        } else {
            hi = t2;
            t2 = t1;
            f2 = f1;
            t1 = hi - INV_PHI * (hi - lo);
            f1 = f(lerp(t1));
        }
    }
    let tm = 0.5 * (lo + hi);
    let p = lerp(tm);
    (p, f(p))
}

/// (P3)-style trend quantity on the fixed strip window: minimum boundary
/// curvature over the level-0 arcs with `|x| <= xlim`, golden-refined around
/// the minimizing vertex.
///
/// For configurations whose bounded extraction succeeds this equals the
/// global boundary minimum (the curvature dip sits at the bottom center);
/// it stays measurable for larger epsilons where the superlevel component
/// escapes its enclosure rectangle.
pub fn strip_window_min_curvature<F: ScalarField>(field: &F, xlim: f64) -> Result<f64> {
    let arcs = crate::geometry::domain::strip_window_arcs(field, xlim)?;
    let mut best = f64::INFINITY;
    let mut found = false;
    for arc in &arcs {
        let n = arc.len();
        for (i, &(x, _)) in arc.vertices.iter().enumerate() {
            if x.abs() > xlim {
                continue;
            }
            let k = arc.curvature[i];
            if !k.is_finite() {
                return Err(Error::Certificate(
                    "curvature undefined at a boundary vertex".into(),
                ));
            }
            found = true;
            if k < best {
                best = k;
                let prev = arc.vertices[(i + n - 1) % n];
                let next = arc.vertices[(i + 1) % n];
                let neg = |p: (f64, f64)| {
                    let q = project_to_level(field, p, 0.0);
                    -curvature(field, q.0, q.1).unwrap_or(f64::INFINITY)
                };
                let (_, va) = golden_max_on_segment(&neg, prev, arc.vertices[i]);
                let (_, vb) = golden_max_on_segment(&neg, arc.vertices[i], next);
                best = best.min(-va).min(-vb);
            }
        }
    }
    if !found {
        return Err(Error::ConstructionFailed(
            "no boundary arcs found in the strip window".into(),
        ));
    }
    Ok(best)
}

/// One sweep entry of the minimum-curvature trend.
#[derive(Debug, Clone, Serialize)]
pub struct TrendEntry {
    pub epsilon: f64,
    pub min_curvature: Option<f64>,
    pub error: Option<String>,
}

/// Minimum-curvature measurements over a family of configurations.
///
/// Entries are evaluated in decreasing-epsilon order regardless of the input
/// order; `strictly_decreasing` holds iff `|min curvature|` strictly
/// decreases along every consecutive pair of successful entries.
#[derive(Debug, Clone, Serialize)]
pub struct MinCurvatureTrend {
    pub entries: Vec<TrendEntry>,
    pub strictly_decreasing: bool,
}

pub fn min_curvature_trend(
    configs: &[RootConfig],
    nx: usize,
    ny: usize,
    refine_tol: f64,
) -> MinCurvatureTrend {
    let mut ordered: Vec<&RootConfig> = configs.iter().collect();
    ordered.sort_by(|a, b| b.epsilon.partial_cmp(&a.epsilon).unwrap());
    let mut entries = Vec::with_capacity(ordered.len());
    for cfg in ordered {
        let entry = (|| -> Result<f64> {
            let field = ImplicitField::new(cfg.clone())?;
            let pred = predictions(cfg)?;
            let window = GridWindow::from_rect(pred.rect, 1.05, nx, ny)?;
            let dom = extract_domain(&field, &window, refine_tol)?;
            let (min_k, _) = min_curvature_on(&field, &dom.boundary)?;
            Ok(min_k)
        })();
        entries.push(match entry {
            Ok(k) => TrendEntry {
                epsilon: cfg.epsilon,
                min_curvature: Some(k),
                error: None,
            },
            Err(e) => TrendEntry {
                epsilon: cfg.epsilon,
                min_curvature: None,
                error: Some(e.to_string()),
            },
        });
    }
    let measured: Vec<f64> = entries
        .iter()
        .filter_map(|e| e.min_curvature)
        .collect();
    let strictly_decreasing = measured.windows(2).all(|w| w[1].abs() < w[0].abs());
    MinCurvatureTrend {
        entries,
        strictly_decreasing,
    }
}
