//! Extraction of the bounded superlevel component: raster mask and boundary
//! contour, plus the rectangle-negativity check and superlevel component
//! counting with refinement-stability.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{AsymptoticPrediction, Rect, ScalarField};
use crate::geometry::contour::{extract_from_samples, sample_grid, Contour, GridWindow};

/// Node raster of a superlevel set over a window.
#[derive(Debug, Clone)]
pub struct Mask {
    pub window: GridWindow,
    inside: Vec<bool>,
}

impl Mask {
    /// All nodes with `u > level` (no connectivity applied).
    pub fn sample<F: ScalarField>(field: &F, window: GridWindow, level: f64) -> Mask {
        let values = sample_grid(field, &window);
        Mask {
            window,
            inside: values.iter().map(|&v| v > level).collect(),
        }
    }

    /// The 4-connected component of `{u > level}` containing the seed node.
    pub fn flood_from<F: ScalarField>(
        field: &F,
        window: GridWindow,
        seed: (f64, f64),
        level: f64,
    ) -> Result<Mask> {
        let values = sample_grid(field, &window);
        Self::flood_from_samples(&values, window, seed, level)
    }

    pub(crate) fn flood_from_samples(
        values: &[f64],
        window: GridWindow,
        seed: (f64, f64),
        level: f64,
    ) -> Result<Mask> {
        let (nx, ny) = (window.nx, window.ny);
        let (si, sj) = window.nearest_node(seed.0, seed.1);
        if values[sj * nx + si] <= level {
            return Err(Error::ConstructionFailed(format!(
                "seed ({}, {}) is not in the superlevel set (u = {} at the nearest node)",
                seed.0,
                seed.1,
                values[sj * nx + si]
            )));
        }
        let mut inside = vec![false; nx * ny];
        let mut stack = vec![(si, sj)];
        inside[sj * nx + si] = true;
        while let Some((i, j)) = stack.pop() {
            let mut push = |i: usize, j: usize, stack: &mut Vec<(usize, usize)>| {
                let idx = j * nx + i;
                if !inside[idx] && values[idx] > level {
                    inside[idx] = true;
                    stack.push((i, j));
                }
            };
            if i > 0 {
                push(i - 1, j, &mut stack);
            }
            if i + 1 < nx {
                push(i + 1, j, &mut stack);
            }
            if j > 0 {
                push(i, j - 1, &mut stack);
            }
            if j + 1 < ny {
                push(i, j + 1, &mut stack);
            }
        }
        Ok(Mask { window, inside })
    }

    pub fn node(&self, i: usize, j: usize) -> bool {
        self.inside[j * self.window.nx + i]
    }

    /// Nearest-node membership test.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        if !self.window.contains(x, y) {
            return false;
        }
        let (i, j) = self.window.nearest_node(x, y);
        self.node(i, j)
    }

    pub fn count(&self) -> usize {
        self.inside.iter().filter(|&&b| b).count()
    }

    /// Node-count area estimate, one cell per inside node.
    pub fn area(&self) -> f64 {
        self.count() as f64 * self.window.dx() * self.window.dy()
    }

    pub fn touches_edge(&self) -> bool {
        let (nx, ny) = (self.window.nx, self.window.ny);
        (0..nx).any(|i| self.node(i, 0) || self.node(i, ny - 1))
            || (0..ny).any(|j| self.node(0, j) || self.node(nx - 1, j))
    }

    /// Tight bounding box of the inside nodes.
    pub fn bbox(&self) -> Option<Rect> {
        let (nx, ny) = (self.window.nx, self.window.ny);
        let mut imin = nx;
        let mut imax = 0;
        let mut jmin = ny;
        let mut jmax = 0;
        for j in 0..ny {
            for i in 0..nx {
                if self.node(i, j) {
                    imin = imin.min(i);
                    imax = imax.max(i);
                    jmin = jmin.min(j);
                    jmax = jmax.max(j);
                }
            }
        }
        if imin > imax {
            return None;
        }
        Some(Rect {
            xmin: self.window.x(imin),
            xmax: self.window.x(imax),
            ymin: self.window.y(jmin),
            ymax: self.window.y(jmax),
        })
    }
}

/// The extracted bounded domain: its boundary contour, the filled raster
/// mask, and the anchor it was grown from.
#[derive(Debug, Clone)]
pub struct DomainExtract {
    pub boundary: Contour,
    pub mask: Mask,
    pub anchor: (f64, f64),
    pub refine_tol: f64,
}

impl DomainExtract {
    pub fn window(&self) -> &GridWindow {
        &self.mask.window
    }
}

/// Extract the connected component of `{u > 0}` containing the field anchor.
///
/// Errors when the anchor is not in the superlevel set (epsilon too large)
/// or the component touches the window edge (enclosure violated).
pub fn extract_domain<F: ScalarField>(
    field: &F,
    window: &GridWindow,
    refine_tol: f64,
) -> Result<DomainExtract> {
    let anchor = field.anchor();
    let ua = field.value(anchor.0, anchor.1);
    if ua <= 0.0 {
        return Err(Error::ConstructionFailed(format!(
            "anchor ({}, {}) has u = {ua} <= 0; epsilon too large",
            anchor.0, anchor.1
        )));
    }
    let values = sample_grid(field, window);
    let mask = Mask::flood_from_samples(&values, *window, anchor, 0.0)?;
    if mask.touches_edge() {
        return Err(Error::EnclosureViolation);
    }
    let contours = extract_from_samples(field, 0.0, window, refine_tol, &values)?;
    let boundary = contours
        .into_iter()
        .filter(|c| c.closed && c.contains(anchor.0, anchor.1))
        .min_by(|a, b| {
            a.signed_area()
                .abs()
                .partial_cmp(&b.signed_area().abs())
                .unwrap()
        })
        .ok_or_else(|| {
            Error::ConstructionFailed("no closed level-0 contour encloses the anchor".into())
        })?;
    Ok(DomainExtract {
        boundary,
        mask,
        anchor,
        refine_tol,
    })
}

/// Result of sampling `u` on the enclosure rectangle boundary.
#[derive(Debug, Clone, Serialize)]
pub struct RectNegativity {
    /// Maximum of `u` over all four sides.
    pub max_u: f64,
    /// Maximum of `u` over the two vertical sides `x = +-x_enc`.
    pub max_u_vertical: f64,
    /// Vertical sides must stay below `-2 + slack`.
    pub vertical_bound: f64,
    pub pass: bool,
}

/// Sample `u` on the boundary of the prediction rectangle (at least 4096
/// points per side). Passes iff `u < 0` everywhere and the vertical sides
/// stay below `-2 + 0.5`.
pub fn check_rect_negativity<F: ScalarField>(
    field: &F,
    pred: &AsymptoticPrediction,
    samples_per_side: usize,
) -> RectNegativity {
    let n = samples_per_side.max(4096);
    let r = pred.rect;
    let mut max_u = f64::NEG_INFINITY;
    let mut max_v = f64::NEG_INFINITY;
    for i in 0..=n {
        let t = i as f64 / n as f64;
        let x = r.xmin + t * (r.xmax - r.xmin);
        let y = r.ymin + t * (r.ymax - r.ymin);
        max_u = max_u.max(field.value(x, r.ymin)).max(field.value(x, r.ymax));
        let side = field.value(r.xmin, y).max(field.value(r.xmax, y));
        max_u = max_u.max(side);
        max_v = max_v.max(side);
    }
    let vertical_bound = -2.0 + 0.5;
    RectNegativity {
        max_u,
        max_u_vertical: max_v,
        vertical_bound,
        pass: max_u < 0.0 && max_v <= vertical_bound,
    }
}

/// Labeled superlevel components at the resolution where the count became
/// stable under refinement doubling.
#[derive(Debug, Clone)]
pub struct ComponentCount {
    pub level: f64,
    pub count: usize,
    /// One representative (maximal-value node) per component, by label order.
    pub seeds: Vec<(f64, f64)>,
    pub resolution: (usize, usize),
    window: GridWindow,
    labels: Vec<u32>,
}

impl ComponentCount {
    /// Component label (0-based) of the point, looked up over the four
    /// surrounding nodes so that points marginally off a labeled node still
    /// resolve.
    pub fn component_of(&self, x: f64, y: f64) -> Option<usize> {
        if !self.window.contains(x, y) {
            return None;
        }
        let nx = self.window.nx;
        let fi = ((x - self.window.xmin) / self.window.dx()).floor();
        let fj = ((y - self.window.ymin) / self.window.dy()).floor();
        let i0 = (fi as usize).min(nx - 2);
        let j0 = (fj as usize).min(self.window.ny - 2);
        for (i, j) in [(i0, j0), (i0 + 1, j0), (i0, j0 + 1), (i0 + 1, j0 + 1)] {
            let l = self.labels[j * nx + i];
            if l != 0 {
                return Some(l as usize - 1);
            }
        }
        None
    }
}

/// Count 4-connected components of `{u > level}` inside the domain component
/// of `{u > 0}`, doubling the sampling resolution until two consecutive
/// refinements agree. Fails with an indeterminate-count error past the
/// maximum resolution.
pub fn superlevel_component_count<F: ScalarField>(
    field: &F,
    level: f64,
    window: &GridWindow,
    base_resolution: (usize, usize),
    max_resolution: (usize, usize),
) -> Result<ComponentCount> {
    let anchor = field.anchor();
    let mut res = base_resolution;
    let mut prev: Option<(usize, ComponentCount)> = None;
    loop {
        let w = GridWindow::new(
            window.xmin,
            window.xmax,
            window.ymin,
            window.ymax,
            res.0,
            res.1,
        )?;
        let values = sample_grid(field, &w);
        let domain = Mask::flood_from_samples(&values, w, anchor, 0.0)?;
        let counted = label_components(&values, &domain, level)?;
        if let Some((prev_count, _)) = prev {
            if prev_count == counted.count {
                return Ok(counted);
            }
        }
        if res.0 >= max_resolution.0 && res.1 >= max_resolution.1 {
            return Err(Error::IndeterminateCount {
                nx: res.0,
                ny: res.1,
            });
        }
        prev = Some((counted.count, counted));
        res = (
            (res.0 * 2).min(max_resolution.0),
            (res.1 * 2).min(max_resolution.1),
        );
    }
}

fn label_components(values: &[f64], domain: &Mask, level: f64) -> Result<ComponentCount> {
    let w = domain.window;
    let (nx, ny) = (w.nx, w.ny);
    let in_set = |i: usize, j: usize| domain.node(i, j) && values[j * nx + i] > level;
    let mut labels = vec![0u32; nx * ny];
    let mut seeds: Vec<(f64, f64)> = Vec::new();
    let mut next = 1u32;
    let mut stack = Vec::new();
    for j0 in 0..ny {
        for i0 in 0..nx {
            if labels[j0 * nx + i0] != 0 || !in_set(i0, j0) {
                continue;
            }
            let label = next;
            next += 1;
            labels[j0 * nx + i0] = label;
            stack.push((i0, j0));
            let mut best = (i0, j0);
            let mut best_val = values[j0 * nx + i0];
            while let Some((i, j)) = stack.pop() {
                let val = values[j * nx + i];
                if val > best_val {
                    best_val = val;
                    best = (i, j);
                }
                let mut push = |i: usize, j: usize, stack: &mut Vec<(usize, usize)>| {
                    let idx = j * nx + i;
                    if labels[idx] == 0 && in_set(i, j) {
                        labels[idx] = label;
                        stack.push((i, j));
                    }
                };
                if i > 0 {
                    push(i - 1, j, &mut stack);
                }
                if i + 1 < nx {
                    push(i + 1, j, &mut stack);
                }
                if j > 0 {
                    push(i, j - 1, &mut stack);
                }
                if j + 1 < ny {
                    push(i, j + 1, &mut stack);
                }
            }
            seeds.push((w.x(best.0), w.y(best.1)));
        }
    }
    Ok(ComponentCount {
        level,
        count: (next - 1) as usize,
        seeds,
        resolution: (nx, ny),
        window: w,
        labels,
    })
}

/// Hausdorff distance between the part of the contour with `x` in the given
/// range and the strip boundary `{y = +-1}` over the same range. `None` when
/// the clipped contour is empty.
pub fn hausdorff_to_strip(contour: &Contour, xmin: f64, xmax: f64) -> Option<f64> {
    let n = contour.len();
    let last = if contour.closed { n } else { n - 1 };
    let mut clipped: Vec<((f64, f64), (f64, f64))> = Vec::new();
    for i in 0..last {
        let a = contour.vertices[i];
        let b = contour.vertices[(i + 1) % n];
        if let Some(seg) = clip_segment_x(a, b, xmin, xmax) {
            clipped.push(seg);
        }
    }
    if clipped.is_empty() {
        return None;
    }
    Some(hausdorff_segments_vs_strip(&clipped, xmin, xmax))
}

fn clip_segment_x(
    a: (f64, f64),
    b: (f64, f64),
    xmin: f64,
    xmax: f64,
) -> Option<((f64, f64), (f64, f64))> {
    let (mut t0, mut t1) = (0.0f64, 1.0f64);
    let dx = b.0 - a.0;
    if dx.abs() < f64::MIN_POSITIVE {
        if a.0 < xmin || a.0 > xmax {
            return None;
        }
    } else {
        let ta = (xmin - a.0) / dx;
        let tb = (xmax - a.0) / dx;
        let (lo, hi) = if ta < tb { (ta, tb) } else { (tb, ta) };
        t0 = t0.max(lo);
        t1 = t1.min(hi);
        if t0 > t1 {
            return None;
        }
    }
    let lerp = |t: f64| (a.0 + t * dx, a.1 + t * (b.1 - a.1));
    Some((lerp(t0), lerp(t1)))
}

fn point_segment_distance(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let t = if len2 > 0.0 {
        (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let (cx, cy) = (a.0 + t * dx, a.1 + t * dy);
    (p.0 - cx).hypot(p.1 - cy)
}

/// Strip-limit measurement on a fixed compact window: the boundary arcs of
/// `{u = 0}` over `[-1.1 xlim, 1.1 xlim] x [-1.8, 1.8]`, as one contour list.
///
/// This stays well defined for epsilons large enough that the superlevel
/// component escapes its enclosure rectangle (no bounded extraction exists)
/// while the boundary near the origin is already strip-like.
pub fn strip_window_arcs<F: ScalarField>(field: &F, xlim: f64) -> Result<Vec<Contour>> {
    let window = GridWindow::new(-1.1 * xlim, 1.1 * xlim, -1.8, 1.8, 512, 512)?;
    extract_from_samples(field, 0.0, &window, 1e-9, &sample_grid(field, &window))
}

/// Hausdorff distance between the level-0 arcs with `|x| <= xlim` and the
/// strip boundary `{y = +-1}` over the same range.
pub fn strip_limit_hausdorff<F: ScalarField>(field: &F, xlim: f64) -> Result<f64> {
    let arcs = strip_window_arcs(field, xlim)?;
    let mut clipped: Vec<((f64, f64), (f64, f64))> = Vec::new();
    for arc in &arcs {
        let n = arc.len();
        let last = if arc.closed { n } else { n - 1 };
        for i in 0..last {
            if let Some(seg) =
                clip_segment_x(arc.vertices[i], arc.vertices[(i + 1) % n], -xlim, xlim)
            {
                clipped.push(seg);
            }
        }
    }
    if clipped.is_empty() {
        return Err(Error::ConstructionFailed(
            "no boundary arcs found in the strip window".into(),
        ));
    }
    Ok(hausdorff_segments_vs_strip(&clipped, -xlim, xlim))
}

fn hausdorff_segments_vs_strip(
    segments: &[((f64, f64), (f64, f64))],
    xmin: f64,
    xmax: f64,
) -> f64 {
    let to_strip = |y: f64| (y - 1.0).abs().min((y + 1.0).abs());
    let mut d_ab = 0.0f64;
    for &(a, b) in segments {
        for t in [0.0, 0.5, 1.0] {
            d_ab = d_ab.max(to_strip(a.1 + t * (b.1 - a.1)));
        }
    }
    let mut d_ba = 0.0f64;
    const M: usize = 1024;
    for sign in [-1.0, 1.0] {
        for m in 0..=M {
            let x = xmin + (xmax - xmin) * m as f64 / M as f64;
            let p = (x, sign);
            let mut dmin = f64::INFINITY;
            for &(a, b) in segments {
                dmin = dmin.min(point_segment_distance(p, a, b));
            }
            d_ba = d_ba.max(dmin);
        }
    }
    d_ab.max(d_ba)
}
