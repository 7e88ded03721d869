//! Shortley-Weller discretization grid on an irregular domain.
//!
//! Interior nodes are the lattice points with positive field value that are
//! 4-connected to the anchor; at nodes adjacent to the boundary the stencil
//! arm is shortened to the exact zero crossing of the field, located by
//! bisection along the grid line (the exact field beats the polygonal
//! contour there). Truncation faces - lattice edges leaving the sampled
//! region while the field is still positive - carry full arms with a
//! Dirichlet value supplied by the caller, which lets rectangle-truncated
//! model problems (the strip) impose exact side conditions.

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::geometry::domain::Mask;

/// One stencil arm of an interior node.
#[derive(Debug, Clone, Copy)]
pub enum Neighbor {
    /// Another interior node, full spacing away.
    Interior(usize),
    /// Dirichlet point at `frac * spacing` along the arm.
    Boundary { frac: f64, point: (f64, f64) },
}

/// Directions are indexed E, W, N, S.
#[derive(Debug, Clone)]
pub struct IrregularGrid {
    pub spacing: f64,
    pub x0: f64,
    pub y0: f64,
    pub nx: usize,
    pub ny: usize,
    /// Coordinates of interior nodes, row-major discovery order.
    pub coords: Vec<(f64, f64)>,
    /// Lattice indices of interior nodes.
    pub lattice: Vec<(usize, usize)>,
    pub neighbors: Vec<[Neighbor; 4]>,
}

impl IrregularGrid {
    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }
}

/// Build the grid for the domain mask at the given spacing.
///
/// The lattice covers the mask bounding box plus a two-cell margin; the
/// spacing must resolve the domain with at least 16 nodes across the
/// smaller bounding-box dimension.
pub fn build_grid<F: ScalarField>(
    field: &F,
    mask: &Mask,
    spacing: f64,
) -> Result<IrregularGrid> {
    if !(spacing > 0.0) {
        return Err(Error::InvalidConfig("spacing must be positive".into()));
    }
    let bbox = mask
        .bbox()
        .ok_or_else(|| Error::ConstructionFailed("empty domain mask".into()))?;
    let min_dim = (bbox.xmax - bbox.xmin).min(bbox.ymax - bbox.ymin);
    if min_dim / spacing < 16.0 {
        return Err(Error::Resolution(format!(
            "spacing {spacing} leaves fewer than 16 nodes across the domain width {min_dim}"
        )));
    }
    let x0 = bbox.xmin - 2.0 * spacing;
    let y0 = bbox.ymin - 2.0 * spacing;
    let nx = ((bbox.xmax + 2.0 * spacing - x0) / spacing).ceil() as usize + 1;
    let ny = ((bbox.ymax + 2.0 * spacing - y0) / spacing).ceil() as usize + 1;

    let coord = |i: usize, j: usize| (x0 + spacing * i as f64, y0 + spacing * j as f64);
    let mut positive = vec![false; nx * ny];
    for j in 0..ny {
        for i in 0..nx {
            let (x, y) = coord(i, j);
            positive[j * nx + i] = field.value(x, y) > 0.0;
        }
    }

    // flood the anchor component on the lattice
    let anchor = field.anchor();
    let ai = (((anchor.0 - x0) / spacing).round() as isize).clamp(0, nx as isize - 1) as usize;
    let aj = (((anchor.1 - y0) / spacing).round() as isize).clamp(0, ny as isize - 1) as usize;
    if !positive[aj * nx + ai] {
        return Err(Error::ConstructionFailed(
            "anchor node is not in the superlevel set".into(),
        ));
    }
    let mut interior = vec![false; nx * ny];
    let mut stack = vec![(ai, aj)];
    interior[aj * nx + ai] = true;
    while let Some((i, j)) = stack.pop() {
        let mut push = |i: usize, j: usize, stack: &mut Vec<(usize, usize)>| {
            let idx = j * nx + i;
            if !interior[idx] && positive[idx] {
                interior[idx] = true;
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

    let mut index = vec![usize::MAX; nx * ny];
    let mut coords = Vec::new();
    let mut lattice = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            if interior[j * nx + i] {
                index[j * nx + i] = coords.len();
                coords.push(coord(i, j));
                lattice.push((i, j));
            }
        }
    }

    let dirs: [(isize, isize); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];
    let mut neighbors = Vec::with_capacity(coords.len());
    for (&(i, j), &(x, y)) in lattice.iter().zip(&coords) {
        let mut arms = [Neighbor::Interior(usize::MAX); 4];
        for (d, &(di, dj)) in dirs.iter().enumerate() {
            let ni = i as isize + di;
            let nj = j as isize + dj;
            let in_lattice = ni >= 0 && nj >= 0 && (ni as usize) < nx && (nj as usize) < ny;
            let target = (
                x + spacing * di as f64,
                y + spacing * dj as f64,
            );
            if in_lattice {
                let nidx = nj as usize * nx + ni as usize;
                if interior[nidx] {
                    arms[d] = Neighbor::Interior(index[nidx]);
                    continue;
                }
                if positive[nidx] {
                    return Err(Error::Resolution(format!(
                        "node ({x}, {y}) is adjacent to a disconnected superlevel node; \
                         refine the spacing"
                    )));
                }
                let (frac, point) = arm_by_bisection(field, (x, y), target, spacing);
                arms[d] = Neighbor::Boundary { frac, point };
            } else if field.value(target.0, target.1) > 0.0 {
                // truncation face: full arm, Dirichlet value from the caller
                arms[d] = Neighbor::Boundary {
                    frac: 1.0,
                    point: target,
                };
            } else {
                let (frac, point) = arm_by_bisection(field, (x, y), target, spacing);
                arms[d] = Neighbor::Boundary { frac, point };
            }
        }
        neighbors.push(arms);
    }

    Ok(IrregularGrid {
        spacing,
        x0,
        y0,
        nx,
        ny,
        coords,
        lattice,
        neighbors,
    })
}

/// Zero crossing of the field on the segment from an interior node (value
/// positive) to its exterior neighbor, to |u| <= 1e-12.
fn arm_by_bisection<F: ScalarField>(
    field: &F,
    from: (f64, f64),
    to: (f64, f64),
    _spacing: f64,
) -> (f64, (f64, f64)) {
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    let point_at = |t: f64| (from.0 + t * (to.0 - from.0), from.1 + t * (to.1 - from.1));
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        let p = point_at(mid);
        let v = field.value(p.0, p.1);
        if v.abs() <= 1e-12 {
            return (mid.max(f64::MIN_POSITIVE), p);
        }
        if v > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // hi is on the nonpositive side; after 80 halvings it is the crossing
    // to machine precision
    (hi, point_at(hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{RadialField, StripField};
    use crate::geometry::contour::GridWindow;

    #[test]
    fn disk_node_count_matches_area() {
        let disk = RadialField { radius: 1.0 };
        let window = GridWindow::new(-1.1, 1.1, -1.1, 1.1, 128, 128).unwrap();
        let mask = Mask::flood_from(&disk, window, (0.0, 0.0), 0.0).unwrap();
        let grid = build_grid(&disk, &mask, 1.0 / 64.0).unwrap();
        // pi * 64^2 = 12868 +- 2%
        let expect = std::f64::consts::PI * 64.0 * 64.0;
        assert!(
            (grid.len() as f64 - expect).abs() <= 0.02 * expect,
            "node count {} vs {expect}",
            grid.len()
        );
    }

    #[test]
    fn strip_arms_hit_the_exact_boundary()  {
        let window = GridWindow::new(-1.0, 1.0, -1.2, 1.2, 64, 64).unwrap();
        let mask = Mask::sample(&StripField, window, 0.0);
        let h = 1.0 / 16.0;
        let grid = build_grid(&StripField, &mask, h).unwrap();
        let mut checked = 0;
        for (n, arms) in grid.neighbors.iter().enumerate() {
            let (_, y) = grid.coords[n];
            for (d, arm) in arms.iter().enumerate() {
                if let Neighbor::Boundary { frac, point } = arm {
                    if d >= 2 {
                        // vertical arm: distance to the line y = +-1
                        let exact = ((1.0 - y.abs()) / h).min(1.0);
                        assert!(
                            (frac - exact).abs() <= 1e-10,
                            "arm {frac} vs exact {exact} at y = {y}"
                        );
                        assert!((point.1.abs() - 1.0).abs() <= 1e-10);
                        checked += 1;
                    } else {
                        // horizontal truncation face: full arm
                        assert_eq!(*frac, 1.0);
                    }
                }
            }
        }
        assert!(checked > 0);
    }

    #[test]
    fn all_arms_in_unit_interval() {
        let disk = RadialField { radius: 1.0 };
        let window = GridWindow::new(-1.1, 1.1, -1.1, 1.1, 64, 64).unwrap();
        let mask = Mask::flood_from(&disk, window, (0.0, 0.0), 0.0).unwrap();
        let grid = build_grid(&disk, &mask, 1.0 / 32.0).unwrap();
        for arms in &grid.neighbors {
            for arm in arms {
                if let Neighbor::Boundary { frac, .. } = arm {
                    assert!(*frac > 0.0 && *frac <= 1.0);
                }
            }
        }
    }

    #[test]
    fn too_coarse_spacing_is_rejected() {
        let disk = RadialField { radius: 1.0 };
        let window = GridWindow::new(-1.1, 1.1, -1.1, 1.1, 64, 64).unwrap();
        let mask = Mask::flood_from(&disk, window, (0.0, 0.0), 0.0).unwrap();
        assert!(matches!(
            build_grid(&disk, &mask, 0.2),
            Err(Error::Resolution(_))
        ));
    }
}
