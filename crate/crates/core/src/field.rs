//! Exact evaluation of the perturbed torsion field, its derivatives, the
//! level-curve curvature, and the closed-form asymptotic predictions.
//!
//! The field is `u(x,y) = 1/2 - y^2/2 + eps*(y^3 - 3x^2 y) + eps^alpha * v(x,y)`
//! with `v = Re(-prod (z - x_i))` harmonic, so `-Laplace(u) = 1` identically.
//! All derivatives of `v` come from complex Horner evaluation of the first two
//! derivative polynomials together with the Cauchy-Riemann relations; nothing
//! is ever expanded as a bivariate polynomial.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly::PolyCoeffs;

/// A twice-differentiable scalar field on the plane.
///
/// `anchor` is a point with strictly positive value, used to seed flood
/// fills and domain extraction.
pub trait ScalarField: Sync {
    fn value(&self, x: f64, y: f64) -> f64;
    /// `(u_x, u_y)`
    fn gradient(&self, x: f64, y: f64) -> (f64, f64);
    /// `(u_xx, u_xy, u_yy)`
    fn hessian(&self, x: f64, y: f64) -> (f64, f64, f64);
    fn anchor(&self) -> (f64, f64);
}

/// Construction parameters: peak count `k`, the `2k` strictly increasing real
/// roots, the perturbation size `epsilon`, the exponent `alpha` in (1,2), and
/// the rectangle margin `h` in (0,1).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RootConfig {
    pub k: usize,
    pub roots: Vec<f64>,
    pub epsilon: f64,
    pub alpha: f64,
    pub h: f64,
}

impl RootConfig {
    pub fn new(roots: Vec<f64>, epsilon: f64) -> Result<Self> {
        let cfg = Self {
            k: roots.len() / 2,
            roots,
            epsilon,
            alpha: 1.5,
            h: 0.5,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Canonical root pattern `+-1, +-3, ..., +-(2k-1)`.
    pub fn canonical(k: usize, epsilon: f64) -> Result<Self> {
        let roots = canonical_roots(k);
        Self::new(roots, epsilon)
    }

    pub fn with_alpha(mut self, alpha: f64) -> Result<Self> {
        self.alpha = alpha;
        self.validate()?;
        Ok(self)
    }

    pub fn with_margin(mut self, h: f64) -> Result<Self> {
        self.h = h;
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        if self.roots.len() < 4 || self.roots.len() % 2 != 0 {
            return Err(Error::InvalidConfig(format!(
                "need an even number of roots, at least 4 (got {})",
                self.roots.len()
            )));
        }
        if self.k != self.roots.len() / 2 {
            return Err(Error::InvalidConfig(format!(
                "k = {} does not match {} roots",
                self.k,
                self.roots.len()
            )));
        }
        if self.roots.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig(
                "roots must be strictly increasing".into(),
            ));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "epsilon must be positive (got {})",
                self.epsilon
            )));
        }
        if !(self.alpha > 1.0 && self.alpha < 2.0) {
            return Err(Error::InvalidConfig(format!(
                "alpha must lie in (1, 2) (got {})",
                self.alpha
            )));
        }
        if !(self.h > 0.0 && self.h < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "margin h must lie in (0, 1) (got {})",
                self.h
            )));
        }
        Ok(())
    }
}

/// `+-(2j-1)` for j = 1..k, sorted.
pub fn canonical_roots(k: usize) -> Vec<f64> {
    let mut roots: Vec<f64> = (1..=k)
        .flat_map(|j| {
            let r = (2 * j - 1) as f64;
            [-r, r]
        })
        .collect();
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    roots
}

/// Evaluator bundle for the field and its exact derivatives.
#[derive(Debug, Clone)]
pub struct ImplicitField {
    config: RootConfig,
    coeffs: PolyCoeffs,
    d1: PolyCoeffs,
    d2: PolyCoeffs,
    eps_alpha: f64,
}

impl ImplicitField {
    pub fn new(config: RootConfig) -> Result<Self> {
        config.validate()?;
        let coeffs = PolyCoeffs::from_roots(&config.roots)?;
        let d1 = coeffs.derivative();
        let d2 = d1.derivative();
        let eps_alpha = config.epsilon.powf(config.alpha);
        Ok(Self {
            config,
            coeffs,
            d1,
            d2,
            eps_alpha,
        })
    }

    pub fn config(&self) -> &RootConfig {
        &self.config
    }

    pub fn coeffs(&self) -> &PolyCoeffs {
        &self.coeffs
    }

    /// `epsilon^alpha`, precomputed once so identities hold bitwise.
    pub fn eps_alpha(&self) -> f64 {
        self.eps_alpha
    }

    /// The harmonic perturbation `v(x,y) = Re(-prod(z - x_i))`.
    pub fn eval_v(&self, x: f64, y: f64) -> f64 {
        -self.coeffs.eval(Complex64::new(x, y)).re
    }

    /// `v` and its derivatives through second order, via Cauchy-Riemann:
    /// with `p = prod(z - x_i)` and `v = Re(-p)`,
    /// `v_x = -Re p'`, `v_y = Im p'`, `v_xx = -Re p''`, `v_xy = Im p''`,
    /// `v_yy = -v_xx`.
    fn v_derivs(&self, x: f64, y: f64) -> VDerivs {
        let z = Complex64::new(x, y);
        let p1 = self.d1.eval(z);
        let p2 = self.d2.eval(z);
        VDerivs {
            vx: -p1.re,
            vy: p1.im,
            vxx: -p2.re,
            vxy: p2.im,
        }
    }
}

struct VDerivs {
    vx: f64,
    vy: f64,
    vxx: f64,
    vxy: f64,
}

impl ScalarField for ImplicitField {
    fn value(&self, x: f64, y: f64) -> f64 {
        let cubic = y * y * y - 3.0 * x * x * y;
        0.5 - 0.5 * y * y + self.config.epsilon * cubic + self.eps_alpha * self.eval_v(x, y)
    }

    fn gradient(&self, x: f64, y: f64) -> (f64, f64) {
        let eps = self.config.epsilon;
        let v = self.v_derivs(x, y);
        let ux = -6.0 * eps * x * y + self.eps_alpha * v.vx;
        let uy = -y + 3.0 * eps * (y * y - x * x) + self.eps_alpha * v.vy;
        (ux, uy)
    }

    fn hessian(&self, x: f64, y: f64) -> (f64, f64, f64) {
        let eps = self.config.epsilon;
        let v = self.v_derivs(x, y);
        let uxx = -6.0 * eps * y + self.eps_alpha * v.vxx;
        let uxy = -6.0 * eps * x + self.eps_alpha * v.vxy;
        // v_yy = -v_xx keeps the trace identity exact in floating point
        let uyy = -1.0 + 6.0 * eps * y - self.eps_alpha * v.vxx;
        (uxx, uxy, uyy)
    }

    fn anchor(&self) -> (f64, f64) {
        (self.config.roots[0], 0.0)
    }
}

/// Torsion solution of the disk of given radius: `u = (R^2 - x^2 - y^2)/4`.
#[derive(Debug, Clone, Copy)]
pub struct RadialField {
    pub radius: f64,
}

impl ScalarField for RadialField {
    fn value(&self, x: f64, y: f64) -> f64 {
        0.25 * (self.radius * self.radius - x * x - y * y)
    }
    fn gradient(&self, x: f64, y: f64) -> (f64, f64) {
        (-0.5 * x, -0.5 * y)
    }
    fn hessian(&self, _x: f64, _y: f64) -> (f64, f64, f64) {
        (-0.5, 0.0, -0.5)
    }
    fn anchor(&self) -> (f64, f64) {
        (0.0, 0.0)
    }
}

/// The epsilon -> 0 limit: torsion solution of the strip `|y| < 1`.
#[derive(Debug, Clone, Copy)]
pub struct StripField;

impl ScalarField for StripField {
    fn value(&self, _x: f64, y: f64) -> f64 {
        0.5 - 0.5 * y * y
    }
    fn gradient(&self, _x: f64, y: f64) -> (f64, f64) {
        (0.0, -y)
    }
    fn hessian(&self, _x: f64, _y: f64) -> (f64, f64, f64) {
        (0.0, 0.0, -1.0)
    }
    fn anchor(&self) -> (f64, f64) {
        (0.0, 0.0)
    }
}

/// Oriented curvature of the level curve of `u` through `(x, y)`:
/// `-(u_xx u_y^2 - 2 u_xy u_x u_y + u_yy u_x^2) / |grad u|^3`,
/// positive where the superlevel side is locally convex.
///
/// Undefined at critical points; the gradient tolerance is
/// `1e-10 * (1 + |grad u|)`.
pub fn curvature<F: ScalarField + ?Sized>(field: &F, x: f64, y: f64) -> Result<f64> {
    let (ux, uy) = field.gradient(x, y);
    let g2 = ux * ux + uy * uy;
    let gnorm = g2.sqrt();
    if gnorm <= 1e-10 * (1.0 + gnorm) {
        return Err(Error::DegenerateGradient { x, y, grad_norm: gnorm });
    }
    let (uxx, uxy, uyy) = field.hessian(x, y);
    let num = uxx * uy * uy - 2.0 * uxy * ux * uy + uyy * ux * ux;
    Ok(-num / (g2 * gnorm))
}

/// Starshapedness integrand `(x - cx) u_x + y u_y` with respect to the
/// center `(cx, 0)`.
pub fn radial_derivative<F: ScalarField + ?Sized>(field: &F, center_x: f64, x: f64, y: f64) -> f64 {
    let (ux, uy) = field.gradient(x, y);
    (x - center_x) * ux + y * uy
}

/// Axis-aligned rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Rect {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
}

/// Closed-form quantities the construction promises for small epsilon:
/// the enclosure abscissa, the enclosing rectangle, the predicted
/// curvature-zero abscissae and the epsilon threshold for the root segment.
#[derive(Debug, Clone, Serialize)]
pub struct AsymptoticPrediction {
    /// `x_enc = (3 / eps^alpha)^(1/2k)`
    pub x_enclosure: f64,
    /// `[-x_enc, x_enc] x [-(1+h), 1+h]`
    pub rect: Rect,
    pub zeta_minus: f64,
    /// `(3 / (k (2k-1) eps^(alpha-1)))^(1/(2k-2))`
    pub zeta_plus: f64,
    /// `(1 / (2 sup_[x1,x2k] (-f)))^(1/alpha)`; below this threshold the whole
    /// root segment lies in the extracted domain.
    pub eps_bound: f64,
    /// `sup_[x1,x2k] (-f)` and its abscissa, as located by the sampler.
    pub sup_neg_f: f64,
    pub sup_neg_f_at: f64,
}

/// Evaluate the predictions for a configuration.
pub fn predictions(config: &RootConfig) -> Result<AsymptoticPrediction> {
    config.validate()?;
    let coeffs = PolyCoeffs::from_roots(&config.roots)?;
    let k = config.k as f64;
    let two_k = 2.0 * k;
    let x_enclosure = (3.0 / config.epsilon.powf(config.alpha)).powf(1.0 / two_k);
    let zeta_plus = (3.0 / (k * (two_k - 1.0) * config.epsilon.powf(config.alpha - 1.0)))
        .powf(1.0 / (two_k - 2.0));
    let (sup, at) = sup_neg_f(
        &coeffs,
        config.roots[0],
        *config.roots.last().expect("nonempty roots"),
    );
    let eps_bound = (1.0 / (2.0 * sup)).powf(1.0 / config.alpha);
    let half_height = 1.0 + config.h;
    Ok(AsymptoticPrediction {
        x_enclosure,
        rect: Rect {
            xmin: -x_enclosure,
            xmax: x_enclosure,
            ymin: -half_height,
            ymax: half_height,
        },
        zeta_minus: -zeta_plus,
        zeta_plus,
        eps_bound,
        sup_neg_f: sup,
        sup_neg_f_at: at,
    })
}

/// Maximum of `-f = p` on `[a, b]` where `f` is the real restriction of the
/// perturbation: dense sampling (4096 points) followed by golden-section
/// refinement inside the bracketing sample interval.
pub fn sup_neg_f(coeffs: &PolyCoeffs, a: f64, b: f64) -> (f64, f64) {
    let g = |x: f64| coeffs.eval_real(x); // -f
    const N: usize = 4096;
    let mut best_i = 0;
    let mut best = f64::NEG_INFINITY;
    for i in 0..=N {
        let x = a + (b - a) * (i as f64) / (N as f64);
        let val = g(x);
        if val > best {
            best = val;
            best_i = i;
        }
    }
    let step = (b - a) / (N as f64);
    let lo = (a + step * (best_i as f64) - step).max(a);
    let hi = (a + step * (best_i as f64) + step).min(b);
    let (x, val) = golden_max(&g, lo, hi);
    if val > best {
        (val, x)
    } else {
        (best, a + step * best_i as f64)
    }
}

fn golden_max(g: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = g(x1);
    let mut f2 = g(x2);
    for _ in 0..80 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = g(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = g(x1);
        }
        if (hi - lo).abs() < 1e-13 * (1.0 + lo.abs() + hi.abs()) {
            break;
        }
    }
    let xm = 0.5 * (lo + hi);
    (xm, g(xm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn canonical_field() -> ImplicitField {
        let cfg = RootConfig::new(vec![-2.0, -1.0, 1.0, 2.0], 0.01).unwrap();
        ImplicitField::new(cfg).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(RootConfig::new(vec![-1.0, 1.0], 0.01).is_err()); // k = 1
        assert!(RootConfig::new(vec![-2.0, -1.0, 1.0, 2.0], 0.0).is_err());
        assert!(RootConfig::new(vec![-2.0, -1.0, 1.0, 2.0], 0.01)
            .unwrap()
            .with_alpha(2.0)
            .is_err());
        assert!(RootConfig::new(vec![-2.0, -1.0, 1.0, 2.0], 0.01)
            .unwrap()
            .with_margin(1.0)
            .is_err());
        assert_eq!(canonical_roots(2), vec![-3.0, -1.0, 1.0, 3.0]);
    }

    #[test]
    fn v_vanishes_at_roots_and_matches_hand_values() {
        let field = canonical_field();
        for &r in &field.config().roots.clone() {
            assert_eq!(field.eval_v(r, 0.0), 0.0);
        }
        // F(0) = -prod(-x_i) = -4
        assert_eq!(field.eval_v(0.0, 0.0), -4.0);
    }

    #[test]
    fn degree_two_case_matches_closed_form() {
        // v = Re(1 - z^2) = 1 - x^2 + y^2 for roots (-1, 1)
        let p = PolyCoeffs::from_roots(&[-1.0, 1.0]).unwrap();
        let v = |x: f64, y: f64| -p.eval(Complex64::new(x, y)).re;
        assert_eq!(v(2.0, 1.0), -2.0);
        assert_eq!(v(0.0, 0.0), 1.0);
    }

    #[test]
    fn u_is_half_at_roots() {
        let field = canonical_field();
        for &r in &field.config().roots.clone() {
            assert_eq!(field.value(r, 0.0), 0.5);
        }
    }

    #[test]
    fn u_at_origin_plugs_in() {
        // eps = 0.01, alpha = 3/2: u(0,0) = 1/2 - 0.001 * 4 = 0.496
        let field = canonical_field();
        assert!((field.value(0.0, 0.0) - 0.496).abs() < 1e-15);
    }

    #[test]
    fn restriction_identity_is_bitwise() {
        let field = canonical_field();
        let ea = field.eps_alpha();
        for i in 0..200 {
            let x = -6.0 + 12.0 * (i as f64) / 199.0;
            assert_eq!(field.value(x, 0.0), 0.5 + ea * field.eval_v(x, 0.0));
        }
    }

    #[test]
    fn strip_limit_derivatives() {
        let s = StripField;
        assert_eq!(s.gradient(3.0, 0.7), (0.0, -0.7));
        assert_eq!(s.hessian(3.0, 0.7), (0.0, 0.0, -1.0));
    }

    #[test]
    fn laplacian_is_minus_one_at_random_points() {
        let field = canonical_field();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let x = rng.gen_range(-50.0..50.0);
            let y = rng.gen_range(-50.0..50.0);
            let (uxx, _, uyy) = field.hessian(x, y);
            let scale = uxx.abs().max(uyy.abs()).max(1.0);
            assert!(
                (uxx + uyy + 1.0).abs() <= 1e-9 * scale,
                "Laplacian off at ({x}, {y}): {}",
                uxx + uyy
            );
        }
    }

    #[test]
    fn gradient_and_hessian_match_finite_differences() {
        let field = canonical_field();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let step = 1e-5;
        for _ in 0..100 {
            let x = rng.gen_range(-8.0..8.0);
            let y = rng.gen_range(-3.0..3.0);
            let (ux, uy) = field.gradient(x, y);
            let fdx = (field.value(x + step, y) - field.value(x - step, y)) / (2.0 * step);
            let fdy = (field.value(x, y + step) - field.value(x, y - step)) / (2.0 * step);
            let gscale = ux.abs().max(uy.abs()).max(1.0);
            assert!((ux - fdx).abs() <= 1e-6 * gscale, "ux {ux} vs fd {fdx}");
            assert!((uy - fdy).abs() <= 1e-6 * gscale, "uy {uy} vs fd {fdy}");

            let (uxx, uxy, uyy) = field.hessian(x, y);
            let (gxp, _) = field.gradient(x + step, y);
            let (gxm, _) = field.gradient(x - step, y);
            let (gxy_p, gyp) = field.gradient(x, y + step);
            let (gxy_m, gym) = field.gradient(x, y - step);
            let hscale = uxx.abs().max(uyy.abs()).max(1.0);
            assert!(((gxp - gxm) / (2.0 * step) - uxx).abs() <= 1e-6 * hscale);
            assert!(((gyp - gym) / (2.0 * step) - uyy).abs() <= 1e-6 * hscale);
            assert!(((gxy_p - gxy_m) / (2.0 * step) - uxy).abs() <= 1e-6 * hscale.max(uxy.abs()));
        }
    }

    #[test]
    fn symmetric_roots_give_even_field() {
        let field = canonical_field();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..200 {
            let x = rng.gen_range(-5.0..5.0);
            let y = rng.gen_range(-2.0..2.0);
            let scale = 1.0 + field.eval_v(x, y).abs();
            assert!((field.eval_v(x, y) - field.eval_v(-x, y)).abs() <= 1e-12 * scale);
            let uscale = 1.0 + field.value(x, y).abs();
            assert!((field.value(x, y) - field.value(-x, y)).abs() <= 1e-12 * uscale);
        }
    }

    #[test]
    fn curvature_is_one_on_unit_circle() {
        let disk = RadialField { radius: 1.0 };
        for i in 0..64 {
            let t = 2.0 * std::f64::consts::PI * (i as f64) / 64.0;
            let kappa = curvature(&disk, t.cos(), t.sin()).unwrap();
            assert!((kappa - 1.0).abs() <= 1e-12, "kappa = {kappa}");
        }
    }

    #[test]
    fn curvature_vanishes_on_strip_level_lines() {
        let s = StripField;
        for &y in &[-1.5, -1.0, -0.3, 0.4, 1.0, 1.7] {
            let kappa = curvature(&s, 2.0, y).unwrap();
            assert_eq!(kappa, 0.0);
        }
    }

    #[test]
    fn curvature_rejects_degenerate_gradient() {
        let s = StripField;
        assert!(matches!(
            curvature(&s, 0.0, 0.0),
            Err(Error::DegenerateGradient { .. })
        ));
    }

    #[test]
    fn radial_derivative_examples() {
        let field = canonical_field();
        let x1 = field.config().roots[0];
        assert_eq!(radial_derivative(&field, x1, x1, 0.0), 0.0);
        let s = StripField;
        assert_eq!(radial_derivative(&s, 0.0, 3.0, 1.0), -1.0);
        assert_eq!(radial_derivative(&s, 0.0, -2.0, -1.0), -1.0);
    }

    #[test]
    fn prediction_closed_forms() {
        let cfg = RootConfig::new(vec![-2.0, -1.0, 1.0, 2.0], 0.01).unwrap();
        let pred = predictions(&cfg).unwrap();
        assert!((pred.x_enclosure - 3000f64.powf(0.25)).abs() < 1e-12);
        assert!((pred.x_enclosure - 7.400828044922853).abs() < 1e-10);

        let cfg4 = RootConfig::new(vec![-2.0, -1.0, 1.0, 2.0], 1e-4).unwrap();
        let pred4 = predictions(&cfg4).unwrap();
        assert!((pred4.zeta_plus - 50f64.sqrt()).abs() < 1e-10);
        assert_eq!(pred4.zeta_minus, -pred4.zeta_plus);

        // sup(-f) = 4 at x = 0, eps_bound = (1/8)^(2/3) = 0.25
        assert!((pred.sup_neg_f - 4.0).abs() < 1e-10);
        assert!(pred.sup_neg_f_at.abs() < 1e-5);
        assert!((pred.eps_bound - 0.25).abs() < 1e-10);
    }

    #[test]
    fn curvature_negative_at_bottom_boundary_point() {
        // At (0, beta) on the lower boundary the curvature is ~ -6 eps.
        let cfg = RootConfig::new(vec![-2.0, -1.0, 1.0, 2.0], 1e-3).unwrap();
        let field = ImplicitField::new(cfg).unwrap();
        // locate beta: u(0, y) = 0 near y = -1
        let mut lo = -1.2;
        let mut hi = -0.8;
        assert!(field.value(0.0, lo) < 0.0 && field.value(0.0, hi) > 0.0);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if field.value(0.0, mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let beta = 0.5 * (lo + hi);
        let kappa = curvature(&field, 0.0, beta).unwrap();
        assert!(kappa < 0.0, "kappa = {kappa}");
        assert!(
            (kappa + 6.0 * field.config().epsilon).abs() < 3.0 * field.config().epsilon,
            "kappa = {kappa}, expected about {}",
            -6.0 * field.config().epsilon
        );
    }
}
