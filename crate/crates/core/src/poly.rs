//! Monic real polynomials built from their roots, evaluated by complex Horner.
//!
//! The perturbation underlying the whole construction is the real part of
//! `-prod (z - x_i)`; everything downstream only ever needs the coefficient
//! list of the monic product and its first two derivatives.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Coefficients of the monic product `prod_i (z - x_i)`, lowest degree first.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyCoeffs {
    a: Vec<f64>,
}

impl PolyCoeffs {
    /// Expand `prod (z - x_i)` by iterated convolution with the binomials.
    ///
    /// O(n^2) and exact in f64 for the moderate degrees supported here
    /// (n <= 40). Roots must be strictly increasing.
    pub fn from_roots(roots: &[f64]) -> Result<Self> {
        if roots.is_empty() {
            return Err(Error::InvalidConfig("at least one root required".into()));
        }
        if roots.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig(
                "roots must be strictly increasing".into(),
            ));
        }
        let mut a = Vec::with_capacity(roots.len() + 1);
        a.push(1.0);
        for &r in roots {
            // multiply by (z - r): new[i] = a[i-1] - r * a[i]
            a.push(0.0);
            for i in (1..a.len()).rev() {
                a[i] = a[i - 1] - r * a[i];
            }
            a[0] *= -r;
        }
        Ok(Self { a })
    }

    /// Raw coefficient access, `a[i]` multiplying `z^i`.
    pub fn coeffs(&self) -> &[f64] {
        &self.a
    }

    pub fn degree(&self) -> usize {
        self.a.len() - 1
    }

    /// Horner evaluation at a complex point.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for &c in self.a.iter().rev() {
            acc = acc * z + c;
        }
        acc
    }

    /// Horner evaluation restricted to the real line.
    pub fn eval_real(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for &c in self.a.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    /// Coefficient list of the derivative.
    pub fn derivative(&self) -> PolyCoeffs {
        let a = if self.a.len() <= 1 {
            vec![0.0]
        } else {
            self.a
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| i as f64 * c)
                .collect()
        };
        PolyCoeffs { a }
    }
}
