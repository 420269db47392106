//! Roots of the characteristic polynomial `β^{2q}(Q(β) - E²) = 0`, sorted by
//! modulus.
//!
//! Roots come from Aberth–Ehrlich simultaneous iteration started on circles
//! read off the Newton polygon of the coefficients, followed by one Newton
//! polish per root.

use std::cmp::Ordering;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::{q_polynomial, LatticeModel, C64};

const MAX_ITERATIONS: usize = 200;
const EPS: f64 = f64::EPSILON;

/// Coefficients of the degree-`4q` polynomial in `β`, lowest power first.
pub fn char_poly_coeffs(model: &LatticeModel, energy: C64) -> Vec<C64> {
    let mut coeffs = q_polynomial(model).coeffs().to_vec();
    coeffs[2 * model.range()] -= energy * energy;
    coeffs
}

/// `p(z)` and `p'(z)` by Horner's rule, coefficients lowest power first.
fn horner(coeffs: &[C64], z: C64) -> (C64, C64) {
    let mut p = C64::new(0.0, 0.0);
    let mut dp = C64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// Backward error `|p(z)| / Σ|c_j||z|^j`.
pub fn backward_error(coeffs: &[C64], z: C64) -> f64 {
    let (p, _) = horner(coeffs, z);
    let r = z.norm();
    let scale = coeffs.iter().rev().fold(0.0, |acc, c| acc * r + c.norm());
    if scale == 0.0 {
        0.0
    } else {
        p.norm() / scale
    }
}

/// Starting points spread over circles whose radii come from the upper
/// convex hull of `(j, ln|c_j|)`. Handles roots spread over many decades.
fn initial_guesses(coeffs: &[C64]) -> Vec<C64> {
    let n = coeffs.len() - 1;
    let pts: Vec<(usize, f64)> = coeffs
        .iter()
        .enumerate()
        .filter(|(_, c)| c.norm() > 0.0)
        .map(|(j, c)| (j, c.norm().ln()))
        .collect();
    let mut hull: Vec<(usize, f64)> = Vec::new();
    for &p in &pts {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (b.0 as f64 - a.0 as f64) * (p.1 - a.1) - (b.1 - a.1) * (p.0 as f64 - a.0 as f64);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    let mut out = Vec::with_capacity(n);
    for w in hull.windows(2) {
        let (i, li) = w[0];
        let (k, lk) = w[1];
        let count = k - i;
        let radius = ((li - lk) / count as f64).exp();
        for m in 0..count {
            let angle = 2.0 * PI * m as f64 / count as f64 + 2.0 * PI * i as f64 / n as f64 + 0.4;
            out.push(C64::from_polar(radius, angle));
        }
    }
    out
}

/// All roots of a polynomial with nonzero leading and constant coefficients.
///
/// Returns `NonConvergence` if the iteration cap is hit before every root
/// reaches machine-level backward error.
pub fn aberth_roots(coeffs: &[C64]) -> Result<Vec<C64>> {
    let n = coeffs.len().saturating_sub(1);
    if n == 0 {
        return Ok(Vec::new());
    }
    if n == 1 {
        return Ok(vec![-coeffs[0] / coeffs[1]]);
    }
    let mut z = initial_guesses(coeffs);
    let mut done = vec![false; n];
    let mut converged = false;
    for _ in 0..MAX_ITERATIONS {
        for i in 0..n {
            if done[i] {
                continue;
            }
            let (p, dp) = horner(coeffs, z[i]);
            if p.norm() == 0.0 {
                done[i] = true;
                continue;
            }
            let ratio = p / dp;
            let mut repulsion = C64::new(0.0, 0.0);
            for j in 0..n {
                if j != i {
                    let diff = z[i] - z[j];
                    if diff.norm() > 0.0 {
                        repulsion += diff.inv();
                    }
                }
            }
            let step = ratio / (C64::new(1.0, 0.0) - ratio * repulsion);
            if !step.is_finite() {
                let kick = C64::from_polar(EPS.sqrt() * (1.0 + z[i].norm()), i as f64);
                z[i] += kick;
                continue;
            }
            z[i] -= step;
            if step.norm() <= 4.0 * EPS * z[i].norm() || backward_error(coeffs, z[i]) <= 4.0 * EPS {
                done[i] = true;
            }
        }
        if done.iter().all(|&d| d) {
            converged = true;
            break;
        }
    }
    if !converged && z.iter().any(|&r| backward_error(coeffs, r) > 1e-12) {
        return Err(Error::NonConvergence {
            iterations: MAX_ITERATIONS,
        });
    }
    for r in z.iter_mut() {
        let (p, dp) = horner(coeffs, *r);
        if dp.norm() > 0.0 {
            let candidate = *r - p / dp;
            if candidate.is_finite() && backward_error(coeffs, candidate) < backward_error(coeffs, *r) {
                *r = candidate;
            }
        }
    }
    Ok(z)
}

fn modulus_order(a: &C64, b: &C64) -> Ordering {
    a.norm().total_cmp(&b.norm()).then_with(|| a.arg().total_cmp(&b.arg()))
}

/// Roots of the characteristic polynomial at one energy.
#[derive(Debug, Clone, PartialEq)]
pub struct RootSet {
    pub energy: C64,
    /// Finite roots, ascending modulus, ties by ascending phase.
    pub roots: Vec<C64>,
    /// Backward error of each root.
    pub residuals: Vec<f64>,
    /// Roots lost at infinity because the top coefficients vanish exactly.
    pub infinite: usize,
}

impl RootSet {
    /// Nominal degree, finite plus infinite roots.
    pub fn degree(&self) -> usize {
        self.roots.len() + self.infinite
    }

    /// `|β_i|` for the 1-based position `i`; infinite roots sit at the top.
    pub fn modulus(&self, i: usize) -> f64 {
        match self.roots.get(i - 1) {
            Some(r) => r.norm(),
            None => f64::INFINITY,
        }
    }

    /// The root at 1-based position `i`, `None` if it lies at infinity.
    pub fn root(&self, i: usize) -> Option<C64> {
        self.roots.get(i - 1).copied()
    }
}

/// Sorted roots of `β^{2q}(Q(β) - E²)`. Exactly zero trailing coefficients
/// become exact zero roots; exactly zero leading ones are counted as
/// infinite roots.
pub fn sorted_roots(model: &LatticeModel, energy: C64) -> Result<RootSet> {
    let coeffs = char_poly_coeffs(model, energy);
    roots_of(&coeffs, energy)
}

pub(crate) fn roots_of(coeffs: &[C64], energy: C64) -> Result<RootSet> {
    let zero = C64::new(0.0, 0.0);
    let lo = coeffs.iter().position(|c| *c != zero).ok_or(Error::DegenerateAllZero)?;
    let hi = coeffs.iter().rposition(|c| *c != zero).expect("a nonzero entry exists");
    let mut roots = aberth_roots(&coeffs[lo..=hi])?;
    roots.extend(std::iter::repeat_n(zero, lo));
    roots.sort_by(modulus_order);
    let residuals = roots.iter().map(|&r| backward_error(coeffs, r)).collect();
    Ok(RootSet {
        energy,
        roots,
        residuals,
        infinite: coeffs.len() - 1 - hi,
    })
}
