//! Ordered exponentials of traceless 2×2 generators.

use crate::model::{Mat2, C64};

/// `exp(M)` for traceless `M`, via `M² = s²·I`:
/// `exp(M) = cosh(s)·I + sinh(s)/s·M`. Both factors are even in `s`, so the
/// square-root branch never matters.
pub fn expm_traceless(m: &Mat2) -> Mat2 {
    let s2 = m[(0, 0)] * m[(0, 0)] + m[(0, 1)] * m[(1, 0)];
    let (ch, sh_over_s) = if s2.norm() < 1e-6 {
        let s4 = s2 * s2;
        (
            1.0 + s2 / 2.0 + s4 / 24.0 + s4 * s2 / 720.0,
            1.0 + s2 / 6.0 + s4 / 120.0 + s4 * s2 / 5040.0,
        )
    } else {
        let s = s2.sqrt();
        (s.cosh(), s.sinh() / s)
    };
    Mat2::identity() * ch + m * sh_over_s
}

fn commutator(a: &Mat2, b: &Mat2) -> Mat2 {
    a * b - b * a
}

/// Solve `dψ/ds = A(s) ψ` from `start` to `end` with fourth-order Magnus
/// steps; later factors multiply from the left. `A` must be traceless, so the
/// result has unit determinant up to rounding.
pub fn ordered_exponential(generator: impl Fn(f64) -> Mat2, start: f64, end: f64, steps: usize) -> Mat2 {
    let steps = steps.max(1);
    let h = (end - start) / steps as f64;
    let offset = h * 3f64.sqrt() / 6.0;
    let mut u = Mat2::identity();
    for j in 0..steps {
        let mid = start + (j as f64 + 0.5) * h;
        let a1 = generator(mid - offset);
        let a2 = generator(mid + offset);
        let omega =
            (a1 + a2) * C64::new(0.5 * h, 0.0) + commutator(&a2, &a1) * C64::new(3f64.sqrt() * h * h / 12.0, 0.0);
        u = expm_traceless(&omega) * u;
    }
    u
}
