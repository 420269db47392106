//! Dense complex eigensolver for non-normal matrices.
//!
//! Osborne balancing, Householder reduction to Hessenberg form, implicitly
//! shifted complex QR to Schur form, then eigenvectors by back-substitution
//! on the triangular factor.
//!
//! Skin-effect Hamiltonians are violently non-normal: at 120 sites the
//! unbalanced matrix already loses two digits of every eigenvalue. Running
//! the balancing to convergence (instead of a single sweep) recovers them.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::model::C64;

const EPS: f64 = f64::EPSILON;

#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<C64>,
    /// Unit-norm eigenvectors, one per column.
    pub vectors: DMatrix<C64>,
}

/// Diagonal scaling `d` (powers of two) with `D⁻¹ A D` balanced in the
/// 2-norm sense: every off-diagonal row norm matches its column norm.
pub fn balance(a: &DMatrix<C64>) -> Vec<f64> {
    let n = a.nrows();
    let mut w: Vec<f64> = a.iter().map(|z| z.norm_sqr()).collect();
    // Column-major: w[j * n + i] is |a_ij|².
    let mut log_d = vec![0.0f64; n];
    for _ in 0..20_000 {
        let mut worst: f64 = 0.0;
        for i in 0..n {
            let mut col = 0.0;
            let mut row = 0.0;
            for j in 0..n {
                if j != i {
                    col += w[i * n + j];
                    row += w[j * n + i];
                }
            }
            if col == 0.0 || row == 0.0 {
                continue;
            }
            let f2 = (row / col).sqrt();
            if (f2 - 1.0).abs() < 1e-12 {
                continue;
            }
            worst = worst.max(f2.ln().abs());
            for j in 0..n {
                w[i * n + j] *= f2;
                w[j * n + i] /= f2;
            }
            log_d[i] += 0.5 * f2.ln();
        }
        if worst < 1e-9 {
            break;
        }
    }
    log_d
        .iter()
        .map(|l| 2f64.powi((l / std::f64::consts::LN_2).round() as i32))
        .collect()
}

fn householder_hessenberg(h: &mut DMatrix<C64>, z: &mut DMatrix<C64>) {
    let n = h.nrows();
    for k in 0..n.saturating_sub(2) {
        let norm: f64 = (k + 1..n).map(|i| h[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let x0 = h[(k + 1, k)];
        let phase = if x0.norm() > 0.0 {
            x0 / x0.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        let alpha = -phase * norm;
        let mut v: Vec<C64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        v[0] -= alpha;
        let vn: f64 = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if vn == 0.0 {
            continue;
        }
        for c in v.iter_mut() {
            *c /= vn;
        }
        // H <- (I - 2vv*) H
        for j in k..n {
            let dot: C64 = v.iter().enumerate().map(|(t, vt)| vt.conj() * h[(k + 1 + t, j)]).sum();
            for (t, vt) in v.iter().enumerate() {
                h[(k + 1 + t, j)] -= 2.0 * vt * dot;
            }
        }
        // H <- H (I - 2vv*), Z <- Z (I - 2vv*)
        for m in [&mut *h, &mut *z] {
            for i in 0..n {
                let dot: C64 = v.iter().enumerate().map(|(t, vt)| m[(i, k + 1 + t)] * vt).sum();
                for (t, vt) in v.iter().enumerate() {
                    m[(i, k + 1 + t)] -= 2.0 * dot * vt.conj();
                }
            }
        }
        h[(k + 1, k)] = alpha;
        for i in k + 2..n {
            h[(i, k)] = C64::new(0.0, 0.0);
        }
    }
}

/// Rotation `G = [[c, s], [-s̄, c]]` with `G·(x, y)ᵀ = (r, 0)ᵀ`.
fn givens(x: C64, y: C64) -> (f64, C64) {
    let ax = x.norm();
    let r = ax.hypot(y.norm());
    if r == 0.0 {
        (1.0, C64::new(0.0, 0.0))
    } else if ax == 0.0 {
        (0.0, C64::new(1.0, 0.0))
    } else {
        (ax / r, x * y.conj() / (ax * r))
    }
}

fn rotate_rows(h: &mut DMatrix<C64>, k: usize, c: f64, s: C64, from: usize) {
    for j in from..h.ncols() {
        let (u, v) = (h[(k, j)], h[(k + 1, j)]);
        h[(k, j)] = c * u + s * v;
        h[(k + 1, j)] = -s.conj() * u + c * v;
    }
}

fn rotate_cols(h: &mut DMatrix<C64>, k: usize, c: f64, s: C64, to: usize) {
    for i in 0..to {
        let (u, v) = (h[(i, k)], h[(i, k + 1)]);
        h[(i, k)] = c * u + s.conj() * v;
        h[(i, k + 1)] = -s * u + c * v;
    }
}

/// Eigenvalue of the 2×2 block `[[a, b], [c, d]]` closest to `d`.
fn wilkinson(a: C64, b: C64, c: C64, d: C64) -> C64 {
    let half = 0.5 * (a - d);
    let disc = (half * half + b * c).sqrt();
    let (m1, m2) = (0.5 * (a + d) + disc, 0.5 * (a + d) - disc);
    if (m1 - d).norm() < (m2 - d).norm() {
        m1
    } else {
        m2
    }
}

/// Reduce Hessenberg `h` to upper-triangular Schur form, accumulating the
/// unitary factor into `z`.
fn schur(h: &mut DMatrix<C64>, z: &mut DMatrix<C64>) -> Result<()> {
    let n = h.nrows();
    if n < 2 {
        return Ok(());
    }
    let norm = h.iter().map(|c| c.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let mut hi = n - 1;
    let mut iter = 0usize;
    while hi > 0 {
        let mut lo = hi;
        while lo > 0 {
            let mut s = h[(lo - 1, lo - 1)].norm() + h[(lo, lo)].norm();
            if s == 0.0 {
                s = norm;
            }
            if h[(lo, lo - 1)].norm() <= EPS * s {
                h[(lo, lo - 1)] = C64::new(0.0, 0.0);
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        if iter > 100 {
            return Err(Error::EigNonConvergence { row: hi, dim: n });
        }
        let shift = if iter.is_multiple_of(11) {
            h[(hi, hi)] + C64::new(0.75 * h[(hi, hi - 1)].norm(), 0.25 * h[(hi, hi - 1)].norm())
        } else {
            wilkinson(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };
        for k in lo..hi {
            let (x, y) = if k == lo {
                (h[(lo, lo)] - shift, h[(lo + 1, lo)])
            } else {
                (h[(k, k - 1)], h[(k + 1, k - 1)])
            };
            let (c, s) = givens(x, y);
            rotate_rows(h, k, c, s, if k == lo { lo } else { k - 1 });
            if k > lo {
                h[(k + 1, k - 1)] = C64::new(0.0, 0.0);
            }
            rotate_cols(h, k, c, s, (k + 3).min(hi + 1));
            rotate_cols(z, k, c, s, n);
        }
    }
    Ok(())
}

/// Eigenvectors of upper-triangular `t`, one per column.
fn triangular_vectors(t: &DMatrix<C64>) -> DMatrix<C64> {
    let n = t.nrows();
    let tnorm = t.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let small = (EPS * tnorm).max(f64::MIN_POSITIVE);
    let mut y = DMatrix::<C64>::zeros(n, n);
    for k in 0..n {
        let lambda = t[(k, k)];
        y[(k, k)] = C64::new(1.0, 0.0);
        for i in (0..k).rev() {
            let mut acc = C64::new(0.0, 0.0);
            for j in i + 1..=k {
                acc += t[(i, j)] * y[(j, k)];
            }
            let mut den = t[(i, i)] - lambda;
            if den.norm() < small {
                den = C64::new(small, 0.0);
            }
            y[(i, k)] = -acc / den;
            if y[(i, k)].norm() > 1e150 {
                let scale = 1.0 / y[(i, k)].norm();
                for j in i..=k {
                    y[(j, k)] *= scale;
                }
            }
        }
    }
    y
}

/// All eigenpairs of a square complex matrix.
pub fn eig(a: &DMatrix<C64>) -> Result<Eigen> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::BadSize(format!("matrix is {}x{}, not square", n, a.ncols())));
    }
    let d = balance(a);
    let mut h = a.clone();
    for j in 0..n {
        for i in 0..n {
            h[(i, j)] *= d[j] / d[i];
        }
    }
    let mut z = DMatrix::<C64>::identity(n, n);
    householder_hessenberg(&mut h, &mut z);
    schur(&mut h, &mut z)?;
    let values: Vec<C64> = (0..n).map(|i| h[(i, i)]).collect();
    let y = triangular_vectors(&h);
    let mut vectors = &z * &y;
    for k in 0..n {
        for i in 0..n {
            vectors[(i, k)] *= d[i];
        }
        let norm = vectors.column(k).norm();
        if norm > 0.0 {
            vectors.column_mut(k).unscale_mut(norm);
        }
    }
    polish(a, &values, &mut vectors);
    Ok(Eigen { values, vectors })
}

/// Inverse iteration on eigenpairs whose backward error is above rounding
/// level. Ill-conditioned eigenvalues get poor vectors from back-substitution.
fn polish(a: &DMatrix<C64>, values: &[C64], vectors: &mut DMatrix<C64>) {
    let n = a.nrows();
    let anorm = a.iter().map(|c| c.norm()).fold(0.0, f64::max) * n as f64;
    if anorm == 0.0 {
        return;
    }
    let backward = |v: &DMatrix<C64>, k: usize| {
        let col = v.column(k);
        (a * col - col * values[k]).norm() / anorm
    };
    #[allow(clippy::needless_range_loop)]
    for k in 0..n {
        if backward(vectors, k) <= 100.0 * EPS {
            continue;
        }
        let mut shifted = a.clone();
        for i in 0..n {
            shifted[(i, i)] -= values[k] + C64::new(EPS * anorm, 0.0);
        }
        let lu = shifted.lu();
        let mut x = vectors.column(k).into_owned();
        for _ in 0..3 {
            let Some(y) = lu.solve(&x) else { break };
            let norm = y.norm();
            if !(norm > 0.0 && norm.is_finite()) {
                break;
            }
            x = y / C64::new(norm, 0.0);
        }
        let before = backward(vectors, k);
        let col = x.column(0);
        let after = (a * col - col * values[k]).norm() / anorm;
        if after < before {
            vectors.set_column(k, &x);
        }
    }
}
