//! Finite open chains: the `2N × 2N` Hamiltonian, its spectrum, skin-mode
//! localization measures, and the exact collapse eigenvector.
//!
//! Sites are interleaved, `(a_1, b_1, a_2, b_2, ...)`, so cell `n` occupies
//! rows `2(n-1)` and `2(n-1)+1`.

use nalgebra::{DMatrix, DVector};

use crate::eigen::eig;
use crate::error::{Error, Result};
use crate::model::{collapse_energy, LatticeModel, Mat2, Side, C64};

#[derive(Debug, Clone, PartialEq)]
pub struct ObcChain {
    pub cells: usize,
    pub matrix: DMatrix<C64>,
}

impl ObcChain {
    /// The 2×2 block coupling cell `row` to cell `col` (1-based).
    pub fn block(&self, row: usize, col: usize) -> Mat2 {
        let (r, c) = (2 * (row - 1), 2 * (col - 1));
        Mat2::new(
            self.matrix[(r, c)],
            self.matrix[(r, c + 1)],
            self.matrix[(r + 1, c)],
            self.matrix[(r + 1, c + 1)],
        )
    }

    fn blocks_vanish(&self, upper: bool) -> bool {
        let zero = Mat2::zeros();
        (1..=self.cells).all(|r| {
            (1..=self.cells)
                .filter(|&c| if upper { c > r } else { c < r })
                .all(|c| self.block(r, c) == zero)
        })
    }

    /// Every block above the cell diagonal is exactly zero.
    pub fn is_block_lower_triangular(&self) -> bool {
        self.blocks_vanish(true)
    }

    /// Every block below the cell diagonal is exactly zero.
    pub fn is_block_upper_triangular(&self) -> bool {
        self.blocks_vanish(false)
    }
}

/// Hard-wall chain of `cells` unit cells.
pub fn build_obc_matrix(model: &LatticeModel, cells: usize) -> Result<ObcChain> {
    let q = model.range();
    if cells < q + 1 {
        return Err(Error::BadSize(format!(
            "need at least {} cells for hopping range {q}, got {cells}",
            q + 1
        )));
    }
    let mut h = DMatrix::<C64>::zeros(2 * cells, 2 * cells);
    for n in 1..=cells as i64 {
        let a = 2 * (n as usize - 1);
        for l in model.offsets() {
            let m = n - l;
            if m < 1 || m > cells as i64 {
                continue;
            }
            let am = 2 * (m as usize - 1);
            h[(a, am)] += model.rho(l);
            h[(a, am + 1)] += model.theta(l);
            h[(a + 1, am + 1)] -= model.rho(l);
            h[(a + 1, am)] += model.phi(l);
        }
    }
    Ok(ObcChain { cells, matrix: h })
}

#[derive(Debug, Clone)]
pub struct SpectrumResult {
    pub eigenvalues: Vec<C64>,
    /// Unit-norm eigenvectors, one per column.
    pub eigenvectors: DMatrix<C64>,
    /// `‖H v - E v‖ / ‖H‖₁` for each pair.
    pub residuals: Vec<f64>,
}

fn one_norm(m: &DMatrix<C64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Eigenpairs of the 2×2 block `b`; the second is the chiral partner when
/// the block is traceless.
fn block_eigen(b: &Mat2) -> [(C64, [C64; 2]); 2] {
    let half = 0.5 * (b[(0, 0)] + b[(1, 1)]);
    let gap = 0.5 * (b[(0, 0)] - b[(1, 1)]);
    let root = (gap * gap + b[(0, 1)] * b[(1, 0)]).sqrt();
    let vec_for = |lambda: C64| {
        let v1 = [b[(0, 1)], lambda - b[(0, 0)]];
        let v2 = [lambda - b[(1, 1)], b[(1, 0)]];
        let n1 = v1[0].norm_sqr() + v1[1].norm_sqr();
        let n2 = v2[0].norm_sqr() + v2[1].norm_sqr();
        if n1 == 0.0 && n2 == 0.0 {
            [C64::new(1.0, 0.0), C64::new(0.0, 0.0)]
        } else if n1 >= n2 {
            v1
        } else {
            v2
        }
    };
    let (l1, l2) = (half + root, half - root);
    let v1 = vec_for(l1);
    let mut v2 = vec_for(l2);
    if root == C64::new(0.0, 0.0) && b[(0, 1)] == C64::new(0.0, 0.0) && b[(1, 0)] == C64::new(0.0, 0.0) {
        v2 = [C64::new(0.0, 0.0), C64::new(1.0, 0.0)];
    }
    [(l1, v1), (l2, v2)]
}

/// Chains that are block triangular in the cell index have the diagonal
/// block's eigenvalues, each `N`-fold. Their eigenvectors live on the
/// terminal cell (an order-`N` exceptional point), or on every cell when the
/// chain is block diagonal.
fn triangular_spectrum(chain: &ObcChain, lower: bool, diagonal: bool) -> (Vec<C64>, DMatrix<C64>) {
    let n = chain.cells;
    let block = chain.block(1, 1);
    let pairs = block_eigen(&block);
    let mut values = Vec::with_capacity(2 * n);
    let mut vectors = DMatrix::<C64>::zeros(2 * n, 2 * n);
    let mut col = 0;
    for cell in 1..=n {
        for (lambda, v) in &pairs {
            let host = if diagonal {
                cell
            } else if lower {
                n
            } else {
                1
            };
            let r = 2 * (host - 1);
            let norm = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
            vectors[(r, col)] = v[0] / norm;
            vectors[(r + 1, col)] = v[1] / norm;
            values.push(*lambda);
            col += 1;
        }
    }
    (values, vectors)
}

pub fn obc_spectrum(chain: &ObcChain) -> Result<SpectrumResult> {
    let h = &chain.matrix;
    let lower = chain.is_block_lower_triangular();
    let upper = chain.is_block_upper_triangular();
    let (values, vectors) = if lower || upper {
        triangular_spectrum(chain, lower, lower && upper)
    } else {
        let e = eig(h)?;
        (e.values, e.vectors)
    };
    let norm = one_norm(h).max(f64::MIN_POSITIVE);
    let residuals = (0..values.len())
        .map(|k| {
            let v = vectors.column(k);
            (h * v - v * values[k]).norm() / norm
        })
        .collect();
    Ok(SpectrumResult {
        eigenvalues: values,
        eigenvectors: vectors,
        residuals,
    })
}

/// Centre of mass `Σ n w_n / Σ w_n` (cells counted from 1) and participation
/// ratio `(Σ w_n)² / Σ w_n²`, with `w_n = |a_n|² + |b_n|²`.
pub fn skin_metrics(vector: &[C64], cells: usize) -> Result<(f64, f64)> {
    if vector.len() != 2 * cells {
        return Err(Error::BadSize(format!(
            "vector has {} entries, expected {}",
            vector.len(),
            2 * cells
        )));
    }
    let w: Vec<f64> = (0..cells)
        .map(|n| vector[2 * n].norm_sqr() + vector[2 * n + 1].norm_sqr())
        .collect();
    let total: f64 = w.iter().sum();
    if total == 0.0 {
        return Err(Error::ZeroVector);
    }
    let com = w.iter().enumerate().map(|(n, x)| (n + 1) as f64 * x).sum::<f64>() / total;
    let pr = total * total / w.iter().map(|x| x * x).sum::<f64>();
    Ok((com, pr))
}

/// Exact eigenvector of a collapsed chain at `sign·E_0`, supported on the
/// terminal cell (`N` for right-pointing hoppings, 1 for left-pointing).
pub fn collapse_eigenvector(model: &LatticeModel, sign: i32, cells: usize) -> Result<DVector<C64>> {
    let side = model.one_sided().ok_or(Error::NotOneSided)?;
    if cells == 0 {
        return Err(Error::BadSize("chain needs at least one cell".into()));
    }
    let e = if sign >= 0 { 1.0 } else { -1.0 } * collapse_energy(model);
    let rho0 = model.rho(0);
    let (mut a, mut b) = (model.theta(0), e - rho0);
    if a.norm() == 0.0 && b.norm() == 0.0 {
        a = e + rho0;
        b = model.phi(0);
    }
    if a.norm() == 0.0 && b.norm() == 0.0 {
        // Zero block: any vector is an eigenvector.
        a = C64::new(1.0, 0.0);
    }
    let norm = (a.norm_sqr() + b.norm_sqr()).sqrt();
    let host = match side {
        Side::Right => cells,
        Side::Left => 1,
    };
    let mut v = DVector::<C64>::zeros(2 * cells);
    v[2 * (host - 1)] = a / norm;
    v[2 * (host - 1) + 1] = b / norm;
    Ok(v)
}
