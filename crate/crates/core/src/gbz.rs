//! Generalized Brillouin zone and non-Bloch bands.
//!
//! An energy belongs to the open-chain continuum when the two middle roots
//! `β_{2q}` and `β_{2q+1}` of the characteristic polynomial have equal
//! modulus. [`trace_gbz`] scans a rectangle of the complex energy plane,
//! finds grid edges across which the middle pair swaps order, and bisects
//! each one down to the curve.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{bloch_hamiltonian, collapse_energy, q_polynomial, LatticeModel, C64};
use crate::polyroots::{sorted_roots, RootSet};

/// Relative gap `(|β_{2q+1}| - |β_{2q}|) / |β_{2q+1}|` of the middle pair.
///
/// Two zero middle roots count as a gap of 0; a single infinite one as 1.
pub fn residual_of(roots: &RootSet, range: usize) -> f64 {
    let lo = roots.modulus(2 * range);
    let hi = roots.modulus(2 * range + 1);
    if hi.is_infinite() {
        return if lo.is_infinite() { 0.0 } else { 1.0 };
    }
    let gap = hi - lo;
    if gap == 0.0 {
        0.0
    } else {
        gap / hi.max(1e-300)
    }
}

pub fn gbz_residual(model: &LatticeModel, energy: C64) -> Result<f64> {
    Ok(residual_of(&sorted_roots(model, energy)?, model.range()))
}

/// Rectangle of the complex energy plane sampled at cell centres.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub center: C64,
    pub half_width: f64,
    pub half_height: f64,
    pub cols: usize,
    pub rows: usize,
}

impl GridSpec {
    pub fn square(center: C64, half_width: f64, n: usize) -> Self {
        GridSpec {
            center,
            half_width,
            half_height: half_width,
            cols: n,
            rows: n,
        }
    }

    fn node(&self, col: usize, row: usize) -> C64 {
        let dx = 2.0 * self.half_width / self.cols as f64;
        let dy = 2.0 * self.half_height / self.rows as f64;
        self.center
            + C64::new(
                -self.half_width + (col as f64 + 0.5) * dx,
                -self.half_height + (row as f64 + 0.5) * dy,
            )
    }

    fn cell(&self) -> (f64, f64) {
        (
            2.0 * self.half_width / self.cols as f64,
            2.0 * self.half_height / self.rows as f64,
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GbzOptions {
    /// Scan window; `None` picks a square of half-width `1.5·max|E_±(k)|`
    /// around the origin with 400×400 cells.
    pub grid: Option<GridSpec>,
    /// Edges whose endpoints both exceed this gap are skipped.
    pub coarse_tol: f64,
    /// Refined points must reach this gap.
    pub residual_tol: f64,
    /// Collapse threshold relative to the Bloch-band diameter.
    pub collapse_tol: f64,
    /// Levels of recursive zoom into residual minima when no grid edge crosses
    /// the curve.
    pub zoom_depth: usize,
}

impl Default for GbzOptions {
    fn default() -> Self {
        GbzOptions {
            grid: None,
            coarse_tol: 0.6,
            residual_tol: 1e-8,
            collapse_tol: 1e-6,
            zoom_depth: 14,
        }
    }
}

/// An accepted energy with its two middle roots, ascending modulus.
#[derive(Debug, Clone, PartialEq)]
pub struct GbzPoint {
    pub energy: C64,
    pub betas: [C64; 2],
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GbzCurve {
    pub points: Vec<GbzPoint>,
    pub residual_tol: f64,
    /// Largest pairwise energy distance within one chiral branch.
    pub diameter: f64,
    pub collapsed: bool,
    /// Diameter of the Bloch-band loop `E_+(k)`, the reference scale.
    pub energy_scale: f64,
}

impl GbzCurve {
    pub fn energies(&self) -> Vec<C64> {
        self.points.iter().map(|p| p.energy).collect()
    }

    pub fn max_beta(&self) -> f64 {
        self.points
            .iter()
            .flat_map(|p| p.betas)
            .map(|b| b.norm())
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy)]
struct Node {
    energy: C64,
    residual: f64,
    pair: Option<(C64, C64)>,
}

fn probe(model: &LatticeModel, energy: C64) -> Node {
    let q = model.range();
    match sorted_roots(model, energy) {
        Ok(rs) => {
            let pair = rs.root(2 * q).zip(rs.root(2 * q + 1));
            Node {
                energy,
                residual: residual_of(&rs, q),
                pair,
            }
        }
        Err(e) => {
            log::debug!("root finding failed at E = {energy}: {e}");
            Node {
                energy,
                residual: f64::NAN,
                pair: None,
            }
        }
    }
}

/// Follow the reference pair to `pair` by nearest assignment.
fn tracked(reference: (C64, C64), pair: (C64, C64)) -> (C64, C64) {
    let (r1, r2) = reference;
    let (p1, p2) = pair;
    if (p1 - r1).norm() + (p2 - r2).norm() <= (p1 - r2).norm() + (p2 - r1).norm() {
        (p1, p2)
    } else {
        (p2, p1)
    }
}

fn swapped(reference: (C64, C64), pair: (C64, C64)) -> bool {
    let (t1, t2) = tracked(reference, pair);
    t1.norm() > t2.norm()
}

/// Collect the sub-edges of `a`–`b` across which the middle pair swaps.
///
/// Near a branch point the roots move faster than nearest assignment can
/// follow over one grid edge, so the edge is halved until the pair moves by
/// less than a quarter of its own separation.
fn crossings(model: &LatticeModel, a: &Node, b: &Node, depth: usize, out: &mut Vec<(Node, Node)>) {
    let (Some(pa), Some(pb)) = (a.pair, b.pair) else {
        return;
    };
    let t = tracked(pa, pb);
    let moved = (t.0 - pa.0).norm().max((t.1 - pa.1).norm());
    let sep = (pa.0 - pa.1).norm().min((t.0 - t.1).norm());
    if depth == 0 || moved <= 0.25 * sep {
        if swapped(pa, pb) {
            out.push((*a, *b));
        }
        return;
    }
    let mid = probe(model, 0.5 * (a.energy + b.energy));
    crossings(model, a, &mid, depth - 1, out);
    crossings(model, &mid, b, depth - 1, out);
}

/// Relative separation `|β_{2q+1} - β_{2q}| / |β_{2q+1}|` of the middle pair.
fn separation(node: &Node) -> f64 {
    match node.pair {
        Some((a, b)) if b.norm() > 0.0 => (b - a).norm() / b.norm(),
        _ => f64::NAN,
    }
}

/// `p`, `p'` and `p''` at `z`, coefficients lowest power first.
fn horner2(coeffs: &[C64], z: C64) -> (C64, C64, C64) {
    let zero = C64::new(0.0, 0.0);
    let (mut p, mut dp, mut ddp) = (zero, zero, zero);
    for &c in coeffs.iter().rev() {
        ddp = ddp * z + 2.0 * dp;
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp, ddp)
}

/// Newton iteration on `P(β, E) = ∂_β P(β, E) = 0` from a node whose middle
/// roots nearly coincide. A converged double root that is the middle pair is
/// an end point of a GBZ arc.
fn branch_point(model: &LatticeModel, seed: &Node, tol: f64) -> Option<GbzPoint> {
    let (a, b) = seed.pair?;
    let q = model.range();
    let base = q_polynomial(model);
    let mut coeffs = base.coeffs().to_vec();
    let c_mid = coeffs[2 * q];
    let (mut beta, mut energy) = (0.5 * (a + b), seed.energy);
    let mut converged = false;
    for _ in 0..60 {
        coeffs[2 * q] = c_mid - energy * energy;
        let (p, dp, ddp) = horner2(&coeffs, beta);
        let pw = beta.powi(2 * q as i32 - 1);
        let (j11, j12) = (dp, -2.0 * energy * pw * beta);
        let (j21, j22) = (ddp, -4.0 * q as f64 * energy * pw);
        let det = j11 * j22 - j12 * j21;
        if det.norm() == 0.0 || !det.is_finite() {
            return None;
        }
        let db = (p * j22 - j12 * dp) / det;
        let de = (j11 * dp - p * j21) / det;
        beta -= db;
        energy -= de;
        if db.norm() <= 1e-14 * beta.norm().max(1e-300) && de.norm() <= 1e-14 * energy.norm().max(1.0) {
            converged = true;
            break;
        }
    }
    if !converged || !(beta.norm() > 0.0) {
        return None;
    }
    let node = probe(model, energy);
    let (m1, m2) = node.pair?;
    // The root solver splits a double root by about sqrt(eps); the Newton
    // value is the accurate one, and its two copies have equal modulus.
    let near = 1e-5 * beta.norm();
    ((m1 - beta).norm() < near && (m2 - beta).norm() < near && 0.0 < tol).then_some(GbzPoint {
        energy,
        betas: [beta, beta],
        residual: 0.0,
    })
}

fn accept(node: &Node, tol: f64) -> Option<GbzPoint> {
    let (b1, b2) = node.pair?;
    (node.residual < tol).then_some(GbzPoint {
        energy: node.energy,
        betas: [b1, b2],
        residual: node.residual,
    })
}

/// Bisect an edge whose middle pair swaps order between the ends.
fn refine(model: &LatticeModel, a: &Node, b: &Node, tol: f64) -> Option<GbzPoint> {
    let (mut lo, mut hi) = (*a, *b);
    let mut reference = a.pair?;
    for _ in 0..200 {
        if (hi.energy - lo.energy).norm() <= 4.0 * f64::EPSILON * hi.energy.norm().max(1e-300) {
            break;
        }
        let mid = probe(model, 0.5 * (lo.energy + hi.energy));
        let pair = mid.pair?;
        if swapped(reference, pair) {
            hi = mid;
        } else {
            reference = tracked(reference, pair);
            lo = mid;
        }
    }
    let best = if lo.residual <= hi.residual { lo } else { hi };
    accept(&best, tol)
}

/// Scan `grid` for crossings and branch points. When no edge crosses the
/// curve, zoom into `centres` and the four deepest residual minima, then
/// follow only the deepest minimum at each further level.
fn scan(
    model: &LatticeModel,
    grid: &GridSpec,
    opts: &GbzOptions,
    centres: &[C64],
    depth: usize,
    coarse_hit: &mut bool,
) -> Vec<GbzPoint> {
    let (cols, rows) = (grid.cols, grid.rows);
    let nodes: Vec<Node> = (0..cols * rows)
        .into_par_iter()
        .map(|idx| probe(model, grid.node(idx % cols, idx / cols)))
        .collect();
    let at = |c: usize, r: usize| &nodes[r * cols + c];

    let mut edges = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            let here = at(c, r);
            let mut consider = |other: &Node| {
                if !(here.residual.min(other.residual) < opts.coarse_tol) {
                    return;
                }
                *coarse_hit = true;
                crossings(model, here, other, 10, &mut edges);
            };
            if c + 1 < cols {
                consider(at(c + 1, r));
            }
            if r + 1 < rows {
                consider(at(c, r + 1));
            }
        }
    }

    let mut found: Vec<GbzPoint> = edges
        .par_iter()
        .filter_map(|(a, b)| refine(model, a, b, opts.residual_tol))
        .collect();
    let crossed = !found.is_empty();
    found.extend(nodes.iter().filter_map(|n| accept(n, opts.residual_tol)));

    let mut seeds = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            let here = separation(at(c, r));
            if !here.is_finite() {
                continue;
            }
            let lowest = neighbours(c, r, cols, rows).all(|(nc, nr)| {
                let there = separation(at(nc, nr));
                !(there < here)
            });
            if lowest {
                seeds.push(*at(c, r));
            }
        }
    }
    found.par_extend(
        seeds
            .par_iter()
            .filter_map(|n| branch_point(model, n, opts.residual_tol)),
    );

    if !crossed && depth < opts.zoom_depth {
        let mut minima: Vec<(f64, C64)> = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                let here = at(c, r).residual;
                if !here.is_finite() {
                    continue;
                }
                let lowest = neighbours(c, r, cols, rows).all(|(nc, nr)| {
                    let there = at(nc, nr).residual;
                    !(there <= here)
                });
                if lowest {
                    minima.push((here, at(c, r).energy));
                }
            }
        }
        minima.sort_by(|x, y| x.0.total_cmp(&y.0));
        let (dx, dy) = grid.cell();
        let deepest = if depth == 0 { 4 } else { 1 };
        let centres: Vec<C64> = centres
            .iter()
            .copied()
            .chain(minima.iter().take(deepest).map(|m| m.1))
            .collect();
        for centre in centres {
            let sub = GridSpec {
                center: centre,
                half_width: 2.0 * dx,
                half_height: 2.0 * dy,
                cols: 24,
                rows: 24,
            };
            found.extend(scan(model, &sub, opts, &[], depth + 1, coarse_hit));
        }
    }
    found
}

/// In-range 8-neighbours of a grid cell.
fn neighbours(c: usize, r: usize, cols: usize, rows: usize) -> impl Iterator<Item = (usize, usize)> {
    (-1i64..=1)
        .flat_map(|dr| (-1i64..=1).map(move |dc| (dc, dr)))
        .filter(|&d| d != (0, 0))
        .map(move |(dc, dr)| (c as i64 + dc, r as i64 + dr))
        .filter(move |&(nc, nr)| nc >= 0 && nr >= 0 && nc < cols as i64 && nr < rows as i64)
        .map(|(nc, nr)| (nc as usize, nr as usize))
}

fn branch_diameter(points: &[GbzPoint]) -> f64 {
    let upper = |e: &C64| e.re > 0.0 || (e.re == 0.0 && e.im >= 0.0);
    let mut best: f64 = 0.0;
    for side in [true, false] {
        let es: Vec<C64> = points.iter().map(|p| p.energy).filter(|e| upper(e) == side).collect();
        for (i, a) in es.iter().enumerate() {
            for b in &es[i + 1..] {
                best = best.max((a - b).norm());
            }
        }
    }
    best
}

/// Diameter of the Bloch loop `E_+(k)`, falling back to `max(|E_0|, 1)`
/// for a flat band.
pub fn bloch_loop_diameter(model: &LatticeModel) -> f64 {
    let es: Vec<C64> = (0..256)
        .map(|j| bloch_hamiltonian(model, -PI + 2.0 * PI * j as f64 / 256.0).e_plus)
        .collect();
    let mut d: f64 = 0.0;
    for (i, a) in es.iter().enumerate() {
        for b in &es[i + 1..] {
            d = d.max((a - b).norm());
        }
    }
    if d > 0.0 {
        d
    } else {
        collapse_energy(model).norm().max(1.0)
    }
}

/// The default scan window for a model.
pub fn default_grid(model: &LatticeModel) -> GridSpec {
    let reach = (0..256)
        .map(|j| {
            bloch_hamiltonian(model, -PI + 2.0 * PI * j as f64 / 256.0)
                .e_plus
                .norm()
        })
        .fold(0.0, f64::max);
    let half = if reach > 0.0 { 1.5 * reach } else { 1.0 };
    GridSpec::square(C64::new(0.0, 0.0), half, 400)
}

pub fn trace_gbz(model: &LatticeModel, opts: &GbzOptions) -> Result<GbzCurve> {
    let grid = opts.grid.clone().unwrap_or_else(|| default_grid(model));
    if grid.cols < 2 || grid.rows < 2 || !(grid.half_width > 0.0) || !(grid.half_height > 0.0) {
        return Err(Error::BadSize(format!(
            "scan grid needs at least 2x2 cells and positive extent, got {}x{}",
            grid.cols, grid.rows
        )));
    }
    let e0 = collapse_energy(model);
    let mut points: Vec<GbzPoint> = [e0, -e0]
        .iter()
        .filter_map(|&e| accept(&probe(model, e), opts.residual_tol))
        .collect();

    let mut coarse_hit = false;
    let zoom = if points.is_empty() { opts.zoom_depth } else { 0 };
    let scan_opts = GbzOptions {
        zoom_depth: zoom,
        ..opts.clone()
    };
    points.extend(scan(model, &grid, &scan_opts, &[e0, -e0], 0, &mut coarse_hit));

    if points.is_empty() {
        return Err(Error::EmptyCurve);
    }
    if !coarse_hit {
        log::debug!("only the collapse seeds lie on the curve");
    }

    // The roots depend on E only through E², so every point has a chiral
    // partner with the same middle pair.
    let partners: Vec<GbzPoint> = points
        .iter()
        .map(|p| GbzPoint {
            energy: -p.energy,
            ..p.clone()
        })
        .collect();
    points.extend(partners);

    points.sort_by(|a, b| {
        a.energy
            .re
            .total_cmp(&b.energy.re)
            .then(a.energy.im.total_cmp(&b.energy.im))
    });
    let scale = bloch_loop_diameter(model);
    let merge = 1e-12 * scale.max(e0.norm());
    let mut kept: Vec<GbzPoint> = Vec::with_capacity(points.len());
    for p in points {
        let duplicate = kept
            .iter()
            .rev()
            .take_while(|k| p.energy.re - k.energy.re <= merge)
            .any(|k| (k.energy - p.energy).norm() <= merge);
        if !duplicate {
            kept.push(p);
        }
    }

    let diameter = branch_diameter(&kept);
    Ok(GbzCurve {
        collapsed: diameter < opts.collapse_tol * scale,
        points: kept,
        residual_tol: opts.residual_tol,
        diameter,
        energy_scale: scale,
    })
}

/// Log-log fit of the curve size against a perturbation strength.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square deviation of the fit in `ln max|β|`.
    pub rms: f64,
    /// `(ε, max|β|)` for every family member.
    pub samples: Vec<(f64, f64)>,
}

/// Trace each member of a one-parameter family and fit
/// `ln max|β| = slope·ln ε + intercept`.
pub fn collapse_scaling(family: impl Fn(f64) -> LatticeModel, eps: &[f64], opts: &GbzOptions) -> Result<ScalingFit> {
    if eps.len() < 2 || eps.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::BadSize(
            "need at least two positive perturbation strengths".into(),
        ));
    }
    let mut samples = Vec::with_capacity(eps.len());
    for &e in eps {
        let curve = trace_gbz(&family(e), opts)?;
        samples.push((e, curve.max_beta()));
    }
    let xs: Vec<f64> = samples.iter().map(|s| s.0.ln()).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.1.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::BadSize("perturbation strengths must not all be equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rms = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - slope * x - intercept).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(ScalingFit {
        slope,
        intercept,
        rms,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{example_band_edges, example_gbz_radius, example_model};

    #[test]
    fn residual_inside_and_outside_the_segment() {
        let m = example_model(2.0, 0.4, 1.0, 0.6);
        let (e1, e2) = example_band_edges(2.0, 0.4, 1.0, 0.6);
        assert!(gbz_residual(&m, C64::new(0.5 * (e1 + e2), 0.0)).unwrap() < 1e-8);
        assert!(gbz_residual(&m, C64::new(e2 + 1.0, 0.0)).unwrap() > 0.01);
    }

    #[test]
    fn hermitian_band_is_on_the_unit_circle() {
        let m = example_model(2.0, 0.4, 1.0, 0.0);
        assert!(gbz_residual(&m, C64::new(2.3, 0.0)).unwrap() < 1e-10);
        let rs = sorted_roots(&m, C64::new(2.3, 0.0)).unwrap();
        assert!((rs.modulus(2) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn traced_circle_has_the_predicted_radius() {
        let m = example_model(2.0, 0.4, 1.0, 0.6);
        let curve = trace_gbz(&m, &GbzOptions::default()).unwrap();
        let r = example_gbz_radius(1.0, 0.6);
        assert!(curve.points.len() > 20);
        assert!(!curve.collapsed);
        for p in &curve.points {
            for b in p.betas {
                assert!((b.norm() - r).abs() / r < 1e-6, "|β| = {}", b.norm());
            }
        }
    }

    #[test]
    fn collapse_is_detected() {
        let m = example_model(2.0, 0.4, 1.0, 1.0);
        let curve = trace_gbz(&m, &GbzOptions::default()).unwrap();
        assert!(curve.collapsed);
        let e0 = 4.16f64.sqrt();
        for p in &curve.points {
            assert!((p.energy.norm() - e0).abs() < 1e-10);
        }
        assert_eq!(curve.points.len(), 2);
    }

    #[test]
    fn scan_window_missing_the_spectrum_is_empty() {
        let m = example_model(2.0, 0.4, 1.0, 0.6);
        let opts = GbzOptions {
            grid: Some(GridSpec::square(C64::new(40.0, 40.0), 1.0, 20)),
            zoom_depth: 0,
            ..GbzOptions::default()
        };
        assert_eq!(trace_gbz(&m, &opts), Err(Error::EmptyCurve));
    }

    #[test]
    fn constant_family_has_zero_slope() {
        let fit = collapse_scaling(
            |_| example_model(2.0, 0.4, 1.0, 0.6),
            &[1e-2, 1e-3],
            &GbzOptions {
                grid: Some(GridSpec::square(C64::new(0.0, 0.0), 3.0, 120)),
                ..GbzOptions::default()
            },
        )
        .unwrap();
        assert!(fit.slope.abs() < 1e-6);
    }
}
