//! Driven dynamics: the full lattice under a constant force, the two-level
//! Bloch-basis reduction, its Floquet exponents, and the rotating-wave
//! reduction near the first resonance.
//!
//! All integrators are fixed-step RK4 so that repeated runs are bit-identical.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::{LatticeModel, Mat2, C64, I};
use crate::propagate::ordered_exponential;
use crate::wannier_stark::{decompose, default_steps};

/// Norm beyond which a run is declared unstable.
pub const NORM_LIMIT: f64 = 1e12;
/// Default bound on the relative weight in the edge cells.
pub const EDGE_LIMIT: f64 = 1e-6;
/// Cells at each end counted as edge.
pub const EDGE_CELLS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sublattice {
    A,
    B,
}

/// Amplitudes on cells `1..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct WavepacketState {
    pub a: Vec<C64>,
    pub b: Vec<C64>,
    pub time: f64,
}

impl WavepacketState {
    pub fn cells(&self) -> usize {
        self.a.len()
    }

    pub fn observables(&self) -> Observables {
        let pa: f64 = self.a.iter().map(|z| z.norm_sqr()).sum();
        let pb: f64 = self.b.iter().map(|z| z.norm_sqr()).sum();
        let norm = pa + pb;
        let n = self.cells();
        let edge: f64 = (0..n)
            .filter(|&i| i < EDGE_CELLS || i + EDGE_CELLS >= n)
            .map(|i| self.a[i].norm_sqr() + self.b[i].norm_sqr())
            .sum();
        Observables {
            time: self.time,
            norm,
            frac_a: pa / norm,
            frac_b: pb / norm,
            edge_occupancy: edge / norm,
        }
    }
}

/// `P`, `P_A = Σ|a_n|²/P`, `P_B`, and the relative weight within
/// [`EDGE_CELLS`] of either end.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observables {
    pub time: f64,
    pub norm: f64,
    pub frac_a: f64,
    pub frac_b: f64,
    pub edge_occupancy: f64,
}

/// Gaussian packet `exp(-((n - N/2)/w)²)·exp(i k0 n)` on one sublattice,
/// normalized to unit norm.
pub fn gaussian_initial(cells: usize, width: f64, k0: f64, sublattice: Sublattice) -> Result<WavepacketState> {
    if !(width > 0.0) || (cells as f64) < 10.0 * width {
        return Err(Error::BadSize(format!("need N >= 10 w, got N = {cells}, w = {width}")));
    }
    let centre = cells as f64 / 2.0;
    let mut amp: Vec<C64> = (1..=cells)
        .map(|n| {
            let x = (n as f64 - centre) / width;
            C64::from_polar((-x * x).exp(), k0 * n as f64)
        })
        .collect();
    let norm = amp.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in amp.iter_mut() {
        *z /= norm;
    }
    let zeros = vec![C64::new(0.0, 0.0); cells];
    let (a, b) = match sublattice {
        Sublattice::A => (amp, zeros),
        Sublattice::B => (zeros, amp),
    };
    Ok(WavepacketState { a, b, time: 0.0 })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolveOptions {
    pub t_max: f64,
    /// Time step; `None` uses the stability bound, shrunk to divide the sample interval.
    pub dt: Option<f64>,
    pub sample_interval: f64,
    /// Keep a density snapshot every this many samples (0 for none).
    pub snapshot_stride: usize,
    /// Abort when the edge weight exceeds this (`None` to disable).
    pub edge_limit: Option<f64>,
    /// Repeat the run at half the step and report the largest relative change.
    pub error_estimate: bool,
}

impl EvolveOptions {
    /// Run for `periods` Bloch periods of `force`, sampling `per_period` times each.
    pub fn bloch_periods(force: f64, periods: f64, per_period: usize) -> Self {
        let tb = 2.0 * PI / force.abs();
        EvolveOptions {
            t_max: periods * tb,
            dt: None,
            sample_interval: tb / per_period as f64,
            snapshot_stride: 0,
            edge_limit: Some(EDGE_LIMIT),
            error_estimate: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub time: f64,
    pub abs_a_sq: Vec<f64>,
    pub abs_b_sq: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<Observables>,
    pub snapshots: Vec<Snapshot>,
    pub final_state: WavepacketState,
    pub dt: f64,
    /// Largest relative change of `P`, `P_A`, `P_B` when the step is halved.
    pub step_halving_error: Option<f64>,
}

/// Largest step the lattice integrator accepts.
pub fn stability_bound(model: &LatticeModel, force: f64, cells: usize) -> f64 {
    0.05 / (force.abs() * cells as f64 / 2.0).max(model.energy_scale())
}

struct Lattice {
    /// `(cell offset l, ρ_l, θ_l, φ_l)` for the nonzero offsets.
    couplings: Vec<(i64, C64, C64, C64)>,
    potential: Vec<f64>,
}

impl Lattice {
    fn new(model: &LatticeModel, force: f64, cells: usize) -> Self {
        let zero = C64::new(0.0, 0.0);
        let couplings = model
            .offsets()
            .map(|l| (l, model.rho(l), model.theta(l), model.phi(l)))
            .filter(|c| c.1 != zero || c.2 != zero || c.3 != zero)
            .collect();
        let centre = cells as f64 / 2.0;
        let potential = (1..=cells).map(|n| -force * (n as f64 - centre)).collect();
        Lattice { couplings, potential }
    }

    /// `-i H_F ψ` into `out`.
    fn derivative(&self, a: &[C64], b: &[C64], da: &mut [C64], db: &mut [C64]) {
        let n = a.len() as i64;
        for i in 0..n {
            let iu = i as usize;
            let mut ha = a[iu] * self.potential[iu];
            let mut hb = b[iu] * self.potential[iu];
            for &(l, rho, theta, phi) in &self.couplings {
                let j = i - l;
                if j < 0 || j >= n {
                    continue;
                }
                let ju = j as usize;
                ha += rho * a[ju] + theta * b[ju];
                hb += phi * a[ju] - rho * b[ju];
            }
            da[iu] = -I * ha;
            db[iu] = -I * hb;
        }
    }
}

fn rk4_step(lat: &Lattice, state: &mut WavepacketState, dt: f64, scratch: &mut [Vec<C64>; 10]) {
    let n = state.cells();
    let [k1a, k1b, k2a, k2b, k3a, k3b, k4a, k4b, ta, tb] = scratch;
    lat.derivative(&state.a, &state.b, k1a, k1b);
    for i in 0..n {
        ta[i] = state.a[i] + 0.5 * dt * k1a[i];
        tb[i] = state.b[i] + 0.5 * dt * k1b[i];
    }
    lat.derivative(ta, tb, k2a, k2b);
    for i in 0..n {
        ta[i] = state.a[i] + 0.5 * dt * k2a[i];
        tb[i] = state.b[i] + 0.5 * dt * k2b[i];
    }
    lat.derivative(ta, tb, k3a, k3b);
    for i in 0..n {
        ta[i] = state.a[i] + dt * k3a[i];
        tb[i] = state.b[i] + dt * k3b[i];
    }
    lat.derivative(ta, tb, k4a, k4b);
    for i in 0..n {
        state.a[i] += dt / 6.0 * (k1a[i] + 2.0 * k2a[i] + 2.0 * k3a[i] + k4a[i]);
        state.b[i] += dt / 6.0 * (k1b[i] + 2.0 * k2b[i] + 2.0 * k3b[i] + k4b[i]);
    }
    state.time += dt;
}

fn run(
    lat: &Lattice,
    start: &WavepacketState,
    dt: f64,
    per_sample: usize,
    samples: usize,
    opts: &EvolveOptions,
) -> Result<(Vec<Observables>, Vec<Snapshot>, WavepacketState)> {
    let n = start.cells();
    let mut scratch: [Vec<C64>; 10] = std::array::from_fn(|_| vec![C64::new(0.0, 0.0); n]);
    let mut state = start.clone();
    let t0 = start.time;
    let mut out = vec![state.observables()];
    let mut snaps = Vec::new();
    let snapshot = |s: &WavepacketState| Snapshot {
        time: s.time,
        abs_a_sq: s.a.iter().map(|z| z.norm_sqr()).collect(),
        abs_b_sq: s.b.iter().map(|z| z.norm_sqr()).collect(),
    };
    if opts.snapshot_stride > 0 {
        snaps.push(snapshot(&state));
    }
    for s in 1..=samples {
        for _ in 0..per_sample {
            rk4_step(lat, &mut state, dt, &mut scratch);
        }
        // Recompute time from the sample count so it does not drift.
        state.time = t0 + (s * per_sample) as f64 * dt;
        let obs = state.observables();
        if !(obs.norm <= NORM_LIMIT) {
            return Err(Error::Instability {
                time: state.time,
                norm: obs.norm,
            });
        }
        if let Some(limit) = opts.edge_limit {
            if obs.edge_occupancy > limit {
                return Err(Error::EdgeContamination {
                    time: state.time,
                    occupancy: obs.edge_occupancy,
                    limit,
                });
            }
        }
        out.push(obs);
        if opts.snapshot_stride > 0 && s % opts.snapshot_stride == 0 {
            snaps.push(snapshot(&state));
        }
    }
    Ok((out, snaps, state))
}

/// Integrate `i da_n/dt = Σ ρ_l a_{n-l} + Σ θ_l b_{n-l} - F(n - n_c) a_n`
/// and its `b` partner on a hard-wall chain.
pub fn evolve_lattice(
    model: &LatticeModel,
    force: f64,
    state: &WavepacketState,
    opts: &EvolveOptions,
) -> Result<Trajectory> {
    let cells = state.cells();
    if cells == 0 || state.b.len() != cells {
        return Err(Error::BadSize("state needs equal, nonzero a and b lengths".into()));
    }
    if !(opts.sample_interval > 0.0) || !(opts.t_max >= 0.0) {
        return Err(Error::BadSize(
            "sample interval must be positive and t_max non-negative".into(),
        ));
    }
    let bound = stability_bound(model, force, cells);
    let requested = opts.dt.unwrap_or(bound);
    if !(requested > 0.0) || requested > bound * (1.0 + 1e-12) {
        return Err(Error::StepTooLarge { dt: requested, bound });
    }
    let per_sample = (opts.sample_interval / requested).ceil().max(1.0) as usize;
    let dt = opts.sample_interval / per_sample as f64;
    let samples = (opts.t_max / opts.sample_interval).round() as usize;
    let lat = Lattice::new(model, force, cells);
    let (obs, snaps, fin) = run(&lat, state, dt, per_sample, samples, opts)?;

    let step_halving_error = if opts.error_estimate {
        let quiet = EvolveOptions {
            snapshot_stride: 0,
            ..opts.clone()
        };
        let (fine, _, _) = run(&lat, state, dt / 2.0, 2 * per_sample, samples, &quiet)?;
        let rel = |x: f64, y: f64| (x - y).abs() / y.abs().max(1e-300);
        Some(
            obs.iter()
                .zip(&fine)
                .map(|(c, f)| {
                    rel(c.norm, f.norm)
                        .max(rel(c.frac_a, f.frac_a))
                        .max(rel(c.frac_b, f.frac_b))
                })
                .fold(0.0, f64::max),
        )
    } else {
        None
    };
    Ok(Trajectory {
        samples: obs,
        snapshots: snaps,
        final_state: fin,
        dt,
        step_halving_error,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoLevelSample {
    pub time: f64,
    pub abs_fa_sq: f64,
    pub abs_fb_sq: f64,
    pub norm: f64,
}

fn rk4_two(f: impl Fn(f64, [C64; 2]) -> [C64; 2], t: f64, y: [C64; 2], dt: f64) -> [C64; 2] {
    let add = |y: [C64; 2], k: [C64; 2], s: f64| [y[0] + s * k[0], y[1] + s * k[1]];
    let k1 = f(t, y);
    let k2 = f(t + dt / 2.0, add(y, k1, dt / 2.0));
    let k3 = f(t + dt / 2.0, add(y, k2, dt / 2.0));
    let k4 = f(t + dt, add(y, k3, dt));
    [
        y[0] + dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        y[1] + dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ]
}

fn sample_two(time: f64, y: [C64; 2]) -> TwoLevelSample {
    let (a, b) = (y[0].norm_sqr(), y[1].norm_sqr());
    TwoLevelSample {
        time,
        abs_fa_sq: a,
        abs_fb_sq: b,
        norm: a + b,
    }
}

fn integrate_two(
    rhs: impl Fn(f64, [C64; 2]) -> [C64; 2],
    init: [C64; 2],
    t_max: f64,
    dt: f64,
    sample_interval: f64,
) -> Result<Vec<TwoLevelSample>> {
    if !(dt > 0.0) || !(sample_interval > 0.0) || !(t_max >= 0.0) {
        return Err(Error::BadSize(
            "time step, sample interval and horizon must be positive".into(),
        ));
    }
    let per_sample = (sample_interval / dt).ceil().max(1.0) as usize;
    let h = sample_interval / per_sample as f64;
    let samples = (t_max / sample_interval).round() as usize;
    let mut y = init;
    let mut out = vec![sample_two(0.0, y)];
    for s in 0..samples {
        for j in 0..per_sample {
            let t = (s * per_sample + j) as f64 * h;
            y = rk4_two(&rhs, t, y, h);
        }
        out.push(sample_two(((s + 1) * per_sample) as f64 * h, y));
    }
    Ok(out)
}

/// `i d(f_A, f_B)/dt = H(k0 + F t)(f_A, f_B)`.
pub fn evolve_two_level(
    model: &LatticeModel,
    force: f64,
    k0: f64,
    init: [C64; 2],
    t_max: f64,
    dt: f64,
    sample_interval: f64,
) -> Result<Vec<TwoLevelSample>> {
    if force == 0.0 || !force.is_finite() {
        return Err(Error::ZeroForce);
    }
    let rhs = |t: f64, y: [C64; 2]| {
        let h = model.bloch_matrix(k0 + force * t);
        [
            -I * (h[(0, 0)] * y[0] + h[(0, 1)] * y[1]),
            -I * (h[(1, 0)] * y[0] + h[(1, 1)] * y[1]),
        ]
    };
    integrate_two(rhs, init, t_max, dt, sample_interval)
}

/// Floquet data of the two-level drive over one Bloch period.
#[derive(Debug, Clone, PartialEq)]
pub struct FloquetExponents {
    /// `±θ'/T` with `cos θ' = tr(U_T)/2`, principal branch.
    pub exponents: [C64; 2],
    pub period: f64,
    pub cos_theta: C64,
    pub overlap: f64,
    pub defective: bool,
}

impl FloquetExponents {
    /// Quasi-energies are defined modulo `2π/T`; true if `energy` matches one
    /// of the exponents up to that shift.
    pub fn matches(&self, energy: C64, tol: f64) -> bool {
        let w = 2.0 * PI / self.period;
        self.exponents.iter().any(|e| {
            let d = energy - e;
            let shift = (d.re / w).round() * w;
            (d - shift).norm() < tol
        })
    }
}

/// One-period propagator of the two-level drive, from `k = 0` through a full
/// zone in the direction of `F`.
pub fn floquet_exponents(model: &LatticeModel, force: f64) -> Result<FloquetExponents> {
    if force == 0.0 || !force.is_finite() {
        return Err(Error::ZeroForce);
    }
    let scale = -I / force;
    let gen = |k: f64| model.bloch_matrix(k) * scale;
    let u: Mat2 = ordered_exponential(gen, 0.0, 2.0 * PI * force.signum(), default_steps(model, force));
    let d = decompose(&u);
    let period = 2.0 * PI / force.abs();
    Ok(FloquetExponents {
        exponents: [d.theta / period, -d.theta / period],
        period,
        cos_theta: d.cos_theta,
        overlap: d.overlap,
        defective: d.defective,
    })
}

/// Rotating-wave reduction near the first resonance `F ≈ ±2ρ_0`:
///
/// * `F > 0`: `i g_A' = θ_1 e^{-iΩt} g_B`, `i g_B' = φ_{-1} e^{iΩt} g_A`, `Ω = F - 2ρ_0`;
/// * `F < 0`: `i g_A' = θ_{-1} e^{iΩt} g_B`, `i g_B' = φ_1 e^{-iΩt} g_A`, `Ω = F + 2ρ_0`.
///
/// Valid when `ρ_0` dominates the hoppings; a warning is logged otherwise.
pub fn rwa_two_level(
    model: &LatticeModel,
    force: f64,
    init: [C64; 2],
    t_max: f64,
    dt: f64,
    sample_interval: f64,
) -> Result<Vec<TwoLevelSample>> {
    if force == 0.0 || !force.is_finite() {
        return Err(Error::ZeroForce);
    }
    let mass = model.rho(0).re;
    let hop = model.energy_scale() - model.rho(0).norm();
    if mass.abs() < 5.0 * hop {
        log::warn!("rotating-wave reduction used outside its regime: |ρ_0| = {mass} vs hoppings {hop}");
    }
    let (up, down, detuning) = if force > 0.0 {
        (model.theta(1), model.phi(-1), force - 2.0 * mass)
    } else {
        (model.theta(-1), model.phi(1), -(force + 2.0 * mass))
    };
    // For F < 0 the phases are e^{+iΩt}, e^{-iΩt}; folding the sign into the
    // detuning lets both cases share one right-hand side.
    let rhs = move |t: f64, y: [C64; 2]| {
        let ph = C64::from_polar(1.0, -detuning * t);
        [-I * up * ph * y[1], -I * down * ph.conj() * y[0]]
    };
    integrate_two(rhs, init, t_max, dt, sample_interval)
}
