use std::f64::consts::PI;

use nonbloch::dynamics::{
    evolve_lattice, evolve_two_level, floquet_exponents, gaussian_initial, EvolveOptions, Sublattice,
};
use nonbloch::{collapse_energy, example_model, C64};

const CELLS: usize = 120;

fn packet() -> nonbloch::dynamics::WavepacketState {
    gaussian_initial(CELLS, 4.0, 0.0, Sublattice::B).unwrap()
}

#[test]
fn hermitian_evolution_is_unitary_over_ten_periods() {
    let m = example_model(2.0, 0.4, 1.0, 0.0);
    let force = 0.5 * collapse_energy(&m).re;
    let run = evolve_lattice(&m, force, &packet(), &EvolveOptions::bloch_periods(force, 10.0, 8)).unwrap();
    for s in &run.samples {
        assert!((s.norm - 1.0).abs() < 1e-8, "t = {}: P = {}", s.time, s.norm);
        assert!((s.frac_a + s.frac_b - 1.0).abs() < 1e-12);
    }
}

#[test]
fn halving_the_step_changes_no_observable() {
    let m = example_model(2.0, 0.4, 1.0, 1.0);
    let e0 = collapse_energy(&m).re;
    for force in [e0, -e0] {
        let opts = EvolveOptions {
            error_estimate: true,
            ..EvolveOptions::bloch_periods(force, 4.0, 16)
        };
        let run = evolve_lattice(&m, force, &packet(), &opts).unwrap();
        let err = run.step_halving_error.unwrap();
        assert!(err < 1e-6, "F = {force}: {err}");
    }
}

/// Without edges the lattice run is exactly the two-level drive averaged
/// over the packet's quasi-momentum distribution `|Σ_n b_n e^{-ikn}|²`.
#[test]
fn lattice_equals_the_momentum_averaged_two_level_drive() {
    let m = example_model(2.0, 0.4, 1.0, 1.0);
    let e0 = collapse_energy(&m).re;
    let init = [C64::new(0.0, 0.0), C64::new(1.0, 0.0)];
    let state = packet();
    for force in [e0, -e0] {
        let t_max = 3.0 * 2.0 * PI / e0;
        let opts = EvolveOptions::bloch_periods(force, 3.0, 16);
        let lattice = evolve_lattice(&m, force, &state, &opts).unwrap();
        let mut num = vec![0.0; lattice.samples.len()];
        let mut den = vec![0.0; lattice.samples.len()];
        let nk = 128;
        for j in 0..nk {
            let k = -PI + 2.0 * PI * (j as f64 + 0.5) / nk as f64;
            let g: C64 = state
                .b
                .iter()
                .enumerate()
                .map(|(i, b)| b * C64::from_polar(1.0, -k * (i + 1) as f64))
                .sum();
            let weight = g.norm_sqr();
            let run = evolve_two_level(&m, force, k, init, t_max, 1e-3, opts.sample_interval).unwrap();
            for (i, s) in run.iter().enumerate() {
                num[i] += weight * s.abs_fa_sq;
                den[i] += weight * (s.abs_fa_sq + s.abs_fb_sq);
            }
        }
        for (i, s) in lattice.samples.iter().enumerate() {
            assert!((s.frac_a - num[i] / den[i]).abs() < 1e-8, "F = {force}, t = {}", s.time);
        }
    }
}

/// The single `k = 0` mode tracks a broad packet; the momentum spread of a
/// `w = 4` packet costs about 0.04 under `F = +E_0`, so that case uses `w = 8`.
#[test]
fn broad_packet_follows_the_k_zero_drive() {
    let m = example_model(2.0, 0.4, 1.0, 1.0);
    let e0 = collapse_energy(&m).re;
    for (force, width) in [(-e0, 4.0), (-e0, 8.0), (e0, 8.0)] {
        let tb = 2.0 * PI / force.abs();
        let opts = EvolveOptions::bloch_periods(force, 3.0, 32);
        let state = gaussian_initial(CELLS, width, 0.0, Sublattice::B).unwrap();
        let lattice = evolve_lattice(&m, force, &state, &opts).unwrap();
        let init = [C64::new(0.0, 0.0), C64::new(1.0, 0.0)];
        let two = evolve_two_level(&m, force, 0.0, init, 3.0 * tb, 1e-3, opts.sample_interval).unwrap();
        assert_eq!(lattice.samples.len(), two.len());
        for (l, t) in lattice.samples.iter().zip(&two) {
            assert!((l.time - t.time).abs() < 1e-9);
            let pa = t.abs_fa_sq / (t.abs_fa_sq + t.abs_fb_sq);
            assert!((l.frac_a - pa).abs() < 0.02, "F = {force}, w = {width}, t = {}", l.time);
        }
    }
}

#[test]
fn mirrored_chain_prefers_the_opposite_force() {
    let m = example_model(2.0, 0.4, 1.0, 1.0);
    let e0 = collapse_energy(&m).re;
    let peak = |model: &nonbloch::LatticeModel, force: f64| {
        let run = evolve_lattice(model, force, &packet(), &EvolveOptions::bloch_periods(force, 4.0, 16)).unwrap();
        run.samples.iter().map(|s| s.frac_a).fold(0.0, f64::max)
    };
    assert!(peak(&m, e0) > peak(&m, -e0));
    let r = m.mirrored();
    assert!(peak(&r, -e0) > peak(&r, e0));
}

#[test]
fn resonant_two_level_amplitude_grows_linearly() {
    let m = example_model(2.0, 0.4, 1.0, 1.0);
    let force = collapse_energy(&m).re;
    let tb = 2.0 * PI / force;
    let init = [C64::new(0.0, 0.0), C64::new(1.0, 0.0)];
    let out = evolve_two_level(&m, force, 0.0, init, 40.0 * tb, 1e-3, tb).unwrap();
    let amp = |periods: usize| out[periods - 1].abs_fa_sq.sqrt();
    let ratio = amp(40) / amp(20);
    assert!((ratio - 2.0).abs() < 0.1, "{ratio}");
}

#[test]
fn hermitian_floquet_exponents_are_real() {
    let m = example_model(2.0, 0.4, 1.0, 0.0);
    for force in [0.4, 1.1, -2.3] {
        let f = floquet_exponents(&m, force).unwrap();
        assert!(!f.defective);
        assert!(f.exponents.iter().all(|e| e.im.abs() < 1e-9), "{:?}", f.exponents);
    }
}

#[test]
fn packet_width_and_phase() {
    let narrow = gaussian_initial(CELLS, 0.1, 0.0, Sublattice::A).unwrap();
    let peak = narrow.a.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max);
    assert!(peak > 0.999);
    let still = gaussian_initial(CELLS, 4.0, 0.0, Sublattice::B).unwrap();
    let moving = gaussian_initial(CELLS, 4.0, PI / 2.0, Sublattice::B).unwrap();
    for (x, y) in still.b.iter().zip(&moving.b) {
        assert!((x.norm() - y.norm()).abs() < 1e-15);
    }
    assert!(gaussian_initial(20, 4.0, 0.0, Sublattice::B).is_err());
}
