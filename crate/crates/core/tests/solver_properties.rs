use proptest::prelude::*;

use twophase_core::solver::{cfl_step, BoundaryCondition, MixtureState, Regularization, Simulation, Solver};
use twophase_core::validate::bowl_scenario;
use twophase_core::{compute_geometry, Backend, CellState, ElevationGrid, ModelParams, ScalingConfig};

fn simulation(dem: &ElevationGrid, init: impl Fn(usize, usize) -> CellState) -> Simulation {
    let geom = compute_geometry(dem, &ScalingConfig::default());
    let state = MixtureState::from_fn(&geom, init);
    let solver = Solver::new(
        geom,
        ModelParams::standard(),
        Regularization::default(),
        BoundaryCondition::Open,
        0.1,
        Backend::serial(),
    );
    Simulation::new(solver, state).unwrap()
}

#[test]
fn dt_rule_examples() {
    assert!((cfl_step(0.1, 1.0, 2.0, 10.0) - 0.05).abs() < 1e-15);
    assert_eq!(cfl_step(0.1, 1.0, 0.0, 0.8), 0.8);
    assert_eq!(cfl_step(0.1, 1.0, 0.1 / 0.07, 0.05), 0.05);
}

#[test]
fn courant_number_never_exceeds_cfl() {
    let mut sim = bowl_scenario(40, &Backend::serial()).unwrap();
    for _ in 0..200 {
        sim.step_toward(f64::INFINITY).unwrap();
    }
    assert!(sim.max_courant() > 0.05);
    assert!(sim.max_courant() <= 0.1 * (1.0 + 1e-12), "{}", sim.max_courant());
}

#[test]
fn uniform_flat_state_is_steady() {
    let dem = ElevationGrid::from_fn(10, 10, 1.0, |_, _| 3.0);
    let mut sim = simulation(&dem, |_, _| CellState { hs: 0.6, hf: 0.4, ..Default::default() });
    let before = sim.state().cells.clone();
    for _ in 0..50 {
        sim.step_toward(f64::INFINITY).unwrap();
    }
    let mesh = sim.state().mesh;
    for k in mesh.interior_indices() {
        let (a, b) = (before[k].to_array(), sim.state().cells[k].to_array());
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() <= 1e-14);
        }
    }
}

#[test]
fn coulomb_friction_stops_without_reversal() {
    let dem = ElevationGrid::from_fn(6, 6, 1.0, |_, _| 0.0);
    // pure solid: no drag from a slower-decaying fluid
    let mut sim = simulation(&dem, |_, _| CellState { hs: 1.0, hf: 0.0, vs: [1.0, 0.0], vf: [0.0; 2] });
    let mut stopped = false;
    for _ in 0..400 {
        sim.step_toward(f64::INFINITY).unwrap();
        let s = sim.state().primitives(&sim.solver().geom, &sim.solver().reg)[0];
        assert!(s.vs[0] >= 0.0 && s.vs[1] == 0.0, "solid reversed: {:?}", s.vs);
        stopped |= s.vs[0] == 0.0;
    }
    assert!(stopped, "friction never brought the solid to rest");
}

#[test]
fn dam_break_front_is_bounded_by_signal_speed() {
    // 1-D dam break into a dry flat bed: h = 1 for X < 20.
    let (nx, ny) = (120, 3);
    let dem = ElevationGrid::from_fn(nx, ny, 0.5, |_, _| 0.0);
    let mut sim = simulation(&dem, |i, _| {
        if i < 40 {
            CellState { hs: 0.5, hf: 0.5, ..Default::default() }
        } else {
            CellState::default()
        }
    });
    let t_end = 5.0;
    sim.advance_to(t_end).unwrap();
    let prims = sim.state().primitives(&sim.solver().geom, &sim.solver().reg);
    let front = (0..nx)
        .rev()
        .find(|&i| prims[nx + i].h() > 1e-6)
        .map(|i| (i as f64 + 1.0) * 0.5)
        .unwrap();
    // fastest frictionless front moves at 2 sqrt(h0)
    assert!(front > 20.0 + 2.0, "front did not advance: {front}");
    assert!(front <= 20.0 + 2.0 * t_end + 1.0, "front outran the signal speed: {front}");
    let ledger = sim.ledger();
    assert_eq!(ledger.outflowed, [0.0; 2]);
    assert!(ledger.audit().iter().all(|a| a.abs() < 1e-12 * ledger.initial[0]));
}

#[test]
fn step_fixed_rejects_cfl_violation() {
    let mut sim = bowl_scenario(20, &Backend::serial()).unwrap();
    assert!(sim.step_fixed(10.0).is_err());
    assert!(sim.step_fixed(1e-3).is_ok());
}

fn release() -> impl Strategy<Value = (f64, f64, f64, f64, f64)> {
    (0.0f64..0.6, -0.4f64..0.4, 0.1f64..3.0, 0.1f64..0.9, -2.0f64..2.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn thickness_stays_nonnegative((sx, sy, h0, phi, v0) in release()) {
        let n = 24;
        let dem = ElevationGrid::from_fn(n, n, 1.0, |x, y| sx * (n as f64 - x) + sy * y + 0.01 * (x * y).sin());
        let c = n as f64 / 2.0;
        let mut sim = simulation(&dem, |i, j| {
            let r2 = ((i as f64 - c).powi(2) + (j as f64 - c).powi(2)) / 25.0;
            let h = (h0 * (1.0 - r2)).max(0.0);
            CellState { hs: phi * h, hf: (1.0 - phi) * h, vs: [v0, 0.0], vf: [0.0, v0] }
        });
        for _ in 0..40 {
            sim.step_toward(f64::INFINITY).unwrap();
        }
        for u in &sim.state().cells {
            prop_assert!(u.ms >= 0.0 && u.mf >= 0.0);
        }
        let l = sim.ledger();
        let total: f64 = l.initial.iter().sum();
        prop_assert!(l.clipped.iter().sum::<f64>() < 1e-9 * total);
        for k in 0..2 {
            prop_assert!(l.audit()[k].abs() < 1e-10 * total);
        }
    }
}
