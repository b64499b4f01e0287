use std::sync::Arc;

use exterior_ns::analytic::{oseen_vorticity, Blob, BlobSpec, OseenParams};
use exterior_ns::evolve::{init_state, OseenBoundary, State, StepPolicy, Stepper, WallMode};
use exterior_ns::{lp_norm, Grid};

fn grid(n_s: usize, n_theta: usize) -> Arc<Grid> {
    Arc::new(Grid::new(1.0, 64f64.ln(), n_s, n_theta).unwrap())
}

fn dipole(mass: f64) -> BlobSpec {
    BlobSpec::new(vec![
        Blob { center: [3.0, 1.0], width: 0.5, mass },
        Blob { center: [3.0, -1.0], width: 0.5, mass: -mass },
    ])
}

fn max_gap(a: &State, b: &State) -> f64 {
    lp_norm(&a.omega().subtract(b.omega()).unwrap(), f64::INFINITY).unwrap()
}

fn oseen_error(n: usize, dt: f64) -> f64 {
    let g = grid(n, n);
    let policy = StepPolicy::new(dt, true, WallMode::Prescribed(Arc::new(OseenBoundary { alpha: 1.0 })));
    let mut st = Stepper::new(&g, policy).unwrap();
    let w0 = oseen_vorticity(OseenParams::new(1.0, 1.0).unwrap(), &g).unwrap();
    let s0 = st.state_from_vorticity(1.0, w0, -1.0).unwrap();
    let (s, _) = st.evolve_to(&s0, 1.5, &[], |_| {}).unwrap();
    let exact = oseen_vorticity(OseenParams::new(1.0, 1.5).unwrap(), &g).unwrap();
    lp_norm(&s.omega().subtract(&exact).unwrap(), 2.0).unwrap() / lp_norm(&exact, 2.0).unwrap()
}

#[test]
fn prescribed_oseen_run_converges_at_second_order() {
    let coarse = oseen_error(48, 0.02);
    let fine = oseen_error(96, 0.01);
    let ratio = coarse / fine;
    assert!(fine < 5e-3, "{fine}");
    assert!((3.2..4.8).contains(&ratio), "{coarse} {fine} {ratio}");
}

#[test]
fn split_evolution_matches_single_run() {
    let g = grid(48, 32);
    let mut st = Stepper::new(&g, StepPolicy::noslip(&g, 0.01, true)).unwrap();
    let s0 = init_state(st.workspace(), 0.2, &dipole(1.0)).unwrap();
    let (s1, _) = st.evolve_to(&s0, 1.0, &[], |_| {}).unwrap();
    let (direct, _) = st.evolve_to(&s1, 4.0, &[], |_| {}).unwrap();
    let (mid, _) = st.evolve_to(&s1, 2.0, &[], |_| {}).unwrap();
    let (split, _) = st.evolve_to(&mid, 4.0, &[], |_| {}).unwrap();
    assert_eq!(direct.t(), split.t());
    let gap = max_gap(&direct, &split);
    assert!(gap <= 1e-12 * lp_norm(direct.omega(), f64::INFINITY).unwrap(), "{gap}");
}

#[test]
fn final_probe_is_the_final_state() {
    let g = grid(32, 32);
    let mut st = Stepper::new(&g, StepPolicy::noslip(&g, 0.02, true)).unwrap();
    let s0 = init_state(st.workspace(), 0.1, &dipole(0.5)).unwrap();
    let (last, snaps) = st.evolve_to(&s0, 1.3, &[1.3], |_| {}).unwrap();
    assert_eq!(snaps.len(), 1);
    assert_eq!(snaps[0].t(), 1.3);
    assert_eq!(snaps[0].omega().values(), last.omega().values());
    assert_eq!(snaps[0].psi().values(), last.psi().values());
}

#[test]
fn probes_land_exactly() {
    let g = grid(24, 16);
    let mut st = Stepper::new(&g, StepPolicy::noslip(&g, 0.03, false)).unwrap();
    let s0 = init_state(st.workspace(), 1.0, &BlobSpec::empty()).unwrap();
    let probes = [0.05, 0.1, 0.37, 1.0];
    let mut times = Vec::new();
    let (_, snaps) = st.evolve_to(&s0, 1.25, &probes, |s| times.push(s.t())).unwrap();
    let got: Vec<f64> = snaps.iter().map(State::t).collect();
    assert_eq!(got, probes);
    assert_eq!(*times.last().unwrap(), 1.25);
    assert!(times.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn stokes_energy_decays_every_step() {
    let g = grid(64, 64);
    let mut st = Stepper::new(&g, StepPolicy::noslip(&g, 0.005, false)).unwrap();
    let s0 = init_state(st.workspace(), 0.0, &dipole(1.5)).unwrap();
    let mut prev = s0.kinetic_norm();
    let mut steps = 0;
    st.evolve_to(&s0, 2.0, &[], |s| {
        let e = s.kinetic_norm();
        assert!(e <= prev * (1.0 + 1e-10), "t = {}: {e} > {prev}", s.t());
        prev = e;
        steps += 1;
    })
    .unwrap();
    assert!(steps > 400);
    assert!(prev < s0.kinetic_norm());
}

#[test]
fn pure_harmonic_flow_keeps_its_circulation() {
    let g = grid(48, 16);
    let mut st = Stepper::new(&g, StepPolicy::noslip(&g, 0.01, false)).unwrap();
    let s0 = init_state(st.workspace(), 1.0, &BlobSpec::empty()).unwrap();
    assert!((s0.outer_circulation() + 1.0).abs() < 1e-12);
    st.evolve_to(&s0, 3.0, &[], |s| {
        assert!((s.outer_circulation() + 1.0).abs() < 1e-8, "{}", s.outer_circulation());
    })
    .unwrap();
}
