use relaxwave::shift::ShiftState;
use relaxwave::solver::{
    run, stable_dt, step_with_dt, BoundaryKind, ConstantStates, FieldState, Grid, NoSampler, Scheme, ShiftRate,
    SolverConfig,
};
use relaxwave::{Error, GasModel, Result};

fn gas(tau: f64) -> GasModel {
    GasModel::new(2.0, 1.0, tau).unwrap()
}

fn config(scheme: Scheme, sigma: f64, end_time: f64) -> SolverConfig {
    SolverConfig {
        cfl: 0.9,
        end_time,
        scheme,
        boundary: BoundaryKind::FarfieldDirichlet,
        sigma,
        output_stride: 1,
        max_dt: None,
    }
}

/// Gaussian bump on `v` and `u` over the rest state `v = 1`, with `Π` at
/// its equilibrium value `μu_ξ/v`.
fn bump(grid: Grid, amp: f64, width: f64) -> FieldState {
    FieldState::from_fn(grid, 0.0, |x| {
        let g = amp * (-(x / width).powi(2)).exp();
        let gx = -2.0 * x / (width * width) * g;
        Ok([1.0 + g, g, gx / (1.0 + g)])
    })
    .unwrap()
}

/// Stepping at `factor` times the CFL-limited step; `Err` on breakdown.
fn stiff_run(tau: f64, factor: f64) -> Result<FieldState> {
    let model = gas(tau);
    let grid = Grid::new(10.0, 2000)?;
    let mut st = FieldState::from_fn(grid, 0.0, |x| {
        let b = 0.05 * (-x * x).exp();
        Ok([1.0 + b, b, 0.0])
    })?;
    let far = ConstantStates::uniform([1.0, 0.0, 0.0]);
    for _ in 0..2000 {
        let dt = factor * stable_dt(&st, &model, Scheme::RelaxedImex, 0.0, 1.0)?;
        st = step_with_dt(&st, &model, Scheme::RelaxedImex, 0.0, &far, 0.0, dt)?.0;
    }
    let finite = st.v.iter().chain(&st.u).chain(&st.pi).all(|x| x.is_finite() && x.abs() < 10.0);
    if finite {
        Ok(st)
    } else {
        Err(Error::Numeric("solution left the bounded range".into()))
    }
}

#[test]
fn cfl_sharpness_on_the_stiff_test() {
    for tau in [1e-2, 1e-3, 1e-4] {
        let st = stiff_run(tau, 0.9).unwrap();
        assert!(st.v.iter().all(|&v| (v - 1.0).abs() < 0.06));
        assert!(stiff_run(tau, 2.1).is_err(), "tau = {tau}");
    }
}

#[test]
fn moving_frame_agrees_with_lab_frame() {
    // σT is a whole number of cells on both grids, so frame-shifted cells
    // coincide with lab cells.
    let model = gas(0.5);
    let (sigma, t_end) = (1.0, 2.0);
    let far = ConstantStates::uniform([1.0, 0.0, 0.0]);
    let diff = |cells: usize| {
        let grid = Grid::new(20.0, cells).unwrap();
        let lab = run(bump(grid, 0.05, 1.5), &model, &config(Scheme::RelaxedImex, 0.0, t_end), &far, None, ShiftState::new(&model, 1.0), &mut NoSampler).unwrap();
        let moving = run(bump(grid, 0.05, 1.5), &model, &config(Scheme::RelaxedImex, sigma, t_end), &far, None, ShiftState::new(&model, 1.0), &mut NoSampler).unwrap();
        let offset = (sigma * t_end / grid.dx()).round() as usize;
        let mut worst: f64 = 0.0;
        for i in 0..cells - offset {
            let j = i + offset;
            if grid.center(i).abs() > 12.0 {
                continue;
            }
            worst = worst
                .max((moving.state.v[i] - lab.state.v[j]).abs())
                .max((moving.state.u[i] - lab.state.u[j]).abs());
        }
        worst
    };
    let (coarse, fine) = (diff(400), diff(800));
    assert!(coarse < 1e-3, "coarse difference {coarse}");
    assert!(coarse / fine > 3.0, "ratio {}", coarse / fine);
}

#[test]
fn classical_energy_is_non_increasing() {
    let model = gas(0.0);
    let grid = Grid::new(10.0, 200).unwrap();
    let l = grid.half_width();
    let mut st = FieldState::from_fn(grid, 0.0, |x| {
        Ok([1.0, 0.05 * (std::f64::consts::PI * x / l).sin(), 0.0])
    })
    .unwrap();
    let far = ConstantStates::uniform([1.0, 0.0, 0.0]);
    let energy = |s: &FieldState| {
        s.grid
            .trapezoid((0..s.grid.cells()).map(|i| 0.5 * s.u[i] * s.u[i] + model.h_rel(s.v[i], 1.0)))
    };
    let mut prev = energy(&st);
    let first = prev;
    for _ in 0..500 {
        let dt = stable_dt(&st, &model, Scheme::ClassicalReference, 0.0, 0.9).unwrap();
        st = step_with_dt(&st, &model, Scheme::ClassicalReference, 0.0, &far, 0.0, dt).unwrap().0;
        let e = energy(&st);
        assert!(e <= prev * (1.0 + 1e-12), "energy rose from {prev} to {e}");
        prev = e;
    }
    assert!(prev < 0.9 * first);
}

#[test]
fn relaxed_runs_approach_classical_at_rate_tau() {
    let grid = Grid::new(10.0, 256).unwrap();
    let far = ConstantStates::uniform([1.0, 0.0, 0.0]);
    let t_end = 0.5;
    let dt = 5e-5;
    let finish = |tau: f64| {
        let model = gas(tau);
        let scheme = if tau > 0.0 { Scheme::RelaxedImex } else { Scheme::ClassicalReference };
        let cfg = SolverConfig {
            max_dt: Some(dt),
            output_stride: usize::MAX,
            ..config(scheme, 0.0, t_end)
        };
        run(bump(grid, 0.05, 1.0), &model, &cfg, &far, None, ShiftState::new(&model, 1.0), &mut NoSampler)
            .unwrap()
            .state
    };
    let classical = finish(0.0);
    let gap = |tau: f64| {
        let s = finish(tau);
        (0..grid.cells())
            .map(|i| (s.v[i] - classical.v[i]).abs().max((s.u[i] - classical.u[i]).abs()))
            .fold(0.0, f64::max)
    };
    let (a, b) = (gap(1e-3), gap(1e-4));
    assert!(a < 1e-2, "gap {a}");
    let ratio = a / b;
    assert!(ratio > 5.0 && ratio < 20.0, "ratio {ratio}");
}

struct ZeroRate(usize);

impl ShiftRate for ZeroRate {
    fn rate(&mut self, _: &FieldState, _: f64) -> Result<f64> {
        self.0 += 1;
        Ok(0.0)
    }
}

#[test]
fn zero_coupling_matches_no_coupling() {
    let model = gas(0.01);
    let grid = Grid::new(10.0, 128).unwrap();
    let far = ConstantStates::uniform([1.0, 0.0, 0.0]);
    let cfg = config(Scheme::RelaxedImex, 0.3, 0.5);
    let a = run(bump(grid, 0.05, 1.0), &model, &cfg, &far, None, ShiftState::new(&model, 1.0), &mut NoSampler).unwrap();
    let mut zero = ZeroRate(0);
    let b = run(bump(grid, 0.05, 1.0), &model, &cfg, &far, Some(&mut zero), ShiftState::new(&model, 1.0), &mut NoSampler).unwrap();
    assert_eq!(a.state, b.state);
    assert_eq!(a.steps, b.steps);
    assert_eq!(b.shift.x, 0.0);
    assert_eq!(zero.0, 2 * b.steps);
}

#[test]
fn zero_end_time_returns_the_initial_state() {
    let model = gas(0.01);
    let initial = bump(Grid::new(10.0, 64).unwrap(), 0.05, 1.0);
    let far = ConstantStates::uniform([1.0, 0.0, 0.0]);
    let mut calls = 0;
    let mut sampler = |_: usize, _: &FieldState, _: &ShiftState| -> Result<()> {
        calls += 1;
        Ok(())
    };
    let out = run(initial.clone(), &model, &config(Scheme::RelaxedImex, 0.0, 0.0), &far, None, ShiftState::new(&model, 1.0), &mut sampler).unwrap();
    assert_eq!(out.steps, 0);
    assert_eq!(out.state, initial);
    assert_eq!(calls, 1);
}

#[test]
fn step_errors_carry_step_and_time() {
    let model = gas(0.01);
    let grid = Grid::new(10.0, 200).unwrap();
    let far = ConstantStates::uniform([1.0, 0.0, 0.0]);
    let mut n = 0;
    let mut sampler = |_: usize, _: &FieldState, _: &ShiftState| -> Result<()> {
        n += 1;
        if n == 3 {
            Err(Error::Numeric("stop".into()))
        } else {
            Ok(())
        }
    };
    let err = run(bump(grid, 0.05, 1.0), &model, &config(Scheme::RelaxedImex, 0.0, 1.0), &far, None, ShiftState::new(&model, 1.0), &mut sampler).unwrap_err();
    match err {
        Error::Run { step, t, .. } => assert!(step == 2 && t > 0.0),
        other => panic!("unexpected {other}"),
    }
}
