use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::*;
use super::output::{RunOutput, Table};
use super::sweep::{fermi_orbitals, packet_modes};
use crate::bbgky::{collision_trace_bound_check, exact_consistency_check, Hierarchy};
use crate::effective::{gaussian_packet, HartreeFock, Trajectory, WaveSolver};
use crate::error::{Error, Result};
use crate::fluctuations::{default_cap, dimer_model, norm_approximation_experiment, ExperimentOptions};
use crate::manybody::{propagate, reduced_density_k, ManyBodyState, PropagationOptions};
use crate::numerics::krylov::KrylovOptions;
use crate::numerics::linalg::{eigvalsh, CMat};
use crate::numerics::{fit_power_law, ModeModel};
use crate::scattering::{scattering_length_integral, solve_zero_energy};
use crate::semiclassics::{commutator_propagation_experiment, exchange_smallness, tf_minimize};
use crate::C64;

/// Largest number of profile rows written for a scattering solution.
const PROFILE_ROWS: usize = 400;

pub fn scatter(p: &ScatterParams) -> Result<RunOutput> {
    let sol = solve_zero_energy(&p.potential, p.r_max, p.mesh)?;
    let mut out = RunOutput::default();
    out.note("a0", sol.a0);
    out.note("smallness", sol.rho);
    out.note("a0_integral", scattering_length_integral(&sol, &p.potential).ok());
    let stride = sol.r.len().div_ceil(PROFILE_ROWS).max(1);
    let mut prof = Table::new("profile", &[("r", "length"), ("f", "1"), ("u", "length")]);
    for i in (0..sol.r.len()).step_by(stride) {
        prof.push(vec![sol.r[i], sol.f[i], sol.u[i]]);
    }
    // a₀(N²V(N·)) = a₀/N
    let rescaled = p
        .rescalings
        .iter()
        .map(|&n| Ok([n as f64, n as f64 * solve_zero_energy(&p.potential.gp_rescaled(n as f64), p.r_max, p.mesh)?.a0 / sol.a0]))
        .collect::<Result<Vec<_>>>()?;
    out.note("rescaled_n_a0_over_a0", rescaled);
    out.tables = vec![prof];
    Ok(out)
}

fn trajectory_table(tr: &Trajectory) -> Table {
    let mut t = Table::new("trajectory", &[("t", "time"), ("mass", "1"), ("energy", "energy")]);
    for i in 0..tr.times.len() {
        t.push(vec![tr.times[i], tr.mass[i], tr.energy[i]]);
    }
    t
}

fn wave_output(solver: WaveSolver, packet: &Packet, t: f64, dt: f64, samples: usize) -> Result<RunOutput> {
    let phi0 = gaussian_packet(&solver.grid, packet.center, packet.width, packet.momentum);
    let tr = solver.solve(&phi0, t, dt, samples)?;
    let mut out = RunOutput::default();
    out.note("max_mass_drift", tr.max_mass_drift());
    out.note("max_energy_drift", tr.max_energy_drift());
    out.tables.push(trajectory_table(&tr));
    Ok(out)
}

pub fn hartree(p: &WaveParams) -> Result<RunOutput> {
    let mut s = WaveSolver::hartree(&p.grid, &p.v_ext, &p.interaction)?;
    s.scheme = p.scheme;
    wave_output(s, &p.packet, p.t, p.dt, p.samples)
}

pub fn gp(p: &GpParams) -> Result<RunOutput> {
    let mut s = WaveSolver::gross_pitaevskii(&p.grid, &p.v_ext, p.a0)?;
    s.scheme = p.scheme;
    wave_output(s, &p.packet, p.t, p.dt, p.samples)
}

pub fn hf(p: &HfParams) -> Result<RunOutput> {
    let orb = fermi_orbitals(&p.grid, p.particles, p.eps, &p.initial)?;
    let model = ModeModel::from_grid(&p.grid, p.eps, &p.v_ext, &p.interaction)?;
    let mut solver = HartreeFock::new(&model, p.particles, p.eps)?;
    solver.exchange = p.exchange;
    let (_, rep) = solver.solve(&(&orb * orb.adjoint()), p.t, p.dt, p.samples)?;
    let mut t = Table::new(
        "trajectory",
        &[("t", "time"), ("energy", "energy"), ("trace", "particles"), ("idempotence", "1"), ("spectrum_drift", "1")],
    );
    for i in 0..rep.times.len() {
        t.push(vec![rep.times[i], rep.energy[i], rep.trace[i], rep.idempotence[i], rep.spectrum_drift[i]]);
    }
    let mut out = RunOutput { tables: vec![t], ..Default::default() };
    out.note("max_spectrum_drift", rep.spectrum_drift.iter().cloned().fold(0.0, f64::max));
    out.note("max_idempotence", rep.idempotence.iter().cloned().fold(0.0, f64::max));
    out.note("midpoint_iterations", rep.midpoint_iterations);
    Ok(out)
}

pub fn exact(p: &ExactParams) -> Result<RunOutput> {
    let c0 = packet_modes(&p.grid, &p.packet);
    let mut psi = ManyBodyState::product(&p.grid, &c0, p.particles)?;
    let h = p.hamiltonian.assemble(&p.grid, &psi.fock.basis)?;
    let samples = p.samples.max(1);
    let tau = p.t / samples as f64;
    let opts = PropagationOptions { dt: p.dt, ..Default::default() };
    let mut t = Table::new("trajectory", &[("t", "time"), ("norm", "1"), ("energy", "energy"), ("condensate_fraction", "1")]);
    for s in 0..=samples {
        if s > 0 {
            psi = propagate(&psi, &h, tau, p.hamiltonian.eps, opts)?.0;
        }
        let ev = eigvalsh(&reduced_density_k(&psi, 1)?);
        t.push(vec![s as f64 * tau, psi.norm(), psi.energy(&h), ev[ev.len() - 1] / p.particles as f64]);
    }
    Ok(RunOutput { tables: vec![t], ..Default::default() })
}

pub fn fluct(p: &FluctParams) -> Result<RunOutput> {
    let model = dimer_model(p.dimer.hopping, p.dimer.onsite, p.dimer.cross)?;
    let c0: Vec<C64> = p.condensate.iter().map(|z| C64::new(z[0], z[1])).collect();
    let opts = ExperimentOptions { dt: p.dt, samples: p.samples, ..Default::default() };
    let reports = p
        .particles
        .par_iter()
        .map(|&n| norm_approximation_experiment(&model, &c0, n, default_cap(n), p.t, &opts))
        .collect::<Result<Vec<_>>>()?;
    let mut traj = Table::new("residual", &[("N", "particles"), ("t", "time"), ("residual", "1")]);
    let mut fin = Table::new("final", &[("N", "particles"), ("residual", "1"), ("leakage", "1")]).loglog();
    for r in &reports {
        for (t, x) in r.times.iter().zip(&r.residual) {
            traj.push(vec![r.particles as f64, *t, *x]);
        }
        fin.push(vec![r.particles as f64, *r.residual.last().expect("residual series"), r.max_leakage]);
    }
    let mut out = RunOutput::default();
    out.note("max_constraint_residual", reports.iter().map(|r| r.max_constraint_residual).fold(0.0, f64::max));
    let xs = fin.column("N").expect("column");
    match fit_power_law(&xs, &fin.column("residual").expect("column")) {
        Ok(f) => {
            out.fits.insert("residual_vs_n".into(), f);
        }
        Err(e) => out.refusal = Some(e.to_string()),
    }
    out.tables = vec![traj, fin];
    Ok(out)
}

pub fn tf(p: &TfParams) -> Result<RunOutput> {
    let st = tf_minimize(&p.grid, &p.v_ext, &p.interaction, &p.options)?;
    let mut prof = Table::new("profile", &[("x", "length"), ("y", "length"), ("z", "length"), ("rho", "1/volume"), ("phi", "energy")]);
    for i in 0..p.grid.len() {
        let x = p.grid.position(i);
        prof.push(vec![x[0], x[1], x[2], st.density[i], st.potential[i]]);
    }
    let mut hist = Table::new("iterations", &[("iteration", "1"), ("energy", "energy"), ("residual", "energy")]);
    for (i, (e, r)) in st.energy_history.iter().zip(&st.residual_history).enumerate() {
        hist.push(vec![i as f64, *e, *r]);
    }
    let mut out = RunOutput { tables: vec![prof, hist], ..Default::default() };
    out.note("mu", st.mu);
    out.note("energy", st.energy);
    out.note("residual", st.residual);
    out.note("mass", p.grid.cell_volume() * st.density.iter().sum::<f64>());
    out.note("iterations", st.iterations);
    Ok(out)
}

pub fn semiclass(p: &SemiclassParams) -> Result<RunOutput> {
    if p.eps.is_empty() {
        return Err(Error::Config("semiclass needs at least one ε".into()));
    }
    let runs = p
        .eps
        .par_iter()
        .map(|&eps| -> Result<_> {
            let n = (1.0 / eps).round().max(1.0) as usize;
            let trap = ModeModel::from_grid(&p.grid, eps, &p.v_ext, &crate::numerics::PotentialSpec::zero())?;
            let orb = crate::effective::lowest_orbitals(&trap.one_body, n)?;
            let model = ModeModel::from_grid(&p.grid, eps, &p.v_ext, &p.interaction)?;
            let hf = HartreeFock::new(&model, n, eps)?;
            let rep = commutator_propagation_experiment(&p.grid, &hf, &(&orb * orb.adjoint()), p.t, p.dt, p.samples)?;
            let ex = exchange_smallness(&p.grid, &rep.states, &p.interaction, n, eps)?;
            Ok((eps, n, rep, ex))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut comm = Table::new(
        "commutators",
        &[("eps", "1"), ("t", "time"), ("x_trace", "length"), ("grad_trace", "1"), ("normalized", "1")],
    );
    let mut exch = Table::new("exchange", &[("eps", "1"), ("N", "particles"), ("t", "time"), ("ratio", "1")]);
    let mut out = RunOutput::default();
    let mut accepted = true;
    let mut peak = Vec::new();
    for (eps, n, rep, ex) in &runs {
        accepted &= rep.accepted;
        for i in 0..rep.times.len() {
            comm.push(vec![*eps, rep.times[i], rep.x_trace[i], rep.grad_trace[i], rep.normalized[i]]);
            exch.push(vec![*eps, *n as f64, rep.times[i], ex.ratios[i]]);
        }
        peak.push(ex.ratios.iter().cloned().fold(0.0, f64::max));
    }
    let spread = peak.iter().cloned().fold(0.0, f64::max) / peak.iter().cloned().fold(f64::INFINITY, f64::min);
    out.note("envelopes_accepted", accepted);
    out.note("exchange_peak_ratios", &peak);
    out.note("exchange_ratio_spread", spread);
    out.tables = vec![comm, exch];
    Ok(out)
}

/// Random PSD trace-one matrix of dimension n.
fn random_density(rng: &mut ChaCha8Rng, n: usize) -> CMat {
    let a = CMat::from_fn(n, n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let g = &a * a.adjoint();
    let t = crate::numerics::linalg::trace(&g);
    g / t
}

pub fn bbgky(p: &BbgkyParams, seed: u64) -> Result<RunOutput> {
    let c0 = packet_modes(&p.grid, &p.packet);
    let psi0 = ManyBodyState::product(&p.grid, &c0, p.particles)?;
    let model = p.hamiltonian.mode_model(&p.grid, p.particles)?;
    let hier = Hierarchy::new(model.clone(), p.particles, p.hamiltonian.eps)?;
    let h = p.hamiltonian.assemble(&p.grid, &psi0.fock.basis)?;
    let opts = PropagationOptions { dt: 0.05, krylov: KrylovOptions { dim: 30, tol: 1e-14 } };
    let flow = |s: &ManyBodyState, t: f64| Ok(propagate(s, &h, t, p.hamiltonian.eps, opts)?.0);
    let rep = exact_consistency_check(&hier, &psi0, p.t, p.level, &p.steps, flow)?;
    let mut cons = Table::new("consistency", &[("dt", "time"), ("residual", "1/time")]).loglog();
    for (dt, r) in rep.dts.iter().zip(&rep.residuals) {
        cons.push(vec![*dt, *r]);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = p.grid.len();
    let dim = m.checked_pow(p.level as u32 + 1).filter(|&d| d <= crate::manybody::DENSITY_GUARD).ok_or_else(|| {
        Error::CostGuard(format!("γ^({}) on {m} modes exceeds the density guard", p.level + 1))
    })?;
    let mut bound = Table::new("collision_bound", &[("trial", "1"), ("ratio", "1")]);
    for trial in 0..p.bound_trials {
        let g = random_density(&mut rng, dim);
        bound.push(vec![trial as f64, collision_trace_bound_check(&g, &model.pair, p.level)?]);
    }
    let mut out = RunOutput::default();
    out.note("richardson", &rep.richardson);
    out.note("max_bound_ratio", bound.column("ratio").expect("column").into_iter().fold(0.0, f64::max));
    out.tables = vec![cons, bound];
    Ok(out)
}

