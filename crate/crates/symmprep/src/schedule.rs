//! Protocol compilation and execution.
//!
//! A target Σ_k c_k|D_{N,k}⟩ is reached from the staircase superposition by
//! N(N−1)/2 selective flop steps. Stage n (n = 1..N−1) grows the Dicke block
//! on qubits 1..n by one qubit: step (n,k) drives the pair
//! |D_{n,k−1}⟩|e⟩ ↔ |D_{n,k}⟩|g⟩ on resonance (δ = λ₁(2k−n−1)), rotating by
//! θ = arccos(d_{n,k−1}/d_{n+1,k}) so the superposition left behind is the
//! recursion expansion of |D_{n+1,k}⟩. Within a stage k runs from n down
//! to 1; each step retunes Δ₂ to hit its δ target.
//!
//! Execution alternates exact-exponential evolution with a per-step unwind
//! of the known drive-free phases (exchange and Stark terms); residual
//! off-resonant phases and magnitude leakage are what the reported
//! per-step fidelities measure, against ideal intermediates built from
//! exact instantaneous rotations.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::dynamics::{
    build_effective_rotating, build_full_static, derive_params, effective_drive_free,
    full_unwind_generator, solve_delta2, step_propagator, AddressingSpec, DriveConfig,
    DRIVE_PHASE,
};
use crate::state::{
    assemble_staircase, assemble_symmetric, binomial, fidelity, StateVector,
    SymmetricCoefficients,
};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, Serialize)]
pub struct StepPlan {
    /// Ensemble size: the step drives qubits 1..n against extra qubit n+1.
    pub n: usize,
    /// Target excitation count of the pair being flopped.
    pub k: usize,
    /// Index of the staircase component this step processes.
    pub component: usize,
    /// δ in units of g₁ (= λ₁·(2k−n−1)).
    pub delta_target: f64,
    /// Second-drive detuning realizing delta_target.
    pub delta2: f64,
    /// Rotation angle θ = arccos(d_{n,k−1}/d_{n+1,k}).
    pub theta: f64,
    /// Collective flop rate Ω = |β|·√(k(n−k+1)).
    pub rabi: f64,
    /// θ/Ω, in 1/g₁.
    pub duration: f64,
    /// Drive phase (−π/2: transfer amplitude lands real positive).
    pub drive_phase: f64,
}

#[derive(Clone, Debug)]
pub struct Schedule {
    pub n_qubits: usize,
    pub g1: f64,
    pub g2: f64,
    pub delta1: f64,
    pub lambda1: f64,
    pub target: SymmetricCoefficients,
    pub steps: Vec<StepPlan>,
}

/// Rotation angle θ of step (n,k).
pub fn flop_angle(n: usize, k: usize) -> Result<f64> {
    if k == 0 || k > n {
        return Err(Error::domain(format!("flop_angle: invalid (n={n}, k={k})")));
    }
    Ok((binomial(n, k - 1) / binomial(n + 1, k)).sqrt().acos())
}

/// Collective matrix element Ω = |β|·√(k(n−k+1)) of the transfer operator.
pub fn flop_rate(n: usize, k: usize, beta: C64) -> Result<f64> {
    if k == 0 || k > n {
        return Err(Error::domain(format!("flop_rate: invalid (n={n}, k={k})")));
    }
    Ok(beta.norm() * ((k * (n - k + 1)) as f64).sqrt())
}

/// Compiles the full step list for `n_qubits` qubits. With `skip_zero`,
/// steps whose source component has amplitude below 1e-12 are omitted.
pub fn make_schedule(
    n_qubits: usize,
    c: &SymmetricCoefficients,
    g2: f64,
    delta1: f64,
    skip_zero: bool,
) -> Result<Schedule> {
    if n_qubits < 2 {
        return Err(Error::domain("make_schedule: need N ≥ 2"));
    }
    if c.n_qubits() != n_qubits {
        return Err(Error::shape(format!(
            "make_schedule: target has N={}, requested N={n_qubits}",
            c.n_qubits()
        )));
    }
    let g1 = 1.0;
    let lambda1 = g1 * g1 / delta1;
    let mut steps = Vec::new();
    for n in 1..n_qubits {
        for k in (1..=n).rev() {
            let component = k + n_qubits - n - 1;
            if skip_zero && c.get(component).norm() < 1e-12 {
                continue;
            }
            let delta_target = lambda1 * (2.0 * k as f64 - n as f64 - 1.0);
            let delta2 = solve_delta2(delta_target, g2, delta1, g1)?;
            let p = derive_params(&DriveConfig { g1, g2, delta1, delta2 })?;
            let theta = flop_angle(n, k)?;
            let rabi = flop_rate(n, k, p.beta)?;
            steps.push(StepPlan {
                n,
                k,
                component,
                delta_target,
                delta2,
                theta,
                rabi,
                duration: theta / rabi,
                drive_phase: DRIVE_PHASE,
            });
        }
    }
    Ok(Schedule { n_qubits, g1, g2, delta1, lambda1, target: c.clone(), steps })
}

impl Schedule {
    pub fn total_duration(&self) -> f64 {
        self.steps.iter().map(|s| s.duration).sum()
    }

    pub fn drive_config(&self, step: &StepPlan) -> DriveConfig {
        DriveConfig { g1: self.g1, g2: self.g2, delta1: self.delta1, delta2: step.delta2 }
    }
}

/// The three states tracked through step (n,k): the flopped pair and the
/// Dicke state their superposition forms, spectator tail included.
/// Returned as qubit-only vectors in the full N-qubit register.
pub fn tracked_states(
    n_qubits: usize,
    step: &StepPlan,
) -> Result<(StateVector, StateVector, StateVector)> {
    let (n, k) = (step.n, step.k);
    if n + 1 > n_qubits {
        return Err(Error::domain("tracked_states: step does not fit the register"));
    }
    let rest_width = n_qubits - n;
    let tail_e = (1usize << (rest_width - 1)) - 1; // qubits n+2..N all |e⟩
    let rest_source = (1usize << (rest_width - 1)) | tail_e; // extra |e⟩ + tail
    let rest_target = tail_e; // extra |g⟩ + tail

    let block = |n_block: usize, k_block: usize, rest: usize, rest_w: usize| -> Result<StateVector> {
        let mut s = StateVector::zeros(n_qubits, 0)?;
        let d = binomial(n_block, k_block).sqrt();
        for bits in 0..(1usize << n_block) {
            if (bits as u32).count_ones() as usize == k_block {
                s.amps[(bits << rest_w) | rest] = C64::new(1.0 / d, 0.0);
            }
        }
        Ok(s)
    };
    let source = block(n, k - 1, rest_source, rest_width)?;
    let target = block(n, k, rest_target, rest_width)?;
    let formed = block(n + 1, k, tail_e, rest_width - 1)?;
    Ok((source, target, formed))
}

/// Applies the exact rotation u → cosθ·u + sinθ·v, v → cosθ·v − sinθ·u
/// in the plane spanned by two orthonormal states.
fn rotate_pair(psi: &mut Array1<C64>, u: &Array1<C64>, v: &Array1<C64>, theta: f64) {
    let cu: C64 = u.iter().zip(psi.iter()).map(|(a, b)| a.conj() * b).sum();
    let cv: C64 = v.iter().zip(psi.iter()).map(|(a, b)| a.conj() * b).sum();
    let (s, c) = theta.sin_cos();
    let du = cu * (c - 1.0) - cv * s;
    let dv = cv * (c - 1.0) + cu * s;
    for i in 0..psi.len() {
        psi[i] += du * u[i] + dv * v[i];
    }
}

/// Ideal intermediates: the staircase start mapped through each step by
/// exact instantaneous rotations. Element i is the state after step i.
pub fn exact_execute(schedule: &Schedule) -> Result<Vec<StateVector>> {
    let mut psi = assemble_staircase(&schedule.target);
    let mut out = Vec::with_capacity(schedule.steps.len());
    for step in &schedule.steps {
        let (u, v, _) = tracked_states(schedule.n_qubits, step)?;
        rotate_pair(&mut psi.amps, &u.amps, &v.amps, step.theta);
        out.push(psi.clone());
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Backend {
    Effective,
    Full,
}

#[derive(Clone, Copy, Debug)]
pub struct ExecOptions {
    pub samples_per_step: usize,
    /// Bus truncation for the full backend.
    pub boson_dim: usize,
}

impl Default for ExecOptions {
    fn default() -> Self {
        Self { samples_per_step: 24, boson_dim: 8 }
    }
}

#[derive(Clone, Debug)]
pub struct StepTrajectory {
    pub step_index: usize,
    /// Global protocol time of each sample (units 1/g₁).
    pub times: Vec<f64>,
    pub source: Vec<f64>,
    pub target: Vec<f64>,
    pub formed: Vec<f64>,
}

impl StepTrajectory {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("# rates in units of g1\nt,p_source,p_target,p_formed\n");
        for i in 0..self.times.len() {
            s.push_str(&format!(
                "{:.9},{:.9},{:.9},{:.9}\n",
                self.times[i], self.source[i], self.target[i], self.formed[i]
            ));
        }
        s
    }
}

#[derive(Clone, Debug)]
pub struct ExecutionReport {
    pub backend: Backend,
    pub final_state: StateVector,
    pub per_step_fidelity: Vec<f64>,
    pub final_fidelity: f64,
    pub trajectories: Vec<StepTrajectory>,
    pub max_norm_drift: f64,
    pub max_excitation_drift: f64,
}

fn trio_populations(
    state: &StateVector,
    step: &StepPlan,
) -> Result<(f64, f64, f64)> {
    let n_qubits = state.n_qubits;
    let (n, k) = (step.n, step.k);
    let rest_width = n_qubits - n;
    let tail_e = (1usize << (rest_width - 1)) - 1;
    let rest_source = (1usize << (rest_width - 1)) | tail_e;
    let bosons = state.boson_dim.max(1);
    let (mut ps, mut pt, mut pf) = (0.0, 0.0, 0.0);
    for b in 0..bosons {
        ps += state.dicke_block_overlap(n, k - 1, rest_source, b)?.norm_sqr();
        pt += state.dicke_block_overlap(n, k, tail_e, b)?.norm_sqr();
        pf += state.dicke_block_overlap(n + 1, k, tail_e, b)?.norm_sqr();
    }
    Ok((ps, pt, pf))
}

/// One step of exact-exponential evolution with drive-free unwinding,
/// sampled uniformly for the tracked-trio trajectory.
fn run_step(
    schedule: &Schedule,
    step: &StepPlan,
    step_index: usize,
    psi0: &StateVector,
    backend: Backend,
    opts: &ExecOptions,
    t0: f64,
) -> Result<(StateVector, StepTrajectory)> {
    let spec = AddressingSpec::protocol_stage(schedule.n_qubits, step.n)?;
    let cfg = schedule.drive_config(step);
    let p = derive_params(&cfg)?;
    let (h, w) = match backend {
        Backend::Effective => (
            build_effective_rotating(&spec, &p, step.drive_phase),
            effective_drive_free(&spec, &p),
        ),
        Backend::Full => (
            build_full_static(&spec, &cfg, opts.boson_dim, step.drive_phase)?,
            full_unwind_generator(&spec, &cfg, opts.boson_dim)?,
        ),
    };
    let samples = opts.samples_per_step.max(1);
    let dt = step.duration / samples as f64;
    let u_sub = step_propagator(&h, dt)?;
    let unwind_sub = step_propagator(&w, -dt)?; // e^{+iW·dt}
    let mut unwind = Array2::<C64>::eye(h.nrows());
    let mut traj = StepTrajectory {
        step_index,
        times: Vec::with_capacity(samples + 1),
        source: Vec::with_capacity(samples + 1),
        target: Vec::with_capacity(samples + 1),
        formed: Vec::with_capacity(samples + 1),
    };
    let record = |traj: &mut StepTrajectory, t: f64, s: &StateVector| -> Result<()> {
        let (ps, pt, pf) = trio_populations(s, step)?;
        traj.times.push(t);
        traj.source.push(ps);
        traj.target.push(pt);
        traj.formed.push(pf);
        Ok(())
    };
    record(&mut traj, t0, psi0)?;
    let mut evolved = psi0.amps.clone();
    let mut sampled = psi0.clone();
    for m in 1..=samples {
        evolved = u_sub.dot(&evolved);
        unwind = unwind_sub.dot(&unwind);
        sampled.amps = unwind.dot(&evolved);
        record(&mut traj, t0 + m as f64 * dt, &sampled)?;
    }
    Ok((sampled, traj))
}

/// Evolves the pure source state of one step through that step alone —
/// the per-step population traces, starting from P(source) = 1.
pub fn single_step_trace(
    schedule: &Schedule,
    idx: usize,
    backend: Backend,
    opts: &ExecOptions,
) -> Result<StepTrajectory> {
    let step = schedule
        .steps
        .get(idx)
        .ok_or_else(|| Error::domain(format!("single_step_trace: no step {idx}")))?;
    let (source, _, _) = tracked_states(schedule.n_qubits, step)?;
    let psi0 = match backend {
        Backend::Effective => source,
        Backend::Full => source.attach_boson(opts.boson_dim)?,
    };
    let (_, traj) = run_step(schedule, step, idx, &psi0, backend, opts, 0.0)?;
    Ok(traj)
}

/// Runs the schedule against one of the two backends, starting from the
/// staircase state. Per-step fidelities compare against the exact-rotation
/// intermediates; the final fidelity against the assembled target.
pub fn execute(schedule: &Schedule, backend: Backend, opts: &ExecOptions) -> Result<ExecutionReport> {
    let ideals = exact_execute(schedule)?;
    let start = assemble_staircase(&schedule.target);
    let mut psi = match backend {
        Backend::Effective => start,
        Backend::Full => start.attach_boson(opts.boson_dim)?,
    };
    let excitation0 = psi.mean_excitation();
    let mut trajectories = Vec::with_capacity(schedule.steps.len());
    let mut per_step_fidelity = Vec::with_capacity(schedule.steps.len());
    let mut max_norm_drift = 0.0f64;
    let mut max_exc_drift = 0.0f64;
    let mut t_global = 0.0;

    for (i, step) in schedule.steps.iter().enumerate() {
        let (end, traj) = run_step(schedule, step, i, &psi, backend, opts, t_global)?;
        t_global += step.duration;
        psi = end;
        let norm_drift = (psi.norm() - 1.0).abs();
        let exc_drift = (psi.mean_excitation() - excitation0).abs();
        max_norm_drift = max_norm_drift.max(norm_drift);
        max_exc_drift = max_exc_drift.max(exc_drift);
        let f = match backend {
            Backend::Effective => fidelity(&ideals[i], &psi)?,
            Backend::Full => ideals[i].inner(&psi.project_boson(0)?)?.norm_sqr(),
        };
        per_step_fidelity.push(f);
        trajectories.push(traj);
    }

    let target_state = assemble_symmetric(&schedule.target);
    let final_fidelity = match backend {
        Backend::Effective => fidelity(&target_state, &psi)?,
        Backend::Full => target_state.inner(&psi.project_boson(0)?)?.norm_sqr(),
    };
    Ok(ExecutionReport {
        backend,
        final_state: psi,
        per_step_fidelity,
        final_fidelity,
        trajectories,
        max_norm_drift,
        max_excitation_drift: max_exc_drift,
    })
}

/// Rotating-frame and drive-free Hamiltonians of one step, for direct
/// inspection (resonance checks, single-step runs).
pub fn step_operators(schedule: &Schedule, idx: usize) -> Result<(Array2<C64>, Array2<C64>)> {
    let step = schedule
        .steps
        .get(idx)
        .ok_or_else(|| Error::domain(format!("step_operators: no step {idx}")))?;
    let spec = AddressingSpec::protocol_stage(schedule.n_qubits, step.n)?;
    let p = derive_params(&schedule.drive_config(step))?;
    Ok((
        build_effective_rotating(&spec, &p, step.drive_phase),
        effective_drive_free(&spec, &p),
    ))
}

#[derive(Clone, Copy, Debug)]
pub struct PhysicalTiming {
    pub total_seconds: f64,
    pub g1_radians_per_second: f64,
}

/// Converts protocol durations (units 1/g₁) to seconds for a physical g₁
/// given in angular frequency (rad/s).
pub fn physical_units(schedule: &Schedule, g1_physical: f64) -> Result<(PhysicalTiming, Vec<f64>)> {
    if g1_physical <= 0.0 {
        return Err(Error::domain("physical_units: g₁ must be positive"));
    }
    let per_step: Vec<f64> = schedule.steps.iter().map(|s| s.duration / g1_physical).collect();
    Ok((
        PhysicalTiming {
            total_seconds: schedule.total_duration() / g1_physical,
            g1_radians_per_second: g1_physical,
        },
        per_step,
    ))
}

/// Rounds to 12 significant digits — the serialization contract for
/// schedule files, keeping outputs byte-identical across runs.
pub fn sig12(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    format!("{x:.11e}").parse().expect("formatted float always parses")
}

#[derive(Serialize)]
struct ScheduleWire {
    units: &'static str,
    n_qubits: usize,
    g1: f64,
    g2: f64,
    delta1: f64,
    lambda1: f64,
    target_re: Vec<f64>,
    target_im: Vec<f64>,
    steps: Vec<StepPlan>,
}

impl Schedule {
    /// JSON with every rate in units of g₁, rounded to 12 significant digits.
    pub fn to_json(&self) -> String {
        let wire = ScheduleWire {
            units: "rates in units of g1",
            n_qubits: self.n_qubits,
            g1: self.g1,
            g2: sig12(self.g2),
            delta1: sig12(self.delta1),
            lambda1: sig12(self.lambda1),
            target_re: self.target.coeffs().iter().map(|z| sig12(z.re)).collect(),
            target_im: self.target.coeffs().iter().map(|z| sig12(z.im)).collect(),
            steps: self
                .steps
                .iter()
                .map(|s| StepPlan {
                    delta_target: sig12(s.delta_target),
                    delta2: sig12(s.delta2),
                    theta: sig12(s.theta),
                    rabi: sig12(s.rabi),
                    duration: sig12(s.duration),
                    drive_phase: sig12(s.drive_phase),
                    ..*s
                })
                .collect(),
        };
        serde_json::to_string_pretty(&wire).expect("schedule serialization cannot fail")
    }

    /// The reproduction table: one row per step, rates in units of g₁.
    pub fn table2_report(&self, fidelities: &[f64]) -> String {
        let mut out = String::from("# rates in units of g1\n");
        out.push_str("step,delta_over_lambda1,g2,delta2,delta1,fidelity\n");
        for (i, s) in self.steps.iter().enumerate() {
            let f = fidelities.get(i).map(|f| format!("{f:.4}")).unwrap_or_default();
            out.push_str(&format!(
                "{},{:.0},{},{:.4},{:.4},{}\n",
                i + 1,
                s.delta_target / self.lambda1,
                self.g2,
                s.delta2,
                self.delta1,
                f
            ));
        }
        out
    }
}
