//! Drive parameters, Hamiltonian builders, and propagation.
//!
//! Two models of the same protocol step live here. The *effective* model
//! acts on qubits only: an exchange term λ₁·Σ_{i≠j∈ens} σᵢ⁺σⱼ⁻, a collective
//! drive transferring excitation between the ensemble and one extra qubit at
//! rate β, and (in the rotating frame) a −δ·n_extra shift whose degeneracies
//! select which Dicke pair flops. The *full* model keeps the bus mode
//! explicit: red-sideband couplings g₁, g₂ at detunings Δ₁, Δ₂, integrated
//! either in the lab frame (time-dependent) or in a static frame where the
//! drive phases are absorbed into −Δ₁·a†a − (Δ₁−Δ₂)·n_extra.
//!
//! Conventions: ħ = 1, rates in units of g₁, time in 1/g₁. The drive phase
//! is −π/2 throughout so the realized two-level transfer amplitude is real
//! positive (+sin θ), compensating the −i of resonant Rabi flopping.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use crate::linalg::{self, expm, is_hermitian};
use crate::state::StateVector;
use crate::{Error, Result};

/// Drive phase making resonant transfer amplitudes real positive.
pub const DRIVE_PHASE: f64 = -std::f64::consts::FRAC_PI_2;

#[derive(Clone, Copy, Debug)]
pub struct DriveConfig {
    pub g1: f64,
    pub g2: f64,
    pub delta1: f64,
    pub delta2: f64,
}

impl DriveConfig {
    /// Warns when the dispersive validity condition Δ ≫ g is marginal.
    pub fn dispersive_warning(&self) -> Option<String> {
        let r1 = (self.delta1 / self.g1).abs();
        let r2 = if self.g2 != 0.0 { (self.delta2 / self.g2).abs() } else { f64::INFINITY };
        if r1 < 10.0 || r2 < 10.0 {
            Some(format!(
                "dispersive regime marginal: |Δ₁/g₁| = {r1:.2}, |Δ₂/g₂| = {r2:.2} (want ≥ 10)"
            ))
        } else {
            None
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct DerivedParams {
    /// λ₁ = g₁²/Δ₁ — exchange rate.
    pub lambda1: f64,
    /// λ₂ = g₂²/Δ₂ — Stark shift of the extra qubit.
    pub lambda2: f64,
    /// Harmonic-mean detuning: 1/Δ̄ = (1/Δ₁ + 1/Δ₂)/2.
    pub dbar: f64,
    /// Effective flop rate β = g₁g₂/Δ̄ (phase applied separately).
    pub beta: C64,
    /// Two-photon mismatch δ = Δ₁ − Δ₂ − λ₂ + λ₁.
    pub delta: f64,
    /// λ₁/|β| — how well detuned subspaces are frozen.
    pub selectivity: f64,
}

pub fn derive_params(cfg: &DriveConfig) -> Result<DerivedParams> {
    if cfg.delta1 == 0.0 || cfg.delta2 == 0.0 {
        return Err(Error::domain("derive_params: zero detuning"));
    }
    let lambda1 = cfg.g1 * cfg.g1 / cfg.delta1;
    let lambda2 = cfg.g2 * cfg.g2 / cfg.delta2;
    let dbar = 2.0 / (1.0 / cfg.delta1 + 1.0 / cfg.delta2);
    let beta = C64::new(cfg.g1 * cfg.g2 / dbar, 0.0);
    let delta = cfg.delta1 - cfg.delta2 - lambda2 + lambda1;
    let selectivity = if beta.norm() > 0.0 { lambda1.abs() / beta.norm() } else { f64::INFINITY };
    Ok(DerivedParams { lambda1, lambda2, dbar, beta, delta, selectivity })
}

/// Finds Δ₂ realizing a requested δ by fixed-point iteration on
/// Δ₂ = Δ₁ + λ₁ − g₂²/Δ₂ − δ.
pub fn solve_delta2(delta_target: f64, g2: f64, delta1: f64, g1: f64) -> Result<f64> {
    if delta1 == 0.0 {
        return Err(Error::domain("solve_delta2: zero Δ₁"));
    }
    let lambda1 = g1 * g1 / delta1;
    let base = delta1 + lambda1 - delta_target;
    let mut x = base;
    for _ in 0..200 {
        if x == 0.0 {
            return Err(Error::numerical("solve_delta2: iterate hit zero"));
        }
        let next = base - g2 * g2 / x;
        if (next - x).abs() <= 1e-13 * x.abs().max(1.0) {
            return Ok(next);
        }
        x = next;
    }
    Err(Error::numerical("solve_delta2: no convergence after 200 iterations"))
}

/// Eigenvalue k(n−k) of the ensemble exchange term on |D_{n,k}⟩.
pub fn exchange_eigenvalue(n: usize, k: usize) -> Result<i64> {
    if k > n {
        return Err(Error::domain(format!("exchange_eigenvalue: k={k} out of range for n={n}")));
    }
    Ok((k as i64) * ((n - k) as i64))
}

/// Which qubits the two drives address: `ensemble` sees drive 1, `extra`
/// sees drive 2, everything else is a spectator.
#[derive(Clone, Debug)]
pub struct AddressingSpec {
    pub n_qubits: usize,
    pub ensemble: Vec<usize>,
    pub extra: usize,
}

impl AddressingSpec {
    pub fn new(n_qubits: usize, ensemble: Vec<usize>, extra: usize) -> Result<Self> {
        if ensemble.is_empty() {
            return Err(Error::domain("addressing: empty ensemble"));
        }
        for &q in &ensemble {
            if q == 0 || q > n_qubits {
                return Err(Error::domain(format!("addressing: qubit {q} out of range")));
            }
            if q == extra {
                return Err(Error::domain("addressing: extra qubit overlaps ensemble"));
            }
        }
        if extra == 0 || extra > n_qubits {
            return Err(Error::domain(format!("addressing: extra qubit {extra} out of range")));
        }
        let mut seen = ensemble.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != ensemble.len() {
            return Err(Error::domain("addressing: duplicate ensemble qubit"));
        }
        Ok(Self { n_qubits, ensemble, extra })
    }

    /// Stage-n addressing on an N-qubit register: ensemble 1..n, extra n+1.
    pub fn protocol_stage(n_qubits: usize, n: usize) -> Result<Self> {
        if n + 1 > n_qubits {
            return Err(Error::domain(format!(
                "addressing: stage n={n} needs {} qubits, register has {n_qubits}",
                n + 1
            )));
        }
        Self::new(n_qubits, (1..=n).collect(), n + 1)
    }
}

fn bit_of(n_qubits: usize, q: usize) -> usize {
    n_qubits - q
}

/// Σ_{i≠j∈ensemble} σᵢ⁺σⱼ⁻ on the qubit register (boson-free).
pub fn exchange_operator(n_qubits: usize, ensemble: &[usize]) -> Array2<C64> {
    let dim = 1usize << n_qubits;
    let mut h = Array2::zeros((dim, dim));
    let one = C64::new(1.0, 0.0);
    for bits in 0..dim {
        for &i in ensemble {
            let bi = 1usize << bit_of(n_qubits, i);
            if bits & bi != 0 {
                continue;
            }
            for &j in ensemble {
                if i == j {
                    continue;
                }
                let bj = 1usize << bit_of(n_qubits, j);
                if bits & bj == 0 {
                    continue;
                }
                h[[bits ^ bi ^ bj, bits]] += one;
            }
        }
    }
    h
}

/// Σ_{i∈ensemble} σᵢ⁺σ_extra⁻ — the collective transfer operator.
fn drive_operator(spec: &AddressingSpec) -> Array2<C64> {
    let dim = 1usize << spec.n_qubits;
    let mut d = Array2::zeros((dim, dim));
    let bx = 1usize << bit_of(spec.n_qubits, spec.extra);
    let one = C64::new(1.0, 0.0);
    for bits in 0..dim {
        if bits & bx == 0 {
            continue;
        }
        for &i in &spec.ensemble {
            let bi = 1usize << bit_of(spec.n_qubits, i);
            if bits & bi != 0 {
                continue;
            }
            d[[bits ^ bi ^ bx, bits]] += one;
        }
    }
    d
}

fn diagonal_op(n_qubits: usize, boson_dim: usize, f: impl Fn(usize, usize) -> f64) -> Array2<C64> {
    let bd = boson_dim.max(1);
    let dim = (1usize << n_qubits) * bd;
    let mut h = Array2::zeros((dim, dim));
    for idx in 0..dim {
        h[[idx, idx]] = C64::new(f(idx / bd, idx % bd), 0.0);
    }
    h
}

/// n_extra on a register with or without boson mode.
pub fn extra_number_operator(n_qubits: usize, boson_dim: usize, extra: usize) -> Array2<C64> {
    let bx = 1usize << bit_of(n_qubits, extra);
    diagonal_op(n_qubits, boson_dim, |bits, _| if bits & bx != 0 { 1.0 } else { 0.0 })
}

/// Total excitation (qubits + boson quanta) — conserved by every model here.
pub fn total_excitation_operator(n_qubits: usize, boson_dim: usize) -> Array2<C64> {
    diagonal_op(n_qubits, boson_dim, |bits, b| (bits.count_ones() as usize + b) as f64)
}

/// Rotating-frame effective Hamiltonian
/// H̃ = λ₁·E_ens + (β e^{iφ}·Σᵢσᵢ⁻σ_x⁺ + h.c.) − δ·n_x.
pub fn build_effective_rotating(
    spec: &AddressingSpec,
    p: &DerivedParams,
    drive_phase: f64,
) -> Array2<C64> {
    let beta_eff = p.beta * C64::from_polar(1.0, drive_phase);
    let d = drive_operator(spec);
    let mut h = exchange_operator(spec.n_qubits, &spec.ensemble) * C64::new(p.lambda1, 0.0);
    // D = Σσᵢ⁺σx⁻ lowers the extra qubit; its dagger pairs with β_eff
    h = h + d.mapv(|z| z * beta_eff.conj()) + linalg::dagger(&d).mapv(|z| z * beta_eff);
    h = h + extra_number_operator(spec.n_qubits, 0, spec.extra) * C64::new(-p.delta, 0.0);
    h
}

/// Drive-free part of the rotating-frame Hamiltonian: λ₁·E_ens − δ·n_x.
pub fn effective_drive_free(spec: &AddressingSpec, p: &DerivedParams) -> Array2<C64> {
    exchange_operator(spec.n_qubits, &spec.ensemble) * C64::new(p.lambda1, 0.0)
        + extra_number_operator(spec.n_qubits, 0, spec.extra) * C64::new(-p.delta, 0.0)
}

/// Time-dependent effective Hamiltonian (drive clock explicit): applying
/// e^{iδtn_x} realigns its states with the rotating frame.
pub struct EffectiveLab {
    exchange: Array2<C64>,
    drive_dag: Array2<C64>, // β_eff·Σσᵢ⁻σx⁺
    delta: f64,
    n_qubits: usize,
    extra: usize,
}

impl EffectiveLab {
    pub fn new(spec: &AddressingSpec, p: &DerivedParams, drive_phase: f64) -> Self {
        let beta_eff = p.beta * C64::from_polar(1.0, drive_phase);
        let d = drive_operator(spec);
        Self {
            exchange: exchange_operator(spec.n_qubits, &spec.ensemble) * C64::new(p.lambda1, 0.0),
            drive_dag: linalg::dagger(&d).mapv(|z| z * beta_eff),
            delta: p.delta,
            n_qubits: spec.n_qubits,
            extra: spec.extra,
        }
    }

    /// H(t)·ψ with the drive oscillating as e^{−iδt}.
    pub fn apply(&self, t: f64, psi: &Array1<C64>) -> Array1<C64> {
        let ph = C64::from_polar(1.0, -self.delta * t);
        let drive_part = self.drive_dag.dot(psi) * ph;
        let mut out = self.exchange.dot(psi) + &drive_part;
        // h.c. term: conj phase on the daggered operator
        let dag_part = self.drive_dag.t().dot(&psi.mapv(|z| z.conj())).mapv(|z| z.conj()) * ph.conj();
        out += &dag_part;
        out
    }

    /// Diagonal frame realignment e^{+iδ·t·n_x} as per-basis phases.
    pub fn realign_phases(&self, t: f64) -> Array1<C64> {
        let bx = 1usize << bit_of(self.n_qubits, self.extra);
        Array1::from_iter((0..(1usize << self.n_qubits)).map(|bits| {
            if bits & bx != 0 {
                C64::from_polar(1.0, self.delta * t)
            } else {
                C64::new(1.0, 0.0)
            }
        }))
    }
}

fn sideband_operator(n_qubits: usize, boson_dim: usize, qubits: &[usize]) -> Array2<C64> {
    // Σ_{q} σ_q⁺·a (annihilate one bus quantum, excite one addressed qubit)
    let bd = boson_dim;
    let dim = (1usize << n_qubits) * bd;
    let mut s = Array2::zeros((dim, dim));
    for bits in 0..(1usize << n_qubits) {
        for b in 1..bd {
            let col = bits * bd + b;
            for &q in qubits {
                let bq = 1usize << bit_of(n_qubits, q);
                if bits & bq != 0 {
                    continue;
                }
                let row = (bits ^ bq) * bd + (b - 1);
                s[[row, col]] += C64::new((b as f64).sqrt(), 0.0);
            }
        }
    }
    s
}

/// Static-frame full-bus Hamiltonian
/// H' = g₁Σᵢ(σᵢ⁺a + h.c.) + (g₂e^{iφ}σ_x⁺a + h.c.) − Δ₁a†a − (Δ₁−Δ₂)n_x.
pub fn build_full_static(
    spec: &AddressingSpec,
    cfg: &DriveConfig,
    boson_dim: usize,
    drive_phase: f64,
) -> Result<Array2<C64>> {
    if boson_dim < 2 {
        return Err(Error::domain("full model: boson truncation must be ≥ 2"));
    }
    let s1 = sideband_operator(spec.n_qubits, boson_dim, &spec.ensemble);
    let s2 = sideband_operator(spec.n_qubits, boson_dim, &[spec.extra]);
    let g2ph = C64::from_polar(cfg.g2, drive_phase);
    let mut h = s1.mapv(|z| z * cfg.g1) + linalg::dagger(&s1).mapv(|z| z * cfg.g1);
    h = h + s2.mapv(|z| z * g2ph) + linalg::dagger(&s2).mapv(|z| z * g2ph.conj());
    let bd = boson_dim;
    h = h + diagonal_op(spec.n_qubits, bd, |_, b| -(cfg.delta1) * b as f64);
    h = h + extra_number_operator(spec.n_qubits, bd, spec.extra)
        * C64::new(-(cfg.delta1 - cfg.delta2), 0.0);
    Ok(h)
}

/// Generator W of the phase unwind e^{+iWt} aligning static-frame full-bus
/// states with the effective model's rotating frame (dispersive book-keeping:
/// exchange and Stark phases plus the static-frame diagonal).
pub fn full_unwind_generator(
    spec: &AddressingSpec,
    cfg: &DriveConfig,
    boson_dim: usize,
) -> Result<Array2<C64>> {
    if boson_dim < 2 {
        return Err(Error::domain("full model: boson truncation must be ≥ 2"));
    }
    let p = derive_params(cfg)?;
    let bd = boson_dim;
    let dim = (1usize << spec.n_qubits) * bd;
    let mut w = Array2::zeros((dim, dim));
    // λ₁·E over the ensemble, tensored with the boson identity
    let ex = exchange_operator(spec.n_qubits, &spec.ensemble);
    for bits in 0..(1usize << spec.n_qubits) {
        for bits2 in 0..(1usize << spec.n_qubits) {
            let v = ex[[bits, bits2]];
            if v != C64::new(0.0, 0.0) {
                for b in 0..bd {
                    w[[bits * bd + b, bits2 * bd + b]] += v * p.lambda1;
                }
            }
        }
    }
    let mut ens_mask = 0usize;
    for &q in &spec.ensemble {
        ens_mask |= 1usize << bit_of(spec.n_qubits, q);
    }
    let bx = 1usize << bit_of(spec.n_qubits, spec.extra);
    w = w + diagonal_op(spec.n_qubits, bd, |bits, b| {
        let n_ens = (bits & ens_mask).count_ones() as f64;
        let n_x = if bits & bx != 0 { 1.0 } else { 0.0 };
        p.lambda1 * n_ens + p.lambda2 * n_x
            - cfg.delta1 * b as f64
            - (cfg.delta1 - cfg.delta2) * n_x
    });
    Ok(w)
}

/// Lab-frame full-bus Hamiltonian with explicit e^{+iΔt} drive phases;
/// e^{+i(Δ₁a†a + (Δ₁−Δ₂)n_x)t} realigns its states with the static frame.
pub struct FullLab {
    s1: Array2<C64>,
    s2: Array2<C64>,
    g1: f64,
    g2ph: C64,
    delta1: f64,
    delta2: f64,
    n_qubits: usize,
    boson_dim: usize,
    extra: usize,
}

impl FullLab {
    pub fn new(
        spec: &AddressingSpec,
        cfg: &DriveConfig,
        boson_dim: usize,
        drive_phase: f64,
    ) -> Result<Self> {
        if boson_dim < 2 {
            return Err(Error::domain("full model: boson truncation must be ≥ 2"));
        }
        Ok(Self {
            s1: sideband_operator(spec.n_qubits, boson_dim, &spec.ensemble),
            s2: sideband_operator(spec.n_qubits, boson_dim, &[spec.extra]),
            g1: cfg.g1,
            g2ph: C64::from_polar(cfg.g2, drive_phase),
            delta1: cfg.delta1,
            delta2: cfg.delta2,
            n_qubits: spec.n_qubits,
            boson_dim,
            extra: spec.extra,
        })
    }

    pub fn apply(&self, t: f64, psi: &Array1<C64>) -> Array1<C64> {
        let ph1 = C64::from_polar(self.g1, self.delta1 * t);
        let ph2 = self.g2ph * C64::from_polar(1.0, self.delta2 * t);
        let up = self.s1.dot(psi) * ph1 + self.s2.dot(psi) * ph2;
        // (g·S)† ψ computed from the transpose to avoid storing daggered copies
        let down = self.s1.t().dot(&psi.mapv(|z| z.conj())).mapv(|z| z.conj()) * ph1.conj()
            + self.s2.t().dot(&psi.mapv(|z| z.conj())).mapv(|z| z.conj()) * ph2.conj();
        up + down
    }

    /// Diagonal phases e^{+i(Δ₁·b + (Δ₁−Δ₂)·n_x)t} mapping lab → static frame.
    pub fn realign_phases(&self, t: f64) -> Array1<C64> {
        let bd = self.boson_dim;
        let bx = 1usize << bit_of(self.n_qubits, self.extra);
        Array1::from_iter((0..(1usize << self.n_qubits) * bd).map(|idx| {
            let bits = idx / bd;
            let b = (idx % bd) as f64;
            let nx = if bits & bx != 0 { 1.0 } else { 0.0 };
            C64::from_polar(1.0, (self.delta1 * b + (self.delta1 - self.delta2) * nx) * t)
        }))
    }
}

/// exp(−i·H·t) with a Hermiticity gate.
pub fn step_propagator(h: &Array2<C64>, t: f64) -> Result<Array2<C64>> {
    if !is_hermitian(h, 1e-12) {
        return Err(Error::domain("propagate: Hamiltonian is not Hermitian"));
    }
    Ok(expm(&h.mapv(|z| z * C64::new(0.0, -t))))
}

pub fn apply_unitary(u: &Array2<C64>, psi: &StateVector) -> Result<StateVector> {
    if u.ncols() != psi.dim() {
        return Err(Error::shape("apply_unitary: dimension mismatch"));
    }
    StateVector::from_amps(psi.n_qubits, psi.boson_dim, u.dot(&psi.amps))
}

/// Constant-H propagation by exact exponential.
pub fn propagate_const(h: &Array2<C64>, psi: &StateVector, t: f64) -> Result<StateVector> {
    apply_unitary(&step_propagator(h, t)?, psi)
}

/// Classic fixed-step RK4 for i∂ₜψ = H(t)ψ given ψ ↦ H(t)ψ.
pub fn propagate_rk4(
    h_apply: &dyn Fn(f64, &Array1<C64>) -> Array1<C64>,
    psi0: &Array1<C64>,
    t_total: f64,
    dt: f64,
) -> Array1<C64> {
    let mi = C64::new(0.0, -1.0);
    let steps = (t_total / dt).ceil().max(1.0) as usize;
    let h = t_total / steps as f64;
    let mut psi = psi0.clone();
    let mut t = 0.0;
    for _ in 0..steps {
        let k1 = h_apply(t, &psi).mapv(|z| z * mi);
        let k2 = h_apply(t + 0.5 * h, &(&psi + &k1.mapv(|z| z * (0.5 * h)))).mapv(|z| z * mi);
        let k3 = h_apply(t + 0.5 * h, &(&psi + &k2.mapv(|z| z * (0.5 * h)))).mapv(|z| z * mi);
        let k4 = h_apply(t + h, &(&psi + &k3.mapv(|z| z * h))).mapv(|z| z * mi);
        psi = &psi
            + &(k1 + k2.mapv(|z| z * 2.0) + k3.mapv(|z| z * 2.0) + k4).mapv(|z| z * (h / 6.0));
        t += h;
    }
    psi
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;
    use crate::state::{dicke_state, fidelity, StateVector};
    use approx::assert_abs_diff_eq;

    fn table2_cfg(delta2: f64) -> DriveConfig {
        DriveConfig { g1: 1.0, g2: 0.1, delta1: 20.0, delta2 }
    }

    #[test]
    fn derived_params_reference_row() {
        let p = derive_params(&table2_cfg(20.0495)).unwrap();
        assert_abs_diff_eq!(p.lambda1, 0.05, epsilon = 1e-15);
        assert!(p.delta.abs() <= 1e-4, "δ = {}", p.delta);
        assert_abs_diff_eq!(p.beta.re, 0.0049938, epsilon = 1e-6);
        assert!((p.selectivity - 10.0).abs() < 0.2);
    }

    #[test]
    fn derived_params_symmetric_drives() {
        let p = derive_params(&DriveConfig { g1: 0.3, g2: 0.3, delta1: 7.0, delta2: 7.0 }).unwrap();
        assert_abs_diff_eq!(p.delta, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.lambda1, p.lambda2, epsilon = 1e-15);
        assert!(derive_params(&DriveConfig { g1: 1.0, g2: 1.0, delta1: 0.0, delta2: 1.0 }).is_err());
    }

    #[test]
    fn delta2_fixed_point_matches_reference_rows() {
        let lambda1 = 0.05;
        for (target, want) in [
            (0.0, 20.0495),
            (lambda1, 19.9995),
            (-lambda1, 20.0995),
            (2.0 * lambda1, 19.9495),
            (-2.0 * lambda1, 20.1495),
        ] {
            let d2 = solve_delta2(target, 0.1, 20.0, 1.0).unwrap();
            assert!((d2 - want).abs() < 5e-5, "target {target}: got {d2}, want {want}");
            let p = derive_params(&table2_cfg(d2)).unwrap();
            assert!((p.delta - target).abs() < 1e-9);
        }
    }

    #[test]
    fn exchange_spectrum_on_dicke_states() {
        for n in 1..=5usize {
            let ens: Vec<usize> = (1..=n).collect();
            let ex = exchange_operator(n, &ens);
            for k in 0..=n {
                let d = dicke_state(n, k).unwrap();
                let out = ex.dot(&d.amps);
                let ev = exchange_eigenvalue(n, k).unwrap() as f64;
                for i in 0..out.len() {
                    assert!(
                        (out[i] - d.amps[i] * ev).norm() < 1e-12,
                        "n={n} k={k}: exchange eigenvalue mismatch"
                    );
                }
            }
        }
    }

    #[test]
    fn effective_hamiltonian_structure() {
        let spec = AddressingSpec::protocol_stage(3, 2).unwrap();
        let d2 = solve_delta2(0.05, 0.1, 20.0, 1.0).unwrap(); // δ = λ₁
        let p = derive_params(&table2_cfg(d2)).unwrap();
        let h = build_effective_rotating(&spec, &p, DRIVE_PHASE);
        assert!(is_hermitian(&h, 1e-14));
        let n_tot = total_excitation_operator(3, 0);
        let comm = h.dot(&n_tot) - n_tot.dot(&h);
        assert!(max_abs_diff(&comm, &Array2::zeros((8, 8))) < 1e-14);

        // δ = λ₁ makes |D_{2,1}⟩|e⟩ and |D_{2,2}⟩|g⟩ degenerate without drive
        let h0 = effective_drive_free(&spec, &p);
        let mut src = StateVector::zeros(3, 0).unwrap();
        let r = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        src.amps[0b011] = r; // |ge⟩|e⟩ part of |D_{2,1}⟩|e⟩
        src.amps[0b101] = r;
        let mut tgt = StateVector::zeros(3, 0).unwrap();
        tgt.amps[0b110] = C64::new(1.0, 0.0); // |D_{2,2}⟩|g⟩
        let e_src = src.inner(&StateVector::from_amps(3, 0, h0.dot(&src.amps)).unwrap()).unwrap();
        let e_tgt = tgt.inner(&StateVector::from_amps(3, 0, h0.dot(&tgt.amps)).unwrap()).unwrap();
        assert!((e_src - e_tgt).norm() < 1e-12);
    }

    #[test]
    fn resonant_two_level_flop() {
        // single ensemble qubit, exact resonance: full transfer at t = π/(2β)
        let d2 = solve_delta2(0.0, 0.1, 20.0, 1.0).unwrap();
        let p = derive_params(&table2_cfg(d2)).unwrap();
        let spec = AddressingSpec::protocol_stage(2, 1).unwrap();
        let h = build_effective_rotating(&spec, &p, DRIVE_PHASE);
        let mut src = StateVector::zeros(2, 0).unwrap();
        src.amps[0b01] = C64::new(1.0, 0.0); // |g⟩|e⟩
        let beta = p.beta.norm();

        let full = propagate_const(&h, &src, std::f64::consts::FRAC_PI_2 / beta).unwrap();
        let mut tgt = StateVector::zeros(2, 0).unwrap();
        tgt.amps[0b10] = C64::new(1.0, 0.0); // |e⟩|g⟩
        assert!(fidelity(&full, &tgt).unwrap() > 1.0 - 1e-10);

        let half = propagate_const(&h, &src, std::f64::consts::FRAC_PI_4 / beta).unwrap();
        let p_src = half.amps[0b01].norm_sqr();
        let p_tgt = half.amps[0b10].norm_sqr();
        assert_abs_diff_eq!(p_src, 0.5, epsilon = 1e-10);
        assert_abs_diff_eq!(p_tgt, 0.5, epsilon = 1e-10);
        // drive phase −π/2 makes the transfer amplitude real positive
        let phase_free = half.amps[0b10] * half.amps[0b01].conj();
        assert!(phase_free.im.abs() < 1e-10);
        assert!(half.amps[0b10].re > 0.0);
    }

    #[test]
    fn zero_hamiltonian_is_identity_evolution() {
        let h: Array2<C64> = Array2::zeros((4, 4));
        let psi = dicke_state(2, 1).unwrap();
        let out = propagate_const(&h, &psi, 3.7).unwrap();
        assert!(fidelity(&out, &psi).unwrap() > 1.0 - 1e-14);
    }

    #[test]
    fn non_hermitian_rejected() {
        let mut h: Array2<C64> = Array2::zeros((2, 2));
        h[[0, 1]] = C64::new(1.0, 0.0);
        assert!(step_propagator(&h, 1.0).is_err());
    }

    #[test]
    fn effective_lab_vs_rotating_frames_agree() {
        let d2 = solve_delta2(0.05, 0.1, 20.0, 1.0).unwrap(); // off-resonance case
        let p = derive_params(&table2_cfg(d2)).unwrap();
        let spec = AddressingSpec::protocol_stage(3, 2).unwrap();
        let h_rot = build_effective_rotating(&spec, &p, DRIVE_PHASE);
        let lab = EffectiveLab::new(&spec, &p, DRIVE_PHASE);

        let mut psi0 = StateVector::zeros(3, 0).unwrap();
        let r = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        psi0.amps[0b011] = r;
        psi0.amps[0b101] = r;
        let t = 40.0;
        let rot = propagate_const(&h_rot, &psi0, t).unwrap();
        let lab_out = propagate_rk4(&|tt, v| lab.apply(tt, v), &psi0.amps, t, 0.01 / p.lambda1);
        let aligned = &lab_out * &lab.realign_phases(t);
        let mut err = 0.0f64;
        for i in 0..aligned.len() {
            err = err.max((aligned[i] - rot.amps[i]).norm());
        }
        assert!(err < 1e-8, "frame mismatch {err}");
    }

    #[test]
    fn full_static_conserves_and_freezes_ground() {
        let cfg = table2_cfg(20.0495);
        let spec = AddressingSpec::protocol_stage(2, 1).unwrap();
        let h = build_full_static(&spec, &cfg, 4, DRIVE_PHASE).unwrap();
        assert!(is_hermitian(&h, 1e-14));
        let n_tot = total_excitation_operator(2, 4);
        let comm = h.dot(&n_tot) - n_tot.dot(&h);
        assert!(max_abs_diff(&comm, &Array2::zeros(h.dim())) < 1e-13);

        let ground = StateVector::ground(2, 4).unwrap();
        let out = propagate_const(&h, &ground, 100.0).unwrap();
        assert!(fidelity(&out, &ground).unwrap() > 1.0 - 1e-10);
        assert!(build_full_static(&spec, &cfg, 1, DRIVE_PHASE).is_err());
    }

    #[test]
    fn full_lab_vs_static_frames_agree() {
        let cfg = table2_cfg(20.0495);
        let spec = AddressingSpec::protocol_stage(2, 1).unwrap();
        let h_static = build_full_static(&spec, &cfg, 4, DRIVE_PHASE).unwrap();
        let lab = FullLab::new(&spec, &cfg, 4, DRIVE_PHASE).unwrap();
        let mut psi0 = StateVector::zeros(2, 4).unwrap();
        let idx = psi0.index(0b01, 0);
        psi0.amps[idx] = C64::new(1.0, 0.0); // |g e⟩⊗|0⟩
        let t = 0.5;
        let st = propagate_const(&h_static, &psi0, t).unwrap();
        let lab_out = propagate_rk4(&|tt, v| lab.apply(tt, v), &psi0.amps, t, 2.5e-5);
        let aligned = &lab_out * &lab.realign_phases(t);
        let mut err = 0.0f64;
        for i in 0..aligned.len() {
            err = err.max((aligned[i] - st.amps[i]).norm());
        }
        assert!(err < 1e-8, "full-model frame mismatch {err}");
        let norm_drift = (lab_out.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt() - 1.0).abs();
        assert!(norm_drift < 1e-10);
    }

    #[test]
    fn dispersive_warning_fires_when_marginal() {
        assert!(table2_cfg(20.0495).dispersive_warning().is_none());
        let bad = DriveConfig { g1: 1.0, g2: 0.1, delta1: 5.0, delta2: 20.0 };
        assert!(bad.dispersive_warning().is_some());
    }

    #[test]
    fn addressing_validation() {
        assert!(AddressingSpec::new(3, vec![1, 2], 3).is_ok());
        assert!(AddressingSpec::new(3, vec![1, 2], 2).is_err());
        assert!(AddressingSpec::new(3, vec![], 3).is_err());
        assert!(AddressingSpec::new(3, vec![1, 1], 3).is_err());
        assert!(AddressingSpec::protocol_stage(3, 3).is_err());
    }
}
