//! Compilation of a symmetric target into the staircase superposition.
//!
//! A single unconditional rotation on qubit N followed by a chain of
//! controlled rotations (each controlled by its right neighbour, firing on
//! |e⟩) prepares Σ_k c_k|(k)⟩ from |g…g⟩, where |(k)⟩ has the k last qubits
//! excited. Pair m carries amplitudes (α_m, β_m) built from the tail norms
//! of c, and the telescoping product β₀…β_{m−1}α_m reproduces c_m exactly.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::state::{StateVector, SymmetricCoefficients};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RotationPair {
    pub alpha: C64,
    pub beta: C64,
}

impl RotationPair {
    pub fn identity() -> Self {
        Self { alpha: C64::new(1.0, 0.0), beta: C64::new(0.0, 0.0) }
    }

    pub fn is_identity(&self) -> bool {
        (self.alpha - C64::new(1.0, 0.0)).norm() < 1e-12 && self.beta.norm() < 1e-12
    }

    /// |g⟩ ↦ α|g⟩ + β|e⟩, |e⟩ ↦ −β̄|g⟩ + ᾱ|e⟩.
    pub fn unitary(&self) -> [[C64; 2]; 2] {
        [[self.alpha, -self.beta.conj()], [self.beta, self.alpha.conj()]]
    }

    pub fn unitarity_defect(&self) -> f64 {
        (self.alpha.norm_sqr() + self.beta.norm_sqr() - 1.0).abs()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Gate {
    Rot { target: usize, pair: RotationPair },
    CRot { control: usize, target: usize, pair: RotationPair },
}

impl Gate {
    pub fn pair(&self) -> &RotationPair {
        match self {
            Gate::Rot { pair, .. } => pair,
            Gate::CRot { pair, .. } => pair,
        }
    }
}

#[derive(Clone, Debug)]
pub struct EncodingCircuit {
    pub n_qubits: usize,
    pub gates: Vec<Gate>,
}

#[derive(Serialize, Deserialize)]
struct GateWire {
    kind: String,
    control: Option<usize>,
    target: usize,
    alpha: [f64; 2],
    beta: [f64; 2],
}

/// Tail norms T_m = √(Σ_{k≥m}|c_k|²) → rotation pairs, identity-padded to N.
///
/// α_m = c_m/T_m and β_m = T_{m+1}/T_m (real positive) except the final
/// live pair, which takes β = c_N/T_{N−1} so the full product β₀…β_{N−1}
/// lands on c_N with its phase.
pub fn staircase_decompose(c: &SymmetricCoefficients) -> Vec<RotationPair> {
    let n = c.n_qubits();
    let mut tails = vec![0.0f64; n + 2];
    for m in (0..=n).rev() {
        tails[m] = tails[m + 1] + c.get(m).norm_sqr();
    }
    let mut pairs = Vec::with_capacity(n);
    for m in 0..n {
        let t_m = tails[m].sqrt();
        if t_m < 1e-15 {
            pairs.push(RotationPair::identity());
            continue;
        }
        let alpha = c.get(m) / t_m;
        let beta = if m == n - 1 {
            c.get(n) / t_m
        } else {
            C64::new(tails[m + 1].sqrt() / t_m, 0.0)
        };
        pairs.push(RotationPair { alpha, beta });
    }
    pairs
}

/// Lays out pair m as a rotation of qubit N−m, the first unconditional and
/// the rest controlled by the right neighbour N−m+1.
pub fn build_circuit(pairs: &[RotationPair], n: usize) -> Result<EncodingCircuit> {
    if pairs.len() > n {
        return Err(Error::domain(format!(
            "build_circuit: {} pairs exceed {n} qubits",
            pairs.len()
        )));
    }
    for (m, p) in pairs.iter().enumerate() {
        if p.unitarity_defect() > 1e-12 {
            return Err(Error::domain(format!(
                "build_circuit: pair {m} is not unitary (defect {:.2e})",
                p.unitarity_defect()
            )));
        }
    }
    let gates = pairs
        .iter()
        .enumerate()
        .map(|(m, &pair)| {
            if m == 0 {
                Gate::Rot { target: n, pair }
            } else {
                Gate::CRot { control: n - m + 1, target: n - m, pair }
            }
        })
        .collect();
    Ok(EncodingCircuit { n_qubits: n, gates })
}

pub fn apply_circuit(circuit: &EncodingCircuit, psi0: &StateVector) -> Result<StateVector> {
    if psi0.n_qubits != circuit.n_qubits {
        return Err(Error::shape(format!(
            "apply_circuit: circuit is for {} qubits, state has {}",
            circuit.n_qubits, psi0.n_qubits
        )));
    }
    let mut psi = psi0.clone();
    for gate in &circuit.gates {
        match gate {
            Gate::Rot { target, pair } => psi.apply_single_qubit(*target, &pair.unitary())?,
            Gate::CRot { control, target, pair } => {
                psi.apply_controlled(*control, *target, &pair.unitary())?
            }
        }
    }
    Ok(psi)
}

/// Full pipeline: decompose, lay out, apply to |g…g⟩.
pub fn encode(c: &SymmetricCoefficients) -> Result<(EncodingCircuit, StateVector)> {
    let pairs = staircase_decompose(c);
    let circuit = build_circuit(&pairs, c.n_qubits())?;
    let out = apply_circuit(&circuit, &StateVector::ground(c.n_qubits(), 0)?)?;
    Ok((circuit, out))
}

impl EncodingCircuit {
    pub fn to_json(&self) -> String {
        let wire: Vec<GateWire> = self
            .gates
            .iter()
            .map(|g| match g {
                Gate::Rot { target, pair } => GateWire {
                    kind: "rot".into(),
                    control: None,
                    target: *target,
                    alpha: [pair.alpha.re, pair.alpha.im],
                    beta: [pair.beta.re, pair.beta.im],
                },
                Gate::CRot { control, target, pair } => GateWire {
                    kind: "crot".into(),
                    control: Some(*control),
                    target: *target,
                    alpha: [pair.alpha.re, pair.alpha.im],
                    beta: [pair.beta.re, pair.beta.im],
                },
            })
            .collect();
        serde_json::to_string_pretty(&wire).expect("circuit serialization cannot fail")
    }

    pub fn from_json(s: &str, n_qubits: usize) -> Result<Self> {
        let wire: Vec<GateWire> =
            serde_json::from_str(s).map_err(|e| Error::shape(format!("circuit JSON: {e}")))?;
        let gates = wire
            .iter()
            .map(|w| {
                let pair = RotationPair {
                    alpha: C64::new(w.alpha[0], w.alpha[1]),
                    beta: C64::new(w.beta[0], w.beta[1]),
                };
                match (w.kind.as_str(), w.control) {
                    ("rot", None) => Ok(Gate::Rot { target: w.target, pair }),
                    ("crot", Some(c)) => Ok(Gate::CRot { control: c, target: w.target, pair }),
                    _ => Err(Error::shape(format!("circuit JSON: bad gate kind {:?}", w.kind))),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { n_qubits, gates })
    }
}
