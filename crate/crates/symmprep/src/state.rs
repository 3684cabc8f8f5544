//! Register states, Dicke states, and symmetric superpositions.
//!
//! Basis ordering is fixed globally: qubit 1 is the most significant bit,
//! bit value 0 = |g⟩ and 1 = |e⟩, and the optional boson index is least
//! significant. A `boson_dim` of 0 means no bus mode is attached. All rates
//! elsewhere in the crate are in units of g₁ and times in 1/g₁.

use ndarray::Array1;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result, MAX_QUBITS};

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// Normalization d_{N,k} = √binomial(N,k) of the Dicke state |D_{N,k}⟩.
pub fn dicke_norm(n: usize, k: usize) -> Result<f64> {
    if k > n {
        return Err(Error::domain(format!("dicke_norm: k={k} out of range for n={n}")));
    }
    Ok(binomial(n, k).sqrt())
}

/// Branch amplitudes (a, b) with |D_{N,k}⟩ = a·|D_{N−1,k−1}⟩|e⟩ + b·|D_{N−1,k}⟩|g⟩.
///
/// Edges k=0 and k=N return a vanishing branch. a²+b²=1 to machine precision.
pub fn recursion_amplitudes(n: usize, k: usize) -> Result<(f64, f64)> {
    if n == 0 || k > n {
        return Err(Error::domain(format!("recursion_amplitudes: invalid (n={n}, k={k})")));
    }
    let d = binomial(n, k).sqrt();
    let a = if k == 0 { 0.0 } else { binomial(n - 1, k - 1).sqrt() / d };
    let b = if k == n { 0.0 } else { binomial(n - 1, k).sqrt() / d };
    Ok((a, b))
}

/// Coefficients c_k of a symmetric target Σ_k c_k |D_{N,k}⟩.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricCoefficients {
    c: Vec<C64>,
}

impl SymmetricCoefficients {
    /// Strictly renormalizes; rejects inputs whose norm is off by more than 1e-6.
    pub fn new(c: Vec<C64>) -> Result<Self> {
        if c.len() < 2 {
            return Err(Error::domain("coefficients: need N ≥ 1 (length ≥ 2)"));
        }
        if c.len() - 1 > MAX_QUBITS {
            return Err(Error::domain(format!(
                "coefficients: N={} exceeds the qubit cap {MAX_QUBITS}",
                c.len() - 1
            )));
        }
        let norm = c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-6 {
            return Err(Error::domain(format!(
                "coefficients: norm {norm:.9} differs from 1 by more than 1e-6"
            )));
        }
        Ok(Self { c: c.into_iter().map(|z| z / norm).collect() })
    }

    /// Accepts any nonzero vector and normalizes it.
    pub fn normalized(c: Vec<C64>) -> Result<Self> {
        let norm = c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::domain("coefficients: zero vector"));
        }
        Self::new(c.into_iter().map(|z| z / norm).collect())
    }

    pub fn dicke(n: usize, k: usize) -> Result<Self> {
        if k > n {
            return Err(Error::domain(format!("dicke target: k={k} out of range for n={n}")));
        }
        let mut c = vec![C64::new(0.0, 0.0); n + 1];
        c[k] = C64::new(1.0, 0.0);
        Self::new(c)
    }

    pub fn w_state(n: usize) -> Result<Self> {
        Self::dicke(n, 1)
    }

    pub fn ghz(n: usize) -> Result<Self> {
        let mut c = vec![C64::new(0.0, 0.0); n + 1];
        let r = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        c[0] = r;
        c[n] = r;
        Self::new(c)
    }

    pub fn n_qubits(&self) -> usize {
        self.c.len() - 1
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.c
    }

    pub fn get(&self, k: usize) -> C64 {
        self.c[k]
    }
}

/// Dense state of `n_qubits` two-level systems with an optional boson mode.
#[derive(Clone, Debug)]
pub struct StateVector {
    pub n_qubits: usize,
    /// Fock truncation of the attached bus mode; 0 when absent.
    pub boson_dim: usize,
    pub amps: Array1<C64>,
}

#[derive(Serialize, Deserialize)]
struct StateVectorWire {
    n_qubits: usize,
    boson_dim: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl StateVector {
    pub fn dim_for(n_qubits: usize, boson_dim: usize) -> usize {
        (1usize << n_qubits) * boson_dim.max(1)
    }

    pub fn zeros(n_qubits: usize, boson_dim: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::domain(format!(
                "state: n_qubits={n_qubits} outside 1..={MAX_QUBITS}"
            )));
        }
        Ok(Self {
            n_qubits,
            boson_dim,
            amps: Array1::zeros(Self::dim_for(n_qubits, boson_dim)),
        })
    }

    /// |g…g⟩ (⊗|0⟩ when a boson mode is attached).
    pub fn ground(n_qubits: usize, boson_dim: usize) -> Result<Self> {
        let mut s = Self::zeros(n_qubits, boson_dim)?;
        s.amps[0] = C64::new(1.0, 0.0);
        Ok(s)
    }

    pub fn from_amps(n_qubits: usize, boson_dim: usize, amps: Array1<C64>) -> Result<Self> {
        if amps.len() != Self::dim_for(n_qubits, boson_dim) {
            return Err(Error::shape(format!(
                "state: amplitude vector length {} does not match register ({n_qubits} qubits, boson_dim {boson_dim})",
                amps.len()
            )));
        }
        Ok(Self { n_qubits, boson_dim, amps })
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    /// Flat index of |bits⟩⊗|b⟩; `bits` uses qubit 1 as most significant bit.
    pub fn index(&self, qubit_bits: usize, boson: usize) -> usize {
        qubit_bits * self.boson_dim.max(1) + boson
    }

    /// Bit position (from least significant) of 1-based qubit `q`.
    pub fn bit_of_qubit(&self, q: usize) -> usize {
        self.n_qubits - q
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            self.amps.mapv_inplace(|z| z / n);
        }
    }

    pub fn inner(&self, other: &Self) -> Result<C64> {
        if self.n_qubits != other.n_qubits || self.boson_dim != other.boson_dim {
            return Err(Error::shape("inner: register shapes differ"));
        }
        Ok(self
            .amps
            .iter()
            .zip(other.amps.iter())
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Mean total excitation: qubit excitations plus boson quanta.
    pub fn mean_excitation(&self) -> f64 {
        let bd = self.boson_dim.max(1);
        self.amps
            .iter()
            .enumerate()
            .map(|(i, z)| {
                let bits = i / bd;
                let b = i % bd;
                z.norm_sqr() * (bits.count_ones() as usize + if self.boson_dim > 0 { b } else { 0 }) as f64
            })
            .sum()
    }

    /// Applies a 2×2 unitary u (rows/cols ordered |g⟩,|e⟩) on one qubit.
    pub fn apply_single_qubit(&mut self, qubit: usize, u: &[[C64; 2]; 2]) -> Result<()> {
        if qubit == 0 || qubit > self.n_qubits {
            return Err(Error::domain(format!("apply_single_qubit: qubit {qubit} out of range")));
        }
        let mask = 1usize << self.bit_of_qubit(qubit);
        let bd = self.boson_dim.max(1);
        let dim = self.dim();
        for i in 0..dim {
            let bits = i / bd;
            if bits & mask != 0 {
                continue;
            }
            let j = i + mask * bd;
            let (g, e) = (self.amps[i], self.amps[j]);
            self.amps[i] = u[0][0] * g + u[0][1] * e;
            self.amps[j] = u[1][0] * g + u[1][1] * e;
        }
        Ok(())
    }

    /// Applies u on `target` only where `control` is |e⟩.
    pub fn apply_controlled(&mut self, control: usize, target: usize, u: &[[C64; 2]; 2]) -> Result<()> {
        if control == 0 || control > self.n_qubits || control == target {
            return Err(Error::domain(format!("apply_controlled: bad control {control}")));
        }
        if target == 0 || target > self.n_qubits {
            return Err(Error::domain(format!("apply_controlled: bad target {target}")));
        }
        let cmask = 1usize << self.bit_of_qubit(control);
        let tmask = 1usize << self.bit_of_qubit(target);
        let bd = self.boson_dim.max(1);
        let dim = self.dim();
        for i in 0..dim {
            let bits = i / bd;
            if bits & cmask == 0 || bits & tmask != 0 {
                continue;
            }
            let j = i + tmask * bd;
            let (g, e) = (self.amps[i], self.amps[j]);
            self.amps[i] = u[0][0] * g + u[0][1] * e;
            self.amps[j] = u[1][0] * g + u[1][1] * e;
        }
        Ok(())
    }

    /// ⟨D_{n_block,k} (qubits 1..n_block), rest_bits (qubits n_block+1..N), boson b |ψ⟩.
    pub fn dicke_block_overlap(
        &self,
        n_block: usize,
        k: usize,
        rest_bits: usize,
        boson: usize,
    ) -> Result<C64> {
        if n_block == 0 || n_block > self.n_qubits || k > n_block {
            return Err(Error::domain(format!(
                "dicke_block_overlap: invalid block (n={n_block}, k={k})"
            )));
        }
        let rest_width = self.n_qubits - n_block;
        if rest_bits >> rest_width != 0 {
            return Err(Error::domain("dicke_block_overlap: rest_bits wider than remaining qubits"));
        }
        let d = binomial(n_block, k).sqrt();
        let mut acc = C64::new(0.0, 0.0);
        for s in 0..(1usize << n_block) {
            if (s as u32).count_ones() as usize != k {
                continue;
            }
            let bits = (s << rest_width) | rest_bits;
            acc += self.amps[self.index(bits, boson)];
        }
        Ok(acc / d)
    }

    /// Tensors a ground boson mode |0⟩ onto a qubit-only state.
    pub fn attach_boson(&self, boson_dim: usize) -> Result<Self> {
        if self.boson_dim != 0 {
            return Err(Error::domain("attach_boson: state already has a boson mode"));
        }
        if boson_dim < 2 {
            return Err(Error::domain("attach_boson: need boson_dim ≥ 2"));
        }
        let mut s = Self::zeros(self.n_qubits, boson_dim)?;
        for (bits, z) in self.amps.iter().enumerate() {
            s.amps[bits * boson_dim] = *z;
        }
        Ok(s)
    }

    /// Unnormalized qubit-only component at boson index b.
    pub fn project_boson(&self, b: usize) -> Result<Self> {
        if self.boson_dim == 0 {
            return Err(Error::domain("project_boson: no boson mode attached"));
        }
        if b >= self.boson_dim {
            return Err(Error::domain("project_boson: index beyond truncation"));
        }
        let mut s = Self::zeros(self.n_qubits, 0)?;
        for bits in 0..(1usize << self.n_qubits) {
            s.amps[bits] = self.amps[bits * self.boson_dim + b];
        }
        Ok(s)
    }

    pub fn to_json(&self) -> String {
        let wire = StateVectorWire {
            n_qubits: self.n_qubits,
            boson_dim: self.boson_dim,
            re: self.amps.iter().map(|z| z.re).collect(),
            im: self.amps.iter().map(|z| z.im).collect(),
        };
        serde_json::to_string_pretty(&wire).expect("state serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let wire: StateVectorWire =
            serde_json::from_str(s).map_err(|e| Error::shape(format!("state JSON: {e}")))?;
        if wire.re.len() != wire.im.len() {
            return Err(Error::shape("state JSON: re/im length mismatch"));
        }
        let amps = Array1::from_iter(
            wire.re.iter().zip(wire.im.iter()).map(|(&r, &i)| C64::new(r, i)),
        );
        Self::from_amps(wire.n_qubits, wire.boson_dim, amps)
    }
}

/// |D_{N,k}⟩ as a full 2^N vector (no boson mode).
pub fn dicke_state(n: usize, k: usize) -> Result<StateVector> {
    let d = dicke_norm(n, k)?;
    let mut s = StateVector::zeros(n, 0)?;
    let amp = C64::new(1.0 / d, 0.0);
    for bits in 0..(1usize << n) {
        if (bits as u32).count_ones() as usize == k {
            s.amps[bits] = amp;
        }
    }
    Ok(s)
}

/// Staircase basis state |(k)⟩ = |g…g e…e⟩ with k trailing excited qubits.
pub fn staircase_basis_state(n: usize, k: usize) -> Result<StateVector> {
    if k > n {
        return Err(Error::domain(format!("staircase: k={k} out of range for n={n}")));
    }
    let mut s = StateVector::zeros(n, 0)?;
    s.amps[(1usize << k) - 1] = C64::new(1.0, 0.0);
    Ok(s)
}

/// Σ_k c_k |D_{N,k}⟩ as a full 2^N vector.
pub fn assemble_symmetric(c: &SymmetricCoefficients) -> StateVector {
    let n = c.n_qubits();
    let mut s = StateVector::zeros(n, 0).expect("coefficients already capped");
    for bits in 0..(1usize << n) {
        let k = (bits as u32).count_ones() as usize;
        s.amps[bits] = c.get(k) / binomial(n, k).sqrt();
    }
    s
}

/// Σ_k c_k |(k)⟩ — the staircase superposition targeted by the encoder.
pub fn assemble_staircase(c: &SymmetricCoefficients) -> StateVector {
    let n = c.n_qubits();
    let mut s = StateVector::zeros(n, 0).expect("coefficients already capped");
    for k in 0..=n {
        s.amps[(1usize << k) - 1] = c.get(k);
    }
    s
}

/// |⟨ψ|φ⟩|².
pub fn fidelity(psi: &StateVector, phi: &StateVector) -> Result<f64> {
    Ok(psi.inner(phi)?.norm_sqr())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(4, 2), 6.0);
        assert_eq!(binomial(10, 0), 1.0);
        assert_eq!(binomial(10, 10), 1.0);
        assert_eq!(binomial(3, 5), 0.0);
        assert_eq!(binomial(6, 3), 20.0);
    }

    #[test]
    fn dicke_norm_examples() {
        assert_abs_diff_eq!(dicke_norm(2, 1).unwrap(), 2f64.sqrt());
        assert_abs_diff_eq!(dicke_norm(4, 2).unwrap(), 6f64.sqrt());
        assert_abs_diff_eq!(dicke_norm(1, 0).unwrap(), 1.0);
        assert!(dicke_norm(3, 4).is_err());
    }

    #[test]
    fn recursion_amplitude_examples() {
        let (a, b) = recursion_amplitudes(2, 1).unwrap();
        assert_abs_diff_eq!(a, 1.0 / 2f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(b, 1.0 / 2f64.sqrt(), epsilon = 1e-15);
        let (a, b) = recursion_amplitudes(4, 1).unwrap();
        assert_abs_diff_eq!(a, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(b, 3f64.sqrt() / 2.0, epsilon = 1e-15);
        for n in 1..=8 {
            for k in 0..=n {
                let (a, b) = recursion_amplitudes(n, k).unwrap();
                assert_abs_diff_eq!(a * a + b * b, 1.0, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn dicke_state_structure() {
        let s = dicke_state(4, 2).unwrap();
        let amp = 1.0 / 6f64.sqrt();
        let mut nonzero = 0;
        for bits in 0..16usize {
            let w = (bits as u32).count_ones() as usize;
            if w == 2 {
                assert_abs_diff_eq!(s.amps[bits].re, amp, epsilon = 1e-15);
                nonzero += 1;
            } else {
                assert_eq!(s.amps[bits], C64::new(0.0, 0.0));
            }
        }
        assert_eq!(nonzero, 6);
        assert_abs_diff_eq!(s.norm(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn dicke_recursion_identity() {
        // |D_{N,k}⟩ = a·|D_{N−1,k−1}⟩⊗|e⟩ + b·|D_{N−1,k}⟩⊗|g⟩ (last qubit least significant)
        for n in 2..=8usize {
            for k in 0..=n {
                let (a, b) = recursion_amplitudes(n, k).unwrap();
                let big = dicke_state(n, k).unwrap();
                let mut rebuilt = StateVector::zeros(n, 0).unwrap();
                if k >= 1 {
                    let sub = dicke_state(n - 1, k - 1).unwrap();
                    for bits in 0..(1usize << (n - 1)) {
                        rebuilt.amps[(bits << 1) | 1] += sub.amps[bits] * a;
                    }
                }
                if k < n {
                    let sub = dicke_state(n - 1, k).unwrap();
                    for bits in 0..(1usize << (n - 1)) {
                        rebuilt.amps[bits << 1] += sub.amps[bits] * b;
                    }
                }
                for i in 0..big.dim() {
                    assert!((big.amps[i] - rebuilt.amps[i]).norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn dicke_states_are_permutation_symmetric() {
        for n in 2..=6usize {
            for k in 0..=n {
                let s = dicke_state(n, k).unwrap();
                for q in 1..n {
                    // adjacent transposition of qubits q, q+1
                    let b1 = s.bit_of_qubit(q);
                    let b2 = s.bit_of_qubit(q + 1);
                    for bits in 0..(1usize << n) {
                        let swapped = if ((bits >> b1) ^ (bits >> b2)) & 1 == 1 {
                            bits ^ (1 << b1) ^ (1 << b2)
                        } else {
                            bits
                        };
                        assert_eq!(s.amps[bits], s.amps[swapped]);
                    }
                }
            }
        }
    }

    #[test]
    fn staircase_indices() {
        assert_eq!(staircase_basis_state(4, 0).unwrap().amps[0], C64::new(1.0, 0.0));
        assert_eq!(staircase_basis_state(4, 2).unwrap().amps[0b0011], C64::new(1.0, 0.0));
        assert_eq!(staircase_basis_state(4, 4).unwrap().amps[0b1111], C64::new(1.0, 0.0));
        assert!(staircase_basis_state(4, 5).is_err());
    }

    #[test]
    fn assemble_restriction_matches_dicke() {
        let c = SymmetricCoefficients::normalized(vec![
            C64::new(1.0, 0.0),
            C64::new(2.0, 0.0),
            C64::new(3.0, 0.0),
            C64::new(4.0, 0.0),
            C64::new(5.0, 0.0),
        ])
        .unwrap();
        let s = assemble_symmetric(&c);
        assert_abs_diff_eq!(s.amps[0].re, 1.0 / 55f64.sqrt(), epsilon = 1e-14);
        for k in 0..=4usize {
            let d = dicke_state(4, k).unwrap();
            let overlap = d.inner(&s).unwrap();
            assert!((overlap - c.get(k)).norm() < 1e-14);
        }
        assert_abs_diff_eq!(s.norm(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn w_state_amplitudes() {
        let c = SymmetricCoefficients::w_state(4).unwrap();
        let s = assemble_symmetric(&c);
        for bits in [0b0001usize, 0b0010, 0b0100, 0b1000] {
            assert_abs_diff_eq!(s.amps[bits].re, 0.5, epsilon = 1e-15);
        }
    }

    #[test]
    fn fidelity_examples() {
        let g = StateVector::ground(1, 0).unwrap();
        let mut e = StateVector::zeros(1, 0).unwrap();
        e.amps[1] = C64::new(1.0, 0.0);
        assert_abs_diff_eq!(fidelity(&g, &g).unwrap(), 1.0);
        assert_abs_diff_eq!(fidelity(&g, &e).unwrap(), 0.0);
        let d = dicke_state(2, 1).unwrap();
        let mut ge = StateVector::zeros(2, 0).unwrap();
        ge.amps[0b01] = C64::new(1.0, 0.0);
        assert_abs_diff_eq!(fidelity(&d, &ge).unwrap(), 0.5, epsilon = 1e-15);
        assert!(fidelity(&g, &d).is_err());
    }

    #[test]
    fn coefficient_norm_gate() {
        assert!(SymmetricCoefficients::new(vec![C64::new(0.9, 0.0), C64::new(0.0, 0.0)]).is_err());
        let ok = SymmetricCoefficients::new(vec![
            C64::new(1.0 + 4e-7, 0.0),
            C64::new(0.0, 0.0),
        ])
        .unwrap();
        assert_abs_diff_eq!(ok.get(0).re, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn single_qubit_and_controlled_application() {
        let flip = [
            [C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
            [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
        ];
        let mut s = StateVector::ground(3, 0).unwrap();
        s.apply_single_qubit(3, &flip).unwrap();
        assert_eq!(s.amps[0b001], C64::new(1.0, 0.0));
        s.apply_controlled(3, 2, &flip).unwrap();
        assert_eq!(s.amps[0b011], C64::new(1.0, 0.0));
        // control in |g⟩ leaves the target alone
        s.apply_controlled(1, 2, &flip).unwrap();
        assert_eq!(s.amps[0b011], C64::new(1.0, 0.0));
    }

    #[test]
    fn boson_round_trip() {
        let c = SymmetricCoefficients::ghz(3).unwrap();
        let s = assemble_symmetric(&c).attach_boson(4).unwrap();
        assert_abs_diff_eq!(s.norm(), 1.0, epsilon = 1e-15);
        let back = s.project_boson(0).unwrap();
        let target = assemble_symmetric(&c);
        assert_abs_diff_eq!(fidelity(&back, &target).unwrap(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s.mean_excitation(), 1.5, epsilon = 1e-14);
    }

    #[test]
    fn dicke_block_overlap_reads_subblocks() {
        // |D_{2,1}⟩ on qubits 1..2 ⊗ |e⟩ on qubit 3
        let mut s = StateVector::zeros(3, 0).unwrap();
        let r = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        s.amps[0b011] = r;
        s.amps[0b101] = r;
        let ov = s.dicke_block_overlap(2, 1, 0b1, 0).unwrap();
        assert!((ov - C64::new(1.0, 0.0)).norm() < 1e-14);
        let ov0 = s.dicke_block_overlap(2, 0, 0b1, 0).unwrap();
        assert!(ov0.norm() < 1e-14);
    }

    #[test]
    fn json_round_trip() {
        let c = SymmetricCoefficients::normalized(vec![
            C64::new(1.0, 0.5),
            C64::new(-2.0, 0.25),
            C64::new(0.0, 3.0),
        ])
        .unwrap();
        let s = assemble_symmetric(&c);
        let back = StateVector::from_json(&s.to_json()).unwrap();
        assert_eq!(back.n_qubits, 2);
        assert_eq!(back.boson_dim, 0);
        assert_abs_diff_eq!(fidelity(&s, &back).unwrap(), 1.0, epsilon = 1e-15);
    }
}
