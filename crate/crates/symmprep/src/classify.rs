//! Degeneracy classification of symmetric states.
//!
//! A symmetric state Σ_k c_k|D_{N,k}⟩ factors into N spinors; encoding the
//! coefficients as p(z) = Σ_k c_k·√C(N,k)·z^k makes each spinor a root of p
//! (the spinor |g⟩ shows up as a degree deficit — a root at infinity). The
//! multiset of root multiplicities is invariant under invertible one-qubit
//! maps applied to every qubit, which act on the roots as Möbius
//! transformations of the extended plane, so the multiplicity pattern
//! labels the state's entanglement class.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::schedule::sig12;
use crate::state::{binomial, StateVector, SymmetricCoefficients};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Root {
    Finite(C64),
    Infinity,
}

/// The coefficient polynomial p(z) = Σ_k c_k·√C(N,k)·z^k.
#[derive(Clone, Debug)]
pub struct MajoranaPolynomial {
    pub n_qubits: usize,
    pub coeffs: Vec<C64>,
}

impl MajoranaPolynomial {
    pub fn from_coefficients(c: &SymmetricCoefficients) -> Self {
        let n = c.n_qubits();
        let coeffs = (0..=n)
            .map(|k| c.get(k) * binomial(n, k).sqrt())
            .collect();
        Self { n_qubits: n, coeffs }
    }
}

fn horner(coeffs: &[C64], z: C64) -> C64 {
    coeffs.iter().rev().fold(C64::new(0.0, 0.0), |acc, &a| acc * z + a)
}

fn horner_derivative(coeffs: &[C64], z: C64) -> C64 {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .rev()
        .fold(C64::new(0.0, 0.0), |acc, (k, &a)| acc * z + a * k as f64)
}

/// Aberth–Ehrlich iteration for all roots of a dense polynomial with
/// nonzero leading and trailing coefficients.
fn aberth(coeffs: &[C64]) -> Result<Vec<C64>> {
    let deg = coeffs.len() - 1;
    if deg == 1 {
        return Ok(vec![-coeffs[0] / coeffs[1]]);
    }
    let lead = coeffs[deg].norm();
    let cauchy = 1.0 + coeffs[..deg].iter().map(|a| a.norm() / lead).fold(0.0, f64::max);
    let inner = (coeffs[0].norm() / lead).powf(1.0 / deg as f64);
    let radius = 0.5 * (inner + cauchy.min(2.0 * inner + 1.0));
    let mut z: Vec<C64> = (0..deg)
        .map(|i| {
            let angle = 2.0 * std::f64::consts::PI * i as f64 / deg as f64 + 0.376;
            C64::from_polar(radius * (0.9 + 0.2 * i as f64 / deg as f64), angle)
        })
        .collect();
    for _ in 0..200 {
        let mut moved = 0.0f64;
        for i in 0..deg {
            let p = horner(coeffs, z[i]);
            let dp = horner_derivative(coeffs, z[i]);
            if dp.norm() == 0.0 {
                z[i] += C64::new(1e-8, 1e-8);
                moved = f64::MAX;
                continue;
            }
            let w = p / dp;
            let mut repulsion = C64::new(0.0, 0.0);
            for j in 0..deg {
                if j != i {
                    let d = z[i] - z[j];
                    if d.norm() == 0.0 {
                        continue;
                    }
                    repulsion += C64::new(1.0, 0.0) / d;
                }
            }
            let denom = C64::new(1.0, 0.0) - w * repulsion;
            let step = if denom.norm() < 1e-300 { w } else { w / denom };
            z[i] -= step;
            moved = moved.max(step.norm() / (1.0 + z[i].norm()));
        }
        if moved < 1e-14 {
            break;
        }
    }
    // one Newton polish per root
    for zi in z.iter_mut() {
        let dp = horner_derivative(coeffs, *zi);
        if dp.norm() > 0.0 {
            *zi -= horner(coeffs, *zi) / dp;
        }
    }
    Ok(z)
}

/// Backward-stable residual of a candidate root: the forward value for
/// roots inside the unit disk, the reversed polynomial at 1/z outside.
fn root_residual(coeffs: &[C64], z: C64) -> f64 {
    if z.norm() <= 1.0 {
        horner(coeffs, z).norm()
    } else {
        let rev: Vec<C64> = coeffs.iter().rev().copied().collect();
        horner(&rev, C64::new(1.0, 0.0) / z).norm()
    }
}

/// All N roots of the coefficient polynomial, multiplicities spelled out,
/// degree deficits reported as roots at infinity. Finite roots are sorted
/// by real then imaginary part for reproducible output.
pub fn majorana_roots(c: &SymmetricCoefficients) -> Result<Vec<Root>> {
    let poly = MajoranaPolynomial::from_coefficients(c);
    let a = &poly.coeffs;
    let scale = a.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let strip = 1e-14 * scale;
    let mut hi = a.len() - 1;
    while hi > 0 && a[hi].norm() <= strip {
        hi -= 1;
    }
    let mut lo = 0;
    while lo < hi && a[lo].norm() <= strip {
        lo += 1;
    }
    if a[hi].norm() <= strip {
        return Err(Error::numerical("majorana_roots: zero polynomial"));
    }
    let at_infinity = a.len() - 1 - hi;
    let at_zero = lo;
    let mut finite: Vec<C64> = vec![C64::new(0.0, 0.0); at_zero];
    if hi > lo {
        let core = &a[lo..=hi];
        let roots = aberth(core)?;
        for &z in &roots {
            let res = root_residual(core, z);
            if res > 1e-9 * scale {
                return Err(Error::numerical(format!(
                    "majorana_roots: root residual {res:.3e} exceeds tolerance"
                )));
            }
        }
        finite.extend(roots);
    }
    finite.sort_by(|p, q| {
        p.re.partial_cmp(&q.re)
            .unwrap()
            .then(p.im.partial_cmp(&q.im).unwrap())
    });
    let mut out: Vec<Root> = finite.into_iter().map(Root::Finite).collect();
    out.extend(std::iter::repeat_n(Root::Infinity, at_infinity));
    Ok(out)
}

/// Chordal distance on the extended plane: 2|z−w|/√((1+|z|²)(1+|w|²)),
/// with the north pole standing in for infinity. Bounded by 2.
pub fn chordal(a: &Root, b: &Root) -> f64 {
    match (a, b) {
        (Root::Infinity, Root::Infinity) => 0.0,
        (Root::Finite(z), Root::Infinity) | (Root::Infinity, Root::Finite(z)) => {
            2.0 / (1.0 + z.norm_sqr()).sqrt()
        }
        (Root::Finite(z), Root::Finite(w)) => {
            2.0 * (z - w).norm() / ((1.0 + z.norm_sqr()) * (1.0 + w.norm_sqr())).sqrt()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DegeneracyConfig {
    /// Cluster sizes in descending order; sums to N.
    pub config: Vec<usize>,
    /// Set when some pair distance sits near the clustering threshold,
    /// so the configuration could flip under small perturbations.
    pub marginal: bool,
}

pub const CLUSTER_TOL: f64 = 1e-6;

/// Groups roots by single-linkage clustering under the chordal metric.
pub fn degeneracy_config(roots: &[Root], tol: f64) -> DegeneracyConfig {
    let n = roots.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        if parent[i] != i {
            let r = find(parent, parent[i]);
            parent[i] = r;
        }
        parent[i]
    }
    let mut marginal = false;
    for i in 0..n {
        for j in (i + 1)..n {
            let d = chordal(&roots[i], &roots[j]);
            if d > tol / 4.0 && d < 4.0 * tol {
                marginal = true;
            }
            if d <= tol {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri] = rj;
                }
            }
        }
    }
    let mut sizes = std::collections::HashMap::new();
    for i in 0..n {
        *sizes.entry(find(&mut parent, i)).or_insert(0usize) += 1;
    }
    let mut config: Vec<usize> = sizes.into_values().collect();
    config.sort_unstable_by(|a, b| b.cmp(a));
    DegeneracyConfig { config, marginal }
}

impl DegeneracyConfig {
    pub fn label(&self) -> String {
        let body = self
            .config
            .iter()
            .map(|n| n.to_string())
            .collect::<Vec<_>>()
            .join(",");
        if self.config.len() == 1 {
            format!("D_{{{body}}} (separable)")
        } else {
            format!("D_{{{body}}}")
        }
    }
}

/// Rebuilds (normalized) coefficients whose polynomial has exactly the
/// given roots: p(z) ∝ Π over finite roots of (z − zᵢ), each root at
/// infinity dropping the degree by one.
pub fn coefficients_from_roots(roots: &[Root], n_qubits: usize) -> Result<SymmetricCoefficients> {
    if roots.len() != n_qubits {
        return Err(Error::shape(format!(
            "coefficients_from_roots: {} roots for {n_qubits} qubits",
            roots.len()
        )));
    }
    let mut poly = vec![C64::new(1.0, 0.0)];
    for r in roots {
        if let Root::Finite(z) = r {
            // multiply by (x − z)
            let mut next = vec![C64::new(0.0, 0.0); poly.len() + 1];
            for (k, &a) in poly.iter().enumerate() {
                next[k + 1] += a;
                next[k] -= a * z;
            }
            poly = next;
        }
    }
    let mut c = vec![C64::new(0.0, 0.0); n_qubits + 1];
    for (k, &a) in poly.iter().enumerate() {
        c[k] = a / binomial(n_qubits, k).sqrt();
    }
    SymmetricCoefficients::normalized(c)
}

/// Root image under the invertible qubit map [[a,b],[c,d]] (columns are the
/// images of |g⟩ and |e⟩): z ↦ (az−b)/(d−cz), ∞ ↦ −a/c.
pub fn mobius_root(root: &Root, m: &[[C64; 2]; 2]) -> Root {
    let (a, b, c, d) = (m[0][0], m[0][1], m[1][0], m[1][1]);
    match root {
        Root::Infinity => {
            if c.norm() == 0.0 {
                Root::Infinity
            } else {
                Root::Finite(-a / c)
            }
        }
        Root::Finite(z) => {
            let denom = d - c * z;
            if denom.norm() == 0.0 {
                Root::Infinity
            } else {
                Root::Finite((a * z - b) / denom)
            }
        }
    }
}

/// Applies one invertible qubit map to every qubit of a state vector.
pub fn apply_to_all_qubits(state: &StateVector, m: &[[C64; 2]; 2]) -> Result<StateVector> {
    let mut out = state.clone();
    for q in 1..=state.n_qubits {
        out.apply_single_qubit(q, m)?;
    }
    Ok(out)
}

/// Reads symmetric coefficients back off a full state vector, insisting the
/// state actually lies in the symmetric subspace.
pub fn coefficients_from_state(state: &StateVector) -> Result<SymmetricCoefficients> {
    if state.boson_dim != 0 {
        return Err(Error::shape("coefficients_from_state: expected a qubit-only register"));
    }
    let n = state.n_qubits;
    let mut c = vec![C64::new(0.0, 0.0); n + 1];
    let mut sym_norm_sqr = 0.0;
    for (k, ck) in c.iter_mut().enumerate() {
        let d = binomial(n, k).sqrt();
        let mut amp = C64::new(0.0, 0.0);
        for bits in 0..(1usize << n) {
            if (bits as u32).count_ones() as usize == k {
                amp += state.amps[bits];
            }
        }
        *ck = amp / d;
        sym_norm_sqr += ck.norm_sqr();
    }
    let total = state.norm();
    if (sym_norm_sqr.sqrt() - total).abs() > 1e-9 * total.max(1.0) {
        return Err(Error::domain(
            "coefficients_from_state: state has weight outside the symmetric subspace",
        ));
    }
    SymmetricCoefficients::normalized(c)
}

#[derive(Clone, Debug)]
pub struct Classification {
    pub config: Vec<usize>,
    pub label: String,
    pub roots: Vec<Root>,
    pub marginal: bool,
}

/// Classifies a batch of targets, preserving order; each entry fails
/// independently.
pub fn classify_batch(targets: &[SymmetricCoefficients]) -> Vec<Result<Classification>> {
    crate::par::par_map(targets, classify)
}

/// Full classification: roots, multiplicity configuration, label.
pub fn classify(c: &SymmetricCoefficients) -> Result<Classification> {
    let roots = majorana_roots(c)?;
    let cfg = degeneracy_config(&roots, CLUSTER_TOL);
    Ok(Classification {
        label: cfg.label(),
        config: cfg.config,
        roots,
        marginal: cfg.marginal,
    })
}

#[derive(Serialize)]
struct RootWire {
    re: f64,
    im: f64,
    at_infinity: bool,
}

#[derive(Serialize)]
struct ClassificationWire {
    config: Vec<usize>,
    label: String,
    roots: Vec<RootWire>,
    marginal: bool,
}

impl Classification {
    pub fn to_json(&self) -> String {
        let wire = ClassificationWire {
            config: self.config.clone(),
            label: self.label.clone(),
            roots: self
                .roots
                .iter()
                .map(|r| match r {
                    Root::Finite(z) => {
                        RootWire { re: sig12(z.re), im: sig12(z.im), at_infinity: false }
                    }
                    Root::Infinity => RootWire { re: 0.0, im: 0.0, at_infinity: true },
                })
                .collect(),
            marginal: self.marginal,
        };
        serde_json::to_string_pretty(&wire).expect("classification serialization cannot fail")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{assemble_symmetric, fidelity};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_coeffs(rng: &mut ChaCha8Rng, n: usize) -> SymmetricCoefficients {
        SymmetricCoefficients::normalized(
            (0..=n)
                .map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn dicke_states_have_poles_and_zeros() {
        let e0 = SymmetricCoefficients::dicke(4, 0).unwrap();
        let cl = classify(&e0).unwrap();
        assert_eq!(cl.config, vec![4]);
        assert_eq!(cl.label, "D_{4} (separable)");
        assert!(cl.roots.iter().all(|r| *r == Root::Infinity));

        let d41 = SymmetricCoefficients::dicke(4, 1).unwrap();
        let cl = classify(&d41).unwrap();
        assert_eq!(cl.config, vec![3, 1]);
        assert_eq!(cl.label, "D_{3,1}");

        let d42 = SymmetricCoefficients::dicke(4, 2).unwrap();
        let cl = classify(&d42).unwrap();
        assert_eq!(cl.config, vec![2, 2]);
        assert!(!cl.marginal);

        let d44 = SymmetricCoefficients::dicke(4, 4).unwrap();
        let cl = classify(&d44).unwrap();
        assert_eq!(cl.config, vec![4]);
        assert_eq!(cl.label, "D_{4} (separable)");
    }

    #[test]
    fn ghz_roots_are_the_quartic_roots_of_minus_one() {
        let ghz = SymmetricCoefficients::ghz(4).unwrap();
        let cl = classify(&ghz).unwrap();
        assert_eq!(cl.config, vec![1, 1, 1, 1]);
        let s = 1.0 / 2f64.sqrt();
        let mut expected = vec![
            C64::new(s, s),
            C64::new(s, -s),
            C64::new(-s, s),
            C64::new(-s, -s),
        ];
        for r in &cl.roots {
            let Root::Finite(z) = r else { panic!("unexpected root at infinity") };
            let (i, _) = expected
                .iter()
                .enumerate()
                .min_by(|a, b| (a.1 - z).norm().partial_cmp(&(b.1 - z).norm()).unwrap())
                .unwrap();
            assert!((expected[i] - z).norm() < 1e-9, "root {z} unmatched");
            expected.remove(i);
        }
    }

    #[test]
    fn chordal_metric_basics() {
        let zero = Root::Finite(C64::new(0.0, 0.0));
        let one = Root::Finite(C64::new(1.0, 0.0));
        let minus = Root::Finite(C64::new(-1.0, 0.0));
        assert_abs_diff_eq!(chordal(&zero, &Root::Infinity), 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(chordal(&one, &minus), 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(chordal(&one, &one), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(chordal(&Root::Infinity, &Root::Infinity), 0.0, epsilon = 1e-15);
        // huge roots cluster with infinity, as they should
        let huge = Root::Finite(C64::new(1e9, 0.0));
        assert!(chordal(&huge, &Root::Infinity) < 1e-8);
    }

    #[test]
    fn marginal_separations_are_flagged() {
        let roots = vec![
            Root::Finite(C64::new(0.0, 0.0)),
            Root::Finite(C64::new(1.5e-6, 0.0)),
            Root::Infinity,
        ];
        let cfg = degeneracy_config(&roots, CLUSTER_TOL);
        assert_eq!(cfg.config, vec![1, 1, 1]);
        assert!(cfg.marginal);
        let clean = vec![
            Root::Finite(C64::new(0.0, 0.0)),
            Root::Finite(C64::new(1.0, 0.0)),
            Root::Infinity,
        ];
        assert!(!degeneracy_config(&clean, CLUSTER_TOL).marginal);
    }

    #[test]
    fn roots_round_trip_through_coefficients() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for n in 2..=10usize {
            let c = random_coeffs(&mut rng, n);
            let roots = majorana_roots(&c).unwrap();
            assert_eq!(roots.len(), n);
            let back = coefficients_from_roots(&roots, n).unwrap();
            let f = fidelity(&assemble_symmetric(&c), &assemble_symmetric(&back)).unwrap();
            assert!(f > 1.0 - 1e-8, "N={n}: roundtrip fidelity {f}");
        }
    }

    #[test]
    fn reconstruction_handles_zeros_and_infinities() {
        let roots = vec![
            Root::Finite(C64::new(0.0, 0.0)),
            Root::Finite(C64::new(0.0, 0.0)),
            Root::Infinity,
            Root::Infinity,
        ];
        let c = coefficients_from_roots(&roots, 4).unwrap();
        let d42 = SymmetricCoefficients::dicke(4, 2).unwrap();
        let f = fidelity(&assemble_symmetric(&c), &assemble_symmetric(&d42)).unwrap();
        assert!(f > 1.0 - 1e-12);
        assert!(coefficients_from_roots(&roots, 5).is_err());
    }

    #[test]
    fn qubit_swap_inverts_roots() {
        let m = [
            [C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
            [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
        ];
        assert_eq!(
            mobius_root(&Root::Finite(C64::new(0.0, 0.0)), &m),
            Root::Infinity
        );
        let Root::Finite(z) = mobius_root(&Root::Infinity, &m) else {
            panic!("expected finite image")
        };
        assert_abs_diff_eq!(z.norm(), 0.0, epsilon = 1e-15);
        let Root::Finite(z) = mobius_root(&Root::Finite(C64::new(2.0, 0.0)), &m) else {
            panic!("expected finite image")
        };
        assert!((z - C64::new(0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn root_map_matches_state_map() {
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        for n in [3usize, 5] {
            let c = random_coeffs(&mut rng, n);
            let m = [
                [
                    C64::new(rng.random::<f64>() + 0.5, rng.random::<f64>()),
                    C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>()),
                ],
                [
                    C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>()),
                    C64::new(rng.random::<f64>() + 0.5, rng.random::<f64>()),
                ],
            ];
            let mapped_state = apply_to_all_qubits(&assemble_symmetric(&c), &m).unwrap();
            let mapped_coeffs = coefficients_from_state(&mapped_state).unwrap();
            let mut got = majorana_roots(&mapped_coeffs).unwrap();
            let want: Vec<Root> = majorana_roots(&c)
                .unwrap()
                .iter()
                .map(|r| mobius_root(r, &m))
                .collect();
            for w in &want {
                let (i, d) = got
                    .iter()
                    .enumerate()
                    .map(|(i, g)| (i, chordal(w, g)))
                    .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
                    .unwrap();
                assert!(d < 1e-6, "N={n}: root image unmatched (distance {d})");
                got.remove(i);
            }
        }
    }

    #[test]
    fn symmetry_check_rejects_asymmetric_states() {
        let mut s = assemble_symmetric(&SymmetricCoefficients::w_state(3).unwrap());
        s.amps[0b001] *= C64::new(-1.0, 0.0);
        assert!(coefficients_from_state(&s).is_err());
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn roots_strategy() -> impl Strategy<Value = Root> {
            prop_oneof![
                1 => Just(Root::Infinity),
                4 => (-3.0f64..3.0, -3.0f64..3.0).prop_map(|(r, i)| Root::Finite(C64::new(r, i))),
            ]
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            // the chordal metric is symmetric, bounded by the sphere
            // diameter, and zero exactly on identical points
            #[test]
            fn chordal_is_a_bounded_metric(
                a in roots_strategy(),
                b in roots_strategy(),
                c in roots_strategy(),
            ) {
                let dab = chordal(&a, &b);
                prop_assert!((dab - chordal(&b, &a)).abs() < 1e-15);
                prop_assert!((0.0..=2.0 + 1e-12).contains(&dab));
                prop_assert!(chordal(&a, &a) < 1e-15);
                prop_assert!(dab <= chordal(&a, &c) + chordal(&c, &b) + 1e-12);
            }

            // cluster sizes always partition the root count
            #[test]
            fn config_partitions_the_roots(
                roots in proptest::collection::vec(roots_strategy(), 1..10),
            ) {
                let cfg = degeneracy_config(&roots, CLUSTER_TOL);
                prop_assert_eq!(cfg.config.iter().sum::<usize>(), roots.len());
                for w in cfg.config.windows(2) {
                    prop_assert!(w[0] >= w[1]);
                }
            }
        }
    }

    #[test]
    fn classification_json_shape() {
        let cl = classify(&SymmetricCoefficients::dicke(4, 1).unwrap()).unwrap();
        let json = cl.to_json();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["label"], "D_{3,1}");
        assert_eq!(v["config"].as_array().unwrap().len(), 2);
        assert_eq!(v["roots"].as_array().unwrap().len(), 4);
        assert_eq!(v["roots"][3]["at_infinity"], true);
        assert_eq!(v["marginal"], false);
        assert_eq!(json, cl.to_json());
    }
}
