//! Dense complex linear algebra for small Hamiltonians.
//!
//! Everything here targets matrices of dimension ≲ a few hundred (active
//! protocol registers, boson-truncated blocks), so plain dense algorithms
//! are used throughout: Padé-13 scaling-and-squaring for the matrix
//! exponential and cyclic Jacobi for Hermitian eigendecomposition. A
//! diagonal Padé approximant of a skew-Hermitian argument is itself unitary
//! in exact arithmetic, which keeps norm drift at the machine level without
//! re-normalization tricks.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use crate::{Error, Result};

pub fn identity(n: usize) -> Array2<C64> {
    Array2::eye(n)
}

pub fn dagger(a: &Array2<C64>) -> Array2<C64> {
    a.t().mapv(|z| z.conj())
}

pub fn kron(a: &Array2<C64>, b: &Array2<C64>) -> Array2<C64> {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    let mut out = Array2::zeros((ar * br, ac * bc));
    for i in 0..ar {
        for j in 0..ac {
            let aij = a[[i, j]];
            if aij == C64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[[i * br + k, j * bc + l]] = aij * b[[k, l]];
                }
            }
        }
    }
    out
}

pub fn max_abs_diff(a: &Array2<C64>, b: &Array2<C64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn is_hermitian(a: &Array2<C64>, tol: f64) -> bool {
    let (r, c) = a.dim();
    if r != c {
        return false;
    }
    for i in 0..r {
        for j in i..c {
            if (a[[i, j]] - a[[j, i]].conj()).norm() > tol {
                return false;
            }
        }
    }
    true
}

fn one_norm(a: &Array2<C64>) -> f64 {
    let (r, c) = a.dim();
    (0..c)
        .map(|j| (0..r).map(|i| a[[i, j]].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// LU solve with partial pivoting: returns X with A·X = B.
pub fn solve(a: &Array2<C64>, b: &Array2<C64>) -> Result<Array2<C64>> {
    let n = a.nrows();
    if a.ncols() != n || b.nrows() != n {
        return Err(Error::shape("solve: dimension mismatch"));
    }
    let mut lu = a.clone();
    let mut x = b.clone();
    let m = x.ncols();
    for col in 0..n {
        let mut piv = col;
        let mut best = lu[[col, col]].norm();
        for r in col + 1..n {
            let v = lu[[r, col]].norm();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if best == 0.0 {
            return Err(Error::numerical("solve: singular matrix"));
        }
        if piv != col {
            for j in 0..n {
                lu.swap([col, j], [piv, j]);
            }
            for j in 0..m {
                x.swap([col, j], [piv, j]);
            }
        }
        let d = lu[[col, col]];
        for r in col + 1..n {
            let f = lu[[r, col]] / d;
            if f == C64::new(0.0, 0.0) {
                continue;
            }
            lu[[r, col]] = f;
            for j in col + 1..n {
                let v = lu[[col, j]];
                lu[[r, j]] -= f * v;
            }
            for j in 0..m {
                let v = x[[col, j]];
                x[[r, j]] -= f * v;
            }
        }
    }
    // back substitution
    for col in (0..n).rev() {
        let d = lu[[col, col]];
        for j in 0..m {
            x[[col, j]] /= d;
        }
        for r in 0..col {
            let f = lu[[r, col]];
            if f == C64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..m {
                let v = x[[col, j]];
                x[[r, j]] -= f * v;
            }
        }
    }
    Ok(x)
}

/// Matrix exponential by Padé-13 scaling and squaring (Higham's method).
pub fn expm(a: &Array2<C64>) -> Array2<C64> {
    const THETA13: f64 = 5.371_920_351_148_152;
    #[rustfmt::skip]
    const B: [f64; 14] = [
        64_764_752_532_480_000.0, 32_382_376_266_240_000.0, 7_771_770_303_897_600.0,
        1_187_353_796_428_800.0, 129_060_195_264_000.0, 10_559_470_521_600.0,
        670_442_572_800.0, 33_522_128_640.0, 1_323_241_920.0, 40_840_800.0,
        960_960.0, 16_380.0, 182.0, 1.0,
    ];
    let n = a.nrows();
    let norm = one_norm(a);
    let s = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as u32
    } else {
        0
    };
    let scaled = a.mapv(|z| z / C64::new(2f64.powi(s as i32), 0.0));
    let a2 = scaled.dot(&scaled);
    let a4 = a2.dot(&a2);
    let a6 = a2.dot(&a4);
    let eye = identity(n);
    let u_inner = a6.dot(&(&a6 * B[13] + &a4 * B[11] + &a2 * B[9]))
        + &a6 * B[7]
        + &a4 * B[5]
        + &a2 * B[3]
        + &eye * B[1];
    let u = scaled.dot(&u_inner);
    let v = a6.dot(&(&a6 * B[12] + &a4 * B[10] + &a2 * B[8]))
        + &a6 * B[6]
        + &a4 * B[4]
        + &a2 * B[2]
        + &eye * B[0];
    let num = &v + &u;
    let den = &v - &u;
    let mut r = solve(&den, &num).expect("Padé denominator is nonsingular for scaled input");
    for _ in 0..s {
        r = r.dot(&r);
    }
    r
}

/// exp(−i·H·t) for Hermitian H.
pub fn propagator(h: &Array2<C64>, t: f64) -> Array2<C64> {
    expm(&h.mapv(|z| z * C64::new(0.0, -t)))
}

/// Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues ascending and the unitary of eigenvectors as columns,
/// satisfying `A·V = V·diag(w)` to ~1e-13 of the matrix norm.
pub fn eigh(a: &Array2<C64>) -> Result<(Array1<f64>, Array2<C64>)> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::shape("eigh: not square"));
    }
    if !is_hermitian(a, 1e-10 * (1.0 + one_norm(a))) {
        return Err(Error::domain("eigh: matrix is not Hermitian"));
    }
    let mut m = a.clone();
    // symmetrize exactly so roundoff in the input cannot bias the sweep
    for i in 0..n {
        for j in i + 1..n {
            let avg = (m[[i, j]] + m[[j, i]].conj()) * 0.5;
            m[[i, j]] = avg;
            m[[j, i]] = avg.conj();
        }
        m[[i, i]] = C64::new(m[[i, i]].re, 0.0);
    }
    let mut v = identity(n);
    let scale = one_norm(&m).max(1e-300);
    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for i in 0..n {
            for j in i + 1..n {
                off += m[[i, j]].norm_sqr();
            }
        }
        if off.sqrt() <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let g = m[[p, q]];
                let gn = g.norm();
                if gn <= 1e-300 {
                    continue;
                }
                let alpha = m[[p, p]].re;
                let beta = m[[q, q]].re;
                let phase = g / gn;
                let tau = (beta - alpha) / (2.0 * gn);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // J = I except J[p,p]=c, J[p,q]=s·phase, J[q,p]=−s·conj(phase), J[q,q]=c
                let jpq = phase * s;
                let jqp = -phase.conj() * s;
                // columns: B = M·J
                for i in 0..n {
                    let mip = m[[i, p]];
                    let miq = m[[i, q]];
                    m[[i, p]] = mip * c + miq * jqp;
                    m[[i, q]] = mip * jpq + miq * c;
                }
                // rows: M ← J†·B
                for i in 0..n {
                    let mpi = m[[p, i]];
                    let mqi = m[[q, i]];
                    m[[p, i]] = mpi * c + mqi * jqp.conj();
                    m[[q, i]] = mpi * jpq.conj() + mqi * c;
                }
                m[[p, q]] = C64::new(0.0, 0.0);
                m[[q, p]] = C64::new(0.0, 0.0);
                m[[p, p]] = C64::new(m[[p, p]].re, 0.0);
                m[[q, q]] = C64::new(m[[q, q]].re, 0.0);
                for i in 0..n {
                    let vip = v[[i, p]];
                    let viq = v[[i, q]];
                    v[[i, p]] = vip * c + viq * jqp;
                    v[[i, q]] = vip * jpq + viq * c;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[[i, i]].re.partial_cmp(&m[[j, j]].re).unwrap());
    let w = Array1::from_iter(order.iter().map(|&i| m[[i, i]].re));
    let mut vs = Array2::zeros((n, n));
    for (col, &src) in order.iter().enumerate() {
        for row in 0..n {
            vs[[row, col]] = v[[row, src]];
        }
    }
    Ok((w, vs))
}
