//! Dense complex matrix helpers shared by the gate builders and the
//! gradient engine.
//!
//! Matrices are `nalgebra` column-major `DMatrix<Complex64>`. The hot
//! kernels here work on raw slices and exploit the fact that most gates act
//! on a single qubit, which makes left/right multiplication `O(d²)`.

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type Mat2 = Matrix2<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `e^{iθ}`.
#[inline]
pub fn cis(theta: f64) -> Complex64 {
    Complex64::from_polar(1.0, theta)
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

/// Largest entry magnitude of `U†U − I`.
pub fn unitarity_error(u: &CMatrix) -> f64 {
    if u.nrows() != u.ncols() {
        return f64::INFINITY;
    }
    let prod = u.adjoint() * u;
    let mut worst = 0.0f64;
    for j in 0..prod.ncols() {
        for i in 0..prod.nrows() {
            let target = if i == j { ONE } else { ZERO };
            worst = worst.max((prod[(i, j)] - target).norm());
        }
    }
    worst
}

pub fn unitarity_error2(u: &Mat2) -> f64 {
    let prod = u.adjoint() * u;
    let id = Mat2::identity();
    (prod - id).iter().fold(0.0f64, |m, z| m.max(z.norm()))
}

/// Max-norm of the entrywise difference.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .fold(0.0f64, |m, (x, y)| m.max((x - y).norm()))
}

/// Kronecker product with `a` on the *high* bits. Because qubit `k` lives in
/// bit `k-1`, the register operator `U_1 ⊗ … ⊗ U_N` in textbook order is
/// `kron(U_N, … kron(U_2, U_1))` here.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Tensor product of per-qubit 2×2 factors, `factors[0]` acting on qubit 1.
pub fn tensor_factors(factors: &[Mat2]) -> CMatrix {
    let mut out = identity(1);
    for f in factors {
        let fm = CMatrix::from_column_slice(2, 2, f.as_slice());
        out = kron(&fm, &out);
    }
    out
}

/// Same 2×2 factor on every qubit of an `n`-qubit register.
pub fn tensor_power(f: &Mat2, n: usize) -> CMatrix {
    tensor_factors(&vec![*f; n])
}

/// `tr(A·B)` without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    let (n, k) = a.shape();
    assert_eq!(b.shape(), (k, n));
    let asl = a.as_slice();
    let bsl = b.as_slice();
    let mut acc = ZERO;
    // tr(AB) = Σ_{i,j} A[i,j] B[j,i]
    for j in 0..k {
        for i in 0..n {
            acc += asl[i + j * n] * bsl[j + i * k];
        }
    }
    acc
}

/// `M ← G_q · M` where `G_q` is the 2×2 gate `g` on qubit index `bit`
/// (zero-based bit position).
pub fn apply_left_1q(m: &mut CMatrix, g: &Mat2, bit: usize) {
    let rows = m.nrows();
    let cols = m.ncols();
    let mask = 1usize << bit;
    let (g00, g01, g10, g11) = (g[(0, 0)], g[(0, 1)], g[(1, 0)], g[(1, 1)]);
    let data = m.as_mut_slice();
    for j in 0..cols {
        let col = &mut data[j * rows..(j + 1) * rows];
        for i0 in 0..rows {
            if i0 & mask != 0 {
                continue;
            }
            let i1 = i0 | mask;
            let a = col[i0];
            let b = col[i1];
            col[i0] = g00 * a + g01 * b;
            col[i1] = g10 * a + g11 * b;
        }
    }
}

/// `M ← M · G_q`.
pub fn apply_right_1q(m: &mut CMatrix, g: &Mat2, bit: usize) {
    let rows = m.nrows();
    let cols = m.ncols();
    let mask = 1usize << bit;
    let (g00, g01, g10, g11) = (g[(0, 0)], g[(0, 1)], g[(1, 0)], g[(1, 1)]);
    let data = m.as_mut_slice();
    for j0 in 0..cols {
        if j0 & mask != 0 {
            continue;
        }
        let j1 = j0 | mask;
        for i in 0..rows {
            let a = data[i + j0 * rows];
            let b = data[i + j1 * rows];
            data[i + j0 * rows] = a * g00 + b * g10;
            data[i + j1 * rows] = a * g01 + b * g11;
        }
    }
}

/// `M ← D · M` for a diagonal `D` given by its entries.
pub fn apply_left_diag(m: &mut CMatrix, diag: &[Complex64]) {
    let rows = m.nrows();
    let cols = m.ncols();
    assert_eq!(diag.len(), rows);
    let data = m.as_mut_slice();
    for j in 0..cols {
        for i in 0..rows {
            data[i + j * rows] *= diag[i];
        }
    }
}

/// `tr(B · G_q · P)` for a 2×2 `g` on `bit`, in `O(d²)`.
pub fn trace_sandwich_1q(b: &CMatrix, g: &Mat2, bit: usize, p: &CMatrix) -> Complex64 {
    let d = p.nrows();
    let k = p.ncols();
    assert_eq!(b.shape(), (k, d));
    let mask = 1usize << bit;
    let (g00, g01, g10, g11) = (g[(0, 0)], g[(0, 1)], g[(1, 0)], g[(1, 1)]);
    let ps = p.as_slice();
    let bs = b.as_slice();
    let mut acc = ZERO;
    for j in 0..k {
        let pcol = &ps[j * d..(j + 1) * d];
        for i0 in 0..d {
            if i0 & mask != 0 {
                continue;
            }
            let i1 = i0 | mask;
            let x0 = g00 * pcol[i0] + g01 * pcol[i1];
            let x1 = g10 * pcol[i0] + g11 * pcol[i1];
            // B[j, i] lives at bs[j + i * k]
            acc += bs[j + i0 * k] * x0 + bs[j + i1 * k] * x1;
        }
    }
    acc
}

/// `e^{-iθ(n·σ)/2}` for a unit axis `n`.
pub fn rotation(theta: f64, axis: [f64; 3]) -> Mat2 {
    let (s, co) = (theta / 2.0).sin_cos();
    let [x, y, z] = axis;
    Mat2::new(
        c(co, -s * z),
        c(-s * y, -s * x),
        c(s * y, -s * x),
        c(co, s * z),
    )
}

pub fn pauli_x() -> Mat2 {
    Mat2::new(ZERO, ONE, ONE, ZERO)
}

pub fn pauli_y() -> Mat2 {
    Mat2::new(ZERO, -I, I, ZERO)
}

pub fn pauli_z() -> Mat2 {
    Mat2::new(ONE, ZERO, ZERO, -ONE)
}

pub fn hadamard() -> Mat2 {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    Mat2::new(c(h, 0.0), c(h, 0.0), c(h, 0.0), c(-h, 0.0))
}

/// Expand a `CMatrix` 2×2 into a `Mat2`.
pub fn to_mat2(m: &CMatrix) -> Mat2 {
    assert_eq!(m.shape(), (2, 2));
    Mat2::new(m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)])
}

pub fn from_mat2(m: &Mat2) -> CMatrix {
    CMatrix::from_column_slice(2, 2, m.as_slice())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_matrix(d: usize, seed: u64) -> CMatrix {
        // small LCG keeps this test free of RNG plumbing
        let mut s = seed;
        let mut next = || {
            s = s
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((s >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
        };
        CMatrix::from_fn(d, d, |_, _| c(next(), next()))
    }

    fn embed(g: &Mat2, bit: usize, n: usize) -> CMatrix {
        let mut factors = vec![Mat2::identity(); n];
        factors[bit] = *g;
        tensor_factors(&factors)
    }

    #[test]
    fn one_qubit_kernels_match_dense_products() {
        let n = 3;
        let d = 1 << n;
        let g = rotation(0.7, [0.6, 0.0, 0.8]) * c(0.3, 1.1);
        for bit in 0..n {
            let full = embed(&g, bit, n);
            let m = random_matrix(d, 11 + bit as u64);
            let b = random_matrix(d, 97 + bit as u64);

            let mut left = m.clone();
            apply_left_1q(&mut left, &g, bit);
            assert!(max_abs_diff(&left, &(&full * &m)) < 1e-13);

            let mut right = m.clone();
            apply_right_1q(&mut right, &g, bit);
            assert!(max_abs_diff(&right, &(&m * &full)) < 1e-13);

            let t = trace_sandwich_1q(&b, &g, bit, &m);
            let dense = (&b * &full * &m).trace();
            assert!((t - dense).norm() < 1e-12);
        }
    }

    #[test]
    fn trace_product_matches() {
        let a = random_matrix(4, 3);
        let b = random_matrix(4, 5);
        assert!((trace_product(&a, &b) - (&a * &b).trace()).norm() < 1e-13);
    }

    #[test]
    fn tensor_order_puts_first_factor_on_low_bit() {
        // X on qubit 1 flips bit 0: |00> -> |01> (index 1)
        let u = tensor_factors(&[pauli_x(), Mat2::identity()]);
        assert_eq!(u[(1, 0)], ONE);
        assert_eq!(u[(2, 0)], ZERO);
    }

    #[test]
    fn rotation_is_unitary() {
        let r = rotation(1.3, [0.0, 0.6, 0.8]);
        assert!(unitarity_error2(&r) < 1e-15);
    }
}
