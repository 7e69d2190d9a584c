//! Small dense linear algebra on flat row-major storage.
//!
//! Basis sizes stay below ~100, so hand-rolled O(n³) factorizations are
//! simpler and faster than pulling in a linear-algebra crate.

/// Cholesky factorization `a = L Lᵀ` in place (lower triangle of `a`
/// becomes `L`, upper triangle is left untouched).
///
/// Fails when a pivot falls below `tol` times the largest diagonal entry,
/// which signals a matrix that is not positive definite to working
/// precision.
pub(crate) fn cholesky_in_place(a: &mut [f64], n: usize, tol: f64) -> Result<(), String> {
    debug_assert_eq!(a.len(), n * n);
    let scale = (0..n).map(|i| a[i * n + i].abs()).fold(0.0, f64::max);
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= a[j * n + k] * a[j * n + k];
        }
        if d.is_nan() || d <= tol * scale {
            return Err(format!(
                "matrix not positive definite: pivot {d:.3e} at column {j} (scale {scale:.3e})"
            ));
        }
        let d = d.sqrt();
        a[j * n + j] = d;
        for i in (j + 1)..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = s / d;
        }
    }
    Ok(())
}

/// Solve `L Lᵀ x = b` in place given the Cholesky factor `L`.
pub(crate) fn cholesky_solve(l: &[f64], n: usize, b: &mut [f64]) {
    // forward: L y = b
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * n + k] * b[k];
        }
        b[i] = s / l[i * n + i];
    }
    // backward: Lᵀ x = y
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in (i + 1)..n {
            s -= l[k * n + i] * b[k];
        }
        b[i] = s / l[i * n + i];
    }
}

/// Invert the transpose of a lower-triangular Cholesky factor: returns the
/// upper-triangular `T = L⁻ᵀ`, so that `Tᵀ (L Lᵀ) T = I`.
pub(crate) fn inverse_transpose_of_lower(l: &[f64], n: usize) -> Vec<f64> {
    let mut t = vec![0.0; n * n];
    // Solve Lᵀ t_col = e_j for each j; Lᵀ is upper triangular.
    for j in 0..n {
        t[j * n + j] = 1.0 / l[j * n + j];
        for i in (0..j).rev() {
            let mut s = 0.0;
            for k in (i + 1)..=j {
                s -= l[k * n + i] * t[k * n + j];
            }
            t[i * n + j] = s / l[i * n + i];
        }
    }
    t
}

/// Solve `a x = b` by LU with partial pivoting; `a` is consumed as scratch
/// and `b` is overwritten with the solution.
pub(crate) fn lu_solve_in_place(a: &mut [f64], n: usize, b: &mut [f64]) -> Result<(), String> {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(b.len(), n);
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let mut piv = k;
        let mut best = a[perm[k] * n + k].abs();
        for i in (k + 1)..n {
            let v = a[perm[i] * n + k].abs();
            if v > best {
                best = v;
                piv = i;
            }
        }
        if best == 0.0 {
            return Err(format!("singular matrix at pivot column {k}"));
        }
        perm.swap(k, piv);
        let pk = perm[k];
        for &pi in &perm[(k + 1)..n] {
            let m = a[pi * n + k] / a[pk * n + k];
            a[pi * n + k] = m;
            for j in (k + 1)..n {
                a[pi * n + j] -= m * a[pk * n + j];
            }
        }
    }
    // apply permutation to rhs, then forward/backward substitution
    let pb: Vec<f64> = perm.iter().map(|&pi| b[pi]).collect();
    b.copy_from_slice(&pb);
    for i in 1..n {
        let pi = perm[i];
        let mut s = b[i];
        for k in 0..i {
            s -= a[pi * n + k] * b[k];
        }
        b[i] = s;
    }
    for i in (0..n).rev() {
        let pi = perm[i];
        let mut s = b[i];
        for k in (i + 1)..n {
            s -= a[pi * n + k] * b[k];
        }
        b[i] = s / a[pi * n + i];
    }
    Ok(())
}

/// `y[q] = Σ_j x[j] · mat[j·cols + q]` — synthesis of node samples from
/// coefficients against a (rows × cols) table stored row-major.
pub(crate) fn coeffs_times_table(mat: &[f64], rows: usize, cols: usize, x: &[f64]) -> Vec<f64> {
    debug_assert_eq!(x.len(), rows);
    let mut y = vec![0.0; cols];
    for (j, &xj) in x.iter().enumerate() {
        if xj == 0.0 {
            continue;
        }
        let row = &mat[j * cols..(j + 1) * cols];
        for (yq, &m) in y.iter_mut().zip(row) {
            *yq += xj * m;
        }
    }
    y
}

/// `y[j] = Σ_q mat[j·cols + q] · z[q]` — per-basis-function quadrature
/// contraction against node data.
pub(crate) fn table_times_nodes(mat: &[f64], rows: usize, cols: usize, z: &[f64]) -> Vec<f64> {
    debug_assert_eq!(z.len(), cols);
    let mut y = vec![0.0; rows];
    for j in 0..rows {
        let row = &mat[j * cols..(j + 1) * cols];
        let mut s = 0.0;
        for (&m, &zq) in row.iter().zip(z) {
            s += m * zq;
        }
        y[j] = s;
    }
    y
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_recovers_spd_solve() {
        // A = [[4,2],[2,3]], b = [8, 7] -> x = [1.5, 4/3]... verify A x = b
        let mut a = vec![4.0, 2.0, 2.0, 3.0];
        cholesky_in_place(&mut a, 2, 1e-14).unwrap();
        let mut b = vec![8.0, 7.0];
        cholesky_solve(&a, 2, &mut b);
        let (x0, x1) = (b[0], b[1]);
        assert!((4.0 * x0 + 2.0 * x1 - 8.0).abs() < 1e-12);
        assert!((2.0 * x0 + 3.0 * x1 - 7.0).abs() < 1e-12);
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let mut a = vec![1.0, 2.0, 2.0, 1.0]; // eigenvalues 3, -1
        assert!(cholesky_in_place(&mut a, 2, 1e-14).is_err());
    }

    #[test]
    fn transform_orthonormalizes_gram() {
        let g = [2.0, 0.5, 0.1, 0.5, 3.0, 0.2, 0.1, 0.2, 1.5];
        let mut l = g;
        cholesky_in_place(&mut l, 3, 1e-14).unwrap();
        let t = inverse_transpose_of_lower(&l, 3);
        // check Tᵀ G T = I
        for i in 0..3 {
            for j in 0..3 {
                let mut s = 0.0;
                for p in 0..3 {
                    for q in 0..3 {
                        s += t[p * 3 + i] * g[p * 3 + q] * t[q * 3 + j];
                    }
                }
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((s - want).abs() < 1e-12, "TᵀGT[{i},{j}] = {s}");
            }
        }
    }

    #[test]
    fn lu_solves_unsymmetric_system() {
        let mut a = vec![0.0, 2.0, 1.0, 1.0, 1.0, 0.0, 3.0, 0.0, 1.0];
        let mut b = vec![5.0, 3.0, 4.0];
        lu_solve_in_place(&mut a, 3, &mut b).unwrap();
        // original A times x
        let a0 = [0.0, 2.0, 1.0, 1.0, 1.0, 0.0, 3.0, 0.0, 1.0];
        for (i, want) in [5.0, 3.0, 4.0].iter().enumerate() {
            let got: f64 = (0..3).map(|j| a0[i * 3 + j] * b[j]).sum();
            assert!((got - want).abs() < 1e-12);
        }
    }
}
