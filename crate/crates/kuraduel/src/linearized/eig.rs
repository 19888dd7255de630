//! Dense eigensolvers: a Jacobi rotation solver for symmetric matrices
//! (orthonormal eigenvectors, used for population Laplacians) and a general
//! real nonsymmetric solver: balance, elimination to upper Hessenberg,
//! Francis double-shift QR for the eigenvalues, then inverse iteration on the
//! original matrix for right eigenvectors.

use ndarray::Array2;
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EigError {
    #[error("QR iteration failed to converge within the iteration cap")]
    NonConvergence,
    #[error("matrix has non-finite entries")]
    NonFinite,
}

/// Max-abs-row-sum norm, used to scale tolerances.
pub fn inf_norm(a: &Array2<f64>) -> f64 {
    a.rows()
        .into_iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Jacobi eigensolver for symmetric matrices. Returns eigenvalues ascending
/// and the matching orthonormal eigenvectors as columns.
pub fn eig_symmetric(a: &Array2<f64>) -> (Vec<f64>, Array2<f64>) {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "matrix must be square");
    let mut d = a.clone();
    let mut v = Array2::<f64>::eye(n);
    let tol = 1e-14 * inf_norm(a).max(1.0);
    let max_sweeps = 100 * n.max(1) * n.max(1);

    for _ in 0..max_sweeps {
        let mut p = 0;
        let mut q = 1;
        let mut off = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                if d[[i, j]].abs() > off {
                    off = d[[i, j]].abs();
                    p = i;
                    q = j;
                }
            }
        }
        if off <= tol {
            break;
        }
        let app = d[[p, p]];
        let aqq = d[[q, q]];
        let apq = d[[p, q]];
        let tau = (aqq - app) / (2.0 * apq);
        let t = if tau >= 0.0 {
            1.0 / (tau + (1.0 + tau * tau).sqrt())
        } else {
            -1.0 / (-tau + (1.0 + tau * tau).sqrt())
        };
        let c = 1.0 / (1.0 + t * t).sqrt();
        let s = t * c;
        for i in 0..n {
            if i != p && i != q {
                let dip = d[[i, p]];
                let diq = d[[i, q]];
                d[[i, p]] = c * dip - s * diq;
                d[[p, i]] = d[[i, p]];
                d[[i, q]] = s * dip + c * diq;
                d[[q, i]] = d[[i, q]];
            }
        }
        d[[p, p]] = c * c * app - 2.0 * s * c * apq + s * s * aqq;
        d[[q, q]] = s * s * app + 2.0 * s * c * apq + c * c * aqq;
        d[[p, q]] = 0.0;
        d[[q, p]] = 0.0;
        for i in 0..n {
            let vip = v[[i, p]];
            let viq = v[[i, q]];
            v[[i, p]] = c * vip - s * viq;
            v[[i, q]] = s * vip + c * viq;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[[i, i]].total_cmp(&d[[j, j]]));
    let evals: Vec<f64> = order.iter().map(|&i| d[[i, i]]).collect();
    let mut evecs = Array2::<f64>::zeros((n, n));
    for (col, &i) in order.iter().enumerate() {
        evecs.column_mut(col).assign(&v.column(i));
    }
    (evals, evecs)
}

/// NR-style balancing: similarity scaling by powers of two so row and column
/// norms roughly match. Eigenvalues are unchanged.
fn balance(a: &mut Array2<f64>) {
    let radix = 2.0f64;
    let sqrdx = radix * radix;
    let n = a.nrows();
    loop {
        let mut done = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[[j, i]].abs();
                    r += a[[i, j]].abs();
                }
            }
            if c != 0.0 && r != 0.0 {
                let mut g = r / radix;
                let mut f = 1.0;
                let s = c + r;
                let mut c = c;
                while c < g {
                    f *= radix;
                    c *= sqrdx;
                }
                g = r * radix;
                while c > g {
                    f /= radix;
                    c /= sqrdx;
                }
                if (c + r) / f < 0.95 * s {
                    done = false;
                    let g = 1.0 / f;
                    for j in 0..n {
                        a[[i, j]] *= g;
                    }
                    for j in 0..n {
                        a[[j, i]] *= f;
                    }
                }
            }
        }
        if done {
            break;
        }
    }
}

/// Reduce to upper Hessenberg form by stabilized elementary transformations.
fn to_hessenberg(a: &mut Array2<f64>) {
    let n = a.nrows();
    if n < 3 {
        return;
    }
    for m in 1..(n - 1) {
        let mut x = 0.0f64;
        let mut i = m;
        for j in m..n {
            if a[[j, m - 1]].abs() > x.abs() {
                x = a[[j, m - 1]];
                i = j;
            }
        }
        if i != m {
            for j in (m - 1)..n {
                a.swap([i, j], [m, j]);
            }
            for j in 0..n {
                a.swap([j, i], [j, m]);
            }
        }
        if x != 0.0 {
            for i in (m + 1)..n {
                let mut y = a[[i, m - 1]];
                if y != 0.0 {
                    y /= x;
                    a[[i, m - 1]] = y;
                    for j in m..n {
                        let t = y * a[[m, j]];
                        a[[i, j]] -= t;
                    }
                    for j in 0..n {
                        let t = y * a[[j, i]];
                        a[[j, m]] += t;
                    }
                }
            }
        }
    }
    // Stored multipliers below the subdiagonal are not part of the
    // Hessenberg matrix; clear them before QR.
    for i in 2..n {
        for j in 0..(i - 1) {
            a[[i, j]] = 0.0;
        }
    }
}

/// Francis double-shift QR on an upper Hessenberg matrix; eigenvalues only.
/// A shared iteration budget of `30 n` sweeps covers the whole matrix;
/// most roots deflate within a few sweeps.
fn hqr(a: &mut Array2<f64>) -> Result<Vec<Complex64>, EigError> {
    let n = a.nrows();
    let mut evals = vec![Complex64::new(0.0, 0.0); n];
    if n == 0 {
        return Ok(evals);
    }
    let eps = f64::EPSILON;
    let mut anorm = 0.0f64;
    for i in 0..n {
        for j in i.saturating_sub(1)..n {
            anorm += a[[i, j]].abs();
        }
    }
    let mut budget = 30 * n as isize;
    let mut nn: isize = n as isize - 1;
    let mut t = 0.0f64;
    let (mut p, mut q, mut r, mut x, mut y, mut z, mut w, mut s);

    while nn >= 0 {
        let mut its = 0;
        loop {
            // Find a negligible subdiagonal element to deflate at.
            let mut l = nn;
            while l > 0 {
                s = a[[(l - 1) as usize, (l - 1) as usize]].abs() + a[[l as usize, l as usize]].abs();
                if s == 0.0 {
                    s = anorm;
                }
                if a[[l as usize, (l - 1) as usize]].abs() <= eps * s {
                    a[[l as usize, (l - 1) as usize]] = 0.0;
                    break;
                }
                l -= 1;
            }
            x = a[[nn as usize, nn as usize]];
            if l == nn {
                // One real root.
                evals[nn as usize] = Complex64::new(x + t, 0.0);
                nn -= 1;
                break;
            }
            y = a[[(nn - 1) as usize, (nn - 1) as usize]];
            w = a[[nn as usize, (nn - 1) as usize]] * a[[(nn - 1) as usize, nn as usize]];
            if l == nn - 1 {
                // A 2x2 block yields a real or complex-conjugate pair.
                p = 0.5 * (y - x);
                q = p * p + w;
                z = q.abs().sqrt();
                x += t;
                if q >= 0.0 {
                    z = p + z.copysign(p);
                    evals[(nn - 1) as usize] = Complex64::new(x + z, 0.0);
                    evals[nn as usize] = if z != 0.0 {
                        Complex64::new(x - w / z, 0.0)
                    } else {
                        Complex64::new(x + z, 0.0)
                    };
                } else {
                    evals[(nn - 1) as usize] = Complex64::new(x + p, z);
                    evals[nn as usize] = Complex64::new(x + p, -z);
                }
                nn -= 2;
                break;
            }
            budget -= 1;
            if budget < 0 {
                return Err(EigError::NonConvergence);
            }
            if its == 30 {
                // Restart the exceptional-shift ladder for a stubborn block.
                its = 0;
            }
            if its == 10 || its == 20 {
                // Exceptional shift.
                t += x;
                for i in 0..=nn as usize {
                    a[[i, i]] -= x;
                }
                s = a[[nn as usize, (nn - 1) as usize]].abs()
                    + a[[(nn - 1) as usize, (nn - 2) as usize]].abs();
                y = 0.75 * s;
                x = y;
                w = -0.4375 * s * s;
            }
            its += 1;
            // Look for two consecutive small subdiagonal elements.
            let mut m = nn - 2;
            loop {
                z = a[[m as usize, m as usize]];
                r = x - z;
                s = y - z;
                p = (r * s - w) / a[[(m + 1) as usize, m as usize]] + a[[m as usize, (m + 1) as usize]];
                q = a[[(m + 1) as usize, (m + 1) as usize]] - z - r - s;
                r = a[[(m + 2) as usize, (m + 1) as usize]];
                s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let u = a[[m as usize, (m - 1) as usize]].abs() * (q.abs() + r.abs());
                let v = p.abs()
                    * (a[[(m - 1) as usize, (m - 1) as usize]].abs()
                        + z.abs()
                        + a[[(m + 1) as usize, (m + 1) as usize]].abs());
                if u <= eps * v {
                    break;
                }
                m -= 1;
            }
            for i in m..(nn - 1) {
                a[[(i + 2) as usize, i as usize]] = 0.0;
                if i != m {
                    a[[(i + 2) as usize, (i - 1) as usize]] = 0.0;
                }
            }
            // Double QR sweep on rows l..=nn, columns m..=nn.
            for k in m..nn {
                if k != m {
                    p = a[[k as usize, (k - 1) as usize]];
                    q = a[[(k + 1) as usize, (k - 1) as usize]];
                    r = 0.0;
                    if k + 1 != nn {
                        r = a[[(k + 2) as usize, (k - 1) as usize]];
                    }
                    x = p.abs() + q.abs() + r.abs();
                    if x != 0.0 {
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                }
                s = (p * p + q * q + r * r).sqrt().copysign(p);
                if s == 0.0 {
                    continue;
                }
                if k == m {
                    if l != m {
                        a[[k as usize, (k - 1) as usize]] = -a[[k as usize, (k - 1) as usize]];
                    }
                } else {
                    a[[k as usize, (k - 1) as usize]] = -s * x;
                }
                p += s;
                x = p / s;
                y = q / s;
                z = r / s;
                q /= p;
                r /= p;
                for j in k as usize..n {
                    let mut pp = a[[k as usize, j]] + q * a[[(k + 1) as usize, j]];
                    if k + 1 != nn {
                        pp += r * a[[(k + 2) as usize, j]];
                        a[[(k + 2) as usize, j]] -= pp * z;
                    }
                    a[[(k + 1) as usize, j]] -= pp * y;
                    a[[k as usize, j]] -= pp * x;
                }
                let mmin = if nn < k + 3 { nn } else { k + 3 };
                for i in l as usize..=(mmin as usize) {
                    let mut pp = x * a[[i, k as usize]] + y * a[[i, (k + 1) as usize]];
                    if k + 1 != nn {
                        pp += z * a[[i, (k + 2) as usize]];
                        a[[i, (k + 2) as usize]] -= pp * r;
                    }
                    a[[i, (k + 1) as usize]] -= pp * q;
                    a[[i, k as usize]] -= pp;
                }
            }
            if l + 1 >= nn {
                break;
            }
        }
    }
    Ok(evals)
}

/// Eigenvalues of a general real square matrix, sorted ascending by real
/// part with ties broken by imaginary part.
pub fn eigenvalues(a: &Array2<f64>) -> Result<Vec<Complex64>, EigError> {
    assert_eq!(a.nrows(), a.ncols(), "matrix must be square");
    if a.iter().any(|v| !v.is_finite()) {
        return Err(EigError::NonFinite);
    }
    let mut work = a.clone();
    balance(&mut work);
    to_hessenberg(&mut work);
    let mut evals = hqr(&mut work)?;
    evals.sort_by(|u, v| u.re.total_cmp(&v.re).then(u.im.total_cmp(&v.im)));
    Ok(evals)
}

/// LU decomposition with partial pivoting in complex arithmetic. Near-zero
/// pivots are replaced by a tiny multiple of the matrix scale so that shifted
/// systems at an exact eigenvalue stay solvable.
fn lu_decompose(b: &mut Array2<Complex64>, piv: &mut [usize], scale: f64) {
    let n = b.nrows();
    let tiny = f64::EPSILON * scale.max(f64::MIN_POSITIVE);
    for k in 0..n {
        let mut pk = k;
        let mut best = b[[k, k]].norm();
        for i in (k + 1)..n {
            let v = b[[i, k]].norm();
            if v > best {
                best = v;
                pk = i;
            }
        }
        piv[k] = pk;
        if pk != k {
            for j in 0..n {
                b.swap([k, j], [pk, j]);
            }
        }
        if b[[k, k]].norm() < tiny {
            b[[k, k]] = Complex64::new(tiny, 0.0);
        }
        let inv = Complex64::new(1.0, 0.0) / b[[k, k]];
        for i in (k + 1)..n {
            let f = b[[i, k]] * inv;
            b[[i, k]] = f;
            for j in (k + 1)..n {
                let t = f * b[[k, j]];
                b[[i, j]] -= t;
            }
        }
    }
}

fn lu_solve(b: &Array2<Complex64>, piv: &[usize], rhs: &mut [Complex64]) {
    let n = b.nrows();
    for k in 0..n {
        rhs.swap(k, piv[k]);
        for i in (k + 1)..n {
            let t = b[[i, k]] * rhs[k];
            rhs[i] -= t;
        }
    }
    for k in (0..n).rev() {
        for j in (k + 1)..n {
            let t = b[[k, j]] * rhs[j];
            rhs[k] -= t;
        }
        rhs[k] /= b[[k, k]];
    }
}

fn residual_of(a: &Array2<f64>, lambda: Complex64, v: &[Complex64]) -> f64 {
    let n = v.len();
    let mut sum = 0.0f64;
    for i in 0..n {
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..n {
            acc += a[[i, j]] * v[j];
        }
        acc -= lambda * v[i];
        sum += acc.norm_sqr();
    }
    sum.sqrt()
}

/// Normalize to unit 2-norm with a deterministic phase: the largest-modulus
/// component is made real and positive.
fn normalize_phase(v: &mut [Complex64]) {
    let mut imax = 0;
    let mut best = 0.0f64;
    for (i, c) in v.iter().enumerate() {
        if c.norm() > best {
            best = c.norm();
            imax = i;
        }
    }
    if best == 0.0 {
        return;
    }
    let phase = v[imax] / best;
    let norm: f64 = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    for c in v.iter_mut() {
        *c /= phase * norm;
    }
}

fn inverse_iteration(a: &Array2<f64>, lambda: Complex64, anorm: f64) -> (Vec<Complex64>, f64) {
    let n = a.nrows();
    let mut lu = Array2::<Complex64>::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            lu[[i, j]] = Complex64::new(a[[i, j]], 0.0);
        }
        lu[[i, i]] -= lambda;
    }
    let mut piv = vec![0usize; n];
    lu_decompose(&mut lu, &mut piv, anorm.max(1.0));

    let mut best_vec = vec![Complex64::new(0.0, 0.0); n];
    let mut best_res = f64::INFINITY;
    // Deterministic xorshift start vectors per restart.
    let mut state = 0x9E37_79B9_7F4A_7C15u64;
    for _restart in 0..3 {
        let mut v: Vec<Complex64> = (0..n)
            .map(|_| {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                let re = (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                let im = (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
                Complex64::new(1.0 + re, im)
            })
            .collect();
        normalize_phase(&mut v);
        for _it in 0..4 {
            let mut x = v.clone();
            lu_solve(&lu, &piv, &mut x);
            normalize_phase(&mut x);
            v = x;
            let res = residual_of(a, lambda, &v);
            if res < best_res {
                best_res = res;
                best_vec = v.clone();
            }
            if best_res <= 1e-12 * anorm.max(1.0) {
                return (best_vec, best_res);
            }
        }
        if best_res <= 1e-9 * anorm.max(1.0) {
            break;
        }
    }
    (best_vec, best_res)
}

/// Full complex spectrum of a general real square matrix.
#[derive(Debug, Clone)]
pub struct Spectrum {
    /// Eigenvalues sorted ascending by real part, ties by imaginary part.
    pub eigenvalues: Vec<Complex64>,
    /// Matching right eigenvectors (unit 2-norm), one per eigenvalue.
    pub eigenvectors: Vec<Vec<Complex64>>,
    /// max over pairs of ||A v - lambda v||_2.
    pub residual: f64,
}

/// Eigen-decomposition of a general real square matrix: eigenvalues via
/// balanced Hessenberg + double-shift QR, right eigenvectors via inverse
/// iteration on the original matrix.
pub fn eig_general(a: &Array2<f64>) -> Result<Spectrum, EigError> {
    let evals = eigenvalues(a)?;
    let anorm = inf_norm(a);
    let mut eigenvectors = Vec::with_capacity(evals.len());
    let mut residual = 0.0f64;
    for &lambda in &evals {
        let (v, res) = inverse_iteration(a, lambda, anorm);
        residual = residual.max(res);
        eigenvectors.push(v);
    }
    Ok(Spectrum {
        eigenvalues: evals,
        eigenvectors,
        residual,
    })
}
