//! Shared numerical kernels: adaptive quadrature, root bracketing,
//! monotone interpolation and the symmetric eigensolvers backing the
//! spectral module.

use crate::error::{Error, Result};

/// Composite Simpson estimate on [a, b] with midpoint m.
fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

fn adaptive_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    eps: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(fa, flm, fm, a, m);
    let right = simpson(fm, frm, fb, m, b);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * eps {
        left + right + delta / 15.0
    } else {
        adaptive_step(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1)
            + adaptive_step(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1)
    }
}

/// Adaptive Simpson quadrature of `f` over [a, b] to relative tolerance
/// `rel_tol` (with a small absolute floor so integrals near zero terminate).
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let m = 0.5 * (a + b);
    let fa = f(a);
    let fm = f(m);
    let fb = f(b);
    let whole = simpson(fa, fm, fb, a, b);
    let eps = rel_tol * whole.abs().max(1e-12);
    adaptive_step(&f, a, b, fa, fm, fb, whole, eps, 48)
}

/// Bisection for a root of `f` in [lo, hi]; the endpoints must bracket a
/// sign change. Runs until the bracket is shorter than `xtol`.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, xtol: f64) -> Result<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::InvalidArgument(format!(
            "no sign change on [{lo}, {hi}]"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fmid = f(mid);
        if fmid == 0.0 {
            return Ok(mid);
        }
        if fmid.signum() == flo.signum() {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
        if hi - lo < xtol {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Least-squares straight line through (xs, ys); returns (slope, intercept).
pub fn least_squares_line(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    (slope, intercept)
}

/// Monotone piecewise-cubic interpolant (Fritsch-Carlson slopes).
/// Breakpoints must be strictly increasing; evaluation clamps to the
/// table range.
pub struct MonotoneCubic {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() || xs.len() < 2 {
            return Err(Error::InvalidArgument(
                "interpolation table needs at least two points".into(),
            ));
        }
        if xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument(
                "interpolation abscissae must increase".into(),
            ));
        }
        let n = xs.len();
        let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / h[i]).collect();
        let mut d = vec![0.0; n];
        d[0] = delta[0];
        d[n - 1] = delta[n - 2];
        for i in 1..n - 1 {
            if delta[i - 1] * delta[i] <= 0.0 {
                d[i] = 0.0;
            } else {
                let w1 = 2.0 * h[i] + h[i - 1];
                let w2 = h[i] + 2.0 * h[i - 1];
                d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
            }
        }
        // clamp endpoint slopes to preserve monotonicity
        for (i, k) in [(0usize, 0usize), (n - 1, n - 2)] {
            if d[i] * delta[k] <= 0.0 {
                d[i] = 0.0;
            } else if d[i].abs() > 3.0 * delta[k].abs() {
                d[i] = 3.0 * delta[k];
            }
        }
        Ok(Self {
            xs,
            ys,
            slopes: d,
        })
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.ys[0];
        }
        if x >= self.xs[n - 1] {
            return self.ys[n - 1];
        }
        let k = match self
            .xs
            .binary_search_by(|p| p.partial_cmp(&x).unwrap())
        {
            Ok(i) => return self.ys[i],
            Err(i) => i - 1,
        };
        let h = self.xs[k + 1] - self.xs[k];
        let t = (x - self.xs[k]) / h;
        let h00 = (1.0 + 2.0 * t) * (1.0 - t) * (1.0 - t);
        let h10 = t * (1.0 - t) * (1.0 - t);
        let h01 = t * t * (3.0 - 2.0 * t);
        let h11 = t * t * (t - 1.0);
        h00 * self.ys[k] + h10 * h * self.slopes[k] + h01 * self.ys[k + 1] + h11 * h * self.slopes[k + 1]
    }
}

/// Number of eigenvalues of the symmetric tridiagonal (diag, off) strictly
/// below `x`, by the Sturm sequence count.
fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = diag[0] - x;
    if q < 0.0 {
        count += 1;
    }
    for i in 1..diag.len() {
        let denom = if q == 0.0 { 1e-300 } else { q };
        q = diag[i] - x - off[i - 1] * off[i - 1] / denom;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Solve (T - shift) v = rhs for tridiagonal T with partial pivoting.
fn tridiag_solve_shifted(diag: &[f64], off: &[f64], shift: f64, rhs: &mut [f64]) {
    let n = diag.len();
    // working copies of the three bands plus the fill-in band
    let mut a: Vec<f64> = off.to_vec(); // sub
    let mut b: Vec<f64> = diag.iter().map(|d| d - shift).collect();
    let mut c: Vec<f64> = off.to_vec(); // super
    let mut d = vec![0.0; n]; // second super from pivoting
    for i in 0..n - 1 {
        if a[i].abs() > b[i].abs() {
            rhs.swap(i, i + 1);
            std::mem::swap(&mut b[i], &mut a[i]);
            let t = c[i];
            c[i] = b[i + 1];
            b[i + 1] = t;
            if i + 1 < n - 1 {
                d[i] = c[i + 1];
                c[i + 1] = 0.0;
            }
        }
        let piv = if b[i] == 0.0 { 1e-300 } else { b[i] };
        let m = a[i] / piv;
        b[i + 1] -= m * c[i];
        if i + 1 < n - 1 {
            c[i + 1] -= m * d[i];
        }
        rhs[i + 1] -= m * rhs[i];
    }
    // back substitution
    for i in (0..n).rev() {
        let mut acc = rhs[i];
        if i + 1 < n {
            acc -= c[i] * rhs[i + 1];
        }
        if i + 2 < n {
            acc -= d[i] * rhs[i + 2];
        }
        let piv = if b[i] == 0.0 { 1e-300 } else { b[i] };
        rhs[i] = acc / piv;
    }
}

/// Lowest `k` eigenpairs of a symmetric tridiagonal matrix via Sturm
/// bisection plus inverse iteration. Eigenvalues ascend; vectors have unit
/// Euclidean norm.
pub fn tridiag_lowest_eigenpairs(
    diag: &[f64],
    off: &[f64],
    k: usize,
) -> Result<Vec<(f64, Vec<f64>)>> {
    let n = diag.len();
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!(
            "requested {k} eigenpairs from dimension {n}"
        )));
    }
    // Gershgorin bounds
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let mut r = 0.0;
        if i > 0 {
            r += off[i - 1].abs();
        }
        if i < n - 1 {
            r += off[i].abs();
        }
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    let scale = (hi - lo).max(1.0);
    let mut pairs = Vec::with_capacity(k);
    for m in 0..k {
        // bisect for the (m+1)-th eigenvalue
        let (mut a, mut b) = (lo, hi);
        while b - a > 1e-14 * scale {
            let mid = 0.5 * (a + b);
            if sturm_count(diag, off, mid) > m {
                b = mid;
            } else {
                a = mid;
            }
        }
        let lambda = 0.5 * (a + b);
        // inverse iteration with a slightly perturbed shift
        let shift = lambda + 1e-11 * scale;
        let mut v: Vec<f64> = (0..n)
            .map(|i| ((i * 2654435761 + 12345) % 1000) as f64 / 1000.0 + 0.5)
            .collect();
        for _ in 0..4 {
            tridiag_solve_shifted(diag, off, shift, &mut v);
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if !norm.is_finite() || norm == 0.0 {
                return Err(Error::NonFinite("tridiagonal inverse iteration"));
            }
            v.iter_mut().for_each(|x| *x /= norm);
        }
        // one Rayleigh-quotient refinement of the eigenvalue
        let mut tv = vec![0.0; n];
        for i in 0..n {
            tv[i] = diag[i] * v[i]
                + if i > 0 { off[i - 1] * v[i - 1] } else { 0.0 }
                + if i < n - 1 { off[i] * v[i + 1] } else { 0.0 };
        }
        let rq: f64 = v.iter().zip(&tv).map(|(a, b)| a * b).sum();
        pairs.push((rq, v));
    }
    Ok(pairs)
}

/// Residual ||A v - lambda v||_2 for a tridiagonal A and unit v.
pub fn tridiag_residual(diag: &[f64], off: &[f64], lambda: f64, v: &[f64]) -> f64 {
    let n = diag.len();
    let mut acc = 0.0;
    for i in 0..n {
        let mut r = diag[i] * v[i] - lambda * v[i];
        if i > 0 {
            r += off[i - 1] * v[i - 1];
        }
        if i < n - 1 {
            r += off[i] * v[i + 1];
        }
        acc += r * r;
    }
    acc.sqrt()
}

/// Full eigendecomposition of a dense symmetric matrix, eigenvalues
/// ascending. Backed by faer's self-adjoint solver.
pub fn dense_symmetric_eigen(mat: &faer::Mat<f64>) -> Result<(Vec<f64>, faer::Mat<f64>)> {
    let evd = mat
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| Error::InvalidArgument(format!("eigensolver failed: {e:?}")))?;
    let n = mat.nrows();
    let s = evd.S().column_vector();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| s[i].partial_cmp(&s[j]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| s[i]).collect();
    let mut vectors = faer::Mat::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        for row in 0..n {
            vectors[(row, col)] = evd.U()[(row, src)];
        }
    }
    Ok((values, vectors))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_exact_on_cubics() {
        let v = adaptive_simpson(|x| x * x * x - 2.0 * x + 1.0, -1.0, 2.0, 1e-10);
        // antiderivative x^4/4 - x^2 + x
        let exact = (4.0 - 4.0 + 2.0) - (0.25 - 1.0 - 1.0);
        assert!((v - exact).abs() < 1e-12);
    }

    #[test]
    fn simpson_oscillatory() {
        let v = adaptive_simpson(|x| (10.0 * x).sin(), 0.0, 1.0, 1e-10);
        let exact = (1.0 - (10.0f64).cos()) / 10.0;
        assert!((v - exact).abs() < 1e-9);
    }

    #[test]
    fn bisect_finds_sqrt2() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert!((r - std::f64::consts::SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn monotone_cubic_stays_monotone() {
        let xs = vec![0.0, 1.0, 2.0, 3.0, 4.0];
        let ys = vec![0.0, 0.1, 0.5, 0.9, 1.0];
        let interp = MonotoneCubic::new(xs, ys).unwrap();
        let mut prev = interp.eval(0.0);
        for i in 1..=400 {
            let x = i as f64 / 100.0;
            let y = interp.eval(x);
            assert!(y >= prev - 1e-14);
            prev = y;
        }
        assert!((interp.eval(1.0) - 0.1).abs() < 1e-14);
    }

    #[test]
    fn tridiag_dirichlet_laplacian_spectrum() {
        // -u'' on (0,1) with zero boundary: lambda_m = (4/h^2) sin^2(m pi h / 2)
        let m = 99;
        let h = 1.0 / (m + 1) as f64;
        let diag = vec![2.0 / (h * h); m];
        let off = vec![-1.0 / (h * h); m - 1];
        let pairs = tridiag_lowest_eigenpairs(&diag, &off, 3).unwrap();
        for (idx, (lam, v)) in pairs.iter().enumerate() {
            let k = (idx + 1) as f64;
            let exact = 4.0 / (h * h) * (k * std::f64::consts::PI * h / 2.0).sin().powi(2);
            assert!(
                (lam - exact).abs() < 1e-8 * exact,
                "lambda_{idx} = {lam}, exact {exact}"
            );
            let res = tridiag_residual(&diag, &off, *lam, v);
            assert!(res < 1e-7 * (4.0 / (h * h)));
        }
    }

    #[test]
    fn dense_eigen_matches_tridiag() {
        let m = 40;
        let h = 1.0 / (m + 1) as f64;
        let mut mat = faer::Mat::zeros(m, m);
        for i in 0..m {
            mat[(i, i)] = 2.0 / (h * h);
            if i + 1 < m {
                mat[(i, i + 1)] = -1.0 / (h * h);
                mat[(i + 1, i)] = -1.0 / (h * h);
            }
        }
        let (vals, _) = dense_symmetric_eigen(&mat).unwrap();
        let diag = vec![2.0 / (h * h); m];
        let off = vec![-1.0 / (h * h); m - 1];
        let pairs = tridiag_lowest_eigenpairs(&diag, &off, 3).unwrap();
        for i in 0..3 {
            assert!((vals[i] - pairs[i].0).abs() < 1e-8 * pairs[i].0);
        }
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
    }
}
