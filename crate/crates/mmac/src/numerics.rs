//! Complex dense matrix primitives behind every formula in the crate:
//! Hermitian PSD assembly, Gram sums H·Q·H†, log-determinants, and an
//! independent eigenvalue route used to cross-check the factorization.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Absolute tolerance for the Hermitian symmetry check.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Numerical PSD floor: eigenvalues may dip this far below zero.
pub const PSD_EIGENVALUE_FLOOR: f64 = -1e-10;

/// Dense complex matrix, row-major. All entries are finite by construction.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::Config(format!(
                "matrix storage holds {} entries, expected {}x{}",
                entries.len(),
                rows,
                cols
            )));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Validation("matrix entry is not finite".into()));
        }
        Ok(Self { rows, cols, entries })
    }

    pub fn from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> Complex64,
    ) -> Result<Self> {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        Self::new(rows, cols, entries)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, entries: vec![Complex64::ZERO; rows * cols] }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        self.entries[i * self.cols + j]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }
}

/// Hermitian positive semidefinite matrix (covariances Q and Gram sums G).
///
/// `try_new` enforces Hermitian symmetry within [`HERMITIAN_TOL`] and
/// eigenvalues above [`PSD_EIGENVALUE_FLOOR`]; internal constructors are used
/// where PSD-ness holds by construction.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianPsd {
    dim: usize,
    entries: Vec<Complex64>,
}

impl HermitianPsd {
    pub fn try_new(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::Config(format!(
                "matrix storage holds {} entries, expected {dim}x{dim}",
                entries.len()
            )));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Validation("matrix entry is not finite".into()));
        }
        for i in 0..dim {
            for j in i..dim {
                let a = entries[i * dim + j];
                let b = entries[j * dim + i].conj();
                if (a - b).norm() > HERMITIAN_TOL {
                    return Err(Error::Validation(format!(
                        "matrix is not Hermitian at ({i},{j}): asymmetry {:.3e}",
                        (a - b).norm()
                    )));
                }
            }
        }
        let m = Self { dim, entries };
        let min_eig = m.eigenvalues().first().copied().unwrap_or(0.0);
        if min_eig < PSD_EIGENVALUE_FLOOR {
            return Err(Error::Validation(format!(
                "matrix is not positive semidefinite: min eigenvalue {min_eig:.3e}"
            )));
        }
        Ok(m)
    }

    /// For matrices PSD by construction (Gram sums, isotropic covariances).
    pub(crate) fn from_parts_unchecked(dim: usize, entries: Vec<Complex64>) -> Self {
        debug_assert_eq!(entries.len(), dim * dim);
        Self { dim, entries }
    }

    pub fn zero(dim: usize) -> Self {
        Self { dim, entries: vec![Complex64::ZERO; dim * dim] }
    }

    /// value·I, the isotropic covariance building block.
    pub fn scaled_identity(dim: usize, value: f64) -> Result<Self> {
        if !(value.is_finite() && value >= 0.0) {
            return Err(Error::Validation(format!(
                "identity scale must be finite and nonnegative, got {value}"
            )));
        }
        let mut entries = vec![Complex64::ZERO; dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = Complex64::new(value, 0.0);
        }
        Ok(Self { dim, entries })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        debug_assert!(i < self.dim && j < self.dim);
        self.entries[i * self.dim + j]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    /// Real trace (the imaginary part is zero for Hermitian storage).
    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.entries[i * self.dim + i].re).sum()
    }

    /// Eigenvalues in ascending order, via the real symmetric embedding
    /// [[X, -Y], [Y, X]] of A = X + iY and a cyclic Jacobi sweep. This is the
    /// oracle route: it shares no code with the Cholesky factorization.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let d = self.dim;
        if d == 0 {
            return Vec::new();
        }
        let n = 2 * d;
        let mut a = vec![0.0_f64; n * n];
        for i in 0..d {
            for j in 0..d {
                let z = self.entries[i * d + j];
                a[i * n + j] = z.re;
                a[(i + d) * n + (j + d)] = z.re;
                a[i * n + (j + d)] = -z.im;
                a[(i + d) * n + j] = z.im;
            }
        }
        let mut eig = jacobi_symmetric_eigenvalues(&mut a, n);
        eig.sort_by(|x, y| x.partial_cmp(y).expect("eigenvalues are finite"));
        // The embedding doubles every eigenvalue of A; collapse adjacent pairs.
        (0..d).map(|i| 0.5 * (eig[2 * i] + eig[2 * i + 1])).collect()
    }
}

/// Eigenvalues of a dense symmetric matrix by cyclic Jacobi rotations.
/// `a` is row-major n×n and is destroyed.
fn jacobi_symmetric_eigenvalues(a: &mut [f64], n: usize) -> Vec<f64> {
    debug_assert_eq!(a.len(), n * n);
    if n == 1 {
        return vec![a[0]];
    }
    let scale: f64 = (0..n).map(|i| a[i * n + i].abs()).fold(1.0, f64::max);
    let tol = 1e-15 * scale;
    for _sweep in 0..64 {
        let mut off = 0.0_f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(a[p * n + q].abs());
            }
        }
        if off <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq.abs() <= 1e-2 * tol {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let tau = (aqq - app) / (2.0 * apq);
                // Smaller-angle root keeps the rotation stable.
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i * n + i]).collect()
}

/// Σ_t H_t Q_t H_t†, the received-signal Gram matrix over a user set.
///
/// `nr` fixes the output dimension so the empty sum is well-typed.
pub fn gram_sum(
    channels: &[ComplexMatrix],
    covariances: &[HermitianPsd],
    nr: usize,
) -> Result<HermitianPsd> {
    if channels.len() != covariances.len() {
        return Err(Error::Config(format!(
            "{} channel matrices but {} covariances",
            channels.len(),
            covariances.len()
        )));
    }
    gram_sum_pairs(channels.iter().zip(covariances.iter()), nr)
}

/// Gram sum over an arbitrary (channel, covariance) sequence — used for
/// error-event subsets without copying matrices.
pub fn gram_sum_pairs<'a, I>(pairs: I, nr: usize) -> Result<HermitianPsd>
where
    I: IntoIterator<Item = (&'a ComplexMatrix, &'a HermitianPsd)>,
{
    let mut upper = vec![Complex64::ZERO; nr * nr];
    let mut scratch = Vec::new();
    for (h, q) in pairs {
        if h.rows() != nr {
            return Err(Error::Config(format!(
                "channel matrix is {}x{}, expected {} rows",
                h.rows(),
                h.cols(),
                nr
            )));
        }
        if q.dim() != h.cols() {
            return Err(Error::Config(format!(
                "covariance is {0}x{0} but channel has {1} columns",
                q.dim(),
                h.cols()
            )));
        }
        gram_accumulate_upper(&mut upper, nr, h, q, &mut scratch);
    }
    // Mirror the strict upper triangle so the result is exactly Hermitian.
    for i in 0..nr {
        for j in (i + 1)..nr {
            upper[j * nr + i] = upper[i * nr + j].conj();
        }
        let d = &mut upper[i * nr + i];
        *d = Complex64::new(d.re, 0.0);
    }
    Ok(HermitianPsd::from_parts_unchecked(nr, upper))
}

/// acc(i,j) += (H Q H†)(i,j) for i ≤ j. `scratch` holds T = H·Q.
fn gram_accumulate_upper(
    acc: &mut [Complex64],
    nr: usize,
    h: &ComplexMatrix,
    q: &HermitianPsd,
    scratch: &mut Vec<Complex64>,
) {
    let nt = h.cols();
    scratch.clear();
    scratch.resize(nr * nt, Complex64::ZERO);
    for i in 0..nr {
        for b in 0..nt {
            let mut s = Complex64::ZERO;
            for a in 0..nt {
                s += h.get(i, a) * q.get(a, b);
            }
            scratch[i * nt + b] = s;
        }
    }
    for i in 0..nr {
        for j in i..nr {
            let mut s = Complex64::ZERO;
            for b in 0..nt {
                s += scratch[i * nt + b] * h.get(j, b).conj();
            }
            acc[i * nr + j] += s;
        }
    }
}

/// log det(I + scale·G) in nats, by complex Cholesky factorization of the
/// shifted matrix. Nonnegative for PSD G and scale > 0.
pub fn logdet_eye_plus(g: &HermitianPsd, scale: f64) -> Result<f64> {
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::Validation(format!(
            "scale must be finite and positive, got {scale}"
        )));
    }
    let d = g.dim();
    let mut a: Vec<Complex64> = g.entries().iter().map(|z| z * scale).collect();
    for i in 0..d {
        a[i * d + i] += 1.0;
    }
    // In-place lower Cholesky; `a` becomes L below the diagonal.
    let mut logdet = 0.0_f64;
    for j in 0..d {
        let mut pivot = a[j * d + j].re;
        for k in 0..j {
            pivot -= a[j * d + k].norm_sqr();
        }
        if !(pivot.is_finite() && pivot > 0.0) {
            return Err(Error::Validation(format!(
                "factorization failure at pivot {j}: shifted matrix is not positive definite"
            )));
        }
        let ljj = pivot.sqrt();
        logdet += pivot.ln();
        a[j * d + j] = Complex64::new(ljj, 0.0);
        for i in (j + 1)..d {
            let mut s = a[i * d + j];
            for k in 0..j {
                s -= a[i * d + k] * a[j * d + k].conj();
            }
            a[i * d + j] = s / ljj;
        }
    }
    Ok(logdet)
}

/// Ordinary least squares y = slope·x + intercept with its R².
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Least-squares line through (x, y) pairs. Needs ≥ 2 distinct x values.
pub fn linear_fit(points: &[(f64, f64)]) -> Result<LinearFit> {
    if points.len() < 2 {
        return Err(Error::Validation(format!(
            "a line fit needs at least 2 points, got {}",
            points.len()
        )));
    }
    if points
        .iter()
        .any(|(x, y)| !x.is_finite() || !y.is_finite())
    {
        return Err(Error::Validation("line fit input is not finite".into()));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Validation(
            "line fit needs at least two distinct x values".into(),
        ));
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    Ok(LinearFit { slope, intercept: my - slope * mx, r_squared })
}
