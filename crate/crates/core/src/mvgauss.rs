//! Low-dimensional multivariate normal and Student-t distribution functions,
//! densities, and partial-correlation constructions.
//!
//! Dimensions 1 and 2 use closed forms (the bivariate normal cdf is a port of
//! the Gauss-Legendre scheme from Genz's tvpack; the bivariate t cdf reduces
//! to a one-dimensional integral over the conditional t). Dimensions 3 and 4
//! use separation-of-variables quasi-Monte Carlo with randomized Kronecker
//! lattices; results are deterministic for a fixed shift seed.

use crate::error::{Error, Result};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use statrs::distribution::{ContinuousCDF, StudentsT};
use statrs::function::erf;
use statrs::function::gamma::ln_gamma;

/// Default seed for the randomized lattice shifts.
pub const DEFAULT_QMC_SEED: u64 = 0x7ec0_ffee;

const SQRT_2: f64 = std::f64::consts::SQRT_2;
const MAX_DIM: usize = 4;

// ---------------------------------------------------------------------------
// univariate kernels
// ---------------------------------------------------------------------------

/// Standard normal cdf.
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * erf::erfc(-x / SQRT_2)
}

/// Standard normal density.
pub fn norm_pdf(x: f64) -> f64 {
    (-(x * x) / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Standard normal quantile.
pub fn norm_quantile(p: f64) -> f64 {
    SQRT_2 * erf::erf_inv(2.0 * p - 1.0)
}

/// Student-t cdf; switches to a normal expansion for very large df where the
/// incomplete-beta route loses accuracy.
pub fn t_cdf(x: f64, df: f64) -> f64 {
    if df > 1e5 {
        // one-term expansion in 1/df around the normal limit
        return (norm_cdf(x) - norm_pdf(x) * (x.powi(3) + x) / (4.0 * df)).clamp(0.0, 1.0);
    }
    StudentsT::new(0.0, 1.0, df).expect("valid df").cdf(x)
}

/// Student-t density.
pub fn t_pdf(x: f64, df: f64) -> f64 {
    let ln = ln_gamma((df + 1.0) / 2.0)
        - ln_gamma(df / 2.0)
        - 0.5 * (df * std::f64::consts::PI).ln()
        - (df + 1.0) / 2.0 * (x * x / df).ln_1p();
    ln.exp()
}

/// Student-t quantile.
pub fn t_quantile(p: f64, df: f64) -> f64 {
    if df > 1e5 {
        let z = norm_quantile(p);
        return z + (z.powi(3) + z) / (4.0 * df);
    }
    StudentsT::new(0.0, 1.0, df).expect("valid df").inverse_cdf(p)
}

/// Gamma quantile by Wilson-Hilferty start plus Newton steps on the cdf.
pub(crate) fn gamma_quantile(p: f64, shape: f64, scale: f64) -> f64 {
    use statrs::distribution::{Continuous, Gamma};
    let g = Gamma::new(shape, 1.0 / scale).expect("valid gamma");
    // Wilson-Hilferty approximation
    let z = norm_quantile(p);
    let c = 2.0 / (9.0 * shape);
    let mut x = (shape * (1.0 - c + z * c.sqrt()).powi(3) * scale).max(1e-290);
    for _ in 0..20 {
        let fx = g.cdf(x);
        let dfx = g.pdf(x);
        if dfx <= 0.0 {
            break;
        }
        let step = (fx - p) / dfx;
        let next = x - step;
        let next = if next <= 0.0 { x / 2.0 } else { next };
        if (next - x).abs() <= 1e-12 * x.abs() {
            x = next;
            break;
        }
        x = next;
    }
    x
}

// ---------------------------------------------------------------------------
// correlation matrices
// ---------------------------------------------------------------------------

/// Validated correlation matrix: symmetric, unit diagonal, positive
/// semidefinite. Eigenvalues in (-1e-10, 0) are clipped to zero; anything
/// lower is rejected.
#[derive(Debug, Clone)]
pub struct CorrelationMatrix {
    dim: usize,
    mat: DMatrix<f64>,
}

impl CorrelationMatrix {
    pub fn new(mat: DMatrix<f64>) -> Result<Self> {
        let dim = mat.nrows();
        if dim == 0 || mat.ncols() != dim {
            return Err(Error::Validation("correlation matrix must be square".into()));
        }
        let mut m = mat;
        for i in 0..dim {
            if (m[(i, i)] - 1.0).abs() > 1e-12 {
                return Err(Error::Validation(format!(
                    "diagonal entry ({i},{i}) = {} is not 1",
                    m[(i, i)]
                )));
            }
            m[(i, i)] = 1.0;
            for j in 0..i {
                if (m[(i, j)] - m[(j, i)]).abs() > 1e-12 {
                    return Err(Error::Validation(format!(
                        "asymmetry at ({i},{j}): {} vs {}",
                        m[(i, j)],
                        m[(j, i)]
                    )));
                }
                let v = 0.5 * (m[(i, j)] + m[(j, i)]);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        let eig = m.clone().symmetric_eigen();
        let min_ev = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        if min_ev < -1e-10 {
            return Err(Error::Numeric(format!(
                "correlation matrix is not positive semidefinite (min eigenvalue {min_ev:.3e})"
            )));
        }
        if min_ev < 0.0 {
            let mut vals = eig.eigenvalues.clone();
            for v in vals.iter_mut() {
                *v = v.max(0.0);
            }
            let q = eig.eigenvectors;
            m = &q * DMatrix::from_diagonal(&vals) * q.transpose();
            for i in 0..dim {
                m[(i, i)] = 1.0;
                for j in 0..i {
                    let v = 0.5 * (m[(i, j)] + m[(j, i)]);
                    m[(i, j)] = v;
                    m[(j, i)] = v;
                }
            }
        }
        Ok(Self { dim, mat: m })
    }

    pub fn identity(dim: usize) -> Self {
        Self { dim, mat: DMatrix::identity(dim, dim) }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.mat[(i, j)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.mat
    }

    /// Lower Cholesky factor; semidefinite matrices get a tiny ridge.
    pub(crate) fn cholesky_lower(&self) -> Result<DMatrix<f64>> {
        let mut m = self.mat.clone();
        for attempt in 0..4 {
            match m.clone().cholesky() {
                Some(c) => return Ok(c.l()),
                None => {
                    let ridge = 1e-12 * 10f64.powi(attempt);
                    for i in 0..self.dim {
                        m[(i, i)] = 1.0 + ridge;
                    }
                }
            }
        }
        Err(Error::Singular("correlation matrix has no Cholesky factor".into()))
    }
}

/// Partial correlations of a Hüsler-Reiss dependence matrix given component
/// `j`: entries `(l_kj^2 + l_ij^2 - l_ki^2) / (2 l_kj l_ij)` for `k, i != j`.
pub fn partial_corr_hr(lambda: &DMatrix<f64>, j: usize) -> Result<CorrelationMatrix> {
    let d = lambda.nrows();
    if lambda.ncols() != d || j >= d {
        return Err(Error::Validation("bad dependence matrix shape or index".into()));
    }
    for a in 0..d {
        for b in 0..d {
            if a != b && !(lambda[(a, b)] > 0.0) {
                return Err(Error::Validation(format!(
                    "lambda[{a},{b}] must be positive, got {}",
                    lambda[(a, b)]
                )));
            }
        }
    }
    let others: Vec<usize> = (0..d).filter(|&v| v != j).collect();
    let m = others.len();
    let mut out = DMatrix::identity(m, m);
    for a in 0..m {
        for b in 0..a {
            let (k, i) = (others[a], others[b]);
            let v = (lambda[(k, j)].powi(2) + lambda[(i, j)].powi(2) - lambda[(k, i)].powi(2))
                / (2.0 * lambda[(k, j)] * lambda[(i, j)]);
            out[(a, b)] = v;
            out[(b, a)] = v;
        }
    }
    CorrelationMatrix::new(out).map_err(|e| match e {
        Error::Numeric(msg) => Error::InvalidParams(format!("invalid lambda configuration: {msg}")),
        other => other,
    })
}

/// Standard partial correlation matrix of `rho` given component `j`:
/// `(r_ki - r_kj r_ij) / sqrt((1 - r_kj^2)(1 - r_ij^2))`.
pub fn partial_corr_et(rho: &CorrelationMatrix, j: usize) -> Result<CorrelationMatrix> {
    let d = rho.dim();
    if j >= d {
        return Err(Error::Validation(format!("index {j} out of range for dim {d}")));
    }
    let others: Vec<usize> = (0..d).filter(|&v| v != j).collect();
    let m = others.len();
    let mut out = DMatrix::identity(m, m);
    for a in 0..m {
        let rkj = rho.entry(others[a], j);
        if (1.0 - rkj * rkj) <= 0.0 {
            return Err(Error::Singular(format!(
                "|rho[{},{}]| = 1 makes the partial correlation singular",
                others[a], j
            )));
        }
    }
    for a in 0..m {
        for b in 0..a {
            let (k, i) = (others[a], others[b]);
            let v = (rho.entry(k, i) - rho.entry(k, j) * rho.entry(i, j))
                / (((1.0 - rho.entry(k, j).powi(2)) * (1.0 - rho.entry(i, j).powi(2))).sqrt());
            out[(a, b)] = v;
            out[(b, a)] = v;
        }
    }
    CorrelationMatrix::new(out)
}

// ---------------------------------------------------------------------------
// bivariate normal (tvpack-style)
// ---------------------------------------------------------------------------

// Gauss-Legendre abscissas/weights on [-1, 1], halved rules
const GL6: [(f64, f64); 3] = [
    (0.1713244923791705, -0.9324695142031522),
    (0.3607615730481384, -0.6612093864662647),
    (0.4679139345726904, -0.2386191860831970),
];
const GL12: [(f64, f64); 6] = [
    (0.04717533638651177, -0.9815606342467191),
    (0.1069393259953183, -0.9041172563704750),
    (0.1600783285433464, -0.7699026741943050),
    (0.2031674267230659, -0.5873179542866171),
    (0.2334925365383547, -0.3678314989981802),
    (0.2491470458134029, -0.1252334085114692),
];
const GL20: [(f64, f64); 10] = [
    (0.01761400713915212, -0.9931285991850949),
    (0.04060142980038694, -0.9639719272779138),
    (0.06267204833410906, -0.9122344282513259),
    (0.08327674157670475, -0.8391169718222188),
    (0.1019301198172404, -0.7463319064601508),
    (0.1181945319615184, -0.6360536807265150),
    (0.1316886384491766, -0.5108670019508271),
    (0.1420961093183821, -0.3737060887154196),
    (0.1491729864726037, -0.2277858511416451),
    (0.1527533871307259, -0.07652652113349733),
];

/// `P(X > dh, Y > dk)` for standard normals with correlation `r`.
fn bvnd(dh: f64, dk: f64, r: f64) -> f64 {
    let twopi = 2.0 * std::f64::consts::PI;
    let rule: &[(f64, f64)] = if r.abs() < 0.3 {
        &GL6
    } else if r.abs() < 0.75 {
        &GL12
    } else {
        &GL20
    };
    let mut h = dh;
    let mut k = dk;
    let mut hk = h * k;
    let mut bvn = 0.0;
    if r.abs() < 0.925 {
        if r.abs() > 0.0 {
            let hs = (h * h + k * k) / 2.0;
            let asr = r.asin();
            for &(w, x) in rule {
                for is in [-1.0, 1.0] {
                    let sn = (asr * (is * x + 1.0) / 2.0).sin();
                    bvn += w * ((sn * hk - hs) / (1.0 - sn * sn)).exp();
                }
            }
            bvn = bvn * asr / (2.0 * twopi);
        }
        bvn + norm_cdf(-h) * norm_cdf(-k)
    } else {
        if r < 0.0 {
            k = -k;
            hk = -hk;
        }
        if r.abs() < 1.0 {
            let a_s = (1.0 - r) * (1.0 + r);
            let mut a = a_s.sqrt();
            let bs = (h - k) * (h - k);
            let c = (4.0 - hk) / 8.0;
            let d = (12.0 - hk) / 16.0;
            let asr = -(bs / a_s + hk) / 2.0;
            if asr > -100.0 {
                bvn = a * asr.exp() * (1.0 - c * (bs - a_s) * (1.0 - d * bs / 5.0) / 3.0
                    + c * d * a_s * a_s / 5.0);
            }
            if -hk < 100.0 {
                let b = bs.sqrt();
                let sp = twopi.sqrt() * norm_cdf(-b / a);
                bvn -= (-hk / 2.0).exp() * sp * b * (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
            }
            a /= 2.0;
            for &(w, x) in rule {
                for is in [-1.0, 1.0] {
                    let xs = (a * (is * x + 1.0)).powi(2);
                    let rs = (1.0 - xs).sqrt();
                    let asr = -(bs / xs + hk) / 2.0;
                    if asr > -100.0 {
                        let sp = 1.0 + c * xs * (1.0 + d * xs);
                        let ep = (-hk * (1.0 - rs) / (2.0 * (1.0 + rs))).exp() / rs;
                        bvn += a * w * asr.exp() * (ep - sp);
                    }
                }
            }
            bvn = -bvn / twopi;
        }
        if r > 0.0 {
            bvn + norm_cdf(-h.max(k))
        } else {
            -bvn + (norm_cdf(-h) - norm_cdf(-k)).max(0.0)
        }
    }
}

/// `P(X <= b1, Y <= b2)` for standard normals with correlation `rho`.
pub(crate) fn bvn_cdf(b1: f64, b2: f64, rho: f64) -> f64 {
    bvnd(-b1, -b2, rho).clamp(0.0, 1.0)
}

/// `P(T1 <= b1, T2 <= b2)` for a standard bivariate t with correlation `rho`
/// and `df` degrees of freedom, via the conditional-t representation.
pub(crate) fn bvt_cdf(b1: f64, b2: f64, rho: f64, df: f64) -> f64 {
    // P = int_0^{F(b1)}  T_{df+1}( (b2 - rho x) * sqrt((df+1)/((1-rho^2)(df+x^2))) ) dv,
    // x = F^{-1}(v)
    let v1 = t_cdf(b1, df);
    if v1 <= 0.0 {
        return 0.0;
    }
    let denom = 1.0 - rho * rho;
    if denom <= 0.0 {
        // degenerate: comonotone (rho=1) or antithetic (rho=-1)
        return if rho > 0.0 {
            t_cdf(b1.min(b2), df)
        } else {
            (t_cdf(b1, df) + t_cdf(b2, df) - 1.0).max(0.0)
        };
    }
    let g = |v: f64| -> f64 {
        let x = t_quantile(v.clamp(1e-300, 1.0 - 1e-16), df);
        let scale = ((df + 1.0) / (denom * (df + x * x))).sqrt();
        t_cdf((b2 - rho * x) * scale, df + 1.0)
    };
    adaptive_simpson(&g, 0.0, v1, 1e-10, 24).clamp(0.0, 1.0)
}

fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: usize) -> f64 {
    fn simpson(f: &impl Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64, m: f64, fm: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    fn rec(
        f: &impl Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        m: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: usize,
    ) -> f64 {
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(f, a, fa, m, fm, lm, flm);
        let right = simpson(f, m, fm, b, fb, rm, frm);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            left + right + (left + right - whole) / 15.0
        } else {
            rec(f, a, fa, m, fm, lm, flm, left, tol / 2.0, depth - 1)
                + rec(f, m, fm, b, fb, rm, frm, right, tol / 2.0, depth - 1)
        }
    }
    let m = 0.5 * (a + b);
    let (fa, fb, fm) = (f(a), f(b), f(m));
    let whole = simpson(f, a, fa, b, fb, m, fm);
    rec(f, a, fa, b, fb, m, fm, whole, tol, depth)
}

// ---------------------------------------------------------------------------
// separation-of-variables QMC for dimensions 3 and 4
// ---------------------------------------------------------------------------

const KRONECKER_GENERATORS: [f64; 4] = [
    std::f64::consts::SQRT_2,
    1.7320508075688772,  // sqrt 3
    2.23606797749979,    // sqrt 5
    2.6457513110645907,  // sqrt 7
];

/// One separation-of-variables evaluation of `P(Z <= b)` for the Cholesky
/// factor `l`, at cube point `u` (length dim-1).
fn sov_normal(l: &DMatrix<f64>, b: &[f64], u: &[f64]) -> f64 {
    let d = b.len();
    let mut y = vec![0.0; d - 1];
    let mut e = norm_cdf(b[0] / l[(0, 0)]);
    let mut prob = e;
    for i in 1..d {
        let w = (u[i - 1] * e).clamp(1e-300, 1.0 - 1e-16);
        y[i - 1] = norm_quantile(w);
        let mut t = b[i];
        for k in 0..i {
            t -= l[(i, k)] * y[k];
        }
        e = norm_cdf(t / l[(i, i)]);
        prob *= e;
    }
    prob
}

struct QmcOutcome {
    value: f64,
    error: f64,
}

/// Randomized Kronecker-lattice integration over the unit cube.
fn qmc_integrate(
    dim: usize,
    seed: u64,
    tol: f64,
    f: impl Fn(&[f64]) -> f64,
) -> Result<QmcOutcome> {
    const SHIFTS: usize = 12;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let shifts: Vec<Vec<f64>> =
        (0..SHIFTS).map(|_| (0..dim).map(|_| rng.gen::<f64>()).collect()).collect();
    let mut n: usize = 4096;
    let mut point = vec![0.0; dim];
    let mut best = QmcOutcome { value: f64::NAN, error: f64::INFINITY };
    while n <= (1 << 19) {
        let mut means = Vec::with_capacity(SHIFTS);
        for shift in &shifts {
            let mut acc = 0.0;
            for k in 1..=n {
                for j in 0..dim {
                    let v = k as f64 * KRONECKER_GENERATORS[j] + shift[j];
                    point[j] = v - v.floor();
                }
                acc += f(&point);
            }
            means.push(acc / n as f64);
        }
        let mean: f64 = means.iter().sum::<f64>() / SHIFTS as f64;
        let var: f64 =
            means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (SHIFTS as f64 - 1.0);
        let err = 3.0 * (var / SHIFTS as f64).sqrt();
        if err < best.error {
            best = QmcOutcome { value: mean, error: err };
        }
        if best.error <= tol {
            return Ok(best);
        }
        n *= 2;
    }
    Err(Error::Numeric(format!(
        "qmc failed to reach tolerance {tol:.2e}: estimate {:.10} with error {:.2e}",
        best.value, best.error
    )))
}

fn validate_inputs(upper: &[f64], corr: &CorrelationMatrix) -> Result<()> {
    if upper.len() != corr.dim() {
        return Err(Error::Validation(format!(
            "bounds have length {}, correlation matrix dimension {}",
            upper.len(),
            corr.dim()
        )));
    }
    if upper.is_empty() || upper.len() > MAX_DIM {
        return Err(Error::Unsupported(format!(
            "dimension {} outside supported range 1..={MAX_DIM}",
            upper.len()
        )));
    }
    if upper.iter().any(|v| v.is_nan()) {
        return Err(Error::Validation("NaN bound".into()));
    }
    Ok(())
}

/// Drop coordinates whose bound is so high that they are almost surely
/// satisfied; return None if some bound is hopelessly low.
fn reduce_problem(upper: &[f64], corr: &CorrelationMatrix) -> Option<(Vec<f64>, CorrelationMatrix)> {
    let keep: Vec<usize> =
        (0..upper.len()).filter(|&i| upper[i] < 8.2).collect();
    if upper.iter().any(|&v| v < -37.0) {
        return None;
    }
    let b: Vec<f64> = keep.iter().map(|&i| upper[i]).collect();
    let m = keep.len();
    let mut sub = DMatrix::identity(m, m);
    for a in 0..m {
        for c in 0..m {
            sub[(a, c)] = corr.entry(keep[a], keep[c]);
        }
    }
    Some((b, CorrelationMatrix { dim: m, mat: sub }))
}

/// `P(Z <= upper)` for a zero-mean unit-variance Gaussian vector with the
/// given correlation matrix, to absolute tolerance `tol`, with the default
/// lattice seed.
pub fn mvn_cdf(upper: &[f64], corr: &CorrelationMatrix, tol: f64) -> Result<f64> {
    mvn_cdf_seeded(upper, corr, tol, DEFAULT_QMC_SEED)
}

pub fn mvn_cdf_seeded(upper: &[f64], corr: &CorrelationMatrix, tol: f64, seed: u64) -> Result<f64> {
    validate_inputs(upper, corr)?;
    let Some((b, sub)) = reduce_problem(upper, corr) else {
        return Ok(0.0);
    };
    match b.len() {
        0 => Ok(1.0),
        1 => Ok(norm_cdf(b[0])),
        2 => Ok(bvn_cdf(b[0], b[1], sub.entry(0, 1))),
        _ => {
            let l = sub.cholesky_lower()?;
            let out = qmc_integrate(b.len() - 1, seed, tol, |u| sov_normal(&l, &b, u))?;
            Ok(out.value.clamp(0.0, 1.0))
        }
    }
}

/// `P(T <= upper)` for a standard Student-t vector with the given correlation
/// matrix and `df` degrees of freedom.
pub fn mvt_cdf(upper: &[f64], corr: &CorrelationMatrix, df: f64, tol: f64) -> Result<f64> {
    mvt_cdf_seeded(upper, corr, df, tol, DEFAULT_QMC_SEED)
}

pub fn mvt_cdf_seeded(
    upper: &[f64],
    corr: &CorrelationMatrix,
    df: f64,
    tol: f64,
    seed: u64,
) -> Result<f64> {
    validate_inputs(upper, corr)?;
    if !(df > 0.0) {
        return Err(Error::Validation(format!("degrees of freedom must be positive, got {df}")));
    }
    match upper.len() {
        1 => Ok(t_cdf(upper[0], df)),
        2 => Ok(bvt_cdf(upper[0], upper[1], corr.entry(0, 1), df)),
        _ => {
            let l = corr.cholesky_lower()?;
            let out = qmc_integrate(upper.len(), seed, tol, |u| {
                // outer chi mixing: T <= b  <=>  Z <= s b with s = sqrt(chi2_df / df)
                let q = gamma_quantile(u[0].clamp(1e-300, 1.0 - 1e-16), df / 2.0, 2.0);
                let s = (q / df).sqrt();
                let bs: Vec<f64> = upper.iter().map(|b| s * b).collect();
                sov_normal(&l, &bs, &u[1..])
            })?;
            Ok(out.value.clamp(0.0, 1.0))
        }
    }
}

/// `P(Z > lower)` joint survival of the multivariate normal.
pub fn mvn_survival(lower: &[f64], corr: &CorrelationMatrix, tol: f64) -> Result<f64> {
    let flipped: Vec<f64> = lower.iter().map(|v| -v).collect();
    mvn_cdf(&flipped, corr, tol)
}

/// Log density of the zero-mean Gaussian with the given lower Cholesky factor.
pub(crate) fn mvn_log_pdf(z: &[f64], chol_lower: &DMatrix<f64>) -> f64 {
    let k = z.len();
    let mut log_det_half = 0.0;
    for i in 0..k {
        log_det_half += chol_lower[(i, i)].ln();
    }
    // solve L v = z by forward substitution
    let mut v = z.to_vec();
    for i in 0..k {
        for j in 0..i {
            let t = chol_lower[(i, j)] * v[j];
            v[i] -= t;
        }
        v[i] /= chol_lower[(i, i)];
    }
    let quad: f64 = v.iter().map(|x| x * x).sum();
    -0.5 * k as f64 * (2.0 * std::f64::consts::PI).ln() - log_det_half - 0.5 * quad
}

/// Log density of the standard multivariate t with `df` degrees of freedom.
pub(crate) fn mvt_log_pdf(z: &[f64], chol_lower: &DMatrix<f64>, df: f64) -> f64 {
    let k = z.len();
    let mut log_det_half = 0.0;
    for i in 0..k {
        log_det_half += chol_lower[(i, i)].ln();
    }
    let mut v = z.to_vec();
    for i in 0..k {
        for j in 0..i {
            let t = chol_lower[(i, j)] * v[j];
            v[i] -= t;
        }
        v[i] /= chol_lower[(i, i)];
    }
    let quad: f64 = v.iter().map(|x| x * x).sum();
    ln_gamma((df + k as f64) / 2.0)
        - ln_gamma(df / 2.0)
        - 0.5 * k as f64 * (df * std::f64::consts::PI).ln()
        - log_det_half
        - 0.5 * (df + k as f64) * (1.0 + quad / df).ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corr_from(entries: &[&[f64]]) -> CorrelationMatrix {
        let d = entries.len();
        let mut m = DMatrix::identity(d, d);
        for i in 0..d {
            for j in 0..d {
                m[(i, j)] = entries[i][j];
            }
        }
        CorrelationMatrix::new(m).unwrap()
    }

    fn equicorr(d: usize, rho: f64) -> CorrelationMatrix {
        let mut m = DMatrix::identity(d, d);
        for i in 0..d {
            for j in 0..d {
                if i != j {
                    m[(i, j)] = rho;
                }
            }
        }
        CorrelationMatrix::new(m).unwrap()
    }

    #[test]
    fn univariate_median() {
        let c = CorrelationMatrix::identity(1);
        assert!((mvn_cdf(&[0.0], &c, 1e-9).unwrap() - 0.5).abs() < 1e-12);
        for df in [0.7, 3.0, 1e6] {
            assert!((mvt_cdf(&[0.0], &c, df, 1e-9).unwrap() - 0.5).abs() < 1e-9);
        }
    }

    #[test]
    fn bivariate_independence_quadrant() {
        let c = CorrelationMatrix::identity(2);
        assert!((mvn_cdf(&[0.0, 0.0], &c, 1e-9).unwrap() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn bivariate_orthant_closed_form() {
        // P(Z1<=0, Z2<=0) = 1/4 + asin(rho)/(2 pi)
        for rho in [-0.95, -0.5, -0.1, 0.0, 0.3, 0.8, 0.97] {
            let c = equicorr(2, rho);
            let want = 0.25 + rho.asin() / (2.0 * std::f64::consts::PI);
            let got = mvn_cdf(&[0.0, 0.0], &c, 1e-9).unwrap();
            assert!((got - want).abs() < 1e-13, "rho={rho}: {got} vs {want}");
        }
    }

    #[test]
    fn trivariate_orthant_closed_form() {
        // equicorrelation 1/2: orthant probability is 1/(d+1)
        let c = equicorr(3, 0.5);
        let got = mvn_cdf(&[0.0, 0.0, 0.0], &c, 1e-7).unwrap();
        assert!((got - 0.25).abs() < 5e-7, "{got}");
        // general orthant identity: 1/8 + sum asin(rho_ij) / (4 pi)
        let c = corr_from(&[&[1.0, 0.3, -0.2], &[0.3, 1.0, 0.5], &[-0.2, 0.5, 1.0]]);
        let want = 0.125
            + (0.3f64.asin() + (-0.2f64).asin() + 0.5f64.asin()) / (4.0 * std::f64::consts::PI);
        let got = mvn_cdf(&[0.0; 3], &c, 1e-7).unwrap();
        assert!((got - want).abs() < 5e-7, "{got} vs {want}");
    }

    #[test]
    fn quadrivariate_orthant_closed_form() {
        let c = equicorr(4, 0.5);
        let got = mvn_cdf(&[0.0; 4], &c, 2e-6).unwrap();
        assert!((got - 0.2).abs() < 1e-5, "{got}");
        // same orthant for the t: elliptical symmetry makes it df-free
        let got_t = mvt_cdf(&[0.0; 4], &c, 4.0, 2e-6).unwrap();
        assert!((got_t - 0.2).abs() < 2e-5, "{got_t}");
    }

    #[test]
    fn bivariate_t_orthant_matches_normal_orthant() {
        for rho in [-0.6, 0.0, 0.4, 0.9] {
            let want = 0.25 + rho.asin() / (2.0 * std::f64::consts::PI);
            for df in [1.0, 4.0, 30.0] {
                let got = bvt_cdf(0.0, 0.0, rho, df);
                assert!((got - want).abs() < 1e-8, "rho={rho} df={df}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn t_converges_to_normal_for_large_df() {
        let c = equicorr(2, 0.3);
        let n = mvn_cdf(&[1.0, 1.0], &c, 1e-8).unwrap();
        let t = mvt_cdf(&[1.0, 1.0], &c, 1e6, 1e-8).unwrap();
        assert!((n - t).abs() < 1e-4, "{n} vs {t}");
        let c3 = equicorr(3, 0.45);
        let n3 = mvn_cdf(&[0.4, -0.2, 1.1], &c3, 1e-7).unwrap();
        let t3 = mvt_cdf(&[0.4, -0.2, 1.1], &c3, 1e6, 1e-7).unwrap();
        assert!((n3 - t3).abs() < 1e-4, "{n3} vs {t3}");
    }

    #[test]
    fn monotone_in_bounds_and_limits() {
        let c = equicorr(3, 0.4);
        let lo = mvn_cdf(&[0.1, 0.2, -0.3], &c, 1e-7).unwrap();
        let hi = mvn_cdf(&[0.3, 0.2, -0.3], &c, 1e-7).unwrap();
        assert!(hi >= lo - 1e-7);
        assert!((mvn_cdf(&[8.0; 3], &c, 1e-7).unwrap() - 1.0).abs() < 1e-6);
        assert!(mvn_cdf(&[-8.0, 0.0, 0.0], &c, 1e-7).unwrap() < 1e-7);
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let c = equicorr(3, 0.6);
        let a = mvn_cdf_seeded(&[0.5, 0.1, -0.4], &c, 1e-7, 12345).unwrap();
        let b = mvn_cdf_seeded(&[0.5, 0.1, -0.4], &c, 1e-7, 12345).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn partial_corr_hr_values() {
        // equal lambdas give off-diagonal 1/2
        let mut l = DMatrix::zeros(3, 3);
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    l[(i, j)] = 0.8;
                }
            }
        }
        let p = partial_corr_hr(&l, 0).unwrap();
        assert!((p.entry(0, 1) - 0.5).abs() < 1e-14);

        // lambda = (l12, l13, l23) = (0.65, 0.90, 0.98), j = 1:
        // (0.65^2 + 0.90^2 - 0.98^2) / (2 * 0.65 * 0.90)
        let mut l = DMatrix::zeros(3, 3);
        l[(0, 1)] = 0.65;
        l[(1, 0)] = 0.65;
        l[(0, 2)] = 0.90;
        l[(2, 0)] = 0.90;
        l[(1, 2)] = 0.98;
        l[(2, 1)] = 0.98;
        let p = partial_corr_hr(&l, 0).unwrap();
        let want = (0.65f64.powi(2) + 0.90f64.powi(2) - 0.98f64.powi(2)) / (2.0 * 0.65 * 0.90);
        assert!((p.entry(0, 1) - want).abs() < 1e-14);
        assert!((want - 0.232_564_102_564_102_6).abs() < 1e-12);
        assert!((p.entry(0, 1) - p.entry(1, 0)).abs() == 0.0);
    }

    #[test]
    fn partial_corr_et_values() {
        let c = corr_from(&[&[1.0, 0.52, 0.71], &[0.52, 1.0, 0.52], &[0.71, 0.52, 1.0]]);
        let p = partial_corr_et(&c, 0).unwrap();
        let want = (0.52 - 0.52 * 0.71) / ((1.0f64 - 0.52 * 0.52) * (1.0 - 0.71 * 0.71)).sqrt();
        assert!((p.entry(0, 1) - want).abs() < 1e-14, "{} vs {want}", p.entry(0, 1));
        // all-zero correlations give the identity
        let c0 = equicorr(3, 0.0);
        let p0 = partial_corr_et(&c0, 1).unwrap();
        assert!((p0.entry(0, 1)).abs() < 1e-15);
    }

    #[test]
    fn psd_validation() {
        let mut bad = DMatrix::identity(3, 3);
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    bad[(i, j)] = -0.9;
                }
            }
        }
        assert!(CorrelationMatrix::new(bad).is_err());
        // near-singular but valid stays accepted
        let ok = equicorr(3, -0.499999);
        assert_eq!(ok.dim(), 3);
    }

    #[test]
    fn small_monte_carlo_agreement() {
        use rand_distr::{Distribution, StandardNormal};
        let c = corr_from(&[&[1.0, 0.5, 0.2], &[0.5, 1.0, -0.3], &[0.2, -0.3, 1.0]]);
        let l = c.cholesky_lower().unwrap();
        let b = [0.7, -0.1, 0.4];
        let n = 2_000_000usize;
        let mut rng = ChaCha12Rng::seed_from_u64(99);
        let mut hits = 0usize;
        for _ in 0..n {
            let z: Vec<f64> = (0..3).map(|_| StandardNormal.sample(&mut rng)).collect();
            let mut ok = true;
            for i in 0..3 {
                let mut v = 0.0;
                for k in 0..=i {
                    v += l[(i, k)] * z[k];
                }
                if v > b[i] {
                    ok = false;
                    break;
                }
            }
            if ok {
                hits += 1;
            }
        }
        let p_mc = hits as f64 / n as f64;
        let se = (p_mc * (1.0 - p_mc) / n as f64).sqrt();
        let p = mvn_cdf(&b, &c, 1e-7).unwrap();
        assert!((p - p_mc).abs() < 3.0 * se, "{p} vs {p_mc} (3se = {})", 3.0 * se);
    }

    #[test]
    fn bivariate_t_mc_agreement() {
        use rand_distr::{Distribution, Gamma as GammaDist, StandardNormal};
        let (b1, b2, rho, df) = (0.5f64, 0.5f64, 0.0f64, 5.0f64);
        let n = 2_000_000usize;
        let mut rng = ChaCha12Rng::seed_from_u64(17);
        let gamma = GammaDist::new(df / 2.0, 2.0).unwrap();
        let srho = (1.0 - rho * rho).sqrt();
        let mut hits = 0usize;
        for _ in 0..n {
            let z1: f64 = StandardNormal.sample(&mut rng);
            let z2: f64 = StandardNormal.sample(&mut rng);
            let g: f64 = gamma.sample(&mut rng);
            let s = (df / g).sqrt();
            if z1 * s <= b1 && (rho * z1 + srho * z2) * s <= b2 {
                hits += 1;
            }
        }
        let p_mc = hits as f64 / n as f64;
        let se = (p_mc * (1.0 - p_mc) / n as f64).sqrt();
        let p = bvt_cdf(b1, b2, rho, df);
        assert!((p - p_mc).abs() < 3.0 * se, "{p} vs {p_mc}");
        // common chi mixing: not the product of the t margins
        let prod = t_cdf(b1, df) * t_cdf(b2, df);
        assert!((p - prod).abs() > 5.0 * se, "should differ from product form");
    }
}
