//! Independent Gaussian conditional mutual information oracle.
//!
//! For the scalar observation `Y = sum_j c_j U_j + Z` with i.i.d. unit-variance
//! layers and independent noise, `I(U_A; Y | U_B)` is computed by assembling
//! the full joint covariance of `(U_1, ..., U_n, Y)` and reducing it with a
//! general Schur complement, deliberately NOT the signal/interference
//! bookkeeping used by the closed-form rate path. Two implementations that
//! share algebra cannot catch each other's index bugs; the only input shared
//! with the rate module is the coefficient vector itself.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Pivot threshold below which the conditioning block is treated as singular.
const PIVOT_THRESHOLD: f64 = 1e-12;

/// `Y = sum_j c_j U_j + Z` with `U_j ~ N(0, 1)` i.i.d. and `Z ~ N(0, noise)`.
#[derive(Debug, Clone)]
pub struct JointGaussianModel {
    /// Layer amplitudes `c_j`, `j = 1..=n` (receiver-side, self-transmission
    /// already excluded).
    pub coefficients: Vec<f64>,
    /// Receiver noise variance, `> 0`.
    pub noise: f64,
}

impl JointGaussianModel {
    pub fn new(coefficients: Vec<f64>, noise: f64) -> Result<Self> {
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::Usage("layer coefficients must be finite".into()));
        }
        if !(noise.is_finite() && noise > 0.0) {
            return Err(Error::Usage(format!(
                "noise variance must be finite and > 0, got {noise}"
            )));
        }
        Ok(Self {
            coefficients,
            noise,
        })
    }

    pub fn layer_count(&self) -> usize {
        self.coefficients.len()
    }

    /// Full covariance of `(U_1, ..., U_n, Y)` in row-major order; the last
    /// row and column belong to `Y`.
    fn joint_covariance(&self) -> SymmetricMatrix {
        let n = self.layer_count();
        let mut sigma = SymmetricMatrix::zeros(n + 1);
        for j in 0..n {
            sigma.set(j, j, 1.0);
            sigma.set(j, n, self.coefficients[j]);
        }
        let var_y = self.coefficients.iter().map(|c| c * c).sum::<f64>() + self.noise;
        sigma.set(n, n, var_y);
        sigma
    }
}

/// Dense symmetric matrix with explicit symmetric writes.
#[derive(Debug, Clone)]
struct SymmetricMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SymmetricMatrix {
    fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.dim + c]
    }

    fn set(&mut self, r: usize, c: usize, value: f64) {
        self.data[r * self.dim + c] = value;
        self.data[c * self.dim + r] = value;
    }
}

/// Lower-triangular Cholesky factor of an SPD matrix given by an index
/// subset of `sigma`. Fails with diagnostics when a pivot drops below the
/// singularity threshold.
fn cholesky(sigma: &SymmetricMatrix, subset: &[usize]) -> Result<Vec<f64>> {
    let m = subset.len();
    let mut factor = vec![0.0; m * m];
    for col in 0..m {
        let mut pivot = sigma.get(subset[col], subset[col]);
        for r in 0..col {
            pivot -= factor[col * m + r] * factor[col * m + r];
        }
        if !(pivot.is_finite() && pivot > PIVOT_THRESHOLD) {
            return Err(Error::Numerical(format!(
                "conditioning block is numerically singular: pivot {pivot} at \
                 position {col} (threshold {PIVOT_THRESHOLD})"
            )));
        }
        let diag = pivot.sqrt();
        factor[col * m + col] = diag;
        for row in col + 1..m {
            let mut value = sigma.get(subset[row], subset[col]);
            for r in 0..col {
                value -= factor[row * m + r] * factor[col * m + r];
            }
            factor[row * m + col] = value / diag;
        }
    }
    Ok(factor)
}

/// `Var(Y | U_subset)` by Schur complement:
/// `Sigma_YY - Sigma_YS Sigma_SS^{-1} Sigma_SY`, with the inverse applied
/// through the Cholesky factor of `Sigma_SS`.
fn conditional_variance(sigma: &SymmetricMatrix, subset: &[usize]) -> Result<f64> {
    let y = sigma.dim - 1;
    let var_y = sigma.get(y, y);
    if subset.is_empty() {
        return Ok(var_y);
    }
    let m = subset.len();
    let factor = cholesky(sigma, subset)?;
    // forward-substitute L w = Sigma_SY; then the quadratic form is |w|^2
    let mut w = vec![0.0; m];
    for row in 0..m {
        let mut value = sigma.get(subset[row], y);
        for r in 0..row {
            value -= factor[row * m + r] * w[r];
        }
        w[row] = value / factor[row * m + row];
    }
    let explained: f64 = w.iter().map(|v| v * v).sum();
    Ok(var_y - explained)
}

/// Translates 1-based layer sets to covariance indices, enforcing bounds,
/// uniqueness and disjointness.
fn check_sets(a: &[usize], b: &[usize], layer_count: usize) -> Result<()> {
    let mut seen = vec![0u8; layer_count + 1];
    for (name, set) in [("A", a), ("B", b)] {
        for &j in set {
            if j < 1 || j > layer_count {
                return Err(Error::Usage(format!(
                    "layer index {j} in set {name} outside 1..={layer_count}"
                )));
            }
            if seen[j] != 0 {
                return Err(Error::Usage(format!(
                    "layer index {j} appears twice across A and B"
                )));
            }
            seen[j] = 1;
        }
    }
    Ok(())
}

/// `I(U_A; Y | U_B)` in bits, clamped at zero against rounding.
pub fn conditional_mi(a: &[usize], b: &[usize], model: &JointGaussianModel) -> Result<f64> {
    check_sets(a, b, model.layer_count())?;
    let sigma = model.joint_covariance();
    let cond_b: Vec<usize> = b.iter().map(|&j| j - 1).collect();
    let mut cond_ab = cond_b.clone();
    cond_ab.extend(a.iter().map(|&j| j - 1));
    let var_given_b = conditional_variance(&sigma, &cond_b)?;
    let var_given_ab = conditional_variance(&sigma, &cond_ab)?;
    if !(var_given_b > 0.0 && var_given_ab > 0.0) {
        return Err(Error::Numerical(format!(
            "conditional variances must be positive, got {var_given_b} and {var_given_ab}"
        )));
    }
    Ok((0.5 * (var_given_b / var_given_ab).log2()).max(0.0))
}

/// Monte Carlo estimate of `I(U_A; Y | U_B)`: draws `(U, Z)` samples, forms
/// `Y`, and reads both conditional variances off the empirical second-moment
/// sums: the residual sums of squares of least-squares fits of `Y` on `U_B`
/// and on `U_{A u B}`, each normalized by its degrees of freedom so the
/// log-ratio is first-order unbiased. Deterministic for a fixed seed.
pub fn monte_carlo_mi(
    a: &[usize],
    b: &[usize],
    model: &JointGaussianModel,
    sample_count: usize,
    seed: u64,
) -> Result<f64> {
    check_sets(a, b, model.layer_count())?;
    if sample_count < 10_000 {
        return Err(Error::Usage(format!(
            "at least 10000 samples are required for a stable estimate, got {sample_count}"
        )));
    }
    let n = model.layer_count();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = StandardNormal;
    let noise_amplitude = model.noise.sqrt();

    let mut moments = SymmetricMatrix::zeros(n + 1);
    let mut draw = vec![0.0; n + 1];
    for _ in 0..sample_count {
        let mut y = 0.0;
        for (j, slot) in draw.iter_mut().take(n).enumerate() {
            let u: f64 = normal.sample(&mut rng);
            *slot = u;
            y += model.coefficients[j] * u;
        }
        let z: f64 = normal.sample(&mut rng);
        y += noise_amplitude * z;
        draw[n] = y;
        for r in 0..=n {
            for c in r..=n {
                let value = moments.get(r, c) + draw[r] * draw[c];
                moments.set(r, c, value);
            }
        }
    }

    let cond_b: Vec<usize> = b.iter().map(|&j| j - 1).collect();
    let mut cond_ab = cond_b.clone();
    cond_ab.extend(a.iter().map(|&j| j - 1));
    let rss_given_b = conditional_variance(&moments, &cond_b)?;
    let rss_given_ab = conditional_variance(&moments, &cond_ab)?;
    if !(rss_given_b > 0.0 && rss_given_ab > 0.0) {
        return Err(Error::Numerical(format!(
            "degenerate sample covariance: residual sums {rss_given_b} and {rss_given_ab}"
        )));
    }
    let var_given_b = rss_given_b / (sample_count - cond_b.len()) as f64;
    let var_given_ab = rss_given_ab / (sample_count - cond_ab.len()) as f64;
    Ok(0.5 * (var_given_b / var_given_ab).log2())
}
