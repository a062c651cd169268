//! Closed-form information and synergy measures for standardized jointly
//! Gaussian systems with one scalar target `X` and `m` latent predictors
//! `Z_1..Z_m`.
//!
//! A system is described by the target correlations `rho_j = <Z_j X>` and the
//! latent correlation matrix `Sigma_jk = <Z_j Z_k>`. Every quantity is in nats.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Eigenvalues above `-PSD_TOLERANCE` count as nonnegative.
pub const PSD_TOLERANCE: f64 = 1e-10;

/// Correlations are clamped to `±(1 - CORRELATION_CLAMP)` before any
/// `rho / (1 - rho²)` division.
pub const CORRELATION_CLAMP: f64 = 1e-4;

/// Smallest eigenvalue of `Sigma` that still counts as invertible.
const SINGULAR_EIGENVALUE: f64 = 1e-12;

const SYMMETRY_TOLERANCE: f64 = 1e-12;

/// Closed interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo <= hi) {
            return Err(Error::Domain(format!(
                "interval bounds out of order: [{lo}, {hi}]"
            )));
        }
        Ok(Self { lo, hi })
    }

    pub fn contains(&self, value: f64) -> bool {
        self.lo <= value && value <= self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Standardized Gaussian system: target correlations plus latent correlations.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianSystem {
    rho: DVector<f64>,
    sigma_z: DMatrix<f64>,
}

impl GaussianSystem {
    /// Validates symmetry, unit diagonal, `|rho_j| < 1` and joint
    /// positive semidefiniteness of `[[Sigma, rho], [rhoᵀ, 1]]`.
    pub fn new(rho: Vec<f64>, sigma_z: DMatrix<f64>) -> Result<Self> {
        let m = rho.len();
        if m == 0 {
            return Err(Error::Domain("a system needs at least one latent".into()));
        }
        if sigma_z.nrows() != m || sigma_z.ncols() != m {
            return Err(Error::Shape(format!(
                "sigma_z is {}x{} but rho has {m} entries",
                sigma_z.nrows(),
                sigma_z.ncols()
            )));
        }
        check_correlations(&rho)?;
        for j in 0..m {
            if (sigma_z[(j, j)] - 1.0).abs() > SYMMETRY_TOLERANCE {
                return Err(Error::Domain(format!(
                    "sigma_z[{j},{j}] = {} is not 1",
                    sigma_z[(j, j)]
                )));
            }
            for k in 0..j {
                let (a, b) = (sigma_z[(j, k)], sigma_z[(k, j)]);
                if !a.is_finite() || (a - b).abs() > SYMMETRY_TOLERANCE {
                    return Err(Error::Domain(format!(
                        "sigma_z is not symmetric at ({j},{k})"
                    )));
                }
            }
        }
        let min_latent = min_eigenvalue(&sigma_z);
        if min_latent < -PSD_TOLERANCE {
            return Err(Error::Conditioning(format!(
                "sigma_z has eigenvalue {min_latent:.3e}"
            )));
        }
        let joint = joint_matrix(&rho, &sigma_z);
        let min_joint = min_eigenvalue(&joint);
        if min_joint < -PSD_TOLERANCE {
            return Err(Error::Conditioning(format!(
                "joint covariance has eigenvalue {min_joint:.3e}; the correlations are not jointly realizable"
            )));
        }
        Ok(Self {
            rho: DVector::from_vec(rho),
            sigma_z,
        })
    }

    /// Two-latent system with `Sigma_12 = sigma12`.
    pub fn pair(rho1: f64, rho2: f64, sigma12: f64) -> Result<Self> {
        let sigma = DMatrix::from_row_slice(2, 2, &[1.0, sigma12, sigma12, 1.0]);
        Self::new(vec![rho1, rho2], sigma)
    }

    pub fn rho(&self) -> &[f64] {
        self.rho.as_slice()
    }

    pub fn sigma_z(&self) -> &DMatrix<f64> {
        &self.sigma_z
    }

    pub fn num_latents(&self) -> usize {
        self.rho.len()
    }

    /// Full `(m+1)x(m+1)` correlation matrix with the target last.
    pub fn joint_covariance(&self) -> DMatrix<f64> {
        joint_matrix(self.rho.as_slice(), &self.sigma_z)
    }

    /// Regression coefficients `beta = Sigma⁻¹ rho` of `X` on `Z`.
    fn regression(&self) -> Result<DVector<f64>> {
        let eig = SymmetricEigen::new(self.sigma_z.clone());
        let min = eig.eigenvalues.min();
        if min <= SINGULAR_EIGENVALUE {
            return Err(Error::Conditioning(format!(
                "sigma_z is singular (smallest eigenvalue {min:.3e})"
            )));
        }
        let proj = eig.eigenvectors.transpose() * &self.rho;
        let scaled = proj.component_div(&eig.eigenvalues);
        Ok(&eig.eigenvectors * scaled)
    }

    /// `rhoᵀ Sigma⁻¹ rho`, the fraction of target variance explained by `Z`.
    pub fn explained_variance(&self) -> Result<f64> {
        let beta = self.regression()?;
        Ok(self.rho.dot(&beta))
    }
}

fn joint_matrix(rho: &[f64], sigma_z: &DMatrix<f64>) -> DMatrix<f64> {
    let m = rho.len();
    DMatrix::from_fn(m + 1, m + 1, |r, c| match (r < m, c < m) {
        (true, true) => sigma_z[(r, c)],
        (true, false) => rho[r],
        (false, true) => rho[c],
        (false, false) => 1.0,
    })
}

pub(crate) fn min_eigenvalue(matrix: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(matrix.clone()).eigenvalues.min()
}

fn check_correlations(rho: &[f64]) -> Result<()> {
    for (j, r) in rho.iter().enumerate() {
        if !r.is_finite() || r.abs() >= 1.0 {
            return Err(Error::Domain(format!("rho[{j}] = {r} is not in (-1, 1)")));
        }
    }
    Ok(())
}

/// `I(Z_j; X)` for a single predictor with correlation `rho`.
pub fn single_information(rho: f64) -> f64 {
    -0.5 * (1.0 - rho * rho).ln()
}

/// Feasible range of `Sigma_12` given the two target correlations:
/// `rho1·rho2 ± sqrt((1 - rho1²)(1 - rho2²))`.
pub fn feasible_sigma12_range(rho1: f64, rho2: f64) -> Result<Interval> {
    check_correlations(&[rho1, rho2])?;
    let centre = rho1 * rho2;
    let half = ((1.0 - rho1 * rho1) * (1.0 - rho2 * rho2)).sqrt();
    Interval::new(centre - half, centre + half)
}

/// `I(Z_1..Z_m; X) = -½ ln(1 - rhoᵀ Sigma⁻¹ rho)`.
pub fn gaussian_mutual_information(sys: &GaussianSystem) -> Result<f64> {
    let explained = sys.explained_variance()?;
    let residual = 1.0 - explained;
    if residual <= 0.0 {
        return Err(Error::Conditioning(
            "joint covariance is singular: X is a deterministic function of Z".into(),
        ));
    }
    Ok(-0.5 * residual.ln())
}

/// Whole-minus-sum synergy. Negative values indicate redundancy.
pub fn wms_synergy(sys: &GaussianSystem) -> Result<f64> {
    let joint = gaussian_mutual_information(sys)?;
    let parts: f64 = sys.rho().iter().map(|&r| single_information(r)).sum();
    Ok(joint - parts)
}

/// Index of the largest `|rho_j|`; the lowest index wins ties.
pub fn dominant_index(rho: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (j, r) in rho.iter().enumerate() {
        match best {
            Some(b) if rho[b].abs() >= r.abs() => {}
            _ => best = Some(j),
        }
    }
    best
}

/// Gaussian union information: the information carried by the single most
/// correlated predictor.
pub fn gk_union_information(rho: &[f64]) -> Result<f64> {
    check_correlations(rho)?;
    let k = dominant_index(rho).ok_or_else(|| Error::Domain("empty rho".into()))?;
    Ok(single_information(rho[k]))
}

/// GK synergy `I(Z; X) - U(Z; X) = ½ ln((1 - rho_k²) / (1 - rhoᵀ Sigma⁻¹ rho))`,
/// clamped at zero.
pub fn gk_synergy(sys: &GaussianSystem) -> Result<f64> {
    let joint = gaussian_mutual_information(sys)?;
    let union = gk_union_information(sys.rho())?;
    Ok((joint - union).max(0.0))
}

/// Latent correlation matrix that drives GK synergy to zero for the given
/// target correlations.
///
/// Row and column `k` (the dominant predictor) hold `rho_j / rho_k`. The
/// remaining off-diagonal entries are zero (the arrowhead form) whenever that
/// matrix is positive semidefinite. For `m >= 3` the arrowhead can fail to be
/// a valid covariance (`sum_j (rho_j / rho_k)² > 1`); the other latents are
/// then made conditionally independent given `Z_k`, i.e.
/// `Sigma_ij = rho_i rho_j / rho_k²`, which keeps row `k` and is always valid.
pub fn gk_minimizing_covariance(rho: &[f64]) -> Result<GaussianSystem> {
    check_correlations(rho)?;
    let m = rho.len();
    let k = dominant_index(rho).ok_or_else(|| Error::Domain("empty rho".into()))?;
    let peak = rho[k].abs();
    if rho
        .iter()
        .enumerate()
        .any(|(j, r)| j != k && r.abs() == peak)
    {
        return Err(Error::Degenerate(
            "more than one correlation has the maximal magnitude; the minimizing set is degenerate"
                .into(),
        ));
    }
    let loading: Vec<f64> = rho.iter().map(|r| r / rho[k]).collect();
    let arrowhead = DMatrix::from_fn(m, m, |r, c| {
        if r == c {
            1.0
        } else if r == k {
            loading[c]
        } else if c == k {
            loading[r]
        } else {
            0.0
        }
    });
    let spill: f64 = loading
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != k)
        .map(|(_, a)| a * a)
        .sum();
    let sigma = if spill <= 1.0 {
        arrowhead
    } else {
        DMatrix::from_fn(
            m,
            m,
            |r, c| if r == c { 1.0 } else { loading[r] * loading[c] },
        )
    };
    GaussianSystem::new(rho.to_vec(), sigma)
}

/// Posterior `N(weightsᵀ z, variance)` of a standardized target under the
/// conditionally independent encoding assumption.
#[derive(Debug, Clone, PartialEq)]
pub struct CiPosterior {
    pub weights: Vec<f64>,
    pub variance: f64,
}

/// CI posterior for one output from its latent correlations.
///
/// With `R = sum_j rho_j² / (1 - rho_j²)`, the posterior variance is
/// `1 / (1 + R)` and `weights_j = variance · rho_j / (1 - rho_j²)`.
pub fn gaussian_ci_posterior(rho: &[f64]) -> Result<CiPosterior> {
    let limit = 1.0 - CORRELATION_CLAMP;
    let mut ratio = Vec::with_capacity(rho.len());
    let mut total = 0.0;
    for (j, &r) in rho.iter().enumerate() {
        if !r.is_finite() || r.abs() > 1.0 {
            return Err(Error::Domain(format!(
                "rho[{j}] = {r} is not a correlation"
            )));
        }
        let r = r.clamp(-limit, limit);
        let denom = 1.0 - r * r;
        ratio.push(r / denom);
        total += r * r / denom;
    }
    let variance = 1.0 / (1.0 + total);
    Ok(CiPosterior {
        weights: ratio.into_iter().map(|q| variance * q).collect(),
        variance,
    })
}

/// CI synergy averaged over `p(z)`: the expected KL divergence between the
/// true posterior `N(betaᵀz, 1 - rhoᵀ Sigma⁻¹ rho)` and the CI posterior.
///
/// Uses `E[((beta - w)ᵀz)²] = (beta - w)ᵀ Sigma (beta - w)` under `z ~ N(0, Sigma)`.
pub fn gaussian_ci_synergy(sys: &GaussianSystem) -> Result<f64> {
    let beta = sys.regression()?;
    let true_var = 1.0 - sys.rho.dot(&beta);
    if true_var <= 0.0 {
        return Err(Error::Conditioning(
            "joint covariance is singular: the true posterior is degenerate".into(),
        ));
    }
    let ci = gaussian_ci_posterior(sys.rho())?;
    let diff = beta - DVector::from_vec(ci.weights);
    let mean_gap = diff.dot(&(&sys.sigma_z * &diff));
    let kl = 0.5 * ((ci.variance / true_var).ln() + (true_var + mean_gap) / ci.variance - 1.0);
    Ok(kl.max(0.0))
}
