use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::{Array1, Array2, ArrayView2, Axis};

use crate::error::{Error, Result};

/// Principal subspace of a data matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Pca {
    /// `k x n`, orthonormal rows ordered by decreasing variance.
    pub components: Array2<f64>,
    pub mean: Array1<f64>,
    /// Sample variance along each component.
    pub variances: Array1<f64>,
}

fn to_na(a: &Array2<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

/// Top-`k` eigenvectors of the sample covariance of `data` (`N x n`).
/// Each component's largest-magnitude entry is made positive.
pub fn pca_fit(data: ArrayView2<f64>, k: usize) -> Result<Pca> {
    let (rows, n) = data.dim();
    if k == 0 || k > rows.min(n) {
        return Err(Error::Domain(format!(
            "k = {k} must be in 1..={} for a {rows}x{n} matrix",
            rows.min(n)
        )));
    }
    let mean = data.mean_axis(Axis(0)).expect("nonempty");
    let centered = &data - &mean;
    let denom = rows.saturating_sub(1).max(1) as f64;
    let mut components = Array2::zeros((k, n));
    let mut variances = Array1::zeros(k);

    // Eigen-decompose whichever of covariance (n x n) or Gram (N x N) is smaller.
    let use_gram = rows < n;
    let small = if use_gram {
        centered.dot(&centered.t())
    } else {
        centered.t().dot(&centered)
    };
    let eig = SymmetricEigen::new(to_na(&small));
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .total_cmp(&eig.eigenvalues[a])
            .then(a.cmp(&b))
    });
    for (c, &idx) in order.iter().take(k).enumerate() {
        let lambda = eig.eigenvalues[idx].max(0.0);
        let col = eig.eigenvectors.column(idx);
        let mut v = Array1::from_iter(col.iter().copied());
        if use_gram {
            v = centered.t().dot(&v);
            let norm = v.dot(&v).sqrt();
            if norm > 0.0 {
                v /= norm;
            }
        }
        let pivot = v
            .iter()
            .copied()
            .enumerate()
            .fold((0, 0.0f64), |best, (i, x)| {
                if x.abs() > best.1.abs() {
                    (i, x)
                } else {
                    best
                }
            });
        if pivot.1 < 0.0 {
            v.mapv_inplace(|x| -x);
        }
        components.row_mut(c).assign(&v);
        variances[c] = lambda / denom;
    }
    Ok(Pca {
        components,
        mean,
        variances,
    })
}

impl Pca {
    pub fn project(&self, data: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.check(data)?;
        Ok((&data - &self.mean).dot(&self.components.t()))
    }

    pub fn reconstruct(&self, data: ArrayView2<f64>) -> Result<Array2<f64>> {
        Ok(self.project(data)?.dot(&self.components) + &self.mean)
    }

    fn check(&self, data: ArrayView2<f64>) -> Result<()> {
        if data.ncols() != self.mean.len() {
            return Err(Error::Shape(format!(
                "data has {} columns, PCA was fit on {}",
                data.ncols(),
                self.mean.len()
            )));
        }
        Ok(())
    }
}
