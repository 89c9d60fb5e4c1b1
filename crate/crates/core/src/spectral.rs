//! The edge-biased mean matrix and its Perron–Frobenius eigenpair.
//!
//! Rows and columns are indexed by the ordered part-pairs (i, j) with
//! positive cross intensity. The entry at row (i, j), column (j, m) is the
//! expected number of type-(j, m) children of a type-(i, j) clone; entries
//! whose column part does not match the row's destination are zero. The
//! spectral radius of this matrix decides whether a giant component exists.

use crate::degree::DegreeSpec;
use crate::scalar::Scalar;
use crate::scc::strongly_connected_components;
use serde::Serialize;
use thiserror::Error;

/// Expected-offspring matrix of the edge-biased branching process.
///
/// Entries are exact rationals when the generating spec is exact, so the
/// zero pattern used by the irreducibility test is free of rounding noise.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanMatrix {
    index: Vec<(usize, usize)>,
    entries: Vec<Scalar>,
    exact: bool,
}

impl MeanMatrix {
    /// The ordered part-pairs labelling rows and columns.
    pub fn index(&self) -> &[(usize, usize)] {
        &self.index
    }

    /// Matrix dimension: the number of ordered pairs with positive intensity.
    pub fn n_types(&self) -> usize {
        self.index.len()
    }

    pub fn entry(&self, row: usize, col: usize) -> &Scalar {
        &self.entries[row * self.index.len() + col]
    }

    pub fn is_exact(&self) -> bool {
        self.exact
    }

    /// The matrix as dense float rows, for iteration and serialization.
    pub fn rows_f64(&self) -> Vec<Vec<f64>> {
        let n = self.index.len();
        (0..n)
            .map(|r| (0..n).map(|c| self.entry(r, c).to_f64()).collect())
            .collect()
    }
}

/// Builds the mean matrix of the edge-biased branching process: the entry at
/// row (i, j), column (j, m) sums (d_m - [m == i]) * d_i * mass / lambda_i_j
/// over the degree atoms of part j. Other columns are zero.
pub fn build_mean_matrix(spec: &DegreeSpec) -> MeanMatrix {
    let index = spec.pairs().to_vec();
    let n = index.len();
    let mut entries = vec![Scalar::zero(); n * n];
    for (row, &(i, j)) in index.iter().enumerate() {
        let lambda = spec.lambda(i, j);
        for (col, &(l, m)) in index.iter().enumerate() {
            if l != j {
                continue;
            }
            let mut sum = Scalar::zero();
            for (part, d, mass) in spec.atoms() {
                if part != j {
                    continue;
                }
                let back = d.get(i) as i64;
                if back == 0 {
                    continue;
                }
                let children = d.get(m) as i64 - i64::from(m == i);
                if children <= 0 {
                    continue;
                }
                sum = &sum + &(&Scalar::from_int(children * back) * mass);
            }
            entries[row * n + col] = &sum / lambda;
        }
    }
    MeanMatrix {
        index,
        entries,
        exact: spec.is_exact(),
    }
}

/// Strongly-connected-component decomposition of the positive-entry digraph
/// of a mean matrix, with the irreducibility verdict.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Irreducibility {
    pub irreducible: bool,
    /// Components as lists of part-pairs, each sorted, ordered by first pair.
    pub components: Vec<Vec<(usize, usize)>>,
}

/// Tests whether the matrix is irreducible: the digraph with an edge (u, v)
/// for every positive entry must be strongly connected. A 1x1 matrix counts
/// as irreducible only if its single entry is positive, and an empty matrix
/// is not irreducible.
pub fn check_irreducible(matrix: &MeanMatrix) -> Irreducibility {
    let n = matrix.n_types();
    let adjacency: Vec<Vec<usize>> = (0..n)
        .map(|r| (0..n).filter(|&c| !matrix.entry(r, c).is_zero()).collect())
        .collect();
    let components: Vec<Vec<(usize, usize)>> = strongly_connected_components(&adjacency)
        .into_iter()
        .map(|c| c.into_iter().map(|u| matrix.index()[u]).collect())
        .collect();
    let irreducible = match n {
        0 => false,
        1 => !matrix.entry(0, 0).is_zero(),
        _ => components.len() == 1,
    };
    Irreducibility {
        irreducible,
        components,
    }
}

/// Criticality classification of the Perron–Frobenius eigenvalue against 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Subcritical,
    Critical,
    Supercritical,
}

impl Regime {
    /// Classifies gamma against 1 with the given tolerance band.
    pub fn classify(gamma: f64, band: f64) -> Self {
        if gamma > 1.0 + band {
            Regime::Supercritical
        } else if gamma < 1.0 - band {
            Regime::Subcritical
        } else {
            Regime::Critical
        }
    }
}

/// Default width of the critical band: exact inputs produce an exact matrix,
/// so only solver error separates gamma from 1; float inputs carry their own
/// rounding noise and get a wider band.
pub fn default_band(exact: bool) -> f64 {
    if exact {
        1e-9
    } else {
        1e-6
    }
}

/// Perron–Frobenius eigenvalue and left eigenvector of a mean matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralResult {
    /// Spectral radius; non-negative, and positive for irreducible matrices.
    pub gamma: f64,
    /// Left eigenvector, entries positive, normalized to sum 1, indexed like
    /// the matrix.
    pub left_vector: Vec<f64>,
    /// Max-norm of z'M - gamma z' at return.
    pub residual: f64,
    pub irreducible: bool,
    pub regime: Regime,
}

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("matrix is not irreducible; strongly connected components: {components:?}")]
    NotIrreducible {
        components: Vec<Vec<(usize, usize)>>,
    },
    #[error(
        "power iteration did not converge within {iterations} iterations (residual {residual:.3e})"
    )]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("spec is not in bipartite form: {reason}")]
    NotBipartiteForm { reason: String },
}

/// Computes the Perron–Frobenius eigenpair by power iteration from the
/// uniform start vector. See [`perron_eigenpair_from`].
pub fn perron_eigenpair(
    matrix: &MeanMatrix,
    tol: f64,
    max_iter: usize,
) -> Result<SpectralResult, SpectralError> {
    let n = matrix.n_types().max(1);
    perron_eigenpair_from(
        matrix,
        &vec![1.0 / n as f64; matrix.n_types()],
        tol,
        max_iter,
    )
}

/// Computes the Perron–Frobenius eigenpair by left power iteration from the
/// given start vector (entries must be non-negative with a positive sum; the
/// vector is renormalized, so scale does not matter).
///
/// Iteration runs on (M + I) / 2 rather than M itself: the shift leaves the
/// eigenvectors alone, maps gamma to (gamma + 1) / 2, and breaks the period-2
/// cycling that raw iteration exhibits on bipartite-type index graphs.
/// Convergence requires both a Cauchy-stable eigenvalue estimate and
/// a residual on the original matrix at most tol * max(1, gamma).
pub fn perron_eigenpair_from(
    matrix: &MeanMatrix,
    start: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<SpectralResult, SpectralError> {
    let decomposition = check_irreducible(matrix);
    if !decomposition.irreducible {
        return Err(SpectralError::NotIrreducible {
            components: decomposition.components,
        });
    }
    let n = matrix.n_types();
    assert_eq!(start.len(), n, "start vector length must match the matrix");
    let rows = matrix.rows_f64();
    let shifted: Vec<Vec<f64>> = (0..n)
        .map(|r| {
            (0..n)
                .map(|c| (rows[r][c] + f64::from(r == c)) / 2.0)
                .collect()
        })
        .collect();

    let total: f64 = start.iter().sum();
    assert!(
        total > 0.0 && start.iter().all(|&x| x >= 0.0),
        "start vector must be non-negative with positive sum"
    );
    let mut z: Vec<f64> = start.iter().map(|&x| x / total).collect();
    let mut gamma_prev = f64::NAN;
    let mut residual = f64::INFINITY;

    for _ in 0..max_iter {
        let mut w = vec![0.0; n];
        for (r, zr) in z.iter().enumerate() {
            if *zr == 0.0 {
                continue;
            }
            for (c, wc) in w.iter_mut().enumerate() {
                *wc += zr * shifted[r][c];
            }
        }
        let dot_wz: f64 = w.iter().zip(&z).map(|(a, b)| a * b).sum();
        let dot_zz: f64 = z.iter().map(|a| a * a).sum();
        let gamma = 2.0 * (dot_wz / dot_zz) - 1.0;

        let scale: f64 = w.iter().sum();
        for wc in &mut w {
            *wc /= scale;
        }
        z = w;

        residual = 0.0;
        for c in 0..n {
            let zm: f64 = (0..n).map(|r| z[r] * rows[r][c]).sum();
            residual = residual.max((zm - gamma * z[c]).abs());
        }
        let threshold = tol * gamma.max(1.0);
        if (gamma - gamma_prev).abs() <= threshold && residual <= threshold {
            let regime = Regime::classify(gamma, default_band(matrix.is_exact()));
            return Ok(SpectralResult {
                gamma,
                left_vector: z,
                residual,
                irreducible: true,
                regime,
            });
        }
        gamma_prev = gamma;
    }
    Err(SpectralError::NoConvergence {
        iterations: max_iter,
        residual,
    })
}

/// The bipartite threshold sum over joint degree masses: sum of
/// j k (j k - j - k) p_j q_k, where p_j is the mass of the part-1 atom with
/// j cross edges and q_k the mass of the part-2 atom with k. Positive exactly
/// when the spectral radius exceeds 1. Requires a two-part spec whose part-1
/// atoms have no within-part degree and likewise for part 2.
pub fn bipartite_criterion(spec: &DegreeSpec) -> Result<Scalar, SpectralError> {
    if spec.parts() != 2 {
        return Err(SpectralError::NotBipartiteForm {
            reason: format!("expected 2 parts, found {}", spec.parts()),
        });
    }
    for (part, d, _) in spec.atoms() {
        let own = d.get(part);
        if own != 0 {
            return Err(SpectralError::NotBipartiteForm {
                reason: format!("atom {d} in part {} has {own} within-part edges", part + 1),
            });
        }
    }
    let mut sum = Scalar::zero();
    for (part_a, da, pa) in spec.atoms() {
        if part_a != 0 {
            continue;
        }
        let j = da.get(1) as i64;
        for (part_b, db, qb) in spec.atoms() {
            if part_b != 1 {
                continue;
            }
            let k = db.get(0) as i64;
            let weight = Scalar::from_int(j * k * (j * k - j - k));
            sum = &sum + &(&(&weight * pa) * qb);
        }
    }
    Ok(sum)
}
