//! The edge-biased multi-type branching process: offspring laws, extinction
//! probabilities by fixed point, survival probability, and Monte Carlo
//! simulation of total progeny.
//!
//! Types are the ordered part-pairs (i, j) of the degree model. A type-(i, j)
//! individual is a vertex of part j reached along an edge from part i; it is
//! drawn with probability proportional to its degree back toward part i and
//! spawns one child per remaining edge slot. The root is an ordinary vertex
//! drawn from the plain degree distribution.

use crate::degree::{DegreeSpec, SpecFamily};
use crate::scalar::Scalar;
use crate::spectral::{build_mean_matrix, perron_eigenpair, Regime, SpectralError};
use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::Serialize;
use thiserror::Error;

/// One outcome of an offspring draw: with `probability`, the individual has
/// `children[t]` children of type `t` (indexed like the law's pair list).
#[derive(Debug, Clone, PartialEq)]
pub struct OffspringRow {
    probability: f64,
    children: Vec<u64>,
}

impl OffspringRow {
    pub fn probability(&self) -> f64 {
        self.probability
    }

    pub fn children(&self) -> &[u64] {
        &self.children
    }
}

/// Offspring distributions of the edge-biased branching process: one
/// size-biased row set per clone type, plus the root law over plain vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct OffspringLaw {
    pairs: Vec<(usize, usize)>,
    per_type: Vec<Vec<OffspringRow>>,
    root: Vec<OffspringRow>,
}

impl OffspringLaw {
    /// The ordered part-pairs indexing types, matching the mean matrix.
    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn n_types(&self) -> usize {
        self.pairs.len()
    }

    /// Offspring rows of one clone type.
    pub fn rows(&self, type_index: usize) -> &[OffspringRow] {
        &self.per_type[type_index]
    }

    /// Root rows: one per degree atom, with the plain (unbiased) masses.
    pub fn root_rows(&self) -> &[OffspringRow] {
        &self.root
    }

    /// Total probability mass per clone type, for sanity checks; each sum is
    /// 1 up to the precision of the generating spec.
    pub fn type_row_sums(&self) -> Vec<f64> {
        self.per_type
            .iter()
            .map(|rows| rows.iter().map(|r| r.probability).sum())
            .collect()
    }
}

/// Builds the offspring law of a validated spec. A type-(i, j) individual is
/// a part-j atom d drawn with probability d_i * mass / lambda_i_j, producing
/// d_m children of type (j, m), less one for the back edge when m = i. The
/// root atom (part i, d) is drawn with its plain mass and produces d_j
/// children of type (i, j).
pub fn build_offspring_law(spec: &DegreeSpec) -> OffspringLaw {
    let pairs = spec.pairs().to_vec();
    let n = pairs.len();
    let type_of = |i: usize, j: usize| -> usize {
        spec.pair_index(i, j)
            .expect("positive-mass atom degree must map into the pair set")
    };

    let mut per_type = Vec::with_capacity(n);
    for &(i, j) in &pairs {
        let lambda = spec.lambda(i, j);
        let mut rows = Vec::new();
        for (part, d, mass) in spec.atoms() {
            if part != j || d.get(i) == 0 || mass.is_zero() {
                continue;
            }
            let weight = &(&Scalar::from_int(d.get(i) as i64) * mass) / lambda;
            let mut children = vec![0u64; n];
            for (m, &dm) in d.entries().iter().enumerate() {
                let count = dm - u64::from(m == i);
                if count > 0 {
                    children[type_of(j, m)] = count;
                }
            }
            rows.push(OffspringRow {
                probability: weight.to_f64(),
                children,
            });
        }
        per_type.push(rows);
    }

    let mut root = Vec::new();
    for (part, d, mass) in spec.atoms() {
        if mass.is_zero() {
            continue;
        }
        let mut children = vec![0u64; n];
        for (j, &dj) in d.entries().iter().enumerate() {
            if dj > 0 {
                children[type_of(part, j)] = dj;
            }
        }
        root.push(OffspringRow {
            probability: mass.to_f64(),
            children,
        });
    }

    OffspringLaw {
        pairs,
        per_type,
        root,
    }
}

/// Extinction probabilities and survival probability of the process.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurvivalSolution {
    /// Extinction probability per clone type: the smallest non-negative
    /// fixed point of the offspring generating map.
    pub q: Vec<f64>,
    /// Survival probability of the process started from a plain root vertex.
    pub eta: f64,
    pub iterations: usize,
    /// Max-norm of q - F(q) at return.
    pub residual: f64,
}

#[derive(Debug, Error)]
pub enum BranchingError {
    #[error(
        "extinction fixed point did not converge within {iterations} iterations \
         (residual {residual:.3e})"
    )]
    NoConvergence { iterations: usize, residual: f64 },
}

/// When every extinction coordinate lands this close to 1, the process is
/// (sub)critical and the true fixed point is exactly 1; snapping removes the
/// solver's geometric tail so subcritical survival comes out as exactly 0.
const EXTINCTION_SNAP: f64 = 1e-7;

fn apply_generating_map(law: &OffspringLaw, q: &[f64], out: &mut [f64]) {
    for (t, slot) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for row in &law.per_type[t] {
            let mut product = row.probability;
            for (child_type, &count) in row.children.iter().enumerate() {
                for _ in 0..count {
                    product *= q[child_type];
                }
            }
            acc += product;
        }
        *slot = acc;
    }
}

/// Iterates the offspring generating map from 0 until the extinction vector
/// is stationary within `tol` in max norm, then evaluates the survival
/// probability through the root law. The iteration is monotone
/// non-decreasing and bounded by 1, which is asserted as it runs.
pub fn extinction_fixed_point(
    law: &OffspringLaw,
    tol: f64,
    max_iter: usize,
) -> Result<SurvivalSolution, BranchingError> {
    let n = law.n_types();
    let mut q = vec![0.0; n];
    let mut next = vec![0.0; n];
    let mut iterations = 0;
    let mut residual = f64::INFINITY;
    loop {
        if iterations >= max_iter {
            return Err(BranchingError::NoConvergence {
                iterations,
                residual,
            });
        }
        apply_generating_map(law, &q, &mut next);
        iterations += 1;
        for (t, value) in next.iter_mut().enumerate() {
            assert!(
                *value >= q[t] - 1e-12 && *value <= 1.0 + 1e-12,
                "generating map left the monotone corridor at type {t}"
            );
            *value = value.clamp(q[t], 1.0);
        }
        residual = q
            .iter()
            .zip(&next)
            .map(|(a, b)| (b - a).abs())
            .fold(0.0, f64::max);
        std::mem::swap(&mut q, &mut next);
        if residual <= tol {
            break;
        }
    }
    if q.iter().all(|&v| 1.0 - v <= EXTINCTION_SNAP) {
        q.iter_mut().for_each(|v| *v = 1.0);
    }

    apply_generating_map(law, &q, &mut next);
    let residual = q
        .iter()
        .zip(&next)
        .map(|(a, b)| (b - a).abs())
        .fold(0.0, f64::max);

    let eta = if q.iter().all(|&v| v == 1.0) {
        // Every subtree dies almost surely, so survival is exactly zero;
        // summing the root masses in floats would leave stray ulps here.
        0.0
    } else {
        let mut extinct = 0.0;
        for row in &law.root {
            let mut product = row.probability;
            for (child_type, &count) in row.children.iter().enumerate() {
                for _ in 0..count {
                    product *= q[child_type];
                }
            }
            extinct += product;
        }
        (1.0 - extinct).clamp(0.0, 1.0)
    };
    Ok(SurvivalSolution {
        q,
        eta,
        iterations,
        residual,
    })
}

/// Outcome of one total-progeny simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "outcome", content = "size")]
pub enum SizeOutcome {
    /// The process died with this many individuals in total (root included).
    Died(u64),
    /// The population total exceeded the cap and the process was truncated.
    Survived,
}

/// Samples a multinomial split of `count` individuals across the rows by a
/// chain of binomials, then accumulates each row's children.
fn spawn_generation(
    rows: &[OffspringRow],
    count: u64,
    next: &mut [u64],
    rng: &mut impl Rng,
) -> u64 {
    let mut remaining = count;
    let mut mass_left: f64 = rows.iter().map(|r| r.probability).sum();
    let mut born = 0u64;
    for (idx, row) in rows.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        let take = if idx + 1 == rows.len() {
            remaining
        } else {
            let p = (row.probability / mass_left).clamp(0.0, 1.0);
            Binomial::new(remaining, p)
                .expect("binomial parameters are valid")
                .sample(rng)
        };
        for (t, &c) in row.children.iter().enumerate() {
            let add = take * c;
            next[t] += add;
            born += add;
        }
        remaining -= take;
        mass_left -= row.probability;
    }
    born
}

/// Runs the branching process generation by generation until it dies or its
/// total population exceeds `cap`. Individual draws within one generation
/// and type are aggregated into binomial splits, so large generations cost
/// one draw per offspring row rather than one per individual.
pub fn simulate_total_size(law: &OffspringLaw, cap: u64, rng: &mut impl Rng) -> SizeOutcome {
    assert!(cap >= 1, "cap must be at least 1");
    let n = law.n_types();
    let mut population = vec![0u64; n];

    let u: f64 = rng.random();
    let mut cumulative = 0.0;
    let mut root = law.root.last();
    for row in &law.root {
        cumulative += row.probability;
        if u < cumulative {
            root = Some(row);
            break;
        }
    }
    let root = root.expect("root law is non-empty for a spec with mass");
    for (t, &c) in root.children.iter().enumerate() {
        population[t] += c;
    }

    let mut total: u64 = 1;
    loop {
        let generation: u64 = population.iter().sum();
        if generation == 0 {
            return SizeOutcome::Died(total);
        }
        total += generation;
        if total > cap {
            return SizeOutcome::Survived;
        }
        let mut next = vec![0u64; n];
        for (t, &count) in population.iter().enumerate() {
            if count > 0 {
                spawn_generation(&law.per_type[t], count, &mut next, rng);
            }
        }
        population = next;
    }
}

/// One analytic row of a parameter sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvePoint {
    pub param: f64,
    pub gamma: f64,
    pub regime: Regime,
    pub eta: f64,
}

#[derive(Debug, Error)]
pub enum PointError {
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Branching(#[from] BranchingError),
}

#[derive(Debug, Error)]
#[error("sweep point {param}: {source}")]
pub struct SweepError {
    pub param: f64,
    pub source: PointError,
}

/// Evaluates eigenvalue and survival probability along an interpolation
/// family, one row per grid value.
pub fn survival_curve(
    family: &SpecFamily,
    grid: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<Vec<CurvePoint>, SweepError> {
    let mut rows = Vec::with_capacity(grid.len());
    for &param in grid {
        let spec = family.interpolate(param);
        let at = |source: PointError| SweepError { param, source };
        let matrix = build_mean_matrix(&spec);
        let eigen =
            perron_eigenpair(&matrix, tol.min(1e-10), max_iter).map_err(|e| at(e.into()))?;
        let law = build_offspring_law(&spec);
        let survival = extinction_fixed_point(&law, tol, max_iter).map_err(|e| at(e.into()))?;
        rows.push(CurvePoint {
            param,
            gamma: eigen.gamma,
            regime: eigen.regime,
            eta: survival.eta,
        });
    }
    Ok(rows)
}
