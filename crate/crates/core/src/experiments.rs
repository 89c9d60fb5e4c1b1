//! Verdict harness: does the sampled world agree with the analysis?
//!
//! A plan names a degree model, a grid of graph sizes, and a trial budget.
//! [`run_verdict`] derives the analytic side (eigenvalue, regime, survival
//! probability), simulates the prescribed trials, and checks the regime's
//! predictions against the measurements, reporting one named pass/fail line
//! per check. [`run_sweep`] repeats the analytic half along an interpolation
//! family and tabulates empirical fractions per grid size into CSV.
//!
//! Every trial draws its randomness from a stream derived off the master
//! seed by a stable label, so results are byte-identical across runs and
//! across thread counts.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::branching::{build_offspring_law, survival_curve};
use crate::branching::{extinction_fixed_point, BranchingError, PointError, SweepError};
use crate::configuration::{sample_configuration, sample_simple, ConfigError};
use crate::degree::{
    DegreeSequence, DegreeSpec, RealizeError, RoundingPolicy, SpecFamily, SpecIssue,
};
use crate::exploration::explore_components;
use crate::rng::child_stream;
use crate::spectral::{build_mean_matrix, check_irreducible, perron_eigenpair};
use crate::spectral::{Regime, SpectralError};

/// Rejection budget when a plan asks for simple graphs.
const SIMPLE_ATTEMPTS: u32 = 1_000;

const EIGEN_TOL: f64 = 1e-12;
const FIXED_POINT_TOL: f64 = 1e-12;
const MAX_SOLVER_ITER: usize = 1_000_000;

#[derive(Debug, Error, PartialEq)]
pub enum PlanError {
    #[error("the size grid is empty")]
    EmptyGrid,
    #[error("size grid entry {n} at position {position} does not increase")]
    GridNotIncreasing { position: usize, n: u64 },
    #[error("size grid entry {n} is too small to simulate")]
    GridTooSmall { n: u64 },
    #[error("a plan needs at least one trial per size")]
    NoTrials,
    #[error("sweep parameter at position {position} is not finite")]
    BadParam { position: usize },
}

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error("degree model failed validation with {} error(s)", .issues.len())]
    InvalidSpec { issues: Vec<SpecIssue> },
    #[error("degree model could not be realized at n = {n}")]
    Realize {
        n: u64,
        #[source]
        source: RealizeError,
    },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Branching(#[from] BranchingError),
    #[error("sweep point {param}")]
    SweepPoint {
        param: f64,
        #[source]
        source: Box<ExperimentError>,
    },
}

impl From<SweepError> for ExperimentError {
    fn from(e: SweepError) -> ExperimentError {
        let source = match e.source {
            PointError::Spectral(s) => ExperimentError::Spectral(s),
            PointError::Branching(b) => ExperimentError::Branching(b),
        };
        ExperimentError::SweepPoint {
            param: e.param,
            source: Box::new(source),
        }
    }
}

/// Tolerances for the verdict checks. The defaults match the documented
/// acceptance bands; loosen or tighten per plan.
#[derive(Debug, Clone, Serialize)]
pub struct Tolerances {
    /// Floor of the supercritical band around eta; the band is
    /// max(floor, 3 stddev / sqrt(trials)).
    pub fraction_band_floor: f64,
    /// Ceiling on the mean largest fraction at the biggest size of a
    /// subcritical run.
    pub subcritical_ceiling: f64,
    /// Minimum fraction of each part the giant must reach in a
    /// supercritical run.
    pub part_fraction_floor: f64,
    /// Coefficient c in the supercritical second-largest bound c log n.
    pub second_log_coefficient: f64,
    /// Slack factor on the subcritical size/(omega^2 log n) ratio relative
    /// to its value at the smallest size.
    pub size_bound_slack: f64,
}

impl Default for Tolerances {
    fn default() -> Tolerances {
        Tolerances {
            fraction_band_floor: 0.02,
            subcritical_ceiling: 0.01,
            part_fraction_floor: 0.01,
            second_log_coefficient: 30.0,
            size_bound_slack: 3.0,
        }
    }
}

/// What to run: one degree model, measured at each size in the grid.
#[derive(Debug, Clone)]
pub struct ExperimentPlan {
    pub spec: DegreeSpec,
    /// Graph sizes, strictly increasing, each at least 2.
    pub n_grid: Vec<u64>,
    /// Trials per size, at least 1.
    pub trials: u32,
    pub seed: u64,
    /// Reject multigraphs and redraw until the sample is simple.
    pub simple: bool,
    pub tolerances: Tolerances,
}

impl ExperimentPlan {
    pub fn new(spec: DegreeSpec, n_grid: Vec<u64>, trials: u32, seed: u64) -> ExperimentPlan {
        ExperimentPlan {
            spec,
            n_grid,
            trials,
            seed,
            simple: false,
            tolerances: Tolerances::default(),
        }
    }

    pub fn validate(&self) -> Result<(), PlanError> {
        validate_grid(&self.n_grid, self.trials)
    }
}

fn validate_grid(n_grid: &[u64], trials: u32) -> Result<(), PlanError> {
    if n_grid.is_empty() {
        return Err(PlanError::EmptyGrid);
    }
    for (position, &n) in n_grid.iter().enumerate() {
        if n < 2 {
            return Err(PlanError::GridTooSmall { n });
        }
        if position > 0 && n <= n_grid[position - 1] {
            return Err(PlanError::GridNotIncreasing { position, n });
        }
    }
    if trials == 0 {
        return Err(PlanError::NoTrials);
    }
    Ok(())
}

/// One simulated graph, reduced to its component summary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRow {
    /// Realized vertex count (the balance repair may nudge the requested n).
    pub n: u64,
    pub trial: u32,
    /// Master seed the trial's stream was derived from.
    pub seed: u64,
    pub largest_size: u64,
    pub largest_fraction: f64,
    pub second_size: u64,
    pub largest_by_part: Vec<u64>,
    pub num_components: u64,
}

fn run_trial(
    seq: &DegreeSequence,
    seed: u64,
    trial: u32,
    simple: bool,
) -> Result<TrialRow, ExperimentError> {
    let mut rng = child_stream(seed, &format!("graph/{}/{}", seq.n(), trial));
    let graph = if simple {
        sample_simple(seq, &mut rng, SIMPLE_ATTEMPTS)?.graph
    } else {
        sample_configuration(seq, &mut rng)?
    };
    let census = explore_components(&graph, &mut rng);
    Ok(TrialRow {
        n: census.n,
        trial,
        seed,
        largest_size: census.largest_size,
        largest_fraction: census.largest_fraction,
        second_size: census.second_size,
        num_components: census.num_components() as u64,
        largest_by_part: census.largest_by_part,
    })
}

/// Samples and explores `trials` independent graphs of the sequence, in
/// parallel. Trial `t` draws from the stream labeled `graph/{n}/{t}`, so
/// the rows do not depend on scheduling.
pub fn simulate_trials(
    seq: &DegreeSequence,
    trials: u32,
    seed: u64,
    simple: bool,
) -> Result<Vec<TrialRow>, ExperimentError> {
    (0..trials)
        .into_par_iter()
        .map(|trial| run_trial(seq, seed, trial, simple))
        .collect()
}

/// Renders trial rows as CSV with the frozen column set: n, trial, seed,
/// largest_size, largest_fraction, second_size, one largest_part_i column
/// per part, num_components.
pub fn trial_csv(rows: &[TrialRow], parts: usize) -> String {
    let mut out = String::from("n,trial,seed,largest_size,largest_fraction,second_size");
    for part in 0..parts {
        out.push_str(&format!(",largest_part_{part}"));
    }
    out.push_str(",num_components\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}",
            row.n, row.trial, row.seed, row.largest_size, row.largest_fraction, row.second_size
        ));
        for part in 0..parts {
            out.push_str(&format!(
                ",{}",
                row.largest_by_part.get(part).copied().unwrap_or(0)
            ));
        }
        out.push_str(&format!(",{}\n", row.num_components));
    }
    out
}

/// Aggregates over the trials at one grid size.
#[derive(Debug, Clone, Serialize)]
pub struct ScaleRow {
    /// Realized vertex count.
    pub n: u64,
    pub trials: u32,
    /// Largest total degree in the realized sequence.
    pub omega: u64,
    pub mean_fraction: f64,
    pub stddev_fraction: f64,
    pub mean_second: f64,
    pub max_second: u64,
    /// max second-largest size over trials, divided by log n.
    pub second_log_ratio: f64,
    pub max_largest: u64,
    /// max largest size over trials, divided by omega^2 log n.
    pub size_omega_log_ratio: f64,
    /// Smallest per-part coverage of the largest component over all trials
    /// and parts: largest_by_part / part size.
    pub min_part_fraction: f64,
}

fn summarize(seq: &DegreeSequence, rows: &[TrialRow]) -> ScaleRow {
    let n = seq.n();
    let trials = rows.len() as u32;
    let log_n = (n as f64).ln();
    let omega = seq.omega();
    let mean_fraction = rows.iter().map(|r| r.largest_fraction).sum::<f64>() / trials as f64;
    let stddev_fraction = if trials > 1 {
        let ss = rows
            .iter()
            .map(|r| (r.largest_fraction - mean_fraction).powi(2))
            .sum::<f64>();
        (ss / (trials as f64 - 1.0)).sqrt()
    } else {
        0.0
    };
    let mean_second = rows.iter().map(|r| r.second_size as f64).sum::<f64>() / trials as f64;
    let max_second = rows.iter().map(|r| r.second_size).max().unwrap_or(0);
    let max_largest = rows.iter().map(|r| r.largest_size).max().unwrap_or(0);
    let mut part_sizes = vec![0u64; seq.parts()];
    for (part, _, count) in seq.counts() {
        part_sizes[part] += count;
    }
    let min_part_fraction = rows
        .iter()
        .flat_map(|r| {
            r.largest_by_part
                .iter()
                .zip(&part_sizes)
                .filter(|(_, &size)| size > 0)
                .map(|(&got, &size)| got as f64 / size as f64)
        })
        .fold(f64::INFINITY, f64::min);
    ScaleRow {
        n,
        trials,
        omega,
        mean_fraction,
        stddev_fraction,
        mean_second,
        max_second,
        second_log_ratio: max_second as f64 / log_n,
        max_largest,
        size_omega_log_ratio: max_largest as f64 / ((omega * omega) as f64 * log_n),
        min_part_fraction: if min_part_fraction.is_finite() {
            min_part_fraction
        } else {
            0.0
        },
    }
}

/// One named pass/fail line of a verdict.
#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// Every regime check passed.
    Pass,
    /// At least one regime check failed.
    Fail,
    /// Critical regime: analytic outputs only, nothing to check.
    AnalyticOnly,
    /// The mean matrix is reducible; per-block analysis does not apply.
    Degenerate,
}

/// The full analytic-versus-empirical comparison for one plan.
#[derive(Debug, Clone, Serialize)]
pub struct VerdictReport {
    pub gamma: Option<f64>,
    pub regime: Option<Regime>,
    pub eta: Option<f64>,
    pub residual: Option<f64>,
    pub irreducible: bool,
    /// Strongly connected blocks of the dependency graph, as part-pairs.
    pub blocks: Vec<Vec<(usize, usize)>>,
    pub rows: Vec<ScaleRow>,
    pub trials: Vec<TrialRow>,
    pub checks: Vec<CheckResult>,
    pub verdict: Verdict,
}

fn supercritical_checks(rows: &[ScaleRow], eta: f64, tol: &Tolerances) -> Vec<CheckResult> {
    let mut checks = Vec::new();
    let last = rows.last().expect("grid is non-empty");
    let band = tol
        .fraction_band_floor
        .max(3.0 * last.stddev_fraction / (last.trials as f64).sqrt());
    let gap = (last.mean_fraction - eta).abs();
    checks.push(CheckResult {
        name: "largest_fraction_matches_eta",
        passed: gap <= band,
        detail: format!(
            "n = {}: |{:.6} - {eta:.6}| = {gap:.6}, band {band:.6}",
            last.n, last.mean_fraction
        ),
    });
    let bounded = rows
        .iter()
        .all(|r| r.second_log_ratio <= tol.second_log_coefficient);
    checks.push(CheckResult {
        name: "second_largest_log_bound",
        passed: bounded,
        detail: format!(
            "second/log n ratios {:?} against coefficient {}; fitted {:.3} at n = {}",
            rows.iter().map(|r| r.second_log_ratio).collect::<Vec<_>>(),
            tol.second_log_coefficient,
            rows[0].second_log_ratio,
            rows[0].n
        ),
    });
    checks.push(CheckResult {
        name: "giant_covers_every_part",
        passed: last.min_part_fraction >= tol.part_fraction_floor,
        detail: format!(
            "n = {}: smallest part coverage {:.4}, floor {}",
            last.n, last.min_part_fraction, tol.part_fraction_floor
        ),
    });
    checks
}

fn subcritical_checks(rows: &[ScaleRow], tol: &Tolerances) -> Vec<CheckResult> {
    let mut checks = Vec::new();
    let last = rows.last().expect("grid is non-empty");
    let decreasing = rows
        .windows(2)
        .all(|w| w[1].mean_fraction < w[0].mean_fraction);
    checks.push(CheckResult {
        name: "largest_fraction_decreasing",
        passed: decreasing,
        detail: format!(
            "mean fractions {:?}",
            rows.iter().map(|r| r.mean_fraction).collect::<Vec<_>>()
        ),
    });
    checks.push(CheckResult {
        name: "largest_fraction_small",
        passed: last.mean_fraction < tol.subcritical_ceiling,
        detail: format!(
            "n = {}: mean fraction {:.6}, ceiling {}",
            last.n, last.mean_fraction, tol.subcritical_ceiling
        ),
    });
    let fitted = rows[0].size_omega_log_ratio;
    let bounded = rows
        .iter()
        .all(|r| r.size_omega_log_ratio <= tol.size_bound_slack * fitted);
    checks.push(CheckResult {
        name: "largest_within_omega_sq_log",
        passed: bounded,
        detail: format!(
            "heuristic proxy: size/(omega^2 log n) ratios {:?} against {:.3} x slack {}",
            rows.iter()
                .map(|r| r.size_omega_log_ratio)
                .collect::<Vec<_>>(),
            fitted,
            tol.size_bound_slack
        ),
    });
    checks
}

/// Runs the whole pipeline for one plan: validate, analyze, simulate per
/// grid size, and judge the regime's predictions. A reducible model short
/// circuits into a degenerate report carrying the block structure; a
/// critical one reports analytic values with no simulation.
pub fn run_verdict(plan: &ExperimentPlan) -> Result<VerdictReport, ExperimentError> {
    plan.validate()?;
    let report = plan.spec.validate();
    if !report.is_valid() {
        return Err(ExperimentError::InvalidSpec {
            issues: report.errors,
        });
    }
    let matrix = build_mean_matrix(&plan.spec);
    let blocks = check_irreducible(&matrix);
    if !blocks.irreducible {
        return Ok(VerdictReport {
            gamma: None,
            regime: None,
            eta: None,
            residual: None,
            irreducible: false,
            blocks: blocks.components,
            rows: Vec::new(),
            trials: Vec::new(),
            checks: Vec::new(),
            verdict: Verdict::Degenerate,
        });
    }
    let eigen = perron_eigenpair(&matrix, EIGEN_TOL, MAX_SOLVER_ITER)?;
    let law = build_offspring_law(&plan.spec);
    let survival = extinction_fixed_point(&law, FIXED_POINT_TOL, MAX_SOLVER_ITER)?;
    if eigen.regime == Regime::Critical {
        return Ok(VerdictReport {
            gamma: Some(eigen.gamma),
            regime: Some(eigen.regime),
            eta: Some(survival.eta),
            residual: Some(eigen.residual),
            irreducible: true,
            blocks: blocks.components,
            rows: Vec::new(),
            trials: Vec::new(),
            checks: Vec::new(),
            verdict: Verdict::AnalyticOnly,
        });
    }
    let mut rows = Vec::with_capacity(plan.n_grid.len());
    let mut trials = Vec::new();
    for &n in &plan.n_grid {
        let seq = plan
            .spec
            .realize(n, RoundingPolicy::LargestRemainder)
            .map_err(|source| ExperimentError::Realize { n, source })?;
        let trial_rows = simulate_trials(&seq, plan.trials, plan.seed, plan.simple)?;
        rows.push(summarize(&seq, &trial_rows));
        trials.extend(trial_rows);
    }
    let checks = match eigen.regime {
        Regime::Supercritical => supercritical_checks(&rows, survival.eta, &plan.tolerances),
        Regime::Subcritical => subcritical_checks(&rows, &plan.tolerances),
        Regime::Critical => unreachable!("critical plans return before simulating"),
    };
    let verdict = if checks.iter().all(|c| c.passed) {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(VerdictReport {
        gamma: Some(eigen.gamma),
        regime: Some(eigen.regime),
        eta: Some(survival.eta),
        residual: Some(eigen.residual),
        irreducible: true,
        blocks: blocks.components,
        rows,
        trials,
        checks,
        verdict,
    })
}

/// A verdict-style run repeated along an interpolation family.
#[derive(Debug, Clone)]
pub struct SweepPlan {
    pub family: SpecFamily,
    /// Interpolation parameters, each finite; an empty list yields a
    /// header-only table.
    pub params: Vec<f64>,
    pub n_grid: Vec<u64>,
    pub trials: u32,
    pub seed: u64,
    pub simple: bool,
}

impl SweepPlan {
    pub fn validate(&self) -> Result<(), PlanError> {
        validate_grid(&self.n_grid, self.trials)?;
        for (position, p) in self.params.iter().enumerate() {
            if !p.is_finite() {
                return Err(PlanError::BadParam { position });
            }
        }
        Ok(())
    }
}

/// Evaluates gamma and eta at every parameter and measures the mean largest
/// fraction at every grid size, as CSV with columns param, gamma, eta, then
/// one mean_fraction_n{n} column per requested size. Point k simulates with
/// master seed `seed + k`, so a one-point sweep reproduces the verdict
/// trials for the same seed exactly.
pub fn run_sweep(plan: &SweepPlan) -> Result<String, ExperimentError> {
    plan.validate()?;
    let mut out = String::from("param,gamma,eta");
    for &n in &plan.n_grid {
        out.push_str(&format!(",mean_fraction_n{n}"));
    }
    out.push('\n');
    let curve = survival_curve(&plan.family, &plan.params, FIXED_POINT_TOL, MAX_SOLVER_ITER)?;
    for (k, point) in curve.iter().enumerate() {
        let spec = plan.family.interpolate(point.param);
        let point_seed = plan.seed.wrapping_add(k as u64);
        let at = |source: ExperimentError| ExperimentError::SweepPoint {
            param: point.param,
            source: Box::new(source),
        };
        out.push_str(&format!("{},{},{}", point.param, point.gamma, point.eta));
        for &n in &plan.n_grid {
            let seq = spec
                .realize(n, RoundingPolicy::LargestRemainder)
                .map_err(|source| at(ExperimentError::Realize { n, source }))?;
            let rows = simulate_trials(&seq, plan.trials, point_seed, plan.simple).map_err(at)?;
            let mean = rows.iter().map(|r| r.largest_fraction).sum::<f64>() / rows.len() as f64;
            out.push_str(&format!(",{mean}"));
        }
        out.push('\n');
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testgen;

    #[test]
    fn plans_reject_bad_grids() {
        let spec = testgen::supercritical_bipartite();
        let plan = ExperimentPlan::new(spec.clone(), vec![], 5, 1);
        assert_eq!(plan.validate(), Err(PlanError::EmptyGrid));
        let plan = ExperimentPlan::new(spec.clone(), vec![100, 100], 5, 1);
        assert_eq!(
            plan.validate(),
            Err(PlanError::GridNotIncreasing {
                position: 1,
                n: 100
            })
        );
        let plan = ExperimentPlan::new(spec.clone(), vec![1, 50], 5, 1);
        assert_eq!(plan.validate(), Err(PlanError::GridTooSmall { n: 1 }));
        let plan = ExperimentPlan::new(spec, vec![100], 0, 1);
        assert_eq!(plan.validate(), Err(PlanError::NoTrials));
    }

    #[test]
    fn trial_csv_has_the_frozen_header() {
        let seq = testgen::supercritical_bipartite()
            .realize(64, RoundingPolicy::LargestRemainder)
            .unwrap();
        let rows = simulate_trials(&seq, 3, 9, false).unwrap();
        let csv = trial_csv(&rows, 2);
        let mut lines = csv.lines();
        assert_eq!(
            lines.next(),
            Some("n,trial,seed,largest_size,largest_fraction,second_size,largest_part_0,largest_part_1,num_components")
        );
        assert_eq!(lines.count(), 3);
        for (t, row) in rows.iter().enumerate() {
            assert_eq!(row.trial, t as u32);
            assert_eq!(row.seed, 9);
            assert_eq!(row.n, 64);
            assert_eq!(row.largest_by_part.iter().sum::<u64>(), row.largest_size);
        }
    }

    #[test]
    fn trials_are_reproducible_and_scheduling_free() {
        let seq = testgen::supercritical_bipartite()
            .realize(300, RoundingPolicy::LargestRemainder)
            .unwrap();
        let first = simulate_trials(&seq, 8, 123, false).unwrap();
        let second = simulate_trials(&seq, 8, 123, false).unwrap();
        assert_eq!(first, second);
        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| simulate_trials(&seq, 8, 123, false).unwrap());
        assert_eq!(first, single);
        let wide = rayon::ThreadPoolBuilder::new()
            .num_threads(8)
            .build()
            .unwrap()
            .install(|| simulate_trials(&seq, 8, 123, false).unwrap());
        assert_eq!(first, wide);
    }

    #[test]
    fn supercritical_verdict_passes_at_modest_sizes() {
        let plan = ExperimentPlan::new(
            testgen::supercritical_bipartite(),
            vec![400, 1600, 6400],
            8,
            2_026,
        );
        let report = run_verdict(&plan).unwrap();
        assert_eq!(report.regime, Some(Regime::Supercritical));
        assert!((report.gamma.unwrap() - 1.5f64.sqrt()).abs() < 1e-9);
        assert!((report.eta.unwrap() - 23.0 / 27.0).abs() < 1e-10);
        assert!(report.irreducible);
        assert_eq!(report.rows.len(), 3);
        assert_eq!(report.trials.len(), 24);
        assert_eq!(report.checks.len(), 3);
        for check in &report.checks {
            assert!(check.passed, "{}: {}", check.name, check.detail);
        }
        assert_eq!(report.verdict, Verdict::Pass);
    }

    #[test]
    fn subcritical_verdict_passes_and_shrinks() {
        let plan = ExperimentPlan::new(
            testgen::subcritical_bipartite(),
            vec![2_000, 20_000],
            8,
            2_027,
        );
        let report = run_verdict(&plan).unwrap();
        assert_eq!(report.regime, Some(Regime::Subcritical));
        assert!((report.gamma.unwrap() - 0.6f64.sqrt()).abs() < 1e-9);
        assert_eq!(report.eta, Some(0.0));
        assert_eq!(report.verdict, Verdict::Pass, "{:#?}", report.checks);
    }

    #[test]
    fn reducible_model_returns_a_degenerate_report() {
        let plan = ExperimentPlan::new(testgen::disjoint_four_part(), vec![1_000], 4, 3);
        let report = run_verdict(&plan).unwrap();
        assert_eq!(report.verdict, Verdict::Degenerate);
        assert!(!report.irreducible);
        assert!(report.blocks.len() >= 2);
        assert_eq!(report.gamma, None);
        assert_eq!(report.eta, None);
        assert!(report.rows.is_empty());
        assert!(report.checks.is_empty());
    }

    #[test]
    fn critical_model_reports_analytics_only() {
        let plan = ExperimentPlan::new(testgen::unipartite_cycles(), vec![1_000], 4, 3);
        let report = run_verdict(&plan).unwrap();
        assert_eq!(report.verdict, Verdict::AnalyticOnly);
        assert_eq!(report.regime, Some(Regime::Critical));
        assert!((report.gamma.unwrap() - 1.0).abs() < 1e-9);
        assert!(report.rows.is_empty());
        assert!(report.checks.is_empty());
    }

    #[test]
    fn verdict_analytics_match_the_direct_solvers() {
        let spec = testgen::supercritical_bipartite();
        let plan = ExperimentPlan::new(spec.clone(), vec![200], 2, 5);
        let report = run_verdict(&plan).unwrap();
        let matrix = build_mean_matrix(&spec);
        let eigen = perron_eigenpair(&matrix, EIGEN_TOL, MAX_SOLVER_ITER).unwrap();
        let survival = extinction_fixed_point(
            &build_offspring_law(&spec),
            FIXED_POINT_TOL,
            MAX_SOLVER_ITER,
        )
        .unwrap();
        assert_eq!(report.gamma, Some(eigen.gamma));
        assert_eq!(report.residual, Some(eigen.residual));
        assert_eq!(report.eta, Some(survival.eta));
    }

    #[test]
    fn sweep_crosses_the_transition() {
        let family = SpecFamily::new(
            testgen::subcritical_bipartite(),
            testgen::supercritical_bipartite(),
        )
        .unwrap();
        let plan = SweepPlan {
            family,
            params: vec![0.0, 0.25, 0.5, 0.75, 1.0],
            n_grid: vec![8_000],
            trials: 4,
            seed: 11,
            simple: false,
        };
        let csv = run_sweep(&plan).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "param,gamma,eta,mean_fraction_n8000");
        assert_eq!(lines.len(), 6);
        let mut gammas = Vec::new();
        let mut fractions = Vec::new();
        for line in &lines[1..] {
            let cells: Vec<&str> = line.split(',').collect();
            gammas.push(cells[1].parse::<f64>().unwrap());
            fractions.push(cells[3].parse::<f64>().unwrap());
        }
        assert!(gammas.windows(2).all(|w| w[0] < w[1]));
        assert!(fractions[0] < 0.02);
        assert!((fractions[4] - 23.0 / 27.0).abs() < 0.05);
    }

    #[test]
    fn empty_sweep_is_header_only() {
        let family = SpecFamily::new(
            testgen::subcritical_bipartite(),
            testgen::supercritical_bipartite(),
        )
        .unwrap();
        let plan = SweepPlan {
            family,
            params: vec![],
            n_grid: vec![500],
            trials: 2,
            seed: 1,
            simple: false,
        };
        assert_eq!(
            run_sweep(&plan).unwrap(),
            "param,gamma,eta,mean_fraction_n500\n"
        );
    }

    #[test]
    fn one_point_sweep_matches_the_verdict_trials() {
        let spec = testgen::supercritical_bipartite();
        let family = SpecFamily::new(spec.clone(), spec.clone()).unwrap();
        let sweep = SweepPlan {
            family,
            params: vec![1.0],
            n_grid: vec![800],
            trials: 5,
            seed: 77,
            simple: false,
        };
        let csv = run_sweep(&sweep).unwrap();
        let row = csv.lines().nth(1).unwrap();
        let sweep_fraction: f64 = row.split(',').nth(3).unwrap().parse().unwrap();
        let plan = ExperimentPlan::new(spec, vec![800], 5, 77);
        let report = run_verdict(&plan).unwrap();
        assert_eq!(sweep_fraction, report.rows[0].mean_fraction);
        let gamma: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(gamma, report.gamma.unwrap());
    }
}
