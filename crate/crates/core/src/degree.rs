//! Degree models for multipartite graphs: spec distributions over
//! (part, degree-vector) atoms, realized integer sequences, validation,
//! and the JSON file formats.
//!
//! Part indices are 0-based throughout the API. The file formats write them
//! 1-based; the load/save layer converts.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{self, Scalar};

/// Tolerance for float-mode mass and intensity checks.
pub const MASS_TOL: f64 = 1e-12;

/// One degree vector: entry `j` is the number of neighbors a vertex has in
/// part `j`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DegreeVector(Vec<u64>);

impl DegreeVector {
    pub fn new(entries: Vec<u64>) -> Self {
        DegreeVector(entries)
    }

    pub fn entries(&self) -> &[u64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, part: usize) -> u64 {
        self.0[part]
    }

    /// Total degree, i.e. the number of clones a vertex of this type carries.
    pub fn total(&self) -> u64 {
        self.0.iter().sum()
    }
}

impl fmt::Display for DegreeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, d) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{d}")?;
        }
        write!(f, ")")
    }
}

impl From<Vec<u64>> for DegreeVector {
    fn from(entries: Vec<u64>) -> Self {
        DegreeVector(entries)
    }
}

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("a spec needs at least one part")]
    NoParts,
    #[error("atom (part {part}, degree {degree}) has degree length {got}, expected {expected}")]
    DegreeLength {
        part: usize,
        degree: DegreeVector,
        got: usize,
        expected: usize,
    },
    #[error("atom part index {part} out of range for {parts} parts")]
    PartOutOfRange { part: usize, parts: usize },
    #[error("atom (part {part}, degree {degree}) has negative mass {mass}")]
    NegativeMass {
        part: usize,
        degree: DegreeVector,
        mass: String,
    },
    #[error("atom (part {part}, degree {degree}) has non-finite mass")]
    NonFiniteMass { part: usize, degree: DegreeVector },
    #[error("duplicate atom (part {part}, degree {degree})")]
    DuplicateAtom { part: usize, degree: DegreeVector },
}

/// A degree distribution: for each part, probability masses on degree
/// vectors. Masses are exact rationals or floats (see [`Scalar`]).
#[derive(Clone, Debug, PartialEq)]
pub struct DegreeSpec {
    parts: usize,
    atoms: BTreeMap<(usize, DegreeVector), Scalar>,
    lambda: Vec<Vec<Scalar>>,
    pairs: Vec<(usize, usize)>,
}

impl DegreeSpec {
    pub fn new(
        parts: usize,
        atoms: impl IntoIterator<Item = (usize, DegreeVector, Scalar)>,
    ) -> Result<Self, SpecError> {
        if parts == 0 {
            return Err(SpecError::NoParts);
        }
        let mut map = BTreeMap::new();
        for (part, degree, mass) in atoms {
            if part >= parts {
                return Err(SpecError::PartOutOfRange { part, parts });
            }
            if degree.len() != parts {
                return Err(SpecError::DegreeLength {
                    part,
                    got: degree.len(),
                    expected: parts,
                    degree,
                });
            }
            if mass.is_negative() {
                return Err(SpecError::NegativeMass {
                    part,
                    mass: mass.to_string(),
                    degree,
                });
            }
            if let Scalar::Approx(x) = mass {
                if !x.is_finite() {
                    return Err(SpecError::NonFiniteMass { part, degree });
                }
            }
            if map.insert((part, degree.clone()), mass).is_some() {
                return Err(SpecError::DuplicateAtom { part, degree });
            }
        }
        let lambda = edge_intensities(parts, map.iter().map(|((i, d), m)| (*i, d, m)));
        let pairs = positive_pairs(&lambda);
        Ok(DegreeSpec {
            parts,
            atoms: map,
            lambda,
            pairs,
        })
    }

    pub fn parts(&self) -> usize {
        self.parts
    }

    pub fn atoms(&self) -> impl Iterator<Item = (usize, &DegreeVector, &Scalar)> {
        self.atoms.iter().map(|((i, d), m)| (*i, d, m))
    }

    pub fn mass(&self, part: usize, degree: &DegreeVector) -> Option<&Scalar> {
        self.atoms.get(&(part, degree.clone()))
    }

    /// Expected number of part-`j` edge endpoints per part-`i` vertex.
    pub fn lambda(&self, i: usize, j: usize) -> &Scalar {
        &self.lambda[i][j]
    }

    /// Ordered pairs (i, j) with positive edge intensity, sorted
    /// lexicographically. This indexes the mean matrix, the branching-process
    /// type space, and all per-pair counters downstream.
    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn pair_index(&self, i: usize, j: usize) -> Option<usize> {
        self.pairs.binary_search(&(i, j)).ok()
    }

    /// True when every mass is an exact rational.
    pub fn is_exact(&self) -> bool {
        self.atoms.values().all(Scalar::is_exact)
    }

    pub fn total_mass(&self) -> Scalar {
        scalar::sum(self.atoms.values())
    }

    pub fn part_mass(&self, part: usize) -> Scalar {
        scalar::sum(
            self.atoms
                .iter()
                .filter(|((i, _), _)| *i == part)
                .map(|(_, m)| m),
        )
    }

    pub fn validate(&self) -> ValidationReport {
        let mut errors = Vec::new();
        let mut lints = Vec::new();

        let total = self.total_mass();
        let sum_ok = match &total {
            Scalar::Exact(_) => total == Scalar::one(),
            Scalar::Approx(x) => (x - 1.0).abs() <= MASS_TOL,
        };
        if !sum_ok {
            errors.push(SpecIssue::MassSum {
                total: total.to_string(),
            });
        }

        for i in 0..self.parts {
            for j in (i + 1)..self.parts {
                let fwd = &self.lambda[i][j];
                let bwd = &self.lambda[j][i];
                let symmetric = match (fwd, bwd) {
                    (Scalar::Exact(a), Scalar::Exact(b)) => a == b,
                    _ => (fwd.to_f64() - bwd.to_f64()).abs() <= MASS_TOL,
                };
                if !symmetric {
                    errors.push(SpecIssue::LambdaAsymmetry {
                        part_a: i,
                        part_b: j,
                        forward: fwd.to_f64(),
                        backward: bwd.to_f64(),
                    });
                }
            }
        }

        for i in 0..self.parts {
            if !self.pairs.iter().any(|&(a, _)| a == i) {
                errors.push(SpecIssue::IsolatedPart { part: i });
            }
            if self.part_mass(i).is_zero() {
                lints.push(SpecIssue::ZeroMassPart { part: i });
            }
        }

        let (first, second) = self.moments();
        ValidationReport {
            errors,
            lints,
            pairs: self.pairs.clone(),
            n_types: self.pairs.len(),
            lambda: self
                .lambda
                .iter()
                .map(|row| row.iter().map(Scalar::to_f64).collect())
                .collect(),
            first_moment: first,
            second_moment: second,
        }
    }

    /// Per-part first and second moments of the total degree.
    pub fn moments(&self) -> (Vec<f64>, Vec<f64>) {
        let mut first = vec![Scalar::zero(); self.parts];
        let mut second = vec![Scalar::zero(); self.parts];
        for ((i, d), m) in &self.atoms {
            let t = Scalar::from_int(d.total() as i64);
            first[*i] = &first[*i] + &(&t * m);
            second[*i] = &second[*i] + &(&(&t * &t) * m);
        }
        (
            first.iter().map(Scalar::to_f64).collect(),
            second.iter().map(Scalar::to_f64).collect(),
        )
    }

    /// Rounds `n`-vertex counts out of the masses and repairs them to exact
    /// clone-count symmetry.
    pub fn realize(&self, n: u64, policy: RoundingPolicy) -> Result<DegreeSequence, RealizeError> {
        realize_sequence(self, n, policy)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&SpecFile::from(self)).expect("spec serialization")
    }

    pub fn from_json(text: &str) -> Result<Self, ParseError> {
        let file: SpecFile =
            serde_json::from_str(text).map_err(|e| ParseError::Json(e.to_string()))?;
        file.try_into()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ParseError> {
        std::fs::write(path, self.to_json() + "\n").map_err(|e| ParseError::Io(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ParseError> {
        let text = std::fs::read_to_string(path).map_err(|e| ParseError::Io(e.to_string()))?;
        Self::from_json(&text)
    }
}

/// A validation issue. Parts are reported 0-based, as in the API.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "code", rename_all = "snake_case")]
pub enum SpecIssue {
    MassSum {
        total: String,
    },
    LambdaAsymmetry {
        part_a: usize,
        part_b: usize,
        forward: f64,
        backward: f64,
    },
    IsolatedPart {
        part: usize,
    },
    ZeroMassPart {
        part: usize,
    },
}

impl fmt::Display for SpecIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpecIssue::MassSum { total } => write!(f, "masses sum to {total}, expected 1"),
            SpecIssue::LambdaAsymmetry { part_a, part_b, forward, backward } => write!(
                f,
                "edge intensities disagree between parts {part_a} and {part_b}: {forward} vs {backward}"
            ),
            SpecIssue::IsolatedPart { part } => {
                write!(f, "part {part} has no positive edge intensity toward any part")
            }
            SpecIssue::ZeroMassPart { part } => write!(f, "part {part} carries zero mass"),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub errors: Vec<SpecIssue>,
    pub lints: Vec<SpecIssue>,
    /// Ordered pairs with positive edge intensity.
    pub pairs: Vec<(usize, usize)>,
    pub n_types: usize,
    pub lambda: Vec<Vec<f64>>,
    pub first_moment: Vec<f64>,
    pub second_moment: Vec<f64>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.errors.is_empty()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum RoundingPolicy {
    /// Floor every target count, then hand out the leftover units by largest
    /// fractional remainder (ties broken by atom order).
    #[default]
    LargestRemainder,
    /// Floor every target count and keep the deficit.
    Floor,
}

#[derive(Debug, Error)]
pub enum RealizeError {
    #[error("cannot balance clone counts: {0}")]
    RepairInfeasible(String),
}

#[derive(Debug, Error)]
pub enum SequenceError {
    #[error("a sequence needs at least one part")]
    NoParts,
    #[error("atom (part {part}, degree {degree}) has degree length {got}, expected {expected}")]
    DegreeLength {
        part: usize,
        degree: DegreeVector,
        got: usize,
        expected: usize,
    },
    #[error("atom part index {part} out of range for {parts} parts")]
    PartOutOfRange { part: usize, parts: usize },
    #[error("duplicate atom (part {part}, degree {degree})")]
    DuplicateAtom { part: usize, degree: DegreeVector },
    #[error("clone counts between parts {part_a} and {part_b} disagree: {forward} vs {backward}")]
    CloneAsymmetry {
        part_a: usize,
        part_b: usize,
        forward: u64,
        backward: u64,
    },
}

/// An integer degree sequence: how many vertices of each (part, degree
/// vector) type an `n`-vertex graph has. Zero counts are dropped.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DegreeSequence {
    parts: usize,
    counts: BTreeMap<(usize, DegreeVector), u64>,
    n: u64,
}

impl DegreeSequence {
    pub fn new(
        parts: usize,
        counts: impl IntoIterator<Item = (usize, DegreeVector, u64)>,
    ) -> Result<Self, SequenceError> {
        if parts == 0 {
            return Err(SequenceError::NoParts);
        }
        let mut map = BTreeMap::new();
        for (part, degree, count) in counts {
            if part >= parts {
                return Err(SequenceError::PartOutOfRange { part, parts });
            }
            if degree.len() != parts {
                return Err(SequenceError::DegreeLength {
                    part,
                    got: degree.len(),
                    expected: parts,
                    degree,
                });
            }
            if count == 0 {
                continue;
            }
            if map.insert((part, degree.clone()), count).is_some() {
                return Err(SequenceError::DuplicateAtom { part, degree });
            }
        }
        let n = map.values().sum();
        let seq = DegreeSequence {
            parts,
            counts: map,
            n,
        };
        for i in 0..parts {
            for j in (i + 1)..parts {
                let fwd = seq.clone_count(i, j);
                let bwd = seq.clone_count(j, i);
                if fwd != bwd {
                    return Err(SequenceError::CloneAsymmetry {
                        part_a: i,
                        part_b: j,
                        forward: fwd,
                        backward: bwd,
                    });
                }
            }
        }
        Ok(seq)
    }

    pub fn parts(&self) -> usize {
        self.parts
    }

    /// Total vertex count.
    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn counts(&self) -> impl Iterator<Item = (usize, &DegreeVector, u64)> {
        self.counts.iter().map(|((i, d), c)| (*i, d, *c))
    }

    pub fn count(&self, part: usize, degree: &DegreeVector) -> u64 {
        self.counts
            .get(&(part, degree.clone()))
            .copied()
            .unwrap_or(0)
    }

    /// Number of (i, j) clones: edge endpoints in part `i` pointing at part `j`.
    pub fn clone_count(&self, i: usize, j: usize) -> u64 {
        self.counts
            .iter()
            .filter(|((part, _), _)| *part == i)
            .map(|((_, d), c)| d.get(j) * c)
            .sum()
    }

    /// Ordered pairs with at least one clone, sorted lexicographically.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let mut pairs = Vec::new();
        for i in 0..self.parts {
            for j in 0..self.parts {
                if self.clone_count(i, j) > 0 {
                    pairs.push((i, j));
                }
            }
        }
        pairs
    }

    /// Largest total degree present.
    pub fn omega(&self) -> u64 {
        self.counts
            .keys()
            .map(|(_, d)| d.total())
            .max()
            .unwrap_or(0)
    }

    pub fn stats(&self) -> SequenceStats {
        sequence_stats(self)
    }

    /// The empirical degree distribution, with exact rational masses.
    pub fn to_spec(&self) -> DegreeSpec {
        let n = self.n.max(1) as i64;
        DegreeSpec::new(
            self.parts,
            self.counts
                .iter()
                .map(|((i, d), c)| (*i, d.clone(), Scalar::from_ratio(*c as i64, n))),
        )
        .expect("a valid sequence yields a well-formed spec")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&SequenceFile::from(self)).expect("sequence serialization")
    }

    pub fn from_json(text: &str) -> Result<Self, ParseError> {
        let file: SequenceFile =
            serde_json::from_str(text).map_err(|e| ParseError::Json(e.to_string()))?;
        file.try_into()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ParseError> {
        std::fs::write(path, self.to_json() + "\n").map_err(|e| ParseError::Io(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ParseError> {
        let text = std::fs::read_to_string(path).map_err(|e| ParseError::Io(e.to_string()))?;
        Self::from_json(&text)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SequenceStats {
    pub n: u64,
    /// Empirical edge intensities: clone count over n.
    pub lambda: Vec<Vec<f64>>,
    pub first_moment: Vec<f64>,
    pub second_moment: Vec<f64>,
    /// Largest total degree.
    pub omega: u64,
    pub lints: Vec<String>,
}

pub fn sequence_stats(seq: &DegreeSequence) -> SequenceStats {
    let p = seq.parts();
    let n = seq.n();
    let mut lambda = vec![vec![0.0; p]; p];
    let mut first = vec![0.0; p];
    let mut second = vec![0.0; p];
    if n > 0 {
        for (i, d, c) in seq.counts() {
            let w = c as f64 / n as f64;
            for (j, slot) in lambda[i].iter_mut().enumerate() {
                *slot += d.get(j) as f64 * w;
            }
            let t = d.total() as f64;
            first[i] += t * w;
            second[i] += t * t * w;
        }
    }
    let omega = seq.omega();
    let mut lints = Vec::new();
    if omega.saturating_mul(omega) > n {
        lints.push(format!(
            "largest total degree {omega} has omega^2 = {} > n = {n}; asymptotic guarantees degrade",
            omega * omega
        ));
    }
    SequenceStats {
        n,
        lambda,
        first_moment: first,
        second_moment: second,
        omega,
        lints,
    }
}

fn edge_intensities<'a>(
    parts: usize,
    atoms: impl Iterator<Item = (usize, &'a DegreeVector, &'a Scalar)>,
) -> Vec<Vec<Scalar>> {
    let mut lambda = vec![vec![Scalar::zero(); parts]; parts];
    for (i, d, m) in atoms {
        for (j, slot) in lambda[i].iter_mut().enumerate() {
            if d.get(j) > 0 {
                *slot = &*slot + &(&Scalar::from_int(d.get(j) as i64) * m);
            }
        }
    }
    lambda
}

fn positive_pairs(lambda: &[Vec<Scalar>]) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    for (i, row) in lambda.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            if !v.is_zero() {
                pairs.push((i, j));
            }
        }
    }
    pairs
}

fn realize_sequence(
    spec: &DegreeSpec,
    n: u64,
    policy: RoundingPolicy,
) -> Result<DegreeSequence, RealizeError> {
    let atoms: Vec<(usize, DegreeVector, Scalar)> = spec
        .atoms()
        .map(|(i, d, m)| (i, d.clone(), m.clone()))
        .collect();
    let mut counts: Vec<u64> = Vec::with_capacity(atoms.len());
    let mut remainders: Vec<Scalar> = Vec::with_capacity(atoms.len());
    let n_scalar = Scalar::from_int(n as i64);
    for (_, _, mass) in &atoms {
        let target = &n_scalar * mass;
        let floor = match &target {
            Scalar::Exact(r) => r.floor().to_integer().try_into().unwrap_or(0u64),
            Scalar::Approx(x) => x.floor().max(0.0) as u64,
        };
        remainders.push(&target - &Scalar::from_int(floor as i64));
        counts.push(floor);
    }

    if policy == RoundingPolicy::LargestRemainder {
        let assigned: u64 = counts.iter().sum();
        let mut leftover = n as i64 - assigned as i64;
        if leftover > 0 && !atoms.is_empty() {
            // Hand out surplus units by descending remainder, cycling if the
            // masses were badly normalized.
            let mut order: Vec<usize> = (0..atoms.len()).collect();
            order.sort_by(|&a, &b| remainders[b].total_cmp(&remainders[a]).then(a.cmp(&b)));
            let mut k = 0;
            while leftover > 0 {
                counts[order[k % order.len()]] += 1;
                leftover -= 1;
                k += 1;
            }
        } else if leftover < 0 {
            let mut order: Vec<usize> = (0..atoms.len()).collect();
            order.sort_by(|&a, &b| remainders[a].total_cmp(&remainders[b]).then(a.cmp(&b)));
            let mut k = 0;
            while leftover < 0 && counts.iter().any(|&c| c > 0) {
                let idx = order[k % order.len()];
                if counts[idx] > 0 {
                    counts[idx] -= 1;
                    leftover += 1;
                }
                k += 1;
            }
        }
    }

    repair_clone_counts(spec.parts(), &atoms, &mut counts)?;

    let seq = DegreeSequence::new(
        spec.parts(),
        atoms
            .iter()
            .zip(&counts)
            .map(|((i, d, _), c)| (*i, d.clone(), *c)),
    )
    .map_err(|e| RealizeError::RepairInfeasible(e.to_string()))?;
    Ok(seq)
}

/// Deterministic repair: take the first violated balance constraint, close
/// it exactly by adjusting counts of (preferably the two highest-mass) atoms
/// on the deficient side by signed units, and sweep until every cross-part
/// clone count matches its mirror and every within-part clone count is even.
fn repair_clone_counts(
    parts: usize,
    atoms: &[(usize, DegreeVector, Scalar)],
    counts: &mut [u64],
) -> Result<(), RealizeError> {
    let clone_count = |counts: &[u64], i: usize, j: usize| -> u64 {
        atoms
            .iter()
            .zip(counts)
            .filter(|((part, _, _), _)| *part == i)
            .map(|((_, d, _), c)| d.get(j) * *c)
            .sum()
    };

    // Degree an atom carries to parts other than `toward`; adjusting an atom
    // with zero off-target degree leaves every other constraint intact.
    let off_target = |a: usize, toward: usize| -> i64 {
        atoms[a]
            .1
            .entries()
            .iter()
            .enumerate()
            .filter_map(|(m, d)| (m != toward).then_some(*d as i64))
            .sum()
    };

    // Atoms on `side` with positive degree toward `toward`, ranked by
    // off-target degree ascending, then mass descending, then atom order.
    let candidates = |side: usize, toward: usize| -> Vec<usize> {
        let mut c: Vec<usize> = (0..atoms.len())
            .filter(|&a| atoms[a].0 == side && atoms[a].1.get(toward) > 0)
            .collect();
        c.sort_by(|&a, &b| {
            off_target(a, toward)
                .cmp(&off_target(b, toward))
                .then(atoms[b].2.total_cmp(&atoms[a].2))
                .then(a.cmp(&b))
        });
        c
    };

    // A two-atom repair: (cost, atom a, atom b, shift of a, shift of b).
    type Repair = ((i64, i64), usize, usize, i64, i64);

    // Shifts `side`'s clone count toward `toward` by exactly `delta`. The
    // highest-priority atom that can absorb the whole shift does so alone;
    // otherwise a signed combination of two candidates is chosen, minimizing
    // first the disturbance to other balance constraints and then the total
    // adjustment.
    let close = |counts: &mut [u64], side: usize, toward: usize, delta: i64| -> bool {
        let cand = candidates(side, toward);
        for &a in &cand {
            let k = atoms[a].1.get(toward) as i64;
            if delta % k == 0 && counts[a] as i64 + delta / k >= 0 {
                counts[a] = (counts[a] as i64 + delta / k) as u64;
                return true;
            }
        }
        let mut best: Option<Repair> = None;
        for bi in 1..cand.len() {
            for ai in 0..bi {
                let (a, b) = (cand[ai], cand[bi]);
                let ka = atoms[a].1.get(toward) as i64;
                let kb = atoms[b].1.get(toward) as i64;
                let bound = delta.abs() + ka + kb + 2;
                for da in -bound..=bound {
                    if counts[a] as i64 + da < 0 {
                        continue;
                    }
                    let rem = delta - da * ka;
                    if rem % kb != 0 {
                        continue;
                    }
                    let db = rem / kb;
                    if db.abs() > bound || counts[b] as i64 + db < 0 {
                        continue;
                    }
                    let cost = (
                        da.abs() * off_target(a, toward) + db.abs() * off_target(b, toward),
                        da.abs() + db.abs(),
                    );
                    if best.as_ref().is_none_or(|(c, ..)| cost < *c) {
                        best = Some((cost, a, b, da, db));
                    }
                }
            }
        }
        if let Some((_, a, b, da, db)) = best {
            counts[a] = (counts[a] as i64 + da) as u64;
            counts[b] = (counts[b] as i64 + db) as u64;
            return true;
        }
        false
    };

    let total_imbalance = |counts: &[u64]| -> u64 {
        let mut t = 0;
        for i in 0..parts {
            for j in (i + 1)..parts {
                t += clone_count(counts, i, j).abs_diff(clone_count(counts, j, i));
            }
            t += clone_count(counts, i, i) % 2;
        }
        t
    };

    let mut best = total_imbalance(counts);
    let mut stalled = 0;
    let budget = 64 * parts * parts + 64;
    for _ in 0..budget {
        let now = total_imbalance(counts);
        if now < best {
            best = now;
            stalled = 0;
        } else {
            stalled += 1;
            if stalled > 16 {
                return Err(RealizeError::RepairInfeasible(
                    "balance sweep stopped making progress".into(),
                ));
            }
        }

        let mut violation = None;
        'scan: for i in 0..parts {
            for j in (i + 1)..parts {
                let fwd = clone_count(counts, i, j);
                let bwd = clone_count(counts, j, i);
                if fwd != bwd {
                    violation = Some((i, j, fwd, bwd));
                    break 'scan;
                }
            }
            if clone_count(counts, i, i) % 2 == 1 {
                violation = Some((i, i, 0, 0));
                break 'scan;
            }
        }

        let Some((i, j, fwd, bwd)) = violation else {
            return Ok(());
        };

        if i == j {
            // Odd within-part clone count: bump an atom with odd degree
            // toward its own part. One exists, otherwise the count were even.
            let cand = candidates(i, i);
            match cand.iter().find(|&&a| atoms[a].1.get(i) % 2 == 1) {
                Some(&a) => counts[a] += 1,
                None => {
                    return Err(RealizeError::RepairInfeasible(format!(
                        "part {i} has an odd within-part clone count and no odd-degree atom"
                    )))
                }
            }
            continue;
        }

        let (deficient, surplus, toward_d, need) = if fwd < bwd {
            (i, j, j, (bwd - fwd) as i64)
        } else {
            (j, i, i, (fwd - bwd) as i64)
        };
        if close(counts, deficient, toward_d, need) || close(counts, surplus, deficient, -need) {
            continue;
        }
        return Err(RealizeError::RepairInfeasible(format!(
            "no atom combination closes the {need}-clone gap between parts {i} and {j}"
        )));
    }

    Err(RealizeError::RepairInfeasible(
        "balance sweep did not settle within its budget".into(),
    ))
}

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("io error: {0}")]
    Io(String),
    #[error("invalid json: {0}")]
    Json(String),
    #[error("atom {index}: part {part} out of range 1..={parts}")]
    PartOutOfRange {
        index: usize,
        part: usize,
        parts: usize,
    },
    #[error("atom {index} (part {part}, degree {degree}): degree has {got} entries, expected {expected}")]
    DegreeLength {
        index: usize,
        part: usize,
        degree: DegreeVector,
        got: usize,
        expected: usize,
    },
    #[error("atom {index} (part {part}, degree {degree}): negative mass {mass}")]
    NegativeMass {
        index: usize,
        part: usize,
        degree: DegreeVector,
        mass: String,
    },
    #[error("atom {index} (part {part}, degree {degree}): non-finite mass")]
    NonFiniteMass {
        index: usize,
        part: usize,
        degree: DegreeVector,
    },
    #[error("duplicate atom (part {part}, degree {degree})")]
    DuplicateAtom { part: usize, degree: DegreeVector },
    #[error("declared n = {declared} but counts sum to {actual}")]
    TotalMismatch { declared: u64, actual: u64 },
    #[error(transparent)]
    Sequence(#[from] SequenceError),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecFile {
    parts: usize,
    atoms: Vec<SpecFileAtom>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecFileAtom {
    /// 1-based in the file format.
    part: usize,
    degree: Vec<u64>,
    mass: Scalar,
}

impl From<&DegreeSpec> for SpecFile {
    fn from(spec: &DegreeSpec) -> Self {
        SpecFile {
            parts: spec.parts,
            atoms: spec
                .atoms()
                .map(|(i, d, m)| SpecFileAtom {
                    part: i + 1,
                    degree: d.entries().to_vec(),
                    mass: m.clone(),
                })
                .collect(),
        }
    }
}

impl TryFrom<SpecFile> for DegreeSpec {
    type Error = ParseError;

    fn try_from(file: SpecFile) -> Result<Self, ParseError> {
        let mut atoms = Vec::with_capacity(file.atoms.len());
        for (index, atom) in file.atoms.into_iter().enumerate() {
            let degree = DegreeVector::new(atom.degree);
            if atom.part == 0 || atom.part > file.parts {
                return Err(ParseError::PartOutOfRange {
                    index,
                    part: atom.part,
                    parts: file.parts,
                });
            }
            if degree.len() != file.parts {
                return Err(ParseError::DegreeLength {
                    index,
                    part: atom.part,
                    got: degree.len(),
                    expected: file.parts,
                    degree,
                });
            }
            if atom.mass.is_negative() {
                return Err(ParseError::NegativeMass {
                    index,
                    part: atom.part,
                    mass: atom.mass.to_string(),
                    degree,
                });
            }
            if let Scalar::Approx(x) = atom.mass {
                if !x.is_finite() {
                    return Err(ParseError::NonFiniteMass {
                        index,
                        part: atom.part,
                        degree,
                    });
                }
            }
            atoms.push((atom.part - 1, degree, atom.mass));
        }
        DegreeSpec::new(file.parts, atoms).map_err(|e| match e {
            SpecError::DuplicateAtom { part, degree } => ParseError::DuplicateAtom {
                part: part + 1,
                degree,
            },
            other => ParseError::Json(other.to_string()),
        })
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SequenceFile {
    parts: usize,
    n: u64,
    atoms: Vec<SequenceFileAtom>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SequenceFileAtom {
    /// 1-based in the file format.
    part: usize,
    degree: Vec<u64>,
    count: u64,
}

impl From<&DegreeSequence> for SequenceFile {
    fn from(seq: &DegreeSequence) -> Self {
        SequenceFile {
            parts: seq.parts,
            n: seq.n,
            atoms: seq
                .counts()
                .map(|(i, d, c)| SequenceFileAtom {
                    part: i + 1,
                    degree: d.entries().to_vec(),
                    count: c,
                })
                .collect(),
        }
    }
}

impl TryFrom<SequenceFile> for DegreeSequence {
    type Error = ParseError;

    fn try_from(file: SequenceFile) -> Result<Self, ParseError> {
        let mut atoms = Vec::with_capacity(file.atoms.len());
        let mut actual: u64 = 0;
        for (index, atom) in file.atoms.into_iter().enumerate() {
            let degree = DegreeVector::new(atom.degree);
            if atom.part == 0 || atom.part > file.parts {
                return Err(ParseError::PartOutOfRange {
                    index,
                    part: atom.part,
                    parts: file.parts,
                });
            }
            if degree.len() != file.parts {
                return Err(ParseError::DegreeLength {
                    index,
                    part: atom.part,
                    got: degree.len(),
                    expected: file.parts,
                    degree,
                });
            }
            actual += atom.count;
            atoms.push((atom.part - 1, degree, atom.count));
        }
        if actual != file.n {
            return Err(ParseError::TotalMismatch {
                declared: file.n,
                actual,
            });
        }
        let seq = DegreeSequence::new(file.parts, atoms).map_err(|e| match e {
            SequenceError::DuplicateAtom { part, degree } => ParseError::DuplicateAtom {
                part: part + 1,
                degree,
            },
            other => ParseError::Sequence(other),
        })?;
        Ok(seq)
    }
}

/// A one-parameter family of specs: masses interpolate linearly between two
/// endpoints over the same parts. Exact at the endpoints.
#[derive(Clone, Debug)]
pub struct SpecFamily {
    from: DegreeSpec,
    to: DegreeSpec,
}

#[derive(Debug, Error)]
pub enum FamilyError {
    #[error("family endpoints have {0} and {1} parts")]
    PartMismatch(usize, usize),
}

impl SpecFamily {
    pub fn new(from: DegreeSpec, to: DegreeSpec) -> Result<Self, FamilyError> {
        if from.parts() != to.parts() {
            return Err(FamilyError::PartMismatch(from.parts(), to.parts()));
        }
        Ok(SpecFamily { from, to })
    }

    pub fn endpoints(&self) -> (&DegreeSpec, &DegreeSpec) {
        (&self.from, &self.to)
    }

    pub fn interpolate(&self, t: f64) -> DegreeSpec {
        if t == 0.0 {
            return self.from.clone();
        }
        if t == 1.0 {
            return self.to.clone();
        }
        let mut masses: BTreeMap<(usize, DegreeVector), f64> = BTreeMap::new();
        for (i, d, m) in self.from.atoms() {
            *masses.entry((i, d.clone())).or_insert(0.0) += (1.0 - t) * m.to_f64();
        }
        for (i, d, m) in self.to.atoms() {
            *masses.entry((i, d.clone())).or_insert(0.0) += t * m.to_f64();
        }
        DegreeSpec::new(
            self.from.parts(),
            masses
                .into_iter()
                .map(|((i, d), m)| (i, d, Scalar::Approx(m))),
        )
        .expect("interpolation preserves well-formedness")
    }
}
