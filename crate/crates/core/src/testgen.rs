//! Shared fixtures for unit tests: canonical specs with hand-checked
//! analytics, and a constructor for random valid specs.

use num::BigRational;
use rand::Rng;

use crate::degree::{DegreeSpec, DegreeVector};
use crate::scalar::Scalar;

/// Bipartite spec with a giant component: part 0 mixes degree-1 and degree-3
/// vertices evenly, part 1 is all degree-2.
pub fn supercritical_bipartite() -> DegreeSpec {
    DegreeSpec::new(
        2,
        [
            (0, DegreeVector::new(vec![0, 1]), Scalar::from_ratio(1, 4)),
            (0, DegreeVector::new(vec![0, 3]), Scalar::from_ratio(1, 4)),
            (1, DegreeVector::new(vec![2, 0]), Scalar::from_ratio(1, 2)),
        ],
    )
    .unwrap()
}

/// Bipartite spec below the threshold: same support, mass shifted onto the
/// degree-1 vertices.
pub fn subcritical_bipartite() -> DegreeSpec {
    DegreeSpec::new(
        2,
        [
            (0, DegreeVector::new(vec![0, 1]), Scalar::from_ratio(7, 13)),
            (0, DegreeVector::new(vec![0, 3]), Scalar::from_ratio(1, 13)),
            (1, DegreeVector::new(vec![2, 0]), Scalar::from_ratio(5, 13)),
        ],
    )
    .unwrap()
}

/// Four parts forming two disjoint bipartite blocks; the mean matrix splits
/// into two strongly connected components.
pub fn disjoint_four_part() -> DegreeSpec {
    DegreeSpec::new(
        4,
        [
            (
                0,
                DegreeVector::new(vec![0, 2, 0, 0]),
                Scalar::from_ratio(1, 4),
            ),
            (
                1,
                DegreeVector::new(vec![2, 0, 0, 0]),
                Scalar::from_ratio(1, 4),
            ),
            (
                2,
                DegreeVector::new(vec![0, 0, 0, 2]),
                Scalar::from_ratio(1, 4),
            ),
            (
                3,
                DegreeVector::new(vec![0, 0, 2, 0]),
                Scalar::from_ratio(1, 4),
            ),
        ],
    )
    .unwrap()
}

/// One part, every vertex of degree 1: the graph is a perfect matching.
pub fn unipartite_matching() -> DegreeSpec {
    DegreeSpec::new(1, [(0, DegreeVector::new(vec![1]), Scalar::one())]).unwrap()
}

/// One part, every vertex of degree 2: the graph is a disjoint union of
/// cycles.
pub fn unipartite_cycles() -> DegreeSpec {
    DegreeSpec::new(1, [(0, DegreeVector::new(vec![2]), Scalar::one())]).unwrap()
}

/// Builds a random valid spec: random atoms, then single-entry correction
/// atoms to make the edge intensities symmetric, then an exact global
/// renormalization. All masses are rational, so validity is exact.
pub fn random_valid_spec(rng: &mut impl Rng) -> DegreeSpec {
    let parts = rng.random_range(1..=3usize);
    let mut atoms: Vec<(usize, DegreeVector, BigRational)> = Vec::new();

    let add_mass = |atoms: &mut Vec<(usize, DegreeVector, BigRational)>,
                    part: usize,
                    degree: DegreeVector,
                    mass: BigRational| {
        if let Some(entry) = atoms
            .iter_mut()
            .find(|(p, d, _)| *p == part && *d == degree)
        {
            entry.2 += mass;
        } else {
            atoms.push((part, degree, mass));
        }
    };

    for part in 0..parts {
        for _ in 0..rng.random_range(1..=3usize) {
            let degree =
                DegreeVector::new((0..parts).map(|_| rng.random_range(0..=3u64)).collect());
            let mass = BigRational::new(rng.random_range(1..=8i64).into(), 8.into());
            add_mass(&mut atoms, part, degree, mass);
        }
    }

    // Give every part at least one positive degree so no part is isolated.
    for part in 0..parts {
        let connected = atoms.iter().any(|(p, d, m)| {
            *p == part && d.total() > 0 && m > &BigRational::from_integer(0.into())
        });
        if !connected {
            let other = if parts == 1 { 0 } else { (part + 1) % parts };
            let mut entries = vec![0u64; parts];
            entries[other] = 1;
            add_mass(
                &mut atoms,
                part,
                DegreeVector::new(entries),
                BigRational::new(1.into(), 4.into()),
            );
        }
    }

    // Symmetrize: a degree vector with a single unit entry shifts exactly one
    // intensity, so each unordered pair can be corrected independently.
    let intensity = |atoms: &[(usize, DegreeVector, BigRational)], i: usize, j: usize| {
        atoms
            .iter()
            .filter(|(p, _, _)| *p == i)
            .map(|(_, d, m)| BigRational::from_integer(d.get(j).into()) * m)
            .sum::<BigRational>()
    };
    for i in 0..parts {
        for j in (i + 1)..parts {
            let gap = intensity(&atoms, i, j) - intensity(&atoms, j, i);
            if gap.numer().sign() == num::bigint::Sign::NoSign {
                continue;
            }
            let (part, mass) = if gap > BigRational::from_integer(0.into()) {
                (j, gap)
            } else {
                (i, -gap)
            };
            let toward = if part == i { j } else { i };
            let mut entries = vec![0u64; parts];
            entries[toward] = 1;
            add_mass(&mut atoms, part, DegreeVector::new(entries), mass);
        }
    }

    // Seed every active pair with unit-degree atoms on both sides (added
    // symmetrically, so intensities stay balanced). They keep count repair
    // easy for arbitrary roundings.
    let intensity_pairs: Vec<(usize, usize)> = (0..parts)
        .flat_map(|i| (i..parts).map(move |j| (i, j)))
        .filter(|&(i, j)| {
            let s = intensity(&atoms, i, j) + intensity(&atoms, j, i);
            s.numer().sign() == num::bigint::Sign::Plus
        })
        .collect();
    let unit = |part: usize, toward: usize| {
        let mut entries = vec![0u64; parts];
        entries[toward] = 1;
        (part, DegreeVector::new(entries))
    };
    for (i, j) in intensity_pairs {
        let mass = BigRational::new(1.into(), 16.into());
        let (p, d) = unit(i, j);
        add_mass(&mut atoms, p, d, mass.clone());
        if i != j {
            let (p, d) = unit(j, i);
            add_mass(&mut atoms, p, d, mass);
        }
    }

    let total: BigRational = atoms.iter().map(|(_, _, m)| m.clone()).sum();
    DegreeSpec::new(
        parts,
        atoms
            .into_iter()
            .map(|(p, d, m)| (p, d, Scalar::Exact(m / total.clone()))),
    )
    .expect("generated atoms are well-formed")
}

/// Random valid bipartite spec in two-part form: part 0 atoms point only at
/// part 1 and vice versa. Masses are rational and intensities exactly equal.
pub fn random_valid_bipartite_spec(rng: &mut impl Rng) -> DegreeSpec {
    loop {
        let left: Vec<(u64, BigRational)> = (1..=3u64)
            .filter_map(|j| {
                let w = rng.random_range(0..=4i64);
                (w > 0).then(|| (j, BigRational::from_integer(w.into())))
            })
            .collect();
        let right: Vec<(u64, BigRational)> = (1..=3u64)
            .filter_map(|k| {
                let w = rng.random_range(0..=4i64);
                (w > 0).then(|| (k, BigRational::from_integer(w.into())))
            })
            .collect();
        if left.is_empty() || right.is_empty() {
            continue;
        }
        let e_left: BigRational = left
            .iter()
            .map(|(j, m)| BigRational::from_integer((*j).into()) * m)
            .sum();
        let e_right: BigRational = right
            .iter()
            .map(|(k, m)| BigRational::from_integer((*k).into()) * m)
            .sum();
        // Scale the right masses so both sides emit the same clone mass.
        let scale = e_left / e_right;
        let mut atoms: Vec<(usize, DegreeVector, BigRational)> = Vec::new();
        for (j, m) in left {
            atoms.push((0, DegreeVector::new(vec![0, j]), m));
        }
        for (k, m) in right {
            atoms.push((1, DegreeVector::new(vec![k, 0]), m * scale.clone()));
        }
        let total: BigRational = atoms.iter().map(|(_, _, m)| m.clone()).sum();
        return DegreeSpec::new(
            2,
            atoms
                .into_iter()
                .map(|(p, d, m)| (p, d, Scalar::Exact(m / total.clone()))),
        )
        .expect("generated atoms are well-formed");
    }
}
