//! Configuration-model sampling: vertices get one clone per prescribed edge
//! slot, clones of type (i, j) are matched uniformly with clones of type
//! (j, i), and matched clones become edges. Self-loops and multi-edges are
//! allowed in the raw model; rejection sampling produces uniformly random
//! simple graphs when one exists.

use crate::degree::{DegreeSequence, DegreeVector};
use rand::seq::SliceRandom;
use rand::Rng;
use std::collections::HashSet;
use std::ops::Range;
use thiserror::Error;

/// A sampled multigraph, stored at clone level so the exploration process
/// can reveal the matching one clone at a time. Vertex and clone ids are
/// assigned in a deterministic order, so a seed reproduces a graph exactly.
#[derive(Debug, Clone)]
pub struct CloneGraph {
    parts: usize,
    atoms: Vec<(usize, DegreeVector)>,
    vertex_atom: Vec<u32>,
    pairs: Vec<(usize, usize)>,
    pair_offsets: Vec<usize>,
    clone_vertex: Vec<u32>,
    clone_slot: Vec<u32>,
    vertex_clone_offsets: Vec<usize>,
    vertex_clone_ids: Vec<u32>,
    partner: Vec<u32>,
    edges: Vec<(u32, u32)>,
}

impl CloneGraph {
    pub fn n(&self) -> usize {
        self.vertex_atom.len()
    }

    pub fn parts(&self) -> usize {
        self.parts
    }

    pub fn vertex_part(&self, v: u32) -> usize {
        self.atoms[self.vertex_atom[v as usize] as usize].0
    }

    pub fn vertex_degree(&self, v: u32) -> &DegreeVector {
        &self.atoms[self.vertex_atom[v as usize] as usize].1
    }

    /// Ordered part-pairs with clones, in the same order the degree sequence
    /// reports them.
    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn total_clones(&self) -> usize {
        self.clone_vertex.len()
    }

    /// Clone ids of one ordered pair, a contiguous range.
    pub fn pair_clones(&self, pair_index: usize) -> Range<u32> {
        self.pair_offsets[pair_index] as u32..self.pair_offsets[pair_index + 1] as u32
    }

    pub fn clone_pair(&self, clone: u32) -> usize {
        self.pair_offsets.partition_point(|&o| o <= clone as usize) - 1
    }

    pub fn clone_vertex(&self, clone: u32) -> u32 {
        self.clone_vertex[clone as usize]
    }

    pub fn clone_slot(&self, clone: u32) -> u32 {
        self.clone_slot[clone as usize]
    }

    /// The clone matched with this one; an involution without fixed points.
    pub fn partner(&self, clone: u32) -> u32 {
        self.partner[clone as usize]
    }

    /// All clones owned by one vertex, across its pairs.
    pub fn vertex_clones(&self, v: u32) -> &[u32] {
        let v = v as usize;
        &self.vertex_clone_ids[self.vertex_clone_offsets[v]..self.vertex_clone_offsets[v + 1]]
    }

    /// The edge list, one entry per matched clone pair, endpoints ordered
    /// (smaller id, larger id). Multi-edges appear with their multiplicity.
    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    /// Recomputes each vertex's degree vector from the edge list; equals the
    /// prescription on every sample (a self-loop adds two to its own part).
    pub fn realized_degrees(&self) -> Vec<DegreeVector> {
        let mut realized = vec![vec![0u64; self.parts]; self.n()];
        for &(u, v) in &self.edges {
            realized[u as usize][self.vertex_part(v)] += 1;
            realized[v as usize][self.vertex_part(u)] += 1;
        }
        realized.into_iter().map(DegreeVector::new).collect()
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("clone counts for pair ({i}, {j}) are not symmetric: {forward} vs {backward}")]
    CloneAsymmetry {
        i: usize,
        j: usize,
        forward: u64,
        backward: u64,
    },
    #[error("part {part} has an odd within-part clone count {count}; no perfect matching exists")]
    OddSelfCloneCount { part: usize, count: u64 },
    #[error("no simple graph in {attempts} attempts")]
    MaxAttemptsExceeded { attempts: u32 },
}

/// Samples one configuration-model multigraph: clones are laid out in a
/// deterministic order, then each cross-pair class matches the (j, i) side
/// against the (i, j) side through one shuffle, and each within-part class
/// pairs consecutive entries of a shuffled clone list.
pub fn sample_configuration(
    seq: &DegreeSequence,
    rng: &mut impl Rng,
) -> Result<CloneGraph, ConfigError> {
    let parts = seq.parts();
    let mut atoms: Vec<(usize, DegreeVector)> = Vec::new();
    let mut vertex_atom: Vec<u32> = Vec::new();
    for (part, degree, count) in seq.counts() {
        atoms.push((part, degree.clone()));
        let atom_index = (atoms.len() - 1) as u32;
        vertex_atom.extend(std::iter::repeat_n(atom_index, count as usize));
    }

    let pairs = seq.pairs();
    for &(i, j) in &pairs {
        if i < j {
            let forward = seq.clone_count(i, j);
            let backward = seq.clone_count(j, i);
            if forward != backward {
                return Err(ConfigError::CloneAsymmetry {
                    i,
                    j,
                    forward,
                    backward,
                });
            }
        } else if i == j {
            let count = seq.clone_count(i, i);
            if !count.is_multiple_of(2) {
                return Err(ConfigError::OddSelfCloneCount { part: i, count });
            }
        }
    }

    let mut pair_offsets = vec![0usize];
    let mut clone_vertex: Vec<u32> = Vec::new();
    let mut clone_slot: Vec<u32> = Vec::new();
    for &(i, j) in &pairs {
        for (v, &atom_index) in vertex_atom.iter().enumerate() {
            let (part, ref degree) = atoms[atom_index as usize];
            if part != i {
                continue;
            }
            for slot in 0..degree.get(j) {
                clone_vertex.push(v as u32);
                clone_slot.push(slot as u32);
            }
        }
        pair_offsets.push(clone_vertex.len());
    }

    let total = clone_vertex.len();
    let mut partner = vec![u32::MAX; total];
    let mut edges: Vec<(u32, u32)> = Vec::with_capacity(total / 2);
    for (t, &(i, j)) in pairs.iter().enumerate() {
        let forward: Vec<u32> = (pair_offsets[t] as u32..pair_offsets[t + 1] as u32).collect();
        if i < j {
            let back_pair = pairs
                .iter()
                .position(|&p| p == (j, i))
                .expect("symmetric pair exists");
            let mut backward: Vec<u32> =
                (pair_offsets[back_pair] as u32..pair_offsets[back_pair + 1] as u32).collect();
            backward.shuffle(rng);
            for (&a, &b) in forward.iter().zip(&backward) {
                partner[a as usize] = b;
                partner[b as usize] = a;
                let (u, v) = (clone_vertex[a as usize], clone_vertex[b as usize]);
                edges.push((u.min(v), u.max(v)));
            }
        } else if i == j {
            let mut shuffled = forward;
            shuffled.shuffle(rng);
            for pair in shuffled.chunks_exact(2) {
                let (a, b) = (pair[0], pair[1]);
                partner[a as usize] = b;
                partner[b as usize] = a;
                let (u, v) = (clone_vertex[a as usize], clone_vertex[b as usize]);
                edges.push((u.min(v), u.max(v)));
            }
        }
    }
    debug_assert!(partner.iter().all(|&p| p != u32::MAX));

    let mut vertex_clone_offsets = vec![0usize; vertex_atom.len() + 1];
    for &v in &clone_vertex {
        vertex_clone_offsets[v as usize + 1] += 1;
    }
    for v in 0..vertex_atom.len() {
        vertex_clone_offsets[v + 1] += vertex_clone_offsets[v];
    }
    let mut cursor = vertex_clone_offsets.clone();
    let mut vertex_clone_ids = vec![0u32; total];
    for (clone, &v) in clone_vertex.iter().enumerate() {
        vertex_clone_ids[cursor[v as usize]] = clone as u32;
        cursor[v as usize] += 1;
    }

    Ok(CloneGraph {
        parts,
        atoms,
        vertex_atom,
        pairs,
        pair_offsets,
        clone_vertex,
        clone_slot,
        vertex_clone_offsets,
        vertex_clone_ids,
        partner,
        edges,
    })
}

/// True when the graph has no self-loop and no repeated vertex pair.
pub fn is_simple(graph: &CloneGraph) -> bool {
    let mut seen = HashSet::with_capacity(graph.edges.len());
    for &(u, v) in &graph.edges {
        if u == v || !seen.insert((u, v)) {
            return false;
        }
    }
    true
}

/// A simple graph obtained by rejection, with the number of attempts spent.
#[derive(Debug)]
pub struct SimpleSample {
    pub graph: CloneGraph,
    pub attempts: u32,
}

/// Resamples until the configuration is simple. The accepted graph is
/// uniform among simple graphs with the prescribed degrees.
pub fn sample_simple(
    seq: &DegreeSequence,
    rng: &mut impl Rng,
    max_attempts: u32,
) -> Result<SimpleSample, ConfigError> {
    for attempt in 1..=max_attempts {
        let graph = sample_configuration(seq, rng)?;
        if is_simple(&graph) {
            return Ok(SimpleSample {
                graph,
                attempts: attempt,
            });
        }
    }
    Err(ConfigError::MaxAttemptsExceeded {
        attempts: max_attempts,
    })
}
