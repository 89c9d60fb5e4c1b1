//! Component discovery on a sampled clone graph.
//!
//! The process walks the graph one clone at a time. While active clones
//! exist, one is drawn uniformly, killed, and its matched partner revealed:
//! an active partner closes a back-edge, a sleeping partner wakes its whole
//! vertex into the current component. When no active clones remain the
//! current component is complete and the process restarts from a uniformly
//! drawn sleeping clone. Exhausting all clones ends the walk; vertices with
//! no clones are appended as singleton components.
//!
//! [`ExplorationState`] tracks only the counters that drive the transition
//! law, so the law itself ([`transition_distribution`], [`sample_event`],
//! [`step_delta`]) can be exercised on frozen states without a graph.
//! [`explore_components`] runs the full walk against a concrete
//! [`CloneGraph`], revealing the pre-sampled matching instead of drawing
//! partners on the fly; the two views induce the same step distribution.
//! [`union_find_components`] computes the same census from the edge list
//! alone and serves as an independent oracle.

use std::collections::{BTreeMap, VecDeque};

use rand::Rng;
use thiserror::Error;

use crate::configuration::CloneGraph;
use crate::degree::{DegreeSequence, DegreeVector};
use crate::union_find::UnionFind;

/// Hard cap on retained step records, regardless of the requested capacity.
pub const MAX_STEP_LOG: usize = 1_000_000;

/// Clone-count ceiling below which debug builds recount every counter from
/// raw clone statuses after each step.
const RECOUNT_GATE: usize = 2_048;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ExplorationError {
    #[error("pair ({i}, {j}) is not in the pair set")]
    UnknownPair { i: usize, j: usize },
    #[error("part {part} has no atom with the event's degree vector")]
    UnknownAtom { part: usize },
    #[error("event is not available in the current state: {reason}")]
    IllegalEvent { reason: &'static str },
    #[error("inconsistent state: an active clone of type ({i}, {j}) has no possible partner")]
    NoPartner { i: usize, j: usize },
}

/// One step of the exploration process, classified by what the revealed
/// clone turned out to be.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ExplorationEvent {
    /// An active clone of type `(i, j)` was killed and its partner was
    /// another active clone, of type `(j, i)`.
    BackEdge { i: usize, j: usize },
    /// An active clone of type `(i, j)` was killed and its partner was a
    /// sleeping clone on a part-`j` vertex with the given degree vector,
    /// which woke up.
    Wake {
        i: usize,
        j: usize,
        degree: DegreeVector,
    },
    /// With no active clones left, a sleeping clone of type `(i, j)` on a
    /// part-`i` vertex with the given degree vector was drawn and its whole
    /// vertex woke up. Opens a new component.
    Restart {
        i: usize,
        j: usize,
        degree: DegreeVector,
    },
}

/// Counter view of the exploration process: active clones per type, sleeping
/// vertices per degree class, and the step index. Everything the transition
/// law depends on, nothing tied to a concrete graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExplorationState {
    parts: usize,
    pairs: Vec<(usize, usize)>,
    atoms: Vec<(usize, DegreeVector)>,
    active: Vec<u64>,
    sleeping: Vec<u64>,
    step: u64,
}

impl ExplorationState {
    /// The state before any step: every vertex of the sequence sleeping, no
    /// active clones.
    pub fn initial(seq: &DegreeSequence) -> ExplorationState {
        let mut atoms = Vec::new();
        let mut sleeping = Vec::new();
        for (part, degree, count) in seq.counts() {
            atoms.push((part, degree.clone()));
            sleeping.push(count);
        }
        let pairs = seq.pairs();
        ExplorationState {
            parts: seq.parts(),
            active: vec![0; pairs.len()],
            pairs,
            atoms,
            sleeping,
            step: 0,
        }
    }

    fn from_graph(g: &CloneGraph) -> (ExplorationState, Vec<u32>) {
        let mut classes: BTreeMap<(usize, DegreeVector), u64> = BTreeMap::new();
        for v in 0..g.n() as u32 {
            *classes
                .entry((g.vertex_part(v), g.vertex_degree(v).clone()))
                .or_insert(0) += 1;
        }
        let mut atoms = Vec::with_capacity(classes.len());
        let mut sleeping = Vec::with_capacity(classes.len());
        for ((part, degree), count) in classes {
            atoms.push((part, degree));
            sleeping.push(count);
        }
        let state = ExplorationState {
            parts: g.parts(),
            pairs: g.pairs().to_vec(),
            active: vec![0; g.pairs().len()],
            atoms,
            sleeping,
            step: 0,
        };
        let atom_of_vertex = (0..g.n() as u32)
            .map(|v| {
                state
                    .atom_index(g.vertex_part(v), g.vertex_degree(v))
                    .expect("every vertex class was just tabulated") as u32
            })
            .collect();
        (state, atom_of_vertex)
    }

    pub fn parts(&self) -> usize {
        self.parts
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// Number of steps applied so far.
    pub fn step(&self) -> u64 {
        self.step
    }

    fn pair_index(&self, i: usize, j: usize) -> Option<usize> {
        self.pairs.iter().position(|&p| p == (i, j))
    }

    fn atom_index(&self, part: usize, degree: &DegreeVector) -> Option<usize> {
        self.atoms
            .binary_search_by(|(p, d)| (*p, d).cmp(&(part, degree)))
            .ok()
    }

    /// A_i^j: active clones of type `(i, j)`.
    pub fn active_clones(&self, i: usize, j: usize) -> u64 {
        self.pair_index(i, j).map_or(0, |t| self.active[t])
    }

    /// A: active clones of all types.
    pub fn total_active(&self) -> u64 {
        self.active.iter().sum()
    }

    /// N_i^d: sleeping vertices in `part` with the given degree vector.
    pub fn sleeping_vertices(&self, part: usize, degree: &DegreeVector) -> u64 {
        self.atom_index(part, degree)
            .map_or(0, |a| self.sleeping[a])
    }

    /// N_S: sleeping vertices of every class, zero-degree ones included.
    pub fn total_sleeping_vertices(&self) -> u64 {
        self.sleeping.iter().sum()
    }

    /// Clones of type `(i, j)` still attached to sleeping vertices.
    pub fn sleeping_clones(&self, i: usize, j: usize) -> u64 {
        self.atoms
            .iter()
            .zip(&self.sleeping)
            .filter(|((part, _), _)| *part == i)
            .map(|((_, d), count)| d.get(j) * count)
            .sum()
    }

    /// L_i^j: alive (active or sleeping) clones of type `(i, j)`.
    pub fn alive_clones(&self, i: usize, j: usize) -> u64 {
        self.active_clones(i, j) + self.sleeping_clones(i, j)
    }

    /// L: alive clones of all types.
    pub fn total_alive(&self) -> u64 {
        let sleeping: u64 = self
            .atoms
            .iter()
            .zip(&self.sleeping)
            .map(|((_, d), count)| d.total() * count)
            .sum();
        self.total_active() + sleeping
    }

    /// True once no alive clones remain; sleeping zero-degree vertices do
    /// not keep the process going.
    pub fn is_complete(&self) -> bool {
        self.total_alive() == 0
    }

    /// Advances the counters by one legal event.
    pub fn apply(&mut self, event: &ExplorationEvent) -> Result<(), ExplorationError> {
        let delta = step_delta(self, event)?;
        for (t, dz) in delta.into_iter().enumerate() {
            let next = self.active[t] as i64 + dz;
            debug_assert!(next >= 0);
            self.active[t] = next as u64;
        }
        match event {
            ExplorationEvent::BackEdge { .. } => {}
            ExplorationEvent::Wake { j, degree, .. } => {
                let a = self
                    .atom_index(*j, degree)
                    .expect("validated by step_delta");
                self.sleeping[a] -= 1;
            }
            ExplorationEvent::Restart { i, degree, .. } => {
                let a = self
                    .atom_index(*i, degree)
                    .expect("validated by step_delta");
                self.sleeping[a] -= 1;
            }
        }
        self.step += 1;
        Ok(())
    }
}

/// The change in active clones per type caused by one event, indexed like
/// `state.pairs()`. Killing the drawn clone counts -1 on its own type; a
/// woken vertex contributes its degrees, minus the clone consumed by the
/// revealed edge.
pub fn step_delta(
    state: &ExplorationState,
    event: &ExplorationEvent,
) -> Result<Vec<i64>, ExplorationError> {
    let mut z = vec![0i64; state.pairs.len()];
    match event {
        ExplorationEvent::BackEdge { i, j } => {
            let t = state
                .pair_index(*i, *j)
                .ok_or(ExplorationError::UnknownPair { i: *i, j: *j })?;
            let back = state
                .pair_index(*j, *i)
                .ok_or(ExplorationError::UnknownPair { i: *j, j: *i })?;
            if state.active[t] == 0 {
                return Err(ExplorationError::IllegalEvent {
                    reason: "no active clone of the drawn type",
                });
            }
            let needed = 1 + u64::from(t == back);
            if state.active[back] < needed {
                return Err(ExplorationError::IllegalEvent {
                    reason: "no active partner clone of the reverse type",
                });
            }
            z[t] -= 1;
            z[back] -= 1;
        }
        ExplorationEvent::Wake { i, j, degree } => {
            let t = state
                .pair_index(*i, *j)
                .ok_or(ExplorationError::UnknownPair { i: *i, j: *j })?;
            if state.active[t] == 0 {
                return Err(ExplorationError::IllegalEvent {
                    reason: "no active clone of the drawn type",
                });
            }
            let atom = state
                .atom_index(*j, degree)
                .ok_or(ExplorationError::UnknownAtom { part: *j })?;
            if state.sleeping[atom] == 0 {
                return Err(ExplorationError::IllegalEvent {
                    reason: "no sleeping vertex of the revealed class",
                });
            }
            if degree.get(*i) == 0 {
                return Err(ExplorationError::IllegalEvent {
                    reason: "revealed class has no clone facing the drawn type",
                });
            }
            z[t] -= 1;
            for m in 0..state.parts {
                let born = degree.get(m) as i64 - i64::from(m == *i);
                if degree.get(m) == 0 {
                    continue;
                }
                let tm = state
                    .pair_index(*j, m)
                    .ok_or(ExplorationError::UnknownPair { i: *j, j: m })?;
                z[tm] += born;
            }
        }
        ExplorationEvent::Restart { i, j, degree } => {
            if state.total_active() > 0 {
                return Err(ExplorationError::IllegalEvent {
                    reason: "restart drawn while active clones remain",
                });
            }
            state
                .pair_index(*i, *j)
                .ok_or(ExplorationError::UnknownPair { i: *i, j: *j })?;
            let atom = state
                .atom_index(*i, degree)
                .ok_or(ExplorationError::UnknownAtom { part: *i })?;
            if state.sleeping[atom] == 0 {
                return Err(ExplorationError::IllegalEvent {
                    reason: "no sleeping vertex of the drawn class",
                });
            }
            if degree.get(*j) == 0 {
                return Err(ExplorationError::IllegalEvent {
                    reason: "drawn class has no clone of the drawn type",
                });
            }
            for m in 0..state.parts {
                if degree.get(m) == 0 {
                    continue;
                }
                let tm = state
                    .pair_index(*i, m)
                    .ok_or(ExplorationError::UnknownPair { i: *i, j: m })?;
                z[tm] += degree.get(m) as i64;
            }
        }
    }
    Ok(z)
}

/// The exact one-step law from the given state: every event with positive
/// probability, in a deterministic order (pairs as listed, then vertex
/// classes as listed), with probabilities summing to one. A completed state
/// yields an empty distribution.
///
/// With active clones present, a type `(i, j)` is drawn with probability
/// A_i^j / A and its partner is uniform over the other alive clones of type
/// `(j, i)`: probability (A_j^i - [i = j]) / (L_j^i - [i = j]) of a
/// back-edge, and d_i N_j^d / (L_j^i - [i = j]) of waking a class-d vertex.
/// With none, a sleeping clone is drawn uniformly, so class d of part i
/// wakes through its type-(i, j) clones with probability d_j N_i^d / L.
pub fn transition_distribution(
    state: &ExplorationState,
) -> Result<Vec<(ExplorationEvent, f64)>, ExplorationError> {
    let mut events = Vec::new();
    let a_total = state.total_active();
    if a_total > 0 {
        for (t, &(i, j)) in state.pairs.iter().enumerate() {
            if state.active[t] == 0 {
                continue;
            }
            let pick = state.active[t] as f64 / a_total as f64;
            let loop_hit = u64::from(i == j);
            let denom = state.alive_clones(j, i) - loop_hit;
            if denom == 0 {
                return Err(ExplorationError::NoPartner { i, j });
            }
            let back = state.active_clones(j, i) - loop_hit;
            if back > 0 {
                events.push((
                    ExplorationEvent::BackEdge { i, j },
                    pick * back as f64 / denom as f64,
                ));
            }
            for ((part, degree), &count) in state.atoms.iter().zip(&state.sleeping) {
                if *part != j || count == 0 || degree.get(i) == 0 {
                    continue;
                }
                events.push((
                    ExplorationEvent::Wake {
                        i,
                        j,
                        degree: degree.clone(),
                    },
                    pick * (degree.get(i) * count) as f64 / denom as f64,
                ));
            }
        }
    } else {
        let alive = state.total_alive();
        if alive == 0 {
            return Ok(events);
        }
        for &(i, j) in &state.pairs {
            for ((part, degree), &count) in state.atoms.iter().zip(&state.sleeping) {
                if *part != i || count == 0 || degree.get(j) == 0 {
                    continue;
                }
                events.push((
                    ExplorationEvent::Restart {
                        i,
                        j,
                        degree: degree.clone(),
                    },
                    (degree.get(j) * count) as f64 / alive as f64,
                ));
            }
        }
    }
    Ok(events)
}

/// Draws one event from the same law as [`transition_distribution`], using
/// exact integer weights. Returns `None` once the process is complete.
pub fn sample_event(
    state: &ExplorationState,
    rng: &mut impl Rng,
) -> Result<Option<ExplorationEvent>, ExplorationError> {
    let a_total = state.total_active();
    if a_total > 0 {
        let mut r = rng.random_range(0..a_total);
        let mut drawn = 0;
        for (t, &a) in state.active.iter().enumerate() {
            if r < a {
                drawn = t;
                break;
            }
            r -= a;
        }
        let (i, j) = state.pairs[drawn];
        let loop_hit = u64::from(i == j);
        let denom = state.alive_clones(j, i) - loop_hit;
        if denom == 0 {
            return Err(ExplorationError::NoPartner { i, j });
        }
        let mut r2 = rng.random_range(0..denom);
        let back = state.active_clones(j, i) - loop_hit;
        if r2 < back {
            return Ok(Some(ExplorationEvent::BackEdge { i, j }));
        }
        r2 -= back;
        for ((part, degree), &count) in state.atoms.iter().zip(&state.sleeping) {
            if *part != j || degree.get(i) == 0 {
                continue;
            }
            let weight = degree.get(i) * count;
            if r2 < weight {
                return Ok(Some(ExplorationEvent::Wake {
                    i,
                    j,
                    degree: degree.clone(),
                }));
            }
            r2 -= weight;
        }
        unreachable!("alive clones of type (j, i) account for the whole draw range");
    }
    let alive = state.total_alive();
    if alive == 0 {
        return Ok(None);
    }
    let mut r = rng.random_range(0..alive);
    for &(i, j) in &state.pairs {
        for ((part, degree), &count) in state.atoms.iter().zip(&state.sleeping) {
            if *part != i || degree.get(j) == 0 {
                continue;
            }
            let weight = degree.get(j) * count;
            if r < weight {
                return Ok(Some(ExplorationEvent::Restart {
                    i,
                    j,
                    degree: degree.clone(),
                }));
            }
            r -= weight;
        }
    }
    unreachable!("sleeping clones account for the whole draw range");
}

/// One retained step of a logged exploration run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepRecord {
    /// Step index, starting at zero.
    pub step: u64,
    pub event: ExplorationEvent,
    /// Active-clone change per pair, as returned by [`step_delta`].
    pub delta: Vec<i64>,
}

/// Ring buffer of step records plus whole-run counters. When more steps
/// occur than the capacity holds, the oldest records are dropped.
#[derive(Debug, Clone)]
pub struct StepLog {
    records: VecDeque<StepRecord>,
    capacity: usize,
    dropped: u64,
    edge_steps: u64,
    restart_steps: u64,
}

impl StepLog {
    fn new(capacity: usize) -> StepLog {
        StepLog {
            records: VecDeque::new(),
            capacity: capacity.min(MAX_STEP_LOG),
            dropped: 0,
            edge_steps: 0,
            restart_steps: 0,
        }
    }

    fn push(&mut self, record: StepRecord) {
        match &record.event {
            ExplorationEvent::Restart { .. } => self.restart_steps += 1,
            _ => self.edge_steps += 1,
        }
        if self.capacity == 0 {
            self.dropped += 1;
            return;
        }
        if self.records.len() == self.capacity {
            self.records.pop_front();
            self.dropped += 1;
        }
        self.records.push_back(record);
    }

    /// Retained records, oldest first.
    pub fn records(&self) -> impl Iterator<Item = &StepRecord> {
        self.records.iter()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Records discarded because the buffer was full.
    pub fn dropped(&self) -> u64 {
        self.dropped
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Steps that killed a clone pair (back-edges and wakes together).
    pub fn edge_steps(&self) -> u64 {
        self.edge_steps
    }

    /// Steps that opened a component from a sleeping clone.
    pub fn restart_steps(&self) -> u64 {
        self.restart_steps
    }
}

/// The components of one sampled graph, in canonical order: size descending,
/// then smallest member ascending, members ascending within each component.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentCensus {
    pub n: u64,
    pub components: Vec<Vec<u32>>,
    pub largest_size: u64,
    pub second_size: u64,
    /// Largest component size over n; zero for the empty graph.
    pub largest_fraction: f64,
    /// Vertex count of the largest component within each part.
    pub largest_by_part: Vec<u64>,
}

impl ComponentCensus {
    fn build(g: &CloneGraph, mut components: Vec<Vec<u32>>) -> ComponentCensus {
        for component in &mut components {
            component.sort_unstable();
        }
        components.sort_unstable_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));
        let n = g.n() as u64;
        let largest_size = components.first().map_or(0, |c| c.len() as u64);
        let second_size = components.get(1).map_or(0, |c| c.len() as u64);
        let mut largest_by_part = vec![0u64; g.parts()];
        if let Some(largest) = components.first() {
            for &v in largest {
                largest_by_part[g.vertex_part(v)] += 1;
            }
        }
        ComponentCensus {
            n,
            components,
            largest_size,
            second_size,
            largest_fraction: if n == 0 {
                0.0
            } else {
                largest_size as f64 / n as f64
            },
            largest_by_part,
        }
    }

    pub fn num_components(&self) -> usize {
        self.components.len()
    }
}

enum CloneStatus {
    Sleeping,
    Active,
    Dead,
}

struct Explorer<'g> {
    g: &'g CloneGraph,
    state: ExplorationState,
    atom_of_vertex: Vec<u32>,
    status: Vec<CloneStatus>,
    active_pool: Vec<Vec<u32>>,
    sleeping_pool: Vec<Vec<u32>>,
    pool_pos: Vec<u32>,
    vertex_awake: Vec<bool>,
    current: Vec<u32>,
    components: Vec<Vec<u32>>,
    recount: bool,
}

fn pool_remove(pool: &mut Vec<u32>, pos: &mut [u32], clone: u32) {
    let at = pos[clone as usize] as usize;
    debug_assert_eq!(pool[at], clone);
    pool.swap_remove(at);
    if at < pool.len() {
        pos[pool[at] as usize] = at as u32;
    }
    pos[clone as usize] = u32::MAX;
}

fn pool_push(pool: &mut Vec<u32>, pos: &mut [u32], clone: u32) {
    pos[clone as usize] = pool.len() as u32;
    pool.push(clone);
}

impl<'g> Explorer<'g> {
    fn new(g: &'g CloneGraph) -> Explorer<'g> {
        let (state, atom_of_vertex) = ExplorationState::from_graph(g);
        let total = g.total_clones();
        let mut sleeping_pool = Vec::with_capacity(g.pairs().len());
        let mut pool_pos = vec![u32::MAX; total];
        for t in 0..g.pairs().len() {
            let clones: Vec<u32> = g.pair_clones(t).collect();
            for (at, &c) in clones.iter().enumerate() {
                pool_pos[c as usize] = at as u32;
            }
            sleeping_pool.push(clones);
        }
        Explorer {
            g,
            state,
            atom_of_vertex,
            status: (0..total).map(|_| CloneStatus::Sleeping).collect(),
            active_pool: vec![Vec::new(); g.pairs().len()],
            sleeping_pool,
            pool_pos,
            vertex_awake: vec![false; g.n()],
            current: Vec::new(),
            components: Vec::new(),
            recount: cfg!(debug_assertions) && total <= RECOUNT_GATE,
        }
    }

    /// Moves every clone of `v` still sleeping into the active pools and
    /// adds `v` to the current component. `consumed` is the clone already
    /// killed by the edge that revealed the vertex, if any.
    fn wake_vertex(&mut self, v: u32, consumed: Option<u32>) {
        let g = self.g;
        debug_assert!(!self.vertex_awake[v as usize]);
        self.vertex_awake[v as usize] = true;
        for &c in g.vertex_clones(v) {
            if consumed == Some(c) {
                continue;
            }
            let t = g.clone_pair(c);
            pool_remove(&mut self.sleeping_pool[t], &mut self.pool_pos, c);
            pool_push(&mut self.active_pool[t], &mut self.pool_pos, c);
            self.status[c as usize] = CloneStatus::Active;
        }
        self.current.push(v);
    }

    fn kill_active(&mut self, c: u32) {
        let t = self.g.clone_pair(c);
        pool_remove(&mut self.active_pool[t], &mut self.pool_pos, c);
        self.status[c as usize] = CloneStatus::Dead;
    }

    /// One step with active clones present: kill a uniform active clone,
    /// reveal its pre-matched partner, classify.
    fn edge_step(&mut self, rng: &mut impl Rng) -> (ExplorationEvent, Vec<i64>) {
        let mut r = rng.random_range(0..self.state.total_active());
        let mut t = usize::MAX;
        for (idx, pool) in self.active_pool.iter().enumerate() {
            if r < pool.len() as u64 {
                t = idx;
                break;
            }
            r -= pool.len() as u64;
        }
        let c = self.active_pool[t][r as usize];
        self.kill_active(c);
        let (i, j) = self.g.pairs()[t];
        let partner = self.g.partner(c);
        let event = match self.status[partner as usize] {
            CloneStatus::Active => {
                self.kill_active(partner);
                ExplorationEvent::BackEdge { i, j }
            }
            CloneStatus::Sleeping => {
                let tp = self.g.clone_pair(partner);
                pool_remove(&mut self.sleeping_pool[tp], &mut self.pool_pos, partner);
                self.status[partner as usize] = CloneStatus::Dead;
                let v = self.g.clone_vertex(partner);
                self.wake_vertex(v, Some(partner));
                ExplorationEvent::Wake {
                    i,
                    j,
                    degree: self.g.vertex_degree(v).clone(),
                }
            }
            CloneStatus::Dead => {
                unreachable!("partners die together, so an alive clone's partner is alive")
            }
        };
        let delta = step_delta(&self.state, &event).expect("event was read off a live graph");
        self.state
            .apply(&event)
            .expect("event was read off a live graph");
        (event, delta)
    }

    /// Opens a new component from a uniformly drawn sleeping clone.
    fn restart_step(&mut self, rng: &mut impl Rng) -> (ExplorationEvent, Vec<i64>) {
        let sleeping_total: u64 = self.sleeping_pool.iter().map(|p| p.len() as u64).sum();
        let mut r = rng.random_range(0..sleeping_total);
        let mut t = usize::MAX;
        for (idx, pool) in self.sleeping_pool.iter().enumerate() {
            if r < pool.len() as u64 {
                t = idx;
                break;
            }
            r -= pool.len() as u64;
        }
        let c = self.sleeping_pool[t][r as usize];
        let (i, j) = self.g.pairs()[t];
        let v = self.g.clone_vertex(c);
        self.wake_vertex(v, None);
        let event = ExplorationEvent::Restart {
            i,
            j,
            degree: self.g.vertex_degree(v).clone(),
        };
        let delta = step_delta(&self.state, &event).expect("event was read off a live graph");
        self.state
            .apply(&event)
            .expect("event was read off a live graph");
        (event, delta)
    }

    /// Debug-build audit: recompute every counter from raw statuses.
    fn audit(&self, edge_steps: u64) {
        if !self.recount {
            return;
        }
        for (t, pool) in self.active_pool.iter().enumerate() {
            let (i, j) = self.g.pairs()[t];
            assert_eq!(pool.len() as u64, self.state.active_clones(i, j));
            assert_eq!(
                self.sleeping_pool[t].len() as u64,
                self.state.sleeping_clones(i, j)
            );
        }
        let mut by_atom = vec![0u64; self.state.atoms.len()];
        for v in 0..self.g.n() {
            if !self.vertex_awake[v] {
                by_atom[self.atom_of_vertex[v] as usize] += 1;
            }
        }
        assert_eq!(by_atom, self.state.sleeping);
        let dead = self
            .status
            .iter()
            .filter(|s| matches!(s, CloneStatus::Dead))
            .count() as u64;
        assert_eq!(dead, 2 * edge_steps);
        let statuses = self.status.len() as u64;
        let active: u64 = self.active_pool.iter().map(|p| p.len() as u64).sum();
        let sleeping: u64 = self.sleeping_pool.iter().map(|p| p.len() as u64).sum();
        assert_eq!(active + sleeping + dead, statuses);
    }

    fn run(mut self, rng: &mut impl Rng, log: &mut StepLog) -> ComponentCensus {
        loop {
            let step = self.state.step();
            let (event, delta) = if self.state.total_active() > 0 {
                self.edge_step(rng)
            } else {
                if !self.current.is_empty() {
                    self.components.push(std::mem::take(&mut self.current));
                }
                let sleeping_clones: u64 = self.sleeping_pool.iter().map(|p| p.len() as u64).sum();
                if sleeping_clones == 0 {
                    break;
                }
                self.restart_step(rng)
            };
            log.push(StepRecord { step, event, delta });
            self.audit(log.edge_steps());
        }
        for v in 0..self.g.n() as u32 {
            if !self.vertex_awake[v as usize] {
                self.components.push(vec![v]);
            }
        }
        ComponentCensus::build(self.g, self.components)
    }
}

/// Runs the exploration process over the sampled graph and returns its
/// component census. The matching is already fixed in `g`, so revealing a
/// partner just looks it up; the census is exactly the graph's components.
pub fn explore_components(g: &CloneGraph, rng: &mut impl Rng) -> ComponentCensus {
    let mut log = StepLog::new(0);
    Explorer::new(g).run(rng, &mut log)
}

/// Same walk, also returning up to `capacity` step records (clamped to
/// [`MAX_STEP_LOG`]) and the whole-run step counters.
pub fn explore_components_logged(
    g: &CloneGraph,
    rng: &mut impl Rng,
    capacity: usize,
) -> (ComponentCensus, StepLog) {
    let mut log = StepLog::new(capacity);
    let census = Explorer::new(g).run(rng, &mut log);
    (census, log)
}

/// Independent component census via disjoint-set union over the edge list.
pub fn union_find_components(g: &CloneGraph) -> ComponentCensus {
    let mut dsu = UnionFind::new(g.n());
    for &(u, v) in g.edges() {
        dsu.union(u, v);
    }
    ComponentCensus::build(g, dsu.groups())
}
