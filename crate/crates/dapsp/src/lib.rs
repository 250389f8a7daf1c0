//! Decremental all-pairs shortest paths for directed unweighted graphs.
//!
//! Edges are deleted one at a time; distances only grow. Three structures
//! answer distance queries under that regime:
//!
//! * [`exact::ExactApsp`] keeps every distance exact.
//! * [`approx::DetApsp`] keeps a deterministic (1+eps) estimate.
//! * [`randomized::RandApsp`] keeps a (1+eps) estimate using sampling, with
//!   correctness on every seed (the seed only affects work, not answers).
//!
//! All three share the same building blocks: bounded-depth shortest-path
//! trees ([`es_tree`]), vertex separators grown from thin BFS layers
//! ([`separator`]), and a ladder of geometric distance scales ([`scales`]).
//! Brute-force reference oracles live in [`oracle`]; every nontrivial
//! component is tested against them.

pub mod approx;
pub mod es_tree;
pub mod exact;
pub mod graph;
mod levels;
pub mod oracle;
pub mod randomized;
pub mod sampler;
pub mod scales;
pub mod separator;
pub mod two_hop;

use std::fmt;

/// Distance value. Unreachable pairs carry [`INF`].
pub type Dist = u64;

/// Marker for unreachable pairs. Arithmetic must saturate into it, never
/// wrap past it.
pub const INF: Dist = u64::MAX;

/// Dense vertex identifier, valid in `0..n` for its graph.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(pub u32);

impl VertexId {
    #[inline]
    pub fn idx(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Debug for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// One pair's distance moving. `old < new` always; `new` may be [`INF`].
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct DistChange {
    pub u: VertexId,
    pub v: VertexId,
    pub old: Dist,
    pub new: Dist,
}

#[derive(thiserror::Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("vertex {0} out of range (n = {1})")]
    VertexOutOfRange(u32, u32),
    #[error("self loop at vertex {0}")]
    SelfLoop(u32),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(u32, u32),
    #[error("edge ({0}, {1}) not present")]
    EdgeAbsent(u32, u32),
    #[error("structure clock {structure} cannot accept graph clock {graph}")]
    ClockSkew { structure: u64, graph: u64 },
    #[error("separator needs depth >= 34, got {0}")]
    WindowTooNarrow(u64),
    #[error("thin layer search exhausted its window")]
    ThinLayerNotFound,
    #[error("both separator searches exhausted (unseparable trigger)")]
    SearchExhausted,
    #[error("query reached a separated pair the caller promised was cut off")]
    OracleContractViolation,
    #[error("eps must lie in (0, 1/3], got {0}")]
    EpsilonOutOfRange(f64),
    #[error("probability must lie in (0, 1], got {0}")]
    ProbabilityOutOfRange(f64),
    #[error("{0}")]
    BadParams(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Work counters, all deterministic (no wall-clock anywhere).
///
/// These feed the CLI metrics output and the complexity regression tests,
/// so every one of them must count the same on every run of the same input.
#[derive(Clone, Copy, Default, Debug, PartialEq, Eq)]
pub struct Counters {
    /// Edge scan steps inside bounded-depth tree maintenance.
    pub es_scan_steps: u64,
    /// Heap pushes plus key bumps across all two-hop queues.
    pub queue_ops: u64,
    /// Budget units spent by separator searches.
    pub sep_budget_units: u64,
    /// Vertices added to separators.
    pub sep_members_added: u64,
    /// Trigger events processed by separators.
    pub sep_triggers: u64,
    /// Edges traversed by in-tree construction in the randomized structure.
    pub in_tree_edges: u64,
    /// Distance-matrix entries that changed value.
    pub matrix_changes: u64,
}

impl Counters {
    pub fn absorb(&mut self, other: &Counters) {
        self.es_scan_steps += other.es_scan_steps;
        self.queue_ops += other.queue_ops;
        self.sep_budget_units += other.sep_budget_units;
        self.sep_members_added += other.sep_members_added;
        self.sep_triggers += other.sep_triggers;
        self.in_tree_edges += other.in_tree_edges;
        self.matrix_changes += other.matrix_changes;
    }
}

/// Common face of the three shortest-path structures (and the baseline).
///
/// `delete` reports every pair whose answer moved, sorted by `(u, v)`.
/// Implementations must keep answers monotone: once a pair's value grows it
/// never shrinks, and [`INF`] is absorbing.
pub trait ApspStructure {
    fn name(&self) -> &'static str;

    fn n(&self) -> u32;

    /// The graph as the structure currently sees it.
    fn graph(&self) -> &graph::DecrementalGraph;

    /// Current answer for the ordered pair `(u, v)`.
    fn query(&self, u: VertexId, v: VertexId) -> Dist;

    /// Delete edge `(u, v)` and restore all invariants.
    fn delete(&mut self, u: VertexId, v: VertexId) -> Result<Vec<DistChange>>;

    /// Whether `report_path` can return anything.
    fn supports_paths(&self) -> bool {
        false
    }

    /// A concrete path realizing (for exact) or certifying (for approximate)
    /// the current answer, as a vertex sequence from `u` to `v`.
    fn report_path(&self, _u: VertexId, _v: VertexId) -> Option<Vec<VertexId>> {
        None
    }

    fn counters(&self) -> Counters;
}

/// Saturating add that treats [`INF`] as absorbing.
#[inline]
pub fn dist_add(a: Dist, b: Dist) -> Dist {
    a.saturating_add(b)
}
