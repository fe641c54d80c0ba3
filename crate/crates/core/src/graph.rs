//! Committed causal graphs and identification queries.
//!
//! A [`CausalGraph`] is a DAG over named variables plus bidirected edges
//! `a <-> b` that stand for a latent common cause of `a` and `b`. All path
//! reasoning runs on the latent-expanded graph, where each bidirected edge
//! becomes a fresh unobserved parent `L -> a`, `L -> b`. Latent parents are
//! never eligible for adjustment or mediator sets.
//!
//! [`identify`] answers whether `E[Y | do(T)]` is identifiable: it searches
//! backdoor adjustment sets first (smallest set, lexicographic tie-break),
//! then frontdoor mediator sets of size one or two.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

/// Largest mediator set tried by the frontdoor search.
pub const MAX_FRONTDOOR_MEDIATORS: usize = 2;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    UnknownEndpoint(String),
    MissingTreatment(String),
    MissingOutcome(String),
    TreatmentIsOutcome,
    SelfLoop(String),
    BidirectedSelfLoop(String),
    DirectedCycle,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::UnknownEndpoint(n) => write!(f, "edge endpoint `{n}` is not a node"),
            Violation::MissingTreatment(n) => write!(f, "treatment `{n}` is not a node"),
            Violation::MissingOutcome(n) => write!(f, "outcome `{n}` is not a node"),
            Violation::TreatmentIsOutcome => write!(f, "treatment and outcome coincide"),
            Violation::SelfLoop(n) => write!(f, "self-loop on `{n}`"),
            Violation::BidirectedSelfLoop(n) => write!(f, "bidirected self-loop on `{n}`"),
            Violation::DirectedCycle => write!(f, "directed cycle"),
        }
    }
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("invalid graph: {0}")]
    Invalid(Violation),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("node `{0}` appears in more than one of the query sets")]
    NotDisjoint(String),
    #[error("relabel fraction {0} is outside [0, 1]")]
    BadFraction(f64),
    #[error("`{0}` is not a parent of both treatment and outcome")]
    NotAConfounder(String),
}

/// Committed causal graph.
///
/// Edge sets are kept sorted, and bidirected pairs are stored with the
/// lexicographically smaller endpoint first, so equality and serialization
/// are canonical.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "GraphJson", from = "GraphJson")]
pub struct CausalGraph {
    nodes: BTreeSet<String>,
    directed: BTreeSet<(String, String)>,
    bidirected: BTreeSet<(String, String)>,
    treatment: String,
    outcome: String,
}

#[derive(Serialize, Deserialize)]
struct GraphJson {
    nodes: Vec<String>,
    directed: Vec<[String; 2]>,
    bidirected: Vec<[String; 2]>,
    treatment: String,
    outcome: String,
}

impl From<CausalGraph> for GraphJson {
    fn from(g: CausalGraph) -> Self {
        GraphJson {
            nodes: g.nodes.into_iter().collect(),
            directed: g.directed.into_iter().map(|(a, b)| [a, b]).collect(),
            bidirected: g.bidirected.into_iter().map(|(a, b)| [a, b]).collect(),
            treatment: g.treatment,
            outcome: g.outcome,
        }
    }
}

impl From<GraphJson> for CausalGraph {
    fn from(j: GraphJson) -> Self {
        let mut g = CausalGraph::new(j.treatment, j.outcome);
        g.nodes.extend(j.nodes);
        for [a, b] in j.directed {
            g.directed.insert((a, b));
        }
        for [a, b] in j.bidirected {
            g.bidirected.insert(ordered(a, b));
        }
        g
    }
}

fn ordered(a: String, b: String) -> (String, String) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

impl CausalGraph {
    /// Graph holding just the treatment and outcome nodes, no edges.
    pub fn new(treatment: impl Into<String>, outcome: impl Into<String>) -> Self {
        let treatment = treatment.into();
        let outcome = outcome.into();
        let mut nodes = BTreeSet::new();
        nodes.insert(treatment.clone());
        nodes.insert(outcome.clone());
        CausalGraph {
            nodes,
            directed: BTreeSet::new(),
            bidirected: BTreeSet::new(),
            treatment,
            outcome,
        }
    }

    pub fn with_node(mut self, name: impl Into<String>) -> Self {
        self.nodes.insert(name.into());
        self
    }

    /// Adds `cause -> effect`, inserting endpoints as nodes.
    pub fn with_edge(mut self, cause: impl Into<String>, effect: impl Into<String>) -> Self {
        let (a, b) = (cause.into(), effect.into());
        self.nodes.insert(a.clone());
        self.nodes.insert(b.clone());
        self.directed.insert((a, b));
        self
    }

    /// Adds `a <-> b`, inserting endpoints as nodes.
    pub fn with_bidirected(mut self, a: impl Into<String>, b: impl Into<String>) -> Self {
        let (a, b) = (a.into(), b.into());
        self.nodes.insert(a.clone());
        self.nodes.insert(b.clone());
        self.bidirected.insert(ordered(a, b));
        self
    }

    /// Adds `name -> treatment` and `name -> outcome`.
    pub fn with_confounder(self, name: &str) -> Self {
        let (t, y) = (self.treatment.clone(), self.outcome.clone());
        self.with_edge(name, t).with_edge(name, y)
    }

    pub fn treatment(&self) -> &str {
        &self.treatment
    }

    pub fn outcome(&self) -> &str {
        &self.outcome
    }

    pub fn nodes(&self) -> impl Iterator<Item = &str> {
        self.nodes.iter().map(String::as_str)
    }

    pub fn contains(&self, node: &str) -> bool {
        self.nodes.contains(node)
    }

    pub fn directed_edges(&self) -> impl Iterator<Item = (&str, &str)> {
        self.directed.iter().map(|(a, b)| (a.as_str(), b.as_str()))
    }

    pub fn bidirected_edges(&self) -> impl Iterator<Item = (&str, &str)> {
        self.bidirected.iter().map(|(a, b)| (a.as_str(), b.as_str()))
    }

    pub fn has_edge(&self, cause: &str, effect: &str) -> bool {
        self.directed.contains(&(cause.to_owned(), effect.to_owned()))
    }

    pub fn has_bidirected(&self, a: &str, b: &str) -> bool {
        self.bidirected.contains(&ordered(a.to_owned(), b.to_owned()))
    }

    pub fn parents(&self, node: &str) -> BTreeSet<&str> {
        self.directed_edges()
            .filter(|(_, b)| *b == node)
            .map(|(a, _)| a)
            .collect()
    }

    /// Observed nodes with edges into both treatment and outcome.
    pub fn observed_confounders(&self) -> Vec<String> {
        let pt = self.parents(&self.treatment);
        let py = self.parents(&self.outcome);
        pt.intersection(&py).map(|s| s.to_string()).collect()
    }

    /// Copy with every bidirected edge dropped (the "resolved" graph used
    /// after a successful experiment).
    pub fn without_bidirected(&self) -> CausalGraph {
        let mut g = self.clone();
        g.bidirected.clear();
        g
    }

    /// Copy with `node` and all incident edges removed.
    pub fn without_node(&self, node: &str) -> CausalGraph {
        let mut g = self.clone();
        g.nodes.remove(node);
        g.directed.retain(|(a, b)| a != node && b != node);
        g.bidirected.retain(|(a, b)| a != node && b != node);
        g
    }

    /// Canonical JSON: sorted nodes and edges, compact separators.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("graph serialization is infallible")
    }

    /// SHA-256 of [`CausalGraph::canonical_json`], lowercase hex.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_json().as_bytes()))
    }
}

/// Returns `Ok(())` iff every structural invariant holds, otherwise the
/// first violation found.
pub fn validate_graph(g: &CausalGraph) -> Result<(), Violation> {
    for (a, b) in g.directed_edges().chain(g.bidirected_edges()) {
        for end in [a, b] {
            if !g.contains(end) {
                return Err(Violation::UnknownEndpoint(end.to_owned()));
            }
        }
    }
    if !g.contains(&g.treatment) {
        return Err(Violation::MissingTreatment(g.treatment.clone()));
    }
    if !g.contains(&g.outcome) {
        return Err(Violation::MissingOutcome(g.outcome.clone()));
    }
    if g.treatment == g.outcome {
        return Err(Violation::TreatmentIsOutcome);
    }
    if let Some((a, _)) = g.directed_edges().find(|(a, b)| a == b) {
        return Err(Violation::SelfLoop(a.to_owned()));
    }
    if let Some((a, _)) = g.bidirected_edges().find(|(a, b)| a == b) {
        return Err(Violation::BidirectedSelfLoop(a.to_owned()));
    }
    let dag = Dag::expand(g);
    if dag.topological_order().is_none() {
        return Err(Violation::DirectedCycle);
    }
    Ok(())
}

/// Index-based latent-expanded view of a graph.
///
/// Observed nodes occupy `0..observed` in sorted name order; each
/// bidirected edge adds one latent node after them.
#[derive(Debug, Clone)]
pub(crate) struct Dag {
    names: Vec<String>,
    observed: usize,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
}

impl Dag {
    pub(crate) fn expand(g: &CausalGraph) -> Dag {
        let mut names: Vec<String> = g.nodes.iter().cloned().collect();
        let observed = names.len();
        let index = |names: &[String], n: &str| names[..observed].binary_search_by(|x| x.as_str().cmp(n)).ok();
        let mut edges = Vec::new();
        for (a, b) in g.directed_edges() {
            if let (Some(i), Some(j)) = (index(&names, a), index(&names, b)) {
                edges.push((i, j));
            }
        }
        for (k, (a, b)) in g.bidirected_edges().enumerate() {
            if let (Some(i), Some(j)) = (index(&names, a), index(&names, b)) {
                let latent = names.len();
                names.push(format!("<latent {k}: {a}<->{b}>"));
                edges.push((latent, i));
                edges.push((latent, j));
            }
        }
        let n = names.len();
        let mut parents = vec![Vec::new(); n];
        let mut children = vec![Vec::new(); n];
        for (a, b) in edges {
            children[a].push(b);
            parents[b].push(a);
        }
        Dag {
            names,
            observed,
            parents,
            children,
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.names.len()
    }

    pub(crate) fn index(&self, name: &str) -> Option<usize> {
        self.names[..self.observed]
            .binary_search_by(|x| x.as_str().cmp(name))
            .ok()
    }

    pub(crate) fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    fn topological_order(&self) -> Option<Vec<usize>> {
        let n = self.len();
        let mut indegree: Vec<usize> = self.parents.iter().map(Vec::len).collect();
        let mut queue: VecDeque<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &c in &self.children[v] {
                indegree[c] -= 1;
                if indegree[c] == 0 {
                    queue.push_back(c);
                }
            }
        }
        (order.len() == n).then_some(order)
    }

    /// Copy with every edge leaving a node in `nodes` removed.
    pub(crate) fn without_outgoing(&self, nodes: &[usize]) -> Dag {
        let mut out = self.clone();
        for &v in nodes {
            for c in std::mem::take(&mut out.children[v]) {
                out.parents[c].retain(|&p| p != v);
            }
        }
        out
    }

    /// Copy with every node in `nodes` (and its edges) removed.
    fn without_nodes(&self, nodes: &[usize]) -> Dag {
        let mut out = self.without_outgoing(nodes);
        for &v in nodes {
            for p in std::mem::take(&mut out.parents[v]) {
                out.children[p].retain(|&c| c != v);
            }
        }
        out
    }

    pub(crate) fn descendants(&self, from: usize) -> Vec<bool> {
        let mut seen = vec![false; self.len()];
        let mut stack = vec![from];
        while let Some(v) = stack.pop() {
            if !seen[v] {
                seen[v] = true;
                stack.extend(&self.children[v]);
            }
        }
        seen
    }

    fn ancestors_of(&self, set: &[usize]) -> Vec<bool> {
        let mut seen = vec![false; self.len()];
        let mut stack: Vec<usize> = set.to_vec();
        while let Some(v) = stack.pop() {
            if !seen[v] {
                seen[v] = true;
                stack.extend(&self.parents[v]);
            }
        }
        seen
    }

    /// Reachability form of d-separation: walks trails from `x` while
    /// tracking whether each node was entered along an edge pointing into
    /// it (from a parent) or out of it (from a child).
    pub(crate) fn d_separated(&self, x: &[usize], y: &[usize], z: &[usize]) -> bool {
        let n = self.len();
        let mut in_z = vec![false; n];
        for &v in z {
            in_z[v] = true;
        }
        let z_ancestors = self.ancestors_of(z);
        let mut in_y = vec![false; n];
        for &v in y {
            in_y[v] = true;
        }
        // visited[v][0]: entered from a child (moving up);
        // visited[v][1]: entered from a parent (moving down).
        let mut visited = vec![[false; 2]; n];
        let mut queue: VecDeque<(usize, usize)> = x.iter().map(|&v| (v, 0)).collect();
        while let Some((v, dir)) = queue.pop_front() {
            if visited[v][dir] {
                continue;
            }
            visited[v][dir] = true;
            if !in_z[v] && in_y[v] {
                return false;
            }
            if dir == 0 {
                if !in_z[v] {
                    queue.extend(self.parents[v].iter().map(|&p| (p, 0)));
                    queue.extend(self.children[v].iter().map(|&c| (c, 1)));
                }
            } else {
                if !in_z[v] {
                    queue.extend(self.children[v].iter().map(|&c| (c, 1)));
                }
                if z_ancestors[v] {
                    queue.extend(self.parents[v].iter().map(|&p| (p, 0)));
                }
            }
        }
        true
    }

    /// Whether any directed path leads from `from` to `to`.
    fn has_directed_path(&self, from: usize, to: usize) -> bool {
        self.descendants(from)[to]
    }
}

fn resolve(dag: &Dag, names: &[&str]) -> Result<Vec<usize>, GraphError> {
    names
        .iter()
        .map(|n| dag.index(n).ok_or_else(|| GraphError::UnknownNode((*n).to_owned())))
        .collect()
}

/// Tests whether `x` and `y` are d-separated given `z` on the
/// latent-expanded graph.
pub fn d_separated(g: &CausalGraph, x: &[&str], y: &[&str], z: &[&str]) -> Result<bool, GraphError> {
    let dag = Dag::expand(g);
    let (xi, yi, zi) = (resolve(&dag, x)?, resolve(&dag, y)?, resolve(&dag, z)?);
    let mut seen = BTreeSet::new();
    for name in x.iter().chain(y).chain(z) {
        if !seen.insert(*name) {
            return Err(GraphError::NotDisjoint((*name).to_owned()));
        }
    }
    Ok(dag.d_separated(&xi, &yi, &zi))
}

/// Outcome of an identification query.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IdStatus {
    Backdoor { adjustment_set: Vec<String> },
    Frontdoor { mediators: Vec<String> },
    NotIdentified,
}

/// Identification status plus a short note naming the criterion that holds
/// (the machine-checkable part of a certificate).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentificationResult {
    pub status: IdStatus,
    pub proof_note: String,
}

impl IdentificationResult {
    pub fn is_identified(&self) -> bool {
        !matches!(self.status, IdStatus::NotIdentified)
    }
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub(crate) fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k <= n {
        go(0, n, k, &mut Vec::with_capacity(k), &mut out);
    }
    out
}

/// Backdoor check on the expanded graph: no member of `set` descends from
/// the treatment, and `set` separates treatment from outcome once the
/// treatment's outgoing edges are cut.
pub(crate) fn satisfies_backdoor(dag: &Dag, t: usize, y: usize, set: &[usize]) -> bool {
    let desc = dag.descendants(t);
    if set.iter().any(|&s| desc[s]) {
        return false;
    }
    dag.without_outgoing(&[t]).d_separated(&[t], &[y], set)
}

/// Frontdoor check: `m` intercepts every directed path from treatment to
/// outcome, no backdoor path from the treatment into `m` is open, and every
/// backdoor path from `m` to the outcome is blocked by the treatment.
pub(crate) fn satisfies_frontdoor(dag: &Dag, t: usize, y: usize, m: &[usize]) -> bool {
    if m.is_empty() || m.contains(&t) || m.contains(&y) {
        return false;
    }
    if dag.without_nodes(m).has_directed_path(t, y) {
        return false;
    }
    if !dag.without_outgoing(&[t]).d_separated(&[t], m, &[]) {
        return false;
    }
    dag.without_outgoing(m).d_separated(m, &[y], &[t])
}

/// Identifies `E[Y | do(T)]`: smallest backdoor set first (lexicographic
/// tie-break), then frontdoor mediator sets up to
/// [`MAX_FRONTDOOR_MEDIATORS`], else not identified.
pub fn identify(g: &CausalGraph) -> Result<IdentificationResult, GraphError> {
    validate_graph(g).map_err(GraphError::Invalid)?;
    let dag = Dag::expand(g);
    let t = dag.index(&g.treatment).expect("validated");
    let y = dag.index(&g.outcome).expect("validated");
    let desc = dag.descendants(t);

    // Observed indices are in sorted name order, so index order is
    // lexicographic order.
    let eligible: Vec<usize> = (0..dag.observed).filter(|&v| v != t && v != y && !desc[v]).collect();
    for k in 0..=eligible.len() {
        for combo in combinations(eligible.len(), k) {
            let set: Vec<usize> = combo.iter().map(|&i| eligible[i]).collect();
            if satisfies_backdoor(&dag, t, y, &set) {
                let names: Vec<String> = set.iter().map(|&v| dag.name(v).to_owned()).collect();
                let proof_note = if names.is_empty() {
                    "backdoor criterion holds with the empty set: no open backdoor path".to_owned()
                } else {
                    format!("backdoor criterion holds on {{{}}}", names.join(", "))
                };
                return Ok(IdentificationResult {
                    status: IdStatus::Backdoor { adjustment_set: names },
                    proof_note,
                });
            }
        }
    }

    let mediators: Vec<usize> = (0..dag.observed).filter(|&v| v != t && v != y).collect();
    for k in 1..=MAX_FRONTDOOR_MEDIATORS.min(mediators.len()) {
        for combo in combinations(mediators.len(), k) {
            let set: Vec<usize> = combo.iter().map(|&i| mediators[i]).collect();
            if satisfies_frontdoor(&dag, t, y, &set) {
                let names: Vec<String> = set.iter().map(|&v| dag.name(v).to_owned()).collect();
                let proof_note = format!("frontdoor criterion holds through {{{}}}", names.join(", "));
                return Ok(IdentificationResult {
                    status: IdStatus::Frontdoor { mediators: names },
                    proof_note,
                });
            }
        }
    }

    Ok(IdentificationResult {
        status: IdStatus::NotIdentified,
        proof_note: "no backdoor set and no frontdoor mediator set blocks the latent paths".to_owned(),
    })
}

/// Simulates graph misspecification: drops `ceil(fraction * count)` of the
/// listed confounders from the committed graph and, if any were dropped,
/// records the now-unblockable confounding as `treatment <-> outcome`.
///
/// The dropped confounders are a prefix of one shuffle of the list, so for
/// a fixed stream the removed sets are nested as `fraction` grows.
pub fn relabel_latent<R: Rng + ?Sized>(
    g: &CausalGraph,
    observed_confounders: &[String],
    fraction: f64,
    rng: &mut R,
) -> Result<CausalGraph, GraphError> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(GraphError::BadFraction(fraction));
    }
    for c in observed_confounders {
        if !g.contains(c) {
            return Err(GraphError::UnknownNode(c.clone()));
        }
        if !g.has_edge(c, &g.treatment) || !g.has_edge(c, &g.outcome) {
            return Err(GraphError::NotAConfounder(c.clone()));
        }
    }
    let count = observed_confounders.len();
    // Guard against 0.1 * 30 = 3.0000000000000004 rounding up.
    let k = ((fraction * count as f64) - 1e-9).ceil().max(0.0) as usize;
    let mut order: Vec<&String> = observed_confounders.iter().collect();
    order.shuffle(rng);
    let mut out = g.clone();
    for c in order.into_iter().take(k) {
        out = out.without_node(c);
    }
    if k > 0 {
        let (t, y) = (g.treatment.clone(), g.outcome.clone());
        out = out.with_bidirected(t, y);
    }
    Ok(out)
}
