//! Term dependency graph and integer level assignment.
//!
//! An edge `(t1, t2)` means `t2` depends on `t1`: the definition of `t2`
//! mentions `t1` as a token after phrase joining. Levels solve
//!
//! ```text
//! min  sum_{(v,w) in E} lambda(w) - lambda(v)
//! s.t. lambda(w) - lambda(v) >= 1   for every edge (v, w)
//! ```
//!
//! The constraint matrix is totally unimodular, so the LP optimum is
//! integral. We solve it exactly: start from the all-ones dual flow and
//! cancel negative cycles in the residual network until none remain, then
//! read the levels off the optimal potentials. Cyclic inputs must first be
//! contracted with [`condense_cycles`].

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::io::{self, BufRead, Write};

use petgraph::algo::{tarjan_scc, toposort};
use petgraph::graph::DiGraph;
use thiserror::Error;

use crate::embedding::{normalize_for_embedding, phrase_join, PhraseLexicon};

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("graph contains a dependency cycle; run condense_cycles first")]
    Cyclic,
    #[error("graph file line {line}: {message}")]
    BadFile { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Directed dependency graph over terms.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConceptGraph {
    terms: Vec<String>,
    ids: BTreeMap<String, usize>,
    /// Edges as (prerequisite, dependent) id pairs.
    edges: BTreeSet<(usize, usize)>,
}

impl ConceptGraph {
    pub fn from_terms<I, S>(terms: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut graph = ConceptGraph::default();
        for term in terms {
            graph.add_term(term.as_ref());
        }
        graph
    }

    pub fn add_term(&mut self, term: &str) -> usize {
        if let Some(&id) = self.ids.get(term) {
            return id;
        }
        let id = self.terms.len();
        self.terms.push(term.to_string());
        self.ids.insert(term.to_string(), id);
        id
    }

    /// Add edge `prerequisite -> dependent`; self-loops are ignored.
    pub fn add_edge(&mut self, prerequisite: &str, dependent: &str) {
        if prerequisite == dependent {
            return;
        }
        let v = self.add_term(prerequisite);
        let w = self.add_term(dependent);
        self.edges.insert((v, w));
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn vertex_count(&self) -> usize {
        self.terms.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn contains_edge(&self, prerequisite: &str, dependent: &str) -> bool {
        match (self.ids.get(prerequisite), self.ids.get(dependent)) {
            (Some(&v), Some(&w)) => self.edges.contains(&(v, w)),
            _ => false,
        }
    }

    /// Edges as term pairs, sorted.
    pub fn edge_terms(&self) -> Vec<(String, String)> {
        let mut pairs: Vec<(String, String)> = self
            .edges
            .iter()
            .map(|&(v, w)| (self.terms[v].clone(), self.terms[w].clone()))
            .collect();
        pairs.sort();
        pairs
    }

    fn petgraph(&self) -> (DiGraph<usize, ()>, Vec<petgraph::graph::NodeIndex>) {
        let mut graph = DiGraph::new();
        let nodes: Vec<_> = (0..self.terms.len()).map(|i| graph.add_node(i)).collect();
        for &(v, w) in &self.edges {
            graph.add_edge(nodes[v], nodes[w], ());
        }
        (graph, nodes)
    }

    pub fn is_acyclic(&self) -> bool {
        let (graph, _) = self.petgraph();
        toposort(&graph, None).is_ok()
    }
}

/// Build the dependency graph from term-definition pairs.
///
/// Definitions are normalized and phrase-joined with the same lexicon as
/// the terms; an edge `t1 -> t2` is added whenever the token of `t1`
/// occurs in the joined definition of `t2`. Returns warnings for
/// multiword terms missing from the lexicon (their occurrences inside
/// definitions cannot be matched).
pub fn build_graph(
    pairs: &[(String, String)],
    lex: &PhraseLexicon,
) -> (ConceptGraph, Vec<String>) {
    let mut graph = ConceptGraph::default();
    let mut warnings = Vec::new();
    let mut seen_pairs = HashSet::new();

    let mut token_of = BTreeMap::new();
    for (term, _) in pairs {
        let normalized = normalize_for_embedding(term);
        let token = PhraseLexicon::token_of(&normalized);
        if normalized.contains(' ') && !lex.contains(&normalized) {
            warnings.push(format!(
                "term {term:?} is not in the phrase lexicon; definition mentions will not match"
            ));
        }
        graph.add_term(&token);
        token_of.insert(term.clone(), token);
    }

    for (term, definition) in pairs {
        if !seen_pairs.insert((term.as_str(), definition.as_str())) {
            continue;
        }
        let dependent = &token_of[term];
        let joined = phrase_join(&normalize_for_embedding(definition), lex);
        let def_tokens: HashSet<&str> = joined.split_whitespace().collect();
        for prerequisite in graph.terms().to_vec() {
            if &prerequisite != dependent && def_tokens.contains(prerequisite.as_str()) {
                graph.add_edge(&prerequisite, dependent);
            }
        }
    }
    (graph, warnings)
}

/// Strongly connected components with two or more vertices, contracted.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ComponentMap {
    /// Component id -> sorted member terms.
    pub members: Vec<Vec<String>>,
    /// Term -> component id.
    pub component_of: BTreeMap<String, usize>,
}

impl ComponentMap {
    /// The representative (lexicographically least member) of a component.
    pub fn representative(&self, id: usize) -> &str {
        &self.members[id][0]
    }
}

/// Contract strongly connected components so the result is acyclic.
///
/// Supernodes take the name of their lexicographically least member.
pub fn condense_cycles(graph: &ConceptGraph) -> (ConceptGraph, ComponentMap) {
    let (pg, nodes) = graph.petgraph();
    let sccs = tarjan_scc(&pg);
    let mut components: Vec<Vec<String>> = sccs
        .iter()
        .map(|component| {
            let mut members: Vec<String> = component
                .iter()
                .map(|&n| graph.terms[pg[n]].clone())
                .collect();
            members.sort();
            members
        })
        .collect();
    components.sort();

    let mut component_of = BTreeMap::new();
    for (id, members) in components.iter().enumerate() {
        for term in members {
            component_of.insert(term.clone(), id);
        }
    }

    let mut condensed = ConceptGraph::default();
    for members in &components {
        condensed.add_term(&members[0]);
    }
    for &(v, w) in &graph.edges {
        let cv = component_of[&graph.terms[v]];
        let cw = component_of[&graph.terms[w]];
        if cv != cw {
            condensed.add_edge(&components[cv][0], &components[cw][0]);
        }
    }
    let _ = nodes;
    (
        condensed,
        ComponentMap {
            members: components,
            component_of,
        },
    )
}

/// An optimal layering.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayeringSolution {
    pub levels: BTreeMap<String, i64>,
    /// `sum over edges of lambda(w) - lambda(v)`.
    pub objective: i64,
    pub level_count: usize,
}

/// Solve the layering program exactly on an acyclic graph.
///
/// Starts from the unit dual flow (one unit per edge, feasible because
/// vertex imbalances equal indegree minus outdegree) and cancels negative
/// residual cycles; the optimal potentials give the levels, normalized so
/// every weakly connected component has minimum level 0.
pub fn assign_levels(graph: &ConceptGraph) -> Result<LayeringSolution, GraphError> {
    if !graph.is_acyclic() {
        return Err(GraphError::Cyclic);
    }
    let n = graph.vertex_count();
    let edges: Vec<(usize, usize)> = graph.edges.iter().copied().collect();
    let mut flow = vec![1i64; edges.len()];

    // Residual arcs: forward (v -> w, cost -1, infinite capacity) and,
    // while flow remains, backward (w -> v, cost +1, capacity flow).
    while let Some(cycle) = find_negative_cycle(n, &edges, &flow) {
        let amount = cycle
            .iter()
            .filter(|&&(_edge, forward)| !forward).map(|&(edge, _forward)| flow[edge])
            .min()
            .expect("a residual cycle on a DAG uses at least one backward arc");
        for &(edge, forward) in &cycle {
            if forward {
                flow[edge] += amount;
            } else {
                flow[edge] -= amount;
            }
        }
    }

    // Potentials via Bellman-Ford over the optimal residual network.
    let mut dist = vec![0i64; n];
    for _ in 0..n {
        let mut changed = false;
        for (idx, &(v, w)) in edges.iter().enumerate() {
            if dist[v] - 1 < dist[w] {
                dist[w] = dist[v] - 1;
                changed = true;
            }
            if flow[idx] > 0 && dist[w] + 1 < dist[v] {
                dist[v] = dist[w] + 1;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let mut levels: Vec<i64> = dist.iter().map(|&d| -d).collect();

    // Normalize each weakly connected component to minimum level 0.
    let component = weak_components(n, &edges);
    let mut min_level: HashMap<usize, i64> = HashMap::new();
    for v in 0..n {
        let entry = min_level.entry(component[v]).or_insert(i64::MAX);
        *entry = (*entry).min(levels[v]);
    }
    for v in 0..n {
        levels[v] -= min_level[&component[v]];
    }

    let objective: i64 = edges.iter().map(|&(v, w)| levels[w] - levels[v]).sum();
    let level_count = levels.iter().max().map_or(0, |&m| m as usize + 1);
    Ok(LayeringSolution {
        levels: graph
            .terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), levels[i]))
            .collect(),
        objective,
        level_count,
    })
}

/// One pass of Bellman-Ford negative-cycle detection over the residual
/// network. Returns the cycle as `(edge index, is_forward)` steps.
fn find_negative_cycle(
    n: usize,
    edges: &[(usize, usize)],
    flow: &[i64],
) -> Option<Vec<(usize, bool)>> {
    if n == 0 {
        return None;
    }
    let mut dist = vec![0i64; n];
    // predecessor arc per vertex: (from, edge index, is_forward)
    let mut pred: Vec<Option<(usize, usize, bool)>> = vec![None; n];
    let mut last_relaxed = None;
    for round in 0..n {
        let mut changed = false;
        for (idx, &(v, w)) in edges.iter().enumerate() {
            if dist[v] - 1 < dist[w] {
                dist[w] = dist[v] - 1;
                pred[w] = Some((v, idx, true));
                changed = true;
                last_relaxed = Some(w);
            }
            if flow[idx] > 0 && dist[w] + 1 < dist[v] {
                dist[v] = dist[w] + 1;
                pred[v] = Some((w, idx, false));
                changed = true;
                last_relaxed = Some(v);
            }
        }
        if !changed {
            return None;
        }
        if round == n - 1 {
            break;
        }
    }
    // A relaxation in round n means a negative cycle; walk predecessors
    // n steps to land inside it, then trace until the start repeats.
    let mut vertex = last_relaxed?;
    for _ in 0..n {
        vertex = pred[vertex]?.0;
    }
    let start = vertex;
    let mut cycle = Vec::new();
    loop {
        let (from, edge, forward) = pred[vertex]?;
        cycle.push((edge, forward));
        vertex = from;
        if vertex == start {
            break;
        }
    }
    Some(cycle)
}

fn weak_components(n: usize, edges: &[(usize, usize)]) -> Vec<usize> {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut v: usize) -> usize {
        while parent[v] != v {
            parent[v] = parent[parent[v]];
            v = parent[v];
        }
        v
    }
    for &(v, w) in edges {
        let rv = find(&mut parent, v);
        let rw = find(&mut parent, w);
        if rv != rw {
            parent[rv] = rw;
        }
    }
    let mut roots: Vec<usize> = (0..n).map(|v| find(&mut parent, v)).collect();
    let mut relabel: HashMap<usize, usize> = HashMap::new();
    for root in roots.iter_mut() {
        let next = relabel.len();
        *root = *relabel.entry(*root).or_insert(next);
    }
    roots
}

/// Write the edge list: header then `t1<TAB>t2` lines, sorted.
pub fn write_edges<W: Write>(mut w: W, graph: &ConceptGraph) -> io::Result<()> {
    writeln!(w, "t1\tt2")?;
    for (v, wterm) in graph.edge_terms() {
        writeln!(w, "{v}\t{wterm}")?;
    }
    Ok(())
}

/// Write per-term levels: header then `term<TAB>level<TAB>component_id`
/// lines, sorted by term. Levels are those of the term's supernode.
pub fn write_levels<W: Write>(
    mut w: W,
    solution: &LayeringSolution,
    components: &ComponentMap,
) -> io::Result<()> {
    writeln!(w, "term\tlevel\tcomponent_id")?;
    for (term, &component_id) in &components.component_of {
        let level = solution.levels[components.representative(component_id)];
        writeln!(w, "{term}\t{level}\t{component_id}")?;
    }
    Ok(())
}

/// Parse an edge-list file written by [`write_edges`].
pub fn read_edges<R: BufRead>(r: R) -> Result<Vec<(String, String)>, GraphError> {
    let mut pairs = Vec::new();
    for (lineno, line) in r.lines().enumerate() {
        let line = line?;
        if lineno == 0 {
            if line != "t1\tt2" {
                return Err(GraphError::BadFile {
                    line: 1,
                    message: format!("bad header {line:?}"),
                });
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let (a, b) = line.split_once('\t').ok_or_else(|| GraphError::BadFile {
            line: lineno + 1,
            message: "expected t1<TAB>t2".into(),
        })?;
        pairs.push((a.to_string(), b.to_string()));
    }
    Ok(pairs)
}

/// Parse a level file written by [`write_levels`]: term -> (level, component).
pub fn read_levels<R: BufRead>(r: R) -> Result<BTreeMap<String, (i64, usize)>, GraphError> {
    let mut levels = BTreeMap::new();
    for (lineno, line) in r.lines().enumerate() {
        let line = line?;
        if lineno == 0 {
            if line != "term\tlevel\tcomponent_id" {
                return Err(GraphError::BadFile {
                    line: 1,
                    message: format!("bad header {line:?}"),
                });
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split('\t').collect();
        if parts.len() != 3 {
            return Err(GraphError::BadFile {
                line: lineno + 1,
                message: "expected term<TAB>level<TAB>component_id".into(),
            });
        }
        let level: i64 = parts[1].parse().map_err(|_| GraphError::BadFile {
            line: lineno + 1,
            message: format!("bad level {:?}", parts[1]),
        })?;
        let component: usize = parts[2].parse().map_err(|_| GraphError::BadFile {
            line: lineno + 1,
            message: format!("bad component id {:?}", parts[2]),
        })?;
        levels.insert(parts[0].to_string(), (level, component));
    }
    Ok(levels)
}
