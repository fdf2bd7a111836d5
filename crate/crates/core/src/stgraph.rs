//! Spatiotemporal mobility graphs.
//!
//! Nodes are (venue, local clock hour) pairs. A directed edge counts how many
//! times some user checked in at its target right after its source, with
//! both check-ins inside the same day window. Days start at a configurable
//! anchor hour (05:00 by default) so late-night activity stays with the
//! evening it belongs to.
//!
//! Centralities follow the usual definitions over hop distances:
//!
//! * degree: distinct incident edges over the graph's maximum,
//! * closeness: outgoing, scaled by the reachable fraction
//!   `(R / (n - 1)) * (R / sum of distances)`,
//! * betweenness: Brandes accumulation over single-source shortest-path DAGs.
//!
//! An inverse-weight distance (`1 / weight`) is available as an alternative
//! path metric.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap, VecDeque};
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use chrono::{DateTime, Duration, FixedOffset, NaiveDate, Timelike};
use serde::{Deserialize, Serialize};

use crate::classify::{UserClass, UserTrack};
use crate::ingest::VenueCatalog;

pub const DEFAULT_DAY_ANCHOR_HOUR: u32 = 5;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct STNode {
    pub venue_id: String,
    pub hour: u8,
}

impl STNode {
    pub fn new(venue_id: impl Into<String>, hour: u8) -> Self {
        assert!(hour < 24, "hour {hour} out of range");
        STNode {
            venue_id: venue_id.into(),
            hour,
        }
    }
}

/// Directed, weighted venue-by-hour graph without isolated vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct MobilityGraph {
    pub city: String,
    pub class: UserClass,
    nodes: Vec<STNode>,
    labels: Vec<String>,
    subcategories: Vec<String>,
    edges: BTreeMap<(usize, usize), u64>,
    out_adj: Vec<Vec<(usize, u64)>>,
}

impl MobilityGraph {
    /// Builds a graph from weighted edges. Repeated edges add their weights;
    /// zero-weight edges are ignored. Nodes are exactly the edge endpoints.
    pub fn from_weighted_edges<I>(city: &str, class: UserClass, edges: I, venues: Option<&VenueCatalog>) -> Self
    where
        I: IntoIterator<Item = (STNode, STNode, u64)>,
    {
        let mut by_node: BTreeMap<(STNode, STNode), u64> = BTreeMap::new();
        for (from, to, w) in edges {
            if w > 0 {
                *by_node.entry((from, to)).or_default() += w;
            }
        }
        let mut index: BTreeMap<&STNode, usize> = BTreeMap::new();
        for (from, to) in by_node.keys() {
            index.insert(from, 0);
            index.insert(to, 0);
        }
        for (i, slot) in index.values_mut().enumerate() {
            *slot = i;
        }
        let nodes: Vec<STNode> = index.keys().map(|n| (*n).clone()).collect();
        let mut edge_map = BTreeMap::new();
        let mut out_adj = vec![Vec::new(); nodes.len()];
        for ((from, to), w) in &by_node {
            let (u, v) = (index[from], index[to]);
            edge_map.insert((u, v), *w);
            out_adj[u].push((v, *w));
        }
        let (labels, subcategories) = nodes
            .iter()
            .map(|n| match venues.and_then(|vs| vs.get(&n.venue_id)) {
                Some(v) => (format!("{}[{}]", v.name, n.hour), v.subcategory.clone()),
                None => (format!("{}[{}]", n.venue_id, n.hour), String::new()),
            })
            .unzip();
        MobilityGraph {
            city: city.to_string(),
            class,
            nodes,
            labels,
            subcategories,
            edges: edge_map,
            out_adj,
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes in (venue id, hour) order; positions are node indices.
    pub fn nodes(&self) -> &[STNode] {
        &self.nodes
    }

    pub fn node_index(&self, node: &STNode) -> Option<usize> {
        self.nodes.binary_search(node).ok()
    }

    /// `name[hour]` display label.
    pub fn label(&self, idx: usize) -> &str {
        &self.labels[idx]
    }

    pub fn subcategory(&self, idx: usize) -> &str {
        &self.subcategories[idx]
    }

    /// `(from, to, weight)` by node index, sorted.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, u64)> + '_ {
        self.edges.iter().map(|(&(u, v), &w)| (u, v, w))
    }

    pub fn weight(&self, from: usize, to: usize) -> Option<u64> {
        self.edges.get(&(from, to)).copied()
    }

    pub fn total_weight(&self) -> u64 {
        self.edges.values().sum()
    }

    pub fn out_neighbors(&self, idx: usize) -> impl Iterator<Item = usize> + '_ {
        self.out_adj[idx].iter().map(|&(v, _)| v)
    }
}

/// Start date of the anchored day window containing `ts`, on its local clock.
pub fn anchored_day(ts: &DateTime<FixedOffset>, anchor_hour: u32) -> NaiveDate {
    (ts.naive_local() - Duration::hours(i64::from(anchor_hour))).date()
}

/// Builds the graph of one slice. Consecutive check-ins of a user become an
/// edge only when both fall in the same anchored day.
pub fn build_graph(
    tracks: &[UserTrack],
    venues: &VenueCatalog,
    city: &str,
    class: UserClass,
    anchor_hour: u32,
) -> MobilityGraph {
    let mut transitions = Vec::new();
    for track in tracks {
        for pair in track.checkins.windows(2) {
            let (a, b) = (&pair[0], &pair[1]);
            if anchored_day(&a.timestamp, anchor_hour) != anchored_day(&b.timestamp, anchor_hour) {
                continue;
            }
            transitions.push((
                STNode::new(a.venue_id.clone(), a.timestamp.hour() as u8),
                STNode::new(b.venue_id.clone(), b.timestamp.hour() as u8),
                1,
            ));
        }
    }
    MobilityGraph::from_weighted_edges(city, class, transitions, Some(venues))
}

/// Edge length used by shortest-path centralities.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathMetric {
    /// Every edge has length 1.
    #[default]
    Hops,
    /// An edge of weight w has length 1/w.
    InverseWeight,
}

impl FromStr for PathMetric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "hops" => Ok(PathMetric::Hops),
            "inverse_weight" => Ok(PathMetric::InverseWeight),
            other => Err(format!("unknown path metric {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CentralityMetric {
    Degree,
    Closeness,
    Betweenness,
}

impl CentralityMetric {
    pub const ALL: [CentralityMetric; 3] = [
        CentralityMetric::Degree,
        CentralityMetric::Closeness,
        CentralityMetric::Betweenness,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CentralityMetric::Degree => "degree",
            CentralityMetric::Closeness => "closeness",
            CentralityMetric::Betweenness => "betweenness",
        }
    }
}

impl fmt::Display for CentralityMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CentralityMetric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CentralityMetric::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| format!("unknown centrality metric {s:?}"))
    }
}

/// Distinct incident edges per node divided by the maximum over the graph.
/// A self-loop is one incident edge.
pub fn degree_centrality(graph: &MobilityGraph) -> Vec<f64> {
    let mut degree = vec![0u64; graph.node_count()];
    for (u, v, _) in graph.edges() {
        degree[u] += 1;
        if u != v {
            degree[v] += 1;
        }
    }
    let max = degree.iter().copied().max().unwrap_or(0);
    if max == 0 {
        return vec![0.0; degree.len()];
    }
    degree.into_iter().map(|d| d as f64 / max as f64).collect()
}

/// Single-source shortest-path DAG.
struct ShortestPaths {
    /// Nodes in non-decreasing distance order.
    order: Vec<usize>,
    dist: Vec<f64>,
    sigma: Vec<f64>,
    preds: Vec<Vec<usize>>,
}

#[derive(PartialEq)]
struct Frontier(f64, usize);

impl Eq for Frontier {}

impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Frontier {
    // Min-heap on distance, then node index.
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

fn same_length(a: f64, b: f64) -> bool {
    a.is_finite() && b.is_finite() && (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
}

fn shortest_paths(graph: &MobilityGraph, source: usize, metric: PathMetric) -> ShortestPaths {
    let n = graph.node_count();
    let mut sp = ShortestPaths {
        order: Vec::with_capacity(n),
        dist: vec![f64::INFINITY; n],
        sigma: vec![0.0; n],
        preds: vec![Vec::new(); n],
    };
    sp.dist[source] = 0.0;
    sp.sigma[source] = 1.0;
    match metric {
        PathMetric::Hops => {
            let mut queue = VecDeque::from([source]);
            while let Some(v) = queue.pop_front() {
                sp.order.push(v);
                for w in graph.out_neighbors(v) {
                    if sp.dist[w].is_infinite() {
                        sp.dist[w] = sp.dist[v] + 1.0;
                        queue.push_back(w);
                    }
                    if sp.dist[w] == sp.dist[v] + 1.0 {
                        sp.sigma[w] += sp.sigma[v];
                        sp.preds[w].push(v);
                    }
                }
            }
        }
        PathMetric::InverseWeight => {
            let mut done = vec![false; n];
            let mut heap = BinaryHeap::from([Frontier(0.0, source)]);
            while let Some(Frontier(d, v)) = heap.pop() {
                if done[v] || d > sp.dist[v] {
                    continue;
                }
                done[v] = true;
                sp.order.push(v);
                for &(w, weight) in &graph.out_adj[v] {
                    if w == v {
                        continue;
                    }
                    let alt = d + 1.0 / weight as f64;
                    if same_length(alt, sp.dist[w]) {
                        if !done[w] {
                            sp.sigma[w] += sp.sigma[v];
                            sp.preds[w].push(v);
                        }
                    } else if alt < sp.dist[w] {
                        sp.dist[w] = alt;
                        sp.sigma[w] = sp.sigma[v];
                        sp.preds[w] = vec![v];
                        heap.push(Frontier(alt, w));
                    }
                }
            }
        }
    }
    sp
}

/// Outgoing closeness scaled by the reachable fraction; 0 when nothing is
/// reachable.
pub fn closeness_centrality(graph: &MobilityGraph, metric: PathMetric) -> Vec<f64> {
    let n = graph.node_count();
    (0..n)
        .map(|s| {
            let sp = shortest_paths(graph, s, metric);
            let reached: Vec<f64> = sp.order.iter().filter(|&&v| v != s).map(|&v| sp.dist[v]).collect();
            let r = reached.len() as f64;
            let total: f64 = reached.iter().sum();
            if reached.is_empty() || total <= 0.0 {
                0.0
            } else {
                (r / (n - 1) as f64) * (r / total)
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Betweenness {
    /// Sum over ordered pairs of the fraction of shortest paths through a node.
    pub raw: Vec<f64>,
    /// `raw / ((n - 1)(n - 2))`; all zero for fewer than three nodes.
    pub normalized: Vec<f64>,
}

pub fn betweenness_centrality(graph: &MobilityGraph, metric: PathMetric) -> Betweenness {
    let n = graph.node_count();
    let mut raw = vec![0.0; n];
    for s in 0..n {
        let sp = shortest_paths(graph, s, metric);
        let mut delta = vec![0.0; n];
        for &w in sp.order.iter().rev() {
            for &v in &sp.preds[w] {
                delta[v] += sp.sigma[v] / sp.sigma[w] * (1.0 + delta[w]);
            }
            if w != s {
                raw[w] += delta[w];
            }
        }
    }
    let normalized = if n > 2 {
        let scale = ((n - 1) * (n - 2)) as f64;
        raw.iter().map(|b| b / scale).collect()
    } else {
        vec![0.0; n]
    };
    Betweenness { raw, normalized }
}

/// Scores of `metric` for every node; betweenness is reported raw.
pub fn centrality_scores(graph: &MobilityGraph, metric: CentralityMetric, path: PathMetric) -> Vec<f64> {
    match metric {
        CentralityMetric::Degree => degree_centrality(graph),
        CentralityMetric::Closeness => closeness_centrality(graph, path),
        CentralityMetric::Betweenness => betweenness_centrality(graph, path).raw,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedNode {
    pub label: String,
    pub subcategory: String,
    pub score: f64,
    pub node: STNode,
}

/// Top-`n` nodes by score, ties by label then node.
pub fn centrality_ranking(graph: &MobilityGraph, scores: &[f64], n: usize) -> Vec<RankedNode> {
    assert_eq!(scores.len(), graph.node_count(), "one score per node");
    let mut order: Vec<usize> = (0..graph.node_count()).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .total_cmp(&scores[a])
            .then_with(|| graph.label(a).cmp(graph.label(b)))
            .then_with(|| graph.nodes[a].cmp(&graph.nodes[b]))
    });
    order
        .into_iter()
        .take(n)
        .map(|i| RankedNode {
            label: graph.label(i).to_string(),
            subcategory: graph.subcategory(i).to_string(),
            score: scores[i],
            node: graph.nodes[i].clone(),
        })
        .collect()
}

/// Edge list: `from_venue,from_hour,to_venue,to_hour,weight`.
pub fn write_edge_list<W: Write>(writer: W, graph: &MobilityGraph) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["from_venue", "from_hour", "to_venue", "to_hour", "weight"])?;
    for (u, v, weight) in graph.edges() {
        let (a, b) = (&graph.nodes[u], &graph.nodes[v]);
        w.write_record([
            a.venue_id.as_str(),
            &a.hour.to_string(),
            &b.venue_id,
            &b.hour.to_string(),
            &weight.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// GraphML export for external visualisation tools.
pub fn write_graphml<W: Write>(mut w: W, graph: &MobilityGraph) -> std::io::Result<()> {
    writeln!(w, r#"<?xml version="1.0" encoding="UTF-8"?>"#)?;
    writeln!(w, r#"<graphml xmlns="http://graphml.graphdrawing.org/xmlns">"#)?;
    writeln!(
        w,
        r#"  <key id="label" for="node" attr.name="label" attr.type="string"/>"#
    )?;
    writeln!(
        w,
        r#"  <key id="venue" for="node" attr.name="venue_id" attr.type="string"/>"#
    )?;
    writeln!(w, r#"  <key id="hour" for="node" attr.name="hour" attr.type="int"/>"#)?;
    writeln!(
        w,
        r#"  <key id="subcategory" for="node" attr.name="subcategory" attr.type="string"/>"#
    )?;
    writeln!(
        w,
        r#"  <key id="weight" for="edge" attr.name="weight" attr.type="long"/>"#
    )?;
    writeln!(
        w,
        r#"  <graph id="{}-{}" edgedefault="directed">"#,
        xml_escape(&graph.city),
        graph.class
    )?;
    for (i, node) in graph.nodes.iter().enumerate() {
        writeln!(w, r#"    <node id="n{i}">"#)?;
        writeln!(w, r#"      <data key="label">{}</data>"#, xml_escape(graph.label(i)))?;
        writeln!(w, r#"      <data key="venue">{}</data>"#, xml_escape(&node.venue_id))?;
        writeln!(w, r#"      <data key="hour">{}</data>"#, node.hour)?;
        writeln!(
            w,
            r#"      <data key="subcategory">{}</data>"#,
            xml_escape(graph.subcategory(i))
        )?;
        writeln!(w, "    </node>")?;
    }
    for (u, v, weight) in graph.edges() {
        writeln!(w, r#"    <edge source="n{u}" target="n{v}">"#)?;
        writeln!(w, r#"      <data key="weight">{weight}</data>"#)?;
        writeln!(w, "    </edge>")?;
    }
    writeln!(w, "  </graph>")?;
    writeln!(w, "</graphml>")?;
    Ok(())
}
