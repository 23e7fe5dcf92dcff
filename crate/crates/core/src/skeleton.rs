//! The abstract tropical curve of a good fundamental domain as a marked
//! metric graph, its cycle pairing, and JSON/DOT export.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_rational::Rational64;
use num_traits::Zero;
use serde_json::{json, Value};
use thiserror::Error;

use crate::berkovich::{span_tree, BerkPoint};
use crate::domain::GoodDomain;
use crate::padic::PadicError;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SkeletonError {
    #[error(transparent)]
    Padic(#[from] PadicError),
    #[error("point P{0} missing from the spanned tree")]
    MissingPoint(usize),
    #[error("P{0} and P{0}' coincide")]
    Degenerate(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphEdge {
    pub u: usize,
    pub v: usize,
    pub length: Rational64,
}

/// A step of a closed walk: edge index and whether it is traversed `u → v`.
pub type Step = (usize, bool);

/// Metric graph with a marking by `g` oriented closed walks `s_1..s_g`.
#[derive(Clone, Debug)]
pub struct MarkedGraph {
    /// A type-2 point representing each vertex.
    pub vertices: Vec<BerkPoint>,
    pub edges: Vec<GraphEdge>,
    pub loops: Vec<Vec<Step>>,
}

impl MarkedGraph {
    pub fn genus(&self) -> usize {
        self.loops.len()
    }

    /// First Betti number `|E| − |V| + 1` (the graph is connected).
    pub fn betti(&self) -> usize {
        self.edges.len() + 1 - self.vertices.len()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges
            .iter()
            .map(|e| (e.u == v) as usize + (e.v == v) as usize)
            .sum()
    }

    /// Signed number of traversals of each edge by loop `i`.
    pub fn loop_counts(&self, i: usize) -> Vec<i64> {
        let mut c = vec![0i64; self.edges.len()];
        for &(e, fwd) in &self.loops[i] {
            c[e] += if fwd { 1 } else { -1 };
        }
        c
    }

    pub fn loop_length(&self, i: usize) -> Rational64 {
        self.loops[i].iter().map(|&(e, _)| self.edges[e].length).sum()
    }

    /// Each loop is a closed walk.
    pub fn loops_closed(&self) -> bool {
        self.loops.iter().all(|walk| {
            let ends = |&(e, fwd): &Step| {
                let ed = &self.edges[e];
                if fwd {
                    (ed.u, ed.v)
                } else {
                    (ed.v, ed.u)
                }
            };
            let n = walk.len();
            n > 0 && (0..n).all(|k| ends(&walk[k]).1 == ends(&walk[(k + 1) % n]).0)
        })
    }

    /// Reverse the orientation of loop `i`.
    pub fn reverse_loop(&mut self, i: usize) {
        let walk = &mut self.loops[i];
        walk.reverse();
        for s in walk.iter_mut() {
            s.1 = !s.1;
        }
    }
}

fn find(rep: &mut [usize], v: usize) -> usize {
    let mut r = v;
    while rep[r] != r {
        r = rep[r];
    }
    rep[v] = r;
    r
}

/// Tree path from `a` to `b` as steps over tree edges `child → parent`
/// (edge `k` joins `child_k` to its parent; forward means child to parent).
fn tree_path(parent: &[Option<usize>], edge_of: &[Option<usize>], a: usize, b: usize) -> Vec<Step> {
    let ancestors = |mut v: usize| {
        let mut out = vec![v];
        while let Some(p) = parent[v] {
            out.push(p);
            v = p;
        }
        out
    };
    let up_a = ancestors(a);
    let up_b = ancestors(b);
    let lca = *up_a.iter().find(|v| up_b.contains(v)).expect("tree is connected");
    let mut steps = Vec::new();
    for &v in up_a.iter().take_while(|&&v| v != lca) {
        steps.push((edge_of[v].unwrap(), true));
    }
    let down: Vec<usize> = up_b.iter().copied().take_while(|&v| v != lca).collect();
    for &v in down.iter().rev() {
        steps.push((edge_of[v].unwrap(), false));
    }
    steps
}

/// Span the tree on `P_1..P_g, P_1'..P_g'`, identify `P_i'` with `P_i`,
/// and suppress vertices of degree two. `s_i` runs from `P_i'` to `P_i`.
pub fn tropical_curve(dom: &GoodDomain) -> Result<MarkedGraph, SkeletonError> {
    let g = dom.g();
    let pts = dom.points()?;
    let tree = span_tree(&pts);
    let mut ids = Vec::with_capacity(2 * g);
    for (k, pt) in pts.iter().enumerate() {
        ids.push(tree.find(pt).ok_or(SkeletonError::MissingPoint(k % g + 1))?);
    }
    for i in 0..g {
        if ids[i] == ids[g + i] {
            return Err(SkeletonError::Degenerate(i + 1));
        }
    }

    // Tree edges indexed by child vertex; segment k is (child, parent).
    let n = tree.len();
    let mut seg: Vec<(usize, usize, Rational64)> = Vec::new();
    let mut edge_of = vec![None; n];
    for v in 0..n {
        if let Some(u) = tree.parent[v] {
            edge_of[v] = Some(seg.len());
            seg.push((v, u, tree.vertices[v].q() - tree.vertices[u].q()));
        }
    }
    let raw_loops: Vec<Vec<Step>> = (0..g)
        .map(|i| tree_path(&tree.parent, &edge_of, ids[g + i], ids[i]))
        .collect();

    let mut rep: Vec<usize> = (0..n).collect();
    for i in 0..g {
        let a = find(&mut rep, ids[i]);
        let b = find(&mut rep, ids[g + i]);
        if a != b {
            let (lo, hi) = (a.min(b), a.max(b));
            rep[hi] = lo;
        }
    }
    let glued: Vec<(usize, usize, Rational64)> = seg
        .iter()
        .map(|&(a, b, l)| (find(&mut rep, a), find(&mut rep, b), l))
        .collect();

    let mut incident: BTreeMap<usize, Vec<(usize, bool)>> = BTreeMap::new();
    for (k, &(a, b, _)) in glued.iter().enumerate() {
        incident.entry(a).or_default().push((k, true));
        incident.entry(b).or_default().push((k, false));
    }
    let mut kept: Vec<usize> = incident
        .iter()
        .filter(|(_, inc)| inc.len() != 2)
        .map(|(&v, _)| v)
        .collect();
    if kept.is_empty() {
        kept.push(*incident.keys().next().expect("nonempty graph"));
    }
    let vidx: BTreeMap<usize, usize> = kept.iter().enumerate().map(|(i, &v)| (v, i)).collect();

    // Walk chains of segments between kept vertices.
    let mut seg_map: Vec<Option<(usize, bool)>> = vec![None; glued.len()];
    let mut edges = Vec::new();
    for &start in &kept {
        for &(k0, out0) in &incident[&start] {
            if seg_map[k0].is_some() {
                continue;
            }
            let e = edges.len();
            let mut length = Rational64::zero();
            let (mut k, mut out) = (k0, out0);
            let end = loop {
                seg_map[k] = Some((e, out));
                length += glued[k].2;
                let next = if out { glued[k].1 } else { glued[k].0 };
                if vidx.contains_key(&next) {
                    break next;
                }
                let &(k2, out2) = incident[&next]
                    .iter()
                    .find(|&&(k2, o2)| !(k2 == k && o2 != out))
                    .expect("degree two");
                k = k2;
                out = out2;
            };
            edges.push(GraphEdge {
                u: vidx[&start],
                v: vidx[&end],
                length,
            });
        }
    }

    let loops = raw_loops
        .iter()
        .map(|walk| {
            let mut out: Vec<Step> = Vec::new();
            let mut last_seg: Option<usize> = None;
            for &(k, fwd) in walk {
                let (e, o) = seg_map[k].expect("all segments mapped");
                let step = (e, fwd == o);
                let continues = last_seg.is_some_and(|_| out.last() == Some(&step));
                if !continues {
                    out.push(step);
                }
                last_seg = Some(k);
            }
            if out.len() > 1 && out.first() == out.last() {
                out.pop();
            }
            out
        })
        .collect();

    Ok(MarkedGraph {
        vertices: kept.iter().map(|&v| tree.vertices[v].clone()).collect(),
        edges,
        loops,
    })
}

/// `⟨s_i, s_j⟩ = Σ_e ℓ(e)·c_i(e)·c_j(e)` with signed traversal counts.
pub fn pairing(graph: &MarkedGraph) -> Vec<Vec<Rational64>> {
    let counts: Vec<Vec<i64>> = (0..graph.genus()).map(|i| graph.loop_counts(i)).collect();
    counts
        .iter()
        .map(|ci| {
            counts
                .iter()
                .map(|cj| {
                    graph
                        .edges
                        .iter()
                        .enumerate()
                        .map(|(e, ed)| ed.length * Rational64::from_integer(ci[e] * cj[e]))
                        .sum()
                })
                .collect()
        })
        .collect()
}

/// Isomorphism of marked metric graphs: a vertex bijection and an edge
/// bijection (with orientation flips) preserving incidence, lengths and
/// the signed traversal counts of every loop.
pub fn marked_isomorphic(a: &MarkedGraph, b: &MarkedGraph) -> bool {
    if a.vertices.len() != b.vertices.len()
        || a.edges.len() != b.edges.len()
        || a.genus() != b.genus()
    {
        return false;
    }
    let ca: Vec<Vec<i64>> = (0..a.genus()).map(|i| a.loop_counts(i)).collect();
    let cb: Vec<Vec<i64>> = (0..b.genus()).map(|i| b.loop_counts(i)).collect();
    let mut perm: Vec<usize> = (0..a.vertices.len()).collect();
    loop {
        let mut used = vec![false; b.edges.len()];
        if match_edges(a, b, &ca, &cb, &perm, 0, &mut used) {
            return true;
        }
        if !next_permutation(&mut perm) {
            return false;
        }
    }
}

fn match_edges(
    a: &MarkedGraph,
    b: &MarkedGraph,
    ca: &[Vec<i64>],
    cb: &[Vec<i64>],
    perm: &[usize],
    e: usize,
    used: &mut [bool],
) -> bool {
    if e == a.edges.len() {
        return true;
    }
    let ea = &a.edges[e];
    for f in 0..b.edges.len() {
        if used[f] || b.edges[f].length != ea.length {
            continue;
        }
        let eb = &b.edges[f];
        for sign in [1i64, -1] {
            let (u, v) = if sign == 1 { (eb.u, eb.v) } else { (eb.v, eb.u) };
            if perm[ea.u] != u || perm[ea.v] != v {
                continue;
            }
            if (0..ca.len()).any(|i| ca[i][e] != sign * cb[i][f]) {
                continue;
            }
            used[f] = true;
            if match_edges(a, b, ca, cb, perm, e + 1, used) {
                return true;
            }
            used[f] = false;
        }
    }
    false
}

fn next_permutation(v: &mut [usize]) -> bool {
    let n = v.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GraphFormat {
    Json,
    Dot,
}

const COLORS: [&str; 6] = ["red", "blue", "darkgreen", "orange", "purple", "brown"];

/// Deterministic JSON or DOT text.
pub fn export_graph(graph: &MarkedGraph, format: GraphFormat) -> String {
    match format {
        GraphFormat::Json => serde_json::to_string_pretty(&graph_json(graph)).expect("serializable"),
        GraphFormat::Dot => graph_dot(graph),
    }
}

pub fn graph_json(graph: &MarkedGraph) -> Value {
    let vertices: Vec<Value> = graph
        .vertices
        .iter()
        .enumerate()
        .map(|(i, v)| json!({"id": i, "center": v.center().format_digits(), "radius_exp": v.q().to_string()}))
        .collect();
    let edges: Vec<Value> = graph
        .edges
        .iter()
        .enumerate()
        .map(|(i, e)| json!({"id": i, "u": e.u, "v": e.v, "length": e.length.to_string()}))
        .collect();
    let mut marking = serde_json::Map::new();
    let mut marking_edges = serde_json::Map::new();
    for (i, walk) in graph.loops.iter().enumerate() {
        let steps: Vec<Value> = walk
            .iter()
            .map(|&(e, fwd)| {
                let ed = &graph.edges[e];
                json!([ed.u, ed.v, if fwd { 1 } else { -1 }])
            })
            .collect();
        let ids: Vec<usize> = walk.iter().map(|s| s.0).collect();
        marking.insert(format!("s{}", i + 1), Value::Array(steps));
        marking_edges.insert(format!("s{}", i + 1), json!(ids));
    }
    let pair: Vec<Vec<String>> = pairing(graph)
        .iter()
        .map(|r| r.iter().map(|x| x.to_string()).collect())
        .collect();
    json!({
        "genus": graph.genus(),
        "vertices": vertices,
        "edges": edges,
        "marking": marking,
        "marking_edges": marking_edges,
        "pairing": pair,
    })
}

fn graph_dot(graph: &MarkedGraph) -> String {
    let mut out = String::from("graph skeleton {\n");
    for i in 0..graph.vertices.len() {
        let _ = writeln!(out, "  v{i};");
    }
    for (k, e) in graph.edges.iter().enumerate() {
        let mut marks = Vec::new();
        let mut color = "black";
        for (i, walk) in graph.loops.iter().enumerate() {
            for &(f, fwd) in walk {
                if f == k {
                    marks.push(format!("s{}{}", i + 1, if fwd { "+" } else { "-" }));
                    if color == "black" {
                        color = COLORS[i % COLORS.len()];
                    }
                }
            }
        }
        let _ = writeln!(
            out,
            "  v{} -- v{} [id=\"e{k}\", label=\"{}\", xlabel=\"{}\", color={color}];",
            e.u,
            e.v,
            e.length,
            marks.join(" ")
        );
    }
    out.push_str("}\n");
    out
}
