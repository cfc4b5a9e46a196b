//! Dimer covers of finite honeycomb graphs.
//!
//! The Kasteleyn matrix has rows indexed by white vertices and columns by
//! black vertices, with the edge weight as entry. On the honeycomb lattice
//! every face is a hexagon, so positive entries already form a Kasteleyn
//! weighting and `|det K|` is the weighted number of covers.

use std::collections::{BTreeMap, HashMap, HashSet};

use petgraph::algo::maximum_matching;
use petgraph::graph::UnGraph;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{BlackVertex, LozengeType, WhiteVertex};
use crate::linalg::{Lu, Matrix};
use crate::scalar::Weight;

/// Largest graph [`enumerate_covers`] accepts, in black vertices.
pub const ENUMERATION_LIMIT: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub w: WhiteVertex,
    pub b: BlackVertex,
}

impl Edge {
    pub const fn new(w: WhiteVertex, b: BlackVertex) -> Self {
        Self { w, b }
    }

    pub fn of_type(b: BlackVertex, t: LozengeType) -> Self {
        Self::new(t.white_of(b), b)
    }

    pub fn lozenge(&self) -> Option<LozengeType> {
        LozengeType::between(self.w, self.b)
    }
}

impl std::fmt::Display for Edge {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}-{}", self.w, self.b)
    }
}

/// Finite subgraph of the honeycomb lattice with positive edge weights.
#[derive(Debug, Clone, PartialEq)]
pub struct HoneycombSubgraph<W> {
    blacks: Vec<BlackVertex>,
    whites: Vec<WhiteVertex>,
    black_index: HashMap<BlackVertex, usize>,
    white_index: HashMap<WhiteVertex, usize>,
    edges: BTreeMap<Edge, W>,
}

impl<W: Weight> HoneycombSubgraph<W> {
    pub fn new(
        blacks: impl IntoIterator<Item = BlackVertex>,
        whites: impl IntoIterator<Item = WhiteVertex>,
        edges: impl IntoIterator<Item = (Edge, W)>,
    ) -> Result<Self> {
        let mut blacks: Vec<_> = blacks
            .into_iter()
            .collect::<HashSet<_>>()
            .into_iter()
            .collect();
        let mut whites: Vec<_> = whites
            .into_iter()
            .collect::<HashSet<_>>()
            .into_iter()
            .collect();
        blacks.sort_by_key(|v| (v.n, v.x));
        whites.sort_by_key(|v| (v.n, v.x));
        let black_index = blacks
            .iter()
            .enumerate()
            .map(|(i, v)| (*v, i))
            .collect::<HashMap<_, _>>();
        let white_index = whites
            .iter()
            .enumerate()
            .map(|(i, v)| (*v, i))
            .collect::<HashMap<_, _>>();
        let mut map = BTreeMap::new();
        for (e, weight) in edges {
            if e.lozenge().is_none() {
                return Err(Error::InvalidEdge {
                    wx: e.w.x,
                    wn: e.w.n,
                    bx: e.b.x,
                    bn: e.b.n,
                });
            }
            if !black_index.contains_key(&e.b) {
                return Err(Error::MissingVertex(e.b.to_string()));
            }
            if !white_index.contains_key(&e.w) {
                return Err(Error::MissingVertex(e.w.to_string()));
            }
            if !(weight > W::zero()) {
                return Err(Error::InvalidConfig(format!(
                    "edge {e} has non-positive weight"
                )));
            }
            map.insert(e, weight);
        }
        Ok(Self {
            blacks,
            whites,
            black_index,
            white_index,
            edges: map,
        })
    }

    /// All honeycomb edges between the given vertices, weighted by lozenge
    /// type.
    pub fn induced(
        blacks: impl IntoIterator<Item = BlackVertex>,
        whites: impl IntoIterator<Item = WhiteVertex>,
        weight: impl Fn(LozengeType) -> W,
    ) -> Result<Self> {
        let blacks: Vec<_> = blacks.into_iter().collect();
        let whites: HashSet<_> = whites.into_iter().collect();
        let mut edges = Vec::new();
        for &b in &blacks {
            for t in LozengeType::ALL {
                let w = t.white_of(b);
                if whites.contains(&w) {
                    edges.push((Edge::new(w, b), weight(t)));
                }
            }
        }
        Self::new(blacks, whites, edges)
    }

    pub fn blacks(&self) -> &[BlackVertex] {
        &self.blacks
    }

    pub fn whites(&self) -> &[WhiteVertex] {
        &self.whites
    }

    pub fn edges(&self) -> impl Iterator<Item = (&Edge, &W)> {
        self.edges.iter()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn contains_black(&self, b: BlackVertex) -> bool {
        self.black_index.contains_key(&b)
    }

    pub fn contains_white(&self, w: WhiteVertex) -> bool {
        self.white_index.contains_key(&w)
    }

    pub fn weight(&self, e: &Edge) -> Option<&W> {
        self.edges.get(e)
    }

    /// Weight of the edge, zero if absent.
    pub fn k(&self, w: WhiteVertex, b: BlackVertex) -> W {
        self.edges
            .get(&Edge::new(w, b))
            .cloned()
            .unwrap_or_else(W::zero)
    }

    pub fn with_weight(&self, e: &Edge, weight: W) -> Result<Self> {
        if !self.edges.contains_key(e) {
            return Err(Error::MissingEdge(e.to_string()));
        }
        if !(weight > W::zero()) {
            return Err(Error::InvalidConfig(format!(
                "edge {e} has non-positive weight"
            )));
        }
        let mut g = self.clone();
        g.edges.insert(*e, weight);
        Ok(g)
    }

    /// Replaces every weight by the weight of its lozenge type.
    pub fn with_abc_weights(&self, a: W, b: W, c: W) -> Self {
        self.map_weights(|e, _| match e.lozenge().expect("validated edge") {
            LozengeType::I => b.clone(),
            LozengeType::II => a.clone(),
            LozengeType::III => c.clone(),
        })
    }

    /// Independent weights uniform on a fine grid of `[0.5, 2]`, drawn from a
    /// seeded generator in edge order.
    pub fn randomized(&self, seed: u64) -> Self {
        const DEN: i64 = 1 << 20;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.map_weights(|_, _| W::from_ratio(rng.random_range(DEN / 2..=2 * DEN), DEN))
    }

    pub fn map_weights<V: Weight>(
        &self,
        mut f: impl FnMut(&Edge, &W) -> V,
    ) -> HoneycombSubgraph<V> {
        HoneycombSubgraph {
            blacks: self.blacks.clone(),
            whites: self.whites.clone(),
            black_index: self.black_index.clone(),
            white_index: self.white_index.clone(),
            edges: self.edges.iter().map(|(e, w)| (*e, f(e, w))).collect(),
        }
    }

    /// The graph with the given vertices and their edges deleted. Vertices
    /// not in the graph are ignored.
    pub fn without(&self, blacks: &[BlackVertex], whites: &[WhiteVertex]) -> Self {
        let gone_b: HashSet<_> = blacks.iter().collect();
        let gone_w: HashSet<_> = whites.iter().collect();
        Self::new(
            self.blacks.iter().filter(|b| !gone_b.contains(b)).copied(),
            self.whites.iter().filter(|w| !gone_w.contains(w)).copied(),
            self.edges
                .iter()
                .filter(|(e, _)| !gone_b.contains(&e.b) && !gone_w.contains(&e.w))
                .map(|(e, w)| (*e, w.clone())),
        )
        .expect("subgraph of a valid graph")
    }

    /// Whether a perfect matching exists, decided combinatorially.
    pub fn is_tileable(&self) -> bool {
        if self.blacks.len() != self.whites.len() {
            return false;
        }
        let nb = self.blacks.len();
        let mut g = UnGraph::<(), ()>::with_capacity(2 * nb, self.edges.len());
        let nodes: Vec<_> = (0..2 * nb).map(|_| g.add_node(())).collect();
        for e in self.edges.keys() {
            g.add_edge(
                nodes[self.white_index[&e.w]],
                nodes[nb + self.black_index[&e.b]],
                (),
            );
        }
        maximum_matching(&g).is_perfect()
    }
}

/// Edge list with weights, the JSON form of a graph.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawGraph<W> {
    blacks: Vec<BlackVertex>,
    whites: Vec<WhiteVertex>,
    edges: Vec<RawEdge<W>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawEdge<W> {
    w: WhiteVertex,
    b: BlackVertex,
    weight: W,
}

impl<W: Weight + Serialize> Serialize for HoneycombSubgraph<W> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RawGraph {
            blacks: self.blacks.clone(),
            whites: self.whites.clone(),
            edges: self
                .edges
                .iter()
                .map(|(e, w)| RawEdge {
                    w: e.w,
                    b: e.b,
                    weight: w.clone(),
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de, W: Weight + DeserializeOwned> Deserialize<'de> for HoneycombSubgraph<W> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawGraph::<W>::deserialize(d)?;
        Self::new(
            raw.blacks,
            raw.whites,
            raw.edges
                .into_iter()
                .map(|e| (Edge::new(e.w, e.b), e.weight)),
        )
        .map_err(serde::de::Error::custom)
    }
}

/// Hexagonal region whose tilings are the plane partitions in an
/// `n x n x n` box, with unit weights.
pub fn build_boxed_plane_partition<W: Weight>(n: i64) -> Result<HoneycombSubgraph<W>> {
    if n < 1 {
        return Err(Error::InvalidDepth(n));
    }
    let mut blacks = Vec::new();
    for x in -n..=n - 1 {
        for y in (-1).max(-1 - x)..=(2 * n - 2).min(2 * n - 2 - x) {
            blacks.push(BlackVertex::new(x, y));
        }
    }
    let mut whites = Vec::new();
    for x in 1 - n..=n {
        for y in 0.max(-x)..=(2 * n - 1).min(2 * n - 1 - x) {
            whites.push(WhiteVertex::new(x - 1, y));
        }
    }
    HoneycombSubgraph::induced(blacks, whites, |_| W::one())
}

pub fn kasteleyn_matrix<W: Weight>(g: &HoneycombSubgraph<W>) -> Result<Matrix<W>> {
    if g.blacks.len() != g.whites.len() {
        return Err(Error::NotTileable);
    }
    let mut k = Matrix::zeros(g.whites.len(), g.blacks.len());
    for (e, w) in &g.edges {
        k[(g.white_index[&e.w], g.black_index[&e.b])] = w.clone();
    }
    Ok(k)
}

/// Weighted number of dimer covers, `|det K|`.
pub fn partition_function<W: Weight>(g: &HoneycombSubgraph<W>) -> Result<W> {
    if !g.is_tileable() {
        return Err(Error::NotTileable);
    }
    Ok(kasteleyn_matrix(g)?.det().abs())
}

/// Like [`partition_function`] but zero for graphs without covers.
pub fn partition_function_or_zero<W: Weight>(g: &HoneycombSubgraph<W>) -> W {
    partition_function(g).unwrap_or_else(|_| W::zero())
}

/// Factorized Kasteleyn matrix giving entries of its inverse, indexed by
/// (black, white).
#[derive(Debug, Clone)]
pub struct InverseKasteleyn<'g, W> {
    graph: &'g HoneycombSubgraph<W>,
    lu: Lu<W>,
}

impl<'g, W: Weight> InverseKasteleyn<'g, W> {
    pub fn new(graph: &'g HoneycombSubgraph<W>) -> Result<Self> {
        if !graph.is_tileable() {
            return Err(Error::NotTileable);
        }
        let lu = Lu::new(kasteleyn_matrix(graph)?);
        if lu.is_singular() {
            return Err(Error::NotTileable);
        }
        Ok(Self { graph, lu })
    }

    pub fn graph(&self) -> &HoneycombSubgraph<W> {
        self.graph
    }

    /// Column of the inverse belonging to `w`, indexed like the blacks.
    pub fn column(&self, w: WhiteVertex) -> Result<Vec<W>> {
        let j = *self
            .graph
            .white_index
            .get(&w)
            .ok_or_else(|| Error::MissingVertex(w.to_string()))?;
        Ok(self.lu.inverse_column(j).expect("nonsingular"))
    }

    pub fn entry(&self, b: BlackVertex, w: WhiteVertex) -> Result<W> {
        let i = *self
            .graph
            .black_index
            .get(&b)
            .ok_or_else(|| Error::MissingVertex(b.to_string()))?;
        Ok(self.column(w)?[i].clone())
    }
}

fn check_disjoint(edges: &[Edge]) -> Result<()> {
    let mut bs = HashSet::new();
    let mut ws = HashSet::new();
    for e in edges {
        if !bs.insert(e.b) || !ws.insert(e.w) {
            return Err(Error::OverlappingEdges);
        }
    }
    Ok(())
}

/// Probability that all `edges` are dimers, from minors of the inverse
/// Kasteleyn matrix.
pub fn kenyon_prob_with<W: Weight>(inv: &InverseKasteleyn<'_, W>, edges: &[Edge]) -> Result<W> {
    check_disjoint(edges)?;
    let g = inv.graph;
    let mut weight = W::one();
    for e in edges {
        match g.weight(e) {
            Some(w) => weight = weight * w.clone(),
            None => return Ok(W::zero()),
        }
    }
    let mut m = Matrix::zeros(edges.len(), edges.len());
    for (j, ej) in edges.iter().enumerate() {
        let col = inv.column(ej.w)?;
        for (i, ei) in edges.iter().enumerate() {
            m[(i, j)] = col[g.black_index[&ei.b]].clone();
        }
    }
    Ok(m.det() * weight)
}

pub fn kenyon_prob<W: Weight>(g: &HoneycombSubgraph<W>, edges: &[Edge]) -> Result<W> {
    kenyon_prob_with(&InverseKasteleyn::new(g)?, edges)
}

/// Probability that all `edges` are dimers, as the partition function of
/// the graph with their endpoints removed.
pub fn restriction_prob<W: Weight>(g: &HoneycombSubgraph<W>, edges: &[Edge]) -> Result<W> {
    check_disjoint(edges)?;
    let z = partition_function(g)?;
    restriction_prob_given(g, &z, edges)
}

fn restriction_prob_given<W: Weight>(g: &HoneycombSubgraph<W>, z: &W, edges: &[Edge]) -> Result<W> {
    let mut weight = W::one();
    for e in edges {
        match g.weight(e) {
            Some(w) => weight = weight * w.clone(),
            None => return Ok(W::zero()),
        }
    }
    let bs: Vec<_> = edges.iter().map(|e| e.b).collect();
    let ws: Vec<_> = edges.iter().map(|e| e.w).collect();
    Ok(partition_function_or_zero(&g.without(&bs, &ws)) * weight / z.clone())
}

/// A perfect matching with the product of its edge weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimerCover<W> {
    pub edges: Vec<Edge>,
    pub weight: W,
}

impl<W> DimerCover<W> {
    pub fn contains(&self, e: &Edge) -> bool {
        self.edges.contains(e)
    }
}

/// All dimer covers by exhaustive search. At every step the unmatched white
/// with the fewest free neighbours is matched next, so forced dimers are
/// placed first and dead ends are cut as soon as a vertex runs out of
/// neighbours.
pub fn enumerate_covers<W: Weight>(g: &HoneycombSubgraph<W>) -> Result<Vec<DimerCover<W>>> {
    if g.blacks.len() > ENUMERATION_LIMIT {
        return Err(Error::EnumerationTooLarge {
            blacks: g.blacks.len(),
            limit: ENUMERATION_LIMIT,
        });
    }
    if g.blacks.len() != g.whites.len() {
        return Ok(Vec::new());
    }
    let mut adj: Vec<Vec<(usize, W)>> = vec![Vec::new(); g.whites.len()];
    let mut back: Vec<Vec<usize>> = vec![Vec::new(); g.blacks.len()];
    for (e, w) in &g.edges {
        let (i, j) = (g.white_index[&e.w], g.black_index[&e.b]);
        adj[i].push((j, w.clone()));
        back[j].push(i);
    }
    let mut search = CoverSearch {
        adj: &adj,
        back: &back,
        white_done: vec![false; g.whites.len()],
        black_done: vec![false; g.blacks.len()],
        chosen: Vec::new(),
        found: Vec::new(),
    };
    search.run(W::one());
    Ok(search
        .found
        .into_iter()
        .map(|(pairs, weight)| {
            let mut edges: Vec<_> = pairs
                .into_iter()
                .map(|(i, j)| Edge::new(g.whites[i], g.blacks[j]))
                .collect();
            edges.sort();
            DimerCover { edges, weight }
        })
        .collect())
}

struct CoverSearch<'a, W> {
    adj: &'a [Vec<(usize, W)>],
    back: &'a [Vec<usize>],
    white_done: Vec<bool>,
    black_done: Vec<bool>,
    chosen: Vec<(usize, usize)>,
    found: Vec<(Vec<(usize, usize)>, W)>,
}

impl<W: Weight> CoverSearch<'_, W> {
    fn run(&mut self, weight: W) {
        let mut next = None;
        let mut fewest = usize::MAX;
        for (i, nbrs) in self.adj.iter().enumerate() {
            if self.white_done[i] {
                continue;
            }
            let free = nbrs.iter().filter(|(j, _)| !self.black_done[*j]).count();
            if free < fewest {
                fewest = free;
                next = Some(i);
            }
        }
        let Some(i) = next else {
            self.found.push((self.chosen.clone(), weight));
            return;
        };
        if fewest == 0 {
            return;
        }
        let starved = self
            .back
            .iter()
            .enumerate()
            .any(|(j, ws)| !self.black_done[j] && ws.iter().all(|&w| self.white_done[w]));
        if starved {
            return;
        }
        self.white_done[i] = true;
        for (j, w) in &self.adj[i] {
            if self.black_done[*j] {
                continue;
            }
            self.black_done[*j] = true;
            self.chosen.push((i, *j));
            self.run(weight.clone() * w.clone());
            self.chosen.pop();
            self.black_done[*j] = false;
        }
        self.white_done[i] = false;
    }
}

/// Weighted fraction of `covers` containing every edge in `edges`.
pub fn enumeration_prob<W: Weight>(covers: &[DimerCover<W>], edges: &[Edge]) -> W {
    let (mut hit, mut total) = (W::zero(), W::zero());
    for c in covers {
        total = total + c.weight.clone();
        if edges.iter().all(|e| c.contains(e)) {
            hit = hit + c.weight.clone();
        }
    }
    hit / total
}

/// Vertex sets of the column recursion based at `(x, n)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SigmaSets {
    pub x: i64,
    pub n: i64,
    pub m: i64,
    pub sigma: (Vec<BlackVertex>, Vec<WhiteVertex>),
    pub sigma_tilde: (Vec<BlackVertex>, Vec<WhiteVertex>),
}

impl SigmaSets {
    pub fn new(x: i64, n: i64, m: i64) -> Self {
        Self {
            x,
            n,
            m,
            sigma: sigma(x, n, m),
            sigma_tilde: sigma_tilde(x, n, m),
        }
    }
}

/// `{black(x,n-i), white(x+1,n-i) : i <= m} u {black(x+1,n-i-1), white(x,n-i) : i < m}`.
pub fn sigma(x: i64, n: i64, m: i64) -> (Vec<BlackVertex>, Vec<WhiteVertex>) {
    let mut bs: Vec<_> = (0..=m).map(|i| BlackVertex::new(x, n - i)).collect();
    let mut ws: Vec<_> = (0..=m).map(|i| WhiteVertex::new(x + 1, n - i)).collect();
    bs.extend((0..m).map(|i| BlackVertex::new(x + 1, n - i - 1)));
    ws.extend((0..m).map(|i| WhiteVertex::new(x, n - i)));
    (bs, ws)
}

/// Endpoints of `e_i^0` and `e_i^1` for `i <= m`.
pub fn sigma_tilde(x: i64, n: i64, m: i64) -> (Vec<BlackVertex>, Vec<WhiteVertex>) {
    let mut bs = Vec::new();
    let mut ws = Vec::new();
    for i in 0..=m {
        bs.extend([
            BlackVertex::new(x, n - i),
            BlackVertex::new(x + 1, n - i - 1),
        ]);
        ws.extend([WhiteVertex::new(x, n - i), WhiteVertex::new(x + 1, n - i)]);
    }
    (bs, ws)
}

/// Type I edge at `(x, n-i)`.
pub fn e0(x: i64, n: i64, i: i64) -> Edge {
    Edge::new(WhiteVertex::new(x, n - i), BlackVertex::new(x, n - i))
}

/// Type III edge from `black(x+1, n-i-1)` to `white(x+1, n-i)`.
pub fn e1(x: i64, n: i64, i: i64) -> Edge {
    Edge::new(
        WhiteVertex::new(x + 1, n - i),
        BlackVertex::new(x + 1, n - i - 1),
    )
}

/// `e_0^0, e_0^1, ..., e_m^0, e_m^1`.
pub fn stack_edges(x: i64, n: i64, m: i64) -> Vec<Edge> {
    (0..=m).flat_map(|i| [e0(x, n, i), e1(x, n, i)]).collect()
}

/// `e_0^0, ..., e_m^0, e_m^1`: the same event once forced dimers are dropped.
pub fn reduced_stack_edges(x: i64, n: i64, m: i64) -> Vec<Edge> {
    let mut v: Vec<_> = (0..=m).map(|i| e0(x, n, i)).collect();
    v.push(e1(x, n, m));
    v
}

fn contains_all<W: Weight>(
    g: &HoneycombSubgraph<W>,
    set: &(Vec<BlackVertex>, Vec<WhiteVertex>),
) -> Result<()> {
    if let Some(b) = set.0.iter().find(|b| !g.contains_black(**b)) {
        return Err(Error::MissingVertex(b.to_string()));
    }
    if let Some(w) = set.1.iter().find(|w| !g.contains_white(**w)) {
        return Err(Error::MissingVertex(w.to_string()));
    }
    Ok(())
}

fn c1<W: Weight>(g: &HoneycombSubgraph<W>, x: i64, n: i64, m: i64) -> W {
    (0..m).fold(W::one(), |acc, i| {
        acc * g.k(WhiteVertex::new(x, n - i), BlackVertex::new(x, n - 1 - i))
            * g.k(
                WhiteVertex::new(x + 1, n - 1 - i),
                BlackVertex::new(x + 1, n - 1 - i),
            )
    })
}

fn c2<W: Weight>(g: &HoneycombSubgraph<W>, x: i64, n: i64, m: i64) -> W {
    (0..m).fold(W::one(), |acc, i| {
        acc * g.k(WhiteVertex::new(x, n - i), BlackVertex::new(x, n - i))
            * g.k(
                WhiteVertex::new(x + 1, n - i),
                BlackVertex::new(x + 1, n - 1 - i),
            )
    })
}

fn link<W: Weight>(g: &HoneycombSubgraph<W>, x: i64, n: i64, m: i64) -> W {
    g.k(
        WhiteVertex::new(x, n - m),
        BlackVertex::new(x + 1, n - m - 1),
    )
}

/// `(c1(m), c2(m), c3(m))` of the recursion based at `(x, n)`.
pub fn c_coeffs<W: Weight>(g: &HoneycombSubgraph<W>, x: i64, n: i64, m: i64) -> Result<(W, W, W)> {
    contains_all(g, &sigma(x, n, m))?;
    let mut needed = Vec::new();
    for i in 0..=m {
        needed.extend([e0(x, n, i), e1(x, n, i)]);
        if i < m {
            needed.push(Edge::new(
                WhiteVertex::new(x, n - i),
                BlackVertex::new(x, n - 1 - i),
            ));
            needed.push(Edge::new(
                WhiteVertex::new(x + 1, n - 1 - i),
                BlackVertex::new(x + 1, n - 1 - i),
            ));
        }
    }
    needed.push(Edge::new(
        WhiteVertex::new(x, n - m),
        BlackVertex::new(x + 1, n - m - 1),
    ));
    if let Some(e) = needed.iter().find(|e| g.weight(e).is_none()) {
        return Err(Error::MissingEdge(e.to_string()));
    }
    let c3 = c1(g, x, n, m) / c2(g, x, n, m + 1) * link(g, x, n, m);
    Ok((c1(g, x, n, m), c2(g, x, n, m), c3))
}

/// Depths `N` for which `Sigma_N` lies in the graph.
pub fn admissible_depths<W: Weight>(g: &HoneycombSubgraph<W>, x: i64, n: i64) -> Vec<i64> {
    (0..)
        .take_while(|&m| contains_all(g, &sigma(x, n, m)).is_ok())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecursionReport<W> {
    pub x: i64,
    pub n: i64,
    pub depth: i64,
    pub lhs: W,
    pub terms: Vec<W>,
    pub remainder: W,
    pub residual: f64,
}

/// Checks `-K^{-1}(black(x,n), white(x+1,n)) = sum_m c3(m) P[stack m] + R(N)`
/// with `R(N) = c1(N+1) Z(G - Sigma_{N+1}) / Z(G)`. Terms whose stack edges
/// are not all in the graph vanish.
pub fn recursion_identity<W: Weight>(
    g: &HoneycombSubgraph<W>,
    x: i64,
    n: i64,
    depth: i64,
) -> Result<RecursionReport<W>> {
    contains_all(g, &sigma(x, n, depth))?;
    let inv = InverseKasteleyn::new(g)?;
    let z = partition_function(g)?;
    let lhs = -inv.entry(BlackVertex::new(x, n), WhiteVertex::new(x + 1, n))?;
    let mut terms = Vec::new();
    for m in 0..=depth {
        let c2m = c2(g, x, n, m + 1);
        if c2m.is_zero() {
            terms.push(W::zero());
            continue;
        }
        let c3 = c1(g, x, n, m) / c2m * link(g, x, n, m);
        terms.push(c3 * kenyon_prob_with(&inv, &stack_edges(x, n, m))?);
    }
    let (bs, ws) = sigma(x, n, depth + 1);
    let remainder = c1(g, x, n, depth + 1) * partition_function_or_zero(&g.without(&bs, &ws)) / z;
    let rhs = terms
        .iter()
        .fold(remainder.clone(), |acc, t| acc + t.clone());
    Ok(RecursionReport {
        x,
        n,
        depth,
        residual: (lhs.clone() - rhs).abs().to_f64_lossy(),
        lhs,
        terms,
        remainder,
    })
}

/// The common `(a, b, c)` of a graph whose weights depend only on the
/// lozenge type.
pub fn abc_weights<W: Weight>(g: &HoneycombSubgraph<W>) -> Result<(W, W, W)> {
    let mut seen: [Option<W>; 3] = [None, None, None];
    for (e, w) in g.edges() {
        let slot = match e.lozenge().expect("validated edge") {
            LozengeType::II => 0,
            LozengeType::I => 1,
            LozengeType::III => 2,
        };
        match &seen[slot] {
            Some(v) if v != w => {
                return Err(Error::NotAbcWeighted(format!(
                    "edge {e} breaks the pattern"
                )))
            }
            Some(_) => {}
            None => seen[slot] = Some(w.clone()),
        }
    }
    let [a, b, c] = seen.map(|v| v.unwrap_or_else(W::one));
    Ok((a, b, c))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorollaryReport<W> {
    pub x: i64,
    pub n: i64,
    pub depth: i64,
    pub lhs: W,
    pub expectations: Vec<W>,
    pub remainder: W,
    pub residual: f64,
    /// Largest gap between the probabilities of the full and the reduced
    /// stack events.
    pub forced_gap: f64,
}

/// Checks `-(bc/a) K^{-1}(black(x,n), white(x+1,n)) = sum_m E[stack m] + R(N)`
/// on an `(a, b, c)`-weighted graph, with `R(N) = (bc)^{N+2} Z(G - Sigma_{N+1}) / (a Z(G))`.
pub fn corollary_abc_check<W: Weight>(
    g: &HoneycombSubgraph<W>,
    x: i64,
    n: i64,
    depth: i64,
) -> Result<CorollaryReport<W>> {
    let (a, b, c) = abc_weights(g)?;
    contains_all(g, &sigma(x, n, depth))?;
    let inv = InverseKasteleyn::new(g)?;
    let z = partition_function(g)?;
    let bc = b.clone() * c.clone();
    let lhs = -(bc.clone() / a.clone())
        * inv.entry(BlackVertex::new(x, n), WhiteVertex::new(x + 1, n))?;
    let mut expectations = Vec::new();
    let mut forced_gap: f64 = 0.0;
    for m in 0..=depth {
        let reduced = kenyon_prob_with(&inv, &reduced_stack_edges(x, n, m))?;
        let full = kenyon_prob_with(&inv, &stack_edges(x, n, m))?;
        forced_gap = forced_gap.max((reduced.clone() - full).abs().to_f64_lossy());
        expectations.push(reduced);
    }
    let (bs, ws) = sigma(x, n, depth + 1);
    // Equals (bc)^{N+2} / a unless Sigma_{N+1} leaves the graph, where it vanishes.
    let scale = bc / a * c1(g, x, n, depth + 1);
    let remainder = scale * partition_function_or_zero(&g.without(&bs, &ws)) / z;
    let rhs = expectations
        .iter()
        .fold(remainder.clone(), |acc, t| acc + t.clone());
    Ok(CorollaryReport {
        x,
        n,
        depth,
        residual: (lhs.clone() - rhs).abs().to_f64_lossy(),
        lhs,
        expectations,
        remainder,
        forced_gap,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BulkProbe {
    pub size: i64,
    /// `-K^{-1}(black(x,n), white(x+1,n))` at the centre.
    pub speed_entry: f64,
    pub speed_target: f64,
    pub speed_distance: f64,
    /// Probability of the type I lozenge at the centre.
    pub density: f64,
    pub density_distance: f64,
}

/// Inverse Kasteleyn entries at the centre `(-1, n-1)` of the unit-weight
/// box of size `n`, compared with the uniform infinite-volume values.
pub fn bulk_probe(n: i64) -> Result<BulkProbe> {
    let g = build_boxed_plane_partition::<f64>(n)?;
    let inv = InverseKasteleyn::new(&g)?;
    let centre = BlackVertex::new(-1, n - 1);
    let speed_entry = -inv.entry(centre, WhiteVertex::new(0, n - 1))?;
    let density =
        inv.entry(centre, WhiteVertex::new(-1, n - 1))? * g.k(WhiteVertex::new(-1, n - 1), centre);
    let speed_target = 3f64.sqrt() / (2.0 * std::f64::consts::PI);
    Ok(BulkProbe {
        size: n,
        speed_entry,
        speed_target,
        speed_distance: (speed_entry - speed_target).abs(),
        density,
        density_distance: (density - 1.0 / 3.0).abs(),
    })
}
