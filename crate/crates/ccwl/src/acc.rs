//! Attributed combinatorial complexes.
//!
//! A complex is a finite vertex set together with a family of nonempty vertex
//! subsets (cells), each carrying a rank and a binary attribute vector. Every
//! singleton is a cell and rank is monotone under inclusion. The four
//! neighborhood structures (boundary, coboundary, lower and upper adjacency)
//! are precomputed at construction and never change afterwards.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Binary attribute vector. Bit `s` (1-based) is the value of the attribute predicate `P_s`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Attr(pub Vec<bool>);

impl Attr {
    /// All-zero attribute of the given width.
    pub fn zeros(width: usize) -> Self {
        Attr(vec![false; width])
    }

    /// Parses a string of `0` and `1` characters.
    pub fn parse(text: &str) -> Result<Self> {
        text.chars()
            .map(|ch| match ch {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Validation(format!(
                    "attribute bitstring contains {other:?}; only 0 and 1 are allowed"
                ))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Attr)
    }

    /// Number of bits.
    pub fn width(&self) -> usize {
        self.0.len()
    }

    /// Value of bit `s` counted from 1. Bits beyond the width read as zero.
    pub fn bit(&self, s: usize) -> bool {
        s >= 1 && self.0.get(s - 1).copied().unwrap_or(false)
    }

    /// Copy extended with zero bits up to `width` (never truncates).
    pub fn padded(&self, width: usize) -> Attr {
        let mut bits = self.0.clone();
        if bits.len() < width {
            bits.resize(width, false);
        }
        Attr(bits)
    }

    /// Copy with `extra` appended.
    pub fn extended(&self, extra: &[bool]) -> Attr {
        let mut bits = self.0.clone();
        bits.extend_from_slice(extra);
        Attr(bits)
    }
}

impl Serialize for Attr {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Attr {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        Attr::parse(&text).map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for Attr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// One cell: a nonempty vertex set in ascending order, its rank and its attribute.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Cell {
    pub vertices: Vec<u32>,
    pub rank: u32,
    pub attr: Attr,
}

impl Cell {
    /// Builds a cell, sorting and deduplicating the vertex list.
    pub fn new(mut vertices: Vec<u32>, rank: u32, attr: Attr) -> Self {
        vertices.sort_unstable();
        vertices.dedup();
        Cell { vertices, rank, attr }
    }
}

/// The four neighborhood structures.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NeighborhoodKind {
    /// Cells one rank below that are strict subsets.
    Boundary,
    /// Cells one rank above that are strict supersets.
    Coboundary,
    /// Same-rank cells sharing a subcell one rank below.
    Lower,
    /// Same-rank cells contained in a common cell one rank above.
    Upper,
}

impl NeighborhoodKind {
    /// All four kinds in their fixed canonical order.
    pub const ALL: [NeighborhoodKind; 4] = [
        NeighborhoodKind::Boundary,
        NeighborhoodKind::Coboundary,
        NeighborhoodKind::Lower,
        NeighborhoodKind::Upper,
    ];

    /// Position of the kind inside [`NeighborhoodKind::ALL`].
    pub fn index(self) -> usize {
        match self {
            NeighborhoodKind::Boundary => 0,
            NeighborhoodKind::Coboundary => 1,
            NeighborhoodKind::Lower => 2,
            NeighborhoodKind::Upper => 3,
        }
    }

    /// Relation bit used in [`Acc::relation`].
    pub fn bit(self) -> u8 {
        1 << self.index()
    }

    /// Short name used by the formula syntax.
    pub fn short_name(self) -> &'static str {
        match self {
            NeighborhoodKind::Boundary => "B",
            NeighborhoodKind::Coboundary => "C",
            NeighborhoodKind::Lower => "down",
            NeighborhoodKind::Upper => "up",
        }
    }

    /// Inverse of [`NeighborhoodKind::short_name`].
    pub fn from_short_name(name: &str) -> Option<Self> {
        match name {
            "B" => Some(NeighborhoodKind::Boundary),
            "C" => Some(NeighborhoodKind::Coboundary),
            "down" => Some(NeighborhoodKind::Lower),
            "up" => Some(NeighborhoodKind::Upper),
            _ => None,
        }
    }
}

impl fmt::Display for NeighborhoodKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

/// Attributed combinatorial complex with precomputed neighborhoods.
#[derive(Clone, Debug)]
pub struct Acc {
    vertex_count: usize,
    ell: usize,
    rho: u32,
    cells: Vec<Cell>,
    lookup: HashMap<Vec<u32>, usize>,
    neighbors: [Vec<Vec<usize>>; 4],
    relation: Vec<u8>,
    lower_pairs: Vec<Vec<(usize, usize)>>,
    upper_pairs: Vec<Vec<(usize, usize)>>,
    fresh: Vec<bool>,
    anchor: Option<u32>,
}

impl PartialEq for Acc {
    fn eq(&self, other: &Self) -> bool {
        self.vertex_count == other.vertex_count
            && self.ell == other.ell
            && self.cells == other.cells
            && self.anchor == other.anchor
    }
}

impl Eq for Acc {}

fn vertex_mask(vertices: &[u32], words: usize) -> Vec<u64> {
    let mut mask = vec![0u64; words];
    for &v in vertices {
        mask[(v / 64) as usize] |= 1 << (v % 64);
    }
    mask
}

fn is_subset(a: &[u64], b: &[u64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x & !y == 0)
}

impl Acc {
    /// Validates the cells and builds the neighborhood indices.
    ///
    /// Rejects empty or out-of-range vertex sets, attribute width mismatches,
    /// duplicate vertex sets, missing singleton cells and rank-monotonicity
    /// violations.
    pub fn new(vertex_count: usize, ell: usize, cells: Vec<Cell>) -> Result<Self> {
        Self::build(vertex_count, ell, cells, None, Vec::new())
    }

    fn build(vertex_count: usize, ell: usize, cells: Vec<Cell>, anchor: Option<u32>, fresh: Vec<bool>) -> Result<Self> {
        let n = cells.len();
        let mut lookup = HashMap::with_capacity(n);
        for (idx, cell) in cells.iter().enumerate() {
            if cell.vertices.is_empty() {
                return Err(Error::Validation(format!("cell {idx} has an empty vertex set")));
            }
            if cell.vertices.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Validation(format!(
                    "cell {idx} vertex list {:?} is not strictly ascending",
                    cell.vertices
                )));
            }
            if let Some(&v) = cell.vertices.iter().find(|&&v| v as usize >= vertex_count) {
                return Err(Error::Validation(format!(
                    "cell {idx} uses vertex {v} but the complex has {vertex_count} vertices"
                )));
            }
            if cell.attr.width() != ell {
                return Err(Error::Validation(format!(
                    "cell {idx} has attribute width {} but ell is {ell}",
                    cell.attr.width()
                )));
            }
            if lookup.insert(cell.vertices.clone(), idx).is_some() {
                return Err(Error::Validation(format!(
                    "duplicate cell with vertex set {:?}",
                    cell.vertices
                )));
            }
        }
        for v in 0..vertex_count as u32 {
            if !lookup.contains_key(&vec![v]) {
                return Err(Error::Validation(format!(
                    "singleton cell {{{v}}} is missing; every vertex must be a cell"
                )));
            }
        }
        let words = vertex_count.div_ceil(64).max(1);
        let masks: Vec<Vec<u64>> = cells.iter().map(|c| vertex_mask(&c.vertices, words)).collect();
        let mut boundary = vec![Vec::new(); n];
        let mut coboundary = vec![Vec::new(); n];
        for x in 0..n {
            for y in 0..n {
                if x == y || cells[y].vertices.len() >= cells[x].vertices.len() {
                    continue;
                }
                if is_subset(&masks[y], &masks[x]) {
                    // y is a strict subset of x.
                    if cells[y].rank > cells[x].rank {
                        return Err(Error::Validation(format!(
                            "rank monotonicity violated: {:?} (rank {}) is contained in {:?} (rank {})",
                            cells[y].vertices, cells[y].rank, cells[x].vertices, cells[x].rank
                        )));
                    }
                    if cells[y].rank + 1 == cells[x].rank {
                        boundary[x].push(y);
                        coboundary[y].push(x);
                    }
                }
            }
        }
        let mut lower = vec![Vec::new(); n];
        let mut upper = vec![Vec::new(); n];
        let mut lower_pairs = vec![Vec::new(); n];
        let mut upper_pairs = vec![Vec::new(); n];
        for x in 0..n {
            for &z in &boundary[x] {
                for &y in &coboundary[z] {
                    if y != x {
                        lower[x].push(y);
                        lower_pairs[x].push((y, z));
                    }
                }
            }
            for &z in &coboundary[x] {
                for &y in &boundary[z] {
                    if y != x {
                        upper[x].push(y);
                        upper_pairs[x].push((y, z));
                    }
                }
            }
        }
        for list in boundary
            .iter_mut()
            .chain(coboundary.iter_mut())
            .chain(lower.iter_mut())
            .chain(upper.iter_mut())
        {
            list.sort_unstable();
            list.dedup();
        }
        for list in lower_pairs.iter_mut().chain(upper_pairs.iter_mut()) {
            list.sort_unstable();
        }
        let neighbors = [boundary, coboundary, lower, upper];
        let mut relation = vec![0u8; n * n];
        for kind in NeighborhoodKind::ALL {
            for (x, list) in neighbors[kind.index()].iter().enumerate() {
                for &y in list {
                    relation[x * n + y] |= kind.bit();
                }
            }
        }
        let rho = cells.iter().map(|c| c.rank).max().unwrap_or(0);
        let fresh = if fresh.len() == n { fresh } else { vec![false; n] };
        Ok(Acc {
            vertex_count,
            ell,
            rho,
            cells,
            lookup,
            neighbors,
            relation,
            lower_pairs,
            upper_pairs,
            fresh,
            anchor,
        })
    }

    /// Number of vertices of the underlying set.
    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    /// Attribute width.
    pub fn ell(&self) -> usize {
        self.ell
    }

    /// Largest rank of any cell.
    pub fn rho(&self) -> u32 {
        self.rho
    }

    /// Number of cells.
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    /// True when the complex has no cells (only possible with zero vertices).
    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// All cells in index order.
    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    /// Cell at `index`.
    pub fn cell(&self, index: usize) -> &Cell {
        &self.cells[index]
    }

    /// Index of the cell with the given vertex set, if present.
    pub fn find(&self, vertices: &[u32]) -> Option<usize> {
        let mut key = vertices.to_vec();
        key.sort_unstable();
        key.dedup();
        self.lookup.get(&key).copied()
    }

    /// Rank of a cell.
    pub fn rank(&self, index: usize) -> u32 {
        self.cells[index].rank
    }

    /// Attribute of a cell.
    pub fn attr(&self, index: usize) -> &Attr {
        &self.cells[index].attr
    }

    /// The neighbors of `cell` of the given kind, sorted ascending.
    pub fn neighbors(&self, cell: usize, kind: NeighborhoodKind) -> Result<&[usize]> {
        if cell >= self.cells.len() {
            return Err(Error::InvalidArgument(format!(
                "cell index {cell} out of range for a complex with {} cells",
                self.cells.len()
            )));
        }
        Ok(&self.neighbors[kind.index()][cell])
    }

    /// Unchecked variant of [`Acc::neighbors`] for inner loops.
    pub fn nbrs(&self, cell: usize, kind: NeighborhoodKind) -> &[usize] {
        &self.neighbors[kind.index()][cell]
    }

    /// Relation bits between `x` and `y`: bit `kind.bit()` is set iff `y` lies in `N_kind(x)`.
    pub fn relation(&self, x: usize, y: usize) -> u8 {
        self.relation[x * self.cells.len() + y]
    }

    /// True iff `y` lies in `N_kind(x)`.
    pub fn related(&self, kind: NeighborhoodKind, x: usize, y: usize) -> bool {
        self.relation(x, y) & kind.bit() != 0
    }

    /// Pairs `(y, z)` with `y` lower adjacent to `x` and `z` a common boundary cell of both.
    pub fn lower_pairs(&self, x: usize) -> &[(usize, usize)] {
        &self.lower_pairs[x]
    }

    /// Pairs `(y, z)` with `y` upper adjacent to `x` and `z` a common coboundary cell of both.
    pub fn upper_pairs(&self, x: usize) -> &[(usize, usize)] {
        &self.upper_pairs[x]
    }

    /// Indices of the cells of a given rank.
    pub fn cells_of_rank(&self, rank: u32) -> Vec<usize> {
        (0..self.cells.len()).filter(|&i| self.cells[i].rank == rank).collect()
    }

    /// True iff the cell was added by [`add_anchor`].
    pub fn is_fresh(&self, index: usize) -> bool {
        self.fresh[index]
    }

    /// The anchor vertex, if the complex carries one.
    pub fn anchor(&self) -> Option<u32> {
        self.anchor
    }

    /// Checks uniformity: every cell of positive rank reaches a rank-0 cell by
    /// a chain of neighborhood steps. Returns the first cell that cannot.
    pub fn uniformity(&self) -> Uniformity {
        let reached = self.distances_from(|i| self.cells[i].rank == 0);
        match (0..self.cells.len()).find(|&i| reached[i].is_none()) {
            None => Uniformity::Uniform,
            Some(witness) => Uniformity::NotUniform { witness },
        }
    }

    /// True iff the complex is uniform.
    pub fn is_uniform(&self) -> bool {
        matches!(self.uniformity(), Uniformity::Uniform)
    }

    /// Length minus one of the shortest neighborhood chain from `cell` to a
    /// rank-0 cell that is not an anchor cell; `None` when no chain exists.
    pub fn base_distance(&self, cell: usize) -> Option<usize> {
        self.base_distances()[cell]
    }

    /// Base distance of every cell.
    pub fn base_distances(&self) -> Vec<Option<usize>> {
        self.distances_from(|i| self.cells[i].rank == 0 && !self.fresh[i])
    }

    fn distances_from(&self, source: impl Fn(usize) -> bool) -> Vec<Option<usize>> {
        // Each neighborhood relation has its converse among the four kinds,
        // so breadth-first search from the sources along any kind is exact.
        let n = self.cells.len();
        let mut dist = vec![None; n];
        let mut queue = VecDeque::new();
        for (i, d) in dist.iter_mut().enumerate() {
            if source(i) {
                *d = Some(0);
                queue.push_back(i);
            }
        }
        while let Some(x) = queue.pop_front() {
            let next = dist[x].map(|d| d + 1);
            for kind in NeighborhoodKind::ALL {
                for &y in self.nbrs(x, kind) {
                    if dist[y].is_none() {
                        dist[y] = next;
                        queue.push_back(y);
                    }
                }
            }
        }
        dist
    }

    /// Serializes the complex into the versioned document form.
    pub fn to_document(&self) -> AccDocument {
        AccDocument {
            version: 1,
            vertices: self.vertex_count,
            ell: self.ell,
            cells: self
                .cells
                .iter()
                .map(|c| CellDocument {
                    vertices: c.vertices.clone(),
                    rank: c.rank,
                    attr: c.attr.to_string(),
                })
                .collect(),
            anchor: self.anchor,
        }
    }

    /// Builds a complex from a document, re-deriving anchor marks when present.
    pub fn from_document(doc: &AccDocument) -> Result<Self> {
        if doc.version != 1 {
            return Err(Error::Validation(format!(
                "unsupported complex document version {}",
                doc.version
            )));
        }
        let cells = doc
            .cells
            .iter()
            .map(|c| Ok(Cell::new(c.vertices.clone(), c.rank, Attr::parse(&c.attr)?)))
            .collect::<Result<Vec<_>>>()?;
        for (i, c) in doc.cells.iter().enumerate() {
            if c.vertices.windows(2).any(|w| w[0] >= w[1]) || c.vertices.is_empty() {
                return Err(Error::Validation(format!(
                    "cell {i} vertex list {:?} must be nonempty and strictly ascending",
                    c.vertices
                )));
            }
        }
        let fresh = match doc.anchor {
            Some(a) => cells.iter().map(|c| c.vertices.contains(&a)).collect(),
            None => Vec::new(),
        };
        Self::build(doc.vertices, doc.ell, cells, doc.anchor, fresh)
    }

    /// Parses a JSON complex document.
    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_document(&serde_json::from_str(text)?)
    }

    /// Pretty JSON text of the complex document.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("complex documents always serialize")
    }

    /// Hex SHA-256 of the canonical (compact) JSON document.
    pub fn content_hash(&self) -> String {
        let text = serde_json::to_string(&self.to_document()).expect("complex documents always serialize");
        hex::encode(Sha256::digest(text.as_bytes()))
    }
}

/// Outcome of the uniformity check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Uniformity {
    Uniform,
    /// `witness` is a cell with no neighborhood chain to rank 0.
    NotUniform {
        witness: usize,
    },
}

/// Cell entry of a complex document.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellDocument {
    pub vertices: Vec<u32>,
    pub rank: u32,
    pub attr: String,
}

/// Versioned JSON form of a complex.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccDocument {
    pub version: u32,
    pub vertices: usize,
    pub ell: usize,
    pub cells: Vec<CellDocument>,
    /// Anchor vertex written by [`add_anchor`]; absent for ordinary complexes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anchor: Option<u32>,
}

/// Vertex-colored simple graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    vertex_count: usize,
    ell: usize,
    edges: Vec<(u32, u32)>,
    colors: Vec<Attr>,
    adjacency: Vec<bool>,
}

impl Graph {
    /// Builds a graph. Edges are normalized to `(min, max)` and sorted.
    /// Rejects loops, repeated edges, out-of-range endpoints and color width mismatches.
    pub fn new(vertex_count: usize, ell: usize, edges: Vec<(u32, u32)>, colors: Vec<Attr>) -> Result<Self> {
        if colors.len() != vertex_count {
            return Err(Error::Validation(format!(
                "graph has {vertex_count} vertices but {} colors",
                colors.len()
            )));
        }
        if let Some(c) = colors.iter().find(|c| c.width() != ell) {
            return Err(Error::Validation(format!("vertex color {c} does not have width {ell}")));
        }
        let mut normalized: Vec<(u32, u32)> = Vec::with_capacity(edges.len());
        for (u, v) in edges {
            if u == v {
                return Err(Error::Validation(format!("loop at vertex {u}")));
            }
            if u as usize >= vertex_count || v as usize >= vertex_count {
                return Err(Error::Validation(format!(
                    "edge ({u}, {v}) uses a vertex outside 0..{vertex_count}"
                )));
            }
            normalized.push((u.min(v), u.max(v)));
        }
        normalized.sort_unstable();
        if let Some(w) = normalized.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Validation(format!("repeated edge {:?}", w[0])));
        }
        let mut adjacency = vec![false; vertex_count * vertex_count];
        for &(u, v) in &normalized {
            adjacency[u as usize * vertex_count + v as usize] = true;
            adjacency[v as usize * vertex_count + u as usize] = true;
        }
        Ok(Graph {
            vertex_count,
            ell,
            edges: normalized,
            colors,
            adjacency,
        })
    }

    /// Graph with all vertices colored by the single-bit attribute `0`.
    pub fn uncolored(vertex_count: usize, edges: Vec<(u32, u32)>) -> Result<Self> {
        Self::new(vertex_count, 1, edges, vec![Attr::zeros(1); vertex_count])
    }

    /// Number of vertices.
    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    /// Color width.
    pub fn ell(&self) -> usize {
        self.ell
    }

    /// Normalized sorted edge list.
    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    /// Color of vertex `v`.
    pub fn color(&self, v: usize) -> &Attr {
        &self.colors[v]
    }

    /// True iff `u` and `v` are adjacent.
    pub fn adjacent(&self, u: usize, v: usize) -> bool {
        self.adjacency[u * self.vertex_count + v]
    }

    /// Graph with the vertices renamed by `perm` (vertex `v` becomes `perm[v]`).
    pub fn relabeled(&self, perm: &[usize]) -> Result<Graph> {
        let mut colors = vec![Attr::default(); self.vertex_count];
        for v in 0..self.vertex_count {
            colors[perm[v]] = self.colors[v].clone();
        }
        let edges = self
            .edges
            .iter()
            .map(|&(u, v)| (perm[u as usize] as u32, perm[v as usize] as u32))
            .collect();
        Graph::new(self.vertex_count, self.ell, edges, colors)
    }

    /// Versioned document form.
    pub fn to_document(&self) -> GraphDocument {
        GraphDocument {
            version: 1,
            vertices: self.vertex_count,
            ell: self.ell,
            edges: self.edges.iter().map(|&(u, v)| [u, v]).collect(),
            colors: self.colors.iter().map(|c| c.to_string()).collect(),
        }
    }

    /// Builds a graph from its document form.
    pub fn from_document(doc: &GraphDocument) -> Result<Self> {
        if doc.version != 1 {
            return Err(Error::Validation(format!(
                "unsupported graph document version {}",
                doc.version
            )));
        }
        let colors = doc.colors.iter().map(|c| Attr::parse(c)).collect::<Result<Vec<_>>>()?;
        Graph::new(
            doc.vertices,
            doc.ell,
            doc.edges.iter().map(|e| (e[0], e[1])).collect(),
            colors,
        )
    }

    /// Parses a JSON graph document.
    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_document(&serde_json::from_str(text)?)
    }

    /// Pretty JSON text.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("graph documents always serialize")
    }
}

/// Versioned JSON form of a graph.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphDocument {
    pub version: u32,
    pub vertices: usize,
    pub ell: usize,
    pub edges: Vec<[u32; 2]>,
    pub colors: Vec<String>,
}

/// Parses either a complex document or a graph document; graphs are lifted.
/// A document with an `edges` list and no `cells` list counts as a graph.
pub fn complex_from_json(text: &str) -> Result<Acc> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    let is_graph = value.get("edges").is_some() && value.get("cells").is_none();
    if is_graph {
        Ok(lift_graph(&Graph::from_document(&serde_json::from_value(value)?)?))
    } else {
        Acc::from_document(&serde_json::from_value(value)?)
    }
}

/// Lifts a graph to a one-dimensional complex. Vertices become rank-0 cells
/// keeping their color with a cleared tag bit; every edge becomes a rank-1
/// cell whose attribute is all zeros with the tag bit set, so all edges share
/// one attribute that differs from every vertex attribute.
pub fn lift_graph(g: &Graph) -> Acc {
    let ell = g.ell + 1;
    let mut cells = Vec::with_capacity(g.vertex_count + g.edges.len());
    for v in 0..g.vertex_count {
        cells.push(Cell::new(vec![v as u32], 0, g.colors[v].extended(&[false])));
    }
    let edge_attr = Attr::zeros(g.ell).extended(&[true]);
    for &(u, v) in &g.edges {
        cells.push(Cell::new(vec![u, v], 1, edge_attr.clone()));
    }
    Acc::new(g.vertex_count, ell, cells).expect("a lifted simple graph is always a valid complex")
}

/// Adds the broadcast anchor: a fresh vertex `a`, the rank-0 cell `{a}` and,
/// for every original rank-0 cell `x`, the rank-1 cell `{a} ∪ x`. Attributes
/// are widened by two bits: original cells get `00`, the anchor cell `10`
/// and the anchor edges `11`, so both new attributes are fresh.
pub fn add_anchor(acc: &Acc) -> Result<Acc> {
    if acc.anchor.is_some() {
        return Err(Error::InvalidState("the complex already carries an anchor".into()));
    }
    let a = acc.vertex_count as u32;
    let ell = acc.ell + 2;
    let mut cells: Vec<Cell> = acc
        .cells
        .iter()
        .map(|c| Cell {
            vertices: c.vertices.clone(),
            rank: c.rank,
            attr: c.attr.extended(&[false, false]),
        })
        .collect();
    let mut fresh = vec![false; cells.len()];
    cells.push(Cell::new(vec![a], 0, Attr::zeros(acc.ell).extended(&[true, false])));
    fresh.push(true);
    let edge_attr = Attr::zeros(acc.ell).extended(&[true, true]);
    for c in acc.cells.iter().filter(|c| c.rank == 0) {
        let mut vs = c.vertices.clone();
        vs.push(a);
        cells.push(Cell::new(vs, 1, edge_attr.clone()));
        fresh.push(true);
    }
    Acc::build(acc.vertex_count + 1, ell, cells, Some(a), fresh)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> Graph {
        Graph::uncolored(3, vec![(0, 1), (1, 2)]).unwrap()
    }

    #[test]
    fn attr_round_trip() {
        let a = Attr::parse("0110").unwrap();
        assert_eq!(a.to_string(), "0110");
        assert!(a.bit(2) && a.bit(3) && !a.bit(1) && !a.bit(4) && !a.bit(9));
        assert!(Attr::parse("012").is_err());
    }

    #[test]
    fn single_edge_boundary_is_its_endpoints() {
        let acc = lift_graph(&Graph::uncolored(2, vec![(0, 1)]).unwrap());
        let e = acc.find(&[0, 1]).unwrap();
        let b = acc.neighbors(e, NeighborhoodKind::Boundary).unwrap();
        assert_eq!(b, &[acc.find(&[0]).unwrap(), acc.find(&[1]).unwrap()]);
    }

    #[test]
    fn vertex_has_empty_boundary() {
        let acc = lift_graph(&path3());
        for v in 0..3 {
            assert!(acc.nbrs(v, NeighborhoodKind::Boundary).is_empty());
        }
    }

    #[test]
    fn out_of_range_index_is_rejected() {
        let acc = lift_graph(&path3());
        assert!(matches!(
            acc.neighbors(99, NeighborhoodKind::Lower),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn loader_rejects_invariant_violations() {
        let missing = r#"{"version":1,"vertices":2,"ell":1,"cells":[{"vertices":[0],"rank":0,"attr":"0"}]}"#;
        assert!(matches!(Acc::from_json(missing), Err(Error::Validation(_))));
        let nonmonotone = r#"{"version":1,"vertices":2,"ell":1,"cells":[
            {"vertices":[0],"rank":2,"attr":"0"},{"vertices":[1],"rank":0,"attr":"0"},
            {"vertices":[0,1],"rank":1,"attr":"0"}]}"#;
        assert!(Acc::from_json(nonmonotone)
            .unwrap_err()
            .to_string()
            .contains("monotonicity"));
        let duplicate = r#"{"version":1,"vertices":1,"ell":1,"cells":[
            {"vertices":[0],"rank":0,"attr":"0"},{"vertices":[0],"rank":0,"attr":"1"}]}"#;
        assert!(Acc::from_json(duplicate).unwrap_err().to_string().contains("duplicate"));
    }

    #[test]
    fn documents_round_trip() {
        let acc = add_anchor(&lift_graph(&path3())).unwrap();
        let back = Acc::from_json(&acc.to_json()).unwrap();
        assert_eq!(acc, back);
        assert_eq!(back.anchor(), Some(3));
        assert!(back.is_fresh(back.find(&[3]).unwrap()));
        let g = path3();
        assert_eq!(Graph::from_json(&g.to_json()).unwrap(), g);
    }

    #[test]
    fn graph_rejects_loops_and_repeats() {
        assert!(Graph::uncolored(2, vec![(0, 0)]).is_err());
        assert!(Graph::uncolored(2, vec![(0, 1), (1, 0)]).is_err());
    }

    #[test]
    fn anchor_adds_one_vertex_and_one_edge_per_vertex_cell() {
        let acc = Acc::new(3, 1, (0..3).map(|v| Cell::new(vec![v], 0, Attr::zeros(1))).collect()).unwrap();
        let anchored = add_anchor(&acc).unwrap();
        assert_eq!(anchored.cells_of_rank(0).len(), 4);
        assert_eq!(anchored.cells_of_rank(1).len(), 3);
        let a = anchored.find(&[3]).unwrap();
        assert_eq!(anchored.nbrs(a, NeighborhoodKind::Coboundary).len(), 3);
        assert!(matches!(add_anchor(&anchored), Err(Error::InvalidState(_))));
    }

    #[test]
    fn anchor_attributes_are_fresh_and_distinct() {
        let acc = add_anchor(&lift_graph(&path3())).unwrap();
        let a = acc.find(&[3]).unwrap();
        let ae = acc.find(&[0, 3]).unwrap();
        let originals: Vec<&Attr> = (0..5).map(|i| acc.attr(i)).collect();
        assert_ne!(acc.attr(a), acc.attr(ae));
        assert!(!originals.contains(&acc.attr(a)));
        assert!(!originals.contains(&acc.attr(ae)));
    }

    #[test]
    fn base_distance_ignores_the_anchor_vertex() {
        let acc = add_anchor(&lift_graph(&path3())).unwrap();
        assert_eq!(acc.base_distance(acc.find(&[0]).unwrap()), Some(0));
        assert_eq!(acc.base_distance(acc.find(&[0, 1]).unwrap()), Some(1));
        assert_eq!(acc.base_distance(acc.find(&[3]).unwrap()), Some(1));
    }

    #[test]
    fn only_singletons_is_uniform() {
        let acc = Acc::new(
            2,
            0,
            vec![
                Cell::new(vec![0], 0, Attr::zeros(0)),
                Cell::new(vec![1], 0, Attr::zeros(0)),
            ],
        )
        .unwrap();
        assert!(acc.is_uniform());
    }
}
