//! Seeded generators of small complexes and graphs for sweeps and tests.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::acc::{Acc, Attr, Cell, Graph};
use crate::error::Result;

/// Seed used when none is given.
pub const DEFAULT_SEED: u64 = 0x5EED;

/// Deterministic generator for one sweep.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random simple graph with `n` vertices, edge probability `p` and one
/// attribute bit per vertex drawn with probability `color_p`.
pub fn random_graph(rng: &mut impl Rng, n: usize, p: f64, color_p: f64) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n as u32 {
        for v in u + 1..n as u32 {
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    let colors = (0..n).map(|_| Attr(vec![rng.gen_bool(color_p)])).collect();
    Graph::new(n, 1, edges, colors).expect("generated graphs are valid")
}

/// Copy of `g` with its vertices permuted at random.
pub fn shuffled_graph(rng: &mut impl Rng, g: &Graph) -> Graph {
    let mut perm: Vec<usize> = (0..g.vertex_count()).collect();
    perm.shuffle(rng);
    g.relabeled(&perm).expect("a permutation relabels validly")
}

/// A pair of graphs on the same number of vertices: independent, an
/// isomorphic copy, or a copy with one edge moved, in equal proportion.
pub fn random_graph_pair(rng: &mut impl Rng, max_vertices: usize) -> (Graph, Graph) {
    let n = rng.gen_range(1..=max_vertices);
    let p = rng.gen_range(0.2..0.7);
    let color_p = if rng.gen_bool(0.5) { 0.0 } else { 0.3 };
    let g = random_graph(rng, n, p, color_p);
    let h = match rng.gen_range(0..3) {
        0 => random_graph(rng, n, p, color_p),
        1 => shuffled_graph(rng, &g),
        _ => {
            let moved = move_one_edge(rng, &g);
            shuffled_graph(rng, &moved)
        }
    };
    (g, h)
}

fn move_one_edge(rng: &mut impl Rng, g: &Graph) -> Graph {
    let n = g.vertex_count() as u32;
    let mut edges = g.edges().to_vec();
    let non_edges: Vec<(u32, u32)> = (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
        .filter(|&(u, v)| !g.adjacent(u as usize, v as usize))
        .collect();
    if !edges.is_empty() && !non_edges.is_empty() {
        let i = rng.gen_range(0..edges.len());
        edges[i] = *non_edges.choose(rng).expect("nonempty");
    }
    let colors = (0..g.vertex_count()).map(|v| g.color(v).clone()).collect();
    Graph::new(g.vertex_count(), g.ell(), edges, colors).expect("moved edge keeps the graph simple")
}

/// Random uniform complex with at most `max_cells` cells: vertices, edges,
/// triangles and occasionally a square face, each with one attribute bit.
pub fn random_uniform_acc(rng: &mut impl Rng, max_cells: usize) -> Acc {
    loop {
        if let Some(acc) = try_uniform_acc(rng, max_cells) {
            return acc;
        }
    }
}

fn try_uniform_acc(rng: &mut impl Rng, max_cells: usize) -> Option<Acc> {
    let max_vertices = max_cells.clamp(1, 5);
    let n = rng.gen_range(1..=max_vertices);
    let color_p = if rng.gen_bool(0.5) { 0.0 } else { 0.3 };
    let mut cells: Vec<Cell> = (0..n as u32).map(|v| Cell::new(vec![v], 0, Attr::zeros(1))).collect();
    let mut pairs: Vec<(u32, u32)> = (0..n as u32)
        .flat_map(|u| (u + 1..n as u32).map(move |v| (u, v)))
        .collect();
    pairs.shuffle(rng);
    let p = rng.gen_range(0.3..0.8);
    let mut edges = Vec::new();
    for (u, v) in pairs {
        if cells.len() < max_cells && rng.gen_bool(p) {
            cells.push(Cell::new(vec![u, v], 1, Attr::zeros(1)));
            edges.push((u, v));
        }
    }
    let has = |e: &[(u32, u32)], u: u32, v: u32| e.contains(&(u.min(v), u.max(v)));
    for a in 0..n as u32 {
        for b in a + 1..n as u32 {
            for c in b + 1..n as u32 {
                if cells.len() < max_cells
                    && has(&edges, a, b)
                    && has(&edges, b, c)
                    && has(&edges, a, c)
                    && rng.gen_bool(0.5)
                {
                    cells.push(Cell::new(vec![a, b, c], 2, Attr::zeros(1)));
                }
            }
        }
    }
    if n >= 4 && cells.len() < max_cells && rng.gen_bool(0.2) {
        let mut q: Vec<u32> = (0..n as u32).collect();
        q.shuffle(rng);
        let (a, b, c, d) = (q[0], q[1], q[2], q[3]);
        if has(&edges, a, b) && has(&edges, b, c) && has(&edges, c, d) && has(&edges, d, a) {
            cells.push(Cell::new(vec![a, b, c, d], 2, Attr::zeros(1)));
        }
    }
    for cell in cells.iter_mut() {
        cell.attr = Attr(vec![rng.gen_bool(color_p)]);
    }
    let acc = Acc::new(n, 1, cells).ok()?;
    acc.is_uniform().then_some(acc)
}

/// Copy of a complex with its vertices renamed by a random permutation.
pub fn shuffled_acc(rng: &mut impl Rng, acc: &Acc) -> Acc {
    let mut perm: Vec<u32> = (0..acc.vertex_count() as u32).collect();
    perm.shuffle(rng);
    let mut cells: Vec<Cell> = acc
        .cells()
        .iter()
        .map(|c| {
            Cell::new(
                c.vertices.iter().map(|&v| perm[v as usize]).collect(),
                c.rank,
                c.attr.clone(),
            )
        })
        .collect();
    cells.shuffle(rng);
    Acc::new(acc.vertex_count(), acc.ell(), cells).expect("renaming vertices keeps a valid complex")
}

/// A pair of uniform complexes: independent, isomorphic, or differing in
/// one attribute bit, in equal proportion.
pub fn random_acc_pair(rng: &mut impl Rng, max_cells: usize) -> (Acc, Acc) {
    let a = random_uniform_acc(rng, max_cells);
    let b = match rng.gen_range(0..3) {
        0 => random_uniform_acc(rng, max_cells),
        1 => shuffled_acc(rng, &a),
        _ => {
            let mut cells = a.cells().to_vec();
            let i = rng.gen_range(0..cells.len());
            cells[i].attr = Attr(vec![!cells[i].attr.bit(1)]);
            let flipped = Acc::new(a.vertex_count(), a.ell(), cells).expect("flipping a bit keeps a valid complex");
            shuffled_acc(rng, &flipped)
        }
    };
    (a, b)
}

/// Every complex with at most `max_cells` cells built from 1 to 3 vertex
/// cells, optional edges between them and all attribute bit choices.
pub fn tiny_complexes(max_cells: usize) -> Result<Vec<Acc>> {
    let mut out = Vec::new();
    for n in 1..=3u32 {
        let pairs: Vec<(u32, u32)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        for mask in 0u32..1 << pairs.len() {
            let edges: Vec<(u32, u32)> = pairs
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, &e)| e)
                .collect();
            let size = n as usize + edges.len();
            if size > max_cells {
                continue;
            }
            for colors in 0u32..1 << size {
                let mut cells: Vec<Cell> = (0..n).map(|v| Cell::new(vec![v], 0, Attr::zeros(1))).collect();
                cells.extend(edges.iter().map(|&(u, v)| Cell::new(vec![u, v], 1, Attr::zeros(1))));
                for (i, c) in cells.iter_mut().enumerate() {
                    c.attr = Attr(vec![colors >> i & 1 == 1]);
                }
                out.push(Acc::new(n as usize, 1, cells)?);
            }
        }
    }
    Ok(out)
}

/// Hand-picked small complexes (at most 6 cells) covering isolated
/// vertices, paths, triangles and attribute variations.
pub fn curated_complexes() -> Vec<Acc> {
    let graph = |n: usize, edges: &[(u32, u32)], colored: &[usize]| {
        let colors = (0..n).map(|v| Attr(vec![colored.contains(&v)])).collect();
        crate::acc::lift_graph(&Graph::new(n, 1, edges.to_vec(), colors).expect("curated graphs are valid"))
    };
    let mut out = vec![
        graph(1, &[], &[]),
        graph(2, &[], &[]),
        graph(2, &[(0, 1)], &[]),
        graph(2, &[(0, 1)], &[0]),
        graph(3, &[], &[]),
        graph(3, &[(0, 1)], &[]),
        graph(3, &[(0, 1), (1, 2)], &[]),
        graph(3, &[(0, 1), (1, 2)], &[0]),
        graph(3, &[(0, 1), (1, 2)], &[1]),
        graph(3, &[(0, 1), (1, 2), (0, 2)], &[]),
        graph(3, &[(0, 1), (1, 2), (0, 2)], &[2]),
        graph(4, &[(0, 1)], &[]),
        graph(4, &[(0, 1), (2, 3)], &[]),
    ];
    let mut colored_edge = graph(3, &[(0, 1), (1, 2), (0, 2)], &[]).cells().to_vec();
    let last = colored_edge.len() - 1;
    colored_edge[last].attr = Attr(vec![true, true]);
    out.push(Acc::new(3, 2, colored_edge).expect("recoloring keeps a valid complex"));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_are_deterministic() {
        let (a1, b1) = random_acc_pair(&mut rng(7), 8);
        let (a2, b2) = random_acc_pair(&mut rng(7), 8);
        assert_eq!(a1.to_json(), a2.to_json());
        assert_eq!(b1.to_json(), b2.to_json());
    }

    #[test]
    fn random_complexes_are_uniform_and_small() {
        let mut r = rng(DEFAULT_SEED);
        for _ in 0..50 {
            let a = random_uniform_acc(&mut r, 8);
            assert!(a.is_uniform());
            assert!(a.len() <= 8);
        }
    }

    #[test]
    fn tiny_complexes_respect_the_cap() {
        let all = tiny_complexes(3).unwrap();
        assert!(all.iter().all(|a| a.len() <= 3));
        assert_eq!(all.len(), 2 + 4 + 8 + 8);
    }
}
