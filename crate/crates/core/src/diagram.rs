//! Truncated Markov diagrams.
//!
//! Vertices are pairs `(symbol, J)` with `J ⊆ cl(I_symbol)` a closed interval
//! with interior. The roots are `cl(I_1), …, cl(I_k)`; the successors of
//! `(i, J)` are the intervals `cl(I_j) ∩ T_i(J)` that have interior.
//! Vertices are numbered in order of first appearance, so vertices of level
//! `≤ n` form an index prefix.

use std::fmt::Write as _;

use thiserror::Error;

use crate::interval::Interval;
use crate::interval_map::{PiecewiseMonotonicMap, Symbol};
use crate::linalg::{self, LinalgError};
use crate::scalar::{render, Scalar, DEDUP_TOL};
use crate::symbolic::{successor, Word};

/// Default truncation depth.
pub const DEFAULT_DEPTH: usize = 12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiagramError {
    #[error("float arithmetic requires a vertex deduplication tolerance")]
    ArithmeticMode,
    #[error("diagram exceeds {0} vertices")]
    VertexBudget(usize),
    #[error("subdiagram has no cycle")]
    NoCycle,
    #[error("power iteration did not converge after {iterations} iterations (last quotients {last:?})")]
    NonConvergence { iterations: usize, last: (f64, f64) },
    #[error("subdiagram is not strongly connected")]
    NotStronglyConnected,
    #[error("no arrow leaves path position {0}")]
    BrokenPath(usize),
    #[error("no connector of length ≤ {gap} joins `{x}` to `{y}`")]
    SpecificationViolation { x: Word, y: Word, gap: usize },
}

impl From<LinalgError> for DiagramError {
    fn from(e: LinalgError) -> Self {
        match e {
            LinalgError::NoCycle => DiagramError::NoCycle,
            LinalgError::NonConvergence { iterations, last } => DiagramError::NonConvergence { iterations, last },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vertex<S> {
    pub symbol: Symbol,
    pub interval: Interval<S>,
    /// First level at which the vertex appears.
    pub level: usize,
}

impl<S: Scalar> Vertex<S> {
    /// `symbol:[lo,hi]@level`.
    pub fn label(&self) -> String {
        format!("{}:{}@{}", self.symbol, self.interval, self.level)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagramOptions {
    pub depth: usize,
    /// Endpoint tolerance for deduplication; required in float mode, ignored in exact mode.
    pub dedup_tol: Option<f64>,
    pub max_vertices: usize,
}

impl Default for DiagramOptions {
    fn default() -> Self {
        DiagramOptions { depth: DEFAULT_DEPTH, dedup_tol: Some(DEDUP_TOL), max_vertices: 200_000 }
    }
}

impl DiagramOptions {
    pub fn with_depth(depth: usize) -> Self {
        DiagramOptions { depth, ..Self::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarkovDiagram<S> {
    pub vertices: Vec<Vertex<S>>,
    /// Sorted successor lists.
    pub arrows: Vec<Vec<usize>>,
    pub roots: Vec<usize>,
    pub depth: usize,
    /// No new vertex appeared at the truncation level.
    pub saturated: bool,
}

/// Per-symbol index ordered by the left endpoint (as `f64`).
struct VertexIndex {
    by_symbol: Vec<Vec<(f64, usize)>>,
    tol: f64,
}

impl VertexIndex {
    fn find<S: Scalar>(&self, vertices: &[Vertex<S>], symbol: Symbol, j: &Interval<S>) -> Option<usize> {
        let list = &self.by_symbol[symbol as usize - 1];
        let key = j.lo.to_f64();
        // exact rationals convert deterministically, so a zero window suffices there
        let window = if S::EXACT { 0.0 } else { self.tol };
        let start = list.partition_point(|(x, _)| *x < key - window);
        list[start..]
            .iter()
            .take_while(|(x, _)| *x <= key + window)
            .map(|&(_, i)| i)
            .find(|&i| vertices[i].interval.same_as(j, self.tol))
    }

    fn insert(&mut self, symbol: Symbol, lo: f64, index: usize) {
        let list = &mut self.by_symbol[symbol as usize - 1];
        let at = list.partition_point(|(x, _)| *x <= lo);
        list.insert(at, (lo, index));
    }
}

/// Builds the diagram to `depth` with default options.
pub fn build_diagram<S: Scalar>(map: &PiecewiseMonotonicMap<S>, depth: usize) -> Result<MarkovDiagram<S>, DiagramError> {
    build_diagram_with(map, &DiagramOptions::with_depth(depth))
}

pub fn build_diagram_with<S: Scalar>(
    map: &PiecewiseMonotonicMap<S>,
    opts: &DiagramOptions,
) -> Result<MarkovDiagram<S>, DiagramError> {
    let tol = match (S::EXACT, opts.dedup_tol) {
        (true, _) => 0.0,
        (false, Some(t)) => t,
        (false, None) => return Err(DiagramError::ArithmeticMode),
    };
    let mut index = VertexIndex { by_symbol: vec![Vec::new(); map.k()], tol };
    let mut vertices: Vec<Vertex<S>> = Vec::new();
    for s in map.symbols() {
        let interval = map.closed_piece(s);
        index.insert(s, interval.lo.to_f64(), vertices.len());
        vertices.push(Vertex { symbol: s, interval, level: 0 });
    }
    let roots: Vec<usize> = (0..vertices.len()).collect();
    let mut arrows: Vec<Vec<usize>> = vec![Vec::new(); vertices.len()];
    let mut frontier = 0..vertices.len();
    for level in 0..=opts.depth {
        let expanding = level < opts.depth;
        let mut found = Vec::new();
        for v in frontier.clone() {
            for next in map.symbols() {
                if let Some(j) = successor(map, vertices[v].symbol, &vertices[v].interval, next) {
                    found.push((v, next, j));
                }
            }
        }
        let start = vertices.len();
        for (v, next, j) in found {
            let target = match index.find(&vertices, next, &j) {
                Some(t) => Some(t),
                None if expanding => {
                    if vertices.len() >= opts.max_vertices {
                        return Err(DiagramError::VertexBudget(opts.max_vertices));
                    }
                    index.insert(next, j.lo.to_f64(), vertices.len());
                    vertices.push(Vertex { symbol: next, interval: j, level: level + 1 });
                    arrows.push(Vec::new());
                    Some(vertices.len() - 1)
                }
                None => None,
            };
            if let Some(t) = target {
                arrows[v].push(t);
            }
        }
        frontier = start..vertices.len();
        if frontier.is_empty() {
            break;
        }
    }
    for out in &mut arrows {
        out.sort_unstable();
        out.dedup();
    }
    let saturated = opts.depth >= 1 && vertices.iter().all(|v| v.level < opts.depth);
    Ok(MarkovDiagram { vertices, arrows, roots, depth: opts.depth, saturated })
}

impl<S: Scalar> MarkovDiagram<S> {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.arrows.iter().map(Vec::len).sum()
    }

    /// The diagram that a build at depth `depth ≤ self.depth` would produce.
    pub fn truncate(&self, depth: usize) -> MarkovDiagram<S> {
        let depth = depth.min(self.depth);
        let n = self.vertices.iter().take_while(|v| v.level <= depth).count();
        MarkovDiagram {
            vertices: self.vertices[..n].to_vec(),
            arrows: self.arrows[..n].iter().map(|a| a.iter().copied().filter(|&w| w < n).collect()).collect(),
            roots: self.roots.clone(),
            depth,
            saturated: if depth == self.depth {
                self.saturated
            } else {
                depth >= 1 && self.vertices[..n].iter().all(|v| v.level < depth)
            },
        }
    }

    /// Induced subdiagram on `indices` (kept in the given order).
    pub fn subdiagram(&self, indices: &[usize]) -> SubDiagram<S> {
        SubDiagram {
            vertices: indices.iter().map(|&i| self.vertices[i].clone()).collect(),
            parent_index: indices.to_vec(),
            adj: linalg::induced(&self.arrows, indices),
        }
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph markov {\n");
        for (i, v) in self.vertices.iter().enumerate() {
            let _ = writeln!(out, "  v{i} [label=\"{}\"];", v.label());
        }
        for (i, out_list) in self.arrows.iter().enumerate() {
            for j in out_list {
                let _ = writeln!(out, "  v{i} -> v{j};");
            }
        }
        out.push_str("}\n");
        out
    }

    pub fn vertices_csv(&self) -> String {
        let mut out = String::from("id,symbol,lo,hi,level,out_degree\n");
        for (i, v) in self.vertices.iter().enumerate() {
            let _ = writeln!(
                out,
                "{i},{},{},{},{},{}",
                v.symbol,
                render(&v.interval.lo),
                render(&v.interval.hi),
                v.level,
                self.arrows[i].len()
            );
        }
        out
    }

    pub fn edges_csv(&self) -> String {
        let mut out = String::from("from,to\n");
        for (i, out_list) in self.arrows.iter().enumerate() {
            for j in out_list {
                let _ = writeln!(out, "{i},{j}");
            }
        }
        out
    }
}

/// A finite vertex set of a diagram with its adjacency submatrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SubDiagram<S> {
    pub vertices: Vec<Vertex<S>>,
    /// Index of each vertex in the parent diagram.
    pub parent_index: Vec<usize>,
    /// Adjacency in local indices.
    pub adj: Vec<Vec<usize>>,
}

impl<S: Scalar> SubDiagram<S> {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn is_strongly_connected(&self) -> bool {
        !self.is_empty()
            && linalg::tarjan_scc(&self.adj).len() == 1
            && linalg::is_cyclic(&(0..self.len()).collect::<Vec<_>>(), &self.adj)
    }

    pub fn local_index(&self, parent: usize) -> Option<usize> {
        self.parent_index.iter().position(|&p| p == parent)
    }

    /// Vertices reachable after reading `symbol` from the set `from`
    /// (`None` means "any vertex", i.e. the start of a word).
    pub fn step(&self, from: Option<&[usize]>, symbol: Symbol) -> Vec<usize> {
        let mut out: Vec<usize> = match from {
            None => (0..self.len()).filter(|&v| self.vertices[v].symbol == symbol).collect(),
            Some(set) => set
                .iter()
                .flat_map(|&v| self.adj[v].iter().copied())
                .filter(|&w| self.vertices[w].symbol == symbol)
                .collect(),
        };
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Membership of `w` in the projected language of the subdiagram.
    pub fn accepts(&self, w: &Word) -> bool {
        self.end_set(w).is_some_and(|s| !s.is_empty())
    }

    /// Vertices at which a path labelled `w` can end.
    pub fn end_set(&self, w: &Word) -> Option<Vec<usize>> {
        let mut set: Option<Vec<usize>> = None;
        for &s in w.symbols() {
            let next = self.step(set.as_deref(), s);
            if next.is_empty() {
                return Some(next);
            }
            set = Some(next);
        }
        set
    }

    /// All words of length `n` in the projected language, lexicographically.
    pub fn language(&self, n: usize, k: usize) -> Vec<Word> {
        let mut out = Vec::new();
        let mut stack: Vec<(Vec<Symbol>, Option<Vec<usize>>)> = vec![(Vec::new(), None)];
        while let Some((prefix, set)) = stack.pop() {
            if prefix.len() == n {
                out.push(Word::new(prefix));
                continue;
            }
            for s in (1..=k as Symbol).rev() {
                let next = self.step(set.as_deref(), s);
                if !next.is_empty() {
                    let mut p = prefix.clone();
                    p.push(s);
                    stack.push((p, Some(next)));
                }
            }
        }
        out
    }

    pub fn alphabet_size(&self) -> usize {
        self.vertices.iter().map(|v| v.symbol as usize).max().unwrap_or(0)
    }
}

fn rho_of<S: Scalar>(adj: &[Vec<usize>]) -> Result<f64, DiagramError> {
    if S::EXACT && adj.len() <= 4 {
        Ok(linalg::spectral_radius_small(adj)?)
    } else {
        Ok(linalg::spectral_radius(adj)?)
    }
}

/// The cyclic strongly connected component of maximal spectral radius;
/// ties go to the smaller component, then to the smallest vertex index.
pub fn irreducible_core<S: Scalar>(d: &MarkovDiagram<S>) -> Result<SubDiagram<S>, DiagramError> {
    let mut best: Option<(f64, Vec<usize>)> = None;
    for comp in linalg::tarjan_scc(&d.arrows) {
        if !linalg::is_cyclic(&comp, &d.arrows) {
            continue;
        }
        let rho = rho_of::<S>(&linalg::induced(&d.arrows, &comp))?;
        let better = match &best {
            None => true,
            Some((r, c)) => {
                if (rho - r).abs() > 1e-12 * r.max(1.0) {
                    rho > *r
                } else {
                    (comp.len(), comp[0]) < (c.len(), c[0])
                }
            }
        };
        if better {
            best = Some((rho, comp));
        }
    }
    let (_, comp) = best.ok_or(DiagramError::NoCycle)?;
    Ok(d.subdiagram(&comp))
}

/// `log ρ` of the adjacency submatrix (natural log).
pub fn spectral_radius_entropy<S: Scalar>(s: &SubDiagram<S>) -> Result<f64, DiagramError> {
    if s.is_empty() {
        return Err(DiagramError::NoCycle);
    }
    Ok(rho_of::<S>(&s.adj)?.ln())
}

/// Outcome of a specification check.
#[derive(Debug, Clone, PartialEq)]
pub struct SpecificationCertificate {
    /// Connector bound allowing empty connectors.
    pub gap: usize,
    /// Connector bound when connectors must be nonempty.
    pub gap_positive: usize,
    pub test_len: usize,
    pub pairs_checked: usize,
    /// Longest shortest connector actually needed (empty allowed / nonempty).
    pub observed: usize,
    pub observed_positive: usize,
}

/// Shortest path lengths with at least one edge, for every ordered pair.
fn path_lengths(adj: &[Vec<usize>], min_edges: usize) -> Vec<Vec<Option<usize>>> {
    let n = adj.len();
    let dist: Vec<Vec<Option<usize>>> = (0..n).map(|v| linalg::bfs(adj, v)).collect();
    (0..n)
        .map(|i| {
            // the first `min_edges` steps are forced, then a shortest path
            let mut frontier = vec![i];
            for _ in 0..min_edges {
                let mut next: Vec<usize> = frontier.iter().flat_map(|&v| adj[v].iter().copied()).collect();
                next.sort_unstable();
                next.dedup();
                frontier = next;
            }
            (0..n).map(|j| frontier.iter().filter_map(|&w| dist[w][j]).min().map(|d| d + min_edges)).collect()
        })
        .collect()
}

/// Connector bounds of a strongly connected subdiagram, certified by
/// exhaustion over projected-language words of length `≤ test_len`.
pub fn specification_gap<S: Scalar>(
    s: &SubDiagram<S>,
    test_len: usize,
) -> Result<SpecificationCertificate, DiagramError> {
    if !s.is_strongly_connected() {
        return Err(DiagramError::NotStronglyConnected);
    }
    let max_minus_one = |lens: &Vec<Vec<Option<usize>>>| -> usize {
        lens.iter().flatten().map(|l| l.expect("strongly connected") - 1).max().unwrap_or(0)
    };
    let gap = max_minus_one(&path_lengths(&s.adj, 1));
    let gap_positive = max_minus_one(&path_lengths(&s.adj, 2));

    let k = s.alphabet_size();
    let words: Vec<Word> = (1..=test_len).flat_map(|n| s.language(n, k)).collect();
    let connectors: Vec<Vec<Word>> = (0..=gap_positive.max(gap)).map(|n| all_words(n, k)).collect();
    let mut observed = 0;
    let mut observed_positive = 0;
    for x in &words {
        let Some(end) = s.end_set(x) else { continue };
        for y in &words {
            let joins = |z: &Word| {
                let mut set = end.clone();
                for &c in z.symbols().iter().chain(y.symbols()) {
                    set = s.step(Some(&set), c);
                    if set.is_empty() {
                        return false;
                    }
                }
                true
            };
            let shortest_from = |min: usize, max: usize| {
                (min..=max).find(|&n| connectors[n].iter().any(&joins))
            };
            let l0 = shortest_from(0, gap).ok_or_else(|| DiagramError::SpecificationViolation {
                x: x.clone(),
                y: y.clone(),
                gap,
            })?;
            let l1 = shortest_from(1, gap_positive).ok_or_else(|| DiagramError::SpecificationViolation {
                x: x.clone(),
                y: y.clone(),
                gap: gap_positive,
            })?;
            observed = observed.max(l0);
            observed_positive = observed_positive.max(l1);
        }
    }
    Ok(SpecificationCertificate {
        gap,
        gap_positive,
        test_len,
        pairs_checked: words.len() * words.len(),
        observed,
        observed_positive,
    })
}

/// All words of length `n` over `{1..k}` in lexicographic order.
pub fn all_words(n: usize, k: usize) -> Vec<Word> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|p: Vec<Symbol>| {
                (1..=k as Symbol).map(move |s| {
                    let mut q = p.clone();
                    q.push(s);
                    q
                })
            })
            .collect();
    }
    out.into_iter().map(Word::new).collect()
}

/// Word of vertex symbols along a path of the diagram.
pub fn project_path<S: Scalar>(d: &MarkovDiagram<S>, path: &[usize]) -> Result<Word, DiagramError> {
    for (i, &v) in path.iter().enumerate() {
        if v >= d.len() {
            return Err(DiagramError::BrokenPath(i));
        }
        if let Some(&next) = path.get(i + 1) {
            if d.arrows[v].binary_search(&next).is_err() {
                return Err(DiagramError::BrokenPath(i));
            }
        }
    }
    Ok(Word::new(path.iter().map(|&v| d.vertices[v].symbol).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval_map::{make_map, MapSpec};
    use crate::scalar::{Number, Rational};

    fn doubling() -> PiecewiseMonotonicMap<Rational> {
        make_map(&MapSpec::Beta { beta: Number::int(2) }).unwrap()
    }
    fn golden() -> PiecewiseMonotonicMap<f64> {
        make_map(&MapSpec::Beta { beta: Number::golden() }).unwrap()
    }
    fn mod_one() -> PiecewiseMonotonicMap<Rational> {
        make_map(&MapSpec::LinearModOne { beta: Number::ratio(9, 5), alpha: Number::ratio(3, 10) }).unwrap()
    }

    #[test]
    fn doubling_diagram_is_two_roots() {
        let d = build_diagram(&doubling(), 3).unwrap();
        assert_eq!(d.len(), 2);
        assert!(d.saturated);
        assert_eq!(d.arrows, vec![vec![0, 1], vec![0, 1]]);
        let core = irreducible_core(&d).unwrap();
        assert_eq!(spectral_radius_entropy(&core).unwrap(), 2f64.ln());
    }

    #[test]
    fn golden_diagram_is_golden_mean_shift() {
        let d = build_diagram(&golden(), 4).unwrap();
        assert!(d.saturated);
        assert_eq!(d.arrows, vec![vec![0, 1], vec![0]]);
        let core = irreducible_core(&d).unwrap();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((spectral_radius_entropy(&core).unwrap() - phi.ln()).abs() < 1e-11);
        assert_eq!(project_path(&d, &[0, 1, 0]).unwrap().symbols(), &[1, 2, 1]);
        assert_eq!(project_path(&d, &[1]).unwrap().symbols(), &[2]);
        assert_eq!(project_path(&d, &[1, 1]), Err(DiagramError::BrokenPath(0)));
    }

    #[test]
    fn float_mode_needs_tolerance() {
        let opts = DiagramOptions { dedup_tol: None, ..DiagramOptions::with_depth(3) };
        assert_eq!(build_diagram_with(&golden(), &opts), Err(DiagramError::ArithmeticMode));
        assert!(build_diagram_with(&doubling(), &DiagramOptions { dedup_tol: None, ..opts }).is_ok());
    }

    #[test]
    fn mod_one_diagram_keeps_growing() {
        let t = mod_one();
        let sizes: Vec<usize> = (4..=8).map(|n| build_diagram(&t, n).unwrap().len()).collect();
        assert!(sizes.windows(2).all(|w| w[1] > w[0]), "{sizes:?}");
        assert!(!build_diagram(&t, 8).unwrap().saturated);
    }

    #[test]
    fn truncation_matches_shallow_build() {
        let t = mod_one();
        let deep = build_diagram(&t, 10).unwrap();
        for n in [0, 3, 6, 10] {
            assert_eq!(deep.truncate(n), build_diagram(&t, n).unwrap());
        }
    }

    #[test]
    fn no_cycle_at_depth_zero() {
        // branch 1 maps onto I_2, branch 2 maps into a strict part of I_1
        let spec = MapSpec::AffinePieces {
            endpoints: vec![Number::int(0), Number::ratio(1, 2), Number::int(1)],
            slopes: vec![Number::int(1), Number::ratio(1, 2)],
            intercepts: vec![Number::ratio(1, 2), Number::ratio(-1, 4)],
            boundary_images: None,
        };
        let t: PiecewiseMonotonicMap<Rational> = make_map(&spec).unwrap();
        let d = build_diagram(&t, 0).unwrap();
        assert_eq!(irreducible_core(&d), Err(DiagramError::NoCycle));
    }

    #[test]
    fn specification_gaps() {
        let d = build_diagram(&doubling(), 3).unwrap();
        let c = specification_gap(&irreducible_core(&d).unwrap(), 4).unwrap();
        assert_eq!((c.gap, c.gap_positive, c.observed), (0, 1, 0));

        let g = build_diagram(&golden(), 4).unwrap();
        let c = specification_gap(&irreducible_core(&g).unwrap(), 6).unwrap();
        assert_eq!((c.gap, c.observed), (1, 1));
        assert_eq!(c.pairs_checked, 52 * 52);

        let two = g.subdiagram(&[0, 1]);
        let mut broken = two.clone();
        broken.adj = vec![vec![0, 1], vec![1]];
        assert_eq!(specification_gap(&broken, 3), Err(DiagramError::NotStronglyConnected));
        let mut swap = two.clone();
        swap.adj = vec![vec![1], vec![0]];
        assert!(swap.is_strongly_connected());
    }

    #[test]
    fn language_matches_cylinder_counts() {
        let g = build_diagram(&golden(), 4).unwrap();
        let core = irreducible_core(&g).unwrap();
        let counts: Vec<usize> = (1..=6).map(|n| core.language(n, 2).len()).collect();
        assert_eq!(counts, vec![2, 3, 5, 8, 13, 21]);
    }

    #[test]
    fn dot_and_csv_exports() {
        let d = build_diagram(&doubling(), 2).unwrap();
        let dot = d.to_dot();
        assert!(dot.contains("label=\"1:[0,1/2]@0\""));
        assert!(dot.contains("v1 -> v0;"));
        assert_eq!(d.edges_csv().lines().count(), 5);
        assert!(d.vertices_csv().contains("0,1,0,1/2,0,2"));
    }
}
