//! Graph and Perron–Frobenius routines on 0/1 adjacency lists.

use std::collections::VecDeque;

use thiserror::Error;

/// Relative width of the Collatz–Wielandt bracket at which power iteration stops.
pub const PERRON_TOL: f64 = 1e-12;
pub const PERRON_MAX_ITER: usize = 100_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("graph has no cycle")]
    NoCycle,
    #[error("power iteration did not converge after {iterations} iterations (last quotients {last:?})")]
    NonConvergence { iterations: usize, last: (f64, f64) },
}

/// Strongly connected components (Tarjan, iterative). Components come out in
/// reverse topological order; vertices inside a component are sorted.
pub fn tarjan_scc(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = adj.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut out = Vec::new();
    let mut next = 0usize;
    let mut call: Vec<(usize, usize)> = Vec::new();
    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        call.push((root, 0));
        while let Some(&mut (v, ref mut i)) = call.last_mut() {
            if *i == 0 && index[v] == usize::MAX {
                index[v] = next;
                low[v] = next;
                next += 1;
                stack.push(v);
                on_stack[v] = true;
            }
            if let Some(&w) = adj[v].get(*i) {
                *i += 1;
                if index[w] == usize::MAX {
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                let mut comp = Vec::new();
                loop {
                    let w = stack.pop().expect("tarjan stack");
                    on_stack[w] = false;
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                comp.sort_unstable();
                out.push(comp);
            }
        }
    }
    out
}

/// A component carries a cycle iff it has two vertices or a self-loop.
pub fn is_cyclic(comp: &[usize], adj: &[Vec<usize>]) -> bool {
    comp.len() > 1 || adj[comp[0]].contains(&comp[0])
}

/// Adjacency of the subgraph induced on `vertices` (in the given order).
pub fn induced(adj: &[Vec<usize>], vertices: &[usize]) -> Vec<Vec<usize>> {
    let mut pos = vec![usize::MAX; adj.len()];
    for (i, &v) in vertices.iter().enumerate() {
        pos[v] = i;
    }
    vertices
        .iter()
        .map(|&v| adj[v].iter().filter(|&&w| pos[w] != usize::MAX).map(|&w| pos[w]).collect())
        .collect()
}

/// Perron data of an irreducible 0/1 matrix.
#[derive(Debug, Clone)]
pub struct Perron {
    pub rho: f64,
    /// Right eigenvector, normalised to sum 1.
    pub right: Vec<f64>,
    /// Left eigenvector, normalised so that `⟨left, right⟩ = 1`.
    pub left: Vec<f64>,
    pub iterations: usize,
}

fn power_iterate(n: usize, apply: impl Fn(&[f64], &mut [f64])) -> Result<(f64, Vec<f64>, usize), LinalgError> {
    // iterate B = A + I, which is primitive when A is irreducible
    let mut x = vec![1.0 / n as f64; n];
    let mut y = vec![0.0; n];
    let mut last = (f64::NAN, f64::NAN);
    for it in 1..=PERRON_MAX_ITER {
        apply(&x, &mut y);
        for i in 0..n {
            y[i] += x[i];
        }
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for i in 0..n {
            let q = y[i] / x[i];
            lo = lo.min(q);
            hi = hi.max(q);
        }
        last = (lo, hi);
        let s: f64 = y.iter().sum();
        for i in 0..n {
            x[i] = y[i] / s;
        }
        if hi - lo <= PERRON_TOL * hi {
            return Ok(((lo + hi) / 2.0 - 1.0, x, it));
        }
    }
    Err(LinalgError::NonConvergence { iterations: PERRON_MAX_ITER, last })
}

/// Perron root and vectors of an irreducible 0/1 matrix given by adjacency lists.
pub fn perron(adj: &[Vec<usize>]) -> Result<Perron, LinalgError> {
    let n = adj.len();
    if n == 0 || !is_cyclic(&(0..n).collect::<Vec<_>>(), adj) {
        return Err(LinalgError::NoCycle);
    }
    let (rho, right, it_r) = power_iterate(n, |x, y| {
        for (i, out) in adj.iter().enumerate() {
            y[i] = out.iter().map(|&j| x[j]).sum();
        }
    })?;
    let (_, mut left, it_l) = power_iterate(n, |x, y| {
        y.iter_mut().for_each(|v| *v = 0.0);
        for (i, out) in adj.iter().enumerate() {
            for &j in out {
                y[j] += x[i];
            }
        }
    })?;
    let dot: f64 = left.iter().zip(&right).map(|(a, b)| a * b).sum();
    left.iter_mut().for_each(|v| *v /= dot);
    Ok(Perron { rho, right, left, iterations: it_r.max(it_l) })
}

/// Spectral radius of an arbitrary 0/1 matrix: the maximum over cyclic
/// strongly connected components.
pub fn spectral_radius(adj: &[Vec<usize>]) -> Result<f64, LinalgError> {
    let mut best: Option<f64> = None;
    for comp in tarjan_scc(adj) {
        if !is_cyclic(&comp, adj) {
            continue;
        }
        let rho = if comp.len() == 1 { 1.0 } else { perron(&induced(adj, &comp))?.rho };
        best = Some(best.map_or(rho, |b: f64| b.max(rho)));
    }
    best.ok_or(LinalgError::NoCycle)
}

/// Characteristic polynomial `det(tI - A)` by Faddeev–LeVerrier, coefficients
/// from the constant term up (`c[n] = 1`).
pub fn characteristic_polynomial(adj: &[Vec<usize>]) -> Vec<i128> {
    let n = adj.len();
    let mut a = vec![vec![0i128; n]; n];
    for (i, out) in adj.iter().enumerate() {
        for &j in out {
            a[i][j] += 1;
        }
    }
    let mut c = vec![0i128; n + 1];
    c[n] = 1;
    let mut m = vec![vec![0i128; n]; n];
    for k in 1..=n {
        // M_k = A M_{k-1} + c_{n-k+1} I
        let mut next = vec![vec![0i128; n]; n];
        for i in 0..n {
            for l in 0..n {
                if a[i][l] != 0 {
                    for j in 0..n {
                        next[i][j] += a[i][l] * m[l][j];
                    }
                }
            }
            next[i][i] += c[n - k + 1];
        }
        m = next;
        let mut tr = 0i128;
        for i in 0..n {
            for l in 0..n {
                tr += a[i][l] * m[l][i];
            }
        }
        c[n - k] = -tr / k as i128;
    }
    c
}

fn poly_eval(c: &[i128], x: f64) -> (f64, f64) {
    let (mut p, mut dp) = (0.0, 0.0);
    for &coef in c.iter().rev() {
        dp = dp * x + p;
        p = p * x + coef as f64;
    }
    (p, dp)
}

/// Largest real root of the characteristic polynomial, snapped to an integer
/// when one is an exact root. Used for very small matrices.
pub fn spectral_radius_small(adj: &[Vec<usize>]) -> Result<f64, LinalgError> {
    let n = adj.len();
    let has_cycle = tarjan_scc(adj).iter().any(|c| is_cyclic(c, adj));
    if !has_cycle {
        return Err(LinalgError::NoCycle);
    }
    let c = characteristic_polynomial(adj);
    let max_row = adj.iter().map(|r| r.len()).max().unwrap_or(0);
    let x = newton_largest_root(&c, max_row as f64 + 1.0, n);
    let m = x.round();
    if (x - m).abs() < 1e-6 && c.iter().rev().fold(0i128, |p, &coef| p * m as i128 + coef) == 0 {
        return Ok(m);
    }
    Ok(x)
}

fn newton_largest_root(c: &[i128], start: f64, n: usize) -> f64 {
    // started right of every real root, Newton decreases monotonically to the largest one
    let mut x = start;
    for _ in 0..200 * n.max(1) {
        let (p, dp) = poly_eval(c, x);
        if dp == 0.0 {
            break;
        }
        let nx = x - p / dp;
        // stop once the iterates no longer decrease (or turn NaN)
        if nx.is_nan() || nx >= x {
            break;
        }
        x = nx;
    }
    x
}

/// Breadth-first distances (in edges) from `src`; `dist[src] = 0`.
pub fn bfs(adj: &[Vec<usize>], src: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; adj.len()];
    dist[src] = Some(0);
    let mut queue = VecDeque::from([src]);
    while let Some(v) = queue.pop_front() {
        let d = dist[v].expect("visited");
        for &w in &adj[v] {
            if dist[w].is_none() {
                dist[w] = Some(d + 1);
                queue.push_back(w);
            }
        }
    }
    dist
}

/// A shortest path `src → dst` with at least one edge, as a vertex list
/// (ties broken by adjacency order).
pub fn shortest_path(adj: &[Vec<usize>], src: usize, dst: usize) -> Option<Vec<usize>> {
    let mut parent = vec![usize::MAX; adj.len()];
    let mut seen = vec![false; adj.len()];
    let mut queue = VecDeque::new();
    for &w in &adj[src] {
        if !seen[w] {
            seen[w] = true;
            parent[w] = src;
            queue.push_back(w);
        }
    }
    while let Some(v) = queue.pop_front() {
        if v == dst {
            let mut path = vec![dst];
            let mut cur = dst;
            loop {
                cur = parent[cur];
                path.push(cur);
                if cur == src && path.len() > 1 {
                    break;
                }
            }
            path.reverse();
            return Some(path);
        }
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                parent[w] = v;
                queue.push_back(w);
            }
        }
    }
    None
}
