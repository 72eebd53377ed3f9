//! Periodic orbits, observables, Birkhoff averages and maximal-entropy
//! Markov measures on finite subdiagrams.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;

use crate::diagram::{DiagramError, SubDiagram};
use crate::interval_map::{MapError, PiecewiseMonotonicMap, Symbol};
use crate::linalg;
use crate::scalar::{render, Number, NumberError, Scalar, EPS};
use crate::symbolic::{cylinder_interval, FollowerWalker, SymbolicError, Word};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeasureError {
    #[error(transparent)]
    Symbolic(#[from] SymbolicError),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Diagram(#[from] DiagramError),
    #[error("word `{0}` is not admissible")]
    Inadmissible(Word),
    #[error("inverse-branch composition along `{0}` has no fixed point in its cylinder")]
    NoFixedPoint(Word),
    #[error("realized orbit of `{0}` does not reproduce its itinerary")]
    VerificationFailed(Word),
    #[error("no periodic orbits found")]
    NoPeriodicOrbits,
    #[error("symbolic observable needs {needed} symbols, got {got}")]
    ShortWord { needed: usize, got: usize },
    #[error("cannot parse observable `{0}`")]
    BadObservable(String),
}

impl From<NumberError> for MeasureError {
    fn from(e: NumberError) -> Self {
        MeasureError::BadObservable(e.to_string())
    }
}

/// A continuous observable on `[0,1]` or a locally constant one on the coding space.
#[derive(Debug, Clone, PartialEq)]
pub enum Observable<S> {
    /// `φ(x) = x`.
    Identity,
    /// Linear interpolation through nodes sorted by `x`, constant beyond the end nodes.
    PiecewiseLinear(Vec<(S, S)>),
    /// Value determined by the first `depth` symbols; words absent from the table take `default`.
    Symbolic { depth: usize, table: BTreeMap<Word, S>, default: S },
}

impl<S: Scalar> Observable<S> {
    /// Indicator of the cylinder `[w]`.
    pub fn indicator(w: Word) -> Self {
        let depth = w.len();
        Observable::Symbolic { depth, table: BTreeMap::from([(w, S::one())]), default: S::zero() }
    }

    pub fn constant(c: S) -> Self {
        Observable::PiecewiseLinear(vec![(S::zero(), c)])
    }

    pub fn is_symbolic(&self) -> bool {
        matches!(self, Observable::Symbolic { .. })
    }

    /// Number of leading symbols a symbolic observable reads (0 for real observables).
    pub fn depth(&self) -> usize {
        match self {
            Observable::Symbolic { depth, .. } => *depth,
            _ => 0,
        }
    }

    /// Value at a point; `None` for symbolic observables.
    pub fn at_point(&self, x: &S) -> Option<S> {
        match self {
            Observable::Identity => Some(x.clone()),
            Observable::PiecewiseLinear(nodes) => {
                let (first, last) = (&nodes[0], &nodes[nodes.len() - 1]);
                if *x <= first.0 {
                    return Some(first.1.clone());
                }
                if *x >= last.0 {
                    return Some(last.1.clone());
                }
                let i = nodes.partition_point(|(nx, _)| nx <= x) - 1;
                let ((x0, y0), (x1, y1)) = (&nodes[i], &nodes[i + 1]);
                Some(y0.clone() + (y1.clone() - y0.clone()) * (x.clone() - x0.clone()) / (x1.clone() - x0.clone()))
            }
            Observable::Symbolic { .. } => None,
        }
    }

    /// Value on a symbol sequence starting with `symbols`; `None` for real observables.
    pub fn on_symbols(&self, symbols: &[Symbol]) -> Option<Result<S, MeasureError>> {
        match self {
            Observable::Symbolic { depth, table, default } => Some(if symbols.len() < *depth {
                Err(MeasureError::ShortWord { needed: *depth, got: symbols.len() })
            } else {
                Ok(table.get(&Word::from(&symbols[..*depth])).unwrap_or(default).clone())
            }),
            _ => None,
        }
    }

    /// `(min, max)` of the observable over `[0,1]` or over all words.
    pub fn range(&self) -> (f64, f64) {
        let fold = |it: &mut dyn Iterator<Item = f64>| {
            it.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
        };
        match self {
            Observable::Identity => (0.0, 1.0),
            Observable::PiecewiseLinear(nodes) => fold(&mut nodes.iter().map(|(_, y)| y.to_f64())),
            Observable::Symbolic { table, default, .. } => {
                fold(&mut table.values().chain(std::iter::once(default)).map(Scalar::to_f64))
            }
        }
    }

    pub fn to_float(&self) -> Observable<f64> {
        match self {
            Observable::Identity => Observable::Identity,
            Observable::PiecewiseLinear(nodes) => {
                Observable::PiecewiseLinear(nodes.iter().map(|(x, y)| (x.to_f64(), y.to_f64())).collect())
            }
            Observable::Symbolic { depth, table, default } => Observable::Symbolic {
                depth: *depth,
                table: table.iter().map(|(w, v)| (w.clone(), v.to_f64())).collect(),
                default: default.to_f64(),
            },
        }
    }

    /// Parses `x`, `indicator:<word>`, `const:<c>` or `pl:x0:y0,x1:y1,…`.
    pub fn parse(s: &str) -> Result<Self, MeasureError> {
        let s = s.trim();
        let bad = || MeasureError::BadObservable(s.to_string());
        if s == "x" {
            return Ok(Observable::Identity);
        }
        if let Some(w) = s.strip_prefix("indicator:") {
            let word: Word = w.parse().map_err(|_| bad())?;
            if word.is_empty() {
                return Err(bad());
            }
            return Ok(Self::indicator(word));
        }
        if let Some(c) = s.strip_prefix("const:") {
            return Ok(Self::constant(c.parse::<Number>()?.to_scalar()?));
        }
        if let Some(list) = s.strip_prefix("pl:") {
            let mut nodes = Vec::new();
            for pair in list.split(',') {
                let (x, y) = pair.split_once(':').ok_or_else(bad)?;
                nodes.push((x.parse::<Number>()?.to_scalar::<S>()?, y.parse::<Number>()?.to_scalar::<S>()?));
            }
            if nodes.is_empty() || !nodes.windows(2).all(|w| w[0].0 < w[1].0) {
                return Err(bad());
            }
            return Ok(Observable::PiecewiseLinear(nodes));
        }
        Err(bad())
    }
}

impl<S: Scalar> FromStr for Observable<S> {
    type Err = MeasureError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

impl<S: Scalar> fmt::Display for Observable<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Observable::Identity => write!(f, "x"),
            Observable::PiecewiseLinear(nodes) if nodes.len() == 1 => write!(f, "const:{}", render(&nodes[0].1)),
            Observable::PiecewiseLinear(nodes) => {
                let parts: Vec<String> = nodes.iter().map(|(x, y)| format!("{}:{}", render(x), render(y))).collect();
                write!(f, "pl:{}", parts.join(","))
            }
            Observable::Symbolic { table, default, .. } if table.len() == 1 && default.is_zero_value() => {
                let (w, v) = table.iter().next().expect("one entry");
                if *v == S::one() {
                    write!(f, "indicator:{w}")
                } else {
                    write!(f, "symbolic[{w}→{}]", render(v))
                }
            }
            Observable::Symbolic { depth, .. } => write!(f, "symbolic(depth {depth})"),
        }
    }
}

/// A realized periodic orbit of primitive period `p = |word|`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicOrbit<S> {
    pub word: Word,
    pub point: S,
    /// `point, T point, …, T^{p-1} point` along the branches of `word`.
    pub orbit: Vec<S>,
    /// Some orbit point is a partition endpoint.
    pub boundary: bool,
}

impl<S: Scalar> PeriodicOrbit<S> {
    pub fn period(&self) -> usize {
        self.word.len()
    }

    pub fn measure(&self) -> PeriodicMeasure<'_, S> {
        PeriodicMeasure { orbit: self }
    }
}

/// Uniform probability on a periodic orbit.
#[derive(Debug, Clone, Copy)]
pub struct PeriodicMeasure<'a, S> {
    pub orbit: &'a PeriodicOrbit<S>,
}

impl<S: Scalar> PeriodicMeasure<'_, S> {
    pub fn weight(&self) -> S {
        S::one() / S::from_int(self.orbit.period() as i64)
    }

    pub fn integral(&self, phi: &Observable<S>) -> Result<S, MeasureError> {
        integral(self.orbit, phi)
    }
}

/// `g_{w_1} ∘ … ∘ g_{w_p}` for affine branches as `y ↦ a y + b`.
fn affine_inverse_composition<S: Scalar>(map: &PiecewiseMonotonicMap<S>, w: &Word) -> (S, S) {
    let (mut a, mut b) = (S::one(), S::zero());
    for &s in w.symbols().iter().rev() {
        let crate::interval_map::BranchKind::Affine { slope, intercept } = &map.branch(s).kind else {
            unreachable!("affine map")
        };
        a = a / slope.clone();
        b = (b - intercept.clone()) / slope.clone();
    }
    (a, b)
}

fn forward<S: Scalar>(map: &PiecewiseMonotonicMap<S>, w: &Word, x: &S) -> S {
    w.symbols().iter().fold(x.clone(), |y, &s| map.branch(s).eval(&y))
}

fn fixed_point<S: Scalar>(map: &PiecewiseMonotonicMap<S>, w: &Word) -> Result<S, MeasureError> {
    let cyl = cylinder_interval(map, w);
    if cyl.is_empty() {
        return Err(MeasureError::Inadmissible(w.clone()));
    }
    let none = || MeasureError::NoFixedPoint(w.clone());
    let x = if map.is_affine() {
        let (a, b) = affine_inverse_composition(map, w);
        if a == S::one() {
            return Err(none());
        }
        b / (S::one() - a)
    } else {
        // displacement F(x) - x on the closed cylinder, F the forward composition
        let disp = |x: &S| forward(map, w, x) - x.clone();
        let (mut lo, mut hi) = (cyl.lo.clone(), cyl.hi.clone());
        let (mut dlo, dhi) = (disp(&lo), disp(&hi));
        if dlo.is_zero_value() && S::EXACT {
            return Ok(lo);
        }
        if (dlo > S::zero()) == (dhi > S::zero()) && !dhi.is_zero_value() && !dlo.is_zero_value() {
            return Err(none());
        }
        let mut found = None;
        for _ in 0..400 {
            let secant = lo.clone() - dlo.clone() * (hi.clone() - lo.clone()) / (disp(&hi) - dlo.clone());
            if secant >= lo && secant <= hi && disp(&secant).near(&S::zero(), 1e-15) {
                found = Some(secant);
                break;
            }
            let mid = (lo.clone() + hi.clone()) / S::from_int(2);
            let dm = disp(&mid);
            if (dm > S::zero()) == (dlo > S::zero()) {
                lo = mid;
                dlo = dm;
            } else {
                hi = mid;
            }
            if !S::EXACT && hi.to_f64() - lo.to_f64() < 1e-15 {
                break;
            }
        }
        found.unwrap_or_else(|| (lo + hi) / S::from_int(2))
    };
    if !cyl.contains_approx(&x, EPS) {
        return Err(none());
    }
    Ok(x)
}

/// Realizes the periodic point coded by `w^∞` as the fixed point of the
/// inverse-branch composition along `w`.
pub fn realize_periodic_point<S: Scalar>(
    map: &PiecewiseMonotonicMap<S>,
    w: &Word,
) -> Result<PeriodicOrbit<S>, MeasureError> {
    let point = fixed_point(map, w)?;
    let mut orbit = Vec::with_capacity(w.len());
    let mut y = point.clone();
    for &s in w.symbols() {
        orbit.push(y.clone());
        y = map.branch(s).eval(&y);
    }
    let tol = if S::EXACT { 0.0 } else { 1e-9 };
    if !y.near(&point, tol) {
        return Err(MeasureError::VerificationFailed(w.clone()));
    }
    let boundary = orbit.iter().any(|x| map.is_endpoint(x));
    if !boundary {
        let it = map.itinerary(&point, 3 * w.len()).map_err(|_| MeasureError::VerificationFailed(w.clone()))?;
        if it != w.repeat(3) {
            return Err(MeasureError::VerificationFailed(w.clone()));
        }
        let back = map.iterate_orbit(&point, w.len() + 1)?;
        if !back.points[w.len()].near(&point, tol) {
            return Err(MeasureError::VerificationFailed(w.clone()));
        }
    }
    Ok(PeriodicOrbit { word: w.clone(), point, orbit, boundary })
}

/// Primitive admissible words of length `≤ max_period`, least rotation kept,
/// in lexicographic order (not yet checked for a realizable periodic point).
pub fn candidate_words<S: Scalar>(
    map: &PiecewiseMonotonicMap<S>,
    max_period: usize,
    budget: u64,
) -> Result<Vec<Word>, MeasureError> {
    let mut out = Vec::new();
    let mut visited = 0u64;
    fn rec<S: Scalar>(
        walker: &FollowerWalker<'_, S>,
        prefix: &mut Vec<Symbol>,
        k: usize,
        max: usize,
        out: &mut Vec<Word>,
        visited: &mut u64,
        budget: u64,
    ) -> Result<(), SymbolicError> {
        for a in 1..=k as Symbol {
            let mut next = walker.clone();
            if !next.push(a) {
                continue;
            }
            *visited += 1;
            if *visited > budget {
                return Err(SymbolicError::BudgetExceeded { budget });
            }
            prefix.push(a);
            let w = Word::new(prefix.clone());
            if w.is_primitive() && w.least_rotation() == w {
                out.push(w);
            }
            if prefix.len() < max {
                rec(&next, prefix, k, max, out, visited, budget)?;
            }
            prefix.pop();
        }
        Ok(())
    }
    rec(&FollowerWalker::new(map), &mut Vec::new(), map.k(), max_period, &mut out, &mut visited, budget)?;
    Ok(out)
}

/// All primitive words of length `≤ max_period` (least rotation) that code a
/// genuine periodic point, in lexicographic order, with boundary flags.
pub fn periodic_catalog<S: Scalar>(
    map: &PiecewiseMonotonicMap<S>,
    max_period: usize,
    budget: u64,
) -> Result<Vec<PeriodicOrbit<S>>, MeasureError> {
    let words = candidate_words(map, max_period, budget)?;
    let results: Vec<Result<PeriodicOrbit<S>, MeasureError>> =
        words.par_iter().map(|w| realize_periodic_point(map, w)).collect();
    let mut out = Vec::new();
    for r in results {
        match r {
            Ok(o) => out.push(o),
            Err(MeasureError::NoFixedPoint(_) | MeasureError::Inadmissible(_)) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Words of the catalog.
pub fn find_periodic_words<S: Scalar>(
    map: &PiecewiseMonotonicMap<S>,
    max_period: usize,
    budget: u64,
) -> Result<Vec<Word>, MeasureError> {
    Ok(periodic_catalog(map, max_period, budget)?.into_iter().map(|o| o.word).collect())
}

/// Average of a symbolic observable over the shifts of `w^∞`.
pub fn symbolic_periodic_average<S: Scalar>(w: &Word, phi: &Observable<S>) -> Result<S, MeasureError> {
    let p = w.len();
    let m = phi.depth();
    let long = w.repeat(1 + m.div_ceil(p.max(1)));
    let mut sum = S::zero();
    for j in 0..p {
        sum = sum + phi.on_symbols(&long.symbols()[j..]).expect("symbolic")?;
    }
    Ok(sum / S::from_int(p as i64))
}

/// `∫ φ dμ` for the periodic measure on `orbit`. Symbolic observables are
/// evaluated on the periodic code itself.
pub fn integral<S: Scalar>(orbit: &PeriodicOrbit<S>, phi: &Observable<S>) -> Result<S, MeasureError> {
    if phi.is_symbolic() {
        return symbolic_periodic_average(&orbit.word, phi);
    }
    let sum = orbit.orbit.iter().fold(S::zero(), |acc, x| acc + phi.at_point(x).expect("real observable"));
    Ok(sum / S::from_int(orbit.period() as i64))
}

/// `(1/n) Σ_{j<n} φ(T^j x)`.
pub fn birkhoff_average<S: Scalar>(
    map: &PiecewiseMonotonicMap<S>,
    x: &S,
    phi: &Observable<S>,
    n: usize,
) -> Result<S, MeasureError> {
    if n == 0 {
        return Ok(S::zero());
    }
    let mut sum = S::zero();
    if phi.is_symbolic() {
        let it = map.itinerary(x, n + phi.depth() - 1)?;
        for j in 0..n {
            sum = sum + phi.on_symbols(&it.symbols()[j..]).expect("symbolic")?;
        }
    } else {
        for y in map.iterate_orbit(x, n)?.points {
            sum = sum + phi.at_point(&y).expect("real observable");
        }
    }
    Ok(sum / S::from_int(n as i64))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spread<S> {
    pub min: S,
    pub max: S,
    pub argmin: Word,
    pub argmax: Word,
    /// Number of periodic measures compared.
    pub measures: usize,
}

impl<S: Scalar> Spread<S> {
    pub fn width(&self) -> S {
        self.max.clone() - self.min.clone()
    }
}

/// Smallest and largest periodic integral of `φ` over realized orbits of
/// period `≤ max_period`. Boundary orbits are skipped for real observables
/// (their points lie outside the continuity set) but kept for symbolic ones,
/// whose value only depends on the code.
pub fn average_spread<S: Scalar>(
    map: &PiecewiseMonotonicMap<S>,
    phi: &Observable<S>,
    max_period: usize,
    budget: u64,
) -> Result<Spread<S>, MeasureError> {
    let catalog = periodic_catalog(map, max_period, budget)?;
    spread_over(catalog.iter().filter(|o| phi.is_symbolic() || !o.boundary), phi)
}

/// Spread over an explicit set of orbits.
pub fn spread_over<'a, S: Scalar>(
    orbits: impl Iterator<Item = &'a PeriodicOrbit<S>>,
    phi: &Observable<S>,
) -> Result<Spread<S>, MeasureError> {
    let mut best: Option<Spread<S>> = None;
    for o in orbits {
        let v = integral(o, phi)?;
        best = Some(match best {
            None => Spread { min: v.clone(), max: v, argmin: o.word.clone(), argmax: o.word.clone(), measures: 1 },
            Some(mut s) => {
                if v < s.min {
                    s.min = v.clone();
                    s.argmin = o.word.clone();
                }
                if v > s.max {
                    s.max = v;
                    s.argmax = o.word.clone();
                }
                s.measures += 1;
                s
            }
        });
    }
    best.ok_or(MeasureError::NoPeriodicOrbits)
}

/// Maximal-entropy Markov chain on a strongly connected subdiagram.
#[derive(Debug, Clone)]
pub struct StationaryMarkovMeasure {
    pub rho: f64,
    /// Row-stochastic transition weights, supported on arrows (local indices).
    pub transition: Vec<Vec<(usize, f64)>>,
    pub stationary: Vec<f64>,
}

impl StationaryMarkovMeasure {
    /// `-Σ π_D P_DC log P_DC`.
    pub fn entropy(&self) -> f64 {
        let mut h = 0.0;
        for (d, row) in self.transition.iter().enumerate() {
            for &(_, p) in row {
                if p > 0.0 {
                    h -= self.stationary[d] * p * p.ln();
                }
            }
        }
        h
    }

    /// Visits every path of `n` vertices with its probability.
    pub fn for_each_path(&self, n: usize, mut f: impl FnMut(&[usize], f64)) {
        fn rec(m: &StationaryMarkovMeasure, path: &mut Vec<usize>, p: f64, n: usize, f: &mut dyn FnMut(&[usize], f64)) {
            if path.len() == n {
                f(path, p);
                return;
            }
            let last = *path.last().expect("nonempty");
            for &(c, q) in &m.transition[last] {
                path.push(c);
                rec(m, path, p * q, n, f);
                path.pop();
            }
        }
        for (v, &pi) in self.stationary.iter().enumerate() {
            rec(self, &mut vec![v], pi, n.max(1), &mut f);
        }
    }

    /// Number of paths with `n` vertices.
    pub fn path_count(&self, n: usize) -> f64 {
        let mut counts = vec![1.0; self.stationary.len()];
        for _ in 1..n {
            counts = self.transition.iter().map(|row| row.iter().map(|&(c, _)| counts[c]).sum()).collect();
        }
        counts.iter().sum()
    }
}

/// `P_DC = M_DC r_C / (ρ r_D)`, stationary vector `π_D ∝ l_D r_D`.
pub fn parry_measure<S: Scalar>(s: &SubDiagram<S>) -> Result<StationaryMarkovMeasure, MeasureError> {
    if !s.is_strongly_connected() {
        return Err(DiagramError::NotStronglyConnected.into());
    }
    let p = linalg::perron(&s.adj).map_err(DiagramError::from)?;
    let transition = s
        .adj
        .iter()
        .enumerate()
        .map(|(d, out)| out.iter().map(|&c| (c, p.right[c] / (p.rho * p.right[d]))).collect())
        .collect();
    let mut stationary: Vec<f64> = p.left.iter().zip(&p.right).map(|(l, r)| l * r).collect();
    let total: f64 = stationary.iter().sum();
    stationary.iter_mut().for_each(|v| *v /= total);
    Ok(StationaryMarkovMeasure { rho: p.rho, transition, stationary })
}

/// `∫ φ dm` for the maximal-entropy chain on `s`, pushed to the coding space.
/// Symbolic observables are integrated exactly over paths of their depth;
/// real observables are approximated at cylinder midpoints of paths of the
/// longest length whose path count stays below `max_paths`.
pub fn markov_integral<S: Scalar>(
    map: &PiecewiseMonotonicMap<S>,
    s: &SubDiagram<S>,
    m: &StationaryMarkovMeasure,
    phi: &Observable<S>,
    max_paths: usize,
) -> Result<f64, MeasureError> {
    let phi_f = phi.to_float();
    let mut err = None;
    let mut total = 0.0;
    if phi.is_symbolic() {
        m.for_each_path(phi.depth(), |path, p| {
            let syms: Vec<Symbol> = path.iter().map(|&v| s.vertices[v].symbol).collect();
            match phi_f.on_symbols(&syms).expect("symbolic") {
                Ok(v) => total += p * v,
                Err(e) => err = Some(e),
            }
        });
    } else {
        let mut n = 1;
        while n < 64 && m.path_count(n + 1) <= max_paths as f64 {
            n += 1;
        }
        let fmap = map.to_float();
        m.for_each_path(n, |path, p| {
            let w = Word::new(path.iter().map(|&v| s.vertices[v].symbol).collect());
            let cyl = cylinder_interval(&fmap, &w);
            if !cyl.is_empty() {
                total += p * phi_f.at_point(&cyl.midpoint()).expect("real observable");
            }
        });
    }
    match err {
        Some(e) => Err(e),
        None => Ok(total),
    }
}

/// Primitive least-rotation words `w`, `|w| ≤ max_len`, such that `w^∞` labels
/// a closed walk of `s`.
pub fn closed_walk_words<S: Scalar>(s: &SubDiagram<S>, max_len: usize) -> Vec<Word> {
    let k = s.alphabet_size();
    let mut out = Vec::new();
    for n in 1..=max_len {
        for w in s.language(n, k) {
            if w.is_primitive() && w.least_rotation() == w && has_closed_walk(s, &w) {
                out.push(w);
            }
        }
    }
    out.sort();
    out
}

/// Some vertex `v` starts a walk labelled `w` that returns to `v`.
pub fn has_closed_walk<S: Scalar>(s: &SubDiagram<S>, w: &Word) -> bool {
    let syms = w.symbols();
    (0..s.len()).filter(|&v| s.vertices[v].symbol == syms[0]).any(|v| {
        let mut set = vec![v];
        for &c in &syms[1..] {
            set = s.step(Some(&set), c);
            if set.is_empty() {
                return false;
            }
        }
        set.iter().any(|&u| s.adj[u].contains(&v))
    })
}

/// One closed walk labelled `w` (local vertex indices, start vertex not repeated).
pub fn closed_walk<S: Scalar>(s: &SubDiagram<S>, w: &Word) -> Option<Vec<usize>> {
    let syms = w.symbols();
    for v in (0..s.len()).filter(|&v| s.vertices[v].symbol == syms[0]) {
        // layered search keeping parents
        let mut layers: Vec<Vec<(usize, usize)>> = vec![vec![(v, usize::MAX)]];
        for &c in &syms[1..] {
            let prev = layers.last().expect("layer");
            let mut next: Vec<(usize, usize)> = Vec::new();
            for (pi, &(u, _)) in prev.iter().enumerate() {
                for &x in &s.adj[u] {
                    if s.vertices[x].symbol == c && !next.iter().any(|&(y, _)| y == x) {
                        next.push((x, pi));
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            layers.push(next);
        }
        if layers.len() != syms.len() {
            continue;
        }
        let last = layers.last().expect("layer");
        if let Some(mut pi) = last.iter().position(|&(u, _)| s.adj[u].contains(&v)) {
            let mut walk = Vec::with_capacity(syms.len());
            for layer in layers.iter().rev() {
                let (u, parent) = layer[pi];
                walk.push(u);
                pi = parent;
            }
            walk.reverse();
            return Some(walk);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::{build_diagram, irreducible_core};
    use crate::interval_map::{make_map, MapSpec};
    use crate::scalar::Rational;
    use crate::symbolic::DEFAULT_BUDGET;

    fn q(p: i64, d: i64) -> Rational {
        Rational::from_ratio(p, d)
    }
    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }
    fn doubling() -> PiecewiseMonotonicMap<Rational> {
        make_map(&MapSpec::Beta { beta: Number::int(2) }).unwrap()
    }
    fn golden() -> PiecewiseMonotonicMap<f64> {
        make_map(&MapSpec::Beta { beta: Number::golden() }).unwrap()
    }
    const BETA: f64 = 1.618_033_988_749_895;

    #[test]
    fn observables_parse_and_evaluate() {
        let phi: Observable<Rational> = "pl:0:0,1/2:1,1:0".parse().unwrap();
        assert_eq!(phi.at_point(&q(1, 4)), Some(q(1, 2)));
        assert_eq!(phi.at_point(&q(3, 4)), Some(q(1, 2)));
        assert_eq!(phi.range(), (0.0, 1.0));
        let ind: Observable<Rational> = "indicator:12".parse().unwrap();
        assert_eq!(ind.on_symbols(&[1, 2, 2]).unwrap().unwrap(), q(1, 1));
        assert_eq!(ind.on_symbols(&[2, 1]).unwrap().unwrap(), q(0, 1));
        assert!(ind.on_symbols(&[1]).unwrap().is_err());
        assert_eq!(ind.to_string(), "indicator:12");
        assert!("pl:1:0,0:1".parse::<Observable<Rational>>().is_err());
        assert!("sin".parse::<Observable<Rational>>().is_err());
        assert_eq!("const:3/2".parse::<Observable<Rational>>().unwrap().at_point(&q(0, 1)), Some(q(3, 2)));
    }

    #[test]
    fn doubling_orbits_are_exact() {
        let t = doubling();
        let o = realize_periodic_point(&t, &w("12")).unwrap();
        assert_eq!(o.orbit, vec![q(1, 3), q(2, 3)]);
        assert!(!o.boundary);
        let o = realize_periodic_point(&t, &w("112")).unwrap();
        assert_eq!(o.orbit, vec![q(1, 7), q(2, 7), q(4, 7)]);
        let o = realize_periodic_point(&t, &w("2")).unwrap();
        assert_eq!(o.point, q(1, 1));
        assert!(o.boundary);
    }

    #[test]
    fn doubling_catalog() {
        let t = doubling();
        let cat = periodic_catalog(&t, 3, DEFAULT_BUDGET).unwrap();
        let words: Vec<String> = cat.iter().map(|o| o.word.to_string()).collect();
        assert_eq!(words, vec!["1", "112", "12", "122", "2"]);
        assert_eq!(cat.iter().filter(|o| !o.boundary).count(), 3);
        let phi = Observable::Identity;
        let s = average_spread(&t, &phi, 3, DEFAULT_BUDGET).unwrap();
        assert_eq!((s.min, s.max), (q(1, 3), q(2, 3)));
        assert_eq!((s.argmin, s.argmax), (w("112"), w("122")));
        let one = Observable::constant(q(1, 1));
        let s = average_spread(&t, &one, 3, DEFAULT_BUDGET).unwrap();
        assert_eq!(s.width(), q(0, 1));
    }

    #[test]
    fn golden_orbits() {
        let g = golden();
        let o = realize_periodic_point(&g, &w("12")).unwrap();
        assert!((o.point - 1.0 / (BETA * BETA - 1.0)).abs() < 1e-14);
        assert!(o.boundary);
        assert!(matches!(realize_periodic_point(&g, &w("2")), Err(MeasureError::NoFixedPoint(_))));
        let o = realize_periodic_point(&g, &w("112")).unwrap();
        assert!((o.point - 1.0 / (2.0 * BETA)).abs() < 1e-14);
        assert!(!o.boundary);
        let words = find_periodic_words(&g, 3, DEFAULT_BUDGET).unwrap();
        assert!(words.iter().all(|x| !x.repeat(2).symbols().windows(2).any(|p| p == [2, 2])));
        assert_eq!(words, vec![w("1"), w("112"), w("12")]);
    }

    #[test]
    fn golden_symbolic_spread_uses_codes() {
        let g = golden();
        let phi = Observable::indicator(w("2"));
        let s = average_spread(&g, &phi, 4, DEFAULT_BUDGET).unwrap();
        assert_eq!((s.min, s.max), (0.0, 0.5));
        assert_eq!((s.argmin, s.argmax), (w("1"), w("12")));
    }

    #[test]
    fn integrals_and_birkhoff() {
        let t = doubling();
        let third = realize_periodic_point(&t, &w("12")).unwrap();
        assert_eq!(integral(&third, &Observable::Identity).unwrap(), q(1, 2));
        assert_eq!(integral(&third, &Observable::indicator(w("1"))).unwrap(), q(1, 2));
        assert_eq!(third.measure().weight(), q(1, 2));
        assert_eq!(birkhoff_average(&t, &q(1, 3), &Observable::Identity, 3).unwrap(), q(4, 9));
        assert_eq!(birkhoff_average(&t, &q(1, 7), &Observable::Identity, 9).unwrap(), q(1, 3));
        assert_eq!(birkhoff_average(&t, &q(1, 3), &Observable::indicator(w("12")), 4).unwrap(), q(1, 2));
        assert!(birkhoff_average(&t, &q(1, 4), &Observable::indicator(w("1")), 3).is_err());
    }

    #[test]
    fn parry_examples() {
        let d = build_diagram(&doubling(), 2).unwrap();
        let m = parry_measure(&irreducible_core(&d).unwrap()).unwrap();
        assert!(m.transition.iter().flatten().all(|&(_, p)| (p - 0.5).abs() < 1e-12));
        assert!((m.entropy() - 2f64.ln()).abs() < 1e-10);

        let g = build_diagram(&golden(), 4).unwrap();
        let core = irreducible_core(&g).unwrap();
        let m = parry_measure(&core).unwrap();
        assert!((m.entropy() - BETA.ln()).abs() < 1e-10);
        // stationary law of the golden-mean Parry measure: (β²/(1+β²), 1/(1+β²))
        assert!((m.stationary[0] - BETA * BETA / (1.0 + BETA * BETA)).abs() < 1e-10);
        let ind = Observable::indicator(w("2"));
        let v = markov_integral(&golden(), &core, &m, &ind, 10_000).unwrap();
        assert!((v - 1.0 / (1.0 + BETA * BETA)).abs() < 1e-10);

        let loop_only = SubDiagram { vertices: vec![g.vertices[0].clone()], parent_index: vec![0], adj: vec![vec![0]] };
        assert!(parry_measure(&loop_only).unwrap().entropy().abs() < 1e-15);
    }

    #[test]
    fn closed_walks_in_golden_core() {
        let g = build_diagram(&golden(), 4).unwrap();
        let core = irreducible_core(&g).unwrap();
        let words = closed_walk_words(&core, 4);
        let names: Vec<String> = words.iter().map(|x| x.to_string()).collect();
        assert_eq!(names, vec!["1", "1112", "112", "12"]);
        assert_eq!(closed_walk(&core, &w("12")), Some(vec![0, 1]));
    }
}
