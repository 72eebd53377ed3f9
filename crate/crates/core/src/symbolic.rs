//! Words, cylinders and the language of the coding space.
//!
//! A word is admissible when its open cylinder
//! `{x : T^{j-1}x ∈ I_{w_j}, j ≤ |w|}` is nonempty. Cylinders are computed by
//! backward composition of inverse branches; the forward
//! [`FollowerWalker`] decides the same question by following the
//! successor rule of the Markov diagram, which makes it usable on very long
//! words.

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::interval::Interval;
use crate::interval_map::{PiecewiseMonotonicMap, Symbol};
use crate::scalar::{Scalar, DEDUP_TOL};

/// Default cap on visited nodes of a word-enumeration tree.
pub const DEFAULT_BUDGET: u64 = 1 << 24;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SymbolicError {
    #[error("enumeration budget of {budget} nodes exceeded")]
    BudgetExceeded { budget: u64 },
    #[error("prefix of length {0} is not admissible")]
    InadmissiblePrefix(usize),
    #[error("stream ends at {horizon} but {requested} symbols were requested")]
    BeyondHorizon { requested: usize, horizon: usize },
    #[error("cannot parse word `{0}`")]
    BadWord(String),
    #[error("word is empty")]
    EmptyWord,
}

/// A finite word over `{1..k}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Word(Vec<Symbol>);

impl Word {
    pub fn new(symbols: Vec<Symbol>) -> Self {
        Word(symbols)
    }

    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn first(&self) -> Option<Symbol> {
        self.0.first().copied()
    }

    pub fn last(&self) -> Option<Symbol> {
        self.0.last().copied()
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn push(&mut self, s: Symbol) {
        self.0.push(s);
    }

    pub fn repeat(&self, times: usize) -> Word {
        Word(self.0.repeat(times))
    }

    pub fn rotation(&self, by: usize) -> Word {
        let n = self.len();
        if n == 0 {
            return Word::empty();
        }
        let by = by % n;
        let mut v = self.0[by..].to_vec();
        v.extend_from_slice(&self.0[..by]);
        Word(v)
    }

    /// Lexicographically least rotation.
    pub fn least_rotation(&self) -> Word {
        (0..self.len().max(1)).map(|i| self.rotation(i)).min().unwrap_or_default()
    }

    /// Shortest `r` with `self = r^m`.
    pub fn primitive_root(&self) -> Word {
        let n = self.len();
        for p in 1..=n {
            if n.is_multiple_of(p) && (p..n).all(|i| self.0[i] == self.0[i - p]) {
                return Word(self.0[..p].to_vec());
            }
        }
        self.clone()
    }

    pub fn is_primitive(&self) -> bool {
        self.primitive_root().len() == self.len()
    }

    /// Rendering for an alphabet of size `k`: digits when `k ≤ 9`, else comma-separated.
    pub fn render(&self, k: usize) -> String {
        if k <= 9 {
            self.0.iter().map(|s| char::from(b'0' + s)).collect()
        } else {
            self.0.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(",")
        }
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = self.0.iter().copied().max().unwrap_or(1) as usize;
        f.write_str(&self.render(k))
    }
}

impl FromStr for Word {
    type Err = SymbolicError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = || SymbolicError::BadWord(s.to_string());
        let symbols: Vec<Symbol> = if s.contains(',') {
            s.split(',').map(|t| t.trim().parse::<Symbol>().map_err(|_| bad())).collect::<Result<_, _>>()?
        } else {
            s.chars()
                .map(|c| c.to_digit(10).map(|d| d as Symbol).ok_or_else(bad))
                .collect::<Result<_, _>>()?
        };
        if symbols.contains(&0) {
            return Err(bad());
        }
        Ok(Word(symbols))
    }
}

impl From<&[Symbol]> for Word {
    fn from(s: &[Symbol]) -> Self {
        Word(s.to_vec())
    }
}

impl Serialize for Word {
    fn serialize<Ser: Serializer>(&self, serializer: Ser) -> Result<Ser::Ok, Ser::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        if s.is_empty() {
            return Ok(Word::empty());
        }
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A cylinder together with how it was decided.
#[derive(Debug, Clone, PartialEq)]
pub struct Cylinder<S> {
    pub word: Word,
    /// Closure of the open cylinder; empty when the word is inadmissible.
    pub interval: Interval<S>,
    /// Set when the backward composition collapsed to a single point: such
    /// words code no interior point and are treated as inadmissible.
    pub degenerate: bool,
}

impl<S: Scalar> Cylinder<S> {
    pub fn is_admissible(&self) -> bool {
        !self.interval.is_empty()
    }
}

/// One backward step: `cl(I_a) ∩ branch_a^{-1}(j)`, or `None` when the result has no interior.
/// The second component reports a collapse to a single point.
fn pull_back<S: Scalar>(map: &PiecewiseMonotonicMap<S>, a: Symbol, j: &Interval<S>) -> (Option<Interval<S>>, bool) {
    let pre = map.closed_piece(a).intersect(&map.branch(a).preimage(j));
    if pre.has_interior() {
        (Some(pre), false)
    } else {
        (None, !pre.is_empty())
    }
}

pub fn cylinder<S: Scalar>(map: &PiecewiseMonotonicMap<S>, w: &Word) -> Cylinder<S> {
    let syms = w.symbols();
    let empty = |degenerate| Cylinder { word: w.clone(), interval: Interval::empty(), degenerate };
    let Some((&last, rest)) = syms.split_last() else {
        return Cylinder { word: w.clone(), interval: Interval::unit(), degenerate: false };
    };
    if last == 0 || last as usize > map.k() || rest.iter().any(|&s| s == 0 || s as usize > map.k()) {
        return empty(false);
    }
    let mut j = map.closed_piece(last);
    for &a in rest.iter().rev() {
        match pull_back(map, a, &j) {
            (Some(next), _) => j = next,
            (None, degenerate) => return empty(degenerate),
        }
    }
    Cylinder { word: w.clone(), interval: j, degenerate: false }
}

/// Closed cylinder interval of `w` (empty for inadmissible words).
pub fn cylinder_interval<S: Scalar>(map: &PiecewiseMonotonicMap<S>, w: &Word) -> Interval<S> {
    cylinder(map, w).interval
}

pub fn is_admissible<S: Scalar>(map: &PiecewiseMonotonicMap<S>, w: &Word) -> bool {
    cylinder(map, w).is_admissible()
}

/// Number of admissible words of length `n`, by depth-first prepending of
/// symbols with cylinder pruning.
pub fn count_words<S: Scalar>(map: &PiecewiseMonotonicMap<S>, n: usize, budget: u64) -> Result<u64, SymbolicError> {
    if n == 0 {
        return Ok(1);
    }
    let visited = AtomicU64::new(0);
    let per_last: Vec<Result<u64, SymbolicError>> = map
        .symbols()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|s| count_from(map, &map.closed_piece(s), n - 1, &visited, budget))
        .collect();
    per_last.into_iter().sum()
}

fn count_from<S: Scalar>(
    map: &PiecewiseMonotonicMap<S>,
    suffix: &Interval<S>,
    remaining: usize,
    visited: &AtomicU64,
    budget: u64,
) -> Result<u64, SymbolicError> {
    if visited.fetch_add(1, Ordering::Relaxed) >= budget {
        return Err(SymbolicError::BudgetExceeded { budget });
    }
    if remaining == 0 {
        return Ok(1);
    }
    let mut total = 0;
    for a in map.symbols() {
        if let (Some(j), _) = pull_back(map, a, suffix) {
            total += count_from(map, &j, remaining - 1, visited, budget)?;
        }
    }
    Ok(total)
}

/// All admissible words of length `n` in lexicographic order.
pub fn admissible_words<S: Scalar>(
    map: &PiecewiseMonotonicMap<S>,
    n: usize,
    budget: u64,
) -> Result<Vec<Word>, SymbolicError> {
    let mut out = Vec::new();
    let mut visited = 0u64;
    let mut walker = FollowerWalker::new(map);
    fn rec<S: Scalar>(
        walker: &mut FollowerWalker<'_, S>,
        prefix: &mut Vec<Symbol>,
        n: usize,
        out: &mut Vec<Word>,
        visited: &mut u64,
        budget: u64,
    ) -> Result<(), SymbolicError> {
        *visited += 1;
        if *visited > budget {
            return Err(SymbolicError::BudgetExceeded { budget });
        }
        if prefix.len() == n {
            out.push(Word::new(prefix.clone()));
            return Ok(());
        }
        for a in 1..=walker.map.k() as Symbol {
            let saved = walker.state.clone();
            if walker.push(a) {
                prefix.push(a);
                rec(walker, prefix, n, out, visited, budget)?;
                prefix.pop();
            }
            walker.state = saved;
        }
        Ok(())
    }
    rec(&mut walker, &mut Vec::new(), n, &mut out, &mut visited, budget)?;
    Ok(out)
}

/// Successor rule of the Markov diagram: from the vertex `(symbol, j)` the
/// successor labelled `next` is `cl(I_next) ∩ T(j)`, kept only when it has interior.
pub fn successor<S: Scalar>(
    map: &PiecewiseMonotonicMap<S>,
    symbol: Symbol,
    j: &Interval<S>,
    next: Symbol,
) -> Option<Interval<S>> {
    let mut image = map.branch(symbol).image_of(j);
    let piece = map.closed_piece(next);
    if !S::EXACT {
        // snap to the piece ends so rounding is not expanded along long orbits
        if image.lo.near(&piece.lo, DEDUP_TOL) {
            image.lo = piece.lo.clone();
            image.lo_closed = true;
        }
        if image.hi.near(&piece.hi, DEDUP_TOL) {
            image.hi = piece.hi.clone();
            image.hi_closed = true;
        }
    }
    let c = piece.intersect(&image);
    c.has_interior().then_some(c)
}

/// Forward admissibility check: the state after reading `w` is the diagram
/// vertex `cl(I_{w_n}) ∩ T^{n-1}(cyl(w))`.
#[derive(Debug, Clone)]
pub struct FollowerWalker<'a, S> {
    map: &'a PiecewiseMonotonicMap<S>,
    state: Option<(Symbol, Interval<S>)>,
    read: usize,
}

impl<'a, S: Scalar> FollowerWalker<'a, S> {
    pub fn new(map: &'a PiecewiseMonotonicMap<S>) -> Self {
        FollowerWalker { map, state: None, read: 0 }
    }

    /// Reads one symbol; returns false (leaving the state untouched) if the
    /// extended word is inadmissible.
    pub fn push(&mut self, next: Symbol) -> bool {
        if next == 0 || next as usize > self.map.k() {
            return false;
        }
        let new_state = match &self.state {
            None => Some((next, self.map.closed_piece(next))),
            Some((s, j)) => successor(self.map, *s, j, next).map(|c| (next, c)),
        };
        match new_state {
            Some(st) => {
                self.state = Some(st);
                self.read += 1;
                true
            }
            None => false,
        }
    }

    pub fn read(&self) -> usize {
        self.read
    }

    pub fn state(&self) -> Option<&(Symbol, Interval<S>)> {
        self.state.as_ref()
    }
}

/// Length of the longest admissible prefix of the symbol sequence, checked forward.
pub fn admissible_prefix_len<S: Scalar, I: IntoIterator<Item = Symbol>>(map: &PiecewiseMonotonicMap<S>, symbols: I) -> usize {
    let mut walker = FollowerWalker::new(map);
    for s in symbols {
        if !walker.push(s) {
            break;
        }
    }
    walker.read()
}

/// A labelled block boundary inside a stream (used by block-concatenation streams).
#[derive(Debug, Clone, PartialEq)]
pub struct BlockMark {
    /// Index one past the last symbol of the block.
    pub end: usize,
    /// The periodic word repeated inside the block.
    pub word: Word,
    /// Length of the connector that opens the block.
    pub connector_len: usize,
    /// False when the horizon cut the block short.
    pub complete: bool,
}

/// A run of `len` symbols repeating `pattern`, starting at `start`.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub start: usize,
    pub len: usize,
    pub pattern: Word,
}

#[derive(Clone)]
enum Source {
    EventuallyPeriodic { prefix: Word, cycle: Word },
    Segments(Arc<Vec<Segment>>),
    Generator(Arc<dyn Fn(usize) -> Symbol + Send + Sync>),
}

/// A lazily generated (possibly infinite) symbol sequence.
#[derive(Clone)]
pub struct SymbolStream {
    source: Source,
    horizon: Option<usize>,
    blocks: Arc<Vec<BlockMark>>,
}

impl fmt::Debug for SymbolStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.source {
            Source::EventuallyPeriodic { prefix, cycle } => format!("{prefix}({cycle})^∞"),
            Source::Segments(s) => format!("{} segments", s.len()),
            Source::Generator(_) => "generator".to_string(),
        };
        f.debug_struct("SymbolStream").field("source", &kind).field("horizon", &self.horizon).finish()
    }
}

impl SymbolStream {
    pub fn periodic(cycle: Word) -> Self {
        Self::eventually_periodic(Word::empty(), cycle)
    }

    pub fn eventually_periodic(prefix: Word, cycle: Word) -> Self {
        assert!(!cycle.is_empty(), "periodic part must be nonempty");
        SymbolStream {
            source: Source::EventuallyPeriodic { prefix, cycle },
            horizon: None,
            blocks: Arc::new(Vec::new()),
        }
    }

    pub fn from_fn(f: impl Fn(usize) -> Symbol + Send + Sync + 'static, horizon: Option<usize>) -> Self {
        SymbolStream { source: Source::Generator(Arc::new(f)), horizon, blocks: Arc::new(Vec::new()) }
    }

    /// Finite stream made of consecutive segments.
    pub fn from_segments(segments: Vec<Segment>, blocks: Vec<BlockMark>) -> Self {
        let horizon = segments.last().map(|s| s.start + s.len).unwrap_or(0);
        SymbolStream { source: Source::Segments(Arc::new(segments)), horizon: Some(horizon), blocks: Arc::new(blocks) }
    }

    pub fn horizon(&self) -> Option<usize> {
        self.horizon
    }

    pub fn blocks(&self) -> &[BlockMark] {
        &self.blocks
    }

    /// `(preperiod, period)` when the stream is known to be eventually periodic.
    pub fn eventual_period(&self) -> Option<(usize, usize)> {
        match &self.source {
            Source::EventuallyPeriodic { prefix, cycle } => Some((prefix.len(), cycle.len())),
            _ => None,
        }
    }

    pub fn symbol(&self, j: usize) -> Option<Symbol> {
        if self.horizon.is_some_and(|h| j >= h) {
            return None;
        }
        match &self.source {
            Source::EventuallyPeriodic { prefix, cycle } => Some(if j < prefix.len() {
                prefix.symbols()[j]
            } else {
                cycle.symbols()[(j - prefix.len()) % cycle.len()]
            }),
            Source::Segments(segs) => {
                let i = segs.partition_point(|s| s.start <= j).checked_sub(1)?;
                let seg = &segs[i];
                let p = seg.pattern.symbols();
                Some(p[(j - seg.start) % p.len()])
            }
            Source::Generator(f) => Some(f(j)),
        }
    }

    pub fn prefix(&self, n: usize) -> Result<Word, SymbolicError> {
        if let Some(h) = self.horizon {
            if n > h {
                return Err(SymbolicError::BeyondHorizon { requested: n, horizon: h });
            }
        }
        Ok(Word::new((0..n).map(|j| self.symbol(j).expect("within horizon")).collect()))
    }

    pub fn iter(&self) -> impl Iterator<Item = Symbol> + '_ {
        (0..).map_while(move |j| self.symbol(j))
    }
}

/// Cylinder of the depth-`depth` prefix of `s`: a closed interval containing
/// the point coded by `s`, nested in all shallower results.
pub fn phi_point<S: Scalar>(
    map: &PiecewiseMonotonicMap<S>,
    s: &SymbolStream,
    depth: usize,
) -> Result<Interval<S>, SymbolicError> {
    let w = s.prefix(depth)?;
    let cyl = cylinder_interval(map, &w);
    if !cyl.is_empty() {
        return Ok(cyl);
    }
    // admissibility is prefix-closed: binary search the first bad length
    let (mut good, mut bad) = (0usize, depth);
    while bad - good > 1 {
        let mid = (good + bad) / 2;
        if is_admissible(map, &Word::from(&w.symbols()[..mid])) {
            good = mid;
        } else {
            bad = mid;
        }
    }
    Err(SymbolicError::InadmissiblePrefix(bad))
}
