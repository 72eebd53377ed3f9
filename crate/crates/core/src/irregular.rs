//! Irregular points by block concatenation, oscillation certificates, and
//! the finite-subdiagram search certifying specification, a nontrivial
//! spread of integrals, and an entropy lower bound.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use serde_json::json;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::diagram::{
    build_diagram, irreducible_core, specification_gap, spectral_radius_entropy, DiagramError, SubDiagram,
};
use crate::interval_map::{PiecewiseMonotonicMap, Symbol};
use crate::linalg;
use crate::measures::{
    closed_walk, closed_walk_words, integral, markov_integral, parry_measure, realize_periodic_point,
    symbolic_periodic_average, MeasureError, Observable,
};
use crate::scalar::{render, Scalar, DEDUP_TOL};
use crate::symbolic::{successor, BlockMark, FollowerWalker, Segment, SymbolStream, SymbolicError, Word};

/// Default growth factor of block lengths.
pub const DEFAULT_GROWTH: f64 = 4.0;
/// Default stream horizon.
pub const DEFAULT_HORIZON: usize = 100_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IrregularError {
    #[error(transparent)]
    Symbolic(#[from] SymbolicError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Diagram(#[from] DiagramError),
    #[error("no connector joins `{u}` to `{v}` inside the subdiagram")]
    NoPath { u: Word, v: Word },
    #[error("stream is inadmissible at position {0}")]
    InadmissibleJunction(usize),
    #[error("stream horizon is zero")]
    EmptyStream,
    #[error("invalid block schedule: {0}")]
    BadSchedule(String),
    #[error("checkpoint {checkpoint} lies beyond the usable horizon {horizon}")]
    BeyondHorizon { checkpoint: usize, horizon: usize },
    #[error("all periodic integrals agree with the maximal-entropy integral; no oscillation detected")]
    SpreadZero,
    #[error("best entropy {best} falls short of the target {target}")]
    EntropyShortfall { best: f64, target: f64 },
    #[error("epsilon must be positive")]
    NonPositiveEpsilon,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BlockSchedule {
    /// Block lengths in order; the stream ends after the last block.
    Explicit(Vec<usize>),
    /// `n_{j+1} = ⌈g · (cumulative length)⌉`, starting from `first`
    /// (default `4·max(|u|,|v|)`).
    Growth { factor: f64, first: Option<usize> },
}

impl Default for BlockSchedule {
    fn default() -> Self {
        BlockSchedule::Growth { factor: DEFAULT_GROWTH, first: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IrregularSpec {
    pub u: Word,
    pub v: Word,
    pub z_uv: Word,
    pub z_vu: Word,
    pub schedule: BlockSchedule,
    pub horizon: usize,
}

impl IrregularSpec {
    /// Finds both connectors inside `core`.
    pub fn new<S: Scalar>(
        core: &SubDiagram<S>,
        u: Word,
        v: Word,
        schedule: BlockSchedule,
        horizon: usize,
    ) -> Result<Self, IrregularError> {
        let z_uv = find_connector(core, &u, &v)?;
        let z_vu = find_connector(core, &v, &u)?;
        Ok(IrregularSpec { u, v, z_uv, z_vu, schedule, horizon })
    }
}

/// Shortest (then lexicographically least) `z` with `uu z vv` in the
/// projected language of `core`, searched up to `|core|` symbols.
pub fn find_connector<S: Scalar>(core: &SubDiagram<S>, u: &Word, v: &Word) -> Result<Word, IrregularError> {
    let no_path = || IrregularError::NoPath { u: u.clone(), v: v.clone() };
    let start = match core.end_set(&u.repeat(2)) {
        Some(s) if !s.is_empty() => s,
        _ => return Err(no_path()),
    };
    let vv = v.repeat(2);
    let k = core.alphabet_size() as Symbol;
    let finishes = |set: &[usize]| {
        let mut cur = set.to_vec();
        for &c in vv.symbols() {
            cur = core.step(Some(&cur), c);
            if cur.is_empty() {
                return false;
            }
        }
        true
    };
    fn search<S: Scalar>(
        core: &SubDiagram<S>,
        set: &[usize],
        z: &mut Vec<Symbol>,
        len: usize,
        k: Symbol,
        finishes: &dyn Fn(&[usize]) -> bool,
    ) -> bool {
        if z.len() == len {
            return finishes(set);
        }
        for c in 1..=k {
            let next = core.step(Some(set), c);
            if next.is_empty() {
                continue;
            }
            z.push(c);
            if search(core, &next, z, len, k, finishes) {
                return true;
            }
            z.pop();
        }
        false
    }
    for len in 0..=core.len() {
        let mut z = Vec::new();
        if search(core, &start, &mut z, len, k, &finishes) {
            return Ok(Word::new(z));
        }
    }
    Err(no_path())
}

/// Concatenates `u`-blocks and `v`-blocks with connectors, each block a whole
/// number of periods, up to the horizon, and checks every prefix for
/// admissibility.
pub fn construct_irregular_sequence<S: Scalar>(
    map: &PiecewiseMonotonicMap<S>,
    spec: &IrregularSpec,
) -> Result<SymbolStream, IrregularError> {
    if spec.horizon == 0 {
        return Err(IrregularError::EmptyStream);
    }
    if spec.u.is_empty() || spec.v.is_empty() {
        return Err(IrregularError::BadSchedule("periodic words must be nonempty".into()));
    }
    match &spec.schedule {
        BlockSchedule::Explicit(lengths) if lengths.is_empty() || lengths.contains(&0) => {
            return Err(IrregularError::BadSchedule("block lengths must be positive".into()))
        }
        BlockSchedule::Growth { factor, .. } if factor.is_nan() || *factor < 1.0 => {
            return Err(IrregularError::BadSchedule(format!("growth factor {factor} is below 1")))
        }
        BlockSchedule::Growth { first: Some(0), .. } => {
            return Err(IrregularError::BadSchedule("first block must be positive".into()))
        }
        _ => {}
    }
    let mut segments = Vec::new();
    let mut blocks = Vec::new();
    let mut total = 0usize;
    let mut j = 0usize;
    while total < spec.horizon {
        let scheduled = match &spec.schedule {
            BlockSchedule::Explicit(lengths) => match lengths.get(j) {
                Some(&n) => n,
                None => break,
            },
            BlockSchedule::Growth { factor, first } => {
                if j == 0 {
                    first.unwrap_or(4 * spec.u.len().max(spec.v.len()))
                } else {
                    (factor * total as f64).ceil() as usize
                }
            }
        };
        let (word, connector) = match (j % 2, j) {
            (_, 0) => (&spec.u, Word::empty()),
            (1, _) => (&spec.v, spec.z_uv.clone()),
            _ => (&spec.u, spec.z_vu.clone()),
        };
        let reps = (scheduled.saturating_sub(connector.len()) / word.len()).max(1);
        let start = total;
        let mut complete = true;
        for (pattern, len) in [(connector.clone(), connector.len()), (word.clone(), reps * word.len())] {
            if len == 0 {
                continue;
            }
            let len_cut = len.min(spec.horizon - total);
            if len_cut < len {
                complete = false;
            }
            if len_cut > 0 {
                segments.push(Segment { start: total, len: len_cut, pattern });
                total += len_cut;
            }
        }
        if total > start {
            blocks.push(BlockMark { end: total, word: word.clone(), connector_len: connector.len(), complete });
        }
        j += 1;
    }
    let stream = SymbolStream::from_segments(segments, blocks);
    let mut walker = FollowerWalker::new(map);
    for (i, s) in stream.iter().enumerate() {
        if !walker.push(s) {
            return Err(IrregularError::InadmissibleJunction(i));
        }
    }
    Ok(stream)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckpointRow {
    pub n: usize,
    pub average: f64,
    pub running_inf: f64,
    pub running_sup: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockRow {
    /// 1-based block number.
    pub index: usize,
    pub end: usize,
    pub word: Word,
    pub target: f64,
    pub average: f64,
    pub deviation: f64,
    pub delta: f64,
    pub within: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OscillationReport {
    pub rows: Vec<CheckpointRow>,
    /// `sup − inf` over all checkpoint averages.
    pub gap: f64,
    pub blocks: Vec<BlockRow>,
    /// `sup − inf` of block-end averages from block 3 on, if there are any.
    pub tail_gap: Option<f64>,
    pub certified: bool,
}

impl OscillationReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,average,running_inf,running_sup\n");
        for r in &self.rows {
            let _ = writeln!(out, "{},{:.15},{:.15},{:.15}", r.n, r.average, r.running_inf, r.running_sup);
        }
        out
    }

    pub fn blocks_csv(&self) -> String {
        let mut out = String::from("block,end,word,target,average,deviation,delta,within\n");
        for b in &self.blocks {
            let _ = writeln!(
                out,
                "{},{},{},{:.15},{:.15},{:.15},{:.15},{}",
                b.index, b.end, b.word, b.target, b.average, b.deviation, b.delta, b.within
            );
        }
        out
    }
}

/// Value of `φ` at every position `< n` of the stream.
fn observable_along<S: Scalar>(
    map: &PiecewiseMonotonicMap<S>,
    phi: &Observable<S>,
    s: &SymbolStream,
    n: usize,
) -> Result<Vec<f64>, IrregularError> {
    let phi = phi.to_float();
    if phi.is_symbolic() {
        let m = phi.depth();
        let syms = s.prefix(n + m - 1)?;
        return (0..n)
            .map(|j| Ok(phi.on_symbols(&syms.symbols()[j..]).expect("symbolic")?))
            .collect();
    }
    // backward through inverse branches from a little past `n`: contraction
    // makes the start value irrelevant well before position n
    let fmap = map.to_float();
    let end = s.horizon().map_or(n + 256, |h| h.min(n + 256));
    let mut y: f64 = 0.5;
    let mut values = vec![0.0; n];
    for j in (0..end).rev() {
        let sym = s.symbol(j).expect("within horizon");
        let branch = fmap.branch(sym);
        let img = branch.image();
        y = branch.inverse(&y.clamp(img.lo, img.hi)).expect("clamped into image");
        if j < n {
            values[j] = phi.at_point(&y).expect("real observable");
        }
    }
    Ok(values)
}

/// Target periodic integral of a block word.
fn target_of<S: Scalar>(map: &PiecewiseMonotonicMap<S>, phi: &Observable<S>, w: &Word) -> Result<f64, IrregularError> {
    if phi.is_symbolic() {
        return Ok(symbolic_periodic_average(w, phi)?.to_f64());
    }
    Ok(integral(&realize_periodic_point(map, w)?, phi)?.to_f64())
}

/// Birkhoff averages at the checkpoints and the block-end certificate.
pub fn oscillation_check<S: Scalar>(
    map: &PiecewiseMonotonicMap<S>,
    phi: &Observable<S>,
    s: &SymbolStream,
    checkpoints: &[usize],
) -> Result<OscillationReport, IrregularError> {
    let usable = s.horizon().map(|h| h + 1 - phi.depth().max(1));
    if let (Some(&c), Some(h)) = (checkpoints.iter().max(), usable) {
        if c > h {
            return Err(IrregularError::BeyondHorizon { checkpoint: c, horizon: h });
        }
    }
    let block_ends: Vec<&BlockMark> =
        s.blocks().iter().filter(|b| b.complete && usable.is_none_or(|h| b.end <= h)).collect();
    let n = checkpoints.iter().copied().chain(block_ends.iter().map(|b| b.end)).max().unwrap_or(0);
    let values = observable_along(map, phi, s, n)?;
    let mut prefix = vec![0.0; n + 1];
    for j in 0..n {
        prefix[j + 1] = prefix[j] + values[j];
    }
    let avg = |c: usize| if c == 0 { 0.0 } else { prefix[c] / c as f64 };

    let mut sorted: Vec<usize> = checkpoints.iter().copied().filter(|&c| c > 0).collect();
    sorted.sort_unstable();
    sorted.dedup();
    let mut rows = Vec::with_capacity(sorted.len());
    let (mut inf, mut sup) = (f64::INFINITY, f64::NEG_INFINITY);
    for c in sorted {
        let a = avg(c);
        inf = inf.min(a);
        sup = sup.max(a);
        rows.push(CheckpointRow { n: c, average: a, running_inf: inf, running_sup: sup });
    }
    let gap = if rows.is_empty() { 0.0 } else { sup - inf };

    let (lo, hi) = phi.range();
    let range = hi - lo;
    let mut targets: BTreeMap<Word, f64> = BTreeMap::new();
    let mut blocks = Vec::new();
    let mut prev_end = 0usize;
    for (i, b) in s.blocks().iter().enumerate() {
        if !block_ends.iter().any(|m| std::ptr::eq(*m, b)) {
            prev_end = b.end;
            continue;
        }
        let target = match targets.get(&b.word) {
            Some(&t) => t,
            None => {
                let t = target_of(map, phi, &b.word)?;
                targets.insert(b.word.clone(), t);
                t
            }
        };
        let average = avg(b.end);
        let deviation = (average - target).abs();
        let delta = (prev_end as f64 / b.end as f64) * range
            + (b.connector_len + b.word.len()) as f64 * range / b.end as f64;
        blocks.push(BlockRow {
            index: i + 1,
            end: b.end,
            word: b.word.clone(),
            target,
            average,
            deviation,
            delta,
            within: deviation <= delta + 1e-12,
        });
        prev_end = b.end;
    }
    let tail: Vec<&BlockRow> = blocks.iter().filter(|b| b.index >= 3).collect();
    let tail_gap = (!tail.is_empty()).then(|| {
        let (a, b) = tail.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), r| (a.min(r.average), b.max(r.average)));
        b - a
    });
    let words_seen = tail.iter().map(|b| &b.word).collect::<std::collections::BTreeSet<_>>().len();
    let certified = blocks.iter().all(|b| b.within) && words_seen >= 2 && tail_gap.is_some_and(|g| g > 0.0);
    Ok(OscillationReport { rows, gap, blocks, tail_gap, certified })
}

/// Describes the measure behind one of the contrasting averages.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    /// `periodic` or `max-entropy`.
    pub kind: String,
    /// The periodic code for periodic witnesses.
    pub word: Option<Word>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prop31Options {
    pub epsilon: f64,
    pub depth_cap: usize,
    pub period_cap: usize,
    /// Overrides the entropy target (default: core entropy at `depth_cap`).
    pub target_entropy: Option<f64>,
    /// Word length of the exhaustive specification check.
    pub test_len: usize,
    /// Path budget for integrating real observables against the maximal-entropy chain.
    pub max_paths: usize,
}

impl Default for Prop31Options {
    fn default() -> Self {
        Prop31Options {
            epsilon: 0.1,
            depth_cap: crate::diagram::DEFAULT_DEPTH,
            period_cap: 6,
            target_entropy: None,
            test_len: 6,
            max_paths: 50_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prop31Certificate<S> {
    /// The finite vertex set `F`.
    pub subdiagram: SubDiagram<S>,
    /// Parent indices of the entropy-approximating core `F_1 ⊆ F`.
    pub f1: Vec<usize>,
    pub f1_depth: usize,
    pub depth_cap: usize,
    pub gap: usize,
    pub gap_positive: usize,
    pub test_len: usize,
    pub averages: (Witness, Witness),
    /// The periodic measure chosen to contrast with the maximal-entropy measure on `F_1`.
    pub mu_per: Witness,
    pub nu: Witness,
    pub entropy_lb: f64,
    pub epsilon: f64,
    pub target_entropy: f64,
}

impl<S> Prop31Certificate<S> {
    pub fn separation(&self) -> f64 {
        self.averages.1.value - self.averages.0.value
    }
}

/// Periodic integral of the code `w` (symbolic), or of its realized orbit (real).
fn periodic_value<S: Scalar>(map: &PiecewiseMonotonicMap<S>, phi: &Observable<S>, w: &Word) -> Option<f64> {
    if phi.is_symbolic() {
        return symbolic_periodic_average(w, phi).ok().map(|v| v.to_f64());
    }
    let o = realize_periodic_point(map, w).ok()?;
    integral(&o, phi).ok().map(|v| v.to_f64())
}

fn contrasting_averages<S: Scalar>(
    map: &PiecewiseMonotonicMap<S>,
    phi: &Observable<S>,
    f: &SubDiagram<S>,
    nu: &Witness,
    period_cap: usize,
) -> (Witness, Witness) {
    let mut lo = nu.clone();
    let mut hi = nu.clone();
    for w in closed_walk_words(f, period_cap) {
        if let Some(value) = periodic_value(map, phi, &w) {
            let wit = Witness { kind: "periodic".into(), word: Some(w), value };
            if value < lo.value {
                lo = wit.clone();
            }
            if value > hi.value {
                hi = wit;
            }
        }
    }
    (lo, hi)
}

/// Searches for a strongly connected finite subdiagram `F` of the depth-capped
/// core with a certified specification gap, two measures with different
/// `φ`-integrals, and `log ρ(F) ≥ h* − ε`.
pub fn proposition31_search<S: Scalar>(
    map: &PiecewiseMonotonicMap<S>,
    phi: &Observable<S>,
    opts: &Prop31Options,
) -> Result<Prop31Certificate<S>, IrregularError> {
    if opts.epsilon.is_nan() || opts.epsilon <= 0.0 {
        return Err(IrregularError::NonPositiveEpsilon);
    }
    let d = build_diagram(map, opts.depth_cap)?;
    let core = irreducible_core(&d)?;
    let h_core = spectral_radius_entropy(&core)?;
    let target = opts.target_entropy.unwrap_or(h_core);

    // smallest depth whose core reaches the target within epsilon
    let mut best = f64::NEG_INFINITY;
    let mut f1 = None;
    for depth in 0..=opts.depth_cap {
        let c = match irreducible_core(&d.truncate(depth)) {
            Ok(c) => c,
            Err(DiagramError::NoCycle) => continue,
            Err(e) => return Err(e.into()),
        };
        let h = spectral_radius_entropy(&c)?;
        best = best.max(h);
        if h >= target - opts.epsilon {
            f1 = Some((depth, c));
            break;
        }
    }
    let (f1_depth, f1) = f1.ok_or(IrregularError::EntropyShortfall { best, target })?;

    let parry = parry_measure(&f1)?;
    let nu = Witness {
        kind: "max-entropy".into(),
        word: None,
        value: markov_integral(map, &f1, &parry, phi, opts.max_paths)?,
    };

    // the periodic code farthest from the maximal-entropy integral
    let mut mu_per: Option<Witness> = None;
    for w in closed_walk_words(&core, opts.period_cap) {
        let Some(value) = periodic_value(map, phi, &w) else { continue };
        let margin = (value - nu.value).abs();
        let better = match &mu_per {
            None => true,
            Some(m) => {
                let cur = (m.value - nu.value).abs();
                let mw = m.word.as_ref().expect("periodic");
                margin > cur + 1e-12 || ((margin - cur).abs() <= 1e-12 && w.len() < mw.len())
            }
        };
        if better {
            mu_per = Some(Witness { kind: "periodic".into(), word: Some(w), value });
        }
    }
    let mu_per = match mu_per {
        Some(m) if (m.value - nu.value).abs() > 1e-12 => m,
        _ => return Err(IrregularError::SpreadZero),
    };

    // F = F_1 ∪ F_2 ∪ connecting paths through a root of F_1
    let mu_word = mu_per.word.clone().expect("periodic");
    let walk = closed_walk(&core, &mu_word).expect("word came from a closed walk");
    let mut members: Vec<usize> = f1.parent_index.clone();
    let root = core.local_index(f1.parent_index[0]).expect("F_1 lies in the core");
    for &c in &walk {
        members.push(core.parent_index[c]);
        for (from, to) in [(root, c), (c, root)] {
            if from == to {
                continue;
            }
            let path = linalg::shortest_path(&core.adj, from, to).expect("core is strongly connected");
            members.extend(path.iter().map(|&p| core.parent_index[p]));
        }
    }
    members.sort_unstable();
    members.dedup();
    let f = d.subdiagram(&members);

    let spec = specification_gap(&f, opts.test_len)?;
    let averages = contrasting_averages(map, phi, &f, &nu, opts.period_cap);
    if averages.1.value - averages.0.value <= 1e-12 {
        return Err(IrregularError::SpreadZero);
    }
    let entropy_lb = spectral_radius_entropy(&f)?;
    Ok(Prop31Certificate {
        subdiagram: f,
        f1: f1.parent_index.clone(),
        f1_depth,
        depth_cap: opts.depth_cap,
        gap: spec.gap,
        gap_positive: spec.gap_positive,
        test_len: opts.test_len,
        averages,
        mu_per,
        nu,
        entropy_lb,
        epsilon: opts.epsilon,
        target_entropy: target,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verification {
    /// Arrows rebuilt from the vertex intervals match the certificate.
    pub arrows: bool,
    pub gap: bool,
    pub averages: bool,
    pub entropy: bool,
    pub passed: bool,
    pub recomputed_gap: usize,
    pub recomputed_averages: (f64, f64),
    pub recomputed_entropy: f64,
    /// SHA-256 of each recomputed field, hex-encoded.
    pub hashes: BTreeMap<String, String>,
}

fn sha_hex(s: &str) -> String {
    hex::encode(Sha256::digest(s.as_bytes()))
}

/// Re-derives every certificate field from the vertex intervals alone.
pub fn verify_certificate<S: Scalar>(
    map: &PiecewiseMonotonicMap<S>,
    phi: &Observable<S>,
    cert: &Prop31Certificate<S>,
) -> Result<Verification, IrregularError> {
    let verts = &cert.subdiagram.vertices;
    let adj: Vec<Vec<usize>> = verts
        .iter()
        .map(|a| {
            (0..verts.len())
                .filter(|&j| {
                    successor(map, a.symbol, &a.interval, verts[j].symbol)
                        .is_some_and(|c| c.same_as(&verts[j].interval, DEDUP_TOL))
                })
                .collect()
        })
        .collect();
    let arrows = adj == cert.subdiagram.adj;
    let rebuilt = SubDiagram { vertices: verts.clone(), parent_index: cert.subdiagram.parent_index.clone(), adj };

    let spec = specification_gap(&rebuilt, cert.test_len)?;
    let gap = spec.gap == cert.gap && spec.gap_positive == cert.gap_positive;

    let f1_local: Vec<usize> = cert.f1.iter().filter_map(|&p| rebuilt.local_index(p)).collect();
    let f1 = SubDiagram {
        vertices: f1_local.iter().map(|&i| verts[i].clone()).collect(),
        parent_index: f1_local.iter().map(|&i| rebuilt.parent_index[i]).collect(),
        adj: linalg::induced(&rebuilt.adj, &f1_local),
    };
    let nu_value = markov_integral(map, &f1, &parry_measure(&f1)?, phi, 50_000)?;
    let recompute = |w: &Witness| match &w.word {
        Some(word) => periodic_value(map, phi, word).filter(|_| crate::measures::has_closed_walk(&rebuilt, word)),
        None => Some(nu_value),
    };
    let (a0, a1) = (recompute(&cert.averages.0), recompute(&cert.averages.1));
    let averages = match (a0, a1) {
        (Some(x), Some(y)) => {
            (x - cert.averages.0.value).abs() <= 1e-9 && (y - cert.averages.1.value).abs() <= 1e-9 && y - x > 0.0
        }
        _ => false,
    };
    let recomputed_averages = (a0.unwrap_or(f64::NAN), a1.unwrap_or(f64::NAN));

    let rho = linalg::perron(&rebuilt.adj).map_err(DiagramError::from)?.rho;
    let recomputed_entropy = rho.ln();
    let entropy = (recomputed_entropy - cert.entropy_lb).abs() <= 1e-9
        && recomputed_entropy >= cert.target_entropy - cert.epsilon - 1e-9;

    let mut hashes = BTreeMap::new();
    hashes.insert("arrows".to_string(), sha_hex(&format!("{:?}", rebuilt.adj)));
    hashes.insert("gap".to_string(), sha_hex(&format!("{},{}", spec.gap, spec.gap_positive)));
    hashes.insert(
        "averages".to_string(),
        sha_hex(&format!("{:.12},{:.12}", recomputed_averages.0, recomputed_averages.1)),
    );
    hashes.insert("entropy".to_string(), sha_hex(&format!("{recomputed_entropy:.12}")));
    Ok(Verification {
        arrows,
        gap,
        averages,
        entropy,
        passed: arrows && gap && averages && entropy,
        recomputed_gap: spec.gap,
        recomputed_averages,
        recomputed_entropy,
        hashes,
    })
}

/// Structured JSON document for a certificate and its verification.
pub fn certificate_json<S: Scalar>(cert: &Prop31Certificate<S>, verification: &Verification) -> serde_json::Value {
    let vertices: Vec<serde_json::Value> = cert
        .subdiagram
        .vertices
        .iter()
        .zip(&cert.subdiagram.parent_index)
        .zip(&cert.subdiagram.adj)
        .map(|((v, &id), out)| {
            json!({
                "id": id,
                "symbol": v.symbol,
                "lo": render(&v.interval.lo),
                "hi": render(&v.interval.hi),
                "level": v.level,
                "successors": out.iter().map(|&j| cert.subdiagram.parent_index[j]).collect::<Vec<_>>(),
            })
        })
        .collect();
    json!({
        "subdiagram": {
            "vertices": vertices,
            "f1": cert.f1,
            "f1_depth": cert.f1_depth,
            "depth_cap": cert.depth_cap,
        },
        "gap": cert.gap,
        "gap_positive": cert.gap_positive,
        "test_len": cert.test_len,
        "averages": [cert.averages.0, cert.averages.1],
        "separation": cert.separation(),
        "mu_per": cert.mu_per,
        "nu": cert.nu,
        "entropy_lb": cert.entropy_lb,
        "target_entropy": cert.target_entropy,
        "epsilon": cert.epsilon,
        "verification": verification,
    })
}
