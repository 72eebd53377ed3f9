//! Piecewise monotonic maps of the unit interval.
//!
//! A map is given by partition endpoints `0 = i_0 < i_1 < … < i_k = 1`, one
//! continuous strictly monotone branch per open piece `I_j = (i_{j-1}, i_j)`
//! and explicit values at the endpoints (the map need only be measurable
//! there). Endpoint values default to the left one-sided limit, with the
//! right limit used at `0`.

use thiserror::Error;

use crate::interval::Interval;
use crate::scalar::{Number, NumberError, Scalar, EPS};
use crate::symbolic::Word;

/// Partition symbol, `1..=k`.
pub type Symbol = u8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MapError {
    #[error("beta must exceed 1, got {0}")]
    BetaTooSmall(String),
    #[error("alpha must lie in [0,1), got {0}")]
    AlphaOutOfRange(String),
    #[error("tent slope must lie in (1,2], got {0}")]
    TentSlope(String),
    #[error("partition endpoints must start at 0, end at 1 and strictly increase")]
    BadPartition,
    #[error("expected {expected} values for `{field}`, got {got}")]
    Arity { field: &'static str, expected: usize, got: usize },
    #[error("branch {0} is not strictly monotone")]
    NotMonotone(usize),
    #[error("branch {0} maps outside [0,1]")]
    ImageEscapes(usize),
    #[error("boundary image at endpoint {0} lies outside [0,1]")]
    BoundaryImageEscapes(usize),
    #[error("at most 255 branches are supported, got {0}")]
    TooManyBranches(usize),
    #[error("point {0} lies outside [0,1]")]
    OutOfDomain(String),
    #[error("orbit hits a partition endpoint at step {0}")]
    BoundaryHit(usize),
    #[error("[{0},{1}] is not an invariant interval")]
    NotInvariant(String, String),
    #[error(transparent)]
    Number(#[from] NumberError),
}

#[derive(Debug, Clone, PartialEq)]
pub enum BranchKind<S> {
    Affine { slope: S, intercept: S },
    /// Piecewise-linear interpolation through strictly monotone samples;
    /// `xs` runs from the left to the right end of the branch domain.
    Tabulated { xs: Vec<S>, ys: Vec<S> },
}

#[derive(Debug, Clone, PartialEq, Eq, Copy)]
pub enum Orientation {
    Increasing,
    Decreasing,
}

/// One monotone branch on the closed domain `[lo, hi]`; the values at the
/// ends are the one-sided limits of the branch.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch<S> {
    pub lo: S,
    pub hi: S,
    pub kind: BranchKind<S>,
}

impl<S: Scalar> Branch<S> {
    pub fn affine(lo: S, hi: S, slope: S, intercept: S) -> Self {
        Branch { lo, hi, kind: BranchKind::Affine { slope, intercept } }
    }

    pub fn is_affine(&self) -> bool {
        matches!(self.kind, BranchKind::Affine { .. })
    }

    pub fn orientation(&self) -> Orientation {
        match &self.kind {
            BranchKind::Affine { slope, .. } => {
                if *slope > S::zero() {
                    Orientation::Increasing
                } else {
                    Orientation::Decreasing
                }
            }
            BranchKind::Tabulated { ys, .. } => {
                if ys[ys.len() - 1] > ys[0] {
                    Orientation::Increasing
                } else {
                    Orientation::Decreasing
                }
            }
        }
    }

    /// Branch value on the closed domain.
    pub fn eval(&self, x: &S) -> S {
        match &self.kind {
            BranchKind::Affine { slope, intercept } => slope.clone() * x.clone() + intercept.clone(),
            BranchKind::Tabulated { xs, ys } => {
                let n = xs.len();
                let mut i = 0;
                while i + 2 < n && *x > xs[i + 1] {
                    i += 1;
                }
                lerp(&xs[i], &xs[i + 1], &ys[i], &ys[i + 1], x)
            }
        }
    }

    /// Closed image of the whole domain.
    pub fn image(&self) -> Interval<S> {
        Interval::spanning(self.eval(&self.lo), self.eval(&self.hi))
    }

    /// Closed image of a closed subinterval of the domain.
    pub fn image_of(&self, j: &Interval<S>) -> Interval<S> {
        if j.is_empty() {
            return Interval::empty();
        }
        Interval::spanning(self.eval(&j.lo), self.eval(&j.hi))
    }

    /// The unique `x` in the closed domain with `eval(x) = y`, if `y` lies in
    /// the closed image.
    pub fn inverse(&self, y: &S) -> Option<S> {
        self.inverse_within(&self.image(), y)
    }

    fn inverse_within(&self, image: &Interval<S>, y: &S) -> Option<S> {
        if !image.contains_approx(y, EPS) {
            return None;
        }
        let y = clamp(y, &image.lo, &image.hi);
        let x = match &self.kind {
            BranchKind::Affine { slope, intercept } => (y - intercept.clone()) / slope.clone(),
            BranchKind::Tabulated { xs, ys } => {
                let n = xs.len();
                let mut found = None;
                for i in 0..n - 1 {
                    let seg = Interval::spanning(ys[i].clone(), ys[i + 1].clone());
                    if seg.contains(&y) {
                        found = Some(lerp(&ys[i], &ys[i + 1], &xs[i], &xs[i + 1], &y));
                        break;
                    }
                }
                found?
            }
        };
        Some(clamp(&x, &self.lo, &self.hi))
    }

    /// Closed preimage (inside the closed domain) of a closed interval.
    pub fn preimage(&self, j: &Interval<S>) -> Interval<S> {
        let image = self.image();
        let hit = image.intersect(&j.closure());
        if hit.is_empty() {
            return Interval::empty();
        }
        match (self.inverse_within(&image, &hit.lo), self.inverse_within(&image, &hit.hi)) {
            (Some(a), Some(b)) => Interval::spanning(a, b),
            _ => Interval::empty(),
        }
    }

    fn validate(&self, index: usize) -> Result<(), MapError> {
        match &self.kind {
            BranchKind::Affine { slope, .. } => {
                if slope.is_zero_value() {
                    return Err(MapError::NotMonotone(index));
                }
            }
            BranchKind::Tabulated { xs, ys } => {
                if xs.len() < 2 || xs.len() != ys.len() {
                    return Err(MapError::NotMonotone(index));
                }
                if xs[0] != self.lo || xs[xs.len() - 1] != self.hi {
                    return Err(MapError::NotMonotone(index));
                }
                let inc_x = xs.windows(2).all(|w| w[1] > w[0]);
                let inc_y = ys.windows(2).all(|w| w[1] > w[0]);
                let dec_y = ys.windows(2).all(|w| w[1] < w[0]);
                if !inc_x || !(inc_y || dec_y) {
                    return Err(MapError::NotMonotone(index));
                }
            }
        }
        if !self.image().is_subset_of(&Interval::unit(), EPS) {
            return Err(MapError::ImageEscapes(index));
        }
        Ok(())
    }

    fn map_scalars<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Branch<T> {
        let kind = match &self.kind {
            BranchKind::Affine { slope, intercept } => {
                BranchKind::Affine { slope: f(slope), intercept: f(intercept) }
            }
            BranchKind::Tabulated { xs, ys } => BranchKind::Tabulated {
                xs: xs.iter().map(&f).collect(),
                ys: ys.iter().map(&f).collect(),
            },
        };
        Branch { lo: f(&self.lo), hi: f(&self.hi), kind }
    }
}

fn lerp<S: Scalar>(x0: &S, x1: &S, y0: &S, y1: &S, x: &S) -> S {
    y0.clone() + (y1.clone() - y0.clone()) * (x.clone() - x0.clone()) / (x1.clone() - x0.clone())
}

fn clamp<S: Scalar>(x: &S, lo: &S, hi: &S) -> S {
    if x < lo {
        lo.clone()
    } else if x > hi {
        hi.clone()
    } else {
        x.clone()
    }
}

/// Where a point sits relative to the partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    /// Interior of `I_j` (1-based symbol).
    Interior(Symbol),
    /// Equal to endpoint `i_j` (0-based index).
    Endpoint(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrbitRecord<S> {
    pub points: Vec<S>,
    pub hit_boundary_at: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseMonotonicMap<S> {
    endpoints: Vec<S>,
    branches: Vec<Branch<S>>,
    boundary_images: Vec<S>,
}

impl<S: Scalar> PiecewiseMonotonicMap<S> {
    /// Validating constructor. `kinds[j]` is the branch on `(endpoints[j], endpoints[j+1])`.
    pub fn new(
        endpoints: Vec<S>,
        kinds: Vec<BranchKind<S>>,
        boundary_images: Option<Vec<S>>,
    ) -> Result<Self, MapError> {
        let k = kinds.len();
        if k > Symbol::MAX as usize {
            return Err(MapError::TooManyBranches(k));
        }
        if endpoints.len() != k + 1 || k == 0 {
            return Err(MapError::Arity { field: "endpoints", expected: k + 1, got: endpoints.len() });
        }
        if endpoints[0] != S::zero()
            || endpoints[k] != S::one()
            || !endpoints.windows(2).all(|w| S::gap_positive(&w[0], &w[1]))
        {
            return Err(MapError::BadPartition);
        }
        let branches: Vec<Branch<S>> = kinds
            .into_iter()
            .enumerate()
            .map(|(j, kind)| Branch { lo: endpoints[j].clone(), hi: endpoints[j + 1].clone(), kind })
            .collect();
        for (j, b) in branches.iter().enumerate() {
            b.validate(j + 1)?;
        }
        let boundary_images = match boundary_images {
            Some(v) => {
                if v.len() != k + 1 {
                    return Err(MapError::Arity { field: "boundary_images", expected: k + 1, got: v.len() });
                }
                v
            }
            None => {
                let mut v = vec![branches[0].eval(&endpoints[0])];
                v.extend(branches.iter().map(|b| b.eval(&b.hi)));
                v
            }
        };
        let unit = Interval::unit();
        for (i, y) in boundary_images.iter().enumerate() {
            if !unit.contains_approx(y, EPS) {
                return Err(MapError::BoundaryImageEscapes(i));
            }
        }
        Ok(PiecewiseMonotonicMap { endpoints, branches, boundary_images })
    }

    /// Number of branches `k`.
    pub fn k(&self) -> usize {
        self.branches.len()
    }

    pub fn endpoints(&self) -> &[S] {
        &self.endpoints
    }

    pub fn boundary_images(&self) -> &[S] {
        &self.boundary_images
    }

    pub fn branch(&self, symbol: Symbol) -> &Branch<S> {
        &self.branches[symbol as usize - 1]
    }

    pub fn branches(&self) -> &[Branch<S>] {
        &self.branches
    }

    pub fn is_affine(&self) -> bool {
        self.branches.iter().all(Branch::is_affine)
    }

    /// `cl(I_j)`.
    pub fn closed_piece(&self, symbol: Symbol) -> Interval<S> {
        let j = symbol as usize;
        Interval::closed(self.endpoints[j - 1].clone(), self.endpoints[j].clone())
    }

    /// `I_j`.
    pub fn open_piece(&self, symbol: Symbol) -> Interval<S> {
        let j = symbol as usize;
        Interval::open(self.endpoints[j - 1].clone(), self.endpoints[j].clone())
    }

    pub fn symbols(&self) -> impl Iterator<Item = Symbol> {
        1..=self.k() as Symbol
    }

    pub fn locate(&self, x: &S) -> Result<Location, MapError> {
        if !Interval::unit().contains_approx(x, EPS) {
            return Err(MapError::OutOfDomain(x.to_string()));
        }
        for (i, e) in self.endpoints.iter().enumerate() {
            if x.near(e, EPS) {
                return Ok(Location::Endpoint(i));
            }
        }
        let j = self.endpoints.iter().take_while(|e| *e < x).count();
        Ok(Location::Interior(j as Symbol))
    }

    pub fn is_endpoint(&self, x: &S) -> bool {
        self.endpoints.iter().any(|e| x.near(e, EPS))
    }

    pub fn evaluate(&self, x: &S) -> Result<S, MapError> {
        Ok(match self.locate(x)? {
            Location::Endpoint(i) => self.boundary_images[i].clone(),
            Location::Interior(j) => {
                let y = self.branch(j).eval(x);
                clamp(&y, &S::zero(), &S::one())
            }
        })
    }

    pub fn iterate_orbit(&self, x: &S, n: usize) -> Result<OrbitRecord<S>, MapError> {
        let mut points = Vec::with_capacity(n);
        let mut hit = None;
        let mut cur = x.clone();
        for j in 0..n {
            if hit.is_none() && matches!(self.locate(&cur)?, Location::Endpoint(_)) {
                hit = Some(j);
            }
            points.push(cur.clone());
            if j + 1 < n {
                cur = self.evaluate(&cur)?;
            }
        }
        Ok(OrbitRecord { points, hit_boundary_at: hit })
    }

    /// First `n` symbols of the coding of `x`; defined only while the orbit
    /// avoids the partition endpoints.
    pub fn itinerary(&self, x: &S, n: usize) -> Result<Word, MapError> {
        let mut symbols = Vec::with_capacity(n);
        let mut cur = x.clone();
        for j in 0..n {
            match self.locate(&cur)? {
                Location::Endpoint(_) => return Err(MapError::BoundaryHit(j)),
                Location::Interior(s) => {
                    symbols.push(s);
                    if j + 1 < n {
                        cur = clamp(&self.branch(s).eval(&cur), &S::zero(), &S::one());
                    }
                }
            }
        }
        Ok(Word::new(symbols))
    }

    pub fn inverse_branch(&self, symbol: Symbol, y: &S) -> Option<S> {
        if symbol == 0 || symbol as usize > self.k() {
            return None;
        }
        self.branch(symbol).inverse(y)
    }

    /// Same map in float arithmetic.
    pub fn to_float(&self) -> PiecewiseMonotonicMap<f64> {
        PiecewiseMonotonicMap {
            endpoints: self.endpoints.iter().map(Scalar::to_f64).collect(),
            branches: self.branches.iter().map(|b| b.map_scalars(Scalar::to_f64)).collect(),
            boundary_images: self.boundary_images.iter().map(Scalar::to_f64).collect(),
        }
    }

    /// Restriction to an invariant interval `[a,b]`, conjugated to `[0,1]`
    /// by `h(y) = a + (b-a) y`. Returns the restricted map together with the
    /// original symbol of every restricted branch.
    pub fn restrict_to(&self, a: &S, b: &S) -> Result<(PiecewiseMonotonicMap<S>, Vec<Symbol>), MapError> {
        let not_invariant = || MapError::NotInvariant(a.to_string(), b.to_string());
        if !(S::gap_positive(a, b) && *a >= S::zero() && *b <= S::one()) {
            return Err(not_invariant());
        }
        let target = Interval::closed(a.clone(), b.clone());
        let width = b.clone() - a.clone();
        let to_local = |x: &S| (x.clone() - a.clone()) / width.clone();
        let mut endpoints = vec![S::zero()];
        let mut kinds = Vec::new();
        let mut symbol_map = Vec::new();
        for (j, br) in self.branches.iter().enumerate() {
            let piece = Interval::closed(br.lo.clone(), br.hi.clone()).intersect(&target);
            if !piece.has_interior() {
                continue;
            }
            if !br.image_of(&piece).is_subset_of(&target, EPS) {
                return Err(not_invariant());
            }
            let kind = match &br.kind {
                BranchKind::Affine { slope, intercept } => BranchKind::Affine {
                    slope: slope.clone(),
                    intercept: (slope.clone() * a.clone() + intercept.clone() - a.clone()) / width.clone(),
                },
                BranchKind::Tabulated { xs, .. } => {
                    let mut lx = vec![piece.lo.clone()];
                    lx.extend(xs.iter().filter(|x| **x > piece.lo && **x < piece.hi).cloned());
                    lx.push(piece.hi.clone());
                    let ly = lx.iter().map(|x| to_local(&br.eval(x))).collect();
                    BranchKind::Tabulated { xs: lx.iter().map(to_local).collect(), ys: ly }
                }
            };
            endpoints.push(to_local(&piece.hi));
            kinds.push(kind);
            symbol_map.push((j + 1) as Symbol);
        }
        let last = endpoints.len() - 1;
        endpoints[last] = S::one();
        let map = PiecewiseMonotonicMap::new(endpoints, kinds, None)?;
        Ok((map, symbol_map))
    }
}

/// Constructor-level description of a map.
#[derive(Debug, Clone, PartialEq)]
pub enum MapSpec {
    /// `x ↦ βx mod 1`.
    Beta { beta: Number },
    /// `x ↦ βx + α mod 1`, with the left limit at `x = 1`.
    LinearModOne { beta: Number, alpha: Number },
    /// `x ↦ s·min(x, 1-x)`.
    Tent { slope: Number },
    AffinePieces {
        endpoints: Vec<Number>,
        slopes: Vec<Number>,
        intercepts: Vec<Number>,
        boundary_images: Option<Vec<Number>>,
    },
}

impl MapSpec {
    pub fn numbers(&self) -> Vec<&Number> {
        match self {
            MapSpec::Beta { beta } => vec![beta],
            MapSpec::LinearModOne { beta, alpha } => vec![beta, alpha],
            MapSpec::Tent { slope } => vec![slope],
            MapSpec::AffinePieces { endpoints, slopes, intercepts, boundary_images } => endpoints
                .iter()
                .chain(slopes)
                .chain(intercepts)
                .chain(boundary_images.iter().flatten())
                .collect(),
        }
    }

    /// All parameters rational, so the map can be built in exact mode.
    pub fn is_rational(&self) -> bool {
        self.numbers().iter().all(|n| n.is_rational())
    }

    pub fn family(&self) -> &'static str {
        match self {
            MapSpec::Beta { .. } => "beta",
            MapSpec::LinearModOne { .. } => "linear_mod_one",
            MapSpec::Tent { .. } => "tent",
            MapSpec::AffinePieces { .. } => "affine_pieces",
        }
    }
}

pub fn make_map<S: Scalar>(spec: &MapSpec) -> Result<PiecewiseMonotonicMap<S>, MapError> {
    match spec {
        MapSpec::Beta { beta } => linear_mod_one(beta, &Number::int(0)),
        MapSpec::LinearModOne { beta, alpha } => linear_mod_one(beta, alpha),
        MapSpec::Tent { slope } => {
            let s: S = slope.to_scalar()?;
            if !(s > S::one() && s <= S::from_int(2)) {
                return Err(MapError::TentSlope(slope.to_string()));
            }
            let half = S::from_ratio(1, 2);
            PiecewiseMonotonicMap::new(
                vec![S::zero(), half, S::one()],
                vec![
                    BranchKind::Affine { slope: s.clone(), intercept: S::zero() },
                    BranchKind::Affine { slope: -s.clone(), intercept: s },
                ],
                None,
            )
        }
        MapSpec::AffinePieces { endpoints, slopes, intercepts, boundary_images } => {
            let k = slopes.len();
            if intercepts.len() != k {
                return Err(MapError::Arity { field: "intercepts", expected: k, got: intercepts.len() });
            }
            let ends = endpoints.iter().map(Number::to_scalar).collect::<Result<Vec<S>, _>>()?;
            let kinds = slopes
                .iter()
                .zip(intercepts)
                .map(|(s, c)| Ok(BranchKind::Affine { slope: s.to_scalar()?, intercept: c.to_scalar()? }))
                .collect::<Result<Vec<_>, MapError>>()?;
            let images = boundary_images
                .as_ref()
                .map(|v| v.iter().map(Number::to_scalar).collect::<Result<Vec<S>, _>>())
                .transpose()?;
            PiecewiseMonotonicMap::new(ends, kinds, images)
        }
    }
}

fn linear_mod_one<S: Scalar>(beta_n: &Number, alpha_n: &Number) -> Result<PiecewiseMonotonicMap<S>, MapError> {
    let beta: S = beta_n.to_scalar()?;
    let alpha: S = alpha_n.to_scalar()?;
    if beta <= S::one() {
        return Err(MapError::BetaTooSmall(beta_n.to_string()));
    }
    if alpha < S::zero() || alpha >= S::one() {
        return Err(MapError::AlphaOutOfRange(alpha_n.to_string()));
    }
    let mut endpoints = vec![S::zero()];
    let mut kinds = Vec::new();
    let mut m: i64 = 0;
    loop {
        kinds.push(BranchKind::Affine { slope: beta.clone(), intercept: alpha.clone() - S::from_int(m) });
        let cut = (S::from_int(m + 1) - alpha.clone()) / beta.clone();
        // a cut at (or numerically at) 1 closes the last branch
        if cut < S::one() && S::gap_positive(&cut, &S::one()) {
            endpoints.push(cut);
            m += 1;
        } else {
            endpoints.push(S::one());
            break;
        }
    }
    PiecewiseMonotonicMap::new(endpoints, kinds, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn q(p: i64, d: i64) -> Rational {
        Rational::from_ratio(p, d)
    }

    fn doubling() -> PiecewiseMonotonicMap<Rational> {
        make_map(&MapSpec::Beta { beta: Number::int(2) }).unwrap()
    }

    fn golden() -> PiecewiseMonotonicMap<f64> {
        make_map(&MapSpec::Beta { beta: Number::golden() }).unwrap()
    }

    #[test]
    fn doubling_has_two_full_branches() {
        let t = doubling();
        assert_eq!(t.endpoints(), &[q(0, 1), q(1, 2), q(1, 1)]);
        assert_eq!(t.branch(1).eval(&q(1, 4)), q(1, 2));
        assert_eq!(t.branch(2).eval(&q(3, 4)), q(1, 2));
    }

    #[test]
    fn linear_mod_one_cut_point() {
        let spec = MapSpec::LinearModOne { beta: Number::ratio(9, 5), alpha: Number::ratio(3, 10) };
        let t: PiecewiseMonotonicMap<Rational> = make_map(&spec).unwrap();
        // 1.8x + 0.3 crosses 1 at 7/18 and 2 at 17/18
        assert_eq!(t.endpoints(), &[q(0, 1), q(7, 18), q(17, 18), q(1, 1)]);
        assert!(t.branches().iter().all(|b| b.orientation() == Orientation::Increasing));
        assert_eq!(t.evaluate(&q(1, 2)).unwrap(), q(1, 5));
        // value at 1 is the left limit 1.8 + 0.3 - 2
        assert_eq!(t.evaluate(&q(1, 1)).unwrap(), q(1, 10));
    }

    #[test]
    fn rejects_bad_parameters() {
        let bad_beta = MapSpec::Beta { beta: Number::int(1) };
        assert!(matches!(make_map::<Rational>(&bad_beta), Err(MapError::BetaTooSmall(_))));
        let bad_alpha = MapSpec::LinearModOne { beta: Number::int(2), alpha: Number::int(1) };
        assert!(matches!(make_map::<Rational>(&bad_alpha), Err(MapError::AlphaOutOfRange(_))));
        let bad_tent = MapSpec::Tent { slope: Number::ratio(5, 2) };
        assert!(matches!(make_map::<Rational>(&bad_tent), Err(MapError::TentSlope(_))));
        let overlap = MapSpec::AffinePieces {
            endpoints: vec![Number::int(0), Number::ratio(2, 3), Number::ratio(1, 3), Number::int(1)],
            slopes: vec![Number::int(1), Number::int(1), Number::int(1)],
            intercepts: vec![Number::int(0), Number::int(0), Number::int(0)],
            boundary_images: None,
        };
        assert_eq!(make_map::<Rational>(&overlap), Err(MapError::BadPartition));
        let escaping = MapSpec::AffinePieces {
            endpoints: vec![Number::int(0), Number::int(1)],
            slopes: vec![Number::int(2)],
            intercepts: vec![Number::int(0)],
            boundary_images: None,
        };
        assert_eq!(make_map::<Rational>(&escaping), Err(MapError::ImageEscapes(1)));
    }

    #[test]
    fn golden_mode_requires_floats() {
        let spec = MapSpec::Beta { beta: Number::golden() };
        assert!(!spec.is_rational());
        assert!(make_map::<Rational>(&spec).is_err());
    }

    #[test]
    fn evaluate_examples() {
        let t = doubling();
        assert_eq!(t.evaluate(&q(1, 3)).unwrap(), q(2, 3));
        assert_eq!(t.evaluate(&q(1, 2)).unwrap(), q(1, 1));
        assert_eq!(t.evaluate(&q(0, 1)).unwrap(), q(0, 1));
        assert!(matches!(t.evaluate(&q(3, 2)), Err(MapError::OutOfDomain(_))));
    }

    #[test]
    fn orbit_examples() {
        let t = doubling();
        let o = t.iterate_orbit(&q(1, 3), 4).unwrap();
        assert_eq!(o.points, vec![q(1, 3), q(2, 3), q(1, 3), q(2, 3)]);
        assert_eq!(o.hit_boundary_at, None);
        let o = t.iterate_orbit(&q(1, 4), 3).unwrap();
        assert_eq!(o.points[..2], [q(1, 4), q(1, 2)]);
        assert_eq!(o.hit_boundary_at, Some(1));

        let g = golden();
        let beta = (1.0 + 5f64.sqrt()) / 2.0;
        let o = g.iterate_orbit(&0.5, 3).unwrap();
        assert!((o.points[1] - beta * 0.5).abs() < 1e-15);
        assert!((o.points[2] - (beta * beta * 0.5 - 1.0)).abs() < 1e-15);
        assert_eq!(o.hit_boundary_at, None);
    }

    #[test]
    fn itinerary_examples() {
        let t = doubling();
        assert_eq!(t.itinerary(&q(1, 3), 4).unwrap().symbols(), &[1, 2, 1, 2]);
        assert_eq!(t.itinerary(&q(1, 7), 3).unwrap().symbols(), &[1, 1, 2]);
        assert_eq!(t.itinerary(&q(1, 2), 1), Err(MapError::BoundaryHit(0)));
    }

    #[test]
    fn inverse_branch_examples() {
        let t = doubling();
        assert_eq!(t.inverse_branch(2, &q(1, 3)), Some(q(2, 3)));
        for y in [q(0, 1), q(1, 5), q(1, 1)] {
            assert_eq!(t.inverse_branch(1, &y), Some(y.clone() / q(2, 1)));
        }
        let g = golden();
        assert_eq!(g.inverse_branch(2, &0.9), None);
        let beta = (1.0 + 5f64.sqrt()) / 2.0;
        let x = g.inverse_branch(2, &0.5).unwrap();
        assert!((x - 1.5 / beta).abs() < 1e-15);
    }

    #[test]
    fn tent_is_decreasing_on_second_branch() {
        let t: PiecewiseMonotonicMap<Rational> = make_map(&MapSpec::Tent { slope: Number::int(2) }).unwrap();
        assert_eq!(t.branch(2).orientation(), Orientation::Decreasing);
        assert_eq!(t.evaluate(&q(3, 4)).unwrap(), q(1, 2));
        assert_eq!(t.inverse_branch(2, &q(1, 2)), Some(q(3, 4)));
        assert_eq!(t.evaluate(&q(1, 2)).unwrap(), q(1, 1));
    }

    #[test]
    fn tabulated_branch_round_trip() {
        let t = PiecewiseMonotonicMap::new(
            vec![q(0, 1), q(1, 2), q(1, 1)],
            vec![
                BranchKind::Tabulated { xs: vec![q(0, 1), q(1, 4), q(1, 2)], ys: vec![q(0, 1), q(3, 4), q(1, 1)] },
                BranchKind::Affine { slope: q(-2, 1), intercept: q(2, 1) },
            ],
            None,
        )
        .unwrap();
        for y in [q(0, 1), q(1, 3), q(3, 4), q(9, 10), q(1, 1)] {
            let x = t.inverse_branch(1, &y).unwrap();
            assert_eq!(t.branch(1).eval(&x), y);
        }
        let bad = PiecewiseMonotonicMap::new(
            vec![q(0, 1), q(1, 1)],
            vec![BranchKind::Tabulated { xs: vec![q(0, 1), q(1, 2), q(1, 1)], ys: vec![q(0, 1), q(1, 1), q(1, 2)] }],
            None,
        );
        assert_eq!(bad, Err(MapError::NotMonotone(1)));
    }

    #[test]
    fn restriction_to_invariant_half() {
        // doubling on [0,1/2], tripling on [1/2,1]
        let spec = MapSpec::AffinePieces {
            endpoints: ["0", "1/4", "1/2", "2/3", "5/6", "1"].iter().map(|s| s.parse().unwrap()).collect(),
            slopes: ["2", "2", "3", "3", "3"].iter().map(|s| s.parse().unwrap()).collect(),
            intercepts: ["0", "-1/2", "-1", "-3/2", "-2"].iter().map(|s| s.parse().unwrap()).collect(),
            boundary_images: None,
        };
        let t: PiecewiseMonotonicMap<Rational> = make_map(&spec).unwrap();
        let (left, syms) = t.restrict_to(&q(0, 1), &q(1, 2)).unwrap();
        assert_eq!(syms, vec![1, 2]);
        assert_eq!(left.endpoints(), &[q(0, 1), q(1, 2), q(1, 1)]);
        assert_eq!(left.evaluate(&q(1, 3)).unwrap(), q(2, 3));
        let (right, syms) = t.restrict_to(&q(1, 2), &q(1, 1)).unwrap();
        assert_eq!(syms, vec![3, 4, 5]);
        assert_eq!(right.k(), 3);
        assert!(t.restrict_to(&q(0, 1), &q(1, 3)).is_err());
    }
}
