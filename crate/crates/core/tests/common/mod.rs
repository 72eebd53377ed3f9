//! Random rational affine maps and the invariant checks run over them.

#![allow(dead_code)]

use hofbauer::diagram::{build_diagram, irreducible_core, spectral_radius_entropy, DiagramError};
use hofbauer::interval_map::{make_map, MapSpec, PiecewiseMonotonicMap};
use hofbauer::linalg::{induced, spectral_radius, LinalgError};
use hofbauer::measures::{birkhoff_average, integral, parry_measure, periodic_catalog, Observable};
use hofbauer::scalar::{Number, Rational, Scalar};
use hofbauer::symbolic::{admissible_words, count_words, cylinder, DEFAULT_BUDGET};
use proptest::prelude::*;

/// Raw parameters of a piecewise affine map on `[0,1]`.
#[derive(Debug, Clone)]
pub struct AffineParams {
    /// Interior cut numerators over `CUT_DEN`.
    pub cuts: Vec<i64>,
    /// Per branch: image `[lo/8, hi/8]` and orientation.
    pub images: Vec<(i64, i64, bool)>,
}

pub const CUT_DEN: i64 = 12;

pub fn affine_params() -> impl Strategy<Value = AffineParams> {
    (2usize..=3)
        .prop_flat_map(|k| {
            (
                proptest::sample::subsequence((1..CUT_DEN).collect::<Vec<_>>(), k - 1),
                proptest::collection::vec((0i64..=2, 6i64..=8, any::<bool>()), k),
            )
        })
        .prop_map(|(cuts, images)| AffineParams { cuts, images })
}

pub fn spec_of(p: &AffineParams) -> MapSpec {
    let q = |n: i64, d: i64| Rational::from_ratio(n, d);
    let mut ends = vec![q(0, 1)];
    ends.extend(p.cuts.iter().map(|&c| q(c, CUT_DEN)));
    ends.push(q(1, 1));
    let mut slopes = Vec::new();
    let mut intercepts = Vec::new();
    for (i, &(lo, hi, increasing)) in p.images.iter().enumerate() {
        let (a, b) = (q(lo, 8), q(hi, 8));
        let width = ends[i + 1].clone() - ends[i].clone();
        let s = (b.clone() - a.clone()) / width;
        if increasing {
            intercepts.push(a - s.clone() * ends[i].clone());
            slopes.push(s);
        } else {
            intercepts.push(b + s.clone() * ends[i].clone());
            slopes.push(-s);
        }
    }
    let num = |r: Rational| Number::Rational(r);
    MapSpec::AffinePieces {
        endpoints: ends.into_iter().map(num).collect(),
        slopes: slopes.into_iter().map(num).collect(),
        intercepts: intercepts.into_iter().map(num).collect(),
        boundary_images: None,
    }
}

pub fn map_of(p: &AffineParams) -> PiecewiseMonotonicMap<Rational> {
    make_map(&spec_of(p)).expect("generated map is valid")
}

pub const DEPTH: usize = 6;

/// `cyl(ws) ⊆ cyl(w)` for admissible `w` up to length 4.
pub fn cylinder_nesting(map: &PiecewiseMonotonicMap<Rational>) -> Result<(), String> {
    for n in 1..=4 {
        for w in admissible_words(map, n, DEFAULT_BUDGET).map_err(|e| e.to_string())? {
            let outer = cylinder(map, &w).interval;
            for s in map.symbols() {
                let mut ws = w.clone();
                ws.push(s);
                let inner = cylinder(map, &ws).interval;
                if !inner.is_subset_of(&outer, 0.0) {
                    return Err(format!("cyl({ws}) = {inner} escapes cyl({w}) = {outer}"));
                }
            }
        }
    }
    Ok(())
}

/// `N(m+n) ≤ N(m) N(n)` for word counts.
pub fn count_submultiplicative(map: &PiecewiseMonotonicMap<Rational>) -> Result<(), String> {
    let counts: Vec<u64> = (0..=6)
        .map(|n| if n == 0 { Ok(1) } else { count_words(map, n, DEFAULT_BUDGET) })
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    for m in 1..=3 {
        for n in 1..=3 {
            if counts[m + n] > counts[m] * counts[n] {
                return Err(format!("N({}) = {} > N({m}) N({n}) = {}", m + n, counts[m + n], counts[m] * counts[n]));
            }
        }
    }
    Ok(())
}

fn rho_or_zero(adj: &[Vec<usize>]) -> Result<f64, String> {
    match spectral_radius(adj) {
        Ok(r) => Ok(r),
        Err(LinalgError::NoCycle) => Ok(0.0),
        Err(e) => Err(e.to_string()),
    }
}

/// Spectral radius never decreases as vertices are added in diagram order.
pub fn perron_monotone(map: &PiecewiseMonotonicMap<Rational>) -> Result<(), String> {
    let d = build_diagram(map, DEPTH).map_err(|e| e.to_string())?;
    let mut prev = 0.0;
    for size in 1..=d.len().min(40) {
        let prefix: Vec<usize> = (0..size).collect();
        let rho = rho_or_zero(&induced(&d.arrows, &prefix))?;
        if rho < prev - 1e-9 {
            return Err(format!("rho drops from {prev} to {rho} at {size} vertices"));
        }
        prev = rho;
    }
    Ok(())
}

/// Entropy of the maximal-entropy chain equals `log ρ` of the core.
pub fn parry_entropy(map: &PiecewiseMonotonicMap<Rational>) -> Result<(), String> {
    let d = build_diagram(map, DEPTH).map_err(|e| e.to_string())?;
    let core = match irreducible_core(&d) {
        Ok(c) => c,
        Err(DiagramError::NoCycle) => return Ok(()),
        Err(e) => return Err(e.to_string()),
    };
    let h = spectral_radius_entropy(&core).map_err(|e| e.to_string())?;
    let m = parry_measure(&core).map_err(|e| e.to_string())?;
    if (m.entropy() - h).abs() > 1e-10 {
        return Err(format!("chain entropy {} differs from log rho {h}", m.entropy()));
    }
    Ok(())
}

/// Birkhoff averages over whole periods equal the periodic integral exactly.
pub fn periodic_exact(map: &PiecewiseMonotonicMap<Rational>) -> Result<(), String> {
    let phi = Observable::Identity;
    for o in periodic_catalog(map, 3, DEFAULT_BUDGET).map_err(|e| e.to_string())? {
        if o.boundary {
            continue;
        }
        let direct = o.orbit.iter().cloned().fold(Rational::zero(), |a, b| a + b) / Rational::from_int(o.period() as i64);
        let stored = integral(&o, &phi).map_err(|e| e.to_string())?;
        for reps in [1, 3] {
            let avg = birkhoff_average(map, &o.point, &phi, reps * o.period()).map_err(|e| e.to_string())?;
            if avg != direct || stored != direct {
                return Err(format!("orbit {}: average {avg}, integral {stored}, direct {direct}", o.word));
            }
        }
    }
    Ok(())
}

/// Each vertex has at most one successor per symbol.
pub fn out_degree_bounded(map: &PiecewiseMonotonicMap<Rational>) -> Result<(), String> {
    let d = build_diagram(map, DEPTH).map_err(|e| e.to_string())?;
    for (i, out) in d.arrows.iter().enumerate() {
        if out.len() > map.k() {
            return Err(format!("vertex {i} has {} successors with k = {}", out.len(), map.k()));
        }
    }
    Ok(())
}

pub type Property = fn(&PiecewiseMonotonicMap<Rational>) -> Result<(), String>;

pub const PROPERTIES: [(&str, Property); 6] = [
    ("cylinder nesting", cylinder_nesting),
    ("count submultiplicativity", count_submultiplicative),
    ("perron monotonicity", perron_monotone),
    ("parry entropy", parry_entropy),
    ("periodic exactness", periodic_exact),
    ("out-degree bound", out_degree_bounded),
];
