//! Entropy estimators and the sup formula over invariant components.
//!
//! Word counting gives `(1/n) log #L_n`, which decreases toward the
//! topological entropy; spectral radii of diagram cores give lower bounds
//! that increase with the truncation depth. All values are in nats.

use std::fmt;
use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::diagram::{build_diagram, irreducible_core, spectral_radius_entropy, DiagramError};
use crate::interval::Interval;
use crate::interval_map::{MapError, PiecewiseMonotonicMap};
use crate::measures::{integral, periodic_catalog, MeasureError, Observable, PeriodicOrbit};
use crate::scalar::Scalar;
use crate::symbolic::{count_words, SymbolicError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EntropyError {
    #[error(transparent)]
    Symbolic(#[from] SymbolicError),
    #[error(transparent)]
    Diagram(#[from] DiagramError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error("depths must be strictly increasing")]
    DepthsNotIncreasing,
    #[error("word length must be positive")]
    ZeroLength,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    WordCount,
    Spectral,
    ExactFamily,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    LowerBound,
    UpperTrend,
    Exact,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::WordCount => "word-count",
            Method::Spectral => "spectral",
            Method::ExactFamily => "exact-family",
        })
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::LowerBound => "lower-bound",
            Direction::UpperTrend => "upper-trend",
            Direction::Exact => "exact",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyEstimate {
    pub value: f64,
    pub method: Method,
    pub direction: Direction,
    /// Word length `n` or truncation depth.
    pub param: usize,
}

/// `r` when `count = r^n` for an integer `r`.
fn integer_root(count: u64, n: usize) -> Option<u64> {
    let guess = (count as f64).powf(1.0 / n as f64).round() as u64;
    [guess.saturating_sub(1), guess, guess + 1]
        .into_iter()
        .find(|&r| r > 0 && (r as u128).checked_pow(n as u32) == Some(count as u128))
}

/// `(1/n) log #{admissible words of length n}`.
pub fn entropy_word_count<S: Scalar>(
    map: &PiecewiseMonotonicMap<S>,
    n: usize,
    budget: u64,
) -> Result<EntropyEstimate, EntropyError> {
    if n == 0 {
        return Err(EntropyError::ZeroLength);
    }
    let count = count_words(map, n, budget)?;
    // a perfect power gives the logarithm without rounding through the division
    let value = match integer_root(count, n) {
        Some(r) => (r as f64).ln(),
        None => (count as f64).ln() / n as f64,
    };
    Ok(EntropyEstimate { value, method: Method::WordCount, direction: Direction::UpperTrend, param: n })
}

/// Core spectral entropy at each depth, from one diagram built at the largest depth.
pub fn entropy_spectral_sequence<S: Scalar>(
    map: &PiecewiseMonotonicMap<S>,
    depths: &[usize],
) -> Result<Vec<EntropyEstimate>, EntropyError> {
    if !depths.windows(2).all(|w| w[0] < w[1]) {
        return Err(EntropyError::DepthsNotIncreasing);
    }
    let Some(&max) = depths.last() else { return Ok(Vec::new()) };
    let full = build_diagram(map, max)?;
    depths
        .iter()
        .map(|&d| {
            let core = irreducible_core(&full.truncate(d))?;
            Ok(EntropyEstimate {
                value: spectral_radius_entropy(&core)?,
                method: Method::Spectral,
                direction: Direction::LowerBound,
                param: d,
            })
        })
        .collect()
}

pub fn estimates_csv(estimates: &[EntropyEstimate]) -> String {
    let mut out = String::from("method,param,value,direction\n");
    for e in estimates {
        let _ = writeln!(out, "{},{},{:.15},{}", e.method, e.param, e.value, e.direction);
    }
    out
}

/// One invariant interval of a non-transitive map.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentReport {
    pub interval: Interval<f64>,
    pub entropy: EntropyEstimate,
    /// `(min, max)` of periodic integrals over the component, if any orbit was found.
    pub spread: Option<(f64, f64)>,
}

impl ComponentReport {
    pub fn spread_width(&self) -> f64 {
        self.spread.map_or(0.0, |(lo, hi)| hi - lo)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FormulaValue {
    pub value: f64,
    /// No component has positive spread, so the irregular set is empty.
    pub empty: bool,
    /// Indices of the components whose spread exceeds the tolerance.
    pub qualifying: Vec<usize>,
}

/// Sup of component entropies over components with spread `> tol`.
pub fn irregular_entropy_formula(reports: &[ComponentReport], tol: f64) -> FormulaValue {
    let qualifying: Vec<usize> = (0..reports.len()).filter(|&i| reports[i].spread_width() > tol).collect();
    let value = qualifying.iter().map(|&i| reports[i].entropy.value).fold(0.0, f64::max);
    FormulaValue { value, empty: qualifying.is_empty(), qualifying }
}

/// Builds a report for each invariant interval `[a, b]`: the restriction is
/// conjugated to `[0,1]`, its core entropy computed at `depth`, and periodic
/// integrals of `φ` evaluated in the original coordinates (real observables)
/// or on the original symbols (symbolic observables).
pub fn decompose<S: Scalar>(
    map: &PiecewiseMonotonicMap<S>,
    components: &[(S, S)],
    phi: &Observable<S>,
    depth: usize,
    max_period: usize,
    budget: u64,
) -> Result<Vec<ComponentReport>, EntropyError> {
    components
        .iter()
        .map(|(a, b)| {
            let (sub, symbol_map) = map.restrict_to(a, b)?;
            let value = match irreducible_core(&build_diagram(&sub, depth)?) {
                Ok(core) => spectral_radius_entropy(&core)?,
                Err(DiagramError::NoCycle) => 0.0,
                Err(e) => return Err(e.into()),
            };
            let width = b.clone() - a.clone();
            let mut spread: Option<(f64, f64)> = None;
            for o in periodic_catalog(&sub, max_period, budget)? {
                if o.boundary && !phi.is_symbolic() {
                    continue;
                }
                let original = PeriodicOrbit {
                    word: crate::symbolic::Word::new(
                        o.word.symbols().iter().map(|&s| symbol_map[s as usize - 1]).collect(),
                    ),
                    point: a.clone() + width.clone() * o.point.clone(),
                    orbit: o.orbit.iter().map(|y| a.clone() + width.clone() * y.clone()).collect(),
                    boundary: o.boundary,
                };
                let v = integral(&original, phi)?.to_f64();
                spread = Some(spread.map_or((v, v), |(lo, hi)| (lo.min(v), hi.max(v))));
            }
            Ok(ComponentReport {
                interval: Interval::closed(a.to_f64(), b.to_f64()),
                entropy: EntropyEstimate { value, method: Method::Spectral, direction: Direction::LowerBound, param: depth },
                spread,
            })
        })
        .collect()
}

pub fn components_csv(reports: &[ComponentReport], formula: &FormulaValue) -> String {
    let mut out = String::from("component,lo,hi,entropy,spread_min,spread_max,qualifies\n");
    for (i, r) in reports.iter().enumerate() {
        let (lo, hi) = r.spread.map_or((String::new(), String::new()), |(a, b)| (format!("{a:.15}"), format!("{b:.15}")));
        let _ = writeln!(
            out,
            "{},{},{},{:.15},{},{},{}",
            i + 1,
            r.interval.lo,
            r.interval.hi,
            r.entropy.value,
            lo,
            hi,
            formula.qualifying.contains(&i)
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval_map::{make_map, MapSpec};
    use crate::scalar::{Number, Rational};
    use crate::symbolic::DEFAULT_BUDGET;

    fn report(entropy: f64, spread: f64) -> ComponentReport {
        ComponentReport {
            interval: Interval::unit(),
            entropy: EntropyEstimate { value: entropy, method: Method::Spectral, direction: Direction::LowerBound, param: 1 },
            spread: Some((0.0, spread)),
        }
    }

    #[test]
    fn word_count_examples() {
        let t: PiecewiseMonotonicMap<Rational> = make_map(&MapSpec::Beta { beta: Number::int(2) }).unwrap();
        assert_eq!(entropy_word_count(&t, 10, DEFAULT_BUDGET).unwrap().value, 2f64.ln());
        let tent: PiecewiseMonotonicMap<Rational> = make_map(&MapSpec::Tent { slope: Number::int(2) }).unwrap();
        assert_eq!(entropy_word_count(&tent, 10, DEFAULT_BUDGET).unwrap().value, 2f64.ln());
        let g: PiecewiseMonotonicMap<f64> = make_map(&MapSpec::Beta { beta: Number::golden() }).unwrap();
        // #L_12 = F_14 = 377
        let e = entropy_word_count(&g, 12, DEFAULT_BUDGET).unwrap();
        assert!((e.value - 377f64.ln() / 12.0).abs() < 1e-15);
        assert!(e.value > entropy_word_count(&g, 16, DEFAULT_BUDGET).unwrap().value);
    }

    #[test]
    fn spectral_sequences() {
        let t: PiecewiseMonotonicMap<Rational> = make_map(&MapSpec::Beta { beta: Number::int(2) }).unwrap();
        let v = entropy_spectral_sequence(&t, &[1, 2, 3]).unwrap();
        assert!(v.iter().all(|e| e.value == 2f64.ln()));
        assert_eq!(entropy_spectral_sequence(&t, &[3, 2]), Err(EntropyError::DepthsNotIncreasing));
        let g: PiecewiseMonotonicMap<f64> = make_map(&MapSpec::Beta { beta: Number::golden() }).unwrap();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        for e in entropy_spectral_sequence(&g, &[2, 4, 6]).unwrap() {
            assert!((e.value - phi.ln()).abs() < 1e-10);
        }
    }

    #[test]
    fn mod_one_lower_bounds_increase() {
        let spec = MapSpec::LinearModOne { beta: Number::ratio(9, 5), alpha: Number::ratio(3, 10) };
        let t: PiecewiseMonotonicMap<Rational> = make_map(&spec).unwrap();
        let v = entropy_spectral_sequence(&t, &[4, 8, 12]).unwrap();
        assert!(v.windows(2).all(|w| w[1].value >= w[0].value - 1e-12));
        assert!(v.iter().all(|e| e.value <= 1.8f64.ln() + 1e-9));
        assert!(v[2].value >= 1.8f64.ln() - 0.02, "{v:?}");
    }

    #[test]
    fn formula_examples() {
        let f = irregular_entropy_formula(&[report(2f64.ln(), 0.2), report(3f64.ln(), 0.0)], 1e-12);
        assert_eq!((f.value, f.empty, f.qualifying.clone()), (2f64.ln(), false, vec![0]));
        let f = irregular_entropy_formula(&[report(1.0, 0.0), report(2.0, 0.0)], 1e-12);
        assert!(f.empty);
        assert_eq!(f.value, 0.0);
        assert_eq!(irregular_entropy_formula(&[report(0.48, 0.5)], 1e-12).value, 0.48);
    }

    #[test]
    fn decompose_doubling_and_tripling() {
        let spec = MapSpec::AffinePieces {
            endpoints: ["0", "1/4", "1/2", "2/3", "5/6", "1"].iter().map(|s| s.parse().unwrap()).collect(),
            slopes: ["2", "2", "3", "3", "3"].iter().map(|s| s.parse().unwrap()).collect(),
            intercepts: ["0", "-1/2", "-1", "-3/2", "-2"].iter().map(|s| s.parse().unwrap()).collect(),
            boundary_images: None,
        };
        let t: PiecewiseMonotonicMap<Rational> = make_map(&spec).unwrap();
        let half = Rational::from_ratio(1, 2);
        let comps = [(Rational::from_int(0), half.clone()), (half, Rational::from_int(1))];
        // bump supported on the left half: oscillates there, constant 0 on the right
        let phi: Observable<Rational> = "pl:0:0,1/4:1,1/2:0".parse().unwrap();
        let reports = decompose(&t, &comps, &phi, 4, 3, DEFAULT_BUDGET).unwrap();
        assert!((reports[0].entropy.value - 2f64.ln()).abs() < 1e-12);
        assert!((reports[1].entropy.value - 3f64.ln()).abs() < 1e-12);
        assert!(reports[0].spread_width() > 0.05);
        assert_eq!(reports[1].spread_width(), 0.0);
        let f = irregular_entropy_formula(&reports, 1e-12);
        assert!((f.value - 2f64.ln()).abs() < 1e-12);
        assert_eq!(f.qualifying, vec![0]);
    }
}
