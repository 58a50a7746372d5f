//! Template axioms: component ordering, slope bounds, and the convexity /
//! slope-set condition on partial sums over intervals where consecutive
//! components are strictly separated. All checks are exact rational
//! comparisons; failures are report entries with witnesses, never errors.

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::dims::Dims;
use crate::error::{Error, Result};
use crate::path::PiecewisePath;
use crate::rational::{frac, rat, Rat};

/// The three template axioms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Axiom {
    /// Components are ordered: `f_1 <= ... <= f_d`.
    Ordering,
    /// Every component slope lies in `[-1/n, 1/m]`.
    SlopeBounds,
    /// On every maximal interval where `f_j < f_{j+1}`, the partial sum of
    /// the first `j` components is convex with slopes in `Z(j)`.
    GapShape,
}

/// A single axiom failure with an exact witness.
#[derive(Debug, Clone, Serialize)]
pub struct Violation {
    pub axiom: Axiom,
    /// Component index for (a)/(b) (1-based, the lower of the pair for (a));
    /// the gap index `j` for (c).
    pub index: u32,
    /// Witness time (a breakpoint of the path).
    #[serde(with = "crate::io::rat_string")]
    pub time: Rat,
    /// Interval on which the failure is observed.
    #[serde(with = "crate::io::rat_pair_string")]
    pub span: (Rat, Rat),
    pub detail: String,
}

/// Outcome of checking all three axioms.
#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn violates(&self, axiom: Axiom) -> bool {
        self.violations.iter().any(|v| v.axiom == axiom)
    }

    pub fn first_of(&self, axiom: Axiom) -> Option<&Violation> {
        self.violations.iter().find(|v| v.axiom == axiom)
    }
}

/// The slope set `Z(j) = { L+/m - L-/n : L+ + L- = j }` with
/// `L+ in [0,m]`, `L- in [0,n]`, sorted ascending.
pub fn slope_set(j: u32, dims: Dims) -> Result<Vec<Rat>> {
    let (m, n) = (dims.m(), dims.n());
    if j > dims.d() {
        return Err(Error::Domain(format!(
            "slope set index {j} out of range [0, {}]",
            dims.d()
        )));
    }
    let lo = j.saturating_sub(n);
    let hi = j.min(m);
    let mut out: Vec<Rat> = (lo..=hi)
        .map(|lp| {
            let lm = j - lp;
            frac(lp as i64, m as i64) - frac(lm as i64, n as i64)
        })
        .collect();
    out.sort();
    Ok(out)
}

/// Checks the template axioms on a finite-horizon path. Exactness: both the
/// maximal strict intervals for axiom (c) and all slope comparisons are
/// resolved from breakpoint data alone, since every component is affine
/// between breakpoints.
pub fn validate_path(path: &PiecewisePath) -> ValidationReport {
    let mut violations = Vec::new();
    check_ordering(path, &mut violations);
    check_slope_bounds(path, &mut violations);
    check_gap_shape(path, &mut violations);
    ValidationReport { violations }
}

fn check_ordering(path: &PiecewisePath, out: &mut Vec<Violation>) {
    // An affine gap f_{i+1} - f_i is nonnegative on a span iff it is
    // nonnegative at both span endpoints, so breakpoints suffice.
    let bps = path.breakpoints();
    for (bi, (t, v)) in bps.iter().zip(path.values()).enumerate() {
        for i in 0..v.len() - 1 {
            if v[i] > v[i + 1] {
                let lo = if bi > 0 { bps[bi - 1].clone() } else { t.clone() };
                let hi = if bi + 1 < bps.len() {
                    bps[bi + 1].clone()
                } else {
                    t.clone()
                };
                out.push(Violation {
                    axiom: Axiom::Ordering,
                    index: (i + 1) as u32,
                    time: t.clone(),
                    span: (lo, hi),
                    detail: format!(
                        "f_{} = {} exceeds f_{} = {} at t = {}",
                        i + 1,
                        v[i],
                        i + 2,
                        v[i + 1],
                        t
                    ),
                });
            }
        }
    }
}

fn check_slope_bounds(path: &PiecewisePath, out: &mut Vec<Violation>) {
    let dims = path.dims();
    let lo = -frac(1, dims.n() as i64);
    let hi = frac(1, dims.m() as i64);
    for piece in path.pieces() {
        for (i, s) in piece.slopes.iter().enumerate() {
            if s < &lo || s > &hi {
                out.push(Violation {
                    axiom: Axiom::SlopeBounds,
                    index: (i + 1) as u32,
                    time: piece.start.clone(),
                    span: (piece.start.clone(), piece.end.clone()),
                    detail: format!(
                        "slope {} of f_{} on [{}, {}] outside [{}, {}]",
                        s,
                        i + 1,
                        piece.start,
                        piece.end,
                        lo,
                        hi
                    ),
                });
            }
        }
    }
}

/// Per-span data used by the gap-shape check.
struct Span {
    start: Rat,
    end: Rat,
    /// Prefix sums of component slopes: `sum_slopes[j]` is the slope of
    /// `f_1 + ... + f_j` on this span.
    sum_slopes: Vec<Rat>,
}

fn check_gap_shape(path: &PiecewisePath, out: &mut Vec<Violation>) {
    let dims = path.dims();
    let d = dims.d_usize();
    let bps = path.breakpoints();
    let vals = path.values();
    let nspans = bps.len() - 1;

    let spans: Vec<Span> = (0..nspans)
        .map(|s| {
            let dt = &bps[s + 1] - &bps[s];
            let mut sum_slopes = Vec::with_capacity(d + 1);
            sum_slopes.push(Rat::zero());
            let mut acc = Rat::zero();
            for i in 0..d {
                acc += (&vals[s + 1][i] - &vals[s][i]) / &dt;
                sum_slopes.push(acc.clone());
            }
            Span {
                start: bps[s].clone(),
                end: bps[s + 1].clone(),
                sum_slopes,
            }
        })
        .collect();

    for j in 0..=d {
        // The convention f_0 = -inf, f_{d+1} = +inf makes the j = 0 and
        // j = d gap conditions always strict.
        let gap_at = |bp: usize| -> Rat {
            if j == 0 || j == d {
                rat(1)
            } else {
                &vals[bp][j] - &vals[bp][j - 1]
            }
        };
        let strict_span = |s: usize| -> bool {
            let (a, b) = (gap_at(s), gap_at(s + 1));
            !a.is_negative() && !b.is_negative() && (a.is_positive() || b.is_positive())
        };
        let zj = slope_set(j as u32, dims).expect("j in range");

        let mut s = 0;
        while s < nspans {
            if !strict_span(s) {
                s += 1;
                continue;
            }
            // Maximal run of strict spans glued at breakpoints where the
            // gap stays strictly positive.
            let mut e = s;
            while e + 1 < nspans && gap_at(e + 1).is_positive() && strict_span(e + 1) {
                e += 1;
            }
            let run_span = (spans[s].start.clone(), spans[e].end.clone());
            for t in s..=e {
                let slope = &spans[t].sum_slopes[j];
                if !zj.contains(slope) {
                    out.push(Violation {
                        axiom: Axiom::GapShape,
                        index: j as u32,
                        time: spans[t].start.clone(),
                        span: run_span.clone(),
                        detail: format!(
                            "slope {slope} of sum of first {j} components on [{}, {}] not in Z({j})",
                            spans[t].start, spans[t].end
                        ),
                    });
                }
                if t > s && spans[t].sum_slopes[j] < spans[t - 1].sum_slopes[j] {
                    out.push(Violation {
                        axiom: Axiom::GapShape,
                        index: j as u32,
                        time: spans[t].start.clone(),
                        span: run_span.clone(),
                        detail: format!(
                            "sum of first {j} components is concave at t = {}",
                            spans[t].start
                        ),
                    });
                }
            }
            s = e + 1;
        }
    }
}

/// A piecewise-linear path together with its validation report.
#[derive(Debug, Clone)]
pub struct Template {
    path: PiecewisePath,
    report: ValidationReport,
}

impl Template {
    /// Runs the axiom checks and attaches the report; invalid paths are
    /// representable so that reports can be inspected downstream.
    pub fn certify(path: PiecewisePath) -> Self {
        let report = validate_path(&path);
        Template { path, report }
    }

    pub fn path(&self) -> &PiecewisePath {
        &self.path
    }

    pub fn report(&self) -> &ValidationReport {
        &self.report
    }

    pub fn is_valid(&self) -> bool {
        self.report.is_valid()
    }

    pub fn dims(&self) -> Dims {
        self.path.dims()
    }
}

/// A template with marked anchor times at which it takes the zero vector.
#[derive(Debug, Clone)]
pub struct LinkedTemplate {
    template: Template,
    anchors: Vec<Rat>,
}

impl LinkedTemplate {
    pub fn new(template: Template, anchors: Vec<Rat>) -> Result<Self> {
        if anchors.is_empty() || !anchors[0].is_zero() {
            return Err(Error::Domain("first anchor must be exactly 0".into()));
        }
        if anchors.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Domain("anchors must be strictly increasing".into()));
        }
        let path = template.path();
        for a in &anchors {
            if !path.contains_time(a) {
                return Err(Error::Domain(format!("anchor {a} outside domain")));
            }
            if path.eval(a)?.iter().any(|v| !v.is_zero()) {
                return Err(Error::Domain(format!(
                    "template value at anchor {a} is not the zero vector"
                )));
            }
        }
        Ok(LinkedTemplate { template, anchors })
    }

    pub fn template(&self) -> &Template {
        &self.template
    }

    pub fn path(&self) -> &PiecewisePath {
        self.template.path()
    }

    pub fn anchors(&self) -> &[Rat] {
        &self.anchors
    }

    pub fn dims(&self) -> Dims {
        self.template.dims()
    }

    /// Restriction to `[0, new_end]`; anchors beyond the new horizon are
    /// dropped (a split last interval keeps its partial path, but only
    /// genuine zeros remain anchors).
    pub fn restrict(&self, new_end: &Rat) -> Result<Self> {
        let path = self.path().restrict(new_end)?;
        let anchors = self
            .anchors
            .iter()
            .filter(|a| *a <= new_end)
            .cloned()
            .collect();
        LinkedTemplate::new(Template::certify(path), anchors)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_sets_match_enumeration() {
        let dims = Dims::new(2, 1).unwrap();
        assert_eq!(slope_set(1, dims).unwrap(), vec![rat(-1), frac(1, 2)]);
        assert_eq!(slope_set(3, dims).unwrap(), vec![rat(0)]);
        assert_eq!(slope_set(0, Dims::new(3, 2).unwrap()).unwrap(), vec![rat(0)]);
        assert!(slope_set(4, dims).is_err());
    }

    #[test]
    fn constant_zero_path_is_a_valid_template() {
        let dims = Dims::new(2, 2).unwrap();
        let p = PiecewisePath::zero(dims, rat(7)).unwrap();
        assert!(validate_path(&p).is_valid());
    }

    #[test]
    fn slope_bound_violation_is_witnessed() {
        // Single steep component pair: slope 2/m on the first span.
        let dims = Dims::new(2, 1).unwrap();
        let p = PiecewisePath::new(
            dims,
            vec![rat(0), rat(1)],
            vec![vec![rat(0), rat(0), rat(0)], vec![rat(1), rat(1), rat(1)]],
        )
        .unwrap();
        let report = validate_path(&p);
        assert!(report.violates(Axiom::SlopeBounds));
        let v = report.first_of(Axiom::SlopeBounds).unwrap();
        assert_eq!(v.span, (rat(0), rat(1)));
    }

    #[test]
    fn gap_shape_catches_flat_separated_component() {
        // f_1 = 0, f_2 = 1 on [0,1] for (1,1): slope 0 of f_1 is not in
        // Z(1) = {-1, 1}, while ordering and slope bounds hold.
        let dims = Dims::new(1, 1).unwrap();
        let p = PiecewisePath::new(
            dims,
            vec![rat(0), rat(1)],
            vec![vec![rat(0), rat(1)], vec![rat(0), rat(1)]],
        )
        .unwrap();
        let report = validate_path(&p);
        assert!(!report.violates(Axiom::Ordering));
        assert!(!report.violates(Axiom::SlopeBounds));
        assert!(report.violates(Axiom::GapShape));
    }

    #[test]
    fn gap_shape_catches_concavity() {
        // f_1 bumps up then down between strictly larger f_2: concave sum.
        let dims = Dims::new(1, 1).unwrap();
        let p = PiecewisePath::new(
            dims,
            vec![rat(0), rat(1), rat(2)],
            vec![
                vec![rat(-1), rat(1)],
                vec![rat(0), rat(2)],
                vec![rat(-1), rat(3)],
            ],
        )
        .unwrap();
        let report = validate_path(&p);
        assert!(report.violates(Axiom::GapShape));
    }
}
