//! Combinatorial scoring of templates: intervals of equality on each linear
//! piece, the integer pair `(M+, M-)` solving the slope-sum system, the
//! index partition `S+ / S-`, the pair count `delta`, and exact finite-
//! horizon Cesaro averages against the closed-form target
//! `delta_{m,n} = mn - mn/(m+n)`.

use num_traits::{Signed, Zero};

use crate::dims::Dims;
use crate::error::{Error, Result};
use crate::path::LinearPiece;
use crate::rational::{rat, rat_abs, Rat};
use crate::template::Template;

/// One interval of equality `(p, q]` on a linear piece, with the solved
/// integer pair. `M+` and `M-` are nonnegative integers; the zero value does
/// occur (for instance on the descending part of the elementary block).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EqualityInterval {
    pub p: u32,
    pub q: u32,
    pub m_plus: u32,
    pub m_minus: u32,
}

/// Scoring data for one maximal linear piece, clipped to the horizon.
#[derive(Debug, Clone)]
pub struct ScoreSegment {
    pub start: Rat,
    pub end: Rat,
    pub intervals: Vec<EqualityInterval>,
    /// Indices in `S+` (ascending, 1-based).
    pub s_plus: Vec<u32>,
    /// Indices in `S-` (ascending, 1-based).
    pub s_minus: Vec<u32>,
    pub delta: u64,
    /// Cesaro average of `delta` over `[0, end]`.
    pub running_average: Rat,
}

/// Full scoring of a template over `[0, horizon]`.
#[derive(Debug, Clone)]
pub struct ScoreReport {
    pub dims: Dims,
    pub horizon: Rat,
    pub segments: Vec<ScoreSegment>,
    /// `(1/T) * integral of delta over [0, T]`, exact.
    pub average: Rat,
    /// Running minimum of the averages at piece boundaries. A finite horizon
    /// cannot certify a liminf, so this is labeled an estimate.
    pub liminf_estimate: Rat,
    pub target: Rat,
    pub abs_error: Rat,
}

/// `delta_{m,n} = mn - mn/(m+n)`, exact.
pub fn closed_form_delta(dims: Dims) -> Rat {
    let mn = rat((dims.m() as i64) * (dims.n() as i64));
    let d = rat(dims.d() as i64);
    &mn - &mn / d
}

/// Partition of `[1, d]` into intervals of equality on a piece, resolved at
/// the piece midpoint. On an open interval where the components are affine
/// and ordered, equality at one interior point is equality on the whole
/// piece, so the midpoint decides exactly.
pub fn equality_intervals(dims: Dims, piece: &LinearPiece) -> Result<Vec<(u32, u32)>> {
    if !piece.length().is_positive() {
        return Err(Error::Domain("degenerate piece of zero length".into()));
    }
    let mid = piece.value_at(&piece.midpoint());
    let d = dims.d_usize();
    debug_assert_eq!(mid.len(), d);
    let mut out = Vec::new();
    let mut p = 0usize;
    for i in 1..=d {
        if i == d || mid[i] != mid[i - 1] {
            out.push((p as u32, i as u32));
            p = i;
        }
    }
    Ok(out)
}

/// Solves `M+ + M- = q - p` and `M+/m - M-/n = sum of slopes p+1..q`.
/// Axiom (c) guarantees the solution is a pair of nonnegative integers for
/// valid templates; anything else reports an invalid-template error.
pub fn m_plus_minus(dims: Dims, piece: &LinearPiece, interval: (u32, u32)) -> Result<(u32, u32)> {
    let (p, q) = interval;
    let count = rat((q - p) as i64);
    let slope_sum: Rat = piece.slopes[p as usize..q as usize].iter().sum();
    let m = rat(dims.m() as i64);
    let n = rat(dims.n() as i64);
    let m_plus = &m * (&n * &slope_sum + &count) / rat(dims.d() as i64);
    let m_minus = &count - &m_plus;
    let to_nonneg_int = |r: &Rat, name: &str| -> Result<u32> {
        if !r.is_integer() || r.is_negative() {
            return Err(Error::InvalidTemplate(format!(
                "{name} = {r} on [{}, {}] is not a nonnegative integer; \
                 the path does not satisfy the template axioms",
                piece.start, piece.end
            )));
        }
        use num_traits::ToPrimitive;
        r.to_integer().to_u32().ok_or_else(|| {
            Error::InvalidTemplate(format!("{name} = {r} out of range"))
        })
    };
    Ok((
        to_nonneg_int(&m_plus, "M+")?,
        to_nonneg_int(&m_minus, "M-")?,
    ))
}

/// Equality intervals with their solved `(M+, M-)` pairs.
pub fn piece_intervals(dims: Dims, piece: &LinearPiece) -> Result<Vec<EqualityInterval>> {
    equality_intervals(dims, piece)?
        .into_iter()
        .map(|(p, q)| {
            let (m_plus, m_minus) = m_plus_minus(dims, piece, (p, q))?;
            Ok(EqualityInterval {
                p,
                q,
                m_plus,
                m_minus,
            })
        })
        .collect()
}

/// `S+` is the union over equality intervals of `(p, p + M+]`; `S-` is the
/// complement in `[1, d]`.
pub fn s_plus_minus(dims: Dims, piece: &LinearPiece) -> Result<(Vec<u32>, Vec<u32>)> {
    let intervals = piece_intervals(dims, piece)?;
    Ok(split_indices(dims, &intervals))
}

fn split_indices(dims: Dims, intervals: &[EqualityInterval]) -> (Vec<u32>, Vec<u32>) {
    let mut plus = Vec::new();
    for iv in intervals {
        plus.extend(iv.p + 1..=iv.p + iv.m_plus);
    }
    plus.sort_unstable();
    let minus = (1..=dims.d()).filter(|i| !plus.contains(i)).collect();
    (plus, minus)
}

/// Number of pairs `(i+, i-) in S+ x S-` with `i+ < i-`.
pub fn delta_on_piece(dims: Dims, piece: &LinearPiece) -> Result<u64> {
    let (plus, minus) = s_plus_minus(dims, piece)?;
    Ok(count_crossing_pairs(&plus, &minus))
}

pub(crate) fn count_crossing_pairs(plus: &[u32], minus: &[u32]) -> u64 {
    plus.iter()
        .map(|ip| minus.iter().filter(|im| *im > ip).count() as u64)
        .sum()
}

fn checked_horizon(template: &Template, horizon: &Rat) -> Result<()> {
    if !template.is_valid() {
        return Err(Error::InvalidTemplate(
            "scoring requires a path that passes the template axioms".into(),
        ));
    }
    if !horizon.is_positive() || horizon > template.path().end() {
        return Err(Error::Domain(format!(
            "horizon {horizon} outside (0, {}]",
            template.path().end()
        )));
    }
    Ok(())
}

/// Exact `(1/T) * integral over [0, T]` of the piecewise-constant `delta`.
/// Values at isolated breakpoints are irrelevant (measure zero).
pub fn average_delta(template: &Template, horizon: &Rat) -> Result<Rat> {
    checked_horizon(template, horizon)?;
    let dims = template.dims();
    let mut integral = Rat::zero();
    for piece in template.path().pieces() {
        if &piece.start >= horizon {
            break;
        }
        let end = piece.end.clone().min(horizon.clone());
        let delta = delta_on_piece(dims, &piece)?;
        integral += (&end - &piece.start) * rat(delta as i64);
    }
    Ok(integral / horizon)
}

/// Precomputed prefix integrals of `delta` for repeated exact averaging at
/// many horizons of the same template.
pub struct DeltaProfile {
    /// Piece end times, ascending.
    ends: Vec<Rat>,
    /// Piece start times.
    starts: Vec<Rat>,
    /// Integral of `delta` over `[0, ends[i]]`.
    prefix: Vec<Rat>,
    deltas: Vec<u64>,
}

impl DeltaProfile {
    pub fn new(template: &Template) -> Result<Self> {
        if !template.is_valid() {
            return Err(Error::InvalidTemplate(
                "scoring requires a path that passes the template axioms".into(),
            ));
        }
        let dims = template.dims();
        let mut ends = Vec::new();
        let mut starts = Vec::new();
        let mut prefix = Vec::new();
        let mut deltas = Vec::new();
        let mut acc = Rat::zero();
        for piece in template.path().pieces() {
            let delta = delta_on_piece(dims, &piece)?;
            acc += piece.length() * rat(delta as i64);
            starts.push(piece.start.clone());
            ends.push(piece.end.clone());
            prefix.push(acc.clone());
            deltas.push(delta);
        }
        Ok(DeltaProfile {
            ends,
            starts,
            prefix,
            deltas,
        })
    }

    /// Integral of `delta` over `[0, horizon]`.
    pub fn integral_to(&self, horizon: &Rat) -> Result<Rat> {
        let last = self.ends.last().ok_or_else(|| {
            Error::Domain("template has no pieces".into())
        })?;
        if !horizon.is_positive() || horizon > last {
            return Err(Error::Domain(format!(
                "horizon {horizon} outside (0, {last}]"
            )));
        }
        let i = self.ends.partition_point(|e| e < horizon);
        let before = if i == 0 {
            Rat::zero()
        } else {
            self.prefix[i - 1].clone()
        };
        // Pieces are contiguous from 0, so starts[i] < horizon <= ends[i].
        Ok(before + (horizon - &self.starts[i]) * rat(self.deltas[i] as i64))
    }

    pub fn average_at(&self, horizon: &Rat) -> Result<Rat> {
        Ok(self.integral_to(horizon)? / horizon)
    }
}

/// Per-piece scoring with running Cesaro averages and the closed-form
/// target.
pub fn score_report(template: &Template, horizon: &Rat) -> Result<ScoreReport> {
    checked_horizon(template, horizon)?;
    let dims = template.dims();
    let mut segments = Vec::new();
    let mut integral = Rat::zero();
    let mut liminf_estimate: Option<Rat> = None;
    for piece in template.path().pieces() {
        if &piece.start >= horizon {
            break;
        }
        let end = piece.end.clone().min(horizon.clone());
        let intervals = piece_intervals(dims, &piece)?;
        let (s_plus, s_minus) = split_indices(dims, &intervals);
        let delta = count_crossing_pairs(&s_plus, &s_minus);
        integral += (&end - &piece.start) * rat(delta as i64);
        let running_average = &integral / &end;
        liminf_estimate = Some(match liminf_estimate {
            Some(cur) => cur.min(running_average.clone()),
            None => running_average.clone(),
        });
        segments.push(ScoreSegment {
            start: piece.start.clone(),
            end,
            intervals,
            s_plus,
            s_minus,
            delta,
            running_average,
        });
    }
    let average = integral / horizon;
    let target = closed_form_delta(dims);
    let abs_error = rat_abs(&(&average - &target));
    Ok(ScoreReport {
        dims,
        horizon: horizon.clone(),
        segments,
        average,
        liminf_estimate: liminf_estimate.unwrap_or_else(Rat::zero),
        target,
        abs_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builders::{build_f1, build_fk, standard_block};
    use crate::path::PiecewisePath;
    use crate::rational::frac;

    fn d21() -> Dims {
        Dims::new(2, 1).unwrap()
    }

    #[test]
    fn closed_form_values() {
        assert_eq!(closed_form_delta(d21()), frac(4, 3));
        assert_eq!(closed_form_delta(Dims::new(1, 1).unwrap()), frac(1, 2));
        assert_eq!(closed_form_delta(Dims::new(3, 2).unwrap()), frac(24, 5));
    }

    #[test]
    fn equality_intervals_on_f1_pieces() {
        let lt = build_f1(d21(), &rat(9)).unwrap();
        let pieces = lt.path().pieces();
        // Both pieces of the first block split as (0,1] and (1,3].
        for piece in &pieces[..2] {
            assert_eq!(
                equality_intervals(d21(), piece).unwrap(),
                vec![(0, 1), (1, 3)]
            );
        }
    }

    #[test]
    fn equality_interval_on_constant_zero() {
        let dims = Dims::new(2, 2).unwrap();
        let t = Template::certify(PiecewisePath::zero(dims, rat(5)).unwrap());
        let pieces = t.path().pieces();
        assert_eq!(pieces.len(), 1);
        assert_eq!(equality_intervals(dims, &pieces[0]).unwrap(), vec![(0, 4)]);
    }

    #[test]
    fn m_values_on_first_block() {
        // Descending piece: M+(0,1) = 0 and M+(1,d) = m.
        // Ascending piece: M+(0,1) = 1 and M+(1,d) = m - 1.
        for (m, n) in [(1u32, 1u32), (2, 1), (3, 2), (4, 4)] {
            let dims = Dims::new(m, n).unwrap();
            let g = standard_block(dims);
            let pieces = g.path().pieces();
            assert_eq!(pieces.len(), 2);
            let down = piece_intervals(dims, &pieces[0]).unwrap();
            assert_eq!(down[0].m_plus, 0);
            assert_eq!(down[0].m_minus, 1);
            assert_eq!(down[1].m_plus, m);
            assert_eq!(down[1].m_minus, dims.d() - 1 - m);
            let up = piece_intervals(dims, &pieces[1]).unwrap();
            assert_eq!(up[0].m_plus, 1);
            assert_eq!(up[1].m_plus, m - 1);
        }
    }

    #[test]
    fn s_plus_tables() {
        for (m, n) in [(1u32, 1u32), (2, 1), (3, 2), (4, 4)] {
            let dims = Dims::new(m, n).unwrap();
            let g = standard_block(dims);
            let pieces = g.path().pieces();
            let (p1, m1) = s_plus_minus(dims, &pieces[0]).unwrap();
            assert_eq!(p1, (2..=m + 1).collect::<Vec<_>>());
            let mut expected_minus = vec![1];
            expected_minus.extend(m + 2..=dims.d());
            assert_eq!(m1, expected_minus);
            let (p2, m2) = s_plus_minus(dims, &pieces[1]).unwrap();
            assert_eq!(p2, (1..=m).collect::<Vec<_>>());
            assert_eq!(m2, (m + 1..=dims.d()).collect::<Vec<_>>());
            // delta values from the same pieces.
            assert_eq!(
                delta_on_piece(dims, &pieces[0]).unwrap(),
                (m * (n - 1)) as u64
            );
            assert_eq!(delta_on_piece(dims, &pieces[1]).unwrap(), (m * n) as u64);
        }
    }

    #[test]
    fn averages_for_f1_at_2_1() {
        let lt = build_f1(d21(), &rat(9)).unwrap();
        assert_eq!(average_delta(lt.template(), &rat(3)).unwrap(), frac(4, 3));
        assert_eq!(average_delta(lt.template(), &rat(1)).unwrap(), rat(0));
        assert_eq!(average_delta(lt.template(), &rat(9)).unwrap(), frac(4, 3));
    }

    #[test]
    fn averages_exact_at_anchors_of_iterates() {
        for k in 0..3 {
            let lt = build_fk(Dims::new(3, 2).unwrap(), k, &rat(300)).unwrap();
            for a in lt.anchors().iter().skip(1) {
                assert_eq!(
                    average_delta(lt.template(), a).unwrap(),
                    frac(24, 5),
                    "k={k}, anchor={a}"
                );
            }
        }
    }

    #[test]
    fn report_segments_and_error() {
        let lt = build_f1(d21(), &rat(9)).unwrap();
        let report = score_report(lt.template(), &rat(3)).unwrap();
        assert_eq!(report.segments.len(), 2);
        assert_eq!(report.segments[0].delta, 0);
        assert_eq!(report.segments[1].delta, 2);
        assert_eq!(report.average, frac(4, 3));
        assert!(report.abs_error.is_zero());
    }

    #[test]
    fn invalid_template_is_rejected() {
        let dims = Dims::new(1, 1).unwrap();
        let p = PiecewisePath::new(
            dims,
            vec![rat(0), rat(1)],
            vec![vec![rat(0), rat(1)], vec![rat(0), rat(1)]],
        )
        .unwrap();
        let t = Template::certify(p);
        assert!(average_delta(&t, &rat(1)).is_err());
    }

    #[test]
    fn rescaled_blocks_have_identical_delta() {
        let lt = build_f1(d21(), &rat(18)).unwrap();
        let pieces = lt.path().pieces();
        assert_eq!(pieces.len(), 6);
        for b in 0..3 {
            for s in 0..2 {
                assert_eq!(
                    delta_on_piece(d21(), &pieces[2 * b + s]).unwrap(),
                    delta_on_piece(d21(), &pieces[s]).unwrap()
                );
            }
        }
    }
}
