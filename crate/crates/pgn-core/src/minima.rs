//! Successive minima in the sup norm, computed exactly up to float
//! arithmetic on the basis entries.
//!
//! Two independent routes exist and are cross-checked in tests:
//!
//! * [`successive_minima_oracle`]: brute-force enumeration of a coefficient
//!   box in the original basis coordinates.
//! * [`successive_minima`]: a fast hybrid. When the candidate box derived
//!   from a size-reduced basis fits the budget, it enumerates the box and
//!   evaluates every candidate through the same kernel as the oracle, so
//!   the two agree bit for bit. Otherwise it LLL-reduces and runs a
//!   branch-and-bound search per minimum; coefficient ranges of short basis
//!   directions can be astronomically long there, and those fibers are
//!   minimized by convex search instead of iteration, which is what keeps
//!   deeply flowed lattices (minima ratios like e^100) tractable.
//!
//! Linear independence is always decided exactly on integer coefficient
//! vectors, never on floats.

use num_bigint::BigInt;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::linalg;
use crate::rational::Rat;

/// Default cap on enumeration work (box candidates or search nodes).
pub const DEFAULT_BUDGET: u128 = 10_000_000;

/// Shared evaluation kernel: `sum_i coeffs[i] * cols[i]`, fixed iteration
/// order so that independent code paths produce identical floats.
pub fn lattice_vector(cols: &[Vec<f64>], coeffs: &[i128]) -> Vec<f64> {
    let d = cols[0].len();
    let mut v = vec![0.0; d];
    for (c, col) in coeffs.iter().zip(cols) {
        if *c == 0 {
            continue;
        }
        let cf = *c as f64;
        for (vi, bi) in v.iter_mut().zip(col) {
            *vi += cf * bi;
        }
    }
    v
}

pub fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

/// Compensated evaluation of `sum_i coeffs[i] * cols[i]` in double-double
/// arithmetic. Deeply flowed bases mix coefficients of order 1e9 with
/// entries of order 1e9 that cancel to order 1; a plain f64 accumulation
/// loses that cancellation entirely, this one keeps ~1e-30 of it.
fn lattice_vector_compensated(cols: &[Vec<f64>], coeffs: &[i128]) -> Vec<f64> {
    let d = cols[0].len();
    let mut hi = vec![0.0f64; d];
    let mut lo = vec![0.0f64; d];
    for (c, col) in coeffs.iter().zip(cols) {
        if *c == 0 {
            continue;
        }
        let cf = *c as f64;
        for i in 0..d {
            // TwoProd via fused multiply-add.
            let p = cf * col[i];
            let p_err = cf.mul_add(col[i], -p);
            // TwoSum of the running high part and the product.
            let s = hi[i] + p;
            let bb = s - hi[i];
            let s_err = (hi[i] - (s - bb)) + (p - bb);
            hi[i] = s;
            lo[i] += p_err + s_err;
        }
    }
    (0..d).map(|i| hi[i] + lo[i]).collect()
}

/// Exact rank bookkeeping over the rationals for integer coefficient
/// vectors; maintained in reduced row echelon form.
#[derive(Debug, Default, Clone)]
struct RankTracker {
    rows: Vec<Vec<Rat>>,
}

impl RankTracker {
    fn reduce(&self, cand: &[i128]) -> Vec<Rat> {
        let mut v: Vec<Rat> = cand
            .iter()
            .map(|&c| Rat::from_integer(BigInt::from(c)))
            .collect();
        for row in &self.rows {
            let pivot = row.iter().position(|x| !x.is_zero()).unwrap();
            if !v[pivot].is_zero() {
                let f = v[pivot].clone();
                for (vi, ri) in v.iter_mut().zip(row) {
                    *vi -= &f * ri;
                }
            }
        }
        v
    }

    fn is_independent(&self, cand: &[i128]) -> bool {
        self.reduce(cand).iter().any(|x| !x.is_zero())
    }

    fn insert(&mut self, cand: &[i128]) {
        let mut v = self.reduce(cand);
        let pivot = v
            .iter()
            .position(|x| !x.is_zero())
            .expect("inserted vector must be independent");
        let lead = v[pivot].clone();
        for x in v.iter_mut() {
            *x /= &lead;
        }
        for row in self.rows.iter_mut() {
            if !row[pivot].is_zero() {
                let f = row[pivot].clone();
                for (ri, vi) in row.iter_mut().zip(&v) {
                    *ri -= &f * vi;
                }
            }
        }
        self.rows.push(v);
    }

    #[cfg(test)]
    fn rank(&self) -> usize {
        self.rows.len()
    }
}

fn is_zero_coeff(c: &[i128]) -> bool {
    c.iter().all(|&x| x == 0)
}

/// Gram-Schmidt data for float columns.
struct Gso {
    mu: Vec<Vec<f64>>,
    bstar_sq: Vec<f64>,
    /// Orthonormalized directions; `span(q_0..q_k) = span(b_0..b_k)`.
    q: Vec<Vec<f64>>,
}

fn gso(cols: &[Vec<f64>]) -> Gso {
    let d = cols.len();
    let mut bstar: Vec<Vec<f64>> = Vec::with_capacity(d);
    let mut mu = vec![vec![0.0; d]; d];
    let mut bstar_sq = vec![0.0; d];
    for i in 0..d {
        let mut v = cols[i].clone();
        for j in 0..i {
            let dot: f64 = cols[i].iter().zip(&bstar[j]).map(|(a, b)| a * b).sum();
            let m = if bstar_sq[j] > 0.0 { dot / bstar_sq[j] } else { 0.0 };
            mu[i][j] = m;
            for (vk, bk) in v.iter_mut().zip(&bstar[j]) {
                *vk -= m * bk;
            }
        }
        bstar_sq[i] = v.iter().map(|x| x * x).sum();
        bstar.push(v);
    }
    let q = bstar
        .iter()
        .zip(&bstar_sq)
        .map(|(v, sq)| {
            let norm = sq.sqrt();
            if norm > 0.0 {
                v.iter().map(|x| x / norm).collect()
            } else {
                v.clone()
            }
        })
        .collect();
    Gso {
        mu,
        bstar_sq,
        q,
    }
}

/// Lower bound on the sup norm of every completion of a partial vector `w`
/// whose free directions span `span(b_0..b_level)`: the value of any dual
/// vector orthogonal to that span. The orthogonal residual of `w` gives
/// `|u|_2^2 / |u|_1`, which beats the generic `|u|_2 / sqrt(d)` whenever the
/// residual concentrates on few coordinates.
fn sup_completion_bound(g: &Gso, level: usize, w: &[f64]) -> f64 {
    let mut u = w.to_vec();
    for q in g.q.iter().take(level + 1) {
        let dot: f64 = u.iter().zip(q).map(|(a, b)| a * b).sum();
        if dot != 0.0 {
            for (ui, qi) in u.iter_mut().zip(q) {
                *ui -= dot * qi;
            }
        }
    }
    let l2_sq: f64 = u.iter().map(|x| x * x).sum();
    let l1: f64 = u.iter().map(|x| x.abs()).sum();
    if l1 > 0.0 {
        l2_sq / l1
    } else {
        0.0
    }
}

fn round_to_i128(x: f64) -> Result<i128> {
    let r = x.round();
    if !r.is_finite() || r.abs() >= 1.5e38 {
        return Err(Error::Invariant(
            "basis too ill-conditioned: reduction multiplier overflows".into(),
        ));
    }
    Ok(r as i128)
}

fn checked_col_update(u: &mut [Vec<i128>], dst: usize, src: usize, q: i128) -> Result<()> {
    let d = u[dst].len();
    for r in 0..d {
        let term = q
            .checked_mul(u[src][r])
            .and_then(|t| u[dst][r].checked_sub(t))
            .ok_or_else(|| {
                Error::Invariant("basis too ill-conditioned: transform overflows".into())
            })?;
        u[dst][r] = term;
    }
    Ok(())
}

/// Pairwise Gram-Schmidt coefficient reduction (no swaps), tracking the
/// unimodular transform in exact integers. Columns are re-derived from the
/// original basis through the compensated kernel after every update, so
/// they never drift from the exact integer combinations they represent.
fn size_reduce(orig: &[Vec<f64>], cols: &mut [Vec<f64>], u: &mut [Vec<i128>]) -> Result<()> {
    let d = cols.len();
    for i in 1..d {
        let g = gso(cols);
        for j in (0..i).rev() {
            let q = round_to_i128(g.mu[i][j])?;
            if q != 0 {
                checked_col_update(u, i, j, q)?;
                cols[i] = lattice_vector_compensated(orig, &u[i]);
            }
        }
    }
    Ok(())
}

/// Floating-point LLL with exact integer transform; columns are always the
/// compensated evaluation of their exact integer combination. Reduction
/// quality only affects search effort, never correctness, so the iteration
/// cap exits gracefully with whatever has been achieved.
fn lll(orig: &[Vec<f64>], cols: &mut Vec<Vec<f64>>, u: &mut Vec<Vec<i128>>, delta: f64) -> Result<()> {
    let d = cols.len();
    let mut k = 1;
    let mut iterations = 0usize;
    let cap = 10_000 * d * d;
    while k < d {
        iterations += 1;
        if iterations > cap {
            break;
        }
        let g = gso(cols);
        let mut g_mu_k = g.mu[k].clone();
        for j in (0..k).rev() {
            let q = round_to_i128(g_mu_k[j])?;
            if q != 0 {
                checked_col_update(u, k, j, q)?;
                cols[k] = lattice_vector_compensated(orig, &u[k]);
                let g2 = gso(cols);
                g_mu_k = g2.mu[k].clone();
            }
        }
        let g = gso(cols);
        let lovasz = (delta - g.mu[k][k - 1] * g.mu[k][k - 1]) * g.bstar_sq[k - 1];
        if g.bstar_sq[k] >= lovasz {
            k += 1;
        } else {
            cols.swap(k, k - 1);
            u.swap(k, k - 1);
            k = k.max(2) - 1;
        }
    }
    Ok(())
}

fn identity_transform(d: usize) -> Vec<Vec<i128>> {
    (0..d)
        .map(|j| (0..d).map(|i| if i == j { 1 } else { 0 }).collect())
        .collect()
}

fn transform_coeffs(u: &[Vec<i128>], c_red: &[i128]) -> Option<Vec<i128>> {
    let d = u[0].len();
    let mut out = vec![0i128; d];
    for (c, ucol) in c_red.iter().zip(u) {
        if *c == 0 {
            continue;
        }
        for r in 0..d {
            out[r] = c.checked_mul(ucol[r]).and_then(|t| out[r].checked_add(t))?;
        }
    }
    Some(out)
}

fn rows_from_cols(cols: &[Vec<f64>]) -> linalg::Mat {
    let d = cols.len();
    (0..d)
        .map(|i| cols.iter().map(|c| c[i]).collect())
        .collect()
}

/// Sufficient brute-force coefficient bound for [`successive_minima_oracle`]:
/// any lattice vector no longer than the longest basis vector has original
/// coefficients bounded by the l1 row norms of the basis inverse times that
/// length.
pub fn sufficient_coeff_bound(x: &Lattice) -> Result<u64> {
    let cols = x.basis_columns();
    let lambda_up = cols.iter().map(|c| sup_norm(c)).fold(0.0, f64::max);
    let inv = linalg::invert(&rows_from_cols(cols))
        .ok_or_else(|| Error::Invariant("basis is singular to working precision".into()))?;
    let bound = inv
        .iter()
        .map(|row| row.iter().map(|x| x.abs()).sum::<f64>() * lambda_up * (1.0 + 1e-9))
        .fold(0.0, f64::max)
        .ceil();
    if !bound.is_finite() || bound > 1e18 {
        return Err(Error::Invariant(format!(
            "sufficient coefficient bound {bound} is out of range"
        )));
    }
    Ok((bound as u64).max(1))
}

/// Greedy selection of successive minima from norm-sorted candidates;
/// independence decided exactly on integer coefficients.
fn greedy_select(d: usize, mut candidates: Vec<(f64, Vec<i128>)>) -> Vec<(f64, Vec<i128>)> {
    candidates.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    let mut tracker = RankTracker::default();
    let mut out = Vec::with_capacity(d);
    for (norm, coeffs) in candidates {
        if out.len() == d {
            break;
        }
        if tracker.is_independent(&coeffs) {
            tracker.insert(&coeffs);
            out.push((norm, coeffs));
        }
    }
    out
}

/// Brute-force oracle: enumerates every nonzero integer coefficient vector
/// in `[-coeff_bound, coeff_bound]^d`, sorts images by sup norm, and selects
/// greedily by exact linear independence. Correct whenever `coeff_bound` is
/// at least [`sufficient_coeff_bound`]; smaller bounds may under-report.
pub fn successive_minima_oracle(x: &Lattice, coeff_bound: u64) -> Result<Vec<f64>> {
    let bound = coeff_bound.max(1) as i128;
    let cols = x.basis_columns();
    let d = cols.len();
    // Any value >= lambda_d works as a filter; the longest basis vector does.
    let cap = cols.iter().map(|c| sup_norm(c)).fold(0.0, f64::max) * (1.0 + 1e-12);
    let mut candidates = Vec::new();
    let mut coeffs = vec![-bound; d];
    'outer: loop {
        if !is_zero_coeff(&coeffs) {
            let v = lattice_vector(cols, &coeffs);
            let norm = sup_norm(&v);
            if norm <= cap {
                candidates.push((norm, coeffs.clone()));
            }
        }
        let mut i = 0;
        loop {
            if i == d {
                break 'outer;
            }
            coeffs[i] += 1;
            if coeffs[i] <= bound {
                break;
            }
            coeffs[i] = -bound;
            i += 1;
        }
    }
    let picked = greedy_select(d, candidates);
    if picked.len() < d {
        return Err(Error::Domain(format!(
            "coeff_bound {coeff_bound} yielded only {} independent vectors",
            picked.len()
        )));
    }
    Ok(picked.into_iter().map(|(n, _)| n).collect())
}

/// Outcome of the fast path; values ascend and coefficients are in the
/// original basis coordinates when the transform stayed exactly
/// representable.
#[derive(Debug, Clone)]
pub struct MinimaOutcome {
    pub values: Vec<f64>,
    pub coeffs: Option<Vec<Vec<i128>>>,
}

/// Fast successive minima with the default work budget.
pub fn successive_minima(x: &Lattice) -> Result<Vec<f64>> {
    successive_minima_with_budget(x, DEFAULT_BUDGET)
}

pub fn successive_minima_with_budget(x: &Lattice, budget: u128) -> Result<Vec<f64>> {
    Ok(minima_outcome(x, budget)?.values)
}

pub fn minima_outcome(x: &Lattice, budget: u128) -> Result<MinimaOutcome> {
    let d = x.dims().d_usize();
    let orig = x.basis_columns();

    // Size-reduce, bound the coefficient box by the longest reduced vector,
    // and enumerate it whole when that fits the budget.
    let mut red = orig.to_vec();
    let mut u = identity_transform(d);
    if size_reduce(orig, &mut red, &mut u).is_ok() {
        if let Some(box_bounds) = box_bounds_within(&red, budget) {
            return box_enumerate(orig, &red, &u, &box_bounds, budget);
        }
    }

    // General path: LLL then branch-and-bound per minimum.
    let mut red = orig.to_vec();
    let mut u = identity_transform(d);
    lll(orig, &mut red, &mut u, 0.99)?;
    branch_and_bound_minima(&red, &u, budget)
}

/// First minimum only (the `log lambda_1` kernel behind occupation
/// profiles); equal to `successive_minima(x)[0]`.
pub fn first_minimum(x: &Lattice, budget: u128) -> Result<f64> {
    let d = x.dims().d_usize();
    let orig = x.basis_columns();
    let mut red = orig.to_vec();
    let mut u = identity_transform(d);
    lll(orig, &mut red, &mut u, 0.99)?;
    let g = gso(&red);
    let tracker = RankTracker::default();
    let mut nodes = 0u128;
    let init = red
        .iter()
        .enumerate()
        .map(|(j, c)| (sup_norm(c), unit_coeff(d, j)))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .unwrap();
    let (norm, _coeffs) = shortest_outside(&red, &g, &tracker, init, budget, &mut nodes)?;
    Ok(norm)
}

fn unit_coeff(d: usize, j: usize) -> Vec<i128> {
    let mut c = vec![0i128; d];
    c[j] = 1;
    c
}

/// Per-coordinate box bounds for the size-reduced basis, or `None` when the
/// box exceeds the budget.
fn box_bounds_within(red: &[Vec<f64>], budget: u128) -> Option<Vec<i128>> {
    let lambda_up = red.iter().map(|c| sup_norm(c)).fold(0.0, f64::max) * (1.0 + 1e-12);
    let inv = linalg::invert(&rows_from_cols(red))?;
    let mut bounds = Vec::with_capacity(red.len());
    let mut size: u128 = 1;
    for row in &inv {
        let r: f64 = row.iter().map(|x| x.abs()).sum();
        let c = (r * lambda_up * (1.0 + 1e-9)).ceil();
        if !c.is_finite() || c >= 1e18 {
            return None;
        }
        let c = c as u128;
        size = size.saturating_mul(2 * c + 1);
        if size > budget {
            return None;
        }
        bounds.push(c as i128);
    }
    Some(bounds)
}

fn box_enumerate(
    orig: &[Vec<f64>],
    red: &[Vec<f64>],
    u: &[Vec<i128>],
    bounds: &[i128],
    budget: u128,
) -> Result<MinimaOutcome> {
    let d = red.len();
    let lambda_up = red.iter().map(|c| sup_norm(c)).fold(0.0, f64::max) * (1.0 + 1e-12);
    let mut candidates: Vec<(f64, Vec<i128>)> = Vec::new();
    let mut c_red = bounds.iter().map(|b| -b).collect::<Vec<_>>();
    let mut visited: u128 = 0;
    'outer: loop {
        visited += 1;
        if visited > budget {
            return Err(Error::Budget {
                needed: visited,
                budget,
            });
        }
        if !is_zero_coeff(&c_red) {
            // Evaluate through the original basis so that box-path results
            // are bit-identical to the oracle's.
            if let Some(c_orig) = transform_coeffs(u, &c_red) {
                let v = lattice_vector(orig, &c_orig);
                let norm = sup_norm(&v);
                if norm <= lambda_up {
                    candidates.push((norm, c_orig));
                }
            } else {
                let v = lattice_vector(red, &c_red);
                let norm = sup_norm(&v);
                if norm <= lambda_up {
                    candidates.push((norm, c_red.clone()));
                }
            }
        }
        let mut i = 0;
        loop {
            if i == d {
                break 'outer;
            }
            c_red[i] += 1;
            if c_red[i] <= bounds[i] {
                break;
            }
            c_red[i] = -bounds[i];
            i += 1;
        }
    }
    let picked = greedy_select(d, candidates);
    debug_assert_eq!(picked.len(), d, "box path must find d independent vectors");
    let mut values: Vec<f64> = picked.iter().map(|(n, _)| *n).collect();
    values.sort_unstable_by(f64::total_cmp);
    Ok(MinimaOutcome {
        values,
        coeffs: Some(picked.into_iter().map(|(_, c)| c).collect()),
    })
}

fn branch_and_bound_minima(
    red: &[Vec<f64>],
    u: &[Vec<i128>],
    budget: u128,
) -> Result<MinimaOutcome> {
    let d = red.len();
    let g = gso(red);
    let mut tracker = RankTracker::default();
    let mut nodes = 0u128;
    let mut picked: Vec<(f64, Vec<i128>)> = Vec::new();
    for _ in 0..d {
        let init = red
            .iter()
            .enumerate()
            .filter(|(j, _)| tracker.is_independent(&unit_coeff(d, *j)))
            .map(|(j, c)| (sup_norm(c), unit_coeff(d, j)))
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .expect("a basis vector outside any proper subspace always exists");
        let best = shortest_outside(red, &g, &tracker, init, budget, &mut nodes)?;
        tracker.insert(&best.1);
        picked.push(best);
    }
    // Values stay in the reduced-basis evaluation: the reduction updates
    // round relative to shrinking magnitudes, whereas re-evaluating through
    // the original basis with large coefficients reintroduces catastrophic
    // cancellation on deeply flowed bases.
    let mut refined: Vec<(f64, Option<Vec<i128>>)> = picked
        .into_iter()
        .map(|(norm, c_red)| (norm, transform_coeffs(u, &c_red)))
        .collect();
    refined.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
    let values = refined.iter().map(|(n, _)| *n).collect();
    let coeffs = refined
        .into_iter()
        .map(|(_, c)| c)
        .collect::<Option<Vec<_>>>();
    Ok(MinimaOutcome { values, coeffs })
}

/// Branch-and-bound for the shortest lattice vector outside the span
/// tracked by `tracker`, starting from a known achievable bound.
///
/// Levels `d-1 .. 1` enumerate coefficients inside the l2 pruning interval
/// (any sup-norm-R vector has l2 norm at most sqrt(d) R). Level 0 is a
/// fiber: the sup norm is convex in the last free coefficient, so the
/// integer minimum is found by ternary search rather than iteration, and at
/// most two span-membership rejections can occur before the whole fiber is
/// known to lie inside the span.
fn shortest_outside(
    red: &[Vec<f64>],
    g: &Gso,
    tracker: &RankTracker,
    init: (f64, Vec<i128>),
    budget: u128,
    nodes: &mut u128,
) -> Result<(f64, Vec<i128>)> {
    let d = red.len();
    let mut best = init;
    let mut coeffs = vec![0i128; d];
    // prefix_in_span[k]: the coordinate directions 0..=k all lie in the
    // tracked span. A subtree whose free levels are all spanned directions
    // and whose fixed tail is also in the span contains only dependent
    // points and can be skipped whole; this is what keeps searches fast
    // when the span already holds a dense sublattice.
    let mut prefix_in_span = vec![false; d];
    let mut all_so_far = true;
    for k in 0..d {
        all_so_far = all_so_far && !tracker.is_independent(&unit_coeff(d, k));
        prefix_in_span[k] = all_so_far;
    }
    // w_stack[k] holds the partial vector contributed by coefficients at
    // levels >= k.
    let mut w_stack: Vec<Vec<f64>> = vec![vec![0.0; red[0].len()]; d + 1];
    descend(
        red,
        g,
        tracker,
        &prefix_in_span,
        d - 1,
        0.0,
        &mut coeffs,
        &mut w_stack,
        &mut best,
        budget,
        nodes,
    )?;
    Ok(best)
}

#[allow(clippy::too_many_arguments)]
fn descend(
    red: &[Vec<f64>],
    g: &Gso,
    tracker: &RankTracker,
    prefix_in_span: &[bool],
    level: usize,
    qsum_above: f64,
    coeffs: &mut Vec<i128>,
    w_stack: &mut Vec<Vec<f64>>,
    best: &mut (f64, Vec<i128>),
    budget: u128,
    nodes: &mut u128,
) -> Result<()> {
    let d = red.len();
    // Whole-subtree span pruning: with coefficients fixed above this level,
    // every point of the subtree is tail + (combination of directions
    // 0..=level). If those directions and the tail are inside the tracked
    // span, nothing here can be independent.
    if level + 1 < d {
        if prefix_in_span[level] {
            let mut tail = coeffs.clone();
            for c in tail.iter_mut().take(level + 1) {
                *c = 0;
            }
            if !tracker.is_independent(&tail) {
                return Ok(());
            }
        }
        // Sup-aware subtree bound; strict margin keeps float slop sound.
        if sup_completion_bound(g, level, &w_stack[level + 1]) > best.0 * (1.0 + 1e-9) {
            return Ok(());
        }
    }
    let limit_sq = |best_norm: f64| d as f64 * best_norm * best_norm * (1.0 + 1e-9);
    let center: f64 = -(level + 1..d)
        .map(|j| g.mu[j][level] * coeffs[j] as f64)
        .sum::<f64>();

    if level == 0 {
        fiber_minimize(red, g, tracker, center, qsum_above, coeffs, w_stack, best, budget, nodes)?;
        return Ok(());
    }

    let rem = limit_sq(best.0) - qsum_above;
    if rem < 0.0 {
        return Ok(());
    }
    let halfw = if g.bstar_sq[level] > 0.0 {
        (rem / g.bstar_sq[level]).sqrt()
    } else {
        return Err(Error::Invariant("degenerate Gram-Schmidt direction".into()));
    };
    let lo_f = center - halfw - 1e-9;
    let hi_f = center + halfw + 1e-9;
    if !lo_f.is_finite() || !hi_f.is_finite() {
        return Err(Error::Invariant("enumeration interval overflow".into()));
    }
    let lo = lo_f.max(-1.6e38).ceil() as i128;
    let hi = hi_f.min(1.6e38).floor() as i128;
    if lo > hi {
        return Ok(());
    }
    // Zigzag outward from the center; each side stops as soon as its l2
    // contribution alone rules it out against the (shrinking) best.
    let start = (center.round() as i128).clamp(lo, hi);
    let mut step = 0i128;
    let mut left_live = true;
    let mut right_live = true;
    while left_live || right_live {
        let pair = [(start + step, true), (start - step, false)];
        let candidates = if step == 0 { &pair[..1] } else { &pair[..] };
        for &(c, going_right) in candidates {
            if going_right && (!right_live || c > hi) {
                right_live = right_live && c <= hi;
                continue;
            }
            if !going_right && (!left_live || c < lo) {
                left_live = left_live && c >= lo;
                continue;
            }
            *nodes += 1;
            if *nodes > budget {
                return Err(Error::Budget {
                    needed: *nodes,
                    budget,
                });
            }
            let y = c as f64 - center;
            let contrib = y * y * g.bstar_sq[level];
            if qsum_above + contrib > limit_sq(best.0) {
                if going_right {
                    right_live = false;
                } else {
                    left_live = false;
                }
                continue;
            }
            coeffs[level] = c;
            let (below, above) = w_stack.split_at_mut(level + 1);
            let w_next = &above[0];
            let w_here = &mut below[level];
            for i in 0..w_here.len() {
                w_here[i] = w_next[i] + c as f64 * red[level][i];
            }
            descend(
                red,
                g,
                tracker,
                prefix_in_span,
                level - 1,
                qsum_above + contrib,
                coeffs,
                w_stack,
                best,
                budget,
                nodes,
            )?;
        }
        step += 1;
    }
    coeffs[level] = 0;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn fiber_minimize(
    red: &[Vec<f64>],
    g: &Gso,
    tracker: &RankTracker,
    center: f64,
    qsum_above: f64,
    coeffs: &mut Vec<i128>,
    w_stack: &mut [Vec<f64>],
    best: &mut (f64, Vec<i128>),
    budget: u128,
    nodes: &mut u128,
) -> Result<()> {
    let d = red.len();
    let rem = d as f64 * best.0 * best.0 * (1.0 + 1e-9) - qsum_above;
    if rem < 0.0 {
        return Ok(());
    }
    let halfw = if g.bstar_sq[0] > 0.0 {
        (rem / g.bstar_sq[0]).sqrt()
    } else {
        return Err(Error::Invariant("degenerate Gram-Schmidt direction".into()));
    };
    let lo_f = (center - halfw - 1e-9).ceil();
    let hi_f = (center + halfw + 1e-9).floor();
    if !lo_f.is_finite() || !hi_f.is_finite() {
        return Err(Error::Invariant("fiber interval overflow".into()));
    }
    if lo_f > hi_f {
        return Ok(());
    }

    let w = &w_stack[1];
    let col0 = &red[0];
    let h_real = |c: f64| -> f64 {
        let mut norm = 0.0f64;
        for (wi, bi) in w.iter().zip(col0) {
            norm = norm.max((wi + c * bi).abs());
        }
        norm
    };

    // One node per fiber; the ternary probes below are logarithmic
    // bookkeeping, not enumeration.
    *nodes += 1;
    if *nodes > budget {
        return Err(Error::Budget {
            needed: *nodes,
            budget,
        });
    }

    // Ternary search over the reals; the fiber can be astronomically long
    // (ratios like e^100 between minima), so exact integers only enter near
    // the minimizer.
    let (mut a, mut b) = (lo_f, hi_f);
    let mut steps = 0;
    while b - a > 0.5 && steps < 400 {
        steps += 1;
        let m1 = a + (b - a) / 3.0;
        let m2 = b - (b - a) / 3.0;
        if h_real(m1) <= h_real(m2) {
            b = m2;
        } else {
            a = m1;
        }
    }
    let c_tilde = 0.5 * (a + b);
    let mut c_seed = c_tilde.round().clamp(lo_f, hi_f);
    for step in [-1.0, 1.0] {
        let c = (c_tilde.round() + step).clamp(lo_f, hi_f);
        if h_real(c) < h_real(c_seed) {
            c_seed = c;
        }
    }

    // Integers beyond 2^53 are not exactly representable; an improving
    // candidate out there cannot be reported faithfully. Desk-scale bases
    // never put the minimizer there, but fail loudly rather than silently.
    const EXACT_RANGE: f64 = 8.9e15;
    if c_seed.abs() > EXACT_RANGE {
        if h_real(c_seed) < best.0 {
            return Err(Error::Invariant(
                "fiber minimizer exceeds the exactly representable integer range".into(),
            ));
        }
        return Ok(());
    }
    let lo = lo_f.max(-EXACT_RANGE) as i128;
    let hi = hi_f.min(EXACT_RANGE) as i128;
    let c_min = c_seed as i128;
    let h = |c: i128| h_real(c as f64);

    // Walk outward by increasing h until a usable candidate appears or the
    // current best cannot be beaten. At most two span-membership rejections
    // can happen: two distinct points of an affine line inside a subspace
    // put the whole line inside it.
    let mut left = c_min - 1;
    let mut right = c_min + 1;
    let mut pending = Some(c_min);
    let mut dependents = 0;
    loop {
        let c = match pending.take() {
            Some(c) => c,
            None => {
                let l_ok = left >= lo;
                let r_ok = right <= hi;
                if !l_ok && !r_ok {
                    return Ok(());
                }
                if l_ok && (!r_ok || h(left) <= h(right)) {
                    let c = left;
                    left -= 1;
                    c
                } else {
                    let c = right;
                    right += 1;
                    c
                }
            }
        };
        *nodes += 1;
        if *nodes > budget {
            return Err(Error::Budget {
                needed: *nodes,
                budget,
            });
        }
        let norm = h(c);
        if norm >= best.0 {
            return Ok(());
        }
        coeffs[0] = c;
        if is_zero_coeff(coeffs) {
            continue;
        }
        if tracker.is_independent(coeffs) {
            *best = (norm, coeffs.clone());
            coeffs[0] = 0;
            return Ok(());
        }
        dependents += 1;
        if dependents >= 2 {
            coeffs[0] = 0;
            return Ok(());
        }
        coeffs[0] = 0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dims::Dims;
    use crate::lattice::{random_unimodular, Lattice};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn integer_lattice_minima_are_ones() {
        for (m, n) in [(1, 1), (2, 1), (2, 2)] {
            let x = Lattice::zd(Dims::new(m, n).unwrap());
            let got = successive_minima(&x).unwrap();
            assert_eq!(got, vec![1.0; (m + n) as usize]);
        }
    }

    #[test]
    fn sheared_plane_lattice() {
        // Columns (1, 0) and (1/2, 1): both minima equal 1.
        let x = Lattice::from_basis_columns(
            Dims::new(1, 1).unwrap(),
            vec![vec![1.0, 0.0], vec![0.5, 1.0]],
        )
        .unwrap();
        assert_eq!(successive_minima(&x).unwrap(), vec![1.0, 1.0]);
        assert_eq!(successive_minima_oracle(&x, 3).unwrap(), vec![1.0, 1.0]);
    }

    #[test]
    fn diagonal_oracle() {
        let x = Lattice::from_basis_columns(
            Dims::new(1, 1).unwrap(),
            vec![vec![0.5, 0.0], vec![0.0, 2.0]],
        )
        .unwrap();
        assert_eq!(successive_minima_oracle(&x, 2).unwrap(), vec![0.5, 2.0]);
    }

    #[test]
    fn fast_path_matches_oracle_on_random_unimodular() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        for case in 0..25 {
            let x = random_unimodular(Dims::new(1, 1).unwrap(), 4, 2, &mut rng);
            let bound = sufficient_coeff_bound(&x).unwrap();
            let fast = successive_minima(&x).unwrap();
            let oracle = successive_minima_oracle(&x, bound).unwrap();
            assert_eq!(fast, oracle, "case {case}");
        }
    }

    #[test]
    fn deep_flow_uses_branch_and_bound() {
        // diag(e^5, e^5, e^-10): the coefficient box has ~6e7 points, far
        // over budget, but the minima are plainly the diagonal entries.
        let x = Lattice::zd(Dims::new(2, 1).unwrap());
        let flowed = x.apply_flow(10.0).unwrap();
        let got = successive_minima(&flowed).unwrap();
        let expect = [(-10.0f64).exp(), 5.0f64.exp(), 5.0f64.exp()];
        for (g, e) in got.iter().zip(expect) {
            assert!((g - e).abs() <= 1e-12 * e, "{g} vs {e}");
        }
    }

    #[test]
    fn very_deep_flow_stays_exact() {
        let x = Lattice::zd(Dims::new(1, 1).unwrap());
        let flowed = x.apply_flow(50.0).unwrap();
        let got = successive_minima(&flowed).unwrap();
        assert!((got[0] - (-50.0f64).exp()).abs() <= 1e-12 * got[0].abs());
        assert!((got[1] - 50.0f64.exp()).abs() <= 1e-10 * got[1]);
    }

    #[test]
    fn first_minimum_matches_full_computation() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..10 {
            let x = random_unimodular(Dims::new(2, 1).unwrap(), 5, 3, &mut rng);
            let flowed = x.apply_flow(2.0).unwrap();
            let all = successive_minima(&flowed).unwrap();
            let first = first_minimum(&flowed, DEFAULT_BUDGET).unwrap();
            assert!((first - all[0]).abs() <= 1e-12 * all[0].max(1e-300));
        }
    }

    #[test]
    fn budget_errors_are_reported() {
        let x = Lattice::zd(Dims::new(2, 2).unwrap());
        let err = successive_minima_with_budget(&x, 2).unwrap_err();
        assert!(matches!(err, Error::Budget { .. }));
    }

    #[test]
    fn rank_tracker_is_exact() {
        let mut t = RankTracker::default();
        assert!(t.is_independent(&[2, 4]));
        t.insert(&[2, 4]);
        assert!(!t.is_independent(&[1, 2]));
        assert!(!t.is_independent(&[-3, -6]));
        assert!(t.is_independent(&[1, 3]));
        t.insert(&[1, 3]);
        assert_eq!(t.rank(), 2);
        assert!(!t.is_independent(&[7, -11]));
    }
}


#[cfg(test)]
mod debug_tests {
    use super::*;
    use crate::dims::Dims;
    use crate::lattice::Lattice;

    #[test]
    fn debug_slab_case() {
        let cols = vec![
            vec![1.0, 1.435360251529597, -2.3262836655884263, 1.9467991306845198],
            vec![0.0, 1.0, 0.0, 1.4951058885428843],
            vec![0.0, -1.3557838756551246, 1.0, -2.0270404560834705],
            vec![0.0, 1.673876754558733, -1.2346191635815875, 3.502622992435814],
        ];
        let x = Lattice::from_basis_columns(Dims::new(2, 2).unwrap(), cols).unwrap();
        let flowed = x.apply_flow(10.0).unwrap();
        let orig = flowed.basis_columns();
        let mut red = orig.to_vec();
        let mut u = identity_transform(4);
        lll(orig, &mut red, &mut u, 0.99).unwrap();
        let g = gso(&red);
        eprintln!("bstar_sq: {:?}", g.bstar_sq.iter().map(|x| x.sqrt()).collect::<Vec<_>>());
        eprintln!("red norms: {:?}", red.iter().map(|c| sup_norm(c)).collect::<Vec<_>>());
        let mut tracker = RankTracker::default();
        let mut total = 0u128;
        for i in 0..4 {
            let init = red
                .iter()
                .enumerate()
                .filter(|(j, _)| tracker.is_independent(&unit_coeff(4, *j)))
                .map(|(j, c)| (sup_norm(c), unit_coeff(4, j)))
                .min_by(|a, b| a.0.total_cmp(&b.0))
                .unwrap();
            let mut nodes = 0u128;
            let best = shortest_outside(&red, &g, &tracker, init, 3_000_000_000, &mut nodes).unwrap();
            eprintln!("minimum {i}: norm {} coeff {:?} nodes {nodes}", best.0, best.1);
            tracker.insert(&best.1);
            total += nodes;
        }
        eprintln!("total nodes {total}");
    }
}
