//! Adversarial single-breakpoint mutations of valid templates. Each
//! generator produces a path that is guaranteed to violate one specific
//! axiom, for exercising the validator's failure reporting.

use num_traits::{Signed, Zero};
use rand::Rng;

use crate::path::PiecewisePath;
use crate::rational::{frac, rat, Rat};
use crate::template::{Axiom, LinkedTemplate};

/// A mutated path with the axiom it must be flagged under and the
/// breakpoint at which the edit happened.
#[derive(Debug, Clone)]
pub struct Mutation {
    pub path: PiecewisePath,
    pub target: Axiom,
    pub witness_time: Rat,
}

/// Swaps two adjacent, strictly different components at one breakpoint,
/// breaking the ordering there.
pub fn mutate_ordering(path: &PiecewisePath, rng: &mut impl Rng) -> Option<Mutation> {
    let candidates: Vec<(usize, usize)> = path
        .values()
        .iter()
        .enumerate()
        .flat_map(|(b, row)| {
            (0..row.len() - 1)
                .filter(move |&i| row[i] < row[i + 1])
                .map(move |i| (b, i))
        })
        .collect();
    if candidates.is_empty() {
        return None;
    }
    let (b, i) = candidates[rng.gen_range(0..candidates.len())];
    let mut values = path.values().to_vec();
    values[b].swap(i, i + 1);
    let mutated = PiecewisePath::new(path.dims(), path.breakpoints().to_vec(), values).ok()?;
    Some(Mutation {
        path: mutated,
        target: Axiom::Ordering,
        witness_time: path.breakpoints()[b].clone(),
    })
}

/// Pushes the top component up at one interior breakpoint hard enough that
/// the slope into it exceeds every admissible slope, while the ordering
/// stays intact.
pub fn mutate_slope(path: &PiecewisePath, rng: &mut impl Rng) -> Option<Mutation> {
    let nb = path.breakpoints().len();
    if nb < 2 {
        return None;
    }
    let b = rng.gen_range(1..nb);
    let d = path.dims().d_usize();
    let span = &path.breakpoints()[b] - &path.breakpoints()[b - 1];
    let (m, n) = (path.dims().m() as i64, path.dims().n() as i64);
    // Raising by span * (1/m + 1/n + 1) lifts the incoming slope past 1/m
    // from any admissible starting slope.
    let bump = &span * (frac(1, m) + frac(1, n) + rat(1));
    let mut values = path.values().to_vec();
    values[b][d - 1] = &values[b][d - 1] + bump;
    let mutated = PiecewisePath::new(path.dims(), path.breakpoints().to_vec(), values).ok()?;
    Some(Mutation {
        path: mutated,
        target: Axiom::SlopeBounds,
        witness_time: path.breakpoints()[b].clone(),
    })
}

/// Lifts the top component slightly at an interior anchor. The ordering and
/// the slope bounds survive a small enough lift, but the total component
/// sum picks up a nonzero slope, which no slope set allows, so the gap-shape
/// axiom must flag it.
pub fn mutate_gap(lt: &LinkedTemplate, rng: &mut impl Rng) -> Option<Mutation> {
    let path = lt.path();
    let end = path.end();
    let interior: Vec<&Rat> = lt
        .anchors()
        .iter()
        .filter(|a| !a.is_zero() && *a < end)
        .collect();
    if interior.is_empty() {
        return None;
    }
    let anchor = interior[rng.gen_range(0..interior.len())].clone();
    let bps = path.breakpoints();
    let b = bps.iter().position(|t| *t == anchor)?;
    if b == 0 || b + 1 >= bps.len() {
        return None;
    }
    let d = path.dims().d_usize();
    let (m, n) = (path.dims().m() as i64, path.dims().n() as i64);
    let vals = path.values();
    let len_left = &bps[b] - &bps[b - 1];
    let len_right = &bps[b + 1] - &bps[b];
    let slope_left = (&vals[b][d - 1] - &vals[b - 1][d - 1]) / &len_left;
    let slope_right = (&vals[b + 1][d - 1] - &vals[b][d - 1]) / &len_right;
    // Headroom before the incoming slope hits 1/m or the outgoing slope
    // hits -1/n; builders keep the top component strictly inside both.
    let cap_left = &len_left * (frac(1, m) - &slope_left);
    let cap_right = &len_right * (&slope_right + frac(1, n));
    if !cap_left.is_positive() || !cap_right.is_positive() {
        return None;
    }
    let delta = cap_left.min(cap_right) / rat(2);
    let mut values = vals.to_vec();
    values[b][d - 1] = &values[b][d - 1] + delta;
    let mutated = PiecewisePath::new(path.dims(), bps.to_vec(), values).ok()?;
    Some(Mutation {
        path: mutated,
        target: Axiom::GapShape,
        witness_time: anchor,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builders::build_fk;
    use crate::dims::Dims;
    use crate::template::validate_path;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn each_mutation_trips_its_axiom() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (m, n, k) in [(1u32, 1u32, 0u32), (2, 1, 1), (3, 2, 0), (1, 3, 2)] {
            let dims = Dims::new(m, n).unwrap();
            let lt = build_fk(dims, k, &rat(60 * (m + n) as i64)).unwrap();
            assert!(lt.template().is_valid());
            for _ in 0..10 {
                let mu = mutate_ordering(lt.path(), &mut rng).unwrap();
                let report = validate_path(&mu.path);
                assert!(report.violates(Axiom::Ordering));
                assert_eq!(report.first_of(Axiom::Ordering).unwrap().time, mu.witness_time);

                let ms = mutate_slope(lt.path(), &mut rng).unwrap();
                assert!(validate_path(&ms.path).violates(Axiom::SlopeBounds));

                let mg = mutate_gap(&lt, &mut rng).unwrap();
                let report = validate_path(&mg.path);
                assert!(report.violates(Axiom::GapShape));
                assert!(!report.violates(Axiom::Ordering));
                assert!(!report.violates(Axiom::SlopeBounds));
            }
        }
    }
}
