//! The singularity probe: samples of `S(Q) = Q^{1/m} * min_{1<=q<=Q} <q theta>`
//! where `<.>` is the sup-norm distance to the integer lattice. Samples that
//! decrease toward zero are evidence of singularity; a finite probe is never
//! a verdict.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SingularSample {
    pub q: u64,
    /// `min_{1<=q'<=q} <q' theta>`.
    pub min_dist: f64,
    /// `q^{1/m} * min_dist`.
    pub s: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SingularityProbe {
    pub m: usize,
    pub q_max: u64,
    /// Samples on a geometric grid of `Q` values (plus `q_max`).
    pub samples: Vec<SingularSample>,
    /// Minimum of `S(Q)` over every `Q <= q_max`, not just the grid.
    pub min_s: f64,
    pub argmin_q: u64,
}

fn dist_to_integers(x: f64) -> f64 {
    (x - x.round()).abs()
}

/// Exact integer loop over `q = 1..=q_max`, recording `S` on a doubling
/// grid. `S(Q)` only decreases when the running minimum improves, so the
/// global minimum over all `Q` is tracked at improvement points.
pub fn singularity_probe(theta: &[f64], q_max: u64) -> Result<SingularityProbe> {
    if theta.is_empty() {
        return Err(Error::Domain("theta must have at least one entry".into()));
    }
    if theta.iter().any(|t| !t.is_finite()) {
        return Err(Error::Domain("theta entries must be finite".into()));
    }
    if q_max < 1 {
        return Err(Error::Domain("q_max must be at least 1".into()));
    }
    let m = theta.len();
    let exponent = 1.0 / m as f64;
    let s_at = |q: u64, min_dist: f64| (q as f64).powf(exponent) * min_dist;

    let mut running_min = f64::INFINITY;
    let mut samples = Vec::new();
    let mut next_grid = 1u64;
    let mut min_s = f64::INFINITY;
    let mut argmin_q = 1;
    for q in 1..=q_max {
        let dist = theta
            .iter()
            .map(|t| dist_to_integers(q as f64 * t))
            .fold(0.0, f64::max);
        if dist < running_min {
            running_min = dist;
            let s = s_at(q, running_min);
            if s < min_s {
                min_s = s;
                argmin_q = q;
            }
        }
        if q == next_grid || q == q_max {
            samples.push(SingularSample {
                q,
                min_dist: running_min,
                s: s_at(q, running_min),
            });
            while next_grid <= q {
                next_grid = next_grid.saturating_mul(2);
            }
        }
    }
    Ok(SingularityProbe {
        m,
        q_max,
        samples,
        min_s,
        argmin_q,
    })
}

/// Value of the continued fraction `[0; a_1, a_2, ...]`. Convergents are
/// accumulated in `u128` and the iteration stops once the denominator
/// exceeds the resolution of `f64`, where further terms cannot move the
/// value.
pub fn theta_from_partial_quotients(quotients: &[u64]) -> Result<f64> {
    if quotients.is_empty() || quotients.iter().any(|&a| a == 0) {
        return Err(Error::Domain(
            "partial quotients must be a nonempty sequence of positive integers".into(),
        ));
    }
    // Convergents of [0; a_1, a_2, ...]: p_{-1}/q_{-1} = 1/0, p_0/q_0 = 0/1.
    let (mut pm, mut qm) = (1u128, 0u128);
    let (mut pc, mut qc) = (0u128, 1u128);
    for &a in quotients {
        let a = a as u128;
        let pn = match a.checked_mul(pc).and_then(|x| x.checked_add(pm)) {
            Some(v) => v,
            None => break,
        };
        let qn = match a.checked_mul(qc).and_then(|x| x.checked_add(qm)) {
            Some(v) => v,
            None => break,
        };
        pm = pc;
        qm = qc;
        pc = pn;
        qc = qn;
        if qc > 1u128 << 60 {
            break;
        }
    }
    Ok(pc as f64 / qc as f64)
}

/// Partial quotients `2^0, 2^1, 2^2, ...` (capped to keep products finite);
/// the standard rapidly-growing sequence used in the divergence probes.
pub fn geometric_partial_quotients(count: usize) -> Vec<u64> {
    (0..count.min(60)).map(|j| 1u64 << j).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_theta_hits_zero() {
        let probe = singularity_probe(&[0.5], 100).unwrap();
        assert_eq!(probe.min_s, 0.0);
        assert_eq!(probe.argmin_q, 2);
        let last = probe.samples.last().unwrap();
        assert_eq!(last.s, 0.0);
    }

    #[test]
    fn golden_ratio_stays_bounded_away_from_zero() {
        let phi = (1.0 + 5.0f64.sqrt()) / 2.0;
        let probe = singularity_probe(&[phi], 100_000).unwrap();
        assert!(probe.min_s >= 0.27, "min_s = {}", probe.min_s);
    }

    #[test]
    fn geometric_quotients_decay_between_probe_points() {
        // The convergent structure puts S(10^4) far below S(10^2).
        let theta = theta_from_partial_quotients(&geometric_partial_quotients(40)).unwrap();
        let s_100 = singularity_probe(&[theta], 100).unwrap().samples.last().unwrap().s;
        let s_10k = singularity_probe(&[theta], 10_000)
            .unwrap()
            .samples
            .last()
            .unwrap()
            .s;
        assert!(s_10k < s_100, "{s_10k} vs {s_100}");
    }

    #[test]
    fn continued_fraction_of_all_ones_is_inverse_golden() {
        let theta = theta_from_partial_quotients(&[1; 40]).unwrap();
        let expect = (5.0f64.sqrt() - 1.0) / 2.0;
        assert!((theta - expect).abs() < 1e-12);
    }

    #[test]
    fn bad_inputs_are_rejected() {
        assert!(singularity_probe(&[], 10).is_err());
        assert!(singularity_probe(&[0.5], 0).is_err());
        assert!(theta_from_partial_quotients(&[]).is_err());
        assert!(theta_from_partial_quotients(&[1, 0, 2]).is_err());
    }
}
