//! Constructions of the explicit template family: the elementary block `g`
//! on `[0, d]`, the linked template `f^(1)` that replays `g` over blocks of
//! length `p*d`, the operator `Phi` that replays a linked template over
//! nested interval unions, and the iterates `f^(k) = Phi^k(f^(1))`.

use num_traits::Zero;

use crate::dims::Dims;
use crate::error::{Error, Result};
use crate::path::PiecewisePath;
use crate::rational::{frac, rat, Rat};
use crate::template::{LinkedTemplate, Template};

/// The block `g : [0, d] -> R^d`. Component 1 descends to `-1` at `t = n`
/// with slope `-1/n`, then returns to `0` with slope `1/m`; the remaining
/// `d - 1` components are all equal and balance the sum to zero.
pub fn standard_block(dims: Dims) -> Template {
    Template::certify(block_path(dims, 1))
}

/// The block replayed at scale `p`: time stretched by `p`, values scaled by
/// `p`, on `[0, p*d]`. Scale 1 is `g` itself; the slopes are independent of
/// `p` because the two factors cancel.
fn block_path(dims: Dims, p: u64) -> PiecewisePath {
    let d = dims.d_usize();
    let (m, n) = (dims.m() as i64, dims.n() as i64);
    let p_r = rat(p as i64);
    let zero_row = vec![Rat::zero(); d];
    let mut mid = Vec::with_capacity(d);
    mid.push(-&p_r);
    for _ in 1..d {
        mid.push(&p_r * frac(1, (m + n) - 1));
    }
    PiecewisePath::new(
        dims,
        vec![Rat::zero(), &p_r * rat(n), &p_r * rat(m + n)],
        vec![zero_row.clone(), mid, zero_row],
    )
    .expect("block path construction is well formed")
}

/// Generator for the linked-template family. `Phi` keeps its source
/// generator and re-materializes it on demand, because each new interval
/// replays the source from time zero over a longer stretch than any fixed
/// finite copy could provide.
#[derive(Debug, Clone)]
pub enum TemplateFamily {
    /// `f^(1)`: block `p` on `[b_p, b_{p+1}]` with `b_p = d*p*(p-1)/2`.
    F1 { dims: Dims },
    /// `Phi` applied to a source family.
    Phi { source: Box<TemplateFamily> },
}

impl TemplateFamily {
    pub fn f1(dims: Dims) -> Self {
        TemplateFamily::F1 { dims }
    }

    pub fn phi(self) -> Self {
        TemplateFamily::Phi {
            source: Box::new(self),
        }
    }

    /// `Phi^k(f^(1))`; `k = 0` is `f^(1)` itself. `f^(1)` is the base of
    /// the family (the 1-divergence template) and each `Phi` application
    /// raises the divergence level by one, so `f^(1)` and `Phi(f^(1))` are
    /// distinct members that both exist.
    pub fn fk(dims: Dims, k: u32) -> Self {
        (0..k).fold(Self::f1(dims), |fam, _| fam.phi())
    }

    pub fn dims(&self) -> Dims {
        match self {
            TemplateFamily::F1 { dims } => *dims,
            TemplateFamily::Phi { source } => source.dims(),
        }
    }

    /// 1-based anchor times: `anchor(1) = 0`, and `[anchor(p), anchor(p+1)]`
    /// is the p-th interval of the linked structure.
    pub fn anchor(&self, p: usize) -> Rat {
        assert!(p >= 1, "anchors are 1-based");
        match self {
            TemplateFamily::F1 { dims } => {
                let d = rat(dims.d() as i64);
                let p = rat(p as i64);
                let one = rat(1);
                d * &p * (&p - one) / rat(2)
            }
            TemplateFamily::Phi { source } => {
                // c_1 = 0 and c_{q+1} = c_q + b_{q+1}, so each new interval
                // has the length of the union of the first q+1 source
                // intervals.
                let mut c = Rat::zero();
                for q in 2..=p {
                    c += source.anchor(q);
                }
                c
            }
        }
    }

    /// All anchors `<= limit`.
    pub fn anchors_through(&self, limit: &Rat) -> Vec<Rat> {
        let mut out = Vec::new();
        let mut p = 1;
        loop {
            let a = self.anchor(p);
            if &a > limit {
                return out;
            }
            out.push(a);
            p += 1;
        }
    }

    /// Materializes the family on `[0, horizon]`. A horizon that splits an
    /// interval keeps the partial path but drops the unreached anchor.
    pub fn materialize(&self, horizon: &Rat) -> Result<LinkedTemplate> {
        let path = self.materialize_path(horizon)?;
        let anchors = self.anchors_through(horizon);
        LinkedTemplate::new(Template::certify(path), anchors)
    }

    /// Raw path construction; certification happens once at the top level.
    fn materialize_path(&self, horizon: &Rat) -> Result<PiecewisePath> {
        if !horizon.is_positive() {
            return Err(Error::Domain(format!("horizon {horizon} must be > 0")));
        }
        match self {
            TemplateFamily::F1 { dims } => {
                let mut acc = start_path(*dims);
                let mut p: u64 = 1;
                loop {
                    let b_p = self.anchor(p as usize);
                    if &b_p >= horizon {
                        break;
                    }
                    let block = block_path(*dims, p);
                    let remaining = horizon - &b_p;
                    if &remaining < block.end() {
                        acc.append(&block.restrict(&remaining)?)?;
                        break;
                    }
                    acc.append(&block)?;
                    p += 1;
                }
                Ok(acc)
            }
            TemplateFamily::Phi { source } => {
                let mut acc = start_path(self.dims());
                let mut q: usize = 1;
                let mut c_q = Rat::zero();
                loop {
                    if &c_q >= horizon {
                        break;
                    }
                    let len = source.anchor(q + 1);
                    let replay = (horizon - &c_q).min(len.clone());
                    acc.append(&source.materialize_path(&replay)?)?;
                    c_q += len;
                    q += 1;
                }
                Ok(acc)
            }
        }
    }
}

fn start_path(dims: Dims) -> PiecewisePath {
    PiecewisePath::new(
        dims,
        vec![Rat::zero()],
        vec![vec![Rat::zero(); dims.d_usize()]],
    )
    .expect("single-breakpoint start path")
}

/// The linked template `f^(1)` on `[0, horizon]`.
pub fn build_f1(dims: Dims, horizon: &Rat) -> Result<LinkedTemplate> {
    TemplateFamily::f1(dims).materialize(horizon)
}

/// `Phi^k(f^(1))` on `[0, horizon]`; `k = 0` returns `f^(1)` unchanged.
pub fn build_fk(dims: Dims, k: u32, horizon: &Rat) -> Result<LinkedTemplate> {
    TemplateFamily::fk(dims, k).materialize(horizon)
}

use num_traits::Signed;

#[cfg(test)]
mod tests {
    use super::*;

    fn d21() -> Dims {
        Dims::new(2, 1).unwrap()
    }

    #[test]
    fn block_values_for_2_1() {
        let g = standard_block(d21());
        assert!(g.is_valid());
        let p = g.path();
        assert_eq!(p.breakpoints(), &[rat(0), rat(1), rat(3)]);
        assert_eq!(p.eval(&rat(0)).unwrap(), vec![rat(0), rat(0), rat(0)]);
        assert_eq!(
            p.eval(&rat(1)).unwrap(),
            vec![rat(-1), frac(1, 2), frac(1, 2)]
        );
        // Affine between (1, (-1, 1/2, 1/2)) and (3, 0).
        assert_eq!(
            p.eval(&rat(2)).unwrap(),
            vec![frac(-1, 2), frac(1, 4), frac(1, 4)]
        );
    }

    #[test]
    fn block_values_for_1_1() {
        let g = standard_block(Dims::new(1, 1).unwrap());
        assert!(g.is_valid());
        assert_eq!(g.path().eval(&rat(1)).unwrap(), vec![rat(-1), rat(1)]);
    }

    #[test]
    fn block_components_sum_to_zero() {
        for (m, n) in [(1, 1), (2, 1), (3, 2), (4, 4)] {
            let g = standard_block(Dims::new(m, n).unwrap());
            for v in g.path().values() {
                let sum: Rat = v.iter().sum();
                assert!(sum.is_zero());
            }
        }
    }

    #[test]
    fn f1_anchors_and_block_minimum() {
        let lt = build_f1(d21(), &rat(9)).unwrap();
        assert!(lt.template().is_valid());
        assert_eq!(lt.anchors(), &[rat(0), rat(3), rat(9)]);
        // Block 2 is g stretched and scaled by 2: minimum -2 at t = 3 + 2n.
        assert_eq!(
            lt.path().eval(&rat(5)).unwrap(),
            vec![rat(-2), rat(1), rat(1)]
        );
        for a in lt.anchors() {
            assert!(lt.path().eval(a).unwrap().iter().all(|v| v.is_zero()));
        }
    }

    #[test]
    fn f1_component_slopes_alternate() {
        let lt = build_f1(d21(), &rat(18)).unwrap();
        for (i, piece) in lt.path().pieces().iter().enumerate() {
            let expected = if i % 2 == 0 { rat(-1) } else { frac(1, 2) };
            assert_eq!(piece.slopes[0], expected, "piece {i}");
        }
    }

    #[test]
    fn phi_interval_lengths() {
        let fam = TemplateFamily::f1(d21()).phi();
        assert_eq!(fam.anchor(1), rat(0));
        assert_eq!(fam.anchor(2), rat(3));
        assert_eq!(fam.anchor(3), rat(12));
        assert_eq!(fam.anchor(4), rat(30));
        let lt = fam.materialize(&rat(30)).unwrap();
        assert!(lt.template().is_valid());
        assert_eq!(lt.anchors(), &[rat(0), rat(3), rat(12), rat(30)]);
        for a in lt.anchors() {
            assert!(lt.path().eval(a).unwrap().iter().all(|v| v.is_zero()));
        }
    }

    #[test]
    fn phi_first_interval_replays_source() {
        let src = TemplateFamily::f1(d21());
        let lt1 = src.materialize(&rat(3)).unwrap();
        let lt2 = src.clone().phi().materialize(&rat(30)).unwrap();
        assert_eq!(lt2.path().restrict(&rat(3)).unwrap(), *lt1.path());
    }

    #[test]
    fn fk_first_interval_is_the_block() {
        for k in 0..3 {
            let lt = build_fk(d21(), k, &rat(40)).unwrap();
            assert_eq!(
                lt.path().restrict(&rat(3)).unwrap(),
                *standard_block(d21()).path()
            );
        }
    }

    #[test]
    fn fk_zero_iterates_is_f1() {
        let a = build_fk(d21(), 0, &rat(18)).unwrap();
        let b = build_f1(d21(), &rat(18)).unwrap();
        assert_eq!(a.path(), b.path());
        assert_eq!(a.anchors(), b.anchors());
        // One iterate already differs beyond the first interval.
        let c = build_fk(d21(), 1, &rat(18)).unwrap();
        assert_ne!(c.anchors(), b.anchors());
    }

    #[test]
    fn restriction_idempotence() {
        let long = build_fk(d21(), 2, &rat(100)).unwrap();
        let short = build_fk(d21(), 2, &rat(37)).unwrap();
        let restricted = long.restrict(&rat(37)).unwrap();
        assert_eq!(restricted.path(), short.path());
        assert_eq!(restricted.anchors(), short.anchors());
    }

    #[test]
    fn horizon_must_be_positive() {
        assert!(build_f1(d21(), &rat(0)).is_err());
        assert!(build_f1(d21(), &rat(-2)).is_err());
    }
}
