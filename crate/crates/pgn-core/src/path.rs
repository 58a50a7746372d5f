//! Continuous piecewise-linear paths `[0, T] -> R^d` with exact rational
//! breakpoints and values. Affine interpolation between breakpoints makes
//! every downstream quantity (sup distances, slopes, integrals) exactly
//! computable from breakpoint data.

use crate::dims::Dims;
use crate::error::{Error, Result};
use crate::rational::{rat_abs, Rat};
use num_traits::Zero;

/// Piecewise-linear path with strictly increasing rational breakpoints
/// starting at 0 and one rational `d`-vector per breakpoint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PiecewisePath {
    dims: Dims,
    breakpoints: Vec<Rat>,
    values: Vec<Vec<Rat>>,
}

/// One maximal linear piece of a path: adjacent breakpoint spans with equal
/// slope vectors are merged.
#[derive(Debug, Clone)]
pub struct LinearPiece {
    pub start: Rat,
    pub end: Rat,
    /// Value at `start`.
    pub start_value: Vec<Rat>,
    /// Per-component slope on the open interval.
    pub slopes: Vec<Rat>,
}

impl LinearPiece {
    pub fn length(&self) -> Rat {
        &self.end - &self.start
    }

    pub fn midpoint(&self) -> Rat {
        (&self.start + &self.end) / crate::rational::rat(2)
    }

    /// Value at time `t` (assumed inside the piece).
    pub fn value_at(&self, t: &Rat) -> Vec<Rat> {
        let dt = t - &self.start;
        self.start_value
            .iter()
            .zip(&self.slopes)
            .map(|(v, s)| v + s * &dt)
            .collect()
    }
}

impl PiecewisePath {
    pub fn new(dims: Dims, breakpoints: Vec<Rat>, values: Vec<Vec<Rat>>) -> Result<Self> {
        if breakpoints.is_empty() {
            return Err(Error::Domain("path needs at least one breakpoint".into()));
        }
        if !breakpoints[0].is_zero() {
            return Err(Error::Domain("first breakpoint must be exactly 0".into()));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Domain(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        if values.len() != breakpoints.len() {
            return Err(Error::Domain(format!(
                "{} breakpoints but {} value rows",
                breakpoints.len(),
                values.len()
            )));
        }
        let d = dims.d_usize();
        if values.iter().any(|v| v.len() != d) {
            return Err(Error::Domain(format!("every value row must have {d} entries")));
        }
        Ok(PiecewisePath {
            dims,
            breakpoints,
            values,
        })
    }

    /// Constant-zero path on `[0, end]`.
    pub fn zero(dims: Dims, end: Rat) -> Result<Self> {
        let d = dims.d_usize();
        Self::new(
            dims,
            vec![Rat::zero(), end],
            vec![vec![Rat::zero(); d], vec![Rat::zero(); d]],
        )
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn breakpoints(&self) -> &[Rat] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[Vec<Rat>] {
        &self.values
    }

    pub fn start(&self) -> &Rat {
        &self.breakpoints[0]
    }

    pub fn end(&self) -> &Rat {
        self.breakpoints.last().unwrap()
    }

    pub fn contains_time(&self, t: &Rat) -> bool {
        t >= self.start() && t <= self.end()
    }

    /// Affine interpolation; exact (stored value) at breakpoints.
    pub fn eval(&self, t: &Rat) -> Result<Vec<Rat>> {
        if !self.contains_time(t) {
            return Err(Error::Domain(format!(
                "time {t} outside domain [{}, {}]",
                self.start(),
                self.end()
            )));
        }
        // partition_point: first index with breakpoint > t, so idx-1 <= t.
        let idx = self.breakpoints.partition_point(|b| b <= t);
        if idx == 0 {
            unreachable!("t >= start was checked");
        }
        let j = idx - 1;
        if &self.breakpoints[j] == t {
            return Ok(self.values[j].clone());
        }
        let (t0, t1) = (&self.breakpoints[j], &self.breakpoints[j + 1]);
        let lambda = (t - t0) / (t1 - t0);
        Ok(self.values[j]
            .iter()
            .zip(&self.values[j + 1])
            .map(|(a, b)| a + &lambda * (b - a))
            .collect())
    }

    /// Slope vector on the span `[breakpoints[j], breakpoints[j+1]]`.
    fn span_slopes(&self, j: usize) -> Vec<Rat> {
        let dt = &self.breakpoints[j + 1] - &self.breakpoints[j];
        self.values[j]
            .iter()
            .zip(&self.values[j + 1])
            .map(|(a, b)| (b - a) / &dt)
            .collect()
    }

    /// Maximal linear pieces: spans merged while slope vectors agree.
    pub fn pieces(&self) -> Vec<LinearPiece> {
        let mut out: Vec<LinearPiece> = Vec::new();
        for j in 0..self.breakpoints.len() - 1 {
            let slopes = self.span_slopes(j);
            match out.last_mut() {
                Some(last) if last.slopes == slopes => {
                    last.end = self.breakpoints[j + 1].clone();
                }
                _ => out.push(LinearPiece {
                    start: self.breakpoints[j].clone(),
                    end: self.breakpoints[j + 1].clone(),
                    start_value: self.values[j].clone(),
                    slopes,
                }),
            }
        }
        out
    }

    /// Restriction to `[0, new_end]`, interpolating the final value if
    /// `new_end` falls inside a span.
    pub fn restrict(&self, new_end: &Rat) -> Result<Self> {
        if !self.contains_time(new_end) || new_end.is_zero() {
            return Err(Error::Domain(format!(
                "cannot restrict to [0, {new_end}]"
            )));
        }
        let mut breakpoints = Vec::new();
        let mut values = Vec::new();
        for (b, v) in self.breakpoints.iter().zip(&self.values) {
            if b > new_end {
                break;
            }
            breakpoints.push(b.clone());
            values.push(v.clone());
        }
        if breakpoints.last() != Some(new_end) {
            breakpoints.push(new_end.clone());
            values.push(self.eval(new_end)?);
        }
        Self::new(self.dims, breakpoints, values)
    }

    /// Concatenates `next` (a path starting at 0) at the current end time.
    /// The junction values must agree exactly.
    pub fn append(&mut self, next: &PiecewisePath) -> Result<()> {
        if next.dims.d() != self.dims.d() {
            return Err(Error::Domain("appending path of different dimension".into()));
        }
        let offset = self.end().clone();
        if next.values[0] != *self.values.last().unwrap() {
            return Err(Error::Domain(
                "appended path must start at the current end value".into(),
            ));
        }
        for (b, v) in next.breakpoints.iter().zip(&next.values).skip(1) {
            self.breakpoints.push(&offset + b);
            self.values.push(v.clone());
        }
        Ok(())
    }

    /// Exact sup over `[t_a, t_b]` of the max-coordinate absolute difference.
    /// Attained at a breakpoint of the merged breakpoint set, so the sup of
    /// the affine pieces is computed exactly.
    pub fn sup_distance(&self, other: &PiecewisePath, window: (&Rat, &Rat)) -> Result<Rat> {
        let (ta, tb) = window;
        if self.dims.d() != other.dims.d() {
            return Err(Error::Domain(
                "sup distance requires equal ambient dimension".into(),
            ));
        }
        if ta > tb {
            return Err(Error::Domain("window start exceeds window end".into()));
        }
        if !self.contains_time(ta)
            || !self.contains_time(tb)
            || !other.contains_time(ta)
            || !other.contains_time(tb)
        {
            return Err(Error::Domain(format!(
                "window [{ta}, {tb}] not inside both domains"
            )));
        }
        let mut grid: Vec<&Rat> = self
            .breakpoints
            .iter()
            .chain(other.breakpoints.iter())
            .filter(|b| *b > ta && *b < tb)
            .collect();
        grid.push(ta);
        grid.push(tb);
        let mut best = Rat::zero();
        for t in grid {
            let a = self.eval(t)?;
            let b = other.eval(t)?;
            for (x, y) in a.iter().zip(&b) {
                let diff = rat_abs(&(x - y));
                if diff > best {
                    best = diff;
                }
            }
        }
        Ok(best)
    }
}
