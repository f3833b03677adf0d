//! Difference stacks, step lengths and cycled extrapolations.
//!
//! One extrapolation cycle of order `p` maps a base point `x` and its
//! successive images `F(x), ..., F^p(x)` to
//!
//! ```text
//! x' = sum_{i=0}^{p} C(p,i) sigma^i D^i x
//! ```
//!
//! where `D^0 x = x`, `D^i x` is the i-th forward difference of the mapped
//! sequence and `sigma` is a nonnegative secant step length. Differences are
//! never materialized as vectors; everything streams over the stored points,
//! so a cycle holds exactly the base point plus `p` mapped images.

use crate::solver::Mapping;
use crate::vecmath::all_finite;
use thiserror::Error;

/// Differences smaller than this in the max norm cannot produce a meaningful
/// step length at machine precision; the driver substitutes a unit step.
pub const DEGENERATE_FLOOR: f64 = 1e-50;

/// The p-th difference is below the machine-precision floor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("p-th difference below {DEGENERATE_FLOOR:e}; step length is meaningless")]
pub struct DegenerateStep;

/// The mapping returned a non-finite value; the driver should backtrack.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("mapping returned a non-finite value")]
pub struct MappingFailure;

/// A repeating list of extrapolation orders, each 2 or 3.
///
/// Cycle `k` uses the order at index `k mod len`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderSchedule(Vec<usize>);

impl OrderSchedule {
    pub fn new(orders: impl Into<Vec<usize>>) -> Result<Self, InvalidSchedule> {
        let orders = orders.into();
        if orders.is_empty() {
            return Err(InvalidSchedule::Empty);
        }
        if let Some(&bad) = orders.iter().find(|&&o| o != 2 && o != 3) {
            return Err(InvalidSchedule::BadOrder(bad));
        }
        Ok(Self(orders))
    }

    /// The order used by cycle `k`.
    pub fn order_at(&self, k: u64) -> usize {
        self.0[(k % self.0.len() as u64) as usize]
    }

    pub fn max_order(&self) -> usize {
        self.0.iter().copied().max().unwrap()
    }

    pub fn orders(&self) -> &[usize] {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum InvalidSchedule {
    #[error("order schedule must not be empty")]
    Empty,
    #[error("extrapolation order must be 2 or 3, got {0}")]
    BadOrder(usize),
}

/// Which secant step length to compute from a difference stack.
///
/// `AbsP` is the default: the magnitude of the p-order secant ratio
/// `<D^p, D^{p-1}> / |D^p|^2`. `Bb1` and `Bb2` are the two classical
/// spectral-gradient formulas generalized to order p (magnitudes, with the
/// raw sign reported separately), and `Rv` is their geometric mean
/// `|D^{p-1}| / |D^p|`, which is sign-safe by construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StepLengthKind {
    #[default]
    AbsP,
    Bb1,
    Bb2,
    Rv,
}

/// A computed step length: the nonnegative magnitude actually used by the
/// extrapolation, plus the raw signed value for callers that want to reject
/// wrong-sign steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepLength {
    pub sigma: f64,
    pub signed: f64,
}

/// The base point of one cycle together with its successive images under F.
///
/// `maps` holds exactly `order` vectors once the stack is complete; all
/// difference queries are answered from `x0` and `maps` with binomial
/// weights, so the stack owns the only per-cycle allocations.
#[derive(Debug, Clone)]
pub struct DifferenceStack {
    x0: Vec<f64>,
    maps: Vec<Vec<f64>>,
    order: usize,
}

impl DifferenceStack {
    /// An empty stack targeting extrapolation order `p`.
    pub fn new(x0: &[f64], order: usize) -> Self {
        assert!(order == 2 || order == 3, "order must be 2 or 3");
        Self {
            x0: x0.to_vec(),
            maps: Vec::with_capacity(3),
            order,
        }
    }

    /// Applies `F` exactly `order` times from `x`, collecting the images.
    ///
    /// Fails with [`MappingFailure`] if any image contains NaN or infinity,
    /// which tells the driver to backtrack.
    pub fn build<M: Mapping + ?Sized>(
        map: &mut M,
        x: &[f64],
        order: usize,
    ) -> Result<Self, MappingFailure> {
        let mut stack = Self::new(x, order);
        let mut out = vec![0.0; x.len()];
        for _ in 0..order {
            map.apply(stack.last_point(), &mut out);
            if !all_finite(&out) {
                return Err(MappingFailure);
            }
            stack.push_map(&out);
        }
        Ok(stack)
    }

    /// Re-targets the stack at a new base point, keeping buffers.
    pub fn reset(&mut self, x0: &[f64], order: usize) {
        assert!(order == 2 || order == 3, "order must be 2 or 3");
        self.x0.clear();
        self.x0.extend_from_slice(x0);
        self.maps.clear();
        self.order = order;
    }

    /// Appends the next image of F. Panics if the stack is already complete.
    pub fn push_map(&mut self, fx: &[f64]) {
        assert!(self.maps.len() < self.order, "stack already complete");
        assert_eq!(fx.len(), self.x0.len(), "dimension mismatch");
        self.maps.push(fx.to_vec());
    }

    /// Lowers a partially built order-3 stack to order 2; requires at least
    /// two images already pushed.
    pub fn truncate_order(&mut self, order: usize) {
        assert!(order == 2 && self.maps.len() >= 2);
        self.maps.truncate(2);
        self.order = 2;
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.x0.len()
    }

    pub fn is_complete(&self) -> bool {
        self.maps.len() == self.order
    }

    /// The cycle base point.
    pub fn base(&self) -> &[f64] {
        &self.x0
    }

    /// The most recent point: `F^j(x0)` after `j` pushes.
    pub fn last_point(&self) -> &[f64] {
        self.maps.last().map_or(&self.x0, |m| m)
    }

    pub fn maps_pushed(&self) -> usize {
        self.maps.len()
    }

    /// Coordinate `j` of the i-th difference, expanded over the stored points.
    #[inline]
    fn diff_at(&self, i: usize, j: usize) -> f64 {
        let p = |idx: usize| {
            if idx == 0 {
                self.x0[j]
            } else {
                self.maps[idx - 1][j]
            }
        };
        match i {
            0 => p(0),
            1 => p(1) - p(0),
            2 => p(2) - 2.0 * p(1) + p(0),
            3 => p(3) - 3.0 * p(2) + 3.0 * p(1) - p(0),
            _ => unreachable!("difference order above 3"),
        }
    }

    /// The i-th forward difference of the mapped sequence, `0 <= i <= order`.
    ///
    /// `i = 0` returns the base point itself.
    pub fn difference(&self, i: usize) -> Vec<f64> {
        assert!(i <= self.maps.len(), "difference {i} needs {i} images");
        (0..self.dim()).map(|j| self.diff_at(i, j)).collect()
    }

    /// Step length over the first `upto` differences (used before an
    /// order-3 stack is complete, e.g. for the first-cycle order guard).
    pub fn step_length_at(
        &self,
        upto: usize,
        kind: StepLengthKind,
    ) -> Result<StepLength, DegenerateStep> {
        assert!(upto >= 2 && upto <= self.maps.len());
        let mut dot_pp1 = 0.0;
        let mut nrm2_p = 0.0;
        let mut nrm2_p1 = 0.0;
        let mut inf_p: f64 = 0.0;
        for j in 0..self.dim() {
            let dp = self.diff_at(upto, j);
            let dp1 = self.diff_at(upto - 1, j);
            dot_pp1 += dp * dp1;
            nrm2_p += dp * dp;
            nrm2_p1 += dp1 * dp1;
            inf_p = inf_p.max(dp.abs());
        }
        if inf_p < DEGENERATE_FLOOR {
            return Err(DegenerateStep);
        }
        let (sigma, signed) = match kind {
            StepLengthKind::AbsP | StepLengthKind::Bb2 => {
                let s = dot_pp1 / nrm2_p;
                (s.abs(), s)
            }
            StepLengthKind::Bb1 => {
                if dot_pp1 == 0.0 {
                    return Err(DegenerateStep);
                }
                let s = nrm2_p1 / dot_pp1;
                (s.abs(), s)
            }
            StepLengthKind::Rv => {
                let s = (nrm2_p1 / nrm2_p).sqrt();
                (s, -s)
            }
        };
        Ok(StepLength { sigma, signed })
    }
}

/// Secant step length of the stack's full order.
///
/// Returns [`DegenerateStep`] when the p-th difference is below the
/// machine-precision floor in the max norm; the driver then applies the
/// tiny-difference guard instead of extrapolating with a garbage ratio.
pub fn step_length(
    stack: &DifferenceStack,
    kind: StepLengthKind,
) -> Result<StepLength, DegenerateStep> {
    assert!(stack.is_complete(), "stack incomplete");
    stack.step_length_at(stack.order(), kind)
}

/// One cycled extrapolation: `out = sum_{i=0}^{p} C(p,i) sigma^i D^i x`.
///
/// With `sigma = 0` this returns the base point unchanged.
pub fn extrapolate(stack: &DifferenceStack, sigma: f64, out: &mut [f64]) {
    assert!(stack.is_complete(), "stack incomplete");
    assert_eq!(out.len(), stack.dim(), "dimension mismatch");
    let p = stack.order();
    // C(p, i) * sigma^i for p in {2, 3}
    let coeffs: [f64; 4] = match p {
        2 => [1.0, 2.0 * sigma, sigma * sigma, 0.0],
        3 => [1.0, 3.0 * sigma, 3.0 * sigma * sigma, sigma * sigma * sigma],
        _ => unreachable!(),
    };
    for (j, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (i, &c) in coeffs.iter().enumerate().take(p + 1) {
            acc += c * stack.diff_at(i, j);
        }
        *o = acc;
    }
}

/// Residual of the binomial power-sum decomposition
///
/// ```text
/// (x+y)^p = x^p + y^p - sum_{i=1}^{floor(p/2)}
///           p (p-i-1)! / (i! (p-2i)!) (-xy)^i (x+y)^(p-2i)
/// ```
///
/// which is an exact identity, so the residual measures only floating-point
/// error. Coefficients are built from exact integer factorials, which caps
/// `p` at 12.
pub fn lemma1_residual(x: f64, y: f64, p: u32) -> f64 {
    assert!((2..=12).contains(&p), "p must be in 2..=12");
    let fact = |n: u32| -> u128 { (1..=n as u128).product::<u128>().max(1) };
    let s = x + y;
    let mut rhs = x.powi(p as i32) + y.powi(p as i32);
    for i in 1..=(p / 2) {
        let coeff = (p as u128 * fact(p - i - 1)) / (fact(i) * fact(p - 2 * i));
        rhs -= coeff as f64 * (-x * y).powi(i as i32) * s.powi((p - 2 * i) as i32);
    }
    s.powi(p as i32) - rhs
}
