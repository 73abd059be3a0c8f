//! Frequency filter `f_hat`, its time-domain kernel `f` and the trapezoid grid.
//!
//! `f_hat(w) = 1/2 (erf((w + a)/da) - erf((w + b)/db))` passes negative
//! frequencies between roughly `-a` and `-b`. The kernel is
//! `f(s) = 1/(2 pi) int f_hat(w) e^{-i w s} dw`, so that
//! `int f(s) e^{i x s} ds = f_hat(x)`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::linalg::C64;
use crate::{Error, Result};

/// Below this `|s|` the kernel uses its Taylor expansion.
pub const SMALL_S: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FilterParams {
    a: f64,
    delta_a: f64,
    b: f64,
    delta_b: f64,
    s_s: f64,
    tau_s: f64,
    m_s: usize,
    clamp_nonnegative: bool,
}

fn grid_half_width(s_s: f64, tau_s: f64) -> usize {
    // guard against ratios like 3.0000000000000004
    let x = s_s / tau_s;
    ((x - 1e-9 * x.max(1.0)).ceil() as usize).max(1)
}

impl FilterParams {
    pub fn new(a: f64, delta_a: f64, b: f64, delta_b: f64, s_s: f64, tau_s: f64) -> Result<Self> {
        let all = [a, delta_a, b, delta_b, s_s, tau_s];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("filter parameters must be finite".into()));
        }
        if !(a > b && b > 0.0) {
            return Err(Error::InvalidParameter(format!("filter needs a > b > 0, got a={a}, b={b}")));
        }
        if !(delta_a > 0.0 && delta_b > 0.0 && tau_s > 0.0 && s_s > 0.0) {
            return Err(Error::InvalidParameter("filter widths, S_s and tau_s must be positive".into()));
        }
        let m_s = grid_half_width(s_s, tau_s);
        if m_s > 1_000_000 {
            return Err(Error::InvalidParameter(format!("grid half-width {m_s} is unreasonably large")));
        }
        Ok(Self { a, delta_a, b, delta_b, s_s, tau_s, m_s, clamp_nonnegative: false })
    }

    /// `a = 2.5 |H|, da = 0.5 |H|, b = db = gap, S_s = 5/db, tau_s = pi/(2a)`.
    pub fn default_params(norm_h: f64, gap: f64) -> Result<Self> {
        if !(gap > 0.0 && gap.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "spectral gap estimate must be positive (got {gap}); supply b and delta_b explicitly"
            )));
        }
        if !(norm_h > 0.0 && norm_h.is_finite()) {
            return Err(Error::InvalidParameter(format!("|H| must be positive, got {norm_h}")));
        }
        if 2.5 * norm_h <= gap {
            return Err(Error::InvalidParameter(format!("gap {gap} is not below 2.5 |H| = {}", 2.5 * norm_h)));
        }
        Self::new(2.5 * norm_h, 0.5 * norm_h, gap, gap, 5.0 / gap, PI / (5.0 * norm_h))
    }

    pub fn with_clamp(mut self, clamp: bool) -> Self {
        self.clamp_nonnegative = clamp;
        self
    }

    /// Same filter and spacing with a new truncation radius.
    pub fn with_truncation(self, s_s: f64) -> Result<Self> {
        Ok(Self::new(self.a, self.delta_a, self.b, self.delta_b, s_s, self.tau_s)?.with_clamp(self.clamp_nonnegative))
    }

    pub fn with_spacing(self, tau_s: f64) -> Result<Self> {
        Ok(Self::new(self.a, self.delta_a, self.b, self.delta_b, self.s_s, tau_s)?.with_clamp(self.clamp_nonnegative))
    }

    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn delta_a(&self) -> f64 {
        self.delta_a
    }
    pub fn b(&self) -> f64 {
        self.b
    }
    pub fn delta_b(&self) -> f64 {
        self.delta_b
    }
    pub fn s_s(&self) -> f64 {
        self.s_s
    }
    pub fn tau_s(&self) -> f64 {
        self.tau_s
    }
    pub fn m_s(&self) -> usize {
        self.m_s
    }
    pub fn clamp_nonnegative(&self) -> bool {
        self.clamp_nonnegative
    }

    /// Outermost node `M_s tau_s`; at least `S_s`.
    pub fn grid_radius(&self) -> f64 {
        self.m_s as f64 * self.tau_s
    }

    pub fn f_hat(&self, omega: f64) -> f64 {
        f_hat(omega, self)
    }

    pub fn f_time(&self, s: f64) -> C64 {
        f_time(s, self)
    }
}

/// `1/2 (erf(x1) - erf(x2))` without cancellation in either tail.
fn erf_difference(x1: f64, x2: f64) -> f64 {
    if x1 + x2 > 0.0 {
        0.5 * (libm::erfc(x2) - libm::erfc(x1))
    } else {
        0.5 * (libm::erfc(-x1) - libm::erfc(-x2))
    }
}

pub fn f_hat(omega: f64, p: &FilterParams) -> f64 {
    if p.clamp_nonnegative && omega >= 0.0 {
        return 0.0;
    }
    erf_difference((omega + p.a) / p.delta_a, (omega + p.b) / p.delta_b)
}

pub fn f_time(s: f64, p: &FilterParams) -> C64 {
    let (a, b) = (p.a, p.b);
    let alpha = p.delta_a * p.delta_a / 4.0;
    let beta = p.delta_b * p.delta_b / 4.0;
    if s.abs() <= SMALL_S {
        let c0 = (a - b) / (2.0 * PI);
        let c1 = ((beta - alpha) - (a * a - b * b) / 2.0) / (2.0 * PI);
        let c2 = (-(a * alpha - b * beta) - (a.powi(3) - b.powi(3)) / 6.0) / (2.0 * PI);
        return C64::new(c0 + c2 * s * s, -c1 * s);
    }
    let ta = C64::from_polar((-alpha * s * s).exp(), a * s);
    let tb = C64::from_polar((-beta * s * s).exp(), b * s);
    (ta - tb) / C64::new(0.0, 2.0 * PI * s)
}

/// Trapezoid nodes `l tau_s` and weights for `l = -M_s..=M_s`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureGrid {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureGrid {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `w_l f(s_l)` at every node.
    pub fn weighted_kernel(&self, p: &FilterParams) -> Vec<C64> {
        self.nodes.iter().zip(&self.weights).map(|(&s, &w)| f_time(s, p) * w).collect()
    }
}

pub fn quadrature_grid(p: &FilterParams) -> QuadratureGrid {
    let m = p.m_s as i64;
    let nodes: Vec<f64> = (-m..=m).map(|l| l as f64 * p.tau_s).collect();
    let weights = (-m..=m).map(|l| if l.abs() == m { 0.5 * p.tau_s } else { p.tau_s }).collect();
    QuadratureGrid { nodes, weights }
}
