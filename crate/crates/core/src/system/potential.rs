use std::fmt;
use std::sync::Arc;

use super::problem::SupportDescriptor;
use crate::error::{Error, Result};
use crate::numerics::C64;

/// Shared scalar function of a real variable.
pub type ScalarFn = Arc<dyn Fn(f64) -> C64 + Send + Sync>;

/// A scalar potential `V(x)` with decay metadata.
#[derive(Clone)]
pub struct Potential {
    pub name: String,
    pub v: ScalarFn,
    pub support: SupportDescriptor,
    pub breakpoints: Vec<f64>,
    pub vanishes: bool,
}

impl fmt::Debug for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Potential")
            .field("name", &self.name)
            .field("support", &self.support)
            .field("breakpoints", &self.breakpoints)
            .finish_non_exhaustive()
    }
}

impl Potential {
    pub fn eval(&self, x: f64) -> C64 {
        (self.v)(x)
    }

    pub fn zero() -> Self {
        Self {
            name: "zero".into(),
            v: Arc::new(|_| C64::new(0.0, 0.0)),
            support: SupportDescriptor::Compact { halfwidth: 0.0 },
            breakpoints: Vec::new(),
            vanishes: true,
        }
    }

    /// `V(x) = -depth sech^2 x`; decays like `e^{-2|x|}`.
    pub fn poschl_teller(depth: f64) -> Self {
        Self {
            name: "poschl_teller".into(),
            v: Arc::new(move |x: f64| C64::new(-depth / x.cosh().powi(2), 0.0)),
            support: SupportDescriptor::Exponential { beta: 2.0 },
            breakpoints: Vec::new(),
            vanishes: depth == 0.0,
        }
    }

    /// `V(x) = -v0` on `[-a, a]`, zero outside.
    pub fn square_well(v0: f64, a: f64) -> Result<Self> {
        if !(a > 0.0) || !v0.is_finite() {
            return Err(Error::InvalidInput("square well needs a > 0 and finite depth".into()));
        }
        Ok(Self {
            name: "square_well".into(),
            v: Arc::new(move |x: f64| if x.abs() <= a { C64::new(-v0, 0.0) } else { C64::new(0.0, 0.0) }),
            support: SupportDescriptor::Compact { halfwidth: a },
            breakpoints: vec![-a, a],
            vanishes: v0 == 0.0,
        })
    }

    /// `V(x) = -amplitude e^{-(x/width)^2}`, declared with exponential rate 4.
    pub fn gaussian(amplitude: f64, width: f64) -> Result<Self> {
        if !(width > 0.0) || !amplitude.is_finite() {
            return Err(Error::InvalidInput("gaussian needs width > 0 and finite amplitude".into()));
        }
        Ok(Self {
            name: "gaussian".into(),
            v: Arc::new(move |x: f64| C64::new(-amplitude * (-(x / width).powi(2)).exp(), 0.0)),
            support: SupportDescriptor::Exponential { beta: 4.0 },
            breakpoints: Vec::new(),
            vanishes: amplitude == 0.0,
        })
    }

    /// Piecewise-linear interpolation of `(x, V)` samples, zero outside the
    /// sampled range (which is widened to be symmetric about 0).
    pub fn samples(points: Vec<(f64, C64)>) -> Result<Self> {
        if points.len() < 2
            || points.windows(2).any(|w| !(w[0].0 < w[1].0))
            || points.iter().any(|p| !p.0.is_finite() || !p.1.is_finite())
        {
            return Err(Error::InvalidInput("potential samples need at least two strictly increasing finite abscissae".into()));
        }
        let lo = points[0].0;
        let hi = points.last().unwrap().0;
        let halfwidth = lo.abs().max(hi.abs());
        let breakpoints: Vec<f64> = points.iter().map(|p| p.0).collect();
        let vanishes = points.iter().all(|p| p.1.norm() == 0.0);
        let pts = points;
        Ok(Self {
            name: "samples".into(),
            v: Arc::new(move |x: f64| {
                if x < lo || x > hi {
                    return C64::new(0.0, 0.0);
                }
                let i = pts.partition_point(|p| p.0 <= x).clamp(1, pts.len() - 1);
                let (x0, v0) = pts[i - 1];
                let (x1, v1) = pts[i];
                let t = (x - x0) / (x1 - x0);
                v0 * (1.0 - t) + v1 * t
            }),
            support: SupportDescriptor::Compact { halfwidth },
            breakpoints,
            vanishes,
        })
    }

    /// `V` restricted to `[-n, n]`.
    pub fn truncated(&self, n: f64) -> Self {
        let v = self.v.clone();
        let support = match self.support {
            SupportDescriptor::Compact { halfwidth } if halfwidth <= n => self.support,
            _ => SupportDescriptor::Compact { halfwidth: n },
        };
        let mut breakpoints: Vec<f64> = self.breakpoints.iter().copied().filter(|b| b.abs() < n).collect();
        breakpoints.extend([-n, n]);
        Self {
            name: format!("{} truncated at {n}", self.name),
            v: Arc::new(move |x: f64| if x.abs() <= n { v(x) } else { C64::new(0.0, 0.0) }),
            support,
            breakpoints,
            vanishes: self.vanishes,
        }
    }
}
