//! Geometry of the periodic unit square.
//!
//! Positions are always stored reduced into `[0, 1)²`. Displacements use the
//! minimum-image convention with every component in `(-0.5, 0.5]`.

use crate::error::{Error, Result};

/// A point on the unit torus. Both coordinates lie in `[0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TorusPoint {
    x: f64,
    y: f64,
}

/// Minimum-image displacement between two torus points.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct TorusVector {
    pub dx: f64,
    pub dy: f64,
}

/// Reduce a finite coordinate into `[0, 1)`.
#[inline]
pub fn wrap_coord(v: f64) -> f64 {
    let r = v - v.floor();
    // tiny negative inputs round up to exactly 1.0
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Shift a coordinate difference by an integer so it lands in `(-0.5, 0.5]`.
#[inline]
pub fn min_image(d: f64) -> f64 {
    // differences of wrapped coordinates lie in (-1, 1); same result as below
    if d.abs() < 1.0 {
        return if d > 0.5 {
            d - 1.0
        } else if d <= -0.5 {
            d + 1.0
        } else {
            d
        };
    }
    let r = d - d.round();
    if r <= -0.5 {
        r + 1.0
    } else {
        r
    }
}

impl TorusPoint {
    /// Wrap a raw planar point onto the torus.
    pub fn wrap(x: f64, y: f64) -> Result<Self> {
        if !x.is_finite() || !y.is_finite() {
            return Err(Error::Input(format!(
                "cannot wrap non-finite point ({x}, {y})"
            )));
        }
        Ok(Self::wrap_finite(x, y))
    }

    /// Wrap without the finiteness check. Non-finite input yields NaN coordinates.
    #[inline]
    pub fn wrap_finite(x: f64, y: f64) -> Self {
        Self {
            x: wrap_coord(x),
            y: wrap_coord(y),
        }
    }

    #[inline]
    pub fn x(&self) -> f64 {
        self.x
    }

    #[inline]
    pub fn y(&self) -> f64 {
        self.y
    }

    #[inline]
    pub fn to_array(self) -> [f64; 2] {
        [self.x, self.y]
    }

    #[inline]
    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Move by a planar vector and wrap the result.
    #[inline]
    pub fn translate(self, dx: f64, dy: f64) -> Self {
        Self::wrap_finite(self.x + dx, self.y + dy)
    }
}

impl TorusVector {
    #[inline]
    pub fn new(dx: f64, dy: f64) -> Self {
        Self { dx, dy }
    }

    #[inline]
    pub fn norm(&self) -> f64 {
        (self.dx * self.dx + self.dy * self.dy).sqrt()
    }

    #[inline]
    pub fn l1(&self) -> f64 {
        self.dx.abs() + self.dy.abs()
    }
}

impl std::ops::Neg for TorusVector {
    type Output = TorusVector;
    fn neg(self) -> TorusVector {
        TorusVector::new(-self.dx, -self.dy)
    }
}

/// Minimum-image displacement `a - b`.
#[inline]
pub fn displacement(a: TorusPoint, b: TorusPoint) -> TorusVector {
    TorusVector {
        dx: min_image(a.x - b.x),
        dy: min_image(a.y - b.y),
    }
}

/// Euclidean length of the minimum-image displacement.
#[inline]
pub fn distance(a: TorusPoint, b: TorusPoint) -> f64 {
    displacement(a, b).norm()
}
