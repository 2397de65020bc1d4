//! Planar geometry helpers. All angles are radians, all lengths meters.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        let (dx, dy) = (other.x - self.x, other.y - self.y);
        (dx * dx + dy * dy).sqrt()
    }

    /// Bearing from `self` towards `other`. A co-located target has bearing 0.
    pub fn bearing_to(self, other: Point) -> f64 {
        let (dx, dy) = (other.x - self.x, other.y - self.y);
        if dx == 0.0 && dy == 0.0 {
            0.0
        } else {
            dy.atan2(dx)
        }
    }

    /// Point reached by travelling `len` meters along `bearing`.
    pub fn advanced(self, bearing: f64, len: f64) -> Point {
        Point::new(self.x + len * bearing.cos(), self.y + len * bearing.sin())
    }

    pub fn in_square(self, side: f64) -> bool {
        (0.0..=side).contains(&self.x) && (0.0..=side).contains(&self.y)
    }
}

/// Wraps an angle into (-pi, pi].
pub fn normalize_angle(a: f64) -> f64 {
    if a > -PI && a <= PI {
        return a;
    }
    let mut r = a % (2.0 * PI);
    if r <= -PI {
        r += 2.0 * PI;
    } else if r > PI {
        r -= 2.0 * PI;
    }
    r
}

/// Signed angle from `from` to `to`, normalized into (-pi, pi].
pub fn angle_between(from: f64, to: f64) -> f64 {
    normalize_angle(to - from)
}
