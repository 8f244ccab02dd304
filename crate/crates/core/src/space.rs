//! Robot configurations and the weighted SE(2) metric.

use serde::{Deserialize, Serialize};

use crate::geometry::{angle_difference, normalize_angle, Point2};

/// A robot pose. Point robots keep `theta == 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "[f64; 3]")]
pub struct Configuration {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Configuration {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Self {
            x,
            y,
            theta: normalize_angle(theta),
        }
    }

    pub fn point(x: f64, y: f64) -> Self {
        Self { x, y, theta: 0.0 }
    }

    pub fn position(&self) -> Point2 {
        Point2::new(self.x, self.y)
    }

    /// `|dp| + rotation_weight * |dtheta|` with the shortest-arc angle difference.
    pub fn distance(&self, other: &Self, rotation_weight: f64) -> f64 {
        let d = self.position().distance(other.position());
        if rotation_weight == 0.0 {
            d
        } else {
            d + rotation_weight * angle_difference(self.theta, other.theta).abs()
        }
    }

    /// Linear in position, shortest arc in orientation.
    pub fn interpolate(&self, other: &Self, t: f64) -> Self {
        Self {
            x: self.x + (other.x - self.x) * t,
            y: self.y + (other.y - self.y) * t,
            theta: normalize_angle(self.theta + angle_difference(self.theta, other.theta) * t),
        }
    }

    /// Total order used to canonicalise edge direction.
    pub(crate) fn lex_cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.x
            .total_cmp(&other.x)
            .then(self.y.total_cmp(&other.y))
            .then(self.theta.total_cmp(&other.theta))
    }
}

impl TryFrom<Vec<f64>> for Configuration {
    type Error = String;
    fn try_from(v: Vec<f64>) -> Result<Self, Self::Error> {
        match v.as_slice() {
            [x, y] => Ok(Self::point(*x, *y)),
            [x, y, t] => Ok(Self::new(*x, *y, *t)),
            _ => Err(format!("configuration needs 2 or 3 numbers, got {}", v.len())),
        }
    }
}

impl From<Configuration> for [f64; 3] {
    fn from(c: Configuration) -> Self {
        [c.x, c.y, c.theta]
    }
}
