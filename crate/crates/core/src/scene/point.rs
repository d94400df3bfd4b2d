use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::ops::{Add, Mul, Neg, Sub};

use super::InvariantError;

/// A point (or vector) in scene coordinates, meters.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const ORIGIN: Point3 = Point3 { x: 0.0, y: 0.0, z: 0.0 };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, other: Point3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn distance(self, other: Point3) -> f64 {
        (self - other).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn component(self, axis: usize) -> f64 {
        match axis {
            0 => self.x,
            1 => self.y,
            2 => self.z,
            _ => panic!("axis {axis} out of range"),
        }
    }

    pub fn min(self, o: Point3) -> Point3 {
        Point3::new(self.x.min(o.x), self.y.min(o.y), self.z.min(o.z))
    }

    pub fn max(self, o: Point3) -> Point3 {
        Point3::new(self.x.max(o.x), self.y.max(o.y), self.z.max(o.z))
    }
}

impl From<[f64; 3]> for Point3 {
    fn from([x, y, z]: [f64; 3]) -> Self {
        Self { x, y, z }
    }
}

impl Add for Point3 {
    type Output = Point3;
    fn add(self, o: Point3) -> Point3 {
        Point3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Point3 {
    type Output = Point3;
    fn sub(self, o: Point3) -> Point3 {
        Point3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Point3 {
    type Output = Point3;
    fn mul(self, s: f64) -> Point3 {
        Point3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Neg for Point3 {
    type Output = Point3;
    fn neg(self) -> Point3 {
        Point3::new(-self.x, -self.y, -self.z)
    }
}

// Points travel as `[x, y, z]` arrays in every file format.
impl Serialize for Point3 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_array().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Point3 {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let arr = <[f64; 3]>::deserialize(d)?;
        let p = Point3::from(arr);
        if !p.is_finite() {
            return Err(serde::de::Error::custom("non-finite coordinate"));
        }
        Ok(p)
    }
}

/// Non-empty, ordered list of finite points.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet(Vec<Point3>);

impl PointSet {
    pub fn new(points: Vec<Point3>) -> Result<Self, InvariantError> {
        if points.is_empty() {
            return Err(InvariantError::EmptyPointSet);
        }
        if let Some(index) = points.iter().position(|p| !p.is_finite()) {
            return Err(InvariantError::NonFinitePoint { index });
        }
        Ok(Self(points))
    }

    pub fn points(&self) -> &[Point3] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    /// Always false; present for API symmetry with slices.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Point3> {
        self.0.iter()
    }

    pub fn translated(&self, t: Point3) -> PointSet {
        PointSet(self.0.iter().map(|&p| p + t).collect())
    }

    pub fn scaled(&self, s: f64) -> PointSet {
        PointSet(self.0.iter().map(|&p| p * s).collect())
    }
}

impl<'a> IntoIterator for &'a PointSet {
    type Item = &'a Point3;
    type IntoIter = std::slice::Iter<'a, Point3>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_empty_and_non_finite() {
        assert_eq!(PointSet::new(vec![]).unwrap_err(), InvariantError::EmptyPointSet);
        let bad = vec![Point3::ORIGIN, Point3::new(f64::NAN, 0.0, 0.0)];
        assert_eq!(
            PointSet::new(bad).unwrap_err(),
            InvariantError::NonFinitePoint { index: 1 }
        );
    }

    #[test]
    fn serializes_as_array() {
        let p = Point3::new(1.5, -2.0, 0.25);
        assert_eq!(serde_json::to_string(&p).unwrap(), "[1.5,-2.0,0.25]");
        let back: Point3 = serde_json::from_str("[1.5,-2.0,0.25]").unwrap();
        assert_eq!(back, p);
    }
}
