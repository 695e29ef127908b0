//! Points of ℝⁿ for n ≤ 3, written x = (x₁, x′).

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::ops::{Add, Index, Mul, Sub};

use crate::error::{Error, Result};
use crate::scalar::Real;

pub const MAX_DIM: usize = 3;

/// A point of ℝⁿ, `1 ≤ n ≤ 3`. Unused trailing coordinates are zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point<T> {
    coords: [T; MAX_DIM],
    dim: usize,
}

impl<T: Real> Point<T> {
    pub fn new(coords: &[T]) -> Result<Self> {
        if coords.is_empty() || coords.len() > MAX_DIM {
            return Err(Error::Usage(format!("points must have 1 to {MAX_DIM} coordinates, got {}", coords.len())));
        }
        let mut c = [T::zero(); MAX_DIM];
        c[..coords.len()].copy_from_slice(coords);
        Ok(Point { coords: c, dim: coords.len() })
    }

    pub fn origin(dim: usize) -> Self {
        debug_assert!((1..=MAX_DIM).contains(&dim));
        Point { coords: [T::zero(); MAX_DIM], dim }
    }

    /// `t·e₁` in ℝⁿ.
    pub fn on_axis(dim: usize, t: T) -> Self {
        let mut p = Self::origin(dim);
        p.coords[0] = t;
        p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[T] {
        &self.coords[..self.dim]
    }

    pub fn x1(&self) -> T {
        self.coords[0]
    }

    /// Reflection across {x₁ = 0}: x_* = (-x₁, x′).
    pub fn reflect(&self) -> Self {
        let mut p = *self;
        p.coords[0] = -p.coords[0];
        p
    }

    pub fn dot(&self, other: &Self) -> T {
        self.coords.iter().zip(other.coords.iter()).fold(T::zero(), |acc, (&a, &b)| acc + a * b)
    }

    pub fn norm_sq(&self) -> T {
        self.dot(self)
    }

    pub fn norm(&self) -> T {
        self.norm_sq().sqrt()
    }

    pub fn dist_sq(&self, other: &Self) -> T {
        (*self - *other).norm_sq()
    }

    pub fn dist(&self, other: &Self) -> T {
        self.dist_sq(other).sqrt()
    }

    /// `self + t·dir`.
    pub fn along(&self, dir: &Self, t: T) -> Self {
        let mut p = *self;
        for i in 0..MAX_DIM {
            p.coords[i] = p.coords[i] + t * dir.coords[i];
        }
        p
    }

    pub fn check_dim(&self, dim: usize) -> Result<()> {
        if self.dim != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: self.dim });
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.as_slice().iter().all(|c| c.is_finite())
    }
}

impl<T: Real> Index<usize> for Point<T> {
    type Output = T;
    fn index(&self, i: usize) -> &T {
        &self.as_slice()[i]
    }
}

impl<T: Real> Add for Point<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        debug_assert_eq!(self.dim, rhs.dim);
        let mut p = self;
        for i in 0..MAX_DIM {
            p.coords[i] = self.coords[i] + rhs.coords[i];
        }
        p
    }
}

impl<T: Real> Sub for Point<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        debug_assert_eq!(self.dim, rhs.dim);
        let mut p = self;
        for i in 0..MAX_DIM {
            p.coords[i] = self.coords[i] - rhs.coords[i];
        }
        p
    }
}

impl<T: Real> Mul<T> for Point<T> {
    type Output = Self;
    fn mul(self, k: T) -> Self {
        let mut p = self;
        for c in p.coords.iter_mut() {
            *c = *c * k;
        }
        p
    }
}

/// Reflection across the plane {x₁ = 0}.
pub fn reflect<T: Real>(x: &Point<T>) -> Point<T> {
    x.reflect()
}

impl<T: Real + Serialize> Serialize for Point<T> {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        self.as_slice().serialize(ser)
    }
}

impl<'de, T: Real + Deserialize<'de>> Deserialize<'de> for Point<T> {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<T>::deserialize(de)?;
        Point::new(&v).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reflect_examples() {
        let p = Point::new(&[1.0, 2.0]).unwrap();
        assert_eq!(reflect(&p).as_slice(), &[-1.0, 2.0]);
        let q = Point::new(&[0.0, 5.0]).unwrap();
        assert_eq!(reflect(&q), q);
    }

    #[test]
    fn rejects_bad_lengths() {
        assert!(Point::<f64>::new(&[]).is_err());
        assert!(Point::<f64>::new(&[1.0, 2.0, 3.0, 4.0]).is_err());
        assert!(serde_json::from_str::<Point<f64>>("[1,2,3,4]").is_err());
        let p: Point<f64> = serde_json::from_str("[0.5,-1]").unwrap();
        assert_eq!(serde_json::to_string(&p).unwrap(), "[0.5,-1.0]");
    }

    proptest! {
        #[test]
        fn reflection_is_an_involution(c in prop::collection::vec(-1e6..1e6f64, 1..=3)) {
            let p = Point::new(&c).unwrap();
            prop_assert_eq!(p.reflect().reflect(), p);
            prop_assert_eq!(p.reflect().norm(), p.norm());
        }
    }
}
