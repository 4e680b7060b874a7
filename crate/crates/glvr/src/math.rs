//! Small geometric vocabulary: 3-vectors, RGB triples, rays, axis-aligned
//! boxes. Everything is f64; images quantize only at output time.

use std::ops::{Add, Mul, Neg, Sub};

pub type Rgb = [f64; 3];

pub fn rgb_add_scaled(acc: Rgb, scale: f64, c: Rgb) -> Rgb {
    [
        acc[0] + scale * c[0],
        acc[1] + scale * c[1],
        acc[2] + scale * c[2],
    ]
}

pub fn rgb_clamp_unit(c: Rgb) -> Rgb {
    [
        c[0].clamp(0.0, 1.0),
        c[1].clamp(0.0, 1.0),
        c[2].clamp(0.0, 1.0),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 {
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn length_squared(self) -> f64 {
        self.dot(self)
    }

    pub fn length(self) -> f64 {
        self.length_squared().sqrt()
    }

    pub fn normalized(self) -> Vec3 {
        self * (1.0 / self.length())
    }

    pub fn axis(self, i: usize) -> f64 {
        match i {
            0 => self.x,
            1 => self.y,
            _ => self.z,
        }
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        self * -1.0
    }
}

/// A ray with its active parameter span. `generate_ray` leaves the span at
/// the unbounded default [0, ∞); clipping against a field's bounds via
/// `scene::ray_aabb` produces the span the renderers integrate over.
#[derive(Debug, Clone, Copy)]
pub struct Ray {
    pub origin: Vec3,
    pub dir: Vec3,
    pub t_min: f64,
    pub t_max: f64,
}

impl Ray {
    pub fn new(origin: Vec3, dir: Vec3) -> Self {
        Ray {
            origin,
            dir,
            t_min: 0.0,
            t_max: f64::INFINITY,
        }
    }

    pub fn at(&self, t: f64) -> Vec3 {
        self.origin + self.dir * t
    }

    pub fn with_span(&self, t_min: f64, t_max: f64) -> Ray {
        Ray {
            t_min,
            t_max,
            ..*self
        }
    }

    pub fn span(&self) -> f64 {
        self.t_max - self.t_min
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn new(min: Vec3, max: Vec3) -> Self {
        Aabb { min, max }
    }

    pub fn contains(&self, p: Vec3) -> bool {
        p.x >= self.min.x
            && p.x <= self.max.x
            && p.y >= self.min.y
            && p.y <= self.max.y
            && p.z >= self.min.z
            && p.z <= self.max.z
    }

    pub fn union(&self, o: &Aabb) -> Aabb {
        Aabb {
            min: Vec3::new(
                self.min.x.min(o.min.x),
                self.min.y.min(o.min.y),
                self.min.z.min(o.min.z),
            ),
            max: Vec3::new(
                self.max.x.max(o.max.x),
                self.max.y.max(o.max.y),
                self.max.z.max(o.max.z),
            ),
        }
    }

    pub fn extent(&self) -> Vec3 {
        self.max - self.min
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vector_algebra_basics() {
        let a = Vec3::new(1.0, 2.0, 3.0);
        let b = Vec3::new(-1.0, 0.5, 2.0);
        assert_eq!(a + b, Vec3::new(0.0, 2.5, 5.0));
        assert_eq!(a - b, Vec3::new(2.0, 1.5, 1.0));
        assert_eq!(a * 2.0, Vec3::new(2.0, 4.0, 6.0));
        assert!((a.dot(b) - 6.0).abs() < 1e-15);
        assert!((Vec3::new(3.0, 4.0, 0.0).length() - 5.0).abs() < 1e-15);
        let u = a.normalized();
        assert!((u.length() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn ray_evaluation_and_span() {
        let r = Ray::new(Vec3::new(0.0, 0.0, 0.0), Vec3::new(0.0, 0.0, -1.0));
        assert_eq!(r.at(2.0), Vec3::new(0.0, 0.0, -2.0));
        assert_eq!(r.t_min, 0.0);
        assert!(r.t_max.is_infinite());
        let clipped = r.with_span(1.0, 3.0);
        assert_eq!(clipped.span(), 2.0);
    }

    #[test]
    fn aabb_union_and_containment() {
        let a = Aabb::new(Vec3::new(0.0, 0.0, 0.0), Vec3::new(1.0, 1.0, 1.0));
        let b = Aabb::new(Vec3::new(-1.0, 0.5, 0.0), Vec3::new(0.5, 2.0, 0.5));
        let u = a.union(&b);
        assert_eq!(u.min, Vec3::new(-1.0, 0.0, 0.0));
        assert_eq!(u.max, Vec3::new(1.0, 2.0, 1.0));
        assert!(u.contains(Vec3::new(0.9, 1.9, 0.9)));
        assert!(!u.contains(Vec3::new(1.1, 0.0, 0.0)));
    }

    #[test]
    fn rgb_helpers() {
        let c = rgb_add_scaled([0.1, 0.2, 0.3], 0.5, [1.0, 0.0, 2.0]);
        assert_eq!(c, [0.6, 0.2, 1.3]);
        assert_eq!(rgb_clamp_unit(c), [0.6, 0.2, 1.0]);
        assert_eq!(rgb_clamp_unit([-0.1, 0.5, 1.5]), [0.0, 0.5, 1.0]);
    }
}
