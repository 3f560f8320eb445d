use super::{dot3, norm3, sub, Point};
use crate::error::{Error, Result};
use std::collections::BTreeMap;

/// Analytic surface a curved patch lies on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Surface {
    Circle {
        center: [f64; 2],
        radius: f64,
    },
    Cylinder {
        point: Point,
        axis: Point,
        radius: f64,
    },
}

impl Surface {
    pub fn cylinder(point: Point, axis: Point, radius: f64) -> Self {
        let n = norm3(axis);
        Surface::Cylinder {
            point,
            axis: [axis[0] / n, axis[1] / n, axis[2] / n],
            radius,
        }
    }

    /// Closest-point projection. Fails when the point sits on the centre
    /// (or axis), where every surface point is equidistant.
    pub fn project(&self, x: Point) -> Result<Point, String> {
        match *self {
            Surface::Circle { center, radius } => {
                let d = [x[0] - center[0], x[1] - center[1]];
                let r = d[0].hypot(d[1]);
                if r <= 1e-12 * radius {
                    return Err("point coincides with circle centre".into());
                }
                Ok([
                    center[0] + radius * d[0] / r,
                    center[1] + radius * d[1] / r,
                    x[2],
                ])
            }
            Surface::Cylinder {
                point,
                axis,
                radius,
            } => {
                let d = sub(x, point);
                let s = dot3(d, axis);
                let radial = [d[0] - s * axis[0], d[1] - s * axis[1], d[2] - s * axis[2]];
                let r = norm3(radial);
                if r <= 1e-12 * radius {
                    return Err("point lies on cylinder axis".into());
                }
                let f = radius / r;
                Ok([
                    point[0] + s * axis[0] + f * radial[0],
                    point[1] + s * axis[1] + f * radial[1],
                    point[2] + s * axis[2] + f * radial[2],
                ])
            }
        }
    }

    /// Signed distance from the surface (positive outside).
    pub fn distance(&self, x: Point) -> f64 {
        match *self {
            Surface::Circle { center, radius } => {
                (x[0] - center[0]).hypot(x[1] - center[1]) - radius
            }
            Surface::Cylinder {
                point,
                axis,
                radius,
            } => {
                let d = sub(x, point);
                let s = dot3(d, axis);
                norm3([d[0] - s * axis[0], d[1] - s * axis[1], d[2] - s * axis[2]]) - radius
            }
        }
    }
}

/// Curved-surface descriptors keyed by patch name. Planar patches need none.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BoundaryGeometry {
    surfaces: BTreeMap<String, Surface>,
}

impl BoundaryGeometry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, patch: impl Into<String>, surface: Surface) -> Self {
        self.insert(patch, surface);
        self
    }

    pub fn insert(&mut self, patch: impl Into<String>, surface: Surface) {
        self.surfaces.insert(patch.into(), surface);
    }

    pub fn surface(&self, patch: &str) -> Option<&Surface> {
        self.surfaces.get(patch)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Surface)> {
        self.surfaces.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub(crate) fn project(&self, patch: &str, node: usize, x: Point) -> Result<Point> {
        match self.surfaces.get(patch) {
            None => Ok(x),
            Some(s) => s.project(x).map_err(|msg| Error::Projection {
                patch: patch.to_string(),
                node,
                msg,
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn circle_projection_is_idempotent(x in -3.0f64..3.0, y in -3.0f64..3.0) {
            prop_assume!(x.hypot(y) > 1e-3);
            let s = Surface::Circle { center: [0.0, 0.0], radius: 1.5 };
            let p = s.project([x, y, 0.0]).unwrap();
            let q = s.project(p).unwrap();
            prop_assert!(s.distance(p).abs() < 1e-14);
            prop_assert!(norm3(sub(p, q)) < 1e-14);
        }

        #[test]
        fn cylinder_projection_is_idempotent(x in -2.0f64..2.0, y in -2.0f64..2.0, z in -2.0f64..2.0) {
            let s = Surface::cylinder([0.1, -0.2, 0.3], [1.0, 1.0, 0.5], 0.7);
            prop_assume!(s.distance([x, y, z]) > -0.69);
            let p = s.project([x, y, z]).unwrap();
            let q = s.project(p).unwrap();
            prop_assert!(s.distance(p).abs() < 1e-14);
            prop_assert!(norm3(sub(p, q)) < 1e-14);
        }
    }

    #[test]
    fn centre_is_degenerate() {
        let s = Surface::Circle {
            center: [1.0, 1.0],
            radius: 1.0,
        };
        assert!(s.project([1.0, 1.0, 0.0]).is_err());
    }
}
