use serde::{Deserialize, Serialize};

use super::MapperError;
use crate::grid::Point3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Primitive {
    /// Points with `normal·p = offset`; positive on the side `normal` points to.
    Plane { normal: Point3, offset: f64 },
    Sphere { center: Point3, radius: f64 },
    /// Axis-aligned box.
    Box { min: Point3, max: Point3 },
}

fn dot(a: Point3, b: Point3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm(a: Point3) -> f64 {
    dot(a, a).sqrt()
}

impl Primitive {
    pub fn sdf(&self, p: Point3) -> f64 {
        match *self {
            Primitive::Plane { normal, offset } => (dot(normal, p) - offset) / norm(normal),
            Primitive::Sphere { center, radius } => {
                norm([p[0] - center[0], p[1] - center[1], p[2] - center[2]]) - radius
            }
            Primitive::Box { min, max } => {
                let mut outside = [0.0; 3];
                let mut inside = f64::NEG_INFINITY;
                for i in 0..3 {
                    let c = 0.5 * (min[i] + max[i]);
                    let h = 0.5 * (max[i] - min[i]);
                    let q = (p[i] - c).abs() - h;
                    outside[i] = q.max(0.0);
                    inside = inside.max(q);
                }
                norm(outside) + inside.min(0.0)
            }
        }
    }

    fn validate(&self) -> Result<(), MapperError> {
        let ok = match *self {
            Primitive::Plane { normal, offset } => norm(normal) > 0.0 && offset.is_finite(),
            Primitive::Sphere { center, radius } => {
                radius > 0.0 && center.iter().all(|c| c.is_finite())
            }
            Primitive::Box { min, max } => (0..3).all(|i| min[i] < max[i]),
        };
        if ok {
            Ok(())
        } else {
            Err(MapperError::InvalidInput(format!("invalid primitive {self:?}")))
        }
    }
}

/// Union of analytic primitives. Rays are traced out to `max_range` meters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneSpec {
    pub primitives: Vec<Primitive>,
    #[serde(default = "default_max_range")]
    pub max_range: f64,
}

fn default_max_range() -> f64 {
    4.0
}

impl SceneSpec {
    pub fn validate(&self) -> Result<(), MapperError> {
        if self.primitives.is_empty() {
            return Err(MapperError::InvalidInput("scene has no primitives".into()));
        }
        if !(self.max_range > 0.0 && self.max_range.is_finite()) {
            return Err(MapperError::InvalidInput("scene max_range must be > 0".into()));
        }
        self.primitives.iter().try_for_each(Primitive::validate)
    }

    pub fn sdf(&self, p: Point3) -> f64 {
        self.primitives
            .iter()
            .map(|s| s.sdf(p))
            .fold(f64::INFINITY, f64::min)
    }

    /// Floor plane, a sphere and a box around the origin.
    pub fn default_room() -> Self {
        Self {
            primitives: vec![
                Primitive::Plane {
                    normal: [0.0, 0.0, 1.0],
                    offset: 0.0,
                },
                Primitive::Sphere {
                    center: [0.4, 0.3, 0.35],
                    radius: 0.35,
                },
                Primitive::Box {
                    min: [-0.8, -0.6, 0.0],
                    max: [-0.2, 0.0, 0.5],
                },
            ],
            max_range: default_max_range(),
        }
    }
}
