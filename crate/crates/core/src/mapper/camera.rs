use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use super::MapperError;
use crate::grid::Point3;

/// Pinhole intrinsics. Camera frame: x right, y down, z along the optical axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CameraIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: u32,
    pub height: u32,
}

impl Default for CameraIntrinsics {
    fn default() -> Self {
        Self {
            fx: 150.0,
            fy: 150.0,
            cx: 80.0,
            cy: 60.0,
            width: 160,
            height: 120,
        }
    }
}

impl CameraIntrinsics {
    pub fn validate(&self) -> Result<(), MapperError> {
        let ok = self.fx > 0.0
            && self.fy > 0.0
            && self.width > 0
            && self.height > 0
            && (0.0..self.width as f64).contains(&self.cx)
            && (0.0..self.height as f64).contains(&self.cy);
        if ok {
            Ok(())
        } else {
            Err(MapperError::InvalidInput(format!("invalid intrinsics {self:?}")))
        }
    }

    /// Camera-frame direction through pixel (u, v) with unit z component.
    pub fn ray(&self, u: u32, v: u32) -> Vector3<f64> {
        Vector3::new((u as f64 - self.cx) / self.fx, (v as f64 - self.cy) / self.fy, 1.0)
    }
}

/// Camera-to-world rigid transform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub rotation: Matrix3<f64>,
    pub translation: Vector3<f64>,
}

impl Pose {
    pub fn identity() -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
        }
    }

    pub fn new(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Result<Self, MapperError> {
        let p = Self {
            rotation,
            translation,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), MapperError> {
        let ortho = (self.rotation.transpose() * self.rotation - Matrix3::identity()).abs().max();
        let det = self.rotation.determinant();
        if ortho > 1e-9 || (det - 1.0).abs() > 1e-9 || !self.translation.iter().all(|c| c.is_finite()) {
            return Err(MapperError::InvalidInput(format!(
                "pose rotation is not a proper rotation (orthogonality error {ortho:e}, det {det})"
            )));
        }
        Ok(())
    }

    /// Camera at `eye` with its optical axis pointing at `target`.
    pub fn look_at(eye: Vector3<f64>, target: Vector3<f64>, up: Vector3<f64>) -> Result<Self, MapperError> {
        let forward = (target - eye)
            .try_normalize(1e-12)
            .ok_or_else(|| MapperError::InvalidInput("look_at eye equals target".into()))?;
        Self::facing(eye, forward, up)
    }

    /// Camera at `eye` looking along `forward`. `up` picks the roll; it is
    /// swapped for another axis when parallel to `forward`.
    pub fn facing(eye: Vector3<f64>, forward: Vector3<f64>, up: Vector3<f64>) -> Result<Self, MapperError> {
        let z = forward
            .try_normalize(1e-12)
            .ok_or_else(|| MapperError::InvalidInput("zero forward direction".into()))?;
        let mut right = z.cross(&up);
        if right.norm() < 1e-9 {
            right = z.cross(&Vector3::y());
            if right.norm() < 1e-9 {
                right = z.cross(&Vector3::x());
            }
        }
        let x = right.normalize();
        let y = z.cross(&x);
        Self::new(Matrix3::from_columns(&[x, y, z]), eye)
    }

    pub fn optical_axis(&self) -> Vector3<f64> {
        self.rotation.column(2).into_owned()
    }

    pub fn transform(&self, p_cam: Vector3<f64>) -> Vector3<f64> {
        self.rotation * p_cam + self.translation
    }

    pub fn origin(&self) -> Point3 {
        [self.translation.x, self.translation.y, self.translation.z]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TrajectorySpec {
    /// Circle of `radius` at `height` above `center` (world +z up), every
    /// pose looking at `center`.
    Orbit {
        center: Point3,
        radius: f64,
        height: f64,
        frames: usize,
    },
    /// `frames` poses from `start`, advancing by `step`, all looking along
    /// `forward`.
    Line {
        start: Point3,
        step: Point3,
        forward: Point3,
        frames: usize,
    },
}

impl TrajectorySpec {
    /// 24 poses circling the default room at 1.6 m radius, 1.2 m up.
    pub fn default_orbit() -> Self {
        TrajectorySpec::Orbit {
            center: [0.0, 0.0, 0.2],
            radius: 1.6,
            height: 1.2,
            frames: 24,
        }
    }

    pub fn frames(&self) -> usize {
        match *self {
            TrajectorySpec::Orbit { frames, .. } | TrajectorySpec::Line { frames, .. } => frames,
        }
    }
}

pub fn make_trajectory(spec: &TrajectorySpec) -> Result<Vec<Pose>, MapperError> {
    let up = Vector3::z();
    match *spec {
        TrajectorySpec::Orbit {
            center,
            radius,
            height,
            frames,
        } => {
            if frames == 0 {
                return Err(MapperError::InvalidInput("trajectory has zero frames".into()));
            }
            if !(radius >= 0.0 && radius.is_finite() && height.is_finite()) || (radius == 0.0 && height == 0.0) {
                return Err(MapperError::InvalidInput(format!(
                    "degenerate orbit radius {radius} / height {height}"
                )));
            }
            let c = Vector3::from(center);
            (0..frames)
                .map(|i| {
                    let phi = std::f64::consts::TAU * i as f64 / frames as f64;
                    let eye = c + Vector3::new(radius * phi.cos(), radius * phi.sin(), height);
                    Pose::look_at(eye, c, up)
                })
                .collect()
        }
        TrajectorySpec::Line {
            start,
            step,
            forward,
            frames,
        } => {
            if frames == 0 {
                return Err(MapperError::InvalidInput("trajectory has zero frames".into()));
            }
            let step = Vector3::from(step);
            if step.norm() == 0.0 {
                return Err(MapperError::InvalidInput("line trajectory with zero step".into()));
            }
            let start = Vector3::from(start);
            (0..frames)
                .map(|i| Pose::facing(start + step * i as f64, Vector3::from(forward), up))
                .collect()
        }
    }
}
