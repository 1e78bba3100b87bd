// SPDX-License-Identifier: Apache-2.0

//! Pinhole camera. Camera space follows the x-right, y-down, z-forward
//! convention; `x_cam = R · x_world + t`.

use crate::error::{Result, RigError};
use crate::math::{Mat3, Vec3};

/// Points at or closer than this depth count as behind the camera.
pub const MIN_DEPTH: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct Camera {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: u32,
    pub height: u32,
    pub rotation: Mat3,
    pub translation: Vec3,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    pub u: f64,
    pub v: f64,
    pub depth: f64,
}

impl Camera {
    pub fn validate(&self) -> Result<()> {
        if !(self.fx > 0.0 && self.fy > 0.0) {
            return Err(RigError::arg("focal lengths must be positive"));
        }
        if self.width == 0 || self.height == 0 {
            return Err(RigError::arg("image size must be at least 1x1"));
        }
        let finite = [self.fx, self.fy, self.cx, self.cy]
            .iter()
            .all(|x| x.is_finite())
            && self.rotation.iter().all(|x| x.is_finite())
            && self.translation.iter().all(|x| x.is_finite());
        if !finite {
            return Err(RigError::NonFinite("camera"));
        }
        if (self.rotation.transpose() * self.rotation - Mat3::identity()).norm() > 1e-6
            || self.rotation.determinant() < 0.0
        {
            return Err(RigError::arg("camera rotation is not a proper rotation"));
        }
        Ok(())
    }

    /// Camera at `eye` looking at `target`; principal point at the image centre.
    pub fn look_at(
        eye: &Vec3,
        target: &Vec3,
        up: &Vec3,
        focal: f64,
        width: u32,
        height: u32,
    ) -> Result<Camera> {
        let f = target - eye;
        if f.norm() == 0.0 {
            return Err(RigError::arg("eye and target coincide"));
        }
        let z = f.normalize();
        let x = z.cross(up);
        if x.norm() < 1e-12 {
            return Err(RigError::arg("up vector parallel to view direction"));
        }
        let x = x.normalize();
        let y = z.cross(&x);
        let rotation = Mat3::from_rows(&[x.transpose(), y.transpose(), z.transpose()]);
        let cam = Camera {
            fx: focal,
            fy: focal,
            cx: width as f64 / 2.0,
            cy: height as f64 / 2.0,
            width,
            height,
            rotation,
            translation: -(rotation * eye),
        };
        cam.validate()?;
        Ok(cam)
    }

    pub fn to_camera(&self, p: &Vec3) -> Vec3 {
        self.rotation * p + self.translation
    }

    /// Optical centre in world coordinates.
    pub fn center(&self) -> Vec3 {
        -(self.rotation.transpose() * self.translation)
    }

    /// `None` when the point is at or behind [`MIN_DEPTH`].
    pub fn project(&self, p: &Vec3) -> Option<Projection> {
        let c = self.to_camera(p);
        if c.z <= MIN_DEPTH {
            return None;
        }
        Some(Projection {
            u: self.fx * c.x / c.z + self.cx,
            v: self.fy * c.y / c.z + self.cy,
            depth: c.z,
        })
    }
}

pub fn project(cam: &Camera, p: &Vec3) -> Result<Projection> {
    cam.project(p).ok_or_else(|| {
        RigError::arg(format!(
            "point ({}, {}, {}) is behind the camera",
            p.x, p.y, p.z
        ))
    })
}
