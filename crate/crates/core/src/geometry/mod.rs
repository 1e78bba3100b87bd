// SPDX-License-Identifier: Apache-2.0

//! Mesh I/O, surface sampling, ray queries, weight transfer and the camera.

mod camera;
mod obj;
mod ray;
mod sample;
mod transfer;

pub use camera::{project, Camera, Projection, MIN_DEPTH};
pub use obj::{parse_obj, write_obj};
pub use ray::{
    brute_force_intersections, ray_mesh_intersections, Hit, RayCaster, DEDUP_TOLERANCE, RAY_EPSILON,
};
pub use sample::{sample_surface, SurfaceSamples, DEFAULT_SAMPLE_COUNT};
pub use transfer::{nearest_point_transfer, nearest_vertex_transfer};
