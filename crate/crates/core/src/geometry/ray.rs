// SPDX-License-Identifier: Apache-2.0

//! Ray/mesh intersection with a median-split BVH.
//!
//! Triangles are two-sided and edges are inclusive, so a ray crossing a
//! shared edge or vertex reports one hit per incident triangle; those are
//! merged when their `t` agrees within [`DEDUP_TOLERANCE`] and the triangles
//! share a vertex.

use crate::error::{Result, RigError};
use crate::math::Vec3;
use crate::mesh::Mesh;

/// Hits must satisfy `t > RAY_EPSILON`.
pub const RAY_EPSILON: f64 = 1e-9;
pub const DEDUP_TOLERANCE: f64 = 1e-9;

const LEAF_SIZE: usize = 4;
const BARY_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit {
    /// Distance along the normalized direction.
    pub t: f64,
    pub triangle: usize,
}

fn intersect(o: &Vec3, d: &Vec3, [a, b, c]: [Vec3; 3]) -> Option<f64> {
    let e1 = b - a;
    let e2 = c - a;
    let p = d.cross(&e2);
    let det = e1.dot(&p);
    let scale = e1.norm() * e2.norm();
    if det.abs() <= 1e-14 * scale || scale == 0.0 {
        return None;
    }
    let inv = 1.0 / det;
    let s = o - a;
    let u = s.dot(&p) * inv;
    if !(-BARY_SLACK..=1.0 + BARY_SLACK).contains(&u) {
        return None;
    }
    let q = s.cross(&e1);
    let v = d.dot(&q) * inv;
    if v < -BARY_SLACK || u + v > 1.0 + BARY_SLACK {
        return None;
    }
    let t = e2.dot(&q) * inv;
    (t > RAY_EPSILON).then_some(t)
}

fn unit_direction(d: &Vec3) -> Result<Vec3> {
    let n = d.norm();
    if !(n > 1e-300 && n.is_finite()) {
        return Err(RigError::arg("ray direction must be non-zero and finite"));
    }
    Ok(d / n)
}

fn dedup(m: &Mesh, mut hits: Vec<Hit>) -> Vec<Hit> {
    hits.sort_by(|a, b| a.t.total_cmp(&b.t).then(a.triangle.cmp(&b.triangle)));
    let mut out: Vec<Hit> = Vec::with_capacity(hits.len());
    for h in hits {
        let tri = &m.triangles[h.triangle];
        let merged = out
            .iter()
            .rev()
            .take_while(|k| h.t - k.t < DEDUP_TOLERANCE)
            .any(|k| tri.iter().any(|i| m.triangles[k.triangle].contains(i)));
        if !merged {
            out.push(h);
        }
    }
    out
}

/// Exhaustive all-triangle test.
pub fn brute_force_intersections(m: &Mesh, origin: &Vec3, direction: &Vec3) -> Result<Vec<Hit>> {
    let d = unit_direction(direction)?;
    let hits = (0..m.triangles.len())
        .filter_map(|t| {
            intersect(origin, &d, m.triangle(t)).map(|t_hit| Hit {
                t: t_hit,
                triangle: t,
            })
        })
        .collect();
    Ok(dedup(m, hits))
}

/// One-shot query; builds a BVH each call. Use [`RayCaster`] for repeated queries.
pub fn ray_mesh_intersections(m: &Mesh, origin: &Vec3, direction: &Vec3) -> Result<Vec<Hit>> {
    RayCaster::new(m).intersections(origin, direction)
}

#[derive(Debug, Clone, Copy)]
struct Bounds {
    min: Vec3,
    max: Vec3,
}

impl Bounds {
    fn empty() -> Self {
        Bounds {
            min: Vec3::repeat(f64::INFINITY),
            max: Vec3::repeat(f64::NEG_INFINITY),
        }
    }

    fn grow(&mut self, p: &Vec3) {
        self.min = self.min.inf(p);
        self.max = self.max.sup(p);
    }

    fn padded(mut self) -> Self {
        let pad = 1e-9 * (self.max - self.min).amax().max(1.0);
        self.min.add_scalar_mut(-pad);
        self.max.add_scalar_mut(pad);
        self
    }

    /// Slab test over `[0, t_max]`.
    fn hit(&self, o: &Vec3, inv: &Vec3, t_max: f64) -> bool {
        let (mut lo, mut hi) = (0.0f64, t_max);
        for a in 0..3 {
            if inv[a].is_infinite() {
                if o[a] < self.min[a] || o[a] > self.max[a] {
                    return false;
                }
                continue;
            }
            let t1 = (self.min[a] - o[a]) * inv[a];
            let t2 = (self.max[a] - o[a]) * inv[a];
            lo = lo.max(t1.min(t2));
            hi = hi.min(t1.max(t2));
            if lo > hi {
                return false;
            }
        }
        true
    }
}

#[derive(Debug, Clone)]
enum Node {
    Leaf {
        bounds: Bounds,
        start: usize,
        end: usize,
    },
    Inner {
        bounds: Bounds,
        left: usize,
        right: usize,
    },
}

impl Node {
    fn bounds(&self) -> &Bounds {
        match self {
            Node::Leaf { bounds, .. } | Node::Inner { bounds, .. } => bounds,
        }
    }
}

/// Immutable acceleration structure; safe to share across threads.
#[derive(Debug, Clone)]
pub struct RayCaster<'m> {
    mesh: &'m Mesh,
    order: Vec<usize>,
    nodes: Vec<Node>,
}

impl<'m> RayCaster<'m> {
    pub fn new(mesh: &'m Mesh) -> Self {
        let tris: Vec<[Vec3; 3]> = (0..mesh.triangles.len())
            .map(|t| mesh.triangle(t))
            .collect();
        let centroids: Vec<Vec3> = tris.iter().map(|[a, b, c]| (a + b + c) / 3.0).collect();
        let mut rc = RayCaster {
            mesh,
            order: (0..tris.len()).collect(),
            nodes: Vec::new(),
        };
        if !tris.is_empty() {
            rc.build(&tris, &centroids, 0, tris.len());
        }
        rc
    }

    fn build(&mut self, tris: &[[Vec3; 3]], cen: &[Vec3], start: usize, end: usize) -> usize {
        let mut bounds = Bounds::empty();
        let mut cb = Bounds::empty();
        for &t in &self.order[start..end] {
            tris[t].iter().for_each(|p| bounds.grow(p));
            cb.grow(&cen[t]);
        }
        let bounds = bounds.padded();
        let id = self.nodes.len();
        let extent = cb.max - cb.min;
        if end - start <= LEAF_SIZE || extent.amax() == 0.0 {
            self.nodes.push(Node::Leaf { bounds, start, end });
            return id;
        }
        let axis = extent.imax();
        let mid = (start + end) / 2;
        self.order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            cen[a][axis].total_cmp(&cen[b][axis]).then(a.cmp(&b))
        });
        self.nodes.push(Node::Leaf { bounds, start, end });
        let left = self.build(tris, cen, start, mid);
        let right = self.build(tris, cen, mid, end);
        self.nodes[id] = Node::Inner {
            bounds,
            left,
            right,
        };
        id
    }

    pub fn mesh(&self) -> &Mesh {
        self.mesh
    }

    fn collect(&self, o: &Vec3, d: &Vec3, t_max: f64) -> Vec<Hit> {
        let mut hits = Vec::new();
        if self.nodes.is_empty() {
            return hits;
        }
        let inv = d.map(|x| 1.0 / x);
        let mut stack = vec![0usize];
        while let Some(n) = stack.pop() {
            let node = &self.nodes[n];
            if !node.bounds().hit(o, &inv, t_max) {
                continue;
            }
            match *node {
                Node::Leaf { start, end, .. } => {
                    for &t in &self.order[start..end] {
                        if let Some(th) = intersect(o, d, self.mesh.triangle(t)) {
                            if th <= t_max {
                                hits.push(Hit { t: th, triangle: t });
                            }
                        }
                    }
                }
                Node::Inner { left, right, .. } => {
                    stack.push(right);
                    stack.push(left);
                }
            }
        }
        hits
    }

    /// All hits with `t > RAY_EPSILON`, ascending.
    pub fn intersections(&self, origin: &Vec3, direction: &Vec3) -> Result<Vec<Hit>> {
        let d = unit_direction(direction)?;
        Ok(dedup(self.mesh, self.collect(origin, &d, f64::INFINITY)))
    }

    /// Hits with `RAY_EPSILON < t ≤ t_max`.
    pub fn intersections_within(
        &self,
        origin: &Vec3,
        direction: &Vec3,
        t_max: f64,
    ) -> Result<Vec<Hit>> {
        let d = unit_direction(direction)?;
        let pad = DEDUP_TOLERANCE;
        let mut hits = dedup(self.mesh, self.collect(origin, &d, t_max + pad));
        hits.retain(|h| h.t <= t_max);
        Ok(hits)
    }

    pub fn first_hit(&self, origin: &Vec3, direction: &Vec3) -> Result<Option<Hit>> {
        Ok(self.intersections(origin, direction)?.into_iter().next())
    }
}
