// SPDX-License-Identifier: Apache-2.0

//! Skeleton data model: joints, parent links, validation, hop distances and
//! the joint orderings used by the token codecs.
//!
//! The root's parent is `None` internally. The `+1` parent offset used in
//! token streams lives entirely in [`crate::codec`].

use std::cmp::Ordering;
use std::collections::VecDeque;
use std::fmt;

use crate::error::{Result, RigError};
use crate::math::Vec3;
use crate::MAX_JOINTS;

#[derive(Debug, Clone, PartialEq)]
pub struct Skeleton {
    joints: Vec<Vec3>,
    parents: Vec<Option<usize>>,
    names: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    Empty,
    NoRoot,
    MultipleRoots(Vec<usize>),
    SelfParent(usize),
    DanglingParent { joint: usize, parent: usize },
    Cycle(Vec<usize>),
    TooManyJoints(usize),
    NonFinite(usize),
    NameCount { joints: usize, names: usize },
    ParentCount { joints: usize, parents: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Empty => write!(f, "skeleton has no joints"),
            Violation::NoRoot => write!(f, "no root joint"),
            Violation::MultipleRoots(r) => write!(f, "multiple roots {r:?}"),
            Violation::SelfParent(j) => write!(f, "joint {j} is its own parent"),
            Violation::DanglingParent { joint, parent } => {
                write!(f, "joint {joint} references missing parent {parent}")
            }
            Violation::Cycle(c) => write!(f, "parent cycle through joints {c:?}"),
            Violation::TooManyJoints(n) => {
                write!(f, "{n} joints exceeds the cap of {MAX_JOINTS}")
            }
            Violation::NonFinite(j) => write!(f, "joint {j} has a non-finite coordinate"),
            Violation::NameCount { joints, names } => {
                write!(f, "{names} names given for {joints} joints")
            }
            Violation::ParentCount { joints, parents } => {
                write!(f, "{parents} parent entries given for {joints} joints")
            }
        }
    }
}

/// Every invariant a skeleton violates. Empty iff the skeleton is valid.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Symmetric `j × j` matrix of hop counts between joints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<u32>,
}

impl DistanceMatrix {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, a: usize, b: usize) -> u32 {
        self.data[a * self.n + b]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u32]> {
        self.data.chunks(self.n.max(1))
    }

    pub fn max(&self) -> u32 {
        self.data.iter().copied().max().unwrap_or(0)
    }
}

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn from_points<'a>(points: impl IntoIterator<Item = &'a Vec3>) -> Option<Aabb> {
        let mut it = points.into_iter();
        let first = *it.next()?;
        let mut b = Aabb {
            min: first,
            max: first,
        };
        for p in it {
            b.min = b.min.inf(p);
            b.max = b.max.sup(p);
        }
        Some(b)
    }

    pub fn union(&self, other: &Aabb) -> Aabb {
        Aabb {
            min: self.min.inf(&other.min),
            max: self.max.sup(&other.max),
        }
    }

    pub fn center(&self) -> Vec3 {
        (self.min + self.max) * 0.5
    }

    pub fn extent(&self) -> f64 {
        (self.max - self.min).max()
    }

    /// Maps `p` so that this box becomes centred and fits `[-0.5, 0.5]³`.
    pub fn normalize_point(&self, p: &Vec3) -> Vec3 {
        let e = self.extent();
        let s = if e > 0.0 { 1.0 / e } else { 1.0 };
        (p - self.center()) * s
    }
}

fn zyx_cmp(a: &Vec3, b: &Vec3) -> Ordering {
    a.z.total_cmp(&b.z)
        .then(a.y.total_cmp(&b.y))
        .then(a.x.total_cmp(&b.x))
}

impl Skeleton {
    /// Builds a skeleton without checking invariants; see [`Skeleton::validate`].
    pub fn new(joints: Vec<Vec3>, parents: Vec<Option<usize>>) -> Self {
        Skeleton {
            joints,
            parents,
            names: None,
        }
    }

    /// Builds and validates.
    pub fn try_new(joints: Vec<Vec3>, parents: Vec<Option<usize>>) -> Result<Self> {
        let s = Skeleton::new(joints, parents);
        s.ensure_valid()?;
        Ok(s)
    }

    pub fn with_names(mut self, names: Vec<String>) -> Self {
        self.names = Some(names);
        self
    }

    pub fn joints(&self) -> &[Vec3] {
        &self.joints
    }

    pub fn parents(&self) -> &[Option<usize>] {
        &self.parents
    }

    pub fn names(&self) -> Option<&[String]> {
        self.names.as_deref()
    }

    pub fn len(&self) -> usize {
        self.joints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.joints.is_empty()
    }

    pub fn bone_count(&self) -> usize {
        self.parents.iter().filter(|p| p.is_some()).count()
    }

    /// First root joint, if any.
    pub fn root(&self) -> Option<usize> {
        self.parents.iter().position(|p| p.is_none())
    }

    /// `(parent, child)` pairs in child-index order.
    pub fn bones(&self) -> Vec<(usize, usize)> {
        self.parents
            .iter()
            .enumerate()
            .filter_map(|(c, p)| p.map(|p| (p, c)))
            .collect()
    }

    pub fn children(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.len()];
        for (c, p) in self.parents.iter().enumerate() {
            if let Some(p) = *p {
                if p < out.len() {
                    out[p].push(c);
                }
            }
        }
        out
    }

    pub fn bounding_box(&self) -> Option<Aabb> {
        Aabb::from_points(&self.joints)
    }

    /// Copy with every joint mapped through `f`.
    pub fn map_joints(&self, f: impl Fn(&Vec3) -> Vec3) -> Skeleton {
        Skeleton {
            joints: self.joints.iter().map(f).collect(),
            parents: self.parents.clone(),
            names: self.names.clone(),
        }
    }

    /// Copy normalized into `[-0.5, 0.5]³` using `bbox`.
    pub fn normalized_by(&self, bbox: &Aabb) -> Skeleton {
        self.map_joints(|p| bbox.normalize_point(p))
    }

    /// Copy normalized by its own bounding box.
    pub fn normalized(&self) -> Skeleton {
        match self.bounding_box() {
            Some(b) => self.normalized_by(&b),
            None => self.clone(),
        }
    }

    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        let n = self.len();
        if n == 0 {
            violations.push(Violation::Empty);
            return ValidationReport { violations };
        }
        if n > MAX_JOINTS {
            violations.push(Violation::TooManyJoints(n));
        }
        if self.parents.len() != n {
            violations.push(Violation::ParentCount {
                joints: n,
                parents: self.parents.len(),
            });
            return ValidationReport { violations };
        }
        if let Some(names) = &self.names {
            if names.len() != n {
                violations.push(Violation::NameCount {
                    joints: n,
                    names: names.len(),
                });
            }
        }
        for (j, p) in self.joints.iter().enumerate() {
            if !p.iter().all(|c| c.is_finite()) {
                violations.push(Violation::NonFinite(j));
            }
        }
        let roots: Vec<usize> = (0..n).filter(|&j| self.parents[j].is_none()).collect();
        match roots.len() {
            0 => violations.push(Violation::NoRoot),
            1 => {}
            _ => violations.push(Violation::MultipleRoots(roots)),
        }
        let mut structural = false;
        for (j, p) in self.parents.iter().enumerate() {
            match *p {
                Some(p) if p == j => {
                    violations.push(Violation::SelfParent(j));
                    structural = true;
                }
                Some(p) if p >= n => {
                    violations.push(Violation::DanglingParent {
                        joint: j,
                        parent: p,
                    });
                    structural = true;
                }
                _ => {}
            }
        }
        if !structural {
            // 0 = unvisited, 1 = on current path, 2 = reaches a root.
            let mut state = vec![0u8; n];
            for start in 0..n {
                let mut path = Vec::new();
                let mut cur = start;
                loop {
                    match state[cur] {
                        2 => break,
                        1 => {
                            let at = path.iter().position(|&x| x == cur).unwrap_or(0);
                            let mut cycle: Vec<usize> = path[at..].to_vec();
                            cycle.sort_unstable();
                            violations.push(Violation::Cycle(cycle));
                            break;
                        }
                        _ => {}
                    }
                    state[cur] = 1;
                    path.push(cur);
                    match self.parents[cur] {
                        Some(p) => cur = p,
                        None => break,
                    }
                }
                for &p in &path {
                    state[p] = 2;
                }
            }
        }
        ValidationReport { violations }
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let r = self.validate();
        if r.is_valid() {
            Ok(())
        } else {
            Err(RigError::InvalidSkeleton(r))
        }
    }

    /// Depth of every joint (root = 0). Requires a valid skeleton.
    fn depths(&self) -> Vec<usize> {
        let mut depth = vec![usize::MAX; self.len()];
        for j in 0..self.len() {
            let mut chain = Vec::new();
            let mut cur = j;
            while depth[cur] == usize::MAX {
                match self.parents[cur] {
                    Some(p) => {
                        chain.push(cur);
                        cur = p;
                    }
                    None => {
                        depth[cur] = 0;
                        break;
                    }
                }
            }
            let mut d = depth[cur];
            for &c in chain.iter().rev() {
                d += 1;
                depth[c] = d;
            }
        }
        depth
    }

    /// Hop-count distances between all joint pairs.
    pub fn graph_distance_matrix(&self) -> Result<DistanceMatrix> {
        self.ensure_valid()?;
        let n = self.len();
        let depth = self.depths();
        let mut data = vec![0u32; n * n];
        for a in 0..n {
            for b in (a + 1)..n {
                // Walk the deeper joint up until both meet.
                let (mut x, mut y) = (a, b);
                let mut hops = 0u32;
                while x != y {
                    if depth[x] >= depth[y] {
                        x = self.parents[x].expect("non-root above depth 0");
                    } else {
                        y = self.parents[y].expect("non-root above depth 0");
                    }
                    hops += 1;
                }
                data[a * n + b] = hops;
                data[b * n + a] = hops;
            }
        }
        Ok(DistanceMatrix { n, data })
    }

    /// Breadth-first order with `(z, y, x)` sorting inside each depth level.
    pub fn hierarchical_order(&self) -> Result<Vec<usize>> {
        self.ensure_valid()?;
        let children = self.children();
        let root = self.root().expect("validated");
        let mut order = Vec::with_capacity(self.len());
        let mut level = vec![root];
        while !level.is_empty() {
            level.sort_by(|&a, &b| zyx_cmp(&self.joints[a], &self.joints[b]).then(a.cmp(&b)));
            let mut next = Vec::new();
            for &j in &level {
                next.extend_from_slice(&children[j]);
            }
            order.append(&mut level);
            level = next;
        }
        Ok(order)
    }

    /// All joints sorted by `(z, y, x)`, ties by index. Ignores topology.
    pub fn spatial_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| zyx_cmp(&self.joints[a], &self.joints[b]).then(a.cmp(&b)));
        order
    }

    /// Parent-before-child order by plain breadth-first traversal, children in
    /// index order. Used as the evaluation order for kinematics.
    pub fn topological_order(&self) -> Result<Vec<usize>> {
        self.ensure_valid()?;
        let children = self.children();
        let mut order = Vec::with_capacity(self.len());
        let mut queue: VecDeque<usize> = self.root().into_iter().collect();
        while let Some(j) = queue.pop_front() {
            order.push(j);
            queue.extend(children[j].iter().copied());
        }
        Ok(order)
    }

    /// Row `k` is `[parent position, own position]`; the root is duplicated.
    pub fn bone_coordinates(&self) -> Result<Vec<[f64; 6]>> {
        self.ensure_valid()?;
        Ok((0..self.len())
            .map(|k| {
                let own = self.joints[k];
                let par = self.parents[k].map_or(own, |p| self.joints[p]);
                [par.x, par.y, par.z, own.x, own.y, own.z]
            })
            .collect())
    }

    /// Copy with joints renumbered so that new joint `i` is old joint `order[i]`.
    pub fn reordered(&self, order: &[usize]) -> Result<Skeleton> {
        let n = self.len();
        if order.len() != n {
            return Err(RigError::shape("joint order", n, order.len()));
        }
        let mut inverse = vec![usize::MAX; n];
        for (new, &old) in order.iter().enumerate() {
            if old >= n || inverse[old] != usize::MAX {
                return Err(RigError::arg("joint order is not a permutation"));
            }
            inverse[old] = new;
        }
        Ok(Skeleton {
            joints: order.iter().map(|&o| self.joints[o]).collect(),
            parents: order
                .iter()
                .map(|&o| self.parents[o].map(|p| inverse[p]))
                .collect(),
            names: self
                .names
                .as_ref()
                .map(|names| order.iter().map(|&o| names[o].clone()).collect()),
        })
    }
}

/// Checks that `order` is a permutation of `0..n`.
pub fn is_permutation(order: &[usize], n: usize) -> bool {
    if order.len() != n {
        return false;
    }
    let mut seen = vec![false; n];
    order
        .iter()
        .all(|&i| i < n && !std::mem::replace(&mut seen[i], true))
}
