// SPDX-License-Identifier: Apache-2.0

//! Wavefront OBJ subset: `v`, `vn` and `f` records. Polygons are
//! fan-triangulated; texture coordinates, groups and materials are skipped.

use std::fmt::Write;

use crate::error::{Result, RigError};
use crate::math::Vec3;
use crate::mesh::Mesh;

struct Cursor<'a> {
    line: usize,
    fields: Vec<(usize, &'a str)>,
}

impl Cursor<'_> {
    fn err(&self, column: usize, message: impl Into<String>) -> RigError {
        RigError::Parse {
            line: self.line,
            column,
            message: message.into(),
        }
    }

    fn floats(&self, min: usize) -> Result<Vec3> {
        if self.fields.len() < min + 1 {
            let col = self.fields.last().map(|(c, s)| c + s.len()).unwrap_or(1);
            return Err(self.err(col, format!("expected {min} coordinates")));
        }
        let mut out = [0.0; 3];
        for (i, slot) in out.iter_mut().enumerate() {
            let (col, s) = self.fields[i + 1];
            *slot = s
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| self.err(col, format!("invalid number '{s}'")))?;
        }
        Ok(Vec3::from(out))
    }
}

fn fields(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices() {
        match (ch.is_whitespace(), start) {
            (true, Some(s)) => {
                out.push((s + 1, &line[s..i]));
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s + 1, &line[s..]));
    }
    out
}

fn resolve(cur: &Cursor, col: usize, s: &str, count: usize, what: &str) -> Result<usize> {
    let i: i64 = s
        .parse()
        .map_err(|_| cur.err(col, format!("invalid {what} index '{s}'")))?;
    let idx = if i > 0 {
        i - 1
    } else if i < 0 {
        count as i64 + i
    } else {
        -1
    };
    if idx < 0 || idx as usize >= count {
        return Err(cur.err(
            col,
            format!("{what} index {i} out of range ({count} defined)"),
        ));
    }
    Ok(idx as usize)
}

pub fn parse_obj(bytes: &[u8]) -> Result<Mesh> {
    let text = std::str::from_utf8(bytes).map_err(|e| {
        let prefix = &bytes[..e.valid_up_to()];
        let line = prefix.iter().filter(|&&b| b == b'\n').count() + 1;
        let column = prefix.iter().rev().take_while(|&&b| b != b'\n').count() + 1;
        RigError::Parse {
            line,
            column,
            message: "invalid UTF-8".into(),
        }
    })?;
    let mut vertices = Vec::new();
    let mut normals = Vec::new();
    let mut triangles = Vec::new();
    let mut face_normals: Vec<Option<usize>> = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let content = raw.split('#').next().unwrap_or("");
        let cur = Cursor {
            line: n + 1,
            fields: fields(content),
        };
        let Some(&(_, head)) = cur.fields.first() else {
            continue;
        };
        match head {
            "v" => vertices.push(cur.floats(3)?),
            "vn" => normals.push(cur.floats(3)?),
            "f" => {
                if cur.fields.len() < 4 {
                    let col = cur.fields[0].0;
                    return Err(cur.err(
                        col,
                        format!(
                            "face needs at least 3 vertices, found {}",
                            cur.fields.len() - 1
                        ),
                    ));
                }
                let mut corners = Vec::with_capacity(cur.fields.len() - 1);
                for &(col, f) in &cur.fields[1..] {
                    let mut parts = f.split('/');
                    let v = resolve(
                        &cur,
                        col,
                        parts.next().unwrap_or(""),
                        vertices.len(),
                        "vertex",
                    )?;
                    let vn = match parts.nth(1) {
                        Some(s) if !s.is_empty() => {
                            Some(resolve(&cur, col, s, normals.len(), "normal")?)
                        }
                        _ => None,
                    };
                    corners.push((v, vn));
                }
                for k in 1..corners.len() - 1 {
                    triangles.push([corners[0].0, corners[k].0, corners[k + 1].0]);
                }
                for &(v, vn) in &corners {
                    if face_normals.len() < vertices.len() {
                        face_normals.resize(vertices.len(), None);
                    }
                    if vn.is_some() {
                        face_normals[v] = vn;
                    }
                }
            }
            _ => {}
        }
    }
    face_normals.resize(vertices.len(), None);
    let normals = if !normals.is_empty() && face_normals.iter().all(|n| n.is_some()) {
        Some(face_normals.iter().map(|n| normals[n.unwrap()]).collect())
    } else if normals.len() == vertices.len() && !normals.is_empty() {
        Some(normals)
    } else {
        None
    };
    Ok(Mesh {
        vertices,
        triangles,
        normals,
    })
}

/// Shortest round-trip float formatting; normals written as `vn` with `f a//a`.
pub fn write_obj(m: &Mesh) -> String {
    let mut out = String::new();
    for v in &m.vertices {
        let _ = writeln!(out, "v {} {} {}", v.x, v.y, v.z);
    }
    if let Some(ns) = &m.normals {
        for n in ns {
            let _ = writeln!(out, "vn {} {} {}", n.x, n.y, n.z);
        }
    }
    for t in &m.triangles {
        let [a, b, c] = t.map(|i| i + 1);
        if m.normals.is_some() {
            let _ = writeln!(out, "f {a}//{a} {b}//{b} {c}//{c}");
        } else {
            let _ = writeln!(out, "f {a} {b} {c}");
        }
    }
    out
}
