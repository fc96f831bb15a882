//! Incremental Bowyer–Watson Delaunay triangulation.
//!
//! The outside of the convex hull is covered by "ghost" triangles that share
//! a single vertex at infinity, so no finite super-triangle is needed and the
//! hull is never truncated. A ghost `(u, v, ∞)` represents the open half-plane
//! to the left of the directed hull edge `u → v`.

use std::collections::{BTreeSet, HashSet};

use crate::error::{Error, Result};
use crate::geometry::Vec2;

const GHOST: usize = usize::MAX;

/// Twice the signed area of `abc`; positive when counter-clockwise.
#[inline]
fn orient(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

/// Positive when `d` lies strictly inside the circumcircle of the
/// counter-clockwise triangle `abc`.
#[inline]
fn in_circle(a: Vec2, b: Vec2, c: Vec2, d: Vec2) -> f64 {
    let (adx, ady) = (a.x - d.x, a.y - d.y);
    let (bdx, bdy) = (b.x - d.x, b.y - d.y);
    let (cdx, cdy) = (c.x - d.x, c.y - d.y);
    let ad = adx * adx + ady * ady;
    let bd = bdx * bdx + bdy * bdy;
    let cd = cdx * cdx + cdy * cdy;
    adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) + ad * (bdx * cdy - bdy * cdx)
}

/// A Delaunay triangulation of a planar point set.
#[derive(Debug, Clone)]
pub struct Triangulation {
    points: Vec<Vec2>,
    triangles: Vec<[usize; 3]>,
}

impl Triangulation {
    /// Triangulates `points`. Exact duplicates are ignored.
    pub fn new(points: &[Vec2]) -> Result<Self> {
        if points.len() < 3 {
            return Err(Error::Degenerate(format!(
                "Delaunay triangulation needs at least 3 points, got {}",
                points.len()
            )));
        }
        if let Some(i) = points.iter().position(|p| !p.is_finite()) {
            return Err(Error::Degenerate(format!("point {i} is not finite")));
        }

        let seed = find_seed(points).ok_or_else(|| {
            Error::Degenerate("all points are collinear; no triangle exists".into())
        })?;

        let mut tri = Triangulation {
            points: points.to_vec(),
            triangles: Vec::with_capacity(2 * points.len() + 4),
        };
        let [a, b, c] = seed;
        tri.triangles.push([a, b, c]);
        tri.triangles.push([b, a, GHOST]);
        tri.triangles.push([c, b, GHOST]);
        tri.triangles.push([a, c, GHOST]);

        let mut seen: HashSet<(u64, u64)> = HashSet::new();
        for &i in &seed {
            seen.insert(key(points[i]));
        }
        for i in 0..points.len() {
            if seed.contains(&i) || !seen.insert(key(points[i])) {
                continue;
            }
            tri.insert(i);
        }
        Ok(tri)
    }

    fn conflicts(&self, t: &[usize; 3], p: Vec2) -> bool {
        if t[2] == GHOST {
            let (u, v) = (self.points[t[0]], self.points[t[1]]);
            let o = orient(u, v, p);
            if o != 0.0 {
                return o > 0.0;
            }
            // On the hull line: only the open segment counts.
            (p - u).dot(v - u) > 0.0 && (p - v).dot(u - v) > 0.0
        } else {
            let [a, b, c] = t.map(|i| self.points[i]);
            in_circle(a, b, c, p) > 0.0
        }
    }

    fn insert(&mut self, idx: usize) {
        let p = self.points[idx];
        let (bad, keep): (Vec<[usize; 3]>, Vec<[usize; 3]>) = self
            .triangles
            .iter()
            .partition(|t| self.conflicts(t, p));

        let edges: BTreeSet<(usize, usize)> = bad
            .iter()
            .flat_map(|t| [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])])
            .collect();

        self.triangles = keep;
        for &(u, v) in &edges {
            if edges.contains(&(v, u)) {
                continue;
            }
            // Keep the ghost vertex in the last slot, preserving orientation.
            let t = if u == GHOST {
                [v, idx, GHOST]
            } else if v == GHOST {
                [idx, u, GHOST]
            } else {
                [u, v, idx]
            };
            self.triangles.push(t);
        }
    }

    pub fn points(&self) -> &[Vec2] {
        &self.points
    }

    /// Finite triangles as counter-clockwise index triples into [`Triangulation::points`].
    pub fn triangles(&self) -> impl Iterator<Item = [usize; 3]> + '_ {
        self.triangles.iter().copied().filter(|t| t[2] != GHOST)
    }

    /// Longest edge over all finite triangles.
    pub fn max_edge(&self) -> f64 {
        self.triangles()
            .flat_map(|[a, b, c]| [(a, b), (b, c), (c, a)])
            .map(|(i, j)| self.points[i].distance(self.points[j]))
            .fold(0.0, f64::max)
    }
}

fn key(p: Vec2) -> (u64, u64) {
    // +0.0 and -0.0 are the same point.
    ((p.x + 0.0).to_bits(), (p.y + 0.0).to_bits())
}

/// First non-degenerate triangle, returned counter-clockwise.
fn find_seed(points: &[Vec2]) -> Option<[usize; 3]> {
    let a = 0;
    let b = (1..points.len()).find(|&i| points[i] != points[a])?;
    let c = (1..points.len()).find(|&i| orient(points[a], points[b], points[i]) != 0.0)?;
    if orient(points[a], points[b], points[c]) > 0.0 {
        Some([a, b, c])
    } else {
        Some([a, c, b])
    }
}

/// Maximum edge length over the Delaunay triangles of `points`.
pub fn delaunay_max_edge(points: &[Vec2]) -> Result<f64> {
    Ok(Triangulation::new(points)?.max_edge())
}
