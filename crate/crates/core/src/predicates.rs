//! Exact-sign orientation tests (adaptive precision). Returned magnitudes are
//! approximations of the determinants; only the signs are exact.

use robust::{Coord, Coord3D};

use crate::Vec3;

fn c3(p: &Vec3) -> Coord3D<f64> {
    Coord3D {
        x: p.x,
        y: p.y,
        z: p.z,
    }
}

/// Positive when `d` is on the side of plane `abc` opposite its
/// counterclockwise normal.
#[inline]
pub fn orient3d(a: &Vec3, b: &Vec3, c: &Vec3, d: &Vec3) -> f64 {
    robust::orient3d(c3(a), c3(b), c3(c), c3(d))
}

#[inline]
pub fn orient2d(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    robust::orient2d(
        Coord { x: a[0], y: a[1] },
        Coord { x: b[0], y: b[1] },
        Coord { x: c[0], y: c[1] },
    )
}

#[inline]
pub fn sign(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

/// Drops the coordinate along which the triangle's normal is largest, giving
/// an exact 2D projection in which the triangle stays nondegenerate.
pub fn projection_axis(a: &Vec3, b: &Vec3, c: &Vec3) -> usize {
    let n = (b - a).cross(&(c - a));
    let n = n.abs();
    if n.x >= n.y && n.x >= n.z {
        0
    } else if n.y >= n.z {
        1
    } else {
        2
    }
}

#[inline]
pub fn project(p: &Vec3, drop: usize) -> [f64; 2] {
    match drop {
        0 => [p.y, p.z],
        1 => [p.z, p.x],
        _ => [p.x, p.y],
    }
}

/// Whether `p` lies in the closed triangle (2D, exact).
pub fn point_in_closed_triangle(p: [f64; 2], t: [[f64; 2]; 3]) -> bool {
    let s = [
        sign(orient2d(t[0], t[1], p)),
        sign(orient2d(t[1], t[2], p)),
        sign(orient2d(t[2], t[0], p)),
    ];
    !(s.contains(&1) && s.contains(&-1))
}

/// Whether closed segment `pq` touches closed triangle `t` (2D, exact).
pub fn segment_touches_triangle(p: [f64; 2], q: [f64; 2], t: [[f64; 2]; 3]) -> bool {
    if point_in_closed_triangle(p, t) || point_in_closed_triangle(q, t) {
        return true;
    }
    (0..3).any(|k| segments_touch(p, q, t[k], t[(k + 1) % 3]))
}

pub fn segments_touch(p: [f64; 2], q: [f64; 2], r: [f64; 2], s: [f64; 2]) -> bool {
    let d1 = sign(orient2d(p, q, r));
    let d2 = sign(orient2d(p, q, s));
    let d3 = sign(orient2d(r, s, p));
    let d4 = sign(orient2d(r, s, q));
    if d1 * d2 < 0 && d3 * d4 < 0 {
        return true;
    }
    let on = |a: [f64; 2], b: [f64; 2], c: [f64; 2]| {
        c[0] >= a[0].min(b[0]) && c[0] <= a[0].max(b[0]) && c[1] >= a[1].min(b[1]) && c[1] <= a[1].max(b[1])
    };
    (d1 == 0 && on(p, q, r)) || (d2 == 0 && on(p, q, s)) || (d3 == 0 && on(r, s, p)) || (d4 == 0 && on(r, s, q))
}

/// Whether two coplanar triangles have overlapping interiors (2D, exact).
/// Uses the separating-edge criterion for convex polygons.
pub fn triangle_interiors_overlap(a: [[f64; 2]; 3], b: [[f64; 2]; 3]) -> bool {
    let separated_by_edge_of = |t: [[f64; 2]; 3], other: [[f64; 2]; 3]| {
        let orient = sign(orient2d(t[0], t[1], t[2]));
        if orient == 0 {
            return true;
        }
        (0..3).any(|k| {
            other
                .iter()
                .all(|&p| sign(orient2d(t[k], t[(k + 1) % 3], p)) * orient <= 0)
        })
    };
    !(separated_by_edge_of(a, b) || separated_by_edge_of(b, a))
}
