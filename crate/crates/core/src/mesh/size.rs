use super::{cross, dot3, norm3, sub, Point, QuadraticMesh};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ElementSizes {
    pub per_element: Vec<f64>,
    pub max: f64,
}

/// Diameter of the minimal enclosing circle (2D) or sphere (3D) of every
/// element's vertex simplex.
pub fn element_size(qmesh: &QuadraticMesh) -> Result<ElementSizes> {
    let mesh = qmesh.linear();
    let mut per_element = Vec::with_capacity(mesh.n_elements());
    for e in 0..mesh.n_elements() {
        let pts: Vec<Point> = mesh.element(e).iter().map(|&v| mesh.nodes()[v]).collect();
        let m = mesh.signed_measure(e);
        let scale = (0..pts.len())
            .flat_map(|i| (0..i).map(move |j| (i, j)))
            .map(|(i, j)| norm3(sub(pts[i], pts[j])))
            .fold(0.0, f64::max);
        if !(m.abs() > 1e-14 * scale.powi(mesh.dim() as i32)) {
            return Err(Error::InvertedElement {
                element: e,
                measure: m,
            });
        }
        per_element.push(minimal_enclosing_diameter(&pts));
    }
    let max = per_element.iter().copied().fold(0.0, f64::max);
    Ok(ElementSizes { per_element, max })
}

/// Brute force over spheres spanned by 2, 3 and 4 of the points; the
/// smallest one that contains every point wins. Meant for simplex vertex
/// sets (at most four points).
pub fn minimal_enclosing_diameter(points: &[Point]) -> f64 {
    let n = points.len();
    let mut candidates: Vec<(Point, f64)> = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let c = mid(points[i], points[j]);
            candidates.push((c, norm3(sub(points[i], c))));
            for k in j + 1..n {
                if let Some(c) = circumcenter3(points[i], points[j], points[k]) {
                    candidates.push((c, norm3(sub(points[i], c))));
                }
                for l in k + 1..n {
                    if let Some(c) = circumcenter4(points[i], points[j], points[k], points[l]) {
                        candidates.push((c, norm3(sub(points[i], c))));
                    }
                }
            }
        }
    }
    candidates
        .into_iter()
        .filter(|&(c, r)| {
            points
                .iter()
                .all(|&p| norm3(sub(p, c)) <= r * (1.0 + 1e-12))
        })
        .map(|(_, r)| 2.0 * r)
        .fold(f64::INFINITY, f64::min)
}

fn mid(a: Point, b: Point) -> Point {
    [
        0.5 * (a[0] + b[0]),
        0.5 * (a[1] + b[1]),
        0.5 * (a[2] + b[2]),
    ]
}

fn circumcenter3(a: Point, b: Point, c: Point) -> Option<Point> {
    let ab = sub(b, a);
    let ac = sub(c, a);
    let n = cross(ab, ac);
    let nn = dot3(n, n);
    if nn <= 1e-300 {
        return None;
    }
    let t1 = cross(n, ab);
    let t2 = cross(ac, n);
    let (s1, s2) = (dot3(ac, ac), dot3(ab, ab));
    Some([
        a[0] + (s1 * t1[0] + s2 * t2[0]) / (2.0 * nn),
        a[1] + (s1 * t1[1] + s2 * t2[1]) / (2.0 * nn),
        a[2] + (s1 * t1[2] + s2 * t2[2]) / (2.0 * nn),
    ])
}

fn circumcenter4(a: Point, b: Point, c: Point, d: Point) -> Option<Point> {
    let (u, v, w) = (sub(b, a), sub(c, a), sub(d, a));
    let det = dot3(u, cross(v, w));
    if det.abs() <= 1e-300 {
        return None;
    }
    let (uu, vv, ww) = (dot3(u, u), dot3(v, v), dot3(w, w));
    let vw = cross(v, w);
    let wu = cross(w, u);
    let uv = cross(u, v);
    let f = 0.5 / det;
    Some([
        a[0] + f * (uu * vw[0] + vv * wu[0] + ww * uv[0]),
        a[1] + f * (uu * vw[1] + vv * wu[1] + ww * uv[1]),
        a[2] + f * (uu * vw[2] + vv * wu[2] + ww * uv[2]),
    ])
}
