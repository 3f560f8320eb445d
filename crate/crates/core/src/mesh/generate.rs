use super::{BoundaryPatch, Mesh, PatchKind, Point};
use std::f64::consts::PI;

/// Unit square split along its 0-2 diagonal, one patch per side.
pub fn unit_square() -> Mesh {
    let nodes = vec![
        [0.0, 0.0, 0.0],
        [1.0, 0.0, 0.0],
        [1.0, 1.0, 0.0],
        [0.0, 1.0, 0.0],
    ];
    let patches = vec![
        BoundaryPatch::new("bottom", PatchKind::Wall, vec![vec![0, 1]]),
        BoundaryPatch::new("right", PatchKind::Neumann, vec![vec![1, 2]]),
        BoundaryPatch::new("top", PatchKind::Wall, vec![vec![2, 3]]),
        BoundaryPatch::new("left", PatchKind::Neumann, vec![vec![3, 0]]),
    ];
    Mesh::new(2, nodes, vec![0, 1, 2, 0, 2, 3], patches).expect("unit square is valid")
}

/// Structured channel `[0, length] x [-half_height, half_height]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelSpec {
    pub length: f64,
    pub half_height: f64,
    /// Cells along the channel.
    pub nx: usize,
    /// Cells across the channel.
    pub ny: usize,
}

/// Planar channel whose half-height grows smoothly from `inlet_half_height`
/// to `expansion * inlet_half_height` over the middle third of its length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NozzleSpec {
    pub length: f64,
    pub inlet_half_height: f64,
    pub expansion: f64,
    pub nx: usize,
    pub ny: usize,
}

/// Circular pipe of the given radius along the x axis, built from `rings`
/// concentric node rings per cross-section and `layers` slabs of prisms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipeSpec {
    pub radius: f64,
    pub length: f64,
    pub rings: usize,
    pub layers: usize,
}

/// Channel with patches `inlet` (x = 0), `outlet` (x = L), both Neumann,
/// and no-slip `walls` at y = ±H.
pub fn channel(spec: &ChannelSpec) -> Mesh {
    mapped_strip(spec.length, spec.nx, spec.ny, |_, eta| {
        eta * spec.half_height
    })
}

pub fn nozzle(spec: &NozzleSpec) -> Mesh {
    let (l, h0, r) = (spec.length, spec.inlet_half_height, spec.expansion);
    mapped_strip(l, spec.nx, spec.ny, move |x, eta| {
        let s = ((3.0 * x / l) - 1.0).clamp(0.0, 1.0);
        let blend = s * s * (3.0 - 2.0 * s);
        eta * h0 * (1.0 + (r - 1.0) * blend)
    })
}

fn mapped_strip(length: f64, nx: usize, ny: usize, y_of: impl Fn(f64, f64) -> f64) -> Mesh {
    assert!(nx >= 1 && ny >= 1, "strip needs at least one cell each way");
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        let eta = -1.0 + 2.0 * j as f64 / ny as f64;
        for i in 0..=nx {
            let x = length * i as f64 / nx as f64;
            nodes.push([x, y_of(x, eta), 0.0]);
        }
    }
    let mut elements = Vec::with_capacity(6 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            elements.extend([a, b, c, a, c, d]);
        }
    }
    let inlet = (0..ny).map(|j| vec![id(0, j + 1), id(0, j)]).collect();
    let outlet = (0..ny).map(|j| vec![id(nx, j), id(nx, j + 1)]).collect();
    let walls = (0..nx)
        .map(|i| vec![id(i, 0), id(i + 1, 0)])
        .chain((0..nx).map(|i| vec![id(i + 1, ny), id(i, ny)]))
        .collect();
    let patches = vec![
        BoundaryPatch::new("inlet", PatchKind::Neumann, inlet),
        BoundaryPatch::new("outlet", PatchKind::Neumann, outlet),
        BoundaryPatch::new("walls", PatchKind::Wall, walls),
    ];
    Mesh::new(2, nodes, elements, patches).expect("generated strip is valid")
}

/// Disk triangulation in the (y, z) plane: a centre node plus rings with
/// 6k nodes on ring k. Returns (points, triangles, outer ring ids).
fn disk(radius: f64, rings: usize) -> (Vec<[f64; 2]>, Vec<[usize; 3]>, Vec<usize>) {
    let mut pts = vec![[0.0, 0.0]];
    let mut ring_ids: Vec<Vec<usize>> = vec![vec![0]];
    for k in 1..=rings {
        let n = 6 * k;
        let r = radius * k as f64 / rings as f64;
        let ids: Vec<usize> = (0..n)
            .map(|j| {
                let t = 2.0 * PI * j as f64 / n as f64;
                pts.push([r * t.cos(), r * t.sin()]);
                pts.len() - 1
            })
            .collect();
        ring_ids.push(ids);
    }
    let angle = |ring: &[usize], j: usize| 2.0 * PI * j as f64 / ring.len() as f64;
    let mut tris = Vec::new();
    for k in 1..=rings {
        let (inner, outer) = (&ring_ids[k - 1], &ring_ids[k]);
        if inner.len() == 1 {
            for j in 0..outer.len() {
                tris.push([inner[0], outer[j], outer[(j + 1) % outer.len()]]);
            }
            continue;
        }
        let (ni, no) = (inner.len(), outer.len());
        let (mut i, mut o) = (0, 0);
        while i < ni || o < no {
            let next_i = angle(inner, i + 1);
            let next_o = angle(outer, o + 1);
            if o < no && (i == ni || next_o <= next_i) {
                tris.push([inner[i % ni], outer[o], outer[(o + 1) % no]]);
                o += 1;
            } else {
                tris.push([inner[i], outer[o % no], inner[(i + 1) % ni]]);
                i += 1;
            }
        }
    }
    for t in &mut tris {
        let (a, b, c) = (pts[t[0]], pts[t[1]], pts[t[2]]);
        let area = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
        if area < 0.0 {
            t.swap(1, 2);
        }
    }
    let outer = ring_ids.pop().unwrap_or_default();
    (pts, tris, outer)
}

/// Pipe along x with patches `inlet` (x = 0), `outlet` (x = L), both
/// Neumann, and no-slip `wall`.
pub fn pipe(spec: &PipeSpec) -> Mesh {
    assert!(
        spec.rings >= 1 && spec.layers >= 1,
        "pipe needs rings and layers"
    );
    let (pts, tris, rim) = disk(spec.radius, spec.rings);
    let np = pts.len();
    let mut nodes: Vec<Point> = Vec::with_capacity(np * (spec.layers + 1));
    for l in 0..=spec.layers {
        let x = spec.length * l as f64 / spec.layers as f64;
        nodes.extend(pts.iter().map(|p| [x, p[0], p[1]]));
    }
    let signed_volume = |t: &[usize; 4]| {
        super::simplex_signed_measure(3, &[nodes[t[0]], nodes[t[1]], nodes[t[2]], nodes[t[3]]])
    };
    let mut elements = Vec::with_capacity(12 * tris.len() * spec.layers);
    for l in 0..spec.layers {
        let off = l * np;
        for t in &tris {
            let mut s = *t;
            s.sort_unstable();
            let [a, b, c] = s.map(|v| v + off);
            let [ap, bp, cp] = [a + np, b + np, c + np];
            for mut tet in [[a, b, c, ap], [b, c, ap, bp], [c, ap, bp, cp]] {
                if signed_volume(&tet) < 0.0 {
                    tet.swap(0, 1);
                }
                elements.extend(tet);
            }
        }
    }
    let top = spec.layers * np;
    let inlet = tris.iter().map(|t| vec![t[0], t[2], t[1]]).collect();
    let outlet = tris
        .iter()
        .map(|t| t.iter().map(|v| v + top).collect())
        .collect();
    let mut wall = Vec::new();
    for l in 0..spec.layers {
        let off = l * np;
        for j in 0..rim.len() {
            let (p, q) = (rim[j] + off, rim[(j + 1) % rim.len()] + off);
            let (lo, hi) = (p.min(q), p.max(q));
            wall.push(vec![lo, hi, lo + np]);
            wall.push(vec![hi, hi + np, lo + np]);
        }
    }
    let patches = vec![
        BoundaryPatch::new("inlet", PatchKind::Neumann, inlet),
        BoundaryPatch::new("outlet", PatchKind::Neumann, outlet),
        BoundaryPatch::new("wall", PatchKind::Wall, wall),
    ];
    Mesh::new(3, nodes, elements, patches).expect("generated pipe is valid")
}
