//! Mesh file readers and the native writer.
//!
//! Native format (whitespace separated, `#` starts a comment):
//!
//! ```text
//! dim n_nodes n_elements n_patches
//! x y [z]                      (n_nodes lines)
//! v0 v1 v2 [v3]                (n_elements lines, 0-based)
//! patch <name> <kind> <n_faces>
//! a b [c]                      (n_faces lines)
//! ...
//! ```
//!
//! The legacy-VTK reader accepts ASCII `UNSTRUCTURED_GRID` files. Volume
//! cells (triangles in 2D, tetrahedra in 3D) form the mesh; lower-dimensional
//! cells (lines in 2D, triangles in 3D) are boundary faces grouped by an
//! integer `CELL_DATA` scalar named `patch`. An optional `kind` scalar
//! (0 wall, 1 dirichlet, 2 neumann) sets the patch kind, default wall.
//! Patches are named `patch<id>`.

use super::{BoundaryPatch, Mesh, PatchKind, Point};
use crate::error::{Error, Result};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Native,
    Vtk,
}

impl FromStr for MeshFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "native" | "msh" | "text" => Ok(MeshFormat::Native),
            "vtk" => Ok(MeshFormat::Vtk),
            other => Err(Error::Invalid(format!("unknown mesh format '{other}'"))),
        }
    }
}

pub fn load_mesh(path: &Path, format: MeshFormat) -> Result<Mesh> {
    let text = std::fs::read_to_string(path)?;
    match format {
        MeshFormat::Native => read_native(&text, path),
        MeshFormat::Vtk => read_vtk(&text, path),
    }
}

/// Non-empty, comment-stripped lines with their 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("").trim();
        (!l.is_empty()).then_some((i + 1, l))
    })
}

fn parse_tokens<T: FromStr>(line: &str, lineno: usize, path: &Path) -> Result<Vec<T>> {
    line.split_whitespace()
        .map(|tok| {
            tok.parse::<T>()
                .map_err(|_| Error::parse(path, lineno, format!("cannot parse '{tok}'")))
        })
        .collect()
}

pub fn read_native(text: &str, path: &Path) -> Result<Mesh> {
    let mut lines = content_lines(text);
    let eof = |what: &str| Error::parse(path, 0, format!("unexpected end of file reading {what}"));
    let (ln, header) = lines.next().ok_or_else(|| eof("header"))?;
    let h: Vec<usize> = parse_tokens(header, ln, path)?;
    if h.len() != 4 {
        return Err(Error::parse(
            path,
            ln,
            "header must be `dim n_nodes n_elements n_patches`",
        ));
    }
    let (dim, n_nodes, n_elements, n_patches) = (h[0], h[1], h[2], h[3]);
    if dim != 2 && dim != 3 {
        return Err(Error::parse(
            path,
            ln,
            format!("unsupported dimension {dim}"),
        ));
    }
    let mut nodes = Vec::with_capacity(n_nodes);
    for _ in 0..n_nodes {
        let (ln, l) = lines.next().ok_or_else(|| eof("nodes"))?;
        let c: Vec<f64> = parse_tokens(l, ln, path)?;
        if c.len() != dim {
            return Err(Error::parse(
                path,
                ln,
                format!("expected {dim} coordinates"),
            ));
        }
        let mut p = [0.0; 3];
        p[..dim].copy_from_slice(&c);
        nodes.push(p);
    }
    let mut elements = Vec::with_capacity(n_elements * (dim + 1));
    for _ in 0..n_elements {
        let (ln, l) = lines.next().ok_or_else(|| eof("elements"))?;
        let v: Vec<usize> = parse_tokens(l, ln, path)?;
        if v.len() != dim + 1 {
            return Err(Error::parse(
                path,
                ln,
                format!("expected {} vertex indices", dim + 1),
            ));
        }
        elements.extend(v);
    }
    let mut patches = Vec::with_capacity(n_patches);
    for _ in 0..n_patches {
        let (ln, l) = lines.next().ok_or_else(|| eof("patch header"))?;
        let tok: Vec<&str> = l.split_whitespace().collect();
        if tok.len() != 4 || tok[0] != "patch" {
            return Err(Error::parse(
                path,
                ln,
                "expected `patch <name> <kind> <n_faces>`",
            ));
        }
        let kind: PatchKind = tok[2]
            .parse()
            .map_err(|e: Error| Error::parse(path, ln, e.to_string()))?;
        let n_faces: usize = tok[3]
            .parse()
            .map_err(|_| Error::parse(path, ln, "bad face count"))?;
        let mut faces = Vec::with_capacity(n_faces);
        for _ in 0..n_faces {
            let (ln, l) = lines.next().ok_or_else(|| eof("patch faces"))?;
            let f: Vec<usize> = parse_tokens(l, ln, path)?;
            if f.len() != dim {
                return Err(Error::parse(
                    path,
                    ln,
                    format!("expected {dim} face vertices"),
                ));
            }
            faces.push(f);
        }
        patches.push(BoundaryPatch::new(tok[1], kind, faces));
    }
    if let Some((ln, _)) = lines.next() {
        return Err(Error::parse(path, ln, "trailing content after last patch"));
    }
    Mesh::new(dim, nodes, elements, patches)
}

pub fn write_native(mesh: &Mesh) -> String {
    let dim = mesh.dim();
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{} {} {} {}",
        dim,
        mesh.n_nodes(),
        mesh.n_elements(),
        mesh.patches().len()
    );
    for p in mesh.nodes() {
        let coords: Vec<String> = p[..dim].iter().map(|x| format!("{x:.17e}")).collect();
        let _ = writeln!(s, "{}", coords.join(" "));
    }
    for e in mesh.elements() {
        let v: Vec<String> = e.iter().map(|x| x.to_string()).collect();
        let _ = writeln!(s, "{}", v.join(" "));
    }
    for patch in mesh.patches() {
        let _ = writeln!(
            s,
            "patch {} {} {}",
            patch.name,
            patch.kind,
            patch.faces.len()
        );
        for f in &patch.faces {
            let v: Vec<String> = f.iter().map(|x| x.to_string()).collect();
            let _ = writeln!(s, "{}", v.join(" "));
        }
    }
    s
}

pub fn read_vtk(text: &str, path: &Path) -> Result<Mesh> {
    let mut toks = text
        .lines()
        .enumerate()
        .skip(2) // identification line and title
        .flat_map(|(i, l)| l.split_whitespace().map(move |t| (i + 1, t)))
        .peekable();

    let mut points: Vec<Point> = Vec::new();
    let mut cells: Vec<Vec<usize>> = Vec::new();
    let mut types: Vec<u32> = Vec::new();
    let mut cell_scalars: BTreeMap<String, Vec<i64>> = BTreeMap::new();
    let mut n_cell_data = 0usize;

    fn next<'a, I: Iterator<Item = (usize, &'a str)>>(
        it: &mut I,
        path: &Path,
    ) -> Result<(usize, &'a str)> {
        it.next()
            .ok_or_else(|| Error::parse(path, 0, "unexpected end of VTK file"))
    }
    fn num<'a, T: FromStr, I: Iterator<Item = (usize, &'a str)>>(
        it: &mut I,
        path: &Path,
    ) -> Result<T> {
        let (ln, t) = next(it, path)?;
        t.parse()
            .map_err(|_| Error::parse(path, ln, format!("expected a number, found '{t}'")))
    }

    while let Some((ln, tok)) = toks.next() {
        match tok.to_ascii_uppercase().as_str() {
            "ASCII" | "DATASET" | "UNSTRUCTURED_GRID" => {}
            "BINARY" => return Err(Error::parse(path, ln, "binary VTK is not supported")),
            "POINTS" => {
                let n: usize = num(&mut toks, path)?;
                next(&mut toks, path)?; // data type
                for _ in 0..n {
                    let x = num(&mut toks, path)?;
                    let y = num(&mut toks, path)?;
                    let z = num(&mut toks, path)?;
                    points.push([x, y, z]);
                }
            }
            "CELLS" => {
                let n: usize = num(&mut toks, path)?;
                let _size: usize = num(&mut toks, path)?;
                for _ in 0..n {
                    let k: usize = num(&mut toks, path)?;
                    let mut c = Vec::with_capacity(k);
                    for _ in 0..k {
                        c.push(num(&mut toks, path)?);
                    }
                    cells.push(c);
                }
            }
            "CELL_TYPES" => {
                let n: usize = num(&mut toks, path)?;
                for _ in 0..n {
                    types.push(num(&mut toks, path)?);
                }
            }
            "CELL_DATA" => n_cell_data = num(&mut toks, path)?,
            "SCALARS" => {
                let (_, name) = next(&mut toks, path)?;
                let name = name.to_string();
                next(&mut toks, path)?; // type
                                        // optional component count, then LOOKUP_TABLE <name>
                if let Some(&(_, t)) = toks.peek() {
                    if t.parse::<usize>().is_ok() {
                        toks.next();
                    }
                }
                let (ln, lt) = next(&mut toks, path)?;
                if !lt.eq_ignore_ascii_case("LOOKUP_TABLE") {
                    return Err(Error::parse(path, ln, "expected LOOKUP_TABLE"));
                }
                next(&mut toks, path)?;
                let mut vals = Vec::with_capacity(n_cell_data);
                for _ in 0..n_cell_data {
                    let v: f64 = num(&mut toks, path)?;
                    vals.push(v as i64);
                }
                cell_scalars.insert(name, vals);
            }
            _ => {}
        }
    }
    if types.len() != cells.len() {
        return Err(Error::parse(path, 0, "CELLS and CELL_TYPES disagree"));
    }
    let dim = if types.contains(&10) { 3 } else { 2 };
    let (vol_type, face_type) = if dim == 3 { (10, 5) } else { (5, 3) };
    let patch_ids = cell_scalars.get("patch");
    let kinds = cell_scalars.get("kind");
    let mut elements = Vec::new();
    let mut patch_faces: BTreeMap<i64, (PatchKind, Vec<Vec<usize>>)> = BTreeMap::new();
    for (i, (c, &t)) in cells.iter().zip(&types).enumerate() {
        if t == vol_type {
            elements.extend_from_slice(c);
        } else if t == face_type {
            let id = patch_ids.map_or(0, |p| p.get(i).copied().unwrap_or(0));
            let kind = match kinds.and_then(|k| k.get(i).copied()).unwrap_or(0) {
                1 => PatchKind::Dirichlet,
                2 => PatchKind::Neumann,
                _ => PatchKind::Wall,
            };
            patch_faces
                .entry(id)
                .or_insert_with(|| (kind, Vec::new()))
                .1
                .push(c.clone());
        }
    }
    let patches = patch_faces
        .into_iter()
        .map(|(id, (kind, faces))| BoundaryPatch::new(format!("patch{id}"), kind, faces))
        .collect();
    Mesh::new(dim, points, elements, patches)
}
