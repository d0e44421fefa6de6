//! Float triangle meshes and OFF / binary STL writers.

use std::collections::HashMap;
use std::io::{self, BufRead, Write};

use crate::voronoi::ConvexCell;

/// Contiguous vertex and triangle ranges belonging to one cell.
#[derive(Clone, Debug, PartialEq)]
pub struct MeshBlock {
    pub vertex_offset: usize,
    pub vertex_count: usize,
    pub triangle_offset: usize,
    pub triangle_count: usize,
    pub generator: [f64; 3],
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct FloatMesh {
    pub vertices: Vec<[f64; 3]>,
    /// Outward-oriented vertex index triples.
    pub triangles: Vec<[usize; 3]>,
    /// The untriangulated faces, counter-clockwise seen from outside.
    pub polygons: Vec<Vec<usize>>,
    pub blocks: Vec<MeshBlock>,
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

impl FloatMesh {
    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    /// Unit normal of a triangle, or zero for a degenerate one.
    pub fn triangle_normal(&self, t: usize) -> [f64; 3] {
        let [a, b, c] = self.triangles[t].map(|i| self.vertices[i]);
        let n = cross(sub(b, a), sub(c, a));
        let len = dot(n, n).sqrt();
        if len > 0.0 {
            n.map(|x| x / len)
        } else {
            [0.0; 3]
        }
    }

    /// Every triangle faces away from its cell's generator.
    pub fn is_outward(&self) -> bool {
        self.blocks.iter().all(|b| {
            (b.triangle_offset..b.triangle_offset + b.triangle_count).all(|t| {
                let [p, q, r] = self.triangles[t].map(|i| self.vertices[i]);
                let centroid = [0, 1, 2].map(|k| (p[k] + q[k] + r[k]) / 3.0);
                dot(cross(sub(q, p), sub(r, p)), sub(centroid, b.generator)) > 0.0
            })
        })
    }

    /// In every block, each directed edge is matched by exactly one reverse
    /// edge and appears only once.
    pub fn is_watertight(&self) -> bool {
        self.blocks.iter().all(|b| {
            let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
            for t in &self.triangles[b.triangle_offset..b.triangle_offset + b.triangle_count] {
                for k in 0..3 {
                    *directed.entry((t[k], t[(k + 1) % 3])).or_default() += 1;
                }
            }
            directed.iter().all(|(&(a, c), &n)| n == 1 && directed.get(&(c, a)) == Some(&1))
        })
    }
}

/// Round each cell's vertices to `f64` and fan-triangulate its faces.
pub fn to_float_mesh(cells: &[ConvexCell]) -> FloatMesh {
    let mut mesh = FloatMesh::default();
    for cell in cells {
        let vertex_offset = mesh.vertices.len();
        let triangle_offset = mesh.triangles.len();
        mesh.vertices.extend(cell.vertices().iter().map(|v| v.to_f64()));
        for face in cell.faces() {
            let c = &face.cycle;
            mesh.polygons.push(c.iter().map(|i| i + vertex_offset).collect());
            for w in c[1..].windows(2) {
                mesh.triangles.push([c[0], w[0], w[1]].map(|i| i + vertex_offset));
            }
        }
        mesh.blocks.push(MeshBlock {
            vertex_offset,
            vertex_count: cell.vertices().len(),
            triangle_offset,
            triangle_count: mesh.triangles.len() - triangle_offset,
            generator: cell.generator().pos.to_f64(),
        });
    }
    mesh
}

/// ASCII OFF with 17 significant digits per coordinate and one polygon per
/// cell face.
pub fn write_off<W: Write>(mesh: &FloatMesh, mut sink: W) -> io::Result<()> {
    writeln!(sink, "OFF")?;
    writeln!(sink, "{} {} 0", mesh.vertices.len(), mesh.polygons.len())?;
    for v in &mesh.vertices {
        writeln!(sink, "{:.16e} {:.16e} {:.16e}", v[0], v[1], v[2])?;
    }
    for poly in &mesh.polygons {
        write!(sink, "{}", poly.len())?;
        for i in poly {
            write!(sink, " {i}")?;
        }
        writeln!(sink)?;
    }
    sink.flush()
}

/// Size in bytes of a binary STL holding `triangles` facets.
pub fn stl_size(triangles: usize) -> usize {
    84 + 50 * triangles
}

/// Little-endian binary STL.
pub fn write_stl<W: Write>(mesh: &FloatMesh, mut sink: W) -> io::Result<()> {
    sink.write_all(&[0u8; 80])?;
    let count = u32::try_from(mesh.triangles.len())
        .map_err(|_| io::Error::new(io::ErrorKind::InvalidInput, "too many triangles for STL"))?;
    sink.write_all(&count.to_le_bytes())?;
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let normal = mesh.triangle_normal(t);
        for x in normal {
            sink.write_all(&(x as f32).to_le_bytes())?;
        }
        for &i in tri {
            for x in mesh.vertices[i] {
                sink.write_all(&(x as f32).to_le_bytes())?;
            }
        }
        sink.write_all(&0u16.to_le_bytes())?;
    }
    sink.flush()
}

fn bad(msg: impl Into<String>) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg.into())
}

/// Vertices and polygon index lists of an OFF file.
pub type OffContents = (Vec<[f64; 3]>, Vec<Vec<usize>>);

/// Read an ASCII OFF file.
pub fn read_off<R: BufRead>(source: R) -> io::Result<OffContents> {
    let mut lines = source
        .lines()
        .map(|l| l.map(|s| s.split('#').next().unwrap_or("").trim().to_string()))
        .filter(|l| !matches!(l, Ok(s) if s.is_empty()));
    let header = lines.next().ok_or_else(|| bad("empty OFF file"))??;
    if header != "OFF" {
        return Err(bad(format!("expected OFF header, got {header:?}")));
    }
    let counts = lines.next().ok_or_else(|| bad("missing counts line"))??;
    let counts: Vec<usize> = counts
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| bad(format!("bad count {t:?}"))))
        .collect::<io::Result<_>>()?;
    if counts.len() < 2 {
        return Err(bad("counts line needs vertex and face counts"));
    }
    let mut vertices = Vec::with_capacity(counts[0]);
    for _ in 0..counts[0] {
        let line = lines.next().ok_or_else(|| bad("truncated vertex list"))??;
        let xs: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| bad(format!("bad coordinate {t:?}"))))
            .collect::<io::Result<_>>()?;
        if xs.len() != 3 {
            return Err(bad("vertex needs three coordinates"));
        }
        vertices.push([xs[0], xs[1], xs[2]]);
    }
    let mut faces = Vec::with_capacity(counts[1]);
    for _ in 0..counts[1] {
        let line = lines.next().ok_or_else(|| bad("truncated face list"))??;
        let ids: Vec<usize> = line
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| bad(format!("bad index {t:?}"))))
            .collect::<io::Result<_>>()?;
        match ids.split_first() {
            Some((&k, rest)) if rest.len() == k && rest.iter().all(|&i| i < vertices.len()) => {
                faces.push(rest.to_vec())
            }
            _ => return Err(bad(format!("malformed face {line:?}"))),
        }
    }
    Ok((vertices, faces))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::{Rat, Vec3R};
    use crate::lattice::{Site, SiteClass};

    fn cube() -> ConvexCell {
        ConvexCell::seed_cube(Site::new(Vec3R::zero(), SiteClass::Gamma), &Rat::new(1, 2))
    }

    #[test]
    fn empty_mesh() {
        let m = to_float_mesh(&[]);
        assert!(m.is_empty() && m.vertices.is_empty());
        let mut buf = Vec::new();
        write_stl(&m, &mut buf).unwrap();
        assert_eq!(buf.len(), 84);
        assert!(buf.iter().all(|&b| b == 0));
    }

    #[test]
    fn cube_off_counts() {
        let m = to_float_mesh(&[cube()]);
        assert_eq!(m.triangles.len(), 12);
        assert!(m.is_watertight() && m.is_outward());
        let mut buf = Vec::new();
        write_off(&m, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("OFF"));
        assert_eq!(lines.next(), Some("8 6 0"));
        assert_eq!(lines.next(), Some("-5.0000000000000000e-1 -5.0000000000000000e-1 -5.0000000000000000e-1"));
        assert!(text.lines().skip(10).all(|l| l.starts_with("4 ")));
    }

    #[test]
    fn stl_layout() {
        let m = to_float_mesh(&[cube()]);
        let mut buf = Vec::new();
        write_stl(&m, &mut buf).unwrap();
        assert_eq!(buf.len(), stl_size(12));
        assert_eq!(u32::from_le_bytes(buf[80..84].try_into().unwrap()), 12);
        // First facet: normal is a unit axis vector, attribute is zero.
        let f: Vec<f32> = (0..12)
            .map(|k| f32::from_le_bytes(buf[84 + 4 * k..88 + 4 * k].try_into().unwrap()))
            .collect();
        let n2: f32 = f[..3].iter().map(|x| x * x).sum();
        assert_eq!(n2, 1.0);
        assert_eq!(&buf[132..134], &[0, 0]);
    }

    #[test]
    fn off_rejects_garbage() {
        assert!(read_off("PLY\n".as_bytes()).is_err());
        assert!(read_off("OFF\n1 1 0\n0 0 0\n3 0 1 2\n".as_bytes()).is_err());
        assert!(read_off("OFF\n2 0 0\n0 0 0\n".as_bytes()).is_err());
    }

    #[test]
    fn broken_mesh_is_not_watertight() {
        let mut m = to_float_mesh(&[cube()]);
        m.triangles.pop();
        m.blocks[0].triangle_count -= 1;
        assert!(!m.is_watertight());
    }
}
