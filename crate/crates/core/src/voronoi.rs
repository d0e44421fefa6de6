//! Exact Voronoi cells by incremental half-space clipping.
//!
//! A cell starts as a cube around its generator and is cut by the
//! perpendicular bisector of every candidate neighbor. All predicates are
//! exact, so vertices where four or more bisectors meet (common in these
//! lattices) come out as single vertices without any tolerance handling.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exactnum::{triple_product, Rat, Vec3R};
use crate::lattice::{candidate_neighbors, RefinementPlan, Site, SiteClass};

/// Closed half-space `normal · x <= offset`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HalfSpace {
    pub normal: Vec3R,
    pub offset: Rat,
}

impl HalfSpace {
    pub fn new(normal: Vec3R, offset: Rat) -> Self {
        assert!(!normal.is_zero(), "half-space normal must be nonzero");
        HalfSpace { normal, offset }
    }

    /// `normal · p - offset`: negative inside, zero on the plane.
    pub fn eval(&self, p: &Vec3R) -> Rat {
        self.normal.dot(p) - &self.offset
    }

    pub fn contains(&self, p: &Vec3R) -> bool {
        !self.eval(p).is_positive()
    }
}

/// Half-space of points at least as close to `p` as to `q`.
pub fn bisector(p: &Vec3R, q: &Vec3R) -> Result<HalfSpace> {
    if p == q {
        return Err(Error::CoincidentPoints);
    }
    let normal = q - p;
    let offset = normal.dot(&(p + q)) * Rat::new(1, 2);
    Ok(HalfSpace { normal, offset })
}

/// What created a face of a cell.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum FaceSource {
    /// One of the six faces of the seed cube.
    Seed,
    /// Bisector towards this neighboring site.
    Neighbor(Site),
    /// Caller-supplied half-space.
    Plane,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Face {
    /// Vertex indices, counter-clockwise seen from outside.
    pub cycle: Vec<usize>,
    pub plane: HalfSpace,
    pub source: FaceSource,
}

/// A bounded convex polytope around a generator site.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConvexCell {
    vertices: Vec<Vec3R>,
    faces: Vec<Face>,
    generator: Site,
}

/// Result of one clipping step.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClipOutcome {
    Unchanged,
    Cut,
}

/// Vertex, edge and face counts plus the number of faces per polygon size.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FVector {
    pub vertices: usize,
    pub edges: usize,
    pub faces: usize,
    /// edges-per-face -> number of such faces
    pub face_sizes: BTreeMap<usize, usize>,
}

impl FVector {
    pub fn euler_characteristic(&self) -> i64 {
        self.vertices as i64 - self.edges as i64 + self.faces as i64
    }

    pub fn faces_with(&self, sides: usize) -> usize {
        self.face_sizes.get(&sides).copied().unwrap_or(0)
    }
}

impl fmt::Display for FVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "V={} E={} F={} (", self.vertices, self.edges, self.faces)?;
        let parts: Vec<String> =
            self.face_sizes.iter().map(|(k, n)| format!("{n}x{k}-gon")).collect();
        write!(f, "{})", parts.join(", "))
    }
}

/// Order coplanar points counter-clockwise around `normal`.
///
/// The points must be the corners of a convex polygon. Sorting happens in the
/// projection that drops the dominant normal axis, using only orientation
/// predicates.
fn order_polygon(points: &[Vec3R], normal: &Vec3R) -> Vec<usize> {
    let n = points.len();
    let drop = (0..3)
        .max_by(|&a, &b| normal[a].abs().cmp(&normal[b].abs()).then(b.cmp(&a)))
        .unwrap();
    let (iu, iv) = match drop {
        0 => (1, 2),
        1 => (2, 0),
        _ => (0, 1),
    };
    let count = Rat::from_int(n as i64);
    let cu: Rat = points.iter().map(|p| &p[iu]).sum::<Rat>() / &count;
    let cv: Rat = points.iter().map(|p| &p[iv]).sum::<Rat>() / &count;
    let rel: Vec<(Rat, Rat)> = points.iter().map(|p| (&p[iu] - &cu, &p[iv] - &cv)).collect();
    let upper = |(u, v): &(Rat, Rat)| v.is_positive() || (v.is_zero() && u.is_positive());
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| {
        let (ha, hb) = (upper(&rel[a]), upper(&rel[b]));
        if ha != hb {
            return if ha { Ordering::Less } else { Ordering::Greater };
        }
        let cross = &rel[a].0 * &rel[b].1 - &rel[a].1 * &rel[b].0;
        // a before b when b is counter-clockwise of a
        0.cmp(&cross.signum())
    });
    if n >= 3 {
        let e1 = &points[idx[1]] - &points[idx[0]];
        let e2 = &points[idx[2]] - &points[idx[0]];
        if e1.cross(&e2).dot(normal).is_negative() {
            idx.reverse();
        }
    }
    idx
}

impl ConvexCell {
    /// Axis-aligned cube of the given half-width centered on the generator.
    pub fn seed_cube(generator: Site, half_width: &Rat) -> Self {
        let c = &generator.pos;
        let corner = |bits: usize| {
            let pick = |axis: usize| {
                if bits >> axis & 1 == 1 {
                    &c[axis] + half_width
                } else {
                    &c[axis] - half_width
                }
            };
            Vec3R::new(pick(0), pick(1), pick(2))
        };
        let vertices: Vec<Vec3R> = (0..8).map(corner).collect();
        let mut faces = Vec::with_capacity(6);
        for axis in 0..3 {
            for hi in [false, true] {
                let members: Vec<usize> =
                    (0..8).filter(|b| (b >> axis & 1 == 1) == hi).collect();
                let mut normal = [Rat::zero(), Rat::zero(), Rat::zero()];
                normal[axis] = Rat::from_int(if hi { 1 } else { -1 });
                let normal = Vec3R::from_array(normal);
                let offset = normal.dot(&vertices[members[0]]);
                let pts: Vec<Vec3R> = members.iter().map(|&i| vertices[i].clone()).collect();
                let cycle = order_polygon(&pts, &normal).into_iter().map(|k| members[k]).collect();
                faces.push(Face {
                    cycle,
                    plane: HalfSpace::new(normal, offset),
                    source: FaceSource::Seed,
                });
            }
        }
        ConvexCell { vertices, faces, generator }
    }

    pub fn vertices(&self) -> &[Vec3R] {
        &self.vertices
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn generator(&self) -> &Site {
        &self.generator
    }

    pub fn face_points(&self, face: &Face) -> Vec<&Vec3R> {
        face.cycle.iter().map(|&i| &self.vertices[i]).collect()
    }

    /// Largest squared distance from the generator to a vertex.
    pub fn max_vertex_r2(&self) -> Rat {
        self.vertices
            .iter()
            .map(|v| v.dist2(&self.generator.pos))
            .max()
            .unwrap_or_else(Rat::zero)
    }

    pub fn contains(&self, p: &Vec3R) -> bool {
        self.faces.iter().all(|f| f.plane.contains(p))
    }

    /// Intersect with `h`, recording `source` on the new face.
    pub fn clip_tagged(&mut self, h: &HalfSpace, source: FaceSource) -> Result<ClipOutcome> {
        let side: Vec<Rat> = self.vertices.iter().map(|v| h.eval(v)).collect();
        if !side.iter().any(Rat::is_positive) {
            return Ok(ClipOutcome::Unchanged);
        }
        if !side.iter().any(Rat::is_negative) {
            return Err(Error::EmptyResult);
        }

        let mut vertices: Vec<Vec3R> = Vec::with_capacity(self.vertices.len() + 4);
        let mut remap: Vec<Option<usize>> = vec![None; self.vertices.len()];
        let mut on_plane: BTreeSet<usize> = BTreeSet::new();
        for (i, v) in self.vertices.iter().enumerate() {
            if !side[i].is_positive() {
                remap[i] = Some(vertices.len());
                if side[i].is_zero() {
                    on_plane.insert(vertices.len());
                }
                vertices.push(v.clone());
            }
        }

        let mut crossings: HashMap<(usize, usize), usize> = HashMap::new();
        let mut faces = Vec::with_capacity(self.faces.len() + 1);
        for face in &self.faces {
            let k = face.cycle.len();
            let mut cycle = Vec::with_capacity(k + 1);
            for j in 0..k {
                let a = face.cycle[j];
                let b = face.cycle[(j + 1) % k];
                if let Some(ia) = remap[a] {
                    cycle.push(ia);
                }
                let (sa, sb) = (&side[a], &side[b]);
                let crosses = (sa.is_negative() && sb.is_positive())
                    || (sa.is_positive() && sb.is_negative());
                if crosses {
                    let key = (a.min(b), a.max(b));
                    let idx = *crossings.entry(key).or_insert_with(|| {
                        let t = sa / &(sa - sb);
                        let pa = &self.vertices[a];
                        let p = pa + &(&self.vertices[b] - pa).scale(&t);
                        vertices.push(p);
                        on_plane.insert(vertices.len() - 1);
                        vertices.len() - 1
                    });
                    cycle.push(idx);
                }
            }
            let touches_only = cycle.iter().all(|i| on_plane.contains(i));
            if cycle.len() >= 3 && !touches_only {
                faces.push(Face { cycle, plane: face.plane.clone(), source: face.source.clone() });
            }
        }

        let cap: Vec<usize> = on_plane.into_iter().collect();
        if cap.len() >= 3 {
            let pts: Vec<Vec3R> = cap.iter().map(|&i| vertices[i].clone()).collect();
            let cycle = order_polygon(&pts, &h.normal).into_iter().map(|k| cap[k]).collect();
            faces.push(Face { cycle, plane: h.clone(), source });
        }

        // Drop vertices no face refers to any more.
        let mut used = vec![false; vertices.len()];
        for f in &faces {
            for &i in &f.cycle {
                used[i] = true;
            }
        }
        let mut compact = vec![usize::MAX; vertices.len()];
        let mut kept = Vec::with_capacity(vertices.len());
        for (i, v) in vertices.into_iter().enumerate() {
            if used[i] {
                compact[i] = kept.len();
                kept.push(v);
            }
        }
        for f in &mut faces {
            for i in &mut f.cycle {
                *i = compact[*i];
            }
        }
        self.vertices = kept;
        self.faces = faces;
        Ok(ClipOutcome::Cut)
    }

    /// Intersect with the half-space `h`.
    pub fn clip(&self, h: &HalfSpace) -> Result<ConvexCell> {
        let mut out = self.clone();
        out.clip_tagged(h, FaceSource::Plane)?;
        Ok(out)
    }

    /// Clip by the bisector between the generator and `other`.
    pub fn clip_by_site(&mut self, other: &Site) -> Result<ClipOutcome> {
        let h = bisector(&self.generator.pos, &other.pos)?;
        self.clip_tagged(&h, FaceSource::Neighbor(other.clone()))
    }

    /// Exact volume by the divergence theorem: each face is fanned from its
    /// first vertex and every triangle contributes a sixth of the triple
    /// product of its corner position vectors.
    pub fn volume(&self) -> Rat {
        let six = Rat::from_int(6);
        let mut total = Rat::zero();
        for f in &self.faces {
            let v0 = &self.vertices[f.cycle[0]];
            for w in f.cycle[1..].windows(2) {
                total += triple_product(v0, &self.vertices[w[0]], &self.vertices[w[1]]);
            }
        }
        total / six
    }

    /// Undirected edges as sorted index pairs.
    pub fn edges(&self) -> BTreeSet<(usize, usize)> {
        let mut edges = BTreeSet::new();
        for f in &self.faces {
            let k = f.cycle.len();
            for j in 0..k {
                let (a, b) = (f.cycle[j], f.cycle[(j + 1) % k]);
                edges.insert((a.min(b), a.max(b)));
            }
        }
        edges
    }

    pub fn face_census(&self) -> FVector {
        let mut face_sizes = BTreeMap::new();
        for f in &self.faces {
            *face_sizes.entry(f.cycle.len()).or_insert(0) += 1;
        }
        FVector {
            vertices: self.vertices.len(),
            edges: self.edges().len(),
            faces: self.faces.len(),
            face_sizes,
        }
    }

    /// Check every structural invariant of a valid cell, including that the
    /// generator lies strictly inside.
    pub fn validate(&self) -> std::result::Result<(), String> {
        self.validate_polytope()?;
        for (fi, f) in self.faces.iter().enumerate() {
            if !f.plane.eval(&self.generator.pos).is_negative() {
                return Err(format!("generator is not strictly inside face {fi}"));
            }
        }
        Ok(())
    }

    /// Convexity, planarity, orientation, two-manifold edges and Euler's
    /// relation.
    pub fn validate_polytope(&self) -> std::result::Result<(), String> {
        for (fi, f) in self.faces.iter().enumerate() {
            if f.cycle.len() < 3 {
                return Err(format!("face {fi} has {} vertices", f.cycle.len()));
            }
            for &i in &f.cycle {
                if !f.plane.eval(&self.vertices[i]).is_zero() {
                    return Err(format!("vertex {i} is off the plane of face {fi}"));
                }
            }
            let k = f.cycle.len();
            for j in 0..k {
                let a = &self.vertices[f.cycle[j]];
                let b = &self.vertices[f.cycle[(j + 1) % k]];
                let c = &self.vertices[f.cycle[(j + 2) % k]];
                let turn = (b - a).cross(&(c - b)).dot(&f.plane.normal);
                if !turn.is_positive() {
                    return Err(format!("face {fi} is not strictly convex and outward"));
                }
            }
            for (vi, v) in self.vertices.iter().enumerate() {
                if !f.plane.contains(v) {
                    return Err(format!("vertex {vi} violates face {fi}"));
                }
            }
        }
        let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
        for f in &self.faces {
            let k = f.cycle.len();
            for j in 0..k {
                *directed.entry((f.cycle[j], f.cycle[(j + 1) % k])).or_default() += 1;
            }
        }
        for (&(a, b), &n) in &directed {
            if n != 1 || directed.get(&(b, a)) != Some(&1) {
                return Err(format!("edge {a}-{b} is not shared by exactly two faces"));
            }
        }
        let fv = self.face_census();
        if fv.euler_characteristic() != 2 {
            return Err(format!("Euler characteristic {} != 2", fv.euler_characteristic()));
        }
        Ok(())
    }

    /// Vertices and faces as coordinates, independent of vertex numbering and
    /// face order. Two cells are the same polytope iff their keys are equal.
    pub fn geometry_key(&self) -> (Vec<Vec3R>, Vec<Vec<Vec3R>>) {
        let mut verts = self.vertices.clone();
        verts.sort();
        let mut faces: Vec<Vec<Vec3R>> = self
            .faces
            .iter()
            .map(|f| {
                let pts: Vec<Vec3R> = f.cycle.iter().map(|&i| self.vertices[i].clone()).collect();
                let start = (0..pts.len()).min_by(|&a, &b| pts[a].cmp(&pts[b])).unwrap();
                pts[start..].iter().chain(&pts[..start]).cloned().collect()
            })
            .collect();
        faces.sort();
        (verts, faces)
    }

    /// Vertices relative to the generator, brought to a canonical orientation
    /// by the lexicographically smallest image under the 48 cube symmetries.
    pub fn canonical_shape(&self) -> Vec<Vec3R> {
        let rel: Vec<Vec3R> = self.vertices.iter().map(|v| v - &self.generator.pos).collect();
        cube_symmetries()
            .map(|(perm, signs)| {
                let mut img: Vec<Vec3R> =
                    rel.iter().map(|v| v.signed_permute(perm, signs)).collect();
                img.sort();
                img
            })
            .min()
            .unwrap()
    }

    /// Same shape up to translation and a cube symmetry.
    pub fn congruent_to(&self, other: &ConvexCell) -> bool {
        self.vertices.len() == other.vertices.len()
            && self.canonical_shape() == other.canonical_shape()
    }

    pub fn cell_metrics(&self) -> CellMetrics {
        let mut vertices = self.vertices.clone();
        vertices.sort();
        let faces = self
            .faces
            .iter()
            .map(|f| {
                let k = f.cycle.len();
                let pts: Vec<&Vec3R> = f.cycle.iter().map(|&i| &self.vertices[i]).collect();
                let mut edge_r2: Vec<Rat> =
                    (0..k).map(|j| pts[j].dist2(pts[(j + 1) % k])).collect();
                edge_r2.sort();
                let edge_lengths = edge_r2.iter().map(|r| r.to_f64().sqrt()).collect();
                let angles_deg = (0..k)
                    .map(|j| {
                        let prev = pts[(j + k - 1) % k];
                        let next = pts[(j + 1) % k];
                        let a = (prev - pts[j]).to_f64();
                        let b = (next - pts[j]).to_f64();
                        let dot: f64 = (0..3).map(|i| a[i] * b[i]).sum();
                        let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
                        let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
                        (dot / (na * nb)).clamp(-1.0, 1.0).acos().to_degrees()
                    })
                    .collect();
                FaceMetrics {
                    sides: k,
                    neighbor: match &f.source {
                        FaceSource::Neighbor(s) => Some(s.cls),
                        _ => None,
                    },
                    edge_r2,
                    edge_lengths,
                    angles_deg,
                }
            })
            .collect();
        let mut edge_r2: Vec<Rat> =
            self.edges().iter().map(|&(a, b)| self.vertices[a].dist2(&self.vertices[b])).collect();
        edge_r2.sort();
        let mut edge_census: BTreeMap<Rat, usize> = BTreeMap::new();
        for r in edge_r2 {
            *edge_census.entry(r).or_default() += 1;
        }
        CellMetrics { vertices, faces, edge_census }
    }
}

/// The 48 signed axis permutations of the cube group.
pub fn cube_symmetries() -> impl Iterator<Item = ([usize; 3], [i8; 3])> {
    const PERMS: [[usize; 3]; 6] =
        [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    PERMS.into_iter().flat_map(|p| {
        (0..8).map(move |bits: u8| {
            let s = |i: u8| if bits >> i & 1 == 1 { -1 } else { 1 };
            (p, [s(0), s(1), s(2)])
        })
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct FaceMetrics {
    pub sides: usize,
    /// Class of the site across this face.
    pub neighbor: Option<SiteClass>,
    /// Squared edge lengths, ascending.
    pub edge_r2: Vec<Rat>,
    pub edge_lengths: Vec<f64>,
    /// Interior corner angles in cycle order.
    pub angles_deg: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CellMetrics {
    /// Lexicographically sorted vertex coordinates.
    pub vertices: Vec<Vec3R>,
    pub faces: Vec<FaceMetrics>,
    /// squared edge length -> number of edges
    pub edge_census: BTreeMap<Rat, usize>,
}

/// Settings for [`voronoi_cell`] style construction.
#[derive(Clone, Debug)]
pub struct CellBuilder {
    /// Squared cutoff radius for candidate neighbors.
    pub cutoff_r2: Rat,
    /// Half-width of the seed cube.
    pub seed_half_width: Rat,
    /// Skip bisectors that provably cannot touch the current cell.
    pub prune: bool,
}

impl Default for CellBuilder {
    fn default() -> Self {
        CellBuilder { cutoff_r2: Rat::from_int(4), seed_half_width: Rat::one(), prune: true }
    }
}

impl CellBuilder {
    /// Clip the seed cube by the bisector towards each site, in the given order.
    pub fn clip_all<'a>(
        &self,
        s: &Site,
        neighbors: impl IntoIterator<Item = &'a Site>,
    ) -> Result<ConvexCell> {
        let mut cell = ConvexCell::seed_cube(s.clone(), &self.seed_half_width);
        let mut reach = cell.max_vertex_r2();
        let four = Rat::from_int(4);
        for t in neighbors {
            if self.prune && t.pos.dist2(&s.pos) >= &reach * &four {
                continue;
            }
            if cell.clip_by_site(t)? == ClipOutcome::Cut {
                reach = cell.max_vertex_r2();
            }
        }
        Ok(cell)
    }

    pub fn build(&self, s: &Site, plan: &RefinementPlan) -> Result<ConvexCell> {
        check_site(s, plan)?;
        let neighbors = candidate_neighbors(s, plan, &self.cutoff_r2);
        self.clip_all(s, &neighbors)
    }
}

fn check_site(s: &Site, plan: &RefinementPlan) -> Result<()> {
    plan.require(s.cls)?;
    let floor = Vec3R::new(
        Rat::from_big(s.pos.x.floor(), 1.into()),
        Rat::from_big(s.pos.y.floor(), 1.into()),
        Rat::from_big(s.pos.z.floor(), 1.into()),
    );
    let local = &s.pos - &floor;
    if plan.cell_offsets().iter().any(|(p, c)| *c == s.cls && *p == local) {
        Ok(())
    } else {
        Err(Error::ClassNotInPlan(s.cls, format!("{plan} (no such site at {})", s.pos)))
    }
}

/// Exact Voronoi cell of `s` among the sites of `plan`.
pub fn voronoi_cell(s: &Site, plan: &RefinementPlan) -> Result<ConvexCell> {
    CellBuilder::default().build(s, plan)
}

/// Voronoi cell of the representative site of `cls`.
pub fn representative_cell(cls: SiteClass, plan: &RefinementPlan) -> Result<ConvexCell> {
    voronoi_cell(&Site::new(cls.representative(), cls), plan)
}
