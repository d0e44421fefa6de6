use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use super::{montecarlo_volumes, verify_max_free_point, volume_table};
use crate::error::Result;
use crate::exactnum::{solve3, Mat3R, Rat, Vec3R};
use crate::lattice::{nearest_gap, self_similarity_check, shell_histogram, BoxR, RefinementPlan, SiteClass};
use crate::planar::{k_point_gaps, refine_square, refine_triangular};
use crate::voronoi::{bisector, representative_cell, ConvexCell};

pub const REPORT_SCHEMA: &str = "latrefine.report/1";

#[derive(Clone, Debug)]
pub struct VolumeGolden {
    pub id: &'static str,
    pub plan: RefinementPlan,
    pub class: SiteClass,
    pub volume: Rat,
}

#[derive(Clone, Debug)]
pub struct TableGolden {
    pub id: &'static str,
    pub plan: RefinementPlan,
    pub class: SiteClass,
    pub max_r2: Rat,
    pub shells: Vec<(Rat, usize)>,
}

#[derive(Clone, Debug)]
pub struct CensusGolden {
    pub id: &'static str,
    pub plan: RefinementPlan,
    pub class: SiteClass,
    /// (sides, number of faces)
    pub faces: Vec<(usize, usize)>,
    pub vertices: usize,
    pub edges: usize,
}

#[derive(Clone, Debug)]
pub struct GapGolden {
    pub id: &'static str,
    pub plan: RefinementPlan,
    pub class: SiteClass,
    pub r2: Rat,
}

/// Expected values for every check of [`reproduce_paper`].
#[derive(Clone, Debug)]
pub struct Goldens {
    pub volumes: Vec<VolumeGolden>,
    pub tables: Vec<TableGolden>,
    pub censuses: Vec<CensusGolden>,
    pub gaps: Vec<GapGolden>,
    /// (plan whose gaps are scanned, squared max-min distance, a point attaining it)
    pub max_free: Vec<(RefinementPlan, Rat, Vec3R)>,
    pub tetrakis_cube_edge: Rat,
    pub tetrakis_apex: Rat,
    pub tetrakis_pyramid_height: Rat,
    pub tetrakis_apex_edge_r2: Rat,
    pub tetrakis_base_angle_deg: f64,
    /// Squared edge lengths of each hexagon of the level-2 W cell, ascending.
    pub w_hexagon_edge_r2: Vec<Rat>,
    pub lambda_hexagon_vertex: Vec3R,
    pub lambda_vertices: Vec<Vec3R>,
    pub square_scale_sq: Rat,
    pub triangular_scale_sq: Rat,
}

fn r(n: i64, d: i64) -> Rat {
    Rat::new(n, d)
}

fn shells(rows: &[(i64, i64, usize)]) -> Vec<(Rat, usize)> {
    rows.iter().map(|&(n, d, c)| (r(n, d), c)).collect()
}

impl Default for Goldens {
    fn default() -> Self {
        use SiteClass::*;
        let (sc, bcc, bw, bx, l3) = (
            RefinementPlan::sc(),
            RefinementPlan::bcc(),
            RefinementPlan::bcc_w(),
            RefinementPlan::bcc_x(),
            RefinementPlan::bcc_w_lambda(),
        );
        let vol = |id, plan: &RefinementPlan, class, volume| VolumeGolden {
            id,
            plan: plan.clone(),
            class,
            volume,
        };
        let census = |id, plan: &RefinementPlan, class, faces: &[(usize, usize)], vertices, edges| {
            CensusGolden { id, plan: plan.clone(), class, faces: faces.to_vec(), vertices, edges }
        };
        let mut lambda_vertices = vec![
            Vec3R::frac(5, 0, 0, 16),
            Vec3R::frac(0, 5, 0, 16),
            Vec3R::frac(0, 0, 5, 16),
            Vec3R::frac(35, 0, 35, 128),
            Vec3R::frac(35, 35, 0, 128),
            Vec3R::frac(0, 35, 35, 128),
        ];
        for (a, b, c) in [(95, 26, 95), (95, 95, 26), (26, 95, 95), (118, 49, 49), (49, 118, 49), (49, 49, 118)] {
            lambda_vertices.push(Vec3R::frac(a, b, c, 288));
        }
        lambda_vertices.sort();
        Goldens {
            volumes: vec![
                vol("volume.L0.GAMMA", &sc, Gamma, Rat::one()),
                vol("volume.L1.GAMMA", &bcc, Gamma, r(1, 2)),
                vol("volume.L1.BODY", &bcc, Body, r(1, 2)),
                vol("volume.L2W.GAMMA", &bw, Gamma, r(125, 1152)),
                vol("volume.L2W.W", &bw, W, r(451, 6912)),
                vol("volume.L2X.X", &bx, X, r(1, 8)),
                vol("volume.L3.GAMMA", &l3, Gamma, r(125, 3072)),
                vol("volume.L3.LAMBDA", &l3, Lambda, r(26291, 884736)),
                vol("volume.L3.W", &l3, W, r(24505, 663552)),
            ],
            tables: vec![
                TableGolden {
                    id: "shells.L0.GAMMA",
                    plan: sc.clone(),
                    class: Gamma,
                    max_r2: r(6, 1),
                    shells: shells(&[(1, 1, 6), (2, 1, 12), (3, 1, 8), (4, 1, 6), (5, 1, 24), (6, 1, 24)]),
                },
                TableGolden {
                    id: "shells.L1.GAMMA",
                    plan: bcc.clone(),
                    class: Gamma,
                    max_r2: r(6, 1),
                    shells: shells(&[
                        (3, 4, 8),
                        (1, 1, 6),
                        (2, 1, 12),
                        (11, 4, 24),
                        (3, 1, 8),
                        (4, 1, 6),
                        (19, 4, 24),
                        (5, 1, 24),
                        (6, 1, 24),
                    ]),
                },
                TableGolden {
                    id: "shells.L2W.GAMMA",
                    plan: bw.clone(),
                    class: Gamma,
                    max_r2: r(29, 16),
                    shells: shells(&[
                        (5, 16, 24),
                        (3, 4, 8),
                        (13, 16, 24),
                        (1, 1, 6),
                        (21, 16, 48),
                        (29, 16, 72),
                    ]),
                },
                TableGolden {
                    id: "shells.L2W.W",
                    plan: bw.clone(),
                    class: W,
                    max_r2: r(3, 4),
                    shells: shells(&[
                        (1, 8, 4),
                        (1, 4, 2),
                        (5, 16, 4),
                        (3, 8, 8),
                        (1, 2, 4),
                        (5, 8, 8),
                        (3, 4, 8),
                    ]),
                },
            ],
            censuses: vec![
                census("census.L1.GAMMA", &bcc, Gamma, &[(4, 6), (6, 8)], 24, 36),
                census("census.L2W.GAMMA", &bw, Gamma, &[(3, 24)], 14, 36),
                census("census.L2W.W", &bw, W, &[(3, 4), (6, 4)], 12, 18),
                census("census.L3.GAMMA", &l3, Gamma, &[(3, 8)], 6, 12),
                census("census.L3.LAMBDA", &l3, Lambda, &[(3, 4), (4, 6), (6, 1)], 12, 21),
                census("census.L3.W", &l3, W, &[(4, 8), (5, 4)], 16, 26),
            ],
            gaps: vec![
                GapGolden { id: "gap.W", plan: bw.clone(), class: W, r2: r(5, 16) },
                GapGolden { id: "gap.LAMBDA", plan: l3.clone(), class: Lambda, r2: r(25, 192) },
                GapGolden { id: "gap.X", plan: bx.clone(), class: X, r2: r(1, 4) },
            ],
            max_free: vec![
                (sc, r(3, 4), Vec3R::frac(1, 1, 1, 2)),
                (bcc, r(5, 16), Vec3R::frac(0, 1, 2, 4)),
                (bw, r(25, 192), Vec3R::frac(5, 5, 5, 24)),
            ],
            tetrakis_cube_edge: r(5, 12),
            tetrakis_apex: r(5, 16),
            tetrakis_pyramid_height: r(5, 48),
            tetrakis_apex_edge_r2: r(25, 256),
            tetrakis_base_angle_deg: 48.189685,
            w_hexagon_edge_r2: vec![r(1, 48), r(1, 48), r(25, 256), r(25, 256), r(9, 64), r(25, 144)],
            lambda_hexagon_vertex: Vec3R::new(r(95, 288), r(13, 144), r(95, 288)),
            lambda_vertices,
            square_scale_sq: r(1, 2),
            triangular_scale_sq: r(1, 3),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ReproduceOptions {
    /// Monte-Carlo samples per plan; 0 skips the Monte-Carlo checks.
    pub mc_samples: u64,
    pub seed: u64,
    pub grid_n: u32,
    pub goldens: Goldens,
}

impl Default for ReproduceOptions {
    fn default() -> Self {
        ReproduceOptions { mc_samples: 0, seed: 1, grid_n: 48, goldens: Goldens::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckEntry {
    pub id: String,
    pub expected: String,
    pub computed: String,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub all_pass: bool,
    pub passed: usize,
    pub total: usize,
    pub entries: Vec<CheckEntry>,
}

impl Report {
    pub fn failures(&self) -> impl Iterator<Item = &CheckEntry> {
        self.entries.iter().filter(|e| !e.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.entries {
            let tag = if e.pass { "PASS" } else { "FAIL" };
            writeln!(f, "{tag} {}: expected {}; computed {}", e.id, e.expected, e.computed)?;
        }
        writeln!(f, "{}/{} checks passed", self.passed, self.total)
    }
}

struct Checker {
    entries: Vec<CheckEntry>,
    cells: BTreeMap<(String, SiteClass), ConvexCell>,
}

impl Checker {
    fn push(&mut self, id: impl Into<String>, expected: impl fmt::Display, computed: impl fmt::Display, pass: bool) {
        self.entries.push(CheckEntry {
            id: id.into(),
            expected: expected.to_string(),
            computed: computed.to_string(),
            pass,
        });
    }

    fn exact<T: fmt::Display + PartialEq>(&mut self, id: impl Into<String>, expected: T, computed: T) {
        let pass = expected == computed;
        self.push(id, expected, computed, pass);
    }

    fn cell(&mut self, plan: &RefinementPlan, cls: SiteClass) -> Result<&ConvexCell> {
        let key = (plan.to_string(), cls);
        if !self.cells.contains_key(&key) {
            let c = representative_cell(cls, plan)?;
            self.cells.insert(key.clone(), c);
        }
        Ok(&self.cells[&key])
    }
}

fn fmt_shells(s: &[(Rat, usize)]) -> String {
    s.iter().map(|(r2, n)| format!("{r2}:{n}")).collect::<Vec<_>>().join(" ")
}

fn fmt_faces(f: &[(usize, usize)], v: usize, e: usize) -> String {
    let faces: usize = f.iter().map(|(_, n)| n).sum();
    let parts: Vec<String> = f.iter().map(|(k, n)| format!("{n}x{k}")).collect();
    format!("V={v} E={e} F={faces} [{}]", parts.join(" "))
}

fn fmt_rats(v: &[Rat]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

fn plane_vertex(center: &Vec3R, others: [&Vec3R; 3]) -> Result<Vec3R> {
    let hs = others.map(|q| bisector(center, q));
    let [a, b, c] = hs;
    let (a, b, c) = (a?, b?, c?);
    let m = Mat3R::from_rows(a.normal, b.normal, c.normal);
    solve3(&m, &Vec3R::new(a.offset, b.offset, c.offset))
}

/// Run every golden check and collect the results in a fixed order.
pub fn reproduce_paper(opts: &ReproduceOptions) -> Result<Report> {
    let g = &opts.goldens;
    let mut ck = Checker { entries: Vec::new(), cells: BTreeMap::new() };

    for v in &g.volumes {
        let computed = ck.cell(&v.plan, v.class)?.volume();
        ck.exact(v.id, v.volume.clone(), computed);
    }

    for plan in RefinementPlan::all() {
        let t = volume_table(&plan)?;
        let sum: Vec<String> =
            t.entries.iter().map(|e| format!("{}*{}", e.multiplicity, e.volume)).collect();
        let pass = t.partition_holds();
        ck.push(format!("partition.{}", plan.slug()), "1", format!("{} = {}", sum.join("+"), t.total), pass);
    }

    for t in &g.tables {
        let h = shell_histogram(t.class, &t.plan, &t.max_r2)?;
        ck.exact(t.id, fmt_shells(&t.shells), fmt_shells(&h.shells));
    }
    let bcc = RefinementPlan::bcc();
    let hg = shell_histogram(SiteClass::Gamma, &bcc, &Rat::from_int(6))?;
    let hb = shell_histogram(SiteClass::Body, &bcc, &Rat::from_int(6))?;
    ck.exact("shells.L1.BODY", fmt_shells(&hg.shells), fmt_shells(&hb.shells));

    for c in &g.censuses {
        let cell = ck.cell(&c.plan, c.class)?;
        let fv = cell.face_census();
        let valid = cell.validate();
        let got: Vec<(usize, usize)> = fv.face_sizes.iter().map(|(k, n)| (*k, *n)).collect();
        let computed = fmt_faces(&got, fv.vertices, fv.edges);
        let expected = fmt_faces(&c.faces, c.vertices, c.edges);
        let pass = computed == expected && valid.is_ok();
        let computed = match valid {
            Ok(()) => computed,
            Err(e) => format!("{computed} INVALID: {e}"),
        };
        ck.push(c.id, expected, computed, pass);
    }

    for gap in &g.gaps {
        ck.exact(gap.id, gap.r2.clone(), nearest_gap(gap.class, &gap.plan)?);
    }

    for (plan, r2, point) in &g.max_free {
        let rep = verify_max_free_point(plan, opts.grid_n)?;
        let hit = rep.argmax.contains(point);
        let pass = rep.max_gap == *r2 && hit && rep.confirmed;
        ck.push(
            format!("maxfree.{}", plan.slug()),
            format!("{r2} at {point}"),
            format!(
                "{} over {} grid points ({}), grid {}^3",
                rep.max_gap,
                rep.argmax.len(),
                if hit { "includes point" } else { "point missing" },
                opts.grid_n
            ),
            pass,
        );
    }

    ck.exact("selfsim.L2X", true, self_similarity_check(&BoxR::cube(0, 2)?));
    let sq = &refine_square(1).constant_sq() / &refine_square(0).constant_sq();
    ck.exact("planar.square", g.square_scale_sq.clone(), sq);
    let tri = &refine_triangular(1).constant_sq() / &refine_triangular(0).constant_sq();
    ck.exact("planar.triangular", g.triangular_scale_sq.clone(), tri);
    ck.exact("planar.kpoint", fmt_rats(&vec![Rat::new(1, 3); 3]), fmt_rats(&k_point_gaps()));

    tetrakis_and_w(&mut ck, g)?;
    lambda_cell(&mut ck, g)?;

    if opts.mc_samples > 0 {
        for plan in RefinementPlan::all() {
            let table = volume_table(&plan)?;
            for e in montecarlo_volumes(&plan, opts.mc_samples, opts.seed)? {
                let exact = table.volume_of(e.class).expect("same plan").clone();
                let pass = e.within(&exact, 4.0);
                ck.push(
                    format!("montecarlo.{}.{}", plan.slug(), e.class),
                    format!("{exact} ({:.7}) within 4 SE", exact.to_f64()),
                    format!("{:.7} +- {:.7}", e.estimate, e.std_error),
                    pass,
                );
            }
        }
    }

    let passed = ck.entries.iter().filter(|e| e.pass).count();
    let total = ck.entries.len();
    Ok(Report { schema: REPORT_SCHEMA, all_pass: passed == total, passed, total, entries: ck.entries })
}

fn tetrakis_and_w(ck: &mut Checker, g: &Goldens) -> Result<()> {
    let bw = RefinementPlan::bcc_w();
    let tetra = ck.cell(&bw, SiteClass::Gamma)?.clone();
    let verts = tetra.vertices();
    let corners: Vec<&Vec3R> =
        verts.iter().filter(|v| v.x.abs() == v.y.abs() && v.y.abs() == v.z.abs()).collect();
    let apexes: Vec<&Vec3R> = verts
        .iter()
        .filter(|v| (0..3).filter(|&i| v[i].is_zero()).count() == 2)
        .collect();
    let half = corners.first().map(|v| v.x.abs()).unwrap_or_else(Rat::zero);
    let apex = apexes.first().map(|v| v.x.abs() + v.y.abs() + v.z.abs()).unwrap_or_else(Rat::zero);
    let shape_ok = corners.len() == 8 && apexes.len() == 6;
    let edge = corners
        .iter()
        .flat_map(|a| corners.iter().map(move |b| a.dist2(b)))
        .filter(Rat::is_positive)
        .min()
        .and_then(|r2| r2.sqrt_exact())
        .unwrap_or_else(Rat::zero);
    let pass = shape_ok && edge == g.tetrakis_cube_edge;
    ck.push("tetrakis.cube_edge", &g.tetrakis_cube_edge, &edge, pass);
    let pass = shape_ok && apex == g.tetrakis_apex;
    ck.push("tetrakis.apex", &g.tetrakis_apex, &apex, pass);
    ck.exact("tetrakis.pyramid_height", g.tetrakis_pyramid_height.clone(), &apex - &half);

    let metrics = tetra.cell_metrics();
    let apex_edges: Vec<Rat> = metrics
        .faces
        .iter()
        .flat_map(|f| f.edge_r2.iter().cloned())
        .filter(|r2| *r2 != g.tetrakis_cube_edge.pow(2))
        .collect();
    let uniform = apex_edges.iter().all(|e| *e == g.tetrakis_apex_edge_r2) && !apex_edges.is_empty();
    ck.push(
        "tetrakis.apex_edge_r2",
        &g.tetrakis_apex_edge_r2,
        apex_edges.first().cloned().unwrap_or_else(Rat::zero),
        uniform,
    );
    let base = metrics
        .faces
        .iter()
        .flat_map(|f| f.angles_deg.iter().copied())
        .fold(f64::INFINITY, f64::min);
    let exact_deg = (2.0f64 / 3.0).acos().to_degrees();
    let pass = (base - exact_deg).abs() < 1e-9 && (base - g.tetrakis_base_angle_deg).abs() < 5e-7;
    ck.push(
        "tetrakis.base_angle",
        format!("{:.6} deg (arccos 2/3)", g.tetrakis_base_angle_deg),
        format!("{base:.6} deg"),
        pass,
    );

    let wcell = ck.cell(&bw, SiteClass::W)?.clone();
    let hexes: Vec<Vec<Rat>> = wcell
        .cell_metrics()
        .faces
        .into_iter()
        .filter(|f| f.sides == 6)
        .map(|f| f.edge_r2)
        .collect();
    let pass = hexes.len() == 4 && hexes.iter().all(|h| *h == g.w_hexagon_edge_r2);
    let computed = hexes.iter().map(|h| format!("{{{}}}", fmt_rats(h))).collect::<Vec<_>>().join(" ");
    ck.push(
        "w_cell.hexagon_edges",
        format!("4 x {{{}}}", fmt_rats(&g.w_hexagon_edge_r2)),
        format!("{} x {computed}", hexes.len()),
        pass,
    );
    Ok(())
}

fn lambda_cell(ck: &mut Checker, g: &Goldens) -> Result<()> {
    let lam = Vec3R::frac(5, 5, 5, 24);
    let w1 = Vec3R::frac(1, 0, 2, 4);
    let w2 = Vec3R::frac(2, 0, 1, 4);
    let solved = plane_vertex(&lam, [&Vec3R::frac(7, 7, 7, 24), &w1, &w2])?;
    ck.exact("lambda_cell.hexagon_vertex.planes", g.lambda_hexagon_vertex.clone(), solved);
    let quad = plane_vertex(&lam, [&Vec3R::frac(5, -5, 5, 24), &w1, &w2])?;
    ck.exact("lambda_cell.quad_vertex.planes", Vec3R::frac(35, 0, 35, 128), quad);

    let cell = ck.cell(&RefinementPlan::bcc_w_lambda(), SiteClass::Lambda)?;
    let mut verts = cell.vertices().to_vec();
    verts.sort();
    let contains = verts.contains(&g.lambda_hexagon_vertex);
    ck.push(
        "lambda_cell.hexagon_vertex",
        &g.lambda_hexagon_vertex,
        if contains { "present" } else { "missing" },
        contains,
    );
    let missing = g.lambda_vertices.iter().filter(|v| !verts.contains(v)).count();
    let pass = missing == 0 && verts.len() == g.lambda_vertices.len();
    ck.push(
        "lambda_cell.vertex_set",
        format!("{} listed vertices", g.lambda_vertices.len()),
        format!("{} vertices, {missing} listed ones missing", verts.len()),
        pass,
    );
    Ok(())
}
