//! Labeled site sets of the refined simple-cubic lattices and their exact
//! neighbor-shell statistics.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactnum::{Rat, Vec3R};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum SiteClass {
    Gamma,
    Body,
    W,
    X,
    M,
    Lambda,
}

impl SiteClass {
    pub const ALL: [SiteClass; 6] = [
        SiteClass::Gamma,
        SiteClass::Body,
        SiteClass::W,
        SiteClass::X,
        SiteClass::M,
        SiteClass::Lambda,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SiteClass::Gamma => "GAMMA",
            SiteClass::Body => "BODY",
            SiteClass::W => "W",
            SiteClass::X => "X",
            SiteClass::M => "M",
            SiteClass::Lambda => "LAMBDA",
        }
    }

    pub fn level(self) -> u8 {
        match self {
            SiteClass::Gamma => 0,
            SiteClass::Body => 1,
            SiteClass::W | SiteClass::X | SiteClass::M => 2,
            SiteClass::Lambda => 3,
        }
    }

    /// The site of this class that the construction reasons about by default.
    pub fn representative(self) -> Vec3R {
        match self {
            SiteClass::Gamma => Vec3R::zero(),
            SiteClass::Body => Vec3R::frac(1, 1, 1, 2),
            SiteClass::W => Vec3R::frac(0, 1, 2, 4),
            SiteClass::X => Vec3R::frac(0, 1, 1, 2),
            SiteClass::M => Vec3R::frac(1, 0, 0, 2),
            SiteClass::Lambda => Vec3R::frac(5, 5, 5, 24),
        }
    }
}

impl fmt::Display for SiteClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SiteClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "GAMMA" | "G" | "Γ" => Ok(SiteClass::Gamma),
            "BODY" | "B" => Ok(SiteClass::Body),
            "W" => Ok(SiteClass::W),
            "X" => Ok(SiteClass::X),
            "M" => Ok(SiteClass::M),
            "LAMBDA" | "L" | "Λ" => Ok(SiteClass::Lambda),
            _ => Err(Error::Parse(format!("unknown site class {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Stage {
    L0,
    L1,
    L2W,
    L2X,
    L3,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::L0 => "L0",
            Stage::L1 => "L1",
            Stage::L2W => "L2W",
            Stage::L2X => "L2X",
            Stage::L3 => "L3",
        }
    }

    /// Classes introduced by this stage.
    pub fn classes(self) -> &'static [SiteClass] {
        match self {
            Stage::L0 => &[SiteClass::Gamma],
            Stage::L1 => &[SiteClass::Body],
            Stage::L2W => &[SiteClass::W],
            Stage::L2X => &[SiteClass::X, SiteClass::M],
            Stage::L3 => &[SiteClass::Lambda],
        }
    }

    /// Sites this stage adds to the unit cell `[0,1)^3`.
    fn cell_offsets(self) -> Vec<(Vec3R, SiteClass)> {
        use SiteClass::*;
        match self {
            Stage::L0 => vec![(Vec3R::zero(), Gamma)],
            Stage::L1 => vec![(Vec3R::frac(1, 1, 1, 2), Body)],
            Stage::L2W => {
                // W points on the x = 0, z = 0 and y = 0 faces; the opposite
                // faces belong to the neighbouring cells.
                let mut v = Vec::with_capacity(12);
                for (a, b) in [(1, 2), (3, 2), (2, 1), (2, 3)] {
                    v.push((Vec3R::frac(0, a, b, 4), W));
                    v.push((Vec3R::frac(a, b, 0, 4), W));
                    v.push((Vec3R::frac(b, 0, a, 4), W));
                }
                v
            }
            Stage::L2X => vec![
                (Vec3R::frac(0, 1, 1, 2), X),
                (Vec3R::frac(1, 0, 1, 2), X),
                (Vec3R::frac(1, 1, 0, 2), X),
                (Vec3R::frac(1, 0, 0, 2), M),
                (Vec3R::frac(0, 1, 0, 2), M),
                (Vec3R::frac(0, 0, 1, 2), M),
            ],
            Stage::L3 => {
                let mut v = Vec::with_capacity(16);
                for t in [5, 7, 17, 19] {
                    let u = 24 - t;
                    v.push((Vec3R::frac(t, t, t, 24), Lambda));
                    v.push((Vec3R::frac(u, t, t, 24), Lambda));
                    v.push((Vec3R::frac(t, u, t, 24), Lambda));
                    v.push((Vec3R::frac(t, t, u, 24), Lambda));
                }
                v
            }
        }
    }
}

impl FromStr for Stage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "L0" => Ok(Stage::L0),
            "L1" => Ok(Stage::L1),
            "L2W" => Ok(Stage::L2W),
            "L2X" => Ok(Stage::L2X),
            "L3" => Ok(Stage::L3),
            other => Err(Error::InvalidPlan(format!("unknown stage {other:?}"))),
        }
    }
}

/// Validated sequence of refinement stages.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RefinementPlan {
    stages: Vec<Stage>,
}

const VALID_PLANS: [&[Stage]; 5] = [
    &[Stage::L0],
    &[Stage::L0, Stage::L1],
    &[Stage::L0, Stage::L1, Stage::L2W],
    &[Stage::L0, Stage::L1, Stage::L2X],
    &[Stage::L0, Stage::L1, Stage::L2W, Stage::L3],
];

impl RefinementPlan {
    pub fn new(stages: Vec<Stage>) -> Result<Self> {
        if VALID_PLANS.contains(&stages.as_slice()) {
            Ok(RefinementPlan { stages })
        } else if stages.contains(&Stage::L3) && !stages.contains(&Stage::L2W) {
            Err(Error::InvalidPlan("L3 requires L2W".into()))
        } else {
            let names: Vec<_> = stages.iter().map(|s| s.name()).collect();
            Err(Error::InvalidPlan(format!("unsupported stage sequence [{}]", names.join(","))))
        }
    }

    pub fn sc() -> Self {
        RefinementPlan { stages: VALID_PLANS[0].to_vec() }
    }

    pub fn bcc() -> Self {
        RefinementPlan { stages: VALID_PLANS[1].to_vec() }
    }

    pub fn bcc_w() -> Self {
        RefinementPlan { stages: VALID_PLANS[2].to_vec() }
    }

    pub fn bcc_x() -> Self {
        RefinementPlan { stages: VALID_PLANS[3].to_vec() }
    }

    pub fn bcc_w_lambda() -> Self {
        RefinementPlan { stages: VALID_PLANS[4].to_vec() }
    }

    /// All five supported plans, coarsest first.
    pub fn all() -> Vec<RefinementPlan> {
        VALID_PLANS.iter().map(|s| RefinementPlan { stages: s.to_vec() }).collect()
    }

    pub fn stages(&self) -> &[Stage] {
        &self.stages
    }

    pub fn last_stage(&self) -> Stage {
        *self.stages.last().expect("plans are never empty")
    }

    /// The plan before its last stage was applied, if any.
    pub fn parent(&self) -> Option<RefinementPlan> {
        (self.stages.len() > 1).then(|| RefinementPlan {
            stages: self.stages[..self.stages.len() - 1].to_vec(),
        })
    }

    pub fn classes(&self) -> Vec<SiteClass> {
        self.stages.iter().flat_map(|s| s.classes().iter().copied()).collect()
    }

    pub fn contains(&self, cls: SiteClass) -> bool {
        self.stages.iter().any(|s| s.classes().contains(&cls))
    }

    pub fn require(&self, cls: SiteClass) -> Result<()> {
        if self.contains(cls) {
            Ok(())
        } else {
            Err(Error::ClassNotInPlan(cls, self.to_string()))
        }
    }

    /// Every site of the unit cell `[0,1)^3`, in stage order.
    pub fn cell_offsets(&self) -> Vec<(Vec3R, SiteClass)> {
        self.stages.iter().flat_map(|s| s.cell_offsets()).collect()
    }

    /// Short file-name friendly label, e.g. `L0-L1-L2W`.
    pub fn slug(&self) -> String {
        self.stages.iter().map(|s| s.name()).collect::<Vec<_>>().join("-")
    }
}

impl fmt::Display for RefinementPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<_> = self.stages.iter().map(|s| s.name()).collect();
        f.write_str(&names.join(","))
    }
}

impl FromStr for RefinementPlan {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let stages = s
            .split(',')
            .filter(|t| !t.trim().is_empty())
            .map(str::parse)
            .collect::<Result<Vec<Stage>>>()?;
        RefinementPlan::new(stages)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Site {
    pub pos: Vec3R,
    pub cls: SiteClass,
    pub level: u8,
}

impl Site {
    pub fn new(pos: Vec3R, cls: SiteClass) -> Self {
        Site { pos, cls, level: cls.level() }
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} {}", self.cls, self.pos.x, self.pos.y, self.pos.z)
    }
}

/// Half-open axis-aligned box `[lo, hi)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoxR {
    pub lo: Vec3R,
    pub hi: Vec3R,
}

impl BoxR {
    pub fn new(lo: Vec3R, hi: Vec3R) -> Result<Self> {
        if (0..3).any(|i| lo[i] >= hi[i]) {
            return Err(Error::InvalidBox(format!("{lo} .. {hi} is empty")));
        }
        Ok(BoxR { lo, hi })
    }

    pub fn unit() -> Self {
        BoxR { lo: Vec3R::zero(), hi: Vec3R::ints(1, 1, 1) }
    }

    /// `[lo, hi)^3` with integer bounds.
    pub fn cube(lo: i64, hi: i64) -> Result<Self> {
        BoxR::new(Vec3R::ints(lo, lo, lo), Vec3R::ints(hi, hi, hi))
    }

    pub fn contains(&self, p: &Vec3R) -> bool {
        (0..3).all(|i| self.lo[i] <= p[i] && p[i] < self.hi[i])
    }

    pub fn translate(&self, t: &Vec3R) -> BoxR {
        BoxR { lo: &self.lo + t, hi: &self.hi + t }
    }

    /// Integer cell indices whose unit cells can hold points of the box.
    fn cell_range(&self, axis: usize) -> std::ops::Range<i64> {
        let lo = self.lo[axis].floor().to_i64().expect("box bound out of range");
        let hi = self.hi[axis].ceil().to_i64().expect("box bound out of range");
        lo..hi
    }
}

impl FromStr for BoxR {
    type Err = Error;

    /// Six comma-separated rationals: `x0,y0,z0,x1,y1,z1`.
    fn from_str(s: &str) -> Result<Self> {
        let v = s.split(',').map(str::parse).collect::<Result<Vec<Rat>>>()?;
        if v.len() != 6 {
            return Err(Error::InvalidBox(format!(
                "expected six comma-separated bounds, got {}",
                v.len()
            )));
        }
        let mut it = v.into_iter();
        let mut next3 = || {
            Vec3R::new(it.next().unwrap(), it.next().unwrap(), it.next().unwrap())
        };
        let lo = next3();
        let hi = next3();
        BoxR::new(lo, hi)
    }
}

fn sort_sites(sites: &mut [Site]) {
    sites.sort_by(|a, b| a.cls.cmp(&b.cls).then_with(|| a.pos.cmp(&b.pos)));
}

/// All sites of `plan` inside the half-open `bbox`, ordered by class then
/// position.
pub fn generate(plan: &RefinementPlan, bbox: &BoxR) -> Vec<Site> {
    let offsets = plan.cell_offsets();
    let mut out = Vec::new();
    for i in bbox.cell_range(0) {
        for j in bbox.cell_range(1) {
            for k in bbox.cell_range(2) {
                let cell = Vec3R::ints(i, j, k);
                for (off, cls) in &offsets {
                    let pos = &cell + off;
                    if bbox.contains(&pos) {
                        out.push(Site::new(pos, *cls));
                    }
                }
            }
        }
    }
    sort_sites(&mut out);
    out
}

/// Sites of class `cls` in the unit cell `[0,1)^3`.
pub fn class_sites_in_cell(plan: &RefinementPlan, cls: SiteClass) -> Vec<Site> {
    generate(plan, &BoxR::unit()).into_iter().filter(|s| s.cls == cls).collect()
}

/// Smallest integer `m` with `m*m >= r2`.
fn ceil_sqrt(r2: &Rat) -> i64 {
    let c = r2.ceil();
    let c = if c.sign() == num_bigint::Sign::Minus { num_bigint::BigInt::from(0) } else { c };
    let mut m = c.sqrt();
    if &m * &m < c {
        m += 1;
    }
    m.to_i64().expect("cutoff radius out of range")
}

/// Sites at squared distance `(0, r2max]` from `center`, ordered by distance
/// then class then position.
pub fn sites_near(center: &Vec3R, plan: &RefinementPlan, r2max: &Rat) -> Vec<(Rat, Site)> {
    let reach = ceil_sqrt(r2max) + 1;
    let base = [center.x.floor(), center.y.floor(), center.z.floor()]
        .map(|b| b.to_i64().expect("site coordinate out of range"));
    let lo = Vec3R::ints(base[0] - reach, base[1] - reach, base[2] - reach);
    let hi = Vec3R::ints(base[0] + reach + 1, base[1] + reach + 1, base[2] + reach + 1);
    let bbox = BoxR { lo, hi };
    let mut out: Vec<(Rat, Site)> = generate(plan, &bbox)
        .into_iter()
        .filter_map(|s| {
            let r2 = s.pos.dist2(center);
            (r2.is_positive() && &r2 <= r2max).then_some((r2, s))
        })
        .collect();
    out.sort_by(|a, b| {
        a.0.cmp(&b.0)
            .then_with(|| a.1.cls.cmp(&b.1.cls))
            .then_with(|| a.1.pos.cmp(&b.1.pos))
    });
    out
}

/// Sites of every active class with `0 < |t - s|^2 <= r2max`, nearest first.
pub fn candidate_neighbors(s: &Site, plan: &RefinementPlan, r2max: &Rat) -> Vec<Site> {
    sites_near(&s.pos, plan, r2max).into_iter().map(|(_, t)| t).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ShellHistogram {
    pub shells: Vec<(Rat, usize)>,
}

impl ShellHistogram {
    fn from_distances<'a>(r2s: impl IntoIterator<Item = &'a Rat>) -> Self {
        let mut map: BTreeMap<Rat, usize> = BTreeMap::new();
        for r2 in r2s {
            *map.entry(r2.clone()).or_default() += 1;
        }
        ShellHistogram { shells: map.into_iter().collect() }
    }

    pub fn counts(&self) -> Vec<usize> {
        self.shells.iter().map(|(_, c)| *c).collect()
    }
}

impl fmt::Display for ShellHistogram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (r2, n) in &self.shells {
            writeln!(f, "{r2}\t{n}")?;
        }
        Ok(())
    }
}

/// Neighbor shells around `center`.
pub fn shell_histogram_at(center: &Vec3R, plan: &RefinementPlan, max_r2: &Rat) -> ShellHistogram {
    let near = sites_near(center, plan, max_r2);
    ShellHistogram::from_distances(near.iter().map(|(r2, _)| r2))
}

/// Neighbor shells around the representative site of `center_cls`.
pub fn shell_histogram(
    center_cls: SiteClass,
    plan: &RefinementPlan,
    max_r2: &Rat,
) -> Result<ShellHistogram> {
    plan.require(center_cls)?;
    Ok(shell_histogram_at(&center_cls.representative(), plan, max_r2))
}

/// Squared distance from the sites added by `plan`'s last stage to the sites
/// that existed before it.
pub fn nearest_gap(new_cls: SiteClass, plan: &RefinementPlan) -> Result<Rat> {
    let not_new = || Error::ClassNotInPlan(new_cls, plan.to_string());
    if !plan.last_stage().classes().contains(&new_cls) {
        return Err(not_new());
    }
    let parent = plan.parent().ok_or_else(not_new)?;
    // Every point is within 3/4 (squared) of a level-0 site.
    let reach = Rat::one();
    class_sites_in_cell(plan, new_cls)
        .iter()
        .filter_map(|s| sites_near(&s.pos, &parent, &reach).into_iter().next().map(|(r2, _)| r2))
        .min()
        .ok_or_else(not_new)
}

/// Simple-cubic lattice of spacing `constant` inside `bbox`.
pub fn scaled_cubic(constant: &Rat, bbox: &BoxR) -> BTreeSet<Vec3R> {
    let range = |i: usize| {
        let lo = (&bbox.lo[i] / constant).ceil().to_i64().unwrap();
        let hi = (&bbox.hi[i] / constant).ceil().to_i64().unwrap();
        lo..hi
    };
    let mut out = BTreeSet::new();
    for i in range(0) {
        for j in range(1) {
            for k in range(2) {
                out.insert(Vec3R::ints(i, j, k).scale(constant));
            }
        }
    }
    out
}

/// Whether the sites of `plan` in `bbox` are exactly a simple-cubic lattice of
/// spacing `constant`.
pub fn equals_scaled_cubic(plan: &RefinementPlan, constant: &Rat, bbox: &BoxR) -> bool {
    let sites: BTreeSet<Vec3R> = generate(plan, bbox).into_iter().map(|s| s.pos).collect();
    sites == scaled_cubic(constant, bbox)
}

/// The L2X refinement is the simple-cubic lattice with half the spacing.
pub fn self_similarity_check(bbox: &BoxR) -> bool {
    equals_scaled_cubic(&RefinementPlan::bcc_x(), &Rat::new(1, 2), bbox)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rat {
        Rat::new(n, d)
    }

    fn hist(pairs: &[(i64, i64, usize)]) -> Vec<(Rat, usize)> {
        pairs.iter().map(|&(n, d, c)| (r(n, d), c)).collect()
    }

    #[test]
    fn plan_parsing() {
        assert_eq!("L0,L1,L2W,L3".parse::<RefinementPlan>().unwrap(), RefinementPlan::bcc_w_lambda());
        assert!(matches!("L0,L1,L2X,L3".parse::<RefinementPlan>(), Err(Error::InvalidPlan(_))));
        assert!(matches!("L0,L3".parse::<RefinementPlan>(), Err(Error::InvalidPlan(_))));
        assert!(matches!("L1".parse::<RefinementPlan>(), Err(Error::InvalidPlan(_))));
        assert!(matches!("".parse::<RefinementPlan>(), Err(Error::InvalidPlan(_))));
        assert!(matches!("L0,L9".parse::<RefinementPlan>(), Err(Error::InvalidPlan(_))));
        for p in RefinementPlan::all() {
            assert_eq!(p.to_string().parse::<RefinementPlan>().unwrap(), p);
        }
    }

    #[test]
    fn unit_cell_counts() {
        let unit = BoxR::unit();
        let sc = generate(&RefinementPlan::sc(), &unit);
        assert_eq!(sc, vec![Site::new(Vec3R::zero(), SiteClass::Gamma)]);
        let counts: Vec<usize> =
            RefinementPlan::all().iter().map(|p| generate(p, &unit).len()).collect();
        assert_eq!(counts, vec![1, 2, 14, 8, 30]);
        let lw = generate(&RefinementPlan::bcc_w_lambda(), &unit);
        assert_eq!(lw.iter().filter(|s| s.cls == SiteClass::Lambda).count(), 16);
        assert_eq!(lw.iter().filter(|s| s.cls == SiteClass::W).count(), 12);
    }

    #[test]
    fn coordinate_denominators() {
        let sites = generate(&RefinementPlan::bcc_w_lambda(), &BoxR::cube(-1, 2).unwrap());
        let sites_x = generate(&RefinementPlan::bcc_x(), &BoxR::cube(-1, 2).unwrap());
        for s in sites.iter().chain(&sites_x) {
            let den: i64 = match s.cls {
                SiteClass::Gamma | SiteClass::Body => 2,
                SiteClass::W | SiteClass::X | SiteClass::M => 4,
                SiteClass::Lambda => 24,
            };
            for i in 0..3 {
                assert!((&s.pos[i] * &Rat::from_int(den)).is_integer(), "{s}");
            }
        }
    }

    #[test]
    fn lambda_points_lie_on_diagonals() {
        let params = [5, 7, 17, 19].map(|t| r(t, 24));
        let lam = class_sites_in_cell(&RefinementPlan::bcc_w_lambda(), SiteClass::Lambda);
        // Diagonals from the corners (0,0,0), (1,0,0), (0,1,0), (0,0,1).
        let corners = [[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]];
        let mut per_diag = [0usize; 4];
        for s in &lam {
            let hits: Vec<usize> = (0..4)
                .filter(|&d| {
                    params.iter().any(|t| {
                        let c = corners[d];
                        (0..3).all(|i| {
                            let along = if c[i] == 0 { t.clone() } else { Rat::one() - t };
                            s.pos[i] == along
                        })
                    })
                })
                .collect();
            assert_eq!(hits.len(), 1, "{s}");
            per_diag[hits[0]] += 1;
        }
        assert_eq!(per_diag, [4, 4, 4, 4]);
    }

    #[test]
    fn shells_simple_cubic() {
        let h = shell_histogram(SiteClass::Gamma, &RefinementPlan::sc(), &r(6, 1)).unwrap();
        assert_eq!(h.shells, hist(&[(1, 1, 6), (2, 1, 12), (3, 1, 8), (4, 1, 6), (5, 1, 24), (6, 1, 24)]));
    }

    #[test]
    fn shells_bcc() {
        let plan = RefinementPlan::bcc();
        let h = shell_histogram(SiteClass::Gamma, &plan, &r(6, 1)).unwrap();
        let expect = hist(&[
            (3, 4, 8),
            (1, 1, 6),
            (2, 1, 12),
            (11, 4, 24),
            (3, 1, 8),
            (4, 1, 6),
            (19, 4, 24),
            (5, 1, 24),
            (6, 1, 24),
        ]);
        assert_eq!(h.shells, expect);
        let hb = shell_histogram(SiteClass::Body, &plan, &r(6, 1)).unwrap();
        assert_eq!(hb, h);
    }

    #[test]
    fn shells_level_two() {
        let plan = RefinementPlan::bcc_w();
        let g = shell_histogram(SiteClass::Gamma, &plan, &r(29, 16)).unwrap();
        assert_eq!(
            g.shells,
            hist(&[(5, 16, 24), (3, 4, 8), (13, 16, 24), (1, 1, 6), (21, 16, 48), (29, 16, 72)])
        );
        let w = shell_histogram(SiteClass::W, &plan, &r(3, 4)).unwrap();
        assert_eq!(
            w.shells,
            hist(&[(1, 8, 4), (1, 4, 2), (5, 16, 4), (3, 8, 8), (1, 2, 4), (5, 8, 8), (3, 4, 8)])
        );
    }

    #[test]
    fn histogram_independent_of_representative() {
        let max = r(3, 1);
        for plan in RefinementPlan::all() {
            for cls in plan.classes() {
                let reference = shell_histogram(cls, &plan, &max).unwrap();
                for s in class_sites_in_cell(&plan, cls) {
                    assert_eq!(shell_histogram_at(&s.pos, &plan, &max), reference, "{plan} {s}");
                }
            }
        }
    }

    #[test]
    fn histogram_rejects_absent_class() {
        assert_eq!(
            shell_histogram(SiteClass::W, &RefinementPlan::bcc(), &r(1, 1)),
            Err(Error::ClassNotInPlan(SiteClass::W, "L0,L1".into()))
        );
    }

    #[test]
    fn insertion_gaps() {
        assert_eq!(nearest_gap(SiteClass::W, &RefinementPlan::bcc_w()).unwrap(), r(5, 16));
        assert_eq!(nearest_gap(SiteClass::Lambda, &RefinementPlan::bcc_w_lambda()).unwrap(), r(25, 192));
        assert_eq!(nearest_gap(SiteClass::X, &RefinementPlan::bcc_x()).unwrap(), r(1, 4));
        assert_eq!(nearest_gap(SiteClass::Body, &RefinementPlan::bcc()).unwrap(), r(3, 4));
        assert!(nearest_gap(SiteClass::Gamma, &RefinementPlan::bcc_w()).is_err());
        assert!(nearest_gap(SiteClass::Gamma, &RefinementPlan::sc()).is_err());
    }

    #[test]
    fn candidate_neighbor_examples() {
        let g = Site::new(Vec3R::zero(), SiteClass::Gamma);
        let six = candidate_neighbors(&g, &RefinementPlan::sc(), &r(1, 1));
        assert_eq!(six.len(), 6);
        assert!(six.iter().all(|s| s.pos.norm2() == Rat::one()));
        let eight = candidate_neighbors(&g, &RefinementPlan::bcc(), &r(3, 4));
        assert_eq!(eight.len(), 8);
        assert!(eight.iter().all(|s| s.cls == SiteClass::Body));
        let w = Site::new(SiteClass::W.representative(), SiteClass::W);
        assert!(candidate_neighbors(&w, &RefinementPlan::sc(), &r(1, 32)).is_empty());
        assert!(candidate_neighbors(&g, &RefinementPlan::sc(), &r(1, 32)).is_empty());
    }

    #[test]
    fn self_similarity() {
        let b = BoxR::cube(0, 2).unwrap();
        assert!(self_similarity_check(&b));
        assert!(!equals_scaled_cubic(&RefinementPlan::bcc_x(), &r(1, 3), &b));
        for c in [r(1, 2), r(1, 3), r(1, 4), Rat::one()] {
            assert!(!equals_scaled_cubic(&RefinementPlan::bcc_w(), &c, &b));
        }
    }

    #[test]
    fn translation_closure() {
        let plan = RefinementPlan::bcc_w_lambda();
        let b: BoxR = "-1/3,0,1/2,1,3/2,2".parse().unwrap();
        let base = generate(&plan, &b);
        for t in [Vec3R::ints(1, 0, 0), Vec3R::ints(-2, 3, 1)] {
            let moved = generate(&plan, &b.translate(&t));
            let expect: Vec<Vec3R> = base.iter().map(|s| &s.pos + &t).collect();
            let got: Vec<Vec3R> = moved.iter().map(|s| s.pos.clone()).collect();
            assert_eq!(got, expect);
        }
    }

    #[test]
    fn sub_box_union_equals_whole() {
        let plan = RefinementPlan::bcc_w_lambda();
        let whole = generate(&plan, &BoxR::cube(-1, 1).unwrap());
        let mut parts = Vec::new();
        for lo in [-1i64, 0] {
            let b = BoxR::new(Vec3R::ints(lo, -1, -1), Vec3R::ints(lo + 1, 1, 1)).unwrap();
            parts.extend(generate(&plan, &b));
        }
        sort_sites(&mut parts);
        assert_eq!(parts, whole);
    }

    #[test]
    fn cubic_symmetry_about_gamma() {
        let b = BoxR::cube(-1, 2).unwrap();
        let inner = BoxR::new(Vec3R::frac(-1, -1, -1, 2), Vec3R::frac(1, 1, 1, 2)).unwrap();
        let center = Vec3R::zero();
        for plan in RefinementPlan::all() {
            let all: BTreeSet<Vec3R> = generate(&plan, &b).into_iter().map(|s| s.pos).collect();
            for perm in PERMS {
                for signs in SIGNS {
                    for p in generate(&plan, &inner).into_iter().map(|s| s.pos) {
                        let rel = &p - &center;
                        let img = &rel.signed_permute(perm, signs) + &center;
                        assert!(all.contains(&img), "{plan}: {p} -> {img}");
                    }
                }
            }
        }
    }

    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    const SIGNS: [[i8; 3]; 8] = [
        [1, 1, 1],
        [1, 1, -1],
        [1, -1, 1],
        [1, -1, -1],
        [-1, 1, 1],
        [-1, 1, -1],
        [-1, -1, 1],
        [-1, -1, -1],
    ];

    #[test]
    fn box_parsing() {
        let b: BoxR = "0,0,0,1,1,1".parse().unwrap();
        assert_eq!(b, BoxR::unit());
        assert!("0,0,0,1,1".parse::<BoxR>().is_err());
        assert!("0,0,0,0,1,1".parse::<BoxR>().is_err());
    }
}
