//! Cross-checks: partition of the unit cell, max-min insertion points, a
//! Monte-Carlo volume oracle and the full golden-value report.

mod montecarlo;
mod report;

use std::fmt;

use num_integer::Integer;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exactnum::{Rat, Vec3R};
use crate::lattice::{class_sites_in_cell, generate, nearest_gap, BoxR, RefinementPlan, SiteClass};
use crate::voronoi::representative_cell;

pub use montecarlo::{montecarlo_volume, montecarlo_volumes, McEstimate, NearestSiteLocator};
pub use report::{reproduce_paper, CheckEntry, Goldens, Report, ReproduceOptions};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VolumeEntry {
    pub class: SiteClass,
    /// Sites of this class per unit cell.
    pub multiplicity: usize,
    pub volume: Rat,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VolumeTable {
    pub plan: String,
    pub entries: Vec<VolumeEntry>,
    /// Sum of multiplicity times volume over all classes.
    pub total: Rat,
}

impl VolumeTable {
    /// The cells tile the unit cell exactly.
    pub fn partition_holds(&self) -> bool {
        self.total == Rat::one()
    }

    pub fn volume_of(&self, cls: SiteClass) -> Option<&Rat> {
        self.entries.iter().find(|e| e.class == cls).map(|e| &e.volume)
    }
}

impl fmt::Display for VolumeTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "plan: {}", self.plan)?;
        for e in &self.entries {
            writeln!(
                f,
                "{}\t{} x {}\t({:.7})",
                e.class,
                e.multiplicity,
                e.volume,
                e.volume.to_f64()
            )?;
        }
        let sum: Vec<String> =
            self.entries.iter().map(|e| format!("{}*{}", e.multiplicity, e.volume)).collect();
        writeln!(f, "sum: {} = {}", sum.join(" + "), self.total)?;
        let status = if self.partition_holds() { "OK" } else { "FAILED" };
        writeln!(f, "partition: {status}")
    }
}

/// Voronoi volume and per-cell multiplicity of every class in `plan`.
pub fn volume_table(plan: &RefinementPlan) -> Result<VolumeTable> {
    let mut entries = Vec::new();
    for cls in plan.classes() {
        let multiplicity = class_sites_in_cell(plan, cls).len();
        let volume = representative_cell(cls, plan)?.volume();
        entries.push(VolumeEntry { class: cls, multiplicity, volume });
    }
    let total = entries
        .iter()
        .map(|e| Rat::from_int(e.multiplicity as i64) * &e.volume)
        .sum();
    Ok(VolumeTable { plan: plan.to_string(), entries, total })
}

/// The stage that refines `plan` further, with the class it inserts.
pub fn next_insertion(plan: &RefinementPlan) -> Option<(RefinementPlan, SiteClass)> {
    RefinementPlan::all().into_iter().find_map(|p| {
        (p.parent().as_ref() == Some(plan) && p.last_stage().classes().len() == 1)
            .then(|| (p.clone(), p.last_stage().classes()[0]))
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MaxFreeReport {
    pub plan: String,
    pub grid_n: u32,
    /// Largest squared distance from a grid point to its nearest site.
    pub max_gap: Rat,
    /// Grid points attaining `max_gap`, lexicographically ordered.
    pub argmax: Vec<Vec3R>,
    /// Class added by the next stage and its exact insertion gap.
    pub inserted: Option<(SiteClass, Rat)>,
    /// The inserted class's representative attains the grid maximum, and
    /// that maximum equals the exact insertion gap.
    pub confirmed: bool,
}

/// Brute-force scan of an `n^3` grid over the unit cell for the points
/// farthest from every site of `plan`.
///
/// `grid_n` must be a multiple of 48 so the grid contains every 16th and
/// 24th. Coordinates are scaled to a common integer denominator so the
/// scan is exact.
pub fn verify_max_free_point(plan: &RefinementPlan, grid_n: u32) -> Result<MaxFreeReport> {
    if grid_n < 48 || !grid_n.is_multiple_of(48) {
        return Err(Error::InvalidArgument(format!(
            "grid_n must be a positive multiple of 48, got {grid_n}"
        )));
    }
    let n = i64::from(grid_n);
    // Site denominators divide 24.
    let scale = n.lcm(&24);
    let step = scale / n;
    let sites: Vec<[i64; 3]> = generate(plan, &BoxR::cube(-1, 2)?)
        .iter()
        .map(|s| {
            let c = |r: &Rat| (r * &Rat::from_int(scale)).numer().to_i64().unwrap();
            [c(&s.pos.x), c(&s.pos.y), c(&s.pos.z)]
        })
        .collect();
    let mut best = -1i64;
    let mut argmax: Vec<[i64; 3]> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let p = [i * step, j * step, k * step];
                let d = sites
                    .iter()
                    .map(|s| (0..3).map(|a| (s[a] - p[a]).pow(2)).sum::<i64>())
                    .min()
                    .unwrap();
                if d > best {
                    best = d;
                    argmax.clear();
                }
                if d == best {
                    argmax.push([i, j, k]);
                }
            }
        }
    }
    let max_gap = Rat::new(best, scale * scale);
    let mut argmax: Vec<Vec3R> =
        argmax.into_iter().map(|[i, j, k]| Vec3R::frac(i, j, k, n)).collect();
    argmax.sort();
    let inserted = match next_insertion(plan) {
        Some((next, cls)) => Some((cls, nearest_gap(cls, &next)?)),
        None => None,
    };
    let confirmed = match &inserted {
        Some((cls, gap)) => *gap == max_gap && argmax.contains(&cls.representative()),
        None => false,
    };
    Ok(MaxFreeReport { plan: plan.to_string(), grid_n, max_gap, argmax, inserted, confirmed })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rat {
        Rat::new(n, d)
    }

    #[test]
    fn next_insertions() {
        assert_eq!(next_insertion(&RefinementPlan::sc()).unwrap().1, SiteClass::Body);
        assert_eq!(next_insertion(&RefinementPlan::bcc()).unwrap().1, SiteClass::W);
        assert_eq!(next_insertion(&RefinementPlan::bcc_w()).unwrap().1, SiteClass::Lambda);
        assert!(next_insertion(&RefinementPlan::bcc_x()).is_none());
        assert!(next_insertion(&RefinementPlan::bcc_w_lambda()).is_none());
    }

    #[test]
    fn cube_center_is_farthest_in_sc() {
        let rep = verify_max_free_point(&RefinementPlan::sc(), 48).unwrap();
        assert_eq!(rep.max_gap, r(3, 4));
        assert_eq!(rep.argmax, vec![Vec3R::frac(1, 1, 1, 2)]);
        assert!(rep.confirmed);
    }

    #[test]
    fn finer_grid_keeps_the_gap() {
        let rep = verify_max_free_point(&RefinementPlan::bcc(), 96).unwrap();
        assert_eq!(rep.inserted.clone().unwrap().1, r(5, 16));
        assert_eq!(rep.max_gap, r(5, 16));
        assert!(rep.confirmed);
        for n in [0, 24, 50, 100] {
            assert!(verify_max_free_point(&RefinementPlan::bcc(), n).is_err(), "n={n}");
        }
    }

    #[test]
    fn level_two_partition() {
        let t = volume_table(&RefinementPlan::bcc_w()).unwrap();
        assert_eq!(t.volume_of(SiteClass::Gamma), Some(&r(125, 1152)));
        assert_eq!(t.volume_of(SiteClass::W), Some(&r(451, 6912)));
        assert_eq!(t.entries.iter().map(|e| e.multiplicity).collect::<Vec<_>>(), vec![1, 1, 12]);
        assert!(t.partition_holds());
        let text = t.to_string();
        assert!(text.contains("125/1152") && text.contains("451/6912"));
        assert!(text.contains("partition: OK"));
    }
}
