//! Named multi-cell assemblies for visualization.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::exactnum::Vec3R;
use crate::lattice::{RefinementPlan, Site, SiteClass};
use crate::voronoi::{voronoi_cell, ConvexCell};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Figure {
    /// Three truncated octahedra of the BCC lattice: two sharing a square,
    /// a third attached by hexagons.
    BccThreeCells,
    /// Five Tetrakis hexahedra around level-2 lattice points and one W cell.
    Level2GammaW,
    /// Two octahedra on a space diagonal joined by a pair of Lambda cells.
    Level3Bridge,
    /// The bridge plus two W cells and a Lambda cell on another diagonal.
    Level3Composite,
}

impl Figure {
    pub const ALL: [Figure; 4] =
        [Figure::BccThreeCells, Figure::Level2GammaW, Figure::Level3Bridge, Figure::Level3Composite];

    pub fn name(self) -> &'static str {
        match self {
            Figure::BccThreeCells => "bcc-three-cells",
            Figure::Level2GammaW => "level2-gamma-w",
            Figure::Level3Bridge => "level3-bridge",
            Figure::Level3Composite => "level3-composite",
        }
    }

    pub fn plan(self) -> RefinementPlan {
        match self {
            Figure::BccThreeCells => RefinementPlan::bcc(),
            Figure::Level2GammaW => RefinementPlan::bcc_w(),
            Figure::Level3Bridge | Figure::Level3Composite => RefinementPlan::bcc_w_lambda(),
        }
    }

    pub fn sites(self) -> Vec<Site> {
        use SiteClass::*;
        let s = |x, y, z, d, c| Site::new(Vec3R::frac(x, y, z, d), c);
        let bridge = vec![
            s(0, 0, 0, 1, Gamma),
            s(1, 1, 1, 2, Body),
            s(5, 5, 5, 24, Lambda),
            s(7, 7, 7, 24, Lambda),
        ];
        match self {
            Figure::BccThreeCells => vec![s(0, 0, 0, 1, Gamma), s(1, 0, 0, 1, Gamma), s(1, 1, 1, 2, Body)],
            Figure::Level2GammaW => vec![
                s(0, 0, 0, 1, Gamma),
                s(0, 1, 0, 1, Gamma),
                s(0, 0, 1, 1, Gamma),
                s(0, 1, 1, 1, Gamma),
                s(1, 1, 1, 2, Body),
                s(0, 1, 2, 4, W),
            ],
            Figure::Level3Bridge => bridge,
            Figure::Level3Composite => {
                let mut v = bridge;
                v.extend([s(2, 0, 1, 4, W), s(1, 0, 2, 4, W), s(5, -5, 5, 24, Lambda)]);
                v
            }
        }
    }

    /// Exact cells of the figure, built against `plan`, which must be the
    /// figure's own plan.
    pub fn cells(self, plan: &RefinementPlan) -> Result<Vec<ConvexCell>> {
        if *plan != self.plan() {
            return Err(Error::InvalidPlan(format!(
                "figure {} needs plan {}, got {plan}",
                self.name(),
                self.plan()
            )));
        }
        self.sites().iter().map(|s| voronoi_cell(s, plan)).collect()
    }
}

impl fmt::Display for Figure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Figure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Figure::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown figure {s:?}")))
    }
}
