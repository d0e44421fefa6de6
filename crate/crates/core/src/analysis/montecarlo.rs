use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exactnum::{Rat, Vec3R};
use crate::lattice::{generate, BoxR, RefinementPlan, SiteClass};

const CHUNK: u64 = 1 << 16;
const BUCKETS: usize = 12;
pub const MIN_SAMPLES: u64 = 10_000;

/// Floating-point nearest-site lookup for points of the unit cell.
///
/// Each bucket of a regular grid over `[0,1)^3` keeps only the sites that
/// can be nearest to some point of the bucket: those whose distance to the
/// bucket is at most the smallest farthest-distance of any site.
pub struct NearestSiteLocator {
    positions: Vec<[f64; 3]>,
    classes: Vec<SiteClass>,
    exact: Vec<Vec3R>,
    buckets: Vec<Vec<u32>>,
}

impl NearestSiteLocator {
    pub fn new(plan: &RefinementPlan) -> Self {
        let sites = generate(plan, &BoxR::cube(-1, 2).expect("static box"));
        let positions: Vec<[f64; 3]> = sites.iter().map(|s| s.pos.to_f64()).collect();
        let h = 1.0 / BUCKETS as f64;
        let mut buckets = Vec::with_capacity(BUCKETS.pow(3));
        for i in 0..BUCKETS {
            for j in 0..BUCKETS {
                for k in 0..BUCKETS {
                    let lo = [i as f64 * h, j as f64 * h, k as f64 * h];
                    let hi = lo.map(|x| x + h);
                    let range: Vec<(f64, f64)> = positions
                        .iter()
                        .map(|p| {
                            let mut dmin = 0.0;
                            let mut dmax = 0.0;
                            for a in 0..3 {
                                let below = (lo[a] - p[a]).max(0.0);
                                let above = (p[a] - hi[a]).max(0.0);
                                dmin += (below + above).powi(2);
                                dmax += (p[a] - lo[a]).abs().max((p[a] - hi[a]).abs()).powi(2);
                            }
                            (dmin, dmax)
                        })
                        .collect();
                    let bound = range.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
                    let slack = bound * 1e-12 + 1e-15;
                    let candidates = range
                        .iter()
                        .enumerate()
                        .filter(|(_, r)| r.0 <= bound + slack)
                        .map(|(i, _)| i as u32)
                        .collect();
                    buckets.push(candidates);
                }
            }
        }
        NearestSiteLocator {
            positions,
            classes: sites.iter().map(|s| s.cls).collect(),
            exact: sites.into_iter().map(|s| s.pos).collect(),
            buckets,
        }
    }

    /// Index of the site nearest to `p` (reduced into the unit cell first).
    /// Ties go to the earlier site in class-then-position order.
    pub fn nearest(&self, p: [f64; 3]) -> usize {
        let q = p.map(|x| x - x.floor());
        let b = q.map(|x| ((x * BUCKETS as f64) as usize).min(BUCKETS - 1));
        let bucket = &self.buckets[(b[0] * BUCKETS + b[1]) * BUCKETS + b[2]];
        let mut best = usize::MAX;
        let mut best_d = f64::INFINITY;
        for &i in bucket {
            let s = &self.positions[i as usize];
            let d = (s[0] - q[0]).powi(2) + (s[1] - q[1]).powi(2) + (s[2] - q[2]).powi(2);
            if d < best_d {
                best_d = d;
                best = i as usize;
            }
        }
        best
    }

    pub fn class_of(&self, i: usize) -> SiteClass {
        self.classes[i]
    }

    /// Exact position of site `i`, in the unit-cell frame of the query.
    pub fn position(&self, i: usize) -> &Vec3R {
        &self.exact[i]
    }

    /// Largest number of candidates any bucket keeps.
    pub fn max_candidates(&self) -> usize {
        self.buckets.iter().map(Vec::len).max().unwrap_or(0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct McEstimate {
    pub class: SiteClass,
    pub multiplicity: usize,
    pub samples: u64,
    pub hits: u64,
    pub estimate: f64,
    pub std_error: f64,
}

impl McEstimate {
    /// `|estimate - exact| <= k * std_error`.
    pub fn within(&self, exact: &Rat, k: f64) -> bool {
        (self.estimate - exact.to_f64()).abs() <= k * self.std_error
    }
}

fn check_samples(samples: u64) -> Result<()> {
    if samples < MIN_SAMPLES {
        return Err(Error::InvalidArgument(format!(
            "Monte-Carlo needs at least {MIN_SAMPLES} samples, got {samples}"
        )));
    }
    Ok(())
}

/// Volume estimates for every class of `plan` from one run of `samples`
/// uniform points in the unit cell.
///
/// The fraction of points whose nearest site has a given class, divided by
/// the number of such sites per cell, estimates that class's cell volume.
pub fn montecarlo_volumes(plan: &RefinementPlan, samples: u64, seed: u64) -> Result<Vec<McEstimate>> {
    check_samples(samples)?;
    let locator = NearestSiteLocator::new(plan);
    let chunks = samples.div_ceil(CHUNK);
    let tally = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c);
            let count = CHUNK.min(samples - c * CHUNK);
            let mut hits = [0u64; SiteClass::ALL.len()];
            for _ in 0..count {
                let p: [f64; 3] = [rng.random(), rng.random(), rng.random()];
                hits[locator.class_of(locator.nearest(p)) as usize] += 1;
            }
            hits
        })
        .reduce(
            || [0u64; SiteClass::ALL.len()],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    let offsets = plan.cell_offsets();
    let n = samples as f64;
    Ok(plan
        .classes()
        .into_iter()
        .map(|cls| {
            let multiplicity = offsets.iter().filter(|(_, c)| *c == cls).count();
            let hits = tally[cls as usize];
            let p = hits as f64 / n;
            let m = multiplicity as f64;
            McEstimate {
                class: cls,
                multiplicity,
                samples,
                hits,
                estimate: p / m,
                std_error: (p * (1.0 - p) / n).sqrt() / m,
            }
        })
        .collect())
}

/// Monte-Carlo estimate of the Voronoi volume of one class.
pub fn montecarlo_volume(
    cls: SiteClass,
    plan: &RefinementPlan,
    samples: u64,
    seed: u64,
) -> Result<McEstimate> {
    plan.require(cls)?;
    let all = montecarlo_volumes(plan, samples, seed)?;
    Ok(all.into_iter().find(|e| e.class == cls).expect("class is in plan"))
}
