use latrefine::lattice::RefinementPlan;
use latrefine::voronoi::representative_cell;

fn main() {
    for plan in RefinementPlan::all() {
        for cls in plan.classes() {
            let t = std::time::Instant::now();
            let c = representative_cell(cls, &plan).unwrap();
            c.validate().unwrap();
            println!("{plan:12} {cls:7} vol={} fv={} {:?}", c.volume(), c.face_census(), t.elapsed());
        }
    }
}
