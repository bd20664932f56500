//! End-to-end removability runs on the bundled scenarios, or on a scenario
//! file given as the first argument.

use crdisc::extend::removability::removability_experiment;
use crdisc::scenario::{self, Scenario, BUNDLED};

fn main() -> crdisc::Result<()> {
    let scenarios: Vec<Scenario> = match std::env::args().nth(1) {
        Some(path) => vec![scenario::load(path.as_ref())?],
        None => BUNDLED.iter().map(|(n, _)| Scenario::builtin(n)).collect::<Result<_, _>>()?,
    };
    for sc in &scenarios {
        let r = removability_experiment(sc)?.report;
        println!("{}:", r.scenario);
        println!("  defect {}, {} wedge points on {} discs", r.defect.defect, r.wedge.points, r.wedge.discs);
        println!(
            "  extendible {}, non-extendible {}, singular {}, max flagged content {:.2e}",
            r.extendible,
            r.non_extendible.len(),
            r.singular.len(),
            r.max_flagged_content
        );
        println!("  max |F - truth| = {:.2e} over {} points", r.max_error, r.compared);
        println!("  verdict {:?}, expected {:?}", r.verdict, r.expected);
    }
    Ok(())
}
