//! Propagates the user mobility chain and prints expected users per slot.
//!
//! `cargo run --example demand_forecast -- scenarios/reference.toml`

use uavroute::scenario::{Scenario, ScenarioConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let scenario = match std::env::args().nth(1) {
        Some(path) => Scenario::load(path)?,
        None => {
            // Users drift from region 1 toward its neighbors.
            let mut cfg = ScenarioConfig::default();
            cfg.horizon.slots = 6;
            let l = cfg.topology.regions;
            let mut rows = vec![vec![0.0; l]; l];
            rows[0][1] = 0.3;
            rows[0][3] = 0.2;
            cfg.demand.transitions = Some(rows);
            cfg.build()?
        }
    };
    let table = scenario.demand_table()?;
    print!("slot");
    for l in 0..table.regions() {
        print!("{:>8}", l + 1);
    }
    println!("{:>10}", "total");
    for t in 0..table.slots() {
        print!("{:>4}", t + 1);
        for l in 0..table.regions() {
            print!("{:>8.2}", table.expected_users(l, t));
        }
        println!("{:>10.2}", table.total_mass(t));
    }
    Ok(())
}
