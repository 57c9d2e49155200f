//! Exact joint planning of a small fleet over the multi-UAV state graph.

use uavroute::crs::{solve_crs, CrsOptions};
use uavroute::economics::RewardModel;
use uavroute::evaluate::system_payoff;
use uavroute::scenario::{Scenario, ScenarioConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let scenario = match std::env::args().nth(1) {
        Some(path) => Scenario::load(path)?,
        None => {
            let mut cfg = ScenarioConfig::default();
            cfg.horizon.slots = 10;
            cfg.fleet.destinations = Some(vec![1, 9]);
            cfg.build()?
        }
    };
    let model = RewardModel::new(&scenario)?;
    let sol = solve_crs(&scenario, &model, &CrsOptions::default())?;
    println!("{} states per slot, layers {:?}", sol.states, sol.layer_sizes);
    for (m, r) in sol.routes.iter().enumerate() {
        println!("uav {}: {:?}", m + 1, r.one_based());
    }
    let check = system_payoff(&scenario, &model, &sol.routes)?;
    println!("total payoff {:.4} (re-evaluated {:.4}) in {:.1} ms", sol.total_payoff, check.total, sol.runtime_ms);
    Ok(())
}
