//! Task rewards at slot 1: interference-free and with one interferer next door.

use uavroute::economics::RewardModel;
use uavroute::scenario::{dbm_to_watts, ScenarioConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let scenario = ScenarioConfig::default().build()?;
    let model = RewardModel::new(&scenario)?;
    let p = dbm_to_watts(26.0);
    println!("{:>6} {:>12} {:>12} {:>10}", "region", "alone", "interfered", "loss");
    for l in 0..scenario.regions() {
        let alone = model.reward_no_interference(l, 0, p)?;
        let nb = scenario.topology.neighbors(l)[0];
        let with = model.reward_with_interference(l, 0, p, &[(nb, p)])?;
        println!("{:>6} {:>12.2} {:>12.2} {:>9.1}%", l + 1, alone, with, 100.0 * (1.0 - with / alone));
    }
    Ok(())
}
