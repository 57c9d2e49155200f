//! Per-user rate along a line away from a UAV, alone and with a
//! co-channel UAV hovering over the neighboring region.

use uavroute::channel::{Channel, Interferer};
use uavroute::scenario::{dbm_to_watts, ScenarioConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let scenario = ScenarioConfig::default().build()?;
    let ch = Channel::from_scenario(&scenario);
    let p = dbm_to_watts(26.0);
    let uav = scenario.topology.center(4);
    let other = scenario.topology.center(scenario.topology.neighbors(4)[0]);
    let interferer = [Interferer { position: other, power: p }];
    println!("cone radius {:.1} m", ch.cone_radius());
    println!("{:>8} {:>14} {:>14}", "offset_m", "alone", "interfered");
    for step in 0..=10 {
        let d = 15.0 * step as f64;
        let user = [uav[0] + d, uav[1]];
        let g = ch.gain_between(uav, user);
        println!(
            "{:>8.1} {:>14.4} {:>14.4}",
            d,
            ch.user_rate(g, p, &[], user),
            ch.user_rate(g, p, &interferer, user)
        );
    }
    Ok(())
}
