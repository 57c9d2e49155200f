//! Best-response dynamics on a 36-region map, printing the potential after
//! every accepted switch.
//!
//! `cargo run --release --example route_game -- [random]`

use uavroute::drs::{run_drs, DrsOptions, RouteGame, UpdateOrder};
use uavroute::economics::RewardModel;
use uavroute::scenario::ScenarioConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let order = match std::env::args().nth(1).as_deref() {
        Some(s) => s.parse::<UpdateOrder>()?,
        None => UpdateOrder::RoundRobin,
    };
    let mut cfg = ScenarioConfig::default();
    cfg.topology.regions = 36;
    cfg.fleet.uav_count = 4;
    cfg.fleet.speed_kmh = 50.0;
    cfg.demand.initial_counts = Some((0..36).map(|i| 20.0 + (i * 37 % 80) as f64).collect());
    let scenario = cfg.build()?;
    let model = RewardModel::new(&scenario)?;
    let game = RouteGame::new(&scenario, &model)?;
    let out = run_drs(&game, None, &DrsOptions { order, seed: 7, ..DrsOptions::default() })?;
    println!("initial potential {:.2}", out.potential_trace[0]);
    for s in &out.switches {
        println!(
            "round {:>2} uav {} : {:>10.2} -> {:>10.2}  potential {:.2}",
            s.round,
            s.uav + 1,
            s.payoff_before,
            s.payoff_after,
            s.potential_after
        );
    }
    println!("converged after {} rounds, equilibrium: {}", out.rounds, game.is_nash(&out.profile)?);
    Ok(())
}
