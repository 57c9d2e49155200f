//! Optimal route of one UAV on its trajectory graph, cross-checked against
//! Bellman-Ford on the graph with the virtual source.

use uavroute::economics::RewardModel;
use uavroute::scenario::{Scenario, ScenarioConfig};
use uavroute::spgraph::{build_graph, convert, shortest_route};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let scenario = match std::env::args().nth(1) {
        Some(path) => Scenario::load(path)?,
        None => {
            let mut cfg = ScenarioConfig::default();
            cfg.fleet.uav_count = 1;
            cfg.fleet.destinations = Some(vec![7]);
            cfg.demand.initial_counts = Some(vec![10.0, 10.0, 10.0, 10.0, 10.0, 10.0, 10.0, 80.0, 30.0]);
            cfg.build()?
        }
    };
    let model = RewardModel::new(&scenario)?;
    let rewards = model.reward_table(scenario.fleet.uavs[0].tx_power)?;
    let graph = build_graph(&scenario, rewards, 0)?;
    let (route, payoff) = shortest_route(&graph)?;
    let converted = convert(&graph);
    println!("{} vertices, {} edges", converted.vertex_count(), converted.edge_count());
    println!("route {:?}", route.one_based());
    println!("payoff {payoff:.4}, bellman-ford {:.4}", converted.bellman_ford_payoff()?);
    Ok(())
}
