//! Greedy and circular-patrol routes next to the game equilibrium, all
//! scored with the same interference-aware payoff.

use uavroute::baselines::{plan_circular, plan_greedy};
use uavroute::drs::{run_drs, DrsOptions, RouteGame};
use uavroute::economics::RewardModel;
use uavroute::evaluate::system_payoff;
use uavroute::scenario::{Scenario, ScenarioConfig};
use uavroute::spgraph::Route;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let scenario = match std::env::args().nth(1) {
        Some(path) => Scenario::load(path)?,
        None => ScenarioConfig::default().build()?,
    };
    let model = RewardModel::new(&scenario)?;
    let tables = scenario
        .fleet
        .uavs
        .iter()
        .map(|u| model.reward_table(u.tx_power))
        .collect::<Result<Vec<_>, _>>()?;
    let circular = plan_circular(&scenario, None)?;
    println!("patrol cycles {:?}", circular.cycles.iter().map(|c| c.iter().map(|l| l + 1).collect::<Vec<_>>()).collect::<Vec<_>>());
    let game = RouteGame::new(&scenario, &model)?;
    let plans: [(&str, Vec<Route>); 3] = [
        ("greedy", plan_greedy(&scenario, &tables)?),
        ("circular", circular.routes),
        ("game", run_drs(&game, None, &DrsOptions::default())?.profile),
    ];
    for (name, routes) in &plans {
        let pay = system_payoff(&scenario, &model, routes)?;
        println!(
            "{name:>8}: payoff {:>10.2}  energy {:>8.1} kJ  efficiency {:.4e}",
            pay.total,
            pay.total_energy() / 1e3,
            pay.efficiency(&scenario)
        );
    }
    Ok(())
}
