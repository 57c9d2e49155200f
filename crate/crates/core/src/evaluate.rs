//! Common yardstick for every planner: interference-aware system payoff,
//! propulsion energy and energy efficiency of a set of routes.
//!
//! In each slot every hovering UAV transmits. A region hovered by more than
//! one UAV earns nothing; otherwise the UAV earns its reward under the
//! interference of all other hovering UAVs.

use serde::Serialize;

use crate::economics::{propulsion_power, RewardModel};
use crate::error::{Error, Result};
use crate::scenario::Scenario;
use crate::spgraph::{Route, UavKinematics};

/// Per-UAV rewards in one slot; `hovering[m]` is UAV m's region or `None`
/// while in flight.
pub fn slot_rewards(
    model: &RewardModel,
    slot: usize,
    hovering: &[Option<usize>],
    powers: &[f64],
) -> Result<Vec<f64>> {
    let mut out = vec![0.0; hovering.len()];
    for (m, region) in hovering.iter().enumerate() {
        let Some(region) = *region else { continue };
        let shared = hovering
            .iter()
            .enumerate()
            .any(|(n, &r)| n != m && r == Some(region));
        if shared {
            continue;
        }
        let others: Vec<(usize, f64)> = hovering
            .iter()
            .enumerate()
            .filter(|&(n, _)| n != m)
            .filter_map(|(n, &r)| r.map(|r| (r, powers[n])))
            .collect();
        out[m] = model.reward_with_interference(region, slot, powers[m], &others)?;
    }
    Ok(out)
}

/// Propulsion energy (J) of a route: the first slot's hover plus, per edge,
/// flight at cruise speed during idle slots and hover in the landing slot.
pub fn energy_of_route(route: &Route, scenario: &Scenario) -> f64 {
    let u = &scenario.fleet.uavs[route.uav];
    let model = &scenario.physics.power;
    let e = scenario.horizon.slot_seconds;
    let (flight, hover) = (propulsion_power(u.speed, model), propulsion_power(0.0, model));
    let edges: f64 = route
        .vertices
        .windows(2)
        .map(|w| {
            let idle = (w[1].slot - w[0].slot - 1) as f64 * e;
            flight * idle + hover * e
        })
        .sum();
    if route.vertices.is_empty() {
        0.0
    } else {
        hover * e + edges
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SystemPayoff {
    pub total: f64,
    pub per_uav: Vec<f64>,
    pub rewards: Vec<f64>,
    pub costs: Vec<f64>,
    /// Joules per UAV.
    pub energy: Vec<f64>,
}

impl SystemPayoff {
    pub fn total_reward(&self) -> f64 {
        self.rewards.iter().sum()
    }

    pub fn total_energy(&self) -> f64 {
        self.energy.iter().sum()
    }

    /// Mean aggregate user throughput per slot (nats/s) per joule spent.
    pub fn efficiency(&self, scenario: &Scenario) -> f64 {
        let throughput = self.total_reward() / scenario.economics.beta / scenario.slots() as f64;
        throughput / self.total_energy()
    }
}

/// Evaluates one route per UAV (ordered by UAV index).
pub fn system_payoff(scenario: &Scenario, model: &RewardModel, routes: &[Route]) -> Result<SystemPayoff> {
    let m = scenario.uav_count();
    if routes.len() != m {
        return Err(Error::Domain(format!("expected {m} routes, found {}", routes.len())));
    }
    let kins: Vec<UavKinematics> = (0..m).map(|i| UavKinematics::new(scenario, i)).collect();
    for (i, route) in routes.iter().enumerate() {
        if route.uav != i {
            return Err(Error::Domain(format!("route {} belongs to UAV {}", i + 1, route.uav + 1)));
        }
        kins[i].check_route(route)?;
    }
    let powers: Vec<f64> = scenario.fleet.uavs.iter().map(|u| u.tx_power).collect();
    let schedules: Vec<Vec<Option<usize>>> = routes.iter().map(|r| r.schedule(scenario.slots())).collect();
    let mut rewards = vec![0.0; m];
    for slot in 0..scenario.slots() {
        let hovering: Vec<Option<usize>> = schedules.iter().map(|s| s[slot]).collect();
        for (acc, r) in rewards.iter_mut().zip(slot_rewards(model, slot, &hovering, &powers)?) {
            *acc += r;
        }
    }
    let costs: Vec<f64> = routes.iter().zip(&kins).map(|(r, k)| k.route_cost(r)).collect();
    let per_uav: Vec<f64> = rewards.iter().zip(&costs).map(|(r, c)| r - c).collect();
    Ok(SystemPayoff {
        total: per_uav.iter().sum(),
        energy: routes.iter().map(|r| energy_of_route(r, scenario)).collect(),
        per_uav,
        rewards,
        costs,
    })
}
