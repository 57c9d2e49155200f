//! Distributed route selection as a potential game.
//!
//! Each UAV picks a feasible route. A task earns its interference-free
//! reward only when exactly one UAV serves it. Players take turns playing a
//! best response (the single-UAV shortest path with tasks held by others
//! zeroed) and switch only on strict improvement. With equal transmit powers
//! the game has an exact potential, so the dynamics stop at a pure Nash
//! equilibrium.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::economics::RewardModel;
use crate::error::{Error, Result};
use crate::scenario::Scenario;
use crate::spgraph::{Route, TrajectoryGraph, UavKinematics};

/// `ϱ_k(z)`: the base reward when exactly one UAV serves the task.
pub fn game_reward(base: f64, occupancy: usize) -> f64 {
    if occupancy == 1 {
        base
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UpdateOrder {
    #[default]
    RoundRobin,
    /// Fresh seeded shuffle of the players every round.
    Random,
}

impl std::str::FromStr for UpdateOrder {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "roundrobin" | "round-robin" => Ok(UpdateOrder::RoundRobin),
            "random" => Ok(UpdateOrder::Random),
            _ => Err(Error::config("order", format!("unknown update order `{s}`"))),
        }
    }
}

/// The game: per-UAV graphs and interference-free reward tables.
#[derive(Debug, Clone)]
pub struct RouteGame {
    regions: usize,
    slots: usize,
    /// `base[m][slot * L + region]`.
    base: Vec<Vec<f64>>,
    graphs: Vec<TrajectoryGraph>,
}

impl RouteGame {
    pub fn new(scenario: &Scenario, model: &RewardModel) -> Result<Self> {
        let mut tables: Vec<(f64, Vec<f64>)> = Vec::new();
        let mut base = Vec::with_capacity(scenario.uav_count());
        for u in &scenario.fleet.uavs {
            // UAVs sharing a transmit power share a table.
            let table = match tables.iter().find(|(p, _)| *p == u.tx_power) {
                Some((_, t)) => t.clone(),
                None => {
                    let t = model.reward_table(u.tx_power)?;
                    tables.push((u.tx_power, t.clone()));
                    t
                }
            };
            base.push(table);
        }
        Self::from_tables(scenario, base)
    }

    /// Game with explicit per-UAV reward tables indexed `slot * L + region`.
    pub fn from_tables(scenario: &Scenario, base: Vec<Vec<f64>>) -> Result<Self> {
        let graphs = base
            .iter()
            .enumerate()
            .map(|(m, b)| TrajectoryGraph::new(UavKinematics::new(scenario, m), b.clone()))
            .collect::<Result<_>>()?;
        Ok(RouteGame {
            regions: scenario.regions(),
            slots: scenario.slots(),
            base,
            graphs,
        })
    }

    pub fn players(&self) -> usize {
        self.base.len()
    }

    pub fn base_reward(&self, uav: usize, index: usize) -> f64 {
        self.base[uav][index]
    }

    pub fn kinematics(&self, uav: usize) -> &UavKinematics {
        self.graphs[uav].kinematics()
    }

    /// `z_k` for every task.
    pub fn occupancy(&self, profile: &[Route]) -> Vec<usize> {
        let mut z = vec![0; self.regions * self.slots];
        for r in profile {
            for v in &r.vertices {
                z[v.slot * self.regions + v.region] += 1;
            }
        }
        z
    }

    /// `Ũ_m`: own rewards under the occupancy map minus own route cost.
    pub fn player_payoff(&self, uav: usize, profile: &[Route]) -> f64 {
        let z = self.occupancy(profile);
        self.payoff_with(uav, &profile[uav], &z)
    }

    fn payoff_with(&self, uav: usize, route: &Route, z: &[usize]) -> f64 {
        let reward: f64 = route
            .vertices
            .iter()
            .map(|v| {
                let k = v.slot * self.regions + v.region;
                game_reward(self.base[uav][k], z[k])
            })
            .sum();
        reward - self.kinematics(uav).route_cost(route)
    }

    /// `Ψ`: each occupied task counts its single-occupant reward once, minus
    /// every route's cost. With unequal powers the lowest-index occupant's
    /// reward is used and `Ψ` is no longer an exact potential.
    pub fn potential(&self, profile: &[Route]) -> f64 {
        let z = self.occupancy(profile);
        let mut counted = vec![false; z.len()];
        let mut total = 0.0;
        for (m, r) in profile.iter().enumerate() {
            for v in &r.vertices {
                let k = v.slot * self.regions + v.region;
                if !counted[k] {
                    counted[k] = true;
                    total += self.base[m][k];
                }
            }
        }
        total - profile.iter().enumerate().map(|(m, r)| self.kinematics(m).route_cost(r)).sum::<f64>()
    }

    /// Best response of `uav` to the others' routes in `profile`, with its
    /// payoff against them.
    pub fn best_response(&self, uav: usize, profile: &[Route]) -> Result<(Route, f64)> {
        let mut rewards = self.base[uav].clone();
        for (n, r) in profile.iter().enumerate() {
            if n == uav {
                continue;
            }
            for v in &r.vertices {
                rewards[v.slot * self.regions + v.region] = 0.0;
            }
        }
        self.graphs[uav].shortest_route_with(&rewards)
    }

    /// Cost-minimal route per UAV, ignoring rewards.
    pub fn cheapest_profile(&self) -> Result<Vec<Route>> {
        (0..self.players())
            .map(|m| {
                Ok(self.graphs[m].shortest_route_with(&vec![0.0; self.regions * self.slots])?.0)
            })
            .collect()
    }

    /// Whether no player can strictly improve by deviating.
    pub fn is_nash(&self, profile: &[Route]) -> Result<bool> {
        for m in 0..self.players() {
            let current = self.player_payoff(m, profile);
            let (_, best) = self.best_response(m, profile)?;
            if best > current + improvement_tolerance(current) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

fn improvement_tolerance(current: f64) -> f64 {
    1e-9 * current.abs().max(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DrsOptions {
    pub order: UpdateOrder,
    pub seed: u64,
    pub max_rounds: usize,
}

impl Default for DrsOptions {
    fn default() -> Self {
        DrsOptions {
            order: UpdateOrder::RoundRobin,
            seed: 0,
            max_rounds: 10_000,
        }
    }
}

/// One accepted strategy switch.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Switch {
    pub round: usize,
    pub uav: usize,
    pub payoff_before: f64,
    pub payoff_after: f64,
    pub potential_after: f64,
    /// Every UAV's game payoff after the switch.
    pub payoffs: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DrsOutcome {
    pub profile: Vec<Route>,
    pub payoffs: Vec<f64>,
    /// Game payoffs of the starting profile.
    pub initial_payoffs: Vec<f64>,
    /// `Ψ` of the initial profile, then after every accepted switch.
    pub potential_trace: Vec<f64>,
    /// Per-UAV game payoffs at the end of every round.
    pub payoff_trace: Vec<Vec<f64>>,
    pub switches: Vec<Switch>,
    /// Rounds run, counting the final round without changes.
    pub rounds: usize,
}

/// Best-response dynamics from `initial` (or the cheapest profile).
pub fn run_drs(game: &RouteGame, initial: Option<Vec<Route>>, opts: &DrsOptions) -> Result<DrsOutcome> {
    let mut profile = match initial {
        Some(p) => p,
        None => game.cheapest_profile()?,
    };
    if profile.len() != game.players() {
        return Err(Error::Domain(format!(
            "initial profile has {} routes for {} UAVs",
            profile.len(),
            game.players()
        )));
    }
    for (m, r) in profile.iter().enumerate() {
        game.kinematics(m).check_route(r)?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut order: Vec<usize> = (0..game.players()).collect();
    let initial_payoffs: Vec<f64> = (0..game.players()).map(|m| game.player_payoff(m, &profile)).collect();
    let mut potential_trace = vec![game.potential(&profile)];
    let mut payoff_trace = Vec::new();
    let mut switches = Vec::new();
    for round in 1..=opts.max_rounds {
        if opts.order == UpdateOrder::Random {
            order.shuffle(&mut rng);
        }
        let mut changed = false;
        for &m in &order {
            let current = game.player_payoff(m, &profile);
            let (route, best) = game.best_response(m, &profile)?;
            if route != profile[m] && best > current + improvement_tolerance(current) {
                profile[m] = route;
                changed = true;
                let psi = game.potential(&profile);
                potential_trace.push(psi);
                switches.push(Switch {
                    round,
                    uav: m,
                    payoff_before: current,
                    payoff_after: best,
                    potential_after: psi,
                    payoffs: (0..game.players()).map(|n| game.player_payoff(n, &profile)).collect(),
                });
            }
        }
        payoff_trace.push((0..game.players()).map(|m| game.player_payoff(m, &profile)).collect());
        if !changed {
            return Ok(DrsOutcome {
                payoffs: (0..game.players()).map(|m| game.player_payoff(m, &profile)).collect(),
                profile,
                initial_payoffs,
                potential_trace,
                payoff_trace,
                switches,
                rounds: round,
            });
        }
    }
    Err(Error::NoConvergence {
        rounds: opts.max_rounds,
    })
}
