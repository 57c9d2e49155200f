//! Centralized route selection: exact multi-UAV planning over the joint
//! state graph.
//!
//! A joint state assigns every UAV either a region it serves or "moving".
//! Feasibility of landing depends on where a moving UAV took off and how
//! long it has been airborne, so the search runs over
//! `(state vector, last region, moving slots)` per UAV. Moving counters are
//! capped at the largest minimum travel time, beyond which every landing is
//! feasible; this keeps the search finite without losing optimality.

use std::collections::HashMap;
use std::time::Instant;

use serde::Serialize;

use crate::economics::{CostRates, RewardModel};
use crate::error::{Error, Result};
use crate::evaluate::{slot_rewards, system_payoff};
use crate::scenario::Scenario;
use crate::spgraph::{build_graph, Route, UavKinematics, Vertex};

/// `q_m`: the region UAV m serves, or `None` while moving.
pub type StateVector = Vec<Option<usize>>;

/// Closed-form number of state vectors with pairwise distinct regions:
/// `Σ_j C(M,j) · L!/(L−(M−j))!` over `j` moving UAVs.
pub fn state_count(uavs: usize, regions: usize) -> Option<u128> {
    let mut total: u128 = 0;
    for moving in 0..=uavs {
        let serving = uavs - moving;
        if serving > regions {
            continue;
        }
        let mut choose: u128 = 1;
        for i in 0..moving {
            choose = choose.checked_mul((uavs - i) as u128)? / (i as u128 + 1);
        }
        let mut falling: u128 = 1;
        for i in 0..serving {
            falling = falling.checked_mul((regions - i) as u128)?;
        }
        total = total.checked_add(choose.checked_mul(falling)?)?;
    }
    Some(total)
}

fn check_cap(uavs: usize, regions: usize, cap: u128) -> Result<u128> {
    match state_count(uavs, regions) {
        Some(b) if b <= cap => Ok(b),
        b => Err(Error::Resource(format!(
            "{} joint states for {uavs} UAVs over {regions} regions exceed the cap of {cap}; \
             use the distributed solver for fleets this size",
            b.map_or_else(|| "more than 2^128".to_string(), |b| b.to_string())
        ))),
    }
}

/// All valid state vectors in lexicographic order (`None` first).
pub fn enumerate_states(uavs: usize, regions: usize, cap: u128) -> Result<Vec<StateVector>> {
    if uavs == 0 || regions == 0 {
        return Err(Error::Domain("need at least one UAV and one region".into()));
    }
    check_cap(uavs, regions, cap)?;
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(uavs);
    fn rec(uavs: usize, regions: usize, cur: &mut StateVector, out: &mut Vec<StateVector>) {
        if cur.len() == uavs {
            out.push(cur.clone());
            return;
        }
        for choice in std::iter::once(None).chain((0..regions).map(Some)) {
            if choice.is_some() && cur.contains(&choice) {
                continue;
            }
            cur.push(choice);
            rec(uavs, regions, cur, out);
            cur.pop();
        }
    }
    rec(uavs, regions, &mut cur, &mut out);
    Ok(out)
}

/// Last served region `q̄_m` and consecutive moving slots `Ī_m` per UAV.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tracker {
    pub last: Vec<usize>,
    pub idle: Vec<usize>,
}

impl Tracker {
    pub fn at_sources(kins: &[UavKinematics]) -> Self {
        Tracker {
            last: kins.iter().map(|k| k.source).collect(),
            idle: vec![0; kins.len()],
        }
    }
}

/// One-slot transition to `next`: returns the updated trackers when every
/// UAV that lands can reach its region from `q̄_m` within `Ī_m` idle slots.
pub fn feasible_edge(kins: &[UavKinematics], tracker: &Tracker, next: &[Option<usize>]) -> Option<Tracker> {
    let mut out = tracker.clone();
    for (m, q) in next.iter().enumerate() {
        match *q {
            Some(region) => {
                if kins[m].min_travel_slots(tracker.last[m], region) > tracker.idle[m] {
                    return None;
                }
                out.last[m] = region;
                out.idle[m] = 0;
            }
            None => out.idle[m] += 1,
        }
    }
    Some(out)
}

/// `Υ(q, t)`: summed rewards of a joint state, with interference among the
/// serving UAVs.
pub fn joint_reward(model: &RewardModel, state: &[Option<usize>], slot: usize, powers: &[f64]) -> Result<f64> {
    Ok(slot_rewards(model, slot, state, powers)?.iter().sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Status {
    Serving(usize),
    Moving { from: usize, idle: usize },
}

impl Status {
    fn region(self) -> Option<usize> {
        match self {
            Status::Serving(r) => Some(r),
            Status::Moving { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrsOptions {
    /// Upper bound on `B · T` and on search nodes per slot.
    pub state_cap: u128,
}

impl Default for CrsOptions {
    fn default() -> Self {
        CrsOptions { state_cap: 1_000_000 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CrsSolution {
    pub routes: Vec<Route>,
    /// Objective value `Σ Υ − Σ Φ` of the optimal joint route.
    pub total_payoff: f64,
    /// Number of state vectors `B` per slot.
    pub states: u128,
    /// Search nodes expanded per slot.
    pub layer_sizes: Vec<usize>,
    pub runtime_ms: f64,
}

struct Layer {
    keys: Vec<Vec<Status>>,
    index: HashMap<Vec<Status>, usize>,
    value: Vec<f64>,
    pred: Vec<usize>,
}

impl Layer {
    fn new() -> Self {
        Layer {
            keys: Vec::new(),
            index: HashMap::new(),
            value: Vec::new(),
            pred: Vec::new(),
        }
    }

    fn offer(&mut self, key: Vec<Status>, value: f64, pred: usize) {
        match self.index.get(&key) {
            Some(&i) => {
                if value > self.value[i] {
                    self.value[i] = value;
                    self.pred[i] = pred;
                }
            }
            None => {
                self.index.insert(key.clone(), self.keys.len());
                self.keys.push(key);
                self.value.push(value);
                self.pred.push(pred);
            }
        }
    }
}

/// Optimal joint routes for the whole fleet.
pub fn solve_crs(scenario: &Scenario, model: &RewardModel, opts: &CrsOptions) -> Result<CrsSolution> {
    let started = Instant::now();
    let (m, l, t) = (scenario.uav_count(), scenario.regions(), scenario.slots());
    let b = check_cap(m, l, opts.state_cap)?;
    if b * t as u128 > opts.state_cap {
        return Err(Error::Resource(format!(
            "{b} joint states over {t} slots exceed the cap of {}; use the distributed solver",
            opts.state_cap
        )));
    }
    let kins: Vec<UavKinematics> = (0..m).map(|i| UavKinematics::new(scenario, i)).collect();
    let powers: Vec<f64> = scenario.fleet.uavs.iter().map(|u| u.tx_power).collect();
    let rates: Vec<CostRates> = kins
        .iter()
        .map(|k| {
            if scenario.economics.legacy_crs_cost {
                CostRates {
                    flight_power: 1.0,
                    hover_power: 1.0,
                    ..k.rates
                }
            } else {
                k.rates
            }
        })
        .collect();
    let move_charge: Vec<f64> = rates.iter().map(|r| r.gamma_move * r.flight_power * r.slot_seconds).collect();
    let hover_charge: Vec<f64> = rates.iter().map(|r| r.hover_charge()).collect();
    let idle_cap: Vec<usize> = kins
        .iter()
        .map(|k| {
            (0..l)
                .flat_map(|a| (0..l).map(move |b| (a, b)))
                .map(|(a, b)| k.min_travel_slots(a, b))
                .max()
                .unwrap_or(0)
        })
        .collect();

    // Can a UAV in `status` at `slot` still be serving its destination at T?
    let can_finish = |u: usize, status: Status, slot: usize| -> bool {
        let k = &kins[u];
        let left = t - 1 - slot;
        match status {
            Status::Serving(r) => r == k.destination || (left >= 1 && k.min_travel_slots(r, k.destination) < left),
            Status::Moving { from, idle } => left >= 1 && k.min_travel_slots(from, k.destination) < idle + left,
        }
    };

    let mut reward_cache: HashMap<(usize, StateVector), f64> = HashMap::new();
    let mut reward_of = |state: &[Status], slot: usize| -> Result<f64> {
        let q: StateVector = state.iter().map(|s| s.region()).collect();
        if let Some(&v) = reward_cache.get(&(slot, q.clone())) {
            return Ok(v);
        }
        let v = joint_reward(model, &q, slot, &powers)?;
        reward_cache.insert((slot, q), v);
        Ok(v)
    };

    let start: Vec<Status> = kins.iter().map(|k| Status::Serving(k.source)).collect();
    let mut layers: Vec<Layer> = Vec::with_capacity(t);
    let mut first = Layer::new();
    if start.iter().enumerate().all(|(u, &s)| can_finish(u, s, 0)) {
        let virtual_charge: f64 = kins
            .iter()
            .zip(&hover_charge)
            .map(|(k, &h)| if k.virtual_charge() > 0.0 { h } else { 0.0 })
            .sum();
        first.offer(start.clone(), reward_of(&start, 0)? - virtual_charge, usize::MAX);
    }
    layers.push(first);

    for slot in 0..t - 1 {
        let next_slot = slot + 1;
        let last = next_slot == t - 1;
        let mut next = Layer::new();
        let cur = &layers[slot];
        let mut order: Vec<usize> = (0..cur.keys.len()).collect();
        order.sort_by(|&a, &b| cur.keys[a].cmp(&cur.keys[b]));
        for &node in &order {
            let key = &cur.keys[node];
            // Per-UAV successor statuses with their transition costs.
            let options: Vec<Vec<(Status, f64)>> = key
                .iter()
                .enumerate()
                .map(|(u, &s)| {
                    let (from, idle) = match s {
                        Status::Serving(r) => (r, 0),
                        Status::Moving { from, idle } => (from, idle),
                    };
                    let mut opts = Vec::new();
                    for r in 0..l {
                        if kins[u].min_travel_slots(from, r) <= idle {
                            let st = Status::Serving(r);
                            if can_finish(u, st, next_slot) {
                                opts.push((st, hover_charge[u]));
                            }
                        }
                    }
                    if !last {
                        let st = Status::Moving {
                            from,
                            idle: (idle + 1).min(idle_cap[u].max(1)),
                        };
                        if can_finish(u, st, next_slot) {
                            opts.push((st, move_charge[u]));
                        }
                    }
                    opts
                })
                .collect();
            if options.iter().any(Vec::is_empty) {
                continue;
            }
            let mut pick = vec![0usize; m];
            loop {
                let succ: Vec<Status> = (0..m).map(|u| options[u][pick[u]].0).collect();
                let distinct = last || {
                    let regions: Vec<usize> = succ.iter().filter_map(|s| s.region()).collect();
                    (0..regions.len()).all(|i| !regions[i + 1..].contains(&regions[i]))
                };
                if distinct {
                    let cost: f64 = (0..m).map(|u| options[u][pick[u]].1).sum();
                    let value = cur.value[node] + reward_of(&succ, next_slot)? - cost;
                    next.offer(succ, value, node);
                }
                // Odometer over the per-UAV option lists.
                let mut u = m;
                loop {
                    if u == 0 {
                        break;
                    }
                    u -= 1;
                    pick[u] += 1;
                    if pick[u] < options[u].len() {
                        break;
                    }
                    pick[u] = 0;
                }
                if pick.iter().all(|&p| p == 0) {
                    break;
                }
            }
        }
        if next.keys.len() as u128 > opts.state_cap {
            return Err(Error::Resource(format!(
                "{} search nodes in slot {} exceed the cap of {}",
                next.keys.len(),
                next_slot + 1,
                opts.state_cap
            )));
        }
        layers.push(next);
    }

    let goal: Vec<Status> = kins.iter().map(|k| Status::Serving(k.destination)).collect();
    let final_layer = &layers[t - 1];
    let Some(&end) = final_layer.index.get(&goal) else {
        return Err(Error::Infeasible(format!(
            "no joint route brings every UAV to its destination by slot {t}"
        )));
    };
    let total_payoff = final_layer.value[end];
    let mut vertices: Vec<Vec<Vertex>> = vec![Vec::new(); m];
    let mut node = end;
    for slot in (0..t).rev() {
        for (u, s) in layers[slot].keys[node].iter().enumerate() {
            if let Status::Serving(r) = *s {
                vertices[u].push(Vertex::new(r, slot));
            }
        }
        node = layers[slot].pred[node];
    }
    let routes = vertices
        .into_iter()
        .enumerate()
        .map(|(uav, mut v)| {
            v.reverse();
            Route { uav, vertices: v }
        })
        .collect();
    Ok(CrsSolution {
        routes,
        total_payoff,
        states: b,
        layer_sizes: layers.iter().map(|x| x.keys.len()).collect(),
        runtime_ms: started.elapsed().as_secs_f64() * 1e3,
    })
}

/// Exhaustive joint search: every combination of per-UAV feasible routes
/// that never shares a region between the first and last slot, scored by
/// the system payoff. For verification on small instances.
pub fn brute_force_joint(scenario: &Scenario, model: &RewardModel, limit: usize) -> Result<(Vec<Route>, f64)> {
    let m = scenario.uav_count();
    let zero = vec![0.0; scenario.regions() * scenario.slots()];
    let per_uav: Vec<Vec<Route>> = (0..m)
        .map(|u| build_graph(scenario, zero.clone(), u)?.enumerate_routes(limit))
        .collect::<Result<_>>()?;
    let t = scenario.slots();
    let mut best: Option<(Vec<Route>, f64)> = None;
    let mut pick = vec![0usize; m];
    if per_uav.iter().any(Vec::is_empty) {
        return Err(Error::Infeasible("some UAV has no feasible route".into()));
    }
    loop {
        let routes: Vec<Route> = (0..m).map(|u| per_uav[u][pick[u]].clone()).collect();
        let schedules: Vec<Vec<Option<usize>>> = routes.iter().map(|r| r.schedule(t)).collect();
        let clash = (1..t.saturating_sub(1)).any(|slot| {
            (0..m).any(|a| (a + 1..m).any(|b| schedules[a][slot].is_some() && schedules[a][slot] == schedules[b][slot]))
        });
        if !clash {
            let value = system_payoff(scenario, model, &routes)?.total;
            if best.as_ref().is_none_or(|(_, v)| value > *v) {
                best = Some((routes, value));
            }
        }
        let mut u = m;
        loop {
            if u == 0 {
                break;
            }
            u -= 1;
            pick[u] += 1;
            if pick[u] < per_uav[u].len() {
                break;
            }
            pick[u] = 0;
        }
        if pick.iter().all(|&p| p == 0) {
            break;
        }
    }
    best.ok_or_else(|| Error::Infeasible("no collision-free joint route".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::ScenarioConfig;
    use crate::spgraph::shortest_route;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn closed_form_counts() {
        assert_eq!(state_count(1, 9), Some(10));
        assert_eq!(state_count(2, 9), Some(91));
        assert_eq!(state_count(2, 2), Some(7));
        for m in 1..=3 {
            for l in 1..=9 {
                let states = enumerate_states(m, l, 1_000_000).unwrap();
                assert_eq!(states.len() as u128, state_count(m, l).unwrap());
                for q in &states {
                    let r: Vec<_> = q.iter().flatten().collect();
                    assert!((0..r.len()).all(|i| !r[i + 1..].contains(&r[i])));
                }
            }
        }
    }

    #[test]
    fn two_by_two_hand_enumeration() {
        let mut got = enumerate_states(2, 2, 100).unwrap();
        got.sort();
        let mut want: Vec<StateVector> = [(0, 0), (0, 1), (0, 2), (1, 0), (2, 0), (1, 2), (2, 1)]
            .iter()
            .map(|&(a, b): &(usize, usize)| vec![a.checked_sub(1), b.checked_sub(1)])
            .collect();
        want.sort();
        assert_eq!(got, want);
    }

    #[test]
    fn cap_is_enforced() {
        let err = enumerate_states(4, 36, 1_000_000).unwrap_err();
        assert!(matches!(err, Error::Resource(ref m) if m.contains("distributed")));
    }

    fn scenario(uavs: usize, regions: usize, slots: usize, speed_kmh: f64) -> Scenario {
        let mut cfg = ScenarioConfig::default();
        cfg.topology.regions = regions;
        cfg.horizon.slots = slots;
        cfg.fleet.uav_count = uavs;
        cfg.fleet.speed_kmh = speed_kmh;
        cfg.fleet.control_region = 1;
        cfg.demand.initial_counts = Some((0..regions).map(|i| 40.0 + 10.0 * i as f64).collect());
        cfg.build().unwrap()
    }

    #[test]
    fn trackers_follow_moving_stretches() {
        let s = scenario(2, 9, 4, 20.0);
        let kins: Vec<_> = (0..2).map(|u| UavKinematics::new(&s, u)).collect();
        let tr = Tracker {
            last: vec![2, 4],
            idle: vec![0, 0],
        };
        let stay = feasible_edge(&kins, &tr, &[Some(2), Some(4)]).unwrap();
        assert_eq!(stay.idle, vec![0, 0]);
        let moving = feasible_edge(&kins, &tr, &[None, Some(4)]).unwrap();
        assert_eq!(moving, Tracker { last: vec![2, 4], idle: vec![1, 0] });
        let one_slot = kins[0].min_travel_slots(2, 0) <= 1;
        assert_eq!(feasible_edge(&kins, &moving, &[Some(0), Some(4)]).is_some(), one_slot);
        // Opposite corner of the 3×3 layout is out of reach without idling.
        assert!(feasible_edge(&kins, &tr, &[Some(6), Some(4)]).is_none());
    }

    #[test]
    fn joint_reward_cases() {
        let s = scenario(2, 9, 4, 70.0);
        let model = RewardModel::new(&s).unwrap();
        let p = vec![s.fleet.uavs[0].tx_power; 2];
        assert_eq!(joint_reward(&model, &[None, None], 0, &p).unwrap(), 0.0);
        let single = joint_reward(&model, &[Some(3), None], 1, &p).unwrap();
        assert_eq!(single, model.reward_no_interference(3, 1, p[0]).unwrap());
        let pair = joint_reward(&model, &[Some(3), Some(4)], 1, &p).unwrap();
        let apart = model.reward_no_interference(3, 1, p[0]).unwrap() + model.reward_no_interference(4, 1, p[1]).unwrap();
        assert!(pair < apart);
    }

    #[test]
    fn single_uav_matches_shortest_path() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let mut s = scenario(1, 9, rng.random_range(2..=6), rng.random_range(15.0..80.0));
            s.fleet.uavs[0].source = rng.random_range(0..9);
            s.fleet.uavs[0].destination = rng.random_range(0..9);
            let model = RewardModel::new(&s).unwrap();
            let p = s.fleet.uavs[0].tx_power;
            let g = build_graph(&s, model.reward_table(p).unwrap(), 0).unwrap();
            match (shortest_route(&g), solve_crs(&s, &model, &CrsOptions::default())) {
                (Ok((route, payoff)), Ok(sol)) => {
                    assert!((sol.total_payoff - payoff).abs() < 1e-9);
                    assert_eq!(sol.routes[0], route);
                }
                (Err(_), Err(_)) => {}
                (a, b) => panic!("disagree: {a:?} vs {b:?}"),
            }
        }
    }

    #[test]
    fn matches_joint_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut compared = 0;
        while compared < 10 {
            let l = rng.random_range(2..=3);
            let mut s = scenario(2, l, rng.random_range(2..=4), rng.random_range(10.0..80.0));
            for u in 0..2 {
                s.fleet.uavs[u].source = rng.random_range(0..l);
                s.fleet.uavs[u].destination = rng.random_range(0..l);
            }
            let model = RewardModel::new(&s).unwrap();
            let (sol, best) = match (
                solve_crs(&s, &model, &CrsOptions::default()),
                brute_force_joint(&s, &model, 100_000),
            ) {
                (Ok(sol), Ok((_, best))) => (sol, best),
                (Err(Error::Infeasible(_)), Err(Error::Infeasible(_))) => continue,
                (a, b) => panic!("disagree: {a:?} vs {b:?}"),
            };
            compared += 1;
            assert!((sol.total_payoff - best).abs() < 1e-9, "{} vs {best}", sol.total_payoff);
            let recomputed = system_payoff(&s, &model, &sol.routes).unwrap().total;
            assert!((recomputed - sol.total_payoff).abs() < 1e-9);
        }
    }
}
