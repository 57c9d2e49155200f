//! Benchmark planners: greedy one-hop (GP) and periodic circular (CP).

use serde::Serialize;

use crate::drs::game_reward;
use crate::error::{Error, Result};
use crate::scenario::Scenario;
use crate::spgraph::{Route, UavKinematics, Vertex};

/// Whether a UAV serving `at` can still be serving its destination in the
/// last slot.
fn can_finish(kin: &UavKinematics, at: Vertex) -> bool {
    let last = kin.slots - 1;
    if at.slot > last {
        return false;
    }
    at.region == kin.destination || (at.slot < last && kin.min_travel_slots(at.region, kin.destination) < last - at.slot)
}

/// Candidate next vertices from `at`: wait in place, or fly to any other
/// region at its earliest arrival slot. Only candidates from which the
/// destination stays reachable are kept.
pub fn greedy_candidates(kin: &UavKinematics, at: Vertex) -> Vec<Vertex> {
    (0..kin.regions)
        .map(|r| {
            let gap = if r == at.region { 0 } else { kin.min_travel_slots(at.region, r) };
            Vertex::new(r, at.slot + 1 + gap)
        })
        .filter(|&v| can_finish(kin, v))
        .collect()
}

/// One greedy decision: the candidate maximizing reward minus edge cost,
/// where a task already claimed by another UAV is worth nothing. Ties go to
/// the lowest region index.
pub fn greedy_step(
    kin: &UavKinematics,
    at: Vertex,
    base_rewards: &[f64],
    claimed_by_others: &[bool],
) -> Result<Vertex> {
    let mut best: Option<(Vertex, f64)> = None;
    for v in greedy_candidates(kin, at) {
        let k = v.slot * kin.regions + v.region;
        let occupancy = if claimed_by_others[k] { 2 } else { 1 };
        let value = game_reward(base_rewards[k], occupancy) - kin.edge_cost(at, v);
        if best.is_none_or(|(_, b)| value > b) {
            best = Some((v, value));
        }
    }
    best.map(|(v, _)| v).ok_or_else(|| {
        Error::Infeasible(format!(
            "UAV {} at {:?} cannot reach region {} by slot {}",
            kin.uav + 1,
            at.one_based(),
            kin.destination + 1,
            kin.slots
        ))
    })
}

/// Greedy plans for the whole fleet. The UAV with the earliest current slot
/// decides next (lowest index on ties), seeing every task claimed so far.
pub fn plan_greedy(scenario: &Scenario, base_rewards: &[Vec<f64>]) -> Result<Vec<Route>> {
    let m = scenario.uav_count();
    let kins: Vec<UavKinematics> = (0..m).map(|u| UavKinematics::new(scenario, u)).collect();
    let (l, t) = (scenario.regions(), scenario.slots());
    let mut claims: Vec<Vec<bool>> = vec![vec![false; l * t]; m];
    let mut routes: Vec<Route> = kins
        .iter()
        .map(|k| Route {
            uav: k.uav,
            vertices: vec![Vertex::new(k.source, 0)],
        })
        .collect();
    for (u, k) in kins.iter().enumerate() {
        if !can_finish(k, Vertex::new(k.source, 0)) {
            return Err(Error::Infeasible(format!(
                "UAV {} cannot reach region {} by slot {t}",
                u + 1,
                k.destination + 1
            )));
        }
        claims[u][k.source] = true;
    }
    loop {
        let next = (0..m)
            .filter(|&u| routes[u].vertices.last().unwrap().slot < t - 1)
            .min_by_key(|&u| (routes[u].vertices.last().unwrap().slot, u));
        let Some(u) = next else { break };
        let at = *routes[u].vertices.last().unwrap();
        let others: Vec<bool> = (0..l * t).map(|k| (0..m).any(|n| n != u && claims[n][k])).collect();
        let v = greedy_step(&kins[u], at, &base_rewards[u], &others)?;
        claims[u][v.slot * l + v.region] = true;
        routes[u].vertices.push(v);
    }
    Ok(routes)
}

/// Route that serves `cycle` (starting at the UAV's source) one slot per
/// stop with minimal travel in between, repeating until the horizon forces
/// the UAV to its destination, where it then hovers.
///
/// Fails when the first pass over the cycle does not fit in the horizon.
pub fn circular_route(kin: &UavKinematics, cycle: &[usize]) -> Result<Route> {
    let mut stops: Vec<usize> = cycle.to_vec();
    if stops.len() > 1 && stops.first() == stops.last() {
        stops.pop();
    }
    if stops.first() != Some(&kin.source) {
        return Err(Error::Domain(format!(
            "cycle for UAV {} must start at its source region {}",
            kin.uav + 1,
            kin.source + 1
        )));
    }
    if let Some(&bad) = stops.iter().find(|&&r| r >= kin.regions) {
        return Err(Error::Domain(format!("cycle visits unknown region {}", bad + 1)));
    }
    let last = kin.slots - 1;
    let mut at = Vertex::new(kin.source, 0);
    if !can_finish(kin, at) {
        return Err(Error::Infeasible(format!(
            "UAV {} cannot reach region {} by slot {}",
            kin.uav + 1,
            kin.destination + 1,
            kin.slots
        )));
    }
    let mut vertices = vec![at];
    let mut visited = 1;
    let mut i = 0;
    loop {
        if at.slot == last {
            break;
        }
        let stop = stops[(i + 1) % stops.len()];
        let gap = if stop == at.region { 0 } else { kin.min_travel_slots(at.region, stop) };
        let next = Vertex::new(stop, at.slot + 1 + gap);
        if !can_finish(kin, next) {
            break;
        }
        at = next;
        vertices.push(at);
        i += 1;
        visited += 1;
    }
    if visited < stops.len() {
        return Err(Error::Infeasible(format!(
            "UAV {} cannot complete its {}-stop cycle within {} slots",
            kin.uav + 1,
            stops.len(),
            kin.slots
        )));
    }
    // Head home, then hover until the end.
    if at.region != kin.destination {
        let arrive = at.slot + 1 + kin.min_travel_slots(at.region, kin.destination);
        at = Vertex::new(kin.destination, arrive);
        vertices.push(at);
    }
    while at.slot < last {
        at = Vertex::new(at.region, at.slot + 1);
        vertices.push(at);
    }
    Ok(Route {
        uav: kin.uav,
        vertices,
    })
}

/// Default cycles: regions sorted by angle around the layout centroid and
/// split into one contiguous sector per UAV. Each cycle starts at the UAV's
/// source and visits its sector nearest-neighbor first, truncated so that
/// one pass fits the horizon.
pub fn default_cycles(scenario: &Scenario) -> Vec<Vec<usize>> {
    let l = scenario.regions();
    let m = scenario.uav_count();
    let centers = &scenario.topology.centers;
    let cx = centers.iter().map(|c| c[0]).sum::<f64>() / l as f64;
    let cy = centers.iter().map(|c| c[1]).sum::<f64>() / l as f64;
    let mut by_angle: Vec<usize> = (0..l).collect();
    by_angle.sort_by(|&a, &b| {
        let ang = |r: usize| (centers[r][1] - cy).atan2(centers[r][0] - cx);
        ang(a).total_cmp(&ang(b)).then(a.cmp(&b))
    });
    (0..m)
        .map(|u| {
            let kin = UavKinematics::new(scenario, u);
            let lo = u * l / m;
            let hi = (u + 1) * l / m;
            let mut pool: Vec<usize> = by_angle[lo..hi].iter().copied().filter(|&r| r != kin.source).collect();
            let mut cycle = vec![kin.source];
            while !pool.is_empty() {
                let cur = *cycle.last().unwrap();
                let (idx, _) = pool
                    .iter()
                    .enumerate()
                    .min_by(|a, b| {
                        scenario
                            .topology
                            .distance(cur, *a.1)
                            .total_cmp(&scenario.topology.distance(cur, *b.1))
                            .then(a.1.cmp(b.1))
                    })
                    .unwrap();
                cycle.push(pool.remove(idx));
            }
            while cycle.len() > 1 && circular_route(&kin, &cycle).is_err() {
                cycle.pop();
            }
            cycle
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct CircularPlan {
    pub cycles: Vec<Vec<usize>>,
    pub routes: Vec<Route>,
}

/// CP routes from explicit cycles, or the default sectors when `None`.
pub fn plan_circular(scenario: &Scenario, cycles: Option<Vec<Vec<usize>>>) -> Result<CircularPlan> {
    let cycles = cycles.unwrap_or_else(|| default_cycles(scenario));
    if cycles.len() != scenario.uav_count() {
        return Err(Error::Domain(format!(
            "{} cycles for {} UAVs",
            cycles.len(),
            scenario.uav_count()
        )));
    }
    let routes = cycles
        .iter()
        .enumerate()
        .map(|(u, c)| circular_route(&UavKinematics::new(scenario, u), c))
        .collect::<Result<_>>()?;
    Ok(CircularPlan { cycles, routes })
}
