//! Single-UAV time-expanded trajectory graph and its exact shortest-path
//! solver.
//!
//! Vertices are `(region, slot)` points, zero-based, stored at index
//! `slot * L + region`. An edge `(l,t) → (l',t')` exists when `t' > t` and the
//! flight time between the two centers fits in the `t' − t − 1` idle slots.
//! Rewards live on vertices; the converted graph moves them onto incoming
//! edges (`w = c − ρ(head)`) and adds a virtual root `Ω` with one edge into
//! `(source, 0)`.

use petgraph::algo::bellman_ford;
use petgraph::graph::{DiGraph, NodeIndex};
use serde::{Deserialize, Serialize};

use crate::economics::CostRates;
use crate::error::{Error, Result};
use crate::scenario::Scenario;

/// A `(region, slot)` point, zero-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Vertex {
    pub region: usize,
    pub slot: usize,
}

impl Vertex {
    pub fn new(region: usize, slot: usize) -> Self {
        Vertex { region, slot }
    }

    /// `[l, t]` with one-based region and slot.
    pub fn one_based(&self) -> [usize; 2] {
        [self.region + 1, self.slot + 1]
    }
}

/// The vertices a UAV serves, in time order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Route {
    pub uav: usize,
    pub vertices: Vec<Vertex>,
}

impl Route {
    /// Region served at `slot`, or `None` while in flight.
    pub fn region_at(&self, slot: usize) -> Option<usize> {
        self.vertices
            .binary_search_by_key(&slot, |v| v.slot)
            .ok()
            .map(|i| self.vertices[i].region)
    }

    /// Hovering region per slot over a horizon of `slots`.
    pub fn schedule(&self, slots: usize) -> Vec<Option<usize>> {
        let mut out = vec![None; slots];
        for v in &self.vertices {
            out[v.slot] = Some(v.region);
        }
        out
    }

    pub fn one_based(&self) -> Vec<[usize; 2]> {
        self.vertices.iter().map(Vertex::one_based).collect()
    }
}

/// Whether a UAV at `speed` can cover `distance` within `idle_slots` slots.
pub fn flight_fits(distance: f64, speed: f64, idle_slots: usize, slot_seconds: f64) -> bool {
    distance / speed <= idle_slots as f64 * slot_seconds
}

/// Per-UAV motion limits and cost rates over a scenario.
#[derive(Debug, Clone)]
pub struct UavKinematics {
    pub uav: usize,
    pub regions: usize,
    pub slots: usize,
    pub source: usize,
    pub destination: usize,
    pub rates: CostRates,
    /// `min_gap[a * L + b]`: fewest idle slots needed to fly `a → b`.
    min_gap: Vec<usize>,
    /// Hover charge carried by the virtual edge (zero in literal mode).
    virtual_charge: f64,
}

impl UavKinematics {
    pub fn new(scenario: &Scenario, uav: usize) -> Self {
        let l = scenario.regions();
        let u = &scenario.fleet.uavs[uav];
        let e = scenario.horizon.slot_seconds;
        let mut min_gap = vec![0; l * l];
        for a in 0..l {
            for b in 0..l {
                let d = scenario.topology.distance(a, b);
                let mut g = (d / u.speed / e).ceil().max(0.0) as usize;
                while g > 0 && flight_fits(d, u.speed, g - 1, e) {
                    g -= 1;
                }
                while !flight_fits(d, u.speed, g, e) {
                    g += 1;
                }
                min_gap[a * l + b] = g;
            }
        }
        let rates = CostRates::for_uav(scenario, uav);
        UavKinematics {
            uav,
            regions: l,
            slots: scenario.slots(),
            source: u.source,
            destination: u.destination,
            virtual_charge: if scenario.economics.literal_virtual_edge {
                0.0
            } else {
                rates.hover_charge()
            },
            rates,
            min_gap,
        }
    }

    pub fn min_travel_slots(&self, from: usize, to: usize) -> usize {
        self.min_gap[from * self.regions + to]
    }

    pub fn feasible(&self, from: Vertex, to: Vertex) -> bool {
        to.slot > from.slot && to.slot - from.slot > self.min_travel_slots(from.region, to.region)
    }

    pub fn edge_cost(&self, from: Vertex, to: Vertex) -> f64 {
        self.rates.edge(from.slot, to.slot).cost
    }

    /// Cost charged on the virtual edge into the first vertex.
    pub fn virtual_charge(&self) -> f64 {
        self.virtual_charge
    }

    /// Total cost of a route: virtual charge plus every edge.
    pub fn route_cost(&self, route: &Route) -> f64 {
        self.virtual_charge
            + route
                .vertices
                .windows(2)
                .map(|w| self.edge_cost(w[0], w[1]))
                .sum::<f64>()
    }

    /// Checks the route starts at `(source, 1)`, ends at `(destination, T)`
    /// and only uses feasible edges.
    pub fn check_route(&self, route: &Route) -> Result<()> {
        let first = route
            .vertices
            .first()
            .ok_or_else(|| Error::Infeasible(format!("UAV {} has an empty route", self.uav + 1)))?;
        let last = route.vertices.last().unwrap();
        if *first != Vertex::new(self.source, 0) {
            return Err(Error::Infeasible(format!(
                "UAV {} route starts at {:?}, expected [{}, 1]",
                self.uav + 1,
                first.one_based(),
                self.source + 1
            )));
        }
        if *last != Vertex::new(self.destination, self.slots - 1) {
            return Err(Error::Infeasible(format!(
                "UAV {} route ends at {:?}, expected [{}, {}]",
                self.uav + 1,
                last.one_based(),
                self.destination + 1,
                self.slots
            )));
        }
        for w in route.vertices.windows(2) {
            if w[1].region >= self.regions || !self.feasible(w[0], w[1]) {
                return Err(Error::Infeasible(format!(
                    "UAV {} cannot fly {:?} -> {:?}",
                    self.uav + 1,
                    w[0].one_based(),
                    w[1].one_based()
                )));
            }
        }
        Ok(())
    }
}

/// Time-expanded graph of one UAV with per-vertex rewards.
#[derive(Debug, Clone)]
pub struct TrajectoryGraph {
    kin: UavKinematics,
    rewards: Vec<f64>,
    /// Incoming edges per vertex as `(tail, cost)`, sorted by tail region
    /// then tail slot.
    incoming: Vec<Vec<(usize, f64)>>,
}

pub fn build_graph(scenario: &Scenario, rewards: Vec<f64>, uav: usize) -> Result<TrajectoryGraph> {
    TrajectoryGraph::new(UavKinematics::new(scenario, uav), rewards)
}

impl TrajectoryGraph {
    pub fn new(kin: UavKinematics, rewards: Vec<f64>) -> Result<Self> {
        let (l, t) = (kin.regions, kin.slots);
        if rewards.len() != l * t {
            return Err(Error::Domain(format!(
                "expected {} vertex rewards, found {}",
                l * t,
                rewards.len()
            )));
        }
        let mut incoming = vec![Vec::new(); l * t];
        for head_slot in 1..t {
            for head_region in 0..l {
                let head = Vertex::new(head_region, head_slot);
                let list = &mut incoming[head_slot * l + head_region];
                for tail_region in 0..l {
                    for tail_slot in 0..head_slot {
                        let tail = Vertex::new(tail_region, tail_slot);
                        if kin.feasible(tail, head) {
                            list.push((tail_slot * l + tail_region, kin.edge_cost(tail, head)));
                        }
                    }
                }
            }
        }
        Ok(TrajectoryGraph {
            kin,
            rewards,
            incoming,
        })
    }

    pub fn kinematics(&self) -> &UavKinematics {
        &self.kin
    }

    pub fn regions(&self) -> usize {
        self.kin.regions
    }

    pub fn slots(&self) -> usize {
        self.kin.slots
    }

    pub fn vertex(&self, index: usize) -> Vertex {
        Vertex::new(index % self.kin.regions, index / self.kin.regions)
    }

    pub fn index(&self, v: Vertex) -> usize {
        v.slot * self.kin.regions + v.region
    }

    pub fn vertex_count(&self) -> usize {
        self.rewards.len()
    }

    pub fn edge_count(&self) -> usize {
        self.incoming.iter().map(Vec::len).sum()
    }

    pub fn reward(&self, v: Vertex) -> f64 {
        self.rewards[self.index(v)]
    }

    pub fn rewards(&self) -> &[f64] {
        &self.rewards
    }

    /// Replaces vertex rewards, keeping the edge set.
    pub fn set_rewards(&mut self, rewards: Vec<f64>) -> Result<()> {
        if rewards.len() != self.rewards.len() {
            return Err(Error::Domain(format!(
                "expected {} vertex rewards, found {}",
                self.rewards.len(),
                rewards.len()
            )));
        }
        self.rewards = rewards;
        Ok(())
    }

    pub fn has_edge(&self, from: Vertex, to: Vertex) -> bool {
        from.region < self.regions() && to.region < self.regions() && self.kin.feasible(from, to)
    }

    /// Route payoff on the original graph: rewards of served vertices minus
    /// all edge costs, including the virtual edge's hover charge.
    pub fn route_payoff(&self, route: &Route) -> f64 {
        route.vertices.iter().map(|&v| self.reward(v)).sum::<f64>() - self.kin.route_cost(route)
    }

    /// Optimal route and payoff under `rewards` instead of the stored
    /// ones; same result as converting a copy with those rewards.
    pub fn shortest_route_with(&self, rewards: &[f64]) -> Result<(Route, f64)> {
        if rewards.len() != self.rewards.len() {
            return Err(Error::Domain(format!(
                "expected {} vertex rewards, found {}",
                self.rewards.len(),
                rewards.len()
            )));
        }
        let start = self.index(Vertex::new(self.kin.source, 0));
        self.relax(rewards, self.kin.virtual_charge - rewards[start])
    }

    fn relax(&self, rewards: &[f64], virtual_weight: f64) -> Result<(Route, f64)> {
        let n = self.vertex_count();
        let start = self.index(Vertex::new(self.kin.source, 0));
        let mut dist = vec![f64::INFINITY; n];
        let mut pred = vec![usize::MAX; n];
        dist[start] = virtual_weight;
        // Vertex indices are already in time order.
        for head in self.regions()..n {
            let rho = rewards[head];
            let mut best = f64::INFINITY;
            let mut arg = usize::MAX;
            for &(tail, c) in &self.incoming[head] {
                let cand = dist[tail] + c - rho;
                if cand < best {
                    best = cand;
                    arg = tail;
                }
            }
            dist[head] = best;
            pred[head] = arg;
        }
        let goal = self.index(Vertex::new(self.kin.destination, self.slots() - 1));
        if !dist[goal].is_finite() {
            return Err(self.unreachable());
        }
        let mut vertices = vec![self.vertex(goal)];
        let mut cur = goal;
        while cur != start {
            cur = pred[cur];
            vertices.push(self.vertex(cur));
        }
        vertices.reverse();
        Ok((
            Route {
                uav: self.kin.uav,
                vertices,
            },
            -dist[goal],
        ))
    }

    fn unreachable(&self) -> Error {
        Error::Infeasible(format!(
            "UAV {} cannot reach region {} by slot {}",
            self.kin.uav + 1,
            self.kin.destination + 1,
            self.slots()
        ))
    }

    /// Every feasible source-to-destination route, up to `limit`.
    pub fn enumerate_routes(&self, limit: usize) -> Result<Vec<Route>> {
        let (l, t) = (self.regions(), self.slots());
        let start = Vertex::new(self.kin.source, 0);
        let goal = Vertex::new(self.kin.destination, t - 1);
        let mut out = Vec::new();
        let mut stack = vec![start];
        fn walk(
            g: &TrajectoryGraph,
            l: usize,
            t: usize,
            goal: Vertex,
            stack: &mut Vec<Vertex>,
            out: &mut Vec<Route>,
            limit: usize,
        ) -> Result<()> {
            let cur = *stack.last().unwrap();
            if cur == goal {
                if out.len() == limit {
                    return Err(Error::Resource(format!("more than {limit} feasible routes")));
                }
                out.push(Route {
                    uav: g.kin.uav,
                    vertices: stack.clone(),
                });
                return Ok(());
            }
            for slot in cur.slot + 1..t {
                for region in 0..l {
                    let next = Vertex::new(region, slot);
                    if g.kin.feasible(cur, next) {
                        stack.push(next);
                        walk(g, l, t, goal, stack, out, limit)?;
                        stack.pop();
                    }
                }
            }
            Ok(())
        }
        walk(self, l, t, goal, &mut stack, &mut out, limit)?;
        Ok(out)
    }
}

/// The graph with rewards folded into edge weights and a virtual root.
#[derive(Debug, Clone, Copy)]
pub struct ConvertedGraph<'a> {
    graph: &'a TrajectoryGraph,
    /// Weight of `Ω → (source, 1)`.
    pub virtual_weight: f64,
}

pub fn convert(graph: &TrajectoryGraph) -> ConvertedGraph<'_> {
    let start = Vertex::new(graph.kin.source, 0);
    ConvertedGraph {
        graph,
        virtual_weight: graph.kin.virtual_charge - graph.reward(start),
    }
}

impl ConvertedGraph<'_> {
    pub fn graph(&self) -> &TrajectoryGraph {
        self.graph
    }

    /// Counts `Ω`.
    pub fn vertex_count(&self) -> usize {
        self.graph.vertex_count() + 1
    }

    /// Counts the virtual edge.
    pub fn edge_count(&self) -> usize {
        self.graph.edge_count() + 1
    }

    /// `(tail, head, w)` for every edge except the virtual one.
    pub fn weighted_edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let g = self.graph;
        g.incoming.iter().enumerate().flat_map(move |(head, list)| {
            let rho = g.rewards[head];
            list.iter().map(move |&(tail, c)| (tail, head, c - rho))
        })
    }


    /// Minimum-weight `Ω → (destination, T)` path by relaxation in time
    /// order. Ties go to the smallest predecessor by (region, slot).
    pub fn shortest_route(&self) -> Result<(Route, f64)> {
        self.graph.relax(&self.graph.rewards, self.virtual_weight)
    }

    /// Optimal payoff from a general Bellman-Ford run over the same graph.
    pub fn bellman_ford_payoff(&self) -> Result<f64> {
        let g = self.graph;
        let n = g.vertex_count();
        let mut pg: DiGraph<(), f64> = DiGraph::with_capacity(n + 1, self.edge_count());
        let nodes: Vec<NodeIndex> = (0..n).map(|_| pg.add_node(())).collect();
        let omega = pg.add_node(());
        pg.add_edge(omega, nodes[g.index(Vertex::new(g.kin.source, 0))], self.virtual_weight);
        for (tail, head, w) in self.weighted_edges() {
            pg.add_edge(nodes[tail], nodes[head], w);
        }
        let paths = bellman_ford(&pg, omega)
            .map_err(|_| Error::Numerical("negative cycle in an acyclic graph".into()))?;
        let d = paths.distances[nodes[g.index(Vertex::new(g.kin.destination, g.slots() - 1))].index()];
        if !d.is_finite() {
            return Err(g.unreachable());
        }
        Ok(-d)
    }
}

/// Builds, converts and solves in one call.
pub fn shortest_route(graph: &TrajectoryGraph) -> Result<(Route, f64)> {
    convert(graph).shortest_route()
}
