//! Regions, time slots, the UAV fleet and every physical and economic
//! constant a planner needs, plus loading of scenario files.
//!
//! Regions and slots are zero-based everywhere inside the crate. Config files
//! and solver output use the one-based numbering of the task index
//! `a(l, t) = l + L(t - 1)`.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::demand::MobilityChain;
use crate::error::{Error, Result};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn kmh_to_mps(kmh: f64) -> f64 {
    kmh / 3.6
}

/// One-based task index of region `region` in slot `slot`.
pub fn task_index(region: usize, slot: usize, regions: usize, slots: usize) -> Result<usize> {
    if region < 1 || region > regions {
        return Err(Error::Domain(format!(
            "region {region} outside 1..={regions}"
        )));
    }
    if slot < 1 || slot > slots {
        return Err(Error::Domain(format!("slot {slot} outside 1..={slots}")));
    }
    Ok(region + regions * (slot - 1))
}

/// Inverse of [`task_index`]: the one-based `(region, slot)` of task `k`.
pub fn task_region_slot(k: usize, regions: usize, slots: usize) -> Result<(usize, usize)> {
    if k < 1 || k > regions * slots {
        return Err(Error::Domain(format!(
            "task {k} outside 1..={}",
            regions * slots
        )));
    }
    Ok(((k - 1) % regions + 1, (k - 1) / regions + 1))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum LayoutKind {
    #[default]
    Hexagonal,
    Explicit,
}

/// Centers of the regular hexagonal regions. Hexagons are flat-topped: a
/// vertex lies on the positive x axis of each center.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionTopology {
    pub side_length: f64,
    pub centers: Vec<[f64; 2]>,
    pub layout: LayoutKind,
}

impl RegionTopology {
    /// Topology from user-supplied centers. Centers must be distinct.
    pub fn explicit(side_length: f64, centers: Vec<[f64; 2]>) -> Result<Self> {
        let topo = RegionTopology {
            side_length,
            centers,
            layout: LayoutKind::Explicit,
        };
        topo.check_centers()?;
        Ok(topo)
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn center(&self, region: usize) -> [f64; 2] {
        self.centers[region]
    }

    pub fn distance(&self, a: usize, b: usize) -> f64 {
        let (p, q) = (self.centers[a], self.centers[b]);
        (p[0] - q[0]).hypot(p[1] - q[1])
    }

    /// Area of one hexagonal region, `3√3/2 R²`.
    pub fn region_area(&self) -> f64 {
        1.5 * 3f64.sqrt() * self.side_length * self.side_length
    }

    /// Regions whose centers sit at the tiling pitch `√3 R` from `region`.
    pub fn neighbors(&self, region: usize) -> Vec<usize> {
        let pitch = 3f64.sqrt() * self.side_length;
        (0..self.len())
            .filter(|&j| j != region && (self.distance(region, j) - pitch).abs() < 1e-6 * pitch)
            .collect()
    }

    fn check_centers(&self) -> Result<()> {
        if !(self.side_length > 0.0) || !self.side_length.is_finite() {
            return Err(Error::config("topology.side_length_m", "must be positive"));
        }
        let tol = 1e-9 * self.side_length;
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                if self.distance(i, j) <= tol {
                    return Err(Error::config(
                        "topology.centers",
                        format!("regions {} and {} share a center", i + 1, j + 1),
                    ));
                }
            }
        }
        Ok(())
    }

    fn validate(&self) -> Result<()> {
        if self.len() < 2 {
            return Err(Error::config(
                "topology.regions",
                "at least two regions are required",
            ));
        }
        self.check_centers()
    }
}

/// Builds a seamless tiling of `regions` hexagons of side `side_length`.
///
/// Supported counts are the centered hexagonal numbers (1, 7, 19, 37, ...),
/// laid out as concentric rings, and perfect squares (4, 9, 16, 36, ...),
/// laid out as a k×k rhombus numbered row by row. Counts 2 to 6 use the
/// center cell plus the first cells of its ring.
pub fn build_hex_topology(regions: usize, side_length: f64) -> Result<RegionTopology> {
    if !(side_length > 0.0) || !side_length.is_finite() {
        return Err(Error::config("topology.side_length_m", "must be positive"));
    }
    let axial = if let Some(rings) = centered_hex_rings(regions) {
        spiral_axial(rings)
    } else if let Some(k) = perfect_square_root(regions) {
        (0..k)
            .flat_map(|r| (0..k).map(move |q| (q as i64, r as i64)))
            .collect()
    } else if (2..7).contains(&regions) {
        spiral_axial(1).into_iter().take(regions).collect()
    } else {
        return Err(Error::config(
            "topology.regions",
            format!(
                "{regions} regions has no built-in hexagonal layout; \
                 use a centered hexagonal number, a perfect square, fewer than 7, or layout = \"explicit\""
            ),
        ));
    };
    let s3 = 3f64.sqrt();
    let centers = axial
        .into_iter()
        .map(|(q, r)| {
            let (q, r) = (q as f64, r as f64);
            [1.5 * side_length * q, s3 * side_length * (r + q / 2.0)]
        })
        .collect();
    Ok(RegionTopology {
        side_length,
        centers,
        layout: LayoutKind::Hexagonal,
    })
}

fn centered_hex_rings(n: usize) -> Option<usize> {
    (0..).map(|k| (k, 3 * k * (k + 1) + 1)).take_while(|&(_, c)| c <= n).find(|&(_, c)| c == n).map(|(k, _)| k)
}

fn perfect_square_root(n: usize) -> Option<usize> {
    let k = (n as f64).sqrt().round() as usize;
    (k >= 2 && k * k == n).then_some(k)
}

fn spiral_axial(rings: usize) -> Vec<(i64, i64)> {
    const DIRS: [(i64, i64); 6] = [(1, 0), (1, -1), (0, -1), (-1, 0), (-1, 1), (0, 1)];
    let mut out = vec![(0, 0)];
    for ring in 1..=rings as i64 {
        let (mut q, mut r) = (DIRS[4].0 * ring, DIRS[4].1 * ring);
        for dir in DIRS {
            for _ in 0..ring {
                out.push((q, r));
                q += dir.0;
                r += dir.1;
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Uav {
    pub speed: f64,
    pub tx_power: f64,
    pub source: usize,
    pub destination: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fleet {
    pub altitude: f64,
    /// Full antenna beamwidth θ0 in radians.
    pub beamwidth: f64,
    pub uavs: Vec<Uav>,
}

impl Fleet {
    pub fn len(&self) -> usize {
        self.uavs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.uavs.is_empty()
    }

    /// Ground radius of the antenna footprint, `H tan(θ0/2)`.
    pub fn coverage_radius(&self) -> f64 {
        self.altitude * (self.beamwidth / 2.0).tan()
    }
}

/// Rotary-wing propulsion model coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerModel {
    pub lambda0: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub tip_speed: f64,
    pub hover_induced_velocity: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicsParams {
    pub carrier_hz: f64,
    pub noise_w: f64,
    pub path_loss_exponent: f64,
    pub eta_los: f64,
    pub eta_nlos: f64,
    pub psi: f64,
    pub zeta: f64,
    pub power: PowerModel,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EconomicParams {
    pub beta: f64,
    pub bandwidth_hz: f64,
    /// Cost per watt-second while flying.
    pub gamma_move: f64,
    /// Cost per watt-second while hovering.
    pub gamma_hover: f64,
    /// Charge joint-graph edges `γ e` per slot without the power factor.
    pub legacy_crs_cost: bool,
    /// Virtual start edge carries only the negated first reward.
    pub literal_virtual_edge: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Horizon {
    pub slots: usize,
    pub slot_seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub topology: RegionTopology,
    pub fleet: Fleet,
    pub physics: PhysicsParams,
    pub economics: EconomicParams,
    pub horizon: Horizon,
    pub demand: MobilityChain,
}

impl Scenario {
    pub fn regions(&self) -> usize {
        self.topology.len()
    }

    pub fn slots(&self) -> usize {
        self.horizon.slots
    }

    pub fn uav_count(&self) -> usize {
        self.fleet.len()
    }

    pub fn from_config(cfg: &ScenarioConfig) -> Result<Self> {
        cfg.build()
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = toml::from_str(text)?;
        cfg.build()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    /// Checks every cross-field invariant.
    pub fn validate(&self) -> Result<()> {
        self.topology.validate()?;
        let l = self.regions();
        let fleet = &self.fleet;
        if fleet.uavs.is_empty() {
            return Err(Error::config("fleet.uav_count", "at least one UAV is required"));
        }
        positive("fleet.altitude_m", fleet.altitude)?;
        if !(fleet.beamwidth > 0.0 && fleet.beamwidth < PI) {
            return Err(Error::config("fleet.beamwidth_rad", "must lie in (0, π)"));
        }
        if fleet.coverage_radius() < self.topology.side_length {
            return Err(Error::config(
                "fleet.beamwidth_rad",
                format!(
                    "coverage radius {:.2} m does not cover one region (circumradius {:.2} m)",
                    fleet.coverage_radius(),
                    self.topology.side_length
                ),
            ));
        }
        for (m, uav) in fleet.uavs.iter().enumerate() {
            positive(&format!("fleet.speed_kmh[{}]", m + 1), uav.speed)?;
            positive(&format!("fleet.tx_power_dbm[{}]", m + 1), uav.tx_power)?;
            if uav.source >= l {
                return Err(Error::config(
                    "fleet.sources",
                    format!("UAV {} source {} outside 1..={l}", m + 1, uav.source + 1),
                ));
            }
            if uav.destination >= l {
                return Err(Error::config(
                    "fleet.destinations",
                    format!(
                        "UAV {} destination {} outside 1..={l}",
                        m + 1,
                        uav.destination + 1
                    ),
                ));
            }
        }
        let p = &self.physics;
        positive("physics.carrier_hz", p.carrier_hz)?;
        positive("physics.noise_dbm", p.noise_w)?;
        positive("physics.path_loss_exponent", p.path_loss_exponent)?;
        positive("physics.psi", p.psi)?;
        positive("physics.zeta", p.zeta)?;
        positive("physics.lambda0", p.power.lambda0)?;
        positive("physics.lambda1", p.power.lambda1)?;
        positive("physics.lambda2", p.power.lambda2)?;
        positive("physics.tip_speed_mps", p.power.tip_speed)?;
        positive("physics.hover_induced_velocity_mps", p.power.hover_induced_velocity)?;
        if !(p.eta_los > 1.0 && p.eta_nlos > p.eta_los) {
            return Err(Error::config(
                "physics.eta_los_db/eta_nlos_db",
                format!(
                    "excess losses must satisfy eta_nlos > eta_los > 1 (got {} and {})",
                    p.eta_nlos, p.eta_los
                ),
            ));
        }
        let e = &self.economics;
        positive("economics.beta", e.beta)?;
        positive("economics.bandwidth_hz", e.bandwidth_hz)?;
        non_negative("economics.gamma_move", e.gamma_move)?;
        non_negative("economics.gamma_hover", e.gamma_hover)?;
        if self.horizon.slots < 1 {
            return Err(Error::config("horizon.slots", "at least one slot is required"));
        }
        positive("horizon.slot_seconds", self.horizon.slot_seconds)?;
        if self.demand.regions() != l {
            return Err(Error::config(
                "demand.initial_counts",
                format!("expected {l} entries, found {}", self.demand.regions()),
            ));
        }
        Ok(())
    }
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::config(field, format!("must be positive and finite, got {v}")))
    }
}

fn non_negative(field: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::config(field, format!("must be non-negative, got {v}")))
    }
}

// ---------------------------------------------------------------------------
// Config file schema. Every field has a default; an empty file yields the
// nine-region, two-UAV reference setup.

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub topology: TopologyConfig,
    pub fleet: FleetConfig,
    pub physics: PhysicsConfig,
    pub economics: EconomicsConfig,
    pub horizon: HorizonConfig,
    pub demand: DemandConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TopologyConfig {
    pub layout: LayoutKind,
    pub regions: usize,
    /// Hexagon side length R, meters.
    pub side_length_m: f64,
    /// Explicit centers in meters, required when `layout = "explicit"`.
    pub centers: Option<Vec<[f64; 2]>>,
}

impl Default for TopologyConfig {
    fn default() -> Self {
        TopologyConfig {
            layout: LayoutKind::Hexagonal,
            regions: 9,
            side_length_m: 150.0,
            centers: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FleetConfig {
    pub uav_count: usize,
    pub altitude_m: f64,
    pub beamwidth_rad: f64,
    /// Common flight speed, km/h. Overridden per UAV by `speeds_kmh`.
    pub speed_kmh: f64,
    pub speeds_kmh: Option<Vec<f64>>,
    /// Common transmit power, dBm. Overridden per UAV by `tx_powers_dbm`.
    pub tx_power_dbm: f64,
    pub tx_powers_dbm: Option<Vec<f64>>,
    /// One-based region of the control station; default source and destination.
    pub control_region: usize,
    pub sources: Option<Vec<usize>>,
    pub destinations: Option<Vec<usize>>,
}

impl Default for FleetConfig {
    fn default() -> Self {
        FleetConfig {
            uav_count: 2,
            altitude_m: 90.0,
            beamwidth_rad: 2.7854,
            speed_kmh: 70.0,
            speeds_kmh: None,
            tx_power_dbm: 26.0,
            tx_powers_dbm: None,
            control_region: 3,
            sources: None,
            destinations: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysicsConfig {
    pub carrier_hz: f64,
    pub noise_dbm: f64,
    pub path_loss_exponent: f64,
    pub eta_los_db: f64,
    pub eta_nlos_db: f64,
    pub psi: f64,
    pub zeta: f64,
    pub lambda0: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub tip_speed_mps: f64,
    pub hover_induced_velocity_mps: f64,
}

impl Default for PhysicsConfig {
    fn default() -> Self {
        PhysicsConfig {
            carrier_hz: 2e9,
            noise_dbm: -96.0,
            path_loss_exponent: 2.0,
            eta_los_db: 3.0,
            eta_nlos_db: 23.0,
            psi: 11.95,
            zeta: 0.14,
            lambda0: 580.65,
            lambda1: 790.67,
            lambda2: 0.01,
            tip_speed_mps: 200.0,
            hover_induced_velocity_mps: 7.2,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EconomicsConfig {
    pub beta: f64,
    pub bandwidth_hz: f64,
    pub gamma_move: f64,
    pub gamma_hover: f64,
    pub legacy_crs_cost: bool,
    pub literal_virtual_edge: bool,
}

impl Default for EconomicsConfig {
    fn default() -> Self {
        EconomicsConfig {
            beta: 1e-6,
            bandwidth_hz: 1e6,
            gamma_move: 1e-3,
            gamma_hover: 1e-3,
            legacy_crs_cost: false,
            literal_virtual_edge: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HorizonConfig {
    pub slots: usize,
    pub slot_seconds: f64,
}

impl Default for HorizonConfig {
    fn default() -> Self {
        HorizonConfig {
            slots: 20,
            slot_seconds: 60.0,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DemandConfig {
    /// Expected users per region at slot 1. Defaults to 100 everywhere.
    pub initial_counts: Option<Vec<f64>>,
    /// Row-major transition probabilities. Each row has L entries, or L + 1
    /// with the last column giving the probability of leaving to the outside
    /// region. Diagonal entries are ignored: staying is the residual mass.
    pub transitions: Option<Vec<Vec<f64>>>,
    /// Outside-region row, L + 1 entries (its own last entry is ignored).
    pub outside_row: Option<Vec<f64>>,
    pub outside_initial: f64,
}

impl ScenarioConfig {
    pub fn build(&self) -> Result<Scenario> {
        let t = &self.topology;
        let topology = match t.layout {
            LayoutKind::Hexagonal => {
                if t.centers.is_some() {
                    return Err(Error::config(
                        "topology.centers",
                        "explicit centers require layout = \"explicit\"",
                    ));
                }
                build_hex_topology(t.regions, t.side_length_m)?
            }
            LayoutKind::Explicit => {
                let centers = t.centers.clone().ok_or_else(|| {
                    Error::config("topology.centers", "required for layout = \"explicit\"")
                })?;
                if centers.len() != t.regions {
                    return Err(Error::config(
                        "topology.centers",
                        format!("expected {} centers, found {}", t.regions, centers.len()),
                    ));
                }
                RegionTopology::explicit(t.side_length_m, centers)?
            }
        };
        let l = topology.len();

        let f = &self.fleet;
        let m = f.uav_count;
        let per_uav = |field: &str, list: &Option<Vec<f64>>, common: f64| -> Result<Vec<f64>> {
            match list {
                Some(v) if v.len() != m => Err(Error::config(
                    field,
                    format!("expected {m} entries, found {}", v.len()),
                )),
                Some(v) => Ok(v.clone()),
                None => Ok(vec![common; m]),
            }
        };
        let speeds = per_uav("fleet.speeds_kmh", &f.speeds_kmh, f.speed_kmh)?;
        let powers = per_uav("fleet.tx_powers_dbm", &f.tx_powers_dbm, f.tx_power_dbm)?;
        let endpoints = |field: &str, list: &Option<Vec<usize>>| -> Result<Vec<usize>> {
            let v = list.clone().unwrap_or_else(|| vec![f.control_region; m]);
            if v.len() != m {
                return Err(Error::config(
                    field,
                    format!("expected {m} entries, found {}", v.len()),
                ));
            }
            v.into_iter()
                .map(|r| {
                    if r >= 1 && r <= l {
                        Ok(r - 1)
                    } else {
                        Err(Error::config(field, format!("region {r} outside 1..={l}")))
                    }
                })
                .collect()
        };
        let sources = endpoints("fleet.sources", &f.sources)?;
        let destinations = endpoints("fleet.destinations", &f.destinations)?;
        let uavs = (0..m)
            .map(|i| Uav {
                speed: kmh_to_mps(speeds[i]),
                tx_power: dbm_to_watts(powers[i]),
                source: sources[i],
                destination: destinations[i],
            })
            .collect();
        let fleet = Fleet {
            altitude: f.altitude_m,
            beamwidth: f.beamwidth_rad,
            uavs,
        };

        let p = &self.physics;
        let physics = PhysicsParams {
            carrier_hz: p.carrier_hz,
            noise_w: dbm_to_watts(p.noise_dbm),
            path_loss_exponent: p.path_loss_exponent,
            eta_los: db_to_linear(p.eta_los_db),
            eta_nlos: db_to_linear(p.eta_nlos_db),
            psi: p.psi,
            zeta: p.zeta,
            power: PowerModel {
                lambda0: p.lambda0,
                lambda1: p.lambda1,
                lambda2: p.lambda2,
                tip_speed: p.tip_speed_mps,
                hover_induced_velocity: p.hover_induced_velocity_mps,
            },
        };

        let e = &self.economics;
        let economics = EconomicParams {
            beta: e.beta,
            bandwidth_hz: e.bandwidth_hz,
            gamma_move: e.gamma_move,
            gamma_hover: e.gamma_hover,
            legacy_crs_cost: e.legacy_crs_cost,
            literal_virtual_edge: e.literal_virtual_edge,
        };

        let horizon = Horizon {
            slots: self.horizon.slots,
            slot_seconds: self.horizon.slot_seconds,
        };

        let demand = self.demand.build(l)?;

        let scenario = Scenario {
            topology,
            fleet,
            physics,
            economics,
            horizon,
            demand,
        };
        scenario.validate()?;
        Ok(scenario)
    }
}

impl DemandConfig {
    fn build(&self, l: usize) -> Result<MobilityChain> {
        let initial = self.initial_counts.clone().unwrap_or_else(|| vec![100.0; l]);
        if initial.len() != l {
            return Err(Error::config(
                "demand.initial_counts",
                format!("expected {l} entries, found {}", initial.len()),
            ));
        }
        let n = l + 1;
        let mut matrix = vec![vec![0.0; n]; n];
        if let Some(rows) = &self.transitions {
            if rows.len() != l {
                return Err(Error::config(
                    "demand.transitions",
                    format!("expected {l} rows, found {}", rows.len()),
                ));
            }
            for (i, row) in rows.iter().enumerate() {
                if row.len() != l && row.len() != n {
                    return Err(Error::config(
                        "demand.transitions",
                        format!("row {} has {} entries, expected {l} or {n}", i + 1, row.len()),
                    ));
                }
                matrix[i][..row.len()].copy_from_slice(row);
            }
        }
        if let Some(row) = &self.outside_row {
            if row.len() != n {
                return Err(Error::config(
                    "demand.outside_row",
                    format!("expected {n} entries, found {}", row.len()),
                ));
            }
            matrix[l].copy_from_slice(row);
        }
        let mut counts = initial;
        counts.push(self.outside_initial);
        MobilityChain::new(matrix, counts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn task_index_examples() {
        assert_eq!(task_index(1, 1, 9, 20).unwrap(), 1);
        assert_eq!(task_index(3, 1, 9, 20).unwrap(), 3);
        assert_eq!(task_index(1, 3, 9, 20).unwrap(), 19);
        assert!(task_index(0, 1, 9, 20).is_err());
        assert!(task_index(10, 1, 9, 20).is_err());
        assert!(task_index(1, 21, 9, 20).is_err());
    }

    #[test]
    fn task_index_round_trips() {
        let (l, t) = (9, 20);
        let mut seen = vec![false; l * t];
        for slot in 1..=t {
            for region in 1..=l {
                let k = task_index(region, slot, l, t).unwrap();
                assert!(!seen[k - 1]);
                seen[k - 1] = true;
                assert_eq!(task_region_slot(k, l, t).unwrap(), (region, slot));
            }
        }
        assert!(seen.into_iter().all(|s| s));
    }

    #[test]
    fn nine_region_tiling() {
        let topo = build_hex_topology(9, 150.0).unwrap();
        assert_eq!(topo.len(), 9);
        let mut min = f64::INFINITY;
        for i in 0..9 {
            for j in i + 1..9 {
                min = min.min(topo.distance(i, j));
            }
        }
        assert!((min - 259.807_621_135_331_5).abs() < 1e-9);
        // Middle of the 3x3 rhombus.
        assert_eq!(topo.neighbors(4).len(), 6);
    }

    #[test]
    fn interior_regions_have_six_neighbors() {
        for (n, k) in [(9usize, 3usize), (36, 6)] {
            let topo = build_hex_topology(n, 150.0).unwrap();
            for r in 1..k - 1 {
                for q in 1..k - 1 {
                    assert_eq!(topo.neighbors(r * k + q).len(), 6, "L={n} region {}", r * k + q + 1);
                }
            }
            for i in 0..n {
                assert!(topo.neighbors(i).len() <= 6);
            }
        }
    }

    #[test]
    fn centered_hexagon_layouts() {
        let single = build_hex_topology(1, 150.0).unwrap();
        assert_eq!(single.centers, vec![[0.0, 0.0]]);
        let seven = build_hex_topology(7, 150.0).unwrap();
        assert_eq!(seven.neighbors(0).len(), 6);
        let nineteen = build_hex_topology(19, 150.0).unwrap();
        assert_eq!(nineteen.len(), 19);
        assert!(nineteen.check_centers().is_ok());
        assert!(build_hex_topology(10, 150.0).is_err());
    }

    #[test]
    fn small_partial_rings_are_contiguous() {
        let pitch = 3f64.sqrt() * 150.0;
        for n in [2, 3, 5, 6] {
            let topo = build_hex_topology(n, 150.0).unwrap();
            assert_eq!(topo.len(), n);
            for i in 1..n {
                assert!((topo.distance(0, i) - pitch).abs() < 1e-9);
                assert!((topo.distance(i - 1, i) - pitch).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn coincident_centers_rejected() {
        let mut centers = build_hex_topology(9, 150.0).unwrap().centers;
        centers[4] = centers[3];
        let err = RegionTopology::explicit(150.0, centers).unwrap_err();
        assert!(err.to_string().contains("topology.centers"), "{err}");
    }

    #[test]
    fn unit_conversions() {
        assert!((dbm_to_watts(26.0) - 0.398_107_170_553_497_3).abs() < 1e-12);
        assert!((db_to_linear(3.0) - 1.995_262_314_968_879_5).abs() < 1e-12);
        assert!((db_to_linear(23.0) - 199.526_231_496_887_9).abs() < 1e-9);
        assert!((kmh_to_mps(72.0) - 20.0).abs() < 1e-12);
    }

    #[test]
    fn coverage_cone_covers_one_region() {
        let s = ScenarioConfig::default().build().unwrap();
        let radius = s.fleet.coverage_radius();
        assert!(radius >= 2.0 * 150.0 / 3f64.sqrt());
        assert!(radius >= s.topology.side_length);
    }

    #[test]
    fn narrow_beam_rejected() {
        let mut cfg = ScenarioConfig::default();
        cfg.fleet.beamwidth_rad = 0.5;
        let err = cfg.build().unwrap_err();
        assert!(err.to_string().contains("fleet.beamwidth_rad"), "{err}");
    }
}
