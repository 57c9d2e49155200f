use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use uavroute::baselines::{plan_circular, plan_greedy};
use uavroute::crs::{solve_crs, CrsOptions};
use uavroute::drs::{run_drs, DrsOptions, RouteGame, UpdateOrder};
use uavroute::economics::RewardModel;
use uavroute::evaluate::system_payoff;
use uavroute::harness::{bench, BenchSpec};
use uavroute::scenario::Scenario;
use uavroute::spgraph::{build_graph, shortest_route, Route};

#[derive(Parser)]
#[command(name = "uavplan", version, about = "Trajectory planning for UAV base stations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Single-UAV shortest path on interference-free rewards.
    SolveSp {
        #[command(flatten)]
        common: Common,
        /// One-based UAV index; all UAVs when omitted.
        #[arg(long)]
        uav: Option<usize>,
    },
    /// Exact joint planning over the multi-UAV state graph.
    SolveCrs {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1_000_000)]
        state_cap: u128,
    },
    /// Best-response dynamics of the route-selection game.
    SolveDrs {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "roundrobin")]
        order: UpdateOrder,
    },
    /// Greedy baseline.
    SolveGp {
        #[command(flatten)]
        common: Common,
    },
    /// Circular-patrol baseline.
    SolveCp {
        #[command(flatten)]
        common: Common,
    },
    /// Runs the experiments in a bench file and writes CSVs plus summary.json.
    Bench {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct Common {
    /// Scenario TOML file.
    #[arg(long)]
    scenario: PathBuf,
    /// Write the expected user counts per region and slot.
    #[arg(long)]
    dump_demand: Option<PathBuf>,
    /// Write the interference-free reward table per UAV.
    #[arg(long)]
    dump_rewards: Option<PathBuf>,
}

struct Loaded {
    scenario: Scenario,
    model: RewardModel,
}

impl Common {
    fn load(&self) -> Result<Loaded> {
        let scenario = Scenario::load(&self.scenario)
            .with_context(|| format!("loading scenario {}", self.scenario.display()))?;
        let model = RewardModel::new(&scenario)?;
        if let Some(path) = &self.dump_demand {
            dump_demand(&scenario, path)?;
        }
        if let Some(path) = &self.dump_rewards {
            dump_rewards(&scenario, &model, path)?;
        }
        Ok(Loaded { scenario, model })
    }
}

fn dump_demand(scenario: &Scenario, path: &Path) -> Result<()> {
    let table = scenario.demand_table()?;
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(["region", "slot", "expected_users"])?;
    for t in 0..table.slots() {
        for l in 0..table.regions() {
            w.write_record([(l + 1).to_string(), (t + 1).to_string(), table.expected_users(l, t).to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn dump_rewards(scenario: &Scenario, model: &RewardModel, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(["uav", "region", "slot", "reward"])?;
    let l = scenario.regions();
    for (m, uav) in scenario.fleet.uavs.iter().enumerate() {
        let table = model.reward_table(uav.tx_power)?;
        for (k, reward) in table.iter().enumerate() {
            w.write_record([
                (m + 1).to_string(),
                (k % l + 1).to_string(),
                (k / l + 1).to_string(),
                reward.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn routes_json(routes: &[Route]) -> Vec<Vec<[usize; 2]>> {
    routes.iter().map(Route::one_based).collect()
}

fn print_plan(loaded: &Loaded, routes: &[Route]) -> Result<()> {
    let pay = system_payoff(&loaded.scenario, &loaded.model, routes)?;
    println!(
        "{}",
        json!({
            "routes": routes_json(routes),
            "payoffs": pay.per_uav,
            "total_payoff": pay.total,
        })
    );
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::SolveSp { common, uav } => {
            let loaded = common.load()?;
            let s = &loaded.scenario;
            let uavs: Vec<usize> = match uav {
                Some(m) if m >= 1 && m <= s.uav_count() => vec![m - 1],
                Some(m) => bail!("--uav {m} outside 1..={}", s.uav_count()),
                None => (0..s.uav_count()).collect(),
            };
            for m in uavs {
                let rewards = loaded.model.reward_table(s.fleet.uavs[m].tx_power)?;
                let graph = build_graph(s, rewards, m)?;
                let (route, payoff) = shortest_route(&graph)?;
                println!("{}", json!({ "uav": m + 1, "route": route.one_based(), "payoff": payoff }));
            }
        }
        Command::SolveCrs { common, state_cap } => {
            let loaded = common.load()?;
            let sol = solve_crs(&loaded.scenario, &loaded.model, &CrsOptions { state_cap })?;
            println!(
                "{}",
                json!({
                    "routes": routes_json(&sol.routes),
                    "total_payoff": sol.total_payoff,
                    "states": sol.states,
                    "runtime_ms": sol.runtime_ms,
                })
            );
        }
        Command::SolveDrs { common, seed, order } => {
            let loaded = common.load()?;
            let game = RouteGame::new(&loaded.scenario, &loaded.model)?;
            let opts = DrsOptions {
                order,
                seed,
                ..DrsOptions::default()
            };
            let out = run_drs(&game, None, &opts)?;
            if !game.is_nash(&out.profile)? {
                bail!("best-response dynamics stopped off equilibrium");
            }
            println!(
                "{}",
                json!({
                    "routes": routes_json(&out.profile),
                    "payoffs": out.payoffs,
                    "potential_trace": out.potential_trace,
                    "rounds": out.rounds,
                    "is_nash": true,
                })
            );
        }
        Command::SolveGp { common } => {
            let loaded = common.load()?;
            let tables = loaded
                .scenario
                .fleet
                .uavs
                .iter()
                .map(|u| loaded.model.reward_table(u.tx_power))
                .collect::<uavroute::Result<Vec<_>>>()?;
            let routes = plan_greedy(&loaded.scenario, &tables)?;
            print_plan(&loaded, &routes)?;
        }
        Command::SolveCp { common } => {
            let loaded = common.load()?;
            let plan = plan_circular(&loaded.scenario, None)?;
            print_plan(&loaded, &plan.routes)?;
        }
        Command::Bench { spec, out } => {
            let started = Instant::now();
            let spec = BenchSpec::load(&spec).with_context(|| format!("loading bench spec {}", spec.display()))?;
            let written = bench(&spec, &out)?;
            for p in &written {
                eprintln!("wrote {}", p.display());
            }
            eprintln!("bench finished in {:.1} s", started.elapsed().as_secs_f64());
        }
    }
    Ok(())
}
