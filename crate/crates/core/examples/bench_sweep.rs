//! Runs the experiments in a bench file and prints the mean metrics.
//!
//! `cargo run --release --example bench_sweep -- scenarios/bench.toml [name]`

use uavroute::harness::{run_experiment, BenchSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let path = args.next().unwrap_or_else(|| "scenarios/bench.toml".into());
    let only = args.next();
    let spec = BenchSpec::load(&path)?;
    for e in spec.experiments.iter().filter(|e| only.as_ref().is_none_or(|n| *n == e.name)) {
        let res = run_experiment(e)?;
        println!("{} ({})", res.name, res.parameter);
        println!("{:>6} {:>8} {:>12} {:>12} {:>12} {:>10} {:>6}", "solver", "value", "total", "per_uav", "efficiency", "energy_kJ", "fail");
        for r in &res.rows {
            println!(
                "{:>6} {:>8} {:>12.3} {:>12.3} {:>12.4e} {:>10.1} {:>6}",
                r.solver.name(),
                r.value,
                r.total_payoff,
                r.payoff_per_uav,
                r.efficiency,
                r.energy_j / 1e3,
                r.failed
            );
        }
    }
    Ok(())
}
