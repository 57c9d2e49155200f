//! Builds the hexagonal region layout and prints centers and neighbors.
//!
//! `cargo run --example hex_layout -- 36`

use uavroute::scenario::build_hex_topology;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let regions: usize = std::env::args().nth(1).map(|a| a.parse()).transpose()?.unwrap_or(9);
    let topo = build_hex_topology(regions, 150.0)?;
    println!("{} regions, side {} m, area {:.0} m^2 each", topo.len(), 150.0, topo.region_area());
    for l in 0..topo.len() {
        let [x, y] = topo.center(l);
        let nb: Vec<usize> = topo.neighbors(l).into_iter().map(|n| n + 1).collect();
        println!("{:>3}  ({:>8.2}, {:>8.2})  neighbors {:?}", l + 1, x, y, nb);
    }
    Ok(())
}
