//! User demand forecast from a first-order mobility Markov chain.
//!
//! The chain runs over the L regions plus one outside compartment `O`
//! (stored last). Expected counts evolve as
//! `N(l,t+1) = N(l,t) + Σ_j N(j,t) p_jl − N(l,t) Σ_j p_lj` over `j ≠ l`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct MobilityChain {
    /// (L+1)×(L+1) transition probabilities; the diagonal is unused.
    transitions: Vec<Vec<f64>>,
    /// Expected users at slot 1 in each region, then `O`.
    initial: Vec<f64>,
}

impl MobilityChain {
    pub fn new(transitions: Vec<Vec<f64>>, initial: Vec<f64>) -> Result<Self> {
        let n = initial.len();
        if n < 2 {
            return Err(Error::Domain("chain needs at least one region plus O".into()));
        }
        if transitions.len() != n || transitions.iter().any(|r| r.len() != n) {
            return Err(Error::Domain(format!(
                "transition matrix must be {n}x{n}"
            )));
        }
        for (i, &c) in initial.iter().enumerate() {
            if !(c >= 0.0) || !c.is_finite() {
                return Err(Error::Domain(format!(
                    "initial count for {} is {c}; counts must be non-negative",
                    compartment_name(i, n)
                )));
            }
        }
        for (i, row) in transitions.iter().enumerate() {
            let mut leave = 0.0;
            for (j, &p) in row.iter().enumerate() {
                if i == j {
                    continue;
                }
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::Domain(format!(
                        "p[{}][{}] = {p} outside [0, 1]",
                        compartment_name(i, n),
                        compartment_name(j, n)
                    )));
                }
                leave += p;
            }
            if leave > 1.0 + 1e-12 {
                return Err(Error::Domain(format!(
                    "row {} leaves with total probability {leave} > 1",
                    compartment_name(i, n)
                )));
            }
        }
        Ok(MobilityChain {
            transitions,
            initial,
        })
    }

    /// Chain with no movement and nobody outside.
    pub fn stationary(initial_counts: Vec<f64>) -> Result<Self> {
        let n = initial_counts.len() + 1;
        let mut initial = initial_counts;
        initial.push(0.0);
        Self::new(vec![vec![0.0; n]; n], initial)
    }

    /// Number of regions, excluding `O`.
    pub fn regions(&self) -> usize {
        self.initial.len() - 1
    }

    pub fn transitions(&self) -> &[Vec<f64>] {
        &self.transitions
    }

    pub fn initial(&self) -> &[f64] {
        &self.initial
    }

    /// Expected counts per compartment (regions, then `O`) for slots 1..=T.
    pub fn expected_counts(&self, slots: usize) -> Vec<Vec<f64>> {
        let n = self.initial.len();
        let leave: Vec<f64> = (0..n)
            .map(|i| (0..n).filter(|&j| j != i).map(|j| self.transitions[i][j]).sum())
            .collect();
        let mut out = Vec::with_capacity(slots);
        let mut cur = self.initial.clone();
        for _ in 0..slots {
            out.push(cur.clone());
            let next: Vec<f64> = (0..n)
                .map(|l| {
                    let arrive: f64 = (0..n)
                        .filter(|&j| j != l)
                        .map(|j| cur[j] * self.transitions[j][l])
                        .sum();
                    // Clamp sub-ulp negatives from cancellation.
                    (cur[l] + arrive - cur[l] * leave[l]).max(0.0)
                })
                .collect();
            cur = next;
        }
        out
    }
}

fn compartment_name(i: usize, n: usize) -> String {
    if i + 1 == n {
        "O".to_string()
    } else {
        format!("region {}", i + 1)
    }
}

/// Per-task user density λ_k and the expectation table it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct DemandTable {
    regions: usize,
    slots: usize,
    /// `counts[t][l]`, zero-based slot and region; last column is `O`.
    counts: Vec<Vec<f64>>,
    areas: Vec<f64>,
    density: Vec<f64>,
}

impl DemandTable {
    pub fn regions(&self) -> usize {
        self.regions
    }

    pub fn slots(&self) -> usize {
        self.slots
    }

    /// Users per m² for zero-based `(region, slot)`.
    pub fn density(&self, region: usize, slot: usize) -> f64 {
        self.density[slot * self.regions + region]
    }

    /// Densities indexed by zero-based task `region + L·slot`.
    pub fn densities(&self) -> &[f64] {
        &self.density
    }

    pub fn expected_users(&self, region: usize, slot: usize) -> f64 {
        self.counts[slot][region]
    }

    pub fn expected_outside(&self, slot: usize) -> f64 {
        self.counts[slot][self.regions]
    }

    pub fn area(&self, region: usize) -> f64 {
        self.areas[region]
    }

    /// Users across all regions and `O` in one slot.
    pub fn total_mass(&self, slot: usize) -> f64 {
        self.counts[slot].iter().sum()
    }
}

/// Forecasts λ for all `L·T` tasks.
pub fn propagate_demand(chain: &MobilityChain, slots: usize, areas: &[f64]) -> Result<DemandTable> {
    if slots < 1 {
        return Err(Error::Domain("horizon must have at least one slot".into()));
    }
    let l = chain.regions();
    if areas.len() != l {
        return Err(Error::Domain(format!(
            "expected {l} region areas, found {}",
            areas.len()
        )));
    }
    if let Some(a) = areas.iter().find(|a| !(**a > 0.0)) {
        return Err(Error::Domain(format!("region area {a} must be positive")));
    }
    let counts = chain.expected_counts(slots);
    let density = counts
        .iter()
        .flat_map(|row| row[..l].iter().zip(areas).map(|(n, s)| n / s))
        .collect();
    Ok(DemandTable {
        regions: l,
        slots,
        counts,
        areas: areas.to_vec(),
        density,
    })
}

impl crate::scenario::Scenario {
    pub fn demand_table(&self) -> Result<DemandTable> {
        let areas = vec![self.topology.region_area(); self.regions()];
        propagate_demand(&self.demand, self.slots(), &areas)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_chain(rng: &mut ChaCha8Rng, l: usize) -> MobilityChain {
        let n = l + 1;
        let mut m = vec![vec![0.0; n]; n];
        for (i, row) in m.iter_mut().enumerate() {
            let budget: f64 = rng.random_range(0.0..0.6);
            let raw: Vec<f64> = (0..n).map(|j| if j == i { 0.0 } else { rng.random::<f64>() }).collect();
            let s: f64 = raw.iter().sum();
            for j in 0..n {
                row[j] = raw[j] / s * budget;
            }
        }
        let mut init: Vec<f64> = (0..l).map(|_| rng.random_range(0.0..200.0)).collect();
        init.push(rng.random_range(0.0..50.0));
        MobilityChain::new(m, init).unwrap()
    }

    #[test]
    fn no_movement_keeps_counts() {
        let chain = MobilityChain::stationary(vec![100.0; 4]).unwrap();
        let table = propagate_demand(&chain, 6, &[2.0; 4]).unwrap();
        for t in 0..6 {
            for l in 0..4 {
                assert_eq!(table.expected_users(l, t), 100.0);
                assert_eq!(table.density(l, t), 50.0);
            }
        }
    }

    #[test]
    fn full_transfer_between_two_regions() {
        let m = vec![
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.0],
        ];
        let chain = MobilityChain::new(m, vec![100.0, 0.0, 0.0]).unwrap();
        let table = propagate_demand(&chain, 2, &[1.0, 1.0]).unwrap();
        assert_eq!(table.expected_users(0, 1), 0.0);
        assert_eq!(table.expected_users(1, 1), 100.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        let ok = vec![vec![0.0; 3]; 3];
        assert!(MobilityChain::new(ok.clone(), vec![-1.0, 0.0, 0.0]).is_err());
        let mut heavy = ok.clone();
        heavy[0][1] = 0.7;
        heavy[0][2] = 0.7;
        assert!(MobilityChain::new(heavy, vec![1.0, 0.0, 0.0]).is_err());
        let mut neg = ok;
        neg[1][0] = -0.1;
        assert!(MobilityChain::new(neg, vec![1.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn matches_monte_carlo_walkers() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let l = 4;
        let chain = random_chain(&mut rng, l);
        let slots = 6;
        let table = propagate_demand(&chain, slots, &vec![1.0; l]).unwrap();

        // Independent oracle: 10^5 individual users walking the chain.
        let n = l + 1;
        let total: f64 = chain.initial().iter().sum();
        let users = 100_000usize;
        let mut pos: Vec<usize> = Vec::with_capacity(users);
        let cumulative: Vec<f64> = chain
            .initial()
            .iter()
            .scan(0.0, |acc, c| {
                *acc += c / total;
                Some(*acc)
            })
            .collect();
        for _ in 0..users {
            let u: f64 = rng.random();
            pos.push(cumulative.iter().position(|&c| u < c).unwrap_or(n - 1));
        }
        for t in 0..slots {
            let mut hist = vec![0usize; n];
            for &p in &pos {
                hist[p] += 1;
            }
            for c in 0..n {
                let mc = hist[c] as f64 / users as f64 * total;
                let exact = if c < l { table.expected_users(c, t) } else { table.expected_outside(t) };
                if exact > 0.05 * total {
                    assert!(
                        ((mc - exact) / exact).abs() < 0.01,
                        "slot {t} compartment {c}: mc {mc} vs {exact}"
                    );
                }
            }
            let mc_mass: f64 = hist.iter().sum::<usize>() as f64 / users as f64 * total;
            assert!(((mc_mass - table.total_mass(t)) / total).abs() < 0.01);
            for p in pos.iter_mut() {
                let u: f64 = rng.random();
                let row = &chain.transitions()[*p];
                let mut acc = 0.0;
                for (j, &pr) in row.iter().enumerate() {
                    if j == *p {
                        continue;
                    }
                    acc += pr;
                    if u < acc {
                        *p = j;
                        break;
                    }
                }
            }
        }
    }

    proptest! {
        #[test]
        fn mass_is_conserved_and_nonnegative(seed in any::<u64>(), l in 2usize..10) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let chain = random_chain(&mut rng, l);
            let table = propagate_demand(&chain, 20, &vec![1.0; l]).unwrap();
            let m0 = table.total_mass(0);
            for t in 0..20 {
                prop_assert!(((table.total_mass(t) - m0) / m0.max(1e-300)).abs() <= 1e-9);
                for r in 0..l {
                    prop_assert!(table.expected_users(r, t) >= 0.0);
                }
            }
        }
    }
}
