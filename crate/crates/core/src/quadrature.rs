//! Cubature over triangles and regular hexagons.
//!
//! The base rule is the 12-point, degree-7 symmetric rule of Gatermann
//! (all weights positive). A hexagon is split into six center triangles,
//! each refined uniformly into `4^level` sub-triangles.

use crate::error::{Error, Result};

/// Barycentric orbits `(a, b, c)` and weight; each orbit contributes its
/// three cyclic rotations. Weights are normalized to sum to one.
const GATERMANN_ORBITS: [([f64; 3], f64); 4] = [
    (
        [0.062_382_265_094_402_1, 0.067_517_867_073_916_1, 0.870_099_867_831_681_8],
        0.053_034_056_314_869_0,
    ),
    (
        [0.055_225_456_656_926_6, 0.321_502_493_851_981_8, 0.623_272_049_491_091_6],
        0.087_762_817_428_892_6,
    ),
    (
        [0.034_324_302_945_097_1, 0.660_949_196_186_735_6, 0.304_726_500_868_167_3],
        0.057_550_085_569_963_2,
    ),
    (
        [0.515_842_334_353_591_8, 0.277_716_166_976_391_8, 0.206_441_498_670_016_4],
        0.134_986_374_019_608_6,
    ),
];

fn rule_points() -> impl Iterator<Item = ([f64; 3], f64)> {
    GATERMANN_ORBITS.iter().flat_map(|&([a, b, c], w)| {
        [([a, b, c], w), ([b, c, a], w), ([c, a, b], w)]
    })
}

fn area(tri: &[[f64; 2]; 3]) -> f64 {
    let [a, b, c] = tri;
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1])).abs()
}

/// One application of the base rule on `tri`.
pub fn triangle_rule<F: Fn([f64; 2]) -> f64>(tri: &[[f64; 2]; 3], f: &F) -> f64 {
    let [p, q, r] = tri;
    let sum: f64 = rule_points()
        .map(|([a, b, c], w)| {
            let x = a * p[0] + b * q[0] + c * r[0];
            let y = a * p[1] + b * q[1] + c * r[1];
            w * f([x, y])
        })
        .sum();
    area(tri) * sum
}

/// Base rule on each of the `4^level` congruent sub-triangles of `tri`.
pub fn refined_triangle<F: Fn([f64; 2]) -> f64>(tri: &[[f64; 2]; 3], level: u32, f: &F) -> f64 {
    let n = 1usize << level;
    let [p, q, r] = *tri;
    let at = |i: usize, j: usize| -> [f64; 2] {
        let (u, v) = (i as f64 / n as f64, j as f64 / n as f64);
        [
            p[0] + u * (q[0] - p[0]) + v * (r[0] - p[0]),
            p[1] + u * (q[1] - p[1]) + v * (r[1] - p[1]),
        ]
    };
    let mut total = 0.0;
    for j in 0..n {
        for i in 0..n - j {
            total += triangle_rule(&[at(i, j), at(i + 1, j), at(i, j + 1)], f);
            if i + j + 1 < n {
                total += triangle_rule(&[at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)], f);
            }
        }
    }
    total
}

/// Vertices of a flat-topped regular hexagon (a vertex on the +x axis).
pub fn hexagon_vertices(center: [f64; 2], side: f64) -> [[f64; 2]; 6] {
    std::array::from_fn(|i| {
        let a = i as f64 * std::f64::consts::FRAC_PI_3;
        [center[0] + side * a.cos(), center[1] + side * a.sin()]
    })
}

pub fn hexagon_at_level<F: Fn([f64; 2]) -> f64>(center: [f64; 2], side: f64, level: u32, f: &F) -> f64 {
    let v = hexagon_vertices(center, side);
    (0..6)
        .map(|i| refined_triangle(&[center, v[i], v[(i + 1) % 6]], level, f))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions {
    pub base_level: u32,
    pub max_level: u32,
    /// Accepted relative change between successive refinement levels.
    pub rel_tol: f64,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        QuadratureOptions {
            base_level: 2,
            max_level: 6,
            rel_tol: 1e-3,
        }
    }
}

/// Integrates `f` over the hexagon, refining until two successive levels
/// agree within `rel_tol`. Returns the finer estimate.
pub fn integrate_hexagon<F: Fn([f64; 2]) -> f64>(
    center: [f64; 2],
    side: f64,
    opts: &QuadratureOptions,
    f: F,
) -> Result<f64> {
    let mut prev = hexagon_at_level(center, side, opts.base_level, &f);
    let mut history = vec![prev];
    for level in opts.base_level + 1..=opts.max_level {
        let cur = hexagon_at_level(center, side, level, &f);
        history.push(cur);
        if (cur - prev).abs() <= opts.rel_tol * cur.abs() {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::Numerical(format!(
        "hexagon quadrature did not settle to {} relative by level {}; estimates per level from {}: {:?}",
        opts.rel_tol, opts.max_level, opts.base_level, history
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_one() {
        let s: f64 = rule_points().map(|(_, w)| w).sum();
        assert!((s - 1.0).abs() < 1e-12);
        for (b, _) in rule_points() {
            assert!((b.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    // Exact ∫ x^i y^j over the unit simplex is i! j! / (i + j + 2)!.
    fn simplex_moment(i: u32, j: u32) -> f64 {
        let fact = |n: u32| (1..=n).map(f64::from).product::<f64>();
        fact(i) * fact(j) / fact(i + j + 2)
    }

    #[test]
    fn exact_through_degree_seven() {
        let tri = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        for deg in 0..=7u32 {
            for i in 0..=deg {
                let j = deg - i;
                let got = triangle_rule(&tri, &|p: [f64; 2]| p[0].powi(i as i32) * p[1].powi(j as i32));
                let want = simplex_moment(i, j);
                assert!((got - want).abs() < 1e-14, "x^{i} y^{j}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn refinement_partitions_area() {
        let tri = [[1.0, 2.0], [4.0, 2.5], [2.0, 6.0]];
        for level in 0..4 {
            assert!((refined_triangle(&tri, level, &|_| 1.0) - area(&tri)).abs() < 1e-12);
        }
    }

    #[test]
    fn hexagon_area_and_moment() {
        let r = 150.0;
        let a = integrate_hexagon([10.0, -5.0], r, &QuadratureOptions::default(), |_| 1.0).unwrap();
        assert!((a - 1.5 * 3f64.sqrt() * r * r).abs() < 1e-6 * a);
        // Polar moment of a regular hexagon about its center: (5√3/8) R^4.
        let j = integrate_hexagon([0.0, 0.0], r, &QuadratureOptions::default(), |p| {
            p[0] * p[0] + p[1] * p[1]
        })
        .unwrap();
        assert!((j - 5.0 * 3f64.sqrt() / 8.0 * r.powi(4)).abs() < 1e-9 * j);
    }

    #[test]
    fn nonconvergence_is_reported() {
        let opts = QuadratureOptions {
            base_level: 0,
            max_level: 1,
            rel_tol: 1e-15,
        };
        // Discontinuous integrand.
        let err = integrate_hexagon([0.0, 0.0], 1.0, &opts, |p| if p[0] > 0.123 { 1.0 } else { 0.0 })
            .unwrap_err();
        assert!(matches!(err, Error::Numerical(_)));
    }
}
