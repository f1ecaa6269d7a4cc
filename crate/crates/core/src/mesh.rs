//! Graded one-dimensional meshes.
//!
//! Nodes are images of a uniform parameter grid ξ_i = i/(n-1) under a smooth
//! monotone map whose density has Lorentzian peaks at chosen focus points.
//! Because the map does not depend on `n`, the grid with 2n-1 nodes contains
//! the grid with n nodes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::GaussRule;
use crate::weight::ProblemParams;

/// Large prime: the parameter position of an avoided point is a multiple of
/// 1/`AVOID_DENOM`, so it never coincides with i/(n-1) for n - 1 < `AVOID_DENOM`.
const AVOID_DENOM: f64 = 1_000_003.0;

/// A clustering point of the node density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Focus {
    pub center: f64,
    pub width: f64,
    /// Fraction of the background density concentrated around `center`.
    pub mass: f64,
}

/// Description of how the nodes are distributed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grading {
    pub strength: f64,
    pub foci: Vec<Focus>,
    /// Point that is kept strictly between nodes (the shell r = R).
    pub avoided: Option<f64>,
}

#[derive(Debug, Clone)]
struct GradedMap {
    lo: f64,
    hi: f64,
    foci: Vec<Focus>,
    total: f64,
    // H(x) = G(x) + correction * t (1 - t)
    correction: f64,
}

impl GradedMap {
    fn new(lo: f64, hi: f64, foci: &[Focus], avoided: Option<f64>) -> Self {
        let mut map = Self {
            lo,
            hi,
            foci: foci.to_vec(),
            total: 1.0,
            correction: 0.0,
        };
        map.total = map.raw(hi);
        if let Some(x) = avoided {
            if x > lo && x < hi {
                let g = map.forward(x);
                let q = (g * AVOID_DENOM).round().clamp(1.0, AVOID_DENOM - 1.0);
                let t = (x - lo) / (hi - lo);
                map.correction = (q / AVOID_DENOM - g) / (t * (1.0 - t));
            }
        }
        map
    }

    fn raw(&self, x: f64) -> f64 {
        let mut value = (x - self.lo) / (self.hi - self.lo);
        for f in &self.foci {
            value += f.mass / std::f64::consts::PI
                * (((x - f.center) / f.width).atan() - ((self.lo - f.center) / f.width).atan());
        }
        value
    }

    fn forward(&self, x: f64) -> f64 {
        let t = (x - self.lo) / (self.hi - self.lo);
        self.raw(x) / self.total + self.correction * t * (1.0 - t)
    }

    fn inverse(&self, xi: f64) -> f64 {
        if xi <= 0.0 {
            return self.lo;
        }
        if xi >= 1.0 {
            return self.hi;
        }
        let (mut a, mut b) = (self.lo, self.hi);
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            if self.forward(mid) < xi {
                a = mid;
            } else {
                b = mid;
            }
        }
        0.5 * (a + b)
    }

    fn nodes(&self, n: usize) -> Vec<f64> {
        let mut nodes: Vec<f64> = (0..n)
            .map(|i| self.inverse(i as f64 / (n - 1) as f64))
            .collect();
        nodes[0] = self.lo;
        nodes[n - 1] = self.hi;
        nodes
    }
}

/// Graded mesh of [0, 1] for radial functions, with lumped weights of the
/// measure r^{N-1} dr.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RadialGrid {
    pub dim: usize,
    pub n: usize,
    pub nodes: Vec<f64>,
    /// w_i = ∫_0^1 φ_i(r) r^{N-1} dr for the hat functions φ_i; they sum to 1/N.
    pub measure_weights: Vec<f64>,
    pub grading: Grading,
}

/// Default focus layout for the radial variable: clusters at the boundary, at
/// the origin and at the shell, with widths set by the decay scale 1/(1+α)
/// of the weight near each region.
pub fn radial_foci(params: &ProblemParams, strength: f64) -> Vec<Focus> {
    let scale = 1.0 / (1.0 + params.alpha);
    let big_r = params.radius;
    let mut foci = Vec::new();
    if strength <= 0.0 {
        return foci;
    }
    if big_r < 1.0 {
        foci.push(Focus {
            center: 1.0,
            width: ((1.0 - big_r) * scale).max(1e-5),
            mass: strength,
        });
    }
    if big_r > 0.0 {
        foci.push(Focus {
            center: 0.0,
            width: (big_r * scale).max(1e-5),
            mass: strength,
        });
    }
    if params.has_interior_shell() {
        foci.push(Focus {
            center: big_r,
            width: big_r.min(1.0 - big_r) * scale.max(0.05),
            mass: 0.5 * strength,
        });
    }
    foci
}

/// Builds a graded radial grid. Nodes cluster geometrically near r = 1 and,
/// when R is interior, near r = R; the shell itself is never a node.
pub fn build_radial_grid(params: &ProblemParams, n: usize, grading_strength: f64) -> Result<RadialGrid> {
    if n < 16 {
        return Err(Error::InvalidParams(format!("radial grid needs n >= 16 nodes, got {n}")));
    }
    if !(grading_strength >= 0.0) {
        return Err(Error::InvalidParams(format!(
            "grading strength must be >= 0, got {grading_strength}"
        )));
    }
    let foci = radial_foci(params, grading_strength);
    let avoided = params.has_interior_shell().then_some(params.radius);
    let map = GradedMap::new(0.0, 1.0, &foci, avoided);
    let nodes = map.nodes(n);
    let measure_weights = lumped_weights(&nodes, |r| r.powi(params.dim as i32 - 1), params.dim);
    Ok(RadialGrid {
        dim: params.dim,
        n,
        nodes,
        measure_weights,
        grading: Grading {
            strength: grading_strength,
            foci,
            avoided,
        },
    })
}

impl RadialGrid {
    /// Grid with 2n - 1 nodes on the same map, containing every node of `self`.
    pub fn refined(&self) -> RadialGrid {
        let map = GradedMap::new(0.0, 1.0, &self.grading.foci, self.grading.avoided);
        let nodes = map.nodes(2 * self.n - 1);
        let dim = self.dim;
        let measure_weights = lumped_weights(&nodes, |r| r.powi(dim as i32 - 1), dim);
        RadialGrid {
            dim,
            n: nodes.len(),
            nodes,
            measure_weights,
            grading: self.grading.clone(),
        }
    }

    pub fn max_spacing(&self) -> f64 {
        self.nodes
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }

    /// Index of the element [r_e, r_{e+1}] containing the avoided shell.
    pub fn shell_element(&self) -> Option<usize> {
        let shell = self.grading.avoided?;
        self.nodes.windows(2).position(|w| w[0] < shell && shell < w[1])
    }
}

/// Lumped weights ∫ φ_i(x) ρ(x) dx for hat functions, with ρ a polynomial of
/// degree below `exact_degree`.
fn lumped_weights(nodes: &[f64], density: impl Fn(f64) -> f64, exact_degree: usize) -> Vec<f64> {
    let rule = GaussRule::new(exact_degree.div_ceil(2) + 1);
    let mut weights = vec![0.0; nodes.len()];
    for (e, w) in nodes.windows(2).enumerate() {
        let (a, b) = (w[0], w[1]);
        let h = b - a;
        let left = rule.integrate(a, b, |x| (b - x) / h * density(x));
        let right = rule.integrate(a, b, |x| (x - a) / h * density(x));
        weights[e] += left;
        weights[e + 1] += right;
    }
    weights
}

/// Graded mesh of [0, π] for the polar angle, clustered at θ = 0 where the
/// concentrating peak of an axially symmetric field sits.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AngularGrid {
    pub n: usize,
    pub nodes: Vec<f64>,
    pub grading: Grading,
}

pub fn build_angular_grid(n: usize, width: f64, strength: f64) -> AngularGrid {
    let foci = if strength > 0.0 {
        vec![Focus {
            center: 0.0,
            width,
            mass: strength,
        }]
    } else {
        Vec::new()
    };
    let map = GradedMap::new(0.0, std::f64::consts::PI, &foci, None);
    AngularGrid {
        n,
        nodes: map.nodes(n),
        grading: Grading {
            strength,
            foci,
            avoided: None,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(radius: f64, alpha: f64) -> ProblemParams {
        ProblemParams::new(3, 2.0, radius, alpha).unwrap()
    }

    #[test]
    fn weights_sum_to_exact_moment() {
        for dim in 1..=5 {
            let pr = ProblemParams::new(dim, 1.5, 0.3, 40.0).unwrap();
            let grid = build_radial_grid(&pr, 401, 1.0).unwrap();
            let total: f64 = grid.measure_weights.iter().sum();
            assert!((total - 1.0 / dim as f64).abs() < 1e-12 / dim as f64, "N = {dim}: {total}");
        }
    }

    #[test]
    fn shell_is_never_a_node() {
        let pr = params(0.5, 10.0);
        let mut grid = build_radial_grid(&pr, 33, 1.0).unwrap();
        for _ in 0..6 {
            let gap = grid.nodes.iter().map(|r| (r - 0.5).abs()).fold(f64::INFINITY, f64::min);
            assert!(gap > 0.0);
            assert!(grid.shell_element().is_some());
            grid = grid.refined();
        }
    }

    #[test]
    fn refinement_is_nested_and_halves_spacing() {
        let pr = params(0.3, 25.0);
        let coarse = build_radial_grid(&pr, 65, 1.0).unwrap();
        let fine = coarse.refined();
        assert_eq!(fine.n, 129);
        for (i, &r) in coarse.nodes.iter().enumerate() {
            assert!((fine.nodes[2 * i] - r).abs() < 1e-14);
        }
        let ratio = coarse.max_spacing() / fine.max_spacing();
        assert!((ratio - 2.0).abs() < 0.05, "ratio {ratio}");
        let direct = build_radial_grid(&pr, 129, 1.0).unwrap();
        assert_eq!(direct.nodes, fine.nodes);
    }

    #[test]
    fn nodes_increase_and_cluster_at_boundary() {
        let grid = build_radial_grid(&params(0.0, 300.0), 200, 1.0).unwrap();
        assert_eq!(grid.nodes[0], 0.0);
        assert_eq!(grid.nodes[199], 1.0);
        assert!(grid.nodes.windows(2).all(|w| w[0] < w[1]));
        assert!(grid.nodes.iter().filter(|&&r| r > 0.98).count() > 40);
    }

    #[test]
    fn rejects_tiny_grids() {
        assert!(build_radial_grid(&params(0.0, 1.0), 8, 1.0).is_err());
    }

    #[test]
    fn angular_grid_spans_half_circle() {
        let g = build_angular_grid(64, 0.01, 1.0);
        assert_eq!(g.nodes[0], 0.0);
        assert_eq!(g.nodes[63], std::f64::consts::PI);
        assert!(g.nodes[1] < 0.01);
    }
}
