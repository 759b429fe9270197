//! Subgraph densities of graphons: exact block sums for step graphons and
//! Monte Carlo estimates for everything else.

mod decompose;
mod exact;

pub use decompose::{densall_decompose, DensityPolynomial};
pub use exact::{
    block_integral, hom_exact, hom_rational, induced_exact, induced_f64, induced_rational, labelled_copies,
    BlockData, Scalar,
};

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::graph::SmallGraph;
use crate::graphon::{GraphonKernel, Interval, Kernel, StepGraphon};
use crate::mc::{self, block_stats};
use crate::rational::{self, to_f64, Rational};

/// Exact rational arithmetic is used while `parts^n` stays below this.
pub const RATIONAL_WORK_LIMIT: f64 = 2e6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    MonteCarlo,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::MonteCarlo => "monte_carlo",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensityReport {
    pub estimate: f64,
    pub std_error: f64,
    pub samples: u64,
    pub method: Method,
    /// Present when the value was computed in rational arithmetic.
    pub exact: Option<Rational>,
}

impl DensityReport {
    fn exact_rational(q: Rational) -> Self {
        DensityReport {
            estimate: to_f64(&q),
            std_error: 0.0,
            samples: 0,
            method: Method::Exact,
            exact: Some(q),
        }
    }

    fn exact_float(x: f64) -> Self {
        DensityReport {
            estimate: x,
            std_error: 0.0,
            samples: 0,
            method: Method::Exact,
            exact: None,
        }
    }

    fn monte_carlo(st: mc::Stat) -> Self {
        DensityReport {
            estimate: st.mean,
            std_error: st.std_error(),
            samples: st.n,
            method: Method::MonteCarlo,
            exact: None,
        }
    }

    /// CSV row `graph,estimate,std_error,samples,method,exact`.
    pub fn csv_row(&self, graph: &SmallGraph) -> String {
        format!(
            "\"{}\",{},{},{},{},{}",
            graph,
            self.estimate,
            self.std_error,
            self.samples,
            self.method.as_str(),
            self.exact.as_ref().map(rational::format).unwrap_or_default()
        )
    }
}

pub const CSV_HEADER: &str = "graph,estimate,std_error,samples,method,exact";

fn prefers_rational(h: &SmallGraph, w: &StepGraphon) -> bool {
    (w.parts() as f64).powi(h.n() as i32) <= RATIONAL_WORK_LIMIT
}

fn mc_product(h: &SmallGraph, w: &dyn Kernel, cfg: &RunConfig, induced: bool, label: u64) -> mc::Stat {
    let n = h.n();
    let scale = if induced { labelled_copies(h) as f64 } else { 1.0 };
    block_stats(cfg.samples, cfg.seed, label, cfg.workers, |rng| {
        let xs: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let mut p = 1.0;
        for a in 0..n {
            for b in a + 1..n {
                let v = w.value(xs[a], xs[b]);
                p *= if h.has_edge(a, b) {
                    v
                } else if induced {
                    1.0 - v
                } else {
                    continue;
                };
                if p == 0.0 {
                    return 0.0;
                }
            }
        }
        scale * p
    })
}

/// `t(H, W)`; exact for step graphons.
pub fn hom_density(h: &SmallGraph, w: &dyn GraphonKernel, cfg: &RunConfig) -> DensityReport {
    if let Some(s) = w.as_step() {
        return if prefers_rational(h, s) {
            DensityReport::exact_rational(hom_rational(h, s))
        } else {
            DensityReport::exact_float(hom_exact(h, &BlockData::<f64>::from(s)))
        };
    }
    DensityReport::monte_carlo(mc_product(h, w, cfg, false, 1))
}

/// `d(H, W)`, the probability that a W-random graph on `|H|` vertices is
/// isomorphic to `H`; exact for step graphons.
pub fn induced_density(h: &SmallGraph, w: &dyn GraphonKernel, cfg: &RunConfig) -> DensityReport {
    if let Some(s) = w.as_step() {
        return if prefers_rational(h, s) {
            DensityReport::exact_rational(induced_rational(h, s))
        } else {
            DensityReport::exact_float(induced_f64(h, &BlockData::<f64>::from(s)))
        };
    }
    DensityReport::monte_carlo(mc_product(h, w, cfg, true, 2))
}

/// Monte Carlo estimate regardless of the kernel type.
pub fn induced_density_mc(h: &SmallGraph, w: &dyn Kernel, cfg: &RunConfig) -> DensityReport {
    DensityReport::monte_carlo(mc_product(h, w, cfg, true, 2))
}

pub fn hom_density_mc(h: &SmallGraph, w: &dyn Kernel, cfg: &RunConfig) -> DensityReport {
    DensityReport::monte_carlo(mc_product(h, w, cfg, false, 1))
}

pub fn t_c4(w: &dyn GraphonKernel, cfg: &RunConfig) -> DensityReport {
    hom_density(&SmallGraph::cycle(4), w, cfg)
}

/// `∫_{A×B} W` for finite unions of intervals.
pub fn pair_density(w: &dyn Kernel, a: &[Interval], b: &[Interval]) -> f64 {
    let mut s = 0.0;
    for x in a {
        for y in b {
            s += w.rect_mass((x.lo_f(), x.hi_f()), (y.lo_f(), y.hi_f()));
        }
    }
    s
}

/// `∫_{A×B} W` exactly, for a step graphon and rational interval unions.
pub fn pair_density_exact(w: &StepGraphon, a: &[Interval], b: &[Interval]) -> Rational {
    let parts: Vec<Interval> = (0..w.parts()).map(|i| w.part_interval(i)).collect();
    let cover = |set: &[Interval], p: &Interval| -> Rational {
        set.iter().filter_map(|iv| iv.intersect(p)).map(|iv| iv.len()).sum()
    };
    let ca: Vec<Rational> = parts.iter().map(|p| cover(a, p)).collect();
    let cb: Vec<Rational> = parts.iter().map(|p| cover(b, p)).collect();
    let mut s = Rational::from_integer(0.into());
    for i in 0..w.parts() {
        for j in 0..w.parts() {
            s += &ca[i] * w.block(i, j) * &cb[j];
        }
    }
    s
}

pub fn degree(w: &dyn Kernel, x: f64) -> f64 {
    w.row_mass(x, 0.0, 1.0)
}

/// Degree of `x` into the union of `parts`, normalised by its measure.
pub fn rel_degree(w: &dyn Kernel, x: f64, parts: &[Interval]) -> f64 {
    let total: f64 = parts.iter().map(|p| p.len_f()).sum();
    let mass: f64 = parts.iter().map(|p| w.row_mass(x, p.lo_f(), p.hi_f())).sum();
    mass / total
}

/// A sampled graph of any order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SampledGraph {
    pub n: usize,
    pub edges: Vec<(u32, u32)>,
}

impl SampledGraph {
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn to_small(&self) -> crate::Result<SmallGraph> {
        let e: Vec<(usize, usize)> = self.edges.iter().map(|&(a, b)| (a as usize, b as usize)).collect();
        SmallGraph::new(self.n, &e)
    }
}

/// W-random graph on `k` vertices.
pub fn sample_w_random(w: &dyn Kernel, k: usize, seed: u64) -> SampledGraph {
    let mut rng = mc::stream(seed, 0);
    let xs: Vec<f64> = (0..k).map(|_| rng.random::<f64>()).collect();
    let mut edges = Vec::new();
    for a in 0..k {
        for b in a + 1..k {
            if rng.random::<f64>() < w.value(xs[a], xs[b]) {
                edges.push((a as u32, b as u32));
            }
        }
    }
    SampledGraph { n: k, edges }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphon::{half_graphon, ConstantKernel};
    use crate::rational::rat;

    fn halves() -> StepGraphon {
        StepGraphon::new(
            vec![rat(1, 2), rat(1, 2)],
            vec![vec![rat(0, 1), rat(1, 1)], vec![rat(1, 1), rat(0, 1)]],
        )
        .unwrap()
    }

    #[test]
    fn worked_examples() {
        let cfg = RunConfig::default();
        let half = StepGraphon::constant(rat(1, 2)).unwrap();
        assert_eq!(hom_density(&SmallGraph::cycle(4), &half, &cfg).exact, Some(rat(1, 16)));
        assert_eq!(t_c4(&halves(), &cfg).exact, Some(rat(1, 8)));
        let c = StepGraphon::constant(rat(2, 7)).unwrap();
        assert_eq!(hom_density(&SmallGraph::complete(2), &c, &cfg).exact, Some(rat(2, 7)));
        assert_eq!(induced_density(&SmallGraph::complete(3), &half, &cfg).exact, Some(rat(1, 8)));
        assert_eq!(induced_density(&SmallGraph::complete(3), &halves(), &cfg).exact, Some(rat(0, 1)));
        assert_eq!(induced_density(&SmallGraph::complete(2), &halves(), &cfg).exact, Some(rat(1, 2)));
    }

    #[test]
    fn degrees() {
        let h = half_graphon();
        assert!((degree(&h, 0.3) - 0.3).abs() < 1e-15);
        assert_eq!(degree(&ConstantKernel(0.4), 0.9), 0.4);
        let w = halves();
        let right = [w.part_interval(1)];
        assert_eq!(rel_degree(&w, 0.2, &right), 1.0);
    }

    #[test]
    fn pair_density_pullback_example() {
        let w = halves();
        // φ(x) = 2x mod 1 pulls J = [1/4, 1/2) back to [1/8,1/4) ∪ [5/8,3/4)
        let iv = |a, b, c, d| Interval::new(rat(a, b), rat(c, d)).unwrap();
        let pre_j = [iv(1, 8, 1, 4), iv(5, 8, 3, 4)];
        let pre_k = [iv(0, 1, 1, 4), iv(1, 2, 3, 4)];
        let d = pair_density_exact(&w, &pre_j, &pre_k);
        assert_eq!(d, rat(1, 4) * rat(1, 2) / rat(2, 1));
        assert!((pair_density(&w, &pre_j, &pre_k) - 1.0 / 16.0).abs() < 1e-15);
        assert_eq!(pair_density(&ConstantKernel(0.5), &[Interval::unit()], &[Interval::unit()]), 0.5);
    }

    #[test]
    fn w_random_extremes() {
        let g = sample_w_random(&ConstantKernel(1.0), 5, 3);
        assert_eq!(g.to_small().unwrap(), SmallGraph::complete(5));
        assert_eq!(sample_w_random(&ConstantKernel(0.0), 5, 3).edge_count(), 0);
        let g = sample_w_random(&ConstantKernel(0.5), 1000, 11);
        let pairs = 1000.0 * 999.0 / 2.0;
        let dens = g.edge_count() as f64 / pairs;
        assert!((dens - 0.5).abs() < 3.0 * (0.25 / pairs).sqrt());
        assert_eq!(g, sample_w_random(&ConstantKernel(0.5), 1000, 11));
    }

    #[test]
    fn monte_carlo_uses_kernel_path() {
        let cfg = RunConfig {
            samples: 200_000,
            ..RunConfig::default()
        };
        let r = hom_density(&SmallGraph::complete(2), &half_graphon(), &cfg);
        assert_eq!(r.method, Method::MonteCarlo);
        assert!((r.estimate - 0.5).abs() < 4.0 * r.std_error);
    }
}
