//! Numerical checks of a built `W_0`.

use rand::Rng as _;
use serde::Serialize;

use super::build::W0;
use crate::config::RunConfig;
use crate::constraint::{build_suite, run_suite, ConstraintReport, Status};
use crate::density::{hom_density_mc, hom_rational};
use crate::error::Result;
use crate::graph::SmallGraph;
use crate::graphon::{Interval, Kernel};
use crate::mc::{self, par_map};
use crate::rational::{self, Rational};
use num_traits::One;

/// Suites expected to pass on `W_0` with the stand-in CKM graphon.
pub const VERIFY_SUITES: [&str; 7] = [
    "coordinate",
    "checker",
    "exp_checker",
    "dyadic_ref",
    "density_transfer",
    "balancing",
    "distinguishing",
];

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    /// Largest order of the dyadic squares compared between `A_i×A_j` and
    /// `B_Gi×B_Gj`.
    pub square_depth: u32,
    pub points_per_part: usize,
    pub suites: Vec<String>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            square_depth: 3,
            points_per_part: 50,
            suites: VERIFY_SUITES.iter().map(|s| s.to_string()).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub max_deviation: f64,
    pub tol: f64,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteOutcome {
    pub suite: String,
    pub passed: bool,
    pub total: usize,
    pub failed: usize,
    pub vacuous: usize,
    pub reports: Vec<ConstraintReport>,
}

impl SuiteOutcome {
    pub fn new(suite: &str, reports: Vec<ConstraintReport>) -> Self {
        let failed = reports.iter().filter(|r| r.status == Status::Fail).count();
        SuiteOutcome {
            suite: suite.to_string(),
            passed: failed == 0,
            total: reports.len(),
            failed,
            vacuous: reports.iter().filter(|r| r.status == Status::Vacuous).count(),
            reports,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
    pub suites: Vec<SuiteOutcome>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed) && self.suites.iter().all(|s| s.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn suite(&self, name: &str) -> Option<&SuiteOutcome> {
        self.suites.iter().find(|s| s.suite == name)
    }
}

const LABEL_PRE_DEGREE: u64 = 0x7072_6564;
const LABEL_C4: u64 = 0x6334;

pub fn verify_w0(w0: &W0, cfg: &RunConfig, opts: &VerifyOptions) -> Result<VerifyReport> {
    cfg.validate()?;
    let mut checks = vec![pre_degree(w0, cfg, opts.points_per_part)];
    checks.push(distinct(w0));
    checks.push(squares(w0, opts.square_depth));
    checks.push(c4(w0, cfg));
    let params = w0.suite_params();
    let mut suites = Vec::new();
    for name in &opts.suites {
        let suite = build_suite(name, &params)?;
        suites.push(SuiteOutcome::new(name, run_suite(&suite, w0.graphon(), cfg)?));
    }
    Ok(VerifyReport { checks, suites })
}

/// Sampled `∫_{[0,G_2.lo)} W_0(x,z) dz` against `pdeg(X)` at stratified
/// points of each part, with paired stratified `z`; also the exact row mass.
pub fn pre_degree(w0: &W0, cfg: &RunConfig, points: usize) -> Check {
    let table = w0.table();
    let span = table.parts()[w0.blocks.g2].interval.lo_f();
    let k = w0.kernel();
    let n = (cfg.ext_samples / 2).max(1) as usize;
    let parts: Vec<usize> = (0..w0.blocks.g1).filter(|&i| !table.parts()[i].interval.is_empty()).collect();
    let per_part = par_map(parts.len(), cfg.workers, |pi| {
        let p = &table.parts()[parts[pi]];
        let pdeg = p.pre_degree.as_ref().map_or(f64::NAN, rational::to_f64);
        let mut rng = mc::stream(cfg.seed, mc::stream_id(&[LABEL_PRE_DEGREE, parts[pi] as u64]));
        let (mut worst, mut worst_exact, mut fails) = (0.0f64, 0.0f64, 0usize);
        for j in 0..points {
            let x = p.interval.lo_f() + p.interval.len_f() * (j as f64 + rng.random::<f64>()) / points as f64;
            let (mut sum, mut sq) = (0.0, 0.0);
            for s in 0..n {
                let z = |r: f64| span * ((2 * s) as f64 + r) / (2 * n) as f64;
                let a = k.value(x, z(rng.random::<f64>()));
                let b = k.value(x, z(1.0 + rng.random::<f64>()));
                sum += a + b;
                sq += (a - b) * (a - b);
            }
            let est = span * sum / (2 * n) as f64;
            let se = span * sq.sqrt() / (2 * n) as f64;
            let dev = (est - pdeg).abs();
            if dev > 3.0 * se + 1e-3 {
                fails += 1;
            }
            worst = worst.max(dev);
            worst_exact = worst_exact.max((w0.pre_degree_integral(x) - pdeg).abs());
        }
        (worst, worst_exact, fails)
    });
    let worst = per_part.iter().map(|r| r.0).fold(0.0, f64::max);
    let exact = per_part.iter().map(|r| r.1).fold(0.0, f64::max);
    let fails: usize = per_part.iter().map(|r| r.2).sum();
    Check {
        name: "pre_degree".into(),
        passed: fails == 0 && exact <= 1e-9,
        max_deviation: worst,
        tol: 1e-3,
        detail: format!(
            "{} parts x {points} points, {} z-samples each; {fails} outside 3se+1e-3; exact row mass off by at most {exact:.3e}",
            parts.len(),
            2 * n
        ),
    }
}

/// Degrees pairwise distinct, and equal to `pdeg + δ` outside `G`. Parts of
/// measure zero take part with their nominal degree `pdeg + δ`.
pub fn distinct(w0: &W0) -> Check {
    let table = w0.table();
    let measured = w0.graphon().degrees();
    let mut law = 0.0f64;
    let mut all = Vec::with_capacity(measured.len());
    for (p, d) in table.parts().iter().zip(&measured) {
        let nominal = p.pre_degree.as_ref().zip(p.delta).map(|(q, delta)| rational::to_f64(q) + delta);
        if let (Some(d), Some(n)) = (d, nominal) {
            law = law.max((d - n).abs());
        }
        all.extend(d.or(nominal));
    }
    all.sort_by(f64::total_cmp);
    let gap = all.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    let live = measured.iter().flatten().count();
    Check {
        name: "distinct_degrees".into(),
        passed: all.len() == table.len() && gap >= 1e-12 && law <= 1e-9,
        max_deviation: law,
        tol: 1e-9,
        detail: format!(
            "{} degrees ({live} measured), smallest gap {gap:.3e}, degree law off by {law:.3e}",
            all.len()
        ),
    }
}

fn sub(iv: &Interval, a: f64, b: f64) -> (f64, f64) {
    (iv.lo_f() + a * iv.len_f(), iv.lo_f() + b * iv.len_f())
}

/// Densities of all dyadic squares of order up to `depth` inside
/// `A_i×A_j`, `B_Gi×B_Gj` and the matching block of `W_F`.
pub fn squares(w0: &W0, depth: u32) -> Check {
    let table = w0.table();
    let k = w0.tiled();
    let bl = &w0.blocks;
    let a_len = Rational::one() - &w0.params.epsilon;
    let q: Vec<Interval> = bl
        .a
        .clone()
        .map(|i| {
            let iv = &table.parts()[i].interval;
            let (lo, hi) = (iv.lo() / &a_len, iv.hi() / &a_len);
            if iv.is_empty() {
                Interval::empty_at(lo)
            } else {
                Interval::new(lo, hi)
            }
            .expect("A parts lie in [0, 1-ε)")
        })
        .collect();
    let live: Vec<usize> = (0..bl.a.len()).filter(|&i| !q[i].is_empty()).collect();
    let (mut worst, mut count) = (0.0f64, 0usize);
    for &i in &live {
        for &j in &live {
            let ai = &table.parts()[bl.a.start + i].interval;
            let aj = &table.parts()[bl.a.start + j].interval;
            let bi = &table.parts()[bl.b_g.start + i].interval;
            let bj = &table.parts()[bl.b_g.start + j].interval;
            for s in 0..=depth {
                let n = 1u64 << s;
                for a in 0..n {
                    for b in 0..n {
                        let (u0, u1) = (a as f64 / n as f64, (a + 1) as f64 / n as f64);
                        let (v0, v1) = (b as f64 / n as f64, (b + 1) as f64 / n as f64);
                        let dens = |x: &Interval, y: &Interval, w: &dyn Kernel| {
                            let (rx, ry) = (sub(x, u0, u1), sub(y, v0, v1));
                            w.rect_mass(rx, ry) / ((rx.1 - rx.0) * (ry.1 - ry.0))
                        };
                        let da = dens(ai, aj, k);
                        let db = dens(bi, bj, k);
                        let df = dens(&q[i], &q[j], &w0.wf);
                        worst = worst.max((da - db).abs()).max((da - df).abs());
                        count += 1;
                    }
                }
            }
        }
    }
    Check {
        name: "dyadic_squares".into(),
        passed: worst <= 1e-9,
        max_deviation: worst,
        tol: 1e-9,
        detail: format!("{count} squares of order <= {depth} over {} live A parts", live.len()),
    }
}

/// `W_0` read on `A_*` and rescaled to [0,1).
#[derive(Debug)]
struct Restricted<'a> {
    inner: &'a dyn Kernel,
    len: f64,
}

impl Kernel for Restricted<'_> {
    fn value(&self, x: f64, y: f64) -> f64 {
        self.inner.value(x * self.len, y * self.len)
    }
    fn row_mass(&self, x: f64, lo: f64, hi: f64) -> f64 {
        self.inner.row_mass(x * self.len, lo * self.len, hi * self.len) / self.len
    }
    fn col_mass(&self, y: f64, lo: f64, hi: f64) -> f64 {
        self.row_mass(y, lo, hi)
    }
}

/// Sampled `t(C_4)` of the `A_*` subgraphon against the exact `t(C_4, W_F)`.
pub fn c4(w0: &W0, cfg: &RunConfig) -> Check {
    let c4 = SmallGraph::cycle(4);
    let exact = rational::to_f64(&hom_rational(&c4, &w0.wf));
    let sub = Restricted {
        inner: w0.tiled(),
        len: 1.0 - w0.params.epsilon_f(),
    };
    let mut c = cfg.clone();
    c.seed = mc::stream_id(&[cfg.seed, LABEL_C4]);
    let est = hom_density_mc(&c4, &sub, &c);
    let dev = (est.estimate - exact).abs();
    let tol = 3.0 * est.std_error + 1e-3;
    Check {
        name: "c4_transfer".into(),
        passed: dev <= tol,
        max_deviation: dev,
        tol,
        detail: format!("sampled {:.6} (se {:.2e}, n = {}), exact {exact:.6}", est.estimate, est.std_error, est.samples),
    }
}
