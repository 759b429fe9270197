//! Two step graphons agreeing on every graph with at most `n` vertices yet
//! separated by `ω`: a family with independent density vectors, the block
//! graphon built from it, stretching of its blocks, and a Newton solve that
//! restores the densities after the clique block has grown.

use nalgebra::{DMatrix, DVector};
use num_traits::{One, Signed, Zero};
use rand::Rng as _;
use serde::Serialize;
use serde_json::json;

use crate::config::RunConfig;
use crate::density::{block_integral, densall_decompose, induced_rational, labelled_copies, BlockData, Scalar};
use crate::error::{Error, Result};
use crate::graph::{enumerate_all, enumerate_connected, SmallGraph};
use crate::graphon::StepGraphon;
use crate::mc;
use crate::rational::{self, from_f64, int, rat, to_f64, Rational};
use crate::spectral::omega;

pub const MAX_TRIALS: usize = 10_000;
pub const NEWTON_MAX_ITER: usize = 100;
pub const FD_STEP: f64 = 1e-5;
/// Newton stops once every density matches to this.
pub const NEWTON_TOL: f64 = 1e-13;
/// Largest accepted condition number of the Jacobian.
pub const MAX_CONDITION: f64 = 1e12;

/// Connected graphs `H_1..H_m` on 2 to `n` vertices and step graphons
/// `W_1..W_m` whose density vectors are linearly independent.
#[derive(Clone, Debug, PartialEq)]
pub struct ElsFamily {
    pub n: usize,
    pub graphs: Vec<SmallGraph>,
    pub members: Vec<StepGraphon>,
    /// Part measures used for each member (without the remainder part).
    pub s: Vec<Vec<Rational>>,
    /// `matrix[i][j] = d(H_i, W_j)`.
    pub matrix: Vec<Vec<Rational>>,
    pub trials: usize,
}

impl ElsFamily {
    pub fn m(&self) -> usize {
        self.graphs.len()
    }
}

/// `H`'s adjacency on parts of measures `s`, plus a null remainder part.
pub fn indicator_graphon(h: &SmallGraph, s: &[Rational]) -> Result<StepGraphon> {
    let k = h.n();
    if s.len() != k {
        return Err(Error::Size(format!("{} measures for {k} vertices", s.len())));
    }
    let mut measures = s.to_vec();
    let rest = Rational::one() - s.iter().sum::<Rational>();
    if rest.is_negative() {
        return Err(Error::MeasureSum(rational::format(&(Rational::one() - rest))));
    }
    if rest.is_positive() {
        measures.push(rest);
    }
    let parts = measures.len();
    let values = (0..parts)
        .map(|a| {
            (0..parts)
                .map(|b| if a < k && b < k && h.has_edge(a, b) { Rational::one() } else { Rational::zero() })
                .collect()
        })
        .collect();
    StepGraphon::new(measures, values)
}

pub fn rank(matrix: &[Vec<Rational>]) -> usize {
    let mut a: Vec<Vec<Rational>> = matrix.to_vec();
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        for i in 0..rows {
            if i != r && !a[i][c].is_zero() {
                let f = &a[i][c] / &a[r][c];
                for j in c..cols {
                    let t = &f * &a[r][j];
                    a[i][j] -= t;
                }
            }
        }
        r += 1;
    }
    r
}

const LABEL_ELS: u64 = 0x656c_73;

pub fn check_size(n: usize) -> Result<()> {
    if !(3..=4).contains(&n) {
        return Err(Error::Range(format!("n = {n} (supported: 3, 4)")));
    }
    Ok(())
}

/// Samples part measures from `(0.1, 0.3)` on a grid of step `1/1000` until
/// the density matrix has full rank.
pub fn els_family(n: usize, seed: u64) -> Result<ElsFamily> {
    check_size(n)?;
    let graphs = enumerate_connected(n)?;
    let m = graphs.len();
    let mut rng = mc::stream(seed, mc::stream_id(&[LABEL_ELS, n as u64]));
    for trial in 1..=MAX_TRIALS {
        let mut s = Vec::with_capacity(m);
        for h in &graphs {
            loop {
                let v: Vec<Rational> = (0..h.n()).map(|_| rat(rng.random_range(101..300), 1000)).collect();
                if v.iter().sum::<Rational>() < Rational::one() {
                    s.push(v);
                    break;
                }
            }
        }
        let members = graphs.iter().zip(&s).map(|(h, v)| indicator_graphon(h, v)).collect::<Result<Vec<_>>>()?;
        let matrix: Vec<Vec<Rational>> =
            graphs.iter().map(|h| members.iter().map(|w| induced_rational(h, w)).collect()).collect();
        if rank(&matrix) == m {
            return Ok(ElsFamily {
                n,
                graphs,
                members,
                s,
                matrix,
                trials: trial,
            });
        }
    }
    Err(Error::RankFailure(MAX_TRIALS))
}

/// Block diagonal: `W_1..W_m` and the constant 1 each on a `1/(m+2)` slice,
/// the last slice null.
pub fn assemble_wf(fam: &ElsFamily) -> Result<StepGraphon> {
    embed(fam, &Rational::zero(), &StretchVector::uniform(fam.m()))
}

/// Lengths `s_1..s_{m+1}` of the stretched blocks as fractions of
/// `1 - ε'`; the null block takes `1 - Σs`, which must stay positive.
#[derive(Clone, Debug, PartialEq)]
pub struct StretchVector {
    pub s: Vec<Rational>,
}

impl StretchVector {
    pub fn uniform(m: usize) -> Self {
        StretchVector {
            s: vec![rat(1, m as i64 + 2); m + 1],
        }
    }

    pub fn from_f64(s: &[f64]) -> Result<Self> {
        Ok(StretchVector {
            s: s.iter().map(|&x| from_f64(x)).collect::<Result<_>>()?,
        })
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.s.iter().map(to_f64).collect()
    }

    pub fn validate(&self, m: usize) -> Result<()> {
        if self.s.len() != m + 1 {
            return Err(Error::Layout(format!("{} stretch entries for {} blocks", self.s.len(), m + 1)));
        }
        if let Some(x) = self.s.iter().find(|x| !x.is_positive()) {
            return Err(Error::Range(format!("stretch entry {} is not positive", rational::format(x))));
        }
        let total: Rational = self.s.iter().sum();
        if total >= Rational::one() {
            return Err(Error::Range(format!("stretch entries sum to {}", rational::format(&total))));
        }
        Ok(())
    }
}

/// Blocks `W_1..W_m`, the constant 1, a null block and a null tail of
/// measure `ε'`; block `i` has measure `s_i(1-ε')`.
fn embed(fam: &ElsFamily, eps_prime: &Rational, sv: &StretchVector) -> Result<StepGraphon> {
    let m = fam.m();
    sv.validate(m)?;
    let body = Rational::one() - eps_prime;
    let mut measures: Vec<Rational> = Vec::new();
    let mut block_of: Vec<Option<(usize, usize)>> = Vec::new();
    for (j, w) in fam.members.iter().enumerate() {
        for (p, mu) in w.measures().iter().enumerate() {
            measures.push(mu * &sv.s[j] * &body);
            block_of.push(Some((j, p)));
        }
    }
    measures.push(&sv.s[m] * &body);
    block_of.push(Some((m, 0)));
    measures.push((Rational::one() - sv.s.iter().sum::<Rational>()) * &body);
    block_of.push(None);
    if eps_prime.is_positive() {
        measures.push(eps_prime.clone());
        block_of.push(None);
    }
    let values = block_of
        .iter()
        .map(|a| {
            block_of
                .iter()
                .map(|b| match (a, b) {
                    (Some((i, p)), Some((j, q))) if i == j => {
                        if *i == m {
                            Rational::one()
                        } else {
                            fam.members[*i].block(*p, *q).clone()
                        }
                    }
                    _ => Rational::zero(),
                })
                .collect()
        })
        .collect();
    StepGraphon::new(measures, values)
}

/// `W_F` on `[0, 1-ε')` with a null tail; the graphon whose blocks get
/// stretched.
#[derive(Clone, Debug, PartialEq)]
pub struct Layout {
    pub family: ElsFamily,
    pub eps_prime: Rational,
}

impl Layout {
    pub fn new(family: ElsFamily, eps_prime: Rational) -> Result<Self> {
        if eps_prime.is_negative() || eps_prime >= Rational::one() {
            return Err(Error::Range(format!("epsilon' {}", rational::format(&eps_prime))));
        }
        Ok(Layout { family, eps_prime })
    }

    pub fn m(&self) -> usize {
        self.family.m()
    }

    pub fn base(&self) -> Result<StepGraphon> {
        self.stretch(&StretchVector::uniform(self.m()))
    }

    pub fn stretch(&self, sv: &StretchVector) -> Result<StepGraphon> {
        embed(&self.family, &self.eps_prime, sv)
    }

    /// Checks that `w` is this layout at some stretch and returns it.
    pub fn read(&self, w: &StepGraphon) -> Result<StretchVector> {
        let m = self.m();
        let body = Rational::one() - &self.eps_prime;
        let mut at = 0;
        let mut s = Vec::with_capacity(m + 1);
        for member in &self.family.members {
            let k = member.parts();
            if at + k > w.parts() {
                return Err(Error::Layout(format!("{} parts are too few", w.parts())));
            }
            let total: Rational = w.measures()[at..at + k].iter().sum();
            s.push(&total / &body);
            at += k;
        }
        if at + 2 + usize::from(self.eps_prime.is_positive()) != w.parts() {
            return Err(Error::Layout(format!("expected {} parts, found {}", at + 2, w.parts())));
        }
        s.push(w.measure(at) / &body);
        let sv = StretchVector { s };
        sv.validate(m)?;
        if &self.stretch(&sv)? != w {
            return Err(Error::Layout("blocks do not match the family".into()));
        }
        Ok(sv)
    }
}

/// `w` with its blocks stretched to `sv`; `w` must be a stretch of the
/// layout.
pub fn stretch(layout: &Layout, w: &StepGraphon, sv: &StretchVector) -> Result<StepGraphon> {
    layout.read(w)?;
    layout.stretch(sv)
}

/// `∫ ∏_E W ∏_{non-E} (1-W)` over a disjoint union of blocks `U_j` on
/// measures `α_j`, plus a null part of measure `null`. Every edge of `H`
/// has to land inside one block.
pub fn disjoint_union_integral<S: Scalar>(h: &SmallGraph, blocks: &[BlockData<S>], alphas: &[S], null: &S) -> S {
    let n = h.n();
    let b = blocks.len();
    let edges = h.edges();
    let mut memo: Vec<Vec<Option<S>>> = vec![vec![None; 1 << n]; b];
    let mut f = vec![0usize; n];
    let mut total = S::zero();
    loop {
        if edges.iter().all(|&(u, v)| f[u] == f[v] && f[u] < b) {
            let mut term = S::one();
            for (j, block) in blocks.iter().enumerate() {
                let mask = (0..n).filter(|&v| f[v] == j).fold(0usize, |m, v| m | 1 << v);
                if mask == 0 {
                    continue;
                }
                let inner = memo[j][mask].get_or_insert_with(|| {
                    let vs: Vec<usize> = (0..n).filter(|&v| mask >> v & 1 == 1).collect();
                    block_integral(&h.induced(&vs), block, true)
                });
                term = term * inner.clone();
                for _ in 0..mask.count_ones() {
                    term = term * alphas[j].clone();
                }
            }
            for _ in f.iter().filter(|&&x| x == b) {
                term = term * null.clone();
            }
            total = total + term;
        }
        let mut i = 0;
        while i < n && f[i] == b {
            f[i] = 0;
            i += 1;
        }
        if i == n {
            return total;
        }
        f[i] += 1;
    }
}

impl Layout {
    fn alphas(&self, sv: &StretchVector) -> (Vec<Rational>, Rational) {
        let body = Rational::one() - &self.eps_prime;
        let alphas = sv.s.iter().map(|x| x * &body).collect();
        let null = Rational::one() - sv.s.iter().sum::<Rational>() * &body;
        (alphas, null)
    }

    fn blocks<S>(&self) -> Vec<BlockData<S>>
    where
        for<'a> BlockData<S>: From<&'a StepGraphon>,
    {
        let one = StepGraphon::constant(Rational::one()).expect("constant graphon");
        self.family.members.iter().chain([&one]).map(BlockData::from).collect()
    }

    /// Exact induced densities of `graphs` in the stretch `sv`.
    pub fn densities(&self, graphs: &[SmallGraph], sv: &StretchVector) -> Vec<Rational> {
        let (alphas, null) = self.alphas(sv);
        let blocks = self.blocks::<Rational>();
        graphs
            .iter()
            .map(|h| int(labelled_copies(h) as i64) * disjoint_union_integral(h, &blocks, &alphas, &null))
            .collect()
    }

    pub fn densities_f64(&self, graphs: &[SmallGraph], sv: &StretchVector) -> Vec<f64> {
        let (alphas, null) = self.alphas(sv);
        let alphas: Vec<f64> = alphas.iter().map(to_f64).collect();
        let null = to_f64(&null);
        let blocks = self.blocks::<f64>();
        graphs
            .iter()
            .map(|h| labelled_copies(h) as f64 * disjoint_union_integral(h, &blocks, &alphas, &null))
            .collect()
    }
}

fn perturbed(sv: &StretchVector, j: usize, by: f64) -> Result<StretchVector> {
    let mut s = sv.clone();
    s.s[j] += from_f64(by)?;
    Ok(s)
}

/// `∂ d(H_i, W_s)/∂ s_j` for `i, j ≤ m` by central differences.
pub fn density_jacobian(layout: &Layout, sv: &StretchVector, step: f64) -> Result<DMatrix<f64>> {
    let m = layout.m();
    let graphs = &layout.family.graphs;
    let mut jac = DMatrix::zeros(m, m);
    for j in 0..m {
        let (up, down) = (perturbed(sv, j, step)?, perturbed(sv, j, -step)?);
        up.validate(m)?;
        down.validate(m)?;
        let plus = layout.densities_f64(graphs, &up);
        let minus = layout.densities_f64(graphs, &down);
        for i in 0..m {
            jac[(i, j)] = (plus[i] - minus[i]) / (2.0 * step);
        }
    }
    Ok(jac)
}

/// `(1-ε')^{k_i} k_i s_j^{k_i-1} d(H_i, W_j)`.
pub fn analytic_jacobian(layout: &Layout, sv: &StretchVector) -> DMatrix<f64> {
    let m = layout.m();
    let body = 1.0 - to_f64(&layout.eps_prime);
    let fam = &layout.family;
    DMatrix::from_fn(m, m, |i, j| {
        let k = fam.graphs[i].n() as i32;
        body.powi(k) * k as f64 * to_f64(&sv.s[j]).powi(k - 1) * to_f64(&fam.matrix[i][j])
    })
}

pub fn condition_number(a: &DMatrix<f64>) -> f64 {
    let sv = a.clone().svd(false, false).singular_values;
    let max = sv.iter().copied().fold(0.0, f64::max);
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Match {
    pub stretch: StretchVector,
    pub w_prime: StepGraphon,
    pub iterations: usize,
    pub residual: f64,
}

/// Pins `s_{m+1} = z` and solves for `s_1..s_m` so that every `H_i` has
/// the same density as in the unstretched layout.
pub fn match_densities(layout: &Layout, z: &Rational) -> Result<Match> {
    let m = layout.m();
    let graphs = &layout.family.graphs;
    let target = layout.densities_f64(graphs, &StretchVector::uniform(m));
    let mut sv = StretchVector::uniform(m);
    sv.s[m] = z.clone();
    sv.validate(m)?;
    for it in 0..=NEWTON_MAX_ITER {
        let f: Vec<f64> = layout.densities_f64(graphs, &sv).iter().zip(&target).map(|(a, b)| a - b).collect();
        let residual = f.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
        if residual <= NEWTON_TOL {
            return Ok(Match {
                w_prime: layout.stretch(&sv)?,
                stretch: sv,
                iterations: it,
                residual,
            });
        }
        if it == NEWTON_MAX_ITER {
            break;
        }
        let jac = density_jacobian(layout, &sv, FD_STEP)?;
        let step = jac
            .lu()
            .solve(&DVector::from_vec(f))
            .ok_or_else(|| Error::NewtonDivergence(format!("singular Jacobian at iteration {it}")))?;
        let cur = sv.to_f64();
        let next: Vec<f64> = (0..=m).map(|j| if j < m { cur[j] - step[j] } else { cur[j] }).collect();
        let mut nsv = StretchVector::from_f64(&next[..m])?;
        nsv.s.push(sv.s[m].clone());
        nsv.validate(m)
            .map_err(|e| Error::NewtonDivergence(format!("iterate left the admissible box: {e}")))?;
        sv = nsv;
    }
    Err(Error::NewtonDivergence(format!("no convergence in {NEWTON_MAX_ITER} iterations")))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapVerdict {
    pub omega_w: String,
    pub omega_w_prime: String,
    pub gap: f64,
    pub distinct: bool,
    pub verdict: String,
}

pub const NOT_WEAKLY_ISOMORPHIC: &str = "not weakly isomorphic";
pub const INDISTINGUISHABLE: &str = "indistinguishable by omega";

pub fn verify_gap(w: &StepGraphon, w_prime: &StepGraphon) -> Result<GapVerdict> {
    let (a, b) = (omega(w)?, omega(w_prime)?);
    let gap = &b - &a;
    let distinct = !gap.is_zero();
    Ok(GapVerdict {
        omega_w: rational::format(&a),
        omega_w_prime: rational::format(&b),
        gap: to_f64(&gap),
        distinct,
        verdict: if distinct { NOT_WEAKLY_ISOMORPHIC } else { INDISTINGUISHABLE }.to_string(),
    })
}

/// `(z(m+2) - 1)/((m+2)(m+4))`.
pub fn gap_lower_bound(m: usize, z: &Rational) -> Rational {
    let m2 = int(m as i64 + 2);
    (z * &m2 - Rational::one()) / (m2 * int(m as i64 + 4))
}

/// `1/(m+2) + 1/1000`.
pub fn default_z(m: usize) -> Rational {
    rat(1, m as i64 + 2) + rat(1, 1000)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Certificate {
    pub n: usize,
    pub m: usize,
    pub z: Rational,
    pub eps_prime: Rational,
    pub halvings: u32,
    /// Times the default `z - 1/(m+2)` was halved before Newton converged.
    pub z_halvings: u32,
    pub condition: f64,
    pub w: StepGraphon,
    pub w_prime: StepGraphon,
    pub newton: Match,
    pub graphs: Vec<SmallGraph>,
    pub densities_w: Vec<Rational>,
    pub densities_w_prime: Vec<Rational>,
    pub max_density_gap: f64,
    /// Largest difference between `d(H, W')` and the connected-graph
    /// decomposition of `d(H, ·)` evaluated at the densities of `W`.
    pub decomposition_gap: f64,
    pub gap: GapVerdict,
    pub gap_lower_bound: Rational,
    pub trials: usize,
}

impl Certificate {
    pub fn not_weakly_isomorphic(&self) -> bool {
        self.gap.distinct && self.gap.gap > 0.0 && self.max_density_gap <= 1e-9
    }

    pub fn degenerate(&self) -> bool {
        self.z == rat(1, self.m as i64 + 2)
    }

    pub fn to_json(&self, cfg: &RunConfig) -> serde_json::Value {
        let q = |v: &[Rational]| v.iter().map(rational::format).collect::<Vec<_>>();
        json!({
            "version": crate::VERSION,
            "config": cfg,
            "n": self.n,
            "m": self.m,
            "z": rational::format(&self.z),
            "eps_prime": rational::format(&self.eps_prime),
            "eps_prime_halvings": self.halvings,
            "z_halvings": self.z_halvings,
            "jacobian_condition": self.condition,
            "newton_iterations": self.newton.iterations,
            "newton_residual": self.newton.residual,
            "stretch": q(&self.newton.stretch.s),
            "els_trials": self.trials,
            "graphs": self.graphs.iter().map(|g| g.to_string()).collect::<Vec<_>>(),
            "densities_W": self.densities_w.iter().map(to_f64).collect::<Vec<_>>(),
            "densities_Wprime": self.densities_w_prime.iter().map(to_f64).collect::<Vec<_>>(),
            "max_density_gap": self.max_density_gap,
            "decomposition_gap": self.decomposition_gap,
            "omega_W": self.gap.omega_w,
            "omega_Wprime": self.gap.omega_w_prime,
            "omega_gap": self.gap.gap,
            "gap_lower_bound": to_f64(&self.gap_lower_bound),
            "gap_exceeds_bound": self.gap.gap >= to_f64(&self.gap_lower_bound),
            "degenerate_z": self.degenerate(),
            "verdict": if self.not_weakly_isomorphic() { NOT_WEAKLY_ISOMORPHIC } else { INDISTINGUISHABLE },
            "W": self.w.to_json_value(),
            "Wprime": self.w_prime.to_json_value(),
        })
    }
}

/// The whole experiment. `ε'` starts at `1/(m+4)` and is halved until the
/// Jacobian at the uniform stretch is well conditioned. Without an explicit
/// `z`, the offset `z - 1/(m+2)` starts at `1/1000` and is halved until
/// Newton converges.
pub fn forcing_experiment(n: usize, z: Option<Rational>, cfg: &RunConfig) -> Result<Certificate> {
    check_size(n)?;
    let family = els_family(n, cfg.seed)?;
    let m = family.m();
    let trials = family.trials;
    let explicit = z.is_some();
    let mut z = z.unwrap_or_else(|| default_z(m));
    if !z.is_positive() || z >= rat(1, m as i64 + 1) {
        return Err(Error::Range(format!("z = {} outside (0, 1/(m+1))", rational::format(&z))));
    }
    let mut eps_prime = rat(1, m as i64 + 4);
    let mut halvings = 0;
    let (layout, condition) = loop {
        let layout = Layout::new(family.clone(), eps_prime.clone())?;
        let jac = density_jacobian(&layout, &StretchVector::uniform(m), FD_STEP)?;
        let cond = condition_number(&jac);
        if cond <= MAX_CONDITION {
            break (layout, cond);
        }
        halvings += 1;
        if halvings > 30 {
            return Err(Error::Numeric(format!("Jacobian condition number {cond:e}")));
        }
        eps_prime /= int(2);
    };
    let w = layout.base()?;
    let mut z_halvings = 0;
    let newton = loop {
        match match_densities(&layout, &z) {
            Ok(r) => break r,
            Err(Error::NewtonDivergence(_)) if !explicit && z_halvings < 30 => {
                z_halvings += 1;
                let base = rat(1, m as i64 + 2);
                z = &base + (&z - &base) / int(2);
            }
            Err(e) => return Err(e),
        }
    };
    let w_prime = newton.w_prime.clone();
    let mut graphs = Vec::new();
    for k in 2..=n {
        graphs.extend(enumerate_all(k)?);
    }
    let densities_w = layout.densities(&graphs, &StretchVector::uniform(m));
    let densities_w_prime = layout.densities(&graphs, &newton.stretch);
    let max_density_gap = densities_w
        .iter()
        .zip(&densities_w_prime)
        .map(|(a, b)| to_f64(&(a - b)).abs())
        .fold(0.0, f64::max);
    let connected: Vec<(SmallGraph, f64)> = family
        .graphs
        .iter()
        .cloned()
        .zip(layout.densities(&family.graphs, &StretchVector::uniform(m)).iter().map(to_f64))
        .collect();
    let mut decomposition_gap = 0.0f64;
    for (h, d) in graphs.iter().zip(&densities_w_prime) {
        let poly = densall_decompose(h)?;
        let via = poly.eval_f64(|g| {
            connected.iter().find(|(c, _)| c.is_isomorphic(g)).map_or(1.0, |(_, v)| *v)
        });
        decomposition_gap = decomposition_gap.max((via - to_f64(d)).abs());
    }
    let gap = verify_gap(&w, &w_prime)?;
    Ok(Certificate {
        n,
        m,
        gap_lower_bound: gap_lower_bound(m, &z),
        z,
        eps_prime,
        halvings,
        z_halvings,
        condition,
        w,
        w_prime,
        newton,
        graphs,
        densities_w,
        densities_w_prime,
        max_density_gap,
        decomposition_gap,
        gap,
        trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::hom_rational;

    fn family3() -> ElsFamily {
        els_family(3, 1).unwrap()
    }

    #[test]
    fn family_has_full_rank_and_no_cliques() {
        let f = family3();
        assert_eq!(f.m(), 3);
        assert_eq!(rank(&f.matrix), 3);
        for w in &f.members {
            assert!(omega(w).unwrap().is_zero());
        }
        assert_eq!(rank(&[vec![int(1), int(2)], vec![int(2), int(4)]]), 1);
    }

    #[test]
    fn edge_indicator_density() {
        let k2 = SmallGraph::complete(2);
        let w = indicator_graphon(&k2, &[rat(1, 3), rat(1, 3)]).unwrap();
        assert_eq!(induced_rational(&k2, &w), rat(2, 9));
    }

    #[test]
    fn assembled_block_layout() {
        let f = family3();
        let m = f.m();
        let wf = assemble_wf(&f).unwrap();
        let w = int(1) / int(m as i64 + 2);
        assert_eq!(omega(&wf).unwrap(), w.clone());
        let k3 = SmallGraph::complete(3);
        let mut expect: Rational = f.members.iter().map(|x| induced_rational(&k3, x)).sum();
        expect += Rational::one();
        assert_eq!(induced_rational(&k3, &wf), expect * &w * &w * &w);
        assert_eq!(hom_rational(&SmallGraph::empty(1), &wf), Rational::one());
    }

    #[test]
    fn stretching() {
        let f = family3();
        let m = f.m();
        let layout = Layout::new(f, rat(1, 7)).unwrap();
        let base = layout.base().unwrap();
        let uniform = StretchVector::uniform(m);
        assert_eq!(stretch(&layout, &base, &uniform).unwrap(), base);
        let mut sv = uniform.clone();
        sv.s[m] = rat(1, 20);
        let narrow = layout.stretch(&sv).unwrap();
        sv.s[m] = rat(1, 10);
        let wide = layout.stretch(&sv).unwrap();
        assert_eq!(layout.read(&wide).unwrap(), sv);
        assert_eq!(omega(&wide).unwrap(), omega(&narrow).unwrap() * int(2));
        assert_eq!(omega(&wide).unwrap(), &sv.s[m] * rat(6, 7));
        let body: Rational = wide.measures()[..wide.parts() - 1].iter().sum();
        assert_eq!(body, rat(6, 7));
        let other = StepGraphon::constant(rat(1, 2)).unwrap();
        assert!(matches!(stretch(&layout, &other, &uniform), Err(Error::Layout(_))));
    }

    #[test]
    fn union_densities_match_block_sums() {
        let f = family3();
        let m = f.m();
        let layout = Layout::new(f, rat(1, 9)).unwrap();
        let mut sv = StretchVector::uniform(m);
        sv.s[0] = rat(3, 17);
        sv.s[m] = rat(2, 9);
        let w = layout.stretch(&sv).unwrap();
        let mut graphs = Vec::new();
        for k in 1..=4 {
            graphs.extend(enumerate_all(k).unwrap());
        }
        let direct: Vec<Rational> = graphs.iter().map(|h| induced_rational(h, &w)).collect();
        assert_eq!(layout.densities(&graphs, &sv), direct);
        let approx = layout.densities_f64(&graphs, &sv);
        for (a, b) in approx.iter().zip(&direct) {
            assert!((a - to_f64(b)).abs() < 1e-14);
        }
    }

    #[test]
    fn jacobian_matches_derivative() {
        let f = family3();
        let m = f.m();
        let layout = Layout::new(f.clone(), Rational::zero()).unwrap();
        let u = StretchVector::uniform(m);
        let fd = density_jacobian(&layout, &u, FD_STEP).unwrap();
        let an = analytic_jacobian(&layout, &u);
        assert!((&fd - &an).abs().max() < 1e-6);
        assert!(condition_number(&fd).is_finite());
        // Moving ε' by δ moves each entry by at most (m+3)^k k δ.
        let delta = 1e-3;
        let moved = density_jacobian(&Layout::new(f.clone(), from_f64(delta).unwrap()).unwrap(), &u, FD_STEP).unwrap();
        for i in 0..m {
            let k = f.graphs[i].n() as i32;
            let bound = ((m + 3) as f64).powi(k) * k as f64 * delta + 1e-6;
            for j in 0..m {
                assert!((moved[(i, j)] - fd[(i, j)]).abs() <= bound);
            }
        }
        // Second order: each halving of the step quarters the error.
        let e = |h: f64| (density_jacobian(&layout, &u, h).unwrap() - &an).abs().max();
        let (e1, e2, e3) = (e(8e-3), e(4e-3), e(2e-3));
        assert!(e1 > 1e-9, "{e1}");
        let (r1, r2) = (e1 / e2, e2 / e3);
        assert!((r1 - 4.0).abs() < 0.5 && (r2 - 4.0).abs() < 0.5, "{r1} {r2}");
    }

    #[test]
    fn fixed_point_at_uniform_z() {
        let f = family3();
        let m = f.m();
        let layout = Layout::new(f, rat(1, 7)).unwrap();
        let r = match_densities(&layout, &rat(1, m as i64 + 2)).unwrap();
        assert_eq!(r.iterations, 0);
        assert_eq!(r.w_prime, layout.base().unwrap());
        let g = verify_gap(&r.w_prime, &layout.base().unwrap()).unwrap();
        assert_eq!(g.verdict, INDISTINGUISHABLE);
    }

    #[test]
    fn three_vertex_pair() {
        let cfg = RunConfig::default();
        let c = forcing_experiment(3, None, &cfg).unwrap();
        assert!(c.max_density_gap < 1e-9, "{}", c.max_density_gap);
        assert!(c.decomposition_gap < 1e-9);
        assert!(c.gap.gap > 0.0);
        assert!(c.gap.gap >= to_f64(&c.gap_lower_bound));
        assert!(c.newton.residual < 1e-9);
        assert!(c.not_weakly_isomorphic());
        assert_eq!(c.graphs.len(), 6);
        let j = c.to_json(&cfg);
        assert_eq!(j["verdict"], NOT_WEAKLY_ISOMORPHIC);
        assert_eq!(StepGraphon::from_json_value(&j["Wprime"]).unwrap(), c.w_prime);
    }

    #[test]
    fn size_is_checked() {
        assert!(matches!(els_family(7, 1), Err(Error::Range(_))));
    }
}
