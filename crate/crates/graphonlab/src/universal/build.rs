//! Assembling `W_0` from its tiles.

use std::sync::Arc;

use serde_json::json;

use super::input::{monotone_reorder, normalize_input, Params, ReorderedInput};
use super::table::{build_part_table, Blocks};
use super::tiles::{check_balance, mock_ckm, BalanceColumn, MockCkm, PartColumn, RefKind, RefTile};
use crate::config::RunConfig;
use crate::constraint::{PartTable, PartitionedGraphon, SuiteParams};
use crate::error::{Error, Result};
use crate::graphon::{
    CheckerGraphon, ConstantKernel, GammaMap, GraphonKernel, HalfGraphon, Kernel, StepGraphon, TileSpec,
    TiledGraphon,
};
use crate::rational::{self, from_f64, Rational};

/// Replacements of single tiles, used to confirm that the suites notice.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mutation {
    /// `E_*×E_*` becomes the constant 1/2.
    ETileHalf,
    /// The `G_2` column becomes 0.
    G2Zero,
}

impl Mutation {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "e-tile-half" => Ok(Mutation::ETileHalf),
            "g2-zero" => Ok(Mutation::G2Zero),
            _ => Err(Error::parse(0, format!("unknown mutation {s:?}"))),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Mutation::ETileHalf => "e-tile-half",
            Mutation::G2Zero => "g2-zero",
        }
    }
}

#[derive(Clone, Debug)]
pub struct W0 {
    pub params: Params,
    pub blocks: Blocks,
    pub depth: u32,
    /// `W_F` sorted by degree, as placed on `A_*`.
    pub wf: StepGraphon,
    pub rho: f64,
    /// The dyadic value `ρε/2 + Σ_X ∫_X f` is pinned to.
    pub rho_target: Rational,
    /// `(1/|X|)∫_X f²` per live part outside `G`.
    pub cross: Vec<(String, f64)>,
    pub ckm_degrees: Vec<(String, f64)>,
    pub mutation: Option<Mutation>,
    tiled: TiledGraphon,
    graphon: PartitionedGraphon,
    balance: Arc<BalanceColumn>,
}

const RHO_BITS: i32 = 32;

fn live(table: &PartTable, range: std::ops::Range<usize>) -> impl Iterator<Item = usize> + '_ {
    range.filter(|&i| !table.parts()[i].interval.is_empty())
}

pub fn build_w0(
    params: &Params,
    reordered: &ReorderedInput,
    table: PartTable,
    ckm: &MockCkm,
    depth: u32,
) -> Result<W0> {
    let bl = Blocks::new(params);
    if table.len() != bl.len() {
        return Err(Error::Size(format!("{} parts for r = {}", table.len(), params.r)));
    }
    let eps = params.epsilon_f();
    let wc = |r| -> Arc<dyn Kernel> { Arc::new(CheckerGraphon::new(r, depth)) };
    let half: Arc<dyn Kernel> = Arc::new(HalfGraphon);
    let mut tiles = vec![
        TileSpec::new(bl.a.clone(), bl.a.clone(), Arc::new(reordered.graphon.clone())),
        TileSpec::new(bl.b(), bl.b(), ckm.kernel.clone()),
    ];
    for rows in [bl.a.clone(), bl.b_g.clone(), bl.c.clone(), bl.d.clone(), bl.e.clone(), bl.f.clone()] {
        tiles.push(TileSpec::new(rows, bl.f.clone(), half.clone()));
    }
    for i in live(&table, bl.a.clone()).chain(live(&table, bl.b_g.clone())) {
        tiles.push(TileSpec::new(bl.e.clone(), i..i + 1, wc(1)));
        tiles.push(TileSpec::new(i..i + 1, bl.c.clone(), Arc::new(RefTile::new(RefKind::C, depth))));
        tiles.push(TileSpec::new(i..i + 1, bl.d.clone(), Arc::new(RefTile::new(RefKind::D, depth))));
    }
    for cols in [bl.c.clone(), bl.d.clone(), bl.e.clone()] {
        tiles.push(TileSpec::new(bl.e.clone(), cols, wc(1)));
    }
    tiles.push(TileSpec::new(bl.c.clone(), bl.c.clone(), wc(2)));
    tiles.push(TileSpec::new(bl.c.clone(), bl.d.clone(), wc(2)));
    tiles.push(TileSpec::new(bl.d.clone(), bl.d.clone(), wc(3)));
    let core = Arc::new(TiledGraphon::new(table.named_parts(), tiles.clone())?);

    let u: Vec<usize> = live(&table, 0..bl.g1).collect();
    let u_parts = u
        .iter()
        .map(|&i| {
            let p = &table.parts()[i];
            let pdeg = p.pre_degree.as_ref().ok_or_else(|| Error::Construction(format!("{} lacks a pre-degree", p.name)))?;
            Ok((p.interval.lo_f(), p.interval.hi_f(), rational::to_f64(pdeg)))
        })
        .collect::<Result<Vec<_>>>()?;
    let balance = Arc::new(BalanceColumn::new(core, &u_parts, eps));
    let names: Vec<String> = u.iter().map(|&i| table.parts()[i].name.clone()).collect();
    check_balance(&balance, &names)?;

    let s: f64 = balance.stats().iter().map(|st| st.integral).sum();
    let scale = f64::from(RHO_BITS).exp2();
    let target = ((eps / 4.0 + s) * scale).round() / scale;
    let rho = (target - s) * 2.0 / eps;
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::BalanceRange {
            part: "G1".into(),
            value: rho,
        });
    }
    let cross = u
        .iter()
        .zip(balance.stats())
        .map(|(&i, st)| {
            let p = &table.parts()[i];
            (p.name.clone(), st.square_integral / p.interval.len_f())
        })
        .collect();

    let mut g1 = TileSpec::new(0..bl.g1, bl.g1..bl.g1 + 1, balance.clone());
    g1.row_map = Some(GammaMap::identity());
    tiles.push(g1);
    tiles.push(TileSpec::new(bl.g1..bl.g1 + 1, bl.g1..bl.g1 + 1, Arc::new(ConstantKernel::new(rho)?)));
    let g2_values: Vec<(f64, f64, f64)> = live(&table, 0..bl.len())
        .map(|i| {
            let p = &table.parts()[i];
            (p.interval.lo_f(), p.interval.hi_f(), 4.0 * p.delta.unwrap_or(0.0) / eps)
        })
        .collect();
    let mut g2 = TileSpec::new(0..bl.len(), bl.g2..bl.g2 + 1, Arc::new(PartColumn::new(&g2_values)));
    g2.row_map = Some(GammaMap::identity());
    tiles.push(g2);
    let tiled = TiledGraphon::new(table.named_parts(), tiles)?;
    let graphon = PartitionedGraphon::new(Arc::new(tiled.clone()), table);
    Ok(W0 {
        params: params.clone(),
        blocks: bl,
        depth,
        wf: reordered.graphon.clone(),
        rho,
        rho_target: from_f64(target)?,
        cross,
        ckm_degrees: ckm.degrees.clone(),
        mutation: None,
        tiled,
        graphon,
        balance,
    })
}

/// Builds `W_0` for an already normalized `W_F` and a given `r`.
pub fn build_from_normalized(params: &Params, wf: &StepGraphon, depth: u32) -> Result<W0> {
    let reordered = monotone_reorder(wf, params.big_m)?;
    let table = build_part_table(params.r, &reordered.q_measures())?;
    let ckm = mock_ckm(&reordered.graphon)?;
    build_w0(params, &reordered, table, &ckm, depth)
}

/// The whole pipeline: `ε` choice, reordering, table, stand-in CKM, tiles.
pub fn universal(wf: &StepGraphon, eps_request: &Rational, depth: u32) -> Result<W0> {
    let n = normalize_input(wf, eps_request)?;
    build_from_normalized(&n.params, &n.wf, depth)
}

impl W0 {
    pub fn graphon(&self) -> &PartitionedGraphon {
        &self.graphon
    }

    pub fn tiled(&self) -> &TiledGraphon {
        &self.tiled
    }

    pub fn table(&self) -> &PartTable {
        self.graphon.table()
    }

    pub fn kernel(&self) -> &Arc<dyn GraphonKernel> {
        self.graphon.kernel()
    }

    pub fn balance(&self) -> &BalanceColumn {
        &self.balance
    }

    pub fn suite_params(&self) -> SuiteParams {
        SuiteParams {
            table: self.table().clone(),
            epsilon: self.params.epsilon.clone(),
            rho: self.rho,
            cross: self.cross.clone(),
            ckm_degrees: self.ckm_degrees.clone(),
        }
    }

    /// A copy with one tile replaced.
    pub fn mutated(&self, m: Mutation) -> Result<W0> {
        let bl = &self.blocks;
        let mut tiled = self.tiled.clone();
        match m {
            Mutation::ETileHalf => tiled.replace_tile(bl.e.start, bl.e.start, Arc::new(ConstantKernel(0.5)))?,
            Mutation::G2Zero => tiled.replace_tile(0, bl.g2, Arc::new(ConstantKernel(0.0)))?,
        }
        let graphon = self.graphon.with_kernel(Arc::new(tiled.clone()));
        Ok(W0 {
            tiled,
            graphon,
            mutation: Some(m),
            ..self.clone()
        })
    }

    /// The build manifest; keys are sorted, so equal builds serialize to
    /// equal bytes.
    pub fn manifest(&self, cfg: &RunConfig) -> serde_json::Value {
        let p = &self.params;
        json!({
            "version": crate::VERSION,
            "config": cfg,
            "r": p.r,
            "epsilon": rational::format(&p.epsilon),
            "M": p.big_m,
            "m": p.small_m,
            "depth": self.depth,
            "part_count": self.table().len(),
            "parts": self.table().to_json_value(),
            "rho": self.rho,
            "rho_target": rational::format(&self.rho_target),
            "ckm": "mock",
            "wf": self.wf.to_json_value(),
            "mutation": self.mutation.map(|m| m.as_str()),
        })
    }

    /// Rebuilds from a manifest written by [`W0::manifest`].
    pub fn from_manifest(v: &serde_json::Value) -> Result<W0> {
        let field = |k: &str| v.get(k).ok_or_else(|| Error::parse(0, format!("manifest lacks {k:?}")));
        let r = field("r")?.as_u64().ok_or_else(|| Error::parse(0, "r is not an integer"))?;
        let depth = field("depth")?.as_u64().ok_or_else(|| Error::parse(0, "depth is not an integer"))?;
        let params = Params::new(r as u32)?;
        let wf = StepGraphon::from_json_value(field("wf")?)?;
        let w0 = build_from_normalized(&params, &wf, depth as u32)?;
        match v.get("mutation").and_then(|m| m.as_str()) {
            Some(m) => w0.mutated(Mutation::parse(m)?),
            None => Ok(w0),
        }
    }

    /// Exact `∫ W_0(x, z) dz` over `[0, G_2.lo)`.
    pub fn pre_degree_integral(&self, x: f64) -> f64 {
        let g2 = &self.table().parts()[self.blocks.g2].interval;
        self.tiled.row_mass(x, 0.0, g2.lo_f())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    pub(crate) fn sample_wf() -> StepGraphon {
        let q = |a, b| rat(a, b);
        StepGraphon::new(
            vec![q(1, 4); 4],
            vec![
                vec![q(1, 1), q(1, 2), q(1, 4), q(0, 1)],
                vec![q(1, 2), q(0, 1), q(3, 4), q(1, 3)],
                vec![q(1, 4), q(3, 4), q(1, 2), q(1, 5)],
                vec![q(0, 1), q(1, 3), q(1, 5), q(1, 10)],
            ],
        )
        .unwrap()
    }

    #[test]
    fn values_at_named_points() {
        let w = universal(&sample_wf(), &rat(1, 5), 40).unwrap();
        let t = w.table();
        assert_eq!(t.len(), 73);
        let iv = |n: &str| t.get(n).unwrap().interval.clone();
        let at = |n: &str, u: f64| {
            let i = iv(n);
            i.lo_f() + u * i.len_f()
        };
        // E coordinates both in I_2.
        let e = &w.blocks.e;
        let e_lo = t.parts()[e.start].interval.lo_f();
        let e_len = t.parts()[e.end - 1].interval.hi_f() - e_lo;
        assert_eq!(w.kernel().value(e_lo + 0.55 * e_len, e_lo + 0.7 * e_len), 1.0);
        assert_eq!(w.kernel().value(e_lo + 0.55 * e_len, e_lo + 0.8 * e_len), 0.0);
        assert_eq!(w.kernel().value(at("B_A", 0.5), at("F3", 0.9)), 0.0);
        for p in t.parts().iter().filter(|p| !p.interval.is_empty()) {
            let v = 4.0 * p.delta.unwrap() / w.params.epsilon_f();
            for u in [0.1, 0.6] {
                assert_eq!(w.kernel().value(p.interval.lo_f() + u * p.interval.len_f(), at("G2", 0.3)), v);
            }
        }
        assert_eq!(w.kernel().value(at("G1", 0.2), at("G1", 0.7)), w.rho);
        assert!((0.0..=1.0).contains(&w.rho));
    }

    #[test]
    fn symmetric_and_bounded() {
        let w = universal(&sample_wf(), &rat(1, 5), 40).unwrap();
        let k = w.kernel();
        for i in 0..200 {
            let x = (i as f64 * 0.618_033_988_7).fract();
            let y = (i as f64 * 0.414_213_562_3 + 0.1).fract();
            let v = k.value(x, y);
            assert!((0.0..=1.0).contains(&v));
            assert_eq!(v, k.value(y, x), "({x},{y})");
        }
    }

    #[test]
    fn degrees_follow_the_table() {
        let w = universal(&sample_wf(), &rat(1, 5), 40).unwrap();
        for (i, p) in w.table().parts().iter().enumerate() {
            if p.interval.is_empty() || i >= w.blocks.g1 {
                continue;
            }
            let pdeg = rational::to_f64(p.pre_degree.as_ref().unwrap());
            for u in [0.13, 0.5, 0.91] {
                let x = p.interval.lo_f() + u * p.interval.len_f();
                assert!((w.pre_degree_integral(x) - pdeg).abs() < 1e-9, "{} at {u}", p.name);
                assert!((w.kernel().degree(x) - pdeg - p.delta.unwrap()).abs() < 1e-9);
            }
            let f = w.balance().raw(p.interval.lo_f() + 0.5 * p.interval.len_f());
            assert!((0.0..=1.0).contains(&f), "{} balance {f}", p.name);
        }
        assert!(w.graphon().degrees_distinct(1e-12));
    }

    #[test]
    fn manifest_round_trip_and_mutations() {
        let cfg = RunConfig::default();
        let w = universal(&sample_wf(), &rat(3, 10), 40).unwrap();
        let m = w.manifest(&cfg);
        assert_eq!(m["part_count"], 73);
        let back = W0::from_manifest(&m).unwrap();
        assert_eq!(serde_json::to_string(&back.manifest(&cfg)).unwrap(), serde_json::to_string(&m).unwrap());
        let e = w.mutated(Mutation::ETileHalf).unwrap();
        let lo = w.table().parts()[w.blocks.e.start].interval.lo_f();
        assert_eq!(e.kernel().value(lo + 1e-6, lo + 2e-6), 0.5);
        let g = w.mutated(Mutation::G2Zero).unwrap();
        let g2 = w.table().parts()[w.blocks.g2].interval.lo_f();
        assert_eq!(g.kernel().value(0.3, g2 + 1e-4), 0.0);
        assert_eq!(Mutation::parse("g2-zero").unwrap(), Mutation::G2Zero);
    }
}
