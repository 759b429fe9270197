//! The constraint families satisfied by the universal graphon, instantiated
//! over its part table.
//!
//! Part names: `A1..AM`, `B_A..B_F`, `B_G1..B_GM`, `B_P`, `B_Q`, `B_R`,
//! `C1..Cm`, `C_inf`, `D1..Dm`, `D_inf`, `E1..E(m-1)`, `E_inf`, `F1..FM`,
//! `G1`, `G2`; groups are the leading letters.

use num_traits::{One, Zero};
use serde::Serialize;

use super::eval::{check_labelled, ConstraintReport};
use super::expr::{Constraint, DecoratedGraph, DensityExpression, PartName};
use super::partitioned::{PartTable, PartitionedGraphon};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::graph::SmallGraph;
use crate::rational::{self, int, Rational};

pub const SUITES: [&str; 8] = [
    "ckm_align",
    "coordinate",
    "checker",
    "exp_checker",
    "dyadic_ref",
    "density_transfer",
    "balancing",
    "distinguishing",
];

/// Values the suites need beyond the table itself.
#[derive(Clone, Debug)]
pub struct SuiteParams {
    pub table: PartTable,
    pub epsilon: Rational,
    pub rho: f64,
    /// `(1/|X|)∫_X f²` for the balancing column `f`, per part outside G.
    pub cross: Vec<(String, f64)>,
    /// Average degree of each aligned CKM part: `A..F`, `G`, `P`, `Q`, `R`.
    pub ckm_degrees: Vec<(String, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteConstraint {
    pub label: String,
    #[serde(serialize_with = "as_text")]
    pub constraint: Constraint,
}

fn as_text<S: serde::Serializer>(c: &Constraint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&c.to_string())
}

type Dec = Vec<String>;

fn one(name: &str) -> Dec {
    vec![name.to_string()]
}

/// A term family: the listed edges are present, `absent` pairs are summed
/// over both states, every other pair with a non-root end is a non-edge.
struct Shape<'a> {
    roots: usize,
    edges: &'a [(usize, usize)],
    absent: &'a [(usize, usize)],
}

fn terms(shape: &Shape, dec: &[Dec]) -> Result<Vec<DecoratedGraph>> {
    let n = dec.len();
    let decs: Vec<Vec<PartName>> = dec
        .iter()
        .map(|d| d.iter().map(|s| PartName::new(s.clone())).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let decs = std::sync::Arc::new(decs);
    let k = shape.absent.len();
    let mut out = Vec::with_capacity(1 << k);
    for mask in 0..1usize << k {
        let mut edges = shape.edges.to_vec();
        edges.extend((0..k).filter(|b| mask >> b & 1 == 1).map(|b| shape.absent[b]));
        out.push(DecoratedGraph::shared(SmallGraph::new(n, &edges)?, shape.roots, decs.clone())?);
    }
    Ok(out)
}

fn density(shape: &Shape, dec: &[Dec]) -> Result<DensityExpression> {
    Ok(DensityExpression::sum(Rational::one(), terms(shape, dec)?))
}

fn constant(x: f64) -> Result<DensityExpression> {
    Ok(DensityExpression::constant(rational::from_f64(x)?))
}

fn zero() -> DensityExpression {
    DensityExpression::constant(Rational::zero())
}

struct Builder<'a> {
    p: &'a SuiteParams,
    out: Vec<SuiteConstraint>,
}

impl Builder<'_> {
    fn push(&mut self, label: String, left: DensityExpression, right: DensityExpression) -> Result<()> {
        self.out.push(SuiteConstraint {
            label,
            constraint: Constraint::new(left, right)?,
        });
        Ok(())
    }

    /// Both states of the root pair `pair`, as separate constraints.
    fn root_cases(
        &mut self,
        label: String,
        base: &[(usize, usize)],
        pair: (usize, usize),
        f: impl Fn(&[(usize, usize)]) -> Result<(DensityExpression, DensityExpression)>,
    ) -> Result<()> {
        for adj in [true, false] {
            let mut edges = base.to_vec();
            if adj {
                edges.push(pair);
            }
            let (l, r) = f(&edges)?;
            self.push(format!("{label}.{}", if adj { "adj" } else { "nonadj" }), l, r)?;
        }
        Ok(())
    }

    fn group(&self, g: char) -> Dec {
        self.p.table.group(g)
    }

    fn b_core(&self) -> Dec {
        self.group('B').into_iter().filter(|n| !n.starts_with("B_G")).collect()
    }

    fn b_g(&self) -> Dec {
        self.group('B').into_iter().filter(|n| n.starts_with("B_G")).collect()
    }

    /// Individual parts of A and B_G, then the C, D and E groups as sets.
    fn x_family(&self) -> Vec<(String, Dec)> {
        let mut xs: Vec<(String, Dec)> = self.group('A').iter().map(|n| (n.clone(), one(n))).collect();
        xs.extend(self.b_g().iter().map(|n| (n.clone(), one(n))));
        for g in ['C', 'D', 'E'] {
            xs.push((format!("{g}*"), self.group(g)));
        }
        xs
    }

    fn part(&self, name: &str) -> Result<&super::partitioned::Part> {
        self.p.table.get(name)
    }

    // F-coordinate structure, and the tiles between F and the other groups.
    fn coordinate(&mut self) -> Result<()> {
        let f = self.group('F');
        let mm = f.len();
        for i in 1..=mm {
            for j in 1..=mm {
                if i + j <= mm {
                    let (fi, fj) = (one(&f[i - 1]), one(&f[j - 1]));
                    self.root_cases(format!("coordinate.f_zero[{i},{j}]"), &[(0, 2)], (0, 1), |e| {
                        let s = Shape {
                            roots: 2,
                            edges: e,
                            absent: &[(1, 2)],
                        };
                        Ok((density(&s, &[fi.clone(), fj.clone(), fj.clone()])?, zero()))
                    })?;
                }
            }
        }
        for i in 1..=mm {
            for j in 1..=mm {
                if i + j >= mm + 2 {
                    let s = Shape {
                        roots: 1,
                        edges: &[],
                        absent: &[],
                    };
                    let l = density(&s, &[one(&f[i - 1]), one(&f[j - 1])])?;
                    self.push(format!("coordinate.f_one[{i},{j}]"), l, zero())?;
                }
            }
        }
        for x in self.b_core() {
            let s = Shape {
                roots: 1,
                edges: &[(0, 1)],
                absent: &[],
            };
            let l = density(&s, &[one(&x), f.clone()])?;
            self.push(format!("coordinate.b_zero[{x}]"), l, zero())?;
        }
        let ys: Vec<(char, Dec)> = vec![
            ('A', self.group('A')),
            ('G', self.b_g()),
            ('C', self.group('C')),
            ('D', self.group('D')),
            ('E', self.group('E')),
        ];
        for (g, y) in &ys {
            let name = if *g == 'G' { "B_G".to_string() } else { g.to_string() };
            // Neighbourhoods in Y of F vertices are nested.
            self.root_cases(format!("coordinate.nested[{name}]"), &[(0, 2), (1, 3)], (0, 1), |e| {
                let s = Shape {
                    roots: 2,
                    edges: e,
                    absent: &[(2, 3)],
                };
                Ok((density(&s, &[f.clone(), f.clone(), y.clone(), y.clone()])?, zero()))
            })?;
            // Degrees into F and into Y agree.
            let s = Shape {
                roots: 1,
                edges: &[(0, 1)],
                absent: &[],
            };
            let l = density(&s, &[f.clone(), f.clone()])?;
            let r = density(&s, &[f.clone(), y.clone()])?;
            self.push(format!("coordinate.degree[{name}]"), l, r)?;
            // Parts of Y are ordered by F-neighbourhood.
            for i in 0..y.len() {
                for j in i + 1..y.len() {
                    let (yi, yj) = (one(&y[i]), one(&y[j]));
                    self.root_cases(format!("coordinate.order[{},{}]", y[i], y[j]), &[(0, 2)], (0, 1), |e| {
                        let s = Shape {
                            roots: 2,
                            edges: e,
                            absent: &[],
                        };
                        Ok((density(&s, &[yi.clone(), yj.clone(), f.clone()])?, zero()))
                    })?;
                }
            }
        }
        Ok(())
    }

    /// Block structure of a checker-type tile `Y×Y`: adjacency is transitive
    /// and blocks are intervals in the F order.
    fn block_tile(&mut self, label: &str, y: &Dec) -> Result<()> {
        let f = self.group('F');
        let s = Shape {
            roots: 2,
            edges: &[(0, 1), (0, 2)],
            absent: &[],
        };
        let l = density(&s, &[y.clone(), y.clone(), y.clone()])?;
        self.push(format!("{label}.trans"), l, zero())?;
        let s = Shape {
            roots: 2,
            edges: &[(0, 1), (2, 3), (1, 4)],
            absent: &[(1, 2), (1, 3), (0, 4), (3, 4)],
        };
        let l = density(&s, &[y.clone(), y.clone(), y.clone(), f.clone(), f.clone()])?;
        self.push(format!("{label}.interval"), l, zero())
    }

    /// Tile `Y×X` refining or matching the blocks of `Y×Y`: `(a)` adjacent
    /// roots share X-neighbours, `(b)` non-adjacent roots share none, `(c)`
    /// neighbourhoods are F-intervals, `(e)` they are ordered like the blocks.
    fn aligned_tile(&mut self, label: &str, y: &Dec, x: &Dec) -> Result<()> {
        let f = self.group('F');
        let s = Shape {
            roots: 2,
            edges: &[(0, 1), (0, 2)],
            absent: &[],
        };
        self.push(format!("{label}.same"), density(&s, &[y.clone(), y.clone(), x.clone()])?, zero())?;
        let s = Shape {
            roots: 2,
            edges: &[(0, 2), (1, 2)],
            absent: &[],
        };
        self.push(format!("{label}.disjoint"), density(&s, &[y.clone(), y.clone(), x.clone()])?, zero())?;
        let dec = [y.clone(), x.clone(), x.clone(), x.clone(), f.clone(), f.clone()];
        self.root_cases(format!("{label}.interval"), &[(0, 1), (0, 2), (3, 4), (2, 5)], (1, 2), |e| {
            let s = Shape {
                roots: 3,
                edges: e,
                absent: &[(1, 3), (2, 3), (0, 4), (2, 4), (0, 5), (1, 5), (4, 5)],
            };
            Ok((density(&s, &dec)?, zero()))
        })?;
        let s = Shape {
            roots: 2,
            edges: &[(1, 2), (0, 3), (1, 4), (3, 5)],
            absent: &[(0, 4), (1, 3), (2, 3), (2, 4), (2, 5), (3, 4), (0, 5), (1, 5)],
        };
        let dec = [y.clone(), y.clone(), f.clone(), x.clone(), x.clone(), f.clone()];
        self.push(format!("{label}.order"), density(&s, &dec)?, zero())
    }

    fn adjacent(&self, root: &Dec, other: &Dec) -> Result<DensityExpression> {
        let s = Shape {
            roots: 1,
            edges: &[(0, 1)],
            absent: &[],
        };
        density(&s, &[root.clone(), other.clone()])
    }

    fn checker(&mut self) -> Result<()> {
        let e = self.group('E');
        let f = self.group('F');
        self.block_tile("checker.e", &e)?;
        // (|F non-nbrs| - |block|)^2 = 2 |{(z, f): z in block above the root}|.
        let a = self.adjacent(&e, &e)?;
        let s = Shape {
            roots: 1,
            edges: &[],
            absent: &[],
        };
        let b = density(&s, &[e.clone(), f.clone()])?;
        let s = Shape {
            roots: 1,
            edges: &[(0, 1), (1, 2)],
            absent: &[],
        };
        let c = density(&s, &[e.clone(), e.clone(), f.clone()])?;
        let diff = b.plus(a.scaled(&-Rational::one()));
        self.push("checker.e.length".into(), diff.times(&diff), c.scaled(&int(2)))?;
        let s = Shape {
            roots: 0,
            edges: &[(0, 1)],
            absent: &[],
        };
        self.push(
            "checker.e.squares".into(),
            density(&s, &[e.clone(), e.clone()])?,
            DensityExpression::constant(Rational::new(1.into(), 3.into())),
        )?;
        for (name, x) in self.x_family() {
            let label = format!("checker.x[{name}]");
            self.aligned_tile(&label, &e, &x)?;
            let l = self.adjacent(&e, &e)?;
            let r = self.adjacent(&e, &x)?;
            self.push(format!("{label}.length"), l, r)?;
        }
        let l = self.adjacent(&self.b_core(), &e)?;
        self.push("checker.b_zero".into(), l, zero())
    }

    fn exp_checker(&mut self) -> Result<()> {
        let (c, d, e) = (self.group('C'), self.group('D'), self.group('E'));
        self.block_tile("exp_checker.c", &c)?;
        self.block_tile("exp_checker.d", &d)?;
        let ec = self.adjacent(&c, &e)?;
        self.push(
            "exp_checker.c.length".into(),
            self.adjacent(&c, &c)?,
            ec.times(&ec).scaled(&int(2)),
        )?;
        let ed = self.adjacent(&d, &e)?;
        self.push(
            "exp_checker.d.length".into(),
            self.adjacent(&d, &d)?,
            ed.times(&ed).times(&ed).scaled(&int(4)),
        )?;
        self.aligned_tile("exp_checker.cd", &c, &d)?;
        self.push(
            "exp_checker.cd.length".into(),
            self.adjacent(&c, &c)?,
            self.adjacent(&c, &d)?,
        )
    }

    fn dyadic_ref(&mut self) -> Result<()> {
        let (c, d, e, f) = (self.group('C'), self.group('D'), self.group('E'), self.group('F'));
        let mut xs: Vec<String> = self.group('A');
        xs.extend(self.b_g());
        for xn in &xs {
            let x = one(xn);
            for (yn, y, z) in [("C", &c, &e), ("D", &d, &c)] {
                let label = format!("dyadic_ref[{xn},{yn}]");
                let s = Shape {
                    roots: 2,
                    edges: &[(0, 1), (0, 2)],
                    absent: &[],
                };
                self.push(format!("{label}.same"), density(&s, &[y.clone(), y.clone(), x.clone()])?, zero())?;
                let dec = [y.clone(), x.clone(), x.clone(), x.clone(), f.clone(), f.clone()];
                self.root_cases(format!("{label}.interval"), &[(0, 1), (0, 2), (3, 4), (2, 5)], (1, 2), |ed| {
                    let s = Shape {
                        roots: 3,
                        edges: ed,
                        absent: &[(1, 3), (2, 3), (0, 4), (2, 4), (0, 5), (1, 5), (4, 5)],
                    };
                    Ok((density(&s, &dec)?, zero()))
                })?;
                let s = Shape {
                    roots: 3,
                    edges: &[(0, 2), (1, 2), (0, 3), (1, 3)],
                    absent: &[(2, 3)],
                };
                let l = density(&s, &[y.clone(), y.clone(), z.clone(), x.clone()])?;
                self.push(format!("{label}.disjoint"), l, zero())?;
                let s = Shape {
                    roots: 3,
                    edges: &[(0, 2), (1, 2), (1, 3), (0, 4), (1, 5), (4, 6)],
                    absent: &[
                        (2, 3),
                        (2, 4),
                        (2, 5),
                        (2, 6),
                        (1, 4),
                        (0, 5),
                        (3, 4),
                        (3, 5),
                        (0, 6),
                        (1, 6),
                        (3, 6),
                        (4, 5),
                    ],
                };
                let dec = [y.clone(), y.clone(), z.clone(), f.clone(), x.clone(), x.clone(), f.clone()];
                self.push(format!("{label}.order"), density(&s, &dec)?, zero())?;
                let ex = self.adjacent(y, &e)?;
                self.push(format!("{label}.size"), self.adjacent(y, &x)?, ex.scaled(&int(2)))?;
            }
        }
        for (yn, y) in [("C", &c), ("D", &d)] {
            let l = self.adjacent(&self.b_core(), y)?;
            self.push(format!("dyadic_ref.b_zero[{yn}]"), l, zero())?;
        }
        Ok(())
    }

    fn density_transfer(&mut self) -> Result<()> {
        let (c, d) = (self.group('C'), self.group('D'));
        let (a, bg) = (self.group('A'), self.b_g());
        let s = Shape {
            roots: 2,
            edges: &[(0, 1), (0, 2), (1, 3), (2, 3)],
            absent: &[(0, 3), (1, 2)],
        };
        for i in 0..a.len() {
            for j in 0..a.len() {
                let l = density(&s, &[c.clone(), d.clone(), one(&a[i]), one(&a[j])])?;
                let r = density(&s, &[c.clone(), d.clone(), one(&bg[i]), one(&bg[j])])?;
                self.push(format!("density_transfer.square[{},{}]", i + 1, j + 1), l, r)?;
            }
        }
        let s = Shape {
            roots: 0,
            edges: &[(0, 1), (1, 2), (2, 3), (0, 3)],
            absent: &[(0, 2), (1, 3)],
        };
        let l = density(&s, &[a.clone(), a.clone(), a.clone(), a.clone()])?;
        let r = density(&s, &[bg.clone(), bg.clone(), bg.clone(), bg.clone()])?;
        self.push("density_transfer.c4".into(), l, r)
    }

    fn balancing(&mut self) -> Result<()> {
        let eps = self.p.epsilon.clone();
        let (a, b) = (self.group('A'), self.group('B'));
        let l = self.adjacent(&a, &b)?;
        self.push("balancing.ab_zero".into(), l, zero())?;
        let g1 = one("G1");
        let u: Dec = self
            .p
            .table
            .parts()
            .iter()
            .filter(|p| p.group != Some('G'))
            .map(|p| p.name.clone())
            .collect();
        for (x, cx) in &self.p.cross.clone() {
            let dec = [g1.clone(), g1.clone(), one(x)];
            self.root_cases(format!("balancing.cross[{x}]"), &[(0, 2), (1, 2)], (0, 1), |e| {
                let s = Shape {
                    roots: 2,
                    edges: e,
                    absent: &[],
                };
                Ok((density(&s, &dec)?, constant(*cx)?))
            })?;
        }
        let rho = self.p.rho;
        let dec = [g1.clone(), g1.clone(), g1.clone()];
        self.root_cases("balancing.self".into(), &[(0, 2), (1, 2)], (0, 1), |e| {
            let s = Shape {
                roots: 2,
                edges: e,
                absent: &[],
            };
            Ok((density(&s, &dec)?, constant(rho * rho)?))
        })?;
        let wg = &eps / int(2);
        let wu = Rational::one() - &eps * int(3) / int(4);
        for x in &u {
            let pdeg = self.part(x)?.pre_degree.clone().ok_or_else(|| {
                Error::Construction(format!("part {x} has no pre-degree"))
            })?;
            let l = self
                .adjacent(&one(x), &g1)?
                .scaled(&wg)
                .plus(self.adjacent(&one(x), &u)?.scaled(&wu));
            self.push(format!("balancing.row[{x}]"), l, DensityExpression::constant(pdeg))?;
        }
        self.push("balancing.row[G1]".into(), self.adjacent(&g1, &g1)?, constant(rho)?)
    }

    fn distinguishing(&mut self) -> Result<()> {
        let four_over_eps = rational::to_f64(&(int(4) / &self.p.epsilon));
        let g2 = one("G2");
        for part in self.p.table.parts().to_vec() {
            let x = one(&part.name);
            let delta = part
                .delta
                .ok_or_else(|| Error::Construction(format!("part {} has no delta", part.name)))?;
            let v = four_over_eps * delta;
            self.push(format!("distinguishing.deg[{}]", part.name), self.adjacent(&x, &g2)?, constant(v)?)?;
            let s = Shape {
                roots: 1,
                edges: &[(0, 2), (1, 2)],
                absent: &[(0, 1)],
            };
            let l = density(&s, &[x.clone(), x.clone(), g2.clone()])?;
            self.push(format!("distinguishing.pair[{}]", part.name), l, constant(v * v)?)?;
        }
        Ok(())
    }

    fn ckm_align(&mut self) -> Result<()> {
        let b = self.group('B');
        for (z, d) in self.p.ckm_degrees.clone() {
            let root = if z == "G" { self.b_g() } else { one(&format!("B_{z}")) };
            self.push(format!("ckm_align[{z}]"), self.adjacent(&root, &b)?, constant(d)?)?;
        }
        Ok(())
    }
}

/// The constraints of one family, labelled.
pub fn build_suite(name: &str, params: &SuiteParams) -> Result<Vec<SuiteConstraint>> {
    let mut b = Builder {
        p: params,
        out: Vec::new(),
    };
    match name {
        "ckm_align" => b.ckm_align()?,
        "coordinate" => b.coordinate()?,
        "checker" => b.checker()?,
        "exp_checker" => b.exp_checker()?,
        "dyadic_ref" => b.dyadic_ref()?,
        "density_transfer" => b.density_transfer()?,
        "balancing" => b.balancing()?,
        "distinguishing" => b.distinguishing()?,
        _ => return Err(Error::UnknownSuite(name.to_string())),
    }
    Ok(b.out)
}

/// Checks every constraint. A decoration of measure zero or a root set that
/// rejection sampling cannot hit makes the constraint vacuous.
pub fn run_suite(suite: &[SuiteConstraint], w: &PartitionedGraphon, cfg: &RunConfig) -> Result<Vec<ConstraintReport>> {
    suite
        .iter()
        .map(|sc| match check_labelled(&sc.label, &sc.constraint, w, cfg) {
            Err(e @ (Error::EmptyDecoration(_) | Error::FeasibilitySampling(_))) => {
                Ok(ConstraintReport::vacuous(&sc.label, e.to_string()))
            }
            other => other,
        })
        .collect()
}
