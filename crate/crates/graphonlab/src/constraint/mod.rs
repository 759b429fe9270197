//! Decorated constraints: terms, expressions, evaluation at root tuples,
//! satisfaction checks, expansion to singleton decorations and the suites
//! pinning down the universal graphon.

mod eval;
mod expr;
mod partitioned;
mod suites;

pub use eval::{
    check_constraint, check_labelled, evaluate_at_roots, ConstraintReport, Estimate, Status, FEASIBILITY_LIMIT,
};
pub use expr::{Constraint, DecoratedGraph, Decoration, DensityExpression, Monomial, PartName};
pub use partitioned::{Part, PartTable, PartitionedGraphon};
pub use suites::{build_suite, run_suite, SuiteConstraint, SuiteParams, SUITES};

use num_traits::{One, Zero};

use crate::rational::Rational;

/// Rewrites `c` with singleton decorations only: a set on a non-root becomes
/// the measure-weighted combination of its parts, a set on a root splits
/// into one constraint per part.
pub fn expand_to_simple(c: &Constraint, table: &PartTable) -> Vec<Constraint> {
    let m = c.roots();
    let root_decs: Vec<Decoration> = c.graphs().next().map_or_else(Vec::new, |g| g.decorations()[..m].to_vec());
    let mut cases: Vec<Vec<PartName>> = vec![Vec::new()];
    for d in &root_decs {
        cases = cases
            .into_iter()
            .flat_map(|prefix| {
                d.iter().map(move |p| {
                    let mut v = prefix.clone();
                    v.push(p.clone());
                    v
                })
            })
            .collect();
    }
    let fix_roots = |e: &DensityExpression, case: &[PartName]| DensityExpression {
        terms: e
            .terms
            .iter()
            .map(|t| Monomial {
                coeff: t.coeff.clone(),
                factors: t
                    .factors
                    .iter()
                    .map(|g| {
                        case.iter()
                            .enumerate()
                            .fold(g.clone(), |g, (v, p)| g.with_decoration(v, vec![p.clone()]))
                    })
                    .collect(),
            })
            .collect(),
    };
    cases
        .iter()
        .map(|case| Constraint {
            left: expand_expr(&fix_roots(&c.left, case), table),
            right: expand_expr(&fix_roots(&c.right, case), table),
        })
        .collect()
}

fn expand_graph(g: &DecoratedGraph, table: &PartTable) -> Vec<(Rational, DecoratedGraph)> {
    let mut out = vec![(Rational::one(), g.clone())];
    for v in g.roots()..g.n() {
        let d = g.decoration(v);
        if d.len() < 2 {
            continue;
        }
        let measures: Vec<Rational> = d
            .iter()
            .map(|p| table.get(p.as_str()).map(|x| x.measure()).unwrap_or_else(|_| Rational::zero()))
            .collect();
        let total: Rational = measures.iter().sum();
        if total.is_zero() {
            continue;
        }
        out = out
            .into_iter()
            .flat_map(|(w, h)| {
                d.iter()
                    .zip(&measures)
                    .filter(|(_, mu)| !mu.is_zero())
                    .map(|(p, mu)| (&w * mu / &total, h.with_decoration(v, vec![p.clone()])))
                    .collect::<Vec<_>>()
            })
            .collect();
    }
    out
}

fn expand_expr(e: &DensityExpression, table: &PartTable) -> DensityExpression {
    let mut terms = Vec::new();
    for t in &e.terms {
        let mut acc = vec![Monomial::constant(t.coeff.clone())];
        for f in &t.factors {
            let parts = expand_graph(f, table);
            acc = acc
                .into_iter()
                .flat_map(|mono| {
                    parts.iter().map(move |(w, g)| {
                        let mut factors = mono.factors.clone();
                        factors.push(g.clone());
                        Monomial {
                            coeff: &mono.coeff * w,
                            factors,
                        }
                    })
                })
                .collect();
        }
        terms.extend(acc);
    }
    DensityExpression { terms }
}
