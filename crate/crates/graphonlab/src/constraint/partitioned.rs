//! Graphons with named parts.

use std::collections::HashMap;
use std::sync::Arc;

use num_traits::{One, Zero};
use serde_json::json;

use super::expr::PartName;
use crate::error::{Error, Result};
use crate::graphon::{GraphonKernel, Interval, NamedPart, StepGraphon};
use crate::rational::{self, Rational};

#[derive(Clone, Debug, PartialEq)]
pub struct Part {
    pub name: String,
    pub group: Option<char>,
    pub interval: Interval,
    pub pre_degree: Option<Rational>,
    pub delta: Option<f64>,
}

impl Part {
    pub fn plain(name: impl Into<String>, interval: Interval) -> Self {
        Part {
            name: name.into(),
            group: None,
            interval,
            pre_degree: None,
            delta: None,
        }
    }

    pub fn measure(&self) -> Rational {
        self.interval.len()
    }
}

/// Named parts listed left to right, covering [0,1) exactly. Parts of measure
/// zero are allowed and keep their place.
#[derive(Clone, Debug, PartialEq)]
pub struct PartTable {
    parts: Vec<Part>,
    index: HashMap<String, usize>,
}

impl PartTable {
    pub fn new(parts: Vec<Part>) -> Result<Self> {
        let mut at = Rational::zero();
        let mut index = HashMap::new();
        for (i, p) in parts.iter().enumerate() {
            PartName::new(p.name.clone())?;
            if index.insert(p.name.clone(), i).is_some() {
                return Err(Error::Index(format!("duplicate part name {}", p.name)));
            }
            if p.interval.lo() < &at {
                return Err(Error::Overlap(format!("part {} at {}", p.name, p.interval)));
            }
            if p.interval.lo() > &at {
                return Err(Error::Coverage(format!("gap before part {}", p.name)));
            }
            at = p.interval.hi().clone();
        }
        if !at.is_one() {
            return Err(Error::MeasureSum(format!("parts end at {}", rational::format(&at))));
        }
        Ok(PartTable { parts, index })
    }

    /// Parts `P1..Pk` matching the blocks of a step graphon.
    pub fn of_step(w: &StepGraphon) -> Self {
        let parts = (0..w.parts())
            .map(|i| Part::plain(format!("P{}", i + 1), w.part_interval(i)))
            .collect();
        PartTable::new(parts).expect("step blocks cover [0,1)")
    }

    pub fn parts(&self) -> &[Part] {
        &self.parts
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.index.get(name).copied().ok_or_else(|| Error::UnknownPart(name.to_string()))
    }

    pub fn get(&self, name: &str) -> Result<&Part> {
        Ok(&self.parts[self.index_of(name)?])
    }

    /// Names of the parts in a group, in table order.
    pub fn group(&self, g: char) -> Vec<String> {
        self.parts.iter().filter(|p| p.group == Some(g)).map(|p| p.name.clone()).collect()
    }

    /// Index of the part containing `x`; parts of measure zero never match.
    pub fn part_of(&self, x: f64) -> usize {
        let i = self.parts.partition_point(|p| p.interval.lo_f() <= x);
        let mut i = i.saturating_sub(1);
        while i > 0 && self.parts[i].interval.is_empty() {
            i -= 1;
        }
        i
    }

    pub fn named_parts(&self) -> Vec<NamedPart> {
        self.parts
            .iter()
            .map(|p| NamedPart {
                name: p.name.clone(),
                interval: p.interval.clone(),
            })
            .collect()
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.parts
                .iter()
                .map(|p| {
                    json!({
                        "name": p.name,
                        "group": p.group.map(|g| g.to_string()),
                        "lo": rational::format(p.interval.lo()),
                        "hi": rational::format(p.interval.hi()),
                        "measure": rational::format(&p.measure()),
                        "pre_degree": p.pre_degree.as_ref().map(rational::format),
                        "delta": p.delta,
                    })
                })
                .collect(),
        )
    }
}

#[derive(Clone, Debug)]
pub struct PartitionedGraphon {
    kernel: Arc<dyn GraphonKernel>,
    table: PartTable,
    step: Option<StepGraphon>,
}

impl PartitionedGraphon {
    pub fn new(kernel: Arc<dyn GraphonKernel>, table: PartTable) -> Self {
        PartitionedGraphon {
            kernel,
            table,
            step: None,
        }
    }

    /// A step graphon whose blocks are the parts; constraints on it are
    /// evaluated exactly.
    pub fn from_step(w: StepGraphon, names: Option<Vec<String>>) -> Result<Self> {
        let mut table = PartTable::of_step(&w);
        if let Some(names) = names {
            if names.len() != w.parts() {
                return Err(Error::Index(format!("{} names for {} parts", names.len(), w.parts())));
            }
            let parts = table
                .parts
                .into_iter()
                .zip(names)
                .map(|(p, n)| Part { name: n, ..p })
                .collect();
            table = PartTable::new(parts)?;
        }
        Ok(PartitionedGraphon {
            kernel: Arc::new(w.clone()),
            table,
            step: Some(w),
        })
    }

    pub fn kernel(&self) -> &Arc<dyn GraphonKernel> {
        &self.kernel
    }

    pub fn table(&self) -> &PartTable {
        &self.table
    }

    pub fn step(&self) -> Option<&StepGraphon> {
        self.step.as_ref()
    }

    pub fn with_kernel(&self, kernel: Arc<dyn GraphonKernel>) -> Self {
        PartitionedGraphon {
            kernel,
            table: self.table.clone(),
            step: None,
        }
    }

    pub fn value(&self, x: f64, y: f64) -> f64 {
        self.kernel.value(x, y)
    }

    /// Degree at the midpoint of each part, `None` for parts of measure zero.
    pub fn degrees(&self) -> Vec<Option<f64>> {
        self.table
            .parts
            .iter()
            .map(|p| {
                (!p.interval.is_empty()).then(|| self.kernel.degree((p.interval.lo_f() + p.interval.hi_f()) / 2.0))
            })
            .collect()
    }

    /// Whether the part degrees are pairwise at least `tol` apart.
    pub fn degrees_distinct(&self, tol: f64) -> bool {
        let mut d: Vec<f64> = self.degrees().into_iter().flatten().collect();
        d.sort_by(f64::total_cmp);
        d.windows(2).all(|w| w[1] - w[0] >= tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    #[test]
    fn table_lookup_skips_empty_parts() {
        let iv = |a, b| Interval::new(rat(a, 4), rat(b, 4)).unwrap();
        let t = PartTable::new(vec![
            Part::plain("A", iv(0, 1)),
            Part::plain("Z", Interval::empty_at(rat(1, 4)).unwrap()),
            Part::plain("B", iv(1, 4)),
        ])
        .unwrap();
        assert_eq!(t.part_of(0.1), 0);
        assert_eq!(t.part_of(0.25), 2);
        assert_eq!(t.part_of(0.99), 2);
        assert!(matches!(t.index_of("Q"), Err(Error::UnknownPart(_))));
        let short = PartTable::new(vec![Part::plain("A", iv(0, 1))]);
        assert!(matches!(short, Err(Error::MeasureSum(_))));
    }

    #[test]
    fn step_degrees() {
        let w = StepGraphon::new(
            vec![rat(1, 2), rat(1, 2)],
            vec![vec![rat(0, 1), rat(1, 1)], vec![rat(1, 1), rat(1, 2)]],
        )
        .unwrap();
        let p = PartitionedGraphon::from_step(w, None).unwrap();
        assert_eq!(p.degrees(), vec![Some(0.5), Some(0.75)]);
        assert!(p.degrees_distinct(1e-12));
    }
}
