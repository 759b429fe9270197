//! Graphons assembled from tiles over a partition of [0,1) into named parts.

use std::ops::Range;
use std::sync::Arc;

use num_traits::{One, Zero};

use super::{Descriptor, GammaMap, GraphonKernel, Interval, Kernel};
use crate::error::{Error, Result};
use crate::rational::{self, Rational};

#[derive(Clone, Debug, PartialEq)]
pub struct NamedPart {
    pub name: String,
    pub interval: Interval,
}

/// One tile: the kernel lives on `rows × cols` (contiguous part index
/// ranges) and is mirrored onto `cols × rows`. Coordinates reach the kernel
/// through the maps, by default the γ maps of the two groups.
#[derive(Clone, Debug)]
pub struct TileSpec {
    pub rows: Range<usize>,
    pub cols: Range<usize>,
    pub kernel: Arc<dyn Kernel>,
    pub row_map: Option<GammaMap>,
    pub col_map: Option<GammaMap>,
}

impl TileSpec {
    pub fn new(rows: Range<usize>, cols: Range<usize>, kernel: Arc<dyn Kernel>) -> Self {
        TileSpec {
            rows,
            cols,
            kernel,
            row_map: None,
            col_map: None,
        }
    }

    /// Pass global coordinates to the kernel unchanged.
    pub fn global(mut self) -> Self {
        self.row_map = Some(GammaMap::identity());
        self.col_map = Some(GammaMap::identity());
        self
    }
}

#[derive(Clone, Debug)]
struct Tile {
    kernel: Arc<dyn Kernel>,
    row_map: GammaMap,
    col_map: GammaMap,
}

const NONE: u32 = u32::MAX;

#[derive(Clone, Debug)]
pub struct TiledGraphon {
    parts: Vec<NamedPart>,
    /// Non-empty parts and their left endpoints, for lookup.
    live: Vec<usize>,
    starts: Vec<f64>,
    ends: Vec<f64>,
    tiles: Vec<Tile>,
    /// `parts × parts` entries: tile index × 2 + transposed flag.
    lookup: Vec<u32>,
    /// Per row part, maximal runs of equal entries over live columns:
    /// `(first live index, last live index + 1, entry)`.
    runs: Vec<Vec<(usize, usize, u32)>>,
}

pub fn tiled_graphon(partition: Vec<NamedPart>, tiles: Vec<TileSpec>) -> Result<TiledGraphon> {
    TiledGraphon::new(partition, tiles)
}

impl TiledGraphon {
    pub fn new(partition: Vec<NamedPart>, tiles: Vec<TileSpec>) -> Result<Self> {
        let p = partition.len();
        let mut at = Rational::zero();
        for part in &partition {
            if part.interval.lo() < &at {
                return Err(Error::Overlap(format!("part {} at {}", part.name, part.interval)));
            }
            if part.interval.lo() > &at {
                return Err(Error::Coverage(format!(
                    "gap before part {} at {}",
                    part.name,
                    rational::format(&at)
                )));
            }
            at = part.interval.hi().clone();
        }
        if !at.is_one() {
            return Err(Error::Coverage(format!("parts end at {}", rational::format(&at))));
        }
        let live: Vec<usize> = (0..p).filter(|&i| !partition[i].interval.is_empty()).collect();
        let starts = live.iter().map(|&i| partition[i].interval.lo_f()).collect();
        let ends = live.iter().map(|&i| partition[i].interval.hi_f()).collect();

        let mut lookup = vec![NONE; p * p];
        let mut built = Vec::with_capacity(tiles.len());
        for (t, spec) in tiles.into_iter().enumerate() {
            if spec.rows.end > p || spec.cols.end > p || spec.rows.is_empty() || spec.cols.is_empty() {
                return Err(Error::Index(format!("tile {t} ranges {:?} x {:?}", spec.rows, spec.cols)));
            }
            let group = |r: &Range<usize>| GammaMap::of_group(partition[r.clone()].iter().map(|q| &q.interval));
            let row_map = match spec.row_map {
                Some(m) => m,
                None => group(&spec.rows)?,
            };
            let col_map = match spec.col_map {
                Some(m) => m,
                None => group(&spec.cols)?,
            };
            let id = t as u32 * 2;
            for r in spec.rows.clone() {
                for c in spec.cols.clone() {
                    let slot = &mut lookup[r * p + c];
                    if *slot != NONE && *slot != id {
                        return Err(Error::Overlap(format!(
                            "tile {t} at ({}, {})",
                            partition[r].name, partition[c].name
                        )));
                    }
                    *slot = id;
                }
            }
            for r in spec.rows.clone() {
                for c in spec.cols.clone() {
                    let slot = &mut lookup[c * p + r];
                    if *slot == id {
                        continue;
                    }
                    if *slot != NONE {
                        return Err(Error::Overlap(format!(
                            "tile {t} at ({}, {})",
                            partition[c].name, partition[r].name
                        )));
                    }
                    *slot = id + 1;
                }
            }
            built.push(Tile {
                kernel: spec.kernel,
                row_map,
                col_map,
            });
        }
        let runs = (0..p)
            .map(|r| {
                let mut out: Vec<(usize, usize, u32)> = Vec::new();
                for (li, &c) in live.iter().enumerate() {
                    let e = lookup[r * p + c];
                    match out.last_mut() {
                        Some(last) if last.2 == e => last.1 = li + 1,
                        _ => out.push((li, li + 1, e)),
                    }
                }
                out
            })
            .collect();
        Ok(TiledGraphon {
            parts: partition,
            live,
            starts,
            ends,
            tiles: built,
            lookup,
            runs,
        })
    }

    pub fn parts(&self) -> &[NamedPart] {
        &self.parts
    }

    pub fn part_index(&self, name: &str) -> Option<usize> {
        self.parts.iter().position(|p| p.name == name)
    }

    /// Index of the (non-empty) part containing `x`.
    pub fn part_of(&self, x: f64) -> usize {
        let li = self.starts.partition_point(|&s| s <= x).saturating_sub(1);
        self.live[li]
    }

    /// Replace the kernel of the tile covering the part pair `(r, c)`.
    pub fn replace_tile(&mut self, r: usize, c: usize, kernel: Arc<dyn Kernel>) -> Result<()> {
        let p = self.parts.len();
        let e = self.lookup[r * p + c];
        if e == NONE {
            return Err(Error::Index(format!("no tile at ({}, {})", self.parts[r].name, self.parts[c].name)));
        }
        self.tiles[(e >> 1) as usize].kernel = kernel;
        Ok(())
    }

    fn eval_entry(&self, e: u32, x: f64, y: f64) -> f64 {
        if e == NONE {
            return 0.0;
        }
        let tile = &self.tiles[(e >> 1) as usize];
        if e & 1 == 0 {
            tile.kernel.value(tile.row_map.inverse(x), tile.col_map.inverse(y))
        } else {
            tile.kernel.value(tile.row_map.inverse(y), tile.col_map.inverse(x))
        }
    }

    fn run_mass(&self, e: u32, x: f64, a: f64, b: f64) -> f64 {
        if e == NONE || b <= a {
            return 0.0;
        }
        let tile = &self.tiles[(e >> 1) as usize];
        if e & 1 == 0 {
            let (m, c) = (&tile.row_map, &tile.col_map);
            c.len_f() * tile.kernel.row_mass(m.inverse(x), c.inverse(a), c.inverse(b))
        } else {
            let (m, c) = (&tile.col_map, &tile.row_map);
            c.len_f() * tile.kernel.col_mass(m.inverse(x), c.inverse(a), c.inverse(b))
        }
    }
}

impl Kernel for TiledGraphon {
    fn value(&self, x: f64, y: f64) -> f64 {
        let p = self.parts.len();
        self.eval_entry(self.lookup[self.part_of(x) * p + self.part_of(y)], x, y)
    }

    fn row_mass(&self, x: f64, lo: f64, hi: f64) -> f64 {
        if hi <= lo {
            return 0.0;
        }
        let runs = &self.runs[self.part_of(x)];
        let first = runs.partition_point(|run| self.ends[run.1 - 1] <= lo);
        let mut s = 0.0;
        for &(a, b, e) in &runs[first..] {
            let start = self.starts[a];
            if start >= hi {
                break;
            }
            s += self.run_mass(e, x, start.max(lo), self.ends[b - 1].min(hi));
        }
        s
    }

    fn col_mass(&self, y: f64, lo: f64, hi: f64) -> f64 {
        self.row_mass(y, lo, hi)
    }

    fn rect_mass(&self, x: (f64, f64), y: (f64, f64)) -> f64 {
        let p = self.parts.len();
        let clip = |li: usize, r: (f64, f64)| (self.starts[li].max(r.0), self.ends[li].min(r.1));
        let mut s = 0.0;
        for (ri, &row) in self.live.iter().enumerate() {
            let xr = clip(ri, x);
            if xr.1 <= xr.0 {
                continue;
            }
            for (ci, &col) in self.live.iter().enumerate() {
                let yr = clip(ci, y);
                let e = self.lookup[row * p + col];
                if yr.1 <= yr.0 || e == NONE {
                    continue;
                }
                let tile = &self.tiles[(e >> 1) as usize];
                let (a, b) = if e & 1 == 0 { (xr, yr) } else { (yr, xr) };
                let (rm, cm) = (&tile.row_map, &tile.col_map);
                s += rm.len_f()
                    * cm.len_f()
                    * tile
                        .kernel
                        .rect_mass((rm.inverse(a.0), rm.inverse(a.1)), (cm.inverse(b.0), cm.inverse(b.1)));
            }
        }
        s
    }

    fn descriptor(&self) -> Descriptor {
        Descriptor::Tiled
    }
}

impl GraphonKernel for TiledGraphon {}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphon::{ConstantKernel, HalfGraphon};
    use crate::rational::rat;

    fn parts(cuts: &[(i64, i64)]) -> Vec<NamedPart> {
        let mut lo = Rational::zero();
        cuts.iter()
            .enumerate()
            .map(|(i, &(n, d))| {
                let hi = &lo + rat(n, d);
                let iv = Interval::new(lo.clone(), hi.clone()).unwrap();
                lo = hi;
                NamedPart {
                    name: format!("P{}", i + 1),
                    interval: iv,
                }
            })
            .collect()
    }

    #[test]
    fn empty_tile_map_is_zero() {
        let w = TiledGraphon::new(parts(&[(1, 3), (2, 3)]), vec![]).unwrap();
        assert_eq!(w.value(0.1, 0.9), 0.0);
        assert_eq!(w.row_mass(0.5, 0.0, 1.0), 0.0);
    }

    #[test]
    fn constant_diagonal_tile_density() {
        let w = TiledGraphon::new(
            parts(&[(1, 4), (3, 4)]),
            vec![TileSpec::new(0..1, 0..1, Arc::new(ConstantKernel(1.0)))],
        )
        .unwrap();
        let mass = w.rect_mass((0.0, 1.0), (0.0, 1.0));
        assert!((mass - 1.0 / 16.0).abs() < 1e-12);
        assert_eq!(w.value(0.1, 0.2), 1.0);
        assert_eq!(w.value(0.1, 0.3), 0.0);
    }

    #[test]
    fn off_diagonal_tile_is_mirrored() {
        let w = TiledGraphon::new(
            parts(&[(1, 2), (1, 4), (1, 4)]),
            vec![TileSpec::new(0..1, 1..3, Arc::new(HalfGraphon))],
        )
        .unwrap();
        for &(x, y) in &[(0.1, 0.9), (0.4, 0.55), (0.45, 0.74), (0.3, 0.6)] {
            assert_eq!(w.value(x, y), w.value(y, x));
        }
        // x = 0.4 maps to 0.8, so the half tile needs v >= 0.2 in [1/2, 1).
        assert!((w.row_mass(0.4, 0.0, 1.0) - 0.4).abs() < 1e-15);
        // y = 0.9 maps to 0.8 in the column group.
        assert!((w.row_mass(0.9, 0.0, 1.0) - 0.4).abs() < 1e-15);
    }

    #[test]
    fn invalid_partitions() {
        let mut ps = parts(&[(1, 2), (1, 2)]);
        ps[1].interval = Interval::new(rat(2, 3), rat(1, 1)).unwrap();
        assert!(matches!(TiledGraphon::new(ps, vec![]), Err(Error::Coverage(_))));
        let mut ps = parts(&[(1, 2), (1, 2)]);
        ps[1].interval = Interval::new(rat(1, 3), rat(1, 1)).unwrap();
        assert!(matches!(TiledGraphon::new(ps, vec![]), Err(Error::Overlap(_))));
        let k: Arc<dyn Kernel> = Arc::new(ConstantKernel(1.0));
        let e = TiledGraphon::new(
            parts(&[(1, 2), (1, 2)]),
            vec![TileSpec::new(0..1, 1..2, k.clone()), TileSpec::new(1..2, 0..1, k)],
        );
        assert!(matches!(e, Err(Error::Overlap(_))));
    }
}
