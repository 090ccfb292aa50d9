//! Sets represented as unions of cubic lattice cells.
//!
//! Cell `c ∈ Z^dim` is `origin + spacing·[c, c + 1)`. Explicit sets store their
//! cells in a hash set; lattice balls are implicit (membership and counting are
//! arithmetic) so that very fine balls in high dimension cost nothing to hold.

use rand::Rng;
use rustc_hash::FxHashSet;

use crate::error::{Error, Result};

/// Cell count above which implicit sets refuse to enumerate.
pub const MAX_ENUMERATED_CELLS: u64 = 20_000_000;

#[derive(Clone, Debug)]
enum Cells {
    Explicit { list: Vec<Vec<i64>>, index: FxHashSet<u128> },
    /// Cells `c` with `|c|² ≤ r2`, for the lattice anchored so that the ball
    /// center is the center of cell 0.
    Ball { center: Vec<f64>, r2: u64, count: u64 },
}

#[derive(Clone, Debug)]
pub struct LatticeSet {
    dim: usize,
    origin: Vec<f64>,
    spacing: f64,
    cells: Cells,
}

fn pack(c: &[i64]) -> Option<u128> {
    let bits = (128 / c.len()).min(32) as u32;
    let half = 1i64 << (bits - 1);
    let mut key = 0u128;
    for &v in c {
        if v < -half || v >= half {
            return None;
        }
        key = (key << bits) | (v + half) as u128;
    }
    Some(key)
}

/// Number of `c ∈ Z^dim` with `|c|² ≤ r2`.
pub fn lattice_ball_count(dim: usize, r2: u64) -> u64 {
    let r2 = r2 as usize;
    // ways[s] = number of vectors so far with squared norm exactly s.
    let mut ways = vec![0u64; r2 + 1];
    ways[0] = 1;
    let rmax = (r2 as f64).sqrt() as i64 + 1;
    for _ in 0..dim {
        let mut next = vec![0u64; r2 + 1];
        for (s, &w) in ways.iter().enumerate() {
            if w == 0 {
                continue;
            }
            for j in -rmax..=rmax {
                let t = s + (j * j) as usize;
                if t <= r2 {
                    next[t] += w;
                }
            }
        }
        ways = next;
    }
    ways.iter().sum()
}

impl LatticeSet {
    pub fn empty(dim: usize, origin: Vec<f64>, spacing: f64) -> Result<Self> {
        Self::from_cells(dim, origin, spacing, Vec::new())
    }

    pub fn from_cells(dim: usize, origin: Vec<f64>, spacing: f64, cells: Vec<Vec<i64>>) -> Result<Self> {
        if dim == 0 || origin.len() != dim {
            return Err(Error::InvalidDimensions(format!("origin of length {} for dim {dim}", origin.len())));
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::InvalidArgument(format!("spacing must be positive, got {spacing}")));
        }
        let mut index = FxHashSet::default();
        let mut list = Vec::with_capacity(cells.len());
        for c in cells {
            if c.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: c.len() });
            }
            let key = pack(&c).ok_or_else(|| Error::MemoryGuard(format!("cell index {c:?} out of packable range")))?;
            if index.insert(key) {
                list.push(c);
            }
        }
        Ok(LatticeSet { dim, origin, spacing, cells: Cells::Explicit { list, index } })
    }

    /// Cells of the box `[lo, hi)` (cell-index bounds, inclusive-exclusive)
    /// whose centers satisfy `pred`.
    pub fn from_predicate(
        origin: Vec<f64>,
        spacing: f64,
        lo: &[i64],
        hi: &[i64],
        pred: impl Fn(&[f64]) -> bool,
    ) -> Result<Self> {
        let dim = origin.len();
        if lo.len() != dim || hi.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: lo.len().min(hi.len()) });
        }
        let total: u64 = lo.iter().zip(hi).map(|(a, b)| (b - a).max(0) as u64).product();
        if total > MAX_ENUMERATED_CELLS * 5 {
            return Err(Error::MemoryGuard(format!("{total} candidate cells")));
        }
        let mut cells = Vec::new();
        if total > 0 {
            let mut c = lo.to_vec();
            let mut x = vec![0.0; dim];
            'outer: loop {
                for k in 0..dim {
                    x[k] = origin[k] + (c[k] as f64 + 0.5) * spacing;
                }
                if pred(&x) {
                    cells.push(c.clone());
                }
                for k in 0..dim {
                    c[k] += 1;
                    if c[k] < hi[k] {
                        continue 'outer;
                    }
                    c[k] = lo[k];
                }
                break;
            }
        }
        Self::from_cells(dim, origin, spacing, cells)
    }

    /// Lattice set approximating `{x : pred(x)}` inside the axis box `[lo, hi]`
    /// with origin at `lo`.
    pub fn from_region(lo: &[f64], hi: &[f64], spacing: f64, pred: impl Fn(&[f64]) -> bool) -> Result<Self> {
        let n: Vec<i64> = lo.iter().zip(hi).map(|(a, b)| ((b - a) / spacing).ceil() as i64).collect();
        Self::from_predicate(lo.to_vec(), spacing, &vec![0; lo.len()], &n, pred)
    }

    /// Implicit ball: cells whose centers lie within `radius` of `center`, with
    /// `center` itself a cell center.
    pub fn ball(center: &[f64], radius: f64, spacing: f64) -> Result<Self> {
        let dim = center.len();
        if dim == 0 {
            return Err(Error::InvalidDimensions("ball needs dim >= 1".into()));
        }
        if !(spacing > 0.0 && radius >= 0.0) {
            return Err(Error::InvalidArgument("ball needs positive spacing and nonnegative radius".into()));
        }
        let ratio = radius / spacing;
        if ratio > 1e4 {
            return Err(Error::MemoryGuard(format!("ball radius is {ratio} cells")));
        }
        let r2 = (ratio * ratio + 1e-9).floor() as u64;
        let origin = center.iter().map(|c| c - spacing / 2.0).collect();
        let count = lattice_ball_count(dim, r2);
        Ok(LatticeSet { dim, origin, spacing, cells: Cells::Ball { center: center.to_vec(), r2, count } })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing.powi(self.dim as i32)
    }

    pub fn cell_count(&self) -> u64 {
        match &self.cells {
            Cells::Explicit { list, .. } => list.len() as u64,
            Cells::Ball { count, .. } => *count,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.cell_count() == 0
    }

    pub fn measure(&self) -> f64 {
        self.cell_count() as f64 * self.cell_volume()
    }

    pub fn cell_of(&self, x: &[f64]) -> Vec<i64> {
        x.iter().zip(&self.origin).map(|(xi, o)| ((xi - o) / self.spacing).floor() as i64).collect()
    }

    pub fn contains_cell(&self, c: &[i64]) -> bool {
        match &self.cells {
            Cells::Explicit { index, .. } => pack(c).is_some_and(|k| index.contains(&k)),
            Cells::Ball { r2, .. } => c.iter().map(|v| (v * v) as u64).sum::<u64>() <= *r2,
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        debug_assert_eq!(x.len(), self.dim);
        match &self.cells {
            Cells::Explicit { index, .. } => {
                let bits = (128 / self.dim).min(32) as u32;
                let half = 1i64 << (bits - 1);
                let mut key = 0u128;
                for (xi, o) in x.iter().zip(&self.origin) {
                    let v = ((xi - o) / self.spacing).floor() as i64;
                    if v < -half || v >= half {
                        return false;
                    }
                    key = (key << bits) | (v + half) as u128;
                }
                index.contains(&key)
            }
            Cells::Ball { r2, .. } => {
                let mut s = 0u64;
                for (xi, o) in x.iter().zip(&self.origin) {
                    let v = ((xi - o) / self.spacing).floor() as i64;
                    s += (v * v) as u64;
                    if s > *r2 {
                        return false;
                    }
                }
                true
            }
        }
    }

    pub fn cell_center(&self, c: &[i64]) -> Vec<f64> {
        c.iter().zip(&self.origin).map(|(v, o)| o + (*v as f64 + 0.5) * self.spacing).collect()
    }

    /// Explicit cell list; implicit sets are enumerated up to a guard.
    pub fn cells(&self) -> Result<Vec<Vec<i64>>> {
        match &self.cells {
            Cells::Explicit { list, .. } => Ok(list.clone()),
            Cells::Ball { r2, count, .. } => {
                if *count > MAX_ENUMERATED_CELLS {
                    return Err(Error::MemoryGuard(format!("{count} cells")));
                }
                let r = (*r2 as f64).sqrt() as i64;
                let mut out = Vec::with_capacity(*count as usize);
                let mut c = vec![-r; self.dim];
                'outer: loop {
                    if self.contains_cell(&c) {
                        out.push(c.clone());
                    }
                    for k in 0..self.dim {
                        c[k] += 1;
                        if c[k] <= r {
                            continue 'outer;
                        }
                        c[k] = -r;
                    }
                    break;
                }
                Ok(out)
            }
        }
    }

    /// Materializes an implicit set as an explicit one.
    pub fn to_explicit(&self) -> Result<LatticeSet> {
        Self::from_cells(self.dim, self.origin.clone(), self.spacing, self.cells()?)
    }

    /// Cells whose centers satisfy `pred`.
    pub fn filter(&self, pred: impl Fn(&[f64]) -> bool) -> Result<LatticeSet> {
        let keep = self.cells()?.into_iter().filter(|c| pred(&self.cell_center(c))).collect();
        Self::from_cells(self.dim, self.origin.clone(), self.spacing, keep)
    }

    /// Axis bounding box of the occupied cells.
    pub fn bounding_box(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        match &self.cells {
            Cells::Explicit { list, .. } => {
                let first = list.first()?;
                let mut lo = first.clone();
                let mut hi = first.clone();
                for c in list {
                    for k in 0..self.dim {
                        lo[k] = lo[k].min(c[k]);
                        hi[k] = hi[k].max(c[k]);
                    }
                }
                Some((
                    lo.iter().zip(&self.origin).map(|(v, o)| o + *v as f64 * self.spacing).collect(),
                    hi.iter().zip(&self.origin).map(|(v, o)| o + (*v + 1) as f64 * self.spacing).collect(),
                ))
            }
            Cells::Ball { center, r2, .. } => {
                let r = ((*r2 as f64).sqrt().floor() + 0.5) * self.spacing;
                Some((center.iter().map(|c| c - r).collect(), center.iter().map(|c| c + r).collect()))
            }
        }
    }

    /// Uniform point of the set.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) -> Result<()> {
        match &self.cells {
            Cells::Explicit { list, .. } => {
                if list.is_empty() {
                    return Err(Error::EmptySet);
                }
                let c = &list[rng.gen_range(0..list.len())];
                for k in 0..self.dim {
                    out[k] = self.origin[k] + (c[k] as f64 + rng.gen::<f64>()) * self.spacing;
                }
                Ok(())
            }
            Cells::Ball { r2, .. } => {
                let r = (*r2 as f64).sqrt() as i64;
                let mut c = vec![0i64; self.dim];
                loop {
                    let mut s = 0u64;
                    let mut ok = true;
                    for v in c.iter_mut() {
                        *v = rng.gen_range(-r..=r);
                        s += (*v * *v) as u64;
                        if s > *r2 {
                            ok = false;
                            break;
                        }
                    }
                    if ok {
                        break;
                    }
                }
                for k in 0..self.dim {
                    out[k] = self.origin[k] + (c[k] as f64 + rng.gen::<f64>()) * self.spacing;
                }
                Ok(())
            }
        }
    }

    /// Union of explicit sets on the same lattice.
    pub fn union(&self, other: &LatticeSet) -> Result<LatticeSet> {
        if self.dim != other.dim || self.spacing != other.spacing || self.origin != other.origin {
            return Err(Error::InvalidArgument("union needs a shared lattice".into()));
        }
        let mut cells = self.cells()?;
        cells.extend(other.cells()?);
        Self::from_cells(self.dim, self.origin.clone(), self.spacing, cells)
    }

    /// Whether every cell of `self` belongs to `other` (same lattice).
    pub fn is_subset_of(&self, other: &LatticeSet) -> Result<bool> {
        Ok(self.cells()?.iter().all(|c| other.contains(&self.cell_center(c))))
    }
}
