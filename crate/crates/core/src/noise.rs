//! Reproducible, bridge-refinable Brownian paths.
//!
//! A path over `[t0, t1]` at level `k` stores the `2^k` increments of a
//! Brownian motion over a uniform grid. Increments are kept as signed integer
//! multiples of [`TICK`], so coarse-graining, telescoping and reversal are
//! exact integer arithmetic. Level `k + 1` is obtained from level `k` by a
//! Brownian-bridge midpoint draw keyed on `(seed, level, cell)`, which makes
//! refinement independent of traversal order.

use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::rng::standard_normal;
use crate::{Error, Result};

/// Fixed-point quantum of stored increments, `2^-42`.
pub const TICK: f64 = 1.0 / (1u64 << 42) as f64;

/// Default memory guard on the refinement depth.
pub const DEFAULT_MAX_LEVEL: u32 = 30;

#[derive(Debug, Clone, PartialEq)]
pub struct NoisePath {
    seed: u64,
    t0: f64,
    t1: f64,
    level: u32,
    max_level: u32,
    ticks: Vec<i64>,
    // length of the interval the bridge variances refer to (unchanged by rescale)
    source_len: f64,
    scale: f64,
    reversed: bool,
}

impl NoisePath {
    pub fn generate(seed: u64, t0: f64, t1: f64, level: u32) -> Result<Self> {
        Self::generate_with_max(seed, t0, t1, level, DEFAULT_MAX_LEVEL)
    }

    pub fn generate_with_max(seed: u64, t0: f64, t1: f64, level: u32, max_level: u32) -> Result<Self> {
        if !(t1 > t0) || !t0.is_finite() || !t1.is_finite() {
            return Err(Error::InvalidInterval { t0, t1 });
        }
        if level > max_level {
            return Err(Error::LevelTooDeep { level, max: max_level });
        }
        let source_len = t1 - t0;
        let root = (source_len.sqrt() * standard_normal(seed, 0, 0) / TICK).round() as i64;
        let mut path = Self {
            seed,
            t0,
            t1,
            level: 0,
            max_level,
            ticks: alloc::vec![root],
            source_len,
            scale: 1.0,
            reversed: false,
        };
        while path.level < level {
            path = path.refine()?;
        }
        Ok(path)
    }

    /// Rebuilds a level-`level` path from stored increments (no rescale, no reversal).
    pub fn from_increments(seed: u64, t0: f64, t1: f64, level: u32, increments: &[f64]) -> Result<Self> {
        if !(t1 > t0) {
            return Err(Error::InvalidInterval { t0, t1 });
        }
        if level > DEFAULT_MAX_LEVEL {
            return Err(Error::LevelTooDeep { level, max: DEFAULT_MAX_LEVEL });
        }
        if increments.len() != 1usize << level {
            return Err(Error::InvalidParameter("increment count does not match level"));
        }
        Ok(Self {
            seed,
            t0,
            t1,
            level,
            max_level: DEFAULT_MAX_LEVEL,
            ticks: increments.iter().map(|x| (x / TICK).round() as i64).collect(),
            source_len: t1 - t0,
            scale: 1.0,
            reversed: false,
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.t0, self.t1)
    }

    pub fn length(&self) -> f64 {
        self.t1 - self.t0
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn max_level(&self) -> u32 {
        self.max_level
    }

    pub fn cells(&self) -> usize {
        self.ticks.len()
    }

    pub fn cell_width(&self) -> f64 {
        self.length() / self.ticks.len() as f64
    }

    /// Amplitude factor applied on readout (1 unless rescaled).
    pub fn amplitude(&self) -> f64 {
        self.scale
    }

    pub fn is_reversed(&self) -> bool {
        self.reversed
    }

    pub fn ticks(&self) -> &[i64] {
        &self.ticks
    }

    /// Time of grid node `i`, `0 ≤ i ≤ cells`.
    pub fn node_time(&self, i: usize) -> f64 {
        if i == self.ticks.len() {
            return self.t1;
        }
        self.t0 + self.length() * (i as f64 / self.ticks.len() as f64)
    }

    /// Grid node closest to `t`, provided `t` lies on the grid up to rounding.
    pub fn node_index(&self, t: f64) -> Result<usize> {
        if t < self.t0 - 1e-9 * self.length() || t > self.t1 + 1e-9 * self.length() {
            return Err(Error::OutsidePath { t, t0: self.t0, t1: self.t1 });
        }
        let x = (t - self.t0) / self.cell_width();
        let i = x.round();
        if (x - i).abs() > 1e-6 {
            return Err(Error::IncompatibleMesh { mesh: t, cells: self.cells(), dt: self.cell_width() });
        }
        Ok(i as usize)
    }

    #[inline]
    pub fn increment(&self, i: usize) -> f64 {
        self.ticks[i] as f64 * TICK * self.scale
    }

    pub fn increments(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        self.ticks.iter().map(move |&k| k as f64 * TICK * self.scale)
    }

    /// Sum of ticks over cells `[i0, i1)`.
    pub fn tick_sum(&self, i0: usize, i1: usize) -> i64 {
        self.ticks[i0..i1].iter().sum()
    }

    /// `B(t1) - B(t0)`.
    pub fn terminal_value(&self) -> f64 {
        self.tick_sum(0, self.ticks.len()) as f64 * TICK * self.scale
    }

    /// `B(node i) - B(t0)`.
    pub fn value_at_node(&self, i: usize) -> f64 {
        self.tick_sum(0, i) as f64 * TICK * self.scale
    }

    // Index of stored cell `i` in the unreversed bridge hierarchy.
    #[inline]
    fn source_index(&self, i: usize) -> usize {
        if self.reversed {
            self.ticks.len() - 1 - i
        } else {
            i
        }
    }

    /// Inserts a Brownian-bridge midpoint in every cell.
    pub fn refine(&self) -> Result<Self> {
        let next = self.level + 1;
        if next > self.max_level {
            return Err(Error::LevelTooDeep { level: next, max: self.max_level });
        }
        let n = self.ticks.len();
        let half_sd = 0.5 * (self.source_len / n as f64).sqrt() / TICK;
        let mut ticks = alloc::vec![0i64; 2 * n];
        for (i, &parent) in self.ticks.iter().enumerate() {
            let j = self.source_index(i);
            let z = standard_normal(self.seed, u64::from(next), j as u64);
            let first = (parent as f64 * 0.5 + half_sd * z).round() as i64;
            let second = parent - first;
            // children in source order are (first, second); reversed storage flips them
            if self.reversed {
                ticks[2 * i] = second;
                ticks[2 * i + 1] = first;
            } else {
                ticks[2 * i] = first;
                ticks[2 * i + 1] = second;
            }
        }
        Ok(Self { level: next, ticks, ..self.clone_header() })
    }

    pub fn refine_to(&self, level: u32) -> Result<Self> {
        if level > self.max_level {
            return Err(Error::LevelTooDeep { level, max: self.max_level });
        }
        let mut p = self.clone();
        while p.level < level {
            p = p.refine()?;
        }
        Ok(p)
    }

    /// Refines until the cell width is at most `step`.
    pub fn refine_to_step(&self, step: f64) -> Result<Self> {
        if !(step > 0.0) {
            return Err(Error::InvalidParameter("step must be positive"));
        }
        let mut p = self.clone();
        while p.cell_width() > step * (1.0 + 1e-12) {
            p = p.refine()?;
        }
        Ok(p)
    }

    /// Sums consecutive cell pairs, undoing one refinement.
    pub fn coarsen(&self) -> Result<Self> {
        if self.level == 0 {
            return Err(Error::InvalidParameter("level-0 path cannot be coarsened"));
        }
        let ticks = self.ticks.chunks_exact(2).map(|c| c[0] + c[1]).collect();
        Ok(Self { level: self.level - 1, ticks, ..self.clone_header() })
    }

    /// Driving path read backwards in time around `pivot`: the new path lives
    /// on `[2 pivot - t1, 2 pivot - t0]` and its increment over `[s, s + dt]`
    /// is the original increment over `[2 pivot - s - dt, 2 pivot - s]`.
    pub fn time_reverse(&self, pivot: f64) -> Result<Self> {
        if !(pivot >= self.t0 && pivot <= self.t1) {
            return Err(Error::PivotOutside { pivot, t0: self.t0, t1: self.t1 });
        }
        let mut ticks = self.ticks.clone();
        ticks.reverse();
        Ok(Self {
            t0: 2.0 * pivot - self.t1,
            t1: 2.0 * pivot - self.t0,
            ticks,
            reversed: !self.reversed,
            ..self.clone_header()
        })
    }

    /// Distorted-coordinate path `E^{-1/2} B(t E)` on `[t0/E, t1/E]`.
    pub fn rescale(&self, energy: f64) -> Result<Self> {
        if !(energy >= 1.0) {
            return Err(Error::ScaleBelowOne(energy));
        }
        if energy == 1.0 {
            return Ok(self.clone());
        }
        Ok(Self {
            t0: self.t0 / energy,
            t1: self.t1 / energy,
            scale: self.scale / energy.sqrt(),
            ticks: self.ticks.clone(),
            ..self.clone_header()
        })
    }

    /// Cell averages `(B((i+1)h) - B(ih)) / h` over a mesh of width `h`.
    pub fn cell_integrals(&self, h: f64) -> Result<Vec<f64>> {
        let per = h / self.cell_width();
        let k = per.round();
        let mismatch = Error::IncompatibleMesh { mesh: h, cells: self.cells(), dt: self.cell_width() };
        if !(k >= 1.0) || (per - k).abs() > 1e-9 * per {
            return Err(mismatch);
        }
        let k = k as usize;
        if !self.ticks.len().is_multiple_of(k) {
            return Err(mismatch);
        }
        Ok(self
            .ticks
            .chunks_exact(k)
            .map(|c| c.iter().sum::<i64>() as f64 * TICK * self.scale / h)
            .collect())
    }

    fn clone_header(&self) -> Self {
        Self {
            seed: self.seed,
            t0: self.t0,
            t1: self.t1,
            level: self.level,
            max_level: self.max_level,
            ticks: Vec::new(),
            source_len: self.source_len,
            scale: self.scale,
            reversed: self.reversed,
        }
    }
}
