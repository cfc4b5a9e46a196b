//! Particle, lozenge and honeycomb coordinates.
//!
//! A black vertex `(x, n)` has white neighbours `(x, n)`, `(x, n+1)` and
//! `(x-1, n+1)`. The dimer on the first edge is a type I lozenge and marks a
//! particle at `(x, n)`; the second is type III and the third type II.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BlackVertex {
    pub x: i64,
    pub n: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct WhiteVertex {
    pub x: i64,
    pub n: i64,
}

impl BlackVertex {
    pub const fn new(x: i64, n: i64) -> Self {
        Self { x, n }
    }

    pub fn shift(self, dx: i64, dn: i64) -> Self {
        Self::new(self.x + dx, self.n + dn)
    }
}

impl WhiteVertex {
    pub const fn new(x: i64, n: i64) -> Self {
        Self { x, n }
    }

    pub fn shift(self, dx: i64, dn: i64) -> Self {
        Self::new(self.x + dx, self.n + dn)
    }
}

impl fmt::Display for BlackVertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "black({},{})", self.x, self.n)
    }
}

impl fmt::Display for WhiteVertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "white({},{})", self.x, self.n)
    }
}

/// Which of the three weights a lozenge carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WeightRole {
    A,
    B,
    C,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LozengeType {
    I,
    II,
    III,
}

impl LozengeType {
    pub const ALL: [LozengeType; 3] = [LozengeType::I, LozengeType::III, LozengeType::II];

    pub fn weight_role(self) -> WeightRole {
        match self {
            LozengeType::I => WeightRole::B,
            LozengeType::II => WeightRole::A,
            LozengeType::III => WeightRole::C,
        }
    }

    /// Offset of the white endpoint from the black one.
    pub fn offset(self) -> (i64, i64) {
        match self {
            LozengeType::I => (0, 0),
            LozengeType::III => (0, 1),
            LozengeType::II => (-1, 1),
        }
    }

    pub fn white_of(self, b: BlackVertex) -> WhiteVertex {
        let (dx, dn) = self.offset();
        WhiteVertex::new(b.x + dx, b.n + dn)
    }

    /// Type of the edge joining `w` and `b`, if they are adjacent.
    pub fn between(w: WhiteVertex, b: BlackVertex) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.white_of(b) == w)
    }
}

/// The three white neighbours of `v`, in the order type I, III, II.
pub fn black_to_whites(v: BlackVertex) -> [WhiteVertex; 3] {
    LozengeType::ALL.map(|t| t.white_of(v))
}

/// Initial position of particle `(k, m)` in the fully packed configuration.
pub fn packed_position(k: i64, m: i64) -> Result<i64> {
    if k < 1 || k > m {
        return Err(Error::InvalidLabel {
            k,
            m,
            depth: m.max(0) as usize,
        });
    }
    Ok(k - m - 1)
}

/// Interlacing triangular array: level `m` holds `x^m_1 < ... < x^m_m`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawPattern", into = "RawPattern")]
pub struct GTPattern {
    levels: Vec<Vec<i64>>,
}

#[derive(Serialize, Deserialize)]
struct RawPattern {
    #[serde(rename = "N")]
    depth: usize,
    levels: Vec<Vec<i64>>,
}

impl TryFrom<RawPattern> for GTPattern {
    type Error = Error;

    fn try_from(raw: RawPattern) -> Result<Self> {
        if raw.levels.len() != raw.depth {
            return Err(Error::NotInterlacing(format!(
                "N = {} but {} levels given",
                raw.depth,
                raw.levels.len()
            )));
        }
        GTPattern::from_levels(raw.levels)
    }
}

impl From<GTPattern> for RawPattern {
    fn from(p: GTPattern) -> Self {
        RawPattern {
            depth: p.depth(),
            levels: p.levels,
        }
    }
}

impl GTPattern {
    /// Validates shape and interlacing.
    pub fn from_levels(levels: Vec<Vec<i64>>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::InvalidDepth(0));
        }
        for (i, level) in levels.iter().enumerate() {
            if level.len() != i + 1 {
                return Err(Error::NotInterlacing(format!(
                    "level {} has {} entries",
                    i + 1,
                    level.len()
                )));
            }
        }
        let p = Self { levels };
        p.check_interlacing()?;
        Ok(p)
    }

    pub fn packed(depth: usize) -> Result<Self> {
        if depth == 0 {
            return Err(Error::InvalidDepth(0));
        }
        let levels = (1..=depth as i64)
            .map(|m| (1..=m).map(|k| k - m - 1).collect())
            .collect();
        Ok(Self { levels })
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn levels(&self) -> &[Vec<i64>] {
        &self.levels
    }

    /// Particles of level `m`, left to right.
    pub fn level(&self, m: usize) -> &[i64] {
        &self.levels[m - 1]
    }

    pub fn get(&self, k: usize, m: usize) -> i64 {
        self.levels[m - 1][k - 1]
    }

    pub(crate) fn get_mut(&mut self, k: usize, m: usize) -> &mut i64 {
        &mut self.levels[m - 1][k - 1]
    }

    pub fn check_label(&self, k: i64, m: i64) -> Result<()> {
        if k < 1 || k > m || m > self.depth() as i64 {
            return Err(Error::InvalidLabel {
                k,
                m,
                depth: self.depth(),
            });
        }
        Ok(())
    }

    /// `x^m_{k-1} < x^{m-1}_{k-1} <= x^m_k` everywhere.
    pub fn check_interlacing(&self) -> Result<()> {
        for m in 2..=self.depth() {
            let (upper, lower) = (self.level(m), self.level(m - 1));
            for k in 1..m {
                if !(upper[k - 1] < lower[k - 1] && lower[k - 1] <= upper[k]) {
                    return Err(Error::NotInterlacing(format!(
                        "x^{m}_{k} = {}, x^{}_{k} = {}, x^{m}_{} = {}",
                        upper[k - 1],
                        m - 1,
                        lower[k - 1],
                        k + 1,
                        upper[k]
                    )));
                }
            }
        }
        Ok(())
    }

    /// Occupation variable: is there a level-`n` particle at `x`?
    pub fn occupied(&self, x: i64, n: i64) -> bool {
        n >= 1 && n as usize <= self.depth() && self.level(n as usize).binary_search(&x).is_ok()
    }
}

/// Axis-aligned rectangle of black positions, bounds inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub x_min: i64,
    pub x_max: i64,
    pub n_min: i64,
    pub n_max: i64,
}

impl Window {
    pub fn new(x_min: i64, x_max: i64, n_min: i64, n_max: i64) -> Self {
        Self {
            x_min,
            x_max,
            n_min,
            n_max,
        }
    }

    pub fn positions(&self) -> impl Iterator<Item = BlackVertex> + '_ {
        (self.n_min..=self.n_max)
            .flat_map(move |n| (self.x_min..=self.x_max).map(move |x| BlackVertex::new(x, n)))
    }
}

/// Lozenge tiling of `window` determined by `p`.
///
/// Row `n` needs the particles of levels `n` and `n + 1`, so the tiled rows
/// are `0..=N-1` (level 0 is empty). In each row the blacks without a
/// particle and the whites `(u, n+1)` not covered by a level `n+1` particle
/// alternate along a path and are matched in consecutive pairs.
pub fn pattern_to_lozenges(
    p: &GTPattern,
    window: &Window,
) -> Result<BTreeMap<BlackVertex, LozengeType>> {
    let max_row = p.depth() as i64 - 1;
    if window.n_min < 0
        || window.n_max > max_row
        || window.n_min > window.n_max
        || window.x_min > window.x_max
    {
        return Err(Error::WindowOutsideRegion {
            n_min: window.n_min,
            n_max: window.n_max,
            max_row,
        });
    }
    let mut out = BTreeMap::new();
    for n in window.n_min..=window.n_max {
        let blacks: &[i64] = if n == 0 { &[] } else { p.level(n as usize) };
        let whites = p.level(n as usize + 1);
        // Path coordinate: black y -> 2y, white (u, n+1) -> 2u+1.
        let mut removed: Vec<i64> = blacks
            .iter()
            .map(|y| 2 * y)
            .chain(whites.iter().map(|u| 2 * u + 1))
            .collect();
        removed.sort_unstable();
        for x in window.x_min..=window.x_max {
            let t = if blacks.binary_search(&x).is_ok() {
                LozengeType::I
            } else {
                row_lozenge(&removed, 2 * x).ok_or_else(|| {
                    Error::NotInterlacing(format!("row {n} cannot be tiled at x = {x}"))
                })?
            };
            out.insert(BlackVertex::new(x, n), t);
        }
    }
    Ok(out)
}

fn row_lozenge(removed: &[i64], pos: i64) -> Option<LozengeType> {
    let i = removed.partition_point(|&r| r < pos);
    let pair_right = if i > 0 {
        let start = removed[i - 1] + 1;
        if let Some(&end) = removed.get(i) {
            if (end - start) % 2 != 0 {
                return None;
            }
        }
        (pos - start) % 2 == 0
    } else {
        let end = *removed.get(i)? - 1;
        (end - pos) % 2 != 0
    };
    Some(if pair_right {
        LozengeType::III
    } else {
        LozengeType::II
    })
}
