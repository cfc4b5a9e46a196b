//! Continuous-time blocking/pushing dynamics on interlacing patterns.
//!
//! Every particle carries a rate one clock. The chain is sampled in
//! uniformized form: waiting times are exponential with the total rate
//! `N(N+1)/2` and the ringing label is uniform.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::GTPattern;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub depth: usize,
    pub t_end: f64,
    pub seed: u64,
    pub replicas: usize,
}

impl SimConfig {
    pub fn new(depth: usize, t_end: f64, seed: u64, replicas: usize) -> Result<Self> {
        let cfg = Self {
            depth,
            t_end,
            seed,
            replicas,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.depth == 0 {
            return Err(Error::InvalidDepth(0));
        }
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "t_end must be finite and >= 0, got {}",
                self.t_end
            )));
        }
        if self.replicas == 0 {
            return Err(Error::InvalidConfig("replicas must be >= 1".into()));
        }
        Ok(())
    }
}

/// One clock ring. `chain_length` 0 marks a blocked attempt.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub time: f64,
    pub k: usize,
    pub m: usize,
    pub chain_length: usize,
}

pub type EventLog = Vec<Event>;

pub fn init_packed(depth: usize) -> Result<GTPattern> {
    GTPattern::packed(depth)
}

/// Applies the ring of particle `(k, m)` and returns the new pattern with the
/// number of particles that moved.
pub fn attempt_jump(p: &GTPattern, k: usize, m: usize) -> Result<(GTPattern, usize)> {
    p.check_label(k as i64, m as i64)?;
    let mut next = p.clone();
    let c = jump_in_place(&mut next, k, m);
    Ok((next, c))
}

/// In-place form of [`attempt_jump`]; the label must be valid.
pub fn jump_in_place(p: &mut GTPattern, k: usize, m: usize) -> usize {
    let x = p.get(k, m);
    if k < m && x == p.get(k, m - 1) - 1 {
        return 0;
    }
    let mut c = 1;
    while m + c <= p.depth() && p.get(k + c, m + c) == x {
        c += 1;
    }
    for i in 0..c {
        *p.get_mut(k + i, m + i) += 1;
    }
    c
}

// Seed mixing so that neighbouring replica indices give unrelated streams.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn replica_rng(seed: u64, replica: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(replica)))
}

fn label_of(index: usize) -> (usize, usize) {
    // index enumerates (1,1), (1,2), (2,2), (1,3), ...
    let mut m = 1;
    let mut rest = index;
    while rest >= m {
        rest -= m;
        m += 1;
    }
    (rest + 1, m)
}

fn evolve(
    depth: usize,
    t_end: f64,
    rng: &mut impl Rng,
    mut log: Option<&mut EventLog>,
) -> GTPattern {
    let mut p = GTPattern::packed(depth).expect("depth validated");
    let labels = depth * (depth + 1) / 2;
    let rate = labels as f64;
    let mut t = 0.0;
    loop {
        let wait: f64 = rng.sample(Exp1);
        t += wait / rate;
        if t > t_end {
            return p;
        }
        let (k, m) = label_of(rng.random_range(0..labels));
        let c = jump_in_place(&mut p, k, m);
        if let Some(log) = log.as_deref_mut() {
            log.push(Event {
                time: t,
                k,
                m,
                chain_length: c,
            });
        }
    }
}

/// Runs replica 0 of `cfg` from the packed state to `t_end`.
pub fn simulate(cfg: &SimConfig) -> Result<(GTPattern, EventLog)> {
    simulate_replica(cfg, 0)
}

pub fn simulate_replica(cfg: &SimConfig, replica: u64) -> Result<(GTPattern, EventLog)> {
    cfg.validate()?;
    let mut log = EventLog::new();
    let p = evolve(
        cfg.depth,
        cfg.t_end,
        &mut replica_rng(cfg.seed, replica),
        Some(&mut log),
    );
    Ok((p, log))
}

/// States of replica 0 at the given increasing times.
pub fn snapshots(cfg: &SimConfig, times: &[f64]) -> Result<Vec<GTPattern>> {
    let (_, log) = simulate(cfg)?;
    let mut p = GTPattern::packed(cfg.depth)?;
    let mut events = log.iter().peekable();
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        while let Some(e) = events.next_if(|e| e.time <= t) {
            jump_in_place(&mut p, e.k, e.m);
        }
        out.push(p.clone());
    }
    Ok(out)
}

/// Writes one pattern per line as JSON.
pub fn write_jsonl<W: Write>(mut w: W, patterns: &[GTPattern]) -> std::io::Result<()> {
    for p in patterns {
        serde_json::to_writer(&mut w, p)?;
        writeln!(w)?;
    }
    Ok(())
}

/// Number of level-`n` particles strictly to the right of `x`.
pub fn height(p: &GTPattern, x: i64, n: i64) -> Result<i64> {
    if n < 1 || n as usize > p.depth() {
        return Err(Error::LevelOutOfRange {
            n,
            depth: p.depth(),
        });
    }
    let level = p.level(n as usize);
    Ok((level.len() - level.partition_point(|&y| y <= x)) as i64)
}

/// Instantaneous rate at which `height(x, n)` increases in state `p`.
pub fn growth_observable(p: &GTPattern, x: i64, n: i64) -> u32 {
    let mut total = 0;
    let mut column = true;
    for l in 1..=n {
        column &= p.occupied(x, n - l + 1);
        if !column {
            break;
        }
        if l == n || !p.occupied(x + 1, n - l) {
            total += 1;
        }
    }
    total
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub replicas: usize,
}

/// Monte Carlo estimate of the growth rate at `(x, n)` and time `t` over
/// `cfg.replicas` independent runs. Replicas run in parallel; the reduction
/// is ordered by replica index.
pub fn mc_speed(x: i64, n: i64, t: f64, cfg: &SimConfig) -> Result<McEstimate> {
    let cfg = SimConfig { t_end: t, ..*cfg };
    cfg.validate()?;
    if n < 1 || n as usize > cfg.depth {
        return Err(Error::LevelOutOfRange {
            n,
            depth: cfg.depth,
        });
    }
    let samples: Vec<u32> = (0..cfg.replicas as u64)
        .into_par_iter()
        .map(|i| {
            let p = evolve(cfg.depth, t, &mut replica_rng(cfg.seed, i), None);
            growth_observable(&p, x, n)
        })
        .collect();
    let r = samples.len() as f64;
    let mean = samples.iter().map(|&s| f64::from(s)).sum::<f64>() / r;
    let stderr = if samples.len() > 1 {
        let var = samples
            .iter()
            .map(|&s| (f64::from(s) - mean).powi(2))
            .sum::<f64>()
            / (r - 1.0);
        (var / r).sqrt()
    } else {
        0.0
    };
    Ok(McEstimate {
        estimate: mean,
        stderr,
        replicas: samples.len(),
    })
}
