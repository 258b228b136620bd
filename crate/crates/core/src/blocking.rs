//! Dyadic big-block/small-block partition of [2^k, 2^{k+1}) and the moment
//! bound check for sums of conditional block expectations.
//!
//! Level k uses p_k = ⌊2^{αk}⌋, q_k = ⌊2^{βk}⌋, r_k = ⌊2^k/(p_k+q_k)⌋ and lays
//! out 𝕀(1), 𝕁(1), …, 𝕀(r_k), 𝕁(r_k), 𝕁(r_k+1), where
//! 𝕀(m) = [2^k + (m−1)(p_k+q_k), 2^k + (m−1)q_k + m·p_k) and the last small
//! block takes whatever remains of the level.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::processes::ProcessModel;
use crate::rng::replicate_seed;
use crate::stats::pairwise_sum;

/// Largest level for which 2^{k+1} still fits in a u64.
pub const MAX_LEVEL: u32 = 62;

/// Half-open index interval [start, end).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BlockInterval {
    pub start: u64,
    pub end: u64,
}

impl BlockInterval {
    pub fn len(&self) -> u64 {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }

    pub fn indices(&self) -> std::ops::Range<u64> {
        self.start..self.end
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockPartition {
    pub k: u32,
    pub alpha: f64,
    pub beta: f64,
    pub p_k: u64,
    pub q_k: u64,
    pub r_k: u64,
    pub big_blocks: Vec<BlockInterval>,
    /// r_k blocks of length q_k followed by the tail block.
    pub small_blocks: Vec<BlockInterval>,
    /// Smallest k₀ with r_j ∈ [½, 2]·2^{(1−α)j} for every j in k₀..=MAX_LEVEL.
    pub bracket_from_k: Option<u32>,
}

fn floor_pow2(exponent: f64) -> u64 {
    // the nudge keeps exact powers like 2^{0.5·4} from flooring to 3
    (exponent.exp2() + 1e-9).floor() as u64
}

/// (p_k, q_k, r_k) without building the blocks.
pub fn block_sizes(k: u32, alpha: f64, beta: f64) -> (u64, u64, u64) {
    let p = floor_pow2(alpha * k as f64);
    let q = floor_pow2(beta * k as f64);
    (p, q, (1u64 << k) / (p + q))
}

fn r_in_bracket(k: u32, alpha: f64, r: u64) -> bool {
    let target = ((1.0 - alpha) * k as f64).exp2();
    let r = r as f64;
    0.5 * target <= r && r <= 2.0 * target
}

fn bracket_start(alpha: f64, beta: f64) -> Option<u32> {
    let mut k0 = None;
    for j in (1..=MAX_LEVEL).rev() {
        let (_, _, r) = block_sizes(j, alpha, beta);
        if r_in_bracket(j, alpha, r) {
            k0 = Some(j);
        } else {
            break;
        }
    }
    k0
}

pub fn build_partition(k: u32, alpha: f64, beta: f64) -> Result<BlockPartition> {
    if !(alpha.is_finite() && beta.is_finite() && 0.0 < beta && beta < alpha && alpha < 1.0) {
        return Err(Error::invalid(format!(
            "partition requires 0 < beta < alpha < 1, got alpha = {alpha}, beta = {beta}"
        )));
    }
    if k == 0 || k > MAX_LEVEL {
        return Err(Error::invalid(format!("level k must lie in 1..={MAX_LEVEL}, got {k}")));
    }
    let (p, q, r) = block_sizes(k, alpha, beta);
    let level = 1u64 << k;
    if p + q >= level {
        return Err(Error::invalid(format!(
            "k = {k} is too small for nonempty blocks: p_k + q_k = {} must be below 2^k = {level}",
            p + q
        )));
    }
    let r_usize = r as usize;
    let mut big = Vec::with_capacity(r_usize);
    let mut small = Vec::with_capacity(r_usize + 1);
    for m in 0..r {
        let start = level + m * (p + q);
        big.push(BlockInterval { start, end: start + p });
        small.push(BlockInterval {
            start: start + p,
            end: start + p + q,
        });
    }
    small.push(BlockInterval {
        start: level + r * (p + q),
        end: 2 * level,
    });
    Ok(BlockPartition {
        k,
        alpha,
        beta,
        p_k: p,
        q_k: q,
        r_k: r,
        big_blocks: big,
        small_blocks: small,
        bracket_from_k: bracket_start(alpha, beta),
    })
}

impl BlockPartition {
    pub fn level_start(&self) -> u64 {
        1u64 << self.k
    }

    pub fn level_end(&self) -> u64 {
        1u64 << (self.k + 1)
    }

    pub fn tail(&self) -> BlockInterval {
        *self.small_blocks.last().expect("partition always has a tail block")
    }

    pub fn r_in_bracket(&self) -> bool {
        r_in_bracket(self.k, self.alpha, self.r_k)
    }

    /// Blocks in layout order, tagged "big", "small" or "tail", with 1-based m.
    pub fn ordered_blocks(&self) -> Vec<(&'static str, u64, BlockInterval)> {
        let mut out = Vec::with_capacity(self.big_blocks.len() + self.small_blocks.len());
        for (m, (b, s)) in self.big_blocks.iter().zip(&self.small_blocks).enumerate() {
            out.push(("big", m as u64 + 1, *b));
            out.push(("small", m as u64 + 1, *s));
        }
        out.push(("tail", self.r_k + 1, self.tail()));
        out
    }

    /// CSV `block_type,m,start,end` with half-open [start, end).
    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "block_type,m,start,end")?;
        for (kind, m, b) in self.ordered_blocks() {
            writeln!(w, "{kind},{m},{},{}", b.start, b.end)?;
        }
        Ok(())
    }

    fn require_len(&self, len: usize) -> Result<()> {
        if (len as u64) < self.level_end() {
            return Err(Error::invalid(format!(
                "path of length {len} is too short for level {}, need {}",
                self.k,
                self.level_end()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockSums {
    pub xi: Vec<f64>,
    pub eta: Vec<f64>,
}

fn sum_over(values: &[f64], b: &BlockInterval, transform: &impl Fn(f64) -> f64) -> f64 {
    values[b.start as usize..b.end as usize]
        .iter()
        .map(|&x| transform(x))
        .sum()
}

/// ξ(m) = Σ_{i∈𝕀(m)} g(X_i) and η(m) = Σ_{i∈𝕁(m)} g(X_i). `values[i]` is X_i.
pub fn block_sums(values: &[f64], partition: &BlockPartition, transform: impl Fn(f64) -> f64) -> Result<BlockSums> {
    partition.require_len(values.len())?;
    Ok(BlockSums {
        xi: partition
            .big_blocks
            .iter()
            .map(|b| sum_over(values, b, &transform))
            .collect(),
        eta: partition
            .small_blocks
            .iter()
            .map(|b| sum_over(values, b, &transform))
            .collect(),
    })
}

/// Linear interpolation through `seq` at nodes 0, 1, 2, …; clamped at both ends.
pub fn interpolate_sequence(seq: &[f64], x: f64) -> f64 {
    if x <= 0.0 {
        return seq[0];
    }
    let j = x.floor() as usize;
    if j + 1 >= seq.len() {
        return seq[seq.len() - 1];
    }
    seq[j] + (x - j as f64) * (seq[j + 1] - seq[j])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentBoundCheck {
    pub k: u32,
    pub p: u32,
    pub p_k: u64,
    pub q_k: u64,
    pub r_k: u64,
    pub replicates: usize,
    /// MC mean of |G|^p.
    pub lhs_estimate: f64,
    pub lhs_stderr: f64,
    /// MC estimates of E ξ² and E|ξ|^p (pooled over blocks).
    pub xi_l2_sq: f64,
    pub xi_lp_p: f64,
    pub rhs_bound_shape: f64,
    pub ratio: f64,
}

/// Index whose value the m-th conditional expectation is taken on: the last
/// index of the preceding big block, t = start(𝕀(m)) − q_k − 1.
pub fn conditioning_index(partition: &BlockPartition, m: usize) -> u64 {
    partition.big_blocks[m].start - partition.q_k - 1
}

/// Monte Carlo check of
/// E|G|^p ≲ (log 2r)^p [ (Σ_m ρ²(q(m/2))‖ξ‖₂²)^{p/2} + Σ_m ρ^{2/(p−1)}(q(m/2))‖ξ‖_p^p ]
/// at one level, with G = Σ_{m=1}^{r_k} E(ξ_m | X_t) and t as in
/// [`conditioning_index`]. Conditional means use the Markov closed form.
/// The ratio is 0 when the left side vanishes identically.
pub fn moment_bound_check(
    model: &ProcessModel,
    p: u32,
    k: u32,
    alpha: f64,
    beta: f64,
    replicates: usize,
    base_seed: u64,
) -> Result<MomentBoundCheck> {
    if !model.is_markov() {
        return Err(Error::gate(format!(
            "moment bound check needs a Markov model (iid or ar1), got {}",
            model.family_name()
        )));
    }
    if p < 2 || !p.is_multiple_of(2) {
        return Err(Error::invalid(format!("moment order p must be even and >= 2, got {p}")));
    }
    if replicates < 2 {
        return Err(Error::invalid("moment bound check needs at least 2 replicates"));
    }
    let part = build_partition(k, alpha, beta)?;
    let len = part.level_end() as usize;
    let r = part.r_k as usize;
    let pf = p as i32;

    // E(ξ_m | X_t) = X_t · Σ_{i∈𝕀(m)} E(X_i | X_t)/X_t; the factor is the same for every m.
    let mut weight = 0.0;
    for i in part.big_blocks[0].indices() {
        weight += model.conditional_mean(1.0, i - conditioning_index(&part, 0))?;
    }

    let per_rep: Vec<(f64, f64, f64)> = (0..replicates as u64)
        .into_par_iter()
        .map(|rep| -> Result<(f64, f64, f64)> {
            let path = model.generate_path(len, replicate_seed(base_seed, rep))?;
            let x = path.values();
            let sums = block_sums(x, &part, |v| v)?;
            let terms: Vec<f64> = (0..r)
                .map(|m| weight * x[conditioning_index(&part, m) as usize])
                .collect();
            let g = pairwise_sum(&terms);
            let sq: Vec<f64> = sums.xi.iter().map(|v| v * v).collect();
            let pw: Vec<f64> = sums.xi.iter().map(|v| v.abs().powi(pf)).collect();
            Ok((
                g.abs().powi(pf),
                pairwise_sum(&sq) / r as f64,
                pairwise_sum(&pw) / r as f64,
            ))
        })
        .collect::<Result<_>>()?;

    let nrep = replicates as f64;
    let gpow: Vec<f64> = per_rep.iter().map(|t| t.0).collect();
    let lhs = pairwise_sum(&gpow) / nrep;
    let lhs_var = gpow.iter().map(|v| (v - lhs).powi(2)).sum::<f64>() / (nrep - 1.0);
    let xi2 = pairwise_sum(&per_rep.iter().map(|t| t.1).collect::<Vec<_>>()) / nrep;
    let xip = pairwise_sum(&per_rep.iter().map(|t| t.2).collect::<Vec<_>>()) / nrep;

    // walk the small-block lengths with index 0 = q_k
    let mut lengths = vec![part.q_k as f64];
    lengths.extend(part.small_blocks.iter().map(|b| b.len() as f64));
    let mut s2 = 0.0;
    let mut sp = 0.0;
    for m in 1..=r {
        let lag = (interpolate_sequence(&lengths, m as f64 / 2.0).floor() as u64).max(1);
        let rho = model.rho_mixing_coefficient(lag)?;
        s2 += rho * rho * xi2;
        sp += rho.powf(2.0 / (p as f64 - 1.0)) * xip;
    }
    let log_term = (2.0 * r as f64).max(std::f64::consts::E).ln().powi(pf);
    let rhs = log_term * (s2.powf(p as f64 / 2.0) + sp);
    let ratio = if lhs == 0.0 { 0.0 } else { lhs / rhs };

    Ok(MomentBoundCheck {
        k,
        p,
        p_k: part.p_k,
        q_k: part.q_k,
        r_k: part.r_k,
        replicates,
        lhs_estimate: lhs,
        lhs_stderr: (lhs_var / nrep).sqrt(),
        xi_l2_sq: xi2,
        xi_lp_p: xip,
        rhs_bound_shape: rhs,
        ratio,
    })
}
