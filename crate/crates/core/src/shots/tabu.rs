use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Real;
use crate::rng;
use crate::textsim::EmbeddingVector;

/// Symmetric, nonnegative, zero-diagonal pairwise distances.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceMatrix<F> {
    n: usize,
    d: Vec<F>,
}

impl<F: Real> DistanceMatrix<F> {
    /// Row-major `n * n` values; validated.
    pub fn new(n: usize, values: Vec<F>) -> Result<Self> {
        if values.len() != n * n {
            return Err(Error::DimensionMismatch { left: values.len(), right: n * n });
        }
        for i in 0..n {
            if values[i * n + i] != F::zero() {
                return Err(Error::Config(format!("distance diagonal at {i} is not zero")));
            }
            for j in (i + 1)..n {
                let (a, b) = (values[i * n + j], values[j * n + i]);
                if !a.is_finite() || a < F::zero() || a != b {
                    return Err(Error::Config(format!("distance ({i}, {j}) is not symmetric, finite, and nonnegative")));
                }
            }
        }
        Ok(DistanceMatrix { n, d: values })
    }

    /// Builds from the upper triangle: `f(i, j)` is called for `i < j`.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> F) -> Result<Self> {
        let mut d = vec![F::zero(); n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let v = f(i, j);
                d[i * n + j] = v;
                d[j * n + i] = v;
            }
        }
        Self::new(n, d)
    }

    /// `1 - cosine`, floored at zero.
    pub fn cosine_distances(vectors: &[EmbeddingVector<F>]) -> Result<Self> {
        let unit: Vec<EmbeddingVector<F>> = vectors.iter().map(|v| v.normalized()).collect();
        let mut err = None;
        let m = Self::from_fn(unit.len(), |i, j| match unit[i].cosine(&unit[j]) {
            Ok(c) => (F::one() - c).max(F::zero()),
            Err(e) => {
                err.get_or_insert(e);
                F::zero()
            }
        })?;
        match err {
            Some(e) => Err(e),
            None => Ok(m),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> F {
        self.d[i * self.n + j]
    }

    pub fn scaled(&self, alpha: F) -> Self {
        DistanceMatrix { n: self.n, d: self.d.iter().map(|&v| v * alpha).collect() }
    }

    /// Sum of pairwise distances within `subset`.
    pub fn subset_sum(&self, subset: &[usize]) -> F {
        let mut total = F::zero();
        for (a, &i) in subset.iter().enumerate() {
            for &j in &subset[a + 1..] {
                total = total + self.get(i, j);
            }
        }
        total
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Objective {
    Maximize,
    Minimize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TabuParams {
    /// Iterations a dropped element may not be re-added.
    pub tenure: usize,
    pub max_iters: usize,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for TabuParams {
    fn default() -> Self {
        TabuParams { tenure: 7, max_iters: 500, restarts: 3, seed: 0 }
    }
}

impl TabuParams {
    fn validate(&self) -> Result<()> {
        if self.tenure == 0 || self.max_iters == 0 {
            return Err(Error::Config("tabu tenure and max_iters must be at least 1".into()));
        }
        Ok(())
    }
}

struct Search<'a, F> {
    dist: &'a DistanceMatrix<F>,
    sign: F,
}

impl<F: Real> Search<'_, F> {
    #[inline]
    fn gain(&self, i: usize, j: usize) -> F {
        self.sign * self.dist.get(i, j)
    }

    /// Greedy construction from `first`; returns membership, contributions, value.
    fn construct(&self, first: usize, k: usize) -> (Vec<bool>, Vec<F>, F) {
        let n = self.dist.n();
        let mut member = vec![false; n];
        let mut contrib = vec![F::zero(); n];
        let mut value = F::zero();
        let add = |x: usize, member: &mut Vec<bool>, contrib: &mut Vec<F>| {
            member[x] = true;
            for (y, c) in contrib.iter_mut().enumerate() {
                *c = *c + self.gain(x, y);
            }
        };
        add(first, &mut member, &mut contrib);
        for _ in 1..k {
            let mut best: Option<usize> = None;
            for x in (0..n).filter(|&x| !member[x]) {
                if best.is_none_or(|b| contrib[x] > contrib[b]) {
                    best = Some(x);
                }
            }
            let x = best.expect("k <= n leaves a candidate");
            value = value + contrib[x];
            add(x, &mut member, &mut contrib);
        }
        (member, contrib, value)
    }

    /// Drop-add tabu search from a constructed start. Returns the best
    /// incumbent (sorted indices) and its signed value.
    fn improve(&self, start: (Vec<bool>, Vec<F>, F), params: &TabuParams) -> (Vec<usize>, F) {
        let n = self.dist.n();
        let (mut member, mut contrib, mut value) = start;
        let members = |m: &[bool]| (0..n).filter(|&i| m[i]).collect::<Vec<_>>();
        let mut best_set = members(&member);
        let mut best_value = value;
        let mut tabu_until = vec![0usize; n];

        for iter in 1..=params.max_iters {
            let inside = members(&member);
            let mut chosen: Option<(usize, usize, F)> = None;
            for &i in &inside {
                for j in (0..n).filter(|&j| !member[j]) {
                    let delta = contrib[j] - contrib[i] - self.gain(i, j);
                    let tabu = tabu_until[j] > iter;
                    if tabu && value + delta <= best_value {
                        continue;
                    }
                    if chosen.is_none_or(|(_, _, d)| delta > d) {
                        chosen = Some((i, j, delta));
                    }
                }
            }
            let Some((out, inn, delta)) = chosen else { break };
            member[out] = false;
            member[inn] = true;
            for (y, c) in contrib.iter_mut().enumerate() {
                *c = *c + self.gain(inn, y) - self.gain(out, y);
            }
            value = value + delta;
            tabu_until[out] = iter + params.tenure;
            if value > best_value {
                best_value = value;
                best_set = members(&member);
            }
        }
        (best_set, best_value)
    }
}

/// Pure greedy construction (first element index 0), for comparison.
pub fn greedy_maxsum<F: Real>(dist: &DistanceMatrix<F>, k: usize, objective: Objective) -> Result<Vec<usize>> {
    check_k(dist, k)?;
    if k == 0 {
        return Ok(Vec::new());
    }
    let search = Search { dist, sign: sign_of(objective) };
    let (member, _, _) = search.construct(0, k);
    Ok((0..dist.n()).filter(|&i| member[i]).collect())
}

fn sign_of<F: Real>(objective: Objective) -> F {
    match objective {
        Objective::Maximize => F::one(),
        Objective::Minimize => -F::one(),
    }
}

fn check_k<F: Real>(dist: &DistanceMatrix<F>, k: usize) -> Result<()> {
    if k > dist.n() {
        return Err(Error::PoolTooSmall { needed: k, available: dist.n() });
    }
    Ok(())
}

/// Size-`k` subset optimizing the sum of intra-subset distances.
///
/// Restart 0 starts from pure greedy construction; every further restart
/// builds greedily from a seeded random first element. Each start is improved
/// by best-admissible drop-add swaps, where re-adding a recently dropped
/// element is tabu unless it would beat the incumbent. Restarts run in
/// parallel and the best result wins, earlier restarts winning ties.
/// The returned indices are sorted.
pub fn tabu_maxsum<F: Real>(
    dist: &DistanceMatrix<F>,
    k: usize,
    objective: Objective,
    params: &TabuParams,
) -> Result<Vec<usize>> {
    params.validate()?;
    check_k(dist, k)?;
    let n = dist.n();
    if k == 0 {
        return Ok(Vec::new());
    }
    if k == n {
        return Ok((0..n).collect());
    }
    let search = Search { dist, sign: sign_of(objective) };
    let restarts = params.restarts.max(1);
    let results: Vec<(Vec<usize>, F)> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let first = if r == 0 {
                0
            } else {
                let s = rng::derive_seed(params.seed, &["tabu-restart", &r.to_string()]);
                (s % n as u64) as usize
            };
            search.improve(search.construct(first, k), params)
        })
        .collect();
    let mut best = &results[0];
    for candidate in &results[1..] {
        if candidate.1 > best.1 {
            best = candidate;
        }
    }
    Ok(best.0.clone())
}
