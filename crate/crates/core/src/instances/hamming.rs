//! The Hamming hard instance: the string `R` built from a vector multiset,
//! the fixed operand `F` carrying copies of `R`, the round-based population
//! of `2r`-length strings `U'`, the family `U_R` of strings with pairwise
//! distinct Hamming arrays, and streams drawn from it.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::codes::{check_cyclic_code, search_cyclic_code};
use super::vectors::{search_vector_multiset, VectorMultiset};
use crate::error::{Error, Result};
use crate::modular::is_power_of_two;
use crate::rng::substream;
use crate::symbols::{diamond, star, Role, Symbol, SymbolString};

/// `R = rho_0 ... rho_{mu^2-1}` with `rho_i[j] = i` where `v_i[j] = 1` and
/// STAR elsewhere; blocks past the multiset are all STAR.
pub fn build_r(v: &VectorMultiset, q: u64) -> Result<SymbolString> {
    let mu = v.mu;
    let needed = (mu * mu) as u64 + 2;
    if q < needed {
        return Err(Error::InvalidParam(format!(
            "alphabet of {q} symbols is below mu^2 + 2 = {needed}"
        )));
    }
    let mut data = vec![star(q); mu * mu * mu];
    for (i, vec) in v.vectors.iter().enumerate() {
        for (j, &bit) in vec.iter().enumerate() {
            if bit == 1 {
                data[i * mu + j] = i as Symbol;
            }
        }
    }
    SymbolString::new(q, Role::Fixed, data)
}

/// Start positions of the copies of `R` in `F`: `n - 1 - i` for every
/// power of two `i` with `r <= i <= n - 1`, largest start first.
pub fn copy_starts(n: usize, r: usize) -> Vec<usize> {
    let mut starts = Vec::new();
    let mut i = r.next_power_of_two().max(1);
    while i < n {
        starts.push(n - 1 - i);
        i *= 2;
    }
    starts
}

/// STAR everywhere except the copies of `R`.
pub fn build_hamming_f(r_string: &SymbolString, n: usize) -> Result<SymbolString> {
    let r = r_string.len();
    if r == 0 || n < r * r {
        return Err(Error::InvalidParam(format!(
            "n = {n} is below r^2 = {}",
            r * r
        )));
    }
    let q = r_string.q();
    let mut data = vec![star(q); n];
    for s in copy_starts(n, r) {
        data[s..s + r].copy_from_slice(r_string.as_slice());
    }
    SymbolString::new(q, Role::Fixed, data)
}

/// `HamArray(R, U')[i] = Ham(R, U'[i..i+r])` for `i` in `0..=r`.
pub fn hamarray(r_string: &[Symbol], uprime: &[Symbol]) -> Result<Vec<u64>> {
    let r = r_string.len();
    if uprime.len() != 2 * r {
        return Err(Error::InvalidParam(format!(
            "U' must have length 2r = {}, got {}",
            2 * r,
            uprime.len()
        )));
    }
    Ok((0..=r)
        .map(|i| {
            r_string
                .iter()
                .zip(&uprime[i..i + r])
                .filter(|(a, b)| a != b)
                .count() as u64
        })
        .collect())
}

/// Rounds per phase before the single-step slide.
pub fn default_rounds_per_phase(mu: usize) -> usize {
    ((mu - 1) / 64).max(1)
}

/// Alignment of `R` against `U'` at the start of round `j`.
pub fn round_offset(mu: usize, rounds_per_phase: usize, j: usize) -> usize {
    let phase = j / rounds_per_phase;
    let within = j % rounds_per_phase;
    phase * (rounds_per_phase * mu + 1) + within * mu
}

/// Position in `U'` that symbol `i` takes in a round starting at `offset`:
/// just past `rho_i` in that alignment.
pub fn symbol_position(mu: usize, offset: usize, i: usize) -> usize {
    offset + i * mu + mu
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: usize,
    pub offset: usize,
    /// Chosen vector indices; empty when the round is skipped.
    pub choice: Vec<usize>,
    /// Indices whose position was already occupied when the round began.
    pub blocked: Vec<usize>,
    pub sum: Vec<u8>,
}

impl RoundRecord {
    /// `(k, HamArray[offset + k])` the round must produce, `k = 1..=mu`.
    /// Alignment `offset + k` lines each placed symbol up with component
    /// `mu - k` of its vector, so the window reads the sum in reverse.
    pub fn expected_window(&self, r: usize) -> Vec<(usize, u64)> {
        let mu = self.sum.len();
        (1..=mu)
            .map(|k| (self.offset + k, (r - self.sum[mu - k] as usize) as u64))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Populated {
    pub uprime: SymbolString,
    pub rounds_per_phase: usize,
    pub rounds: Vec<RoundRecord>,
    /// Smallest number of unblocked vectors seen at the start of a round.
    pub min_available: usize,
}

impl Populated {
    /// Expected value at every HamArray offset: the round windows, and `r`
    /// everywhere else.
    pub fn expected_hamarray(&self, r: usize) -> Vec<u64> {
        let mut out = vec![r as u64; r + 1];
        for rec in &self.rounds {
            for (k, value) in rec.expected_window(r) {
                out[k] = value;
            }
        }
        out
    }
}

/// Indices whose position is occupied at the start of round `j`.
pub fn blocked_indices(
    uprime: &[Symbol],
    q: u64,
    mu: usize,
    rounds_per_phase: usize,
    j: usize,
) -> Vec<usize> {
    let offset = round_offset(mu, rounds_per_phase, j);
    (0..mu * (mu - 1))
        .filter(|&i| {
            uprime
                .get(symbol_position(mu, offset, i))
                .is_some_and(|&s| s != diamond(q))
        })
        .collect()
}

/// Fills `U'` round by round: round `j` places symbol `i` for every chosen
/// index `i`, then `R` slides `mu` steps; after every `rounds_per_phase`
/// rounds it slides one extra step, for at most `mu` phases.
pub fn populate_uprime(
    v: &VectorMultiset,
    q: u64,
    choices: &[Vec<usize>],
    rounds_per_phase: usize,
) -> Result<Populated> {
    let mu = v.mu;
    let r = mu * mu * mu;
    if q < (mu * mu) as u64 + 2 {
        return Err(Error::InvalidParam(format!(
            "alphabet of {q} symbols is below mu^2 + 2"
        )));
    }
    if rounds_per_phase == 0 || choices.len() > rounds_per_phase * mu {
        return Err(Error::InvalidParam(format!(
            "{} rounds exceed {rounds_per_phase} rounds per phase over {mu} phases",
            choices.len()
        )));
    }
    let mut uprime = vec![diamond(q); 2 * r];
    let mut rounds = Vec::with_capacity(choices.len());
    let mut min_available = v.len();
    for (j, choice) in choices.iter().enumerate() {
        if !choice.is_empty() && choice.len() != mu {
            return Err(Error::InvalidParam(format!(
                "round {j} chooses {} vectors instead of {mu}",
                choice.len()
            )));
        }
        let distinct: HashSet<usize> = choice.iter().copied().collect();
        if distinct.len() != choice.len() || choice.iter().any(|&i| i >= v.len()) {
            return Err(Error::InvalidParam(format!(
                "round {j} choice {choice:?} is not a sub-multiset"
            )));
        }
        let offset = round_offset(mu, rounds_per_phase, j);
        let blocked = blocked_indices(&uprime, q, mu, rounds_per_phase, j);
        min_available = min_available.min(v.len() - blocked.len());
        for &i in choice {
            let pos = symbol_position(mu, offset, i);
            let occupant = uprime[pos];
            if occupant != diamond(q) {
                return Err(Error::Blocked {
                    position: pos,
                    occupant,
                });
            }
            uprime[pos] = i as Symbol;
        }
        let mut sum = vec![0u8; mu];
        for &i in choice {
            for (s, &b) in sum.iter_mut().zip(&v.vectors[i]) {
                *s += b;
            }
        }
        rounds.push(RoundRecord {
            round: j,
            offset,
            choice: choice.clone(),
            blocked,
            sum,
        });
    }
    Ok(Populated {
        uprime: SymbolString::new(q, Role::Stream, uprime)?,
        rounds_per_phase,
        rounds,
        min_available,
    })
}

/// A population with every round given `mu` uniformly chosen unblocked
/// vectors, or skipped when fewer remain.
pub fn populate_random(v: &VectorMultiset, q: u64, seed: u64) -> Result<Populated> {
    let mu = v.mu;
    let rpp = default_rounds_per_phase(mu);
    let mut rng = substream(seed, "populate-random");
    let mut choices: Vec<Vec<usize>> = Vec::new();
    let mut current = populate_uprime(v, q, &choices, rpp)?;
    for j in 0..rpp * mu {
        let blocked = blocked_indices(current.uprime.as_slice(), q, mu, rpp, j);
        let free: Vec<usize> = (0..v.len()).filter(|i| !blocked.contains(i)).collect();
        let pick = if free.len() >= mu {
            let mut pick: Vec<usize> = rand::seq::index::sample(&mut rng, free.len(), mu)
                .into_iter()
                .map(|k| free[k])
                .collect();
            pick.sort_unstable();
            pick
        } else {
            Vec::new()
        };
        choices.push(pick);
        current = populate_uprime(v, q, &choices, rpp)?;
    }
    Ok(current)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Populated,
    RandomFill,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyMember {
    pub data: SymbolString,
    pub provenance: Provenance,
    pub hamarray: Vec<u64>,
}

/// Every `mu`-combination of `0..len` in lexicographic order.
fn combinations(len: usize, mu: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if mu > len {
        return out;
    }
    let mut pick: Vec<usize> = (0..mu).collect();
    loop {
        out.push(pick.clone());
        let Some(k) = (0..mu).rev().find(|&k| pick[k] < len - mu + k) else {
            return out;
        };
        pick[k] += 1;
        for j in k + 1..mu {
            pick[j] = pick[j - 1] + 1;
        }
    }
}

/// Greedy family of `2r`-length strings with pairwise distinct Hamming
/// arrays. Up to half the budget goes to populated strings (every round
/// either skipped or given a combination, enumerated in mixed-radix order),
/// the rest to uniform fills over the placed symbols and DIAMOND.
pub fn build_ur_family(
    r_string: &SymbolString,
    v: &VectorMultiset,
    budget: usize,
    seed: u64,
) -> Result<Vec<FamilyMember>> {
    let q = r_string.q();
    let mu = v.mu;
    let rpp = default_rounds_per_phase(mu);
    let total_rounds = rpp * mu;
    let mut options: Vec<Vec<usize>> = vec![Vec::new()];
    options.extend(combinations(v.len(), mu));

    let mut seen: HashSet<Vec<u64>> = HashSet::new();
    let mut family = Vec::new();
    let mut admit = |data: SymbolString,
                     provenance: Provenance,
                     family: &mut Vec<FamilyMember>|
     -> Result<()> {
        let h = hamarray(r_string.as_slice(), data.as_slice())?;
        if seen.insert(h.clone()) {
            family.push(FamilyMember {
                data,
                provenance,
                hamarray: h,
            });
        }
        Ok(())
    };

    let populated_budget = budget.div_ceil(2);
    let mut digits = vec![0usize; total_rounds];
    let mut examined = 0;
    'enumerate: while examined < populated_budget {
        examined += 1;
        let choices: Vec<Vec<usize>> = digits.iter().map(|&d| options[d].clone()).collect();
        match populate_uprime(v, q, &choices, rpp) {
            Ok(p) => admit(p.uprime, Provenance::Populated, &mut family)?,
            Err(Error::Blocked { .. }) => {}
            Err(e) => return Err(e),
        }
        for d in digits.iter_mut() {
            *d += 1;
            if *d < options.len() {
                continue 'enumerate;
            }
            *d = 0;
        }
        break;
    }

    let mut rng = substream(seed, "ur-random-fill");
    let alphabet: Vec<Symbol> = (0..v.len() as Symbol).chain([diamond(q)]).collect();
    for _ in examined..budget {
        let data = (0..2 * r_string.len())
            .map(|_| alphabet[rng.gen_range(0..alphabet.len())])
            .collect();
        admit(
            SymbolString::new(q, Role::Stream, data)?,
            Provenance::RandomFill,
            &mut family,
        )?;
    }
    Ok(family)
}

/// A stream of `n / 2r` independent uniform draws from the family.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HammingStream {
    pub stream: SymbolString,
    pub draws: Vec<usize>,
}

pub fn sample_hamming_stream(
    family: &[FamilyMember],
    n: usize,
    seed: u64,
) -> Result<HammingStream> {
    let first = family
        .first()
        .ok_or_else(|| Error::InvalidParam("empty string family".into()))?;
    let block = first.data.len();
    if block == 0 || !n.is_multiple_of(block) {
        return Err(Error::Divisibility(n, block));
    }
    let mut rng = substream(seed, "hamming-stream");
    let draws: Vec<usize> = (0..n / block)
        .map(|_| rng.gen_range(0..family.len()))
        .collect();
    let data = draws
        .iter()
        .flat_map(|&k| family[k].data.as_slice().iter().copied())
        .collect();
    Ok(HammingStream {
        stream: SymbolString::new(first.data.q(), Role::Stream, data)?,
        draws,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HammingConfig {
    pub mu: usize,
    /// Code parameter; the code search only runs when `mu - 1` is prime.
    pub gamma: usize,
    /// Defaults to `mu^2 + 2`.
    pub q: Option<u64>,
    /// Defaults to the smallest power of two that is at least `r^2`.
    pub n: Option<usize>,
    pub vector_trials: u64,
    pub family_budget: usize,
    pub code_budget: u64,
    pub seed: u64,
}

impl HammingConfig {
    pub fn new(mu: usize, seed: u64) -> Self {
        Self {
            mu,
            gamma: 1,
            q: None,
            n: None,
            vector_trials: 32,
            family_budget: 256,
            code_budget: 1_000_000,
            seed,
        }
    }
}

/// Smallest power of two `n` with `n >= r^2`; `2r` then divides `n`.
pub fn minimal_n(mu: usize) -> usize {
    let r = mu * mu * mu;
    (r * r).next_power_of_two()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HammingInstance {
    pub config: HammingConfig,
    pub q: u64,
    pub n: usize,
    pub r: usize,
    pub vectors: VectorMultiset,
    pub sum_count: usize,
    pub code_size: Option<usize>,
    pub r_string: SymbolString,
    pub f: SymbolString,
    pub family: Vec<FamilyMember>,
}

impl HammingInstance {
    pub fn build(config: HammingConfig) -> Result<Self> {
        let mu = config.mu;
        if mu < 2 {
            return Err(Error::InvalidParam(format!("mu = {mu} must be >= 2")));
        }
        let r = mu * mu * mu;
        let q = config.q.unwrap_or((mu * mu) as u64 + 2);
        let n = config.n.unwrap_or_else(|| minimal_n(mu));
        if !is_power_of_two(n as u64) {
            return Err(Error::InvalidParam(format!(
                "n = {n} is not a power of two"
            )));
        }
        if !n.is_multiple_of(2 * r) {
            return Err(Error::Divisibility(n, 2 * r));
        }
        let code_size = if mu >= 4 && crate::modular::is_prime(mu as u64 - 1) {
            let code = search_cyclic_code(mu, config.gamma, config.code_budget)?;
            Some(check_cyclic_code(&code)?.size)
        } else {
            None
        };
        let search = search_vector_multiset(mu, config.vector_trials, config.seed)?;
        let r_string = build_r(&search.multiset, q)?;
        let f = build_hamming_f(&r_string, n)?;
        let family = build_ur_family(
            &r_string,
            &search.multiset,
            config.family_budget,
            config.seed,
        )?;
        Ok(Self {
            config,
            q,
            n,
            r,
            vectors: search.multiset,
            sum_count: search.sum_count,
            code_size,
            r_string,
            f,
            family,
        })
    }

    /// HamArray to family index.
    pub fn lookup_table(&self) -> HashMap<Vec<u64>, usize> {
        self.family
            .iter()
            .enumerate()
            .map(|(k, m)| (m.hamarray.clone(), k))
            .collect()
    }

    pub fn sample_stream(&self, seed: u64) -> Result<HammingStream> {
        sample_hamming_stream(&self.family, self.n, seed)
    }

    pub fn manifest(&self) -> HammingManifest {
        let populated = self
            .family
            .iter()
            .filter(|m| m.provenance == Provenance::Populated)
            .count();
        HammingManifest {
            mu: self.config.mu,
            gamma: self.config.gamma,
            r: self.r,
            q: self.q,
            n: self.n,
            seed: self.config.seed,
            copy_starts: copy_starts(self.n, self.r),
            star_count: self
                .f
                .as_slice()
                .iter()
                .filter(|&&s| s == star(self.q))
                .count(),
            code_size: self.code_size,
            sum_count: self.sum_count,
            family_size: self.family.len(),
            family_populated: populated,
            family_random_fill: self.family.len() - populated,
        }
    }

    /// Writes `F.json`, `R.json`, `family/UR_<k>.json` and `manifest.json`.
    pub fn save_bundle(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir.join("family"))?;
        self.f.save(&dir.join("F.json"))?;
        self.r_string.save(&dir.join("R.json"))?;
        for (k, m) in self.family.iter().enumerate() {
            m.data
                .save(&dir.join("family").join(format!("UR_{k:04}.json")))?;
        }
        fs::write(
            dir.join("manifest.json"),
            serde_json::to_string_pretty(&self.manifest())?,
        )?;
        Ok(())
    }
}

/// Construction parameters and achieved metrics of a Hamming bundle.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HammingManifest {
    pub mu: usize,
    pub gamma: usize,
    pub r: usize,
    pub q: u64,
    pub n: usize,
    pub seed: u64,
    pub copy_starts: Vec<usize>,
    pub star_count: usize,
    pub code_size: Option<usize>,
    pub sum_count: usize,
    pub family_size: usize,
    pub family_populated: usize,
    pub family_random_fill: usize,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::witnesses::enumerate_sums;

    fn mu2() -> VectorMultiset {
        VectorMultiset::new(2, vec![vec![1, 0], vec![1, 1]]).unwrap()
    }

    #[test]
    fn r_from_vectors() {
        let v = VectorMultiset::new(5, {
            let mut vs = vec![vec![0u8; 5]; 20];
            vs[2] = vec![1, 0, 0, 1, 1];
            vs
        })
        .unwrap();
        let q = 27;
        let r = build_r(&v, q).unwrap();
        assert_eq!(r.len(), 125);
        let s = star(q);
        assert_eq!(&r.as_slice()[10..15], &[2, s, s, 2, 2]);
        assert!(r.as_slice()[..10].iter().all(|&x| x == s));
        assert!(r.as_slice()[100..].iter().all(|&x| x == s));
        assert!(build_r(&v, 26).is_err());
    }

    #[test]
    fn f_layout_at_minimal_n() {
        let r = build_r(&mu2(), 6).unwrap();
        assert_eq!(minimal_n(2), 64);
        let f = build_hamming_f(&r, 64).unwrap();
        assert_eq!(copy_starts(64, 8), vec![55, 47, 31]);
        for s in [55, 47, 31] {
            assert_eq!(&f.as_slice()[s..s + 8], r.as_slice());
        }
        let stars = f.as_slice().iter().filter(|&&x| x == star(6)).count();
        let stars_in_r = r.as_slice().iter().filter(|&&x| x == star(6)).count();
        assert_eq!(stars - 3 * stars_in_r, 64 - 3 * 8);
        assert!(build_hamming_f(&r, 32).is_err());
    }

    #[test]
    fn copies_never_overlap() {
        for (n, r) in [(64usize, 8usize), (1024, 27), (4096, 64), (1 << 14, 125)] {
            let starts = copy_starts(n, r);
            for w in starts.windows(2) {
                assert!(w[0] - w[1] >= r);
            }
            assert!(starts.iter().all(|&s| s + r < n));
        }
    }

    #[test]
    fn empty_population_is_all_diamond() {
        let v = mu2();
        let p = populate_uprime(&v, 6, &[], 1).unwrap();
        assert!(p.uprime.as_slice().iter().all(|&x| x == diamond(6)));
        let r = build_r(&v, 6).unwrap();
        assert_eq!(
            hamarray(r.as_slice(), p.uprime.as_slice()).unwrap(),
            vec![8; 9]
        );
    }

    #[test]
    fn one_round_window_is_r_minus_sum() {
        let v = mu2();
        let r = build_r(&v, 6).unwrap();
        let p = populate_uprime(&v, 6, &[vec![0, 1]], 1).unwrap();
        assert_eq!(p.rounds[0].sum, vec![2, 1]);
        let h = hamarray(r.as_slice(), p.uprime.as_slice()).unwrap();
        // window reads the sum reversed: [8 - 1, 8 - 2]
        assert_eq!(&h[1..3], &[7, 6]);
        assert_eq!(h, p.expected_hamarray(8));
    }

    #[test]
    fn populated_windows_match_for_small_mu() {
        for mu in [2usize, 3, 4] {
            let q = (mu * mu) as u64 + 2;
            let v = search_vector_multiset(mu, 4, mu as u64).unwrap().multiset;
            let r = build_r(&v, q).unwrap();
            let combos = combinations(v.len(), mu);
            let choices: Vec<Vec<usize>> = (0..mu)
                .map(|j| combos[(j * 7) % combos.len()].clone())
                .collect();
            let p = populate_uprime(&v, q, &choices, 1).unwrap();
            let h = hamarray(r.as_slice(), p.uprime.as_slice()).unwrap();
            assert_eq!(h, p.expected_hamarray(mu * mu * mu), "mu={mu}");
        }
    }

    #[test]
    fn random_populations_match() {
        for mu in [2usize, 3, 4] {
            let q = (mu * mu) as u64 + 2;
            let v = search_vector_multiset(mu, 4, 1).unwrap().multiset;
            let r = build_r(&v, q).unwrap();
            for seed in 0..20 {
                let p = populate_random(&v, q, seed).unwrap();
                assert_eq!(p.rounds.len(), mu);
                let h = hamarray(r.as_slice(), p.uprime.as_slice()).unwrap();
                assert_eq!(h, p.expected_hamarray(mu * mu * mu));
            }
        }
    }

    #[test]
    fn blocking_is_detected() {
        // two rounds in one phase: symbol 1 of round 1 lands where symbol 2
        // of round 0 sits
        let v = VectorMultiset::new(3, vec![vec![1, 0, 1]; 6]).unwrap();
        let q = 11;
        let p = populate_uprime(&v, q, &[vec![0, 2, 3]], 2).unwrap();
        assert_eq!(blocked_indices(p.uprime.as_slice(), q, 3, 2, 1), vec![1, 2]);
        assert!(matches!(
            populate_uprime(&v, q, &[vec![0, 2, 3], vec![1, 4, 5]], 2),
            Err(Error::Blocked { occupant: 2, .. })
        ));
        let ok = populate_uprime(&v, q, &[vec![0, 2, 3], vec![0, 4, 5]], 2).unwrap();
        assert_eq!(ok.rounds[1].blocked, vec![1, 2]);
        assert_eq!(ok.min_available, 4);
    }

    #[test]
    fn family_is_distinct_and_covers_sums() {
        let v = mu2();
        let r = build_r(&v, 6).unwrap();
        let fam = build_ur_family(&r, &v, 64, 1).unwrap();
        let set: HashSet<&Vec<u64>> = fam.iter().map(|m| &m.hamarray).collect();
        assert_eq!(set.len(), fam.len());
        for m in &fam {
            assert_eq!(
                m.hamarray,
                hamarray(r.as_slice(), m.data.as_slice()).unwrap()
            );
        }
        let sums = enumerate_sums(&v, &v.full_mask()).unwrap();
        assert!(fam.len() >= sums.len());
        assert_eq!(build_ur_family(&r, &v, 1, 1).unwrap().len(), 1);
    }

    #[test]
    fn stream_sampling() {
        let v = mu2();
        let r = build_r(&v, 6).unwrap();
        let fam = build_ur_family(&r, &v, 1, 1).unwrap();
        let s = sample_hamming_stream(&fam, 64, 3).unwrap();
        assert_eq!(s.stream.len(), 64);
        assert_eq!(s.draws, vec![0; 4]);
        assert!(matches!(
            sample_hamming_stream(&fam, 40, 3),
            Err(Error::Divisibility(40, 16))
        ));
    }

    #[test]
    fn instance_manifest() {
        let inst = HammingInstance::build(HammingConfig::new(2, 5)).unwrap();
        let m = inst.manifest();
        assert_eq!((m.r, m.n, m.q), (8, 64, 6));
        assert_eq!(m.copy_starts, vec![55, 47, 31]);
        assert_eq!(m.code_size, None);
        assert_eq!(m.family_size, m.family_populated + m.family_random_fill);
        let dir = std::env::temp_dir().join(format!("streamlab-bundle-{}", std::process::id()));
        inst.save_bundle(&dir).unwrap();
        let f = SymbolString::load(&dir.join("F.json")).unwrap();
        assert_eq!(f, inst.f);
        fs::remove_dir_all(&dir).unwrap();
    }
}
