//! Instance bundles, measured runs, growth sweeps and witness suites.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use num_bigint::BigUint;
use num_rational::Ratio;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::engines::{
    build_processor, record_run, run_on_store, run_stream, Algorithm, OnlineProcessor, Problem,
};
use crate::error::{Error, Result};
use crate::instances::{
    check_cyclic_code, hamarray, kqn_binary_lsb_first, make_kn, make_kqn, make_kqn_digits,
    populate_random, search_cyclic_code, toeplitz_nonsingular_fraction, HammingConfig,
    HammingInstance, HammingManifest, VectorMultiset,
};
use crate::modular::{is_power_of_two, is_prime};
use crate::params::Params;
use crate::probelab::{
    compute_info_transfer, verify_roundtrip, CellStore, InfoTransferTree, ProbeTrace,
    TransferVariant,
};
use crate::rng::{substream, substream_indexed};
use crate::symbols::{star, Role, Symbol, SymbolString};
use crate::window::{internal_nodes, MaskedStream, OutputArray};
use crate::witnesses::{
    decode_conv_kn, decode_conv_toeplitz, decode_hamming_blocks, enumerate_sums,
    enumerate_sums_by_multiplicity, mult_ambiguity, mult_f_fraction,
};

/// Source of the fixed operand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Family {
    Kn,
    Kqn,
    ToeplitzRandom,
    Random,
    Hamming { mu: usize, gamma: usize },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Kn => "kn",
            Family::Kqn => "kqn",
            Family::ToeplitzRandom => "toeplitz",
            Family::Random => "random",
            Family::Hamming { .. } => "hamming",
        }
    }

    /// Alphabet used when none is given.
    pub fn default_q(&self) -> u64 {
        match self {
            Family::Kn | Family::Kqn => 2,
            Family::ToeplitzRandom | Family::Random => 3,
            Family::Hamming { mu, .. } => (mu * mu) as u64 + 2,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Hamming { mu, gamma } => write!(f, "hamming(mu={mu},gamma={gamma})"),
            other => f.write_str(other.name()),
        }
    }
}

/// Parses `kn`, `kqn`, `toeplitz`, `random` or `hamming`; the Hamming
/// parameters default to `mu = 2, gamma = 1`.
impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "kn" => Ok(Family::Kn),
            "kqn" => Ok(Family::Kqn),
            "toeplitz" | "toeplitz_random" => Ok(Family::ToeplitzRandom),
            "random" => Ok(Family::Random),
            "hamming" => Ok(Family::Hamming { mu: 2, gamma: 1 }),
            other => Err(Error::InvalidParam(format!(
                "unknown family {other:?} (expected kn, kqn, toeplitz, random or hamming)"
            ))),
        }
    }
}

/// Everything needed to generate one instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub problem: Problem,
    pub family: Family,
    /// Defaults to 64, or the smallest valid size for Hamming instances.
    pub n: Option<usize>,
    /// Defaults to [`Family::default_q`].
    pub q: Option<u64>,
    pub w: u32,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceManifest {
    pub spec: InstanceSpec,
    pub params: Params,
    pub fixed_nonzero: usize,
    /// Family indices of the stream blocks, for Hamming instances.
    pub draws: Option<Vec<usize>>,
    pub hamming: Option<HammingManifest>,
}

/// A fixed operand and one stream for it.
#[derive(Debug, Clone)]
pub struct Instance {
    pub spec: InstanceSpec,
    pub params: Params,
    pub fixed: SymbolString,
    pub stream: SymbolString,
    pub hamming: Option<HammingInstance>,
    pub draws: Option<Vec<usize>>,
}

fn random_string(
    q: u64,
    role: Role,
    len: usize,
    upper: u64,
    rng: &mut impl Rng,
) -> Result<SymbolString> {
    SymbolString::new(q, role, (0..len).map(|_| rng.gen_range(0..upper)).collect())
}

/// Largest stream symbol plus one: Hamming streams never carry STAR.
fn stream_bound(problem: Problem, q: u64) -> u64 {
    match problem {
        Problem::Hamming => star(q),
        _ => q,
    }
}

impl Instance {
    pub fn generate(spec: InstanceSpec) -> Result<Self> {
        if let Some(n) = spec.n {
            if n < 2 || !is_power_of_two(n as u64) {
                return Err(Error::InvalidParam(format!(
                    "n = {n} must be a power of two >= 2"
                )));
            }
        }
        let q = spec.q.unwrap_or_else(|| spec.family.default_q());
        let mut rng = substream(spec.seed, "instance-fixed");
        if let Family::Hamming { mu, gamma } = spec.family {
            if spec.problem != Problem::Hamming {
                return Err(Error::InvalidParam(
                    "the hamming family needs --problem hamming".into(),
                ));
            }
            if q < (mu * mu) as u64 + 2 {
                return Err(Error::InvalidParam(format!(
                    "hamming with mu = {mu} needs q >= {}",
                    mu * mu + 2
                )));
            }
            let mut cfg = HammingConfig::new(mu, spec.seed);
            cfg.gamma = gamma;
            cfg.q = Some(q);
            cfg.n = spec.n;
            let inst = HammingInstance::build(cfg)?;
            let params = Params::new(inst.n, q, spec.w, spec.seed)?;
            let sampled = inst.sample_stream(spec.seed)?;
            return Ok(Self {
                spec,
                params,
                fixed: inst.f.clone(),
                stream: sampled.stream,
                draws: Some(sampled.draws),
                hamming: Some(inst),
            });
        }
        let n = spec.n.unwrap_or(64);
        let params = Params::new(n, q, spec.w, spec.seed)?;
        let fixed = match spec.family {
            Family::Kn => SymbolString::new(q, Role::Fixed, make_kn(n)?.into_vec())?,
            Family::Kqn => make_kqn_digits(q, n)?,
            Family::ToeplitzRandom => {
                if !is_prime(q) {
                    return Err(Error::NotPrime(q));
                }
                random_string(q, Role::Fixed, n, q, &mut rng)?
            }
            Family::Random => random_string(q, Role::Fixed, n, q, &mut rng)?,
            Family::Hamming { .. } => unreachable!("handled above"),
        };
        let mut srng = substream(spec.seed, "instance-stream");
        let stream = random_string(q, Role::Stream, n, stream_bound(spec.problem, q), &mut srng)?;
        Ok(Self {
            spec,
            params,
            fixed,
            stream,
            hamming: None,
            draws: None,
        })
    }

    pub fn manifest(&self) -> InstanceManifest {
        InstanceManifest {
            spec: self.spec,
            params: self.params,
            fixed_nonzero: self.fixed.as_slice().iter().filter(|&&s| s != 0).count(),
            draws: self.draws.clone(),
            hamming: self.hamming.as_ref().map(HammingInstance::manifest),
        }
    }

    /// Writes `F.json`, `U.json`, `manifest.json` and, for Hamming
    /// instances, the construction bundle under `hamming/`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        self.fixed.save(&dir.join("F.json"))?;
        self.stream.save(&dir.join("U.json"))?;
        fs::write(
            dir.join("manifest.json"),
            serde_json::to_string_pretty(&self.manifest())?,
        )?;
        if let Some(h) = &self.hamming {
            h.save_bundle(&dir.join("hamming"))?;
        }
        Ok(())
    }

    /// Reads a saved bundle; Hamming constructions are rebuilt from the
    /// manifest's seed.
    pub fn load(dir: &Path) -> Result<Self> {
        let manifest: InstanceManifest =
            serde_json::from_str(&fs::read_to_string(dir.join("manifest.json"))?)?;
        let fixed = SymbolString::load(&dir.join("F.json"))?;
        let stream = SymbolString::load(&dir.join("U.json"))?;
        let p = manifest.params;
        if fixed.len() != p.n()
            || stream.len() != p.n()
            || fixed.q() != p.q()
            || stream.q() != p.q()
        {
            return Err(Error::Mismatch(format!(
                "bundle strings do not match n = {}, q = {}",
                p.n(),
                p.q()
            )));
        }
        let hamming = match manifest.spec.family {
            Family::Hamming { .. } => Some(
                Self::generate(manifest.spec)?
                    .hamming
                    .expect("hamming family"),
            ),
            _ => None,
        };
        Ok(Self {
            spec: manifest.spec,
            params: p,
            fixed,
            stream,
            hamming,
            draws: manifest.draws,
        })
    }

    pub fn processor(&self, algorithm: Algorithm) -> Result<Box<dyn OnlineProcessor>> {
        build_processor(self.spec.problem, algorithm, &self.fixed, self.params)
    }
}

/// Probe and information-transfer totals of one run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunTotals {
    pub probes: u64,
    pub sum_iv_pp: u64,
    pub sum_iv_wr: u64,
    pub amortized_probes: f64,
    /// `sum I_v <= probes` for both variants.
    pub counting_bound_ok: bool,
}

impl RunTotals {
    pub fn from_tree(tree: &InfoTransferTree) -> Self {
        let probes = tree.probes();
        let sum_iv_pp = tree.sum(TransferVariant::ProbedProbed, 1);
        let sum_iv_wr = tree.sum(TransferVariant::WrittenRead, 1);
        Self {
            probes,
            sum_iv_pp,
            sum_iv_wr,
            amortized_probes: probes as f64 / tree.n() as f64,
            counting_bound_ok: sum_iv_pp <= probes && sum_iv_wr <= probes,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Measured {
    pub outputs: OutputArray,
    pub tree: InfoTransferTree,
    pub trace: Option<ProbeTrace>,
    pub totals: RunTotals,
}

/// Runs the whole stream on a store that counts information transfer
/// online, optionally keeping the raw probe trace.
pub fn measure(
    proc: &dyn OnlineProcessor,
    inputs: &[Symbol],
    keep_trace: bool,
) -> Result<Measured> {
    let n = proc.params().n();
    let mut store = CellStore::new(proc.params().w()).with_transfer(n);
    if keep_trace {
        store = store.with_trace();
    }
    let outputs = OutputArray(run_on_store(proc, &mut store, inputs, 0)?);
    let tree = store.take_transfer().expect("transfer enabled").finish()?;
    let trace = store.take_trace();
    let totals = RunTotals::from_tree(&tree);
    Ok(Measured {
        outputs,
        tree,
        trace,
        totals,
    })
}

/// One row of the growth table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: usize,
    pub algorithm: Algorithm,
    pub probes: u64,
    pub sum_iv_pp: u64,
    pub sum_iv_wr: u64,
    pub amortized_probes: f64,
    /// Probed/probed transfer per arrival.
    pub amortized_iv: f64,
}

/// Measures every algorithm at every `n` on a random operand and stream.
pub fn sweep(
    problem: Problem,
    algorithms: &[Algorithm],
    ns: &[usize],
    q: u64,
    w: u32,
    seed: u64,
) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::new();
    for &n in ns {
        let inst = Instance::generate(InstanceSpec {
            problem,
            family: Family::Random,
            n: Some(n),
            q: Some(q),
            w,
            seed,
        })?;
        for &algorithm in algorithms {
            let proc = inst.processor(algorithm)?;
            let t = measure(proc.as_ref(), inst.stream.as_slice(), false)?.totals;
            rows.push(SweepRow {
                n,
                algorithm,
                probes: t.probes,
                sum_iv_pp: t.sum_iv_pp,
                sum_iv_wr: t.sum_iv_wr,
                amortized_probes: t.amortized_probes,
                amortized_iv: t.sum_iv_pp as f64 / n as f64,
            });
        }
    }
    Ok(rows)
}

/// Whether `amortized_iv` never decreases with `n` for `algorithm`.
pub fn amortized_nondecreasing(rows: &[SweepRow], algorithm: Algorithm) -> bool {
    let mut series: Vec<&SweepRow> = rows.iter().filter(|r| r.algorithm == algorithm).collect();
    series.sort_by_key(|r| r.n);
    series
        .windows(2)
        .all(|p| p[1].amortized_iv >= p[0].amortized_iv)
}

#[derive(Serialize)]
struct SweepCsvRow {
    n: usize,
    algorithm: &'static str,
    probes: u64,
    sum_iv_pp: u64,
    sum_iv_wr: u64,
    amortized_probes: String,
    amortized_iv: String,
}

/// CSV with columns `n, algorithm, probes, sum_iv_pp, sum_iv_wr,
/// amortized_probes, amortized_iv`.
pub fn write_sweep_csv<W: Write>(out: W, rows: &[SweepRow]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    if rows.is_empty() {
        wtr.write_record([
            "n",
            "algorithm",
            "probes",
            "sum_iv_pp",
            "sum_iv_wr",
            "amortized_probes",
            "amortized_iv",
        ])?;
    }
    for r in rows {
        wtr.serialize(SweepCsvRow {
            n: r.n,
            algorithm: match r.algorithm {
                Algorithm::Naive => "naive",
                Algorithm::Fast => "fast",
            },
            probes: r.probes,
            sum_iv_pp: r.sum_iv_pp,
            sum_iv_wr: r.sum_iv_wr,
            amortized_probes: format!("{:.4}", r.amortized_probes),
            amortized_iv: format!("{:.4}", r.amortized_iv),
        })?;
    }
    wtr.flush()?;
    Ok(())
}

/// Witness suites runnable from the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    ConvKn,
    Toeplitz,
    ToeplitzFraction,
    Roundtrip,
    Kqn,
    Hamming,
    Sums,
    Codes,
    Engines,
    MultAmbiguity,
    MultFraction,
}

impl Suite {
    pub const ALL: [Suite; 11] = [
        Suite::ConvKn,
        Suite::Toeplitz,
        Suite::ToeplitzFraction,
        Suite::Roundtrip,
        Suite::Kqn,
        Suite::Hamming,
        Suite::Sums,
        Suite::Codes,
        Suite::Engines,
        Suite::MultAmbiguity,
        Suite::MultFraction,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::ConvKn => "conv-kn",
            Suite::Toeplitz => "toeplitz",
            Suite::ToeplitzFraction => "toeplitz-fraction",
            Suite::Roundtrip => "roundtrip",
            Suite::Kqn => "kqn",
            Suite::Hamming => "hamming",
            Suite::Sums => "sums",
            Suite::Codes => "codes",
            Suite::Engines => "engines",
            Suite::MultAmbiguity => "mult-ambiguity",
            Suite::MultFraction => "mult-fraction",
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_lowercase();
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == key)
            .ok_or_else(|| {
                let names: Vec<&str> = Suite::ALL.iter().map(|s| s.name()).collect();
                Error::InvalidParam(format!(
                    "unknown suite {s:?} (expected one of {})",
                    names.join(", ")
                ))
            })
    }
}

/// Parameters shared by the suites; each suite reads the ones it needs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub problem: Problem,
    pub algorithm: Algorithm,
    pub n: usize,
    pub q: u64,
    pub w: u32,
    /// Toeplitz dimension for `toeplitz-fraction`.
    pub ell: usize,
    pub mu: usize,
    pub gamma: usize,
    pub trials: u64,
    pub seed: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            problem: Problem::Convolution,
            algorithm: Algorithm::Naive,
            n: 16,
            q: 5,
            w: 32,
            ell: 2,
            mu: 2,
            gamma: 1,
            trials: 20,
            seed: 0,
        }
    }
}

/// Outcome of one suite: hard failures fail the run, warnings only
/// report unexpected experimental outcomes.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub checks: u64,
    pub failures: Vec<String>,
    pub warnings: Vec<String>,
    pub metrics: BTreeMap<String, String>,
}

impl SuiteReport {
    fn new(suite: Suite) -> Self {
        Self {
            suite: suite.name().to_string(),
            ..Self::default()
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    fn metric(&mut self, key: &str, value: impl fmt::Display) {
        self.metrics.insert(key.to_string(), value.to_string());
    }
}

pub fn run_suite(suite: Suite, cfg: &SuiteConfig) -> Result<SuiteReport> {
    let mut report = SuiteReport::new(suite);
    match suite {
        Suite::ConvKn => suite_conv_kn(cfg, &mut report)?,
        Suite::Toeplitz => suite_toeplitz(cfg, &mut report)?,
        Suite::ToeplitzFraction => {
            let got = toeplitz_nonsingular_fraction(cfg.q, cfg.ell)?;
            report.metric("fraction", got);
            report.check(got == Ratio::new(cfg.q - 1, cfg.q), || {
                format!(
                    "nonsingular fraction {got} for q = {}, ell = {}",
                    cfg.q, cfg.ell
                )
            });
        }
        Suite::Roundtrip => suite_roundtrip(cfg, &mut report)?,
        Suite::Kqn => suite_kqn(&mut report)?,
        Suite::Hamming => suite_hamming(cfg, &mut report)?,
        Suite::Sums => suite_sums(cfg, &mut report)?,
        Suite::Codes => {
            let code = search_cyclic_code(cfg.mu, cfg.gamma, 1_000_000)?;
            match check_cyclic_code(&code) {
                Ok(c) => {
                    report.metric("size", c.size);
                    report.metric(
                        "min_distance",
                        c.min_distance.map_or("-".to_string(), |d| d.to_string()),
                    );
                    report.check(true, String::new);
                }
                Err(e) => report.check(false, || e.to_string()),
            }
        }
        Suite::Engines => suite_engines(cfg, &mut report)?,
        Suite::MultAmbiguity => suite_mult_ambiguity(cfg, &mut report)?,
        Suite::MultFraction => {
            for ell_v in [2usize, 4] {
                let f = mult_f_fraction(2, ell_v)?;
                report.metric(&format!("fraction_ell{ell_v}"), f.fraction());
                report.checks += 1;
                if f.fraction() < Ratio::new(1, 2) {
                    report.warnings.push(format!(
                        "ell_v = {ell_v}: fraction {} is below 1/2",
                        f.fraction()
                    ));
                }
            }
        }
    }
    Ok(report)
}

fn trial_rng(cfg: &SuiteConfig, name: &str, k: u64) -> crate::rng::LabRng {
    substream_indexed(cfg.seed, name, k)
}

fn suite_conv_kn(cfg: &SuiteConfig, report: &mut SuiteReport) -> Result<()> {
    let params = Params::new(cfg.n, cfg.q, cfg.w, cfg.seed)?;
    let f = SymbolString::new(cfg.q, Role::Fixed, make_kn(cfg.n)?.into_vec())?;
    let proc = build_processor(Problem::Convolution, cfg.algorithm, &f, params)?;
    for k in 0..cfg.trials {
        let u = random_string(
            cfg.q,
            Role::Stream,
            cfg.n,
            cfg.q,
            &mut trial_rng(cfg, "suite-conv-kn", k),
        )?;
        let a = run_stream(proc.as_ref(), u.as_slice())?;
        for v in internal_nodes(cfg.n)? {
            let mut rep = decode_conv_kn(&a, &v, &f, &MaskedStream::new(&u, &v)?, cfg.q)?;
            let ok = rep.verify(u.as_slice());
            report.check(ok, || {
                format!("trial {k}, node {}: wrong recovery", v.node_id)
            });
        }
    }
    Ok(())
}

fn suite_toeplitz(cfg: &SuiteConfig, report: &mut SuiteReport) -> Result<()> {
    if !is_prime(cfg.q) {
        return Err(Error::NotPrime(cfg.q));
    }
    let params = Params::new(cfg.n, cfg.q, cfg.w, cfg.seed)?;
    let mut ambiguous = 0u64;
    for k in 0..cfg.trials {
        let mut rng = trial_rng(cfg, "suite-toeplitz", k);
        let f = random_string(cfg.q, Role::Fixed, cfg.n, cfg.q, &mut rng)?;
        let u = random_string(cfg.q, Role::Stream, cfg.n, cfg.q, &mut rng)?;
        let proc = build_processor(Problem::Convolution, cfg.algorithm, &f, params)?;
        let a = run_stream(proc.as_ref(), u.as_slice())?;
        for v in internal_nodes(cfg.n)? {
            let mut rep = decode_conv_toeplitz(&a, &v, &f, &MaskedStream::new(&u, &v)?, cfg.q)?;
            ambiguous += (rep.ambiguity > BigUint::from(1u32)) as u64;
            let ok = rep.verify(u.as_slice());
            report.check(ok, || {
                format!("trial {k}, node {}: wrong recovery", v.node_id)
            });
        }
    }
    report.metric("singular_nodes", ambiguous);
    Ok(())
}

fn suite_roundtrip(cfg: &SuiteConfig, report: &mut SuiteReport) -> Result<()> {
    let params = Params::new(cfg.n, cfg.q, cfg.w, cfg.seed)?;
    for k in 0..cfg.trials {
        let mut rng = trial_rng(cfg, "suite-roundtrip", k);
        let f = random_string(cfg.q, Role::Fixed, cfg.n, cfg.q, &mut rng)?;
        let u = random_string(
            cfg.q,
            Role::Stream,
            cfg.n,
            stream_bound(cfg.problem, cfg.q),
            &mut rng,
        )?;
        let proc = build_processor(cfg.problem, cfg.algorithm, &f, params)?;
        let rec = record_run(proc.as_ref(), u.as_slice())?;
        let tree = compute_info_transfer(&rec.trace, cfg.n)?;
        let totals = RunTotals::from_tree(&tree);
        report.check(totals.counting_bound_ok, || {
            format!("trial {k}: sum I_v exceeds {} probes", totals.probes)
        });
        for v in internal_nodes(cfg.n)? {
            let res = verify_roundtrip(proc.as_ref(), &rec, &v);
            report.check(res.is_ok(), || {
                format!("trial {k}, node {}: {}", v.node_id, res.unwrap_err())
            });
        }
    }
    Ok(())
}

fn suite_kqn(report: &mut SuiteReport) -> Result<()> {
    let k = make_kqn(16, 8)?;
    report.metric("K_16_8", &k);
    report.check(k == BigUint::from(65814u32), || format!("K_(16,8) = {k}"));
    for q in [2u64, 4, 16] {
        for n in 1..=32usize {
            let mut bits = kqn_binary_lsb_first(q, n)?;
            bits.reverse();
            let len = bits.len();
            let ok = len < 2 || make_kn(len)?.as_slice() == bits.as_slice();
            report.check(ok, || {
                format!("reversal identity fails for q = {q}, n = {n}")
            });
        }
    }
    Ok(())
}

fn suite_hamming(cfg: &SuiteConfig, report: &mut SuiteReport) -> Result<()> {
    let mut hc = HammingConfig::new(cfg.mu, cfg.seed);
    hc.gamma = cfg.gamma;
    let inst = HammingInstance::build(hc)?;
    let r = inst.r;
    for k in 0..cfg.trials {
        let p = populate_random(&inst.vectors, inst.q, cfg.seed.wrapping_add(k))?;
        let h = hamarray(inst.r_string.as_slice(), p.uprime.as_slice())?;
        report.check(h == p.expected_hamarray(r), || {
            format!("population {k}: window differs from r - sum")
        });
    }
    let params = Params::new(inst.n, inst.q, cfg.w, cfg.seed)?;
    let proc = build_processor(Problem::Hamming, cfg.algorithm, &inst.f, params)?;
    let mut blocks = 0;
    for k in 0..cfg.trials {
        let s = inst.sample_stream(cfg.seed.wrapping_add(k))?;
        let a = run_stream(proc.as_ref(), s.stream.as_slice())?;
        for v in internal_nodes(inst.n)? {
            if v.ell * v.ell < inst.n {
                continue;
            }
            match decode_hamming_blocks(&a, &v, &inst, &MaskedStream::new(&s.stream, &v)?) {
                Ok(mut rep) => {
                    let draws_ok = rep.blocks.iter().all(|(&b, &idx)| s.draws[b] == idx);
                    let ok = rep.verify(s.stream.as_slice()) && draws_ok;
                    blocks += rep.blocks.len();
                    report.check(ok, || {
                        format!("stream {k}, node {}: wrong block identity", v.node_id)
                    });
                }
                Err(e) => report.check(false, || format!("stream {k}, node {}: {e}", v.node_id)),
            }
        }
    }
    report.metric("r", r);
    report.metric("n", inst.n);
    report.metric("family_size", inst.family.len());
    report.metric("blocks_decoded", blocks);
    Ok(())
}

fn suite_sums(cfg: &SuiteConfig, report: &mut SuiteReport) -> Result<()> {
    for k in 0..cfg.trials {
        let mut rng = trial_rng(cfg, "suite-sums", k);
        let v = VectorMultiset::random(cfg.mu, &mut rng)?;
        let mask: Vec<bool> = (0..v.len()).map(|_| rng.gen_bool(0.75)).collect();
        let a = enumerate_sums(&v, &mask)?;
        let b = enumerate_sums_by_multiplicity(&v, &mask)?;
        report.check(a == b, || {
            format!(
                "instance {k}: oracles disagree ({} vs {})",
                a.len(),
                b.len()
            )
        });
    }
    Ok(())
}

fn suite_engines(cfg: &SuiteConfig, report: &mut SuiteReport) -> Result<()> {
    let params = Params::new(cfg.n, cfg.q, cfg.w, cfg.seed)?;
    for k in 0..cfg.trials {
        let mut rng = trial_rng(cfg, "suite-engines", k);
        let f = random_string(cfg.q, Role::Fixed, cfg.n, cfg.q, &mut rng)?;
        let u = random_string(
            cfg.q,
            Role::Stream,
            cfg.n,
            stream_bound(cfg.problem, cfg.q),
            &mut rng,
        )?;
        let naive = build_processor(cfg.problem, Algorithm::Naive, &f, params)?;
        let fast = build_processor(cfg.problem, Algorithm::Fast, &f, params)?;
        let same =
            run_stream(naive.as_ref(), u.as_slice())? == run_stream(fast.as_ref(), u.as_slice())?;
        report.check(same, || format!("trial {k}: fast and naive outputs differ"));
    }
    Ok(())
}

/// Ambiguity of every node of `K_{2,n}` under every fixing of the visible
/// arrivals that precede the node's outputs.
fn suite_mult_ambiguity(cfg: &SuiteConfig, report: &mut SuiteReport) -> Result<()> {
    let n = cfg.n;
    if n > 16 {
        return Err(Error::TooLarge(format!("exhaustive fixings at n = {n}")));
    }
    let f = make_kqn_digits(2, n)?;
    let mut worst = 0;
    for v in internal_nodes(n)? {
        // arrivals after t2 never influence A_v
        let visible_len = v.t2 + 1 - v.half();
        let mut node_worst = 0;
        for fix in 0..1u64 << visible_len {
            let mut data = vec![0u64; n];
            let mut bit = 0;
            for (t, slot) in data.iter_mut().enumerate().take(v.t2 + 1) {
                if t < v.t0 || t > v.t1 {
                    *slot = (fix >> bit) & 1;
                    bit += 1;
                }
            }
            let u = SymbolString::new(2, Role::Stream, data)?;
            node_worst = node_worst.max(mult_ambiguity(
                f.as_slice(),
                &v,
                &MaskedStream::new(&u, &v)?,
                2,
            )?);
        }
        report.metric(&format!("node_{}", v.node_id), node_worst);
        report.checks += 1;
        worst = worst.max(node_worst);
    }
    report.metric("max_ambiguity", worst);
    if worst > 2 {
        report
            .warnings
            .push(format!("K_(2,{n}) reaches ambiguity {worst} > 2"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(problem: Problem, family: Family, n: usize) -> InstanceSpec {
        InstanceSpec {
            problem,
            family,
            n: Some(n),
            q: None,
            w: 32,
            seed: 3,
        }
    }

    #[test]
    fn family_parsing() {
        assert_eq!("KN".parse::<Family>().unwrap(), Family::Kn);
        assert_eq!(
            "hamming".parse::<Family>().unwrap(),
            Family::Hamming { mu: 2, gamma: 1 }
        );
        assert!("nope".parse::<Family>().is_err());
        assert_eq!("Roundtrip".parse::<Suite>().unwrap(), Suite::Roundtrip);
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
    }

    #[test]
    fn generate_validates() {
        assert!(Instance::generate(spec(Problem::Convolution, Family::Kn, 48)).is_err());
        let mut s = spec(Problem::Convolution, Family::ToeplitzRandom, 16);
        s.q = Some(4);
        assert!(matches!(Instance::generate(s), Err(Error::NotPrime(4))));
        assert!(Instance::generate(spec(
            Problem::Convolution,
            Family::Hamming { mu: 2, gamma: 1 },
            64
        ))
        .is_err());
        let mut s = spec(Problem::Hamming, Family::Hamming { mu: 2, gamma: 1 }, 64);
        s.q = Some(5);
        assert!(Instance::generate(s).is_err());
    }

    #[test]
    fn bundle_round_trip() {
        let dir = std::env::temp_dir().join(format!("streamlab-bundle-{}", std::process::id()));
        for s in [
            spec(Problem::Convolution, Family::Kn, 64),
            InstanceSpec {
                n: None,
                ..spec(Problem::Hamming, Family::Hamming { mu: 2, gamma: 1 }, 64)
            },
        ] {
            let inst = Instance::generate(s).unwrap();
            inst.save(&dir).unwrap();
            let back = Instance::load(&dir).unwrap();
            assert_eq!(back.fixed, inst.fixed);
            assert_eq!(back.stream, inst.stream);
            assert_eq!(back.draws, inst.draws);
            assert_eq!(back.hamming.is_some(), inst.hamming.is_some());
        }
        let kn = Instance::generate(spec(Problem::Convolution, Family::Kn, 64)).unwrap();
        assert_eq!(kn.manifest().fixed_nonzero, 6);
        fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn measured_totals_match_trace() {
        let inst = Instance::generate(spec(Problem::Multiplication, Family::Random, 32)).unwrap();
        for algo in [Algorithm::Naive, Algorithm::Fast] {
            let proc = inst.processor(algo).unwrap();
            let m = measure(proc.as_ref(), inst.stream.as_slice(), true).unwrap();
            let tree = compute_info_transfer(m.trace.as_ref().unwrap(), 32).unwrap();
            assert_eq!(RunTotals::from_tree(&tree), m.totals);
            assert!(m.totals.counting_bound_ok);
        }
    }

    #[test]
    fn toy_root_transfer() {
        // n = 2, naive conv: the root sees the counter and the first input
        let f = SymbolString::new(3, Role::Fixed, vec![1, 1]).unwrap();
        let proc = build_processor(
            Problem::Convolution,
            Algorithm::Naive,
            &f,
            Params::new(2, 3, 8, 0).unwrap(),
        )
        .unwrap();
        let m = measure(proc.as_ref(), &[1, 2], false).unwrap();
        assert_eq!(m.tree.iv(1, TransferVariant::WrittenRead), 2);
        assert_eq!(m.tree.iv(1, TransferVariant::ProbedProbed), 2);
    }

    #[test]
    fn sweep_rows_and_monotonicity() {
        let rows = sweep(
            Problem::Convolution,
            &[Algorithm::Naive, Algorithm::Fast],
            &[16, 32, 64],
            3,
            32,
            1,
        )
        .unwrap();
        assert_eq!(rows.len(), 6);
        assert!(amortized_nondecreasing(&rows, Algorithm::Naive));
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, &rows).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 7);
        assert!(
            sweep(Problem::Convolution, &[Algorithm::Naive], &[], 3, 32, 1)
                .unwrap()
                .is_empty()
        );
        let mut empty = Vec::new();
        write_sweep_csv(&mut empty, &[]).unwrap();
        assert_eq!(String::from_utf8(empty).unwrap().lines().count(), 1);
    }

    #[test]
    fn suites_pass_at_small_scale() {
        let cfg = SuiteConfig {
            trials: 3,
            ..SuiteConfig::default()
        };
        for suite in Suite::ALL {
            let mut c = cfg;
            match suite {
                Suite::Toeplitz | Suite::ToeplitzFraction => c.q = 3,
                Suite::Sums => c.mu = 3,
                Suite::Codes => c.mu = 4,
                Suite::MultAmbiguity => c.n = 8,
                _ => {}
            }
            let r = run_suite(suite, &c).unwrap();
            assert!(r.passed(), "{}: {:?}", suite.name(), r.failures);
            assert!(r.checks > 0, "{}", suite.name());
        }
    }
}
