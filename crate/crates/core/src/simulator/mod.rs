//! Bit-level execution of the MCCS: integer subfile layout, cache filling,
//! zero-padded XOR delivery and decoding by GF(2) elimination.

pub mod bits;
pub mod gf2;
mod layout;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use itertools::Itertools;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::combinatorics::{
    all_subsets, check_demand_count, distinct_set, leader_group, subsets_meeting, DemandVector, UserSubset,
    DEMAND_ENUMERATION_LIMIT,
};
use crate::error::{Error, Result};
use crate::model::{Placement, ProblemInstance};
use crate::rates::{demand_from_index, rate_mccs};

pub use bits::BitString;
pub use gf2::{Gf2Solution, Gf2System};
pub use layout::{default_file_bits, quantize_placement, SubfileLayout, MAX_SIMULATED_USERS};

/// The server's files, filled from a seeded ChaCha8 stream in file order.
#[derive(Debug, Clone)]
pub struct FileLibrary {
    seed: u64,
    files: Vec<BitString>,
}

impl FileLibrary {
    pub fn generate(n_files: usize, file_size_bits: u64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let files = (0..n_files).map(|_| BitString::random(file_size_bits as usize, &mut rng)).collect();
        Self { seed, files }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn file(&self, n: usize) -> &BitString {
        &self.files[n]
    }

    pub fn n_files(&self) -> usize {
        self.files.len()
    }

    /// `W_{n,S}` under `layout`.
    pub fn subfile(&self, layout: &SubfileLayout, n: usize, subset: UserSubset) -> BitString {
        let r = layout.subfile_range(n, subset);
        self.files[n].slice(r.start as usize, r.end as usize)
    }
}

/// Everything user `user` stores: `W_{n,S}` for every file and every `S`
/// containing the user.
#[derive(Debug, Clone)]
pub struct UserCache {
    pub user: usize,
    pub subfiles: BTreeMap<(usize, UserSubset), BitString>,
}

impl UserCache {
    pub fn occupancy_bits(&self) -> u64 {
        self.subfiles.values().map(|b| b.len() as u64).sum()
    }

    pub fn get(&self, file: usize, subset: UserSubset) -> Option<&BitString> {
        self.subfiles.get(&(file, subset))
    }
}

pub fn build_caches(layout: &SubfileLayout, library: &FileLibrary) -> Vec<UserCache> {
    let k = layout.k_users();
    (0..k)
        .map(|user| {
            let subfiles = (0..layout.n_files())
                .flat_map(|n| all_subsets(k).filter(move |s| s.contains(user)).map(move |s| (n, s)))
                .filter(|&(n, s)| layout.subfile_len(n, s.len()) > 0)
                .map(|(n, s)| ((n, s), library.subfile(layout, n, s)))
                .collect();
            UserCache { user, subfiles }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodedMessage {
    pub subset: UserSubset,
    pub payload: BitString,
}

impl CodedMessage {
    pub fn bits(&self) -> u64 {
        self.payload.len() as u64
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransmissionLog {
    pub messages: Vec<CodedMessage>,
    pub total_bits: u64,
    /// Non-redundant subsets considered, including those whose message was
    /// empty and therefore not sent.
    pub candidate_messages: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct MessageRecord {
    pub subset: UserSubset,
    pub bits: u64,
}

/// JSON form of a transmission log (payloads omitted).
#[derive(Debug, Clone, Serialize)]
pub struct LogExport {
    pub messages: Vec<MessageRecord>,
    pub total_bits: u64,
    #[serde(rename = "F")]
    pub file_size_bits: u64,
    pub seed: u64,
}

impl TransmissionLog {
    pub fn export(&self, file_size_bits: u64, seed: u64) -> LogExport {
        LogExport {
            messages: self.messages.iter().map(|m| MessageRecord { subset: m.subset, bits: m.bits() }).collect(),
            total_bits: self.total_bits,
            file_size_bits,
            seed,
        }
    }
}

fn check_demand(layout: &SubfileLayout, d: &DemandVector) -> Result<()> {
    if d.k_users() != layout.k_users() {
        return Err(Error::OutOfRange(format!("demand has {} users, layout has {}", d.k_users(), layout.k_users())));
    }
    if let Some(&f) = d.requests().iter().find(|&&f| f >= layout.n_files()) {
        return Err(Error::OutOfRange(format!("requested file {f} does not exist")));
    }
    Ok(())
}

/// Sends `C_S = XOR_{k in S} W_{d_k, S \ k}` for every non-redundant `S`
/// with the canonical leader group.
pub fn deliver(layout: &SubfileLayout, library: &FileLibrary, d: &DemandVector) -> Result<TransmissionLog> {
    deliver_with_leaders(layout, library, d, leader_group(d))
}

/// As [`deliver`] with an explicit leader group. Subsets go out in
/// lexicographic order of their sorted user lists; shorter subfiles are
/// padded with trailing zeros.
pub fn deliver_with_leaders(
    layout: &SubfileLayout,
    library: &FileLibrary,
    d: &DemandVector,
    leaders: UserSubset,
) -> Result<TransmissionLog> {
    check_demand(layout, d)?;
    let leader_files: Vec<usize> = leaders.users().map(|u| d.file_of(u)).sorted_unstable().collect();
    if leader_files != distinct_set(d) {
        return Err(Error::OutOfRange(format!("{leaders} is not a leader group for demand {:?}", d.labels())));
    }
    let subsets: Vec<UserSubset> = subsets_meeting(d.k_users(), leaders).sorted_by_key(|s| s.labels()).collect();
    let candidate_messages = subsets.len();
    let mut messages = Vec::new();
    for subset in subsets {
        let level = subset.len() - 1;
        let len = subset.users().map(|k| layout.subfile_len(d.file_of(k), level)).max().unwrap_or(0);
        if len == 0 {
            continue;
        }
        let mut payload = BitString::zeros(len as usize);
        for k in subset.users() {
            payload.xor_prefix(&library.subfile(layout, d.file_of(k), subset.without(k)));
        }
        messages.push(CodedMessage { subset, payload });
    }
    let total_bits = messages.iter().map(CodedMessage::bits).sum();
    Ok(TransmissionLog { messages, total_bits, candidate_messages })
}

/// `total_bits / F`.
pub fn simulated_rate(log: &TransmissionLog, file_size_bits: u64) -> f64 {
    log.total_bits as f64 / file_size_bits as f64
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UserDecode {
    /// 0-based; exported as a 1-based label.
    #[serde(serialize_with = "serialize_label")]
    pub user: usize,
    pub success: bool,
    /// SHA-256 of the reconstructed file with undetermined bits set to zero.
    pub recovered_sha256: String,
    /// Bits of the requested file the equations leave undetermined.
    pub residual_unknown_bits: u64,
    pub inconsistent: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DecodeReport {
    pub users: Vec<UserDecode>,
    pub diagnostics: Vec<String>,
}

fn serialize_label<S: serde::Serializer>(user: &usize, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_u64(*user as u64 + 1)
}

impl DecodeReport {
    pub fn all_succeeded(&self) -> bool {
        self.users.iter().all(|u| u.success)
    }
}

/// Reconstructs each user's requested file from the broadcast and its own
/// cache alone, then compares against the library.
///
/// For user `k` the unknowns are the subfiles not cached by `k` of every file
/// that appears in a received message (and of `d_k`). The bit axis is cut at
/// every distinct subfile length so that within each slice a subfile either
/// spans it or is padding; each slice is one GF(2) system whose right-hand
/// sides are bit strings.
pub fn decode_and_verify(
    layout: &SubfileLayout,
    library: &FileLibrary,
    caches: &[UserCache],
    log: &TransmissionLog,
    d: &DemandVector,
) -> Result<DecodeReport> {
    check_demand(layout, d)?;
    if caches.len() != d.k_users() {
        return Err(Error::OutOfRange(format!("{} caches for {} users", caches.len(), d.k_users())));
    }
    let mut diagnostics = Vec::new();
    let users = caches.iter().map(|cache| decode_user(layout, library, cache, log, d, &mut diagnostics)).collect();
    Ok(DecodeReport { users, diagnostics })
}

fn decode_user(
    layout: &SubfileLayout,
    library: &FileLibrary,
    cache: &UserCache,
    log: &TransmissionLog,
    d: &DemandVector,
    diagnostics: &mut Vec<String>,
) -> UserDecode {
    let k = layout.k_users();
    let me = cache.user;
    let wanted = d.file_of(me);
    let len = |n: usize, s: UserSubset| layout.subfile_len(n, s.len()) as usize;

    let files: BTreeSet<usize> =
        log.messages.iter().flat_map(|m| m.subset.users().map(|u| d.file_of(u))).chain([wanted]).collect();
    let unknowns: Vec<(usize, UserSubset)> = files
        .iter()
        .flat_map(|&n| all_subsets(k).filter(move |s| !s.contains(me)).map(move |s| (n, s)))
        .filter(|&(n, s)| len(n, s) > 0)
        .collect();
    let column: HashMap<(usize, UserSubset), usize> = unknowns.iter().enumerate().map(|(i, &u)| (u, i)).collect();

    let cuts: Vec<usize> = unknowns.iter().map(|&(n, s)| len(n, s)).chain([0]).sorted_unstable().dedup().collect();

    let mut solved: Vec<Vec<Option<BitString>>> = vec![Vec::new(); unknowns.len()];
    let mut inconsistent = false;
    for (&lo, &hi) in cuts.iter().tuple_windows() {
        let live: Vec<usize> = (0..unknowns.len()).filter(|&i| len(unknowns[i].0, unknowns[i].1) >= hi).collect();
        let local: HashMap<usize, usize> = live.iter().enumerate().map(|(j, &i)| (i, j)).collect();
        let mut system = Gf2System::new(live.len(), hi - lo);
        for message in log.messages.iter().filter(|m| m.payload.len() >= hi) {
            let mut rhs = message.payload.slice(lo, hi);
            let mut cols = Vec::new();
            for j in message.subset.users() {
                let term = (d.file_of(j), message.subset.without(j));
                if len(term.0, term.1) < hi {
                    continue;
                }
                if term.1.contains(me) {
                    match cache.get(term.0, term.1) {
                        Some(known) => rhs.xor_prefix(&known.slice(lo, hi)),
                        None => {
                            diagnostics.push(format!("user {}: cache lacks W({}, {})", me + 1, term.0 + 1, term.1));
                            inconsistent = true;
                        }
                    }
                } else {
                    cols.push(local[&column[&term]]);
                }
            }
            system.add_equation(cols, rhs);
        }
        let solution = system.solve();
        if solution.inconsistent_rows > 0 {
            inconsistent = true;
            diagnostics.push(format!(
                "user {}: {} inconsistent equations on bits {lo}..{hi}",
                me + 1,
                solution.inconsistent_rows
            ));
        }
        for (j, &i) in live.iter().enumerate() {
            solved[i].push(solution.value(j).cloned());
        }
    }

    // reassemble the requested file in layout order
    let mut recovered = BitString::zeros(0);
    let mut residual = 0u64;
    for s in all_subsets(k) {
        let n_bits = len(wanted, s);
        if n_bits == 0 {
            continue;
        }
        if s.contains(me) {
            match cache.get(wanted, s) {
                Some(bits) => recovered.append(bits),
                None => {
                    residual += n_bits as u64;
                    recovered.append(&BitString::zeros(n_bits));
                }
            }
            continue;
        }
        let pieces = &solved[column[&(wanted, s)]];
        for (piece, (&lo, &hi)) in pieces.iter().zip(cuts.iter().tuple_windows()) {
            match piece {
                Some(bits) => recovered.append(bits),
                None => {
                    residual += (hi - lo) as u64;
                    recovered.append(&BitString::zeros(hi - lo));
                }
            }
        }
    }

    let success = !inconsistent && residual == 0 && &recovered == library.file(wanted);
    if !success && !inconsistent && residual == 0 {
        diagnostics.push(format!("user {}: reconstruction differs from file {}", me + 1, wanted + 1));
    }
    UserDecode {
        user: me,
        success,
        recovered_sha256: sha256_hex(&recovered),
        residual_unknown_bits: residual,
        inconsistent,
    }
}

pub fn sha256_hex(bits: &BitString) -> String {
    let digest = Sha256::digest(bits.to_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Outcome of delivering and decoding one demand.
#[derive(Debug, Clone, Serialize)]
pub struct DemandOutcome {
    pub demand: Vec<usize>,
    pub total_bits: u64,
    pub messages_sent: usize,
    pub candidate_messages: usize,
    pub simulated_rate: f64,
    pub analytic_rate: f64,
    /// `|simulated - analytic|`.
    pub deviation: f64,
    /// Quantization allowance: one bit per candidate message.
    pub deviation_bound: f64,
    pub decoded: bool,
    pub residual_unknown_bits: u64,
}

impl DemandOutcome {
    pub fn within_bound(&self) -> bool {
        self.deviation <= self.deviation_bound
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulationSummary {
    pub file_size_bits: u64,
    pub seed: u64,
    pub subfile_bits: Vec<Vec<u64>>,
    pub cache_bits_per_user: Vec<u64>,
    pub demands: usize,
    pub decoded: usize,
    pub max_deviation: f64,
    pub bound_violations: usize,
    pub outcomes: Vec<DemandOutcome>,
}

impl SimulationSummary {
    pub fn all_decoded(&self) -> bool {
        self.decoded == self.demands
    }
}

/// Prepared layout, files and caches for one placement.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub layout: SubfileLayout,
    pub library: FileLibrary,
    pub caches: Vec<UserCache>,
}

impl Simulation {
    pub fn new(instance: &ProblemInstance, placement: &Placement, file_size_bits: u64, seed: u64) -> Result<Self> {
        let layout = quantize_placement(instance, placement, file_size_bits)?;
        let library = FileLibrary::generate(instance.n_files(), file_size_bits, seed);
        let caches = build_caches(&layout, &library);
        Ok(Self { layout, library, caches })
    }

    pub fn run_demand(
        &self,
        instance: &ProblemInstance,
        placement: &Placement,
        d: &DemandVector,
    ) -> Result<DemandOutcome> {
        let f = self.layout.file_size_bits();
        let log = deliver(&self.layout, &self.library, d)?;
        let report = decode_and_verify(&self.layout, &self.library, &self.caches, &log, d)?;
        let simulated = simulated_rate(&log, f);
        let analytic = rate_mccs(instance, placement, d)?.total;
        Ok(DemandOutcome {
            demand: d.labels(),
            total_bits: log.total_bits,
            messages_sent: log.messages.len(),
            candidate_messages: log.candidate_messages,
            simulated_rate: simulated,
            analytic_rate: analytic,
            deviation: (simulated - analytic).abs(),
            deviation_bound: log.candidate_messages as f64 / f as f64,
            decoded: report.all_succeeded(),
            residual_unknown_bits: report.users.iter().map(|u| u.residual_unknown_bits).sum(),
        })
    }
}

/// Delivers and decodes every one of the `N^K` demands; outcomes are in
/// lexicographic demand order.
pub fn simulate_all(
    instance: &ProblemInstance,
    placement: &Placement,
    file_size_bits: u64,
    seed: u64,
) -> Result<SimulationSummary> {
    let count = check_demand_count(instance, DEMAND_ENUMERATION_LIMIT)?;
    let sim = Simulation::new(instance, placement, file_size_bits, seed)?;
    let (n, k) = (instance.n_files(), instance.k_users());
    let outcomes = (0..count as u64)
        .into_par_iter()
        .map(|i| sim.run_demand(instance, placement, &demand_from_index(i as u128, n, k)))
        .collect::<Result<Vec<_>>>()?;
    Ok(SimulationSummary {
        file_size_bits,
        seed,
        subfile_bits: sim.layout.subfile_bits().to_vec(),
        cache_bits_per_user: sim.caches.iter().map(UserCache::occupancy_bits).collect(),
        demands: outcomes.len(),
        decoded: outcomes.iter().filter(|o| o.decoded).count(),
        max_deviation: outcomes.iter().map(|o| o.deviation).fold(0.0, f64::max),
        bound_violations: outcomes.iter().filter(|o| !o.within_bound()).count(),
        outcomes,
    })
}
