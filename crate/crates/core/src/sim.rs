//! Byte-level simulation of a CPDA-based caching scheme on a combination
//! network: a server, `H` memoryless relays, and one user per column label.
//!
//! Each file is split into `F` packets (one per row). User `k` caches every
//! packet `j` with a star at `(j, k)`. For each symbol `s` the server XORs the
//! requested packets in the cells holding `s`, cuts the result into
//! `w_s = |I_s|` contiguous pieces and hands piece `l` to the `l`-th relay of
//! `I_s` (ascending), which forwards it to every user attached to it.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use itertools::Itertools;
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::combinat::RelaySet;
use crate::model::{Entry, PdaArray};

/// Bytes per minimal unit when no size is given.
pub const DEFAULT_UNIT_BYTES: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("file size {file_bytes} bytes is not a multiple of {required} (F_rows * lcm(w_s))")]
    Divisibility { file_bytes: usize, required: usize },
    #[error("demand vector has {got} entries for {users} users")]
    DemandLength { got: usize, users: usize },
    #[error("user {user} demands file {file}, outside 1..={n_files}")]
    DemandOutOfRange {
        user: usize,
        file: usize,
        n_files: usize,
    },
    #[error("symbol {symbol} cannot be routed: its covering column labels share no relay")]
    NotCpda { symbol: u32 },
    #[error("library files must be non-empty and of equal size")]
    RaggedLibrary,
    #[error("plan and library disagree: {0}")]
    PlanMismatch(String),
}

/// `N` files of `E` bits each, held as bytes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Library {
    file_bytes: usize,
    files: Vec<Vec<u8>>,
}

impl Library {
    pub fn new(files: Vec<Vec<u8>>) -> Result<Self, SimError> {
        let file_bytes = files.first().map(Vec::len).ok_or(SimError::RaggedLibrary)?;
        if files.iter().any(|f| f.len() != file_bytes) {
            return Err(SimError::RaggedLibrary);
        }
        Ok(Library { file_bytes, files })
    }

    pub fn random<R: RngCore>(n_files: usize, file_bytes: usize, rng: &mut R) -> Self {
        let files = (0..n_files)
            .map(|_| {
                let mut f = vec![0u8; file_bytes];
                rng.fill_bytes(&mut f);
                f
            })
            .collect();
        Library { file_bytes, files }
    }

    pub fn zeros(n_files: usize, file_bytes: usize) -> Self {
        Library {
            file_bytes,
            files: vec![vec![0u8; file_bytes]; n_files],
        }
    }

    pub fn n_files(&self) -> usize {
        self.files.len()
    }

    pub fn file_bytes(&self) -> usize {
        self.file_bytes
    }

    /// `E`, the file size in bits.
    pub fn file_bits(&self) -> u64 {
        self.file_bytes as u64 * 8
    }

    /// File `n`, 1-based.
    pub fn file(&self, n: usize) -> &[u8] {
        &self.files[n - 1]
    }

    fn packet(&self, id: PacketId, packet_bytes: usize) -> &[u8] {
        let start = (id.packet - 1) * packet_bytes;
        &self.file(id.file)[start..start + packet_bytes]
    }
}

/// `W_{file, packet}`, both 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PacketId {
    pub file: usize,
    pub packet: usize,
}

impl fmt::Display for PacketId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "W_{{{},{}}}", self.file, self.packet)
    }
}

/// `F_rows * lcm{w_s}`: the number of equal pieces a file must split into.
pub fn effective_subpacketization(array: &PdaArray<u32>) -> usize {
    array.f() * array.symbol_index().width_lcm()
}

/// Smallest admissible file size scaled by `unit_bytes`.
pub fn file_bytes_for(array: &PdaArray<u32>, unit_bytes: usize) -> usize {
    effective_subpacketization(array) * unit_bytes
}

fn check_divisible(array: &PdaArray<u32>, library: &Library) -> Result<usize, SimError> {
    let required = effective_subpacketization(array);
    if required == 0 || !library.file_bytes.is_multiple_of(required) {
        return Err(SimError::Divisibility {
            file_bytes: library.file_bytes,
            required,
        });
    }
    Ok(library.file_bytes / array.f())
}

/// What one user holds after placement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UserCache {
    pub label: RelaySet,
    pub packets: BTreeMap<PacketId, Vec<u8>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CacheContents {
    pub packet_bytes: usize,
    pub users: Vec<UserCache>,
}

impl CacheContents {
    /// Cached bits of one user.
    pub fn user_bits(&self, user: usize) -> u64 {
        self.users[user].packets.len() as u64 * self.packet_bytes as u64 * 8
    }
}

/// User `k` stores `W_{n,j}` for every file `n` and every row `j` with a star in column `k`.
pub fn place(array: &PdaArray<u32>, library: &Library) -> Result<CacheContents, SimError> {
    let packet_bytes = check_divisible(array, library)?;
    let users = (0..array.k())
        .map(|k| {
            let mut packets = BTreeMap::new();
            for j in (0..array.f()).filter(|&j| array.get(j, k).is_star()) {
                for n in 1..=library.n_files() {
                    let id = PacketId {
                        file: n,
                        packet: j + 1,
                    };
                    packets.insert(id, library.packet(id, packet_bytes).to_vec());
                }
            }
            UserCache {
                label: array.col_label(k),
                packets,
            }
        })
        .collect();
    Ok(CacheContents {
        packet_bytes,
        users,
    })
}

/// Requested file (1-based) per user, users in column order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DemandVector(Vec<usize>);

impl DemandVector {
    pub fn new(demands: Vec<usize>, n_files: usize) -> Result<Self, SimError> {
        if let Some((user, &file)) = demands.iter().find_position(|&&d| d == 0 || d > n_files) {
            return Err(SimError::DemandOutOfRange {
                user,
                file,
                n_files,
            });
        }
        Ok(DemandVector(demands))
    }

    /// User `k` (0-based) asks for file `k + 1`.
    pub fn distinct(users: usize) -> Self {
        DemandVector((1..=users).collect())
    }

    pub fn random<R: Rng>(users: usize, n_files: usize, rng: &mut R) -> Self {
        DemandVector((0..users).map(|_| rng.random_range(1..=n_files)).collect())
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn check_len(&self, users: usize) -> Result<(), SimError> {
        if self.0.len() != users {
            return Err(SimError::DemandLength {
                got: self.0.len(),
                users,
            });
        }
        Ok(())
    }
}

/// One summand `W_{d_k, j}` of a coded signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Term {
    pub user: usize,
    pub label: RelaySet,
    pub packet: PacketId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanEntry {
    pub symbol: u32,
    /// Terms of `X_s`, ordered by user (column).
    pub terms: Vec<Term>,
    /// `I_s` in ascending relay order; sub-signal `l` goes through `routing[l]`.
    pub routing: Vec<usize>,
}

impl PlanEntry {
    pub fn width(&self) -> usize {
        self.routing.len()
    }

    /// e.g. `W_{1,3} ⊕ W_{2,4} ⊕ W_{3,5}`.
    pub fn composition(&self) -> String {
        self.terms.iter().map(|t| t.packet.to_string()).join(" ⊕ ")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeliveryPlan {
    pub h: usize,
    pub rows: usize,
    pub entries: Vec<PlanEntry>,
}

/// Builds one coded signal per symbol, in ascending symbol order.
pub fn plan_delivery(
    array: &PdaArray<u32>,
    demands: &DemandVector,
) -> Result<DeliveryPlan, SimError> {
    demands.check_len(array.k())?;
    let index = array.symbol_index();
    if let Some(bad) = index.empty_intersections().next() {
        return Err(SimError::NotCpda { symbol: bad.symbol });
    }
    let mut entries: Vec<PlanEntry> = index
        .iter()
        .map(|info| {
            let mut terms: Vec<Term> = info
                .occurrences
                .iter()
                .map(|&(j, k)| Term {
                    user: k,
                    label: array.col_label(k),
                    packet: PacketId {
                        file: demands.0[k],
                        packet: j + 1,
                    },
                })
                .collect();
            terms.sort_by_key(|t| (t.user, t.packet.packet));
            PlanEntry {
                symbol: info.symbol,
                terms,
                routing: info.intersection.to_vec(),
            }
        })
        .collect();
    entries.sort_by_key(|e| e.symbol);
    Ok(DeliveryPlan {
        h: array.h(),
        rows: array.f(),
        entries,
    })
}

/// Byte counts of one delivery run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransmissionLog {
    /// Bits on the server-to-relay link, index `h - 1`.
    pub relay_bits: Vec<u64>,
    /// Bits each user receives over all its relays.
    pub user_bits: Vec<u64>,
    /// Per plan entry: `(relay, sub-signal index)` pairs, sub-signals 1-based.
    pub carriers: Vec<Vec<(usize, usize)>>,
    /// Bits of every coded signal before splitting, summed.
    pub server_bits: u64,
}

impl TransmissionLog {
    pub fn relay_bits(&self, relay: usize) -> u64 {
        self.relay_bits[relay - 1]
    }
}

/// Sub-signals a user has heard, keyed by `(symbol, relay)`.
pub type Received = HashMap<(u32, usize), Vec<u8>>;

#[derive(Debug, Clone)]
pub struct Execution {
    pub log: TransmissionLog,
    /// Per user (column order).
    pub received: Vec<Received>,
}

fn xor_into(acc: &mut [u8], other: &[u8]) {
    for (a, b) in acc.iter_mut().zip(other) {
        *a ^= b;
    }
}

/// Runs the delivery phase of `plan` against `library`.
pub fn execute(
    plan: &DeliveryPlan,
    library: &Library,
    users: &[RelaySet],
) -> Result<Execution, SimError> {
    if plan.rows == 0 || !library.file_bytes.is_multiple_of(plan.rows) {
        return Err(SimError::PlanMismatch(format!(
            "{} bytes cannot be cut into {} packets",
            library.file_bytes, plan.rows
        )));
    }
    let packet_bytes = library.file_bytes / plan.rows;
    let mut relay_bits = vec![0u64; plan.h];
    let mut user_bits = vec![0u64; users.len()];
    let mut received: Vec<Received> = vec![HashMap::new(); users.len()];
    let mut carriers = Vec::with_capacity(plan.entries.len());
    let mut server_bits = 0u64;

    for entry in &plan.entries {
        let w = entry.width();
        if w == 0 || !packet_bytes.is_multiple_of(w) {
            return Err(SimError::PlanMismatch(format!(
                "packet of {packet_bytes} bytes cannot be split into {w} sub-signals for symbol {}",
                entry.symbol
            )));
        }
        let mut signal = vec![0u8; packet_bytes];
        for term in &entry.terms {
            if term.packet.file == 0
                || term.packet.file > library.n_files()
                || term.packet.packet > plan.rows
            {
                return Err(SimError::PlanMismatch(format!(
                    "{} is not in the library",
                    term.packet
                )));
            }
            xor_into(&mut signal, library.packet(term.packet, packet_bytes));
        }
        server_bits += packet_bytes as u64 * 8;

        let piece = packet_bytes / w;
        let mut carried = Vec::with_capacity(w);
        for (l, (&relay, chunk)) in entry.routing.iter().zip(signal.chunks(piece)).enumerate() {
            relay_bits[relay - 1] += piece as u64 * 8;
            carried.push((relay, l + 1));
            for (u, label) in users.iter().enumerate() {
                if label.contains(relay) {
                    received[u].insert((entry.symbol, relay), chunk.to_vec());
                    user_bits[u] += piece as u64 * 8;
                }
            }
        }
        carriers.push(carried);
    }

    Ok(Execution {
        log: TransmissionLog {
            relay_bits,
            user_bits,
            carriers,
            server_bits,
        },
        received,
    })
}

/// Why a user could not rebuild its file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeFailure {
    pub user: usize,
    pub packet: usize,
    pub reason: String,
}

impl fmt::Display for DecodeFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "user {} packet {}: {}",
            self.user + 1,
            self.packet,
            self.reason
        )
    }
}

#[derive(Debug, Clone)]
pub struct DecodeOutcome {
    /// Reconstructed file per user; `None` where decoding stopped early.
    pub files: Vec<Option<Vec<u8>>>,
    pub first_failure: Option<DecodeFailure>,
}

impl DecodeOutcome {
    pub fn success(&self) -> bool {
        self.first_failure.is_none()
    }
}

/// Each user rebuilds `W_{d_k}` from its cache and the sub-signals it heard,
/// then the result is compared with the library byte for byte.
pub fn decode_all(
    array: &PdaArray<u32>,
    demands: &DemandVector,
    caches: &CacheContents,
    received: &[Received],
    library: &Library,
) -> Result<DecodeOutcome, SimError> {
    demands.check_len(array.k())?;
    let index = array.symbol_index();
    let packet_bytes = caches.packet_bytes;
    let mut files = Vec::with_capacity(array.k());
    let mut first_failure = None;
    if caches.users.len() != array.k() || received.len() != array.k() {
        return Err(SimError::PlanMismatch(format!(
            "{} caches and {} receive logs for {} users",
            caches.users.len(),
            received.len(),
            array.k()
        )));
    }

    for (k, (cache, heard)) in caches.users.iter().zip(received).enumerate() {
        let want = demands.0[k];
        let result =
            (0..array.f()).try_fold(Vec::with_capacity(library.file_bytes), |mut file, j| {
                let packet = j + 1;
                let fail = |reason: String| DecodeFailure {
                    user: k,
                    packet,
                    reason,
                };
                let piece = match array.get(j, k) {
                    Entry::Star => cache
                        .packets
                        .get(&PacketId { file: want, packet })
                        .cloned()
                        .ok_or_else(|| fail("cached packet missing".into()))?,
                    Entry::Symbol(s) => {
                        let info = index.get(s).expect("indexed symbol");
                        let mut signal = Vec::with_capacity(packet_bytes);
                        for relay in info.intersection.iter() {
                            let part = heard.get(&(*s, relay)).ok_or_else(|| {
                                fail(format!("no sub-signal of X_{s} from relay {relay}"))
                            })?;
                            signal.extend_from_slice(part);
                        }
                        if signal.len() != packet_bytes {
                            return Err(fail(format!(
                                "X_{s} reassembled to {} bytes",
                                signal.len()
                            )));
                        }
                        for &(j2, k2) in &info.occurrences {
                            if (j2, k2) == (j, k) {
                                continue;
                            }
                            let other = PacketId {
                                file: demands.0[k2],
                                packet: j2 + 1,
                            };
                            let cached = cache.packets.get(&other).ok_or_else(|| {
                                fail(format!("{other} needed to decode X_{s} is not cached"))
                            })?;
                            xor_into(&mut signal, cached);
                        }
                        signal
                    }
                };
                file.extend_from_slice(&piece);
                Ok(file)
            });
        match result {
            Ok(file) => {
                if first_failure.is_none() {
                    if let Some(pos) = (0..array.f()).find(|&j| {
                        let range = j * packet_bytes..(j + 1) * packet_bytes;
                        file[range.clone()] != library.file(want)[range]
                    }) {
                        first_failure = Some(DecodeFailure {
                            user: k,
                            packet: pos + 1,
                            reason: "decoded bytes differ from the library".into(),
                        });
                    }
                }
                files.push(Some(file));
            }
            Err(e) => {
                first_failure.get_or_insert(e);
                files.push(None);
            }
        }
    }
    Ok(DecodeOutcome {
        files,
        first_failure,
    })
}

/// `R_h = bits sent to relay h / E`, exactly.
pub fn measure_rates(log: &TransmissionLog, file_bits: u64) -> Vec<BigRational> {
    log.relay_bits
        .iter()
        .map(|&b| BigRational::new(BigInt::from(b), BigInt::from(file_bits)))
        .collect()
}

/// Knobs for [`simulate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimulationConfig {
    pub n_files: usize,
    pub unit_bytes: usize,
    pub seed: u64,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            n_files: 1,
            unit_bytes: DEFAULT_UNIT_BYTES,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimulationReport {
    pub file_bytes: usize,
    pub rows: usize,
    pub f_eff: usize,
    pub w_histogram: BTreeMap<usize, usize>,
    pub plan: DeliveryPlan,
    pub log: TransmissionLog,
    pub rates: Vec<BigRational>,
    pub decode: DecodeOutcome,
}

impl SimulationReport {
    pub fn decode_ok(&self) -> bool {
        self.decode.success()
    }

    /// Per-relay lines plus a status line, stable across runs.
    pub fn machine_lines(&self) -> Vec<String> {
        let mut out = vec![
            format!("E_BITS={}", self.file_bytes * 8),
            format!("F_ROWS={} F_EFF={}", self.rows, self.f_eff),
            format!(
                "W_HIST={}",
                self.w_histogram
                    .iter()
                    .map(|(w, n)| format!("{w}:{n}"))
                    .join(",")
            ),
        ];
        for (i, rate) in self.rates.iter().enumerate() {
            out.push(format!(
                "RELAY={} BITS={} RATE={}",
                i + 1,
                self.log.relay_bits[i],
                rate
            ));
        }
        out.push(match &self.decode.first_failure {
            None => "DECODE OK".to_string(),
            Some(f) => format!("DECODE FAIL {f}"),
        });
        out
    }

    /// Per-symbol rows in the layout `slot | X_s = ... | h | X_{s,h}`.
    pub fn table(&self) -> String {
        let mut out = String::from("slot | coded signal | relay | transmitted\n");
        for (slot, entry) in self.plan.entries.iter().enumerate() {
            for (i, &h) in entry.routing.iter().enumerate() {
                let signal = if i == 0 {
                    format!("X_{} = {}", entry.symbol, entry.composition())
                } else {
                    String::new()
                };
                let slot_text = if i == 0 {
                    (slot + 1).to_string()
                } else {
                    String::new()
                };
                out.push_str(&format!(
                    "{slot_text} | {signal} | h_{h} | X_{{{},{h}}}\n",
                    entry.symbol
                ));
            }
        }
        out
    }
}

/// Seeded end-to-end run: random library, placement, delivery, decoding.
pub fn simulate(
    array: &PdaArray<u32>,
    demands: &DemandVector,
    config: SimulationConfig,
) -> Result<SimulationReport, SimError> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let file_bytes = file_bytes_for(array, config.unit_bytes);
    let library = Library::random(config.n_files, file_bytes, &mut rng);
    simulate_with_library(array, demands, &library)
}

pub fn simulate_with_library(
    array: &PdaArray<u32>,
    demands: &DemandVector,
    library: &Library,
) -> Result<SimulationReport, SimError> {
    if let Some((user, &file)) = demands.0.iter().find_position(|&&d| d > library.n_files()) {
        return Err(SimError::DemandOutOfRange {
            user,
            file,
            n_files: library.n_files(),
        });
    }
    let caches = place(array, library)?;
    let plan = plan_delivery(array, demands)?;
    let exec = execute(&plan, library, array.col_labels())?;
    let decode = decode_all(array, demands, &caches, &exec.received, library)?;
    let index = array.symbol_index();
    Ok(SimulationReport {
        file_bytes: library.file_bytes(),
        rows: array.f(),
        f_eff: array.f() * index.width_lcm(),
        w_histogram: index.width_histogram(),
        rates: measure_rates(&exec.log, library.file_bits()),
        plan,
        log: exec.log,
        decode,
    })
}
