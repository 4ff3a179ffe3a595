use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StorageModel {
    Decentralized,
    P2p,
    Centralized,
}

impl StorageModel {
    pub const ALL: [StorageModel; 3] = [StorageModel::Decentralized, StorageModel::P2p, StorageModel::Centralized];

    pub fn as_str(self) -> &'static str {
        match self {
            StorageModel::Decentralized => "decentralized",
            StorageModel::P2p => "p2p",
            StorageModel::Centralized => "centralized",
        }
    }
}

impl std::str::FromStr for StorageModel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| format!("unknown storage model {s:?}"))
    }
}

/// Workload and cost parameters. The defaults are calibrated, not measured:
/// they are chosen so the relative behavior of the three storage models is
/// visible at 100 to 500 patients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub model: StorageModel,
    pub patients: usize,
    pub tx_per_patient: usize,
    /// Mean gap between one patient's submissions (exponential).
    pub think_time_ms: f64,
    pub hop_delay_ms: f64,
    /// Each hop delay is uniform in `hop_delay_ms ± hop_jitter_ms`.
    pub hop_jitter_ms: f64,
    /// Leading-zero bits; expected attempts per block are 2^difficulty.
    pub difficulty: u8,
    pub hash_cost_ms: f64,
    /// Validation and propagation cost per transaction in a block.
    pub block_tx_cost_ms: f64,
    pub max_block_txs: usize,
    /// Mean service time of one relay forwarding one message.
    pub relay_service_ms: f64,
    /// Overlay fan-out; a route crosses log_fanout(patients) relays on average.
    pub relay_fanout: f64,
    /// Central server service time: base + per_patient * patients.
    pub server_base_ms: f64,
    pub server_per_patient_ms: f64,
    /// Waiting-room size of every relay and server queue; arrivals beyond it
    /// are dropped.
    pub queue_capacity: usize,
    pub mempool_capacity: usize,
    pub seed: u64,
}

impl SimConfig {
    pub fn new(model: StorageModel, patients: usize, seed: u64) -> Self {
        Self {
            model,
            patients,
            tx_per_patient: 10,
            think_time_ms: 1000.0,
            hop_delay_ms: 40.0,
            hop_jitter_ms: 5.0,
            difficulty: 12,
            hash_cost_ms: 0.02,
            block_tx_cost_ms: 1.0,
            max_block_txs: 2000,
            relay_service_ms: 0.5,
            relay_fanout: 4.0,
            server_base_ms: 0.2,
            server_per_patient_ms: 0.006,
            queue_capacity: 200,
            mempool_capacity: 100_000,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        let non_negative = [
            ("think_time_ms", self.think_time_ms),
            ("hop_delay_ms", self.hop_delay_ms),
            ("hop_jitter_ms", self.hop_jitter_ms),
            ("hash_cost_ms", self.hash_cost_ms),
            ("block_tx_cost_ms", self.block_tx_cost_ms),
            ("relay_service_ms", self.relay_service_ms),
            ("server_base_ms", self.server_base_ms),
            ("server_per_patient_ms", self.server_per_patient_ms),
        ];
        if let Some((name, _)) = non_negative.iter().find(|(_, v)| !(v.is_finite() && *v >= 0.0)) {
            return Err(format!("{name} must be finite and non-negative"));
        }
        if self.patients == 0 {
            return Err("patients must be at least 1".into());
        }
        if self.hop_jitter_ms > self.hop_delay_ms {
            return Err("hop jitter cannot exceed the hop delay".into());
        }
        if self.max_block_txs == 0 || self.queue_capacity == 0 || self.mempool_capacity == 0 {
            return Err("block size and queue capacity must be positive".into());
        }
        if self.relay_fanout <= 1.0 {
            return Err("relay fan-out must exceed 1".into());
        }
        if self.difficulty > 32 {
            return Err("difficulty must lie in 0..=32".into());
        }
        Ok(())
    }

    /// Expected wall time to mine one block.
    pub fn mean_block_interval_ms(&self) -> f64 {
        2f64.powi(i32::from(self.difficulty)) * self.hash_cost_ms
    }

    pub fn mean_route_hops(&self) -> f64 {
        (self.patients as f64).ln() / self.relay_fanout.ln()
    }

    pub fn server_service_ms(&self) -> f64 {
        self.server_base_ms + self.server_per_patient_ms * self.patients as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub model: StorageModel,
    pub patients: usize,
    pub seed: u64,
    pub submitted: usize,
    pub completed: usize,
    pub dropped: usize,
    pub mean_latency_ms: f64,
    pub median_latency_ms: f64,
    pub p95_latency_ms: f64,
    /// Completed transactions per simulated second.
    pub throughput_tps: f64,
    pub duration_ms: f64,
}

/// Independent random streams, one per purpose, so that changing one model
/// does not shift the draws seen by another.
struct Streams {
    arrivals: ChaCha8Rng,
    hops: ChaCha8Rng,
    mining: ChaCha8Rng,
    routes: ChaCha8Rng,
    service: ChaCha8Rng,
}

impl Streams {
    fn new(seed: u64) -> Self {
        let stream = |n: u64| {
            let mut r = ChaCha8Rng::seed_from_u64(seed);
            r.set_stream(n);
            r
        };
        Self { arrivals: stream(1), hops: stream(2), mining: stream(3), routes: stream(4), service: stream(5) }
    }
}

#[derive(Debug, Clone, Copy)]
enum Event {
    /// Transaction reaches its next queue (mempool, relay or server).
    Enter(usize),
    /// A relay or the server finished serving the head of its queue.
    Served(usize),
    BlockFound,
    BlockDone,
    Complete(usize),
}

struct Scheduled {
    time: f64,
    seq: u64,
    event: Event,
}

impl PartialEq for Scheduled {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Scheduled {}

impl PartialOrd for Scheduled {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Scheduled {
    // Reversed so the max-heap pops the earliest event; equal times pop in
    // scheduling order.
    fn cmp(&self, other: &Self) -> Ordering {
        other.time.total_cmp(&self.time).then(other.seq.cmp(&self.seq))
    }
}

#[derive(Default)]
struct Queue {
    waiting: VecDeque<usize>,
    busy: bool,
}

struct Sim<'a> {
    cfg: &'a SimConfig,
    rng: Streams,
    heap: BinaryHeap<Scheduled>,
    seq: u64,
    submit: Vec<f64>,
    done: Vec<Option<f64>>,
    dropped: usize,
    /// P2P only: remaining relays of each transaction's route.
    routes: Vec<VecDeque<usize>>,
    queues: Vec<Queue>,
    mempool: VecDeque<usize>,
    in_block: Vec<usize>,
    arrivals_left: usize,
}

impl<'a> Sim<'a> {
    fn schedule(&mut self, time: f64, event: Event) {
        self.seq += 1;
        self.heap.push(Scheduled { time, seq: self.seq, event });
    }

    fn hop(&mut self) -> f64 {
        let j = self.cfg.hop_jitter_ms;
        let offset = if j > 0.0 { self.rng.hops.random_range(-j..=j) } else { 0.0 };
        self.cfg.hop_delay_ms + offset
    }

    fn exp(rng: &mut ChaCha8Rng, mean: f64) -> f64 {
        if mean <= 0.0 {
            return 0.0;
        }
        Exp::new(1.0 / mean).expect("positive rate").sample(rng)
    }

    /// Patient p's submissions, patient by patient, so every model sees the
    /// same arrival times for a given seed.
    fn generate_arrivals(&mut self) {
        for _ in 0..self.cfg.patients {
            let mut t = 0.0;
            for _ in 0..self.cfg.tx_per_patient {
                t += Self::exp(&mut self.rng.arrivals, self.cfg.think_time_ms);
                self.submit.push(t);
            }
        }
        let n = self.submit.len();
        self.done = vec![None; n];
        self.arrivals_left = n;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| self.submit[a].total_cmp(&self.submit[b]).then(a.cmp(&b)));
        for tx in order {
            let t = self.submit[tx] + self.hop();
            self.schedule(t, Event::Enter(tx));
        }
    }

    fn route(&mut self) -> VecDeque<usize> {
        let mean = self.cfg.mean_route_hops().max(1.0);
        let base = mean.floor();
        let extra = self.rng.routes.random_bool((mean - base).clamp(0.0, 1.0));
        let one_way = base as usize + usize::from(extra);
        // There and back through independently chosen relays.
        (0..2 * one_way).map(|_| self.rng.routes.random_range(0..self.cfg.patients)).collect()
    }

    fn service_time(&mut self) -> f64 {
        let mean = match self.cfg.model {
            StorageModel::Centralized => self.cfg.server_service_ms(),
            _ => self.cfg.relay_service_ms,
        };
        Self::exp(&mut self.rng.service, mean)
    }

    fn join_queue(&mut self, now: f64, q: usize, tx: usize) {
        let queue = &mut self.queues[q];
        if !queue.busy {
            queue.busy = true;
            queue.waiting.push_back(tx);
            let s = self.service_time();
            self.schedule(now + s, Event::Served(q));
        } else if queue.waiting.len() > self.cfg.queue_capacity {
            self.dropped += 1;
        } else {
            queue.waiting.push_back(tx);
        }
    }

    /// Sends a served message onward: to the next relay of its route, or
    /// back to the patient once the route is exhausted.
    fn forward(&mut self, now: f64, tx: usize) {
        let t = now + self.hop();
        if self.cfg.model == StorageModel::P2p && !self.routes[tx].is_empty() {
            self.schedule(t, Event::Enter(tx));
        } else {
            self.schedule(t, Event::Complete(tx));
        }
    }

    fn start_mining(&mut self, now: f64) {
        let dt = Self::exp(&mut self.rng.mining, self.cfg.mean_block_interval_ms());
        self.schedule(now + dt, Event::BlockFound);
    }

    fn run(mut self) -> SimResult {
        self.generate_arrivals();
        match self.cfg.model {
            StorageModel::Decentralized => {
                if self.arrivals_left > 0 {
                    self.start_mining(0.0);
                }
            }
            StorageModel::P2p => {
                self.queues = (0..self.cfg.patients).map(|_| Queue::default()).collect();
                let n = self.submit.len();
                self.routes = (0..n).map(|_| self.route()).collect();
            }
            StorageModel::Centralized => self.queues = vec![Queue::default()],
        }
        let mut last = 0.0f64;
        while let Some(Scheduled { time, event, .. }) = self.heap.pop() {
            last = last.max(time);
            match (self.cfg.model, event) {
                (_, Event::Complete(tx)) => self.done[tx] = Some(time),
                (StorageModel::Decentralized, Event::Enter(tx)) => {
                    self.arrivals_left -= 1;
                    if self.mempool.len() >= self.cfg.mempool_capacity {
                        self.dropped += 1;
                    } else {
                        self.mempool.push_back(tx);
                    }
                }
                (StorageModel::Decentralized, Event::BlockFound) => {
                    let n = self.mempool.len().min(self.cfg.max_block_txs);
                    self.in_block = self.mempool.drain(..n).collect();
                    let cost = self.cfg.block_tx_cost_ms * n as f64;
                    self.schedule(time + cost, Event::BlockDone);
                }
                (StorageModel::Decentralized, Event::BlockDone) => {
                    for tx in std::mem::take(&mut self.in_block) {
                        let t = time + self.hop();
                        self.schedule(t, Event::Complete(tx));
                    }
                    if self.arrivals_left > 0 || !self.mempool.is_empty() {
                        self.start_mining(time);
                    }
                }
                (StorageModel::P2p, Event::Enter(tx)) => {
                    let relay = self.routes[tx].pop_front().expect("routes cross at least two relays");
                    self.join_queue(time, relay, tx);
                }
                (StorageModel::Centralized, Event::Enter(tx)) => self.join_queue(time, 0, tx),
                (_, Event::Served(q)) => {
                    let tx = self.queues[q].waiting.pop_front().expect("served queue holds its head");
                    if self.queues[q].waiting.is_empty() {
                        self.queues[q].busy = false;
                    } else {
                        let s = self.service_time();
                        self.schedule(time + s, Event::Served(q));
                    }
                    self.forward(time, tx);
                }
                _ => unreachable!("event does not occur in this model"),
            }
        }
        self.finish(last)
    }

    fn finish(self, duration_ms: f64) -> SimResult {
        let mut lat: Vec<f64> = self
            .done
            .iter()
            .zip(&self.submit)
            .filter_map(|(d, s)| d.map(|d| d - s))
            .collect();
        lat.sort_by(f64::total_cmp);
        let completed = lat.len();
        let pick = |q: f64| {
            if lat.is_empty() {
                0.0
            } else {
                lat[((q * lat.len() as f64).ceil() as usize).clamp(1, lat.len()) - 1]
            }
        };
        let mean = if lat.is_empty() { 0.0 } else { lat.iter().sum::<f64>() / completed as f64 };
        SimResult {
            model: self.cfg.model,
            patients: self.cfg.patients,
            seed: self.cfg.seed,
            submitted: self.submit.len(),
            completed,
            dropped: self.dropped,
            mean_latency_ms: mean,
            median_latency_ms: pick(0.5),
            p95_latency_ms: pick(0.95),
            throughput_tps: if duration_ms > 0.0 { completed as f64 / (duration_ms / 1000.0) } else { 0.0 },
            duration_ms,
        }
    }
}

/// Runs one simulation. The result is a pure function of `cfg`.
pub fn run(cfg: &SimConfig) -> Result<SimResult, String> {
    cfg.validate()?;
    let sim = Sim {
        cfg,
        rng: Streams::new(cfg.seed),
        heap: BinaryHeap::new(),
        seq: 0,
        submit: Vec::with_capacity(cfg.patients * cfg.tx_per_patient),
        done: Vec::new(),
        dropped: 0,
        routes: Vec::new(),
        queues: Vec::new(),
        mempool: VecDeque::new(),
        in_block: Vec::new(),
        arrivals_left: 0,
    };
    Ok(sim.run())
}
