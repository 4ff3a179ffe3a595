mod store;

use std::fs::File;
use std::io::{self, BufWriter};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use hdms_core::contract::{ContractCall, Value};
use hdms_core::crypto::{generate_keypair, generate_keypair_from_entropy, KeyPair};
use hdms_core::ledger::{Chain, DEFAULT_DIFFICULTY};
use hdms_core::net;
use hdms_core::prediction::{self, Classifier, ScaConfig, ScaWknnModel, DEFAULT_K, K_SWEEP, TRAIN_RATIO};
use hdms_core::registry::{encode_record, ActorKind, Node};

use store::ChainLock;

const DEFAULT_DATASET: &str = "data/heart_cleveland.csv";

#[derive(Parser)]
#[command(name = "hdms", version, about = "Patient-record ledger, heart-disease classifier and network simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ChainArgs {
    /// Chain file (JSON array of blocks).
    #[arg(long)]
    chain: PathBuf,
}

#[derive(Args)]
struct WriteArgs {
    #[command(flatten)]
    chain: ChainArgs,
    /// Signing key file written by `keygen`.
    #[arg(long)]
    key: PathBuf,
    /// Block timestamp; defaults to one past the current tip.
    #[arg(long)]
    timestamp: Option<u64>,
}

#[derive(Args)]
struct MlArgs {
    #[arg(long, default_value = DEFAULT_DATASET)]
    dataset: PathBuf,
    #[arg(long, default_value_t = DEFAULT_K)]
    k: usize,
    /// Population size.
    #[arg(long, default_value_t = 20)]
    pop: usize,
    /// Iterations.
    #[arg(long, default_value_t = 50)]
    iters: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

impl MlArgs {
    fn config(&self) -> ScaConfig<f64> {
        ScaConfig::new(self.pop, self.iters, self.k, self.seed)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Admin,
    Patient,
    Cp,
}

impl From<Kind> for ActorKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Admin => ActorKind::Admin,
            Kind::Patient => ActorKind::Patient,
            Kind::Cp => ActorKind::Cp,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Create a key file. With --seed the pair is reproducible.
    Keygen {
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Register the signing key under an actor id. The first actor must be the admin.
    Register {
        #[command(flatten)]
        w: WriteArgs,
        #[arg(long)]
        id: String,
        #[arg(long, value_enum)]
        kind: Kind,
    },
    /// Seal and store a new version of a patient record.
    UpsertRecord {
        #[command(flatten)]
        w: WriteArgs,
        #[arg(long)]
        patient: String,
        /// Thirteen comma-separated feature values.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        features: Vec<f64>,
    },
    /// Ask a patient for read access (signed by the cardiac professional).
    RequestAccess {
        #[command(flatten)]
        w: WriteArgs,
        #[arg(long)]
        cp: String,
        #[arg(long)]
        patient: String,
    },
    /// Answer a pending request (signed by the patient).
    GrantAccess {
        #[command(flatten)]
        w: WriteArgs,
        #[arg(long)]
        patient: String,
        #[arg(long)]
        cp: String,
    },
    /// Move an actor to the attacker list (signed by the admin).
    Evict {
        #[command(flatten)]
        w: WriteArgs,
        #[arg(long)]
        id: String,
    },
    /// Mine an empty block, creating the chain with a genesis block if the file is absent.
    Mine {
        #[command(flatten)]
        chain: ChainArgs,
        #[arg(long, default_value_t = DEFAULT_DIFFICULTY)]
        difficulty: u8,
        #[arg(long)]
        timestamp: Option<u64>,
    },
    /// Check every link, hash, proof of work and signature.
    VerifyChain {
        #[command(flatten)]
        chain: ChainArgs,
    },
    /// Execute a contract method and record the call on chain.
    ContractCall {
        #[command(flatten)]
        w: WriteArgs,
        #[arg(long)]
        contract: String,
        #[arg(long)]
        method: String,
        /// JSON array of unsigned integers and strings.
        #[arg(long, default_value = "[]")]
        args: String,
        #[arg(long)]
        caller: String,
    },
    /// Classify a record, either given directly or decrypted from the chain.
    Predict {
        #[command(flatten)]
        ml: MlArgs,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with_all = ["chain", "patient"])]
        features: Option<Vec<f64>>,
        #[arg(long, requires_all = ["key", "cp", "patient"])]
        chain: Option<PathBuf>,
        #[arg(long)]
        key: Option<PathBuf>,
        #[arg(long)]
        cp: Option<String>,
        #[arg(long)]
        patient: Option<String>,
    },
    /// Score KNN, WKNN and SCA-WKNN on a 70:30 split.
    BenchMl {
        #[command(flatten)]
        ml: MlArgs,
        /// CSV with one row per classifier.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Repeat for k in 1, 3, 5, 7 and write the rows here.
        #[arg(long)]
        sweep_out: Option<PathBuf>,
        /// Best-fitness trace per iteration.
        #[arg(long)]
        trace_out: Option<PathBuf>,
    },
    /// Compare storage models over a grid of patient counts and seeds.
    Simulate {
        #[arg(long, value_delimiter = ',', default_values_t = net::DEFAULT_PATIENT_GRID)]
        patients: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_values_t = net::DEFAULT_SEEDS)]
        seed: Vec<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Property sheet of three consensus families.
    ConsensusTable {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn emit(value: serde_json::Value) {
    println!("{value}");
}

fn csv_out(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
}

/// Loads the chain under lock, lets `f` queue transactions on the node,
/// mines them into one block and saves the chain.
fn with_node<T>(w: &WriteArgs, f: impl FnOnce(&mut Node, &KeyPair, u64) -> Result<T>) -> Result<(T, serde_json::Value)> {
    let path = &w.chain.chain;
    let _lock = ChainLock::acquire(path)?;
    let key = store::load_key(&w.key)?;
    let mut node = Node::from_chain(store::load_chain(path)?)?;
    let ts = w.timestamp.unwrap_or(node.chain().tip().timestamp + 1);
    let out = f(&mut node, &key, ts)?;
    let block = node.mine(ts)?;
    let summary = json!({ "block_index": block.index, "block_hash": block.block_hash, "nonce": block.nonce });
    store::save_chain(path, node.chain())?;
    eprintln!("mined block {} into {}", node.chain().tip().index, path.display());
    Ok((out, summary))
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Keygen { seed, out } => {
            let kp = seed.map_or_else(generate_keypair_from_entropy, generate_keypair);
            let body = serde_json::to_vec_pretty(&kp)?;
            store::write_atomic(&out, &body)?;
            eprintln!("wrote key file {}", out.display());
            emit(json!({ "public_key": kp.public_key, "fingerprint": kp.public_key.short_fingerprint() }));
        }
        Command::Register { w, id, kind } => {
            let (tx, block) = with_node(&w, |n, kp, ts| Ok(n.register_actor(kp, &id, kind.into(), ts)?))?;
            emit(json!({ "registered": id, "tx_hash": tx, "block": block }));
        }
        Command::UpsertRecord { w, patient, features } => {
            let row = encode_record(&patient, &features)?;
            let (version, block) = with_node(&w, |n, kp, ts| Ok(n.upsert_patient_data(kp, &patient, row.as_bytes(), ts)?))?;
            emit(json!({ "patient": patient, "version": version, "block": block }));
        }
        Command::RequestAccess { w, cp, patient } => {
            let (tx, block) = with_node(&w, |n, kp, ts| Ok(n.request_access(kp, &cp, &patient, ts)?))?;
            emit(json!({ "requester": cp, "patient": patient, "tx_hash": tx, "block": block }));
        }
        Command::GrantAccess { w, patient, cp } => {
            let (tx, block) = with_node(&w, |n, kp, ts| Ok(n.grant_access(kp, &patient, &cp, ts)?))?;
            emit(json!({ "patient": patient, "granted": cp, "tx_hash": tx, "block": block }));
        }
        Command::Evict { w, id } => {
            let (tx, block) = with_node(&w, |n, kp, ts| Ok(n.evict_attacker(kp, &id, ts)?))?;
            emit(json!({ "evicted": id, "tx_hash": tx, "block": block }));
        }
        Command::Mine { chain, difficulty, timestamp } => {
            let path = &chain.chain;
            let _lock = ChainLock::acquire(path)?;
            let chain = if path.exists() {
                let mut chain = store::load_chain(path)?;
                let ts = timestamp.unwrap_or(chain.tip().timestamp + 1);
                chain.mine_and_append(Vec::new(), ts)?;
                chain
            } else {
                Chain::genesis(difficulty)?
            };
            store::save_chain(path, &chain)?;
            let tip = chain.tip();
            eprintln!("chain {} now holds {} blocks", path.display(), chain.len());
            emit(json!({ "block_index": tip.index, "block_hash": tip.block_hash, "nonce": tip.nonce, "difficulty": chain.difficulty() }));
        }
        Command::VerifyChain { chain } => {
            let path = &chain.chain;
            let bytes = std::fs::read(path).with_context(|| format!("reading chain {}", path.display()))?;
            let report = match Chain::from_json_slice(&bytes) {
                Ok(chain) => chain.validate(),
                Err(e) => {
                    emit(json!({ "valid": false, "error": e.to_string() }));
                    eprintln!("chain file does not parse: {e}");
                    return Ok(ExitCode::from(1));
                }
            };
            emit(serde_json::to_value(&report)?);
            if !report.valid {
                eprint!("{report}");
                return Ok(ExitCode::from(1));
            }
        }
        Command::ContractCall { w, contract, method, args, caller } => {
            let args: Vec<Value> = serde_json::from_str(&args).context("--args must be a JSON array of integers and strings")?;
            let call = ContractCall::new(&method, args, &caller);
            let (result, block) = with_node(&w, |n, kp, ts| Ok(n.submit_contract_call(kp, &contract, &call, ts)?))?;
            emit(json!({ "method": method, "values": result.values, "new_state_hash": result.new_state_hash, "block": block }));
        }
        Command::Predict { ml, features, chain, key, cp, patient } => {
            let ds = prediction::load_dataset::<f64>(&ml.dataset)?;
            let (train, _) = prediction::split(&ds, TRAIN_RATIO, ml.seed);
            let model = ScaWknnModel::fit(&train, &ml.config())?;
            let label = match (features, chain) {
                (Some(f), _) => model.predict(&f)?,
                (None, Some(path)) => {
                    let (key, cp, patient) = (key.unwrap(), cp.unwrap(), patient.unwrap());
                    let node = Node::from_chain(store::load_chain(&path)?)?;
                    node.cp_view_and_predict(&store::load_key(&key)?, &cp, &patient, &model)?
                }
                (None, None) => bail!("give either --features or --chain with --key, --cp and --patient"),
            };
            eprintln!("{}", if label == 1 { "heart disease present" } else { "no heart disease" });
            emit(json!({ "label": label, "weights": model.best.weights }));
        }
        Command::BenchMl { ml, out, sweep_out, trace_out } => {
            let ds = prediction::load_dataset::<f64>(&ml.dataset)?;
            let cfg = ml.config();
            let report = prediction::benchmark(&ds, &cfg)?;
            if let Some(path) = &out {
                prediction::write_bench_csv(&report.rows, csv_out(path)?)?;
            }
            if let Some(path) = &trace_out {
                prediction::write_trace_csv(&report.trace, csv_out(path)?)?;
            }
            if let Some(path) = &sweep_out {
                let rows = prediction::k_sweep(&ds, &cfg, &K_SWEEP)?;
                prediction::write_sweep_csv(&rows, csv_out(path)?)?;
            }
            for r in &report.rows {
                let m = &r.metrics;
                eprintln!("{:<9} acc {:.4}  prec {:.4}  rec {:.4}  f {:.4}  {:.3} ms", r.classifier, m.accuracy, m.precision, m.recall, m.f_measure, m.wall_time_ms);
            }
            let scores: Vec<_> = report
                .rows
                .iter()
                .map(|r| {
                    let m = &r.metrics;
                    json!({ "classifier": r.classifier, "accuracy": m.accuracy, "precision": m.precision, "recall": m.recall, "f_measure": m.f_measure, "rmse": m.rmse })
                })
                .collect();
            emit(json!({
                "k": cfg.k,
                "seed": cfg.seed,
                "train_rows": report.train_rows,
                "test_rows": report.test_rows,
                "best_weights": report.best_weights,
                "scores": scores,
            }));
        }
        Command::Simulate { patients, seed, out } => {
            let results = net::compare(&patients, &seed).map_err(anyhow::Error::msg)?;
            if let Some(path) = &out {
                net::write_compare_csv(&results, csv_out(path)?)?;
            }
            for (m, p, mean) in net::seed_means(&results, |r| r.mean_latency_ms) {
                eprintln!("{:<13} {:>5} patients  mean latency {:>8.2} ms", m.as_str(), p, mean);
            }
            emit(serde_json::to_value(&results)?);
        }
        Command::ConsensusTable { out } => {
            let table = net::consensus_matrix();
            if let Some(path) = &out {
                let mut w = csv_out(path)?;
                write_consensus_csv(&table, &mut w)?;
            }
            emit(serde_json::to_value(&table)?);
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn write_consensus_csv(table: &[net::ConsensusProfile], out: impl io::Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "abbreviation",
        "name",
        "developers",
        "year",
        "node_identification",
        "computational_power",
        "energy_efficiency",
        "data_model",
        "application",
        "language",
    ])?;
    for p in table {
        w.write_record([
            p.abbreviation,
            p.name,
            p.developers,
            &p.year.map_or_else(|| "-".to_string(), |y| y.to_string()),
            p.node_identification,
            p.computational_power,
            p.energy_efficiency,
            p.data_model,
            p.application,
            p.language,
        ])?;
    }
    w.flush()?;
    Ok(())
}
