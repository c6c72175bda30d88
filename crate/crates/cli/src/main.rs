//! Command-line driver for fibered Burnside ring computations.

mod verify;

use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};

use fbr_core::cyclo::rational_string;
use fbr_core::error::Error;
use fbr_core::fbring::BurnsideRing;
use fbr_core::fiber::FiberSpec;
use fbr_core::groups::{build_group, group_from_cayley_json, group_from_permutations_json};
use fbr_core::lattice::{build_poset, composition_factor, BPairPoset};
use fbr_core::pairs::{all_pairs, is_bpair, m_table};
use fbr_core::DEFAULT_ORDER_CAP;

#[derive(Parser)]
#[command(
    name = "fbr",
    about = "Exact computations in fibered Burnside rings of finite groups",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Dot,
    Csv,
}

#[derive(clap::Args)]
struct Common {
    /// Fiber group: "1", "C6", "C2xC4", or "mu"
    #[arg(long, default_value = "1")]
    fiber: String,
    /// Cap on group order for subgroup enumeration
    #[arg(long, default_value_t = DEFAULT_ORDER_CAP)]
    cap: usize,
    /// Output format
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Write output to a file instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// All primitive idempotents of B^A(G) with mark verification
    Idempotents {
        /// Catalog name (C6, S3, D8, ...) or @path to a JSON group file
        #[arg(long)]
        group: String,
        #[command(flatten)]
        common: Common,
    },
    /// Deflation-number table m^N for every character and normal subgroup
    Mconst {
        #[arg(long)]
        group: String,
        #[command(flatten)]
        common: Common,
    },
    /// B^A-pairs over the built-in catalog up to a group-order bound
    Bpairs {
        #[arg(long)]
        max_order: usize,
        /// Verify the pair condition over every nontrivial normal subgroup
        #[arg(long)]
        strict: bool,
        #[command(flatten)]
        common: Common,
    },
    /// The poset of B^A-pair classes (DOT or JSON)
    Poset {
        #[arg(long)]
        max_order: usize,
        #[arg(long)]
        strict: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Closed sets of the pair poset and composition-factor data
    Lattice {
        #[arg(long)]
        max_order: usize,
        /// Enumeration cap on the number of closed sets
        #[arg(long, default_value_t = 1 << 20)]
        max_sets: usize,
        #[arg(long)]
        strict: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Run the property battery for a group and fiber
    Verify {
        #[arg(long)]
        group: String,
        /// Check every normal subgroup in B^A-pair tests and cross-check
        /// compose against closed forms
        #[arg(long)]
        strict: bool,
        /// Seed for randomized sweeps
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[command(flatten)]
        common: Common,
    },
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Parse(_) => 2,
        Error::OrderCapExceeded { .. } | Error::EnumerationCap(_) => 3,
        _ => 1,
    }
}

fn load_group(spec: &str) -> Result<Arc<fbr_core::groups::FiniteGroup>, Error> {
    if let Some(path) = spec.strip_prefix('@') {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("cannot read {path}: {e}")))?;
        let trimmed = text.trim_start();
        if trimmed.starts_with('[') {
            group_from_permutations_json(&text)
        } else {
            group_from_cayley_json(&text)
        }
    } else {
        build_group(spec)
    }
}

fn ring_for(group_spec: &str, fiber_spec: &str, cap: usize) -> Result<Arc<BurnsideRing>, Error> {
    let group = load_group(group_spec)?;
    let fiber = FiberSpec::parse(fiber_spec)?.resolve(&group);
    BurnsideRing::new(group, fiber, cap)
}

fn emit(common: &Common, text: String) -> Result<(), Error> {
    match &common.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Error::Invalid(format!("cannot write output: {e}"))),
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            match writeln!(stdout, "{text}") {
                Ok(()) => Ok(()),
                // a closed pipe downstream is not our failure
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
                Err(e) => Err(Error::Invalid(format!("cannot write output: {e}"))),
            }
        }
    }
}

fn cmd_idempotents(group: &str, common: &Common) -> Result<(), Error> {
    let ring = ring_for(group, &common.fiber, common.cap)?;
    let reps = ring.xorbit_reps().to_vec();
    let mut items = Vec::new();
    for (i, rep) in reps.iter().enumerate() {
        let e = ring.idempotent(rep);
        let marks = ring.mark_vector(&e);
        let verified = marks.iter().enumerate().all(|(j, v)| {
            if i == j {
                *v == fbr_core::cyclo::Cyclotomic::one()
            } else {
                v.is_zero()
            }
        });
        items.push(serde_json::json!({
            "subgroup": rep.subgroup.iter().collect::<Vec<u16>>(),
            "char": rep.chi.values.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
            "element": e.to_json(),
            "mark_verified": verified,
        }));
    }
    let doc = serde_json::json!({
        "group": ring.group().name(),
        "fiber": ring.fiber().spec_string(),
        "idempotents": items,
    });
    let bad = items
        .iter()
        .any(|i| i["mark_verified"] != serde_json::json!(true));
    emit(common, serde_json::to_string_pretty(&doc).unwrap())?;
    if bad {
        return Err(Error::Invalid("mark verification failed".into()));
    }
    Ok(())
}

fn cmd_mconst(group: &str, common: &Common) -> Result<(), Error> {
    let ring = ring_for(group, &common.fiber, common.cap)?;
    let mut rows = Vec::new();
    for pair in all_pairs(&ring) {
        let table = m_table(&pair)?;
        let entries: Vec<serde_json::Value> = table
            .entries
            .iter()
            .map(|(n, m)| {
                serde_json::json!({
                    "normal": n.iter().collect::<Vec<u16>>(),
                    "m": rational_string(m),
                })
            })
            .collect();
        rows.push(serde_json::json!({
            "char": pair.chi.values.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
            "entries": entries,
        }));
    }
    let doc = serde_json::json!({
        "group": ring.group().name(),
        "fiber": ring.fiber().spec_string(),
        "table": rows,
    });
    emit(common, serde_json::to_string_pretty(&doc).unwrap())
}

fn cmd_bpairs(max_order: usize, strict: bool, common: &Common) -> Result<(), Error> {
    let fiber = FiberSpec::parse(&common.fiber)?;
    let mut pairs = Vec::new();
    for order in 1..=max_order.min(fbr_core::lattice::CATALOG_COMPLETE_MAX) {
        for spec in fbr_core::lattice::catalog_by_order(order) {
            let group = build_group(spec)?;
            let resolved = fiber.resolve(&group);
            let ring = BurnsideRing::new(group, resolved, common.cap)?;
            for (chi, _) in fbr_core::lattice::char_orbits_under_aut(&ring) {
                let pair = fbr_core::pairs::GroupPair::new(ring.clone(), chi);
                if is_bpair(&pair, strict)? {
                    let witnesses: Vec<serde_json::Value> = m_table(&pair)?
                        .entries
                        .iter()
                        .map(|(n, m)| {
                            serde_json::json!({
                                "normal": n.iter().collect::<Vec<u16>>(),
                                "m": rational_string(m),
                            })
                        })
                        .collect();
                    pairs.push(serde_json::json!({
                        "group": spec,
                        "char": pair.chi.values.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
                        "m_table": witnesses,
                    }));
                }
            }
        }
    }
    let doc = serde_json::json!({
        "fiber": common.fiber,
        "max_order": max_order,
        "complete": max_order <= fbr_core::lattice::CATALOG_COMPLETE_MAX,
        "pairs": pairs,
    });
    emit(common, serde_json::to_string_pretty(&doc).unwrap())
}

fn build_poset_for(max_order: usize, strict: bool, common: &Common) -> Result<BPairPoset, Error> {
    let fiber = FiberSpec::parse(&common.fiber)?;
    build_poset(max_order, &fiber, common.cap, strict)
}

fn cmd_poset(max_order: usize, strict: bool, common: &Common) -> Result<(), Error> {
    let poset = build_poset_for(max_order, strict, common)?;
    match common.format {
        Format::Dot => emit(common, poset.to_dot()),
        _ => emit(
            common,
            serde_json::to_string_pretty(&poset.to_json()).unwrap(),
        ),
    }
}

fn cmd_lattice(
    max_order: usize,
    max_sets: usize,
    strict: bool,
    common: &Common,
) -> Result<(), Error> {
    let poset = build_poset_for(max_order, strict, common)?;
    let factors: Vec<serde_json::Value> = poset
        .nodes
        .iter()
        .enumerate()
        .map(|(i, node)| -> Result<serde_json::Value, Error> {
            let data = composition_factor(&node.pair)?;
            Ok(serde_json::json!({
                "node": i,
                "group": node.group_spec,
                "char": node.char_label,
                "orbit_size": data.out_orbit_size,
                "dim": data.stabilizer_index,
                "label": data.label,
            }))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if common.format == Format::Csv {
        let mut text = String::from("node,group,char,orbit_size,dim,label\n");
        for f in &factors {
            text.push_str(&format!(
                "{},{},\"{}\",{},{},\"{}\"\n",
                f["node"],
                f["group"].as_str().unwrap(),
                f["char"].as_str().unwrap(),
                f["orbit_size"],
                f["dim"],
                f["label"].as_str().unwrap(),
            ));
        }
        return emit(common, text);
    }
    let closed = match poset.closed_sets(max_sets) {
        Ok(sets) => serde_json::json!(sets
            .iter()
            .map(|s| s.iter().collect::<Vec<u16>>())
            .collect::<Vec<_>>()),
        Err(Error::EnumerationCap(_)) => {
            serde_json::json!({ "count_only": poset.count_closed_sets().to_string() })
        }
        Err(e) => return Err(e),
    };
    let doc = serde_json::json!({
        "poset": poset.to_json(),
        "closed_sets": closed,
        "composition_factors": factors,
    });
    emit(common, serde_json::to_string_pretty(&doc).unwrap())
}

fn cmd_verify(group: &str, strict: bool, seed: u64, common: &Common) -> Result<bool, Error> {
    let ring = ring_for(group, &common.fiber, common.cap)?;
    let report = verify::run_battery(&ring, strict, seed, common.cap);
    let mut text = String::new();
    let mut all_ok = true;
    for item in &report {
        match &item.detail {
            None => text.push_str(&format!("PASS {}\n", item.name)),
            Some(d) => {
                all_ok = false;
                text.push_str(&format!("FAIL {}: {}\n", item.name, d));
            }
        }
    }
    text.push_str(&format!(
        "{}: {} checks, {} failed",
        if all_ok { "OK" } else { "FAILED" },
        report.len(),
        report.iter().filter(|i| i.detail.is_some()).count()
    ));
    emit(common, text)?;
    Ok(all_ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Idempotents { group, common } => cmd_idempotents(group, common).map(|_| true),
        Command::Mconst { group, common } => cmd_mconst(group, common).map(|_| true),
        Command::Bpairs {
            max_order,
            strict,
            common,
        } => cmd_bpairs(*max_order, *strict, common).map(|_| true),
        Command::Poset {
            max_order,
            strict,
            common,
        } => cmd_poset(*max_order, *strict, common).map(|_| true),
        Command::Lattice {
            max_order,
            max_sets,
            strict,
            common,
        } => cmd_lattice(*max_order, *max_sets, *strict, common).map(|_| true),
        Command::Verify {
            group,
            strict,
            seed,
            common,
        } => cmd_verify(group, *strict, *seed, common),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
