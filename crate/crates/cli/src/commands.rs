use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use ramsey_core::canonical::{
    count_canonical, count_canonical_ar, enumerate_dc, enumerate_dc_full, EqRelation,
};
use ramsey_core::order::rk_hasse;
use ramsey_core::space::{enumerate_ar, enumerate_r};
use ramsey_core::structures::{build_s, build_t};
use ramsey_core::verify::{
    canonize_ar, canonize_block, check_dagger, check_distinctness, fct_block_minimal_m,
    pigeonhole_minimal_m, SearchOutcome,
};
use ramsey_core::{Error, Ordinal};
use serde::Deserialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::report::{emit, Report, Status, SCHEMA};
use crate::{BlockKind, CanonizeArgs, CanonizeMode, CountWhat, EnumWhat, Format, SearchArgs, Suite};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Core(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Invalid(_) => 2,
            CliError::Core(e) => core_exit(e),
        }
    }
}

fn core_exit(e: &Error) -> u8 {
    match e {
        Error::Infeasible { .. } | Error::Stalled { .. } => 4,
        _ => 2,
    }
}

pub struct Ctx {
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    pub budget: u64,
}

impl Ctx {
    fn write(&self, text: &str) -> Result<(), CliError> {
        Ok(emit(self.out.as_deref(), text)?)
    }

    fn json_only(&self, command: &str) -> Result<(), CliError> {
        if self.format == Some(Format::Dot) {
            return Err(CliError::Invalid(format!("{command} has no dot output")));
        }
        Ok(())
    }

    fn report(&self, command: &str, params: Value, data: Value, started: Instant) -> Result<(), CliError> {
        self.write(&Report::new(command, params, data, started.elapsed()).to_json())
    }
}

pub fn tree(ctx: &Ctx, alpha: Ordinal, n: u32, kind: BlockKind) -> Result<u8, CliError> {
    let text = match (kind, ctx.format.unwrap_or(Format::Json)) {
        (BlockKind::T, Format::Dot) => build_t(alpha, n)?.to_dot(),
        (BlockKind::S, Format::Dot) => build_s(alpha, n)?.to_dot(),
        (BlockKind::T, Format::Json) => block_json(&*build_t(alpha, n)?),
        (BlockKind::S, Format::Json) => block_json(&*build_s(alpha, n)?),
    };
    ctx.write(&text)?;
    Ok(0)
}

/// The block's own fields with the schema tag alongside.
fn block_json<T: serde::Serialize>(block: &T) -> String {
    let mut v = serde_json::to_value(block).expect("block serializes");
    if let Value::Object(map) = &mut v {
        map.insert("schema".into(), json!(SCHEMA));
    }
    let mut s = serde_json::to_string(&v).expect("value serializes");
    s.push('\n');
    s
}

pub fn count(ctx: &Ctx, k: u32, n: u32, what: CountWhat) -> Result<u8, CliError> {
    let started = Instant::now();
    let value = match what {
        CountWhat::R => count_canonical(k, n)?,
        CountWhat::Ar => count_canonical_ar(k, n)?,
    };
    match ctx.format {
        None => ctx.write(&format!("{value}\n"))?,
        Some(Format::Json) => {
            let what = match what {
                CountWhat::R => "R",
                CountWhat::Ar => "AR",
            };
            ctx.report(
                "count",
                json!({ "k": k, "n": n, "what": what }),
                json!({ "count": value.to_string() }),
                started,
            )?
        }
        Some(Format::Dot) => return Err(CliError::Invalid("count has no dot output".into())),
    }
    Ok(0)
}

pub fn enumerate(ctx: &Ctx, what: EnumWhat, alpha: Ordinal, n: u32, m: Option<u32>) -> Result<u8, CliError> {
    ctx.json_only("enumerate")?;
    let started = Instant::now();
    let need_m = || m.ok_or_else(|| CliError::Invalid("--m is required".into()));
    let (name, items) = match what {
        EnumWhat::R => ("R", serde_json::to_value(enumerate_r(alpha, n, need_m()?)?)),
        EnumWhat::Ar => ("AR", serde_json::to_value(enumerate_ar(alpha, n, need_m()?)?)),
        EnumWhat::Dc => match m {
            Some(m) => ("DC", serde_json::to_value(enumerate_dc(alpha, n, m)?)),
            None => ("DC", serde_json::to_value(enumerate_dc_full(alpha, n)?)),
        },
    };
    let items = items.expect("members serialize");
    let len = items.as_array().map_or(0, Vec::len);
    ctx.report(
        "enumerate",
        json!({ "what": name, "alpha": alpha, "n": n, "m": m }),
        json!({ "count": len.to_string(), "members": items }),
        started,
    )?;
    Ok(0)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RelationInput {
    schema: Option<String>,
    classes: Option<Vec<Vec<usize>>>,
    labels: Option<Vec<u32>>,
}

fn read_relation(path: &PathBuf, len: usize) -> Result<EqRelation, CliError> {
    let text = fs::read_to_string(path)?;
    let input: RelationInput =
        serde_json::from_str(&text).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
    if let Some(schema) = &input.schema {
        if schema != SCHEMA {
            return Err(CliError::Invalid(format!("unsupported schema {schema:?}, expected {SCHEMA:?}")));
        }
    }
    let rel = match (input.classes, input.labels) {
        (Some(classes), None) => EqRelation::from_classes(len, &classes),
        (None, Some(labels)) => EqRelation::from_rgs(labels),
        _ => return Err(CliError::Invalid("give exactly one of \"classes\" and \"labels\"".into())),
    }
    .map_err(|e| CliError::Invalid(e.to_string()))?;
    if rel.len() != len {
        return Err(CliError::Invalid(format!("relation on {} elements, domain has {len}", rel.len())));
    }
    Ok(rel)
}

pub fn canonize(ctx: &Ctx, args: &CanonizeArgs) -> Result<u8, CliError> {
    ctx.json_only("canonize")?;
    let started = Instant::now();
    let CanonizeArgs { alpha, n, k, m, .. } = *args;
    let (mode, domain_len) = match args.mode {
        CanonizeMode::Block => ("block", enumerate_r(alpha, n, m)?.len()),
        CanonizeMode::Ar => ("ar", enumerate_ar(alpha, n, m)?.len()),
    };
    let rel = read_relation(&args.input, domain_len)?;
    let witness = match args.mode {
        CanonizeMode::Block => canonize_block(alpha, n, k, m, &rel)?.map(|(y, s)| json!({ "y": y, "s": s })),
        CanonizeMode::Ar => {
            canonize_ar(alpha, n, m, k, &rel, ctx.budget)?.map(|(a, s)| json!({ "a": a, "s": s }))
        }
    };
    let status = if witness.is_some() { Status::Pass } else { Status::NoWitness };
    ctx.report(
        "canonize",
        json!({ "mode": mode, "alpha": alpha, "n": n, "k": k, "m": m, "input": args.input }),
        json!({ "status": status, "domain_size": domain_len, "relation": rel, "witness": witness }),
        started,
    )?;
    Ok(status.exit_code())
}

/// `a`, `a..b` or `a..=b`.
fn parse_range(s: &str) -> Result<(u32, u32), CliError> {
    let bad = || CliError::Invalid(format!("bad range {s:?}"));
    let num = |t: &str| t.trim().parse::<u32>().map_err(|_| bad());
    let (lo, hi) = if let Some((a, b)) = s.split_once("..=") {
        (num(a)?, num(b)?)
    } else if let Some((a, b)) = s.split_once("..") {
        let b = num(b)?;
        (num(a)?, b.checked_sub(1).ok_or_else(bad)?)
    } else {
        let a = num(s)?;
        (a, a)
    };
    if lo > hi {
        return Err(CliError::Invalid(format!("empty range {s:?}")));
    }
    Ok((lo, hi))
}

pub fn verify(ctx: &Ctx, suite: &Suite) -> Result<u8, CliError> {
    ctx.json_only("verify")?;
    let started = Instant::now();
    let (command, params, outcome) = match suite {
        Suite::Dagger { gamma, beta, l } => {
            let (lo, hi) = parse_range(l)?;
            let params = json!({ "gamma": gamma, "beta": beta, "l": [lo, hi] });
            let mut rows = Vec::new();
            let mut status = Status::Pass;
            for l in lo..=hi {
                eprintln!("dagger: gamma {gamma}, beta {beta}, l = {l}");
                match check_dagger(*gamma, *beta, l, l) {
                    Ok(r) => {
                        if !r.violations().is_empty() {
                            status = Status::Violation;
                        }
                        rows.extend(r.rows);
                    }
                    Err(e @ Error::Infeasible { .. }) => {
                        eprintln!("dagger: stopped at l = {l}: {e}");
                        status = Status::Infeasible;
                        break;
                    }
                    Err(e) => return Err(e.into()),
                }
            }
            let data = json!({ "status": status, "rows": rows });
            ("verify dagger", params, (status, data))
        }
        Suite::Pigeonhole(a) => {
            eprintln!("pigeonhole: alpha {}, n {}, k {}, m <= {}", a.alpha, a.n, a.k, a.max_m);
            let r = pigeonhole_minimal_m(a.alpha, a.n, a.k, a.max_m, ctx.budget);
            ("verify pigeonhole", search_params(a), search_data(r)?)
        }
        Suite::Fct(a) => {
            eprintln!("fct: alpha {}, n {}, k {}, m <= {}", a.alpha, a.n, a.k, a.max_m);
            let r = fct_block_minimal_m(a.alpha, a.n, a.k, a.max_m, ctx.budget);
            ("verify fct", search_params(a), search_data(r)?)
        }
        Suite::Distinctness { alpha, n, slack } => {
            let params = json!({ "alpha": alpha, "n": n, "slack": slack });
            let outcome = match check_distinctness(*alpha, *n, *slack) {
                Ok(r) => {
                    let status = if r.separated_at.is_some() { Status::Pass } else { Status::Violation };
                    let mut data = serde_json::to_value(&r).expect("report serializes");
                    data["status"] = json!(status);
                    (status, data)
                }
                Err(e) => infeasible(e)?,
            };
            ("verify distinctness", params, outcome)
        }
    };
    let (status, data) = outcome;
    ctx.report(command, params, data, started)?;
    Ok(status.exit_code())
}

fn search_params(a: &SearchArgs) -> Value {
    json!({ "alpha": a.alpha, "n": a.n, "k": a.k, "max_m": a.max_m })
}

fn search_data(r: Result<SearchOutcome, Error>) -> Result<(Status, Value), CliError> {
    match r {
        Ok(r) => {
            let status = if r.m.is_some() { Status::Pass } else { Status::Violation };
            Ok((
                status,
                json!({ "status": status, "result": r.m, "witnesses_checked": r.witnesses_checked.to_string() }),
            ))
        }
        Err(e) => infeasible(e),
    }
}

/// Infeasibility becomes a report; anything else stays an error.
fn infeasible(e: Error) -> Result<(Status, Value), CliError> {
    match e {
        Error::Infeasible { .. } => {
            Ok((Status::Infeasible, json!({ "status": Status::Infeasible, "reason": e.to_string() })))
        }
        e => Err(e.into()),
    }
}

pub fn order(ctx: &Ctx, alpha: Ordinal, n: u32, m: u32) -> Result<u8, CliError> {
    let started = Instant::now();
    let hasse = rk_hasse(alpha, n, m)?;
    match ctx.format.unwrap_or(Format::Json) {
        Format::Dot => ctx.write(&hasse.to_dot())?,
        Format::Json => ctx.report(
            "order",
            json!({ "alpha": alpha, "n": n, "m": m }),
            serde_json::to_value(&hasse).expect("diagram serializes"),
            started,
        )?,
    }
    Ok(0)
}
