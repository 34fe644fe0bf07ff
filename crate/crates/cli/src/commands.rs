//! One handler per subcommand. Each returns the JSON document to print.

use std::fs;

use serde_json::{json, Value};

use multiwit::algebra::{Complex, MultiIndex, PolySystem};
use multiwit::dimension::{dimension_polytope, equidim_partition, product_factorization};
use multiwit::monodromy::{trace_pencil, trace_test, MonodromyOptions};
use multiwit::nid::{nid_curve_affine, nid_multi};
use multiwit::startsys::{complete_intersection_class, mbezout};
use multiwit::sysio::{parse_system, print_system, RandomSource, WitnessArchive};
use multiwit::tracker::TrackStats;
use multiwit::witness::{coarsen_collection, compute_witness_collection, membership, refine, slice, WitnessCollection};

use crate::fixtures::{self, Fixture};
use crate::{Command, Common, Failure};

/// Stream of the run's random source; the seed comes from `--seed`.
const CLI_STREAM: u64 = 0;

type Res<T> = std::result::Result<T, Failure>;

enum Loaded {
    System { system: PolySystem, dim: Option<usize> },
    Collection(WitnessCollection),
    Class { degrees: Vec<MultiIndex>, nvec: MultiIndex },
}

fn options(c: &Common) -> MonodromyOptions {
    let mut m = MonodromyOptions::default();
    if let Some(t) = c.tol_track {
        m.track.newton_tol = t;
        m.track.end_tol = t;
    }
    if let Some(t) = c.tol_match {
        m.track.match_tol = t;
    }
    if let Some(t) = c.tol_rank {
        m.rank_tol = t;
    }
    if let Some(t) = c.tol_trace {
        m.trace_tol = t;
    }
    if let Some(l) = c.max_loops {
        m.max_loops = l;
    }
    m
}

fn check_tolerances(c: &Common) -> Res<()> {
    for (name, v) in
        [("tol-rank", c.tol_rank), ("tol-track", c.tol_track), ("tol-match", c.tol_match), ("tol-trace", c.tol_trace)]
    {
        if let Some(v) = v {
            if !(v.is_finite() && v > 0.0) {
                return Err(Failure::Input(format!("--{name} must be a positive number")));
            }
        }
    }
    Ok(())
}

fn load(c: &Common) -> Res<Loaded> {
    match (&c.input, &c.fixture) {
        (Some(_), Some(_)) => Err(Failure::Input("give either --input or --fixture, not both".into())),
        (None, None) => Err(Failure::Input("no input: give --input FILE or --fixture NAME".into())),
        (None, Some(name)) => Ok(match fixtures::lookup(name, c.seed, c.extended)? {
            Fixture::System { system, dim } => Loaded::System { system, dim: Some(dim) },
            Fixture::Class { degrees, nvec } => Loaded::Class { degrees, nvec },
        }),
        (Some(path), None) => {
            let text =
                fs::read_to_string(path).map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))?;
            if text.trim_start().starts_with('{') {
                // a bare archive, or the output of a command that embeds one
                let inner = match serde_json::from_str::<Value>(&text) {
                    Ok(Value::Object(o)) if o.contains_key("archive") => o["archive"].to_string(),
                    _ => text,
                };
                let archive = WitnessArchive::from_json(&inner)?;
                Ok(Loaded::Collection(WitnessCollection::from_archive(&archive)?))
            } else {
                Ok(Loaded::System { system: parse_system(&text)?.system, dim: None })
            }
        }
    }
}

fn collection(c: &Common, loaded: Loaded, rs: &mut RandomSource, m: &MonodromyOptions) -> Res<WitnessCollection> {
    match loaded {
        Loaded::Collection(wc) => Ok(wc),
        Loaded::System { system, dim } => {
            let n = system.nvars();
            let neq = system.polys.len();
            let d = match c.dim.or(dim) {
                Some(d) => d,
                None if neq <= n => n - neq,
                None => return Err(Failure::Input(format!("{neq} equations in {n} variables: give --dim"))),
            };
            if d > n {
                return Err(Failure::Input(format!("--dim {d} exceeds the {n} variables")));
            }
            let keys = MultiIndex::all_with_total(&system.grouping.nvec(), d);
            Ok(compute_witness_collection(&system, &keys, rs, &m.track)?)
        }
        Loaded::Class { .. } => Err(Failure::Input("this fixture is a class; use the class command".into())),
    }
}

/// Group by name or 0-based index.
fn group_index(wc: &WitnessCollection, s: &str) -> Res<usize> {
    let g = wc.grouping();
    if let Ok(i) = s.trim().parse::<usize>() {
        if i < g.ngroups() {
            return Ok(i);
        }
    }
    g.groups().iter().position(|gr| gr.name == s.trim()).ok_or_else(|| Failure::Input(format!("no group {s}")))
}

/// The `--entry` key, or the key with the most points.
fn entry(c: &Common, wc: &WitnessCollection) -> Res<MultiIndex> {
    if let Some(s) = &c.entry {
        return Ok(MultiIndex::parse(s, wc.grouping().ngroups())?);
    }
    let mut best: Option<(&MultiIndex, usize)> = None;
    for (k, v) in &wc.entries {
        if best.is_none_or(|(_, n)| v.len() > n) {
            best = Some((k, v.len()));
        }
    }
    best.map(|(k, _)| k.clone()).ok_or_else(|| Failure::Numerical("the witness collection is empty".into()))
}

fn point_json(p: &[Complex]) -> Value {
    Value::Array(p.iter().map(|z| json!([z.re, z.im])).collect())
}

fn points_json(pts: &[Vec<Complex>]) -> Value {
    Value::Array(pts.iter().map(|p| point_json(p)).collect())
}

fn stats_json(s: &TrackStats) -> Value {
    json!({ "paths": s.paths, "converged": s.converged, "diverged": s.diverged, "failed": s.failed })
}

fn archive_json(wc: &WitnessCollection, seed: u64) -> Value {
    serde_json::from_str(&wc.to_archive(seed).to_json()).expect("archive JSON parses")
}

fn parse_point(s: &str) -> Res<Vec<Complex>> {
    s.split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<Complex>().map_err(|_| Failure::Input(format!("malformed coordinate {t:?}")))
        })
        .collect()
}

fn parse_indices(s: &str) -> Res<Vec<usize>> {
    s.split(',').map(|t| t.trim().parse().map_err(|_| Failure::Input(format!("malformed index {t:?}")))).collect()
}

fn parse_free_index(s: &str) -> Res<MultiIndex> {
    let s = s.trim();
    let k = if s.contains(',') { s.split(',').count() } else { s.chars().count() };
    Ok(MultiIndex::parse(s, k)?)
}

pub fn run(cmd: &Command, c: &Common) -> Res<Value> {
    check_tolerances(c)?;
    let m = options(c);
    let mut rs = RandomSource::new(c.seed, CLI_STREAM);
    match cmd {
        Command::Fixture { name } => fixture(name.as_deref(), c),
        Command::Class { degrees, nvec, slices } => class(c, degrees.as_deref(), nvec.as_deref(), slices.as_deref()),
        _ => {
            let wc = collection(c, load(c)?, &mut rs, &m)?;
            with_collection(cmd, c, wc, &mut rs, &m)
        }
    }
}

fn with_collection(
    cmd: &Command,
    c: &Common,
    wc: WitnessCollection,
    rs: &mut RandomSource,
    m: &MonodromyOptions,
) -> Res<Value> {
    let seed = c.seed;
    match cmd {
        Command::Witness => Ok(json!({
            "command": "witness",
            "seed": seed,
            "dim": wc.dim(),
            "degrees": wc.degrees().to_json(),
            "archive": archive_json(&wc, seed),
        })),
        Command::Dim => {
            let e = entry(c, &wc)?;
            let pts = wc.points(&e)?;
            let nvec = wc.grouping().nvec();
            let names: Vec<String> = wc.grouping().groups().iter().map(|g| g.name.clone()).collect();
            let mut classes = Vec::new();
            for (profile, idx) in equidim_partition(&wc.system, pts, m.rank_tol)? {
                let dp = dimension_polytope(&profile, &nvec)?;
                let factors: Vec<Vec<&str>> =
                    product_factorization(&dp).iter().map(|b| b.iter().map(|&i| names[i].as_str()).collect()).collect();
                classes.push(json!({
                    "profile": profile.to_json(),
                    "polytope": dp.to_json(),
                    "factors": factors,
                    "points": idx,
                }));
            }
            Ok(json!({ "command": "dim", "seed": seed, "entry": e.compact(), "classes": classes }))
        }
        Command::Slice { group } => {
            let g = group_index(&wc, group)?;
            let out = slice(&wc, g)?;
            Ok(json!({
                "command": "slice",
                "seed": seed,
                "degrees": out.degrees().to_json(),
                "archive": archive_json(&out, seed),
            }))
        }
        Command::Refine { group, split, target } => {
            let g = group_index(&wc, group)?;
            let e = entry(c, &wc)?;
            let ws = wc.witness_set(&e)?;
            let first = split
                .split(',')
                .map(|v| {
                    wc.grouping().var_index(v.trim()).ok_or_else(|| Failure::Input(format!("unknown variable {v}")))
                })
                .collect::<Res<Vec<_>>>()?;
            let target = MultiIndex::parse(target, wc.grouping().ngroups() + 1)?;
            let (out, stats) = refine(&ws, g, &first, &target, rs, &m.track)?;
            Ok(json!({
                "command": "refine",
                "seed": seed,
                "entry": e.compact(),
                "target": target.compact(),
                "degree": out.degree(),
                "paths": stats_json(&stats),
                "points": points_json(&out.points),
            }))
        }
        Command::Coarsen { merge } => {
            let groups = merge.split(',').map(|s| group_index(&wc, s)).collect::<Res<Vec<_>>>()?;
            let (out, reports) = coarsen_collection(&wc, &groups, rs, &m.track)?;
            let reports: serde_json::Map<String, Value> = reports
                .iter()
                .map(|(k, r)| (k.compact(), json!({ "paths": stats_json(&r.stats), "setup": stats_json(&r.setup) })))
                .collect();
            Ok(json!({
                "command": "coarsen",
                "seed": seed,
                "degrees": out.degrees().to_json(),
                "reports": reports,
                "archive": archive_json(&out, seed),
            }))
        }
        Command::Member { point } => {
            let p = parse_point(point)?;
            let member = membership(&wc, &p, rs, &m.track)?;
            Ok(json!({ "command": "member", "seed": seed, "point": point_json(&p), "member": member }))
        }
        Command::Trace { part } => {
            let e = entry(c, &wc)?;
            let ws = wc.witness_set(&e)?;
            let idx = match part {
                Some(s) => parse_indices(s)?,
                None => (0..ws.points.len()).collect(),
            };
            if let Some(&bad) = idx.iter().find(|&&i| i >= ws.points.len()) {
                return Err(Failure::Input(format!("no witness point {bad} in entry {}", e.compact())));
            }
            let pts: Vec<Vec<Complex>> = idx.iter().map(|&i| ws.points[i].clone()).collect();
            let pencil = trace_pencil(ws.system.nvars(), rs);
            let linear = trace_test(&ws.system, &ws.selection, &pencil, &pts, rs, m)?;
            Ok(json!({ "command": "trace", "seed": seed, "entry": e.compact(), "part": idx, "linear": linear }))
        }
        Command::Decompose => {
            let e = entry(c, &wc)?;
            if wc.grouping().ngroups() == 1 {
                let parts = nid_curve_affine(&wc.witness_set(&e)?, rs, m)?;
                let comps: Vec<Value> = parts
                    .iter()
                    .map(|p| json!({ "degree": p.degree, "certified": p.certified, "points": p.indices }))
                    .collect();
                return Ok(json!({ "command": "decompose", "seed": seed, "entry": e.compact(), "components": comps }));
            }
            let d = nid_multi(&wc.system, wc.points(&e)?, rs, m)?;
            let mut v = d.to_json();
            v["command"] = json!("decompose");
            v["seed"] = json!(seed);
            v["entry"] = json!(e.compact());
            v["sizes"] = json!(d.sizes());
            Ok(v)
        }
        Command::Segre => {
            let degrees = wc.degrees();
            Ok(json!({
                "command": "segre",
                "seed": seed,
                "segre": degrees.segre_degree()?,
                "degrees": degrees.to_json(),
            }))
        }
        Command::Fixture { .. } | Command::Class { .. } => unreachable!("handled before loading"),
    }
}

fn class(c: &Common, degrees: Option<&str>, nvec: Option<&str>, slices: Option<&str>) -> Res<Value> {
    let (degs, nvec) = match (degrees, nvec) {
        (Some(d), Some(n)) => {
            if c.input.is_some() || c.fixture.is_some() {
                return Err(Failure::Input("give either --degrees/--nvec or an input".into()));
            }
            let nvec = parse_free_index(n)?;
            let degs = d
                .split(';')
                .filter(|s| !s.trim().is_empty())
                .map(|s| MultiIndex::parse(s.trim(), nvec.len()).map_err(Failure::from))
                .collect::<Res<Vec<_>>>()?;
            (degs, nvec)
        }
        (None, None) => match load(c)? {
            Loaded::Class { degrees, nvec } => (degrees, nvec),
            _ => return Err(Failure::Input("the class command needs a class fixture or --degrees and --nvec".into())),
        },
        _ => return Err(Failure::Input("--degrees and --nvec go together".into())),
    };
    let class = complete_intersection_class(&degs, &nvec)?;
    let mut out = json!({
        "command": "class",
        "nvec": nvec.compact(),
        "degrees": degs.iter().map(MultiIndex::compact).collect::<Vec<_>>(),
        "class": class.to_json(),
    });
    if degs.len() == nvec.total() {
        out["mbezout"] = json!(mbezout(&degs, &nvec)?);
    } else {
        out["segre"] = json!(class.segre_degree()?);
    }
    if let Some(s) = slices {
        let mut cur = class;
        let mut tables = Vec::new();
        for g in parse_indices(s)? {
            cur = cur.slice(g)?;
            tables.push(json!({ "group": g, "class": cur.to_json() }));
        }
        out["slices"] = Value::Array(tables);
    }
    Ok(out)
}

fn fixture(name: Option<&str>, c: &Common) -> Res<Value> {
    let Some(name) = name else {
        return Ok(json!({ "command": "fixture", "fixtures": fixtures::NAMES, "extended": fixtures::EXTENDED }));
    };
    Ok(match fixtures::lookup(name, c.seed, c.extended)? {
        Fixture::System { system, dim } => json!({
            "command": "fixture",
            "name": name,
            "dim": dim,
            "system": print_system(&system, None),
        }),
        Fixture::Class { degrees, nvec } => json!({
            "command": "fixture",
            "name": name,
            "nvec": nvec.compact(),
            "degrees": degrees.iter().map(MultiIndex::compact).collect::<Vec<_>>(),
        }),
    })
}
