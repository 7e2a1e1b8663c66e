use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use serde::Serialize;
use serde_json::{json, Value};

use ptorsion::closed_forms::{check_exponent, AnnulusSolution, RadialBallSolution};
use ptorsion::diagnostics::{diagnose, DeficitReport};
use ptorsion::geometry::DomainConfig;
use ptorsion::pipeline::{prepare, run, RunConfig};
use ptorsion::solver::io::{check_matches_mesh, read_solution_csv, write_solution_csv};
use ptorsion::solver::{solve_torsion, SolveConfig, SolveReport};

use crate::args::{Format, Global, OracleKind};
use crate::exit::{Failure, Outcome, CHAIN, OK};

/// Parses `s` as JSON if it looks like an object, otherwise reads it as a path.
pub fn json_arg<T: serde::de::DeserializeOwned>(what: &str, s: &str) -> anyhow::Result<T> {
    let text = if s.trim_start().starts_with('{') {
        s.to_owned()
    } else {
        fs::read_to_string(s).with_context(|| format!("reading {what} file {s}"))?
    };
    serde_json::from_str(&text).with_context(|| format!("parsing {what} {s}"))
}

pub fn require_p(g: &Global) -> Result<f64, Failure> {
    let p = g.p.ok_or_else(|| Failure::config(anyhow!("--p is required")))?;
    check_exponent(p)?;
    Ok(p)
}

pub fn require_h(g: &Global) -> Result<f64, Failure> {
    let h = g.h.ok_or_else(|| Failure::config(anyhow!("--h is required")))?;
    if !(h.is_finite() && h > 0.0) {
        return Err(Failure::config(anyhow!("h must be positive, got {h}")));
    }
    Ok(h)
}

pub fn require_domain(g: &Global) -> Result<DomainConfig, Failure> {
    let s = g.domain.as_deref().ok_or_else(|| Failure::config(anyhow!("--domain is required")))?;
    json_arg("domain", s).map_err(Failure::config)
}

/// Everything but the domain; sweeps set that per point.
pub fn base_config(g: &Global, domain: DomainConfig, p: f64, h: f64) -> Result<RunConfig, Failure> {
    let mut cfg = RunConfig::new(domain, p, h);
    if let Some(s) = &g.solver {
        let solve: SolveConfig = json_arg("solver config", s).map_err(Failure::config)?;
        cfg.solve = Some(solve);
    }
    if let Some(d) = g.delta_crit {
        if !(d > 0.0 && d < 1.0) {
            return Err(Failure::config(anyhow!("delta-crit must lie in (0,1), got {d}")));
        }
        cfg.delta_crit = d;
    }
    if let Some(t) = g.tol_deficit {
        if !(t.is_finite() && t > 0.0) {
            return Err(Failure::config(anyhow!("tol-deficit must be positive, got {t}")));
        }
        cfg.tol_deficit = Some(t);
    }
    cfg.solve_config().validate()?;
    Ok(cfg)
}

fn run_config(g: &Global) -> Result<RunConfig, Failure> {
    let p = require_p(g)?;
    let h = require_h(g)?;
    let domain = require_domain(g)?;
    domain.spec.validate()?;
    base_config(g, domain, p, h)
}

pub fn ensure_dir(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display())).map_err(Failure::config)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let mut w = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn print_json<T: Serialize>(value: &T) {
    println!("{}", serde_json::to_string_pretty(value).expect("serializable"));
}

#[derive(Serialize)]
struct SolveRecord<'a> {
    domain: &'a DomainConfig,
    p: f64,
    h: f64,
    seed: Option<u64>,
    u_max: f64,
    argmax: [f64; 2],
    solve: &'a SolveReport,
}

pub fn solve(g: &Global) -> Outcome {
    let cfg = run_config(g)?;
    let out = g.out.clone().unwrap_or_else(|| PathBuf::from("run"));
    ensure_dir(&out)?;
    let prepared = prepare(&cfg)?;
    let solution = solve_torsion(&prepared.mesh, &cfg.solve_config())?;

    let csv = out.join("u.csv");
    let file = File::create(&csv).with_context(|| format!("creating {}", csv.display())).map_err(Failure::config)?;
    let mut w = BufWriter::new(file);
    write_solution_csv(&prepared.mesh, &solution.u, &mut w)?;
    w.flush().map_err(|e| Failure::config(anyhow::Error::from(e)))?;

    let top = prepared.mesh.vertices[solution.u.argmax()];
    let record = SolveRecord {
        domain: &cfg.domain,
        p: cfg.p,
        h: cfg.h,
        seed: g.seed,
        u_max: solution.u.max(),
        argmax: [top.x, top.y],
        solve: &solution.report,
    };
    let solve_json = out.join("solve.json");
    write_json(&solve_json, &record)?;

    print_json(&json!({
        "u_max": record.u_max,
        "argmax": record.argmax,
        "vertices": solution.report.vertices,
        "triangles": solution.report.triangles,
        "iterations": solution.report.total_iterations,
        "residual": solution.report.residual,
        "u_csv": csv,
        "solve_json": solve_json,
    }));
    Ok(OK)
}

pub fn oracle(g: &Global, kind: &OracleKind) -> Outcome {
    let p = require_p(g)?;
    let value = match *kind {
        OracleKind::Ball { n, r } => {
            let s = RadialBallSolution::new(p, n, r, [0.0, 0.0])?;
            json!({
                "p": p, "n": n, "r": r,
                "u_center": s.center_value(),
                "grad_boundary": s.boundary_gradient(),
                "p_function": s.p_function(),
            })
        }
        OracleKind::Annulus { n, r1, r2 } => {
            let s = AnnulusSolution::new(p, n, r1, r2)?;
            json!({ "p": p, "n": n, "r1": r1, "r2": r2, "rbar": s.rbar })
        }
    };
    print_json(&value);
    Ok(OK)
}

pub fn deficit(g: &Global, solution: Option<&Path>) -> Outcome {
    let cfg = run_config(g)?;
    let report = match solution {
        None => run(&cfg)?.report,
        Some(path) => {
            let prepared = prepare(&cfg)?;
            let file = File::open(path).with_context(|| format!("opening {}", path.display())).map_err(Failure::config)?;
            let (pts, u) = read_solution_csv(BufReader::new(file))
                .with_context(|| format!("reading {}", path.display()))
                .map_err(Failure::config)?;
            check_matches_mesh(&prepared.mesh, &pts)
                .with_context(|| format!("{} does not match the mesh for --domain and --h", path.display()))
                .map_err(Failure::config)?;
            diagnose(&cfg.domain, &prepared.curve, &prepared.mesh, &u, cfg.p, &cfg.diagnose_options())?
        }
    };
    if let Some(out) = &g.out {
        ensure_dir(out)?;
        write_json(&out.join("report.json"), &report)?;
    }
    print_json(&report);
    Ok(chain_code(&report))
}

pub fn chain_code(report: &DeficitReport) -> u8 {
    if report.chain.holds() {
        OK
    } else {
        eprintln!("chain violated: {:?}", report.chain);
        CHAIN
    }
}

const TOP_KEYS: [&str; 15] = [
    "p",
    "domain",
    "h",
    "I_p",
    "excluded_area",
    "identity",
    "bound_ii",
    "bound_iii",
    "stability_bound",
    "H0",
    "R0",
    "H_L1_dev",
    "grad_bounds",
    "sbt",
    "status",
];

/// Checks `v` against the report schema; returns the first problem found.
pub fn check_schema(v: &Value) -> anyhow::Result<()> {
    for key in TOP_KEYS {
        if v.get(key).is_none() {
            bail!("missing field {key:?}");
        }
    }
    for (block, keys) in [
        ("identity", &["lhs", "rhs", "rel_gap"][..]),
        ("grad_bounds", &["lower", "upper", "min_observed", "max_observed"][..]),
    ] {
        for key in keys {
            if v[block].get(key).is_none() {
                bail!("missing field {block}.{key}");
            }
        }
    }
    match &v["sbt"] {
        Value::String(s) if s == "unsupported" => {}
        Value::Object(m) => {
            for key in ["dev_a", "dev_b", "dev_c", "dev_d", "dev_e"] {
                if !m.contains_key(key) {
                    bail!("missing field sbt.{key}");
                }
            }
        }
        other => bail!("sbt must be an object or \"unsupported\", got {other}"),
    }
    match v["status"].as_str() {
        Some("ok" | "warning") => {}
        _ => bail!("status must be \"ok\" or \"warning\", got {}", v["status"]),
    }
    if !v["I_p"].is_number() {
        bail!("I_p must be a number");
    }
    Ok(())
}

fn chain_holds(v: &Value) -> Option<bool> {
    let m = v.get("chain")?.as_object()?;
    Some(m.values().all(|b| b.as_bool() != Some(false)))
}

pub fn report(files: &[PathBuf], format: Format) -> Outcome {
    let mut rows = Vec::new();
    let mut code = OK;
    for path in files {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display())).map_err(Failure::config)?;
        let v: Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display())).map_err(Failure::config)?;
        check_schema(&v).with_context(|| format!("{} is not a report", path.display())).map_err(Failure::config)?;
        let chain = chain_holds(&v);
        if chain == Some(false) {
            code = CHAIN;
        }
        rows.push(json!({
            "file": path,
            "domain": v["domain"],
            "p": v["p"],
            "h": v["h"],
            "I_p": v["I_p"],
            "tol_deficit": v.get("tol_deficit"),
            "bound_ii": v["bound_ii"],
            "bound_iii": v["bound_iii"],
            "identity_rel_gap": v["identity"]["rel_gap"],
            "status": v["status"],
            "chain_holds": chain,
        }));
    }
    match format {
        Format::Json => print_json(&rows),
        Format::Text => {
            println!("{:<40} {:>6} {:>7} {:>12} {:>12} {:>12} {:>8}", "file", "p", "h", "I_p", "bound_ii", "bound_iii", "status");
            for r in &rows {
                println!(
                    "{:<40} {:>6} {:>7} {:>12.4e} {:>12.4e} {:>12.4e} {:>8}",
                    r["file"].as_str().unwrap_or("?"),
                    r["p"],
                    r["h"],
                    r["I_p"].as_f64().unwrap_or(f64::NAN),
                    r["bound_ii"].as_f64().unwrap_or(f64::NAN),
                    r["bound_iii"].as_f64().unwrap_or(f64::NAN),
                    r["status"].as_str().unwrap_or("?"),
                );
            }
        }
    }
    Ok(code)
}
