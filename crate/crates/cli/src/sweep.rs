use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use anyhow::{anyhow, Context};
use rayon::prelude::*;
use serde_json::json;

use ptorsion::closed_forms::check_exponent;
use ptorsion::diagnostics::DeficitReport;
use ptorsion::geometry::DomainSpec;
use ptorsion::pipeline::{run, RunConfig};

use crate::args::{Global, Range, SweepFamily};
use crate::commands::{base_config, ensure_dir, print_json, require_domain, require_h, require_p, write_json};
use crate::exit::{Failure, Outcome, CHAIN, OK, PARTIAL};

const THREADS_VAR: &str = "PTORSION_THREADS";

impl Range {
    pub fn expand(&self) -> anyhow::Result<Vec<f64>> {
        let values = match (&self.values, self.from, self.to, self.steps) {
            (Some(v), ..) => v.clone(),
            (None, Some(a), Some(b), Some(n)) => match n {
                0 => Vec::new(),
                1 => vec![a],
                _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
            },
            (None, None, None, None) => Vec::new(),
            _ => return Err(anyhow!("give --values, or all of --from, --to and --steps")),
        };
        if values.is_empty() {
            return Err(anyhow!("empty sweep range"));
        }
        if let Some(x) = values.iter().find(|x| !x.is_finite()) {
            return Err(anyhow!("sweep value {x} is not finite"));
        }
        Ok(values)
    }
}

fn pool() -> anyhow::Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(s) = std::env::var(THREADS_VAR) {
        let n: usize = s.trim().parse().with_context(|| format!("{THREADS_VAR}={s:?} is not a thread count"))?;
        b = b.num_threads(n);
    }
    Ok(b.build()?)
}

/// Whether `f` is non-decreasing along `rows`, which are sorted by parameter.
fn non_decreasing(rows: &[(f64, &DeficitReport)], f: impl Fn(&DeficitReport) -> f64) -> bool {
    rows.windows(2).all(|w| f(w[1].1) >= f(w[0].1))
}

pub fn sweep(g: &Global, family: &SweepFamily) -> Outcome {
    let h = require_h(g)?;
    let (name, points): (&str, Vec<(f64, RunConfig)>) = match family {
        SweepFamily::Eccentricity { range, area } => {
            let p = require_p(g)?;
            let mut points = Vec::new();
            for e in range.expand().map_err(Failure::config)? {
                let spec = DomainSpec::ellipse_with_area(*area, e)?;
                points.push((e, base_config(g, spec.into(), p, h)?));
            }
            ("eccentricity", points)
        }
        SweepFamily::P { range } => {
            let domain = require_domain(g)?;
            domain.spec.validate()?;
            let mut points = Vec::new();
            for p in range.expand().map_err(Failure::config)? {
                check_exponent(p)?;
                points.push((p, base_config(g, domain.clone(), p, h)?));
            }
            ("p", points)
        }
    };
    let out = g.out.clone().unwrap_or_else(|| PathBuf::from("sweep"));
    ensure_dir(&out)?;

    let pool = pool().map_err(Failure::config)?;
    let results: Vec<_> = pool.install(|| points.par_iter().map(|(_, cfg)| run(cfg).map(|o| o.report)).collect());

    let mut csv = format!("{name},I_p,bound_iii,H_L1_dev,tol_deficit,status,chain_holds,error\n");
    let mut ok: Vec<(f64, &DeficitReport)> = Vec::new();
    let mut failures = Vec::new();
    for (i, ((x, _), res)) in points.iter().zip(&results).enumerate() {
        match res {
            Ok(r) => {
                write_json(&out.join(format!("point_{i:02}.json")), r)?;
                let _ = writeln!(
                    csv,
                    "{x},{:e},{:e},{:e},{:e},{},{},",
                    r.i_p,
                    r.bound_iii,
                    r.h_l1_dev,
                    r.tol_deficit,
                    r.status,
                    r.chain.holds()
                );
                ok.push((*x, r));
            }
            Err(e) => {
                let msg = e.to_string().replace(['\n', ','], " ");
                eprintln!("{name} = {x}: {e}");
                let _ = writeln!(csv, "{x},,,,,,,{msg}");
                failures.push(json!({ name: x, "error": e.to_string() }));
            }
        }
    }
    let aggregate = out.join("sweep.csv");
    fs::write(&aggregate, csv).with_context(|| format!("writing {}", aggregate.display())).map_err(Failure::config)?;

    ok.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mono_i = non_decreasing(&ok, |r| r.i_p);
    let mono_iii = non_decreasing(&ok, |r| r.bound_iii);
    let mono_l1 = non_decreasing(&ok, |r| r.h_l1_dev);
    let within = ok.iter().filter(|(_, r)| r.i_p <= r.tol_deficit).count();
    let yes = |b: bool| if b { "yes" } else { "no" };
    eprintln!(
        "monotone in {name}: I_p {}, bound_iii {}, H_L1_dev {}; I_p <= tol at {within}/{} points; {} failed",
        yes(mono_i),
        yes(mono_iii),
        yes(mono_l1),
        ok.len(),
        failures.len()
    );
    print_json(&json!({
        "family": name,
        "values": points.iter().map(|(x, _)| *x).collect::<Vec<_>>(),
        "aggregate": aggregate,
        "monotone": { "I_p": mono_i, "bound_iii": mono_iii, "H_L1_dev": mono_l1 },
        "within_tol": within,
        "completed": ok.len(),
        "failures": failures,
    }));

    if !failures.is_empty() {
        Ok(PARTIAL)
    } else if ok.iter().any(|(_, r)| !r.chain.holds()) {
        Ok(CHAIN)
    } else {
        Ok(OK)
    }
}
