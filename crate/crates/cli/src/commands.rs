use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Deserialize;

use gcorr_core::correlation::{phi_profile, Budget};
use gcorr_core::report::{short_hash, Theorem};
use gcorr_core::search::{batch_verify, necessity_scan, verify_instance, BrokenHypothesis, Instance};
use gcorr_core::transport::{contraction_check, monotone_map, DensityDef};
use gcorr_core::{Measure, ScalarField, Verdict};

use crate::{BatchArgs, Failure, ProfileArgs, ScanArgs, Status, TransportArgs, VerifyArgs};

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn parse_json<T: for<'de> Deserialize<'de>>(path: &Path, bytes: &[u8]) -> Result<T, Failure> {
    serde_json::from_slice(bytes).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn parse_theorem(tag: &str) -> Result<Theorem, Failure> {
    Theorem::parse(tag).ok_or_else(|| usage(format!("unknown theorem `{tag}`; expected 1.1, 1.2, 2.1, 3.1, 4.1 or corollary")))
}

fn positive(name: &str, n: usize) -> Result<usize, Failure> {
    if n == 0 {
        return Err(usage(format!("--{name} must be positive")));
    }
    Ok(n)
}

/// Writes `text` to `out`, or to stdout when no path is given.
fn emit(out: Option<&PathBuf>, text: &[u8]) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| usage(format!("{}: {e}", p.display()))),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(text)?;
            stdout.flush()?;
            Ok(())
        }
    }
}

/// Summary lines go to stdout unless stdout already carries the data.
fn say(out: Option<&PathBuf>, line: &str) {
    if out.is_some() {
        println!("{line}");
    } else {
        eprintln!("{line}");
    }
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>, Failure> {
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.into_inner().map_err(|e| usage(e.to_string()))
}

fn num(x: f64) -> String {
    format!("{x}")
}

pub fn verify(a: &VerifyArgs) -> Result<Status, Failure> {
    let theorem = parse_theorem(&a.theorem)?;
    let samples = positive("samples", a.samples)?;
    let bytes = read(&a.config)?;
    let mut value: serde_json::Value = parse_json(&a.config, &bytes)?;
    let obj = value
        .as_object_mut()
        .ok_or_else(|| usage(format!("{}: config must be a JSON object", a.config.display())))?;
    match obj.get("theorem") {
        None => {
            obj.insert("theorem".into(), theorem.tag().into());
        }
        Some(t) if t.as_str() == Some(theorem.tag()) => {}
        Some(t) => return Err(usage(format!("config is for theorem {t}, but --theorem is {}", theorem.tag()))),
    }
    let instance: Instance =
        serde_json::from_value(value).map_err(|e| usage(format!("{}: {e}", a.config.display())))?;

    let mut report = verify_instance(&instance, &Budget::with_samples(samples), a.seed)?;
    report.provenance.config_hash = Some(short_hash(&bytes));
    let mut json = report.to_json();
    json.push('\n');
    emit(a.out.as_ref(), json.as_bytes())?;

    let line = if report.verdict == Verdict::InapplicableHypothesis {
        format!("theorem {}: {}", theorem.tag(), report.verdict)
    } else {
        format!("theorem {}: {} (gap {:.6e}, se {:.3e})", theorem.tag(), report.verdict, report.gap, report.se)
    };
    say(a.out.as_ref(), &line);
    for h in report.failed_hypotheses() {
        eprintln!("hypothesis `{}` fails: {}", h.name, h.detail);
    }
    Ok(match report.verdict {
        Verdict::Confirmed | Verdict::Inconclusive => Status::Ok,
        Verdict::Violated => Status::Violated,
        Verdict::InapplicableHypothesis => Status::Inapplicable,
    })
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileConfig {
    field: ScalarField,
    measure: Measure,
}

pub fn profile(a: &ProfileArgs) -> Result<Status, Failure> {
    let bytes = read(&a.config)?;
    let cfg: ProfileConfig = parse_json(&a.config, &bytes)?;
    let mu = cfg
        .measure
        .as_radial()
        .ok_or_else(|| usage("profile needs a radial measure"))?;
    if a.t_steps == 0 {
        return Err(usage("empty radius grid: --t-steps must be positive"));
    }
    if !(a.t_min >= 0.0) || !(a.t_max >= a.t_min) || !a.t_max.is_finite() {
        return Err(usage("radius grid needs 0 <= t-min <= t-max"));
    }
    if a.t_steps > 1 && a.t_max == a.t_min {
        return Err(usage("several steps need t-max > t-min"));
    }
    let grid: Vec<f64> = if a.t_steps == 1 {
        vec![a.t_min]
    } else {
        let h = (a.t_max - a.t_min) / (a.t_steps - 1) as f64;
        (0..a.t_steps).map(|i| a.t_min + h * i as f64).collect()
    };
    let p = phi_profile(&cfg.field, mu, &grid, a.samples, a.dirs, a.seed)?;
    let rows = (0..grid.len())
        .map(|i| vec![num(p.t_grid[i]), num(p.phi[i]), num(p.phi_se[i]), num(p.dphi[i])])
        .chain(std::iter::once(vec![
            "t1_estimate".into(),
            p.t1_estimate.map(num).unwrap_or_default(),
        ]));
    emit(a.out.as_ref(), &csv_bytes(&["t", "phi", "phi_se", "dphi"], rows)?)?;
    let t1 = p.t1_estimate.map_or("none".to_string(), |t| format!("{t:.6}"));
    say(a.out.as_ref(), &format!("t1 = {t1}, unimodal = {}", p.unimodal));
    Ok(Status::Ok)
}

pub fn scan(a: &ScanArgs) -> Result<Status, Failure> {
    let broken: BrokenHypothesis = a.broken.parse()?;
    let budget = Budget::with_samples(positive("samples", a.samples)?);
    let report = necessity_scan(broken, a.instances, a.d, &budget, a.seed)?;
    let rows = report.rows.iter().map(|r| {
        vec![
            r.instance_id.to_string(),
            r.hypothesis.tag().to_string(),
            r.d.to_string(),
            num(r.gap),
            num(r.se),
            num(r.z),
            r.counterexample.to_string(),
            r.seed.to_string(),
            r.detail.clone(),
        ]
    });
    let header = ["instance_id", "hypothesis", "d", "gap", "se", "z", "counterexample", "seed", "detail"];
    emit(a.out.as_ref(), &csv_bytes(&header, rows)?)?;
    say(
        a.out.as_ref(),
        &format!("{}: {} of {} instances with gap < -5 se", broken, report.counterexamples, report.rows.len()),
    );
    Ok(Status::Ok)
}

pub fn transport(a: &TransportArgs) -> Result<Status, Failure> {
    let src: DensityDef = parse_json(&a.source, &read(&a.source)?)?;
    let tgt: DensityDef = parse_json(&a.target, &read(&a.target)?)?;
    let map = monotone_map(&src.build()?, &tgt.build()?)?;
    let rows = map.rows().map(|(x, t)| vec![num(x), num(t)]);
    emit(a.out.as_ref(), &csv_bytes(&["x", "t"], rows)?)?;
    let c = contraction_check(&map);
    say(
        a.out.as_ref(),
        &format!(
            "max increment ratio {:.6}, contraction {}",
            c.max_increment_ratio,
            if c.passed { "holds" } else { "fails" }
        ),
    );
    Ok(Status::Ok)
}

pub fn batch(a: &BatchArgs) -> Result<Status, Failure> {
    let theorem = parse_theorem(&a.theorem)?;
    let budget = Budget::with_samples(positive("samples", a.samples)?);
    let report = batch_verify(theorem, a.instances, &a.dims, &budget, a.seed)?;
    let rows = report.rows.iter().map(|r| {
        vec![
            r.instance_id.to_string(),
            r.theorem.clone(),
            r.d.to_string(),
            r.body_descriptor_hash.clone(),
            num(r.gap),
            num(r.se),
            r.verdict.to_string(),
            r.seed.to_string(),
        ]
    });
    let header = ["instance_id", "theorem", "d", "body_descriptor_hash", "gap", "se", "verdict", "seed"];
    emit(a.out.as_ref(), &csv_bytes(&header, rows)?)?;
    say(
        a.out.as_ref(),
        &format!(
            "theorem {}: {} confirmed, {} inconclusive, {} violated, {} inapplicable",
            theorem.tag(),
            report.confirmed,
            report.inconclusive,
            report.violated,
            report.inapplicable
        ),
    );
    Ok(if report.has_violation() { Status::Violated } else if report.inapplicable > 0 { Status::Inapplicable } else { Status::Ok })
}
