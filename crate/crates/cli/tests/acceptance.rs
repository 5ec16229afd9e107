//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero on any FAIL.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use gcorr_core::correlation::{check_class_cd, fkg_check, phi_profile, Budget, ClassCheckBudget, FnApproximant, GridMeasure1D};
use gcorr_core::field::Profile1D;
use gcorr_core::integration::{mc_integral, sliced_measure, SLICE_NODES};
use gcorr_core::measures::cdf_1d;
use gcorr_core::report::Theorem;
use gcorr_core::search::{batch_verify, necessity_scan, random_instance, BallKind, BodyKind, BrokenHypothesis, InstanceSpec, MeasureKind};
use gcorr_core::transport::{contraction_check, contraction_check_with, logconcavity_check, monotone_map, oddness_check, verify_theorem_4_1, Density1D, Tilt};
use gcorr_core::{ConvexBody, Measure, ProductDensity, RadialDensity, ScalarField};

type Outcome = Result<String, String>;

fn check(cond: bool, ok: String, bad: String) -> Outcome {
    if cond {
        Ok(ok)
    } else {
        Err(bad)
    }
}

fn ac1() -> Outcome {
    let start = Instant::now();
    let f = ScalarField::gaussian(0.5);
    let mu = RadialDensity::gaussian(2).map_err(|e| e.to_string())?;
    let grid: Vec<f64> = (0..=30).map(|i| i as f64 * 0.1).collect();
    let p = phi_profile(&f, &mu, &grid, 0, 256, 0).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let exact = (2.0 * 2f64.ln()).sqrt();
    let t1 = p.t1_estimate.ok_or("no turning point found")?;
    let msg = format!("t1 = {t1:.6} (exact {exact:.6}) in {:.2} s", elapsed.as_secs_f64());
    check((t1 - exact).abs() < 1e-3 && elapsed < Duration::from_secs(5), msg.clone(), msg)
}

fn ac2() -> Outcome {
    let ball = ConvexBody::ball(1.0).map_err(|e| e.to_string())?;
    let exact2 = 1.0 - (-0.5f64).exp();
    let radial: Measure = RadialDensity::gaussian(2).map_err(|e| e.to_string())?.into();
    let mc = mc_integral(&radial, &ScalarField::indicator(ball.clone()), 1_000_000, 11).map_err(|e| e.to_string())?;
    let sliced = sliced_measure(&ProductDensity::gaussian(2).map_err(|e| e.to_string())?, &ball, SLICE_NODES)
        .map_err(|e| e.to_string())?
        .estimate
        .value;
    let g1 = RadialDensity::gaussian(1).map_err(|e| e.to_string())?;
    let interval = cdf_1d(&g1, 1.0) - cdf_1d(&g1, -1.0);
    let exact1 = libm::erf(std::f64::consts::FRAC_1_SQRT_2);
    let z = (mc.value - exact2) / mc.std_error;
    let msg = format!(
        "MC z = {z:.2}, sliced error {:.1e}, interval error {:.1e}",
        (sliced - exact2).abs(),
        (interval - exact1).abs()
    );
    check(z.abs() <= 4.0 && (sliced - exact2).abs() <= 1e-6 && (interval - exact1).abs() <= 1e-6, msg.clone(), msg)
}

fn ac3() -> Outcome {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().map_err(|e| e.to_string())?;
    let start = Instant::now();
    let r = pool
        .install(|| batch_verify(Theorem::BallRadial, 100, &[1, 2, 3, 5], &Budget::with_samples(100_000), 2024))
        .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let msg = format!(
        "{} confirmed, {} inconclusive, {} violated, {} inapplicable in {:.1} s single-threaded",
        r.confirmed,
        r.inconclusive,
        r.violated,
        r.inapplicable,
        elapsed.as_secs_f64()
    );
    check(r.violated == 0 && r.confirmed >= 90 && elapsed < Duration::from_secs(600), msg.clone(), msg)
}

fn ac4() -> Outcome {
    let r = batch_verify(Theorem::EllipsoidProduct, 50, &[2, 3], &Budget::with_samples(100_000), 2024)
        .map_err(|e| e.to_string())?;
    let msg = format!(
        "{} confirmed, {} inconclusive, {} violated, {} inapplicable",
        r.confirmed, r.inconclusive, r.violated, r.inapplicable
    );
    check(r.violated == 0 && r.inapplicable == 0, msg.clone(), msg)
}

fn staircase(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut acc = 0.0;
    (0..n)
        .map(|_| {
            if rng.random::<f64>() < 0.3 {
                acc += rng.random::<f64>();
            }
            acc
        })
        .collect()
}

fn ac5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = f64::INFINITY;
    for _ in 0..1000 {
        let n = rng.random_range(2..300);
        let pts: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let masses: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 1e-3).collect();
        let nu = GridMeasure1D::discrete(pts, masses).map_err(|e| e.to_string())?;
        let (mut f, mut g) = (staircase(&mut rng, n), staircase(&mut rng, n));
        if rng.random::<bool>() {
            f.iter_mut().chain(g.iter_mut()).for_each(|v| *v = -*v);
        }
        worst = worst.min(fkg_check(&nu, &f, &g).map_err(|e| e.to_string())?.gap);
    }
    let nu = GridMeasure1D::uniform(0.0, 1.0, 50_001).map_err(|e| e.to_string())?;
    let t = nu.points().to_vec();
    let closed = fkg_check(&nu, &t, &t).map_err(|e| e.to_string())?.gap;
    let msg = format!("min gap over 1000 pairs {worst:.3e}, uniform case error {:.1e}", (closed - 1.0 / 12.0).abs());
    check(worst >= -1e-12 && (closed - 1.0 / 12.0).abs() <= 1e-10, msg.clone(), msg)
}

fn ac6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let src = Density1D::normal(0.0, 1.0).map_err(|e| e.to_string())?;
    let (mut ratio, mut odd): (f64, f64) = (0.0, 0.0);
    for _ in 0..20 {
        let tilt = Tilt::ExpPower { a: rng.random_range(0.05..2.0), p: rng.random_range(1.0..3.0), center: 0.0 };
        let map = monotone_map(&src, &Density1D::tilted_normal(1.0, &tilt).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
        ratio = ratio.max(contraction_check_with(&map, 1e-4).max_increment_ratio);
        odd = odd.max(oddness_check(&map).map_err(|e| e.to_string())?.max_defect);
    }
    let control = monotone_map(&Density1D::normal(0.0, 0.5).map_err(|e| e.to_string())?, &src).map_err(|e| e.to_string())?;
    let c = contraction_check(&control);
    let msg = format!(
        "max ratio {ratio:.6}, max oddness defect {odd:.1e}; control ratio {:.6}, control {}",
        c.max_increment_ratio,
        if c.passed { "passes" } else { "fails" }
    );
    check(
        ratio <= 1.0 + 1e-4 && odd <= 1e-6 && (c.max_increment_ratio - 2.0).abs() <= 1e-3 && !c.passed,
        msg.clone(),
        msg,
    )
}

fn ac7() -> Outcome {
    let sigma = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
    let r = verify_theorem_4_1(&ScalarField::gaussian(0.5), &sigma, &Profile1D::Exp { rate: 0.5 }, &Budget::with_samples(1_000_000), 7)
        .map_err(|e| e.to_string())?;
    let lhs = r.lhs.ok_or("no lhs")?;
    let (a, b) = r.rhs_factors.ok_or("no rhs")?;
    let rhs = a.value * b.value;
    let rhs_se = (b.value * a.std_error).hypot(a.value * b.std_error);
    let (zl, zr) = ((lhs.value - 1.0 / 3.0) / lhs.std_error, (rhs - 0.25) / rhs_se);
    let msg = format!("lhs {:.5} (z {zl:.2}), rhs {rhs:.5} (z {zr:.2})", lhs.value);
    check(zl.abs() <= 4.0 && zr.abs() <= 4.0, msg.clone(), msg)
}

fn ac8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut failures = Vec::new();
    for k in 0..10u64 {
        let d = 2 + (k % 2) as usize;
        let spec = InstanceSpec { d, body: BodyKind::Polytope, measure: MeasureKind::Gaussian, b: BallKind::Ball, origin: true };
        let (a, measure, _) = random_instance(&spec, 800 + k).map_err(|e| e.to_string())?;
        let n = 4;
        let fa = FnApproximant::new(a.clone(), n).map_err(|e| e.to_string())?;
        let fb = FnApproximant::new(a.clone(), 2 * n).map_err(|e| e.to_string())?;
        for _ in 0..2000 {
            let x: Vec<f64> = (0..d).map(|_| rng.random_range(-3.0..3.0)).collect();
            let (va, vb) = (fa.eval(&x).map_err(|e| e.to_string())?, fb.eval(&x).map_err(|e| e.to_string())?);
            let dist = a.distance(&x).map_err(|e| e.to_string())?;
            if dist == 0.0 && va != 1.0 {
                failures.push(format!("polytope {k}: f_n = {va} inside A"));
            }
            if dist >= 1.0 / n as f64 && va != 0.0 {
                failures.push(format!("polytope {k}: f_n = {va} beyond 1/n"));
            }
            if vb > va + 1e-12 {
                failures.push(format!("polytope {k}: f_2n > f_n"));
            }
        }
        let field = ScalarField::approximant(a, n).map_err(|e| e.to_string())?;
        let class = check_class_cd(&field, &measure, &ClassCheckBudget::default(), k).map_err(|e| e.to_string())?;
        failures.extend(class.iter().filter(|c| !c.passed).map(|c| format!("polytope {k}: {} ({})", c.name, c.detail)));
        let lc = logconcavity_check(&field, d, 4096, k).map_err(|e| e.to_string())?;
        if !lc.passed {
            failures.push(format!("polytope {k}: log-concavity ({})", lc.detail));
        }
    }
    check(failures.is_empty(), "10 polytopes, all properties hold".into(), failures.join("; "))
}

fn ac9(bin: &Path, dir: &Path) -> Outcome {
    let out = dir.join("scan.csv");
    let status = Command::new(bin)
        .args(["scan", "--break", "origin-not-in-A", "--d", "1", "--instances", "100", "--samples", "100000", "--seed", "9"])
        .arg("--out")
        .arg(&out)
        .status()
        .map_err(|e| e.to_string())?;
    let text = std::fs::read_to_string(&out).map_err(|e| e.to_string())?;
    let hits = text.lines().skip(1).filter(|l| l.split(',').nth(6) == Some("true")).count();
    // Cross-check against the library call.
    let lib = necessity_scan(BrokenHypothesis::OriginNotInA, 100, 1, &Budget::with_samples(100_000), 9)
        .map_err(|e| e.to_string())?;
    let msg = format!("{hits} of 100 instances with gap < -5 se ({status})");
    check(status.success() && hits >= 1 && hits == lib.counterexamples, msg.clone(), msg)
}

fn ac10(bin: &Path, dir: &Path) -> Outcome {
    let cfg = dir.join("square.json");
    std::fs::write(
        &cfg,
        r#"{"a": {"type": "hpolytope", "halfspaces": [{"n": [1, 0], "b": 1}, {"n": [-1, 0], "b": 1}, {"n": [0, 1], "b": 1}, {"n": [0, -1], "b": 1}]},
 "radius": 1.0, "measure": {"type": "gaussian", "d": 2}}"#,
    )
    .map_err(|e| e.to_string())?;
    let run = |threads: &str, name: &str| -> Result<Vec<u8>, String> {
        let out = dir.join(name);
        let st = Command::new(bin)
            .env("GCORR_THREADS", threads)
            .args(["verify", "--theorem", "1.1", "--samples", "200000", "--seed", "10", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&out)
            .output()
            .map_err(|e| e.to_string())?;
        if !st.status.success() {
            return Err(format!("verify exited with {}", st.status));
        }
        std::fs::read(&out).map_err(|e| e.to_string())
    };
    let reports = [run("1", "a.json")?, run("1", "b.json")?, run("4", "c.json")?, run("7", "d.json")?];
    let same = reports.windows(2).all(|w| w[0] == w[1]);
    check(
        same,
        format!("4 runs at 1, 1, 4 and 7 threads, {} identical bytes each", reports[0].len()),
        "reports differ between runs".into(),
    )
}

fn main() {
    let bin = Path::new(env!("CARGO_BIN_EXE_gcorr"));
    let dir = tempfile::tempdir().expect("temp dir");
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("AC1 turning point of Phi", Box::new(ac1)),
        ("AC2 measure oracles", Box::new(ac2)),
        ("AC3 ball batch", Box::new(ac3)),
        ("AC4 ellipsoid batch", Box::new(ac4)),
        ("AC5 FKG", Box::new(ac5)),
        ("AC6 transport contraction", Box::new(ac6)),
        ("AC7 quadratic form closed form", Box::new(ac7)),
        ("AC8 approximant properties", Box::new(ac8)),
        ("AC9 necessity scan", Box::new(|| ac9(bin, dir.path()))),
        ("AC10 determinism", Box::new(|| ac10(bin, dir.path()))),
    ];
    let mut failed = 0;
    for (name, run) in &criteria {
        match run() {
            Ok(msg) => println!("PASS {name}: {msg}"),
            Err(msg) => {
                failed += 1;
                println!("FAIL {name}: {msg}");
            }
        }
    }
    println!("{} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
