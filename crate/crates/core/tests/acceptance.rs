//! Acceptance checks. Each test prints one `PASS`/`FAIL`/`SKIP` line and then
//! asserts, so `cargo test --test acceptance -- --nocapture` doubles as a report.

mod common;

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

use common::{dense_dh, gaussian_grid, mat_vec, psnr_oracle, transition_width, XorShift};
use sigmoid_sr::bench::{run_benchmark, BenchSpec, SweepAxes};
use sigmoid_sr::fixtures::{fixture_set, step_edge, write_fixture_dir};
use sigmoid_sr::io::read_luma;
use sigmoid_sr::metrics::{MetricParams, SsimMode};
use sigmoid_sr::reconstruct::initial_estimate;
use sigmoid_sr::sharpen::{normalize_values, patch_origins, sharpen_patch, sigmoid_remap, PatchView};
use sigmoid_sr::{
    convolve2d, degrade, gaussian_kernel, psnr, reconstruct, sharpen_image, ssim, DegradationModel, ImagePlane,
    SRConfig, SigmoidParams,
};

fn verdict(id: u32, title: &str, ok: bool, detail: String) {
    let tag = if ok { "PASS" } else { "FAIL" };
    println!("[{tag}] criterion {id:>2} {title}: {detail}");
    assert!(ok, "criterion {id} ({title}) failed: {detail}");
}

fn skip(id: u32, title: &str, why: &str) {
    println!("[SKIP] criterion {id:>2} {title}: {why}");
}

fn secs(d: Duration) -> String {
    format!("{:.3}s", d.as_secs_f64())
}

#[test]
fn criterion_01_identity_transform() {
    let t = Instant::now();
    let mut rng = XorShift(0x1234_5678_9abc_def1);
    let mut worst_scalar = 0.0f64;
    for _ in 0..1000 {
        let y = loop {
            let v = rng.next_f64();
            if v > 0.0 && v < 1.0 {
                break v;
            }
        };
        worst_scalar = worst_scalar.max((sigmoid_remap(y, 1.0, 0.0).unwrap() - y).abs());
    }
    let params = SigmoidParams {
        sharpness: 1.0,
        location: 0.0,
        ..SigmoidParams::default()
    };
    let mut worst_image = 0.0f64;
    for (_, img) in fixture_set() {
        let out = sharpen_image(&img, &params).unwrap();
        for (a, b) in img.data().iter().zip(out.data()) {
            worst_image = worst_image.max((a - b).abs());
        }
    }
    let elapsed = t.elapsed();
    verdict(
        1,
        "identity transform",
        worst_scalar <= 1e-12 && worst_image <= 1e-9 && elapsed < Duration::from_secs(1),
        format!(
            "max |g(y;1,0)-y| = {worst_scalar:.2e}, max image deviation = {worst_image:.2e}, {}",
            secs(elapsed)
        ),
    );
}

fn interior() -> impl Strategy<Value = f64> {
    (1e-6f64..1.0 - 1e-6).prop_filter("open interval", |y| *y > 0.0 && *y < 1.0)
}

fn positive_k() -> impl Strategy<Value = f64> {
    0.25f64..6.0
}

#[test]
fn criterion_02_transform_algebra() {
    let t = Instant::now();
    let cfg = Config {
        cases: 10_000,
        failure_persistence: None,
        ..Config::default()
    };
    let mut failures = Vec::new();

    let mut runner = TestRunner::new(cfg.clone());
    let symmetry = runner.run(&(interior(), positive_k()), |(y, k)| {
        let lhs = sigmoid_remap(1.0 - y, k, 0.0).unwrap();
        let rhs = 1.0 - sigmoid_remap(y, k, 0.0).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-9, "y={y} K={k}: {lhs} vs {rhs}");
        Ok(())
    });
    if let Err(e) = symmetry {
        failures.push(format!("symmetry: {e}"));
    }

    let mut runner = TestRunner::new(cfg.clone());
    let inverse = runner.run(&(0.01f64..0.99, 0.5f64..4.0, -2.0f64..2.0), |(y, k, b)| {
        let fwd = sigmoid_remap(y, k, b).unwrap();
        if fwd <= 1e-12 || fwd >= 1.0 - 1e-12 {
            return Err(TestCaseError::reject("saturated"));
        }
        let back = sigmoid_remap(fwd, 1.0 / k, -b / k).unwrap();
        prop_assert!((back - y).abs() < 1e-8, "y={y} K={k} B={b}: {back}");
        Ok(())
    });
    if let Err(e) = inverse {
        failures.push(format!("inverse pair: {e}"));
    }

    let mut runner = TestRunner::new(cfg.clone());
    let order = runner.run(
        &(prop::collection::vec(0.0f64..255.0, 81), 1.0f64..6.0, -1.5f64..1.5),
        |(values, k, b)| {
            let params = SigmoidParams {
                sharpness: k,
                location: b,
                ..SigmoidParams::default()
            };
            let out = sharpen_patch(&PatchView::from_values(values.clone()).unwrap(), &params).unwrap();
            for i in 0..values.len() {
                for j in 0..values.len() {
                    if values[i] < values[j] {
                        prop_assert!(out.values[i] <= out.values[j], "order broken at {i},{j}");
                    }
                }
            }
            Ok(())
        },
    );
    if let Err(e) = order {
        failures.push(format!("order preservation: {e}"));
    }

    let mut runner = TestRunner::new(cfg);
    let fixed = runner.run(&(0.0f64..255.0, 1.0f64..6.0), |(c, k)| {
        let params = SigmoidParams {
            sharpness: k,
            ..SigmoidParams::default()
        };
        let out = sharpen_patch(&PatchView::from_values(vec![c; 81]).unwrap(), &params).unwrap();
        prop_assert!(out.values.iter().all(|v| (v - c).abs() < 1e-9), "constant {c} moved");
        Ok(())
    });
    if let Err(e) = fixed {
        failures.push(format!("constant fixed point: {e}"));
    }

    let elapsed = t.elapsed();
    verdict(
        2,
        "transform algebra",
        failures.is_empty() && elapsed < Duration::from_secs(10),
        if failures.is_empty() {
            format!("4 properties x 10000 cases, 0 failures, {}", secs(elapsed))
        } else {
            failures.join("; ")
        },
    );
}

#[test]
fn criterion_03_degradation_oracle() {
    let t = Instant::now();
    let mut rng = XorShift(0xdead_beef_cafe_f00d);
    let mut worst = 0.0f64;
    let trials = 40;
    for _ in 0..trials {
        let w = 7 + rng.below(18);
        let h = 7 + rng.below(18);
        let factor = 2 + rng.below(3);
        let offset = rng.below(factor);
        let sigma = 0.5 + 1.5 * rng.next_f64();
        let hr = rng.plane(w, h, 255.0);
        let model = DegradationModel {
            kernel_size: 7,
            kernel_sigma: sigma,
            factor,
            noise_sigma: 0.0,
            seed: 0,
            offset,
        };
        let lr = degrade(&hr, &model).unwrap();
        let (m, lw, lh) = dense_dh(w, h, &gaussian_grid(7, sigma), 7, factor, offset);
        assert_eq!(lr.dims(), (lw, lh));
        let expect = mat_vec(&m, hr.data());
        for (a, b) in lr.data().iter().zip(&expect) {
            worst = worst.max((a - b).abs());
        }
    }
    let elapsed = t.elapsed();
    verdict(
        3,
        "degradation oracle",
        worst < 1e-9 && elapsed < Duration::from_secs(5),
        format!(
            "{trials} random images up to 24x24, max abs error {worst:.2e}, {}",
            secs(elapsed)
        ),
    );
}

#[test]
fn criterion_04_metrics_oracle() {
    let mut rng = XorShift(42);
    let mut worst = 0.0f64;
    for crop in [0usize, 3] {
        for _ in 0..20 {
            let a = rng.plane(32, 32, 255.0);
            let b = rng.plane(32, 32, 255.0);
            let mp = MetricParams {
                crop_border: crop,
                ..MetricParams::default()
            };
            worst = worst.max((psnr(&a, &b, &mp).unwrap() - psnr_oracle(&a, &b, crop)).abs());
        }
    }

    let base = rng.plane(40, 40, 200.0);
    let shifted = base.map(|v| v + 16.0);
    let plus16 = psnr(&base, &shifted, &MetricParams::default()).unwrap();

    let camera = &fixture_set()[0].1;
    let self_windowed = ssim(camera, camera, &MetricParams::default()).unwrap();
    let global = MetricParams {
        ssim_mode: SsimMode::Global,
        ..MetricParams::default()
    };
    let self_global = ssim(camera, camera, &global).unwrap();
    let c100 = ImagePlane::filled(32, 32, 100.0);
    let c110 = ImagePlane::filled(32, 32, 110.0);
    let constant = ssim(&c100, &c110, &global).unwrap();

    let ok = worst <= 1e-10
        && (plus16 - 24.0484).abs() <= 1e-3
        && self_windowed == 1.0
        && self_global == 1.0
        && (constant - 0.99548).abs() <= 1e-4;
    verdict(
        4,
        "metrics oracle",
        ok,
        format!(
            "psnr vs oracle {worst:.1e}, +16 fixture {plus16:.4} dB, ssim(a,a) {self_windowed}/{self_global}, 100 vs 110 {constant:.5}"
        ),
    );
}

#[test]
fn criterion_05_edge_sharpening() {
    let t = Instant::now();
    let (w, h) = (60, 30);
    let edge = step_edge(w, h);
    let blurred = convolve2d(&edge, &gaussian_kernel(7, 1.2).unwrap());
    let params = SigmoidParams::default();
    let sharp = sharpen_image(&blurred, &params).unwrap();

    let row = h / 2;
    let before = transition_width(blurred.row(row), 50.0, 200.0);
    let after = transition_width(sharp.row(row), 50.0, 200.0);
    let reduction = 1.0 - after / before;

    // Every output pixel is a blend of patch outputs, so it must stay within
    // the guarded range of the patches that cover it.
    let side = params.patch_side();
    let rows = patch_origins(h, side, params.stride());
    let cols = patch_origins(w, side, params.stride());
    let mut violations = 0usize;
    for r in 0..h {
        for c in 0..w {
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for &pr in rows.iter().filter(|&&o| o <= r && r < o + side) {
                for &pc in cols.iter().filter(|&&o| o <= c && c < o + side) {
                    let mut vals = Vec::with_capacity(side * side);
                    for i in 0..side {
                        vals.extend_from_slice(&blurred.row(pr + i)[pc..pc + side]);
                    }
                    let n = normalize_values(&vals, params.eps);
                    lo = lo.min(n.lo);
                    hi = hi.max(n.hi);
                }
            }
            let v = sharp.get(r, c);
            if v < lo - 1e-9 || v > hi + 1e-9 {
                violations += 1;
            }
        }
    }
    let elapsed = t.elapsed();
    verdict(
        5,
        "edge sharpening",
        reduction >= 0.15 && violations == 0 && elapsed < Duration::from_secs(1),
        format!(
            "10-90% width {before:.3} -> {after:.3} px ({:.1}% narrower), {violations} out-of-range pixels, {}",
            100.0 * reduction,
            secs(elapsed)
        ),
    );
}

struct FixtureRun {
    name: String,
    bicubic_db: f64,
    sr_db: f64,
    first_cost: f64,
    final_cost: f64,
    descent: f64,
}

fn run_fixtures() -> (Vec<FixtureRun>, Duration) {
    let t = Instant::now();
    let cfg = SRConfig::default();
    let mp = MetricParams::for_scale(cfg.scale);
    let runs = fixture_set()
        .into_iter()
        .map(|(name, hr)| {
            let hr = hr.mod_crop(cfg.scale).unwrap();
            let lr = degrade(&hr, &cfg.degradation).unwrap();
            let bicubic = initial_estimate(&lr, cfg.scale).unwrap().clamp(0.0, 255.0);
            let (sr, trace) = reconstruct(&lr, &cfg).unwrap();
            FixtureRun {
                name,
                bicubic_db: psnr(&hr, &bicubic, &mp).unwrap(),
                sr_db: psnr(&hr, &sr, &mp).unwrap(),
                first_cost: trace.records[0].cost,
                final_cost: trace.final_cost,
                descent: trace.descent_fraction(),
            }
        })
        .collect();
    (runs, t.elapsed())
}

#[test]
fn criterion_06_end_to_end_improvement() {
    let (runs, elapsed) = run_fixtures();
    let gains: Vec<f64> = runs.iter().map(|r| r.sr_db - r.bicubic_db).collect();
    let mean = gains.iter().sum::<f64>() / gains.len() as f64;
    let per_image: Vec<String> = runs
        .iter()
        .map(|r| format!("{} {:.2}->{:.2}", r.name, r.bicubic_db, r.sr_db))
        .collect();
    verdict(
        6,
        "end-to-end improvement",
        gains.iter().all(|g| *g > 0.0) && mean >= 1.0 && elapsed < Duration::from_secs(120),
        format!("mean gain {mean:.2} dB [{}], {}", per_image.join(", "), secs(elapsed)),
    );
}

fn set_dir(var: &str) -> Option<PathBuf> {
    std::env::var_os(var).map(PathBuf::from).filter(|p| p.is_dir())
}

fn find_baby(dir: &Path) -> Option<PathBuf> {
    let mut hits: Vec<PathBuf> = std::fs::read_dir(dir)
        .ok()?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_stem()
                .and_then(|s| s.to_str())
                .is_some_and(|s| s.to_ascii_lowercase().starts_with("baby"))
        })
        .collect();
    hits.sort();
    hits.into_iter().next()
}

#[test]
fn criterion_07_reference_numbers() {
    let title = "reference numbers on Baby";
    let Some(dir) = set_dir("SIGMOID_SR_SET5") else {
        skip(7, title, "SIGMOID_SR_SET5 not set");
        return;
    };
    let Some(path) = find_baby(&dir) else {
        skip(7, title, "no baby* image in SIGMOID_SR_SET5");
        return;
    };
    let cfg = SRConfig::default();
    let hr = read_luma(&path).unwrap().mod_crop(cfg.scale).unwrap();
    let lr = degrade(&hr, &cfg.degradation).unwrap();
    let mp = MetricParams::for_scale(cfg.scale);
    let bicubic = psnr(&hr, &initial_estimate(&lr, cfg.scale).unwrap().clamp(0.0, 255.0), &mp).unwrap();
    let sr = psnr(&hr, &reconstruct(&lr, &cfg).unwrap().0, &mp).unwrap();
    verdict(
        7,
        title,
        (bicubic - 30.91).abs() <= 0.3 && (sr - 33.22).abs() <= 0.8,
        format!("bicubic {bicubic:.2} dB (target 30.91 +/- 0.3), proposed {sr:.2} dB (target 33.22 +/- 0.8)"),
    );
}

#[test]
fn criterion_08_sharpness_sweep_shape() {
    let title = "K sweep shape";
    let (Some(set5), Some(set14)) = (set_dir("SIGMOID_SR_SET5"), set_dir("SIGMOID_SR_SET14")) else {
        skip(8, title, "SIGMOID_SR_SET5 and SIGMOID_SR_SET14 not both set");
        return;
    };
    let sweep = SweepAxes {
        sharpness: vec![3.0, 4.0],
        ..SweepAxes::default()
    };
    let mut sums = [0.0f64; 2];
    let mut count = 0usize;
    for dir in [set5, set14] {
        let spec = BenchSpec {
            dataset_dir: dir,
            sweep: sweep.clone(),
            ..BenchSpec::default()
        };
        let report = run_benchmark(&spec).unwrap();
        let n = report.sr.rows.len() / 2;
        for (i, p) in sweep.points().iter().enumerate() {
            sums[i] += report.sr.average_for(p).unwrap().psnr_db * n as f64;
        }
        count += n;
    }
    let (k3, k4) = (sums[0] / count as f64, sums[1] / count as f64);
    verdict(
        8,
        title,
        k4 <= k3,
        format!("{count} images, avg PSNR K=3 {k3:.3} dB, K=4 {k4:.3} dB"),
    );
}

fn metric_columns(csv: &str) -> String {
    csv.lines()
        .map(|l| l.rsplit_once(',').map_or(l, |(head, _seconds)| head))
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn criterion_09_bench_determinism() {
    let data = tempfile::tempdir().unwrap();
    write_fixture_dir(data.path()).unwrap();
    let mut outputs = Vec::new();
    for run in 0..2 {
        let out = data.path().join(format!("out{run}"));
        let spec = BenchSpec {
            dataset_dir: data.path().to_path_buf(),
            hr_glob: "*.pgm".into(),
            sweep: SweepAxes {
                sharpness: vec![2.0, 3.0],
                noise_sigma: vec![0.0, 2.0],
                ..SweepAxes::default()
            },
            output_dir: Some(out.clone()),
            master_seed: 7,
            ..BenchSpec::default()
        };
        run_benchmark(&spec).unwrap();
        let sr = std::fs::read_to_string(out.join("report.csv")).unwrap();
        let bic = std::fs::read_to_string(out.join("bicubic.csv")).unwrap();
        outputs.push((metric_columns(&sr), metric_columns(&bic), sr.lines().count()));
    }
    let same = outputs[0].0 == outputs[1].0 && outputs[0].1 == outputs[1].1;
    verdict(
        9,
        "bench determinism",
        same,
        format!(
            "two runs, {} report lines each, metric columns identical: {same}",
            outputs[0].2
        ),
    );
}

#[test]
fn criterion_10_cost_trace() {
    let (runs, _) = run_fixtures();
    let ok = runs.iter().all(|r| r.final_cost < r.first_cost && r.descent >= 0.9);
    let per_image: Vec<String> = runs
        .iter()
        .map(|r| {
            format!(
                "{} {:.4e}->{:.4e} ({:.0}% descending)",
                r.name,
                r.first_cost,
                r.final_cost,
                100.0 * r.descent
            )
        })
        .collect();
    verdict(10, "cost trace", ok, per_image.join(", "));
}
