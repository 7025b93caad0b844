//! Dataset sweeps: degrade every HR image under each sweep point, reconstruct,
//! score against the original and collect a CSV report.
//!
//! Per-run noise seeds are derived from the master seed, the image name and
//! the sweep point, so a run's result does not depend on which other runs are
//! in the sweep or in what order they execute.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::degrade::degrade;
use crate::error::{Error, Result};
use crate::io::{read_luma, write_gray};
use crate::metrics::{psnr, ssim, MetricParams};
use crate::plane::ImagePlane;
use crate::reconstruct::{initial_estimate, reconstruct, SRConfig};

pub const AVERAGE_ROW: &str = "__avg__";
pub const CSV_HEADER: &str = "image,k,K,B,blur_sigma,noise_sigma,psnr_db,ssim,seconds";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepAxes {
    #[serde(rename = "K")]
    pub sharpness: Vec<f64>,
    #[serde(rename = "B")]
    pub location: Vec<f64>,
    pub blur_sigma: Vec<f64>,
    pub scale: Vec<usize>,
    pub noise_sigma: Vec<f64>,
}

impl Default for SweepAxes {
    fn default() -> Self {
        Self {
            sharpness: vec![2.0],
            location: vec![0.0],
            blur_sigma: vec![1.2],
            scale: vec![3],
            noise_sigma: vec![0.0],
        }
    }
}

/// One point of the sweep grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub scale: usize,
    pub sharpness: f64,
    pub location: f64,
    pub blur_sigma: f64,
    pub noise_sigma: f64,
}

impl SweepAxes {
    pub fn point_count(&self) -> usize {
        self.sharpness.len() * self.location.len() * self.blur_sigma.len() * self.scale.len() * self.noise_sigma.len()
    }

    /// Cartesian product in `(k, K, B, blur σ, noise σ)` order.
    pub fn points(&self) -> Vec<SweepPoint> {
        let mut out = Vec::with_capacity(self.point_count());
        for &scale in &self.scale {
            for &sharpness in &self.sharpness {
                for &location in &self.location {
                    for &blur_sigma in &self.blur_sigma {
                        for &noise_sigma in &self.noise_sigma {
                            out.push(SweepPoint {
                                scale,
                                sharpness,
                                location,
                                blur_sigma,
                                noise_sigma,
                            });
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchSpec {
    pub dataset_dir: PathBuf,
    /// File-name pattern (`*`, `?`, `[..]`) selecting HR images.
    pub hr_glob: String,
    pub sweep: SweepAxes,
    pub base: SRConfig,
    pub output_dir: Option<PathBuf>,
    pub emit_images: bool,
    /// Upper bound on `images × sweep points`.
    pub max_runs: usize,
    pub master_seed: u64,
    /// Border crop for scoring; `None` uses the run's scale factor.
    pub crop_border: Option<usize>,
}

impl Default for BenchSpec {
    fn default() -> Self {
        Self {
            dataset_dir: PathBuf::from("."),
            hr_glob: "*".into(),
            sweep: SweepAxes::default(),
            base: SRConfig::default(),
            output_dir: None,
            emit_images: false,
            max_runs: 200,
            master_seed: 0,
            crop_border: None,
        }
    }
}

impl BenchSpec {
    pub fn validate(&self) -> Result<()> {
        let axes = &self.sweep;
        for (name, len) in [
            ("K", axes.sharpness.len()),
            ("B", axes.location.len()),
            ("blur_sigma", axes.blur_sigma.len()),
            ("scale", axes.scale.len()),
            ("noise_sigma", axes.noise_sigma.len()),
        ] {
            if len == 0 {
                return Err(Error::Config(format!("sweep axis {name} is empty")));
            }
        }
        for p in axes.points() {
            self.config_for(&p).validate()?;
        }
        Ok(())
    }

    /// Solver config at one sweep point (the solver's blur matches the data's).
    pub fn config_for(&self, p: &SweepPoint) -> SRConfig {
        let mut cfg = self.base.clone().with_scale(p.scale);
        cfg.sigmoid.sharpness = p.sharpness;
        cfg.sigmoid.location = p.location;
        cfg.degradation.kernel_sigma = p.blur_sigma;
        cfg.degradation.noise_sigma = p.noise_sigma;
        cfg
    }

    pub fn metric_params(&self, scale: usize) -> MetricParams {
        let mut m = MetricParams::for_scale(scale);
        if let Some(c) = self.crop_border {
            m.crop_border = c;
        }
        m
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Noise seed for one `(image, sweep point)` pair.
pub fn derive_seed(master: u64, image: &str, p: &SweepPoint) -> u64 {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    h.update(image.as_bytes());
    h.update([0u8]);
    h.update((p.scale as u64).to_le_bytes());
    for v in [p.sharpness, p.location, p.blur_sigma, p.noise_sigma] {
        h.update(v.to_bits().to_le_bytes());
    }
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("sha256 has 32 bytes"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub image: String,
    pub k: usize,
    #[serde(rename = "K")]
    pub sharpness: f64,
    #[serde(rename = "B")]
    pub location: f64,
    pub blur_sigma: f64,
    pub noise_sigma: f64,
    pub psnr_db: f64,
    pub ssim: f64,
    pub seconds: f64,
}

impl BenchRow {
    fn point(&self) -> SweepPoint {
        SweepPoint {
            scale: self.k,
            sharpness: self.sharpness,
            location: self.location,
            blur_sigma: self.blur_sigma,
            noise_sigma: self.noise_sigma,
        }
    }

    fn sort_key(&self) -> impl Ord + '_ {
        (
            &self.image,
            self.k,
            ordered(self.sharpness),
            ordered(self.location),
            ordered(self.blur_sigma),
            ordered(self.noise_sigma),
        )
    }
}

fn ordered(v: f64) -> i64 {
    // Total order on finite floats, via the IEEE bit pattern.
    let bits = v.to_bits() as i64;
    bits ^ (((bits >> 63) as u64) >> 1) as i64
}

/// A table of per-run rows followed by one average row per sweep point.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub rows: Vec<BenchRow>,
    pub averages: Vec<BenchRow>,
}

impl Table {
    fn from_rows(mut rows: Vec<BenchRow>) -> Self {
        rows.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
        let mut points: Vec<SweepPoint> = Vec::new();
        for r in &rows {
            if !points.contains(&r.point()) {
                points.push(r.point());
            }
        }
        let mut averages: Vec<BenchRow> = points
            .iter()
            .map(|p| {
                let group: Vec<&BenchRow> = rows.iter().filter(|r| r.point() == *p).collect();
                let n = group.len() as f64;
                BenchRow {
                    image: AVERAGE_ROW.into(),
                    k: p.scale,
                    sharpness: p.sharpness,
                    location: p.location,
                    blur_sigma: p.blur_sigma,
                    noise_sigma: p.noise_sigma,
                    psnr_db: group.iter().map(|r| r.psnr_db).sum::<f64>() / n,
                    ssim: group.iter().map(|r| r.ssim).sum::<f64>() / n,
                    seconds: group.iter().map(|r| r.seconds).sum::<f64>() / n,
                }
            })
            .collect();
        averages.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
        Self { rows, averages }
    }

    pub fn average_for(&self, p: &SweepPoint) -> Option<&BenchRow> {
        self.averages.iter().find(|r| r.point() == *p)
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in self.rows.iter().chain(&self.averages) {
            w.serialize(r).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::InvalidInput(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    /// Parses the output of [`Table::to_csv`].
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(text.as_bytes());
        let mut table = Table::default();
        for rec in rd.deserialize::<BenchRow>() {
            let row = rec.map_err(csv_err)?;
            if row.image == AVERAGE_ROW {
                table.averages.push(row);
            } else {
                table.rows.push(row);
            }
        }
        Ok(table)
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::InvalidInput(format!("csv: {e}"))
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BenchReport {
    /// The proposed method.
    pub sr: Table,
    /// Bicubic upscaling of the same LR inputs, for comparison.
    pub bicubic: Table,
    /// Files that matched the pattern but could not be read.
    pub skipped: Vec<(PathBuf, String)>,
}

fn list_images(spec: &BenchSpec) -> Result<Vec<PathBuf>> {
    let pattern =
        glob::Pattern::new(&spec.hr_glob).map_err(|e| Error::Config(format!("bad hr_glob {:?}: {e}", spec.hr_glob)))?;
    let mut out = Vec::new();
    for entry in std::fs::read_dir(&spec.dataset_dir)? {
        let path = entry?.path();
        let matches = path
            .file_name()
            .and_then(|n| n.to_str())
            .is_some_and(|n| pattern.matches(n));
        if path.is_file() && matches {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

fn image_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

struct RunOutput {
    sr: BenchRow,
    bicubic: BenchRow,
}

fn run_one(spec: &BenchSpec, name: &str, hr: &ImagePlane, p: &SweepPoint) -> Result<RunOutput> {
    let cfg = spec.config_for(p);
    let hr = hr.mod_crop(p.scale)?;
    let mut model = cfg.degradation.clone();
    model.seed = derive_seed(spec.master_seed, name, p);
    let lr = degrade(&hr, &model)?;

    let started = Instant::now();
    let (sr, _trace) = reconstruct(&lr, &cfg)?;
    let sr_seconds = started.elapsed().as_secs_f64();

    let started = Instant::now();
    let bicubic = initial_estimate(&lr, p.scale)?.clamp(0.0, 255.0);
    let bicubic_seconds = started.elapsed().as_secs_f64();

    let mp = spec.metric_params(p.scale);
    let row = |psnr_db, ssim, seconds| BenchRow {
        image: name.to_string(),
        k: p.scale,
        sharpness: p.sharpness,
        location: p.location,
        blur_sigma: p.blur_sigma,
        noise_sigma: p.noise_sigma,
        psnr_db,
        ssim,
        seconds,
    };
    let out = RunOutput {
        sr: row(psnr(&hr, &sr, &mp)?, ssim(&hr, &sr, &mp)?, sr_seconds),
        bicubic: row(psnr(&hr, &bicubic, &mp)?, ssim(&hr, &bicubic, &mp)?, bicubic_seconds),
    };

    if spec.emit_images {
        if let Some(dir) = &spec.output_dir {
            let dir = dir.join("images");
            std::fs::create_dir_all(&dir)?;
            let tag = format!(
                "{name}_k{}_K{}_B{}_s{}_n{}",
                p.scale, p.sharpness, p.location, p.blur_sigma, p.noise_sigma
            );
            write_gray(&dir.join(format!("{tag}_lr.pgm")), &lr)?;
            write_gray(&dir.join(format!("{tag}_sr.pgm")), &sr)?;
            write_gray(&dir.join(format!("{tag}_bicubic.pgm")), &bicubic)?;
        }
    }
    Ok(out)
}

/// Runs every `(image, sweep point)` pair and, when `output_dir` is set,
/// writes `report.csv`, `bicubic.csv` and `spec.json` there.
pub fn run_benchmark(spec: &BenchSpec) -> Result<BenchReport> {
    spec.validate()?;
    let files = list_images(spec)?;
    let mut images = Vec::new();
    let mut skipped = Vec::new();
    for path in files {
        match read_luma(&path) {
            Ok(p) => images.push((image_name(&path), p)),
            Err(e) => {
                log::warn!("skipping {}: {e}", path.display());
                skipped.push((path, e.to_string()));
            }
        }
    }
    if images.is_empty() {
        return Err(Error::Config(format!(
            "no readable HR images matching {:?} in {}",
            spec.hr_glob,
            spec.dataset_dir.display()
        )));
    }
    let points = spec.sweep.points();
    let runs = images.len() * points.len();
    if runs > spec.max_runs {
        return Err(Error::Config(format!(
            "{runs} runs exceed max_runs {} ({} images x {} sweep points)",
            spec.max_runs,
            images.len(),
            points.len()
        )));
    }

    let tasks: Vec<(&String, &ImagePlane, SweepPoint)> = images
        .iter()
        .flat_map(|(n, p)| points.iter().map(move |pt| (n, p, *pt)))
        .collect();
    let outputs: Vec<RunOutput> = tasks
        .par_iter()
        .map(|(name, hr, p)| run_one(spec, name, hr, p))
        .collect::<Result<_>>()?;

    let (sr_rows, bic_rows): (Vec<_>, Vec<_>) = outputs.into_iter().map(|o| (o.sr, o.bicubic)).unzip();
    let report = BenchReport {
        sr: Table::from_rows(sr_rows),
        bicubic: Table::from_rows(bic_rows),
        skipped,
    };

    if let Some(dir) = &spec.output_dir {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("report.csv"), report.sr.to_csv()?)?;
        std::fs::write(dir.join("bicubic.csv"), report.bicubic.to_csv()?)?;
        std::fs::write(dir.join("spec.json"), serde_json::to_string_pretty(spec)?)?;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(image: &str, k: f64, psnr: f64) -> BenchRow {
        BenchRow {
            image: image.into(),
            k: 3,
            sharpness: k,
            location: 0.0,
            blur_sigma: 1.2,
            noise_sigma: 0.0,
            psnr_db: psnr,
            ssim: psnr / 100.0,
            seconds: 0.5,
        }
    }

    #[test]
    fn averages_per_point_and_sorted_rows() {
        let t = Table::from_rows(vec![row("b", 2.0, 30.0), row("a", 3.0, 20.0), row("a", 2.0, 10.0)]);
        let names: Vec<_> = t.rows.iter().map(|r| (r.image.as_str(), r.sharpness)).collect();
        assert_eq!(names, vec![("a", 2.0), ("a", 3.0), ("b", 2.0)]);
        assert_eq!(t.averages.len(), 2);
        assert_eq!(t.averages[0].psnr_db, 20.0);
        assert_eq!(t.averages[1].psnr_db, 20.0);
        assert!(t.averages.iter().all(|r| r.image == AVERAGE_ROW));
    }

    #[test]
    fn csv_header_and_round_trip() {
        let t = Table::from_rows(vec![row("x", 2.0, 31.234_567_890_123), row("y", 2.0, 1.0 / 3.0)]);
        let text = t.to_csv().unwrap();
        assert_eq!(text.lines().next().unwrap(), CSV_HEADER);
        assert_eq!(Table::from_csv(&text).unwrap(), t);
    }

    #[test]
    fn empty_axis_rejected() {
        let mut spec = BenchSpec::default();
        spec.sweep.sharpness.clear();
        assert!(matches!(spec.validate(), Err(Error::Config(_))));
        let mut spec = BenchSpec::default();
        spec.sweep.scale = vec![1];
        assert!(spec.validate().is_err());
    }

    #[test]
    fn seeds_depend_on_image_and_point() {
        let p = SweepAxes::default().points()[0];
        let q = SweepPoint { noise_sigma: 2.0, ..p };
        assert_eq!(derive_seed(1, "a", &p), derive_seed(1, "a", &p));
        assert_ne!(derive_seed(1, "a", &p), derive_seed(1, "b", &p));
        assert_ne!(derive_seed(1, "a", &p), derive_seed(1, "a", &q));
        assert_ne!(derive_seed(1, "a", &p), derive_seed(2, "a", &p));
    }

    #[test]
    fn ordering_is_numeric() {
        let mut v = [3.0, -1.0, 0.0, -2.5, 1.5];
        v.sort_by_key(|&x| ordered(x));
        assert_eq!(v, [-2.5, -1.0, 0.0, 1.5, 3.0]);
    }

    #[test]
    fn config_json_names() {
        let spec: BenchSpec = serde_json::from_str(
            r#"{"dataset_dir": "d", "sweep": {"K": [2, 3, 4], "B": [0]}, "base": {"lambda": 0.3}}"#,
        )
        .unwrap();
        assert_eq!(spec.sweep.sharpness, vec![2.0, 3.0, 4.0]);
        assert_eq!(spec.sweep.scale, vec![3]);
        assert_eq!(spec.base.lambda, 0.3);
        assert_eq!(spec.max_runs, 200);
    }
}
