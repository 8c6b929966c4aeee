//! Experiment runner: turns a validated config into result files.
//!
//! Every run writes `manifest.txt` (the fully resolved config, sorted) and
//! `metrics.csv` into the output directory; the QHED experiments can also
//! emit per-image edge maps as PGM. Runs are pure functions of their
//! config: repeating one produces byte-identical outputs.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::encode::GrayImage;
use crate::error::{Error, Result};
use crate::noise::{noisy_qhed_large, NoiseModel};
use crate::pipeline::config::{
    entanglement_name, map_kind_name, ExperimentConfig, KernelClassifyConfig, NoiseKind,
    NoiseSweepConfig, QhedClassifyConfig,
};
use crate::pipeline::idx::{load_idx, Dataset};
use crate::pipeline::logreg::{logreg_predict, logreg_train};
use crate::pipeline::pgm::save_edge_pgm;
use crate::pipeline::preprocess::{apply_preprocess, fit_preprocess};
use crate::qhed::{qhed_large, EdgeMap};
use crate::qkernel::{kernel_cross, kernel_matrix, ovr_predict, ovr_train, FeatureMapSpec};

/// Human-readable result lines for the CLI to print.
#[derive(Clone, Debug)]
pub struct RunSummary {
    pub lines: Vec<String>,
}

/// Formats a float with 6 significant digits, the fixed CSV convention.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    let exponent = x.abs().log10().floor() as i32;
    let decimals = (5 - exponent).max(0) as usize;
    format!("{x:.decimals$}")
}

fn accuracy(predicted: &[usize], actual: &[usize]) -> f64 {
    let hits = predicted.iter().zip(actual).filter(|(p, a)| p == a).count();
    hits as f64 / actual.len() as f64
}

fn load_split(cfg: &ExperimentConfig) -> Result<(Dataset, Dataset)> {
    let common = cfg.common();
    let data = load_idx(&common.images, &common.labels)?.filter_classes(&common.classes);
    data.split_train_test(common.n_train, common.n_test, common.seed)
}

fn write_manifest(cfg: &ExperimentConfig, out_dir: &Path) -> Result<PathBuf> {
    let path = out_dir.join("manifest.txt");
    let mut text = String::new();
    for (key, value) in cfg.manifest_entries() {
        text.push_str(&key);
        text.push_str(" = ");
        text.push_str(&value);
        text.push('\n');
    }
    std::fs::write(&path, text)?;
    Ok(path)
}

fn write_csv(out_dir: &Path, header: &str, rows: &[String]) -> Result<PathBuf> {
    let path = out_dir.join("metrics.csv");
    let mut text = String::from(header);
    text.push('\n');
    for row in rows {
        text.push_str(row);
        text.push('\n');
    }
    std::fs::write(&path, text)?;
    Ok(path)
}

fn edge_bits_to_features(map: &EdgeMap) -> Vec<f64> {
    map.bits()
        .iter()
        .map(|&b| if b { 1.0 } else { 0.0 })
        .collect()
}

fn noise_model(kind: NoiseKind, level: f64, two_q: bool) -> Result<NoiseModel> {
    match kind {
        NoiseKind::None => Ok(NoiseModel::noiseless()),
        NoiseKind::Pauli => NoiseModel::pauli(level, level),
        NoiseKind::Depolarizing => NoiseModel::depolarizing(level, if two_q { level } else { 0.0 }),
    }
}

/// Noiseless edge-map features for a set of images.
fn clean_edge_features(
    images: &[GrayImage],
    patch_side: usize,
    threshold: f64,
) -> Result<Vec<Vec<f64>>> {
    images
        .iter()
        .map(|img| {
            Ok(edge_bits_to_features(&qhed_large(
                img, patch_side, threshold,
            )?))
        })
        .collect()
}

/// Noisy edge maps for a set of images, one derived circuit seed each.
fn noisy_edge_maps(
    images: &[GrayImage],
    patch_side: usize,
    threshold: f64,
    model: &NoiseModel,
    shots: u64,
    seed: u64,
) -> Result<Vec<EdgeMap>> {
    let mut seeder = ChaCha8Rng::seed_from_u64(seed);
    images
        .iter()
        .map(|img| noisy_qhed_large(img, patch_side, threshold, model, shots, seeder.gen()))
        .collect()
}

fn save_edge_maps(maps: &[EdgeMap], dir: &Path, prefix: &str) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    for (i, map) in maps.iter().enumerate() {
        save_edge_pgm(map, &dir.join(format!("{prefix}_{i:04}.pgm")))?;
    }
    Ok(())
}

fn run_qhed_classify(cfg: &QhedClassifyConfig, full: &ExperimentConfig) -> Result<RunSummary> {
    let (train, test) = load_split(full)?;
    let out_dir = &cfg.common.out_dir;
    std::fs::create_dir_all(out_dir)?;

    let train_features =
        clean_edge_features(train.images(), cfg.edges.patch_side, cfg.edges.threshold)?;
    let model = logreg_train(
        &train_features,
        train.labels(),
        cfg.edges.l1,
        cfg.edges.epochs,
        cfg.edges.lr,
        cfg.common.seed,
    )?;

    // Noise, when configured, hits the test-side circuits: the classifier
    // is trained on clean edge maps and then evaluated on noisy ones.
    let test_maps: Vec<EdgeMap> = if cfg.noise == NoiseKind::None {
        test.images()
            .iter()
            .map(|img| qhed_large(img, cfg.edges.patch_side, cfg.edges.threshold))
            .collect::<Result<_>>()?
    } else {
        let noise = noise_model(cfg.noise, cfg.noise_level, cfg.noise_2q)?;
        noisy_edge_maps(
            test.images(),
            cfg.edges.patch_side,
            cfg.edges.threshold,
            &noise,
            cfg.edges.shots,
            cfg.common.seed,
        )?
    };
    let test_features: Vec<Vec<f64>> = test_maps.iter().map(edge_bits_to_features).collect();

    let train_predicted = logreg_predict(&model, &train_features)?;
    let test_predicted = logreg_predict(&model, &test_features)?;
    let train_acc = accuracy(&train_predicted, train.labels());
    let test_acc = accuracy(&test_predicted, test.labels());

    if cfg.edges.emit_maps {
        save_edge_maps(&test_maps, &out_dir.join("edges"), "test")?;
    }
    write_manifest(full, out_dir)?;
    let rows = vec![
        format!("train,{},{}", train.len(), fmt_sig(train_acc)),
        format!("test,{},{}", test.len(), fmt_sig(test_acc)),
    ];
    let csv = write_csv(out_dir, "split,n,accuracy", &rows)?;

    Ok(RunSummary {
        lines: vec![
            format!(
                "train accuracy {} over {} images",
                fmt_sig(train_acc),
                train.len()
            ),
            format!(
                "test accuracy {} over {} images",
                fmt_sig(test_acc),
                test.len()
            ),
            format!("wrote {}", csv.display()),
        ],
    })
}

fn run_noise_sweep(cfg: &NoiseSweepConfig, full: &ExperimentConfig) -> Result<RunSummary> {
    let (train, test) = load_split(full)?;
    let out_dir = &cfg.common.out_dir;
    std::fs::create_dir_all(out_dir)?;

    let train_features =
        clean_edge_features(train.images(), cfg.edges.patch_side, cfg.edges.threshold)?;
    let model = logreg_train(
        &train_features,
        train.labels(),
        cfg.edges.l1,
        cfg.edges.epochs,
        cfg.edges.lr,
        cfg.common.seed,
    )?;

    let mut master = ChaCha8Rng::seed_from_u64(cfg.common.seed);
    let mut rows = Vec::with_capacity(cfg.levels.len());
    let mut lines = Vec::new();
    for (level_index, &level) in cfg.levels.iter().enumerate() {
        let noise = noise_model(cfg.noise, level, cfg.noise_2q)?;
        let level_seed: u64 = master.gen();
        let maps = noisy_edge_maps(
            test.images(),
            cfg.edges.patch_side,
            cfg.edges.threshold,
            &noise,
            cfg.edges.shots,
            level_seed,
        )?;
        let features: Vec<Vec<f64>> = maps.iter().map(edge_bits_to_features).collect();
        let predicted = logreg_predict(&model, &features)?;
        let acc = accuracy(&predicted, test.labels());
        rows.push(format!(
            "{},{},{}",
            fmt_sig(level),
            fmt_sig(acc),
            cfg.common.seed
        ));
        lines.push(format!(
            "level {} accuracy {}",
            fmt_sig(level),
            fmt_sig(acc)
        ));
        if cfg.edges.emit_maps {
            save_edge_maps(
                &maps,
                &out_dir.join("edges"),
                &format!("level{level_index}_test"),
            )?;
        }
    }

    write_manifest(full, out_dir)?;
    let csv = write_csv(out_dir, "p,accuracy,seed", &rows)?;
    lines.push(format!("wrote {}", csv.display()));
    Ok(RunSummary { lines })
}

fn flatten_pixels(images: &[GrayImage]) -> Vec<Vec<f64>> {
    images
        .iter()
        .map(|img| img.pixels().iter().map(|&p| p as f64).collect())
        .collect()
}

fn run_kernel_classify(cfg: &KernelClassifyConfig, full: &ExperimentConfig) -> Result<RunSummary> {
    let (train, test) = load_split(full)?;
    let out_dir = &cfg.common.out_dir;
    std::fs::create_dir_all(out_dir)?;

    let transform = fit_preprocess(&flatten_pixels(train.images()), cfg.k)?;
    let train_mapped = apply_preprocess(&transform, &flatten_pixels(train.images()))?;
    let test_mapped = apply_preprocess(&transform, &flatten_pixels(test.images()))?;

    let spec = FeatureMapSpec::new(cfg.map_kind, cfg.reps, cfg.entanglement, cfg.k)?;
    let gram = kernel_matrix(&train_mapped, &spec)?;
    let model = ovr_train(&gram, train.labels(), cfg.c)?;

    let train_rows: Vec<Vec<f64>> = (0..gram.dim()).map(|i| gram.row(i).to_vec()).collect();
    let (train_predicted, _) = ovr_predict(&model, &train_rows)?;
    let cross = kernel_cross(&test_mapped, &train_mapped, &spec)?;
    let (test_predicted, _) = ovr_predict(&model, &cross)?;

    let train_acc = accuracy(&train_predicted, train.labels());
    let test_acc = accuracy(&test_predicted, test.labels());

    write_manifest(full, out_dir)?;
    let rows = vec![
        format!("train,{},{}", train.len(), fmt_sig(train_acc)),
        format!("test,{},{}", test.len(), fmt_sig(test_acc)),
    ];
    let csv = write_csv(out_dir, "split,n,accuracy", &rows)?;

    Ok(RunSummary {
        lines: vec![
            format!(
                "{} map, {} entanglement: train accuracy {}, test accuracy {}",
                map_kind_name(cfg.map_kind),
                entanglement_name(cfg.entanglement),
                fmt_sig(train_acc),
                fmt_sig(test_acc)
            ),
            format!("wrote {}", csv.display()),
        ],
    })
}

/// Runs one experiment to completion, writing all artifacts.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunSummary> {
    match cfg {
        ExperimentConfig::QhedClassify(c) => {
            run_qhed_classify(c, cfg).map_err(|e| Error::Consistency(format!("qhed-classify: {e}")))
        }
        ExperimentConfig::NoiseSweep(c) => {
            run_noise_sweep(c, cfg).map_err(|e| Error::Consistency(format!("noise-sweep: {e}")))
        }
        ExperimentConfig::KernelClassify(c) => run_kernel_classify(c, cfg)
            .map_err(|e| Error::Consistency(format!("kernel-classify: {e}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::config::RawConfig;
    use crate::pipeline::idx::{write_idx_images, write_idx_labels};

    /// Small labeled set of 8×8 stripe patterns: class 0 = vertical bar,
    /// class 2 = horizontal bar, class 3 = bright diagonal.
    fn stripe_dataset(dir: &Path, per_class: usize) -> (PathBuf, PathBuf) {
        let mut rng = ChaCha8Rng::seed_from_u64(123);
        let mut images = Vec::new();
        let mut labels = Vec::new();
        for i in 0..per_class * 3 {
            let class = [0usize, 2, 3][i % 3];
            let mut pixels = vec![0u8; 64];
            for y in 0..8 {
                for x in 0..8 {
                    let on = match class {
                        0 => x == 3,
                        2 => y == 3,
                        _ => x == y,
                    };
                    if on {
                        pixels[y * 8 + x] = 180 + rng.gen_range(0..60);
                    } else {
                        pixels[y * 8 + x] = rng.gen_range(0..25);
                    }
                }
            }
            images.push(GrayImage::new(8, 8, pixels).unwrap());
            labels.push(class);
        }
        let images_path = dir.join("imgs.idx");
        let labels_path = dir.join("lbls.idx");
        write_idx_images(&images_path, &images).unwrap();
        write_idx_labels(&labels_path, &labels).unwrap();
        (images_path, labels_path)
    }

    fn config_from(text: &str) -> ExperimentConfig {
        ExperimentConfig::from_raw(&RawConfig::parse(text).unwrap()).unwrap()
    }

    #[test]
    fn fmt_sig_is_stable_across_magnitudes() {
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(fmt_sig(1.0), "1.00000");
        assert_eq!(fmt_sig(0.74), "0.740000");
        assert_eq!(fmt_sig(0.001), "0.00100000");
        assert_eq!(fmt_sig(123.456), "123.456");
        assert_eq!(fmt_sig(0.8333333333), "0.833333");
    }

    #[test]
    fn qhed_classify_separates_stripes_and_reruns_identically() {
        let dir = tempfile::tempdir().unwrap();
        let (images, labels) = stripe_dataset(dir.path(), 8);
        let out = dir.path().join("out");
        let text = format!(
            "experiment = qhed-classify\nimages = {}\nlabels = {}\nout_dir = {}\n\
             n_train = 15\nn_test = 6\nseed = 5\nepochs = 120\n",
            images.display(),
            labels.display(),
            out.display()
        );
        let cfg = config_from(&text);
        let summary = run_experiment(&cfg).unwrap();
        assert_eq!(summary.lines.len(), 3);

        let csv = std::fs::read(out.join("metrics.csv")).unwrap();
        let manifest = std::fs::read(out.join("manifest.txt")).unwrap();
        let text_csv = String::from_utf8(csv.clone()).unwrap();
        assert!(text_csv.starts_with("split,n,accuracy\n"));
        let test_row = text_csv.lines().nth(2).unwrap();
        let acc: f64 = test_row.split(',').nth(2).unwrap().parse().unwrap();
        assert!(
            acc >= 0.5,
            "stripes should classify above chance, got {acc}"
        );

        let edge0 = std::fs::read(out.join("edges/test_0000.pgm")).unwrap();

        run_experiment(&cfg).unwrap();
        assert_eq!(std::fs::read(out.join("metrics.csv")).unwrap(), csv);
        assert_eq!(std::fs::read(out.join("manifest.txt")).unwrap(), manifest);
        assert_eq!(
            std::fs::read(out.join("edges/test_0000.pgm")).unwrap(),
            edge0
        );
    }

    #[test]
    fn noise_sweep_writes_one_row_per_level() {
        let dir = tempfile::tempdir().unwrap();
        let (images, labels) = stripe_dataset(dir.path(), 6);
        let out = dir.path().join("out");
        let text = format!(
            "experiment = noise-sweep\nimages = {}\nlabels = {}\nout_dir = {}\n\
             n_train = 12\nn_test = 4\nseed = 7\nnoise = pauli\nlevels = 0, 0.01\n\
             shots = 128\nepochs = 80\n",
            images.display(),
            labels.display(),
            out.display()
        );
        let cfg = config_from(&text);
        run_experiment(&cfg).unwrap();
        let csv = std::fs::read_to_string(out.join("metrics.csv")).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "p,accuracy,seed");
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("0,"));
        assert!(lines[2].starts_with("0.0100000,"));
        assert!(lines[1].ends_with(",7"));
    }

    #[test]
    fn kernel_classify_runs_end_to_end() {
        let dir = tempfile::tempdir().unwrap();
        let (images, labels) = stripe_dataset(dir.path(), 8);
        let out = dir.path().join("out");
        let text = format!(
            "experiment = kernel-classify\nimages = {}\nlabels = {}\nout_dir = {}\n\
             n_train = 15\nn_test = 6\nseed = 3\nk = 3\nmap = zz\nentanglement = full\nc = 10\n",
            images.display(),
            labels.display(),
            out.display()
        );
        let cfg = config_from(&text);
        let first = run_experiment(&cfg).unwrap();
        assert!(first.lines[0].contains("zz map"));
        let csv = std::fs::read(out.join("metrics.csv")).unwrap();
        let text_csv = String::from_utf8(csv.clone()).unwrap();
        let test_row = text_csv.lines().nth(2).unwrap();
        let acc: f64 = test_row.split(',').nth(2).unwrap().parse().unwrap();
        assert!(acc > 0.33, "kernel test accuracy {acc} at chance level");

        run_experiment(&cfg).unwrap();
        assert_eq!(std::fs::read(out.join("metrics.csv")).unwrap(), csv);
    }

    #[test]
    fn split_too_large_fails_before_compute() {
        let dir = tempfile::tempdir().unwrap();
        let (images, labels) = stripe_dataset(dir.path(), 2);
        let out = dir.path().join("out");
        let text = format!(
            "experiment = qhed-classify\nimages = {}\nlabels = {}\nout_dir = {}\n\
             n_train = 100\nn_test = 50\n",
            images.display(),
            labels.display(),
            out.display()
        );
        let cfg = config_from(&text);
        assert!(run_experiment(&cfg).is_err());
        assert!(!out.join("metrics.csv").exists());
    }
}
