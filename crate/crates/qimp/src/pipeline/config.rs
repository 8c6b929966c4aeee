//! Flat key = value experiment configuration files.
//!
//! One `key = value` pair per line; `#` starts a comment anywhere; blank
//! lines are ignored. Every experiment kind has a fixed key set, so typos
//! fail loudly instead of silently falling back to defaults.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::qkernel::{Entanglement, FeatureMapKind};

/// Parsed but untyped configuration text.
#[derive(Clone, Debug, Default)]
pub struct RawConfig {
    entries: BTreeMap<String, String>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (lineno, raw_line) in text.lines().enumerate() {
            let line = match raw_line.find('#') {
                Some(cut) => &raw_line[..cut],
                None => raw_line,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Format(format!(
                    "config line {}: expected key = value, got {raw_line:?}",
                    lineno + 1
                )));
            };
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if key.is_empty() {
                return Err(Error::Format(format!(
                    "config line {}: empty key",
                    lineno + 1
                )));
            }
            if entries.insert(key.clone(), value).is_some() {
                return Err(Error::Format(format!(
                    "config line {}: duplicate key {key:?}",
                    lineno + 1
                )));
            }
        }
        Ok(RawConfig { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    fn require(&self, key: &str) -> Result<&str> {
        self.entries
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| Error::Format(format!("config is missing required key {key:?}")))
    }

    fn get_or<'a>(&'a self, key: &str, default: &'a str) -> &'a str {
        self.entries.get(key).map(String::as_str).unwrap_or(default)
    }

    fn reject_unknown_keys(&self, allowed: &[&str]) -> Result<()> {
        for key in self.entries.keys() {
            if !allowed.contains(&key.as_str()) {
                return Err(Error::Format(format!("unknown config key {key:?}")));
            }
        }
        Ok(())
    }
}

fn parse_usize(key: &str, value: &str) -> Result<usize> {
    value
        .parse()
        .map_err(|_| Error::Format(format!("config key {key:?}: bad integer {value:?}")))
}

fn parse_u64(key: &str, value: &str) -> Result<u64> {
    value
        .parse()
        .map_err(|_| Error::Format(format!("config key {key:?}: bad integer {value:?}")))
}

fn parse_f64(key: &str, value: &str) -> Result<f64> {
    value
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::Format(format!("config key {key:?}: bad number {value:?}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(Error::Format(format!(
            "config key {key:?}: expected true or false, got {value:?}"
        ))),
    }
}

fn parse_usize_list(key: &str, value: &str) -> Result<Vec<usize>> {
    if value.is_empty() {
        return Ok(Vec::new());
    }
    value
        .split(',')
        .map(|tok| parse_usize(key, tok.trim()))
        .collect()
}

fn parse_f64_list(key: &str, value: &str) -> Result<Vec<f64>> {
    if value.is_empty() {
        return Ok(Vec::new());
    }
    value
        .split(',')
        .map(|tok| parse_f64(key, tok.trim()))
        .collect()
}

fn existing_path(key: &str, value: &str) -> Result<PathBuf> {
    let path = PathBuf::from(value);
    if !path.exists() {
        return Err(Error::Format(format!(
            "config key {key:?}: file {value:?} does not exist"
        )));
    }
    Ok(path)
}

/// Which noise family a run injects.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NoiseKind {
    None,
    Pauli,
    Depolarizing,
}

impl NoiseKind {
    fn parse(key: &str, value: &str) -> Result<Self> {
        match value {
            "none" => Ok(NoiseKind::None),
            "pauli" => Ok(NoiseKind::Pauli),
            "depolarizing" => Ok(NoiseKind::Depolarizing),
            _ => Err(Error::Format(format!(
                "config key {key:?}: unknown noise kind {value:?}"
            ))),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            NoiseKind::None => "none",
            NoiseKind::Pauli => "pauli",
            NoiseKind::Depolarizing => "depolarizing",
        }
    }
}

fn parse_map_kind(key: &str, value: &str) -> Result<FeatureMapKind> {
    match value {
        "z" => Ok(FeatureMapKind::Z),
        "zz" => Ok(FeatureMapKind::Zz),
        "pauli" => Ok(FeatureMapKind::Pauli),
        _ => Err(Error::Format(format!(
            "config key {key:?}: unknown feature map {value:?}"
        ))),
    }
}

fn parse_entanglement(key: &str, value: &str) -> Result<Entanglement> {
    match value {
        "linear" => Ok(Entanglement::Linear),
        "circular" => Ok(Entanglement::Circular),
        "full" => Ok(Entanglement::Full),
        _ => Err(Error::Format(format!(
            "config key {key:?}: unknown entanglement {value:?}"
        ))),
    }
}

pub fn map_kind_name(kind: FeatureMapKind) -> &'static str {
    match kind {
        FeatureMapKind::Z => "z",
        FeatureMapKind::Zz => "zz",
        FeatureMapKind::Pauli => "pauli",
    }
}

pub fn entanglement_name(ent: Entanglement) -> &'static str {
    match ent {
        Entanglement::Linear => "linear",
        Entanglement::Circular => "circular",
        Entanglement::Full => "full",
    }
}

/// Dataset, split, and output fields shared by every experiment.
#[derive(Clone, Debug)]
pub struct CommonConfig {
    pub images: PathBuf,
    pub labels: PathBuf,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub classes: Vec<usize>,
    pub n_train: usize,
    pub n_test: usize,
}

impl CommonConfig {
    fn from_raw(raw: &RawConfig, default_classes: &str) -> Result<Self> {
        let n_train = parse_usize("n_train", raw.require("n_train")?)?;
        let n_test = parse_usize("n_test", raw.require("n_test")?)?;
        if n_train == 0 || n_test == 0 {
            return Err(Error::Format("n_train and n_test must be positive".into()));
        }
        Ok(CommonConfig {
            images: existing_path("images", raw.require("images")?)?,
            labels: existing_path("labels", raw.require("labels")?)?,
            out_dir: PathBuf::from(raw.require("out_dir")?),
            seed: parse_u64("seed", raw.get_or("seed", "0"))?,
            classes: parse_usize_list("classes", raw.get_or("classes", default_classes))?,
            n_train,
            n_test,
        })
    }

    fn manifest(&self, out: &mut BTreeMap<String, String>) {
        out.insert("images".into(), self.images.display().to_string());
        out.insert("labels".into(), self.labels.display().to_string());
        out.insert("out_dir".into(), self.out_dir.display().to_string());
        out.insert("seed".into(), self.seed.to_string());
        let classes: Vec<String> = self.classes.iter().map(|c| c.to_string()).collect();
        out.insert("classes".into(), classes.join(","));
        out.insert("n_train".into(), self.n_train.to_string());
        out.insert("n_test".into(), self.n_test.to_string());
    }
}

/// Edge-map hyperparameters shared by the QHED experiments.
#[derive(Clone, Debug)]
pub struct EdgeFeatureConfig {
    pub patch_side: usize,
    pub threshold: f64,
    pub shots: u64,
    pub l1: f64,
    pub epochs: usize,
    pub lr: f64,
    pub emit_maps: bool,
}

impl EdgeFeatureConfig {
    fn from_raw(raw: &RawConfig, emit_default: &str) -> Result<Self> {
        Ok(EdgeFeatureConfig {
            patch_side: parse_usize("patch_side", raw.get_or("patch_side", "4"))?,
            threshold: parse_f64("threshold", raw.get_or("threshold", "0.25"))?,
            shots: parse_u64("shots", raw.get_or("shots", "4096"))?,
            l1: parse_f64("l1", raw.get_or("l1", "0.001"))?,
            epochs: parse_usize("epochs", raw.get_or("epochs", "200"))?,
            lr: parse_f64("lr", raw.get_or("lr", "0.5"))?,
            emit_maps: parse_bool("emit_maps", raw.get_or("emit_maps", emit_default))?,
        })
    }

    fn manifest(&self, out: &mut BTreeMap<String, String>) {
        out.insert("patch_side".into(), self.patch_side.to_string());
        out.insert("threshold".into(), self.threshold.to_string());
        out.insert("shots".into(), self.shots.to_string());
        out.insert("l1".into(), self.l1.to_string());
        out.insert("epochs".into(), self.epochs.to_string());
        out.insert("lr".into(), self.lr.to_string());
        out.insert("emit_maps".into(), self.emit_maps.to_string());
    }
}

/// Edge-map classification, optionally with noisy test-side circuits.
#[derive(Clone, Debug)]
pub struct QhedClassifyConfig {
    pub common: CommonConfig,
    pub edges: EdgeFeatureConfig,
    pub noise: NoiseKind,
    pub noise_level: f64,
    pub noise_2q: bool,
}

/// Accuracy sweep over noise levels with a fixed train-side model.
#[derive(Clone, Debug)]
pub struct NoiseSweepConfig {
    pub common: CommonConfig,
    pub edges: EdgeFeatureConfig,
    pub noise: NoiseKind,
    pub levels: Vec<f64>,
    pub noise_2q: bool,
}

/// Quantum-kernel SVM classification on PCA features.
#[derive(Clone, Debug)]
pub struct KernelClassifyConfig {
    pub common: CommonConfig,
    pub k: usize,
    pub map_kind: FeatureMapKind,
    pub entanglement: Entanglement,
    pub reps: usize,
    pub c: f64,
}

/// A validated experiment configuration of one of the three kinds.
#[derive(Clone, Debug)]
pub enum ExperimentConfig {
    QhedClassify(QhedClassifyConfig),
    NoiseSweep(NoiseSweepConfig),
    KernelClassify(KernelClassifyConfig),
}

const COMMON_KEYS: &[&str] = &[
    "experiment",
    "images",
    "labels",
    "out_dir",
    "seed",
    "classes",
    "n_train",
    "n_test",
];

const EDGE_KEYS: &[&str] = &[
    "patch_side",
    "threshold",
    "shots",
    "l1",
    "epochs",
    "lr",
    "emit_maps",
];

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_raw(&RawConfig::load(path)?)
    }

    pub fn from_raw(raw: &RawConfig) -> Result<Self> {
        match raw.require("experiment")? {
            "qhed-classify" => {
                let mut allowed = COMMON_KEYS.to_vec();
                allowed.extend_from_slice(EDGE_KEYS);
                allowed.extend_from_slice(&["noise", "noise_level", "noise_2q"]);
                raw.reject_unknown_keys(&allowed)?;
                let noise = NoiseKind::parse("noise", raw.get_or("noise", "none"))?;
                let noise_level = parse_f64("noise_level", raw.get_or("noise_level", "0"))?;
                if noise == NoiseKind::None && noise_level != 0.0 {
                    return Err(Error::Format("noise_level set but noise = none".into()));
                }
                Ok(ExperimentConfig::QhedClassify(QhedClassifyConfig {
                    common: CommonConfig::from_raw(raw, "")?,
                    edges: EdgeFeatureConfig::from_raw(raw, "true")?,
                    noise,
                    noise_level,
                    noise_2q: parse_bool("noise_2q", raw.get_or("noise_2q", "true"))?,
                }))
            }
            "noise-sweep" => {
                let mut allowed = COMMON_KEYS.to_vec();
                allowed.extend_from_slice(EDGE_KEYS);
                allowed.extend_from_slice(&["noise", "levels", "noise_2q"]);
                raw.reject_unknown_keys(&allowed)?;
                let noise = NoiseKind::parse("noise", raw.require("noise")?)?;
                if noise == NoiseKind::None {
                    return Err(Error::Format(
                        "noise-sweep needs noise = pauli or depolarizing".into(),
                    ));
                }
                let levels = parse_f64_list("levels", raw.require("levels")?)?;
                if levels.is_empty() {
                    return Err(Error::Format("noise-sweep needs at least one level".into()));
                }
                Ok(ExperimentConfig::NoiseSweep(NoiseSweepConfig {
                    common: CommonConfig::from_raw(raw, "")?,
                    edges: EdgeFeatureConfig::from_raw(raw, "false")?,
                    noise,
                    levels,
                    noise_2q: parse_bool("noise_2q", raw.get_or("noise_2q", "true"))?,
                }))
            }
            "kernel-classify" => {
                let mut allowed = COMMON_KEYS.to_vec();
                allowed.extend_from_slice(&["k", "map", "entanglement", "reps", "c"]);
                raw.reject_unknown_keys(&allowed)?;
                let k = parse_usize("k", raw.get_or("k", "5"))?;
                let reps = parse_usize("reps", raw.get_or("reps", "2"))?;
                if k == 0 || reps == 0 {
                    return Err(Error::Format("k and reps must be positive".into()));
                }
                Ok(ExperimentConfig::KernelClassify(KernelClassifyConfig {
                    common: CommonConfig::from_raw(raw, "0,2,3")?,
                    k,
                    map_kind: parse_map_kind("map", raw.get_or("map", "zz"))?,
                    entanglement: parse_entanglement(
                        "entanglement",
                        raw.get_or("entanglement", "linear"),
                    )?,
                    reps,
                    c: parse_f64("c", raw.get_or("c", "1.0"))?,
                }))
            }
            other => Err(Error::Format(format!("unknown experiment kind {other:?}"))),
        }
    }

    pub fn common(&self) -> &CommonConfig {
        match self {
            ExperimentConfig::QhedClassify(c) => &c.common,
            ExperimentConfig::NoiseSweep(c) => &c.common,
            ExperimentConfig::KernelClassify(c) => &c.common,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            ExperimentConfig::QhedClassify(_) => "qhed-classify",
            ExperimentConfig::NoiseSweep(_) => "noise-sweep",
            ExperimentConfig::KernelClassify(_) => "kernel-classify",
        }
    }

    /// Fully resolved key/value view (defaults included) for the manifest.
    pub fn manifest_entries(&self) -> BTreeMap<String, String> {
        let mut out = BTreeMap::new();
        out.insert("experiment".into(), self.kind_name().into());
        self.common().manifest(&mut out);
        match self {
            ExperimentConfig::QhedClassify(c) => {
                c.edges.manifest(&mut out);
                out.insert("noise".into(), c.noise.as_str().into());
                out.insert("noise_level".into(), c.noise_level.to_string());
                out.insert("noise_2q".into(), c.noise_2q.to_string());
            }
            ExperimentConfig::NoiseSweep(c) => {
                c.edges.manifest(&mut out);
                out.insert("noise".into(), c.noise.as_str().into());
                let levels: Vec<String> = c.levels.iter().map(|l| l.to_string()).collect();
                out.insert("levels".into(), levels.join(","));
                out.insert("noise_2q".into(), c.noise_2q.to_string());
            }
            ExperimentConfig::KernelClassify(c) => {
                out.insert("k".into(), c.k.to_string());
                out.insert("map".into(), map_kind_name(c.map_kind).into());
                out.insert(
                    "entanglement".into(),
                    entanglement_name(c.entanglement).into(),
                );
                out.insert("reps".into(), c.reps.to_string());
                out.insert("c".into(), c.c.to_string());
            }
        }
        out
    }
}
