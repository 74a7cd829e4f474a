//! Run configuration: flat `key = value` lines grouped under `[section]` headers.
//!
//! Unknown sections or keys, duplicates and out-of-range values are rejected
//! with the offending line number. Keys that are absent take defaults, some of
//! which depend on the phantom profile (intensities and `t_test`).
//! [`RunConfig::to_canonical`] writes every key and parses back to an equal
//! configuration.

use anomap_core::diffusion::{NoiseKind, NoiseParams, PatchSpec};
use anomap_core::phantom::{ModalityProfile, ProfileKind};
use anomap_core::pipeline::{ExperimentConfig, Variant};
use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::str::FromStr;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

fn at(line: usize, message: impl Into<String>) -> ConfigError {
    ConfigError { line: Some(line), message: message.into() }
}

/// Where the evaluation data comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    /// One generated phantom dataset per fold.
    Phantom,
    /// A dataset directory shared by all folds.
    Directory(PathBuf),
}

/// The reconstruction model under evaluation.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelKind {
    /// Kernel-mixture denoiser trained per fold.
    Mixture,
    /// Untrained Gaussian blur.
    Blur { sigma: f64 },
    /// Reconstructions read from a directory with a `manifest.tsv`.
    External { dir: PathBuf },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub experiment: ExperimentConfig,
    pub data: DataSource,
    pub model: ModelKind,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            experiment: ExperimentConfig::for_profile(ModalityProfile::flair_like()),
            data: DataSource::Phantom,
            model: ModelKind::Mixture,
            out: None,
        }
    }
}

const KEYS: &[(&str, &[&str])] = &[
    ("run", &["variant", "seed", "folds", "alpha", "out"]),
    ("data", &["source", "path"]),
    ("model", &["kind", "blur_sigma", "recon_dir", "sigmas", "buckets"]),
    (
        "phantom",
        &[
            "profile",
            "size",
            "n_train",
            "n_val",
            "n_test",
            "mu_normal",
            "mu_lesion",
            "texture_amp",
            "lesion_radius",
            "lesion_count",
        ],
    ),
    (
        "diffusion",
        &["steps", "beta_start", "beta_end", "t_test", "noise", "octaves", "persistence", "base_scale", "patch"],
    ),
    ("train", &["epochs", "learning_rate", "batch_size"]),
    ("eval", &["median_k", "erosion_iters", "grid_points", "ssim_window", "ssim_stride", "c1", "c2"]),
];

struct Entry {
    line: usize,
    value: String,
}

struct Entries(BTreeMap<(String, String), Entry>);

impl Entries {
    fn take(&mut self, section: &str, key: &str) -> Option<Entry> {
        self.0.remove(&(section.to_owned(), key.to_owned()))
    }

    fn parse<T: FromStr>(&mut self, section: &str, key: &str, what: &str) -> Result<Option<(T, usize)>, ConfigError> {
        let Some(e) = self.take(section, key) else { return Ok(None) };
        let v = e.value.parse().map_err(|_| at(e.line, format!("{key}: expected {what}, found '{}'", e.value)))?;
        Ok(Some((v, e.line)))
    }

    fn set<T: FromStr>(&mut self, section: &str, key: &str, what: &str, slot: &mut T) -> Result<Option<usize>, ConfigError> {
        Ok(self.parse(section, key, what)?.map(|(v, line)| {
            *slot = v;
            line
        }))
    }

    /// A real in `range`.
    fn real(
        &mut self,
        section: &str,
        key: &str,
        slot: &mut f64,
        ok: impl Fn(f64) -> bool,
        rule: &str,
    ) -> Result<(), ConfigError> {
        if let Some((v, line)) = self.parse::<f64>(section, key, "a number")? {
            if !v.is_finite() || !ok(v) {
                return Err(at(line, format!("{key} must be {rule}, found {v}")));
            }
            *slot = v;
        }
        Ok(())
    }

    /// An integer no smaller than `min`.
    fn count(&mut self, section: &str, key: &str, slot: &mut usize, min: usize) -> Result<(), ConfigError> {
        if let Some((v, line)) = self.parse::<i64>(section, key, "an integer")? {
            if v < min as i64 {
                return Err(at(line, format!("{key} must be at least {min}, found {v}")));
            }
            *slot = v as usize;
        }
        Ok(())
    }
}

fn split_numbers(e: &Entry, key: &str) -> Result<Vec<f64>, ConfigError> {
    e.value
        .split([',', ' '])
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().ok().filter(|v| v.is_finite()))
        .collect::<Option<Vec<_>>>()
        .filter(|v| !v.is_empty())
        .ok_or_else(|| at(e.line, format!("{key}: expected a list of numbers, found '{}'", e.value)))
}

/// One value or a `min max` pair.
fn range(e: &Entry, key: &str) -> Result<(f64, f64), ConfigError> {
    match split_numbers(e, key)?[..] {
        [v] => Ok((v, v)),
        [a, b] => Ok((a, b)),
        _ => Err(at(e.line, format!("{key}: expected one value or 'min max'"))),
    }
}

fn resolve(path: &str, base: Option<&Path>) -> PathBuf {
    let p = PathBuf::from(path);
    match base {
        Some(b) if p.is_relative() => b.join(p),
        _ => p,
    }
}

fn read_entries(text: &str) -> Result<Entries, ConfigError> {
    let mut entries = BTreeMap::new();
    let mut section: Option<&str> = None;
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_prefix('[') {
            let name = name.strip_suffix(']').ok_or_else(|| at(line, "unterminated section header"))?.trim();
            let known = KEYS.iter().find(|(s, _)| *s == name).ok_or_else(|| at(line, format!("unknown section [{name}]")))?;
            section = Some(known.0);
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| at(line, "expected 'key = value'"))?;
        let (key, value) = (key.trim(), value.trim());
        let sec = section.ok_or_else(|| at(line, format!("key '{key}' appears before any section header")))?;
        let allowed = KEYS.iter().find(|(s, _)| *s == sec).map(|(_, k)| *k).unwrap_or(&[]);
        if !allowed.contains(&key) {
            return Err(at(line, format!("unknown key '{key}' in [{sec}]")));
        }
        if value.is_empty() {
            return Err(at(line, format!("{key}: missing value")));
        }
        let slot = (sec.to_owned(), key.to_owned());
        if let Some(prev) = entries.get(&slot) {
            let Entry { line: first, .. } = prev;
            return Err(at(line, format!("duplicate key '{key}' (first set on line {first})")));
        }
        entries.insert(slot, Entry { line, value: value.to_owned() });
    }
    Ok(Entries(entries))
}

impl RunConfig {
    /// Parses configuration text; relative paths are resolved against `base`.
    pub fn parse(text: &str, base: Option<&Path>) -> Result<Self, ConfigError> {
        let mut e = read_entries(text)?;

        let kind = match e.parse::<ProfileKind>("phantom", "profile", "t2_like, flair_like or t1ce_like")? {
            Some((k, _)) => k,
            None => ProfileKind::FlairLike,
        };
        let mut x = ExperimentConfig::for_profile(ModalityProfile::for_kind(kind));

        if let Some((v, _)) = e.parse::<Variant>("run", "variant", "l1, ssim, fq or fq_air")? {
            x.variant = v;
        }
        e.set("run", "seed", "an unsigned integer", &mut x.seed)?;
        e.count("run", "folds", &mut x.folds, 1)?;
        e.real("run", "alpha", &mut x.alpha, |v| (0.0..=1.0).contains(&v), "in [0, 1]")?;
        let out = e.take("run", "out").map(|o| resolve(&o.value, base));

        let source = e.take("data", "source");
        let path = e.take("data", "path");
        let data = match source.as_ref().map(|s| s.value.as_str()) {
            None | Some("phantom") => {
                if let Some(p) = path {
                    return Err(at(p.line, "path requires source = directory"));
                }
                DataSource::Phantom
            }
            Some("directory") => {
                let line = source.as_ref().map_or(0, |s| s.line);
                let p = path.ok_or_else(|| at(line, "source = directory requires a path"))?;
                DataSource::Directory(resolve(&p.value, base))
            }
            Some(other) => {
                let line = source.as_ref().map_or(0, |s| s.line);
                return Err(at(line, format!("source: expected phantom or directory, found '{other}'")));
            }
        };

        let kind_entry = e.take("model", "kind");
        let mut sigma = 1.0;
        e.real("model", "blur_sigma", &mut sigma, |v| v > 0.0, "positive")?;
        let recon_dir = e.take("model", "recon_dir");
        let model = match kind_entry.as_ref().map(|k| k.value.as_str()) {
            None | Some("mixture") => ModelKind::Mixture,
            Some("blur") => ModelKind::Blur { sigma },
            Some("external") => {
                let line = kind_entry.as_ref().map_or(0, |k| k.line);
                let d = recon_dir.as_ref().ok_or_else(|| at(line, "kind = external requires recon_dir"))?;
                ModelKind::External { dir: resolve(&d.value, base) }
            }
            Some(other) => {
                let line = kind_entry.as_ref().map_or(0, |k| k.line);
                return Err(at(line, format!("kind: expected mixture, blur or external, found '{other}'")));
            }
        };
        if let Some(entry) = e.take("model", "sigmas") {
            let sigmas = split_numbers(&entry, "sigmas")?;
            if sigmas.iter().any(|&s| s < 0.0) {
                return Err(at(entry.line, "sigmas must be nonnegative"));
            }
            x.sigmas = sigmas;
        }
        e.count("model", "buckets", &mut x.buckets, 1)?;

        let p = &mut x.profile;
        e.count("phantom", "size", &mut x.size, 32)?;
        e.count("phantom", "n_train", &mut x.n_train, 1)?;
        e.count("phantom", "n_val", &mut x.n_val, 1)?;
        e.count("phantom", "n_test", &mut x.n_test, 1)?;
        let unit = |v: f64| v > 0.0 && v < 1.0;
        e.real("phantom", "mu_normal", &mut p.mu_normal, unit, "in (0, 1)")?;
        e.real("phantom", "mu_lesion", &mut p.mu_lesion, unit, "in (0, 1)")?;
        e.real("phantom", "texture_amp", &mut p.texture_amp, |v| (0.0..0.5).contains(&v), "in [0, 0.5)")?;
        if let Some(entry) = e.take("phantom", "lesion_radius") {
            let (lo, hi) = range(&entry, "lesion_radius")?;
            if !(lo > 0.0 && lo <= hi) {
                return Err(at(entry.line, format!("lesion_radius must be positive with min <= max, found '{}'", entry.value)));
            }
            p.lesion_radius = (lo, hi);
        }
        if let Some(entry) = e.take("phantom", "lesion_count") {
            let (lo, hi) = range(&entry, "lesion_count")?;
            let integral = lo.fract() == 0.0 && hi.fract() == 0.0;
            if !(integral && lo >= 1.0 && lo <= hi) {
                return Err(at(entry.line, format!("lesion_count must be integers >= 1 with min <= max, found '{}'", entry.value)));
            }
            p.lesion_count = (lo as usize, hi as usize);
        }

        e.count("diffusion", "steps", &mut x.steps, 1)?;
        let positive = |v: f64| v > 0.0 && v < 1.0;
        e.real("diffusion", "beta_start", &mut x.beta_start, positive, "in (0, 1)")?;
        e.real("diffusion", "beta_end", &mut x.beta_end, positive, "in (0, 1)")?;
        if let Some((t, line)) = e.parse::<usize>("diffusion", "t_test", "a step number")? {
            if t == 0 || t > x.steps {
                return Err(at(line, format!("t_test must lie in [1, {}], found {t}", x.steps)));
            }
            x.eval.t_test = t;
        }
        let noise = &mut x.eval.noise;
        if let Some(entry) = e.take("diffusion", "noise") {
            noise.kind = match entry.value.as_str() {
                "simplex" => NoiseKind::Simplex,
                "gaussian" => NoiseKind::Gaussian,
                other => return Err(at(entry.line, format!("noise: expected simplex or gaussian, found '{other}'"))),
            };
        }
        e.count("diffusion", "octaves", &mut noise.octaves, 1)?;
        e.real("diffusion", "persistence", &mut noise.persistence, |v| v > 0.0 && v <= 1.0, "in (0, 1]")?;
        if let Some(entry) = e.take("diffusion", "base_scale") {
            noise.base_scale = match entry.value.as_str() {
                "auto" => None,
                v => Some(v.parse::<f64>().ok().filter(|s| s.is_finite() && *s > 0.0).ok_or_else(|| {
                    at(entry.line, format!("base_scale must be 'auto' or a positive number, found '{v}'"))
                })?),
            };
        }
        if let Some(entry) = e.take("diffusion", "patch") {
            x.eval.patch = match entry.value.as_str() {
                "auto" => None,
                _ => {
                    let v = split_numbers(&entry, "patch")?;
                    let ok = v.len() == 4 && v.iter().all(|n| *n >= 1.0 && n.fract() == 0.0);
                    if !ok {
                        return Err(at(entry.line, "patch must be 'auto' or 'patch_h patch_w stride_h stride_w'"));
                    }
                    Some(PatchSpec {
                        patch_h: v[0] as usize,
                        patch_w: v[1] as usize,
                        stride_h: v[2] as usize,
                        stride_w: v[3] as usize,
                    })
                }
            };
        }
        x.train.noise = x.eval.noise;

        e.count("train", "epochs", &mut x.train.epochs, 0)?;
        e.real("train", "learning_rate", &mut x.train.learning_rate, |v| v > 0.0, "positive")?;
        e.count("train", "batch_size", &mut x.train.batch_size, 1)?;

        e.count("eval", "median_k", &mut x.eval.median_k, 1)?;
        e.count("eval", "erosion_iters", &mut x.eval.erosion_iters, 0)?;
        e.count("eval", "grid_points", &mut x.eval.grid_points, 1)?;
        e.count("eval", "ssim_window", &mut x.eval.ssim.window, 1)?;
        e.count("eval", "ssim_stride", &mut x.eval.ssim.stride, 1)?;
        e.real("eval", "c1", &mut x.eval.ssim.c1, |v| v > 0.0, "positive")?;
        e.real("eval", "c2", &mut x.eval.ssim.c2, |v| v > 0.0, "positive")?;
        x.eval.ssim.c3 = x.eval.ssim.c2 / 2.0;

        debug_assert!(e.0.is_empty(), "every known key is consumed");
        x.validate().map_err(|err| ConfigError { line: None, message: err.to_string() })?;
        if matches!(model, ModelKind::External { .. }) && x.variant.uses_air() {
            let message = "fq_air flips the inputs, which stored reconstructions cannot follow".into();
            return Err(ConfigError { line: None, message });
        }
        Ok(Self { experiment: x, data, model, out })
    }

    pub fn from_file(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?;
        let base = path.parent().map(|p| if p.as_os_str().is_empty() { Path::new(".") } else { p });
        Self::parse(&text, base).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))
    }

    /// Every setting, one key per line, in a fixed order.
    pub fn to_canonical(&self) -> String {
        let x = &self.experiment;
        let p = &x.profile;
        let mut s = String::new();
        let list = |v: &[f64]| v.iter().map(|f| f.to_string()).collect::<Vec<_>>().join(" ");
        let _ = writeln!(s, "[run]\nvariant = {}\nseed = {}\nfolds = {}\nalpha = {}", x.variant, x.seed, x.folds, x.alpha);
        if let Some(out) = &self.out {
            let _ = writeln!(s, "out = {}", out.display());
        }
        match &self.data {
            DataSource::Phantom => s.push_str("\n[data]\nsource = phantom\n"),
            DataSource::Directory(d) => {
                let _ = writeln!(s, "\n[data]\nsource = directory\npath = {}", d.display());
            }
        }
        s.push_str("\n[model]\n");
        match &self.model {
            ModelKind::Mixture => s.push_str("kind = mixture\n"),
            ModelKind::Blur { sigma } => {
                let _ = writeln!(s, "kind = blur\nblur_sigma = {sigma}");
            }
            ModelKind::External { dir } => {
                let _ = writeln!(s, "kind = external\nrecon_dir = {}", dir.display());
            }
        }
        let _ = writeln!(s, "sigmas = {}\nbuckets = {}", list(&x.sigmas), x.buckets);
        let _ = writeln!(
            s,
            "\n[phantom]\nprofile = {}\nsize = {}\nn_train = {}\nn_val = {}\nn_test = {}\nmu_normal = {}\nmu_lesion = {}\ntexture_amp = {}\nlesion_radius = {} {}\nlesion_count = {} {}",
            p.kind, x.size, x.n_train, x.n_val, x.n_test, p.mu_normal, p.mu_lesion, p.texture_amp,
            p.lesion_radius.0, p.lesion_radius.1, p.lesion_count.0, p.lesion_count.1
        );
        let n: &NoiseParams = &x.eval.noise;
        let kind = match n.kind {
            NoiseKind::Simplex => "simplex",
            NoiseKind::Gaussian => "gaussian",
        };
        let base_scale = n.base_scale.map_or_else(|| "auto".to_owned(), |b| b.to_string());
        let patch = x.eval.patch.map_or_else(
            || "auto".to_owned(),
            |q| format!("{} {} {} {}", q.patch_h, q.patch_w, q.stride_h, q.stride_w),
        );
        let _ = writeln!(
            s,
            "\n[diffusion]\nsteps = {}\nbeta_start = {}\nbeta_end = {}\nt_test = {}\nnoise = {kind}\noctaves = {}\npersistence = {}\nbase_scale = {base_scale}\npatch = {patch}",
            x.steps, x.beta_start, x.beta_end, x.eval.t_test, n.octaves, n.persistence
        );
        let _ = writeln!(
            s,
            "\n[train]\nepochs = {}\nlearning_rate = {}\nbatch_size = {}",
            x.train.epochs, x.train.learning_rate, x.train.batch_size
        );
        let ev = &x.eval;
        let _ = writeln!(
            s,
            "\n[eval]\nmedian_k = {}\nerosion_iters = {}\ngrid_points = {}\nssim_window = {}\nssim_stride = {}\nc1 = {}\nc2 = {}",
            ev.median_k, ev.erosion_iters, ev.grid_points, ev.ssim.window, ev.ssim.stride, ev.ssim.c1, ev.ssim.c2
        );
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_defaults() {
        let cfg = RunConfig::parse("", None).unwrap();
        assert_eq!(cfg, RunConfig::default());
        assert_eq!(cfg.experiment.eval.t_test, 750);
    }

    #[test]
    fn profile_sets_dependent_defaults() {
        let cfg = RunConfig::parse("[phantom]\nprofile = t2_like\n", None).unwrap();
        assert_eq!(cfg.experiment.eval.t_test, 500);
        assert_eq!(cfg.experiment.profile.mu_normal, 0.30);
        let cfg = RunConfig::parse("[diffusion]\nt_test = 600\n[phantom]\nprofile = t2_like\n", None).unwrap();
        assert_eq!(cfg.experiment.eval.t_test, 600);
    }

    #[test]
    fn negative_radius_rejected_with_line() {
        let err = RunConfig::parse("[run]\nseed = 3\n\n[phantom]\nlesion_radius = -3\n", None).unwrap_err();
        assert_eq!(err.line, Some(5));
        assert!(err.to_string().starts_with("line 5: lesion_radius"), "{err}");
    }

    #[test]
    fn unknown_and_duplicate_keys_rejected() {
        let err = RunConfig::parse("[train]\nepochs = 3\nlr = 0.1\n", None).unwrap_err();
        assert_eq!(err.to_string(), "line 3: unknown key 'lr' in [train]");
        let err = RunConfig::parse("[train]\nepochs = 3\nepochs = 4\n", None).unwrap_err();
        assert_eq!(err.line, Some(3));
        let err = RunConfig::parse("epochs = 3\n", None).unwrap_err();
        assert_eq!(err.line, Some(1));
        let err = RunConfig::parse("[nope]\n", None).unwrap_err();
        assert_eq!(err.to_string(), "line 1: unknown section [nope]");
        let err = RunConfig::parse("[eval]\nmedian_k = 4\n", None).unwrap_err();
        assert_eq!(err.line, None);
    }

    #[test]
    fn canonical_round_trip() {
        let text = "[run]\nvariant = fq\nseed = 9\nalpha = 0.7\n[data]\nsource = directory\npath = data\n\
                    [model]\nkind = blur\nblur_sigma = 1.5\n[diffusion]\nnoise = gaussian\npatch = 16 16 8 8\n\
                    base_scale = 12.5\n[phantom]\nlesion_radius = 2.5 4\nlesion_count = 2\n";
        let cfg = RunConfig::parse(text, Some(Path::new("/base"))).unwrap();
        assert_eq!(cfg.data, DataSource::Directory(PathBuf::from("/base/data")));
        assert_eq!(cfg.experiment.profile.lesion_count, (2, 2));
        let echo = cfg.to_canonical();
        assert_eq!(RunConfig::parse(&echo, None).unwrap(), cfg);
        assert_eq!(RunConfig::parse(&echo, None).unwrap().to_canonical(), echo);
    }
}
