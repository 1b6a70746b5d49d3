//! Pipeline configuration: a UTF-8 key=value file with `#` comments.
//! Command-line flags override file values.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use amr_summ::decoder::{DEFAULT_EXPANSION_CAP, TIE_BREAK_POLICY};
use amr_summ::selector::SelectionMetric;
use amr_summ::trainer::LossKind;

use crate::CliError;

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub corpus_dir: Option<PathBuf>,
    pub refs: Option<PathBuf>,
    pub coref: Option<PathBuf>,
    pub events: Option<PathBuf>,
    pub stoplist: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub out: PathBuf,
    pub predictions: Option<PathBuf>,
    pub references: Option<PathBuf>,
    pub pred_text: Option<PathBuf>,
    pub ref_text: Option<PathBuf>,
    pub m: usize,
    pub n: usize,
    pub budget: usize,
    pub epochs: usize,
    pub step_size: f64,
    pub loss: LossKind,
    pub averaging: bool,
    pub metric: SelectionMetric,
    pub seed: u64,
    pub jobs: usize,
    pub strict: bool,
    pub expansion_cap: u64,
}

impl Default for PipelineConfig {
    fn default() -> PipelineConfig {
        PipelineConfig {
            corpus_dir: None,
            refs: None,
            coref: None,
            events: None,
            stoplist: None,
            model: None,
            out: PathBuf::from("out"),
            predictions: None,
            references: None,
            pred_text: None,
            ref_text: None,
            m: 5,
            n: 5,
            budget: 15,
            epochs: 20,
            step_size: 0.1,
            loss: LossKind::Ramp,
            averaging: true,
            metric: SelectionMetric::Vsm,
            seed: 1,
            jobs: 1,
            strict: false,
            expansion_cap: DEFAULT_EXPANSION_CAP,
        }
    }
}

fn parse_bool(key: &str, v: &str) -> Result<bool, CliError> {
    match v {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => Err(CliError::Config(format!("{key}: expected a boolean, got `{v}`"))),
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, CliError> {
    v.parse()
        .map_err(|_| CliError::Config(format!("{key}: cannot parse `{v}`")))
}

pub fn parse_loss(v: &str) -> Result<LossKind, CliError> {
    match v {
        "perc" | "perceptron" => Ok(LossKind::Perceptron),
        "ramp" => Ok(LossKind::Ramp),
        _ => Err(CliError::Config(format!(
            "loss: expected perc or ramp, got `{v}`"
        ))),
    }
}

pub fn parse_metric(v: &str) -> Result<SelectionMetric, CliError> {
    SelectionMetric::parse(v)
        .ok_or_else(|| CliError::Config(format!("metric: expected lcs|vsm|smatch|cov, got `{v}`")))
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<PipelineConfig, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        let dir = path.parent().unwrap_or(Path::new("."));
        let mut cfg = PipelineConfig::default();
        let mut seen: HashMap<String, ()> = HashMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::Config(format!(
                    "{}:{}: expected key=value",
                    path.display(),
                    lineno + 1
                )));
            };
            let (key, value) = (key.trim(), value.trim());
            if seen.insert(key.to_string(), ()).is_some() {
                return Err(CliError::Config(format!("duplicate config key `{key}`")));
            }
            // Relative paths are resolved against the config file location.
            let as_path = |v: &str| -> PathBuf {
                let p = PathBuf::from(v);
                if p.is_absolute() {
                    p
                } else {
                    dir.join(p)
                }
            };
            match key {
                "corpus_dir" => cfg.corpus_dir = Some(as_path(value)),
                "refs" => cfg.refs = Some(as_path(value)),
                "coref" => cfg.coref = Some(as_path(value)),
                "events" => cfg.events = Some(as_path(value)),
                "stoplist" => cfg.stoplist = Some(as_path(value)),
                "model" => cfg.model = Some(as_path(value)),
                "out" => cfg.out = as_path(value),
                "predictions" => cfg.predictions = Some(as_path(value)),
                "references" => cfg.references = Some(as_path(value)),
                "pred_text" => cfg.pred_text = Some(as_path(value)),
                "ref_text" => cfg.ref_text = Some(as_path(value)),
                "M" | "m" => cfg.m = parse_num(key, value)?,
                "N" | "n" => cfg.n = parse_num(key, value)?,
                "L" | "l" => cfg.budget = parse_num(key, value)?,
                "epochs" => cfg.epochs = parse_num(key, value)?,
                "step" | "step_size" => cfg.step_size = parse_num(key, value)?,
                "loss" => cfg.loss = parse_loss(value)?,
                "averaging" => cfg.averaging = parse_bool(key, value)?,
                "metric" => cfg.metric = parse_metric(value)?,
                "seed" => cfg.seed = parse_num(key, value)?,
                "jobs" => cfg.jobs = parse_num(key, value)?,
                "strict" => cfg.strict = parse_bool(key, value)?,
                "expansion_cap" => cfg.expansion_cap = parse_num(key, value)?,
                "tie_break" => {
                    if value != TIE_BREAK_POLICY {
                        return Err(CliError::Config(format!(
                            "tie_break: only `{TIE_BREAK_POLICY}` is supported"
                        )));
                    }
                }
                _ => {
                    return Err(CliError::Config(format!("unknown config key `{key}`")));
                }
            }
        }
        Ok(cfg)
    }

    /// Paths must exist when set; the output directory is created.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.m == 0 || self.n == 0 || self.budget == 0 {
            return Err(CliError::Config("M, N, and L must be >= 1".into()));
        }
        let present = |name: &str, p: &Option<PathBuf>| -> Result<(), CliError> {
            if let Some(p) = p {
                if !p.exists() {
                    return Err(CliError::Config(format!(
                        "{name}: {} does not exist",
                        p.display()
                    )));
                }
            }
            Ok(())
        };
        present("corpus_dir", &self.corpus_dir)?;
        present("refs", &self.refs)?;
        present("coref", &self.coref)?;
        present("events", &self.events)?;
        present("stoplist", &self.stoplist)?;
        present("predictions", &self.predictions)?;
        present("references", &self.references)?;
        present("pred_text", &self.pred_text)?;
        present("ref_text", &self.ref_text)?;
        Ok(())
    }
}
