//! Resolution of flags, config file and defaults into one experiment.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use covertsim_core::model::db_to_linear;
use covertsim_core::{Hypothesis, McConfig, OutageCaps, ParamField, Receiver, SystemParams};

use crate::args::Layer;
use crate::CliError;

pub const WORKERS_ENV: &str = "COVERTSIM_WORKERS";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Lin,
    Log,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub field: ParamField,
    pub spacing: Spacing,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Sweep {
    /// Endpoints are included exactly; a single point sits at `min`.
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        let last = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                if i == 0 {
                    self.min
                } else if i == self.count - 1 {
                    self.max
                } else {
                    let t = i as f64 / last;
                    match self.spacing {
                        Spacing::Lin => self.min + t * (self.max - self.min),
                        Spacing::Log => (self.min.ln() + t * (self.max.ln() - self.min.ln())).exp(),
                    }
                }
            })
            .collect()
    }
}

impl FromStr for Sweep {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        let bad = |why: &str| CliError::Usage(format!("--sweep `{s}`: {why}"));
        let parts: Vec<&str> = s.split(':').collect();
        let [name, spacing, min, max, count] = parts[..] else {
            return Err(bad("expected NAME:lin|log:MIN:MAX:COUNT"));
        };
        let field = name.parse::<ParamField>().map_err(|_| bad("unknown parameter"))?;
        let spacing = match spacing {
            "lin" => Spacing::Lin,
            "log" => Spacing::Log,
            _ => return Err(bad("spacing must be lin or log")),
        };
        let min: f64 = min.parse().map_err(|_| bad("MIN is not a number"))?;
        let max: f64 = max.parse().map_err(|_| bad("MAX is not a number"))?;
        let count: usize = count.parse().map_err(|_| bad("COUNT is not a positive integer"))?;
        if count == 0 {
            return Err(bad("COUNT must be at least 1"));
        }
        if !(min.is_finite() && max.is_finite()) {
            return Err(bad("bounds must be finite"));
        }
        if spacing == Spacing::Log && !(min > 0.0 && max > 0.0) {
            return Err(bad("log spacing needs positive bounds"));
        }
        Ok(Sweep {
            field,
            spacing,
            min,
            max,
            count,
        })
    }
}

/// Everything a command needs, after defaults, config file and flags are merged.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub params: SystemParams,
    pub caps: OutageCaps,
    pub sweep: Option<Sweep>,
    pub output: Option<PathBuf>,
    pub mc: McConfig,
    pub points: usize,
    pub g_hat_max: f64,
    pub receiver: Receiver,
    pub hypothesis: Hypothesis,
    pub rate_max: Option<f64>,
    pub grid_size: usize,
    pub baseline: bool,
}

/// Expands `beta` into the per-receiver values it stands for, so that a broad value in
/// one layer never overrides a specific value in a stronger layer.
fn expand_beta(mut layer: Layer) -> Layer {
    if let Some(b) = layer.beta.take() {
        layer.beta_c = layer.beta_c.or(Some(b));
        layer.beta_b = layer.beta_b.or(Some(b));
        layer.beta_w = layer.beta_w.or(Some(b));
    }
    layer
}

macro_rules! overlay {
    ($strong:expr, $weak:expr, $($f:ident),* $(,)?) => {
        Layer { $($f: $strong.$f.or($weak.$f),)* }
    };
}

fn merge(strong: Layer, weak: Layer) -> Layer {
    let (strong, weak) = (expand_beta(strong), expand_beta(weak));
    overlay!(
        strong, weak, p_ac, p_ab, p_total_db, d_ac, d_ab, d_aw, alpha, sigma2_c, sigma2_b, sigma2_w, beta, beta_c,
        beta_b, beta_w, eps, delta_c, delta_b, sweep, trials, n_uses, seed, workers, out, points, g_hat_max, receiver,
        hypothesis, rate_max, grid_size,
    )
}

/// Parses a flat `key = value` file. Blank lines and lines starting with `#` are skipped;
/// keys use the option names with `-` or `_`.
pub fn parse_config(text: &str, origin: &Path) -> Result<Layer, CliError> {
    let mut layer = Layer::default();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let at = || format!("{}:{}", origin.display(), n + 1);
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Usage(format!("{}: expected `key = value`", at())));
        };
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        set_key(&mut layer, &key, value).map_err(|e| CliError::Usage(format!("{}: {e}", at())))?;
    }
    Ok(layer)
}

fn set_key(layer: &mut Layer, key: &str, value: &str) -> Result<(), String> {
    fn num<T: FromStr>(key: &str, value: &str) -> Result<Option<T>, String> {
        value
            .parse()
            .map(Some)
            .map_err(|_| format!("`{key}` has unparseable value `{value}`"))
    }
    match key {
        "p-ac" => layer.p_ac = num(key, value)?,
        "p-ab" => layer.p_ab = num(key, value)?,
        "p-total-db" => layer.p_total_db = num(key, value)?,
        "d-ac" => layer.d_ac = num(key, value)?,
        "d-ab" => layer.d_ab = num(key, value)?,
        "d-aw" => layer.d_aw = num(key, value)?,
        "alpha" => layer.alpha = num(key, value)?,
        "sigma2-c" => layer.sigma2_c = num(key, value)?,
        "sigma2-b" => layer.sigma2_b = num(key, value)?,
        "sigma2-w" => layer.sigma2_w = num(key, value)?,
        "beta" => layer.beta = num(key, value)?,
        "beta-c" => layer.beta_c = num(key, value)?,
        "beta-b" => layer.beta_b = num(key, value)?,
        "beta-w" => layer.beta_w = num(key, value)?,
        "eps" => layer.eps = num(key, value)?,
        "delta-c" => layer.delta_c = num(key, value)?,
        "delta-b" => layer.delta_b = num(key, value)?,
        "sweep" => layer.sweep = Some(value.to_string()),
        "trials" => layer.trials = num(key, value)?,
        "n-uses" => layer.n_uses = num(key, value)?,
        "seed" => layer.seed = num(key, value)?,
        "workers" => layer.workers = num(key, value)?,
        "out" => layer.out = Some(PathBuf::from(value)),
        "points" => layer.points = num(key, value)?,
        "g-hat-max" => layer.g_hat_max = num(key, value)?,
        "receiver" => layer.receiver = Some(value.to_string()),
        "hypothesis" => layer.hypothesis = Some(value.to_string()),
        "rate-max" => layer.rate_max = num(key, value)?,
        "grid-size" => layer.grid_size = num(key, value)?,
        _ => return Err(format!("unknown key `{key}`")),
    }
    Ok(())
}

fn env_workers(value: Option<String>) -> Result<Option<usize>, CliError> {
    match value {
        None => Ok(None),
        Some(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| CliError::Usage(format!("{WORKERS_ENV}=`{v}` is not a worker count"))),
    }
}

/// Merges `flags` over `file` over the built-in defaults. `workers_env` is the value of
/// [`WORKERS_ENV`], consulted only when neither layer sets a worker count.
pub fn resolve(
    flags: Layer,
    file: Option<Layer>,
    workers_env: Option<String>,
    baseline: bool,
) -> Result<ExperimentConfig, CliError> {
    let l = merge(flags, file.unwrap_or_default());
    let mut params = SystemParams::reference();
    macro_rules! take {
        ($($src:ident => $dst:ident),* $(,)?) => {
            $(if let Some(v) = l.$src { params.$dst = v; })*
        };
    }
    take!(
        p_ac => p_ac, p_ab => p_ab, d_ac => d_ac, d_ab => d_ab, d_aw => d_aw, alpha => alpha,
        sigma2_c => sigma2_c, sigma2_b => sigma2_b, sigma2_w => sigma2_w, beta_c => beta_c,
        beta_b => beta_b, beta_w => beta_w, eps => epsilon,
    );
    if let Some(db) = l.p_total_db {
        if !db.is_finite() {
            return Err(CliError::Usage(format!("--p-total-db {db} is not finite")));
        }
        params.p_total = db_to_linear(db);
    }

    let mut caps = OutageCaps::default();
    if let Some(d) = l.delta_c {
        caps.delta_c = d;
    }
    if let Some(d) = l.delta_b {
        caps.delta_b = d;
    }
    for (name, d) in [("delta_c", caps.delta_c), ("delta_b", caps.delta_b)] {
        if !(d > 0.0 && d < 1.0) {
            return Err(CliError::Usage(format!("{name} out of open interval (0,1) (got {d})")));
        }
    }

    let workers = match l.workers {
        Some(w) => w,
        None => env_workers(workers_env)?.unwrap_or(1),
    };
    let mc = McConfig::new(l.trials.unwrap_or(1_000_000), l.seed.unwrap_or(0))
        .with_workers(workers)
        .with_n_uses(l.n_uses);

    let receiver = match &l.receiver {
        Some(r) => r.parse().map_err(CliError::Core)?,
        None => Receiver::Carol,
    };
    let hypothesis = match &l.hypothesis {
        Some(h) => h.parse().map_err(CliError::Core)?,
        None => Hypothesis::H1,
    };

    Ok(ExperimentConfig {
        params,
        caps,
        sweep: l.sweep.as_deref().map(str::parse).transpose()?,
        output: l.out.filter(|p| p.as_os_str() != "-"),
        mc,
        points: l.points.unwrap_or(101),
        g_hat_max: l.g_hat_max.unwrap_or(3.0),
        receiver,
        hypothesis,
        rate_max: l.rate_max,
        grid_size: l.grid_size.unwrap_or(covertsim_core::region::DEFAULT_GRID_SIZE),
        baseline,
    })
}
