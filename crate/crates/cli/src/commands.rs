//! One CSV producer per subcommand.

use covertsim_core::montecarlo::{empirical_error_sum, empirical_outage, Estimate, KnownGain, ThresholdRule};
use covertsim_core::region::{
    certify, certify_rates, detection_error_at, no_covert_baseline, region_boundary, RegionPoint,
};
use covertsim_core::{
    average_detection_error, error_sum, max_rate, optimal_threshold, outage_bob_h1, outage_carol_h0, outage_carol_h1,
    p_fa, p_md, Hypothesis, McConfig, ParamField, Receiver,
};

use covertsim_core::outage::outage as outage_at;

use crate::config::ExperimentConfig;
use crate::CliError;

/// Rate axis length when neither `--rate-max` nor an interference ceiling bounds it.
const DEFAULT_RATE_MAX: f64 = 10.0;

/// Round-trip exact: 17 significant digits. Negative zero prints as zero.
fn num(x: f64) -> String {
    format!("{:.16e}", x + 0.0)
}

struct Csv(String);

impl Csv {
    fn new(header: &[&str]) -> Self {
        let mut csv = Csv(String::new());
        csv.row(header.iter().copied());
        csv
    }

    fn row<'a>(&mut self, cells: impl IntoIterator<Item = &'a str>) {
        for (i, c) in cells.into_iter().enumerate() {
            if i > 0 {
                self.0.push(',');
            }
            self.0.push_str(c);
        }
        self.0.push('\n');
    }

    fn nums(&mut self, xs: &[f64]) {
        let cells: Vec<String> = xs.iter().map(|&x| num(x)).collect();
        self.row(cells.iter().map(String::as_str));
    }
}

fn linspace(max: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..count)
            .map(|i| {
                if i == count - 1 {
                    max
                } else {
                    max * i as f64 / (count - 1) as f64
                }
            })
            .collect(),
    }
}

fn check_points(cfg: &ExperimentConfig) -> Result<(), CliError> {
    if cfg.points == 0 {
        return Err(CliError::Usage("--points must be at least 1".into()));
    }
    Ok(())
}

pub fn threshold(cfg: &ExperimentConfig) -> Result<String, CliError> {
    check_points(cfg)?;
    if !(cfg.g_hat_max >= 0.0 && cfg.g_hat_max.is_finite()) {
        return Err(CliError::Usage(format!(
            "--g-hat-max must be non-negative (got {})",
            cfg.g_hat_max
        )));
    }
    let view = cfg.params.willie_view()?;
    let mut csv = Csv::new(&["g_hat", "lambda_star", "branch", "error_sum"]);
    for g in linspace(cfg.g_hat_max, cfg.points) {
        let rv = view.at(g)?;
        let dec = optimal_threshold(&rv);
        let sum = error_sum(&rv, dec.lambda_star).error_sum;
        csv.row([num(g).as_str(), &num(dec.lambda_star), dec.branch.as_str(), &num(sum)]);
    }
    Ok(csv.0)
}

/// Without a sweep, a single row keyed by `p_ab`.
pub fn avg_error(cfg: &ExperimentConfig) -> Result<String, CliError> {
    let (field, values) = match &cfg.sweep {
        Some(s) => (s.field, s.values()),
        None => (ParamField::PAb, vec![cfg.params.p_ab]),
    };
    let mut csv = Csv::new(&[field.name(), "avg_error"]);
    for v in values {
        let mut p = cfg.params;
        field.set(&mut p, v);
        csv.nums(&[v, detection_error_at(&p)?]);
    }
    Ok(csv.0)
}

pub fn outage_curve(cfg: &ExperimentConfig) -> Result<String, CliError> {
    check_points(cfg)?;
    let p = &cfg.params;
    // Validates the receiver/hypothesis pairing before anything is written.
    outage_at(p, cfg.receiver, cfg.hypothesis, 0.0)?;
    let rate_max = match cfg.rate_max {
        Some(r) if r >= 0.0 && r.is_finite() => r,
        Some(r) => return Err(CliError::Usage(format!("--rate-max must be non-negative (got {r})"))),
        None => {
            let (signal, interference) = match (cfg.receiver, cfg.hypothesis) {
                (Receiver::Carol, Hypothesis::H1) => (p.p_ac, p.p_ab),
                (Receiver::Carol, Hypothesis::H0) => (p.p_ac, 0.0),
                (Receiver::Bob, _) => (p.p_ab, p.p_ac),
            };
            if interference > 0.0 {
                (signal / interference).ln_1p() / std::f64::consts::LN_2
            } else {
                DEFAULT_RATE_MAX
            }
        }
    };
    let mut csv = Csv::new(&["rate", "delta"]);
    for r in linspace(rate_max, cfg.points) {
        csv.nums(&[r, outage_at(p, cfg.receiver, cfg.hypothesis, r)?]);
    }
    Ok(csv.0)
}

pub fn region(cfg: &ExperimentConfig) -> Result<String, CliError> {
    let points: Vec<RegionPoint> = if cfg.baseline {
        no_covert_baseline(&cfg.params, &cfg.caps, cfg.grid_size)?
    } else {
        region_boundary(&cfg.params, &cfg.caps, cfg.grid_size)?
    };
    let mut csv = Csv::new(&["p_ac", "p_ab", "r_c", "r_b", "covert_margin"]);
    for pt in &points {
        let check = if cfg.baseline {
            certify_rates(&cfg.params, &cfg.caps, pt)
        } else {
            certify(&cfg.params, &cfg.caps, pt)
        };
        check.map_err(|e| CliError::Certification(format!("row at p_ac = {}: {e}", pt.p_ac)))?;
        csv.nums(&[pt.p_ac, pt.p_ab, pt.r_c, pt.r_b, pt.covert_margin]);
    }
    Ok(csv.0)
}

fn mc_row(csv: &mut Csv, quantity: &str, closed: f64, mc: f64, se: f64) {
    let diff = mc - closed;
    let sigmas = if diff == 0.0 { 0.0 } else { diff / se };
    csv.row([quantity, &num(closed), &num(mc), &num(se), &num(sigmas)]);
}

fn warn(quantity: &str, e: &Estimate) {
    if let Some(w) = &e.warning {
        eprintln!("warning: {quantity}: {w}");
    }
}

/// Each quantity is estimated on its own substream of the master seed.
pub fn mc_validate(cfg: &ExperimentConfig) -> Result<String, CliError> {
    let p = &cfg.params;
    let mc: &McConfig = &cfg.mc;
    let view = p.willie_view()?;
    let mut csv = Csv::new(&["quantity", "closed_form", "mc_estimate", "std_err", "sigmas"]);

    let rv = view.at(view.known_gain_mean())?;
    let lambda = optimal_threshold(&rv).lambda_star;
    let cond = empirical_error_sum(
        p,
        ThresholdRule::Fixed(lambda),
        KnownGain::Conditioned(rv.g_hat),
        &mc.substream(0),
    )?;
    warn("p_fa", &cond.p_fa);
    warn("p_md", &cond.p_md);
    mc_row(
        &mut csv,
        "p_fa",
        p_fa(&rv, lambda),
        cond.p_fa.value,
        cond.p_fa.std_error,
    );
    mc_row(
        &mut csv,
        "p_md",
        p_md(&rv, lambda),
        cond.p_md.value,
        cond.p_md.std_error,
    );

    let avg = empirical_error_sum(p, ThresholdRule::Optimal, KnownGain::Marginalized, &mc.substream(1))?;
    mc_row(
        &mut csv,
        "avg_error",
        average_detection_error(p)?,
        avg.error_sum(),
        avg.error_sum_std(),
    );

    let r_c = max_rate(p, Receiver::Carol, Hypothesis::H1, cfg.caps.delta_c)?;
    let r_b = max_rate(p, Receiver::Bob, Hypothesis::H1, cfg.caps.delta_b)?;
    let links = [
        (
            "outage_carol_h1",
            Receiver::Carol,
            Hypothesis::H1,
            r_c,
            outage_carol_h1(p, r_c),
        ),
        (
            "outage_carol_h0",
            Receiver::Carol,
            Hypothesis::H0,
            r_c,
            outage_carol_h0(p, r_c),
        ),
        (
            "outage_bob_h1",
            Receiver::Bob,
            Hypothesis::H1,
            r_b,
            outage_bob_h1(p, r_b),
        ),
    ];
    for (label, (name, rx, hyp, rate, closed)) in (2u64..).zip(links) {
        let est = empirical_outage(p, rx, hyp, rate, &mc.substream(label))?;
        warn(name, &est);
        mc_row(&mut csv, name, closed, est.value, est.std_error);
    }
    Ok(csv.0)
}
