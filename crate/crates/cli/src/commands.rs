use std::path::Path;

use pce::carnot::{
    efficiency_limits, positive_work_condition, run_cycle, sci, ts_csv, ts_diagram, CycleReport,
    EfficiencyLimits,
};
use pce::feasibility::{
    coherence_vs_loss, decimal_order, derive_injection, profile_for, Platform, PlatformProfile,
    DEFAULT_COHERENCE,
};
use pce::fock::mean_photon;
use pce::micromaser::{mean_photon_steady, steady_state_with, Quality, SteadyOptions};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use crate::config::{Config, IsothermConfig};
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum SweepParam {
    QFactor,
    Xi,
    Phase,
    TRatio,
}

impl SweepParam {
    fn name(self) -> &'static str {
        match self {
            SweepParam::QFactor => "q_factor",
            SweepParam::Xi => "xi",
            SweepParam::Phase => "phase",
            SweepParam::TRatio => "t_ratio",
        }
    }
}

/// Pretty JSON with every float written as 17 significant digits, matching
/// the CSV output.
struct SciFormatter(serde_json::ser::PrettyFormatter<'static>);

impl serde_json::ser::Formatter for SciFormatter {
    fn write_f64<W: ?Sized + std::io::Write>(
        &mut self,
        w: &mut W,
        value: f64,
    ) -> std::io::Result<()> {
        w.write_all(sci(value).as_bytes())
    }
    fn begin_array<W: ?Sized + std::io::Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + std::io::Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + std::io::Write>(
        &mut self,
        w: &mut W,
        first: bool,
    ) -> std::io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + std::io::Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + std::io::Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + std::io::Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + std::io::Write>(
        &mut self,
        w: &mut W,
        first: bool,
    ) -> std::io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + std::io::Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + std::io::Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_object_value(w)
    }
}

fn json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(
        &mut buf,
        SciFormatter(serde_json::ser::PrettyFormatter::new()),
    );
    value.serialize(&mut ser).expect("report types serialize");
    buf.push(b'\n');
    String::from_utf8(buf).expect("JSON is UTF-8")
}

#[derive(Debug, Serialize)]
pub struct SteadyReport {
    pub n_max: usize,
    pub mean_photon: f64,
    pub analytic_mean_photon: f64,
    pub relative_gap: f64,
    pub populations: Vec<f64>,
}

pub fn steady_state(
    cfg: &Config,
    tol: Option<f64>,
    format: Format,
    dump: Option<&Path>,
) -> CliResult<String> {
    let (params, prep) = cfg.steady_inputs()?;
    let analytic = mean_photon_steady(&params, &prep)?;
    let mut opts = SteadyOptions::default();
    if let Some(t) = tol {
        if !(t.is_finite() && t > 0.0) {
            return Err(CliError::usage(format!("--tol must be positive, got {t}")));
        }
        opts.tol = t;
    }
    let rho = steady_state_with(&params, &prep, &opts)?;
    if let Some(path) = dump {
        write_file(path, &json(&rho.to_json()))?;
    }
    let numeric = mean_photon(&rho);
    let gap = if analytic == 0.0 {
        numeric.abs()
    } else {
        ((numeric - analytic) / analytic).abs()
    };
    let report = SteadyReport {
        n_max: rho.n_max(),
        mean_photon: numeric,
        analytic_mean_photon: analytic,
        relative_gap: gap,
        populations: rho.populations(),
    };
    Ok(match format {
        Format::Json => json(&report),
        Format::Csv => {
            let mut out = String::from("n,population\n");
            for (n, p) in report.populations.iter().enumerate() {
                out.push_str(&format!("{n},{}\n", sci(*p)));
            }
            out
        }
    })
}

#[derive(Debug, Serialize)]
struct CycleOutput<'a> {
    #[serde(flatten)]
    report: &'a CycleReport,
    positive_work_margin: f64,
    limits: Option<EfficiencyLimits>,
}

pub fn cycle(cfg: &Config, format: Format) -> CliResult<String> {
    let spec = cfg.cycle_spec()?;
    let report = run_cycle(&spec)?;
    Ok(match format {
        Format::Csv => report.to_csv(),
        Format::Json => {
            let margin = positive_work_condition(&spec)?.margin;
            // the bad-cavity limit is undefined for some preps; omit rather than fail
            let limits = efficiency_limits(&spec).ok();
            json(&CycleOutput {
                report: &report,
                positive_work_margin: margin,
                limits,
            })
        }
    })
}

pub const DEFAULT_POINTS_PER_STROKE: usize = 32;

pub fn ts(cfg: &Config, points: Option<usize>, format: Format) -> CliResult<String> {
    let spec = cfg.cycle_spec()?;
    let points = points
        .or(cfg.points_per_stroke)
        .unwrap_or(DEFAULT_POINTS_PER_STROKE);
    let samples = ts_diagram(&spec, points)?;
    Ok(match format {
        Format::Csv => ts_csv(&samples),
        Format::Json => json(&samples),
    })
}

#[derive(Debug, Serialize)]
struct SweepRow {
    param: &'static str,
    value: f64,
    report: Option<CycleReport>,
    error: Option<String>,
}

fn grid_value(param: SweepParam, v: &Value) -> CliResult<f64> {
    match v {
        Value::Number(n) => n
            .as_f64()
            .ok_or_else(|| CliError::config("sweep.grid", format!("{n} is not a float"))),
        Value::String(s) if param == SweepParam::QFactor && s.eq_ignore_ascii_case("inf") => {
            Ok(f64::INFINITY)
        }
        Value::String(s) => s
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| {
                CliError::config(
                    "sweep.grid",
                    format!("cannot read {s:?} as a {} value", param.name()),
                )
            }),
        other => Err(CliError::config(
            "sweep.grid",
            format!("unexpected grid entry {other}"),
        )),
    }
}

fn point_config(cfg: &Config, param: SweepParam, v: f64) -> CliResult<Config> {
    let mut c = cfg.clone();
    match param {
        SweepParam::QFactor => {
            let e = c
                .engine
                .as_mut()
                .ok_or_else(|| CliError::config("engine", "missing field"))?;
            e.q_factor = Quality::from(v);
        }
        SweepParam::Xi => {
            hot_mut(&mut c)?.prep.xi = Some(num_complex::Complex64::new(v, 0.0).into())
        }
        SweepParam::Phase => hot_mut(&mut c)?.prep.phase = Some(v),
        SweepParam::TRatio => {
            let t_h = hot_mut(&mut c)?.t;
            c.cold
                .as_mut()
                .ok_or_else(|| CliError::config("cold", "missing field"))?
                .t = t_h * v;
        }
    }
    Ok(c)
}

fn hot_mut(c: &mut Config) -> CliResult<&mut IsothermConfig> {
    c.hot
        .as_mut()
        .ok_or_else(|| CliError::config("hot", "missing field"))
}

pub fn sweep(
    cfg: &Config,
    param: Option<SweepParam>,
    grid: Option<Vec<String>>,
    threads: Option<usize>,
    format: Format,
) -> CliResult<String> {
    let sweep_cfg = cfg.sweep.clone();
    let param = match (param, sweep_cfg.as_ref().and_then(|s| s.param.as_deref())) {
        (Some(p), _) => p,
        (None, Some(name)) => {
            serde_json::from_value(Value::String(name.to_string())).map_err(|_| {
                CliError::config("sweep.param", format!("unknown sweep parameter {name:?}"))
            })?
        }
        (None, None) => {
            return Err(CliError::usage(
                "no sweep parameter given (--param or sweep.param)",
            ))
        }
    };
    let raw: Vec<Value> = match grid {
        Some(g) => g
            .into_iter()
            .filter(|s| !s.trim().is_empty())
            .map(Value::String)
            .collect(),
        None => sweep_cfg.map(|s| s.grid).unwrap_or_default(),
    };
    if raw.is_empty() {
        return Err(CliError::usage("sweep grid is empty"));
    }
    let values = raw
        .iter()
        .map(|v| grid_value(param, v))
        .collect::<CliResult<Vec<f64>>>()?;
    let rising = values.windows(2).all(|w| w[1] > w[0]);
    let falling = values.windows(2).all(|w| w[1] < w[0]);
    if !(rising || falling) {
        return Err(CliError::usage("sweep grid must be strictly monotone"));
    }
    // fail fast on a config that cannot produce any cycle
    cfg.cycle_spec()?;

    let eval = |&v: &f64| {
        let result = point_config(cfg, param, v)
            .and_then(|c| c.cycle_spec())
            .and_then(|spec| run_cycle(&spec).map_err(CliError::from));
        match result {
            Ok(report) => SweepRow {
                param: param.name(),
                value: v,
                report: Some(report),
                error: None,
            },
            Err(e) => SweepRow {
                param: param.name(),
                value: v,
                report: None,
                error: Some(e.to_string()),
            },
        }
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::usage(format!("cannot start worker pool: {e}")))?;
    let rows: Vec<SweepRow> = pool.install(|| values.par_iter().map(eval).collect());

    Ok(match format {
        Format::Json => json(&rows),
        Format::Csv => sweep_csv(&rows),
    })
}

const SWEEP_HEADER: &str =
    "param,value,eta,work_J,q_in_J,q_out_J,zeta_h,zeta_l,T_h_eff_K,T_l_eff_K,positive_work,\
nu_1,nu_2,nu_3,nu_4,n_1,n_2,n_3,n_4,S_1,S_2,S_3,S_4,error\n";

fn value_cell(v: f64) -> String {
    if v.is_infinite() {
        "inf".into()
    } else {
        sci(v)
    }
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\"").replace('\n', " "))
}

fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_HEADER);
    for row in rows {
        let mut cells = vec![row.param.to_string(), value_cell(row.value)];
        match &row.report {
            Some(r) => {
                cells.extend(
                    [
                        r.eta, r.work, r.q_in, r.q_out, r.zeta_h, r.zeta_l, r.t_h_eff, r.t_l_eff,
                    ]
                    .map(sci),
                );
                cells.push(r.positive_work.to_string());
                cells.extend(r.corners.iter().map(|c| sci(c.nu)));
                cells.extend(r.corners.iter().map(|c| sci(c.n_mean)));
                cells.extend(r.corners.iter().map(|c| sci(c.entropy)));
                cells.push(String::new());
            }
            None => {
                cells.extend(std::iter::repeat(String::new()).take(21));
                cells.push(quote(row.error.as_deref().unwrap_or_default()));
            }
        }
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

#[derive(Debug, Serialize)]
struct FeasibilityRow {
    platform: Platform,
    nu: f64,
    lamb: f64,
    q_max: f64,
    n_scale: f64,
    lambda_tau_sqrt_n: f64,
    tau: f64,
    r_max: f64,
    mu: f64,
    loss_term: f64,
    coherence: f64,
    loss_dominates: bool,
    log10_ratio: f64,
    loss_order: i32,
}

fn apply_platform_override(
    profile: &mut PlatformProfile,
    coherence: &mut f64,
    key: &str,
    v: f64,
) -> CliResult<()> {
    let slot = match key {
        "nu" => &mut profile.nu,
        "lamb" => &mut profile.lamb,
        "q_max" => &mut profile.q_max,
        "n_scale" => &mut profile.n_scale,
        "lambda_tau_sqrt_n" => &mut profile.lambda_tau_sqrt_n,
        "coherence" => coherence,
        other => {
            return Err(CliError::usage(format!(
                "unknown feasibility field {other:?}"
            )))
        }
    };
    *slot = v;
    Ok(())
}

pub fn feasibility(names: &[String], overrides: &[String], format: Format) -> CliResult<String> {
    let platforms: Vec<Platform> = if names.is_empty() {
        Platform::ALL.to_vec()
    } else {
        names
            .iter()
            .map(|n| {
                n.parse::<Platform>()
                    .map_err(|e| CliError::usage(e.to_string()))
            })
            .collect::<CliResult<_>>()?
    };
    let mut parsed = Vec::new();
    for o in overrides {
        let (key, raw) = o
            .split_once('=')
            .ok_or_else(|| CliError::usage(format!("--set expects key=value, got {o:?}")))?;
        let v: f64 = raw
            .parse()
            .map_err(|_| CliError::usage(format!("--set {key}: {raw:?} is not a number")))?;
        let (scope, field) = match key.split_once('.') {
            Some((p, f)) => (
                Some(
                    p.parse::<Platform>()
                        .map_err(|e| CliError::usage(e.to_string()))?,
                ),
                f,
            ),
            None => (None, key),
        };
        parsed.push((scope, field.to_string(), v));
    }

    let mut rows = Vec::new();
    for p in platforms {
        let mut profile = profile_for(p);
        let mut coherence = DEFAULT_COHERENCE;
        for (scope, field, v) in &parsed {
            if scope.is_none_or(|s| s == p) {
                apply_platform_override(&mut profile, &mut coherence, field, *v)?;
            }
        }
        let verdict = coherence_vs_loss(&profile, coherence)?;
        let inj = derive_injection(&profile);
        rows.push(FeasibilityRow {
            platform: p,
            nu: profile.nu,
            lamb: profile.lamb,
            q_max: profile.q_max,
            n_scale: profile.n_scale,
            lambda_tau_sqrt_n: profile.lambda_tau_sqrt_n,
            tau: inj.tau,
            r_max: inj.r_max,
            mu: inj.mu,
            loss_term: verdict.loss_term,
            coherence,
            loss_dominates: verdict.loss_dominates,
            log10_ratio: verdict.log10_ratio,
            loss_order: decimal_order(verdict.loss_term),
        });
    }
    Ok(match format {
        Format::Json => json(&rows),
        Format::Csv => {
            let mut out = String::from(
                "platform,nu,lamb,q_max,n_scale,lambda_tau_sqrt_n,tau_s,r_max,mu,loss_term,coherence,loss_dominates,log10_ratio,loss_order\n",
            );
            for r in &rows {
                let nums = [
                    r.nu,
                    r.lamb,
                    r.q_max,
                    r.n_scale,
                    r.lambda_tau_sqrt_n,
                    r.tau,
                    r.r_max,
                    r.mu,
                    r.loss_term,
                    r.coherence,
                ]
                .map(sci)
                .join(",");
                out.push_str(&format!(
                    "{},{nums},{},{},{}\n",
                    r.platform,
                    r.loss_dominates,
                    sci(r.log10_ratio),
                    r.loss_order
                ));
            }
            out
        }
    })
}

pub fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    std::fs::write(path, contents)
        .map_err(|e| CliError::io(format!("cannot write {}", path.display()), e))
}
