//! `key = value` run configuration with `[section]` headers and `#` comments.
//!
//! Keys may be written inside their section (`nx = 16` under `[grid]`) or
//! fully qualified anywhere (`grid.nx = 16`). Lists are comma-separated.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use hm3d::inequality::{InequalityKind, SweepConfig};
use hm3d::integrator::{Scheme, StepperConfig};
use hm3d::profiles::Profile;
use hm3d::spectral::{Domain, Grid};

use crate::error::{CliError, Result};

/// Every recognized key with its default; `None` marks a required key.
const KEYS: &[(&str, Option<&str>)] = &[
    ("grid.l", Some("6.283185307179586")),
    ("grid.nx", None),
    ("grid.ny", None),
    ("grid.nz", None),
    ("model.re", None),
    ("model.eps", None),
    ("model.nonlinear", Some("true")),
    ("time.dt", None),
    ("time.t_end", None),
    ("time.scheme", Some("if-rk4")),
    ("time.cfl_target", Some("0.5")),
    ("time.galerkin_radius", Some("none")),
    ("initial.profile", Some("random_smooth(2)")),
    ("initial.amplitude", Some("1")),
    ("initial.checkpoint", Some("none")),
    ("diagnostics.cadence", Some("10")),
    ("output.dir", Some("out")),
    ("campaign.seed", Some("0")),
    ("convergence.radii", Some("4,8,16")),
    ("dependence.deltas", Some("0.00000001,0.0000001,0.000001")),
    ("dependence.perturbation", Some("single_mode(1,1,0)")),
    ("inequalities.count", Some("10000")),
    ("inequalities.l", Some("6.283185307179586")),
    ("inequalities.max_band", Some("3,3,3")),
    ("inequalities.alphas", Some("0,1,2")),
    ("inequalities.anisotropy", Some("true")),
    ("inequalities.kinds", Some("lemma1,ladyzhenskaya,agmon_1d,linfty_z,mixed_l4")),
    ("inequalities.p", Some("4")),
];

#[derive(Debug, Clone, PartialEq)]
pub struct InequalityCampaign {
    pub count: usize,
    pub l: f64,
    pub max_band: [i64; 3],
    pub alphas: Vec<f64>,
    pub anisotropy: bool,
    pub kinds: Vec<InequalityKind>,
    /// Exponent of the Ladyzhenskaya-type check.
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub l: f64,
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    pub re: f64,
    pub eps: f64,
    pub nonlinear: bool,
    pub dt: f64,
    pub t_end: f64,
    pub scheme: Scheme,
    pub cfl_target: f64,
    pub galerkin_radius: Option<u32>,
    pub profile: Profile,
    pub amplitude: f64,
    pub checkpoint: Option<PathBuf>,
    pub cadence: usize,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub radii: Vec<u32>,
    pub deltas: Vec<f64>,
    pub perturbation: Profile,
    pub inequalities: InequalityCampaign,
}

struct Entries<'a> {
    origin: &'a str,
    values: BTreeMap<&'static str, (String, usize)>,
}

impl Entries<'_> {
    fn err(&self, line: usize, message: impl Into<String>) -> CliError {
        CliError::Config { path: self.origin.to_string(), line, message: message.into() }
    }

    fn raw(&self, key: &'static str) -> (&str, usize) {
        let (v, line) = &self.values[key];
        (v.as_str(), *line)
    }

    fn get<T: FromStr>(&self, key: &'static str) -> Result<(T, usize)>
    where
        T::Err: std::fmt::Display,
    {
        let (v, line) = self.raw(key);
        v.parse::<T>()
            .map(|x| (x, line))
            .map_err(|e| self.err(line, format!("`{key}`: cannot parse `{v}`: {e}")))
    }

    fn list<T: FromStr>(&self, key: &'static str) -> Result<(Vec<T>, usize)>
    where
        T::Err: std::fmt::Display,
    {
        let (v, line) = self.raw(key);
        v.split(',')
            .map(|s| {
                s.trim()
                    .parse::<T>()
                    .map_err(|e| self.err(line, format!("`{key}`: cannot parse `{}`: {e}", s.trim())))
            })
            .collect::<Result<Vec<T>>>()
            .map(|x| (x, line))
    }

    fn optional<T: FromStr>(&self, key: &'static str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        let (v, _) = self.raw(key);
        if v == "none" {
            Ok(None)
        } else {
            self.get(key).map(|(x, _)| Some(x))
        }
    }

    fn check(&self, ok: bool, line: usize, message: impl FnOnce() -> String) -> Result<()> {
        if ok {
            Ok(())
        } else {
            Err(self.err(line, message()))
        }
    }
}

/// Parses configuration text; `origin` names the source in error messages.
pub fn parse_config(text: &str, origin: &str) -> Result<RunConfig> {
    let mut entries = Entries { origin, values: BTreeMap::new() };
    let mut section = String::new();
    let mut last_line = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        last_line = line;
        let content = raw.split('#').next().unwrap().trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| entries.err(line, format!("malformed section header `{content}`")))?
                .trim();
            if !KEYS.iter().any(|(k, _)| k.split('.').next() == Some(name)) {
                return Err(entries.err(line, format!("unknown section `[{name}]`")));
            }
            section = name.to_string();
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| entries.err(line, format!("expected `key = value`, found `{content}`")))?;
        let (key, value) = (key.trim(), value.trim());
        let full = if key.contains('.') || section.is_empty() {
            key.to_string()
        } else {
            format!("{section}.{key}")
        };
        let known = KEYS
            .iter()
            .map(|(k, _)| *k)
            .find(|k| *k == full)
            .ok_or_else(|| entries.err(line, format!("unknown key `{full}`")))?;
        if value.is_empty() {
            return Err(entries.err(line, format!("`{full}` has an empty value")));
        }
        if let Some((_, prev)) = entries.values.insert(known, (value.to_string(), line)) {
            return Err(entries.err(line, format!("`{full}` already set on line {prev}")));
        }
    }
    for (key, default) in KEYS {
        if !entries.values.contains_key(key) {
            match default {
                Some(d) => {
                    entries.values.insert(key, (d.to_string(), 0));
                }
                None => return Err(entries.err(last_line, format!("missing required key `{key}`"))),
            }
        }
    }
    build(&entries)
}

fn build(e: &Entries) -> Result<RunConfig> {
    let (l, line) = e.get::<f64>("grid.l")?;
    e.check(l > 0.0 && l.is_finite(), line, || format!("`grid.l` must be positive, got {l}"))?;
    let mut dims = [0usize; 3];
    for (d, key) in ["grid.nx", "grid.ny", "grid.nz"].into_iter().enumerate() {
        let (n, line) = e.get::<usize>(key)?;
        e.check(n >= 4 && n % 2 == 0, line, || format!("`{key}` must be even and at least 4, got {n}"))?;
        dims[d] = n;
    }
    let (re, line) = e.get::<f64>("model.re")?;
    e.check(re > 0.0, line, || format!("`model.re` must be positive (inf disables viscosity), got {re}"))?;
    let (eps, line) = e.get::<f64>("model.eps")?;
    e.check(eps >= 0.0 && eps.is_finite(), line, || format!("`model.eps` must be >= 0, got {eps}"))?;
    let (nonlinear, _) = e.get::<bool>("model.nonlinear")?;

    let (dt, line) = e.get::<f64>("time.dt")?;
    e.check(dt > 0.0 && dt.is_finite(), line, || format!("`time.dt` must be positive, got {dt}"))?;
    let (t_end, line) = e.get::<f64>("time.t_end")?;
    e.check(t_end >= 0.0 && t_end.is_finite(), line, || format!("`time.t_end` must be >= 0, got {t_end}"))?;
    let (scheme, _) = e.get::<Scheme>("time.scheme")?;
    let (cfl_target, line) = e.get::<f64>("time.cfl_target")?;
    e.check(cfl_target > 0.0, line, || format!("`time.cfl_target` must be positive, got {cfl_target}"))?;
    let galerkin_radius = e.optional::<u32>("time.galerkin_radius")?;
    let (_, line) = e.raw("time.galerkin_radius");
    e.check(galerkin_radius != Some(0), line, || "`time.galerkin_radius` must be positive".into())?;

    let (profile, _) = e.get::<Profile>("initial.profile")?;
    let (amplitude, line) = e.get::<f64>("initial.amplitude")?;
    e.check(amplitude >= 0.0 && amplitude.is_finite(), line, || {
        format!("`initial.amplitude` must be >= 0, got {amplitude}")
    })?;
    let checkpoint = e.optional::<PathBuf>("initial.checkpoint")?;
    let (cadence, line) = e.get::<usize>("diagnostics.cadence")?;
    e.check(cadence >= 1, line, || "`diagnostics.cadence` must be at least 1".into())?;
    let (output_dir, _) = e.get::<PathBuf>("output.dir")?;
    let (seed, _) = e.get::<u64>("campaign.seed")?;

    let (radii, line) = e.list::<u32>("convergence.radii")?;
    e.check(
        radii.len() >= 2 && radii[0] > 0 && radii.windows(2).all(|p| p[1] == 2 * p[0]),
        line,
        || format!("`convergence.radii` must be a doubling chain like 4,8,16, got {radii:?}"),
    )?;
    let (deltas, line) = e.list::<f64>("dependence.deltas")?;
    e.check(deltas.iter().all(|d| *d >= 0.0 && d.is_finite()), line, || {
        "`dependence.deltas` must be >= 0".into()
    })?;
    let (perturbation, _) = e.get::<Profile>("dependence.perturbation")?;

    let (count, line) = e.get::<usize>("inequalities.count")?;
    e.check(count >= 1, line, || "`inequalities.count` must be at least 1".into())?;
    let (il, line) = e.get::<f64>("inequalities.l")?;
    e.check(il > 0.0 && il.is_finite(), line, || format!("`inequalities.l` must be positive, got {il}"))?;
    let (band, line) = e.list::<i64>("inequalities.max_band")?;
    e.check(band.len() == 3 && band.iter().all(|b| *b >= 1), line, || {
        "`inequalities.max_band` must be three values >= 1".into()
    })?;
    let (alphas, line) = e.list::<f64>("inequalities.alphas")?;
    e.check(alphas.iter().all(|a| *a >= 0.0 && a.is_finite()), line, || {
        "`inequalities.alphas` must be >= 0".into()
    })?;
    let (anisotropy, _) = e.get::<bool>("inequalities.anisotropy")?;
    let (kind_names, line) = e.list::<String>("inequalities.kinds")?;
    let kinds = kind_names
        .iter()
        .map(|k| InequalityKind::parse(k).map_err(|err| e.err(line, err.to_string())))
        .collect::<Result<Vec<_>>>()?;
    let (p, line) = e.get::<f64>("inequalities.p")?;
    e.check((2.0..=6.0).contains(&p), line, || format!("`inequalities.p` must lie in [2, 6], got {p}"))?;

    Ok(RunConfig {
        l,
        nx: dims[0],
        ny: dims[1],
        nz: dims[2],
        re,
        eps,
        nonlinear,
        dt,
        t_end,
        scheme,
        cfl_target,
        galerkin_radius,
        profile,
        amplitude,
        checkpoint,
        cadence,
        output_dir,
        seed,
        radii,
        deltas,
        perturbation,
        inequalities: InequalityCampaign {
            count,
            l: il,
            max_band: [band[0], band[1], band[2]],
            alphas,
            anisotropy,
            kinds,
            p,
        },
    })
}

fn join<T: std::fmt::Display>(xs: &[T]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

impl RunConfig {
    pub fn grid(&self) -> Result<Grid> {
        Ok(Grid::new(self.l, self.nx, self.ny, self.nz)?)
    }

    /// Domain with the Galerkin radius applied.
    pub fn domain(&self) -> Result<Domain> {
        Ok(Domain::new(self.grid()?, self.re, self.eps)?.with_galerkin_radius(self.galerkin_radius))
    }

    pub fn stepper(&self) -> Result<StepperConfig> {
        let mut c = StepperConfig::new(self.dt, self.t_end)?;
        c.scheme = self.scheme;
        c.cfl_target = self.cfl_target;
        c.galerkin_radius = self.galerkin_radius;
        Ok(c)
    }

    pub fn sweep(&self) -> SweepConfig {
        let q = &self.inequalities;
        SweepConfig {
            count: q.count,
            campaign_seed: self.seed,
            l: q.l,
            max_band: q.max_band,
            alphas: q.alphas.clone(),
            anisotropy: q.anisotropy,
        }
    }

    /// Every key, defaults included. Parsing the result gives back `self`.
    pub fn serialize(&self) -> String {
        let q = &self.inequalities;
        let opt = |p: &Option<PathBuf>| p.as_ref().map_or("none".to_string(), |p| p.display().to_string());
        let kinds: Vec<&str> = q.kinds.iter().map(|k| k.as_str()).collect();
        let mut s = String::new();
        let mut put = |section: &str, pairs: &[(&str, String)]| {
            let _ = writeln!(s, "[{section}]");
            for (k, v) in pairs {
                let _ = writeln!(s, "{k} = {v}");
            }
            s.push('\n');
        };
        put("grid", &[
            ("l", self.l.to_string()),
            ("nx", self.nx.to_string()),
            ("ny", self.ny.to_string()),
            ("nz", self.nz.to_string()),
        ]);
        put("model", &[
            ("re", self.re.to_string()),
            ("eps", self.eps.to_string()),
            ("nonlinear", self.nonlinear.to_string()),
        ]);
        put("time", &[
            ("dt", self.dt.to_string()),
            ("t_end", self.t_end.to_string()),
            ("scheme", self.scheme.to_string()),
            ("cfl_target", self.cfl_target.to_string()),
            ("galerkin_radius", self.galerkin_radius.map_or("none".into(), |m| m.to_string())),
        ]);
        put("initial", &[
            ("profile", self.profile.to_string()),
            ("amplitude", self.amplitude.to_string()),
            ("checkpoint", opt(&self.checkpoint)),
        ]);
        put("diagnostics", &[("cadence", self.cadence.to_string())]);
        put("output", &[("dir", self.output_dir.display().to_string())]);
        put("campaign", &[("seed", self.seed.to_string())]);
        put("convergence", &[("radii", join(&self.radii))]);
        put("dependence", &[
            ("deltas", join(&self.deltas)),
            ("perturbation", self.perturbation.to_string()),
        ]);
        put("inequalities", &[
            ("count", q.count.to_string()),
            ("l", q.l.to_string()),
            ("max_band", join(&q.max_band)),
            ("alphas", join(&q.alphas)),
            ("anisotropy", q.anisotropy.to_string()),
            ("kinds", kinds.join(",")),
            ("p", q.p.to_string()),
        ]);
        s
    }
}
