//! `key = value` run configuration with `[section]` headers and `#` comments.
//!
//! Every parameter has an explicit default; unknown keys are hard errors that
//! name the nearest valid key. Parsed configs serialize to a canonical form
//! that parses back to the same config.

use fdlab_core::elliptic::SolverOptions;
use fdlab_core::grid::{BallSpec, Exterior, Field, Topology, UniformGrid};
use fdlab_core::lab::ClassifyThresholds;
use fdlab_core::nonlin::Nonlinearity;
use fdlab_core::op::{OperatorKind, OperatorSpec};
use fdlab_core::parabolic::ParabolicProblem;
use std::collections::BTreeMap;
use std::fmt::Write as _;

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

type Result<T> = std::result::Result<T, ConfigError>;

/// (section, key, default) for every recognized parameter.
const KNOWN: &[(&str, &str, &str)] = &[
    ("grid", "dimension", "1"),
    ("grid", "half_width", "50"),
    ("grid", "points_per_axis", "512"),
    ("grid", "topology", "truncated"),
    ("operator", "kind", "truncated-quadrature"),
    ("operator", "s", "0.5"),
    ("model", "nonlinearity", "power:1"),
    ("model", "epsilon", "0.01"),
    ("initial", "profile", "gaussian:1,1"),
    ("time", "t_end", "0.1"),
    ("time", "dt", "0.0025"),
    ("solver", "tol", "auto"),
    ("solver", "max_iter", "60"),
    ("solver", "dense_limit", "512"),
    ("sweep", "eps_list", "0.1,0.01,0.001,0.0001,0.00001,0.000001"),
    ("sweep", "tau", "0.1"),
    ("sweep", "ball_radius", "2"),
    ("sweep", "theta", "0.05"),
    ("sweep", "sigma", "0.1"),
    ("sweep", "stabilization", "0.05"),
    ("phase", "s_values", "0.3,0.5,0.75,0.9"),
    ("phase", "n_values", "0,0.2,0.5,0.8,0.9,1"),
    ("phase", "exclusion_margin", "0.1"),
    ("output", "snapshot_times", "0.05,0.1"),
];

/// Typed view over the flat key/value map.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    values: BTreeMap<String, String>,
}

fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0usize; b.len() + 1];
    for i in 1..=a.len() {
        cur[0] = i;
        for j in 1..=b.len() {
            let cost = usize::from(a[i - 1] != b[j - 1]);
            cur[j] = (prev[j] + 1).min(cur[j - 1] + 1).min(prev[j - 1] + cost);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Parse the `key = value` grammar into a fully defaulted, validated config.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut values: BTreeMap<String, String> = KNOWN
        .iter()
        .map(|(s, k, d)| (format!("{s}.{k}"), d.to_string()))
        .collect();
    let mut section = String::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest.strip_suffix(']').ok_or_else(|| {
                ConfigError(format!("line {}: malformed section header", lineno + 1))
            })?;
            section = name.trim().to_string();
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            ConfigError(format!(
                "line {}: expected `key = value`, got `{line}`",
                lineno + 1
            ))
        })?;
        let key = key.trim();
        let value = value.trim();
        let full = if section.is_empty() {
            key.to_string()
        } else {
            format!("{section}.{key}")
        };
        if !values.contains_key(&full) {
            let nearest = KNOWN
                .iter()
                .map(|(s, k, _)| format!("{s}.{k}"))
                .min_by_key(|name| levenshtein(&full, name))
                .unwrap();
            return Err(ConfigError(format!(
                "line {}: unknown key `{full}` (nearest valid key: `{nearest}`)",
                lineno + 1
            )));
        }
        values.insert(full, value.to_string());
    }
    let cfg = RunConfig { values };
    cfg.validate_and_normalize()
}

impl RunConfig {
    pub fn default_config() -> RunConfig {
        parse_config("").expect("defaults must validate")
    }

    /// Canonical serialization: fixed section/key order, normalized values.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        let mut last_section = "";
        for (section, key, _) in KNOWN {
            if *section != last_section {
                if !last_section.is_empty() {
                    out.push('\n');
                }
                let _ = writeln!(out, "[{section}]");
                last_section = section;
            }
            let full = format!("{section}.{key}");
            let _ = writeln!(out, "{key} = {}", self.values[&full]);
        }
        out
    }

    /// Flat key/value view for the manifest.
    pub fn entries(&self) -> impl Iterator<Item = (&String, &String)> {
        self.values.iter()
    }

    pub fn get(&self, full: &str) -> &str {
        &self.values[full]
    }

    fn set(&mut self, full: &str, value: String) {
        assert!(self.values.contains_key(full), "unknown key {full}");
        self.values.insert(full.to_string(), value);
    }

    pub fn with(&self, full: &str, value: &str) -> RunConfig {
        let mut c = self.clone();
        c.set(full, value.to_string());
        c.validate_and_normalize().expect("override must validate")
    }

    fn f64_of(&self, full: &str) -> Result<f64> {
        self.values[full]
            .parse::<f64>()
            .map_err(|_| ConfigError(format!("`{full}` expects a real number, got `{}`", self.values[full])))
    }

    fn usize_of(&self, full: &str) -> Result<usize> {
        self.values[full]
            .parse::<usize>()
            .map_err(|_| ConfigError(format!("`{full}` expects an integer, got `{}`", self.values[full])))
    }

    fn list_of(&self, full: &str) -> Result<Vec<f64>> {
        let raw = &self.values[full];
        if raw.trim().is_empty() {
            return Ok(Vec::new());
        }
        raw.split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<f64>()
                    .map_err(|_| ConfigError(format!("`{full}` has a bad entry `{tok}`")))
            })
            .collect()
    }

    /// Re-derive every typed value once so errors surface at parse time, and
    /// rewrite values in canonical form so serialization round-trips.
    fn validate_and_normalize(mut self) -> Result<RunConfig> {
        let fmt_f64 = |v: f64| format!("{v}");
        let fmt_list = |v: &[f64]| {
            v.iter()
                .map(|x| format!("{x}"))
                .collect::<Vec<_>>()
                .join(",")
        };

        let dim = self.usize_of("grid.dimension")?;
        if !(1..=2).contains(&dim) {
            return Err(ConfigError("grid.dimension must be 1 or 2".into()));
        }
        let half_width = self.f64_of("grid.half_width")?;
        let m = self.usize_of("grid.points_per_axis")?;
        match self.get("grid.topology") {
            "truncated" | "periodic" => {}
            other => {
                return Err(ConfigError(format!(
                    "grid.topology must be `truncated` or `periodic`, got `{other}`"
                )))
            }
        }
        UniformGrid::new(dim, half_width, m, Topology::Truncated)
            .map_err(|e| ConfigError(e.to_string()))?;

        match self.get("operator.kind") {
            "truncated-quadrature" | "periodic-spectral" | "dirichlet-restricted"
            | "dirichlet-spectral" => {}
            other => {
                return Err(ConfigError(format!(
                    "operator.kind `{other}` is not one of truncated-quadrature, periodic-spectral, dirichlet-restricted, dirichlet-spectral"
                )))
            }
        }
        let s = self.f64_of("operator.s")?;
        if !(s > 0.0 && s < 1.0) {
            return Err(ConfigError(format!("s must lie in (0,1), got {s}")));
        }
        self.nonlinearity()?;
        let eps = self.f64_of("model.epsilon")?;
        if !(eps > 0.0) {
            return Err(ConfigError("model.epsilon must be positive".into()));
        }
        self.profile_spec()?;
        let t_end = self.f64_of("time.t_end")?;
        let dt = self.f64_of("time.dt")?;
        if !(dt > 0.0 && dt <= t_end) {
            return Err(ConfigError("need 0 < time.dt <= time.t_end".into()));
        }
        match self.get("solver.tol") {
            "auto" => {}
            other => {
                other.parse::<f64>().map_err(|_| {
                    ConfigError("solver.tol must be `auto` or a real number".into())
                })?;
            }
        }
        self.usize_of("solver.max_iter")?;
        self.usize_of("solver.dense_limit")?;
        let eps_list = self.list_of("sweep.eps_list")?;
        if eps_list.is_empty() || eps_list.windows(2).any(|w| w[1] >= w[0]) {
            return Err(ConfigError(
                "sweep.eps_list must be nonempty and strictly decreasing".into(),
            ));
        }
        for k in ["sweep.tau", "sweep.ball_radius", "sweep.theta", "sweep.sigma", "sweep.stabilization", "phase.exclusion_margin"] {
            let v = self.f64_of(k)?;
            if !(v > 0.0) {
                return Err(ConfigError(format!("`{k}` must be positive")));
            }
        }
        let s_values = self.list_of("phase.s_values")?;
        if s_values.iter().any(|&x| !(x > 0.0 && x < 1.0)) {
            return Err(ConfigError("phase.s_values must lie in (0,1)".into()));
        }
        let n_values = self.list_of("phase.n_values")?;
        if n_values.iter().any(|&x| x < 0.0) {
            return Err(ConfigError("phase.n_values must be nonnegative".into()));
        }
        let snaps = self.list_of("output.snapshot_times")?;

        // canonical forms
        self.set("grid.dimension", dim.to_string());
        self.set("grid.half_width", fmt_f64(half_width));
        self.set("grid.points_per_axis", m.to_string());
        self.set("operator.s", fmt_f64(s));
        self.set("model.epsilon", fmt_f64(eps));
        self.set("time.t_end", fmt_f64(t_end));
        self.set("time.dt", fmt_f64(dt));
        self.set("sweep.eps_list", fmt_list(&eps_list));
        self.set("phase.s_values", fmt_list(&s_values));
        self.set("phase.n_values", fmt_list(&n_values));
        self.set("output.snapshot_times", fmt_list(&snaps));
        for k in ["sweep.tau", "sweep.ball_radius", "sweep.theta", "sweep.sigma", "sweep.stabilization", "phase.exclusion_margin"] {
            let v = self.f64_of(k)?;
            self.set(k, fmt_f64(v));
        }
        Ok(self)
    }

    pub fn grid(&self) -> Result<UniformGrid> {
        let topology = match self.get("grid.topology") {
            "periodic" => Topology::Periodic,
            _ => Topology::Truncated,
        };
        UniformGrid::new(
            self.usize_of("grid.dimension")?,
            self.f64_of("grid.half_width")?,
            self.usize_of("grid.points_per_axis")?,
            topology,
        )
        .map_err(|e| ConfigError(e.to_string()))
    }

    pub fn operator_kind(&self) -> OperatorKind {
        match self.get("operator.kind") {
            "periodic-spectral" => OperatorKind::PeriodicSpectral,
            "dirichlet-restricted" => OperatorKind::DirichletRestricted,
            "dirichlet-spectral" => OperatorKind::DirichletSpectral,
            _ => OperatorKind::TruncatedQuadrature,
        }
    }

    pub fn op_spec(&self) -> Result<OperatorSpec> {
        OperatorSpec::new(self.f64_of("operator.s")?, self.operator_kind(), self.grid()?)
            .map_err(|e| ConfigError(e.to_string()))
    }

    pub fn nonlinearity(&self) -> Result<Nonlinearity> {
        let raw = self.get("model.nonlinearity");
        if raw == "log" {
            return Ok(Nonlinearity::Logarithmic);
        }
        if let Some(arg) = raw.strip_prefix("power:") {
            let n: f64 = arg
                .parse()
                .map_err(|_| ConfigError(format!("bad power exponent `{arg}`")))?;
            return Nonlinearity::power(n).map_err(|e| ConfigError(e.to_string()));
        }
        Err(ConfigError(format!(
            "model.nonlinearity must be `power:<n>` or `log`, got `{raw}`"
        )))
    }

    fn profile_spec(&self) -> Result<(String, Vec<f64>)> {
        let raw = self.get("initial.profile");
        let (name, args) = match raw.split_once(':') {
            Some((n, a)) => (n, a),
            None => (raw, ""),
        };
        let args: Vec<f64> = if args.is_empty() {
            Vec::new()
        } else {
            args.split(',')
                .map(|t| {
                    t.trim()
                        .parse::<f64>()
                        .map_err(|_| ConfigError(format!("bad profile argument `{t}`")))
                })
                .collect::<Result<_>>()?
        };
        let arity_ok = match name {
            "gaussian" => args.len() == 2,
            "indicator" => args.len() == 2,
            "loghalf" => args.len() == 1,
            "constant" => args.len() == 1,
            _ => {
                return Err(ConfigError(format!(
                    "initial.profile `{name}` is not one of gaussian:<amp>,<width>, indicator:<a>,<b>, loghalf:<T>, constant:<c>"
                )))
            }
        };
        if !arity_ok {
            return Err(ConfigError(format!(
                "initial.profile `{raw}` has the wrong number of arguments"
            )));
        }
        Ok((name.to_string(), args))
    }

    pub fn initial_field(&self, grid: UniformGrid) -> Result<Field> {
        let (name, args) = self.profile_spec()?;
        let field = match name.as_str() {
            "gaussian" => fdlab_core::profiles::gaussian(grid, args[0], args[1]),
            "indicator" => fdlab_core::profiles::indicator(grid, args[0], args[1]),
            "loghalf" => fdlab_core::profiles::log_half_profile(grid, args[0], 0.0),
            "constant" => {
                let exterior = Field::default_exterior(&grid);
                let n = grid.node_count();
                Field::new(grid, vec![args[0]; n], exterior)
            }
            _ => unreachable!("validated at parse"),
        };
        field.map_err(|e| ConfigError(e.to_string()))
    }

    pub fn solver_options(&self) -> Result<SolverOptions> {
        let tol = match self.get("solver.tol") {
            "auto" => None,
            v => Some(v.parse::<f64>().unwrap()),
        };
        Ok(SolverOptions {
            tol,
            max_iter: self.usize_of("solver.max_iter")?,
            dense_limit: self.usize_of("solver.dense_limit")?,
            ..SolverOptions::default()
        })
    }

    pub fn thresholds(&self) -> Result<ClassifyThresholds> {
        Ok(ClassifyThresholds {
            theta: self.f64_of("sweep.theta")?,
            sigma: self.f64_of("sweep.sigma")?,
            stabilization: self.f64_of("sweep.stabilization")?,
        })
    }

    pub fn ball(&self, grid: &UniformGrid) -> Result<BallSpec> {
        BallSpec::centered(grid, self.f64_of("sweep.ball_radius")?)
            .map_err(|e| ConfigError(e.to_string()))
    }

    pub fn parabolic_problem(&self) -> Result<ParabolicProblem> {
        let grid = self.grid()?;
        Ok(ParabolicProblem {
            op_spec: self.op_spec()?,
            nl: self.nonlinearity()?,
            eps: self.f64_of("model.epsilon")?,
            initial: self.initial_field(grid.clone())?,
            t_end: self.f64_of("time.t_end")?,
            dt: self.f64_of("time.dt")?,
            ball: self.ball(&grid)?,
            solver: self.solver_options()?,
        })
    }

    pub fn eps_list(&self) -> Vec<f64> {
        self.list_of("sweep.eps_list").unwrap()
    }

    pub fn snapshot_times(&self) -> Vec<f64> {
        self.list_of("output.snapshot_times").unwrap()
    }

    pub fn tau(&self) -> f64 {
        self.f64_of("sweep.tau").unwrap()
    }

    pub fn s_values(&self) -> Vec<f64> {
        self.list_of("phase.s_values").unwrap()
    }

    pub fn n_values(&self) -> Vec<f64> {
        self.list_of("phase.n_values").unwrap()
    }

    pub fn exclusion_margin(&self) -> f64 {
        self.f64_of("phase.exclusion_margin").unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_parse_and_round_trip() {
        let cfg = RunConfig::default_config();
        let text = cfg.serialize();
        let again = parse_config(&text).unwrap();
        assert_eq!(cfg, again);
        assert_eq!(again.serialize(), text);
    }

    #[test]
    fn normalization_is_idempotent() {
        let text = "[operator]\ns = 0.30\n[model]\nnonlinearity = power:1.5\n";
        let once = parse_config(text).unwrap().serialize();
        let twice = parse_config(&once).unwrap().serialize();
        assert_eq!(once, twice);
    }

    #[test]
    fn power_grammar() {
        let cfg = parse_config("[model]\nnonlinearity = power:1.5\n").unwrap();
        match cfg.nonlinearity().unwrap() {
            Nonlinearity::Power { n } => assert_eq!(n, 1.5),
            other => panic!("unexpected {other:?}"),
        }
        let cfg = parse_config("[model]\nnonlinearity = log\n").unwrap();
        assert!(matches!(cfg.nonlinearity().unwrap(), Nonlinearity::Logarithmic));
    }

    #[test]
    fn s_out_of_range_is_an_error() {
        let err = parse_config("[operator]\ns = 1.2\n").unwrap_err();
        assert!(err.0.contains("s must lie in (0,1)"), "{}", err.0);
    }

    #[test]
    fn unknown_key_names_nearest() {
        let err = parse_config("[operator]\nss = 0.5\n").unwrap_err();
        assert!(err.0.contains("unknown key"), "{}", err.0);
        assert!(err.0.contains("operator.s"), "{}", err.0);
    }

    #[test]
    fn comments_and_blanks_ignored() {
        let cfg = parse_config("# hello\n\n[grid]\nhalf_width = 8 # trailing\n").unwrap();
        assert_eq!(cfg.get("grid.half_width"), "8");
    }

    #[test]
    fn syntax_error_carries_line_number() {
        let err = parse_config("[grid]\nhalf_width 8\n").unwrap_err();
        assert!(err.0.contains("line 2"), "{}", err.0);
    }
}
