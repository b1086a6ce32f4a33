//! Declarative run description.
//!
//! A scenario is a flat `key = value` document with dotted keys, one entry per
//! line, `#` starting a comment. Every quantity is dimensionless: frequencies
//! and couplings in units of `ω₀`, `α` in units of `1/ω₀`, means in units of
//! `X₀` and `P₀`, and time as `τ = ω₀t`. Numbers may be written as `pi` or
//! `<number>*pi`.
//!
//! ```text
//! case = B
//! method = discrete
//! method = continuum
//! ensemble.kind = binomial
//! ensemble.n_atoms = 100
//! ensemble.delta_omega = 0.0024
//! initial.mean_p = 2
//! time_grid.tau_end = 60
//! time_grid.n_points = 601
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::continuum::QuadratureSpec;
use crate::ensemble::DEFAULT_MAX_ATOMS;
use crate::error::{Error, Result};
use crate::model::{CouplingKind, PhysicalParams};

/// Every key a scenario document may contain.
pub const KEYS: [&str; 18] = [
    "case",
    "method",
    "mass",
    "omega0",
    "coupling",
    "ensemble.kind",
    "ensemble.n_atoms",
    "ensemble.delta_omega",
    "ensemble.kappa",
    "ensemble.alpha",
    "initial.kind",
    "initial.mean_x",
    "initial.mean_p",
    "time_grid.tau_start",
    "time_grid.tau_end",
    "time_grid.n_points",
    "quadrature.abs_tol",
    "quadrature.rel_tol",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Case {
    /// Linear coupling: breathing of the variances.
    A,
    /// Quadratic coupling, Gaussian coupling spread: Gaussian decay.
    B,
    /// Quadratic coupling, truncated-exponential spread: power-law decay.
    C,
}

impl Case {
    pub fn coupling(self) -> CouplingKind {
        match self {
            Case::A => CouplingKind::Position,
            Case::B | Case::C => CouplingKind::PositionSquared,
        }
    }
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Case::A => "A",
            Case::B => "B",
            Case::C => "C",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Discrete,
    Continuum,
    Approx,
    ClosedForm,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Discrete, Method::Continuum, Method::Approx, Method::ClosedForm];

    pub fn name(self) -> &'static str {
        match self {
            Method::Discrete => "discrete",
            Method::Continuum => "continuum",
            Method::Approx => "approx",
            Method::ClosedForm => "closed_form",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::schema("method", format!("unknown method `{s}` (expected discrete, continuum, approx or closed_form)")))
    }
}

/// Coupling distribution, in units of `ω₀` (`alpha` in units of `1/ω₀`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EnsembleSpec {
    Binomial { n_atoms: usize, delta_omega: f64 },
    Gaussian { kappa: f64 },
    TruncatedExponential { n_atoms: usize, delta_omega: f64, alpha: f64 },
    ExponentialDensity { alpha: f64 },
}

impl EnsembleSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            EnsembleSpec::Binomial { .. } => "binomial",
            EnsembleSpec::Gaussian { .. } => "gaussian",
            EnsembleSpec::TruncatedExponential { .. } => "truncated_exponential",
            EnsembleSpec::ExponentialDensity { .. } => "exponential_density",
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, EnsembleSpec::Binomial { .. } | EnsembleSpec::TruncatedExponential { .. })
    }

    /// Coupling spread `κ/ω₀` of the Gaussian limit, where one exists.
    pub fn kappa(&self) -> Option<f64> {
        match *self {
            EnsembleSpec::Binomial { n_atoms, delta_omega } => Some(delta_omega * (n_atoms as f64).sqrt()),
            EnsembleSpec::Gaussian { kappa } => Some(kappa),
            _ => None,
        }
    }

    fn keys(kind: &str) -> &'static [&'static str] {
        match kind {
            "binomial" => &["ensemble.n_atoms", "ensemble.delta_omega"],
            "gaussian" => &["ensemble.kappa"],
            "truncated_exponential" => &["ensemble.n_atoms", "ensemble.delta_omega", "ensemble.alpha"],
            "exponential_density" => &["ensemble.alpha"],
            _ => &[],
        }
    }
}

/// Initial state, means in units of `X₀` and `P₀`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScenarioInitial {
    Coherent { mean_x: f64, mean_p: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub tau_start: f64,
    pub tau_end: f64,
    pub n_points: usize,
}

impl TimeGrid {
    /// Evenly spaced grid including both end points exactly.
    pub fn taus(&self) -> Vec<f64> {
        let last = self.n_points - 1;
        let span = self.tau_end - self.tau_start;
        (0..self.n_points)
            .map(|k| if k == last { self.tau_end } else { self.tau_start + span * k as f64 / last as f64 })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub case: Case,
    pub methods: Vec<Method>,
    pub params: PhysicalParams,
    pub coupling: CouplingKind,
    pub ensemble: EnsembleSpec,
    pub initial: ScenarioInitial,
    pub time_grid: TimeGrid,
    pub quadrature: QuadratureSpec,
}

struct Document<'a> {
    values: BTreeMap<&'a str, &'a str>,
    methods: Vec<&'a str>,
}

impl<'a> Document<'a> {
    fn parse(text: &'a str) -> Result<Self> {
        let mut values = BTreeMap::new();
        let mut methods = Vec::new();
        for (index, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::schema(format!("line {}", index + 1), "expected `key = value`"));
            };
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                return Err(Error::schema(key, "unknown key"));
            }
            if value.is_empty() {
                return Err(Error::schema(key, "empty value"));
            }
            if key == "method" {
                methods.push(value);
            } else if values.insert(key, value).is_some() {
                return Err(Error::schema(key, "duplicate key"));
            }
        }
        Ok(Self { values, methods })
    }

    fn get(&self, key: &str) -> Option<&'a str> {
        self.values.get(key).copied()
    }

    fn require(&self, key: &'static str, context: &str) -> Result<&'a str> {
        self.get(key).ok_or_else(|| {
            let reason = if context.is_empty() { "required".to_string() } else { format!("required {context}") };
            Error::schema(key, reason)
        })
    }

    fn number(&self, key: &'static str) -> Result<Option<f64>> {
        self.get(key).map(|v| parse_number(key, v)).transpose()
    }

    fn required_number(&self, key: &'static str, context: &str) -> Result<f64> {
        parse_number(key, self.require(key, context)?)
    }
}

fn parse_number(key: &str, value: &str) -> Result<f64> {
    let parsed = match value.strip_suffix("pi") {
        Some("") => Ok(std::f64::consts::PI),
        Some(prefix) => prefix
            .trim()
            .strip_suffix('*')
            .ok_or(())
            .and_then(|p| p.trim().parse::<f64>().map_err(|_| ()))
            .map(|p| p * std::f64::consts::PI),
        None => value.parse::<f64>().map_err(|_| ()),
    };
    match parsed {
        Ok(v) if v.is_finite() => Ok(v),
        Ok(_) => Err(Error::schema(key, format!("`{value}` is not finite"))),
        Err(()) => Err(Error::schema(key, format!("`{value}` is not a number"))),
    }
}

fn parse_count(key: &'static str, value: &str) -> Result<usize> {
    value
        .parse::<usize>()
        .map_err(|_| Error::schema(key, format!("`{value}` is not a non-negative integer")))
}

fn positive(key: &'static str, v: f64) -> Result<f64> {
    if v > 0.0 {
        Ok(v)
    } else {
        Err(Error::schema(key, format!("must be positive, got {v}")))
    }
}

/// Parses and validates a scenario document, filling defaults.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let doc = Document::parse(text)?;

    let case = match doc.require("case", "")? {
        "A" | "a" => Case::A,
        "B" | "b" => Case::B,
        "C" | "c" => Case::C,
        other => return Err(Error::schema("case", format!("`{other}` is not one of A, B, C"))),
    };

    let mass = positive("mass", doc.number("mass")?.unwrap_or(1.0))?;
    let omega0 = positive("omega0", doc.number("omega0")?.unwrap_or(1.0))?;
    let params = PhysicalParams::new(mass, omega0)?;

    let coupling = match doc.get("coupling") {
        None => case.coupling(),
        Some(v) => {
            let kind = match v {
                "position" => CouplingKind::Position,
                "position_squared" => CouplingKind::PositionSquared,
                other => {
                    return Err(Error::schema("coupling", format!("`{other}` is not one of position, position_squared")))
                }
            };
            if kind != case.coupling() {
                return Err(Error::schema("coupling", format!("case {case} requires {}", coupling_name(case.coupling()))));
            }
            kind
        }
    };

    let ensemble = parse_ensemble(&doc)?;
    let allowed: &[&str] = match case {
        Case::A | Case::B => &["binomial", "gaussian"],
        Case::C => &["truncated_exponential", "exponential_density"],
    };
    if !allowed.contains(&ensemble.kind()) {
        return Err(Error::schema(
            "ensemble.kind",
            format!("`{}` is not available in case {case} (expected {})", ensemble.kind(), allowed.join(" or ")),
        ));
    }

    let initial = match doc.get("initial.kind").unwrap_or("coherent") {
        "coherent" => ScenarioInitial::Coherent {
            mean_x: doc.number("initial.mean_x")?.unwrap_or(0.0),
            mean_p: doc.number("initial.mean_p")?.unwrap_or(0.0),
        },
        other => return Err(Error::schema("initial.kind", format!("`{other}` is not supported (expected coherent)"))),
    };

    let tau_start = doc.number("time_grid.tau_start")?.unwrap_or(0.0);
    if tau_start < 0.0 {
        return Err(Error::schema("time_grid.tau_start", format!("must be non-negative, got {tau_start}")));
    }
    let tau_end = doc.required_number("time_grid.tau_end", "")?;
    if tau_end <= tau_start {
        return Err(Error::schema(
            "time_grid.tau_end",
            format!("must be greater than tau_start ({tau_end} <= {tau_start})"),
        ));
    }
    let n_points = parse_count("time_grid.n_points", doc.require("time_grid.n_points", "")?)?;
    if n_points < 2 {
        return Err(Error::schema("time_grid.n_points", format!("need at least 2 points, got {n_points}")));
    }

    let defaults = QuadratureSpec::default();
    let quadrature = QuadratureSpec {
        abs_tol: positive("quadrature.abs_tol", doc.number("quadrature.abs_tol")?.unwrap_or(defaults.abs_tol))?,
        rel_tol: positive("quadrature.rel_tol", doc.number("quadrature.rel_tol")?.unwrap_or(defaults.rel_tol))?,
        ..defaults
    };

    let mut scenario = Scenario {
        case,
        methods: Vec::new(),
        params,
        coupling,
        ensemble,
        initial,
        time_grid: TimeGrid { tau_start, tau_end, n_points },
        quadrature,
    };

    let methods = if doc.methods.is_empty() {
        scenario.default_methods()
    } else {
        doc.methods.iter().map(|m| m.parse()).collect::<Result<Vec<Method>>>()?
    };
    scenario.set_methods(methods)?;
    Ok(scenario)
}

fn parse_ensemble(doc: &Document<'_>) -> Result<EnsembleSpec> {
    let kind = doc.require("ensemble.kind", "")?;
    let expected = EnsembleSpec::keys(kind);
    if expected.is_empty() {
        return Err(Error::schema(
            "ensemble.kind",
            format!("`{kind}` is not one of binomial, gaussian, truncated_exponential, exponential_density"),
        ));
    }
    for key in ["ensemble.n_atoms", "ensemble.delta_omega", "ensemble.kappa", "ensemble.alpha"] {
        if doc.get(key).is_some() && !expected.contains(&key) {
            return Err(Error::schema(key, format!("does not apply to ensemble.kind = {kind}")));
        }
    }
    let context = format!("for ensemble.kind = {kind}");
    let n_atoms = || -> Result<usize> {
        let n = parse_count("ensemble.n_atoms", doc.require("ensemble.n_atoms", &context)?)?;
        if n < 1 {
            return Err(Error::schema("ensemble.n_atoms", "must be at least 1"));
        }
        if n > DEFAULT_MAX_ATOMS {
            return Err(Error::schema("ensemble.n_atoms", format!("{n} exceeds the limit of {DEFAULT_MAX_ATOMS}")));
        }
        Ok(n)
    };
    let number = |key: &'static str| positive(key, doc.required_number(key, &context)?);
    Ok(match kind {
        "binomial" => EnsembleSpec::Binomial { n_atoms: n_atoms()?, delta_omega: number("ensemble.delta_omega")? },
        "gaussian" => EnsembleSpec::Gaussian { kappa: number("ensemble.kappa")? },
        "truncated_exponential" => EnsembleSpec::TruncatedExponential {
            n_atoms: n_atoms()?,
            delta_omega: number("ensemble.delta_omega")?,
            alpha: number("ensemble.alpha")?,
        },
        _ => EnsembleSpec::ExponentialDensity { alpha: number("ensemble.alpha")? },
    })
}

/// Shortest text that parses back to the same value, in exponent form for
/// very small or large magnitudes.
fn fmt_number(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) {
        v.to_string()
    } else {
        format!("{v:e}")
    }
}

fn coupling_name(kind: CouplingKind) -> &'static str {
    match kind {
        CouplingKind::Position => "position",
        CouplingKind::PositionSquared => "position_squared",
    }
}

impl Scenario {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_owned(), source })?;
        parse_scenario(&text)
    }

    /// Methods compatible with the case and ensemble, used when the document
    /// names none.
    pub fn default_methods(&self) -> Vec<Method> {
        Method::ALL.into_iter().filter(|&m| self.check_method(m).is_ok()).collect()
    }

    /// Checks that `method` can run with this case, ensemble and initial state.
    pub fn check_method(&self, method: Method) -> Result<()> {
        let reject = |reason: &str| Err(Error::IncompatibleMethod { method: method.name().into(), reason: reason.into() });
        match (method, self.case) {
            (Method::Discrete, _) if !self.ensemble.is_finite() => {
                reject("discrete requires a finite-N ensemble (binomial or truncated_exponential)")
            }
            (Method::Discrete, _) => Ok(()),
            (Method::Continuum | Method::Approx, Case::B) => Ok(()),
            (Method::Continuum | Method::Approx, Case::A) => {
                reject("linear coupling has an exact finite-N result; use discrete or closed_form")
            }
            (Method::Continuum | Method::Approx, Case::C) => {
                reject("only the Gaussian coupling density is integrated; use closed_form or discrete")
            }
            (Method::ClosedForm, Case::A) => Ok(()),
            (Method::ClosedForm, Case::B) => reject("Gaussian decoherence has no closed form; use continuum or approx"),
            (Method::ClosedForm, Case::C) => {
                let ScenarioInitial::Coherent { mean_x, .. } = self.initial;
                if mean_x != 0.0 {
                    reject("the power-law form requires initial.mean_x = 0")
                } else {
                    Ok(())
                }
            }
        }
    }

    /// Replaces the method list after checking each entry.
    pub fn set_methods(&mut self, methods: Vec<Method>) -> Result<()> {
        if methods.is_empty() {
            return Err(Error::schema("method", "no method is applicable to this scenario"));
        }
        for (i, m) in methods.iter().enumerate() {
            if methods[..i].contains(m) {
                return Err(Error::schema("method", format!("`{m}` listed twice")));
            }
            self.check_method(*m)?;
        }
        self.methods = methods;
        Ok(())
    }

    /// Canonical document that parses back to an equal scenario.
    pub fn to_document(&self) -> String {
        self.entries().into_iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    /// Canonical `(key, value)` pairs in document order.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let mut out = vec![("case", self.case.to_string())];
        out.extend(self.methods.iter().map(|m| ("method", m.name().to_string())));
        out.push(("mass", fmt_number(self.params.mass())));
        out.push(("omega0", fmt_number(self.params.omega0())));
        out.push(("coupling", coupling_name(self.coupling).to_string()));
        out.push(("ensemble.kind", self.ensemble.kind().to_string()));
        match self.ensemble {
            EnsembleSpec::Binomial { n_atoms, delta_omega } => {
                out.push(("ensemble.n_atoms", n_atoms.to_string()));
                out.push(("ensemble.delta_omega", fmt_number(delta_omega)));
            }
            EnsembleSpec::Gaussian { kappa } => out.push(("ensemble.kappa", fmt_number(kappa))),
            EnsembleSpec::TruncatedExponential { n_atoms, delta_omega, alpha } => {
                out.push(("ensemble.n_atoms", n_atoms.to_string()));
                out.push(("ensemble.delta_omega", fmt_number(delta_omega)));
                out.push(("ensemble.alpha", fmt_number(alpha)));
            }
            EnsembleSpec::ExponentialDensity { alpha } => out.push(("ensemble.alpha", fmt_number(alpha))),
        }
        let ScenarioInitial::Coherent { mean_x, mean_p } = self.initial;
        out.push(("initial.kind", "coherent".to_string()));
        out.push(("initial.mean_x", fmt_number(mean_x)));
        out.push(("initial.mean_p", fmt_number(mean_p)));
        out.push(("time_grid.tau_start", fmt_number(self.time_grid.tau_start)));
        out.push(("time_grid.tau_end", fmt_number(self.time_grid.tau_end)));
        out.push(("time_grid.n_points", self.time_grid.n_points.to_string()));
        out.push(("quadrature.abs_tol", fmt_number(self.quadrature.abs_tol)));
        out.push(("quadrature.rel_tol", fmt_number(self.quadrature.rel_tol)));
        out
    }
}
