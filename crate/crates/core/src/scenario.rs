//! Scenario files: one `key = value` pair per line.
//!
//! Lines starting with `#` and blank lines are ignored. Several scenarios may
//! share a file, separated by a line consisting of `---`. Required keys are
//! `phi`, `p` and `q`; `u` defaults to `1` and `name` to `scenario`. All
//! other keys override numerical defaults and are listed in [`Overrides`].

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimators::{AnalysisConfig, RingSchedule};
use crate::funcspace::{parse_expression, DiscFunction, Exponent, SelfMap};

const DEFAULT_RING_START: u32 = 3;
const DEFAULT_RING_DEPTH: u32 = 14;

trait Value: Sized {
    fn parse(s: &str) -> std::result::Result<Self, String>;
    fn render(&self) -> String;
}

macro_rules! scalar_value {
    ($($t:ty),*) => {$(
        impl Value for $t {
            fn parse(s: &str) -> std::result::Result<Self, String> {
                s.parse::<$t>().map_err(|_| format!("cannot parse {s:?} as {}", stringify!($t)))
            }
            fn render(&self) -> String {
                self.to_string()
            }
        }
    )*};
}

scalar_value!(usize, u32);

impl Value for f64 {
    fn parse(s: &str) -> std::result::Result<Self, String> {
        match s.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(format!("cannot parse {s:?} as a finite number")),
        }
    }
    fn render(&self) -> String {
        self.to_string()
    }
}

impl<T: Value> Value for Vec<T> {
    fn parse(s: &str) -> std::result::Result<Self, String> {
        s.split(',').map(|item| T::parse(item.trim())).collect()
    }
    fn render(&self) -> String {
        self.iter().map(Value::render).collect::<Vec<_>>().join(", ")
    }
}

macro_rules! overrides {
    ($($(#[doc = $doc:literal])* $field:ident : $ty:ty),* $(,)?) => {
        /// Per-scenario replacements for [`AnalysisConfig`] defaults. The
        /// scenario key is the field name.
        #[derive(Debug, Clone, Default, PartialEq, Serialize)]
        pub struct Overrides {
            $(
                $(#[doc = $doc])*
                #[serde(skip_serializing_if = "Option::is_none")]
                pub $field: Option<$ty>,
            )*
        }

        impl Overrides {
            pub const KEYS: &'static [&'static str] = &[$(stringify!($field)),*];

            fn set(&mut self, key: &str, value: &str) -> Option<std::result::Result<(), String>> {
                match key {
                    $(stringify!($field) => Some(<$ty as Value>::parse(value).map(|v| self.$field = Some(v))),)*
                    _ => None,
                }
            }

            fn write(&self, out: &mut String) {
                $(
                    if let Some(v) = &self.$field {
                        out.push_str(&format!("{} = {}\n", stringify!($field), v.render()));
                    }
                )*
            }
        }
    };
}

overrides! {
    /// Base boundary grid for quadrature and for the Carleson pullback.
    grid: usize,
    max_grid: usize,
    rel_tol: f64,
    /// First ring `1 - 2^{-k}` of the kernel sweep.
    ring_start: u32,
    /// Last ring `1 - 2^{-k}` of the kernel sweep.
    depth: u32,
    angles: usize,
    disk_depth: f64,
    disk_step: f64,
    disk_angles: usize,
    eps_start: u32,
    eps_depth: u32,
    eps_tol: f64,
    carleson_grid: usize,
    carleson_depth: u32,
    /// Stolz and Carleson window aperture.
    alpha: f64,
    degree: usize,
    n_schedule: Vec<usize>,
    threshold: f64,
    powers: Vec<u32>,
}

impl Overrides {
    /// Defaults with these overrides applied; not validated.
    pub fn config(&self) -> AnalysisConfig {
        let mut cfg = AnalysisConfig::default();
        if let Some(g) = self.grid {
            cfg.quadrature = cfg.quadrature.with_base(g);
            cfg.carleson.grid = g;
        }
        if let Some(m) = self.max_grid {
            cfg.quadrature.max_grid = m;
        }
        if let Some(t) = self.rel_tol {
            cfg.quadrature.rel_tol = t;
        }
        if self.ring_start.is_some() || self.depth.is_some() || self.angles.is_some() {
            let start = self.ring_start.unwrap_or(DEFAULT_RING_START);
            let depth = self.depth.unwrap_or(DEFAULT_RING_DEPTH);
            cfg.rings = RingSchedule {
                radii: (start..=depth).map(|k| 1.0 - 0.5f64.powi(k as i32)).collect(),
                angles: self.angles.unwrap_or(cfg.rings.angles),
            };
        }
        if let Some(d) = self.disk_depth {
            cfg.disk.max_depth = d;
        }
        if let Some(s) = self.disk_step {
            cfg.disk.radial_step = s;
        }
        if let Some(a) = self.disk_angles {
            cfg.disk.angles = a;
        }
        if let Some(k) = self.eps_start {
            cfg.eps.k_min = k;
        }
        if let Some(k) = self.eps_depth {
            cfg.eps.k_max = k;
        }
        if let Some(t) = self.eps_tol {
            cfg.eps.rel_tol = t;
        }
        if let Some(g) = self.carleson_grid {
            cfg.carleson.grid = g;
        }
        if let Some(d) = self.carleson_depth {
            cfg.carleson.depth = d;
        }
        if let Some(a) = self.alpha {
            cfg.carleson.aperture = a;
        }
        if let Some(k) = self.degree {
            cfg.truncation_degree = k;
        }
        if let Some(n) = &self.n_schedule {
            cfg.n_schedule = n.clone();
        }
        if let Some(t) = self.threshold {
            cfg.compact_threshold = t;
        }
        if let Some(p) = &self.powers {
            cfg.power_list = p.clone();
        }
        cfg
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub u: DiscFunction,
    pub phi: SelfMap,
    pub p: Exponent,
    pub q: Exponent,
    pub overrides: Overrides,
}

impl Scenario {
    pub fn new(name: impl Into<String>, u: DiscFunction, phi: SelfMap, p: Exponent, q: Exponent) -> Self {
        Scenario {
            name: name.into(),
            u,
            phi,
            p,
            q,
            overrides: Overrides::default(),
        }
    }

    pub fn config(&self) -> Result<AnalysisConfig> {
        let cfg = self.overrides.config();
        cfg.validate()
            .map_err(|e| Error::Validation(format!("scenario {:?}: {e}", self.name)))?;
        Ok(cfg)
    }

    /// Renders the scenario in the file grammar; [`parse_scenario`] inverts it.
    pub fn serialize(&self) -> String {
        let mut out = format!(
            "name = {}\nu = {}\nphi = {}\np = {}\nq = {}\n",
            self.name,
            self.u,
            self.phi.map(),
            self.p,
            self.q
        );
        self.overrides.write(&mut out);
        out
    }
}

fn parse_error(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

fn leading_ws(s: &str) -> usize {
    s.chars().take_while(|c| c.is_whitespace()).count()
}

/// Parses a single scenario.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let mut all = parse_scenarios(text)?;
    match all.len() {
        1 => Ok(all.remove(0)),
        n => Err(Error::Validation(format!("expected one scenario, found {n}"))),
    }
}

/// Parses every `---`-separated scenario in `text`. Line numbers in errors
/// refer to the whole text.
pub fn parse_scenarios(text: &str) -> Result<Vec<Scenario>> {
    let mut out = Vec::new();
    let mut block: Vec<(usize, &str)> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim() == "---" {
            out.push(parse_block(&block)?);
            block.clear();
        } else {
            block.push((i + 1, line));
        }
    }
    out.push(parse_block(&block)?);
    Ok(out)
}

fn parse_block(lines: &[(usize, &str)]) -> Result<Scenario> {
    let mut seen = BTreeSet::new();
    let mut name = None;
    let mut u = None;
    let mut phi = None;
    let mut p = None;
    let mut q = None;
    let mut overrides = Overrides::default();

    for &(line_no, raw) in lines {
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let key_col = leading_ws(raw) + 1;
        let Some(eq) = raw.find('=') else {
            return Err(parse_error(line_no, key_col, "expected `key = value`"));
        };
        let key = raw[..eq].trim();
        if key.is_empty() {
            return Err(parse_error(line_no, key_col, "missing key before `=`"));
        }
        let after = &raw[eq + 1..];
        let value = after.trim();
        let value_col = raw[..eq].chars().count() + 2 + leading_ws(after);
        if value.is_empty() {
            return Err(parse_error(line_no, value_col, format!("missing value for `{key}`")));
        }
        if !seen.insert(key.to_string()) {
            return Err(parse_error(line_no, key_col, format!("duplicate key `{key}`")));
        }
        let expression = |v: &str| -> Result<DiscFunction> {
            match parse_expression(v) {
                Ok(Ok(f)) => Ok(f),
                Ok(Err(e)) => Err(parse_error(line_no, value_col + e.offset, e.message)),
                Err(e) => Err(Error::Validation(format!("line {line_no}: {e}"))),
            }
        };
        let exponent = |v: &str| -> Result<Exponent> {
            v.parse::<Exponent>()
                .map_err(|e| parse_error(line_no, value_col, e.to_string()))
        };
        match key {
            "name" => name = Some(value.to_string()),
            "u" => u = Some(expression(value)?),
            "phi" => {
                let f = expression(value)?;
                let map = SelfMap::new(f)
                    .map_err(|e| Error::Validation(format!("line {line_no}: phi is not a self-map: {e}")))?;
                phi = Some(map);
            }
            "p" => p = Some(exponent(value)?),
            "q" => q = Some(exponent(value)?),
            _ => match overrides.set(key, value) {
                Some(Ok(())) => {}
                Some(Err(msg)) => return Err(parse_error(line_no, value_col, msg)),
                None => return Err(parse_error(line_no, key_col, format!("unknown key `{key}`"))),
            },
        }
    }

    let missing = |k: &str| {
        let line = lines.last().map_or(1, |l| l.0);
        Error::Validation(format!("scenario ending at line {line} is missing required key `{k}`"))
    };
    let scenario = Scenario {
        name: name.unwrap_or_else(|| "scenario".to_string()),
        u: u.unwrap_or_else(|| DiscFunction::constant(1.0)),
        phi: phi.ok_or_else(|| missing("phi"))?,
        p: p.ok_or_else(|| missing("p"))?,
        q: q.ok_or_else(|| missing("q"))?,
        overrides,
    };
    scenario.config()?;
    Ok(scenario)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_minimal_scenario() {
        let s = parse_scenario("phi = mul(0.5, z)\np = 2\nq = inf\n").unwrap();
        assert_eq!(s.phi.map(), &DiscFunction::identity().scale(0.5));
        assert_eq!(s.u, DiscFunction::constant(1.0));
        assert_eq!(s.p, Exponent::Finite(2.0));
        assert_eq!(s.q, Exponent::Infinity);
        assert_eq!(s.name, "scenario");
    }

    #[test]
    fn rejects_non_self_map() {
        let e = parse_scenario("phi = add(1, z)\np = 2\nq = 2").unwrap_err();
        assert!(matches!(e, Error::Validation(_)), "{e:?}");
    }

    #[test]
    fn error_positions() {
        let cases = [
            ("phi = z\np = 2\nq = 2\nspeed = 3", 4, 1),
            ("phi = z\n  p = 2\nq = 2\n  p = 3", 4, 3),
            ("phi = mul(0.5, w)\np = 2\nq = 2", 1, 16),
            ("phi = z\np = 0.5\nq = 2", 2, 5),
            ("phi = z\np 2\nq = 2", 2, 1),
            ("phi = z\np = 2\nq = 2\ngrid = many", 4, 8),
        ];
        for (text, line, column) in cases {
            match parse_scenario(text) {
                Err(Error::Parse { line: l, column: c, .. }) => {
                    assert_eq!((l, c), (line, column), "{text:?}")
                }
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn missing_and_invalid() {
        assert!(matches!(parse_scenario("phi = z\np = 2"), Err(Error::Validation(_))));
        assert!(matches!(
            parse_scenario("phi = z\np = 2\nq = 2\ngrid = 1000"),
            Err(Error::Validation(_))
        ));
        assert!(matches!(
            parse_scenario("phi = z\np = 2\nq = 2\nu = blaschke(2)"),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn overrides_reach_config() {
        let s = parse_scenario(
            "# compact\nname = half\nphi = mul(0.5, z)\np = 2\nq = 2\ngrid = 4096\ndepth = 10\nalpha = 0.6\nn_schedule = 8, 16\n",
        )
        .unwrap();
        let cfg = s.config().unwrap();
        assert_eq!(cfg.quadrature.base_grid, 4096);
        assert_eq!(cfg.carleson.grid, 4096);
        assert_eq!(cfg.rings.radii.len(), 8);
        assert_eq!(*cfg.rings.radii.last().unwrap(), 1.0 - 2f64.powi(-10));
        assert_eq!(cfg.carleson.aperture, 0.6);
        assert_eq!(cfg.n_schedule, vec![8, 16]);
    }

    #[test]
    fn multiple_documents() {
        let all = parse_scenarios("phi = z\np = 2\nq = 2\n---\nphi = pow(z, 2)\np = 1\nq = 1\n").unwrap();
        assert_eq!(all.len(), 2);
        assert_eq!(all[1].phi.map(), &DiscFunction::Monomial(2));
        match parse_scenarios("phi = z\np = 2\nq = 2\n---\nphi = z\nbogus = 1\np = 1\nq = 1") {
            Err(Error::Parse { line: 6, .. }) => {}
            other => panic!("{other:?}"),
        }
        assert!(parse_scenario("phi = z\np = 2\nq = 2\n---\nphi = z\np = 2\nq = 2").is_err());
    }

    fn arb_exponent() -> impl Strategy<Value = Exponent> {
        prop_oneof![
            Just(Exponent::Infinity),
            (1.0..8.0f64).prop_map(Exponent::Finite),
            (1u32..6).prop_map(|n| Exponent::Finite(n as f64)),
        ]
    }

    fn arb_map() -> impl Strategy<Value = DiscFunction> {
        prop_oneof![
            Just(DiscFunction::identity()),
            (1u32..5).prop_map(DiscFunction::Monomial),
            (0.05..0.95f64).prop_map(|s| DiscFunction::identity().scale(s)),
            prop::collection::vec((0.0..0.9f64, 0.0..std::f64::consts::TAU), 1..3).prop_map(|z| {
                DiscFunction::blaschke(
                    z.into_iter().map(|(r, t)| num_complex::Complex64::from_polar(r, t)).collect(),
                )
                .unwrap()
            }),
        ]
    }

    fn arb_overrides() -> impl Strategy<Value = Overrides> {
        (
            prop::option::of(prop::sample::select(vec![4096usize, 8192, 16384])),
            prop::option::of(10u32..16),
            prop::option::of(0.1..0.9f64),
            prop::option::of(prop::collection::vec(1usize..200, 1..4)),
            prop::option::of(0.01..0.5f64),
        )
            .prop_map(|(grid, depth, alpha, n_schedule, threshold)| Overrides {
                grid,
                depth,
                alpha,
                n_schedule,
                threshold,
                ..Overrides::default()
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn serialize_round_trips(
            name in "[a-z][a-z0-9_-]{0,12}",
            weight in prop::collection::vec(-3.0..3.0f64, 1..4),
            map in arb_map(),
            p in arb_exponent(),
            q in arb_exponent(),
            overrides in arb_overrides(),
        ) {
            let s = Scenario {
                name,
                u: DiscFunction::real_polynomial(&weight),
                phi: SelfMap::new(map).unwrap(),
                p,
                q,
                overrides,
            };
            let back = parse_scenario(&s.serialize()).unwrap();
            prop_assert_eq!(back, s);
        }
    }
}
