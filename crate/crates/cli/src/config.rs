//! JSON run configurations.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{anyhow, bail, Context};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use supint_core::coords::{chart_transform, Chart, PhaseState};
use supint_core::dynamics::{Direction, InitialSet, IntegrateOptions, Scheme, SectionDef};
use supint_core::potentials::{make_potential, Potential};
use supint_core::sampling::{random_state, DEFAULT_MARGIN};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Stem of every output file.
    pub name: String,
    pub system: SystemSpec,
    /// Integration chart tag; defaults to the first Cartesian chart of the potential.
    #[serde(default)]
    pub chart: Option<String>,
    /// `verlet`, `yoshida4`, `midpoint` or `midpoint4`.
    #[serde(default)]
    pub scheme: Option<String>,
    #[serde(default)]
    pub initial: Vec<InitialSpec>,
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default)]
    pub t_end: Option<f64>,
    /// Keep every N-th step in trajectory output (default 1).
    #[serde(default)]
    pub record_every: Option<usize>,
    #[serde(default)]
    pub section: Option<SectionSpec>,
    #[serde(default)]
    pub isopotential: Option<IsoSpec>,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    pub id: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

/// One colored set of initial conditions: explicit states, seeded random
/// states, or both.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSpec {
    pub id: String,
    #[serde(default)]
    pub states: Vec<StateSpec>,
    #[serde(default)]
    pub random: Option<RandomSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSpec {
    /// Chart of `q` and `p`; defaults to the run chart.
    #[serde(default)]
    pub chart: Option<String>,
    pub q: Vec<f64>,
    pub p: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomSpec {
    pub count: usize,
    /// Minimum wall margin of sampled states.
    #[serde(default)]
    pub margin: Option<f64>,
    /// Jitter around this state instead of sampling the whole chart box.
    #[serde(default)]
    pub around: Option<StateSpec>,
    #[serde(default)]
    pub spread: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SectionSpec {
    /// Coordinate name in the run chart, e.g. `phi`.
    pub coord: String,
    pub value: f64,
    /// `+`, `-` or `both`; default `+`.
    #[serde(default)]
    pub direction: Option<String>,
    /// Recorded coordinate name; its conjugate momentum is recorded alongside.
    pub record: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsoSpec {
    /// Number of positive (and negative) levels of the potential.
    #[serde(default = "default_levels")]
    pub levels: usize,
    #[serde(default = "default_cols")]
    pub columns: usize,
    #[serde(default = "default_rows")]
    pub rows: usize,
}

fn default_levels() -> usize {
    6
}
fn default_cols() -> usize {
    360
}
fn default_rows() -> usize {
    180
}

impl Default for IsoSpec {
    fn default() -> Self {
        Self {
            levels: default_levels(),
            columns: default_cols(),
            rows: default_rows(),
        }
    }
}

/// A configuration error; reported with exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub anyhow::Error);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "invalid configuration: {:#}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn invalid(e: anyhow::Error) -> anyhow::Error {
    anyhow::Error::new(ConfigError(e))
}

impl RunConfig {
    pub fn from_json(text: &str) -> anyhow::Result<Self> {
        serde_json::from_str(text).map_err(|e| invalid(e.into()))
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_json(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn potential(&self) -> anyhow::Result<Potential> {
        make_potential(&self.system.id, &self.system.params).map_err(|e| invalid(e.into()))
    }

    pub fn chart(&self, pot: &Potential) -> anyhow::Result<Chart> {
        match &self.chart {
            Some(tag) => {
                let c: Chart = tag
                    .parse()
                    .map_err(|e: supint_core::Error| invalid(e.into()))?;
                if !pot.supports(c) {
                    return Err(invalid(anyhow!("{} is not defined on {c}", pot.id())));
                }
                Ok(c)
            }
            None => {
                let charts = pot.supported_charts();
                Ok(charts
                    .iter()
                    .copied()
                    .find(|c| {
                        matches!(
                            c,
                            Chart::CartesianLine(_) | Chart::Cartesian2 | Chart::Cartesian3
                        )
                    })
                    .unwrap_or(charts[0]))
            }
        }
    }

    pub fn scheme(&self, chart: Chart) -> anyhow::Result<Scheme> {
        match &self.scheme {
            Some(s) => s.parse().map_err(|e: supint_core::Error| invalid(e.into())),
            None => Ok(match chart {
                Chart::CartesianLine(_)
                | Chart::OrthogonalZ(_)
                | Chart::Cartesian2
                | Chart::Cartesian3 => Scheme::Yoshida4,
                _ => Scheme::Midpoint4,
            }),
        }
    }

    pub fn options(&self) -> anyhow::Result<IntegrateOptions> {
        let dt = self.dt.ok_or_else(|| invalid(anyhow!("dt is required")))?;
        let t_end = self
            .t_end
            .ok_or_else(|| invalid(anyhow!("t_end is required")))?;
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(invalid(anyhow!("dt must be positive, got {dt}")));
        }
        if !(t_end > 0.0 && t_end.is_finite()) {
            return Err(invalid(anyhow!("t_end must be positive, got {t_end}")));
        }
        if self.record_every == Some(0) {
            return Err(invalid(anyhow!("record_every must be at least 1")));
        }
        Ok(IntegrateOptions::new(dt, t_end).record_every(self.record_every.unwrap_or(1)))
    }

    pub fn section(&self, chart: Chart) -> anyhow::Result<SectionDef> {
        let spec = self
            .section
            .as_ref()
            .ok_or_else(|| invalid(anyhow!("a section is required")))?;
        let names = chart.coordinate_names();
        let index = |name: &str| {
            names.iter().position(|n| n == name).ok_or_else(|| {
                invalid(anyhow!("{name} is not a coordinate of {chart} ({names:?})"))
            })
        };
        let coord = index(&spec.coord)?;
        let record = index(&spec.record)?;
        let direction = match &spec.direction {
            Some(d) => d.parse::<Direction>().map_err(|e| invalid(e.into()))?,
            None => Direction::Positive,
        };
        let mut sec = SectionDef::new(coord, spec.value, record, record)
            .map_err(|e| invalid(e.into()))?
            .direction(direction);
        if chart.angular_indices().contains(&coord) {
            sec = sec.periodic();
        }
        Ok(sec)
    }

    /// Resolves every initial-condition set into states of `chart`.
    pub fn initial_sets(
        &self,
        chart: Chart,
        pot: &Potential,
        seed: u64,
    ) -> anyhow::Result<Vec<InitialSet>> {
        if self.initial.is_empty() {
            return Err(invalid(anyhow!("no initial conditions")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut ids = std::collections::BTreeSet::new();
        self.initial
            .iter()
            .map(|set| {
                if !ids.insert(set.id.as_str()) {
                    return Err(invalid(anyhow!("duplicate initial set id {}", set.id)));
                }
                let mut states = set
                    .states
                    .iter()
                    .map(|s| s.resolve(chart))
                    .collect::<anyhow::Result<Vec<_>>>()?;
                if let Some(r) = &set.random {
                    states.extend(r.draw(&mut rng, chart, pot)?);
                }
                if states.is_empty() {
                    return Err(invalid(anyhow!("initial set {} is empty", set.id)));
                }
                for s in &states {
                    let v = pot.value_at(chart, &s.q);
                    if !v.as_ref().is_ok_and(|v| v.is_finite()) {
                        return Err(invalid(anyhow!(
                            "initial state {:?} of set {} is singular",
                            s.q,
                            set.id
                        )));
                    }
                }
                Ok(InitialSet {
                    id: set.id.clone(),
                    states,
                })
            })
            .collect()
    }
}

impl StateSpec {
    fn resolve(&self, chart: Chart) -> anyhow::Result<PhaseState> {
        let own: Chart = match &self.chart {
            Some(tag) => tag
                .parse()
                .map_err(|e: supint_core::Error| invalid(e.into()))?,
            None => chart,
        };
        if self.q.len() != own.dim() || self.p.len() != own.dim() {
            return Err(invalid(anyhow!(
                "state needs {} coordinates and momenta in {own}",
                own.dim()
            )));
        }
        let s =
            PhaseState::new(own, self.q.clone(), self.p.clone()).map_err(|e| invalid(e.into()))?;
        chart_transform(&s, chart).map_err(|e| invalid(e.into()))
    }
}

impl RandomSpec {
    fn draw(
        &self,
        rng: &mut ChaCha8Rng,
        chart: Chart,
        pot: &Potential,
    ) -> anyhow::Result<Vec<PhaseState>> {
        if self.count == 0 {
            bail!(invalid(anyhow!("random count must be positive")));
        }
        let margin = self.margin.unwrap_or(DEFAULT_MARGIN);
        match &self.around {
            None => (0..self.count)
                .map(|_| random_state(rng, chart, Some(pot), margin).map_err(|e| invalid(e.into())))
                .collect(),
            Some(center) => {
                let c = center.resolve(chart)?;
                let spread = self.spread.unwrap_or(0.05);
                let mut out = Vec::with_capacity(self.count);
                let mut tries = 0;
                while out.len() < self.count {
                    tries += 1;
                    if tries > 10_000 * self.count {
                        return Err(invalid(anyhow!(
                            "no nonsingular state within spread {spread}"
                        )));
                    }
                    let mut jitter = |v: &Vec<f64>| -> Vec<f64> {
                        v.iter()
                            .map(|x| x + rng.gen_range(-spread..=spread))
                            .collect()
                    };
                    let s = PhaseState::new(chart, jitter(&c.q), jitter(&c.p))?;
                    if pot.wall_margin(chart, &s.q).is_ok_and(|m| m >= margin) {
                        out.push(s);
                    }
                }
                Ok(out)
            }
        }
    }
}

/// True when `e` was raised by configuration validation.
pub fn is_config_error(e: &anyhow::Error) -> bool {
    e.chain().any(|c| c.is::<ConfigError>())
}

#[cfg(test)]
mod tests {
    use super::*;

    const CALOGERO: &str = r#"{
        "name": "cal",
        "system": {"id": "calogero", "params": {"k": 1.0}},
        "initial": [{"id": "a", "states": [{"q": [1.0, 0.0, -1.0], "p": [0.0, 0.0, 0.0]}]}],
        "dt": 0.001,
        "t_end": 1.0
    }"#;

    #[test]
    fn defaults() {
        let c = RunConfig::from_json(CALOGERO).unwrap();
        let pot = c.potential().unwrap();
        let chart = c.chart(&pot).unwrap();
        assert_eq!(chart, Chart::CartesianLine(3));
        assert_eq!(c.scheme(chart).unwrap(), Scheme::Yoshida4);
        let sets = c.initial_sets(chart, &pot, 0).unwrap();
        assert_eq!(sets[0].states[0].q, vec![1.0, 0.0, -1.0]);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let bad = CALOGERO.replace("\"dt\"", "\"dtt\"");
        let e = RunConfig::from_json(&bad).unwrap_err();
        assert!(is_config_error(&e));
        let bad = CALOGERO.replace("\"params\"", "\"parms\"");
        assert!(RunConfig::from_json(&bad).is_err());
    }

    #[test]
    fn bad_values() {
        let c = RunConfig::from_json(&CALOGERO.replace("0.001", "0")).unwrap();
        assert!(is_config_error(&c.options().unwrap_err()));
        let c = RunConfig::from_json(&CALOGERO.replace("[1.0, 0.0, -1.0]", "[1.0, 1.0, -1.0]"))
            .unwrap();
        let pot = c.potential().unwrap();
        assert!(c.initial_sets(Chart::CartesianLine(3), &pot, 0).is_err());
        let c = RunConfig::from_json(&CALOGERO.replace("\"k\": 1.0", "\"kk\": 1.0")).unwrap();
        assert!(is_config_error(&c.potential().unwrap_err()));
    }

    #[test]
    fn section_names() {
        let mut c = RunConfig::from_json(CALOGERO).unwrap();
        c.section = Some(SectionSpec {
            coord: "phi".into(),
            value: 0.5,
            direction: None,
            record: "theta".into(),
        });
        let sec = c.section(Chart::Sphere2).unwrap();
        assert!(sec.periodic);
        assert_eq!((sec.coord, sec.record_q), (1, 0));
        c.section.as_mut().unwrap().record = "phi".into();
        assert!(c.section(Chart::Sphere2).is_err());
    }

    #[test]
    fn jittered_sets_are_seeded() {
        let text = CALOGERO.replace(
            r#""states": [{"q": [1.0, 0.0, -1.0], "p": [0.0, 0.0, 0.0]}]"#,
            r#""random": {"count": 3, "around": {"q": [1.0, 0.0, -1.0], "p": [0.0, 0.0, 0.0]}, "spread": 0.1}"#,
        );
        let c = RunConfig::from_json(&text).unwrap();
        let pot = c.potential().unwrap();
        let a = c.initial_sets(Chart::CartesianLine(3), &pot, 9).unwrap();
        let b = c.initial_sets(Chart::CartesianLine(3), &pot, 9).unwrap();
        assert_eq!(a[0].states.len(), 3);
        assert_eq!(a[0].states, b[0].states);
    }
}
