use std::collections::HashSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::model::value::{canonical_value, Kind};

/// One tuned hyperparameter and its finite, ordered value domain.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Hyperparameter {
    name: String,
    kind: Kind,
    domain: Vec<String>,
}

impl Hyperparameter {
    /// Builds a hyperparameter, canonicalizing every domain value.
    pub fn new<S: AsRef<str>>(name: impl Into<String>, kind: Kind, domain: &[S]) -> Result<Self> {
        let name = name.into();
        if name.is_empty() {
            return Err(Error::InvalidSpace("empty hyperparameter name".into()));
        }
        if domain.is_empty() {
            return Err(Error::InvalidSpace(format!("empty domain for '{name}'")));
        }
        let mut canonical = Vec::with_capacity(domain.len());
        let mut seen = HashSet::with_capacity(domain.len());
        for raw in domain {
            let value = canonical_value(kind, raw.as_ref())
                .map_err(|e| Error::InvalidSpace(format!("'{name}': {e}")))?;
            if !seen.insert(value.clone()) {
                return Err(Error::InvalidSpace(format!("'{name}': duplicate domain value '{value}'")));
            }
            canonical.push(value);
        }
        Ok(Hyperparameter { name, kind, domain: canonical })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn domain(&self) -> &[String] {
        &self.domain
    }

    /// Position of `raw` in the domain after canonicalization.
    pub fn index_of(&self, raw: &str) -> Option<usize> {
        let value = canonical_value(self.kind, raw).ok()?;
        self.domain.iter().position(|v| *v == value)
    }
}

/// A flat grid: the Cartesian product of its hyperparameters' domains.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ConfigSpace {
    label: String,
    hyperparameters: Vec<Hyperparameter>,
    grid_size: u64,
}

impl ConfigSpace {
    pub fn new(label: impl Into<String>, hyperparameters: Vec<Hyperparameter>) -> Result<Self> {
        if hyperparameters.is_empty() {
            return Err(Error::InvalidSpace("no hyperparameters".into()));
        }
        let mut names = HashSet::new();
        for hp in &hyperparameters {
            if !names.insert(hp.name()) {
                return Err(Error::InvalidSpace(format!("duplicate hyperparameter name '{}'", hp.name())));
            }
        }
        let grid_size = checked_grid_size(&hyperparameters)?;
        Ok(ConfigSpace {
            label: label.into(),
            hyperparameters,
            grid_size,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn hyperparameters(&self) -> &[Hyperparameter] {
        &self.hyperparameters
    }

    pub fn hyperparameter(&self, name: &str) -> Option<(usize, &Hyperparameter)> {
        self.hyperparameters.iter().enumerate().find(|(_, hp)| hp.name() == name)
    }

    /// Number of grid points.
    pub fn grid_size(&self) -> u64 {
        self.grid_size
    }

    /// Every configuration, lexicographic in the declared domain order with the
    /// first hyperparameter varying slowest.
    pub fn grid(&self) -> Result<Vec<Configuration>> {
        let n = usize::try_from(self.grid_size)
            .map_err(|_| Error::GridOverflow(format!("{} configurations do not fit in memory", self.grid_size)))?;
        let mut out = Vec::with_capacity(n);
        let radices: Vec<u32> = self.hyperparameters.iter().map(|hp| hp.domain.len() as u32).collect();
        let mut current = vec![0u32; radices.len()];
        for _ in 0..n {
            out.push(Configuration(current.clone()));
            for pos in (0..current.len()).rev() {
                current[pos] += 1;
                if current[pos] < radices[pos] {
                    break;
                }
                current[pos] = 0;
            }
        }
        Ok(out)
    }

    /// Builds a configuration from values given in hyperparameter order.
    pub fn config<S: AsRef<str>>(&self, values: &[S]) -> Result<Configuration> {
        if values.len() != self.hyperparameters.len() {
            return Err(Error::InvalidConfig(format!(
                "expected {} values, got {}",
                self.hyperparameters.len(),
                values.len()
            )));
        }
        let indices = self
            .hyperparameters
            .iter()
            .zip(values)
            .map(|(hp, v)| {
                hp.index_of(v.as_ref()).map(|i| i as u32).ok_or_else(|| {
                    Error::InvalidConfig(format!("'{}' is not in the domain of '{}'", v.as_ref(), hp.name()))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Configuration(indices))
    }

    /// Builds a configuration from `name=value` assignments in any order.
    pub fn config_from_assignments<S: AsRef<str>>(&self, assignments: &[(S, S)]) -> Result<Configuration> {
        let mut values: Vec<Option<&str>> = vec![None; self.hyperparameters.len()];
        for (name, value) in assignments {
            let (i, _) = self
                .hyperparameter(name.as_ref())
                .ok_or_else(|| Error::InvalidConfig(format!("unknown hyperparameter '{}'", name.as_ref())))?;
            if values[i].replace(value.as_ref()).is_some() {
                return Err(Error::InvalidConfig(format!("'{}' assigned twice", name.as_ref())));
            }
        }
        let values = values
            .into_iter()
            .zip(&self.hyperparameters)
            .map(|(v, hp)| v.ok_or_else(|| Error::InvalidConfig(format!("missing value for '{}'", hp.name()))))
            .collect::<Result<Vec<_>>>()?;
        self.config(&values)
    }

    pub fn validate(&self, config: &Configuration) -> Result<()> {
        if config.0.len() != self.hyperparameters.len()
            || config.0.iter().zip(&self.hyperparameters).any(|(&i, hp)| i as usize >= hp.domain.len())
        {
            return Err(Error::InvalidConfig(format!("{config:?} does not belong to space '{}'", self.label)));
        }
        Ok(())
    }

    /// Canonical value strings of `config`, in hyperparameter order.
    pub fn values<'a>(&'a self, config: &Configuration) -> Vec<&'a str> {
        config
            .0
            .iter()
            .zip(&self.hyperparameters)
            .map(|(&i, hp)| hp.domain[i as usize].as_str())
            .collect()
    }

    /// `name=value` rendering, comma separated.
    pub fn describe(&self, config: &Configuration) -> String {
        self.hyperparameters
            .iter()
            .zip(self.values(config))
            .map(|(hp, v)| format!("{}={v}", hp.name()))
            .collect::<Vec<_>>()
            .join(",")
    }
}

fn checked_grid_size(hps: &[Hyperparameter]) -> Result<u64> {
    let mut size: u64 = 1;
    for (i, hp) in hps.iter().enumerate() {
        size = size.checked_mul(hp.domain.len() as u64).ok_or_else(|| {
            let factors: Vec<String> = hps[..=i].iter().map(|h| h.domain.len().to_string()).collect();
            Error::GridOverflow(format!("product {} exceeds 2^64", factors.join(" × ")))
        })?;
    }
    Ok(size)
}

/// One grid point, stored as domain indices aligned with its space's
/// hyperparameter order.
///
/// Equality is value-exact within a space, and the derived ordering is the
/// lexicographic order of the value tuple under each declared domain order.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration(pub(crate) Vec<u32>);

impl Configuration {
    pub fn indices(&self) -> &[u32] {
        &self.0
    }

    pub fn from_indices(indices: Vec<u32>) -> Self {
        Configuration(indices)
    }
}

impl fmt::Debug for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Configuration{:?}", self.0)
    }
}
