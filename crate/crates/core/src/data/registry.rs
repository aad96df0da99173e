use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::Series;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Source,
    Target,
}

/// One operating condition's data.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainSpec {
    pub name: String,
    pub role: Role,
    pub series: Vec<Series>,
    pub operating_condition: String,
}

/// Source and target domains for one experiment.
#[derive(Debug, Clone)]
pub struct Registry {
    domains: Vec<DomainSpec>,
    integrate_conditions: bool,
}

/// Checks names and roles. With `integrate_conditions`, every source domain
/// feeds meta-training; otherwise only the first one does.
pub fn register_domains(sources: Vec<DomainSpec>, targets: Vec<DomainSpec>, integrate_conditions: bool) -> Result<Registry> {
    if sources.is_empty() {
        return Err(Error::Empty("source domain list"));
    }
    let mut domains = Vec::with_capacity(sources.len() + targets.len());
    for (mut d, role) in sources
        .into_iter()
        .map(|d| (d, Role::Source))
        .chain(targets.into_iter().map(|d| (d, Role::Target)))
    {
        if d.series.is_empty() {
            return Err(Error::Config(format!("domain {:?} has no series", d.name)));
        }
        if domains.iter().any(|e: &DomainSpec| e.name == d.name) {
            return Err(Error::DuplicateName(d.name));
        }
        d.role = role;
        domains.push(d);
    }
    Ok(Registry {
        domains,
        integrate_conditions,
    })
}

impl Registry {
    pub fn len(&self) -> usize {
        self.domains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.domains.is_empty()
    }

    pub fn domains(&self) -> &[DomainSpec] {
        &self.domains
    }

    pub fn get(&self, name: &str) -> Option<&DomainSpec> {
        self.domains.iter().find(|d| d.name == name)
    }

    pub fn sources(&self) -> impl Iterator<Item = &DomainSpec> {
        self.domains.iter().filter(|d| d.role == Role::Source)
    }

    pub fn targets(&self) -> impl Iterator<Item = &DomainSpec> {
        self.domains.iter().filter(|d| d.role == Role::Target)
    }

    /// Series that make up the meta-training pool, one pool segment each.
    pub fn training_series(&self) -> Vec<&Series> {
        let mut sources = self.sources();
        if self.integrate_conditions {
            sources.flat_map(|d| d.series.iter()).collect()
        } else {
            sources.next().map(|d| d.series.iter().collect()).unwrap_or_default()
        }
    }
}
