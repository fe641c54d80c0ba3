use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// The six workflow families. Every instance of a family proposes the same
/// action; only its context decides whether the action helps or hurts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    #[serde(rename = "db_index_operation")]
    DbIndex,
    #[serde(rename = "service_restart_operation")]
    ServiceRestart,
    #[serde(rename = "migration_operation")]
    Migration,
    #[serde(rename = "cache_operation")]
    Cache,
    #[serde(rename = "log_retention_operation")]
    LogRetention,
    #[serde(rename = "git_branch_operation")]
    GitBranch,
}

/// An observed covariate template: name plus the typical mean and spread
/// of its raw (unstandardized) values.
#[derive(Debug, Clone, Copy)]
pub struct CovariateTemplate {
    pub name: &'static str,
    pub mean: f64,
    pub sd: f64,
}

const fn cov(name: &'static str, mean: f64, sd: f64) -> CovariateTemplate {
    CovariateTemplate { name, mean, sd }
}

const DB_INDEX: [CovariateTemplate; 2] = [cov("query_volume", 1200.0, 300.0), cov("write_volume", 400.0, 120.0)];
const SERVICE_RESTART: [CovariateTemplate; 3] = [
    cov("error_rate", 2.0, 0.8),
    cov("traffic_load", 800.0, 200.0),
    cov("memory_pressure", 0.6, 0.15),
];
const MIGRATION: [CovariateTemplate; 4] = [
    cov("table_size_gb", 50.0, 20.0),
    cov("schema_complexity", 12.0, 4.0),
    cov("replica_lag_s", 3.0, 1.0),
    cov("peak_traffic", 1000.0, 250.0),
];
const CACHE: [CovariateTemplate; 3] = [
    cov("hit_ratio", 0.8, 0.08),
    cov("request_rate", 5000.0, 1500.0),
    cov("object_churn", 0.2, 0.06),
];
const LOG_RETENTION: [CovariateTemplate; 2] = [cov("disk_usage", 0.7, 0.1), cov("log_volume_gb", 30.0, 10.0)];
const GIT_BRANCH: [CovariateTemplate; 4] = [
    cov("open_prs", 15.0, 5.0),
    cov("ci_failure_rate", 0.1, 0.03),
    cov("team_size", 8.0, 3.0),
    cov("merge_conflicts", 4.0, 2.0),
];

impl Family {
    pub const ALL: [Family; 6] = [
        Family::DbIndex,
        Family::ServiceRestart,
        Family::Migration,
        Family::Cache,
        Family::LogRetention,
        Family::GitBranch,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::DbIndex => "db_index_operation",
            Family::ServiceRestart => "service_restart_operation",
            Family::Migration => "migration_operation",
            Family::Cache => "cache_operation",
            Family::LogRetention => "log_retention_operation",
            Family::GitBranch => "git_branch_operation",
        }
    }

    /// Tool invoked by every instance of the family.
    pub fn tool(self) -> &'static str {
        match self {
            Family::DbIndex => "add_index",
            Family::ServiceRestart => "restart_service",
            Family::Migration => "run_migration",
            Family::Cache => "flush_cache",
            Family::LogRetention => "shorten_log_retention",
            Family::GitBranch => "delete_stale_branch",
        }
    }

    pub fn from_tool(tool: &str) -> Option<Family> {
        Family::ALL.into_iter().find(|f| f.tool() == tool)
    }

    /// Observed confounders, in column order.
    pub fn covariates(self) -> &'static [CovariateTemplate] {
        match self {
            Family::DbIndex => &DB_INDEX,
            Family::ServiceRestart => &SERVICE_RESTART,
            Family::Migration => &MIGRATION,
            Family::Cache => &CACHE,
            Family::LogRetention => &LOG_RETENTION,
            Family::GitBranch => &GIT_BRANCH,
        }
    }

    /// Name of the unobserved confounder. Never appears in data or graphs.
    pub fn hidden_name(self) -> &'static str {
        match self {
            Family::DbIndex => "hidden_cache_warmth",
            Family::ServiceRestart => "hidden_upstream_incident",
            Family::Migration => "hidden_lock_contention",
            Family::Cache => "hidden_origin_health",
            Family::LogRetention => "hidden_audit_demand",
            Family::GitBranch => "hidden_release_pressure",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::UnknownFamily(s.to_owned()))
    }
}

/// Confounding regime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Moderate,
    Adversarial,
}

impl Regime {
    pub const ALL: [Regime; 2] = [Regime::Moderate, Regime::Adversarial];

    pub fn tag(self) -> &'static str {
        match self {
            Regime::Moderate => "moderate",
            Regime::Adversarial => "adversarial",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "moderate" => Ok(Regime::Moderate),
            "adversarial" => Ok(Regime::Adversarial),
            other => Err(Error::Input(format!("unknown regime `{other}`"))),
        }
    }
}
