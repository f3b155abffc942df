//! Run configuration: JSON config file merged with command-line flags.

use std::path::Path;

use hausdim::{DomainMode, MapFamily, Which};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum FamilySpec {
    /// Continued-fraction maps `x ↦ 1/(x + d)`.
    Cf {
        digits: Vec<f64>,
    },
    Cantor {
        a: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeshSpec {
    /// Target widths.
    H(Vec<f64>),
    /// Cell counts over the meshed domain.
    N(Vec<usize>),
}

/// Contents of a `--config` file. Every field is optional; flags win.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub family: Option<FamilySpec>,
    pub mesh: Option<MeshSpec>,
    pub domain: Option<String>,
    pub s: Option<f64>,
    pub s_min: Option<f64>,
    pub s_max: Option<f64>,
    pub root_tol: Option<f64>,
    pub radius_tol: Option<f64>,
    pub which: Option<Vec<String>>,
    pub format: Option<Format>,
    pub threads: Option<usize>,
    pub scale: Option<f64>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    /// Fields set in `over` replace those in `self`.
    pub fn merge(self, over: RunConfig) -> RunConfig {
        RunConfig {
            family: over.family.or(self.family),
            mesh: over.mesh.or(self.mesh),
            domain: over.domain.or(self.domain),
            s: over.s.or(self.s),
            s_min: over.s_min.or(self.s_min),
            s_max: over.s_max.or(self.s_max),
            root_tol: over.root_tol.or(self.root_tol),
            radius_tol: over.radius_tol.or(self.radius_tol),
            which: over.which.or(self.which),
            format: over.format.or(self.format),
            threads: over.threads.or(self.threads),
            scale: over.scale.or(self.scale),
        }
    }

    pub fn family(&self) -> Result<MapFamily<f64>, CliError> {
        let spec =
            self.family.as_ref().ok_or_else(|| CliError::Config("no family given (use --cf or --cantor)".into()))?;
        build_family(spec)
    }

    pub fn domain_mode(&self) -> Result<DomainMode, CliError> {
        parse_domain(self.domain.as_deref().unwrap_or("full"))
    }

    pub fn which(&self) -> Result<Vec<Which>, CliError> {
        match &self.which {
            None => Ok(vec![Which::A, Which::M, Which::B]),
            Some(v) => v.iter().map(|w| parse_which(w)).collect(),
        }
    }

    pub fn positive(&self, name: &str, v: Option<f64>, default: f64) -> Result<f64, CliError> {
        let x = v.unwrap_or(default);
        if x > 0.0 && x.is_finite() {
            Ok(x)
        } else {
            Err(CliError::Config(format!("{name} must be positive and finite (got {x})")))
        }
    }

    pub fn threads(&self) -> Result<usize, CliError> {
        match self.threads.unwrap_or(1) {
            0 => Err(CliError::Config("--threads must be at least 1".into())),
            t => Ok(t),
        }
    }
}

pub fn build_family(spec: &FamilySpec) -> Result<MapFamily<f64>, CliError> {
    match spec {
        FamilySpec::Cf { digits } => MapFamily::mobius(digits),
        FamilySpec::Cantor { a } => MapFamily::cantor(*a),
    }
    .map_err(|e| CliError::Config(format!("invalid family: {e}")))
}

pub fn parse_domain(text: &str) -> Result<DomainMode, CliError> {
    let bad = || CliError::Config(format!("bad domain '{text}' (expected full or reduced:k)"));
    match text {
        "full" => Ok(DomainMode::Full),
        _ => {
            let k = text.strip_prefix("reduced:").ok_or_else(bad)?;
            match k.parse::<usize>() {
                Ok(k) if k >= 1 => Ok(DomainMode::Reduced(k)),
                _ => Err(bad()),
            }
        }
    }
}

pub fn domain_label(mode: DomainMode) -> String {
    match mode {
        DomainMode::Full => "full".into(),
        DomainMode::Reduced(k) => format!("reduced:{k}"),
    }
}

pub fn parse_which(text: &str) -> Result<Which, CliError> {
    match text {
        "A" | "a" => Ok(Which::A),
        "M" | "m" => Ok(Which::M),
        "B" | "b" => Ok(Which::B),
        _ => Err(CliError::Config(format!("unknown matrix '{text}' (expected A, M or B)"))),
    }
}

pub fn which_label(w: Which) -> &'static str {
    match w {
        Which::A => "A",
        Which::M => "M",
        Which::B => "B",
    }
}
