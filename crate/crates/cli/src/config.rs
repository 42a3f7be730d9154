//! The run configuration file.

use egdeg::domain::DomainExpr;
use egdeg::factory::{catalog, CatalogEntry};
use egdeg::group::GroupSpec;
use egdeg::local_map::{make_map, LocalGradientMap};
use egdeg::numerics::Numerics;
use egdeg::poly::Polynomial;
use egdeg::theta::Setting;
use serde::Deserialize;

pub const SCHEMA: &str = "egdeg/1";

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub schema: Option<String>,
    #[serde(default)]
    pub group: Option<GroupSpec>,
    #[serde(default)]
    pub domain: Option<DomainExpr>,
    #[serde(default)]
    pub potential: Option<PotentialBlock>,
    #[serde(default)]
    pub numerics: Numerics,
    /// Box for the `degree` subcommand.
    #[serde(default, rename = "box")]
    pub degree_box: Option<BoxBlock>,
    #[serde(default)]
    pub output: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum PotentialBlock {
    Catalog(CatalogRef),
    Expr(ExprBlock),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExprBlock {
    pub expr: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CatalogRef {
    pub kind: String,
    pub name: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxBlock {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

/// Something went wrong before any computation started.
#[derive(Debug)]
pub struct Invalid(pub String);

impl From<egdeg::Error> for Invalid {
    fn from(e: egdeg::Error) -> Self {
        Invalid(e.to_string())
    }
}

/// What a config resolves to: a setting plus, if a potential was given, a map.
pub struct Problem {
    pub setting: Setting,
    pub map: Option<LocalGradientMap>,
    pub entry: Option<CatalogEntry>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<RunConfig, Invalid> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| Invalid(format!("config: {e}")))?;
        if let Some(s) = &cfg.schema {
            if s != SCHEMA {
                return Err(Invalid(format!("config: unsupported schema {s:?}, expected {SCHEMA:?}")));
            }
        }
        let n = &cfg.numerics;
        if !(n.grid_h > 0.0 && n.bbox > 0.0 && n.newton_tol > 0.0 && n.zero_thresh > 0.0) {
            return Err(Invalid("config: grid_h, bbox, newton_tol and zero_thresh must be positive".into()));
        }
        Ok(cfg)
    }

    /// Builds the setting and map. Errors here are validation errors except
    /// for those the core marks as numerical.
    pub fn problem(&self) -> Result<Problem, egdeg::Error> {
        let num = self.numerics.clone();
        match &self.potential {
            Some(PotentialBlock::Catalog(c)) => {
                if c.kind != "catalog" {
                    return Err(egdeg::Error::Config(format!("unknown potential kind {:?}", c.kind)));
                }
                if self.group.is_some() || self.domain.is_some() {
                    return Err(egdeg::Error::Config(
                        "catalog potentials carry their own group and domain".into(),
                    ));
                }
                let entry = catalog(&c.name)?;
                let (setting, map) = entry.problem(&num)?;
                Ok(Problem { setting, map: Some(map), entry: Some(entry) })
            }
            other => {
                let group = self
                    .group
                    .as_ref()
                    .ok_or_else(|| egdeg::Error::Config("missing group block".into()))?
                    .build()?;
                let omega = self.domain.clone().unwrap_or(DomainExpr::FullSpace);
                omega.check_dim(group.dim())?;
                omega.validate_invariant(&group, num.bbox, num.seed)?;
                let map = match other {
                    Some(PotentialBlock::Expr(e)) => {
                        let p = Polynomial::parse(&e.expr, group.dim())?;
                        Some(make_map(&group, &omega, p, num.bbox)?)
                    }
                    _ => None,
                };
                let setting = Setting::new(group, omega, num)?;
                Ok(Problem { setting, map, entry: None })
            }
        }
    }
}
