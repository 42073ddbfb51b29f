//! Registry of quantum fluids and their dimensionless couplings.
//!
//! Each material is a potential shape plus the de Boer-style coupling
//! `Λ = 1/(σ·√(m·ε))` in reduced units; everything downstream needs nothing
//! else. Built-ins cover the helium isotopes and the spin-polarized hydrogen
//! family on a Lennard-Jones shape; a simple line-oriented registry file can
//! add more.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::correlation::CorrelationModel;
use crate::error::{Error, Result};
use crate::potentials::PotentialSpec;

/// One named material: identifier, human label, coupling, potential shape.
#[derive(Debug, Clone)]
pub struct Material {
    pub id: String,
    pub display_name: String,
    pub lambda: f64,
    pub potential: PotentialSpec,
}

impl Material {
    /// Assemble the correlation model for this material.
    pub fn model(&self) -> Result<CorrelationModel> {
        CorrelationModel::build(self.potential.clone(), self.lambda)
    }
}

/// Materials keyed by id; ordered deterministically.
#[derive(Debug, Clone, Default)]
pub struct MaterialRegistry {
    map: BTreeMap<String, Material>,
}

impl MaterialRegistry {
    pub fn empty() -> Self {
        Self::default()
    }

    /// The stock set: helium isotopes and spin-polarized hydrogen isotopes,
    /// all on the Lennard-Jones shape.
    pub fn built_in() -> Self {
        let mut reg = Self::empty();
        let stock: [(&str, &str, f64); 6] = [
            ("he3", "helium-3", 0.494),
            ("he4", "helium-4", 0.430),
            ("he6", "helium-6", 0.347),
            ("h_pol", "spin-polarized hydrogen", 0.740),
            ("d_pol", "spin-polarized deuterium", 0.523),
            ("t_pol", "spin-polarized tritium", 0.428),
        ];
        for (id, name, lambda) in stock {
            reg.insert(Material {
                id: id.into(),
                display_name: name.into(),
                lambda,
                potential: PotentialSpec::lennard_jones(),
            })
            .expect("stock ids are distinct");
        }
        reg
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn ids(&self) -> Vec<&str> {
        self.map.keys().map(String::as_str).collect()
    }

    pub fn all(&self) -> impl Iterator<Item = &Material> {
        self.map.values()
    }

    pub fn lookup(&self, id: &str) -> Result<&Material> {
        self.map.get(id).ok_or_else(|| {
            Error::config(format!(
                "unknown material '{id}'; known: {}",
                self.ids().join(", ")
            ))
        })
    }

    /// Add one material; duplicate ids are refused rather than overwritten.
    pub fn insert(&mut self, m: Material) -> Result<()> {
        validate_id(&m.id)?;
        if !(m.lambda > 0.0) || !m.lambda.is_finite() {
            return Err(Error::config(format!(
                "material '{}': Λ must be positive, got {}",
                m.id, m.lambda
            )));
        }
        if self.map.contains_key(&m.id) {
            return Err(Error::config(format!("duplicate material id '{}'", m.id)));
        }
        self.map.insert(m.id.clone(), m);
        Ok(())
    }

    /// Merge a registry file: one material per line,
    /// `id,display_name,lambda,potential_kind,n`, with `potential_kind` one
    /// of `lj` or `power`; `n` may be empty for `lj`. Blank lines and lines
    /// starting with `#` are skipped. Any malformed line is a hard error
    /// naming the line; nothing from a bad file is merged.
    pub fn merge_from_str(&mut self, text: &str, source: &str) -> Result<usize> {
        let mut staged: Vec<Material> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 5 {
                return Err(Error::config(format!(
                    "{source}:{line_no}: expected 5 comma-separated fields \
                     (id,display_name,lambda,potential_kind,n), found {}",
                    fields.len()
                )));
            }
            let id = fields[0];
            validate_id(id).map_err(|e| Error::config(format!("{source}:{line_no}: {e}")))?;
            if fields[1].is_empty() {
                return Err(Error::config(format!(
                    "{source}:{line_no}: empty display name"
                )));
            }
            let lambda: f64 = fields[2].parse().map_err(|_| {
                Error::config(format!("{source}:{line_no}: unparsable Λ '{}'", fields[2]))
            })?;
            let potential = match fields[3] {
                "lj" => {
                    if !fields[4].is_empty() && fields[4] != "12" {
                        return Err(Error::config(format!(
                            "{source}:{line_no}: the lj shape has n = 12, got '{}'",
                            fields[4]
                        )));
                    }
                    PotentialSpec::lennard_jones()
                }
                "power" => {
                    let n: f64 = fields[4].parse().map_err(|_| {
                        Error::config(format!("{source}:{line_no}: unparsable n '{}'", fields[4]))
                    })?;
                    PotentialSpec::power_law(n)
                        .map_err(|e| Error::config(format!("{source}:{line_no}: {e}")))?
                }
                other => {
                    return Err(Error::config(format!(
                        "{source}:{line_no}: unknown potential kind '{other}' \
                         (expected lj or power)"
                    )));
                }
            };
            if staged.iter().any(|m| m.id == id) || self.map.contains_key(id) {
                return Err(Error::config(format!(
                    "{source}:{line_no}: duplicate material id '{id}'"
                )));
            }
            staged.push(Material {
                id: id.into(),
                display_name: fields[1].into(),
                lambda,
                potential,
            });
        }
        let added = staged.len();
        for m in staged {
            self.insert(m)?;
        }
        Ok(added)
    }

    /// Merge a registry file from disk; see [`Self::merge_from_str`].
    pub fn load_file(&mut self, path: &Path) -> Result<usize> {
        let text = std::fs::read_to_string(path)?;
        self.merge_from_str(&text, &path.display().to_string())
    }

    /// One line per material, aligned for terminal display.
    pub fn describe(&self) -> String {
        let mut out = String::new();
        for m in self.all() {
            let kind = match m.potential.kind() {
                crate::potentials::PotentialKind::LennardJones => "lj".to_string(),
                crate::potentials::PotentialKind::PurePowerLaw => {
                    format!("power n={}", m.potential.n())
                }
                crate::potentials::PotentialKind::Tabulated => "table".to_string(),
            };
            let _ = writeln!(
                out,
                "{:<8} {:<26} lambda={:<8} {}",
                m.id, m.display_name, m.lambda, kind
            );
        }
        out
    }
}

fn validate_id(id: &str) -> Result<()> {
    if id.is_empty() {
        return Err(Error::config("empty material id"));
    }
    if !id
        .chars()
        .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
    {
        return Err(Error::config(format!(
            "material id '{id}' must be lowercase ascii, digits, or '_'"
        )));
    }
    Ok(())
}
