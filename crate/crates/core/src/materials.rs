//! Raw layer materials, their validation and the plane reduction to 1D constants.
//!
//! Stress, strain and field quantities use Voigt indices with `3` the
//! through-thickness (poling) direction and `1` the beam axis. Only the
//! constants that survive the Bernoulli reduction (`c11`, `c13`, `c33`,
//! `e31`, `e33`, `eps11`, `eps33`, `rho`) feed the model; `c12`, `c44`, `c66`
//! and `e15` are carried so that a database round-trips unchanged.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

/// Shipped material database: PZT-5A and glass.
pub const TABLE1_JSON: &str = include_str!("../data/table1.json");

#[derive(Debug, Error)]
pub enum MaterialError {
    #[error("cannot read material file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed material database: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("material `{material}`: field `{field}` = {value:e} {reason}")]
    Invalid {
        material: String,
        field: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("material `{material}`: {reason}")]
    Inconsistent { material: String, reason: String },
    #[error("duplicate material name `{0}`")]
    Duplicate(String),
    #[error("layer thickness must be positive, got {0:e}")]
    Thickness(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaterialKind {
    Elastic,
    Piezoelectric,
}

/// Raw constants of one layer, SI units throughout.
///
/// Elastic entries may omit `c33`, `c44` and `c66`; the isotropic closure
/// `c33 = c11` is then used by [`Material::c33_effective`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Material<T = f64> {
    pub name: String,
    pub kind: MaterialKind,
    pub c11: T,
    pub c12: T,
    pub c13: T,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c33: Option<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c44: Option<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c66: Option<T>,
    pub rho: T,
    #[serde(default)]
    pub e31: T,
    #[serde(default)]
    pub e33: T,
    #[serde(default)]
    pub e15: T,
    #[serde(default)]
    pub eps11: T,
    #[serde(default)]
    pub eps33: T,
    /// Free-form provenance note.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comment: Option<String>,
}

/// Plane-reduced constants of one layer (`gamma_2 = 0`, `sigma_3 = 0`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReducedLayer<T = f64> {
    pub cbar11: T,
    pub ebar31: T,
    pub epsbar11: T,
    pub epsbar33: T,
    pub rho: T,
    pub h: T,
}

impl<T: Scalar> Material<T> {
    /// An isotropic-closure elastic material with no electrical response.
    pub fn elastic(name: impl Into<String>, c11: T, c13: T, rho: T) -> Self {
        Material {
            name: name.into(),
            kind: MaterialKind::Elastic,
            c11,
            c12: c13,
            c13,
            c33: None,
            c44: None,
            c66: None,
            rho,
            e31: T::zero(),
            e33: T::zero(),
            e15: T::zero(),
            eps11: T::zero(),
            eps33: T::zero(),
            comment: None,
        }
    }

    /// `c33`, or `c11` for elastic entries that leave it out.
    pub fn c33_effective(&self) -> T {
        match (self.c33, self.kind) {
            (Some(c33), _) => c33,
            (None, MaterialKind::Elastic) => self.c11,
            (None, MaterialKind::Piezoelectric) => T::nan(),
        }
    }

    pub fn is_piezoelectric(&self) -> bool {
        self.kind == MaterialKind::Piezoelectric
    }

    pub fn validate(&self) -> Result<(), MaterialError> {
        let invalid = |field, value: T, reason| MaterialError::Invalid {
            material: self.name.clone(),
            field,
            value: value.as_f64(),
            reason,
        };

        let finite = [
            ("c11", Some(self.c11)),
            ("c12", Some(self.c12)),
            ("c13", Some(self.c13)),
            ("c33", self.c33),
            ("c44", self.c44),
            ("c66", self.c66),
            ("rho", Some(self.rho)),
            ("e31", Some(self.e31)),
            ("e33", Some(self.e33)),
            ("e15", Some(self.e15)),
            ("eps11", Some(self.eps11)),
            ("eps33", Some(self.eps33)),
        ];
        for (field, value) in finite {
            if let Some(v) = value {
                if !v.is_finite() {
                    return Err(invalid(field, v, "is not finite"));
                }
            }
        }

        if self.rho <= T::zero() {
            return Err(invalid("rho", self.rho, "must be > 0"));
        }
        if self.c11 <= T::zero() {
            return Err(invalid("c11", self.c11, "must be > 0"));
        }
        if self.is_piezoelectric() && self.c33.is_none() {
            return Err(MaterialError::Inconsistent {
                material: self.name.clone(),
                reason: "piezoelectric materials must give c33 explicitly".into(),
            });
        }
        let c33 = self.c33_effective();
        if c33 <= T::zero() {
            return Err(invalid("c33", c33, "must be > 0"));
        }
        if self.c11 * c33 - self.c13 * self.c13 <= T::zero() {
            return Err(invalid(
                "c13",
                self.c13,
                "violates c11*c33 - c13^2 > 0 (stiffness not positive definite)",
            ));
        }

        match self.kind {
            MaterialKind::Elastic => {
                let electrical = [
                    ("e31", self.e31),
                    ("e33", self.e33),
                    ("e15", self.e15),
                    ("eps11", self.eps11),
                    ("eps33", self.eps33),
                ];
                for (field, value) in electrical {
                    if value != T::zero() {
                        return Err(invalid(
                            field,
                            value,
                            "must be zero for an elastic material",
                        ));
                    }
                }
            }
            MaterialKind::Piezoelectric => {
                if self.eps11 <= T::zero() {
                    return Err(invalid("eps11", self.eps11, "must be > 0"));
                }
                if self.eps33 <= T::zero() {
                    return Err(invalid("eps33", self.eps33, "must be > 0"));
                }
            }
        }
        Ok(())
    }

    /// Reduces the material to the constants of a layer of thickness `h`.
    ///
    /// `cbar11 = c11 - c13^2/c33`, `ebar31 = e31 - (c13/c33) e33`,
    /// `epsbar11 = eps11`, `epsbar33 = eps33 + e33^2/c33`.
    pub fn reduce(&self, h: T) -> Result<ReducedLayer<T>, MaterialError> {
        if !(h > T::zero()) || !h.is_finite() {
            return Err(MaterialError::Thickness(h.as_f64()));
        }
        let c33 = self.c33_effective();
        let cbar11 = self.c11 - self.c13 * self.c13 / c33;
        let (ebar31, epsbar11, epsbar33) = match self.kind {
            MaterialKind::Elastic => (T::zero(), T::zero(), T::zero()),
            MaterialKind::Piezoelectric => (
                self.e31 - self.c13 / c33 * self.e33,
                self.eps11,
                self.eps33 + self.e33 * self.e33 / c33,
            ),
        };
        Ok(ReducedLayer {
            cbar11,
            ebar31,
            epsbar11,
            epsbar33,
            rho: self.rho,
            h,
        })
    }
}

impl<T: Scalar> ReducedLayer<T> {
    /// True when the layer carries the quadratic potential field.
    pub fn has_electric_field(&self) -> bool {
        self.epsbar33 > T::zero()
    }
}

/// Parses and validates a JSON material database.
pub fn parse_materials<T>(json: &str) -> Result<BTreeMap<String, Material<T>>, MaterialError>
where
    T: Scalar + for<'de> Deserialize<'de>,
{
    let list: Vec<Material<T>> = serde_json::from_str(json)?;
    let mut out = BTreeMap::new();
    for material in list {
        material.validate()?;
        if out.contains_key(&material.name) {
            return Err(MaterialError::Duplicate(material.name));
        }
        out.insert(material.name.clone(), material);
    }
    Ok(out)
}

pub fn load_materials<T>(
    path: impl AsRef<Path>,
) -> Result<BTreeMap<String, Material<T>>, MaterialError>
where
    T: Scalar + for<'de> Deserialize<'de>,
{
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| MaterialError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_materials(&text)
}

/// The shipped PZT-5A / glass database.
pub fn table1<T>() -> BTreeMap<String, Material<T>>
where
    T: Scalar + for<'de> Deserialize<'de>,
{
    parse_materials(TABLE1_JSON).expect("shipped table1.json is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn pzt() -> Material {
        table1::<f64>()["PZT-5A"].clone()
    }

    fn glass() -> Material {
        table1::<f64>()["glass"].clone()
    }

    #[test]
    fn table1_entries() {
        let db = table1::<f64>();
        assert_eq!(db.len(), 2);
        let p = pzt();
        assert_eq!(p.c11, 12.1e10);
        assert_eq!(p.c13, 7.52e10);
        assert_eq!(p.c33, Some(11.1e10));
        assert_eq!(p.rho, 7750.0);
        assert_eq!(p.e31, -5.4);
        assert_eq!(p.e33, 15.8);
        assert_eq!(p.eps33, 7.34882e-9);
        let g = glass();
        assert_eq!(g.rho, 2330.0);
        assert_eq!(g.c33_effective(), g.c11);
        assert!(g.comment.is_some());
    }

    #[test]
    fn reduce_pzt() {
        let r = pzt().reduce(200e-6).unwrap();
        assert_relative_eq!(r.cbar11, 7.0054e10, max_relative = 1e-4);
        assert_relative_eq!(r.ebar31, -16.104, max_relative = 1e-4);
        assert_relative_eq!(r.epsbar33, 9.5978e-9, max_relative = 1e-4);
        assert_eq!(r.epsbar11, 8.110264e-9);
        assert!(r.epsbar33 >= pzt().eps33);
    }

    #[test]
    fn reduce_glass() {
        let r = glass().reduce(500e-6).unwrap();
        assert_relative_eq!(r.cbar11, 14.0945e10, max_relative = 1e-5);
        assert_eq!(r.ebar31, 0.0);
        assert_eq!(r.epsbar33, 0.0);
        assert!(!r.has_electric_field());
    }

    #[test]
    fn vanishing_coupling_terms() {
        let mut m = pzt();
        m.c13 = 0.0;
        m.e33 = 0.0;
        let r = m.reduce(1e-4).unwrap();
        assert_eq!(r.cbar11, m.c11);
        assert_eq!(r.ebar31, m.e31);
        assert_eq!(r.epsbar33, m.eps33);
    }

    #[test]
    fn rejects_zero_density() {
        let mut m = glass();
        m.rho = 0.0;
        match m.validate() {
            Err(MaterialError::Invalid { field, .. }) => assert_eq!(field, "rho"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_indefinite_stiffness() {
        let mut m = pzt();
        m.c13 = (m.c11 * m.c33.unwrap()).sqrt();
        let err = m.validate().unwrap_err();
        assert!(err.to_string().contains("positive definite"), "{err}");
    }

    #[test]
    fn elastic_with_piezo_constants_rejected() {
        let mut m = glass();
        m.e31 = 1.0;
        assert!(m.validate().is_err());
    }

    #[test]
    fn piezo_needs_permittivity() {
        let mut m = pzt();
        m.eps11 = 0.0;
        assert!(m.validate().is_err());
    }

    #[test]
    fn rejects_unknown_keys_and_duplicates() {
        let unknown =
            r#"[{"name":"a","kind":"elastic","c11":1.0,"c12":0.0,"c13":0.0,"rho":1.0,"young":3}]"#;
        assert!(matches!(
            parse_materials::<f64>(unknown),
            Err(MaterialError::Parse(_))
        ));
        let dup = r#"[{"name":"a","kind":"elastic","c11":1.0,"c12":0.0,"c13":0.0,"rho":1.0},
                      {"name":"a","kind":"elastic","c11":2.0,"c12":0.0,"c13":0.0,"rho":1.0}]"#;
        assert!(matches!(
            parse_materials::<f64>(dup),
            Err(MaterialError::Duplicate(_))
        ));
    }

    #[test]
    fn rejects_nonpositive_thickness() {
        assert!(glass().reduce(0.0).is_err());
        assert!(glass().reduce(-1e-3).is_err());
    }

    #[test]
    fn f32_database() {
        let db = table1::<f32>();
        let r = db["PZT-5A"].reduce(2e-4).unwrap();
        assert!((r.cbar11 / 7.0054e10 - 1.0).abs() < 1e-4);
    }
}
