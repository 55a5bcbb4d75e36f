//! TOML form of a [`DiffusionSpec`].
//!
//! ```toml
//! family = "switching_gbm"
//! interval = [0.0, inf]
//! alpha = 100.0
//!
//! [params]
//! mu_a = -0.1
//! sigma_a = 0.75
//! mu_b = -0.1
//! sigma_b = 1.5
//! ```
//!
//! `interval` may be omitted and defaults to the family's natural state
//! space. Generic coefficients are closures and have no document form.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::diffusion::{DiffusionSpec, Family, Interval};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecDocument {
    pub family: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interval: Option<[f64; 2]>,
    pub alpha: f64,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

fn param_names(family: &str) -> Option<&'static [&'static str]> {
    Some(match family {
        "brownian_drift" => &["nu"],
        "ornstein_uhlenbeck" => &["kappa"],
        "geometric_bm" => &["mu", "sigma"],
        "switching_brownian" => &["mu_a", "mu_b"],
        "switching_gbm" => &["mu_a", "sigma_a", "mu_b", "sigma_b"],
        _ => return None,
    })
}

impl SpecDocument {
    pub fn from_spec(spec: &DiffusionSpec) -> Result<Self> {
        let params: Vec<(&str, f64)> = match *spec.family() {
            Family::BrownianDrift { nu } => vec![("nu", nu)],
            Family::OrnsteinUhlenbeck { kappa } => vec![("kappa", kappa)],
            Family::GeometricBm { mu, sigma } => vec![("mu", mu), ("sigma", sigma)],
            Family::SwitchingBrownian { mu_a, mu_b } => vec![("mu_a", mu_a), ("mu_b", mu_b)],
            Family::SwitchingGbm {
                mu_a,
                sigma_a,
                mu_b,
                sigma_b,
            } => vec![
                ("mu_a", mu_a),
                ("sigma_a", sigma_a),
                ("mu_b", mu_b),
                ("sigma_b", sigma_b),
            ],
            Family::Generic(_) => {
                return Err(Error::Document(
                    "generic coefficients cannot be written to a document".into(),
                ))
            }
        };
        let iv = spec.interval();
        Ok(Self {
            family: spec.family().name().to_string(),
            interval: Some([iv.left, iv.right]),
            alpha: spec.alpha(),
            params: params.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
        })
    }

    pub fn to_spec(&self) -> Result<DiffusionSpec> {
        let names = param_names(&self.family).ok_or_else(|| {
            Error::Document(format!("unknown family {:?}", self.family))
        })?;
        if let Some(extra) = self.params.keys().find(|k| !names.contains(&k.as_str())) {
            return Err(Error::Document(format!(
                "unknown parameter {extra:?} for family {}",
                self.family
            )));
        }
        let get = |name: &str| {
            self.params.get(name).copied().ok_or_else(|| {
                Error::Document(format!("family {} needs parameter {name:?}", self.family))
            })
        };
        let family = match self.family.as_str() {
            "brownian_drift" => Family::BrownianDrift { nu: get("nu")? },
            "ornstein_uhlenbeck" => Family::OrnsteinUhlenbeck { kappa: get("kappa")? },
            "geometric_bm" => Family::GeometricBm {
                mu: get("mu")?,
                sigma: get("sigma")?,
            },
            "switching_brownian" => Family::SwitchingBrownian {
                mu_a: get("mu_a")?,
                mu_b: get("mu_b")?,
            },
            _ => Family::SwitchingGbm {
                mu_a: get("mu_a")?,
                sigma_a: get("sigma_a")?,
                mu_b: get("mu_b")?,
                sigma_b: get("sigma_b")?,
            },
        };
        let interval = match self.interval {
            Some([l, r]) => Interval::new(l, r),
            None => family.natural_interval().expect("catalog family"),
        };
        DiffusionSpec::new(family, interval, self.alpha)
    }

    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Document(e.to_string()))
    }

    pub fn render(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Document(e.to_string()))
    }
}

/// Parses and validates a spec document.
pub fn parse_spec(text: &str) -> Result<DiffusionSpec> {
    SpecDocument::parse(text)?.to_spec()
}

/// Renders a catalog spec as a document.
pub fn render_spec(spec: &DiffusionSpec) -> Result<String> {
    SpecDocument::from_spec(spec)?.render()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffusion::GenericCoefficients;
    use proptest::prelude::*;

    fn same(a: &DiffusionSpec, b: &DiffusionSpec) -> bool {
        SpecDocument::from_spec(a).unwrap() == SpecDocument::from_spec(b).unwrap()
            && a.case() == b.case()
    }

    #[test]
    fn parses_with_default_interval() {
        let spec = parse_spec("family = \"brownian_drift\"\nalpha = 0.0\n[params]\nnu = 1.0\n").unwrap();
        assert_eq!(spec.interval(), Interval::real_line());
        let spec = parse_spec(
            "family = \"switching_gbm\"\ninterval = [0.0, inf]\nalpha = 100.0\n\
             [params]\nmu_a = -0.1\nsigma_a = 0.75\nmu_b = -0.1\nsigma_b = 1.5\n",
        )
        .unwrap();
        assert_eq!(spec.alpha(), 100.0);
    }

    #[test]
    fn catalog_round_trip() {
        for spec in [
            DiffusionSpec::brownian_drift(1.0, 0.0).unwrap(),
            DiffusionSpec::ornstein_uhlenbeck(-1.0, 0.5).unwrap(),
            DiffusionSpec::geometric_bm(-0.1, 0.75, 1.0).unwrap(),
            DiffusionSpec::switching_brownian(-1.0, -2.0, 0.0).unwrap(),
            DiffusionSpec::switching_gbm(-0.1, 0.75, -0.1, 1.5, 100.0).unwrap(),
        ] {
            let text = render_spec(&spec).unwrap();
            assert!(same(&parse_spec(&text).unwrap(), &spec), "{text}");
        }
    }

    #[test]
    fn rejects_bad_documents() {
        for text in [
            "family = \"brownian_drift\"\nalpha = 0.0\n",
            "family = \"brownian_drift\"\nalpha = 0.0\n[params]\nnu = 1.0\nkappa = 2.0\n",
            "family = \"cubic\"\nalpha = 0.0\n",
            "family = \"brownian_drift\"\nalpha = 0.0\ncolour = 1\n[params]\nnu = 1.0\n",
            "family = \"brownian_drift\"\nalpha = \n",
        ] {
            assert!(matches!(parse_spec(text), Err(Error::Document(_))), "{text}");
        }
        let err = parse_spec("family = \"brownian_drift\"\nalpha = 0.5\ninterval = [0.0, 1.0]\n[params]\nnu = 1.0\n");
        assert!(matches!(err, Err(Error::Domain(_))));
        // a recurrent diffusion parses but does not validate
        let err = parse_spec("family = \"brownian_drift\"\nalpha = 0.0\n[params]\nnu = 0.0\n").unwrap_err();
        assert!(matches!(err, Error::NotTransient { .. }));
        let generic = DiffusionSpec::generic(
            GenericCoefficients::new(|_| -1.0, |_| 1.0),
            Interval::real_line(),
            0.0,
        )
        .unwrap();
        assert!(render_spec(&generic).is_err());
    }

    proptest! {
        #[test]
        fn round_trip_is_lossless(nu in 0.01f64..5.0, mu_a in -3.0f64..-0.01, mu_b in -3.0f64..-0.01,
                                  alpha in -2.0f64..2.0, galpha in 0.01f64..500.0) {
            let specs = [
                DiffusionSpec::brownian_drift(nu, alpha).unwrap(),
                DiffusionSpec::switching_brownian(mu_a, mu_b, alpha).unwrap(),
                DiffusionSpec::switching_gbm(mu_a, 0.5 + nu, mu_b, 0.3 + nu, galpha).unwrap(),
            ];
            for spec in specs {
                let back = parse_spec(&render_spec(&spec).unwrap()).unwrap();
                prop_assert!(same(&back, &spec));
            }
        }
    }
}
