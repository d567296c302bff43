//! Configuration assembly: a flat `key = value` file, command-line flags,
//! and built-in defaults, merged in that order of increasing precedence.

use std::fs;
use std::path::Path;

use arteria_core::{ExperimentSpec, RhsVariant};
use clap::ValueEnum;

/// Formulation selector as it appears on the command line and in config
/// files; the mollified variant additionally needs a `mollify` width.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantChoice {
    General,
    Bbm,
    Mollified,
}

/// Every setting a config file or the flag set may supply. `None` means
/// "not given here"; [`SpecOverrides::into_spec`] fills the gaps from the
/// built-in defaults.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SpecOverrides {
    pub nu: Option<f64>,
    pub eps: Option<f64>,
    pub kappa: Option<f64>,
    pub beta: Option<f64>,
    pub amp: Option<f64>,
    pub n: Option<usize>,
    pub t_final: Option<f64>,
    pub rtol: Option<f64>,
    pub atol: Option<f64>,
    pub s_index: Option<f64>,
    pub dealias: Option<bool>,
    pub mollify: Option<f64>,
    pub variant: Option<VariantChoice>,
    pub sample_dt: Option<f64>,
    pub max_steps: Option<u64>,
    pub dt_min: Option<f64>,
    pub dt_init: Option<f64>,
    pub label: Option<String>,
}

impl SpecOverrides {
    /// `self` wins over `under` field by field.
    pub fn merged_over(self, under: SpecOverrides) -> SpecOverrides {
        SpecOverrides {
            nu: self.nu.or(under.nu),
            eps: self.eps.or(under.eps),
            kappa: self.kappa.or(under.kappa),
            beta: self.beta.or(under.beta),
            amp: self.amp.or(under.amp),
            n: self.n.or(under.n),
            t_final: self.t_final.or(under.t_final),
            rtol: self.rtol.or(under.rtol),
            atol: self.atol.or(under.atol),
            s_index: self.s_index.or(under.s_index),
            dealias: self.dealias.or(under.dealias),
            mollify: self.mollify.or(under.mollify),
            variant: self.variant.or(under.variant),
            sample_dt: self.sample_dt.or(under.sample_dt),
            max_steps: self.max_steps.or(under.max_steps),
            dt_min: self.dt_min.or(under.dt_min),
            dt_init: self.dt_init.or(under.dt_init),
            label: self.label.or(under.label),
        }
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, String> {
            value
                .parse()
                .map_err(|_| format!("key `{key}`: `{value}` is not a valid number"))
        }
        match key {
            "nu" => self.nu = Some(num(key, value)?),
            "eps" => self.eps = Some(num(key, value)?),
            "kappa" => self.kappa = Some(num(key, value)?),
            "beta" => self.beta = Some(num(key, value)?),
            "amp" => self.amp = Some(num(key, value)?),
            "n" => self.n = Some(num(key, value)?),
            "t_final" => self.t_final = Some(num(key, value)?),
            "rtol" => self.rtol = Some(num(key, value)?),
            "atol" => self.atol = Some(num(key, value)?),
            "s_index" => self.s_index = Some(num(key, value)?),
            "dealias" => self.dealias = Some(parse_on_off(value).map_err(|e| format!("key `dealias`: {e}"))?),
            "mollify" => self.mollify = Some(num(key, value)?),
            "variant" => {
                self.variant = Some(match value {
                    "general" => VariantChoice::General,
                    "bbm" => VariantChoice::Bbm,
                    "mollified" => VariantChoice::Mollified,
                    other => {
                        return Err(format!(
                            "key `variant`: `{other}` is not one of general, bbm, mollified"
                        ))
                    }
                })
            }
            "sample_dt" => self.sample_dt = Some(num(key, value)?),
            "max_steps" => self.max_steps = Some(num(key, value)?),
            "dt_min" => self.dt_min = Some(num(key, value)?),
            "dt_init" => self.dt_init = Some(num(key, value)?),
            "label" => self.label = Some(value.to_string()),
            other => return Err(format!("unknown key `{other}`")),
        }
        Ok(())
    }

    /// Apply these overrides on top of the built-in defaults and validate.
    pub fn into_spec(self) -> Result<ExperimentSpec, String> {
        let mut spec = ExperimentSpec::baseline();
        if let Some(v) = self.label {
            spec.label = v;
        }
        if let Some(v) = self.nu {
            spec.params.nu = v;
        }
        if let Some(v) = self.eps {
            spec.params.eps = v;
        }
        if let Some(v) = self.kappa {
            spec.params.kappa = v;
        }
        if let Some(v) = self.beta {
            spec.params.beta = v;
        }
        if let Some(v) = self.amp {
            spec.amplitude = v;
        }
        if let Some(v) = self.n {
            spec.grid_n = v;
        }
        if let Some(v) = self.t_final {
            spec.solver.t_final = v;
        }
        if let Some(v) = self.rtol {
            spec.solver.rtol = v;
        }
        if let Some(v) = self.atol {
            spec.solver.atol = v;
        }
        if let Some(v) = self.s_index {
            spec.sobolev_index = v;
        }
        if let Some(v) = self.dealias {
            spec.dealias = v;
        }
        spec.solver.sample_dt = self.sample_dt.or(spec.solver.sample_dt);
        spec.solver.dt_min = self.dt_min.or(spec.solver.dt_min);
        spec.solver.dt_init = self.dt_init.or(spec.solver.dt_init);
        if let Some(v) = self.max_steps {
            spec.solver.max_steps = v;
        }
        spec.variant = match (self.variant, self.mollify) {
            (None, None) | (Some(VariantChoice::General), None) => RhsVariant::General,
            (None, Some(width)) | (Some(VariantChoice::Mollified), Some(width)) => {
                RhsVariant::Mollified { width }
            }
            (Some(VariantChoice::Bbm), None) => RhsVariant::Bbm,
            (Some(VariantChoice::Mollified), None) => {
                return Err("variant `mollified` needs a `mollify` width".into())
            }
            (Some(VariantChoice::General | VariantChoice::Bbm), Some(_)) => {
                return Err(
                    "`mollify` only applies to variant `mollified` (or leave `variant` unset)"
                        .into(),
                )
            }
        };
        spec.validate().map_err(|e| e.to_string())?;
        Ok(spec)
    }
}

/// Strict `on` / `off` switch used by the `dealias` setting.
pub fn parse_on_off(s: &str) -> Result<bool, String> {
    match s {
        "on" => Ok(true),
        "off" => Ok(false),
        other => Err(format!("expected `on` or `off`, got `{other}`")),
    }
}

/// Parse a flat `key = value` file with `#` comments.
pub fn parse_file(path: &Path) -> Result<SpecOverrides, String> {
    let text = fs::read_to_string(path)
        .map_err(|e| format!("cannot read config `{}`: {e}", path.display()))?;
    parse_text(&text).map_err(|e| format!("config `{}`: {e}", path.display()))
}

fn parse_text(text: &str) -> Result<SpecOverrides, String> {
    let mut overrides = SpecOverrides::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected `key = value`, got `{line}`", idx + 1))?;
        overrides
            .set(key.trim(), value.trim())
            .map_err(|e| format!("line {}: {e}", idx + 1))?;
    }
    Ok(overrides)
}
