//! Option sets shared by the command line and the TOML config file.
//!
//! Every flag has a twin key in the config file. A subcommand's own flags
//! live in `[<module>.<command>]`, e.g. `[membership.check_class]`; the
//! sequence and majorant flags live in `[sequences]` and `[majorants]`.
//! Flags given on the command line override the file.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use clap::Args;
use dsine_core::convergence::TailVerdict;
use dsine_core::sequences::load_definition;
use dsine_core::{CoefficientSequence, Family, IndexMap, MajorantFamily, Preset};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SequenceOpts {
    /// Preset: oscillating_quadratic, mod3_log_product, product_power(p,q), zero
    #[arg(long)]
    pub preset: Option<String>,
    /// Closed form in j and k, e.g. "pow(j,-2)*pow(k,-3)"
    #[arg(long)]
    pub expr: Option<String>,
    /// File of `name = expression` lines
    #[arg(long)]
    pub definitions: Option<PathBuf>,
    /// Entry to take from --definitions
    #[arg(long)]
    pub name: Option<String>,
    /// Multiply the sequence by this factor
    #[arg(long)]
    pub scale: Option<f64>,
}

impl SequenceOpts {
    pub fn is_empty(&self) -> bool {
        self.preset.is_none() && self.expr.is_none() && self.definitions.is_none()
    }

    pub fn build(&self) -> Result<CoefficientSequence> {
        let given = [self.preset.is_some(), self.expr.is_some(), self.definitions.is_some()];
        if given.iter().filter(|g| **g).count() != 1 {
            bail!("give exactly one of preset, expr or definitions");
        }
        let c = if let Some(p) = &self.preset {
            Preset::from_str(p)?.build()?
        } else if let Some(e) = &self.expr {
            CoefficientSequence::from_expr("custom", e)?
        } else {
            let path = self.definitions.as_ref().unwrap();
            let name = self.name.as_deref().ok_or_else(|| anyhow!("definitions need a name"))?;
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            load_definition(&text, name)?
        };
        c.check_finite(64)?;
        Ok(match self.scale {
            Some(t) if t.is_finite() => c.scaled(t),
            Some(t) => bail!("scale must be finite, got {t}"),
            None => c,
        })
    }
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MajorantOpts {
    /// Majorant family: one, two, three
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long)]
    pub lambda: Option<u64>,
    /// Index map b1(l) as an expression in l
    #[arg(long)]
    pub b1: Option<String>,
    #[arg(long)]
    pub b2: Option<String>,
    #[arg(long)]
    pub b3: Option<String>,
    /// Largest block start scanned by the sups
    #[arg(long)]
    pub sup_horizon: Option<u64>,
}

impl MajorantOpts {
    /// Fills unset values with defaults and builds the family.
    pub fn resolve(&mut self, family: Family, horizon: u64) -> Result<MajorantFamily> {
        let family = Family::from_str(self.family.get_or_insert_with(|| family.to_string()))?;
        let mut fam = MajorantFamily::new(family)
            .with_lambda(*self.lambda.get_or_insert(2))
            .with_horizon(*self.sup_horizon.get_or_insert(horizon));
        fam.b1 = IndexMap::parse(self.b1.get_or_insert_with(|| "l".into()))?;
        fam.b2 = IndexMap::parse(self.b2.get_or_insert_with(|| "l".into()))?;
        fam.b3 = IndexMap::parse(self.b3.get_or_insert_with(|| "l".into()))?;
        fam.validate()?;
        Ok(fam)
    }
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CheckClassOpts {
    /// Difference step
    #[arg(long)]
    pub r: Option<i64>,
    /// Smallest dyadic grid index
    #[arg(long)]
    pub grid_min: Option<u64>,
    /// Largest dyadic grid index
    #[arg(long)]
    pub grid_max: Option<u64>,
    /// Axes to check: row, col, double
    #[arg(long, value_delimiter = ',')]
    pub axes: Option<Vec<String>>,
    /// Constant to test against (pass / fail / inconclusive per axis)
    #[arg(long)]
    pub target_c: Option<f64>,
    /// Assert the fitted row constant is at most this
    #[arg(long)]
    pub max_row_c: Option<f64>,
    #[arg(long)]
    pub max_col_c: Option<f64>,
    #[arg(long)]
    pub max_double_c: Option<f64>,
    /// Assert the row growth slope is at least this
    #[arg(long)]
    pub min_growth_slope: Option<f64>,
    /// Single-index sequence, an expression in n (switches to single-index classes)
    #[arg(long)]
    pub single: Option<String>,
    /// Single-index class: mvbvs, sbvs, sbvs2, gm
    #[arg(long)]
    pub class: Option<String>,
    /// Majorant for gm: `star` or an expression in n
    #[arg(long)]
    pub beta: Option<String>,
    /// Assert the single-index fitted constant is at most this
    #[arg(long)]
    pub max_c: Option<f64>,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Condition22Opts {
    /// Largest anti-diagonal s
    #[arg(long)]
    pub horizon: Option<u64>,
    /// Explicit anti-diagonals (default 4, 8, ..., horizon)
    #[arg(long, value_delimiter = ',')]
    pub schedule: Option<Vec<u64>>,
    #[arg(long)]
    pub decay_factor: Option<f64>,
    #[arg(long)]
    pub band: Option<f64>,
    /// Expected verdict: decaying, flat, growing, inconclusive, not-decaying
    #[arg(long)]
    pub expect: Option<String>,
    /// Assert T(s) <= K / (s - 1) for this K
    #[arg(long)]
    pub tail_bound: Option<f64>,
    /// Assert T(s) equals this value at every scale
    #[arg(long)]
    pub constant_value: Option<f64>,
    #[arg(long)]
    pub constant_tolerance: Option<f64>,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PartialSumOpts {
    /// Rectangle `m:M x n:N`, e.g. 1:10x1:10
    #[arg(long)]
    pub rect: Option<String>,
    #[arg(long)]
    pub x: Option<f64>,
    #[arg(long)]
    pub y: Option<f64>,
    /// direct, parts or both
    #[arg(long)]
    pub method: Option<String>,
    /// Difference step of the by-parts expansion
    #[arg(long)]
    pub r: Option<i64>,
    /// Allowed |parts - direct| / (1 + |direct|)
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Assert the real part of the direct sum equals this (within tolerance)
    #[arg(long)]
    pub expect_value: Option<f64>,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IdentityOpts {
    #[arg(long)]
    pub cases_1d: Option<usize>,
    #[arg(long)]
    pub max_len_1d: Option<u64>,
    #[arg(long)]
    pub cases_2d: Option<usize>,
    #[arg(long)]
    pub table_2d: Option<u64>,
    /// Side of the grid for the difference decompositions
    #[arg(long)]
    pub diff_grid: Option<u64>,
    #[arg(long)]
    pub parts_tolerance: Option<f64>,
    /// Decomposition tolerance in units of eps times the stencil scale
    #[arg(long)]
    pub diff_ulps: Option<f64>,
    /// Kernel-bound grid points per half interval
    #[arg(long)]
    pub kernel_points: Option<usize>,
    #[arg(long)]
    pub kernel_k_max: Option<u64>,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UniformTailOpts {
    /// Interior points per axis of the (x, y) grid
    #[arg(long)]
    pub grid: Option<usize>,
    /// Largest rectangle coordinate
    #[arg(long)]
    pub lattice_max: Option<u64>,
    /// Thresholds m0 (rectangles with m + n > m0)
    #[arg(long, value_delimiter = ',')]
    pub thresholds: Option<Vec<u64>>,
    /// Add the corners next to ceil(1/x) for every probe point
    #[arg(long)]
    pub structured_corners: Option<bool>,
    #[arg(long)]
    pub decay_factor: Option<f64>,
    #[arg(long)]
    pub band: Option<f64>,
    /// Expected verdict, as for condition-22
    #[arg(long)]
    pub expect: Option<String>,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LemmaOpts {
    /// Diagonal points m = n
    #[arg(long, value_delimiter = ',')]
    pub schedule: Option<Vec<u64>>,
    /// Truncation of the inner sums
    #[arg(long)]
    pub sum_horizon: Option<u64>,
    /// Tolerance band for "nonincreasing"
    #[arg(long)]
    pub band: Option<f64>,
    /// Class constant for the pointwise estimate (fitted when unset)
    #[arg(long)]
    pub constant: Option<f64>,
    /// Grid bound used to fit the constant
    #[arg(long)]
    pub fit_grid_max: Option<u64>,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EtaOpts {
    #[arg(long, value_delimiter = ',')]
    pub epsilon: Option<Vec<f64>>,
    /// Class constant (fitted with family Three, r = 2 when unset)
    #[arg(long)]
    pub constant: Option<f64>,
    #[arg(long)]
    pub fit_grid_max: Option<u64>,
    /// Largest eta tried
    #[arg(long)]
    pub cap: Option<u64>,
    #[arg(long)]
    pub verify_max: Option<u64>,
    #[arg(long)]
    pub window: Option<u64>,
    /// Truncation of the tail sums and sups
    #[arg(long)]
    pub horizon: Option<u64>,
    /// Run the uniform bound check over the probe
    #[arg(long)]
    pub check_bound: Option<bool>,
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub lattice_max: Option<u64>,
    #[arg(long)]
    pub structured_corners: Option<bool>,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Remark2Opts {
    #[arg(long, value_delimiter = ',')]
    pub schedule: Option<Vec<u64>>,
    /// Allowed relative gap between the double sum and the squared row sum
    #[arg(long)]
    pub max_rel_err: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MembershipSection {
    pub check_class: CheckClassOpts,
    pub condition_22: Condition22Opts,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelsSection {
    pub partial_sum: PartialSumOpts,
    pub verify_identities: IdentityOpts,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConvergenceSection {
    pub uniform_tail: UniformTailOpts,
    pub lemma: LemmaOpts,
    pub eta: EtaOpts,
    pub remark2: Remark2Opts,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CliSection {
    /// Subcommand executed by `dsine run`
    pub command: Option<String>,
    pub out_dir: Option<PathBuf>,
    pub threads: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub sequences: SequenceOpts,
    pub majorants: MajorantOpts,
    pub membership: MembershipSection,
    pub kernels_summation: KernelsSection,
    pub convergence: ConvergenceSection,
    pub cli: CliSection,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("invalid config {}", path.display()))
    }
}

fn merge(base: &mut Value, top: Value) {
    match (base, top) {
        (Value::Object(b), Value::Object(t)) => {
            for (k, v) in t {
                if !v.is_null() {
                    merge(b.entry(k).or_insert(Value::Null), v);
                }
            }
        }
        (b, t) => *b = t,
    }
}

/// `top` wins wherever it has a value.
pub fn overlay<T: Serialize + DeserializeOwned>(base: &T, top: &T) -> Result<T> {
    let mut b = serde_json::to_value(base)?;
    merge(&mut b, serde_json::to_value(top)?);
    Ok(serde_json::from_value(b)?)
}

/// Serialises without the unset fields.
pub fn to_clean_value<T: Serialize>(v: &T) -> Value {
    fn strip(v: Value) -> Value {
        match v {
            Value::Object(m) => {
                Value::Object(m.into_iter().filter(|(_, v)| !v.is_null()).map(|(k, v)| (k, strip(v))).collect())
            }
            other => other,
        }
    }
    strip(serde_json::to_value(v).expect("options serialise"))
}

/// Parses an expected-verdict string. `not-decaying` accepts anything but
/// `decaying`.
pub fn verdict_matches(expect: &str, got: TailVerdict) -> Result<bool> {
    match expect.trim() {
        "not-decaying" | "not_decaying" => Ok(got != TailVerdict::Decaying),
        s => Ok(TailVerdict::from_str(s)? == got),
    }
}
