//! Coefficient sequences: `c_jk` for double series and `a_k` for single ones.
//!
//! A sequence is a closure plus metadata. When a sequence is a product
//! `a_j b_k` it keeps both factors, and `eval` is defined as that product so
//! the factored fast paths elsewhere agree with it bit for bit.

pub mod expr;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use expr::{Env, Expr, Var};

/// `|a_k| <= constant * k^(-p)` for every `k >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingleDecay {
    pub p: f64,
    pub constant: f64,
}

/// `|c_jk| <= constant * j^(-p) * k^(-q)` for every `j, k >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayHint {
    pub p: f64,
    pub q: f64,
    pub constant: f64,
}

type SingleFn = dyn Fn(u64) -> Complex64 + Send + Sync;
type DoubleFn = dyn Fn(u64, u64) -> Complex64 + Send + Sync;

#[derive(Clone)]
pub struct SingleSequence {
    name: Arc<str>,
    f: Arc<SingleFn>,
    decay: Option<SingleDecay>,
}

impl fmt::Debug for SingleSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SingleSequence").field("name", &self.name).field("decay", &self.decay).finish()
    }
}

impl SingleSequence {
    pub fn new(name: impl Into<String>, f: impl Fn(u64) -> Complex64 + Send + Sync + 'static) -> Self {
        Self { name: name.into().into(), f: Arc::new(f), decay: None }
    }

    pub fn real(name: impl Into<String>, f: impl Fn(u64) -> f64 + Send + Sync + 'static) -> Self {
        Self::new(name, move |k| Complex64::new(f(k), 0.0))
    }

    pub fn with_decay(mut self, p: f64, constant: f64) -> Self {
        self.decay = Some(SingleDecay { p, constant });
        self
    }

    pub fn without_decay(mut self) -> Self {
        self.decay = None;
        self
    }

    /// Parses an expression in `n`.
    pub fn from_expr(name: impl Into<String>, src: &str) -> Result<Self> {
        let e = Expr::parse_with(src, &[Var::N])?;
        Ok(Self::real(name, move |n| e.eval(&Env::n(n))))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    #[inline]
    pub fn eval(&self, k: u64) -> Complex64 {
        (self.f)(k)
    }

    pub fn decay(&self) -> Option<SingleDecay> {
        self.decay
    }

    pub fn scaled(&self, t: f64) -> Self {
        let f = Arc::clone(&self.f);
        Self {
            name: format!("{}*{t}", self.name).into(),
            f: Arc::new(move |k| f(k) * t),
            decay: self.decay.map(|d| SingleDecay { p: d.p, constant: d.constant * t.abs() }),
        }
    }

    /// `(2 + (-1)^k) / k^2`
    pub fn oscillating() -> Self {
        Self::real("oscillating", |k| (2.0 + alt(k)) / (k as f64).powi(2)).with_decay(2.0, 3.0)
    }

    /// `3 / (k ln(k+1))` when `k = 1 mod 3`, otherwise `1 / (k ln(k+1))`.
    pub fn mod3_log() -> Self {
        Self::real("mod3_log", |k| {
            let base = 1.0 / (k as f64 * (k as f64 + 1.0).ln());
            if k % 3 == 1 {
                3.0 * base
            } else {
                base
            }
        })
        .with_decay(1.0, 3.0 / std::f64::consts::LN_2)
    }

    /// `k^(-p)`
    pub fn power(p: f64) -> Self {
        Self::real(format!("power({p})"), move |k| (k as f64).powf(-p)).with_decay(p, 1.0)
    }

    pub fn zero() -> Self {
        Self::real("zero", |_| 0.0).with_decay(0.0, 0.0)
    }
}

fn alt(k: u64) -> f64 {
    if k % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

#[derive(Clone)]
pub struct CoefficientSequence {
    name: Arc<str>,
    f: Arc<DoubleFn>,
    parts: Option<(SingleSequence, SingleSequence)>,
    decay: Option<DecayHint>,
}

impl fmt::Debug for CoefficientSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CoefficientSequence")
            .field("name", &self.name)
            .field("separable", &self.parts.is_some())
            .field("decay", &self.decay)
            .finish()
    }
}

impl CoefficientSequence {
    pub fn new(name: impl Into<String>, f: impl Fn(u64, u64) -> Complex64 + Send + Sync + 'static) -> Self {
        Self { name: name.into().into(), f: Arc::new(f), parts: None, decay: None }
    }

    pub fn real(name: impl Into<String>, f: impl Fn(u64, u64) -> f64 + Send + Sync + 'static) -> Self {
        Self::new(name, move |j, k| Complex64::new(f(j, k), 0.0))
    }

    /// `c_jk = a_j * b_k`. Decay hints of the factors multiply.
    pub fn separable(name: impl Into<String>, a: SingleSequence, b: SingleSequence) -> Self {
        let (fa, fb) = (Arc::clone(&a.f), Arc::clone(&b.f));
        let decay = match (a.decay, b.decay) {
            (Some(da), Some(db)) => Some(DecayHint { p: da.p, q: db.p, constant: da.constant * db.constant }),
            _ => None,
        };
        Self { name: name.into().into(), f: Arc::new(move |j, k| fa(j) * fb(k)), parts: Some((a, b)), decay }
    }

    /// Dense table, `rows[j-1][k-1] = c_jk`, zero outside.
    pub fn from_table(name: impl Into<String>, rows: Vec<Vec<Complex64>>) -> Self {
        let rows = Arc::new(rows);
        Self::new(name, move |j, k| {
            if j == 0 || k == 0 {
                return Complex64::new(0.0, 0.0);
            }
            rows.get(j as usize - 1).and_then(|r| r.get(k as usize - 1)).copied().unwrap_or(Complex64::new(0.0, 0.0))
        })
    }

    /// Parses an expression in `j` and `k`. Products of a `j`-only and a
    /// `k`-only part are detected and kept as factors.
    pub fn from_expr(name: impl Into<String>, src: &str) -> Result<Self> {
        let e = Expr::parse_with(src, &[Var::J, Var::K])?;
        Ok(Self::from_parsed(name.into(), e))
    }

    fn from_parsed(name: String, e: Expr) -> Self {
        match e.split_jk() {
            Some((ea, eb)) => {
                let a = SingleSequence::real(format!("{name}[j]"), move |j| ea.eval(&Env::jk(j, 0)));
                let b = SingleSequence::real(format!("{name}[k]"), move |k| eb.eval(&Env::jk(0, k)));
                Self::separable(name, a, b)
            }
            None => Self::real(name, move |j, k| e.eval(&Env::jk(j, k))),
        }
    }

    pub fn with_decay_hint(mut self, hint: DecayHint) -> Self {
        self.decay = Some(hint);
        self
    }

    pub fn without_decay_hint(mut self) -> Self {
        self.decay = None;
        self
    }

    /// Same values, but forgets the factorisation so generic code paths run.
    pub fn without_separable(&self) -> Self {
        Self { parts: None, ..self.clone() }
    }

    pub fn scaled(&self, t: f64) -> Self {
        if let Some((a, b)) = &self.parts {
            let mut out = Self::separable(format!("{}*{t}", self.name), a.scaled(t), b.clone());
            out.decay = self.decay.map(|d| DecayHint { constant: d.constant * t.abs(), ..d });
            return out;
        }
        let f = Arc::clone(&self.f);
        Self {
            name: format!("{}*{t}", self.name).into(),
            f: Arc::new(move |j, k| f(j, k) * t),
            parts: None,
            decay: self.decay.map(|d| DecayHint { constant: d.constant * t.abs(), ..d }),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    #[inline]
    pub fn eval(&self, j: u64, k: u64) -> Complex64 {
        (self.f)(j, k)
    }

    pub fn separable_parts(&self) -> Option<(&SingleSequence, &SingleSequence)> {
        self.parts.as_ref().map(|(a, b)| (a, b))
    }

    pub fn decay_hint(&self) -> Option<DecayHint> {
        self.decay
    }

    /// Errors on the first non-finite value in `[1, size]^2`.
    pub fn check_finite(&self, size: u64) -> Result<()> {
        for j in 1..=size {
            for k in 1..=size {
                let v = self.eval(j, k);
                if !(v.re.is_finite() && v.im.is_finite()) {
                    return Err(Error::Param(format!("sequence `{}` is not finite at ({j}, {k})", self.name)));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case")]
pub enum Preset {
    OscillatingQuadratic,
    Mod3LogProduct,
    ProductPower { p: f64, q: f64 },
    Zero,
}

impl Preset {
    pub fn build(&self) -> Result<CoefficientSequence> {
        let name = self.to_string();
        Ok(match *self {
            Preset::OscillatingQuadratic => {
                CoefficientSequence::separable(name, SingleSequence::oscillating(), SingleSequence::oscillating())
            }
            Preset::Mod3LogProduct => {
                CoefficientSequence::separable(name, SingleSequence::mod3_log(), SingleSequence::mod3_log())
            }
            Preset::ProductPower { p, q } => {
                if !(p > 0.0 && q > 0.0 && p.is_finite() && q.is_finite()) {
                    return Err(Error::PresetParams {
                        name: "product_power".into(),
                        reason: format!("exponents must be positive, got p = {p}, q = {q}"),
                    });
                }
                CoefficientSequence::separable(name, SingleSequence::power(p), SingleSequence::power(q))
            }
            Preset::Zero => CoefficientSequence::separable(name, SingleSequence::zero(), SingleSequence::zero()),
        })
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Preset::OscillatingQuadratic => f.write_str("oscillating_quadratic"),
            Preset::Mod3LogProduct => f.write_str("mod3_log_product"),
            Preset::ProductPower { p, q } => write!(f, "product_power({p},{q})"),
            Preset::Zero => f.write_str("zero"),
        }
    }
}

impl FromStr for Preset {
    type Err = Error;

    /// Accepts `name` or `name(p1, p2, ...)`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, params) = match s.find('(') {
            Some(i) if s.ends_with(')') => {
                let inner = &s[i + 1..s.len() - 1];
                let params = inner
                    .split(',')
                    .map(|p| {
                        p.trim().parse::<f64>().map_err(|_| Error::PresetParams {
                            name: s[..i].trim().into(),
                            reason: format!("`{}` is not a number", p.trim()),
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                (s[..i].trim(), params)
            }
            _ => (s, Vec::new()),
        };
        preset_from_parts(name, &params)
    }
}

fn preset_from_parts(name: &str, params: &[f64]) -> Result<Preset> {
    let want = |n: usize| -> Result<()> {
        if params.len() == n {
            Ok(())
        } else {
            Err(Error::PresetParams {
                name: name.into(),
                reason: format!("expected {n} parameter(s), got {}", params.len()),
            })
        }
    };
    match name {
        "oscillating_quadratic" => want(0).map(|_| Preset::OscillatingQuadratic),
        "mod3_log_product" => want(0).map(|_| Preset::Mod3LogProduct),
        "product_power" => want(2).map(|_| Preset::ProductPower { p: params[0], q: params[1] }),
        "zero" => want(0).map(|_| Preset::Zero),
        "custom" => Err(Error::PresetParams {
            name: name.into(),
            reason: "custom sequences are built from an expression".into(),
        }),
        _ => Err(Error::UnknownPreset(name.into())),
    }
}

/// Builds a preset by name.
pub fn builtin(name: &str, params: &[f64]) -> Result<CoefficientSequence> {
    preset_from_parts(name, params)?.build()
}

/// Parses a definition file: one `name = expression` per line, `#` comments.
pub fn parse_definitions(text: &str) -> Result<Vec<(String, Expr)>> {
    let mut out: Vec<(String, Expr)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((name, body)) = line.split_once('=') else {
            return Err(Error::Definition { line: line_no, message: "expected `name = expression`".into() });
        };
        let name = name.trim();
        if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(Error::Definition { line: line_no, message: format!("bad name `{name}`") });
        }
        if out.iter().any(|(n, _)| n == name) {
            return Err(Error::Definition { line: line_no, message: format!("duplicate name `{name}`") });
        }
        let e = Expr::parse_with(body, &[Var::J, Var::K])
            .map_err(|e| Error::Definition { line: line_no, message: e.to_string() })?;
        out.push((name.to_string(), e));
    }
    Ok(out)
}

/// Loads one named sequence out of a definition file.
pub fn load_definition(text: &str, name: &str) -> Result<CoefficientSequence> {
    let defs = parse_definitions(text)?;
    let known: Vec<_> = defs.iter().map(|(n, _)| n.clone()).collect();
    defs.into_iter()
        .find(|(n, _)| n == name)
        .map(|(n, e)| CoefficientSequence::from_parsed(n, e))
        .ok_or_else(|| Error::Param(format!("no sequence `{name}` in definition file (found: {})", known.join(", "))))
}
