//! The immutable model tree and its evaluation context.

use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use crate::autodiff::dual::{CDual, Dual};
use crate::error::{Error, Result};
use crate::netcore::{
    abcd_to_s, s_to_abcd, ABCDMatrixArray, Frequency, SMatrixArray, DEFAULT_Z0,
};
use crate::params::Parameter;

/// Static (non-fitted) configuration value.
#[derive(Debug, Clone, PartialEq)]
pub enum StaticValue {
    Text(String),
    Int(i64),
    Flag(bool),
}

impl fmt::Display for StaticValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StaticValue::Text(s) => f.write_str(s),
            StaticValue::Int(i) => write!(f, "{i}"),
            StaticValue::Flag(b) => write!(f, "{b}"),
        }
    }
}

#[derive(Debug, Clone)]
pub enum Field {
    Param(Parameter),
    Model(Model),
    Static(StaticValue),
}

impl Field {
    fn n_free(&self) -> usize {
        match self {
            Field::Param(p) if p.is_free() => p.len(),
            Field::Param(_) | Field::Static(_) => 0,
            Field::Model(m) => m.n_free(),
        }
    }
}

impl From<Parameter> for Field {
    fn from(p: Parameter) -> Self {
        Field::Param(p)
    }
}

impl From<Model> for Field {
    fn from(m: Model) -> Self {
        Field::Model(m)
    }
}

/// Which matrix a response rule produces natively.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Repr {
    S,
    Abcd,
}

/// The response rule of a model type.
///
/// A rule implements exactly one of [`Response::s`] or [`Response::abcd`],
/// matching [`Response::native`]; the other representation is derived by
/// conversion. Field values are read through the [`Scope`].
pub trait Response: fmt::Debug + Send + Sync {
    fn type_name(&self) -> &str;

    fn native(&self) -> Repr;

    fn ports(&self, _fields: &[(String, Field)]) -> usize {
        2
    }

    fn validate(&self, _fields: &[(String, Field)]) -> Result<()> {
        Ok(())
    }

    fn abcd(&self, scope: &Scope<'_>) -> Result<ABCDMatrixArray<CDual>> {
        Err(Error::InvalidModel(format!(
            "{} has no native ABCD rule",
            scope.type_name()
        )))
    }

    fn s(&self, scope: &Scope<'_>) -> Result<SMatrixArray<CDual>> {
        Err(Error::InvalidModel(format!(
            "{} has no native S rule",
            scope.type_name()
        )))
    }
}

struct Node {
    rule: Arc<dyn Response>,
    fields: Vec<(String, Field)>,
    // free-component offset of each field relative to this node
    offsets: Vec<usize>,
    n_free: usize,
    ports: usize,
}

/// An immutable model: named parameters, sub-models and static settings,
/// plus one response rule. Cloning is cheap.
#[derive(Clone)]
pub struct Model(Arc<Node>);

/// Path to a parameter leaf, dot-separated from the root (`parasitics.C1`).
/// Components of vector parameters carry an index suffix (`epr[1]`).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ParamPath(pub String);

impl fmt::Display for ParamPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// One free raw component of a model.
#[derive(Debug, Clone)]
pub struct FreeEntry {
    pub path: ParamPath,
    pub raw: f64,
    pub component: usize,
    pub param: Parameter,
}

/// What, if anything, carries a unit tangent during evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Seed {
    None,
    /// The free raw component with this flat index.
    Raw(usize),
    Frequency,
}

/// Evaluation grid and settings shared by all nodes of one evaluation.
#[derive(Debug, Clone)]
pub struct EvalCtx {
    f_plain: Vec<f64>,
    f: Vec<Dual>,
    w: Vec<Dual>,
    seed: Seed,
    z0: f64,
}

impl EvalCtx {
    pub fn new(freq: &Frequency, seed: Seed, z0: f64) -> Result<Self> {
        if !(z0 > 0.0 && z0.is_finite()) {
            return Err(Error::InvalidZ0(z0));
        }
        let tangent = if seed == Seed::Frequency { 1.0 } else { 0.0 };
        let f: Vec<Dual> = freq.f().iter().map(|&x| Dual::new(x, tangent)).collect();
        let w = f.iter().map(|&x| x * TAU).collect();
        Ok(Self {
            f_plain: freq.f().to_vec(),
            f,
            w,
            seed,
            z0,
        })
    }

    pub fn seed(&self) -> Seed {
        self.seed
    }

    pub fn z0(&self) -> f64 {
        self.z0
    }
}

/// A node's view of its fields during one evaluation.
pub struct Scope<'a> {
    node: &'a Model,
    ctx: &'a EvalCtx,
    offset: usize,
}

impl<'a> Scope<'a> {
    pub(crate) fn root(node: &'a Model, ctx: &'a EvalCtx) -> Self {
        Scope {
            node,
            ctx,
            offset: 0,
        }
    }

    fn index(&self, name: &str) -> Result<usize> {
        self.node
            .0
            .fields
            .iter()
            .position(|(n, _)| n == name)
            .ok_or_else(|| Error::UnknownField {
                model: self.node.type_name().to_string(),
                field: name.to_string(),
            })
    }

    pub fn type_name(&self) -> &str {
        self.node.type_name()
    }

    pub fn model(&self) -> &Model {
        self.node
    }

    /// Physical values of a parameter field, with the tangent of the seeded
    /// raw component (d physical / d raw = scale).
    pub fn param(&self, name: &str) -> Result<Vec<Dual>> {
        let i = self.index(name)?;
        let p = match &self.node.0.fields[i].1 {
            Field::Param(p) => p,
            _ => {
                return Err(Error::InvalidModel(format!(
                    "field `{name}` of {} is not a parameter",
                    self.type_name()
                )))
            }
        };
        let base = self.offset + self.node.0.offsets[i];
        let seeded = match self.ctx.seed {
            Seed::Raw(k) if p.is_free() && k >= base && k < base + p.len() => Some(k - base),
            _ => None,
        };
        let scale = p.scale_factor();
        let out: Vec<Dual> = p
            .raw()
            .iter()
            .enumerate()
            .map(|(c, &r)| {
                let d = if seeded == Some(c) { scale } else { 0.0 };
                Dual::new(r * scale, d)
            })
            .collect();
        if out.iter().any(|x| !x.v.is_finite()) {
            return Err(Error::InvalidModel(format!(
                "parameter `{name}` of {} is not finite",
                self.type_name()
            )));
        }
        Ok(out)
    }

    /// A scalar (single-component) parameter.
    pub fn scalar(&self, name: &str) -> Result<Dual> {
        let v = self.param(name)?;
        if v.len() != 1 {
            return Err(Error::InvalidModel(format!(
                "parameter `{name}` of {} must be scalar, has {} components",
                self.type_name(),
                v.len()
            )));
        }
        Ok(v[0])
    }

    fn child(&self, name: &str) -> Result<(&'a Model, usize)> {
        let i = self.index(name)?;
        match &self.node.0.fields[i].1 {
            Field::Model(m) => Ok((m, self.offset + self.node.0.offsets[i])),
            _ => Err(Error::InvalidModel(format!(
                "field `{name}` of {} is not a sub-model",
                self.type_name()
            ))),
        }
    }

    pub fn child_s(&self, name: &str) -> Result<SMatrixArray<CDual>> {
        let (m, off) = self.child(name)?;
        m.s_dual(self.ctx, off)
    }

    pub fn child_a(&self, name: &str) -> Result<ABCDMatrixArray<CDual>> {
        let (m, off) = self.child(name)?;
        m.a_dual(self.ctx, off)
    }

    pub fn static_value(&self, name: &str) -> Result<&'a StaticValue> {
        let i = self.index(name)?;
        match &self.node.0.fields[i].1 {
            Field::Static(v) => Ok(v),
            _ => Err(Error::InvalidModel(format!(
                "field `{name}` of {} is not static",
                self.type_name()
            ))),
        }
    }

    /// Frequencies in Hz, carrying a unit tangent when frequency is seeded.
    pub fn f(&self) -> &[Dual] {
        &self.ctx.f
    }

    /// Angular frequencies, `2π·f`.
    pub fn w(&self) -> &[Dual] {
        &self.ctx.w
    }

    /// Plain frequency values in Hz.
    pub fn f_plain(&self) -> &[f64] {
        &self.ctx.f_plain
    }

    pub fn len(&self) -> usize {
        self.ctx.f.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ctx.f.is_empty()
    }

    pub fn z0(&self) -> f64 {
        self.ctx.z0
    }
}

fn valid_name(name: &str) -> bool {
    !name.is_empty() && !name.contains(['.', '[', ']']) && !name.contains(char::is_whitespace)
}

impl Model {
    pub fn new(rule: impl Response + 'static, fields: Vec<(String, Field)>) -> Result<Self> {
        Self::from_rule(Arc::new(rule), fields)
    }

    pub(crate) fn from_rule(rule: Arc<dyn Response>, fields: Vec<(String, Field)>) -> Result<Self> {
        for (i, (name, _)) in fields.iter().enumerate() {
            if !valid_name(name) {
                return Err(Error::InvalidModel(format!("invalid field name `{name}`")));
            }
            if fields[..i].iter().any(|(n, _)| n == name) {
                return Err(Error::InvalidModel(format!("duplicate field `{name}`")));
            }
        }
        rule.validate(&fields)?;
        let mut offsets = Vec::with_capacity(fields.len());
        let mut n_free = 0;
        for (_, f) in &fields {
            offsets.push(n_free);
            n_free += f.n_free();
        }
        let ports = rule.ports(&fields);
        Ok(Model(Arc::new(Node {
            rule,
            fields,
            offsets,
            n_free,
            ports,
        })))
    }

    pub fn type_name(&self) -> &str {
        self.0.rule.type_name()
    }

    pub fn ports(&self) -> usize {
        self.0.ports
    }

    pub fn fields(&self) -> &[(String, Field)] {
        &self.0.fields
    }

    pub fn field(&self, name: &str) -> Option<&Field> {
        self.0.fields.iter().find(|(n, _)| n == name).map(|(_, f)| f)
    }

    /// Direct sub-model by field name.
    pub fn child(&self, name: &str) -> Option<&Model> {
        match self.field(name)? {
            Field::Model(m) => Some(m),
            _ => None,
        }
    }

    /// Parameter leaf by dotted path (`parasitics.C1`).
    pub fn param(&self, path: &str) -> Option<&Parameter> {
        match path.split_once('.') {
            None => match self.field(path)? {
                Field::Param(p) => Some(p),
                _ => None,
            },
            Some((head, rest)) => self.child(head)?.param(rest),
        }
    }

    /// Number of free raw components in the whole tree.
    pub fn n_free(&self) -> usize {
        self.0.n_free
    }

    /// Free raw components in depth-first declaration order.
    pub fn flatten_free(&self) -> Vec<FreeEntry> {
        let mut out = Vec::with_capacity(self.n_free());
        self.collect_free("", &mut out);
        out
    }

    fn collect_free(&self, prefix: &str, out: &mut Vec<FreeEntry>) {
        for (name, field) in &self.0.fields {
            let path = if prefix.is_empty() {
                name.clone()
            } else {
                format!("{prefix}.{name}")
            };
            match field {
                Field::Param(p) if p.is_free() => {
                    for (c, &raw) in p.raw().iter().enumerate() {
                        let path = if p.len() == 1 {
                            path.clone()
                        } else {
                            format!("{path}[{c}]")
                        };
                        out.push(FreeEntry {
                            path: ParamPath(path),
                            raw,
                            component: c,
                            param: p.clone(),
                        });
                    }
                }
                Field::Model(m) => m.collect_free(&path, out),
                _ => {}
            }
        }
    }

    /// Every parameter leaf (free or fixed) with its dotted path.
    pub fn all_params(&self) -> Vec<(ParamPath, Parameter)> {
        let mut out = Vec::new();
        self.collect_all("", &mut out);
        out
    }

    fn collect_all(&self, prefix: &str, out: &mut Vec<(ParamPath, Parameter)>) {
        for (name, field) in &self.0.fields {
            let path = if prefix.is_empty() {
                name.clone()
            } else {
                format!("{prefix}.{name}")
            };
            match field {
                Field::Param(p) => out.push((ParamPath(path), p.clone())),
                Field::Model(m) => m.collect_all(&path, out),
                Field::Static(_) => {}
            }
        }
    }

    pub fn free_values(&self) -> Vec<f64> {
        self.flatten_free().into_iter().map(|e| e.raw).collect()
    }

    /// Flat index of a free component by path. Scalar parameters also
    /// resolve with an explicit `[0]` suffix.
    pub fn free_index(&self, path: &str) -> Result<usize> {
        let entries = self.flatten_free();
        entries
            .iter()
            .position(|e| e.path.0 == path)
            .or_else(|| {
                path.strip_suffix("[0]").and_then(|base| {
                    entries
                        .iter()
                        .position(|e| e.path.0 == base && e.param.len() == 1)
                })
            })
            .ok_or_else(|| Error::UnknownPath(path.to_string()))
    }

    /// A structurally identical model with the free raw values replaced in
    /// [`Model::flatten_free`] order. Bounds are not checked here.
    pub fn with_params(&self, raw: &[f64]) -> Result<Model> {
        if raw.len() != self.n_free() {
            return Err(Error::VectorLength {
                expected: self.n_free(),
                got: raw.len(),
            });
        }
        let mut it = raw.iter().copied();
        Ok(self.map_params(&mut |p| {
            if p.is_free() {
                p.with_raw(it.by_ref().take(p.len()).collect())
            } else {
                p.clone()
            }
        }))
    }

    /// Rebuilds the tree with every parameter passed through `f`, in
    /// depth-first declaration order.
    pub(crate) fn map_params(&self, f: &mut dyn FnMut(&Parameter) -> Parameter) -> Model {
        let fields: Vec<(String, Field)> = self
            .0
            .fields
            .iter()
            .map(|(name, field)| {
                let field = match field {
                    Field::Param(p) => Field::Param(f(p)),
                    Field::Model(m) => Field::Model(m.map_params(f)),
                    Field::Static(s) => Field::Static(s.clone()),
                };
                (name.clone(), field)
            })
            .collect();
        let mut offsets = Vec::with_capacity(self.0.fields.len());
        let mut n_free = 0;
        for (_, fld) in &fields {
            offsets.push(n_free);
            n_free += fld.n_free();
        }
        Model(Arc::new(Node {
            rule: self.0.rule.clone(),
            fields,
            offsets,
            n_free,
            ports: self.0.ports,
        }))
    }

    /// Replaces one field (parameter, sub-model or static value) at a dotted
    /// path, returning a new model.
    pub fn with_field(&self, path: &str, value: Field) -> Result<Model> {
        let (head, rest) = match path.split_once('.') {
            Some((h, r)) => (h, Some(r)),
            None => (path, None),
        };
        let i = self
            .0
            .fields
            .iter()
            .position(|(n, _)| n == head)
            .ok_or_else(|| Error::UnknownField {
                model: self.type_name().to_string(),
                field: head.to_string(),
            })?;
        let mut fields = self.0.fields.clone();
        fields[i].1 = match (rest, &fields[i].1) {
            (None, _) => value,
            (Some(r), Field::Model(m)) => Field::Model(m.with_field(r, value)?),
            (Some(_), _) => return Err(Error::UnknownPath(path.to_string())),
        };
        Self::from_rule(self.0.rule.clone(), fields)
    }

    /// Source-to-load cascade with `right`.
    pub fn cascade(&self, right: &Model) -> Result<Model> {
        super::composite::cascade(self, right)
    }

    /// Closes port 2 with `load`, giving a 1-port model.
    pub fn terminated(&self, load: crate::netcore::Load) -> Result<Model> {
        super::composite::terminated(self, load)
    }

    pub(crate) fn s_dual(&self, ctx: &EvalCtx, offset: usize) -> Result<SMatrixArray<CDual>> {
        let scope = Scope {
            node: self,
            ctx,
            offset,
        };
        let s = match self.0.rule.native() {
            Repr::S => self.0.rule.s(&scope)?,
            Repr::Abcd => abcd_to_s(&self.0.rule.abcd(&scope)?, ctx.z0)?,
        };
        if s.len() != ctx.f.len() {
            return Err(Error::LengthMismatch {
                left: s.len(),
                right: ctx.f.len(),
            });
        }
        Ok(s)
    }

    pub(crate) fn a_dual(&self, ctx: &EvalCtx, offset: usize) -> Result<ABCDMatrixArray<CDual>> {
        if self.ports() != 2 {
            return Err(Error::PortMismatch {
                expected: 2,
                got: self.ports(),
            });
        }
        let scope = Scope {
            node: self,
            ctx,
            offset,
        };
        let a = match self.0.rule.native() {
            Repr::Abcd => self.0.rule.abcd(&scope)?,
            Repr::S => s_to_abcd(&self.0.rule.s(&scope)?)?,
        };
        if a.len() != ctx.f.len() {
            return Err(Error::LengthMismatch {
                left: a.len(),
                right: ctx.f.len(),
            });
        }
        Ok(a)
    }

    /// S parameters at the default 50 Ω reference.
    pub fn eval_s(&self, freq: &Frequency) -> Result<SMatrixArray> {
        self.eval_s_z0(freq, DEFAULT_Z0)
    }

    pub fn eval_s_z0(&self, freq: &Frequency, z0: f64) -> Result<SMatrixArray> {
        let ctx = EvalCtx::new(freq, Seed::None, z0)?;
        Ok(self.s_dual(&ctx, 0)?.values())
    }

    pub fn eval_a(&self, freq: &Frequency) -> Result<ABCDMatrixArray> {
        self.eval_a_z0(freq, DEFAULT_Z0)
    }

    pub fn eval_a_z0(&self, freq: &Frequency, z0: f64) -> Result<ABCDMatrixArray> {
        let ctx = EvalCtx::new(freq, Seed::None, z0)?;
        Ok(self.a_dual(&ctx, 0)?.values())
    }

    /// S parameters with tangents, for a given seed.
    pub fn eval_s_seeded(&self, freq: &Frequency, seed: Seed, z0: f64) -> Result<SMatrixArray<CDual>> {
        let ctx = EvalCtx::new(freq, seed, z0)?;
        self.s_dual(&ctx, 0)
    }

    pub fn eval_a_seeded(
        &self,
        freq: &Frequency,
        seed: Seed,
        z0: f64,
    ) -> Result<ABCDMatrixArray<CDual>> {
        let ctx = EvalCtx::new(freq, seed, z0)?;
        self.a_dual(&ctx, 0)
    }

    /// Whether two handles share the same underlying node.
    pub fn ptr_eq(&self, other: &Model) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    fn fmt_tree(&self, f: &mut fmt::Formatter<'_>, depth: usize) -> fmt::Result {
        writeln!(f, "{}", self.type_name())?;
        for (name, field) in &self.0.fields {
            write!(f, "{:width$}{name}: ", "", width = 2 * (depth + 1))?;
            match field {
                Field::Param(p) => writeln!(f, "{:?} × {} [{}]", p.raw(), p.scale_factor(), p.prior())?,
                Field::Static(s) => writeln!(f, "{s}")?,
                Field::Model(m) => m.fmt_tree(f, depth + 1)?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_tree(f, 0)
    }
}

pub(crate) fn c_real(x: Dual) -> CDual {
    CDual::from(x)
}
