//! Logical rules over attribute tests.
//!
//! Atoms name attributes; [`Rule::bind`] resolves names against a schema
//! before evaluation. Every atom is false on a missing value, so only an
//! explicit `Not` turns a missing value into `true`.

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fmt::number_label;
use crate::hyperblock::class_label;
use crate::model::{check_operation, Attribute, Dataset, MeasurementType, Permit, RelationKind, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Cmp {
    Le,
    Lt,
    Ge,
    Gt,
}

impl Cmp {
    pub fn test(self, x: f64, threshold: f64) -> bool {
        match self {
            Cmp::Le => x <= threshold,
            Cmp::Lt => x < threshold,
            Cmp::Ge => x >= threshold,
            Cmp::Gt => x > threshold,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            Cmp::Le => "<=",
            Cmp::Lt => "<",
            Cmp::Ge => ">=",
            Cmp::Gt => ">",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Atom {
    Equals { attr: String, value: String },
    NotEquals { attr: String, value: String },
    InSet { attr: String, values: BTreeSet<String> },
    NotInSet { attr: String, values: BTreeSet<String> },
    InRankRange { attr: String, start: u32, end: u32 },
    /// Closed interval over the attribute's numbers or codes.
    InInterval { attr: String, low: f64, high: f64 },
    Threshold { attr: String, op: Cmp, value: f64 },
    /// `x.attr = y.attr` across two points.
    PairEquals { attr: String },
}

impl Atom {
    pub fn attr(&self) -> &str {
        match self {
            Atom::Equals { attr, .. }
            | Atom::NotEquals { attr, .. }
            | Atom::InSet { attr, .. }
            | Atom::NotInSet { attr, .. }
            | Atom::InRankRange { attr, .. }
            | Atom::InInterval { attr, .. }
            | Atom::Threshold { attr, .. }
            | Atom::PairEquals { attr } => attr,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Atom::Equals { .. } => "equals",
            Atom::NotEquals { .. } => "not_equals",
            Atom::InSet { .. } => "in_set",
            Atom::NotInSet { .. } => "not_in_set",
            Atom::InRankRange { .. } => "in_rank_range",
            Atom::InInterval { .. } => "in_interval",
            Atom::Threshold { .. } => "threshold",
            Atom::PairEquals { .. } => "pair_equals",
        }
    }

    /// Relation the atom relies on.
    pub fn relation(&self) -> RelationKind {
        match self {
            Atom::InRankRange { .. } | Atom::InInterval { .. } | Atom::Threshold { .. } => RelationKind::Order,
            _ => RelationKind::Equality,
        }
    }

    fn holds(&self, attr: &Attribute, x: &Value, y: &Value) -> bool {
        if x.is_missing() {
            return false;
        }
        let label = || x.label().unwrap_or_default();
        match self {
            Atom::Equals { value, .. } => label() == *value,
            Atom::NotEquals { value, .. } => label() != *value,
            Atom::InSet { values, .. } => values.contains(&label()),
            Atom::NotInSet { values, .. } => !values.contains(&label()),
            Atom::InRankRange { start, end, .. } => x.rank().is_some_and(|r| *start <= r && r <= *end),
            Atom::InInterval { low, high, .. } => attr.code_of(x).is_some_and(|c| *low <= c && c <= *high),
            Atom::Threshold { op, value, .. } => attr.code_of(x).is_some_and(|c| op.test(c, *value)),
            Atom::PairEquals { .. } => !y.is_missing() && x == y,
        }
    }
}

fn set_text(values: &BTreeSet<String>) -> String {
    let items: Vec<&str> = values.iter().map(String::as_str).collect();
    format!("{{{}}}", items.join(", "))
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Equals { attr, value } => write!(f, "{attr} = {value}"),
            Atom::NotEquals { attr, value } => write!(f, "{attr} != {value}"),
            Atom::InSet { attr, values } => write!(f, "{attr} in {}", set_text(values)),
            Atom::NotInSet { attr, values } => write!(f, "{attr} not in {}", set_text(values)),
            Atom::InRankRange { attr, start, end } => write!(f, "rank({attr}) in {start}..{end}"),
            Atom::InInterval { attr, low, high } => {
                write!(f, "{attr} in [{}, {}]", number_label(*low), number_label(*high))
            }
            Atom::Threshold { attr, op, value } => write!(f, "{attr} {} {}", op.symbol(), number_label(*value)),
            Atom::PairEquals { attr } => write!(f, "x.{attr} = y.{attr}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ExprDoc", into = "ExprDoc")]
pub enum Expr {
    Atom(Atom),
    And(Vec<Expr>),
    Or(Vec<Expr>),
    Not(Box<Expr>),
    Const(bool),
}

impl Expr {
    pub fn negate(e: Expr) -> Self {
        Expr::Not(Box::new(e))
    }

    pub fn atoms(&self) -> Vec<&Atom> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<&'a Atom>) {
        match self {
            Expr::Atom(a) => out.push(a),
            Expr::And(xs) | Expr::Or(xs) => xs.iter().for_each(|x| x.collect_atoms(out)),
            Expr::Not(x) => x.collect_atoms(out),
            Expr::Const(_) => {}
        }
    }

    fn map_atoms(&self, f: &mut impl FnMut(&Atom) -> Result<Expr>) -> Result<Expr> {
        Ok(match self {
            Expr::Atom(a) => f(a)?,
            Expr::And(xs) => Expr::And(xs.iter().map(|x| x.map_atoms(f)).collect::<Result<_>>()?),
            Expr::Or(xs) => Expr::Or(xs.iter().map(|x| x.map_atoms(f)).collect::<Result<_>>()?),
            Expr::Not(x) => Expr::negate(x.map_atoms(f)?),
            Expr::Const(b) => Expr::Const(*b),
        })
    }
}

/// Antecedent, consequent class, and an optional class for every other case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rule {
    pub antecedent: Expr,
    pub consequent: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub else_class: Option<String>,
}

impl Rule {
    pub fn new(antecedent: Expr, consequent: impl Into<String>) -> Self {
        Rule {
            antecedent,
            consequent: consequent.into(),
            else_class: None,
        }
    }

    /// Resolves attribute names; unknown names are errors.
    pub fn bind<'a>(&'a self, attributes: &'a [Attribute]) -> Result<BoundRule<'a>> {
        let mut cols = Vec::new();
        for atom in self.antecedent.atoms() {
            let col = attributes
                .iter()
                .position(|a| a.name == atom.attr())
                .ok_or_else(|| Error::UnknownAttribute(atom.attr().to_string()))?;
            cols.push(col);
        }
        Ok(BoundRule {
            rule: self,
            attributes,
            cols,
        })
    }
}

/// A rule whose attribute names were resolved against a schema.
pub struct BoundRule<'a> {
    rule: &'a Rule,
    attributes: &'a [Attribute],
    /// Column of each atom in pre-order.
    cols: Vec<usize>,
}

impl BoundRule<'_> {
    pub fn eval(&self, point: &[Value]) -> bool {
        self.eval_pair(point, point)
    }

    /// Pair atoms compare `x` with `y`; every other atom looks at `x`.
    pub fn eval_pair(&self, x: &[Value], y: &[Value]) -> bool {
        let mut next = 0;
        self.walk(&self.rule.antecedent, x, y, &mut next)
    }

    fn walk(&self, e: &Expr, x: &[Value], y: &[Value], next: &mut usize) -> bool {
        match e {
            Expr::Atom(a) => {
                let col = self.cols[*next];
                *next += 1;
                a.holds(&self.attributes[col], &x[col], &y[col])
            }
            // no short-circuit: the atom cursor has to see every atom
            Expr::And(xs) => xs.iter().fold(true, |acc, s| self.walk(s, x, y, next) & acc),
            Expr::Or(xs) => xs.iter().fold(false, |acc, s| self.walk(s, x, y, next) | acc),
            Expr::Not(s) => !self.walk(s, x, y, next),
            Expr::Const(b) => *b,
        }
    }

    /// Class assigned to a point, if any.
    pub fn decide(&self, point: &[Value]) -> Option<&str> {
        if self.eval(point) {
            Some(&self.rule.consequent)
        } else {
            self.rule.else_class.as_deref()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub atom: String,
    pub attribute: String,
    pub relation: RelationKind,
    pub reason: String,
}

/// Type-legality check of every atom; an empty list means the rule is legal.
pub fn validate_rule(rule: &Rule, attributes: &[Attribute]) -> Result<Vec<Violation>> {
    rule.bind(attributes)?;
    let mut out = Vec::new();
    for atom in rule.antecedent.atoms() {
        let attr = attributes.iter().find(|a| a.name == atom.attr()).expect("bound");
        let relation = atom.relation();
        let reason = match check_operation(attr, relation) {
            Permit::Forbidden(reason) => Some(reason),
            Permit::Allowed => match atom {
                Atom::InRankRange { .. } if attr.mtype != MeasurementType::Ordinal => {
                    Some(format!("rank ranges need an ordinal attribute, `{}` is {}", attr.name, attr.mtype))
                }
                _ => None,
            },
        };
        if let Some(reason) = reason {
            out.push(Violation {
                atom: atom.to_string(),
                attribute: attr.name.clone(),
                relation,
                reason,
            });
        }
    }
    Ok(out)
}

pub fn eval_rule(rule: &Rule, attributes: &[Attribute], point: &[Value]) -> Result<bool> {
    Ok(rule.bind(attributes)?.eval(point))
}

pub fn eval_pairwise_rule(rule: &Rule, attributes: &[Attribute], x: &[Value], y: &[Value]) -> Result<bool> {
    Ok(rule.bind(attributes)?.eval_pair(x, y))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleMetrics {
    /// Rows where the antecedent holds.
    pub coverage: usize,
    /// Covered rows of the consequent class.
    pub correct: usize,
    /// `None` when nothing is covered.
    pub precision: Option<f64>,
    pub error_rate: Option<f64>,
    /// Rows decided by the else class, and how many of them are right.
    pub else_covered: usize,
    pub else_correct: usize,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub metrics: RuleMetrics,
    pub decisions: Vec<Option<String>>,
}

pub fn classify(rule: &Rule, ds: &Dataset) -> Result<Classification> {
    let target = ds.target().ok_or(Error::NoTarget)?;
    let bound = rule.bind(ds.attributes())?;
    let mut m = RuleMetrics {
        coverage: 0,
        correct: 0,
        precision: None,
        error_rate: None,
        else_covered: 0,
        else_correct: 0,
        total: ds.len(),
    };
    let mut decisions = Vec::with_capacity(ds.len());
    for row in ds.rows() {
        let actual = class_label(&row[target]);
        if bound.eval(row) {
            m.coverage += 1;
            m.correct += usize::from(actual == rule.consequent);
            decisions.push(Some(rule.consequent.clone()));
        } else if let Some(e) = &rule.else_class {
            m.else_covered += 1;
            m.else_correct += usize::from(actual == *e);
            decisions.push(Some(e.clone()));
        } else {
            decisions.push(None);
        }
    }
    if m.coverage > 0 {
        let p = m.correct as f64 / m.coverage as f64;
        m.precision = Some(p);
        m.error_rate = Some((m.coverage - m.correct) as f64 / m.coverage as f64);
    }
    Ok(Classification { metrics: m, decisions })
}

/// Rewrites threshold and interval atoms on coded nominal attributes into set
/// membership over the values whose codes pass the test; an empty set becomes
/// `Const(false)`.
pub fn normalize_rule(rule: &Rule, attributes: &[Attribute]) -> Result<Rule> {
    rule.bind(attributes)?;
    let antecedent = rule.antecedent.map_atoms(&mut |atom| {
        let attr = attributes.iter().find(|a| a.name == atom.attr()).expect("bound");
        let test: Option<&dyn Fn(f64) -> bool> = match atom {
            Atom::Threshold { op, value, .. } => Some(&move |c| op.test(c, *value)),
            Atom::InInterval { low, high, .. } => Some(&move |c| *low <= c && c <= *high),
            _ => None,
        };
        let Some(test) = test.filter(|_| attr.mtype == MeasurementType::Nominal) else {
            return Ok(Expr::Atom(atom.clone()));
        };
        let codes = attr
            .codes
            .as_ref()
            .ok_or_else(|| Error::schema(&attr.name, "threshold on a nominal attribute without a code map"))?;
        let values: BTreeSet<String> = codes.iter().filter(|(_, c)| test(**c)).map(|(v, _)| v.clone()).collect();
        Ok(if values.is_empty() {
            Expr::Const(false)
        } else {
            Expr::Atom(Atom::InSet {
                attr: attr.name.clone(),
                values,
            })
        })
    })?;
    Ok(Rule {
        antecedent,
        consequent: rule.consequent.clone(),
        else_class: rule.else_class.clone(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum OpName {
    And,
    Or,
    Not,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
struct AtomParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    value: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    values: Option<BTreeSet<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    start: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    end: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    low: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    high: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    op: Option<Cmp>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    threshold: Option<f64>,
}

/// Wire form: `{op, args}`, `{atom, attr, params}` or `{const}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum ExprDoc {
    Op {
        op: OpName,
        args: Vec<ExprDoc>,
    },
    Atom {
        atom: String,
        attr: String,
        #[serde(default)]
        params: AtomParams,
    },
    Const {
        #[serde(rename = "const")]
        value: bool,
    },
}

impl TryFrom<ExprDoc> for Expr {
    type Error = Error;

    fn try_from(doc: ExprDoc) -> Result<Self> {
        match doc {
            ExprDoc::Const { value } => Ok(Expr::Const(value)),
            ExprDoc::Op { op, args } => {
                let mut args = args.into_iter().map(Expr::try_from).collect::<Result<Vec<_>>>()?;
                match op {
                    OpName::And => Ok(Expr::And(args)),
                    OpName::Or => Ok(Expr::Or(args)),
                    OpName::Not if args.len() == 1 => Ok(Expr::negate(args.remove(0))),
                    OpName::Not => Err(Error::invalid(format!("`not` takes one argument, got {}", args.len()))),
                }
            }
            ExprDoc::Atom { atom, attr, params } => {
                let need = |field: &str| Error::schema(&attr, format!("`{atom}` atom needs `{field}`"));
                let p = params.clone();
                let a = match atom.as_str() {
                    "equals" => Atom::Equals { value: p.value.ok_or_else(|| need("value"))?, attr },
                    "not_equals" => Atom::NotEquals { value: p.value.ok_or_else(|| need("value"))?, attr },
                    "in_set" => Atom::InSet { values: p.values.ok_or_else(|| need("values"))?, attr },
                    "not_in_set" => Atom::NotInSet { values: p.values.ok_or_else(|| need("values"))?, attr },
                    "in_rank_range" => Atom::InRankRange {
                        start: p.start.ok_or_else(|| need("start"))?,
                        end: p.end.ok_or_else(|| need("end"))?,
                        attr,
                    },
                    "in_interval" => Atom::InInterval {
                        low: p.low.ok_or_else(|| need("low"))?,
                        high: p.high.ok_or_else(|| need("high"))?,
                        attr,
                    },
                    "threshold" => Atom::Threshold {
                        op: p.op.ok_or_else(|| need("op"))?,
                        value: p.threshold.ok_or_else(|| need("threshold"))?,
                        attr,
                    },
                    "pair_equals" => Atom::PairEquals { attr },
                    other => return Err(Error::schema(&attr, format!("unknown atom `{other}`"))),
                };
                Ok(Expr::Atom(a))
            }
        }
    }
}

impl From<Expr> for ExprDoc {
    fn from(e: Expr) -> Self {
        let op = |op, args: Vec<Expr>| ExprDoc::Op {
            op,
            args: args.into_iter().map(ExprDoc::from).collect(),
        };
        match e {
            Expr::Const(value) => ExprDoc::Const { value },
            Expr::And(xs) => op(OpName::And, xs),
            Expr::Or(xs) => op(OpName::Or, xs),
            Expr::Not(x) => op(OpName::Not, alloc::vec![*x]),
            Expr::Atom(a) => {
                let atom = a.name().to_string();
                let mut p = AtomParams::default();
                let attr = match a {
                    Atom::Equals { attr, value } | Atom::NotEquals { attr, value } => {
                        p.value = Some(value);
                        attr
                    }
                    Atom::InSet { attr, values } | Atom::NotInSet { attr, values } => {
                        p.values = Some(values);
                        attr
                    }
                    Atom::InRankRange { attr, start, end } => {
                        p.start = Some(start);
                        p.end = Some(end);
                        attr
                    }
                    Atom::InInterval { attr, low, high } => {
                        p.low = Some(low);
                        p.high = Some(high);
                        attr
                    }
                    Atom::Threshold { attr, op, value } => {
                        p.op = Some(op);
                        p.threshold = Some(value);
                        attr
                    }
                    Atom::PairEquals { attr } => attr,
                };
                ExprDoc::Atom { atom, attr, params: p }
            }
        }
    }
}
