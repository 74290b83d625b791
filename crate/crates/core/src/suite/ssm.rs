use std::fmt::Write as _;

use thiserror::Error;

use super::{input_slots, output_slots, Slot, TestCase, TestStep};
use crate::model::{Model, Ty, Value};

const BANNER_TOP: usize = 51;
const BANNER_BOTTOM: usize = 52;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct SsmError {
    pub line: usize,
    pub message: String,
}

fn render_scalar(v: &Value, ty: &Ty, out: &mut String) {
    match (v, ty) {
        (Value::Enum(o), Ty::Enum(e)) => out.push_str(&e.variants[*o]),
        (Value::Bool(b), _) => write!(out, "{b}").unwrap(),
        (Value::Int(i), _) => write!(out, "{i}").unwrap(),
        (v, _) => write!(out, "{v:?}").unwrap(),
    }
}

fn render_tuple(items: &[Value], types: &mut dyn Iterator<Item = Ty>, out: &mut String) {
    out.push('(');
    for (i, v) in items.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        let ty = types.next().expect("value matches type");
        render_inner(v, &ty, out);
    }
    out.push(')');
}

fn render_inner(v: &Value, ty: &Ty, out: &mut String) {
    match (v, ty) {
        (Value::Array(items), Ty::Array(elem, _)) => {
            render_tuple(items, &mut std::iter::repeat((**elem).clone()), out)
        }
        (Value::Record(items), Ty::Record(r)) => {
            render_tuple(items, &mut r.fields.iter().map(|(_, t)| t.clone()), out)
        }
        (v, ty) => render_scalar(v, ty, out),
    }
}

/// Script rendering of a slot value: scalars bare, arrays as `{(a, b)}`
/// with nested aggregates as `(x, y)`.
pub fn render_value(v: &Value, ty: &Ty) -> String {
    let mut out = String::new();
    match (v, ty) {
        (Value::Array(_), Ty::Array(..)) => {
            out.push('{');
            render_inner(v, ty, &mut out);
            out.push('}');
        }
        _ => render_inner(v, ty, &mut out),
    }
    out
}

/// Renders a suite as an SSM test script.
pub fn emit_ssm(model: &Model, tests: &[TestCase]) -> String {
    let (ins, outs) = (input_slots(model), output_slots(model));
    let ty_of = |slots: &[Slot], path: &str| -> Ty {
        slots
            .iter()
            .find(|s| s.path == path)
            .map(|s| s.ty.clone())
            .expect("slot of this model")
    };
    let mut out = String::new();
    for (k, t) in tests.iter().enumerate() {
        if k > 0 {
            out.push('\n');
        }
        writeln!(out, "{}", "#".repeat(BANNER_TOP)).unwrap();
        writeln!(out, "## {}, Test case: {}", model.name, t.id).unwrap();
        writeln!(out, "{}", "#".repeat(BANNER_BOTTOM)).unwrap();
        out.push('\n');
        for (i, step) in t.steps.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            writeln!(out, "#Test step {}", i + 1).unwrap();
            for (path, v) in &step.sets {
                let s = render_value(v, &ty_of(&ins, path));
                writeln!(out, "SSM::set {path} {s}").unwrap();
            }
            for (path, v) in &step.checks {
                let s = render_value(v, &ty_of(&outs, path));
                writeln!(out, "SSM::check {path} {s}").unwrap();
            }
            writeln!(out, "SSM::cycle").unwrap();
        }
    }
    out
}

struct ValueParser<'a> {
    text: &'a [u8],
    at: usize,
}

impl ValueParser<'_> {
    fn skip_ws(&mut self) {
        while self.at < self.text.len() && self.text[self.at].is_ascii_whitespace() {
            self.at += 1;
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), String> {
        self.skip_ws();
        if self.text.get(self.at) == Some(&c) {
            self.at += 1;
            Ok(())
        } else {
            Err(format!("expected `{}`", c as char))
        }
    }

    fn token(&mut self) -> &str {
        self.skip_ws();
        let start = self.at;
        while self.at < self.text.len() && !b",(){} \t".contains(&self.text[self.at]) {
            self.at += 1;
        }
        std::str::from_utf8(&self.text[start..self.at]).unwrap_or("")
    }

    fn scalar(&mut self, ty: &Ty) -> Result<Value, String> {
        let tok = self.token().to_string();
        match ty {
            Ty::Bool => match tok.as_str() {
                "true" => Ok(Value::Bool(true)),
                "false" => Ok(Value::Bool(false)),
                _ => Err(format!("expected a boolean, found `{tok}`")),
            },
            Ty::Int { lo, hi } => match tok.parse::<i64>() {
                Ok(v) if (*lo..=*hi).contains(&v) => Ok(Value::Int(v)),
                Ok(v) => Err(format!("{v} is outside {ty}")),
                Err(_) => Err(format!("expected an integer, found `{tok}`")),
            },
            Ty::Enum(e) => e
                .ordinal(&tok)
                .map(Value::Enum)
                .ok_or_else(|| format!("`{tok}` is not a variant of {}", e.name)),
            _ => unreachable!("aggregate parsed as tuple"),
        }
    }

    fn tuple(&mut self, types: Vec<Ty>) -> Result<Vec<Value>, String> {
        self.expect(b'(')?;
        let mut items = Vec::with_capacity(types.len());
        for (i, t) in types.iter().enumerate() {
            if i > 0 {
                self.expect(b',')?;
            }
            items.push(self.inner(t)?);
        }
        self.expect(b')')?;
        Ok(items)
    }

    fn inner(&mut self, ty: &Ty) -> Result<Value, String> {
        match ty {
            Ty::Array(elem, len) => Ok(Value::Array(self.tuple(vec![(**elem).clone(); *len])?)),
            Ty::Record(r) => Ok(Value::Record(
                self.tuple(r.fields.iter().map(|(_, t)| t.clone()).collect())?,
            )),
            t => self.scalar(t),
        }
    }

    fn top(&mut self, ty: &Ty) -> Result<Value, String> {
        let v = if let Ty::Array(..) = ty {
            self.expect(b'{')?;
            let v = self.inner(ty)?;
            self.expect(b'}')?;
            v
        } else {
            self.inner(ty)?
        };
        self.skip_ws();
        if self.at != self.text.len() {
            return Err("trailing characters after value".into());
        }
        Ok(v)
    }
}

pub fn parse_value(text: &str, ty: &Ty) -> Result<Value, String> {
    ValueParser {
        text: text.as_bytes(),
        at: 0,
    }
    .top(ty)
}

/// Parses an SSM script against `model`. Every step must set every input
/// slot exactly once; checks may cover any subset of output slots.
pub fn parse_ssm(model: &Model, text: &str) -> Result<Vec<TestCase>, SsmError> {
    let (ins, outs) = (input_slots(model), output_slots(model));
    let mut tests: Vec<TestCase> = Vec::new();
    let mut step: Option<(TestStep, usize)> = None;
    let err = |line: usize, message: String| SsmError { line, message };

    let finish_step = |step: &TestStep, line: usize| -> Result<(), SsmError> {
        for s in &ins {
            if !step.sets.iter().any(|(p, _)| *p == s.path) {
                return Err(err(line, format!("step does not set `{}`", s.path)));
            }
        }
        Ok(())
    };

    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let l = raw.trim();
        if l.is_empty() || (l.starts_with("###") && l.chars().all(|c| c == '#')) {
            continue;
        }
        if let Some(rest) = l.strip_prefix("## ") {
            if step.is_some() {
                return Err(err(line, "test step without `SSM::cycle`".into()));
            }
            let (name, id) = rest
                .rsplit_once(", Test case:")
                .ok_or_else(|| err(line, "malformed test header".into()))?;
            if name.trim() != model.name {
                return Err(err(
                    line,
                    format!(
                        "script is for model `{}`, not `{}`",
                        name.trim(),
                        model.name
                    ),
                ));
            }
            tests.push(TestCase {
                id: id.trim().to_string(),
                steps: Vec::new(),
                trace: None,
            });
            continue;
        }
        if l.starts_with("#Test step") {
            let Some(t) = tests.last() else {
                return Err(err(line, "test step before any test header".into()));
            };
            if step.is_some() {
                return Err(err(line, "test step without `SSM::cycle`".into()));
            }
            step = Some((
                TestStep {
                    sets: Vec::new(),
                    checks: Vec::new(),
                },
                t.steps.len() + 1,
            ));
            continue;
        }
        let mut words = l.splitn(2, char::is_whitespace);
        let cmd = words.next().unwrap_or("");
        let rest = words.next().unwrap_or("").trim();
        match cmd {
            "SSM::set" | "SSM::check" => {
                let Some((st, _)) = step.as_mut() else {
                    return Err(err(line, format!("`{cmd}` outside a test step")));
                };
                let (path, value) = rest
                    .split_once(char::is_whitespace)
                    .ok_or_else(|| err(line, format!("`{cmd}` needs a path and a value")))?;
                let (slots, list) = if cmd == "SSM::set" {
                    (&ins, &mut st.sets)
                } else {
                    (&outs, &mut st.checks)
                };
                let slot = slots.iter().find(|s| s.path == path).ok_or_else(|| {
                    let kind = if cmd == "SSM::set" { "input" } else { "output" };
                    err(line, format!("unknown {kind} `{path}`"))
                })?;
                if list.iter().any(|(p, _)| p == path) {
                    return Err(err(line, format!("`{path}` given twice in one step")));
                }
                let v = parse_value(value, &slot.ty).map_err(|m| err(line, m))?;
                list.push((path.to_string(), v));
            }
            "SSM::cycle" => {
                let Some((st, _)) = step.take() else {
                    return Err(err(line, "`SSM::cycle` outside a test step".into()));
                };
                finish_step(&st, line)?;
                tests.last_mut().unwrap().steps.push(st);
            }
            _ => return Err(err(line, format!("unrecognized line `{l}`"))),
        }
    }
    if step.is_some() {
        return Err(err(
            text.lines().count(),
            "last step has no `SSM::cycle`".into(),
        ));
    }
    Ok(tests)
}
