//! JSON inputs. Indices in files are 1-based; errors carry a JSON pointer to
//! the offending value.
//!
//! A file holds one of
//! - a space: `{"name"?, "n", "max_faces", "weights"?, "torsion"?}`,
//! - a bundle: `{"name"?, "base": <space>, "fiber": {"n", "max_faces"}, "twist"}`,
//! - a wall-crossing scenario: `{"name"?, "N", "rays_shared", "complex_minus",
//!   "complex_plus", "extra_rays"?, "complex_tilde"?, "canonical"?, "bundle"?}`
//!   where `bundle` is `{"base": <space>, "twist"}`.
//!
//! Torsion entries are `{"row": [...], "modulus": m}`. Objects are given either
//! as a label `{"a": [...]}` or as a pair `{"I": [...], "p": [...], "shift"?}`.

use serde_json::{Map, Value};

use crate::bundle::{build, BundleSpec, TotalSpace};
use crate::error::{Error, Result};
use crate::fan::{SimplicialComplex, StackyPresentation};
use crate::ktheory::{ScenarioBundle, WallCrossingScenario};
use crate::objects::{decode, ExceptionalObject, Label};
use crate::selector::WeightSelector;
use crate::space::Space;

#[derive(Debug, Clone)]
pub enum Input {
    Space(Space),
    Bundle(Box<TotalSpace>),
    Scenario(Box<WallCrossingScenario>),
}

impl Input {
    pub fn name(&self) -> &str {
        match self {
            Input::Space(s) => &s.name,
            Input::Bundle(b) => &b.space.name,
            Input::Scenario(s) => &s.name,
        }
    }

    /// The space on which objects, tables and windows live.
    pub fn space(&self) -> Option<&Space> {
        match self {
            Input::Space(s) => Some(s),
            Input::Bundle(b) => Some(&b.space),
            Input::Scenario(_) => None,
        }
    }
}

fn child(ptr: &str, key: impl std::fmt::Display) -> String {
    format!("{ptr}/{key}")
}

fn object<'a>(v: &'a Value, ptr: &str) -> Result<&'a Map<String, Value>> {
    v.as_object().ok_or_else(|| Error::schema(ptr, "expected an object"))
}

fn required<'a>(m: &'a Map<String, Value>, key: &str, ptr: &str) -> Result<&'a Value> {
    m.get(key).ok_or_else(|| Error::schema(ptr, format!("missing field \"{key}\"")))
}

fn integer(v: &Value, ptr: &str) -> Result<i64> {
    v.as_i64().ok_or_else(|| Error::schema(ptr, "expected an integer"))
}

fn count(v: &Value, ptr: &str) -> Result<usize> {
    let n = integer(v, ptr)?;
    usize::try_from(n).map_err(|_| Error::schema(ptr, "expected a nonnegative integer"))
}

fn array<'a>(v: &'a Value, ptr: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| Error::schema(ptr, "expected an array"))
}

fn integers(v: &Value, ptr: &str) -> Result<Vec<i64>> {
    array(v, ptr)?.iter().enumerate().map(|(i, x)| integer(x, &child(ptr, i))).collect()
}

fn vector(v: &Value, ptr: &str, len: usize) -> Result<Vec<i64>> {
    let out = integers(v, ptr)?;
    if out.len() != len {
        return Err(Error::schema(ptr, format!("expected {len} entries, found {}", out.len())));
    }
    Ok(out)
}

fn matrix(v: &Value, ptr: &str, cols: usize) -> Result<Vec<Vec<i64>>> {
    array(v, ptr)?.iter().enumerate().map(|(i, row)| vector(row, &child(ptr, i), cols)).collect()
}

/// 1-based indices below `n`, returned 0-based.
fn indices(v: &Value, ptr: &str, n: usize) -> Result<Vec<usize>> {
    array(v, ptr)?
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let p = child(ptr, i);
            let k = count(x, &p)?;
            if k == 0 || k > n {
                return Err(Error::schema(p, format!("index {k} outside 1..={n}")));
            }
            Ok(k - 1)
        })
        .collect()
}

fn name_of(m: &Map<String, Value>, ptr: &str, default: &str) -> Result<String> {
    match m.get("name") {
        None => Ok(default.to_string()),
        Some(v) => v.as_str().map(str::to_string).ok_or_else(|| Error::schema(child(ptr, "name"), "expected a string")),
    }
}

pub fn parse_complex(v: &Value, ptr: &str) -> Result<SimplicialComplex> {
    let m = object(v, ptr)?;
    let n = count(required(m, "n", ptr)?, &child(ptr, "n"))?;
    if n > 63 {
        return Err(Error::schema(child(ptr, "n"), "at most 63 coordinates are supported"));
    }
    let fptr = child(ptr, "max_faces");
    let faces = array(required(m, "max_faces", ptr)?, &fptr)?
        .iter()
        .enumerate()
        .map(|(i, f)| indices(f, &child(&fptr, i), n))
        .collect::<Result<Vec<_>>>()?;
    let complex = SimplicialComplex::new(n, faces)?;
    complex.validate().map_err(|v| Error::schema(fptr, v.to_string()))?;
    Ok(complex)
}

fn parse_torsion(m: &Map<String, Value>, ptr: &str, n: usize) -> Result<Vec<(Vec<i64>, i64)>> {
    let Some(v) = m.get("torsion") else { return Ok(Vec::new()) };
    let tptr = child(ptr, "torsion");
    array(v, &tptr)?
        .iter()
        .enumerate()
        .map(|(i, entry)| {
            let eptr = child(&tptr, i);
            let e = object(entry, &eptr)?;
            let row = vector(required(e, "row", &eptr)?, &child(&eptr, "row"), n)?;
            let mptr = child(&eptr, "modulus");
            let modulus = integer(required(e, "modulus", &eptr)?, &mptr)?;
            if modulus < 1 {
                return Err(Error::schema(mptr, "modulus must be positive"));
            }
            Ok((row, modulus))
        })
        .collect()
}

/// Complex with optional weights and torsion.
fn parse_presentation(v: &Value, ptr: &str) -> Result<StackyPresentation> {
    let complex = parse_complex(v, ptr)?;
    let m = object(v, ptr)?;
    let n = complex.ground_size();
    let weights = match m.get("weights") {
        None => Vec::new(),
        Some(w) => matrix(w, &child(ptr, "weights"), n)?,
    };
    let torsion = parse_torsion(m, ptr, n)?;
    StackyPresentation::new(complex, weights, torsion)
}

fn parse_space(v: &Value, ptr: &str) -> Result<Space> {
    let m = object(v, ptr)?;
    let name = name_of(m, ptr, "space")?;
    let p = parse_presentation(v, ptr)?;
    let n = p.complex.ground_size();
    let selector = if m.contains_key("weights") || m.contains_key("torsion") {
        WeightSelector::invariant(n, &p.weights, &p.torsion)?
    } else {
        WeightSelector::equivariant(n)
    };
    Space::new(name, p.complex, selector)
}

fn parse_bundle(v: &Value, ptr: &str) -> Result<TotalSpace> {
    let m = object(v, ptr)?;
    let name = name_of(m, ptr, "bundle")?;
    let base = parse_presentation(required(m, "base", ptr)?, &child(ptr, "base"))?;
    let fiber = parse_complex(required(m, "fiber", ptr)?, &child(ptr, "fiber"))?;
    let twist = matrix(required(m, "twist", ptr)?, &child(ptr, "twist"), fiber.ground_size())?;
    if twist.len() != base.weights.len() {
        return Err(Error::schema(child(ptr, "twist"), format!("expected {} rows", base.weights.len())));
    }
    build(&name, BundleSpec { base, fiber, twist })
}

fn parse_scenario(v: &Value, ptr: &str) -> Result<WallCrossingScenario> {
    let m = object(v, ptr)?;
    let name = name_of(m, ptr, "scenario")?;
    let n = count(required(m, "N", ptr)?, &child(ptr, "N"))?;
    let rays_ptr = child(ptr, "rays_shared");
    let rays_v = array(required(m, "rays_shared", ptr)?, &rays_ptr)?;
    if rays_v.len() != n {
        return Err(Error::schema(rays_ptr, format!("expected {n} rays")));
    }
    let dim = rays_v.first().and_then(Value::as_array).map_or(0, Vec::len);
    let rays = matrix(&Value::Array(rays_v.clone()), &rays_ptr, dim)?;
    let extra = match m.get("extra_rays") {
        None => Vec::new(),
        Some(e) => matrix(e, &child(ptr, "extra_rays"), dim)?,
    };
    let complex = |key: &str, size: usize| -> Result<SimplicialComplex> {
        let c = parse_complex(required(m, key, ptr)?, &child(ptr, key))?;
        if c.ground_size() != size {
            return Err(Error::schema(child(&child(ptr, key), "n"), format!("expected {size}")));
        }
        Ok(c)
    };
    let minus = complex("complex_minus", n)?;
    let plus = complex("complex_plus", n)?;
    let tilde = if m.contains_key("complex_tilde") {
        complex("complex_tilde", n + extra.len())?
    } else if extra.is_empty() {
        plus.clone()
    } else {
        return Err(Error::schema(ptr, "missing field \"complex_tilde\""));
    };
    let canonical = match m.get("canonical") {
        None => None,
        Some(c) => Some(vector(c, &child(ptr, "canonical"), n)?),
    };
    let bundle = match m.get("bundle") {
        None => None,
        Some(b) => {
            let bptr = child(ptr, "bundle");
            let bm = object(b, &bptr)?;
            let base = parse_presentation(required(bm, "base", &bptr)?, &child(&bptr, "base"))?;
            let twist = matrix(required(bm, "twist", &bptr)?, &child(&bptr, "twist"), n)?;
            if twist.len() != base.weights.len() {
                return Err(Error::schema(child(&bptr, "twist"), format!("expected {} rows", base.weights.len())));
            }
            Some(ScenarioBundle { base, twist })
        }
    };
    WallCrossingScenario::new(&name, rays, minus, plus, extra, tilde, canonical, bundle)
}

fn parse_json(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| Error::schema("", format!("invalid JSON: {e}")))
}

pub fn parse_input_value(v: &Value) -> Result<Input> {
    let m = object(v, "")?;
    if m.contains_key("N") {
        Ok(Input::Scenario(Box::new(parse_scenario(v, "")?)))
    } else if m.contains_key("base") {
        Ok(Input::Bundle(Box::new(parse_bundle(v, "")?)))
    } else {
        Ok(Input::Space(parse_space(v, "")?))
    }
}

pub fn parse_input(text: &str) -> Result<Input> {
    parse_input_value(&parse_json(text)?)
}

/// An object on a space with `n` coordinates.
pub fn parse_object(text: &str, n: usize) -> Result<ExceptionalObject> {
    let v = parse_json(text)?;
    let m = object(&v, "")?;
    if let Some(a) = m.get("a") {
        return Ok(decode(&Label(vector(a, "/a", n)?)));
    }
    let support = indices(required(m, "I", "")?, "/I", n)?;
    let p = vector(required(m, "p", "")?, "/p", n)?;
    let shift = match m.get("shift") {
        None => 0,
        Some(s) => integer(s, "/shift")?,
    };
    Ok(ExceptionalObject::with_shift(support, p, shift))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn spaces_parse() {
        let s = parse_input(r#"{"name": "P1", "n": 2, "max_faces": [[1], [2]]}"#).unwrap();
        assert_eq!(s.space().unwrap(), &catalog::p1());
        let s = parse_input(
            r#"{"name": "P(1,2)", "n": 2, "max_faces": [[1], [2]], "weights": [[1, 2]],
                "torsion": [{"row": [0, 1], "modulus": 2}]}"#,
        )
        .unwrap();
        assert_eq!(s.space().unwrap(), &catalog::p12());
    }

    #[test]
    fn errors_carry_pointers() {
        let pointer = |text: &str| match parse_input(text) {
            Err(Error::Schema { pointer, .. }) => pointer,
            other => panic!("{other:?}"),
        };
        assert_eq!(pointer(r#"{"n": 2, "max_faces": [[1, 2], [1]]}"#), "/max_faces");
        assert_eq!(pointer(r#"{"n": 2, "max_faces": [[1], [3]]}"#), "/max_faces/1/0");
        assert_eq!(pointer(r#"{"n": 2}"#), "");
        assert_eq!(pointer(r#"{"n": "two", "max_faces": []}"#), "/n");
        assert_eq!(
            pointer(r#"{"base": {"n": 2, "max_faces": [[1], [2]], "weights": [[1, 1]]}, "fiber": {"n": 2, "max_faces": [[1], [2]]}, "twist": [[0]]}"#),
            "/twist/0"
        );
        assert_eq!(pointer("{"), "");
    }

    #[test]
    fn bundles_and_scenarios_parse() {
        let b = parse_input(
            r#"{"name": "F1", "base": {"n": 2, "max_faces": [[1], [2]], "weights": [[1, 1]]},
                "fiber": {"n": 2, "max_faces": [[1], [2]]}, "twist": [[0, -1]]}"#,
        )
        .unwrap();
        assert_eq!(b.space().unwrap(), &catalog::f1_bundle().space);
        let s = parse_input(
            r#"{"name": "P(1,1,2)/F2", "N": 4, "rays_shared": [[1, 0], [-1, 2], [0, 1], [0, -1]],
                "complex_minus": {"n": 4, "max_faces": [[1, 2], [2, 4], [1, 4]]},
                "complex_plus": {"n": 4, "max_faces": [[1, 3], [2, 3], [2, 4], [1, 4]]}}"#,
        )
        .unwrap();
        let Input::Scenario(s) = s else { panic!() };
        let expected = catalog::p112_f2().unwrap();
        assert_eq!((&s.minus, &s.plus, &s.tilde), (&expected.minus, &expected.plus, &expected.tilde));
    }

    #[test]
    fn objects_parse() {
        assert_eq!(parse_object(r#"{"I": [1], "p": [0, 0]}"#, 2).unwrap(), ExceptionalObject::new(vec![0], vec![0, 0]));
        assert_eq!(parse_object(r#"{"a": [2, 1]}"#, 2).unwrap(), ExceptionalObject::new(vec![0, 1], vec![1, 0]));
        assert!(matches!(parse_object(r#"{"I": [1], "p": [0]}"#, 2), Err(Error::Schema { .. })));
    }
}
