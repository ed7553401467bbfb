//! JSON instance files.
//!
//! ```json
//! {"mode": "int", "n": 2, "m": 1, "p": 1,
//!  "Aplus": [[0, null]], "Aminus": [[null, 0]], "C": [[0, 1]],
//!  "muPlus": [2], "muMinus": [1, 1]}
//! ```
//!
//! `null` is `-inf`. Rational entries are written as `"p/q"` strings.
//! Inhomogeneous files add `bplus`, `bminus` and `d`.

use num::BigRational;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::instance::{InhomogeneousInstance, Instance};
use crate::scalar::{Float, NumMode, Scalar};
use crate::trop::{ExtScalar, TropMatrix, TropVector};

#[derive(Debug, Clone, PartialEq)]
pub enum Problem<T> {
    Homogeneous(Instance<T>),
    Inhomogeneous(InhomogeneousInstance<T>),
}

impl<T: Scalar> Problem<T> {
    pub fn base(&self) -> &Instance<T> {
        match self {
            Problem::Homogeneous(i) => i,
            Problem::Inhomogeneous(h) => &h.base,
        }
    }
}

/// A parsed file in whichever numeric mode it declares.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyProblem {
    Int(Problem<i64>),
    Rat(Problem<BigRational>),
    Float(Problem<Float>),
}

impl AnyProblem {
    pub fn mode(&self) -> NumMode {
        match self {
            AnyProblem::Int(_) => NumMode::Int,
            AnyProblem::Rat(_) => NumMode::Rat,
            AnyProblem::Float(_) => NumMode::Float,
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            AnyProblem::Int(p) => problem_to_json(p),
            AnyProblem::Rat(p) => problem_to_json(p),
            AnyProblem::Float(p) => problem_to_json(p),
        }
    }
}

pub fn parse_problem(text: &str) -> Result<AnyProblem> {
    let v: Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    problem_from_value(&v)
}

pub fn problem_from_value(v: &Value) -> Result<AnyProblem> {
    let obj = v.as_object().ok_or_else(|| Error::Parse("top level must be an object".into()))?;
    let mode = match obj.get("mode") {
        None => NumMode::Int,
        Some(Value::String(s)) => s.parse()?,
        Some(other) => return Err(Error::Parse(format!("mode must be a string, got {other}"))),
    };
    Ok(match mode {
        NumMode::Int => AnyProblem::Int(parse_typed(obj)?),
        NumMode::Rat => AnyProblem::Rat(parse_typed(obj)?),
        NumMode::Float => AnyProblem::Float(parse_typed(obj)?),
    })
}

/// Parse a file that must be homogeneous and in mode `T`.
pub fn parse_instance<T: Scalar>(text: &str) -> Result<Instance<T>> {
    let v: Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let obj = v.as_object().ok_or_else(|| Error::Parse("top level must be an object".into()))?;
    match parse_typed::<T>(obj)? {
        Problem::Homogeneous(i) => Ok(i),
        Problem::Inhomogeneous(_) => Err(Error::Parse("expected a homogeneous instance".into())),
    }
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str) -> Result<&'a Value> {
    obj.get(key).ok_or_else(|| Error::Parse(format!("missing key {key:?}")))
}

fn dim(obj: &Map<String, Value>, key: &str) -> Result<Option<usize>> {
    match obj.get(key) {
        None => Ok(None),
        Some(v) => v
            .as_u64()
            .map(|d| Some(d as usize))
            .ok_or_else(|| Error::Parse(format!("{key} must be a nonnegative integer"))),
    }
}

fn ext_from_json<T: Scalar>(v: &Value) -> Result<ExtScalar<T>> {
    match v {
        Value::Null => Ok(ExtScalar::NegInf),
        Value::String(s) if s == "-inf" => Ok(ExtScalar::NegInf),
        other => T::from_json(other).map(ExtScalar::Finite),
    }
}

fn ext_to_json<T: Scalar>(v: &ExtScalar<T>) -> Value {
    match v {
        ExtScalar::NegInf => Value::Null,
        ExtScalar::Finite(t) => t.to_json(),
    }
}

pub fn vector_from_json<T: Scalar>(v: &Value) -> Result<TropVector<T>> {
    let arr = v.as_array().ok_or_else(|| Error::Parse(format!("expected an array, got {v}")))?;
    arr.iter().map(ext_from_json).collect::<Result<Vec<_>>>().map(TropVector::new)
}

pub fn vector_to_json<T: Scalar>(x: &TropVector<T>) -> Value {
    Value::Array(x.iter().map(ext_to_json).collect())
}

fn matrix_from_json<T: Scalar>(v: &Value, name: &str, cols: usize) -> Result<TropMatrix<T>> {
    let rows = v.as_array().ok_or_else(|| Error::Parse(format!("{name} must be an array of rows")))?;
    let dense = rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let row = vector_from_json::<T>(r)?;
            if row.len() != cols {
                return Err(Error::Parse(format!("{name} row {i} has {} entries, expected {cols}", row.len())));
            }
            Ok(row.into_entries())
        })
        .collect::<Result<Vec<_>>>()?;
    TropMatrix::from_dense(cols, dense)
}

fn matrix_to_json<T: Scalar>(a: &TropMatrix<T>) -> Value {
    Value::Array(a.dense().iter().map(|r| Value::Array(r.iter().map(ext_to_json).collect())).collect())
}

fn mu_from_json(v: &Value, name: &str) -> Result<Vec<u64>> {
    let arr = v.as_array().ok_or_else(|| Error::Parse(format!("{name} must be an array")))?;
    arr.iter()
        .map(|e| e.as_u64().ok_or_else(|| Error::Parse(format!("{name} entries must be nonnegative integers"))))
        .collect()
}

fn infer_cols(obj: &Map<String, Value>) -> Option<usize> {
    if let Some(Value::Array(mu)) = obj.get("muMinus") {
        return Some(mu.len());
    }
    ["C", "Aplus", "Aminus"]
        .iter()
        .find_map(|k| obj.get(*k)?.as_array()?.first()?.as_array().map(Vec::len))
}

fn parse_typed<T: Scalar>(obj: &Map<String, Value>) -> Result<Problem<T>> {
    let n = match dim(obj, "n")? {
        Some(n) => n,
        None => infer_cols(obj).ok_or_else(|| Error::Parse("cannot determine n".into()))?,
    };
    let a_plus = matrix_from_json::<T>(field(obj, "Aplus")?, "Aplus", n)?;
    let a_minus = matrix_from_json::<T>(field(obj, "Aminus")?, "Aminus", n)?;
    let c = matrix_from_json::<T>(field(obj, "C")?, "C", n)?;
    for (key, got) in [("m", a_plus.rows()), ("p", c.rows())] {
        if let Some(expected) = dim(obj, key)? {
            if expected != got {
                return Err(Error::Parse(format!("{key} = {expected} but the matrices have {got} rows")));
            }
        }
    }
    let mu_plus = mu_from_json(field(obj, "muPlus")?, "muPlus")?;
    let mu_minus = mu_from_json(field(obj, "muMinus")?, "muMinus")?;
    let mut base = Instance::new(a_plus, a_minus, c, mu_plus, mu_minus)?;
    if let Some(tol) = obj.get("tol") {
        let tol = tol.as_f64().ok_or_else(|| Error::Parse("tol must be a number".into()))?;
        base = base.with_tol(tol);
    }
    let extras: Vec<_> = ["bplus", "bminus", "d"].iter().map(|k| obj.get(*k)).collect();
    match extras.as_slice() {
        [None, None, None] => Ok(Problem::Homogeneous(base)),
        [bp, bm, d] => {
            let (m, p) = (base.m(), base.p());
            let vec_or = |v: &Option<&Value>, len: usize| match v {
                Some(v) => vector_from_json::<T>(v),
                None => Ok(TropVector::neg_inf(len)),
            };
            let (bp, bm, d) = (vec_or(bp, m)?, vec_or(bm, m)?, vec_or(d, p)?);
            InhomogeneousInstance::new(base, bp, bm, d).map(Problem::Inhomogeneous)
        }
        _ => unreachable!("three keys"),
    }
}

pub fn instance_to_json<T: Scalar>(inst: &Instance<T>) -> Value {
    let mut v = json!({
        "mode": T::MODE.as_str(),
        "n": inst.n(),
        "m": inst.m(),
        "p": inst.p(),
        "Aplus": matrix_to_json(inst.a_plus()),
        "Aminus": matrix_to_json(inst.a_minus()),
        "C": matrix_to_json(inst.c()),
        "muPlus": inst.mu_plus(),
        "muMinus": inst.mu_minus(),
    });
    if T::MODE == NumMode::Float && inst.tol() != crate::scalar::DEFAULT_TOL {
        v["tol"] = json!(inst.tol());
    }
    v
}

pub fn problem_to_json<T: Scalar>(p: &Problem<T>) -> Value {
    match p {
        Problem::Homogeneous(i) => instance_to_json(i),
        Problem::Inhomogeneous(h) => {
            let mut v = instance_to_json(&h.base);
            v["bplus"] = vector_to_json(&h.b_plus);
            v["bminus"] = vector_to_json(&h.b_minus);
            v["d"] = vector_to_json(&h.d);
            v
        }
    }
}

/// Parse `"1,0,-inf"` style points. Rational entries may be written `p/q`.
pub fn parse_point<T: Scalar>(s: &str) -> Result<TropVector<T>> {
    s.split(',')
        .map(|tok| {
            let tok = tok.trim();
            if tok == "-inf" {
                return Ok(ExtScalar::NegInf);
            }
            let v = serde_json::from_str::<Value>(tok).unwrap_or_else(|_| Value::String(tok.to_string()));
            T::from_json(&v).map(ExtScalar::Finite)
        })
        .collect::<Result<Vec<_>>>()
        .map(TropVector::new)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{gen_random, gen_setcover, gen_setcover_nondegenerate, RandomParams};
    use crate::instance::fixtures::{i4, v};

    const I4: &str = r#"{"mode":"int","n":2,"m":1,"p":1,"Aplus":[[0,null]],"Aminus":[[null,0]],
        "C":[[0,1]],"muPlus":[2],"muMinus":[1,1]}"#;

    #[test]
    fn parses_i4() {
        assert_eq!(parse_problem(I4).unwrap(), AnyProblem::Int(Problem::Homogeneous(i4())));
        assert_eq!(parse_instance::<i64>(I4).unwrap(), i4());
    }

    #[test]
    fn round_trip_int() {
        for seed in 0..50 {
            let inst = gen_random::<i64>(&RandomParams { seed, lo: -1 << 40, hi: 1 << 40, ..Default::default() }).unwrap();
            let text = serde_json::to_string(&instance_to_json(&inst)).unwrap();
            assert_eq!(parse_instance::<i64>(&text).unwrap(), inst);
        }
    }

    #[test]
    fn round_trip_inhomogeneous_and_rational() {
        let r = gen_setcover::<i64>(2, &[vec![0], vec![1]]).unwrap();
        let p = AnyProblem::Int(Problem::Inhomogeneous(r.instance));
        assert_eq!(problem_from_value(&p.to_json()).unwrap(), p);
        let r = gen_setcover_nondegenerate::<BigRational>(2, &[vec![0, 1]]).unwrap();
        let p = AnyProblem::Rat(Problem::Inhomogeneous(r.instance));
        let text = serde_json::to_string(&p.to_json()).unwrap();
        assert_eq!(parse_problem(&text).unwrap(), p);
    }

    #[test]
    fn rejects_malformed() {
        assert!(parse_problem("{").is_err());
        assert!(parse_problem(r#"{"mode":"int","Aplus":[[0]],"Aminus":[[0]],"C":[[0,1]],"muPlus":[1],"muMinus":[1,0]}"#).is_err());
        assert!(parse_problem(r#"{"mode":"complex"}"#).is_err());
        assert!(parse_problem(r#"{"Aplus":[],"Aminus":[],"C":[[0.5]],"muPlus":[1],"muMinus":[1]}"#).is_err());
    }

    #[test]
    fn points() {
        assert_eq!(parse_point::<i64>("1, 0").unwrap(), v(&[1, 0]));
        let x = parse_point::<i64>("0,-inf").unwrap();
        assert_eq!(x[1], ExtScalar::NegInf);
        let r = parse_point::<BigRational>("1/2,3").unwrap();
        assert_eq!(r[0], ExtScalar::Finite(BigRational::new(1.into(), 2.into())));
        assert!(parse_point::<i64>("x").is_err());
    }
}
