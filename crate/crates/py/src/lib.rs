//! Python bindings. Structured values cross the boundary as plain dicts and lists in
//! the same shape as the JSON documents the `oext` command line reads and writes.

use std::collections::BTreeMap;

use num_complex::Complex64;
use pyo3::exceptions::{PyTypeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyBool, PyDict, PyFloat, PyInt, PyList, PyString, PyTuple};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Number, Value};

use oext::cli::{run_inputs, Inputs, Params, RunOptions, Verb};
use oext::orderext::{baer_sum, kernel_sequence, oext_inverse, oext_is_isomorphic, oext_is_trivial, Ambient};
use oext::realize::{classify_rotation_algebra, realize_phi, PhiSpec, RotationAlgebraModel};
use oext::unitary::{
    bott as bott_value, bott_over_loop, make_winding_pair, rotation_number, CMatrix, MatrixTrace, UnitaryPath, UnitarySample,
    WindingBlock, DEFAULT_GAP,
};
use oext::zmod::{ext_group, hom_group, parse_rat, smith_decomposition, ExtGroup, FGAbelianGroup, Int, IntMatrix};

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_value(obj: &Bound<'_, PyAny>) -> PyResult<Value> {
    if obj.is_none() {
        return Ok(Value::Null);
    }
    if obj.is_instance_of::<PyBool>() {
        return Ok(Value::Bool(obj.extract()?));
    }
    if obj.is_instance_of::<PyInt>() {
        return Ok(match obj.extract::<i64>() {
            Ok(i) => Value::from(i),
            Err(_) => Value::String(obj.extract::<Int>()?.to_string()),
        });
    }
    if obj.is_instance_of::<PyFloat>() {
        let x: f64 = obj.extract()?;
        return Number::from_f64(x).map(Value::Number).ok_or_else(|| value_error("non-finite float"));
    }
    if obj.is_instance_of::<PyString>() {
        return Ok(Value::String(obj.extract()?));
    }
    if let Ok(d) = obj.cast::<PyDict>() {
        let mut m = Map::new();
        for (k, v) in d.iter() {
            m.insert(k.extract::<String>()?, to_value(&v)?);
        }
        return Ok(Value::Object(m));
    }
    if obj.is_instance_of::<PyList>() || obj.is_instance_of::<PyTuple>() {
        return obj.try_iter()?.map(|x| to_value(&x?)).collect::<PyResult<Vec<_>>>().map(Value::Array);
    }
    if let Ok(method) = obj.getattr("to_dict") {
        return to_value(&method.call0()?);
    }
    Err(PyTypeError::new_err(format!("cannot convert {} to JSON", obj.get_type().name()?)))
}

fn from_value<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    Ok(match v {
        Value::Null => py.None().into_bound(py),
        Value::Bool(b) => PyBool::new(py, *b).to_owned().into_any(),
        Value::Number(n) => match (n.as_i64(), n.as_u64()) {
            (Some(i), _) => i.into_pyobject(py)?.into_any(),
            (None, Some(u)) => u.into_pyobject(py)?.into_any(),
            _ => n.as_f64().unwrap_or(f64::NAN).into_pyobject(py)?.into_any(),
        },
        Value::String(s) => PyString::new(py, s).into_any(),
        Value::Array(a) => PyList::new(py, a.iter().map(|x| from_value(py, x)).collect::<PyResult<Vec<_>>>()?)?.into_any(),
        Value::Object(m) => {
            let d = PyDict::new(py);
            for (k, x) in m {
                d.set_item(k, from_value(py, x)?)?;
            }
            d.into_any()
        }
    })
}

fn parse<T: DeserializeOwned>(obj: &Bound<'_, PyAny>) -> PyResult<T> {
    serde_json::from_value(to_value(obj)?).map_err(value_error)
}

fn emit<'py, T: Serialize>(py: Python<'py>, x: &T) -> PyResult<Bound<'py, PyAny>> {
    from_value(py, &serde_json::to_value(x).map_err(value_error)?)
}

fn int_matrix(rows: Vec<Vec<Int>>) -> PyResult<IntMatrix> {
    let cols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != cols) {
        return Err(value_error("rows have different lengths"));
    }
    Ok(IntMatrix::from_vec(rows.len(), cols, rows.concat()))
}

fn rows_of(m: &IntMatrix) -> Vec<Vec<Int>> {
    m.row_vectors()
}

fn complex_matrix(rows: Vec<Vec<Complex64>>) -> PyResult<CMatrix> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(value_error("unitary samples must be square"));
    }
    Ok(CMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

fn unitary(rows: Vec<Vec<Complex64>>) -> PyResult<UnitarySample> {
    UnitarySample::new(complex_matrix(rows)?).map_err(value_error)
}

/// A finitely generated abelian group `ℤ^k / rowspace(presentation)`.
#[pyclass(name = "Group", module = "pyoext", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyGroup(FGAbelianGroup);

#[pymethods]
impl PyGroup {
    /// Relations as rows over the generators.
    #[new]
    fn new(presentation: Vec<Vec<Int>>) -> PyResult<Self> {
        Ok(PyGroup(FGAbelianGroup::new(int_matrix(presentation)?)))
    }

    #[staticmethod]
    fn free(rank: usize) -> Self {
        PyGroup(FGAbelianGroup::free(rank))
    }

    /// `⊕ ℤ/d_i`, where `0` stands for `ℤ`.
    #[staticmethod]
    fn cyclic_sum(orders: Vec<Int>) -> Self {
        PyGroup(FGAbelianGroup::cyclic_sum(&orders))
    }

    #[staticmethod]
    fn from_dict(d: &Bound<'_, PyAny>) -> PyResult<Self> {
        parse(d).map(PyGroup)
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        emit(py, &self.0)
    }

    #[getter]
    fn ngens(&self) -> usize {
        self.0.ngens()
    }

    #[getter]
    fn presentation(&self) -> Vec<Vec<Int>> {
        rows_of(self.0.presentation())
    }

    /// Nontrivial invariant factors, with `0` for each free summand.
    fn invariant_factors(&self) -> Vec<Int> {
        self.0.invariant_factors()
    }

    fn free_rank(&self) -> usize {
        self.0.free_rank()
    }

    /// The order, or `None` for an infinite group.
    fn order(&self) -> Option<Int> {
        self.0.order()
    }

    fn is_trivial(&self) -> bool {
        self.0.is_trivial()
    }

    fn is_isomorphic(&self, other: &PyGroup) -> bool {
        self.0.is_isomorphic(&other.0)
    }

    fn direct_sum(&self, other: &PyGroup) -> PyGroup {
        PyGroup(self.0.direct_sum(&other.0))
    }

    /// Canonical coordinates of an element given on the generators.
    fn canonical(&self, x: Vec<Int>) -> PyResult<Vec<Int>> {
        if x.len() != self.0.ngens() {
            return Err(value_error(format!("expected {} coordinates", self.0.ngens())));
        }
        Ok(self.0.canonical(&x))
    }

    fn __eq__(&self, other: &PyGroup) -> bool {
        self.0.is_isomorphic(&other.0)
    }

    fn __repr__(&self) -> String {
        format!("Group({})", self.0.describe())
    }
}

/// `Ext(G1, G0)` with a representative extension for every class.
#[pyclass(name = "Ext", module = "pyoext", frozen)]
struct PyExt(ExtGroup);

#[pymethods]
impl PyExt {
    #[getter]
    fn group(&self) -> PyGroup {
        PyGroup(self.0.group.clone())
    }

    #[getter]
    fn summands<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        emit(py, &self.0.summands)
    }

    /// The extension presentation of the class with these coordinates.
    fn extension<'py>(&self, py: Python<'py>, coords: Vec<Int>) -> PyResult<Bound<'py, PyAny>> {
        if coords.len() != self.0.summands.len() {
            return Err(value_error(format!("expected {} coordinates", self.0.summands.len())));
        }
        emit(py, &self.0.extension_for(&coords))
    }

    /// Class coordinates of an extension presentation of `G1` by `G0`.
    fn class_of(&self, ext: &Bound<'_, PyAny>) -> PyResult<Vec<Int>> {
        Ok(self.0.class_of(&parse(ext)?))
    }

    fn __repr__(&self) -> String {
        format!("Ext({})", self.0.group.describe())
    }
}

/// An orderextension `(E, ι, q, R)` over an ambient `(G0, G1, D)`.
#[pyclass(name = "OrderExtension", module = "pyoext", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyOExt(oext::orderext::OrderExtension);

#[pymethods]
impl PyOExt {
    #[staticmethod]
    fn from_dict(d: &Bound<'_, PyAny>) -> PyResult<Self> {
        parse(d).map(PyOExt)
    }

    /// The split orderextension with `R = D ⊕ 0`.
    #[staticmethod]
    fn trivial(ambient: &Bound<'_, PyAny>) -> PyResult<Self> {
        let amb: Ambient = parse(ambient)?;
        Ok(PyOExt(oext::orderext::OrderExtension::trivial(&amb)))
    }

    /// The extension `ext` with `R` extending `D` by the rotation data `phi` on `G1`.
    #[staticmethod]
    fn with_rotation(ambient: &Bound<'_, PyAny>, ext: &Bound<'_, PyAny>, phi: &Bound<'_, PyAny>) -> PyResult<Self> {
        let amb: Ambient = parse(ambient)?;
        oext::orderext::OrderExtension::with_rotation(&amb, parse(ext)?, &parse(phi)?).map(PyOExt).map_err(value_error)
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        emit(py, &self.0)
    }

    fn __add__(&self, other: &PyOExt) -> PyResult<PyOExt> {
        baer_sum(&self.0, &other.0).map(PyOExt).map_err(value_error)
    }

    fn __neg__(&self) -> PyOExt {
        PyOExt(oext_inverse(&self.0))
    }

    fn __sub__(&self, other: &PyOExt) -> PyResult<PyOExt> {
        self.__add__(&other.__neg__())
    }

    /// Which triviality conditions hold, with witnesses.
    fn triviality<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        emit(py, &oext_is_trivial(&self.0))
    }

    fn is_trivial(&self) -> bool {
        oext_is_trivial(&self.0).trivial
    }

    /// The verdict together with a verified isomorphism or the obstruction.
    fn isomorphism<'py>(&self, py: Python<'py>, other: &PyOExt) -> PyResult<Bound<'py, PyAny>> {
        emit(py, &oext_is_isomorphic(&self.0, &other.0).map_err(value_error)?)
    }

    fn is_isomorphic(&self, other: &PyOExt) -> PyResult<bool> {
        Ok(oext_is_isomorphic(&self.0, &other.0).map_err(value_error)?.is_isomorphic())
    }

    /// The extension `ker R → ker R' → G1` when the ranges of `D` and `R` agree.
    fn kernel_sequence<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        emit(py, &kernel_sequence(&self.0).map_err(value_error)?)
    }

    fn __repr__(&self) -> String {
        let a = &self.0.ambient;
        format!("OrderExtension(G1={}, G0={}, traces={})", a.g1.describe(), a.g0.describe(), a.ntraces())
    }
}

/// `A = U·S·V` with `S` in Smith normal form and `U`, `V` unimodular.
#[pyfunction]
fn smith<'py>(py: Python<'py>, matrix: Vec<Vec<Int>>) -> PyResult<Bound<'py, PyDict>> {
    let dec = smith_decomposition(&int_matrix(matrix)?);
    let d = PyDict::new(py);
    d.set_item("s", rows_of(&dec.s))?;
    d.set_item("u", rows_of(&dec.p_inv))?;
    d.set_item("v", rows_of(&dec.q_inv))?;
    d.set_item("diagonal", dec.diagonal())?;
    d.set_item("rank", dec.rank)?;
    Ok(d)
}

/// `Hom(g, h)` as a group plus its cyclic summands.
#[pyfunction]
fn hom<'py>(py: Python<'py>, g: &PyGroup, h: &PyGroup) -> PyResult<(PyGroup, Bound<'py, PyAny>)> {
    let hg = hom_group(&g.0, &h.0);
    Ok((PyGroup(hg.group.clone()), emit(py, &hg.summands)?))
}

#[pyfunction]
fn ext(g1: &PyGroup, g0: &PyGroup) -> PyExt {
    PyExt(ext_group(&g1.0, &g0.0))
}

/// Bott element of a pair of almost commuting unitaries.
#[pyfunction]
#[pyo3(signature = (u, v, gap = DEFAULT_GAP))]
fn bott<'py>(py: Python<'py>, u: Vec<Vec<Complex64>>, v: Vec<Vec<Complex64>>, gap: f64) -> PyResult<Bound<'py, PyAny>> {
    emit(py, &bott_value(&unitary(u)?, &unitary(v)?, gap).map_err(value_error)?)
}

/// Bott elements of the winding pair built from `(m, n, l)` blocks at every grid point.
#[pyfunction]
#[pyo3(signature = (blocks, grid, gap = DEFAULT_GAP))]
fn winding_bott<'py>(py: Python<'py>, blocks: Vec<(usize, i64, i64)>, grid: usize, gap: f64) -> PyResult<Bound<'py, PyAny>> {
    let blocks = blocks.into_iter().map(|(m, n, l)| WindingBlock::new(m, n, l)).collect::<Result<Vec<_>, _>>().map_err(value_error)?;
    let (u, z) = make_winding_pair(&blocks, grid).map_err(value_error)?;
    emit(py, &bott_over_loop(&u, &z, gap).map_err(value_error)?)
}

/// Rotation number of a sampled unitary path with the normalized or full trace.
#[pyfunction]
#[pyo3(signature = (frames, trace = "normalized", gap = DEFAULT_GAP))]
fn rotation<'py>(py: Python<'py>, frames: Vec<Vec<Vec<Complex64>>>, trace: &str, gap: f64) -> PyResult<Bound<'py, PyAny>> {
    let trace = match trace {
        "normalized" => MatrixTrace::Normalized,
        "full" => MatrixTrace::Full,
        t => return Err(value_error(format!("unknown trace {t:?}"))),
    };
    let frames = frames.into_iter().map(unitary).collect::<PyResult<Vec<_>>>()?;
    let path = UnitaryPath::new(frames).map_err(value_error)?;
    emit(py, &rotation_number(&path, trace, gap).map_err(value_error)?)
}

/// Decides whether `phi` lies in `ℤ² + θℤ²` for the golden rotation angle.
/// `phi` entries and `tol` are exact decimals or `p/q` strings.
#[pyfunction]
#[pyo3(signature = (phi, qmax = 1_000_000, tol = "1e-9"))]
fn classify_rotation<'py>(py: Python<'py>, phi: (String, String), qmax: u64, tol: &str) -> PyResult<Bound<'py, PyAny>> {
    let model = RotationAlgebraModel::golden(qmax, parse_rat(tol).map_err(value_error)?).map_err(value_error)?;
    let phi = [parse_rat(&phi.0).map_err(value_error)?, parse_rat(&phi.1).map_err(value_error)?];
    emit(py, &classify_rotation_algebra(&model, &phi))
}

/// Realization certificate for a `phi` document.
#[pyfunction]
#[pyo3(signature = (phi, depth = 4))]
fn realize<'py>(py: Python<'py>, phi: &Bound<'_, PyAny>, depth: usize) -> PyResult<Bound<'py, PyAny>> {
    let spec: PhiSpec = parse(phi)?;
    emit(py, &realize_phi(&spec, depth).map_err(value_error)?)
}

/// Runs any command-line verb on in-memory input documents and returns its report record.
#[pyfunction]
#[pyo3(signature = (verb, inputs = None, params = None))]
fn run<'py>(py: Python<'py>, verb: &str, inputs: Option<&Bound<'_, PyDict>>, params: Option<&Bound<'_, PyAny>>) -> PyResult<Bound<'py, PyAny>> {
    let verb: Verb = serde_json::from_value(Value::String(verb.into())).map_err(value_error)?;
    let mut docs = BTreeMap::new();
    if let Some(inputs) = inputs {
        for (role, doc) in inputs.iter() {
            docs.insert(role.extract::<String>()?, serde_json::to_vec(&to_value(&doc)?).map_err(value_error)?);
        }
    }
    let params: Params = match params {
        Some(p) => parse(p)?,
        None => Params::default(),
    };
    emit(py, &run_inputs(verb, &Inputs::in_memory(docs), &params, RunOptions::default()))
}

#[pymodule]
fn pyoext(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGroup>()?;
    m.add_class::<PyExt>()?;
    m.add_class::<PyOExt>()?;
    m.add_function(wrap_pyfunction!(smith, m)?)?;
    m.add_function(wrap_pyfunction!(hom, m)?)?;
    m.add_function(wrap_pyfunction!(ext, m)?)?;
    m.add_function(wrap_pyfunction!(bott, m)?)?;
    m.add_function(wrap_pyfunction!(winding_bott, m)?)?;
    m.add_function(wrap_pyfunction!(rotation, m)?)?;
    m.add_function(wrap_pyfunction!(classify_rotation, m)?)?;
    m.add_function(wrap_pyfunction!(realize, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add("SCHEMA_VERSION", oext::cli::SCHEMA_VERSION)?;
    Ok(())
}
