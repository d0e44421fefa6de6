//! Python bindings. Exact rationals cross the boundary as `fractions.Fraction`.

use std::fs::File;
use std::io::BufWriter;

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use latrefine::analysis::{montecarlo_volume, reproduce_paper, volume_table, ReproduceOptions};
use latrefine::figures::Figure;
use latrefine::lattice::{generate, nearest_gap, shell_histogram};
use latrefine::meshio::{to_float_mesh, write_off, write_stl};
use latrefine::voronoi::{voronoi_cell, ConvexCell};
use latrefine::{BoxR, Rat, RefinementPlan, Site, SiteClass, Vec3R};

fn value_err(e: impl ToString) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn fraction<'py>(py: Python<'py>, r: &Rat) -> PyResult<Bound<'py, PyAny>> {
    py.import("fractions")?.getattr("Fraction")?.call1((r.to_fraction_string(),))
}

type Point<'py> = (Bound<'py, PyAny>, Bound<'py, PyAny>, Bound<'py, PyAny>);

fn point<'py>(py: Python<'py>, v: &Vec3R) -> PyResult<Point<'py>> {
    Ok((fraction(py, &v.x)?, fraction(py, &v.y)?, fraction(py, &v.z)?))
}

/// Accepts int, str ("n/d") or fractions.Fraction.
fn to_rat(obj: &Bound<'_, PyAny>) -> PyResult<Rat> {
    obj.str()?.to_str()?.trim().parse().map_err(value_err)
}

fn to_vec3(obj: &Bound<'_, PyAny>) -> PyResult<Vec3R> {
    let items: Vec<Bound<'_, PyAny>> = obj.try_iter()?.collect::<PyResult<_>>()?;
    match items.as_slice() {
        [x, y, z] => Ok(Vec3R::new(to_rat(x)?, to_rat(y)?, to_rat(z)?)),
        _ => Err(PyValueError::new_err("a position needs three coordinates")),
    }
}

fn class(name: &str) -> PyResult<SiteClass> {
    name.parse().map_err(value_err)
}

/// A refinement plan such as "L0,L1,L2W".
#[pyclass(name = "Plan", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyPlan(RefinementPlan);

#[pymethods]
impl PyPlan {
    #[new]
    fn new(spec: &str) -> PyResult<Self> {
        spec.parse().map(PyPlan).map_err(value_err)
    }

    #[staticmethod]
    fn all() -> Vec<PyPlan> {
        RefinementPlan::all().into_iter().map(PyPlan).collect()
    }

    #[getter]
    fn slug(&self) -> String {
        self.0.slug()
    }

    fn classes(&self) -> Vec<&'static str> {
        self.0.classes().into_iter().map(SiteClass::name).collect()
    }

    /// Sites in the half-open box `[lo, hi)`, default the unit cell.
    #[pyo3(signature = (lo = None, hi = None))]
    fn sites<'py>(
        &self,
        py: Python<'py>,
        lo: Option<Bound<'py, PyAny>>,
        hi: Option<Bound<'py, PyAny>>,
    ) -> PyResult<Vec<(&'static str, Point<'py>)>> {
        let bbox = match (lo, hi) {
            (None, None) => BoxR::unit(),
            (Some(lo), Some(hi)) => BoxR::new(to_vec3(&lo)?, to_vec3(&hi)?).map_err(value_err)?,
            _ => return Err(PyValueError::new_err("give both lo and hi or neither")),
        };
        generate(&self.0, &bbox).iter().map(|s| Ok((s.cls.name(), point(py, &s.pos)?))).collect()
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Plan('{}')", self.0)
    }

    fn __eq__(&self, other: &PyPlan) -> bool {
        self.0 == other.0
    }
}

/// An exact convex Voronoi cell.
#[pyclass(name = "Cell", frozen)]
struct PyCell(ConvexCell);

#[pymethods]
impl PyCell {
    #[getter]
    fn site_class(&self) -> &'static str {
        self.0.generator().cls.name()
    }

    fn generator<'py>(&self, py: Python<'py>) -> PyResult<Point<'py>> {
        point(py, &self.0.generator().pos)
    }

    fn volume<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        fraction(py, &self.0.volume())
    }

    fn vertices<'py>(
        &self,
        py: Python<'py>,
    ) -> PyResult<Vec<Point<'py>>> {
        self.0.vertices().iter().map(|v| point(py, v)).collect()
    }

    /// Vertex index cycles, counter-clockwise seen from outside.
    fn faces(&self) -> Vec<Vec<usize>> {
        self.0.faces().iter().map(|f| f.cycle.clone()).collect()
    }

    /// `{"V": .., "E": .., "F": .., "faces": {sides: count}}`
    fn f_vector<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let fv = self.0.face_census();
        let d = PyDict::new(py);
        d.set_item("V", fv.vertices)?;
        d.set_item("E", fv.edges)?;
        d.set_item("F", fv.faces)?;
        d.set_item("faces", fv.face_sizes)?;
        Ok(d)
    }

    /// Raises ValueError if the cell is not a valid convex polytope.
    fn validate(&self) -> PyResult<()> {
        self.0.validate().map_err(PyValueError::new_err)
    }

    fn contains(&self, p: &Bound<'_, PyAny>) -> PyResult<bool> {
        Ok(self.0.contains(&to_vec3(p)?))
    }

    fn __repr__(&self) -> String {
        format!("Cell({}, volume={})", self.0.generator(), self.0.volume())
    }
}

/// Voronoi cell of a site; `position` defaults to the class representative.
#[pyfunction]
#[pyo3(signature = (plan, cls, position = None))]
fn cell(plan: &PyPlan, cls: &str, position: Option<Bound<'_, PyAny>>) -> PyResult<PyCell> {
    let cls = class(cls)?;
    let pos = match position {
        Some(p) => to_vec3(&p)?,
        None => cls.representative(),
    };
    voronoi_cell(&Site::new(pos, cls), &plan.0).map(PyCell).map_err(value_err)
}

/// Cells of a named figure assembly.
#[pyfunction]
fn figure_cells(name: &str) -> PyResult<Vec<PyCell>> {
    let fig: Figure = name.parse().map_err(value_err)?;
    let cells = fig.cells(&fig.plan()).map_err(value_err)?;
    Ok(cells.into_iter().map(PyCell).collect())
}

/// `[(squared distance, count), ...]` around the class representative.
#[pyfunction]
fn shells<'py>(
    py: Python<'py>,
    plan: &PyPlan,
    cls: &str,
    max_r2: &Bound<'py, PyAny>,
) -> PyResult<Vec<(Bound<'py, PyAny>, usize)>> {
    let h = shell_histogram(class(cls)?, &plan.0, &to_rat(max_r2)?).map_err(value_err)?;
    h.shells.iter().map(|(r2, n)| Ok((fraction(py, r2)?, *n))).collect()
}

/// `{class: (multiplicity, volume)}`; the volumes times multiplicities sum to one.
#[pyfunction]
fn volumes<'py>(py: Python<'py>, plan: &PyPlan) -> PyResult<Bound<'py, PyDict>> {
    let t = volume_table(&plan.0).map_err(value_err)?;
    let d = PyDict::new(py);
    for e in &t.entries {
        d.set_item(e.class.name(), (e.multiplicity, fraction(py, &e.volume)?))?;
    }
    Ok(d)
}

/// Squared distance from a newly inserted class to the sites of the previous plan.
#[pyfunction]
fn insertion_gap<'py>(py: Python<'py>, plan: &PyPlan, cls: &str) -> PyResult<Bound<'py, PyAny>> {
    fraction(py, &nearest_gap(class(cls)?, &plan.0).map_err(value_err)?)
}

/// `(estimate, standard_error)`
#[pyfunction]
#[pyo3(signature = (plan, cls, samples = 1_000_000, seed = 0))]
fn montecarlo(py: Python<'_>, plan: &PyPlan, cls: &str, samples: u64, seed: u64) -> PyResult<(f64, f64)> {
    let cls = class(cls)?;
    let e = py.detach(|| montecarlo_volume(cls, &plan.0, samples, seed)).map_err(value_err)?;
    Ok((e.estimate, e.std_error))
}

/// Run every golden check. Returns `(all_pass, text, json)`.
#[pyfunction]
#[pyo3(signature = (mc_samples = 0, seed = 1, grid_n = 48))]
fn verify(py: Python<'_>, mc_samples: u64, seed: u64, grid_n: u32) -> PyResult<(bool, String, String)> {
    let opts = ReproduceOptions { mc_samples, seed, grid_n, ..ReproduceOptions::default() };
    let rep = py.detach(|| reproduce_paper(&opts)).map_err(value_err)?;
    Ok((rep.all_pass, rep.to_string(), rep.to_json()))
}

/// Write cells to `path` as OFF or binary STL, chosen by `format` or the extension.
#[pyfunction]
#[pyo3(signature = (cells, path, format = None))]
fn write_mesh(cells: Vec<PyRef<'_, PyCell>>, path: &str, format: Option<&str>) -> PyResult<()> {
    let format = format
        .map(str::to_ascii_lowercase)
        .or_else(|| path.rsplit_once('.').map(|(_, e)| e.to_ascii_lowercase()))
        .unwrap_or_default();
    let cells: Vec<ConvexCell> = cells.iter().map(|c| c.0.clone()).collect();
    let mesh = to_float_mesh(&cells);
    let sink = BufWriter::new(File::create(path).map_err(|e| PyIOError::new_err(e.to_string()))?);
    match format.as_str() {
        "off" => write_off(&mesh, sink),
        "stl" => write_stl(&mesh, sink),
        other => return Err(PyValueError::new_err(format!("unknown mesh format {other:?}"))),
    }
    .map_err(|e| PyIOError::new_err(e.to_string()))
}

#[pymodule]
fn pylatrefine(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPlan>()?;
    m.add_class::<PyCell>()?;
    m.add_function(wrap_pyfunction!(cell, m)?)?;
    m.add_function(wrap_pyfunction!(figure_cells, m)?)?;
    m.add_function(wrap_pyfunction!(shells, m)?)?;
    m.add_function(wrap_pyfunction!(volumes, m)?)?;
    m.add_function(wrap_pyfunction!(insertion_gap, m)?)?;
    m.add_function(wrap_pyfunction!(montecarlo, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(write_mesh, m)?)?;
    Ok(())
}
