//! Python bindings: the domain types, both solvers, the brute-force
//! oracles, and the simulator, exposed as `shortfall_py`.
//!
//! ```python
//! import shortfall_py as sf
//!
//! inst = sf.KnownInstance(
//!     [sf.CostFunction.sqrt(1.0), sf.CostFunction.linear(1.0)],
//!     [4.0, 2.0],
//!     budget=4.0,
//! )
//! report = inst.solve()
//! print(report.allocation, report.true_objective)
//! ```

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use shortfall_core as core;
use shortfall_core::expected_cost::ExpectedCost as CoreExpectedCost;
use shortfall_core::simulator;

fn err(e: core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A concave, increasing dissatisfaction function with V(0) = 0.
#[pyclass(name = "CostFunction", frozen, from_py_object)]
#[derive(Clone)]
struct PyCostFunction {
    inner: core::CostFunction,
}

#[pymethods]
impl PyCostFunction {
    #[staticmethod]
    fn linear(slope: f64) -> Self {
        PyCostFunction { inner: core::CostFunction::linear(slope) }
    }

    #[staticmethod]
    fn sqrt(scale: f64) -> Self {
        PyCostFunction { inner: core::CostFunction::sqrt(scale) }
    }

    #[staticmethod]
    fn log1p(scale: f64) -> Self {
        PyCostFunction { inner: core::CostFunction::log1p(scale) }
    }

    #[staticmethod]
    fn piecewise_linear(breakpoints: Vec<(f64, f64)>) -> Self {
        PyCostFunction { inner: core::CostFunction::piecewise_linear(breakpoints) }
    }

    /// Evaluate the dissatisfaction at shortfall `x >= 0`.
    fn eval(&self, x: f64) -> PyResult<f64> {
        self.inner.eval(x).map_err(err)
    }

    fn __call__(&self, x: f64) -> PyResult<f64> {
        self.eval(x)
    }

    fn violations(&self, x_max: f64) -> Vec<String> {
        self.inner.violations(x_max)
    }

    fn __repr__(&self) -> String {
        format!("CostFunction({:?})", self.inner)
    }
}

/// A non-increasing probability density on a finite support [a, b].
#[pyclass(name = "Prior", frozen, from_py_object)]
#[derive(Clone)]
struct PyPrior {
    inner: core::Prior,
}

#[pymethods]
impl PyPrior {
    #[staticmethod]
    fn uniform(lo: f64, hi: f64) -> Self {
        PyPrior { inner: core::Prior::uniform(lo, hi) }
    }

    #[staticmethod]
    fn truncated_exponential(lo: f64, hi: f64, rate: f64) -> Self {
        PyPrior { inner: core::Prior::truncated_exponential(lo, hi, rate) }
    }

    #[staticmethod]
    fn piecewise_constant(lo: f64, hi: f64, weights: Vec<f64>) -> Self {
        PyPrior { inner: core::Prior::piecewise_constant(lo, hi, weights) }
    }

    fn density(&self, f: f64) -> f64 {
        self.inner.density(f)
    }

    fn violations(&self) -> Vec<String> {
        self.inner.violations()
    }

    #[getter]
    fn lo(&self) -> f64 {
        self.inner.lo
    }

    #[getter]
    fn hi(&self) -> f64 {
        self.inner.hi
    }

    fn __repr__(&self) -> String {
        format!("Prior({:?})", self.inner)
    }
}

/// The expected shortfall cost K(s) = E[V((f - s)^+)] for one user.
#[pyclass(name = "ExpectedCost", frozen)]
struct PyExpectedCost {
    inner: CoreExpectedCost,
}

#[pymethods]
impl PyExpectedCost {
    #[new]
    fn new(cost: PyCostFunction, prior: PyPrior) -> PyResult<Self> {
        Ok(PyExpectedCost { inner: CoreExpectedCost::new(cost.inner, prior.inner).map_err(err)? })
    }

    fn eval(&self, s: f64) -> PyResult<f64> {
        self.inner.eval(s).map_err(err)
    }

    fn __call__(&self, s: f64) -> PyResult<f64> {
        self.eval(s)
    }

    /// Force the quadrature route (for cross-checking the closed forms).
    fn eval_quadrature(&self, s: f64) -> PyResult<f64> {
        self.inner.eval_quadrature(s).map_err(err)
    }

    fn support(&self) -> (f64, f64) {
        self.inner.support()
    }

    /// Finite-difference curvature check; returns a dict with the sign
    /// diagnostics.
    fn check_curvature<'py>(&self, py: Python<'py>, grid_points: usize) -> PyResult<Bound<'py, PyDict>> {
        let report = self.inner.check_curvature(grid_points).map_err(err)?;
        let out = PyDict::new(py);
        out.set_item("concave_segment_checked", report.concave_segment_checked)?;
        out.set_item("max_second_difference_concave", report.max_second_difference_concave)?;
        out.set_item("min_second_difference_convex", report.min_second_difference_convex)?;
        out.set_item("scale", report.scale)?;
        out.set_item("concave_ok", report.concave_ok)?;
        out.set_item("convex_ok", report.convex_ok)?;
        out.set_item("monotone_nonincreasing", report.monotone_nonincreasing)?;
        out.set_item("all_ok", report.all_ok())?;
        Ok(out)
    }
}

/// Greedy solve report for known-consumption instances.
#[pyclass(name = "GreedySolveReport", frozen)]
struct PyGreedyReport {
    #[pyo3(get)]
    allocation: Vec<f64>,
    #[pyo3(get)]
    slack: f64,
    #[pyo3(get)]
    lp_objective: f64,
    #[pyo3(get)]
    true_objective: f64,
    #[pyo3(get)]
    fractional_user: Option<usize>,
    #[pyo3(get)]
    sort_order: Vec<usize>,
}

#[pymethods]
impl PyGreedyReport {
    fn __repr__(&self) -> String {
        format!(
            "GreedySolveReport(allocation={:?}, lp_objective={}, true_objective={})",
            self.allocation, self.lp_objective, self.true_objective
        )
    }
}

/// SymAlloc report for symmetric unknown-consumption instances.
#[pyclass(name = "SymAllocReport", frozen)]
struct PySymReport {
    #[pyo3(get)]
    allocation: Vec<f64>,
    #[pyo3(get)]
    n_star: usize,
    #[pyo3(get)]
    beta_star: f64,
    #[pyo3(get)]
    v_star: f64,
    #[pyo3(get)]
    normalized_objective: f64,
    #[pyo3(get)]
    used_water_level: bool,
    #[pyo3(get)]
    per_n: Vec<(usize, bool, Option<f64>, Option<f64>)>,
}

#[pymethods]
impl PySymReport {
    fn __repr__(&self) -> String {
        format!(
            "SymAllocReport(allocation={:?}, n_star={}, beta_star={}, normalized_objective={})",
            self.allocation, self.n_star, self.beta_star, self.normalized_objective
        )
    }
}

fn oracle_dict<'py>(py: Python<'py>, result: &core::OracleResult) -> PyResult<Bound<'py, PyDict>> {
    let out = PyDict::new(py);
    out.set_item("allocation", result.allocation.rates.clone())?;
    out.set_item("objective", result.objective)?;
    out.set_item("points_evaluated", result.corners_evaluated)?;
    out.set_item("grid_lipschitz", result.grid_lipschitz)?;
    Ok(out)
}

/// Known mean-consumption instance.
#[pyclass(name = "KnownInstance", frozen)]
struct PyKnownInstance {
    inner: core::KnownInstance,
}

#[pymethods]
impl PyKnownInstance {
    #[new]
    fn new(costs: Vec<PyCostFunction>, mean_rates: Vec<f64>, budget: f64) -> Self {
        PyKnownInstance {
            inner: core::KnownInstance::new(
                costs.into_iter().map(|c| c.inner).collect(),
                mean_rates,
                budget,
            ),
        }
    }

    /// Violated invariants (empty list = valid).
    fn validate(&self) -> Vec<String> {
        self.inner.violations()
    }

    /// Solve the linearized program by the greedy ratio rule.
    fn solve(&self) -> PyResult<PyGreedyReport> {
        let report = core::solve_linprog(&self.inner).map_err(err)?;
        Ok(PyGreedyReport {
            allocation: report.allocation.rates,
            slack: report.allocation.slack,
            lp_objective: report.lp_objective,
            true_objective: report.true_objective,
            fractional_user: report.fractional_user,
            sort_order: report.sort_order,
        })
    }

    /// Concave objective of an allocation.
    fn true_objective(&self, rates: Vec<f64>) -> PyResult<f64> {
        let alloc = core::Allocation::new(rates, self.inner.budget);
        core::true_objective(&self.inner, &alloc).map_err(err)
    }

    /// Linearized objective of an allocation (box constraint enforced).
    fn linprog_objective(&self, rates: Vec<f64>) -> PyResult<f64> {
        let alloc = core::Allocation::new(rates, self.inner.budget);
        core::linprog_objective(&self.inner, &alloc).map_err(err)
    }

    /// Corner-enumeration oracle (size-limited).
    #[pyo3(signature = (limit = 15))]
    fn oracle<'py>(&self, py: Python<'py>, limit: usize) -> PyResult<Bound<'py, PyDict>> {
        let result =
            core::global_oracle::solve_concave_exact_with_limit(&self.inner, limit).map_err(err)?;
        oracle_dict(py, &result)
    }

    #[getter]
    fn budget(&self) -> f64 {
        self.inner.budget
    }

    #[getter]
    fn mean_rates(&self) -> Vec<f64> {
        self.inner.mean_rates.clone()
    }
}

/// Unknown mean-consumption instance (priors instead of rates).
#[pyclass(name = "UnknownInstance", frozen)]
struct PyUnknownInstance {
    inner: core::UnknownInstance,
}

#[pymethods]
impl PyUnknownInstance {
    #[new]
    #[pyo3(signature = (costs, priors, budget, symmetric = true))]
    fn new(costs: Vec<PyCostFunction>, priors: Vec<PyPrior>, budget: f64, symmetric: bool) -> Self {
        PyUnknownInstance {
            inner: core::UnknownInstance::new(
                costs.into_iter().map(|c| c.inner).collect(),
                priors.into_iter().map(|p| p.inner).collect(),
                budget,
                symmetric,
            ),
        }
    }

    fn validate(&self) -> Vec<String> {
        self.inner.violations()
    }

    /// Exact symmetric-case solver.
    fn sym_alloc(&self) -> PyResult<PySymReport> {
        let report = core::sym_alloc(&self.inner).map_err(err)?;
        Ok(PySymReport {
            allocation: report.allocation.rates,
            n_star: report.n_star,
            beta_star: report.beta_star,
            v_star: report.v_star,
            normalized_objective: report.normalized_objective,
            used_water_level: report.used_water_level,
            per_n: report
                .per_n_table
                .iter()
                .map(|e| (e.n, e.feasible, e.value, e.beta))
                .collect(),
        })
    }

    /// Exhaustive grid-search oracle (size-limited).
    #[pyo3(signature = (grid_step, limit = 3))]
    fn grid_oracle<'py>(
        &self,
        py: Python<'py>,
        grid_step: f64,
        limit: usize,
    ) -> PyResult<Bound<'py, PyDict>> {
        let result =
            core::global_oracle::solve_expected_grid_with_limit(&self.inner, grid_step, limit)
                .map_err(err)?;
        oracle_dict(py, &result)
    }

    #[getter]
    fn budget(&self) -> f64 {
        self.inner.budget
    }
}

/// Per-slot availability process c(t).
#[pyclass(name = "Availability", frozen, from_py_object)]
#[derive(Clone)]
struct PyAvailability {
    inner: simulator::AvailabilityProcess,
}

#[pymethods]
impl PyAvailability {
    #[staticmethod]
    fn constant(value: f64) -> Self {
        PyAvailability { inner: simulator::AvailabilityProcess::constant(value) }
    }

    #[staticmethod]
    #[pyo3(signature = (lo, hi, seed = 0))]
    fn iid_uniform(lo: f64, hi: f64, seed: u64) -> Self {
        PyAvailability { inner: simulator::AvailabilityProcess::iid_uniform(lo, hi, seed) }
    }

    #[staticmethod]
    #[pyo3(signature = (phase_means, noise_amplitude = 0.0, seed = 0))]
    fn cyclostationary(phase_means: Vec<f64>, noise_amplitude: f64, seed: u64) -> Self {
        PyAvailability {
            inner: simulator::AvailabilityProcess::cyclostationary(phase_means, noise_amplitude, seed),
        }
    }

    /// The analytic long-term average.
    #[getter]
    fn mean(&self) -> f64 {
        self.inner.mean()
    }
}

/// Per-user consumption process F_i(t).
#[pyclass(name = "Consumption", frozen, from_py_object)]
#[derive(Clone)]
struct PyConsumption {
    inner: simulator::ConsumptionProcess,
}

#[pymethods]
impl PyConsumption {
    #[staticmethod]
    fn deterministic(rate: f64) -> Self {
        PyConsumption { inner: simulator::ConsumptionProcess::deterministic(rate) }
    }

    #[staticmethod]
    #[pyo3(signature = (peak, prob, seed = 0))]
    fn scaled_bernoulli(peak: f64, prob: f64, seed: u64) -> Self {
        PyConsumption { inner: simulator::ConsumptionProcess::scaled_bernoulli(peak, prob, seed) }
    }

    #[staticmethod]
    #[pyo3(signature = (lo, hi, seed = 0))]
    fn iid_uniform(lo: f64, hi: f64, seed: u64) -> Self {
        PyConsumption { inner: simulator::ConsumptionProcess::iid_uniform(lo, hi, seed) }
    }

    #[getter]
    fn mean(&self) -> f64 {
        self.inner.mean()
    }
}

/// Simulate the proportional policy on discrete-time buffer dynamics.
#[pyfunction]
#[pyo3(signature = (consumption, availability, policy_rates, costs, horizon, buffer_cap = None))]
fn simulate<'py>(
    py: Python<'py>,
    consumption: Vec<PyConsumption>,
    availability: PyAvailability,
    policy_rates: Vec<f64>,
    costs: Vec<PyCostFunction>,
    horizon: u64,
    buffer_cap: Option<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let processes: Vec<_> = consumption.into_iter().map(|c| c.inner).collect();
    let cost_fns: Vec<_> = costs.into_iter().map(|c| c.inner).collect();
    let policy = core::Allocation::new(policy_rates, availability.inner.mean());
    let result = simulator::run(&processes, &availability.inner, &policy, &cost_fns, horizon, buffer_cap)
        .map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("horizon", result.horizon)?;
    out.set_item("avg_shortfall", result.avg_shortfall)?;
    out.set_item("shortfall_se", result.shortfall_se)?;
    out.set_item("avg_service", result.avg_service)?;
    out.set_item("dissatisfaction", result.dissatisfaction)?;
    out.set_item("normalized_dissatisfaction", result.normalized_dissatisfaction)?;
    out.set_item("final_queue", result.final_queue)?;
    out.set_item("max_queue", result.max_queue)?;
    out.set_item("queue_over_horizon", result.queue_over_horizon)?;
    out.set_item("realized_availability", result.realized_availability)?;
    out.set_item("slot_feasibility_violations", result.slot_feasibility_violations)?;
    Ok(out)
}

/// Single-queue stability diagnostic under constant service `s < f`.
#[pyfunction]
fn stability_trace<'py>(
    py: Python<'py>,
    consumption: PyConsumption,
    service: f64,
    horizon: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let trace = simulator::stability_trace(&consumption.inner, service, horizon).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("checkpoints", trace.checkpoints)?;
    out.set_item("zero_queue_slots", trace.zero_queue_slots)?;
    out.set_item("zero_queue_slots_late", trace.zero_queue_slots_late)?;
    out.set_item("final_ratio", trace.final_ratio)?;
    Ok(out)
}

#[pymodule]
fn shortfall_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyCostFunction>()?;
    m.add_class::<PyPrior>()?;
    m.add_class::<PyExpectedCost>()?;
    m.add_class::<PyKnownInstance>()?;
    m.add_class::<PyUnknownInstance>()?;
    m.add_class::<PyGreedyReport>()?;
    m.add_class::<PySymReport>()?;
    m.add_class::<PyAvailability>()?;
    m.add_class::<PyConsumption>()?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(stability_trace, m)?)?;
    Ok(())
}
