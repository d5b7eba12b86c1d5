//! Python bindings. Models, lexicons and trust files go in as JSON text;
//! reports come back as plain Python dicts and lists.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde_json::{json, Value};
use ssiforge_core::dot::{export_dot as render_dot, DotView};
use ssiforge_core::overlay::parse_trust_file;
use ssiforge_core::sim::Ratio;
use ssiforge_core::{
    derive_flows, generate_keypair, infer_roles, lint_ssi, parse_model, serialize_model, validate as validate_model,
    Model, Scenario, SimConfig, VerbLexicon,
};

fn to_python<'py>(py: Python<'py>, value: &Value) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (value.to_string(),))
}

fn load(model: &str) -> PyResult<Model> {
    parse_model(model.as_bytes()).map_err(|errors| {
        let lines: Vec<String> = errors.iter().map(ToString::to_string).collect();
        PyValueError::new_err(lines.join("\n"))
    })
}

fn load_valid(model: &str) -> PyResult<Model> {
    let model = load(model)?;
    let report = validate_model(&model);
    if let Some(first) = report.errors.first() {
        return Err(PyValueError::new_err(format!(
            "model is not valid: {} {}: {} ({} error(s))",
            first.code,
            first.offending_id,
            first.message,
            report.errors.len()
        )));
    }
    Ok(model)
}

fn lexicon(text: Option<&str>) -> PyResult<VerbLexicon> {
    match text {
        Some(text) => serde_json::from_str(text).map_err(|e| PyValueError::new_err(format!("invalid lexicon: {e}"))),
        None => Ok(VerbLexicon::default()),
    }
}

/// Parses a piStar document and returns its canonical form.
#[pyfunction]
fn canonical_model(model: &str) -> PyResult<String> {
    Ok(serialize_model(&load(model)?))
}

/// Well-formedness report: {"errors": [...], "warnings": [...]}.
#[pyfunction]
fn validate<'py>(py: Python<'py>, model: &str) -> PyResult<Bound<'py, PyAny>> {
    to_python(py, &json!(validate_model(&load(model)?)))
}

/// {"roles": [...], "flows": [...], "warnings": [...]}.
#[pyfunction]
#[pyo3(signature = (model, lexicon_json=None))]
fn roles<'py>(py: Python<'py>, model: &str, lexicon_json: Option<&str>) -> PyResult<Bound<'py, PyAny>> {
    let model = load_valid(model)?;
    let lexicon = lexicon(lexicon_json)?;
    let roles = infer_roles(&model, &lexicon);
    let flows = derive_flows(&model, &roles, &lexicon);
    let warnings = lint_ssi(&model, &roles, &flows);
    to_python(py, &json!({ "roles": roles, "flows": flows, "warnings": warnings }))
}

#[pyfunction]
#[pyo3(signature = (model, view="sd"))]
fn export_dot(model: &str, view: &str) -> PyResult<String> {
    let view: DotView = view.parse().map_err(PyValueError::new_err)?;
    Ok(render_dot(&load_valid(model)?, view))
}

/// Runs the credential exchange. Returns the root-goal labels, final
/// labels, per-flag failure counts and the trace as JSON Lines.
#[pyfunction]
#[pyo3(signature = (model, seed=0, trust_json=None, drop=None, allow_ambiguous=false, lexicon_json=None))]
fn simulate<'py>(
    py: Python<'py>,
    model: &str,
    seed: u64,
    trust_json: Option<&str>,
    drop: Option<&str>,
    allow_ambiguous: bool,
    lexicon_json: Option<&str>,
) -> PyResult<Bound<'py, PyAny>> {
    let model = load_valid(model)?;
    let entries = match trust_json {
        Some(text) => parse_trust_file(text).map_err(|e| PyValueError::new_err(format!("{}: {e}", e.code())))?,
        None => Vec::new(),
    };
    let mut config = SimConfig::with_seed(seed);
    if let Some(drop) = drop {
        config.drop_probability = drop.parse::<Ratio>().map_err(PyValueError::new_err)?;
    }
    let sim_error = |e: ssiforge_core::sim::SimError| PyRuntimeError::new_err(format!("{}: {e}", e.code()));
    let mut scenario = Scenario::with_trust(model, &lexicon(lexicon_json)?, &entries, config).map_err(sim_error)?;
    scenario.allow_ambiguous = allow_ambiguous;
    let trace = scenario.run().map_err(sim_error)?;
    let roots: Vec<Value> = scenario
        .root_labels(&trace)
        .into_iter()
        .map(|(id, name, label)| json!({"id": id, "name": name, "label": label}))
        .collect();
    to_python(
        py,
        &json!({
            "rootGoals": roots,
            "finalLabels": trace.final_labels,
            "flagFailures": trace.flag_failures(),
            "termination": trace.termination,
            "endTick": trace.end_tick,
            "trace": trace.to_jsonl(),
        }),
    )
}

/// The `did:sim` identifier of the Ed25519 key derived from a 32-byte seed.
#[pyfunction]
fn did_from_seed(seed: &[u8]) -> PyResult<String> {
    let seed: [u8; 32] = seed
        .try_into()
        .map_err(|_| PyValueError::new_err(format!("seed must be 32 bytes, got {}", seed.len())))?;
    Ok(ssiforge_core::credential::did_from_public_key(generate_keypair(seed).public_key()).to_string())
}

#[pymodule]
fn ssiforge(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(canonical_model, m)?)?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    m.add_function(wrap_pyfunction!(roles, m)?)?;
    m.add_function(wrap_pyfunction!(export_dot, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(did_from_seed, m)?)?;
    Ok(())
}
