use pyo3::prelude::*;

#[pymodule]
fn randflight(_py: Python<'_>, _m: &Bound<'_, PyModule>) -> PyResult<()> {
    Ok(())
}
