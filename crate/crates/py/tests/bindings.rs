use pyo3::prelude::*;
use pyo3::types::PyDict;

fn with_module(code: &std::ffi::CStr) {
    Python::initialize();
    Python::attach(|py| {
        let m = pyo3::wrap_pymodule!(ccgeo_py::ccgeo_py)(py);
        let globals = PyDict::new(py);
        globals.set_item("cg", m).unwrap();
        if let Err(e) = py.run(code, Some(&globals), None) {
            e.print(py);
            panic!("python assertion failed");
        }
    });
}

#[test]
fn structure_properties_and_brackets() {
    with_module(
        c"
h = cg.Structure('heisenberg1')
assert (h.n, h.k) == (3, 2)
assert h.working_box == (-4.0, 4.0)
b = h.bracket(2, 1)
assert b['frame_coordinates'] == ['0', '0', '-1']
assert h.involutivity(['1/3', 0, 0])['verdict'] == 'non-involutive'
assert h.involutivity([0.25, 0.0, 0.0])['verdict'] == 'non-involutive'
",
    );
}

#[test]
fn distances_and_contact_sets() {
    with_module(
        c"
h = cg.Structure('heisenberg1')
d = h.cc_distance([0, 0, 0], [0.5, 0, 0], seed=1)
assert d['status'] == 'converged' and abs(d['upper'] - 0.5) < 1e-3
c = h.contact_set('plane', grid=11)
assert [c['points'][i] for i in c['contact']] == [[0.0, 0.0]]
",
    );
}

#[test]
fn errors_become_value_errors() {
    with_module(
        c"
for bad in (lambda: cg.Structure('no-such-model'),
            lambda: cg.Structure('heisenberg1').bracket(0, 1),
            lambda: cg.Structure('heisenberg1').involutivity([1, 2]),
            lambda: cg.run_criterion(10)):
    try:
        bad()
    except ValueError:
        pass
    else:
        raise AssertionError('expected ValueError')
",
    );
}
