use pyo3::prelude::*;
use pywcop::pywcop;

#[test]
fn module_runs_inside_an_embedded_interpreter() {
    pyo3::append_to_inittab!(pywcop);
    Python::initialize();
    Python::attach(|py| {
        py.run(
            cr#"
import pywcop
one = pywcop.Function("1")
z = pywcop.SelfMap("z")
assert abs(pywcop.kernel_integral(one, z, 2, 2, 0.9) - 1.0) < 1e-8
assert abs(pywcop.Function("poly(1, 1)").hardy_norm(2) ** 2 - 2.0) < 1e-10
b = pywcop.truncation_bracket(one, z, degree=32, schedule=[8, 16])
assert abs(b["upper"] - 1.0) < 1e-8 and abs(b["lower"] - 0.5) < 1e-8
try:
    pywcop.Scenario.parse("phi = z\np = 2\n")
except pywcop.WcopError:
    pass
else:
    raise AssertionError("missing q accepted")
"#,
            None,
            None,
        )
        .unwrap();
    });
}
