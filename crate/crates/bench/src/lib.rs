//! Fixed problems shared by the benchmarks.

use opseries::{parse, EvolutionProblem, ExpPoly, FlowProblem, HarmonicPotential, HeatProblem, VectorField};

fn p(s: &str) -> ExpPoly {
    parse(s).expect("fixture expression parses")
}

fn rlw_with(datum: &str) -> EvolutionProblem {
    EvolutionProblem::new(p(datum))
        .expect("valid datum")
        .with_nonlinear(1, -0.5)
        .with_mixed(1.0, 2)
        .expect("valid mixed term")
}

/// `u_t + u u_x - u_xxt = 0` with `u(x,0) = x`.
pub fn rlw() -> EvolutionProblem {
    rlw_with("x")
}

/// The same equation with a trigonometric datum whose products keep spreading.
pub fn rlw_wide() -> EvolutionProblem {
    rlw_with("sin(x) + cos(2*x)")
}

/// `u_t - u_xxt = -2 u_xxxx` with `u(x,0) = sin x`.
pub fn fourth_order() -> EvolutionProblem {
    EvolutionProblem::new(p("sin(x)"))
        .expect("valid datum")
        .with_linear(4, -2.0)
        .with_mixed(1.0, 2)
        .expect("valid mixed term")
}

/// Three-dimensional heat problem with mixed trigonometric and exponential data.
pub fn heat() -> HeatProblem {
    HeatProblem::new(0.4, p("sin(x)*sin(y)*sin(z) + exp(x+y)*cos(z)")).expect("valid heat problem")
}

/// Vorticity data with polynomial-in-time forcing and an inverse-radius potential.
pub fn flow() -> FlowProblem {
    let curl_u0 = VectorField::new(p("cos(y)*cos(z)"), p("sin(x-y-z)"), p("exp(x+y+z)"));
    let curl_f = VectorField::new(p("t*cos(x)"), p("exp(t)"), p("t*z*sin(x)"));
    FlowProblem::from_vorticity(0.1, curl_u0)
        .expect("valid viscosity")
        .with_curl_forcing(curl_f)
        .with_potential(HarmonicPotential::inverse_radius())
        .expect("potential is harmonic")
        .with_reference([2.0, 0.0, 0.0, 0.0], 5.0)
}

/// Decaying vorticity data for which the heat-kernel quadrature converges.
pub fn decaying_flow() -> FlowProblem {
    let curl_u0 = VectorField::new(p("cos(y)*cos(z)"), p("sin(x-y-z)"), p("0"));
    let curl_f = VectorField::new(p("t*cos(x)"), p("0"), p("t*z*sin(x)"));
    FlowProblem::from_vorticity(0.5, curl_u0)
        .expect("valid viscosity")
        .with_curl_forcing(curl_f)
}
