//! Rho invariant of a finite-order mapping torus from eigenphases, and the
//! spectral flow it determines together with a Chern-Simons lift.

use num_rational::Rational64;
use torsion_core::spectral_invariants::{rho_finite_order, spectral_flow, EigenPhaseData, SpectralFlowInput};
use torsion_core::Phase;

fn main() {
    // order-3 symmetry on a genus-1 surface with SU(3) coefficients
    let h10 = vec![Phase::new(1, 3)];
    let moduli = vec![Phase::new(1, 3), Phase::new(2, 3)];
    let data = EigenPhaseData::new(moduli, h10, 8);
    let r = rho_finite_order(&data);
    println!("eta_A = {}, eta_theta = {}, rho = {}", r.eta_a, r.eta_theta, r.rho);

    for lift in [Rational64::new(1, 3), Rational64::new(4, 3)] {
        let sf = spectral_flow(&SpectralFlowInput {
            cs_lift: lift,
            rho: r.rho,
            h: 3,
            dim_g: 8,
            b1: 1,
            dim_h0: 0,
            dim_h1: 0,
        });
        println!("CS lift {lift}: SF = {} (integral: {})", sf.value, sf.integral);
    }
}
