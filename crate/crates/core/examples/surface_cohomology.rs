//! Twisted cohomology of a genus-2 surface group with an irreducible SU(2)
//! representation, the symplectic form on H^1, and a handle-swapping
//! automorphism acting on it.

use torsion_core::cochain::betti_numbers;
use torsion_core::surface_rep::fixtures::{handle_swap, irreducible_genus2_su2};
use torsion_core::surface_rep::{automorphism_report, omega_property, symplectic_form, twisted_complex};

fn main() -> Result<(), torsion_core::Error> {
    let tol = 1e-9;
    let rep = irreducible_genus2_su2();
    let c = twisted_complex(&rep, tol)?;
    println!("dims  = {:?}", c.dims());
    println!("betti = {:?}", betti_numbers(&c, tol));

    let omega = symplectic_form(&rep, tol)?;
    let p = omega_property(&omega.matrix, 1e-12)?;
    println!("omega antisymmetry deviation {:.2e}", omega.antisymmetry_deviation);
    println!("Pf(omega) = {:.6}, det(-omega)/Pf^2 = {:.6}", p.pfaffian, p.theta_value);

    let aut = automorphism_report(&rep, &handle_swap(), tol)?;
    let phases: Vec<String> = aut.phases[1].iter().map(|p| p.value().to_string()).collect();
    println!("handle swap on H^1: phases [{}]", phases.join(", "));
    if let Some(d) = aut.preserves_omega {
        println!("|f* omega - omega| = {d:.2e}");
    }
    Ok(())
}
