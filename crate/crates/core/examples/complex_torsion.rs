//! Torsion of a small rational cochain complex, and its independence from
//! the choice of sections and cohomology lifts.

use torsion_core::cochain::{betti_numbers, cohomology, torsion, torsion_choice_independence_check, CochainComplex};
use torsion_core::scalar::q;
use torsion_core::{Matrix, Rational};

fn main() -> Result<(), torsion_core::Error> {
    // 0 -> Q -> Q^2 -> Q -> 0, acyclic
    let d0 = Matrix::from_rows(vec![vec![q(2, 1)], vec![q(0, 1)]])?;
    let d1 = Matrix::from_rows(vec![vec![q(0, 1), q(3, 1)]])?;
    let c: CochainComplex<Rational> = CochainComplex::new(vec![1, 2, 1], vec![d0, d1], 0.0)?;

    let h = cohomology(&c, 0.0);
    let tau = torsion(&c, &h, 0.0)?;
    println!("betti  = {:?}", betti_numbers(&c, 0.0));
    println!("tau    = {}", tau.value);

    let check = torsion_choice_independence_check(&c, &h, 20, 7, 0.0)?;
    println!("20 random re-choices agree exactly: {}", check.all_equal);
    Ok(())
}
