//! Four ways to the torsion of an algebraic mapping torus: the definition,
//! the Wang sequence, the general closed form and the finite-order formula.

use torsion_core::cochain::{cohomology, CochainComplex};
use torsion_core::mapping_torus::{
    build_mapping_torus, torsion_closed_form_finite_order, torsion_closed_form_general, torsion_definition,
    torsion_via_wang, ChainEndomorphism, GeneralChoices, InnerProductPairing,
};
use torsion_core::random::cyclotomic_companion;
use torsion_core::Rational;

fn main() -> Result<(), torsion_core::Error> {
    for k in [2u32, 3, 4, 6] {
        let m = cyclotomic_companion::<Rational>(k);
        let base = CochainComplex::new(vec![m.rows()], vec![], 0.0)?;
        let f = ChainEndomorphism::new(base, vec![m], k, 0.0)?;

        let t = build_mapping_torus(&f, 0.0)?;
        let ht = cohomology(&t.complex, 0.0);
        let def = torsion_definition(&t, &ht, 0.0)?.value;
        let wang = torsion_via_wang(&f, 0.0)?.value;
        let general =
            torsion_closed_form_general(&f, &GeneralChoices::default(), &InnerProductPairing::default(), 0.0)?.value;
        let finite = torsion_closed_form_finite_order(&f, 0.0)?.value;
        println!("Phi_{k}: definition {def}, wang {wang}, general {general}, finite-order {finite}");
    }
    Ok(())
}
