//! Normalized invariant form on su(n), the dual Coxeter number from the
//! adjoint trace, and the Casimir eigenvalue.

use torsion_core::lie_algebra::{chern_relation_check, dual_coxeter_identity_check, LieData};

fn main() -> Result<(), torsion_core::Error> {
    for n in 2..=4 {
        let lie = LieData::su(n)?;
        let dc = dual_coxeter_identity_check(n, 100, 1)?;
        let ch = chern_relation_check(n, 20, 2)?;
        let cas = lie.casimir_eigenvalue(1.0, 1e-10)?;
        println!(
            "su({n}): dim {}, tr(ad X ad Y) vs 2h<X,Y> {:.1e}, C_ad {:.4}, h {:.4}, chern {:.1e}",
            lie.dim,
            dc.max_deviation,
            cas.c_ad,
            cas.ratio,
            ch.max_deviation
        );
    }
    Ok(())
}
