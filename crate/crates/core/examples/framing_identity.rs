//! det(f)^{-dim G / 2} against exp(-i pi eta_theta / 4) on H^{1,0}.
//! The two agree only when dim G (n+ - n-) / 2 is even, where n+ and n-
//! count phases in (0, 1/2) and (1/2, 1).

use torsion_core::spectral_invariants::framing_identity_check;
use torsion_core::Phase;

fn main() {
    let cases: [(&str, Vec<Phase>, usize); 4] = [
        ("su2, 1/2 x 2", vec![Phase::new(1, 2); 2], 3),
        ("su3, 1/3", vec![Phase::new(1, 3)], 8),
        ("su2, 1/4", vec![Phase::new(1, 4)], 3),
        ("su2, 1/4 3/4", vec![Phase::new(1, 4), Phase::new(3, 4)], 3),
    ];
    for (name, phases, dim_g) in cases {
        let f = framing_identity_check(&phases, dim_g);
        println!(
            "{name:>14}: deviation {:.3e}, obstruction {}, holds {}",
            f.deviation,
            f.obstruction,
            f.holds_exactly()
        );
    }
}
