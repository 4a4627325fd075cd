//! Leading-order large-k term from component summaries, in the rho form and
//! the spectral-flow form.

use torsion_core::asymptotics::{components_from_json, leading_term_rho, leading_term_sf};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/components/basic.json");
    let components = components_from_json(&serde_json::from_str(&std::fs::read_to_string(path)?)?)?;
    let rho = leading_term_rho(&components)?;
    let sf = leading_term_sf(&components)?;
    for t in &rho.terms {
        println!("{}: k^{} e^(2 pi i k {}) * {:.6}", t.component, t.exponent, t.cs_phase, t.amplitude);
    }
    for k in [10, 100, 1000] {
        println!("k = {k:>4}: rho form {:.8}, sf form {:.8}", rho.value_at(k), sf.value_at(k));
    }
    Ok(())
}
