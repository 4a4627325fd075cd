//! Compares the stationary-phase contribution of an isolated fixed point
//! with the leading term, at k and 2k.

use torsion_core::asymptotics::{components_from_json, identification_check};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/components/framing-domain.json");
    let components = components_from_json(&serde_json::from_str(&std::fs::read_to_string(path)?)?)?;
    for c in &components {
        let r = identification_check(c, 100)?;
        println!(
            "{}: |gap(100)| {:.3e}, |gap(200)| {:.3e}, ratio {:.3}, obstruction {}",
            c.name, r.gap, r.gap_2k, r.decay_ratio, r.framing_obstruction
        );
    }
    Ok(())
}
