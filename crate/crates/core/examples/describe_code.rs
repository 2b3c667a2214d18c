//! Prints the planar code of a given size: sites, stabilizers and logical operators.

use toric_pulse::lattice::{describe, Geometry, StabilizerKind, StabilizerSet};

fn main() -> toric_pulse::Result<()> {
    let l = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(3);
    let geom = Geometry::new(l)?;
    let stabs = StabilizerSet::new(&geom);
    let d = describe(&geom, &stabs);
    println!("L = {}, {} qubits", d.l, d.n_qubits);
    println!(
        "{} stars, {} plaquettes",
        stabs.of_kind(StabilizerKind::Star).count(),
        stabs.of_kind(StabilizerKind::Plaquette).count()
    );
    for (k, q) in d.quarters.iter().enumerate() {
        println!("quarter {k}: {q:?}");
    }
    println!("logical Z: {}", d.logical_z);
    println!("logical X: {}", d.logical_x);
    Ok(())
}
