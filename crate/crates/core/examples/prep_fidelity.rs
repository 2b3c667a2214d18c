//! Codeword preparation with noisy pulses and the fitted loss coefficient `k` in `1 − k σ²`.

use toric_pulse::analysis::prep_fidelity_sweep;
use toric_pulse::lattice::{Geometry, StabilizerSet};
use toric_pulse::sequences::build_prep_sequence;

fn main() -> toric_pulse::Result<()> {
    let geom = Geometry::new(3)?;
    let steps = build_prep_sequence(&geom, &StabilizerSet::new(&geom), 1.0)?;
    for (i, s) in steps.iter().enumerate() {
        println!("step {i}: stars {:?}, {} elementary pulses", s.stars, s.schedule.elementary_pulse_count());
    }
    let (records, k) = prep_fidelity_sweep(3, 1.0, &[1e-3, 3e-3, 1e-2, 3e-2], 100, 1)?;
    for r in &records {
        println!("sigma {:.0e}: F_C = {:.8} ± {:.1e}", r.value, r.fidelity, r.std_error);
    }
    println!("k = {k:.1}");
    Ok(())
}
