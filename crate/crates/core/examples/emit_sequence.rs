//! Compiles the symmetric pulse sequence and lists its operations and waiting times.

use toric_pulse::lattice::Geometry;
use toric_pulse::sequences::{build_full_symmetric_sequence, count_inverse_pairs};

fn main() -> toric_pulse::Result<()> {
    let geom = Geometry::new(3)?;
    let s = build_full_symmetric_sequence(&geom, 0.125)?;
    println!(
        "{} operations, {} frames, {} elementary pulses, {} inverse pairs, duration {}",
        s.operation_count(),
        s.frame_count(),
        s.elementary_pulse_count(),
        count_inverse_pairs(&s),
        s.duration()
    );
    for (j, seg) in s.segments.iter().enumerate() {
        println!("{j:>2}  {:>3} pulses  wait {:.5}", seg.operation.n_elementary(), seg.wait);
    }
    assert!(s.is_nominal_identity()?);
    Ok(())
}
