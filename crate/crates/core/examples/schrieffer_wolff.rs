//! Cavity-induced level shifts of a single star against the `−δ²/ω₀` prediction.

use toric_pulse::analysis::single_star_shifts;

fn main() -> toric_pulse::Result<()> {
    let omega0 = 1.0;
    for delta in [0.005, 0.02, 0.05, 0.1] {
        let predicted = -delta * delta / omega0;
        for (w, shift) in single_star_shifts(1.0, delta, omega0, 8)? {
            println!("delta {delta:<5} w {w:+}: shift {shift:.6e}, predicted {predicted:.6e}");
        }
    }
    Ok(())
}
