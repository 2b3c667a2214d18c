//! Zeroth-order average Hamiltonian from the toggling frames, and the second-order
//! correction from the Magnus expansion next to its closed form.

use toric_pulse::analysis::{ModelParams, System};
use toric_pulse::hamiltonian::{
    second_order_closed_form, second_order_magnus, zeroth_order_average, TogglingFrameProgram,
};
use toric_pulse::sequences::build_full_symmetric_sequence;

fn main() -> toric_pulse::Result<()> {
    let p = ModelParams { l: 2, ..Default::default() };
    let sys = System::new(p.l, p.delta_gap)?;
    let schedule = build_full_symmetric_sequence(&sys.geom, p.period)?;
    let h0 = toric_pulse::analysis::free_model(&p, sys.geom.n_qubits)?;
    let avg = zeroth_order_average(&TogglingFrameProgram::new(&schedule, &h0)?)?;
    println!("H0 from frames matches closed form: {}", avg.approx_eq(&sys.zeroth_order(&p), 1e-12));
    for r in avg.records() {
        println!("  {:>+8.4} {} {:?}", r.re, r.pauli, r.cavity);
    }
    let magnus = second_order_magnus(&sys.quarter_blocks(&p), p.period)?;
    let closed = second_order_closed_form(&sys.quarters, p.period, p.delta, p.omega0, p.delta_gap)?;
    println!(
        "H2: {} terms, largest coefficient {:.3e}, Magnus = closed form: {}",
        closed.len(),
        closed.max_abs_coefficient(),
        magnus.approx_eq(&closed, 1e-13)
    );
    Ok(())
}
