//! Gate fidelity of the pulsed dynamics against both average Hamiltonians.

use toric_pulse::analysis::{fidelity_curve, write_csv, ModelParams};
use toric_pulse::dynamics::TraceMethod;

fn main() -> toric_pulse::Result<()> {
    let p = ModelParams { l: 2, n_fock: 3, ..Default::default() };
    let records = fidelity_curve(&p, 20.0, 8, TraceMethod::ExactDense, 1, 0)?;
    write_csv(std::io::stdout().lock(), &records)
}
