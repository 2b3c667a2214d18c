//! Monte Carlo gate fidelity with Gaussian pulse-angle errors, against `1 − c_err t − α c_av t²`.

use toric_pulse::analysis::{error_sweep_sigma, error_sweep_time, ModelParams};
use toric_pulse::dynamics::TraceMethod;

fn main() -> toric_pulse::Result<()> {
    let p = ModelParams { l: 2, sigma_theta: 5e-4, n_fock: 2, ..Default::default() };
    println!("t        <F>              model");
    for r in error_sweep_time(&p, 20.0, 5, 10, TraceMethod::StochasticTrace, 1, 3)? {
        println!("{:<8} {:.8} ± {:.1e}  {:.8}", r.value, r.fidelity, r.std_error, r.model);
    }
    println!("\nsigma    1 - <F> at t = 1");
    for r in error_sweep_sigma(&p, &[1e-4, 1e-3, 1e-2], 1.0, 10, TraceMethod::StochasticTrace, 1, 3)? {
        println!("{:<8.0e} {:.3e}", r.value, 1.0 - r.fidelity);
    }
    Ok(())
}
