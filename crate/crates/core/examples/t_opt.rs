//! Optimal sequence period for a given pulse-angle error and target time.

use toric_pulse::analysis::{c_av, c_err, fidelity_model, t_opt, ModelParams};

fn main() -> toric_pulse::Result<()> {
    for sigma in [1e-3, 1e-4] {
        let mut p = ModelParams { sigma_theta: sigma, ..Default::default() };
        p.period = t_opt(&p)?;
        println!(
            "sigma {sigma:.0e}: T_opt = {:.4}, c_err = {:.3e}, c_av = {:.3e}, F(100) = {:.4}",
            p.period,
            c_err(&p),
            c_av(&p),
            fidelity_model(&p, 100.0).value
        );
    }
    Ok(())
}
