//! Deviation at the optimal period as the lattice grows.

use toric_pulse::analysis::{scaling_report, ModelParams};

fn main() -> toric_pulse::Result<()> {
    let p = ModelParams { sigma_theta: 1e-3, ..Default::default() };
    let r = scaling_report(&p, &(3..=50).collect::<Vec<_>>())?;
    for ((l, t), d) in r.ls.iter().zip(&r.t_opt).zip(&r.deviation).step_by(6) {
        println!("L = {l:>2}: T_opt = {t:.4}, deviation = {d:.4}");
    }
    println!("fitted exponent {:.3}", r.exponent);
    Ok(())
}
