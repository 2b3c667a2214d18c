//! Operating-regime checks for a device with given coherence times.

use toric_pulse::analysis::{validate_constraints, DeviceScales, ModelParams};

fn main() {
    let p = ModelParams { delta: 0.05, ..Default::default() };
    let scales = DeviceScales { t1: Some(50.0), t2: Some(0.5), thermal_energy: Some(0.02) };
    for c in validate_constraints(&p, scales, 0.1) {
        println!("{:<18} ratio {:>10}  {:?}", c.name, c.ratio.map_or("-".into(), |r| format!("{r:.3}")), c.status);
    }
}
