//! Direction-resolved correlations of an inverted pair: operator evaluation
//! with far-field detector coefficients against the far-field formula, as
//! the second detector sweeps around the x-y plane.

use superrad::correlations::far_field_inverted_g2;
use superrad::em_env::Flavor;
use superrad::geometry::{build_chain, DetectorConfig};
use superrad::scenario::Scenario;

fn main() -> superrad::Result<()> {
    let array = build_chain(2, 0.5, [1.0, 0.0, 0.0], [0.0, 0.0, 1.0])?;
    let dir_a = [1.0, 0.0, 0.0];
    println!(" angle   operator  far-field");
    for i in 0..=12 {
        let phi = std::f64::consts::PI * i as f64 / 12.0;
        let dir_b = [phi.cos(), phi.sin(), 0.0];
        let s = Scenario::inverted(array.clone()).with_flavor(
            Flavor::Directional,
            Some(DetectorConfig::new(dir_a, dir_b, None, None)?),
        );
        let op = s.evaluate()?.value;
        let ff = far_field_inverted_g2(&array, &dir_a, &dir_b)?;
        println!("{:>6.1} {op:>10.6} {ff:>10.6}", phi.to_degrees());
    }
    Ok(())
}
