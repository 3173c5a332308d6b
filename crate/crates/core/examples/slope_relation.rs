//! Initial slope of the emission rate of an inverted chain against
//! R(0)²(G − 1): superradiant burst where G > 1, immediate decay where G < 1.

use superrad::correlations::slope_relation_check;
use superrad::geometry::build_chain;

fn main() -> superrad::Result<()> {
    println!(" N     d        G     dR/dt(0)   R0^2(G-1)   rel. gap");
    for n in 2..=6 {
        for d in [0.05, 0.1, 0.3, 0.6, 2.0] {
            let c =
                slope_relation_check(&build_chain(n, d, [1.0, 0.0, 0.0], [0.0, 0.0, 1.0])?, None)?;
            println!(
                "{n:>2} {d:>5.2} {:>8.4} {:>12.5} {:>11.5} {:>10.1e}",
                c.g2,
                c.lhs,
                c.rhs,
                c.relative_discrepancy()
            );
        }
    }
    Ok(())
}
