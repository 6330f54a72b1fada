//! Does `C_t` act boundedly on the Hahn space `h_d`?

use ceslab::hahn::existence;
use ceslab::Weight;

fn main() {
    let cases = [
        (Weight::Power(1.0), 1.0),
        (Weight::Log, 1.0),
        (Weight::Log, 0.5),
        (Weight::Geometric(1.5), 0.5),
        (Weight::Geometric(3.0), 0.5),
        (Weight::Factorial, 0.5),
        (Weight::SuperPower, 0.1),
    ];
    for (w, t) in cases {
        let label = w.label();
        let rep = existence(&w, t);
        let sup = rep.sup();
        let upper = sup.upper.map_or("inf".into(), |u| format!("{u:.6}"));
        println!("{label:<12} t={t:<4} {} sup c_m in [{:.6}, {upper}]", rep.verdict.outcome, sup.lower);
        println!("    {}", rep.verdict.reason);
    }
}
