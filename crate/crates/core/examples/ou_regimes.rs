//! Relative entropy between two OU orbits started at points, for a
//! positive, zero and negative rate.

use entroflow::closed_forms::{ou_alpha, ou_alpha_limit, regime};

fn main() -> entroflow::error::Result<()> {
    let (x, y) = ([2.0], [0.0]);
    println!("{:>6} {:>14} {:>14} {:>14}", "t", "lambda=1", "lambda=0", "lambda=-1");
    for t in [0.1, 0.5, 1.0, 2.0, 5.0, 10.0] {
        let a: Vec<f64> = [1.0, 0.0, -1.0]
            .iter()
            .map(|&l| ou_alpha(&x, &y, t, l))
            .collect::<Result<_, _>>()?;
        println!("{t:>6} {:>14.6e} {:>14.6e} {:>14.6e}", a[0], a[1], a[2]);
    }
    for l in [1.0, 0.0, -1.0] {
        println!("lambda = {l:>4}: {:<30} limit {}", regime(l).to_string(), ou_alpha_limit(&x, &y, l));
    }
    Ok(())
}
