//! Two bumps under the heat flow: entropy against the fundamental solution
//! and the distance of the rescaled orbit to the Gaussian profile.

use entroflow::report::demo::HeatDemo;

fn main() -> entroflow::error::Result<()> {
    let demo = HeatDemo::run()?;
    let r = &demo.report;
    println!("{:>5} {:>12} {:>12}", "t", "H", "L1");
    for k in 0..r.times.len() {
        println!("{:>5} {:>12.4e} {:>12.4e}", r.times[k], r.entropy[k], r.l1_to_gaussian[k]);
    }
    for c in demo.checks() {
        println!("{:<28} {}", c.name, if c.pass { "pass" } else { "FAIL" });
    }
    Ok(())
}
