//! OSPA distance between estimated and true target positions.

use gmb_fusion::metrics::{ospa, OspaParams};

fn main() -> gmb_fusion::Result<()> {
    let params = OspaParams::new(200.0, 2.0)?;
    let truth = [[1000.0, 1000.0], [2000.0, 1500.0], [3000.0, 800.0]];
    let cases: [(&str, Vec<[f64; 2]>); 5] = [
        ("perfect", truth.to_vec()),
        ("10 m off each", truth.iter().map(|p| [p[0] + 10.0, p[1]]).collect()),
        ("one missed", truth[..2].to_vec()),
        ("one false alarm", {
            let mut v = truth.to_vec();
            v.push([5000.0, 5000.0]);
            v
        }),
        ("nothing", vec![]),
    ];
    for (name, est) in &cases {
        println!("{name:<16} {:7.2} m", ospa(est, &truth, &params));
    }
    // the cutoff caps every per-target error
    let far = [[9000.0, 9000.0], [9100.0, 9000.0], [9200.0, 9000.0]];
    println!("{:<16} {:7.2} m", "all wrong", ospa(&far, &truth, &params));
    Ok(())
}
