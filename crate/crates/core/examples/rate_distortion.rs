//! R(D) of a Bernoulli source under Hamming distortion, against H2(p) - H2(D).

use repcap::prob::{binary_entropy, Alphabet, Pmf};
use repcap::rate_distortion::{rd_at_distortion, rd_curve, DistortionMeasure};

fn main() -> repcap::Result<()> {
    let p = 0.3;
    let src = Pmf::bernoulli(p)?;
    let d = DistortionMeasure::hamming(Alphabet::indexed(2));

    for pt in rd_curve(&src, &d, 6)? {
        let closed = if pt.distortion < p { binary_entropy(p) - binary_entropy(pt.distortion) } else { 0.0 };
        println!("D = {:.4}  R = {:.6}  closed form {:.6}  slope {:.3}", pt.distortion, pt.rate, closed, pt.slope);
    }
    let pt = rd_at_distortion(&src, &d, 0.1)?;
    println!("R(0.1) = {:.9}", pt.rate);
    println!("test channel {:?}", pt.test_channel);
    Ok(())
}
