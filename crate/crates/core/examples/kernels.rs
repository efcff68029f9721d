//! Correntropy, mixture correntropy and multi-kernel correntropy of the same
//! error sample, plus the correntropy induced metric.

use mkc::kernel::{cim, correntropy_estimate, mixture_correntropy_estimate, mkc_estimate, MkcParams};

fn main() -> mkc::Result<()> {
    let errors = [-4.2, -3.9, -0.1, 0.05, 0.2, 3.8, 4.1, 120.0];

    println!("correntropy (sigma = 1)          {:.6}", correntropy_estimate(&errors, 1.0)?);
    println!(
        "mixture correntropy (0.5, 0.5)    {:.6}",
        mixture_correntropy_estimate(&errors, &[0.5, 0.5], &[0.5, 2.0])?
    );

    // kernels placed on the three error clusters
    let params = MkcParams::simplex(vec![0.25, 0.5, 0.25], vec![-4.0, 0.0, 4.0], vec![0.5, 0.5, 0.5])?;
    println!("multi-kernel correntropy          {:.6}", mkc_estimate(&errors, &params)?);
    println!("bound sum lambda_i kappa_i(0)     {:.6}", params.peak_bound());

    // CIM behaves like a scaled L2 distance near zero and saturates for large errors
    let x = [0.0; 4];
    for scale in [0.01, 0.1, 1.0, 10.0, 100.0] {
        let y = [scale, -scale, scale, 0.0];
        println!("CIM at error scale {scale:>6}: {:.6}", cim(&x, &y, 1.0)?);
    }
    Ok(())
}
