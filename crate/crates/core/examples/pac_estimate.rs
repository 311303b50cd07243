//! Norm-absolutely-continuous support from smooth candidates. One site of the
//! chain is cut loose so that it carries an eigenvector; its cutoff is
//! rejected while the others are accepted, and λ ↦ ‖χ E(λ) χ‖ shows the jump.

use scatterkit::linalg::C64;
use scatterkit::models::{path_laplacian, position_cutoff};
use scatterkit::operator_core::{spectral_decompose, HermitianOperator, Projection};
use scatterkit::smoothness::{ac_modulus, pac_infty_estimate, uniform_grid, RegularizationParams};

fn main() -> scatterkit::Result<()> {
    let n = 128;
    let loose = n / 2;
    let mut m = path_laplacian(n).matrix().clone();
    for nb in [loose - 1, loose + 1] {
        m[(loose, nb)] = C64::new(0.0, 0.0);
        m[(nb, loose)] = C64::new(0.0, 0.0);
    }
    let s = spectral_decompose(&HermitianOperator::new(m)?)?;
    let params = RegularizationParams::standard(&s, 0.2, 0.4, (1.0, 3.0))?;

    let sites = [20, 40, loose, 90, 110];
    let candidates = sites.iter().map(|&k| position_cutoff(n, &[k])).collect::<scatterkit::Result<Vec<_>>>()?;
    let est = pac_infty_estimate(&s, &candidates, &params, 0.5)?;
    for ((site, report), accepted) in sites.iter().zip(&est.reports).zip(&est.accepted) {
        println!("site {site:3}: spread {:.3}, γ₅ {:.3}, accepted {accepted}", report.spread, report.gamma[4]);
    }
    println!("rank of the joined estimate: {}", est.projection.rank());

    let grid = uniform_grid(1.0, 3.0, 10);
    for site in [20, loose] {
        let p = Projection::new(position_cutoff(n, &[site])?)?;
        let r = ac_modulus(&p, &s, &grid, 1.0)?;
        println!("site {site:3}: max difference quotient {:.3}, Lipschitz under 1: {}", r.max_difference_quotient, r.lipschitz_flag);
    }
    Ok(())
}
