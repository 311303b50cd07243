//! Time-dependent, weak and stationary wave operators for a rank-one
//! perturbation of the path Laplacian, and how closely they agree.

use scatterkit::linalg::{operator_norm, ComplexMatrix};
use scatterkit::models::{build_perturbation, path_laplacian, PerturbationSpec};
use scatterkit::operator_core::{spectral_decompose, HermitianOperator};
use scatterkit::wave::*;

fn main() -> scatterkit::Result<()> {
    let n = 64;
    let h = path_laplacian(n);
    let v = build_perturbation(&PerturbationSpec::RankK { sites: vec![n / 2], strength: 0.2 }, n)?;
    let h1 = HermitianOperator::new(h.matrix() + v.operator.matrix())?;
    let pair = ScatteringPair::band(spectral_decompose(&h)?, spectral_decompose(&h1)?, ComplexMatrix::identity(n), (1.0, 3.0))?;

    let times = Schedule::time(100.0, 10, Some(0.1))?;
    let eps = Schedule::epsilon(vec![0.3, 0.2, 0.15, 0.1])?;
    let grid = lambda_grid(0.6, 3.4, 0.02);
    for sign in [Sign::Plus, Sign::Minus] {
        let t = time_dependent_wave(&pair, sign, &times)?;
        let weak = weak_wave(&pair, sign, &times)?;
        let st = stationary_wave(&pair, sign, &grid, &eps)?;
        for w in [&t, &weak, &st] {
            let (iso, co) = isometry_residuals(w, &pair)?;
            println!(
                "{:>5} {:<14} converged {:<5} final trail {:.2e}  ‖W*W − P‖ {iso:.3}  WW* − P₁ excess {co:.1e}",
                sign.name(),
                w.method.name(),
                w.converged,
                w.final_trail()
            );
        }
        println!("      time vs stationary: {:.4}", operator_norm(&(&t.w - &st.w))?);
    }
    Ok(())
}
