//! Closed-form coefficients of (1-t)^γ, predicted decay law and a fitted slope.

use sfbm::polybasis::{build_singular_quadrature, project, BasisSpec};
use sfbm::singular_coeffs::{
    coeff_one_minus_t_pow, fit_decay_with, predict_decay, EndpointExpansion, ParityFilter,
};

fn main() -> sfbm::Result<()> {
    let spec = BasisSpec::new(3)?;
    let rule = build_singular_quadrature(&spec, 40);
    for gamma in [0.5, 1.7, 2.0] {
        let q = project(|t| (1.0 - t).powf(gamma), &spec, 10, &rule)?;
        println!("γ = {gamma}");
        for n in [0usize, 1, 3, 10] {
            println!(
                "  a_{n:<2} closed form {:+.15e}  quadrature {:+.15e}",
                coeff_one_minus_t_pow(&spec, gamma, n)?,
                q.values[n]
            );
        }
        let law = predict_decay(&EndpointExpansion::new(vec![], vec![(1.0, gamma)])?);
        print!(
            "  predicted: {} with rate {}",
            law.mode.as_str(),
            law.rate()
        );
        match fit_decay_with(
            |n| coeff_one_minus_t_pow(&spec, gamma, n),
            100,
            2000,
            ParityFilter::All,
        ) {
            Ok(fit) => println!(", fitted slope {:.4} (R² {:.6})", fit.slope, fit.r_squared),
            Err(e) => println!(", no fit: {e}"),
        }
    }

    // singularities at both ends with equal exponents cancel on one parity
    let both = EndpointExpansion::new(vec![(1.0, 0.5)], vec![(1.0, 0.5)])?;
    let law = predict_decay(&both);
    println!(
        "(1-t)^0.5 + (1+t)^0.5: {} rate {}, odd coefficients vanish: {}",
        law.mode.as_str(),
        law.rate(),
        law.vanishes_for(3)
    );
    Ok(())
}
