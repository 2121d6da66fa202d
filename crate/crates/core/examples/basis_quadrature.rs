//! Generalized Legendre polynomials, Gauss rules and the norm identity.

use sfbm::polybasis::{basis_norm_sq, build_quadrature, legendre_eval, n_mult, BasisSpec};

fn main() -> sfbm::Result<()> {
    for d in [2u32, 3, 4, 5] {
        let spec = BasisSpec::new(d)?;
        let rule = build_quadrature(&spec, 32)?;
        println!(
            "d = {d}: λ = {}, rule exact to degree {}",
            spec.lambda(),
            rule.degree()
        );
        for n in [0usize, 1, 5, 20] {
            let q = rule.integrate(|t| legendre_eval(&spec, n, t).unwrap().powi(2));
            println!(
                "  n = {n:2}  P_n(0.3) = {:+.12}  N(d,n) = {:>8.0}  ∫P_n² w = {:.12e}  closed form {:.12e}",
                legendre_eval(&spec, n, 0.3)?,
                n_mult(&spec, n),
                q,
                basis_norm_sq(&spec, n)
            );
        }
    }
    Ok(())
}
