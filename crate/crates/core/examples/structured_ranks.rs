//! Numerical ranks of Vandermonde, Hermite and circulant matrices, including
//! the six-by-eight circulant whose rank is smaller than its row count.

use delaymap::polybasis::PolyBasis;
use delaymap::sampling::{separated_cube_points, stream_rng};
use delaymap::structmat::{
    circulant, hermite_full, hermite_incomplete, numerical_rank, two_spike_row, vandermonde, DEFAULT_REL_TOLERANCE,
};

fn main() -> delaymap::Result<()> {
    let c = circulant(&[1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0], 6)?;
    let cert = c.rank(DEFAULT_REL_TOLERANCE)?;
    println!("6x8 circulant: rank {} with singular values {:.3?}", cert.numerical_rank, cert.singular_values);

    let row = two_spike_row(2, 3);
    println!("two-spike row {row:?}, 4 rows: rank {}", circulant(&row, 4)?.rank(DEFAULT_REL_TOLERANCE)?.numerical_rank);

    let mut rng = stream_rng(1, 0);
    let nodes = separated_cube_points(&mut rng, 2, 3, 0.1);
    for (name, degree, m) in [
        ("vandermonde", 2, vandermonde(&PolyBasis::enumerate(2, 2)?, &nodes)?),
        ("incomplete hermite", 3, hermite_incomplete(&PolyBasis::enumerate(2, 3)?, &nodes)?),
        ("full hermite", 5, hermite_full(&PolyBasis::enumerate(2, 5)?, &nodes)?),
    ] {
        let cert = numerical_rank(&m.entries, 1e-8)?;
        println!("{name:>18} (degree {degree}): {}x{} rank {}", m.rows(), m.cols(), cert.numerical_rank);
    }
    Ok(())
}
