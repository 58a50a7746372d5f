use pgn_core::dims::Dims;
use pgn_core::lattice::{random_real_unimodular, Lattice};
use pgn_core::minima::{successive_minima, successive_minima_with_budget};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xacce5507);
    'outer: for li in 0..20 {
        let dims = if li % 2 == 0 { Dims::new(2, 2).unwrap() } else { Dims::new(3, 2).unwrap() };
        let x = random_real_unimodular(dims, 6, &mut rng);
        for gi in 0..=10 {
            let t = 2.0 * gi as f64;
            let flowed = x.apply_flow(t).unwrap();
            if let Err(e) = successive_minima(&flowed) {
                println!("FAIL li={li} t={t} dims={dims}: {e}");
                let t0 = Instant::now();
                match successive_minima_with_budget(&flowed, 3_000_000_000) {
                    Ok(l) => println!("  big budget: {l:?} in {:?}", t0.elapsed()),
                    Err(e) => println!("  big budget also failed: {e}"),
                }
                println!("  basis cols: {:?}", x.basis_columns());
                break 'outer;
            }
        }
    }
    println!("scan done");
}
