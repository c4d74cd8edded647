//! Prints the ruin transform next to a Monte Carlo estimate for a
//! Cramér-Lundberg model with exponential claims.
//!
//!     cargo run --release -p parisian-core --example ruin_vs_mc

use parisian_core::mc::estimate_lt;
use parisian_core::{LevyModel, McConfig, Parisian, ParisianQuery};

fn main() -> parisian_core::Result<()> {
    let model = LevyModel::cramer_lundberg(1.0, 1.0, 0.5)?;
    let engine = Parisian::new(model);
    let cfg = McConfig {
        n_paths: 50_000,
        ..McConfig::for_model(&model)
    };
    println!("{:>5} {:>5} {:>12} {:>12} {:>10}", "z", "u", "formula", "mc", "stderr");
    for z in [0.0, 0.5, 1.5] {
        for u in [0.5, 1.0] {
            let q = ParisianQuery::new(1.0, 0.5, u, z);
            let f = engine.lt_ruin(&q)?;
            let e = estimate_lt(&model, &q, &cfg)?;
            println!("{z:>5} {u:>5} {f:>12.8} {:>12.8} {:>10.2e}", e.mean, e.stderr);
        }
    }
    Ok(())
}
