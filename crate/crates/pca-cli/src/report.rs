//! Human-readable ergodicity report for a rule: the finite-cells envelope
//! criterion and the infinite-lattice certificate, with the bound that
//! decided each verdict.

use pca::envelope::{epca_ergodic_finite, epca_ergodicity_bounds};
use pca::rule::LocalRule;

pub fn check_ergodicity(rule: &LocalRule, name: &str) -> String {
    let mut out = format!("model: {name}\n");
    match epca_ergodic_finite(rule) {
        Ok(true) => out.push_str(
            "finite cells: ergodic envelope — min q0 + min q1 > 0, the envelope \
             sampler halts almost surely on every finite cell set\n",
        ),
        Ok(false) => out.push_str(
            "finite cells: non-ergodic envelope — min q0 + min q1 = 0, the \
             all-? configuration never fully resolves\n",
        ),
        Err(_) => out.push_str(
            "finite cells: criterion needs the binary alphabet; skipped\n",
        ),
    }
    match epca_ergodicity_bounds(rule) {
        Ok(verdict) => out.push_str(&format!("infinite lattice: {verdict}\n")),
        Err(_) => out.push_str("infinite lattice: bounds need the binary alphabet; skipped\n"),
    }
    out
}
