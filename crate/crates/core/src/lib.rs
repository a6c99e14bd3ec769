//! Discriminating homomorphisms for free abelian groups and for extensions of
//! centralizers over free groups.
//!
//! * [`freewords`]: reduced words in `F_k`, roots, cyclic-subgroup membership
//!   and double-coset stripping.
//! * [`zdiscrim`]: the maps `θ_{n,R}: Z^n → Z`, brute-force minimal complexity
//!   and the small-kernel lower bound.
//! * [`eoc`]: the group `G' = F_k *_{<u>} (<u> × Z^n)` (and star-shaped towers
//!   of such extensions) with canonical normal forms.
//! * [`bigpowers`]: padded words `u^{r_0} g_1 u^{r_1} ... g_k u^{r_k}` and a
//!   certified threshold beyond which they are nontrivial.
//! * [`retraction`]: the retractions `Θ^p_{n,R}: G' → F_k`, the least
//!   discriminating parameter and measured complexity curves.

pub mod bigpowers;
pub mod eoc;
pub mod error;
pub mod freewords;
pub mod retraction;
pub mod zdiscrim;

pub use error::{Error, Result};
